//! Grid-like point sets `X = X^1 x ... x X^M` and their canonical ordering.
//!
//! Grid points are enumerated with the last factor varying fastest: for two
//! factors of sizes `N1, N2`, the 0-based point `k` is
//! `(x^1[k / N2], x^2[k % N2])`. This is the ordering under which the grid
//! interpolation matrix is the Kronecker product of the factor matrices, and
//! every Kronecker identity in this crate uses it.

use std::collections::HashSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::kernels::{Kernel, ProductKernel};

/// Largest number of coordinates (`points * dim`) a grid may enumerate.
pub const MAX_GRID_COORDS: usize = 1 << 26;

/// Rounds to 12 significant decimal digits and returns the bit pattern, so
/// coordinates produced by different closed-form constructions compare equal.
pub fn canonical_coord(x: f64) -> u64 {
    if x == 0.0 {
        return 0.0f64.to_bits();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    rounded.to_bits()
}

pub fn canonical_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|&x| canonical_coord(x)).collect()
}

/// Pairwise distinct points in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl ComponentPointSet {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("point dimension must be at least 1".into()));
        }
        let mut seen = HashSet::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Dimension { expected: dim, got: p.len() });
            }
            if !seen.insert(canonical_key(p)) {
                return Err(Error::Shape(format!("point {i} duplicates an earlier point")));
            }
        }
        Ok(Self { dim, points })
    }

    /// Univariate set from scalar coordinates.
    pub fn from_scalars(xs: &[f64]) -> Result<Self> {
        Self::new(1, xs.iter().map(|&x| vec![x]).collect())
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let key = canonical_key(p);
        self.points.iter().any(|q| canonical_key(q) == key)
    }

    /// Appends a point not yet in the set.
    pub fn push(&mut self, p: Vec<f64>) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: p.len() });
        }
        if self.contains(&p) {
            return Err(Error::Shape("point already in the set".into()));
        }
        self.points.push(p);
        Ok(())
    }
}

/// Multi-index of the 0-based grid position `k` (last factor fastest).
pub fn index_decompose(k: usize, sizes: &[usize]) -> Result<Vec<usize>> {
    let total: usize = sizes.iter().product();
    if k >= total {
        return Err(Error::OutOfRange { index: k + 1, len: total });
    }
    let mut idx = vec![0; sizes.len()];
    let mut rest = k;
    for (slot, &n) in idx.iter_mut().zip(sizes).rev() {
        *slot = rest % n;
        rest /= n;
    }
    Ok(idx)
}

/// Inverse of [`index_decompose`].
pub fn index_compose(idx: &[usize], sizes: &[usize]) -> usize {
    idx.iter().zip(sizes).fold(0, |acc, (&i, &n)| acc * n + i)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridPointSet {
    factors: Vec<ComponentPointSet>,
}

impl GridPointSet {
    pub fn new(factors: Vec<ComponentPointSet>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Shape("a grid needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[ComponentPointSet] {
        &self.factors
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.factors.iter().map(ComponentPointSet::len).collect()
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(ComponentPointSet::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(ComponentPointSet::dim).sum()
    }

    /// Checks that factor `i` lives in the space of kernel component `i`.
    pub fn check_kernel(&self, pk: &ProductKernel) -> Result<()> {
        if self.factors.len() != pk.len() {
            return Err(Error::Shape(format!(
                "{} grid factors for {} kernel components",
                self.factors.len(),
                pk.len()
            )));
        }
        for (f, k) in self.factors.iter().zip(pk.components()) {
            if f.dim() != k.dim() {
                return Err(Error::Dimension { expected: k.dim(), got: f.dim() });
            }
        }
        Ok(())
    }

    /// The point at a multi-index: concatenation of the factor points.
    pub fn point_at(&self, idx: &[usize]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.total_dim());
        for (f, &i) in self.factors.iter().zip(idx) {
            p.extend_from_slice(f.get(i));
        }
        p
    }

    pub fn point(&self, k: usize) -> Result<Vec<f64>> {
        Ok(self.point_at(&index_decompose(k, &self.sizes())?))
    }

    /// All grid points in canonical order.
    pub fn enumerate(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.len();
        let coords = n.saturating_mul(self.total_dim());
        if coords > MAX_GRID_COORDS {
            return Err(Error::TooLarge { entries: coords, limit: MAX_GRID_COORDS });
        }
        let sizes = self.sizes();
        let mut out = Vec::with_capacity(n);
        if n == 0 {
            return Ok(out);
        }
        // Odometer over the multi-index, last position fastest.
        let mut idx = vec![0usize; sizes.len()];
        for _ in 0..n {
            out.push(self.point_at(&idx));
            for pos in (0..idx.len()).rev() {
                idx[pos] += 1;
                if idx[pos] < sizes[pos] {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Ok(out)
    }

    /// Membership of a point (canonical rounding per coordinate slice).
    pub fn contains(&self, p: &[f64]) -> bool {
        if p.len() != self.total_dim() {
            return false;
        }
        let mut start = 0;
        self.factors.iter().all(|f| {
            let slice = &p[start..start + f.dim()];
            start += f.dim();
            f.contains(slice)
        })
    }
}

/// Distinct coordinate slices of `points` per kernel component, in order of
/// first occurrence.
pub fn project(points: &[Vec<f64>], pk: &ProductKernel) -> Result<Vec<ComponentPointSet>> {
    for p in points {
        crate::kernels::check_dim(pk.dim(), p)?;
    }
    (0..pk.len())
        .map(|i| {
            let mut seen = HashSet::new();
            let slices = points
                .iter()
                .map(|p| pk.slice(p, i))
                .filter(|s| seen.insert(canonical_key(s)))
                .map(<[f64]>::to_vec)
                .collect();
            ComponentPointSet::new(pk.components()[i].dim(), slices)
        })
        .collect()
}

/// Smallest grid `Y = Y^1 x ... x Y^M` built from the projections of
/// `points`; every input point is a point of `Y`.
pub fn embed_scattered(points: &[Vec<f64>], pk: &ProductKernel) -> Result<GridPointSet> {
    GridPointSet::new(project(points, pk)?)
}

/// Reads a point set from CSV with header `x1,...,xd`.
pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let bad = |msg: String| Error::PointFile(msg);
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    for (i, h) in headers.iter().enumerate() {
        if h != format!("x{}", i + 1) {
            return Err(bad(format!("column {} must be named x{}, found `{h}`", i + 1, i + 1)));
        }
    }
    let d = headers.len();
    if d == 0 {
        return Err(bad("missing header".into()));
    }
    let mut points = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != d {
            return Err(bad(format!("row {} has {} columns, expected {d}", line + 1, rec.len())));
        }
        let p = rec
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("row {}: `{v}` is not a number", line + 1))))
            .collect::<Result<Vec<_>>>()?;
        points.push(p);
    }
    Ok(points)
}

/// Writes points as CSV with header `x1,...,xd`, using shortest round-trip
/// float formatting.
pub fn write_points_csv<W: Write>(writer: W, points: &[Vec<f64>]) -> Result<()> {
    let d = points.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::PointFile("cannot write an empty point set".into()));
    }
    let io = |e: csv::Error| Error::PointFile(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..=d).map(|i| format!("x{i}"))).map_err(io)?;
    for p in points {
        if p.len() != d {
            return Err(Error::Dimension { expected: d, got: p.len() });
        }
        w.write_record(p.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush().map_err(|e| Error::PointFile(e.to_string()))
}
