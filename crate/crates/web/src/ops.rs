use prodkern::grid::{ComponentPointSet, GridPointSet};
use prodkern::interpolation::component_matrix;
use prodkern::linalg::cond2;
use prodkern::{
    run_pgreedy, CandidateGrid, ComponentKernel, Kernel, ProductKernel, StopRule, TensorNewtonInterpolant,
};
use wasm_bindgen::prelude::*;

/// Largest dyadic level accepted by [`grid_fit`].
pub const MAX_LEVEL: u32 = 8;
/// Largest evaluation resolution per axis.
pub const MAX_RES: usize = 512;

/// Franke's test function.
pub fn franke(x: f64, y: f64) -> f64 {
    let (u, v) = (9.0 * x, 9.0 * y);
    0.75 * (-((u - 2.0).powi(2) + (v - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(u + 1.0).powi(2) / 49.0 - (v + 1.0).powi(2) / 10.0).exp()
        + 0.5 * (-((u - 7.0).powi(2) + (v - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(u - 4.0).powi(2) - (v - 7.0).powi(2)).exp()
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn parse(spec: &str) -> Result<ComponentKernel, String> {
    spec.trim().parse::<ComponentKernel>().map_err(err)
}

fn planar(k1: &str, k2: &str) -> Result<ProductKernel, String> {
    let (a, b) = (parse(k1)?, parse(k2)?);
    if a.dim() != 1 || b.dim() != 1 {
        return Err("both component kernels must be univariate".into());
    }
    ProductKernel::new(vec![a, b]).map_err(err)
}

fn axis(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

fn check_res(res: usize) -> Result<(), String> {
    if !(2..=MAX_RES).contains(&res) {
        return Err(format!("resolution must lie in 2..={MAX_RES}, got {res}"));
    }
    Ok(())
}

/// Samples `s` on the `res x res` grid; returns the values in row-major
/// order with `y` as the row index, and the mean square error against
/// Franke's function.
fn sample(s: &TensorNewtonInterpolant, res: usize) -> Result<(Vec<f64>, f64), String> {
    let a = ComponentPointSet::from_scalars(&axis(res)).map_err(err)?;
    let g = GridPointSet::new(vec![a.clone(), a]).map_err(err)?;
    // Canonical order runs over y fastest.
    let by_x = s.evaluate_grid(&g).map_err(err)?;
    let xs = axis(res);
    let mut field = vec![0.0; res * res];
    let mut sq = 0.0;
    for (ix, x) in xs.iter().enumerate() {
        for (iy, y) in xs.iter().enumerate() {
            let v = by_x[ix * res + iy];
            field[iy * res + ix] = v;
            sq += (v - franke(*x, *y)).powi(2);
        }
    }
    Ok((field, sq / (res * res) as f64))
}

/// See the exported `kernelProfile`.
pub fn kernel_profile(spec: &str, radius: f64, n: usize) -> Result<Vec<f64>, String> {
    let k = parse(spec)?;
    if !(radius > 0.0 && radius.is_finite()) || n < 2 {
        return Err("need a positive radius and at least two samples".into());
    }
    let origin = vec![0.0; k.dim()];
    let mut y = origin.clone();
    (0..n)
        .map(|t| {
            y[0] = -radius + 2.0 * radius * t as f64 / (n - 1) as f64;
            k.eval(&origin, &y).map_err(err)
        })
        .collect()
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct FitResult {
    field: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    mse: f64,
    cond: f64,
}

#[wasm_bindgen]
impl FitResult {
    /// Interpolant on the evaluation grid, rows indexed by `y`.
    #[wasm_bindgen(getter)]
    pub fn field(&self) -> Vec<f64> {
        self.field.clone()
    }
    /// First coordinates of the centers.
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }
    /// Second coordinates of the centers.
    #[wasm_bindgen(getter)]
    pub fn ys(&self) -> Vec<f64> {
        self.ys.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mse(&self) -> f64 {
        self.mse
    }
    /// Spectral condition number of the grid kernel matrix.
    #[wasm_bindgen(getter)]
    pub fn cond(&self) -> f64 {
        self.cond
    }
}

/// See the exported `gridFit`.
pub fn grid_fit(k1: &str, k2: &str, i: u32, j: u32, res: usize) -> Result<FitResult, String> {
    let pk = planar(k1, k2)?;
    check_res(res)?;
    for l in [i, j] {
        if !(1..=MAX_LEVEL).contains(&l) {
            return Err(format!("grid levels must lie in 1..={MAX_LEVEL}, got {l}"));
        }
    }
    let xs = axis((1 << i) + 1);
    let ys = axis((1 << j) + 1);
    let sx = ComponentPointSet::from_scalars(&xs).map_err(err)?;
    let sy = ComponentPointSet::from_scalars(&ys).map_err(err)?;
    let g = GridPointSet::new(vec![sx, sy]).map_err(err)?;
    // The spectrum of a Kronecker product is the product of the spectra.
    let mut cond = 1.0;
    for (k, set) in pk.components().iter().zip(g.factors()) {
        cond *= cond2(&component_matrix(k, set).map_err(err)?).map_err(err)?;
    }
    let values: Vec<f64> = g.enumerate().map_err(err)?.iter().map(|p| franke(p[0], p[1])).collect();
    let s = TensorNewtonInterpolant::fit(&pk, &g, &values).map_err(err)?;
    let (field, mse) = sample(&s, res)?;
    Ok(FitResult { field, xs, ys, mse, cond })
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct GreedyResult {
    field: Vec<f64>,
    xs: Vec<f64>,
    ys: Vec<f64>,
    components: Vec<u32>,
    sup_powers: Vec<f64>,
    stop: String,
    mse: f64,
}

#[wasm_bindgen]
impl GreedyResult {
    /// Interpolant on the evaluation grid, rows indexed by `y`.
    #[wasm_bindgen(getter)]
    pub fn field(&self) -> Vec<f64> {
        self.field.clone()
    }
    /// Selected first coordinates in selection order.
    #[wasm_bindgen(getter)]
    pub fn xs(&self) -> Vec<f64> {
        self.xs.clone()
    }
    /// Selected second coordinates in selection order.
    #[wasm_bindgen(getter)]
    pub fn ys(&self) -> Vec<f64> {
        self.ys.clone()
    }
    /// Component refined at each step, 0 or 1.
    #[wasm_bindgen(getter)]
    pub fn components(&self) -> Vec<u32> {
        self.components.clone()
    }
    /// Component power maximum attained at each step.
    #[wasm_bindgen(getter, js_name = supPowers)]
    pub fn sup_powers(&self) -> Vec<f64> {
        self.sup_powers.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn stop(&self) -> String {
        self.stop.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mse(&self) -> f64 {
        self.mse
    }
}

/// See the exported `pgreedy`.
pub fn pgreedy(k1: &str, k2: &str, candidates: usize, max_points: usize, res: usize) -> Result<GreedyResult, String> {
    let pk = planar(k1, k2)?;
    check_res(res)?;
    if !(2..=1025).contains(&candidates) {
        return Err(format!("candidates per axis must lie in 2..=1025, got {candidates}"));
    }
    if max_points == 0 || max_points > 4096 {
        return Err(format!("max_points must lie in 1..=4096, got {max_points}"));
    }
    let cands = CandidateGrid::uniform(2, candidates, 0.0, 1.0).map_err(err)?;
    let rule = StopRule { max_points, ..StopRule::default() };
    let run = run_pgreedy(&pk, cands, |p| franke(p[0], p[1]), rule).map_err(err)?;
    let grid = run.state.grid().map_err(err)?;
    let coords = |i: usize| grid.factors()[i].points().iter().map(|p| p[0]).collect::<Vec<_>>();
    let (field, mse) = sample(&run.interpolant().map_err(err)?, res)?;
    Ok(GreedyResult {
        field,
        xs: coords(0),
        ys: coords(1),
        components: run.trace().iter().map(|r| r.component as u32).collect(),
        sup_powers: run.trace().iter().map(|r| r.sup_power).collect(),
        stop: format!("{:?}", run.stop),
        mse,
    })
}
