//! Mode-wise operations on row-major tensors, used to apply Kronecker
//! products `A_1 (x) ... (x) A_M` without forming them.

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, LowerTriangular};

fn check_len(data: &[f64], shape: &[usize]) -> Result<()> {
    let n: usize = shape.iter().product();
    if data.len() != n {
        return Err(Error::Shape(format!("{} entries for tensor shape {shape:?}", data.len())));
    }
    Ok(())
}

/// Multiplies mode `axis` of the tensor by `a` (`r x shape[axis]`); the
/// result has `shape[axis]` replaced by `r`.
pub fn mode_product(data: &[f64], shape: &[usize], axis: usize, a: &DenseMatrix) -> Result<Vec<f64>> {
    check_len(data, shape)?;
    let n = shape[axis];
    if a.cols() != n {
        return Err(Error::Dimension { expected: n, got: a.cols() });
    }
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let r = a.rows();
    let mut out = vec![0.0; outer * r * inner];
    for o in 0..outer {
        let src = &data[o * n * inner..(o + 1) * n * inner];
        let dst = &mut out[o * r * inner..(o + 1) * r * inner];
        for row in 0..r {
            let d = &mut dst[row * inner..(row + 1) * inner];
            for (k, &w) in a.row(row).iter().enumerate() {
                if w != 0.0 {
                    for (x, &s) in d.iter_mut().zip(&src[k * inner..(k + 1) * inner]) {
                        *x += w * s;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Applies `mats[i]` along every mode `i`, i.e. computes
/// `(mats[0] (x) ... (x) mats[M-1]) data` in canonical grid order.
pub fn kron_apply(data: &[f64], shape: &[usize], mats: &[&DenseMatrix]) -> Result<Vec<f64>> {
    if mats.len() != shape.len() {
        return Err(Error::Shape(format!("{} matrices for {} modes", mats.len(), shape.len())));
    }
    let mut cur = data.to_vec();
    let mut cur_shape = shape.to_vec();
    for (axis, m) in mats.iter().enumerate() {
        cur = mode_product(&cur, &cur_shape, axis, m)?;
        cur_shape[axis] = m.rows();
    }
    Ok(cur)
}

/// Forward substitution with `l` along mode `axis`, in place.
pub fn mode_solve_lower(data: &mut [f64], shape: &[usize], axis: usize, l: &LowerTriangular) -> Result<()> {
    check_len(data, shape)?;
    let n = shape[axis];
    if l.order() != n {
        return Err(Error::Dimension { expected: n, got: l.order() });
    }
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    for o in 0..outer {
        let block = &mut data[o * n * inner..(o + 1) * n * inner];
        for i in 0..n {
            let row = l.row(i);
            if row[i] == 0.0 {
                return Err(Error::Singular(i));
            }
            let (done, rest) = block.split_at_mut(i * inner);
            let target = &mut rest[..inner];
            for (k, &lik) in row[..i].iter().enumerate() {
                if lik != 0.0 {
                    for (t, &s) in target.iter_mut().zip(&done[k * inner..(k + 1) * inner]) {
                        *t -= lik * s;
                    }
                }
            }
            let d = row[i];
            target.iter_mut().for_each(|t| *t /= d);
        }
    }
    Ok(())
}

/// Solves `(L_1 (x) ... (x) L_M) x = b` by forward substitution per mode.
pub fn kron_solve_lower(b: &[f64], factors: &[&LowerTriangular]) -> Result<Vec<f64>> {
    let shape: Vec<usize> = factors.iter().map(|l| l.order()).collect();
    let mut x = b.to_vec();
    for (axis, l) in factors.iter().enumerate() {
        mode_solve_lower(&mut x, &shape, axis, l)?;
    }
    Ok(x)
}

/// Contracts mode `axis` with vector `v`, removing that mode.
pub fn contract_mode(data: &[f64], shape: &[usize], axis: usize, v: &[f64]) -> Result<Vec<f64>> {
    check_len(data, shape)?;
    let n = shape[axis];
    if v.len() != n {
        return Err(Error::Dimension { expected: n, got: v.len() });
    }
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![0.0; outer * inner];
    for o in 0..outer {
        let dst = &mut out[o * inner..(o + 1) * inner];
        for (k, &w) in v.iter().enumerate() {
            let src = &data[(o * n + k) * inner..(o * n + k + 1) * inner];
            for (x, &s) in dst.iter_mut().zip(src) {
                *x += w * s;
            }
        }
    }
    Ok(out)
}

/// Inserts a slab at the end of mode `axis` (that mode grows by one).
pub fn append_slab(data: &[f64], shape: &[usize], axis: usize, slab: &[f64]) -> Result<Vec<f64>> {
    check_len(data, shape)?;
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    if slab.len() != outer * inner {
        return Err(Error::Dimension { expected: outer * inner, got: slab.len() });
    }
    let n = shape[axis];
    let mut out = Vec::with_capacity(outer * (n + 1) * inner);
    for o in 0..outer {
        out.extend_from_slice(&data[o * n * inner..(o + 1) * n * inner]);
        out.extend_from_slice(&slab[o * inner..(o + 1) * inner]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, solve_lower};

    fn mat(rows: usize, cols: usize, seed: f64) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |i, j| ((i * cols + j) as f64 * 0.731 + seed).sin())
    }

    #[test]
    fn kron_apply_matches_explicit_kron() {
        let a = mat(3, 2, 0.1);
        let b = mat(2, 4, 0.7);
        let x: Vec<f64> = (0..8).map(|i| (i as f64).cos()).collect();
        let expected = kron(&a, &b).unwrap().matvec(&x).unwrap();
        let got = kron_apply(&x, &[2, 4], &[&a, &b]).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn kron_solve_matches_explicit() {
        let l1 = LowerTriangular::from_dense(&DenseMatrix::from_fn(3, 3, |i, j| {
            if i == j { 2.0 + i as f64 } else { 0.3 * (i + j) as f64 }
        }))
        .unwrap();
        let l2 = LowerTriangular::from_dense(&DenseMatrix::from_fn(2, 2, |i, j| {
            if i == j { 1.5 } else { -0.4 }
        }))
        .unwrap();
        let big = LowerTriangular::from_dense(&kron(&l1.to_dense(), &l2.to_dense()).unwrap()).unwrap();
        let b: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let expected = solve_lower(&big, &b).unwrap();
        let got = kron_solve_lower(&b, &[&l1, &l2]).unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn contract_and_append() {
        // 2 x 3 tensor.
        let t = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        assert_eq!(contract_mode(&t, &[2, 3], 1, &[1.0, 0.0, 1.0]).unwrap(), vec![4.0, 10.0]);
        assert_eq!(contract_mode(&t, &[2, 3], 0, &[1.0, -1.0]).unwrap(), vec![-3.0, -3.0, -3.0]);
        assert_eq!(
            append_slab(&t, &[2, 3], 1, &[7.0, 8.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 7.0, 4.0, 5.0, 6.0, 8.0]
        );
        assert_eq!(
            append_slab(&t, &[2, 3], 0, &[7.0, 8.0, 9.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
        );
        // Growing an empty mode.
        assert_eq!(append_slab(&[], &[0, 3], 0, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(append_slab(&t, &[2, 3], 1, &[7.0]).is_err());
    }
}
