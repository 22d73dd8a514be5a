//! Interpolation matrices, the interpolation solve, interpolant evaluation
//! and the definition-based power function.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{ComponentPointSet, GridPointSet};
use crate::kernels::{check_dim, Kernel, ProductKernel};
use crate::linalg::{self, DenseMatrix, LowerTriangular};

/// Squared power values down to `-NEGATIVE_POWER_TOL * K(x, x)` are treated
/// as round-off and clamped to zero.
pub const NEGATIVE_POWER_TOL: f64 = 1e-10;

/// Anything that can be evaluated pointwise on `R^dim`.
pub trait Evaluate {
    fn dim(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    fn evaluate_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        xs.iter().map(|x| self.evaluate(x)).collect()
    }
}

/// `A_{K,X} = (K(x_i, x_j))_{i,j}`, rows assembled in parallel.
pub fn assemble_direct<K: Kernel>(kernel: &K, points: &[Vec<f64>]) -> Result<DenseMatrix> {
    for p in points {
        check_dim(kernel.dim(), p)?;
    }
    let n = points.len();
    let mut data = vec![0.0; n * n];
    if n > 0 {
        data.par_chunks_mut(n).zip(points.par_iter()).for_each(|(row, xi)| {
            for (a, xj) in row.iter_mut().zip(points) {
                *a = kernel.eval_unchecked(xi, xj);
            }
        });
    }
    DenseMatrix::from_vec(n, n, data)
}

/// Interpolation matrix of one component kernel on one factor set.
pub fn component_matrix<K: Kernel>(kernel: &K, set: &ComponentPointSet) -> Result<DenseMatrix> {
    assemble_direct(kernel, set.points())
}

/// Grid interpolation matrix as the Kronecker product of the component
/// matrices, in canonical grid order.
pub fn assemble_kronecker(pk: &ProductKernel, grid: &GridPointSet) -> Result<DenseMatrix> {
    grid.check_kernel(pk)?;
    let factors = pk
        .components()
        .iter()
        .zip(grid.factors())
        .map(|(k, f)| component_matrix(k, f))
        .collect::<Result<Vec<_>>>()?;
    linalg::kron_all(&factors)
}

/// `s(x) = sum_i c_i K(x, x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolant {
    kernel: ProductKernel,
    centers: Vec<Vec<f64>>,
    coeffs: Vec<f64>,
}

impl Interpolant {
    pub fn new(kernel: ProductKernel, centers: Vec<Vec<f64>>, coeffs: Vec<f64>) -> Result<Self> {
        if centers.len() != coeffs.len() {
            return Err(Error::Shape(format!(
                "{} centers but {} coefficients",
                centers.len(),
                coeffs.len()
            )));
        }
        for c in &centers {
            check_dim(kernel.dim(), c)?;
        }
        Ok(Self { kernel, centers, coeffs })
    }

    pub fn kernel(&self) -> &ProductKernel {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        self.centers.iter().zip(&self.coeffs).map(|(c, w)| w * self.kernel.eval_unchecked(x, c)).sum()
    }
}

impl Evaluate for Interpolant {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.kernel.dim(), x)?;
        Ok(self.value_unchecked(x))
    }

    fn evaluate_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        for x in xs {
            check_dim(self.kernel.dim(), x)?;
        }
        Ok(xs.par_iter().map(|x| self.value_unchecked(x)).collect())
    }
}

/// Solves `A_{K,X} c = f_X` by Cholesky and two triangular solves, in the
/// given point order.
pub fn fit(pk: &ProductKernel, points: &[Vec<f64>], values: &[f64]) -> Result<Interpolant> {
    if points.len() != values.len() {
        return Err(Error::Shape(format!("{} points but {} values", points.len(), values.len())));
    }
    let a = assemble_direct(pk, points)?;
    let l = linalg::cholesky(&a)?;
    let coeffs = linalg::cholesky_solve(&l, values)?;
    Interpolant::new(pk.clone(), points.to_vec(), coeffs)
}

/// Interpolant of a separable target `f = prod_i f_i` on a grid, stored as
/// its component interpolants and multiplied at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductInterpolant {
    kernel: ProductKernel,
    factors: Vec<Interpolant>,
}

impl ProductInterpolant {
    pub fn factors(&self) -> &[Interpolant] {
        &self.factors
    }
}

impl Evaluate for ProductInterpolant {
    fn dim(&self) -> usize {
        self.kernel.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.kernel.dim(), x)?;
        Ok(self
            .factors
            .iter()
            .enumerate()
            .map(|(i, s)| s.value_unchecked(self.kernel.slice(x, i)))
            .product())
    }
}

/// Fits each component target `f_i` on its factor `X^i` separately; the
/// product of the component interpolants is the grid interpolant of
/// `prod_i f_i`.
pub fn fit_tensor_target(
    pk: &ProductKernel,
    grid: &GridPointSet,
    component_values: &[Vec<f64>],
) -> Result<ProductInterpolant> {
    grid.check_kernel(pk)?;
    if component_values.len() != pk.len() {
        return Err(Error::Shape(format!(
            "{} component value vectors for {} components",
            component_values.len(),
            pk.len()
        )));
    }
    let factors = pk
        .components()
        .iter()
        .zip(grid.factors())
        .zip(component_values)
        .map(|((k, set), values)| fit(&ProductKernel::from(*k), set.points(), values))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProductInterpolant { kernel: pk.clone(), factors })
}

/// Turns a squared power value into a power value, clamping round-off.
pub fn clamp_power(squared: f64, diag: f64) -> Result<f64> {
    if squared >= 0.0 {
        Ok(squared.sqrt())
    } else if squared >= -NEGATIVE_POWER_TOL * diag.abs() {
        Ok(0.0)
    } else {
        Err(Error::NegativePower(squared))
    }
}

/// Power function `P_X(x)^2 = K(x,x) - k_x^T A^{-1} k_x` evaluated through
/// the Cholesky factor of `A_{K,X}`.
#[derive(Debug, Clone)]
pub struct DirectPower<'k, K: Kernel> {
    kernel: &'k K,
    centers: Vec<Vec<f64>>,
    factor: LowerTriangular,
}

impl<'k, K: Kernel> DirectPower<'k, K> {
    pub fn new(kernel: &'k K, centers: &[Vec<f64>]) -> Result<Self> {
        let factor = linalg::cholesky(&assemble_direct(kernel, centers)?)?;
        Ok(Self { kernel, centers: centers.to_vec(), factor })
    }

    pub fn squared(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.kernel.dim(), x)?;
        let kx: Vec<f64> = self.centers.iter().map(|c| self.kernel.eval_unchecked(x, c)).collect();
        let w = linalg::solve_lower(&self.factor, &kx)?;
        Ok(self.kernel.diag(x) - linalg::dot(&w, &w))
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        clamp_power(self.squared(x)?, self.kernel.diag(x))
    }
}

pub fn power_function_direct<K: Kernel>(kernel: &K, points: &[Vec<f64>], x: &[f64]) -> Result<f64> {
    DirectPower::new(kernel, points)?.eval(x)
}

/// Mean of squared pointwise errors over `eval_points`.
pub fn mse<M, F>(model: &M, target: F, eval_points: &[Vec<f64>]) -> Result<f64>
where
    M: Evaluate + ?Sized,
    F: Fn(&[f64]) -> f64,
{
    if eval_points.is_empty() {
        return Err(Error::Shape("mean square error needs evaluation points".into()));
    }
    let values = model.evaluate_many(eval_points)?;
    let total: f64 = values.iter().zip(eval_points).map(|(s, x)| (s - target(x)).powi(2)).sum();
    Ok(total / eval_points.len() as f64)
}
