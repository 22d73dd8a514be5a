//! Newton bases and the tensor Newton basis.
//!
//! A Newton basis over centers `x_1, ..., x_n` is kept implicitly as the
//! centers plus the lower triangular Vandermonde matrix `L[j][k] = n_k(x_j)`,
//! which is the Cholesky factor of the interpolation matrix. Basis values at
//! any `x` follow from the forward recursion
//! `n_k(x) = (K(x, x_k) - sum_{j<k} n_j(x_k) n_j(x)) / L[k][k]`,
//! i.e. one forward substitution with `L`. The diagonal `L[k][k]` is the
//! power function of the first `k - 1` centers at `x_k`.
//!
//! On a grid the tensor Newton basis consists of all products of component
//! basis functions; its Vandermonde matrix is the Kronecker product of the
//! component matrices, in canonical grid order.

use crate::error::{Error, Result};
use crate::grid::GridPointSet;
use crate::interpolation::{clamp_power, Evaluate};
use crate::kernels::{check_dim, ComponentKernel, Kernel, ProductKernel};
use crate::linalg::{self, DenseMatrix, LowerTriangular, PIVOT_TOL};
use crate::tensor;

/// Returns `true` when a squared power value is too small to divide by.
pub fn is_breakdown(power_squared: f64, diag: f64) -> bool {
    !(power_squared > PIVOT_TOL * diag)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonBasis<K> {
    kernel: K,
    centers: Vec<Vec<f64>>,
    factor: LowerTriangular,
}

impl<K: Kernel + Clone> NewtonBasis<K> {
    /// Basis over no centers.
    pub fn empty(kernel: K) -> Self {
        Self { kernel, centers: Vec::new(), factor: LowerTriangular::new() }
    }

    pub fn build(kernel: K, points: &[Vec<f64>]) -> Result<Self> {
        let mut b = Self::empty(kernel);
        b.factor = LowerTriangular::with_capacity(points.len());
        for p in points {
            b.push(p.clone())?;
        }
        Ok(b)
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Vandermonde matrix at the centers.
    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    /// `P_{X_{k-1}}(x_k)` for every center, in insertion order.
    pub fn power_diag(&self) -> Vec<f64> {
        self.factor.diagonal()
    }

    /// All basis values `n_k(x)`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.kernel.dim(), x)?;
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut v: Vec<f64> = self.centers.iter().map(|c| self.kernel.eval_unchecked(x, c)).collect();
        linalg::solve_lower_in_place(&self.factor, &mut v)
            .expect("Newton factor has a positive diagonal");
        v
    }

    /// Basis values together with `P_X(x)^2 = K(x,x) - sum_k n_k(x)^2`
    /// (unclamped).
    pub fn eval_with_power(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let v = self.eval(x)?;
        let p2 = self.kernel.diag(x) - linalg::dot(&v, &v);
        Ok((v, p2))
    }

    /// Power function from the basis sums.
    pub fn power(&self, x: &[f64]) -> Result<f64> {
        let (_, p2) = self.eval_with_power(x)?;
        clamp_power(p2, self.kernel.diag(x))
    }

    /// Adds a center; the basis is unchanged when this fails.
    pub fn push(&mut self, x: Vec<f64>) -> Result<()> {
        let (row, p2) = self.eval_with_power(&x)?;
        self.push_evaluated(x, row, p2)
    }

    /// Adds a center given its current basis values and squared power.
    fn push_evaluated(&mut self, x: Vec<f64>, mut row: Vec<f64>, p2: f64) -> Result<()> {
        if is_breakdown(p2, self.kernel.diag(&x)) {
            return Err(Error::Degenerate { index: self.centers.len(), power: p2.max(0.0).sqrt() });
        }
        row.push(p2.sqrt());
        self.factor.push_row(&row)?;
        self.centers.push(x);
        Ok(())
    }

    /// A copy of the basis extended by one center.
    pub fn extended(&self, x: Vec<f64>) -> Result<Self> {
        let mut b = self.clone();
        b.push(x)?;
        Ok(b)
    }

    /// Evaluation matrix `V = (n_k(y_j))_{j,k}` at the given points.
    pub fn vandermonde(&self, points: &[Vec<f64>]) -> Result<DenseMatrix> {
        let mut data = Vec::with_capacity(points.len() * self.len());
        for p in points {
            data.extend(self.eval(p)?);
        }
        DenseMatrix::from_vec(points.len(), self.len(), data)
    }

    /// Converts Newton coefficients into coefficients of `K(., x_k)`.
    pub fn kernel_coeffs(&self, newton_coeffs: &[f64]) -> Result<Vec<f64>> {
        linalg::solve_upper(&self.factor, newton_coeffs)
    }
}

/// Interpolant in a single Newton basis, grown one center at a time.
#[derive(Debug, Clone)]
pub struct NewtonInterpolant<K> {
    basis: NewtonBasis<K>,
    coeffs: Vec<f64>,
}

impl<K: Kernel + Clone> NewtonInterpolant<K> {
    pub fn new(kernel: K) -> Self {
        Self { basis: NewtonBasis::empty(kernel), coeffs: Vec::new() }
    }

    /// Adds a center with its target value; the new coefficient is the
    /// residual at `x` divided by the power value there.
    pub fn push(&mut self, x: Vec<f64>, value: f64) -> Result<()> {
        let (row, p2) = self.basis.eval_with_power(&x)?;
        let prediction = linalg::dot(&row, &self.coeffs);
        self.basis.push_evaluated(x, row, p2)?;
        self.coeffs.push((value - prediction) / p2.sqrt());
        Ok(())
    }

    pub fn fit(kernel: K, points: &[Vec<f64>], values: &[f64]) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Shape(format!("{} points but {} values", points.len(), values.len())));
        }
        let mut s = Self::new(kernel);
        s.basis.factor = LowerTriangular::with_capacity(points.len());
        for (p, &v) in points.iter().zip(values) {
            s.push(p.clone(), v)?;
        }
        Ok(s)
    }

    pub fn basis(&self) -> &NewtonBasis<K> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }
}

impl<K: Kernel + Clone> Evaluate for NewtonInterpolant<K> {
    fn dim(&self) -> usize {
        self.basis.kernel.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        Ok(linalg::dot(&self.basis.eval(x)?, &self.coeffs))
    }

    fn evaluate_many(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let alpha = self.basis.kernel_coeffs(&self.coeffs)?;
        xs.iter()
            .map(|x| {
                check_dim(self.dim(), x)?;
                Ok(self
                    .basis
                    .centers
                    .iter()
                    .zip(&alpha)
                    .map(|(c, a)| a * self.basis.kernel.eval_unchecked(x, c))
                    .sum())
            })
            .collect()
    }
}

/// Component Newton bases whose products form the Newton basis of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorNewtonBasis {
    kernel: ProductKernel,
    components: Vec<NewtonBasis<ComponentKernel>>,
}

impl TensorNewtonBasis {
    /// Builds one Newton basis per grid factor.
    pub fn build(pk: &ProductKernel, grid: &GridPointSet) -> Result<Self> {
        grid.check_kernel(pk)?;
        let components = pk
            .components()
            .iter()
            .zip(grid.factors())
            .map(|(k, f)| NewtonBasis::build(*k, f.points()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kernel: pk.clone(), components })
    }

    pub fn from_components(pk: &ProductKernel, components: Vec<NewtonBasis<ComponentKernel>>) -> Result<Self> {
        if components.len() != pk.len() {
            return Err(Error::Shape(format!("{} bases for {} components", components.len(), pk.len())));
        }
        for (b, k) in components.iter().zip(pk.components()) {
            if b.kernel() != k {
                return Err(Error::Parameter("component basis kernel differs from the product kernel".into()));
            }
        }
        Ok(Self { kernel: pk.clone(), components })
    }

    pub fn kernel(&self) -> &ProductKernel {
        &self.kernel
    }

    pub fn components(&self) -> &[NewtonBasis<ComponentKernel>] {
        &self.components
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.components.iter().map(NewtonBasis::len).collect()
    }

    pub fn len(&self) -> usize {
        self.sizes().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(x) L_i`, the Cholesky factor of the grid interpolation matrix.
    pub fn cholesky_factor(&self) -> Result<DenseMatrix> {
        let dense: Vec<DenseMatrix> = self.components.iter().map(|b| b.factor().to_dense()).collect();
        linalg::kron_all(&dense)
    }

    /// Tensor basis evaluated on a grid: `(x) V_i` with `V_i` the component
    /// evaluation matrices on the grid factors.
    pub fn tensor_vandermonde(&self, grid: &GridPointSet) -> Result<DenseMatrix> {
        grid.check_kernel(&self.kernel)?;
        let mats = self
            .components
            .iter()
            .zip(grid.factors())
            .map(|(b, f)| b.vandermonde(f.points()))
            .collect::<Result<Vec<_>>>()?;
        linalg::kron_all(&mats)
    }

    /// Newton coefficients from values in canonical grid order, by forward
    /// substitution with each `L_i` along its mode.
    pub fn coeffs(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(Error::Shape(format!("{} values for {} grid points", values.len(), self.len())));
        }
        let factors: Vec<&LowerTriangular> = self.components.iter().map(|b| b.factor()).collect();
        tensor::kron_solve_lower(values, &factors)
    }

    /// Component power values and diagonals at `x`.
    pub fn component_powers(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dim(self.kernel.dim(), x)?;
        let mut powers = Vec::with_capacity(self.components.len());
        for (i, b) in self.components.iter().enumerate() {
            powers.push(b.power(self.kernel.slice(x, i))?);
        }
        Ok((powers, self.kernel.component_diagonals(x)))
    }

    /// Power function of the grid via the component power functions.
    pub fn power(&self, x: &[f64]) -> Result<f64> {
        let (p, d) = self.component_powers(x)?;
        power_product(&p, &d)
    }
}

/// Squared grid power value from component power values `P_i` and component
/// diagonals `K_i(x^i, x^i)`:
/// `prod_i K_i - prod_i (K_i - P_i^2)`, clamped at zero.
pub fn power_product_squared(component_powers: &[f64], diagonal_values: &[f64]) -> Result<f64> {
    if component_powers.len() != diagonal_values.len() {
        return Err(Error::Shape(format!(
            "{} power values for {} diagonal values",
            component_powers.len(),
            diagonal_values.len()
        )));
    }
    let mut full = 1.0;
    let mut explained = 1.0;
    for (&p, &k) in component_powers.iter().zip(diagonal_values) {
        let p2 = p * p;
        if !(p >= 0.0) || p2 > k * (1.0 + 1e-12) {
            return Err(Error::Parameter(format!("component power {p} inconsistent with K(x,x) = {k}")));
        }
        full *= k;
        explained *= (k - p2).max(0.0);
    }
    Ok((full - explained).max(0.0))
}

pub fn power_product(component_powers: &[f64], diagonal_values: &[f64]) -> Result<f64> {
    Ok(power_product_squared(component_powers, diagonal_values)?.sqrt())
}

/// Grid interpolant in the tensor Newton basis.
#[derive(Debug, Clone)]
pub struct TensorNewtonInterpolant {
    basis: TensorNewtonBasis,
    coeffs: Vec<f64>,
}

impl TensorNewtonInterpolant {
    /// Builds the component bases and solves the Kronecker triangular system
    /// for values given in canonical grid order.
    pub fn fit(pk: &ProductKernel, grid: &GridPointSet, values: &[f64]) -> Result<Self> {
        let basis = TensorNewtonBasis::build(pk, grid)?;
        let coeffs = basis.coeffs(values)?;
        Ok(Self { basis, coeffs })
    }

    pub fn from_parts(basis: TensorNewtonBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Shape(format!("{} coefficients for {} basis functions", coeffs.len(), basis.len())));
        }
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &TensorNewtonBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Values on every point of an evaluation grid, in canonical order.
    pub fn evaluate_grid(&self, grid: &GridPointSet) -> Result<Vec<f64>> {
        grid.check_kernel(&self.basis.kernel)?;
        let mats = self
            .basis
            .components
            .iter()
            .zip(grid.factors())
            .map(|(b, f)| b.vandermonde(f.points()))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&DenseMatrix> = mats.iter().collect();
        tensor::kron_apply(&self.coeffs, &self.basis.sizes(), &refs)
    }
}

impl Evaluate for TensorNewtonInterpolant {
    fn dim(&self) -> usize {
        self.basis.kernel.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        let mut cur = self.coeffs.clone();
        let mut shape = self.basis.sizes();
        // Contract the last mode first so earlier axes keep their positions.
        for i in (0..shape.len()).rev() {
            let v = self.basis.components[i].eval(self.basis.kernel.slice(x, i))?;
            cur = tensor::contract_mode(&cur, &shape, i, &v)?;
            shape.pop();
        }
        Ok(cur.first().copied().unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ComponentPointSet;
    use crate::interpolation::{assemble_direct, power_function_direct};

    fn pts(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn single_center() {
        let k = ComponentKernel::wendland13();
        let b = NewtonBasis::build(k, &pts(&[0.4])).unwrap();
        assert_eq!(b.factor().to_dense().as_slice(), &[15f64.sqrt()]);
        let v = b.eval(&[0.6]).unwrap();
        let expected = k.eval(&[0.6], &[0.4]).unwrap() / 15f64.sqrt();
        assert!((v[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn empty_basis() {
        let k = ComponentKernel::askey(8.0).unwrap();
        let b = NewtonBasis::empty(k);
        assert!(b.eval(&[0.2]).unwrap().is_empty());
        assert_eq!(b.power(&[0.2]).unwrap(), 1.0);
        let b = b.extended(vec![0.2]).unwrap();
        assert_eq!(b.len(), 1);
    }

    #[test]
    fn duplicate_center_breaks_down() {
        let k = ComponentKernel::askey(8.0).unwrap();
        let mut b = NewtonBasis::build(k, &pts(&[0.0, 0.5, 1.0])).unwrap();
        let err = b.push(vec![0.5]).unwrap_err();
        assert!(matches!(err, Error::Degenerate { index: 3, .. }), "{err}");
        assert_eq!(b.len(), 3);
    }

    #[test]
    fn matches_cholesky() {
        let k = ComponentKernel::askey(8.0).unwrap();
        let x = pts(&[0.0, 0.9, 0.3, 0.55, 0.1, 0.75]);
        let b = NewtonBasis::build(k, &x).unwrap();
        let l = linalg::cholesky(&assemble_direct(&k, &x).unwrap()).unwrap();
        for i in 0..x.len() {
            for j in 0..=i {
                assert!((b.factor().get(i, j) - l.get(i, j)).abs() < 1e-12);
            }
        }
        // Row j of L is the basis evaluated at center j.
        assert_eq!(b.eval(&x[3]).unwrap()[..=3], l.row(3)[..]);
    }

    #[test]
    fn newton_interpolant_reproduces_data() {
        let k = ComponentKernel::wendland13();
        let x = pts(&[0.0, 0.25, 0.5, 0.75, 1.0]);
        let f: Vec<f64> = x.iter().map(|p| (3.0 * p[0]).sin()).collect();
        let s = NewtonInterpolant::fit(k, &x, &f).unwrap();
        for (p, v) in x.iter().zip(&f) {
            assert!((s.evaluate(p).unwrap() - v).abs() < 1e-12);
        }
        let probe = pts(&[0.1, 0.33, 0.9]);
        let many = s.evaluate_many(&probe).unwrap();
        for (p, m) in probe.iter().zip(&many) {
            assert!((s.evaluate(p).unwrap() - m).abs() < 1e-12);
        }
    }

    #[test]
    fn power_product_special_cases() {
        // Single component: identity.
        let p2 = power_product_squared(&[0.3], &[1.0]).unwrap();
        assert!((p2 - 0.09).abs() < 1e-16);
        // Zero component power everywhere means zero.
        assert_eq!(power_product(&[0.0, 0.0], &[1.0, 15.0]).unwrap(), 0.0);
        assert!(power_product(&[2.0], &[1.0]).is_err());
        assert!(power_product(&[0.1, 0.2], &[1.0]).is_err());
    }

    #[test]
    fn tensor_power_matches_direct() {
        let pk = ProductKernel::new(vec![ComponentKernel::askey(8.0).unwrap(), ComponentKernel::wendland13()])
            .unwrap();
        let g = GridPointSet::new(vec![
            ComponentPointSet::from_scalars(&[0.0, 0.5, 1.0]).unwrap(),
            ComponentPointSet::from_scalars(&[0.0, 0.3, 0.6, 0.9]).unwrap(),
        ])
        .unwrap();
        let tb = TensorNewtonBasis::build(&pk, &g).unwrap();
        let all = g.enumerate().unwrap();
        for x in [[0.21, 0.47], [0.9, 0.05], [0.5, 0.31]] {
            let direct = power_function_direct(&pk, &all, &x).unwrap();
            assert!((tb.power(&x).unwrap() - direct).abs() < 1e-8, "{x:?}");
        }
    }

    #[test]
    fn tensor_single_point_factors() {
        let pk = ProductKernel::new(vec![ComponentKernel::wendland13(), ComponentKernel::wendland33()]).unwrap();
        let g = GridPointSet::new(vec![
            ComponentPointSet::from_scalars(&[0.2]).unwrap(),
            ComponentPointSet::from_scalars(&[0.7]).unwrap(),
        ])
        .unwrap();
        let tb = TensorNewtonBasis::build(&pk, &g).unwrap();
        let v = tb.tensor_vandermonde(&g).unwrap();
        assert_eq!((v.rows(), v.cols()), (1, 1));
        assert!((v[(0, 0)] - 15f64.sqrt()).abs() < 1e-15);
        assert_eq!(tb.coeffs(&[0.0]).unwrap(), vec![0.0]);
        assert!(tb.coeffs(&[0.0, 1.0]).is_err());
    }
}
