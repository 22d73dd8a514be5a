//! Component kernel families and product kernels.
//!
//! A component kernel acts on a low-dimensional factor space `R^{d_i}`; a
//! [`ProductKernel`] multiplies component kernels evaluated on consecutive
//! coordinate slices of a point in `R^d`, `d = d_1 + ... + d_M`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Symmetric kernel on a fixed-dimensional space.
///
/// `eval_unchecked` assumes both arguments have length `dim()`; the checked
/// [`Kernel::eval`] verifies this first.
pub trait Kernel: Sync {
    fn dim(&self) -> usize;

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64;

    /// `K(x, x)`.
    fn diag(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x, x)
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        check_dim(self.dim(), y)?;
        Ok(self.eval_unchecked(x, y))
    }
}

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension { expected, got: x.len() });
    }
    Ok(())
}

/// Askey's truncated power `(1 - r)_+^beta`.
pub fn eval_askey(beta: f64, r: f64) -> Result<f64> {
    if !(beta >= 2.0) {
        return Err(Error::Parameter(format!("askey requires beta >= 2, got {beta}")));
    }
    Ok(askey(beta, r))
}

fn askey(beta: f64, r: f64) -> f64 {
    let t = (1.0 - r).max(0.0);
    if t == 0.0 {
        return 0.0;
    }
    if beta.fract() == 0.0 && beta <= i32::MAX as f64 {
        t.powi(beta as i32)
    } else {
        t.powf(beta)
    }
}

/// The univariate C^6 Wendland function `(1-r)_+^7 (315 r^3 + 285 r^2 + 105 r + 15)`.
pub fn eval_wendland_1_3(r: f64) -> f64 {
    let t = (1.0 - r).max(0.0);
    if t == 0.0 {
        return 0.0;
    }
    t.powi(7) * (((315.0 * r + 285.0) * r + 105.0) * r + 15.0)
}

/// Wendland's C^6 function for `d <= 3`: `(1-r)_+^8 (32 r^3 + 25 r^2 + 8 r + 1)`.
pub fn eval_wendland_3_3(r: f64) -> f64 {
    let t = (1.0 - r).max(0.0);
    if t == 0.0 {
        return 0.0;
    }
    t.powi(8) * (((32.0 * r + 25.0) * r + 8.0) * r + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Askey { beta: f64 },
    Wendland13,
    Wendland33,
    Gaussian { epsilon: f64 },
}

impl Family {
    /// Profile value at radius `r` (already multiplied by the shape).
    fn profile(&self, r: f64) -> f64 {
        match *self {
            Family::Askey { beta } => askey(beta, r),
            Family::Wendland13 => eval_wendland_1_3(r),
            Family::Wendland33 => eval_wendland_3_3(r),
            Family::Gaussian { epsilon } => (-epsilon * r * r).exp(),
        }
    }

    /// Value at radius zero, which is also the maximum over all radii.
    pub fn peak(&self) -> f64 {
        match self {
            Family::Wendland13 => 15.0,
            _ => 1.0,
        }
    }

    pub fn is_compactly_supported(&self) -> bool {
        !matches!(self, Family::Gaussian { .. })
    }

    fn name(&self) -> &'static str {
        match self {
            Family::Askey { .. } => "askey",
            Family::Wendland13 => "wendland13",
            Family::Wendland33 => "wendland33",
            Family::Gaussian { .. } => "gaussian",
        }
    }
}

/// Radial kernel `k(x, y) = phi(shape * |x - y|)` on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentKernel {
    family: Family,
    shape: f64,
    dim: usize,
}

impl ComponentKernel {
    pub fn new(family: Family, shape: f64, dim: usize) -> Result<Self> {
        match family {
            Family::Askey { beta } if !(beta >= 2.0) => {
                return Err(Error::Parameter(format!("askey requires beta >= 2, got {beta}")));
            }
            Family::Gaussian { epsilon } if !(epsilon > 0.0 && epsilon.is_finite()) => {
                return Err(Error::Parameter(format!(
                    "gaussian requires eps > 0, got {epsilon}"
                )));
            }
            _ => {}
        }
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Parameter(format!("shape must be positive, got {shape}")));
        }
        if dim == 0 {
            return Err(Error::Parameter("dim must be at least 1".into()));
        }
        Ok(Self { family, shape, dim })
    }

    pub fn askey(beta: f64) -> Result<Self> {
        Self::new(Family::Askey { beta }, 1.0, 1)
    }

    pub fn wendland13() -> Self {
        Self { family: Family::Wendland13, shape: 1.0, dim: 1 }
    }

    pub fn wendland33() -> Self {
        Self { family: Family::Wendland33, shape: 1.0, dim: 1 }
    }

    pub fn gaussian(epsilon: f64) -> Result<Self> {
        Self::new(Family::Gaussian { epsilon }, 1.0, 1)
    }

    pub fn with_shape(self, shape: f64) -> Result<Self> {
        Self::new(self.family, shape, self.dim)
    }

    pub fn with_dim(self, dim: usize) -> Result<Self> {
        Self::new(self.family, self.shape, dim)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Kernel value as a function of the (unscaled) distance `r = |x - y|`.
    pub fn radial(&self, r: f64) -> f64 {
        self.family.profile(self.shape * r)
    }
}

impl Kernel for ComponentKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let r = if self.dim == 1 {
            (x[0] - y[0]).abs()
        } else {
            x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        };
        self.radial(r)
    }

    fn diag(&self, _x: &[f64]) -> f64 {
        self.family.peak()
    }
}

impl fmt::Display for ComponentKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family.name())?;
        let mut params = Vec::new();
        match self.family {
            Family::Askey { beta } => params.push(format!("beta={beta}")),
            Family::Gaussian { epsilon } => params.push(format!("eps={epsilon}")),
            _ => {}
        }
        if self.shape != 1.0 {
            params.push(format!("shape={}", self.shape));
        }
        if self.dim != 1 {
            params.push(format!("dim={}", self.dim));
        }
        if !params.is_empty() {
            write!(f, ":{}", params.join(","))?;
        }
        Ok(())
    }
}

/// Parses `family[:key=value,...]`, e.g. `askey:beta=8,shape=0.5`.
///
/// Families: `askey` (`beta`, required to be at least 2, default 8),
/// `wendland13`, `wendland33`, `gaussian` (`eps`, default 1). Every family
/// accepts `shape` (default 1) and `dim` (default 1).
pub fn parse_kernel_spec(spec: &str) -> Result<ComponentKernel> {
    let bad = |reason: String| Error::KernelSpec { spec: spec.to_string(), reason };
    let (name, rest) = match spec.trim().split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (spec.trim(), None),
    };

    let mut beta = None;
    let mut eps = None;
    let mut shape = 1.0;
    let mut dim = 1usize;
    for item in rest.into_iter().flat_map(|r| r.split(',')).filter(|s| !s.trim().is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| bad(format!("expected key=value, got `{item}`")))?;
        let key = key.trim();
        let value = value.trim();
        let number = || value.parse::<f64>().map_err(|_| bad(format!("`{value}` is not a number")));
        match key {
            "beta" => beta = Some(number()?),
            "eps" | "epsilon" => eps = Some(number()?),
            "shape" => shape = number()?,
            "dim" => {
                dim = value.parse().map_err(|_| bad(format!("`{value}` is not a positive integer")))?
            }
            _ => return Err(bad(format!("unknown parameter `{key}`"))),
        }
    }

    let family = match name.to_ascii_lowercase().as_str() {
        "askey" => Family::Askey { beta: beta.unwrap_or(8.0) },
        "wendland13" => Family::Wendland13,
        "wendland33" => Family::Wendland33,
        "gaussian" => Family::Gaussian { epsilon: eps.unwrap_or(1.0) },
        other => return Err(bad(format!("unknown kernel family `{other}`"))),
    };
    if beta.is_some() && !matches!(family, Family::Askey { .. }) {
        return Err(bad("`beta` only applies to askey".into()));
    }
    if eps.is_some() && !matches!(family, Family::Gaussian { .. }) {
        return Err(bad("`eps` only applies to gaussian".into()));
    }
    ComponentKernel::new(family, shape, dim).map_err(|e| bad(e.to_string()))
}

impl FromStr for ComponentKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_kernel_spec(s)
    }
}

/// `K(x, y) = prod_i K_i(x^i, y^i)` where `x^i` is the i-th coordinate slice.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductKernel {
    components: Vec<ComponentKernel>,
    offsets: Vec<usize>,
    total_dim: usize,
}

impl ProductKernel {
    pub fn new(components: Vec<ComponentKernel>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parameter("a product kernel needs at least one component".into()));
        }
        let mut offsets = Vec::with_capacity(components.len());
        let mut total_dim = 0;
        for k in &components {
            offsets.push(total_dim);
            total_dim += k.dim();
        }
        Ok(Self { components, offsets, total_dim })
    }

    pub fn components(&self) -> &[ComponentKernel] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Start of each component's coordinate slice.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// The coordinate slice `x^i` of a point in `R^d`.
    pub fn slice<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        let start = self.offsets[i];
        &x[start..start + self.components[i].dim()]
    }

    /// Component diagonal values `K_i(x^i, x^i)`.
    pub fn component_diagonals(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().enumerate().map(|(i, k)| k.diag(self.slice(x, i))).collect()
    }
}

impl Kernel for ProductKernel {
    fn dim(&self) -> usize {
        self.total_dim
    }

    fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        self.components
            .iter()
            .enumerate()
            .map(|(i, k)| k.eval_unchecked(self.slice(x, i), self.slice(y, i)))
            .product()
    }

    fn diag(&self, x: &[f64]) -> f64 {
        self.component_diagonals(x).into_iter().product()
    }
}

impl From<ComponentKernel> for ProductKernel {
    fn from(k: ComponentKernel) -> Self {
        ProductKernel { components: vec![k], offsets: vec![0], total_dim: k.dim() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn askey_values() {
        assert_eq!(eval_askey(2.0, 0.5).unwrap(), 0.25);
        assert_eq!(eval_askey(8.0, 1.0).unwrap(), 0.0);
        assert_eq!(eval_askey(8.0, 0.0).unwrap(), 1.0);
        assert_eq!(eval_askey(8.0, 3.0).unwrap(), 0.0);
        assert!(eval_askey(1.0, 0.5).is_err());
        assert!(eval_askey(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn wendland_values() {
        assert_eq!(eval_wendland_1_3(0.0), 15.0);
        assert_eq!(eval_wendland_1_3(1.0), 0.0);
        assert_eq!(eval_wendland_1_3(1.7), 0.0);
        // Direct arithmetic: 0.5^7 * (315/8 + 285/4 + 105/2 + 15) = 178.125 / 128.
        assert!((eval_wendland_1_3(0.5) - 1.3916015625).abs() < 1e-15);

        assert_eq!(eval_wendland_3_3(0.0), 1.0);
        assert_eq!(eval_wendland_3_3(1.0), 0.0);
        // 0.75^8 * (32/64 + 25/16 + 2 + 1) = 0.75^8 * 5.0625.
        let expected = 0.75f64.powi(8) * 5.0625;
        assert!((eval_wendland_3_3(0.25) - expected).abs() < 1e-15);
    }

    #[test]
    fn component_eval() {
        let a = ComponentKernel::askey(8.0).unwrap();
        assert_eq!(a.eval(&[0.0], &[0.0]).unwrap(), 1.0);
        let w = ComponentKernel::wendland13();
        assert_eq!(w.eval(&[0.0], &[2.0]).unwrap(), 0.0);
        let g = ComponentKernel::gaussian(1.0).unwrap();
        assert_eq!(g.eval(&[0.0], &[1.0]).unwrap(), (-1.0f64).exp());
        assert!(g.eval(&[0.0, 1.0], &[1.0]).is_err());
    }

    #[test]
    fn shape_scales_support() {
        let a = ComponentKernel::askey(2.0).unwrap().with_shape(0.5).unwrap();
        assert_eq!(a.eval(&[0.0], &[1.0]).unwrap(), 0.25);
        assert_eq!(a.eval(&[0.0], &[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(ComponentKernel::askey(1.5).is_err());
        assert!(ComponentKernel::gaussian(0.0).is_err());
        assert!(ComponentKernel::wendland13().with_shape(-1.0).is_err());
        assert!(ComponentKernel::wendland13().with_dim(0).is_err());
        assert!(ProductKernel::new(vec![]).is_err());
    }

    #[test]
    fn product_eval() {
        let a = ComponentKernel::askey(2.0).unwrap();
        let pk = ProductKernel::new(vec![a, a]).unwrap();
        assert_eq!(pk.dim(), 2);
        assert_eq!(pk.eval(&[0.0, 0.0], &[0.5, 0.0]).unwrap(), 0.25);
        assert!(pk.eval(&[0.0], &[0.5]).is_err());

        let w = ComponentKernel::wendland13();
        let single = ProductKernel::from(w);
        for &(x, y) in &[(0.1, 0.3), (0.0, 0.99), (0.4, 0.4)] {
            assert_eq!(single.eval(&[x], &[y]).unwrap(), w.eval(&[x], &[y]).unwrap());
        }

        let mixed = ProductKernel::new(vec![w, ComponentKernel::wendland33().with_dim(2).unwrap()])
            .unwrap();
        assert_eq!(mixed.dim(), 3);
        assert_eq!(mixed.offsets(), &[0, 1]);
        let x = [0.2, 0.1, 0.7];
        assert_eq!(mixed.eval(&x, &x).unwrap(), 15.0);
        assert_eq!(mixed.diag(&x), 15.0);
    }

    #[test]
    fn parse_specs() {
        let k = parse_kernel_spec("askey:beta=8").unwrap();
        assert_eq!(k.family(), Family::Askey { beta: 8.0 });
        assert_eq!(k.shape(), 1.0);
        assert_eq!(k.dim(), 1);

        let k = parse_kernel_spec("wendland13").unwrap();
        assert_eq!(k, ComponentKernel::wendland13());

        let k: ComponentKernel = "gaussian:eps=2.5,shape=0.5,dim=3".parse().unwrap();
        assert_eq!(k.family(), Family::Gaussian { epsilon: 2.5 });
        assert_eq!(k.shape(), 0.5);
        assert_eq!(k.dim(), 3);

        for bad in [
            "askey:beta=1",
            "bessel",
            "askey:beta=x",
            "askey:beta",
            "wendland33:beta=3",
            "askey:foo=1",
            "gaussian:eps=0",
            "wendland13:dim=0",
        ] {
            assert!(parse_kernel_spec(bad).is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn display_round_trips() {
        for spec in ["askey:beta=8", "wendland13", "gaussian:eps=2,shape=0.5", "wendland33:dim=2"] {
            let k = parse_kernel_spec(spec).unwrap();
            assert_eq!(k.to_string(), spec);
            assert_eq!(parse_kernel_spec(&k.to_string()).unwrap(), k);
        }
    }
}
