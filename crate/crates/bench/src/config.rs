//! Experiment configuration, read from JSON.

use std::path::{Path, PathBuf};

use prodkern::{ComponentKernel, Kernel, ProductKernel};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Inclusive index range, written as `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span(pub u32, pub u32);

impl Span {
    pub fn iter(self) -> impl Iterator<Item = u32> {
        self.0..=self.1
    }

    pub fn contains(self, j: u32) -> bool {
        self.0 <= j && j <= self.1
    }

    fn validate(self, name: &str, max: u32) -> Result<(), BenchError> {
        if self.0 < 1 || self.0 > self.1 || self.1 > max {
            return Err(BenchError::Config(format!(
                "{name}: range [{}, {}] must satisfy 1 <= first <= last <= {max}",
                self.0, self.1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Kernels compared on the univariate sets `X_j`.
    pub univariate: Vec<String>,
    /// Components `K_1` (x axis) and `K_2` (y axis) of the product kernel.
    pub product: Vec<String>,
    /// Radial kernels on the plane used as references for the product kernel.
    pub bivariate: Vec<String>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            univariate: vec!["wendland13".into(), "askey:beta=8".into()],
            product: vec!["askey:beta=8".into(), "wendland13".into()],
            bivariate: vec!["askey:beta=8,dim=2".into(), "wendland33:dim=2".into()],
        }
    }
}

/// Index ranges of the set ladders `X_j` and `X_{i,j} = X_i x X_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub univariate: Span,
    pub grid_i: Span,
    pub grid_j: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    /// Grid sizes `N` of the `N x N` grids on `[-1, 1]^2`.
    pub sizes: Vec<usize>,
    pub repetitions: usize,
    pub kernels: Vec<String>,
    /// Random points used to compare the four interpolants before timing.
    pub check_points: usize,
    pub check_tol: f64,
    /// Size at which the qualitative orderings are asserted.
    pub assert_at: Option<usize>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 16, 32, 64],
            repetitions: 5,
            kernels: vec!["askey:beta=8,shape=0.5".into(), "askey:beta=8,shape=0.5".into()],
            check_points: 50,
            check_tol: 1e-7,
            assert_at: Some(64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreedyConfig {
    pub kernels: Vec<String>,
    /// Equispaced candidates per axis on `[0, 1]`.
    pub candidates: usize,
    pub max_points: usize,
    pub max_steps: usize,
    pub power_tol: f64,
    /// The full grid `X_{i,j}` used as baseline.
    pub baseline: [u32; 2],
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            kernels: vec!["askey:beta=8".into(), "wendland13".into()],
            candidates: 129,
            max_points: 25,
            max_steps: 200,
            power_tol: 0.0,
            baseline: [2, 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kernels: KernelConfig,
    pub cond: LadderConfig,
    pub mse: LadderConfig,
    /// Evaluation points for the univariate MSE.
    pub eval_points_1d: usize,
    /// Evaluation points per axis for the bivariate MSE.
    pub eval_points_2d: usize,
    /// Second argument of the univariate restriction of Franke's function.
    pub restriction_y: f64,
    pub time: TimeConfig,
    pub greedy: GreedyConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kernels: KernelConfig::default(),
            cond: LadderConfig { univariate: Span(1, 7), grid_i: Span(1, 3), grid_j: Span(1, 5) },
            mse: LadderConfig { univariate: Span(1, 7), grid_i: Span(4, 4), grid_j: Span(1, 7) },
            eval_points_1d: 1001,
            eval_points_2d: 101,
            restriction_y: 0.25,
            time: TimeConfig::default(),
            greedy: GreedyConfig::default(),
            seed: 20240611,
            out_dir: PathBuf::from("out"),
        }
    }
}

pub fn parse_kernels(specs: &[String]) -> Result<Vec<ComponentKernel>, BenchError> {
    specs.iter().map(|s| s.parse::<ComponentKernel>().map_err(|e| BenchError::Config(e.to_string()))).collect()
}

pub fn product_kernel(specs: &[String]) -> Result<ProductKernel, BenchError> {
    ProductKernel::new(parse_kernels(specs)?).map_err(|e| BenchError::Config(e.to_string()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| BenchError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        for (name, l) in [("cond", &self.cond), ("mse", &self.mse)] {
            l.univariate.validate(&format!("{name}.univariate"), 12)?;
            l.grid_i.validate(&format!("{name}.grid_i"), 12)?;
            l.grid_j.validate(&format!("{name}.grid_j"), 12)?;
        }
        parse_kernels(&self.kernels.univariate)?;
        parse_kernels(&self.kernels.bivariate)?;
        let pk = product_kernel(&self.kernels.product)?;
        if pk.len() != 2 || pk.dim() != 2 {
            return Err(BenchError::Config("kernels.product needs two univariate components".into()));
        }
        for k in parse_kernels(&self.kernels.bivariate)? {
            if k.dim() != 2 {
                return Err(BenchError::Config(format!("bivariate kernel `{k}` must have dim=2")));
            }
        }
        if self.kernels.univariate.iter().chain(&self.kernels.bivariate).count() == 0 {
            return Err(BenchError::Config("no kernels configured".into()));
        }
        if self.eval_points_1d < 2 || self.eval_points_2d < 2 {
            return Err(BenchError::Config("evaluation grids need at least 2 points per axis".into()));
        }
        let t = &self.time;
        if t.repetitions < 1 {
            return Err(BenchError::Config("time.repetitions must be at least 1".into()));
        }
        if t.sizes.is_empty() || t.sizes.iter().any(|&n| n < 2) {
            return Err(BenchError::Config("time.sizes must be nonempty, each at least 2".into()));
        }
        let tk = product_kernel(&t.kernels)?;
        if tk.len() != 2 || tk.dim() != 2 {
            return Err(BenchError::Config("time.kernels needs two univariate components".into()));
        }
        let g = &self.greedy;
        let gk = product_kernel(&g.kernels)?;
        if gk.dim() != gk.len() {
            return Err(BenchError::Config("greedy.kernels must be univariate components".into()));
        }
        if g.candidates < 2 || g.max_steps == 0 || g.max_points == 0 {
            return Err(BenchError::Config("greedy needs candidates >= 2 and a positive budget".into()));
        }
        if gk.len() != 2 {
            return Err(BenchError::Config("greedy demo runs on the unit square: two components".into()));
        }
        Ok(())
    }
}
