//! Componentwise P-greedy selection on candidate grids.
//!
//! Each step picks the component whose power function has the largest
//! maximum over its candidates, adds the maximizing candidate to that
//! component's point set and updates the interpolant on the new slab
//! `X^1 x ... x {x} x ... x X^M` only. The new Newton coefficients solve
//! `(x)_{j != i} L_j c = r / P`, where `r` is the residual of the current
//! interpolant on the slab and `P` the selected power value.
//!
//! While some component set is still empty the grid is empty. Those first
//! steps only consider empty components, with `P_{{}}(x) = sqrt(K_i(x, x))`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::{ComponentPointSet, GridPointSet};
use crate::kernels::{ComponentKernel, Kernel, ProductKernel};
use crate::linalg::{self, DenseMatrix};
use crate::newton::{is_breakdown, NewtonBasis, TensorNewtonBasis, TensorNewtonInterpolant};
use crate::tensor;

/// Finite candidate sets, one per component.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGrid {
    sets: Vec<ComponentPointSet>,
}

impl CandidateGrid {
    pub fn new(sets: Vec<ComponentPointSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::Shape("candidate grid needs at least one component".into()));
        }
        if let Some(i) = sets.iter().position(ComponentPointSet::is_empty) {
            return Err(Error::Shape(format!("candidate set {i} is empty")));
        }
        Ok(Self { sets })
    }

    /// `n` equispaced candidates on `[lo, hi]` for each of `m` scalar components.
    pub fn uniform(m: usize, n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < 2 || !(lo < hi) {
            return Err(Error::Parameter(format!("need n >= 2 and lo < hi, got n={n}, [{lo}, {hi}]")));
        }
        let xs: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
        let set = ComponentPointSet::from_scalars(&xs)?;
        Self::new(vec![set; m])
    }

    pub fn sets(&self) -> &[ComponentPointSet] {
        &self.sets
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(ComponentPointSet::len).collect()
    }
}

/// One greedy step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub component: usize,
    pub candidate: usize,
    pub point: Vec<f64>,
    /// Maximum of the selected component's power function over its
    /// candidates before the step, attained at `point`.
    pub sup_power: f64,
    /// Diagonal entry of the extended Newton factor.
    pub newton_diagonal: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxPoints,
    MaxSteps,
    PowerTolerance,
    /// Selected power value below the breakdown tolerance.
    Breakdown,
    /// Every candidate has been selected.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Added(TraceRow),
    Stopped(StopReason),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopRule {
    /// Largest admissible grid size.
    pub max_points: usize,
    pub max_steps: usize,
    /// Stop once every component power function is at most this on its
    /// candidates.
    pub power_tol: f64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { max_points: usize::MAX, max_steps: usize::MAX, power_tol: 0.0 }
    }
}

#[derive(Debug, Clone)]
struct ComponentState {
    basis: NewtonBasis<ComponentKernel>,
    /// Candidate indices in selection order.
    selected: Vec<usize>,
    is_selected: Vec<bool>,
    /// Current basis values at every candidate.
    cand_values: Vec<Vec<f64>>,
    /// Cached `P^2` at every candidate.
    cand_power2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct GreedyState {
    kernel: ProductKernel,
    candidates: CandidateGrid,
    comps: Vec<ComponentState>,
    /// Newton coefficients, row-major with shape `sizes()`.
    coeffs: Vec<f64>,
    trace: Vec<TraceRow>,
    last_residual: Vec<f64>,
}

impl GreedyState {
    pub fn new(pk: &ProductKernel, candidates: CandidateGrid) -> Result<Self> {
        if candidates.sets.len() != pk.len() {
            return Err(Error::Shape(format!(
                "{} candidate sets for {} components",
                candidates.sets.len(),
                pk.len()
            )));
        }
        let mut comps = Vec::with_capacity(pk.len());
        for (k, set) in pk.components().iter().zip(&candidates.sets) {
            if set.dim() != k.dim() {
                return Err(Error::Dimension { expected: k.dim(), got: set.dim() });
            }
            let n = set.len();
            comps.push(ComponentState {
                basis: NewtonBasis::empty(*k),
                selected: Vec::new(),
                is_selected: vec![false; n],
                cand_values: vec![Vec::new(); n],
                cand_power2: set.points().iter().map(|y| k.diag(y)).collect(),
            });
        }
        Ok(Self { kernel: pk.clone(), candidates, comps, coeffs: Vec::new(), trace: Vec::new(), last_residual: Vec::new() })
    }

    pub fn kernel(&self) -> &ProductKernel {
        &self.kernel
    }

    pub fn candidates(&self) -> &CandidateGrid {
        &self.candidates
    }

    pub fn steps(&self) -> usize {
        self.trace.len()
    }

    pub fn trace(&self) -> &[TraceRow] {
        &self.trace
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Residual on the slab added by the last step (empty while bootstrapping).
    pub fn last_residual(&self) -> &[f64] {
        &self.last_residual
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.comps.iter().map(|c| c.selected.len()).collect()
    }

    pub fn grid_len(&self) -> usize {
        self.sizes().iter().product()
    }

    pub fn bases(&self) -> Vec<&NewtonBasis<ComponentKernel>> {
        self.comps.iter().map(|c| &c.basis).collect()
    }

    pub fn selected_indices(&self, i: usize) -> &[usize] {
        &self.comps[i].selected
    }

    /// Current point sets `X_n^i`.
    pub fn grid(&self) -> Result<GridPointSet> {
        let factors = self
            .comps
            .iter()
            .map(|c| ComponentPointSet::new(c.basis.kernel().dim(), c.basis.centers().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        GridPointSet::new(factors)
    }

    /// Cached power values of component `i` at its candidates.
    pub fn candidate_powers(&self, i: usize) -> Vec<f64> {
        self.comps[i].cand_power2.iter().map(|p| p.max(0.0).sqrt()).collect()
    }

    /// Largest deviation between cached squared power values and a fresh
    /// evaluation from the component bases.
    pub fn cache_deviation(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        for (c, set) in self.comps.iter().zip(&self.candidates.sets) {
            for (y, &p2) in set.points().iter().zip(&c.cand_power2) {
                let (_, fresh) = c.basis.eval_with_power(y)?;
                worst = worst.max((fresh - p2).abs());
            }
        }
        Ok(worst)
    }

    fn best_candidate(&self, i: usize) -> Option<(usize, f64)> {
        let c = &self.comps[i];
        let mut best: Option<(usize, f64)> = None;
        for (k, &p2) in c.cand_power2.iter().enumerate() {
            if c.is_selected[k] {
                continue;
            }
            let p = p2.max(0.0).sqrt();
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((k, p));
            }
        }
        best
    }

    /// Component sup-power values over unselected candidates; `None` for
    /// exhausted components.
    pub fn component_sups(&self) -> Vec<Option<f64>> {
        (0..self.comps.len()).map(|i| self.best_candidate(i).map(|(_, p)| p)).collect()
    }

    /// Component with the largest sup-power, lowest index on ties. Until
    /// every component has a point only empty components are eligible.
    pub fn select_component(&self) -> Result<usize> {
        let bootstrapping = self.comps.iter().any(|c| c.selected.is_empty());
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.comps.iter().enumerate() {
            if bootstrapping && !c.selected.is_empty() {
                continue;
            }
            if let Some((_, p)) = self.best_candidate(i) {
                if best.is_none_or(|(_, b)| p > b) {
                    best = Some((i, p));
                }
            }
        }
        best.map(|(i, _)| i).ok_or(Error::Exhausted)
    }

    /// Maximizing unselected candidate of component `i` (index and power).
    pub fn select_point(&self, i: usize) -> Result<(usize, f64)> {
        if i >= self.comps.len() {
            return Err(Error::OutOfRange { index: i + 1, len: self.comps.len() });
        }
        self.best_candidate(i).ok_or(Error::Exhausted)
    }

    /// Grid size after adding one point to component `i`.
    pub fn grown_len(&self, i: usize) -> usize {
        self.sizes().iter().enumerate().map(|(j, &n)| if j == i { n + 1 } else { n }).product()
    }

    /// Performs one selection and interpolant update. `f` is queried on the
    /// new slab only.
    pub fn step<F: FnMut(&[f64]) -> f64>(&mut self, f: F) -> Result<StepOutcome> {
        let i = match self.select_component() {
            Ok(i) => i,
            Err(Error::Exhausted) => return Ok(StepOutcome::Stopped(StopReason::Exhausted)),
            Err(e) => return Err(e),
        };
        let (cand, p) = self.select_point(i)?;
        self.add(i, cand, p, f)
    }

    fn add<F: FnMut(&[f64]) -> f64>(&mut self, i: usize, cand: usize, p: f64, mut f: F) -> Result<StepOutcome> {
        let k = self.kernel.components()[i];
        let x = self.candidates.sets[i].get(cand).to_vec();
        if is_breakdown(p * p, k.diag(&x)) {
            return Ok(StepOutcome::Stopped(StopReason::Breakdown));
        }

        let mut basis = self.comps[i].basis.clone();
        match basis.push(x.clone()) {
            Ok(()) => {}
            Err(Error::Degenerate { .. }) => return Ok(StepOutcome::Stopped(StopReason::Breakdown)),
            Err(e) => return Err(e),
        }
        let diagonal = basis.factor().diag(basis.len() - 1);
        let row_x = self.comps[i].cand_values[cand].clone();

        // Coefficients of the new slab.
        let shape = self.sizes();
        let others: Vec<usize> = (0..shape.len()).filter(|&j| j != i).collect();
        let slab_len: usize = others.iter().map(|&j| shape[j]).product();
        let mut slab = Vec::new();
        let mut residual = Vec::new();
        if slab_len > 0 {
            let mut factors = Vec::with_capacity(shape.len());
            for (j, c) in self.comps.iter().enumerate() {
                factors.push(ComponentPointSet::new(
                    c.basis.kernel().dim(),
                    if j == i { vec![x.clone()] } else { c.basis.centers().to_vec() },
                )?);
            }
            let slab_points = GridPointSet::new(factors)?.enumerate()?;
            let current = self.slab_values(i, &row_x)?;
            residual = slab_points.iter().zip(&current).map(|(y, s)| f(y) - s).collect();
            let scaled: Vec<f64> = residual.iter().map(|r| r / diagonal).collect();
            let ls: Vec<_> = others.iter().map(|&j| self.comps[j].basis.factor()).collect();
            slab = tensor::kron_solve_lower(&scaled, &ls)?;
        }
        self.coeffs = tensor::append_slab(&self.coeffs, &shape, i, &slab)?;
        self.last_residual = residual;

        // New basis function at every candidate of component i.
        let set = &self.candidates.sets[i];
        let c = &mut self.comps[i];
        for (y_idx, y) in set.points().iter().enumerate() {
            let v = &mut c.cand_values[y_idx];
            let n_new = if y_idx == cand { diagonal } else { (k.eval_unchecked(y, &x) - linalg::dot(v, &row_x)) / diagonal };
            v.push(n_new);
            c.cand_power2[y_idx] -= n_new * n_new;
        }
        c.cand_power2[cand] = 0.0;
        c.is_selected[cand] = true;
        c.selected.push(cand);
        c.basis = basis;

        let row = TraceRow { step: self.trace.len(), component: i, candidate: cand, point: x, sup_power: p, newton_diagonal: diagonal };
        self.trace.push(row.clone());
        Ok(StepOutcome::Added(row))
    }

    /// Current interpolant on the slab `X^1 x .. x {x} x .. x X^M`, given
    /// the component-`i` basis values at `x`.
    fn slab_values(&self, i: usize, row_x: &[f64]) -> Result<Vec<f64>> {
        let shape = self.sizes();
        let reduced = tensor::contract_mode(&self.coeffs, &shape, i, row_x)?;
        let mut rshape = shape.clone();
        rshape.remove(i);
        let dense: Vec<DenseMatrix> =
            (0..shape.len()).filter(|&j| j != i).map(|j| self.comps[j].basis.factor().to_dense()).collect();
        let refs: Vec<&DenseMatrix> = dense.iter().collect();
        tensor::kron_apply(&reduced, &rshape, &refs)
    }

    /// The current interpolant in the tensor Newton basis.
    pub fn interpolant(&self) -> Result<TensorNewtonInterpolant> {
        let basis = TensorNewtonBasis::from_components(&self.kernel, self.comps.iter().map(|c| c.basis.clone()).collect())?;
        TensorNewtonInterpolant::from_parts(basis, self.coeffs.clone())
    }

    /// Checks the stop rule before a step.
    pub fn should_stop(&self, rule: &StopRule) -> Option<StopReason> {
        if self.trace.len() >= rule.max_steps {
            return Some(StopReason::MaxSteps);
        }
        let sups = self.component_sups();
        if sups.iter().all(Option::is_none) {
            return Some(StopReason::Exhausted);
        }
        let max_sup = sups.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
        if max_sup <= rule.power_tol {
            return Some(StopReason::PowerTolerance);
        }
        match self.select_component() {
            Ok(i) if self.grown_len(i) > rule.max_points => Some(StopReason::MaxPoints),
            Ok(_) => None,
            Err(_) => Some(StopReason::Exhausted),
        }
    }
}

/// Result of a complete greedy run.
#[derive(Debug, Clone)]
pub struct GreedyRun {
    pub state: GreedyState,
    pub stop: StopReason,
}

impl GreedyRun {
    pub fn interpolant(&self) -> Result<TensorNewtonInterpolant> {
        self.state.interpolant()
    }

    pub fn trace(&self) -> &[TraceRow] {
        self.state.trace()
    }
}

/// Runs greedy steps until the stop rule fires.
pub fn run_pgreedy<F: FnMut(&[f64]) -> f64>(
    pk: &ProductKernel,
    candidates: CandidateGrid,
    mut f: F,
    rule: StopRule,
) -> Result<GreedyRun> {
    let mut state = GreedyState::new(pk, candidates)?;
    loop {
        if let Some(stop) = state.should_stop(&rule) {
            return Ok(GreedyRun { state, stop });
        }
        if let StepOutcome::Stopped(stop) = state.step(&mut f)? {
            return Ok(GreedyRun { state, stop });
        }
    }
}

/// Writes `step,component,point_coords,sup_power`; coordinates of a
/// multivariate component are separated by spaces.
pub fn write_trace_csv<W: Write>(writer: W, trace: &[TraceRow]) -> Result<()> {
    let io = |e: csv::Error| Error::PointFile(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "component", "point_coords", "sup_power"]).map_err(io)?;
    for r in trace {
        let coords: Vec<String> = r.point.iter().map(|c| format!("{c:e}")).collect();
        w.write_record([r.step.to_string(), r.component.to_string(), coords.join(" "), format!("{:e}", r.sup_power)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::PointFile(e.to_string()))
}
