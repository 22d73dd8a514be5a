//! The numerical experiments: condition numbers, mean square errors,
//! timings of four interpolation methods and the componentwise greedy demo.

use std::collections::HashMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prodkern::interpolation::{assemble_direct, assemble_kronecker, fit, mse, Interpolant};
use prodkern::linalg::{cholesky, cholesky_solve, cond2};
use prodkern::{
    run_pgreedy, CandidateGrid, ComponentKernel, ComponentPointSet, Evaluate, Family, GridPointSet, Kernel,
    NewtonInterpolant, ProductKernel, StopRule, TensorNewtonInterpolant,
};

use crate::config::{parse_kernels, product_kernel, ExperimentConfig};
use crate::table::{Table, Value};
use crate::BenchError;

/// Franke's test function.
pub fn franke(x: f64, y: f64) -> f64 {
    let (u, v) = (9.0 * x, 9.0 * y);
    0.75 * (-((u - 2.0).powi(2) + (v - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(u + 1.0).powi(2) / 49.0 - (v + 1.0).powi(2) / 10.0).exp()
        + 0.5 * (-((u - 7.0).powi(2) + (v - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(u - 4.0).powi(2) - (v - 7.0).powi(2)).exp()
}

fn franke_point(p: &[f64]) -> f64 {
    franke(p[0], p[1])
}

/// `X_j = {k / 2^j : k = 0, ..., 2^j}`.
pub fn make_xj(j: u32) -> Result<ComponentPointSet, BenchError> {
    if !(1..=12).contains(&j) {
        return Err(BenchError::Config(format!("X_j needs 1 <= j <= 12, got {j}")));
    }
    let n = 1u32 << j;
    let xs: Vec<f64> = (0..=n).map(|k| f64::from(k) / f64::from(n)).collect();
    Ok(ComponentPointSet::from_scalars(&xs)?)
}

/// `n` equispaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn square_grid(xs: &[f64]) -> Result<GridPointSet, BenchError> {
    let f = ComponentPointSet::from_scalars(xs)?;
    Ok(GridPointSet::new(vec![f.clone(), f])?)
}

/// A named pass/fail outcome of an ordering or consistency assertion.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub checks: Vec<Check>,
    /// Extra tables, such as the greedy trace.
    pub extra: Vec<(String, Table)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn is_askey8(k: &ComponentKernel) -> bool {
    k.dim() == 1 && k.shape() == 1.0 && matches!(k.family(), Family::Askey { beta } if beta == 8.0)
}

fn is_w13(k: &ComponentKernel) -> bool {
    k.dim() == 1 && k.shape() == 1.0 && k.family() == Family::Wendland13
}

fn is_w33(k: &ComponentKernel) -> bool {
    k.family() == Family::Wendland33 && k.shape() == 1.0
}

fn grid_name(i: u32, j: u32) -> String {
    format!("X_{i}x{j}")
}

/// Value column of the row matching `experiment`, `kernel` and `grid`.
fn lookup(t: &Table, experiment: &str, kernel: &str, grid: &str, col: &str) -> Option<f64> {
    let c = t.column(col)?;
    t.filter("experiment", experiment)
        .find(|r| r[1].to_string() == kernel && r[2].to_string() == grid)
        .and_then(|r| r[c].as_f64())
        .filter(|v| v.is_finite())
}

fn status(r: &Result<f64, prodkern::Error>) -> (f64, String) {
    match r {
        Ok(v) => (*v, "ok".into()),
        Err(e) => (f64::NAN, format!("error: {e}")),
    }
}

/// Spectral condition numbers on `X_j` and on the grids `X_{i,j}`.
pub fn run_cond_experiment(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let uni = parse_kernels(&cfg.kernels.univariate)?;
    let pk = product_kernel(&cfg.kernels.product)?;
    let biv = parse_kernels(&cfg.kernels.bivariate)?;
    let (k1, k2) = (pk.components()[0], pk.components()[1]);
    let mut t = Table::new(["experiment", "kernel", "grid", "n", "cond2", "status"]);
    let mut checks = Vec::new();

    let mut component_cond: HashMap<(String, u32), Result<f64, prodkern::Error>> = HashMap::new();
    let mut cond_on = |k: &ComponentKernel, j: u32| -> Result<Result<f64, prodkern::Error>, BenchError> {
        let key = (k.to_string(), j);
        if let Some(v) = component_cond.get(&key) {
            return Ok(v.clone());
        }
        let x = make_xj(j)?;
        let v = assemble_direct(k, x.points()).and_then(|a| cond2(&a));
        component_cond.insert(key, v.clone());
        Ok(v)
    };

    for k in &uni {
        for j in cfg.cond.univariate.iter() {
            let (c, s) = status(&cond_on(k, j)?);
            t.push(vec!["univariate".into(), k.to_string().into(), format!("X_{j}").into(), ((1usize << j) + 1).into(), c.into(), s.into()]);
        }
    }

    for i in cfg.cond.grid_i.iter() {
        for j in cfg.cond.grid_j.iter() {
            let g = GridPointSet::new(vec![make_xj(i)?, make_xj(j)?])?;
            let name = grid_name(i, j);
            let c1 = cond_on(&k1, i)?;
            let c2 = cond_on(&k2, j)?;
            let cp = assemble_kronecker(&pk, &g).and_then(|a| cond2(&a));
            for (exp, k, r, n) in [
                ("component_1", k1.to_string(), &c1, g.sizes()[0]),
                ("component_2", k2.to_string(), &c2, g.sizes()[1]),
                ("product", pk_name(&pk), &cp, g.len()),
            ] {
                let (c, s) = status(r);
                t.push(vec![exp.into(), k.into(), name.clone().into(), n.into(), c.into(), s.into()]);
            }
            let law = match (&c1, &c2, &cp) {
                (Ok(a), Ok(b), Ok(c)) => {
                    let rel = (c - a * b).abs() / c;
                    Check::new(format!("cond product law on {name}"), rel <= 1e-6, format!("cond {c:e} vs {a:e} * {b:e}, relative deviation {rel:.2e}"))
                }
                _ => Check::new(format!("cond product law on {name}"), false, "a condition number could not be computed"),
            };
            checks.push(law);
            let points = g.enumerate()?;
            for k in &biv {
                let r = assemble_direct(k, &points).and_then(|a| cond2(&a));
                let (c, s) = status(&r);
                t.push(vec!["bivariate".into(), k.to_string().into(), name.clone().into(), g.len().into(), c.into(), s.into()]);
            }
        }
    }

    if let (Some(w), Some(a)) = (uni.iter().find(|k| is_w13(k)), uni.iter().find(|k| is_askey8(k))) {
        for j in (5..=7).filter(|&j| cfg.cond.univariate.contains(j)) {
            let grid = format!("X_{j}");
            let cw = lookup(&t, "univariate", &w.to_string(), &grid, "cond2");
            let ca = lookup(&t, "univariate", &a.to_string(), &grid, "cond2");
            let passed = matches!((cw, ca), (Some(x), Some(y)) if x > y);
            checks.push(Check::new(
                format!("cond({w}) > cond({a}) on {grid}"),
                passed,
                format!("{} vs {}", fmt_opt(cw), fmt_opt(ca)),
            ));
        }
    }
    Ok(Report { table: t, checks, extra: Vec::new() })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "unavailable".into(), |v| format!("{v:e}"))
}

fn pk_name(pk: &ProductKernel) -> String {
    pk.components().iter().map(ToString::to_string).collect::<Vec<_>>().join(" * ")
}

/// Mean square errors for the univariate restriction of Franke's function
/// and the bivariate function on the grids `X_{i,j}`.
pub fn run_mse_experiment(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let uni = parse_kernels(&cfg.kernels.univariate)?;
    let pk = product_kernel(&cfg.kernels.product)?;
    let biv = parse_kernels(&cfg.kernels.bivariate)?;
    let y0 = cfg.restriction_y;
    let mut t = Table::new(["experiment", "kernel", "grid", "n", "mse", "status"]);
    let mut checks = Vec::new();

    let eval_1d: Vec<Vec<f64>> = linspace(0.0, 1.0, cfg.eval_points_1d).into_iter().map(|x| vec![x]).collect();
    for k in &uni {
        let pk1 = ProductKernel::from(*k);
        for j in cfg.mse.univariate.iter() {
            let x = make_xj(j)?;
            let values: Vec<f64> = x.points().iter().map(|p| franke(p[0], y0)).collect();
            let r = fit(&pk1, x.points(), &values).and_then(|s| mse(&s, |p| franke(p[0], y0), &eval_1d));
            let (e, s) = status(&r);
            t.push(vec!["univariate".into(), k.to_string().into(), format!("X_{j}").into(), x.len().into(), e.into(), s.into()]);
        }
    }

    let eval_2d = square_grid(&linspace(0.0, 1.0, cfg.eval_points_2d))?.enumerate()?;
    let mut kernels: Vec<(String, ProductKernel)> = vec![(pk_name(&pk), pk.clone())];
    kernels.extend(biv.iter().map(|k| (k.to_string(), ProductKernel::from(*k))));
    for i in cfg.mse.grid_i.iter() {
        for j in cfg.mse.grid_j.iter() {
            let g = GridPointSet::new(vec![make_xj(i)?, make_xj(j)?])?;
            let points = g.enumerate()?;
            let values: Vec<f64> = points.iter().map(|p| franke_point(p)).collect();
            for (n, (name, k)) in kernels.iter().enumerate() {
                let r = fit(k, &points, &values).and_then(|s| mse(&s, franke_point, &eval_2d));
                let (e, s) = status(&r);
                let exp = if n == 0 { "product" } else { "bivariate" };
                t.push(vec![exp.into(), name.clone().into(), grid_name(i, j).into(), g.len().into(), e.into(), s.into()]);
            }
        }
    }

    // Refinement behavior along j = 3..7.
    let series = |exp: &str, kernel: &str, grids: Vec<String>| -> Vec<(String, Option<f64>)> {
        grids.into_iter().map(|g| (g.clone(), lookup(&t, exp, kernel, &g, "mse"))).collect()
    };
    let mut monotone = |label: String, s: Vec<(String, Option<f64>)>| {
        let mut bad = Vec::new();
        for w in s.windows(2) {
            match (w[0].1, w[1].1) {
                (Some(a), Some(b)) if b <= 1.05 * a => {}
                (a, b) => bad.push(format!("{} {} -> {} {}", w[0].0, fmt_opt(a), w[1].0, fmt_opt(b))),
            }
        }
        if s.len() >= 2 {
            let detail = if bad.is_empty() { "nonincreasing within 5%".to_string() } else { bad.join("; ") };
            checks.push(Check::new(label, bad.is_empty(), detail));
        }
    };
    let uni_js: Vec<u32> = cfg.mse.univariate.iter().filter(|j| (3..=7).contains(j)).collect();
    let grid_js: Vec<u32> = cfg.mse.grid_j.iter().filter(|j| (3..=7).contains(j)).collect();
    for k in &uni {
        let grids = uni_js.iter().map(|j| format!("X_{j}")).collect();
        monotone(format!("mse decreasing for {k} on X_j"), series("univariate", &k.to_string(), grids));
    }
    for i in cfg.mse.grid_i.iter() {
        for (n, (name, _)) in kernels.iter().enumerate() {
            let exp = if n == 0 { "product" } else { "bivariate" };
            let grids = grid_js.iter().map(|&j| grid_name(i, j)).collect();
            monotone(format!("mse decreasing for {name} on X_{i}xj"), series(exp, name, grids));
        }
    }

    if let (Some(w), Some(a)) = (uni.iter().find(|k| is_w13(k)), uni.iter().find(|k| is_askey8(k))) {
        if cfg.mse.univariate.contains(7) {
            let ew = lookup(&t, "univariate", &w.to_string(), "X_7", "mse");
            let ea = lookup(&t, "univariate", &a.to_string(), "X_7", "mse");
            checks.push(Check::new(
                format!("mse({w}) < mse({a}) on X_7"),
                matches!((ew, ea), (Some(x), Some(y)) if x < y),
                format!("{} vs {}", fmt_opt(ew), fmt_opt(ea)),
            ));
        }
    }

    if let Some(w33) = biv.iter().find(|k| is_w33(k)) {
        let jmax = cfg.mse.grid_j.1;
        for i in cfg.mse.grid_i.iter() {
            let g = grid_name(i, jmax);
            let ep = lookup(&t, "product", &pk_name(&pk), &g, "mse");
            let ew = lookup(&t, "bivariate", &w33.to_string(), &g, "mse");
            checks.push(Check::new(
                format!("product mse within a factor 10 of {w33} on {g}"),
                matches!((ep, ew), (Some(p), Some(w)) if p <= 10.0 * w),
                format!("{} vs {}", fmt_opt(ep), fmt_opt(ew)),
            ));
        }
    }
    Ok(Report { table: t, checks, extra: Vec::new() })
}

pub const METHODS: [&str; 4] = ["standard", "kronecker_prod", "Newton_base", "TensorNewton_Base"];

/// Seconds for the matrix (or basis) stage and for the whole solve.
struct Timed {
    assembly: f64,
    total: f64,
    model: Box<dyn Evaluate>,
}

fn solve_with(pk: &ProductKernel, points: &[Vec<f64>], values: &[f64], a_start: Instant, a: prodkern::DenseMatrix) -> Result<Timed, prodkern::Error> {
    let assembly = a_start.elapsed().as_secs_f64();
    let l = cholesky(&a)?;
    drop(a);
    let c = cholesky_solve(&l, values)?;
    let total = a_start.elapsed().as_secs_f64();
    let model = Interpolant::new(pk.clone(), points.to_vec(), c)?;
    Ok(Timed { assembly, total, model: Box::new(model) })
}

fn run_method(method: &str, pk: &ProductKernel, grid: &GridPointSet, points: &[Vec<f64>], values: &[f64]) -> Result<Timed, prodkern::Error> {
    let start = Instant::now();
    match method {
        "standard" => {
            let a = assemble_direct(pk, points)?;
            solve_with(pk, points, values, start, a)
        }
        "kronecker_prod" => {
            let a = assemble_kronecker(pk, grid)?;
            solve_with(pk, points, values, start, a)
        }
        "Newton_base" => {
            let s = NewtonInterpolant::fit(pk.clone(), points, values)?;
            let total = start.elapsed().as_secs_f64();
            Ok(Timed { assembly: total, total, model: Box::new(s) })
        }
        "TensorNewton_Base" => {
            let basis = prodkern::TensorNewtonBasis::build(pk, grid)?;
            let assembly = start.elapsed().as_secs_f64();
            let c = basis.coeffs(values)?;
            let s = TensorNewtonInterpolant::from_parts(basis, c)?;
            let total = start.elapsed().as_secs_f64();
            Ok(Timed { assembly, total, model: Box::new(s) })
        }
        _ => unreachable!("unknown method {method}"),
    }
}

/// Mean wall-clock seconds of the four interpolation methods on `N x N`
/// grids in `[-1, 1]^2`, on a single thread. The untimed first run of each
/// method doubles as the agreement check and the warm-up.
pub fn run_time_experiment(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    pool.install(|| time_single_threaded(cfg))
}

fn time_single_threaded(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let tc = &cfg.time;
    let pk = product_kernel(&tc.kernels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut t = Table::new(["method", "N", "mean_assembly_s", "mean_total_s", "max_deviation"]);
    let mut checks = Vec::new();

    for &n in &tc.sizes {
        let grid = square_grid(&linspace(-1.0, 1.0, n))?;
        let points = grid.enumerate()?;
        let values: Vec<f64> = points.iter().map(|p| franke_point(p)).collect();
        let probes: Vec<Vec<f64>> =
            (0..tc.check_points).map(|_| vec![rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]).collect();

        let mut reference: Option<Vec<f64>> = None;
        let mut deviations = Vec::new();
        for m in METHODS {
            let run = run_method(m, &pk, &grid, &points, &values)?;
            let vals = run.model.evaluate_many(&probes)?;
            let dev = match &reference {
                None => 0.0,
                Some(r) => r.iter().zip(&vals).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
            };
            reference.get_or_insert(vals);
            deviations.push(dev);
        }
        let worst = deviations.iter().copied().fold(0.0, f64::max);
        let agree = worst <= tc.check_tol;
        checks.push(Check::new(
            format!("methods agree at N={n}"),
            agree,
            format!("max deviation from standard {worst:.3e} at {} points", probes.len()),
        ));
        if !agree {
            // Nothing is timed when the methods disagree.
            return Ok(Report { table: t, checks, extra: Vec::new() });
        }
        for (m, dev) in METHODS.iter().zip(&deviations) {
            let (mut a, mut tot) = (0.0, 0.0);
            for _ in 0..tc.repetitions {
                let run = run_method(m, &pk, &grid, &points, &values)?;
                a += run.assembly;
                tot += run.total;
            }
            let r = tc.repetitions as f64;
            t.push(vec![(*m).into(), n.into(), (a / r).into(), (tot / r).into(), (*dev).into()]);
        }
    }

    if let Some(n) = tc.assert_at.filter(|n| tc.sizes.contains(n)) {
        let get = |m: &str, col: usize| {
            t.filter("method", m).find(|r| r[1] == Value::from(n)).and_then(|r| r[col].as_f64())
        };
        let (ks, ss) = (get("kronecker_prod", 2), get("standard", 2));
        checks.push(Check::new(
            format!("kronecker_prod assembly faster than standard at N={n}"),
            matches!((ks, ss), (Some(a), Some(b)) if a < b),
            format!("{} s vs {} s", fmt_opt(ks), fmt_opt(ss)),
        ));
        let (tn, nb) = (get("TensorNewton_Base", 3), get("Newton_base", 3));
        checks.push(Check::new(
            format!("TensorNewton_Base faster than Newton_base at N={n}"),
            matches!((tn, nb), (Some(a), Some(b)) if a < b),
            format!("{} s vs {} s", fmt_opt(tn), fmt_opt(nb)),
        ));
    }
    Ok(Report { table: t, checks, extra: Vec::new() })
}

/// Componentwise P-greedy on Franke's function over `[0, 1]^2` candidates,
/// compared with the full grid baseline of the configured size.
pub fn run_greedy_demo(cfg: &ExperimentConfig) -> Result<Report, BenchError> {
    let gc = &cfg.greedy;
    let pk = product_kernel(&gc.kernels)?;
    let cands = CandidateGrid::uniform(pk.len(), gc.candidates, 0.0, 1.0)?;
    let rule = StopRule { max_points: gc.max_points, max_steps: gc.max_steps, power_tol: gc.power_tol };
    let run = run_pgreedy(&pk, cands, franke_point, rule)?;
    let eval = square_grid(&linspace(0.0, 1.0, cfg.eval_points_2d))?.enumerate()?;
    let model = run.interpolant()?;
    let greedy_mse = mse(&model, franke_point, &eval)?;

    let [bi, bj] = gc.baseline;
    let bgrid = GridPointSet::new(vec![make_xj(bi)?, make_xj(bj)?])?;
    let bpoints = bgrid.enumerate()?;
    let bvalues: Vec<f64> = bpoints.iter().map(|p| franke_point(p)).collect();
    let baseline_mse = mse(&fit(&pk, &bpoints, &bvalues)?, franke_point, &eval)?;

    let mut trace = Table::new(["step", "component", "point_coords", "sup_power"]);
    for r in run.trace() {
        let coords: Vec<String> = r.point.iter().map(|c| format!("{c:e}")).collect();
        trace.push(vec![r.step.into(), r.component.into(), coords.join(" ").into(), r.sup_power.into()]);
    }

    let sizes = run.state.sizes();
    let grid_len = run.state.grid()?.enumerate()?.len();
    let mut checks = vec![Check::new(
        "greedy grid is grid-like",
        grid_len == sizes.iter().product::<usize>(),
        format!("{grid_len} points, component sizes {sizes:?}"),
    )];
    for i in 0..pk.len() {
        let sups: Vec<f64> = run.trace().iter().filter(|r| r.component == i).map(|r| r.sup_power).collect();
        let ok = sups.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        checks.push(Check::new(format!("sup-power nonincreasing for component {i}"), ok, format!("{} selections", sups.len())));
    }
    let sups = run.state.component_sups();
    let final_sup = sups.iter().flatten().fold(0.0f64, |a, &b| a.max(b));

    let mut summary = Table::new(["steps", "points", "stop", "final_sup_power", "greedy_mse", "baseline_grid", "baseline_points", "baseline_mse"]);
    summary.push(vec![
        run.trace().len().into(),
        grid_len.into(),
        format!("{:?}", run.stop).into(),
        final_sup.into(),
        greedy_mse.into(),
        grid_name(bi, bj).into(),
        bpoints.len().into(),
        baseline_mse.into(),
    ]);
    Ok(Report { table: summary, checks, extra: vec![("trace".into(), trace)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn franke_terms() {
        // Four terms evaluated by hand at the origin.
        let expected = 0.75 * (-8.0f64 / 4.0).exp()
            + 0.75 * (-1.0f64 / 49.0 - 1.0 / 10.0).exp()
            + 0.5 * (-(49.0f64 + 9.0) / 4.0).exp()
            - 0.2 * (-16.0f64 - 49.0).exp();
        assert_eq!(franke(0.0, 0.0), expected);
        assert!((franke(0.0, 0.0) - 0.7664205912849231).abs() < 1e-15);
    }

    #[test]
    fn ladder_sizes() {
        assert_eq!(make_xj(1).unwrap().points(), &[vec![0.0], vec![0.5], vec![1.0]]);
        let sizes: Vec<usize> = (1..=7).map(|j| make_xj(j).unwrap().len()).collect();
        assert_eq!(sizes, vec![3, 5, 9, 17, 33, 65, 129]);
        assert!(make_xj(0).is_err());
        assert!(make_xj(13).is_err());
    }
}
