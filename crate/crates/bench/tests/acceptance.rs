//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so every line is printed; exits nonzero when any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prodkern::interpolation::{assemble_direct, assemble_kronecker, fit, fit_tensor_target, power_function_direct};
use prodkern::linalg::{cholesky, cond2, kron, DenseMatrix};
use prodkern::newton::power_product;
use prodkern::{
    run_pgreedy, CandidateGrid, ComponentKernel, ComponentPointSet, Evaluate, GreedyState, GridPointSet,
    NewtonBasis, ProductKernel, StepOutcome, StopRule, TensorNewtonBasis,
};
use prodkern_bench::config::{ExperimentConfig, Span};
use prodkern_bench::{franke, make_xj, run_cond_experiment, run_mse_experiment, run_time_experiment};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(elapsed: Duration, limit: f64, msg: String) -> Outcome {
    let s = elapsed.as_secs_f64();
    ensure(s < limit, format!("{msg}; {s:.2} s (limit {limit} s)"))
}

fn random_kernel(rng: &mut ChaCha8Rng) -> ComponentKernel {
    let shape = rng.random_range(0.7..2.0);
    let k = match rng.random_range(0..4) {
        0 => ComponentKernel::askey(rng.random_range(2.0..10.0)).unwrap(),
        1 => ComponentKernel::wendland13(),
        2 => ComponentKernel::wendland33(),
        _ => ComponentKernel::gaussian(rng.random_range(0.5..4.0)).unwrap(),
    };
    k.with_shape(shape).unwrap()
}

/// `n` distinct points in `[0, 1]`, at least `0.5 / n` apart.
fn random_set(rng: &mut ChaCha8Rng, n: usize) -> ComponentPointSet {
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    while xs.len() < n {
        let x: f64 = rng.random();
        if xs.iter().all(|y| (x - y).abs() >= 0.5 / n as f64) {
            xs.push(x);
        }
    }
    ComponentPointSet::from_scalars(&xs).unwrap()
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let b = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut a = b.matmul(&b.transpose()).unwrap();
    for i in 0..n {
        a[(i, i)] += 0.1 * n as f64;
    }
    a
}

fn askey_wendland() -> ProductKernel {
    ProductKernel::new(vec![ComponentKernel::askey(8.0).unwrap(), ComponentKernel::wendland13()]).unwrap()
}

fn franke_point(p: &[f64]) -> f64 {
    franke(p[0], p[1])
}

fn kronecker_factorization() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let pk = ProductKernel::new(vec![random_kernel(&mut rng), random_kernel(&mut rng)]).unwrap();
        let (n, m) = (rng.random_range(1..=16), rng.random_range(1..=16));
        let g = GridPointSet::new(vec![random_set(&mut rng, n), random_set(&mut rng, m)]).unwrap();
        let a = assemble_kronecker(&pk, &g).unwrap();
        let b = assemble_direct(&pk, &g.enumerate().unwrap()).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            let d = if *y == 0.0 { x.abs() } else { (x - y).abs() / y.abs() };
            worst = worst.max(d);
        }
    }
    let msg = format!("max relative entry difference {worst:.2e} (tol 1e-14) over 20 grids");
    if worst > 1e-14 {
        return Err(msg);
    }
    within(start.elapsed(), 5.0, msg)
}

fn cholesky_kronecker() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (n, m) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let (a, b) = (random_spd(&mut rng, n), random_spd(&mut rng, m));
        let l = cholesky(&kron(&a, &b).unwrap()).unwrap().to_dense();
        let lk = kron(&cholesky(&a).unwrap().to_dense(), &cholesky(&b).unwrap().to_dense()).unwrap();
        let scale = lk.max_abs();
        for (x, y) in l.as_slice().iter().zip(lk.as_slice()) {
            worst = worst.max((x - y).abs() / scale);
        }
    }
    let msg = format!("max relative difference {worst:.2e} (tol 1e-10) over 20 pairs");
    if worst > 1e-10 {
        return Err(msg);
    }
    within(start.elapsed(), 1.0, msg)
}

fn condition_product_law() -> Outcome {
    let start = Instant::now();
    let pk = askey_wendland();
    let (k1, k2) = (pk.components()[0], pk.components()[1]);
    let mut worst = 0.0f64;
    for i in 1..=3 {
        for j in 1..=5 {
            let (x1, x2) = (make_xj(i).unwrap(), make_xj(j).unwrap());
            let c1 = cond2(&assemble_direct(&k1, x1.points()).unwrap()).unwrap();
            let c2 = cond2(&assemble_direct(&k2, x2.points()).unwrap()).unwrap();
            let g = GridPointSet::new(vec![x1, x2]).unwrap();
            let c = cond2(&assemble_kronecker(&pk, &g).unwrap()).unwrap();
            worst = worst.max((c - c1 * c2).abs() / c);
        }
    }
    let msg = format!("max relative deviation {worst:.2e} (tol 1e-6) on X_i x X_j, i <= 3, j <= 5");
    if worst > 1e-6 {
        return Err(msg);
    }
    within(start.elapsed(), 30.0, msg)
}

fn newton_cholesky() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let kernels = [ComponentKernel::askey(8.0).unwrap(), ComponentKernel::wendland13(), ComponentKernel::wendland33()];
    let mut worst = 0.0f64;
    for n in [1, 2, 5, 16, 33, 64] {
        for k in kernels {
            let x = random_set(&mut rng, n);
            let b = NewtonBasis::build(k, x.points()).unwrap();
            let l = cholesky(&assemble_direct(&k, x.points()).unwrap()).unwrap();
            for i in 0..n {
                for j in 0..=i {
                    worst = worst.max((b.factor().get(i, j) - l.get(i, j)).abs());
                }
            }
        }
    }
    let pk = askey_wendland();
    let g = GridPointSet::new(vec![random_set(&mut rng, 6), random_set(&mut rng, 7)]).unwrap();
    let tb = TensorNewtonBasis::build(&pk, &g).unwrap();
    let v = tb.tensor_vandermonde(&g).unwrap();
    let l = tb.cholesky_factor().unwrap();
    let tensor = v.as_slice().iter().zip(l.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(
        worst <= 1e-12 && tensor <= 1e-12,
        format!("Newton vs Cholesky {worst:.2e}, tensor Vandermonde vs kron(L_i) {tensor:.2e} (tol 1e-12)"),
    )
}

fn power_product_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pk = askey_wendland();
    let mut worst = 0.0f64;
    let mut count = 0;
    for _ in 0..5 {
        let (n, m) = (rng.random_range(1..=9), rng.random_range(1..=9));
        let g = GridPointSet::new(vec![random_set(&mut rng, n), random_set(&mut rng, m)]).unwrap();
        let tb = TensorNewtonBasis::build(&pk, &g).unwrap();
        let all = g.enumerate().unwrap();
        for _ in 0..100 {
            let x = [rng.random(), rng.random()];
            let (p, d) = tb.component_powers(&x).unwrap();
            let a = power_product(&p, &d).unwrap();
            let b = power_function_direct(&pk, &all, &x).unwrap();
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    ensure(worst <= 1e-8, format!("max |product formula - direct| {worst:.2e} (tol 1e-8) at {count} points"))
}

fn positive_definiteness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pk = askey_wendland();
    let mut failures = Vec::new();
    let mut largest = 0;
    for set in 0..100 {
        let n = rng.random_range(10..=200);
        largest = largest.max(n);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        if let Err(e) = cholesky(&assemble_direct(&pk, &pts).unwrap()) {
            failures.push(format!("set {set} ({n} points): {e}"));
        }
    }
    ensure(failures.is_empty(), format!("{} of 100 scattered sets (up to {largest} points) failed {failures:?}", failures.len()))
}

fn tensor_target() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pk = askey_wendland();
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let g = GridPointSet::new(vec![random_set(&mut rng, 5), random_set(&mut rng, 7)]).unwrap();
        let (a, b, c) = (rng.random_range(0.5..3.0), rng.random_range(-1.0..1.0), rng.random_range(0.5..2.0));
        let f1 = move |x: f64| (a * x).sin() + b;
        let f2 = move |y: f64| (-c * y * y).exp();
        let comp = vec![
            g.factors()[0].points().iter().map(|p| f1(p[0])).collect::<Vec<_>>(),
            g.factors()[1].points().iter().map(|p| f2(p[0])).collect::<Vec<_>>(),
        ];
        let prod = fit_tensor_target(&pk, &g, &comp).unwrap();
        let pts = g.enumerate().unwrap();
        let vals: Vec<f64> = pts.iter().map(|p| f1(p[0]) * f2(p[1])).collect();
        let full = fit(&pk, &pts, &vals).unwrap();
        for _ in 0..100 {
            let x = [rng.random(), rng.random()];
            worst = worst.max((prod.evaluate(&x).unwrap() - full.evaluate(&x).unwrap()).abs());
        }
    }
    ensure(worst <= 1e-8, format!("max |product form - full fit| {worst:.2e} (tol 1e-8) on 5 x 7 grids"))
}

fn greedy_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pk = askey_wendland();
    let mut state = GreedyState::new(&pk, CandidateGrid::uniform(2, 65, 0.0, 1.0).unwrap()).unwrap();
    let (mut refit_dev, mut node_dev, mut diag_dev) = (0.0f64, 0.0f64, 0.0f64);
    let fmax = 1.22; // above max |f| on the unit square
    for step in 0..60 {
        let before = state.sizes();
        let StepOutcome::Added(row) = state.step(franke_point).unwrap() else {
            return Err(format!("run stopped at step {step}"));
        };
        let after = state.sizes();
        let grown: Vec<usize> = (0..2).filter(|&i| after[i] != before[i]).collect();
        if grown != [row.component] || after[row.component] != before[row.component] + 1 {
            return Err(format!("step {step}: sizes {before:?} -> {after:?}"));
        }
        let grid = state.grid().unwrap();
        let pts = grid.enumerate().unwrap();
        if pts.len() != after.iter().product::<usize>() {
            return Err(format!("step {step}: grid is not grid-like"));
        }
        diag_dev = diag_dev.max((row.newton_diagonal - row.sup_power).abs());
        if pts.is_empty() {
            continue;
        }
        let s = state.interpolant().unwrap();
        for p in &pts {
            node_dev = node_dev.max((s.evaluate(p).unwrap() - franke_point(p)).abs() / fmax);
        }
        let vals: Vec<f64> = pts.iter().map(|p| franke_point(p)).collect();
        let full = fit(&pk, &pts, &vals).unwrap();
        for _ in 0..20 {
            let x = [rng.random(), rng.random()];
            refit_dev = refit_dev.max((s.evaluate(&x).unwrap() - full.evaluate(&x).unwrap()).abs());
        }
    }
    let msg = format!(
        "60 steps, final sizes {:?}: refit {refit_dev:.2e} (tol 1e-7), nodes {node_dev:.2e} (tol 1e-7), diagonal {diag_dev:.2e} (tol 1e-10)",
        state.sizes()
    );
    ensure(refit_dev <= 1e-7 && node_dev <= 1e-7 && diag_dev <= 1e-10, msg)
}

fn qualitative_reproductions() -> Outcome {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::default();
    cfg.cond.univariate = Span(5, 7);
    cfg.cond.grid_i = Span(1, 1);
    cfg.cond.grid_j = Span(1, 1);
    let cond = run_cond_experiment(&cfg).map_err(|e| e.to_string())?;
    let mse = run_mse_experiment(&ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut ok = true;
    for j in 5..=7 {
        let c = cond.check(&format!("cond(wendland13) > cond(askey:beta=8) on X_{j}")).ok_or("missing cond check")?;
        ok &= c.passed;
        parts.push(format!("(a) X_{j}: {} [{}]", c.detail, pass(c.passed)));
    }
    let c = mse.check("mse(wendland13) < mse(askey:beta=8) on X_7").ok_or("missing mse check")?;
    ok &= c.passed;
    parts.push(format!("(b) {} [{}]", c.detail, pass(c.passed)));
    let dec = mse.check("mse decreasing for askey:beta=8 * wendland13 on X_4xj").ok_or("missing trend check")?;
    let gap = mse.check("product mse within a factor 10 of wendland33:dim=2 on X_4x7").ok_or("missing gap check")?;
    ok &= dec.passed && gap.passed;
    parts.push(format!(
        "(c) product decreasing along X_4xj [{}], product vs wendland33 on X_4x7: {} [{}]",
        pass(dec.passed),
        gap.detail,
        pass(gap.passed)
    ));
    let msg = parts.join("; ");
    if !ok {
        return Err(msg);
    }
    within(start.elapsed(), 120.0, msg)
}

fn timing_orderings() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.time.sizes = vec![64];
    cfg.time.repetitions = 1;
    cfg.time.assert_at = Some(64);
    let r = run_time_experiment(&cfg).map_err(|e| e.to_string())?;
    let mut lines: Vec<String> = r.checks.iter().map(|c| format!("{}: {} [{}]", c.name, c.detail, pass(c.passed))).collect();
    for row in &r.table.rows {
        lines.push(format!("{} total {} s", row[0], row[3]));
    }
    ensure(r.passed() && r.checks.len() == 3, lines.join("; "))
}

fn greedy_convergence() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    let pairs = [
        ProductKernel::new(vec![ComponentKernel::askey(8.0).unwrap(), ComponentKernel::wendland13()]).unwrap(),
        ProductKernel::new(vec![ComponentKernel::wendland33(), ComponentKernel::wendland33()]).unwrap(),
    ];
    for pk in pairs {
        let rule = StopRule { max_steps: 200, power_tol: 1e-2, ..StopRule::default() };
        let run = run_pgreedy(&pk, CandidateGrid::uniform(2, 65, 0.0, 1.0).unwrap(), franke_point, rule).unwrap();
        // Exhausted components have zero power on all candidates.
        let sup = run.state.component_sups().iter().map(|s| s.unwrap_or(0.0)).fold(0.0, f64::max);
        let good = sup < 1e-2 && run.trace().len() <= 200;
        ok &= good;
        let name: Vec<String> = pk.components().iter().map(|k| k.to_string()).collect();
        parts.push(format!("{}: sup-power {sup:.2e} after {} steps ({:?})", name.join(" * "), run.trace().len(), run.stop));
    }
    ensure(ok, parts.join("; "))
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1 kronecker factorization", kronecker_factorization),
        ("2 cholesky of kronecker products", cholesky_kronecker),
        ("3 condition number product law", condition_product_law),
        ("4 newton basis equals cholesky factor", newton_cholesky),
        ("5 power function product formula", power_product_oracle),
        ("6 positive definiteness on scattered sets", positive_definiteness),
        ("7 tensor target factorization", tensor_target),
        ("8 greedy consistency", greedy_consistency),
        ("9 qualitative reproductions", qualitative_reproductions),
        ("10 timing orderings at N=64", timing_orderings),
        ("11 greedy convergence", greedy_convergence),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.2} s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.2} s]");
            }
        }
    }
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

