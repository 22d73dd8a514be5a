use std::path::PathBuf;

use prodkern::interpolation::{fit, mse};
use prodkern::{ComponentKernel, ProductKernel};
use prodkern_bench::config::{ExperimentConfig, Span};
use prodkern_bench::table::render_svg;
use prodkern_bench::{
    emit_csv, emit_svg_plot, franke, make_xj, read_csv, run_cond_experiment, run_greedy_demo, run_mse_experiment,
    PlotSpec, Table, Value,
};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.cond.univariate = Span(1, 4);
    cfg.cond.grid_i = Span(1, 2);
    cfg.cond.grid_j = Span(1, 3);
    cfg.mse.univariate = Span(1, 4);
    cfg.mse.grid_i = Span(2, 2);
    cfg.mse.grid_j = Span(1, 3);
    cfg.eval_points_2d = 41;
    cfg.greedy.candidates = 33;
    cfg
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("prodkern-bench-{}-{name}", std::process::id()))
}

#[test]
fn franke_is_bounded() {
    let mut max = 0.0f64;
    for i in 0..=100 {
        for j in 0..=100 {
            let v = franke(i as f64 / 100.0, j as f64 / 100.0);
            assert!(v.is_finite());
            max = max.max(v.abs());
        }
    }
    assert!(max <= 2.0);
    // The main peak sits near (2/9, 2/9).
    assert!(max > 1.0 && franke(2.0 / 9.0, 2.0 / 9.0) > 1.0);
}

#[test]
fn xj_points_are_dyadic() {
    let x3 = make_xj(3).unwrap();
    assert_eq!(x3.len(), 9);
    assert_eq!(x3.get(3), &[0.375]);
    assert_eq!(make_xj(7).unwrap().len(), 129);
}

#[test]
fn default_config_file_matches_builtin() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let from_file = ExperimentConfig::load(&dir.join("configs/default.json")).unwrap();
    assert_eq!(from_file, ExperimentConfig::default());
    ExperimentConfig::load(&dir.join("configs/quick.json")).unwrap();
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("config.schema.json")).unwrap()).unwrap();
    // Every top-level field of the configuration is documented.
    let props = schema["properties"].as_object().unwrap();
    let cfg = serde_json::to_value(ExperimentConfig::default()).unwrap();
    for key in cfg.as_object().unwrap().keys() {
        assert!(props.contains_key(key), "schema lacks `{key}`");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for text in [
        r#"{"cond": {"univariate": [0, 3], "grid_i": [1, 1], "grid_j": [1, 1]}}"#,
        r#"{"cond": {"univariate": [4, 3], "grid_i": [1, 1], "grid_j": [1, 1]}}"#,
        r#"{"time": {"repetitions": 0}}"#,
        r#"{"time": {"sizes": []}}"#,
        r#"{"kernels": {"product": ["askey:beta=1", "wendland13"]}}"#,
        r#"{"kernels": {"bivariate": ["wendland33"]}}"#,
        r#"{"unknown": 1}"#,
        r#"{"seed": "x"}"#,
    ] {
        assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
    }
    assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
}

#[test]
fn cond_experiment_rows_and_checks() {
    let cfg = small_config();
    let r = run_cond_experiment(&cfg).unwrap();
    // 2 kernels x 4 sets, then 6 grids x (3 + 2 bivariate) rows.
    assert_eq!(r.table.rows.len(), 8 + 6 * 5);
    let c = r.table.column("cond2").unwrap();
    assert!(r.table.rows.iter().all(|row| row[c].as_f64().unwrap() >= 1.0));
    assert!(r.checks.iter().filter(|c| c.name.starts_with("cond product law")).all(|c| c.passed));
    let x1 = r.table.filter("experiment", "univariate").find(|row| row[1] == Value::from("askey:beta=8")).unwrap();
    assert!(x1[c].as_f64().unwrap() >= 1.0);
}

#[test]
fn mse_experiment_and_node_error() {
    let cfg = small_config();
    let r = run_mse_experiment(&cfg).unwrap();
    assert_eq!(r.table.rows.len(), 8 + 3 * 3);
    assert!(r.table.rows.iter().all(|row| row[5] == Value::from("ok")));

    // Interpolating samples of the target: zero error on the nodes.
    let pk = ProductKernel::from(ComponentKernel::wendland13());
    let x = make_xj(4).unwrap();
    let f = |p: &[f64]| franke(p[0], 0.25);
    let values: Vec<f64> = x.points().iter().map(|p| f(p)).collect();
    let s = fit(&pk, x.points(), &values).unwrap();
    assert!(mse(&s, f, x.points()).unwrap() <= 1e-16);
}

#[test]
fn non_timing_outputs_are_deterministic() {
    let cfg = small_config();
    let a = run_mse_experiment(&cfg).unwrap().table.to_csv_string().unwrap();
    let b = run_mse_experiment(&cfg).unwrap().table.to_csv_string().unwrap();
    assert_eq!(a, b);
    let g1 = run_greedy_demo(&cfg).unwrap();
    let g2 = run_greedy_demo(&cfg).unwrap();
    assert_eq!(g1.extra[0].1, g2.extra[0].1);
    assert_eq!(g1.table, g2.table);
}

#[test]
fn greedy_demo_trace() {
    let cfg = small_config();
    let r = run_greedy_demo(&cfg).unwrap();
    assert!(r.passed(), "{:?}", r.checks);
    let trace = &r.extra[0].1;
    assert_eq!(trace.header, ["step", "component", "point_coords", "sup_power"]);
    let points = r.table.column("points").unwrap();
    assert_eq!(r.table.rows[0][points], Value::Int(25));
    // Weakly decreasing sup-power per component, from the trace alone.
    for comp in 0..2u64 {
        let sups: Vec<f64> =
            trace.rows.iter().filter(|row| row[1] == Value::Int(comp)).map(|row| row[3].as_f64().unwrap()).collect();
        assert!(sups.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn csv_file_round_trip() {
    let mut t = Table::new(["kernel", "n", "value"]);
    for (k, x) in [0.1f64, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 6.02214076e23].iter().enumerate() {
        t.push(vec![format!("k{k}, quoted").into(), k.into(), (*x).into()]);
    }
    let path = tmp("roundtrip.csv");
    emit_csv(&t, &path).unwrap();
    let back = read_csv(&path).unwrap();
    for (a, b) in t.rows.iter().zip(&back.rows) {
        let (x, y) = (a[2].as_f64().unwrap(), b[2].as_f64().unwrap());
        assert!((x - y).abs() <= 1e-15 * x.abs());
        assert_eq!(a[0], b[0]);
    }
    std::fs::remove_file(path).ok();
    assert!(emit_csv(&Table::new(["a"]), &tmp("empty.csv")).is_err());
}

#[test]
fn svg_is_well_formed() {
    let r = run_cond_experiment(&small_config()).unwrap();
    let spec = PlotSpec {
        title: "cond <&> test".into(),
        x: "n".into(),
        y: "cond2".into(),
        series: vec!["experiment".into(), "kernel".into()],
        log_x: true,
        log_y: true,
    };
    let svg = render_svg(&r.table, &spec).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    assert!(doc.descendants().filter(|n| n.has_tag_name("path")).count() > 2);
    let path = tmp("plot.svg");
    emit_svg_plot(&r.table, &path, &spec).unwrap();
    std::fs::remove_file(path).ok();
    let bad = PlotSpec { y: "missing".into(), ..spec };
    assert!(render_svg(&r.table, &bad).is_err());
}
