use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodkern"))
}

fn quick() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/quick.json")
}

fn out_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("prodkern-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn pgreedy_succeeds_and_writes_outputs() {
    let out = out_dir("pgreedy");
    let o = run(bin().arg("--config").arg(quick()).arg("--out").arg(&out).arg("pgreedy"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["pgreedy_summary.csv", "pgreedy_trace.csv", "pgreedy_trace.svg"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let trace = std::fs::read_to_string(out.join("pgreedy_trace.csv")).unwrap();
    assert!(trace.starts_with("step,component,point_coords,sup_power\n"));
    std::fs::remove_dir_all(out).ok();
}

#[test]
fn usage_and_config_errors_exit_2() {
    assert_eq!(run(bin().arg("--bogus").arg("cond")).status.code(), Some(2));
    assert_eq!(run(bin().arg("frobnicate")).status.code(), Some(2));
    assert_eq!(run(bin().arg("--config").arg("/nonexistent/cfg.json").arg("cond")).status.code(), Some(2));

    let dir = out_dir("badcfg");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"time": {"repetitions": 0}}"#).unwrap();
    assert_eq!(run(bin().arg("--config").arg(&bad).arg("time")).status.code(), Some(2));
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(bin().arg("--config").arg(&bad).arg("cond")).status.code(), Some(2));
    assert_eq!(run(bin().arg("--threads").arg("0").arg("cond")).status.code(), Some(2));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn failed_check_exits_1() {
    // On small grids the product kernel misses the bivariate error target.
    let out = out_dir("mse");
    let o = run(bin().arg("--config").arg(quick()).arg("--out").arg(&out).arg("mse"));
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL")));
    assert!(out.join("mse.csv").is_file());
    std::fs::remove_dir_all(out).ok();
}

#[test]
fn interp_reproduces_data() {
    let dir = out_dir("interp");
    let centers = dir.join("centers.csv");
    let values = dir.join("values.csv");
    std::fs::write(&centers, "x1,x2\n0,0\n0,0.5\n0,1\n1,0\n1,0.5\n1,1\n").unwrap();
    std::fs::write(&values, "f\n1\n2\n3\n4\n5\n6\n").unwrap();
    let o = run(bin()
        .args(["--out"])
        .arg(&dir)
        .args(["interp", "--kernel", "askey:beta=8", "--kernel", "wendland13", "--centers"])
        .arg(&centers)
        .arg("--values")
        .arg(&values));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.join("interp.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,s"));
    for (line, want) in lines.zip(1..) {
        let s: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((s - f64::from(want)).abs() < 1e-10, "{line}");
    }

    // Coincident centers are a numerical failure.
    std::fs::write(&centers, "x1,x2\n0,0\n0,0\n").unwrap();
    let o = run(bin().arg("--out").arg(&dir).args(["interp", "--kernel", "wendland13", "--kernel", "wendland13", "--centers"]).arg(&centers));
    assert!(matches!(o.status.code(), Some(2 | 3)));
    // Kernel dimension must match the centers.
    std::fs::write(&centers, "x1\n0\n1\n").unwrap();
    let o = run(bin().arg("--out").arg(&dir).args(["interp", "--kernel", "wendland13", "--kernel", "wendland13", "--centers"]).arg(&centers));
    assert_ne!(o.status.code(), Some(0));
    std::fs::remove_dir_all(dir).ok();
}
