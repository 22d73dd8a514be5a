use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use prodkern::grid::{read_points_csv, write_points_csv};
use prodkern::interpolation::fit;
use prodkern::{ComponentKernel, Evaluate, ProductKernel};
use prodkern_bench::table::write_file;
use prodkern_bench::{
    emit_csv, emit_svg_plot, franke, run_cond_experiment, run_greedy_demo, run_mse_experiment, run_time_experiment,
    BenchError, ExperimentConfig, PlotSpec, Report, Table,
};

#[derive(Parser)]
#[command(name = "prodkern", version, about = "Product kernel interpolation experiments")]
struct Cli {
    /// JSON experiment configuration; built-in defaults otherwise.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir` from the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random check points (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel assembly and evaluation.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral condition numbers on X_j and X_i x X_j.
    Cond,
    /// Mean square errors for Franke's function.
    Mse,
    /// Single-threaded timings of the four interpolation methods.
    Time,
    /// Componentwise P-greedy demo on Franke's function.
    Pgreedy,
    /// Interpolate data given as point files.
    Interp {
        /// Component kernel spec, one per component, e.g. `askey:beta=8`.
        #[arg(long = "kernel", required = true)]
        kernels: Vec<String>,
        /// Centers, CSV with header x1,...,xd.
        #[arg(long)]
        centers: PathBuf,
        /// Data values, CSV with a single column `f`; Franke's function at
        /// the centers when omitted (d = 2 only).
        #[arg(long)]
        values: Option<PathBuf>,
        /// Evaluation points; the centers when omitted.
        #[arg(long)]
        eval: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<bool, BenchError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = cli.out {
        cfg.out_dir = o;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(BenchError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| BenchError::Config(format!("thread pool: {e}")))?;
    }
    let out = cfg.out_dir.clone();

    match cli.command {
        Command::Cond => {
            let r = run_cond_experiment(&cfg)?;
            emit_csv(&r.table, &out.join("cond.csv"))?;
            plot(&r.table, "univariate", &out.join("cond_univariate.svg"), "Condition numbers on X_j", "cond2")?;
            plot_grid(&r.table, &out.join("cond_grid.svg"), "Condition numbers on X_i x X_j", "cond2")?;
            Ok(finish(&r))
        }
        Command::Mse => {
            let r = run_mse_experiment(&cfg)?;
            emit_csv(&r.table, &out.join("mse.csv"))?;
            plot(&r.table, "univariate", &out.join("mse_univariate.svg"), "MSE, univariate restriction", "mse")?;
            plot_grid(&r.table, &out.join("mse_grid.svg"), "MSE on X_i x X_j", "mse")?;
            Ok(finish(&r))
        }
        Command::Time => {
            let r = run_time_experiment(&cfg)?;
            if !r.table.is_empty() {
                emit_csv(&r.table, &out.join("time.csv"))?;
                let spec = PlotSpec {
                    title: "Mean wall-clock seconds".into(),
                    x: "N".into(),
                    y: "mean_total_s".into(),
                    series: vec!["method".into()],
                    log_x: true,
                    log_y: true,
                };
                emit_svg_plot(&r.table, &out.join("time.svg"), &spec)?;
            }
            Ok(finish(&r))
        }
        Command::Pgreedy => {
            let r = run_greedy_demo(&cfg)?;
            emit_csv(&r.table, &out.join("pgreedy_summary.csv"))?;
            if let Some((_, trace)) = r.extra.iter().find(|(n, _)| n == "trace") {
                emit_csv(trace, &out.join("pgreedy_trace.csv"))?;
                let spec = PlotSpec {
                    title: "Selected power values".into(),
                    x: "step".into(),
                    y: "sup_power".into(),
                    series: vec!["component".into()],
                    log_x: false,
                    log_y: true,
                };
                emit_svg_plot(trace, &out.join("pgreedy_trace.svg"), &spec)?;
            }
            print!("{}", r.table.to_csv_string()?);
            Ok(finish(&r))
        }
        Command::Interp { kernels, centers, values, eval } => {
            interp(&kernels, &centers, values.as_deref(), eval.as_deref(), &out)?;
            Ok(true)
        }
    }
}

fn finish(r: &Report) -> bool {
    for c in &r.checks {
        if c.passed {
            println!("ok    {}: {}", c.name, c.detail);
        } else {
            println!("FAIL  {}: {}", c.name, c.detail);
            eprintln!("violated: {}: {}", c.name, c.detail);
        }
    }
    r.passed()
}

fn subset(t: &Table, keep: impl Fn(&str) -> bool) -> Table {
    let mut s = Table::new(t.header.clone());
    s.rows = t.rows.iter().filter(|r| keep(&r[0].to_string())).cloned().collect();
    s
}

fn plot(t: &Table, experiment: &str, path: &Path, title: &str, y: &str) -> Result<(), BenchError> {
    let s = subset(t, |e| e == experiment);
    if s.is_empty() {
        return Ok(());
    }
    let spec = PlotSpec { title: title.into(), x: "n".into(), y: y.into(), series: vec!["kernel".into()], log_x: true, log_y: true };
    emit_svg_plot(&s, path, &spec)
}

fn plot_grid(t: &Table, path: &Path, title: &str, y: &str) -> Result<(), BenchError> {
    let s = subset(t, |e| e != "univariate");
    if s.is_empty() {
        return Ok(());
    }
    let spec = PlotSpec {
        title: title.into(),
        x: "n".into(),
        y: y.into(),
        series: vec!["experiment".into(), "kernel".into()],
        log_x: true,
        log_y: true,
    };
    emit_svg_plot(&s, path, &spec)
}

fn open(path: &Path) -> Result<BufReader<File>, BenchError> {
    File::open(path).map(BufReader::new).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

fn interp(specs: &[String], centers: &Path, values: Option<&Path>, eval: Option<&Path>, out: &Path) -> Result<(), BenchError> {
    let comps = specs
        .iter()
        .map(|s| s.parse::<ComponentKernel>().map_err(|e| BenchError::Config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let pk = ProductKernel::new(comps)?;
    let x = read_points_csv(open(centers)?).map_err(|e| BenchError::Io(format!("{}: {e}", centers.display())))?;
    let f: Vec<f64> = match values {
        Some(p) => {
            let t = prodkern_bench::read_csv(p)?;
            if t.header != ["f"] {
                return Err(BenchError::Io(format!("{}: expected a single column `f`", p.display())));
            }
            t.rows
                .iter()
                .map(|r| r[0].as_f64().ok_or_else(|| BenchError::Io(format!("{}: non-numeric value", p.display()))))
                .collect::<Result<_, _>>()?
        }
        None => {
            if x.first().map_or(0, Vec::len) != 2 {
                return Err(BenchError::Config("Franke's function needs two-dimensional centers".into()));
            }
            x.iter().map(|p| franke(p[0], p[1])).collect()
        }
    };
    let s = fit(&pk, &x, &f)?;
    let y = match eval {
        Some(p) => read_points_csv(open(p)?).map_err(|e| BenchError::Io(format!("{}: {e}", p.display())))?,
        None => x.clone(),
    };
    let sy = s.evaluate_many(&y)?;
    let mut buf = Vec::new();
    write_points_csv(&mut buf, &y)?;
    let text = String::from_utf8(buf).map_err(|e| BenchError::Io(e.to_string()))?;
    let mut lines = text.lines();
    let mut csv = format!("{},s\n", lines.next().unwrap_or_default());
    for (line, v) in lines.zip(&sy) {
        csv.push_str(&format!("{line},{v:e}\n"));
    }
    let path = out.join("interp.csv");
    write_file(&path, &csv)?;
    println!("fitted {} centers, wrote {} values to {}", x.len(), sy.len(), path.display());
    Ok(())
}
