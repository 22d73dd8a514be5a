//! Experiment harness for `prodkern`: test functions, set ladders,
//! condition number, error and timing studies, and the greedy demo.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::ExperimentConfig;
pub use experiments::{
    franke, make_xj, run_cond_experiment, run_greedy_demo, run_mse_experiment, run_time_experiment, Check, Report,
};
pub use table::{emit_csv, emit_svg_plot, read_csv, PlotSpec, Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] prodkern::Error),
}

impl BenchError {
    /// Process exit code: 2 for usage, configuration and file problems, 3
    /// for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::Io(_) => 2,
            BenchError::Numerical(_) => 3,
        }
    }
}
