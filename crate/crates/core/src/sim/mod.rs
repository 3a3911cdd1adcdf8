//! Scenario files, the Monte Carlo runner and report output.

pub mod goldens;
pub mod report;
pub mod runner;
pub mod scenario;

pub use goldens::{capture_frame, write_goldens, FrameCapture};
pub use report::{emit_report, fmt_g9};
pub use runner::{
    calibrate, design_precoder, run, run_with, sweep_gamma, sweep_noise, Calibration, Link, ModeReport, PointReport,
    RunOptions, RunReport, UserReport,
};
pub use scenario::{CsiSource, PrecoderMode, Scenario};
