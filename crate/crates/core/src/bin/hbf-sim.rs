use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mmwave_hbf::sim::{
    calibrate, capture_frame, emit_report, fmt_g9, run, sweep_gamma, sweep_noise, write_goldens, PrecoderMode,
    RunReport, Scenario,
};

#[derive(Parser)]
#[command(name = "hbf-sim", about = "Multi-user hybrid beamforming link simulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the number of frames per point.
    #[arg(long)]
    frames: Option<usize>,
    /// Precoder modes to run (repeatable or comma separated).
    #[arg(long, value_delimiter = ',')]
    mode: Vec<PrecoderMode>,
}

impl Common {
    fn scenario(&self) -> mmwave_hbf::Result<Scenario> {
        let mut s = Scenario::load(&self.config)?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(frames) = self.frames {
            s.frames = frames;
        }
        if !self.mode.is_empty() {
            s.modes = self.mode.clone();
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    /// Noise power per receive antenna.
    Noise,
    /// RZF regularization.
    Gamma,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the scenario once and writes the report.
    Run(Common),
    /// Finds the noise power at which analog-only EVM reaches a target.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Target mean analog-only EVM in dB.
        #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
        target_evm_db: f64,
        #[arg(long, default_value_t = 0.1)]
        tolerance_db: f64,
    },
    /// Runs one point per value of a swept parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "noise")]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Writes frame-0 fixtures (samples, LLRs, decoded bits) for the first
    /// configured mode.
    Goldens(Common),
}

fn summarize(report: &RunReport) {
    for p in &report.points {
        for m in &p.modes {
            for u in &m.users {
                let x = u.metrics.metrics();
                println!(
                    "noise={} mode={} user={} ber={} per={} evm_db={}",
                    fmt_g9(p.noise_power),
                    m.mode,
                    u.user,
                    fmt_g9(x.ber),
                    fmt_g9(x.per),
                    fmt_g9(x.evm_db)
                );
            }
        }
    }
}

fn execute(cli: Cli) -> mmwave_hbf::Result<()> {
    let started = Instant::now();
    match cli.command {
        Command::Goldens(c) => {
            let s = c.scenario()?;
            let capture = capture_frame(&s, s.modes[0])?;
            for (u, (sent, got)) in capture.sent.iter().zip(&capture.decoded).enumerate() {
                let errors = sent.iter().zip(got).filter(|(a, b)| a != b).count();
                println!("user={u} bits={} errors={errors}", sent.len());
            }
            for path in write_goldens(&capture, &s, &c.out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Run(c) => {
            let report = run(&c.scenario()?)?;
            summarize(&report);
            for path in emit_report(&report, &c.out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::Calibrate {
            common,
            target_evm_db,
            tolerance_db,
        } => {
            let cal = calibrate(&common.scenario()?, target_evm_db, tolerance_db)?;
            let evms: Vec<String> = cal.evm_db.iter().map(|e| fmt_g9(*e)).collect();
            println!(
                "noise_power={} analog_evm_db=[{}] iterations={}",
                fmt_g9(cal.noise_power),
                evms.join(", "),
                cal.iterations
            );
        }
        Command::Sweep { common, param, values } => {
            let s = common.scenario()?;
            let report = match param {
                SweepParam::Noise => sweep_noise(&s, &values)?,
                SweepParam::Gamma => sweep_gamma(&s, &values)?,
            };
            summarize(&report);
            for path in emit_report(&report, &common.out)? {
                println!("wrote {}", path.display());
            }
        }
    }
    eprintln!("elapsed {:.1} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
