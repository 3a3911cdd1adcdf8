//! Report artifacts: metrics.csv, channel_trace.csv, constellation.csv and
//! config.echo.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::runner::RunReport;

pub const METRICS_FILE: &str = "metrics.csv";
pub const TRACE_FILE: &str = "channel_trace.csv";
pub const CONSTELLATION_FILE: &str = "constellation.csv";
pub const ECHO_FILE: &str = "config.echo";

/// `printf("%.9g")`: 9 significant digits, trailing zeros dropped,
/// exponent form outside `[1e-4, 1e9)`.
pub fn fmt_g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Serialize)]
struct MetricsRow<'a> {
    user: usize,
    mode: &'a str,
    noise_power: String,
    gamma: String,
    ber: String,
    per: String,
    evm_db: String,
    raw_ber: String,
    frames: u64,
    frame_errors: u64,
    per_ci_low: String,
    per_ci_high: String,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    noise_power: String,
    mode: &'a str,
    user: usize,
    subcarrier: usize,
    nonprecoded_mag: String,
    precoded_mag: String,
}

#[derive(Serialize)]
struct ConstellationRow<'a> {
    i: String,
    q: String,
    user: usize,
    mode: &'a str,
    noise_power: String,
}

const METRICS_HEADER: [&str; 12] = [
    "user",
    "mode",
    "noise_power",
    "gamma",
    "ber",
    "per",
    "evm_db",
    "raw_ber",
    "frames",
    "frame_errors",
    "per_ci_low",
    "per_ci_high",
];
const TRACE_HEADER: [&str; 6] = [
    "noise_power",
    "mode",
    "user",
    "subcarrier",
    "nonprecoded_mag",
    "precoded_mag",
];
const CONSTELLATION_HEADER: [&str; 5] = ["I", "Q", "user", "mode", "noise_power"];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(path, e),
        other => Error::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Text of config.echo: the scenario as TOML followed by the seed and the
/// channel checksum of every mode and point.
pub fn config_echo(report: &RunReport) -> String {
    let mut out = report.scenario.to_toml();
    out.push_str("\n# seed = ");
    out.push_str(&report.scenario.seed.to_string());
    out.push('\n');
    for (i, (tx, rx)) in report.beams.iter().enumerate() {
        out.push_str(&format!(
            "# beams user {i}: tx phi = {}, rx phi = {}\n",
            fmt_g9(tx.phi),
            fmt_g9(rx.phi)
        ));
    }
    for p in &report.points {
        for m in &p.modes {
            out.push_str(&format!(
                "# noise_power = {} mode = {} channel_checksum = {}\n",
                fmt_g9(p.noise_power),
                m.mode,
                m.channel_checksum
            ));
        }
    }
    out
}

/// Writes the four report files into `out_dir` (created if missing) and
/// returns their paths.
pub fn emit_report(report: &RunReport, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let metrics_path = dir.join(METRICS_FILE);
    let rows = report.points.iter().flat_map(|p| {
        p.modes.iter().flat_map(move |m| {
            m.users.iter().map(move |u| {
                let metrics = u.metrics.metrics();
                let (lo, hi) = u.metrics.per_interval();
                MetricsRow {
                    user: u.user,
                    mode: m.mode.name(),
                    noise_power: fmt_g9(p.noise_power),
                    gamma: fmt_g9(m.gamma),
                    ber: fmt_g9(metrics.ber),
                    per: fmt_g9(metrics.per),
                    evm_db: fmt_g9(metrics.evm_db),
                    raw_ber: fmt_g9(u.metrics.raw_ber()),
                    frames: u.metrics.frames,
                    frame_errors: u.metrics.frame_errors,
                    per_ci_low: fmt_g9(lo),
                    per_ci_high: fmt_g9(hi),
                }
            })
        })
    });
    write_csv(&metrics_path, &METRICS_HEADER, rows)?;

    let trace_path = dir.join(TRACE_FILE);
    let rows = report.points.iter().flat_map(|p| {
        p.modes.iter().flat_map(move |m| {
            m.users.iter().flat_map(move |u| {
                u.trace_nonprecoded
                    .iter()
                    .zip(&u.trace_precoded)
                    .enumerate()
                    .map(move |(k, (a, b))| TraceRow {
                        noise_power: fmt_g9(p.noise_power),
                        mode: m.mode.name(),
                        user: u.user,
                        subcarrier: k,
                        nonprecoded_mag: fmt_g9(*a),
                        precoded_mag: fmt_g9(*b),
                    })
            })
        })
    });
    write_csv(&trace_path, &TRACE_HEADER, rows)?;

    let const_path = dir.join(CONSTELLATION_FILE);
    let rows = report.points.iter().flat_map(|p| {
        p.modes.iter().flat_map(move |m| {
            m.users.iter().flat_map(move |u| {
                u.constellation.iter().map(move |z| ConstellationRow {
                    i: fmt_g9(z.re),
                    q: fmt_g9(z.im),
                    user: u.user,
                    mode: m.mode.name(),
                    noise_power: fmt_g9(p.noise_power),
                })
            })
        })
    });
    write_csv(&const_path, &CONSTELLATION_HEADER, rows)?;

    let echo_path = dir.join(ECHO_FILE);
    fs::write(&echo_path, config_echo(report)).map_err(io_err(&echo_path))?;
    Ok(vec![metrics_path, trace_path, const_path, echo_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        // Reference strings from C printf("%.9g").
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-4.6812345678, "-4.68123457"),
            (999999999.5, "1e+09"),
            (2.5e-300, "2.5e-300"),
        ];
        for (x, s) in cases {
            assert_eq!(fmt_g9(x), s, "{x}");
        }
    }
}
