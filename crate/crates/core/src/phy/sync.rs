//! Short training field and timing acquisition.
//!
//! The STF repeats `[Ga, Gb]` (128 samples each). The timing metric at
//! candidate start `t` correlates every repetition against its template and
//! sums the complementary outputs coherently.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::golay::{golay_pair, GolayPair, CEF_PAIR_LEN};

pub const STF_REPETITIONS: usize = 8;
pub const STF_LEN: usize = STF_REPETITIONS * 2 * CEF_PAIR_LEN;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncConfig {
    /// Candidate start indices are `0..search_window`.
    pub search_window: usize,
    /// Minimum normalized peak `|C|² / (E · STF_LEN)`; 1 for a noiseless
    /// single-path channel.
    pub threshold: f64,
    /// How far (samples) before the strongest peak to look for an earlier
    /// path. The STF correlation sidelobes stay below -42 dB within 64 lags.
    pub first_path_window: usize,
    /// An earlier index counts as the first path when its correlation power
    /// is at least this fraction of the peak.
    pub first_path_threshold: f64,
}

impl Default for SyncConfig {
    fn default() -> Self {
        SyncConfig {
            search_window: 2048,
            threshold: 0.05,
            first_path_window: 64,
            first_path_threshold: 0.03,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyncResult {
    /// Start of the earliest significant path.
    pub index: usize,
    /// Start of the strongest path.
    pub peak_index: usize,
    pub metric: f64,
}

fn stf_pair() -> GolayPair {
    golay_pair(CEF_PAIR_LEN.trailing_zeros()).expect("valid Golay order")
}

/// Unit-amplitude STF samples.
pub fn stf() -> Vec<Complex64> {
    let pair = stf_pair();
    let (a, b) = (pair.a_complex(), pair.b_complex());
    (0..STF_REPETITIONS).flat_map(|_| a.iter().chain(&b).copied()).collect()
}

/// Locates the STF: the strongest correlation peak over `0..search_window`,
/// then the earliest index shortly before it whose correlation is within
/// `first_path_threshold` of the peak.
pub fn synchronize(rx: &[Complex64], cfg: &SyncConfig) -> Result<SyncResult> {
    if rx.len() < STF_LEN {
        return Err(Error::Framing(format!(
            "capture of {} samples is shorter than the STF",
            rx.len()
        )));
    }
    let last = cfg.search_window.min(rx.len() - STF_LEN + 1);
    if last == 0 {
        return Err(Error::Domain("empty synchronization search window".into()));
    }
    let template: Vec<f64> = {
        let pair = stf_pair();
        pair.a.iter().chain(&pair.b).map(|&x| x as f64).collect()
    };
    let period = template.len();

    // Window energy via prefix sums.
    let mut energy = vec![0.0; rx.len() + 1];
    for (i, z) in rx.iter().enumerate() {
        energy[i + 1] = energy[i] + z.norm_sqr();
    }

    let mut power = Vec::with_capacity(last);
    for t in 0..last {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..STF_REPETITIONS {
            let seg = &rx[t + r * period..t + (r + 1) * period];
            for (y, &c) in seg.iter().zip(&template) {
                acc += y * c;
            }
        }
        power.push(acc.norm_sqr());
    }
    let mut peak_index = 0;
    for (t, &p) in power.iter().enumerate() {
        if p > power[peak_index] {
            peak_index = t;
        }
    }
    let peak = power[peak_index];
    let e = energy[peak_index + STF_LEN] - energy[peak_index];
    let metric = if e > 0.0 { peak / (e * STF_LEN as f64) } else { 0.0 };
    if metric.is_nan() || metric < cfg.threshold {
        return Err(Error::FrameNotFound {
            metric,
            threshold: cfg.threshold,
        });
    }
    let from = peak_index.saturating_sub(cfg.first_path_window);
    let index = (from..peak_index)
        .find(|&t| power[t] >= cfg.first_path_threshold * peak)
        .unwrap_or(peak_index);
    Ok(SyncResult {
        index,
        peak_index,
        metric,
    })
}
