//! Exhaustive analog beam-pair selection.

use num_complex::Complex64;

use crate::array::{
    build_analog_precoder, quantize_phases, steering_vector, AnalogWeights, ArrayGeometry, HybridAnalogMatrix,
    SteeringAngles,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};

/// Candidate beams of one array, with their (optionally quantized) weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamCodebook {
    entries: Vec<SteeringAngles>,
    weights: Vec<AnalogWeights>,
    phase_bits: Option<u32>,
}

impl BeamCodebook {
    pub fn new(geom: &ArrayGeometry, entries: Vec<SteeringAngles>, phase_bits: Option<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::config("beam_search", "empty codebook"));
        }
        for (i, a) in entries.iter().enumerate() {
            if entries[..i].contains(a) {
                return Err(Error::config(
                    "beam_search",
                    format!("duplicate codebook entry ({}, {})", a.theta, a.phi),
                ));
            }
        }
        let weights = entries
            .iter()
            .map(|&a| {
                let w = steering_vector(geom, a)?;
                match phase_bits {
                    Some(bits) => quantize_phases(&w, bits),
                    None => Ok(w),
                }
            })
            .collect::<Result<_>>()?;
        Ok(BeamCodebook {
            entries,
            weights,
            phase_bits,
        })
    }

    /// Azimuth grid `start, start + step, ..., ≤ stop` at θ = 90°.
    pub fn azimuth_grid(
        geom: &ArrayGeometry,
        start: f64,
        stop: f64,
        step: f64,
        phase_bits: Option<u32>,
    ) -> Result<Self> {
        if step.is_nan() || step <= 0.0 || start.is_nan() || stop.is_nan() || stop < start {
            return Err(Error::config(
                "beam_search",
                format!("bad grid {start}..{stop} step {step}"),
            ));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        let entries = (0..n)
            .map(|i| SteeringAngles::azimuth(start + i as f64 * step))
            .collect::<Result<_>>()?;
        Self::new(geom, entries, phase_bits)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, i: usize) -> SteeringAngles {
        self.entries[i]
    }

    pub fn weights(&self, i: usize) -> &AnalogWeights {
        &self.weights[i]
    }

    pub fn phase_bits(&self) -> Option<u32> {
        self.phase_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamPair {
    pub tx_index: usize,
    pub rx_index: usize,
    pub tx: SteeringAngles,
    pub rx: SteeringAngles,
    pub tx_weights: AnalogWeights,
    pub rx_weights: AnalogWeights,
    /// Mean over subcarriers of `|w_rx · H[k] · f_tx|²`.
    pub power: f64,
}

impl BeamPair {
    /// Per-subcarrier SNR for unit transmit amplitude per antenna and
    /// per-antenna noise variance `noise_power`.
    pub fn snr(&self, noise_power: f64) -> f64 {
        self.power / (self.rx_weights.len() as f64 * noise_power)
    }
}

/// Mean received power of every `(tx, rx)` pair through sub-array
/// `subarray`, indexed `[tx][rx]`. Uses Parseval on the tap representation.
pub fn pair_powers(
    channel: &ChannelRealization,
    user: usize,
    subarray: usize,
    tx: &BeamCodebook,
    rx: &BeamCodebook,
) -> Result<Vec<Vec<f64>>> {
    if user >= channel.n_users() {
        return Err(Error::Domain(format!("user {user} not in channel")));
    }
    let bs = channel.bs();
    if subarray >= bs.m_rf {
        return Err(Error::Domain(format!("sub-array {subarray} of {}", bs.m_rf)));
    }
    let m_sub = bs.m_sub();
    if tx.weights(0).len() != m_sub || rx.weights(0).len() != channel.n_rx() {
        return Err(Error::Dimension("codebook geometry does not match the channel".into()));
    }
    let cols = subarray * m_sub..(subarray + 1) * m_sub;
    let mut power = vec![vec![0.0; rx.len()]; tx.len()];
    for tap in channel.taps(user) {
        let block = tap.matrix.columns(cols.start, m_sub);
        for (t, row) in power.iter_mut().enumerate() {
            let f = &tx.weights(t).weights;
            let beamformed: Vec<Complex64> = (0..channel.n_rx())
                .map(|n| (0..m_sub).map(|m| block[(n, m)] * f[m]).sum())
                .collect();
            for (r, p) in row.iter_mut().enumerate() {
                let y: Complex64 = rx.weights(r).weights.iter().zip(&beamformed).map(|(w, b)| w * b).sum();
                *p += y.norm_sqr();
            }
        }
    }
    // Σ_k |Σ_d h_d e^{-j2πkd/512}|² = 512 Σ_d |h_d|² for distinct delays,
    // so the per-tap sum already equals the subcarrier mean.
    Ok(power)
}

/// Best pair for `user` through sub-array `subarray`; ties go to the lowest
/// `(tx, rx)` index.
pub fn search_beam_pair_on(
    channel: &ChannelRealization,
    user: usize,
    subarray: usize,
    tx: &BeamCodebook,
    rx: &BeamCodebook,
) -> Result<BeamPair> {
    let power = pair_powers(channel, user, subarray, tx, rx)?;
    let (mut bt, mut br, mut best) = (0, 0, f64::NEG_INFINITY);
    for (t, row) in power.iter().enumerate() {
        for (r, &p) in row.iter().enumerate() {
            if p > best {
                (bt, br, best) = (t, r, p);
            }
        }
    }
    Ok(BeamPair {
        tx_index: bt,
        rx_index: br,
        tx: tx.entry(bt),
        rx: rx.entry(br),
        tx_weights: tx.weights(bt).clone(),
        rx_weights: rx.weights(br).clone(),
        power: best,
    })
}

/// Best pair for `user`, searched on the sub-array that serves it
/// (sub-array `user`).
pub fn search_beam_pair(
    channel: &ChannelRealization,
    user: usize,
    tx: &BeamCodebook,
    rx: &BeamCodebook,
) -> Result<BeamPair> {
    search_beam_pair_on(channel, user, user, tx, rx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalogConfiguration {
    pub f_a: HybridAnalogMatrix,
    pub combiners: Vec<AnalogWeights>,
}

/// Sub-array `u` transmits user `u`'s beam. Sub-arrays without a user keep
/// broadside weights.
pub fn assign_subarrays(pairs: &[BeamPair], m_rf: usize) -> Result<AnalogConfiguration> {
    if pairs.is_empty() {
        return Err(Error::config("users", "no users to serve"));
    }
    if pairs.len() > m_rf {
        return Err(Error::config(
            "users",
            format!("{} users exceed {m_rf} RF chains", pairs.len()),
        ));
    }
    let m_sub = pairs[0].tx_weights.len();
    let mut blocks: Vec<AnalogWeights> = pairs.iter().map(|p| p.tx_weights.clone()).collect();
    blocks.resize(m_rf, AnalogWeights::from_phases(vec![0.0; m_sub]));
    Ok(AnalogConfiguration {
        f_a: build_analog_precoder(blocks)?,
        combiners: pairs.iter().map(|p| p.rx_weights.clone()).collect(),
    })
}
