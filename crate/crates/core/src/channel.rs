//! Geometric ray channel, front-end impairments, waveform propagation and the
//! reduced (post analog beamforming) channel.
//!
//! A realization is stored as a sparse list of time-domain taps per user, each
//! an `N × M` matrix at an integer sample delay. The per-subcarrier responses
//! `H^u[k]` are the 512-point DFT of those taps, so the block model
//! `Y[k] = H[k]·X[k]` holds exactly for cyclic-prefixed blocks as long as every
//! tap delay is below the prefix length.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::array::{array_response, AnalogWeights, ArrayGeometry, HybridAnalogMatrix, SteeringAngles};
use crate::block::{taps_to_response, CP_LEN, FFT_SIZE};
use crate::error::{Error, Result};

/// One propagation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    /// Departure direction at the base station.
    pub aod: SteeringAngles,
    /// Arrival direction at the user.
    pub aoa: SteeringAngles,
    pub gain: Complex64,
    /// Delay in samples at the 1.76 GS/s symbol rate.
    pub delay: usize,
}

impl Ray {
    pub fn validate(&self) -> Result<()> {
        self.aod.validate()?;
        self.aoa.validate()?;
        if self.delay >= CP_LEN {
            return Err(Error::config(
                "delay",
                format!("ray delay {} not below the cyclic prefix ({CP_LEN})", self.delay),
            ));
        }
        if !(self.gain.norm() > 0.0 && self.gain.norm().is_finite()) {
            return Err(Error::config("gain", "ray gain must be finite and nonzero"));
        }
        Ok(())
    }
}

/// Base-station antenna layout: `m_rf` identical sub-array boards placed side
/// by side along y, `separation` wavelengths apart (board origin to origin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsLayout {
    pub subarray: ArrayGeometry,
    pub m_rf: usize,
    pub separation: f64,
}

impl BsLayout {
    /// Two 2×8 boards ten wavelengths apart.
    pub fn paper_default() -> Self {
        BsLayout {
            subarray: ArrayGeometry {
                m_y: 8,
                m_z: 2,
                spacing: 0.5,
            },
            m_rf: 2,
            separation: 10.0,
        }
    }

    pub fn m_sub(&self) -> usize {
        self.subarray.len()
    }

    pub fn m(&self) -> usize {
        self.m_rf * self.m_sub()
    }

    pub fn validate(&self) -> Result<()> {
        self.subarray.validate()?;
        if self.m_rf == 0 {
            return Err(Error::config("bs.subarrays", "need at least one sub-array"));
        }
        let extent = self.subarray.m_y as f64 * self.subarray.spacing;
        if self.m_rf > 1 && self.separation < extent {
            return Err(Error::config(
                "bs.separation",
                format!(
                    "boards of extent {extent} wavelengths overlap at separation {}",
                    self.separation
                ),
            ));
        }
        Ok(())
    }

    /// Full-array response towards `dir`, including the inter-board phase.
    pub fn response(&self, dir: SteeringAngles) -> Result<Vec<Complex64>> {
        let sub = array_response(&self.subarray, dir)?;
        let (theta, phi) = (dir.theta.to_radians(), dir.phi.to_radians());
        let step = 2.0 * PI * self.separation * theta.sin() * phi.sin();
        Ok((0..self.m_rf)
            .flat_map(|i| {
                let offset = Complex64::cis(step * i as f64);
                sub.iter().map(move |a| a * offset)
            })
            .collect())
    }
}

/// Randomized scatterers added on top of a user's fixed rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticRays {
    pub count: usize,
    /// Path gain range in dB relative to a unit line-of-sight path.
    pub gain_db: [f64; 2],
    pub delay: [usize; 2],
    pub aod_phi: [f64; 2],
    pub aoa_phi: [f64; 2],
}

impl StochasticRays {
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<Ray>> {
        let uniform = |rng: &mut dyn rand::RngCore, r: [f64; 2]| {
            if r[1] > r[0] {
                rng.random_range(r[0]..=r[1])
            } else {
                r[0]
            }
        };
        (0..self.count)
            .map(|_| {
                let gain_db = uniform(rng, self.gain_db);
                let phase = rng.random_range(0.0..2.0 * PI);
                let delay = if self.delay[1] > self.delay[0] {
                    rng.random_range(self.delay[0]..=self.delay[1])
                } else {
                    self.delay[0]
                };
                let ray = Ray {
                    aod: SteeringAngles::azimuth(uniform(rng, self.aod_phi))?,
                    aoa: SteeringAngles::azimuth(uniform(rng, self.aoa_phi))?,
                    gain: Complex64::from_polar(10f64.powf(gain_db / 20.0), phase),
                    delay,
                };
                ray.validate()?;
                Ok(ray)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct UserPropagation {
    pub rays: Vec<Ray>,
    pub scatterers: Option<StochasticRays>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub bs: BsLayout,
    pub ue: ArrayGeometry,
    pub users: Vec<UserPropagation>,
}

/// Time-domain tap: `N × M` matrix at an integer delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Tap {
    pub delay: usize,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
struct UserChannel {
    taps: Vec<Tap>,
    response: Vec<DMatrix<Complex64>>,
}

impl UserChannel {
    fn from_taps(mut taps: Vec<Tap>) -> Self {
        taps.sort_by_key(|t| t.delay);
        let (n, m) = taps[0].matrix.shape();
        let mut response = vec![DMatrix::zeros(n, m); FFT_SIZE];
        for tap in &taps {
            for (k, h) in response.iter_mut().enumerate() {
                let phase = Complex64::cis(-2.0 * PI * ((k * tap.delay) % FFT_SIZE) as f64 / FFT_SIZE as f64);
                h.zip_apply(&tap.matrix, |acc, t| *acc += t * phase);
            }
        }
        UserChannel { taps, response }
    }
}

/// Per-user, per-subcarrier MIMO channel `H^u[k]` (`N × M`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    users: Vec<UserChannel>,
    bs: BsLayout,
    rng_seed: u64,
}

fn merge_taps(taps: impl IntoIterator<Item = Tap>) -> Vec<Tap> {
    let mut merged: Vec<Tap> = Vec::new();
    for tap in taps {
        match merged.iter_mut().find(|t| t.delay == tap.delay) {
            Some(t) => t.matrix += tap.matrix,
            None => merged.push(tap),
        }
    }
    merged.sort_by_key(|t| t.delay);
    merged
}

/// Builds the channel of every user from its ray list (plus sampled
/// scatterers, drawn from `rng_seed`).
pub fn generate_channel(scenario: &ChannelScenario, rng_seed: u64) -> Result<ChannelRealization> {
    scenario.bs.validate()?;
    scenario.ue.validate()?;
    if scenario.users.is_empty() {
        return Err(Error::config("users", "scenario has no users"));
    }
    let mut users = Vec::with_capacity(scenario.users.len());
    for (u, prop) in scenario.users.iter().enumerate() {
        let mut rays = prop.rays.clone();
        if let Some(spec) = &prop.scatterers {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(u as u64);
            rays.extend(spec.sample(&mut rng)?);
        }
        if rays.is_empty() {
            return Err(Error::config(
                format!("users[{u}].rays"),
                "user has no propagation paths",
            ));
        }
        let mut taps = Vec::with_capacity(rays.len());
        for (r, ray) in rays.iter().enumerate() {
            ray.validate().map_err(|e| match e {
                Error::Config { path, message } => Error::config(format!("users[{u}].rays[{r}].{path}"), message),
                other => other,
            })?;
            let a_rx = array_response(&scenario.ue, ray.aoa)?;
            let a_tx = scenario.bs.response(ray.aod)?;
            let matrix = DMatrix::from_fn(a_rx.len(), a_tx.len(), |n, m| ray.gain * a_rx[n] * a_tx[m]);
            taps.push(Tap {
                delay: ray.delay,
                matrix,
            });
        }
        users.push(UserChannel::from_taps(merge_taps(taps)));
    }
    Ok(ChannelRealization {
        users,
        bs: scenario.bs,
        rng_seed,
    })
}

impl ChannelRealization {
    /// Builds a realization directly from per-user taps.
    pub fn from_taps(bs: BsLayout, per_user: Vec<Vec<Tap>>, rng_seed: u64) -> Result<Self> {
        if per_user.is_empty() || per_user.iter().any(|t| t.is_empty()) {
            return Err(Error::Dimension("every user needs at least one tap".into()));
        }
        let n = per_user[0][0].matrix.nrows();
        for taps in &per_user {
            for tap in taps {
                if tap.matrix.shape() != (n, bs.m()) {
                    return Err(Error::Dimension(format!(
                        "tap of shape {:?}, expected ({n}, {})",
                        tap.matrix.shape(),
                        bs.m()
                    )));
                }
                if tap.delay >= CP_LEN {
                    return Err(Error::config("delay", format!("tap delay {} >= {CP_LEN}", tap.delay)));
                }
            }
        }
        Ok(ChannelRealization {
            users: per_user
                .into_iter()
                .map(|t| UserChannel::from_taps(merge_taps(t)))
                .collect(),
            bs,
            rng_seed,
        })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn n_rx(&self) -> usize {
        self.users[0].taps[0].matrix.nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.bs.m()
    }

    pub fn n_subcarriers(&self) -> usize {
        FFT_SIZE
    }

    pub fn bs(&self) -> &BsLayout {
        &self.bs
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn taps(&self, user: usize) -> &[Tap] {
        &self.users[user].taps
    }

    /// `H^u[k]`.
    pub fn response(&self, user: usize, k: usize) -> &DMatrix<Complex64> {
        &self.users[user].response[k]
    }

    pub fn max_delay(&self) -> usize {
        self.users
            .iter()
            .flat_map(|u| u.taps.iter().map(|t| t.delay))
            .max()
            .unwrap_or(0)
    }

    /// SHA-256 over every tap delay and coefficient; identifies a realization.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for user in &self.users {
            for tap in &user.taps {
                hasher.update((tap.delay as u64).to_le_bytes());
                for z in tap.matrix.iter() {
                    hasher.update(z.re.to_le_bytes());
                    hasher.update(z.im.to_le_bytes());
                }
            }
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentProfile {
    /// Band-edge attenuation relative to band center, dB.
    pub edge_rolloff_db: f64,
    /// Gain offset per RF chain, dB.
    pub chain_power_imbalance_db: Vec<f64>,
    /// Per-sample complex noise variance at each receive antenna.
    #[serde(default)]
    pub noise_power: f64,
}

impl ImpairmentProfile {
    pub fn identity(m_rf: usize) -> Self {
        ImpairmentProfile {
            edge_rolloff_db: 0.0,
            chain_power_imbalance_db: vec![0.0; m_rf],
            noise_power: 0.0,
        }
    }

    /// Coefficients `(center, side)` of the raised-cosine rolloff
    /// `g(f) = center + side·cos(2πf)`.
    fn rolloff_coefficients(&self) -> (f64, f64) {
        let edge = 10f64.powf(-self.edge_rolloff_db / 20.0);
        ((1.0 + edge) / 2.0, (1.0 - edge) / 2.0)
    }

    /// Magnitude of the front-end response on subcarrier `k` (natural FFT
    /// order: `k = 0` is band center, `k = 256` the band edge).
    pub fn rolloff_gain(&self, k: usize) -> f64 {
        let (center, side) = self.rolloff_coefficients();
        center + side * (2.0 * PI * k as f64 / FFT_SIZE as f64).cos()
    }

    /// Extra delay introduced by the causal rolloff filter.
    pub fn filter_delay(&self) -> usize {
        if self.edge_rolloff_db > 0.0 {
            1
        } else {
            0
        }
    }
}

/// Applies the band-edge rolloff and per-chain gain offsets.
///
/// The rolloff is realized as the symmetric FIR `[s/2, c, s/2]`, whose
/// magnitude response is exactly `c + s·cos(2πk/512)`; it adds one sample of
/// group delay to every path.
pub fn apply_impairments(h: &ChannelRealization, imp: &ImpairmentProfile) -> Result<ChannelRealization> {
    if !(imp.edge_rolloff_db >= 0.0 && imp.edge_rolloff_db.is_finite()) {
        return Err(Error::config(
            "impairments.edge_rolloff_db",
            "rolloff must be finite and >= 0",
        ));
    }
    if imp.chain_power_imbalance_db.len() != h.bs.m_rf {
        return Err(Error::config(
            "impairments.chain_power_imbalance_db",
            format!(
                "{} entries for {} RF chains",
                imp.chain_power_imbalance_db.len(),
                h.bs.m_rf
            ),
        ));
    }
    let m_sub = h.bs.m_sub();
    let chain_gain: Vec<f64> = imp
        .chain_power_imbalance_db
        .iter()
        .map(|db| 10f64.powf(db / 20.0))
        .collect();
    let fir: Vec<(usize, f64)> = if imp.edge_rolloff_db > 0.0 {
        let (c, s) = imp.rolloff_coefficients();
        vec![(0, s / 2.0), (1, c), (2, s / 2.0)]
    } else {
        vec![(0, 1.0)]
    };

    let mut per_user = Vec::with_capacity(h.users.len());
    for user in &h.users {
        let mut taps = Vec::with_capacity(user.taps.len() * fir.len());
        for tap in &user.taps {
            let mut scaled = tap.matrix.clone();
            for (col, mut column) in scaled.column_iter_mut().enumerate() {
                column *= Complex64::new(chain_gain[col / m_sub], 0.0);
            }
            for &(d, coeff) in &fir {
                taps.push(Tap {
                    delay: tap.delay + d,
                    matrix: &scaled * Complex64::new(coeff, 0.0),
                });
            }
        }
        per_user.push(taps);
    }
    ChannelRealization::from_taps(h.bs, per_user, h.rng_seed)
}

/// Propagates per-antenna streams through every user's channel and adds
/// circularly-symmetric white noise of variance `noise_power` per receive
/// antenna. Output is indexed `[user][rx antenna][sample]` and has the
/// input length (callers pad with trailing zeros to keep the channel tail).
pub fn transmit(
    x_time: &[Vec<Complex64>],
    h: &ChannelRealization,
    noise_power: f64,
    rng_seed: u64,
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    if x_time.len() != h.n_tx() {
        return Err(Error::Dimension(format!(
            "{} transmit streams for {} antennas",
            x_time.len(),
            h.n_tx()
        )));
    }
    let len = x_time[0].len();
    if x_time.iter().any(|s| s.len() != len) {
        return Err(Error::Dimension("transmit streams differ in length".into()));
    }
    if noise_power.is_nan() || noise_power < 0.0 {
        return Err(Error::Domain(format!("noise power {noise_power}")));
    }
    let sigma = (noise_power / 2.0).sqrt();

    let mut out = Vec::with_capacity(h.n_users());
    for (u, user) in h.users.iter().enumerate() {
        let n_rx = user.taps[0].matrix.nrows();
        let mut y = vec![vec![Complex64::new(0.0, 0.0); len]; n_rx];
        for tap in &user.taps {
            if tap.delay >= len {
                continue;
            }
            for (r, yr) in y.iter_mut().enumerate() {
                for (a, xa) in x_time.iter().enumerate() {
                    let coeff = tap.matrix[(r, a)];
                    if coeff == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (yt, xt) in yr[tap.delay..].iter_mut().zip(xa) {
                        *yt += coeff * xt;
                    }
                }
            }
        }
        if noise_power > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(u as u64);
            for yr in y.iter_mut() {
                for yt in yr.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *yt += Complex64::new(re * sigma, im * sigma);
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Effective `K × M_RF` channel seen by the digital precoder on every
/// subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChannel {
    per_subcarrier: Vec<DMatrix<Complex64>>,
}

impl ReducedChannel {
    pub fn new(per_subcarrier: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if per_subcarrier.len() != FFT_SIZE {
            return Err(Error::Dimension(format!(
                "{} subcarriers, expected {FFT_SIZE}",
                per_subcarrier.len()
            )));
        }
        let shape = per_subcarrier[0].shape();
        if shape.0 == 0 || shape.1 == 0 || per_subcarrier.iter().any(|m| m.shape() != shape) {
            return Err(Error::Dimension("inconsistent reduced channel shapes".into()));
        }
        Ok(ReducedChannel { per_subcarrier })
    }

    pub fn n_users(&self) -> usize {
        self.per_subcarrier[0].nrows()
    }

    pub fn m_rf(&self) -> usize {
        self.per_subcarrier[0].ncols()
    }

    pub fn at(&self, k: usize) -> &DMatrix<Complex64> {
        &self.per_subcarrier[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &DMatrix<Complex64>> {
        self.per_subcarrier.iter()
    }

    /// Entry `(user, chain)` across all subcarriers.
    pub fn trace(&self, user: usize, chain: usize) -> Vec<Complex64> {
        self.per_subcarrier.iter().map(|m| m[(user, chain)]).collect()
    }
}

/// `H̃[k]` row `u` = `w_A^u · H^u[k] · F_A`.
pub fn reduce_channel(
    h: &ChannelRealization,
    f_a: &HybridAnalogMatrix,
    combiners: &[AnalogWeights],
) -> Result<ReducedChannel> {
    if combiners.len() != h.n_users() {
        return Err(Error::Dimension(format!(
            "{} combiners for {} users",
            combiners.len(),
            h.n_users()
        )));
    }
    if f_a.m() != h.n_tx() {
        return Err(Error::Dimension(format!(
            "analog precoder spans {} antennas, channel has {}",
            f_a.m(),
            h.n_tx()
        )));
    }
    let dense = f_a.to_dense();
    let mut rows: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(h.n_users());
    for (u, w) in combiners.iter().enumerate() {
        if w.len() != h.n_rx() {
            return Err(Error::Dimension(format!(
                "combiner {u} has {} weights for {} receive antennas",
                w.len(),
                h.n_rx()
            )));
        }
        let w_row = DMatrix::from_row_slice(1, w.len(), &w.weights);
        let mut per_chain = Vec::with_capacity(f_a.m_rf());
        let reduced_taps: Vec<(usize, DMatrix<Complex64>)> = h.users[u]
            .taps
            .iter()
            .map(|t| (t.delay, &w_row * &t.matrix * &dense))
            .collect();
        for i in 0..f_a.m_rf() {
            let taps: Vec<(usize, Complex64)> = reduced_taps.iter().map(|(d, m)| (*d, m[(0, i)])).collect();
            per_chain.push(taps_to_response(&taps, FFT_SIZE));
        }
        rows.push(per_chain);
    }
    let per_subcarrier = (0..FFT_SIZE)
        .map(|k| DMatrix::from_fn(rows.len(), f_a.m_rf(), |u, i| rows[u][i][k]))
        .collect();
    ReducedChannel::new(per_subcarrier)
}

/// Time-domain taps of one user's combined channel `w_A^u · H^u · F_A`:
/// `(delay, per-chain coefficients)`.
pub type CombinedTaps = Vec<(usize, Vec<Complex64>)>;

/// Per-user taps of the channel seen from the RF-chain inputs to the
/// combiner output; their DFT is the reduced channel.
pub fn combined_taps(
    h: &ChannelRealization,
    f_a: &HybridAnalogMatrix,
    combiners: &[AnalogWeights],
) -> Result<Vec<CombinedTaps>> {
    if combiners.len() != h.n_users() || f_a.m() != h.n_tx() {
        return Err(Error::Dimension(format!(
            "{} combiners / {} analog rows for {} users / {} antennas",
            combiners.len(),
            f_a.m(),
            h.n_users(),
            h.n_tx()
        )));
    }
    let dense = f_a.to_dense();
    h.users
        .iter()
        .zip(combiners)
        .map(|(user, w)| {
            if w.len() != h.n_rx() {
                return Err(Error::Dimension(format!(
                    "combiner of {} weights for {} antennas",
                    w.len(),
                    h.n_rx()
                )));
            }
            let w_row = DMatrix::from_row_slice(1, w.len(), &w.weights);
            Ok(user
                .taps
                .iter()
                .map(|t| (t.delay, (&w_row * &t.matrix * &dense).iter().copied().collect()))
                .collect())
        })
        .collect()
}

/// Propagates RF-chain signals through every user's combined channel and
/// adds white noise of variance `noise_var[u]` at combiner output `u`.
/// Equivalent in distribution to [`transmit`] followed by combining with
/// unit-modulus weights when `noise_var[u] = N·noise_power`.
pub fn transmit_combined(
    z: &[Vec<Complex64>],
    taps: &[CombinedTaps],
    noise_var: &[f64],
    rng_seed: u64,
) -> Result<Vec<Vec<Complex64>>> {
    if noise_var.len() != taps.len() {
        return Err(Error::Dimension("one noise variance per user required".into()));
    }
    let len = z.first().map(Vec::len).unwrap_or(0);
    if z.iter().any(|s| s.len() != len) {
        return Err(Error::Dimension("chain streams differ in length".into()));
    }
    let mut out = Vec::with_capacity(taps.len());
    for (u, (user_taps, &var)) in taps.iter().zip(noise_var).enumerate() {
        if !(var >= 0.0 && var.is_finite()) {
            return Err(Error::Domain(format!("noise variance {var}")));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); len];
        for (delay, coeffs) in user_taps {
            if coeffs.len() != z.len() {
                return Err(Error::Dimension(format!(
                    "{} tap coefficients for {} chains",
                    coeffs.len(),
                    z.len()
                )));
            }
            if *delay >= len {
                continue;
            }
            for (c, zc) in coeffs.iter().zip(z) {
                for (yt, xt) in y[*delay..].iter_mut().zip(zc) {
                    *yt += c * xt;
                }
            }
        }
        if var > 0.0 {
            let sigma = (var / 2.0).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(u as u64);
            for yt in y.iter_mut() {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                *yt += Complex64::new(re * sigma, im * sigma);
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Combiner output `Σ_n w[n]·y[n]` of one user's per-antenna streams.
pub fn combine(rx: &[Vec<Complex64>], w: &AnalogWeights) -> Result<Vec<Complex64>> {
    if rx.len() != w.len() || rx.is_empty() {
        return Err(Error::Dimension(format!(
            "{} streams for {} combiner weights",
            rx.len(),
            w.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); rx[0].len()];
    for (stream, wn) in rx.iter().zip(&w.weights) {
        for (o, y) in out.iter_mut().zip(stream) {
            *o += wn * y;
        }
    }
    Ok(out)
}
