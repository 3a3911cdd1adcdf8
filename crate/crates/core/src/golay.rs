//! Golay complementary pairs, the time-orthogonal multi-sub-array channel
//! estimation field, and correlation-based channel estimation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::block::{taps_to_response, FFT_SIZE};
use crate::channel::ReducedChannel;
use crate::error::{Error, Result};

/// Length of the training sequences in the channel estimation field.
pub const CEF_PAIR_LEN: usize = 128;

/// Two ±1 sequences whose aperiodic autocorrelations sum to `2L·δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolayPair {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

/// Complementary pair of length `2^n` by recursive doubling
/// (`a' = [a, b]`, `b' = [a, -b]`) from the trivial pair `([1], [1])`.
pub fn golay_pair(n: u32) -> Result<GolayPair> {
    if !(1..=10).contains(&n) {
        return Err(Error::Domain(format!("Golay order {n} outside 1..=10")));
    }
    let (mut a, mut b) = (vec![1i8], vec![1i8]);
    for _ in 0..n {
        let next_a = a.iter().chain(&b).copied().collect();
        let next_b = a.iter().copied().chain(b.iter().map(|x| -x)).collect();
        a = next_a;
        b = next_b;
    }
    Ok(GolayPair { a, b })
}

impl GolayPair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn a_complex(&self) -> Vec<Complex64> {
        self.a.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect()
    }

    pub fn b_complex(&self) -> Vec<Complex64> {
        self.b.iter().map(|&x| Complex64::new(x as f64, 0.0)).collect()
    }
}

/// Aperiodic autocorrelation at `lag` in integer arithmetic.
pub fn autocorrelation(x: &[i8], lag: usize) -> i64 {
    x.iter()
        .zip(x.iter().skip(lag))
        .map(|(&p, &q)| p as i64 * q as i64)
        .sum()
}

/// Non-precoded channel estimation field. Sub-array `i` is the only one
/// active in slot `i`; each slot is `[Ga, Ga, Gb, Gb]`, the first copy of
/// each sequence acting as its cyclic guard.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingField {
    pair: GolayPair,
    m_rf: usize,
    /// Per-RF-chain baseband signals (before analog weights), each of
    /// length `m_rf · slot_len`.
    per_subarray: Vec<Vec<Complex64>>,
    /// Transmit amplitude applied per antenna; the estimator divides it out.
    pub amplitude: f64,
}

pub fn build_cef(m_rf: usize, pair_length: usize) -> Result<TrainingField> {
    if m_rf == 0 {
        return Err(Error::Domain("training field needs at least one sub-array".into()));
    }
    if !pair_length.is_power_of_two() || pair_length < 2 {
        return Err(Error::Domain(format!(
            "pair length {pair_length} is not a power of two"
        )));
    }
    let pair = golay_pair(pair_length.trailing_zeros())?;
    let slot_len = 4 * pair_length;
    let slot: Vec<Complex64> = [pair.a_complex(), pair.a_complex(), pair.b_complex(), pair.b_complex()].concat();
    let per_subarray = (0..m_rf)
        .map(|i| {
            let mut s = vec![Complex64::new(0.0, 0.0); m_rf * slot_len];
            s[i * slot_len..(i + 1) * slot_len].copy_from_slice(&slot);
            s
        })
        .collect();
    Ok(TrainingField {
        pair,
        m_rf,
        per_subarray,
        amplitude: 1.0,
    })
}

impl TrainingField {
    pub fn m_rf(&self) -> usize {
        self.m_rf
    }

    pub fn pair(&self) -> &GolayPair {
        &self.pair
    }

    pub fn slot_len(&self) -> usize {
        4 * self.pair.len()
    }

    pub fn len(&self) -> usize {
        self.m_rf * self.slot_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signal(&self, chain: usize) -> &[Complex64] {
        &self.per_subarray[chain]
    }

    /// Time-domain taps (`pair length` of them) of the channel from
    /// sub-array `chain`, estimated from one user's received field.
    pub fn estimate_taps(&self, rx: &[Complex64], chain: usize) -> Result<Vec<Complex64>> {
        if rx.len() < self.len() {
            return Err(Error::Framing(format!(
                "received training of {} samples, field needs {}",
                rx.len(),
                self.len()
            )));
        }
        let l = self.pair.len();
        let base = chain * self.slot_len();
        let win_a = &rx[base + l..base + 2 * l];
        let win_b = &rx[base + 3 * l..base + 4 * l];
        let norm = 1.0 / (2.0 * l as f64 * self.amplitude);
        Ok((0..l)
            .map(|d| {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in 0..l {
                    let idx = (n + l - d) % l;
                    acc += win_a[n] * self.pair.a[idx] as f64 + win_b[n] * self.pair.b[idx] as f64;
                }
                acc * norm
            })
            .collect())
    }
}

/// Per-subcarrier `K × M_RF` estimate of the reduced channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub channel: ReducedChannel,
    /// NMSE against the true channel in dB, when it was supplied.
    pub nmse_db: Option<f64>,
}

impl ChannelEstimate {
    /// Records the NMSE of this estimate against `truth`.
    pub fn with_truth(mut self, truth: &ReducedChannel) -> Result<Self> {
        self.nmse_db = Some(nmse_db(&self.channel, truth)?);
        Ok(self)
    }
}

/// `10·log10(Σ|Ĥ − H|² / Σ|H|²)` over all subcarriers and entries.
pub fn nmse_db(estimate: &ReducedChannel, truth: &ReducedChannel) -> Result<f64> {
    if estimate.n_users() != truth.n_users() || estimate.m_rf() != truth.m_rf() {
        return Err(Error::Dimension("estimate and truth differ in shape".into()));
    }
    let (mut err, mut pow) = (0.0, 0.0);
    for (e, t) in estimate.iter().zip(truth.iter()) {
        err += (e - t).norm_squared();
        pow += t.norm_squared();
    }
    if pow == 0.0 {
        return Err(Error::Empty("true channel has zero energy".into()));
    }
    Ok(10.0 * (err / pow).max(1e-30).log10())
}

/// Estimates every user's row of the reduced channel. `rx_training[u]` is
/// user `u`'s combined received signal starting at the first field sample.
pub fn estimate_reduced_channel(rx_training: &[Vec<Complex64>], field: &TrainingField) -> Result<ChannelEstimate> {
    if rx_training.is_empty() {
        return Err(Error::Empty("no users in received training".into()));
    }
    let mut rows: Vec<Vec<Vec<Complex64>>> = Vec::with_capacity(rx_training.len());
    for rx in rx_training {
        let mut per_chain = Vec::with_capacity(field.m_rf);
        for chain in 0..field.m_rf {
            let taps: Vec<(usize, Complex64)> = field.estimate_taps(rx, chain)?.into_iter().enumerate().collect();
            per_chain.push(taps_to_response(&taps, FFT_SIZE));
        }
        rows.push(per_chain);
    }
    let per_subcarrier = (0..FFT_SIZE)
        .map(|k| DMatrix::from_fn(rows.len(), field.m_rf, |u, i| rows[u][i][k]))
        .collect();
    Ok(ChannelEstimate {
        channel: ReducedChannel::new(per_subcarrier)?,
        nmse_db: None,
    })
}

/// Frequency-domain pair estimator for cyclic-prefixed blocks: given the
/// received spectra of one block carrying `A` and one carrying `B`, returns
/// `(A*·Y_a + B*·Y_b) / (|A|² + |B|²)` per subcarrier.
pub fn estimate_from_block_pair(
    y_a: &[Complex64],
    y_b: &[Complex64],
    spec_a: &[Complex64],
    spec_b: &[Complex64],
) -> Vec<Complex64> {
    y_a.iter()
        .zip(y_b)
        .zip(spec_a.iter().zip(spec_b))
        .map(|((ya, yb), (a, b))| (a.conj() * ya + b.conj() * yb) / (a.norm_sqr() + b.norm_sqr()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_pair() {
        let p = golay_pair(1).unwrap();
        assert_eq!(p.a, vec![1, 1]);
        assert_eq!(p.b, vec![1, -1]);
    }

    #[test]
    fn order_out_of_range() {
        assert!(golay_pair(0).is_err());
        assert!(golay_pair(11).is_err());
    }

    #[test]
    fn complementary_at_128() {
        let p = golay_pair(7).unwrap();
        for lag in 0..128 {
            let s = autocorrelation(&p.a, lag) + autocorrelation(&p.b, lag);
            assert_eq!(s, if lag == 0 { 256 } else { 0 }, "lag {lag}");
        }
    }

    #[test]
    fn single_slot_layout() {
        let f = build_cef(1, 128).unwrap();
        assert_eq!(f.len(), 512);
        let s = f.signal(0);
        let p = f.pair();
        for n in 0..128 {
            assert_eq!(s[n].re, p.a[n] as f64);
            assert_eq!(s[128 + n].re, p.a[n] as f64);
            assert_eq!(s[256 + n].re, p.b[n] as f64);
            assert_eq!(s[384 + n].re, p.b[n] as f64);
        }
    }

    #[test]
    fn slots_have_disjoint_support() {
        let f = build_cef(2, 128).unwrap();
        let inner: Complex64 = f.signal(0).iter().zip(f.signal(1)).map(|(x, y)| x * y.conj()).sum();
        assert_eq!(inner, Complex64::new(0.0, 0.0));
        assert!(f.signal(1)[..512].iter().all(|z| z.norm() == 0.0));
        assert!(f.signal(0)[512..].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn short_capture_is_a_framing_error() {
        let f = build_cef(2, 128).unwrap();
        let rx = vec![vec![Complex64::new(0.0, 0.0); 1000]];
        assert!(matches!(estimate_reduced_channel(&rx, &f), Err(Error::Framing(_))));
    }

    #[test]
    fn ideal_channel_estimates_unity() {
        let f = build_cef(1, 128).unwrap();
        let rx = vec![f.signal(0).to_vec()];
        let est = estimate_reduced_channel(&rx, &f).unwrap();
        for k in 0..FFT_SIZE {
            assert!((est.channel.at(k)[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
