//! Bit, packet and error-vector statistics.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Reported in place of `−∞` when the error vector is exactly zero.
pub const EVM_FLOOR_DB: f64 = -100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Information bit error rate after decoding.
    pub ber: f64,
    pub per: f64,
    pub evm_db: f64,
}

/// `10·log10(Σ|eq − ref|² / Σ|ref|²)`, floored at [`EVM_FLOOR_DB`].
pub fn evm_db(reference: &[Complex64], equalized: &[Complex64]) -> Result<f64> {
    let (err, pow) = evm_sums(reference, equalized)?;
    Ok(ratio_db(err, pow))
}

fn evm_sums(reference: &[Complex64], equalized: &[Complex64]) -> Result<(f64, f64)> {
    if reference.is_empty() {
        return Err(Error::Empty("no symbols for EVM".into()));
    }
    if reference.len() != equalized.len() {
        return Err(Error::Dimension(format!(
            "{} reference and {} equalized symbols",
            reference.len(),
            equalized.len()
        )));
    }
    let err = reference.iter().zip(equalized).map(|(r, e)| (e - r).norm_sqr()).sum();
    let pow = reference.iter().map(|r| r.norm_sqr()).sum();
    Ok((err, pow))
}

fn ratio_db(err: f64, pow: f64) -> f64 {
    if err <= 0.0 || pow <= 0.0 {
        return EVM_FLOOR_DB;
    }
    (10.0 * (err / pow).log10()).max(EVM_FLOOR_DB)
}

fn count_errors(a: &[u8], b: &[u8]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("{} vs {} bits", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| (*x ^ *y) & 1 == 1).count())
}

/// Metrics of a single frame (PER is 0 or 1).
pub fn compute_metrics(
    tx_bits: &[u8],
    rx_bits: &[u8],
    tx_symbols: &[Complex64],
    eq_symbols: &[Complex64],
) -> Result<Metrics> {
    let mut acc = MetricsAccumulator::default();
    acc.add_frame(tx_bits, rx_bits, tx_symbols, eq_symbols, None)?;
    Ok(acc.metrics())
}

/// Running totals over many frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricsAccumulator {
    pub bits: u64,
    pub bit_errors: u64,
    pub coded_bits: u64,
    pub coded_bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    evm_err: f64,
    evm_ref: f64,
}

impl MetricsAccumulator {
    /// Adds one frame. `coded` optionally carries the transmitted coded bits
    /// and the receiver's hard decisions before decoding.
    pub fn add_frame(
        &mut self,
        tx_bits: &[u8],
        rx_bits: &[u8],
        tx_symbols: &[Complex64],
        eq_symbols: &[Complex64],
        coded: Option<(&[u8], &[u8])>,
    ) -> Result<()> {
        self.add_frame_with_status(tx_bits, rx_bits, tx_symbols, eq_symbols, coded, false)
    }

    /// As [`add_frame`](Self::add_frame); `lost` marks a packet the receiver
    /// dropped (e.g. failed header check) even if its payload decoded.
    pub fn add_frame_with_status(
        &mut self,
        tx_bits: &[u8],
        rx_bits: &[u8],
        tx_symbols: &[Complex64],
        eq_symbols: &[Complex64],
        coded: Option<(&[u8], &[u8])>,
        lost: bool,
    ) -> Result<()> {
        if tx_bits.is_empty() {
            return Err(Error::Empty("frame without payload bits".into()));
        }
        let errors = count_errors(tx_bits, rx_bits)?;
        let (e, p) = evm_sums(tx_symbols, eq_symbols)?;
        if let Some((tx, rx)) = coded {
            self.coded_bit_errors += count_errors(tx, rx)? as u64;
            self.coded_bits += tx.len() as u64;
        }
        self.bits += tx_bits.len() as u64;
        self.bit_errors += errors as u64;
        self.frames += 1;
        self.frame_errors += u64::from(errors > 0 || lost);
        self.evm_err += e;
        self.evm_ref += p;
        Ok(())
    }

    /// Counts a frame whose payload never reached the decoder (e.g. no
    /// synchronization): every information bit is an error.
    pub fn add_lost_frame(&mut self, info_bits: usize) {
        self.bits += info_bits as u64;
        self.bit_errors += info_bits as u64;
        self.frames += 1;
        self.frame_errors += 1;
    }

    pub fn merge(&mut self, other: &MetricsAccumulator) {
        self.bits += other.bits;
        self.bit_errors += other.bit_errors;
        self.coded_bits += other.coded_bits;
        self.coded_bit_errors += other.coded_bit_errors;
        self.frames += other.frames;
        self.frame_errors += other.frame_errors;
        self.evm_err += other.evm_err;
        self.evm_ref += other.evm_ref;
    }

    pub fn metrics(&self) -> Metrics {
        let rate = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        Metrics {
            ber: rate(self.bit_errors, self.bits),
            per: rate(self.frame_errors, self.frames),
            evm_db: ratio_db(self.evm_err, self.evm_ref),
        }
    }

    /// Coded (pre-decoding) bit error rate.
    pub fn raw_ber(&self) -> f64 {
        if self.coded_bits == 0 {
            0.0
        } else {
            self.coded_bit_errors as f64 / self.coded_bits as f64
        }
    }

    /// 95% Wilson score interval for the packet error rate.
    pub fn per_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.frames)
    }
}

pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let den = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / den;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / den;
    // The bounds are exactly 0 and 1 at the extremes; avoid rounding residue.
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}
