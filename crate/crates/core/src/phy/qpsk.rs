//! Gray-mapped QPSK with unit average energy.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Bits `(b0, b1)` map to `((1 − 2·b0) + j(1 − 2·b1)) / √2`.
pub fn map_qpsk(bits: &[u8]) -> Result<Vec<Complex64>> {
    if !bits.len().is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "{} bits is not a whole number of QPSK symbols",
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(2)
        .map(|p| {
            let level = |b: u8| if b & 1 == 0 { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
            Complex64::new(level(p[0]), level(p[1]))
        })
        .collect())
}

/// Exact per-bit LLRs `log P(b=0)/P(b=1)` under circular complex Gaussian
/// noise of variance `noise_var`. Because I and Q carry one bit each the
/// max-log and exact expressions coincide.
pub fn demap_qpsk(symbols: &[Complex64], noise_var: f64) -> Result<Vec<f64>> {
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::Domain(format!("noise variance {noise_var}")));
    }
    let scale = 2.0 * std::f64::consts::SQRT_2 / noise_var;
    Ok(symbols.iter().flat_map(|y| [scale * y.re, scale * y.im]).collect())
}

/// LLRs with one noise variance per symbol.
pub fn demap_qpsk_varying(symbols: &[Complex64], noise_var: &[f64]) -> Result<Vec<f64>> {
    if symbols.len() != noise_var.len() {
        return Err(Error::Dimension("one noise variance per symbol required".into()));
    }
    let mut out = Vec::with_capacity(2 * symbols.len());
    for (y, &v) in symbols.iter().zip(noise_var) {
        out.extend(demap_qpsk(std::slice::from_ref(y), v)?);
    }
    Ok(out)
}

/// Hard decisions on LLRs (positive → 0).
pub fn hard_bits(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_points() {
        let s = map_qpsk(&[0, 0, 1, 0, 1, 1, 0, 1]).unwrap();
        let r = FRAC_1_SQRT_2;
        assert_eq!(s[0], Complex64::new(r, r));
        assert_eq!(s[1], Complex64::new(-r, r));
        assert_eq!(s[2], Complex64::new(-r, -r));
        assert_eq!(s[3], Complex64::new(r, -r));
    }

    #[test]
    fn odd_bit_count_rejected() {
        assert!(map_qpsk(&[0, 1, 1]).is_err());
    }

    #[test]
    fn unit_energy() {
        let bits: Vec<u8> = (0..64).map(|i| ((i * 5) % 3 == 0) as u8).collect();
        let e: f64 = map_qpsk(&bits).unwrap().iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
        assert!((e - 1.0).abs() < 1e-15);
    }

    #[test]
    fn origin_is_equidistant() {
        assert_eq!(demap_qpsk(&[Complex64::new(0.0, 0.0)], 0.3).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn noiseless_round_trip() {
        let bits: Vec<u8> = (0..200).map(|i| ((i * 7 + 1) % 4 < 2) as u8).collect();
        let llrs = demap_qpsk(&map_qpsk(&bits).unwrap(), 0.1).unwrap();
        assert_eq!(hard_bits(&llrs), bits);
    }

    #[test]
    fn llr_matches_likelihood_ratio() {
        // Direct evaluation of log(p(y|b0=0)/p(y|b0=1)) summed over the
        // other bit.
        let y = Complex64::new(0.3, -0.8);
        let v = 0.7;
        let pts = map_qpsk(&[0, 0, 0, 1, 1, 0, 1, 1]).unwrap();
        let lik = |s: Complex64| (-(y - s).norm_sqr() / v).exp();
        let l0 = ((lik(pts[0]) + lik(pts[1])) / (lik(pts[2]) + lik(pts[3]))).ln();
        let l1 = ((lik(pts[0]) + lik(pts[2])) / (lik(pts[1]) + lik(pts[3]))).ln();
        let got = demap_qpsk(&[y], v).unwrap();
        assert!((got[0] - l0).abs() < 1e-12);
        assert!((got[1] - l1).abs() < 1e-12);
    }
}
