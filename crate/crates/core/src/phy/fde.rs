//! Single-tap MMSE frequency-domain equalization.

use num_complex::Complex64;

use crate::block::{BlockTransform, FFT_SIZE};
use crate::error::{Error, Result};

/// Per-subcarrier noise (plus interference) variance seen by the equalizer.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseVariance {
    Flat(f64),
    PerSubcarrier(Vec<f64>),
}

impl NoiseVariance {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            NoiseVariance::Flat(v) => *v,
            NoiseVariance::PerSubcarrier(v) => v[k],
        }
    }

    fn check(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        match self {
            NoiseVariance::Flat(v) if ok(*v) => Ok(()),
            NoiseVariance::PerSubcarrier(v) if v.len() == FFT_SIZE && v.iter().all(|&x| ok(x)) => Ok(()),
            _ => Err(Error::Domain(
                "noise variance must be finite, non-negative, one per subcarrier".into(),
            )),
        }
    }
}

impl From<f64> for NoiseVariance {
    fn from(v: f64) -> Self {
        NoiseVariance::Flat(v)
    }
}

/// `conj(g)·y / (|g|² + v)` per subcarrier, then back to the time domain.
pub fn fde_equalize(rx_block: &[Complex64], g: &[Complex64], noise_var: &NoiseVariance) -> Result<Vec<Complex64>> {
    if rx_block.len() != FFT_SIZE || g.len() != FFT_SIZE {
        return Err(Error::Dimension(format!(
            "equalizer needs {FFT_SIZE} subcarriers, got {} samples and {} gains",
            rx_block.len(),
            g.len()
        )));
    }
    noise_var.check()?;
    let mut out: Vec<Complex64> = rx_block
        .iter()
        .zip(g)
        .enumerate()
        .map(|(k, (y, g))| {
            let den = g.norm_sqr() + noise_var.at(k);
            if den > 0.0 {
                g.conj() * y / den
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    BlockTransform::shared().inverse_in_place(&mut out);
    Ok(out)
}

/// Average MMSE gain `μ = mean_k |g|² / (|g|² + v)`. Time-domain MMSE
/// outputs equal `μ·s + e`; dividing by `μ` removes the bias, leaving an
/// error of variance `(1 − μ)/μ` for unit-energy symbols.
pub fn mmse_bias(g: &[Complex64], noise_var: &NoiseVariance) -> f64 {
    g.iter()
        .enumerate()
        .map(|(k, g)| {
            let p = g.norm_sqr();
            let den = p + noise_var.at(k);
            if den > 0.0 {
                p / den
            } else {
                0.0
            }
        })
        .sum::<f64>()
        / g.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block() -> Vec<Complex64> {
        (0..FFT_SIZE)
            .map(|i| Complex64::new((i as f64 * 0.7).cos(), (i as f64 * 0.2).sin()))
            .collect()
    }

    #[test]
    fn unit_channel_passes_through() {
        let x = block();
        let y = BlockTransform::shared().forward(&x);
        let out = fde_equalize(&y, &vec![Complex64::new(1.0, 0.0); FFT_SIZE], &0.0.into()).unwrap();
        for (a, b) in out.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn scaling_is_removed() {
        let x = block();
        let y: Vec<Complex64> = BlockTransform::shared().forward(&x).iter().map(|z| z * 2.0).collect();
        let out = fde_equalize(&y, &vec![Complex64::new(2.0, 0.0); FFT_SIZE], &0.0.into()).unwrap();
        for (a, b) in out.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn dead_subcarrier_is_zeroed_not_nan() {
        let mut g = vec![Complex64::new(1.0, 0.0); FFT_SIZE];
        g[10] = Complex64::new(0.0, 0.0);
        let out = fde_equalize(&block(), &g, &0.0.into()).unwrap();
        assert!(out.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
    }

    #[test]
    fn bias_of_flat_channel() {
        let g = vec![Complex64::new(1.0, 0.0); FFT_SIZE];
        assert!((mmse_bias(&g, &1.0.into()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = vec![Complex64::new(1.0, 0.0); FFT_SIZE];
        assert!(fde_equalize(&block()[1..], &g, &0.0.into()).is_err());
        assert!(fde_equalize(&block(), &g, &(-1.0).into()).is_err());
        assert!(fde_equalize(&block(), &g, &NoiseVariance::PerSubcarrier(vec![0.0; 3])).is_err());
    }
}
