//! Frequency-selective digital precoding on the reduced channel.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::array::HybridAnalogMatrix;
use crate::channel::ReducedChannel;
use crate::error::{Error, Result};

/// Relative eigenvalue floor below which the regularized Gram matrix is
/// treated as singular.
const SINGULAR_RCOND: f64 = 1e-12;

/// Per-subcarrier `M_RF × K` digital precoder with its power normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalPrecoder {
    per_subcarrier: Vec<DMatrix<Complex64>>,
    pub gamma: f64,
    pub alpha: f64,
}

impl DigitalPrecoder {
    /// `F_D[k] = I` on every subcarrier: the analog-only baseline.
    pub fn identity(m_rf: usize, n_users: usize, n_subcarriers: usize) -> Result<Self> {
        if n_users > m_rf {
            return Err(Error::config(
                "users",
                format!("{n_users} streams exceed {m_rf} RF chains"),
            ));
        }
        Ok(DigitalPrecoder {
            per_subcarrier: vec![DMatrix::identity(m_rf, n_users); n_subcarriers],
            gamma: 0.0,
            alpha: 1.0,
        })
    }

    pub fn from_matrices(per_subcarrier: Vec<DMatrix<Complex64>>, gamma: f64) -> Result<Self> {
        let shape = per_subcarrier
            .first()
            .ok_or_else(|| Error::Empty("precoder without subcarriers".into()))?
            .shape();
        if per_subcarrier.iter().any(|m| m.shape() != shape) {
            return Err(Error::Dimension("inconsistent precoder shapes".into()));
        }
        Ok(DigitalPrecoder {
            per_subcarrier,
            gamma,
            alpha: 1.0,
        })
    }

    pub fn at(&self, k: usize) -> &DMatrix<Complex64> {
        &self.per_subcarrier[k]
    }

    pub fn m_rf(&self) -> usize {
        self.per_subcarrier[0].nrows()
    }

    pub fn n_users(&self) -> usize {
        self.per_subcarrier[0].ncols()
    }

    pub fn n_subcarriers(&self) -> usize {
        self.per_subcarrier.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DMatrix<Complex64>> {
        self.per_subcarrier.iter()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Same matrices scaled by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        DigitalPrecoder {
            per_subcarrier: self.per_subcarrier.iter().map(|m| m * c).collect(),
            gamma: self.gamma,
            alpha: self.alpha,
        }
    }
}

/// Regularized zero forcing `F_D[k] = H̃^H (γ·I + H̃·H̃^H)^{-1}`; `alpha` is
/// left at 1.
pub fn rzf(h_tilde: &ReducedChannel, gamma: f64) -> Result<DigitalPrecoder> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("regularization {gamma}")));
    }
    let (k_users, m_rf) = (h_tilde.n_users(), h_tilde.m_rf());
    if k_users > m_rf {
        return Err(Error::Dimension(format!("{k_users} users exceed {m_rf} RF chains")));
    }
    let mut per_subcarrier = Vec::with_capacity(crate::block::FFT_SIZE);
    for (k, h) in h_tilde.iter().enumerate() {
        let h_adj = h.adjoint();
        let gram = h * &h_adj + DMatrix::<Complex64>::identity(k_users, k_users) * Complex64::new(gamma, 0.0);
        let eig = gram.clone().symmetric_eigenvalues();
        let (lo, hi) = eig
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if hi.is_nan() || hi <= 0.0 || lo <= SINGULAR_RCOND * hi {
            return Err(Error::SingularSubcarrier { subcarrier: k, gamma });
        }
        let chol = gram
            .cholesky()
            .ok_or(Error::SingularSubcarrier { subcarrier: k, gamma })?;
        // F = H^H A^{-1} = (A^{-1} H)^H since A is Hermitian.
        per_subcarrier.push(chol.solve(h).adjoint());
    }
    DigitalPrecoder::from_matrices(per_subcarrier, gamma)
}

/// `α = 1 / sqrt(mean_k ‖F_A·F_D[k]‖²_F)`: unit average transmit power per
/// subcarrier for unit-energy streams.
pub fn normalize(f_a: &HybridAnalogMatrix, f_d: &DigitalPrecoder) -> Result<f64> {
    if f_d.m_rf() != f_a.m_rf() {
        return Err(Error::Dimension(format!(
            "digital precoder has {} rows, analog stage {} chains",
            f_d.m_rf(),
            f_a.m_rf()
        )));
    }
    let dense = f_a.to_dense();
    let total: f64 = f_d.iter().map(|fd| (&dense * fd).norm_squared()).sum();
    let mean = total / f_d.n_subcarriers() as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::ZeroPrecoder);
    }
    Ok(1.0 / mean.sqrt())
}

/// Per-antenna frequency-domain symbols `x[k] = α·F_A·F_D[k]·s[k]`.
pub fn precode(
    s: &[Vec<Complex64>],
    f_a: &HybridAnalogMatrix,
    f_d: &DigitalPrecoder,
    alpha: f64,
) -> Result<Vec<Vec<Complex64>>> {
    if s.len() != f_d.n_subcarriers() {
        return Err(Error::Dimension(format!(
            "{} symbol vectors for {} subcarriers",
            s.len(),
            f_d.n_subcarriers()
        )));
    }
    if f_d.m_rf() != f_a.m_rf() {
        return Err(Error::Dimension("analog and digital stages disagree on M_RF".into()));
    }
    s.iter()
        .enumerate()
        .map(|(k, sk)| {
            if sk.len() != f_d.n_users() {
                return Err(Error::Dimension(format!(
                    "subcarrier {k}: {} symbols for {} streams",
                    sk.len(),
                    f_d.n_users()
                )));
            }
            let z = f_d.at(k) * DVector::from_column_slice(sk) * Complex64::new(alpha, 0.0);
            f_a.apply(z.as_slice())
        })
        .collect()
}
