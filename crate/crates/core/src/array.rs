//! Uniform planar arrays and analog (phase-shifter) beamforming.
//!
//! Arrays lie in the yz-plane with broadside along x. Element `(n, m)` sits at
//! `n` steps along y and `m` steps along z and is stored at flat index
//! `n * m_z + m`. Angles are in degrees: `theta` is measured from the z-axis
//! (broadside at 90°) and `phi` is the azimuth from the x-axis.
//!
//! Steering weights carry phase `-2π·d·(m·cos θ₀ + n·sin θ₀·sin φ₀)` and the
//! array response carries the opposite sign, so that the array factor of a
//! steered array peaks at exactly `M` in the steered direction.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default phase-shifter resolution in bits.
pub const DEFAULT_PHASE_BITS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub m_y: usize,
    pub m_z: usize,
    /// Element spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
}

fn default_spacing() -> f64 {
    0.5
}

impl ArrayGeometry {
    pub fn new(m_y: usize, m_z: usize) -> Result<Self> {
        Self::with_spacing(m_y, m_z, 0.5)
    }

    pub fn with_spacing(m_y: usize, m_z: usize, spacing: f64) -> Result<Self> {
        let geom = ArrayGeometry { m_y, m_z, spacing };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_y == 0 || self.m_z == 0 {
            return Err(Error::Domain(format!(
                "array needs at least one element per axis, got {}x{}",
                self.m_z, self.m_y
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::Domain(format!(
                "element spacing must be positive, got {}",
                self.spacing
            )));
        }
        Ok(())
    }

    /// Total number of elements.
    pub fn len(&self) -> usize {
        self.m_y * self.m_z
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(n, m)` coordinates of every element in storage order.
    pub fn elements(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m_y).flat_map(move |n| (0..self.m_z).map(move |m| (n, m)))
    }

    /// Spatial phase `2π·d·(m·cos θ + n·sin θ·sin φ)` of element `(n, m)`.
    fn spatial_phase(&self, n: usize, m: usize, dir: SteeringAngles) -> f64 {
        let (theta, phi) = (dir.theta.to_radians(), dir.phi.to_radians());
        2.0 * PI * self.spacing * (m as f64 * theta.cos() + n as f64 * theta.sin() * phi.sin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringAngles {
    /// Elevation from the z-axis, degrees in `[0, 180]`.
    pub theta: f64,
    /// Azimuth from the x-axis, degrees in `[-90, 90]`.
    pub phi: f64,
}

impl SteeringAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        let angles = SteeringAngles { theta, phi };
        angles.validate()?;
        Ok(angles)
    }

    /// Horizontal direction at azimuth `phi` (θ = 90°).
    pub fn azimuth(phi: f64) -> Result<Self> {
        Self::new(90.0, phi)
    }

    pub fn broadside() -> Self {
        SteeringAngles { theta: 90.0, phi: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=180.0).contains(&self.theta) {
            return Err(Error::Domain(format!("theta {} outside [0, 180] degrees", self.theta)));
        }
        if !(-90.0..=90.0).contains(&self.phi) {
            return Err(Error::Domain(format!("phi {} outside [-90, 90] degrees", self.phi)));
        }
        Ok(())
    }
}

/// Unit-modulus phase-shifter settings for one array.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalogWeights {
    pub weights: Vec<Complex64>,
    /// Resolution the phases were rounded to, if any.
    pub phase_bits: Option<u32>,
}

impl AnalogWeights {
    /// Builds weights from raw phases in radians.
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        AnalogWeights {
            weights: phases.into_iter().map(Complex64::cis).collect(),
            phase_bits: None,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn phases(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().map(|w| w.arg())
    }
}

/// Steering weights for `target`; unquantized.
pub fn steering_vector(geom: &ArrayGeometry, target: SteeringAngles) -> Result<AnalogWeights> {
    geom.validate()?;
    target.validate()?;
    Ok(AnalogWeights::from_phases(
        geom.elements().map(|(n, m)| -geom.spatial_phase(n, m, target)),
    ))
}

/// Array response (receive manifold) towards `dir`: `exp(+j·spatial phase)`
/// per element. This is the conjugate of the steering weights for `dir`.
pub fn array_response(geom: &ArrayGeometry, dir: SteeringAngles) -> Result<Vec<Complex64>> {
    geom.validate()?;
    dir.validate()?;
    Ok(geom
        .elements()
        .map(|(n, m)| Complex64::cis(geom.spatial_phase(n, m, dir)))
        .collect())
}

/// Complex array gain of `w` in direction `dir`.
pub fn array_factor(geom: &ArrayGeometry, w: &AnalogWeights, dir: SteeringAngles) -> Result<Complex64> {
    if w.len() != geom.len() {
        return Err(Error::Dimension(format!(
            "{} weights for a {}-element array",
            w.len(),
            geom.len()
        )));
    }
    let response = array_response(geom, dir)?;
    Ok(w.weights.iter().zip(&response).map(|(w, a)| w * a).sum())
}

/// Rounds every phase to the nearest multiple of `2π / 2^bits`.
pub fn quantize_phases(w: &AnalogWeights, bits: u32) -> Result<AnalogWeights> {
    if bits == 0 || bits > 24 {
        return Err(Error::Domain(format!("phase resolution of {bits} bits")));
    }
    let step = 2.0 * PI / (1u64 << bits) as f64;
    Ok(AnalogWeights {
        weights: w
            .weights
            .iter()
            .map(|z| Complex64::cis((z.arg() / step).round() * step))
            .collect(),
        phase_bits: Some(bits),
    })
}

/// Block-diagonal analog precoder of a partially connected array: RF chain
/// `i` drives only the antennas of sub-array `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridAnalogMatrix {
    per_subarray: Vec<AnalogWeights>,
}

/// Assembles the block-diagonal `M × M_RF` analog precoder.
pub fn build_analog_precoder(subarrays: Vec<AnalogWeights>) -> Result<HybridAnalogMatrix> {
    let Some(first) = subarrays.first() else {
        return Err(Error::Dimension("analog precoder needs at least one sub-array".into()));
    };
    let m_sub = first.len();
    if m_sub == 0 {
        return Err(Error::Dimension("empty sub-array weights".into()));
    }
    if let Some((i, bad)) = subarrays.iter().enumerate().find(|(_, w)| w.len() != m_sub) {
        return Err(Error::Dimension(format!(
            "sub-array {i} has {} weights, expected {m_sub}",
            bad.len()
        )));
    }
    Ok(HybridAnalogMatrix {
        per_subarray: subarrays,
    })
}

impl HybridAnalogMatrix {
    pub fn m_rf(&self) -> usize {
        self.per_subarray.len()
    }

    pub fn m_sub(&self) -> usize {
        self.per_subarray[0].len()
    }

    /// Total antenna count `M`.
    pub fn m(&self) -> usize {
        self.m_rf() * self.m_sub()
    }

    pub fn subarray(&self, i: usize) -> &AnalogWeights {
        &self.per_subarray[i]
    }

    pub fn subarrays(&self) -> &[AnalogWeights] {
        &self.per_subarray
    }

    /// Sub-array (RF chain) that owns antenna `antenna`.
    pub fn chain_of(&self, antenna: usize) -> usize {
        antenna / self.m_sub()
    }

    /// Entry `(antenna, chain)` of the implied dense matrix.
    pub fn entry(&self, antenna: usize, chain: usize) -> Complex64 {
        if self.chain_of(antenna) == chain {
            self.per_subarray[chain].weights[antenna % self.m_sub()]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Per-antenna signal `F_A·s` for one RF-chain vector `s`.
    pub fn apply(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        if s.len() != self.m_rf() {
            return Err(Error::Dimension(format!(
                "{} RF inputs for {} chains",
                s.len(),
                self.m_rf()
            )));
        }
        Ok(self
            .per_subarray
            .iter()
            .zip(s)
            .flat_map(|(f, &si)| f.weights.iter().map(move |w| w * si))
            .collect())
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.m(), self.m_rf(), |r, c| self.entry(r, c))
    }
}
