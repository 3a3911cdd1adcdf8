//! Scenario files: TOML describing geometry, propagation, impairments,
//! noise, precoder modes and Monte Carlo settings.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{ArrayGeometry, SteeringAngles, DEFAULT_PHASE_BITS};
use crate::block::CP_LEN;
use crate::channel::{BsLayout, ChannelScenario, ImpairmentProfile, Ray, StochasticRays, UserPropagation};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecoderMode {
    /// `F_D[k] = I`: analog beams only.
    AnalogOnly,
    /// RZF with `γ = 0`.
    Zf,
    /// RZF with the configured (or default) `γ`.
    Rzf,
}

impl PrecoderMode {
    pub fn name(&self) -> &'static str {
        match self {
            PrecoderMode::AnalogOnly => "analog_only",
            PrecoderMode::Zf => "zf",
            PrecoderMode::Rzf => "rzf",
        }
    }
}

impl fmt::Display for PrecoderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PrecoderMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analog_only" | "analog" => Ok(PrecoderMode::AnalogOnly),
            "zf" => Ok(PrecoderMode::Zf),
            "rzf" => Ok(PrecoderMode::Rzf),
            other => Err(Error::config("modes", format!("unknown precoder mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiSource {
    /// The precoder uses the reduced channel estimated from sounding.
    #[default]
    Estimated,
    /// The precoder uses the true reduced channel.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsConfig {
    #[serde(default = "default_bs_subarray")]
    pub subarray: ArrayGeometry,
    #[serde(default = "default_subarrays")]
    pub subarrays: usize,
    /// Board separation in wavelengths.
    #[serde(default = "default_separation")]
    pub separation: f64,
}

impl Default for BsConfig {
    fn default() -> Self {
        BsConfig {
            subarray: default_bs_subarray(),
            subarrays: default_subarrays(),
            separation: default_separation(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Complex noise variance per receive antenna and sample.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecoderConfig {
    /// RZF regularization; defaults to `K · N · noise_power · M_sub`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpairmentConfig {
    #[serde(default = "default_rolloff")]
    pub edge_rolloff_db: f64,
    #[serde(default = "default_imbalance")]
    pub chain_power_imbalance_db: Vec<f64>,
}

impl Default for ImpairmentConfig {
    fn default() -> Self {
        ImpairmentConfig {
            edge_rolloff_db: default_rolloff(),
            chain_power_imbalance_db: default_imbalance(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSearchConfig {
    #[serde(default = "default_az_min")]
    pub azimuth_min: f64,
    #[serde(default = "default_az_max")]
    pub azimuth_max: f64,
    #[serde(default = "default_az_step")]
    pub step: f64,
    /// Phase-shifter resolution; 0 disables quantization.
    #[serde(default = "default_phase_bits")]
    pub phase_bits: u32,
}

impl Default for BeamSearchConfig {
    fn default() -> Self {
        BeamSearchConfig {
            azimuth_min: default_az_min(),
            azimuth_max: default_az_max(),
            step: default_az_step(),
            phase_bits: default_phase_bits(),
        }
    }
}

impl BeamSearchConfig {
    pub fn phase_bits(&self) -> Option<u32> {
        (self.phase_bits > 0).then_some(self.phase_bits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    /// Silent samples transmitted before every burst.
    #[serde(default = "default_lead")]
    pub lead_samples: usize,
    #[serde(default = "default_backoff")]
    pub timing_backoff: usize,
    #[serde(default = "default_pcef_reps")]
    pub pcef_repetitions: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        ReceiverSection {
            lead_samples: default_lead(),
            timing_backoff: default_backoff(),
            pcef_repetitions: default_pcef_reps(),
            max_iters: default_max_iters(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayConfig {
    pub aod: SteeringAngles,
    pub aoa: SteeringAngles,
    #[serde(default)]
    pub gain_db: f64,
    #[serde(default)]
    pub phase_deg: f64,
    #[serde(default)]
    pub delay: usize,
}

impl RayConfig {
    pub fn to_ray(&self) -> Ray {
        Ray {
            aod: self.aod,
            aoa: self.aoa,
            gain: Complex64::from_polar(10f64.powf(self.gain_db / 20.0), self.phase_deg.to_radians()),
            delay: self.delay,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    #[serde(default)]
    pub rays: Vec<RayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scatterers: Option<StochasticRays>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<PrecoderMode>,
    #[serde(default = "default_codewords")]
    pub codewords_per_frame: usize,
    #[serde(default)]
    pub csi: CsiSource,
    pub noise: NoiseConfig,
    #[serde(default)]
    pub precoder: PrecoderConfig,
    #[serde(default)]
    pub bs: BsConfig,
    #[serde(default = "default_ue")]
    pub ue: ArrayGeometry,
    #[serde(default)]
    pub impairments: ImpairmentConfig,
    #[serde(default)]
    pub beam_search: BeamSearchConfig,
    #[serde(default)]
    pub receiver: ReceiverSection,
    pub users: Vec<UserConfig>,
}

fn default_bs_subarray() -> ArrayGeometry {
    BsLayout::paper_default().subarray
}
fn default_subarrays() -> usize {
    2
}
fn default_separation() -> f64 {
    10.0
}
fn default_ue() -> ArrayGeometry {
    ArrayGeometry {
        m_y: 2,
        m_z: 2,
        spacing: 0.5,
    }
}
fn default_rolloff() -> f64 {
    6.0
}
fn default_imbalance() -> Vec<f64> {
    vec![0.0, -1.0]
}
fn default_az_min() -> f64 {
    -60.0
}
fn default_az_max() -> f64 {
    60.0
}
fn default_az_step() -> f64 {
    1.0
}
fn default_phase_bits() -> u32 {
    DEFAULT_PHASE_BITS
}
fn default_lead() -> usize {
    64
}
fn default_backoff() -> usize {
    8
}
fn default_pcef_reps() -> usize {
    2
}
fn default_max_iters() -> usize {
    crate::phy::ldpc::DEFAULT_MAX_ITERS
}
fn default_frames() -> usize {
    100
}
fn default_modes() -> Vec<PrecoderMode> {
    vec![PrecoderMode::AnalogOnly, PrecoderMode::Rzf]
}
fn default_codewords() -> usize {
    10
}

fn check(cond: bool, path: impl Into<String>, message: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn check_angles(a: &SteeringAngles, path: String) -> Result<()> {
    a.validate().map_err(|e| Error::config(path, e.to_string()))
}

fn check_geometry(g: &ArrayGeometry, path: &str) -> Result<()> {
    g.validate().map_err(|e| Error::config(path, e.to_string()))
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let parse_err = |path: String, message: String| {
            Error::config(if path.is_empty() { "<root>".into() } else { path }, message)
        };
        let de = toml::de::Deserializer::parse(text).map_err(|e| parse_err(String::new(), e.to_string()))?;
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            parse_err(
                if path == "." { String::new() } else { path },
                e.into_inner().to_string(),
            )
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn validate(&self) -> Result<()> {
        check(self.frames >= 1, "frames", "must be at least 1")?;
        check(!self.modes.is_empty(), "modes", "at least one precoder mode required")?;
        for (i, m) in self.modes.iter().enumerate() {
            check(
                !self.modes[..i].contains(m),
                format!("modes[{i}]"),
                format!("duplicate mode `{m}`"),
            )?;
        }
        check(
            (1..=u16::MAX as usize).contains(&self.codewords_per_frame),
            "codewords_per_frame",
            "must be between 1 and 65535",
        )?;
        check(
            self.noise.power >= 0.0 && self.noise.power.is_finite(),
            "noise.power",
            "must be finite and non-negative",
        )?;
        if let Some(g) = self.precoder.gamma {
            check(
                g >= 0.0 && g.is_finite(),
                "precoder.gamma",
                "must be finite and non-negative",
            )?;
        }
        check_geometry(&self.bs.subarray, "bs.subarray")?;
        check(self.bs.subarrays >= 1, "bs.subarrays", "need at least one sub-array")?;
        self.bs_layout().validate()?;
        check_geometry(&self.ue, "ue")?;
        let imp = &self.impairments;
        check(
            imp.edge_rolloff_db >= 0.0 && imp.edge_rolloff_db.is_finite(),
            "impairments.edge_rolloff_db",
            "must be finite and non-negative",
        )?;
        check(
            imp.chain_power_imbalance_db.len() == self.bs.subarrays,
            "impairments.chain_power_imbalance_db",
            format!(
                "{} entries for {} RF chains",
                imp.chain_power_imbalance_db.len(),
                self.bs.subarrays
            ),
        )?;
        for (i, db) in imp.chain_power_imbalance_db.iter().enumerate() {
            check(
                db.is_finite(),
                format!("impairments.chain_power_imbalance_db[{i}]"),
                "must be finite",
            )?;
        }
        let bsc = &self.beam_search;
        check(
            bsc.step > 0.0 && bsc.step.is_finite(),
            "beam_search.step",
            "must be positive",
        )?;
        check(
            bsc.azimuth_min <= bsc.azimuth_max && bsc.azimuth_min >= -90.0 && bsc.azimuth_max <= 90.0,
            "beam_search.azimuth_min",
            "grid must satisfy -90 <= azimuth_min <= azimuth_max <= 90",
        )?;
        check(bsc.phase_bits <= 24, "beam_search.phase_bits", "at most 24 bits")?;
        let rx = &self.receiver;
        check(rx.lead_samples <= 4096, "receiver.lead_samples", "at most 4096")?;
        check(
            rx.pcef_repetitions >= 2,
            "receiver.pcef_repetitions",
            "must be at least 2",
        )?;
        check(rx.max_iters >= 1, "receiver.max_iters", "must be at least 1")?;

        check(!self.users.is_empty(), "users", "scenario has no users")?;
        check(
            self.users.len() <= self.bs.subarrays,
            "users",
            format!("{} users exceed {} RF chains", self.users.len(), self.bs.subarrays),
        )?;
        // Rolloff filter adds up to 2 samples; the receiver places timing
        // `timing_backoff` samples early.
        let max_delay = CP_LEN - 1 - 2 - rx.timing_backoff.min(CP_LEN - 3);
        for (u, user) in self.users.iter().enumerate() {
            check(
                !user.rays.is_empty() || user.scatterers.as_ref().is_some_and(|s| s.count > 0),
                format!("users[{u}].rays"),
                "user has no propagation paths",
            )?;
            for (r, ray) in user.rays.iter().enumerate() {
                let p = format!("users[{u}].rays[{r}]");
                check_angles(&ray.aod, format!("{p}.aod"))?;
                check_angles(&ray.aoa, format!("{p}.aoa"))?;
                check(ray.gain_db.is_finite(), format!("{p}.gain_db"), "must be finite")?;
                check(ray.phase_deg.is_finite(), format!("{p}.phase_deg"), "must be finite")?;
                check(
                    ray.delay <= max_delay,
                    format!("{p}.delay"),
                    format!(
                        "delay {} exceeds {max_delay} samples (cyclic prefix minus filter and timing margin)",
                        ray.delay
                    ),
                )?;
            }
            if let Some(s) = &user.scatterers {
                let p = format!("users[{u}].scatterers");
                check(
                    s.delay[0] <= s.delay[1] && s.delay[1] <= max_delay,
                    format!("{p}.delay"),
                    format!("range must lie within 0..={max_delay}"),
                )?;
                check(
                    s.gain_db[0] <= s.gain_db[1] && s.gain_db.iter().all(|g| g.is_finite()),
                    format!("{p}.gain_db"),
                    "invalid range",
                )?;
                for (name, range) in [("aod_phi", s.aod_phi), ("aoa_phi", s.aoa_phi)] {
                    check(
                        range[0] <= range[1] && range[0] >= -90.0 && range[1] <= 90.0,
                        format!("{p}.{name}"),
                        "range must lie within [-90, 90]",
                    )?;
                }
            }
        }
        Ok(())
    }

    pub fn bs_layout(&self) -> BsLayout {
        BsLayout {
            subarray: self.bs.subarray,
            m_rf: self.bs.subarrays,
            separation: self.bs.separation,
        }
    }

    pub fn channel_scenario(&self) -> ChannelScenario {
        ChannelScenario {
            bs: self.bs_layout(),
            ue: self.ue,
            users: self
                .users
                .iter()
                .map(|u| UserPropagation {
                    rays: u.rays.iter().map(RayConfig::to_ray).collect(),
                    scatterers: u.scatterers,
                })
                .collect(),
        }
    }

    pub fn impairment_profile(&self) -> ImpairmentProfile {
        ImpairmentProfile {
            edge_rolloff_db: self.impairments.edge_rolloff_db,
            chain_power_imbalance_db: self.impairments.chain_power_imbalance_db.clone(),
            noise_power: self.noise.power,
        }
    }

    /// True when each frame draws a fresh channel.
    pub fn is_stochastic(&self) -> bool {
        self.users.iter().any(|u| u.scatterers.is_some_and(|s| s.count > 0))
    }

    /// Regularization used by the `rzf` mode: the configured value, else
    /// `K · N · noise_power · M_sub` (noise-to-signal ratio at the RF-chain
    /// inputs for unit radiated power).
    pub fn rzf_gamma(&self) -> f64 {
        self.precoder.gamma.unwrap_or_else(|| {
            self.n_users() as f64 * self.ue.len() as f64 * self.noise.power * self.bs.subarray.len() as f64
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 1
[noise]
power = 0.1
[[users]]
[[users.rays]]
aod = { theta = 90, phi = 5 }
aoa = { theta = 90, phi = 0 }
[[users]]
[[users.rays]]
aod = { theta = 90, phi = -5 }
aoa = { theta = 90, phi = 0 }
delay = 3
"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.frames, 100);
        assert_eq!(s.modes, vec![PrecoderMode::AnalogOnly, PrecoderMode::Rzf]);
        assert_eq!(s.bs.subarray.len(), 16);
        assert_eq!(s.impairments.chain_power_imbalance_db, vec![0.0, -1.0]);
        assert_eq!(s.users[1].rays[0].delay, 3);
    }

    #[test]
    fn round_trips_through_toml() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(Scenario::from_toml_str(&s.to_toml()).unwrap(), s);
    }

    fn error_path(text: &str) -> String {
        match Scenario::from_toml_str(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(
            error_path(&MINIMAL.replace("delay = 3", "delay = 200")),
            "users[1].rays[0].delay"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("phi = -5", "phi = -95")),
            "users[1].rays[0].aod"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("power = 0.1", "power = -1.0")),
            "noise.power"
        );
        assert_eq!(
            error_path(&MINIMAL.replace("power = 0.1", "power = \"loud\"")),
            "noise.power"
        );
        assert_eq!(error_path(&MINIMAL.replace("seed = 1", "seed = 1\nbogus = 2")), "bogus");
    }

    #[test]
    fn too_many_users() {
        let three = format!(
            "{MINIMAL}\n[[users]]\n[[users.rays]]\naod = {{ theta = 90, phi = 30 }}\naoa = {{ theta = 90, phi = 0 }}\n"
        );
        assert_eq!(error_path(&three), "users");
    }

    #[test]
    fn default_gamma_tracks_noise() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert!((s.rzf_gamma() - 2.0 * 4.0 * 0.1 * 16.0).abs() < 1e-12);
    }
}
