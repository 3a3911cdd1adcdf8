//! Monte Carlo driver: beam search, sounding, precoding, transmission and
//! reception for every frame and precoder mode.
//!
//! Frame `f` uses seed `scenario.seed + f`. Within a frame every mode sees
//! the same channel, payload bits and noise samples, so mode comparisons are
//! paired.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::array::SteeringAngles;
use crate::beam_search::{assign_subarrays, search_beam_pair, AnalogConfiguration, BeamCodebook, BeamPair};
use crate::block::{CP_LEN, FFT_SIZE};
use crate::channel::{
    apply_impairments, combined_taps, generate_channel, reduce_channel, transmit_combined, ChannelRealization,
    CombinedTaps, ReducedChannel,
};
use crate::error::{Error, Result};
use crate::golay::TrainingField;
use crate::phy::frame::{build_frame_chains, build_sounding, receive, receive_sounding, FrameConfig, ReceiverConfig};
use crate::phy::ldpc::INFO_BITS;
use crate::phy::metrics::MetricsAccumulator;
use crate::phy::sync::SyncConfig;
use crate::precoder::{normalize, rzf, DigitalPrecoder};
use crate::sim::scenario::{CsiSource, PrecoderMode, Scenario};

pub(super) const TAG_BITS: u64 = 1;
pub(super) const TAG_SOUNDING_NOISE: u64 = 2;
pub(super) const TAG_DATA_NOISE: u64 = 3;
pub(super) const TAG_CHANNEL: u64 = 4;

/// Trailing silence appended to every burst so the channel tail is kept.
const TAIL_SAMPLES: usize = 2 * CP_LEN;

/// Number of equalized symbols kept per user and mode for plotting.
pub const CONSTELLATION_POINTS: usize = FFT_SIZE;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for one purpose within a frame.
pub fn sub_seed(frame_seed: u64, tag: u64) -> u64 {
    splitmix64(frame_seed ^ splitmix64(tag))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Transmit only this user's payload (other streams muted) and report
    /// only this user: the interference-free single-user baseline.
    pub solo_user: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserReport {
    pub user: usize,
    pub metrics: MetricsAccumulator,
    /// Mean over frames of `|H̃[u, u][k]|` estimated from the non-precoded CEF.
    pub trace_nonprecoded: Vec<f64>,
    /// Mean over frames of the precoded-channel magnitude `|g_u[k]|`.
    pub trace_precoded: Vec<f64>,
    /// Equalized data symbols of the first frame.
    pub constellation: Vec<Complex64>,
    pub header_failures: u64,
    pub sync_failures: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeReport {
    pub mode: PrecoderMode,
    /// Regularization used (0 for analog-only and ZF).
    pub gamma: f64,
    pub users: Vec<UserReport>,
    /// Digest over the channel realizations of every frame.
    pub channel_checksum: String,
    pub mean_alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub noise_power: f64,
    pub modes: Vec<ModeReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub scenario: Scenario,
    pub points: Vec<PointReport>,
    /// `(tx, rx)` beams chosen for every user in the first frame.
    pub beams: Vec<(SteeringAngles, SteeringAngles)>,
}

impl RunReport {
    /// Report with no points (emits header-only CSVs).
    pub fn empty(scenario: Scenario) -> Self {
        RunReport {
            scenario,
            points: Vec::new(),
            beams: Vec::new(),
        }
    }

    pub fn mode(&self, point: usize, mode: PrecoderMode) -> Option<&ModeReport> {
        self.points.get(point)?.modes.iter().find(|m| m.mode == mode)
    }
}

/// Channel, analog configuration and derived quantities of one realization.
#[derive(Debug, Clone)]
pub struct Link {
    pub channel: ChannelRealization,
    pub pairs: Vec<BeamPair>,
    pub analog: AnalogConfiguration,
    pub taps: Vec<CombinedTaps>,
    pub oracle: ReducedChannel,
}

impl Link {
    pub fn build(scenario: &Scenario, channel_seed: u64) -> Result<Link> {
        let raw = generate_channel(&scenario.channel_scenario(), channel_seed)?;
        let channel = apply_impairments(&raw, &scenario.impairment_profile())?;
        let bsc = &scenario.beam_search;
        let tx_cb = BeamCodebook::azimuth_grid(
            &scenario.bs.subarray,
            bsc.azimuth_min,
            bsc.azimuth_max,
            bsc.step,
            bsc.phase_bits(),
        )?;
        let rx_cb = BeamCodebook::azimuth_grid(
            &scenario.ue,
            bsc.azimuth_min,
            bsc.azimuth_max,
            bsc.step,
            bsc.phase_bits(),
        )?;
        let pairs = (0..channel.n_users())
            .map(|u| search_beam_pair(&channel, u, &tx_cb, &rx_cb))
            .collect::<Result<Vec<_>>>()?;
        let analog = assign_subarrays(&pairs, scenario.bs.subarrays)?;
        let taps = combined_taps(&channel, &analog.f_a, &analog.combiners)?;
        let oracle = reduce_channel(&channel, &analog.f_a, &analog.combiners)?;
        Ok(Link {
            channel,
            pairs,
            analog,
            taps,
            oracle,
        })
    }

    /// Combiner-output noise variance of every user.
    pub fn noise_vars(&self, noise_power: f64) -> Vec<f64> {
        self.analog
            .combiners
            .iter()
            .map(|w| noise_power * w.weights.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .collect()
    }
}

/// Digital precoder for `mode` on the given reduced channel, normalized.
pub fn design_precoder(
    mode: PrecoderMode,
    h_tilde: &ReducedChannel,
    analog: &AnalogConfiguration,
    gamma: f64,
) -> Result<DigitalPrecoder> {
    let f_d = match mode {
        PrecoderMode::AnalogOnly => DigitalPrecoder::identity(analog.f_a.m_rf(), h_tilde.n_users(), FFT_SIZE)?,
        PrecoderMode::Zf => rzf(h_tilde, 0.0)?,
        PrecoderMode::Rzf => rzf(h_tilde, gamma)?,
    };
    let alpha = normalize(&analog.f_a, &f_d)?;
    Ok(f_d.with_alpha(alpha))
}

pub(super) fn with_silence(chains: &[Vec<Complex64>], lead: usize) -> Vec<Vec<Complex64>> {
    chains
        .iter()
        .map(|c| {
            let mut v = vec![Complex64::new(0.0, 0.0); lead];
            v.extend_from_slice(c);
            v.resize(lead + c.len() + TAIL_SAMPLES, Complex64::new(0.0, 0.0));
            v
        })
        .collect()
}

pub(super) fn receiver_config(scenario: &Scenario) -> ReceiverConfig {
    let lead = scenario.receiver.lead_samples;
    ReceiverConfig {
        sync: SyncConfig {
            search_window: lead + CP_LEN + 1,
            ..SyncConfig::default()
        },
        timing_backoff: scenario.receiver.timing_backoff,
        max_iters: scenario.receiver.max_iters,
        ..ReceiverConfig::default()
    }
}

/// Sounds the channel and returns the estimated reduced channel, or `None`
/// when some user failed to acquire the burst.
pub(super) fn sound(
    scenario: &Scenario,
    link: &Link,
    field_chains: &(Vec<Vec<Complex64>>, TrainingField),
    noise_power: f64,
    seed: u64,
    rx_cfg: &ReceiverConfig,
) -> Result<Option<ReducedChannel>> {
    let (chains, field) = field_chains;
    let tx = with_silence(chains, scenario.receiver.lead_samples);
    let rx = transmit_combined(&tx, &link.taps, &link.noise_vars(noise_power), seed)?;
    let mut rows = Vec::with_capacity(rx.len());
    for r in &rx {
        match receive_sounding(r, field, rx_cfg) {
            Ok(s) => rows.push(s.row),
            Err(Error::FrameNotFound { .. }) | Err(Error::Framing(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    let per_subcarrier = (0..FFT_SIZE)
        .map(|k| nalgebra::DMatrix::from_fn(rows.len(), field.m_rf(), |u, i| rows[u][i][k]))
        .collect();
    Ok(Some(ReducedChannel::new(per_subcarrier)?))
}

/// Payload bits of user `u` in the frame seeded by `frame_seed`.
pub(super) fn payload_bits(frame_seed: u64, u: usize, n: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(frame_seed, TAG_BITS));
    rng.set_stream(u as u64);
    (0..n).map(|_| rng.random::<bool>() as u8).collect()
}

#[derive(Debug, Clone, Default)]
struct UserFrame {
    metrics: MetricsAccumulator,
    trace_nonprecoded: Option<Vec<f64>>,
    trace_precoded: Option<Vec<f64>>,
    constellation: Vec<Complex64>,
    header_failure: bool,
    sync_failure: bool,
}

struct FrameOutcome {
    modes: Vec<(Vec<UserFrame>, f64)>,
    checksum: String,
    beams: Vec<(SteeringAngles, SteeringAngles)>,
}

struct Context<'a> {
    scenario: &'a Scenario,
    options: &'a RunOptions,
    noise_power: f64,
    gamma: f64,
    static_link: Option<Link>,
    sounding: (Vec<Vec<Complex64>>, TrainingField),
    rx_cfg: ReceiverConfig,
}

fn run_frame(ctx: &Context, frame: usize) -> Result<FrameOutcome> {
    let scenario = ctx.scenario;
    let frame_seed = scenario.seed.wrapping_add(frame as u64);
    let owned;
    let link = match &ctx.static_link {
        Some(l) => l,
        None => {
            owned = Link::build(scenario, sub_seed(frame_seed, TAG_CHANNEL))?;
            &owned
        }
    };
    let k_users = scenario.n_users();
    let n_info = scenario.codewords_per_frame * INFO_BITS;
    let reported: Vec<usize> = match ctx.options.solo_user {
        Some(u) => vec![u],
        None => (0..k_users).collect(),
    };

    let user_bits: Vec<Vec<u8>> = (0..k_users)
        .map(|u| {
            if ctx.options.solo_user.is_some_and(|s| s != u) {
                return Vec::new();
            }
            payload_bits(frame_seed, u, n_info)
        })
        .collect();

    let estimate = match scenario.csi {
        CsiSource::Oracle => Some(link.oracle.clone()),
        CsiSource::Estimated => sound(
            scenario,
            link,
            &ctx.sounding,
            ctx.noise_power,
            sub_seed(frame_seed, TAG_SOUNDING_NOISE),
            &ctx.rx_cfg,
        )?,
    };

    let frame_cfg = FrameConfig {
        codewords_per_user: scenario.codewords_per_frame,
        pcef_repetitions: scenario.receiver.pcef_repetitions,
    };
    let noise_vars = link.noise_vars(ctx.noise_power);
    let data_seed = sub_seed(frame_seed, TAG_DATA_NOISE);
    let mut modes = Vec::with_capacity(scenario.modes.len());
    for &mode in &scenario.modes {
        let Some(h_est) = &estimate else {
            let lost = reported
                .iter()
                .map(|_| {
                    let mut uf = UserFrame {
                        sync_failure: true,
                        ..Default::default()
                    };
                    uf.metrics.add_lost_frame(n_info);
                    uf
                })
                .collect();
            modes.push((lost, f64::NAN));
            continue;
        };
        let f_d = design_precoder(mode, h_est, &link.analog, ctx.gamma)?;
        let tx = build_frame_chains(&user_bits, &f_d, link.analog.f_a.m_sub(), frame_cfg)?;
        let chains = with_silence(&tx.chains, scenario.receiver.lead_samples);
        let rx = transmit_combined(&chains, &link.taps, &noise_vars, data_seed)?;
        let mut users = Vec::with_capacity(reported.len());
        for &u in &reported {
            let payload = tx.payloads[u].as_ref().expect("reported users carry payloads");
            let mut uf = UserFrame::default();
            match receive(&rx[u], &tx.layout, u, &ctx.rx_cfg) {
                Ok(rec) => {
                    let header_ok = rec.header == Some(payload.header);
                    uf.metrics.add_frame_with_status(
                        &payload.info_bits,
                        &rec.info_bits(),
                        &payload.symbols,
                        &rec.eq_symbols,
                        Some((&payload.coded_bits, &rec.coded_hard_bits())),
                        !header_ok,
                    )?;
                    uf.header_failure = !header_ok;
                    uf.trace_nonprecoded = Some(rec.reduced_row[u].iter().map(|z| z.norm()).collect());
                    uf.trace_precoded = Some(rec.precoded_gain.iter().map(|z| z.norm()).collect());
                    if frame == 0 {
                        uf.constellation = rec.eq_symbols[..CONSTELLATION_POINTS.min(rec.eq_symbols.len())].to_vec();
                    }
                }
                Err(Error::FrameNotFound { .. }) | Err(Error::Framing(_)) => {
                    uf.sync_failure = true;
                    uf.metrics.add_lost_frame(n_info);
                }
                Err(e) => return Err(e),
            }
            users.push(uf);
        }
        modes.push((users, f_d.alpha));
    }
    Ok(FrameOutcome {
        modes,
        checksum: link.channel.checksum(),
        beams: link.pairs.iter().map(|p| (p.tx, p.rx)).collect(),
    })
}

/// Runs every configured mode at `noise_power` over the scenario's frames.
fn run_point(
    scenario: &Scenario,
    options: &RunOptions,
    noise_power: f64,
) -> Result<(PointReport, Vec<(SteeringAngles, SteeringAngles)>)> {
    if let Some(u) = options.solo_user {
        if u >= scenario.n_users() {
            return Err(Error::config("users", format!("solo user {u} not in scenario")));
        }
    }
    let mut at_point = scenario.clone();
    at_point.noise.power = noise_power;
    let scenario = &at_point;
    let static_link = if scenario.is_stochastic() {
        None
    } else {
        Some(Link::build(scenario, sub_seed(scenario.seed, TAG_CHANNEL))?)
    };
    let ctx = Context {
        scenario,
        options,
        noise_power,
        gamma: scenario.rzf_gamma(),
        static_link,
        sounding: build_sounding(scenario.bs.subarrays, scenario.bs.subarray.len())?,
        rx_cfg: receiver_config(scenario),
    };
    let outcomes: Vec<FrameOutcome> = (0..scenario.frames)
        .into_par_iter()
        .map(|f| run_frame(&ctx, f))
        .collect::<Result<_>>()?;

    let reported: Vec<usize> = match options.solo_user {
        Some(u) => vec![u],
        None => (0..scenario.n_users()).collect(),
    };
    let mut digest = Sha256::new();
    for o in &outcomes {
        digest.update(o.checksum.as_bytes());
    }
    let checksum: String = digest.finalize().iter().map(|b| format!("{b:02x}")).collect();

    let modes = scenario
        .modes
        .iter()
        .enumerate()
        .map(|(mi, &mode)| {
            let users = reported
                .iter()
                .enumerate()
                .map(|(ri, &u)| {
                    let mut report = UserReport {
                        user: u,
                        metrics: MetricsAccumulator::default(),
                        trace_nonprecoded: vec![0.0; FFT_SIZE],
                        trace_precoded: vec![0.0; FFT_SIZE],
                        constellation: Vec::new(),
                        header_failures: 0,
                        sync_failures: 0,
                    };
                    let mut traced = 0usize;
                    for o in &outcomes {
                        let uf = &o.modes[mi].0[ri];
                        report.metrics.merge(&uf.metrics);
                        report.header_failures += u64::from(uf.header_failure);
                        report.sync_failures += u64::from(uf.sync_failure);
                        if let (Some(np), Some(p)) = (&uf.trace_nonprecoded, &uf.trace_precoded) {
                            report.trace_nonprecoded.iter_mut().zip(np).for_each(|(a, b)| *a += b);
                            report.trace_precoded.iter_mut().zip(p).for_each(|(a, b)| *a += b);
                            traced += 1;
                        }
                        if report.constellation.is_empty() {
                            report.constellation = uf.constellation.clone();
                        }
                    }
                    if traced > 0 {
                        let n = traced as f64;
                        report.trace_nonprecoded.iter_mut().for_each(|a| *a /= n);
                        report.trace_precoded.iter_mut().for_each(|a| *a /= n);
                    }
                    report
                })
                .collect();
            let alphas: Vec<f64> = outcomes
                .iter()
                .map(|o| o.modes[mi].1)
                .filter(|a| a.is_finite())
                .collect();
            ModeReport {
                mode,
                gamma: match mode {
                    PrecoderMode::Rzf => ctx.gamma,
                    _ => 0.0,
                },
                users,
                channel_checksum: checksum.clone(),
                mean_alpha: if alphas.is_empty() {
                    f64::NAN
                } else {
                    alphas.iter().sum::<f64>() / alphas.len() as f64
                },
            }
        })
        .collect();
    let beams = outcomes.first().map(|o| o.beams.clone()).unwrap_or_default();
    Ok((PointReport { noise_power, modes }, beams))
}

pub fn run(scenario: &Scenario) -> Result<RunReport> {
    run_with(scenario, &RunOptions::default())
}

pub fn run_with(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    scenario.validate()?;
    let (point, beams) = run_point(scenario, options, scenario.noise.power)?;
    Ok(RunReport {
        scenario: scenario.clone(),
        points: vec![point],
        beams,
    })
}

/// One point per noise power.
pub fn sweep_noise(scenario: &Scenario, noise_powers: &[f64]) -> Result<RunReport> {
    scenario.validate()?;
    if noise_powers.is_empty() {
        return Err(Error::config("sweep", "no sweep points"));
    }
    let mut report = RunReport::empty(scenario.clone());
    for &p in noise_powers {
        if !(p >= 0.0 && p.is_finite()) {
            return Err(Error::config("sweep", format!("noise power {p}")));
        }
        let (point, beams) = run_point(scenario, &RunOptions::default(), p)?;
        report.points.push(point);
        report.beams = beams;
    }
    Ok(report)
}

/// One point per RZF regularization value (noise fixed).
pub fn sweep_gamma(scenario: &Scenario, gammas: &[f64]) -> Result<RunReport> {
    scenario.validate()?;
    if gammas.is_empty() {
        return Err(Error::config("sweep", "no sweep points"));
    }
    let mut report = RunReport::empty(scenario.clone());
    for &g in gammas {
        let mut s = scenario.clone();
        s.precoder.gamma = Some(g);
        s.validate()?;
        let (point, beams) = run_point(&s, &RunOptions::default(), s.noise.power)?;
        report.points.push(point);
        report.beams = beams;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub noise_power: f64,
    /// Analog-only EVM of every user at the calibrated noise power.
    pub evm_db: Vec<f64>,
    pub iterations: usize,
}

/// Bisection on `log10(noise_power)` so that the mean (over users) of the
/// analog-only EVM in dB reaches `target_evm_db` within `tolerance_db`.
pub fn calibrate(scenario: &Scenario, target_evm_db: f64, tolerance_db: f64) -> Result<Calibration> {
    scenario.validate()?;
    let mut analog = scenario.clone();
    analog.modes = vec![PrecoderMode::AnalogOnly];
    let evaluate = |log_p: f64| -> Result<Vec<f64>> {
        let (point, _) = run_point(&analog, &RunOptions::default(), 10f64.powf(log_p))?;
        // A link that never acquired a frame has no EVM samples; it is worse
        // than any target.
        Ok(point.modes[0]
            .users
            .iter()
            .map(|u| {
                if u.sync_failures + u.header_failures >= u.metrics.frames {
                    f64::INFINITY
                } else {
                    u.metrics.metrics().evm_db
                }
            })
            .collect())
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (mut lo, mut hi) = (-6.0f64, 4.0f64);
    let lo_evm = evaluate(lo)?;
    let hi_evm = evaluate(hi)?;
    if !(mean(&lo_evm) <= target_evm_db && target_evm_db <= mean(&hi_evm)) {
        return Err(Error::config(
            "calibrate",
            format!(
                "target {target_evm_db} dB outside reachable EVM range [{:.2}, {:.2}] dB",
                mean(&lo_evm),
                mean(&hi_evm)
            ),
        ));
    }
    let mut best = (lo, lo_evm);
    for it in 1..=60 {
        let mid = 0.5 * (lo + hi);
        let evm = evaluate(mid)?;
        let m = mean(&evm);
        best = (mid, evm);
        if (m - target_evm_db).abs() <= tolerance_db {
            return Ok(Calibration {
                noise_power: 10f64.powf(mid),
                evm_db: best.1,
                iterations: it,
            });
        }
        if m < target_evm_db {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Calibration {
        noise_power: 10f64.powf(best.0),
        evm_db: best.1,
        iterations: 60,
    })
}
