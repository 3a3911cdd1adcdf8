//! Acceptance gate. One PASS/FAIL line per criterion; exits nonzero if any
//! criterion fails.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use mmwave_hbf::array::{array_factor, steering_vector, ArrayGeometry, SteeringAngles};
use mmwave_hbf::beam_search::{search_beam_pair, BeamCodebook};
use mmwave_hbf::block::FFT_SIZE;
use mmwave_hbf::channel::{generate_channel, BsLayout, ChannelScenario, Ray, ReducedChannel, UserPropagation};
use mmwave_hbf::golay::{build_cef, estimate_reduced_channel, nmse_db, TrainingField};
use mmwave_hbf::phy::ldpc::{INFO_BITS, WATERFALL_EBN0_DB};
use mmwave_hbf::phy::qpsk::demap_qpsk;
use mmwave_hbf::phy::{ldpc_decode, ldpc_encode, map_qpsk};
use mmwave_hbf::sim::{design_precoder, emit_report, run, CsiSource, Link, PrecoderMode, Scenario};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn reference() -> Scenario {
    Scenario::load(repo_file("scenarios/paper_table1.cfg")).expect("scenarios/paper_table1.cfg loads")
}

fn fail_unless(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gaussian(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    Complex64::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

fn rel_std(t: &[f64]) -> f64 {
    let n = t.len() as f64;
    let mean = t.iter().sum::<f64>() / n;
    (t.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt() / mean
}

/// Hybrid gain and channel flattening both come from the full reference run.
fn reference_run() -> (Outcome, Outcome) {
    let s = reference();
    let started = Instant::now();
    let report = match run(&s) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let secs = started.elapsed().as_secs_f64();
    let analog = report
        .mode(0, PrecoderMode::AnalogOnly)
        .expect("analog_only configured");
    let hybrid = report.mode(0, PrecoderMode::Rzf).expect("rzf configured");

    let mut ok = secs <= 300.0 && s.frames == 100;
    let mut detail = Vec::new();
    let mut flat_ok = s.impairments.edge_rolloff_db >= 6.0;
    let mut flat_detail = vec![format!("rolloff {} dB", s.impairments.edge_rolloff_db)];
    for (a, h) in analog.users.iter().zip(&hybrid.users) {
        let (ma, mh) = (a.metrics.metrics(), h.metrics.metrics());
        let gain = ma.evm_db - mh.evm_db;
        ok &= (-7.0..=-4.0).contains(&ma.evm_db) && gain >= 5.0 && mh.per == 0.0 && ma.per > 0.5;
        detail.push(format!(
            "user {}: analog EVM {:.2} dB PER {:.2}, rzf EVM {:.2} dB PER {:.2}, gain {:.2} dB",
            a.user, ma.evm_db, ma.per, mh.evm_db, mh.per, gain
        ));
        let ratio = rel_std(&h.trace_precoded) / rel_std(&h.trace_nonprecoded);
        flat_ok &= ratio <= 0.3;
        flat_detail.push(format!("user {} ratio {:.3}", h.user, ratio));
    }
    detail.push(format!("{} frames in {secs:.1} s", s.frames));
    (
        fail_unless(ok, detail.join("; ")),
        fail_unless(flat_ok, flat_detail.join("; ")),
    )
}

fn exact_nulling() -> Outcome {
    let started = Instant::now();
    let mut s = reference();
    s.noise.power = 0.0;
    s.modes = vec![PrecoderMode::Zf];
    s.csi = CsiSource::Oracle;
    s.frames = 10;
    s.codewords_per_frame = 10;
    s.validate().map_err(|e| e.to_string())?;

    // Ray-only scenario, so the channel does not depend on the seed.
    let link = Link::build(&s, s.seed).map_err(|e| e.to_string())?;
    let f_d = design_precoder(PrecoderMode::Zf, &link.oracle, &link.analog, 0.0).map_err(|e| e.to_string())?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..FFT_SIZE {
        let eff = link.oracle.at(k) * f_d.at(k);
        for u in 0..eff.nrows() {
            for v in (0..eff.ncols()).filter(|&v| v != u) {
                worst = worst.max(10.0 * (eff[(u, v)].norm_sqr() / eff[(u, u)].norm_sqr()).log10());
            }
        }
    }
    let report = run(&s).map_err(|e| e.to_string())?;
    let bers: Vec<f64> = report.points[0].modes[0]
        .users
        .iter()
        .map(|u| u.metrics.metrics().ber)
        .collect();
    let secs = started.elapsed().as_secs_f64();
    fail_unless(
        worst <= -120.0 && bers.iter().all(|&b| b == 0.0) && secs <= 30.0,
        format!("worst leakage {worst:.1} dB, BER {bers:?}, {secs:.1} s"),
    )
}

fn random_taps(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let mut taps: Vec<Complex64> = (0..len).map(|_| gaussian(rng, 1.0)).collect();
    let e = taps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    taps.iter_mut().for_each(|z| *z /= e);
    taps
}

fn through(field: &TrainingField, chains: &[Vec<Complex64>]) -> Vec<Complex64> {
    let mut rx = vec![Complex64::new(0.0, 0.0); field.len()];
    for (i, taps) in chains.iter().enumerate() {
        let x = field.signal(i);
        for (d, h) in taps.iter().enumerate() {
            for t in 0..x.len() - d {
                rx[t + d] += h * x[t];
            }
        }
    }
    rx
}

fn truth(users: &[Vec<Vec<Complex64>>]) -> ReducedChannel {
    let resp = |taps: &[Complex64], k: usize| -> Complex64 {
        taps.iter()
            .enumerate()
            .map(|(d, h)| h * Complex64::cis(-2.0 * std::f64::consts::PI * (k * d) as f64 / FFT_SIZE as f64))
            .sum()
    };
    ReducedChannel::new(
        (0..FFT_SIZE)
            .map(|k| DMatrix::from_fn(users.len(), users[0].len(), |u, i| resp(&users[u][i], k)))
            .collect(),
    )
    .expect("square per-subcarrier matrices")
}

fn golay_fidelity() -> Outcome {
    let field = build_cef(2, 128).map_err(|e| e.to_string())?;
    let trial = |seed: u64, noise_var: f64| -> Result<f64, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let users: Vec<Vec<Vec<Complex64>>> = (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        let len = rng.random_range(1..=128);
                        random_taps(&mut rng, len)
                    })
                    .collect()
            })
            .collect();
        let rx: Vec<Vec<Complex64>> = users
            .iter()
            .map(|u| {
                let mut r = through(&field, u);
                if noise_var > 0.0 {
                    r.iter_mut().for_each(|z| *z += gaussian(&mut rng, noise_var));
                }
                r
            })
            .collect();
        let est = estimate_reduced_channel(&rx, &field).map_err(|e| e.to_string())?;
        nmse_db(&est.channel, &truth(&users)).map_err(|e| e.to_string())
    };
    let mut worst_clean = f64::NEG_INFINITY;
    let mut noisy = Vec::with_capacity(100);
    for seed in 0..100 {
        worst_clean = worst_clean.max(trial(seed, 0.0)?);
        // Unit-energy taps and unit-power training: 20 dB is variance 0.01.
        noisy.push(trial(1000 + seed, 0.01)?);
    }
    let mean = noisy.iter().sum::<f64>() / noisy.len() as f64;
    let worst = noisy.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    fail_unless(
        worst_clean <= -100.0 && mean <= -20.0 && worst <= -20.0,
        format!("noiseless worst {worst_clean:.1} dB; 20 dB SNR mean {mean:.2} dB (worst seed {worst:.2} dB)"),
    )
}

fn array_and_beams() -> Outcome {
    let mut worst: f64 = 0.0;
    for (m_y, m_z) in [(8, 2), (2, 2)] {
        let g = ArrayGeometry::new(m_y, m_z).map_err(|e| e.to_string())?;
        for phi in -60..=60 {
            let dir = SteeringAngles::azimuth(phi as f64).map_err(|e| e.to_string())?;
            let w = steering_vector(&g, dir).map_err(|e| e.to_string())?;
            let af = array_factor(&g, &w, dir).map_err(|e| e.to_string())?;
            worst = worst.max((af.norm() - g.len() as f64).abs());
        }
    }
    let ue = ArrayGeometry::new(2, 2).map_err(|e| e.to_string())?;
    let tx_cb = BeamCodebook::azimuth_grid(&ArrayGeometry::new(8, 2).unwrap(), -60.0, 60.0, 1.0, Some(8))
        .map_err(|e| e.to_string())?;
    let rx_cb = BeamCodebook::azimuth_grid(&ue, -60.0, 60.0, 1.0, Some(8)).map_err(|e| e.to_string())?;
    let mut beams = Vec::new();
    let mut exact = true;
    for side in [5.0, -5.0] {
        let ray = Ray {
            aod: SteeringAngles::azimuth(side).unwrap(),
            aoa: SteeringAngles::azimuth(-side).unwrap(),
            gain: Complex64::new(1.0, 0.0),
            delay: 0,
        };
        let h = generate_channel(
            &ChannelScenario {
                bs: BsLayout::paper_default(),
                ue,
                users: vec![UserPropagation {
                    rays: vec![ray],
                    scatterers: None,
                }],
            },
            0,
        )
        .map_err(|e| e.to_string())?;
        let p = search_beam_pair(&h, 0, &tx_cb, &rx_cb).map_err(|e| e.to_string())?;
        exact &= p.tx.phi == side && p.rx.phi == -side;
        beams.push(format!("({}, {})", p.tx.phi, p.rx.phi));
    }
    fail_unless(
        worst <= 1e-9 && exact,
        format!("max |AF| peak error {worst:.1e}; single-ray beams {}", beams.join(" ")),
    )
}

/// Coded BER of QPSK over complex AWGN at `ebn0_db` (rate 1/2, so symbol
/// SNR equals Eb/N0).
fn coded_ber(ebn0_db: f64, codewords: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let var = 10f64.powf(-ebn0_db / 10.0);
    let mut errors = 0usize;
    for _ in 0..codewords {
        let info: Vec<u8> = (0..INFO_BITS).map(|_| rng.random::<bool>() as u8).collect();
        let cw = ldpc_encode(&info).map_err(|e| e.to_string())?;
        let mut y = map_qpsk(&cw).map_err(|e| e.to_string())?;
        if var > 0.0 {
            y.iter_mut().for_each(|z| *z += gaussian(&mut rng, var));
        }
        let llr = demap_qpsk(&y, var.max(1e-9)).map_err(|e| e.to_string())?;
        let out = ldpc_decode(&llr, 20).map_err(|e| e.to_string())?;
        errors += out.info.iter().zip(&info).filter(|(a, b)| a != b).count();
    }
    Ok(errors as f64 / (codewords * INFO_BITS) as f64)
}

fn coding_chain() -> Outcome {
    let above = coded_ber(WATERFALL_EBN0_DB + 0.25, 2000, 11)?;
    let below = coded_ber(WATERFALL_EBN0_DB - 0.25, 2000, 12)?;
    let clean = coded_ber(f64::INFINITY, 1000, 13)?;
    fail_unless(
        above < 1e-4 && below >= 1e-4 && clean == 0.0,
        format!(
            "anchor {WATERFALL_EBN0_DB} dB: BER {above:.2e} at +0.25 dB, {below:.2e} at -0.25 dB; noiseless BER {clean} over 1000 codewords"
        ),
    )
}

fn determinism() -> Outcome {
    let mut s = reference();
    s.frames = 4;
    s.codewords_per_frame = 10;
    let mut files = Vec::new();
    let mut checksums = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let report = run(&s).map_err(|e| e.to_string())?;
        emit_report(&report, dir.path()).map_err(|e| e.to_string())?;
        files.push(std::fs::read(dir.path().join("metrics.csv")).map_err(|e| e.to_string())?);
        checksums.extend(report.points[0].modes.iter().map(|m| m.channel_checksum.clone()));
    }
    let shared = checksums.windows(2).all(|w| w[0] == w[1]) && !checksums[0].is_empty();
    fail_unless(
        files[0] == files[1] && shared,
        format!(
            "metrics.csv {} bytes, identical: {}; channel checksum {}… shared by {} mode runs: {shared}",
            files[0].len(),
            files[0] == files[1],
            &checksums[0][..12.min(checksums[0].len())],
            checksums.len()
        ),
    )
}

fn main() -> ExitCode {
    let (hybrid, flattening) = reference_run();
    let results = [
        ("1 hybrid gain reproduction", hybrid),
        ("2 exact nulling", exact_nulling()),
        ("3 channel flattening", flattening),
        ("4 Golay estimation fidelity", golay_fidelity()),
        ("5 array model and beam search", array_and_beams()),
        ("6 coding chain", coding_chain()),
        ("7 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS [{name}] {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL [{name}] {d}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
