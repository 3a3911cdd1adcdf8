use mmwave_hbf::array::{build_analog_precoder, steering_vector, ArrayGeometry, HybridAnalogMatrix, SteeringAngles};
use mmwave_hbf::block::FFT_SIZE;
use mmwave_hbf::channel::{
    generate_channel, reduce_channel, BsLayout, ChannelScenario, Ray, ReducedChannel, UserPropagation,
};
use mmwave_hbf::precoder::{normalize, precode, rzf, DigitalPrecoder};
use mmwave_hbf::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn flat(m: DMatrix<Complex64>) -> ReducedChannel {
    ReducedChannel::new(vec![m; FFT_SIZE]).unwrap()
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Seeded two-user channel on the default 2 × (2×8) layout with random
/// reflections, reduced through ±5° beams.
fn testbed(seed: u64) -> (ReducedChannel, HybridAnalogMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ray = |phi: f64| Ray {
        aod: SteeringAngles::azimuth(phi + rng.random_range(-3.0..3.0)).unwrap(),
        aoa: SteeringAngles::azimuth(rng.random_range(-30.0..30.0)).unwrap(),
        gain: Complex64::from_polar(rng.random_range(0.1..1.0), rng.random_range(0.0..std::f64::consts::TAU)),
        delay: rng.random_range(0..100),
    };
    let users = vec![
        UserPropagation {
            rays: vec![ray(5.0), ray(-20.0), ray(30.0)],
            scatterers: None,
        },
        UserPropagation {
            rays: vec![ray(-5.0), ray(15.0), ray(-40.0)],
            scatterers: None,
        },
    ];
    let ue = ArrayGeometry::new(2, 2).unwrap();
    let h = generate_channel(
        &ChannelScenario {
            bs: BsLayout::paper_default(),
            ue,
            users,
        },
        seed,
    )
    .unwrap();
    let g = ArrayGeometry::new(8, 2).unwrap();
    let f_a = build_analog_precoder(vec![
        steering_vector(&g, SteeringAngles::azimuth(5.0).unwrap()).unwrap(),
        steering_vector(&g, SteeringAngles::azimuth(-5.0).unwrap()).unwrap(),
    ])
    .unwrap();
    let w = vec![
        steering_vector(&ue, SteeringAngles::azimuth(0.0).unwrap()).unwrap(),
        steering_vector(&ue, SteeringAngles::azimuth(0.0).unwrap()).unwrap(),
    ];
    (reduce_channel(&h, &f_a, &w).unwrap(), f_a)
}

#[test]
fn two_by_two_matches_closed_form() {
    let h = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.3, 0.0), c(1.0, 0.0)]);
    let gamma = 0.1;
    // Adjugate inverse of A = γI + H·H^H written out by hand.
    let hh = &h * h.adjoint();
    let (a, b, cc, d) = (hh[(0, 0)] + gamma, hh[(0, 1)], hh[(1, 0)], hh[(1, 1)] + gamma);
    let det = a * d - b * cc;
    let inv = DMatrix::from_row_slice(2, 2, &[d / det, -b / det, -cc / det, a / det]);
    let oracle = h.adjoint() * inv;
    let f = rzf(&flat(h), gamma).unwrap();
    // Frozen from the same product evaluated in double precision elsewhere.
    let frozen = DMatrix::from_row_slice(
        2,
        2,
        &[
            c(0.982928091050181, 0.0),
            c(-0.4086911536471805, 0.0),
            c(-0.21210553543714417, 0.0),
            c(0.9829280910501809, 0.0),
        ],
    );
    for k in [0, 255, 511] {
        assert!(max_diff(f.at(k), &oracle) < 1e-12);
        assert!(max_diff(f.at(k), &frozen) < 1e-12);
    }
}

#[test]
fn identity_channel_gives_identity_precoder() {
    let f = rzf(&flat(DMatrix::identity(2, 2)), 0.0).unwrap();
    assert!(max_diff(f.at(7), &DMatrix::identity(2, 2)) < 1e-15);
}

#[test]
fn singular_subcarrier_is_named() {
    let mut per_k = vec![DMatrix::identity(2, 2); FFT_SIZE];
    per_k[42] = DMatrix::from_element(2, 2, c(1.0, 0.0));
    let h = ReducedChannel::new(per_k).unwrap();
    match rzf(&h, 0.0) {
        Err(Error::SingularSubcarrier { subcarrier, .. }) => assert_eq!(subcarrier, 42),
        other => panic!("expected a singular-subcarrier error, got {other:?}"),
    }
    assert!(rzf(&h, 0.5).is_ok());
}

#[test]
fn alpha_matches_brute_force_sum() {
    let (h, f_a) = testbed(3);
    let f_d = rzf(&h, 0.01).unwrap();
    let alpha = normalize(&f_a, &f_d).unwrap();
    let mut total = 0.0;
    for k in 0..FFT_SIZE {
        for col in 0..2 {
            for ant in 0..32 {
                let chain = ant / 16;
                total += (f_a.entry(ant, chain) * f_d.at(k)[(chain, col)]).norm_sqr();
            }
        }
    }
    let brute = 1.0 / (total / FFT_SIZE as f64).sqrt();
    assert!((alpha / brute - 1.0).abs() < 1e-12);
}

#[test]
fn doubling_the_precoder_halves_alpha() {
    let (h, f_a) = testbed(4);
    let f_d = rzf(&h, 0.0).unwrap();
    let a1 = normalize(&f_a, &f_d).unwrap();
    let a2 = normalize(&f_a, &f_d.scaled(c(2.0, 0.0))).unwrap();
    assert!((a1 / a2 - 2.0).abs() < 1e-12);
}

#[test]
fn zero_precoder_is_rejected() {
    let f_a = testbed(1).1;
    let zero = DigitalPrecoder::from_matrices(vec![DMatrix::zeros(2, 2); FFT_SIZE], 0.0).unwrap();
    assert!(matches!(normalize(&f_a, &zero), Err(Error::ZeroPrecoder)));
}

#[test]
fn radiated_power_averages_to_one() {
    let (h, f_a) = testbed(5);
    let f_d = rzf(&h, 0.05).unwrap();
    let alpha = normalize(&f_a, &f_d).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // Per subcarrier, the symbol vectors are the columns of a random unitary,
    // so their outer products sum to the identity exactly.
    let mut power = 0.0;
    for col in 0..2 {
        let mut s = Vec::with_capacity(FFT_SIZE);
        for _ in 0..FFT_SIZE {
            let (p, q) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let u = [
                [Complex64::from_polar(r, p), Complex64::from_polar(r, q)],
                [Complex64::from_polar(r, p), -Complex64::from_polar(r, q)],
            ];
            s.push(vec![u[0][col], u[1][col]]);
        }
        let x = precode(&s, &f_a, &f_d, alpha).unwrap();
        power += x.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let mean = power / FFT_SIZE as f64;
    assert!((mean - 1.0).abs() < 1e-9, "{mean}");
}

#[test]
fn zero_symbols_give_zero_output() {
    let (h, f_a) = testbed(6);
    let f_d = rzf(&h, 0.0).unwrap();
    let x = precode(&vec![vec![c(0.0, 0.0); 2]; FFT_SIZE], &f_a, &f_d, 1.0).unwrap();
    assert!(x.iter().flatten().all(|z| z.norm() == 0.0));
}

#[test]
fn zero_forcing_nulls_cross_user_leakage() {
    let (h, _) = testbed(7);
    let f_d = rzf(&h, 0.0).unwrap();
    let mut worst: f64 = f64::NEG_INFINITY;
    for k in 0..FFT_SIZE {
        let eff = h.at(k) * f_d.at(k);
        assert!(max_diff(&eff, &DMatrix::identity(2, 2)) < 1e-9);
        for u in 0..2 {
            let leak = 10.0 * (eff[(u, 1 - u)].norm_sqr() / eff[(u, u)].norm_sqr()).log10();
            worst = worst.max(leak);
        }
    }
    assert!(worst <= -180.0, "{worst}");
}

#[test]
fn large_gamma_approaches_matched_filter() {
    // Unit mean entry power so that γ = 1e6 dominates H̃·H̃^H.
    let (raw, _) = testbed(8);
    let rms = (raw.iter().map(|m| m.norm_squared()).sum::<f64>() / (4 * FFT_SIZE) as f64).sqrt();
    let h = ReducedChannel::new(raw.iter().map(|m| m / c(rms, 0.0)).collect()).unwrap();
    let gamma = 1e6;
    let f_d = rzf(&h, gamma).unwrap();
    for k in (0..FFT_SIZE).step_by(17) {
        let scaled = f_d.at(k) * c(gamma, 0.0);
        let mf = h.at(k).adjoint();
        let rel = (&scaled - &mf).norm() / mf.norm();
        assert!(rel < 1e-4, "k {k}: {rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_the_channel_rescales_the_precoder(seed in 0u64..1000, scale in 0.01f64..100.0, gamma in 0.0f64..2.0) {
        let (h, _) = testbed(seed);
        let hs = ReducedChannel::new(h.iter().map(|m| m * c(scale, 0.0)).collect()).unwrap();
        let base = rzf(&h, gamma).unwrap();
        let scaled = rzf(&hs, scale * scale * gamma).unwrap();
        for k in (0..FFT_SIZE).step_by(31) {
            let expect = base.at(k) / c(scale, 0.0);
            prop_assert!((scaled.at(k) - &expect).norm() <= 1e-9 * expect.norm());
        }
    }

    #[test]
    fn zero_forcing_inverts_random_square_channels(
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9),
    ) {
        let m = DMatrix::from_iterator(3, 3, entries.iter().map(|&(a, b)| c(a, b))) + DMatrix::identity(3, 3) * c(2.0, 0.0);
        let f = rzf(&flat(m.clone()), 0.0).unwrap();
        prop_assert!(max_diff(&(&m * f.at(0)), &DMatrix::identity(3, 3)) < 1e-9);
    }
}
