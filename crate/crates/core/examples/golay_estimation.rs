//! Channel estimation from the Golay training field: NMSE against training
//! SNR for random 128-tap channels on two RF chains.

use mmwave_hbf::block::FFT_SIZE;
use mmwave_hbf::channel::ReducedChannel;
use mmwave_hbf::golay::{build_cef, estimate_reduced_channel, nmse_db};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn cn(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    Complex64::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

fn main() -> mmwave_hbf::Result<()> {
    let field = build_cef(2, 128)?;
    println!("snr_db,nmse_db");
    for snr_db in (0..=30).step_by(5) {
        let var = 10f64.powf(-snr_db as f64 / 10.0);
        let mut total = 0.0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // One user, one unit-energy tap vector per chain.
            let taps: Vec<Vec<Complex64>> = (0..2)
                .map(|_| {
                    let t: Vec<Complex64> = (0..128).map(|_| cn(&mut rng, 1.0 / 128.0)).collect();
                    let e = t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    t.into_iter().map(|z| z / e).collect()
                })
                .collect();
            let mut rx = vec![Complex64::new(0.0, 0.0); field.len()];
            for (i, h) in taps.iter().enumerate() {
                let x = field.signal(i);
                for (d, hd) in h.iter().enumerate() {
                    for t in 0..x.len() - d {
                        rx[t + d] += hd * x[t];
                    }
                }
            }
            rx.iter_mut().for_each(|z| *z += cn(&mut rng, var));
            let est = estimate_reduced_channel(&[rx], &field)?;
            let truth = ReducedChannel::new(
                (0..FFT_SIZE)
                    .map(|k| {
                        DMatrix::from_fn(1, 2, |_, i| {
                            taps[i]
                                .iter()
                                .enumerate()
                                .map(|(d, h)| {
                                    h * Complex64::cis(-2.0 * std::f64::consts::PI * (k * d) as f64 / FFT_SIZE as f64)
                                })
                                .sum()
                        })
                    })
                    .collect(),
            )?;
            total += nmse_db(&est.channel, &truth)?;
        }
        println!("{snr_db},{:.2}", total / 20.0);
    }
    Ok(())
}
