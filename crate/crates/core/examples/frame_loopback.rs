//! Two-user SC-FDE frame over an identity reduced channel with white noise:
//! synchronization, channel estimation, MMSE equalization and decoding.

use mmwave_hbf::block::{CP_LEN, FFT_SIZE};
use mmwave_hbf::phy::frame::{build_frame_chains, receive, FrameConfig, ReceiverConfig};
use mmwave_hbf::phy::ldpc::INFO_BITS;
use mmwave_hbf::phy::metrics::evm_db;
use mmwave_hbf::phy::SyncConfig;
use mmwave_hbf::precoder::DigitalPrecoder;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const LEAD: usize = 200;

fn main() -> mmwave_hbf::Result<()> {
    let config = FrameConfig {
        codewords_per_user: 8,
        pcef_repetitions: 2,
    };
    let rx_cfg = ReceiverConfig {
        sync: SyncConfig {
            search_window: LEAD + CP_LEN + 1,
            ..SyncConfig::default()
        },
        ..ReceiverConfig::default()
    };
    let f_d = DigitalPrecoder::identity(2, 2, FFT_SIZE)?;
    println!("noise_var,user,sync_index,evm_db,bit_errors");
    for noise_var in [0.0, 0.01, 0.1, 0.3] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bits: Vec<Vec<u8>> = (0..2)
            .map(|_| (0..8 * INFO_BITS).map(|_| rng.random::<bool>() as u8).collect())
            .collect();
        let frame = build_frame_chains(&bits, &f_d, 1, config)?;
        let s = (noise_var / 2.0f64).sqrt();
        for (u, chain) in frame.chains.iter().enumerate() {
            let mut rx = vec![Complex64::new(0.0, 0.0); LEAD];
            rx.extend(chain);
            rx.extend(vec![Complex64::new(0.0, 0.0); 2 * CP_LEN]);
            for z in rx.iter_mut() {
                *z += Complex64::new(
                    rng.sample::<f64, _>(StandardNormal) * s,
                    rng.sample::<f64, _>(StandardNormal) * s,
                );
            }
            let rec = receive(&rx, &frame.layout, u, &rx_cfg)?;
            let sent = frame.payloads[u].as_ref().expect("both streams active");
            let errors = rec.info_bits().iter().zip(&bits[u]).filter(|(a, b)| a != b).count();
            println!(
                "{noise_var},{u},{},{:.2},{errors}",
                rec.sync.index,
                evm_db(&sent.symbols, &rec.eq_symbols)?
            );
        }
    }
    Ok(())
}
