//! Coded BER of the pinned rate-1/2 LDPC code with QPSK over AWGN.
//! Usage: ldpc_waterfall [codewords per point]

use mmwave_hbf::phy::ldpc::{INFO_BITS, WATERFALL_EBN0_DB};
use mmwave_hbf::phy::qpsk::demap_qpsk;
use mmwave_hbf::phy::{ldpc_decode, ldpc_encode, map_qpsk};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> mmwave_hbf::Result<()> {
    let codewords: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    println!("# regression anchor {WATERFALL_EBN0_DB} dB");
    println!("ebn0_db,ber,fer");
    for ebn0 in [1.0, 1.5, 2.0, 2.25, 2.5, 2.75, 3.0] {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        // Rate 1/2 QPSK: Es/N0 equals Eb/N0.
        let var = 10f64.powf(-ebn0 / 10.0);
        let s = (var / 2.0).sqrt();
        let (mut bit_errors, mut frame_errors) = (0, 0);
        for _ in 0..codewords {
            let info: Vec<u8> = (0..INFO_BITS).map(|_| rng.random::<bool>() as u8).collect();
            let y: Vec<Complex64> = map_qpsk(&ldpc_encode(&info)?)?
                .into_iter()
                .map(|x| {
                    x + Complex64::new(
                        rng.sample::<f64, _>(StandardNormal) * s,
                        rng.sample::<f64, _>(StandardNormal) * s,
                    )
                })
                .collect();
            let out = ldpc_decode(&demap_qpsk(&y, var)?, 20)?;
            let e = out.info.iter().zip(&info).filter(|(a, b)| a != b).count();
            bit_errors += e;
            frame_errors += usize::from(e > 0);
        }
        println!(
            "{ebn0},{:.3e},{:.3e}",
            bit_errors as f64 / (codewords * INFO_BITS) as f64,
            frame_errors as f64 / codewords as f64
        );
    }
    Ok(())
}
