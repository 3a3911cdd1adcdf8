//! Per-subcarrier RZF on a static two-user link: cross-user leakage and
//! power normalization as the regularization grows. A few subcarriers of
//! the reference channel are close to singular, which dominates the worst case.

use mmwave_hbf::block::FFT_SIZE;
use mmwave_hbf::precoder::{normalize, rzf};
use mmwave_hbf::sim::{Link, Scenario};

fn main() -> mmwave_hbf::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scenarios/paper_table1.cfg".into());
    let s = Scenario::load(&path)?;
    let link = Link::build(&s, s.seed)?;
    println!("gamma,alpha,median_leakage_db,worst_leakage_db,mean_own_gain");
    for gamma in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        let f_d = rzf(&link.oracle, gamma)?;
        let alpha = normalize(&link.analog.f_a, &f_d)?;
        let mut leak = Vec::with_capacity(2 * FFT_SIZE);
        let mut own = 0.0;
        for k in 0..FFT_SIZE {
            let eff = link.oracle.at(k) * f_d.at(k);
            for u in 0..2 {
                leak.push(10.0 * (eff[(u, 1 - u)].norm_sqr() / eff[(u, u)].norm_sqr()).log10());
                own += eff[(u, u)].norm() / (2 * FFT_SIZE) as f64;
            }
        }
        leak.sort_by(f64::total_cmp);
        println!(
            "{gamma},{alpha:.4},{:.1},{:.1},{own:.4}",
            leak[leak.len() / 2],
            leak[leak.len() - 1]
        );
    }
    Ok(())
}
