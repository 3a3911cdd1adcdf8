//! Exhaustive beam-pair search for the reference two-user scenario, then the sub-array
//! assignment it produces.

use mmwave_hbf::beam_search::{assign_subarrays, search_beam_pair, BeamCodebook};
use mmwave_hbf::channel::{apply_impairments, generate_channel};
use mmwave_hbf::sim::Scenario;

fn main() -> mmwave_hbf::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "scenarios/paper_table1.cfg".into());
    let s = Scenario::load(&path)?;
    let h = apply_impairments(
        &generate_channel(&s.channel_scenario(), s.seed)?,
        &s.impairment_profile(),
    )?;
    let b = &s.beam_search;
    let tx = BeamCodebook::azimuth_grid(&s.bs.subarray, b.azimuth_min, b.azimuth_max, b.step, b.phase_bits())?;
    let rx = BeamCodebook::azimuth_grid(&s.ue, b.azimuth_min, b.azimuth_max, b.step, b.phase_bits())?;
    let pairs = (0..h.n_users())
        .map(|u| search_beam_pair(&h, u, &tx, &rx))
        .collect::<mmwave_hbf::Result<Vec<_>>>()?;
    for (u, p) in pairs.iter().enumerate() {
        println!(
            "user {u}: tx {:+} deg, rx {:+} deg, wideband power {:.1} dB",
            p.tx.phi,
            p.rx.phi,
            10.0 * p.power.log10()
        );
    }
    let cfg = assign_subarrays(&pairs, s.bs.subarrays)?;
    println!(
        "F_A is {} x {}, {} combiners",
        cfg.f_a.m_sub() * cfg.f_a.m_rf(),
        cfg.f_a.m_rf(),
        cfg.combiners.len()
    );
    Ok(())
}
