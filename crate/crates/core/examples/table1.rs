//! Analog-only against hybrid RZF on the reference two-user scenario, written to a
//! report directory. Usage: table1 [scenario] [out dir] [frames]

use mmwave_hbf::sim::{emit_report, run, Scenario};

fn main() -> mmwave_hbf::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "scenarios/paper_table1.cfg".into());
    let out = args.next().unwrap_or_else(|| "out/table1".into());
    let mut s = Scenario::load(&path)?;
    if let Some(frames) = args.next().and_then(|f| f.parse().ok()) {
        s.frames = frames;
    }
    let report = run(&s)?;
    println!(
        "{:<12} {:>4} {:>10} {:>6} {:>8}",
        "mode", "user", "BER", "PER", "EVM dB"
    );
    for m in &report.points[0].modes {
        for u in &m.users {
            let x = u.metrics.metrics();
            println!(
                "{:<12} {:>4} {:>10.2e} {:>6.2} {:>8.2}",
                m.mode.name(),
                u.user + 1,
                x.ber,
                x.per,
                x.evm_db
            );
        }
    }
    for p in emit_report(&report, std::path::Path::new(&out))? {
        println!("wrote {}", p.display());
    }
    Ok(())
}
