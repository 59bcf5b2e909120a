//! The two-stage rate near its zero-rate point.
//!
//! `cargo run --release --example two_stage_threshold`

use zchannel::bounds::gv_rate;
use zchannel::twostage::{plotkin_point, verify_remains, TwoStageConfig, TwoStageSurface};

fn main() -> zchannel::Result<()> {
    let p = plotkin_point();
    println!("zero-rate point: tau_max = {:.6} (omega = {:.6}, alpha = {:.6})", p.tau_max, p.omega_max, p.alpha_max);

    let report = verify_remains(17)?;
    println!("threshold stable for every L: {}", report.all_pass);

    let surface = TwoStageSurface::new(TwoStageConfig::default())?;
    println!("\n{:>5} {:>11} {:>11} {:>6} {:>5}", "tau", "two-stage", "gv", "omega", "alpha");
    for tau in [0.05, 0.1, 0.2, 0.25, 0.3, 0.35, 0.4, 0.42, 0.43, 0.44, 0.45] {
        let pt = surface.rate(tau);
        let gv = if tau <= 0.25 { gv_rate(tau) } else { 0.0 };
        println!("{tau:>5.2} {:>11.3e} {gv:>11.3e} {:>6.3} {:>5.2}", pt.rate, pt.omega, pt.alpha);
    }
    Ok(())
}
