//! Random-coding lower bounds for list decoding next to GV and MRRW.
//!
//! `cargo run --release --example list_decoding_bounds [grid]`

use zchannel::bounds::{gv_rate, mrrw_rate, rcb_lower_curve, tau_star, CurveGrid, RcbParams};

fn main() -> zchannel::Result<()> {
    let points: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(400);
    let grid = CurveGrid { rate_points: points, omega_points: points, ..CurveGrid::default() };

    let lists = [1u32, 2, 5, 10, 17];
    let curves = lists.iter().map(|&l| rcb_lower_curve(l, grid)).collect::<zchannel::Result<Vec<_>>>()?;
    print!("{:>6} {:>8} {:>8}", "tau", "gv", "mrrw");
    for l in lists {
        print!(" {:>8}", format!("L={l}"));
    }
    println!();
    for k in 0..=18 {
        let tau = 0.025 * k as f64;
        let (gv, mrrw) = if tau <= 0.25 { (gv_rate(tau), mrrw_rate(tau)) } else { (0.0, 0.0) };
        print!("{tau:>6.3} {gv:>8.4} {mrrw:>8.4}");
        for c in &curves {
            print!(" {:>8.4}", c.rate_at(tau));
        }
        println!();
    }

    // one point of the underlying optimisation
    let t = tau_star(RcbParams { rate: 0.1, list_size: 3, omega: 0.5 });
    println!("\ntau*(R=0.1, L=3, omega=0.5) = {:.6} at h = {:.4}", t.value, t.h);
    Ok(())
}
