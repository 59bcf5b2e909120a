//! Exact `tau(M)` with primal/dual certificates.
//!
//! `cargo run --release --example exact_tau [max_m] [--json]`
//! prints one row per M; `--json` dumps the certificate of the last M instead.
//! Above M = 12 a floating-point presolve proposes the basis.

use std::time::Instant;

use zchannel::lp_tau::{known_tau, solve_tau_with, verify_certificate, SolveOptions};
use zchannel::rational::to_fraction_string;

fn main() -> zchannel::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let max_m: usize = args.iter().find_map(|a| a.parse().ok()).unwrap_or(10);
    let json = args.iter().any(|a| a == "--json");
    let opts = SolveOptions { max_pivots: 10_000_000, ..SolveOptions::default() };
    if json {
        let (cert, _) = solve_tau_with(max_m, opts)?;
        println!("{}", cert.to_json());
        return Ok(());
    }
    println!("{:>3} {:>12} {:>8} {:>9} {:>10}", "M", "tau", "pivots", "verified", "time");
    for m in 2..=max_m {
        let start = Instant::now();
        let (cert, stats) = solve_tau_with(m, opts)?;
        let ok = verify_certificate(&cert).ok;
        let mark = if known_tau(m).as_ref() == Some(&cert.tau) { "" } else { "  (differs from table)" };
        println!(
            "{m:>3} {:>12} {:>8} {ok:>9} {:>10.2?}{mark}",
            to_fraction_string(&cert.tau),
            stats.pivots,
            start.elapsed()
        );
    }
    Ok(())
}
