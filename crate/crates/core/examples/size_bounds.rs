//! Closed-form size and rate bounds.
//!
//! `cargo run --example size_bounds`

use zchannel::bounds::{bassalygo_size_bound, levenshtein_rate_bound, list_plotkin_holds, plotkin_symmetric_size, w0, zplotkin_size_bound};

fn main() -> zchannel::Result<()> {
    // the weight range [t+1, w0] is non-empty only for n <= (t+1)^2
    for (n, t) in [(8, 2), (10, 3), (15, 3), (24, 4)] {
        let hi = w0(n, t)?;
        for w in t + 1..=hi.floor() as u64 {
            match bassalygo_size_bound(n, w, t) {
                Ok(b) => println!("n={n} t={t} w={w}: at most {b} words"),
                Err(e) => println!("n={n} t={t} w={w}: {e}"),
            }
        }
    }
    for eps in [0.01, 0.05, 0.1] {
        println!(
            "fraction 1/4 + {eps}: symmetric cap {}, asymmetric cap {:.1}",
            plotkin_symmetric_size(eps)?,
            zplotkin_size_bound(eps)?
        );
    }
    println!("rate cap at weight 0.4, error fraction 0.15: {:.6}", levenshtein_rate_bound(0.4, 0.15)?);
    println!("list-2 code, 10 words, omega 0.5, tau 0.4 admissible: {}", list_plotkin_holds(10, 2, 0.5, 0.4));
    Ok(())
}
