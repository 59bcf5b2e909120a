//! Exhaustive code searches and random-code radii.
//!
//! `cargo run --release --example code_search`

use zchannel::oracle::{best_list_code, max_code, max_constant_weight_code, sample_code_radius_detailed, SearchBudget};
use zchannel::rational::to_f64;

fn main() -> zchannel::Result<()> {
    let budget = SearchBudget::default();

    println!("largest codes with d_Z >= d:");
    for n in 3..=6 {
        let sizes: Vec<String> = (1..=3).map(|t| max_code(n, 2 * t + 2, &budget).map(|r| r.objective.to_string())).collect::<zchannel::Result<_>>()?;
        println!("  n={n}: t=1..3 -> {}", sizes.join(" "));
    }

    let cw = max_constant_weight_code(8, 4, 4, &budget)?;
    println!("\nweight-4 words of length 8 at d_Z >= 4: {} words (optimal: {})", cw.objective, cw.optimal);

    let list = best_list_code(6, 3, 4, 2, &budget)?;
    println!("\nbest 4-word list-2 code in weight 3, length 6 (radius {}):", list.objective);
    print!("{}", list.code.to_text());

    let samples = sample_code_radius_detailed(32, 8, 0.5, 1, 200, 7)?;
    let mean = |f: fn(&zchannel::oracle::RadiusSample) -> f64| samples.iter().map(f).sum::<f64>() / samples.len() as f64;
    println!(
        "\nrandom codes n=32, M=8: mean min pair radius {:.4}, mean pair radius {:.4}",
        mean(|s| to_f64(&s.min)),
        mean(|s| to_f64(&s.subset_mean))
    );
    Ok(())
}
