//! Runs the two-stage protocol against every admissible error pattern.
//!
//! `cargo run --example feedback_protocol [fixture.txt]` loads a parameter
//! file; without one it designs a fresh configuration (stage one: a weight-4
//! code of length 8 with d_Z >= 4; stage two: length-4 codes) and prints it.

use zchannel::oracle::{max_constant_weight_code, SearchBudget};
use zchannel::protocol::{adversary_exhaustive, design_stage2_family, validate_parameters, ProtocolParams};

fn main() -> zchannel::Result<()> {
    let params = match std::env::args().nth(1) {
        Some(path) => ProtocolParams::from_text(&std::fs::read_to_string(path)?)?,
        None => {
            let budget = SearchBudget::default();
            let stage1 = max_constant_weight_code(8, 4, 4, &budget)?.code;
            let family = design_stage2_family(&stage1, 3, 4, &budget)?;
            let p = ProtocolParams::new(3, stage1, family)?;
            print!("{}", p.to_text());
            p
        }
    };
    let report = validate_parameters(&params)?;
    for row in &report.rows {
        eprintln!(
            "e={} list<={} attained={:?} remaining={} {}",
            row.e,
            row.list_bound,
            row.attained,
            row.remaining,
            row.issue.as_deref().unwrap_or("ok")
        );
    }
    for m in 0..params.message_count() {
        let v = adversary_exhaustive(&params, m)?;
        eprintln!("m={m:2} patterns={:3} pass={} hash={}", v.patterns, v.pass, &v.transcript_hash[..16]);
    }
    Ok(())
}
