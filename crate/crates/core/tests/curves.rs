//! Properties of the two-stage rate at the default grids.

use zchannel::bounds::gv_rate;
use zchannel::twostage::{TwoStageConfig, TwoStageSurface};

#[test]
fn two_stage_rate_at_default_grids() {
    let surface = TwoStageSurface::new(TwoStageConfig::default()).unwrap();

    // at least GV (up to 1e-3) wherever GV is positive
    let taus: Vec<f64> = (0..=24).map(|k| k as f64 / 100.0).collect();
    let rates: Vec<f64> = taus.iter().map(|&t| surface.rate(t).rate).collect();
    for (&tau, &rate) in taus.iter().zip(&rates) {
        assert!(rate >= gv_rate(tau) - 1e-3, "tau={tau}: {rate} < gv {}", gv_rate(tau));
    }

    let tail: Vec<f64> = [0.30, 0.36, 0.40, 0.42, 0.43, 0.44, 0.46, 0.5].iter().map(|&t| surface.rate(t).rate).collect();
    let all: Vec<f64> = rates.iter().chain(&tail).copied().collect();
    assert!(all.windows(2).all(|w| w[1] <= w[0]), "{all:?}");
    assert!(tail[3] > 0.0);
    assert_eq!(tail[6], 0.0);
    assert_eq!(tail[7], 0.0);
    // the noiseless end comes close to rate 1
    assert!(rates[0] > 0.98, "{}", rates[0]);
}
