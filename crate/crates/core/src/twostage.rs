//! Rate optimizer for two-stage coding with one use of feedback.
//!
//! A message is sent in two blocks of `alpha n` and `(1 - alpha) n` symbols.
//! Stage one uses a random constant-weight code of weight fraction `omega`
//! and rate `R`; after seeing the stage-one output the sender knows how many
//! errors `x alpha n` hit stage one and how many candidates the receiver is
//! left with, and picks a stage-two code that separates those candidates under
//! the remaining `tau n - x alpha n` errors.
//!
//! [`check_star`] decides whether `(omega, alpha, R)` survives every split of
//! the error budget; [`TwoStageSurface`] maximises `alpha R` over grids.
//! [`plotkin_point`] and [`verify_remains`] cover the fraction `tau_max`
//! where the achievable rate reaches zero.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{binary_entropy, tau_star, BoundCurve, CurveKind, RcbParams};
use crate::error::{invalid, Result};
use crate::lp_tau::{tau_of_l, tau_of_l_f64, TauSource};
use crate::rational::{pow, ratio, to_f64, Rational};

/// Grids and tolerances of the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageConfig {
    /// Largest candidate list resolved by a finite stage-two code.
    pub l_up: u32,
    pub omega_grid: Vec<f64>,
    /// Values in `(0, 1]`; `alpha = 1` is a single-stage code.
    pub alpha_grid: Vec<f64>,
    pub rate_grid: Vec<f64>,
    /// Points of the uniform stage-one error grid on the exponential-list range.
    pub x_points: usize,
    /// Margin by which every condition must hold.
    pub tol: f64,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        TwoStageConfig::with_resolution(17, 200, 100, 200, 10, 200)
    }
}

impl TwoStageConfig {
    /// `omega = k/omega_steps`, `alpha = k/alpha_steps` (including 1), rates
    /// `k/rate_steps` plus `per_decade` log-spaced rates in `[1e-9, 1e-2)`.
    pub fn with_resolution(
        l_up: u32,
        omega_steps: usize,
        alpha_steps: usize,
        rate_steps: usize,
        per_decade: usize,
        x_points: usize,
    ) -> Self {
        let omega_grid = (1..omega_steps).map(|k| k as f64 / omega_steps as f64).collect();
        let alpha_grid = (1..=alpha_steps).map(|k| k as f64 / alpha_steps as f64).collect();
        let mut rate_grid: Vec<f64> = (1..rate_steps).map(|k| k as f64 / rate_steps as f64).collect();
        for k in 0..7 * per_decade {
            rate_grid.push(10f64.powf(-9.0 + k as f64 / per_decade as f64));
        }
        rate_grid.sort_by(f64::total_cmp);
        rate_grid.dedup();
        TwoStageConfig { l_up, omega_grid, alpha_grid, rate_grid, x_points, tol: 1e-9 }
    }

    fn validate(&self) -> Result<()> {
        if self.l_up < 1 {
            return Err(invalid("l_up must be at least 1"));
        }
        let open = |v: &f64| *v > 0.0 && *v < 1.0;
        if !self.omega_grid.iter().all(open) || self.omega_grid.is_empty() {
            return Err(invalid("omega grid must be non-empty and inside (0, 1)"));
        }
        if !self.alpha_grid.iter().all(|a| *a > 0.0 && *a <= 1.0) || self.alpha_grid.is_empty() {
            return Err(invalid("alpha grid must be non-empty and inside (0, 1]"));
        }
        if !self.rate_grid.iter().all(open) {
            return Err(invalid("rate grid must lie inside (0, 1)"));
        }
        if self.x_points == 0 {
            return Err(invalid("x_points must be positive"));
        }
        Ok(())
    }

    fn list_taus(&self) -> Vec<f64> {
        // index L; entries 0 and 1 unused (a single candidate needs no code)
        (0..=self.l_up as usize)
            .map(|l| if l < 2 { f64::INFINITY } else { tau_of_l_f64(l) })
            .collect()
    }
}

// h(x/(1-omega+x)) - h((1 - sqrt(1 - 4 t1/(1+omega-x)))/2), scaled by
// (1-omega+x); zero when the square root or the difference goes negative.
fn r2_bracket(x: f64, omega: f64, t1: f64) -> f64 {
    let span = 1.0 - omega + x;
    let disc = 1.0 - 4.0 * t1 / (1.0 + omega - x);
    if disc < 0.0 {
        return 0.0;
    }
    let diff = binary_entropy(x / span) - binary_entropy((1.0 - disc.sqrt()) / 2.0);
    (span * diff).max(0.0)
}

/// Stage-two rate forced by `tau1` stage-one errors when the candidate list
/// is exponential.
pub fn r2(alpha: f64, tau1: f64, omega: f64, r1: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(omega > 0.0 && omega < 1.0) || !(0.0..=omega).contains(&tau1) {
        return Err(invalid(format!("need 0 <= tau1 <= omega < 1, got tau1={tau1}, omega={omega}")));
    }
    if !(r1 >= 0.0) {
        return Err(invalid(format!("R1 must be non-negative, got {r1}")));
    }
    let t1 = tau_star(RcbParams { rate: r1, list_size: 1, omega }).value;
    Ok(alpha / (1.0 - alpha) * r2_bracket(tau1, omega, t1))
}

// tau*(R, L, omega) for L = 0..=l_up, with tau*_0 = 0.
fn star_row(omega: f64, rate: f64, l_up: u32) -> Vec<f64> {
    let mut row = Vec::with_capacity(l_up as usize + 1);
    row.push(0.0);
    for l in 1..=l_up {
        row.push(tau_star(RcbParams { rate, list_size: l, omega }).value);
    }
    row
}

// Condition check for one cell given its tau* row. A stage-one error
// fraction x leaves at most L candidates when x < tau*_L - tol for some
// L <= l_up (the smallest such L), and exponentially many otherwise.
#[allow(clippy::too_many_arguments)]
fn check_row(
    stars: &[f64],
    list_taus: &[f64],
    omega: f64,
    alpha: f64,
    tau: f64,
    x_points: usize,
    tol: f64,
) -> bool {
    if tau <= 0.0 {
        return true;
    }
    let l_up = stars.len() - 1;
    if alpha >= 1.0 {
        // no second stage: every x < min(omega, tau) must leave one candidate
        return tau.min(omega) <= stars[1] - tol;
    }
    let x_end = omega.min(tau / alpha);
    let residual = |x: f64| (tau - alpha * x) / (1.0 - alpha);
    // The list size only grows with x while the residual shrinks, so each
    // list size binds at the left end of its range.
    let mut left = 0.0f64;
    for l in 1..=l_up {
        left = left.max(stars[l - 1] - tol);
        if left >= x_end {
            return true;
        }
        if left < stars[l] - tol && l >= 2 && residual(left) > list_taus[l] - tol {
            return false;
        }
    }
    let x_start = left.max(stars[l_up] - tol).max(0.0);
    if x_start >= x_end {
        return true;
    }
    let t1 = stars[1];
    let scale = alpha / (1.0 - alpha);
    let step = (omega - x_start) / x_points as f64;
    for k in 0..x_points {
        let x = x_start + step * k as f64;
        if x >= x_end {
            break;
        }
        let q = residual(x) + tol;
        // q <= tau*(R2, 1, 1/2) = h^-1(1 - R2)/2  iff  R2 <= 1 - h(2q)
        if q > 0.25 || scale * r2_bracket(x, omega, t1) > 1.0 - binary_entropy(2.0 * q) {
            return false;
        }
    }
    true
}

/// Whether the strategy `(omega, alpha, R)` corrects a fraction `tau` of
/// asymmetric errors under every split of the errors between the stages.
pub fn check_star(omega: f64, alpha: f64, rate: f64, tau: f64, cfg: &TwoStageConfig) -> bool {
    let stars = star_row(omega, rate, cfg.l_up);
    check_row(&stars, &cfg.list_taus(), omega, alpha, tau, cfg.x_points, cfg.tol)
}

/// The best grid point found for one error fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStagePoint {
    pub tau: f64,
    pub rate: f64,
    pub omega: f64,
    pub alpha: f64,
    pub stage_one_rate: f64,
}

/// `tau*_L` tables over the `(omega, R)` grid, built once and reused for
/// every error fraction.
pub struct TwoStageSurface {
    cfg: TwoStageConfig,
    list_taus: Vec<f64>,
    // per omega: rates (descending, at most h(omega)) with their tau* rows
    rows: Vec<Vec<(f64, Vec<f64>)>>,
}

impl TwoStageSurface {
    pub fn new(cfg: TwoStageConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rates = cfg.rate_grid.clone();
        rates.sort_by(|a, b| b.total_cmp(a));
        let rows = cfg
            .omega_grid
            .par_iter()
            .map(|&omega| {
                let cap = binary_entropy(omega);
                rates
                    .iter()
                    .filter(|&&r| r <= cap)
                    .map(|&r| (r, star_row(omega, r, cfg.l_up)))
                    .collect()
            })
            .collect();
        Ok(TwoStageSurface { list_taus: cfg.list_taus(), cfg, rows })
    }

    pub fn config(&self) -> &TwoStageConfig {
        &self.cfg
    }

    // Largest R in [0, h(omega)] on a dyadic grid with tau <= tau*(R,1,omega) - tol.
    fn single_stage_rate(&self, omega: f64, tau: f64) -> f64 {
        let tol = self.cfg.tol;
        let ok = |r: f64| tau.min(omega) <= tau_star(RcbParams { rate: r, list_size: 1, omega }).value - tol;
        if !ok(0.0) {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, binary_entropy(omega));
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Maximum of `alpha R` over the grids subject to [`check_star`]; ties go
    /// to the smaller `omega`, then `alpha`, then `R`.
    pub fn rate(&self, tau: f64) -> TwoStagePoint {
        let cfg = &self.cfg;
        let none = TwoStagePoint { tau, rate: 0.0, omega: 0.0, alpha: 0.0, stage_one_rate: 0.0 };
        let per_omega: Vec<TwoStagePoint> = cfg
            .omega_grid
            .par_iter()
            .zip(&self.rows)
            .map(|(&omega, rows)| {
                let mut best = none;
                for &alpha in &cfg.alpha_grid {
                    if alpha >= 1.0 {
                        let r = self.single_stage_rate(omega, tau);
                        if r > best.rate {
                            best = TwoStagePoint { tau, rate: r, omega, alpha, stage_one_rate: r };
                        }
                        continue;
                    }
                    for (r, stars) in rows {
                        if alpha * r <= best.rate {
                            break;
                        }
                        if check_row(stars, &self.list_taus, omega, alpha, tau, cfg.x_points, cfg.tol) {
                            best = TwoStagePoint { tau, rate: alpha * r, omega, alpha, stage_one_rate: *r };
                            break;
                        }
                    }
                }
                best
            })
            .collect();
        per_omega
            .into_iter()
            .fold(none, |acc, p| if p.rate > acc.rate { p } else { acc })
    }

    /// Rates over a strictly increasing grid of error fractions.
    pub fn curve(&self, taus: &[f64]) -> Result<BoundCurve> {
        if taus.windows(2).any(|w| w[1] <= w[0]) || taus.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(invalid("tau grid must be strictly increasing inside [0, 1)"));
        }
        let samples = taus.iter().map(|&t| (t, self.rate(t).rate)).collect();
        let c = &self.cfg;
        Ok(BoundCurve {
            kind: CurveKind::TwoStage { l_up: c.l_up },
            samples,
            grid: format!(
                "omega_points={} alpha_points={} rate_points={} x_points={} tol={:e}",
                c.omega_grid.len(),
                c.alpha_grid.len(),
                c.rate_grid.len(),
                c.x_points,
                c.tol
            ),
        })
    }
}

/// Grid maximum of `alpha R` subject to [`check_star`]; 0 when nothing is feasible.
pub fn two_stage_rate(tau: f64, cfg: &TwoStageConfig) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) {
        return Err(invalid(format!("tau must lie in [0, 1), got {tau}")));
    }
    Ok(TwoStageSurface::new(cfg.clone())?.rate(tau).rate)
}

/// Maximiser of `(omega + omega^3)/(1 + 4 omega^3)` with the matching split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotkinPoint {
    pub omega_max: f64,
    pub alpha_max: f64,
    pub tau_max: f64,
}

impl PlotkinPoint {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"omega_max\": {:.12}, \"alpha_max\": {:.12}, \"tau_max\": {:.12}}}",
            self.omega_max, self.alpha_max, self.tau_max
        )
    }
}

/// `1 + 3 w^2 - 8 w^3`, the numerator of the derivative of
/// `(w + w^3)/(1 + 4 w^3)` up to a positive factor.
pub fn plotkin_stationarity(omega: f64) -> f64 {
    1.0 + 3.0 * omega * omega - 8.0 * omega.powi(3)
}

pub fn plotkin_point() -> PlotkinPoint {
    // positive at 1/2, negative at 1, single sign change on (0, 1)
    let (mut lo, mut hi) = (0.5f64, 1.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if plotkin_stationarity(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    let w3 = w.powi(3);
    PlotkinPoint { omega_max: w, alpha_max: 1.0 / (1.0 + 4.0 * w3), tau_max: (w + w3) / (1.0 + 4.0 * w3) }
}

fn stationarity_exact(w: &Rational) -> Rational {
    let w2 = w * w;
    let w3 = &w2 * w;
    Rational::one() + ratio(3, 1) * w2 - ratio(8, 1) * w3
}

/// Rational interval `[lo, hi]` with `hi - lo <= 2^-bits` containing the root
/// of `1 + 3 w^2 - 8 w^3` in `(1/2, 1)`.
pub fn omega_max_interval(bits: u32) -> (Rational, Rational) {
    let (mut lo, mut hi) = (ratio(1, 2), Rational::one());
    for _ in 0..bits {
        let mid = (&lo + &hi) / BigInt::from(2);
        if stationarity_exact(&mid).is_positive() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemainsVerdict {
    Strict,
    Equality,
    Fail,
    /// The value falls inside the interval around `omega_max`.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainsRow {
    pub l: u32,
    /// `tau(L + 1)` as `p/q`.
    pub tau_next: String,
    pub source: TauSource,
    /// Bounds on `1/4 + omega_max^(L-2)/4`.
    pub rhs_lo: f64,
    pub rhs_hi: f64,
    pub verdict: RemainsVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainsReport {
    pub omega_lo: String,
    pub omega_hi: String,
    pub rows: Vec<RemainsRow>,
    /// `(L, 1/(2L+1) >= (2/3)^(L-2))` for `L` in `10..=200`.
    pub tail: Vec<(u32, bool)>,
    /// `omega_max <= 2/3`, which lets the tail bound cover `omega_max^(L-2)`.
    pub omega_below_two_thirds: bool,
    pub all_pass: bool,
}

/// Checks `tau(L+1) >= 1/4 + omega_max^(L-2)/4` for `L = 1..=l_up` with
/// exact table values and a rational enclosure of `omega_max`, then the
/// large-`L` tail `1/(2L+1) >= (2/3)^(L-2)`.
pub fn verify_remains(l_up: u32) -> Result<RemainsReport> {
    if l_up < 1 {
        return Err(invalid("l_up must be at least 1"));
    }
    let (lo, hi) = omega_max_interval(60);
    let quarter = ratio(1, 4);
    let mut rows = Vec::new();
    for l in 1..=l_up {
        let t = tau_of_l(l as usize + 1)?;
        let e = l as i32 - 2;
        // w^e is increasing in w for e >= 0 and decreasing for e < 0
        let (plo, phi) = if e >= 0 { (pow(&lo, e), pow(&hi, e)) } else { (pow(&hi, e), pow(&lo, e)) };
        let rlo = &quarter + plo / BigInt::from(4);
        let rhi = &quarter + phi / BigInt::from(4);
        let verdict = if rlo == rhi && t.value == rlo {
            RemainsVerdict::Equality
        } else if t.value > rhi || (t.value == rhi && rlo == rhi) {
            RemainsVerdict::Strict
        } else if t.value < rlo {
            RemainsVerdict::Fail
        } else {
            RemainsVerdict::Undetermined
        };
        rows.push(RemainsRow {
            l,
            tau_next: crate::rational::to_fraction_string(&t.value),
            source: t.source,
            rhs_lo: to_f64(&rlo),
            rhs_hi: to_f64(&rhi),
            verdict,
        });
    }
    let two_thirds = ratio(2, 3);
    let tail: Vec<(u32, bool)> = (10..=200u32)
        .map(|l| (l, ratio(1, 2 * l as i64 + 1) >= pow(&two_thirds, l as i32 - 2)))
        .collect();
    let omega_below_two_thirds = hi <= two_thirds;
    let all_pass = rows
        .iter()
        .all(|r| matches!(r.verdict, RemainsVerdict::Strict | RemainsVerdict::Equality))
        && tail.iter().all(|(_, ok)| *ok)
        && omega_below_two_thirds;
    Ok(RemainsReport {
        omega_lo: crate::rational::to_fraction_string(&lo),
        omega_hi: crate::rational::to_fraction_string(&hi),
        rows,
        tail,
        omega_below_two_thirds,
        all_pass,
    })
}
