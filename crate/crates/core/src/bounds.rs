//! Size and rate bounds for asymmetric-error codes.
//!
//! Three groups live here:
//!
//! * finite-length size bounds (`bassalygo_size_bound`, `zplotkin_size_bound`,
//!   `list_plotkin_holds`) and the asymptotic `levenshtein_rate_bound`;
//! * the random-coding exponent for list-decodable constant-weight ensembles:
//!   `rcb_g`, its derivative `rcb_delta`, and `tau_star`, the largest
//!   correctable fraction reachable at a given rate;
//! * rate curves in `(tau, rate)` form, including the Gilbert-Varshamov and
//!   MRRW reference curves.
//!
//! `g` and `delta` use natural logarithms; every rate is in bits.

use std::f64::consts::LN_2;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

// Within this distance of 0 or 1 the weight fraction is treated as the limit.
const OMEGA_EDGE: f64 = 1e-12;
const BISECTION_TOL: f64 = 1e-10;

/// Binary entropy in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}

/// Inverse of the binary entropy on `[0, 1/2]`.
pub fn inverse_binary_entropy(y: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    if y >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smaller root of `w^2 - n w + t n = 0`.
pub fn w0(n: u64, t: u64) -> Result<f64> {
    if 4 * t > n {
        return Err(invalid(format!("w0 needs 4t <= n, got n={n}, t={t}")));
    }
    let n = n as f64;
    let disc = n * n - 4.0 * t as f64 * n;
    Ok((n - disc.max(0.0).sqrt()) / 2.0)
}

/// `floor(t n / (w^2 - (w - t) n))` for `t + 1 <= w <= w0(n, t)`.
///
/// At `w = w0` the denominator vanishes and an error is returned.
pub fn bassalygo_size_bound(n: u64, w: u64, t: u64) -> Result<u64> {
    if 4 * t > n {
        return Err(invalid(format!("need 4t <= n, got n={n}, t={t}")));
    }
    let (ni, wi, ti) = (n as i128, w as i128, t as i128);
    // w <= w0 iff w is at most n/2 and not strictly between the two roots
    let q = wi * wi - wi * ni + ti * ni;
    if w < t + 1 || 2 * w > n || q < 0 {
        return Err(invalid(format!(
            "w={w} outside [t+1, w0] for n={n}, t={t}"
        )));
    }
    if q == 0 {
        return Err(invalid(format!(
            "denominator w^2 - (w-t)n vanishes at w = w0 = {w} (n={n}, t={t})"
        )));
    }
    Ok((ti * ni / q) as u64)
}

/// `floor(1 + 1/(4 eps))`: size cap when a fraction `1/4 + eps` is corrected.
pub fn plotkin_symmetric_size(eps: f64) -> Result<u64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    Ok((1.0 + 1.0 / (4.0 * eps)).floor() as u64)
}

/// `h(wfrac) - h((1 - sqrt(1 - 4 tfrac))/2)`, clamped at 0.
pub fn levenshtein_rate_bound(wfrac: f64, tfrac: f64) -> Result<f64> {
    if !(0.0..=0.25).contains(&tfrac) {
        return Err(invalid(format!("tfrac must lie in [0, 1/4], got {tfrac}")));
    }
    let w0frac = (1.0 - (1.0 - 4.0 * tfrac).max(0.0).sqrt()) / 2.0;
    if wfrac < w0frac - 1e-12 || wfrac > 0.5 {
        return Err(invalid(format!(
            "wfrac must lie in [{w0frac}, 1/2], got {wfrac}"
        )));
    }
    Ok((binary_entropy(wfrac) - binary_entropy(w0frac)).max(0.0))
}

/// Size cap for a code correcting a fraction `1/4 + eps` of asymmetric errors.
pub fn zplotkin_size_bound(eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.75) {
        return Err(invalid(format!("eps must lie in (0, 3/4], got {eps}")));
    }
    let s = (3.0 * eps).sqrt();
    Ok(1.0 / (eps * s) + 1.0 / (2.0 * eps) + 4.0 / s + 2.0)
}

/// Necessary condition on an `M`-word constant-weight code that is
/// `(tau n, L)`-list decodable with weight fraction `omega`.
///
/// Trivially true when `tau <= omega - omega^(L+1)` or `M <= L`. Otherwise
/// tests `M^L / ((M-1)...(M-L)) >= tau / (omega - omega^(L+1))` with a
/// relative slack of `1e-12` in favour of holding.
pub fn list_plotkin_holds(m: u64, l: u32, omega: f64, tau: f64) -> bool {
    let base = omega - omega.powi(l as i32 + 1);
    if tau <= base || m <= l as u64 {
        return true;
    }
    if base <= 0.0 {
        return false;
    }
    let mf = m as f64;
    let prod: f64 = (1..=l).map(|k| mf / (mf - k as f64)).product();
    prod >= tau / base * (1.0 - 1e-12)
}

/// Exact form of [`list_plotkin_holds`] for `omega = w/n`, `tau = t/n`.
pub fn list_plotkin_holds_exact(m: u64, l: u32, w: u64, n: u64, t: u64) -> bool {
    if m <= l as u64 {
        return true;
    }
    let nl = BigUint::from(n).pow(l);
    let wn = BigUint::from(w) * &nl;
    let wl1 = BigUint::from(w).pow(l + 1);
    let tn = BigUint::from(t) * &nl;
    if wn < wl1 {
        // w > n: weight fraction above one, nothing to compare
        return false;
    }
    let base = wn - wl1;
    if tn <= base {
        return true;
    }
    let lhs = BigUint::from(m).pow(l) * base;
    let rhs = (1..=l as u64).fold(tn, |acc, k| acc * BigUint::from(m - k));
    lhs >= rhs
}

// Coefficients of the weighted sums shared by g and delta, for fixed
// (L, omega). With u = exp(-h/(L+1)):
//   full(h) = omega^(L+1) + (1-omega)^(L+1) + sum_i u^i C(L+1,i) omega^i (1-omega)^(L+1-i)
//   part(h) = sum_i u^i C(L,i-1) omega^i (1-omega)^(L+1-i)
struct RcbKernel {
    l1: f64,
    tail: f64,
    full: Vec<f64>,
    part: Vec<f64>,
}

impl RcbKernel {
    fn new(l: u32, omega: f64) -> Self {
        let l1 = l as i32 + 1;
        let q = 1.0 - omega;
        let mut full = Vec::with_capacity(l as usize);
        let mut part = Vec::with_capacity(l as usize);
        let mut c_l1 = 1.0f64; // C(L+1, i)
        let mut c_l = 1.0f64; // C(L, i-1)
        for i in 1..l1 {
            c_l1 = c_l1 * (l1 - i + 1) as f64 / i as f64;
            if i > 1 {
                c_l = c_l * (l1 - i + 1) as f64 / (i - 1) as f64;
            }
            let base = omega.powi(i) * q.powi(l1 - i);
            full.push(c_l1 * base);
            part.push(c_l * base);
        }
        RcbKernel { l1: l1 as f64, tail: omega.powi(l1) + q.powi(l1), full, part }
    }

    // Neumaier-compensated sums; every term is non-negative.
    fn sums(&self, h: f64) -> (f64, f64) {
        let u = (-h / self.l1).exp();
        let mut ui = 1.0f64;
        let mut full = Compensated::new(self.tail);
        let mut part = Compensated::new(0.0);
        for (cf, cp) in self.full.iter().zip(&self.part) {
            ui *= u;
            full.add(ui * cf);
            part.add(ui * cp);
        }
        (full.value(), part.value())
    }

    fn g(&self, h: f64) -> f64 {
        -self.sums(h).0.ln()
    }

    fn delta(&self, h: f64) -> f64 {
        let (full, part) = self.sums(h);
        part / full
    }

    fn phi(&self, h: f64) -> f64 {
        let (full, part) = self.sums(h);
        -full.ln() - h * part / full
    }

    fn phi_sup(&self) -> f64 {
        -self.tail.ln()
    }
}

struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn new(x: f64) -> Self {
        Compensated { sum: x, comp: 0.0 }
    }

    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn omega_at_edge(omega: f64) -> bool {
    !(OMEGA_EDGE..=1.0 - OMEGA_EDGE).contains(&omega)
}

/// `g(h, L, omega)`: the Chernoff exponent (natural log) of the
/// list-decoding failure event.
pub fn rcb_g(h: f64, l: u32, omega: f64) -> f64 {
    if omega_at_edge(omega) {
        return 0.0;
    }
    RcbKernel::new(l, omega).g(h)
}

/// `delta(h, L, omega)`, the derivative of `g` in `h`.
pub fn rcb_delta(h: f64, l: u32, omega: f64) -> f64 {
    if omega_at_edge(omega) {
        return 0.0;
    }
    RcbKernel::new(l, omega).delta(h)
}

/// `g - h delta`; non-decreasing in `h` with value 0 at `h = 0`.
pub fn rcb_phi(h: f64, l: u32, omega: f64) -> f64 {
    if omega_at_edge(omega) {
        return 0.0;
    }
    RcbKernel::new(l, omega).phi(h)
}

/// Limit of `rcb_phi` as `h` grows: `-ln(omega^(L+1) + (1-omega)^(L+1))`.
pub fn rcb_phi_sup(l: u32, omega: f64) -> f64 {
    if omega_at_edge(omega) {
        return 0.0;
    }
    RcbKernel::new(l, omega).phi_sup()
}

/// Rate (bits), list size and weight fraction of a random constant-weight ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcbParams {
    pub rate: f64,
    pub list_size: u32,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauStar {
    pub value: f64,
    /// The exponent parameter at which the rate constraint binds.
    pub h: f64,
    /// The rate exceeds what any `h` can support; `value` is 0.
    pub infeasible: bool,
}

/// Largest `delta(h)` over `h` with `phi(h) >= R L ln 2`.
///
/// `phi` is non-decreasing and `delta` non-increasing, so this is `delta` at
/// the smallest root of `phi(h) = R L ln 2`, located by bisection. The
/// returned `h` is the upper end of the final bracket, which keeps the value
/// on the conservative side.
pub fn tau_star(params: RcbParams) -> TauStar {
    let RcbParams { rate, list_size: l, omega } = params;
    let omega_pow = omega - omega.powi(l as i32 + 1);
    if rate <= 0.0 {
        return TauStar { value: omega_pow, h: 0.0, infeasible: false };
    }
    let target = rate * l as f64 * LN_2;
    let infeasible = TauStar { value: 0.0, h: f64::INFINITY, infeasible: true };
    if omega_at_edge(omega) {
        return infeasible;
    }
    let k = RcbKernel::new(l, omega);
    if target >= k.phi_sup() {
        return infeasible;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while k.phi(hi) < target {
        lo = hi;
        hi *= 2.0;
        if hi > 1.8e19 {
            return infeasible;
        }
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if k.phi(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    TauStar { value: k.delta(hi), h: hi, infeasible: false }
}

/// Closed form of `tau_star` at `L = 1`, `omega = 1/2`: `h^-1(1 - R) / 2`.
pub fn tau_star_unit_half(rate: f64) -> f64 {
    if rate >= 1.0 {
        return 0.0;
    }
    inverse_binary_entropy(1.0 - rate.max(0.0)) / 2.0
}

/// Best weight fraction and its `tau_star` at rate `R`.
///
/// Scans `omega_points` interior points of `(0, 1)`, then polishes around the
/// best one by golden-section search. The scan result is kept if polishing
/// does not improve it.
pub fn rcb_tau_lower(rate: f64, l: u32, omega_points: usize, polish_iters: usize) -> (f64, f64) {
    let n = omega_points.max(2);
    let step = 1.0 / (n + 1) as f64;
    let eval = |w: f64| tau_star(RcbParams { rate, list_size: l, omega: w }).value;
    let mut best = (0.0, 0.5);
    for k in 1..=n {
        let w = k as f64 * step;
        let v = eval(w);
        if v > best.0 {
            best = (v, w);
        }
    }
    if best.0 <= 0.0 {
        return (0.0, best.1);
    }
    let (mut a, mut b) = ((best.1 - step).max(OMEGA_EDGE), (best.1 + step).min(1.0 - OMEGA_EDGE));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..polish_iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = eval(d);
        }
    }
    for (v, w) in [(fc, c), (fd, d)] {
        if v > best.0 {
            best = (v, w);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CurveKind {
    RcbLower { list_size: u32 },
    Gv,
    Mrrw,
    TwoStage { l_up: u32 },
}

/// Resolution of a rate curve computed by optimisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    pub rate_points: usize,
    pub omega_points: usize,
    pub polish_iters: usize,
}

impl Default for CurveGrid {
    fn default() -> Self {
        CurveGrid { rate_points: 2000, omega_points: 2000, polish_iters: 60 }
    }
}

/// Samples `(tau, rate)` with `tau` strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    pub kind: CurveKind,
    pub samples: Vec<(f64, f64)>,
    pub grid: String,
}

impl BoundCurve {
    /// `tau,rate` header, 9 decimals, `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,rate\n");
        for (tau, rate) in &self.samples {
            out.push_str(&format!("{tau:.9},{rate:.9}\n"));
        }
        out
    }

    /// Linear interpolation of the rate at `tau`; 0 past the last sample.
    pub fn rate_at(&self, tau: f64) -> f64 {
        let s = &self.samples;
        if s.is_empty() || tau > s[s.len() - 1].0 {
            return 0.0;
        }
        let k = s.partition_point(|p| p.0 < tau);
        if k == 0 {
            return s[0].1;
        }
        let (t0, r0) = s[k - 1];
        let (t1, r1) = s[k];
        r0 + (r1 - r0) * (tau - t0) / (t1 - t0)
    }
}

/// Lower bound on the rate of `(tau n, L)`-list-decodable codes, inverted from
/// `tau(R) = sup_omega tau_star(R, L, omega)` over a uniform grid of rates in
/// `[0, 1)`.
pub fn rcb_lower_curve(l: u32, grid: CurveGrid) -> Result<BoundCurve> {
    if !(1..=17).contains(&l) {
        return Err(invalid(format!("list size must lie in [1, 17], got {l}")));
    }
    let n = grid.rate_points.max(2);
    let points: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let rate = k as f64 / n as f64;
            let (tau, _) = rcb_tau_lower(rate, l, grid.omega_points, grid.polish_iters);
            (tau, rate)
        })
        .collect();
    let mut samples: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    // tau falls as the rate grows; walk backwards and keep strict increases
    for &(tau, rate) in points.iter().rev() {
        if tau <= 0.0 {
            continue;
        }
        match samples.last() {
            Some(&(last, _)) if tau <= last => {}
            _ => samples.push((tau, rate)),
        }
    }
    Ok(BoundCurve {
        kind: CurveKind::RcbLower { list_size: l },
        samples,
        grid: format!(
            "rate_points={} omega_points={} polish_iters={}",
            grid.rate_points, grid.omega_points, grid.polish_iters
        ),
    })
}

/// `1 - h(2 tau)` for `tau` in `[0, 1/4]`.
pub fn gv_rate(tau: f64) -> f64 {
    (1.0 - binary_entropy(2.0 * tau)).max(0.0)
}

/// `h(1/2 - sqrt(2 tau (1 - 2 tau)))` for `tau` in `[0, 1/4]`.
pub fn mrrw_rate(tau: f64) -> f64 {
    let r = (2.0 * tau * (1.0 - 2.0 * tau)).max(0.0).sqrt();
    binary_entropy((0.5 - r).max(0.0))
}

/// Uniform grid of `points` values on `[lo, hi]`, both ends included.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn reference_curve(kind: CurveKind, taus: &[f64], f: fn(f64) -> f64) -> Result<BoundCurve> {
    if let Some(bad) = taus.iter().find(|t| !(0.0..=0.25).contains(*t)) {
        return Err(invalid(format!("tau grid must lie in [0, 1/4], got {bad}")));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("tau grid must be strictly increasing"));
    }
    Ok(BoundCurve {
        kind,
        samples: taus.iter().map(|&t| (t, f(t))).collect(),
        grid: format!("tau_points={}", taus.len()),
    })
}

pub fn gv_curve(taus: &[f64]) -> Result<BoundCurve> {
    reference_curve(CurveKind::Gv, taus, gv_rate)
}

pub fn mrrw_curve(taus: &[f64]) -> Result<BoundCurve> {
    reference_curve(CurveKind::Mrrw, taus, mrrw_rate)
}
