//! Exhaustive and randomized searches over small codes.
//!
//! Words are handled as `u64` indices whose binary expansion (most
//! significant bit first) is the word, so numeric order is lexicographic
//! order. Every search is deterministic: exhaustive paths return the
//! lexicographically smallest optimum, randomized paths depend only on the
//! seed (ChaCha8).

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::Rational;
use crate::zcore::{avg_radius, list_radius, BitWord, Code};

/// Exhaustive subset search is used up to this many leaves.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Longest word length accepted by exhaustive paths.
    pub max_n: usize,
    /// Branch-and-bound node cap.
    pub max_nodes: u64,
    pub seed: u64,
    /// Restarts of the randomized list-code search.
    pub restarts: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_n: 20, max_nodes: 50_000_000, seed: 0, restarts: 200 }
    }
}

impl SearchBudget {
    fn check(&self, n: usize) -> Result<()> {
        if self.max_n == 0 || self.max_nodes == 0 {
            return Err(invalid("budget caps must be positive"));
        }
        if n == 0 || n > self.max_n || n > 20 {
            return Err(invalid(format!("word length {n} outside 1..={}", self.max_n.min(20))));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodeSearchResult {
    pub code: Code,
    /// Code size for distance searches, list radius for list-code searches.
    pub objective: usize,
    /// The search space was exhausted.
    pub optimal: bool,
    pub nodes: u64,
}

fn dz_index(a: u64, b: u64) -> u32 {
    2 * (a & !b).count_ones().max((b & !a).count_ones())
}

fn to_code(n: usize, weight: Option<usize>, words: &[u64]) -> Result<Code> {
    let words = words.iter().map(|&i| BitWord::from_index(n, i));
    match weight {
        Some(w) => Code::with_constant_weight(n, w, words),
        None => Code::new(n, words),
    }
}

// Maximum clique in the graph "dz >= d" over `vertices` (ascending).
// Pass one finds the clique number; pass two, with the size known, takes the
// lexicographically first clique of that size.
struct CliqueSearch<'a> {
    d: u32,
    vertices: &'a [u64],
    max_nodes: u64,
    nodes: u64,
    capped: bool,
}

impl CliqueSearch<'_> {
    fn adjacent(&self, a: u64, b: u64) -> bool {
        dz_index(a, b) >= self.d
    }

    // Greedy colouring of `cands` in order; the number of colours bounds the
    // clique number of the induced subgraph.
    fn colour_bound(&self, cands: &[u64]) -> usize {
        let mut classes: Vec<Vec<u64>> = Vec::new();
        for &v in cands {
            match classes.iter_mut().find(|c| c.iter().all(|&u| !self.adjacent(u, v))) {
                Some(c) => c.push(v),
                None => classes.push(vec![v]),
            }
        }
        classes.len()
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            self.capped = true;
        }
        self.capped
    }

    fn grow(&mut self, clique: &mut Vec<u64>, cands: &[u64], best: &mut Vec<u64>) {
        if clique.len() > best.len() {
            *best = clique.clone();
        }
        if cands.is_empty() || self.tick() {
            return;
        }
        if clique.len() + self.colour_bound(cands) <= best.len() {
            return;
        }
        for (i, &v) in cands.iter().enumerate() {
            if clique.len() + cands.len() - i <= best.len() || self.capped {
                return;
            }
            let next: Vec<u64> = cands[i + 1..].iter().copied().filter(|&u| self.adjacent(u, v)).collect();
            clique.push(v);
            self.grow(clique, &next, best);
            clique.pop();
        }
    }

    // First clique of exactly `size` in lexicographic order.
    fn first_of_size(&mut self, clique: &mut Vec<u64>, cands: &[u64], size: usize) -> bool {
        if clique.len() == size {
            return true;
        }
        if self.tick() || clique.len() + cands.len() < size || clique.len() + self.colour_bound(cands) < size {
            return false;
        }
        for (i, &v) in cands.iter().enumerate() {
            if clique.len() + cands.len() - i < size || self.capped {
                return false;
            }
            let next: Vec<u64> = cands[i + 1..].iter().copied().filter(|&u| self.adjacent(u, v)).collect();
            clique.push(v);
            if self.first_of_size(clique, &next, size) {
                return true;
            }
            clique.pop();
        }
        false
    }
}

fn clique_code(n: usize, d: usize, weight: Option<usize>, vertices: Vec<u64>, budget: &SearchBudget) -> Result<CodeSearchResult> {
    let mut s = CliqueSearch { d: d as u32, vertices: &vertices, max_nodes: budget.max_nodes, nodes: 0, capped: false };
    let mut best = Vec::new();
    s.grow(&mut Vec::new(), s.vertices, &mut best);
    let optimal = !s.capped;
    if optimal && !best.is_empty() {
        let mut first = Vec::new();
        s.max_nodes = s.nodes + budget.max_nodes;
        if s.first_of_size(&mut first, s.vertices, best.len()) {
            best = first;
        }
    }
    Ok(CodeSearchResult {
        objective: best.len(),
        code: to_code(n, weight, &best)?,
        optimal: optimal && !s.capped,
        nodes: s.nodes,
    })
}

/// Largest code in `{0,1}^n` with minimum asymmetric distance at least `d`.
pub fn max_code(n: usize, d: usize, budget: &SearchBudget) -> Result<CodeSearchResult> {
    budget.check(n)?;
    if d < 2 || d % 2 == 1 {
        return Err(invalid(format!("d must be even and at least 2, got {d}")));
    }
    clique_code(n, d, None, (0..1u64 << n).collect(), budget)
}

/// Largest weight-`w` code in `{0,1}^n` with minimum asymmetric distance at least `d`.
pub fn max_constant_weight_code(n: usize, w: usize, d: usize, budget: &SearchBudget) -> Result<CodeSearchResult> {
    budget.check(n)?;
    if w > n {
        return Err(invalid(format!("weight {w} exceeds length {n}")));
    }
    if d < 2 || d % 2 == 1 {
        return Err(invalid(format!("d must be even and at least 2, got {d}")));
    }
    clique_code(n, d, Some(w), weight_class(n, w), budget)
}

/// Weight-`w` words of length `n` as indices, ascending.
pub fn weight_class(n: usize, w: usize) -> Vec<u64> {
    (0..1u64 << n).filter(|i| i.count_ones() as usize == w).collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

// Constant-weight M-subsets by depth-first search. The running list radius
// (min over completed (L+1)-subsets of the max deficit) only falls as words
// are added, so branches at or below the best are cut.
struct ListSearch<'a> {
    words: &'a [u64],
    w: u32,
    m: usize,
    l: usize,
    nodes: u64,
}

impl ListSearch<'_> {
    // smallest max-deficit over (L+1)-subsets containing the newest word
    fn new_deficit(&self, chosen: &[u64], v: u64, cap: u32) -> u32 {
        let mut best = cap;
        for subset in chosen.iter().combinations(self.l) {
            let meet = subset.iter().fold(v, |acc, &&x| acc & x);
            let deficit = self.w - meet.count_ones();
            best = best.min(deficit);
        }
        best
    }

    fn run(&mut self, chosen: &mut Vec<u64>, start: usize, current: u32, best: &mut (u32, Vec<u64>)) {
        self.nodes += 1;
        if chosen.len() == self.m {
            if current > best.0 || best.1.is_empty() {
                *best = (current, chosen.clone());
            }
            return;
        }
        let need = self.m - chosen.len();
        for i in start..=self.words.len() - need {
            let v = self.words[i];
            let next = if chosen.len() >= self.l { self.new_deficit(chosen, v, current) } else { current };
            if next <= best.0 && !best.1.is_empty() {
                continue;
            }
            chosen.push(v);
            self.run(chosen, i + 1, next, best);
            chosen.pop();
            if chosen.is_empty() {
                // every code is a permutation image of one holding the first word
                break;
            }
        }
    }
}

fn radius_of(n: usize, w: usize, words: &[u64], l: usize) -> Result<usize> {
    list_radius(&to_code(n, Some(w), words)?, l)
}

/// Weight-`w` code of size `M` in `{0,1}^n` maximizing the list radius
/// `t_L`. Exhaustive (up to coordinate permutations) when the subset count is
/// at most [`EXHAUSTIVE_LIMIT`], otherwise hill climbing from seeded restarts.
pub fn best_list_code(n: usize, w: usize, m: usize, l: usize, budget: &SearchBudget) -> Result<CodeSearchResult> {
    budget.check(n)?;
    if w > n {
        return Err(invalid(format!("weight {w} exceeds length {n}")));
    }
    if l == 0 || m < l + 1 {
        return Err(invalid(format!("need L >= 1 and M >= L+1, got M={m}, L={l}")));
    }
    let words = weight_class(n, w);
    if m > words.len() {
        return Err(invalid(format!("M={m} exceeds C({n},{w}) = {}", words.len())));
    }
    if binomial(words.len() as u128, m as u128) <= EXHAUSTIVE_LIMIT {
        let mut s = ListSearch { words: &words, w: w as u32, m, l, nodes: 0 };
        let mut best = (0u32, Vec::new());
        s.run(&mut Vec::new(), 0, w as u32 + 1, &mut best);
        let code = to_code(n, Some(w), &best.1)?;
        return Ok(CodeSearchResult { objective: list_radius(&code, l)?, code, optimal: true, nodes: s.nodes });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut best: Option<(usize, Vec<u64>)> = None;
    let mut nodes = 0u64;
    for _ in 0..budget.restarts.max(1) {
        let mut pool = words.clone();
        pool.shuffle(&mut rng);
        let mut cur: Vec<u64> = pool[..m].to_vec();
        cur.sort_unstable();
        let mut score = radius_of(n, w, &cur, l)?;
        loop {
            let mut improved = false;
            'swap: for i in 0..m {
                for &v in &words {
                    if cur.binary_search(&v).is_ok() {
                        continue;
                    }
                    nodes += 1;
                    let mut cand = cur.clone();
                    cand[i] = v;
                    cand.sort_unstable();
                    let s = radius_of(n, w, &cand, l)?;
                    if s > score {
                        cur = cand;
                        score = s;
                        improved = true;
                        break 'swap;
                    }
                }
            }
            if !improved || nodes >= budget.max_nodes {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, bw)| score > *b || (score == *b && cur < *bw)) {
            best = Some((score, cur));
        }
        if nodes >= budget.max_nodes {
            break;
        }
    }
    let (score, words) = best.expect("at least one restart");
    Ok(CodeSearchResult { code: to_code(n, Some(w), &words)?, objective: score, optimal: false, nodes })
}

/// Normalized list radii of one random code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSample {
    /// `rad_L / n`: the minimum over `(L+1)`-subsets of the average radius.
    #[serde(with = "crate::rational::as_fraction")]
    pub min: Rational,
    /// Mean over `(L+1)`-subsets of the average radius, over `n`.
    #[serde(with = "crate::rational::as_fraction")]
    pub subset_mean: Rational,
}

/// Per-trial radii of random codes: `M` words of length `n` with independent
/// bits equal to one with probability `omega`.
pub fn sample_code_radius_detailed(
    n: usize,
    m: usize,
    omega: f64,
    l: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<RadiusSample>> {
    if n == 0 || n > 64 {
        return Err(invalid(format!("n must lie in 1..=64, got {n}")));
    }
    if !(0.0..=1.0).contains(&omega) {
        return Err(invalid(format!("omega must lie in [0, 1], got {omega}")));
    }
    if l == 0 || m < l + 1 || trials == 0 {
        return Err(invalid(format!("need L >= 1, M >= L+1 and trials >= 1, got M={m}, L={l}, trials={trials}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nn = Rational::from_integer(n.into());
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let words: Vec<BitWord> = (0..m).map(|_| BitWord::from_fn(n, |_| rng.random::<f64>() < omega)).collect();
        let mut min: Option<Rational> = None;
        let mut total = Rational::from_integer(0.into());
        let mut count = 0i64;
        for subset in words.iter().cloned().combinations(l + 1) {
            let r = avg_radius(&subset)?;
            total += &r;
            count += 1;
            if min.as_ref().is_none_or(|b| r < *b) {
                min = Some(r);
            }
        }
        out.push(RadiusSample {
            min: min.expect("M >= L+1") / &nn,
            subset_mean: total / (&nn * Rational::from_integer(count.into())),
        });
    }
    Ok(out)
}

/// `rad_L(C)/n` for each of `trials` random codes.
pub fn sample_code_radius(n: usize, m: usize, omega: f64, l: usize, trials: usize, seed: u64) -> Result<Vec<Rational>> {
    Ok(sample_code_radius_detailed(n, m, omega, l, trials, seed)?.into_iter().map(|s| s.min).collect())
}

/// List radius by brute force: the largest `t` such that no Z-ball of radius
/// `t` around any of the `2^n` centers holds more than `L` codewords.
pub fn list_radius_exhaustive(code: &Code, l: usize) -> Result<usize> {
    let n = code.len();
    if l == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    if n > 20 {
        return Err(Error::BudgetExceeded(format!("2^{n} centers")));
    }
    if code.size() <= l {
        return Ok(n);
    }
    let words: Vec<u64> = code.words().iter().map(|w| w.to_index().expect("n <= 20")).collect();
    let ball_ok = |t: u32| {
        (0..1u64 << n).all(|y| {
            let wy = y.count_ones();
            words.iter().filter(|&&c| c & y == y && c.count_ones() - wy <= t).count() <= l
        })
    };
    // radius n always fails once |C| > L (the all-zero center holds every word)
    let mut t = 0usize;
    if !ball_ok(0) {
        return Err(invalid("code has repeated words"));
    }
    while t < n && ball_ok(t as u32 + 1) {
        t += 1;
    }
    Ok(t)
}
