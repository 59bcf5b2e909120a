//! Exact linear programming for `tau(M)`, the largest fraction of asymmetric
//! errors a code with `M` codewords can correct.
//!
//! `1/tau(M)` is the optimum of
//!
//! ```text
//! maximize  sum_p y_p   subject to  y >= 0,  sum_{p in S(b)} y_p <= 1 for every pattern b
//! ```
//!
//! where `p` ranges over pairs `i < j` of codeword indices and `S(b)` is the
//! set of pairs with `b_i = 0`, `b_j = 1` for a pattern `b ∈ {0,1}^M`.
//! The dual is the covering problem `min sum_b z_b` with every pair covered
//! at least once. A solved program is returned as a [`TauCertificate`]
//! holding both solutions, which [`verify_certificate`] re-checks in exact
//! arithmetic.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{parse_fraction, ratio, to_f64, to_fraction_string, Rational};

pub const MAX_PAIR_MATRIX_M: usize = 20;
pub const MAX_SOLVE_M: usize = 18;
/// Largest `M` solved by the pure exact simplex in [`SolveMode::Auto`].
pub const EXACT_MODE_MAX_M: usize = 12;

/// Table of `tau(M)` for `2 <= M <= 18`.
///
/// Entries up to 12 are re-derived by exact simplex in the regular tests and
/// 13..=16 by an ignored test (a few minutes); disagreement is a test
/// failure. 15 and 16 are the certified optima, which differ from commonly
/// quoted floating-point values (377/1177, 1029/3238) by under 1e-6.
/// 17 and 18 have not been re-derived here.
pub const KNOWN_TAU: [(usize, i64, i64); 17] = [
    (2, 1, 1),
    (3, 1, 2),
    (4, 1, 2),
    (5, 2, 5),
    (6, 2, 5),
    (7, 3, 8),
    (8, 4, 11),
    (9, 13, 37),
    (10, 9, 26),
    (11, 31, 92),
    (12, 1, 3),
    (13, 18, 55),
    (14, 35, 108),
    (15, 1090, 3403),
    (16, 184, 579),
    (17, 712, 2263),
    (18, 1083, 3467),
];

pub fn known_tau(m: usize) -> Option<Rational> {
    KNOWN_TAU
        .iter()
        .find(|(k, _, _)| *k == m)
        .map(|&(_, p, q)| ratio(p, q))
}

/// A pattern `b ∈ {0,1}^M`; bit `k` holds `b_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern {
    pub m: u8,
    pub bits: u32,
}

impl Pattern {
    pub fn get(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    /// `M`-character 0/1 string, character `k` being `b_{k+1}`.
    pub fn to_bit_string(&self) -> String {
        (0..self.m as usize)
            .map(|k| if self.get(k) { '1' } else { '0' })
            .collect()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_PAIR_MATRIX_M || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("bad bit pattern {s:?}")));
        }
        let bits = s
            .bytes()
            .enumerate()
            .fold(0u32, |acc, (k, b)| acc | (u32::from(b == b'1') << k));
        Ok(Pattern { m: s.len() as u8, bits })
    }

    /// Pairs `(i, j)`, 1-based with `i < j`, such that `b_i = 0` and `b_j = 1`.
    pub fn covered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m as usize;
        (0..m).flat_map(move |i| {
            (i + 1..m)
                .filter(move |&j| !self.get(i) && self.get(j))
                .map(move |j| (i + 1, j + 1))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Column {
    pub pattern: Pattern,
    /// Row indices (into [`PairMatrix::pairs`]) where the column holds a one.
    pub rows: Vec<u16>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PruneStats {
    pub patterns: usize,
    pub empty: usize,
    pub duplicate: usize,
    pub dominated: usize,
    pub kept: usize,
}

/// The 0/1 matrix `D(M)` with one row per pair and one column per pattern.
#[derive(Clone, Debug)]
pub struct PairMatrix {
    m: usize,
    pairs: Vec<(usize, usize)>,
    columns: Vec<Column>,
    pruning: PruneStats,
}

fn pair_index(m: usize, i: usize, j: usize) -> usize {
    // rows ordered (1,2),(1,3),..,(1,M),(2,3),..
    let i0 = i - 1;
    let j0 = j - 1;
    i0 * m - i0 * (i0 + 1) / 2 + (j0 - i0 - 1)
}

fn all_pairs(m: usize) -> Vec<(usize, usize)> {
    (1..=m)
        .flat_map(|i| (i + 1..=m).map(move |j| (i, j)))
        .collect()
}

fn column_for(m: usize, bits: u32) -> Column {
    let pattern = Pattern { m: m as u8, bits };
    let rows = pattern
        .covered_pairs()
        .map(|(i, j)| pair_index(m, i, j) as u16)
        .collect();
    Column { pattern, rows }
}

fn check_m(m: usize) -> Result<()> {
    if !(2..=MAX_PAIR_MATRIX_M).contains(&m) {
        return Err(invalid(format!("M must lie in 2..={MAX_PAIR_MATRIX_M}, got {m}")));
    }
    Ok(())
}

/// Builds `D(M)` with empty, duplicate and dominated columns removed.
///
/// A pattern with `b_1 = 1` loses nothing by setting `b_1 = 0`, and one with
/// `b_M = 0` loses nothing by setting `b_M = 1`; such columns are dominated.
/// The remaining patterns (`b_1 = 0`, `b_M = 1`) are pairwise incomparable:
/// if `b` and `b'` differ at position `k` with `b_k = 0`, the pair `(k, M)`
/// separates them, and with `b_k = 1` the pair `(1, k)` does.
pub fn build_pair_matrix(m: usize) -> Result<PairMatrix> {
    check_m(m)?;
    let total = 1usize << m;
    let mut stats = PruneStats {
        patterns: total,
        ..Default::default()
    };
    let mut seen: HashSet<Vec<u16>> = HashSet::new();
    let mut columns = Vec::new();
    let last = 1u32 << (m - 1);
    for bits in 0..total as u32 {
        let col = column_for(m, bits);
        if col.rows.is_empty() {
            stats.empty += 1;
            continue;
        }
        if bits & 1 == 1 || bits & last == 0 {
            stats.dominated += 1;
            continue;
        }
        if !seen.insert(col.rows.clone()) {
            stats.duplicate += 1;
            continue;
        }
        columns.push(col);
    }
    stats.kept = columns.len();
    Ok(PairMatrix {
        m,
        pairs: all_pairs(m),
        columns,
        pruning: stats,
    })
}

/// `D(M)` with every one of the `2^M` patterns kept, including empty columns.
pub fn build_unpruned_pair_matrix(m: usize) -> Result<PairMatrix> {
    check_m(m)?;
    let total = 1usize << m;
    let columns: Vec<Column> = (0..total as u32).map(|bits| column_for(m, bits)).collect();
    Ok(PairMatrix {
        m,
        pairs: all_pairs(m),
        pruning: PruneStats {
            patterns: total,
            kept: total,
            ..Default::default()
        },
        columns,
    })
}

impl PairMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn pruning(&self) -> PruneStats {
        self.pruning
    }

    /// Entry `D_{(i,j), b}`.
    pub fn entry(&self, pair: (usize, usize), pattern: Pattern) -> bool {
        let (i, j) = pair;
        !pattern.get(i - 1) && pattern.get(j - 1)
    }
}

/// Primal and dual optimal solutions for the `tau(M)` program.
#[derive(Clone, Debug, PartialEq)]
pub struct TauCertificate {
    pub m: usize,
    pub tau: Rational,
    /// One entry per pair, in row order.
    pub primal: Vec<((usize, usize), Rational)>,
    /// Nonzero dual entries only.
    pub dual: Vec<(Pattern, Rational)>,
    pub value: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateCheck {
    pub ok: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Exact simplex from the slack basis.
    Exact,
    /// Floating-point simplex proposes a basis; the solution is then
    /// reconstructed and certified exactly.
    Presolve,
    /// `Exact` up to [`EXACT_MODE_MAX_M`], `Presolve` above.
    Auto,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub mode: SolveMode,
    pub max_pivots: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: SolveMode::Auto,
            max_pivots: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveStats {
    pub pivots: usize,
    pub mode: SolveMode,
}

pub fn solve_tau(m: usize) -> Result<TauCertificate> {
    solve_tau_with(m, SolveOptions::default()).map(|(c, _)| c)
}

pub fn solve_tau_with(m: usize, opts: SolveOptions) -> Result<(TauCertificate, SolveStats)> {
    if !(2..=MAX_SOLVE_M).contains(&m) {
        return Err(invalid(format!("M must lie in 2..={MAX_SOLVE_M}, got {m}")));
    }
    let matrix = build_pair_matrix(m)?;
    solve_matrix(&matrix, opts)
}

/// Solves the program for an explicit (possibly unpruned) matrix.
pub fn solve_matrix(matrix: &PairMatrix, opts: SolveOptions) -> Result<(TauCertificate, SolveStats)> {
    let mode = match opts.mode {
        SolveMode::Auto if matrix.m <= EXACT_MODE_MAX_M => SolveMode::Exact,
        SolveMode::Auto => SolveMode::Presolve,
        other => other,
    };
    let (cert, pivots) = match mode {
        SolveMode::Exact => exact_simplex(matrix, opts.max_pivots)?,
        _ => presolved(matrix, opts.max_pivots)?,
    };
    let check = verify_against(&cert, matrix);
    if !check.ok {
        return Err(Error::Unresolved {
            m: matrix.m,
            reason: format!("certificate failed verification: {}", check.diagnostics.join("; ")),
            lower: "0".into(),
            upper: matrix.pairs.len().to_string(),
        });
    }
    Ok((cert, SolveStats { pivots, mode }))
}

// Tucker tableau: basic_i = rhs_i - sum_j a_ij nonbasic_j, objective
// z = value + sum_j c_j nonbasic_j. Variable ids: pair p -> p, slack of
// column k -> P + k.
//
// Rows are integer vectors over a positive per-row denominator, kept
// primitive (gcd of entries and denominator is 1). The objective row holds
// -c with rhs = value.
struct IntRow {
    a: Vec<BigInt>,
    rhs: BigInt,
    den: BigInt,
}

impl IntRow {
    fn normalize(&mut self) {
        let mut g = self.den.clone();
        for v in self.a.iter().chain(std::iter::once(&self.rhs)) {
            if g.is_one() {
                return;
            }
            if !v.is_zero() {
                g = g.gcd(v);
            }
        }
        if g.is_one() {
            return;
        }
        for v in self.a.iter_mut() {
            if !v.is_zero() {
                *v /= &g;
            }
        }
        self.rhs /= &g;
        self.den /= &g;
    }

    fn value(&self, v: &BigInt) -> Rational {
        Rational::new(v.clone(), self.den.clone())
    }
}

struct ExactTableau {
    rows: Vec<IntRow>,
    obj: IntRow,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
}

impl ExactTableau {
    fn new(matrix: &PairMatrix) -> Self {
        let p = matrix.pairs.len();
        let k = matrix.columns.len();
        let rows = matrix
            .columns
            .iter()
            .map(|col| {
                let mut a = vec![BigInt::zero(); p];
                for &r in &col.rows {
                    a[r as usize] = BigInt::one();
                }
                IntRow { a, rhs: BigInt::one(), den: BigInt::one() }
            })
            .collect();
        ExactTableau {
            rows,
            obj: IntRow { a: vec![-BigInt::one(); p], rhs: BigInt::zero(), den: BigInt::one() },
            basic: (p..p + k).collect(),
            nonbasic: (0..p).collect(),
        }
    }

    // Bland's rule: lowest-id improving variable enters; ratio ties go to the
    // lowest-id basic variable.
    fn choose_entering_bland(&self) -> Option<usize> {
        self.obj
            .a
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_negative())
            .min_by_key(|(j, _)| self.nonbasic[*j])
            .map(|(j, _)| j)
    }

    // Largest reduced cost, lowest id on ties.
    fn choose_entering_dantzig(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (j, v) in self.obj.a.iter().enumerate() {
            if !v.is_negative() {
                continue;
            }
            best = match best {
                Some(b)
                    if self.obj.a[b] < *v
                        || (self.obj.a[b] == *v && self.nonbasic[b] < self.nonbasic[j]) =>
                {
                    Some(b)
                }
                _ => Some(j),
            };
        }
        best
    }

    fn choose_leaving(&self, s: usize) -> Option<usize> {
        // ratio rhs_i / a_is; the row denominator cancels
        let mut best: Option<usize> = None;
        for (i, row) in self.rows.iter().enumerate() {
            if !row.a[s].is_positive() {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let rb = &self.rows[b];
                    let lhs = &row.rhs * &rb.a[s];
                    let rhs = &rb.rhs * &row.a[s];
                    lhs < rhs || (lhs == rhs && self.basic[i] < self.basic[b])
                }
            };
            if better {
                best = Some(i);
            }
        }
        best
    }

    fn rhs_is_zero(&self, r: usize) -> bool {
        self.rows[r].rhs.is_zero()
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let mut prow = std::mem::replace(
            &mut self.rows[r],
            IntRow { a: Vec::new(), rhs: BigInt::zero(), den: BigInt::one() },
        );
        let p = prow.a[s].clone();
        let dr = prow.den.clone();
        let nz: Vec<usize> = (0..prow.a.len())
            .filter(|&j| j != s && !prow.a[j].is_zero())
            .collect();
        let update = |row: &mut IntRow| {
            let f = std::mem::take(&mut row.a[s]);
            if f.is_zero() {
                return;
            }
            for (j, v) in row.a.iter_mut().enumerate() {
                if j != s && !v.is_zero() {
                    *v *= &p;
                }
            }
            for &j in &nz {
                row.a[j] -= &f * &prow.a[j];
            }
            row.a[s] = -(&f * &dr);
            row.rhs = &row.rhs * &p - &f * &prow.rhs;
            row.den *= &p;
            row.normalize();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                update(row);
            }
        }
        update(&mut self.obj);
        // new pivot row: entries unchanged, pivot entry d_r, denominator p
        prow.a[s] = dr;
        // p > 0: the ratio test only admits positive pivots
        prow.den = p;
        prow.normalize();
        self.rows[r] = prow;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[s]);
    }

    fn value(&self) -> Rational {
        self.obj.value(&self.obj.rhs)
    }
}

fn exact_simplex(matrix: &PairMatrix, max_pivots: usize) -> Result<(TauCertificate, usize)> {
    let p = matrix.pairs.len();
    let mut t = ExactTableau::new(matrix);
    let mut pivots = 0;
    // Dantzig pivots while the objective improves; Bland's rule from the
    // first degenerate pivot until the objective moves again. Bland cannot
    // cycle on a fixed vertex and the objective only ever increases, so the
    // loop terminates.
    let mut bland = false;
    loop {
        let entering = if bland {
            t.choose_entering_bland()
        } else {
            t.choose_entering_dantzig()
        };
        let Some(s) = entering else { break };
        if pivots >= max_pivots {
            return Err(Error::Unresolved {
                m: matrix.m,
                reason: format!("pivot cap {max_pivots} reached"),
                lower: to_fraction_string(&t.value()),
                upper: p.to_string(),
            });
        }
        // Each pair is covered by some column, so the program is bounded.
        let r = t.choose_leaving(s).ok_or_else(|| Error::Unresolved {
            m: matrix.m,
            reason: "unbounded direction (a pair is covered by no column)".into(),
            lower: to_fraction_string(&t.value()),
            upper: "inf".into(),
        })?;
        bland = t.rhs_is_zero(r);
        t.pivot(r, s);
        pivots += 1;
    }
    let mut y = vec![Rational::zero(); p];
    for (row, &var) in t.rows.iter().zip(&t.basic) {
        if var < p {
            y[var] = row.value(&row.rhs);
        }
    }
    let mut dual = Vec::new();
    for (j, &var) in t.nonbasic.iter().enumerate() {
        if var >= p && !t.obj.a[j].is_zero() {
            dual.push((matrix.columns[var - p].pattern, t.obj.value(&t.obj.a[j])));
        }
    }
    Ok((make_certificate(matrix, y, dual, t.value()), pivots))
}

fn make_certificate(
    matrix: &PairMatrix,
    y: Vec<Rational>,
    mut dual: Vec<(Pattern, Rational)>,
    value: Rational,
) -> TauCertificate {
    dual.sort_by_key(|(pat, _)| pat.to_bit_string());
    TauCertificate {
        m: matrix.m,
        tau: value.recip(),
        primal: matrix.pairs.iter().copied().zip(y).collect(),
        dual,
        value,
    }
}

// Floating-point simplex with a lightly perturbed right-hand side to avoid
// degenerate stalling. Only the final basis is used.
fn float_basis(matrix: &PairMatrix, max_pivots: usize) -> Result<(Vec<usize>, Vec<usize>, usize)> {
    const EPS: f64 = 1e-9;
    let p = matrix.pairs.len();
    let k = matrix.columns.len();
    let mut a = vec![0f64; k * p];
    for (i, col) in matrix.columns.iter().enumerate() {
        for &r in &col.rows {
            a[i * p + r as usize] = 1.0;
        }
    }
    // deterministic perturbation
    let mut rhs: Vec<f64> = (0..k)
        .map(|i| 1.0 + 1e-7 * (((i as u64).wrapping_mul(2654435761) % 1000) as f64 / 1000.0))
        .collect();
    let mut c = vec![1f64; p];
    let mut basic: Vec<usize> = (p..p + k).collect();
    let mut nonbasic: Vec<usize> = (0..p).collect();
    let mut pivots = 0;
    loop {
        let mut s = None;
        let mut best = EPS;
        for (j, &cj) in c.iter().enumerate() {
            if cj > best {
                best = cj;
                s = Some(j);
            }
        }
        let Some(s) = s else { break };
        if pivots >= max_pivots {
            return Err(Error::Unresolved {
                m: matrix.m,
                reason: format!("floating pivot cap {max_pivots} reached"),
                lower: "0".into(),
                upper: p.to_string(),
            });
        }
        let mut r = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..k {
            let ais = a[i * p + s];
            if ais > EPS {
                let ratio = rhs[i] / ais;
                if ratio < best_ratio - 1e-12 {
                    best_ratio = ratio;
                    r = Some(i);
                }
            }
        }
        let Some(r) = r else {
            return Err(Error::Unresolved {
                m: matrix.m,
                reason: "floating simplex found no leaving row".into(),
                lower: "0".into(),
                upper: "inf".into(),
            });
        };
        let inv = 1.0 / a[r * p + s];
        for j in 0..p {
            if j != s {
                a[r * p + j] *= inv;
            }
        }
        a[r * p + s] = inv;
        rhs[r] *= inv;
        let pivot_row: Vec<f64> = a[r * p..(r + 1) * p].to_vec();
        let nz: Vec<usize> = (0..p).filter(|&j| j != s && pivot_row[j] != 0.0).collect();
        for i in 0..k {
            if i == r {
                continue;
            }
            let f = a[i * p + s];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                a[i * p + j] -= f * pivot_row[j];
            }
            a[i * p + s] = -f * inv;
            rhs[i] -= f * rhs[r];
        }
        let f = c[s];
        for &j in &nz {
            c[j] -= f * pivot_row[j];
        }
        c[s] = -f * inv;
        std::mem::swap(&mut basic[r], &mut nonbasic[s]);
        pivots += 1;
    }
    Ok((basic, nonbasic, pivots))
}

fn presolved(matrix: &PairMatrix, max_pivots: usize) -> Result<(TauCertificate, usize)> {
    let p = matrix.pairs.len();
    let (basic, nonbasic, pivots) = float_basis(matrix, max_pivots)?;
    let ys: Vec<usize> = basic.iter().copied().filter(|&v| v < p).collect();
    let tight: Vec<usize> = nonbasic.iter().copied().filter(|&v| v >= p).map(|v| v - p).collect();
    let unresolved = |reason: String| Error::Unresolved {
        m: matrix.m,
        reason,
        lower: "0".into(),
        upper: p.to_string(),
    };
    if ys.len() != tight.len() {
        return Err(unresolved("inconsistent floating basis".into()));
    }
    let n = ys.len();
    // B[t][y] = 1 iff pair ys[y] lies in column tight[t]
    let mut b = vec![vec![Rational::zero(); n]; n];
    for (ti, &col) in tight.iter().enumerate() {
        for &r in &matrix.columns[col].rows {
            if let Some(yi) = ys.iter().position(|&v| v == r as usize) {
                b[ti][yi] = Rational::one();
            }
        }
    }
    let ones = vec![Rational::one(); n];
    let y_basic = solve_linear(b.clone(), ones.clone())
        .ok_or_else(|| unresolved("singular basis from floating presolve".into()))?;
    let bt: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| b[j][i].clone()).collect()).collect();
    let z_tight = solve_linear(bt, ones).ok_or_else(|| unresolved("singular dual basis".into()))?;
    let mut y = vec![Rational::zero(); p];
    for (yi, &var) in ys.iter().enumerate() {
        y[var] = y_basic[yi].clone();
    }
    let dual: Vec<(Pattern, Rational)> = tight
        .iter()
        .zip(z_tight)
        .filter(|(_, z)| !z.is_zero())
        .map(|(&col, z)| (matrix.columns[col].pattern, z))
        .collect();
    let value: Rational = y.iter().sum();
    if value.is_zero() {
        return Err(unresolved("zero objective".into()));
    }
    Ok((make_certificate(matrix, y, dual, value), pivots))
}

/// Gaussian elimination over the rationals; `None` if singular.
fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] *= &inv;
        }
        b[col] *= &inv;
        let prow = a[col].clone();
        let pb = b[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in col..n {
                if !prow[j].is_zero() {
                    a[r][j] -= &f * &prow[j];
                }
            }
            b[r] -= &f * &pb;
        }
    }
    Some(b)
}

/// Re-checks primal feasibility, dual feasibility and the zero duality gap
/// against a freshly built pair matrix, all in exact arithmetic.
pub fn verify_certificate(cert: &TauCertificate) -> CertificateCheck {
    match build_pair_matrix(cert.m) {
        Ok(matrix) => verify_against(cert, &matrix),
        Err(e) => CertificateCheck {
            ok: false,
            diagnostics: vec![e.to_string()],
        },
    }
}

fn verify_against(cert: &TauCertificate, matrix: &PairMatrix) -> CertificateCheck {
    let mut diag = Vec::new();
    let m = matrix.m;
    if cert.m != m {
        diag.push(format!("certificate is for M={} but matrix has M={m}", cert.m));
    }
    // primal: y >= 0 and yD <= 1, using a common denominator
    let mut y = vec![Rational::zero(); matrix.pairs.len()];
    for ((i, j), v) in &cert.primal {
        if !(1 <= *i && i < j && *j <= m) {
            diag.push(format!("primal entry for invalid pair ({i},{j})"));
            continue;
        }
        if v.is_negative() {
            diag.push(format!("primal y({i},{j}) = {} is negative", to_fraction_string(v)));
        }
        y[pair_index(m, *i, *j)] = v.clone();
    }
    let den = y.iter().fold(BigInt::one(), |acc, v| num_integer::lcm(acc, v.denom().clone()));
    let y_int: Vec<BigInt> = y.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    let mut violations = 0;
    for col in &matrix.columns {
        let s: BigInt = col.rows.iter().map(|&r| &y_int[r as usize]).sum();
        if s > den {
            violations += 1;
            if violations <= 5 {
                diag.push(format!(
                    "primal constraint for pattern {} violated: {} > 1",
                    col.pattern.to_bit_string(),
                    to_fraction_string(&Rational::new(s, den.clone()))
                ));
            }
        }
    }
    if violations > 5 {
        diag.push(format!("... {violations} primal violations in total"));
    }
    // dual: z >= 0 and every pair covered with total weight >= 1
    let mut cover = vec![Rational::zero(); matrix.pairs.len()];
    for (pat, z) in &cert.dual {
        if pat.m as usize != m {
            diag.push(format!("dual pattern {} has wrong length", pat.to_bit_string()));
            continue;
        }
        if z.is_negative() {
            diag.push(format!("dual z({}) is negative", pat.to_bit_string()));
        }
        for (i, j) in pat.covered_pairs() {
            cover[pair_index(m, i, j)] += z;
        }
    }
    for (idx, c) in cover.iter().enumerate() {
        if *c < Rational::one() {
            let (i, j) = matrix.pairs[idx];
            diag.push(format!(
                "dual covering of pair ({i},{j}) is {} < 1",
                to_fraction_string(c)
            ));
        }
    }
    let sum_y: Rational = y.iter().sum();
    let sum_z: Rational = cert.dual.iter().map(|(_, z)| z).sum();
    if sum_y != cert.value {
        diag.push(format!(
            "primal sum {} differs from value {}",
            to_fraction_string(&sum_y),
            to_fraction_string(&cert.value)
        ));
    }
    if sum_z != cert.value {
        diag.push(format!(
            "dual sum {} differs from value {}",
            to_fraction_string(&sum_z),
            to_fraction_string(&cert.value)
        ));
    }
    if cert.value.is_zero() || cert.tau != cert.value.recip() {
        diag.push(format!(
            "tau {} is not the reciprocal of value {}",
            to_fraction_string(&cert.tau),
            to_fraction_string(&cert.value)
        ));
    }
    CertificateCheck {
        ok: diag.is_empty(),
        diagnostics: diag,
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    #[serde(rename = "M")]
    m: usize,
    tau: String,
    primal: Vec<(String, String)>,
    dual: Vec<(String, String)>,
}

impl TauCertificate {
    pub fn to_json(&self) -> String {
        let doc = CertificateJson {
            m: self.m,
            tau: to_fraction_string(&self.tau),
            primal: self
                .primal
                .iter()
                .map(|((i, j), v)| (format!("{i},{j}"), to_fraction_string(v)))
                .collect(),
            dual: self
                .dual
                .iter()
                .map(|(p, v)| (p.to_bit_string(), to_fraction_string(v)))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let tau = parse_fraction(&doc.tau)?;
        if !tau.is_positive() {
            return Err(Error::Parse("tau must be positive".into()));
        }
        let mut primal = Vec::with_capacity(doc.primal.len());
        for (pair, v) in &doc.primal {
            let (i, j) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad pair {pair:?}")))?;
            let i: usize = i.trim().parse().map_err(|_| Error::Parse(format!("bad pair {pair:?}")))?;
            let j: usize = j.trim().parse().map_err(|_| Error::Parse(format!("bad pair {pair:?}")))?;
            primal.push(((i, j), parse_fraction(v)?));
        }
        let mut dual = Vec::with_capacity(doc.dual.len());
        for (pat, v) in &doc.dual {
            dual.push((Pattern::parse(pat)?, parse_fraction(v)?));
        }
        Ok(TauCertificate {
            m: doc.m,
            value: tau.recip(),
            tau,
            primal,
            dual,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TauSource {
    /// Exact LP optimum (table entry re-derived by the solver).
    Table,
    /// Lower bound `L/(4L-2)` from Plotkin-achieving constructions.
    PlotkinConstruction,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauOfL {
    pub value: Rational,
    pub source: TauSource,
}

/// `tau(L)` for list sizes `L >= 2`: the exact value up to 18, and the
/// achievable lower bound `L/(4L-2)` beyond.
pub fn tau_of_l(l: usize) -> Result<TauOfL> {
    if l < 2 {
        return Err(invalid(format!("tau(L) needs L >= 2, got {l}")));
    }
    Ok(match known_tau(l) {
        Some(value) => TauOfL {
            value,
            source: TauSource::Table,
        },
        None => TauOfL {
            value: ratio(l as i64, 4 * l as i64 - 2),
            source: TauSource::PlotkinConstruction,
        },
    })
}

/// `tau_of_l` as a float, memoised for the rate optimizer.
pub fn tau_of_l_f64(l: usize) -> f64 {
    to_f64(&tau_of_l(l).expect("L >= 2").value)
}

/// Solved certificates keyed by `M`, as produced for the table export.
pub type CertificateTable = BTreeMap<usize, TauCertificate>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn pair_matrix_m2() {
        let d = build_pair_matrix(2).unwrap();
        assert_eq!(d.pairs(), &[(1, 2)]);
        assert_eq!(d.columns().len(), 1);
        assert_eq!(d.columns()[0].pattern.to_bit_string(), "01");
        assert_eq!(d.columns()[0].rows, vec![0]);
    }

    #[test]
    fn pair_matrix_m3() {
        let d = build_pair_matrix(3).unwrap();
        assert_eq!(d.pairs().len(), 3);
        let p = Pattern::parse("011").unwrap();
        let pairs: Vec<_> = p.covered_pairs().collect();
        assert_eq!(pairs, vec![(1, 2), (1, 3)]);
        assert!(d.entry((1, 2), p) && d.entry((1, 3), p) && !d.entry((2, 3), p));
        let kept: Vec<String> = d.columns().iter().map(|c| c.pattern.to_bit_string()).collect();
        assert_eq!(kept, vec!["001", "011"]);
        let all_ones = Pattern::parse("111").unwrap();
        assert_eq!(all_ones.covered_pairs().count(), 0);
        assert_eq!(d.pruning().empty, 4);
        assert_eq!(d.pruning().kept + d.pruning().empty + d.pruning().dominated + d.pruning().duplicate, 8);
    }

    #[test]
    fn pair_matrix_range() {
        assert!(build_pair_matrix(1).is_err());
        assert!(build_pair_matrix(21).is_err());
        assert!(solve_tau(19).is_err());
    }

    // Independent pruning: drop empty columns, duplicates, and every column
    // whose pair set is contained in another column's pair set.
    fn brute_force_prune(m: usize) -> Vec<Vec<u16>> {
        let all = build_unpruned_pair_matrix(m).unwrap();
        let mut sets: Vec<Vec<u16>> = all
            .columns()
            .iter()
            .map(|c| c.rows.clone())
            .filter(|r| !r.is_empty())
            .collect();
        sets.sort();
        sets.dedup();
        let subset = |a: &Vec<u16>, b: &Vec<u16>| a.iter().all(|x| b.contains(x));
        let mut kept: Vec<Vec<u16>> = sets
            .iter()
            .filter(|a| !sets.iter().any(|b| b != *a && subset(a, b)))
            .cloned()
            .collect();
        kept.sort();
        kept
    }

    #[test]
    fn endpoint_pruning_matches_brute_force() {
        for m in 2..=8 {
            let mut fast: Vec<Vec<u16>> = build_pair_matrix(m)
                .unwrap()
                .columns()
                .iter()
                .map(|c| c.rows.clone())
                .collect();
            fast.sort();
            assert_eq!(fast, brute_force_prune(m), "M={m}");
            assert_eq!(fast.len(), 1 << (m - 2));
        }
    }

    #[test]
    fn small_values_match_table() {
        for m in 2..=8 {
            let cert = solve_tau(m).unwrap();
            assert_eq!(cert.tau, known_tau(m).unwrap(), "M={m}");
            assert!(verify_certificate(&cert).ok);
        }
    }

    #[test]
    fn pruning_is_sound() {
        for m in 2..=6 {
            let pruned = solve_tau(m).unwrap();
            let full = build_unpruned_pair_matrix(m).unwrap();
            let (cert, _) = solve_matrix(
                &full,
                SolveOptions {
                    mode: SolveMode::Exact,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(cert.value, pruned.value, "M={m}");
        }
    }

    #[test]
    fn presolve_agrees_with_exact() {
        for m in 2..=9 {
            let (a, _) = solve_tau_with(
                m,
                SolveOptions {
                    mode: SolveMode::Presolve,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(a.tau, known_tau(m).unwrap(), "M={m}");
        }
    }

    #[test]
    fn verification_catches_tampering() {
        let cert = solve_tau(5).unwrap();
        assert_eq!(cert.tau, ratio(2, 5));
        let check = verify_certificate(&cert);
        assert!(check.ok, "{:?}", check.diagnostics);

        let mut bumped = cert.clone();
        bumped.primal[0].1 += int(1);
        let check = verify_certificate(&bumped);
        assert!(!check.ok);
        assert!(check.diagnostics.iter().any(|d| d.contains("primal constraint")));

        let mut gap = cert.clone();
        gap.dual[0].1 += ratio(1, 7);
        let check = verify_certificate(&gap);
        assert!(!check.ok);
        assert!(check.diagnostics.iter().any(|d| d.contains("dual sum")));
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = solve_tau(4).unwrap();
        let json = cert.to_json();
        assert!(json.contains("\"M\": 4"));
        assert!(json.contains("\"tau\": \"1/2\""));
        let back = TauCertificate::from_json(&json).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back).ok);
        assert!(TauCertificate::from_json("{\"M\":2}").is_err());
    }

    #[test]
    fn tau_of_l_branches() {
        assert_eq!(tau_of_l(12).unwrap().value, ratio(1, 3));
        assert_eq!(tau_of_l(7).unwrap().value, ratio(3, 8));
        let far = tau_of_l(100).unwrap();
        assert_eq!(far.value, ratio(50, 199));
        assert_eq!(far.source, TauSource::PlotkinConstruction);
        assert_eq!(tau_of_l(18).unwrap().source, TauSource::Table);
        assert!(tau_of_l(1).is_err());
    }

    #[test]
    #[ignore = "presolve for M = 13..=16 takes minutes"]
    fn presolve_certifies_table_13_to_16() {
        for m in 13..=16 {
            let (cert, stats) = solve_tau_with(m, SolveOptions { max_pivots: 10_000_000, ..SolveOptions::default() }).unwrap();
            assert_eq!(stats.mode, SolveMode::Presolve);
            assert!(verify_certificate(&cert).ok);
            assert_eq!(cert.tau, known_tau(m).unwrap(), "M={m}");
        }
    }

    #[test]
    fn table_is_monotone_and_above_plotkin_construction() {
        for w in KNOWN_TAU.windows(2) {
            assert!(ratio(w[1].1, w[1].2) <= ratio(w[0].1, w[0].2));
        }
        for &(m, p, q) in &KNOWN_TAU {
            assert!(ratio(p, q) >= ratio(m as i64, 4 * m as i64 - 2));
            assert!(ratio(p, q) <= int(1));
        }
    }
}
