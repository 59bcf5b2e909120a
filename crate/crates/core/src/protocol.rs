//! Two-stage transmission with one use of noiseless feedback.
//!
//! Stage one sends a constant-weight codeword. The receiver's output `y1`
//! tells both sides how many ones were erased (`e = w - |y1|`) and which
//! codewords remain consistent. Stage two then sends the rank of the true
//! message among those candidates, using a code strong enough for the
//! `t - e` errors the channel has left.
//!
//! Candidates are ranked lexicographically by codeword; both endpoints derive
//! the same ranks from `y1` alone.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::oracle::{max_code, SearchBudget};
use crate::zcore::{list_radius, BitWord, Code};

/// Per-message cap on enumerated error patterns.
pub const ADVERSARY_PATTERN_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolParams {
    /// Total number of erased ones across both stages.
    pub t: usize,
    /// Constant-weight first-stage code; message `m` is its `m`-th word.
    pub stage1: Code,
    /// Second-stage code for each candidate-list size.
    pub stage2_family: BTreeMap<usize, Code>,
}

impl ProtocolParams {
    pub fn new(t: usize, stage1: Code, stage2_family: BTreeMap<usize, Code>) -> Result<Self> {
        if stage1.constant_weight().is_none() {
            return Err(invalid("stage-one code must have constant weight"));
        }
        if stage1.size() < 2 {
            return Err(invalid("stage-one code needs at least two words"));
        }
        let mut n2 = None;
        for (&l, code) in &stage2_family {
            if l == 0 || code.size() < l {
                return Err(invalid(format!("stage-two code for list size {l} has {} words", code.size())));
            }
            if *n2.get_or_insert(code.len()) != code.len() {
                return Err(invalid("stage-two codes differ in length"));
            }
        }
        Ok(ProtocolParams { t, stage1, stage2_family })
    }

    pub fn n1(&self) -> usize {
        self.stage1.len()
    }

    /// Stage-two length; zero when the family is empty.
    pub fn n2(&self) -> usize {
        self.stage2_family.values().next().map_or(0, Code::len)
    }

    pub fn w(&self) -> usize {
        self.stage1.constant_weight().expect("checked in new")
    }

    pub fn message_count(&self) -> usize {
        self.stage1.size()
    }

    /// Largest list size with a stage-two code.
    pub fn l_up(&self) -> usize {
        self.stage2_family.keys().next_back().copied().unwrap_or(1)
    }

    /// Text form: a `t=` line, then `[stage1]` and `[stage2 <l>]` sections
    /// each holding a code in the plain code format.
    pub fn to_text(&self) -> String {
        let mut out = format!("t={}\n[stage1]\n{}", self.t, self.stage1.to_text());
        for (l, code) in &self.stage2_family {
            let _ = write!(out, "[stage2 {l}]\n{}", code.to_text());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut t = None;
        let mut stage1 = None;
        let mut family = BTreeMap::new();
        let mut section: Option<(String, String)> = None;
        let mut finish = |section: Option<(String, String)>| -> Result<()> {
            let Some((name, body)) = section else { return Ok(()) };
            let code = Code::from_text(&body)?;
            match name.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["stage1"] => stage1 = Some(code),
                ["stage2", l] => {
                    let l = l.parse::<usize>().map_err(|_| Error::Parse(format!("bad list size in [{name}]")))?;
                    family.insert(l, code);
                }
                _ => return Err(Error::Parse(format!("unknown section [{name}]"))),
            }
            Ok(())
        };
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                finish(section.take())?;
                section = Some((name.to_string(), String::new()));
            } else if let Some((_, body)) = section.as_mut() {
                body.push_str(line);
                body.push('\n');
            } else if let Some(v) = line.strip_prefix("t=") {
                t = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad t in {line:?}")))?);
            } else {
                return Err(Error::Parse(format!("unexpected line {line:?}")));
            }
        }
        finish(section)?;
        let t = t.ok_or_else(|| Error::Parse("missing t=".into()))?;
        let stage1 = stage1.ok_or_else(|| Error::Parse("missing [stage1]".into()))?;
        ProtocolParams::new(t, stage1, family)
    }
}

/// Largest candidate list after `e` stage-one errors: the smallest `L` with
/// list radius `t_L >= e`.
pub fn list_bound(stage1: &Code, e: usize) -> Result<usize> {
    for l in 1..=stage1.size() {
        if list_radius(stage1, l)? >= e {
            return Ok(l);
        }
    }
    Ok(stage1.size())
}

/// Every candidate-list size that some received word with deficit `e` produces.
pub fn attained_list_sizes(stage1: &Code, e: usize) -> Result<Vec<usize>> {
    let w = stage1.constant_weight().ok_or_else(|| invalid("stage-one code must have constant weight"))?;
    if e > w {
        return Ok(Vec::new());
    }
    let mut sizes = std::collections::BTreeSet::new();
    for c in stage1.words() {
        let support: Vec<usize> = c.support().collect();
        for erased in itertools::Itertools::combinations(support.iter().copied(), e) {
            let y = c.clear_positions(&erased)?;
            let count = stage1.words().iter().filter(|x| y.is_subset_of(x).unwrap_or(false)).count();
            sizes.insert(count);
        }
    }
    Ok(sizes.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRow {
    /// Stage-one errors.
    pub e: usize,
    /// Largest candidate list after `e` errors.
    pub list_bound: usize,
    /// List sizes that actually occur after `e` errors.
    pub attained: Vec<usize>,
    /// Errors left for stage two.
    pub remaining: usize,
    /// Asymmetric distance stage two needs: `2(t-e)+1`.
    pub required_dz: usize,
    /// Why this row fails, if it does.
    pub issue: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub valid: bool,
}

/// Checks, for every stage-one error count `e <= min(w, t)`, that the
/// candidate list fits the family and that the stage-two code for every
/// list size that can occur corrects the `t - e` remaining errors.
pub fn validate_parameters(p: &ProtocolParams) -> Result<ValidationReport> {
    let w = p.w();
    let mut rows = Vec::new();
    for e in 0..=w.min(p.t) {
        let bound = list_bound(&p.stage1, e)?;
        let attained = attained_list_sizes(&p.stage1, e)?;
        let remaining = p.t - e;
        let required_dz = 2 * remaining + 1;
        let mut issue = None;
        if bound > p.l_up() && bound > 1 {
            issue = Some(format!("list size {bound} exceeds L_up = {}", p.l_up()));
        }
        for &l in attained.iter().filter(|&&l| l > 1) {
            if issue.is_some() {
                break;
            }
            match p.stage2_family.get(&l) {
                None => issue = Some(format!("no stage-two code for list size {l}")),
                Some(code) => {
                    // any l distinct words of the code may be used; check the first l
                    let used = Code::new(code.len(), code.words()[..l].iter().cloned())?;
                    let d = used.min_dz().unwrap_or(usize::MAX);
                    if d < required_dz {
                        issue = Some(format!("stage-two code for list size {l} has d_Z = {d} < {required_dz}"));
                    }
                }
            }
        }
        rows.push(ValidationRow { e, list_bound: bound, attained, remaining, required_dz, issue });
    }
    let valid = rows.iter().all(|r| r.issue.is_none());
    Ok(ValidationReport { rows, valid })
}

pub fn encode_stage1(p: &ProtocolParams, m: usize) -> Result<BitWord> {
    p.stage1
        .words()
        .get(m)
        .cloned()
        .ok_or_else(|| invalid(format!("message {m} out of range 0..{}", p.message_count())))
}

/// Indices of the stage-one codewords covering `y1`, in lexicographic order.
pub fn decode_candidates(p: &ProtocolParams, y1: &BitWord) -> Result<Vec<usize>> {
    if y1.len() != p.n1() {
        return Err(Error::LengthMismatch { left: y1.len(), right: p.n1() });
    }
    if y1.weight() > p.w() {
        return Err(Error::Decode(format!("received {y1} is heavier than the code weight {}", p.w())));
    }
    let mut out = Vec::new();
    for (i, c) in p.stage1.words().iter().enumerate() {
        if y1.is_subset_of(c)? {
            out.push(i);
        }
    }
    if out.is_empty() {
        return Err(Error::Decode(format!("received {y1} is covered by no codeword")));
    }
    Ok(out)
}

fn stage2_code(p: &ProtocolParams, l: usize) -> Result<&Code> {
    p.stage2_family
        .get(&l)
        .ok_or_else(|| Error::Decode(format!("no stage-two code for list size {l}")))
}

/// Stage-two word: codeword `rank(m)` of the code for the current list size,
/// or all zeros when the list is a singleton.
pub fn encode_stage2(p: &ProtocolParams, m: usize, y1: &BitWord) -> Result<BitWord> {
    let cands = decode_candidates(p, y1)?;
    let rank = cands
        .iter()
        .position(|&c| c == m)
        .ok_or_else(|| invalid(format!("message {m} is inconsistent with {y1}")))?;
    if cands.len() == 1 {
        return Ok(BitWord::zeros(p.n2()));
    }
    Ok(stage2_code(p, cands.len())?.words()[rank].clone())
}

/// Recovers the message index from both received words.
pub fn decode(p: &ProtocolParams, y1: &BitWord, y2: &BitWord) -> Result<usize> {
    let cands = decode_candidates(p, y1)?;
    if cands.len() == 1 {
        return Ok(cands[0]);
    }
    let code = stage2_code(p, cands.len())?;
    if y2.len() != code.len() {
        return Err(Error::LengthMismatch { left: y2.len(), right: code.len() });
    }
    let mut best: Option<(usize, usize)> = None;
    for (i, c) in code.words()[..cands.len()].iter().enumerate() {
        if y2.is_subset_of(c)? {
            let flips = c.weight() - y2.weight();
            if best.is_none_or(|(f, _)| flips < f) {
                best = Some((flips, i));
            }
        }
    }
    let (_, rank) = best.ok_or_else(|| Error::Decode(format!("no stage-two codeword covers {y2}")))?;
    Ok(cands[rank])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub m: usize,
    pub x1: BitWord,
    pub y1: BitWord,
    pub x2: BitWord,
    pub y2: BitWord,
    pub m_hat: Option<usize>,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }
}

/// Runs one message through both stages with the given erased positions.
pub fn run_once(p: &ProtocolParams, m: usize, erase1: &[usize], erase2: &[usize]) -> Result<Transcript> {
    let x1 = encode_stage1(p, m)?;
    if erase1.iter().any(|&i| !x1.get(i)) {
        return Err(invalid("stage-one errors must hit ones of the sent word"));
    }
    let y1 = x1.clear_positions(erase1)?;
    let x2 = encode_stage2(p, m, &y1)?;
    if erase2.iter().any(|&i| !x2.get(i)) {
        return Err(invalid("stage-two errors must hit ones of the sent word"));
    }
    let y2 = x2.clear_positions(erase2)?;
    let m_hat = decode(p, &y1, &y2).ok();
    Ok(Transcript { m, x1, y1, x2, y2, m_hat })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryVerdict {
    pub m: usize,
    /// Error patterns tried.
    pub patterns: u64,
    /// Transcripts whose decoded message was wrong or missing (at most 16 kept).
    pub failures: Vec<Transcript>,
    pub failure_count: u64,
    /// SHA-256 over every transcript, in enumeration order.
    pub transcript_hash: String,
    pub pass: bool,
}

fn subsets_up_to(support: &[usize], k: usize) -> Vec<Vec<usize>> {
    (0..=k.min(support.len()))
        .flat_map(|s| itertools::Itertools::combinations(support.iter().copied(), s))
        .collect()
}

fn binomial_sum(n: usize, k: usize) -> u64 {
    let mut term = 1u64;
    let mut total = 1u64;
    for i in 0..k.min(n) {
        term = term * (n - i) as u64 / (i + 1) as u64;
        total = total.saturating_add(term);
    }
    total
}

/// Every erasure pattern of at most `t` ones, the second-stage part chosen
/// after the second-stage word is known.
pub fn adversary_exhaustive(p: &ProtocolParams, m: usize) -> Result<AdversaryVerdict> {
    adversary_with_limit(p, m, ADVERSARY_PATTERN_LIMIT)
}

fn adversary_with_limit(p: &ProtocolParams, m: usize, limit: u64) -> Result<AdversaryVerdict> {
    let x1 = encode_stage1(p, m)?;
    let s1: Vec<usize> = x1.support().collect();
    let first = subsets_up_to(&s1, p.t);
    let mut sizes = Vec::with_capacity(first.len());
    let mut total = 0u64;
    for e1 in &first {
        let x2 = encode_stage2(p, m, &x1.clear_positions(e1)?)?;
        let k = binomial_sum(x2.weight(), p.t - e1.len());
        total = total.saturating_add(k);
        sizes.push(k);
        if total > limit {
            return Err(Error::BudgetExceeded(format!("more than {limit} error patterns for message {m}")));
        }
    }
    let per_first: Vec<Result<Vec<Transcript>>> = first
        .par_iter()
        .map(|e1| {
            let y1 = x1.clear_positions(e1)?;
            if p.w() - y1.weight() != e1.len() {
                return Err(invalid("receiver-side error count disagrees with the pattern"));
            }
            let x2 = encode_stage2(p, m, &y1)?;
            let s2: Vec<usize> = x2.support().collect();
            subsets_up_to(&s2, p.t - e1.len()).iter().map(|e2| run_once(p, m, e1, e2)).collect()
        })
        .collect();
    let mut hasher = Sha256::new();
    let mut failures = Vec::new();
    let mut failure_count = 0u64;
    let mut patterns = 0u64;
    for (batch, expected) in per_first.into_iter().zip(sizes) {
        let batch = batch?;
        debug_assert_eq!(batch.len() as u64, expected);
        for tr in batch {
            patterns += 1;
            hasher.update(tr.to_json().as_bytes());
            hasher.update(b"\n");
            if tr.m_hat != Some(m) {
                failure_count += 1;
                if failures.len() < 16 {
                    failures.push(tr);
                }
            }
        }
    }
    Ok(AdversaryVerdict {
        m,
        patterns,
        failures,
        failure_count,
        transcript_hash: hex::encode(hasher.finalize()),
        pass: failure_count == 0,
    })
}

/// Builds a stage-two family for `stage1` and `t` at length `n2`: for each
/// list size the first words of a maximum code whose distance covers the
/// most demanding error count at which that list size occurs.
pub fn design_stage2_family(stage1: &Code, t: usize, n2: usize, budget: &SearchBudget) -> Result<BTreeMap<usize, Code>> {
    let w = stage1.constant_weight().ok_or_else(|| invalid("stage-one code must have constant weight"))?;
    let mut need: BTreeMap<usize, usize> = BTreeMap::new();
    for e in 0..=w.min(t) {
        for l in attained_list_sizes(stage1, e)? {
            if l > 1 {
                let d = 2 * (t - e) + 1;
                let entry = need.entry(l).or_insert(0);
                *entry = (*entry).max(d);
            }
        }
    }
    let mut family = BTreeMap::new();
    for (l, d) in need {
        // asymmetric distances are even
        let d_even = d + d % 2;
        let found = max_code(n2, d_even, budget)?;
        if found.objective < l {
            return Err(invalid(format!(
                "length {n2} holds only {} words at d_Z >= {d_even}; list size {l} needs more",
                found.objective
            )));
        }
        family.insert(l, Code::new(n2, found.code.words()[..l].iter().cloned())?);
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::max_constant_weight_code;

    fn all_weight_two() -> Code {
        let words = ["1100", "1010", "1001", "0110", "0101", "0011"].iter().map(|s| s.parse().unwrap());
        Code::with_constant_weight(4, 2, words).unwrap()
    }

    fn small_fixture(t: usize) -> ProtocolParams {
        let stage1 = max_constant_weight_code(6, 3, 4, &SearchBudget::default()).unwrap().code;
        let family = design_stage2_family(&stage1, t, 4, &SearchBudget::default()).unwrap();
        ProtocolParams::new(t, stage1, family).unwrap()
    }

    #[test]
    fn candidates_follow_lexicographic_order() {
        let p = ProtocolParams::new(2, all_weight_two(), BTreeMap::new()).unwrap();
        let y1: BitWord = "1000".parse().unwrap();
        let c = decode_candidates(&p, &y1).unwrap();
        let words: Vec<String> = c.iter().map(|&i| p.stage1.words()[i].to_string()).collect();
        assert_eq!(words, ["1001", "1010", "1100"]);
        assert_eq!(decode_candidates(&p, &BitWord::zeros(4)).unwrap().len(), 6);
        for m in 0..6 {
            assert_eq!(decode_candidates(&p, &p.stage1.words()[m]).unwrap(), vec![m]);
        }
        assert!(decode_candidates(&p, &"1110".parse().unwrap()).is_err());
        assert!(decode_candidates(&p, &"100".parse().unwrap()).is_err());
    }

    #[test]
    fn zero_budget_is_always_valid() {
        let p = ProtocolParams::new(0, all_weight_two(), BTreeMap::new()).unwrap();
        let report = validate_parameters(&p).unwrap();
        assert!(report.valid);
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].list_bound, 1);
        for m in 0..6 {
            let v = adversary_exhaustive(&p, m).unwrap();
            assert!(v.pass);
            assert_eq!(v.patterns, 1);
        }
    }

    #[test]
    fn list_bound_matches_enumeration() {
        let codes = [all_weight_two(), small_fixture(3).stage1];
        for code in codes {
            for e in 0..=code.constant_weight().unwrap() {
                let attained = attained_list_sizes(&code, e).unwrap();
                assert_eq!(*attained.iter().max().unwrap(), list_bound(&code, e).unwrap(), "e={e}");
            }
        }
    }

    #[test]
    fn fixture_passes_every_message() {
        let p = small_fixture(3);
        assert_eq!(p.message_count(), 4);
        let report = validate_parameters(&p).unwrap();
        assert!(report.valid, "{report:?}");
        let bounds: Vec<usize> = report.rows.iter().map(|r| r.list_bound).collect();
        // dz >= 4 makes one erasure unambiguous; each coordinate lies in two words
        assert_eq!(bounds, [1, 1, 2, 4]);
        for m in 0..p.message_count() {
            let v = adversary_exhaustive(&p, m).unwrap();
            assert!(v.pass, "{v:?}");
            assert_eq!(v, adversary_exhaustive(&p, m).unwrap());
        }
    }

    #[test]
    fn split_budget_round_trip() {
        let p = small_fixture(3);
        let x1 = encode_stage1(&p, 2).unwrap();
        let s1: Vec<usize> = x1.support().collect();
        let x2 = encode_stage2(&p, 2, &x1.clear_positions(&s1[..2]).unwrap()).unwrap();
        let s2: Vec<usize> = x2.support().collect();
        let tr = run_once(&p, 2, &s1[..2], &s2[..1]).unwrap();
        assert_eq!(tr.m_hat, Some(2));
        assert_eq!(tr.y1.weight(), 1);
    }

    #[test]
    fn extra_error_breaks_the_fixture() {
        let base = small_fixture(3);
        let p = ProtocolParams { t: 4, ..base };
        assert!(!validate_parameters(&p).unwrap().valid);
        let fails: u64 = (0..p.message_count()).map(|m| adversary_exhaustive(&p, m).unwrap().failure_count).sum();
        assert!(fails > 0);
    }

    #[test]
    fn undersized_stage_two_is_flagged() {
        let mut p = small_fixture(3);
        // two words at d_Z = 2 cannot absorb the one error left after e = 2
        p.stage2_family.insert(2, Code::new(4, ["0000", "0001"].iter().map(|s| s.parse().unwrap())).unwrap());
        let report = validate_parameters(&p).unwrap();
        assert!(!report.valid);
        let bad: Vec<usize> = report.rows.iter().filter(|r| r.issue.is_some()).map(|r| r.e).collect();
        assert_eq!(bad, [2]);
    }

    #[test]
    fn singleton_list_ignores_stage_two() {
        let p = small_fixture(3);
        let x1 = encode_stage1(&p, 1).unwrap();
        assert_eq!(encode_stage2(&p, 1, &x1).unwrap(), BitWord::zeros(4));
        assert_eq!(decode(&p, &x1, &"1111".parse().unwrap()).unwrap(), 1);
    }

    #[test]
    fn text_round_trip() {
        let p = small_fixture(3);
        assert_eq!(ProtocolParams::from_text(&p.to_text()).unwrap(), p);
        assert!(ProtocolParams::from_text("[stage1]\nn=2 w=1\n10\n01\n").is_err());
    }

    #[test]
    fn budget_refusal() {
        let p = small_fixture(3);
        let full = adversary_exhaustive(&p, 0).unwrap();
        assert!(adversary_with_limit(&p, 0, full.patterns).is_ok());
        assert!(matches!(adversary_with_limit(&p, 0, full.patterns - 1), Err(Error::BudgetExceeded(_))));
    }
}
