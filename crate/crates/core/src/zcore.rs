//! Binary words, asymmetric distances, Z-balls and list-decoding radii.
//!
//! Positions are numbered from the left, so the word `1100` has support
//! `{0, 1}`. Words are stored left-aligned in 64-bit chunks which makes the
//! derived ordering coincide with lexicographic order of the 0/1 strings.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Inline(u64),
    Packed(Box<[u64]>),
}

/// A fixed-length binary word.
///
/// Words of length at most 64 live in a single machine word; longer words use
/// a packed chunk array. Unused trailing bits are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitWord {
    len: usize,
    repr: Repr,
}

#[inline]
fn chunk_count(len: usize) -> usize {
    len.div_ceil(64).max(1)
}

#[inline]
fn mask_bit(pos: usize) -> u64 {
    1u64 << (63 - (pos % 64))
}

impl BitWord {
    fn from_chunks(len: usize, chunks: Vec<u64>) -> Self {
        debug_assert_eq!(chunks.len(), chunk_count(len));
        let repr = if len <= 64 {
            Repr::Inline(chunks[0])
        } else {
            Repr::Packed(chunks.into_boxed_slice())
        };
        BitWord { len, repr }
    }

    fn chunks(&self) -> &[u64] {
        match &self.repr {
            Repr::Inline(w) => std::slice::from_ref(w),
            Repr::Packed(c) => c,
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self::from_chunks(len, vec![0; chunk_count(len)])
    }

    pub fn ones(len: usize) -> Self {
        Self::from_fn(len, |_| true)
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut chunks = vec![0u64; chunk_count(len)];
        for pos in 0..len {
            if f(pos) {
                chunks[pos / 64] |= mask_bit(pos);
            }
        }
        Self::from_chunks(len, chunks)
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut chunks = vec![0u64; chunk_count(len)];
        for pos in positions {
            if pos >= len {
                return Err(invalid(format!("position {pos} out of range for length {len}")));
            }
            chunks[pos / 64] |= mask_bit(pos);
        }
        Ok(Self::from_chunks(len, chunks))
    }

    /// Word whose 0/1 string is the `len`-bit binary representation of `index`
    /// (most significant bit first). Requires `len <= 64`.
    pub fn from_index(len: usize, index: u64) -> Self {
        assert!(len <= 64, "from_index needs len <= 64");
        if len == 0 {
            return Self::zeros(0);
        }
        if len < 64 {
            debug_assert!(index >> len == 0);
        }
        BitWord {
            len,
            repr: Repr::Inline(index << (64 - len)),
        }
    }

    /// Inverse of [`BitWord::from_index`]; `None` for words longer than 64.
    pub fn to_index(&self) -> Option<u64> {
        match self.repr {
            Repr::Inline(_) if self.len == 0 => Some(0),
            Repr::Inline(w) => Some(w >> (64 - self.len)),
            Repr::Packed(_) => None,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, pos: usize) -> bool {
        assert!(pos < self.len, "position {pos} out of range");
        self.chunks()[pos / 64] & mask_bit(pos) != 0
    }

    pub fn weight(&self) -> usize {
        self.chunks().iter().map(|c| c.count_ones() as usize).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&p| self.get(p))
    }

    fn check_len(&self, other: &BitWord) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &BitWord, f: impl Fn(u64, u64) -> u64) -> Result<BitWord> {
        self.check_len(other)?;
        let chunks = self
            .chunks()
            .iter()
            .zip(other.chunks())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_chunks(self.len, chunks))
    }

    /// Bitwise AND: the word supported on the intersection of both supports.
    pub fn and(&self, other: &BitWord) -> Result<BitWord> {
        self.zip_with(other, |a, b| a & b)
    }

    /// `supp(self) ⊆ supp(other)`.
    pub fn is_subset_of(&self, other: &BitWord) -> Result<bool> {
        self.check_len(other)?;
        Ok(self
            .chunks()
            .iter()
            .zip(other.chunks())
            .all(|(&a, &b)| a & !b == 0))
    }

    /// Copy of the word with the given positions forced to zero, i.e. the
    /// channel output when exactly those ones are erased.
    pub fn clear_positions(&self, positions: &[usize]) -> Result<BitWord> {
        let mut chunks = self.chunks().to_vec();
        for &pos in positions {
            if pos >= self.len {
                return Err(invalid(format!("position {pos} out of range for length {}", self.len)));
            }
            chunks[pos / 64] &= !mask_bit(pos);
        }
        Ok(Self::from_chunks(self.len, chunks))
    }

    /// Concatenation `self || other`.
    pub fn concat(&self, other: &BitWord) -> BitWord {
        BitWord::from_fn(self.len + other.len, |p| {
            if p < self.len {
                self.get(p)
            } else {
                other.get(p - self.len)
            }
        })
    }
}

impl Ord for BitWord {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.chunks().cmp(other.chunks()))
    }
}

impl PartialOrd for BitWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 0..self.len {
            f.write_str(if self.get(p) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::InvalidWord(s.to_string()));
        }
        let bytes = s.as_bytes();
        Ok(BitWord::from_fn(bytes.len(), |p| bytes[p] == b'1'))
    }
}

impl Serialize for BitWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Number of positions where `x` is 1 and `y` is 0.
pub fn delta(x: &BitWord, y: &BitWord) -> Result<usize> {
    x.check_len(y)?;
    Ok(x
        .chunks()
        .iter()
        .zip(y.chunks())
        .map(|(&a, &b)| (a & !b).count_ones() as usize)
        .sum())
}

/// Asymmetric distance `2 max(Δ(x,y), Δ(y,x))`.
pub fn dz(x: &BitWord, y: &BitWord) -> Result<usize> {
    Ok(2 * delta(x, y)?.max(delta(y, x)?))
}

/// Hamming distance `Δ(x,y) + Δ(y,x)`.
pub fn dh(x: &BitWord, y: &BitWord) -> Result<usize> {
    Ok(delta(x, y)? + delta(y, x)?)
}

/// Membership in the Z-ball around a received word: `candidate` could have
/// been transmitted if it covers `center` and at most `t` of its ones were lost.
pub fn zball_contains(center: &BitWord, t: usize, candidate: &BitWord) -> Result<bool> {
    Ok(delta(center, candidate)? == 0 && delta(candidate, center)? <= t)
}

/// Word supported on the intersection of all supports.
pub fn intersection(points: &[BitWord]) -> Result<BitWord> {
    let (first, rest) = points
        .split_first()
        .ok_or_else(|| invalid("intersection of an empty set of words"))?;
    rest.iter().try_fold(first.clone(), |acc, w| acc.and(w))
}

/// Average radius of `L+1 >= 2` points: the mean number of ones each point
/// loses relative to the intersection of their supports.
pub fn avg_radius(points: &[BitWord]) -> Result<Rational> {
    if points.len() < 2 {
        return Err(invalid(format!(
            "average radius needs at least 2 points, got {}",
            points.len()
        )));
    }
    let z = intersection(points)?;
    let mut total = 0usize;
    for p in points {
        total += delta(p, &z)?;
    }
    Ok(Rational::new(BigInt::from(total), BigInt::from(points.len())))
}

/// A set of distinct words of common length, kept in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Code {
    len: usize,
    words: Vec<BitWord>,
    constant_weight: Option<usize>,
}

impl Code {
    pub fn new(len: usize, words: impl IntoIterator<Item = BitWord>) -> Result<Self> {
        let mut words: Vec<BitWord> = words.into_iter().collect();
        for w in &words {
            if w.len() != len {
                return Err(Error::LengthMismatch {
                    left: len,
                    right: w.len(),
                });
            }
        }
        words.sort();
        if let Some(pair) = words.windows(2).find(|p| p[0] == p[1]) {
            return Err(Error::DuplicateWord(pair[0].to_string()));
        }
        Ok(Code {
            len,
            words,
            constant_weight: None,
        })
    }

    pub fn with_constant_weight(
        len: usize,
        weight: usize,
        words: impl IntoIterator<Item = BitWord>,
    ) -> Result<Self> {
        let mut code = Self::new(len, words)?;
        if let Some(w) = code.words.iter().find(|w| w.weight() != weight) {
            return Err(Error::WeightMismatch {
                word: w.to_string(),
                expected: weight,
                actual: w.weight(),
            });
        }
        code.constant_weight = Some(weight);
        Ok(code)
    }

    /// Word length `n`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Number of codewords.
    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[BitWord] {
        &self.words
    }

    pub fn constant_weight(&self) -> Option<usize> {
        self.constant_weight
    }

    pub fn index_of(&self, word: &BitWord) -> Option<usize> {
        self.words.binary_search(word).ok()
    }

    /// Minimum asymmetric distance; `None` for codes with fewer than two words.
    pub fn min_dz(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, a) in self.words.iter().enumerate() {
            for b in &self.words[i + 1..] {
                let d = dz(a, b).expect("equal lengths");
                best = Some(best.map_or(d, |m| m.min(d)));
            }
        }
        best
    }

    /// Plain-text format: a header line `n=<len> w=<weight|->` followed by one
    /// 0/1 word per line.
    pub fn to_text(&self) -> String {
        let w = self
            .constant_weight
            .map_or_else(|| "-".to_string(), |w| w.to_string());
        let mut out = format!("n={} w={}\n", self.len, w);
        for word in &self.words {
            out.push_str(&word.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header line".into()))?;
        let mut len = None;
        let mut weight = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => {
                    len = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad n in {header:?}")))?)
                }
                Some(("w", "-")) => weight = None,
                Some(("w", v)) => {
                    weight = Some(v.parse::<usize>().map_err(|_| Error::Parse(format!("bad w in {header:?}")))?)
                }
                _ => return Err(Error::Parse(format!("unexpected header field {field:?}"))),
            }
        }
        let len = len.ok_or_else(|| Error::Parse("header is missing n=".into()))?;
        let words = lines.map(str::parse).collect::<Result<Vec<BitWord>>>()?;
        match weight {
            Some(w) => Self::with_constant_weight(len, w, words),
            None => Self::new(len, words),
        }
    }
}

/// Largest `t` such that no Z-ball of radius `t` holds `L+1` codewords.
///
/// Computed as the minimum over `(L+1)`-subsets of the largest weight deficit
/// relative to the subset's support intersection, minus one. Codes with at
/// most `L` words are list decodable at any radius and report `n`.
pub fn list_radius(code: &Code, list_size: usize) -> Result<usize> {
    if list_size == 0 {
        return Err(invalid("list size must be at least 1"));
    }
    if code.size() <= list_size {
        return Ok(code.len());
    }
    let weights: Vec<usize> = code.words().iter().map(BitWord::weight).collect();
    let mut best = usize::MAX;
    let mut chosen = Vec::with_capacity(list_size + 1);
    subset_search(code.words(), &weights, list_size + 1, 0, None, 0, &mut chosen, &mut best);
    // Every subset of distinct words has a deficit of at least one.
    Ok(best - 1)
}

// Deficits only grow as words are added, so a partial subset already at or
// above the best deficit cannot improve it.
#[allow(clippy::too_many_arguments)]
fn subset_search(
    words: &[BitWord],
    weights: &[usize],
    target: usize,
    start: usize,
    meet: Option<&BitWord>,
    max_weight: usize,
    chosen: &mut Vec<usize>,
    best: &mut usize,
) {
    if chosen.len() == target {
        let deficit = max_weight - meet.expect("non-empty subset").weight();
        *best = (*best).min(deficit);
        return;
    }
    let remaining = target - chosen.len();
    for i in start..=words.len() - remaining {
        let next_meet = match meet {
            Some(m) => m.and(&words[i]).expect("equal lengths"),
            None => words[i].clone(),
        };
        let next_max = max_weight.max(weights[i]);
        if chosen.len() + 1 >= 2 && next_max - next_meet.weight() >= *best {
            continue;
        }
        chosen.push(i);
        subset_search(words, weights, target, i + 1, Some(&next_meet), next_max, chosen, best);
        chosen.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn w(s: &str) -> BitWord {
        s.parse().unwrap()
    }

    fn code(words: &[&str]) -> Code {
        let n = words[0].len();
        Code::new(n, words.iter().map(|s| w(s))).unwrap()
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&w("1100"), &w("1010")).unwrap(), 1);
        assert_eq!(delta(&w("1010"), &w("1010")).unwrap(), 0);
        assert_eq!(delta(&w("111"), &w("000")).unwrap(), 3);
        assert!(matches!(
            delta(&w("11"), &w("110")),
            Err(Error::LengthMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(dz(&w("1100"), &w("1010")).unwrap(), 2);
        assert_eq!(dh(&w("1100"), &w("1010")).unwrap(), 2);
        assert_eq!(dz(&w("110"), &w("111")).unwrap(), 2);
        assert_eq!(dh(&w("110"), &w("111")).unwrap(), 1);
        assert!(dz(&w("1"), &w("10")).is_err());
        assert!(dh(&w("1"), &w("10")).is_err());
    }

    #[test]
    fn zball_examples() {
        assert!(zball_contains(&w("100"), 1, &w("110")).unwrap());
        assert!(!zball_contains(&w("100"), 1, &w("111")).unwrap());
        assert!(zball_contains(&w("1010"), 0, &w("1010")).unwrap());
        assert!(!zball_contains(&w("100"), 3, &w("011")).unwrap());
        assert!(zball_contains(&w("10"), 0, &w("101")).is_err());
    }

    #[test]
    fn avg_radius_examples() {
        assert_eq!(avg_radius(&[w("110"), w("101")]).unwrap(), int(1));
        assert_eq!(avg_radius(&[w("1011"), w("1011")]).unwrap(), int(0));
        // z = 100, losses 2 + 1 + 1 over three points.
        assert_eq!(avg_radius(&[w("111"), w("110"), w("101")]).unwrap(), ratio(4, 3));
        assert!(avg_radius(&[w("111")]).is_err());
        assert!(avg_radius(&[w("111"), w("11")]).is_err());
    }

    #[test]
    fn list_radius_examples() {
        // the ball of radius 1 around 100 holds both words; dz = 2 corrects nothing
        assert_eq!(list_radius(&code(&["110", "101"]), 1).unwrap(), 0);
        assert_eq!(list_radius(&code(&["110", "101"]), 2).unwrap(), 3);
        assert_eq!(list_radius(&code(&["1100", "0011", "1111"]), 5).unwrap(), 4);
        assert!(list_radius(&code(&["110", "101"]), 0).is_err());
    }

    #[test]
    fn long_words_use_packed_storage() {
        let a = BitWord::from_positions(130, [0, 64, 129]).unwrap();
        let b = BitWord::from_positions(130, [0, 65, 129]).unwrap();
        assert!(matches!(a.repr, Repr::Packed(_)));
        assert_eq!(a.weight(), 3);
        assert_eq!(delta(&a, &b).unwrap(), 1);
        assert_eq!(dz(&a, &b).unwrap(), 2);
        assert_eq!(a.to_string().parse::<BitWord>().unwrap(), a);
        assert!(a > b);
        assert_eq!(a.to_index(), None);
    }

    #[test]
    fn code_construction() {
        assert!(matches!(
            Code::new(2, [w("10"), w("10")]),
            Err(Error::DuplicateWord(_))
        ));
        assert!(Code::new(2, [w("10"), w("101")]).is_err());
        assert!(matches!(
            Code::with_constant_weight(3, 2, [w("110"), w("100")]),
            Err(Error::WeightMismatch { .. })
        ));
        let c = code(&["101", "011", "110"]);
        assert_eq!(c.words()[0], w("011"));
        assert_eq!(c.min_dz(), Some(2));
    }

    #[test]
    fn code_text_format() {
        let c = Code::with_constant_weight(4, 2, [w("1100"), w("0011")]).unwrap();
        let text = c.to_text();
        assert_eq!(text, "n=4 w=2\n0011\n1100\n");
        assert_eq!(Code::from_text(&text).unwrap(), c);
        let free = Code::from_text("n=3 w=-\n111\n000\n").unwrap();
        assert_eq!(free.constant_weight(), None);
        assert!(Code::from_text("n=3 w=1\n111\n").is_err());
        assert!(Code::from_text("").is_err());
    }

    fn word_strategy(n: usize) -> impl Strategy<Value = BitWord> {
        proptest::collection::vec(any::<bool>(), n).prop_map(move |bits| BitWord::from_fn(n, |p| bits[p]))
    }

    fn pair_strategy() -> impl Strategy<Value = (BitWord, BitWord)> {
        (1usize..100).prop_flat_map(|n| (word_strategy(n), word_strategy(n)))
    }

    proptest! {
        #[test]
        fn dz_relates_to_dh((x, y) in pair_strategy()) {
            let wx = x.weight() as i64;
            let wy = y.weight() as i64;
            prop_assert_eq!(dz(&x, &y).unwrap() as i64, dh(&x, &y).unwrap() as i64 + (wx - wy).abs());
            prop_assert_eq!(dz(&x, &y).unwrap(), dz(&y, &x).unwrap());
            prop_assert_eq!(dz(&x, &y).unwrap() % 2, 0);
            prop_assert_eq!(dz(&x, &y).unwrap() == 0, x == y);
            if wx == wy {
                prop_assert_eq!(dz(&x, &y).unwrap(), dh(&x, &y).unwrap());
            }
        }

        #[test]
        fn text_round_trip(words in proptest::collection::btree_set(0u64..256, 1..10)) {
            let c = Code::new(8, words.iter().map(|&i| BitWord::from_index(8, i))).unwrap();
            prop_assert_eq!(Code::from_text(&c.to_text()).unwrap(), c);
        }

        #[test]
        fn ordering_matches_strings((x, y) in pair_strategy()) {
            prop_assert_eq!(x.cmp(&y), x.to_string().cmp(&y.to_string()));
        }

        #[test]
        fn radius_bounds_list_radius(words in proptest::collection::btree_set(0u64..1024, 2..8), l in 1usize..4) {
            let c = Code::new(10, words.iter().map(|&i| BitWord::from_index(10, i))).unwrap();
            let t = list_radius(&c, l).unwrap();
            if c.size() > l {
                // mean <= max <= (L+1) mean on the minimising subset
                let min_rad = itertools::Itertools::combinations(c.words().iter().cloned(), l + 1)
                    .map(|s| avg_radius(&s).unwrap())
                    .min()
                    .unwrap();
                prop_assert!(BigInt::from(t) >= min_rad.ceil().to_integer() - 1);
                prop_assert!(Rational::from_integer(BigInt::from(t + 1)) <= min_rad * BigInt::from(l + 1));
            }
            // non-decreasing in L
            prop_assert!(list_radius(&c, l + 1).unwrap() >= t);
        }
    }
}
