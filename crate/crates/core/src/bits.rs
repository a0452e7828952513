//! Finite binary strings, prefix algebra and the interleaving operator.
//!
//! Everything in the crate is a finite prefix: inputs, outputs, program
//! codes and oracle tapes are all [`BitString`]s. The canonical text form is
//! a run of ASCII `'0'`/`'1'` characters with no separators.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("interleave needs |a| - |b| in {{0, 1}}, got |a| = {a}, |b| = {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("range [{start}, {start}+{len}) exceeds string of length {total}")]
    OutOfRange {
        start: usize,
        len: usize,
        total: usize,
    },
    #[error("invalid character {found:?} at column {column}")]
    InvalidChar { column: usize, found: char },
}

const WORD: usize = 64;

/// A finite binary string.
///
/// Bits are packed into 64-bit words; bit `i` lives in word `i / 64` at
/// position `i % 64`. Unused high bits of the last word are always zero, so
/// equality and hashing only ever see logical bits.
#[derive(Clone, Default)]
pub struct BitString {
    words: SmallVec<[u64; 2]>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: SmallVec::with_capacity(bits.div_ceil(WORD)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        let mut words = SmallVec::new();
        words.resize(len.div_ceil(WORD), 0);
        Self { words, len }
    }

    pub fn ones(len: usize) -> Self {
        (0..len).map(|_| true).collect()
    }

    /// The `len`-bit big-endian rendering of `value`: bit 0 of the result is
    /// the most significant of the `len` low bits. Enumerating `value` in
    /// increasing order walks the strings of length `len` lexicographically.
    pub fn from_uint(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_uint supports at most 64 bits");
        (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect()
    }

    /// Inverse of [`BitString::from_uint`].
    pub fn to_uint(&self) -> Option<u64> {
        if self.len > 64 {
            return None;
        }
        Some(self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> Option<bool> {
        (i < self.len).then(|| self.bit(i))
    }

    #[inline]
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / WORD] |= 1 << (self.len % WORD);
        }
        self.len += 1;
    }

    pub fn pop(&mut self) -> Option<bool> {
        if self.len == 0 {
            return None;
        }
        let b = self.bit(self.len - 1);
        self.truncate(self.len - 1);
        Some(b)
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "set index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn truncate(&mut self, len: usize) {
        if len >= self.len {
            return;
        }
        self.len = len;
        self.words.truncate(len.div_ceil(WORD));
        if !len.is_multiple_of(WORD) {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (len % WORD)) - 1;
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        if self.len.is_multiple_of(WORD) {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = BitString::with_capacity(self.len + other.len);
        out.extend_from(self);
        out.extend_from(other);
        out
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = bool> + ExactSizeIterator + '_ {
        (0..self.len).map(move |i| self.bit(i))
    }

    /// `x↾n`, defined for `n <= len`.
    pub fn prefix(&self, n: usize) -> Result<BitString, BitsError> {
        self.substring(0, n)
    }

    /// `x[m … m+n−1]`.
    pub fn substring(&self, m: usize, n: usize) -> Result<BitString, BitsError> {
        match m.checked_add(n) {
            Some(end) if end <= self.len => Ok(self.slice(m, end)),
            _ => Err(BitsError::OutOfRange {
                start: m,
                len: n,
                total: self.len,
            }),
        }
    }

    /// Unchecked range copy `[start, end)`; panics when out of range.
    pub fn slice(&self, start: usize, end: usize) -> BitString {
        assert!(
            start <= end && end <= self.len,
            "slice [{start}, {end}) of {}",
            self.len
        );
        if start.is_multiple_of(WORD) {
            let mut words: SmallVec<[u64; 2]> = self.words[start / WORD..end.div_ceil(WORD)]
                .iter()
                .copied()
                .collect();
            let len = end - start;
            words.truncate(len.div_ceil(WORD));
            let mut out = BitString { words, len };
            if !len.is_multiple_of(WORD) {
                let last = out.words.len() - 1;
                out.words[last] &= (1u64 << (len % WORD)) - 1;
            }
            return out;
        }
        (start..end).map(|i| self.bit(i)).collect()
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len <= other.len && (0..self.len).all(|i| self.bit(i) == other.bit(i))
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len < other.len && self.is_prefix_of(other)
    }

    pub fn reversed(&self) -> BitString {
        self.iter().rev().collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// First index at which `needle` occurs as a contiguous substring.
    pub fn find(&self, needle: &BitString) -> Option<usize> {
        if needle.len > self.len {
            return None;
        }
        (0..=self.len - needle.len)
            .find(|&start| (0..needle.len).all(|j| self.bit(start + j) == needle.bit(j)))
    }

    /// Bits at even indices, then bits at odd indices.
    pub fn deinterleave(&self) -> (BitString, BitString) {
        let mut even = BitString::with_capacity(self.len.div_ceil(2));
        let mut odd = BitString::with_capacity(self.len / 2);
        for (i, b) in self.iter().enumerate() {
            if i % 2 == 0 {
                even.push(b);
            } else {
                odd.push(b);
            }
        }
        (even, odd)
    }

    /// Every prefix `x↾0, x↾1, …, x↾len`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.len).map(move |n| self.slice(0, n))
    }

    /// All strings of length `len` in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        assert!(len < 64, "exhaustive iteration is capped below 64 bits");
        (0..1u64 << len).map(move |v| BitString::from_uint(v, len))
    }
}

/// `A_0 B_0 A_1 B_1 …`; requires `|a| = |b|` or `|a| = |b| + 1`.
pub fn interleave(a: &BitString, b: &BitString) -> Result<BitString, BitsError> {
    if a.len() != b.len() && a.len() != b.len() + 1 {
        return Err(BitsError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let mut out = BitString::with_capacity(a.len() + b.len());
    for i in 0..a.len() {
        out.push(a.bit(i));
        if i < b.len() {
            out.push(b.bit(i));
        }
    }
    Ok(out)
}

pub fn deinterleave(x: &BitString) -> (BitString, BitString) {
    x.deinterleave()
}

pub fn substring(x: &BitString, m: usize, n: usize) -> Result<BitString, BitsError> {
    x.substring(m, n)
}

/// True iff no member is a proper prefix of another member.
///
/// Sorting puts every string directly before the strings it prefixes, so a
/// single adjacent scan suffices. Duplicates are not proper prefixes.
pub fn is_prefix_free<'a, I>(set: I) -> bool
where
    I: IntoIterator<Item = &'a BitString>,
{
    let mut items: Vec<&BitString> = set.into_iter().collect();
    items.sort();
    items.dedup();
    items.windows(2).all(|w| !w[0].is_proper_prefix_of(w[1]))
}

impl PartialEq for BitString {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.words == other.words
    }
}

impl Eq for BitString {}

impl Hash for BitString {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.len.hash(state);
        self.words.hash(state);
    }
}

/// Lexicographic order; a proper prefix sorts before its extensions.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        for i in 0..common {
            match (self.bit(i), other.bit(i)) {
                (false, true) => return Ordering::Less,
                (true, false) => return Ordering::Greater,
                _ => {}
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortlex order: by length, then lexicographic.
pub fn shortlex(a: &BitString, b: &BitString) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl FromIterator<bool> for BitString {
    fn from_iter<T: IntoIterator<Item = bool>>(iter: T) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl Extend<bool> for BitString {
    fn extend<T: IntoIterator<Item = bool>>(&mut self, iter: T) {
        for b in iter {
            self.push(b);
        }
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(column, c)| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                found => Err(BitsError::InvalidChar { column, found }),
            })
            .collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl serde::Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which sequence a finite prefix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    A,
    B,
    Interleaved,
}

/// A finite prefix tagged with the sequence it was cut from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequencePrefix {
    pub value: BitString,
    pub role: Role,
}

impl SequencePrefix {
    pub fn new(value: BitString, role: Role) -> Self {
        Self { value, role }
    }

    pub fn interleaved(a: &BitString, b: &BitString) -> Result<Self, BitsError> {
        Ok(Self {
            value: interleave(a, b)?,
            role: Role::Interleaved,
        })
    }

    /// The `A`- and `B`-parts of an interleaved prefix; `None` for the others.
    pub fn split(&self) -> Option<(SequencePrefix, SequencePrefix)> {
        (self.role == Role::Interleaved).then(|| {
            let (a, b) = self.value.deinterleave();
            (
                SequencePrefix::new(a, Role::A),
                SequencePrefix::new(b, Role::B),
            )
        })
    }
}

/// Shorthand for tests and fixtures: parse a literal `'0'/'1'` string.
pub fn bits(s: &str) -> BitString {
    s.parse()
        .unwrap_or_else(|e| panic!("bad bit literal {s:?}: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn interleave_examples() {
        assert_eq!(interleave(&bits("01"), &bits("10")).unwrap(), bits("0110"));
        assert_eq!(interleave(&bits(""), &bits("")).unwrap(), bits(""));
        assert_eq!(interleave(&bits("1"), &bits("")).unwrap(), bits("1"));
        assert_eq!(
            interleave(&bits("1"), &bits("10")),
            Err(BitsError::LengthMismatch { a: 1, b: 2 })
        );
        assert!(interleave(&bits("111"), &bits("0")).is_err());
    }

    #[test]
    fn deinterleave_examples() {
        assert_eq!(deinterleave(&bits("0110")), (bits("01"), bits("10")));
        assert_eq!(deinterleave(&bits("1")), (bits("1"), bits("")));
        assert_eq!(deinterleave(&bits("")), (bits(""), bits("")));
    }

    #[test]
    fn substring_examples() {
        let x = bits("0110");
        assert_eq!(substring(&x, 1, 2).unwrap(), bits("11"));
        assert_eq!(substring(&x, 0, 4).unwrap(), bits("0110"));
        assert_eq!(
            substring(&x, 2, 3),
            Err(BitsError::OutOfRange {
                start: 2,
                len: 3,
                total: 4
            })
        );
        assert!(x.prefix(5).is_err());
        assert_eq!(x.prefix(0).unwrap(), BitString::new());
    }

    #[test]
    fn prefix_free_examples() {
        let set = [bits("0"), bits("10"), bits("110")];
        assert!(is_prefix_free(&set));
        assert!(!is_prefix_free(&[bits("0"), bits("01")]));
        assert!(is_prefix_free(&[] as &[BitString]));
    }

    fn pairwise_prefix_free(set: &[BitString]) -> bool {
        for (i, x) in set.iter().enumerate() {
            for (j, y) in set.iter().enumerate() {
                if i != j && x.is_proper_prefix_of(y) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn prefix_free_matches_pairwise_oracle_exhaustively() {
        // all strings of length <= 4: 31 of them
        let universe: Vec<BitString> = (0..=4).flat_map(BitString::all_of_len).collect();
        let n = universe.len();
        // every subset of size <= 3 exhaustively, plus a deterministic sweep of
        // larger subsets up to size 6
        let mut checked = 0usize;
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let set = vec![
                        universe[i].clone(),
                        universe[j].clone(),
                        universe[k].clone(),
                    ];
                    assert_eq!(is_prefix_free(&set), pairwise_prefix_free(&set), "{set:?}");
                    checked += 1;
                }
            }
        }
        for mask in 0u64..200_000 {
            let idx: Vec<usize> = (0..6)
                .map(|s| ((mask.wrapping_mul(2654435761) >> (5 * s)) % n as u64) as usize)
                .collect();
            let set: Vec<BitString> = idx.iter().map(|&i| universe[i].clone()).collect();
            assert_eq!(is_prefix_free(&set), pairwise_prefix_free(&set), "{set:?}");
            checked += 1;
        }
        assert!(checked > 5000);
    }

    #[test]
    fn packed_equality_ignores_history() {
        let mut a = bits("1011");
        a.push(true);
        a.pop();
        assert_eq!(a, bits("1011"));
        let long: BitString = (0..130).map(|i| i % 3 == 0).collect();
        let mut t = long.clone();
        t.truncate(70);
        assert_eq!(t, long.slice(0, 70));
        assert_eq!(long.slice(64, 130), (64..130).map(|i| i % 3 == 0).collect());
    }

    #[test]
    fn ordering_is_lexicographic_with_prefixes_first() {
        let mut v = vec![bits("1"), bits("01"), bits("0"), bits(""), bits("00")];
        v.sort();
        assert_eq!(
            v,
            vec![bits(""), bits("0"), bits("00"), bits("01"), bits("1")]
        );
        assert_eq!(shortlex(&bits("1"), &bits("00")), Ordering::Less);
    }

    #[test]
    fn uint_round_trip_and_text() {
        assert_eq!(BitString::from_uint(5, 4), bits("0101"));
        assert_eq!(bits("0101").to_uint(), Some(5));
        assert_eq!(bits("0110").to_string(), "0110");
        assert!(matches!(
            "01x".parse::<BitString>(),
            Err(BitsError::InvalidChar { column: 2, .. })
        ));
        assert_eq!(bits("0110").find(&bits("11")), Some(1));
        assert_eq!(bits("0110").find(&bits("00")), None);
    }

    #[test]
    fn sequence_prefix_split() {
        let p = SequencePrefix::interleaved(&bits("01"), &bits("10")).unwrap();
        let (a, b) = p.split().unwrap();
        assert_eq!((a.value, a.role), (bits("01"), Role::A));
        assert_eq!((b.value, b.role), (bits("10"), Role::B));
        assert!(SequencePrefix::new(bits("0"), Role::A).split().is_none());
    }

    fn arb_bits(max: usize) -> impl Strategy<Value = BitString> {
        proptest::collection::vec(any::<bool>(), 0..max).prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn deinterleave_inverts_interleave(b in arb_bits(150), extra in any::<bool>(), tail in any::<bool>()) {
            let mut a: BitString = b.iter().map(|x| !x).collect();
            if extra { a.push(tail); }
            let x = interleave(&a, &b).unwrap();
            prop_assert_eq!(x.len(), a.len() + b.len());
            for i in 0..b.len() {
                prop_assert_eq!(x.bit(2 * i), a.bit(i));
                prop_assert_eq!(x.bit(2 * i + 1), b.bit(i));
            }
            prop_assert_eq!(deinterleave(&x), (a, b));
        }

        #[test]
        fn interleave_reproduces_any_string(x in arb_bits(200)) {
            let (a, b) = deinterleave(&x);
            prop_assert_eq!(interleave(&a, &b).unwrap(), x);
        }
    }
}
