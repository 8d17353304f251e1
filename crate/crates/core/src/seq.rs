//! Finite sequences of naturals and binary index strings.
//!
//! `Seq` is the universal node type: every tree in this crate is a set of
//! `Seq`s closed under initial segments. `Bits` indexes the binary label
//! systems built by the harvest constructions.

use std::fmt;

/// A finite sequence of naturals, ordered by the prefix relation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Seq(Vec<u64>);

impl Seq {
    pub fn empty() -> Self {
        Seq(Vec::new())
    }

    pub fn new(values: Vec<u64>) -> Self {
        Seq(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Option<u64> {
        self.0.get(i).copied()
    }

    pub fn last(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn max_value(&self) -> Option<u64> {
        self.0.iter().copied().max()
    }

    /// Child node obtained by appending one value.
    pub fn child(&self, v: u64) -> Seq {
        let mut vals = self.0.clone();
        vals.push(v);
        Seq(vals)
    }

    pub fn push(&mut self, v: u64) {
        self.0.push(v);
    }

    /// Concatenation with a slice of further values.
    pub fn concat(&self, tail: &[u64]) -> Seq {
        let mut vals = self.0.clone();
        vals.extend_from_slice(tail);
        Seq(vals)
    }

    /// Initial segment of the given length (must not exceed `len`).
    pub fn restrict(&self, len: usize) -> Seq {
        Seq(self.0[..len].to_vec())
    }

    pub fn parent(&self) -> Option<Seq> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.restrict(self.0.len() - 1))
        }
    }

    pub fn is_prefix_of(&self, other: &Seq) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn is_strict_prefix_of(&self, other: &Seq) -> bool {
        other.0.len() > self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// Comparable in the tree order: one is a prefix of the other.
    pub fn comparable(&self, other: &Seq) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Strictly increasing values throughout.
    pub fn is_increasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] < w[1])
    }

    /// Render as a comma-separated value list; the empty sequence renders
    /// as the empty string.
    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse the `render` format. Empty input yields the empty sequence.
    pub fn parse(text: &str) -> Result<Seq, String> {
        let t = text.trim();
        if t.is_empty() {
            return Ok(Seq::empty());
        }
        let mut vals = Vec::new();
        for part in t.split(',') {
            vals.push(
                part.trim()
                    .parse::<u64>()
                    .map_err(|e| format!("bad value {part:?}: {e}"))?,
            );
        }
        Ok(Seq(vals))
    }
}

impl From<&[u64]> for Seq {
    fn from(v: &[u64]) -> Self {
        Seq(v.to_vec())
    }
}

impl<const N: usize> From<[u64; N]> for Seq {
    fn from(v: [u64; N]) -> Self {
        Seq(v.to_vec())
    }
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.render())
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

/// `true` when `k` exceeds every element of the iterator. The maximum of an
/// empty set is treated as -1, so every natural exceeds it.
pub fn exceeds_all<I: IntoIterator<Item = u64>>(k: u64, it: I) -> bool {
    it.into_iter().all(|m| k > m)
}

/// A binary string indexing the labels of a constructed subtree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bits(Vec<u8>);

impl Bits {
    pub fn empty() -> Self {
        Bits(Vec::new())
    }

    pub fn new(bits: Vec<u8>) -> Self {
        debug_assert!(bits.iter().all(|&b| b <= 1));
        Bits(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn child(&self, b: u8) -> Bits {
        debug_assert!(b <= 1);
        let mut v = self.0.clone();
        v.push(b);
        Bits(v)
    }

    pub fn parent(&self) -> Option<Bits> {
        if self.0.is_empty() {
            None
        } else {
            Some(Bits(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn restrict(&self, len: usize) -> Bits {
        Bits(self.0[..len].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Bits) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    pub fn comparable(&self, other: &Bits) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Numeric value reading the string most-significant-bit first; this is
    /// also the rank in the lexicographic enumeration of strings of its length.
    pub fn num(&self) -> usize {
        self.0.iter().fold(0usize, |a, &b| a * 2 + b as usize)
    }

    /// All strings of the given length in lexicographic order.
    pub fn all_of_len(len: usize) -> Vec<Bits> {
        let mut out = Vec::with_capacity(1 << len);
        for k in 0..(1usize << len) {
            let mut v = vec![0u8; len];
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = ((k >> (len - 1 - i)) & 1) as u8;
            }
            out.push(Bits(v));
        }
        out
    }

    /// All strings of length at most `len`, grouped by level.
    pub fn all_up_to(len: usize) -> Vec<Bits> {
        (0..=len).flat_map(Bits::all_of_len).collect()
    }

    pub fn render(&self) -> String {
        self.0.iter().map(|b| char::from(b'0' + b)).collect()
    }

    pub fn parse(text: &str) -> Result<Bits, String> {
        let mut v = Vec::new();
        for c in text.trim().chars() {
            match c {
                '0' => v.push(0),
                '1' => v.push(1),
                _ => return Err(format!("bad bit {c:?}")),
            }
        }
        Ok(Bits(v))
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "eps")
        } else {
            write!(f, "{}", self.render())
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[macro_export]
macro_rules! seq {
    () => { $crate::seq::Seq::empty() };
    ($($v:expr),+ $(,)?) => { $crate::seq::Seq::new(vec![$($v as u64),+]) };
}

#[macro_export]
macro_rules! bits {
    () => { $crate::seq::Bits::empty() };
    ($($v:expr),+ $(,)?) => { $crate::seq::Bits::new(vec![$($v as u8),+]) };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_order() {
        let a = seq![0, 1];
        let b = seq![0, 1, 4];
        assert!(a.is_prefix_of(&b));
        assert!(!b.is_prefix_of(&a));
        assert!(a.comparable(&b));
        assert!(!seq![0, 2].comparable(&b));
        assert!(Seq::empty().is_prefix_of(&a));
    }

    #[test]
    fn empty_max_convention() {
        // k > max(empty) for every k, including 0.
        assert!(exceeds_all(0, []));
        assert!(exceeds_all(3, [0, 2]));
        assert!(!exceeds_all(2, [0, 2]));
    }

    #[test]
    fn seq_render_parse() {
        for s in [Seq::empty(), seq![5], seq![0, 3, 7]] {
            assert_eq!(Seq::parse(&s.render()).unwrap(), s);
        }
        assert!(Seq::parse("1,x").is_err());
    }

    #[test]
    fn bits_enumeration_is_lexicographic() {
        let all = Bits::all_of_len(2);
        let rendered: Vec<_> = all.iter().map(|b| b.render()).collect();
        assert_eq!(rendered, vec!["00", "01", "10", "11"]);
        for (k, b) in all.iter().enumerate() {
            assert_eq!(b.num(), k);
        }
    }
}
