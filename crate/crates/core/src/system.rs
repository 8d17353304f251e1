//! Indexed families of nodes: binary label systems, pair-indexed label
//! systems, their realizations as finite trees, and the section and
//! restriction operators.

use crate::fintree::FinTree;
use crate::seq::{Bits, Seq};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("selector too short: need length {need}, have {have}")]
    SelectorTooShort { need: usize, have: usize },
    #[error("label missing at {0}")]
    MissingLabel(String),
    #[error("monotonicity violated: {parent} -> {child}")]
    NotMonotone { parent: String, child: String },
}

/// A family of nodes indexed by binary strings, monotone in the index:
/// extending the string extends the node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSystem {
    labels: BTreeMap<Bits, Seq>,
    depth: usize,
}

impl LabeledSystem {
    pub fn new(depth: usize) -> Self {
        LabeledSystem {
            labels: BTreeMap::new(),
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn insert(&mut self, t: Bits, label: Seq) {
        self.labels.insert(t, label);
    }

    pub fn get(&self, t: &Bits) -> Option<&Seq> {
        self.labels.get(t)
    }

    pub fn label(&self, t: &Bits) -> Result<&Seq, SystemError> {
        self.labels
            .get(t)
            .ok_or_else(|| SystemError::MissingLabel(format!("{t:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bits, &Seq)> {
        self.labels.iter()
    }

    /// Index strings of exactly the given level, lexicographically.
    pub fn level(&self, n: usize) -> Vec<&Bits> {
        let mut v: Vec<&Bits> = self.labels.keys().filter(|t| t.len() == n).collect();
        v.sort_by_key(|t| t.num());
        v
    }

    /// Total on all strings up to `depth`.
    pub fn is_total(&self) -> bool {
        (0..=self.depth).all(|n| self.level(n).len() == 1 << n)
    }

    /// Monotone: t < t' implies label(t) < label(t').
    pub fn check_monotone(&self) -> Result<(), SystemError> {
        for (t, lbl) in &self.labels {
            if let Some(p) = t.parent() {
                if let Some(plbl) = self.labels.get(&p) {
                    if !plbl.is_strict_prefix_of(lbl) {
                        return Err(SystemError::NotMonotone {
                            parent: format!("{p:?}"),
                            child: format!("{t:?}"),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The downward closure of the labels as an explicit tree.
    pub fn realize(&self) -> FinTree {
        let depth_bound = self.labels.values().map(|s| s.len()).max().unwrap_or(0);
        let width_bound = self
            .labels
            .values()
            .filter_map(|s| s.max_value())
            .max()
            .unwrap_or(0);
        FinTree::from_seqs(depth_bound, width_bound, self.labels.values().cloned())
    }

    /// Lines `t : v0,v1,...` under a versioned header; the root index
    /// renders as the empty string.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "orchard-sys v1 depth={}", self.depth);
        let mut keys: Vec<&Bits> = self.labels.keys().collect();
        keys.sort_by_key(|t| (t.len(), t.num()));
        for t in keys {
            let _ = writeln!(s, "{} : {}", t.render(), self.labels[t].render());
        }
        s
    }

    pub fn parse(text: &str) -> Result<LabeledSystem, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("missing header")?;
        let depth = header
            .strip_prefix("orchard-sys v1 depth=")
            .ok_or_else(|| format!("bad header {header:?}"))?
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad depth: {e}"))?;
        let mut sys = LabeledSystem::new(depth);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (t, v) = line
                .split_once(" : ")
                .ok_or_else(|| format!("bad line {line:?}"))?;
            sys.insert(Bits::parse(t)?, Seq::parse(v)?);
        }
        Ok(sys)
    }
}

/// A family indexed by pairs of equal-length binary strings, monotone in
/// the coordinatewise order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiLabeledSystem {
    labels: BTreeMap<(Bits, Bits), Seq>,
    depth: usize,
}

impl BiLabeledSystem {
    pub fn new(depth: usize) -> Self {
        BiLabeledSystem {
            labels: BTreeMap::new(),
            depth,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn insert(&mut self, s: Bits, t: Bits, label: Seq) {
        debug_assert_eq!(s.len(), t.len());
        self.labels.insert((s, t), label);
    }

    pub fn get(&self, s: &Bits, t: &Bits) -> Option<&Seq> {
        self.labels.get(&(s.clone(), t.clone()))
    }

    pub fn label(&self, s: &Bits, t: &Bits) -> Result<&Seq, SystemError> {
        self.get(s, t)
            .ok_or_else(|| SystemError::MissingLabel(format!("{s:?}|{t:?}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Bits, Bits), &Seq)> {
        self.labels.iter()
    }

    /// Pairs of exactly the given level, ordered by (first, second) rank.
    pub fn level(&self, n: usize) -> Vec<(&Bits, &Bits)> {
        let mut v: Vec<(&Bits, &Bits)> = self
            .labels
            .keys()
            .filter(|(s, _)| s.len() == n)
            .map(|(s, t)| (s, t))
            .collect();
        v.sort_by_key(|(s, t)| (s.num(), t.num()));
        v
    }

    /// Monotone in the pair order.
    pub fn check_monotone(&self) -> Result<(), SystemError> {
        for ((s, t), lbl) in &self.labels {
            if s.is_empty() {
                continue;
            }
            let (ps, pt) = (s.parent().unwrap(), t.parent().unwrap());
            if let Some(plbl) = self.get(&ps, &pt) {
                if !plbl.is_strict_prefix_of(lbl) {
                    return Err(SystemError::NotMonotone {
                        parent: format!("{ps:?}|{pt:?}"),
                        child: format!("{s:?}|{t:?}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn realize(&self) -> FinTree {
        let depth_bound = self.labels.values().map(|s| s.len()).max().unwrap_or(0);
        let width_bound = self
            .labels
            .values()
            .filter_map(|s| s.max_value())
            .max()
            .unwrap_or(0);
        FinTree::from_seqs(depth_bound, width_bound, self.labels.values().cloned())
    }

    /// Lines `s|t : v0,...` under the shared versioned header.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "orchard-sys v1 depth={}", self.depth);
        let mut keys: Vec<&(Bits, Bits)> = self.labels.keys().collect();
        keys.sort_by_key(|(s, t)| (s.len(), s.num(), t.num()));
        for (s, t) in keys {
            let _ = writeln!(
                out,
                "{}|{} : {}",
                s.render(),
                t.render(),
                self.labels[&(s.clone(), t.clone())].render()
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<BiLabeledSystem, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("missing header")?;
        let depth = header
            .strip_prefix("orchard-sys v1 depth=")
            .ok_or_else(|| format!("bad header {header:?}"))?
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("bad depth: {e}"))?;
        let mut sys = BiLabeledSystem::new(depth);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (key, v) = line
                .split_once(" : ")
                .ok_or_else(|| format!("bad line {line:?}"))?;
            let (s, t) = key
                .split_once('|')
                .ok_or_else(|| format!("bad key {key:?}"))?;
            sys.insert(Bits::parse(s)?, Bits::parse(t)?, Seq::parse(v)?);
        }
        Ok(sys)
    }
}

/// A 0/1 choice on the even coordinates, used to restrict a label system to
/// the index strings agreeing with it there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvenSelector {
    /// Values at even positions 0, 2, 4, ...; positions beyond the list
    /// default to 0.
    values: Vec<u8>,
}

impl EvenSelector {
    pub fn new(values: Vec<u8>) -> Self {
        debug_assert!(values.iter().all(|&b| b <= 1));
        EvenSelector { values }
    }

    pub fn constant(bit: u8) -> Self {
        EvenSelector { values: vec![bit] }
    }

    /// Value at even position `2k`.
    pub fn at(&self, k: usize) -> u8 {
        self.values
            .get(k)
            .copied()
            .or_else(|| self.values.last().copied())
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub enum Selector {
    /// Fix the first index along a binary path: `t -> label(f|_{|t|}, t)`.
    Vertical(Bits),
    /// Fix the second index: `s -> label(s, g|_{|s|})`.
    Horizontal(Bits),
    /// Keep index strings agreeing with the selector on even positions and
    /// reindex by the free odd positions.
    EvenRestrict(EvenSelector),
}

/// Section a pair-indexed system along one coordinate.
pub fn section_bi(sys: &BiLabeledSystem, sel: &Selector) -> Result<LabeledSystem, SystemError> {
    match sel {
        Selector::Vertical(f) => {
            if f.len() < sys.depth() {
                return Err(SystemError::SelectorTooShort {
                    need: sys.depth(),
                    have: f.len(),
                });
            }
            let mut out = LabeledSystem::new(sys.depth());
            for n in 0..=sys.depth() {
                let fixed = f.restrict(n);
                for t in Bits::all_of_len(n) {
                    if let Some(lbl) = sys.get(&fixed, &t) {
                        out.insert(t, lbl.clone());
                    }
                }
            }
            Ok(out)
        }
        Selector::Horizontal(g) => {
            if g.len() < sys.depth() {
                return Err(SystemError::SelectorTooShort {
                    need: sys.depth(),
                    have: g.len(),
                });
            }
            let mut out = LabeledSystem::new(sys.depth());
            for n in 0..=sys.depth() {
                let fixed = g.restrict(n);
                for s in Bits::all_of_len(n) {
                    if let Some(lbl) = sys.get(&s, &fixed) {
                        out.insert(s, lbl.clone());
                    }
                }
            }
            Ok(out)
        }
        Selector::EvenRestrict(_) => Err(SystemError::MissingLabel(
            "even-restrict applies to singly-indexed systems".into(),
        )),
    }
}

/// Restrict a binary system to strings agreeing with the selector on even
/// positions; the survivors of even length `2k` are reindexed by their k
/// free odd coordinates.
pub fn even_restrict(sys: &LabeledSystem, f: &EvenSelector) -> LabeledSystem {
    let new_depth = sys.depth() / 2;
    let mut out = LabeledSystem::new(new_depth);
    for k in 0..=new_depth {
        for t in Bits::all_of_len(k) {
            // Interleave the forced even values with the free odd ones.
            let mut full = Vec::with_capacity(2 * k);
            for i in 0..k {
                full.push(f.at(i));
                full.push(t.bit(i));
            }
            let s = Bits::new(full);
            if let Some(lbl) = sys.get(&s) {
                out.insert(t, lbl.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{bits, seq};

    fn demo_bi() -> BiLabeledSystem {
        let mut sys = BiLabeledSystem::new(1);
        sys.insert(bits![], bits![], seq![]);
        sys.insert(bits![0], bits![0], seq![0]);
        sys.insert(bits![0], bits![1], seq![1, 2]);
        sys.insert(bits![1], bits![0], seq![2, 3, 4]);
        sys.insert(bits![1], bits![1], seq![3, 4, 5, 6]);
        sys
    }

    #[test]
    fn vertical_section_unfolds_definition() {
        let sys = demo_bi();
        let sec = section_bi(&sys, &Selector::Vertical(bits![0])).unwrap();
        assert_eq!(sec.get(&bits![]), Some(&seq![]));
        assert_eq!(sec.get(&bits![0]), Some(&seq![0]));
        assert_eq!(sec.get(&bits![1]), Some(&seq![1, 2]));
    }

    #[test]
    fn selector_too_short_is_reported() {
        let sys = demo_bi();
        let err = section_bi(&sys, &Selector::Vertical(bits![])).unwrap_err();
        assert!(matches!(err, SystemError::SelectorTooShort { .. }));
    }

    #[test]
    fn even_restrict_depth2_example() {
        // Depth-2 binary system; with f = 0 on evens, survivors are the
        // root and the strings starting with 0, reindexed by position 1.
        let mut sys = LabeledSystem::new(2);
        sys.insert(bits![], seq![]);
        for (t, lbl) in [
            (bits![0], seq![0]),
            (bits![1], seq![1]),
            (bits![0, 0], seq![0, 2]),
            (bits![0, 1], seq![0, 3]),
            (bits![1, 0], seq![1, 2]),
            (bits![1, 1], seq![1, 3]),
        ] {
            sys.insert(t, lbl);
        }
        let r = even_restrict(&sys, &EvenSelector::constant(0));
        assert_eq!(r.depth(), 1);
        assert_eq!(r.get(&bits![]), Some(&seq![]));
        assert_eq!(r.get(&bits![0]), Some(&seq![0, 2]));
        assert_eq!(r.get(&bits![1]), Some(&seq![0, 3]));
        assert_eq!(r.level(1).len(), 2);
    }

    #[test]
    fn render_parse_roundtrip() {
        let sys = demo_bi();
        let text = sys.render();
        let back = BiLabeledSystem::parse(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.render(), text);

        let sec = section_bi(&sys, &Selector::Vertical(bits![1])).unwrap();
        let text = sec.render();
        let back = LabeledSystem::parse(&text).unwrap();
        assert_eq!(back, sec);
    }

    #[test]
    fn realization_is_prefix_closed() {
        let sys = demo_bi();
        let t = sys.realize();
        for m in t.members() {
            if let Some(p) = m.parent() {
                assert!(t.contains_seq(&p));
            }
        }
        assert!(t.contains_seq(&seq![3, 4, 5]));
    }
}
