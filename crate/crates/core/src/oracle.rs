//! Lazily-queryable infinite trees.
//!
//! A `TreeOracle` answers membership and bounded successor queries about a
//! prefix-closed, pruned subtree of the full sequence tree. Infinite
//! branching stays finitely observable: successor queries carry a value
//! bound and report whether more successors may exist beyond it.

use crate::seq::Seq;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("oracle query failed at node <{node}>: {reason}")]
    QueryFailed { node: Seq, reason: String },
    #[error("malformed condition at index {index}: {reason}")]
    MalformedCondition { index: usize, reason: String },
}

/// The successor values of a node up to a caller-supplied bound.
///
/// `exhausted` is true when no further successors exist beyond the bound;
/// false means more may exist (infinitely-branching families report false
/// whenever the stream continues).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorPage {
    pub values: Vec<u64>,
    pub exhausted: bool,
}

impl SuccessorPage {
    pub fn complete(values: Vec<u64>) -> Self {
        SuccessorPage {
            values,
            exhausted: true,
        }
    }

    pub fn partial(values: Vec<u64>) -> Self {
        SuccessorPage {
            values,
            exhausted: false,
        }
    }
}

/// A lazily-defined, prefix-closed, pruned tree.
///
/// Implementations must be pure with respect to observable behavior: the
/// same query always returns the same answer, and internal memoization must
/// be safe under concurrent querying.
pub trait TreeOracle: Send + Sync {
    /// The maximal node below the first branching.
    fn stem(&self) -> Seq;

    fn contains(&self, node: &Seq) -> Result<bool, OracleError>;

    /// All successor values `v <= bound` with `node^<v>` a member, in
    /// increasing order, plus whether more may exist beyond `bound`.
    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError>;
}

impl TreeOracle for Box<dyn TreeOracle> {
    fn stem(&self) -> Seq {
        (**self).stem()
    }
    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        (**self).contains(node)
    }
    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        (**self).successors_within(node, bound)
    }
}

/// The full tree on an ambient space: every sequence (or every strictly
/// increasing sequence) is a member. Used as the degenerate host in tests
/// and as the "full" generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambient {
    /// All finite sequences of naturals.
    Any,
    /// Only strictly increasing sequences.
    Increasing,
}

#[derive(Debug, Clone)]
pub struct FullOracle {
    ambient: Ambient,
    /// Values are restricted to `0..=cap` at every position; `None` = no cap.
    cap: Option<u64>,
}

impl FullOracle {
    pub fn binary() -> Self {
        FullOracle {
            ambient: Ambient::Any,
            cap: Some(1),
        }
    }

    pub fn any() -> Self {
        FullOracle {
            ambient: Ambient::Any,
            cap: None,
        }
    }

    pub fn increasing() -> Self {
        FullOracle {
            ambient: Ambient::Increasing,
            cap: None,
        }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }
}

impl TreeOracle for FullOracle {
    fn stem(&self) -> Seq {
        Seq::empty()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let in_cap = match self.cap {
            Some(c) => node.values().iter().all(|&v| v <= c),
            None => true,
        };
        let shaped = match self.ambient {
            Ambient::Any => true,
            Ambient::Increasing => node.is_increasing(),
        };
        Ok(in_cap && shaped)
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        if !self.contains(node)? {
            return Ok(SuccessorPage::complete(Vec::new()));
        }
        let lo = match self.ambient {
            Ambient::Any => 0,
            Ambient::Increasing => node.last().map_or(0, |v| v + 1),
        };
        let hi_cap = self.cap.unwrap_or(u64::MAX);
        let hi = bound.min(hi_cap);
        let values: Vec<u64> = (lo..=hi).collect();
        let exhausted = hi_cap <= bound;
        Ok(SuccessorPage { values, exhausted })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    #[test]
    fn full_binary_membership() {
        let o = FullOracle::binary();
        assert!(o.contains(&seq![0, 1, 1]).unwrap());
        assert!(!o.contains(&seq![0, 2]).unwrap());
        let page = o.successors_within(&seq![1], 5).unwrap();
        assert_eq!(page.values, vec![0, 1]);
        assert!(page.exhausted);
    }

    #[test]
    fn increasing_successors() {
        let o = FullOracle::increasing();
        assert!(o.contains(&seq![0, 2, 5]).unwrap());
        assert!(!o.contains(&seq![2, 2]).unwrap());
        let page = o.successors_within(&seq![3], 6).unwrap();
        assert_eq!(page.values, vec![4, 5, 6]);
        assert!(!page.exhausted);
    }
}
