//! Explicit finite trees: bounded materializations of oracles, pruning,
//! intersection, branch and antichain counting, and the two certificate
//! searches used by the intersection claims.
//!
//! Nodes are stored in a trie so deep label systems stay cheap; public
//! surfaces speak `Seq`.

use crate::oracle::{OracleError, SuccessorPage, TreeOracle};
use crate::seq::Seq;
use std::fmt::Write as _;

const ROOT: usize = 0;

#[derive(Debug, Clone)]
struct TrieNode {
    value: u64, // unused for the root
    parent: usize,
    children: Vec<usize>, // kept sorted by value
    depth: usize,
}

/// An explicit prefix-closed finite set of sequences.
#[derive(Debug, Clone)]
pub struct FinTree {
    /// Empty when the tree is empty; otherwise `nodes[0]` is the root.
    nodes: Vec<TrieNode>,
    depth_bound: usize,
    width_bound: u64,
}

impl FinTree {
    pub fn empty(depth_bound: usize, width_bound: u64) -> Self {
        FinTree {
            nodes: Vec::new(),
            depth_bound,
            width_bound,
        }
    }

    pub fn with_root(depth_bound: usize, width_bound: u64) -> Self {
        FinTree {
            nodes: vec![TrieNode {
                value: 0,
                parent: ROOT,
                children: Vec::new(),
                depth: 0,
            }],
            depth_bound,
            width_bound,
        }
    }

    /// Build from an explicit node list; prefixes are inserted implicitly.
    pub fn from_seqs<I: IntoIterator<Item = Seq>>(
        depth_bound: usize,
        width_bound: u64,
        seqs: I,
    ) -> Self {
        let mut t = FinTree::with_root(depth_bound, width_bound);
        for s in seqs {
            t.insert(&s);
        }
        t
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    pub fn width_bound(&self) -> u64 {
        self.width_bound
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Insert a node together with all its prefixes.
    pub fn insert(&mut self, s: &Seq) {
        if self.nodes.is_empty() {
            self.nodes.push(TrieNode {
                value: 0,
                parent: ROOT,
                children: Vec::new(),
                depth: 0,
            });
        }
        let mut at = ROOT;
        for &v in s.values() {
            at = match self.child_with_value(at, v) {
                Some(c) => c,
                None => {
                    let id = self.nodes.len();
                    let depth = self.nodes[at].depth + 1;
                    self.nodes.push(TrieNode {
                        value: v,
                        parent: at,
                        children: Vec::new(),
                        depth,
                    });
                    let pos = self.nodes[at]
                        .children
                        .binary_search_by_key(&v, |&c| self.nodes[c].value)
                        .unwrap_err();
                    self.nodes[at].children.insert(pos, id);
                    id
                }
            };
        }
    }

    fn child_with_value(&self, node: usize, v: u64) -> Option<usize> {
        self.nodes[node]
            .children
            .binary_search_by_key(&v, |&c| self.nodes[c].value)
            .ok()
            .map(|i| self.nodes[node].children[i])
    }

    fn locate(&self, s: &Seq) -> Option<usize> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut at = ROOT;
        for &v in s.values() {
            at = self.child_with_value(at, v)?;
        }
        Some(at)
    }

    pub fn contains_seq(&self, s: &Seq) -> bool {
        self.locate(s).is_some()
    }

    pub fn children_values(&self, s: &Seq) -> Vec<u64> {
        match self.locate(s) {
            None => Vec::new(),
            Some(id) => self.nodes[id]
                .children
                .iter()
                .map(|&c| self.nodes[c].value)
                .collect(),
        }
    }

    /// Depth-first, lexicographic iteration over all members.
    pub fn members(&self) -> Vec<Seq> {
        let mut out = Vec::with_capacity(self.nodes.len());
        if self.nodes.is_empty() {
            return out;
        }
        let mut path: Vec<u64> = Vec::new();
        fn walk(t: &FinTree, id: usize, path: &mut Vec<u64>, out: &mut Vec<Seq>) {
            out.push(Seq::new(path.clone()));
            for &c in &t.nodes[id].children {
                path.push(t.nodes[c].value);
                walk(t, c, path, out);
                path.pop();
            }
        }
        walk(self, ROOT, &mut path, &mut out);
        out
    }

    /// All members of exactly the given length, lexicographically ordered.
    pub fn branches_at(&self, length: usize) -> Vec<Seq> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut path: Vec<u64> = Vec::new();
        fn walk(t: &FinTree, id: usize, length: usize, path: &mut Vec<u64>, out: &mut Vec<Seq>) {
            if path.len() == length {
                out.push(Seq::new(path.clone()));
                return;
            }
            for &c in &t.nodes[id].children {
                path.push(t.nodes[c].value);
                walk(t, c, length, path, out);
                path.pop();
            }
        }
        walk(self, ROOT, length, &mut path, &mut out);
        out
    }

    /// Nodes with at least two immediate successors, lexicographically ordered.
    pub fn split_nodes(&self) -> Vec<Seq> {
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut path: Vec<u64> = Vec::new();
        fn walk(t: &FinTree, id: usize, path: &mut Vec<u64>, out: &mut Vec<Seq>) {
            if t.nodes[id].children.len() >= 2 {
                out.push(Seq::new(path.clone()));
            }
            for &c in &t.nodes[id].children {
                path.push(t.nodes[c].value);
                walk(t, c, path, out);
                path.pop();
            }
        }
        walk(self, ROOT, &mut path, &mut out);
        out
    }

    /// Maximum member length.
    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Maximum value occurring in any member.
    pub fn max_value(&self) -> Option<u64> {
        self.nodes[1..].iter().map(|n| n.value).max()
    }

    /// Length of the deepest member extending each node, indexed by internal
    /// node id. Parents precede children in `nodes`, so one reverse sweep
    /// suffices.
    fn reach_all(&self) -> Vec<usize> {
        let mut reach: Vec<usize> = self.nodes.iter().map(|n| n.depth).collect();
        for id in (0..self.nodes.len()).rev() {
            let r = reach[id];
            let p = self.nodes[id].parent;
            if p != id && reach[p] < r {
                reach[p] = r;
            }
        }
        reach
    }

    /// Length of the deepest member extending `s` (None when `s` is absent).
    pub fn reach_from(&self, s: &Seq) -> Option<usize> {
        let id = self.locate(s)?;
        let reach = self.reach_all();
        Some(reach[id])
    }

    /// The maximal node below the first branching.
    pub fn stem_seq(&self) -> Seq {
        let mut at = ROOT;
        if self.nodes.is_empty() {
            return Seq::empty();
        }
        let mut path = Vec::new();
        while self.nodes[at].children.len() == 1 {
            let c = self.nodes[at].children[0];
            path.push(self.nodes[c].value);
            at = c;
        }
        Seq::new(path)
    }

    /// Delete every node that has no extension of length `depth`; the result
    /// is prefix-closed and every surviving node of length < `depth` has a
    /// successor. The whole tree may die, leaving the empty tree.
    pub fn prune_to(&self, depth: usize) -> FinTree {
        let mut out = FinTree::empty(self.depth_bound, self.width_bound);
        if self.nodes.is_empty() {
            return out;
        }
        let reach = self.reach_all();
        if reach[ROOT] < depth {
            return out;
        }
        let mut path: Vec<u64> = Vec::new();
        fn walk(
            t: &FinTree,
            reach: &[usize],
            id: usize,
            depth: usize,
            path: &mut Vec<u64>,
            out: &mut FinTree,
        ) {
            out.insert(&Seq::new(path.clone()));
            for &c in &t.nodes[id].children {
                if reach[c] >= depth {
                    path.push(t.nodes[c].value);
                    walk(t, reach, c, depth, path, out);
                    path.pop();
                }
            }
        }
        walk(self, &reach, ROOT, depth, &mut path, &mut out);
        out
    }

    /// Restrict to the cone of comparable nodes over `s` (prefixes of `s`
    /// and extensions of `s`).
    pub fn cone(&self, s: &Seq) -> FinTree {
        let mut out = FinTree::empty(self.depth_bound, self.width_bound);
        if self.locate(s).is_none() {
            return out;
        }
        for m in self.members() {
            if m.comparable(s) {
                out.insert(&m);
            }
        }
        out
    }

    /// Line format: header `#depth=<d> #width=<w>`, then one node per line
    /// as a comma-separated value list, sorted lexicographically; the root
    /// is the empty line.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "#depth={} #width={}", self.depth_bound, self.width_bound);
        for m in self.members() {
            let _ = writeln!(s, "{}", m.render());
        }
        s
    }

    pub fn parse(text: &str) -> Result<FinTree, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("missing header")?;
        let rest = header
            .strip_prefix("#depth=")
            .ok_or_else(|| format!("bad header {header:?}"))?;
        let (d, w) = rest
            .split_once(" #width=")
            .ok_or_else(|| format!("bad header {header:?}"))?;
        let depth: usize = d.trim().parse().map_err(|e| format!("bad depth: {e}"))?;
        let width: u64 = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
        let mut t = FinTree::empty(depth, width);
        for line in lines {
            t.insert(&Seq::parse(line)?);
        }
        Ok(t)
    }
}

/// A finite tree is itself an oracle (complete successor pages).
impl TreeOracle for FinTree {
    fn stem(&self) -> Seq {
        self.stem_seq()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        Ok(self.contains_seq(node))
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        let mut values = self.children_values(node);
        values.retain(|&v| v <= bound);
        Ok(SuccessorPage::complete(values))
    }
}

/// Materialize the members of length <= `depth` whose entries are all
/// <= `width`. The result is prefix-closed.
pub fn materialize(
    oracle: &dyn TreeOracle,
    depth: usize,
    width: u64,
) -> Result<FinTree, OracleError> {
    let mut t = FinTree::empty(depth, width);
    if !oracle.contains(&Seq::empty())? {
        return Ok(t);
    }
    t.insert(&Seq::empty());
    let mut frontier = vec![Seq::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for node in frontier {
            let page = oracle.successors_within(&node, width)?;
            for v in page.values {
                let c = node.child(v);
                t.insert(&c);
                next.push(c);
            }
        }
        frontier = next;
    }
    Ok(t)
}

/// Materialize the pointwise intersection of two oracles, then prune so that
/// every surviving node extends to length `depth`.
pub fn pruned_intersection(
    a: &dyn TreeOracle,
    b: &dyn TreeOracle,
    depth: usize,
    width: u64,
) -> Result<FinTree, OracleError> {
    let mut t = FinTree::empty(depth, width);
    if !(a.contains(&Seq::empty())? && b.contains(&Seq::empty())?) {
        return Ok(t.prune_to(depth));
    }
    t.insert(&Seq::empty());
    let mut frontier = vec![Seq::empty()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for node in frontier {
            let pa = a.successors_within(&node, width)?;
            let pb = b.successors_within(&node, width)?;
            // Both pages are complete up to `width`, so intersecting the
            // value lists is exact.
            let mut i = 0;
            let mut j = 0;
            while i < pa.values.len() && j < pb.values.len() {
                match pa.values[i].cmp(&pb.values[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        let c = node.child(pa.values[i]);
                        t.insert(&c);
                        next.push(c);
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(t.prune_to(depth))
}

/// Number of pairwise-incomparable nodes of length `depth - slack` that have
/// at least one extension of length `depth` in the tree. Distinct nodes of
/// equal length are automatically incomparable.
pub fn viable_antichain(tree: &FinTree, depth: usize, slack: usize) -> usize {
    if tree.is_empty() {
        return 0;
    }
    let level = depth.saturating_sub(slack);
    let reach = tree.reach_all();
    let mut count = 0;
    for (id, node) in tree.nodes.iter().enumerate() {
        if node.depth == level && reach[id] >= depth {
            count += 1;
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    /// A split with two immediate-successor cones that each contain two
    /// incomparable nodes extendable to the requested depth.
    DoubleSplit,
    /// Two splits with the deeper one extending the lexicographically
    /// smaller successor of the shallower one.
    NestedSplit,
}

/// A replayable certificate: the base node plus the per-side witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateWitness {
    pub kind: CertificateKind,
    pub base: Seq,
    pub first: Seq,
    pub second: Seq,
}

/// Search for the requested pattern among nodes viable to `depth`.
pub fn certificate_search(
    tree: &FinTree,
    kind: CertificateKind,
    depth: usize,
) -> Option<CertificateWitness> {
    let viable = tree.prune_to(depth);
    if viable.is_empty() {
        return None;
    }
    let splits = viable.split_nodes();
    match kind {
        CertificateKind::DoubleSplit => {
            for s in &splits {
                // A cone holds two incomparable viable nodes iff it still
                // branches after pruning.
                let mut splitting_children = Vec::new();
                for v in viable.children_values(s) {
                    let cone_root = s.child(v);
                    if let Some(w) = first_split_above(&viable, &cone_root) {
                        splitting_children.push(w);
                    }
                }
                if splitting_children.len() >= 2 {
                    return Some(CertificateWitness {
                        kind,
                        base: s.clone(),
                        first: splitting_children[0].clone(),
                        second: splitting_children[1].clone(),
                    });
                }
            }
            None
        }
        CertificateKind::NestedSplit => {
            for s in &splits {
                let vals = viable.children_values(s);
                let low = s.child(vals[0]);
                for t in &splits {
                    if t != s && low.is_prefix_of(t) {
                        return Some(CertificateWitness {
                            kind,
                            base: s.clone(),
                            first: low.clone(),
                            second: t.clone(),
                        });
                    }
                }
            }
            None
        }
    }
}

fn first_split_above(tree: &FinTree, node: &Seq) -> Option<Seq> {
    if !tree.contains_seq(node) {
        return None;
    }
    let mut at = node.clone();
    loop {
        let cv = tree.children_values(&at);
        match cv.len() {
            0 => return None,
            1 => at = at.child(cv[0]),
            _ => return Some(at),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FullOracle;
    use crate::seq;
    use proptest::prelude::*;

    /// Independent enumeration oracle: all sequences of length <= depth with
    /// entries <= width in the given ambient shape.
    fn brute_all(depth: usize, width: u64, increasing: bool) -> Vec<Seq> {
        let mut out = vec![Seq::empty()];
        let mut level = vec![Seq::empty()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for s in &level {
                let lo = if increasing {
                    s.last().map_or(0, |v| v + 1)
                } else {
                    0
                };
                for v in lo..=width {
                    let c = s.child(v);
                    next.push(c.clone());
                    out.push(c);
                }
            }
            level = next;
        }
        out.sort();
        out
    }

    #[test]
    fn materialize_full_binary_depth2() {
        let t = materialize(&FullOracle::binary(), 2, 1).unwrap();
        let mut members = t.members();
        members.sort();
        let expected: Vec<Seq> = vec![
            seq![],
            seq![0],
            seq![0, 0],
            seq![0, 1],
            seq![1],
            seq![1, 0],
            seq![1, 1],
        ];
        assert_eq!(members, expected);
    }

    #[test]
    fn materialize_depth0_is_root() {
        let t = materialize(&FullOracle::increasing(), 0, 7).unwrap();
        assert_eq!(t.members(), vec![seq![]]);
    }

    #[test]
    fn materialize_increasing_matches_brute_enumeration() {
        // Frozen from the independent enumerator: increasing sequences with
        // entries <= 2 and length <= 2.
        let expected = brute_all(2, 2, true);
        assert_eq!(
            expected,
            vec![
                seq![],
                seq![0],
                seq![0, 1],
                seq![0, 2],
                seq![1],
                seq![1, 2],
                seq![2]
            ]
        );
        let t = materialize(&FullOracle::increasing(), 2, 2).unwrap();
        let mut members = t.members();
        members.sort();
        assert_eq!(members, expected);
    }

    #[test]
    fn branches_at_examples() {
        let t = materialize(&FullOracle::binary(), 2, 1).unwrap();
        assert_eq!(t.branches_at(2).len(), 4);

        let chain = FinTree::from_seqs(2, 1, [seq![0, 1]]);
        assert_eq!(chain.branches_at(2), vec![seq![0, 1]]);

        let inc = materialize(&FullOracle::increasing(), 2, 2).unwrap();
        assert_eq!(
            inc.branches_at(2),
            vec![seq![0, 1], seq![0, 2], seq![1, 2]]
        );
    }

    #[test]
    fn split_nodes_examples() {
        let chain = FinTree::from_seqs(2, 1, [seq![0, 1]]);
        assert!(chain.split_nodes().is_empty());

        let t = materialize(&FullOracle::binary(), 2, 1).unwrap();
        assert_eq!(t.split_nodes(), vec![seq![], seq![0], seq![1]]);
    }

    #[test]
    fn pruned_intersection_idempotent_and_disjoint() {
        let o = FullOracle::binary();
        let t = pruned_intersection(&o, &o, 2, 1).unwrap();
        assert_eq!(t.members().len(), 7);

        // Disjoint cones: only the root survives materialization, and the
        // root has no extension at depth 2, so pruning empties the tree.
        let a = FinTree::from_seqs(2, 4, [seq![0, 0]]);
        let b = FinTree::from_seqs(2, 4, [seq![1, 1]]);
        let t = pruned_intersection(&a, &b, 2, 4).unwrap();
        assert!(t.is_empty());
    }

    #[test]
    fn viable_antichain_examples() {
        let chain = FinTree::from_seqs(5, 9, [seq![0, 1, 2, 3, 4]]);
        assert_eq!(viable_antichain(&chain, 5, 2), 1);

        let full = materialize(&FullOracle::binary(), 4, 1).unwrap();
        assert_eq!(viable_antichain(&full, 4, 2), 4);

        let empty = FinTree::empty(4, 1);
        assert_eq!(viable_antichain(&empty, 4, 2), 0);
    }

    #[test]
    fn certificate_examples() {
        let full = materialize(&FullOracle::binary(), 4, 1).unwrap();
        let w = certificate_search(&full, CertificateKind::DoubleSplit, 4).unwrap();
        assert_eq!(w.base, seq![]);

        let chain = FinTree::from_seqs(4, 9, [seq![0, 1, 2, 3]]);
        assert!(certificate_search(&chain, CertificateKind::DoubleSplit, 4).is_none());
        assert!(certificate_search(&chain, CertificateKind::NestedSplit, 4).is_none());

        // A nested split: root splits, and the lexicographically smaller
        // successor cone splits again.
        let t = FinTree::from_seqs(3, 9, [seq![0, 0, 0], seq![0, 1, 0], seq![1, 0, 0]]);
        let w = certificate_search(&t, CertificateKind::NestedSplit, 3).unwrap();
        assert_eq!(w.base, seq![]);
        assert_eq!(w.second, seq![0]);
    }

    #[test]
    fn render_parse_roundtrip() {
        let t = materialize(&FullOracle::increasing(), 2, 2).unwrap();
        let s = t.render();
        let back = FinTree::parse(&s).unwrap();
        assert_eq!(back.render(), s);
        assert_eq!(back.members(), t.members());
    }

    /// Brute-force reference for the double-split certificate: some split
    /// has two successor cones that each contain two incomparable nodes
    /// with extensions reaching `depth`.
    fn brute_double_split(tree: &FinTree, depth: usize) -> bool {
        let viable: Vec<Seq> = tree
            .members()
            .into_iter()
            .filter(|m| tree.reach_from(m).is_some_and(|r| r >= depth))
            .collect();
        for s in tree.split_nodes() {
            let child_vals = tree.children_values(&s);
            let mut good_cones = 0;
            for v in &child_vals {
                let root = s.child(*v);
                let in_cone: Vec<&Seq> =
                    viable.iter().filter(|m| root.is_prefix_of(m)).collect();
                let mut found = false;
                for i in 0..in_cone.len() {
                    for j in i + 1..in_cone.len() {
                        if !in_cone[i].comparable(in_cone[j]) {
                            found = true;
                        }
                    }
                }
                if found {
                    good_cones += 1;
                }
            }
            if good_cones >= 2 {
                return true;
            }
        }
        false
    }

    fn arb_tree() -> impl Strategy<Value = FinTree> {
        // Random small trees over values 0..3, depth <= 5.
        proptest::collection::vec(proptest::collection::vec(0u64..3, 0..5), 1..25).prop_map(
            |seqs| {
                FinTree::from_seqs(5, 2, seqs.into_iter().map(Seq::new))
            },
        )
    }

    proptest! {
        #[test]
        fn materialize_monotone(d1 in 0usize..3, d2 in 0usize..3, w1 in 0u64..3, w2 in 0u64..3) {
            let (dlo, dhi) = (d1.min(d2), d1.max(d2));
            let (wlo, whi) = (w1.min(w2), w1.max(w2));
            let o = FullOracle::increasing();
            let small = materialize(&o, dlo, wlo).unwrap();
            let big = materialize(&o, dhi, whi).unwrap();
            for m in small.members() {
                prop_assert!(big.contains_seq(&m));
            }
        }

        #[test]
        fn intersection_is_contained_and_pruned(t in arb_tree(), u in arb_tree()) {
            let depth = 3;
            let p = pruned_intersection(&t, &u, depth, 2).unwrap();
            for m in p.members() {
                prop_assert!(t.contains_seq(&m) && u.contains_seq(&m));
                if m.len() < depth {
                    prop_assert!(!p.children_values(&m).is_empty());
                }
            }
        }

        #[test]
        fn antichain_antitone_in_slack(t in arb_tree()) {
            let depth = 4;
            let mut prev = usize::MAX;
            for slack in 0..depth {
                let n = viable_antichain(&t, depth, slack);
                prop_assert!(n <= prev || prev == usize::MAX);
                // counts can only shrink or stay as slack grows
                if prev != usize::MAX {
                    prop_assert!(n <= prev);
                }
                prev = n;
            }
        }

        #[test]
        fn double_split_matches_brute(t in arb_tree()) {
            prop_assume!(t.node_count() <= 200);
            for depth in 1..=4usize {
                let fast = certificate_search(&t, CertificateKind::DoubleSplit, depth).is_some();
                let brute = brute_double_split(&t, depth);
                prop_assert_eq!(fast, brute);
            }
        }

        #[test]
        fn prefix_closure_of_materialize(w in 0u64..4) {
            let t = materialize(&FullOracle::increasing(), 3, w).unwrap();
            for m in t.members() {
                if let Some(p) = m.parent() {
                    prop_assert!(t.contains_seq(&p));
                }
            }
        }
    }
}
