//! Labeled subtrees of superperfect hosts: the alternating binary system,
//! its value-dominant cousin, and the pair-indexed amalgam whose vertical
//! sections alternate while its horizontal sections dominate.
//!
//! All three builders share one greedy: new labels extend their parent
//! segment by segment to the next splitting level, every value strictly
//! above the largest value previously placed at the same position
//! (position-dominance), and every label strictly longer than all labels
//! built before it. What distinguishes the builders is the processing
//! order and the value floors.

use super::{membership_replay, violation, Builder, HarvestError, SystemViolation};
use crate::conditions::{Condition, MillerCond};
use crate::seq::{Bits, Seq};
use crate::system::{BiLabeledSystem, LabeledSystem};

/// Greedy extension state over a superperfect host.
struct Walk<'a> {
    host: &'a MillerCond,
    /// Largest value placed so far at each position.
    pos_max: Vec<u64>,
    /// Largest value placed anywhere so far.
    run_max: Option<u64>,
    /// Largest label length so far.
    frontier: usize,
}

impl<'a> Walk<'a> {
    fn new(host: &'a MillerCond) -> Self {
        let mut w = Walk {
            host,
            pos_max: Vec::new(),
            run_max: None,
            frontier: host.stem.len(),
        };
        w.absorb(&host.stem, 0);
        w
    }

    fn absorb(&mut self, label: &Seq, from: usize) {
        for (k, &v) in label.values().iter().enumerate().skip(from) {
            if self.pos_max.len() <= k {
                self.pos_max.resize(k + 1, 0);
            }
            self.pos_max[k] = self.pos_max[k].max(v);
            self.run_max = Some(self.run_max.map_or(v, |m| m.max(v)));
        }
        self.frontier = self.frontier.max(label.len());
    }

    fn is_split_level(&self, len: usize) -> bool {
        (len - self.host.stem.len()) % (self.host.gap + 1) == 0
    }

    fn floor_at(&self, pos: usize, global: bool) -> u64 {
        if global {
            self.run_max.map_or(0, |m| m + 1)
        } else if pos < self.pos_max.len() {
            self.pos_max[pos] + 1
        } else {
            0
        }
    }

    /// Extend by one segment: a chosen value at the splitting level, then
    /// the forced spine up to the next splitting level. The chosen value is
    /// bumped until every forced spine value also clears its floor.
    fn segment(&self, cur: &Seq, first_floor: u64, global: bool) -> Result<Seq, HarvestError> {
        let stream = self.host.rule.stream_for(cur);
        let mut cand = first_floor.max(self.floor_at(cur.len(), global));
        for _ in 0..512 {
            let (_, v) = stream.first_index_at_least(cand);
            let mut seq = cur.child(v);
            let mut ok = true;
            while !self.is_split_level(seq.len()) {
                let w = self.host.rule.stream_for(&seq).first();
                if w < self.floor_at(seq.len(), global) {
                    ok = false;
                    break;
                }
                seq.push(w);
            }
            if ok {
                return Ok(seq);
            }
            cand = v + 1;
        }
        Err(HarvestError::Exhausted(
            cur.len(),
            "host spine never clears the dominance floors".into(),
        ))
    }

    /// New label above `parent`: strictly longer than every label so far,
    /// ending at a splitting level, first value at least `first_floor`,
    /// every value above its position floor.
    fn extend(&mut self, parent: &Seq, first_floor: u64, global: bool) -> Result<Seq, HarvestError> {
        let mut cur = self.segment(parent, first_floor, global)?;
        while cur.len() <= self.frontier {
            cur = self.segment(&cur, 0, global)?;
        }
        let from = parent.len();
        self.absorb(&cur, from);
        Ok(cur)
    }
}

fn miller_host<'a>(c: &'a Condition, b: Builder) -> Result<&'a MillerCond, HarvestError> {
    match c {
        Condition::Miller(m) => Ok(m),
        _ => Err(HarvestError::WrongBuilderHost(b, "miller")),
    }
}

/// Build the alternating binary system: position-dominant values, left
/// child before right, parents processed by decreasing label length.
pub fn build_cherry(c: &Condition, depth: usize) -> Result<LabeledSystem, HarvestError> {
    let host = miller_host(c, Builder::Cherry)?;
    let mut walk = Walk::new(host);
    let mut sys = LabeledSystem::new(depth);
    sys.insert(Bits::empty(), host.stem.clone());
    for n in 0..depth {
        let mut parents: Vec<Bits> = Bits::all_of_len(n);
        parents.sort_by_key(|t| std::cmp::Reverse(sys.label(t).unwrap().len()));
        for t in parents {
            let parent = sys.label(&t).unwrap().clone();
            for b in 0..2u8 {
                let label = walk.extend(&parent, 0, false)?;
                sys.insert(t.child(b), label);
            }
        }
    }
    Ok(sys)
}

/// Build the value-dominant binary system: every new value exceeds every
/// value placed anywhere before; parents processed by increasing length.
pub fn build_type22(c: &Condition, depth: usize) -> Result<LabeledSystem, HarvestError> {
    let host = miller_host(c, Builder::Type22)?;
    let mut walk = Walk::new(host);
    let mut sys = LabeledSystem::new(depth);
    sys.insert(Bits::empty(), host.stem.clone());
    for n in 0..depth {
        let mut parents: Vec<Bits> = Bits::all_of_len(n);
        parents.sort_by_key(|t| sys.label(t).unwrap().len());
        for t in parents {
            let parent = sys.label(&t).unwrap().clone();
            for b in 0..2u8 {
                let label = walk.extend(&parent, 0, true)?;
                sys.insert(t.child(b), label);
            }
        }
    }
    Ok(sys)
}

/// Build the pair-indexed system: first coordinates in lexicographic
/// order, each extending its section by a cherry-style step, with global
/// position-dominance tying the sections together.
pub fn build_mango(c: &Condition, depth: usize) -> Result<BiLabeledSystem, HarvestError> {
    let host = miller_host(c, Builder::Mango)?;
    let mut walk = Walk::new(host);
    let mut sys = BiLabeledSystem::new(depth);
    let root = host.stem.clone();
    sys.insert(Bits::empty(), Bits::empty(), root.clone());
    if depth == 0 {
        return Ok(sys);
    }
    // Base step: the four level-1 labels ordered by pair rank; the shared
    // root position gets strictly increasing values across the four.
    for (s, t) in [(0u8, 0u8), (0, 1), (1, 0), (1, 1)] {
        let label = walk.extend(&root, 0, false)?;
        sys.insert(Bits::new(vec![s]), Bits::new(vec![t]), label);
    }
    for n in 1..depth {
        for s in Bits::all_of_len(n) {
            for i in 0..2u8 {
                // One cherry step inside the section s^<i>.
                let mut parents: Vec<Bits> = Bits::all_of_len(n);
                parents.sort_by_key(|t| {
                    std::cmp::Reverse(sys.label(&s, t).unwrap().len())
                });
                for t in parents {
                    let parent = sys.label(&s, &t).unwrap().clone();
                    for j in 0..2u8 {
                        let label = walk.extend(&parent, 0, false)?;
                        sys.insert(s.child(i), t.child(j), label);
                    }
                }
            }
        }
    }
    Ok(sys)
}

/// The host's splitting nodes are infinitely branching; a label passes the
/// split-membership test when the host reports more successors past any
/// bound or at least two within it.
fn is_host_split(c: &Condition, label: &Seq) -> Result<bool, HarvestError> {
    let o = c.expand();
    let page = o.successors_within(label, 64)?;
    Ok(!page.exhausted || page.values.len() >= 2)
}

// ------------------------------------------------------------- checkers

/// Alternating-system checklist: monotone totality, ordered child values,
/// the four branch-dominance inequalities at every testable offset, and
/// the length alternation.
pub fn check_cherry(
    sys: &LabeledSystem,
    host: Option<&Condition>,
) -> Result<Option<SystemViolation>, HarvestError> {
    check_alternating(sys, host, Builder::Cherry)
}

fn check_alternating(
    sys: &LabeledSystem,
    host: Option<&Condition>,
    b: Builder,
) -> Result<Option<SystemViolation>, HarvestError> {
    let depth = sys.depth();
    if !sys.is_total() {
        return Err(HarvestError::Exhausted(depth, "missing labels".into()));
    }
    if sys.check_monotone().is_err() {
        return Ok(Some(violation(b, "(I)", vec![])));
    }
    // (II): ordered values at the parent position.
    for t in Bits::all_up_to(depth.saturating_sub(1)) {
        let parent = sys.label(&t)?;
        let c0 = sys.label(&t.child(0))?;
        let c1 = sys.label(&t.child(1))?;
        let p = parent.len();
        if !(c0.get(p) < c1.get(p)) {
            return Ok(Some(violation(
                b,
                "(II)",
                vec![(t.child(0).render(), c0.clone()), (t.child(1).render(), c1.clone())],
            )));
        }
    }
    if b == Builder::Cherry {
        // (III): the four alternating inequalities over all label paths.
        if let Some(v) = check_cherry_three(sys, b)? {
            return Ok(Some(v));
        }
        // (beta): length alternation by offset parity.
        if let Some(v) = check_beta(sys, b, |t| sys.label(t).map(|l| l.len()))? {
            return Ok(Some(v));
        }
    } else {
        // Value dominance: each split's successor values exceed every
        // incomparable label's value at the split position.
        let labels: Vec<(&Bits, &Seq)> = sys.iter().collect();
        for (t, lbl) in &labels {
            if t.len() >= depth {
                continue;
            }
            let p = lbl.len();
            let lo = sys.label(&t.child(0))?.get(p).unwrap();
            for (u, ul) in &labels {
                if !u.comparable(t) && ul.len() > p && ul.get(p).unwrap() >= lo {
                    return Ok(Some(violation(
                        b,
                        "(dominance)",
                        vec![(t.render(), (*lbl).clone()), (u.render(), (*ul).clone())],
                    )));
                }
            }
        }
    }
    if let Some(host) = host {
        for (t, lbl) in sys.iter() {
            if !is_host_split(host, lbl)? {
                return Ok(Some(violation(b, "(host-split)", vec![(t.render(), lbl.clone())])));
            }
        }
        return membership_replay(b, sys.iter().map(|(t, l)| (t.render(), l.clone())), host);
    }
    Ok(None)
}

/// The four displayed inequalities, with finite label paths standing in
/// for branches: at even offsets from the divergence the left side stays
/// below the right at its own label lengths, at odd offsets above, and
/// symmetrically for the right side.
fn check_cherry_three(
    sys: &LabeledSystem,
    b: Builder,
) -> Result<Option<SystemViolation>, HarvestError> {
    let depth = sys.depth();
    let leaves = Bits::all_of_len(depth);
    for s in Bits::all_up_to(depth.saturating_sub(1)) {
        for f0 in leaves.iter().filter(|f| s.child(0).is_prefix_of(f)) {
            let phi0 = sys.label(f0)?;
            for f1 in leaves.iter().filter(|f| s.child(1).is_prefix_of(f)) {
                let phi1 = sys.label(f1)?;
                let common = phi0.len().min(phi1.len());
                for m in s.len()..=depth {
                    let even = (m - s.len()) % 2 == 0;
                    // position |sigma_{f0 restricted to m}|
                    let p0 = sys.label(&f0.restrict(m))?.len();
                    if p0 < common {
                        let (a, c) = (phi0.get(p0).unwrap(), phi1.get(p0).unwrap());
                        let ok = if even { a < c } else { a > c };
                        if !ok {
                            return Ok(Some(violation(
                                b,
                                "(III)",
                                vec![(f0.render(), phi0.clone()), (f1.render(), phi1.clone())],
                            )));
                        }
                    }
                    // position |sigma_{f1 restricted to m}|
                    let p1 = sys.label(&f1.restrict(m))?.len();
                    if p1 < common {
                        let (a, c) = (phi1.get(p1).unwrap(), phi0.get(p1).unwrap());
                        let ok = if even { a > c } else { a < c };
                        if !ok {
                            return Ok(Some(violation(
                                b,
                                "(III)",
                                vec![(f0.render(), phi0.clone()), (f1.render(), phi1.clone())],
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Length alternation: strings t(0)=0 vs t'(0)=1 of equal length below a
/// common prefix compare by the parity of their length.
fn check_beta(
    sys: &LabeledSystem,
    b: Builder,
    len_of: impl Fn(&Bits) -> Result<usize, crate::system::SystemError>,
) -> Result<Option<SystemViolation>, HarvestError> {
    let depth = sys.depth();
    for s in Bits::all_up_to(depth.saturating_sub(1)) {
        for k in 1..=depth - s.len() {
            for t in Bits::all_of_len(k) {
                if t.bit(0) != 0 {
                    continue;
                }
                for t2 in Bits::all_of_len(k) {
                    if t2.bit(0) != 1 {
                        continue;
                    }
                    let mut st = s.clone();
                    for i in 0..k {
                        st = st.child(t.bit(i));
                    }
                    let mut st2 = s.clone();
                    for i in 0..k {
                        st2 = st2.child(t2.bit(i));
                    }
                    let (l, r) = (len_of(&st)?, len_of(&st2)?);
                    let ok = if k % 2 == 1 { l < r } else { l > r };
                    if !ok {
                        return Ok(Some(violation(
                            b,
                            "(beta)",
                            vec![
                                (st.render(), sys.label(&st)?.clone()),
                                (st2.render(), sys.label(&st2)?.clone()),
                            ],
                        )));
                    }
                }
            }
        }
    }
    Ok(None)
}

pub(crate) fn check_type22(
    sys: &LabeledSystem,
    host: Option<&Condition>,
) -> Result<Option<SystemViolation>, HarvestError> {
    check_alternating(sys, host, Builder::Type22)
}

/// Pair-indexed checklist: coordinatewise monotonicity, every vertical
/// section an alternating system, the two-sided branch dominance, and the
/// lexicographic length ordering per level.
pub fn check_mango(
    sys: &BiLabeledSystem,
    host: Option<&Condition>,
) -> Result<Option<SystemViolation>, HarvestError> {
    let b = Builder::Mango;
    let depth = sys.depth();
    for n in 0..=depth {
        if sys.level(n).len() != (1 << n) * (1 << n) {
            return Err(HarvestError::Exhausted(depth, "missing labels".into()));
        }
    }
    if sys.check_monotone().is_err() {
        return Ok(Some(violation(b, "(I)", vec![])));
    }
    // (II): vertical sections are alternating systems.
    for f in Bits::all_of_len(depth) {
        let sec = crate::system::section_bi(sys, &crate::system::Selector::Vertical(f.clone()))
            .map_err(|e| HarvestError::Exhausted(depth, e.to_string()))?;
        if let Some(mut v) = check_alternating(&sec, None, Builder::Cherry)? {
            v.builder = b;
            v.clause = "(II-section)";
            return Ok(Some(v));
        }
    }
    // (gamma): all labels of a lexicographically earlier first coordinate
    // are shorter than all labels of a later one, level by level.
    for n in 1..=depth {
        for s in Bits::all_of_len(n) {
            for s2 in Bits::all_of_len(n) {
                if s.num() >= s2.num() {
                    continue;
                }
                for t in Bits::all_of_len(n) {
                    for t2 in Bits::all_of_len(n) {
                        let l = sys.label(&s, &t)?.len();
                        let r = sys.label(&s2, &t2)?.len();
                        if l >= r {
                            return Ok(Some(violation(
                                b,
                                "(gamma)",
                                vec![
                                    (format!("{}|{}", s.render(), t.render()), sys.label(&s, &t)?.clone()),
                                    (format!("{}|{}", s2.render(), t2.render()), sys.label(&s2, &t2)?.clone()),
                                ],
                            )));
                        }
                    }
                }
            }
        }
    }
    // (III): two-sided dominance at each side's own label lengths.
    if let Some(v) = check_mango_three(sys)? {
        return Ok(Some(v));
    }
    if let Some(host) = host {
        for ((s, t), lbl) in sys.iter() {
            if !is_host_split(host, lbl)? {
                return Ok(Some(violation(
                    b,
                    "(host-split)",
                    vec![(format!("{}|{}", s.render(), t.render()), lbl.clone())],
                )));
            }
        }
        return membership_replay(
            b,
            sys.iter()
                .map(|((s, t), l)| (format!("{}|{}", s.render(), t.render()), l.clone())),
            host,
        );
    }
    Ok(None)
}

fn check_mango_three(sys: &BiLabeledSystem) -> Result<Option<SystemViolation>, HarvestError> {
    let b = Builder::Mango;
    let depth = sys.depth();
    let leaves = Bits::all_of_len(depth);
    for s in Bits::all_up_to(depth.saturating_sub(1)) {
        let f0s: Vec<&Bits> = leaves.iter().filter(|f| s.child(0).is_prefix_of(f)).collect();
        let f1s: Vec<&Bits> = leaves.iter().filter(|f| s.child(1).is_prefix_of(f)).collect();
        for f0 in &f0s {
            for g0 in &leaves {
                let phi0 = sys.label(f0, g0)?;
                for f1 in &f1s {
                    for g1 in &leaves {
                        let phi1 = sys.label(f1, g1)?;
                        let common = phi0.len().min(phi1.len());
                        // phi_i dominates at its own label lengths past the
                        // divergence level.
                        for m in s.len() + 1..=depth {
                            let p0 = sys.label(&f0.restrict(m), &g0.restrict(m))?.len();
                            if p0 < common && phi0.get(p0) <= phi1.get(p0) {
                                return Ok(Some(violation(
                                    b,
                                    "(III)",
                                    vec![
                                        (format!("{}|{}", f0.render(), g0.render()), phi0.clone()),
                                        (format!("{}|{}", f1.render(), g1.render()), phi1.clone()),
                                    ],
                                )));
                            }
                            let p1 = sys.label(&f1.restrict(m), &g1.restrict(m))?.len();
                            if p1 < common && phi1.get(p1) <= phi0.get(p1) {
                                return Ok(Some(violation(
                                    b,
                                    "(III)",
                                    vec![
                                        (format!("{}|{}", f0.render(), g0.render()), phi0.clone()),
                                        (format!("{}|{}", f1.render(), g1.render()), phi1.clone()),
                                    ],
                                )));
                            }
                        }
                        // At the divergence level the right side dominates.
                        let p = sys.label(&s, &g1.restrict(s.len()))?.len();
                        if p < common && phi1.get(p) <= phi0.get(p) {
                            return Ok(Some(violation(
                                b,
                                "(III-base)",
                                vec![
                                    (format!("{}|{}", f0.render(), g0.render()), phi0.clone()),
                                    (format!("{}|{}", f1.render(), g1.render()), phi1.clone()),
                                ],
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::BranchRule;
    use crate::{bits, seq};

    fn full_miller() -> Condition {
        Condition::Miller(MillerCond {
            stem: Seq::empty(),
            gap: 0,
            rule: BranchRule::Full,
        })
    }

    #[test]
    fn cherry_depth1_matches_the_greedy() {
        let sys = build_cherry(&full_miller(), 1).unwrap();
        assert_eq!(sys.get(&bits![]), Some(&Seq::empty()));
        assert_eq!(sys.get(&bits![0]), Some(&seq![0]));
        assert_eq!(sys.get(&bits![1]), Some(&seq![1, 2]));
    }

    #[test]
    fn cherry_checklist_passes_to_depth4() {
        let host = full_miller();
        let sys = build_cherry(&host, 4).unwrap();
        assert_eq!(check_cherry(&sys, Some(&host)).unwrap(), None);
    }

    #[test]
    fn cherry_ordered_child_values_hold_everywhere() {
        let sys = build_cherry(&full_miller(), 3).unwrap();
        for t in Bits::all_up_to(2) {
            let p = sys.label(&t).unwrap().len();
            let c0 = sys.label(&t.child(0)).unwrap();
            let c1 = sys.label(&t.child(1)).unwrap();
            assert!(c0.get(p).unwrap() < c1.get(p).unwrap());
        }
    }

    #[test]
    fn mango_level0_matches_the_greedy() {
        let sys = build_mango(&full_miller(), 1).unwrap();
        assert_eq!(sys.get(&bits![0], &bits![0]), Some(&seq![0]));
        assert_eq!(sys.get(&bits![0], &bits![1]), Some(&seq![1, 2]));
        assert_eq!(sys.get(&bits![1], &bits![0]), Some(&seq![2, 3, 4]));
        assert_eq!(sys.get(&bits![1], &bits![1]), Some(&seq![3, 4, 5, 6]));
    }

    #[test]
    fn mango_checklist_passes_to_depth3() {
        let host = full_miller();
        let sys = build_mango(&host, 3).unwrap();
        assert_eq!(check_mango(&sys, Some(&host)).unwrap(), None);
    }

    #[test]
    fn mango_vertical_section_is_a_cherry() {
        let sys = build_mango(&full_miller(), 3).unwrap();
        let sec = crate::system::section_bi(
            &sys,
            &crate::system::Selector::Vertical(bits![0, 0, 0]),
        )
        .unwrap();
        assert_eq!(check_cherry(&sec, None).unwrap(), None);
    }

    #[test]
    fn type22_dominance_holds() {
        let host = full_miller();
        let sys = build_type22(&host, 3).unwrap();
        assert_eq!(check_type22(&sys, Some(&host)).unwrap(), None);
    }

    #[test]
    fn corrupted_cherry_fails_and_replays() {
        let host = full_miller();
        let mut sys = build_cherry(&host, 3).unwrap();
        // Swap the two depth-1 child values: breaks (II) at the root.
        let c0 = sys.label(&bits![0]).unwrap().clone();
        let c1 = sys.label(&bits![1]).unwrap().clone();
        sys.insert(bits![0], c1);
        sys.insert(bits![1], c0);
        let v = check_cherry(&sys, Some(&host)).unwrap().unwrap();
        // Deterministic re-check reproduces the violation.
        let again = check_cherry(&sys, Some(&host)).unwrap().unwrap();
        assert_eq!(v, again);
    }
}
