//! `TreeOracle` implementations for the seven families.

use super::{LaverCond, MathiasCond, MatetCond, MillerCond, SilverCond, WillowCond};
use super::sacks::{SacksCond, SacksPlan};
use crate::oracle::{OracleError, SuccessorPage, TreeOracle};
use crate::seq::{Bits, Seq};

/// Scan guard for pattern searches in Silver/willow conditions.
const SCAN_LIMIT: u64 = 1 << 22;

fn malformed(index: usize, reason: impl Into<String>) -> OracleError {
    OracleError::MalformedCondition {
        index,
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------- Mathias

pub struct MathiasOracle {
    c: MathiasCond,
}

impl MathiasOracle {
    pub fn new(c: MathiasCond) -> Self {
        MathiasOracle { c }
    }
}

impl TreeOracle for MathiasOracle {
    fn stem(&self) -> Seq {
        self.c.stem.clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let stem = &self.c.stem;
        if !node.is_increasing() {
            return Ok(false);
        }
        if node.len() <= stem.len() {
            return Ok(node.is_prefix_of(stem));
        }
        if !stem.is_prefix_of(node) {
            return Ok(false);
        }
        Ok(node.values()[stem.len()..]
            .iter()
            .all(|&v| self.c.a.contains(v)))
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        if !self.contains(node)? {
            return Ok(SuccessorPage::complete(Vec::new()));
        }
        let stem = &self.c.stem;
        if node.len() < stem.len() {
            let v = stem.get(node.len()).unwrap();
            return Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            });
        }
        let lo = node.last().map_or(0, |v| v + 1);
        Ok(SuccessorPage::partial(self.c.a.values_in(lo, bound)))
    }
}

// ----------------------------------------------------------------- Laver

pub struct LaverOracle {
    c: LaverCond,
}

impl LaverOracle {
    pub fn new(c: LaverCond) -> Self {
        LaverOracle { c }
    }
}

impl TreeOracle for LaverOracle {
    fn stem(&self) -> Seq {
        self.c.stem.clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let stem = &self.c.stem;
        if !node.is_increasing() {
            return Ok(false);
        }
        if node.len() <= stem.len() {
            return Ok(node.is_prefix_of(stem));
        }
        if !stem.is_prefix_of(node) {
            return Ok(false);
        }
        for k in stem.len()..node.len() {
            let prefix = node.restrict(k);
            if !self.c.rule.stream_for(&prefix).contains(node.get(k).unwrap()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        if !self.contains(node)? {
            return Ok(SuccessorPage::complete(Vec::new()));
        }
        let stem = &self.c.stem;
        if node.len() < stem.len() {
            let v = stem.get(node.len()).unwrap();
            return Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            });
        }
        Ok(SuccessorPage::partial(
            self.c.rule.stream_for(node).values_in(0, bound),
        ))
    }
}

// ---------------------------------------------------------------- Miller

pub struct MillerOracle {
    c: MillerCond,
}

impl MillerOracle {
    pub fn new(c: MillerCond) -> Self {
        MillerOracle { c }
    }

    fn is_splitting_level(&self, len: usize) -> bool {
        let d = len - self.c.stem.len();
        d % (self.c.gap + 1) == 0
    }
}

impl TreeOracle for MillerOracle {
    fn stem(&self) -> Seq {
        self.c.stem.clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let stem = &self.c.stem;
        if !node.is_increasing() {
            return Ok(false);
        }
        if node.len() <= stem.len() {
            return Ok(node.is_prefix_of(stem));
        }
        if !stem.is_prefix_of(node) {
            return Ok(false);
        }
        for k in stem.len()..node.len() {
            let prefix = node.restrict(k);
            let stream = self.c.rule.stream_for(&prefix);
            let v = node.get(k).unwrap();
            let ok = if self.is_splitting_level(k) {
                stream.contains(v)
            } else {
                stream.first() == v
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        if !self.contains(node)? {
            return Ok(SuccessorPage::complete(Vec::new()));
        }
        let stem = &self.c.stem;
        if node.len() < stem.len() {
            let v = stem.get(node.len()).unwrap();
            return Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            });
        }
        let stream = self.c.rule.stream_for(node);
        if self.is_splitting_level(node.len()) {
            Ok(SuccessorPage::partial(stream.values_in(0, bound)))
        } else {
            let v = stream.first();
            Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            })
        }
    }
}

// ----------------------------------------------------------------- Matet

pub struct MatetOracle {
    c: MatetCond,
}

/// Parse state of a node in a Matet tree: what the walk has consumed.
enum MatetState {
    InsideStem,
    /// At a group boundary; the last consumed group index, if any.
    Boundary(Option<u64>),
    /// Inside a group: the next value the open group forces.
    Open(u64),
    NotMember,
}

impl MatetOracle {
    pub fn new(c: MatetCond) -> Self {
        MatetOracle { c }
    }

    /// First value of group k.
    fn group_first(&self, k: u64) -> u64 {
        let (lo, _) = self.c.blocks.group_span(k);
        self.c.blocks.start(lo)
    }

    fn state_of(&self, node: &Seq) -> MatetState {
        let stem = &self.c.stem;
        if node.len() <= stem.len() {
            return if node.is_prefix_of(stem) {
                if node.len() == stem.len() {
                    MatetState::Boundary(None)
                } else {
                    MatetState::InsideStem
                }
            } else {
                MatetState::NotMember
            };
        }
        if !stem.is_prefix_of(node) {
            return MatetState::NotMember;
        }
        let mut last_group: Option<u64> = None;
        // (material, next position) of the open group
        let mut open: Option<(Vec<u64>, usize)> = None;
        let mut open_idx: Option<u64> = None;
        for &v in &node.values()[stem.len()..] {
            match open.take() {
                Some((material, pos)) => {
                    if material.get(pos) != Some(&v) {
                        return MatetState::NotMember;
                    }
                    if pos + 1 < material.len() {
                        open = Some((material, pos + 1));
                    } else {
                        last_group = open_idx.take();
                    }
                }
                None => {
                    let Some((b, 0)) = self.c.blocks.block_of(v) else {
                        return MatetState::NotMember;
                    };
                    let k = self.c.blocks.group_of_block(b);
                    let (lo, _) = self.c.blocks.group_span(k);
                    if lo != b || last_group.is_some_and(|m| k <= m) {
                        return MatetState::NotMember;
                    }
                    let material = self.c.blocks.group_values(k);
                    if material.len() > 1 {
                        open = Some((material, 1));
                        open_idx = Some(k);
                    } else {
                        last_group = Some(k);
                    }
                }
            }
        }
        match open {
            Some((material, pos)) => MatetState::Open(material[pos]),
            None => MatetState::Boundary(last_group),
        }
    }
}

impl TreeOracle for MatetOracle {
    fn stem(&self) -> Seq {
        self.c.stem.clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        Ok(!matches!(self.state_of(node), MatetState::NotMember))
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        match self.state_of(node) {
            MatetState::NotMember => Ok(SuccessorPage::complete(Vec::new())),
            MatetState::InsideStem => {
                let v = self.c.stem.get(node.len()).unwrap();
                Ok(SuccessorPage {
                    values: if v <= bound { vec![v] } else { vec![] },
                    exhausted: v <= bound,
                })
            }
            MatetState::Open(expect) => Ok(SuccessorPage {
                values: if expect <= bound { vec![expect] } else { vec![] },
                exhausted: expect <= bound,
            }),
            MatetState::Boundary(last) => {
                let mut values = Vec::new();
                let mut k = last.map_or(0, |m| m + 1);
                loop {
                    let s = self.group_first(k);
                    if s > bound {
                        break;
                    }
                    values.push(s);
                    k += 1;
                }
                Ok(SuccessorPage::partial(values))
            }
        }
    }
}

// ---------------------------------------------------------------- Silver

pub struct SilverOracle {
    c: SilverCond,
}

impl SilverOracle {
    pub fn new(c: SilverCond) -> Self {
        SilverOracle { c }
    }

    /// None = free, Some(b) = decided value b.
    fn f(&self, x: u64) -> Option<u8> {
        if self.c.free.contains(x) {
            None
        } else {
            Some(self.c.ones.decide(x))
        }
    }

    fn next_mandatory(&self, from: u64) -> Result<u64, OracleError> {
        let mut x = from;
        while x < from.saturating_add(SCAN_LIMIT) {
            if self.f(x) == Some(1) {
                return Ok(x);
            }
            x += 1;
        }
        Err(malformed(
            from as usize,
            "no further mandatory 1-position found within the scan limit",
        ))
    }
}

impl TreeOracle for SilverOracle {
    fn stem(&self) -> Seq {
        let mut stem = Seq::empty();
        for x in 0..self.c.free.first() {
            if self.f(x) == Some(1) {
                stem.push(x);
            }
        }
        stem
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        if !node.is_increasing() {
            return Ok(false);
        }
        let Some(max) = node.last() else {
            return Ok(true);
        };
        let mut i = 0;
        for x in 0..=max {
            let in_node = node.get(i) == Some(x);
            if in_node {
                i += 1;
            }
            match self.f(x) {
                Some(1) if !in_node => return Ok(false),
                Some(0) if in_node => return Ok(false),
                _ => {}
            }
        }
        Ok(true)
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        if !self.contains(node)? {
            return Ok(SuccessorPage::complete(Vec::new()));
        }
        let from = node.last().map_or(0, |v| v + 1);
        let mandatory = self.next_mandatory(from)?;
        let mut values: Vec<u64> = (from..mandatory)
            .filter(|&x| self.f(x).is_none())
            .collect();
        values.push(mandatory);
        let exhausted = mandatory <= bound;
        values.retain(|&v| v <= bound);
        Ok(SuccessorPage { values, exhausted })
    }
}

// ---------------------------------------------------------------- Willow

pub struct WillowOracle {
    c: WillowCond,
}

/// What a willow-tree walk is doing after its last value.
enum WillowState {
    /// Outside any open group; the last consumed group, if any.
    Rest(Option<u64>),
    /// Inside a group: the forced next value.
    Open(u64),
    NotMember,
}

impl WillowOracle {
    pub fn new(c: WillowCond) -> Self {
        WillowOracle { c }
    }

    /// The committed material of group k: its base blocks together with the
    /// mandatory points of the regions between them.
    fn group_material(&self, k: u64) -> Vec<u64> {
        let (lo, hi) = self.c.blocks.group_span(k);
        let mut out = Vec::new();
        for b in lo..hi {
            out.extend(self.c.blocks.values(b));
            if b + 1 < hi {
                out.extend(self.c.mandatory_after(b));
            }
        }
        out
    }

    fn group_first(&self, k: u64) -> u64 {
        let (lo, _) = self.c.blocks.group_span(k);
        self.c.blocks.start(lo)
    }

    /// Mandatory points strictly between lo (exclusive) and hi (exclusive).
    fn mandatories_between(&self, lo: Option<u64>, hi: u64) -> Vec<u64> {
        let lo = lo.map_or(0, |v| v + 1);
        let mut out = Vec::new();
        if hi <= lo {
            return out;
        }
        // Only regions whose span [end(n), start(n+1)) meets [lo, hi).
        let mut n = self.c.blocks.region_at_or_after(lo);
        loop {
            let end = self.c.blocks.end(n);
            if end >= hi {
                break;
            }
            if self.c.blocks.start(n + 1) > lo {
                for m in self.c.mandatory_after(n) {
                    if m >= lo && m < hi {
                        out.push(m);
                    }
                }
            }
            n += 1;
        }
        out
    }

    fn first_mandatory_after(&self, from: Option<u64>) -> Result<u64, OracleError> {
        let lo = from.map_or(0, |v| v + 1);
        let mut n = 0u64;
        let mut guard = 0u64;
        loop {
            for m in self.c.mandatory_after(n) {
                if m >= lo {
                    return Ok(m);
                }
            }
            n += 1;
            guard += 1;
            if guard > SCAN_LIMIT {
                return Err(malformed(
                    lo as usize,
                    "no further mandatory point found within the scan limit",
                ));
            }
        }
    }

    fn state_of(&self, node: &Seq) -> WillowState {
        if !node.is_increasing() {
            return WillowState::NotMember;
        }
        let mut prev: Option<u64> = None;
        let mut last_group: Option<u64> = None;
        let mut open: Option<(Vec<u64>, usize, u64)> = None; // material, pos, group
        for &v in node.values() {
            match open.take() {
                Some((material, pos, k)) => {
                    if material.get(pos) != Some(&v) {
                        return WillowState::NotMember;
                    }
                    if pos + 1 < material.len() {
                        open = Some((material, pos + 1, k));
                    } else {
                        last_group = Some(k);
                    }
                }
                None => {
                    // Free walk: either the next mandatory point or the
                    // start of a later group, with no mandatory skipped.
                    if !self.mandatories_between(prev, v).is_empty() {
                        return WillowState::NotMember;
                    }
                    if let Some((b, off)) = self.c.blocks.block_of(v) {
                        let k = self.c.blocks.group_of_block(b);
                        let (lo, _) = self.c.blocks.group_span(k);
                        if off != 0 || lo != b || last_group.is_some_and(|m| k <= m) {
                            return WillowState::NotMember;
                        }
                        let material = self.group_material(k);
                        if material.len() > 1 {
                            open = Some((material, 1, k));
                        } else {
                            last_group = Some(k);
                        }
                    } else {
                        // Must be a mandatory point.
                        let lo = if v == 0 { None } else { Some(v - 1) };
                        if !self.mandatories_between(lo, v + 1).contains(&v) {
                            return WillowState::NotMember;
                        }
                    }
                }
            }
            prev = Some(v);
        }
        match open {
            Some((material, pos, _)) => WillowState::Open(material[pos]),
            None => WillowState::Rest(last_group),
        }
    }
}

impl TreeOracle for WillowOracle {
    fn stem(&self) -> Seq {
        // No mandatory point precedes the first block.
        Seq::empty()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        Ok(!matches!(self.state_of(node), WillowState::NotMember))
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        match self.state_of(node) {
            WillowState::NotMember => Ok(SuccessorPage::complete(Vec::new())),
            WillowState::Open(expect) => Ok(SuccessorPage {
                values: if expect <= bound { vec![expect] } else { vec![] },
                exhausted: expect <= bound,
            }),
            WillowState::Rest(last_group) => {
                let last = node.last();
                let mandatory = self.first_mandatory_after(last)?;
                let lo = last.map_or(0, |v| v + 1);
                let mut values = Vec::new();
                let mut k = last_group.map_or(0, |m| m + 1);
                loop {
                    let s = self.group_first(k);
                    if s >= mandatory {
                        break;
                    }
                    if s >= lo {
                        values.push(s);
                    }
                    k += 1;
                }
                values.push(mandatory);
                values.sort_unstable();
                let exhausted = mandatory <= bound;
                values.retain(|&v| v <= bound);
                Ok(SuccessorPage { values, exhausted })
            }
        }
    }
}

// ----------------------------------------------------------------- Sacks

pub struct PlanOracle {
    plan: SacksPlan,
}

enum Location {
    /// Within the planned labels: prefix of (or equal to) the label at `t`.
    At(Bits),
    /// On the spine beyond the leaf label at `t`, k values past it.
    Spine(Bits, usize),
    Out,
}

impl PlanOracle {
    pub fn new(c: SacksCond) -> Self {
        PlanOracle { plan: c.plan() }
    }

    pub fn from_plan(plan: SacksPlan) -> Self {
        PlanOracle { plan }
    }

    pub fn plan(&self) -> &SacksPlan {
        &self.plan
    }

    fn locate(&self, node: &Seq) -> Location {
        let mut t = Bits::empty();
        loop {
            let label = &self.plan.labels[&t];
            if node.is_prefix_of(label) {
                return Location::At(t);
            }
            if !label.is_strict_prefix_of(node) {
                return Location::Out;
            }
            if t.len() == self.plan.levels {
                // Spine: compare the remaining values one by one.
                for (k, &v) in node.values()[label.len()..].iter().enumerate() {
                    if self.plan.spine_value(&t, label, k) != v {
                        return Location::Out;
                    }
                }
                return Location::Spine(t, node.len() - label.len());
            }
            let v = node.get(label.len()).unwrap();
            let (v0, v1) = self.plan.succ[&t];
            if v == v0 {
                t = t.child(0);
            } else if v == v1 {
                t = t.child(1);
            } else {
                return Location::Out;
            }
        }
    }
}

impl TreeOracle for PlanOracle {
    fn stem(&self) -> Seq {
        self.plan.labels[&Bits::empty()].clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        Ok(!matches!(self.locate(node), Location::Out))
    }

    fn successors_within(&self, node: &Seq, bound: u64) -> Result<SuccessorPage, OracleError> {
        let single = |v: u64| SuccessorPage {
            values: if v <= bound { vec![v] } else { vec![] },
            exhausted: v <= bound,
        };
        match self.locate(node) {
            Location::Out => Ok(SuccessorPage::complete(Vec::new())),
            Location::At(t) => {
                let label = &self.plan.labels[&t];
                if node.len() < label.len() {
                    return Ok(single(label.get(node.len()).unwrap()));
                }
                if t.len() == self.plan.levels {
                    return Ok(single(self.plan.spine_value(&t, label, 0)));
                }
                let (v0, v1) = self.plan.succ[&t];
                let mut values: Vec<u64> = vec![v0, v1];
                let exhausted = v1 <= bound;
                values.retain(|&v| v <= bound);
                Ok(SuccessorPage { values, exhausted })
            }
            Location::Spine(t, k) => {
                let label = &self.plan.labels[&t];
                Ok(single(self.plan.spine_value(&t, label, k)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::blocks::SizeSchedule;
    use crate::conditions::stream::Stream;
    use crate::conditions::{Blocks, BranchRule, GapOnes, OnesRule};
    use crate::fintree::materialize;
    use crate::seq;

    #[test]
    fn mathias_values_come_from_the_set() {
        let o = MathiasOracle::new(MathiasCond {
            stem: Seq::empty(),
            a: Stream::arithmetic(0, 2),
        });
        assert!(o.contains(&seq![0, 2]).unwrap());
        assert!(!o.contains(&seq![1]).unwrap());
    }

    #[test]
    fn silver_support_rule() {
        // 1 at every odd position, evens free.
        let o = SilverOracle::new(SilverCond {
            free: Stream::arithmetic(0, 2),
            ones: OnesRule::All,
        });
        // supports {1,2,3,...}: 1 and 3 mandatory, 2 chosen free
        assert!(o.contains(&seq![1, 2, 3]).unwrap());
        // skips mandatory 1
        assert!(!o.contains(&seq![2, 3]).unwrap());
        // 0 is free, then 1 mandatory
        assert!(o.contains(&seq![0, 1]).unwrap());
        assert_eq!(o.stem(), Seq::empty());
        let page = o.successors_within(&Seq::empty(), 10).unwrap();
        assert_eq!(page.values, vec![0, 1]);
        assert!(page.exhausted);
    }

    #[test]
    fn matet_appends_whole_blocks() {
        // blocks {2n, 2n+1}, no stem
        let o = MatetOracle::new(MatetCond {
            stem: Seq::empty(),
            blocks: Blocks::new(0, SizeSchedule::Constant(2), 0),
        });
        let t = materialize(&o, 2, 9).unwrap();
        let mut level2 = t.branches_at(2);
        level2.sort();
        assert_eq!(
            level2,
            vec![seq![0, 1], seq![2, 3], seq![4, 5], seq![6, 7], seq![8, 9]]
        );
        assert!(!o.contains(&seq![0, 2]).unwrap());
    }

    #[test]
    fn willow_members_follow_the_support_rule() {
        // blocks {0,1}, {3,4}, {6,7}, ... with mandatory points 2, 5, 8, ...
        let w = WillowCond {
            blocks: Blocks::new(0, SizeSchedule::Constant(2), 1),
            ones: GapOnes::FirstOfGap,
        };
        let o = WillowOracle::new(w);
        assert!(o.contains(&seq![0, 1, 2]).unwrap());
        assert!(o.contains(&seq![2, 5]).unwrap()); // no blocks chosen
        assert!(o.contains(&seq![2, 3, 4, 5]).unwrap()); // second block chosen
        assert!(!o.contains(&seq![0, 2]).unwrap()); // block 0 cut midway
        assert!(!o.contains(&seq![3, 4, 8]).unwrap()); // skips mandatory 5
        assert!(!o.contains(&seq![1, 2]).unwrap()); // enters block 0 midway
        let page = o.successors_within(&Seq::empty(), 10).unwrap();
        assert_eq!(page.values, vec![0, 2]);
        // After finishing block 0 the mandatory point is forced.
        let page = o.successors_within(&seq![0, 1], 10).unwrap();
        assert_eq!(page.values, vec![2]);
        // After the mandatory point: next block or next mandatory.
        let page = o.successors_within(&seq![0, 1, 2], 10).unwrap();
        assert_eq!(page.values, vec![3, 5]);
    }

    #[test]
    fn laver_full_is_all_increasing_sequences() {
        let o = LaverOracle::new(LaverCond {
            stem: Seq::empty(),
            rule: BranchRule::Full,
        });
        assert!(o.contains(&seq![0, 5, 7]).unwrap());
        assert!(!o.contains(&seq![3, 3]).unwrap());
        let page = o.successors_within(&seq![2], 5).unwrap();
        assert_eq!(page.values, vec![3, 4, 5]);
        assert!(!page.exhausted);
    }

    #[test]
    fn miller_gap_forces_spines() {
        let o = MillerOracle::new(MillerCond {
            stem: Seq::empty(),
            gap: 1,
            rule: BranchRule::Full,
        });
        // level 0 splits; level 1 nodes have a single successor
        let p0 = o.successors_within(&Seq::empty(), 4).unwrap();
        assert_eq!(p0.values, vec![0, 1, 2, 3, 4]);
        let p1 = o.successors_within(&seq![1], 9).unwrap();
        assert_eq!(p1.values, vec![2]);
        assert!(o.contains(&seq![1, 2, 3]).unwrap());
        assert!(!o.contains(&seq![1, 3]).unwrap());
    }

    #[test]
    fn sacks_plan_oracle_walks_labels_and_spines() {
        let cond = SacksCond {
            seed: 5,
            levels: 2,
            stagger: true,
            typed: None,
        };
        let o = PlanOracle::new(cond);
        let stem = o.stem();
        assert!(o.contains(&stem).unwrap());
        let page = o.successors_within(&stem, u64::MAX).unwrap();
        assert_eq!(page.values.len(), 2);
        assert!(page.exhausted);
        // every member keeps extending (pruned tree)
        let mut node = stem;
        for _ in 0..12 {
            let page = o.successors_within(&node, u64::MAX).unwrap();
            assert!(!page.values.is_empty());
            node = node.child(page.values[0]);
            assert!(o.contains(&node).unwrap());
        }
    }
}
