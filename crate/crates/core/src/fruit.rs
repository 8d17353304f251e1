//! Density predicates on trees ("fruits") and the refinement procedures
//! that realize the standard pruning and fusion steps at bounded depth.
//!
//! Each fruit is a rigidity clause that is dense for one condition family:
//! a condition can always be strengthened until the clause holds. The
//! checkers here validate the clause exhaustively within bounds and return
//! a minimal replayable witness on failure; the refiners produce a stronger
//! condition (or a thinned oracle) that passes the check.

use crate::conditions::oracles::PlanOracle;
use crate::conditions::sacks::SacksPlan;
use crate::conditions::{mix_seq, Condition, LaverCond, MergeRule, MillerCond, SilverCond, Stream};
use crate::fintree::{materialize, FinTree};
use crate::oracle::{OracleError, SuccessorPage, TreeOracle};
use crate::seq::{Bits, Seq};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fruit {
    Apple,
    Peach,
    Plum,
    Maple,
    Fig,
    Oak,
    Almond,
    Stagger,
}

impl Fruit {
    pub const ALL: [Fruit; 8] = [
        Fruit::Apple,
        Fruit::Peach,
        Fruit::Plum,
        Fruit::Maple,
        Fruit::Fig,
        Fruit::Oak,
        Fruit::Almond,
        Fruit::Stagger,
    ];

    pub fn render(&self) -> &'static str {
        match self {
            Fruit::Apple => "apple",
            Fruit::Peach => "peach",
            Fruit::Plum => "plum",
            Fruit::Maple => "maple",
            Fruit::Fig => "fig",
            Fruit::Oak => "oak",
            Fruit::Almond => "almond",
            Fruit::Stagger => "stagger",
        }
    }

    pub fn parse(s: &str) -> Result<Fruit, String> {
        Fruit::ALL
            .iter()
            .find(|f| f.render() == s)
            .copied()
            .ok_or_else(|| format!("unknown fruit {s:?}"))
    }

    /// True when the clause constrains condition data rather than a tree.
    pub fn is_condition_level(&self) -> bool {
        matches!(self, Fruit::Oak | Fruit::Almond)
    }
}

impl fmt::Display for Fruit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render().to_uppercase())
    }
}

/// A failed clause instance. Replaying the witness against the same input
/// reproduces the failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub fruit: Fruit,
    pub clause: &'static str,
    pub witness: Vec<Seq>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.fruit, self.clause)?;
        for w in &self.witness {
            write!(f, " [{}]", w.render())?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FruitError {
    #[error("fruit {0} expects a {1} input")]
    WrongInput(Fruit, &'static str),
    #[error("refinement pair ({0:?}, {1}) is not one of the dense pairs")]
    NotDense(crate::conditions::Family, Fruit),
    #[error("refinement budget exhausted: {0}")]
    Budget(String),
    #[error("unsupported host for this refinement: {0}")]
    UnsupportedHost(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub enum FruitInput<'a> {
    Tree(&'a FinTree),
    /// Oracle with materialization bounds (depth, width).
    Oracle(&'a dyn TreeOracle, usize, u64),
    /// Condition with an index bound: how many frees/blocks to inspect.
    Cond(&'a Condition, usize),
}

/// Check the clause exhaustively within bounds. `Ok(None)` is a pass;
/// `Ok(Some(v))` is the lexicographically first violation found.
pub fn check_fruit(input: FruitInput, fruit: Fruit) -> Result<Option<Violation>, FruitError> {
    match (fruit, input) {
        (Fruit::Oak, FruitInput::Cond(Condition::Silver(c), n)) => Ok(check_oak(c, n)),
        (Fruit::Oak, FruitInput::Cond(..)) => {
            Err(FruitError::WrongInput(fruit, "silver condition"))
        }
        (Fruit::Almond, FruitInput::Cond(Condition::Matet(c), n)) => {
            Ok(check_almond(&c.blocks, n))
        }
        (Fruit::Almond, FruitInput::Cond(..)) => {
            Err(FruitError::WrongInput(fruit, "matet condition"))
        }
        (f, FruitInput::Cond(..)) => Err(FruitError::WrongInput(f, "tree")),
        (f, FruitInput::Oracle(o, depth, width)) if !f.is_condition_level() => {
            let t = materialize(o, depth, width)?;
            check_fruit(FruitInput::Tree(&t), f)
        }
        (f, FruitInput::Tree(t)) if !f.is_condition_level() => Ok(check_tree(t, f)),
        (f, _) => Err(FruitError::WrongInput(f, "condition")),
    }
}

fn check_tree(t: &FinTree, fruit: Fruit) -> Option<Violation> {
    match fruit {
        Fruit::Apple => check_apple(t),
        Fruit::Peach => check_peach(t),
        Fruit::Plum => check_plum(t),
        Fruit::Maple => check_maple(t),
        Fruit::Fig => check_fig(t),
        Fruit::Stagger => check_stagger(t),
        Fruit::Oak | Fruit::Almond => unreachable!(),
    }
}

/// First split at or strictly above `node`, within the tree.
fn first_split_at_or_above(t: &FinTree, node: &Seq) -> Option<Seq> {
    let mut at = node.clone();
    loop {
        let cv = t.children_values(&at);
        match cv.len() {
            0 => return None,
            1 => at = at.child(cv[0]),
            _ => return Some(at),
        }
    }
}

fn check_apple(t: &FinTree) -> Option<Violation> {
    let splits = t.split_nodes();
    // Nested splits keep distance at least 2.
    for s in &splits {
        for u in &splits {
            if s.is_strict_prefix_of(u) && u.len() < s.len() + 2 {
                return Some(Violation {
                    fruit: Fruit::Apple,
                    clause: "(*2)",
                    witness: vec![s.clone(), u.clone()],
                });
            }
        }
    }
    // The next-split cone over a smaller successor stays under every larger
    // sibling successor.
    for s in &splits {
        let values = t.children_values(s);
        for (i, &m) in values.iter().enumerate() {
            let Some(tau) = first_split_at_or_above(t, &s.child(m)) else {
                continue; // frontier: next split not visible
            };
            for &n in &values[i + 1..] {
                if tau.values().iter().any(|&x| x >= n) {
                    return Some(Violation {
                        fruit: Fruit::Apple,
                        clause: "(*1)",
                        witness: vec![s.clone(), tau, Seq::new(vec![m, n])],
                    });
                }
            }
        }
    }
    None
}

/// Successor-value sets pairwise disjoint over the given carrier nodes.
fn check_disjoint_successors(
    t: &FinTree,
    fruit: Fruit,
    clause: &'static str,
    carriers: impl Iterator<Item = Seq>,
) -> Option<Violation> {
    let mut seen: BTreeMap<u64, Seq> = BTreeMap::new();
    for node in carriers {
        for v in t.children_values(&node) {
            if let Some(prev) = seen.get(&v) {
                if *prev != node {
                    return Some(Violation {
                        fruit,
                        clause,
                        witness: vec![prev.clone(), node, Seq::new(vec![v])],
                    });
                }
            } else {
                seen.insert(v, node.clone());
            }
        }
    }
    None
}

fn check_peach(t: &FinTree) -> Option<Violation> {
    let stem = t.stem_seq();
    let carriers = t
        .members()
        .into_iter()
        .filter(move |m| stem.is_prefix_of(m));
    check_disjoint_successors(t, Fruit::Peach, "(star)", carriers)
}

fn check_plum(t: &FinTree) -> Option<Violation> {
    check_disjoint_successors(t, Fruit::Plum, "(new-values)", t.split_nodes().into_iter())
}

fn check_maple(t: &FinTree) -> Option<Violation> {
    // A value at a position determines the whole prefix.
    let mut seen: BTreeMap<(usize, u64), Seq> = BTreeMap::new();
    for node in t.members() {
        for v in t.children_values(&node) {
            let key = (node.len(), v);
            if let Some(prev) = seen.get(&key) {
                if *prev != node {
                    return Some(Violation {
                        fruit: Fruit::Maple,
                        clause: "(value-prefix)",
                        witness: vec![prev.child(v), node.child(v)],
                    });
                }
            } else {
                seen.insert(key, node.clone());
            }
        }
    }
    None
}

fn check_fig(t: &FinTree) -> Option<Violation> {
    for s in t.split_nodes() {
        let values = t.children_values(&s);
        let mut succ_splits = Vec::new();
        let mut frontier = false;
        for &v in &values {
            match first_split_at_or_above(t, &s.child(v)) {
                Some(sp) => succ_splits.push(sp),
                None => frontier = true,
            }
        }
        if succ_splits.len() > 2 {
            return Some(Violation {
                fruit: Fruit::Fig,
                clause: "(two-splits)",
                witness: vec![s, succ_splits[0].clone(), succ_splits[2].clone()],
            });
        }
        if frontier || succ_splits.len() < 2 {
            continue; // not fully visible at this depth
        }
        let p = s.len();
        let (a, b) = (&succ_splits[0], &succ_splits[1]);
        // tau1 is the successor split with the smaller value at the split
        // position; it must outlast the other by at least 2.
        let (t1, t2) = if a.get(p) < b.get(p) { (a, b) } else { (b, a) };
        if t1.len() < t2.len() + 2 {
            return Some(Violation {
                fruit: Fruit::Fig,
                clause: "(lengths)",
                witness: vec![s, t1.clone(), t2.clone()],
            });
        }
    }
    None
}

fn check_stagger(t: &FinTree) -> Option<Violation> {
    let mut by_len: BTreeMap<usize, Seq> = BTreeMap::new();
    for s in t.split_nodes() {
        if let Some(prev) = by_len.get(&s.len()) {
            return Some(Violation {
                fruit: Fruit::Stagger,
                clause: "(one-split-per-level)",
                witness: vec![prev.clone(), s],
            });
        }
        by_len.insert(s.len(), s);
    }
    None
}

fn check_oak(c: &SilverCond, n: usize) -> Option<Violation> {
    for i in 0..n {
        let x = c.free.get(i);
        let y = c.free.get(i + 1);
        let has_one = (x + 1..y).any(|z| !c.free.contains(z) && c.ones.decide(z) == 1);
        if !has_one {
            return Some(Violation {
                fruit: Fruit::Oak,
                clause: "(one-between-frees)",
                witness: vec![Seq::new(vec![x]), Seq::new(vec![y])],
            });
        }
    }
    None
}

fn check_almond(blocks: &crate::conditions::Blocks, n: usize) -> Option<Violation> {
    for k in 0..n as u64 {
        if blocks.group_size(k) < 2 {
            return Some(Violation {
                fruit: Fruit::Almond,
                clause: "(block-size)",
                witness: vec![Seq::new(vec![k])],
            });
        }
        let hi = *blocks.group_values(k).last().unwrap();
        let lo_next = blocks.group_values(k + 1)[0];
        if hi >= lo_next {
            return Some(Violation {
                fruit: Fruit::Almond,
                clause: "(block-order)",
                witness: vec![Seq::new(vec![k]), Seq::new(vec![k + 1])],
            });
        }
    }
    None
}

/// Re-evaluate exactly the clause instance named by a violation.
pub fn replay_violation(v: &Violation, input: FruitInput) -> Result<bool, FruitError> {
    let against_tree = |t: &FinTree| -> bool {
        match (v.fruit, v.clause) {
            (Fruit::Apple, "(*2)") => {
                let (s, u) = (&v.witness[0], &v.witness[1]);
                t.children_values(s).len() >= 2
                    && t.children_values(u).len() >= 2
                    && s.is_strict_prefix_of(u)
                    && u.len() < s.len() + 2
            }
            (Fruit::Apple, "(*1)") => {
                let (s, tau, mn) = (&v.witness[0], &v.witness[1], &v.witness[2]);
                let (m, n) = (mn.get(0).unwrap(), mn.get(1).unwrap());
                let values = t.children_values(s);
                values.contains(&m)
                    && values.contains(&n)
                    && m < n
                    && s.child(m).is_prefix_of(tau)
                    && t.children_values(tau).len() >= 2
                    && tau.values().iter().any(|&x| x >= n)
            }
            (Fruit::Peach, _) | (Fruit::Plum, _) => {
                let (a, b, vv) = (&v.witness[0], &v.witness[1], &v.witness[2]);
                let x = vv.get(0).unwrap();
                a != b && t.children_values(a).contains(&x) && t.children_values(b).contains(&x)
            }
            (Fruit::Maple, _) => {
                let (a, b) = (&v.witness[0], &v.witness[1]);
                a != b
                    && a.len() == b.len()
                    && a.last() == b.last()
                    && t.contains_seq(a)
                    && t.contains_seq(b)
            }
            (Fruit::Fig, "(two-splits)") => {
                let s = &v.witness[0];
                let mut count = 0;
                for c in t.children_values(s) {
                    if first_split_at_or_above(t, &s.child(c)).is_some() {
                        count += 1;
                    }
                }
                count > 2
            }
            (Fruit::Fig, "(lengths)") => {
                let (t1, t2) = (&v.witness[1], &v.witness[2]);
                t.contains_seq(t1) && t.contains_seq(t2) && t1.len() < t2.len() + 2
            }
            (Fruit::Stagger, _) => {
                let (a, b) = (&v.witness[0], &v.witness[1]);
                a != b
                    && a.len() == b.len()
                    && t.children_values(a).len() >= 2
                    && t.children_values(b).len() >= 2
            }
            _ => false,
        }
    };
    match input {
        FruitInput::Tree(t) => Ok(against_tree(t)),
        FruitInput::Oracle(o, depth, width) => {
            let t = materialize(o, depth, width)?;
            Ok(against_tree(&t))
        }
        FruitInput::Cond(c, _) => match (v.fruit, c) {
            (Fruit::Oak, Condition::Silver(sc)) => {
                let (x, y) = (v.witness[0].get(0).unwrap(), v.witness[1].get(0).unwrap());
                let has_one = (x + 1..y).any(|z| !sc.free.contains(z) && sc.ones.decide(z) == 1);
                Ok(sc.free.contains(x) && sc.free.contains(y) && !has_one)
            }
            (Fruit::Almond, Condition::Matet(mc)) => {
                let k = v.witness[0].get(0).unwrap();
                Ok(mc.blocks.group_size(k) < 2)
            }
            _ => Ok(false),
        },
    }
}

/// A refined condition: either still expressible as condition data or a
/// thinned oracle below the input.
pub enum Refined {
    Cond(Condition),
    Oracle(Arc<dyn TreeOracle>),
}

impl Refined {
    pub fn as_oracle(&self) -> Arc<dyn TreeOracle> {
        match self {
            Refined::Cond(c) => Arc::from(c.expand()),
            Refined::Oracle(o) => o.clone(),
        }
    }
}

/// Strengthen a condition until the fruit's clause holds to the requested
/// depth. Only the dense (family, fruit) pairs are accepted.
pub fn refine_to_fruit(c: &Condition, fruit: Fruit, depth: usize) -> Result<Refined, FruitError> {
    match (c, fruit) {
        (Condition::Miller(m), Fruit::Apple) => {
            Ok(Refined::Oracle(Arc::new(AppleOracle::new(m.clone(), 3))))
        }
        (Condition::Laver(l), Fruit::Peach) => {
            Ok(Refined::Oracle(Arc::new(CodedOracle::peach(l.clone(), 3))))
        }
        (Condition::Miller(m), Fruit::Plum) => {
            Ok(Refined::Oracle(Arc::new(CodedOracle::plum(m.clone(), 3)?)))
        }
        (Condition::Matet(t), Fruit::Maple) => {
            let mut out = t.clone();
            out.blocks = out.blocks.merged(MergeRule::Summable);
            Ok(Refined::Cond(Condition::Matet(out)))
        }
        (Condition::Matet(t), Fruit::Almond) => {
            if check_almond(&t.blocks, depth.max(8)).is_none() {
                return Ok(Refined::Cond(Condition::Matet(t.clone())));
            }
            let mut out = t.clone();
            out.blocks = out.blocks.merged(MergeRule::MinSize(2));
            Ok(Refined::Cond(Condition::Matet(out)))
        }
        (Condition::Willow(w), Fruit::Fig) => {
            let mut out = w.clone();
            out.blocks = out.blocks.merged(MergeRule::MinSize(2));
            Ok(Refined::Cond(Condition::Willow(out)))
        }
        (Condition::Silver(s), Fruit::Oak) => {
            let budget = 2 * depth.max(4) + 8;
            if check_oak(s, budget).is_none() {
                return Ok(Refined::Cond(Condition::Silver(s.clone())));
            }
            // Keep a free position only when a decided 1 separates it from
            // the previously kept one; dropped frees become decided by the
            // ones rule and may themselves be the separating 1.
            let mut kept = vec![s.free.get(0)];
            let mut i = 1usize;
            while kept.len() < budget {
                if i > 64 * budget {
                    return Err(FruitError::Budget(
                        "no oak-compatible free positions found".into(),
                    ));
                }
                let y = s.free.get(i);
                i += 1;
                let last = *kept.last().unwrap();
                let has_one = (last + 1..y).any(|z| {
                    (!s.free.contains(z) || !kept.contains(&z)) && s.ones.decide(z) == 1
                });
                if has_one {
                    kept.push(y);
                }
            }
            let mut out = s.clone();
            out.free = Stream::prefix_then(kept, s.free.clone());
            Ok(Refined::Cond(Condition::Silver(out)))
        }
        (Condition::Sacks(sc), Fruit::Stagger) => {
            if sc.stagger {
                return Ok(Refined::Cond(Condition::Sacks(sc.clone())));
            }
            let plan = sc.plan();
            let staggered = stagger_plan(&plan, depth)?;
            Ok(Refined::Oracle(Arc::new(PlanOracle::from_plan(staggered))))
        }
        (c, f) => Err(FruitError::NotDense(c.family(), f)),
    }
}

/// Select a length-staggered nested system of splits from an arbitrary
/// plan; a split whose length collides with one already chosen is replaced
/// by the shallowest split in its cone with a fresh length.
fn stagger_plan(plan: &SacksPlan, levels: usize) -> Result<SacksPlan, FruitError> {
    let mut out = SacksPlan {
        labels: BTreeMap::new(),
        succ: BTreeMap::new(),
        levels,
        seed: plan.seed,
        spine_ids: BTreeMap::new(),
    };
    let mut used = std::collections::BTreeSet::new();
    // new index -> original index
    let mut origin: BTreeMap<Bits, Bits> = BTreeMap::new();
    origin.insert(Bits::empty(), Bits::empty());
    for t in Bits::all_up_to(levels) {
        let need_children = t.len() < levels;
        // Breadth-first over the cone for a fresh-length split.
        let mut queue = std::collections::VecDeque::from([origin[&t].clone()]);
        let mut found: Option<Bits> = None;
        while let Some(o) = queue.pop_front() {
            if need_children && o.len() >= plan.levels {
                continue;
            }
            if !used.contains(&plan.labels[&o].len()) {
                found = Some(o);
                break;
            }
            if o.len() < plan.levels {
                queue.push_back(o.child(0));
                queue.push_back(o.child(1));
            }
        }
        let Some(o) = found else {
            return Err(FruitError::Budget(format!(
                "plan too shallow to stagger to {levels} levels"
            )));
        };
        if need_children {
            let label = plan.labels[&o].clone();
            used.insert(label.len());
            out.succ.insert(t.clone(), plan.succ[&o]);
            origin.insert(t.child(0), o.child(0));
            origin.insert(t.child(1), o.child(1));
            out.labels.insert(t, label);
        } else {
            // Extend the leaf down to a leaf of the base plan so that the
            // continuation ray beyond it is a genuine base branch.
            let mut o_leaf = o;
            while o_leaf.len() < plan.levels {
                o_leaf = o_leaf.child(0);
            }
            let label = plan.labels[&o_leaf].clone();
            used.insert(label.len());
            out.spine_ids.insert(
                t.clone(),
                plan.spine_ids
                    .get(&o_leaf)
                    .copied()
                    .unwrap_or(o_leaf.num() as u64),
            );
            out.labels.insert(t, label);
        }
    }
    Ok(out)
}

// --------------------------------------------------- refinement oracles

/// Interval coding for disjoint successor assignment: all children of a
/// node whose last value is p take values in `(p*M, p*M + M]`; the top of
/// the interval is reserved for forced spine steps. Within one such tree,
/// equal last values force equal nodes, so distinct nodes never share
/// successor values.
const CODE_M: u64 = 64;

fn interval_of(node: &Seq) -> (u64, u64) {
    let p = node.last().unwrap_or(0);
    (p * CODE_M + 1, p * CODE_M + CODE_M)
}

enum CodedHost {
    Laver(LaverCond),
    Miller(MillerCond),
}

/// Laver/Miller subtree whose successor-value sets are pairwise disjoint.
pub struct CodedOracle {
    host: CodedHost,
    branch: usize,
}

impl CodedOracle {
    pub fn peach(host: LaverCond, branch: usize) -> Self {
        CodedOracle {
            host: CodedHost::Laver(host),
            branch,
        }
    }

    pub fn plum(host: MillerCond, branch: usize) -> Result<Self, FruitError> {
        if host.gap > 0 && host.rule != crate::conditions::BranchRule::Full {
            return Err(FruitError::UnsupportedHost(
                "plum thinning needs choosable spine values (gap 0 or a full rule)".into(),
            ));
        }
        Ok(CodedOracle {
            host: CodedHost::Miller(host),
            branch,
        })
    }

    fn stem_seq(&self) -> &Seq {
        match &self.host {
            CodedHost::Laver(l) => &l.stem,
            CodedHost::Miller(m) => &m.stem,
        }
    }

    fn splits_here(&self, node: &Seq) -> bool {
        match &self.host {
            CodedHost::Laver(_) => true,
            CodedHost::Miller(m) => (node.len() - m.stem.len()) % (m.gap + 1) == 0,
        }
    }

    /// Chosen successor values at a splitting node.
    fn split_values(&self, node: &Seq) -> Vec<u64> {
        let (lo, hi) = interval_of(node);
        let stream = match &self.host {
            CodedHost::Laver(l) => l.rule.stream_for(node),
            CodedHost::Miller(m) => m.rule.stream_for(node),
        };
        // The interval top is reserved for spines.
        stream
            .values_in(lo, hi - 1)
            .into_iter()
            .take(self.branch)
            .collect()
    }

    /// Forced spine value at a non-splitting node.
    fn spine_value(&self, node: &Seq) -> u64 {
        let (_, hi) = interval_of(node);
        hi
    }
}

impl TreeOracle for CodedOracle {
    fn stem(&self) -> Seq {
        self.stem_seq().clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let stem = self.stem_seq();
        if node.len() <= stem.len() {
            return Ok(node.is_prefix_of(stem));
        }
        if !stem.is_prefix_of(node) {
            return Ok(false);
        }
        for k in stem.len()..node.len() {
            let prefix = node.restrict(k);
            let v = node.get(k).unwrap();
            let ok = if self.splits_here(&prefix) {
                self.split_values(&prefix).contains(&v)
            } else {
                self.spine_value(&prefix) == v
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
        let stem = self.stem_seq();
        if node.len() < stem.len() {
            let v = stem.get(node.len()).unwrap();
            return Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            });
        }
        if self.splits_here(node) {
            let mut values = self.split_values(node);
            values.retain(|&v| v <= bound);
            // Conceptually the thinning continues with more disjoint blocks.
            Ok(SuccessorPage::partial(values))
        } else {
            let v = self.spine_value(node);
            Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            })
        }
    }
}

/// Miller subtree with the two apple clauses: nested splits at distance at
/// least 2, and every next-split cone over a smaller successor dominated by
/// the larger sibling successors.
pub struct AppleOracle {
    host: MillerCond,
    branch: usize,
    /// Distance between consecutive splits of the refined tree; a multiple
    /// of the host's splitting period and at least 2.
    dist: usize,
}

impl AppleOracle {
    pub fn new(host: MillerCond, branch: usize) -> Self {
        let period = host.gap + 1;
        let dist = if period >= 2 { period } else { 2 };
        AppleOracle { host, branch, dist }
    }

    fn is_split_level(&self, len: usize) -> bool {
        (len - self.host.stem.len()) % self.dist == 0
    }

    /// The forced spine from `node` up to the next split level: repeated
    /// least host successors.
    fn spine_to_next_split(&self, node: &Seq) -> Seq {
        let mut at = node.clone();
        while !self.is_split_level(at.len()) {
            let v = self.host.rule.stream_for(&at).first();
            at = at.child(v);
        }
        at
    }

    /// Successor values at a split node, each chosen above everything in
    /// the previously fixed sibling cones, up to the bound.
    fn split_values_below(&self, node: &Seq, bound: u64) -> Vec<u64> {
        let stream = self.host.rule.stream_for(node);
        let mut values = Vec::new();
        let mut floor = 0u64;
        for _ in 0..self.branch {
            let (_, v) = stream.first_index_at_least(floor);
            if v > bound {
                break;
            }
            values.push(v);
            let cone_top = self.spine_to_next_split(&node.child(v));
            floor = cone_top.max_value().unwrap_or(v) + 1;
        }
        values
    }
}

impl TreeOracle for AppleOracle {
    fn stem(&self) -> Seq {
        self.host.stem.clone()
    }

    fn contains(&self, node: &Seq) -> Result<bool, OracleError> {
        let stem = &self.host.stem;
        if node.len() <= stem.len() {
            return Ok(node.is_prefix_of(stem));
        }
        if !stem.is_prefix_of(node) {
            return Ok(false);
        }
        for k in stem.len()..node.len() {
            let prefix = node.restrict(k);
            let v = node.get(k).unwrap();
            let ok = if self.is_split_level(k) {
                self.split_values_below(&prefix, v).contains(&v)
            } else {
                self.host.rule.stream_for(&prefix).first() == v
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
        let stem = &self.host.stem;
        if node.len() < stem.len() {
            let v = stem.get(node.len()).unwrap();
            return Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            });
        }
        if self.is_split_level(node.len()) {
            Ok(SuccessorPage::partial(self.split_values_below(node, bound)))
        } else {
            let v = self.host.rule.stream_for(node).first();
            Ok(SuccessorPage {
                values: if v <= bound { vec![v] } else { vec![] },
                exhausted: v <= bound,
            })
        }
    }
}

/// Order-independent fingerprint of a tree, for reproducibility tests.
pub fn tree_fingerprint(t: &FinTree) -> u64 {
    let mut h = 0xa5a5u64;
    for m in t.members() {
        h = mix_seq(h, m.values());
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::blocks::SizeSchedule;
    use crate::conditions::{
        gen_condition, Blocks, BranchRule, Family, GenParams, MatetCond, OnesRule, SizeControl,
    };
    use crate::fintree::materialize;
    use crate::seq;

    fn full_miller() -> MillerCond {
        MillerCond {
            stem: Seq::empty(),
            gap: 0,
            rule: BranchRule::Full,
        }
    }

    #[test]
    fn apple_star2_violation_detected() {
        // splits at <0> and <0,1>: lengths differ by 1
        let t = FinTree::from_seqs(3, 9, [seq![0, 1, 2], seq![0, 1, 3], seq![0, 2], seq![1]]);
        let v = check_fruit(FruitInput::Tree(&t), Fruit::Apple)
            .unwrap()
            .unwrap();
        assert_eq!(v.clause, "(*2)");
        assert!(replay_violation(&v, FruitInput::Tree(&t)).unwrap());
    }

    #[test]
    fn full_laver_fails_peach() {
        let o = Condition::Laver(LaverCond {
            stem: Seq::empty(),
            rule: BranchRule::Full,
        });
        let v = check_fruit(FruitInput::Oracle(o.expand().as_ref(), 3, 6), Fruit::Peach)
            .unwrap()
            .unwrap();
        assert_eq!(v.fruit, Fruit::Peach);
    }

    #[test]
    fn oak_pass_and_violation() {
        // odds decided 1, evens free: every pair of frees has a 1 between
        let good = SilverCond {
            free: Stream::arithmetic(0, 2),
            ones: OnesRule::All,
        };
        assert!(check_oak(&good, 10).is_none());
        // consecutive frees with nothing between them
        let bad = SilverCond {
            free: Stream::arithmetic(0, 1),
            ones: OnesRule::All,
        };
        let v = check_oak(&bad, 4).unwrap();
        assert_eq!(v.clause, "(one-between-frees)");
        let cond = Condition::Silver(bad);
        assert!(replay_violation(&v, FruitInput::Cond(&cond, 4)).unwrap());
    }

    #[test]
    fn apple_refinement_passes_check() {
        let apple = refine_to_fruit(&Condition::Miller(full_miller()), Fruit::Apple, 6).unwrap();
        let o = apple.as_oracle();
        let t = materialize(o.as_ref(), 6, 1 << 20).unwrap();
        assert!(t.split_nodes().len() >= 3, "refined tree still branches");
        assert_eq!(check_fruit(FruitInput::Tree(&t), Fruit::Apple).unwrap(), None);
    }

    #[test]
    fn peach_refinement_passes_check() {
        let laver = LaverCond {
            stem: Seq::empty(),
            rule: BranchRule::Full,
        };
        let peach = refine_to_fruit(&Condition::Laver(laver), Fruit::Peach, 4).unwrap();
        let o = peach.as_oracle();
        let t = materialize(o.as_ref(), 4, u64::MAX).unwrap();
        assert!(t.split_nodes().len() > 4);
        assert_eq!(check_fruit(FruitInput::Tree(&t), Fruit::Peach).unwrap(), None);
    }

    #[test]
    fn plum_refinement_passes_check() {
        let plum = refine_to_fruit(&Condition::Miller(full_miller()), Fruit::Plum, 4).unwrap();
        let o = plum.as_oracle();
        let t = materialize(o.as_ref(), 4, u64::MAX).unwrap();
        assert_eq!(check_fruit(FruitInput::Tree(&t), Fruit::Plum).unwrap(), None);
    }

    #[test]
    fn maple_refinement_merges_singletons_summably() {
        // singleton blocks {0}, {1}, {2}, ...: merged sizes 1, 2, 4, 8
        let t = MatetCond {
            stem: Seq::empty(),
            blocks: Blocks::new(0, SizeSchedule::Constant(1), 0),
        };
        let refined = refine_to_fruit(&Condition::Matet(t), Fruit::Maple, 4).unwrap();
        let Refined::Cond(Condition::Matet(m)) = &refined else {
            panic!("expected a condition");
        };
        let sizes: Vec<u64> = (0..4).map(|k| m.blocks.group_size(k)).collect();
        assert_eq!(sizes, vec![1, 2, 4, 8]);
        // the growth makes values determine prefixes
        let tree = materialize(refined.as_oracle().as_ref(), 6, 40).unwrap();
        assert_eq!(check_fruit(FruitInput::Tree(&tree), Fruit::Maple).unwrap(), None);
    }

    #[test]
    fn oak_refinement_idempotent_on_passers() {
        let c = gen_condition(
            Family::Silver,
            GenParams::new(3).with_control(SizeControl::OakPattern),
        )
        .unwrap();
        let refined = refine_to_fruit(&c, Fruit::Oak, 6).unwrap();
        let Refined::Cond(rc) = refined else {
            panic!("expected condition")
        };
        assert_eq!(rc, c);
    }

    #[test]
    fn oak_refinement_fixes_failers() {
        // every position free, odd positions would decide 1 if dropped
        let bad = SilverCond {
            free: Stream::arithmetic(0, 1),
            ones: OnesRule::Modular { m: 2, r: 1 },
        };
        let refined = refine_to_fruit(&Condition::Silver(bad), Fruit::Oak, 4).unwrap();
        let Refined::Cond(Condition::Silver(rc)) = &refined else {
            panic!("expected silver");
        };
        assert!(check_oak(rc, 8).is_none());
    }

    #[test]
    fn stagger_refinement_outputs_staggered_subtree() {
        let c = crate::conditions::SacksCond {
            seed: 4,
            levels: 8,
            stagger: false,
            typed: None,
        };
        let base = PlanOracle::new(c.clone());
        let refined = refine_to_fruit(&Condition::Sacks(c), Fruit::Stagger, 3).unwrap();
        let o = refined.as_oracle();
        let t = materialize(o.as_ref(), 16, u64::MAX).unwrap();
        assert_eq!(check_fruit(FruitInput::Tree(&t), Fruit::Stagger).unwrap(), None);
        // subtree of the base plan
        for m in t.members() {
            assert!(base.contains(&m).unwrap(), "{m:?} not in base");
        }
    }

    #[test]
    fn fig_refinement_gives_two_spaced_splits() {
        let c = gen_condition(
            Family::Willow,
            GenParams::new(6).with_control(SizeControl::FigBlocks),
        )
        .unwrap();
        let refined = refine_to_fruit(&c, Fruit::Fig, 6).unwrap();
        let t = materialize(refined.as_oracle().as_ref(), 10, 64).unwrap();
        assert_eq!(check_fruit(FruitInput::Tree(&t), Fruit::Fig).unwrap(), None);
    }
}
