//! Perfect-tree split plans.
//!
//! A Sacks condition is an explicit generator of a perfect tree: a map from
//! binary strings to split nodes plus the two successor values at each
//! split. Plans are generated to a fixed split depth; beyond the last
//! planned split every branch continues as a non-splitting spine.
//!
//! Besides plain (optionally length-staggered) plans, the generator can
//! schedule value assignment so that every split of the resulting tree
//! falls into one fixed class of the canonical relations. The schedules
//! exploit assignment time: values drawn from a global counter only grow,
//! so a split's successor values compare against parallel branch values
//! exactly by who was assigned first.

use super::stream::{mix, mix_seq};
use crate::seq::{Bits, Seq};
use std::collections::BTreeMap;
use std::fmt;

/// Target uniform classification for a scheduled plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformType {
    ZeroZero,
    ZeroTwo,
    TwoZero,
    TwoTwo,
}

impl UniformType {
    pub fn pair(&self) -> (u8, u8) {
        match self {
            UniformType::ZeroZero => (0, 0),
            UniformType::ZeroTwo => (0, 2),
            UniformType::TwoZero => (2, 0),
            UniformType::TwoTwo => (2, 2),
        }
    }

    pub fn render(&self) -> &'static str {
        match self {
            UniformType::ZeroZero => "00",
            UniformType::ZeroTwo => "02",
            UniformType::TwoZero => "20",
            UniformType::TwoTwo => "22",
        }
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "00" => Ok(UniformType::ZeroZero),
            "02" => Ok(UniformType::ZeroTwo),
            "20" => Ok(UniformType::TwoZero),
            "22" => Ok(UniformType::TwoTwo),
            _ => Err(format!("bad type tag {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SacksCond {
    pub seed: u64,
    /// Planned split depth (number of split levels below the stem).
    pub levels: usize,
    /// Keep at most one split per node length.
    pub stagger: bool,
    /// Schedule values for one uniform canonical class.
    pub typed: Option<UniformType>,
}

impl fmt::Display for SacksCond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seed {} levels {} stagger {} typed {}",
            self.seed,
            self.levels,
            self.stagger,
            self.typed.map_or("none", |t| t.render())
        )
    }
}

impl SacksCond {
    pub fn parse_body(text: &str) -> Result<SacksCond, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts.as_slice() {
            ["seed", s, "levels", l, "stagger", g, "typed", t] => Ok(SacksCond {
                seed: s.parse().map_err(|e| format!("bad seed: {e}"))?,
                levels: l.parse().map_err(|e| format!("bad levels: {e}"))?,
                stagger: g.parse().map_err(|e| format!("bad stagger: {e}"))?,
                typed: if *t == "none" {
                    None
                } else {
                    Some(UniformType::parse(t)?)
                },
            }),
            _ => Err(format!("bad sacks spec {text:?}")),
        }
    }

    pub fn plan(&self) -> SacksPlan {
        let mut gen = Gen {
            seed: self.seed,
            counter: 0,
            frontier: 0,
            // Scheduled plans are always staggered: the canonical relations
            // want at most one split per length.
            stagger: self.stagger || self.typed.is_some(),
            loose: self.typed.is_none(),
        };
        let mut plan = SacksPlan {
            labels: BTreeMap::new(),
            succ: BTreeMap::new(),
            levels: self.levels,
            seed: self.seed,
            spine_ids: BTreeMap::new(),
        };
        let stem_len = (mix(self.seed, 0xdead) % 2) as usize;
        let mut stem = Seq::empty();
        for k in 0..stem_len {
            stem.push(gen.value(k as u64));
        }
        gen.frontier = stem.len();
        plan.labels.insert(Bits::empty(), stem);

        match self.typed {
            Some(UniformType::ZeroTwo) => {
                self.dfs_fill(&mut plan, &mut gen, Bits::empty(), [0u8, 1u8])
            }
            Some(UniformType::TwoZero) => {
                self.dfs_fill(&mut plan, &mut gen, Bits::empty(), [1u8, 0u8])
            }
            _ => self.bfs_fill(&mut plan, &mut gen),
        }
        plan
    }

    /// Level-synchronous creation with ever-growing lengths. Successor
    /// values drawn fresh at child creation give the TwoTwo class: by then
    /// every parallel branch has already crossed the split position with
    /// smaller values. Reserving the successor pair when the split label
    /// itself is created gives ZeroZero: every parallel branch crosses the
    /// split position later, with larger values.
    fn bfs_fill(&self, plan: &mut SacksPlan, gen: &mut Gen) {
        let early = self.typed == Some(UniformType::ZeroZero);
        if early {
            let pair = (gen.tick(), gen.tick());
            plan.succ.insert(Bits::empty(), pair);
        }
        for level in 0..self.levels {
            let mut parents: Vec<Bits> = Bits::all_of_len(level);
            if self.typed == Some(UniformType::TwoTwo) {
                parents.sort_by_key(|t| plan.labels[t].len());
            }
            for t in parents {
                let base = plan.labels[&t].clone();
                let (v0, v1) = if early {
                    plan.succ[&t]
                } else {
                    let pair = gen.succ_pair(&t);
                    plan.succ.insert(t.clone(), pair);
                    pair
                };
                for (b, v) in [(0u8, v0), (1u8, v1)] {
                    let child_idx = t.child(b);
                    let len = gen.child_len(base.len() + 1, &child_idx);
                    let mut label = base.child(v);
                    while label.len() < len {
                        let salt = mix_seq(gen.seed, label.values()) ^ label.len() as u64;
                        let pad = gen.value(salt);
                        label.push(pad);
                    }
                    if early && child_idx.len() < self.levels {
                        let pair = (gen.tick(), gen.tick());
                        plan.succ.insert(child_idx.clone(), pair);
                    }
                    plan.labels.insert(child_idx, label);
                }
            }
        }
        // Leaf labels never split; drop any reserved pairs there.
        plan.succ.retain(|t, _| t.len() < self.levels);
    }

    /// Depth-first creation: reserve the successor pair, then complete one
    /// whole cone before starting the other. The first-built cone gets
    /// smaller values throughout, so its splits fall in class 0 and the
    /// other cone's splits fall in class 2.
    fn dfs_fill(&self, plan: &mut SacksPlan, gen: &mut Gen, t: Bits, order: [u8; 2]) {
        if t.len() >= self.levels {
            return;
        }
        let base = plan.labels[&t].clone();
        let (v0, v1) = (gen.tick(), gen.tick());
        plan.succ.insert(t.clone(), (v0, v1));
        for b in order {
            let v = if b == 0 { v0 } else { v1 };
            let child_idx = t.child(b);
            let len = gen.child_len(base.len() + 1, &child_idx);
            let mut label = base.child(v);
            while label.len() < len {
                label.push(gen.tick());
            }
            plan.labels.insert(child_idx.clone(), label);
            self.dfs_fill(plan, gen, child_idx, order);
        }
    }
}

struct Gen {
    seed: u64,
    counter: u64,
    frontier: usize,
    stagger: bool,
    loose: bool,
}

impl Gen {
    fn tick(&mut self) -> u64 {
        self.counter += 1 + mix(self.seed, self.counter) % 3;
        self.counter
    }

    /// Padding/stem value. Unscheduled plans use position-hashed values so
    /// the canonical classes come out mixed; scheduled plans use the
    /// counter.
    fn value(&mut self, salt: u64) -> u64 {
        if self.loose {
            mix(self.seed, salt) % 64
        } else {
            self.tick()
        }
    }

    fn succ_pair(&mut self, t: &Bits) -> (u64, u64) {
        if self.loose {
            let h = mix_seq(self.seed, &[t.num() as u64, t.len() as u64]);
            let a = mix(h, 1) % 64;
            let mut b = mix(h, 2) % 64;
            if b == a {
                b = (a + 1) % 64;
            }
            (a.min(b), a.max(b))
        } else {
            (self.tick(), self.tick())
        }
    }

    fn child_len(&mut self, at_least: usize, t: &Bits) -> usize {
        let salt = mix_seq(self.seed, &[0xc1d, t.num() as u64, t.len() as u64]);
        let pad = (mix(self.seed, salt) % 2) as usize;
        if self.stagger {
            // Strictly past every length handed out so far.
            self.frontier = (self.frontier + 1).max(at_least) + pad;
            self.frontier
        } else {
            at_least + pad
        }
    }
}

/// Fully generated plan: split labels for every binary string up to the
/// planned depth, with the two successor values recorded per split.
#[derive(Debug, Clone)]
pub struct SacksPlan {
    pub labels: BTreeMap<Bits, Seq>,
    /// Successor values (v0 < v1) at each non-leaf split label.
    pub succ: BTreeMap<Bits, (u64, u64)>,
    pub levels: usize,
    pub seed: u64,
    /// Spine identity per leaf, for plans derived from another plan whose
    /// continuation rays they must follow. Defaults to the leaf's rank.
    pub spine_ids: BTreeMap<Bits, u64>,
}

impl SacksPlan {
    /// Value of the non-splitting spine continuing a leaf label, k steps in.
    pub fn spine_value(&self, leaf: &Bits, label: &Seq, k: usize) -> u64 {
        let id = self
            .spine_ids
            .get(leaf)
            .copied()
            .unwrap_or(leaf.num() as u64);
        let mut v = label.last().unwrap_or(0);
        let h = mix_seq(self.seed, &[0x59e, id]);
        for i in 0..=k {
            v = v + 1 + mix(h, i as u64) % 3;
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(typed: Option<UniformType>) -> SacksCond {
        SacksCond {
            seed: 11,
            levels: 3,
            stagger: true,
            typed,
        }
    }

    #[test]
    fn plan_is_deterministic_and_monotone() {
        let a = cond(None).plan();
        let b = cond(None).plan();
        assert_eq!(a.labels, b.labels);
        for (t, lbl) in &a.labels {
            if let Some(p) = t.parent() {
                assert!(a.labels[&p].is_strict_prefix_of(lbl));
            }
        }
    }

    #[test]
    fn staggered_plan_has_distinct_label_lengths() {
        let plan = cond(None).plan();
        let mut lens: Vec<usize> = plan.labels.values().map(|l| l.len()).collect();
        lens.sort_unstable();
        lens.dedup();
        assert_eq!(lens.len(), plan.labels.len());
    }

    #[test]
    fn successor_values_bracket_children() {
        for typed in [
            None,
            Some(UniformType::TwoTwo),
            Some(UniformType::ZeroZero),
            Some(UniformType::ZeroTwo),
            Some(UniformType::TwoZero),
        ] {
            let plan = cond(typed).plan();
            for (t, &(v0, v1)) in &plan.succ {
                assert!(v0 < v1, "{typed:?} at {t:?}");
                let base_len = plan.labels[t].len();
                assert_eq!(plan.labels[&t.child(0)].get(base_len), Some(v0));
                assert_eq!(plan.labels[&t.child(1)].get(base_len), Some(v1));
            }
        }
    }
}
