//! The seven condition families and their compilation to tree oracles.
//!
//! Each family stores its data the way the conditions are usually written:
//! a Mathias condition is a stem plus an infinite value set, a Matet
//! condition a stem plus a block sequence, a Silver condition a partial 0/1
//! function with an infinite complement, and so on. `expand` turns a
//! condition into a `TreeOracle`; `gen_condition` builds seeded instances
//! for desk-scale experiments.

pub mod blocks;
pub mod sacks;
pub mod stream;

pub mod oracles;

pub use blocks::{Blocks, MergeRule, SizeSchedule};
pub use sacks::{SacksCond, SacksPlan, UniformType};
pub use stream::{mix, mix_seq, Stream};

use crate::oracle::TreeOracle;
use crate::seq::Seq;
use oracles::{
    LaverOracle, MathiasOracle, MatetOracle, MillerOracle, PlanOracle, SilverOracle, WillowOracle,
};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Family {
    Sacks,
    Miller,
    Laver,
    Mathias,
    Matet,
    Silver,
    Willow,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Sacks,
        Family::Miller,
        Family::Laver,
        Family::Mathias,
        Family::Matet,
        Family::Silver,
        Family::Willow,
    ];

    pub fn render(&self) -> &'static str {
        match self {
            Family::Sacks => "sacks",
            Family::Miller => "miller",
            Family::Laver => "laver",
            Family::Mathias => "mathias",
            Family::Matet => "matet",
            Family::Silver => "silver",
            Family::Willow => "willow",
        }
    }

    pub fn parse(s: &str) -> Result<Family, String> {
        match s {
            "sacks" => Ok(Family::Sacks),
            "miller" => Ok(Family::Miller),
            "laver" => Ok(Family::Laver),
            "mathias" => Ok(Family::Mathias),
            "matet" => Ok(Family::Matet),
            "silver" => Ok(Family::Silver),
            "willow" => Ok(Family::Willow),
            _ => Err(format!("unknown family {s:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum CondError {
    #[error("unsatisfiable size controls: {0}")]
    Unsatisfiable(String),
    #[error("{0}")]
    Malformed(String),
}

/// Per-node successor streams for the superperfect families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchRule {
    /// Every value above the node's last value succeeds it.
    Full,
    /// Arithmetic stream per node with hashed offset and step in `1..=spread`.
    Seeded { seed: u64, spread: u64 },
}

impl BranchRule {
    /// Successor stream of a node whose last value is `last` (None at the
    /// empty node). All values are strictly above `last`.
    pub fn stream_for(&self, node: &Seq) -> Stream {
        let base = node.last().map_or(0, |v| v + 1);
        match self {
            BranchRule::Full => Stream::arithmetic(base, 1),
            BranchRule::Seeded { seed, spread } => {
                let h = mix_seq(*seed, node.values());
                let start = base + mix(h, 1) % spread;
                let step = 1 + mix(h, 2) % spread;
                Stream::arithmetic(start, step)
            }
        }
    }

    pub fn render(&self) -> String {
        match self {
            BranchRule::Full => "full".into(),
            BranchRule::Seeded { seed, spread } => format!("seeded {seed} {spread}"),
        }
    }

    pub fn parse(text: &str) -> Result<BranchRule, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts.as_slice() {
            ["full"] => Ok(BranchRule::Full),
            ["seeded", s, g] => Ok(BranchRule::Seeded {
                seed: s.parse().map_err(|e| format!("bad seed: {e}"))?,
                spread: g.parse().map_err(|e| format!("bad spread: {e}"))?,
            }),
            _ => Err(format!("bad branch rule {text:?}")),
        }
    }
}

/// The 0/1 values a Silver condition takes on its domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OnesRule {
    /// Every non-free position carries 1.
    All,
    /// 1 exactly at non-free positions congruent to r mod m.
    Modular { m: u64, r: u64 },
    /// Seeded: 1 at roughly one in `density` non-free positions.
    Seeded { seed: u64, density: u64 },
}

impl OnesRule {
    pub fn decide(&self, x: u64) -> u8 {
        match self {
            OnesRule::All => 1,
            OnesRule::Modular { m, r } => u8::from(x % m == *r),
            OnesRule::Seeded { seed, density } => u8::from(mix(*seed, x) % density == 0),
        }
    }

    pub fn render(&self) -> String {
        match self {
            OnesRule::All => "all".into(),
            OnesRule::Modular { m, r } => format!("mod {m} {r}"),
            OnesRule::Seeded { seed, density } => format!("seeded {seed} {density}"),
        }
    }

    pub fn parse(text: &str) -> Result<OnesRule, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        let num = |s: &str| -> Result<u64, String> {
            s.parse::<u64>().map_err(|e| format!("bad number {s:?}: {e}"))
        };
        match parts.as_slice() {
            ["all"] => Ok(OnesRule::All),
            ["mod", m, r] => Ok(OnesRule::Modular {
                m: num(m)?,
                r: num(r)?,
            }),
            ["seeded", s, d] => Ok(OnesRule::Seeded {
                seed: num(s)?,
                density: num(d)?,
            }),
            _ => Err(format!("bad ones rule {text:?}")),
        }
    }
}

/// Mandatory points of a willow condition in the off-block regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GapOnes {
    /// The first off-block position of every region carries 1, the rest 0.
    FirstOfGap,
    /// First position plus seeded extras.
    FirstPlusSeeded { seed: u64, density: u64 },
}

impl GapOnes {
    pub fn render(&self) -> String {
        match self {
            GapOnes::FirstOfGap => "first".into(),
            GapOnes::FirstPlusSeeded { seed, density } => format!("first+ {seed} {density}"),
        }
    }

    pub fn parse(text: &str) -> Result<GapOnes, String> {
        let parts: Vec<&str> = text.split_whitespace().collect();
        match parts.as_slice() {
            ["first"] => Ok(GapOnes::FirstOfGap),
            ["first+", s, d] => Ok(GapOnes::FirstPlusSeeded {
                seed: s.parse().map_err(|e| format!("bad seed: {e}"))?,
                density: d.parse().map_err(|e| format!("bad density: {e}"))?,
            }),
            _ => Err(format!("bad gap ones {text:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MillerCond {
    pub stem: Seq,
    /// Non-splitting levels between consecutive splitting levels.
    pub gap: usize,
    pub rule: BranchRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaverCond {
    pub stem: Seq,
    pub rule: BranchRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MathiasCond {
    pub stem: Seq,
    pub a: Stream,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatetCond {
    pub stem: Seq,
    pub blocks: Blocks,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilverCond {
    /// Strictly increasing enumeration of the positions left undecided.
    pub free: Stream,
    /// 0/1 values on the decided positions.
    pub ones: OnesRule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WillowCond {
    pub blocks: Blocks,
    pub ones: GapOnes,
}

impl WillowCond {
    /// Mandatory points in the region between block n and block n+1.
    pub fn mandatory_after(&self, n: u64) -> Vec<u64> {
        let region = self.blocks.region_after(n);
        match &self.ones {
            GapOnes::FirstOfGap => region.into_iter().take(1).collect(),
            GapOnes::FirstPlusSeeded { seed, density } => region
                .iter()
                .enumerate()
                .filter(|(i, x)| *i == 0 || mix(*seed, **x) % density == 0)
                .map(|(_, x)| *x)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Sacks(SacksCond),
    Miller(MillerCond),
    Laver(LaverCond),
    Mathias(MathiasCond),
    Matet(MatetCond),
    Silver(SilverCond),
    Willow(WillowCond),
}

impl Condition {
    pub fn family(&self) -> Family {
        match self {
            Condition::Sacks(_) => Family::Sacks,
            Condition::Miller(_) => Family::Miller,
            Condition::Laver(_) => Family::Laver,
            Condition::Mathias(_) => Family::Mathias,
            Condition::Matet(_) => Family::Matet,
            Condition::Silver(_) => Family::Silver,
            Condition::Willow(_) => Family::Willow,
        }
    }

    /// Compile to a lazily-queryable tree.
    pub fn expand(&self) -> Box<dyn TreeOracle> {
        match self {
            Condition::Sacks(c) => Box::new(PlanOracle::new(c.clone())),
            Condition::Miller(c) => Box::new(MillerOracle::new(c.clone())),
            Condition::Laver(c) => Box::new(LaverOracle::new(c.clone())),
            Condition::Mathias(c) => Box::new(MathiasOracle::new(c.clone())),
            Condition::Matet(c) => Box::new(MatetOracle::new(c.clone())),
            Condition::Silver(c) => Box::new(SilverOracle::new(c.clone())),
            Condition::Willow(c) => Box::new(WillowOracle::new(c.clone())),
        }
    }

    /// Versioned plain-text record.
    pub fn render(&self) -> String {
        let body = match self {
            Condition::Sacks(c) => format!("sacks\n{c}"),
            Condition::Miller(c) => format!(
                "miller\nstem {}\ngap {}\nrule {}",
                c.stem.render(),
                c.gap,
                c.rule.render()
            ),
            Condition::Laver(c) => {
                format!("laver\nstem {}\nrule {}", c.stem.render(), c.rule.render())
            }
            Condition::Mathias(c) => {
                format!("mathias\nstem {}\nset {}", c.stem.render(), c.a.render())
            }
            Condition::Matet(c) => format!(
                "matet\nstem {}\nblocks {}",
                c.stem.render(),
                c.blocks.render()
            ),
            Condition::Silver(c) => {
                format!("silver\nfree {}\nones {}", c.free.render(), c.ones.render())
            }
            Condition::Willow(c) => format!(
                "willow\nblocks {}\nones {}",
                c.blocks.render(),
                c.ones.render()
            ),
        };
        format!("orchard-cond v1\nfamily {body}\n")
    }

    pub fn parse(text: &str) -> Result<Condition, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("missing header")?;
        if header.trim() != "orchard-cond v1" {
            return Err(format!("bad header {header:?}"));
        }
        let fam_line = lines.next().ok_or("missing family")?;
        let fam = fam_line
            .strip_prefix("family ")
            .ok_or_else(|| format!("bad family line {fam_line:?}"))?
            .trim();
        let mut fields = std::collections::BTreeMap::new();
        for line in lines {
            let l = line.trim();
            if l.is_empty() {
                continue;
            }
            let (k, v) = l.split_once(' ').unwrap_or((l, ""));
            fields.insert(k.to_string(), v.to_string());
        }
        let field = |k: &str| -> Result<&str, String> {
            fields
                .get(k)
                .map(|s| s.as_str())
                .ok_or_else(|| format!("missing field {k:?}"))
        };
        match fam {
            "sacks" => {
                // Remaining lines hold the one-line plan descriptor.
                let body = fields
                    .iter()
                    .map(|(k, v)| format!("{k} {v}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                Ok(Condition::Sacks(SacksCond::parse_body(&body)?))
            }
            "miller" => Ok(Condition::Miller(MillerCond {
                stem: Seq::parse(field("stem")?)?,
                gap: field("gap")?
                    .trim()
                    .parse()
                    .map_err(|e| format!("bad gap: {e}"))?,
                rule: BranchRule::parse(field("rule")?)?,
            })),
            "laver" => Ok(Condition::Laver(LaverCond {
                stem: Seq::parse(field("stem")?)?,
                rule: BranchRule::parse(field("rule")?)?,
            })),
            "mathias" => Ok(Condition::Mathias(MathiasCond {
                stem: Seq::parse(field("stem")?)?,
                a: Stream::parse(field("set")?)?,
            })),
            "matet" => Ok(Condition::Matet(MatetCond {
                stem: Seq::parse(field("stem")?)?,
                blocks: Blocks::parse(field("blocks")?)?,
            })),
            "silver" => Ok(Condition::Silver(SilverCond {
                free: Stream::parse(field("free")?)?,
                ones: OnesRule::parse(field("ones")?)?,
            })),
            "willow" => Ok(Condition::Willow(WillowCond {
                blocks: Blocks::parse(field("blocks")?)?,
                ones: GapOnes::parse(field("ones")?)?,
            })),
            _ => Err(format!("unknown family {fam:?}")),
        }
    }
}

/// Growth profile for generated conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Growth {
    Arithmetic,
    Geometric,
    Random,
}

impl Growth {
    pub fn render(&self) -> &'static str {
        match self {
            Growth::Arithmetic => "arithmetic",
            Growth::Geometric => "geometric",
            Growth::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Growth, String> {
        match s {
            "arithmetic" => Ok(Growth::Arithmetic),
            "geometric" => Ok(Growth::Geometric),
            "random" => Ok(Growth::Random),
            _ => Err(format!("unknown profile {s:?}")),
        }
    }
}

/// Family-specific size controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeControl {
    Default,
    /// Matet: every block larger than all earlier blocks together.
    Summable,
    /// Matet: blocks of size at least 2.
    AlmondBlocks,
    /// Willow: blocks of size at least 2 with a mandatory point strictly
    /// between consecutive blocks.
    FigBlocks,
    /// Willow: frame-compatible sizes for the typed subtree constructions.
    FramedLinear,
    /// Willow: string-frame sizes for the pair-indexed construction.
    FramedStrings,
    /// Silver: a mandatory 1 between any two consecutive free positions.
    OakPattern,
    /// Sacks: schedule one uniform canonical class.
    Typed(UniformType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub profile: Growth,
    pub control: SizeControl,
}

impl GenParams {
    pub fn new(seed: u64) -> Self {
        GenParams {
            seed,
            profile: Growth::Arithmetic,
            control: SizeControl::Default,
        }
    }

    pub fn with_profile(mut self, p: Growth) -> Self {
        self.profile = p;
        self
    }

    pub fn with_control(mut self, c: SizeControl) -> Self {
        self.control = c;
        self
    }
}

/// Deterministically generate a condition of the family. Identical
/// parameters yield identical conditions.
pub fn gen_condition(family: Family, p: GenParams) -> Result<Condition, CondError> {
    let seed = p.seed;
    let small = |salt: u64, m: u64| mix(seed, salt) % m;
    let stem_of = |salt: u64, max_len: u64| {
        let len = small(salt, max_len + 1);
        let mut s = Seq::empty();
        let mut v = small(salt ^ 0x5, 3);
        for k in 0..len {
            s.push(v);
            v += 1 + small(salt ^ k, 2);
        }
        s
    };
    let stream_after = |salt: u64, lo: u64| match p.profile {
        Growth::Arithmetic => Stream::arithmetic(lo + small(salt, 3), 1 + small(salt ^ 1, 3)),
        Growth::Geometric => Stream::arithmetic(lo + small(salt, 3), 2 + small(salt ^ 1, 2)),
        Growth::Random => Stream::seeded(mix(seed, salt), lo + small(salt, 3), 4),
    };
    match family {
        Family::Sacks => {
            let typed = match p.control {
                SizeControl::Typed(t) => Some(t),
                SizeControl::Default => None,
                other => {
                    return Err(CondError::Unsatisfiable(format!(
                        "control {other:?} does not apply to sacks"
                    )))
                }
            };
            Ok(Condition::Sacks(SacksCond {
                seed,
                levels: 8,
                stagger: true,
                typed,
            }))
        }
        Family::Miller => Ok(Condition::Miller(MillerCond {
            stem: stem_of(0x33, 2),
            gap: small(0x34, 3) as usize,
            rule: match p.profile {
                Growth::Arithmetic => BranchRule::Full,
                _ => BranchRule::Seeded {
                    seed: mix(seed, 0x35),
                    spread: 2 + small(0x36, 3),
                },
            },
        })),
        Family::Laver => Ok(Condition::Laver(LaverCond {
            stem: stem_of(0x43, 2),
            rule: match p.profile {
                Growth::Arithmetic => BranchRule::Full,
                _ => BranchRule::Seeded {
                    seed: mix(seed, 0x45),
                    spread: 2 + small(0x46, 3),
                },
            },
        })),
        Family::Mathias => {
            let stem = stem_of(0x53, 2);
            let lo = stem.max_value().map_or(0, |m| m + 1);
            Ok(Condition::Mathias(MathiasCond {
                stem,
                a: stream_after(0x54, lo),
            }))
        }
        Family::Matet => {
            let stem = stem_of(0x63, 2);
            let lo = stem.max_value().map_or(0, |m| m + 1);
            let sizes = match p.control {
                SizeControl::Summable => SizeSchedule::Doubling { start: 1 },
                SizeControl::AlmondBlocks => SizeSchedule::Constant(2 + small(0x64, 2)),
                SizeControl::Default => match p.profile {
                    Growth::Arithmetic => SizeSchedule::Arithmetic {
                        start: 1 + small(0x65, 2),
                        step: small(0x66, 2),
                    },
                    Growth::Geometric => SizeSchedule::Doubling {
                        start: 1 + small(0x65, 2),
                    },
                    Growth::Random => SizeSchedule::Seeded {
                        seed: mix(seed, 0x67),
                        min: 1,
                        max: 4,
                    },
                },
                other => {
                    return Err(CondError::Unsatisfiable(format!(
                        "control {other:?} does not apply to matet"
                    )))
                }
            };
            Ok(Condition::Matet(MatetCond {
                stem,
                blocks: Blocks::new(lo + small(0x68, 2), sizes, 1 + small(0x69, 2)),
            }))
        }
        Family::Silver => {
            let (free, ones) = match p.control {
                SizeControl::OakPattern => (
                    Stream::arithmetic(small(0x73, 2), 2 + small(0x74, 2)),
                    OnesRule::All,
                ),
                SizeControl::Default => match p.profile {
                    Growth::Arithmetic => (
                        Stream::arithmetic(small(0x73, 3), 2),
                        OnesRule::Modular {
                            m: 2,
                            r: 1 - small(0x73, 3) % 2,
                        },
                    ),
                    _ => (
                        Stream::seeded(mix(seed, 0x75), small(0x76, 3), 3),
                        OnesRule::Seeded {
                            seed: mix(seed, 0x77),
                            density: 2,
                        },
                    ),
                },
                other => {
                    return Err(CondError::Unsatisfiable(format!(
                        "control {other:?} does not apply to silver"
                    )))
                }
            };
            // The free stream and the ones rule must not collide in a way
            // that starves the tree; validated lazily by the oracle.
            Ok(Condition::Silver(SilverCond { free, ones }))
        }
        Family::Willow => {
            let sizes = match p.control {
                SizeControl::FramedLinear => SizeSchedule::FramedLinear,
                SizeControl::FramedStrings => SizeSchedule::FramedStrings,
                SizeControl::FigBlocks => SizeSchedule::Constant(2 + small(0x83, 2)),
                SizeControl::Default => match p.profile {
                    Growth::Arithmetic => SizeSchedule::Arithmetic {
                        start: 1 + small(0x84, 2),
                        step: small(0x85, 2),
                    },
                    Growth::Geometric => SizeSchedule::Doubling {
                        start: 1 + small(0x84, 2),
                    },
                    Growth::Random => SizeSchedule::Seeded {
                        seed: mix(seed, 0x86),
                        min: 1,
                        max: 4,
                    },
                },
                other => {
                    return Err(CondError::Unsatisfiable(format!(
                        "control {other:?} does not apply to willow"
                    )))
                }
            };
            let ones = match (p.control, p.profile) {
                (SizeControl::FramedLinear | SizeControl::FramedStrings | SizeControl::FigBlocks, _) => {
                    GapOnes::FirstOfGap
                }
                (_, Growth::Random) => GapOnes::FirstPlusSeeded {
                    seed: mix(seed, 0x87),
                    density: 3,
                },
                _ => GapOnes::FirstOfGap,
            };
            Ok(Condition::Willow(WillowCond {
                blocks: Blocks::new(small(0x88, 3), sizes, 1 + small(0x89, 2)),
                ones,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq;

    #[test]
    fn generation_is_deterministic() {
        for fam in Family::ALL {
            let a = gen_condition(fam, GenParams::new(7)).unwrap();
            let b = gen_condition(fam, GenParams::new(7)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn summable_control_gives_doubling_sizes() {
        // Smallest sizes with each block outweighing all earlier ones.
        let c = gen_condition(
            Family::Matet,
            GenParams::new(3).with_control(SizeControl::Summable),
        )
        .unwrap();
        let Condition::Matet(m) = c else { unreachable!() };
        let sizes: Vec<u64> = (0..3).map(|n| m.blocks.size(n)).collect();
        assert_eq!(sizes, vec![1, 2, 4]);
    }

    #[test]
    fn willow_gaps_carry_a_mandatory_point() {
        let c = gen_condition(
            Family::Willow,
            GenParams::new(5).with_control(SizeControl::FramedLinear),
        )
        .unwrap();
        let Condition::Willow(w) = c else { unreachable!() };
        for n in 0..12 {
            let mand = w.mandatory_after(n);
            assert!(!mand.is_empty());
            // strictly between the block minima
            let lo = w.blocks.start(n);
            let hi = w.blocks.start(n + 1);
            for m in mand {
                assert!(lo < m && m < hi);
            }
        }
    }

    #[test]
    fn render_parse_roundtrip() {
        for fam in Family::ALL {
            for control in [SizeControl::Default] {
                let c = gen_condition(fam, GenParams::new(11).with_control(control)).unwrap();
                let text = c.render();
                let back = Condition::parse(&text).expect(&text);
                assert_eq!(back, c, "{text}");
                assert_eq!(back.render(), text);
            }
        }
    }

    #[test]
    fn mathias_stem_below_set() {
        let c = gen_condition(Family::Mathias, GenParams::new(9)).unwrap();
        let Condition::Mathias(m) = c else { unreachable!() };
        if let Some(mx) = m.stem.max_value() {
            assert!(mx < m.a.first());
        }
        let _ = seq![0];
    }
}
