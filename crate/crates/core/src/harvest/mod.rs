//! The named subtree constructions: binary and pair-indexed label systems
//! built inside a host condition, engineered so that their realized trees
//! intersect the density-refined trees of other families in very few
//! branches.
//!
//! Builders are deterministic greedy-minimal: wherever a choice is allowed
//! the least admissible value is taken, level-synchronously, so that runs
//! are reproducible and the conformance checkers can replay every clause.

mod miller;
mod recipes;
mod willow;

pub use miller::{build_cherry, build_mango, build_type22, check_cherry, check_mango};
pub use recipes::{build_fruit_system, check_recipe, Recipe};
pub use willow::{
    build_poplar, build_willow_typed, check_poplar, check_willow00, check_willow02, BlockFrame,
    WillowMode,
};

use crate::conditions::Condition;
use crate::oracle::OracleError;
use crate::seq::Seq;
use crate::system::{BiLabeledSystem, LabeledSystem};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error("condition exhausted before depth {0}: {1}")]
    Exhausted(usize, String),
    #[error("recipe {0:?} needs a {1} host")]
    WrongHost(Recipe, &'static str),
    #[error("builder {0:?} needs a {1} host")]
    WrongBuilderHost(Builder, &'static str),
    #[error("side condition failed: {0}")]
    SideCondition(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    System(#[from] crate::system::SystemError),
}

/// Which construction produced a system; used by conformance reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Builder {
    Pear,
    Orange,
    Lemon,
    Date,
    Cherry,
    Type22,
    Mango,
    Willow00,
    Willow02,
    Poplar,
}

impl Builder {
    pub fn render(&self) -> &'static str {
        match self {
            Builder::Pear => "pear",
            Builder::Orange => "orange",
            Builder::Lemon => "lemon",
            Builder::Date => "date",
            Builder::Cherry => "cherry",
            Builder::Type22 => "type22",
            Builder::Mango => "mango",
            Builder::Willow00 => "willow00",
            Builder::Willow02 => "willow02",
            Builder::Poplar => "poplar",
        }
    }

    pub fn parse(s: &str) -> Result<Builder, String> {
        [
            Builder::Pear,
            Builder::Orange,
            Builder::Lemon,
            Builder::Date,
            Builder::Cherry,
            Builder::Type22,
            Builder::Mango,
            Builder::Willow00,
            Builder::Willow02,
            Builder::Poplar,
        ]
        .iter()
        .find(|b| b.render() == s)
        .copied()
        .ok_or_else(|| format!("unknown builder {s:?}"))
    }
}

/// A failed construction clause with the labels that witness it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemViolation {
    pub builder: Builder,
    pub clause: &'static str,
    /// (index rendering, label) pairs.
    pub witness: Vec<(String, Seq)>,
}

impl fmt::Display for SystemViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.builder.render(), self.clause)?;
        for (idx, lbl) in &self.witness {
            write!(f, " {idx}:[{}]", lbl.render())?;
        }
        Ok(())
    }
}

pub(crate) fn violation(
    builder: Builder,
    clause: &'static str,
    witness: Vec<(String, Seq)>,
) -> SystemViolation {
    SystemViolation {
        builder,
        clause,
        witness,
    }
}

/// Every label must be a member of the host's tree.
pub(crate) fn membership_replay(
    builder: Builder,
    labels: impl Iterator<Item = (String, Seq)>,
    host: &Condition,
) -> Result<Option<SystemViolation>, HarvestError> {
    let oracle = host.expand();
    for (idx, lbl) in labels {
        if !oracle.contains(&lbl)? {
            return Ok(Some(violation(
                builder,
                "(membership)",
                vec![(idx, lbl)],
            )));
        }
    }
    Ok(None)
}

/// Run the full clause checklist of whichever builder produced the system.
pub fn check_built_system(
    builder: Builder,
    sys: &SystemRef,
    host: &Condition,
) -> Result<Option<SystemViolation>, HarvestError> {
    match (builder, sys) {
        (Builder::Pear | Builder::Orange | Builder::Lemon | Builder::Date, SystemRef::Mono(s)) => {
            let recipe = match builder {
                Builder::Pear => Recipe::Pear,
                Builder::Orange => Recipe::Orange,
                Builder::Lemon => Recipe::Lemon,
                _ => Recipe::Date,
            };
            check_recipe(recipe, s, host)
        }
        (Builder::Cherry, SystemRef::Mono(s)) => check_cherry(s, Some(host)),
        (Builder::Type22, SystemRef::Mono(s)) => miller::check_type22(s, Some(host)),
        (Builder::Mango, SystemRef::Bi(s)) => check_mango(s, Some(host)),
        (Builder::Willow00, SystemRef::Mono(s)) => check_willow00(s, host),
        (Builder::Willow02, SystemRef::Mono(s)) => check_willow02(s, Some(host)),
        (Builder::Poplar, SystemRef::Bi(s)) => check_poplar(s, Some(host)),
        (b, _) => Err(HarvestError::WrongBuilderHost(b, "matching system kind")),
    }
}

/// A built system of either arity.
#[derive(Debug, Clone)]
pub enum SystemRef {
    Mono(LabeledSystem),
    Bi(BiLabeledSystem),
}

impl SystemRef {
    pub fn render(&self) -> String {
        match self {
            SystemRef::Mono(s) => s.render(),
            SystemRef::Bi(s) => s.render(),
        }
    }
}
