//! Type grids and reports.

use alloc::vec::Vec;

use crate::rational::{ratio, Rational};

/// Index of a type value. For grid domains, level `l` is the value `l/m`;
/// for the resource domain it is the demand itself.
pub type Level = u32;

/// A report or true type; `None` is the non-participation symbol ⊥.
pub type Report = Option<Level>;

/// One entry per agent.
pub type Profile = Vec<Report>;

/// The grid `{0, 1/m, ..., 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TypeGrid {
    m: u32,
}

impl TypeGrid {
    pub fn new(m: u32) -> Option<Self> {
        (m >= 1).then_some(Self { m })
    }

    pub fn resolution(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn levels(&self) -> impl Iterator<Item = Level> + Clone {
        0..=self.m
    }

    pub fn value(&self, level: Level) -> Rational {
        ratio(level as i64, self.m as i64)
    }

    pub fn values(&self) -> Vec<Rational> {
        self.levels().map(|l| self.value(l)).collect()
    }

    pub fn contains(&self, report: Report) -> bool {
        matches!(report, Some(l) if l <= self.m)
    }
}
