use std::fmt;

use thiserror::Error;

use crate::term::CastCount;

use super::pattern::Pattern;

/// The three roles a cast lemma can play during normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Class {
    /// Removes casts across an operation or relation; used left to right.
    Elim,
    /// Moves a root cast towards the leaves; normalization uses it right to left.
    Move,
    /// Reduces the number of casts at the root; used left to right.
    Squash,
}

impl Class {
    pub const ALL: [Class; 3] = [Class::Elim, Class::Move, Class::Squash];

    pub fn name(self) -> &'static str {
        match self {
            Class::Elim => "elim",
            Class::Move => "move",
            Class::Squash => "squash",
        }
    }

    pub fn from_name(s: &str) -> Option<Class> {
        Class::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("not an elim, move or squash lemma (lhs {lhs}; rhs {rhs})")]
pub struct ClassifyError {
    pub lhs: CastCount,
    pub rhs: CastCount,
}

/// Evaluates each class predicate on the cast counts of a lemma.
pub fn class_predicates(lhs: CastCount, rhs: CastCount) -> [(Class, bool); 3] {
    let elim = lhs.head == 0 && lhs.internal >= 1;
    let mv = lhs.head == 1 && lhs.internal == 0 && rhs.head == 0 && rhs.internal >= 1;
    let squash = lhs.head >= 1 && lhs.internal == 0 && rhs.internal == 0 && lhs.head > rhs.head;
    [(Class::Elim, elim), (Class::Move, mv), (Class::Squash, squash)]
}

pub fn classify_counts(lhs: CastCount, rhs: CastCount) -> Result<Class, ClassifyError> {
    class_predicates(lhs, rhs)
        .into_iter()
        .find_map(|(c, holds)| holds.then_some(c))
        .ok_or(ClassifyError { lhs, rhs })
}

/// Assigns a class to the lemma `lhs = rhs` from the number and position of
/// its casts.
pub fn classify(lhs: &Pattern, rhs: &Pattern) -> Result<Class, ClassifyError> {
    classify_counts(lhs.count_casts(), rhs.count_casts())
}
