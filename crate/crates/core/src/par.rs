//! Sequential or rayon-backed execution of the data-parallel loops.

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Exec::Parallel;
        #[cfg(not(feature = "parallel"))]
        return Exec::Sequential;
    }
}

impl Exec {
    /// Every available strategy, sequential first.
    pub fn all() -> &'static [Exec] {
        &[
            Exec::Sequential,
            #[cfg(feature = "parallel")]
            Exec::Parallel,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
        }
    }

    /// The result for the smallest index in `range` where `f` returns
    /// something.
    pub fn find_first<R, F>(self, range: Range<u64>, f: F) -> Option<R>
    where
        R: Send,
        F: Fn(u64) -> Option<R> + Sync + Send,
    {
        match self {
            Exec::Sequential => range.into_iter().find_map(f),
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                range.into_par_iter().find_map_first(f)
            }
        }
    }
}
