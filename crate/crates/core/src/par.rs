//! Batch sweeps over independent work items.
//!
//! With the `parallel` feature the default mode fans out over rayon's pool;
//! without it every sweep runs on the calling thread. Both modes return
//! results in input order, so audits are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Mode {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Mode::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Mode::Sequential
        }
    }
}

pub fn map_with<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        Mode::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Mode::Parallel => items.par_iter().map(f).collect(),
    }
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_with(Mode::default(), items, f)
}

/// `f(0), …, f(n−1)`.
pub fn map_range_with<R, F>(mode: Mode, n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    match mode {
        Mode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Mode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

pub fn map_range<R, F>(n: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    map_range_with(Mode::default(), n, f)
}

/// First index (in input order) where `f` fails, if any.
pub fn first_failure_with<T, F>(mode: Mode, items: &[T], f: F) -> Option<usize>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    match mode {
        Mode::Sequential => items.iter().position(|x| !f(x)),
        #[cfg(feature = "parallel")]
        Mode::Parallel => items.par_iter().position_first(|x| !f(x)),
    }
}

pub fn first_failure<T, F>(items: &[T], f: F) -> Option<usize>
where
    T: Sync,
    F: Fn(&T) -> bool + Sync + Send,
{
    first_failure_with(Mode::default(), items, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map_with(Mode::Sequential, &xs, |x| x * x);
        assert_eq!(map(&xs, |x| x * x), seq);
        assert_eq!(map_range(1000, |x| x * x), seq);
        assert_eq!(first_failure(&xs, |&x| x < 700), Some(700));
        assert_eq!(first_failure_with(Mode::Sequential, &xs, |&x| x < 700), Some(700));
        assert_eq!(first_failure(&xs, |_| true), None);
    }
}
