//! Ordered data-parallel mapping with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] runs on the rayon pool;
//! without it every mode runs sequentially. Output order always matches input order,
//! so results are identical across modes.

/// Execution mode for independent work items.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Maps `f` over `0..count`, preserving index order.
pub fn map_indices<R, F>(count: usize, exec: Exec, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..count).into_par_iter().map(f).collect()
        }
        _ => (0..count).map(f).collect(),
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_slice<T, R, F>(items: &[T], exec: Exec, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_indices(items.len(), exec, |k| f(&items[k]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let seq = map_indices(1000, Exec::Sequential, |k| k * k);
        let par = map_indices(1000, Exec::Parallel, |k| k * k);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
        assert_eq!(map_slice(&[3, 1, 2], Exec::Parallel, |v| v + 1), vec![4, 2, 3]);
    }
}
