//! Data-parallel helpers. With the `parallel` feature (default) these
//! fan out over rayon's global pool; without it they run sequentially
//! with identical results, so callers never branch on the feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// First item (in input order) on which `f` returns Some.
#[cfg(feature = "parallel")]
pub fn find_map_first<T, U, F>(items: Vec<T>, f: F) -> Option<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Option<U> + Sync + Send,
{
    items.into_par_iter().find_map_first(f)
}

#[cfg(not(feature = "parallel"))]
pub fn find_map_first<T, U, F>(items: Vec<T>, f: F) -> Option<U>
where
    F: Fn(T) -> Option<U>,
{
    items.into_iter().find_map(f)
}
