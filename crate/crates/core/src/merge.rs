//! Deterministic parallel scatter and merge.
//!
//! Sources are split into fixed-size chunks. Each chunk accumulates into its own
//! map, and the per-chunk results are merged in chunk order. The floating-point
//! summation order therefore does not depend on the number of worker threads.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::AddAssign;

use rayon::prelude::*;

const CHUNK: usize = 256;

/// Expands every source into `(key, value)` contributions and sums equal keys.
/// The result is sorted by key.
pub(crate) fn scatter_merge<S, K, V, F>(sources: &[S], expand: F) -> Vec<(K, V)>
where
    S: Sync,
    K: Ord + Hash + Clone + Send,
    V: AddAssign + Copy + Send,
    F: Fn(&S, &mut dyn FnMut(K, V)) + Sync,
{
    let partials: Vec<Vec<(K, V)>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: HashMap<K, V> = HashMap::new();
            for s in chunk {
                expand(s, &mut |k, v| {
                    acc.entry(k).and_modify(|e| *e += v).or_insert(v);
                });
            }
            let mut v: Vec<(K, V)> = acc.into_iter().collect();
            v.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            v
        })
        .collect();
    let mut all: Vec<(K, V)> = partials.into_iter().flatten().collect();
    // stable: equal keys stay in chunk order
    all.par_sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Vec<(K, V)> = Vec::with_capacity(all.len());
    for (k, v) in all {
        match out.last_mut() {
            Some((lk, lv)) if *lk == k => *lv += v,
            _ => out.push((k, v)),
        }
    }
    out
}
