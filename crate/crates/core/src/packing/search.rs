//! Max–min subset selection: farthest-point heuristic and exhaustive search.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::family::DistanceMatrix;
use crate::error::{invalid, Error, Result};
use crate::par::argmax;
use crate::rng::substream;

/// Largest candidate set the exhaustive search accepts.
pub const BRUTEFORCE_LIMIT: usize = 24;

/// Chosen candidate indices and their minimum pairwise distance
/// (`None` when fewer than two points are chosen).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub min_distance: Option<f64>,
}

/// Farthest-point traversal. The walk starts from the point farthest from a
/// seeded random candidate, so `K = 2` returns a diametral pair.
pub fn greedy_maxmin(dm: &DistanceMatrix, k: usize, seed: u64) -> Result<Selection> {
    let n = dm.len();
    if k == 0 || k > n {
        return Err(invalid(format!("cannot choose {k} of {n} candidates")));
    }
    let start = substream(seed, 0).random_range(0..n);
    let row: Vec<f64> = (0..n).map(|j| dm.get(start, j)).collect();
    let first = if k == 1 { start } else { argmax(&row).unwrap_or(start) };
    let mut chosen = vec![first];
    let mut gap: Vec<f64> = (0..n).map(|j| dm.get(first, j)).collect();
    gap[first] = f64::NEG_INFINITY;
    while chosen.len() < k {
        let next = argmax(&gap).expect("candidates remain");
        chosen.push(next);
        for (j, g) in gap.iter_mut().enumerate() {
            if *g != f64::NEG_INFINITY {
                *g = g.min(dm.get(next, j));
            }
        }
        gap[next] = f64::NEG_INFINITY;
    }
    let min_distance = dm.min_over(&chosen);
    Ok(Selection { indices: chosen, min_distance })
}

/// Exact `max` over `K`-subsets of the minimum pairwise distance, by
/// branch and bound seeded with the greedy value.
pub fn bruteforce_frontier(dm: &DistanceMatrix, k: usize) -> Result<Selection> {
    let n = dm.len();
    if n > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge(format!("{n} candidates exceed the limit of {BRUTEFORCE_LIMIT}")));
    }
    if k > n {
        return Err(invalid(format!("cannot choose {k} of {n} candidates")));
    }
    if k < 2 {
        return Err(Error::NoPair(k));
    }
    let seed = greedy_maxmin(dm, k, 0)?;
    let mut best = Search {
        dm,
        k,
        best_value: seed.min_distance.unwrap_or(f64::NEG_INFINITY),
        best: seed.indices,
        current: Vec::with_capacity(k),
    };
    best.descend(0, f64::INFINITY);
    let mut indices = best.best;
    indices.sort_unstable();
    let min_distance = dm.min_over(&indices);
    Ok(Selection { indices, min_distance })
}

struct Search<'a> {
    dm: &'a DistanceMatrix,
    k: usize,
    best_value: f64,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl Search<'_> {
    fn descend(&mut self, from: usize, current_min: f64) {
        if self.current.len() == self.k {
            if current_min > self.best_value {
                self.best_value = current_min;
                self.best = self.current.clone();
            }
            return;
        }
        let need = self.k - self.current.len();
        let n = self.dm.len();
        for j in from..=n - need {
            let mut m = current_min;
            for &i in &self.current {
                m = m.min(self.dm.get(i, j));
                if m <= self.best_value {
                    break;
                }
            }
            if m <= self.best_value {
                continue;
            }
            self.current.push(j);
            self.descend(j + 1, m);
            self.current.pop();
        }
    }
}
