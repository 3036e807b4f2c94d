use serde::Serialize;

use super::path::Path;
use crate::error::{Error, Result};
use crate::lattice::LatticeGraph;

/// Empirical distribution of the walk at one time; the cemetery is its own bin.
#[derive(Clone, Debug, Serialize)]
pub struct Marginal {
    pub t: f64,
    pub counts: Vec<u64>,
    pub cemetery: u64,
    pub paths: u64,
}

impl Marginal {
    pub fn mass(&self) -> f64 {
        self.counts.iter().sum::<u64>() as f64 / self.paths as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OccupationStats {
    /// Time spent at each vertex (by id) divided by total lifetime.
    pub occupation: Vec<f64>,
    pub total_time: f64,
    pub marginals: Vec<Marginal>,
}

/// Streaming accumulator for occupation times and marginals.
#[derive(Clone, Debug)]
pub struct OccupationAccumulator {
    time: Vec<f64>,
    total: f64,
    marginals: Vec<Marginal>,
}

impl OccupationAccumulator {
    pub fn new(graph: &LatticeGraph, times: &[f64]) -> Self {
        let n = graph.num_vertices();
        Self {
            time: vec![0.0; n],
            total: 0.0,
            marginals: times
                .iter()
                .map(|&t| Marginal { t, counts: vec![0; n], cemetery: 0, paths: 0 })
                .collect(),
        }
    }

    pub fn add(&mut self, graph: &LatticeGraph, path: &Path) {
        for (a, b, v) in path.segments_until(path.horizon) {
            let id = graph.id(v).expect("path leaves the domain") as usize;
            self.time[id] += b - a;
            self.total += b - a;
        }
        for m in &mut self.marginals {
            m.paths += 1;
            match path.at(m.t) {
                Some(v) => m.counts[graph.id(v).unwrap() as usize] += 1,
                None => m.cemetery += 1,
            }
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.time.iter_mut().zip(&other.time) {
            *a += b;
        }
        self.total += other.total;
        for (m, o) in self.marginals.iter_mut().zip(other.marginals) {
            for (a, b) in m.counts.iter_mut().zip(&o.counts) {
                *a += b;
            }
            m.cemetery += o.cemetery;
            m.paths += o.paths;
        }
        self
    }

    pub fn finish(self) -> OccupationStats {
        let total = self.total;
        OccupationStats {
            occupation: self.time.into_iter().map(|t| if total > 0.0 { t / total } else { 0.0 }).collect(),
            total_time: total,
            marginals: self.marginals,
        }
    }
}

/// Occupation fractions and marginals at the given times over a set of paths.
pub fn occupation_and_marginals(graph: &LatticeGraph, paths: &[Path], times: &[f64]) -> Result<OccupationStats> {
    if paths.is_empty() {
        return Err(Error::Empty("no paths".into()));
    }
    let mut acc = OccupationAccumulator::new(graph, times);
    for p in paths {
        acc.add(graph, p);
    }
    Ok(acc.finish())
}
