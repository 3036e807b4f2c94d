use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{LatticeGraph, Vertex};

/// First arrival at the discrete boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Absorption {
    pub time: f64,
    /// The boundary vertex that was reached.
    pub site: Vertex,
}

/// Right-continuous piecewise-constant trajectory on `[0, horizon]`.
///
/// The position on `[times[l], times[l+1])` is `states[l]`; `times[0] = 0`.
/// A killed path sits in the cemetery from `absorption.time` on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Path {
    pub k: u32,
    pub horizon: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vertex>,
    pub absorption: Option<Absorption>,
    /// Times at which a resurrected walk was restarted.
    pub resurrections: Vec<f64>,
}

impl Path {
    pub fn constant(k: u32, v: Vertex, horizon: f64) -> Self {
        Self { k, horizon, times: vec![0.0], states: vec![v], absorption: None, resurrections: Vec::new() }
    }

    pub fn num_jumps(&self) -> usize {
        self.states.len() - 1
    }

    /// End of the life of the path within the horizon.
    pub fn lifetime(&self) -> f64 {
        self.absorption.map_or(self.horizon, |a| a.time.min(self.horizon))
    }

    pub fn is_absorbed_by(&self, t: f64) -> bool {
        self.absorption.is_some_and(|a| a.time <= t)
    }

    /// Position at time `t`, or `None` in the cemetery.
    pub fn at(&self, t: f64) -> Option<Vertex> {
        if self.is_absorbed_by(t) {
            return None;
        }
        let l = self.times.partition_point(|&s| s <= t);
        Some(self.states[l.max(1) - 1])
    }

    /// Number of jumps in `[0, t]`.
    pub fn jumps_by(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    /// `(start, end, vertex)` holding intervals clipped to `[0, min(t, lifetime)]`.
    pub fn segments_until(&self, t: f64) -> impl Iterator<Item = (f64, f64, Vertex)> + '_ {
        let end = t.min(self.lifetime());
        self.states.iter().enumerate().filter_map(move |(l, &v)| {
            let a = self.times[l];
            let b = self.times.get(l + 1).copied().unwrap_or(f64::INFINITY).min(end);
            (a < b).then_some((a, b, v))
        })
    }

    /// Checks the structural invariants against the generating graph.
    pub fn validate(&self, graph: &LatticeGraph, kind: crate::lattice::GraphKind) -> Result<()> {
        if self.times.len() != self.states.len() || self.times.first() != Some(&0.0) {
            return Err(Error::Path("times and states misaligned".into()));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Path("jump times not increasing".into()));
        }
        for w in self.states.windows(2) {
            if !graph.neighbors(w[0], kind).contains(&w[1]) {
                return Err(Error::Path(format!("non-adjacent jump {} -> {}", w[0], w[1])));
            }
        }
        if let Some(a) = self.absorption {
            let last = *self.states.last().unwrap();
            if a.time < *self.times.last().unwrap() {
                return Err(Error::Path("jump after absorption".into()));
            }
            if a.time > 0.0 && !graph.neighbors(last, kind).contains(&a.site) {
                return Err(Error::Path("absorption site not adjacent".into()));
            }
        }
        Ok(())
    }

    /// CSV rows `t,vertex_id`, one per holding interval.
    pub fn write_csv(&self, graph: &LatticeGraph, out: &mut impl std::io::Write) -> Result<()> {
        writeln!(out, "t,vertex_id")?;
        for (t, v) in self.times.iter().zip(&self.states) {
            let id = graph.id(*v).map(|i| i as i64).unwrap_or(-1);
            writeln!(out, "{t},{id}")?;
        }
        if let Some(a) = self.absorption {
            writeln!(out, "{},cemetery", a.time)?;
        }
        Ok(())
    }
}

/// Time reversal from `t`: `r_t(w)(s) = w((t - s)-)` on `[0, t]`, `w(0)` after.
///
/// Only jumps strictly before `t` matter. The result has horizon `t`.
pub fn time_reverse(path: &Path, t: f64) -> Result<Path> {
    if t > path.horizon || t < 0.0 {
        return Err(Error::Path(format!("reversal time {t} outside [0, {}]", path.horizon)));
    }
    if path.is_absorbed_by(t) {
        return Err(Error::Path("path absorbed before the reversal time".into()));
    }
    let m = path.times.partition_point(|&s| s < t);
    let mut times = Vec::with_capacity(m);
    let mut states = Vec::with_capacity(m);
    times.push(0.0);
    states.push(path.states[m - 1]);
    for l in (1..m).rev() {
        times.push(t - path.times[l]);
        states.push(path.states[l - 1]);
    }
    Ok(Path { k: path.k, horizon: t, times, states, absorption: None, resurrections: Vec::new() })
}
