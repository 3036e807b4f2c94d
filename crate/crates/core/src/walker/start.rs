use super::rng::RngStream;
use crate::lattice::{GraphKind, LatticeGraph, Vertex, VertexId};
use crate::measures::MeasureTable;

/// Exact sampler for the normalized `m̄_k`, optionally restricted to
/// vertices off the discrete boundary.
///
/// Vertices are grouped into Star, plane columns (by `i`) and the rod, in id
/// order, so that [`StartDistribution::coupled`] can pick a group and then a
/// position inside it.
#[derive(Clone, Debug)]
pub struct StartDistribution {
    ids: Vec<VertexId>,
    cumulative: Vec<u64>,
    /// Index into `ids` where each group ends.
    group_ends: Vec<usize>,
}

fn group_key(v: Vertex) -> i64 {
    match v {
        Vertex::Star => i64::MIN,
        Vertex::Plane { i, .. } => i as i64,
        Vertex::Rod { .. } => i64::MAX,
    }
}

impl StartDistribution {
    fn build(graph: &LatticeGraph, keep: impl Fn(Vertex) -> bool) -> Self {
        let mt = MeasureTable::new(graph);
        let mut ids = Vec::new();
        let mut cumulative = Vec::new();
        let mut group_ends = Vec::new();
        let mut acc = 0u64;
        let mut key = None;
        for (id, v) in graph.vertices().enumerate() {
            if keep(v) {
                if key.is_some_and(|k| k != group_key(v)) {
                    group_ends.push(ids.len());
                }
                key = Some(group_key(v));
                acc += mt.quanta(v, GraphKind::Domain);
                ids.push(id as VertexId);
                cumulative.push(acc);
            }
        }
        group_ends.push(ids.len());
        Self { ids, cumulative, group_ends }
    }

    /// `m̄_k / m̄_k(E_0^k)`.
    pub fn m_bar(graph: &LatticeGraph) -> Self {
        Self::build(graph, |_| true)
    }

    /// `m̄_k` restricted to `E_0^k ∖ ∂E_0^k`, normalized.
    pub fn m_bar_interior(graph: &LatticeGraph) -> Self {
        Self::build(graph, |v| !graph.is_boundary(v))
    }

    /// Total mass in quanta.
    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn sample(&self, graph: &LatticeGraph, rng: &mut RngStream) -> Vertex {
        let r = rng.below(self.total());
        self.at_rank(graph, r)
    }

    /// Inverse-CDF sample driven by two uniforms: `u[0]` picks the group
    /// (column), `u[1]` the position inside it. Feeding the same pair to
    /// distributions at different scales yields nearby starting points,
    /// while each marginal is still exactly `m̄_k`.
    pub fn coupled(&self, graph: &LatticeGraph, u: [f64; 2]) -> Vertex {
        let total = self.total();
        let r = ((u[0].clamp(0.0, 1.0) * total as f64) as u64).min(total - 1);
        let i = self.cumulative.partition_point(|&c| c <= r);
        let g = self.group_ends.partition_point(|&e| e <= i);
        let lo_idx = if g == 0 { 0 } else { self.group_ends[g - 1] };
        let lo = if lo_idx == 0 { 0 } else { self.cumulative[lo_idx - 1] };
        let hi = self.cumulative[self.group_ends[g] - 1];
        let r = lo + ((u[1].clamp(0.0, 1.0) * (hi - lo) as f64) as u64).min(hi - lo - 1);
        self.at_rank(graph, r)
    }

    fn at_rank(&self, graph: &LatticeGraph, r: u64) -> Vertex {
        let i = self.cumulative.partition_point(|&c| c <= r);
        graph.vertex(self.ids[i])
    }

    /// Probability of the vertex with id `id`.
    pub fn prob(&self, id: VertexId) -> f64 {
        match self.ids.binary_search(&id) {
            Ok(i) => {
                let lo = if i == 0 { 0 } else { self.cumulative[i - 1] };
                (self.cumulative[i] - lo) as f64 / self.total() as f64
            }
            Err(_) => 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    #[test]
    fn sampling_frequencies() {
        let g = LatticeGraph::build(&LatticeParams::standard(3).unwrap()).unwrap();
        let d = StartDistribution::m_bar(&g);
        let mut rng = RngStream::new(2, 0);
        let n = 200_000;
        let mut star = 0;
        let mut rod = 0;
        for _ in 0..n {
            match d.sample(&g, &mut rng) {
                Vertex::Star => star += 1,
                Vertex::Rod { .. } => rod += 1,
                _ => {}
            }
        }
        let ps = d.prob(0);
        let pr: f64 = (1..=g.rod_max()).map(|n| d.prob(g.id(Vertex::Rod { n }).unwrap())).sum();
        let tol = |p: f64| 4.0 * (p * (1.0 - p) / n as f64).sqrt();
        assert!((star as f64 / n as f64 - ps).abs() < tol(ps));
        assert!((rod as f64 / n as f64 - pr).abs() < tol(pr));
        let interior = StartDistribution::m_bar_interior(&g);
        let b = g.id(Vertex::Rod { n: g.rod_max() }).unwrap();
        assert_eq!(interior.prob(b), 0.0);
        assert!(d.prob(b) > 0.0);
    }

    #[test]
    fn coupled_sampling_is_exact_and_local() {
        let p = LatticeParams::new(3, crate::Rational::new(5, 8), 11.into(), 11.into()).unwrap();
        let g3 = LatticeGraph::build(&p).unwrap();
        let g4 = LatticeGraph::build(&p.with_k(4).unwrap()).unwrap();
        let (d3, d4) = (StartDistribution::m_bar(&g3), StartDistribution::m_bar(&g4));
        // a fine grid of (u0, u1) reproduces the probabilities up to the grid step
        let m = 2000;
        let mut counts = vec![0u32; g3.num_vertices()];
        for a in 0..m {
            for b in 0..m {
                let u = [(a as f64 + 0.5) / m as f64, (b as f64 + 0.5) / m as f64];
                counts[g3.id(d3.coupled(&g3, u)).unwrap() as usize] += 1;
            }
        }
        let star = counts[0] as f64 / (m * m) as f64;
        assert!((star - d3.prob(0)).abs() < 2e-3, "{star} {}", d3.prob(0));
        let mut rng = RngStream::new(5, 0);
        // group masses differ by O(h) across scales, so a few pairs land in different groups
        let mut far = 0;
        for _ in 0..5000 {
            let u = [rng.uniform(), rng.uniform()];
            let (x, y) = (d3.coupled(&g3, u), d4.coupled(&g4, u));
            let d = crate::lattice::geodesic_rho(x.point(g3.params.h()), y.point(g4.params.h()), 0.625).unwrap();
            if d > 0.25 {
                far += 1;
            }
        }
        assert!(far < 50, "{far}");
    }
}
