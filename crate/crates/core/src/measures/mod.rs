//! Reference measures `m_k`, `m̄_k`, `m_{0,k}` and the jump kernels.
//!
//! Measures are kept exactly as integer multiples of the quantum
//! `2^-2k / 4`: a plane vertex weighs `v`, a rod vertex `2^(k+1) v`, and the
//! darning vertex `2^(k+1) + v - 1`.

mod kernel;
mod weak;

use std::io::Write;

pub use kernel::{detailed_balance_violation, BalanceReport, JumpKernel, KernelVariant};
pub use weak::{integrate_domain, weak_convergence_error, DomainFunction, WeakConvergenceRow};

use crate::error::Result;
use crate::lattice::{GraphKind, LatticeGraph, Rational, StarStructure, Vertex};

/// Measure quanta of a vertex with degree `deg` at scale `k`.
#[inline]
pub fn quanta(k: u32, v: Vertex, deg: usize) -> u64 {
    let d = deg as u64;
    match v {
        Vertex::Plane { .. } => d,
        Vertex::Rod { .. } => d << (k + 1),
        Vertex::Star => (1u64 << (k + 1)) + d - 1,
    }
}

/// `m_k(a*)` from the Star neighborhood alone.
pub fn star_measure(star: &StarStructure) -> Rational {
    let k = star.params.k;
    Rational::new(quanta(k, Vertex::Star, star.degree()) as i64, 4i64 << (2 * k))
}

/// Per-vertex values of `m_k`, `m̄_k` and `m_{0,k}`, evaluated on demand.
#[derive(Clone, Copy, Debug)]
pub struct MeasureTable<'g> {
    graph: &'g LatticeGraph,
}

impl<'g> MeasureTable<'g> {
    pub fn new(graph: &'g LatticeGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &'g LatticeGraph {
        self.graph
    }

    fn k(&self) -> u32 {
        self.graph.params.k
    }

    #[inline]
    pub fn quanta(&self, v: Vertex, kind: GraphKind) -> u64 {
        quanta(self.k(), v, self.graph.degree(v, kind))
    }

    /// Size of one quantum, `2^-2k / 4`.
    pub fn quantum(&self) -> f64 {
        self.graph.params.h().powi(2) / 4.0
    }

    /// `m_k(v)`.
    pub fn m(&self, v: Vertex) -> f64 {
        self.quanta(v, GraphKind::Full) as f64 * self.quantum()
    }

    /// `m̄_k(v)`.
    pub fn m_bar(&self, v: Vertex) -> f64 {
        self.quanta(v, GraphKind::Domain) as f64 * self.quantum()
    }

    /// `m_{0,k}(v) = 4^k m_k(v)` for the given graph.
    pub fn m0(&self, v: Vertex, kind: GraphKind) -> f64 {
        self.quanta(v, kind) as f64 / 4.0
    }

    pub fn exact(&self, v: Vertex, kind: GraphKind) -> Rational {
        Rational::new(self.quanta(v, kind) as i64, 4i64 << (2 * self.k()))
    }

    /// `m̄_k(E_0^k)` in quanta.
    pub fn total_bar_quanta(&self) -> u128 {
        self.graph.vertices().map(|v| self.quanta(v, GraphKind::Domain) as u128).sum()
    }

    pub fn total_bar(&self) -> f64 {
        self.total_bar_quanta() as f64 * self.quantum()
    }

    /// CSV dump: `id,vertex,m,m_bar,m0_bar`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "id,vertex,m,m_bar,m0_bar")?;
        for (id, v) in self.graph.vertices().enumerate() {
            writeln!(
                out,
                "{id},{v},{},{},{}",
                self.m(v),
                self.m_bar(v),
                self.m0(v, GraphKind::Domain)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    #[test]
    fn case_formulas() {
        let g = LatticeGraph::build(&LatticeParams::standard(3).unwrap()).unwrap();
        let mt = MeasureTable::new(&g);
        let far = Vertex::Plane { i: 40, j: 3 };
        assert_eq!(g.degree(far, GraphKind::Full), 4);
        assert_eq!(mt.m(far), 2f64.powi(-6));
        let rod = Vertex::Rod { n: 10 };
        assert_eq!(mt.m0(rod, GraphKind::Full), 8.0);
        let v = g.star().degree() as i64;
        assert_eq!(mt.exact(Vertex::Star, GraphKind::Full), Rational::new(1, 16) + Rational::new(v - 1, 256));
        assert_eq!(star_measure(g.star()), mt.exact(Vertex::Star, GraphKind::Full));
    }

    #[test]
    fn measures_positive_and_star_decreasing() {
        let mut prev = None;
        for k in 3..=8 {
            let s = StarStructure::new(&LatticeParams::standard(k).unwrap()).unwrap();
            let m = star_measure(&s);
            let bound = Rational::new(1, 2 << k) + Rational::new(56 * (1 << k) + 27, 4 << (2 * k));
            assert!(m <= bound);
            if let Some(p) = prev {
                assert!(m < p);
            }
            prev = Some(m);
        }
        let g = LatticeGraph::build(&LatticeParams::standard(3).unwrap()).unwrap();
        let mt = MeasureTable::new(&g);
        assert!(g.vertices().all(|v| mt.m_bar(v) > 0.0 && mt.m(v) > 0.0));
    }

    #[test]
    fn boundary_vertices_lose_mass() {
        let g = LatticeGraph::build(&LatticeParams::standard(3).unwrap()).unwrap();
        let mt = MeasureTable::new(&g);
        let last = Vertex::Rod { n: g.rod_max() };
        assert!(mt.m_bar(last) < mt.m(last));
    }
}
