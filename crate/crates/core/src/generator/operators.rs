use serde::Serialize;

use super::functions::{TestFunction, VertexFunction};
use crate::error::{Error, Result};
use crate::lattice::{GraphKind, LatticeGraph, LatticeParams, Vertex};
use crate::measures::{DomainFunction, JumpKernel, KernelVariant, MeasureTable};

/// `𝓛̃_k f(x) = 4^k Σ_y (f(y) - f(x)) j(x, y)` at one vertex.
pub fn generator_at(kernel: &JumpKernel, f: &dyn VertexFunction, x: Vertex) -> f64 {
    let p = &kernel.graph.params;
    let fx = f.at(x, p);
    let den = kernel.denom(x) as f64;
    let sum: f64 = match x {
        Vertex::Star => kernel
            .graph
            .star()
            .neighbors()
            .iter()
            .map(|&y| (f.at(y, p) - fx) * kernel.weight(x, y) as f64)
            .sum(),
        _ => kernel.graph.local(x, kernel.kind()).as_slice().iter().map(|&y| f.at(y, p) - fx).sum(),
    };
    kernel.lambda() * sum / den
}

/// `Γf(x) = 4^k Σ_y (f(y) - f(x))² j(x, y)`, the density of the predictable quadratic variation.
pub fn carre_du_champ(kernel: &JumpKernel, f: &dyn VertexFunction, x: Vertex) -> f64 {
    let p = &kernel.graph.params;
    let fx = f.at(x, p);
    let den = kernel.denom(x) as f64;
    let sum: f64 = kernel
        .graph
        .neighbors(x, kernel.kind())
        .iter()
        .map(|&y| (f.at(y, p) - fx).powi(2) * kernel.weight(x, y) as f64)
        .sum();
    kernel.lambda() * sum / den
}

/// `𝓛̃_k f` at every vertex of `E_0^k`, by id.
pub fn discrete_generator(kernel: &JumpKernel, f: &dyn VertexFunction) -> Vec<f64> {
    kernel.graph.vertices().map(|x| generator_at(kernel, f, x)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorRow {
    pub f_name: String,
    pub k: u32,
    pub sup_error: f64,
    /// Where the sup error is attained.
    pub argmax: String,
    pub max_abs_generator: f64,
    /// `m̄_k(E_0^k ∖ S_0^k)`
    pub nonregular_mass: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReport {
    pub f_name: String,
    pub k0: u32,
    pub regular_points: usize,
    pub rows: Vec<GeneratorRow>,
    /// Least-squares slope of `log2(sup_error)` against `k`.
    pub slope: f64,
    /// `max_k 2^k sup_error`
    pub rate_constant: f64,
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// `m̄_k(E_0^k ∖ S_0^k)`: Star, ring vertices with a missing neighbor, the
/// plane boundary and the rod end.
pub fn nonregular_mass(graph: &LatticeGraph) -> f64 {
    let mt = MeasureTable::new(graph);
    let mut q: u64 = mt.quanta(Vertex::Star, GraphKind::Domain);
    for &v in graph.star().ring() {
        if graph.degree(v, GraphKind::Domain) < 4 {
            q += mt.quanta(v, GraphKind::Domain);
        }
    }
    for v in graph.boundary_plane_vertices() {
        if !graph.is_star_adjacent(v) {
            q += mt.quanta(v, GraphKind::Domain);
        }
    }
    q += mt.quanta(Vertex::Rod { n: graph.rod_max() }, GraphKind::Domain);
    q as f64 * mt.quantum()
}

/// Vertices of `E_0^k` where `𝓛̃_k f` may be nonzero: Star plus every vertex
/// within one mesh step of the support.
fn support_vertices(graph: &LatticeGraph, f: &TestFunction) -> Vec<Vertex> {
    let h = graph.params.h();
    let (pr, rl) = f.support().unwrap();
    let m = (pr / h).ceil() as i32 + 2;
    let nmax = ((rl / h).ceil() as u32 + 2).min(graph.rod_max());
    std::iter::once(Vertex::Star)
        .chain(graph.plane_vertices_within(m))
        .chain((1..=nmax).map(|n| Vertex::Rod { n }))
        .collect()
}

/// Sup-norm error of `𝓛̃_k f - 𝓛f` over the fixed set `S_0^{k0}`, for each `k`.
pub fn convergence_report(f: &TestFunction, params: &LatticeParams, ks: &[u32], k0: u32) -> Result<GeneratorReport> {
    let base = LatticeGraph::build(&params.with_k(k0)?)?;
    let h0 = base.params.h();
    // regular points of the coarse lattice near the support, in physical units
    let regular: Vec<Vertex> = support_vertices(&base, f)
        .into_iter()
        .filter(|&v| v != Vertex::Star && base.flags(v).regular)
        .collect();
    if regular.is_empty() {
        return Err(Error::Empty(format!("no regular vertices at k0 = {k0}")));
    }
    let mut rows = Vec::new();
    for &k in ks {
        if k < k0 {
            return Err(Error::Usage(format!("k = {k} below k0 = {k0}")));
        }
        let g = LatticeGraph::build(&params.with_k(k)?)?;
        let kern = JumpKernel::new(&g, KernelVariant::Reflected);
        let s = 1u32 << (k - k0);
        let (mut sup, mut arg) = (0.0f64, String::new());
        for &v in &regular {
            let fine = match v {
                Vertex::Plane { i, j } => Vertex::Plane { i: i * s as i32, j: j * s as i32 },
                Vertex::Rod { n } => Vertex::Rod { n: n * s },
                Vertex::Star => Vertex::Star,
            };
            let e = (generator_at(&kern, f, fine) - f.continuum_generator(v.point(h0))).abs();
            if e > sup {
                sup = e;
                arg = v.to_string();
            }
        }
        let max_abs = support_vertices(&g, f)
            .into_iter()
            .map(|x| generator_at(&kern, f, x).abs())
            .fold(0.0, f64::max);
        rows.push(GeneratorRow {
            f_name: f.name.to_string(),
            k,
            sup_error: sup,
            argmax: arg,
            max_abs_generator: max_abs,
            nonregular_mass: nonregular_mass(&g),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.k as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sup_error.log2()).collect();
    Ok(GeneratorReport {
        f_name: f.name.to_string(),
        k0,
        regular_points: regular.len(),
        slope: fit_slope(&xs, &ys),
        rate_constant: rows.iter().map(|r| r.sup_error * (r.k as f64).exp2()).fold(0.0, f64::max),
        rows,
    })
}

/// `|Σ 𝓛̃f g m̄ - Σ f 𝓛̃g m̄|` and the magnitude of the first sum.
pub fn self_adjointness_gap(kernel: &JumpKernel, f: &dyn VertexFunction, g: &dyn VertexFunction) -> (f64, f64) {
    let mt = MeasureTable::new(kernel.graph);
    let p = &kernel.graph.params;
    let (mut a, mut b) = (0.0, 0.0);
    for x in kernel.graph.vertices() {
        let m = mt.quanta(x, kernel.kind()) as f64;
        a += generator_at(kernel, f, x) * g.at(x, p) * m;
        b += f.at(x, p) * generator_at(kernel, g, x) * m;
    }
    let q = mt.quantum();
    ((a - b).abs() * q, a.abs() * q)
}
