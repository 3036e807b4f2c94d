use serde::Serialize;

use super::MeasureTable;
use crate::error::{Error, Result};
use crate::lattice::{GraphKind, LatticeGraph, LatticeParams, Point, Vertex};

/// A bounded function on `E`.
pub trait DomainFunction: Sync {
    fn eval(&self, x: Point) -> f64;

    /// `(plane radius, rod length)` outside of which the function vanishes.
    /// `None` means no known support bound.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

impl<F: Fn(Point) -> f64 + Sync> DomainFunction for F {
    fn eval(&self, x: Point) -> f64 {
        self(x)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakConvergenceRow {
    pub k: u32,
    pub lattice_sum: f64,
    pub integral: f64,
    pub error: f64,
}

const MAX_CELLS: usize = 1 << 24;

fn plane_midpoint(f: &dyn DomainFunction, eps: f64, r1: f64, nr: usize, nt: usize) -> f64 {
    let dr = (r1 - eps) / nr as f64;
    let dt = std::f64::consts::TAU / nt as f64;
    let trig: Vec<(f64, f64)> = (0..nt).map(|b| ((b as f64 + 0.5) * dt).sin_cos()).collect();
    let mut total = 0.0;
    for a in 0..nr {
        let r = eps + (a as f64 + 0.5) * dr;
        let ring: f64 = trig.iter().map(|&(s, c)| f.eval(Point::Plane(r * c, r * s))).sum();
        total += ring * r;
    }
    total * dr * dt
}

fn rod_midpoint(f: &dyn DomainFunction, l: f64, n: usize) -> f64 {
    let ds = l / n as f64;
    (0..n).map(|a| f.eval(Point::Rod((a as f64 + 0.5) * ds))).sum::<f64>() * ds
}

/// `∫_{E_0} f dm` for Lebesgue measure on the annulus plus the rod, by a
/// midpoint rule refined until successive estimates agree to `tol` (relative
/// to `max(1, |I|)`). Starts at `2^14` plane cells.
pub fn integrate_domain(f: &dyn DomainFunction, params: &LatticeParams, tol: f64) -> Result<f64> {
    let eps = params.eps_f64();
    let (mut r1, mut l) = (params.radius_f64(), params.rod_length_f64());
    if let Some((pr, rl)) = f.support() {
        r1 = r1.min(pr.max(eps));
        l = l.min(rl.max(0.0));
    }
    let (mut nr, mut nt) = (256usize, 64usize);
    let mut cur = plane_midpoint(f, eps, r1, nr, nt);
    loop {
        if !cur.is_finite() {
            return Err(Error::Quadrature("non-finite plane integrand".into()));
        }
        let fr = plane_midpoint(f, eps, r1, 2 * nr, nt);
        let ft = plane_midpoint(f, eps, r1, nr, 2 * nt);
        let (er, et) = ((fr - cur).abs(), (ft - cur).abs());
        let scale = cur.abs().max(1.0);
        if er < tol * scale && et < tol * scale {
            cur = fr;
            break;
        }
        if er >= et {
            nr *= 2;
            cur = fr;
        } else {
            nt *= 2;
            cur = ft;
        }
        if nr * nt > MAX_CELLS {
            return Err(Error::Quadrature(format!("plane integral not converged at {nr}x{nt} cells")));
        }
    }
    let mut n = 4096usize;
    let mut rod = rod_midpoint(f, l, n);
    loop {
        let next = rod_midpoint(f, l, 2 * n);
        if !next.is_finite() {
            return Err(Error::Quadrature("non-finite rod integrand".into()));
        }
        let done = (next - rod).abs() < tol * next.abs().max(1.0);
        rod = next;
        n *= 2;
        if done {
            break;
        }
        if n > MAX_CELLS {
            return Err(Error::Quadrature(format!("rod integral not converged at {n} cells")));
        }
    }
    Ok(cur + rod)
}

/// `Σ_x f(x) m̄_k(x)` over `E_0^k`, restricted to the support when known.
pub fn lattice_sum(f: &dyn DomainFunction, graph: &LatticeGraph) -> f64 {
    let mt = MeasureTable::new(graph);
    let h = graph.params.h();
    let term = |v: Vertex| f.eval(v.point(h)) * mt.quanta(v, GraphKind::Domain) as f64;
    let (plane, rod): (f64, f64) = match f.support() {
        Some((pr, rl)) => {
            let m = (pr / h).ceil() as i32 + 1;
            let nmax = ((rl / h).ceil() as u32 + 1).min(graph.rod_max());
            (
                graph.plane_vertices_within(m).map(term).sum(),
                (1..=nmax).map(|n| term(Vertex::Rod { n })).sum(),
            )
        }
        None => (
            graph.plane_vertices_within(i32::MAX).map(term).sum(),
            (1..=graph.rod_max()).map(|n| term(Vertex::Rod { n })).sum(),
        ),
    };
    (plane + rod + term(Vertex::Star)) * mt.quantum()
}

/// `|Σ_x f(x) m̄_k(x) - ∫_{E_0} f dm|` for each `k`.
pub fn weak_convergence_error(
    f: &dyn DomainFunction,
    params: &LatticeParams,
    ks: &[u32],
) -> Result<Vec<WeakConvergenceRow>> {
    let integral = integrate_domain(f, params, 1e-9)?;
    ks.iter()
        .map(|&k| {
            let g = LatticeGraph::build(&params.with_k(k)?)?;
            let s = lattice_sum(f, &g);
            Ok(WeakConvergenceRow { k, lattice_sum: s, integral, error: (s - integral).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_one() {
        let p = LatticeParams::standard(3).unwrap();
        let one = |_: Point| 1.0;
        let i = integrate_domain(&one, &p, 1e-10).unwrap();
        assert!((i - (PI * 400.0 - PI + 20.0)).abs() < 1e-8);
        let rows = weak_convergence_error(&one, &p, &[3, 4, 5, 6]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].error < w[0].error, "{rows:?}");
        }
        // exact total mass equals the lattice sum of 1
        let g = LatticeGraph::build(&p).unwrap();
        assert!((MeasureTable::new(&g).total_bar() - rows[0].lattice_sum).abs() < 1e-9);
    }

    #[test]
    fn rod_bump() {
        let p = LatticeParams::standard(3).unwrap();
        struct Bump;
        impl DomainFunction for Bump {
            fn eval(&self, x: Point) -> f64 {
                match x {
                    Point::Rod(s) if (2.0..6.0).contains(&s) => (std::f64::consts::PI * (s - 2.0) / 4.0).sin().powi(2),
                    _ => 0.0,
                }
            }
            fn support(&self) -> Option<(f64, f64)> {
                Some((0.0, 6.0))
            }
        }
        let rows = weak_convergence_error(&Bump, &p, &[3, 4, 5]).unwrap();
        assert!((rows[0].integral - 2.0).abs() < 1e-8);
        assert!(rows.iter().all(|r| r.error < 1e-6));
    }

    #[test]
    fn pathological_integrand_rejected() {
        let p = LatticeParams::standard(3).unwrap();
        let bad = |x: Point| match x {
            Point::Rod(s) => (s - 1.0).powi(-2),
            _ => 0.0,
        };
        assert!(integrate_domain(&bad, &p, 1e-9).is_err());
    }
}
