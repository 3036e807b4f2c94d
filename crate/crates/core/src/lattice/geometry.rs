use serde::{Deserialize, Serialize};

use super::params::LatticeParams;
use crate::error::{Error, Result};

/// A vertex of the lattice space `E^k`, in integer units of `2^-k`.
///
/// The derived order is the dump order: Star, then plane points
/// lexicographically by `(i, j)`, then rod points by `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    Star,
    Plane { i: i32, j: i32 },
    Rod { n: u32 },
}

impl Vertex {
    pub fn point(self, h: f64) -> Point {
        match self {
            Vertex::Star => Point::Star,
            Vertex::Plane { i, j } => Point::Plane(i as f64 * h, j as f64 * h),
            Vertex::Rod { n } => Point::Rod(n as f64 * h),
        }
    }

    pub fn is_plane(self) -> bool {
        matches!(self, Vertex::Plane { .. })
    }

    pub fn is_rod(self) -> bool {
        matches!(self, Vertex::Rod { .. })
    }
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Vertex::Star => write!(f, "a*"),
            Vertex::Plane { i, j } => write!(f, "({i},{j})"),
            Vertex::Rod { n } => write!(f, "rod({n})"),
        }
    }
}

/// A point of the continuum space `E`. `Rod(0.0)` is the darning point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Star,
    Plane(f64, f64),
    Rod(f64),
}

fn check(x: Point, eps: f64) -> Result<()> {
    match x {
        Point::Plane(a, b) if a.hypot(b) <= eps => {
            Err(Error::Domain(format!("plane point ({a}, {b}) lies in the closed disk of radius {eps}")))
        }
        Point::Rod(s) if s < 0.0 => Err(Error::Domain(format!("negative rod coordinate {s}"))),
        _ => Ok(()),
    }
}

/// `|x|_rho`, the geodesic distance to the darning point.
pub fn rho_norm(x: Point, eps: f64) -> Result<f64> {
    check(x, eps)?;
    Ok(match x {
        Point::Star => 0.0,
        Point::Plane(a, b) => a.hypot(b) - eps,
        Point::Rod(s) => s,
    })
}

/// Shortest-path distance on `E`.
pub fn geodesic_rho(x: Point, y: Point, eps: f64) -> Result<f64> {
    let (nx, ny) = (rho_norm(x, eps)?, rho_norm(y, eps)?);
    Ok(match (x, y) {
        (Point::Plane(a, b), Point::Plane(c, d)) => (a - c).hypot(b - d).min(nx + ny),
        (Point::Rod(s), Point::Rod(t)) => (s - t).abs(),
        _ => nx + ny,
    })
}

/// The projection maps `(f1, f2, f3)`.
pub fn project_f(x: Point, eps: f64) -> Result<[f64; 3]> {
    let n = rho_norm(x, eps)?;
    Ok(match x {
        Point::Plane(a, b) => {
            let r = a.hypot(b);
            [n * a / r, n * b / r, 0.0]
        }
        Point::Rod(s) => [0.0, 0.0, s],
        Point::Star => [0.0; 3],
    })
}

/// Exact test whether the closed segment between two grid points meets the closed disk `B_eps`.
pub fn segment_meets_disk(params: &LatticeParams, a: (i64, i64), b: (i64, i64)) -> bool {
    let (p, q) = (*params.eps.numer() as i128, *params.eps.denom() as i128);
    let r2 = (p * p) << (2 * params.k);
    let q2 = q * q;
    let inside = |x: i128, y: i128| (x * x + y * y) * q2 <= r2;
    let (ax, ay, bx, by) = (a.0 as i128, a.1 as i128, b.0 as i128, b.1 as i128);
    if inside(ax, ay) || inside(bx, by) {
        return true;
    }
    let (dx, dy) = (bx - ax, by - ay);
    let len2 = dx * dx + dy * dy;
    if len2 == 0 {
        return false;
    }
    // foot of the perpendicular from the origin at parameter t = -a.d / |d|^2
    let dot = -(ax * dx + ay * dy);
    if dot <= 0 || dot >= len2 {
        return false;
    }
    let cross = ax * dy - ay * dx;
    cross * cross * q2 <= r2 * len2
}
