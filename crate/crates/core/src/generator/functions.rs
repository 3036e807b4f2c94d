use serde::Serialize;

use crate::lattice::{project_f, LatticeParams, Point, Vertex};
use crate::measures::DomainFunction;

/// Uniform cubic B-spline with knots `0, 1, 2, 3, 4`: value, first and second derivative.
pub fn bspline(t: f64) -> [f64; 3] {
    if !(0.0..4.0).contains(&t) {
        return [0.0; 3];
    }
    if t < 1.0 {
        [t * t * t / 6.0, t * t / 2.0, t]
    } else if t < 2.0 {
        let u = t - 1.0;
        [(((-3.0 * u + 3.0) * u + 3.0) * u + 1.0) / 6.0, ((-9.0 * u + 6.0) * u + 3.0) / 6.0, -3.0 * u + 1.0]
    } else if t < 3.0 {
        let u = t - 2.0;
        [((3.0 * u - 6.0) * u * u + 4.0) / 6.0, (9.0 * u - 12.0) * u / 6.0, 3.0 * u - 2.0]
    } else {
        let u = 4.0 - t;
        [u * u * u / 6.0, -u * u / 2.0, u]
    }
}

/// C^2 cubic step: 1 for `t <= 0`, 0 for `t >= 4`, knots at the integers.
pub fn step_down(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let mut out = [0.0; 3];
    for m in 0..4 {
        let b = bspline(t + m as f64);
        for (o, v) in out.iter_mut().zip(b) {
            *o += v;
        }
    }
    out
}

/// A profile `t -> s * g((t - a) / w)` with value and two derivatives in `t`.
#[derive(Clone, Copy, Debug, Serialize)]
enum Profile {
    Bump { a: f64, w: f64, s: f64 },
    Step { a: f64, w: f64 },
}

impl Profile {
    fn eval(&self, t: f64) -> [f64; 3] {
        let (raw, w, s) = match *self {
            Profile::Bump { a, w, s } => (bspline((t - a) / w), w, s),
            Profile::Step { a, w } => (step_down((t - a) / w), w, 1.0),
        };
        [s * raw[0], s * raw[1] / w, s * raw[2] / (w * w)]
    }

    fn end(&self) -> f64 {
        match *self {
            Profile::Bump { a, w, .. } | Profile::Step { a, w } => a + 4.0 * w,
        }
    }

    fn knots(&self) -> Vec<f64> {
        match *self {
            Profile::Bump { a, w, .. } | Profile::Step { a, w } => (0..=4).map(|m| a + m as f64 * w).collect(),
        }
    }
}

/// Canonical members of the test class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TestShape {
    /// Equal to 1 on the disk, at `a*` and near the rod origin; decays to 0
    /// radially on the plane and along the rod.
    Darning,
    /// A bump on the rod away from `a*`; zero elsewhere.
    RodBump,
    /// `cos(2 theta)` times a radial bump in an annulus away from the disk.
    Angular,
}

/// A function on `E` with closed-form first and second derivatives on each component.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    pub name: &'static str,
    pub shape: TestShape,
    eps: f64,
    plane: Option<Profile>,
    rod: Option<Profile>,
    star_value: f64,
}

/// Value, gradient and `𝓛f` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Derivs {
    pub value: f64,
    /// Plane gradient, or `(g', 0)` on the rod.
    pub grad: [f64; 2],
    /// `¼Δf` on the plane, `½f''` on the rod.
    pub generator: f64,
}

impl TestFunction {
    pub fn new(shape: TestShape, eps: f64) -> Self {
        let bump_height = 1.5;
        match shape {
            TestShape::Darning => Self {
                name: "darning",
                shape,
                eps,
                plane: Some(Profile::Step { a: eps, w: eps / 2.0 }),
                rod: Some(Profile::Step { a: 0.0, w: eps / 2.0 }),
                star_value: 1.0,
            },
            TestShape::RodBump => Self {
                name: "rod_bump",
                shape,
                eps,
                plane: None,
                rod: Some(Profile::Bump { a: 2.0 * eps, w: 2.0 * eps, s: bump_height }),
                star_value: 0.0,
            },
            TestShape::Angular => Self {
                name: "angular",
                shape,
                eps,
                plane: Some(Profile::Bump { a: 4.0 * eps, w: 2.0 * eps, s: bump_height }),
                rod: None,
                star_value: 0.0,
            },
        }
    }

    /// Value on the whole plane, including the disk where it is constant.
    pub fn plane_value(&self, x: f64, y: f64) -> f64 {
        let r = x.hypot(y);
        if r <= self.eps {
            return self.star_value;
        }
        self.plane_derivs(x, y).value
    }

    fn plane_derivs(&self, x: f64, y: f64) -> Derivs {
        let Some(p) = self.plane else {
            return Derivs { value: 0.0, grad: [0.0; 2], generator: 0.0 };
        };
        let r = x.hypot(y);
        let [v, d1, d2] = p.eval(r);
        let (c, s) = (x / r, y / r);
        match self.shape {
            TestShape::Angular => {
                // cos 2θ = (x² - y²) / r², ∇cos 2θ = (4xy²/r⁴, -4x²y/r⁴)
                let a = c * c - s * s;
                let da = [4.0 * x * y * y / r.powi(4), -4.0 * x * x * y / r.powi(4)];
                Derivs {
                    value: a * v,
                    grad: [da[0] * v + a * d1 * c, da[1] * v + a * d1 * s],
                    generator: 0.25 * a * (d2 + d1 / r - 4.0 * v / (r * r)),
                }
            }
            _ => Derivs { value: v, grad: [d1 * c, d1 * s], generator: 0.25 * (d2 + d1 / r) },
        }
    }

    fn rod_derivs(&self, s: f64) -> Derivs {
        let Some(p) = self.rod else {
            return Derivs { value: 0.0, grad: [0.0; 2], generator: 0.0 };
        };
        let [v, d1, d2] = p.eval(s);
        Derivs { value: v, grad: [d1, 0.0], generator: 0.5 * d2 }
    }

    pub fn derivs(&self, x: Point) -> Derivs {
        match x {
            Point::Star => Derivs { value: self.star_value, grad: [0.0; 2], generator: 0.0 },
            Point::Rod(0.0) => self.derivs(Point::Star),
            Point::Rod(s) => self.rod_derivs(s),
            Point::Plane(a, b) => self.plane_derivs(a, b),
        }
    }

    /// `𝓛f = ½f''` on the rod, `¼Δf` on the plane.
    pub fn continuum_generator(&self, x: Point) -> f64 {
        self.derivs(x).generator
    }

    /// Radii on the plane and positions on the rod where the third derivative jumps.
    pub fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        (self.plane.map(|p| p.knots()).unwrap_or_default(), self.rod.map(|p| p.knots()).unwrap_or_default())
    }

    /// Whether the support sits inside `E_0` (or the disk) with the given margin.
    pub fn support_inside(&self, params: &LatticeParams, margin: f64) -> bool {
        let (pr, rl) = self.support().unwrap();
        pr + margin < params.radius_f64() && rl + margin < params.rod_length_f64()
    }
}

impl DomainFunction for TestFunction {
    fn eval(&self, x: Point) -> f64 {
        self.derivs(x).value
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((self.plane.map_or(self.eps, |p| p.end()), self.rod.map_or(0.0, |p| p.end())))
    }
}

/// The three canonical test functions for a disk of radius `eps`.
pub fn canonical_test_functions(params: &LatticeParams) -> Vec<TestFunction> {
    let eps = params.eps_f64();
    [TestShape::Darning, TestShape::RodBump, TestShape::Angular].into_iter().map(|s| TestFunction::new(s, eps)).collect()
}

/// Anything that can be evaluated at lattice vertices.
pub trait VertexFunction: Sync {
    fn at(&self, v: Vertex, params: &LatticeParams) -> f64;
}

impl VertexFunction for TestFunction {
    fn at(&self, v: Vertex, params: &LatticeParams) -> f64 {
        self.eval(v.point(params.h()))
    }
}

/// The projection `f_i`, `i = 1, 2, 3`.
#[derive(Clone, Copy, Debug)]
pub struct Projection(pub usize);

impl VertexFunction for Projection {
    fn at(&self, v: Vertex, params: &LatticeParams) -> f64 {
        project_f(v.point(params.h()), params.eps_f64()).expect("lattice vertex lies in E")[self.0 - 1]
    }
}

/// A closure on vertices.
pub struct FnVertex<F>(pub F);

impl<F: Fn(Vertex, &LatticeParams) -> f64 + Sync> VertexFunction for FnVertex<F> {
    fn at(&self, v: Vertex, params: &LatticeParams) -> f64 {
        (self.0)(v, params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walker::RngStream;

    #[test]
    fn spline_identities() {
        // partition of unity and C^2 joins
        for i in 0..400 {
            let t = i as f64 / 100.0;
            let s: f64 = (-4..4).map(|m| bspline(t + m as f64)[0]).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        for knot in 0..=4 {
            let t = knot as f64;
            let (a, b) = (bspline(t - 1e-12), bspline(t + 1e-12));
            for d in 0..3 {
                assert!((a[d] - b[d]).abs() < 1e-9, "knot {knot} derivative {d}");
            }
        }
        let peak = bspline(2.0)[0];
        assert!((peak - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(step_down(0.0), [1.0, 0.0, 0.0]);
        assert!(step_down(4.0)[0].abs() < 1e-15);
    }

    #[test]
    fn class_constraints() {
        let p = LatticeParams::standard(3).unwrap();
        for f in canonical_test_functions(&p) {
            let near = f.eval(Point::Plane(1.0 + 1e-9, 0.0));
            assert!((near - f.eval(Point::Rod(0.0))).abs() < 1e-9, "{}", f.name);
            assert_eq!(f.eval(Point::Star), f.eval(Point::Rod(0.0)));
            assert!(f.support_inside(&p, 0.125), "{}", f.name);
            assert_eq!(f.eval(Point::Plane(19.0, 0.0)), 0.0);
            assert_eq!(f.eval(Point::Rod(19.0)), 0.0);
        }
    }

    #[test]
    fn peak_heights() {
        let p = LatticeParams::standard(3).unwrap();
        let fs = canonical_test_functions(&p);
        assert!((fs[1].eval(Point::Rod(6.0)) - 1.0).abs() < 1e-12);
        assert!((fs[2].eval(Point::Plane(8.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((fs[2].eval(Point::Plane(0.0, 8.0)) + 1.0).abs() < 1e-12);
    }

    fn near_knot(f: &TestFunction, x: Point, gap: f64) -> bool {
        let (pk, rk) = f.knots();
        match x {
            Point::Plane(a, b) => pk.iter().any(|k| (a.hypot(b) - k).abs() < gap),
            Point::Rod(s) => rk.iter().any(|k| (s - k).abs() < gap),
            Point::Star => true,
        }
    }

    /// Central finite differences of the closed-form values.
    fn fd(f: &TestFunction, x: Point, d: f64) -> (f64, [f64; 2]) {
        match x {
            Point::Plane(a, b) => {
                let v = |u: f64, w: f64| f.eval(Point::Plane(u, w));
                let c = v(a, b);
                let lap = (v(a + d, b) + v(a - d, b) + v(a, b + d) + v(a, b - d) - 4.0 * c) / (d * d);
                let g = [(v(a + d, b) - v(a - d, b)) / (2.0 * d), (v(a, b + d) - v(a, b - d)) / (2.0 * d)];
                (0.25 * lap, g)
            }
            Point::Rod(s) => {
                let v = |u: f64| f.eval(Point::Rod(u));
                (0.5 * (v(s + d) + v(s - d) - 2.0 * v(s)) / (d * d), [(v(s + d) - v(s - d)) / (2.0 * d), 0.0])
            }
            Point::Star => unreachable!(),
        }
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let p = LatticeParams::standard(3).unwrap();
        let mut rng = RngStream::new(23, 0);
        let d = 1e-4;
        for f in canonical_test_functions(&p) {
            let (pr, rl) = f.support().unwrap();
            let scale = (0..2000)
                .map(|i| {
                    let r = 1.0 + (pr - 1.0) * i as f64 / 2000.0;
                    f.continuum_generator(Point::Plane(r, 0.3)).abs().max(f.continuum_generator(Point::Rod(rl * i as f64 / 2000.0)).abs())
                })
                .fold(0.0, f64::max);
            let mut checked = 0;
            while checked < 1000 {
                let x = if rng.uniform() < 0.5 {
                    let r = 1.0 + 1e-3 + (pr + 0.5) * rng.uniform();
                    let th = std::f64::consts::TAU * rng.uniform();
                    Point::Plane(r * th.cos(), r * th.sin())
                } else {
                    Point::Rod(1e-3 + (rl + 0.5) * rng.uniform())
                };
                if near_knot(&f, x, 10.0 * d) {
                    continue;
                }
                checked += 1;
                let exact = f.derivs(x);
                let (lap, grad) = fd(&f, x, d);
                assert!((lap - exact.generator).abs() < 1e-6 * scale, "{} at {x:?}: {lap} vs {}", f.name, exact.generator);
                for (g, e) in grad.iter().zip(exact.grad) {
                    assert!((g - e).abs() < 1e-6, "{} grad at {x:?}", f.name);
                }
            }
        }
    }

    #[test]
    fn projections() {
        let p = LatticeParams::standard(3).unwrap();
        let v = Vertex::Plane { i: 16, j: 0 };
        assert_eq!(Projection(1).at(v, &p), 1.0);
        assert_eq!(Projection(3).at(Vertex::Rod { n: 4 }, &p), 0.5);
        assert_eq!(Projection(2).at(Vertex::Star, &p), 0.0);
    }
}
