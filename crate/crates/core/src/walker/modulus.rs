//! The partition modulus
//! `w_rho(x, theta, T) = inf max_i sup_{s,t in [t_{i-1}, t_i)} rho(x(s), x(t))`
//! over `0 = t_0 < t_1 < ... < t_{n-1} < T <= t_n` with all gaps `>= theta`.
//!
//! For a piecewise-constant path only the states visited before `T` matter.
//! Feasibility of a level `delta` is decided exactly by a forward sweep over
//! the holding intervals that keeps, per interval, the earliest reachable cut.

use std::collections::{HashMap, VecDeque};

use super::path::Path;
use crate::lattice::{LatticeParams, Vertex};

/// A visited vertex in integer lattice units. Distances go through
/// correctly rounded square roots of integers, so they are monotone in the
/// integer data and every shortcut below agrees with a full scan.
#[derive(Clone, Copy, Debug)]
struct Pt {
    comp: u8,
    i: i64,
    j: i64,
    h: f64,
    /// `|x|_rho`
    nr: f64,
}

impl Pt {
    fn new(v: Vertex, h: f64, eps: f64) -> Self {
        match v {
            Vertex::Star => Pt { comp: 0, i: 0, j: 0, h, nr: 0.0 },
            Vertex::Plane { i, j } => {
                let (i, j) = (i as i64, j as i64);
                Pt { comp: 1, i, j, h, nr: ((i * i + j * j) as f64).sqrt() * h - eps }
            }
            Vertex::Rod { n } => Pt { comp: 2, i: n as i64, j: 0, h, nr: n as f64 * h },
        }
    }

    #[inline]
    fn dist(&self, o: &Pt) -> f64 {
        match (self.comp, o.comp) {
            (1, 1) => euclid(self.i - o.i, self.j - o.j, self.h).min(self.nr + o.nr),
            (2, 2) => (self.i - o.i).abs() as f64 * self.h,
            _ => self.nr + o.nr,
        }
    }
}

#[inline]
fn euclid(di: i64, dj: i64, h: f64) -> f64 {
    ((di * di + dj * dj) as f64).sqrt() * h
}

/// Sliding-window maximum of `(primary, secondary)` over path positions.
#[derive(Default)]
struct Extreme {
    q: VecDeque<(usize, (i64, i64), Pt)>,
}

impl Extreme {
    fn push(&mut self, idx: usize, key: (i64, i64), p: Pt) {
        while self.q.back().is_some_and(|b| b.1 <= key) {
            self.q.pop_back();
        }
        self.q.push_back((idx, key, p));
    }

    fn expire(&mut self, idx: usize) {
        if self.q.front().is_some_and(|f| f.0 == idx) {
            self.q.pop_front();
        }
    }

    fn best(&self) -> Option<(i64, Pt)> {
        self.q.front().map(|f| (f.1 .0, f.2))
    }
}

// plane directions: +i, -i, +j, -j, +(i+j), -(i+j), +(i-j), -(i-j)
const DIRS: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];

/// Vertices on the path positions `[l, p)`: distinct items for a full scan,
/// plus running extremes that settle most membership tests without one.
struct Window {
    index: HashMap<Vertex, usize>,
    items: Vec<(Vertex, Pt, u32)>,
    stars: u32,
    plane: [Extreme; 8],
    outer: Extreme,
    rod_hi: Extreme,
    rod_lo: Extreme,
    h: f64,
}

impl Window {
    fn new(h: f64) -> Self {
        Self {
            index: HashMap::new(),
            items: Vec::new(),
            stars: 0,
            plane: Default::default(),
            outer: Extreme::default(),
            rod_hi: Extreme::default(),
            rod_lo: Extreme::default(),
            h,
        }
    }

    fn fits(&self, p: &Pt, delta: f64) -> bool {
        if self.stars > 0 && p.nr > delta {
            return false;
        }
        let outer = self.outer.best().map(|b| b.1);
        let far_rod = self.rod_hi.best().map(|b| b.1);
        match p.comp {
            0 => outer.is_none_or(|q| q.nr <= delta) && far_rod.is_none_or(|q| q.nr <= delta),
            2 => {
                outer.is_none_or(|q| p.dist(&q) <= delta)
                    && far_rod.is_none_or(|q| p.dist(&q) <= delta)
                    && self.rod_lo.best().is_none_or(|b| p.dist(&b.1) <= delta)
            }
            _ => {
                if far_rod.is_some_and(|q| p.dist(&q) > delta) {
                    return false;
                }
                let Some(outer) = outer else {
                    return true;
                };
                if p.nr + outer.nr <= delta {
                    return true;
                }
                let mut reach = [0i64; 4];
                for (d, e) in DIRS.iter().zip(&self.plane) {
                    let (top, q) = e.best().unwrap();
                    if p.dist(&q) > delta {
                        return false;
                    }
                    // farthest extent of the window beyond p along this direction
                    let slot = match d {
                        (_, 0) => 0,
                        (0, _) => 1,
                        (a, b) if a == b => 2,
                        _ => 3,
                    };
                    reach[slot] = reach[slot].max(top - (d.0 * p.i + d.1 * p.j));
                }
                let axis = reach[0] * reach[0] + reach[1] * reach[1];
                let diag = (reach[2] * reach[2] + reach[3] * reach[3]) / 2;
                if euclid_sq(axis.min(diag), self.h) <= delta {
                    return true;
                }
                self.items.iter().all(|(_, q, _)| q.comp != 1 || p.dist(q) <= delta)
            }
        }
    }

    fn insert(&mut self, idx: usize, v: Vertex, p: Pt) {
        match p.comp {
            0 => self.stars += 1,
            2 => {
                self.rod_hi.push(idx, (p.i, 0), p);
                self.rod_lo.push(idx, (-p.i, 0), p);
            }
            _ => {
                let key = p.i * p.i + p.j * p.j;
                for (d, e) in DIRS.iter().zip(&mut self.plane) {
                    e.push(idx, (d.0 * p.i + d.1 * p.j, key), p);
                }
                self.outer.push(idx, (key, 0), p);
            }
        }
        match self.index.get(&v) {
            Some(&i) => self.items[i].2 += 1,
            None => {
                self.index.insert(v, self.items.len());
                self.items.push((v, p, 1));
            }
        }
    }

    /// Drops position `idx`, which must be the oldest in the window.
    fn remove(&mut self, idx: usize, v: Vertex) {
        let i = self.index[&v];
        if self.items[i].1.comp == 0 {
            self.stars -= 1;
        }
        for e in self.plane.iter_mut().chain([&mut self.outer, &mut self.rod_hi, &mut self.rod_lo]) {
            e.expire(idx);
        }
        self.items[i].2 -= 1;
        if self.items[i].2 == 0 {
            self.index.remove(&v);
            self.items.swap_remove(i);
            if i < self.items.len() {
                self.index.insert(self.items[i].0, i);
            }
        }
    }
}

#[inline]
fn euclid_sq(m: i64, h: f64) -> f64 {
    (m as f64).sqrt() * h
}

struct Prepared {
    h: f64,
    /// start time of each holding interval before `T`
    starts: Vec<f64>,
    states: Vec<Vertex>,
    pts: Vec<Pt>,
}

fn prepare(path: &Path, params: &LatticeParams, t: f64) -> Prepared {
    let m = path.times.partition_point(|&s| s < t).max(1);
    let (h, eps) = (params.h(), params.eps_f64());
    Prepared {
        h,
        starts: path.times[..m].to_vec(),
        states: path.states[..m].to_vec(),
        pts: path.states[..m].iter().map(|&v| Pt::new(v, h, eps)).collect(),
    }
}

/// For each interval `l`, the first `p > l` with `diam{v_l..v_p} > delta`
/// (or `len` if none).
#[allow(clippy::needless_range_loop)] // parallel arrays
fn first_exceed(pr: &Prepared, delta: f64) -> Vec<usize> {
    let n = pr.states.len();
    let mut out = vec![n; n];
    let mut win = Window::new(pr.h);
    let mut p = 0;
    for l in 0..n {
        if p < l {
            p = l;
        }
        if p == l {
            win.insert(l, pr.states[l], pr.pts[l]);
            p = l + 1;
        }
        while p < n && win.fits(&pr.pts[p], delta) {
            win.insert(p, pr.states[p], pr.pts[p]);
            p += 1;
        }
        out[l] = p;
        win.remove(l, pr.states[l]);
    }
    out
}

#[allow(clippy::needless_range_loop)] // parallel arrays
fn feasible(pr: &Prepared, theta: f64, t: f64, delta: f64) -> bool {
    let n = pr.states.len();
    let exceed = first_exceed(pr, delta);
    let mut earliest = vec![f64::INFINITY; n];
    earliest[0] = 0.0;
    let mut marked = 0usize;
    for l in 0..n {
        let e = earliest[l];
        if e.is_infinite() {
            continue;
        }
        let p = exceed[l];
        if p == n {
            return true;
        }
        let limit = pr.starts[p];
        let c = e + theta;
        if c > limit || c >= t {
            continue;
        }
        let s = pr.starts.partition_point(|&u| u <= c) - 1;
        if c < earliest[s] {
            earliest[s] = c;
        }
        for q in (s.max(marked) + 1)..=p {
            if pr.starts[q] < earliest[q] {
                earliest[q] = pr.starts[q];
            }
        }
        marked = marked.max(p);
    }
    false
}

/// Whether `w_rho(path, theta, T) > delta`.
pub fn w_rho_exceeds(path: &Path, params: &LatticeParams, theta: f64, t: f64, delta: f64) -> bool {
    assert!(theta > 0.0 && theta < t, "need 0 < theta < T");
    !feasible(&prepare(path, params, t), theta, t, delta)
}

/// Distinct-vertex count below which the modulus is found by searching the
/// sorted pairwise distances; above it, by bisection to `1e-12`.
const EXACT_LIMIT: usize = 1500;

/// `w_rho(path, theta, T)` under the geodesic metric.
pub fn modulus_w_rho(path: &Path, params: &LatticeParams, theta: f64, t: f64) -> f64 {
    assert!(theta > 0.0 && theta < t, "need 0 < theta < T");
    let pr = prepare(path, params, t);
    let mut distinct: Vec<(Vertex, Pt)> = Vec::new();
    let mut seen = HashMap::new();
    for (v, p) in pr.states.iter().zip(&pr.pts) {
        if seen.insert(*v, ()).is_none() {
            distinct.push((*v, *p));
        }
    }
    if distinct.len() <= EXACT_LIMIT {
        let mut cand = vec![0.0];
        for a in 0..distinct.len() {
            for b in a + 1..distinct.len() {
                cand.push(distinct[a].1.dist(&distinct[b].1));
            }
        }
        cand.sort_by(f64::total_cmp);
        cand.dedup();
        let (mut lo, mut hi) = (0usize, cand.len() - 1);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if feasible(&pr, theta, t, cand[mid]) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        cand[lo]
    } else {
        let (mut lo, mut hi) = (0.0, 0.0f64);
        for (_, p) in &distinct {
            hi = hi.max(p.dist(&distinct[0].1) * 2.0);
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if feasible(&pr, theta, t, mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> LatticeParams {
        LatticeParams::standard(3).unwrap()
    }

    fn rod_path(times: &[f64], ns: &[u32], horizon: f64) -> Path {
        Path {
            k: 3,
            horizon,
            times: times.to_vec(),
            states: ns.iter().map(|&n| Vertex::Rod { n }).collect(),
            absorption: None,
            resurrections: vec![],
        }
    }

    /// Brute force over all cut sets drawn from `{jump times} ∪ {jump times + j theta}`
    /// restricted to a fine grid.
    fn brute(path: &Path, theta: f64, t: f64) -> f64 {
        let p = params();
        let m = path.times.partition_point(|&s| s < t);
        let pts: Vec<Pt> = path.states[..m].iter().map(|&v| Pt::new(v, p.h(), p.eps_f64())).collect();
        let starts = &path.times[..m];
        let mut grid: Vec<f64> = (1..400).map(|i| t * i as f64 / 400.0).collect();
        for &a in starts {
            let mut c = a;
            while c < t {
                grid.push(c);
                c += theta;
            }
        }
        let diam = |a: f64, b: f64| {
            let idx: Vec<usize> = (0..m).filter(|&l| {
                let end = if l + 1 < m { starts[l + 1] } else { f64::INFINITY };
                starts[l] < b && end > a
            }).collect();
            let mut d = 0.0f64;
            for &i in &idx {
                for &j in &idx {
                    d = d.max(pts[i].dist(&pts[j]));
                }
            }
            d
        };
        // dynamic programming over grid cuts
        let mut cuts = grid.clone();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut best: Vec<f64> = vec![f64::INFINITY; cuts.len()];
        let mut answer = diam(0.0, f64::INFINITY);
        for (i, &c) in cuts.iter().enumerate() {
            if c < theta || c >= t {
                continue;
            }
            let mut b = diam(0.0, c);
            for j in 0..i {
                if c - cuts[j] >= theta && best[j].is_finite() {
                    b = b.min(best[j].max(diam(cuts[j], c)));
                }
            }
            best[i] = b;
            answer = answer.min(b.max(diam(c, f64::INFINITY)));
        }
        answer
    }

    #[test]
    fn constant_path_zero() {
        let p = Path::constant(3, Vertex::Star, 1.0);
        assert_eq!(modulus_w_rho(&p, &params(), 0.1, 1.0), 0.0);
    }

    #[test]
    fn single_jump_separable() {
        let p = rod_path(&[0.0, 0.5], &[1, 20], 1.0);
        assert_eq!(modulus_w_rho(&p, &params(), 0.2, 1.0), 0.0);
        // too close to the start to be separated
        let p = rod_path(&[0.0, 0.1], &[1, 20], 1.0);
        assert!((modulus_w_rho(&p, &params(), 0.2, 1.0) - 19.0 / 8.0).abs() < 1e-12);
        assert!(w_rho_exceeds(&p, &params(), 0.2, 1.0, 2.0));
        assert!(!w_rho_exceeds(&p, &params(), 0.2, 1.0, 2.4));
    }

    #[test]
    fn matches_brute_force() {
        use crate::walker::RngStream;
        let mut rng = RngStream::new(17, 0);
        for _ in 0..40 {
            let mut times = vec![0.0];
            let mut ns = vec![20u32];
            let mut t = 0.0;
            loop {
                t += rng.exp(6.0);
                if t >= 1.0 {
                    break;
                }
                times.push((t * 400.0).round() / 400.0 + 1.0 / 800.0);
                let last = *ns.last().unwrap() as i64;
                ns.push((last + rng.below(9) as i64 - 4).max(1) as u32);
            }
            times.dedup();
            ns.truncate(times.len());
            let p = rod_path(&times, &ns, 1.0);
            for theta in [0.05, 0.13, 0.3] {
                let w = modulus_w_rho(&p, &params(), theta, 1.0);
                let b = brute(&p, theta, 1.0);
                assert!((w - b).abs() < 1e-12, "w={w} brute={b} times={times:?} ns={ns:?}");
            }
        }
    }

    fn naive_first_exceed(pr: &Prepared, delta: f64) -> Vec<usize> {
        let n = pr.pts.len();
        (0..n)
            .map(|l| {
                let mut p = l + 1;
                while p < n && (l..p).all(|q| pr.pts[q].dist(&pr.pts[p]) <= delta) {
                    p += 1;
                }
                p
            })
            .collect()
    }

    #[test]
    fn window_shortcuts_match_scan() {
        use crate::measures::{JumpKernel, KernelVariant};
        use crate::walker::{simulate_reflected, RngStream};
        let p = params();
        let g = crate::lattice::LatticeGraph::build(&p).unwrap();
        let kr = JumpKernel::new(&g, KernelVariant::Reflected);
        for seed in 0..6 {
            let start = [Vertex::Star, Vertex::Plane { i: 9, j: 0 }, Vertex::Rod { n: 3 }][seed as usize % 3];
            let path = simulate_reflected(&kr, start, 2.0, &mut RngStream::new(seed, 0)).unwrap();
            let pr = prepare(&path, &p, 2.0);
            for delta in [0.1, 0.25, 0.3, 0.5, 1.0] {
                assert_eq!(first_exceed(&pr, delta), naive_first_exceed(&pr, delta), "seed {seed} delta {delta}");
            }
        }
    }

    #[test]
    fn lattice_distance_matches_geodesic() {
        use crate::lattice::geodesic_rho;
        let p = params();
        let (h, e) = (p.h(), p.eps_f64());
        let vs = [
            Vertex::Star,
            Vertex::Plane { i: 9, j: 0 },
            Vertex::Plane { i: -7, j: 5 },
            Vertex::Plane { i: 3, j: 40 },
            Vertex::Rod { n: 1 },
            Vertex::Rod { n: 30 },
        ];
        for a in vs {
            for b in vs {
                let d = Pt::new(a, h, e).dist(&Pt::new(b, h, e));
                assert!((d - geodesic_rho(a.point(h), b.point(h), e).unwrap()).abs() < 1e-12);
            }
        }
    }
}
