use std::collections::VecDeque;
use std::io::Write;

use num_integer::Roots;

use super::geometry::Vertex;
use super::params::LatticeParams;
use crate::error::Result;

/// Dense vertex index: Star is 0, plane vertices follow in lexicographic
/// order, rod vertices last.
pub type VertexId = u64;

/// Which edge set to use: the lattice graph `G^k` or the domain graph `G_0^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphKind {
    Full,
    Domain,
}

/// Up to four neighbors of a non-Star vertex.
#[derive(Clone, Copy, Debug)]
pub struct Local {
    items: [Vertex; 4],
    len: u8,
}

impl Local {
    fn new() -> Self {
        Self { items: [Vertex::Star; 4], len: 0 }
    }

    fn push(&mut self, v: Vertex) {
        self.items[self.len as usize] = v;
        self.len += 1;
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.items[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// The neighborhood of the darning vertex, computable without the rest of the graph.
#[derive(Clone, Debug)]
pub struct StarStructure {
    pub params: LatticeParams,
    disk_max: i64,
    /// Plane vertices adjacent to Star, in vertex order.
    ring: Vec<Vertex>,
}

impl StarStructure {
    pub fn new(params: &LatticeParams) -> Result<Self> {
        params.validate()?;
        let disk_max = params.disk_max();
        let a = disk_max.sqrt() as i32 + 1;
        let in_disk = |i: i32, j: i32| (i as i64).pow(2) + (j as i64).pow(2) <= disk_max;
        let mut ring = Vec::new();
        for i in -a..=a {
            for j in -a..=a {
                if in_disk(i, j) {
                    continue;
                }
                if in_disk(i - 1, j) || in_disk(i + 1, j) || in_disk(i, j - 1) || in_disk(i, j + 1) {
                    ring.push(Vertex::Plane { i, j });
                }
            }
        }
        Ok(Self { params: params.clone(), disk_max, ring })
    }

    pub fn ring(&self) -> &[Vertex] {
        &self.ring
    }

    /// `v_k(a*)`; equal to `v̄_k(a*)` because the ring lies well inside `E_0`.
    pub fn degree(&self) -> usize {
        self.ring.len() + 1
    }

    /// All neighbors of Star: the ring followed by its unique rod neighbor.
    pub fn neighbors(&self) -> Vec<Vertex> {
        let mut v = self.ring.clone();
        v.push(Vertex::Rod { n: 1 });
        v
    }

    pub fn in_disk(&self, i: i32, j: i32) -> bool {
        (i as i64).pow(2) + (j as i64).pow(2) <= self.disk_max
    }
}

#[derive(Clone, Copy, Debug)]
struct Column {
    /// largest |j| with the grid point strictly inside radius R
    b: i32,
    /// largest |j| with the grid point inside the closed disk, or -1
    a: i32,
    /// id of the column's first vertex
    offset: u64,
}

impl Column {
    fn count(&self) -> u64 {
        let full = 2 * self.b as u64 + 1;
        if self.a >= 0 {
            full - (2 * self.a as u64 + 1)
        } else {
            full
        }
    }
}

/// Vertex classification flags.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    /// in `∂E_0^k`
    pub boundary: bool,
    /// in `S_0^k`
    pub regular: bool,
    /// adjacent to Star
    pub ring: bool,
}

impl Flags {
    pub fn core(&self, v: Vertex) -> bool {
        self.regular || self.ring || v == Vertex::Star
    }

    fn code(&self) -> String {
        let mut s = String::new();
        if self.boundary {
            s.push('B');
        }
        if self.regular {
            s.push('S');
        }
        if self.ring {
            s.push('A');
        }
        if s.is_empty() {
            s.push('-');
        }
        s
    }
}

/// Marked vertex sets.
#[derive(Clone, Debug, Default)]
pub struct Classification {
    pub boundary: Vec<VertexId>,
    pub regular: Vec<VertexId>,
    pub ring: Vec<VertexId>,
    pub core: Vec<VertexId>,
}

/// The graphs `G^k` and `G_0^k` over the concrete domain.
///
/// Adjacency is not stored: the domain is described by a few integer
/// thresholds, so neighbors, degrees and ids are all computed on demand.
/// `G^k` is unbounded; only vertices of `E_0^k` and their neighbors are
/// ever visited.
#[derive(Clone, Debug)]
pub struct LatticeGraph {
    pub params: LatticeParams,
    disk_max: i64,
    plane_max: i64,
    rod_max: u32,
    imax: i32,
    columns: Vec<Column>,
    n_plane: u64,
    star: StarStructure,
}

impl LatticeGraph {
    pub fn build(params: &LatticeParams) -> Result<Self> {
        let star = StarStructure::new(params)?;
        let disk_max = params.disk_max();
        let plane_max = params.plane_max();
        let imax = plane_max.sqrt() as i32;
        let mut columns = Vec::with_capacity(2 * imax as usize + 1);
        let mut offset = 1u64;
        for i in -imax..=imax {
            let i2 = (i as i64).pow(2);
            let b = (plane_max - i2).sqrt() as i32;
            let a = if i2 <= disk_max { (disk_max - i2).sqrt() as i32 } else { -1 };
            let c = Column { b, a, offset };
            offset += c.count();
            columns.push(c);
        }
        let n_plane = offset - 1;
        Ok(Self { params: params.clone(), disk_max, plane_max, rod_max: params.rod_max(), imax, columns, n_plane, star })
    }

    pub fn star(&self) -> &StarStructure {
        &self.star
    }

    pub fn num_vertices(&self) -> usize {
        (1 + self.n_plane + self.rod_max as u64) as usize
    }

    pub fn num_plane(&self) -> usize {
        self.n_plane as usize
    }

    pub fn rod_max(&self) -> u32 {
        self.rod_max
    }

    #[inline]
    pub fn in_disk(&self, i: i32, j: i32) -> bool {
        norm2(i, j) <= self.disk_max
    }

    /// Whether `v` is a vertex of `E_0^k`.
    #[inline]
    pub fn in_domain(&self, v: Vertex) -> bool {
        match v {
            Vertex::Star => true,
            Vertex::Plane { i, j } => {
                let n = norm2(i, j);
                n > self.disk_max && n <= self.plane_max
            }
            Vertex::Rod { n } => n >= 1 && n <= self.rod_max,
        }
    }

    /// Whether `v` is a vertex of the unbounded `E^k`.
    pub fn in_lattice(&self, v: Vertex) -> bool {
        match v {
            Vertex::Star => true,
            Vertex::Plane { i, j } => !self.in_disk(i, j),
            Vertex::Rod { n } => n >= 1,
        }
    }

    /// Neighbors of a non-Star vertex. Grid neighbors inside the disk are
    /// collapsed to a single Star entry listed first.
    #[inline]
    pub fn local(&self, v: Vertex, kind: GraphKind) -> Local {
        let mut out = Local::new();
        match v {
            Vertex::Star => panic!("Star neighbors are served by StarStructure"),
            Vertex::Plane { i, j } => {
                let mask = self.plane_mask(i, j, kind);
                if mask & STAR_BIT != 0 {
                    out.push(Vertex::Star);
                }
                for (d, (di, dj)) in GRID_DIRS.iter().enumerate() {
                    if mask & (1 << d) != 0 {
                        out.push(Vertex::Plane { i: i + di, j: j + dj });
                    }
                }
            }
            Vertex::Rod { n } => {
                out.push(if n == 1 { Vertex::Star } else { Vertex::Rod { n: n - 1 } });
                if kind == GraphKind::Full || n < self.rod_max {
                    out.push(Vertex::Rod { n: n + 1 });
                }
            }
        }
        out
    }

    /// Neighborhood of the plane point `(i, j)` as bits: bit `d` is set when
    /// the grid neighbor in direction `GRID_DIRS[d]` is a vertex of the chosen
    /// graph, and [`STAR_BIT`] when some grid neighbor lies in the disk.
    #[inline]
    pub fn plane_mask(&self, i: i32, j: i32, kind: GraphKind) -> u8 {
        let mut mask = 0;
        for (d, (di, dj)) in GRID_DIRS.iter().enumerate() {
            let n = norm2(i + di, j + dj);
            if n <= self.disk_max {
                mask |= STAR_BIT;
            } else if kind == GraphKind::Full || n <= self.plane_max {
                mask |= 1 << d;
            }
        }
        mask
    }

    /// All neighbors of `v` in the chosen graph.
    pub fn neighbors(&self, v: Vertex, kind: GraphKind) -> Vec<Vertex> {
        match v {
            Vertex::Star => self.star.neighbors(),
            _ => self.local(v, kind).as_slice().to_vec(),
        }
    }

    /// `v_k` (Full) or `v̄_k` (Domain).
    #[inline]
    pub fn degree(&self, v: Vertex, kind: GraphKind) -> usize {
        match v {
            Vertex::Star => self.star.degree(),
            _ => self.local(v, kind).len(),
        }
    }

    /// Membership in `∂E_0^k`: a vertex of `E_0^k` with a `G^k` neighbor outside `E_0^k`.
    #[inline]
    pub fn is_boundary(&self, v: Vertex) -> bool {
        match v {
            Vertex::Star => false,
            Vertex::Plane { i, j } => [(i - 1, j), (i, j - 1), (i, j + 1), (i + 1, j)]
                .iter()
                .any(|&(a, b)| norm2(a, b) > self.plane_max),
            Vertex::Rod { n } => n == self.rod_max,
        }
    }

    pub fn is_star_adjacent(&self, v: Vertex) -> bool {
        match v {
            Vertex::Star => false,
            Vertex::Plane { i, j } => {
                self.in_disk(i - 1, j) || self.in_disk(i + 1, j) || self.in_disk(i, j - 1) || self.in_disk(i, j + 1)
            }
            Vertex::Rod { n } => n == 1,
        }
    }

    pub fn flags(&self, v: Vertex) -> Flags {
        let regular = match v {
            Vertex::Star => false,
            Vertex::Plane { .. } => self.degree(v, GraphKind::Domain) == 4,
            Vertex::Rod { .. } => self.degree(v, GraphKind::Domain) == 2,
        };
        Flags { boundary: self.is_boundary(v), regular, ring: self.is_star_adjacent(v) }
    }

    pub fn classify(&self) -> Classification {
        let mut c = Classification::default();
        for (id, v) in self.vertices().enumerate() {
            let id = id as VertexId;
            let f = self.flags(v);
            if f.boundary {
                c.boundary.push(id);
            }
            if f.regular {
                c.regular.push(id);
            }
            if f.ring {
                c.ring.push(id);
            }
            if f.core(v) {
                c.core.push(id);
            }
        }
        c
    }

    /// Id of a vertex of `E_0^k`.
    pub fn id(&self, v: Vertex) -> Option<VertexId> {
        if !self.in_domain(v) {
            return None;
        }
        Some(match v {
            Vertex::Star => 0,
            Vertex::Plane { i, j } => {
                let c = &self.columns[(i + self.imax) as usize];
                let mut off = (j + c.b) as u64;
                if j > c.a && c.a >= 0 {
                    off -= 2 * c.a as u64 + 1;
                }
                (c.offset + off) as VertexId
            }
            Vertex::Rod { n } => (self.n_plane + n as u64) as VertexId,
        })
    }

    /// Inverse of [`LatticeGraph::id`].
    pub fn vertex(&self, id: VertexId) -> Vertex {
        if id == 0 {
            return Vertex::Star;
        }
        if id > self.n_plane {
            return Vertex::Rod { n: (id - self.n_plane) as u32 };
        }
        let ci = self.columns.partition_point(|c| c.offset <= id) - 1;
        let c = &self.columns[ci];
        let i = ci as i32 - self.imax;
        let mut j = (id - c.offset) as i64 - c.b as i64;
        if c.a >= 0 && j >= -(c.a as i64) {
            j += 2 * c.a as i64 + 1;
        }
        Vertex::Plane { i, j: j as i32 }
    }

    /// Vertices of `E_0^k` in id order.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let plane = self.columns.iter().enumerate().flat_map(move |(ci, c)| {
            let i = ci as i32 - self.imax;
            (-c.b..=c.b).filter(move |&j| c.a < 0 || j.abs() > c.a).map(move |j| Vertex::Plane { i, j })
        });
        std::iter::once(Vertex::Star).chain(plane).chain((1..=self.rod_max).map(|n| Vertex::Rod { n }))
    }

    /// Plane vertices of `E_0^k` inside the square `|i|, |j| <= m`, in id order.
    pub fn plane_vertices_within(&self, m: i32) -> impl Iterator<Item = Vertex> + '_ {
        let m = m.min(self.imax);
        (-m..=m).flat_map(move |i| {
            let c = self.columns[(i + self.imax) as usize];
            let hi = c.b.min(m);
            (-hi..=hi).filter(move |&j| c.a < 0 || j.abs() > c.a).map(move |j| Vertex::Plane { i, j })
        })
    }

    /// Plane vertices of `∂E_0^k`, found column by column without a full scan.
    pub fn boundary_plane_vertices(&self) -> Vec<Vertex> {
        let b = |ci: i64| -> i32 {
            if ci < 0 || ci >= self.columns.len() as i64 {
                -1
            } else {
                self.columns[ci as usize].b
            }
        };
        let mut out = Vec::new();
        for ci in 0..self.columns.len() as i64 {
            let c = self.columns[ci as usize];
            let lim = b(ci - 1).min(b(ci + 1)).min(c.b - 1);
            let i = ci as i32 - self.imax;
            let lo = (lim + 1).max(0);
            let js = (-c.b..=-lo).chain((lo.max(1))..=c.b);
            for j in js {
                if c.a < 0 || j.abs() > c.a {
                    out.push(Vertex::Plane { i, j });
                }
            }
        }
        out
    }

    /// Undirected edges of `G_0^k` as id pairs `(a, b)` with `a < b`, ascending.
    pub fn for_each_edge(&self, mut f: impl FnMut(VertexId, Vertex, VertexId, Vertex)) {
        for (a, v) in self.vertices().enumerate() {
            let a = a as VertexId;
            let mut nb = self.neighbors(v, GraphKind::Domain);
            nb.sort_unstable();
            for w in nb {
                let b = self.id(w).expect("domain neighbor has an id");
                if b > a {
                    f(a, v, b, w);
                }
            }
        }
    }

    pub fn num_edges(&self) -> usize {
        let total: usize = self.vertices().map(|v| self.degree(v, GraphKind::Domain)).sum();
        total / 2
    }

    /// Breadth-first connectivity test of `G_0^k`.
    pub fn is_connected(&self) -> bool {
        let n = self.num_vertices();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([Vertex::Star]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v, GraphKind::Domain) {
                let id = self.id(w).unwrap() as usize;
                if !seen[id] {
                    seen[id] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Writes the line-oriented graph dump.
    pub fn dump(&self, out: &mut impl Write) -> Result<()> {
        let p = &self.params;
        writeln!(
            out,
            "# vardimwalk graph k={} eps={} R={} L={} vertices={} edges={}",
            p.k,
            p.eps,
            p.radius,
            p.rod_length,
            self.num_vertices(),
            self.num_edges()
        )?;
        for v in self.vertices() {
            let (tag, a, b) = match v {
                Vertex::Star => ('S', 0, 0),
                Vertex::Plane { i, j } => ('P', i as i64, j as i64),
                Vertex::Rod { n } => ('R', 0, n as i64),
            };
            writeln!(
                out,
                "{tag} {a} {b} {} {} {}",
                self.degree(v, GraphKind::Full),
                self.degree(v, GraphKind::Domain),
                self.flags(v).code()
            )?;
        }
        writeln!(out, "# edges")?;
        let mut res = Ok(());
        self.for_each_edge(|a, _, b, _| {
            if res.is_ok() {
                res = writeln!(out, "{a} {b}");
            }
        });
        res?;
        Ok(())
    }
}

/// Grid steps in neighbor order; direction `d` is undone by `3 - d`.
pub const GRID_DIRS: [(i32, i32); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

/// Bit of [`LatticeGraph::plane_mask`] marking a collapsed disk neighbor.
pub const STAR_BIT: u8 = 1 << 4;

#[inline]
fn norm2(i: i32, j: i32) -> i64 {
    (i as i64) * (i as i64) + (j as i64) * (j as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::geometry::segment_meets_disk;
    use crate::lattice::Rational;
    use std::collections::{BTreeSet, HashMap};

    fn small() -> LatticeParams {
        LatticeParams::standard(3).unwrap()
    }

    /// Independent floating-point enumeration of the Star neighborhood.
    fn star_degree_oracle(k: u32, eps: f64) -> usize {
        let h = (-(k as f64)).exp2();
        let m = (eps / h).ceil() as i32 + 3;
        let mut count = 0;
        for i in -m..=m {
            for j in -m..=m {
                let r = (i as f64 * h).hypot(j as f64 * h);
                if r <= eps + 1e-12 || r > eps + 2.0 * h {
                    continue;
                }
                let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|(a, b)| ((i + a) as f64 * h).hypot((j + b) as f64 * h) <= eps + 1e-12);
                if touches {
                    count += 1;
                }
            }
        }
        count + 1
    }

    #[test]
    fn star_degree_matches_enumeration() {
        for k in 3..=7 {
            let s = StarStructure::new(&LatticeParams::standard(k).unwrap()).unwrap();
            assert_eq!(s.degree(), star_degree_oracle(k, 1.0), "k={k}");
            assert!(s.ring().len() as i64 <= 56 * (1 << k) + 28);
        }
    }

    #[test]
    fn star_has_one_rod_neighbor() {
        let g = LatticeGraph::build(&small()).unwrap();
        let rods: Vec<_> = g.neighbors(Vertex::Star, GraphKind::Full).into_iter().filter(|v| v.is_rod()).collect();
        assert_eq!(rods, vec![Vertex::Rod { n: 1 }]);
    }

    #[test]
    fn ids_roundtrip() {
        let g = LatticeGraph::build(&small()).unwrap();
        for (id, v) in g.vertices().enumerate() {
            assert_eq!(g.id(v), Some(id as VertexId));
            assert_eq!(g.vertex(id as VertexId), v);
        }
        assert_eq!(g.vertices().count(), g.num_vertices());
        let p = LatticeParams::new(4, Rational::new(5, 8), Rational::from_integer(11), Rational::from_integer(11)).unwrap();
        let g = LatticeGraph::build(&p).unwrap();
        for (id, v) in g.vertices().enumerate() {
            assert_eq!(g.vertex(id as VertexId), v);
        }
    }

    #[test]
    fn vertex_order_is_dump_order() {
        let g = LatticeGraph::build(&small()).unwrap();
        let vs: Vec<_> = g.vertices().collect();
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
    }

    /// Explicit adjacency built directly from the edge definitions.
    fn explicit_adjacency(g: &LatticeGraph) -> HashMap<Vertex, BTreeSet<Vertex>> {
        let p = &g.params;
        let mut adj: HashMap<Vertex, BTreeSet<Vertex>> = HashMap::new();
        let m = (p.radius_f64() / p.h()) as i64 + 2;
        let eps2 = p.eps_f64().powi(2);
        let h = p.h();
        let in_disk = |i: i64, j: i64| ((i * i + j * j) as f64) * h * h <= eps2 * (1.0 + 1e-12);
        let r2 = p.radius_f64().powi(2);
        let in_dom = |v: &Vertex| match *v {
            Vertex::Plane { i, j } => ((i as f64 * h).powi(2) + (j as f64 * h).powi(2)) < r2,
            _ => unreachable!(),
        };
        for i in -m..=m {
            for j in -m..=m {
                if in_disk(i, j) {
                    continue;
                }
                let x = Vertex::Plane { i: i as i32, j: j as i32 };
                for (a, b) in [(i + 1, j), (i, j + 1)] {
                    let y = Vertex::Plane { i: a as i32, j: b as i32 };
                    if !in_disk(a, b) && !segment_meets_disk(p, (i, j), (a, b)) && in_dom(&x) && in_dom(&y) {
                        adj.entry(x).or_default().insert(y);
                        adj.entry(y).or_default().insert(x);
                    }
                }
                let touches = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(a, b)| in_disk(i + a, j + b));
                if touches && in_dom(&x) {
                    adj.entry(x).or_default().insert(Vertex::Star);
                    adj.entry(Vertex::Star).or_default().insert(x);
                }
            }
        }
        for n in 1..=g.rod_max() {
            let x = Vertex::Rod { n };
            let prev = if n == 1 { Vertex::Star } else { Vertex::Rod { n: n - 1 } };
            adj.entry(x).or_default().insert(prev);
            adj.entry(prev).or_default().insert(x);
        }
        adj
    }

    #[test]
    fn adjacency_matches_definition() {
        let g = LatticeGraph::build(&small()).unwrap();
        let adj = explicit_adjacency(&g);
        for v in g.vertices() {
            let mine: BTreeSet<_> = g.neighbors(v, GraphKind::Domain).into_iter().collect();
            assert_eq!(mine.len(), g.degree(v, GraphKind::Domain));
            assert_eq!(Some(&mine), adj.get(&v), "{v}");
        }
    }

    #[test]
    fn partition_covers_domain() {
        let g = LatticeGraph::build(&small()).unwrap();
        for v in g.vertices() {
            let f = g.flags(v);
            assert!(f.boundary || f.regular || f.ring || v == Vertex::Star, "{v}");
            // boundary formula: vbar < v and v full
            let full = if v.is_plane() { 4 } else { 2 };
            let by_formula = v != Vertex::Star
                && g.degree(v, GraphKind::Domain) < g.degree(v, GraphKind::Full)
                && g.degree(v, GraphKind::Full) == full;
            assert_eq!(f.boundary, by_formula, "{v}");
        }
        let c = g.classify();
        assert!(!c.boundary.is_empty());
        assert!(c.core.contains(&0));
        assert!(g.is_connected());
    }

    #[test]
    fn boundary_listing_matches_scan() {
        let g = LatticeGraph::build(&small()).unwrap();
        let scan: Vec<_> = g.vertices().filter(|v| v.is_plane() && g.is_boundary(*v)).collect();
        assert_eq!(g.boundary_plane_vertices(), scan);
    }

    #[test]
    fn each_vertex_has_at_most_one_star_edge() {
        let g = LatticeGraph::build(&small()).unwrap();
        for v in g.vertices().filter(|v| *v != Vertex::Star) {
            let stars = g.neighbors(v, GraphKind::Full).iter().filter(|w| **w == Vertex::Star).count();
            assert!(stars <= 1);
        }
    }

    #[test]
    fn edges_avoid_the_disk() {
        let g = LatticeGraph::build(&small()).unwrap();
        let p = g.params.clone();
        g.for_each_edge(|_, v, _, w| {
            if let (Vertex::Plane { i, j }, Vertex::Plane { i: a, j: b }) = (v, w) {
                assert!(!segment_meets_disk(&p, (i as i64, j as i64), (a as i64, b as i64)));
            }
        });
    }

    #[test]
    fn dump_is_deterministic() {
        let g = LatticeGraph::build(&small()).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        g.dump(&mut a).unwrap();
        g.dump(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# vardimwalk graph k=3"));
        let star = lines.next().unwrap();
        let deg = g.star().degree();
        assert_eq!(star, format!("S 0 0 {deg} {deg} -"));
    }
}
