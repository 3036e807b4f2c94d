use std::io::Write;

use serde::Serialize;

use super::{quanta, MeasureTable};
use crate::error::Result;
use crate::lattice::{GraphKind, LatticeGraph, Local, Rational, Vertex, GRID_DIRS, STAR_BIT};

/// `Full` is the road map `j_k` of `G^k`; `Reflected` is `j̃_k` on `G_0^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelVariant {
    Full,
    Reflected,
}

impl KernelVariant {
    pub fn graph_kind(self) -> GraphKind {
        match self {
            KernelVariant::Full => GraphKind::Full,
            KernelVariant::Reflected => GraphKind::Domain,
        }
    }
}

/// Jump kernel with constant speed `4^k`.
///
/// Probabilities are exact: each row is a set of integer weights over a
/// common denominator. Non-Star rows are uniform; the Star row gives weight
/// `2^(k+1)` to its rod neighbor and `1` to each plane neighbor.
#[derive(Clone, Copy, Debug)]
pub struct JumpKernel<'g> {
    pub graph: &'g LatticeGraph,
    pub variant: KernelVariant,
}

impl<'g> JumpKernel<'g> {
    pub fn new(graph: &'g LatticeGraph, variant: KernelVariant) -> Self {
        Self { graph, variant }
    }

    pub fn lambda(&self) -> f64 {
        self.graph.params.lambda()
    }

    pub fn kind(&self) -> GraphKind {
        self.variant.graph_kind()
    }

    /// Weight `2^(k+1)` of the Star-to-rod move.
    pub fn star_rod_weight(&self) -> u64 {
        1u64 << (self.graph.params.k + 1)
    }

    /// Common denominator of the row at `x`.
    #[inline]
    pub fn denom(&self, x: Vertex) -> u64 {
        let d = self.graph.degree(x, self.kind()) as u64;
        match x {
            Vertex::Star => d + self.star_rod_weight() - 1,
            _ => d,
        }
    }

    /// Integer weight of `y` in the row at `x` (0 if not adjacent).
    pub fn weight(&self, x: Vertex, y: Vertex) -> u64 {
        match x {
            Vertex::Star => match y {
                Vertex::Rod { n: 1 } => self.star_rod_weight(),
                Vertex::Plane { .. } if self.graph.star().ring().binary_search(&y).is_ok() => 1,
                _ => 0,
            },
            _ => self.graph.local(x, self.kind()).as_slice().contains(&y) as u64,
        }
    }

    pub fn prob(&self, x: Vertex, y: Vertex) -> Rational {
        Rational::new(self.weight(x, y) as i64, self.denom(x) as i64)
    }

    /// `(neighbor, probability)` pairs of the row at `x`, in neighbor order.
    pub fn row(&self, x: Vertex) -> Vec<(Vertex, Rational)> {
        self.graph.neighbors(x, self.kind()).into_iter().map(|y| (y, self.prob(x, y))).collect()
    }

    /// Row sum as an exact rational.
    pub fn row_sum(&self, x: Vertex) -> Rational {
        let num: u64 = self.graph.neighbors(x, self.kind()).into_iter().map(|y| self.weight(x, y)).sum();
        Rational::new(num as i64, self.denom(x) as i64)
    }

    /// CSV dump of all rows on `E_0^k`: `vertex,id,prob`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "vertex,id,prob")?;
        for x in self.graph.vertices() {
            for (y, p) in self.row(x) {
                let id = self.graph.id(y).map(|i| i.to_string()).unwrap_or_else(|| "ext".into());
                writeln!(out, "{x},{id},{p}")?;
            }
        }
        Ok(())
    }
}

/// Outcome of the detailed-balance scan.
#[derive(Clone, Debug, Serialize)]
pub struct BalanceReport {
    pub variant: KernelVariant,
    pub oriented_edges: u64,
    /// Largest `|j(x,y) m0(x) - j(y,x) m0(y)|`, exact.
    pub max_violation: String,
    pub exact_zero: bool,
    /// Largest relative violation in double precision.
    pub max_relative_float: f64,
    /// Distinct flux values seen on plane-type and rod-type edges.
    pub plane_flux: Vec<String>,
    pub rod_flux: Vec<String>,
    pub max_row_sum_error: String,
}

/// Row data of one vertex: neighbors, measure quanta and row denominator.
struct RowData<'a> {
    local: Option<Local>,
    star: &'a [Vertex],
    quanta: u64,
    denom: u64,
}

impl RowData<'_> {
    fn neighbors(&self) -> &[Vertex] {
        self.local.as_ref().map_or(self.star, Local::as_slice)
    }
}

fn row_data<'a>(kernel: &JumpKernel, star: &'a [Vertex], x: Vertex) -> RowData<'a> {
    let k = kernel.graph.params.k;
    let local = (x != Vertex::Star).then(|| kernel.graph.local(x, kernel.kind()));
    let deg = local.as_ref().map_or(star.len(), Local::len);
    let denom = match x {
        Vertex::Star => deg as u64 + kernel.star_rod_weight() - 1,
        _ => deg as u64,
    };
    RowData { local, star, quanta: quanta(k, x, deg), denom }
}

/// Integer weight of `y` in the row `r` of `x`.
fn row_weight(kernel: &JumpKernel, x: Vertex, r: &RowData, y: Vertex) -> u64 {
    match (x, y) {
        (Vertex::Star, Vertex::Rod { n: 1 }) => kernel.star_rod_weight(),
        (Vertex::Star, _) => kernel.graph.star().ring().binary_search(&y).is_ok() as u64,
        _ => r.neighbors().contains(&y) as u64,
    }
}

/// Flux `j(x,y) m0(x)` as an exact fraction `num / den`.
#[cfg(test)]
fn flux(kernel: &JumpKernel, measures: &MeasureTable, x: Vertex, y: Vertex) -> (u64, u64) {
    let q = measures.quanta(x, kernel.kind());
    (kernel.weight(x, y) * q, kernel.denom(x) * 4)
}

fn reduce(n: u64, d: u64) -> Rational {
    let g = num_integer::gcd(n, d);
    Rational::new((n / g) as i64, (d / g) as i64)
}

/// Distinct reduced fractions, skipping the reduction when a value repeats
/// the previous one.
#[derive(Default)]
struct FluxSet {
    seen: std::collections::BTreeSet<(u64, u64)>,
    last: (u64, u64),
}

impl FluxSet {
    fn insert(&mut self, a: u64, b: u64) {
        if a * self.last.1 == self.last.0 * b && self.last.1 != 0 {
            return;
        }
        let g = num_integer::gcd(a, b);
        self.last = (a / g, b / g);
        self.seen.insert(self.last);
    }

    fn show(&self) -> Vec<String> {
        self.seen.iter().map(|&(n, d)| reduce(n, d).to_string()).collect()
    }
}

/// Running maxima and flux values of the balance scan.
struct Scan {
    edges: u64,
    max_num: u64,
    max_den: u64,
    max_rel: f64,
    plane: FluxSet,
    rod: FluxSet,
}

impl Scan {
    /// Checks the edge `{x, y}` in both orientations.
    #[inline]
    fn edge(&mut self, kernel: &JumpKernel, x: Vertex, rx: &RowData, y: Vertex, ry: &RowData, inside: bool) {
        self.edges += 1 + u64::from(inside);
        // flux j(x,y) m0(x) = a / b, and the reverse c / d
        let (a, b) = (row_weight(kernel, x, rx, y) * rx.quanta, rx.denom * 4);
        let (c, d) = (row_weight(kernel, y, ry, x) * ry.quanta, ry.denom * 4);
        self.compare(a, b, c, d);
        if x.is_rod() || y.is_rod() {
            self.rod.insert(a, b);
        } else {
            self.plane.insert(a, b);
        }
    }
}

impl Scan {
    /// A plane-plane edge: forward weight 1, reverse weight `back`.
    #[inline]
    fn plane_edge(&mut self, rx: &RowData, ry: &RowData, back: u64, inside: bool) {
        self.edges += 1 + u64::from(inside);
        let (a, b) = (rx.quanta, rx.denom * 4);
        let (c, d) = (back * ry.quanta, ry.denom * 4);
        self.compare(a, b, c, d);
        self.plane.insert(a, b);
    }

    #[inline]
    fn compare(&mut self, a: u64, b: u64, c: u64, d: u64) {
        let diff = (a * d).abs_diff(c * b);
        if diff != 0 && diff as u128 * self.max_den as u128 > self.max_num as u128 * (b * d) as u128 {
            self.max_num = diff;
            self.max_den = b * d;
        }
        // the same comparison in double precision, cross-multiplied
        let (fa, fc) = (a as f64 * d as f64, c as f64 * b as f64);
        if fa != fc {
            self.max_rel = self.max_rel.max((fa - fc).abs() / fa.max(fc));
        }
    }
}

/// Scans every oriented edge incident to `E_0^k` and checks the symmetry of
/// `j(x,y) m_{0}(x)`, using `m_k` for the full kernel and `m̄_k` for the
/// reflected one.
///
/// The violation is symmetric, so each edge inside `E_0^k` is checked once
/// from its smaller end. Plane rows are read from neighborhood masks; being
/// uniform over the degree they sum to one by construction, so the row-sum
/// check covers the Star and rod rows.
pub fn detailed_balance_violation(kernel: &JumpKernel, measures: &MeasureTable) -> BalanceReport {
    debug_assert!(std::ptr::eq(kernel.graph, measures.graph()));
    let g = kernel.graph;
    let mut scan = Scan { edges: 0, max_num: 0, max_den: 1, max_rel: 0.0, plane: FluxSet::default(), rod: FluxSet::default() };
    let mut row_err = Rational::from_integer(0);
    let mut row_check = |x: Vertex, r: &RowData| {
        let sum: u64 = r.neighbors().iter().map(|&y| row_weight(kernel, x, r, y)).sum();
        if sum != r.denom {
            row_err = row_err.max(Rational::new(sum.abs_diff(r.denom) as i64, r.denom as i64));
        }
    };
    // the Star row lists the rod neighbor too
    let star = g.neighbors(Vertex::Star, kernel.kind());

    let rs = row_data(kernel, &star, Vertex::Star);
    row_check(Vertex::Star, &rs);
    for &y in rs.neighbors() {
        scan.edge(kernel, Vertex::Star, &rs, y, &row_data(kernel, &star, y), true);
    }

    // Plane rows from neighborhood masks, cached one column ahead. A plane
    // vertex weighs its degree in quanta and its row is uniform, so the
    // reverse weight of a plane edge is the mirrored bit of the other mask.
    let kind = kernel.kind();
    let imax = g.params.plane_max().isqrt() as i32;
    let column = |i: i32| -> Vec<u8> {
        (-imax..=imax)
            .map(|j| if g.in_domain(Vertex::Plane { i, j }) { g.plane_mask(i, j, kind) } else { 0 })
            .collect()
    };
    let degree = |m: u8| (m & 15).count_ones() as u64 + u64::from(m & STAR_BIT != 0);
    let mut next = column(-imax);
    for i in -imax..=imax {
        let cur = std::mem::replace(&mut next, if i < imax { column(i + 1) } else { Vec::new() });
        for (jx, &mx) in cur.iter().enumerate() {
            if mx == 0 {
                continue;
            }
            let j = jx as i32 - imax;
            let dx = degree(mx);
            let rx = RowData { local: None, star: &[], quanta: dx, denom: dx };
            for (d, (di, dj)) in GRID_DIRS.iter().enumerate() {
                if mx & (1 << d) == 0 {
                    continue;
                }
                let (yi, yj) = (i + di, j + dj);
                let inside = g.in_domain(Vertex::Plane { i: yi, j: yj });
                let my = match (d, inside) {
                    (2, true) => cur[jx + 1],
                    (3, true) => next[jx],
                    (_, true) => continue,
                    (_, false) => g.plane_mask(yi, yj, kind),
                };
                let dy = degree(my);
                let ry = RowData { local: None, star: &[], quanta: dy, denom: dy };
                let back = u64::from(my & (1 << (3 - d)) != 0);
                scan.plane_edge(&rx, &ry, back, inside);
            }
        }
    }

    for n in 1..=g.rod_max() {
        let x = Vertex::Rod { n };
        let rx = row_data(kernel, &star, x);
        row_check(x, &rx);
        for &y in rx.neighbors() {
            let inside = g.in_domain(y);
            if y > x || !inside {
                scan.edge(kernel, x, &rx, y, &row_data(kernel, &star, y), inside);
            }
        }
    }

    BalanceReport {
        variant: kernel.variant,
        oriented_edges: scan.edges,
        max_violation: reduce(scan.max_num, scan.max_den).to_string(),
        exact_zero: scan.max_num == 0,
        max_relative_float: scan.max_rel,
        plane_flux: scan.plane.show(),
        rod_flux: scan.rod.show(),
        max_row_sum_error: row_err.to_string(),
    }
}
