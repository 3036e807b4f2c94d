//! Binning and test statistics used by the experiment verdicts.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::lattice::{rho_norm, GraphKind, LatticeGraph, LatticeParams, Vertex};
use crate::measures::MeasureTable;

/// Radial shells of `|x|_rho` on the plane and equal segments on the rod.
/// The darning vertex shares the first rod bin.
#[derive(Clone, Debug)]
pub struct RadialBins {
    plane: usize,
    rod: usize,
    plane_width: f64,
    rod_width: f64,
    eps: f64,
    h: f64,
}

impl RadialBins {
    pub fn new(params: &LatticeParams, plane: usize, rod: usize) -> Self {
        let eps = params.eps_f64();
        Self {
            plane,
            rod,
            plane_width: (params.radius_f64() - eps) / plane as f64,
            rod_width: params.rod_length_f64() / rod as f64,
            eps,
            h: params.h(),
        }
    }

    pub fn len(&self) -> usize {
        self.plane + self.rod
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bin(&self, v: Vertex) -> usize {
        match v {
            Vertex::Star => self.plane,
            Vertex::Plane { .. } => {
                let r = rho_norm(v.point(self.h), self.eps).expect("lattice vertices lie in the state space");
                ((r / self.plane_width) as usize).min(self.plane - 1)
            }
            Vertex::Rod { n } => self.plane + ((n as f64 * self.h / self.rod_width) as usize).min(self.rod - 1),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        let p = (0..self.plane).map(|b| format!("plane[{:.3},{:.3})", b as f64 * self.plane_width, (b + 1) as f64 * self.plane_width));
        let r = (0..self.rod).map(|b| format!("rod[{:.3},{:.3})", b as f64 * self.rod_width, (b + 1) as f64 * self.rod_width));
        p.chain(r).collect()
    }

    /// Normalized `m̄_k` mass of each bin over the vertices accepted by `keep`.
    pub fn masses(&self, graph: &LatticeGraph, keep: impl Fn(Vertex) -> bool) -> Vec<f64> {
        let mt = MeasureTable::new(graph);
        let mut q = vec![0u128; self.len()];
        for v in graph.vertices().filter(|&v| keep(v)) {
            q[self.bin(v)] += mt.quanta(v, GraphKind::Domain) as u128;
        }
        let total: u128 = q.iter().sum();
        q.iter().map(|&x| x as f64 / total as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

/// Hotelling's T² test of `E[X] = mu` from `n` vectors summarised by their
/// sums and sums of outer products. The last coordinate is dropped when the
/// vectors sum to one, which makes the covariance singular.
#[derive(Clone, Debug)]
pub struct VectorMoments {
    pub n: u64,
    sum: Vec<f64>,
    outer: Vec<f64>,
}

impl VectorMoments {
    pub fn new(dim: usize) -> Self {
        Self { n: 0, sum: vec![0.0; dim], outer: vec![0.0; dim * dim] }
    }

    pub fn add(&mut self, x: &[f64]) {
        let d = self.sum.len();
        self.n += 1;
        for a in 0..d {
            self.sum[a] += x[a];
            for b in 0..d {
                self.outer[a * d + b] += x[a] * x[b];
            }
        }
    }

    pub fn merge(mut self, o: Self) -> Self {
        self.n += o.n;
        self.sum.iter_mut().zip(&o.sum).for_each(|(a, b)| *a += b);
        self.outer.iter_mut().zip(&o.outer).for_each(|(a, b)| *a += b);
        self
    }

    pub fn mean(&self) -> Vec<f64> {
        self.sum.iter().map(|s| s / self.n as f64).collect()
    }

    /// Unbiased covariance of the first `dim` coordinates.
    fn covariance(&self, dim: usize) -> DMatrix<f64> {
        let d = self.sum.len();
        let n = self.n as f64;
        let m = self.mean();
        DMatrix::from_fn(dim, dim, |a, b| (self.outer[a * d + b] - n * m[a] * m[b]) / (n - 1.0))
    }

    pub fn hotelling(&self, mu: &[f64], drop_last: bool) -> Result<TestOutcome> {
        let p = self.sum.len() - usize::from(drop_last);
        let n = self.n as f64;
        if self.n as usize <= p + 1 {
            return Err(Error::Empty(format!("{} samples for dimension {p}", self.n)));
        }
        let m = self.mean();
        let diff = DVector::from_fn(p, |a, _| m[a] - mu[a]);
        let chol = self
            .covariance(p)
            .cholesky()
            .ok_or_else(|| Error::Empty("singular sample covariance".into()))?;
        let t2 = n * diff.dot(&chol.solve(&diff));
        let f = (n - p as f64) / (p as f64 * (n - 1.0)) * t2;
        let dist = FisherSnedecor::new(p as f64, n - p as f64).expect("valid degrees of freedom");
        Ok(TestOutcome { statistic: t2, df: p as f64, p_value: dist.sf(f) })
    }
}

/// Two-sample chi-square homogeneity test on count vectors. Cells whose
/// pooled count is below `min_pooled` are merged into one.
pub fn chi2_homogeneity(a: &[u64], b: &[u64], min_pooled: u64) -> TestOutcome {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut rest = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        if x + y >= min_pooled {
            cells.push((x as f64, y as f64));
        } else {
            rest.0 += x as f64;
            rest.1 += y as f64;
        }
    }
    if rest.0 + rest.1 > 0.0 {
        cells.push(rest);
    }
    let n = na + nb;
    let mut stat = 0.0;
    for &(x, y) in &cells {
        let pooled = (x + y) / n;
        let (ea, eb) = (pooled * na, pooled * nb);
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let df = (cells.len() as f64 - 1.0).max(1.0);
    let p = ChiSquared::new(df).expect("positive df").sf(stat);
    TestOutcome { statistic: stat, df, p_value: p }
}

/// Unbiased estimate of `sum_b (P[A = b] - P[B = b])^2` from paired
/// categorical samples, with a standard error from the variance of the
/// underlying U-statistic.
pub fn paired_l2(a: &[u32], b: &[u32], bins: usize) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut s = vec![0.0; bins];
    let mut q = vec![0.0; bins];
    for (&x, &y) in a.iter().zip(b) {
        if x != y {
            s[x as usize] += 1.0;
            s[y as usize] -= 1.0;
            q[x as usize] += 1.0;
            q[y as usize] += 1.0;
        }
    }
    let mut est = 0.0;
    let mut var = 0.0;
    for bin in 0..bins {
        est += (s[bin] * s[bin] - q[bin]) / (n * (n - 1.0));
        // first-order term, plus the second-order one that dominates when
        // the two laws nearly agree
        let (m, r) = (s[bin] / n, q[bin] / n);
        var += 4.0 * m * m * (r - m * m) / n + 2.0 * r * r / (n * n);
    }
    (est, var.sqrt())
}

/// Running mean and variance (Welford), mergeable.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn add(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64,
        }
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        self.m2 / (self.n as f64 - 1.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// 3-standard-error half-width for a difference of two independent proportions.
pub fn proportion_band(p: f64, n: u64, q: f64, m: u64) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64 + q * (1.0 - q) / m as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walker::RngStream;

    #[test]
    fn welford_matches_two_pass() {
        let xs: Vec<f64> = (0..101).map(|i| ((i * 37) % 17) as f64 * 0.5 - 3.0).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let (mut a, mut b) = (Moments::default(), Moments::default());
        for (i, &x) in xs.iter().enumerate() {
            if i % 3 == 0 {
                a.add(x)
            } else {
                b.add(x)
            }
        }
        let m = a.merge(b);
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn chi2_identical_counts() {
        // the two sparse cells are pooled into one, which then matches
        let t = chi2_homogeneity(&[50, 30, 20, 1, 0], &[50, 30, 20, 0, 1], 5);
        assert_eq!(t.statistic, 0.0);
        assert_eq!(t.df, 3.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        let t = chi2_homogeneity(&[60, 40], &[40, 60], 5);
        // pooled 1/2 each: four cells of (10^2 / 50)
        assert!((t.statistic - 8.0).abs() < 1e-12);
        assert!(t.p_value < 0.01);
    }

    #[test]
    fn hotelling_detects_shift() {
        let mut rng = RngStream::new(4, 0);
        let mut m = VectorMoments::new(3);
        for _ in 0..2000 {
            let (a, b) = (rng.uniform(), rng.uniform());
            let x = [a * 0.5, b * 0.3, 1.0 - a * 0.5 - b * 0.3];
            m.add(&x);
        }
        let ok = m.hotelling(&[0.25, 0.15, 0.6], true).unwrap();
        assert!(ok.p_value > 0.001, "{ok:?}");
        let bad = m.hotelling(&[0.27, 0.15, 0.58], true).unwrap();
        assert!(bad.p_value < 1e-6, "{bad:?}");
    }

    #[test]
    fn paired_l2_unbiased_on_known_shift() {
        // A uniform on {0,1}; B = A except that 10% of the zeros become 2
        let mut rng = RngStream::new(8, 0);
        let n = 200_000;
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for _ in 0..n {
            let x = rng.below(2) as u32;
            let y = if x == 0 && rng.uniform() < 0.1 { 2 } else { x };
            a.push(x);
            b.push(y);
        }
        // exact: (0.05)^2 + 0 + (0.05)^2
        let (est, se) = paired_l2(&a, &b, 3);
        assert!((est - 0.005).abs() < 4.0 * se, "{est} {se}");
        let (zero, _) = paired_l2(&a, &a, 3);
        assert_eq!(zero, 0.0);
    }

    #[test]
    fn bins_cover_domain() {
        let p = LatticeParams::standard(3).unwrap();
        let g = LatticeGraph::build(&p).unwrap();
        let bins = RadialBins::new(&p, 5, 4);
        assert_eq!(bins.labels().len(), 9);
        let m = bins.masses(&g, |_| true);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.iter().all(|&x| x > 0.0));
        assert_eq!(bins.bin(Vertex::Rod { n: g.rod_max() }), 8);
        assert_eq!(bins.bin(Vertex::Plane { i: 9, j: 0 }), 0);
    }
}
