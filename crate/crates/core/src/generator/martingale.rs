use serde::Serialize;

use super::functions::VertexFunction;
use super::operators::{carre_du_champ, generator_at};
use crate::lattice::{LatticeGraph, Vertex};
use crate::measures::JumpKernel;
use crate::walker::Path;

/// Per-path martingale quantities on a time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PathMartingale {
    /// `M_t` at each grid time.
    pub m: Vec<f64>,
    /// `⟨M⟩_t` at each grid time.
    pub qv: Vec<f64>,
    /// Largest `Γf` over the states the path occupied for positive time.
    pub max_rate: f64,
}

/// `M_t = f(X_t) - f(X_0) - ∫_0^t 𝓛̃f(X_s) ds` and `⟨M⟩_t = ∫_0^t Γf(X_s) ds`
/// evaluated exactly on the piecewise-constant path.
pub fn path_martingale(path: &Path, f: &dyn VertexFunction, kernel: &JumpKernel, grid: &[f64]) -> PathMartingale {
    let p = &kernel.graph.params;
    let mut cache: std::collections::HashMap<Vertex, [f64; 3]> = std::collections::HashMap::new();
    integrate(path, grid, |v| {
        *cache.entry(v).or_insert_with(|| [f.at(v, p), generator_at(kernel, f, v), carre_du_champ(kernel, f, v)])
    })
}

fn integrate(path: &Path, grid: &[f64], mut info: impl FnMut(Vertex) -> [f64; 3]) -> PathMartingale {
    let f0 = info(path.states[0])[0];
    let mut out = PathMartingale { m: Vec::with_capacity(grid.len()), qv: Vec::with_capacity(grid.len()), max_rate: 0.0 };
    let (mut drift, mut qv) = (0.0, 0.0);
    let mut l = 0;
    let n = path.states.len();
    let mut prev = 0.0;
    for &t in grid {
        // integrate up to t
        while l < n {
            let a = path.times[l].max(prev);
            let end = path.times.get(l + 1).copied().unwrap_or(f64::INFINITY);
            let b = end.min(t);
            let [_, lf, g] = info(path.states[l]);
            if b > a {
                drift += lf * (b - a);
                qv += g * (b - a);
                out.max_rate = out.max_rate.max(g);
            }
            if end <= t {
                l += 1;
            } else {
                break;
            }
        }
        prev = t;
        let x = path.at(t).expect("martingale diagnostics need unabsorbed paths");
        out.m.push(info(x)[0] - f0 - drift);
        out.qv.push(qv);
    }
    out
}

/// `f`, `𝓛̃f` and `Γf` tabulated at every vertex of `E_0^k`.
pub struct GeneratorTable<'g> {
    graph: &'g LatticeGraph,
    rows: Vec<[f64; 3]>,
}

impl<'g> GeneratorTable<'g> {
    pub fn new(kernel: &JumpKernel<'g>, f: &dyn VertexFunction) -> Self {
        let p = &kernel.graph.params;
        let rows = kernel
            .graph
            .vertices()
            .map(|v| [f.at(v, p), generator_at(kernel, f, v), carre_du_champ(kernel, f, v)])
            .collect();
        Self { graph: kernel.graph, rows }
    }

    pub fn get(&self, v: Vertex) -> [f64; 3] {
        self.rows[self.graph.id(v).expect("vertex outside the domain") as usize]
    }

    /// Same as [`path_martingale`], reading from the table.
    pub fn path_martingale(&self, path: &Path, grid: &[f64]) -> PathMartingale {
        integrate(path, grid, |v| self.get(v))
    }

    /// Largest `Γf` over the table.
    pub fn max_rate(&self) -> f64 {
        self.rows.iter().map(|r| r[2]).fold(0.0, f64::max)
    }
}

/// Aggregated martingale diagnostics over many paths.
#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub grid: Vec<f64>,
    pub paths: u64,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
    pub mean_qv: Vec<f64>,
    /// Largest observed `⟨M⟩_t - ⟨M⟩_s` over `t - s` across grid pairs and paths.
    pub max_grid_rate: f64,
    /// Largest pathwise `Γf` along visited states: the sup of all increment ratios.
    pub max_rate: f64,
    /// Paths whose increments exceed `bound (t - s)` somewhere.
    pub violations: u64,
    pub bound: f64,
}

#[derive(Clone, Debug)]
pub struct MartingaleAccumulator {
    grid: Vec<f64>,
    bound: f64,
    n: u64,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    sum_qv: Vec<f64>,
    max_grid_rate: f64,
    max_rate: f64,
    violations: u64,
}

impl MartingaleAccumulator {
    pub fn new(grid: &[f64], bound: f64) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: grid.to_vec(),
            bound,
            n: 0,
            sum: z.clone(),
            sum_sq: z.clone(),
            sum_qv: z,
            max_grid_rate: 0.0,
            max_rate: 0.0,
            violations: 0,
        }
    }

    pub fn add(&mut self, pm: &PathMartingale) {
        self.n += 1;
        for i in 0..self.grid.len() {
            self.sum[i] += pm.m[i];
            self.sum_sq[i] += pm.m[i] * pm.m[i];
            self.sum_qv[i] += pm.qv[i];
        }
        let mut ts = vec![0.0];
        ts.extend(&self.grid);
        let mut qs = vec![0.0];
        qs.extend(&pm.qv);
        for a in 0..ts.len() {
            for b in a + 1..ts.len() {
                let r = (qs[b] - qs[a]) / (ts[b] - ts[a]);
                self.max_grid_rate = self.max_grid_rate.max(r);
            }
        }
        self.max_rate = self.max_rate.max(pm.max_rate);
        if pm.max_rate > self.bound {
            self.violations += 1;
        }
    }

    pub fn merge(mut self, o: Self) -> Self {
        self.n += o.n;
        for i in 0..self.grid.len() {
            self.sum[i] += o.sum[i];
            self.sum_sq[i] += o.sum_sq[i];
            self.sum_qv[i] += o.sum_qv[i];
        }
        self.max_grid_rate = self.max_grid_rate.max(o.max_grid_rate);
        self.max_rate = self.max_rate.max(o.max_rate);
        self.violations += o.violations;
        self
    }

    pub fn finish(self) -> MartingaleReport {
        let n = self.n as f64;
        let mean: Vec<f64> = self.sum.iter().map(|s| s / n).collect();
        let std_error = self
            .sum_sq
            .iter()
            .zip(&mean)
            .map(|(s2, m)| ((s2 / n - m * m).max(0.0) * n / (n - 1.0).max(1.0) / n).sqrt())
            .collect();
        MartingaleReport {
            grid: self.grid,
            paths: self.n,
            mean,
            std_error,
            mean_qv: self.sum_qv.iter().map(|s| s / n).collect(),
            max_grid_rate: self.max_grid_rate,
            max_rate: self.max_rate,
            violations: self.violations,
            bound: self.bound,
        }
    }
}

/// Mean martingale increments and quadratic-variation bounds over `paths`.
pub fn martingale_diagnostics(
    paths: &[Path],
    f: &dyn VertexFunction,
    kernel: &JumpKernel,
    grid: &[f64],
    bound: f64,
) -> MartingaleReport {
    let mut acc = MartingaleAccumulator::new(grid, bound);
    for p in paths {
        acc.add(&path_martingale(p, f, kernel, grid));
    }
    acc.finish()
}
