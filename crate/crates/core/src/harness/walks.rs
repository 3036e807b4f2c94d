//! Monte Carlo experiments on simulated walks.

use num_rational::Ratio;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{Metric, Report, Table};
use super::stats::{chi2_homogeneity, paired_l2, proportion_band, Moments, RadialBins, VectorMoments};
use crate::error::{Error, Result};
use crate::generator::{canonical_test_functions, GeneratorTable, MartingaleAccumulator, Projection, VertexFunction};
use crate::lattice::{GraphKind, LatticeGraph, LatticeParams, Rational, Vertex};
use crate::measures::{JumpKernel, KernelVariant, MeasureTable};
use crate::walker::{
    map_reduce, resurrect_inw, simulate_killed, simulate_reflected, time_reverse, w_rho_exceeds, Path, RngStream,
    StartDistribution,
};

/// Independent seed for one role inside an experiment.
fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

const PLANE_BINS: usize = 5;
const ROD_BINS: usize = 4;

/// Bound on `Γf_i` from the tightness argument.
const QV_BOUND: f64 = 81.0;

/// Paths for the modulus estimate; it is the slowest diagnostic per path.
pub const MODULUS_PATHS: u64 = 10_000;

fn observation_grid(c: &ExperimentConfig) -> Vec<f64> {
    let mut g = c.times.clone();
    if g.is_empty() {
        g = (1..=4).map(|i| c.t_max * i as f64 / 4.0).collect();
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.last() != Some(&c.t_max) {
        g.push(c.t_max);
    }
    g
}

/// Martingale mean, quadratic-variation bound and time reversal for the
/// stationary reflected walk.
pub fn reversal(c: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let g = LatticeGraph::build(&c.params(c.k_min)?)?;
    let kern = JumpKernel::new(&g, KernelVariant::Reflected);
    let start = StartDistribution::m_bar(&g);
    let grid = observation_grid(c);
    let t = c.t_max;
    let bins = RadialBins::new(&g.params, PLANE_BINS, ROD_BINS);
    let nb = bins.len();

    let canon = canonical_test_functions(&g.params);
    let mut funcs: Vec<(String, &dyn VertexFunction)> = Vec::new();
    let projections = [Projection(1), Projection(2), Projection(3)];
    for p in &projections {
        funcs.push((format!("f{}", p.0), p));
    }
    for f in &canon {
        funcs.push((f.name.to_string(), f));
    }
    let tables: Vec<GeneratorTable> = funcs.iter().map(|(_, f)| GeneratorTable::new(&kern, *f)).collect();

    struct Acc {
        mart: Vec<MartingaleAccumulator>,
        forward: Vec<u64>,
        reversed: Vec<u64>,
    }
    let (s, u) = (t / 4.0, 3.0 * t / 4.0);
    let acc = report.timed("reversal walks", None, || {
        map_reduce(
            c.paths,
            sub_seed(c.seed, 1),
            || Acc {
                mart: tables.iter().map(|_| MartingaleAccumulator::new(&grid, QV_BOUND)).collect(),
                forward: vec![0; nb * nb],
                reversed: vec![0; nb * nb],
            },
            |a, i, rng| {
                let x0 = start.sample(&g, rng);
                let path = simulate_reflected(&kern, x0, t, rng).expect("start lies in the domain");
                for (m, tab) in a.mart.iter_mut().zip(&tables) {
                    m.add(&tab.path_martingale(&path, &grid));
                }
                let (target, p) = if i % 2 == 0 {
                    (&mut a.forward, path)
                } else {
                    (&mut a.reversed, time_reverse(&path, t).expect("reflected paths live to the horizon"))
                };
                let cell = bins.bin(p.at(s).unwrap()) * nb + bins.bin(p.at(u).unwrap());
                target[cell] += 1;
            },
            |mut a, b| {
                a.mart = a.mart.into_iter().zip(b.mart).map(|(x, y)| x.merge(y)).collect();
                a.forward.iter_mut().zip(&b.forward).for_each(|(x, y)| *x += y);
                a.reversed.iter_mut().zip(&b.reversed).for_each(|(x, y)| *x += y);
                a
            },
        )
    });

    let mut table = Table::new("martingale", &["f", "t", "mean", "std_error", "mean_qv", "max_rate"]);
    for ((name, _), (m, tab)) in funcs.iter().zip(acc.mart.into_iter().zip(&tables)) {
        let r = m.finish();
        let last = r.grid.len() - 1;
        let z = r.mean[last] / r.std_error[last];
        let pre = format!("reversal.{name}");
        let mut mm = Metric::near(format!("{pre}.mean_at_t"), r.mean[last], 0.0, 3.0 * r.std_error[last]);
        mm.tolerance = format!("|mean| <= 3 SE = {}", 3.0 * r.std_error[last]);
        report.push(mm);
        report.push(Metric::info(format!("{pre}.z"), z));
        if name.starts_with('f') && name.len() == 2 {
            report.push(Metric::at_most(format!("{pre}.qv_violations"), r.violations as f64, 0.0));
            report.push(Metric::at_most(format!("{pre}.max_rate"), r.max_rate, QV_BOUND));
            report.push(Metric::info(format!("{pre}.table_max_rate"), tab.max_rate()));
        }
        for (l, &gt) in r.grid.iter().enumerate() {
            table.push(vec![
                name.clone(),
                gt.to_string(),
                r.mean[l].to_string(),
                r.std_error[l].to_string(),
                r.mean_qv[l].to_string(),
                r.max_rate.to_string(),
            ]);
        }
    }
    report.tables.push(table);

    let test = chi2_homogeneity(&acc.forward, &acc.reversed, 10);
    report.push(Metric::at_least("reversal.time_reversal.p_value", test.p_value, 0.01));
    report.push(Metric::info("reversal.time_reversal.statistic", test.statistic));
    report.push(Metric::info("reversal.time_reversal.df", test.df));
    Ok(())
}

/// Exact check that the normalized `m̄_k` is invariant for the reflected
/// jump chain: `Σ_x q(x) w(x,y) / den(x) = q(y)` for every `y`.
pub fn exact_balance_solve(kernel: &JumpKernel) -> (u64, u64) {
    let g = kernel.graph;
    let mt = MeasureTable::new(g);
    let kind = kernel.kind();
    let mut bad = 0;
    let mut checked = 0;
    for y in g.vertices() {
        let mut s = Ratio::<i128>::from_integer(0);
        for x in g.neighbors(y, kind) {
            s += Ratio::new(
                mt.quanta(x, GraphKind::Domain) as i128 * kernel.weight(x, y) as i128,
                kernel.denom(x) as i128,
            );
        }
        checked += 1;
        if s != Ratio::from_integer(mt.quanta(y, GraphKind::Domain) as i128) {
            bad += 1;
        }
    }
    (checked, bad)
}

/// Occupation fractions of the stationary reflected walk against `m̄_k`.
pub fn occupation(c: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let g = LatticeGraph::build(&c.params(c.k_min)?)?;
    let kern = JumpKernel::new(&g, KernelVariant::Reflected);
    let start = StartDistribution::m_bar(&g);
    let bins = RadialBins::new(&g.params, PLANE_BINS, ROD_BINS);
    let nb = bins.len();
    let t = c.t_max;
    let target = bins.masses(&g, |_| true);

    let (checked, bad) = report.timed("balance solve", None, || exact_balance_solve(&kern));
    report.push(Metric::at_most("occupation.balance_solve.violations", bad as f64, 0.0));
    report.push(Metric::info("occupation.balance_solve.vertices", checked as f64));

    let acc = report.timed("occupation walks", None, || {
        map_reduce(
            c.paths,
            sub_seed(c.seed, 2),
            || VectorMoments::new(nb),
            |a, _, rng| {
                let x0 = start.sample(&g, rng);
                let path = simulate_reflected(&kern, x0, t, rng).expect("start lies in the domain");
                let mut occ = vec![0.0; nb];
                for (s, e, v) in path.segments_until(t) {
                    occ[bins.bin(v)] += e - s;
                }
                occ.iter_mut().for_each(|x| *x /= t);
                a.add(&occ);
            },
            VectorMoments::merge,
        )
    });
    let test = acc.hotelling(&target, true)?;
    report.push(Metric::at_least("occupation.p_value", test.p_value, 0.01));
    report.push(Metric::info("occupation.t2", test.statistic));
    report.push(Metric::info("occupation.df", test.df));
    let mean = acc.mean();
    let mut table = Table::new("occupation", &["bin", "empirical", "m_bar"]);
    for (l, label) in bins.labels().into_iter().enumerate() {
        table.push(vec![label, mean[l].to_string(), target[l].to_string()]);
    }
    report.tables.push(table);
    Ok(())
}

/// Resurrected killed walk against the reflected walk.
pub fn resurrection(c: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let g = LatticeGraph::build(&c.params(c.k_min)?)?;
    let full = JumpKernel::new(&g, KernelVariant::Full);
    let refl = JumpKernel::new(&g, KernelVariant::Reflected);
    let start = StartDistribution::m_bar_interior(&g);
    let radial = RadialBins::new(&g.params, PLANE_BINS, ROD_BINS);
    let (layer_bin, boundary_bin) = (radial.len(), radial.len() + 1);
    let nb = radial.len() + 2;
    let bin = |v: Vertex| {
        if g.is_boundary(v) {
            boundary_bin
        } else if g.neighbors(v, GraphKind::Domain).into_iter().any(|w| g.is_boundary(w)) {
            layer_bin
        } else {
            radial.bin(v)
        }
    };
    let grid = observation_grid(c);
    let t = c.t_max;
    let count = |resurrect: bool, tag: u64| {
        map_reduce(
            c.paths,
            sub_seed(c.seed, tag),
            || vec![0u64; nb * grid.len()],
            |a, _, rng| {
                let x0 = start.sample(&g, rng);
                let p = if resurrect { resurrect_inw(&full, x0, t, rng) } else { simulate_reflected(&refl, x0, t, rng) };
                let p = p.expect("interior start");
                for (l, &s) in grid.iter().enumerate() {
                    a[l * nb + bin(p.at(s).unwrap())] += 1;
                }
            },
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        )
    };
    let inw = report.timed("resurrected walks", None, || count(true, 3));
    let rfl = report.timed("reflected walks", None, || count(false, 4));

    let n = c.paths;
    let mut labels = radial.labels();
    labels.push("boundary_layer".into());
    labels.push("boundary".into());
    let mut table = Table::new("resurrection", &["t", "bin", "resurrected", "reflected", "band"]);
    for (l, &s) in grid.iter().enumerate() {
        for b in 0..nb {
            let p = inw[l * nb + b] as f64 / n as f64;
            let q = rfl[l * nb + b] as f64 / n as f64;
            let band = proportion_band(p, n, q, n);
            let name = format!("resurrection.t{s}.{}", labels[b]);
            if b < radial.len() {
                let mut m = Metric::near(name, p - q, 0.0, band);
                m.tolerance = format!("|diff| <= 3 SE = {band}");
                report.push(m);
            } else {
                report.push(Metric::info(format!("{name}.diff"), p - q));
                report.push(Metric::info(format!("{name}.band"), band));
            }
            table.push(vec![s.to_string(), labels[b].clone(), p.to_string(), q.to_string(), band.to_string()]);
        }
    }
    report.tables.push(table);
    report.notes.push(
        "the resurrected walk never occupies the boundary; boundary and boundary-layer bins are reported, not judged".into(),
    );
    Ok(())
}

/// Which component a variance profile follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Rod,
    Plane,
}

/// Displacement variance at one time among paths still inside the window.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceRow {
    pub t: f64,
    pub survivors: u64,
    /// Rod: the only coordinate. Plane: horizontal.
    pub var_x: f64,
    pub var_y: f64,
    /// Standard error of the variance estimate, `var sqrt(2 / (n - 1))`.
    pub se_x: f64,
    pub se_y: f64,
    /// Fewer than [`MIN_SURVIVORS`] paths remained.
    pub widened: bool,
}

pub const MIN_SURVIVORS: u64 = 100;

/// Streaming form of [`variance_profile`].
#[derive(Clone, Debug)]
pub struct VarianceAccumulator {
    component: Component,
    h: f64,
    window: f64,
    times: Vec<f64>,
    x: Vec<Moments>,
    y: Vec<Moments>,
}

fn coords(v: Vertex, h: f64, component: Component) -> Option<(f64, f64)> {
    match (v, component) {
        (Vertex::Rod { n }, Component::Rod) => Some((n as f64 * h, 0.0)),
        (Vertex::Plane { i, j }, Component::Plane) => Some((i as f64 * h, j as f64 * h)),
        _ => None,
    }
}

impl VarianceAccumulator {
    /// Paths count at `t` while every coordinate stays within `window` of
    /// the start up to `t`.
    pub fn new(component: Component, params: &LatticeParams, window: f64, times: &[f64]) -> Self {
        Self {
            component,
            h: params.h(),
            window,
            times: times.to_vec(),
            x: vec![Moments::default(); times.len()],
            y: vec![Moments::default(); times.len()],
        }
    }

    pub fn add(&mut self, path: &Path) {
        let c = self.component;
        let Some((x0, y0)) = coords(path.states[0], self.h, c) else { return };
        let inside = |v: Vertex| coords(v, self.h, c).filter(|(x, y)| (x - x0).abs() < self.window && (y - y0).abs() < self.window);
        // first time the path leaves the window
        let exit = path
            .states
            .iter()
            .zip(&path.times)
            .find(|(v, _)| inside(**v).is_none())
            .map_or(f64::INFINITY, |(_, &t)| t);
        for (l, &t) in self.times.iter().enumerate() {
            if t >= exit || path.is_absorbed_by(t) {
                continue;
            }
            let (x, y) = inside(path.at(t).unwrap()).unwrap();
            self.x[l].add(x - x0);
            self.y[l].add(y - y0);
        }
    }

    pub fn merge(mut self, o: Self) -> Self {
        for l in 0..self.times.len() {
            self.x[l] = self.x[l].merge(o.x[l]);
            self.y[l] = self.y[l].merge(o.y[l]);
        }
        self
    }

    pub fn finish(&self) -> Vec<VarianceRow> {
        self.times
            .iter()
            .enumerate()
            .map(|(l, &t)| {
                let n = self.x[l].n;
                let (vx, vy) = (self.x[l].variance(), self.y[l].variance());
                let f = (2.0 / (n as f64 - 1.0)).sqrt();
                VarianceRow { t, survivors: n, var_x: vx, var_y: vy, se_x: vx * f, se_y: vy * f, widened: n < MIN_SURVIVORS }
            })
            .collect()
    }
}

/// Variance of the coordinate displacement at each of `times` over paths
/// that stay within `window` of their start on `component` up to that time.
pub fn variance_profile(paths: &[Path], params: &LatticeParams, component: Component, window: f64, times: &[f64]) -> Vec<VarianceRow> {
    let mut acc = VarianceAccumulator::new(component, params, window, times);
    paths.iter().for_each(|p| acc.add(p));
    acc.finish()
}

/// Diffusive scaling on each component, analytic and simulated.
pub fn variance(c: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let p = c.params(c.k_min)?;
    let g = LatticeGraph::build(&p)?;
    let kern = JumpKernel::new(&g, KernelVariant::Reflected);
    let t = c.t_max;
    let times = observation_grid(c);

    // exact: jump size squared times rate; the plane splits it over two axes
    let h = Rational::new(1, p.scale());
    let lambda = Rational::from_integer(p.scale() * p.scale());
    let rod_exact = h * h * lambda;
    report.push(Metric::holds("variance.rod.exact", rod_exact == Rational::from_integer(1), "h^2 lambda == 1, exact"));
    report.push(Metric::holds(
        "variance.plane.exact",
        rod_exact / 2 == Rational::new(1, 2),
        "h^2 lambda / 2 == 1/2, exact",
    ));

    let hf = p.h();
    let n0 = ((p.rod_length_f64() / 2.0) / hf).round() as u32;
    let i0 = (((p.radius_f64() + p.eps_f64()) / 2.0) / hf).round() as i32;
    let runs = [
        (Component::Rod, Vertex::Rod { n: n0 }, 0.9 * p.rod_length_f64() / 2.0, 5u64),
        (Component::Plane, Vertex::Plane { i: i0, j: 0 }, 0.9 * (p.radius_f64() - p.eps_f64()) / 2.0, 6u64),
    ];
    let mut rows = Vec::new();
    let mut jumps = Moments::default();
    for (comp, x0, window, tag) in runs {
        let (acc, js) = report.timed(format!("{comp:?} walks").to_lowercase(), None, || {
            map_reduce(
                c.paths,
                sub_seed(c.seed, tag),
                || (VarianceAccumulator::new(comp, &p, window, &times), Moments::default()),
                |(a, j), _, rng| {
                    let path = simulate_reflected(&kern, x0, t, rng).expect("start lies in the domain");
                    a.add(&path);
                    j.add(path.jumps_by(t) as f64);
                },
                |(a, j), (b, k)| (a.merge(b), j.merge(k)),
            )
        });
        jumps = jumps.merge(js);
        rows.push(acc.finish());
    }
    let (rod, plane) = (&rows[0], &rows[1]);
    let last = times.len() - 1;
    let (r, q) = (&rod[last], &plane[last]);
    report.push(Metric::near("variance.rod.per_unit_time", r.var_x / t, 1.0, 0.05));
    report.push(Metric::near("variance.plane.x.per_unit_time", q.var_x / t, 0.5, 0.025));
    report.push(Metric::near("variance.plane.y.per_unit_time", q.var_y / t, 0.5, 0.025));
    let ratio = (q.var_x + q.var_y) / 2.0 / r.var_x;
    report.push(Metric::near("variance.ratio", ratio, 0.5, 0.025));
    for row in [r, q] {
        if row.widened {
            report.notes.push(format!("only {} paths stayed in the window; intervals are wide", row.survivors));
        }
    }
    report.push(Metric::info("variance.rod.survivors", r.survivors as f64));
    report.push(Metric::info("variance.plane.survivors", q.survivors as f64));

    // holding times: the jump count by T is Poisson(lambda T)
    let mu = p.lambda() * t;
    let n = jumps.n as f64;
    let mean_se = (mu / n).sqrt();
    let var_se = ((mu + 2.0 * mu * mu) / n).sqrt();
    report.push(Metric::near("variance.jumps.mean", jumps.mean(), mu, 3.0 * mean_se));
    report.push(Metric::near("variance.jumps.variance", jumps.variance(), mu, 3.0 * var_se));

    let mut table = Table::new("variance", &["component", "t", "survivors", "var_x", "var_y", "se_x", "se_y"]);
    for (name, rs) in [("rod", rod), ("plane", plane)] {
        for row in rs {
            table.push(vec![
                name.into(),
                row.t.to_string(),
                row.survivors.to_string(),
                row.var_x.to_string(),
                row.var_y.to_string(),
                row.se_x.to_string(),
                row.se_y.to_string(),
            ]);
        }
    }
    report.tables.push(table);
    Ok(())
}

/// Per-scale results of the tightness run.
struct ScaleRun {
    /// Bin index (cemetery last) of each path at each observation time.
    codes: Vec<Vec<u32>>,
    /// Cemetery fraction at each quarter of the last observation time.
    cemetery: Vec<f64>,
    /// Exceedance counts per `(theta, delta)`.
    exceed: Vec<u64>,
    modulus_paths: u64,
}

/// Starts shared across scales: the same pair of uniforms for path `i`.
fn coupling(seed: u64, i: u64) -> [f64; 2] {
    let mut r = RngStream::new(seed, i);
    [r.uniform(), r.uniform()]
}

/// Cauchy-in-k diagnostic for killed marginals and the modulus of the
/// reflected walk.
pub fn tightness(c: &ExperimentConfig, report: &mut Report) -> Result<()> {
    if c.times.is_empty() {
        return Err(Error::Usage("tightness needs observation times".into()));
    }
    let times = c.times.clone();
    let horizon = times.iter().copied().fold(0.0, f64::max);
    let quarters: Vec<f64> = (1..=4).map(|q| horizon * q as f64 / 4.0).collect();
    let pairs: Vec<(f64, f64)> = c.theta.iter().flat_map(|&th| c.delta.iter().map(move |&d| (th, d))).collect();
    let modulus_paths = c.paths.min(MODULUS_PATHS);
    let start_seed = sub_seed(c.seed, 7);

    let mut runs = Vec::new();
    for k in c.ks() {
        let p = c.params(k)?;
        let g = LatticeGraph::build(&p)?;
        let full = JumpKernel::new(&g, KernelVariant::Full);
        let refl = JumpKernel::new(&g, KernelVariant::Reflected);
        let start = StartDistribution::m_bar(&g);
        let bins = RadialBins::new(&p, PLANE_BINS, ROD_BINS);
        let cem = bins.len() as u32;
        let (codes, dead) = report.timed(format!("killed walks k={k}"), None, || {
            map_reduce(
                c.paths,
                sub_seed(c.seed, 8),
                || (vec![Vec::new(); times.len()], vec![0u64; quarters.len()]),
                |(codes, dead), i, rng| {
                    let x0 = start.coupled(&g, coupling(start_seed, i));
                    let path = simulate_killed(&full, x0, horizon, rng).expect("start lies in the domain");
                    for (l, &t) in times.iter().enumerate() {
                        codes[l].push(path.at(t).map_or(cem, |v| bins.bin(v) as u32));
                    }
                    for (l, &t) in quarters.iter().enumerate() {
                        dead[l] += u64::from(path.is_absorbed_by(t));
                    }
                },
                |(mut a, mut d), (b, e)| {
                    a.iter_mut().zip(b).for_each(|(x, y)| x.extend(y));
                    d.iter_mut().zip(&e).for_each(|(x, y)| *x += y);
                    (a, d)
                },
            )
        });
        let exceed = report.timed(format!("modulus k={k}"), None, || {
            map_reduce(
                modulus_paths,
                sub_seed(c.seed, 9),
                || vec![0u64; pairs.len()],
                |acc, i, rng| {
                    let x0 = start.coupled(&g, coupling(start_seed, i));
                    let path = simulate_reflected(&refl, x0, c.t_max, rng).expect("start lies in the domain");
                    for (l, &(th, d)) in pairs.iter().enumerate() {
                        acc[l] += u64::from(w_rho_exceeds(&path, &p, th, c.t_max, d));
                    }
                },
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    a
                },
            )
        });
        runs.push((
            k,
            ScaleRun {
                codes,
                cemetery: dead.iter().map(|&d| d as f64 / c.paths as f64).collect(),
                exceed,
                modulus_paths,
            },
        ));
    }

    let nbins = RadialBins::new(&c.params(c.k_min)?, PLANE_BINS, ROD_BINS).len() + 1;
    let mut dist_table = Table::new("cauchy", &["t", "k", "k_next", "distance", "std_error"]);
    for (l, &t) in times.iter().enumerate() {
        let d: Vec<(f64, f64)> =
            runs.windows(2).map(|w| paired_l2(&w[0].1.codes[l], &w[1].1.codes[l], nbins)).collect();
        for (w, &(est, se)) in runs.windows(2).zip(&d) {
            dist_table.push(vec![t.to_string(), w[0].0.to_string(), w[1].0.to_string(), est.to_string(), se.to_string()]);
            report.push(Metric::info(format!("tightness.t{t}.distance.k{}_k{}", w[0].0, w[1].0), est));
        }
        let decreasing = d.windows(2).all(|w| w[1].0 < w[0].0);
        report.push(Metric::holds(
            format!("tightness.t{t}.cauchy_decreasing"),
            decreasing,
            "paired squared L2 distance between consecutive k strictly decreasing",
        ));
    }
    report.tables.push(dist_table);

    let mut cem_table = Table::new("cemetery", &["k", "t", "mass"]);
    for (k, run) in &runs {
        for (&t, &m) in quarters.iter().zip(&run.cemetery) {
            cem_table.push(vec![k.to_string(), t.to_string(), m.to_string()]);
        }
        let monotone = run.cemetery.windows(2).all(|w| w[0] <= w[1]);
        report.push(Metric::holds(format!("tightness.k{k}.cemetery_monotone"), monotone, "cemetery mass nondecreasing in t"));
    }
    report.tables.push(cem_table);

    let mut mod_table = Table::new("modulus", &["theta", "delta", "k", "paths", "probability", "std_error"]);
    for (l, &(th, d)) in pairs.iter().enumerate() {
        let probs: Vec<f64> = runs.iter().map(|(_, r)| r.exceed[l] as f64 / r.modulus_paths as f64).collect();
        for ((k, r), &pr) in runs.iter().zip(&probs) {
            let se = (pr * (1.0 - pr) / r.modulus_paths as f64).sqrt();
            mod_table.push(vec![th.to_string(), d.to_string(), k.to_string(), r.modulus_paths.to_string(), pr.to_string(), se.to_string()]);
            report.push(Metric::info(format!("tightness.modulus.theta{th}.delta{d}.k{k}"), pr));
        }
        let decreasing = probs.windows(2).all(|w| w[1] < w[0]);
        report.push(Metric::holds(
            format!("tightness.modulus.theta{th}.delta{d}.decreasing"),
            decreasing,
            "P[w_rho > delta] strictly decreasing in k",
        ));
    }
    report.tables.push(mod_table);
    Ok(())
}
