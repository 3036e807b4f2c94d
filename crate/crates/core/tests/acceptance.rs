//! One test per acceptance criterion. Each runs the named experiment with its
//! default configuration, re-checks the headline numbers against tolerances
//! pinned here, and prints a single `criterion N: PASS|FAIL` line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::sync::{Mutex, OnceLock};

use vardimwalk::harness::{run, Experiment, ExperimentConfig, Report, Verdict};

/// Stage budgets are wall-clock, so experiments run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

// pinned tolerances
const FLOAT_BALANCE: f64 = 1e-12;
const LIPSCHITZ_FACTOR: f64 = 9.0;
const C2_STABILITY: f64 = 0.10;
const NORM_IDENTITY: f64 = 1e-12;
const SLOPE_RANGE: (f64, f64) = (-1.3, -0.7);
const QV_RATE: f64 = 81.0;
const SE_BAND: f64 = 3.0;
const P_MIN: f64 = 0.01;
const VARIANCE_REL: f64 = 0.05;

fn report(exp: Experiment) -> Report {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    run(&ExperimentConfig::defaults(exp)).expect("experiment runs")
}

fn geometry() -> &'static Report {
    static CELL: OnceLock<Report> = OnceLock::new();
    CELL.get_or_init(|| report(Experiment::Geometry))
}

fn value(r: &Report, name: &str) -> f64 {
    r.metric(name).unwrap_or_else(|| panic!("{} lacks metric {name}", r.experiment)).value
}

/// Collected checks for one criterion.
struct Checks {
    failed: Vec<String>,
    count: usize,
}

impl Checks {
    fn new() -> Self {
        Self { failed: Vec::new(), count: 0 }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.count += 1;
        if !ok {
            self.failed.push(what.into());
        }
    }

    /// Every metric under `prefix` carries a non-failing verdict.
    fn verdicts(&mut self, r: &Report, prefix: &str) {
        let mut seen = 0;
        for m in r.group(prefix) {
            seen += 1;
            self.check(m.verdict != Verdict::Fail, format!("{} = {} ({})", m.name, m.value, m.tolerance));
        }
        self.check(seen > 0, format!("no metrics under {prefix}"));
    }

    /// Stages whose name starts with `prefix` met their budgets.
    fn budgets(&mut self, r: &Report, prefix: &str) {
        for s in r.wall_clock.stages.iter().filter(|s| s.stage.starts_with(prefix)) {
            self.check(s.within_budget(), format!("{} took {:.3}s, budget {:?}", s.stage, s.seconds, s.budget));
        }
    }

    fn finish(self, n: u32, summary: &str) {
        let status = if self.failed.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {n}: {status} {summary} ({} checks)", self.count);
        for f in &self.failed {
            println!("    failed: {f}");
        }
        assert!(self.failed.is_empty(), "criterion {n} failed: {:?}", self.failed);
    }
}

#[test]
fn criterion_01_exact_reversibility() {
    let r = report(Experiment::Balance);
    let mut c = Checks::new();
    for k in 3..=6 {
        for variant in ["full", "reflected"] {
            let pre = format!("balance.k{k}.{variant}");
            c.check(value(&r, &format!("{pre}.exact_zero")) == 1.0, format!("{pre} rational violation nonzero"));
            let rel = value(&r, &format!("{pre}.float_relative"));
            c.check(rel < FLOAT_BALANCE, format!("{pre} float violation {rel}"));
            c.check(value(&r, &format!("{pre}.plane_flux")) == 1.0, format!("{pre} plane edge constant is not 1/4"));
            c.check(value(&r, &format!("{pre}.rod_flux")) == 1.0, format!("{pre} rod edge constant is not 2^(k-1)"));
        }
    }
    c.verdicts(&r, "balance.");
    c.budgets(&r, "balance k=");
    c.finish(1, "exact reversibility, k=3..6, both kernels");
}

#[test]
fn criterion_02_star_structure() {
    let r = report(Experiment::Build);
    let mut c = Checks::new();
    let mut prev = f64::INFINITY;
    for k in 3..=8u32 {
        let pre = format!("build.k{k}");
        c.check(value(&r, &format!("{pre}.rod_neighbors")) == 1.0, format!("{pre} rod neighbors"));
        let ring = value(&r, &format!("{pre}.ring_degree"));
        let bound = 56.0 * 2f64.powi(k as i32) + 28.0;
        c.check(ring <= bound, format!("{pre} ring degree {ring} > {bound}"));
        let m = value(&r, &format!("{pre}.star_measure"));
        let h = 2f64.powi(-(k as i32));
        let mbound = h / 2.0 + h * h * (56.0 / h + 27.0) / 4.0;
        c.check(m <= mbound, format!("{pre} star measure {m} > {mbound}"));
        c.check(m < prev, format!("{pre} star measure not decreasing"));
        prev = m;
    }
    c.verdicts(&r, "build.");
    c.budgets(&r, "star k=");
    c.finish(2, "Star structure, k=3..8");
}

#[test]
fn criterion_03_projection_lipschitz() {
    let r = geometry();
    let mut c = Checks::new();
    for k in 3..=6 {
        let pre = format!("lipschitz.k{k}");
        let bad = value(r, &format!("{pre}.violations"));
        c.check(bad == 0.0, format!("{pre}: {bad} violations"));
        let ratio = value(r, &format!("{pre}.max_ratio"));
        c.check(ratio <= LIPSCHITZ_FACTOR, format!("{pre} max ratio {ratio}"));
        c.check(r.metric(&format!("{pre}.max_ratio_vs_3")).is_some(), format!("{pre} ratio against 3h not reported"));
    }
    c.verdicts(r, "lipschitz.");
    c.budgets(r, "lipschitz scan");
    c.finish(3, "projection Lipschitz bound, k=3..6");
}

#[test]
fn criterion_04_metric_comparability() {
    let r = geometry();
    let mut c = Checks::new();
    let norm = value(r, "comparability.norm_identity");
    c.check(norm <= NORM_IDENTITY, format!("norm identity off by {norm}"));
    let c3 = value(r, "comparability.k3.c2");
    let c4 = value(r, "comparability.k4.c2");
    c.check(c3.is_finite() && c3 > 0.0, format!("C2 at k=3 is {c3}"));
    c.check((c4 / c3 - 1.0).abs() <= C2_STABILITY, format!("C2 moved {c3} -> {c4}"));
    c.verdicts(r, "comparability.");
    c.finish(4, &format!("metric comparability, C2 = {c3:.4} (k=3), {c4:.4} (k=4)"));
}

#[test]
fn criterion_05_generator_convergence() {
    let r = report(Experiment::Generator);
    let mut c = Checks::new();
    for f in ["darning", "rod_bump", "angular"] {
        let s = value(&r, &format!("generator.{f}.slope"));
        c.check((SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&s), format!("{f} slope {s}"));
    }
    for q in ["xx", "yy", "xy", "ss", "linear"] {
        let e = value(&r, &format!("generator.quadratic.{q}.max_error"));
        c.check(e == 0.0, format!("quadratic {q} error {e}"));
    }
    c.verdicts(&r, "generator.");
    c.budgets(&r, "generator convergence");
    c.finish(5, "generator convergence, k=3..7");
}

#[test]
fn criterion_06_quadratic_variation() {
    let r = report(Experiment::Reversal);
    let mut c = Checks::new();
    for f in ["f1", "f2", "f3"] {
        let bad = value(&r, &format!("reversal.{f}.qv_violations"));
        c.check(bad == 0.0, format!("{f}: {bad} QV violations"));
        let rate = value(&r, &format!("reversal.{f}.max_rate"));
        c.check(rate <= QV_RATE, format!("{f}: QV rate {rate}"));
    }
    for m in r.group("reversal.").filter(|m| m.name.ends_with(".mean_at_t")) {
        let band = m.hi.expect("mean test has a band");
        c.check(m.value.abs() <= band, format!("{} = {} outside {band}", m.name, m.value));
        c.check(m.tolerance.contains(&format!("{SE_BAND} SE")), format!("{} band is not {SE_BAND} SE", m.name));
    }
    c.verdicts(&r, "reversal.");
    c.finish(6, "quadratic variation and martingale means, k=4");
}

#[test]
fn criterion_07_stationarity() {
    let r = report(Experiment::Occupation);
    let mut c = Checks::new();
    let bad = value(&r, "occupation.balance_solve.violations");
    c.check(bad == 0.0, format!("balance solve found {bad} violations"));
    let p = value(&r, "occupation.p_value");
    c.check(p > P_MIN, format!("p = {p}"));
    c.verdicts(&r, "occupation.");
    c.finish(7, &format!("occupation against normalised m_bar, p = {p:.3}"));
}

#[test]
fn criterion_08_resurrection() {
    let r = report(Experiment::Resurrection);
    let mut c = Checks::new();
    let mut bins = 0;
    for t in ["0.5", "1", "2"] {
        for m in r.group(&format!("resurrection.t{t}.")).filter(|m| m.verdict != Verdict::Info) {
            bins += 1;
            let band = m.hi.expect("bin has a band");
            c.check(m.value.abs() <= band, format!("{} = {} outside {band}", m.name, m.value));
            c.check(m.tolerance.contains(&format!("{SE_BAND} SE")), format!("{} band is not {SE_BAND} SE", m.name));
        }
    }
    c.check(bins > 0, "no radial bins");
    c.check(!r.notes.is_empty(), "boundary discrepancy not reported");
    c.verdicts(&r, "resurrection.");
    c.finish(8, &format!("resurrected vs reflected marginals, {bins} bins"));
}

#[test]
fn criterion_09_diffusive_scaling() {
    let r = report(Experiment::Variance);
    let mut c = Checks::new();
    c.check(value(&r, "variance.rod.exact") == 1.0, "rod h^2 lambda != 1");
    c.check(value(&r, "variance.plane.exact") == 1.0, "plane h^2 lambda / 2 != 1/2");
    let rod = value(&r, "variance.rod.per_unit_time");
    c.check((rod - 1.0).abs() <= VARIANCE_REL, format!("rod variance rate {rod}"));
    for axis in ["x", "y"] {
        let v = value(&r, &format!("variance.plane.{axis}.per_unit_time"));
        c.check((v - 0.5).abs() <= 0.5 * VARIANCE_REL, format!("plane {axis} variance rate {v}"));
    }
    let ratio = value(&r, "variance.ratio");
    c.check((ratio - 0.5).abs() <= 0.5 * VARIANCE_REL, format!("ratio {ratio}"));
    c.verdicts(&r, "variance.");
    c.finish(9, &format!("diffusive scaling, rod {rod:.4}, ratio {ratio:.4}"));
}

#[test]
fn criterion_10_tightness() {
    let r = report(Experiment::Tightness);
    let mut c = Checks::new();

    let probs: Vec<f64> = (3..=6).map(|k| value(&r, &format!("tightness.modulus.theta0.1.delta0.5.k{k}"))).collect();
    let decreasing = probs.windows(2).all(|w| w[1] < w[0]);
    c.check(decreasing, format!("P[w_rho > 0.5] over k=3..6 is {probs:?}, not decreasing"));

    let dists: Vec<f64> = ["k3_k4", "k4_k5", "k5_k6"]
        .iter()
        .map(|p| value(&r, &format!("tightness.t0.25.distance.{p}")))
        .collect();
    c.check(dists.windows(2).all(|w| w[1] < w[0]), format!("Cauchy distances {dists:?} not decreasing"));

    c.verdicts(&r, "tightness.");
    c.finish(10, "modulus trend and Cauchy marginals, k=3..6");
}
