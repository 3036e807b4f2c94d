use rayon::prelude::*;

use super::path::{Absorption, Path};
use super::rng::RngStream;
use crate::error::{Error, Result};
use crate::lattice::{GraphKind, LatticeGraph, Vertex};
use crate::measures::{JumpKernel, KernelVariant};

/// Draws the next vertex from the kernel row at `x`.
#[inline]
pub fn step(kernel: &JumpKernel, x: Vertex, rng: &mut RngStream) -> Vertex {
    let y = match x {
        Vertex::Star => {
            let ring = kernel.graph.star().ring();
            let w = kernel.star_rod_weight();
            let r = rng.below(w + ring.len() as u64);
            if r < w {
                Vertex::Rod { n: 1 }
            } else {
                ring[(r - w) as usize]
            }
        }
        _ => {
            let nb = kernel.graph.local(x, kernel.kind());
            nb.as_slice()[rng.below(nb.len() as u64) as usize]
        }
    };
    debug_assert!(kernel.weight(x, y) > 0, "jump {x} -> {y} is not an edge");
    y
}

fn check_start(graph: &LatticeGraph, start: Vertex) -> Result<()> {
    if graph.in_domain(start) {
        Ok(())
    } else {
        Err(Error::InvalidStart(format!("{start} is not in the domain")))
    }
}

fn check_variant(kernel: &JumpKernel, want: KernelVariant) -> Result<()> {
    if kernel.variant == want {
        Ok(())
    } else {
        Err(Error::Path(format!("expected the {want:?} kernel, got {:?}", kernel.variant)))
    }
}

/// The reflected walk on `E_0^k` with kernel `j̃_k` up to `t_max`.
pub fn simulate_reflected(kernel: &JumpKernel, start: Vertex, t_max: f64, rng: &mut RngStream) -> Result<Path> {
    check_variant(kernel, KernelVariant::Reflected)?;
    check_start(kernel.graph, start)?;
    let lambda = kernel.lambda();
    let mut path = Path::constant(kernel.graph.params.k, start, t_max);
    let mut t = 0.0;
    let mut x = start;
    loop {
        t += rng.exp(lambda);
        if t >= t_max {
            break;
        }
        x = step(kernel, x, rng);
        path.times.push(t);
        path.states.push(x);
    }
    Ok(path)
}

/// The walk with kernel `j_k` killed on arrival at `∂E_0^k`.
///
/// A start on the boundary is absorbed at time 0.
pub fn simulate_killed(kernel: &JumpKernel, start: Vertex, t_max: f64, rng: &mut RngStream) -> Result<Path> {
    check_variant(kernel, KernelVariant::Full)?;
    check_start(kernel.graph, start)?;
    let g = kernel.graph;
    let mut path = Path::constant(g.params.k, start, t_max);
    if g.is_boundary(start) {
        path.absorption = Some(Absorption { time: 0.0, site: start });
        return Ok(path);
    }
    let lambda = kernel.lambda();
    let mut t = 0.0;
    let mut x = start;
    loop {
        t += rng.exp(lambda);
        if t >= t_max {
            break;
        }
        let y = step(kernel, x, rng);
        if g.is_boundary(y) {
            path.absorption = Some(Absorption { time: t, site: y });
            break;
        }
        x = y;
        path.times.push(t);
        path.states.push(x);
    }
    Ok(path)
}

/// Piecing together killed runs: at each absorption the walk restarts from
/// the vertex it occupied just before, with fresh randomness.
pub fn resurrect_inw(kernel: &JumpKernel, start: Vertex, t_max: f64, rng: &mut RngStream) -> Result<Path> {
    check_variant(kernel, KernelVariant::Full)?;
    check_start(kernel.graph, start)?;
    let g = kernel.graph;
    if g.is_boundary(start) {
        return Err(Error::InvalidStart(format!("{start} lies on the boundary")));
    }
    let lambda = kernel.lambda();
    let mut path = Path::constant(g.params.k, start, t_max);
    let mut t = 0.0;
    let mut x = start;
    loop {
        t += rng.exp(lambda);
        if t >= t_max {
            break;
        }
        let y = step(kernel, x, rng);
        if g.is_boundary(y) {
            path.resurrections.push(t);
            continue;
        }
        x = y;
        path.times.push(t);
        path.states.push(x);
    }
    Ok(path)
}

/// Which walk to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkMode {
    Reflected,
    Killed,
    Resurrected,
}

impl WalkMode {
    pub fn variant(self) -> KernelVariant {
        match self {
            WalkMode::Reflected => KernelVariant::Reflected,
            _ => KernelVariant::Full,
        }
    }

    pub fn kind(self) -> GraphKind {
        self.variant().graph_kind()
    }
}

pub fn simulate(kernel: &JumpKernel, mode: WalkMode, start: Vertex, t_max: f64, rng: &mut RngStream) -> Result<Path> {
    match mode {
        WalkMode::Reflected => simulate_reflected(kernel, start, t_max, rng),
        WalkMode::Killed => simulate_killed(kernel, start, t_max, rng),
        WalkMode::Resurrected => resurrect_inw(kernel, start, t_max, rng),
    }
}

/// Paths per work unit. Chunk boundaries are fixed so floating-point
/// aggregation does not depend on the worker count.
pub const CHUNK: u64 = 512;

/// Deterministic parallel map-reduce over path indices `0..n`.
///
/// Path `i` gets the stream `(seed, i)`. Each fixed-size chunk is folded
/// sequentially; chunk results are merged in index order.
pub fn map_reduce<T, I, F, M>(n: u64, seed: u64, identity: I, fold: F, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, u64, &mut RngStream) + Sync,
    M: Fn(T, T) -> T,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = identity();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let mut rng = RngStream::new(seed, i);
                fold(&mut acc, i, &mut rng);
            }
            acc
        })
        .collect();
    parts.into_iter().fold(identity(), merge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    fn graph(k: u32) -> LatticeGraph {
        LatticeGraph::build(&LatticeParams::standard(k).unwrap()).unwrap()
    }

    #[test]
    fn zero_horizon() {
        let g = graph(3);
        let kr = JumpKernel::new(&g, KernelVariant::Reflected);
        let p = simulate_reflected(&kr, Vertex::Star, 0.0, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(p.states, vec![Vertex::Star]);
        assert_eq!(p.times, vec![0.0]);
    }

    #[test]
    fn paths_follow_edges() {
        let g = graph(3);
        let kr = JumpKernel::new(&g, KernelVariant::Reflected);
        let kf = JumpKernel::new(&g, KernelVariant::Full);
        for i in 0..50 {
            let mut rng = RngStream::new(9, i);
            let start = Vertex::Plane { i: 150, j: 40 };
            let p = simulate_reflected(&kr, start, 3.0, &mut rng).unwrap();
            p.validate(&g, GraphKind::Domain).unwrap();
            assert!(p.states.iter().all(|v| g.in_domain(*v)));
            let q = simulate_killed(&kf, start, 3.0, &mut rng).unwrap();
            q.validate(&g, GraphKind::Full).unwrap();
            assert!(q.states.iter().all(|v| !g.is_boundary(*v)));
            let r = resurrect_inw(&kf, start, 3.0, &mut rng).unwrap();
            r.validate(&g, GraphKind::Full).unwrap();
            assert!(r.states.iter().all(|v| !g.is_boundary(*v)));
        }
    }

    #[test]
    fn boundary_start() {
        let g = graph(3);
        let kf = JumpKernel::new(&g, KernelVariant::Full);
        let b = Vertex::Rod { n: g.rod_max() };
        let p = simulate_killed(&kf, b, 1.0, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(p.absorption, Some(Absorption { time: 0.0, site: b }));
        assert!(resurrect_inw(&kf, b, 1.0, &mut RngStream::new(1, 0)).is_err());
        let kr = JumpKernel::new(&g, KernelVariant::Reflected);
        assert!(simulate_killed(&kr, Vertex::Star, 1.0, &mut RngStream::new(1, 0)).is_err());
        assert!(simulate_reflected(&kr, Vertex::Rod { n: 10_000 }, 1.0, &mut RngStream::new(1, 0)).is_err());
    }

    #[test]
    fn single_jump_absorption() {
        // the vertex next to the rod end jumps to the boundary with probability 1/2
        let g = graph(3);
        let kf = JumpKernel::new(&g, KernelVariant::Full);
        let x = Vertex::Rod { n: g.rod_max() - 1 };
        let n = 20_000;
        let mut first_jump = 0;
        let mut times = 0.0;
        for i in 0..n {
            let p = simulate_killed(&kf, x, 10.0, &mut RngStream::new(3, i)).unwrap();
            if let (0, Some(a)) = (p.num_jumps(), p.absorption) {
                first_jump += 1;
                times += a.time;
            }
        }
        let frac = first_jump as f64 / n as f64;
        assert!((frac - 0.5).abs() < 4.0 * (0.25 / n as f64).sqrt());
        // mean of Exp(64)
        let mean = times / first_jump as f64;
        assert!((mean - 1.0 / 64.0).abs() < 4.0 / 64.0 / (first_jump as f64).sqrt());
    }

    #[test]
    fn resurrection_matches_killed_before_absorption() {
        let g = graph(3);
        let kf = JumpKernel::new(&g, KernelVariant::Full);
        let x = Vertex::Plane { i: 20, j: 20 };
        for i in 0..20 {
            let a = simulate_killed(&kf, x, 0.5, &mut RngStream::new(5, i)).unwrap();
            let b = resurrect_inw(&kf, x, 0.5, &mut RngStream::new(5, i)).unwrap();
            if a.absorption.is_none() {
                assert_eq!(a.states, b.states);
                assert_eq!(a.times, b.times);
                assert!(b.resurrections.is_empty());
            }
        }
    }

    #[test]
    fn replay_is_independent_of_workers() {
        let g = graph(3);
        let kr = JumpKernel::new(&g, KernelVariant::Reflected);
        let run = || {
            map_reduce(
                2000,
                11,
                Vec::new,
                |acc: &mut Vec<f64>, _, rng| {
                    let p = simulate_reflected(&kr, Vertex::Star, 0.2, rng).unwrap();
                    acc.push(p.times.iter().sum::<f64>());
                },
                |mut a, b| {
                    a.extend(b);
                    a
                },
            )
        };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(run);
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(run);
        assert_eq!(one, four);
    }
}
