//! Test functions, discrete and continuum generators, and martingale diagnostics.

mod functions;
mod martingale;
mod operators;

pub use functions::{
    bspline, canonical_test_functions, step_down, Derivs, FnVertex, Projection, TestFunction, TestShape,
    VertexFunction,
};
pub use martingale::{
    martingale_diagnostics, path_martingale, GeneratorTable, MartingaleAccumulator, MartingaleReport, PathMartingale,
};
pub use operators::{
    carre_du_champ, convergence_report, discrete_generator, fit_slope, generator_at, nonregular_mass,
    self_adjointness_gap, GeneratorReport, GeneratorRow,
};
