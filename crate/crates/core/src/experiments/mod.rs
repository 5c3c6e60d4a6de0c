//! Experiment runners: norm convergence for converging generator families,
//! moment convergence, and the exactness witness battery.

mod convergence;
mod exactness;
mod families;

pub use convergence::{
    run_moment_convergence, run_pisier_variant, run_theorem31, ConvergenceConfig, ConvergenceReport, HypothesisRow,
    MomentConfig, MomentReport, MomentRow, NormRow, PolySummary, DEFAULT_POLYS,
};
pub use exactness::{run_exactness_on, run_exactness_witness, Bound, Check, ExactnessConfig, ExactnessReport};
pub use families::{eval_monomial, hypothesis_gaps, monomials, FamilyKind, GeneratorFamily, Tuple};
