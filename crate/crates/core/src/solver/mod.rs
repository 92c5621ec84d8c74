//! Axisymmetric solver for the subcritical problem
//! `L_{g0} u = K u^p`, `p = (n+2)/(n-2) - τ`, on `S^n`.

pub mod continuation;
pub mod discrete;
pub mod flow;
pub mod newton;
pub mod spectrum;
pub mod tridiag;

pub use continuation::{
    continuation, geometric_schedule, Concentration, ContinuationOptions, ContinuationReport,
    ContinuationStep,
};
pub use discrete::{constant_energy, Problem, ProblemSummary, TAU_MAX};
pub use flow::{flow, FlowOptions, FlowResult, FlowStatus, FlowStep, BLOWUP_THRESHOLD};
pub use newton::{newton_refine, NewtonOptions, SolveReport};
pub use spectrum::{
    harmonic_multiplicity, hessian_sector_spectrum, SectorSpectrum, SpectrumReport,
};
pub use tridiag::SymTridiag;
