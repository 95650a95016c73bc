//! Semijets, sampled viscosity checks, the special solution `η` and the
//! exponential change of variable.

mod check;
mod generator;
mod jets;
mod special;

pub use check::{
    check_solution, check_subsolution, check_supersolution, slope, CheckReport, HittingSpec, JetSampling, Role,
    Violation,
};
pub use generator::{
    jet_generator, pucci_with_source, registry, spot_check, with_source, Builtin, DynGenerator, FnGenerator,
    Generator, RegistryEntry,
};
pub use jets::{
    one_step_frontier, subjet_frontier, subjet_test, superjet_frontier, superjet_test, JetCandidate, FRONTIER_TOL,
};
pub use special::{change_variable, eta_bar, special_solution, EtaBar};
