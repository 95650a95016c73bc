#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` also rejects NaN

pub mod decomp;
pub mod error;
pub mod nlexp;
pub mod pathspace;
pub mod regularize;
pub mod scalar;
pub mod snell;
pub mod solver;
pub mod viscosity;

pub use error::{Error, Result};
pub use nlexp::{DriftControl, NonlinearExpectation};
pub use pathspace::{NodeId, NodeView, PathPoint, PathTree, StoppingRegion, TreeProcess, TreeSpec};
pub use scalar::{Real, Scalar};

/// Exact rational scalar; dyadic trees (`h = 2^-k`) stay exact under every
/// operation that needs no transcendental function.
pub type Exact = num_rational::Ratio<i128>;

pub type Tree = PathTree<f64>;
pub type Process = TreeProcess<f64>;
pub type Expectation = NonlinearExpectation<f64>;
pub type Drift = DriftControl<f64>;

pub type ExactTree = PathTree<Exact>;
pub type ExactProcess = TreeProcess<Exact>;
pub type ExactExpectation = NonlinearExpectation<Exact>;
pub type ExactDrift = DriftControl<Exact>;
