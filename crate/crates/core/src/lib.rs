//! Analysis toolkit for bipartite quantum operators: Choi-Jamiolkowski
//! transforms and the circled product, cone membership tests for
//! k-superpositive / k-positive maps, entanglement-witness machinery with an
//! exactly solved three-parameter family, separability criteria, and
//! length / Schmidt-rank analysis of separable states.

pub mod abc;
pub mod bipartite;
pub mod choi;
pub mod cones;
pub mod eig;
pub mod error;
pub mod matrix;
pub mod polypos;
pub mod report;
pub mod rng;
pub mod separability;
pub mod witness;

pub use bipartite::{BipartiteOperator, Factor};
pub use error::{CoreError, Result};
pub use matrix::{ComplexMatrix, HermitianOperator};
pub use report::{Certificate, TestParams, TestReport, Verdict};
pub use rng::RandomModel;
