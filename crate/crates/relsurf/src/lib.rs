//! relsurf: relative states and quantum-logic deductions on spacelike
//! surfaces of circuit causal structures.
//!
//! The crate models finite causal structures (DAGs with dangling edges),
//! assigns quantum states to their spacelike surfaces by unitary circuit
//! evolution, computes relative states between edges, and checks rule-based
//! deductions against a three-valued subspace semantics. The bundled
//! nested-observer scenario exercises all of it end to end.

pub mod assignment;
pub mod causal;
pub mod commands;
pub mod formats;
pub mod fr;
pub mod linalg;
pub mod qlogic;
pub mod random;
pub mod relstate;
pub mod report;
pub mod tensor;
pub mod workspace;

pub use assignment::CircuitAssignment;
pub use causal::{CausalStructure, EdgeId, Surface, VertexId};
pub use tensor::{DensityOperator, StateVector};
