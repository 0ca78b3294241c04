//! Exact left-invariant geometry on Lie algebras.

pub mod algebra;
pub mod builtin;
pub mod exact;
pub mod forms;
pub mod heisenberg;
pub mod joyce;
pub mod linalg;
pub mod structure;

pub use algebra::{parse_algebra, AlgebraDefinition, LieAlgebra, Root, RootSystemData};
pub use exact::Exact;
pub use forms::InvariantForm;
pub use linalg::ExactMatrix;
pub use structure::{InvariantHypercomplex, LinearComplexStructure};
