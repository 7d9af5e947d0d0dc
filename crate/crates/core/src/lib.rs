//! Switching operations, invariants and class enumeration for Hadamard matrices.

pub mod canonical;
pub mod constructions;
pub mod enumeration;
pub mod gf;
pub mod invariants;
pub mod matrix;
pub mod structure;
pub mod switching;

pub use constructions::{double, paley, sylvester, DoublingShape, PaleyKind};
pub use matrix::{HadamardMatrix, MatrixError, SignVector, SignedPermutation};
pub use structure::{Axis, FieldPartition, QuadrupleInfo};
pub use switching::{SwitchError, SwitchKind, SwitchMove};
pub use invariants::{BinaryCodeSummary, SmithForm};
pub use canonical::{canonical_key, equivalent, CanonicalKey};
pub use enumeration::{enumerate, ClassStore, EnumerationMode, EnumerationOptions, EnumerationReport};
