//! Finite-dimensional laboratory for sectorial linear relations.
//!
//! The crate is layered: subspace arithmetic (the universal currency), linear
//! relations as graph subspaces, sectoriality analysis and the
//! real-part/imaginary-twist decomposition of maximal sectorial relations,
//! factorized products T\*(I+iB)T with their Friedrichs/Kreĭn/extremal
//! extensions, and form sums of two maximal sectorial relations. The
//! `oracles` module re-derives the same extensions from definitions through
//! deliberately different numerics; agreement between both paths is the
//! evidence everything else rests on.

pub mod ensemble;
pub mod error;
pub mod factorized;
pub mod formsum;
pub mod linalg;
pub mod oracles;
pub mod relation;
pub mod sectorial;
pub mod subspace;

pub use error::{RelabError, Result};
pub use factorized::{AbstractModel, FactorizedSectorial, QJData, RecoveryMode, Side};
pub use formsum::{ExtremalityReport, SumAssembly};
pub use linalg::{C64, CMatrix, CVector};
pub use oracles::ExtensionVerdict;
pub use relation::{Relation, RelationParts};
pub use sectorial::{MaxSectorialDecomposition, SectorReport, SesquiForm};
pub use subspace::{Subspace, Tolerance};
