//! Exact arithmetic on the Mukai lattice of an Enriques surface, the
//! isometries that act on it, reduction of Mukai vectors to canonical
//! low-rank forms, and the non-emptiness criteria for moduli of stable
//! sheaves (unnodal and nodal).

pub mod census;
pub mod error;
pub mod existence;
pub mod io;
pub mod lattice;
pub mod moves;
pub mod oracle;
pub mod reduction;
pub mod search;

pub use error::{Error, Result};
pub use existence::{Case, ExistenceVerdict, SurfaceContext};
pub use lattice::{E8Vector, MukaiVector, NSClass};
pub use moves::{Move, MoveKind, MoveTrace, PreparedMove};
pub use reduction::{CanonicalForm, ReductionConfig};
