//! Presented structures: punctual builders that carry Skolem functions,
//! back-and-forth isomorphisms, coders that hide `∀n ∃y ψ(n, y)` inside a
//! copy of the structure, and decoders that read the witnesses back off an
//! isomorphism with bounded search.
//!
//! Decoders receive isomorphisms as functions that may extend a finite table
//! on demand. They only evaluate them at the points the bounded extraction
//! needs. Every finite partial isomorphism between these homogeneous
//! structures extends to a full one, so tests may supply any such table.

pub mod ba;
pub mod dlo;
pub mod rg;
pub mod vector;

use std::sync::Arc;

pub use ba::{ba_build, ba_decode, ba_encode, AtomlessBa, BooleanAlgebra, CodedBa};
pub use dlo::{dlo_backforth, dlo_build, dlo_build_seeded, dlo_decode, dlo_encode, Dlo, EncodedDlo, LinearOrder, PartialIso};
pub use rg::{rg_build, rg_decode, rg_encode, Graph, RandomGraph, RgEncoder};
pub use vector::{basis_finite_field, CoordinateSpace, FiniteField, VectorSpace};

/// Bounded witness predicate `ψ(n, y)`.
pub type Predicate = Arc<dyn Fn(u64, u64) -> bool + Send + Sync>;
