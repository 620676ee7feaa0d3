//! Circle actions on compact almost complex 4-manifolds, seen through their
//! fixed point multigraphs.
//!
//! * [`fpdata`]: fixed point data and its invariants (index counts, Todd
//!   genus, the exact chi_y fixed point sum, Chern numbers).
//! * [`multigraph`]: two-regular labeled directed multigraphs and the
//!   realizability predicates.
//! * [`operations`]: the four local rewrites and their reverses, behind a
//!   strategy registry.
//! * [`reduction`]: peeling a realizable graph down to a semi-free base.
//! * [`plumbing`]: integer sequences `(v_i, a_i)` that witness a graph.
//! * [`catalog`]: named example graphs.
//! * [`census`]: exhaustive enumeration of small cycles.

pub mod catalog;
pub mod census;
pub mod fpdata;
pub mod multigraph;
pub mod operations;
pub mod plumbing;
pub mod reduction;

pub use fpdata::{FixedPointData, InvariantReport, WeightMultiset};
pub use multigraph::{CycleOrder, Edge, Multigraph, VertexId};
pub use operations::{OpKind, OperationTrace, Site};
