//! Exact computations with friezes of cluster algebras.
//!
//! The crate is organised bottom-up:
//!
//! * [`rings`]: the integral domains friezes take values in,
//! * [`quiver`]: exchange matrices and their mutation,
//! * [`laurent`]: Laurent polynomials over Z,
//! * [`cluster`]: seeds, symbolic mutation and exchange-graph search,
//! * [`frieze`]: frieze vectors, the cluster/frieze-vector bijection and unitarity,
//! * [`annulus`]: triangulations of the annulus and the unitarization descent,
//! * [`snake`]: snake graphs for triangulated polygons,
//! * [`knit`]: frieze arrays generated slice by slice, and their rendering.

pub mod annulus;
pub mod cluster;
pub mod frieze;
pub mod knit;
pub mod laurent;
pub mod quiver;
pub mod rings;
pub mod snake;

pub use laurent::LaurentPolynomial;
pub use quiver::Quiver;
pub use rings::{RingElement, RingKind};
