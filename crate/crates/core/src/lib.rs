//! Molecular coherent states of the quantum rigid rotor.
//!
//! The library constructs coherent-state families on SU(2) x SU(2) from
//! fundamental states sum_j c_j z^j |j,-j,-j> and verifies their algebraic
//! properties at desk scale: operator algebra and bi-tensor representations,
//! Wigner rotation matrices, norm functions and resolution-of-unity measures,
//! expectation values and uncertainty products, the Z-representation with the
//! angular momentum as first-order differential operators, and temporal
//! stability under magnetic-field driving.

pub mod angular;
pub mod coherent;
pub mod error;
pub mod evolution;
pub mod expectations;
pub mod families;
pub mod hilbert;
pub mod quad;
pub mod resolution;
pub mod wigner;
pub mod zrep;

pub use error::McsError;
pub use hilbert::{enumerate_basis, inner_product, BasisLabel, SpaceSpec, Tower, TruncatedState};
