//! Discrete-Wigner magic measures for one to three qubits.
//!
//! The central quantity is the Wigner distance `C(rho)`: the l1 distance, in
//! the product phase-space representation, from a state's quasi-probability
//! vector to the convex hull of the stabilizer states' vectors. It is computed
//! by an exact linear program alongside the stabilizer extent `Gamma`, their
//! tightness ratio `kappa`, and dual witnesses certifying both.

pub mod error;
pub mod experiments;
pub mod families;
pub mod lpsolve;
pub mod measures;
pub mod output;
pub mod phasespace;
pub mod qcore;
pub mod stabgen;

pub use error::{Error, Result};
pub use phasespace::{wigner, PhasePoint, WignerVector};
pub use qcore::{DensityMatrix, PauliString, PureState};
pub use stabgen::{StabilizerSet, StabilizerState};
