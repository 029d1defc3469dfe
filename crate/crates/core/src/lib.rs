//! Quantum Fisher information of a qubit rotation angle under noisy gates.
//!
//! A qubit is tracked through its Bloch vector. Each application of the gate
//! acts on it with a noise-averaged rotation matrix: the nominal rotation
//! `R_n(θ)` averaged over a von Mises distribution of the angle (dephasing)
//! and a von Mises–Fisher distribution of the axis (tilting). Repeating the gate
//! `t` times and differentiating with respect to `θ` gives the QFI curve
//! `H_θ(t)`.
//!
//! Modules, bottom-up:
//!
//! - [`special`]: modified Bessel functions, their ratio, `coth`, and the
//!   [`Concentration`] type with an explicit noiseless sentinel.
//! - [`geometry`]: Bloch vectors, 3×3 maps, Rodrigues rotations, and the
//!   change of basis that aligns any axis with `ẑ`.
//! - [`channels`]: closed-form noisy rotation matrices.
//! - [`metrology`]: evolution, QFI, closed forms, optimal step count, and
//!   classical Fisher information of projective measurements.
//! - [`oracle`]: Monte Carlo, quadrature, and finite-difference checks.
//! - [`cli`]: the `bloch-qfi` command-line front end.

#![forbid(unsafe_code)]

pub mod channels;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod metrology;
pub mod oracle;
pub mod special;

pub use channels::NoiseParams;
pub use error::{Error, Result};
pub use geometry::{BlochVector, GateSpec, LinearMap3, Vec3};
pub use metrology::{EvolutionTrace, QfiSeries};
pub use special::Concentration;
