//! Measurement of Nth-order coherences of a two-mode bosonic field.
//!
//! The crate models a single spatial mode carrying two orthogonal
//! polarizations, an SU(2) gadget made of two quarter-wave plates and one
//! half-wave plate, and a detector behind one port of a polarizing beam
//! splitter that records the Nth-order intensity moment. From `(N+1)^2`
//! such moments, taken at the settings produced by [`recipe::settings_plan`],
//! every normally-ordered coherence of order N is recovered exactly. For
//! states with a fixed total photon number this is a full state tomography.
//!
//! Module map:
//!
//! * [`fock`]: exact two-mode Fock-space states, ladder-operator moments and
//!   the Fock representation of mode transformations.
//! * [`gadget`]: the gadget unitary, its Euler decomposition and wave-plate
//!   angles.
//! * [`expansion`]: correlations behind the gadget as linear functionals of
//!   the input coherences.
//! * [`recipe`]: measurement plans and the roots-of-unity reconstruction.
//! * [`tomography`]: density matrices and Stokes parameters.
//! * [`sampler`]: Monte-Carlo photon counting.

pub mod error;
pub mod expansion;
pub mod fock;
pub mod gadget;
mod linalg;
pub mod math;
pub mod recipe;
pub mod sampler;
pub mod tomography;

pub use error::{Error, Result};
pub use num_complex::Complex64;
