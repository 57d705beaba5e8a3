//! Linear and nonlinear analysis of the codimension-three interaction between
//! an Andronov–Hopf bifurcation and a Bogdanov–Takens bifurcation in a pair of
//! `Z2 ⊕ Z2`-symmetric coupled oscillators.
//!
//! The crate is organised bottom-up:
//!
//! * [`versal`]: codimension, centralizers, the commutator operator, the real
//!   miniversal family of the singular linear part and the map from physical
//!   parameters to unfolding parameters.
//! * [`poly`] and [`normal_form`]: cubic polynomial vector fields and the
//!   homological equation that reduces them to the cubic Poincaré normal form.
//! * [`branches`]: closed-form equilibria, periodic orbits and 2-tori of the
//!   truncated normal form, with existence, criticality and stability flags.
//! * [`simulate`]: an adaptive Dormand–Prince integrator with dense output for
//!   the full oscillator system and the reduced normal form.
//! * [`torus`]: Poincaré sections, attractor classification and spectral
//!   frequency estimates.
//! * [`cli`]: the command-line front end.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branches;
pub mod cli;
pub mod error;
pub mod normal_form;
pub mod poly;
pub mod simulate;
pub mod system;
pub mod torus;
pub mod versal;

pub use error::{Error, Result};
