//! Two-sheeted spacetime causality and Dirac wave-packet laboratory.
//!
//! The crate models an almost-commutative spacetime `M × {−, +}` in 1+1
//! dimensions: causal order on pure states, the cone of causal elements,
//! weighted proper-time optimization on lattices, and a split-step Dirac
//! solver whose states can be checked for causal evolution.

// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod cone;
pub mod dirac;
pub mod field;
pub mod harness;
pub mod spacetime;

pub use causality::{decide_pure, weighted_time_sup, Decision, FieldConfig, PureAcState, Verdict};
pub use cone::{AcState, ConeContext, ConeElement, Sheet};
pub use dirac::{evolve, make_packet, EvolutionConfig, Grid1D, MassTerm, SpinorField};
pub use field::{ComplexField, RealField, VectorPotential};
pub use spacetime::{CausalCurve, Event, MetricModel, Region, Resolution};
