//! Link scheduling on interference graphs.
//!
//! The crate simulates slotted-time wireless link scheduling where feasible
//! transmission patterns are independent sets of a conflict graph. It
//! provides exact desk-scale oracles ([`topology`]), a reversible CSMA
//! sampler with product-form verification ([`csma`]), a column-generation
//! simplex scheduler ([`simplex`]), gossip averaging ([`consensus`]), the
//! distributed simplex scheduler built from those pieces ([`dissched`]),
//! queueing bookkeeping ([`queueing`]), and a reproducible experiment
//! harness ([`experiment`]).

pub mod consensus;
pub mod csma;
pub mod dissched;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod lp;
pub mod queueing;
pub mod simplex;
pub mod topology;

pub use error::{Error, Result};
pub use topology::{InterferenceGraph, Schedule};
