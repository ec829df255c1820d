//! Laboratory for the online joint replenishment problem with deadlines
//! under deadline predictions.
//!
//! Requests for items arrive over time and must each be covered by a joint
//! service within their `[arrival, deadline]` window; a service pays a joint
//! ordering cost plus one ordering cost per distinct transmitted item. The
//! crate provides:
//!
//! * an exact-rational data model with validation and canonical tie-break
//!   orderings ([`model`], [`weight`], [`schedule`]);
//! * inversion-based prediction-error metrics ([`metrics`]);
//! * an online simulation engine enforcing the limited-information protocol
//!   ([`engine`]);
//! * the online policies and the phase analyzer ([`algorithms`]);
//! * an exact offline optimum oracle and certified bounds ([`opt`]);
//! * adversarial and random instance generators ([`generators`]);
//! * the command-line surface and file formats ([`cli`]).

pub mod algorithms;
pub mod cli;
pub mod engine;
pub mod generators;
pub mod metrics;
pub mod model;
pub mod opt;
pub mod schedule;
pub mod weight;

pub use engine::{Mode, OnlineAlgorithm};
pub use model::{Instance, ItemId, RequestId, Tick};
pub use schedule::Schedule;
pub use weight::{Rational, Weight};
