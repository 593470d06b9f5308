//! Analysis of finite sensorimotor loops given as Markov kernels.
//!
//! The crate models an agent coupled to a world through sensing and acting,
//! and computes which distinctions between world states each perspective
//! supports:
//!
//! - [`refinement`] builds the extrinsic views: the partition generated by
//!   the sensor kernel alone, its closure `w_sep` under the world dynamics
//!   (the coarsest sensor-respecting probabilistic bisimulation), and the
//!   memoryless-agent variant `w_am`.
//! - [`intrinsic`] decides sensory equivalence — two world states are
//!   equivalent when no open-loop action sequence can ever make their sensor
//!   statistics differ — and returns the resulting partition together with
//!   the spanning functional basis that proves it.
//! - [`synthesis`] builds a minimal world model: a modified world update,
//!   constant on equivalence classes, that reproduces every sensor process
//!   and whose extrinsic partition collapses onto the intrinsic one.
//! - [`multiagent`] composes two loops over a common world, derives each
//!   agent's outer-world view, and intersects their distinctions.
//! - [`enumeration`] holds deliberately naive brute-force counterparts used
//!   to cross-check the fast paths.
//!
//! All values are immutable after construction and safe to share across
//! threads; every analysis is a pure function of its inputs.

pub mod campaign;
pub mod enumeration;
pub mod error;
pub mod format;
pub mod intrinsic;
pub mod kernel;
pub mod model;
pub mod multiagent;
pub mod partition;
pub mod refinement;
pub mod sample;
pub mod scalar;
pub mod space;
pub mod synthesis;

pub use error::ModelError;
pub use kernel::Kernel;
pub use model::{ActionWord, LoopModel, SensorProcess, SensorWord, Violation};
pub use partition::Partition;
pub use scalar::{Rational, Scalar};
pub use space::{FiniteSpace, SpaceRef};
