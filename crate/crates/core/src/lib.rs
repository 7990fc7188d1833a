//! Tabular MDPs with multi-step transition look-ahead: state augmentation,
//! exact planners, one-step look-ahead planning via the sorting trick, and
//! hardness gadget instances.

pub mod budget;
pub mod chain;
pub mod cli;
pub mod decision;
pub mod error;
pub mod gadgets;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod lookahead;
pub mod lp;
pub mod mdp;
pub mod onestep;
pub mod planners;
pub mod report;
pub mod reset;
pub mod scalar;
pub mod unichain;

pub use error::{Error, Result};
pub use mdp::{Distribution, Policy, RationalMdp, TabularMdp};
pub use scalar::{NumericMode, Scalar};
