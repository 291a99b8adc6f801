//! Hypergeometric and Puiseux series solutions of reduced trinomial systems.
#![allow(clippy::needless_range_loop)]

pub mod amoeba;
pub mod error;
pub mod gamma;
pub mod intlinalg;
pub mod mellinbarnes;
pub mod oracle;
pub mod puiseux;
pub mod rational;
pub mod systems;
pub mod taylor;

pub use error::{Error, Result};
pub use intlinalg::{smith_normal_form, IntegerMatrix, RationalMatrix, SnfDecomposition};
pub use rational::Rational;
pub use systems::{build_reduction, PairSelection, PairTag, Part, Reduction, TrinomialSystem};
pub use taylor::{MultiIndex, TaylorSeries};
pub use puiseux::{PuiseuxCoefficient, PuiseuxSeries};
pub use mellinbarnes::{DivisorPairing, MBIntegralData, Residue, ResidueCone, ResiduePoint};
pub use amoeba::{amoeba_membership, amoeba_scan, AmoebaGrid, AmoebaOptions, GridSpec, Membership};
