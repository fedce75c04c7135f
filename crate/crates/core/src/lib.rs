//! Ecosystem viable yields for harvested multispecies models.
//!
//! The crate models a fishery as discrete-time dynamics
//! `x_i(t+1) = x_i(t) R_i(x(t), e_i(t))` with one harvest effort per species,
//! and answers:
//!
//! * which initial stocks can keep every biomass and every catch above given
//!   floors forever ([`viability`]),
//! * the largest catch floors that can be guaranteed from a given stock, the
//!   ecosystem viable yields ([`yields::evy`]),
//! * equilibrium maximum sustainable yields ([`yields`]),
//! * how a harvest policy plays out over time ([`simulate`]),
//! * and how to fit the prey–predator model of [`lotka_volterra`] to yearly
//!   biomass and catch records ([`estimation`]).
//!
//! Biomasses and catches are in tonnes, time in years, efforts in fractions of
//! biomass caught per year.

pub mod cli;
pub mod ecosystem;
pub mod error;
pub mod estimation;
pub mod lotka_volterra;
pub mod roots;
pub mod simulate;
pub mod viability;
pub mod yields;

pub use ecosystem::{catches, check_acceptable, step, BiomassState, ConstraintSet, EffortVector, GrowthModel, StepOutcome};
pub use error::{Error, Result};
pub use lotka_volterra::{LvModel, LvParams};
pub use viability::{AnalyticKernel, GridGeometry, KernelGrid};
