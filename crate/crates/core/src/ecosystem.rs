//! States, efforts, constraint sets and the one-step harvested dynamics
//!
//! ```text
//! x_i(t+1) = x_i(t) * R_i(x(t), e_i(t))
//! ```
//!
//! over an abstract [`GrowthModel`]. Units are tonnes for biomass and catch,
//! years for time; efforts are harvest rates per year, so catch = effort × biomass.

use std::ops::Index;

use crate::error::{invalid, Result};

fn check_components(what: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(format!("{what} must have at least one component")));
    }
    for (i, v) in values.iter().enumerate() {
        if !v.is_finite() || *v < 0.0 {
            return Err(invalid(format!("{what}[{i}] = {v} must be finite and >= 0")));
        }
    }
    Ok(())
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(invalid(format!("{what} has {got} components, expected {want}")));
    }
    Ok(())
}

macro_rules! nonneg_vector {
    ($(#[$meta:meta])* $name:ident, $label:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name(Vec<f64>);

        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                check_components($label, &values)?;
                Ok(Self(values))
            }

            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.0
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl TryFrom<&[f64]> for $name {
            type Error = crate::error::Error;
            fn try_from(values: &[f64]) -> Result<Self> {
                Self::new(values.to_vec())
            }
        }
    };
}

nonneg_vector!(
    /// Per-species biomass in tonnes. Index 0 is the prey, index 1 the predator
    /// in the two-species case.
    BiomassState,
    "biomass"
);

nonneg_vector!(
    /// Per-species harvest effort (fraction of biomass caught per year).
    EffortVector,
    "effort"
);

/// Minimal biomass levels and minimal catch levels, one of each per species.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    min_biomass: Vec<f64>,
    min_catch: Vec<f64>,
}

impl ConstraintSet {
    pub fn new(min_biomass: Vec<f64>, min_catch: Vec<f64>) -> Result<Self> {
        check_components("min_biomass", &min_biomass)?;
        check_components("min_catch", &min_catch)?;
        check_len("min_catch", min_catch.len(), min_biomass.len())?;
        Ok(Self { min_biomass, min_catch })
    }

    /// Biomass floors only; catches unconstrained.
    pub fn biomass_only(min_biomass: Vec<f64>) -> Result<Self> {
        let n = min_biomass.len();
        Self::new(min_biomass, vec![0.0; n])
    }

    pub fn n_species(&self) -> usize {
        self.min_biomass.len()
    }

    pub fn min_biomass(&self) -> &[f64] {
        &self.min_biomass
    }

    pub fn min_catch(&self) -> &[f64] {
        &self.min_catch
    }

    /// Same biomass floors with different catch floors.
    pub fn with_min_catch(&self, min_catch: Vec<f64>) -> Result<Self> {
        Self::new(self.min_biomass.clone(), min_catch)
    }
}

/// Per-species growth factors `R_i(state, effort_i)`.
///
/// Implementations are expected to be "nice": for a fixed state the factor of
/// species `i` is continuous and nonincreasing in `effort`, with a limit
/// `≤ 0` as the effort grows without bound. The viability and yield
/// routines depend on this to bracket their roots.
pub trait GrowthModel: Send + Sync {
    fn n_species(&self) -> usize;

    /// Growth factor of `species` at `state` under its own harvest `effort`.
    fn growth_factor(&self, species: usize, state: &[f64], effort: f64) -> f64;

    /// Closed-form effort at which the factor of `species` equals `target`.
    ///
    /// `None` means no closed form is available and callers fall back to
    /// bracketing and bisection. Implementations returning `Some` must return
    /// the largest such effort.
    fn effort_for_factor(&self, _species: usize, _state: &[f64], _target: f64) -> Option<f64> {
        None
    }

    /// Closed-form equilibria `x = x ⊙ R(x, e)` for constant efforts.
    ///
    /// `None` means the model has no closed form; a damped fixed-point
    /// iteration is used instead.
    fn equilibria(&self, _efforts: &[f64]) -> Option<Vec<Vec<f64>>> {
        None
    }
}

impl<M: GrowthModel + ?Sized> GrowthModel for &M {
    fn n_species(&self) -> usize {
        (**self).n_species()
    }
    fn growth_factor(&self, species: usize, state: &[f64], effort: f64) -> f64 {
        (**self).growth_factor(species, state, effort)
    }
    fn effort_for_factor(&self, species: usize, state: &[f64], target: f64) -> Option<f64> {
        (**self).effort_for_factor(species, state, target)
    }
    fn equilibria(&self, efforts: &[f64]) -> Option<Vec<Vec<f64>>> {
        (**self).equilibria(efforts)
    }
}

/// Biomass of `species` one year ahead, before clamping.
pub(crate) fn raw_successor<M: GrowthModel + ?Sized>(
    model: &M,
    species: usize,
    state: &[f64],
    effort: f64,
) -> f64 {
    state[species] * model.growth_factor(species, state, effort)
}

/// Result of advancing the dynamics by one year.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: BiomassState,
    /// Set when at least one species had a negative growth factor and was
    /// clamped to zero biomass.
    pub extinction: bool,
}

/// Advances the harvested dynamics by one year.
///
/// Negative successors are clamped to zero and reported as an extinction
/// event.
pub fn step<M: GrowthModel + ?Sized>(
    model: &M,
    state: &BiomassState,
    efforts: &EffortVector,
) -> Result<StepOutcome> {
    let n = model.n_species();
    check_len("state", state.len(), n)?;
    check_len("efforts", efforts.len(), n)?;
    let mut extinction = false;
    let next = (0..n)
        .map(|i| {
            let x = raw_successor(model, i, state.as_slice(), efforts[i]);
            if x < 0.0 || x.is_nan() {
                extinction = true;
                0.0
            } else {
                x
            }
        })
        .collect();
    Ok(StepOutcome {
        state: BiomassState(next),
        extinction,
    })
}

/// Catches `effort_i × biomass_i`, tonnes per year.
pub fn catches(state: &BiomassState, efforts: &EffortVector) -> Result<Vec<f64>> {
    check_len("efforts", efforts.len(), state.len())?;
    Ok(state
        .as_slice()
        .iter()
        .zip(efforts.as_slice())
        .map(|(x, e)| e * x)
        .collect())
}

/// Whether `(state, efforts)` lies in the acceptable set: every biomass at or
/// above its floor and every catch at or above its floor.
pub fn check_acceptable(
    state: &BiomassState,
    efforts: &EffortVector,
    constraints: &ConstraintSet,
) -> Result<bool> {
    check_len("constraints", constraints.n_species(), state.len())?;
    let caught = catches(state, efforts)?;
    Ok((0..state.len()).all(|i| {
        state[i] >= constraints.min_biomass[i] && caught[i] >= constraints.min_catch[i]
    }))
}
