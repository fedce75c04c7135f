//! Discrete-time Lotka–Volterra model with density dependence in the prey:
//!
//! ```text
//! y(t+1) = R y − (R/κ) y² − α y z − v y
//! z(t+1) = L z + β y z − w z
//! ```
//!
//! with `κ = R K / (R − 1)`. Besides the [`GrowthModel`] implementation this
//! module carries the closed-form viability precondition and ecosystem
//! viable yields for this model.

use crate::ecosystem::{BiomassState, ConstraintSet, EffortVector, GrowthModel};
use crate::error::{domain, invalid, Result};
use crate::yields::BindingBranch;

pub const PREY: usize = 0;
pub const PREDATOR: usize = 1;

/// Parameters of the prey–predator model. `κ` is always derived from `R`
/// and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvParams {
    r: f64,
    l: f64,
    k: f64,
    alpha: f64,
    beta: f64,
}

impl LvParams {
    /// Requires `R > 1`, `0 < L < 1`, `K > 0`, `α > 0`, `β > 0`.
    pub fn new(r: f64, l: f64, k: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self::build(r, l, k, alpha, beta)?;
        if !(alpha > 0.0) || !(beta > 0.0) {
            return Err(invalid(format!(
                "alpha ({alpha}) and beta ({beta}) must be > 0"
            )));
        }
        Ok(p)
    }

    /// Prey and predator without any trophic interaction (`α = β = 0`).
    /// The prey then follows a plain logistic recursion.
    pub fn uncoupled(r: f64, l: f64, k: f64) -> Result<Self> {
        Self::build(r, l, k, 0.0, 0.0)
    }

    fn build(r: f64, l: f64, k: f64, alpha: f64, beta: f64) -> Result<Self> {
        let all = [r, l, k, alpha, beta];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("Lotka-Volterra parameters must be finite"));
        }
        if !(r > 1.0) {
            return Err(invalid(format!("R = {r} must be > 1")));
        }
        if !(l > 0.0 && l < 1.0) {
            return Err(invalid(format!("L = {l} must lie in (0, 1)")));
        }
        if !(k > 0.0) {
            return Err(invalid(format!("K = {k} must be > 0")));
        }
        if alpha < 0.0 || beta < 0.0 {
            return Err(invalid("alpha and beta must be nonnegative"));
        }
        Ok(Self { r, l, k, alpha, beta })
    }

    /// Anchovy (prey) and hake (predator) off Peru, 1971–1981 fit.
    pub fn peru() -> Self {
        Self::new(2.25, 0.945, 37_285e3, 1.220e-6, 4.845e-8).expect("valid constants")
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `κ = R K / (R − 1)`, tonnes.
    pub fn kappa(&self) -> f64 {
        self.r * self.k / (self.r - 1.0)
    }

    /// Unharvested prey factor `R − (R/κ) y − α z`.
    pub fn prey_base(&self, y: f64, z: f64) -> f64 {
        self.r - self.r / self.kappa() * y - self.alpha * z
    }

    /// Unharvested predator factor `L + β y`.
    pub fn predator_base(&self, y: f64) -> f64 {
        self.l + self.beta * y
    }

    /// `[R, L, K, α, β]`, the free parameters in fitting order.
    pub fn to_array(&self) -> [f64; 5] {
        [self.r, self.l, self.k, self.alpha, self.beta]
    }

    pub fn from_array(v: [f64; 5]) -> Result<Self> {
        Self::build(v[0], v[1], v[2], v[3], v[4])
    }
}

/// [`GrowthModel`] adapter over [`LvParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvModel {
    pub params: LvParams,
}

impl LvModel {
    pub fn new(params: LvParams) -> Self {
        Self { params }
    }
}

impl GrowthModel for LvModel {
    fn n_species(&self) -> usize {
        2
    }

    fn growth_factor(&self, species: usize, state: &[f64], effort: f64) -> f64 {
        match species {
            PREY => self.params.prey_base(state[0], state[1]) - effort,
            PREDATOR => self.params.predator_base(state[0]) - effort,
            _ => panic!("species index {species} out of range for a two-species model"),
        }
    }

    fn effort_for_factor(&self, species: usize, state: &[f64], target: f64) -> Option<f64> {
        // factors are affine in effort with slope -1
        Some(self.growth_factor(species, state, 0.0) - target)
    }

    fn equilibria(&self, efforts: &[f64]) -> Option<Vec<Vec<f64>>> {
        let p = &self.params;
        let (v, w) = (efforts[0], efforts[1]);
        let mut out = vec![vec![0.0, 0.0]];
        let prey_only = p.kappa() * (p.r - 1.0 - v) / p.r;
        if prey_only > 0.0 {
            out.push(vec![prey_only, 0.0]);
        }
        if p.beta > 0.0 && p.alpha > 0.0 {
            let y = (1.0 - p.l + w) / p.beta;
            let z = (p.r - 1.0 - v - p.r / p.kappa() * y) / p.alpha;
            if y > 0.0 && z > 0.0 {
                out.push(vec![y, z]);
            }
        }
        Some(out)
    }
}

/// `(R − (R/κ)y − αz − v, L + βy − w)`.
pub fn lv_growth_factors(
    params: &LvParams,
    state: &BiomassState,
    efforts: &EffortVector,
) -> Result<(f64, f64)> {
    if state.len() != 2 || efforts.len() != 2 {
        return Err(invalid("Lotka-Volterra model needs two species"));
    }
    Ok((
        params.prey_base(state[0], state[1]) - efforts[0],
        params.predator_base(state[0]) - efforts[1],
    ))
}

fn two_species(constraints: &ConstraintSet, state0: &BiomassState) -> Result<()> {
    if constraints.n_species() != 2 || state0.len() != 2 {
        return Err(invalid("Lotka-Volterra model needs two species"));
    }
    Ok(())
}

/// Lists the violated initial-point inequalities `y0 ≥ y♭`, `z0 ≥ z♭`,
/// `y0 (R − (R/κ) y0 − α z0) ≥ y♭`.
fn precondition_violations(
    params: &LvParams,
    constraints: &ConstraintSet,
    state0: &BiomassState,
) -> Vec<String> {
    let (yb, zb) = (constraints.min_biomass()[0], constraints.min_biomass()[1]);
    let (y0, z0) = (state0[0], state0[1]);
    let mut out = Vec::new();
    if y0 < yb {
        out.push(format!("y0 >= y_min ({y0} < {yb})"));
    }
    if z0 < zb {
        out.push(format!("z0 >= z_min ({z0} < {zb})"));
    }
    let next = y0 * params.prey_base(y0, z0);
    if next < yb {
        out.push(format!(
            "y0 (R - R/kappa y0 - alpha z0) >= y_min ({next} < {yb})"
        ));
    }
    out
}

/// Initial-point condition under which the closed-form yields apply.
pub fn lv_viability_precondition(
    params: &LvParams,
    constraints: &ConstraintSet,
    state0: &BiomassState,
) -> Result<bool> {
    two_species(constraints, state0)?;
    Ok(precondition_violations(params, constraints, state0).is_empty())
}

/// Closed-form ecosystem viable yields of the Lotka–Volterra model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LvEvy {
    pub prey: f64,
    pub predator: f64,
    /// Which term of the prey minimum binds.
    pub prey_branch: BindingBranch,
}

/// ```text
/// prey     = min{ y♭(R − (R/κ)y♭ − αz♭) − y♭ , y0(R − (R/κ)y0 − αz0) − y♭ }
/// predator = z♭(L + β y♭ − 1)
/// ```
///
/// Fails with a domain error naming the violated inequalities. Besides the
/// initial-point condition, the unharvested factor of every species with a
/// positive biomass floor must be at least one at the floors, so that the
/// yields are nonnegative.
pub fn lv_evy_closed_form(
    params: &LvParams,
    constraints: &ConstraintSet,
    state0: &BiomassState,
) -> Result<LvEvy> {
    two_species(constraints, state0)?;
    let violated = precondition_violations(params, constraints, state0);
    if !violated.is_empty() {
        return Err(domain(format!(
            "initial state violates {}",
            violated.join("; ")
        )));
    }
    let (yb, zb) = (constraints.min_biomass()[0], constraints.min_biomass()[1]);
    let prey_at_floor = params.prey_base(yb, zb);
    if yb > 0.0 && prey_at_floor < 1.0 {
        return Err(domain(format!(
            "R - R/kappa y_min - alpha z_min >= 1 ({prey_at_floor} < 1)"
        )));
    }
    let pred_at_floor = params.predator_base(yb);
    if zb > 0.0 && pred_at_floor < 1.0 {
        return Err(domain(format!("L + beta y_min >= 1 ({pred_at_floor} < 1)")));
    }
    let (y0, z0) = (state0[0], state0[1]);
    let cap = yb * prey_at_floor - yb;
    let from_state = y0 * params.prey_base(y0, z0) - yb;
    let (prey, prey_branch) = if cap <= from_state {
        (cap, BindingBranch::EquilibriumCapped)
    } else {
        (from_state, BindingBranch::InitialStateCapped)
    };
    Ok(LvEvy {
        prey,
        predator: zb * (pred_at_floor - 1.0),
        prey_branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(y: f64, z: f64) -> BiomassState {
        BiomassState::new(vec![y, z]).unwrap()
    }

    fn floors(y: f64, z: f64) -> ConstraintSet {
        ConstraintSet::biomass_only(vec![y, z]).unwrap()
    }

    #[test]
    fn kappa_is_derived_from_carrying_capacity() {
        let p = LvParams::peru();
        // 67,113 x 10^3 t to the nearest thousand
        assert!((p.kappa() - 67_113e3).abs() < 1.0);
    }

    #[test]
    fn growth_factors_at_minimal_levels() {
        let (a, b) =
            lv_growth_factors(&LvParams::peru(), &s(7e6, 2e5), &EffortVector::zeros(2)).unwrap();
        assert!((a - 1.771322).abs() < 1e-6, "{a}");
        assert!((b - 1.28415).abs() < 1e-12, "{b}");
    }

    #[test]
    fn growth_factors_at_origin_are_r_and_l() {
        let (a, b) =
            lv_growth_factors(&LvParams::peru(), &s(0.0, 0.0), &EffortVector::zeros(2)).unwrap();
        assert_eq!((a, b), (2.25, 0.945));
    }

    #[test]
    fn carrying_capacity_is_prey_fixed_point() {
        let p = LvParams::peru();
        let (a, _) = lv_growth_factors(&p, &s(p.k(), 0.0), &EffortVector::zeros(2)).unwrap();
        assert!((a - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(LvParams::new(1.0, 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(LvParams::new(2.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(LvParams::new(2.0, 0.5, 0.0, 1.0, 1.0).is_err());
        assert!(LvParams::new(2.0, 0.5, 1.0, 0.0, 1.0).is_err());
        assert!(LvParams::new(2.0, 0.5, 1.0, 1.0, f64::NAN).is_err());
        assert!(LvParams::uncoupled(2.0, 0.5, 1.0).is_ok());
    }

    #[test]
    fn precondition_examples() {
        let p = LvParams::peru();
        let f = floors(7e6, 2e5);
        assert!(lv_viability_precondition(&p, &f, &s(7e6, 2e5)).unwrap());
        assert!(!lv_viability_precondition(&p, &f, &s(6e6, 2e5)).unwrap());
        // 3e7 (2.25 - 1.00576 - 1.464) < 0
        assert!(!lv_viability_precondition(&p, &f, &s(3.0e7, 1.2e6)).unwrap());
    }

    #[test]
    fn closed_form_peru_yields() {
        let p = LvParams::peru();
        let evy = lv_evy_closed_form(&p, &floors(7e6, 2e5), &s(7e6, 2e5)).unwrap();
        assert!((evy.prey - 5_399_248.223).abs() < 1e-2, "{}", evy.prey);
        assert!((evy.prey - 5_399_254.0).abs() / 5_399_254.0 < 1e-5);
        assert!((evy.predator - 56_830.0).abs() < 1e-6, "{}", evy.predator);
        assert_eq!(evy.prey_branch, BindingBranch::EquilibriumCapped);
        assert!((evy.prey - 5_399_000.0).abs() / 5_399_000.0 < 5e-3);
        assert!((evy.predator - 56_800.0).abs() / 56_800.0 < 5e-3);
    }

    #[test]
    fn closed_form_zero_prey_floor_and_state() {
        let p = LvParams::peru();
        let evy = lv_evy_closed_form(&p, &floors(0.0, 2e5), &s(0.0, 2e5));
        // predator floor factor is L < 1 once y_min = 0
        assert!(evy.is_err());
        let evy = lv_evy_closed_form(&p, &floors(0.0, 0.0), &s(0.0, 0.0)).unwrap();
        assert_eq!(evy.prey, 0.0);
        assert_eq!(evy.predator, 0.0);
    }

    #[test]
    fn closed_form_predator_at_survival_boundary() {
        let p = LvParams::peru();
        // L + beta y_min = 1
        let yb = (1.0 - p.l()) / p.beta();
        let evy = lv_evy_closed_form(&p, &floors(yb, 1e3), &s(yb * 1.5, 1e3)).unwrap();
        assert!(evy.predator.abs() < 1e-9);
    }

    #[test]
    fn closed_form_names_violated_inequality() {
        let p = LvParams::peru();
        let err = lv_evy_closed_form(&p, &floors(7e6, 2e5), &s(6e6, 2e5)).unwrap_err();
        assert!(err.to_string().contains("y0 >= y_min"), "{err}");
    }

    #[test]
    fn initial_state_branch_binds_near_floor() {
        let p = LvParams::peru();
        let f = floors(7e6, 2e5);
        // a low but viable prey stock: successor just above the floor
        let evy = lv_evy_closed_form(&p, &f, &s(7e6, 6e5)).unwrap();
        assert_eq!(evy.prey_branch, BindingBranch::InitialStateCapped);
        let expected = 7e6 * p.prey_base(7e6, 6e5) - 7e6;
        assert_eq!(evy.prey, expected);
    }

    #[test]
    fn predator_yield_ignores_initial_state() {
        let p = LvParams::peru();
        let f = floors(7e6, 2e5);
        let a = lv_evy_closed_form(&p, &f, &s(7e6, 2e5)).unwrap();
        let b = lv_evy_closed_form(&p, &f, &s(1.5e7, 9e5)).unwrap();
        assert_eq!(a.predator, b.predator);
    }

    #[test]
    fn equilibria_enumerates_branches() {
        let m = LvModel::new(LvParams::peru());
        let eq = m.equilibria(&[0.0, 0.5]).unwrap();
        assert_eq!(eq.len(), 3);
        for x in &eq {
            for i in 0..2 {
                let next = x[i] * m.growth_factor(i, x, [0.0, 0.5][i]);
                assert!((next - x[i]).abs() <= 1e-9 * x[i].max(1.0));
            }
        }
    }
}
