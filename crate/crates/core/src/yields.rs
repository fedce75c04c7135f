//! Equilibrium catches, ecosystem viable yields (EVY) and maximum sustainable
//! yields (MSY).
//!
//! The EVY of species `i` from initial biomasses `x0` is the largest catch
//! `C ∈ [0, C*_i]` such that `x0_i R_i(x0, C / x0_i) ≥ B♭_i`, where `C*_i` is
//! the largest catch keeping the growth factor at the biomass floors at one.
//! All routines here are generic over [`GrowthModel`] and solve their
//! one-dimensional problems by bracketing and bisection, using the model's
//! closed forms only where stated.

use crate::ecosystem::{raw_successor, BiomassState, ConstraintSet, EffortVector, GrowthModel};
use crate::error::{domain, invalid, Result};
use crate::lotka_volterra::LvParams;
use crate::roots::{bracket_up, effort_for_catch, rightmost, CATCH_TOL};

/// Which bound of the EVY definition is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingBranch {
    /// The equilibrium catch at the biomass floors binds.
    EquilibriumCapped,
    /// The one-step condition from the initial state binds.
    InitialStateCapped,
}

impl BindingBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            BindingBranch::EquilibriumCapped => "equilibrium-capped",
            BindingBranch::InitialStateCapped => "initial-state-capped",
        }
    }
}

/// Largest catches holding each growth factor at one at the biomass floors.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCatches {
    pub catches: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvyResult {
    pub evy: Vec<f64>,
    pub binding: Vec<BindingBranch>,
    /// Caps `C*_i` the yields were bounded by.
    pub equilibrium: EquilibriumCatches,
}

fn check_model_dims<M: GrowthModel + ?Sized>(model: &M, constraints: &ConstraintSet) -> Result<()> {
    if constraints.n_species() != model.n_species() {
        return Err(invalid(format!(
            "constraints cover {} species, model has {}",
            constraints.n_species(),
            model.n_species()
        )));
    }
    Ok(())
}

/// Species whose unharvested factor at the floors is below one.
fn floor_growth_violations<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
) -> Vec<String> {
    let floors = constraints.min_biomass();
    (0..model.n_species())
        .filter_map(|i| {
            let f = model.growth_factor(i, floors, 0.0);
            (floors[i] > 0.0 && f < 1.0)
                .then(|| format!("species {i}: R_{i}(B_min, 0) >= 1 ({f} < 1)"))
        })
        .collect()
}

/// `C*_i` by bisection on `C ↦ R_i(B♭, C / B♭_i) ≥ 1`. Returns the right
/// end of the root set.
fn equilibrium_catch_bisect<M: GrowthModel + ?Sized>(
    model: &M,
    floors: &[f64],
    species: usize,
) -> Result<f64> {
    let b = floors[species];
    if b == 0.0 {
        return Ok(0.0);
    }
    let holds = |c: f64| model.growth_factor(species, floors, effort_for_catch(c, b)) >= 1.0;
    let hi = bracket_up(0.0, holds)?;
    Ok(rightmost(0.0, hi, CATCH_TOL, holds))
}

fn require_floor_growth<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
) -> Result<()> {
    let violated = floor_growth_violations(model, constraints);
    if violated.is_empty() {
        Ok(())
    } else {
        Err(domain(format!(
            "no harvest-free growth at the biomass floors: {}",
            violated.join("; ")
        )))
    }
}

/// Equilibrium catches at the biomass floors.
///
/// Uses the model's closed-form inverse when it has one, bisection
/// otherwise.
pub fn equilibrium_catches<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
) -> Result<EquilibriumCatches> {
    check_model_dims(model, constraints)?;
    require_floor_growth(model, constraints)?;
    let floors = constraints.min_biomass();
    let catches = (0..model.n_species())
        .map(|i| {
            if floors[i] == 0.0 {
                return Ok(0.0);
            }
            match model.effort_for_factor(i, floors, 1.0) {
                Some(e) => Ok(e.max(0.0) * floors[i]),
                None => equilibrium_catch_bisect(model, floors, i),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumCatches { catches })
}

/// Same as [`equilibrium_catches`] but always by bisection.
pub fn equilibrium_catches_bisect<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
) -> Result<EquilibriumCatches> {
    check_model_dims(model, constraints)?;
    require_floor_growth(model, constraints)?;
    let floors = constraints.min_biomass();
    let catches = (0..model.n_species())
        .map(|i| equilibrium_catch_bisect(model, floors, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumCatches { catches })
}

/// Violated initial-point conditions `x0_i ≥ B♭_i` and `x0_i R_i(x0, 0) ≥ B♭_i`.
pub fn initial_point_violations<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    state0: &BiomassState,
) -> Vec<String> {
    let floors = constraints.min_biomass();
    let x0 = state0.as_slice();
    let mut out = Vec::new();
    for i in 0..model.n_species() {
        if x0[i] < floors[i] {
            out.push(format!("species {i}: x0 >= B_min ({} < {})", x0[i], floors[i]));
        }
        let next = raw_successor(model, i, x0, 0.0);
        if next < floors[i] {
            out.push(format!(
                "species {i}: x0 R(x0, 0) >= B_min ({next} < {})",
                floors[i]
            ));
        }
    }
    out
}

/// Ecosystem viable yields from `state0`, by bisection.
///
/// Errors list every violated hypothesis: initial biomasses below the floors,
/// an unharvested successor below the floors, or no harvest-free growth at
/// the floors.
pub fn evy<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    state0: &BiomassState,
) -> Result<EvyResult> {
    check_model_dims(model, constraints)?;
    if state0.len() != model.n_species() {
        return Err(invalid("initial state dimension does not match the model"));
    }
    let mut violated = initial_point_violations(model, constraints, state0);
    violated.extend(floor_growth_violations(model, constraints));
    if !violated.is_empty() {
        return Err(domain(format!(
            "ecosystem viable yields undefined: {}",
            violated.join("; ")
        )));
    }
    let equilibrium = equilibrium_catches_bisect(model, constraints)?;
    let floors = constraints.min_biomass();
    let x0 = state0.as_slice();
    let mut evy = Vec::with_capacity(x0.len());
    let mut binding = Vec::with_capacity(x0.len());
    for (i, &cap) in equilibrium.catches.iter().enumerate() {
        if x0[i] == 0.0 {
            evy.push(0.0);
            binding.push(BindingBranch::EquilibriumCapped);
            continue;
        }
        let holds =
            |c: f64| raw_successor(model, i, x0, effort_for_catch(c, x0[i])) >= floors[i];
        if holds(cap) {
            evy.push(cap);
            binding.push(BindingBranch::EquilibriumCapped);
        } else {
            evy.push(rightmost(0.0, cap, CATCH_TOL, holds));
            binding.push(BindingBranch::InitialStateCapped);
        }
    }
    Ok(EvyResult {
        evy,
        binding,
        equilibrium,
    })
}

/// A state/effort pair with `x_i = x_i R_i(x, e_i)` for every species.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPoint {
    pub state: BiomassState,
    pub efforts: EffortVector,
}

impl EquilibriumPoint {
    pub fn catches(&self) -> Vec<f64> {
        crate::ecosystem::catches(&self.state, &self.efforts).expect("matching lengths")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsyResult {
    /// Species whose equilibrium catch is maximized.
    pub objective: usize,
    /// Equilibrium catches of every species at the maximizer; entry
    /// `objective` is the MSY.
    pub msy: Vec<f64>,
    pub equilibrium: EquilibriumPoint,
    /// Equilibrium biomasses all at or above their floors.
    pub viable: bool,
}

impl MsyResult {
    pub fn value(&self) -> f64 {
        self.msy[self.objective]
    }
}

/// Box of efforts searched for the MSY.
#[derive(Debug, Clone, PartialEq)]
pub struct EffortBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl EffortBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(invalid("effort box bounds must be nonempty and equally long"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a.is_finite() && b.is_finite() && *a >= 0.0 && a <= b)) {
            return Err(invalid("effort box needs finite 0 <= lo <= hi"));
        }
        Ok(Self { lo, hi })
    }

    /// `[0, hi_i]` in every dimension.
    pub fn from_origin(hi: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; hi.len()], hi)
    }
}

/// Grid and refinement settings of the MSY search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsySearch {
    /// Points per dimension in the initial scan.
    pub resolution: usize,
    /// Local refinement rounds around the best point.
    pub refine_rounds: usize,
}

impl Default for MsySearch {
    fn default() -> Self {
        Self {
            resolution: 201,
            refine_rounds: 40,
        }
    }
}

/// Damped fixed-point iteration `x ← (1 − θ) x + θ x ⊙ R(x, e)`.
///
/// Returns `None` if the iteration does not settle within the iteration cap.
pub fn damped_equilibrium<M: GrowthModel + ?Sized>(
    model: &M,
    efforts: &[f64],
    start: &[f64],
) -> Option<Vec<f64>> {
    const DAMPING: f64 = 0.5;
    const MAX_ITERS: usize = 20_000;
    const TOL: f64 = 1e-12;
    let n = model.n_species();
    let mut x = start.to_vec();
    for _ in 0..MAX_ITERS {
        let next: Vec<f64> = (0..n)
            .map(|i| {
                let s = raw_successor(model, i, &x, efforts[i]).max(0.0);
                (1.0 - DAMPING) * x[i] + DAMPING * s
            })
            .collect();
        if next.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let moved = next
            .iter()
            .zip(&x)
            .all(|(a, b)| (a - b).abs() <= TOL * a.abs().max(1.0));
        x = next;
        if moved {
            return Some(x);
        }
    }
    None
}

fn equilibria_at<M: GrowthModel + ?Sized>(
    model: &M,
    efforts: &[f64],
    start: &[f64],
) -> Vec<Vec<f64>> {
    model
        .equilibria(efforts)
        .unwrap_or_else(|| damped_equilibrium(model, efforts, start).into_iter().collect())
}

/// Best equilibrium catch of `objective` at fixed efforts.
fn objective_at<M: GrowthModel + ?Sized>(
    model: &M,
    efforts: &[f64],
    start: &[f64],
    objective: usize,
) -> Option<(f64, Vec<f64>)> {
    equilibria_at(model, efforts, start)
        .into_iter()
        .filter(|x| x[objective] > 0.0)
        .map(|x| (efforts[objective] * x[objective], x))
        .max_by(|a, b| a.0.total_cmp(&b.0))
}

fn for_each_grid_point(lo: &[f64], hi: &[f64], points: usize, mut f: impl FnMut(&[f64])) {
    let n = lo.len();
    let mut idx = vec![0usize; n];
    let mut e = vec![0.0; n];
    loop {
        for d in 0..n {
            e[d] = if points <= 1 {
                lo[d]
            } else {
                lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (points - 1) as f64
            };
        }
        f(&e);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            idx[d] += 1;
            if idx[d] < points {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// Maximum equilibrium catch of species `objective` over the effort box.
///
/// Equilibria come from the model's closed form when available, otherwise
/// from a damped fixed-point iteration started at twice the biomass floors.
/// Only equilibria with a positive objective biomass count; among several
/// equilibria at the same efforts, the one with the largest objective catch
/// is kept. The search is a dense scan followed by shrinking local scans, so
/// off closed-form models it is a heuristic. Returns `Ok(None)` when no
/// equilibrium with positive objective catch exists in the box.
pub fn msy_for_species<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    bounds: &EffortBox,
    objective: usize,
    search: &MsySearch,
) -> Result<Option<MsyResult>> {
    check_model_dims(model, constraints)?;
    let n = model.n_species();
    if bounds.lo.len() != n {
        return Err(invalid("effort box dimension does not match the model"));
    }
    if objective >= n {
        return Err(invalid(format!("objective species {objective} out of range")));
    }
    if search.resolution < 2 {
        return Err(invalid("MSY search resolution must be >= 2"));
    }
    let start: Vec<f64> = constraints
        .min_biomass()
        .iter()
        .map(|b| if *b > 0.0 { 2.0 * b } else { 1.0 })
        .collect();

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let consider = |e: &[f64], best: &mut Option<(f64, Vec<f64>, Vec<f64>)>| {
        if let Some((c, x)) = objective_at(model, e, &start, objective) {
            if best.as_ref().is_none_or(|b| c > b.0) {
                *best = Some((c, e.to_vec(), x));
            }
        }
    };
    for_each_grid_point(&bounds.lo, &bounds.hi, search.resolution, |e| {
        consider(e, &mut best)
    });
    let Some(_) = best else {
        return Ok(None);
    };

    let mut half: Vec<f64> = (0..n)
        .map(|d| (bounds.hi[d] - bounds.lo[d]) / (search.resolution - 1) as f64)
        .collect();
    for _ in 0..search.refine_rounds {
        let centre = best.as_ref().map(|b| b.1.clone()).expect("best set");
        let lo: Vec<f64> = (0..n).map(|d| (centre[d] - half[d]).max(bounds.lo[d])).collect();
        let hi: Vec<f64> = (0..n).map(|d| (centre[d] + half[d]).min(bounds.hi[d])).collect();
        for_each_grid_point(&lo, &hi, 11, |e| consider(e, &mut best));
        half.iter_mut().for_each(|h| *h *= 0.5);
    }

    let (_, efforts, state) = best.expect("best set");
    let point = EquilibriumPoint {
        state: BiomassState::new(state)?,
        efforts: EffortVector::new(efforts)?,
    };
    let floors = constraints.min_biomass();
    let viable = (0..n).all(|i| point.state[i] >= floors[i]);
    Ok(Some(MsyResult {
        objective,
        msy: point.catches(),
        equilibrium: point,
        viable,
    }))
}

/// [`msy_for_species`] for every species in turn.
pub fn msy_multispecies<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    bounds: &EffortBox,
    search: &MsySearch,
) -> Result<Vec<Option<MsyResult>>> {
    (0..model.n_species())
        .map(|i| msy_for_species(model, constraints, bounds, i, search))
        .collect()
}

/// Single-stock MSY of the prey recursion `B' = R B − (R/κ) B² − h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchaeferMsy {
    /// Tonnes per year.
    pub msy: f64,
    /// Equilibrium biomass at the maximum, tonnes.
    pub biomass: f64,
}

/// `(R − 1) K / 4`, attained at `B = K / 2`. Only `R` and `K` are used.
pub fn msy_schaefer(params: &LvParams) -> SchaeferMsy {
    SchaeferMsy {
        msy: (params.r() - 1.0) * params.k() / 4.0,
        biomass: params.k() / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lotka_volterra::{LvModel, PREDATOR, PREY};

    fn peru() -> LvModel {
        LvModel::new(LvParams::peru())
    }

    fn floors(y: f64, z: f64) -> ConstraintSet {
        ConstraintSet::biomass_only(vec![y, z]).unwrap()
    }

    #[test]
    fn equilibrium_catches_peru() {
        let eq = equilibrium_catches(&peru(), &floors(7e6, 2e5)).unwrap();
        assert!((eq.catches[0] - 5_399_248.223).abs() < 1e-2, "{:?}", eq.catches);
        assert!((eq.catches[1] - 56_830.0).abs() < 1e-6);
        let bis = equilibrium_catches_bisect(&peru(), &floors(7e6, 2e5)).unwrap();
        for i in 0..2 {
            assert!((bis.catches[i] - eq.catches[i]).abs() <= CATCH_TOL);
        }
    }

    #[test]
    fn doubling_predator_floor_lowers_prey_catch() {
        let eq = equilibrium_catches(&peru(), &floors(7e6, 4e5)).unwrap();
        // 5,399,248.2 - 7e6 * 1.22e-6 * 2e5
        assert!((eq.catches[0] - 3_691_248.223).abs() < 1e-2, "{}", eq.catches[0]);
    }

    #[test]
    fn unit_growth_at_floor_gives_zero_catch() {
        let p = LvParams::peru();
        let yb = (1.0 - p.l()) / p.beta();
        let eq = equilibrium_catches_bisect(&peru(), &floors(yb, 1e3)).unwrap();
        assert!(eq.catches[1].abs() <= CATCH_TOL);
    }

    #[test]
    fn equilibrium_catches_reject_shrinking_floor() {
        let err = equilibrium_catches(&peru(), &floors(1e6, 2e5)).unwrap_err();
        assert!(err.to_string().contains("species 1"), "{err}");
    }

    #[test]
    fn evy_peru_equilibrium_capped() {
        let state0 = BiomassState::new(vec![1.2e7, 3e5]).unwrap();
        let r = evy(&peru(), &floors(7e6, 2e5), &state0).unwrap();
        assert!((r.evy[0] - 5_399_248.223).abs() < 1.0, "{:?}", r.evy);
        assert!((r.evy[1] - 56_830.0).abs() < 1.0);
        assert_eq!(r.binding, vec![BindingBranch::EquilibriumCapped; 2]);
    }

    struct Logistic;

    impl GrowthModel for Logistic {
        fn n_species(&self) -> usize {
            1
        }
        fn growth_factor(&self, _: usize, x: &[f64], e: f64) -> f64 {
            1.5 - 0.5 * x[0] / 100.0 - e
        }
    }

    #[test]
    fn evy_zero_at_initial_equality() {
        // factor is exactly one at x = 100 without harvest
        let f = ConstraintSet::biomass_only(vec![100.0]).unwrap();
        let x0 = BiomassState::new(vec![100.0]).unwrap();
        let r = evy(&Logistic, &f, &x0).unwrap();
        assert_eq!(r.evy, vec![0.0]);
        assert_eq!(r.equilibrium.catches, vec![0.0]);
    }

    #[test]
    fn evy_lists_violations() {
        let x0 = BiomassState::new(vec![6e6, 1e5]).unwrap();
        let err = evy(&peru(), &floors(7e6, 2e5), &x0).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("species 0: x0 >= B_min"), "{msg}");
        assert!(msg.contains("species 1: x0 >= B_min"), "{msg}");
    }

    #[test]
    fn schaefer_peru() {
        let m = msy_schaefer(&LvParams::peru());
        assert!((m.msy - 11_651_562.5).abs() < 1e-6);
        assert_eq!(m.biomass, 18_642_500.0);
        let flat = LvParams::uncoupled(1.0 + 1e-9, 0.5, 1e7).unwrap();
        assert!(msy_schaefer(&flat).msy < 1e-2);
    }

    #[test]
    fn heavy_predator_effort_leaves_no_predator() {
        let p = LvParams::peru();
        let w = p.l() + p.beta() * p.k() - 1.0 + 0.01;
        let eqs = peru().equilibria(&[0.0, w]).unwrap();
        assert!(eqs.iter().all(|x| x[PREDATOR] == 0.0));
        let bounds = EffortBox::new(vec![0.0, w], vec![0.0, w + 0.5]).unwrap();
        let r = msy_for_species(&peru(), &floors(0.0, 0.0), &bounds, PREDATOR, &MsySearch::default())
            .unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn damped_iteration_finds_logistic_equilibrium() {
        let x = damped_equilibrium(&Logistic, &[0.2], &[10.0]).unwrap();
        // 1.5 - x/200 - 0.2 = 1  =>  x = 60
        assert!((x[0] - 60.0).abs() < 1e-8, "{x:?}");
        let floors = ConstraintSet::biomass_only(vec![10.0]).unwrap();
        let bounds = EffortBox::from_origin(vec![0.5]).unwrap();
        let r = msy_for_species(&Logistic, &floors, &bounds, PREY, &MsySearch::default())
            .unwrap()
            .unwrap();
        // catch e * 200 (0.5 - e), max at e = 0.25 -> 12.5
        assert!((r.value() - 12.5).abs() < 1e-6, "{}", r.value());
        assert!(r.viable);
    }
}
