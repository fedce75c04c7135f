//! Viability kernels of the harvested dynamics under biomass and catch floors.
//!
//! Two routes are provided. [`AnalyticKernel`] tests membership directly:
//! when the growth factors at the biomass floors stay at or above one under
//! the minimal efforts, a state is viable iff it is above the floors and its
//! successor under the minimal efforts is too. [`grid_kernel`] approximates
//! the kernel from above on a rectangular grid by iterating
//!
//! ```text
//! V_0     = { x ≥ B♭ }
//! V_{k+1} = { x ∈ V_k : some acceptable effort sends x into V_k }
//! ```
//!
//! until two consecutive layers coincide. Cells are judged at their centres;
//! a successor belongs to the cell containing it and successors outside the
//! grid are non-members.

use std::io::{self, Write};

use crate::ecosystem::{raw_successor, BiomassState, ConstraintSet, EffortVector, GrowthModel};
use crate::error::{domain, invalid, Result};
use crate::lotka_volterra::LvParams;
use crate::roots::{bracket_up, effort_for_catch, rightmost, EFFORT_TOL};

/// Efforts tried per species: 32 interior points plus both endpoints.
pub const EFFORT_SAMPLES: usize = 34;

fn check_dims<M: GrowthModel + ?Sized>(model: &M, constraints: &ConstraintSet) -> Result<()> {
    if model.n_species() != constraints.n_species() {
        return Err(invalid(format!(
            "constraints cover {} species, model has {}",
            constraints.n_species(),
            model.n_species()
        )));
    }
    Ok(())
}

/// Smallest effort meeting the catch floor, `None` when the biomass is zero
/// and a positive catch is required.
fn min_effort(min_catch: f64, biomass: f64) -> Option<f64> {
    if min_catch == 0.0 {
        Some(0.0)
    } else if biomass > 0.0 {
        Some(effort_for_catch(min_catch, biomass))
    } else {
        None
    }
}

/// Largest effort `e ≥ lower` whose successor stays at or above the floor,
/// or `None` if even `lower` drops below it.
fn max_effort<M: GrowthModel + ?Sized>(
    model: &M,
    species: usize,
    state: &[f64],
    floor: f64,
    lower: f64,
) -> Result<Option<f64>> {
    let holds = |e: f64| raw_successor(model, species, state, e) >= floor;
    if !holds(lower) {
        return Ok(None);
    }
    let x = state[species];
    if x == 0.0 {
        return Ok(Some(lower));
    }
    if let Some(mut e) = model.effort_for_factor(species, state, floor / x) {
        if e.is_finite() && e >= lower {
            for _ in 0..64 {
                if holds(e) {
                    return Ok(Some(e));
                }
                e = e.next_down();
                if e < lower {
                    break;
                }
            }
        }
    }
    let hi = bracket_up(lower, holds)?;
    Ok(Some(rightmost(lower, hi, EFFORT_TOL, holds)))
}

/// Whether every growth factor at the biomass floors is at least one under
/// the effort `C♭_i / B♭_i` (zero where both floors are zero).
///
/// A zero biomass floor with a positive catch floor is a domain error.
pub fn favorable_conditions<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
) -> Result<bool> {
    check_dims(model, constraints)?;
    let floors = constraints.min_biomass();
    let mut ok = true;
    for i in 0..model.n_species() {
        let c = constraints.min_catch()[i];
        let e = min_effort(c, floors[i]).ok_or_else(|| {
            domain(format!(
                "species {i}: catch floor {c} with a zero biomass floor leaves the effort undefined"
            ))
        })?;
        ok &= model.growth_factor(i, floors, e) >= 1.0;
    }
    Ok(ok)
}

/// Closed-form viability kernel, valid under the favorable conditions.
#[derive(Debug, Clone)]
pub struct AnalyticKernel<M> {
    model: M,
    constraints: ConstraintSet,
}

impl<M: GrowthModel> AnalyticKernel<M> {
    /// Fails with a domain error unless [`favorable_conditions`] holds.
    pub fn new(model: M, constraints: ConstraintSet) -> Result<Self> {
        if !favorable_conditions(&model, &constraints)? {
            return Err(domain(
                "growth factors at the biomass floors fall below one under the minimal efforts",
            ));
        }
        Ok(Self { model, constraints })
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    /// Minimal efforts meeting the catch floors at `state`.
    pub fn min_efforts(&self, state: &[f64]) -> Option<Vec<f64>> {
        state
            .iter()
            .zip(self.constraints.min_catch())
            .map(|(x, c)| min_effort(*c, *x))
            .collect()
    }

    pub fn contains(&self, state: &[f64]) -> bool {
        if state.len() != self.model.n_species() {
            return false;
        }
        let floors = self.constraints.min_biomass();
        let catches = self.constraints.min_catch();
        (0..state.len()).all(|i| {
            state[i] >= floors[i]
                && min_effort(catches[i], state[i])
                    .is_some_and(|e| raw_successor(&self.model, i, state, e) >= floors[i])
        })
    }

    /// Admissible efforts at a kernel state.
    ///
    /// The lower bound meets the catch floors; the upper bound is the
    /// largest effort whose successor stays at the biomass floor.
    pub fn control_box(&self, state: &BiomassState) -> Result<ViableControlBox<'_, M>> {
        if !self.contains(state.as_slice()) {
            return Err(domain(format!(
                "state {:?} is outside the viability kernel",
                state.as_slice()
            )));
        }
        let x = state.as_slice();
        let lower = self.min_efforts(x).expect("kernel states have minimal efforts");
        let floors = self.constraints.min_biomass();
        let upper = (0..x.len())
            .map(|i| {
                max_effort(&self.model, i, x, floors[i], lower[i])?
                    .ok_or_else(|| domain("kernel state without admissible effort"))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ViableControlBox {
            kernel: self,
            state: state.clone(),
            lower: EffortVector::new(lower)?,
            upper: EffortVector::new(upper)?,
        })
    }
}

/// Efforts `lower ≤ e ≤ upper` at one state, with the successor test.
#[derive(Debug, Clone)]
pub struct ViableControlBox<'k, M> {
    kernel: &'k AnalyticKernel<M>,
    pub state: BiomassState,
    pub lower: EffortVector,
    pub upper: EffortVector,
}

impl<M: GrowthModel> ViableControlBox<'_, M> {
    pub fn contains(&self, efforts: &[f64]) -> bool {
        efforts.len() == self.lower.len()
            && (0..efforts.len()).all(|i| efforts[i] >= self.lower[i] && efforts[i] <= self.upper[i])
    }

    /// In the box, and the successor is back in the kernel.
    pub fn accepts(&self, efforts: &[f64]) -> bool {
        if !self.contains(efforts) {
            return false;
        }
        let model = self.kernel.model();
        let x = self.state.as_slice();
        // same clamping as `step`
        let next: Vec<f64> = (0..x.len())
            .map(|i| {
                let v = raw_successor(model, i, x, efforts[i]);
                if v >= 0.0 { v } else { 0.0 }
            })
            .collect();
        self.kernel.contains(&next)
    }

    /// `EFFORT_SAMPLES` evenly spaced efforts of species `i`, endpoints included.
    pub fn samples(&self, i: usize) -> Vec<f64> {
        sample_interval(self.lower[i], self.upper[i])
    }
}

pub(crate) fn sample_interval(lo: f64, hi: f64) -> Vec<f64> {
    let last = EFFORT_SAMPLES - 1;
    (0..EFFORT_SAMPLES)
        .map(|j| {
            if j == last {
                hi
            } else {
                lo + (hi - lo) * j as f64 / last as f64
            }
        })
        .collect()
}

/// Rectangular cell grid over the state space.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeometry {
    lo: Vec<f64>,
    hi: Vec<f64>,
    cells: Vec<usize>,
    strides: Vec<usize>,
}

impl GridGeometry {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != cells.len() {
            return Err(invalid("grid bounds and resolution must have matching lengths"));
        }
        for d in 0..lo.len() {
            if !(lo[d].is_finite() && hi[d].is_finite() && lo[d] < hi[d]) {
                return Err(invalid(format!("grid bounds [{}, {}] are empty", lo[d], hi[d])));
            }
            if cells[d] < 2 {
                return Err(invalid("grid resolution must be >= 2 per dimension"));
            }
        }
        let mut strides = Vec::with_capacity(cells.len());
        let mut s = 1usize;
        for n in &cells {
            strides.push(s);
            s = s
                .checked_mul(*n)
                .ok_or_else(|| invalid("grid has too many cells"))?;
        }
        Ok(Self { lo, hi, cells, strides })
    }

    /// `[0, 1.2 κ] × [0, 1.2 (R − 1)/α]` with `cells` cells per side.
    pub fn lv_default(params: &LvParams, cells: usize) -> Result<Self> {
        let z_hi = if params.alpha() > 0.0 {
            1.2 * (params.r() - 1.0) / params.alpha()
        } else {
            return Err(invalid("default grid needs alpha > 0"));
        };
        Self::new(vec![0.0, 0.0], vec![1.2 * params.kappa(), z_hi], vec![cells, cells])
    }

    pub fn dims(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn n_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn width(&self, d: usize) -> f64 {
        (self.hi[d] - self.lo[d]) / self.cells[d] as f64
    }

    /// Per-dimension indices of a flat cell index; dimension 0 varies fastest.
    pub fn unflatten(&self, flat: usize) -> Vec<usize> {
        self.cells
            .iter()
            .zip(&self.strides)
            .map(|(n, s)| (flat / s) % n)
            .collect()
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.unflatten(flat)
            .iter()
            .enumerate()
            .map(|(d, &j)| self.lo[d] + (j as f64 + 0.5) * self.width(d))
            .collect()
    }

    /// Index along dimension `d` of the cell containing `x`.
    pub fn index_along(&self, d: usize, x: f64) -> Option<usize> {
        if !(x >= self.lo[d] && x < self.hi[d]) {
            return None;
        }
        let j = ((x - self.lo[d]) / self.width(d)).floor() as usize;
        Some(j.min(self.cells[d] - 1))
    }

    /// Flat index of the cell containing `x`.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let idx = (0..self.dims())
            .map(|d| self.index_along(d, x[d]))
            .collect::<Option<Vec<_>>>()?;
        Some(self.flatten(&idx))
    }
}

/// Grid approximation of the decreasing layers `V_0 ⊇ V_1 ⊇ …`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    pub geometry: GridGeometry,
    /// `layers[k][cell]` is membership of `cell` in `V_k`.
    pub layers: Vec<Vec<bool>>,
    /// First `k` with `V_k = V_{k−1}`; then `V_k` is the kernel on this grid.
    pub stationary_at: Option<usize>,
}

impl KernelGrid {
    pub fn final_layer(&self) -> &[bool] {
        self.layers.last().expect("layer 0 always present")
    }

    pub fn member_count(&self, k: usize) -> usize {
        self.layers[k].iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.member_count(self.layers.len() - 1) == 0
    }

    /// Iteration at which `cell` first left the layers, `None` if it is in
    /// the final layer.
    pub fn first_excluded(&self, cell: usize) -> Option<usize> {
        self.layers.iter().position(|layer| !layer[cell])
    }

    pub fn contains_state(&self, x: &[f64]) -> bool {
        self.geometry
            .cell_of(x)
            .is_some_and(|c| self.final_layer()[c])
    }

    /// Fraction of cells whose final membership matches `kernel` at the
    /// cell centre.
    pub fn agreement<M: GrowthModel>(&self, kernel: &AnalyticKernel<M>) -> f64 {
        let last = self.final_layer();
        let n = self.geometry.n_cells();
        let same = (0..n)
            .filter(|&c| kernel.contains(&self.geometry.center(c)) == last[c])
            .count();
        same as f64 / n as f64
    }

    /// Writes `i,j,y_center,z_center,layer_first_excluded` rows (`-1` for
    /// cells in the final layer). Two-dimensional grids only.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.geometry.dims() != 2 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "grid export is defined for two species",
            ));
        }
        writeln!(out, "i,j,y_center,z_center,layer_first_excluded")?;
        for c in 0..self.geometry.n_cells() {
            let idx = self.geometry.unflatten(c);
            let x = self.geometry.center(c);
            let first = self.first_excluded(c).map_or(-1, |k| k as i64);
            writeln!(out, "{},{},{},{},{}", idx[0], idx[1], x[0], x[1], first)?;
        }
        Ok(())
    }
}

/// Per-species successor cell indices reachable from a cell centre with the
/// sampled admissible efforts; `None` when some species has none.
fn successor_indices<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    geometry: &GridGeometry,
    x: &[f64],
) -> Result<Option<Vec<Vec<usize>>>> {
    let floors = constraints.min_biomass();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let Some(lower) = min_effort(constraints.min_catch()[i], x[i]) else {
            return Ok(None);
        };
        let Some(upper) = max_effort(model, i, x, floors[i], lower)? else {
            return Ok(None);
        };
        let mut idx: Vec<usize> = sample_interval(lower, upper)
            .into_iter()
            .filter_map(|e| geometry.index_along(i, raw_successor(model, i, x, e).max(0.0)))
            .collect();
        idx.sort_unstable();
        idx.dedup();
        if idx.is_empty() {
            return Ok(None);
        }
        out.push(idx);
    }
    Ok(Some(out))
}

fn any_member(geometry: &GridGeometry, cands: &[Vec<usize>], set: &[bool]) -> bool {
    fn rec(g: &GridGeometry, cands: &[Vec<usize>], set: &[bool], d: usize, base: usize) -> bool {
        if d == cands.len() {
            return set[base];
        }
        cands[d]
            .iter()
            .any(|&j| rec(g, cands, set, d + 1, base + j * g.strides[d]))
    }
    rec(geometry, cands, set, 0, 0)
}

fn layer_zero(geometry: &GridGeometry, constraints: &ConstraintSet) -> Vec<bool> {
    let floors = constraints.min_biomass();
    (0..geometry.n_cells())
        .map(|c| {
            let x = geometry.center(c);
            (0..x.len()).all(|i| {
                x[i] >= floors[i] && min_effort(constraints.min_catch()[i], x[i]).is_some()
            })
        })
        .collect()
}

fn all_successors<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    geometry: &GridGeometry,
    within: &[bool],
) -> Result<Vec<Option<Vec<Vec<usize>>>>> {
    (0..geometry.n_cells())
        .map(|c| {
            if within[c] {
                successor_indices(model, constraints, geometry, &geometry.center(c))
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Runs the layer induction for at most `max_iters` steps, stopping early
/// once two consecutive layers are equal.
///
/// Efforts searched per species are [`EFFORT_SAMPLES`] evenly spaced points
/// of `[C♭_i / x_i, ê_i]`, where `ê_i` is the largest effort keeping the
/// successor at the biomass floor. An empty layer 0 yields an empty kernel.
pub fn grid_kernel<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    geometry: &GridGeometry,
    max_iters: usize,
) -> Result<KernelGrid> {
    check_dims(model, constraints)?;
    if geometry.dims() != model.n_species() {
        return Err(invalid("grid dimension does not match the model"));
    }
    let first = layer_zero(geometry, constraints);
    let succ = all_successors(model, constraints, geometry, &first)?;
    let mut layers = vec![first];
    let mut stationary_at = None;
    for k in 0..max_iters {
        let prev = &layers[k];
        let next: Vec<bool> = (0..geometry.n_cells())
            .map(|c| {
                prev[c]
                    && succ[c]
                        .as_ref()
                        .is_some_and(|cands| any_member(geometry, cands, prev))
            })
            .collect();
        let same = next == *prev;
        layers.push(next);
        if same {
            stationary_at = Some(k + 1);
            break;
        }
    }
    Ok(KernelGrid {
        geometry: geometry.clone(),
        layers,
        stationary_at,
    })
}

/// Whether every member cell of `set` can be sent back into `set` by some
/// sampled admissible effort.
pub fn is_viability_domain<M: GrowthModel + ?Sized>(
    model: &M,
    constraints: &ConstraintSet,
    geometry: &GridGeometry,
    set: &[bool],
) -> Result<bool> {
    check_dims(model, constraints)?;
    if set.len() != geometry.n_cells() {
        return Err(invalid("cell set does not match the grid"));
    }
    let floors = constraints.min_biomass();
    for c in (0..set.len()).filter(|&c| set[c]) {
        let x = geometry.center(c);
        if x.iter().zip(floors).any(|(a, b)| a < b) {
            return Ok(false);
        }
        match successor_indices(model, constraints, geometry, &x)? {
            Some(cands) if any_member(geometry, &cands, set) => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lotka_volterra::LvModel;

    fn peru() -> LvModel {
        LvModel::new(LvParams::peru())
    }

    fn cons(c: [f64; 2]) -> ConstraintSet {
        ConstraintSet::new(vec![7e6, 2e5], c.to_vec()).unwrap()
    }

    #[test]
    fn favorable_examples() {
        // equality case: catch floors at the equilibrium catches
        let caps = crate::yields::equilibrium_catches_bisect(&peru(), &cons([0.0, 0.0]))
            .unwrap()
            .catches;
        assert!(favorable_conditions(&peru(), &cons([caps[0], caps[1]])).unwrap());
        // the rounded catches sit a few tonnes above them: factors are one to 1e-6
        let floors = [7e6, 2e5];
        let rounded = [5.399254e6, 5.683e4];
        for i in 0..2 {
            let f = peru().growth_factor(i, &floors, rounded[i] / floors[i]);
            assert!((f - 1.0).abs() < 1e-6, "{f}");
        }
        assert!(favorable_conditions(&peru(), &cons([0.0, 0.0])).unwrap());
        assert!(!favorable_conditions(&peru(), &cons([6e6, 0.0])).unwrap());
        let bad = ConstraintSet::new(vec![0.0, 2e5], vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            favorable_conditions(&peru(), &bad),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn kernel_construction_requires_favorable_conditions() {
        assert!(AnalyticKernel::new(peru(), cons([6e6, 0.0])).is_err());
    }

    #[test]
    fn membership_examples() {
        let caps = crate::yields::equilibrium_catches_bisect(&peru(), &cons([0.0, 0.0]))
            .unwrap()
            .catches;
        let k = AnalyticKernel::new(peru(), cons([caps[0], caps[1]])).unwrap();
        assert!(k.contains(&[7e6, 2e5]));
        assert!(k.contains(k.constraints().min_biomass()));
        assert!(!k.contains(&[7e6, 1.9e5]));
        let k0 = AnalyticKernel::new(peru(), cons([0.0, 0.0])).unwrap();
        assert!(k0.contains(&[7e6, 2e5]));
    }

    #[test]
    fn control_box_closed_form_upper() {
        let k = AnalyticKernel::new(peru(), cons([0.0, 0.0])).unwrap();
        let s = BiomassState::new(vec![7e6, 2e5]).unwrap();
        let b = k.control_box(&s).unwrap();
        assert_eq!(b.lower.as_slice(), &[0.0, 0.0]);
        assert!((b.upper[0] - 0.771322).abs() < 1e-6, "{}", b.upper[0]);
        assert!((b.upper[1] - 0.28415).abs() < 1e-12);
        assert!(b.accepts(b.upper.as_slice()));
        assert!(b.accepts(b.lower.as_slice()));
    }

    #[test]
    fn control_box_degenerates_on_kernel_boundary() {
        // with catch floors at the equilibrium catches, B♭ maps onto itself
        // only under the minimal efforts
        let caps = crate::yields::equilibrium_catches_bisect(&peru(), &cons([0.0, 0.0]))
            .unwrap()
            .catches;
        let k = AnalyticKernel::new(peru(), cons([caps[0], caps[1]])).unwrap();
        let s = BiomassState::new(vec![7e6, 2e5]).unwrap();
        let b = k.control_box(&s).unwrap();
        for i in 0..2 {
            assert!((b.upper[i] - b.lower[i]).abs() < 1e-9, "{:?} {:?}", b.lower, b.upper);
        }
    }

    #[test]
    fn control_box_rejects_outside_states() {
        let k = AnalyticKernel::new(peru(), cons([0.0, 0.0])).unwrap();
        let s = BiomassState::new(vec![6e6, 2e5]).unwrap();
        assert!(k.control_box(&s).is_err());
    }

    #[test]
    fn bisection_upper_matches_closed_form() {
        struct Opaque(LvModel);
        impl GrowthModel for Opaque {
            fn n_species(&self) -> usize {
                2
            }
            fn growth_factor(&self, i: usize, x: &[f64], e: f64) -> f64 {
                self.0.growth_factor(i, x, e)
            }
        }
        let x = [1.5e7, 4e5];
        for i in 0..2 {
            let floor = [7e6, 2e5][i];
            let a = max_effort(&peru(), i, &x, floor, 0.0).unwrap().unwrap();
            let b = max_effort(&Opaque(peru()), i, &x, floor, 0.0).unwrap().unwrap();
            assert!((a - b).abs() <= 2.0 * EFFORT_TOL, "{a} {b}");
            let resid = (x[i] * peru().growth_factor(i, &x, b) - floor).abs();
            assert!(resid <= x[i] * 2.0 * EFFORT_TOL);
        }
    }

    #[test]
    fn geometry_indexing() {
        let g = GridGeometry::new(vec![0.0, 0.0], vec![10.0, 4.0], vec![5, 2]).unwrap();
        assert_eq!(g.n_cells(), 10);
        assert_eq!(g.cell_of(&[3.0, 3.0]), Some(1 + 5));
        assert_eq!(g.cell_of(&[10.0, 1.0]), None);
        assert_eq!(g.center(6), vec![3.0, 3.0]);
        assert!(GridGeometry::new(vec![0.0], vec![1.0], vec![1]).is_err());
        assert!(GridGeometry::new(vec![1.0], vec![1.0], vec![4]).is_err());
    }

    #[test]
    fn floors_above_grid_give_empty_kernel() {
        let g = GridGeometry::new(vec![0.0, 0.0], vec![1e6, 1e5], vec![20, 20]).unwrap();
        let grid = grid_kernel(&peru(), &cons([0.0, 0.0]), &g, 10).unwrap();
        assert!(grid.is_empty());
        assert_eq!(grid.member_count(0), 0);
    }

    #[test]
    fn empty_set_is_viability_domain() {
        let g = GridGeometry::lv_default(&LvParams::peru(), 20).unwrap();
        let empty = vec![false; g.n_cells()];
        assert!(is_viability_domain(&peru(), &cons([0.0, 0.0]), &g, &empty).unwrap());
    }

    #[test]
    fn coarse_grid_runs() {
        let g = GridGeometry::lv_default(&LvParams::peru(), 2).unwrap();
        let grid = grid_kernel(&peru(), &cons([0.0, 0.0]), &g, 10).unwrap();
        assert!(grid.stationary_at.is_some());
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("i,j,y_center,z_center,layer_first_excluded\n"));
    }
}
