//! Multi-year trajectories under harvest policies, and constraint audits.
//!
//! A trajectory of horizon `T` has `T + 1` rows, years `0..=T`. Row `t` holds
//! the state at year `t` and the efforts the policy chose there; the dynamics
//! are advanced from rows `0..T` only, so the last row records the decision
//! at the final state without applying it.

use std::io::{self, Write};

use crate::ecosystem::{catches, step, BiomassState, ConstraintSet, EffortVector, GrowthModel};
use crate::error::{domain, invalid, Error, Result};
use crate::roots::{effort_for_catch, rightmost, EFFORT_TOL};
use crate::viability::{favorable_conditions, AnalyticKernel, ViableControlBox};

#[derive(Debug, Clone, PartialEq)]
pub enum HarvestPolicy {
    ConstantEffort(EffortVector),
    /// Tonnes per year and species. The effort is recomputed from the stock
    /// each year; a catch above the stock drives it extinct.
    ConstantCatch(Vec<f64>),
    /// Efforts meeting the catch floors exactly, when admissible.
    ViableMin,
    /// Efforts raised as far as the successor stays in the kernel.
    ViableGreedy,
}

impl HarvestPolicy {
    pub fn is_viable(&self) -> bool {
        matches!(self, HarvestPolicy::ViableMin | HarvestPolicy::ViableGreedy)
    }

    pub fn name(&self) -> &'static str {
        match self {
            HarvestPolicy::ConstantEffort(_) => "constant_effort",
            HarvestPolicy::ConstantCatch(_) => "constant_catch",
            HarvestPolicy::ViableMin => "viable_min",
            HarvestPolicy::ViableGreedy => "viable_greedy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub year: usize,
    pub state: BiomassState,
    pub efforts: EffortVector,
    /// `efforts[i] * state[i]`, exactly.
    pub catches: Vec<f64>,
    /// Analytic kernel membership; false when the constraints do not meet
    /// the favorable conditions, as the kernel has no closed form then.
    pub in_kernel: bool,
    pub constraints_ok: bool,
    /// The step into this state clamped a species to zero.
    pub extinction: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub policy: &'static str,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn horizon(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn final_state(&self) -> &BiomassState {
        &self.rows[self.rows.len() - 1].state
    }

    /// CSV with header `year,y,z,v,w,catch_y,catch_z,in_kernel,constraints_ok`.
    /// Only two-species trajectories fit this layout.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        if self.rows.iter().any(|r| r.state.len() != 2) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                "trajectory CSV needs exactly two species",
            ));
        }
        writeln!(out, "year,y,z,v,w,catch_y,catch_z,in_kernel,constraints_ok")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.year,
                r.state[0],
                r.state[1],
                r.efforts[0],
                r.efforts[1],
                r.catches[0],
                r.catches[1],
                r.in_kernel,
                r.constraints_ok
            )?;
        }
        Ok(())
    }
}

impl Trajectory {
    /// Reads the layout of [`Trajectory::write_csv`]; `#` lines are skipped.
    /// Extinction flags are not stored and read back as false.
    pub fn read_csv<R: io::Read>(input: R) -> Result<Self> {
        const HEADER: [&str; 9] =
            ["year", "y", "z", "v", "w", "catch_y", "catch_z", "in_kernel", "constraints_ok"];
        let bad = |m: String| invalid(format!("trajectory CSV: {m}"));
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let header = rdr.headers().map_err(|e| bad(e.to_string()))?;
        if header.iter().ne(HEADER) {
            return Err(bad(format!("header must be `{}`", HEADER.join(","))));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {}: {e}", line + 1, HEADER[k])))
            };
            let flag = |k: usize| -> Result<bool> {
                rec[k]
                    .parse::<bool>()
                    .map_err(|e| bad(format!("row {}: {}: {e}", line + 1, HEADER[k])))
            };
            let year = rec[0]
                .parse::<usize>()
                .map_err(|e| bad(format!("row {}: year: {e}", line + 1)))?;
            rows.push(TrajectoryRow {
                year,
                state: BiomassState::new(vec![num(1)?, num(2)?])?,
                efforts: EffortVector::new(vec![num(3)?, num(4)?])?,
                catches: vec![num(5)?, num(6)?],
                in_kernel: flag(7)?,
                constraints_ok: flag(8)?,
                extinction: false,
            });
        }
        if rows.is_empty() {
            return Err(bad("no rows".into()));
        }
        Ok(Trajectory { policy: "file", rows })
    }
}

fn row_ok(state: &[f64], caught: &[f64], constraints: &ConstraintSet) -> bool {
    (0..state.len()).all(|i| {
        state[i] >= constraints.min_biomass()[i] && caught[i] >= constraints.min_catch()[i]
    })
}

/// All index vectors over `n` axes of `m` points, by increasing index sum
/// then lexicographically.
fn by_index_sum(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut all = vec![vec![]];
    for _ in 0..n {
        all = all
            .into_iter()
            .flat_map(|v: Vec<usize>| {
                (0..m).map(move |j| {
                    let mut w = v.clone();
                    w.push(j);
                    w
                })
            })
            .collect();
    }
    all.sort_by_key(|v| (v.iter().sum::<usize>(), v.clone()));
    all
}

fn viable_min<M: GrowthModel>(cbox: &ViableControlBox<'_, M>, order: &[Vec<usize>]) -> Result<Vec<f64>> {
    let lower = cbox.lower.as_slice().to_vec();
    if cbox.accepts(&lower) {
        return Ok(lower);
    }
    let samples: Vec<Vec<f64>> = (0..lower.len()).map(|i| cbox.samples(i)).collect();
    for idx in order {
        let e: Vec<f64> = idx.iter().enumerate().map(|(i, &j)| samples[i][j]).collect();
        if cbox.accepts(&e) {
            return Ok(e);
        }
    }
    Err(Error::Numerical(format!(
        "no sampled effort keeps {:?} in the kernel",
        cbox.state.as_slice()
    )))
}

fn viable_greedy<M: GrowthModel>(cbox: &ViableControlBox<'_, M>, order: &[Vec<usize>]) -> Result<Vec<f64>> {
    let mut e = viable_min(cbox, order)?;
    for i in 0..e.len() {
        let top = cbox.upper[i];
        let mut trial = e.clone();
        let mut holds = |v: f64| {
            trial[i] = v;
            cbox.accepts(&trial)
        };
        if holds(top) {
            e[i] = top;
        } else if top > e[i] {
            e[i] = rightmost(e[i], top, EFFORT_TOL, &mut holds);
        }
    }
    Ok(e)
}

/// Simulates `horizon` years from `state0`.
///
/// Viable policies need `state0` inside the analytic kernel of
/// `constraints` and fail with a domain error otherwise.
pub fn run<M: GrowthModel>(
    model: &M,
    state0: &BiomassState,
    policy: &HarvestPolicy,
    constraints: &ConstraintSet,
    horizon: usize,
) -> Result<Trajectory> {
    let n = model.n_species();
    if horizon == 0 {
        return Err(invalid("horizon must be at least 1"));
    }
    if state0.len() != n || constraints.n_species() != n {
        return Err(invalid(format!(
            "state has {} and constraints {} species, model has {n}",
            state0.len(),
            constraints.n_species()
        )));
    }
    let kernel = if favorable_conditions(model, constraints)? {
        Some(AnalyticKernel::new(model, constraints.clone())?)
    } else {
        None
    };
    let in_kernel = |x: &BiomassState| kernel.as_ref().is_some_and(|k| k.contains(x.as_slice()));
    let order = match policy {
        HarvestPolicy::ConstantEffort(e) if e.len() != n => {
            return Err(invalid(format!("policy has {} efforts, model has {n} species", e.len())))
        }
        HarvestPolicy::ConstantCatch(c) if c.len() != n => {
            return Err(invalid(format!("policy has {} catches, model has {n} species", c.len())))
        }
        HarvestPolicy::ConstantCatch(c) if c.iter().any(|v| !v.is_finite() || *v < 0.0) => {
            return Err(invalid("constant catches must be finite and >= 0"))
        }
        p if p.is_viable() => {
            if kernel.is_none() {
                return Err(domain(
                    "viable policies need growth factors of at least one at the biomass floors",
                ));
            }
            if !in_kernel(state0) {
                return Err(domain(format!(
                    "initial state {:?} is outside the viability kernel",
                    state0.as_slice()
                )));
            }
            by_index_sum(n, crate::viability::EFFORT_SAMPLES)
        }
        _ => Vec::new(),
    };

    let choose = |x: &BiomassState| -> Result<EffortVector> {
        let e = match policy {
            HarvestPolicy::ConstantEffort(e) => return Ok(e.clone()),
            HarvestPolicy::ConstantCatch(c) => x
                .as_slice()
                .iter()
                .zip(c)
                .map(|(&b, &c)| if c == 0.0 || b == 0.0 { 0.0 } else { effort_for_catch(c, b) })
                .collect(),
            HarvestPolicy::ViableMin | HarvestPolicy::ViableGreedy => {
                let k = kernel.as_ref().expect("checked above");
                let cbox = k.control_box(x)?;
                if matches!(policy, HarvestPolicy::ViableMin) {
                    viable_min(&cbox, &order)?
                } else {
                    viable_greedy(&cbox, &order)?
                }
            }
        };
        EffortVector::new(e)
    };

    let mut rows = Vec::with_capacity(horizon + 1);
    let mut state = state0.clone();
    let mut extinction = false;
    for year in 0..=horizon {
        let efforts = choose(&state)?;
        let caught = catches(&state, &efforts)?;
        let next = if year < horizon {
            Some(step(model, &state, &efforts)?)
        } else {
            None
        };
        rows.push(TrajectoryRow {
            year,
            in_kernel: in_kernel(&state),
            constraints_ok: row_ok(state.as_slice(), &caught, constraints),
            state,
            efforts,
            catches: caught,
            extinction,
        });
        match next {
            Some(o) => {
                state = o.state;
                extinction = o.extinction;
            }
            None => break,
        }
    }
    Ok(Trajectory {
        policy: policy.name(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Biomass,
    Catch,
}

impl ViolationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ViolationKind::Biomass => "biomass",
            ViolationKind::Catch => "catch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub year: usize,
    pub species: usize,
    pub kind: ViolationKind,
    pub value: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<Violation>,
    pub biomass_ok: bool,
    pub catch_ok: bool,
    pub first_violation_year: Option<usize>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Every row whose biomass or catch falls below the floors.
pub fn audit(trajectory: &Trajectory, constraints: &ConstraintSet) -> AuditReport {
    let mut violations = Vec::new();
    for r in &trajectory.rows {
        for i in 0..r.state.len().min(constraints.n_species()) {
            let (b, c) = (constraints.min_biomass()[i], constraints.min_catch()[i]);
            if r.state[i] < b {
                violations.push(Violation {
                    year: r.year,
                    species: i,
                    kind: ViolationKind::Biomass,
                    value: r.state[i],
                    floor: b,
                });
            }
            if r.catches[i] < c {
                violations.push(Violation {
                    year: r.year,
                    species: i,
                    kind: ViolationKind::Catch,
                    value: r.catches[i],
                    floor: c,
                });
            }
        }
    }
    AuditReport {
        biomass_ok: !violations.iter().any(|v| v.kind == ViolationKind::Biomass),
        catch_ok: !violations.iter().any(|v| v.kind == ViolationKind::Catch),
        first_violation_year: violations.first().map(|v| v.year),
        violations,
    }
}
