//! INI run configuration.
//!
//! ```ini
//! [model]
//! r = 2.25
//! l = 0.945
//! k = 37285000
//! alpha = 1.22e-6
//! beta = 4.845e-8
//!
//! [constraints]
//! min_biomass_prey = 7000000
//! min_biomass_pred = 200000
//! min_catch_prey = 0
//! min_catch_pred = 0
//!
//! [state0]
//! prey = 10000000
//! pred = 300000
//! ```
//!
//! Further optional sections: `grid`, `fit`, `simulate`, `msy`, `output`.
//! Unknown sections and keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use ini::Ini;

use crate::ecosystem::{BiomassState, ConstraintSet, EffortVector};
use crate::estimation::FitConfig;
use crate::lotka_volterra::LvParams;
use crate::simulate::HarvestPolicy;
use crate::viability::GridGeometry;
use crate::yields::{EffortBox, MsySearch};

const SCHEMA: &[(&str, &[&str])] = &[
    ("model", &["r", "l", "k", "alpha", "beta"]),
    (
        "constraints",
        &["min_biomass_prey", "min_biomass_pred", "min_catch_prey", "min_catch_pred"],
    ),
    ("state0", &["prey", "pred"]),
    ("grid", &["cells", "y_min", "y_max", "z_min", "z_max", "max_iters"]),
    (
        "fit",
        &["r", "l", "k", "alpha", "beta", "max_iters", "grad_step_rel", "converge_tol", "weights"],
    ),
    (
        "simulate",
        &["policy", "horizon", "effort_prey", "effort_pred", "catch_prey", "catch_pred"],
    ),
    ("msy", &["resolution", "refine_rounds", "effort_max_prey", "effort_max_pred"]),
    ("output", &["dir"]),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Res<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

fn lib<T>(section: &str, r: crate::Result<T>) -> Res<T> {
    r.map_err(|e| ConfigError(format!("[{section}]: {e}")))
}

/// One section's raw key/value pairs.
#[derive(Debug, Clone, Default)]
struct Section {
    name: &'static str,
    values: BTreeMap<String, String>,
}

impl Section {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Res<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| ConfigError(format!("[{}] {key} = {v:?}: {e}", self.name))),
        }
    }

    fn f64(&self, key: &str) -> Res<Option<f64>> {
        match self.parse::<f64>(key)? {
            Some(v) if !v.is_finite() => err(format!("[{}] {key} must be finite", self.name)),
            v => Ok(v),
        }
    }

    fn required(&self, keys: &[&str]) -> Res<Vec<f64>> {
        let missing: Vec<&str> = keys.iter().copied().filter(|k| self.raw(k).is_none()).collect();
        if !missing.is_empty() {
            return err(format!("[{}] missing key(s): {}", self.name, missing.join(", ")));
        }
        keys.iter().map(|k| Ok(self.f64(k)?.expect("checked"))).collect()
    }
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub cells: usize,
    pub lo: Option<[f64; 2]>,
    pub hi: Option<[f64; 2]>,
    pub max_iters: usize,
}

impl GridConfig {
    /// Geometry over `[lo, hi]`, each bound defaulting to the LV default box.
    pub fn geometry(&self, params: &LvParams) -> crate::Result<GridGeometry> {
        let def = GridGeometry::lv_default(params, self.cells)?;
        let lo = self.lo.map_or(def.lo().to_vec(), |v| v.to_vec());
        let hi = self.hi.map_or(def.hi().to_vec(), |v| v.to_vec());
        GridGeometry::new(lo, hi, vec![self.cells; 2])
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub policy: HarvestPolicy,
    pub horizon: usize,
}

#[derive(Debug, Clone)]
pub struct MsyConfig {
    pub search: MsySearch,
    pub effort_max: Option<[f64; 2]>,
}

impl MsyConfig {
    /// `[0, effort_max]`, by default `[0, R − 1] × [0, max(L + βκ − 1, 0)]`:
    /// beyond these efforts the species has no positive equilibrium.
    pub fn effort_box(&self, p: &LvParams) -> crate::Result<EffortBox> {
        let hi = self.effort_max.unwrap_or([
            p.r() - 1.0,
            (p.l() + p.beta() * p.kappa() - 1.0).max(0.0),
        ]);
        EffortBox::from_origin(hi.to_vec())
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Option<LvParams>,
    pub constraints: Option<ConstraintSet>,
    pub state0: Option<BiomassState>,
    pub grid: GridConfig,
    /// `None` when neither `[fit]` nor `[model]` gives an initial guess.
    pub fit: Option<FitConfig>,
    /// Unit weights instead of `1 / mean²` per species.
    pub uniform_weights: bool,
    /// Present only with a `[simulate]` section.
    pub simulate: Option<SimulateConfig>,
    pub msy: MsyConfig,
    pub output_dir: Option<PathBuf>,
}

fn params_from(s: &Section) -> Res<Option<LvParams>> {
    if s.values.is_empty() {
        return Ok(None);
    }
    let v = s.required(&["r", "l", "k", "alpha", "beta"])?;
    let p = if v[3] == 0.0 && v[4] == 0.0 {
        LvParams::uncoupled(v[0], v[1], v[2])
    } else {
        LvParams::new(v[0], v[1], v[2], v[3], v[4])
    };
    lib(s.name, p).map(Some)
}

fn pair(s: &Section, a: &str, b: &str) -> Res<Option<[f64; 2]>> {
    match (s.f64(a)?, s.f64(b)?) {
        (None, None) => Ok(None),
        (Some(x), Some(y)) => Ok(Some([x, y])),
        _ => err(format!("[{}] {a} and {b} must be given together", s.name)),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Res<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError(format!("config syntax: {e}")))?;
        let mut sections: BTreeMap<&'static str, Section> = SCHEMA
            .iter()
            .map(|(name, _)| (*name, Section { name, values: BTreeMap::new() }))
            .collect();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.is_empty() {
                    continue;
                }
                return err("keys outside any [section]");
            };
            let Some((sname, keys)) = SCHEMA.iter().find(|(s, _)| *s == name) else {
                return err(format!("unknown section [{name}]"));
            };
            let sec = sections.get_mut(sname).expect("schema section");
            for (k, v) in props.iter() {
                if !keys.contains(&k) {
                    return err(format!("[{name}] unknown key {k:?}"));
                }
                if sec.values.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return err(format!("[{name}] duplicate key {k:?}"));
                }
            }
        }
        let s = |n: &str| &sections[n];

        let model = params_from(s("model"))?;

        let c = s("constraints");
        let constraints = if c.values.is_empty() {
            None
        } else {
            let b = c.required(&["min_biomass_prey", "min_biomass_pred"])?;
            let cp = c.f64("min_catch_prey")?.unwrap_or(0.0);
            let cz = c.f64("min_catch_pred")?.unwrap_or(0.0);
            Some(lib(c.name, ConstraintSet::new(b, vec![cp, cz]))?)
        };

        let st = s("state0");
        let state0 = if st.values.is_empty() {
            None
        } else {
            Some(lib(st.name, BiomassState::new(st.required(&["prey", "pred"])?))?)
        };

        let g = s("grid");
        let cells = g.parse::<usize>("cells")?.unwrap_or(200);
        if cells < 2 {
            return err("[grid] cells must be >= 2");
        }
        let grid = GridConfig {
            cells,
            lo: pair(g, "y_min", "z_min")?,
            hi: pair(g, "y_max", "z_max")?,
            max_iters: g.parse::<usize>("max_iters")?.unwrap_or(50),
        };

        let f = s("fit");
        let guess_keys = ["r", "l", "k", "alpha", "beta"];
        let guess = if guess_keys.iter().any(|k| f.raw(k).is_some()) {
            let v = f.required(&guess_keys)?;
            Some(lib(f.name, LvParams::new(v[0], v[1], v[2], v[3], v[4]))?)
        } else {
            model
        };
        let fit = match guess {
            None => None,
            Some(g) => {
                let mut cfg = FitConfig::new(g);
                if let Some(n) = f.parse::<usize>("max_iters")? {
                    cfg.max_iters = n;
                }
                if let Some(h) = f.f64("grad_step_rel")? {
                    if !(h > 0.0 && h < 1.0) {
                        return err("[fit] grad_step_rel must lie in (0, 1)");
                    }
                    cfg.grad_step_rel = h;
                }
                if let Some(t) = f.f64("converge_tol")? {
                    if t < 0.0 {
                        return err("[fit] converge_tol must be >= 0");
                    }
                    cfg.converge_tol = t;
                }
                Some(cfg)
            }
        };
        let uniform_weights = match f.raw("weights") {
            None | Some("inverse_mean_squared") => false,
            Some("uniform") => true,
            Some(other) => {
                return err(format!(
                    "[fit] weights = {other:?}: expected inverse_mean_squared or uniform"
                ))
            }
        };

        let sim = s("simulate");
        let simulate = if sim.values.is_empty() {
            None
        } else {
            let policy = match sim.raw("policy") {
                None => return err("[simulate] missing key(s): policy"),
                Some("viable_min") => HarvestPolicy::ViableMin,
                Some("viable_greedy") => HarvestPolicy::ViableGreedy,
                Some("constant_effort") => {
                    let e = sim.required(&["effort_prey", "effort_pred"])?;
                    HarvestPolicy::ConstantEffort(lib(sim.name, EffortVector::new(e))?)
                }
                Some("constant_catch") => {
                    let c = sim.required(&["catch_prey", "catch_pred"])?;
                    if c.iter().any(|v| *v < 0.0) {
                        return err("[simulate] catches must be >= 0");
                    }
                    HarvestPolicy::ConstantCatch(c)
                }
                Some(other) => {
                    return err(format!(
                        "[simulate] policy = {other:?}: expected constant_effort, constant_catch, viable_min or viable_greedy"
                    ))
                }
            };
            let horizon = sim.parse::<usize>("horizon")?.unwrap_or(100);
            if horizon == 0 {
                return err("[simulate] horizon must be >= 1");
            }
            Some(SimulateConfig { policy, horizon })
        };

        let m = s("msy");
        let mut search = MsySearch::default();
        if let Some(r) = m.parse::<usize>("resolution")? {
            if r < 2 {
                return err("[msy] resolution must be >= 2");
            }
            search.resolution = r;
        }
        if let Some(r) = m.parse::<usize>("refine_rounds")? {
            search.refine_rounds = r;
        }
        let effort_max = pair(m, "effort_max_prey", "effort_max_pred")?;
        if effort_max.is_some_and(|v| v.iter().any(|x| *x < 0.0)) {
            return err("[msy] effort bounds must be >= 0");
        }

        Ok(RunConfig {
            model,
            constraints,
            state0,
            grid,
            fit,
            uniform_weights,
            simulate,
            msy: MsyConfig { search, effort_max },
            output_dir: s("output").raw("dir").map(PathBuf::from),
        })
    }

    pub fn require_model(&self) -> Res<&LvParams> {
        self.model.as_ref().ok_or_else(|| ConfigError("missing [model] section".into()))
    }

    pub fn require_constraints(&self) -> Res<&ConstraintSet> {
        self.constraints
            .as_ref()
            .ok_or_else(|| ConfigError("missing [constraints] section (min_biomass_prey, min_biomass_pred)".into()))
    }

    pub fn require_state0(&self) -> Res<&BiomassState> {
        self.state0
            .as_ref()
            .ok_or_else(|| ConfigError("missing [state0] section (prey, pred)".into()))
    }
}
