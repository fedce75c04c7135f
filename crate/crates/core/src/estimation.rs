//! Fitting the prey–predator model to yearly biomass and catch records.
//!
//! Predictions are catch-conditioned: starting from the first observed
//! biomasses, each year applies the unharvested dynamics and subtracts the
//! observed catches. The objective is a weighted residual sum of squares
//! over predicted vs observed biomasses, minimized by Polak–Ribière
//! conjugate gradient over the logarithms of `(R, L, K, α, β)` with
//! central-difference gradients and a backtracking line search.

use std::io::{Read, Write};

use crate::error::{invalid, Error, Result};
use crate::lotka_volterra::LvParams;

/// Yearly biomass and catch records, `[prey, predator]` per year, tonnes.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    years: Vec<i32>,
    biomass: Vec<[f64; 2]>,
    catches: Vec<[f64; 2]>,
}

impl ObservationSeries {
    pub fn new(years: Vec<i32>, biomass: Vec<[f64; 2]>, catches: Vec<[f64; 2]>) -> Result<Self> {
        if years.len() < 2 {
            return Err(invalid("a series needs at least two years"));
        }
        if biomass.len() != years.len() || catches.len() != years.len() {
            return Err(invalid("years, biomasses and catches must have equal lengths"));
        }
        if years.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(invalid("years must be strictly consecutive"));
        }
        let bad = biomass
            .iter()
            .chain(&catches)
            .flatten()
            .any(|v| !v.is_finite() || *v < 0.0);
        if bad {
            return Err(invalid("observations must be finite and >= 0"));
        }
        Ok(Self { years, biomass, catches })
    }

    pub fn len(&self) -> usize {
        self.years.len()
    }

    pub fn is_empty(&self) -> bool {
        self.years.is_empty()
    }

    pub fn years(&self) -> &[i32] {
        &self.years
    }

    pub fn biomass(&self) -> &[[f64; 2]] {
        &self.biomass
    }

    pub fn catches(&self) -> &[[f64; 2]] {
        &self.catches
    }

    /// Reads `year,biomass_prey,biomass_pred,catch_prey,catch_pred`; lines
    /// starting with `#` are skipped.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        const HEADER: [&str; 5] = ["year", "biomass_prey", "biomass_pred", "catch_prey", "catch_pred"];
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(input);
        let header = rdr.headers().map_err(csv_err)?;
        if header.iter().ne(HEADER) {
            return Err(invalid(format!(
                "observation header must be `{}`",
                HEADER.join(",")
            )));
        }
        let (mut years, mut biomass, mut catches) = (Vec::new(), Vec::new(), Vec::new());
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let field = |k: usize| -> Result<f64> {
                rec[k].parse::<f64>().map_err(|e| {
                    invalid(format!("row {}: column {}: {e}", line + 1, HEADER[k]))
                })
            };
            let year = rec[0]
                .parse::<i32>()
                .map_err(|e| invalid(format!("row {}: year: {e}", line + 1)))?;
            years.push(year);
            biomass.push([field(1)?, field(2)?]);
            catches.push([field(3)?, field(4)?]);
        }
        Self::new(years, biomass, catches)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "year,biomass_prey,biomass_pred,catch_prey,catch_pred")?;
        for t in 0..self.len() {
            let (b, c) = (self.biomass[t], self.catches[t]);
            writeln!(out, "{},{},{},{},{}", self.years[t], b[0], b[1], c[0], c[1])?;
        }
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    invalid(format!("observation CSV: {e}"))
}

/// Series produced by running the model under given yearly efforts.
/// `efforts` has one entry per year; the last one only sets that year's catch.
pub fn synthetic_series(
    params: &LvParams,
    state0: [f64; 2],
    efforts: &[[f64; 2]],
    first_year: i32,
) -> Result<ObservationSeries> {
    let mut x = state0;
    let mut biomass = Vec::with_capacity(efforts.len());
    let mut catches = Vec::with_capacity(efforts.len());
    for e in efforts {
        biomass.push(x);
        catches.push([e[0] * x[0], e[1] * x[1]]);
        x = [
            (x[0] * (params.prey_base(x[0], x[1]) - e[0])).max(0.0),
            (x[1] * (params.predator_base(x[0]) - e[1])).max(0.0),
        ];
    }
    let years = (0..efforts.len() as i32).map(|t| first_year + t).collect();
    ObservationSeries::new(years, biomass, catches)
}

/// Catch-conditioned prediction starting at the first observed biomasses.
pub fn replay(params: &LvParams, series: &ObservationSeries) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(series.len());
    let mut x = series.biomass[0];
    out.push(x);
    for c in &series.catches[..series.len() - 1] {
        x = [
            (x[0] * params.prey_base(x[0], x[1]) - c[0]).max(0.0),
            (x[1] * params.predator_base(x[0]) - c[1]).max(0.0),
        ];
        out.push(x);
    }
    out
}

/// Per-year, per-species residual weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights(pub Vec<[f64; 2]>);

impl Weights {
    /// `1 / mean(observed biomass)²` per species, the same every year.
    pub fn inverse_mean_squared(series: &ObservationSeries) -> Self {
        let n = series.len() as f64;
        let w: [f64; 2] = std::array::from_fn(|i| {
            let mean = series.biomass.iter().map(|b| b[i]).sum::<f64>() / n;
            if mean > 0.0 {
                1.0 / (mean * mean)
            } else {
                1.0
            }
        });
        Self(vec![w; series.len()])
    }

    pub fn uniform(len: usize) -> Self {
        Self(vec![[1.0, 1.0]; len])
    }

    fn validate(&self, series: &ObservationSeries) -> Result<()> {
        if self.0.len() != series.len() {
            return Err(invalid("weights must have one row per observed year"));
        }
        if self.0.iter().flatten().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(invalid("weights must be finite and >= 0"));
        }
        Ok(())
    }
}

fn weighted_sum(pred: &[[f64; 2]], series: &ObservationSeries, weights: &Weights) -> f64 {
    pred.iter()
        .zip(&series.biomass)
        .zip(&weights.0)
        .map(|((p, o), w)| (0..2).map(|i| w[i] * (p[i] - o[i]).powi(2)).sum::<f64>())
        .sum()
}

/// `Σ_t Σ_i w_{t,i} (predicted − observed)²`.
pub fn wrss(params: &LvParams, series: &ObservationSeries, weights: &Weights) -> Result<f64> {
    weights.validate(series)?;
    Ok(weighted_sum(&replay(params, series), series, weights))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Defaults to [`Weights::inverse_mean_squared`].
    pub weights: Option<Weights>,
    pub initial_guess: LvParams,
    pub max_iters: usize,
    /// Central-difference step, relative to each parameter.
    pub grad_step_rel: f64,
    /// Gradient-norm and relative-decrease tolerance.
    pub converge_tol: f64,
}

impl FitConfig {
    pub fn new(initial_guess: LvParams) -> Self {
        Self {
            weights: None,
            initial_guess,
            max_iters: 5_000,
            grad_step_rel: 1e-5,
            converge_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: LvParams,
    /// `wrss(params)` with the weights used by the fit.
    pub objective: f64,
    pub initial_objective: f64,
    pub trajectory: Vec<[f64; 2]>,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after each accepted iteration, starting with the initial one.
    pub history: Vec<f64>,
}

/// Weighted objective over log-parameters; invalid parameters map to `+∞`.
pub struct LogObjective<'a> {
    series: &'a ObservationSeries,
    weights: &'a Weights,
}

impl<'a> LogObjective<'a> {
    pub fn new(series: &'a ObservationSeries, weights: &'a Weights) -> Result<Self> {
        weights.validate(series)?;
        Ok(Self { series, weights })
    }

    pub fn params(theta: &[f64; 5]) -> Result<LvParams> {
        LvParams::from_array(theta.map(f64::exp))
    }

    pub fn value(&self, theta: &[f64; 5]) -> f64 {
        match Self::params(theta) {
            Ok(p) => {
                let v = weighted_sum(&replay(&p, self.series), self.series, self.weights);
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// Central differences with step `h` in log-space, i.e. a relative step
    /// of about `h` on each parameter. Falls back to a one-sided difference
    /// where one side is infeasible.
    pub fn gradient(&self, theta: &[f64; 5], h: f64) -> [f64; 5] {
        let f0 = self.value(theta);
        std::array::from_fn(|j| {
            let mut up = *theta;
            let mut down = *theta;
            up[j] += h;
            down[j] -= h;
            let (fu, fd) = (self.value(&up), self.value(&down));
            match (fu.is_finite(), fd.is_finite()) {
                (true, true) => (fu - fd) / (2.0 * h),
                (true, false) => (fu - f0) / h,
                (false, true) => (f0 - fd) / h,
                (false, false) => 0.0,
            }
        })
    }
}

fn dot(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Probe {
    step: f64,
    theta: [f64; 5],
    f: f64,
    g: [f64; 5],
    slope: f64,
}

/// Line search along `d` satisfying the strong Wolfe conditions.
/// Points where the objective is not finite count as overshoot.
fn line_search(
    obj: &LogObjective<'_>,
    h: f64,
    theta: &[f64; 5],
    f: f64,
    g: &[f64; 5],
    d: &[f64; 5],
    step0: f64,
    step_max: f64,
) -> Option<Probe> {
    const C1: f64 = 1e-4;
    const C2: f64 = 0.1;
    const MAX_EVALS: usize = 60;
    let slope0 = dot(g, d);
    let probe = |step: f64| -> Probe {
        let trial: [f64; 5] = std::array::from_fn(|j| theta[j] + step * d[j]);
        let ft = obj.value(&trial);
        let (gt, st) = if ft.is_finite() {
            let gt = obj.gradient(&trial, h);
            let st = dot(&gt, d);
            (gt, st)
        } else {
            ([f64::NAN; 5], f64::NAN)
        };
        Probe { step, theta: trial, f: ft, g: gt, slope: st }
    };
    let armijo = |p: &Probe| p.f.is_finite() && p.f <= f + C1 * p.step * slope0;
    let curvature = |p: &Probe| p.slope.abs() <= -C2 * slope0;

    let origin = Probe { step: 0.0, theta: *theta, f, g: *g, slope: slope0 };
    let mut best: Option<Probe> = None;
    let keep = |p: &Probe, best: &mut Option<Probe>| {
        if armijo(p) && best.as_ref().is_none_or(|b| p.f < b.f) {
            *best = Some(Probe { ..*p });
        }
    };

    // bracketing phase
    let mut prev = origin;
    let mut step = step0.min(step_max);
    let mut evals = 0;
    let (mut lo, mut hi) = loop {
        let cur = probe(step);
        evals += 1;
        keep(&cur, &mut best);
        if !armijo(&cur) || (evals > 1 && cur.f >= prev.f) {
            break (prev, cur);
        }
        if curvature(&cur) {
            return Some(cur);
        }
        if cur.slope >= 0.0 {
            break (cur, prev);
        }
        if evals >= MAX_EVALS || step >= step_max {
            return best;
        }
        step = (2.0 * step).min(step_max);
        prev = cur;
    };

    // zoom phase; `lo` always satisfies sufficient decrease
    while evals < MAX_EVALS {
        let (a, b) = (lo.step, hi.step);
        let mut t = 0.5 * (a + b);
        if hi.f.is_finite() {
            // quadratic through lo (value and slope) and hi (value)
            let dt = b - a;
            let denom = 2.0 * (hi.f - lo.f - lo.slope * dt);
            if denom > 0.0 {
                let c = a - lo.slope * dt * dt / denom;
                let (l, u) = (a.min(b), a.max(b));
                let margin = 0.1 * (u - l);
                if c > l + margin && c < u - margin {
                    t = c;
                }
            }
        }
        if (t - a).abs() <= 1e-16 * a.abs().max(1e-300) {
            break;
        }
        let cur = probe(t);
        evals += 1;
        keep(&cur, &mut best);
        if !armijo(&cur) || cur.f >= lo.f {
            hi = cur;
        } else {
            if curvature(&cur) {
                return Some(cur);
            }
            if cur.slope * (hi.step - lo.step) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    best
}

const MAX_LOG_STEP: f64 = 0.5;

/// Fits `(R, L, K, α, β)` to the series.
pub fn fit(series: &ObservationSeries, config: &FitConfig) -> Result<FitResult> {
    if !(config.grad_step_rel > 0.0 && config.grad_step_rel < 1.0) {
        return Err(invalid("grad_step_rel must lie in (0, 1)"));
    }
    if !(config.converge_tol >= 0.0) {
        return Err(invalid("converge_tol must be >= 0"));
    }
    let weights = config
        .weights
        .clone()
        .unwrap_or_else(|| Weights::inverse_mean_squared(series));
    let obj = LogObjective::new(series, &weights)?;
    let h = config.grad_step_rel;
    let mut theta = config.initial_guess.to_array().map(f64::ln);
    let mut f = obj.value(&theta);
    if !f.is_finite() {
        return Err(invalid("objective is not finite at the initial guess"));
    }
    let initial_objective = f;
    let mut history = vec![f];
    let mut g = obj.gradient(&theta, h);
    let mut d = g.map(|x| -x);
    let mut since_restart = 0;
    let mut f_prev: Option<f64> = None;
    let mut converged = f == 0.0 || dot(&g, &g).sqrt() <= config.converge_tol;
    let mut iterations = 0;

    while !converged && iterations < config.max_iters {
        let steepest = since_restart == 0;
        if dot(&g, &d) >= 0.0 || since_restart >= theta.len() {
            d = g.map(|x| -x);
            since_restart = 0;
            continue;
        }
        let dmax = d.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let step_max = MAX_LOG_STEP / dmax;
        let first = match f_prev {
            Some(fp) => {
                (1.01 * 2.0 * (fp - f) / -dot(&g, &d)).min(1.0)
            }
            _ => 1.0 / dot(&g, &g).sqrt().max(1.0),
        };
        let Some(found) = line_search(&obj, h, &theta, f, &g, &d, first, step_max) else {
            if steepest {
                // no descent left at this precision
                converged = true;
            } else {
                d = g.map(|x| -x);
                since_restart = 0;
            }
            continue;
        };
        iterations += 1;
        let decrease = f - found.f;
        f_prev = Some(f);
        theta = found.theta;
        f = found.f;
        history.push(f);

        let g_next = found.g;
        if dot(&g_next, &g_next).sqrt() <= config.converge_tol || f == 0.0 {
            converged = true;
        } else if decrease <= config.converge_tol * (f + decrease) {
            if steepest {
                converged = true;
            }
            since_restart = theta.len();
        }
        let beta = (dot(&g_next, &g_next) - dot(&g_next, &g)) / dot(&g, &g);
        let beta = if beta.is_finite() { beta.max(0.0) } else { 0.0 };
        d = std::array::from_fn(|j| -g_next[j] + beta * d[j]);
        g = g_next;
        since_restart += 1;
    }

    let params = LogObjective::params(&theta)?;
    let objective = wrss(&params, series, &weights)?;
    Ok(FitResult {
        params,
        objective,
        initial_objective,
        trajectory: replay(&params, series),
        converged,
        iterations,
        history,
    })
}
