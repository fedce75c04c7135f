#![allow(dead_code)]

use evykit::{AnalyticKernel, BiomassState, ConstraintSet, LvModel, LvParams};
use rand::Rng;

/// A random prey–predator draw whose growth factors at the floors are at
/// least one under the minimal efforts.
#[derive(Debug, Clone)]
pub struct Draw {
    pub params: LvParams,
    pub constraints: ConstraintSet,
}

impl Draw {
    pub fn model(&self) -> LvModel {
        LvModel::new(self.params)
    }

    pub fn floors(&self) -> ConstraintSet {
        ConstraintSet::biomass_only(self.constraints.min_biomass().to_vec()).unwrap()
    }
}

/// `catch_share` scales the catch floors between zero and the equilibrium
/// catches at the floors; pass `None` for a random share.
pub fn draw<G: Rng>(rng: &mut G, catch_share: Option<f64>) -> Draw {
    let r = rng.gen_range(1.8..3.0);
    let l = rng.gen_range(0.80..0.98);
    let k = 10f64.powf(rng.gen_range(5.0..8.0));
    let kappa = r * k / (r - 1.0);
    let yb = rng.gen_range(0.05..0.3) * kappa;
    let zb = rng.gen_range(0.005..0.1) * yb;
    // prey surplus factor at the floors without predation
    let margin = r * (1.0 - yb / kappa) - 1.0;
    let alpha = rng.gen_range(0.1..0.7) * margin / zb;
    let beta = (1.0 - l + rng.gen_range(0.01..0.3)) / yb;
    let params = LvParams::new(r, l, k, alpha, beta).unwrap();
    let fy = params.prey_base(yb, zb);
    let fz = params.predator_base(yb);
    let share = |rng: &mut G| catch_share.unwrap_or_else(|| rng.gen_range(0.0..1.0));
    let cy = share(rng) * yb * (fy - 1.0);
    let cz = share(rng) * zb * (fz - 1.0);
    let constraints = ConstraintSet::new(vec![yb, zb], vec![cy, cz]).unwrap();
    Draw { params, constraints }
}

/// Rejection-samples `n` states of the analytic kernel from
/// `[y♭, κ] × [z♭, 10 z♭]`.
pub fn kernel_states<G: Rng>(rng: &mut G, d: &Draw, n: usize) -> Vec<BiomassState> {
    let kernel = AnalyticKernel::new(d.model(), d.constraints.clone()).unwrap();
    let b = d.constraints.min_biomass();
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        assert!(tries < 1_000_000, "kernel too thin to sample");
        let x = vec![
            rng.gen_range(b[0]..d.params.kappa()),
            rng.gen_range(b[1]..10.0 * b[1]),
        ];
        if kernel.contains(&x) {
            out.push(BiomassState::new(x).unwrap());
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}
