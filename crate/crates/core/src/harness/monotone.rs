//! Causal-evolution check: pairings of evolving states against verified
//! cone elements must not decrease in time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cone::{
    is_causal_element, state_pairing, AcState, ConeContext, ConeElement, ConeError, Membership,
};

/// Default relative tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonotoneError {
    #[error("state at t = {time} lies outside the element region ({reason})")]
    RegionMismatch { time: f64, reason: &'static str },
    #[error("no states to check")]
    Empty,
    #[error(transparent)]
    Cone(#[from] ConeError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementSeries {
    pub element: String,
    pub pairings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneViolation {
    pub element: String,
    pub t1: f64,
    pub t2: f64,
    /// `ω_{t₁}(a) − ω_{t₂}(a)`, positive and above tolerance.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub tolerance: f64,
    pub times: Vec<f64>,
    pub series: Vec<ElementSeries>,
    pub violations: Vec<MonotoneViolation>,
}

impl MonotonicityReport {
    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }

    /// Smallest increment over consecutive slices, across all elements.
    pub fn min_increment(&self) -> f64 {
        self.series
            .iter()
            .flat_map(|s| s.pairings.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_region(s: &AcState, ctx: &ConeContext) -> Result<(), MonotoneError> {
    let r = &ctx.region;
    let slack = 1e-9 * (1.0 + r.t_max.abs().max(r.t_min.abs()));
    if s.time() < r.t_min - slack || s.time() > r.t_max + slack {
        return Err(MonotoneError::RegionMismatch {
            time: s.time(),
            reason: "time",
        });
    }
    let charged = s
        .positions()
        .iter()
        .zip(s.rho_minus().iter().zip(s.rho_plus()))
        .filter(|(_, (m, p))| **m > 0.0 || **p > 0.0);
    for (&x, _) in charged {
        if x < r.x_min - 1e-9 || x > r.x_max + 1e-9 {
            return Err(MonotoneError::RegionMismatch {
                time: s.time(),
                reason: "position",
            });
        }
    }
    Ok(())
}

/// Compares consecutive states: a violation is a drop
/// `ω_s(a) − ω_t(a) > tol·max(1, |ω_s(a)|)`.
pub fn check_causal_evolution(
    states: &[AcState],
    family: &[ConeElement],
    ctx: &ConeContext,
    tol: f64,
) -> Result<MonotonicityReport, MonotoneError> {
    if states.is_empty() {
        return Err(MonotoneError::Empty);
    }
    for s in states {
        check_region(s, ctx)?;
    }
    for a in family {
        if let Membership::Violation { at, min_eigenvalue } = is_causal_element(a, ctx)? {
            return Err(ConeError::RejectedElement {
                id: a.id.clone(),
                t: at.t,
                x: at.x,
                min_eigenvalue,
            }
            .into());
        }
    }
    let times: Vec<f64> = states.iter().map(AcState::time).collect();
    let mut series = Vec::with_capacity(family.len());
    let mut violations = Vec::new();
    for a in family {
        let pairings: Vec<f64> = states.iter().map(|s| state_pairing(s, a)).collect();
        for i in 1..pairings.len() {
            let drop = pairings[i - 1] - pairings[i];
            if drop > tol * pairings[i - 1].abs().max(1.0) {
                violations.push(MonotoneViolation {
                    element: a.id.clone(),
                    t1: times[i - 1],
                    t2: times[i],
                    drop,
                });
            }
        }
        series.push(ElementSeries {
            element: a.id.clone(),
            pairings,
        });
    }
    Ok(MonotonicityReport {
        tolerance: tol,
        times,
        series,
        violations,
    })
}

/// Largest `gap` for which a tangent pair with rapidity span `span` fits
/// inside `(−π/2, π/2)` with `guard` on each side.
fn max_tangent_gap(mu_max: f64, span: f64, guard: f64) -> f64 {
    let fits =
        |g: f64| mu_max * g.sin() * span * (1.0 + 1e-9) < std::f64::consts::PI - g - 2.0 * guard;
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI - 2.0 * guard);
    if fits(hi) {
        return hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Time functions, tilted members and seeded sheet-asymmetric members, all
/// verified against `ctx`. `mu_max` bounds `|μ|` (or `|Φ|`) on the region.
pub fn default_family(
    seed: u64,
    ctx: &ConeContext,
    mu_max: f64,
    random_members: usize,
) -> Result<Vec<ConeElement>, ConeError> {
    let mut family = vec![ConeElement::time()];
    for eps in [0.25, 0.5, 0.75] {
        family.push(ConeElement::tilted(eps));
        family.push(ConeElement::tilted(-eps));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = &ctx.region;
    let guard = 1e-3;
    for i in 0..random_members {
        if i % 2 == 0 {
            let eps: f64 = rng.gen_range(-0.8..0.8);
            let theta: f64 = rng.gen_range(0.0..0.95);
            let delta = if mu_max > 0.0 {
                theta * (1.0 - eps * eps).sqrt() / mu_max
            } else {
                rng.gen_range(-10.0..10.0)
            };
            let c1: f64 = rng.gen_range(-1.0..1.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            family.push(ConeElement::offset(eps, c1, c1 + sign * delta));
        } else {
            let v: f64 = rng.gen_range(-0.5..0.5);
            let gamma = 1.0 / (1.0 - v * v).sqrt();
            let s = |t: f64, x: f64| gamma * (t - v * x);
            let corners = [
                s(r.t_min, r.x_min),
                s(r.t_min, r.x_max),
                s(r.t_max, r.x_min),
                s(r.t_max, r.x_max),
            ];
            let lo_s = corners.iter().copied().fold(f64::INFINITY, f64::min);
            let hi_s = corners.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let g_max = max_tangent_gap(mu_max, hi_s - lo_s, guard);
            let gap = rng.gen_range(0.1..0.9) * g_max;
            let k = mu_max * gap.sin() * (1.0 + 1e-9);
            let hi = std::f64::consts::FRAC_PI_2 - guard - k * hi_s;
            let lo = -std::f64::consts::FRAC_PI_2 + guard + gap - k * lo_s;
            if !(lo < hi) {
                continue;
            }
            let a = ConeElement::tangent_pair(v, 0.5 * (lo + hi), gap, mu_max);
            family.push(if rng.gen_bool(0.5) { a.swapped() } else { a });
        }
    }
    for a in &family {
        if let Membership::Violation { at, min_eigenvalue } = is_causal_element(a, ctx)? {
            return Err(ConeError::RejectedElement {
                id: a.id.clone(),
                t: at.t,
                x: at.x,
                min_eigenvalue,
            });
        }
    }
    Ok(family)
}
