//! Causal cone of the two-sheeted triple.
//!
//! An element `a = diag(f₁, f₂)` of `C(M) ⊕ C(M)` is causal when the test
//! matrix `C_a = i·(γ⁰⊗1)·[D, a]` is positive semidefinite at every event,
//! where `D = D̸⊗1 + iγ_M⊗D_F` and `D_F = [[0, μ], [μ̄, 0]]`. Sheet 1 carries
//! chirality `−`, sheet 2 chirality `+`.
//!
//! Spinor indices come first in the Kronecker layout: row `2·s + k` has
//! spinor index `s` and internal (sheet) index `k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{ComplexField, GridSamples, RealField, VectorPotential};
use crate::spacetime::{Event, MetricModel, Region, Resolution};

pub type C2 = Matrix2<Complex64>;
pub type C4 = Matrix4<Complex64>;

/// Default lower bound on the smallest eigenvalue of a cone test matrix.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// Total-mass tolerance of an [`AcState`].
pub const MASS_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("gradient of element `{id}` unavailable at ({t}, {x})")]
    GradientUnavailable { id: String, t: f64, x: f64 },
    #[error("test matrix at ({t}, {x}) is not Hermitian (defect {defect:e})")]
    NotHermitian { t: f64, x: f64, defect: f64 },
    #[error("empty sampling region")]
    EmptyRegion,
    #[error("state mass {mass} differs from 1")]
    Normalization { mass: f64 },
    #[error("state density is negative or non-finite at index {index}")]
    NegativeDensity { index: usize },
    #[error("state arrays have mismatched lengths")]
    ShapeMismatch,
    #[error("element `{id}` is not causal: min eigenvalue {min_eigenvalue:e} at ({t}, {x})")]
    RejectedElement {
        id: String,
        t: f64,
        x: f64,
        min_eigenvalue: f64,
    },
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for ConeError {
    fn from(e: csv::Error) -> Self {
        ConeError::Csv(e.to_string())
    }
}

/// Chirality sheet of the internal two-point space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sheet {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Sheet {
    pub fn opposite(self) -> Sheet {
        match self {
            Sheet::Minus => Sheet::Plus,
            Sheet::Plus => Sheet::Minus,
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Flat 1+1D gamma matrices: `γ⁰ = σ₁`, `γ¹ = −iσ₂`, `γ_M = γ⁰γ¹ = σ₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaRep {
    pub gamma0: C2,
    pub gamma1: C2,
    pub gamma_m: C2,
}

impl GammaRep {
    pub fn standard() -> Self {
        let z = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        let gamma0 = C2::new(z, one, one, z);
        let gamma1 = C2::new(z, -one, one, z);
        Self {
            gamma_m: gamma0 * gamma1,
            gamma0,
            gamma1,
        }
    }

    /// Largest entrywise defect of the Clifford and adjointness relations.
    pub fn defect(&self) -> f64 {
        let id = C2::identity();
        let g0 = &self.gamma0;
        let g1 = &self.gamma1;
        [
            (g0 * g0 - id).camax(),
            (g1 * g1 + id).camax(),
            (g0 * g1 + g1 * g0).camax(),
            (g0 * g1 - self.gamma_m).camax(),
            (g0.adjoint() - g0).camax(),
            (g1.adjoint() + g1).camax(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn kron(a: &C2, b: &C2) -> C4 {
    C4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Candidate cone element `a = diag(f₁, f₂)`.
#[derive(Debug, Clone)]
pub struct ConeElement {
    pub id: String,
    pub f1: RealField,
    pub f2: RealField,
}

impl ConeElement {
    pub fn new(id: impl Into<String>, f1: RealField, f2: RealField) -> Self {
        Self {
            id: id.into(),
            f1,
            f2,
        }
    }

    /// Same field on both sheets.
    pub fn diagonal(id: impl Into<String>, f: RealField) -> Self {
        Self::new(id, f.clone(), f)
    }

    /// `(t, t)`: the global time function.
    pub fn time() -> Self {
        Self::diagonal("time", RealField::time())
    }

    /// `(x, x)`: a spatial coordinate, never causal.
    pub fn space() -> Self {
        Self::diagonal("space", RealField::space())
    }

    /// `(t + εx, t + εx)`.
    pub fn tilted(eps: f64) -> Self {
        Self::diagonal(format!("tilted({eps})"), RealField::affine(0.0, 1.0, eps))
    }

    /// `(t + εx + c₁, t + εx + c₂)`: a sheet offset on top of a tilted time.
    pub fn offset(eps: f64, c1: f64, c2: f64) -> Self {
        Self::new(
            format!("offset({eps},{c1},{c2})"),
            RealField::affine(c1, 1.0, eps),
            RealField::affine(c2, 1.0, eps),
        )
    }

    /// Boosted tangent pair, saturating the cone condition.
    ///
    /// With `s = γ(t − v·x)` the proper time of the frame moving at `v`,
    /// `f₁ = tan(α₀ + k·s)` and `f₂ = tan(α₀ − gap + k·s)` with
    /// `k = |μ|·sin(gap)`. Valid while both angles stay inside
    /// `(−π/2, π/2)` on the region of use.
    pub fn tangent_pair(velocity: f64, alpha0: f64, gap: f64, mu_abs: f64) -> Self {
        let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
        let k = mu_abs * gap.sin() * (1.0 + 1e-9);
        let s = move |t: f64, x: f64| gamma * (t - velocity * x);
        let phase = move |t: f64, x: f64, a: f64| a + k * s(t, x);
        let field = move |a: f64| {
            RealField::with_gradient(
                move |t, x| phase(t, x, a).tan(),
                move |t, x| {
                    let sec2 = 1.0 / phase(t, x, a).cos().powi(2);
                    (k * sec2 * gamma, -k * sec2 * gamma * velocity)
                },
            )
        };
        Self::new(
            format!("tangent(v={velocity},a0={alpha0},gap={gap})"),
            field(alpha0),
            field(alpha0 - gap),
        )
    }

    /// Same element with the two sheets exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(
            format!("{}~swap", self.id),
            self.f2.clone(),
            self.f1.clone(),
        )
    }

    fn gradients(&self, e: Event) -> Result<[(f64, f64); 2], ConeError> {
        let missing = || ConeError::GradientUnavailable {
            id: self.id.clone(),
            t: e.t,
            x: e.x,
        };
        let g1 = self.f1.gradient_at(e).ok_or_else(missing)?;
        let g2 = self.f2.gradient_at(e).ok_or_else(missing)?;
        Ok([g1, g2])
    }

    /// Reads a grid of samples with columns `t,x,f1,f2`. Rows may come in
    /// any order but must cover a full rectangular grid.
    pub fn read_csv<R: Read>(id: impl Into<String>, reader: R) -> Result<Self, ConeError> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            x: f64,
            f1: f64,
            f2: f64,
        }
        let mut rows: Vec<Row> = Vec::new();
        for r in csv::Reader::from_reader(reader).deserialize() {
            rows.push(r?);
        }
        let axis = |vals: Vec<f64>| {
            let mut v = vals;
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
            v
        };
        let ts = axis(rows.iter().map(|r| r.t).collect());
        let xs = axis(rows.iter().map(|r| r.x).collect());
        let (nt, nx) = (ts.len(), xs.len());
        if nt < 2 || nx < 2 || rows.len() != nt * nx {
            return Err(ConeError::Csv(format!(
                "expected a full rectangular grid, got {} rows over {nt} times and {nx} positions",
                rows.len()
            )));
        }
        let dt = (ts[nt - 1] - ts[0]) / (nt - 1) as f64;
        let dx = (xs[nx - 1] - xs[0]) / (nx - 1) as f64;
        let mut f1 = vec![f64::NAN; nt * nx];
        let mut f2 = vec![f64::NAN; nt * nx];
        for r in &rows {
            let i = ((r.t - ts[0]) / dt).round() as usize;
            let j = ((r.x - xs[0]) / dx).round() as usize;
            if i >= nt || j >= nx {
                return Err(ConeError::Csv(format!(
                    "row ({}, {}) off the grid",
                    r.t, r.x
                )));
            }
            f1[i * nx + j] = r.f1;
            f2[i * nx + j] = r.f2;
        }
        if f1.iter().chain(&f2).any(|v| !v.is_finite()) {
            return Err(ConeError::Csv(
                "grid is not uniformly spaced or has gaps".into(),
            ));
        }
        let grid = |values| {
            RealField::Gridded(Arc::new(GridSamples {
                t0: ts[0],
                dt,
                nt,
                x0: xs[0],
                dx,
                nx,
                values,
            }))
        };
        Ok(Self::new(id, grid(f1), grid(f2)))
    }

    /// Writes the element sampled on `region` with columns `t,x,f1,f2`.
    pub fn write_csv<W: Write>(
        &self,
        w: W,
        region: &Region,
        res: Resolution,
    ) -> Result<(), ConeError> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "x", "f1", "f2"])?;
        for e in region.sample(res) {
            wr.write_record([
                e.t.to_string(),
                e.x.to_string(),
                self.f1.value_at(e).to_string(),
                self.f2.value_at(e).to_string(),
            ])?;
        }
        wr.flush().map_err(|e| ConeError::Csv(e.to_string()))?;
        Ok(())
    }
}

/// Hermitian 4×4 cone test matrix at an event.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeTestMatrix {
    pub value: C4,
    pub at: Event,
}

impl ConeTestMatrix {
    pub fn new(value: C4, at: Event) -> Result<Self, ConeError> {
        let defect = (value - value.adjoint()).camax();
        if !(defect <= HERMITIAN_TOL * (1.0 + value.camax())) {
            return Err(ConeError::NotHermitian {
                t: at.t,
                x: at.x,
                defect,
            });
        }
        Ok(Self { value, at })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let h = self.value.adjoint();
        let sym = (self.value + h) * c(0.5, 0.0);
        let ev = sym.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// `C_a(e) = i·(γ⁰⊗1)·[D_A, a](e)`.
///
/// The vector potential enters `D_A` as `A̸⊗1`; its commutator with the
/// diagonal multiplication operator `a` is assembled like every other term
/// and vanishes identically.
pub fn commutator_matrix(
    a: &ConeElement,
    e: Event,
    metric: &MetricModel,
    mu: Complex64,
    potential: Option<&VectorPotential>,
) -> Result<ConeTestMatrix, ConeError> {
    let g = GammaRep::standard();
    let [(dt1, dx1), (dt2, dx2)] = a.gradients(e)?;
    let inv_omega = c(1.0 / metric.omega(e), 0.0);
    let (f1, f2) = (a.f1.value_at(e), a.f2.value_at(e));
    let diag = |u: f64, v: f64| C2::new(c(u, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(v, 0.0));
    let minus_i = c(0.0, -1.0);
    let i = c(0.0, 1.0);

    // [D̸⊗1, a] = −iγ^μ ⊗ diag(∂_μ f₁, ∂_μ f₂), curved γ^μ = Ω⁻¹·flat
    let dirac = kron(&(g.gamma0 * inv_omega * minus_i), &diag(dt1, dt2))
        + kron(&(g.gamma1 * inv_omega * minus_i), &diag(dx1, dx2));

    // [iγ_M⊗D_F, a] = iγ_M ⊗ [D_F, diag(f₁, f₂)]
    let d_f = C2::new(c(0.0, 0.0), mu, mu.conj(), c(0.0, 0.0));
    let fa = diag(f1, f2);
    let finite = kron(&(g.gamma_m * i), &(d_f * fa - fa * d_f));

    let (at, ax) = potential.map_or((0.0, 0.0), |p| p.at(e.t, e.x));
    let slash_a = (g.gamma0 * c(at, 0.0) + g.gamma1 * c(ax, 0.0)) * inv_omega;
    let a_op = kron(&slash_a, &C2::identity());
    let f_op = kron(&C2::identity(), &fa);
    let gauge = a_op * f_op - f_op * a_op;

    let j = kron(&g.gamma0, &C2::identity());
    let mut value = (j * (dirac + finite + gauge)) * i;
    // +0.0 folds signed zeros so that results compare bitwise
    value.apply(|z| *z = c(z.re + 0.0, z.im + 0.0));
    ConeTestMatrix::new(value, e)
}

/// Outcome of a membership test on a sampled region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Member { min_eigenvalue: f64 },
    Violation { at: Event, min_eigenvalue: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

/// Where and against which operator cone membership is checked.
#[derive(Debug, Clone)]
pub struct ConeContext {
    pub region: Region,
    pub sampling: Resolution,
    pub metric: MetricModel,
    /// Off-diagonal entry of `D_F`: the constant `μ` or a field `Φ`.
    pub mu: ComplexField,
    pub psd_tol: f64,
}

impl ConeContext {
    pub fn new(region: Region, sampling: Resolution, mu: ComplexField) -> Self {
        Self {
            region,
            sampling,
            metric: MetricModel::Minkowski,
            mu,
            psd_tol: DEFAULT_PSD_TOL,
        }
    }

    pub fn metric(mut self, metric: MetricModel) -> Self {
        self.metric = metric;
        self
    }

    pub fn psd_tol(mut self, tol: f64) -> Self {
        self.psd_tol = tol;
        self
    }
}

/// Member iff `C_a` is PSD (to `−tol`) at every sampled event; otherwise
/// the event with the most negative eigenvalue.
pub fn is_causal_element(a: &ConeElement, ctx: &ConeContext) -> Result<Membership, ConeError> {
    if ctx.region.is_empty() || ctx.sampling.nt == 0 || ctx.sampling.nx == 0 {
        return Err(ConeError::EmptyRegion);
    }
    let mut worst = (f64::INFINITY, Event::new(f64::NAN, f64::NAN));
    for e in ctx.region.sample(ctx.sampling) {
        let mu = ctx.mu.value(e.t, e.x);
        let m = commutator_matrix(a, e, &ctx.metric, mu, None)?;
        let lo = m.min_eigenvalue();
        if lo < worst.0 {
            worst = (lo, e);
        }
    }
    let (min_eigenvalue, at) = worst;
    Ok(if min_eigenvalue >= -ctx.psd_tol {
        Membership::Member { min_eigenvalue }
    } else {
        Membership::Violation { at, min_eigenvalue }
    })
}

/// A state on `C(M) ⊕ C(M)` supported on one time slice: point masses at
/// `positions`, split between the two sheets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcState {
    time: f64,
    positions: Vec<f64>,
    rho_minus: Vec<f64>,
    rho_plus: Vec<f64>,
}

impl AcState {
    /// Masses per node (already multiplied by the cell width).
    pub fn new(
        time: f64,
        positions: Vec<f64>,
        rho_minus: Vec<f64>,
        rho_plus: Vec<f64>,
    ) -> Result<Self, ConeError> {
        if positions.len() != rho_minus.len() || positions.len() != rho_plus.len() {
            return Err(ConeError::ShapeMismatch);
        }
        let mut mass = 0.0;
        for (index, (m, p)) in rho_minus.iter().zip(&rho_plus).enumerate() {
            if !(*m >= 0.0 && *p >= 0.0 && m.is_finite() && p.is_finite()) {
                return Err(ConeError::NegativeDensity { index });
            }
            mass += m + p;
        }
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(ConeError::Normalization { mass });
        }
        Ok(Self {
            time,
            positions,
            rho_minus,
            rho_plus,
        })
    }

    /// Point mass at an event on one sheet.
    pub fn pure(event: Event, sheet: Sheet) -> Self {
        let (m, p) = match sheet {
            Sheet::Minus => (1.0, 0.0),
            Sheet::Plus => (0.0, 1.0),
        };
        Self {
            time: event.t,
            positions: vec![event.x],
            rho_minus: vec![m],
            rho_plus: vec![p],
        }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn rho_minus(&self) -> &[f64] {
        &self.rho_minus
    }

    pub fn rho_plus(&self) -> &[f64] {
        &self.rho_plus
    }

    /// `(mass on sheet −, mass on sheet +)`.
    pub fn sheet_masses(&self) -> (f64, f64) {
        (self.rho_minus.iter().sum(), self.rho_plus.iter().sum())
    }

    /// Chirality expectation `Σ(ρ₊ − ρ₋)`.
    pub fn chirality(&self) -> f64 {
        let (m, p) = self.sheet_masses();
        p - m
    }
}

/// `ω(a) = Σ ρ₋·f₁ + ρ₊·f₂` over the slice.
pub fn state_pairing(s: &AcState, a: &ConeElement) -> f64 {
    let t = s.time;
    s.positions
        .iter()
        .zip(s.rho_minus.iter().zip(&s.rho_plus))
        .map(|(&x, (&m, &p))| {
            let lhs = if m != 0.0 { m * a.f1.value(t, x) } else { 0.0 };
            let rhs = if p != 0.0 { p * a.f2.value(t, x) } else { 0.0 };
            lhs + rhs
        })
        .sum()
}

/// Disproof of `ω ⪯ η` by one cone element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub element_id: String,
    pub pairing_omega: f64,
    pub pairing_eta: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Refutation {
    Certificate(Certificate),
    /// No member of the family separates the states. Not a proof of
    /// causality: the family is finite.
    Consistent,
}

/// Searches `family` for an element with `ω(a) > η(a) + tol`. Every
/// member is verified against `ctx` first.
pub fn refute_causality(
    omega: &AcState,
    eta: &AcState,
    family: &[ConeElement],
    ctx: &ConeContext,
    tol: f64,
) -> Result<Refutation, ConeError> {
    for a in family {
        if let Membership::Violation { at, min_eigenvalue } = is_causal_element(a, ctx)? {
            return Err(ConeError::RejectedElement {
                id: a.id.clone(),
                t: at.t,
                x: at.x,
                min_eigenvalue,
            });
        }
    }
    for a in family {
        let (w, h) = (state_pairing(omega, a), state_pairing(eta, a));
        if w > h + tol {
            return Ok(Refutation::Certificate(Certificate {
                element_id: a.id.clone(),
                pairing_omega: w,
                pairing_eta: h,
                margin: w - h,
            }));
        }
    }
    Ok(Refutation::Consistent)
}

/// Tangent pairs adapted to an inter-sheet pair `(p, ·) → (q, ·)` whose
/// proper time is below `π/(2|μ|)`, each valid on `region`.
///
/// Elements use the rest frame of `p → q` (clamped below light speed for
/// null pairs) and a spread of sheet gaps; pairs whose angles would leave
/// `(−π/2, π/2)` on the region are skipped. Both sheet orientations are
/// returned.
pub fn separating_family(p: Event, q: Event, mu_abs: f64, region: &Region) -> Vec<ConeElement> {
    let span = q.t - p.t;
    let velocity = if span > 0.0 {
        ((q.x - p.x) / span).clamp(-0.99, 0.99)
    } else {
        0.0
    };
    let gamma = 1.0 / (1.0 - velocity * velocity).sqrt();
    let s = |e: Event| gamma * (e.t - velocity * e.x) - gamma * (p.t - velocity * p.x);
    let corners = [
        Event::new(region.t_min, region.x_min),
        Event::new(region.t_min, region.x_max),
        Event::new(region.t_max, region.x_min),
        Event::new(region.t_max, region.x_max),
        p,
        q,
    ];
    let s_lo = corners.iter().map(|&e| s(e)).fold(f64::INFINITY, f64::min);
    let s_hi = corners
        .iter()
        .map(|&e| s(e))
        .fold(f64::NEG_INFINITY, f64::max);
    let guard = 1e-3;
    let mut out = Vec::new();
    for step in 1..40 {
        let gap = PI * step as f64 / 40.0;
        let k = mu_abs * gap.sin() * (1.0 + 1e-9);
        let hi = FRAC_PI_2 - guard - k * s_hi;
        let lo = -FRAC_PI_2 + guard + gap - k * s_lo;
        if lo >= hi {
            continue;
        }
        let alpha0 = 0.5 * (lo + hi);
        let a = ConeElement::tangent_pair(velocity, alpha0, gap, mu_abs);
        out.push(a.swapped());
        out.push(a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_ctx(mu: f64) -> ConeContext {
        ConeContext::new(
            Region::new(0.0, 1.0, -1.0, 1.0).unwrap(),
            Resolution::new(5, 9),
            ComplexField::constant(c(0.0, mu)),
        )
    }

    #[test]
    fn gamma_representation_satisfies_clifford_relations() {
        let g = GammaRep::standard();
        assert_eq!(g.defect(), 0.0);
        let sigma3 = C2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        assert_eq!(g.gamma_m, sigma3);
    }

    #[test]
    fn time_function_gives_identity() {
        let m = commutator_matrix(
            &ConeElement::time(),
            Event::new(0.3, -0.2),
            &MetricModel::Minkowski,
            c(0.0, 2.5),
            None,
        )
        .unwrap();
        assert_eq!(m.value, C4::identity());
    }

    #[test]
    fn space_function_gives_chirality_matrix() {
        let g = GammaRep::standard();
        let m = commutator_matrix(
            &ConeElement::space(),
            Event::new(0.0, 0.0),
            &MetricModel::Minkowski,
            c(0.0, 1.0),
            None,
        )
        .unwrap();
        assert_eq!(m.value, kron(&(g.gamma0 * g.gamma1), &C2::identity()));
        let ev = m.eigenvalues();
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn vector_potential_leaves_matrix_bitwise_unchanged() {
        let a = ConeElement::offset(0.3, 0.1, -0.2);
        let e = Event::new(0.4, 0.7);
        let pot = VectorPotential::new(
            RealField::constant(3.7),
            RealField::from_fn(|t, x| t * x - 9.0),
        );
        let with =
            commutator_matrix(&a, e, &MetricModel::Minkowski, c(0.5, 1.0), Some(&pot)).unwrap();
        let without = commutator_matrix(&a, e, &MetricModel::Minkowski, c(0.5, 1.0), None).unwrap();
        for (x, y) in with.value.iter().zip(without.value.iter()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn membership_examples() {
        let ctx = flat_ctx(1.0);
        assert!(is_causal_element(&ConeElement::time(), &ctx)
            .unwrap()
            .is_member());
        match is_causal_element(&ConeElement::space(), &ctx).unwrap() {
            Membership::Violation { min_eigenvalue, .. } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-12)
            }
            other => panic!("expected violation, got {other:?}"),
        }
        for eps in [-0.9, -0.4, 0.0, 0.6, 0.99] {
            assert!(is_causal_element(&ConeElement::tilted(eps), &ctx)
                .unwrap()
                .is_member());
        }
        assert!(!is_causal_element(&ConeElement::tilted(2.0), &ctx)
            .unwrap()
            .is_member());
    }

    #[test]
    fn missing_gradient_is_reported() {
        let samples = GridSamples {
            t0: 0.0,
            dt: 0.5,
            nt: 3,
            x0: 0.0,
            dx: 0.5,
            nx: 3,
            values: vec![0.0; 9],
        };
        let f = RealField::Gridded(Arc::new(samples));
        let a = ConeElement::diagonal("grid", f);
        let r = commutator_matrix(
            &a,
            Event::new(0.0, 0.0),
            &MetricModel::Minkowski,
            c(0.0, 1.0),
            None,
        );
        assert!(matches!(r, Err(ConeError::GradientUnavailable { .. })));
    }

    #[test]
    fn empty_region_is_rejected() {
        let mut ctx = flat_ctx(1.0);
        ctx.region = Region::new(0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(
            is_causal_element(&ConeElement::time(), &ctx),
            Err(ConeError::EmptyRegion)
        );
    }

    #[test]
    fn pairing_examples() {
        let a = ConeElement::new(
            "a",
            RealField::from_fn(|t, x| t + 2.0 * x),
            RealField::constant(5.0),
        );
        let p = Event::new(0.5, 0.25);
        assert_eq!(state_pairing(&AcState::pure(p, Sheet::Minus), &a), 1.0);

        let xs: Vec<f64> = (-5..=5).map(|k| k as f64 * 0.1).collect();
        let w = vec![1.0 / 22.0; xs.len()];
        let mixed = AcState::new(0.0, xs, w.clone(), w).unwrap();
        let anti = ConeElement::new(
            "anti",
            RealField::from_fn(|_, x| x.sin() + 1.0),
            RealField::from_fn(|_, x| -(x.sin() + 1.0)),
        );
        assert!(state_pairing(&mixed, &anti).abs() < 1e-15);
        let unit = ConeElement::diagonal("one", RealField::constant(1.0));
        assert!((state_pairing(&mixed, &unit) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn state_normalization_is_enforced() {
        let r = AcState::new(0.0, vec![0.0, 1.0], vec![0.2, 0.2], vec![0.2, 0.2]);
        assert!(matches!(r, Err(ConeError::Normalization { .. })));
        let r = AcState::new(0.0, vec![0.0], vec![1.5], vec![-0.5]);
        assert!(matches!(r, Err(ConeError::NegativeDensity { .. })));
    }

    #[test]
    fn refutation_examples() {
        let ctx = ConeContext::new(
            Region::new(-1.0, 0.0, -1.0, 1.0).unwrap(),
            Resolution::new(5, 5),
            ComplexField::constant(c(0.0, 1.0)),
        );
        let omega = AcState::pure(Event::new(0.0, 0.0), Sheet::Minus);
        let family = vec![ConeElement::time(), ConeElement::tilted(0.5)];
        assert_eq!(
            refute_causality(&omega, &omega, &family, &ctx, 1e-12).unwrap(),
            Refutation::Consistent
        );
        let eta = AcState::pure(Event::new(-1.0, 0.0), Sheet::Minus);
        match refute_causality(&omega, &eta, &family, &ctx, 1e-12).unwrap() {
            Refutation::Certificate(cert) => {
                assert_eq!(cert.element_id, "time");
                assert_eq!(cert.margin, 1.0);
            }
            other => panic!("expected certificate, got {other:?}"),
        }
        let bad = vec![ConeElement::space()];
        assert!(matches!(
            refute_causality(&omega, &eta, &bad, &ctx, 1e-12),
            Err(ConeError::RejectedElement { .. })
        ));
    }

    #[test]
    fn csv_round_trip_keeps_membership() {
        let region = Region::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let a = ConeElement::offset(0.4, 0.0, 0.3);
        let mut buf = Vec::new();
        a.write_csv(&mut buf, &region, Resolution::new(11, 21))
            .unwrap();
        let b = ConeElement::read_csv("from-csv", buf.as_slice()).unwrap();
        let inner = Region::new(0.1, 0.9, -0.9, 0.9).unwrap();
        let ctx = ConeContext::new(
            inner,
            Resolution::new(5, 5),
            ComplexField::constant(c(0.0, 1.0)),
        );
        assert!(is_causal_element(&b, &ctx).unwrap().is_member());
        let e = Event::new(0.55, 0.05);
        assert!((b.f2.value_at(e) - a.f2.value_at(e)).abs() < 1e-12);
    }
}
