//! Flat 1+1D Dirac wave packets in the chirality basis.
//!
//! With `γ⁰ = σ₁`, `γ¹ = −iσ₂` the Hamiltonian is
//! `H = σ₃(p + A_x) + A_t + [[0, M], [M̄, 0]]`, so `ψ₊` moves right and `ψ₋`
//! left at unit speed and the mass entry `M` swaps chirality. `M = m` for a
//! constant mass, `M = −iΦ` for a Yukawa field; `Φ = i·m` gives back `m`.
//!
//! One Strang step is: half advection, full chirality coupling at the
//! midpoint time, half advection. Advection is a spectral translation
//! followed by the phase `∫ A` accumulated along the light ray, so the
//! scheme is gauge covariant up to quadrature error.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use thiserror::Error;

use crate::cone::{AcState, ConeError};
use crate::field::{ComplexField, VectorPotential};

/// Smallest supported grid.
pub const MIN_GRID_POINTS: usize = 64;

/// Norm deviation accepted by [`extract_ac_state`].
pub const EXTRACT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiracError {
    #[error("grid needs a power-of-two point count ≥ {MIN_GRID_POINTS}, got {0}")]
    GridSize(usize),
    #[error("grid length must be positive and finite, got {0}")]
    GridLength(f64),
    #[error("packet width {sigma} is below 4·dx = {min}")]
    UnderResolved { sigma: f64, min: f64 },
    #[error("chirality amplitudes have squared norm {0}, expected 1")]
    Amplitudes(f64),
    #[error("time step {dt} violates dt ≤ dx = {dx}")]
    Cfl { dt: f64, dx: f64 },
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
    #[error("non-finite amplitude after step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },
    #[error("non-finite coupling at t = {t}, x = {x}")]
    NonFiniteField { t: f64, x: f64 },
    #[error("positive-energy projection needs a free field: {0}")]
    ExternalFields(&'static str),
    #[error("projection annihilated the state")]
    ZeroProjection,
    #[error("field norm {0} deviates from 1")]
    NormDeviation(f64),
    #[error(transparent)]
    State(#[from] ConeError),
}

/// Periodic grid on `[−L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    length: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self, DiracError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(DiracError::GridLength(length));
        }
        if n < MIN_GRID_POINTS || !n.is_power_of_two() {
            return Err(DiracError::GridSize(n));
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let base = 2.0 * PI / self.length;
        (0..self.n)
            .map(|m| {
                if m < self.n / 2 {
                    base * m as f64
                } else {
                    base * (m as f64 - self.n as f64)
                }
            })
            .collect()
    }
}

/// Two chirality components on a grid at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: Grid1D,
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
    pub time: f64,
}

impl SpinorField {
    pub fn norm(&self) -> f64 {
        let s: f64 = self
            .psi_plus
            .iter()
            .zip(&self.psi_minus)
            .map(|(p, m)| p.norm_sqr() + m.norm_sqr())
            .sum();
        s * self.grid.dx()
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.norm().sqrt();
        for z in self.psi_plus.iter_mut().chain(self.psi_minus.iter_mut()) {
            *z *= scale;
        }
    }

    fn is_finite(&self) -> bool {
        self.psi_plus
            .iter()
            .chain(&self.psi_minus)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Snapshot CSV: `x,re_plus,im_plus,re_minus,im_minus`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "re_plus", "im_plus", "re_minus", "im_minus"])?;
        for j in 0..self.grid.len() {
            let (p, m) = (self.psi_plus[j], self.psi_minus[j]);
            wr.write_record([
                self.grid.x(j).to_string(),
                p.re.to_string(),
                p.im.to_string(),
                m.re.to_string(),
                m.im.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Gaussian packet `exp(−(x−x₀)²/(4σ²))·e^{ik₀x}` times `(c₋, c₊)`.
pub fn make_packet(
    grid: Grid1D,
    x0: f64,
    sigma: f64,
    k0: f64,
    c_minus: Complex64,
    c_plus: Complex64,
) -> Result<SpinorField, DiracError> {
    let weight = c_minus.norm_sqr() + c_plus.norm_sqr();
    if (weight - 1.0).abs() > 1e-12 {
        return Err(DiracError::Amplitudes(weight));
    }
    let min = 4.0 * grid.dx();
    if !(sigma >= min) {
        return Err(DiracError::UnderResolved { sigma, min });
    }
    let envelope: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let x = grid.x(j);
            let g = (-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(g, k0 * x)
        })
        .collect();
    let mut f = SpinorField {
        grid,
        psi_plus: envelope.iter().map(|e| e * c_plus).collect(),
        psi_minus: envelope.iter().map(|e| e * c_minus).collect(),
        time: 0.0,
    };
    f.normalize();
    Ok(f)
}

/// Chirality-coupling entry of the Hamiltonian.
#[derive(Debug, Clone)]
pub enum MassTerm {
    /// Constant mass `m ≥ 0`; the entry is `m`.
    Mass(f64),
    /// Yukawa field `Φ(t, x)`; the entry is `−iΦ`.
    Yukawa(ComplexField),
}

impl MassTerm {
    pub fn entry(&self, t: f64, x: f64) -> Complex64 {
        match self {
            MassTerm::Mass(m) => Complex64::new(*m, 0.0),
            MassTerm::Yukawa(phi) => Complex64::new(0.0, -1.0) * phi.value(t, x),
        }
    }

    /// Constant entry, if the term does not vary.
    pub fn constant_entry(&self) -> Option<Complex64> {
        match self {
            MassTerm::Mass(m) => Some(Complex64::new(*m, 0.0)),
            MassTerm::Yukawa(phi) => phi.as_constant().map(|p| Complex64::new(0.0, -1.0) * p),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionConfig {
    pub mass: MassTerm,
    pub potential: Option<VectorPotential>,
    pub dt: f64,
    pub steps: usize,
    /// Trajectory sampling stride (≥ 1).
    pub record_every: usize,
}

impl EvolutionConfig {
    pub fn free(m: f64, dt: f64, steps: usize) -> Self {
        Self {
            mass: MassTerm::Mass(m),
            potential: None,
            dt,
            steps,
            record_every: 1,
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<(), DiracError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(DiracError::TimeStep(self.dt));
        }
        if self.dt > grid.dx() * (1.0 + 1e-12) {
            return Err(DiracError::Cfl {
                dt: self.dt,
                dx: grid.dx(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub time: f64,
    pub mean_x: f64,
    pub chirality: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.time).collect()
    }

    pub fn chirality(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.chirality).collect()
    }

    pub fn mean_x(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.mean_x).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `step,time,mean_x,chirality,norm`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub mean_x: f64,
    pub chirality: f64,
    pub norm: f64,
    pub rho_minus: Vec<f64>,
    pub rho_plus: Vec<f64>,
}

/// Position and chirality expectations plus pointwise densities.
pub fn observables(f: &SpinorField) -> Observables {
    let dx = f.grid.dx();
    let rho_plus: Vec<f64> = f.psi_plus.iter().map(|z| z.norm_sqr()).collect();
    let rho_minus: Vec<f64> = f.psi_minus.iter().map(|z| z.norm_sqr()).collect();
    let (mut mean_x, mut chirality, mut norm) = (0.0, 0.0, 0.0);
    for j in 0..f.grid.len() {
        let x = f.grid.x(j);
        let total = rho_plus[j] + rho_minus[j];
        mean_x += x * total;
        chirality += rho_plus[j] - rho_minus[j];
        norm += total;
    }
    Observables {
        mean_x: mean_x * dx,
        chirality: chirality * dx,
        norm: norm * dx,
        rho_minus,
        rho_plus,
    }
}

fn row(step: usize, f: &SpinorField) -> TrajectoryRow {
    let o = observables(f);
    TrajectoryRow {
        step,
        time: f.time,
        mean_x: o.mean_x,
        chirality: o.chirality,
        norm: o.norm,
    }
}

/// Three-point Gauss–Legendre nodes and weights on `[0, 1]`.
const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// Split-step propagator with cached FFT plans.
pub struct Propagator {
    grid: Grid1D,
    cfg: EvolutionConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    shift_plus: Vec<Complex64>,
    shift_minus: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: Grid1D, cfg: EvolutionConfig) -> Result<Self, DiracError> {
        cfg.validate(&grid)?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.len());
        let inverse = planner.plan_fft_inverse(grid.len());
        let half = 0.5 * cfg.dt;
        let scale = 1.0 / grid.len() as f64;
        let ks = grid.wavenumbers();
        let shift_plus = ks
            .iter()
            .map(|k| Complex64::from_polar(scale, -k * half))
            .collect();
        let shift_minus = ks
            .iter()
            .map(|k| Complex64::from_polar(scale, k * half))
            .collect();
        let scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len()];
        Ok(Self {
            grid,
            cfg,
            forward,
            inverse,
            shift_plus,
            shift_minus,
            scratch,
        })
    }

    fn translate(&mut self, data: &mut [Complex64], plus: bool) {
        self.forward.process_with_scratch(data, &mut self.scratch);
        let phases = if plus {
            &self.shift_plus
        } else {
            &self.shift_minus
        };
        for (z, p) in data.iter_mut().zip(phases) {
            *z *= p;
        }
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// Advect both components by half a step starting at `t0`, then apply
    /// the potential phase accumulated along each light ray.
    fn half_advect(&mut self, f: &mut SpinorField, t0: f64) {
        self.translate(&mut f.psi_plus, true);
        self.translate(&mut f.psi_minus, false);
        let Some(pot) = &self.cfg.potential else {
            return;
        };
        let tau = 0.5 * self.cfg.dt;
        for j in 0..self.grid.len() {
            let x = self.grid.x(j);
            let (mut right, mut left) = (0.0, 0.0);
            for (node, w) in GAUSS3 {
                let s = node * tau;
                let (at, ax) = pot.at(t0 + s, x - tau + s);
                right += w * (at + ax);
                let (at, ax) = pot.at(t0 + s, x + tau - s);
                left += w * (at - ax);
            }
            f.psi_plus[j] *= Complex64::from_polar(1.0, -right * tau);
            f.psi_minus[j] *= Complex64::from_polar(1.0, -left * tau);
        }
    }

    fn couple(&self, f: &mut SpinorField, t_mid: f64) -> Result<(), DiracError> {
        let h = self.cfg.dt;
        let constant = self.cfg.mass.constant_entry();
        for j in 0..self.grid.len() {
            let x = self.grid.x(j);
            let m = constant.unwrap_or_else(|| self.cfg.mass.entry(t_mid, x));
            if !(m.re.is_finite() && m.im.is_finite()) {
                return Err(DiracError::NonFiniteField { t: t_mid, x });
            }
            let a = m.norm();
            if a == 0.0 {
                continue;
            }
            let c = (a * h).cos();
            let s = (a * h).sin() / a;
            let (p, q) = (f.psi_plus[j], f.psi_minus[j]);
            let mi = Complex64::new(0.0, -s);
            f.psi_plus[j] = p * c + mi * m * q;
            f.psi_minus[j] = q * c + mi * m.conj() * p;
        }
        Ok(())
    }

    /// One Strang step.
    pub fn step(&mut self, f: &mut SpinorField) -> Result<(), DiracError> {
        let t0 = f.time;
        let h = self.cfg.dt;
        self.half_advect(f, t0);
        self.couple(f, t0 + 0.5 * h)?;
        self.half_advect(f, t0 + 0.5 * h);
        f.time = t0 + h;
        Ok(())
    }
}

/// Runs `cfg.steps` steps, calling `observe` on the initial field and after
/// every step.
pub fn evolve_observed(
    field: &SpinorField,
    cfg: &EvolutionConfig,
    mut observe: impl FnMut(usize, &SpinorField),
) -> Result<(SpinorField, Trajectory), DiracError> {
    let mut prop = Propagator::new(field.grid, cfg.clone())?;
    let stride = cfg.record_every.max(1);
    let mut f = field.clone();
    let mut traj = Trajectory::default();
    traj.rows.push(row(0, &f));
    observe(0, &f);
    for step in 1..=cfg.steps {
        prop.step(&mut f)?;
        observe(step, &f);
        if step % stride == 0 || step == cfg.steps {
            if !f.is_finite() {
                return Err(DiracError::NonFinite { step, time: f.time });
            }
            traj.rows.push(row(step, &f));
        }
    }
    if !f.is_finite() {
        return Err(DiracError::NonFinite {
            step: cfg.steps,
            time: f.time,
        });
    }
    Ok((f, traj))
}

pub fn evolve(
    field: &SpinorField,
    cfg: &EvolutionConfig,
) -> Result<(SpinorField, Trajectory), DiracError> {
    evolve_observed(field, cfg, |_, _| {})
}

/// Projects onto the `E = +√(k² + |M|²)` branch of the free Hamiltonian
/// and renormalizes.
pub fn project_positive_energy(
    f: &SpinorField,
    mass: &MassTerm,
    potential: Option<&VectorPotential>,
) -> Result<SpinorField, DiracError> {
    if potential.is_some() {
        return Err(DiracError::ExternalFields("vector potential present"));
    }
    let m = mass.constant_entry().ok_or(DiracError::ExternalFields(
        "mass entry varies in space-time",
    ))?;
    let n = f.grid.len();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut up = f.psi_plus.clone();
    let mut down = f.psi_minus.clone();
    forward.process(&mut up);
    forward.process(&mut down);
    let scale = 1.0 / n as f64;
    for (i, k) in f.grid.wavenumbers().into_iter().enumerate() {
        let e = (k * k + m.norm_sqr()).sqrt();
        let (a, b) = (up[i], down[i]);
        if e == 0.0 {
            up[i] = a * scale;
            down[i] = Complex64::new(0.0, 0.0);
            continue;
        }
        // P = (1 + H/E)/2, H = [[k, M], [M̄, −k]]
        let half = 0.5 / e;
        up[i] = (a * (0.5 + k * half) + m * b * half) * scale;
        down[i] = (m.conj() * a * half + b * (0.5 - k * half)) * scale;
    }
    inverse.process(&mut up);
    inverse.process(&mut down);
    let mut out = SpinorField {
        grid: f.grid,
        psi_plus: up,
        psi_minus: down,
        time: f.time,
    };
    let norm = out.norm();
    if !(norm > 1e-300) {
        return Err(DiracError::ZeroProjection);
    }
    out.normalize();
    Ok(out)
}

/// State on the algebra from the slice densities `|ψ₋|²`, `|ψ₊|²`.
pub fn extract_ac_state(f: &SpinorField) -> Result<AcState, DiracError> {
    let norm = f.norm();
    if (norm - 1.0).abs() > EXTRACT_NORM_TOL {
        return Err(DiracError::NormDeviation(norm));
    }
    let scale = f.grid.dx() / norm;
    let rho_minus = f.psi_minus.iter().map(|z| z.norm_sqr() * scale).collect();
    let rho_plus = f.psi_plus.iter().map(|z| z.norm_sqr() * scale).collect();
    Ok(AcState::new(
        f.time,
        f.grid.positions(),
        rho_minus,
        rho_plus,
    )?)
}
