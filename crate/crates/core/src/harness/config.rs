//! Experiment configuration (TOML) and its validation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dirac::{Grid1D, MassTerm};
use crate::field::{ComplexField, RealField, VectorPotential};
use crate::spacetime::{Event, Region, Resolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    FreeZitter,
    PositiveEnergy,
    EmField,
    YukawaField,
    CausalDecide,
    ConeAudit,
    Optimize,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::FreeZitter => "free_zitter",
            Scenario::PositiveEnergy => "positive_energy",
            Scenario::EmField => "em_field",
            Scenario::YukawaField => "yukawa_field",
            Scenario::CausalDecide => "causal_decide",
            Scenario::ConeAudit => "cone_audit",
            Scenario::Optimize => "optimize",
        }
    }

    pub fn evolves(self) -> bool {
        matches!(
            self,
            Scenario::FreeZitter
                | Scenario::PositiveEnergy
                | Scenario::EmField
                | Scenario::YukawaField
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            length: 200.0,
            points: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketConfig {
    pub x0: f64,
    pub sigma: f64,
    pub k0: f64,
    /// `[re, im]` of the left-moving amplitude.
    pub c_minus: [f64; 2],
    pub c_plus: [f64; 2],
}

impl Default for PacketConfig {
    fn default() -> Self {
        Self {
            x0: 0.0,
            sigma: 10.0,
            k0: 0.0,
            c_minus: [1.0, 0.0],
            c_plus: [0.0, 0.0],
        }
    }
}

/// `A_t = 0`, `A_x = −E·t + a·sin(k·x − ω·t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct VectorConfig {
    pub e_field: f64,
    pub amplitude: f64,
    pub k: f64,
    pub omega: f64,
}

/// `Φ = (re + i·im)·(1 + a·sin(k·x − ω·t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YukawaConfig {
    pub re: f64,
    pub im: f64,
    pub amplitude: f64,
    pub k: f64,
    pub omega: f64,
}

impl Default for YukawaConfig {
    fn default() -> Self {
        Self {
            re: 0.0,
            im: 1.0,
            amplitude: 0.0,
            k: 0.0,
            omega: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldsConfig {
    pub mass: f64,
    pub vector: Option<VectorConfig>,
    pub yukawa: Option<YukawaConfig>,
}

impl Default for FieldsConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            vector: None,
            yukawa: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 0.02,
            steps: 2000,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub enabled: bool,
    pub tol: f64,
    /// Steps between sampled slices.
    pub sample_every: usize,
    pub random_members: usize,
    pub sampling_nt: usize,
    pub sampling_nx: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            tol: 1e-6,
            sample_every: 10,
            random_members: 12,
            sampling_nt: 9,
            sampling_nx: 65,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecideConfig {
    pub mass: f64,
    pub t_max: f64,
    pub x_max: f64,
    /// Scan cells along `T` and `x`.
    pub cells_t: usize,
    pub cells_x: usize,
    pub nt: usize,
    pub nx: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            t_max: 3.0,
            x_max: 3.0,
            cells_t: 50,
            cells_x: 50,
            nt: 32,
            nx: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Member,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConeAuditConfig {
    /// `time`, `space`, `tilted`, `offset` or `csv`.
    pub element: String,
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    pub csv: Option<String>,
    pub mu: [f64; 2],
    pub region: [f64; 4],
    pub nt: usize,
    pub nx: usize,
    pub expect: Option<Expectation>,
}

impl Default for ConeAuditConfig {
    fn default() -> Self {
        Self {
            element: "time".into(),
            eps: 0.0,
            c1: 0.0,
            c2: 0.0,
            csv: None,
            mu: [0.0, 1.0],
            region: [0.0, 1.0, -1.0, 1.0],
            nt: 9,
            nx: 17,
            expect: None,
        }
    }
}

/// Weight `|Φ| = base·(1 + bump·x²)` on flat space, or a conformal factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeConfig {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub region: [f64; 4],
    pub nt: usize,
    pub nx: usize,
    pub base: f64,
    pub bump: f64,
    /// Conformal factor `Ω = 1 + omega_bump·x²` (0 for Minkowski).
    pub omega_bump: f64,
    pub brute_force: bool,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            p: [0.0, 0.0],
            q: [2.0, 0.0],
            region: [0.0, 2.0, -1.0, 1.0],
            nt: 9,
            nx: 9,
            base: 1.0,
            bump: 1.0,
            omega_bump: 0.0,
            brute_force: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub trajectory: bool,
    pub snapshot: bool,
    pub pairings: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            trajectory: true,
            snapshot: false,
            pairings: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub packet: PacketConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub decide: DecideConfig,
    #[serde(default)]
    pub cone: ConeAuditConfig,
    #[serde(default)]
    pub optimize: OptimizeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(key: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn region(key: &str, r: [f64; 4]) -> Result<Region, ConfigError> {
    finite(key, &r)?;
    Region::new(r[0], r[1], r[2], r[3]).map_err(|e| invalid(key, e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.scenario.evolves() {
            self.validate_evolution()?;
        }
        match self.scenario {
            Scenario::CausalDecide => {
                let d = &self.decide;
                positive("decide.mass", d.mass)?;
                positive("decide.t_max", d.t_max)?;
                positive("decide.x_max", d.x_max)?;
                if d.cells_t == 0 || d.cells_x == 0 {
                    return Err(invalid(
                        "decide.cells_t",
                        "scan needs at least one cell per axis",
                    ));
                }
                if d.nt < 3 || d.nx < 2 {
                    return Err(invalid("decide.nt", "lattice needs nt ≥ 3 and nx ≥ 2"));
                }
            }
            Scenario::ConeAudit => {
                let c = &self.cone;
                region("cone.region", c.region)?;
                finite("cone.mu", &c.mu)?;
                finite("cone.eps", &[c.eps, c.c1, c.c2])?;
                if c.nt == 0 || c.nx == 0 {
                    return Err(invalid("cone.nt", "sampling must be non-empty"));
                }
                match c.element.as_str() {
                    "time" | "space" | "tilted" | "offset" => {}
                    "csv" if c.csv.is_some() => {}
                    "csv" => {
                        return Err(invalid("cone.csv", "path required for element = \"csv\""))
                    }
                    other => {
                        return Err(invalid(
                            "cone.element",
                            format!("unknown element `{other}`"),
                        ))
                    }
                }
            }
            Scenario::Optimize => {
                let o = &self.optimize;
                let r = region("optimize.region", o.region)?;
                finite("optimize.p", &o.p)?;
                finite("optimize.q", &o.q)?;
                for (key, e) in [("optimize.p", o.p), ("optimize.q", o.q)] {
                    if !r.contains(Event::new(e[0], e[1])) {
                        return Err(invalid(key, "outside optimize.region"));
                    }
                }
                positive("optimize.base", o.base)?;
                if !(o.bump >= 0.0 && o.omega_bump >= 0.0) {
                    return Err(invalid("optimize.bump", "bumps must be non-negative"));
                }
                if o.nt < 2 || o.nx < 1 {
                    return Err(invalid("optimize.nt", "lattice needs nt ≥ 2"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_evolution(&self) -> Result<(), ConfigError> {
        let g = self.grid()?;
        let p = &self.packet;
        finite(
            "packet",
            &[
                p.x0,
                p.k0,
                p.c_minus[0],
                p.c_minus[1],
                p.c_plus[0],
                p.c_plus[1],
            ],
        )?;
        positive("packet.sigma", p.sigma)?;
        if p.sigma < 4.0 * g.dx() {
            return Err(invalid(
                "packet.sigma",
                format!("below 4·dx = {}", 4.0 * g.dx()),
            ));
        }
        let weight: f64 = p.c_minus.iter().chain(&p.c_plus).map(|v| v * v).sum();
        if (weight - 1.0).abs() > 1e-12 {
            return Err(invalid(
                "packet.c_minus",
                format!("|c₋|² + |c₊|² = {weight}, expected 1"),
            ));
        }
        let e = &self.evolve;
        positive("evolve.dt", e.dt)?;
        if e.dt > g.dx() * (1.0 + 1e-12) {
            return Err(invalid("evolve.dt", format!("exceeds dx = {}", g.dx())));
        }
        if e.steps == 0 {
            return Err(invalid("evolve.steps", "must be at least 1"));
        }
        if e.record_every == 0 {
            return Err(invalid("evolve.record_every", "must be at least 1"));
        }
        let f = &self.fields;
        if !(f.mass >= 0.0 && f.mass.is_finite()) {
            return Err(invalid("fields.mass", "must be non-negative and finite"));
        }
        if let Some(v) = &f.vector {
            finite("fields.vector", &[v.e_field, v.amplitude, v.k, v.omega])?;
        }
        if let Some(y) = &f.yukawa {
            finite("fields.yukawa", &[y.re, y.im, y.amplitude, y.k, y.omega])?;
            if y.amplitude.abs() >= 1.0 {
                return Err(invalid("fields.yukawa.amplitude", "must satisfy |a| < 1"));
            }
        }
        match self.scenario {
            Scenario::EmField if f.vector.is_none() => {
                return Err(invalid("fields.vector", "required by scenario em_field"))
            }
            Scenario::YukawaField if f.yukawa.is_none() => {
                return Err(invalid(
                    "fields.yukawa",
                    "required by scenario yukawa_field",
                ))
            }
            Scenario::PositiveEnergy if f.vector.is_some() || f.yukawa.is_some() => {
                return Err(invalid(
                    "fields",
                    "positive_energy runs without external fields",
                ))
            }
            _ => {}
        }
        // packet plus light-speed spread must stay clear of the seam
        let t_max = e.dt * e.steps as f64;
        let need = p.x0.abs() + 5.0 * p.sigma + t_max;
        if need > 0.5 * g.length() {
            return Err(invalid(
                "grid.L",
                format!(
                    "L/2 = {} is below |x0| + 5σ + t_max = {need}",
                    0.5 * g.length()
                ),
            ));
        }
        let v = &self.verify;
        if v.enabled {
            positive("verify.tol", v.tol)?;
            if v.sample_every == 0 {
                return Err(invalid("verify.sample_every", "must be at least 1"));
            }
            if v.sampling_nt < 2 || v.sampling_nx < 2 {
                return Err(invalid(
                    "verify.sampling_nt",
                    "membership sampling needs ≥ 2 nodes per axis",
                ));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::new(self.grid.length, self.grid.points).map_err(|e| {
            let key = if self.grid.points < 64 || !self.grid.points.is_power_of_two() {
                "grid.N"
            } else {
                "grid.L"
            };
            invalid(key, e.to_string())
        })
    }

    pub fn mass_term(&self) -> MassTerm {
        match &self.fields.yukawa {
            None => MassTerm::Mass(self.fields.mass),
            Some(y) => MassTerm::Yukawa(yukawa_field(y)),
        }
    }

    /// `|μ|` bound over space-time: `m`, or `|Φ₀|·(1 + |a|)`.
    pub fn coupling_bound(&self) -> f64 {
        match &self.fields.yukawa {
            None => self.fields.mass,
            Some(y) => Complex64::new(y.re, y.im).norm() * (1.0 + y.amplitude.abs()),
        }
    }

    /// Off-diagonal entry of the finite Dirac operator: `μ = i·m` or `Φ`.
    pub fn coupling_field(&self) -> ComplexField {
        match &self.fields.yukawa {
            None => ComplexField::constant(Complex64::new(0.0, self.fields.mass)),
            Some(y) => yukawa_field(y),
        }
    }

    pub fn potential(&self) -> Option<VectorPotential> {
        self.fields.vector.as_ref().map(|v| {
            let (e, a, k, w) = (v.e_field, v.amplitude, v.k, v.omega);
            VectorPotential::new(
                RealField::constant(0.0),
                RealField::from_fn(move |t, x| -e * t + a * (k * x - w * t).sin()),
            )
        })
    }

    pub fn decide_resolution(&self) -> Resolution {
        Resolution::new(self.decide.nt, self.decide.nx)
    }

    /// Zitterbewegung period `π/m` for the configured mass (or `|Φ₀|`).
    pub fn expected_period(&self) -> f64 {
        match &self.fields.yukawa {
            None => PI / self.fields.mass,
            Some(y) => PI / Complex64::new(y.re, y.im).norm(),
        }
    }
}

fn yukawa_field(y: &YukawaConfig) -> ComplexField {
    let base = Complex64::new(y.re, y.im);
    if y.amplitude == 0.0 {
        return ComplexField::constant(base);
    }
    let (a, k, w) = (y.amplitude, y.k, y.omega);
    ComplexField::from_fn(move |t, x| base * (1.0 + a * (k * x - w * t).sin()))
}
