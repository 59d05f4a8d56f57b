//! Scalar and vector fields on the 1+1D chart.
//!
//! Fields are cheap to clone (closures sit behind `Arc`) so that metrics,
//! cone elements and evolution configs can share them freely across threads.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::spacetime::Event;

type RealFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;
type ComplexFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Step used for central-difference gradients of closures without an
/// analytic gradient.
const FD_STEP: f64 = 1e-6;

/// A real scalar field `f(t, x)`.
#[derive(Clone)]
pub enum RealField {
    Constant(f64),
    Analytic {
        value: RealFn,
        gradient: Option<GradFn>,
    },
    Gridded(Arc<GridSamples>),
}

impl RealField {
    pub fn constant(v: f64) -> Self {
        RealField::Constant(v)
    }

    /// Field from a closure; gradients fall back to central differences.
    pub fn from_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        RealField::Analytic {
            value: Arc::new(f),
            gradient: None,
        }
    }

    /// Field with an exact gradient `(∂_t f, ∂_x f)`.
    pub fn with_gradient(
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        grad: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        RealField::Analytic {
            value: Arc::new(f),
            gradient: Some(Arc::new(grad)),
        }
    }

    /// The coordinate function `t`.
    pub fn time() -> Self {
        Self::with_gradient(|t, _| t, |_, _| (1.0, 0.0))
    }

    /// The coordinate function `x`.
    pub fn space() -> Self {
        Self::with_gradient(|_, x| x, |_, _| (0.0, 1.0))
    }

    /// `c + a·t + b·x`.
    pub fn affine(c: f64, a: f64, b: f64) -> Self {
        Self::with_gradient(move |t, x| c + a * t + b * x, move |_, _| (a, b))
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        match self {
            RealField::Constant(v) => *v,
            RealField::Analytic { value, .. } => value(t, x),
            RealField::Gridded(g) => g.interpolate(t, x),
        }
    }

    pub fn value_at(&self, e: Event) -> f64 {
        self.value(e.t, e.x)
    }

    /// `(∂_t f, ∂_x f)` at `e`, or `None` where the field carries no
    /// gradient information (outside the interior of a sampled grid).
    pub fn gradient_at(&self, e: Event) -> Option<(f64, f64)> {
        match self {
            RealField::Constant(_) => Some((0.0, 0.0)),
            RealField::Analytic {
                gradient: Some(g), ..
            } => Some(g(e.t, e.x)),
            RealField::Analytic { value, .. } => {
                let h = FD_STEP * (1.0 + e.t.abs().max(e.x.abs()));
                let dt = (value(e.t + h, e.x) - value(e.t - h, e.x)) / (2.0 * h);
                let dx = (value(e.t, e.x + h) - value(e.t, e.x - h)) / (2.0 * h);
                Some((dt, dx))
            }
            RealField::Gridded(g) => g.gradient(e.t, e.x),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            RealField::Constant(v) => Some(*v),
            _ => None,
        }
    }

    /// Pointwise product; constants fold.
    pub fn product(&self, other: &RealField) -> RealField {
        match (self, other) {
            (RealField::Constant(a), RealField::Constant(b)) => RealField::Constant(a * b),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                RealField::from_fn(move |t, x| a.value(t, x) * b.value(t, x))
            }
        }
    }
}

impl fmt::Debug for RealField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealField::Constant(v) => write!(f, "Constant({v})"),
            RealField::Analytic { gradient, .. } => {
                write!(f, "Analytic {{ exact_gradient: {} }}", gradient.is_some())
            }
            RealField::Gridded(g) => write!(f, "Gridded({}x{})", g.nt, g.nx),
        }
    }
}

/// Samples of a field on a regular `(t, x)` grid, row-major in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub t0: f64,
    pub dt: f64,
    pub nt: usize,
    pub x0: f64,
    pub dx: f64,
    pub nx: usize,
    pub values: Vec<f64>,
}

impl GridSamples {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.nx + j]
    }

    fn locate(&self, t: f64, x: f64) -> (usize, usize, f64, f64) {
        let u = ((t - self.t0) / self.dt).clamp(0.0, (self.nt - 1) as f64);
        let v = ((x - self.x0) / self.dx).clamp(0.0, (self.nx - 1) as f64);
        let i = (u.floor() as usize).min(self.nt - 2);
        let j = (v.floor() as usize).min(self.nx - 2);
        (i, j, u - i as f64, v - j as f64)
    }

    /// Bilinear interpolation; coordinates outside the grid are clamped.
    pub fn interpolate(&self, t: f64, x: f64) -> f64 {
        let (i, j, a, b) = self.locate(t, x);
        let f00 = self.at(i, j);
        let f01 = self.at(i, j + 1);
        let f10 = self.at(i + 1, j);
        let f11 = self.at(i + 1, j + 1);
        (1.0 - a) * ((1.0 - b) * f00 + b * f01) + a * ((1.0 - b) * f10 + b * f11)
    }

    fn nodal_gradient(&self, i: usize, j: usize) -> (f64, f64) {
        let gt = (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.dt);
        let gx = (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.dx);
        (gt, gx)
    }

    /// Central-difference gradient at interior nodes, bilinearly
    /// interpolated. Only defined on the hull of the interior nodes.
    pub fn gradient(&self, t: f64, x: f64) -> Option<(f64, f64)> {
        if self.nt < 3 || self.nx < 3 {
            return None;
        }
        let u = (t - self.t0) / self.dt;
        let v = (x - self.x0) / self.dx;
        let eps = 1e-9;
        let (umax, vmax) = ((self.nt - 2) as f64, (self.nx - 2) as f64);
        if !(u >= 1.0 - eps && u <= umax + eps && v >= 1.0 - eps && v <= vmax + eps) {
            return None;
        }
        let u = u.clamp(1.0, umax);
        let v = v.clamp(1.0, vmax);
        let i = (u.floor() as usize).min(self.nt - 2).max(1);
        let j = (v.floor() as usize).min(self.nx - 2).max(1);
        let (a, b) = (u - i as f64, v - j as f64);
        let i1 = (i + 1).min(self.nt - 2);
        let j1 = (j + 1).min(self.nx - 2);
        let g00 = self.nodal_gradient(i, j);
        let g01 = self.nodal_gradient(i, j1);
        let g10 = self.nodal_gradient(i1, j);
        let g11 = self.nodal_gradient(i1, j1);
        let mix = |p: f64, q: f64, r: f64, s: f64| {
            (1.0 - a) * ((1.0 - b) * p + b * q) + a * ((1.0 - b) * r + b * s)
        };
        Some((
            mix(g00.0, g01.0, g10.0, g11.0),
            mix(g00.1, g01.1, g10.1, g11.1),
        ))
    }
}

/// A complex scalar field, used for the mass entry `μ` / Yukawa field `Φ`.
#[derive(Clone)]
pub enum ComplexField {
    Constant(Complex64),
    Analytic(ComplexFn),
}

impl ComplexField {
    pub fn constant(z: Complex64) -> Self {
        ComplexField::Constant(z)
    }

    pub fn from_fn(f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        ComplexField::Analytic(Arc::new(f))
    }

    pub fn value(&self, t: f64, x: f64) -> Complex64 {
        match self {
            ComplexField::Constant(z) => *z,
            ComplexField::Analytic(f) => f(t, x),
        }
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        match self {
            ComplexField::Constant(z) => Some(*z),
            ComplexField::Analytic(_) => None,
        }
    }

    /// `|Φ|` as a real field.
    pub fn modulus(&self) -> RealField {
        match self {
            ComplexField::Constant(z) => RealField::Constant(z.norm()),
            ComplexField::Analytic(f) => {
                let f = f.clone();
                RealField::from_fn(move |t, x| f(t, x).norm())
            }
        }
    }
}

impl fmt::Debug for ComplexField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexField::Constant(z) => write!(f, "Constant({z})"),
            ComplexField::Analytic(_) => write!(f, "Analytic"),
        }
    }
}

/// Real covector potential `(A_t, A_x)`.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    pub a_t: RealField,
    pub a_x: RealField,
}

impl VectorPotential {
    pub fn new(a_t: RealField, a_x: RealField) -> Self {
        Self { a_t, a_x }
    }

    /// Pure gauge `A_μ = ∂_μ χ` from a gauge function and its gradient.
    pub fn pure_gauge(grad_chi: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static) -> Self {
        let g = Arc::new(grad_chi);
        let g2 = g.clone();
        Self {
            a_t: RealField::from_fn(move |t, x| g(t, x).0),
            a_x: RealField::from_fn(move |t, x| g2(t, x).1),
        }
    }

    pub fn at(&self, t: f64, x: f64) -> (f64, f64) {
        (self.a_t.value(t, x), self.a_x.value(t, x))
    }
}
