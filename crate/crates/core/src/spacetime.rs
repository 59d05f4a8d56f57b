//! Geometry kernel for 1+1D conformally flat spacetimes in natural units.
//!
//! The causal order of `g = Ω²·diag(+1, −1)` is the flat order for every
//! positive `Ω`, so [`is_future_causal`] never consults the conformal
//! factor. Lengths do: proper time picks up `Ω` at segment midpoints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::causality;
use crate::field::RealField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacetimeError {
    #[error("event ({t}, {x}) has non-finite coordinates")]
    NonFinite { t: f64, x: f64 },
    #[error("curve vertex {index} does not strictly advance in time")]
    NotTimeOrdered { index: usize },
    #[error("curve segment {index} is spacelike")]
    Spacelike { index: usize },
    #[error("lattice needs at least 2 nodes per axis, got {nt}x{nx}")]
    TooFewNodes { nt: usize, nx: usize },
    #[error("lattice spacing dx = {dx} exceeds dt = {dt}; the stencil would only contain vertical edges")]
    CoarseSpace { dt: f64, dx: f64 },
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("resolution gives {steps} lattice step(s) between the endpoints, need at least 2")]
    DegenerateResolution { steps: usize },
    #[error("event ({t}, {x}) lies outside the working region")]
    OutsideRegion { t: f64, x: f64 },
}

/// A point `(t, x)` of the chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub x: f64,
}

impl Event {
    pub const fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    pub fn checked(t: f64, x: f64) -> Result<Self, SpacetimeError> {
        if t.is_finite() && x.is_finite() {
            Ok(Self { t, x })
        } else {
            Err(SpacetimeError::NonFinite { t, x })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite()
    }

    pub fn midpoint(&self, other: &Event) -> Event {
        Event::new(0.5 * (self.t + other.t), 0.5 * (self.x + other.x))
    }
}

/// The metric family: Minkowski, or a positive conformal factor times it.
#[derive(Debug, Clone)]
pub enum MetricModel {
    Minkowski,
    ConformallyFlat { omega: RealField },
}

impl MetricModel {
    pub fn conformally_flat(omega: RealField) -> Self {
        MetricModel::ConformallyFlat { omega }
    }

    /// `Ω(t, x)`; identically 1 for Minkowski.
    pub fn omega(&self, e: Event) -> f64 {
        match self {
            MetricModel::Minkowski => 1.0,
            MetricModel::ConformallyFlat { omega } => omega.value_at(e),
        }
    }

    pub fn omega_field(&self) -> RealField {
        match self {
            MetricModel::Minkowski => RealField::Constant(1.0),
            MetricModel::ConformallyFlat { omega } => omega.clone(),
        }
    }

    pub fn is_minkowski(&self) -> bool {
        matches!(self, MetricModel::Minkowski)
    }
}

/// `p ⪯ q`: `q` lies in the closed causal future of `p`.
pub fn is_future_causal(p: Event, q: Event, _metric: &MetricModel) -> bool {
    q.t - p.t >= (q.x - p.x).abs()
}

/// Flat interval `√(Δt² − Δx²)` of a causal displacement, clamped at 0.
pub(crate) fn flat_interval(p: Event, q: Event) -> f64 {
    let dt = q.t - p.t;
    let dx = q.x - p.x;
    (dt * dt - dx * dx).max(0.0).sqrt()
}

/// A time-ordered causal polyline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CausalCurve {
    vertices: Vec<Event>,
}

impl CausalCurve {
    pub fn new(vertices: Vec<Event>) -> Result<Self, SpacetimeError> {
        for v in &vertices {
            if !v.is_finite() {
                return Err(SpacetimeError::NonFinite { t: v.t, x: v.x });
            }
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(SpacetimeError::NotTimeOrdered { index: i + 1 });
            }
            if w[1].t - w[0].t < (w[1].x - w[0].x).abs() {
                return Err(SpacetimeError::Spacelike { index: i });
            }
        }
        Ok(Self { vertices })
    }

    pub fn empty() -> Self {
        Self {
            vertices: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Event] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn start(&self) -> Option<Event> {
        self.vertices.first().copied()
    }

    pub fn end(&self) -> Option<Event> {
        self.vertices.last().copied()
    }

    /// Joins `other` onto the end of `self`; the shared endpoint must match.
    pub fn concat(&self, other: &CausalCurve) -> Result<CausalCurve, SpacetimeError> {
        let mut v = self.vertices.clone();
        match (self.end(), other.start()) {
            (Some(a), Some(b)) if a == b => v.extend_from_slice(&other.vertices[1..]),
            _ => v.extend_from_slice(&other.vertices),
        }
        CausalCurve::new(v)
    }

    /// Polyline as CSV with columns `t,x`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> csv::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["t", "x"])?;
        for v in &self.vertices {
            wr.write_record([v.t.to_string(), v.x.to_string()])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Σ over segments of `Ω(midpoint)·√(Δt² − Δx²)`.
pub fn proper_time(curve: &CausalCurve, metric: &MetricModel) -> f64 {
    curve
        .vertices
        .windows(2)
        .map(|w| metric.omega(w[0].midpoint(&w[1])) * flat_interval(w[0], w[1]))
        .sum()
}

/// Lorentzian distance: the supremum of proper time over causal curves
/// from `p` to `q`, zero when `q` is not in the causal future of `p`.
///
/// Minkowski uses the closed form; conformally flat metrics go through the
/// lattice optimizer on the bounding box of the causal diamond.
pub fn lorentzian_distance(
    p: Event,
    q: Event,
    metric: &MetricModel,
    res: Resolution,
) -> Result<f64, SpacetimeError> {
    if !p.is_finite() {
        return Err(SpacetimeError::NonFinite { t: p.t, x: p.x });
    }
    if !q.is_finite() {
        return Err(SpacetimeError::NonFinite { t: q.t, x: q.x });
    }
    if !is_future_causal(p, q, metric) || p == q {
        return Ok(0.0);
    }
    match metric {
        MetricModel::Minkowski => Ok(flat_interval(p, q)),
        MetricModel::ConformallyFlat { .. } => {
            if res.nt < 3 {
                return Err(SpacetimeError::DegenerateResolution {
                    steps: res.nt.saturating_sub(1),
                });
            }
            let region = Region::diamond_hull(p, q);
            let out =
                causality::weighted_time_sup(p, q, metric, &RealField::Constant(1.0), &region, res)
                    .map_err(|e| match e {
                        causality::CausalityError::Spacetime(s) => s,
                        other => SpacetimeError::InvalidRegion(other.to_string()),
                    })?;
            Ok(out.value)
        }
    }
}

/// Closed rectangle `[t_min, t_max] × [x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub t_min: f64,
    pub t_max: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Region {
    pub fn new(t_min: f64, t_max: f64, x_min: f64, x_max: f64) -> Result<Self, SpacetimeError> {
        let r = Self {
            t_min,
            t_max,
            x_min,
            x_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), SpacetimeError> {
        let all = [self.t_min, self.t_max, self.x_min, self.x_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SpacetimeError::InvalidRegion("non-finite bound".into()));
        }
        if self.t_max < self.t_min || self.x_max < self.x_min {
            return Err(SpacetimeError::InvalidRegion(format!(
                "bounds out of order: t [{}, {}], x [{}, {}]",
                self.t_min, self.t_max, self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    /// Bounding box of the causal diamond `J⁺(p) ∩ J⁻(q)`.
    pub fn diamond_hull(p: Event, q: Event) -> Self {
        let span = q.t - p.t;
        let mid = 0.5 * (p.x + q.x);
        Self {
            t_min: p.t,
            t_max: q.t,
            x_min: mid - 0.5 * span,
            x_max: mid + 0.5 * span,
        }
    }

    pub fn contains(&self, e: Event) -> bool {
        let tol = 1e-12 * (1.0 + self.t_max.abs().max(self.x_max.abs()));
        e.t >= self.t_min - tol
            && e.t <= self.t_max + tol
            && e.x >= self.x_min - tol
            && e.x <= self.x_max + tol
    }

    pub fn is_empty(&self) -> bool {
        self.t_max <= self.t_min || self.x_max <= self.x_min
    }

    /// Regular sampling with `res.nt × res.nx` points including the edges.
    pub fn sample(&self, res: Resolution) -> Vec<Event> {
        let step = |lo: f64, hi: f64, n: usize, i: usize| {
            if n <= 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(res.nt * res.nx);
        for i in 0..res.nt {
            for j in 0..res.nx {
                out.push(Event::new(
                    step(self.t_min, self.t_max, res.nt, i),
                    step(self.x_min, self.x_max, res.nx, j),
                ));
            }
        }
        out
    }
}

/// Node counts along `t` and `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub nt: usize,
    pub nx: usize,
}

impl Resolution {
    pub const fn new(nt: usize, nx: usize) -> Self {
        Self { nt, nx }
    }
}

/// Index of a lattice node: time layer and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeNode {
    pub layer: usize,
    pub column: usize,
}

/// Regular causal lattice. Edges join each node to the nodes of the next
/// layer whose spatial offset does not exceed one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalLattice {
    t0: f64,
    dt: f64,
    layers: usize,
    x0: f64,
    dx: f64,
    columns: usize,
    reach: usize,
}

/// Largest `r` with `r·dx ≤ dt` up to relative round-off.
fn stencil_reach(dt: f64, dx: f64) -> usize {
    let mut r = (dt / dx).floor() as usize;
    while (r + 1) as f64 * dx <= dt * (1.0 + 1e-12) {
        r += 1;
    }
    while r > 0 && r as f64 * dx > dt * (1.0 + 1e-12) {
        r -= 1;
    }
    r
}

impl CausalLattice {
    pub(crate) fn from_parts(
        t0: f64,
        dt: f64,
        layers: usize,
        x0: f64,
        dx: f64,
        columns: usize,
    ) -> Result<Self, SpacetimeError> {
        if dx > dt * (1.0 + 1e-12) && columns > 1 {
            return Err(SpacetimeError::CoarseSpace { dt, dx });
        }
        Ok(Self {
            t0,
            dt,
            layers,
            x0,
            dx,
            columns,
            reach: stencil_reach(dt, dx),
        })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Maximum column offset of an edge.
    pub fn reach(&self) -> usize {
        self.reach
    }

    pub fn node_count(&self) -> usize {
        self.layers * self.columns
    }

    pub fn event(&self, n: LatticeNode) -> Event {
        Event::new(
            self.t0 + n.layer as f64 * self.dt,
            self.x0 + n.column as f64 * self.dx,
        )
    }

    /// Nodes layer by layer: a topological order of the edge relation.
    pub fn nodes(&self) -> impl Iterator<Item = LatticeNode> + '_ {
        (0..self.layers).flat_map(move |layer| {
            (0..self.columns).map(move |column| LatticeNode { layer, column })
        })
    }

    pub fn successors(&self, n: LatticeNode) -> impl Iterator<Item = LatticeNode> + '_ {
        let next = n.layer + 1;
        let lo = n.column.saturating_sub(self.reach);
        let hi = (n.column + self.reach).min(self.columns.saturating_sub(1));
        let range = if next < self.layers { lo..hi + 1 } else { 0..0 };
        range.map(move |column| LatticeNode {
            layer: next,
            column,
        })
    }

    pub fn edges(&self) -> Vec<(LatticeNode, LatticeNode)> {
        self.nodes()
            .flat_map(|u| self.successors(u).map(move |v| (u, v)))
            .collect()
    }

    /// Node nearest to `e`, if `e` lies on the lattice hull.
    pub fn node_near(&self, e: Event) -> Option<LatticeNode> {
        let layer = ((e.t - self.t0) / self.dt).round();
        let column = if self.columns == 1 {
            0.0
        } else {
            ((e.x - self.x0) / self.dx).round()
        };
        if layer < 0.0 || column < 0.0 {
            return None;
        }
        let (layer, column) = (layer as usize, column as usize);
        (layer < self.layers && column < self.columns).then_some(LatticeNode { layer, column })
    }

    /// Lattice adapted to a pair of events: both `p` and `q` are nodes, the
    /// time step divides `q.t − p.t`, and columns are clipped to the region
    /// and the causal diamond. Nominal spacings come from `region` and `res`.
    pub fn spanning(
        p: Event,
        q: Event,
        region: &Region,
        res: Resolution,
    ) -> Result<(Self, LatticeNode, LatticeNode), SpacetimeError> {
        region.validate()?;
        if res.nt < 2 || res.nx < 2 {
            return Err(SpacetimeError::TooFewNodes {
                nt: res.nt,
                nx: res.nx,
            });
        }
        for e in [p, q] {
            if !e.is_finite() {
                return Err(SpacetimeError::NonFinite { t: e.t, x: e.x });
            }
            if !region.contains(e) {
                return Err(SpacetimeError::OutsideRegion { t: e.t, x: e.x });
            }
        }
        let span_t = q.t - p.t;
        if span_t <= 0.0 {
            return Err(SpacetimeError::DegenerateResolution { steps: 0 });
        }
        let dt_nominal = if region.t_max > region.t_min {
            (region.t_max - region.t_min) / (res.nt - 1) as f64
        } else {
            span_t / (res.nt - 1) as f64
        };
        let steps = ((span_t / dt_nominal).round() as usize).max(1);
        let dt = span_t / steps as f64;

        let dx_nominal = if region.x_max > region.x_min {
            (region.x_max - region.x_min) / (res.nx - 1) as f64
        } else {
            dt
        };
        let dx0 = dx_nominal.min(dt);
        let shift = q.x - p.x;
        let (dx, offset) = if shift == 0.0 {
            (dx0, 0i64)
        } else {
            let k = ((shift.abs() / dx0) - 1e-9).ceil().max(1.0);
            (shift.abs() / k, shift.signum() as i64 * k as i64)
        };

        let hull = Region::diamond_hull(p, q);
        let left = region.x_min.max(hull.x_min);
        let right = region.x_max.min(hull.x_max);
        let j_left = ((p.x - left) / dx + 1e-9).floor().max(0.0) as usize;
        let j_right = ((right - p.x) / dx + 1e-9).floor().max(0.0) as usize;
        let columns = j_left + j_right + 1;
        let x0 = p.x - j_left as f64 * dx;
        let lattice = Self::from_parts(p.t, dt, steps + 1, x0, dx, columns)?;
        let from = LatticeNode {
            layer: 0,
            column: j_left,
        };
        let to_col = j_left as i64 + offset;
        let to = LatticeNode {
            layer: steps,
            column: to_col.clamp(0, columns as i64 - 1) as usize,
        };
        Ok((lattice, from, to))
    }
}

/// Regular causal lattice over `region` with `res.nt × res.nx` nodes.
pub fn causal_lattice(region: &Region, res: Resolution) -> Result<CausalLattice, SpacetimeError> {
    region.validate()?;
    if res.nt < 2 || res.nx < 2 {
        return Err(SpacetimeError::TooFewNodes {
            nt: res.nt,
            nx: res.nx,
        });
    }
    if region.is_empty() {
        return Err(SpacetimeError::InvalidRegion("zero-area region".into()));
    }
    let dt = (region.t_max - region.t_min) / (res.nt - 1) as f64;
    let dx = (region.x_max - region.x_min) / (res.nx - 1) as f64;
    CausalLattice::from_parts(region.t_min, dt, res.nt, region.x_min, dx, res.nx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, x: f64) -> Event {
        Event::new(t, x)
    }

    #[test]
    fn causal_relation_examples() {
        let flat = MetricModel::Minkowski;
        assert!(is_future_causal(ev(0.0, 0.0), ev(1.0, 0.0), &flat));
        assert!(!is_future_causal(ev(0.0, 0.0), ev(1.0, 2.0), &flat));
        let wavy = MetricModel::conformally_flat(RealField::from_fn(|_, x| 1.0 + 0.1 * x.sin()));
        assert!(is_future_causal(ev(0.0, 0.0), ev(1.0, 1.0), &wavy));
    }

    #[test]
    fn proper_time_examples() {
        let flat = MetricModel::Minkowski;
        let c = CausalCurve::new(vec![ev(0.0, 0.0), ev(2.0, 0.0)]).unwrap();
        assert_eq!(proper_time(&c, &flat), 2.0);
        let c = CausalCurve::new(vec![ev(0.0, 0.0), ev(2.0, 1.0)]).unwrap();
        assert!((proper_time(&c, &flat) - 3f64.sqrt()).abs() < 1e-15);
        let c = CausalCurve::new(vec![ev(0.0, 0.0), ev(1.0, 1.0), ev(2.0, 0.0)]).unwrap();
        assert_eq!(proper_time(&c, &flat), 0.0);
    }

    #[test]
    fn curve_invariants_are_enforced() {
        assert_eq!(
            CausalCurve::new(vec![ev(0.0, 0.0), ev(0.0, 0.0)]),
            Err(SpacetimeError::NotTimeOrdered { index: 1 })
        );
        assert_eq!(
            CausalCurve::new(vec![ev(0.0, 0.0), ev(1.0, 0.5), ev(1.5, 2.0)]),
            Err(SpacetimeError::Spacelike { index: 1 })
        );
        assert!(matches!(
            CausalCurve::new(vec![ev(f64::NAN, 0.0)]),
            Err(SpacetimeError::NonFinite { .. })
        ));
    }

    #[test]
    fn proper_time_is_additive_under_concatenation() {
        let m = MetricModel::conformally_flat(RealField::from_fn(|t, x| 1.5 + 0.3 * (t - x).cos()));
        let a = CausalCurve::new(vec![ev(0.0, 0.0), ev(0.7, 0.2), ev(1.1, 0.1)]).unwrap();
        let b = CausalCurve::new(vec![ev(1.1, 0.1), ev(2.0, -0.4)]).unwrap();
        let ab = a.concat(&b).unwrap();
        let sum = proper_time(&a, &m) + proper_time(&b, &m);
        assert!((proper_time(&ab, &m) - sum).abs() < 1e-14);
    }

    #[test]
    fn lorentzian_distance_examples() {
        let res = Resolution::new(41, 41);
        let flat = MetricModel::Minkowski;
        assert_eq!(
            lorentzian_distance(ev(0.0, 0.0), ev(5.0, 3.0), &flat, res).unwrap(),
            4.0
        );
        assert_eq!(
            lorentzian_distance(ev(0.0, 0.0), ev(1.0, 2.0), &flat, res).unwrap(),
            0.0
        );
        let doubled = MetricModel::conformally_flat(RealField::constant(2.0));
        let d = lorentzian_distance(ev(0.0, 0.0), ev(2.0, 0.0), &doubled, res).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_distance_rejects_degenerate_resolution() {
        let m = MetricModel::conformally_flat(RealField::constant(1.5));
        let err = lorentzian_distance(ev(0.0, 0.0), ev(1.0, 0.0), &m, Resolution::new(2, 10));
        assert_eq!(err, Err(SpacetimeError::DegenerateResolution { steps: 1 }));
    }

    #[test]
    fn smallest_lattice() {
        let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let l = causal_lattice(&r, Resolution::new(2, 2)).unwrap();
        assert_eq!(l.node_count(), 4);
        let edges = l.edges();
        assert!(!edges.is_empty());
        for (u, v) in edges {
            assert_eq!(v.layer, u.layer + 1);
        }
    }

    #[test]
    fn interior_nodes_have_three_successors() {
        let r = Region::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let l = causal_lattice(&r, Resolution::new(3, 5)).unwrap();
        assert_eq!((l.dt(), l.dx()), (0.5, 0.5));
        for n in l.nodes() {
            let interior = n.layer + 1 < l.layers() && n.column > 0 && n.column + 1 < l.columns();
            if interior {
                assert_eq!(l.successors(n).count(), 3);
            }
        }
    }

    #[test]
    fn lattice_rejects_coarse_space() {
        let r = Region::new(0.0, 1.0, 0.0, 4.0).unwrap();
        assert!(matches!(
            causal_lattice(&r, Resolution::new(5, 3)),
            Err(SpacetimeError::CoarseSpace { .. })
        ));
    }

    #[test]
    fn spanning_lattice_places_both_endpoints_on_nodes() {
        let r = Region::new(0.0, 5.0, -1.0, 4.0).unwrap();
        let (p, q) = (ev(0.0, 0.0), ev(5.0, 3.0));
        let (l, from, to) = CausalLattice::spanning(p, q, &r, Resolution::new(21, 21)).unwrap();
        assert_eq!(l.event(from), p);
        let e = l.event(to);
        assert!((e.t - q.t).abs() < 1e-12 && (e.x - q.x).abs() < 1e-12);
    }
}
