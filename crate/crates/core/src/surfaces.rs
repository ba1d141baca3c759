//! Boundary surfaces and derivative fields over the unit parameter square.
//!
//! A block face is described either analytically (plane, bilinear patch,
//! graph of a height function) or by a discrete point grid evaluated with
//! bilinear interpolation. Every surface carries an orientation: the
//! reference axis it holds fixed. The two remaining axes, in canonical
//! (xi, eta, kappa) order, serve as its (u, v) parameters.
//!
//! Derivative fields are the same kind of object valued as direction
//! vectors; they supply endpoint slopes for Hermite blending.

use crate::math::{Axis, RefPoint, Vec3};
use thiserror::Error;

/// Number of samples used by [`edges_conform`] along each edge.
pub const CONFORMITY_SAMPLES: usize = 33;

#[derive(Debug, Error)]
pub enum SurfaceError {
    #[error("parameter {name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
    #[error("discrete grid needs at least 2x2 points, got {rows}x{cols}")]
    GridTooSmall { rows: usize, cols: usize },
    #[error("discrete grid row {row} has {got} points, expected {expected}")]
    RaggedGrid { row: usize, got: usize, expected: usize },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
}

fn check_param(name: &'static str, value: f64) -> Result<(), SurfaceError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SurfaceError::Domain { name, value })
    }
}

/// Scalar height function for graph surfaces.
#[derive(Clone, Debug)]
pub enum HeightFn {
    /// f(x, y) = sum over i, j of coeffs[i][j] * x^i * y^j.
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// f(x, y) = base + sum over terms of
    /// amplitude * sin(freq_x * x + phase_x) * sin(freq_y * y + phase_y).
    Sinusoidal { base: f64, terms: Vec<SinTerm> },
}

#[derive(Clone, Copy, Debug)]
pub struct SinTerm {
    pub amplitude: f64,
    pub freq_x: f64,
    pub freq_y: f64,
    pub phase_x: f64,
    pub phase_y: f64,
}

impl HeightFn {
    pub fn constant(c: f64) -> Self {
        HeightFn::Polynomial { coeffs: vec![vec![c]] }
    }

    fn is_finite(&self) -> bool {
        match self {
            HeightFn::Polynomial { coeffs } => {
                coeffs.iter().all(|row| row.iter().all(|c| c.is_finite()))
            }
            HeightFn::Sinusoidal { base, terms } => {
                base.is_finite()
                    && terms.iter().all(|t| {
                        t.amplitude.is_finite()
                            && t.freq_x.is_finite()
                            && t.freq_y.is_finite()
                            && t.phase_x.is_finite()
                            && t.phase_y.is_finite()
                    })
            }
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        match self {
            HeightFn::Polynomial { coeffs } => {
                let mut acc = 0.0;
                let mut xp = 1.0;
                for row in coeffs {
                    let mut yp = 1.0;
                    for c in row {
                        acc += c * xp * yp;
                        yp *= y;
                    }
                    xp *= x;
                }
                acc
            }
            HeightFn::Sinusoidal { base, terms } => {
                let mut acc = *base;
                for t in terms {
                    acc += t.amplitude
                        * (t.freq_x * x + t.phase_x).sin()
                        * (t.freq_y * y + t.phase_y).sin();
                }
                acc
            }
        }
    }

    pub fn dx(&self, x: f64, y: f64) -> f64 {
        match self {
            HeightFn::Polynomial { coeffs } => {
                let mut acc = 0.0;
                let mut xp = 1.0;
                for (i, row) in coeffs.iter().enumerate() {
                    if i >= 1 {
                        let mut yp = 1.0;
                        for c in row {
                            acc += c * (i as f64) * xp * yp;
                            yp *= y;
                        }
                    }
                    if i >= 1 {
                        xp *= x;
                    }
                }
                acc
            }
            HeightFn::Sinusoidal { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.amplitude
                        * t.freq_x
                        * (t.freq_x * x + t.phase_x).cos()
                        * (t.freq_y * y + t.phase_y).sin();
                }
                acc
            }
        }
    }

    pub fn dy(&self, x: f64, y: f64) -> f64 {
        match self {
            HeightFn::Polynomial { coeffs } => {
                let mut acc = 0.0;
                let mut xp = 1.0;
                for row in coeffs {
                    let mut yp = 1.0;
                    for (j, c) in row.iter().enumerate() {
                        if j >= 1 {
                            acc += c * (j as f64) * xp * yp;
                            yp *= y;
                        }
                    }
                    xp *= x;
                }
                acc
            }
            HeightFn::Sinusoidal { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.amplitude
                        * t.freq_y
                        * (t.freq_x * x + t.phase_x).sin()
                        * (t.freq_y * y + t.phase_y).cos();
                }
                acc
            }
        }
    }

    pub fn dxy(&self, x: f64, y: f64) -> f64 {
        match self {
            HeightFn::Polynomial { coeffs } => {
                let mut acc = 0.0;
                let mut xp = 1.0;
                for (i, row) in coeffs.iter().enumerate() {
                    if i >= 1 {
                        let mut yp = 1.0;
                        for (j, c) in row.iter().enumerate() {
                            if j >= 1 {
                                acc += c * (i as f64) * (j as f64) * xp * yp;
                                yp *= y;
                            }
                        }
                        xp *= x;
                    }
                }
                acc
            }
            HeightFn::Sinusoidal { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    acc += t.amplitude
                        * t.freq_x
                        * t.freq_y
                        * (t.freq_x * x + t.phase_x).cos()
                        * (t.freq_y * y + t.phase_y).cos();
                }
                acc
            }
        }
    }
}

/// Rectangular point grid; rows index u, columns index v.
#[derive(Clone, Debug)]
pub struct GridData {
    points: Vec<Vec3>,
    rows: usize,
    cols: usize,
}

// Cell-local coordinates this close to a grid line snap onto it, so that
// evaluation at the stored parameter values reproduces stored points exactly.
const GRID_SNAP: f64 = 1e-12;

impl GridData {
    pub fn new(rows: Vec<Vec<Vec3>>) -> Result<Self, SurfaceError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if r < 2 || c < 2 {
            return Err(SurfaceError::GridTooSmall { rows: r, cols: c });
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(SurfaceError::RaggedGrid { row: i, got: row.len(), expected: c });
            }
        }
        let points: Vec<Vec3> = rows.into_iter().flatten().collect();
        if !points.iter().all(|p| p.is_finite()) {
            return Err(SurfaceError::NonFinite { what: "discrete grid point" });
        }
        Ok(GridData { points, rows: r, cols: c })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> Vec3 {
        self.points[i * self.cols + j]
    }

    /// Maps a parameter in [0, 1] to (cell index, local coordinate) over
    /// `cells` cells, snapping onto grid lines within GRID_SNAP.
    fn locate(t: f64, cells: usize) -> (usize, f64) {
        let scaled = t * cells as f64;
        let mut i = scaled.floor() as usize;
        if i >= cells {
            i = cells - 1;
        }
        let mut s = scaled - i as f64;
        if s < GRID_SNAP {
            s = 0.0;
        } else if s > 1.0 - GRID_SNAP {
            s = 1.0;
        }
        (i, s)
    }

    fn value(&self, u: f64, v: f64) -> Vec3 {
        let (i, s) = Self::locate(u, self.rows - 1);
        let (j, t) = Self::locate(v, self.cols - 1);
        let a = self.at(i, j) * (1.0 - s) + self.at(i + 1, j) * s;
        let b = self.at(i, j + 1) * (1.0 - s) + self.at(i + 1, j + 1) * s;
        a * (1.0 - t) + b * t
    }

    fn du(&self, u: f64, v: f64) -> Vec3 {
        let (i, _) = Self::locate(u, self.rows - 1);
        let (j, t) = Self::locate(v, self.cols - 1);
        let m = (self.rows - 1) as f64;
        let low = self.at(i + 1, j) - self.at(i, j);
        let high = self.at(i + 1, j + 1) - self.at(i, j + 1);
        (low * (1.0 - t) + high * t) * m
    }

    fn dv(&self, u: f64, v: f64) -> Vec3 {
        let (i, s) = Self::locate(u, self.rows - 1);
        let (j, _) = Self::locate(v, self.cols - 1);
        let n = (self.cols - 1) as f64;
        let low = self.at(i, j + 1) - self.at(i, j);
        let high = self.at(i + 1, j + 1) - self.at(i + 1, j);
        (low * (1.0 - s) + high * s) * n
    }

    fn duv(&self, u: f64, v: f64) -> Vec3 {
        let (i, _) = Self::locate(u, self.rows - 1);
        let (j, _) = Self::locate(v, self.cols - 1);
        let m = (self.rows - 1) as f64;
        let n = (self.cols - 1) as f64;
        (self.at(i + 1, j + 1) - self.at(i + 1, j) - self.at(i, j + 1) + self.at(i, j)) * (m * n)
    }
}

/// Shared evaluation core for surfaces and derivative fields.
#[derive(Clone, Debug)]
pub(crate) enum Patch {
    Plane { origin: Vec3, u_axis: Vec3, v_axis: Vec3 },
    /// Corners in the order p00, p10, p01, p11 (u varies first).
    Bilinear { corners: [Vec3; 4] },
    /// (x(u), y(v), f(x, y)) with x, y affine over the given ranges.
    Graph { x0: f64, x1: f64, y0: f64, y1: f64, height: HeightFn },
    /// Constant vector value; derivative fields only.
    Constant { value: Vec3 },
    /// (0, 0, f(x(u), y(v))); derivative fields only.
    Vertical { x0: f64, x1: f64, y0: f64, y1: f64, height: HeightFn },
    Discrete { grid: GridData },
}

impl Patch {
    pub(crate) fn value(&self, u: f64, v: f64) -> Vec3 {
        match self {
            Patch::Plane { origin, u_axis, v_axis } => *origin + *u_axis * u + *v_axis * v,
            Patch::Bilinear { corners } => {
                corners[0] * ((1.0 - u) * (1.0 - v))
                    + corners[1] * (u * (1.0 - v))
                    + corners[2] * ((1.0 - u) * v)
                    + corners[3] * (u * v)
            }
            Patch::Graph { x0, x1, y0, y1, height } => {
                let x = x0 + (x1 - x0) * u;
                let y = y0 + (y1 - y0) * v;
                Vec3::new(x, y, height.value(x, y))
            }
            Patch::Constant { value } => *value,
            Patch::Vertical { x0, x1, y0, y1, height } => {
                let x = x0 + (x1 - x0) * u;
                let y = y0 + (y1 - y0) * v;
                Vec3::new(0.0, 0.0, height.value(x, y))
            }
            Patch::Discrete { grid } => grid.value(u, v),
        }
    }

    pub(crate) fn du(&self, u: f64, v: f64) -> Vec3 {
        match self {
            Patch::Plane { u_axis, .. } => *u_axis,
            Patch::Bilinear { corners } => {
                (corners[1] - corners[0]) * (1.0 - v) + (corners[3] - corners[2]) * v
            }
            Patch::Graph { x0, x1, y0, y1, height } => {
                let dx = x1 - x0;
                let x = x0 + dx * u;
                let y = y0 + (y1 - y0) * v;
                Vec3::new(dx, 0.0, height.dx(x, y) * dx)
            }
            Patch::Constant { .. } => Vec3::ZERO,
            Patch::Vertical { x0, x1, y0, y1, height } => {
                let dx = x1 - x0;
                let x = x0 + dx * u;
                let y = y0 + (y1 - y0) * v;
                Vec3::new(0.0, 0.0, height.dx(x, y) * dx)
            }
            Patch::Discrete { grid } => grid.du(u, v),
        }
    }

    pub(crate) fn dv(&self, u: f64, v: f64) -> Vec3 {
        match self {
            Patch::Plane { v_axis, .. } => *v_axis,
            Patch::Bilinear { corners } => {
                (corners[2] - corners[0]) * (1.0 - u) + (corners[3] - corners[1]) * u
            }
            Patch::Graph { x0, x1, y0, y1, height } => {
                let dy = y1 - y0;
                let x = x0 + (x1 - x0) * u;
                let y = y0 + dy * v;
                Vec3::new(0.0, dy, height.dy(x, y) * dy)
            }
            Patch::Constant { .. } => Vec3::ZERO,
            Patch::Vertical { x0, x1, y0, y1, height } => {
                let dy = y1 - y0;
                let x = x0 + (x1 - x0) * u;
                let y = y0 + dy * v;
                Vec3::new(0.0, 0.0, height.dy(x, y) * dy)
            }
            Patch::Discrete { grid } => grid.dv(u, v),
        }
    }

    /// Mixed second derivative d2/du dv; exact for every patch kind.
    pub(crate) fn duv(&self, u: f64, v: f64) -> Vec3 {
        match self {
            Patch::Plane { .. } => Vec3::ZERO,
            Patch::Bilinear { corners } => corners[3] - corners[1] - corners[2] + corners[0],
            Patch::Graph { x0, x1, y0, y1, height } => {
                let dx = x1 - x0;
                let dy = y1 - y0;
                let x = x0 + dx * u;
                let y = y0 + dy * v;
                Vec3::new(0.0, 0.0, height.dxy(x, y) * dx * dy)
            }
            Patch::Constant { .. } => Vec3::ZERO,
            Patch::Vertical { x0, x1, y0, y1, height } => {
                let dx = x1 - x0;
                let dy = y1 - y0;
                let x = x0 + dx * u;
                let y = y0 + dy * v;
                Vec3::new(0.0, 0.0, height.dxy(x, y) * dx * dy)
            }
            Patch::Discrete { grid } => grid.duv(u, v),
        }
    }
}

fn check_graph_args(
    x_range: (f64, f64),
    y_range: (f64, f64),
    height: &HeightFn,
) -> Result<(), SurfaceError> {
    if !(x_range.0.is_finite() && x_range.1.is_finite() && y_range.0.is_finite() && y_range.1.is_finite()) {
        return Err(SurfaceError::NonFinite { what: "graph parameter range" });
    }
    if !height.is_finite() {
        return Err(SurfaceError::NonFinite { what: "height function coefficient" });
    }
    Ok(())
}

/// Direction of a surface partial derivative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamDir {
    U,
    V,
}

/// One boundary edge of the unit parameter square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceEdge {
    UMin,
    UMax,
    VMin,
    VMax,
}

impl SurfaceEdge {
    /// Parameter point of this edge at arc parameter t.
    fn params(self, t: f64) -> (f64, f64) {
        match self {
            SurfaceEdge::UMin => (0.0, t),
            SurfaceEdge::UMax => (1.0, t),
            SurfaceEdge::VMin => (t, 0.0),
            SurfaceEdge::VMax => (t, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SurfaceEdge::UMin => "u=0",
            SurfaceEdge::UMax => "u=1",
            SurfaceEdge::VMin => "v=0",
            SurfaceEdge::VMax => "v=1",
        }
    }
}

/// A block face: an evaluation patch plus the reference axis it holds fixed.
#[derive(Clone, Debug)]
pub struct ParametricSurface {
    pub(crate) patch: Patch,
    orientation: Axis,
}

impl ParametricSurface {
    pub fn plane(
        orientation: Axis,
        origin: Vec3,
        u_axis: Vec3,
        v_axis: Vec3,
    ) -> Result<Self, SurfaceError> {
        if !(origin.is_finite() && u_axis.is_finite() && v_axis.is_finite()) {
            return Err(SurfaceError::NonFinite { what: "plane definition" });
        }
        Ok(ParametricSurface { patch: Patch::Plane { origin, u_axis, v_axis }, orientation })
    }

    /// Corners in the order p00, p10, p01, p11.
    pub fn bilinear(orientation: Axis, corners: [Vec3; 4]) -> Result<Self, SurfaceError> {
        if !corners.iter().all(|c| c.is_finite()) {
            return Err(SurfaceError::NonFinite { what: "bilinear corner" });
        }
        Ok(ParametricSurface { patch: Patch::Bilinear { corners }, orientation })
    }

    pub fn graph(
        orientation: Axis,
        x_range: (f64, f64),
        y_range: (f64, f64),
        height: HeightFn,
    ) -> Result<Self, SurfaceError> {
        check_graph_args(x_range, y_range, &height)?;
        Ok(ParametricSurface {
            patch: Patch::Graph { x0: x_range.0, x1: x_range.1, y0: y_range.0, y1: y_range.1, height },
            orientation,
        })
    }

    /// Discrete surface from rows of points; rows index u, columns index v.
    pub fn discrete(orientation: Axis, rows: Vec<Vec<Vec3>>) -> Result<Self, SurfaceError> {
        Ok(ParametricSurface { patch: Patch::Discrete { grid: GridData::new(rows)? }, orientation })
    }

    pub fn orientation(&self) -> Axis {
        self.orientation
    }

    pub(crate) fn value(&self, u: f64, v: f64) -> Vec3 {
        self.patch.value(u, v)
    }

    pub(crate) fn derivative(&self, u: f64, v: f64, dir: ParamDir) -> Vec3 {
        match dir {
            ParamDir::U => self.patch.du(u, v),
            ParamDir::V => self.patch.dv(u, v),
        }
    }

    pub(crate) fn mixed_derivative(&self, u: f64, v: f64) -> Vec3 {
        self.patch.duv(u, v)
    }

    /// (u, v) parameters carved out of a reference point by orientation.
    pub(crate) fn params_from_ref(&self, p: RefPoint) -> (f64, f64) {
        let (ua, va) = self.orientation.others();
        (p[ua.index()], p[va.index()])
    }

    /// Maps a reference axis to the surface parameter it drives, or None
    /// for the fixed axis (the surface is constant along it).
    pub(crate) fn param_dir(&self, axis: Axis) -> Option<ParamDir> {
        let (ua, va) = self.orientation.others();
        if axis == ua {
            Some(ParamDir::U)
        } else if axis == va {
            Some(ParamDir::V)
        } else {
            None
        }
    }

    pub fn edge_point(&self, edge: SurfaceEdge, t: f64) -> Result<Vec3, SurfaceError> {
        check_param("t", t)?;
        let (u, v) = edge.params(t);
        Ok(self.value(u, v))
    }
}

/// Endpoint slope data for Hermite blending, valued as direction vectors.
#[derive(Clone, Debug)]
pub struct DerivativeField {
    pub(crate) patch: Patch,
    orientation: Axis,
}

impl DerivativeField {
    pub fn constant(orientation: Axis, value: Vec3) -> Result<Self, SurfaceError> {
        if !value.is_finite() {
            return Err(SurfaceError::NonFinite { what: "constant field value" });
        }
        Ok(DerivativeField { patch: Patch::Constant { value }, orientation })
    }

    /// Corner vectors in the order d00, d10, d01, d11.
    pub fn bilinear(orientation: Axis, corners: [Vec3; 4]) -> Result<Self, SurfaceError> {
        if !corners.iter().all(|c| c.is_finite()) {
            return Err(SurfaceError::NonFinite { what: "bilinear field corner" });
        }
        Ok(DerivativeField { patch: Patch::Bilinear { corners }, orientation })
    }

    /// Field (0, 0, f(x, y)) over the given ranges.
    pub fn vertical(
        orientation: Axis,
        x_range: (f64, f64),
        y_range: (f64, f64),
        height: HeightFn,
    ) -> Result<Self, SurfaceError> {
        check_graph_args(x_range, y_range, &height)?;
        Ok(DerivativeField {
            patch: Patch::Vertical { x0: x_range.0, x1: x_range.1, y0: y_range.0, y1: y_range.1, height },
            orientation,
        })
    }

    /// Discrete field from rows of vectors; rows index u, columns index v.
    pub fn discrete(orientation: Axis, rows: Vec<Vec<Vec3>>) -> Result<Self, SurfaceError> {
        Ok(DerivativeField { patch: Patch::Discrete { grid: GridData::new(rows)? }, orientation })
    }

    pub fn orientation(&self) -> Axis {
        self.orientation
    }

    pub(crate) fn value(&self, u: f64, v: f64) -> Vec3 {
        self.patch.value(u, v)
    }

    pub(crate) fn derivative(&self, u: f64, v: f64, dir: ParamDir) -> Vec3 {
        match dir {
            ParamDir::U => self.patch.du(u, v),
            ParamDir::V => self.patch.dv(u, v),
        }
    }

    pub(crate) fn mixed_derivative(&self, u: f64, v: f64) -> Vec3 {
        self.patch.duv(u, v)
    }

    pub(crate) fn params_from_ref(&self, p: RefPoint) -> (f64, f64) {
        let (ua, va) = self.orientation.others();
        (p[ua.index()], p[va.index()])
    }

    pub(crate) fn param_dir(&self, axis: Axis) -> Option<ParamDir> {
        let (ua, va) = self.orientation.others();
        if axis == ua {
            Some(ParamDir::U)
        } else if axis == va {
            Some(ParamDir::V)
        } else {
            None
        }
    }
}

/// Evaluates a surface at (u, v) in the unit square.
pub fn eval_surface(s: &ParametricSurface, u: f64, v: f64) -> Result<Vec3, SurfaceError> {
    check_param("u", u)?;
    check_param("v", v)?;
    Ok(s.value(u, v))
}

/// Exact partial derivative of [`eval_surface`] along one parameter.
///
/// For discrete surfaces this is the derivative of the bilinear
/// interpolant, piecewise constant in the differentiated direction.
pub fn eval_surface_derivative(
    s: &ParametricSurface,
    u: f64,
    v: f64,
    dir: ParamDir,
) -> Result<Vec3, SurfaceError> {
    check_param("u", u)?;
    check_param("v", v)?;
    Ok(s.derivative(u, v, dir))
}

/// Evaluates a derivative field at (u, v) in the unit square.
pub fn eval_field(f: &DerivativeField, u: f64, v: f64) -> Result<Vec3, SurfaceError> {
    check_param("u", u)?;
    check_param("v", v)?;
    Ok(f.value(u, v))
}

/// Largest pointwise gap between two edge curves sampled at
/// [`CONFORMITY_SAMPLES`] uniform parameters.
pub fn edge_gap(
    a: &ParametricSurface,
    b: &ParametricSurface,
    edge_a: SurfaceEdge,
    edge_b: SurfaceEdge,
) -> f64 {
    let n = CONFORMITY_SAMPLES;
    let mut max_gap = 0.0f64;
    for k in 0..n {
        let t = k as f64 / (n - 1) as f64;
        let (ua, va) = edge_a.params(t);
        let (ub, vb) = edge_b.params(t);
        let gap = a.value(ua, va).distance(b.value(ub, vb));
        if !gap.is_finite() {
            return f64::INFINITY;
        }
        max_gap = max_gap.max(gap);
    }
    max_gap
}

/// True when the two named edge curves agree pointwise within tol at
/// [`CONFORMITY_SAMPLES`] uniform samples.
pub fn edges_conform(
    a: &ParametricSurface,
    b: &ParametricSurface,
    edge_a: SurfaceEdge,
    edge_b: SurfaceEdge,
    tol: f64,
) -> bool {
    edge_gap(a, b, edge_a, edge_b) <= tol
}
