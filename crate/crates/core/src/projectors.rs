//! One-dimensional interpolation projectors along a reference axis.
//!
//! A projector blends surfaces of constant axis coordinate into a volume
//! function. Three families are supported:
//!
//! * linear: two endpoint surfaces, straight-line blending,
//! * lagrangian: up to nine surfaces at prescribed knots, polynomial
//!   blending evaluated in barycentric form,
//! * hermite: two endpoint surfaces plus endpoint derivative fields,
//!   cubic blending.
//!
//! For the Lagrangian family two algebraically equivalent weight formulas
//! exist: the classical product form ([`lagrange_weights`]) and the
//! barycentric form built on [`barycentric_weights`]. Evaluation ships the
//! barycentric path; the classical form is kept as an independent check.

use crate::math::{Axis, RefPoint, Vec3};
use crate::surfaces::{DerivativeField, ParametricSurface, SurfaceError};
use thiserror::Error;

/// Highest supported Lagrangian polynomial order (knot count minus one).
pub const MAX_LAGRANGE_ORDER: usize = 8;

/// Distance below which an evaluation coordinate counts as sitting on a
/// knot; the projector then returns that knot's surface value exactly.
pub const CARDINAL_EPSILON: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum ProjectorError {
    #[error("coordinate {name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
    #[error("knot list needs at least 2 entries, got {0}")]
    TooFewKnots(usize),
    #[error("polynomial order {order} exceeds the supported cap {MAX_LAGRANGE_ORDER}")]
    OrderCap { order: usize },
    #[error("knots must be strictly ascending, got {prev} before {next}")]
    KnotsNotAscending { prev: f64, next: f64 },
    #[error("first knot must be exactly 0, got {0}")]
    FirstKnot(f64),
    #[error("last knot must be exactly 1, got {0}")]
    LastKnot(f64),
    #[error("non-finite knot value")]
    NonFiniteKnot,
    #[error("{got} surfaces bound to {expected} knots")]
    SurfaceCount { got: usize, expected: usize },
    #[error("surface fixed along {surface} bound to a {projector} projector")]
    OrientationMismatch { surface: Axis, projector: Axis },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Validated knot vector: strictly ascending, spanning exactly [0, 1],
/// at most [`MAX_LAGRANGE_ORDER`] + 1 entries.
#[derive(Clone, Debug)]
pub struct Knots(Vec<f64>);

impl Knots {
    pub fn new(values: Vec<f64>) -> Result<Self, ProjectorError> {
        if values.len() < 2 {
            return Err(ProjectorError::TooFewKnots(values.len()));
        }
        if values.len() > MAX_LAGRANGE_ORDER + 1 {
            return Err(ProjectorError::OrderCap { order: values.len() - 1 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ProjectorError::NonFiniteKnot);
        }
        for pair in values.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ProjectorError::KnotsNotAscending { prev: pair[0], next: pair[1] });
            }
        }
        if values[0] != 0.0 {
            return Err(ProjectorError::FirstKnot(values[0]));
        }
        if *values.last().unwrap() != 1.0 {
            return Err(ProjectorError::LastKnot(*values.last().unwrap()));
        }
        Ok(Knots(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Classical product-form blending weights.
///
/// weights[j] = prod over i != j of (t - knot_i) / (knot_j - knot_i).
/// Exactly cardinal at the knots and summing to one everywhere.
pub fn lagrange_weights(knots: &Knots, t: f64) -> Vec<f64> {
    let k = knots.as_slice();
    let mut w = vec![1.0; k.len()];
    for j in 0..k.len() {
        for i in 0..k.len() {
            if i != j {
                w[j] *= (t - k[i]) / (k[j] - k[i]);
            }
        }
    }
    w
}

/// Derivatives of the blending weights, by the product rule:
/// weights'[j] = omega_j * sum over m != j of prod over i != j, m of (t - knot_i).
pub fn lagrange_weight_derivatives(knots: &Knots, t: f64) -> Vec<f64> {
    let k = knots.as_slice();
    let omega = barycentric_weights(knots);
    let mut dw = vec![0.0; k.len()];
    for j in 0..k.len() {
        let mut sum = 0.0;
        for m in 0..k.len() {
            if m == j {
                continue;
            }
            let mut prod = 1.0;
            for (i, ki) in k.iter().enumerate() {
                if i != j && i != m {
                    prod *= t - ki;
                }
            }
            sum += prod;
        }
        dw[j] = omega[j] * sum;
    }
    dw
}

/// Inverse Newton weights: omega_j = 1 / prod over i != j of (knot_j - knot_i).
pub fn barycentric_weights(knots: &Knots) -> Vec<f64> {
    let k = knots.as_slice();
    let mut w = vec![1.0; k.len()];
    for j in 0..k.len() {
        for i in 0..k.len() {
            if i != j {
                w[j] *= k[j] - k[i];
            }
        }
        w[j] = 1.0 / w[j];
    }
    w
}

/// Blending weights in barycentric form:
/// weights[j] = Omega * omega_j / (t - knot_j) with Omega = prod(t - knot_i).
///
/// Within [`CARDINAL_EPSILON`] of a knot the weights collapse to that
/// knot's cardinal vector, so knot surfaces are reproduced exactly.
fn barycentric_value_weights(knots: &[f64], omega: &[f64], t: f64) -> Vec<f64> {
    for (j, kj) in knots.iter().enumerate() {
        if (t - kj).abs() < CARDINAL_EPSILON {
            let mut w = vec![0.0; knots.len()];
            w[j] = 1.0;
            return w;
        }
    }
    let mut big_omega = 1.0;
    for kj in knots {
        big_omega *= t - kj;
    }
    knots
        .iter()
        .zip(omega)
        .map(|(kj, oj)| big_omega * oj / (t - kj))
        .collect()
}

#[derive(Clone, Debug)]
enum Family {
    Linear {
        surfaces: [ParametricSurface; 2],
    },
    Lagrangian {
        knots: Knots,
        omega: Vec<f64>,
        surfaces: Vec<ParametricSurface>,
    },
    Hermite {
        surfaces: [ParametricSurface; 2],
        fields: [DerivativeField; 2],
    },
}

/// Interpolation projector along one reference axis.
#[derive(Clone, Debug)]
pub struct Projector {
    axis: Axis,
    family: Family,
}

/// One blending node: the axis coordinate it is attached to, its weight,
/// and the weight's derivative at the evaluation coordinate.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BasisNode {
    pub coord: f64,
    pub w: f64,
    pub dw: f64,
}

/// Blending weights at a given axis coordinate. `value` nodes multiply
/// surface values; `slope` nodes (Hermite only) multiply axis derivatives.
#[derive(Clone, Debug)]
pub(crate) struct Basis {
    pub value: Vec<BasisNode>,
    pub slope: Vec<BasisNode>,
}

fn check_coord(name: &'static str, value: f64) -> Result<(), ProjectorError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ProjectorError::Domain { name, value })
    }
}

fn check_orientation(axis: Axis, orientation: Axis) -> Result<(), ProjectorError> {
    if orientation == axis {
        Ok(())
    } else {
        Err(ProjectorError::OrientationMismatch { surface: orientation, projector: axis })
    }
}

impl Projector {
    pub fn linear(
        axis: Axis,
        s0: ParametricSurface,
        s1: ParametricSurface,
    ) -> Result<Self, ProjectorError> {
        check_orientation(axis, s0.orientation())?;
        check_orientation(axis, s1.orientation())?;
        Ok(Projector { axis, family: Family::Linear { surfaces: [s0, s1] } })
    }

    pub fn lagrangian(
        axis: Axis,
        knots: Knots,
        surfaces: Vec<ParametricSurface>,
    ) -> Result<Self, ProjectorError> {
        if surfaces.len() != knots.len() {
            return Err(ProjectorError::SurfaceCount { got: surfaces.len(), expected: knots.len() });
        }
        for s in &surfaces {
            check_orientation(axis, s.orientation())?;
        }
        let omega = barycentric_weights(&knots);
        Ok(Projector { axis, family: Family::Lagrangian { knots, omega, surfaces } })
    }

    pub fn hermite(
        axis: Axis,
        s0: ParametricSurface,
        s1: ParametricSurface,
        d0: DerivativeField,
        d1: DerivativeField,
    ) -> Result<Self, ProjectorError> {
        check_orientation(axis, s0.orientation())?;
        check_orientation(axis, s1.orientation())?;
        check_orientation(axis, d0.orientation())?;
        check_orientation(axis, d1.orientation())?;
        Ok(Projector { axis, family: Family::Hermite { surfaces: [s0, s1], fields: [d0, d1] } })
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::Linear { .. } => "linear",
            Family::Lagrangian { .. } => "lagrangian",
            Family::Hermite { .. } => "hermite",
        }
    }

    /// The surfaces at axis coordinates 0 and 1; these are the block faces.
    pub fn boundary_surfaces(&self) -> (&ParametricSurface, &ParametricSurface) {
        match &self.family {
            Family::Linear { surfaces } => (&surfaces[0], &surfaces[1]),
            Family::Lagrangian { surfaces, .. } => {
                (surfaces.first().unwrap(), surfaces.last().unwrap())
            }
            Family::Hermite { surfaces, .. } => (&surfaces[0], &surfaces[1]),
        }
    }

    /// Evaluates the projector at a reference point.
    pub fn eval(&self, xi: f64, eta: f64, kappa: f64) -> Result<Vec3, ProjectorError> {
        check_coord("xi", xi)?;
        check_coord("eta", eta)?;
        check_coord("kappa", kappa)?;
        Ok(self.value([xi, eta, kappa]))
    }

    /// Exact derivative of [`Projector::eval`] with respect to the
    /// projector's own axis coordinate.
    pub fn eval_axis_derivative(&self, xi: f64, eta: f64, kappa: f64) -> Result<Vec3, ProjectorError> {
        check_coord("xi", xi)?;
        check_coord("eta", eta)?;
        check_coord("kappa", kappa)?;
        Ok(self.partial([xi, eta, kappa], self.axis))
    }

    pub(crate) fn basis(&self, t: f64) -> Basis {
        match &self.family {
            Family::Linear { .. } => Basis {
                value: vec![
                    BasisNode { coord: 0.0, w: 1.0 - t, dw: -1.0 },
                    BasisNode { coord: 1.0, w: t, dw: 1.0 },
                ],
                slope: Vec::new(),
            },
            Family::Lagrangian { knots, omega, .. } => {
                let w = barycentric_value_weights(knots.as_slice(), omega, t);
                let dw = lagrange_weight_derivatives(knots, t);
                Basis {
                    value: knots
                        .as_slice()
                        .iter()
                        .zip(w.iter().zip(&dw))
                        .map(|(&coord, (&w, &dw))| BasisNode { coord, w, dw })
                        .collect(),
                    slope: Vec::new(),
                }
            }
            Family::Hermite { .. } => {
                let t2 = t * t;
                let t3 = t2 * t;
                Basis {
                    value: vec![
                        BasisNode {
                            coord: 0.0,
                            w: 2.0 * t3 - 3.0 * t2 + 1.0,
                            dw: 6.0 * t2 - 6.0 * t,
                        },
                        BasisNode {
                            coord: 1.0,
                            w: -2.0 * t3 + 3.0 * t2,
                            dw: -6.0 * t2 + 6.0 * t,
                        },
                    ],
                    slope: vec![
                        BasisNode {
                            coord: 0.0,
                            w: t3 - 2.0 * t2 + t,
                            dw: 3.0 * t2 - 4.0 * t + 1.0,
                        },
                        BasisNode { coord: 1.0, w: t3 - t2, dw: 3.0 * t2 - 2.0 * t },
                    ],
                }
            }
        }
    }

    fn value_surface(&self, i: usize) -> &ParametricSurface {
        match &self.family {
            Family::Linear { surfaces } | Family::Hermite { surfaces, .. } => &surfaces[i],
            Family::Lagrangian { surfaces, .. } => &surfaces[i],
        }
    }

    fn slope_field(&self, k: usize) -> &DerivativeField {
        match &self.family {
            Family::Hermite { fields, .. } => &fields[k],
            _ => unreachable!("slope nodes exist only for hermite projectors"),
        }
    }

    pub(crate) fn value(&self, p: RefPoint) -> Vec3 {
        let basis = self.basis(p[self.axis.index()]);
        let mut acc = Vec3::ZERO;
        for (i, node) in basis.value.iter().enumerate() {
            let s = self.value_surface(i);
            let (u, v) = s.params_from_ref(p);
            acc += s.value(u, v) * node.w;
        }
        for (k, node) in basis.slope.iter().enumerate() {
            let f = self.slope_field(k);
            let (u, v) = f.params_from_ref(p);
            acc += f.value(u, v) * node.w;
        }
        acc
    }

    /// Exact partial derivative along any reference axis. Along the own
    /// axis the blending weights differentiate; along the other two axes
    /// the bound surfaces do.
    pub(crate) fn partial(&self, p: RefPoint, x: Axis) -> Vec3 {
        let basis = self.basis(p[self.axis.index()]);
        let mut acc = Vec3::ZERO;
        if x == self.axis {
            for (i, node) in basis.value.iter().enumerate() {
                let s = self.value_surface(i);
                let (u, v) = s.params_from_ref(p);
                acc += s.value(u, v) * node.dw;
            }
            for (k, node) in basis.slope.iter().enumerate() {
                let f = self.slope_field(k);
                let (u, v) = f.params_from_ref(p);
                acc += f.value(u, v) * node.dw;
            }
        } else {
            for (i, node) in basis.value.iter().enumerate() {
                let s = self.value_surface(i);
                let (u, v) = s.params_from_ref(p);
                let dir = s.param_dir(x).expect("off-axis direction maps to a surface parameter");
                acc += s.derivative(u, v, dir) * node.w;
            }
            for (k, node) in basis.slope.iter().enumerate() {
                let f = self.slope_field(k);
                let (u, v) = f.params_from_ref(p);
                let dir = f.param_dir(x).expect("off-axis direction maps to a field parameter");
                acc += f.derivative(u, v, dir) * node.w;
            }
        }
        acc
    }

    /// Mixed second partial along two distinct reference axes.
    pub(crate) fn partial2(&self, p: RefPoint, x: Axis, y: Axis) -> Vec3 {
        debug_assert_ne!(x, y);
        let basis = self.basis(p[self.axis.index()]);
        let mut acc = Vec3::ZERO;
        if x != self.axis && y != self.axis {
            // Both directions are surface parameters: mixed patch derivative.
            for (i, node) in basis.value.iter().enumerate() {
                let s = self.value_surface(i);
                let (u, v) = s.params_from_ref(p);
                acc += s.mixed_derivative(u, v) * node.w;
            }
            for (k, node) in basis.slope.iter().enumerate() {
                let f = self.slope_field(k);
                let (u, v) = f.params_from_ref(p);
                acc += f.mixed_derivative(u, v) * node.w;
            }
        } else {
            let other = if x == self.axis { y } else { x };
            for (i, node) in basis.value.iter().enumerate() {
                let s = self.value_surface(i);
                let (u, v) = s.params_from_ref(p);
                let dir = s.param_dir(other).expect("off-axis direction maps to a surface parameter");
                acc += s.derivative(u, v, dir) * node.dw;
            }
            for (k, node) in basis.slope.iter().enumerate() {
                let f = self.slope_field(k);
                let (u, v) = f.params_from_ref(p);
                let dir = f.param_dir(other).expect("off-axis direction maps to a field parameter");
                acc += f.derivative(u, v, dir) * node.dw;
            }
        }
        acc
    }

    /// Full mixed third partial d3/dxi deta dkappa.
    pub(crate) fn partial3(&self, p: RefPoint) -> Vec3 {
        let basis = self.basis(p[self.axis.index()]);
        let mut acc = Vec3::ZERO;
        for (i, node) in basis.value.iter().enumerate() {
            let s = self.value_surface(i);
            let (u, v) = s.params_from_ref(p);
            acc += s.mixed_derivative(u, v) * node.dw;
        }
        for (k, node) in basis.slope.iter().enumerate() {
            let f = self.slope_field(k);
            let (u, v) = f.params_from_ref(p);
            acc += f.mixed_derivative(u, v) * node.dw;
        }
        acc
    }
}
