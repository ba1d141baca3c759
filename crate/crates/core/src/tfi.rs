//! Volume mapping by boolean-sum blending of three projectors, and
//! structured grid generation from it.
//!
//! Given projectors P_xi, P_eta, P_kappa the mapping is the seven-term
//! boolean sum
//!
//! ```text
//! r = P_xi + P_eta + P_kappa
//!   - P_{xi o eta} - P_{xi o kappa} - P_{eta o kappa}
//!   + P_{xi o eta o kappa}
//! ```
//!
//! where `o` is the tensor product: the left projector's blending basis
//! applied to the right operand's restrictions at the left projector's
//! defining coordinates (plus axis-derivative restrictions for Hermite
//! factors). On every face of the reference cube the sum collapses to
//! the corresponding boundary surface, provided the six surfaces agree
//! along the twelve shared edges.

use crate::math::{det3, with_axis, Axis, RefPoint, Vec3};
use crate::projectors::{Projector, ProjectorError};
use crate::surfaces::{edge_gap, ParametricSurface, SurfaceEdge};
use thiserror::Error;

/// Largest allowed gap between two boundary surfaces along a shared
/// block edge.
pub const EDGE_CONFORMITY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TfiError {
    #[error("coordinate {name} = {value} outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
    #[error("projector for the {expected} slot varies in {got}")]
    AxisSlot { expected: Axis, got: Axis },
    #[error("tensor product factors must vary in distinct axes, {0} appears twice")]
    RepeatedAxis(Axis),
    #[error("tensor product needs 1 to 3 factors, got {0}")]
    FactorCount(usize),
    #[error("resolution along {axis} must be at least 1, got {got}")]
    Resolution { axis: Axis, got: usize },
    #[error("grading exponent must be finite and positive, got {0}")]
    GradingExponent(f64),
    #[error(
        "boundary surfaces {face_a} and {face_b} disagree along their shared edge \
         by {gap:.3e} (allowed {tol:.1e})"
    )]
    EdgeMismatch { face_a: &'static str, face_b: &'static str, gap: f64, tol: f64 },
    #[error(transparent)]
    Projector(#[from] ProjectorError),
}

/// Monotone map [0,1] -> [0,1] applied to a reference coordinate before
/// evaluation, clustering grid nodes without changing the mapping.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Grading {
    Uniform,
    /// t^exponent; exponents below 1 cluster toward 1, above 1 toward 0.
    Power { exponent: f64 },
    /// (1 - cos(pi t)) / 2; clusters toward both ends.
    Cosine,
}

impl Grading {
    pub fn validate(self) -> Result<Self, TfiError> {
        match self {
            Grading::Power { exponent } if !(exponent.is_finite() && exponent > 0.0) => {
                Err(TfiError::GradingExponent(exponent))
            }
            g => Ok(g),
        }
    }

    /// Applies the map. Endpoints are reproduced exactly.
    pub fn apply(self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        if t == 1.0 {
            return 1.0;
        }
        match self {
            Grading::Uniform => t,
            Grading::Power { exponent } => t.powf(exponent),
            Grading::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * t).cos()),
        }
    }
}

/// A hexahedral block: one projector per reference axis, target
/// resolution, material identifier, and optional per-axis grading.
#[derive(Clone, Debug)]
pub struct BlockSpec {
    p_xi: Projector,
    p_eta: Projector,
    p_kappa: Projector,
    resolution: (usize, usize, usize),
    material: String,
    grading: [Grading; 3],
}

impl BlockSpec {
    pub fn new(
        p_xi: Projector,
        p_eta: Projector,
        p_kappa: Projector,
        resolution: (usize, usize, usize),
        material: impl Into<String>,
    ) -> Result<Self, TfiError> {
        for (p, slot) in [(&p_xi, Axis::Xi), (&p_eta, Axis::Eta), (&p_kappa, Axis::Kappa)] {
            if p.axis() != slot {
                return Err(TfiError::AxisSlot { expected: slot, got: p.axis() });
            }
        }
        let (nx, ny, nz) = resolution;
        for (n, axis) in [(nx, Axis::Xi), (ny, Axis::Eta), (nz, Axis::Kappa)] {
            if n == 0 {
                return Err(TfiError::Resolution { axis, got: n });
            }
        }
        Ok(BlockSpec {
            p_xi,
            p_eta,
            p_kappa,
            resolution,
            material: material.into(),
            grading: [Grading::Uniform; 3],
        })
    }

    pub fn with_grading(mut self, axis: Axis, grading: Grading) -> Result<Self, TfiError> {
        self.grading[axis.index()] = grading.validate()?;
        Ok(self)
    }

    pub fn projector(&self, axis: Axis) -> &Projector {
        match axis {
            Axis::Xi => &self.p_xi,
            Axis::Eta => &self.p_eta,
            Axis::Kappa => &self.p_kappa,
        }
    }

    pub fn resolution(&self) -> (usize, usize, usize) {
        self.resolution
    }

    pub fn material(&self) -> &str {
        &self.material
    }

    pub fn grading(&self, axis: Axis) -> Grading {
        self.grading[axis.index()]
    }

    /// The boundary surface on the given face (side 0 or 1 of an axis).
    pub fn face_surface(&self, axis: Axis, side: usize) -> &ParametricSurface {
        let (s0, s1) = self.projector(axis).boundary_surfaces();
        if side == 0 {
            s0
        } else {
            s1
        }
    }
}

fn face_name(axis: Axis, side: usize) -> &'static str {
    match (axis, side) {
        (Axis::Xi, 0) => "xi=0",
        (Axis::Xi, _) => "xi=1",
        (Axis::Eta, 0) => "eta=0",
        (Axis::Eta, _) => "eta=1",
        (Axis::Kappa, 0) => "kappa=0",
        (Axis::Kappa, _) => "kappa=1",
    }
}

/// The edge of face `(face_axis, _)` where the coordinate `fixed_axis`
/// equals `side`. Faces are parametrized by the two non-face axes in
/// canonical order, so the fixed axis is either the u or v parameter.
fn face_edge(face_axis: Axis, fixed_axis: Axis, side: usize) -> SurfaceEdge {
    let (u_axis, _) = face_axis.others();
    match (fixed_axis == u_axis, side) {
        (true, 0) => SurfaceEdge::UMin,
        (true, _) => SurfaceEdge::UMax,
        (false, 0) => SurfaceEdge::VMin,
        (false, _) => SurfaceEdge::VMax,
    }
}

/// Checks all 12 block edges: every pair of adjacent boundary surfaces
/// must trace the same curve along their shared edge within
/// [`EDGE_CONFORMITY_TOL`].
pub fn validate_conformity(b: &BlockSpec) -> Result<(), TfiError> {
    let pairs = [
        (Axis::Xi, Axis::Eta),
        (Axis::Xi, Axis::Kappa),
        (Axis::Eta, Axis::Kappa),
    ];
    for (a, c) in pairs {
        for i in 0..2 {
            for j in 0..2 {
                let sa = b.face_surface(a, i);
                let sc = b.face_surface(c, j);
                let ea = face_edge(a, c, j);
                let ec = face_edge(c, a, i);
                let gap = edge_gap(sa, sc, ea, ec);
                if !(gap <= EDGE_CONFORMITY_TOL) {
                    return Err(TfiError::EdgeMismatch {
                        face_a: face_name(a, i),
                        face_b: face_name(c, j),
                        gap,
                        tol: EDGE_CONFORMITY_TOL,
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_coord(name: &'static str, value: f64) -> Result<(), TfiError> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(TfiError::Domain { name, value })
    }
}

fn check_point(xi: f64, eta: f64, kappa: f64) -> Result<(), TfiError> {
    check_coord("xi", xi)?;
    check_coord("eta", eta)?;
    check_coord("kappa", kappa)
}

// Composite evaluation over a factor list. The head projector's basis is
// applied to the tail's restrictions; Hermite heads additionally blend
// the tail's axis derivative at the endpoints. All derivatives are
// analytic, no finite differences anywhere in this chain.

fn composite_value(factors: &[&Projector], p: RefPoint) -> Vec3 {
    let head = factors[0];
    if factors.len() == 1 {
        return head.value(p);
    }
    let rest = &factors[1..];
    let a = head.axis();
    let basis = head.basis(p[a.index()]);
    let mut acc = Vec3::ZERO;
    for node in &basis.value {
        acc += composite_value(rest, with_axis(p, a, node.coord)) * node.w;
    }
    for node in &basis.slope {
        acc += composite_partial(rest, with_axis(p, a, node.coord), a) * node.w;
    }
    acc
}

fn composite_partial(factors: &[&Projector], p: RefPoint, x: Axis) -> Vec3 {
    let head = factors[0];
    if factors.len() == 1 {
        return head.partial(p, x);
    }
    let rest = &factors[1..];
    let a = head.axis();
    let basis = head.basis(p[a.index()]);
    let mut acc = Vec3::ZERO;
    if x == a {
        for node in &basis.value {
            acc += composite_value(rest, with_axis(p, a, node.coord)) * node.dw;
        }
        for node in &basis.slope {
            acc += composite_partial(rest, with_axis(p, a, node.coord), a) * node.dw;
        }
    } else {
        for node in &basis.value {
            acc += composite_partial(rest, with_axis(p, a, node.coord), x) * node.w;
        }
        for node in &basis.slope {
            acc += composite_partial2(rest, with_axis(p, a, node.coord), a, x) * node.w;
        }
    }
    acc
}

fn composite_partial2(factors: &[&Projector], p: RefPoint, x: Axis, y: Axis) -> Vec3 {
    debug_assert_ne!(x, y);
    let head = factors[0];
    if factors.len() == 1 {
        return head.partial2(p, x, y);
    }
    let rest = &factors[1..];
    let a = head.axis();
    let basis = head.basis(p[a.index()]);
    let mut acc = Vec3::ZERO;
    if x == a || y == a {
        let other = if x == a { y } else { x };
        for node in &basis.value {
            acc += composite_partial(rest, with_axis(p, a, node.coord), other) * node.dw;
        }
        for node in &basis.slope {
            acc += composite_partial2(rest, with_axis(p, a, node.coord), a, other) * node.dw;
        }
    } else {
        for node in &basis.value {
            acc += composite_partial2(rest, with_axis(p, a, node.coord), x, y) * node.w;
        }
        for node in &basis.slope {
            // d2/dx dy of the tail's a-derivative is its full mixed third.
            acc += composite_partial3(rest, with_axis(p, a, node.coord)) * node.w;
        }
    }
    acc
}

fn composite_partial3(factors: &[&Projector], p: RefPoint) -> Vec3 {
    let head = factors[0];
    if factors.len() == 1 {
        return head.partial3(p);
    }
    let rest = &factors[1..];
    let a = head.axis();
    let (x, y) = a.others();
    let basis = head.basis(p[a.index()]);
    let mut acc = Vec3::ZERO;
    for node in &basis.value {
        acc += composite_partial2(rest, with_axis(p, a, node.coord), x, y) * node.dw;
    }
    for node in &basis.slope {
        acc += composite_partial3(rest, with_axis(p, a, node.coord)) * node.dw;
    }
    acc
}

/// Tensor product of up to three projectors varying in distinct axes.
#[derive(Clone, Debug)]
pub struct TensorProduct {
    factors: Vec<Projector>,
}

impl TensorProduct {
    /// Same-axis factors are rejected: the product of a projector with
    /// itself is itself, so a repeat is always a specification mistake.
    pub fn new(factors: Vec<Projector>) -> Result<Self, TfiError> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(TfiError::FactorCount(factors.len()));
        }
        for (i, f) in factors.iter().enumerate() {
            for g in &factors[..i] {
                if f.axis() == g.axis() {
                    return Err(TfiError::RepeatedAxis(f.axis()));
                }
            }
        }
        Ok(TensorProduct { factors })
    }

    pub fn pair(a: Projector, b: Projector) -> Result<Self, TfiError> {
        TensorProduct::new(vec![a, b])
    }

    pub fn eval(&self, xi: f64, eta: f64, kappa: f64) -> Result<Vec3, TfiError> {
        check_point(xi, eta, kappa)?;
        let refs: Vec<&Projector> = self.factors.iter().collect();
        Ok(composite_value(&refs, [xi, eta, kappa]))
    }

    /// Exact partial derivative of the product along a reference axis.
    pub fn eval_derivative(
        &self,
        xi: f64,
        eta: f64,
        kappa: f64,
        axis: Axis,
    ) -> Result<Vec3, TfiError> {
        check_point(xi, eta, kappa)?;
        let refs: Vec<&Projector> = self.factors.iter().collect();
        Ok(composite_partial(&refs, [xi, eta, kappa], axis))
    }
}

/// Boolean sum of two projectors on distinct axes:
/// P_a + P_b - P_{a o b}. Interpolates both projectors' surfaces.
pub fn boolean_sum_pair(
    a: &Projector,
    b: &Projector,
    xi: f64,
    eta: f64,
    kappa: f64,
) -> Result<Vec3, TfiError> {
    if a.axis() == b.axis() {
        return Err(TfiError::RepeatedAxis(a.axis()));
    }
    check_point(xi, eta, kappa)?;
    let p = [xi, eta, kappa];
    Ok(a.value(p) + b.value(p) - composite_value(&[a, b], p))
}

/// All seven boolean-sum terms with their signs. The three covariant
/// routines share this table so value and derivative stay in sync.
fn for_each_term<F: FnMut(&[&Projector], f64)>(b: &BlockSpec, mut f: F) {
    let px = &b.p_xi;
    let pe = &b.p_eta;
    let pk = &b.p_kappa;
    f(&[px], 1.0);
    f(&[pe], 1.0);
    f(&[pk], 1.0);
    f(&[px, pe], -1.0);
    f(&[px, pk], -1.0);
    f(&[pe, pk], -1.0);
    f(&[px, pe, pk], 1.0);
}

/// Evaluates the volume mapping at a reference point.
pub fn boolean_sum_eval(b: &BlockSpec, xi: f64, eta: f64, kappa: f64) -> Result<Vec3, TfiError> {
    check_point(xi, eta, kappa)?;
    let p = [xi, eta, kappa];
    let mut acc = Vec3::ZERO;
    for_each_term(b, |factors, sign| acc += composite_value(factors, p) * sign);
    Ok(acc)
}

/// Exact analytic derivative of [`boolean_sum_eval`] along one reference
/// axis: the tangent to the grid lines of that axis.
///
/// Every one of the seven terms is differentiated. Terms whose factor
/// list omits the axis still vary along it through their bound surfaces,
/// so none can be dropped for curved boundary data; dropping them breaks
/// even affine sheared blocks.
pub fn covariant_vector(
    b: &BlockSpec,
    xi: f64,
    eta: f64,
    kappa: f64,
    axis: Axis,
) -> Result<Vec3, TfiError> {
    check_point(xi, eta, kappa)?;
    let p = [xi, eta, kappa];
    let mut acc = Vec3::ZERO;
    for_each_term(b, |factors, sign| acc += composite_partial(factors, p, axis) * sign);
    Ok(acc)
}

/// Determinant of the Jacobian [r_xi, r_eta, r_kappa]; positive where
/// the mapping preserves orientation, non-positive in folded cells.
pub fn jacobian_det(b: &BlockSpec, xi: f64, eta: f64, kappa: f64) -> Result<f64, TfiError> {
    let rx = covariant_vector(b, xi, eta, kappa, Axis::Xi)?;
    let re = covariant_vector(b, xi, eta, kappa, Axis::Eta)?;
    let rk = covariant_vector(b, xi, eta, kappa, Axis::Kappa)?;
    Ok(det3(rx, re, rk))
}

/// Node, cell, and face counts of an (nx, ny, nz) structured block.
pub fn mesh_counts(resolution: (usize, usize, usize)) -> Result<(usize, usize, usize), TfiError> {
    let (nx, ny, nz) = resolution;
    for (n, axis) in [(nx, Axis::Xi), (ny, Axis::Eta), (nz, Axis::Kappa)] {
        if n == 0 {
            return Err(TfiError::Resolution { axis, got: n });
        }
    }
    let nodes = (nx + 1) * (ny + 1) * (nz + 1);
    let cells = nx * ny * nz;
    let faces = nx * ny * (nz + 1) + nx * nz * (ny + 1) + ny * nz * (nx + 1);
    Ok((nodes, cells, faces))
}

/// Structured grid: physical node positions on an (nx+1)(ny+1)(nz+1)
/// lattice, lexicographic with ix fastest.
#[derive(Clone, Debug)]
pub struct StructuredGrid {
    resolution: (usize, usize, usize),
    nodes: Vec<Vec3>,
    material: String,
}

impl StructuredGrid {
    pub fn resolution(&self) -> (usize, usize, usize) {
        self.resolution
    }

    pub fn material(&self) -> &str {
        &self.material
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        let (nx, ny, nz) = self.resolution;
        nx * ny * nz
    }

    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn node_index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        let (nx, ny, _) = self.resolution;
        debug_assert!(ix <= nx && iy <= self.resolution.1 && iz <= self.resolution.2);
        ix + (nx + 1) * (iy + (ny + 1) * iz)
    }

    pub fn node(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.nodes[self.node_index(ix, iy, iz)]
    }

    /// Node ids of cell (cx, cy, cz), ordered by the local corner
    /// convention id = dx + 2 dy + 4 dz over the unit cube corners.
    pub fn cell_corner_ids(&self, cx: usize, cy: usize, cz: usize) -> [usize; 8] {
        let mut ids = [0usize; 8];
        for (k, id) in ids.iter_mut().enumerate() {
            let (dx, dy, dz) = (k & 1, (k >> 1) & 1, (k >> 2) & 1);
            *id = self.node_index(cx + dx, cy + dy, cz + dz);
        }
        ids
    }
}

/// Generates the structured grid of a block: boundary conformity is
/// validated, then every lattice node is mapped through the boolean sum
/// at its (optionally graded) reference coordinates.
pub fn generate_grid(b: &BlockSpec) -> Result<StructuredGrid, TfiError> {
    validate_conformity(b)?;
    let (nx, ny, nz) = b.resolution;
    let (gx, gy, gz) = (b.grading(Axis::Xi), b.grading(Axis::Eta), b.grading(Axis::Kappa));
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for iz in 0..=nz {
        let kappa = gz.apply(iz as f64 / nz as f64);
        for iy in 0..=ny {
            let eta = gy.apply(iy as f64 / ny as f64);
            for ix in 0..=nx {
                let xi = gx.apply(ix as f64 / nx as f64);
                nodes.push(boolean_sum_eval(b, xi, eta, kappa)?);
            }
        }
    }
    Ok(StructuredGrid { resolution: b.resolution, nodes, material: b.material.clone() })
}
