//! Two-point flux finite-volume discretization of the steady
//! single-phase pressure equation div(-K grad p) = f on an assembled
//! mesh, with a conjugate-gradient solver. The two-point scheme is the
//! minimal realization of the face-flux integral; it is consistent on
//! K-orthogonal grids (face normal parallel to the center-to-center
//! line) and that limitation is deliberate.

use crate::math::Vec3;
use crate::multiblock::{Face, MultiblockMesh};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FvError {
    #[error("permeability for material {0:?} must be positive and finite, got {1}")]
    BadPermeability(String, f64),
    #[error("no permeability defined for material {0:?}")]
    UnknownMaterial(String),
    #[error("got {got} source values for {want} cells")]
    SourceLength { got: usize, want: usize },
    #[error("got {got} boundary condition slots for {want} faces")]
    BoundaryLength { got: usize, want: usize },
    #[error("boundary condition set on interior face {0}")]
    InteriorCondition(usize),
    #[error("solver tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error("iteration limit must be at least 1")]
    BadIterationLimit,
    #[error("problem is singular: every boundary face is Neumann or unset")]
    AllNeumann,
    #[error("conjugate gradients stalled after {iterations} iterations, relative residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Isotropic scalar permeability per material name.
#[derive(Clone, Debug)]
pub struct PermeabilityField {
    values: HashMap<String, f64>,
}

impl PermeabilityField {
    pub fn new(values: impl IntoIterator<Item = (String, f64)>) -> Result<Self, FvError> {
        let values: HashMap<String, f64> = values.into_iter().collect();
        for (name, &k) in &values {
            if !(k.is_finite() && k > 0.0) {
                return Err(FvError::BadPermeability(name.clone(), k));
            }
        }
        Ok(PermeabilityField { values })
    }

    pub fn get(&self, material: &str) -> Option<f64> {
        self.values.get(material).copied()
    }
}

/// Condition on one boundary face. Neumann prescribes the total outward
/// volumetric flux through the face; an unset face defaults to no flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    Neumann(f64),
}

/// Steady pressure problem on an assembled mesh: -div(K grad p) = f with
/// per-face boundary data. Source values are point values of f at cell
/// centers; the discrete right-hand side integrates them with the
/// midpoint rule f(center) * volume.
#[derive(Debug)]
pub struct PressureProblem<'a> {
    mesh: &'a MultiblockMesh,
    permeability: PermeabilityField,
    source: Vec<f64>,
    boundary: Vec<Option<BoundaryCondition>>,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl<'a> PressureProblem<'a> {
    pub fn new(
        mesh: &'a MultiblockMesh,
        permeability: PermeabilityField,
        source: Vec<f64>,
        boundary: Vec<Option<BoundaryCondition>>,
        tolerance: f64,
        max_iterations: usize,
    ) -> Result<Self, FvError> {
        if source.len() != mesh.cell_count() {
            return Err(FvError::SourceLength { got: source.len(), want: mesh.cell_count() });
        }
        if boundary.len() != mesh.face_count() {
            return Err(FvError::BoundaryLength { got: boundary.len(), want: mesh.face_count() });
        }
        for (i, (face, bc)) in mesh.faces().iter().zip(&boundary).enumerate() {
            if face.neighbor.is_some() && bc.is_some() {
                return Err(FvError::InteriorCondition(i));
            }
        }
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(FvError::BadTolerance(tolerance));
        }
        if max_iterations == 0 {
            return Err(FvError::BadIterationLimit);
        }
        for cell in mesh.cells() {
            if permeability.get(&cell.material).is_none() {
                return Err(FvError::UnknownMaterial(cell.material.clone()));
            }
        }
        Ok(PressureProblem { mesh, permeability, source, boundary, tolerance, max_iterations })
    }

    pub fn mesh(&self) -> &MultiblockMesh {
        self.mesh
    }

    pub fn source(&self) -> &[f64] {
        &self.source
    }

    pub fn boundary(&self) -> &[Option<BoundaryCondition>] {
        &self.boundary
    }

    pub fn permeability(&self) -> &PermeabilityField {
        &self.permeability
    }

    fn cell_k(&self, cell: usize) -> f64 {
        self.permeability
            .get(&self.mesh.cells()[cell].material)
            .expect("materials were validated at construction")
    }
}

/// An all-unset (no-flow) boundary condition vector for the mesh.
pub fn no_flow_boundary(mesh: &MultiblockMesh) -> Vec<Option<BoundaryCondition>> {
    vec![None; mesh.face_count()]
}

/// Sets `bc` on every boundary face tagged with the given block side.
/// Returns how many faces matched.
pub fn set_by_tag(
    mesh: &MultiblockMesh,
    boundary: &mut [Option<BoundaryCondition>],
    block: usize,
    side: crate::geometry::Side,
    bc: BoundaryCondition,
) -> usize {
    let mut n = 0;
    for (slot, face) in boundary.iter_mut().zip(mesh.faces()) {
        if face.boundary.is_some_and(|t| t.block == block && t.side == side) {
            *slot = Some(bc);
            n += 1;
        }
    }
    n
}

/// Dirichlet data on every boundary face, sampled from `p` at the face
/// center.
pub fn dirichlet_from(
    mesh: &MultiblockMesh,
    boundary: &mut [Option<BoundaryCondition>],
    p: impl Fn(Vec3) -> f64,
) {
    for (slot, face) in boundary.iter_mut().zip(mesh.faces()) {
        if face.neighbor.is_none() {
            *slot = Some(BoundaryCondition::Dirichlet(p(face.geometry.center)));
        }
    }
}

/// Source vector sampled at cell centers.
pub fn source_at_centers(mesh: &MultiblockMesh, f: impl Fn(Vec3) -> f64) -> Vec<f64> {
    mesh.cells().iter().map(|c| f(c.center)).collect()
}

/// Sparse symmetric cell-by-cell system with its right-hand side.
/// Off-diagonal entries are stored per row, sorted by column; symmetric
/// pairs are written together so transposed entries are bit-identical.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    diag: Vec<f64>,
    off: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl LinearSystem {
    fn new(n: usize) -> Self {
        LinearSystem { diag: vec![0.0; n], off: vec![Vec::new(); n], rhs: vec![0.0; n] }
    }

    fn add(&mut self, row: usize, col: usize, value: f64) {
        if row == col {
            self.diag[row] += value;
        } else {
            self.off[row].push((col, value));
        }
    }

    fn finalize(&mut self) {
        for row in &mut self.off {
            row.sort_unstable_by_key(|&(col, _)| col);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(col, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == col => last.1 += v,
                    _ => merged.push((col, v)),
                }
            }
            *row = merged;
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        if row == col {
            return self.diag[row];
        }
        self.off[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map_or(0.0, |i| self.off[row][i].1)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.len()];
        for i in 0..self.len() {
            let mut s = self.diag[i] * x[i];
            for &(j, v) in &self.off[i] {
                s += v * x[j];
            }
            y[i] = s;
        }
        y
    }
}

/// A face whose two-point transmissibility came out nonpositive or
/// non-finite, which signals a severely distorted cell. Non-finite
/// couplings are dropped from the matrix so the rest stays well-defined.
#[derive(Clone, Copy, Debug)]
pub struct TransmissibilityWarning {
    pub face: usize,
    pub transmissibility: f64,
}

/// K times the projection of the area-weighted normal onto the direction
/// from cell center to face center, divided by that distance.
fn half_transmissibility(k: f64, area_normal: Vec3, face_center: Vec3, cell_center: Vec3) -> f64 {
    let d = face_center - cell_center;
    k * area_normal.dot(d) / d.norm_squared()
}

enum FaceCoupling {
    Interior { neighbor: usize, t: f64 },
    Dirichlet { t: f64, value: f64 },
    Flux(f64),
}

/// Transmissibility (and boundary data) of one face as the owner sees it.
fn face_coupling(problem: &PressureProblem, index: usize) -> FaceCoupling {
    let face: &Face = &problem.mesh().faces()[index];
    let geo = &face.geometry;
    let owner_center = problem.mesh().cells()[face.owner].center;
    let t_owner =
        half_transmissibility(problem.cell_k(face.owner), geo.area_normal, geo.center, owner_center);
    match face.neighbor {
        Some(n) => {
            let neighbor_center = problem.mesh().cells()[n].center;
            let t_neighbor = half_transmissibility(
                problem.cell_k(n),
                geo.area_normal * -1.0,
                geo.center,
                neighbor_center,
            );
            FaceCoupling::Interior { neighbor: n, t: t_owner * t_neighbor / (t_owner + t_neighbor) }
        }
        None => match problem.boundary()[index] {
            Some(BoundaryCondition::Dirichlet(value)) => {
                FaceCoupling::Dirichlet { t: t_owner, value }
            }
            Some(BoundaryCondition::Neumann(q)) => FaceCoupling::Flux(q),
            None => FaceCoupling::Flux(0.0),
        },
    }
}

/// Assembles the two-point flux system. Each interior face couples its
/// two cells through the harmonic mean of the half transmissibilities;
/// Dirichlet faces couple the owner to the boundary value through the
/// owner's half transmissibility alone.
pub fn assemble_tpfa(
    problem: &PressureProblem,
) -> Result<(LinearSystem, Vec<TransmissibilityWarning>), FvError> {
    let mesh = problem.mesh();
    if !problem
        .boundary()
        .iter()
        .any(|bc| matches!(bc, Some(BoundaryCondition::Dirichlet(_))))
    {
        return Err(FvError::AllNeumann);
    }

    let mut sys = LinearSystem::new(mesh.cell_count());
    let mut warnings = Vec::new();
    for (c, cell) in mesh.cells().iter().enumerate() {
        sys.rhs[c] = problem.source()[c] * cell.volume;
    }
    for (fi, face) in mesh.faces().iter().enumerate() {
        match face_coupling(problem, fi) {
            FaceCoupling::Interior { neighbor, t } => {
                if !(t.is_finite() && t > 0.0) {
                    warnings.push(TransmissibilityWarning { face: fi, transmissibility: t });
                    if !t.is_finite() {
                        continue;
                    }
                }
                sys.add(face.owner, face.owner, t);
                sys.add(neighbor, neighbor, t);
                sys.add(face.owner, neighbor, -t);
                sys.add(neighbor, face.owner, -t);
            }
            FaceCoupling::Dirichlet { t, value } => {
                if !(t.is_finite() && t > 0.0) {
                    warnings.push(TransmissibilityWarning { face: fi, transmissibility: t });
                    if !t.is_finite() {
                        continue;
                    }
                }
                sys.add(face.owner, face.owner, t);
                sys.rhs[face.owner] += t * value;
            }
            FaceCoupling::Flux(q) => {
                sys.rhs[face.owner] -= q;
            }
        }
    }
    sys.finalize();
    Ok((sys, warnings))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients from the zero start vector; stops when the
/// residual norm relative to the right-hand side drops to `tol`. The
/// iteration order is fixed, so results are deterministic.
pub fn solve_pressure(
    sys: &LinearSystem,
    tol: f64,
    max_iterations: usize,
) -> Result<Vec<f64>, FvError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(FvError::BadTolerance(tol));
    }
    let n = sys.len();
    let b_norm = dot(sys.rhs(), sys.rhs()).sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut x = vec![0.0; n];
    let mut r = sys.rhs().to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for _ in 0..max_iterations {
        if rr.sqrt() <= tol * b_norm {
            return Ok(x);
        }
        let ap = sys.matvec(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rr.sqrt() <= tol * b_norm {
        return Ok(x);
    }
    Err(FvError::NoConvergence { iterations: max_iterations, residual: rr.sqrt() / b_norm })
}

/// Per-face fluxes for a solved pressure field, positive from owner to
/// neighbor (outward through boundary faces). Dirichlet faces carry the
/// half-cell flux toward the boundary value, Neumann faces their
/// prescribed flux, unset faces zero.
pub fn compute_fluxes(problem: &PressureProblem, pressure: &[f64]) -> Vec<f64> {
    (0..problem.mesh().face_count())
        .map(|fi| {
            let owner = problem.mesh().faces()[fi].owner;
            match face_coupling(problem, fi) {
                FaceCoupling::Interior { neighbor, t } => t * (pressure[owner] - pressure[neighbor]),
                FaceCoupling::Dirichlet { t, value } => t * (pressure[owner] - value),
                FaceCoupling::Flux(q) => q,
            }
        })
        .collect()
}

/// Discrete conservation residual per cell: outward flux sum minus the
/// cell's source integral.
pub fn flux_balance(problem: &PressureProblem, fluxes: &[f64]) -> Vec<f64> {
    let mesh = problem.mesh();
    let mut residual: Vec<f64> = mesh
        .cells()
        .iter()
        .enumerate()
        .map(|(c, cell)| -problem.source()[c] * cell.volume)
        .collect();
    for (face, &q) in mesh.faces().iter().zip(fluxes) {
        residual[face.owner] += q;
        if let Some(n) = face.neighbor {
            residual[n] -= q;
        }
    }
    residual
}
