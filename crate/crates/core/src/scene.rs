//! Declarative scene files: a JSON document describing blocks (bounding
//! surfaces, projector family per axis, resolution, grading, material),
//! a material table, and an optional pressure problem. Parsing validates
//! everything it can and reports all findings at once rather than
//! stopping at the first.

use crate::fvsolve::{
    no_flow_boundary, set_by_tag, source_at_centers, BoundaryCondition, FvError,
    PermeabilityField, PressureProblem,
};
use crate::geometry::Side;
use crate::math::{Axis, Vec3};
use crate::multiblock::MultiblockMesh;
use crate::projectors::{Knots, Projector};
use crate::surfaces::{DerivativeField, HeightFn, ParametricSurface, SinTerm};
use crate::tfi::{validate_conformity, BlockSpec, Grading};
use serde::Deserialize;
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

/// One validation finding: a stable machine-readable code, the JSON path
/// it refers to, and a human-readable explanation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneIssue {
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SceneIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}] {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read scene file: {0}")]
    Io(#[from] std::io::Error),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{} validation issue(s)", .0.len())]
    Invalid(Vec<SceneIssue>),
}

/// A block that parsed and validated cleanly.
#[derive(Debug)]
pub struct SceneBlock {
    pub id: String,
    pub spec: BlockSpec,
}

/// Boundary condition bound to one side of one block.
#[derive(Clone, Copy, Debug)]
pub struct BoundarySpec {
    pub block: usize,
    pub side: Side,
    pub condition: BoundaryCondition,
}

#[derive(Debug)]
pub struct ProblemSpec {
    pub boundary: Vec<BoundarySpec>,
    /// Constant source density f; integrated per cell as f times volume.
    pub source: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

#[derive(Debug)]
pub struct SceneSpec {
    pub blocks: Vec<SceneBlock>,
    /// Material name to permeability.
    pub materials: BTreeMap<String, f64>,
    /// Node-merge tolerance; when absent the assembler default applies.
    pub merge_tolerance: Option<f64>,
    pub problem: Option<ProblemSpec>,
    pub title: String,
}

// ---- raw deserialization layer -------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    #[serde(default)]
    blocks: Vec<Value>,
    #[serde(default)]
    materials: BTreeMap<String, RawMaterial>,
    #[serde(default)]
    merge_tolerance: Option<f64>,
    #[serde(default)]
    problem: Option<Value>,
    #[serde(default)]
    output: Option<RawOutput>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    permeability: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    title: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlock {
    id: String,
    material: String,
    resolution: [usize; 3],
    projectors: RawProjectors,
    #[serde(default)]
    grading: RawGrading,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProjectors {
    xi: Value,
    eta: Value,
    kappa: Value,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrading {
    xi: Option<Value>,
    eta: Option<Value>,
    kappa: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "lowercase")]
enum RawGradingKind {
    Uniform,
    Power { exponent: f64 },
    Cosine,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "lowercase")]
enum RawProjector {
    Linear { surfaces: [Value; 2] },
    Lagrangian { knots: Vec<f64>, surfaces: Vec<Value> },
    Hermite { surfaces: [Value; 2], derivatives: [Value; 2] },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "form", rename_all = "lowercase")]
enum RawSurface {
    Plane { origin: [f64; 3], u: [f64; 3], v: [f64; 3] },
    Bilinear { corners: [[f64; 3]; 4] },
    Graph { x_range: [f64; 2], y_range: [f64; 2], height: RawHeight },
    Discrete { rows: Vec<Vec<[f64; 3]>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum RawHeight {
    Polynomial { coeffs: Vec<Vec<f64>> },
    Sinusoidal { base: f64, #[serde(default)] terms: Vec<RawSinTerm> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSinTerm {
    amplitude: f64,
    freq_x: f64,
    freq_y: f64,
    #[serde(default)]
    phase_x: f64,
    #[serde(default)]
    phase_y: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
enum RawField {
    Constant { vector: [f64; 3] },
    Bilinear { corners: [[f64; 3]; 4] },
    Vertical { x_range: [f64; 2], y_range: [f64; 2], height: RawHeight },
    Discrete { rows: Vec<Vec<[f64; 3]>> },
}

fn default_tolerance() -> f64 {
    1e-10
}

fn default_max_iterations() -> usize {
    10_000
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(default)]
    boundary: Vec<Value>,
    #[serde(default)]
    source: f64,
    #[serde(default = "default_tolerance")]
    tolerance: f64,
    #[serde(default = "default_max_iterations")]
    max_iterations: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "lowercase")]
enum RawBc {
    Dirichlet {
        #[serde(rename = "where")]
        location: String,
        value: f64,
    },
    Neumann {
        #[serde(rename = "where")]
        location: String,
        flux: f64,
    },
}

// ---- building -------------------------------------------------------------

struct Collector {
    issues: Vec<SceneIssue>,
}

impl Collector {
    fn push(&mut self, code: &'static str, path: String, message: impl ToString) {
        self.issues.push(SceneIssue { code, path, message: message.to_string() });
    }
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::from(a)
}

fn rows_to_points(rows: Vec<Vec<[f64; 3]>>) -> Vec<Vec<Vec3>> {
    rows.into_iter().map(|r| r.into_iter().map(vec3).collect()).collect()
}

fn build_height(h: RawHeight) -> HeightFn {
    match h {
        RawHeight::Polynomial { coeffs } => HeightFn::Polynomial { coeffs },
        RawHeight::Sinusoidal { base, terms } => HeightFn::Sinusoidal {
            base,
            terms: terms
                .into_iter()
                .map(|t| SinTerm {
                    amplitude: t.amplitude,
                    freq_x: t.freq_x,
                    freq_y: t.freq_y,
                    phase_x: t.phase_x,
                    phase_y: t.phase_y,
                })
                .collect(),
        },
    }
}

fn build_surface(
    axis: Axis,
    value: Value,
    path: &str,
    out: &mut Collector,
) -> Option<ParametricSurface> {
    let raw: RawSurface = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-surface", path.to_string(), e);
            return None;
        }
    };
    let built = match raw {
        RawSurface::Plane { origin, u, v } => {
            ParametricSurface::plane(axis, vec3(origin), vec3(u), vec3(v))
        }
        RawSurface::Bilinear { corners } => ParametricSurface::bilinear(
            axis,
            [vec3(corners[0]), vec3(corners[1]), vec3(corners[2]), vec3(corners[3])],
        ),
        RawSurface::Graph { x_range, y_range, height } => ParametricSurface::graph(
            axis,
            (x_range[0], x_range[1]),
            (y_range[0], y_range[1]),
            build_height(height),
        ),
        RawSurface::Discrete { rows } => ParametricSurface::discrete(axis, rows_to_points(rows)),
    };
    match built {
        Ok(s) => Some(s),
        Err(e) => {
            out.push("bad-surface", path.to_string(), e);
            None
        }
    }
}

fn build_field(axis: Axis, value: Value, path: &str, out: &mut Collector) -> Option<DerivativeField> {
    let raw: RawField = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-derivative", path.to_string(), e);
            return None;
        }
    };
    let built = match raw {
        RawField::Constant { vector } => DerivativeField::constant(axis, vec3(vector)),
        RawField::Bilinear { corners } => DerivativeField::bilinear(
            axis,
            [vec3(corners[0]), vec3(corners[1]), vec3(corners[2]), vec3(corners[3])],
        ),
        RawField::Vertical { x_range, y_range, height } => DerivativeField::vertical(
            axis,
            (x_range[0], x_range[1]),
            (y_range[0], y_range[1]),
            build_height(height),
        ),
        RawField::Discrete { rows } => DerivativeField::discrete(axis, rows_to_points(rows)),
    };
    match built {
        Ok(f) => Some(f),
        Err(e) => {
            out.push("bad-derivative", path.to_string(), e);
            None
        }
    }
}

fn build_projector(axis: Axis, value: Value, path: &str, out: &mut Collector) -> Option<Projector> {
    let raw: RawProjector = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-projector", path.to_string(), e);
            return None;
        }
    };
    match raw {
        RawProjector::Linear { surfaces } => {
            let [a, b] = surfaces;
            let s0 = build_surface(axis, a, &format!("{path}.surfaces[0]"), out);
            let s1 = build_surface(axis, b, &format!("{path}.surfaces[1]"), out);
            let (s0, s1) = (s0?, s1?);
            match Projector::linear(axis, s0, s1) {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push("bad-projector", path.to_string(), e);
                    None
                }
            }
        }
        RawProjector::Lagrangian { knots, surfaces } => {
            let knots = match Knots::new(knots) {
                Ok(k) => Some(k),
                Err(e) => {
                    out.push("bad-knots", format!("{path}.knots"), e);
                    None
                }
            };
            let mut built = Vec::new();
            let mut complete = true;
            for (i, s) in surfaces.into_iter().enumerate() {
                match build_surface(axis, s, &format!("{path}.surfaces[{i}]"), out) {
                    Some(s) => built.push(s),
                    None => complete = false,
                }
            }
            let knots = knots?;
            if !complete {
                return None;
            }
            match Projector::lagrangian(axis, knots, built) {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push("surface-count", path.to_string(), e);
                    None
                }
            }
        }
        RawProjector::Hermite { surfaces, derivatives } => {
            let [sa, sb] = surfaces;
            let [da, db] = derivatives;
            let s0 = build_surface(axis, sa, &format!("{path}.surfaces[0]"), out);
            let s1 = build_surface(axis, sb, &format!("{path}.surfaces[1]"), out);
            let d0 = build_field(axis, da, &format!("{path}.derivatives[0]"), out);
            let d1 = build_field(axis, db, &format!("{path}.derivatives[1]"), out);
            let (s0, s1, d0, d1) = (s0?, s1?, d0?, d1?);
            match Projector::hermite(axis, s0, s1, d0, d1) {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push("bad-projector", path.to_string(), e);
                    None
                }
            }
        }
    }
}

fn build_grading(slot: Option<Value>, path: &str, out: &mut Collector) -> Option<Grading> {
    let value = slot?;
    let raw: RawGradingKind = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-grading", path.to_string(), e);
            return None;
        }
    };
    let grading = match raw {
        RawGradingKind::Uniform => Grading::Uniform,
        RawGradingKind::Power { exponent } => Grading::Power { exponent },
        RawGradingKind::Cosine => Grading::Cosine,
    };
    match grading.validate() {
        Ok(g) => Some(g),
        Err(e) => {
            out.push("bad-grading", path.to_string(), e);
            None
        }
    }
}

fn build_block(
    index: usize,
    value: Value,
    materials: &BTreeMap<String, f64>,
    out: &mut Collector,
) -> Option<(String, BlockSpec)> {
    let path = format!("blocks[{index}]");
    let raw: RawBlock = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-block", path, e);
            return None;
        }
    };
    let mut ok = true;
    if raw.id.is_empty() || raw.id.contains('.') {
        out.push(
            "bad-block-id",
            format!("{path}.id"),
            format!("block id {:?} must be nonempty and must not contain '.'", raw.id),
        );
        ok = false;
    }
    if !materials.contains_key(&raw.material) {
        out.push(
            "unknown-material",
            format!("{path}.material"),
            format!("material {:?} is not defined in the materials table", raw.material),
        );
        ok = false;
    }
    if raw.resolution.iter().any(|&n| n == 0) {
        out.push(
            "bad-resolution",
            format!("{path}.resolution"),
            format!("every direction needs at least one cell, got {:?}", raw.resolution),
        );
        ok = false;
    }

    let p_xi = build_projector(Axis::Xi, raw.projectors.xi, &format!("{path}.projectors.xi"), out);
    let p_eta =
        build_projector(Axis::Eta, raw.projectors.eta, &format!("{path}.projectors.eta"), out);
    let p_kappa =
        build_projector(Axis::Kappa, raw.projectors.kappa, &format!("{path}.projectors.kappa"), out);

    let gradings = [
        build_grading(raw.grading.xi, &format!("{path}.grading.xi"), out),
        build_grading(raw.grading.eta, &format!("{path}.grading.eta"), out),
        build_grading(raw.grading.kappa, &format!("{path}.grading.kappa"), out),
    ];

    if !ok {
        return None;
    }
    let (p_xi, p_eta, p_kappa) = (p_xi?, p_eta?, p_kappa?);
    let resolution = (raw.resolution[0], raw.resolution[1], raw.resolution[2]);
    let mut spec = match BlockSpec::new(p_xi, p_eta, p_kappa, resolution, &raw.material) {
        Ok(spec) => spec,
        Err(e) => {
            out.push("bad-block", path, e);
            return None;
        }
    };
    for (axis, g) in Axis::ALL.into_iter().zip(gradings) {
        if let Some(g) = g {
            spec = match spec.with_grading(axis, g) {
                Ok(spec) => spec,
                Err(e) => {
                    out.push("bad-grading", format!("{path}.grading.{}", axis.name()), e);
                    return None;
                }
            };
        }
    }
    if let Err(e) = validate_conformity(&spec) {
        out.push("edge-mismatch", path.clone(), e);
        return None;
    }
    Some((raw.id, spec))
}

fn build_problem_spec(
    value: Value,
    block_ids: &[String],
    out: &mut Collector,
) -> Option<ProblemSpec> {
    let raw: RawProblem = match serde_json::from_value(value) {
        Ok(raw) => raw,
        Err(e) => {
            out.push("bad-problem", "problem".to_string(), e);
            return None;
        }
    };
    let mut boundary = Vec::new();
    let mut ok = true;
    let mut any_dirichlet = false;
    for (i, bc) in raw.boundary.into_iter().enumerate() {
        let path = format!("problem.boundary[{i}]");
        let raw_bc: RawBc = match serde_json::from_value(bc) {
            Ok(raw) => raw,
            Err(e) => {
                out.push("bad-boundary", path, e);
                ok = false;
                continue;
            }
        };
        let (location, condition) = match raw_bc {
            RawBc::Dirichlet { location, value } => {
                any_dirichlet = true;
                (location, BoundaryCondition::Dirichlet(value))
            }
            RawBc::Neumann { location, flux } => (location, BoundaryCondition::Neumann(flux)),
        };
        let Some((block_id, side_name)) = location.rsplit_once('.') else {
            out.push(
                "bad-side-name",
                format!("{path}.where"),
                format!("{location:?} is not of the form <block>.<side>"),
            );
            ok = false;
            continue;
        };
        let block = block_ids.iter().position(|id| id == block_id);
        if block.is_none() {
            out.push(
                "unknown-block-in-where",
                format!("{path}.where"),
                format!("block {block_id:?} is not declared"),
            );
            ok = false;
        }
        let side = Side::from_name(side_name);
        if side.is_none() {
            out.push(
                "bad-side-name",
                format!("{path}.where"),
                format!("{side_name:?} is not a side (xi0, xi1, eta0, eta1, kappa0, kappa1)"),
            );
            ok = false;
        }
        if let (Some(block), Some(side)) = (block, side) {
            boundary.push(BoundarySpec { block, side, condition });
        }
    }
    if !any_dirichlet {
        out.push(
            "all-neumann",
            "problem.boundary".to_string(),
            "the pressure problem needs at least one dirichlet condition",
        );
        ok = false;
    }
    if !(raw.tolerance.is_finite() && raw.tolerance > 0.0) {
        out.push(
            "bad-solver-tolerance",
            "problem.tolerance".to_string(),
            format!("must be positive and finite, got {}", raw.tolerance),
        );
        ok = false;
    }
    if raw.max_iterations == 0 {
        out.push(
            "bad-iteration-limit",
            "problem.max_iterations".to_string(),
            "must be at least 1",
        );
        ok = false;
    }
    if !raw.source.is_finite() {
        out.push("bad-source", "problem.source".to_string(), "must be finite");
        ok = false;
    }
    if !ok {
        return None;
    }
    Some(ProblemSpec {
        boundary,
        source: raw.source,
        tolerance: raw.tolerance,
        max_iterations: raw.max_iterations,
    })
}

/// Parses and validates a scene document. Syntax errors carry line and
/// column; semantic findings are collected across the whole document.
pub fn parse_scene_str(text: &str) -> Result<SceneSpec, SceneError> {
    let raw: RawScene = serde_json::from_str(text).map_err(|e| SceneError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut out = Collector { issues: Vec::new() };

    let mut materials = BTreeMap::new();
    for (name, m) in raw.materials {
        if !(m.permeability.is_finite() && m.permeability > 0.0) {
            out.push(
                "nonpositive-permeability",
                format!("materials.{name}"),
                format!("permeability must be positive and finite, got {}", m.permeability),
            );
            continue;
        }
        materials.insert(name, m.permeability);
    }

    if raw.blocks.is_empty() {
        out.push("no-blocks", "blocks".to_string(), "a scene needs at least one block");
    }
    let mut blocks = Vec::new();
    let mut ids: Vec<String> = Vec::new();
    for (i, value) in raw.blocks.into_iter().enumerate() {
        let Some((id, spec)) = build_block(i, value, &materials, &mut out) else {
            // Keep a placeholder id so later blocks keep their indices
            // and boundary clauses can still resolve them.
            ids.push(String::new());
            continue;
        };
        if ids.iter().any(|seen| *seen == id) {
            out.push(
                "duplicate-block-id",
                format!("blocks[{i}].id"),
                format!("block id {id:?} is already used"),
            );
            ids.push(String::new());
            continue;
        }
        ids.push(id.clone());
        blocks.push(SceneBlock { id, spec });
    }

    if let Some(t) = raw.merge_tolerance {
        if !(t.is_finite() && t > 0.0) {
            out.push(
                "bad-merge-tolerance",
                "merge_tolerance".to_string(),
                format!("must be positive and finite, got {t}"),
            );
        }
    }

    let problem = raw.problem.and_then(|value| build_problem_spec(value, &ids, &mut out));

    if !out.issues.is_empty() {
        return Err(SceneError::Invalid(out.issues));
    }
    let title = raw
        .output
        .and_then(|o| o.title)
        .unwrap_or_else(|| "meshgen output".to_string());
    Ok(SceneSpec { blocks, materials, merge_tolerance: raw.merge_tolerance, problem, title })
}

/// Reads and parses a scene file; see [`parse_scene_str`].
pub fn parse_spec(path: &Path) -> Result<SceneSpec, SceneError> {
    let text = std::fs::read_to_string(path)?;
    parse_scene_str(&text)
}

/// Instantiates the scene's pressure problem on an assembled mesh.
/// Returns Ok(None) when the scene has no problem section.
pub fn build_problem<'a>(
    scene: &SceneSpec,
    mesh: &'a MultiblockMesh,
) -> Result<Option<PressureProblem<'a>>, SceneError> {
    let Some(spec) = &scene.problem else {
        return Ok(None);
    };
    let mut boundary = no_flow_boundary(mesh);
    let mut issues = Vec::new();
    for (i, bc) in spec.boundary.iter().enumerate() {
        let matched = set_by_tag(mesh, &mut boundary, bc.block, bc.side, bc.condition);
        if matched == 0 {
            issues.push(SceneIssue {
                code: "unmatched-boundary",
                path: format!("problem.boundary[{i}]"),
                message: format!(
                    "no boundary face carries tag block {} side {}; the side may be an interior interface",
                    bc.block, bc.side
                ),
            });
        }
    }
    if !issues.is_empty() {
        return Err(SceneError::Invalid(issues));
    }
    let permeability = PermeabilityField::new(
        scene.materials.iter().map(|(name, &k)| (name.clone(), k)),
    )
    .map_err(fv_issue)?;
    let source = source_at_centers(mesh, |_| spec.source);
    let problem = PressureProblem::new(
        mesh,
        permeability,
        source,
        boundary,
        spec.tolerance,
        spec.max_iterations,
    )
    .map_err(fv_issue)?;
    Ok(Some(problem))
}

fn fv_issue(e: FvError) -> SceneError {
    SceneError::Invalid(vec![SceneIssue {
        code: "bad-problem",
        path: "problem".to_string(),
        message: e.to_string(),
    }])
}
