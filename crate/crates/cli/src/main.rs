//! Command-line driver: parse a scene file, generate block grids, merge
//! them into one mesh, optionally solve the pressure problem, and write
//! legacy VTK plus reports. Exit codes: 0 success, 1 validation error,
//! 2 runtime error. Diagnostics go to stderr; `--report` prints a JSON
//! report to stdout.

use clap::{Parser, Subcommand};
use meshgen_core::fvsolve::{assemble_tpfa, compute_fluxes, flux_balance, solve_pressure};
use meshgen_core::math::Axis;
use meshgen_core::multiblock::{
    assemble_multiblock, default_merge_tolerance, interface_report, InterfaceReport, MultiblockMesh,
};
use meshgen_core::scene::{build_problem, parse_spec, SceneError, SceneSpec};
use meshgen_core::tfi::{generate_grid, jacobian_det, mesh_counts, BlockSpec, StructuredGrid};
use meshgen_core::vtk::{export_vtk, material_table};
use rayon::prelude::*;
use serde_json::json;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "meshgen", version, about = "Structured multiblock hexahedral mesh generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Cap on worker threads for block generation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<NonZeroUsize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the mesh and write a VTK file.
    Generate {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Print a JSON report to stdout.
        #[arg(long)]
        report: bool,
    },
    /// Generate the mesh, solve its pressure problem, and write a VTK file.
    Solve {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Print a JSON report to stdout.
        #[arg(long)]
        report: bool,
    },
    /// Print mesh statistics without writing any output file.
    Inspect {
        spec: PathBuf,
        /// Print a JSON report to stdout.
        #[arg(long)]
        report: bool,
    },
    /// Validate the scene file and exit.
    Check { spec: PathBuf },
}

enum CliError {
    Validation(Vec<String>),
    Runtime(String),
}

impl CliError {
    fn runtime(what: &str, e: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("error: {what}: {e}"))
    }
}

fn load_scene(path: &Path) -> Result<SceneSpec, CliError> {
    match parse_spec(path) {
        Ok(scene) => Ok(scene),
        Err(SceneError::Invalid(issues)) => Err(CliError::Validation(
            issues.iter().map(|i| format!("error: {i}")).collect(),
        )),
        Err(e) => Err(CliError::Validation(vec![format!("error: {e}")])),
    }
}

fn generate_blocks(scene: &SceneSpec, threads: Option<NonZeroUsize>) -> Result<Vec<StructuredGrid>, CliError> {
    let generate_all = || {
        scene
            .blocks
            .par_iter()
            .map(|b| generate_grid(&b.spec))
            .collect::<Result<Vec<_>, _>>()
    };
    let grids = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.get())
            .build()
            .map_err(|e| CliError::runtime("thread pool", e))?
            .install(generate_all),
        None => generate_all(),
    }
    .map_err(|e| CliError::runtime("block generation", e))?;
    for (block, grid) in scene.blocks.iter().zip(&grids) {
        let (nodes, cells, _) = mesh_counts(grid.resolution()).expect("resolution was validated");
        log::info!("generated block {} ({} nodes, {} cells)", block.id, nodes, cells);
    }
    Ok(grids)
}

fn assemble(scene: &SceneSpec, grids: &[StructuredGrid]) -> Result<MultiblockMesh, CliError> {
    let merge_tol = scene.merge_tolerance.unwrap_or_else(|| default_merge_tolerance(grids));
    log::info!("merging {} blocks with tolerance {merge_tol:e}", grids.len());
    assemble_multiblock(grids, merge_tol).map_err(|e| CliError::runtime("assembly", e))
}

/// Smallest transformation Jacobian over all cell parameter centers of
/// the block, honoring its grading.
fn min_jacobian(spec: &BlockSpec) -> f64 {
    let (nx, ny, nz) = spec.resolution();
    let centers = |axis: Axis, n: usize| -> Vec<f64> {
        let g = spec.grading(axis);
        (0..n)
            .map(|i| {
                let a = g.apply(i as f64 / n as f64);
                let b = g.apply((i + 1) as f64 / n as f64);
                0.5 * (a + b)
            })
            .collect()
    };
    let (cx, cy, cz) = (centers(Axis::Xi, nx), centers(Axis::Eta, ny), centers(Axis::Kappa, nz));
    let mut min = f64::INFINITY;
    for &k in &cz {
        for &e in &cy {
            for &x in &cx {
                let j = jacobian_det(spec, x, e, k).expect("cell centers lie inside the block");
                min = min.min(j);
            }
        }
    }
    min
}

struct MeshStats {
    report: InterfaceReport,
    volume_total: f64,
    volume_min: f64,
    volume_max: f64,
    degenerate: usize,
    jacobian_min: f64,
}

fn mesh_stats(scene: &SceneSpec, mesh: &MultiblockMesh) -> MeshStats {
    let report = interface_report(mesh);
    let mut volume_min = f64::INFINITY;
    let mut volume_max = f64::NEG_INFINITY;
    let mut degenerate = 0;
    for cell in mesh.cells() {
        volume_min = volume_min.min(cell.volume);
        volume_max = volume_max.max(cell.volume);
        degenerate += usize::from(cell.degenerate);
    }
    let jacobian_min =
        scene.blocks.iter().map(|b| min_jacobian(&b.spec)).fold(f64::INFINITY, f64::min);
    MeshStats {
        report,
        volume_total: mesh.total_volume(),
        volume_min,
        volume_max,
        degenerate,
        jacobian_min,
    }
}

fn print_summary(scene: &SceneSpec, mesh: &MultiblockMesh, stats: &MeshStats) {
    for block in &scene.blocks {
        let (nx, ny, nz) = block.spec.resolution();
        let (nodes, cells, faces) = mesh_counts((nx, ny, nz)).expect("validated");
        eprintln!(
            "block {} ({}): resolution {nx}x{ny}x{nz}, nodes {nodes}, cells {cells}, faces {faces}",
            block.id,
            block.spec.material()
        );
    }
    eprintln!(
        "mesh: {} blocks, nodes {}, cells {}, faces {} ({} interior, {} boundary)",
        mesh.block_count(),
        mesh.node_count(),
        mesh.cell_count(),
        mesh.face_count(),
        mesh.interior_face_count(),
        mesh.boundary_face_count()
    );
    for pair in &stats.report.pairs {
        eprintln!(
            "interface {}-{}: shared nodes {}, max gap {:e}, interior faces {}",
            scene.blocks[pair.blocks.0].id,
            scene.blocks[pair.blocks.1].id,
            pair.shared_nodes,
            pair.max_gap,
            pair.interior_faces
        );
    }
    eprintln!(
        "volume: total {:e}, min {:e}, max {:e}, degenerate cells {}",
        stats.volume_total, stats.volume_min, stats.volume_max, stats.degenerate
    );
    eprintln!(
        "jacobian at cell centers: min {:e} (positive: {})",
        stats.jacobian_min,
        stats.jacobian_min > 0.0
    );
}

fn report_value(
    scene: &SceneSpec,
    mesh: &MultiblockMesh,
    stats: &MeshStats,
    pressure: Option<&[f64]>,
    flux_residual: Option<f64>,
) -> serde_json::Value {
    let blocks: Vec<_> = scene
        .blocks
        .iter()
        .map(|b| {
            let (nx, ny, nz) = b.spec.resolution();
            let (nodes, cells, faces) = mesh_counts((nx, ny, nz)).expect("validated");
            json!({
                "id": b.id,
                "material": b.spec.material(),
                "resolution": [nx, ny, nz],
                "nodes": nodes,
                "cells": cells,
                "faces": faces,
            })
        })
        .collect();
    let interfaces: Vec<_> = stats
        .report
        .pairs
        .iter()
        .map(|p| {
            json!({
                "blocks": [p.blocks.0, p.blocks.1],
                "shared_nodes": p.shared_nodes,
                "max_gap": p.max_gap,
                "interior_faces": p.interior_faces,
            })
        })
        .collect();
    let mut value = json!({
        "blocks": blocks,
        "mesh": {
            "nodes": mesh.node_count(),
            "cells": mesh.cell_count(),
            "faces": mesh.face_count(),
            "interior_faces": mesh.interior_face_count(),
            "boundary_faces": mesh.boundary_face_count(),
        },
        "interfaces": interfaces,
        "volume": {
            "total": stats.volume_total,
            "min": stats.volume_min,
            "max": stats.volume_max,
            "degenerate_cells": stats.degenerate,
        },
        "jacobian": {
            "min": stats.jacobian_min,
            "positive": stats.jacobian_min > 0.0,
        },
        "materials": material_table(mesh),
    });
    if let Some(p) = pressure {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in p {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        value["pressure"] = json!({ "min": lo, "max": hi });
    }
    if let Some(r) = flux_residual {
        value["flux_balance_max"] = json!(r);
    }
    value
}

fn solve(scene: &SceneSpec, mesh: &MultiblockMesh) -> Result<(Vec<f64>, f64), CliError> {
    let problem = match build_problem(scene, mesh) {
        Ok(Some(problem)) => problem,
        Ok(None) => {
            return Err(CliError::Validation(vec![
                "error: [missing-problem] problem: solve needs a problem section in the scene"
                    .to_string(),
            ]))
        }
        Err(SceneError::Invalid(issues)) => {
            return Err(CliError::Validation(
                issues.iter().map(|i| format!("error: {i}")).collect(),
            ))
        }
        Err(e) => return Err(CliError::runtime("problem setup", e)),
    };
    let (sys, warnings) = assemble_tpfa(&problem).map_err(|e| CliError::runtime("assembly", e))?;
    for w in &warnings {
        log::warn!(
            "face {} has nonpositive transmissibility {:e}; the cell is severely distorted",
            w.face,
            w.transmissibility
        );
    }
    log::info!("solving {} unknowns to tolerance {:e}", sys.len(), problem.tolerance);
    let pressure = solve_pressure(&sys, problem.tolerance, problem.max_iterations)
        .map_err(|e| CliError::runtime("solver", e))?;
    let fluxes = compute_fluxes(&problem, &pressure);
    let residual = flux_balance(&problem, &fluxes)
        .into_iter()
        .fold(0.0f64, |acc, r| acc.max(r.abs()));
    Ok((pressure, residual))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { spec, output, report } => {
            let scene = load_scene(&spec)?;
            let grids = generate_blocks(&scene, cli.threads)?;
            let mesh = assemble(&scene, &grids)?;
            export_vtk(&mesh, None, &scene.title, &output)
                .map_err(|e| CliError::runtime("writing VTK", e))?;
            log::info!("wrote {}", output.display());
            if report {
                let stats = mesh_stats(&scene, &mesh);
                let value = report_value(&scene, &mesh, &stats, None, None);
                println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            }
            Ok(())
        }
        Command::Solve { spec, output, report } => {
            let scene = load_scene(&spec)?;
            if scene.problem.is_none() {
                return Err(CliError::Validation(vec![
                    "error: [missing-problem] problem: solve needs a problem section in the scene"
                        .to_string(),
                ]));
            }
            let grids = generate_blocks(&scene, cli.threads)?;
            let mesh = assemble(&scene, &grids)?;
            let (pressure, residual) = solve(&scene, &mesh)?;
            export_vtk(&mesh, Some(&pressure), &scene.title, &output)
                .map_err(|e| CliError::runtime("writing VTK", e))?;
            log::info!("wrote {}", output.display());
            if report {
                let stats = mesh_stats(&scene, &mesh);
                let value = report_value(&scene, &mesh, &stats, Some(&pressure), Some(residual));
                println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            }
            Ok(())
        }
        Command::Inspect { spec, report } => {
            let scene = load_scene(&spec)?;
            let grids = generate_blocks(&scene, cli.threads)?;
            let mesh = assemble(&scene, &grids)?;
            let stats = mesh_stats(&scene, &mesh);
            print_summary(&scene, &mesh, &stats);
            if report {
                let value = report_value(&scene, &mesh, &stats, None, None);
                println!("{}", serde_json::to_string_pretty(&value).expect("report serializes"));
            }
            Ok(())
        }
        Command::Check { spec } => {
            let scene = load_scene(&spec)?;
            eprintln!(
                "ok: {} block(s), {} material(s){}",
                scene.blocks.len(),
                scene.materials.len(),
                if scene.problem.is_some() { ", problem section" } else { "" }
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MESHGEN_LOG", "warn"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(messages)) => {
            for m in messages {
                eprintln!("{m}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("{message}");
            ExitCode::from(2)
        }
    }
}
