//! Legacy ASCII VTK export of assembled meshes. The legacy format is
//! used instead of XML so output is byte-stable and trivially diffable;
//! all floating-point values are written with 17 significant digits so
//! they round-trip exactly.

use crate::multiblock::MultiblockMesh;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// VTK cell type id for an 8-node hexahedron.
pub const VTK_HEXAHEDRON: u32 = 12;

/// Maps the local corner convention (id = dx + 2 dy + 4 dz) onto the VTK
/// hexahedron vertex order (bottom quad counterclockwise, then top).
pub const VTK_CORNER_ORDER: [usize; 8] = [0, 1, 3, 2, 4, 5, 7, 6];

/// Deterministic material numbering: names sorted ascending, ids 0..n.
pub fn material_table(mesh: &MultiblockMesh) -> BTreeMap<String, i32> {
    let mut names: Vec<&str> = mesh.cells().iter().map(|c| c.material.as_str()).collect();
    names.sort_unstable();
    names.dedup();
    names.into_iter().enumerate().map(|(i, n)| (n.to_string(), i as i32)).collect()
}

/// Writes the mesh as a legacy VTK unstructured grid with material_id
/// and volume cell data, plus pressure when given. The pressure slice
/// must hold one value per cell.
pub fn write_vtk(
    mesh: &MultiblockMesh,
    pressure: Option<&[f64]>,
    title: &str,
    out: &mut impl Write,
) -> io::Result<()> {
    if let Some(p) = pressure {
        if p.len() != mesh.cell_count() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("{} pressure values for {} cells", p.len(), mesh.cell_count()),
            ));
        }
    }
    // The title line must stay a single line.
    let title: String = title.chars().map(|c| if c == '\n' || c == '\r' { ' ' } else { c }).collect();

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;

    writeln!(out, "POINTS {} double", mesh.node_count())?;
    for p in mesh.nodes() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z)?;
    }

    writeln!(out, "CELLS {} {}", mesh.cell_count(), mesh.cell_count() * 9)?;
    for cell in mesh.cells() {
        write!(out, "8")?;
        for &local in &VTK_CORNER_ORDER {
            write!(out, " {}", cell.nodes[local])?;
        }
        writeln!(out)?;
    }

    writeln!(out, "CELL_TYPES {}", mesh.cell_count())?;
    for _ in 0..mesh.cell_count() {
        writeln!(out, "{VTK_HEXAHEDRON}")?;
    }

    writeln!(out, "CELL_DATA {}", mesh.cell_count())?;
    let table = material_table(mesh);
    writeln!(out, "SCALARS material_id int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for cell in mesh.cells() {
        writeln!(out, "{}", table[&cell.material])?;
    }
    writeln!(out, "SCALARS volume double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for cell in mesh.cells() {
        writeln!(out, "{:.16e}", cell.volume)?;
    }
    if let Some(p) = pressure {
        writeln!(out, "SCALARS pressure double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in p {
            writeln!(out, "{v:.16e}")?;
        }
    }
    Ok(())
}

/// Writes the mesh to a file; see [`write_vtk`].
pub fn export_vtk(
    mesh: &MultiblockMesh,
    pressure: Option<&[f64]>,
    title: &str,
    path: &Path,
) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_vtk(mesh, pressure, title, &mut out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Axis, Vec3};
    use crate::multiblock::assemble_multiblock;
    use crate::projectors::Projector;
    use crate::surfaces::ParametricSurface;
    use crate::tfi::{generate_grid, BlockSpec, StructuredGrid};

    fn box_grid(lo: Vec3, hi: Vec3, res: (usize, usize, usize), material: &str) -> StructuredGrid {
        let d = hi - lo;
        let unit = |axis: Axis, scale: f64| {
            let mut v = [0.0; 3];
            v[axis.index()] = scale;
            Vec3::from(v)
        };
        let face = |axis: Axis, side: f64| {
            let (ua, va) = axis.others();
            let origin = lo + unit(axis, d.component(axis.index())) * side;
            ParametricSurface::plane(
                axis,
                origin,
                unit(ua, d.component(ua.index())),
                unit(va, d.component(va.index())),
            )
            .unwrap()
        };
        let proj = |axis: Axis| Projector::linear(axis, face(axis, 0.0), face(axis, 1.0)).unwrap();
        let spec =
            BlockSpec::new(proj(Axis::Xi), proj(Axis::Eta), proj(Axis::Kappa), res, material)
                .unwrap();
        generate_grid(&spec).unwrap()
    }

    #[test]
    fn single_cube_matches_the_expected_bytes() {
        let g = box_grid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), (1, 1, 1), "rock");
        let mesh = assemble_multiblock(std::slice::from_ref(&g), 1e-9).unwrap();
        let mut buf = Vec::new();
        write_vtk(&mesh, None, "unit cube", &mut buf).unwrap();
        let expected = "\
# vtk DataFile Version 3.0
unit cube
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 8 double
0.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0
1.0000000000000000e0 0.0000000000000000e0 0.0000000000000000e0
0.0000000000000000e0 1.0000000000000000e0 0.0000000000000000e0
1.0000000000000000e0 1.0000000000000000e0 0.0000000000000000e0
0.0000000000000000e0 0.0000000000000000e0 1.0000000000000000e0
1.0000000000000000e0 0.0000000000000000e0 1.0000000000000000e0
0.0000000000000000e0 1.0000000000000000e0 1.0000000000000000e0
1.0000000000000000e0 1.0000000000000000e0 1.0000000000000000e0
CELLS 1 9
8 0 1 3 2 4 5 7 6
CELL_TYPES 1
12
CELL_DATA 1
SCALARS material_id int 1
LOOKUP_TABLE default
0
SCALARS volume double 1
LOOKUP_TABLE default
1.0000000000000000e0
";
        assert_eq!(String::from_utf8(buf).unwrap(), expected);
    }

    #[test]
    fn two_block_stack_lists_both_materials() {
        let grids = vec![
            box_grid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), (2, 2, 2), "sand"),
            box_grid(Vec3::new(0.0, 0.0, 1.0), Vec3::new(1.0, 1.0, 2.0), (2, 2, 2), "shale"),
        ];
        let mesh = assemble_multiblock(&grids, 1e-9).unwrap();
        assert_eq!(mesh.node_count(), 45);
        let mut buf = Vec::new();
        write_vtk(&mesh, None, "stack", &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 45 double"));
        assert!(text.contains("CELLS 16 144"));
        let ids: Vec<&str> = text
            .lines()
            .skip_while(|l| *l != "SCALARS material_id int 1")
            .skip(2)
            .take(16)
            .collect();
        // Blocks are written in order: sand (id 0) then shale (id 1).
        assert_eq!(ids[..8].iter().filter(|s| **s == "0").count(), 8);
        assert_eq!(ids[8..].iter().filter(|s| **s == "1").count(), 8);
    }

    #[test]
    fn pressure_field_is_appended_and_output_is_deterministic() {
        let g = box_grid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), (1, 1, 2), "rock");
        let mesh = assemble_multiblock(std::slice::from_ref(&g), 1e-9).unwrap();
        let p = [0.75, 0.25];
        let mut a = Vec::new();
        write_vtk(&mesh, Some(&p), "column", &mut a).unwrap();
        let text = String::from_utf8(a.clone()).unwrap();
        assert!(text.contains("SCALARS pressure double 1"));
        assert!(text.contains("7.5000000000000000e-1"));
        assert!(text.contains("2.5000000000000000e-1"));
        let mut b = Vec::new();
        write_vtk(&mesh, Some(&p), "column", &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn wrong_pressure_length_is_an_input_error() {
        let g = box_grid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), (1, 1, 1), "rock");
        let mesh = assemble_multiblock(std::slice::from_ref(&g), 1e-9).unwrap();
        let err = write_vtk(&mesh, Some(&[1.0, 2.0]), "bad", &mut Vec::new()).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidInput);
    }
}
