//! Assembly of independently generated block grids into one conforming
//! global mesh: node deduplication across interfaces, face topology,
//! material tagging, and interface reporting.

use crate::geometry::{cell_center, hex_volume, FaceGeometry, HexCell, Side};
use crate::math::Vec3;
use crate::tfi::StructuredGrid;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MultiblockError {
    #[error("assembly needs at least one block")]
    Empty,
    #[error("merge tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error(
        "hanging node between blocks {} and {}: block {node_block} node ({};{};{}) at \
         ({:.6}, {:.6}, {:.6}) lies on the other block's face but not on its node lattice",
        blocks.0, blocks.1, index.0, index.1, index.2, position.x, position.y, position.z
    )]
    HangingNode {
        blocks: (usize, usize),
        node_block: usize,
        index: (usize, usize, usize),
        position: Vec3,
    },
    #[error("more than two cells share one face (global nodes {0:?})")]
    NonManifold([usize; 4]),
    #[error("no material mapped for block {0}")]
    MissingMaterial(usize),
}

/// Where an exterior face sits: which block and which of its six sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryTag {
    pub block: usize,
    pub side: Side,
}

/// One hexahedral cell of the assembled mesh. Global node ids follow the
/// local corner convention of [`HexCell`]; the logical address
/// (block, ix, iy, iz) is retained.
#[derive(Clone, Debug)]
pub struct Cell {
    pub nodes: [usize; 8],
    pub material: String,
    pub block: usize,
    pub index: (usize, usize, usize),
    pub volume: f64,
    pub degenerate: bool,
    pub center: Vec3,
}

/// One quadrilateral face: geometry is computed from the owner cell's
/// outward corner order, so `geometry.area_normal` points out of the
/// owner. Interior faces carry a neighbor, exterior ones a boundary tag.
#[derive(Clone, Debug)]
pub struct Face {
    pub owner: usize,
    pub neighbor: Option<usize>,
    pub boundary: Option<BoundaryTag>,
    pub geometry: FaceGeometry,
}

#[derive(Clone, Debug)]
struct Contributor {
    block: usize,
    position: Vec3,
}

#[derive(Clone, Debug)]
pub struct MultiblockMesh {
    nodes: Vec<Vec3>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    contributors: Vec<Vec<Contributor>>,
    block_count: usize,
}

impl MultiblockMesh {
    pub fn nodes(&self) -> &[Vec3] {
        &self.nodes
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn interior_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.neighbor.is_some()).count()
    }

    pub fn boundary_face_count(&self) -> usize {
        self.faces.iter().filter(|f| f.neighbor.is_none()).count()
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }
}

/// Suggested merge tolerance: 1e-9 times the diagonal of the bounding
/// box of all block nodes.
pub fn default_merge_tolerance(grids: &[StructuredGrid]) -> f64 {
    let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for g in grids {
        for p in g.nodes() {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
    }
    1e-9 * hi.distance(lo)
}

/// Spatial hash over points with bucket size 4x the merge tolerance;
/// candidate lookup scans the 27 surrounding buckets, so any point
/// within one tolerance of a stored point is always found.
struct NodeHash {
    cell: f64,
    buckets: HashMap<(i64, i64, i64), Vec<usize>>,
}

impl NodeHash {
    fn new(merge_tol: f64) -> Self {
        NodeHash { cell: merge_tol * 4.0, buckets: HashMap::new() }
    }

    fn key(&self, p: Vec3) -> (i64, i64, i64) {
        (
            (p.x / self.cell).floor() as i64,
            (p.y / self.cell).floor() as i64,
            (p.z / self.cell).floor() as i64,
        )
    }

    fn insert(&mut self, p: Vec3, id: usize) {
        self.buckets.entry(self.key(p)).or_default().push(id);
    }

    /// Nearest stored id within tol of p; ties broken toward the lowest
    /// id so results do not depend on bucket iteration order.
    fn find_within(&self, p: Vec3, tol: f64, positions: &[Vec3]) -> Option<usize> {
        let (kx, ky, kz) = self.key(p);
        let mut best: Option<(f64, usize)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(ids) = self.buckets.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &id in ids {
                        let d = positions[id].distance(p);
                        if d <= tol {
                            let better = match best {
                                None => true,
                                Some((bd, bid)) => d < bd || (d == bd && id < bid),
                            };
                            if better {
                                best = Some((d, id));
                            }
                        }
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }
}

/// Closest distance from point p to triangle abc.
fn point_triangle_distance(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> f64 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (ap - ab * v).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (ap - ac * w).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (bp - (c - b) * w).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (ap - ab * v - ac * w).norm()
}

fn point_quad_distance(p: Vec3, q: &[Vec3; 4]) -> f64 {
    point_triangle_distance(p, q[0], q[1], q[2]).min(point_triangle_distance(p, q[0], q[2], q[3]))
}

/// One boundary quad of a block's lattice, with its corner positions.
struct BoundaryQuad {
    corners: [Vec3; 4],
    lo: Vec3,
    hi: Vec3,
}

fn boundary_quads(grid: &StructuredGrid) -> Vec<BoundaryQuad> {
    let (nx, ny, nz) = grid.resolution();
    let mut quads = Vec::new();
    for side in Side::ALL {
        let (cx_range, cy_range, cz_range) = match side {
            Side::XiMin => (0..1, 0..ny, 0..nz),
            Side::XiMax => (nx - 1..nx, 0..ny, 0..nz),
            Side::EtaMin => (0..nx, 0..1, 0..nz),
            Side::EtaMax => (0..nx, ny - 1..ny, 0..nz),
            Side::KappaMin => (0..nx, 0..ny, 0..1),
            Side::KappaMax => (0..nx, 0..ny, nz - 1..nz),
        };
        for cz in cz_range {
            for cy in cy_range.clone() {
                for cx in cx_range.clone() {
                    let ids = grid.cell_corner_ids(cx, cy, cz);
                    let local = side.local_corners();
                    let corners = [
                        grid.nodes()[ids[local[0]]],
                        grid.nodes()[ids[local[1]]],
                        grid.nodes()[ids[local[2]]],
                        grid.nodes()[ids[local[3]]],
                    ];
                    let mut lo = corners[0];
                    let mut hi = corners[0];
                    for c in &corners[1..] {
                        lo = Vec3::new(lo.x.min(c.x), lo.y.min(c.y), lo.z.min(c.z));
                        hi = Vec3::new(hi.x.max(c.x), hi.y.max(c.y), hi.z.max(c.z));
                    }
                    quads.push(BoundaryQuad { corners, lo, hi });
                }
            }
        }
    }
    quads
}

fn is_boundary_index(grid: &StructuredGrid, ix: usize, iy: usize, iz: usize) -> bool {
    let (nx, ny, nz) = grid.resolution();
    ix == 0 || ix == nx || iy == 0 || iy == ny || iz == 0 || iz == nz
}

/// Merges block grids into one mesh. Nodes closer than `merge_tol`
/// across blocks are unified (the lowest (block, node) pair becomes the
/// representative); interfaces must match node-for-node, a boundary node
/// of one block resting on another block's face but off its lattice is
/// rejected as a hanging node.
pub fn assemble_multiblock(
    grids: &[StructuredGrid],
    merge_tol: f64,
) -> Result<MultiblockMesh, MultiblockError> {
    if grids.is_empty() {
        return Err(MultiblockError::Empty);
    }
    if !(merge_tol.is_finite() && merge_tol > 0.0) {
        return Err(MultiblockError::BadTolerance(merge_tol));
    }

    // Pass 1: deduplicate nodes. Blocks and nodes are visited in order,
    // so representatives are always the lowest (block, index) source.
    let mut nodes: Vec<Vec3> = Vec::new();
    let mut contributors: Vec<Vec<Contributor>> = Vec::new();
    let mut hash = NodeHash::new(merge_tol);
    let mut global_of: Vec<Vec<usize>> = Vec::with_capacity(grids.len());
    for (b, grid) in grids.iter().enumerate() {
        let (nx, ny, nz) = grid.resolution();
        let mut map = Vec::with_capacity(grid.node_count());
        for iz in 0..=nz {
            for iy in 0..=ny {
                for ix in 0..=nx {
                    let p = grid.node(ix, iy, iz);
                    let who = Contributor { block: b, position: p };
                    // Only lattice-boundary nodes can coincide across
                    // blocks; interior nodes are never merge candidates.
                    let found = if is_boundary_index(grid, ix, iy, iz) {
                        hash.find_within(p, merge_tol, &nodes)
                    } else {
                        None
                    };
                    match found {
                        Some(g) => {
                            contributors[g].push(who);
                            map.push(g);
                        }
                        None => {
                            let g = nodes.len();
                            nodes.push(p);
                            contributors.push(vec![who]);
                            if is_boundary_index(grid, ix, iy, iz) {
                                hash.insert(p, g);
                            }
                            map.push(g);
                        }
                    }
                }
            }
        }
        global_of.push(map);
    }

    // Pass 2: hanging-node detection. An unmerged boundary node of block
    // b that rests on block a's boundary face (but not on a's lattice)
    // means the interface overlaps without matching node-for-node.
    let quads: Vec<Vec<BoundaryQuad>> = grids.iter().map(boundary_quads).collect();
    for (b, grid) in grids.iter().enumerate() {
        let (nx, ny, nz) = grid.resolution();
        for iz in 0..=nz {
            for iy in 0..=ny {
                for ix in 0..=nx {
                    if !is_boundary_index(grid, ix, iy, iz) {
                        continue;
                    }
                    let g = global_of[b][grid.node_index(ix, iy, iz)];
                    let p = nodes[g];
                    for (a, aquads) in quads.iter().enumerate() {
                        if a == b {
                            continue;
                        }
                        // A node merged with block a sits on a's lattice.
                        if contributors[g].iter().any(|c| c.block == a) {
                            continue;
                        }
                        for q in aquads {
                            if p.x < q.lo.x - merge_tol
                                || p.y < q.lo.y - merge_tol
                                || p.z < q.lo.z - merge_tol
                                || p.x > q.hi.x + merge_tol
                                || p.y > q.hi.y + merge_tol
                                || p.z > q.hi.z + merge_tol
                            {
                                continue;
                            }
                            if point_quad_distance(p, &q.corners) > merge_tol {
                                continue;
                            }
                            if q.corners.iter().any(|c| c.distance(p) <= merge_tol) {
                                continue;
                            }
                            return Err(MultiblockError::HangingNode {
                                blocks: (a.min(b), a.max(b)),
                                node_block: b,
                                index: (ix, iy, iz),
                                position: p,
                            });
                        }
                    }
                }
            }
        }
    }

    // Pass 3: cells with global connectivity and derived geometry.
    let mut cells = Vec::new();
    for (b, grid) in grids.iter().enumerate() {
        let (nx, ny, nz) = grid.resolution();
        for cz in 0..nz {
            for cy in 0..ny {
                for cx in 0..nx {
                    let mut ids = [0usize; 8];
                    for (k, id) in grid.cell_corner_ids(cx, cy, cz).into_iter().enumerate() {
                        ids[k] = global_of[b][id];
                    }
                    let mut corners = [Vec3::ZERO; 8];
                    for (c, &id) in corners.iter_mut().zip(&ids) {
                        *c = nodes[id];
                    }
                    let hex = HexCell::new(corners).expect("mesh nodes are finite");
                    let vol = hex_volume(&hex);
                    cells.push(Cell {
                        nodes: ids,
                        material: grid.material().to_string(),
                        block: b,
                        index: (cx, cy, cz),
                        volume: vol.value,
                        degenerate: vol.degenerate,
                        center: cell_center(&hex),
                    });
                }
            }
        }
    }

    // Pass 4: face soup keyed by the sorted node quadruple. The first
    // cell to visit a face owns it and fixes the outward geometry.
    let mut faces: Vec<Face> = Vec::new();
    let mut soup: HashMap<[usize; 4], usize> = HashMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        for side in Side::ALL {
            let local = side.local_corners();
            let quad_ids =
                [cell.nodes[local[0]], cell.nodes[local[1]], cell.nodes[local[2]], cell.nodes[local[3]]];
            let mut key = quad_ids;
            key.sort_unstable();
            match soup.get(&key) {
                None => {
                    let q = [
                        nodes[quad_ids[0]],
                        nodes[quad_ids[1]],
                        nodes[quad_ids[2]],
                        nodes[quad_ids[3]],
                    ];
                    soup.insert(key, faces.len());
                    faces.push(Face {
                        owner: ci,
                        neighbor: None,
                        boundary: Some(BoundaryTag { block: cell.block, side }),
                        geometry: FaceGeometry::from_quad(quad_ids, q),
                    });
                }
                Some(&fi) => {
                    let face = &mut faces[fi];
                    if face.neighbor.is_some() {
                        return Err(MultiblockError::NonManifold(key));
                    }
                    face.neighbor = Some(ci);
                    face.boundary = None;
                }
            }
        }
    }

    Ok(MultiblockMesh { nodes, cells, faces, contributors, block_count: grids.len() })
}

/// Retags every cell with the material mapped to its source block.
/// Unused map entries are allowed; unmapped blocks are an error.
pub fn assign_materials(
    mesh: &mut MultiblockMesh,
    materials: &HashMap<usize, String>,
) -> Result<(), MultiblockError> {
    for b in 0..mesh.block_count {
        if !materials.contains_key(&b) {
            return Err(MultiblockError::MissingMaterial(b));
        }
    }
    for cell in &mut mesh.cells {
        cell.material = materials[&cell.block].clone();
    }
    Ok(())
}

/// Per block-pair interface statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfacePair {
    pub blocks: (usize, usize),
    pub shared_nodes: usize,
    /// Largest distance between any two pre-merge positions that were
    /// unified into one node shared by this pair.
    pub max_gap: f64,
    pub interior_faces: usize,
}

#[derive(Clone, Debug)]
pub struct InterfaceReport {
    pub pairs: Vec<InterfacePair>,
    pub nodes: usize,
    pub cells: usize,
    pub faces: usize,
    pub interior_faces: usize,
    pub boundary_faces: usize,
}

pub fn interface_report(mesh: &MultiblockMesh) -> InterfaceReport {
    let mut stats: HashMap<(usize, usize), InterfacePair> = HashMap::new();
    for contributors in &mesh.contributors {
        for (i, a) in contributors.iter().enumerate() {
            for b in &contributors[i + 1..] {
                if a.block == b.block {
                    continue;
                }
                let key = (a.block.min(b.block), a.block.max(b.block));
                let entry = stats.entry(key).or_insert(InterfacePair {
                    blocks: key,
                    shared_nodes: 0,
                    max_gap: 0.0,
                    interior_faces: 0,
                });
                entry.shared_nodes += 1;
                entry.max_gap = entry.max_gap.max(a.position.distance(b.position));
            }
        }
    }
    for face in &mesh.faces {
        let Some(neighbor) = face.neighbor else { continue };
        let (ba, bb) = (mesh.cells[face.owner].block, mesh.cells[neighbor].block);
        if ba == bb {
            continue;
        }
        let key = (ba.min(bb), ba.max(bb));
        if let Some(entry) = stats.get_mut(&key) {
            entry.interior_faces += 1;
        }
    }
    let mut pairs: Vec<InterfacePair> = stats.into_values().collect();
    pairs.sort_by_key(|p| p.blocks);
    InterfaceReport {
        pairs,
        nodes: mesh.node_count(),
        cells: mesh.cell_count(),
        faces: mesh.face_count(),
        interior_faces: mesh.interior_face_count(),
        boundary_faces: mesh.boundary_face_count(),
    }
}
