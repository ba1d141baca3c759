//! Per-cell and per-face geometric quantities: volumes by tetrahedral
//! decomposition, face normals by two independent routes, centers.

use crate::math::{Axis, Vec3};
use crate::tfi::{covariant_vector, BlockSpec, StructuredGrid, TfiError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("non-finite corner coordinate")]
    NonFinite,
    #[error("point with {axis} = {value} is not on a {axis} face")]
    OffFace { axis: Axis, value: f64 },
    #[error(transparent)]
    Tfi(#[from] TfiError),
}

/// Hexahedral cell given by its 8 corners in the fixed local order
/// index = dx + 2 dy + 4 dz over the unit-cube corner offsets:
///
/// ```text
/// 0=(0,0,0) 1=(1,0,0) 2=(0,1,0) 3=(1,1,0)
/// 4=(0,0,1) 5=(1,0,1) 6=(0,1,1) 7=(1,1,1)
/// ```
#[derive(Clone, Copy, Debug)]
pub struct HexCell {
    corners: [Vec3; 8],
}

impl HexCell {
    pub fn new(corners: [Vec3; 8]) -> Result<Self, GeometryError> {
        if corners.iter().all(|c| c.is_finite()) {
            Ok(HexCell { corners })
        } else {
            Err(GeometryError::NonFinite)
        }
    }

    pub fn from_grid(grid: &StructuredGrid, cx: usize, cy: usize, cz: usize) -> Self {
        let ids = grid.cell_corner_ids(cx, cy, cz);
        let mut corners = [Vec3::ZERO; 8];
        for (c, id) in corners.iter_mut().zip(ids) {
            *c = grid.nodes()[id];
        }
        HexCell { corners }
    }

    pub fn corners(&self) -> &[Vec3; 8] {
        &self.corners
    }

    pub fn corner(&self, i: usize) -> Vec3 {
        self.corners[i]
    }

    /// The 4 corner positions of a face, in outward cyclic order.
    pub fn face_quad(&self, side: Side) -> [Vec3; 4] {
        let ids = side.local_corners();
        [
            self.corners[ids[0]],
            self.corners[ids[1]],
            self.corners[ids[2]],
            self.corners[ids[3]],
        ]
    }
}

/// One of the six faces of a cell or block, named by the reference axis
/// it is perpendicular to and which end of that axis it sits at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    XiMin,
    XiMax,
    EtaMin,
    EtaMax,
    KappaMin,
    KappaMax,
}

impl Side {
    pub const ALL: [Side; 6] =
        [Side::XiMin, Side::XiMax, Side::EtaMin, Side::EtaMax, Side::KappaMin, Side::KappaMax];

    pub fn axis(self) -> Axis {
        match self {
            Side::XiMin | Side::XiMax => Axis::Xi,
            Side::EtaMin | Side::EtaMax => Axis::Eta,
            Side::KappaMin | Side::KappaMax => Axis::Kappa,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Side::XiMax | Side::EtaMax | Side::KappaMax)
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::XiMin => "xi0",
            Side::XiMax => "xi1",
            Side::EtaMin => "eta0",
            Side::EtaMax => "eta1",
            Side::KappaMin => "kappa0",
            Side::KappaMax => "kappa1",
        }
    }

    pub fn from_name(name: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Local corner indices of the face, ordered cyclically so that the
    /// diagonal-cross normal points out of the cell.
    pub fn local_corners(self) -> [usize; 4] {
        match self {
            Side::XiMin => [0, 4, 6, 2],
            Side::XiMax => [1, 3, 7, 5],
            Side::EtaMin => [0, 1, 5, 4],
            Side::EtaMax => [2, 6, 7, 3],
            Side::KappaMin => [0, 2, 3, 1],
            Side::KappaMax => [4, 5, 7, 6],
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometry of one quadrilateral face: outward area-weighted normal
/// (length = face area), centroid of the corners, and the owning mesh's
/// node ids in the same cyclic order the normal was computed from.
#[derive(Clone, Copy, Debug)]
pub struct FaceGeometry {
    pub area_normal: Vec3,
    pub center: Vec3,
    pub corners: [usize; 4],
}

impl FaceGeometry {
    pub fn from_quad(corners: [usize; 4], q: [Vec3; 4]) -> Self {
        FaceGeometry {
            area_normal: face_normal_diagonal(q) * 0.5,
            center: quad_center(q),
            corners,
        }
    }

    pub fn area(&self) -> f64 {
        self.area_normal.norm()
    }
}

/// Volume of the tetrahedron spanned by four points:
/// (1/6)|V1 . (V2 x V3)| with the edge vectors taken from `a`.
pub fn tet_volume(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> f64 {
    (b - a).dot((c - a).cross(d - a)).abs() / 6.0
}

/// Result of a hexahedron volume computation; `degenerate` flags that at
/// least one of the six tetrahedra collapsed to zero volume.
#[derive(Clone, Copy, Debug)]
pub struct HexVolume {
    pub value: f64,
    pub degenerate: bool,
}

/// The six tetrahedra of the two-prism split, by local corner index,
/// grouped by prism. The first prism's split follows the cell diagonal
/// 3-4, the second mirrors it across the 0-7 diagonal plane.
const HEX_PRISMS: [[[usize; 4]; 3]; 2] = [
    [[0, 1, 3, 4], [1, 3, 4, 5], [3, 4, 5, 7]],
    [[0, 2, 3, 4], [2, 3, 4, 6], [3, 4, 6, 7]],
];

/// Cell volume as the sum of six tetrahedra: the cell splits into two
/// triangular prisms of three tetrahedra each. Summing prism by prism
/// also keeps box volumes bit-exact.
pub fn hex_volume(cell: &HexCell) -> HexVolume {
    let c = cell.corners();
    let mut value = 0.0;
    let mut degenerate = false;
    for prism in HEX_PRISMS {
        let mut part = 0.0;
        for t in prism {
            let v = tet_volume(c[t[0]], c[t[1]], c[t[2]], c[t[3]]);
            degenerate |= v == 0.0;
            part += v;
        }
        value += part;
    }
    HexVolume { value, degenerate }
}

/// Cross product of the two face diagonals. For corners in cyclic order
/// the direction is the (mean) face normal and the magnitude is twice
/// the face area, exactly, even for non-planar quads.
pub fn face_normal_diagonal(q: [Vec3; 4]) -> Vec3 {
    (q[2] - q[0]).cross(q[3] - q[1])
}

pub fn quad_center(q: [Vec3; 4]) -> Vec3 {
    (q[0] + q[1] + q[2] + q[3]) * 0.25
}

/// Arithmetic mean of the 8 corners.
pub fn cell_center(cell: &HexCell) -> Vec3 {
    cell.corners().iter().fold(Vec3::ZERO, |a, &c| a + c) * 0.125
}

/// Face normal from the mapping itself: the cross product of the two
/// covariant vectors tangent to the face, taken in the cyclic axis
/// order so the result points along the increasing face axis. Callers
/// wanting the outward normal on a min-side face must negate.
pub fn face_normal_covariant(
    b: &BlockSpec,
    xi: f64,
    eta: f64,
    kappa: f64,
    face_axis: Axis,
) -> Result<Vec3, GeometryError> {
    let coord = [xi, eta, kappa][face_axis.index()];
    if coord != 0.0 && coord != 1.0 {
        return Err(GeometryError::OffFace { axis: face_axis, value: coord });
    }
    let (a, c) = match face_axis {
        Axis::Xi => (Axis::Eta, Axis::Kappa),
        Axis::Eta => (Axis::Kappa, Axis::Xi),
        Axis::Kappa => (Axis::Xi, Axis::Eta),
    };
    let ta = covariant_vector(b, xi, eta, kappa, a)?;
    let tc = covariant_vector(b, xi, eta, kappa, c)?;
    Ok(ta.cross(tc))
}
