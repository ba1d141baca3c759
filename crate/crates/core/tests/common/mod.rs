//! Shared fixtures and independent oracles for the acceptance suite.
//! The oracles deliberately avoid the library's own algorithms: volumes
//! come from Gauss-Legendre quadrature, node deduplication from an
//! all-pairs union-find, and linear systems from dense Cholesky.

use meshgen_core::math::{Axis, Vec3};
use meshgen_core::projectors::Projector;
use meshgen_core::surfaces::{eval_surface, HeightFn, ParametricSurface, SinTerm};
use meshgen_core::tfi::{jacobian_det, BlockSpec, StructuredGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn repo_spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

/// Planar face of the affine image of the unit cube under x -> origin + A x,
/// where the columns of A are `cols`.
fn affine_face(cols: [Vec3; 3], origin: Vec3, axis: Axis, side: f64) -> ParametricSurface {
    let (ua, va) = axis.others();
    let face_origin = origin + cols[axis.index()] * side;
    ParametricSurface::plane(axis, face_origin, cols[ua.index()], cols[va.index()]).unwrap()
}

pub fn affine_block(cols: [Vec3; 3], origin: Vec3, res: (usize, usize, usize)) -> BlockSpec {
    let proj = |axis: Axis| {
        Projector::linear(
            axis,
            affine_face(cols, origin, axis, 0.0),
            affine_face(cols, origin, axis, 1.0),
        )
        .unwrap()
    };
    BlockSpec::new(proj(Axis::Xi), proj(Axis::Eta), proj(Axis::Kappa), res, "rock").unwrap()
}

/// Random affine frame with determinant bounded away from zero so the
/// block is well shaped.
pub fn random_affine_frame(rng: &mut ChaCha8Rng) -> ([Vec3; 3], Vec3) {
    loop {
        let mut cols = [Vec3::ZERO; 3];
        for (i, c) in cols.iter_mut().enumerate() {
            let mut v = [0.0; 3];
            for (j, x) in v.iter_mut().enumerate() {
                *x = if i == j { rng.random_range(0.6..1.5) } else { rng.random_range(-0.4..0.4) };
            }
            *c = Vec3::from(v);
        }
        let det = cols[0].dot(cols[1].cross(cols[2]));
        if det > 0.25 {
            let origin = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            return (cols, origin);
        }
    }
}

pub fn box_block(origin: Vec3, size: Vec3, res: (usize, usize, usize), material: &str) -> BlockSpec {
    let cols =
        [Vec3::new(size.x, 0.0, 0.0), Vec3::new(0.0, size.y, 0.0), Vec3::new(0.0, 0.0, size.z)];
    let proj = |axis: Axis| {
        Projector::linear(
            axis,
            affine_face(cols, origin, axis, 0.0),
            affine_face(cols, origin, axis, 1.0),
        )
        .unwrap()
    };
    BlockSpec::new(proj(Axis::Xi), proj(Axis::Eta), proj(Axis::Kappa), res, material).unwrap()
}

/// A sinusoidal horizon over [0,w]x[0,d]. Integer mode numbers make the
/// waves vanish on the rectangle border, so the side faces stay planar.
fn horizon(w: f64, d: f64, base: f64, terms: &[(f64, u32, u32)]) -> ParametricSurface {
    let terms = terms
        .iter()
        .map(|&(amplitude, m, n)| SinTerm {
            amplitude,
            freq_x: std::f64::consts::PI * m as f64 / w,
            freq_y: std::f64::consts::PI * n as f64 / d,
            phase_x: 0.0,
            phase_y: 0.0,
        })
        .collect();
    ParametricSurface::graph(
        Axis::Kappa,
        (0.0, w),
        (0.0, d),
        HeightFn::Sinusoidal { base, terms },
    )
    .unwrap()
}

/// Curved block between two (optionally three, when `layers` is 3) wavy
/// horizons with planar sides. All randomness stays within bounds that
/// keep the mapping injective.
pub fn wavy_block(rng: &mut ChaCha8Rng, res: (usize, usize, usize), layers: usize) -> BlockSpec {
    let w = rng.random_range(0.8..2.0);
    let d = rng.random_range(0.8..2.0);
    let z0 = rng.random_range(-1.0..1.0);
    let thick = rng.random_range(0.6..1.4);
    let mut surf = |base: f64, cap: f64| {
        let amp = rng.random_range(-cap..cap);
        let m = rng.random_range(1..4u32);
        let n = rng.random_range(1..4u32);
        horizon(w, d, base, &[(amp, m, n)])
    };
    let bottom = surf(z0, 0.1 * thick);
    let top = surf(z0 + thick, 0.1 * thick);
    let kappa = if layers == 3 {
        let mid = surf(z0 + 0.5 * thick, 0.05 * thick);
        Projector::lagrangian(
            Axis::Kappa,
            meshgen_core::projectors::Knots::new(vec![0.0, 0.5, 1.0]).unwrap(),
            vec![bottom, mid, top],
        )
        .unwrap()
    } else {
        Projector::linear(Axis::Kappa, bottom, top).unwrap()
    };
    let side = |axis: Axis, o: Vec3, u: Vec3| {
        ParametricSurface::plane(axis, o, u, Vec3::new(0.0, 0.0, thick)).unwrap()
    };
    let xi = Projector::linear(
        Axis::Xi,
        side(Axis::Xi, Vec3::new(0.0, 0.0, z0), Vec3::new(0.0, d, 0.0)),
        side(Axis::Xi, Vec3::new(w, 0.0, z0), Vec3::new(0.0, d, 0.0)),
    )
    .unwrap();
    let eta = Projector::linear(
        Axis::Eta,
        side(Axis::Eta, Vec3::new(0.0, 0.0, z0), Vec3::new(w, 0.0, 0.0)),
        side(Axis::Eta, Vec3::new(0.0, d, z0), Vec3::new(w, 0.0, 0.0)),
    )
    .unwrap();
    BlockSpec::new(xi, eta, kappa, res, "rock").unwrap()
}

/// Largest distance from any boundary node of the generated grid to the
/// block-face surface it must lie on, honoring any grading.
pub fn max_boundary_gap(b: &BlockSpec, grid: &StructuredGrid) -> f64 {
    let res = [grid.resolution().0, grid.resolution().1, grid.resolution().2];
    let param = |axis: Axis, i: usize| b.grading(axis).apply(i as f64 / res[axis.index()] as f64);
    let mut max_gap = 0.0f64;
    for axis in Axis::ALL {
        let (ua, va) = axis.others();
        for side in 0..2 {
            let surface = b.face_surface(axis, side);
            for iu in 0..=res[ua.index()] {
                for iv in 0..=res[va.index()] {
                    let mut idx = [0usize; 3];
                    idx[axis.index()] = side * res[axis.index()];
                    idx[ua.index()] = iu;
                    idx[va.index()] = iv;
                    let want = eval_surface(surface, param(ua, iu), param(va, iv)).unwrap();
                    let got = grid.node(idx[0], idx[1], idx[2]);
                    max_gap = max_gap.max(got.distance(want));
                }
            }
        }
    }
    max_gap
}

/// Legendre polynomial value and derivative by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let (kf, prev) = (k as f64, p1);
        p1 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = prev;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on [0, 1], by Newton iteration from
/// the Chebyshev initial guesses.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push(((x + 1.0) / 2.0, w / 2.0));
    }
    out
}

/// Exact volume of the image of the reference cube: the Jacobian
/// determinant integrated with an n-cubed Gauss-Legendre rule.
pub fn quadrature_volume(b: &BlockSpec, n: usize) -> f64 {
    let pts = gauss_legendre_unit(n);
    let mut total = 0.0;
    for &(x, wx) in &pts {
        for &(e, we) in &pts {
            for &(k, wk) in &pts {
                total += wx * we * wk * jacobian_det(b, x, e, k).unwrap();
            }
        }
    }
    total
}

/// All-pairs union-find over every node of every grid: the number of
/// distinct positions at the given tolerance, independent of the spatial
/// hash used by the assembler.
pub fn brute_force_node_count(grids: &[StructuredGrid], tol: f64) -> usize {
    let nodes: Vec<Vec3> = grids.iter().flat_map(|g| g.nodes().iter().copied()).collect();
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i].distance(nodes[j]) <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    (0..nodes.len()).filter(|&i| find(&mut parent, i) == i).count()
}
