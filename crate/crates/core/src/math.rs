//! Small fixed-size vector math shared by every module.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Reference-space axis of a structured block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Xi,
    Eta,
    Kappa,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Xi, Axis::Eta, Axis::Kappa];

    /// The remaining two axes in canonical (xi, eta, kappa) order.
    ///
    /// This fixes how a block face is parametrized: a surface of constant
    /// xi uses (eta, kappa) as its (u, v), and so on.
    pub fn others(self) -> (Axis, Axis) {
        match self {
            Axis::Xi => (Axis::Eta, Axis::Kappa),
            Axis::Eta => (Axis::Xi, Axis::Kappa),
            Axis::Kappa => (Axis::Xi, Axis::Eta),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Axis::Xi => 0,
            Axis::Eta => 1,
            Axis::Kappa => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Xi => "xi",
            Axis::Eta => "eta",
            Axis::Kappa => "kappa",
        }
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Reference coordinates (xi, eta, kappa).
pub type RefPoint = [f64; 3];

/// Returns `p` with the component along `axis` replaced by `value`.
pub(crate) fn with_axis(mut p: RefPoint, axis: Axis, value: f64) -> RefPoint {
    p[axis.index()] = value;
    p
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3 {
            x: self.y * other.z - self.z * other.y,
            y: self.z * other.x - self.x * other.z,
            z: self.x * other.y - self.y * other.x,
        }
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle between the two vectors in radians; zero vectors give NaN.
    pub fn angle_to(self, other: Vec3) -> f64 {
        let c = self.dot(other) / (self.norm() * other.norm());
        c.clamp(-1.0, 1.0).acos()
    }

    pub fn component(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

/// Scalar triple product a . (b x c).
pub fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    a.dot(b.cross(c))
}
