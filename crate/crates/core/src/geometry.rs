//! Planar rigid-body kinematics in the sensor frame.
//!
//! Lengths are millimetres, angles radians per frame, y points up and
//! positive angular velocity is counterclockwise. For the small inter-frame
//! motions seen by a tactile sensor, marker displacements are treated as
//! velocities.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Below this |ω| a motion is treated as a pure translation.
pub const DEFAULT_OMEGA_EPSILON: f64 = 1e-8;

/// A point or displacement in the sensor plane (mm).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Arithmetic mean of a set of points, `None` when empty.
    pub fn mean<I: IntoIterator<Item = Vec2>>(points: I) -> Option<Vec2> {
        let mut sum = Vec2::ZERO;
        let mut n = 0usize;
        for p in points {
            sum += p;
            n += 1;
        }
        (n > 0).then(|| sum * (1.0 / n as f64))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Planar rigid motion of a reference point: where it is, how it moves and
/// how fast the body turns about it.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidMotion2D {
    pub ref_point: Vec2,
    /// mm per frame
    pub linear_velocity: Vec2,
    /// rad per frame, counterclockwise positive
    pub angular_velocity: f64,
}

impl RigidMotion2D {
    pub fn new(ref_point: Vec2, linear_velocity: Vec2, angular_velocity: f64) -> Self {
        Self {
            ref_point,
            linear_velocity,
            angular_velocity,
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    pub fn translation(v: Vec2) -> Self {
        Self::new(Vec2::ZERO, v, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.ref_point.is_finite()
            && self.linear_velocity.is_finite()
            && self.angular_velocity.is_finite()
    }

    /// The same physical motion described about another reference point.
    pub fn about(&self, point: Vec2) -> RigidMotion2D {
        RigidMotion2D::new(point, propagate_velocity(self, point), self.angular_velocity)
    }
}

/// Velocity of the body point `q` given the motion of the reference point.
///
/// `v_x' = v_x + ω(y − y')`, `v_y' = v_y + ω(x' − x)`; ω is shared by every
/// point of the body.
pub fn propagate_velocity(motion: &RigidMotion2D, q: Vec2) -> Vec2 {
    let p = motion.ref_point;
    let v = motion.linear_velocity;
    let w = motion.angular_velocity;
    Vec2::new(v.x + w * (p.y - q.y), v.y + w * (q.x - p.x))
}

/// Instantaneous center of rotation, or `None` for a (near) pure translation.
pub fn icr(motion: &RigidMotion2D, omega_epsilon: f64) -> Option<Vec2> {
    let w = motion.angular_velocity;
    if w.abs() <= omega_epsilon {
        return None;
    }
    let p = motion.ref_point;
    let v = motion.linear_velocity;
    Some(Vec2::new(p.x - v.y / w, p.y + v.x / w))
}

/// Moves `q` by its small-motion displacement.
pub fn apply_motion(motion: &RigidMotion2D, q: Vec2) -> Vec2 {
    q + propagate_velocity(motion, q)
}
