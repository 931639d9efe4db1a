use nalgebra::{Point3, Rotation3, Vector3};

/// Rigid transform given as roll/pitch/yaw angles plus a translation.
///
/// The rotation is `Rz(yaw) * Ry(roll) * Rx(pitch)`: pitch about X is applied
/// first, then roll about Y, then yaw about Z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub translation: Vector3<f64>,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    pub fn new(roll: f64, pitch: f64, yaw: f64, translation: Vector3<f64>) -> Self {
        RigidTransform {
            roll,
            pitch,
            yaw,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0, Vector3::zeros())
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self::new(0.0, 0.0, 0.0, translation)
    }

    pub fn is_identity(&self) -> bool {
        self.roll == 0.0 && self.pitch == 0.0 && self.yaw == 0.0 && self.translation == Vector3::zeros()
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        rotation_rpy(self.roll, self.pitch, self.yaw)
    }

    pub fn apply(&self, p: &Point3<f64>) -> Point3<f64> {
        self.rotation() * p + self.translation
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * v
    }

    pub fn inverse_apply(&self, p: &Point3<f64>) -> Point3<f64> {
        self.rotation().inverse() * (p - self.translation)
    }
}

/// `Rz(yaw) * Ry(roll) * Rx(pitch)`.
pub fn rotation_rpy(roll: f64, pitch: f64, yaw: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), yaw)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), roll)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), pitch)
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}
