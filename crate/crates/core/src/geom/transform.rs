use nalgebra::{Matrix3, Matrix4, Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::tolerance::EPS_TRANSFORM;

/// A rigid-body transform (rotation followed by translation), lengths in mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::new(x, y, z),
        }
    }

    /// Rotation about a principal axis. Angles are in degrees.
    pub fn rot_x(deg: f64) -> Self {
        Self::from_axis_angle(Vector3::x(), deg)
    }

    pub fn rot_y(deg: f64) -> Self {
        Self::from_axis_angle(Vector3::y(), deg)
    }

    pub fn rot_z(deg: f64) -> Self {
        Self::from_axis_angle(Vector3::z(), deg)
    }

    pub fn from_axis_angle(axis: Vector3<f64>, deg: f64) -> Self {
        let axis = nalgebra::Unit::new_normalize(axis);
        let (s, c) = exact_sin_cos(deg);
        // Rodrigues form, so quarter turns stay exact.
        let k = axis.into_inner();
        let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
        let rotation = Matrix3::identity() * c + kx * s + (k * k.transpose()) * (1.0 - c);
        Self {
            rotation,
            translation: Vector3::zeros(),
        }
    }

    /// Intrinsic rotation about x, then the rotated y, then the rotated z.
    pub fn from_euler_xyz_deg(rx: f64, ry: f64, rz: f64) -> Self {
        Self::rot_x(rx).compose(&Self::rot_y(ry)).compose(&Self::rot_z(rz))
    }

    /// Builds a transform from a rotation matrix and translation.
    ///
    /// Returns `None` when the rotation block is not orthonormal with
    /// determinant +1.
    pub fn from_parts(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Option<Self> {
        let t = Self {
            rotation,
            translation,
        };
        t.is_rigid().then_some(t)
    }

    /// Frame whose columns are the given axes, located at `origin`.
    pub(crate) fn from_frame(
        origin: Vector3<f64>,
        x: Vector3<f64>,
        y: Vector3<f64>,
        z: Vector3<f64>,
    ) -> Self {
        Self {
            rotation: Matrix3::from_columns(&[x, y, z]),
            translation: origin,
        }
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation_vector(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// The 4x4 homogeneous matrix.
    pub fn matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `self · other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Transform) -> Transform {
        let t = Transform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        };
        t.renormalized()
    }

    pub fn inverse(&self) -> Transform {
        let rt = self.rotation.transpose();
        Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn apply_point(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    /// Maps a point of the local xy-plane (z = 0).
    pub fn apply_xy(&self, x: f64, y: f64) -> Point3<f64> {
        self.apply_point(&Point3::new(x, y, 0.0))
    }

    pub fn is_rigid(&self) -> bool {
        let r = &self.rotation;
        let err = (r.transpose() * r - Matrix3::identity()).amax();
        err <= EPS_TRANSFORM && (r.determinant() - 1.0).abs() <= EPS_TRANSFORM
    }

    /// Largest absolute entry-wise difference of the homogeneous matrices.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        (self.matrix() - other.matrix()).amax()
    }

    pub fn approx_eq(&self, other: &Transform, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Re-orthonormalizes the rotation block once drift exceeds the
    /// transform tolerance.
    fn renormalized(self) -> Transform {
        let r = &self.rotation;
        let drift = (r.transpose() * r - Matrix3::identity()).amax();
        if drift <= EPS_TRANSFORM {
            return self;
        }
        let rot = Rotation3::from_matrix(r);
        Transform {
            rotation: rot.into_inner(),
            translation: self.translation,
        }
    }

    /// Intrinsic x-y-z Euler angles in degrees, inverse of
    /// [`Transform::from_euler_xyz_deg`].
    pub fn euler_xyz_deg(&self) -> [f64; 3] {
        // R = Rx(a) Ry(b) Rz(c). b from atan2 stays accurate near ±90°, and
        // c is read from the residual so errors in a are absorbed.
        let r = &self.rotation;
        let cb = r[(0, 0)].hypot(r[(0, 1)]);
        let b = r[(0, 2)].atan2(cb);
        let a = if cb > 1e-12 {
            (-r[(1, 2)]).atan2(r[(2, 2)])
        } else {
            // Gimbal lock: fold everything into the x rotation.
            r[(2, 1)].atan2(r[(1, 1)])
        };
        let m = (Self::rot_x(a.to_degrees()).compose(&Self::rot_y(b.to_degrees()))).rotation.transpose() * r;
        let c = m[(1, 0)].atan2(m[(0, 0)]);
        [clean_deg(a.to_degrees()), clean_deg(b.to_degrees()), clean_deg(c.to_degrees())]
    }
}

/// sin/cos of an angle in degrees, exact at multiples of 90°.
pub(crate) fn exact_sin_cos(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (0.0, 1.0)
    } else if r == 90.0 {
        (1.0, 0.0)
    } else if r == 180.0 {
        (0.0, -1.0)
    } else if r == 270.0 {
        (-1.0, 0.0)
    } else {
        r.to_radians().sin_cos()
    }
}

fn clean_deg(d: f64) -> f64 {
    let r = d.round();
    let v = if (d - r).abs() < 1e-9 { r } else { d };
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: plain 4x4 row-by-column product.
    fn mat_mul(a: &Matrix4<f64>, b: &Matrix4<f64>) -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += a[(i, k)] * b[(k, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    #[test]
    fn identity_is_unit() {
        let t = Transform::rot_z(30.0).compose(&Transform::translation(5.0, 0.0, 0.0));
        assert!(Transform::identity().compose(&t).approx_eq(&t, 1e-12));
        assert!(t.compose(&Transform::identity()).approx_eq(&t, 1e-12));
    }

    #[test]
    fn translations_add() {
        let t = Transform::translation(1.0, 2.0, 3.0).compose(&Transform::translation(4.0, 5.0, 6.0));
        assert!(t.approx_eq(&Transform::translation(5.0, 7.0, 9.0), 0.0));
    }

    #[test]
    fn double_quarter_turn_about_x() {
        let a = Transform::rot_x(90.0);
        let composed = a.compose(&a);
        let oracle = mat_mul(&a.matrix(), &a.matrix());
        assert!((composed.matrix() - oracle).amax() < 1e-12);
        let p = composed.apply_point(&Point3::new(0.0, 1.0, 0.0));
        assert!((p - Point3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn bottom_row_is_homogeneous() {
        let m = Transform::from_euler_xyz_deg(10.0, 20.0, 30.0).matrix();
        assert_eq!(m.row(3).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn inverse_of_translation() {
        let t = Transform::translation(1.0, 2.0, 3.0).inverse();
        assert!(t.approx_eq(&Transform::translation(-1.0, -2.0, -3.0), 0.0));
        assert!(Transform::identity().inverse().approx_eq(&Transform::identity(), 0.0));
    }

    #[test]
    fn inverse_round_trips_points() {
        use rand::{Rng, SeedableRng};
        let t = Transform::rot_z(30.0).compose(&Transform::translation(5.0, 0.0, 0.0));
        let inv = t.inverse();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = Point3::new(
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-100.0..100.0),
            );
            let back = inv.apply_point(&t.apply_point(&p));
            worst = worst.max((back - p).norm());
        }
        assert!(worst < 1e-9, "round trip error {worst}");
    }

    #[test]
    fn euler_round_trip() {
        for (a, b, c) in [(90.0, 0.0, 0.0), (10.0, 20.0, 30.0), (0.0, 90.0, 45.0), (-170.0, 5.0, 120.0)] {
            let t = Transform::from_euler_xyz_deg(a, b, c);
            let [x, y, z] = t.euler_xyz_deg();
            assert!(Transform::from_euler_xyz_deg(x, y, z).approx_eq(&t, 1e-12));
        }
    }
}
