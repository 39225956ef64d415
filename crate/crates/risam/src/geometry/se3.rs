use nalgebra::{DMatrix, DVector, Matrix3, Quaternion, UnitQuaternion, Vector3};

use super::LieGroup;

/// A rigid-body pose in 3D; element of SE(3).
///
/// The rotation is stored as a unit quaternion and re-normalized after
/// every composition so long chains stay orthonormal. Tangent
/// coordinates are ordered (vx, vy, vz, ωx, ωy, ωz) — translation first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3 {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Pose3 {
    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Pose3 {
            rotation,
            translation,
        }
    }

    pub fn from_parts(tx: f64, ty: f64, tz: f64, qx: f64, qy: f64, qz: f64, qw: f64) -> Self {
        let q = UnitQuaternion::from_quaternion(Quaternion::new(qw, qx, qy, qz));
        Pose3::new(q, Vector3::new(tx, ty, tz))
    }
}

fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

fn so3_exp(phi: &Vector3<f64>) -> UnitQuaternion<f64> {
    let theta2 = phi.norm_squared();
    let (w, s) = if theta2 < 1e-12 {
        // sin(θ/2)/θ ≈ 1/2 − θ²/48
        (1.0 - theta2 / 8.0, 0.5 - theta2 / 48.0)
    } else {
        let theta = theta2.sqrt();
        ((theta / 2.0).cos(), (theta / 2.0).sin() / theta)
    };
    let v = phi * s;
    UnitQuaternion::from_quaternion(Quaternion::new(w, v.x, v.y, v.z))
}

// Rotation-vector logarithm. The quaternion double cover is resolved
// toward a non-negative scalar part; at a rotation of exactly π the
// axis branch with non-negative first nonzero component is chosen so
// the result is deterministic.
fn so3_log(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    let mut w = q.scalar();
    let mut v = q.vector().into_owned();
    if w < 0.0 {
        w = -w;
        v = -v;
    }
    let s = v.norm();
    if s < 1e-9 {
        // θ/s ≈ (2/w)(1 − s²/(3w²))
        return v * (2.0 / w) * (1.0 - s * s / (3.0 * w * w));
    }
    if w == 0.0 {
        for i in 0..3 {
            if v[i] != 0.0 {
                if v[i] < 0.0 {
                    v = -v;
                }
                break;
            }
        }
    }
    let theta = 2.0 * s.atan2(w);
    v * (theta / s)
}

// V(φ) such that Exp((ρ, φ)) has translation V(φ)·ρ. Equals the SO(3)
// left Jacobian.
fn so3_v(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = phi.norm_squared();
    let k = hat(phi);
    let (a, b) = if theta2 < 1e-8 {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        let theta = theta2.sqrt();
        ((1.0 - theta.cos()) / theta2, (theta - theta.sin()) / (theta2 * theta))
    };
    Matrix3::identity() + k * a + k * k * b
}

// Inverse of V(φ), valid for |φ| ≤ π as produced by the logarithm.
fn so3_v_inv(phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = phi.norm_squared();
    let k = hat(phi);
    let beta = if theta2 < 1e-8 {
        1.0 / 12.0 + theta2 / 720.0
    } else {
        let theta = theta2.sqrt();
        let half = theta / 2.0;
        // (1 − (θ/2)·cot(θ/2)) / θ², stable through θ = π
        (1.0 - half * half.cos() / half.sin()) / theta2
    };
    Matrix3::identity() - k * 0.5 + k * k * beta
}

// Upper-right block of the SE(3) left Jacobian (Barfoot's Q matrix),
// for tangent ordering (ρ, φ).
fn q_block(rho: &Vector3<f64>, phi: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = phi.norm_squared();
    let (c1, c2, c3) = if theta2 < 1e-4 {
        (
            1.0 / 6.0 - theta2 / 120.0,
            -1.0 / 24.0 + theta2 / 720.0,
            -1.0 / 120.0 + theta2 / 5040.0,
        )
    } else {
        let theta = theta2.sqrt();
        (
            (theta - theta.sin()) / (theta2 * theta),
            (1.0 - theta2 / 2.0 - theta.cos()) / (theta2 * theta2),
            (theta - theta.sin() - theta2 * theta / 6.0) / (theta2 * theta2 * theta),
        )
    };
    let rx = hat(rho);
    let px = hat(phi);
    let pxrx = px * rx;
    let rxpx = rx * px;
    let pxrxpx = pxrx * px;
    rx * 0.5 + (pxrx + rxpx + pxrxpx) * c1 - (px * pxrx + rxpx * px - pxrxpx * 3.0) * c2
        - (pxrxpx * px + px * pxrxpx) * (0.5 * (c2 - 3.0 * c3))
}

// Inverse left Jacobian of the SE(3) exponential map.
fn jl_inv(tau: &DVector<f64>) -> DMatrix<f64> {
    let rho = Vector3::new(tau[0], tau[1], tau[2]);
    let phi = Vector3::new(tau[3], tau[4], tau[5]);
    let a_inv = so3_v_inv(&phi);
    let b = -a_inv * q_block(&rho, &phi) * a_inv;
    let mut j = DMatrix::zeros(6, 6);
    j.view_mut((0, 0), (3, 3)).copy_from(&a_inv);
    j.view_mut((3, 3), (3, 3)).copy_from(&a_inv);
    j.view_mut((0, 3), (3, 3)).copy_from(&b);
    j
}

impl LieGroup for Pose3 {
    const DIM: usize = 6;

    fn identity() -> Self {
        Pose3::new(UnitQuaternion::identity(), Vector3::zeros())
    }

    fn compose(&self, other: &Self) -> Self {
        let q = self.rotation * other.rotation;
        // renormalize to keep quaternion drift from accumulating
        let q = UnitQuaternion::new_normalize(q.into_inner());
        Pose3::new(q, self.translation + self.rotation * other.translation)
    }

    fn inverse(&self) -> Self {
        let q = self.rotation.inverse();
        Pose3::new(q, -(q * self.translation))
    }

    fn retract(&self, delta: &DVector<f64>) -> Self {
        assert_eq!(delta.len(), 6, "tangent dimension mismatch for SE(3)");
        let rho = Vector3::new(delta[0], delta[1], delta[2]);
        let phi = Vector3::new(delta[3], delta[4], delta[5]);
        let step = Pose3::new(so3_exp(&phi), so3_v(&phi) * rho);
        self.compose(&step)
    }

    fn local(&self, other: &Self) -> DVector<f64> {
        let rel = self.between(other);
        let phi = so3_log(&rel.rotation);
        let rho = so3_v_inv(&phi) * rel.translation;
        DVector::from_vec(vec![rho.x, rho.y, rho.z, phi.x, phi.y, phi.z])
    }

    fn adjoint(&self) -> DMatrix<f64> {
        let r = self.rotation.to_rotation_matrix().into_inner();
        let tr = hat(&self.translation) * r;
        let mut a = DMatrix::zeros(6, 6);
        a.view_mut((0, 0), (3, 3)).copy_from(&r);
        a.view_mut((3, 3), (3, 3)).copy_from(&r);
        a.view_mut((0, 3), (3, 3)).copy_from(&tr);
        a
    }

    fn inv_right_jacobian(tau: &DVector<f64>) -> DMatrix<f64> {
        jl_inv(&(-tau))
    }

    fn translation(&self) -> DVector<f64> {
        DVector::from_vec(vec![
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ])
    }
}
