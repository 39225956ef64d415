use nalgebra::{DMatrix, DVector, Matrix2, Rotation2, Vector2};

use super::{wrap_angle, LieGroup};

/// A planar rigid-body pose; element of SE(2).
///
/// Tangent coordinates are ordered (vx, vy, ω) — translation first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    /// Heading, kept normalized to (−π, π].
    pub theta: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2 {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    fn rotation(&self) -> Rotation2<f64> {
        Rotation2::new(self.theta)
    }

    fn trans(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }
}

// V(ω) such that Exp((v, ω)) has translation V(ω)·v.
fn exp_v(omega: f64) -> Matrix2<f64> {
    let (a, b) = if omega.abs() < 1e-6 {
        let w2 = omega * omega;
        (1.0 - w2 / 6.0, omega / 2.0 - omega * w2 / 24.0)
    } else {
        (omega.sin() / omega, (1.0 - omega.cos()) / omega)
    };
    Matrix2::new(a, -b, b, a)
}

// M(ω) = ∫₀¹ V(sω)·s ds, the translation block of the SE(2) left Jacobian
// before the 90° twist.
fn jl_m(omega: f64) -> Matrix2<f64> {
    let (p, q) = if omega.abs() < 1e-4 {
        let w2 = omega * omega;
        (0.5 - w2 / 24.0, omega / 6.0 - omega * w2 / 120.0)
    } else {
        let w2 = omega * omega;
        ((1.0 - omega.cos()) / w2, (omega - omega.sin()) / w2)
    };
    Matrix2::new(p, -q, q, p)
}

// Inverse left Jacobian of the SE(2) exponential map.
fn jl_inv(tau: &DVector<f64>) -> DMatrix<f64> {
    let v = Vector2::new(tau[0], tau[1]);
    let omega = tau[2];
    let v_inv = exp_v(omega)
        .try_inverse()
        .expect("SE(2) V matrix is always invertible for |omega| <= pi");
    // q = -S·M(ω)·v with S the 90° CCW rotation
    let m = jl_m(omega) * v;
    let q = Vector2::new(m[1], -m[0]);
    let tq = -v_inv * q;
    let mut j = DMatrix::identity(3, 3);
    j.view_mut((0, 0), (2, 2)).copy_from(&v_inv);
    j[(0, 2)] = tq[0];
    j[(1, 2)] = tq[1];
    j
}

impl LieGroup for Pose2 {
    const DIM: usize = 3;

    fn identity() -> Self {
        Pose2::new(0.0, 0.0, 0.0)
    }

    fn compose(&self, other: &Self) -> Self {
        let t = self.trans() + self.rotation() * other.trans();
        Pose2::new(t.x, t.y, self.theta + other.theta)
    }

    fn inverse(&self) -> Self {
        let t = self.rotation().inverse() * (-self.trans());
        Pose2::new(t.x, t.y, -self.theta)
    }

    fn retract(&self, delta: &DVector<f64>) -> Self {
        assert_eq!(delta.len(), 3, "tangent dimension mismatch for SE(2)");
        let v = Vector2::new(delta[0], delta[1]);
        let omega = delta[2];
        let t = exp_v(omega) * v;
        self.compose(&Pose2::new(t.x, t.y, omega))
    }

    fn local(&self, other: &Self) -> DVector<f64> {
        let rel = self.between(other);
        let omega = rel.theta;
        let v = exp_v(omega)
            .try_inverse()
            .expect("SE(2) V matrix is always invertible for |omega| <= pi")
            * rel.trans();
        DVector::from_vec(vec![v.x, v.y, omega])
    }

    fn adjoint(&self) -> DMatrix<f64> {
        let mut a = DMatrix::identity(3, 3);
        let r = self.rotation();
        a.view_mut((0, 0), (2, 2)).copy_from(r.matrix());
        a[(0, 2)] = self.y;
        a[(1, 2)] = -self.x;
        a
    }

    fn inv_right_jacobian(tau: &DVector<f64>) -> DMatrix<f64> {
        jl_inv(&(-tau))
    }

    fn translation(&self) -> DVector<f64> {
        DVector::from_vec(vec![self.x, self.y])
    }
}
