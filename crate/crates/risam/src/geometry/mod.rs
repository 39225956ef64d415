//! Lie-group arithmetic for the pose types optimized by the solver.
//!
//! Poses live on SE(2) or SE(3). Updates are applied through the group
//! exponential (`retract`), and residuals are expressed in local
//! coordinates (`local`), so the solver never touches a chart boundary.

use nalgebra::{DMatrix, DVector};

mod real;
mod se2;
mod se3;

pub use real::R1;
pub use se2::Pose2;
pub use se3::Pose3;

/// A Lie group used as a variable type in the factor graph.
///
/// `retract` is the full group exponential applied on the right:
/// `p.retract(d) = p ∘ Exp(d)`, and `local` is its inverse:
/// `a.local(b) = Log(a⁻¹ ∘ b)`, so `a.retract(&a.local(&b)) == b`.
pub trait LieGroup: Clone + PartialEq + std::fmt::Debug + Send + Sync + 'static {
    /// Tangent-space dimension (3 for SE(2), 6 for SE(3)).
    const DIM: usize;

    fn identity() -> Self;

    /// Group product `self ∘ other`.
    fn compose(&self, other: &Self) -> Self;

    fn inverse(&self) -> Self;

    /// Relative pose `self⁻¹ ∘ other`, satisfying
    /// `self.compose(&self.between(&other)) == other`.
    fn between(&self, other: &Self) -> Self {
        self.inverse().compose(other)
    }

    /// Exponential-map retraction `self ∘ Exp(delta)`.
    ///
    /// Panics if `delta.len() != Self::DIM`.
    fn retract(&self, delta: &DVector<f64>) -> Self;

    /// Local coordinates of `other` around `self`: `Log(self⁻¹ ∘ other)`.
    fn local(&self, other: &Self) -> DVector<f64>;

    /// Exponential map at the identity.
    fn exp(delta: &DVector<f64>) -> Self {
        Self::identity().retract(delta)
    }

    /// Logarithm map at the identity.
    fn log(&self) -> DVector<f64> {
        Self::identity().local(self)
    }

    /// Adjoint matrix of this element: `T·Exp(d) = Exp(Adj_T·d)·T`.
    fn adjoint(&self) -> DMatrix<f64>;

    /// Inverse right Jacobian of the exponential map at `tau`:
    /// the derivative of `Log(Exp(tau)·Exp(d))` with respect to `d` at 0.
    fn inv_right_jacobian(tau: &DVector<f64>) -> DMatrix<f64>;

    /// Translational part, used by trajectory-error metrics.
    fn translation(&self) -> DVector<f64>;
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_pose2(rng: &mut impl Rng) -> Pose2 {
        Pose2::new(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-PI..PI),
        )
    }

    fn random_pose3(rng: &mut impl Rng) -> Pose3 {
        let rot: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let tr: Vec<f64> = (0..3).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let delta = DVector::from_vec(vec![tr[0], tr[1], tr[2], rot[0], rot[1], rot[2]]);
        Pose3::exp(&delta)
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_relative_eq!(wrap_angle(3.0 * PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(PI + 0.25), -PI + 0.25, epsilon = 1e-12);
    }

    #[test]
    fn compose_identity_and_inverse() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_pose2(&mut rng);
            assert_relative_eq!(
                Pose2::identity().compose(&p).local(&p).norm(),
                0.0,
                epsilon = 1e-12
            );
            let prod = p.compose(&p.inverse());
            assert!(prod.local(&Pose2::identity()).norm() < 1e-10);

            let q = random_pose3(&mut rng);
            assert!(Pose3::identity().compose(&q).local(&q).norm() < 1e-10);
            assert!(q.compose(&q.inverse()).log().norm() < 1e-10);
        }
    }

    #[test]
    fn compose_hand_example() {
        // rotate 90° then advance one unit: ends up at (1, 1, π/2)
        let p = Pose2::new(1.0, 0.0, FRAC_PI_2).compose(&Pose2::new(1.0, 0.0, 0.0));
        assert_relative_eq!(p.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.y, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.theta, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn between_hand_example() {
        let a = Pose2::new(1.0, 1.0, FRAC_PI_2);
        let b = Pose2::new(1.0, 2.0, FRAC_PI_2);
        let d = a.between(&b);
        assert_relative_eq!(d.x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(d.theta, 0.0, epsilon = 1e-12);
        // between(p, p) = identity, between(identity, p) = p
        assert!(a.between(&a).log().norm() < 1e-15);
        let c = Pose2::identity().between(&b);
        assert_eq!(c, b);
    }

    #[test]
    fn retract_pure_translation_at_identity() {
        let p = Pose2::identity().retract(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        assert_eq!(p, Pose2::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn local_pure_rotation_at_identity() {
        let d = Pose2::identity().local(&Pose2::new(0.0, 0.0, 0.3));
        assert_relative_eq!(d[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(d[2], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn group_axioms_random_samples() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..50 {
            let (a, b, c) = (
                random_pose2(&mut rng),
                random_pose2(&mut rng),
                random_pose2(&mut rng),
            );
            let lhs = a.compose(&b).compose(&c);
            let rhs = a.compose(&b.compose(&c));
            assert!(lhs.local(&rhs).norm() < 1e-10);

            let (a, b, c) = (
                random_pose3(&mut rng),
                random_pose3(&mut rng),
                random_pose3(&mut rng),
            );
            let lhs = a.compose(&b).compose(&c);
            let rhs = a.compose(&b.compose(&c));
            assert!(lhs.local(&rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn se3_orthonormal_after_many_perturbations() {
        let mut rng = StdRng::seed_from_u64(3);
        let mut p = Pose3::identity();
        for _ in 0..10_000 {
            let d = DVector::from_fn(6, |_, _| rng.gen_range(-0.05..0.05));
            p = p.retract(&d);
        }
        let r = p.rotation.to_rotation_matrix();
        let should_be_id = r.matrix().transpose() * r.matrix();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((should_be_id[(i, j)] - expect).abs() < 1e-9);
            }
        }
        assert!((p.rotation.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn se3_log_at_angle_pi_is_deterministic() {
        // Rotations by exactly π have an ambiguous axis sign; the branch
        // with non-negative first nonzero component is chosen, so the two
        // equivalent quaternions (0,0,0,±1) log identically.
        let p = Pose3::from_parts(0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let tau = p.log();
        assert!(tau[5] > 0.0, "axis z component should be positive: {tau}");
        assert_relative_eq!(tau[5], PI, epsilon = 1e-12);

        let q = Pose3::from_parts(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0);
        let tau2 = q.log();
        assert_eq!(tau, tau2, "both covers of the π rotation must agree");

        // same branch rule on the x axis
        let r = Pose3::from_parts(0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(r.log()[3], PI, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn se2_retract_local_roundtrip(
            x in -10.0..10.0f64, y in -10.0..10.0f64, th in -3.1..3.1f64,
            d0 in -0.28f64..0.28, d1 in -0.28f64..0.28, d2 in -0.28f64..0.28,
        ) {
            let p = Pose2::new(x, y, th);
            let d = DVector::from_vec(vec![d0, d1, d2]);
            let back = p.local(&p.retract(&d));
            prop_assert!((&back - &d).norm() <= 1e-8);
        }

        #[test]
        fn se3_retract_local_roundtrip(
            t in proptest::array::uniform3(-10.0..10.0f64),
            w in proptest::array::uniform3(-1.0..1.0f64),
            d in proptest::array::uniform6(-0.2f64..0.2),
        ) {
            let base = DVector::from_vec(vec![t[0], t[1], t[2], w[0], w[1], w[2]]);
            let p = Pose3::exp(&base);
            let dv = DVector::from_vec(d.to_vec());
            let back = p.local(&p.retract(&dv));
            prop_assert!((&back - &dv).norm() <= 1e-8);
        }

        #[test]
        fn retract_zero_is_identity_map(x in -5.0..5.0f64, y in -5.0..5.0f64, th in -3.0..3.0f64) {
            let p = Pose2::new(x, y, th);
            let q = p.retract(&DVector::zeros(3));
            prop_assert!(p.local(&q).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_identity_se2_se3() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let p = random_pose2(&mut rng);
            let d = DVector::from_fn(3, |_, _| rng.gen_range(-1e-4..1e-4));
            let lhs = p.compose(&Pose2::exp(&d));
            let rhs = Pose2::exp(&DVector::from((&p.adjoint() * &d).as_slice().to_vec())).compose(&p);
            assert!(lhs.local(&rhs).norm() < 1e-9);

            let q = random_pose3(&mut rng);
            let d = DVector::from_fn(6, |_, _| rng.gen_range(-1e-4..1e-4));
            let lhs = q.compose(&Pose3::exp(&d));
            let rhs = Pose3::exp(&DVector::from((&q.adjoint() * &d).as_slice().to_vec())).compose(&q);
            assert!(lhs.local(&rhs).norm() < 1e-9);
        }
    }

    #[test]
    fn inv_right_jacobian_matches_finite_differences() {
        let mut rng = StdRng::seed_from_u64(13);
        let eps = 1e-6;
        for _ in 0..20 {
            // SE(2)
            let tau = DVector::from_fn(3, |_, _| rng.gen_range(-1.5..1.5));
            let jr = Pose2::inv_right_jacobian(&tau);
            let e = Pose2::exp(&tau);
            for i in 0..3 {
                let mut dp = DVector::zeros(3);
                dp[i] = eps;
                let plus = e.compose(&Pose2::exp(&dp)).log();
                dp[i] = -eps;
                let minus = e.compose(&Pose2::exp(&dp)).log();
                let fd = (plus - minus) / (2.0 * eps);
                for r in 0..3 {
                    assert!((jr[(r, i)] - fd[r]).abs() < 1e-6, "SE2 Jr mismatch");
                }
            }
            // SE(3)
            let tau = DVector::from_fn(6, |_, _| rng.gen_range(-1.0..1.0));
            let jr = Pose3::inv_right_jacobian(&tau);
            let e = Pose3::exp(&tau);
            for i in 0..6 {
                let mut dp = DVector::zeros(6);
                dp[i] = eps;
                let plus = e.compose(&Pose3::exp(&dp)).log();
                dp[i] = -eps;
                let minus = e.compose(&Pose3::exp(&dp)).log();
                let fd = (plus - minus) / (2.0 * eps);
                for r in 0..6 {
                    assert!((jr[(r, i)] - fd[r]).abs() < 1e-5, "SE3 Jr mismatch");
                }
            }
        }
    }

    #[test]
    fn scalar_group_behaves_like_addition() {
        let a = R1(2.5);
        let b = R1(-1.0);
        assert_eq!(a.compose(&b), R1(1.5));
        assert_eq!(a.between(&b), R1(-3.5));
        assert_eq!(a.retract(&DVector::from_vec(vec![0.5])), R1(3.0));
        assert_eq!(a.local(&b)[0], -3.5);
    }
}
