//! Factor-graph problem container: variables, factors with noise models
//! and robust kernel state, error evaluation and robustly weighted
//! linearization.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::geometry::LieGroup;
use crate::kernels::Kernel;

/// Index of a variable in a factor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key(pub usize);

impl std::fmt::Display for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "x{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("values are missing key {0}")]
    MissingKey(Key),
    #[error("information matrix is not positive definite")]
    NotPositiveDefinite,
}

/// Gaussian noise model stored as its square-root information matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    sqrt_info: DMatrix<f64>,
}

impl NoiseModel {
    pub fn identity(dim: usize) -> Self {
        NoiseModel {
            sqrt_info: DMatrix::identity(dim, dim),
        }
    }

    /// Isotropic model with standard deviation `sigma` on every component.
    pub fn isotropic(dim: usize, sigma: f64) -> Self {
        assert!(sigma > 0.0, "sigma must be positive");
        NoiseModel {
            sqrt_info: DMatrix::identity(dim, dim) / sigma,
        }
    }

    /// Diagonal model from per-component standard deviations.
    pub fn from_sigmas(sigmas: &[f64]) -> Self {
        assert!(sigmas.iter().all(|s| *s > 0.0), "sigmas must be positive");
        NoiseModel {
            sqrt_info: DMatrix::from_diagonal(&DVector::from_iterator(
                sigmas.len(),
                sigmas.iter().map(|s| 1.0 / s),
            )),
        }
    }

    pub fn from_sqrt_information(sqrt_info: DMatrix<f64>) -> Self {
        assert_eq!(sqrt_info.nrows(), sqrt_info.ncols());
        NoiseModel { sqrt_info }
    }

    /// Factor an information matrix into upper-triangular square-root form.
    pub fn from_information(info: DMatrix<f64>) -> Result<Self, GraphError> {
        assert_eq!(info.nrows(), info.ncols());
        let chol = info
            .clone()
            .cholesky()
            .ok_or(GraphError::NotPositiveDefinite)?;
        Ok(NoiseModel {
            sqrt_info: chol.l().transpose(),
        })
    }

    pub fn dim(&self) -> usize {
        self.sqrt_info.nrows()
    }

    pub fn sqrt_information(&self) -> &DMatrix<f64> {
        &self.sqrt_info
    }

    /// Reconstruct the information matrix `RᵀR`.
    pub fn information(&self) -> DMatrix<f64> {
        self.sqrt_info.transpose() * &self.sqrt_info
    }

    pub fn whiten(&self, r: &DVector<f64>) -> DVector<f64> {
        &self.sqrt_info * r
    }

    pub fn whiten_matrix(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        &self.sqrt_info * a
    }
}

/// A measurement constraint: a prior on one pose or a relative-pose
/// (between) constraint on two.
#[derive(Debug, Clone)]
pub struct Factor<G: LieGroup> {
    keys: Vec<Key>,
    pub measurement: G,
    pub noise: NoiseModel,
    pub kernel: Kernel,
    /// Per-factor graduation starting point; effective μ during
    /// graduation is `max(global μ, mu_init_local)`.
    pub mu_init_local: f64,
    /// Measurements exempt from outlier handling (odometry, priors);
    /// always carry a quadratic kernel.
    pub known_inlier: bool,
}

impl<G: LieGroup> Factor<G> {
    pub fn prior(key: Key, measurement: G, noise: NoiseModel) -> Self {
        assert_eq!(noise.dim(), G::DIM, "noise dimension must match the group");
        Factor {
            keys: vec![key],
            measurement,
            noise,
            kernel: Kernel::Quadratic,
            mu_init_local: 0.0,
            known_inlier: false,
        }
    }

    pub fn between(from: Key, to: Key, measurement: G, noise: NoiseModel) -> Self {
        assert_eq!(noise.dim(), G::DIM, "noise dimension must match the group");
        assert_ne!(from, to, "between factor needs two distinct keys");
        Factor {
            keys: vec![from, to],
            measurement,
            noise,
            kernel: Kernel::Quadratic,
            mu_init_local: 0.0,
            known_inlier: false,
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        assert!(
            !self.known_inlier,
            "known-inlier factors keep their quadratic kernel"
        );
        self.kernel = kernel;
        self
    }

    /// Mark this measurement as exempt from outlier handling. Forces the
    /// quadratic kernel.
    pub fn known_inlier(mut self) -> Self {
        self.known_inlier = true;
        self.kernel = Kernel::Quadratic;
        self
    }

    pub fn keys(&self) -> &[Key] {
        &self.keys
    }

    pub fn is_prior(&self) -> bool {
        self.keys.len() == 1
    }

    pub fn dim(&self) -> usize {
        self.noise.dim()
    }

    /// Kernel to use at global graduation parameter `mu`.
    pub fn effective_kernel(&self, mu: f64) -> Kernel {
        if self.kernel.is_graduated() {
            self.kernel.with_mu(mu.max(self.mu_init_local))
        } else {
            self.kernel
        }
    }

    /// Sqrt-information-weighted residual of this factor at `values`.
    pub fn whitened_residual(&self, values: &Values<G>) -> Result<DVector<f64>, GraphError> {
        let predicted = match self.keys.len() {
            1 => values.get(self.keys[0])?.clone(),
            2 => {
                let a = values.get(self.keys[0])?;
                let b = values.get(self.keys[1])?;
                a.between(b)
            }
            n => unreachable!("factors have 1 or 2 keys, got {n}"),
        };
        Ok(self.noise.whiten(&self.measurement.local(&predicted)))
    }

    /// Robustly weighted linearization at `values` with global
    /// graduation parameter `mu` (IRLS convention: Jacobians and rhs
    /// both scaled by the square root of the kernel weight).
    pub fn linearize(&self, values: &Values<G>, mu: f64) -> Result<LinearFactor, GraphError> {
        let r = self.whitened_residual(values)?;
        let w = self.effective_kernel(mu).weight(r.norm());
        let sw = w.sqrt();

        let mut jacobians = Vec::with_capacity(self.keys.len());
        match self.keys.len() {
            1 => {
                let pose = values.get(self.keys[0])?;
                let tau = self.measurement.local(pose);
                let j = G::inv_right_jacobian(&tau);
                jacobians.push(self.noise.whiten_matrix(&j) * sw);
            }
            2 => {
                let a = values.get(self.keys[0])?;
                let b = values.get(self.keys[1])?;
                let h = a.between(b);
                let tau = self.measurement.local(&h);
                let jr = G::inv_right_jacobian(&tau);
                let j_b = self.noise.whiten_matrix(&jr) * sw;
                let j_a = -(&j_b) * h.inverse().adjoint();
                jacobians.push(j_a);
                jacobians.push(j_b);
            }
            _ => unreachable!(),
        }
        Ok(LinearFactor {
            keys: self.keys.clone(),
            jacobians,
            rhs: r * (-sw),
        })
    }

    /// Chi-square consistency test on the raw whitened residual:
    /// true (inlier) iff the chi-square CDF of |r|² with `dim` degrees
    /// of freedom lies below `threshold`.
    pub fn chi2_classify(&self, values: &Values<G>, threshold: f64) -> Result<bool, GraphError> {
        assert!(
            threshold > 0.0 && threshold < 1.0,
            "threshold is a percentile"
        );
        Ok(self.chi2_percentile(values)? < threshold)
    }

    /// Chi-square CDF of the squared whitened residual norm.
    pub fn chi2_percentile(&self, values: &Values<G>) -> Result<f64, GraphError> {
        let r = self.whitened_residual(values)?;
        let dist = ChiSquared::new(self.dim() as f64).expect("dof > 0");
        Ok(dist.cdf(r.norm_squared()))
    }
}

/// A linearized factor: whitened, robust-weighted Jacobian blocks and
/// right-hand side, one block per connected variable.
#[derive(Debug, Clone)]
pub struct LinearFactor {
    pub keys: Vec<Key>,
    pub jacobians: Vec<DMatrix<f64>>,
    pub rhs: DVector<f64>,
}

/// The nonlinear problem: an ordered list of factors over a set of
/// variables.
#[derive(Debug, Clone, Default)]
pub struct FactorGraph<G: LieGroup> {
    factors: Vec<Factor<G>>,
    variables: BTreeSet<Key>,
}

impl<G: LieGroup> FactorGraph<G> {
    pub fn new() -> Self {
        FactorGraph {
            factors: Vec::new(),
            variables: BTreeSet::new(),
        }
    }

    pub fn add_factor(&mut self, factor: Factor<G>) -> usize {
        self.variables.extend(factor.keys().iter().copied());
        self.factors.push(factor);
        self.factors.len() - 1
    }

    pub fn factors(&self) -> &[Factor<G>] {
        &self.factors
    }

    pub fn factor(&self, index: usize) -> &Factor<G> {
        &self.factors[index]
    }

    pub fn factor_mut(&mut self, index: usize) -> &mut Factor<G> {
        &mut self.factors[index]
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn variables(&self) -> impl Iterator<Item = Key> + '_ {
        self.variables.iter().copied()
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    /// Total robust error Σ ρ(|whitened residual|) at global graduation
    /// parameter `mu`. Values must cover every variable.
    pub fn robust_error(&self, values: &Values<G>, mu: f64) -> f64 {
        self.factors
            .iter()
            .map(|f| {
                let r = f
                    .whitened_residual(values)
                    .expect("values must cover all graph variables");
                f.effective_kernel(mu).evaluate(r.norm())
            })
            .sum()
    }
}

/// Assignment of a pose to every variable.
#[derive(Debug, Clone, Default)]
pub struct Values<G: LieGroup> {
    slots: Vec<Option<G>>,
}

impl<G: LieGroup> Values<G> {
    pub fn new() -> Self {
        Values { slots: Vec::new() }
    }

    pub fn insert(&mut self, key: Key, value: G) {
        if key.0 >= self.slots.len() {
            self.slots.resize(key.0 + 1, None);
        }
        self.slots[key.0] = Some(value);
    }

    pub fn get(&self, key: Key) -> Result<&G, GraphError> {
        self.slots
            .get(key.0)
            .and_then(|s| s.as_ref())
            .ok_or(GraphError::MissingKey(key))
    }

    pub fn contains(&self, key: Key) -> bool {
        self.slots.get(key.0).is_some_and(|s| s.is_some())
    }

    pub fn len(&self) -> usize {
        self.slots.iter().filter(|s| s.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|_| Key(i)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Key, &G)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|g| (Key(i), g)))
    }

    /// Apply a tangent update to every contained pose: `p ⊕ δ_key`.
    pub fn retract_all(&self, delta: &TangentMap) -> Values<G> {
        let slots = self
            .slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.as_ref()
                    .map(|g| g.retract(&delta.get_vector(Key(i))))
            })
            .collect();
        Values { slots }
    }
}

/// Per-variable tangent vectors over contiguous keys, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentMap {
    dim: usize,
    data: Vec<f64>,
}

impl TangentMap {
    pub fn zeros(dim: usize, num_keys: usize) -> Self {
        TangentMap {
            dim,
            data: vec![0.0; dim * num_keys],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_keys(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Grow to cover `num_keys` keys, zero-filling new entries.
    pub fn resize(&mut self, num_keys: usize) {
        self.data.resize(self.dim * num_keys, 0.0);
    }

    pub fn get(&self, key: Key) -> &[f64] {
        &self.data[key.0 * self.dim..(key.0 + 1) * self.dim]
    }

    pub fn get_vector(&self, key: Key) -> DVector<f64> {
        DVector::from_column_slice(self.get(key))
    }

    pub fn set(&mut self, key: Key, v: &DVector<f64>) {
        assert_eq!(v.len(), self.dim);
        self.data[key.0 * self.dim..(key.0 + 1) * self.dim].copy_from_slice(v.as_slice());
    }

    pub fn set_zero(&mut self, key: Key) {
        self.data[key.0 * self.dim..(key.0 + 1) * self.dim].fill(0.0);
    }

    pub fn key_norm(&self, key: Key) -> f64 {
        self.get(key).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &TangentMap) -> f64 {
        debug_assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scale(&self, s: f64) -> TangentMap {
        TangentMap {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self + t·(other − self)`, the segment between two steps.
    pub fn lerp(&self, other: &TangentMap, t: f64) -> TangentMap {
        debug_assert_eq!(self.data.len(), other.data.len());
        TangentMap {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        }
    }

    pub fn sub(&self, other: &TangentMap) -> TangentMap {
        debug_assert_eq!(self.data.len(), other.data.len());
        TangentMap {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = Key> {
        (0..self.num_keys()).map(Key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose2, Pose3};
    use approx::assert_relative_eq;
    use nalgebra::{UnitQuaternion, Vector3};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn values2(poses: &[Pose2]) -> Values<Pose2> {
        let mut v = Values::new();
        for (i, p) in poses.iter().enumerate() {
            v.insert(Key(i), *p);
        }
        v
    }

    #[test]
    fn satisfied_factor_has_zero_residual() {
        let v = values2(&[Pose2::new(1.0, 2.0, 0.5), Pose2::new(2.0, 2.0, 0.5)]);
        let meas = v.get(Key(0)).unwrap().between(v.get(Key(1)).unwrap());
        let f = Factor::between(Key(0), Key(1), meas, NoiseModel::identity(3));
        assert!(f.whitened_residual(&v).unwrap().norm() < 1e-14);

        let prior = Factor::prior(Key(0), Pose2::identity(), NoiseModel::identity(3));
        let vid = values2(&[Pose2::identity()]);
        assert_eq!(prior.whitened_residual(&vid).unwrap().norm(), 0.0);
    }

    #[test]
    fn prior_residual_at_offset() {
        let f = Factor::prior(Key(0), Pose2::identity(), NoiseModel::identity(3));
        let v = values2(&[Pose2::new(1.0, 0.0, 0.0)]);
        let r = f.whitened_residual(&v).unwrap();
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(r[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(r[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn missing_key_is_reported() {
        let f = Factor::between(
            Key(0),
            Key(5),
            Pose2::identity(),
            NoiseModel::identity(3),
        );
        let v = values2(&[Pose2::identity()]);
        assert!(matches!(
            f.whitened_residual(&v),
            Err(GraphError::MissingKey(Key(5)))
        ));
    }

    #[test]
    fn robust_error_quadratic_equals_half_squared_norm() {
        let mut g = FactorGraph::new();
        let v = values2(&[Pose2::identity(), Pose2::new(1.0, 0.5, 0.1)]);
        g.add_factor(Factor::prior(
            Key(0),
            Pose2::new(0.1, 0.0, 0.0),
            NoiseModel::isotropic(3, 0.5),
        ));
        g.add_factor(Factor::between(
            Key(0),
            Key(1),
            Pose2::new(0.9, 0.4, 0.0),
            NoiseModel::identity(3),
        ));
        let direct: f64 = g
            .factors()
            .iter()
            .map(|f| 0.5 * f.whitened_residual(&v).unwrap().norm_squared())
            .sum();
        assert_relative_eq!(g.robust_error(&v, 1.0), direct, epsilon = 1e-12);
    }

    #[test]
    fn effective_mu_uses_per_factor_floor() {
        let f = Factor::prior(Key(0), Pose2::identity(), NoiseModel::identity(3));
        let mut f = f.with_kernel(Kernel::sig(3.0, 1.0));
        f.mu_init_local = 0.5;
        match f.effective_kernel(0.2) {
            Kernel::Sig { mu, .. } => assert_eq!(mu, 0.5),
            k => panic!("unexpected kernel {k:?}"),
        }
        match f.effective_kernel(0.8) {
            Kernel::Sig { mu, .. } => assert_eq!(mu, 0.8),
            k => panic!("unexpected kernel {k:?}"),
        }
    }

    #[test]
    fn quadratic_linearization_is_unweighted() {
        let f = Factor::prior(
            Key(0),
            Pose2::identity(),
            NoiseModel::from_sigmas(&[0.5, 0.5, 0.1]),
        );
        let v = values2(&[Pose2::new(0.3, -0.2, 0.1)]);
        let lin = f.linearize(&v, 1.0).unwrap();
        let r = f.whitened_residual(&v).unwrap();
        assert_relative_eq!((&lin.rhs + &r).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sig_linearization_vanishes_for_huge_residuals() {
        let f = Factor::prior(Key(0), Pose2::identity(), NoiseModel::identity(3))
            .with_kernel(Kernel::sig(3.0, 1.0));
        let v = values2(&[Pose2::new(1e4, 0.0, 0.0)]);
        let lin = f.linearize(&v, 1.0).unwrap();
        assert!(lin.jacobians[0].norm() < 1e-3);
    }

    fn finite_difference_jacobians<G: LieGroup>(
        f: &Factor<G>,
        v: &Values<G>,
    ) -> Vec<DMatrix<f64>> {
        let eps = 1e-6;
        f.keys()
            .iter()
            .map(|&k| {
                let mut j = DMatrix::zeros(f.dim(), G::DIM);
                for c in 0..G::DIM {
                    let mut dp = DVector::zeros(G::DIM);
                    dp[c] = eps;
                    let mut vp = v.clone();
                    vp.insert(k, v.get(k).unwrap().retract(&dp));
                    let rp = f.whitened_residual(&vp).unwrap();
                    dp[c] = -eps;
                    let mut vm = v.clone();
                    vm.insert(k, v.get(k).unwrap().retract(&dp));
                    let rm = f.whitened_residual(&vm).unwrap();
                    j.set_column(c, &((rp - rm) / (2.0 * eps)));
                }
                j
            })
            .collect()
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..50 {
            // SE(2) between factor with a non-trivial noise model
            let a = Pose2::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-3.0..3.0),
            );
            let b = Pose2::new(
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-5.0..5.0),
                rng.gen_range(-3.0..3.0),
            );
            let z = Pose2::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let v = values2(&[a, b]);
            let f = Factor::between(
                Key(0),
                Key(1),
                z,
                NoiseModel::from_sigmas(&[0.3, 0.5, 0.05]),
            );
            let lin = f.linearize(&v, 1.0).unwrap();
            let fd = finite_difference_jacobians(&f, &v);
            for (a, b) in lin.jacobians.iter().zip(fd.iter()) {
                let scale = b.norm().max(1.0);
                assert!((a - b).norm() / scale < 1e-5, "SE2 jacobian mismatch");
            }

            // SE(3) prior
            let q = UnitQuaternion::from_euler_angles(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            );
            let p = Pose3::new(
                q,
                Vector3::new(rng.gen(), rng.gen(), rng.gen()),
            );
            let mut v3 = Values::new();
            v3.insert(Key(0), p);
            let f3 = Factor::prior(Key(0), Pose3::identity(), NoiseModel::identity(6));
            let lin = f3.linearize(&v3, 1.0).unwrap();
            let fd = finite_difference_jacobians(&f3, &v3);
            let scale = fd[0].norm().max(1.0);
            assert!(
                (&lin.jacobians[0] - &fd[0]).norm() / scale < 1e-5,
                "SE3 jacobian mismatch"
            );
        }
    }

    #[test]
    fn linearized_gradient_matches_robust_error_slope() {
        // robust_error(v ⊕ tΔ) should decrease along the assembled
        // gradient direction with matching first-order slope.
        let mut rng = StdRng::seed_from_u64(9);
        let mut g = FactorGraph::new();
        let poses: Vec<Pose2> = (0..4)
            .map(|_| {
                Pose2::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let v = values2(&poses);
        for i in 0..3 {
            g.add_factor(
                Factor::between(
                    Key(i),
                    Key(i + 1),
                    Pose2::new(1.0, 0.0, 0.0),
                    NoiseModel::isotropic(3, 0.2),
                )
                .with_kernel(Kernel::sig(3.0, 0.7)),
            );
        }
        g.add_factor(Factor::prior(
            Key(0),
            Pose2::identity(),
            NoiseModel::identity(3),
        ));

        let mu = 0.7;
        // gradient in tangent coordinates: g_k = Σ (−AᵀB) contributions
        let mut grad = TangentMap::zeros(3, 4);
        for f in g.factors() {
            let lin = f.linearize(&v, mu).unwrap();
            for (k, j) in lin.keys.iter().zip(lin.jacobians.iter()) {
                let contrib = -(j.transpose() * &lin.rhs);
                let cur = grad.get_vector(*k);
                grad.set(*k, &(cur + contrib));
            }
        }
        let e0 = g.robust_error(&v, mu);
        let t = 1e-6;
        let step = grad.scale(-t);
        let e1 = g.robust_error(&v.retract_all(&step), mu);
        let slope_fd = (e1 - e0) / t;
        let slope_lin = -grad.dot(&grad);
        assert_relative_eq!(slope_fd, slope_lin, max_relative = 1e-4);
    }

    #[test]
    fn chi2_classification() {
        // zero residual: inlier at any threshold
        let f = Factor::prior(Key(0), Pose2::identity(), NoiseModel::identity(3));
        let v = values2(&[Pose2::identity()]);
        assert!(f.chi2_classify(&v, 0.01).unwrap());

        // squared norm 20 with 3 dof sits at percentile ~0.99983
        let v = values2(&[Pose2::new(20.0f64.sqrt(), 0.0, 0.0)]);
        let p = f.chi2_percentile(&v).unwrap();
        assert_relative_eq!(p, 0.99983, epsilon = 1e-4);
        assert!(!f.chi2_classify(&v, 0.95).unwrap());
        assert!(!f.chi2_classify(&v, 0.9).unwrap());

        // between thresholds 0.25 / 0.9: neither strong inlier nor outlier
        let mid = values2(&[Pose2::new(1.4, 0.0, 0.0)]);
        let p = f.chi2_percentile(&mid).unwrap();
        assert!(p > 0.25 && p < 0.9, "p = {p}");
    }

    #[test]
    fn information_roundtrip() {
        let info = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let nm = NoiseModel::from_information(info.clone()).unwrap();
        assert_relative_eq!(nm.information(), info, epsilon = 1e-12);

        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(NoiseModel::from_information(bad).is_err());
    }
}
