//! Robust kernels and the graduation schedule.
//!
//! All kernels operate on the *whitened* residual norm, so a shape
//! parameter of `c = 3` means "three sigma". The graduated kernel
//! interpolates between a scaled quadratic (μ = 0) and Geman-McClure
//! (μ = 1) over the finite range μ ∈ [0, 1]:
//!
//! ```text
//! ρ(r; μ) = ½ · c²r² / (c² + (r²)^μ)
//! ```
//!
//! which keeps the number of graduation steps independent of the
//! residual scale.

/// Default outlier-component sigma for the Max-Mixture kernel.
pub const MAX_MIXTURE_OUTLIER_SIGMA: f64 = 1e7;
/// Default outlier-component weight for the Max-Mixture kernel.
pub const MAX_MIXTURE_OUTLIER_WEIGHT: f64 = 1e-7;

/// A robust kernel applied to the whitened residual norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// Plain least squares: ρ(r) = ½r².
    Quadratic,
    /// Quadratic up to `c`, linear beyond.
    Huber { c: f64 },
    /// Asymptotically constant: ρ(r) = ½c²r²/(c² + r²).
    GemanMcClure { c: f64 },
    /// Two-component mixture choosing the cheaper hypothesis per
    /// evaluation; `dim` is the residual dimension entering the
    /// normalization constants.
    MaxMixture {
        outlier_sigma: f64,
        outlier_weight: f64,
        dim: usize,
    },
    /// Scale-invariant graduated kernel; quadratic at μ = 0,
    /// Geman-McClure at μ = 1.
    Sig { c: f64, mu: f64 },
}

impl Kernel {
    pub fn sig(c: f64, mu: f64) -> Self {
        assert!(c > 0.0, "kernel shape parameter must be positive");
        assert!((0.0..=1.0).contains(&mu), "mu must lie in [0, 1]");
        Kernel::Sig { c, mu }
    }

    pub fn huber(c: f64) -> Self {
        assert!(c > 0.0, "kernel shape parameter must be positive");
        Kernel::Huber { c }
    }

    pub fn geman_mcclure(c: f64) -> Self {
        assert!(c > 0.0, "kernel shape parameter must be positive");
        Kernel::GemanMcClure { c }
    }

    pub fn max_mixture(dim: usize) -> Self {
        Kernel::MaxMixture {
            outlier_sigma: MAX_MIXTURE_OUTLIER_SIGMA,
            outlier_weight: MAX_MIXTURE_OUTLIER_WEIGHT,
            dim,
        }
    }

    /// The same kernel with its graduation parameter replaced; identity
    /// for non-graduated kernels.
    pub fn with_mu(&self, mu: f64) -> Kernel {
        match *self {
            Kernel::Sig { c, .. } => Kernel::Sig { c, mu },
            k => k,
        }
    }

    /// True for kernels that take part in graduation.
    pub fn is_graduated(&self) -> bool {
        matches!(self, Kernel::Sig { .. })
    }

    /// Robust cost at whitened residual norm `r ≥ 0`.
    pub fn evaluate(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0, "kernels are defined on |r|");
        let r2 = r * r;
        match *self {
            Kernel::Quadratic => 0.5 * r2,
            Kernel::Huber { c } => {
                if r <= c {
                    0.5 * r2
                } else {
                    c * (r - 0.5 * c)
                }
            }
            Kernel::GemanMcClure { c } => {
                let c2 = c * c;
                0.5 * c2 * r2 / (c2 + r2)
            }
            Kernel::MaxMixture {
                outlier_sigma,
                outlier_weight,
                dim,
            } => {
                let inlier = 0.5 * r2;
                let s = outlier_sigma;
                let outlier =
                    0.5 * r2 / (s * s) - outlier_weight.ln() + dim as f64 * s.ln();
                inlier.min(outlier)
            }
            Kernel::Sig { c, mu } => {
                let c2 = c * c;
                0.5 * c2 * r2 / (c2 + r2.powf(mu))
            }
        }
    }

    /// IRLS weight ρ′(r)/r, with the r → 0 limit taken analytically.
    pub fn weight(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0, "kernels are defined on |r|");
        let r2 = r * r;
        match *self {
            Kernel::Quadratic => 1.0,
            Kernel::Huber { c } => {
                if r <= c {
                    1.0
                } else {
                    c / r
                }
            }
            Kernel::GemanMcClure { c } => {
                let c2 = c * c;
                let d = c2 + r2;
                c2 * c2 / (d * d)
            }
            Kernel::MaxMixture {
                outlier_sigma,
                outlier_weight,
                dim,
            } => {
                let inlier = 0.5 * r2;
                let s = outlier_sigma;
                let outlier =
                    0.5 * r2 / (s * s) - outlier_weight.ln() + dim as f64 * s.ln();
                if inlier <= outlier {
                    1.0
                } else {
                    1.0 / (s * s)
                }
            }
            Kernel::Sig { c, mu } => {
                let c2 = c * c;
                // (r²)^μ with the 0⁰ = 1 convention so μ = 0 stays quadratic
                let p = r2.powf(mu);
                let d = c2 + p;
                c2 * (c2 + (1.0 - mu) * p) / (d * d)
            }
        }
    }
}

/// Advance the graduation parameter one step:
/// `μ' = min(1, μ + 1.2·(μ − μ_init + 0.1))`.
pub fn update_mu(mu: f64, mu_init: f64) -> f64 {
    (mu + 1.2 * (mu - mu_init + 0.1)).min(1.0)
}

/// Graduation terminates once μ has reached its final value.
pub fn is_converged(mu: f64, mu_final: f64) -> bool {
    mu >= mu_final
}

/// The μ graduation schedule from an initial to a final value.
#[derive(Debug, Clone)]
pub struct MuSchedule {
    pub mu_init: f64,
    pub mu_final: f64,
}

impl MuSchedule {
    pub fn new(mu_init: f64, mu_final: f64) -> Self {
        assert!(
            (0.0..=1.0).contains(&mu_init) && mu_init <= mu_final && mu_final <= 1.0,
            "require 0 <= mu_init <= mu_final <= 1"
        );
        MuSchedule { mu_init, mu_final }
    }

    /// The successive μ values produced by the update rule, starting
    /// after `mu_init` and ending at the first value where the schedule
    /// converges.
    pub fn steps(&self) -> Vec<f64> {
        let mut mu = self.mu_init;
        let mut hist = Vec::new();
        while !is_converged(mu, self.mu_final) {
            mu = update_mu(mu, self.mu_init);
            hist.push(mu);
        }
        hist
    }
}
