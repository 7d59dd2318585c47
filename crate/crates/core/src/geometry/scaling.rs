use serde::Serialize;

use super::Domain;
use crate::error::{invalid, Result};
use crate::kernel::KernelProfile;

/// Outcome of the joint check on resolution `delta`, bandwidth `h` and
/// nonlocal length `eps`. Each margin is `rhs - lhs`; a condition holds when
/// its margin is nonnegative (positive for the strict one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingReport {
    pub passed: bool,
    /// `r_omega - h`.
    pub bandwidth_margin: f64,
    /// `1/2 - h/eps`, must be strictly positive.
    pub ratio_margin: f64,
    /// `t0 / (4 + 2 sigma_phi(h)) * (1 - 2h/eps) - (sigma_phi(h) + delta/h)`.
    pub resolution_margin: f64,
    pub sigma_phi: f64,
}

/// Checks `h <= r_omega`, `h/eps < 1/2` and
/// `sigma_phi(h) + delta/h <= t0 / (4 + 2 sigma_phi(h)) * (1 - 2h/eps)`.
pub fn check_scaling_assumption(
    delta: f64,
    h: f64,
    eps: f64,
    kernel: &KernelProfile,
    domain: &Domain,
) -> Result<ScalingReport> {
    for (name, v) in [("delta", delta), ("h", h), ("eps", eps)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let sigma_phi = domain.modulus().sigma_phi(h);
    let bandwidth_margin = domain.r_omega() - h;
    let ratio_margin = 0.5 - h / eps;
    let rhs = kernel.t_zero() / (4.0 + 2.0 * sigma_phi) * (1.0 - 2.0 * h / eps);
    let resolution_margin = rhs - (sigma_phi + delta / h);
    Ok(ScalingReport {
        passed: bandwidth_margin >= 0.0 && ratio_margin > 0.0 && resolution_margin >= 0.0,
        bandwidth_margin,
        ratio_margin,
        resolution_margin,
        sigma_phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_constant_example() {
        let r = check_scaling_assumption(0.001, 0.1, 0.5, &KernelProfile::constant(), &Domain::unit_cube(2)).unwrap();
        assert!(r.passed);
        assert!((r.resolution_margin - (0.15 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn strict_ratio_boundary() {
        let r = check_scaling_assumption(1e-4, 0.1, 0.2, &KernelProfile::constant(), &Domain::unit_cube(2)).unwrap();
        assert_eq!(r.ratio_margin, 0.0);
        assert!(!r.passed);
    }

    #[test]
    fn delta_equal_h_fails() {
        for k in [KernelProfile::constant(), KernelProfile::singular(), KernelProfile::exponential(0.3).unwrap()] {
            let r = check_scaling_assumption(0.1, 0.1, 10.0, &k, &Domain::unit_ball(2)).unwrap();
            assert!(!r.passed && r.resolution_margin < 0.0);
        }
    }

    #[test]
    fn star_modulus_enters() {
        let star = Domain::lp_star();
        let r = check_scaling_assumption(1e-4, 0.01, 1.0, &KernelProfile::singular(), &star).unwrap();
        assert!((r.sigma_phi - 0.3).abs() < 1e-12);
        assert!(!r.passed);
        assert!(check_scaling_assumption(0.0, 0.1, 1.0, &KernelProfile::singular(), &star).is_err());
    }
}
