//! Kernel profiles and rescaled edge weights.
//!
//! A profile `eta` is nonincreasing on `(0, 1]`, vanishes beyond 1 and
//! attains `sigma_eta = sup t * eta(t)` at a largest maximizer `t_zero > 0`.
//! Edge weights on a graph with bandwidth `h` are
//!
//! ```text
//! w(r) = eta(r / h) / (sigma_eta * h),        0 < r <= h
//! ```
//!
//! so that the edge length `1 / w` never undercuts the Euclidean length `r`.
//! `tau_eta = sup_{0 < t <= t_zero} (sigma_eta / eta(t) - t)` measures how far
//! the edge length can overshoot it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelVariant {
    /// `eta = 1` on `[0, 1]`.
    Constant,
    /// `eta(t) = exp(-t^2 / (2 sigma^2))`, hard-truncated at `t = 1`.
    Exponential { sigma: f64 },
    /// `eta(t) = t^{-p}` on `(0, 1]`, `p` in `(0, 1]`. Singular at the origin.
    Power { p: f64 },
}

/// A kernel profile together with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelProfile {
    variant: KernelVariant,
    sigma_eta: f64,
    t_zero: f64,
    tau_eta: f64,
}

impl KernelProfile {
    pub fn new(variant: KernelVariant) -> Result<Self> {
        let (sigma_eta, t_zero, tau_eta) = kernel_constants(variant)?;
        Ok(Self { variant, sigma_eta, t_zero, tau_eta })
    }

    pub fn constant() -> Self {
        Self::new(KernelVariant::Constant).expect("constant kernel is always valid")
    }

    pub fn exponential(sigma: f64) -> Result<Self> {
        Self::new(KernelVariant::Exponential { sigma })
    }

    pub fn power(p: f64) -> Result<Self> {
        Self::new(KernelVariant::Power { p })
    }

    /// The singular kernel `eta(t) = 1/t`, for which `tau_eta = 0`.
    pub fn singular() -> Self {
        Self::power(1.0).expect("p = 1 is valid")
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn sigma_eta(&self) -> f64 {
        self.sigma_eta
    }

    pub fn t_zero(&self) -> f64 {
        self.t_zero
    }

    pub fn tau_eta(&self) -> f64 {
        self.tau_eta
    }

    /// Evaluates `eta(t)`.
    ///
    /// `t = 0` is accepted for the bounded variants; the power profile is
    /// unbounded there and returns [`Error::Domain`]. Callers building graphs
    /// never hit `t = 0` because coincident points carry no edge.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid(format!("kernel argument must be nonnegative, got {t}")));
        }
        if t > 1.0 {
            return Ok(0.0);
        }
        Ok(match self.variant {
            KernelVariant::Constant => 1.0,
            KernelVariant::Exponential { sigma } => (-t * t / (2.0 * sigma * sigma)).exp(),
            KernelVariant::Power { p } => {
                if t == 0.0 {
                    return Err(Error::Domain("power kernel is unbounded at t = 0".into()));
                }
                if p == 1.0 {
                    1.0 / t
                } else {
                    t.powf(-p)
                }
            }
        })
    }

    /// Weight of an edge of Euclidean length `r` on a graph of bandwidth `h`.
    /// Zero when `r > h`.
    pub fn edge_weight(&self, h: f64, r: f64) -> Result<f64> {
        check_edge_args(h, r)?;
        if r > h {
            return Ok(0.0);
        }
        Ok(self.evaluate(r / h)? / (self.sigma_eta * h))
    }

    /// Reciprocal of [`edge_weight`](Self::edge_weight): the length the graph
    /// assigns to the edge. Infinite when `r > h`.
    pub fn edge_length(&self, h: f64, r: f64) -> Result<f64> {
        check_edge_args(h, r)?;
        if r > h {
            return Ok(f64::INFINITY);
        }
        Ok(self.sigma_eta * h / self.evaluate(r / h)?)
    }
}

fn check_edge_args(h: f64, r: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!("edge length must be positive, got {r}")));
    }
    Ok(())
}

/// Closed-form `(sigma_eta, t_zero, tau_eta)` for the built-in variants.
pub fn kernel_constants(variant: KernelVariant) -> Result<(f64, f64, f64)> {
    match variant {
        KernelVariant::Constant => Ok((1.0, 1.0, 1.0)),
        KernelVariant::Exponential { sigma } => {
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(invalid(format!("exponential kernel needs sigma > 0, got {sigma}")));
            }
            // t exp(-t^2 / 2 sigma^2) peaks at t = sigma. sigma / eta(t) - t is
            // convex, vanishes at t_zero and tends to sigma_eta as t -> 0+.
            let t_zero = sigma.min(1.0);
            let sigma_eta = t_zero * (-t_zero * t_zero / (2.0 * sigma * sigma)).exp();
            Ok((sigma_eta, t_zero, sigma_eta))
        }
        KernelVariant::Power { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(invalid(format!("power kernel needs p in (0, 1], got {p}")));
            }
            // t^p - t peaks at t = p^{1/(1-p)}.
            let tau = if p == 1.0 {
                0.0
            } else {
                (1.0 - p) * p.powf(p / (1.0 - p))
            };
            Ok((1.0, 1.0, tau))
        }
    }
}

/// Grid estimate of `(sigma_eta, t_zero, tau_eta)` for an arbitrary profile
/// given as a closure on `(0, 1]`.
///
/// `sigma_eta` and `t_zero` come from a scan with spacing `step` followed by a
/// golden-section refinement of the bracket around the best grid point;
/// `tau_eta` is the grid maximum over `(0, t_zero]`. With `step = 1e-6` the
/// constants of the built-in variants are reproduced to about `1e-6`.
pub fn numeric_constants(eta: impl Fn(f64) -> f64, step: f64) -> Result<(f64, f64, f64)> {
    if !(step > 0.0 && step < 1.0) {
        return Err(invalid(format!("grid step must be in (0, 1), got {step}")));
    }
    let count = (1.0 / step).ceil() as usize;
    let at = |k: usize| (k as f64 * step).min(1.0);

    let mut best = f64::NEG_INFINITY;
    let mut best_k = 1;
    for k in 1..=count {
        let t = at(k);
        let v = t * eta(t);
        // `>=` keeps the largest maximizer
        if v >= best {
            best = v;
            best_k = k;
        }
    }
    if !(best > 0.0 && best.is_finite()) {
        return Err(Error::Domain(format!("sup t*eta(t) must be positive and finite, got {best}")));
    }

    let (mut lo, mut hi) = (at(best_k.saturating_sub(1)).max(step * 0.5), at(best_k + 1));
    let f = |t: f64| t * eta(t);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if f(a) > f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let refined = 0.5 * (lo + hi);
    let (sigma_eta, t_zero) = if f(refined) > best {
        (f(refined), refined)
    } else {
        (best, at(best_k))
    };

    let mut tau = f64::NEG_INFINITY;
    for k in 1..=count {
        let t = at(k);
        if t > t_zero {
            break;
        }
        tau = tau.max(sigma_eta / eta(t) - t);
    }
    tau = tau.max(sigma_eta / eta(t_zero) - t_zero).max(0.0);
    Ok((sigma_eta, t_zero, tau))
}

impl fmt::Display for KernelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.variant {
            KernelVariant::Constant => write!(f, "constant"),
            KernelVariant::Exponential { sigma } => write!(f, "exponential:{sigma}"),
            KernelVariant::Power { p } => write!(f, "power:{p}"),
        }
    }
}

impl FromStr for KernelProfile {
    type Err = Error;

    /// Parses `constant`, `exponential:<sigma>` or `power:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let param = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| invalid(format!("kernel `{name}` needs a {what} parameter")))?
                .parse::<f64>()
                .map_err(|e| invalid(format!("bad {what} in kernel string `{s}`: {e}")))
        };
        match name {
            "constant" => match arg {
                None => Ok(Self::constant()),
                Some(_) => Err(invalid("constant kernel takes no parameter")),
            },
            "exponential" => Self::exponential(param("sigma")?),
            "power" => Self::power(param("p")?),
            other => Err(invalid(format!("unknown kernel `{other}`"))),
        }
    }
}

impl Serialize for KernelProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KernelProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
