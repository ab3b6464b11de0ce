//! Assumption checks and the constants t*, v(p), χ(p).
//!
//! With g(t) = t·Λ'(t) − Λ(t) we have g(0) = 0 and g'(t) = t·Λ''(t) ≥ 0, so g
//! is non-decreasing on [0, ζ). (A3) asks for a root of g(t) = log 2, found
//! here by bisection.

use std::f64::consts::{LN_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stepdist::{Kind, StepDistribution};

/// Maximum number of bracket doublings before giving up.
const MAX_DOUBLINGS: u32 = 1000;

/// g(t) = t·Λ'(t) − Λ(t).
pub fn rate_gap(dist: &StepDistribution, t: f64) -> f64 {
    t * dist.lmgf_d1(t) - dist.lmgf(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    #[serde(serialize_with = "crate::io::extended_real")]
    pub sigma: f64,
    #[serde(serialize_with = "crate::io::extended_real")]
    pub zeta: f64,
    pub a3_holds: bool,
    /// sup of g over [0, ζ).
    #[serde(serialize_with = "crate::io::extended_real")]
    pub g_sup: f64,
    /// g_sup equals log 2 exactly: the root sits at ζ, reported as a failure.
    pub a3_boundary: bool,
}

pub fn check_assumptions(dist: &StepDistribution) -> AssumptionReport {
    let g_sup = match dist.kind() {
        Kind::Bernoulli { alpha } => -alpha.ln(),
        Kind::PointMass { .. } => 0.0,
        Kind::Gaussian { .. } | Kind::Uniform { .. } => f64::INFINITY,
    };
    let sigma = dist.sigma();
    let zeta = dist.zeta();
    AssumptionReport {
        sigma,
        zeta,
        a3_holds: sigma > 0.0 && zeta > 0.0 && g_sup > LN_2,
        g_sup,
        a3_boundary: g_sup == LN_2,
    }
}

/// Root t* of g(t) = log 2, with |g(t*) − log 2| ≤ tol.
pub fn solve_t_star(dist: &StepDistribution, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::param("tol", "must be positive"));
    }
    let report = check_assumptions(dist);
    if !report.a3_holds {
        return Err(Error::A3Violated {
            g_sup: report.g_sup,
        });
    }
    let target = LN_2;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut doublings = 0;
    while rate_gap(dist, hi) <= target {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || hi >= report.zeta {
            return Err(Error::NoBracket { doublings });
        }
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let g = rate_gap(dist, mid);
        if (g - target).abs() <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoryConstants {
    pub t_star: f64,
    /// v(p) = Λ'(t*), the limit of v_N(p).
    pub v_inf: f64,
    /// χ(p) = (π²/2)·t*·Λ''(t*).
    pub chi: f64,
}

pub fn constants(dist: &StepDistribution, tol: f64) -> Result<TheoryConstants> {
    let t_star = solve_t_star(dist, tol)?;
    Ok(TheoryConstants {
        t_star,
        v_inf: dist.lmgf_d1(t_star),
        chi: 0.5 * PI * PI * t_star * dist.lmgf_d2(t_star),
    })
}

/// Leading-order velocity gap χ(p)/(log N)².
pub fn predicted_shift(constants: &TheoryConstants, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("N", "predicted shift needs N >= 2"));
    }
    let l = (n as f64).ln();
    Ok(constants.chi / (l * l))
}

/// Leading-order −log ρ(∞, ε) = √(χ(p)/ε).
pub fn predicted_survival_exponent(constants: &TheoryConstants, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::param("eps", "must be positive"));
    }
    Ok((constants.chi / eps).sqrt())
}
