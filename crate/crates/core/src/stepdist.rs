//! Step laws, their log-moment-generating function, and exponential tilting.
//!
//! Four families are supported: Bernoulli(α) on {0, 1}, Uniform(a, b),
//! Gaussian(μ, σ) and the point mass δ_c. All four have Λ finite on the whole
//! real line, so σ = ζ = +∞ in (A1)/(A2).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Below this |s| the uniform log-MGF uses its Taylor series.
const UNIFORM_LMGF_SERIES: f64 = 1e-4;
/// Below this |s| the uniform derivatives use their Taylor series.
const UNIFORM_DERIV_SERIES: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Bernoulli { alpha: f64 },
    Uniform { a: f64, b: f64 },
    Gaussian { mean: f64, stdev: f64 },
    PointMass { c: f64 },
}

/// A validated step law `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDistribution(Kind);

impl StepDistribution {
    pub fn bernoulli(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "bernoulli requires 0 < alpha < 1, got {alpha}"
            )));
        }
        Ok(Self(Kind::Bernoulli { alpha }))
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDistribution(format!(
                "uniform requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Self(Kind::Uniform { a, b }))
    }

    pub fn gaussian(mean: f64, stdev: f64) -> Result<Self> {
        if !(mean.is_finite() && stdev.is_finite() && stdev > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "gaussian requires finite mean and stdev > 0, got ({mean}, {stdev})"
            )));
        }
        Ok(Self(Kind::Gaussian { mean, stdev }))
    }

    pub fn point(c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "point mass location must be finite, got {c}"
            )));
        }
        Ok(Self(Kind::PointMass { c }))
    }

    /// Standard normal, the reference continuous law.
    pub fn standard_gaussian() -> Self {
        Self(Kind::Gaussian {
            mean: 0.0,
            stdev: 1.0,
        })
    }

    pub fn kind(&self) -> Kind {
        self.0
    }

    /// Whether the law lives on the integers (so positions stay integral).
    pub fn is_lattice(&self) -> bool {
        matches!(self.0, Kind::Bernoulli { .. })
    }

    /// σ of (A1).
    pub fn sigma(&self) -> f64 {
        f64::INFINITY
    }

    /// ζ of (A2).
    pub fn zeta(&self) -> f64 {
        f64::INFINITY
    }

    /// Λ(t) = log E exp(tX).
    pub fn lmgf(&self, t: f64) -> f64 {
        match self.0 {
            Kind::Bernoulli { alpha } => {
                if t > 0.0 {
                    t + (alpha + (1.0 - alpha) * (-t).exp()).ln()
                } else {
                    (alpha * t.exp_m1()).ln_1p()
                }
            }
            Kind::Uniform { a, b } => a * t + unit_uniform_lmgf((b - a) * t),
            Kind::Gaussian { mean, stdev } => mean * t + 0.5 * stdev * stdev * t * t,
            Kind::PointMass { c } => c * t,
        }
    }

    /// Λ'(t), the mean of the law tilted by t.
    pub fn lmgf_d1(&self, t: f64) -> f64 {
        match self.0 {
            Kind::Bernoulli { alpha } => tilted_bernoulli(alpha, t),
            Kind::Uniform { a, b } => a + (b - a) * unit_uniform_d1((b - a) * t),
            Kind::Gaussian { mean, stdev } => mean + stdev * stdev * t,
            Kind::PointMass { c } => c,
        }
    }

    /// Λ''(t), the variance of the law tilted by t.
    pub fn lmgf_d2(&self, t: f64) -> f64 {
        match self.0 {
            Kind::Bernoulli { alpha } => {
                let q = tilted_bernoulli(alpha, t);
                q * (1.0 - q)
            }
            Kind::Uniform { a, b } => {
                let w = b - a;
                w * w * unit_uniform_d2(w * t)
            }
            Kind::Gaussian { stdev, .. } => stdev * stdev,
            Kind::PointMass { .. } => 0.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.lmgf_d1(0.0)
    }

    /// P(X ≥ x).
    pub fn tail(&self, x: f64) -> f64 {
        match self.0 {
            Kind::Bernoulli { alpha } => {
                if x <= 0.0 {
                    1.0
                } else if x <= 1.0 {
                    alpha
                } else {
                    0.0
                }
            }
            Kind::Uniform { a, b } => ((b - x) / (b - a)).clamp(0.0, 1.0),
            Kind::Gaussian { mean, stdev } => {
                0.5 * libm::erfc((x - mean) / (stdev * std::f64::consts::SQRT_2))
            }
            Kind::PointMass { c } => {
                if x <= c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Essential infimum of the support (−∞ for the Gaussian).
    pub fn ess_inf(&self) -> f64 {
        match self.0 {
            Kind::Bernoulli { .. } => 0.0,
            Kind::Uniform { a, .. } => a,
            Kind::Gaussian { .. } => f64::NEG_INFINITY,
            Kind::PointMass { c } => c,
        }
    }

    /// Essential supremum of the support (+∞ for the Gaussian).
    pub fn ess_sup(&self) -> f64 {
        match self.0 {
            Kind::Bernoulli { .. } => 1.0,
            Kind::Uniform { b, .. } => b,
            Kind::Gaussian { .. } => f64::INFINITY,
            Kind::PointMass { c } => c,
        }
    }

    /// `count` i.i.d. draws.
    pub fn sample(&self, rng: &mut Stream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    /// The law p̃ with dp̃/dp(x) = exp(t·x − Λ(t)).
    pub fn tilt(&self, t: f64) -> TiltedDistribution {
        TiltedDistribution {
            base: *self,
            t,
            normalizer: self.lmgf(t),
        }
    }
}

/// log((eˢ − 1)/s), the log-MGF of Uniform(0, 1).
fn unit_uniform_lmgf(s: f64) -> f64 {
    if s.abs() < UNIFORM_LMGF_SERIES {
        let s2 = s * s;
        s / 2.0 + s2 / 24.0 - s2 * s2 / 2880.0 + s2 * s2 * s2 / 181_440.0
    } else if s > 1.0 {
        s + (-(-s).exp_m1()).ln() - s.ln()
    } else {
        (s.exp_m1() / s).ln()
    }
}

fn unit_uniform_d1(s: f64) -> f64 {
    if s.abs() < UNIFORM_DERIV_SERIES {
        let s2 = s * s;
        0.5 + s / 12.0 - s * s2 / 720.0 + s * s2 * s2 / 30_240.0
    } else if s > 0.0 {
        1.0 / (-(-s).exp_m1()) - 1.0 / s
    } else {
        1.0 + 1.0 / s.exp_m1() - 1.0 / s
    }
}

fn unit_uniform_d2(s: f64) -> f64 {
    if s.abs() < UNIFORM_DERIV_SERIES {
        let s2 = s * s;
        1.0 / 12.0 - s2 / 240.0 + s2 * s2 / 6048.0
    } else {
        let h = (0.5 * s).sinh();
        1.0 / (s * s) - 1.0 / (4.0 * h * h)
    }
}

/// α·eᵗ / (1 − α + α·eᵗ), written as a logistic to stay finite.
fn tilted_bernoulli(alpha: f64, t: f64) -> f64 {
    let logit = (alpha / (1.0 - alpha)).ln() + t;
    if logit >= 0.0 {
        1.0 / (1.0 + (-logit).exp())
    } else {
        let e = logit.exp();
        e / (1.0 + e)
    }
}

/// Anything that produces one step per call.
pub trait StepSampler {
    fn draw(&self, rng: &mut Stream) -> f64;

    fn fill(&self, rng: &mut Stream, out: &mut [f64]) {
        for x in out {
            *x = self.draw(rng);
        }
    }
}

impl StepSampler for StepDistribution {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> f64 {
        match self.0 {
            Kind::Bernoulli { alpha } => {
                if rng.next_f64() < alpha {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Uniform { a, b } => a + (b - a) * rng.next_f64(),
            Kind::Gaussian { mean, stdev } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + stdev * z
            }
            Kind::PointMass { c } => c,
        }
    }
}

/// Exponentially tilted law p̃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltedDistribution {
    pub base: StepDistribution,
    pub t: f64,
    /// Λ(t).
    pub normalizer: f64,
}

impl TiltedDistribution {
    /// dp̃/dp at x.
    pub fn density_ratio(&self, x: f64) -> f64 {
        (self.t * x - self.normalizer).exp()
    }

    pub fn mean(&self) -> f64 {
        self.base.lmgf_d1(self.t)
    }

    pub fn variance(&self) -> f64 {
        self.base.lmgf_d2(self.t)
    }

    /// The tilted law when it stays in a supported family (all but Uniform).
    pub fn as_step_distribution(&self) -> Option<StepDistribution> {
        match self.base.0 {
            Kind::Bernoulli { alpha } => {
                let q = tilted_bernoulli(alpha, self.t);
                StepDistribution::bernoulli(q).ok()
            }
            Kind::Gaussian { mean, stdev } => {
                StepDistribution::gaussian(mean + stdev * stdev * self.t, stdev).ok()
            }
            Kind::PointMass { .. } => Some(self.base),
            Kind::Uniform { .. } => None,
        }
    }
}

impl StepSampler for TiltedDistribution {
    #[inline]
    fn draw(&self, rng: &mut Stream) -> f64 {
        match self.base.0 {
            Kind::Bernoulli { alpha } => {
                if rng.next_f64() < tilted_bernoulli(alpha, self.t) {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Gaussian { mean, stdev } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + stdev * stdev * self.t + stdev * z
            }
            Kind::PointMass { c } => c,
            Kind::Uniform { a, b } => {
                let u = rng.next_f64();
                a + (b - a) * tilted_unit_uniform_quantile(u, (b - a) * self.t)
            }
        }
    }
}

/// Inverse CDF of the density ∝ e^{s·x} on [0, 1].
fn tilted_unit_uniform_quantile(u: f64, s: f64) -> f64 {
    let x = if s == 0.0 {
        u
    } else if s < 0.0 {
        1.0 - tilted_unit_uniform_quantile(1.0 - u, -s)
    } else if s > 1.0 {
        1.0 + (u + (1.0 - u) * (-s).exp()).ln() / s
    } else {
        (u * s.exp_m1()).ln_1p() / s
    };
    x.clamp(0.0, 1.0)
}

impl fmt::Display for StepDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Kind::Bernoulli { alpha } => write!(f, "bernoulli:{alpha}"),
            Kind::Uniform { a, b } => write!(f, "uniform:{a}:{b}"),
            Kind::Gaussian { mean, stdev } => write!(f, "gaussian:{mean}:{stdev}"),
            Kind::PointMass { c } => write!(f, "point:{c}"),
        }
    }
}

impl FromStr for StepDistribution {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = |reason: &str| Error::ParseDistribution {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = spec.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let params = parts
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad("parameters must be decimal numbers")))
            .collect::<Result<Vec<f64>>>()?;
        let want = |n: usize| {
            if params.len() == n {
                Ok(())
            } else {
                Err(bad(&format!("`{name}` takes {n} parameter(s)")))
            }
        };
        match name.as_str() {
            "bernoulli" => {
                want(1)?;
                Self::bernoulli(params[0])
            }
            "uniform" => {
                want(2)?;
                Self::uniform(params[0], params[1])
            }
            "gaussian" | "normal" => {
                want(2)?;
                Self::gaussian(params[0], params[1])
            }
            "point" => {
                want(1)?;
                Self::point(params[0])
            }
            _ => Err(bad("expected one of bernoulli, uniform, gaussian, point")),
        }
    }
}

impl Serialize for StepDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StepDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern(a: f64) -> StepDistribution {
        StepDistribution::bernoulli(a).unwrap()
    }

    #[test]
    fn closed_form_lmgf() {
        let g = StepDistribution::standard_gaussian();
        assert_eq!(g.lmgf(2.0), 2.0);
        assert_eq!(StepDistribution::point(0.5).unwrap().lmgf(4.0), 2.0);
        // log(0.75 + 0.25·e^2.553), 30-digit reference.
        assert!((bern(0.25).lmgf(2.553) - 1.376_596_411_633_977_8).abs() < 1e-12);
    }

    #[test]
    fn lmgf_vanishes_at_origin() {
        for d in [
            bern(0.3),
            StepDistribution::uniform(-2.0, 5.0).unwrap(),
            StepDistribution::gaussian(1.0, 3.0).unwrap(),
            StepDistribution::point(-4.0).unwrap(),
        ] {
            assert_eq!(d.lmgf(0.0), 0.0, "{d}");
        }
    }

    #[test]
    fn derivatives_at_origin_are_mean_and_variance() {
        let g = StepDistribution::standard_gaussian();
        assert_eq!(g.lmgf_d1(1.177), 1.177);
        assert_eq!(g.lmgf_d2(1.177), 1.0);
        let b = bern(0.25);
        assert!((b.lmgf_d1(0.0) - 0.25).abs() < 1e-15);
        assert!((b.lmgf_d2(0.0) - 0.1875).abs() < 1e-15);
        let u = StepDistribution::uniform(0.0, 1.0).unwrap();
        assert!((u.lmgf_d1(0.0) - 0.5).abs() < 1e-15);
        assert!((u.lmgf_d2(0.0) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_series_matches_closed_form_at_switch() {
        for s in [9.9e-5f64, -9.9e-5, 1.01e-4, 0.0099, 0.0101, -0.0101] {
            let direct = (s.exp_m1() / s).ln();
            assert!((unit_uniform_lmgf(s) - direct).abs() < 1e-15);
        }
        for s in [0.0099f64, 0.0101, -0.0101] {
            let d1 = 1.0 + 1.0 / s.exp_m1() - 1.0 / s;
            assert!((unit_uniform_d1(s) - d1).abs() < 1e-12);
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let u = StepDistribution::uniform(0.0, 1.0).unwrap();
        assert!((u.lmgf(1000.0) - (1000.0 - 1000f64.ln())).abs() < 1e-9);
        assert!((u.lmgf_d1(1000.0) - (1.0 - 1e-3)).abs() < 1e-12);
        assert!(u.lmgf_d2(1000.0) > 0.0);
        let b = bern(0.25);
        assert!((b.lmgf(800.0) - (800.0 + 0.25f64.ln())).abs() < 1e-9);
        assert!((b.lmgf_d1(800.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tilting() {
        let c = StepDistribution::point(0.7).unwrap();
        assert_eq!(c.tilt(3.0).as_step_distribution(), Some(c));
        let t = (2.0 * std::f64::consts::LN_2).sqrt();
        let g = StepDistribution::standard_gaussian().tilt(t).as_step_distribution().unwrap();
        match g.kind() {
            Kind::Gaussian { mean, stdev } => {
                assert!((mean - 1.177_410_022_515_474_7).abs() < 1e-15);
                assert_eq!(stdev, 1.0);
            }
            other => panic!("unexpected {other:?}"),
        }
        match bern(0.25).tilt(2.553).as_step_distribution().unwrap().kind() {
            Kind::Bernoulli { alpha } => assert!((alpha - 0.810_672_788_690_682_8).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let u = StepDistribution::uniform(0.0, 1.0).unwrap().tilt(2.0);
        assert!(u.as_step_distribution().is_none());
        assert!((u.density_ratio(0.3) - (0.6 - u.normalizer).exp()).abs() < 1e-15);
    }

    #[test]
    fn tilted_uniform_quantile_is_monotone_and_bounded() {
        for s in [-50.0, -1.0, 1e-9, 0.5, 40.0, 800.0] {
            let mut prev = -1.0;
            for k in 0..=100 {
                let x = tilted_unit_uniform_quantile(k as f64 / 100.0, s);
                assert!((0.0..=1.0).contains(&x), "s={s} x={x}");
                assert!(x >= prev);
                prev = x;
            }
        }
    }

    #[test]
    fn degenerate_sampling() {
        let mut rng = Stream::new(3);
        let d = StepDistribution::point(0.5).unwrap();
        assert_eq!(d.sample(&mut rng, 3), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn parse_and_display() {
        for spec in ["bernoulli:0.25", "uniform:0:1", "gaussian:0:1", "point:0.5"] {
            let d: StepDistribution = spec.parse().unwrap();
            assert_eq!(d.to_string(), spec);
        }
        assert!("bernoulli:1.5".parse::<StepDistribution>().is_err());
        assert!("uniform:1:0".parse::<StepDistribution>().is_err());
        assert!("gaussian:0:-1".parse::<StepDistribution>().is_err());
        assert!("cauchy:0:1".parse::<StepDistribution>().is_err());
        assert!("point".parse::<StepDistribution>().is_err());
        assert!("point:x".parse::<StepDistribution>().is_err());
    }

    #[test]
    fn tails() {
        let g = StepDistribution::standard_gaussian();
        assert!((g.tail(0.0) - 0.5).abs() < 1e-15);
        assert!((g.tail(1.0) - 0.158_655_253_931_457_05).abs() < 1e-14);
        let b = bern(0.25);
        assert_eq!(b.tail(0.6), 0.25);
        assert_eq!(b.tail(0.0), 1.0);
        assert_eq!(b.tail(1.2), 0.0);
    }
}
