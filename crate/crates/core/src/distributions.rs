//! Candidate distribution families, the closed-form 1D/2D reference CDFs and
//! the Generalized Gamma moment formula.
//!
//! Parameterizations:
//!
//! | family            | parameters        | CDF                                   |
//! |-------------------|-------------------|---------------------------------------|
//! | Generalized Gamma | a, b, c > 0       | P(c/a, b x^a)                         |
//! | Gamma             | shape k, rate β   | P(k, β x)                             |
//! | Log-normal        | μ, σ > 0 (of ln)  | Φ((ln x − μ) / σ)                     |
//! | Rayleigh          | σ > 0             | 1 − exp(−x² / (2σ²))                  |
//! | Weibull           | shape k, scale λ  | 1 − exp(−(x / λ)^k)                   |

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma as GammaDist};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    digamma_unchecked, ln_gamma_unchecked, norm_cdf, norm_sf, reg_lower_gamma_unchecked,
    reg_upper_gamma_unchecked,
};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GGParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GGParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let p = GGParams { a, b, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(
                    "GGParams",
                    format!("{name} = {v} must be finite and > 0"),
                ));
            }
        }
        Ok(())
    }

    /// Parameters of the vertex-distance law `1 − (1 + π r²) e^{−π r²}`.
    pub fn vertex_distance() -> Self {
        GGParams {
            a: 2.0,
            b: PI,
            c: 4.0,
        }
    }
}

fn check_x(func: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return Err(Error::domain(func, format!("x = {x} must be >= 0")));
    }
    Ok(())
}

pub fn gg_cdf(x: f64, p: GGParams) -> Result<f64> {
    p.validate()?;
    check_x("gg_cdf", x)?;
    Ok(gg_cdf_unchecked(x, p))
}

pub(crate) fn gg_cdf_unchecked(x: f64, p: GGParams) -> f64 {
    reg_lower_gamma_unchecked(p.c / p.a, p.b * x.powf(p.a))
}

pub(crate) fn gg_sf_unchecked(x: f64, p: GGParams) -> f64 {
    reg_upper_gamma_unchecked(p.c / p.a, p.b * x.powf(p.a))
}

pub fn gg_logpdf(x: f64, p: GGParams) -> Result<f64> {
    p.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(
            "gg_logpdf",
            format!("x = {x} must be finite and > 0"),
        ));
    }
    Ok(gg_logpdf_unchecked(x, p))
}

pub(crate) fn gg_logpdf_unchecked(x: f64, p: GGParams) -> f64 {
    let GGParams { a, b, c } = p;
    a.ln() + (c / a) * b.ln() - ln_gamma_unchecked(c / a) + (c - 1.0) * x.ln() - b * x.powf(a)
}

/// One draw: `U ~ Gamma(c/a, 1)`, returned as `(U / b)^{1/a}`.
pub fn gg_sample<R: Rng + ?Sized>(p: GGParams, rng: &mut R) -> Result<f64> {
    Ok(gg_sampler(p)?.sample(rng))
}

/// Reusable sampler for many draws with the same parameters.
#[derive(Debug, Clone)]
pub struct GGSampler {
    gamma: GammaDist<f64>,
    inv_b: f64,
    inv_a: f64,
}

pub fn gg_sampler(p: GGParams) -> Result<GGSampler> {
    p.validate()?;
    let gamma =
        GammaDist::new(p.c / p.a, 1.0).map_err(|e| Error::domain("gg_sample", e.to_string()))?;
    Ok(GGSampler {
        gamma,
        inv_b: 1.0 / p.b,
        inv_a: 1.0 / p.a,
    })
}

impl Distribution<f64> for GGSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        (self.gamma.sample(rng) * self.inv_b).powf(self.inv_a)
    }
}

/// E[X^m] = Γ((c + m)/a) / (b^{m/a} Γ(c/a)).
pub fn gg_moment(m: f64, p: GGParams) -> Result<f64> {
    p.validate()?;
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::domain(
            "gg_moment",
            format!("order m = {m} must be finite and >= 0"),
        ));
    }
    let GGParams { a, b, c } = p;
    Ok((ln_gamma_unchecked((c + m) / a) - ln_gamma_unchecked(c / a) - (m / a) * b.ln()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GeneralizedGamma,
    Gamma,
    LogNormal,
    Rayleigh,
    Weibull,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::GeneralizedGamma,
        Family::Gamma,
        Family::LogNormal,
        Family::Rayleigh,
        Family::Weibull,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Family::GeneralizedGamma => "generalized-gamma",
            Family::Gamma => "gamma",
            Family::LogNormal => "log-normal",
            Family::Rayleigh => "rayleigh",
            Family::Weibull => "weibull",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            Family::GeneralizedGamma => "Generalized Gamma",
            Family::Gamma => "Gamma",
            Family::LogNormal => "Log-normal",
            Family::Rayleigh => "Rayleigh",
            Family::Weibull => "Weibull",
        }
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Family::GeneralizedGamma => &["a", "b", "c"],
            Family::Gamma => &["shape", "rate"],
            Family::LogNormal => &["mu", "sigma"],
            Family::Rayleigh => &["sigma"],
            Family::Weibull => &["shape", "scale"],
        }
    }

    /// Which entries of the fitting vector are log-transformed.
    pub(crate) fn log_scaled(&self) -> &'static [bool] {
        match self {
            Family::LogNormal => &[false, true],
            Family::Rayleigh => &[true],
            Family::GeneralizedGamma => &[true, true, true],
            Family::Gamma | Family::Weibull => &[true, true],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gg" | "generalized-gamma" | "generalized_gamma" | "gengamma" => {
                Ok(Family::GeneralizedGamma)
            }
            "gamma" => Ok(Family::Gamma),
            "lognormal" | "log-normal" | "log_normal" => Ok(Family::LogNormal),
            "rayleigh" => Ok(Family::Rayleigh),
            "weibull" => Ok(Family::Weibull),
            other => Err(Error::Usage(format!(
                "unknown family '{other}'; valid tags: gg, gamma, lognormal, rayleigh, weibull"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilyParams {
    GeneralizedGamma(GGParams),
    Gamma { shape: f64, rate: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Rayleigh { sigma: f64 },
    Weibull { shape: f64, scale: f64 },
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::GeneralizedGamma(_) => Family::GeneralizedGamma,
            FamilyParams::Gamma { .. } => Family::Gamma,
            FamilyParams::LogNormal { .. } => Family::LogNormal,
            FamilyParams::Rayleigh { .. } => Family::Rayleigh,
            FamilyParams::Weibull { .. } => Family::Weibull,
        }
    }

    /// Natural-space parameter values, in `Family::param_names` order.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            FamilyParams::GeneralizedGamma(GGParams { a, b, c }) => vec![a, b, c],
            FamilyParams::Gamma { shape, rate } => vec![shape, rate],
            FamilyParams::LogNormal { mu, sigma } => vec![mu, sigma],
            FamilyParams::Rayleigh { sigma } => vec![sigma],
            FamilyParams::Weibull { shape, scale } => vec![shape, scale],
        }
    }

    pub fn from_values(family: Family, v: &[f64]) -> Result<Self> {
        if v.len() != family.param_names().len() {
            return Err(Error::domain(
                "FamilyParams",
                format!(
                    "{family} takes {} parameters, got {}",
                    family.param_names().len(),
                    v.len()
                ),
            ));
        }
        let p = match family {
            Family::GeneralizedGamma => FamilyParams::GeneralizedGamma(GGParams {
                a: v[0],
                b: v[1],
                c: v[2],
            }),
            Family::Gamma => FamilyParams::Gamma {
                shape: v[0],
                rate: v[1],
            },
            Family::LogNormal => FamilyParams::LogNormal {
                mu: v[0],
                sigma: v[1],
            },
            Family::Rayleigh => FamilyParams::Rayleigh { sigma: v[0] },
            Family::Weibull => FamilyParams::Weibull {
                shape: v[0],
                scale: v[1],
            },
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let family = self.family();
        for ((name, v), logged) in family
            .param_names()
            .iter()
            .zip(self.values())
            .zip(family.log_scaled())
        {
            let ok = v.is_finite() && (!logged || v > 0.0);
            if !ok {
                return Err(Error::domain(
                    "FamilyParams",
                    format!("{family}: {name} = {v} out of range"),
                ));
            }
        }
        Ok(())
    }

    /// Unconstrained fitting coordinates: logs of positive parameters.
    pub(crate) fn to_theta(self) -> Vec<f64> {
        self.values()
            .iter()
            .zip(self.family().log_scaled())
            .map(|(&v, &l)| if l { v.ln() } else { v })
            .collect()
    }

    pub(crate) fn from_theta(family: Family, theta: &[f64]) -> Result<Self> {
        let v: Vec<f64> = theta
            .iter()
            .zip(family.log_scaled())
            .map(|(&t, &l)| if l { t.exp() } else { t })
            .collect();
        Self::from_values(family, &v)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            FamilyParams::GeneralizedGamma(p) => gg_cdf_unchecked(x, p),
            FamilyParams::Gamma { shape, rate } => reg_lower_gamma_unchecked(shape, rate * x),
            FamilyParams::LogNormal { mu, sigma } => norm_cdf((x.ln() - mu) / sigma),
            FamilyParams::Rayleigh { sigma } => -(-x * x / (2.0 * sigma * sigma)).exp_m1(),
            FamilyParams::Weibull { shape, scale } => -(-(x / scale).powf(shape)).exp_m1(),
        }
    }

    /// Survival function 1 − CDF, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        match *self {
            FamilyParams::GeneralizedGamma(p) => gg_sf_unchecked(x, p),
            FamilyParams::Gamma { shape, rate } => reg_upper_gamma_unchecked(shape, rate * x),
            FamilyParams::LogNormal { mu, sigma } => norm_sf((x.ln() - mu) / sigma),
            FamilyParams::Rayleigh { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            FamilyParams::Weibull { shape, scale } => (-(x / scale).powf(shape)).exp(),
        }
    }

    /// Log-density; `-inf` for `x <= 0`.
    pub fn logpdf(&self, x: f64) -> f64 {
        self.density().logpdf(x)
    }

    pub(crate) fn density(&self) -> Density {
        let (norm, psi) = match *self {
            FamilyParams::GeneralizedGamma(GGParams { a, b, c }) => (
                a.ln() + (c / a) * b.ln() - ln_gamma_unchecked(c / a),
                digamma_unchecked(c / a),
            ),
            FamilyParams::Gamma { shape, rate } => (
                shape * rate.ln() - ln_gamma_unchecked(shape),
                digamma_unchecked(shape),
            ),
            FamilyParams::LogNormal { sigma, .. } => (-sigma.ln() - LN_SQRT_2PI, 0.0),
            FamilyParams::Rayleigh { sigma } => (-2.0 * sigma.ln(), 0.0),
            FamilyParams::Weibull { shape, scale } => (shape.ln() - shape * scale.ln(), 0.0),
        };
        Density {
            params: *self,
            norm,
            psi,
        }
    }
}

/// A parameter set with its per-family constants (log-normalizer, digamma
/// term) evaluated once, for loops over many `x`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Density {
    params: FamilyParams,
    norm: f64,
    psi: f64,
}

impl Density {
    pub(crate) fn logpdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        self.norm
            + match self.params {
                FamilyParams::GeneralizedGamma(GGParams { a, b, c }) => {
                    (c - 1.0) * lx - b * x.powf(a)
                }
                FamilyParams::Gamma { shape, rate } => (shape - 1.0) * lx - rate * x,
                FamilyParams::LogNormal { mu, sigma } => {
                    let z = (lx - mu) / sigma;
                    -lx - 0.5 * z * z
                }
                FamilyParams::Rayleigh { sigma } => lx - x * x / (2.0 * sigma * sigma),
                FamilyParams::Weibull { shape, scale } => {
                    (shape - 1.0) * lx - (x / scale).powf(shape)
                }
            }
    }

    /// Gradient of `logpdf(x)` with respect to the fitting coordinates.
    pub(crate) fn score_theta(&self, x: f64, out: &mut [f64]) {
        let lx = x.ln();
        let psi = self.psi;
        match self.params {
            FamilyParams::GeneralizedGamma(GGParams { a, b, c }) => {
                let xa = x.powf(a);
                let lb = b.ln();
                // d/da, d/db, d/dc of the log-density, times a, b, c
                out[0] = 1.0 - (c / a) * lb + (c / a) * psi - a * b * xa * lx;
                out[1] = c / a - b * xa;
                out[2] = (c / a) * (lb - psi) + c * lx;
            }
            FamilyParams::Gamma { shape, rate } => {
                out[0] = (rate.ln() - psi + lx) * shape;
                out[1] = shape - rate * x;
            }
            FamilyParams::LogNormal { mu, sigma } => {
                let z = (lx - mu) / sigma;
                out[0] = z / sigma;
                out[1] = -1.0 + z * z;
            }
            FamilyParams::Rayleigh { sigma } => {
                out[0] = -2.0 + x * x / (sigma * sigma);
            }
            FamilyParams::Weibull { shape, scale } => {
                let r = x / scale;
                let rk = r.powf(shape);
                let lr = r.ln();
                out[0] = 1.0 + shape * lr * (1.0 - rk);
                out[1] = shape * (rk - 1.0);
            }
        }
    }
}

/// Closed-form reference CDFs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TheoryCdf {
    /// Normalized 1D generator-to-edge distance: 1 − e^{−2d}.
    Edge1d,
    /// Larger of the two 1D edge distances: (1 − e^{−2d})².
    Max1d,
    /// Smaller of the two 1D edge distances: 1 − e^{−4d}.
    Min1d,
    /// Normalized 2D generator-to-vertex distance: 1 − (1 + π r²) e^{−π r²}.
    Vertex2d,
}

impl TheoryCdf {
    pub const ALL: [TheoryCdf; 4] = [
        TheoryCdf::Edge1d,
        TheoryCdf::Max1d,
        TheoryCdf::Min1d,
        TheoryCdf::Vertex2d,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoryCdf::Edge1d => "edge1d",
            TheoryCdf::Max1d => "max1d",
            TheoryCdf::Min1d => "min1d",
            TheoryCdf::Vertex2d => "vertex2d",
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        check_x("theory_cdf", x)?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            TheoryCdf::Edge1d => -(-2.0 * x).exp_m1(),
            TheoryCdf::Max1d => {
                let f = -(-2.0 * x).exp_m1();
                f * f
            }
            TheoryCdf::Min1d => -(-4.0 * x).exp_m1(),
            TheoryCdf::Vertex2d => {
                let u = PI * x * x;
                // 1 − (1 + u) e^{−u}, written to avoid cancellation near 0
                -(-u).exp_m1() - u * (-u).exp()
            }
        }
    }
}

impl FromStr for TheoryCdf {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "edge1d" => Ok(TheoryCdf::Edge1d),
            "max1d" => Ok(TheoryCdf::Max1d),
            "min1d" => Ok(TheoryCdf::Min1d),
            "vertex2d" => Ok(TheoryCdf::Vertex2d),
            other => Err(Error::Usage(format!(
                "unknown theory CDF '{other}'; valid names: edge1d, max1d, min1d, vertex2d"
            ))),
        }
    }
}

/// Evaluates a named reference CDF.
pub fn theory_cdf(name: &str, x: f64) -> Result<f64> {
    name.parse::<TheoryCdf>()?.eval(x)
}

/// Lifts a CDF of the normalized distance `sqrt(lambda) X` to physical units.
pub fn rescale_cdf<F>(normalized: F, lambda: f64) -> Result<impl Fn(f64) -> f64>
where
    F: Fn(f64) -> f64,
{
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain(
            "rescale_cdf",
            format!("lambda = {lambda} must be finite and > 0"),
        ));
    }
    let s = lambda.sqrt();
    Ok(move |x: f64| normalized(x * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn theory_values() {
        assert_abs_diff_eq!(
            TheoryCdf::Max1d.eval(2f64.ln() / 2.0).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            TheoryCdf::Min1d.eval(2f64.ln() / 4.0).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_eq!(TheoryCdf::Vertex2d.eval(0.0).unwrap(), 0.0);
        assert!(TheoryCdf::Edge1d.eval(-1.0).is_err());
        assert!(matches!(theory_cdf("nope", 1.0), Err(Error::Usage(_))));
    }

    #[test]
    fn exp_density_value() {
        let p = GGParams::new(1.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(gg_logpdf(1.0, p).unwrap(), -1.0, epsilon = 1e-14);
        assert!(gg_logpdf(0.0, p).is_err());
    }

    #[test]
    fn gg_cdf_limits() {
        let p = GGParams::new(2.176, 8.446, 4.005).unwrap();
        assert_eq!(gg_cdf(0.0, p).unwrap(), 0.0);
        assert_abs_diff_eq!(gg_cdf(50.0, p).unwrap(), 1.0, epsilon = 1e-15);
        assert!(gg_cdf(-0.1, p).is_err());
        assert!(GGParams::new(0.0, 1.0, 1.0).is_err());
        assert!(GGParams::new(1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn moment_order_zero() {
        let p = GGParams::new(1.719, 5.528, 9.482).unwrap();
        assert_abs_diff_eq!(gg_moment(0.0, p).unwrap(), 1.0, epsilon = 1e-14);
        assert!(gg_moment(-1.0, p).is_err());
    }

    #[test]
    fn rayleigh_median_and_weibull_reduction() {
        let r = FamilyParams::Rayleigh { sigma: 1.0 };
        assert_abs_diff_eq!(r.cdf((2.0 * 2f64.ln()).sqrt()), 0.5, epsilon = 1e-15);
        let w = FamilyParams::Weibull {
            shape: 1.0,
            scale: 1.0,
        };
        for k in 1..=10 {
            let x = k as f64 * 0.37;
            assert_abs_diff_eq!(w.cdf(x), 1.0 - (-x).exp(), epsilon = 1e-15);
        }
    }

    #[test]
    fn family_tags_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.tag().parse::<Family>().unwrap(), f);
        }
        let err = "pareto".parse::<Family>().unwrap_err();
        assert!(err.to_string().contains("rayleigh"));
    }

    #[test]
    fn rescale() {
        let f = |x: f64| TheoryCdf::Vertex2d.eval_unchecked(x);
        let id = rescale_cdf(f, 1.0).unwrap();
        let four = rescale_cdf(f, 4.0).unwrap();
        for x in [0.1, 0.3, 0.7] {
            assert_eq!(id(x), f(x));
            assert_eq!(four(x), f(2.0 * x));
        }
        assert!(rescale_cdf(f, 0.0).is_err());
    }
}
