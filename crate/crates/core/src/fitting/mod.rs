//! Maximum-likelihood fits of the candidate families, confidence intervals
//! from the observed information, and goodness-of-fit against an ECDF.
//!
//! Binned data use the grouped likelihood
//! `Σ count_k log(F(right_k) − F(left_k)) + overflow · log(1 − F(upper))`.
//! All optimization runs over the unconstrained coordinates of
//! [`FamilyParams`]: logs of the positive parameters, `mu` as is.

mod optim;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Family, FamilyParams};
use crate::empirics::{DEFAULT_BINS, EcdfAccumulator, Grid};
use crate::error::{Error, Result};
use crate::special::{ln_gamma, norm_quantile};

use optim::{Status, bfgs, nelder_mead};

/// Smallest sample accepted by [`fit_mle`].
pub const MIN_FIT_SAMPLES: u64 = 1000;
/// Smallest sample accepted by [`rank_families`].
pub const MIN_RANK_SAMPLES: u64 = 10_000;
/// ECDF band kept by [`gof_metrics`]: grid points with ECDF in `[t, 1 − t]`.
pub const GOF_TAIL: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub enum FitData<'a> {
    Grouped(&'a EcdfAccumulator),
    Raw(&'a [f64]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Gradient-norm tolerance on the per-sample negative log-likelihood.
    pub grad_tol: f64,
    pub level: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 500,
            grad_tol: 1e-8,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub name: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub family: Family,
    pub params: FamilyParams,
    pub log_likelihood: f64,
    /// Parameter covariance in the fitting coordinates.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub ci_level: f64,
    pub ci: Option<Vec<Interval>>,
    pub rmse: f64,
    pub max_abs_variation: f64,
    pub n: u64,
    pub grouped: bool,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
    pub aic: f64,
    pub bic: f64,
    pub non_informative: bool,
    pub warnings: Vec<String>,
}

/// One row of a family ranking; failed fits keep their error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedFit {
    pub family: Family,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

pub fn fit_mle(family: Family, data: FitData<'_>) -> Result<FitResult> {
    fit_mle_with(family, data, &FitOptions::default())
}

pub fn fit_mle_with(family: Family, data: FitData<'_>, opts: &FitOptions) -> Result<FitResult> {
    let prepared = Prepared::new(data)?;
    let gg_starts = if family == Family::GeneralizedGamma {
        let mut starts = Vec::new();
        for sub in [Family::Gamma, Family::Weibull] {
            if let Ok(fit) = fit_prepared(sub, &prepared, opts, &[]) {
                starts.push(fit.params);
            }
        }
        starts
    } else {
        Vec::new()
    };
    fit_prepared(family, &prepared, opts, &gg_starts)
}

/// Log-likelihood of `params` on `data` and its analytic gradient with
/// respect to the natural parameters, in [`FamilyParams::values`] order.
pub fn log_likelihood_gradient(
    data: FitData<'_>,
    params: &FamilyParams,
) -> Result<(f64, Vec<f64>)> {
    params.validate()?;
    let prepared = Prepared::new(data)?;
    let theta = params.to_theta();
    let mut grad = vec![0.0; theta.len()];
    let nll = prepared.objective(params.family(), &theta, Some(&mut grad));
    let n = prepared.n as f64;
    let values = params.values();
    let natural = grad
        .iter()
        .zip(&values)
        .zip(params.family().log_scaled())
        .map(|((&g, &v), &logged)| -n * if logged { g / v } else { g })
        .collect();
    Ok((-nll * n, natural))
}

/// Fits all five families and sorts them by ascending RMSE. Failed fits are
/// listed last with their error.
pub fn rank_families(acc: &EcdfAccumulator) -> Result<Vec<RankedFit>> {
    if acc.n < MIN_RANK_SAMPLES {
        return Err(Error::SampleSize {
            n: acc.n,
            min: MIN_RANK_SAMPLES,
        });
    }
    rank_families_with(FitData::Grouped(acc), &Family::ALL, &FitOptions::default())
}

/// Ranks any subset of families on grouped or raw data.
pub fn rank_families_with(
    data: FitData<'_>,
    families: &[Family],
    opts: &FitOptions,
) -> Result<Vec<RankedFit>> {
    let prepared = Prepared::new(data)?;
    // the GG fit is warm-started from the Gamma and Weibull optima
    let mut needed: Vec<Family> = families.to_vec();
    if families.contains(&Family::GeneralizedGamma) {
        for sub in [Family::Gamma, Family::Weibull] {
            if !needed.contains(&sub) {
                needed.push(sub);
            }
        }
    }
    let simple: Vec<(Family, Result<FitResult>)> = needed
        .par_iter()
        .filter(|f| **f != Family::GeneralizedGamma)
        .map(|&f| (f, fit_prepared(f, &prepared, opts, &[])))
        .collect();
    let mut results: Vec<(Family, Result<FitResult>)> = Vec::new();
    if families.contains(&Family::GeneralizedGamma) {
        let starts: Vec<FamilyParams> = simple
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok().map(|f| f.params))
            .filter(|p| matches!(p.family(), Family::Gamma | Family::Weibull))
            .collect();
        results.push((
            Family::GeneralizedGamma,
            fit_prepared(Family::GeneralizedGamma, &prepared, opts, &starts),
        ));
    }
    results.extend(simple.into_iter().filter(|(f, _)| families.contains(f)));

    let mut ranked: Vec<RankedFit> = results
        .into_iter()
        .map(|(family, r)| match r {
            Ok(fit) => RankedFit {
                family,
                fit: Some(fit),
                error: None,
            },
            Err(e) => RankedFit {
                family,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    ranked.sort_by(|x, y| match (&x.fit, &y.fit) {
        (Some(a), Some(b)) => a.rmse.total_cmp(&b.rmse),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => x.family.cmp(&y.family),
    });
    Ok(ranked)
}

/// Normal-approximation intervals in the fitting coordinates, mapped back
/// to natural parameters. `None` when the covariance is missing or has a
/// non-positive variance.
pub fn confidence_intervals(fit: &FitResult, level: f64) -> Result<Option<Vec<Interval>>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "confidence level {level} must lie in (0, 1)"
        )));
    }
    let Some(cov) = &fit.covariance else {
        return Ok(None);
    };
    let z = norm_quantile(0.5 + level / 2.0)?;
    let theta = fit.params.to_theta();
    let family = fit.family;
    let mut out = Vec::with_capacity(theta.len());
    for (i, ((name, &logged), value)) in family
        .param_names()
        .iter()
        .zip(family.log_scaled())
        .zip(fit.params.values())
        .enumerate()
    {
        let var = cov[i][i];
        if !(var > 0.0) || !var.is_finite() {
            return Ok(None);
        }
        let half = z * var.sqrt();
        let (lo, hi) = (theta[i] - half, theta[i] + half);
        let (lower, upper) = if logged {
            (lo.exp(), hi.exp())
        } else {
            (lo, hi)
        };
        out.push(Interval {
            name: name.to_string(),
            estimate: value,
            lower,
            upper,
        });
    }
    Ok(Some(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gof {
    pub rmse: f64,
    pub max_abs_variation: f64,
    /// Grid points used.
    pub points: usize,
}

/// RMSE and maximum absolute deviation between the accumulator's ECDF and
/// `cdf` over the grid points whose ECDF lies in `[GOF_TAIL, 1 − GOF_TAIL]`
/// (the whole grid if none do).
pub fn gof_metrics(acc: &EcdfAccumulator, cdf: impl Fn(f64) -> f64) -> Result<Gof> {
    gof_metrics_in(acc, cdf, GOF_TAIL)
}

/// As [`gof_metrics`] with an explicit tail cut; `0` uses every grid point.
pub fn gof_metrics_in(acc: &EcdfAccumulator, cdf: impl Fn(f64) -> f64, tail: f64) -> Result<Gof> {
    let ecdf = acc.ecdf_values()?;
    let band: Vec<usize> = (0..ecdf.len())
        .filter(|&k| ecdf[k] >= tail && ecdf[k] <= 1.0 - tail)
        .collect();
    let idx: Vec<usize> = if band.is_empty() {
        (0..ecdf.len()).collect()
    } else {
        band
    };
    let mut sq = 0.0;
    let mut max = 0.0f64;
    for &k in &idx {
        let d = (ecdf[k] - cdf(acc.grid.point(k))).abs();
        sq += d * d;
        max = max.max(d);
    }
    Ok(Gof {
        rmse: (sq / idx.len() as f64).sqrt(),
        max_abs_variation: max,
        points: idx.len(),
    })
}

// ---------------------------------------------------------------------------

/// Data summary plus the accumulator used for goodness of fit.
struct Prepared<'a> {
    data: FitData<'a>,
    n: u64,
    mean: f64,
    var: f64,
    /// Mean and variance of ln x (raw data only).
    log_moments: Option<(f64, f64)>,
    degenerate: bool,
    gof_acc: std::borrow::Cow<'a, EcdfAccumulator>,
    quad: Option<BinQuadrature>,
}

impl<'a> Prepared<'a> {
    fn new(data: FitData<'a>) -> Result<Self> {
        match data {
            FitData::Grouped(acc) => {
                if acc.n < MIN_FIT_SAMPLES {
                    return Err(Error::SampleSize {
                        n: acc.n,
                        min: MIN_FIT_SAMPLES,
                    });
                }
                let (mean, _) = acc.moments()?;
                let occupied =
                    acc.counts.iter().filter(|&&c| c > 0).count() + usize::from(acc.overflow > 0);
                Ok(Prepared {
                    data,
                    n: acc.n,
                    mean,
                    var: acc.variance()?,
                    log_moments: None,
                    degenerate: occupied <= 1,
                    gof_acc: std::borrow::Cow::Borrowed(acc),
                    quad: Some(BinQuadrature::new(acc)),
                })
            }
            FitData::Raw(xs) => {
                let n = xs.len() as u64;
                if n < MIN_FIT_SAMPLES {
                    return Err(Error::SampleSize {
                        n,
                        min: MIN_FIT_SAMPLES,
                    });
                }
                if let Some((i, &x)) = xs
                    .iter()
                    .enumerate()
                    .find(|(_, x)| !(**x > 0.0) || !x.is_finite())
                {
                    return Err(Error::Data(format!(
                        "sample {i} = {x}: fitting needs finite positive values"
                    )));
                }
                let nf = n as f64;
                let mean = xs.iter().sum::<f64>() / nf;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
                let lmean = xs.iter().map(|x| x.ln()).sum::<f64>() / nf;
                let lvar = xs.iter().map(|x| (x.ln() - lmean).powi(2)).sum::<f64>() / nf;
                let (lo, hi) = xs
                    .iter()
                    .fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
                let mut acc = EcdfAccumulator::new(Grid::new(hi, DEFAULT_BINS)?);
                acc.extend(xs.iter().copied())?;
                Ok(Prepared {
                    data,
                    n,
                    mean,
                    var,
                    log_moments: Some((lmean, lvar)),
                    degenerate: lo == hi,
                    gof_acc: std::borrow::Cow::Owned(acc),
                    quad: None,
                })
            }
        }
    }

    fn is_grouped(&self) -> bool {
        matches!(self.data, FitData::Grouped(_))
    }

    /// Per-sample negative log-likelihood and its gradient in theta.
    fn objective(&self, family: Family, theta: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let Ok(params) = FamilyParams::from_theta(family, theta) else {
            return f64::INFINITY;
        };
        let ll = match self.data {
            FitData::Grouped(acc) => self
                .quad
                .as_ref()
                .expect("grouped data has quadrature")
                .log_likelihood(acc, &params, grad),
            FitData::Raw(xs) => raw_log_likelihood(xs, &params, grad),
        };
        -ll
    }

    fn total_log_likelihood(&self, params: &FamilyParams) -> f64 {
        let theta = params.to_theta();
        -self.objective(params.family(), &theta, None) * self.n as f64
    }
}

/// Gauss–Legendre nodes on [-1, 1] (8 points).
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Quadrature nodes inside every bin, for the grouped-likelihood gradient.
struct BinQuadrature {
    edges: Vec<f64>,
    /// For each bin, (x, weight) pairs.
    nodes: Vec<Vec<(f64, f64)>>,
}

/// Halvings of the first bin toward 0; resolves x^{k-1} and log x behavior
/// of the integrand at the origin.
const FIRST_BIN_SPLITS: i32 = 48;

fn push_gauss_legendre(out: &mut Vec<(f64, f64)>, l: f64, r: f64) {
    let (mid, half) = (0.5 * (l + r), 0.5 * (r - l));
    for (&t, &w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
        out.push((mid - half * t, w * half));
        out.push((mid + half * t, w * half));
    }
}

impl BinQuadrature {
    fn new(acc: &EcdfAccumulator) -> Self {
        let g = acc.grid;
        let edges: Vec<f64> = std::iter::once(0.0).chain(g.points()).collect();
        let nodes = (0..g.bins)
            .map(|k| {
                let (l, r) = (edges[k], edges[k + 1]);
                let mut q = Vec::with_capacity(8);
                if k == 0 {
                    for j in 0..FIRST_BIN_SPLITS {
                        push_gauss_legendre(&mut q, r * 0.5f64.powi(j + 1), r * 0.5f64.powi(j));
                    }
                } else {
                    push_gauss_legendre(&mut q, l, r);
                }
                q
            })
            .collect();
        BinQuadrature { edges, nodes }
    }

    /// Per-sample grouped log-likelihood; writes the gradient of the
    /// per-sample negative log-likelihood when asked.
    fn log_likelihood(
        &self,
        acc: &EcdfAccumulator,
        params: &FamilyParams,
        grad: Option<&mut [f64]>,
    ) -> f64 {
        let nf = acc.n as f64;
        let cdf: Vec<f64> = self.edges.iter().map(|&x| params.cdf(x)).collect();
        let sf: Vec<f64> = self.edges.iter().map(|&x| params.sf(x)).collect();
        let prob = |k: usize| {
            if cdf[k] < 0.5 {
                cdf[k + 1] - cdf[k]
            } else {
                sf[k] - sf[k + 1]
            }
        };
        let mut ll = 0.0;
        for (k, &c) in acc.counts.iter().enumerate() {
            if c > 0 {
                let p = prob(k);
                if !(p > 0.0) {
                    return f64::NEG_INFINITY;
                }
                ll += c as f64 * p.ln();
            }
        }
        let tail = sf[acc.grid.bins];
        if acc.overflow > 0 {
            if !(tail > 0.0) {
                return f64::NEG_INFINITY;
            }
            ll += acc.overflow as f64 * tail.ln();
        }
        if let Some(grad) = grad {
            let dim = grad.len();
            let density = params.density();
            let mut total = vec![0.0; dim];
            let mut inside = vec![0.0; dim];
            let mut score = vec![0.0; dim];
            let mut bin = vec![0.0; dim];
            for (k, &c) in acc.counts.iter().enumerate() {
                if c == 0 && acc.overflow == 0 {
                    continue;
                }
                bin.iter_mut().for_each(|v| *v = 0.0);
                for &(x, w) in &self.nodes[k] {
                    let f = density.logpdf(x).exp();
                    if f == 0.0 {
                        continue;
                    }
                    density.score_theta(x, &mut score);
                    for j in 0..dim {
                        bin[j] += w * f * score[j];
                    }
                }
                if c > 0 {
                    let p = prob(k);
                    for j in 0..dim {
                        total[j] += c as f64 * bin[j] / p;
                    }
                }
                for j in 0..dim {
                    inside[j] += bin[j];
                }
            }
            if acc.overflow > 0 {
                // d/dθ log SF(U) = −∫_0^U f·score / SF(U), since the score has mean zero
                for j in 0..dim {
                    total[j] -= acc.overflow as f64 * inside[j] / tail;
                }
            }
            for j in 0..dim {
                grad[j] = -total[j] / nf;
            }
        }
        ll / nf
    }
}

const RAW_CHUNK: usize = 1 << 14;

fn raw_log_likelihood(xs: &[f64], params: &FamilyParams, grad: Option<&mut [f64]>) -> f64 {
    let density = params.density();
    let dim = params.values().len();
    let want_grad = grad.is_some();
    // fixed chunking with an ordered reduction keeps the sum deterministic
    let parts: Vec<(f64, Vec<f64>)> = xs
        .par_chunks(RAW_CHUNK)
        .map(|chunk| {
            let mut ll = 0.0;
            let mut g = vec![0.0; if want_grad { dim } else { 0 }];
            let mut s = vec![0.0; dim];
            for &x in chunk {
                ll += density.logpdf(x);
                if want_grad {
                    density.score_theta(x, &mut s);
                    for j in 0..dim {
                        g[j] += s[j];
                    }
                }
            }
            (ll, g)
        })
        .collect();
    let nf = xs.len() as f64;
    let ll: f64 = parts.iter().map(|p| p.0).sum();
    if let Some(grad) = grad {
        for (j, gj) in grad.iter_mut().enumerate() {
            *gj = -parts.iter().map(|p| p.1[j]).sum::<f64>() / nf;
        }
    }
    ll / nf
}

fn moment_start(family: Family, prep: &Prepared<'_>) -> Result<FamilyParams> {
    let (m, v) = (prep.mean, prep.var);
    if !(m > 0.0) || !(v > 0.0) {
        return Err(Error::DegenerateData(format!(
            "sample mean {m} and variance {v} must both be positive"
        )));
    }
    let p = match family {
        Family::Gamma => FamilyParams::Gamma {
            shape: m * m / v,
            rate: m / v,
        },
        Family::LogNormal => {
            let (mu, s2) = match prep.log_moments {
                Some(lm) => lm,
                None => {
                    let s2 = (1.0 + v / (m * m)).ln();
                    (m.ln() - 0.5 * s2, s2)
                }
            };
            FamilyParams::LogNormal {
                mu,
                sigma: s2.sqrt(),
            }
        }
        Family::Rayleigh => FamilyParams::Rayleigh {
            sigma: (0.5 * (v + m * m)).sqrt(),
        },
        Family::Weibull => {
            let k = (v.sqrt() / m).powf(-1.086).clamp(0.05, 50.0);
            let scale = m / (ln_gamma(1.0 + 1.0 / k)?).exp();
            FamilyParams::Weibull { shape: k, scale }
        }
        Family::GeneralizedGamma => {
            let k = m * m / v;
            FamilyParams::GeneralizedGamma(crate::distributions::GGParams {
                a: 1.0,
                b: m / v,
                c: k,
            })
        }
    };
    p.validate()?;
    Ok(p)
}

/// Embeds a Gamma or Weibull optimum in the GG family.
fn gg_start_from(p: &FamilyParams) -> Option<FamilyParams> {
    use crate::distributions::GGParams;
    let gg = match *p {
        FamilyParams::Gamma { shape, rate } => GGParams {
            a: 1.0,
            b: rate,
            c: shape,
        },
        FamilyParams::Weibull { shape, scale } => GGParams {
            a: shape,
            b: scale.powf(-shape),
            c: shape,
        },
        _ => return None,
    };
    gg.validate().ok()?;
    Some(FamilyParams::GeneralizedGamma(gg))
}

struct Optimum {
    theta: Vec<f64>,
    f: f64,
    grad_norm: f64,
    iterations: usize,
    trace: Vec<f64>,
    converged: bool,
}

fn optimize(
    family: Family,
    prep: &Prepared<'_>,
    start: &FamilyParams,
    opts: &FitOptions,
) -> Optimum {
    let fg = |t: &[f64], g: &mut [f64]| prep.objective(family, t, Some(g));
    let f = |t: &[f64]| prep.objective(family, t, None);
    let first = bfgs(fg, &start.to_theta(), opts.grad_tol, opts.max_iter);
    let mut iterations = first.iterations;
    let mut trace = first.trace.clone();
    if first.status == Status::Converged {
        return Optimum {
            theta: first.x,
            f: first.f,
            grad_norm: first.grad_norm,
            iterations,
            trace,
            converged: true,
        };
    }
    // BFGS stalled: reset with a simplex search, then polish
    let (x_nm, _, nm_iter) = nelder_mead(f, &first.x, 0.05, 20 * opts.max_iter);
    iterations += nm_iter;
    let second = bfgs(fg, &x_nm, opts.grad_tol, opts.max_iter);
    iterations += second.iterations;
    trace.extend_from_slice(&second.trace);
    let best = if second.f <= first.f { second } else { first };
    Optimum {
        converged: best.status == Status::Converged,
        theta: best.x,
        f: best.f,
        grad_norm: best.grad_norm,
        iterations,
        trace,
    }
}

/// Gradient-norm ceiling for returning an unconverged fit with a warning
/// instead of an error: the optimizer stalled at rounding level.
const STALL_TOLERANCE: f64 = 1e-5;

fn fit_prepared(
    family: Family,
    prep: &Prepared<'_>,
    opts: &FitOptions,
    gg_starts: &[FamilyParams],
) -> Result<FitResult> {
    let mut warnings = Vec::new();
    let raw = !prep.is_grouped();

    if prep.degenerate {
        if family != Family::Rayleigh {
            return Err(Error::DegenerateData(format!(
                "all {} samples are equal; {family} has no unique maximum-likelihood estimate",
                prep.n
            )));
        }
        let params = moment_start(Family::Rayleigh, prep).or_else(|_| {
            FamilyParams::from_values(Family::Rayleigh, &[(0.5 * prep.mean * prep.mean).sqrt()])
        })?;
        warnings.push(
            "all samples are equal: estimate is non-informative and intervals are omitted".into(),
        );
        return finish(family, prep, params, None, opts, warnings, true);
    }

    // closed forms that are exact MLEs for raw samples
    if raw && matches!(family, Family::Rayleigh | Family::LogNormal) {
        let params = moment_start(family, prep)?;
        return finish(family, prep, params, None, opts, warnings, false);
    }

    let mut starts = Vec::new();
    if family == Family::GeneralizedGamma {
        starts.extend(gg_starts.iter().filter_map(gg_start_from));
    }
    if starts.is_empty() {
        starts.push(moment_start(family, prep)?);
    }

    let mut best: Option<Optimum> = None;
    for start in &starts {
        let o = optimize(family, prep, start, opts);
        if best
            .as_ref()
            .is_none_or(|b| o.f < b.f || (o.converged && !b.converged && o.f <= b.f + 1e-12))
        {
            best = Some(o);
        }
    }
    let best = best.expect("at least one start");
    if !best.f.is_finite() || (!best.converged && best.grad_norm > STALL_TOLERANCE) {
        return Err(Error::NonConvergence {
            iterations: best.iterations,
            grad_norm: best.grad_norm,
            trace: best.trace,
        });
    }
    if !best.converged {
        warnings.push(format!(
            "optimizer stalled at gradient norm {:.2e} (tolerance {:.0e})",
            best.grad_norm, opts.grad_tol
        ));
    }
    let params = FamilyParams::from_theta(family, &best.theta)?;
    finish(family, prep, params, Some(&best), opts, warnings, false)
}

fn finish(
    family: Family,
    prep: &Prepared<'_>,
    params: FamilyParams,
    opt: Option<&Optimum>,
    opts: &FitOptions,
    mut warnings: Vec<String>,
    non_informative: bool,
) -> Result<FitResult> {
    let theta = params.to_theta();
    let dim = theta.len();
    let mut g = vec![0.0; dim];
    prep.objective(family, &theta, Some(&mut g));
    let grad_norm = opt.map_or_else(
        || g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        |o| o.grad_norm,
    );
    let converged = opt.is_none_or(|o| o.converged);

    let covariance = if non_informative {
        None
    } else {
        match observed_covariance(family, prep, &theta) {
            Some(c) => Some(c),
            None => {
                warnings.push(
                    "observed information is not positive definite; intervals omitted".into(),
                );
                None
            }
        }
    };
    let log_likelihood = prep.total_log_likelihood(&params);
    let gof = gof_metrics(&prep.gof_acc, |x| params.cdf(x))?;
    let k = dim as f64;
    let nf = prep.n as f64;
    let mut fit = FitResult {
        family,
        params,
        log_likelihood,
        covariance,
        ci_level: opts.level,
        ci: None,
        rmse: gof.rmse,
        max_abs_variation: gof.max_abs_variation,
        n: prep.n,
        grouped: prep.is_grouped(),
        converged,
        iterations: opt.map_or(0, |o| o.iterations),
        grad_norm,
        aic: 2.0 * k - 2.0 * log_likelihood,
        bic: k * nf.ln() - 2.0 * log_likelihood,
        non_informative,
        warnings,
    };
    fit.ci = confidence_intervals(&fit, opts.level)?;
    if fit.ci.is_none() && fit.covariance.is_some() {
        fit.warnings
            .push("zero or undefined variance in some direction; intervals omitted".into());
    }
    Ok(fit)
}

/// Inverse of the observed information, from central differences of the
/// analytic gradient.
fn observed_covariance(
    family: Family,
    prep: &Prepared<'_>,
    theta: &[f64],
) -> Option<Vec<Vec<f64>>> {
    let dim = theta.len();
    let h = 1e-4;
    let mut hess = DMatrix::<f64>::zeros(dim, dim);
    let mut gp = vec![0.0; dim];
    let mut gm = vec![0.0; dim];
    for j in 0..dim {
        let mut tp = theta.to_vec();
        let mut tm = theta.to_vec();
        tp[j] += h;
        tm[j] -= h;
        prep.objective(family, &tp, Some(&mut gp));
        prep.objective(family, &tm, Some(&mut gm));
        for i in 0..dim {
            hess[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    let info = (&hess + hess.transpose()) * (0.5 * prep.n as f64);
    if info.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let chol = info.cholesky()?;
    let cov = chol.inverse();
    Some(
        (0..dim)
            .map(|i| (0..dim).map(|j| cov[(i, j)]).collect())
            .collect(),
    )
}
