//! Built-in service-time distributions.
//!
//! Each law carries an exact tail function `P[S > u]`, an inverse-CDF sampler
//! (the only sampling route, so a seed stream fully determines the draws), a
//! truncated mean `m(t) = E(S ∧ t) = ∫_0^t P[S > u] du` — closed-form where
//! one exists, cached adaptive quadrature otherwise — and a certified
//! asymptotic profile of `m` on the `ln t` / `ln ln t` scale, which is what
//! the classifier consumes.
//!
//! The heavy-tailed family of interest here has
//! `P[S > u] = 1/u + b/(u ln u)` beyond the point `u0` where that expression
//! first drops to 1, and tail ≡ 1 below `u0`. Its truncated mean grows like
//! `ln t + b ln ln t + O(1)`, the regime where the critical state can sit
//! strictly between 0 and ∞. Bounded modifications below `u0` shift `m` by
//! O(1) only, which the classification rules ignore by construction.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::quadrature::{integrate_finite_with_budget, DEFAULT_EVAL_BUDGET};

/// Relative tolerance used for numeric truncated means.
pub const TRUNCATED_MEAN_REL_TOL: f64 = 1e-8;
// per-segment tolerance sits below the documented 1e-8 so grid accumulation stays inside it
const SEGMENT_REL_TOL: f64 = 1e-9;

/// Errors from law construction, parsing, or numeric evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum LawError {
    #[error("invalid parameter for {law}: {reason}")]
    InvalidParameter { law: &'static str, reason: String },
    #[error("cannot parse law spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

/// Second-order asymptotics of the truncated mean `m(t) = E(S ∧ t)`,
/// declared by a law's constructor (never inferred silently).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticProfile {
    /// `E S < ∞`: `m(t)` converges to the mean.
    BoundedMean,
    /// `m(t) = log_coeff · ln t + loglog_coeff · ln ln t + O(1)` with a
    /// finite `log_coeff >= 0`. `loglog_certified` marks whether the
    /// second-order coefficient is exact (constructors) or merely estimated
    /// (numeric profile fits).
    LogGrowth {
        log_coeff: f64,
        loglog_coeff: f64,
        loglog_certified: bool,
    },
    /// `m(t) / ln t → ∞` (e.g. polynomial growth of `m`).
    SuperLogarithmic,
}

#[derive(Debug, Clone, PartialEq)]
enum LawKind {
    Exponential { mean: f64 },
    Pareto { alpha: f64, scale: f64 },
    Strange { b: f64, crossover: f64 },
    Deterministic { value: f64 },
}

#[derive(Debug)]
struct Inner {
    kind: LawKind,
    name: String,
    profile: AsymptoticProfile,
    /// cumulative `∫_0^{2^i} tail` for laws without a closed-form `m`
    mean_grid: Option<Mutex<Vec<f64>>>,
}

/// A service-time distribution. Cheap to clone; clones share the
/// truncated-mean cache, and concurrent reads return identical values for
/// identical arguments because each cached grid entry is computed exactly
/// once.
#[derive(Debug, Clone)]
pub struct ServiceLaw {
    inner: Arc<Inner>,
}

impl PartialEq for ServiceLaw {
    fn eq(&self, other: &Self) -> bool {
        self.inner.kind == other.inner.kind
    }
}

fn require_positive(law: &'static str, name: &str, v: f64) -> Result<(), LawError> {
    if v.is_nan() || v <= 0.0 || v.is_infinite() {
        return Err(LawError::InvalidParameter {
            law,
            reason: format!("{name} must be positive and finite, got {v}"),
        });
    }
    Ok(())
}

impl ServiceLaw {
    /// Exponential service times with the given mean. A stable control case:
    /// the queue is positive recurrent at every arrival rate.
    pub fn exponential(mean: f64) -> Result<Self, LawError> {
        require_positive("exp", "mean", mean)?;
        Ok(Self::build(
            LawKind::Exponential { mean },
            format!("exp(mean={mean})"),
            AsymptoticProfile::BoundedMean,
        ))
    }

    /// Pareto tail `min(1, (scale/u)^alpha)`. Infinite mean for
    /// `alpha <= 1`; the truncated mean grows like `scale · ln t` at
    /// `alpha = 1` and polynomially for `alpha < 1`.
    pub fn pareto(alpha: f64, scale: f64) -> Result<Self, LawError> {
        require_positive("pareto", "alpha", alpha)?;
        require_positive("pareto", "scale", scale)?;
        let profile = if alpha > 1.0 {
            AsymptoticProfile::BoundedMean
        } else if alpha == 1.0 {
            AsymptoticProfile::LogGrowth {
                log_coeff: scale,
                loglog_coeff: 0.0,
                loglog_certified: true,
            }
        } else {
            AsymptoticProfile::SuperLogarithmic
        };
        Ok(Self::build(
            LawKind::Pareto { alpha, scale },
            format!("pareto(alpha={alpha},scale={scale})"),
            profile,
        ))
    }

    /// The heavy-tailed law with `P[S > u] = 1/u + b/(u ln u)` beyond the
    /// crossover point and tail ≡ 1 below it. Requires `b > 0`.
    pub fn strange(b: f64) -> Result<Self, LawError> {
        require_positive("strange", "b", b)?;
        let crossover = strange_crossover(b);
        Ok(Self::build(
            LawKind::Strange { b, crossover },
            format!("strange(b={b})"),
            AsymptoticProfile::LogGrowth {
                log_coeff: 1.0,
                loglog_coeff: b,
                loglog_certified: true,
            },
        ))
    }

    /// Constant service time `S ≡ value`.
    pub fn deterministic(value: f64) -> Result<Self, LawError> {
        require_positive("det", "value", value)?;
        Ok(Self::build(
            LawKind::Deterministic { value },
            format!("det(value={value})"),
            AsymptoticProfile::BoundedMean,
        ))
    }

    fn build(kind: LawKind, name: String, profile: AsymptoticProfile) -> Self {
        let needs_grid = matches!(kind, LawKind::Strange { .. });
        ServiceLaw {
            inner: Arc::new(Inner {
                kind,
                name,
                profile,
                mean_grid: needs_grid.then(|| Mutex::new(Vec::new())),
            }),
        }
    }

    /// Canonical spec string, e.g. `strange(b=2.5)`. Parsing it back yields
    /// an identical law.
    pub fn name(&self) -> &str {
        &self.inner.name
    }

    /// Constructor-certified asymptotic profile of the truncated mean.
    pub fn profile(&self) -> Option<&AsymptoticProfile> {
        Some(&self.inner.profile)
    }

    /// Exact tail function `P[S > u]`, defined for all `u >= 0`.
    pub fn tail(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match self.inner.kind {
            LawKind::Exponential { mean } => (-u / mean).exp(),
            LawKind::Pareto { alpha, scale } => {
                if u <= scale {
                    1.0
                } else {
                    (scale / u).powf(alpha)
                }
            }
            LawKind::Strange { b, crossover } => {
                if u <= crossover {
                    1.0
                } else {
                    strange_raw_tail(b, u)
                }
            }
            LawKind::Deterministic { value } => {
                if u < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Inverse CDF: the smallest `u` with `P[S <= u] >= p`, for `p ∈ [0, 1)`.
    /// Nondecreasing in `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&p), "quantile requires p in [0,1)");
        match self.inner.kind {
            LawKind::Exponential { mean } => -mean * (1.0 - p).ln(),
            LawKind::Pareto { alpha, scale } => scale * (1.0 - p).powf(-1.0 / alpha),
            LawKind::Strange { b, crossover } => strange_quantile(b, crossover, p),
            LawKind::Deterministic { value } => value,
        }
    }

    /// Closed-form truncated mean, when the law has one.
    pub fn closed_form_truncated_mean(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(0.0);
        }
        match self.inner.kind {
            LawKind::Exponential { mean } => Some(mean * (1.0 - (-t / mean).exp())),
            LawKind::Pareto { alpha, scale } => {
                if t <= scale {
                    Some(t)
                } else if alpha == 1.0 {
                    Some(scale + scale * (t / scale).ln())
                } else {
                    Some(
                        scale
                            + scale.powf(alpha) * (t.powf(1.0 - alpha) - scale.powf(1.0 - alpha))
                                / (1.0 - alpha),
                    )
                }
            }
            LawKind::Strange { .. } => None,
            LawKind::Deterministic { value } => Some(t.min(value)),
        }
    }

    /// Truncated mean `m(t) = E(S ∧ t)`: closed form when available, cached
    /// adaptive quadrature of the tail otherwise (relative tolerance 1e-8,
    /// cumulative integrals cached on the geometric grid `t = 2^i`).
    pub fn truncated_mean(&self, t: f64) -> Result<f64, LawError> {
        debug_assert!(t >= 0.0, "truncated_mean requires t >= 0");
        if t <= 0.0 {
            return Ok(0.0);
        }
        if let Some(v) = self.closed_form_truncated_mean(t) {
            return Ok(v);
        }
        self.numeric_truncated_mean(t)
    }

    fn numeric_truncated_mean(&self, t: f64) -> Result<f64, LawError> {
        let grid = self
            .inner
            .mean_grid
            .as_ref()
            .expect("numeric mean requested for a closed-form law");

        if t <= 1.0 {
            return self.quad_tail_segment(0.0, t);
        }
        let i = t.log2().floor() as usize; // 2^i <= t < 2^(i+1)
        let base = {
            let mut cum = grid.lock().expect("mean cache poisoned");
            while cum.len() <= i {
                let n = cum.len();
                let (lo, hi) = if n == 0 {
                    (0.0, 1.0)
                } else {
                    (2f64.powi(n as i32 - 1), 2f64.powi(n as i32))
                };
                let prev = if n == 0 { 0.0 } else { cum[n - 1] };
                let seg = self.quad_tail_segment(lo, hi)?;
                cum.push(prev + seg);
            }
            cum[i]
        };
        let lo = 2f64.powi(i as i32);
        if t > lo {
            Ok(base + self.quad_tail_segment(lo, t)?)
        } else {
            Ok(base)
        }
    }

    fn quad_tail_segment(&self, lo: f64, hi: f64) -> Result<f64, LawError> {
        let est = integrate_finite_with_budget(
            |u| self.tail(u),
            lo,
            hi,
            SEGMENT_REL_TOL,
            DEFAULT_EVAL_BUDGET,
        );
        if !est.converged {
            return Err(LawError::Numeric(format!(
                "truncated-mean quadrature did not converge on [{lo}, {hi}] \
                 (error bound {:.3e} after {} panels)",
                est.abs_error_bound, est.panels_used
            )));
        }
        Ok(est.value)
    }

    /// Parse a law spec like `strange(b=2.5)`, `pareto(alpha=1.0,scale=1.0)`,
    /// `exp(mean=1.0)` or `det(value=1.0)`. Case-insensitive and
    /// whitespace-tolerant; unknown names or parameters are hard errors.
    pub fn parse(spec: &str) -> Result<Self, LawError> {
        let err = |reason: &str| LawError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let s = spec.trim();
        let open = s.find('(').ok_or_else(|| err("expected `name(...)`"))?;
        if !s.ends_with(')') {
            return Err(err("missing closing parenthesis"));
        }
        let name = s[..open].trim().to_ascii_lowercase();
        let body = &s[open + 1..s.len() - 1];

        let mut params: Vec<(String, f64)> = Vec::new();
        for part in body.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let eq = part
                .find('=')
                .ok_or_else(|| err(&format!("expected `key=value`, got `{part}`")))?;
            let key = part[..eq].trim().to_ascii_lowercase();
            let value: f64 = part[eq + 1..]
                .trim()
                .parse()
                .map_err(|_| err(&format!("`{}` is not a number", part[eq + 1..].trim())))?;
            if params.iter().any(|(k, _)| *k == key) {
                return Err(err(&format!("duplicate parameter `{key}`")));
            }
            params.push((key, value));
        }

        fn take(params: &mut Vec<(String, f64)>, key: &str) -> Option<f64> {
            params
                .iter()
                .position(|(k, _)| k == key)
                .map(|i| params.remove(i).1)
        }

        let law = match name.as_str() {
            "strange" => {
                let b = take(&mut params, "b").ok_or_else(|| err("missing parameter `b`"))?;
                Self::strange(b)
            }
            "pareto" => {
                let alpha =
                    take(&mut params, "alpha").ok_or_else(|| err("missing parameter `alpha`"))?;
                let scale =
                    take(&mut params, "scale").ok_or_else(|| err("missing parameter `scale`"))?;
                Self::pareto(alpha, scale)
            }
            "exp" => {
                let mean =
                    take(&mut params, "mean").ok_or_else(|| err("missing parameter `mean`"))?;
                Self::exponential(mean)
            }
            "det" => {
                let value =
                    take(&mut params, "value").ok_or_else(|| err("missing parameter `value`"))?;
                Self::deterministic(value)
            }
            other => {
                return Err(err(&format!(
                    "unknown law `{other}` (known: strange, pareto, exp, det)"
                )))
            }
        };
        if let Some((k, _)) = params.first() {
            return Err(err(&format!("unknown parameter `{k}` for `{name}`")));
        }
        law
    }
}

impl FromStr for ServiceLaw {
    type Err = LawError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ServiceLaw::parse(s)
    }
}

impl fmt::Display for ServiceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Raw tail expression of the strange law, valid for `u > 1`.
fn strange_raw_tail(b: f64, u: f64) -> f64 {
    1.0 / u + b / (u * u.ln())
}

/// Smallest `u > 1` where `1/u + b/(u ln u)` drops to 1. The expression is
/// strictly decreasing on `(1, ∞)` from +∞ to 0, so the root is unique.
fn strange_crossover(b: f64) -> f64 {
    let mut hi = 2.0;
    while strange_raw_tail(b, hi) > 1.0 {
        hi *= 2.0;
    }
    let mut lo = 1.0 + 1e-12;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if strange_raw_tail(b, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Inverse CDF of the strange law: solve `tail(u) = 1 - p` on `[u0, ∞)` by
/// bisection in log space. The tail is continuous and strictly decreasing
/// there, so the root is unique.
fn strange_quantile(b: f64, crossover: f64, p: f64) -> f64 {
    let target = 1.0 - p;
    if target >= 1.0 {
        return crossover;
    }
    let mut hi = crossover.max(2.0) * 2.0;
    while strange_raw_tail(b, hi) > target {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let (mut llo, mut lhi) = (crossover.ln(), hi.ln());
    for _ in 0..80 {
        let lmid = 0.5 * (llo + lhi);
        if strange_raw_tail(b, lmid.exp()) > target {
            llo = lmid;
        } else {
            lhi = lmid;
        }
        if lhi - llo < 1e-14 {
            break;
        }
    }
    (0.5 * (llo + lhi)).exp()
}
