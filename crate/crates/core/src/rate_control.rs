//! Asymptotic (infinite-blocklength) payload allocation for SC and MRC.
//!
//! An error occurs when the combined SIR falls below `θ = 2^(k/n) - 1`.
//! For selection combining the combined SIR is the per-antenna maximum,
//! whose CDF is `F(θ)^M`. For maximum ratio combining it is the sum of the
//! per-antenna SIRs; with the scaled-Lomax law that sum is `(η/β) υ`, where
//! `υ` is a sum of `M` i.i.d. standard Lomax variables with shape `η`, and
//! `υ` is handled through a gamma-type approximation of its distribution.

use crate::error::{Error, Result};
use crate::numerics::{find_root_monotone, gamma_p, grow_bracket, ln_gamma, Bracket};
use crate::sir_model::SirDistribution;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Sc,
    Mrc,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Sc => "sc",
            Scheme::Mrc => "mrc",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sc" => Ok(Scheme::Sc),
            "mrc" => Ok(Scheme::Mrc),
            other => Err(Error::InvalidConfig(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Antenna count, blocklength, error target and combining scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub antennas: u32,
    pub blocklength: u32,
    pub epsilon_th: f64,
    pub scheme: Scheme,
}

impl LinkConfig {
    pub fn new(antennas: u32, blocklength: u32, epsilon_th: f64, scheme: Scheme) -> Result<Self> {
        let cfg = Self {
            antennas,
            blocklength,
            epsilon_th,
            scheme,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas == 0 {
            return Err(Error::InvalidConfig("antenna count must be at least 1".into()));
        }
        if self.blocklength == 0 {
            return Err(Error::InvalidConfig("blocklength must be at least 1".into()));
        }
        if !(self.epsilon_th > 0.0 && self.epsilon_th < 1.0) {
            return Err(Error::InvalidConfig(format!("epsilon_th must lie in (0, 1), got {}", self.epsilon_th)));
        }
        Ok(())
    }

    fn expect_scheme(&self, method: &'static str, expected: Scheme) -> Result<()> {
        self.validate()?;
        if self.scheme != expected {
            return Err(Error::SchemeMismatch {
                method,
                expected: match expected {
                    Scheme::Sc => "sc",
                    Scheme::Mrc => "mrc",
                },
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ScExact,
    ScApprox,
    MrcApproxNumeric,
    MrcApproxClosed,
    FbSc,
    FbMrc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ScExact => "sc_exact",
            Method::ScApprox => "sc_approx",
            Method::MrcApproxNumeric => "mrc_numeric",
            Method::MrcApproxClosed => "mrc_closed",
            Method::FbSc => "fb_sc",
            Method::FbMrc => "fb_mrc",
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Method::ScExact | Method::ScApprox | Method::FbSc => Scheme::Sc,
            Method::MrcApproxNumeric | Method::MrcApproxClosed | Method::FbMrc => Scheme::Mrc,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "sc_exact" => Method::ScExact,
            "sc_approx" => Method::ScApprox,
            "mrc_numeric" => Method::MrcApproxNumeric,
            "mrc_closed" => Method::MrcApproxClosed,
            "fb_sc" => Method::FbSc,
            "fb_mrc" => Method::FbMrc,
            other => return Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        })
    }
}

/// Allocated payload and the reliability it is predicted to achieve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSolution {
    pub k_star: u64,
    /// Unfloored payload from the underlying equation (for smooth curves).
    pub k_real: f64,
    pub blocklength: u32,
    pub rate: f64,
    pub theta: f64,
    pub predicted_epsilon: f64,
    pub method: Method,
    /// `false` when not even one bit meets the constraint; `k_star` is then 0.
    pub feasible: bool,
}

impl RateSolution {
    fn new(k_star: u64, k_real: f64, n: u32, predicted_epsilon: f64, method: Method) -> Self {
        Self {
            k_star,
            k_real,
            blocklength: n,
            rate: k_star as f64 / f64::from(n),
            theta: threshold(k_star as f64, n),
            predicted_epsilon,
            method,
            feasible: k_star >= 1,
        }
    }
}

/// SIR decoding threshold `2^(k/n) - 1`.
#[inline]
pub fn threshold(k: f64, n: u32) -> f64 {
    (k / f64::from(n) * LN_2).exp_m1()
}

/// Floors `k_real` to an integer payload whose `error` does not exceed `eps`.
///
/// Steps down while the constraint is violated, so the returned prediction
/// always honours `eps`. Steps up only when `k_real` sits within
/// floating-point noise of the next integer.
fn settle_integer<F>(k_real: f64, eps: f64, error: F) -> Result<(u64, f64)>
where
    F: Fn(u64) -> Result<f64>,
{
    let mut k = if k_real.is_finite() && k_real > 0.0 {
        k_real.floor() as u64
    } else {
        0
    };
    let mut e = error(k)?;
    while e > eps && k > 0 {
        k -= 1;
        e = error(k)?;
    }
    let next = (k + 1) as f64;
    if next - k_real <= 1e-9 * next {
        let e_next = error(k + 1)?;
        if e_next <= eps {
            return Ok((k + 1, e_next));
        }
    }
    Ok((k, e))
}

/// Which per-antenna CDF to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CdfForm {
    Exact,
    Approx,
}

/// SC error probability `F_SIR(θ)^M`.
pub fn sc_error(theta: f64, dist: &SirDistribution, antennas: u32, form: CdfForm) -> Result<f64> {
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("threshold must be nonnegative, got {theta}")));
    }
    let f = match form {
        CdfForm::Exact => dist.cdf_exact(theta)?,
        CdfForm::Approx => dist.cdf_approx(theta),
    };
    Ok(if f <= 0.0 {
        0.0
    } else if antennas == 1 {
        f
    } else if f < 1e-3 {
        (f64::from(antennas) * f.ln()).exp()
    } else {
        f.powi(antennas as i32)
    })
}

/// `-ln(1 - ε^(1/M))`, the log of the product target for SC.
fn sc_log_target(epsilon: f64, antennas: u32) -> f64 {
    -(-epsilon.powf(1.0 / f64::from(antennas))).ln_1p()
}

/// Largest payload meeting the SC constraint under the exact product-form CDF.
///
/// Solves `Σ_j ln(1 + (2^(k/n) - 1) c_j) = -ln(1 - ε^(1/M))` for real `k`
/// by bisection and floors the result.
pub fn sc_kstar_exact(dist: &SirDistribution, cfg: &LinkConfig) -> Result<RateSolution> {
    cfg.expect_scheme("sc_exact", Scheme::Sc)?;
    let ratios = dist.ratios().ok_or(Error::MissingTopology)?;
    let n = cfg.blocklength;
    let target = sc_log_target(cfg.epsilon_th, cfg.antennas);
    let log_product = |k: f64| -> f64 {
        let theta = threshold(k, n);
        ratios.iter().map(|c| (theta * c).ln_1p()).sum()
    };
    let bracket = grow_bracket(log_product, target, 0.0, f64::from(n), 64)?;
    let tol = 1e-10 * bracket.hi.max(1.0);
    let k_real = find_root_monotone(log_product, target, bracket, tol)?;
    let (k, e) = settle_integer(k_real, cfg.epsilon_th, |k| {
        sc_error(threshold(k as f64, n), dist, cfg.antennas, CdfForm::Exact)
    })?;
    Ok(RateSolution::new(k, k_real, n, e, Method::ScExact))
}

/// Closed-form SC allocation under the scaled-Lomax CDF:
/// `k = n log2((η/β)((1 - ε^(1/M))^(-1/η) - 1) + 1)`.
pub fn sc_kstar_approx(dist: &SirDistribution, cfg: &LinkConfig) -> Result<RateSolution> {
    cfg.expect_scheme("sc_approx", Scheme::Sc)?;
    let n = cfg.blocklength;
    let eta = f64::from(dist.eta);
    let root = cfg.epsilon_th.powf(1.0 / f64::from(cfg.antennas));
    let inner = (-(-root).ln_1p() / eta).exp_m1();
    let k_real = f64::from(n) * (eta / dist.beta * inner).ln_1p() / LN_2;
    let (k, e) = settle_integer(k_real, cfg.epsilon_th, |k| {
        sc_error(threshold(k as f64, n), dist, cfg.antennas, CdfForm::Approx)
    })?;
    Ok(RateSolution::new(k, k_real, n, e, Method::ScApprox))
}

/// Density of the SC-combined SIR under the scaled-Lomax law.
pub fn sc_pdf(x: f64, dist: &SirDistribution, antennas: u32) -> f64 {
    let x = x.max(0.0);
    let eta = f64::from(dist.eta);
    let log_base = (x * dist.beta / eta).ln_1p();
    let single_cdf = -(-eta * log_base).exp_m1();
    let tail = (-(eta + 1.0) * log_base).exp();
    let m = f64::from(antennas);
    let cdf_power = if antennas == 1 {
        1.0
    } else {
        single_cdf.powi(antennas as i32 - 1)
    };
    m * dist.beta * cdf_power * tail
}

/// Approximate density of `υ`, a sum of `M` standard Lomax(η) variables:
/// `η^M M^(M-1) / (M-1)! · (1 + x/M)^(-1-Mη) · ln^(M-1)(1 + x/M)`.
pub fn lomax_sum_pdf(x: f64, antennas: u32, eta: u32) -> f64 {
    let m = f64::from(antennas);
    let eta = f64::from(eta);
    let x = x.max(0.0);
    let l = (x / m).ln_1p();
    if antennas == 1 {
        return eta * (-(1.0 + eta) * l).exp();
    }
    if l <= 0.0 {
        return 0.0;
    }
    let log_density = m * eta.ln() + (m - 1.0) * m.ln() - ln_gamma(m) - (1.0 + m * eta) * l + (m - 1.0) * l.ln();
    log_density.exp()
}

/// Approximate CDF of `υ`: `P(M, ηM ln(1 + x/M))` (lower regularized gamma).
pub fn lomax_sum_cdf(x: f64, antennas: u32, eta: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let m = f64::from(antennas);
    let z = f64::from(eta) * m * (x / m).ln_1p();
    gamma_p(m, z).expect("positive shape and nonnegative argument")
}

/// Lower bound `(1 - exp(-(M!)^(-1/M) ηM ln(1 + x/M)))^M` on the `υ` CDF.
///
/// With `linearize` the logarithm is replaced by `x/M`, which yields the
/// closed-form quantile of [`mrc_quantile_closed`].
pub fn lomax_sum_cdf_lower_bound(x: f64, antennas: u32, eta: u32, linearize: bool) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let m = f64::from(antennas);
    let l = if linearize { x / m } else { (x / m).ln_1p() };
    let scale = (-ln_gamma(m + 1.0) / m).exp();
    let inner = -(-scale * f64::from(eta) * m * l).exp_m1();
    inner.powi(antennas as i32)
}

fn check_quantile_args(epsilon: f64, antennas: u32, eta: u32) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0, 1), got {epsilon}")));
    }
    if antennas == 0 || eta == 0 {
        return Err(Error::Domain("antenna count and eta must be positive integers".into()));
    }
    Ok(())
}

/// Numeric inverse of [`lomax_sum_cdf`] by bisection.
///
/// The bracket grows upward by doubling from `M`; the bisection then runs
/// on `ln x` so the quantile keeps its relative precision when it is tiny.
pub fn mrc_quantile_numeric(epsilon: f64, antennas: u32, eta: u32) -> Result<f64> {
    check_quantile_args(epsilon, antennas, eta)?;
    let cdf = |x: f64| lomax_sum_cdf(x, antennas, eta);
    let upper = grow_bracket(cdf, epsilon, 0.0, f64::from(antennas), 1100)?.hi;
    let mut lower = upper;
    while cdf(lower) >= epsilon {
        lower *= 0.5;
        if lower < f64::MIN_POSITIVE {
            return Err(Error::BracketGrowth {
                target: epsilon,
                doublings: 1100,
            });
        }
    }
    let bracket = Bracket::new(lower.ln(), upper.ln())?;
    let log_x = find_root_monotone(|u: f64| cdf(u.exp()), epsilon, bracket, 1e-14)?;
    Ok(log_x.exp())
}

/// Closed-form approximation of the `υ` quantile: `(M!)^(1/M) / η · |ln(1 - ε^(1/M))|`.
pub fn mrc_quantile_closed(epsilon: f64, antennas: u32, eta: u32) -> Result<f64> {
    check_quantile_args(epsilon, antennas, eta)?;
    let m = f64::from(antennas);
    let factorial_root = (ln_gamma(m + 1.0) / m).exp();
    Ok(factorial_root / f64::from(eta) * (-epsilon.powf(1.0 / m)).ln_1p().abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileMethod {
    Numeric,
    Closed,
}

/// MRC allocation `k = n log2((η/β) F_υ^-1(ε) + 1)`.
///
/// The predicted error is `F_υ(βθ/η)` at the returned integer payload.
pub fn mrc_kstar(dist: &SirDistribution, cfg: &LinkConfig, quantile: QuantileMethod) -> Result<RateSolution> {
    cfg.expect_scheme("mrc", Scheme::Mrc)?;
    let n = cfg.blocklength;
    let q = match quantile {
        QuantileMethod::Numeric => mrc_quantile_numeric(cfg.epsilon_th, cfg.antennas, dist.eta)?,
        QuantileMethod::Closed => mrc_quantile_closed(cfg.epsilon_th, cfg.antennas, dist.eta)?,
    };
    let eta = f64::from(dist.eta);
    let k_real = f64::from(n) * (eta / dist.beta * q).ln_1p() / LN_2;
    let (k, e) = settle_integer(k_real, cfg.epsilon_th, |k| Ok(mrc_error(threshold(k as f64, n), dist, cfg.antennas)))?;
    let method = match quantile {
        QuantileMethod::Numeric => Method::MrcApproxNumeric,
        QuantileMethod::Closed => Method::MrcApproxClosed,
    };
    Ok(RateSolution::new(k, k_real, n, e, method))
}

/// Approximate MRC error `F_υ(βθ/η)`.
pub fn mrc_error(theta: f64, dist: &SirDistribution, antennas: u32) -> f64 {
    lomax_sum_cdf(dist.beta * theta / f64::from(dist.eta), antennas, dist.eta)
}

/// Density of the MRC-combined SIR, `Ψ ≈ (η/β) υ`.
pub fn mrc_pdf(x: f64, dist: &SirDistribution, antennas: u32) -> f64 {
    let scale = dist.beta / f64::from(dist.eta);
    scale * lomax_sum_pdf(x * scale, antennas, dist.eta)
}
