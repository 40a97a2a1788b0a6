//! Finite-blocklength error evaluation and payload search.
//!
//! Conditioned on the combined SIR, the block error of a rate-`k/n` code is
//! approximated by the normal approximation `Q((C - k/n) / sqrt(V/n))`.
//! Averaging over the combined-SIR density gives the block error `ε_FB`,
//! and the allocation is the largest integer `k` with `ε_FB <= ε_th`.

use crate::error::{Error, Result};
use crate::numerics::{integrate_with_breakpoints, q_function, QuadratureSpec};
use crate::rate_control::{mrc_kstar, mrc_pdf, sc_kstar_approx, sc_pdf, LinkConfig, Method, QuantileMethod, RateSolution, Scheme};
use crate::sir_model::SirDistribution;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, LOG2_E};

/// Blocklengths below this fall outside the validated range of the normal approximation.
pub const MIN_VALIDATED_BLOCKLENGTH: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FbEvaluation {
    pub k: u64,
    pub n: u32,
    pub epsilon_fb: f64,
    pub quadrature_error_estimate: f64,
}

/// `log2(1 + sir)`.
#[inline]
pub fn shannon_capacity(sir: f64) -> f64 {
    sir.ln_1p() / LN_2
}

/// `(1 - (1 + sir)^-2) (log2 e)^2`.
#[inline]
pub fn channel_dispersion(sir: f64) -> f64 {
    let s = sir.max(0.0);
    // 1 - 1/(1+s)^2 without cancellation at small s
    let one_minus = if s.is_infinite() { 1.0 } else { s * (2.0 + s) / ((1.0 + s) * (1.0 + s)) };
    one_minus * LOG2_E * LOG2_E
}

/// Block error probability at a known SIR.
///
/// At `sir = 0` the dispersion vanishes; any positive payload then fails.
pub fn fb_error_conditional(sir: f64, k: u64, n: u32) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if sir <= 0.0 {
        return 1.0;
    }
    let n = f64::from(n);
    let gap = shannon_capacity(sir) - k as f64 / n;
    if gap == 0.0 {
        return 0.5;
    }
    q_function(gap / (channel_dispersion(sir) / n).sqrt())
}

/// Splits `[0, ∞)` around the SIR where `C(sir) = k/n`, where the
/// integrand switches from the density to (almost) zero.
fn breakpoints(k: u64, n: u32) -> Vec<f64> {
    let rate = k as f64 / f64::from(n);
    let center = (rate * LN_2).exp_m1();
    let width = (channel_dispersion(center) / f64::from(n)).sqrt();
    let mut points = vec![0.0];
    for step in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        let r = rate + step * width;
        if r > 0.0 {
            points.push((r * LN_2).exp_m1());
        }
    }
    points.dedup_by(|a, b| *a <= *b);
    points
}

/// `ε_FB = ∫_0^∞ Q((C(x) - k/n) / sqrt(V(x)/n)) f(x) dx` for a combined-SIR density `f`.
pub fn fb_error_average<F>(density: F, k: u64, n: u32, spec: &QuadratureSpec) -> Result<FbEvaluation>
where
    F: Fn(f64) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidConfig("blocklength must be at least 1".into()));
    }
    if k == 0 {
        return Ok(FbEvaluation {
            k,
            n,
            epsilon_fb: 0.0,
            quadrature_error_estimate: 0.0,
        });
    }
    let integrand = |x: f64| {
        let f = density(x);
        if f == 0.0 {
            0.0
        } else {
            fb_error_conditional(x, k, n) * f
        }
    };
    let r = integrate_with_breakpoints(integrand, &breakpoints(k, n), spec)?;
    Ok(FbEvaluation {
        k,
        n,
        epsilon_fb: r.value.clamp(0.0, 1.0),
        quadrature_error_estimate: r.abs_error,
    })
}

/// Combined-SIR density for the scheme: order-statistic density for SC,
/// rescaled Lomax-sum density for MRC.
pub fn combined_density(dist: &SirDistribution, antennas: u32, scheme: Scheme) -> impl Fn(f64) -> f64 + '_ {
    move |x| match scheme {
        Scheme::Sc => sc_pdf(x, dist, antennas),
        Scheme::Mrc => mrc_pdf(x, dist, antennas),
    }
}

/// `ε_FB` for payload `k` under the configured scheme.
pub fn fb_error(dist: &SirDistribution, cfg: &LinkConfig, k: u64, spec: &QuadratureSpec) -> Result<FbEvaluation> {
    fb_error_average(combined_density(dist, cfg.antennas, cfg.scheme), k, cfg.blocklength, spec)
}

/// Finite-blocklength allocation with the default quadrature settings.
pub fn fb_kstar(dist: &SirDistribution, cfg: &LinkConfig) -> Result<RateSolution> {
    fb_kstar_with(dist, cfg, &QuadratureSpec::default())
}

/// Largest integer `k` with `ε_FB(k) <= ε_th`.
///
/// Seeds the search with the floored asymptotic payload, decrements while
/// the constraint is violated and otherwise increments until the next
/// payload would violate it.
pub fn fb_kstar_with(dist: &SirDistribution, cfg: &LinkConfig, spec: &QuadratureSpec) -> Result<RateSolution> {
    cfg.validate()?;
    if cfg.blocklength < MIN_VALIDATED_BLOCKLENGTH {
        log::warn!(
            "blocklength {} is below {}; the normal approximation is not validated there",
            cfg.blocklength,
            MIN_VALIDATED_BLOCKLENGTH
        );
    }
    let (asymptotic, method) = match cfg.scheme {
        Scheme::Sc => (sc_kstar_approx(dist, cfg)?, Method::FbSc),
        Scheme::Mrc => (mrc_kstar(dist, cfg, QuantileMethod::Numeric)?, Method::FbMrc),
    };
    let eps = cfg.epsilon_th;
    let eval = |k: u64| fb_error(dist, cfg, k, spec).map(|e| e.epsilon_fb);

    let mut k = asymptotic.k_real.floor().max(1.0) as u64;
    let mut e = eval(k)?;
    if e > eps {
        while e > eps && k > 0 {
            k -= 1;
            e = eval(k)?;
        }
    } else {
        loop {
            let next = eval(k + 1)?;
            if next > eps {
                break;
            }
            k += 1;
            e = next;
        }
    }
    let n = cfg.blocklength;
    Ok(RateSolution {
        k_star: k,
        k_real: k as f64,
        blocklength: n,
        rate: k as f64 / f64::from(n),
        theta: crate::rate_control::threshold(k as f64, n),
        predicted_epsilon: e,
        method,
        feasible: k >= 1,
    })
}
