//! Deterministic topology and the per-antenna SIR law it induces.
//!
//! With unit-mean Rayleigh fading on every link, the SIR at one antenna
//! has the exact product-form CDF
//!
//! ```text
//! F(γ) = 1 - Π_j 1 / (1 + γ c_j),    c_j = ℓ_0 ℓ_j
//! ```
//!
//! where `ℓ_0` is the reciprocal gain of the serving link and `ℓ_j` the
//! gain of interferer `j`. The arithmetic/geometric mean inequality bounds
//! it from above by a scaled Lomax CDF with parameters `η` (interferer
//! count) and `β = Σ c_j`, which becomes tight in the left tail.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Serving distance, interferer distances and path-loss exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub r0: f64,
    pub interferer_distances: Vec<f64>,
    pub alpha: f64,
}

impl Topology {
    pub fn new(r0: f64, interferer_distances: Vec<f64>, alpha: f64) -> Result<Self> {
        let t = Self {
            r0,
            interferer_distances,
            alpha,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(Error::InvalidTopology(format!("serving distance must be positive, got {}", self.r0)));
        }
        if self.interferer_distances.is_empty() {
            return Err(Error::InvalidTopology("at least one interferer is required".into()));
        }
        if let Some(r) = self.interferer_distances.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(Error::InvalidTopology(format!("interferer distance must be positive, got {r}")));
        }
        if !(self.alpha > 2.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidTopology(format!("path-loss exponent must exceed 2, got {}", self.alpha)));
        }
        Ok(())
    }

    pub fn eta(&self) -> usize {
        self.interferer_distances.len()
    }

    /// `c_j = r_0^α r_j^-α` for every interferer.
    pub fn interference_ratios(&self) -> Vec<f64> {
        self.interferer_distances
            .iter()
            .map(|r| (self.r0 / r).powf(self.alpha))
            .collect()
    }

    pub fn beta(&self) -> f64 {
        beta(self)
    }

    pub fn sir_distribution(&self) -> Result<SirDistribution> {
        SirDistribution::from_topology(self)
    }
}

/// `β = r_0^α Σ_j r_j^-α`.
pub fn beta(topology: &Topology) -> f64 {
    topology.interference_ratios().iter().sum()
}

/// Generalized `β = ℓ_0 Σ_j ℓ_j` from raw path-loss values.
///
/// `l0` is the reciprocal gain of the serving link (`r_0^α` for the
/// power-law model) and `lj` the interferer gains (`r_j^-α`).
pub fn beta_from_path_losses(l0: f64, lj: &[f64]) -> Result<f64> {
    PathLosses::new(l0, lj.to_vec()).map(|p| p.beta())
}

/// Raw path-loss description of a link, independent of any geometric model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLosses {
    pub l0: f64,
    pub lj: Vec<f64>,
}

impl PathLosses {
    pub fn new(l0: f64, lj: Vec<f64>) -> Result<Self> {
        let p = Self { l0, lj };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l0 > 0.0) || !self.l0.is_finite() {
            return Err(Error::InvalidTopology(format!("l0 must be positive, got {}", self.l0)));
        }
        if self.lj.is_empty() {
            return Err(Error::InvalidTopology("at least one interferer path loss is required".into()));
        }
        if let Some(l) = self.lj.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidTopology(format!("path loss must be positive, got {l}")));
        }
        Ok(())
    }

    pub fn interference_ratios(&self) -> Vec<f64> {
        self.lj.iter().map(|l| self.l0 * l).collect()
    }

    pub fn beta(&self) -> f64 {
        self.interference_ratios().iter().sum()
    }
}

/// Conditional per-antenna SIR law.
///
/// Always carries the Lomax parameters `(η, β)`. When it was built from a
/// topology or path-loss profile it also keeps the per-interferer ratios
/// `c_j` needed by the exact product-form CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SirDistribution {
    pub eta: u32,
    pub beta: f64,
    ratios: Option<Vec<f64>>,
}

impl SirDistribution {
    /// Lomax-only description from `(η, β)`; exact evaluations are unavailable.
    pub fn from_params(eta: u32, beta: f64) -> Result<Self> {
        if eta == 0 {
            return Err(Error::InvalidTopology("eta must be a positive integer".into()));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidTopology(format!("beta must be positive, got {beta}")));
        }
        Ok(Self {
            eta,
            beta,
            ratios: None,
        })
    }

    pub fn from_topology(topology: &Topology) -> Result<Self> {
        topology.validate()?;
        Self::from_ratios(topology.interference_ratios())
    }

    pub fn from_path_losses(path_losses: &PathLosses) -> Result<Self> {
        path_losses.validate()?;
        Self::from_ratios(path_losses.interference_ratios())
    }

    /// Exact description from the ratios `c_j = ℓ_0 ℓ_j` directly.
    pub fn from_ratios(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() || ratios.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidTopology(format!("interference ratios must be positive: {ratios:?}")));
        }
        let eta = u32::try_from(ratios.len()).map_err(|_| Error::InvalidTopology("too many interferers".into()))?;
        Ok(Self {
            eta,
            beta: ratios.iter().sum(),
            ratios: Some(ratios),
        })
    }

    pub fn ratios(&self) -> Option<&[f64]> {
        self.ratios.as_deref()
    }

    pub fn has_exact(&self) -> bool {
        self.ratios.is_some()
    }

    /// Same `η`, new `β`; the exact profile no longer applies and is dropped.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::from_params(self.eta, beta)
    }

    pub fn cdf_exact(&self, gamma: f64) -> Result<f64> {
        self.ratios
            .as_deref()
            .map(|c| cdf_exact_from_ratios(gamma, c))
            .ok_or(Error::MissingTopology)
    }

    pub fn pdf_exact(&self, gamma: f64) -> Result<f64> {
        self.ratios
            .as_deref()
            .map(|c| pdf_exact_from_ratios(gamma, c))
            .ok_or(Error::MissingTopology)
    }

    pub fn cdf_approx(&self, gamma: f64) -> f64 {
        sir_cdf_approx(gamma, self)
    }

    pub fn pdf_approx(&self, gamma: f64) -> f64 {
        sir_pdf_approx(gamma, self)
    }
}

/// Exact `P(SIR < γ)` for the given topology.
pub fn sir_cdf_exact(gamma: f64, topology: &Topology) -> f64 {
    cdf_exact_from_ratios(gamma, &topology.interference_ratios())
}

/// `1 - exp(-Σ log1p(γ c_j))`, exact to full relative precision near zero.
pub fn cdf_exact_from_ratios(gamma: f64, ratios: &[f64]) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let log_product: f64 = ratios.iter().map(|c| (gamma * c).ln_1p()).sum();
    -(-log_product).exp_m1()
}

/// Derivative of the exact CDF: `Π_j (1 + γ c_j)^-1 · Σ_j c_j / (1 + γ c_j)`.
pub fn pdf_exact_from_ratios(gamma: f64, ratios: &[f64]) -> f64 {
    let gamma = gamma.max(0.0);
    let log_product: f64 = ratios.iter().map(|c| (gamma * c).ln_1p()).sum();
    let hazard: f64 = ratios.iter().map(|c| c / (1.0 + gamma * c)).sum();
    (-log_product).exp() * hazard
}

/// Scaled-Lomax upper bound `1 - (1 + γβ/η)^-η`.
pub fn sir_cdf_approx(gamma: f64, dist: &SirDistribution) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let eta = f64::from(dist.eta);
    -(-eta * (gamma * dist.beta / eta).ln_1p()).exp_m1()
}

/// Scaled-Lomax density `β (1 + γβ/η)^(-η-1)`.
pub fn sir_pdf_approx(gamma: f64, dist: &SirDistribution) -> f64 {
    let eta = f64::from(dist.eta);
    let gamma = gamma.max(0.0);
    dist.beta * (-(eta + 1.0) * (gamma * dist.beta / eta).ln_1p()).exp()
}

/// Lomax `L(p, q)` CDF `1 - (1 + (q/p) y)^-p`.
pub fn lomax_cdf(y: f64, p: f64, q: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    -(-p * (q / p * y).ln_1p()).exp_m1()
}

/// Lomax `L(p, q)` density `q (1 + (q/p) y)^(-1-p)`.
pub fn lomax_pdf(y: f64, p: f64, q: f64) -> f64 {
    q * (-(1.0 + p) * (q / p * y.max(0.0)).ln_1p()).exp()
}

/// Topology description as stored on disk.
///
/// Either geometric (`r0`, `alpha`, `interferers`) or generalized
/// (`path_losses: {l0, lj}`); exactly one of `interferers` and
/// `path_losses` must be present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interferers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path_losses: Option<PathLosses>,
}

impl TopologyFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text)?;
        file.sir_distribution()?;
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn sir_distribution(&self) -> Result<SirDistribution> {
        match (&self.interferers, &self.path_losses) {
            (Some(distances), None) => {
                let r0 = self.r0.ok_or_else(|| Error::InvalidTopology("`r0` is required with `interferers`".into()))?;
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::InvalidTopology("`alpha` is required with `interferers`".into()))?;
                SirDistribution::from_topology(&Topology::new(r0, distances.clone(), alpha)?)
            }
            (None, Some(pl)) => SirDistribution::from_path_losses(pl),
            _ => Err(Error::InvalidTopology(
                "exactly one of `interferers` and `path_losses` must be present".into(),
            )),
        }
    }
}

impl From<&Topology> for TopologyFile {
    fn from(t: &Topology) -> Self {
        Self {
            r0: Some(t.r0),
            alpha: Some(t.alpha),
            interferers: Some(t.interferer_distances.clone()),
            path_losses: None,
        }
    }
}

/// Reference topologies used by the figure presets.
pub mod setups {
    use super::Topology;

    pub const ALPHA: f64 = 3.5;

    /// `r_0 = 20`, `r_j = 10 + 20 j`, `j = 1..=10`.
    pub fn fig2() -> Topology {
        Topology::new(20.0, (1..=10).map(|j| 10.0 + 20.0 * f64::from(j)).collect(), ALPHA).unwrap()
    }

    /// `r_0 = 30`, `r_j = 30 + 10 j`, `j = 1..=20`.
    pub fn a() -> Topology {
        Topology::new(30.0, (1..=20).map(|j| 30.0 + 10.0 * f64::from(j)).collect(), ALPHA).unwrap()
    }

    /// Same geometry as [`fig2`].
    pub fn b() -> Topology {
        fig2()
    }

    /// `r_0 = 10`, `r_j = 20 + 20 j`, `j = 1..=4`.
    pub fn c() -> Topology {
        Topology::new(10.0, (1..=4).map(|j| 20.0 + 20.0 * f64::from(j)).collect(), ALPHA).unwrap()
    }
}
