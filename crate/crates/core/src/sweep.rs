//! Parameter sweeps and the named figure presets.
//!
//! A [`SweepSpec`] varies one field of a fixed link configuration and
//! evaluates every requested allocation method at each value. Rows come back
//! in axis order, then method order, whatever the number of workers.

use crate::error::{Error, Result};
use crate::finite_blocklength::fb_kstar;
use crate::rate_control::{
    lomax_sum_cdf, lomax_sum_cdf_lower_bound, mrc_kstar, sc_kstar_approx, sc_kstar_exact, LinkConfig, Method,
    QuantileMethod, RateSolution, Scheme,
};
use crate::sir_model::{setups, SirDistribution, Topology};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

/// Runs one allocation method. The scheme of `cfg` is replaced by the one the method implies.
pub fn allocate(method: Method, dist: &SirDistribution, cfg: &LinkConfig) -> Result<RateSolution> {
    let cfg = LinkConfig {
        scheme: method.scheme(),
        ..*cfg
    };
    match method {
        Method::ScExact => sc_kstar_exact(dist, &cfg),
        Method::ScApprox => sc_kstar_approx(dist, &cfg),
        Method::MrcApproxNumeric => mrc_kstar(dist, &cfg, QuantileMethod::Numeric),
        Method::MrcApproxClosed => mrc_kstar(dist, &cfg, QuantileMethod::Closed),
        Method::FbSc | Method::FbMrc => fb_kstar(dist, &cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    EpsilonTh,
    Beta,
    M,
    N,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::EpsilonTh => "epsilon_th",
            Axis::Beta => "beta",
            Axis::M => "M",
            Axis::N => "n",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "epsilon_th" | "eps" | "epsilon" => Axis::EpsilonTh,
            "beta" => Axis::Beta,
            "m" | "antennas" => Axis::M,
            "n" | "blocklength" => Axis::N,
            other => return Err(Error::InvalidConfig(format!("unknown sweep axis `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub fixed: LinkConfig,
    pub dist: SirDistribution,
    pub methods: Vec<Method>,
}

/// One evaluated (axis value, method) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub antennas: u32,
    pub blocklength: u32,
    pub epsilon_th: f64,
    pub beta: f64,
    pub eta: u32,
    pub solution: RateSolution,
}

fn positive_integer(axis: Axis, v: f64) -> Result<u32> {
    if v >= 1.0 && v.fract() == 0.0 && v <= f64::from(u32::MAX) {
        Ok(v as u32)
    } else {
        Err(Error::InvalidConfig(format!("{axis} values must be positive integers, got {v}")))
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one value".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one method".into()));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig("sweep values must be strictly increasing".into()));
        }
        for &v in &self.values {
            self.point(v)?;
        }
        if self.axis == Axis::Beta && self.methods.contains(&Method::ScExact) {
            return Err(Error::MissingTopology);
        }
        Ok(())
    }

    /// Configuration and distribution at one axis value.
    pub fn point(&self, value: f64) -> Result<(LinkConfig, SirDistribution)> {
        let mut cfg = self.fixed;
        let mut dist = self.dist.clone();
        match self.axis {
            Axis::EpsilonTh => cfg.epsilon_th = value,
            Axis::Beta => dist = dist.with_beta(value)?,
            Axis::M => cfg.antennas = positive_integer(self.axis, value)?,
            Axis::N => cfg.blocklength = positive_integer(self.axis, value)?,
        }
        cfg.validate()?;
        Ok((cfg, dist))
    }

    /// Evaluates every (value, method) pair on `workers` threads.
    pub fn run(&self, workers: usize) -> Result<Vec<SweepRow>> {
        self.validate()?;
        let jobs: Vec<(f64, Method)> = self
            .values
            .iter()
            .flat_map(|&v| self.methods.iter().map(move |&m| (v, m)))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| {
            jobs.par_iter()
                .map(|&(value, method)| {
                    let (cfg, dist) = self.point(value)?;
                    let solution = allocate(method, &dist, &cfg)?;
                    Ok(SweepRow {
                        axis: self.axis,
                        axis_value: value,
                        antennas: cfg.antennas,
                        blocklength: cfg.blocklength,
                        epsilon_th: cfg.epsilon_th,
                        beta: dist.beta,
                        eta: dist.eta,
                        solution,
                    })
                })
                .collect()
        })
    }
}

pub const RATE_COLUMNS: [&str; 15] = [
    "axis",
    "axis_value",
    "M",
    "n",
    "epsilon_th",
    "beta",
    "eta",
    "scheme",
    "method",
    "k_star",
    "k_real",
    "rate",
    "theta",
    "predicted_epsilon",
    "feasible",
];

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let s = &self.solution;
        vec![
            self.axis.to_string(),
            self.axis_value.to_string(),
            self.antennas.to_string(),
            self.blocklength.to_string(),
            self.epsilon_th.to_string(),
            self.beta.to_string(),
            self.eta.to_string(),
            s.method.scheme().to_string(),
            s.method.to_string(),
            s.k_star.to_string(),
            s.k_real.to_string(),
            s.rate.to_string(),
            s.theta.to_string(),
            s.predicted_epsilon.to_string(),
            s.feasible.to_string(),
        ]
    }
}

/// A CSV document: `#` comment lines, a header row and records.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_rows(comments: Vec<String>, rows: &[SweepRow]) -> Self {
        Self {
            comments,
            columns: RATE_COLUMNS.iter().map(|c| c.to_string()).collect(),
            rows: rows.iter().map(SweepRow::record).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for c in &self.comments {
            writeln!(out, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Index of a named column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig2pp,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig2, Preset::Fig2pp, Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6];

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig2pp => "fig2pp",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    fn description(&self) -> &'static str {
        match self {
            Preset::Fig2 => "k* vs epsilon_th; n=200, eta=10, M in {1,2,4,8}, SC and MRC; r0=20, r_j=10+20j, alpha=3.5",
            Preset::Fig2pp => "per-antenna SIR CDF/PDF, exact vs approximate; setups A, B, C with alpha=3.5",
            Preset::Fig3 => "left tail of the Lomax-sum CDF and its linearized lower bound",
            Preset::Fig4 => "k* vs beta; n=200, eta=8, epsilon_th in {1e-2,1e-6}, M in {1,2,4}, SC and MRC",
            Preset::Fig5 => "k* vs M; n=400, eta=8, beta=0.8, epsilon_th in {1e-3,1e-6,1e-9}, SC and MRC",
            Preset::Fig6 => "k*/n vs n; SC, eta=8, beta=0.8, epsilon_th in {1e-3,1e-6}",
        }
    }

    /// The rate sweeps behind this preset; empty for the distribution-curve presets.
    pub fn sweeps(&self) -> Vec<SweepSpec> {
        let spec = |axis, values: &Vec<f64>, m, n, eps, dist: &SirDistribution, methods: &[Method]| SweepSpec {
            axis,
            values: values.clone(),
            fixed: LinkConfig {
                antennas: m,
                blocklength: n,
                epsilon_th: eps,
                scheme: Scheme::Sc,
            },
            dist: dist.clone(),
            methods: methods.to_vec(),
        };
        let lomax = |eta, beta| SirDistribution::from_params(eta, beta).expect("preset parameters are valid");
        let asymptotic_and_fb = [Method::ScApprox, Method::FbSc, Method::MrcApproxNumeric, Method::FbMrc];
        match self {
            Preset::Fig2 => {
                let dist = setups::fig2().sir_distribution().expect("fig2 topology is valid");
                let eps = log_space(1e-9, 1e-1, 33);
                let methods = [
                    Method::ScExact,
                    Method::ScApprox,
                    Method::FbSc,
                    Method::MrcApproxNumeric,
                    Method::MrcApproxClosed,
                    Method::FbMrc,
                ];
                [1, 2, 4, 8]
                    .iter()
                    .map(|&m| spec(Axis::EpsilonTh, &eps, m, 200, 1e-3, &dist, &methods))
                    .collect()
            }
            Preset::Fig4 => {
                let betas = log_space(0.05, 5.0, 41);
                let dist = lomax(8, 1.0);
                let mut out = Vec::new();
                for eps in [1e-2, 1e-6] {
                    for m in [1, 2, 4] {
                        out.push(spec(Axis::Beta, &betas, m, 200, eps, &dist, &asymptotic_and_fb));
                    }
                }
                out
            }
            Preset::Fig5 => {
                let ms: Vec<f64> = (1..=16).map(f64::from).collect();
                let dist = lomax(8, 0.8);
                [1e-3, 1e-6, 1e-9]
                    .iter()
                    .map(|&eps| spec(Axis::M, &ms, 1, 400, eps, &dist, &asymptotic_and_fb))
                    .collect()
            }
            Preset::Fig6 => {
                let ns: Vec<f64> = (1..=20).map(|i| f64::from(100 * i)).collect();
                let dist = lomax(8, 0.8);
                let mut out = Vec::new();
                for eps in [1e-3, 1e-6] {
                    for m in [2, 4, 8] {
                        out.push(spec(Axis::N, &ns, m, 100, eps, &dist, &[Method::ScApprox, Method::FbSc]));
                    }
                }
                out
            }
            Preset::Fig2pp | Preset::Fig3 => Vec::new(),
        }
    }

    pub fn run(&self, workers: usize) -> Result<Table> {
        let mut comments = vec![format!("preset: {}", self.as_str()), self.description().to_string()];
        match self {
            Preset::Fig2pp => return fig2pp_table(comments),
            Preset::Fig3 => return Ok(fig3_table(comments)),
            _ => {}
        }
        let mut rows = Vec::new();
        for s in self.sweeps() {
            rows.extend(s.run(workers)?);
        }
        comments.push(format!("rows: {}", rows.len()));
        Ok(Table::from_rows(comments, &rows))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{s}`")))
    }
}

/// `count` points from `lo` to `hi`, evenly spaced in log scale; endpoints are exact.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.log10(), hi.log10());
    let step = (b - a) / (count - 1) as f64;
    let mut v: Vec<f64> = (0..count).map(|i| 10f64.powf(a + step * i as f64)).collect();
    v[0] = lo;
    v[count - 1] = hi;
    v
}

fn fig2pp_table(comments: Vec<String>) -> Result<Table> {
    let setups: [(&str, Topology); 3] = [("A", setups::a()), ("B", setups::b()), ("C", setups::c())];
    let mut rows = Vec::new();
    for (name, topology) in setups {
        let dist = topology.sir_distribution()?;
        for gamma in log_space(1e-3, 1e3, 121) {
            rows.push(vec![
                name.to_string(),
                gamma.to_string(),
                dist.cdf_exact(gamma)?.to_string(),
                dist.cdf_approx(gamma).to_string(),
                dist.pdf_exact(gamma)?.to_string(),
                dist.pdf_approx(gamma).to_string(),
            ]);
        }
    }
    Ok(Table {
        comments,
        columns: ["setup", "gamma", "cdf_exact", "cdf_approx", "pdf_exact", "pdf_approx"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
        rows,
    })
}

pub const FIG3_ANTENNAS: [u32; 5] = [1, 2, 4, 8, 10];
pub const FIG3_ETAS: [u32; 5] = [2, 4, 8, 12, 20];

fn fig3_table(comments: Vec<String>) -> Table {
    let xs = log_space(1e-4, 5.0, 200);
    let mut rows = Vec::new();
    for m in FIG3_ANTENNAS {
        for eta in FIG3_ETAS {
            for &x in &xs {
                rows.push(vec![
                    m.to_string(),
                    eta.to_string(),
                    x.to_string(),
                    lomax_sum_cdf(x, m, eta).to_string(),
                    lomax_sum_cdf_lower_bound(x, m, eta, true).to_string(),
                    lomax_sum_cdf_lower_bound(x, m, eta, false).to_string(),
                ]);
            }
        }
    }
    Table {
        comments,
        columns: ["M", "eta", "x", "cdf_approx", "lower_bound_linearized", "lower_bound"]
            .iter()
            .map(|c| c.to_string())
            .collect(),
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(axis: Axis, values: Vec<f64>, methods: Vec<Method>) -> SweepSpec {
        SweepSpec {
            axis,
            values,
            fixed: LinkConfig::new(2, 200, 7e-5, Scheme::Sc).unwrap(),
            dist: setups::fig2().sir_distribution().unwrap(),
            methods,
        }
    }

    #[test]
    fn single_value_sweep_matches_direct_allocation() {
        let dist = setups::fig2().sir_distribution().unwrap();
        let cfg = LinkConfig::new(2, 200, 7e-5, Scheme::Sc).unwrap();
        let methods = vec![Method::ScExact, Method::ScApprox, Method::MrcApproxNumeric, Method::FbSc];
        let rows = base(Axis::EpsilonTh, vec![7e-5], methods.clone()).run(1).unwrap();
        assert_eq!(rows.len(), methods.len());
        for (row, m) in rows.iter().zip(methods) {
            assert_eq!(row.solution, allocate(m, &dist, &cfg).unwrap());
        }
    }

    #[test]
    fn rows_ordered_and_worker_independent() {
        let spec = base(Axis::M, (1..=6).map(f64::from).collect(), vec![Method::ScApprox, Method::FbMrc]);
        let one = spec.run(1).unwrap();
        let four = spec.run(4).unwrap();
        assert_eq!(one, four);
        let order: Vec<(f64, Method)> = one.iter().map(|r| (r.axis_value, r.solution.method)).collect();
        assert_eq!(order[0], (1.0, Method::ScApprox));
        assert_eq!(order[1], (1.0, Method::FbMrc));
        assert_eq!(order[11], (6.0, Method::FbMrc));
        assert!(one.iter().all(|r| r.antennas as f64 == r.axis_value));
    }

    #[test]
    fn axis_overrides_fixed_field() {
        let spec = base(Axis::Beta, vec![0.1, 1.0], vec![Method::ScApprox]);
        let rows = spec.run(1).unwrap();
        assert_eq!(rows[1].beta, 1.0);
        assert!(rows[0].solution.k_star > rows[1].solution.k_star);
        let spec = base(Axis::N, vec![100.0, 400.0], vec![Method::ScApprox]);
        let rows = spec.run(1).unwrap();
        assert_eq!(rows[1].blocklength, 400);
    }

    #[test]
    fn invalid_sweeps() {
        let bad = [
            base(Axis::M, vec![], vec![Method::ScApprox]),
            base(Axis::M, vec![1.0], vec![]),
            base(Axis::M, vec![2.0, 1.0], vec![Method::ScApprox]),
            base(Axis::M, vec![1.5], vec![Method::ScApprox]),
            base(Axis::N, vec![0.0], vec![Method::ScApprox]),
            base(Axis::EpsilonTh, vec![1e-3, 1.0], vec![Method::ScApprox]),
            base(Axis::Beta, vec![-1.0], vec![Method::ScApprox]),
        ];
        for s in bad {
            assert!(s.run(1).is_err(), "{s:?}");
        }
        assert_eq!(base(Axis::Beta, vec![1.0], vec![Method::ScExact]).run(1), Err(Error::MissingTopology));
    }

    #[test]
    fn csv_layout() {
        let rows = base(Axis::EpsilonTh, vec![1e-3], vec![Method::ScApprox]).run(1).unwrap();
        let text = Table::from_rows(vec!["preset: test".into()], &rows).to_csv_string().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# preset: test");
        assert_eq!(lines[1], RATE_COLUMNS.join(","));
        assert!(lines[2].starts_with("epsilon_th,0.001,2,200,0.001,0.30610241824737"));
        assert!(lines[2].contains(",sc,sc_approx,"));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-9, 1e-1, 33);
        assert_eq!(v.len(), 33);
        assert_eq!(v[0], 1e-9);
        assert_eq!(v[32], 1e-1);
        assert!((v[4] - 1e-8).abs() < 1e-20);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.as_str().parse::<Preset>().unwrap(), p);
        }
        assert!("fig7".parse::<Preset>().is_err());
    }

    #[test]
    fn curve_presets_have_expected_shape() {
        let t = Preset::Fig3.run(1).unwrap();
        assert_eq!(t.rows.len(), 25 * 200);
        let t = Preset::Fig2pp.run(1).unwrap();
        assert_eq!(t.rows.len(), 3 * 121);
        assert!(t.comments[0].contains("fig2pp"));
    }

    #[test]
    fn fig5_preset_parameters() {
        let sweeps = Preset::Fig5.sweeps();
        assert_eq!(sweeps.len(), 3);
        for s in &sweeps {
            assert_eq!((s.fixed.blocklength, s.dist.eta, s.dist.beta), (400, 8, 0.8));
            assert_eq!(s.values.first(), Some(&1.0));
        }
        let eps: Vec<f64> = sweeps.iter().map(|s| s.fixed.epsilon_th).collect();
        assert_eq!(eps, vec![1e-3, 1e-6, 1e-9]);
    }
}
