use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Tolerances and subdivision budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-30,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Domain(format!("invalid quadrature spec {self:?}")));
        }
        Ok(())
    }

    fn accepts(&self, value: f64, error: f64) -> bool {
        error <= self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// How a piece maps its integration variable back onto `x`.
#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `x = origin + t / (1 - t)` for `t` in `[0, 1)`.
    Tail { origin: f64 },
}

impl Map {
    #[inline]
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        match *self {
            Map::Identity => f(t),
            Map::Tail { origin } => {
                let u = 1.0 - t;
                f(origin + t / u) / (u * u)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, map: Map, a: f64, b: f64) -> Result<Piece> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = map.eval(f, center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = map.eval(f, center - dx) + map.eval(f, center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Domain(format!("integrand is not finite on [{a}, {b}]")));
    }
    Ok(Piece {
        a,
        b,
        map,
        value,
        error,
    })
}

fn adapt<F: Fn(f64) -> f64>(f: &F, initial: Vec<(f64, f64, Map)>, spec: &QuadratureSpec) -> Result<QuadResult> {
    spec.validate()?;
    let mut heap = BinaryHeap::with_capacity(spec.max_subdivisions + initial.len());
    for (a, b, map) in initial {
        heap.push(kronrod(f, map, a, b)?);
    }
    let mut subdivisions = 0usize;
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if spec.accepts(value, error) {
            return Ok(QuadResult {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                value,
                error,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap holds at least one piece");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            return Err(Error::NonConvergence {
                value,
                error,
                subdivisions,
            });
        }
        heap.push(kronrod(f, worst.map, worst.a, mid)?);
        heap.push(kronrod(f, worst.map, mid, worst.b)?);
        subdivisions += 1;
    }
}

/// Adaptive Gauss-Kronrod integral of `f` over a finite `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<QuadResult> {
    if !(a < b) || !b.is_finite() || !a.is_finite() {
        return Err(Error::Domain(format!("finite interval requires a < b, got [{a}, {b}]")));
    }
    adapt(&f, vec![(a, b, Map::Identity)], spec)
}

/// `∫_0^∞ f(x) dx` through the map `x = t / (1 - t)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<QuadResult> {
    integrate_with_breakpoints(f, &[0.0], spec)
}

/// `∫_{p_0}^∞ f(x) dx` split at the ascending `points`.
///
/// Consecutive points bound finite pieces; the last point starts the
/// mapped semi-infinite tail. All pieces share one error budget, so the
/// refinement goes wherever the error is largest.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<QuadResult> {
    let (&last, _) = points
        .split_last()
        .ok_or_else(|| Error::Domain("at least one breakpoint is required".into()))?;
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Domain(format!("breakpoints must be finite and strictly ascending: {points:?}")));
    }
    let mut pieces: Vec<(f64, f64, Map)> = points.windows(2).map(|w| (w[0], w[1], Map::Identity)).collect();
    pieces.push((0.0, 1.0, Map::Tail { origin: last }));
    adapt(&f, pieces, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_exponential_mass() {
        let r = integrate_semi_infinite(|x| (-x).exp(), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.abs_error <= 1e-10);
    }

    #[test]
    fn lomax_density_normalizes() {
        let eta = 10.0;
        let r = integrate_semi_infinite(|x: f64| eta * (1.0 + x).powf(-eta - 1.0), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn finite_polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 12.0).abs() < 1e-12);
    }

    #[test]
    fn breakpoints_localize_a_sharp_step() {
        // smoothed step at x = 5 with width 1e-3
        let f = |x: f64| crate::numerics::q_function((x - 5.0) / 1e-3) * (-x).exp();
        let spec = QuadratureSpec::default();
        let split = integrate_with_breakpoints(f, &[0.0, 4.99, 5.0, 5.01], &spec).unwrap();
        let expected = 1.0 - (-5.0f64).exp();
        assert!((split.value - expected).abs() < 1e-8, "{}", split.value);
    }

    #[test]
    fn reports_non_convergence() {
        let spec = QuadratureSpec::new(1e-14, 1e-300, 3).unwrap();
        let err = integrate_semi_infinite(|x: f64| 1.0 / (1.0 + x).powf(1.01), &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-10, 10).is_err());
        assert!(QuadratureSpec::new(1e-8, 1e-10, 0).is_err());
        assert!(integrate_with_breakpoints(|x| x, &[1.0, 0.5], &QuadratureSpec::default()).is_err());
    }
}
