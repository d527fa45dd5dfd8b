//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite
//! intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum bisection depth of a finite-interval subdivision.
pub const MAX_DEPTH: u32 = 30;
/// Maximum number of doubling panels on a semi-infinite interval.
pub const MAX_PANELS: usize = 400;
/// Consecutive non-decreasing panels taken as evidence of divergence.
pub const DIVERGENCE_RUN: usize = 8;
const MAX_INTERVALS: usize = 20_000;

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// Convergence target: stop once the error estimate is below
/// `max(rel · |value|, abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }

    fn target(&self, value: f64) -> f64 {
        (self.rel * value.abs()).max(self.abs)
    }

    fn check(&self) -> Result<()> {
        if self.rel > 0.0 && self.abs >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid tolerance {self:?}")))
        }
    }
}

/// How the integrand decays beyond the last panel, used for the tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDecay {
    /// Roughly like exp(−t²/2) times a polynomial.
    Gaussian,
    /// Roughly like t^(−q) with q > 1.
    Power(f64),
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    roundoff: f64,
    depth: u32,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kron += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * half;
    if !value.is_finite() {
        return Err(Error::NonConvergence(format!("non-finite integrand on [{a}, {b}]")));
    }
    Ok(Segment {
        a,
        b,
        value,
        error: ((kron - gauss) * half).abs(),
        roundoff: 50.0 * f64::EPSILON * abs_sum * half.abs(),
        depth,
    })
}

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    integrate_tol(f, a, b, Tolerance::relative(rel_tol))
}

/// Integrates `f` over `[a, b]` to the given tolerance.
pub fn integrate_tol<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadratureResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite limits required, got [{a}, {b}]")));
    }
    tol.check()?;
    if a == b {
        return Ok(QuadratureResult { value: 0.0, abs_error: 0.0, evaluations: 0 });
    }
    let mut evaluations = 15;
    let mut segments = vec![kronrod(&f, a, b, 0)?];
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error.max(s.roundoff)).sum();
        let target = tol.target(value);
        // Segments whose error is already at the roundoff level cannot improve.
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.error > s.roundoff)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst.filter(|_| error > target) else {
            return Ok(QuadratureResult { value, abs_error: error, evaluations });
        };
        let seg = segments.swap_remove(i);
        if seg.depth >= MAX_DEPTH || segments.len() >= MAX_INTERVALS {
            return Err(Error::NonConvergence(format!(
                "error {error:e} above target {target:e} at subdivision limit near [{}, {}]",
                seg.a, seg.b
            )));
        }
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(kronrod(&f, seg.a, mid, seg.depth + 1)?);
        segments.push(kronrod(&f, mid, seg.b, seg.depth + 1)?);
        evaluations += 30;
    }
}

/// Integrates `f` over `[a, ∞)` by summing panels of doubling width until a
/// panel is negligible, then adds an estimate of the remaining tail.
///
/// Reports [`Error::Divergence`] when [`DIVERGENCE_RUN`] consecutive panels
/// fail to shrink.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rel_tol: f64,
    decay: TailDecay,
) -> Result<QuadratureResult> {
    integrate_to_infinity_tol(f, a, Tolerance::relative(rel_tol), decay)
}

/// [`integrate_to_infinity`] with an explicit tolerance.
pub fn integrate_to_infinity_tol<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    tol: Tolerance,
    decay: TailDecay,
) -> Result<QuadratureResult> {
    tol.check()?;
    if !a.is_finite() {
        return Err(Error::Domain(format!("finite lower limit required, got {a}")));
    }
    let mut width = if a > 0.0 { a } else { a.abs().max(1.0) };
    let mut lo = a;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    let mut previous = f64::INFINITY;
    let mut non_decreasing = 0;
    for panel in 0..MAX_PANELS {
        let hi = lo + width;
        let r = integrate_tol(&f, lo, hi, tol)?;
        value += r.value;
        error += r.abs_error;
        evaluations += r.evaluations;
        let size = r.value.abs();
        if size >= previous && size > 0.0 {
            non_decreasing += 1;
            if non_decreasing >= DIVERGENCE_RUN {
                return Err(Error::Divergence(format!(
                    "panel contributions stopped shrinking by t = {hi:e}"
                )));
            }
        } else {
            non_decreasing = 0;
        }
        previous = size;
        lo = hi;
        width *= 2.0;
        if panel == 0 {
            continue;
        }
        let f_end = f(lo).abs();
        evaluations += 1;
        let tail = match decay {
            TailDecay::Gaussian => 2.0 * f_end / lo,
            TailDecay::Power(q) if q > 1.0 => f_end * lo / (q - 1.0),
            TailDecay::Power(q) => {
                return Err(Error::Divergence(format!("tail exponent {q} ≤ 1")));
            }
        };
        let target = tol.target(value);
        if size <= target && tail <= target {
            if let TailDecay::Power(_) = decay {
                value += tail;
            }
            error += tail;
            return Ok(QuadratureResult { value, abs_error: error, evaluations });
        }
    }
    Err(Error::NonConvergence(format!(
        "tail of the integral still significant after {MAX_PANELS} panels"
    )))
}
