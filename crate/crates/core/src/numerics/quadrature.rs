//! Adaptive Gauss-Legendre quadrature, with geometric panelling toward a singular lower
//! endpoint and a reciprocal map for semi-infinite ranges.

use serde::{Deserialize, Serialize};

use super::gauss::panel_rule;
use crate::error::{domain_err, Error, Result};
use crate::function::RealFunction;
use crate::scalar::Scalar;

/// Tolerances and budgets shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Bisection budget of [`integrate_adaptive`]; also caps the number of geometric
    /// panels in [`integrate_log_singular`].
    pub max_subdivisions: usize,
    /// Panel ratio `r` for the geometric panels `[b r^{k+1}, b r^k]`.
    pub geometric_ratio: T,
}

impl<T: Scalar> Default for QuadratureConfig<T> {
    fn default() -> Self {
        // Clamp to the working precision so that f32 instantiations can still converge.
        let floor = T::epsilon() * T::lit(64.0);
        QuadratureConfig {
            rel_tol: T::lit(1e-10).max(floor),
            abs_tol: T::lit(1e-12).max(floor),
            max_subdivisions: 1000,
            geometric_ratio: T::lit(0.5),
        }
    }
}

impl<T: Scalar> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.abs_tol > T::zero()) {
            return Err(Error::Config("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        let r = self.geometric_ratio;
        if !(r > T::zero() && r < T::one()) {
            return Err(Error::Config(format!(
                "geometric_ratio must lie in (0,1), got {r}"
            )));
        }
        Ok(())
    }

    /// `max(abs_tol, rel_tol |value|)`.
    #[inline]
    pub fn target(&self, value: T) -> T {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    fn tightened(&self, rel: f64, abs: f64) -> Self {
        QuadratureConfig {
            rel_tol: self.rel_tol * T::lit(rel),
            abs_tol: self.abs_tol * T::lit(abs),
            ..*self
        }
    }
}

/// Outcome of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformResult<T> {
    pub value: T,
    pub error_estimate: T,
    pub converged: bool,
    /// Set when the geometric panel contributions stopped decaying, i.e. the integral
    /// looks divergent at the singular end.
    pub diverged: bool,
    pub subdivisions_used: usize,
}

impl<T: Scalar> TransformResult<T> {
    pub fn exact(value: T) -> Self {
        TransformResult {
            value,
            error_estimate: T::zero(),
            converged: true,
            diverged: false,
            subdivisions_used: 0,
        }
    }

    /// Sum of two partial integrals.
    pub fn combine(self, other: Self) -> Self {
        TransformResult {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
            converged: self.converged && other.converged,
            diverged: self.diverged || other.diverged,
            subdivisions_used: self.subdivisions_used + other.subdivisions_used,
        }
    }

    /// Multiplies value and error estimate by `c`.
    pub fn scaled(self, c: T) -> Self {
        TransformResult {
            value: self.value * c,
            error_estimate: self.error_estimate * c.abs(),
            ..self
        }
    }
}

fn eval_checked<T: Scalar, F: RealFunction<T> + ?Sized>(f: &F, x: T) -> Result<T> {
    let v = f.eval(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            x: x.to_f64().unwrap_or(f64::NAN),
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

struct Segment<T> {
    a: T,
    b: T,
    left: T,
    right: T,
    err: T,
    splittable: bool,
}

impl<T: Scalar> Segment<T> {
    fn build<F: RealFunction<T> + ?Sized>(f: &F, a: T, b: T, whole: T) -> Result<Self> {
        let rule = panel_rule();
        let m = (a + b) * T::lit(0.5);
        let left = rule.integrate(|x| eval_checked(f, x), a, m)?;
        let right = rule.integrate(|x| eval_checked(f, x), m, b)?;
        let splittable = m > a && m < b;
        Ok(Segment {
            a,
            b,
            left,
            right,
            err: (whole - (left + right)).abs(),
            splittable,
        })
    }

    fn value(&self) -> T {
        self.left + self.right
    }
}

/// `∫_a^b f` by bisection of the segment with the largest error estimate.
///
/// Each segment carries a 10-point Gauss-Legendre value on the whole and on both halves;
/// the half sum is the value and their difference is the error estimate.
pub fn integrate_adaptive<T, F>(
    f: &F,
    a: T,
    b: T,
    cfg: &QuadratureConfig<T>,
) -> Result<TransformResult<T>>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(domain_err!("integration limits must satisfy a < b, got [{a}, {b}]"));
    }
    let whole = panel_rule().integrate(|x| eval_checked(f, x), a, b)?;
    let mut segments = vec![Segment::build(f, a, b, whole)?];
    let mut bisections = 0usize;
    loop {
        let value: T = segments.iter().map(Segment::value).sum();
        let err: T = segments.iter().map(|s| s.err).sum();
        let done = err <= cfg.target(value);
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| s.splittable)
            .max_by(|x, y| x.1.err.partial_cmp(&y.1.err).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i);
        if done || bisections >= cfg.max_subdivisions || worst.is_none() {
            return Ok(TransformResult {
                value,
                error_estimate: err,
                converged: done,
                diverged: false,
                subdivisions_used: bisections,
            });
        }
        let s = segments.swap_remove(worst.unwrap());
        let m = (s.a + s.b) * T::lit(0.5);
        segments.push(Segment::build(f, s.a, m, s.left)?);
        segments.push(Segment::build(f, m, s.b, s.right)?);
        bisections += 1;
    }
}

/// Ratio above which a panel contribution counts as not decaying.
const DECAY_RATIO: f64 = 0.999;
/// Consecutive non-decaying panels that trigger the divergence flag.
const DIVERGENCE_RUN: usize = 10;
/// Panels before the divergence test applies. A convergent `y^β |ln y|^k` has panel
/// ratios `r^{1+β} ((j+1)/j)^k`, which exceed 1 for the first few dozen panels when `β`
/// is close to -1.
const DIVERGENCE_MIN_PANELS: usize = 40;
const MIN_PANELS: usize = 4;

/// `∫_0^b f` for integrands that may grow like `|ln y|` (or an integrable power) at 0.
///
/// The range is cut into geometric panels `[b r^{k+1}, b r^k]`, each integrated
/// adaptively. Panels are added until the geometric extrapolation of the remaining tail
/// is below a quarter of the tolerance; that tail estimate is added to the value and
/// counted in the error estimate.
pub fn integrate_log_singular<T, F>(f: &F, b: T, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    cfg.validate()?;
    if !(b > T::zero() && b.is_finite()) {
        return Err(domain_err!("upper limit must be positive and finite, got {b}"));
    }
    let r = cfg.geometric_ratio;
    let panel_cfg = cfg.tightened(0.1, 0.01);
    let decay = T::lit(DECAY_RATIO);

    let mut sum = T::zero();
    let mut err = T::zero();
    let mut subdivisions = 0usize;
    let mut panels_converged = true;
    let mut prev: Option<T> = None;
    let mut non_decaying = 0usize;
    let mut hi = b;

    for panel in 1..=cfg.max_subdivisions {
        let lo = hi * r;
        if lo < T::min_positive_value() {
            break;
        }
        let res = integrate_adaptive(f, lo, hi, &panel_cfg)?;
        sum += res.value;
        err += res.error_estimate;
        subdivisions += res.subdivisions_used + 1;
        panels_converged &= res.converged;
        let c = res.value;

        if let Some(p) = prev {
            let ratio = if p != T::zero() { c.abs() / p.abs() } else { T::zero() };
            if ratio < decay {
                non_decaying = 0;
            } else {
                non_decaying += 1;
                if non_decaying >= DIVERGENCE_RUN && panel >= DIVERGENCE_MIN_PANELS {
                    log::debug!("log-singular quadrature: {non_decaying} non-decaying panels near 0");
                    return Ok(TransformResult {
                        value: sum,
                        error_estimate: T::infinity(),
                        converged: false,
                        diverged: true,
                        subdivisions_used: subdivisions,
                    });
                }
            }
            if panel >= MIN_PANELS && non_decaying == 0 {
                let tail = c * ratio / (T::one() - ratio);
                if tail.abs() <= T::lit(0.25) * cfg.target(sum + tail) {
                    let value = sum + tail;
                    let error_estimate = err + tail.abs();
                    return Ok(TransformResult {
                        value,
                        error_estimate,
                        converged: panels_converged && error_estimate <= cfg.target(value),
                        diverged: false,
                        subdivisions_used: subdivisions,
                    });
                }
            }
        }
        prev = Some(c);
        hi = lo;
    }

    Ok(TransformResult {
        value: sum,
        error_estimate: err.max(prev.unwrap_or(T::zero()).abs()),
        converged: false,
        diverged: false,
        subdivisions_used: subdivisions,
    })
}

/// `∫_a^∞ f`. The range `[s, ∞)`, with `s = a` for `a > 0` and `s = 1` for `a = 0`, is
/// mapped to `(0, 1]` by `t = s/u` and handled by [`integrate_log_singular`]. For `a = 0`
/// the piece `[0, 1]` is itself treated as log-singular at 0.
pub fn integrate_to_infinity<T, F>(f: &F, a: T, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    cfg.validate()?;
    if !(a >= T::zero() && a.is_finite()) {
        return Err(domain_err!("lower limit must be non-negative and finite, got {a}"));
    }
    let split = if a == T::zero() { T::one() } else { a };
    let mapped = crate::function::Fallible(|u: T| -> Result<T> {
        let t = split / u;
        let v = f.eval(t)?;
        if v == T::zero() {
            return Ok(T::zero());
        }
        Ok(v * (split / (u * u)))
    });
    let tail = integrate_log_singular(&mapped, T::one(), cfg)?;
    if a == T::zero() {
        let head = integrate_log_singular(f, split, cfg)?;
        Ok(head.combine(tail))
    } else {
        Ok(tail)
    }
}
