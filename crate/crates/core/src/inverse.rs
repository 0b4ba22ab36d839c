//! The inverse conversion `q(t) = d^{n+1}/dt^{n+1} (t^{n+1} g'(t) / n!)`.
//!
//! The numeric path fits one local polynomial `p` to `g` in `s = (x - t)/h`. The product
//! `x^{n+1} p'(x)` is again a polynomial in `s`, so every further derivative is exact and
//! `q(t)` reduces to a fixed linear functional of the fit coefficients:
//!
//! `q(t) = Σ_{m=1}^{n+2} (n+1) m C(n+1, m-1) t^{m-1} h^{-m} a_m`.
//!
//! The same functional, pulled back through the fit, gives the weights on the raw samples
//! that drive the noise estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::funcspace::{closed_form_inverse, closed_form_transform, Interpolation, PowerLawMix, SampledFunction};
use crate::function::RealFunction;
use crate::kernel::KernelOrder;
use crate::numerics::{DiffConfig, GridSpacing, LocalFit, QuadratureConfig};
use crate::scalar::{binomial, factorial, falling_factorial, Scalar};
use crate::transform::{direct_transform_grid, integrability_check, IntegrabilityVerdict};

/// Derivative orders above this trigger a conditioning warning.
pub const WARN_DERIVATIVE_ORDER: usize = 8;

/// Rounding-limited noise above this fraction of `|q̂|` makes the inversion fail.
const CONDITIONING_LIMIT: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InverseMode {
    /// Closed form when `g` is a power-law mix, numeric otherwise.
    #[default]
    AnalyticIfPossible,
    NumericOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseConfig<T> {
    pub diff: DiffConfig<T>,
    pub mode: InverseMode,
}

impl<T: Scalar> InverseConfig<T> {
    /// Window of `2(n+4)+1` log-uniform points over `t ± 10%`, fit degree `n+7`.
    pub fn for_order(n: KernelOrder) -> Self {
        let n = n.get();
        InverseConfig {
            diff: DiffConfig {
                window_points: 2 * (n + 4) + 1,
                fit_degree: n + 7,
                grid_spacing_rule: GridSpacing::LogUniform,
                half_width: T::lit(0.1),
            },
            mode: InverseMode::AnalyticIfPossible,
        }
    }

    pub fn with_mode(mut self, mode: InverseMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self, n: KernelOrder) -> Result<()> {
        let need = n.get() + 3;
        if self.diff.fit_degree < need {
            return Err(Error::Config(format!(
                "fit degree {} is below n + 3 = {need}",
                self.diff.fit_degree
            )));
        }
        self.diff.validate(n.get() + 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseMethod {
    Analytic,
    Numeric,
}

/// One inverted value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseEstimate<T> {
    pub t: T,
    pub value: T,
    /// `‖w‖₂ σ`, with `w` the sample weights of the estimate and `σ` the larger of the fit
    /// residual and the rounding level of `g` on the window. Zero on the analytic path.
    pub noise_estimate: T,
    /// `‖w‖₁ max|g|`: the change in `q̂` caused by a unit relative perturbation of `g`.
    pub amplification: T,
    pub method: InverseMethod,
    pub warning: Option<String>,
}

fn check_t<T: Scalar>(t: T) -> Result<()> {
    if t > T::zero() && t.is_finite() {
        Ok(())
    } else {
        Err(domain_err!("t must be positive and finite, got {t}"))
    }
}

/// Coefficient functional for `d^{n+1}/dt^{n+1} (t^{n+1} p'(t)) / n!` at the fit center.
fn inverse_functional<T: Scalar>(n: usize, t: T, h: T, degree: usize) -> Vec<T> {
    let mut c = vec![T::zero(); degree + 1];
    let np1 = T::from_usize_lossy(n + 1);
    for m in 1..=(n + 2).min(degree) {
        let b: T = binomial(n + 1, m - 1);
        c[m] = np1 * T::from_usize_lossy(m) * b * t.powi(m as i32 - 1) / h.powi(m as i32);
    }
    c
}

/// Coefficient functional for `Q(t) = d^n/dt^n (t^{n+1} p'(t)) / n!` at the fit center.
fn cumulative_functional<T: Scalar>(n: usize, t: T, h: T, degree: usize) -> Vec<T> {
    let mut c = vec![T::zero(); degree + 1];
    for m in 1..=(n + 1).min(degree) {
        let b: T = binomial(n + 1, m);
        c[m] = T::from_usize_lossy(m) * b * (t / h).powi(m as i32);
    }
    c
}

/// Nodes and values of `g` for a fit centered at `t`.
fn window<T, G>(g: &G, t: T, cfg: &DiffConfig<T>) -> Result<(Vec<T>, Vec<T>)>
where
    T: Scalar,
    G: RealFunction<T> + ?Sized,
{
    if let Some(s) = g.as_sampled() {
        // Raw samples only: interpolated values would add spline error to the fit.
        let w = cfg.window_points;
        if s.len() < w {
            return Err(Error::Config(format!(
                "sampled g has {} points, the inversion window needs {w}",
                s.len()
            )));
        }
        if !(t >= s.min() && t <= s.max()) {
            return Err(Error::Range {
                t: t.to_f64().unwrap_or(f64::NAN),
                min: s.min().to_f64().unwrap_or(f64::NAN),
                max: s.max().to_f64().unwrap_or(f64::NAN),
            });
        }
        let start = s.nearest_index(t).saturating_sub(w / 2).min(s.len() - w);
        let range = start..start + w;
        return Ok((s.grid()[range.clone()].to_vec(), s.values()[range].to_vec()));
    }
    let nodes = cfg.nodes(t);
    let values = nodes.iter().map(|&x| g.eval(x)).collect::<Result<Vec<T>>>()?;
    Ok((nodes, values))
}

fn numeric_estimate<T: Scalar>(
    nodes: &[T],
    values: &[T],
    t: T,
    degree: usize,
    functional: impl Fn(T, T, usize) -> Vec<T>,
) -> Result<(T, T, T)> {
    let fit = LocalFit::new(nodes, t, degree)?;
    let coeffs = fit.coefficients(values);
    let c = functional(t, fit.scale(), degree);
    let value: T = c.iter().zip(&coeffs).map(|(&ci, &ai)| ci * ai).sum();
    let w = fit.functional_weights(&c);
    let w2 = w.iter().map(|&x| x * x).sum::<T>().sqrt();
    let w1: T = w.iter().map(|x| x.abs()).sum();
    let gmax = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let sigma = fit.residual_rms(values, &coeffs).max(T::epsilon() * gmax);
    Ok((value, w2 * sigma, w1 * gmax))
}

/// `q̂(t)` from `g`.
///
/// Power-law mixes go through the closed form unless the mode is `NumericOnly`. Sampled
/// functions are fitted on the `window_points` raw samples nearest `t`; other functions on
/// `cfg.diff.nodes(t)`. Fails with [`Error::IllConditioned`] when rounding of `g` alone
/// could move `q̂` by more than 1% of its value.
pub fn inverse_transform<T, G>(g: &G, t: T, n: KernelOrder, cfg: &InverseConfig<T>) -> Result<InverseEstimate<T>>
where
    T: Scalar,
    G: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    if cfg.mode == InverseMode::AnalyticIfPossible {
        if let Some(mix) = g.as_power_law() {
            let q = closed_form_inverse(mix, n)?;
            return Ok(InverseEstimate {
                t,
                value: q.evaluate(t)?,
                noise_estimate: T::zero(),
                amplification: T::zero(),
                method: InverseMethod::Analytic,
                warning: None,
            });
        }
    }
    cfg.validate(n)?;
    let order = n.get() + 2;
    let warning = (order > WARN_DERIVATIVE_ORDER).then(|| {
        let msg = format!("inversion needs {order} derivatives of g; expect strong noise amplification");
        log::warn!("{msg}");
        msg
    });
    let (nodes, values) = window(g, t, &cfg.diff)?;
    let (value, noise_estimate, amplification) =
        numeric_estimate(&nodes, &values, t, cfg.diff.fit_degree, |t, h, d| {
            inverse_functional(n.get(), t, h, d)
        })?;
    let rounding_floor = amplification * T::epsilon();
    if rounding_floor > T::lit(CONDITIONING_LIMIT) * value.abs().max(rounding_floor) {
        return Err(Error::IllConditioned(format!(
            "rounding of g alone moves q̂({t}) by up to {rounding_floor:e} against |q̂| = {:e}",
            value.abs()
        )));
    }
    Ok(InverseEstimate {
        t,
        value,
        noise_estimate,
        amplification,
        method: InverseMethod::Numeric,
        warning,
    })
}

/// [`inverse_transform`] on every point of `ts`, in parallel, results in input order.
pub fn inverse_transform_many<T, G>(
    g: &G,
    ts: &[T],
    n: KernelOrder,
    cfg: &InverseConfig<T>,
) -> Result<Vec<InverseEstimate<T>>>
where
    T: Scalar,
    G: RealFunction<T> + Sync + ?Sized,
{
    ts.par_iter().map(|&t| inverse_transform(g, t, n, cfg)).collect()
}

/// `Q(t) = (1/n!) d^n/dt^n (t^{n+1} g'(t))`, so that `q = Q'`. Same fit as
/// [`inverse_transform`] but one derivative fewer.
pub fn cumulative_q<T, G>(g: &G, t: T, n: KernelOrder, cfg: &InverseConfig<T>) -> Result<T>
where
    T: Scalar,
    G: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    if cfg.mode == InverseMode::AnalyticIfPossible {
        if let Some(mix) = g.as_power_law() {
            // Q is the antiderivative of the closed-form q vanishing at 0.
            let q = closed_form_inverse(mix, n)?;
            return q
                .terms()
                .iter()
                .map(|term| Ok(term.coefficient * t.powf(term.exponent + T::one()) / (term.exponent + T::one())))
                .sum();
        }
    }
    cfg.validate(n)?;
    let (nodes, values) = window(g, t, &cfg.diff)?;
    let (value, _, _) = numeric_estimate(&nodes, &values, t, cfg.diff.fit_degree, |t, h, d| {
        cumulative_functional(n.get(), t, h, d)
    })?;
    Ok(value)
}

/// `q̂(t)` through the factorization `q = Q'`, `Q = (1/n!) d^n/dt^n (t^{n+1} g'(t))`.
///
/// Uses the same local fit as [`inverse_transform`] but builds `t^{n+1} p'(t)` and `Q` as
/// explicit coefficient arrays instead of applying the closed-form functional, so the two
/// agree to rounding and each checks the other.
pub fn inverse_transform_factored<T, G>(g: &G, t: T, n: KernelOrder, cfg: &InverseConfig<T>) -> Result<T>
where
    T: Scalar,
    G: RealFunction<T> + ?Sized,
{
    check_t(t)?;
    cfg.validate(n)?;
    let n = n.get();
    let (nodes, values) = window(g, t, &cfg.diff)?;
    let fit = LocalFit::new(&nodes, t, cfg.diff.fit_degree)?;
    let a = fit.coefficients(&values);
    let h = fit.scale();

    // p'(x) in powers of s, then x^{n+1} = (t + h s)^{n+1}.
    let dp: Vec<T> = (1..a.len()).map(|k| T::from_usize_lossy(k) * a[k] / h).collect();
    let xpow: Vec<T> = (0..=n + 1)
        .map(|j| binomial::<T>(n + 1, j) * t.powi((n + 1 - j) as i32) * h.powi(j as i32))
        .collect();
    let mut prod = vec![T::zero(); dp.len() + xpow.len() - 1];
    for (i, &u) in xpow.iter().enumerate() {
        for (j, &v) in dp.iter().enumerate() {
            prod[i + j] += u * v;
        }
    }
    // Q(s) = h^{-n} d^n/ds^n prod / n!; only the linear coefficient of Q is needed.
    let q1 = prod
        .get(n + 1)
        .map_or(T::zero(), |&c| c * falling_factorial::<T>(n + 1, n) / (h.powi(n as i32) * factorial::<T>(n)));
    Ok(q1 / h)
}

/// Result of a forward-then-inverse round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport<T> {
    pub max_rel_err: T,
    /// Interior points used: `(t, q, q̂, noise_estimate)`.
    pub points: Vec<(T, T, T, T)>,
}

/// Transforms `q` on `grid`, inverts the result at the interior grid points and reports the
/// largest relative deviation from `q`.
///
/// In `AnalyticIfPossible` mode a power-law `q` is carried through both closed forms.
/// Otherwise `g` is sampled by quadrature on `grid` and inverted from the raw samples; the
/// `window_points / 2` points nearest each end are skipped so every window is centered.
pub fn roundtrip_residual<T, Q>(
    q: &Q,
    grid: &[T],
    n: KernelOrder,
    quad: &QuadratureConfig<T>,
    cfg: &InverseConfig<T>,
) -> Result<RoundtripReport<T>>
where
    T: Scalar,
    Q: RealFunction<T> + Sync + ?Sized,
{
    let last = *grid.last().ok_or_else(|| domain_err!("empty grid"))?;
    let report = integrability_check(q, last, quad)?;
    if report.verdict != IntegrabilityVerdict::Finite {
        return Err(Error::Divergent(format!("q fails the integrability check at t = {last}")));
    }

    let tiny = T::min_positive_value();
    let collect = |pts: Vec<(T, T, T, T)>| {
        let max_rel_err = pts
            .iter()
            .map(|&(_, q, qh, _)| if q == qh { T::zero() } else { (qh - q).abs() / q.abs().max(tiny) })
            .fold(T::zero(), T::max);
        RoundtripReport { max_rel_err, points: pts }
    };

    if cfg.mode == InverseMode::AnalyticIfPossible {
        if let Some(mix) = q.as_power_law() {
            let g: PowerLawMix<T> = closed_form_transform(mix, n)?;
            let pts = grid
                .iter()
                .map(|&t| {
                    let est = inverse_transform(&g, t, n, cfg)?;
                    Ok((t, mix.evaluate(t)?, est.value, est.noise_estimate))
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(collect(pts));
        }
    }

    let numeric = cfg.with_mode(InverseMode::NumericOnly);
    let g: SampledFunction<T> = direct_transform_grid(q, grid, n, quad)?.to_sampled(Interpolation::Cubic)?;
    let margin = cfg.diff.window_points / 2;
    if g.len() <= 2 * margin {
        return Err(Error::Config(format!(
            "{} samples leave no interior points for a {}-point window",
            g.len(),
            cfg.diff.window_points
        )));
    }
    let interior = &g.grid()[margin..g.len() - margin];
    let pts = interior
        .par_iter()
        .map(|&t| {
            let est = inverse_transform(&g, t, n, &numeric)?;
            Ok((t, q.eval(t)?, est.value, est.noise_estimate))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(collect(pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::Fallible;
    use crate::grid::log_grid;
    use crate::numerics::finite_diff::central_difference;

    fn ord(n: usize) -> KernelOrder {
        KernelOrder::new(n).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn analytic_examples() {
        let g = PowerLawMix::monomial(0.25, 1.0).unwrap();
        let cfg = InverseConfig::for_order(ord(3));
        let e = inverse_transform(&g, 1.7, ord(3), &cfg).unwrap();
        assert_eq!(e.method, InverseMethod::Analytic);
        assert!(rel(e.value, 1.0) < 1e-14);
        let g = PowerLawMix::monomial(1.0 / 24.0, 2.0).unwrap();
        let e = inverse_transform(&g, 2.0, ord(2), &InverseConfig::for_order(ord(2))).unwrap();
        assert!(rel(e.value, 2.0) < 1e-14);
        let e = inverse_transform(&PowerLawMix::zero(), 2.0, ord(2), &InverseConfig::for_order(ord(2))).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn numeric_examples_on_function_handles() {
        let cfg = InverseConfig::for_order(ord(3));
        let e = inverse_transform(&|t: f64| t / 4.0, 1.7, ord(3), &cfg).unwrap();
        assert_eq!(e.method, InverseMethod::Numeric);
        assert!(rel(e.value, 1.0) < 1e-6, "{e:?}");
        assert!((e.value - 1.0).abs() <= 10.0 * e.noise_estimate);
        let cfg = InverseConfig::for_order(ord(2));
        let e = inverse_transform(&|t: f64| t * t / 24.0, 2.0, ord(2), &cfg).unwrap();
        assert!(rel(e.value, 2.0) < 1e-6, "{e:?}");
        let e = inverse_transform(&|_t: f64| 0.0, 2.0, ord(2), &cfg).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(inverse_transform(&|t: f64| t, 0.0, ord(2), &cfg).is_err());
    }

    #[test]
    fn numeric_mode_ignores_the_closed_form() {
        let g = PowerLawMix::monomial(0.25, 1.0).unwrap();
        let cfg = InverseConfig::for_order(ord(3)).with_mode(InverseMode::NumericOnly);
        let e = inverse_transform(&g, 1.7, ord(3), &cfg).unwrap();
        assert_eq!(e.method, InverseMethod::Numeric);
        assert!(rel(e.value, 1.0) < 1e-6);
    }

    #[test]
    fn config_validation() {
        let mut cfg = InverseConfig::<f64>::for_order(ord(3));
        cfg.diff.fit_degree = 5;
        assert!(matches!(cfg.validate(ord(3)), Err(Error::Config(_))));
        cfg.diff.fit_degree = 6;
        assert!(cfg.validate(ord(3)).is_ok());
    }

    #[test]
    fn high_order_warns() {
        let n = ord(7);
        let mut cfg = InverseConfig::for_order(n);
        cfg.diff.half_width = 0.4;
        let e = inverse_transform(&|t: f64| t.powf(1.5), 1.0, n, &cfg).unwrap();
        assert!(e.warning.is_some());
    }

    #[test]
    fn rough_g_is_ill_conditioned() {
        // Order-14 differentiation of g with a tiny window.
        let n = ord(12);
        let mut cfg = InverseConfig::for_order(n).with_mode(InverseMode::NumericOnly);
        cfg.diff.half_width = 1e-3;
        let e = inverse_transform(&|t: f64| t.powf(2.5), 1.0, n, &cfg).unwrap_err();
        assert!(matches!(e, Error::IllConditioned(_)), "{e:?}");
    }

    #[test]
    fn sampled_windows_stay_inside_the_grid() {
        let grid = log_grid(0.1, 10.0, 60).unwrap();
        let g = SampledFunction::from_function(&|t: f64| t * t / 24.0, grid, Interpolation::Cubic).unwrap();
        let cfg = InverseConfig::for_order(ord(2));
        for t in [0.1, 0.1001, 3.3, 10.0] {
            let e = inverse_transform(&g, t, ord(2), &cfg).unwrap();
            assert!(rel(e.value, t) < 1e-6, "t={t}: {e:?}");
        }
        assert!(matches!(inverse_transform(&g, 11.0, ord(2), &cfg), Err(Error::Range { .. })));
    }

    #[test]
    fn roundtrip_examples() {
        let grid = log_grid(0.1, 10.0, 200).unwrap();
        let quad = QuadratureConfig::default();
        let n = ord(2);
        let cfg = InverseConfig::for_order(n);
        let r = roundtrip_residual(&|_t: f64| 1.0, &grid, n, &quad, &cfg).unwrap();
        assert!(r.max_rel_err <= 1e-4, "{}", r.max_rel_err);
        let r = roundtrip_residual(&|_t: f64| 0.0, &grid, n, &quad, &cfg).unwrap();
        assert_eq!(r.max_rel_err, 0.0);
        let q = PowerLawMix::from_pairs(&[(1.0, 0.0), (0.5, 1.5)]).unwrap();
        let r = roundtrip_residual(&q, &grid, ord(3), &quad, &InverseConfig::for_order(ord(3))).unwrap();
        assert!(r.max_rel_err <= 1e-10);
    }

    #[test]
    fn roundtrip_rejects_nonintegrable_q() {
        let grid = log_grid(0.1, 10.0, 50).unwrap();
        let n = ord(1);
        let e = roundtrip_residual(&|t: f64| 1.0 / t, &grid, n, &QuadratureConfig::default(), &InverseConfig::for_order(n))
            .unwrap_err();
        assert!(matches!(e, Error::Divergent(_)));
    }

    #[test]
    fn factorization_routes_agree() {
        let mixes = [
            PowerLawMix::from_pairs(&[(1.0, 0.0)]).unwrap(),
            PowerLawMix::from_pairs(&[(2.0, -0.5), (0.3, 2.0)]).unwrap(),
        ];
        for mix in &mixes {
            for n in 1..=4 {
                let g = closed_form_transform(mix, ord(n)).unwrap();
                let g_fn = |t: f64| g.evaluate(t).unwrap();
                let cfg = InverseConfig::for_order(ord(n));
                for t in [0.5, 2.0] {
                    let direct = inverse_transform(&g_fn, t, ord(n), &cfg).unwrap().value;
                    let factored = inverse_transform_factored(&g_fn, t, ord(n), &cfg).unwrap();
                    assert!(rel(factored, direct) < 1e-10, "n={n} t={t}: {factored} vs {direct}");

                    // Q from separate fits, differentiated once more: agreement is limited by
                    // the truncation error of each fit.
                    let big_q = Fallible(|s: f64| cumulative_q(&g_fn, s, ord(n), &cfg));
                    let split = central_difference(&big_q, t, 1, 0.05 * t, 3).unwrap();
                    assert!(rel(split, direct) < 1e-4, "n={n} t={t}: {split} vs {direct}");

                    let qa = cumulative_q(&g, t, ord(n), &cfg).unwrap();
                    let qn = cumulative_q(&g_fn, t, ord(n), &cfg).unwrap();
                    assert!(rel(qn, qa) < 1e-6, "n={n} t={t}: {qn} vs {qa}");
                }
            }
        }
    }
}
