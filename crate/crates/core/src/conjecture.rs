//! Numerical checks of the conjectured implication
//!
//! `∫_0^t A_{n-1}(y/t) q(y) dy <= t^α` for all `t > 0`
//! `  ⟹  ∫_0^∞ q(t) ln(1 + t^{-2α}) dt <= π α ∏_{k=1}^{n-1} (1 + α/k)`
//!
//! for non-negative `q`. The premise uses the kernel of order `n - 1`; [`ConjectureParams`]
//! stores `n` and every routine here lowers it internally.
//!
//! "For all `t`" is replaced by a finite grid, so a `Consistent` verdict is evidence, not
//! proof.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::funcspace::io::format_float;
use crate::funcspace::{transform_constant, PowerLawMix};
use crate::function::{Fallible, RealFunction};
use crate::kernel::KernelOrder;
use crate::numerics::{integrate_to_infinity, QuadratureConfig, TransformResult};
use crate::scalar::Scalar;
use crate::transform::direct_transform;

/// `α > 0` and `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjectureParams<T> {
    pub alpha: T,
    pub n: KernelOrder,
}

impl<T: Scalar> ConjectureParams<T> {
    pub fn new(alpha: T, n: usize) -> Result<Self> {
        if !(alpha > T::zero() && alpha.is_finite()) {
            return Err(domain_err!("alpha must be positive and finite, got {alpha}"));
        }
        if n == 0 {
            return Err(domain_err!("n must be at least 1"));
        }
        Ok(ConjectureParams {
            alpha,
            n: KernelOrder::new(n)?,
        })
    }

    /// Kernel order of the premise, `n - 1`.
    pub fn premise_order(&self) -> KernelOrder {
        self.n.pred().expect("n >= 1 by construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig<T> {
    pub quad: QuadratureConfig<T>,
    /// Premise holds at `t` when `(t^α - lhs) / t^α >= -tol_premise`.
    pub tol_premise: T,
    /// The bound counts as exceeded when `ratio > 1 + tol_ratio`.
    pub tol_ratio: T,
}

impl<T: Scalar> Default for CheckConfig<T> {
    fn default() -> Self {
        CheckConfig {
            quad: QuadratureConfig::default(),
            tol_premise: T::lit(1e-9).max(T::epsilon() * T::lit(64.0)),
            tol_ratio: T::lit(1e-3),
        }
    }
}

impl<T: Scalar> CheckConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.quad.validate()?;
        if !(self.tol_premise > T::zero() && self.tol_ratio > T::zero()) {
            return Err(Error::Config("check tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// `∫_0^t A_{n-1}(y/t) q(y) dy`.
pub fn premise_lhs<T, Q>(q: &Q, t: T, p: &ConjectureParams<T>, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    direct_transform(q, t, p.premise_order(), cfg)
}

/// `ln(1 + t^{-2α})` without overflow for tiny `t`.
fn log_weight<T: Scalar>(t: T, alpha: T) -> T {
    let l = -(alpha + alpha) * t.ln();
    if l > T::zero() {
        l + (-l).exp().ln_1p()
    } else {
        l.exp().ln_1p()
    }
}

/// `∫_0^∞ q(t) ln(1 + t^{-2α}) dt`.
pub fn conclusion_lhs<T, Q>(q: &Q, alpha: T, cfg: &QuadratureConfig<T>) -> Result<TransformResult<T>>
where
    T: Scalar,
    Q: RealFunction<T> + ?Sized,
{
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(domain_err!("alpha must be positive and finite, got {alpha}"));
    }
    let integrand = Fallible(|t: T| -> Result<T> {
        let v = q.eval(t)?;
        if v == T::zero() {
            return Ok(v);
        }
        Ok(v * log_weight(t, alpha))
    });
    integrate_to_infinity(&integrand, T::zero(), cfg)
}

/// `π α ∏_{k=1}^{n-1} (1 + α/k)`.
pub fn conclusion_rhs<T: Scalar>(p: &ConjectureParams<T>) -> T {
    (1..p.n.get()).fold(T::PI() * p.alpha, |acc, k| {
        acc * (T::one() + p.alpha / T::from_usize_lossy(k))
    })
}

/// `t^{α-1} / C(n-1, α-1)`, the power law that turns the premise into an equality.
pub fn extremal_q<T: Scalar>(p: &ConjectureParams<T>) -> Result<PowerLawMix<T>> {
    let beta = p.alpha - T::one();
    let c = transform_constant(p.premise_order(), beta)?;
    PowerLawMix::monomial(T::one() / c.value, beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    PremiseViolated,
    BoundExceeded,
    /// Some quadrature did not converge or looked divergent.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::PremiseViolated => "premise-violated",
            Verdict::BoundExceeded => "bound-exceeded",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PremiseMargin<T> {
    pub t: T,
    pub lhs: T,
    pub t_alpha: T,
    /// `t^α - lhs`.
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport<T> {
    pub alpha: T,
    pub n: usize,
    pub premise_margins: Vec<PremiseMargin<T>>,
    pub premise_ok: bool,
    pub conclusion_value: TransformResult<T>,
    pub bound: T,
    pub ratio: T,
    pub verdict: Verdict,
    /// Some quadrature flagged divergence at its singular end.
    pub diverged: bool,
}

/// Premise on every grid point, conclusion integral against the bound.
///
/// The verdict is `Inconclusive` if any quadrature failed to converge, otherwise
/// `PremiseViolated`, `BoundExceeded` or `Consistent`, in that order of precedence.
pub fn check<T, Q>(q: &Q, p: &ConjectureParams<T>, t_grid: &[T], cfg: &CheckConfig<T>) -> Result<ConjectureReport<T>>
where
    T: Scalar,
    Q: RealFunction<T> + Sync + ?Sized,
{
    cfg.validate()?;
    if t_grid.is_empty() {
        return Err(domain_err!("premise grid is empty"));
    }
    let premise: Vec<(PremiseMargin<T>, TransformResult<T>)> = t_grid
        .par_iter()
        .map(|&t| {
            let lhs = premise_lhs(q, t, p, &cfg.quad)?;
            let t_alpha = t.powf(p.alpha);
            Ok((
                PremiseMargin {
                    t,
                    lhs: lhs.value,
                    t_alpha,
                    margin: t_alpha - lhs.value,
                },
                lhs,
            ))
        })
        .collect::<Result<_>>()?;
    let premise_converged = premise.iter().all(|(_, r)| r.converged);
    let premise_diverged = premise.iter().any(|(_, r)| r.diverged);
    let premise_margins: Vec<PremiseMargin<T>> = premise.into_iter().map(|(m, _)| m).collect();
    let premise_ok = premise_margins
        .iter()
        .all(|m| m.margin >= -cfg.tol_premise * m.t_alpha);

    let conclusion_value = conclusion_lhs(q, p.alpha, &cfg.quad)?;
    let bound = conclusion_rhs(p);
    let ratio = conclusion_value.value / bound;

    let verdict = if !premise_converged || !conclusion_value.converged {
        Verdict::Inconclusive
    } else if !premise_ok {
        Verdict::PremiseViolated
    } else if ratio > T::one() + cfg.tol_ratio {
        Verdict::BoundExceeded
    } else {
        Verdict::Consistent
    };
    Ok(ConjectureReport {
        alpha: p.alpha,
        n: p.n.get(),
        premise_margins,
        premise_ok,
        conclusion_value,
        bound,
        ratio,
        verdict,
        diverged: premise_diverged || conclusion_value.diverged,
    })
}

/// Generator of test functions for a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "kebab-case",
    bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub enum Family<T> {
    /// `scale * extremal_q(α, n)` for each scale.
    Extremal {
        #[serde(default = "unit_scale")]
        scales: Vec<T>,
    },
    /// Fixed mixes, checked against every `(α, n)`.
    Mixes { members: Vec<PowerLawMix<T>> },
}

fn unit_scale<T: Scalar>() -> Vec<T> {
    vec![T::one()]
}

impl<T: Scalar> Default for Family<T> {
    fn default() -> Self {
        Family::Extremal { scales: unit_scale() }
    }
}

impl<T: Scalar> Family<T> {
    pub fn len(&self) -> usize {
        match self {
            Family::Extremal { scales } => scales.len(),
            Family::Mixes { members } => members.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn member_id(&self, index: usize) -> String {
        match self {
            Family::Extremal { scales } => format!("extremal-x{}", scales[index]),
            Family::Mixes { .. } => format!("mix-{index}"),
        }
    }

    pub fn member(&self, index: usize, p: &ConjectureParams<T>) -> Result<PowerLawMix<T>> {
        match self {
            Family::Extremal { scales } => Ok(extremal_q(p)?.scaled(scales[index])),
            Family::Mixes { members } => Ok(members[index].clone()),
        }
    }
}

/// One sweep cell. `report` is `None` when the cell failed; `error` then says why.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell<T> {
    pub alpha: T,
    pub n: usize,
    pub member: usize,
    pub family_id: String,
    pub report: Option<ConjectureReport<T>>,
    pub error: Option<String>,
}

impl<T: Scalar> SweepCell<T> {
    pub fn verdict(&self) -> Verdict {
        self.report.as_ref().map_or(Verdict::Inconclusive, |r| r.verdict)
    }

    pub fn ratio(&self) -> T {
        self.report.as_ref().map_or(T::nan(), |r| r.ratio)
    }

    pub fn premise_ok(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.premise_ok)
    }
}

/// [`check`] over every `(α, n, member)`; cells run in parallel and come back ordered by
/// `α`, then `n`, then member index, each in the order given.
pub fn sweep<T: Scalar>(
    alphas: &[T],
    ns: &[usize],
    family: &Family<T>,
    t_grid: &[T],
    cfg: &CheckConfig<T>,
) -> Vec<SweepCell<T>> {
    let cells: Vec<(T, usize, usize)> = alphas
        .iter()
        .flat_map(|&a| ns.iter().flat_map(move |&n| (0..family.len()).map(move |m| (a, n, m))))
        .collect();
    cells
        .into_par_iter()
        .map(|(alpha, n, member)| {
            let outcome = ConjectureParams::new(alpha, n).and_then(|p| {
                let q = family.member(member, &p)?;
                check(&q, &p, t_grid, cfg)
            });
            if let Err(e) = &outcome {
                log::warn!("sweep cell alpha={alpha} n={n} member={member} failed: {e}");
            }
            let (report, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepCell {
                alpha,
                n,
                member,
                family_id: family.member_id(member),
                report,
                error,
            }
        })
        .collect()
}

/// Input of a sweep run: parameter lists, test family, premise grid and tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub ns: Vec<usize>,
    #[serde(default)]
    pub family: Family<f64>,
    #[serde(default = "default_premise_grid")]
    pub grid: crate::grid::GridSpec,
    #[serde(default)]
    pub tolerances: SweepTolerances,
}

/// Optional overrides of the [`CheckConfig`] defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTolerances {
    pub rel: Option<f64>,
    pub abs: Option<f64>,
    pub premise: Option<f64>,
    pub ratio: Option<f64>,
}

/// 200 log-uniform points on `[1e-2, 1e2]`.
pub fn default_premise_grid() -> crate::grid::GridSpec {
    crate::grid::GridSpec::log(1e-2, 1e2, 200)
}

impl SweepTolerances {
    pub fn apply(&self, mut cfg: CheckConfig<f64>) -> CheckConfig<f64> {
        if let Some(v) = self.rel {
            cfg.quad.rel_tol = v;
        }
        if let Some(v) = self.abs {
            cfg.quad.abs_tol = v;
        }
        if let Some(v) = self.premise {
            cfg.tol_premise = v;
        }
        if let Some(v) = self.ratio {
            cfg.tol_ratio = v;
        }
        cfg
    }
}

impl SweepConfig {
    pub fn check_config(&self) -> Result<CheckConfig<f64>> {
        let cfg = self.tolerances.apply(CheckConfig::default());
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn run(&self) -> Result<Vec<SweepCell<f64>>> {
        let cfg = self.check_config()?;
        let grid = self.grid.points::<f64>()?;
        Ok(sweep(&self.alphas, &self.ns, &self.family, &grid, &cfg))
    }
}

/// CSV summary with columns `alpha, n, family_id, premise_ok, ratio, verdict`.
pub fn sweep_summary_csv<T: Scalar>(cells: &[SweepCell<T>]) -> String {
    let mut out = String::from("alpha,n,family_id,premise_ok,ratio,verdict\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            format_float(c.alpha),
            c.n,
            c.family_id,
            c.premise_ok(),
            format_float(c.ratio()),
            c.verdict().as_str()
        ));
    }
    out
}
