//! The kernel `A_n(x) = ∫_x^1 (1-y)^n dy / y` on `(0, 1]`.
//!
//! Two evaluation paths are used. Away from `x = 1` the finite closed form
//! `-ln x - Σ_{m=1..n} (1-x)^m / m` is cheap and accurate. Close to `x = 1` that form
//! subtracts nearly equal numbers, so the tail series `Σ_{m>n} (1-x)^m / m` is summed
//! instead; its terms are all positive and the result keeps full relative accuracy down
//! to the zero at `x = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};
use crate::scalar::Scalar;

/// Order `n` of the kernel `A_n`. Supported range is `0..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct KernelOrder(u8);

impl KernelOrder {
    pub const MAX: usize = 12;

    pub fn new(n: usize) -> Result<Self> {
        if n > Self::MAX {
            return Err(domain_err!(
                "kernel order {n} exceeds the supported maximum {}",
                Self::MAX
            ));
        }
        Ok(KernelOrder(n as u8))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0 as usize
    }

    /// `n - 1`, used by the premise inequality. `None` for `n = 0`.
    pub fn pred(self) -> Option<Self> {
        self.0.checked_sub(1).map(KernelOrder)
    }
}

impl TryFrom<usize> for KernelOrder {
    type Error = crate::Error;
    fn try_from(n: usize) -> Result<Self> {
        KernelOrder::new(n)
    }
}

impl From<KernelOrder> for usize {
    fn from(n: KernelOrder) -> usize {
        n.get()
    }
}

/// Selects between the closed-form and tail-series evaluation paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvalConfig<T> {
    /// The tail series is used when `1 - x < series_switch_threshold`.
    pub series_switch_threshold: T,
    /// Series truncation stops once the remainder bound `(1-x)^{M+1} / ((M+1) x)` falls
    /// below `series_tolerance` times the partial sum.
    pub series_tolerance: T,
}

impl<T: Scalar> Default for KernelEvalConfig<T> {
    fn default() -> Self {
        KernelEvalConfig {
            series_switch_threshold: T::lit(0.9),
            series_tolerance: T::epsilon(),
        }
    }
}

impl<T: Scalar> KernelEvalConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let th = self.series_switch_threshold;
        if !(th > T::zero() && th < T::one()) {
            return Err(crate::Error::Config(format!(
                "series_switch_threshold must lie in (0,1), got {th}"
            )));
        }
        if !(self.series_tolerance > T::zero()) {
            return Err(crate::Error::Config(format!(
                "series_tolerance must be positive, got {}",
                self.series_tolerance
            )));
        }
        Ok(())
    }

    /// Forces the closed form on all of `(0, 1)`.
    pub fn closed_form_only() -> Self {
        KernelEvalConfig {
            series_switch_threshold: T::min_positive_value(),
            ..Self::default()
        }
    }
}

fn check_unit_interval<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(domain_err!("kernel argument must lie in (0, 1], got {x}"))
    }
}

/// `A_n(x)` with the default evaluation config.
pub fn kernel_value<T: Scalar>(n: KernelOrder, x: T) -> Result<T> {
    kernel_value_with(n, x, &KernelEvalConfig::default())
}

pub fn kernel_value_with<T: Scalar>(n: KernelOrder, x: T, cfg: &KernelEvalConfig<T>) -> Result<T> {
    check_unit_interval(x)?;
    if x == T::one() {
        return Ok(T::zero());
    }
    let u = T::one() - x;
    if u < cfg.series_switch_threshold {
        Ok(tail_series(n.get(), x, u, cfg.series_tolerance))
    } else {
        Ok(closed_form(n.get(), x, u))
    }
}

fn closed_form<T: Scalar>(n: usize, x: T, u: T) -> T {
    let mut pow = T::one();
    let mut partial = T::zero();
    for m in 1..=n {
        pow *= u;
        partial += pow / T::from_usize_lossy(m);
    }
    -x.ln() - partial
}

/// Kahan-compensated sum of `Σ_{m>n} u^m / m`.
fn tail_series<T: Scalar>(n: usize, x: T, u: T, tol: T) -> T {
    let mut pow = u.powi(n as i32 + 1);
    let mut m = n + 1;
    let mut sum = T::zero();
    let mut comp = T::zero();
    loop {
        let term = pow / T::from_usize_lossy(m) - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;

        pow *= u;
        let bound = pow / (T::from_usize_lossy(m + 1) * x);
        if bound <= tol * sum || pow == T::zero() {
            break;
        }
        m += 1;
    }
    sum
}

/// `dA_n/dx = -(1-x)^n / x`.
pub fn kernel_derivative<T: Scalar>(n: KernelOrder, x: T) -> Result<T> {
    check_unit_interval(x)?;
    Ok(-(T::one() - x).powi(n.get() as i32) / x)
}

/// Partial derivatives of `A_n(y/t)` with respect to `y` and `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPartials<T> {
    pub d_dy: T,
    pub d_dt: T,
}

/// `(-(t-y)^n / (t^n y), (t-y)^n / t^{n+1})` for `0 < y <= t`.
pub fn kernel_partials<T: Scalar>(n: KernelOrder, y: T, t: T) -> Result<KernelPartials<T>> {
    if !(y > T::zero() && t > T::zero() && y <= t) {
        return Err(domain_err!(
            "kernel partials need 0 < y <= t, got y = {y}, t = {t}"
        ));
    }
    let w = ((t - y) / t).powi(n.get() as i32);
    Ok(KernelPartials {
        d_dy: -w / y,
        d_dt: w / t,
    })
}

/// `d^k A_n / dx^k` at `x = 1`, which vanishes for every `k <= n`.
pub fn kernel_derivative_at_one<T: Scalar>(n: KernelOrder, k: usize) -> Result<T> {
    if k > n.get() {
        return Err(domain_err!(
            "derivative order {k} exceeds kernel order {} at x = 1",
            n.get()
        ));
    }
    Ok(T::zero())
}
