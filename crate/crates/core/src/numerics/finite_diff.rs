//! Binomial finite-difference stencils with Richardson extrapolation.

use crate::error::{domain_err, Result};
use crate::function::RealFunction;
use crate::scalar::{binomial, Scalar};

fn stencil<T, F>(f: &F, x: T, order: usize, h: T, offset: T) -> Result<T>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    // Σ_j (-1)^j C(k, j) f(x + (offset - j) h) / h^k
    let mut acc = T::zero();
    for j in 0..=order {
        let w: T = binomial(order, j);
        let v = f.eval(x + (offset - T::from_usize_lossy(j)) * h)?;
        if j % 2 == 0 {
            acc += w * v;
        } else {
            acc -= w * v;
        }
    }
    Ok(acc / h.powi(order as i32))
}

/// Richardson table over step sizes `h, h/2, h/4, ...`; the error of the raw estimates
/// is assumed to expand in powers of `h^p`, `h^{2p}`, ... with `p = power_step`.
fn richardson<T: Scalar>(raw: &[T], power_step: i32) -> T {
    let mut table = raw.to_vec();
    let base = T::lit(2.0).powi(power_step);
    for level in 1..raw.len() {
        let factor = base.powi(level as i32);
        for i in (level..raw.len()).rev() {
            table[i] = table[i] + (table[i] - table[i - 1]) / (factor - T::one());
        }
    }
    *table.last().expect("at least one level")
}

fn check<T: Scalar>(order: usize, h: T, levels: usize) -> Result<()> {
    if order == 0 || levels == 0 || !(h > T::zero()) {
        return Err(domain_err!(
            "finite differences need order >= 1, levels >= 1 and h > 0"
        ));
    }
    Ok(())
}

/// Central `order`-th difference at `x`, extrapolated over `levels` halvings of `h`.
pub fn central_difference<T, F>(f: &F, x: T, order: usize, h: T, levels: usize) -> Result<T>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    check(order, h, levels)?;
    let offset = T::from_usize_lossy(order) * T::lit(0.5);
    let raw = (0..levels)
        .map(|l| stencil(f, x, order, h / T::lit(2.0).powi(l as i32), offset))
        .collect::<Result<Vec<T>>>()?;
    Ok(richardson(&raw, 2))
}

/// Backward (left-sided) `order`-th difference at `x`, using only points `<= x`.
pub fn backward_difference<T, F>(f: &F, x: T, order: usize, h: T, levels: usize) -> Result<T>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    check(order, h, levels)?;
    let raw = (0..levels)
        .map(|l| stencil(f, x, order, h / T::lit(2.0).powi(l as i32), T::zero()))
        .collect::<Result<Vec<T>>>()?;
    Ok(richardson(&raw, 1))
}
