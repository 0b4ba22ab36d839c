//! Gamma and Beta functions on the positive real axis (Lanczos, g = 7, 9 terms), and the
//! rising factorial used for integer-offset Gamma ratios.

use crate::error::{domain_err, Result};
use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero() && x.is_finite()) {
        return Err(domain_err!("ln_gamma needs a positive finite argument, got {x}"));
    }
    if x < T::lit(0.5) {
        // Γ(x) = Γ(x + 1) / x keeps the series argument in its accurate range.
        return Ok(ln_gamma(x + T::one())? - x.ln());
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += T::lit(c) / (z + T::from_usize_lossy(i));
    }
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = T::lit(0.918_938_533_204_672_8);
    Ok(half_ln_two_pi + (z + T::lit(0.5)) * t.ln() - t + acc.ln())
}

/// `Γ(x)` for `x > 0`.
pub fn gamma<T: Scalar>(x: T) -> Result<T> {
    Ok(ln_gamma(x)?.exp())
}

/// `B(a, b) = Γ(a) Γ(b) / Γ(a + b)` for `a, b > 0`.
pub fn beta<T: Scalar>(a: T, b: T) -> Result<T> {
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// Rising factorial `x (x+1) ... (x+k-1)`, i.e. `Γ(x+k)/Γ(x)`.
pub fn rising_factorial<T: Scalar>(x: T, k: usize) -> T {
    (0..k).fold(T::one(), |acc, j| acc * (x + T::from_usize_lossy(j)))
}

/// `B(a, m+1) = m! / (a (a+1) ... (a+m))` for a non-negative integer `m`.
pub fn beta_integer<T: Scalar>(a: T, m: usize) -> T {
    crate::scalar::factorial::<T>(m) / rising_factorial(a, m + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_at_integers_and_half() {
        let mut fact = 1.0;
        for k in 1..=20usize {
            assert!(rel(gamma(k as f64).unwrap(), fact) < 1e-13, "Γ({k})");
            fact *= k as f64;
        }
        assert!(rel(gamma(0.5_f64).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
        assert!(rel(gamma(1.5_f64).unwrap(), 0.5 * std::f64::consts::PI.sqrt()) < 1e-14);
        // Γ(0.1) = 9.513507698668731836...
        assert!(rel(gamma(0.1_f64).unwrap(), 9.513_507_698_668_732) < 1e-13);
    }

    #[test]
    fn beta_values() {
        assert!(rel(beta(0.5_f64, 2.0).unwrap(), 4.0 / 3.0) < 1e-13);
        assert!(rel(beta(0.5_f64, 3.0).unwrap(), 16.0 / 15.0) < 1e-13);
        assert!(rel(beta(2.0_f64, 3.0).unwrap(), 1.0 / 12.0) < 1e-13);
    }

    #[test]
    fn integer_beta_matches_lanczos() {
        for &a in &[0.1, 0.5, 1.0, 2.3, 6.0] {
            for m in 0..=12 {
                let exact = beta_integer(a, m);
                let lanczos = beta(a, m as f64 + 1.0).unwrap();
                assert!(rel(exact, lanczos) < 1e-12, "a={a} m={m}");
            }
        }
    }

    #[test]
    fn rising_factorial_is_gamma_ratio() {
        for &x in &[0.3, 1.0, 4.5] {
            for k in 0..=13 {
                let r = rising_factorial(x, k);
                let g = (ln_gamma(x + k as f64).unwrap() - ln_gamma(x).unwrap()).exp();
                assert!(rel(r, g) < 1e-12, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn domain() {
        assert!(ln_gamma(0.0_f64).is_err());
        assert!(ln_gamma(-1.5_f64).is_err());
        assert!(beta(1.0_f64, 0.0).is_err());
    }
}
