//! Finite power-law mixtures `Σ c_j t^{β_j}` and the closed-form transform pair on them.

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Error, Result};
use crate::function::RealFunction;
use crate::kernel::KernelOrder;
use crate::scalar::{factorial, Scalar};
use crate::special::{beta_integer, rising_factorial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm<T> {
    #[serde(rename = "c")]
    pub coefficient: T,
    #[serde(rename = "beta")]
    pub exponent: T,
}

#[derive(Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
struct RawMix<T> {
    terms: Vec<PowerTerm<T>>,
}

/// `q(t) = Σ_j c_j t^{β_j}` on `t > 0`, with every `β_j > -1`.
///
/// The exponent bound is what makes `∫_0 q` and `∫_0 |ln y| q` finite, so it is enforced
/// on construction and deserialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawMix<T>",
    bound(serialize = "T: Serialize", deserialize = "T: Scalar + Deserialize<'de>")
)]
pub struct PowerLawMix<T> {
    terms: Vec<PowerTerm<T>>,
}

impl<T: Scalar> TryFrom<RawMix<T>> for PowerLawMix<T> {
    type Error = Error;
    fn try_from(raw: RawMix<T>) -> Result<Self> {
        PowerLawMix::new(raw.terms)
    }
}

impl<T: Scalar> Default for PowerLawMix<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> PowerLawMix<T> {
    pub fn new(terms: Vec<PowerTerm<T>>) -> Result<Self> {
        for term in &terms {
            if !term.coefficient.is_finite() {
                return Err(domain_err!("non-finite coefficient {}", term.coefficient));
            }
            if !(term.exponent > -T::one() && term.exponent.is_finite()) {
                return Err(domain_err!(
                    "exponent {} is not > -1; the integrals of q and |ln y| q near 0 would diverge",
                    term.exponent
                ));
            }
        }
        Ok(PowerLawMix { terms })
    }

    /// The zero function (no terms).
    pub fn zero() -> Self {
        PowerLawMix { terms: Vec::new() }
    }

    /// `c t^β`.
    pub fn monomial(c: T, beta: T) -> Result<Self> {
        Self::new(vec![PowerTerm {
            coefficient: c,
            exponent: beta,
        }])
    }

    /// Builds a mix from `(c, β)` pairs.
    pub fn from_pairs(pairs: &[(T, T)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(coefficient, exponent)| PowerTerm {
                    coefficient,
                    exponent,
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[PowerTerm<T>] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient >= T::zero())
    }

    /// Fails unless every coefficient is non-negative.
    pub fn require_nonnegative(&self) -> Result<()> {
        if self.is_nonnegative() {
            Ok(())
        } else {
            Err(domain_err!("q must be non-negative: found a negative coefficient"))
        }
    }

    pub fn scaled(&self, factor: T) -> Self {
        PowerLawMix {
            terms: self
                .terms
                .iter()
                .map(|t| PowerTerm {
                    coefficient: t.coefficient * factor,
                    exponent: t.exponent,
                })
                .collect(),
        }
    }

    /// Exact value at `t > 0`.
    pub fn evaluate(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(domain_err!("power-law mixes are defined on t > 0, got {t}"));
        }
        Ok(self
            .terms
            .iter()
            .map(|term| term.coefficient * t.powf(term.exponent))
            .sum())
    }
}

impl<T: Scalar> RealFunction<T> for PowerLawMix<T> {
    fn eval(&self, x: T) -> Result<T> {
        self.evaluate(x)
    }

    fn as_power_law(&self) -> Option<&PowerLawMix<T>> {
        Some(self)
    }
}

/// `C(n, β) = ∫_0^1 A_n(x) x^β dx`, the factor in `t^β ↦ C(n, β) t^{β+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConstant<T> {
    pub n: KernelOrder,
    pub beta: T,
    pub value: T,
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if beta > -T::one() && beta.is_finite() {
        Ok(())
    } else {
        Err(domain_err!("transform constant needs beta > -1, got {beta}"))
    }
}

/// `C(n, β)` through the telescoped form `n! / ((β+1) (β+1)(β+2)...(β+n+1))`.
///
/// The termwise expression `1/(β+1)^2 - Σ_{m=1..n} B(β+1, m+1)/m` is the same number but
/// cancels badly for large `β` and `n`; it is kept as
/// [`transform_constant_beta_sum`] for cross-checking.
pub fn transform_constant<T: Scalar>(n: KernelOrder, beta: T) -> Result<TransformConstant<T>> {
    check_beta(beta)?;
    let a = beta + T::one();
    let value = factorial::<T>(n.get()) / (a * rising_factorial(a, n.get() + 1));
    Ok(TransformConstant { n, beta, value })
}

/// `C(n, β) = 1/(β+1)^2 - Σ_{m=1..n} B(β+1, m+1)/m`, termwise integration of the
/// closed form of `A_n`.
pub fn transform_constant_beta_sum<T: Scalar>(n: KernelOrder, beta: T) -> Result<T> {
    check_beta(beta)?;
    let a = beta + T::one();
    let tail: T = (1..=n.get())
        .map(|m| beta_integer(a, m) / T::from_usize_lossy(m))
        .sum();
    Ok(T::one() / (a * a) - tail)
}

/// Exact direct transform of a mix: `c t^β ↦ c C(n, β) t^{β+1}`.
pub fn closed_form_transform<T: Scalar>(q: &PowerLawMix<T>, n: KernelOrder) -> Result<PowerLawMix<T>> {
    let terms = q
        .terms
        .iter()
        .map(|term| {
            let k = transform_constant(n, term.exponent)?;
            Ok(PowerTerm {
                coefficient: term.coefficient * k.value,
                exponent: term.exponent + T::one(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PowerLawMix::new(terms)
}

/// Exact inverse transform of a mix:
/// `c t^γ ↦ c γ Γ(n+γ+1) / (n! Γ(γ)) t^{γ-1}`, which needs every `γ > 0`.
pub fn closed_form_inverse<T: Scalar>(g: &PowerLawMix<T>, n: KernelOrder) -> Result<PowerLawMix<T>> {
    let nf = factorial::<T>(n.get());
    let terms = g
        .terms
        .iter()
        .map(|term| {
            let gamma = term.exponent;
            if !(gamma > T::zero()) {
                return Err(domain_err!(
                    "inverse transform needs exponents > 0 in g, got {gamma}"
                ));
            }
            Ok(PowerTerm {
                coefficient: term.coefficient * gamma * rising_factorial(gamma, n.get() + 1) / nf,
                exponent: gamma - T::one(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PowerLawMix::new(terms)
}
