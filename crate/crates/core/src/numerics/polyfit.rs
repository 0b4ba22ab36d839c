//! High-order differentiation by exact differentiation of a local least-squares
//! polynomial.
//!
//! The fit is done in the scaled variable `s = (x - t) / h`, where `h` is the largest
//! node offset, so the design matrix columns stay `O(1)` whatever the location of `t`.

use serde::{Deserialize, Serialize};

use super::linalg::pseudo_inverse;
use crate::error::{domain_err, Error, Result};
use crate::function::RealFunction;
use crate::scalar::{factorial, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GridSpacing {
    #[default]
    LogUniform,
    Uniform,
}

/// Window and degree of the local fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffConfig<T> {
    pub window_points: usize,
    pub fit_degree: usize,
    pub grid_spacing_rule: GridSpacing,
    /// Nodes span `[t (1 - half_width), t (1 + half_width)]`.
    pub half_width: T,
}

impl<T: Scalar> Default for DiffConfig<T> {
    fn default() -> Self {
        DiffConfig {
            window_points: 17,
            fit_degree: 8,
            grid_spacing_rule: GridSpacing::LogUniform,
            half_width: T::lit(0.1),
        }
    }
}

impl<T: Scalar> DiffConfig<T> {
    pub fn validate(&self, order: usize) -> Result<()> {
        if self.fit_degree < order {
            return Err(Error::Config(format!(
                "fit degree {} is below the derivative order {order}",
                self.fit_degree
            )));
        }
        if self.window_points < self.fit_degree + 1 {
            return Err(Error::Config(format!(
                "{} window points cannot determine a degree-{} fit",
                self.window_points, self.fit_degree
            )));
        }
        if !(self.half_width > T::zero() && self.half_width < T::one()) {
            return Err(Error::Config(format!(
                "half_width must lie in (0,1), got {}",
                self.half_width
            )));
        }
        Ok(())
    }

    /// Node positions around `t`.
    pub fn nodes(&self, t: T) -> Vec<T> {
        let m = self.window_points;
        let lo = t * (T::one() - self.half_width);
        let hi = t * (T::one() + self.half_width);
        if m == 1 {
            return vec![t];
        }
        let denom = T::from_usize_lossy(m - 1);
        (0..m)
            .map(|i| {
                let f = T::from_usize_lossy(i) / denom;
                match self.grid_spacing_rule {
                    GridSpacing::Uniform => lo + (hi - lo) * f,
                    GridSpacing::LogUniform => lo * (hi / lo).powf(f),
                }
            })
            .collect()
    }
}

/// A least-squares polynomial fit of fixed degree over fixed nodes.
///
/// The fit is linear in the sampled values, so it is stored as the pseudo-inverse of the
/// design matrix; that also gives the weights of any linear functional of the
/// coefficients, which the inverse transform uses for its noise estimate.
#[derive(Debug, Clone)]
pub struct LocalFit<T> {
    center: T,
    scale: T,
    degree: usize,
    scaled_nodes: Vec<T>,
    pinv: Vec<Vec<T>>,
}

impl<T: Scalar> LocalFit<T> {
    pub fn new(nodes: &[T], center: T, degree: usize) -> Result<Self> {
        let scale = nodes
            .iter()
            .map(|&x| (x - center).abs())
            .fold(T::zero(), T::max);
        if !(scale > T::zero()) {
            return Err(Error::Config("fit nodes must not all coincide with the center".into()));
        }
        let scaled_nodes: Vec<T> = nodes.iter().map(|&x| (x - center) / scale).collect();
        let rows: Vec<Vec<T>> = scaled_nodes
            .iter()
            .map(|&s| {
                let mut row = Vec::with_capacity(degree + 1);
                let mut p = T::one();
                for _ in 0..=degree {
                    row.push(p);
                    p *= s;
                }
                row
            })
            .collect();
        let pinv = pseudo_inverse(&rows)?;
        Ok(LocalFit {
            center,
            scale,
            degree,
            scaled_nodes,
            pinv,
        })
    }

    pub fn center(&self) -> T {
        self.center
    }

    /// Half-width `h` of the window; the fit variable is `s = (x - center) / h`.
    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.scaled_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled_nodes.is_empty()
    }

    /// Monomial coefficients in `s`.
    pub fn coefficients(&self, values: &[T]) -> Vec<T> {
        debug_assert_eq!(values.len(), self.len());
        self.pinv
            .iter()
            .map(|row| row.iter().zip(values).map(|(&w, &v)| w * v).sum())
            .collect()
    }

    /// Root-mean-square residual of the fit.
    pub fn residual_rms(&self, values: &[T], coeffs: &[T]) -> T {
        let ss: T = self
            .scaled_nodes
            .iter()
            .zip(values)
            .map(|(&s, &v)| {
                let p = coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c);
                (v - p) * (v - p)
            })
            .sum();
        (ss / T::from_usize_lossy(self.len())).sqrt()
    }

    /// Weights `w` with `w · values == c · coefficients(values)` for every `values`.
    pub fn functional_weights(&self, c: &[T]) -> Vec<T> {
        (0..self.len())
            .map(|i| {
                c.iter()
                    .zip(&self.pinv)
                    .map(|(&ck, row)| ck * row[i])
                    .sum()
            })
            .collect()
    }

    /// `d^k/dx^k` of the fitted polynomial at the center.
    pub fn derivative_at_center(&self, coeffs: &[T], order: usize) -> T {
        match coeffs.get(order) {
            Some(&a) => a * factorial::<T>(order) / self.scale.powi(order as i32),
            None => T::zero(),
        }
    }
}

/// `d^order f / dx^order` at `t` from a least-squares polynomial fit on a window around `t`.
pub fn differentiate<T, F>(f: &F, t: T, order: usize, cfg: &DiffConfig<T>) -> Result<T>
where
    T: Scalar,
    F: RealFunction<T> + ?Sized,
{
    if order == 0 {
        return Err(domain_err!("derivative order must be positive"));
    }
    if !(t > T::zero() && t.is_finite()) {
        return Err(domain_err!("differentiation point must be positive, got {t}"));
    }
    cfg.validate(order)?;
    let nodes = cfg.nodes(t);
    let fit = LocalFit::new(&nodes, t, cfg.fit_degree)?;
    let values = nodes.iter().map(|&x| f.eval(x)).collect::<Result<Vec<T>>>()?;
    let coeffs = fit.coefficients(&values);
    Ok(fit.derivative_at_center(&coeffs, order))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rounding noise of an order-k derivative over a ±10% window: eps k! / 0.1^k, with
    /// headroom for the least-squares weights.
    fn noise_tol(order: usize) -> f64 {
        1e-13 * 10f64.powi(order as i32) * factorial::<f64>(order)
    }

    #[test]
    fn examples() {
        let cfg = DiffConfig::<f64>::default();
        let d = differentiate(&|t: f64| t * t, 1.0, 1, &cfg).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
        let d = differentiate(&|t: f64| t.powi(4), 1.0, 3, &cfg).unwrap();
        assert!((d - 24.0).abs() < 1e-9);
        for order in 1..=8 {
            let d = differentiate(&|_t: f64| 3.5, 2.7, order, &cfg).unwrap();
            assert!(d.abs() < noise_tol(order), "order {order}: {d}");
        }
    }

    #[test]
    fn exact_on_monomials_up_to_fit_degree() {
        for spacing in [GridSpacing::LogUniform, GridSpacing::Uniform] {
            let cfg = DiffConfig {
                grid_spacing_rule: spacing,
                ..DiffConfig::<f64>::default()
            };
            for j in 0..=cfg.fit_degree {
                for order in 1..=cfg.fit_degree {
                    let d = differentiate(&|t: f64| t.powi(j as i32), 1.0, order, &cfg).unwrap();
                    let want = if order <= j {
                        crate::scalar::falling_factorial::<f64>(j, order)
                    } else {
                        0.0
                    };
                    assert!((d - want).abs() <= noise_tol(order) * want.max(1.0), "j={j} order={order}: {d} vs {want}");
                }
            }
        }
    }

    #[test]
    fn smooth_function_high_order() {
        let cfg = DiffConfig {
            window_points: 25,
            fit_degree: 11,
            ..DiffConfig::<f64>::default()
        };
        // d^5/dt^5 exp(t) = exp(t)
        let d = differentiate(&|t: f64| t.exp(), 1.3, 5, &cfg).unwrap();
        assert!((d - 1.3f64.exp()).abs() < 1e-5 * 1.3f64.exp(), "{d}");
    }

    #[test]
    fn config_errors() {
        let cfg = DiffConfig::<f64> {
            fit_degree: 2,
            ..Default::default()
        };
        assert!(matches!(differentiate(&|t: f64| t, 1.0, 3, &cfg), Err(Error::Config(_))));
        let cfg = DiffConfig::<f64> {
            window_points: 4,
            fit_degree: 6,
            ..Default::default()
        };
        assert!(differentiate(&|t: f64| t, 1.0, 1, &cfg).is_err());
        assert!(differentiate(&|t: f64| t, 0.0, 1, &DiffConfig::default()).is_err());
        assert!(differentiate(&|t: f64| t, 1.0, 0, &DiffConfig::default()).is_err());
    }

    #[test]
    fn functional_weights_reproduce_derivative() {
        let nodes = DiffConfig::<f64>::default().nodes(2.0);
        let fit = LocalFit::new(&nodes, 2.0, 6).unwrap();
        let values: Vec<f64> = nodes.iter().map(|x| x.sin()).collect();
        let coeffs = fit.coefficients(&values);
        let mut c = vec![0.0; 7];
        c[3] = 1.0;
        let w = fit.functional_weights(&c);
        let via_w: f64 = w.iter().zip(&values).map(|(a, b)| a * b).sum();
        assert!((via_w - coeffs[3]).abs() < 1e-12);
    }

    #[test]
    fn window_nodes_span() {
        let cfg = DiffConfig::<f64>::default();
        let n = cfg.nodes(5.0);
        assert_eq!(n.len(), 17);
        assert!((n[0] - 4.5).abs() < 1e-12 && (n[16] - 5.5).abs() < 1e-12);
        assert!(n.windows(2).all(|w| w[0] < w[1]));
    }
}
