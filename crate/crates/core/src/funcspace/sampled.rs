//! Functions tabulated on a strictly increasing positive grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::RealFunction;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Not-a-knot cubic spline.
    #[default]
    Cubic,
    Linear,
}

/// Samples `(t_i, v_i)` with an interpolation rule. Evaluation outside `[t_0, t_last]`
/// is a range error; there is no extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    grid: Vec<T>,
    values: Vec<T>,
    interpolation: Interpolation,
    /// Spline second derivatives; empty for linear interpolation.
    curvature: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    pub fn new(grid: Vec<T>, values: Vec<T>, interpolation: Interpolation) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Domain(format!(
                "grid has {} points but {} values were given",
                grid.len(),
                values.len()
            )));
        }
        let min_len = match interpolation {
            Interpolation::Cubic => 4,
            Interpolation::Linear => 2,
        };
        if grid.len() < min_len {
            return Err(Error::Domain(format!(
                "{interpolation:?} interpolation needs at least {min_len} samples, got {}",
                grid.len()
            )));
        }
        if !(grid[0] > T::zero()) || grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("grid points must be positive and finite".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("sampled values must be finite".into()));
        }
        let curvature = match interpolation {
            Interpolation::Cubic => not_a_knot_curvature(&grid, &values),
            Interpolation::Linear => Vec::new(),
        };
        Ok(SampledFunction {
            grid,
            values,
            interpolation,
            curvature,
        })
    }

    /// Samples `f` on `grid`.
    pub fn from_function<F: RealFunction<T> + ?Sized>(
        f: &F,
        grid: Vec<T>,
        interpolation: Interpolation,
    ) -> Result<Self> {
        let values = grid.iter().map(|&t| f.eval(t)).collect::<Result<Vec<T>>>()?;
        Self::new(grid, values, interpolation)
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn min(&self) -> T {
        self.grid[0]
    }

    pub fn max(&self) -> T {
        self.grid[self.grid.len() - 1]
    }

    /// Interpolated value; range error outside the grid.
    pub fn evaluate(&self, t: T) -> Result<T> {
        if !(t >= self.min() && t <= self.max()) {
            return Err(Error::Range {
                t: t.to_f64().unwrap_or(f64::NAN),
                min: self.min().to_f64().unwrap_or(f64::NAN),
                max: self.max().to_f64().unwrap_or(f64::NAN),
            });
        }
        // Segment index i with grid[i] <= t <= grid[i+1].
        let i = self
            .grid
            .partition_point(|&x| x <= t)
            .clamp(1, self.grid.len() - 1)
            - 1;
        let (x0, x1) = (self.grid[i], self.grid[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        let linear = a * y0 + b * y1;
        Ok(match self.interpolation {
            Interpolation::Linear => linear,
            Interpolation::Cubic => {
                let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
                linear + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / T::lit(6.0)
            }
        })
    }

    /// Index of the sample closest to `t`.
    pub fn nearest_index(&self, t: T) -> usize {
        let i = self.grid.partition_point(|&x| x < t);
        if i == 0 {
            0
        } else if i >= self.grid.len() {
            self.grid.len() - 1
        } else if (t - self.grid[i - 1]) <= (self.grid[i] - t) {
            i - 1
        } else {
            i
        }
    }
}

impl<T: Scalar> RealFunction<T> for SampledFunction<T> {
    fn eval(&self, x: T) -> Result<T> {
        self.evaluate(x)
    }

    fn as_sampled(&self) -> Option<&SampledFunction<T>> {
        Some(self)
    }
}

/// Second derivatives `M_i` of the not-a-knot cubic spline.
///
/// The end conditions (continuous third derivative across the first and last interior
/// knots) make `M_0` and `M_{N-1}` linear in their two neighbours. Substituting them into
/// the first and last interior equations leaves a diagonally dominant tridiagonal system
/// for `M_1..M_{N-2}`.
fn not_a_knot_curvature<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    debug_assert!(x.len() >= 4);
    let n = x.len();
    let h: Vec<T> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let slope: Vec<T> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let six = T::lit(6.0);
    let two = T::lit(2.0);

    // Unknowns M_1..M_{n-2}; row r corresponds to knot i = r + 1.
    let k = n - 2;
    let mut sub = vec![T::zero(); k];
    let mut diag = vec![T::zero(); k];
    let mut sup = vec![T::zero(); k];
    let mut rhs = vec![T::zero(); k];
    for r in 0..k {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = two * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = six * (slope[i] - slope[i - 1]);
    }
    // M_0 = ((h0 + h1) M_1 - h0 M_2) / h1
    let (h0, h1) = (h[0], h[1]);
    diag[0] = diag[0] + h0 * (h0 + h1) / h1;
    sup[0] = sup[0] - h0 * h0 / h1;
    // M_{n-1} = ((hl + hp) M_{n-2} - hl M_{n-3}) / hp with hl = h[n-2], hp = h[n-3]
    let (hl, hp) = (h[n - 2], h[n - 3]);
    diag[k - 1] = diag[k - 1] + hl * (hl + hp) / hp;
    sub[k - 1] = sub[k - 1] - hl * hl / hp;

    // Thomas algorithm.
    for r in 1..k {
        let w = sub[r] / diag[r - 1];
        diag[r] = diag[r] - w * sup[r - 1];
        rhs[r] = rhs[r] - w * rhs[r - 1];
    }
    let mut inner = vec![T::zero(); k];
    inner[k - 1] = rhs[k - 1] / diag[k - 1];
    for r in (0..k - 1).rev() {
        inner[r] = (rhs[r] - sup[r] * inner[r + 1]) / diag[r];
    }

    let mut m = vec![T::zero(); n];
    m[1..n - 1].copy_from_slice(&inner);
    m[0] = ((h0 + h1) * m[1] - h0 * m[2]) / h1;
    m[n - 1] = ((hl + hp) * m[n - 2] - hl * m[n - 3]) / hp;
    m
}
