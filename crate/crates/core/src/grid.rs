//! Evaluation grids and the `log:<min>:<max>:<count>` / `lin:<min>:<max>:<count>` spec.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `count` points from `min` to `max`, equally spaced in `ln t`. Endpoints are exact.
pub fn log_grid<T: Scalar>(min: T, max: T, count: usize) -> Result<Vec<T>> {
    check_bounds(min, max, count)?;
    if !(min > T::zero()) {
        return Err(Error::Domain(format!("log grid needs min > 0, got {min}")));
    }
    Ok(spaced(min, max, count, |f| min * (max / min).powf(f)))
}

/// `count` equally spaced points from `min` to `max`.
pub fn lin_grid<T: Scalar>(min: T, max: T, count: usize) -> Result<Vec<T>> {
    check_bounds(min, max, count)?;
    Ok(spaced(min, max, count, |f| min + (max - min) * f))
}

fn check_bounds<T: Scalar>(min: T, max: T, count: usize) -> Result<()> {
    if count == 0 {
        return Err(Error::Domain("grid must have at least one point".into()));
    }
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::Domain("grid bounds must be finite".into()));
    }
    if count == 1 && min != max {
        return Err(Error::Domain("a one-point grid needs min == max".into()));
    }
    if count > 1 && !(min < max) {
        return Err(Error::Domain(format!("grid needs min < max, got {min} .. {max}")));
    }
    Ok(())
}

fn spaced<T: Scalar>(min: T, max: T, count: usize, at: impl Fn(T) -> T) -> Vec<T> {
    if count == 1 {
        return vec![min];
    }
    let denom = T::from_usize_lossy(count - 1);
    let mut v: Vec<T> = (0..count).map(|i| at(T::from_usize_lossy(i) / denom)).collect();
    v[0] = min;
    v[count - 1] = max;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Lin,
}

/// A textual grid description such as `log:0.01:100:200`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GridSpec {
    pub spacing: Spacing,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn log(min: f64, max: f64, count: usize) -> Self {
        GridSpec { spacing: Spacing::Log, min, max, count }
    }

    /// Resolves to a strictly increasing grid of positive points.
    pub fn points<T: Scalar>(&self) -> Result<Vec<T>> {
        let (min, max) = (T::lit(self.min), T::lit(self.max));
        let pts = match self.spacing {
            Spacing::Log => log_grid(min, max, self.count)?,
            Spacing::Lin => lin_grid(min, max, self.count)?,
        };
        if !(pts[0] > T::zero()) {
            return Err(Error::Domain(format!("grid points must be positive, got {}", pts[0])));
        }
        if pts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("grid is not strictly increasing".into()));
        }
        Ok(pts)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [kind, min, max, count] = parts.as_slice() else {
            return Err(Error::Parse(format!(
                "grid spec must look like log:<min>:<max>:<count> or lin:<min>:<max>:<count>, got {s:?}"
            )));
        };
        let spacing = match *kind {
            "log" => Spacing::Log,
            "lin" => Spacing::Lin,
            other => return Err(Error::Parse(format!("unknown grid spacing {other:?}"))),
        };
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad grid bound {x:?}: {e}")))
        };
        let count = count
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad grid count {count:?}: {e}")))?;
        let spec = GridSpec { spacing, min: num(min)?, max: num(max)?, count };
        spec.points::<f64>()?;
        Ok(spec)
    }
}

impl TryFrom<String> for GridSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GridSpec> for String {
    fn from(g: GridSpec) -> String {
        g.to_string()
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.spacing {
            Spacing::Log => "log",
            Spacing::Lin => "lin",
        };
        write!(f, "{kind}:{}:{}:{}", self.min, self.max, self.count)
    }
}
