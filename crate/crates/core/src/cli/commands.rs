use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use khab_core::conjecture::{self, SweepConfig};
use khab_core::funcspace::io::{format_float, read_power_law_json, read_sampled_csv, write_atomic};
use khab_core::inverse::{self, InverseEstimate};
use khab_core::kernel::{kernel_derivative, kernel_value};
use khab_core::transform::{direct_transform_grid, g_prime, integrability_check, IntegrabilityVerdict};
use khab_core::{
    CheckConfig, ConjectureParams, Error, Interpolation, InverseConfig, InverseMode, KernelOrder,
    PowerLawMix, QuadratureConfig, RealFunction, Result, SampledFunction,
};

use super::{
    CheckArgs, InterpArg, InvertArgs, KernelArgs, ModeArg, Output, SweepArgs, Tolerances, TransformArgs,
    EXIT_DIVERGENT, EXIT_OK,
};

/// A function read from disk.
enum Input {
    Mix(PowerLawMix<f64>),
    Sampled(SampledFunction<f64>),
}

impl Input {
    fn read(path: &Path, interp: Interpolation) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("json") => Ok(Input::Mix(read_power_law_json(path)?)),
            Some("csv") => Ok(Input::Sampled(read_sampled_csv(path, interp)?)),
            _ => Err(Error::Parse(format!(
                "{}: expected a .json power-law mix or a .csv sample file",
                path.display()
            ))),
        }
    }

    fn as_fn(&self) -> &(dyn RealFunction<f64> + Sync) {
        match self {
            Input::Mix(m) => m,
            Input::Sampled(s) => s,
        }
    }
}

fn interpolation(a: InterpArg) -> Interpolation {
    match a {
        InterpArg::Cubic => Interpolation::Cubic,
        InterpArg::Linear => Interpolation::Linear,
    }
}

fn quad_config(tol: &Tolerances) -> Result<QuadratureConfig<f64>> {
    let mut cfg = QuadratureConfig::default();
    if let Some(v) = tol.tol_rel {
        cfg.rel_tol = v;
    }
    if let Some(v) = tol.tol_abs {
        cfg.abs_tol = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(output: &Output, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn csv_row(out: &mut String, cells: &[f64]) {
    let row: Vec<String> = cells.iter().map(|&x| format_float(x)).collect();
    let _ = writeln!(out, "{}", row.join(","));
}

pub fn kernel(a: &KernelArgs) -> Result<u8> {
    let n = KernelOrder::new(a.n)?;
    let grid = a.grid.points::<f64>()?;
    let mut out = String::from("x,A_n,dA_n_dx\n");
    for x in grid {
        csv_row(&mut out, &[x, kernel_value(n, x)?, kernel_derivative(n, x)?]);
    }
    emit(&a.output, &out)?;
    Ok(EXIT_OK)
}

pub fn transform(a: &TransformArgs) -> Result<u8> {
    let n = KernelOrder::new(a.n)?;
    let grid = a.grid.points::<f64>()?;
    let quad = quad_config(&a.tol)?;
    let input = Input::read(&a.q, interpolation(a.interp))?;
    let q = input.as_fn();

    let last = grid[grid.len() - 1];
    let report = integrability_check(q, last, &quad)?;
    if report.verdict != IntegrabilityVerdict::Finite {
        return Err(Error::Divergent(format!(
            "q does not look integrable against |ln y| on (0, {last}]"
        )));
    }

    let result = direct_transform_grid(q, &grid, n, &quad)?;
    for f in &result.failures {
        log::warn!("dropped t = {}: {}", f.t, f.reason);
    }
    let mut out = String::from("t,g,g_prime,error_estimate\n");
    for (&t, r) in result.t.iter().zip(&result.results) {
        let gp = g_prime(q, t, n, &quad)?;
        csv_row(&mut out, &[t, r.value, gp.value, r.error_estimate]);
    }
    emit(&a.output, &out)?;
    Ok(EXIT_OK)
}

pub fn invert(a: &InvertArgs) -> Result<u8> {
    let n = KernelOrder::new(a.n)?;
    let mut cfg = InverseConfig::for_order(n).with_mode(match a.mode {
        ModeArg::Analytic => InverseMode::AnalyticIfPossible,
        ModeArg::Numeric => InverseMode::NumericOnly,
    });
    if let Some(w) = a.window {
        cfg.diff.window_points = w;
    }
    if let Some(d) = a.degree {
        cfg.diff.fit_degree = d;
    }
    let input = Input::read(&a.g, Interpolation::Cubic)?;
    let ts: Vec<f64> = match (&a.grid, &input) {
        (Some(spec), _) => spec.points()?,
        (None, Input::Sampled(s)) => {
            let margin = cfg.diff.window_points / 2;
            if s.len() <= 2 * margin {
                return Err(Error::Config(format!(
                    "{} samples leave no interior points for a {}-point window; pass --grid",
                    s.len(),
                    cfg.diff.window_points
                )));
            }
            s.grid()[margin..s.len() - margin].to_vec()
        }
        (None, Input::Mix(_)) => {
            return Err(Error::Config("--grid is required for power-law input".into()));
        }
    };
    let estimates: Vec<InverseEstimate<f64>> = inverse::inverse_transform_many(input.as_fn(), &ts, n, &cfg)?;
    if let Some(w) = estimates.iter().find_map(|e| e.warning.as_ref()) {
        log::warn!("{w}");
    }
    let mut out = String::from("t,q_hat,noise_estimate\n");
    for e in &estimates {
        csv_row(&mut out, &[e.t, e.value, e.noise_estimate]);
    }
    emit(&a.output, &out)?;
    Ok(EXIT_OK)
}

pub fn check(a: &CheckArgs) -> Result<u8> {
    let p = ConjectureParams::new(a.alpha, a.n)?;
    let grid = a.grid.points::<f64>()?;
    let mut cfg = CheckConfig {
        quad: quad_config(&a.tol)?,
        ..CheckConfig::default()
    };
    if let Some(v) = a.tol_premise {
        cfg.tol_premise = v;
    }
    if let Some(v) = a.tol_ratio {
        cfg.tol_ratio = v;
    }

    let input = if a.q == "extremal" {
        Input::Mix(conjecture::extremal_q(&p)?)
    } else {
        Input::read(Path::new(&a.q), Interpolation::Cubic)?
    };
    let input = match input {
        Input::Mix(m) => Input::Mix(m.scaled(a.scale)),
        Input::Sampled(s) if a.scale != 1.0 => {
            let values = s.values().iter().map(|v| v * a.scale).collect();
            Input::Sampled(SampledFunction::new(s.grid().to_vec(), values, s.interpolation())?)
        }
        other => other,
    };

    let report = conjecture::check(input.as_fn(), &p, &grid, &cfg)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    emit(&a.output, &(json + "\n"))?;
    if report.diverged {
        eprintln!("error: a quadrature flagged divergence; the report is inconclusive");
        return Ok(EXIT_DIVERGENT);
    }
    Ok(EXIT_OK)
}

pub fn sweep(a: &SweepArgs) -> Result<u8> {
    let text = std::fs::read_to_string(&a.config)?;
    let config: SweepConfig = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", a.config.display())))?;
    let cells = config.run()?;
    if let Some(path) = &a.json_out {
        let json = serde_json::to_string_pretty(&cells).map_err(|e| Error::Parse(e.to_string()))?;
        write_atomic(path, (json + "\n").as_bytes())?;
    }
    emit(&a.output, &conjecture::sweep_summary_csv(&cells))?;
    Ok(EXIT_OK)
}
