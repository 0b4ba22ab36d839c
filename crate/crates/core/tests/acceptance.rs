//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero only when a
//! criterion fails that is not a documented expected failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use khab_core::conjecture::{self, SweepConfig};
use khab_core::funcspace::{closed_form_transform, transform_constant};
use khab_core::inverse::{inverse_transform, roundtrip_residual};
use khab_core::kernel::kernel_value;
use khab_core::numerics::finite_diff::{backward_difference, central_difference};
use khab_core::numerics::integrate_log_singular;
use khab_core::transform::{
    derivative_consistency, direct_transform, integrability_check, tilde_g, tilde_g_derivative,
    IntegrabilityVerdict,
};
use khab_core::{
    CheckConfig, ConjectureParams, Fallible, InverseConfig, InverseMode, KernelOrder, PowerLawMix, QuadratureConfig,
    Result, Verdict,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn ord(n: usize) -> KernelOrder {
    KernelOrder::new(n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|m| 1.0 / m as f64).sum()
}

fn random_mix(rng: &mut ChaCha8Rng, beta_lo: f64, beta_hi: f64) -> PowerLawMix<f64> {
    let terms = rng.gen_range(1..=3);
    let pairs: Vec<(f64, f64)> = (0..terms)
        .map(|_| {
            // c in (0, 10]
            let c = 10.0 - rng.gen_range(0.0..10.0);
            (c, rng.gen_range(beta_lo..beta_hi))
        })
        .collect();
    PowerLawMix::from_pairs(&pairs).unwrap()
}

fn vanishing_conditions() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let a = Fallible(move |x: f64| kernel_value(ord(n), x));
        worst = worst.max(kernel_value::<f64>(ord(n), 1.0)?.abs());
        for k in 1..=n {
            // One-sided differences are first order in h, so each level removes one power.
            worst = worst.max(backward_difference(&a, 1.0, k, 1e-2, 6)?.abs());
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |d^k A_n(1)| = {worst:.3e} (tol 1e-6)"),
    })
}

/// The ratio is `1 - H_n/|ln x| + O(x)`, which leaves `[0.99, 1.01]` for every `n >= 1` on
/// these points. The line reports FAIL; the deviation is checked against that prediction.
fn logarithmic_asymptotics() -> Result<(Outcome, bool)> {
    let mut worst = 0.0f64;
    let mut prediction_err = 0.0f64;
    for n in 0..=6 {
        for x in [1e-6, 1e-9, 1e-12] {
            let l = -f64::ln(x);
            let ratio = kernel_value(ord(n), x)? / l;
            worst = worst.max((ratio - 1.0).abs());
            let predicted = 1.0 - harmonic(n) / l;
            prediction_err = prediction_err.max((ratio - predicted).abs());
        }
    }
    let explained = prediction_err <= 1e-4;
    Ok((
        Outcome {
            pass: worst <= 1e-2,
            detail: format!(
                "max |ratio - 1| = {worst:.4} (tol 1e-2); matches 1 - H_n/|ln x| to {prediction_err:.1e}"
            ),
        },
        explained,
    ))
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    // g(0.1) falls to 1e-9 for large β; a purely relative target is what is being tested.
    let cfg = QuadratureConfig {
        abs_tol: 1e-300,
        ..QuadratureConfig::default()
    };
    let mut worst = 0.0f64;
    let mut worst_const = 0.0f64;
    let tight = QuadratureConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..QuadratureConfig::default()
    };
    for _ in 0..50 {
        let q = random_mix(&mut rng, -0.9, 4.0);
        for n in 0..=5 {
            for term in q.terms() {
                let beta = term.exponent;
                let integrand = Fallible(move |x: f64| -> Result<f64> { Ok(kernel_value(ord(n), x)? * x.powf(beta)) });
                let by_quad = integrate_log_singular(&integrand, 1.0, &tight)?.value;
                worst_const = worst_const.max(rel(transform_constant(ord(n), beta)?.value, by_quad));
            }
            let g = closed_form_transform(&q, ord(n))?;
            for t in [0.1, 1.0, 10.0] {
                let numeric = direct_transform(&q, t, ord(n), &cfg)?.value;
                worst = worst.max(rel(numeric, g.evaluate(t)?));
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8 && worst_const <= 1e-9,
        detail: format!("transform rel err {worst:.2e} (tol 1e-8), constants {worst_const:.2e} (tol 1e-9)"),
    })
}

fn derivative_cascade() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let inputs = [
        PowerLawMix::monomial(1.0, 0.0)?,
        PowerLawMix::monomial(1.0, 1.0)?,
    ];
    let mut worst_cascade = 0.0f64;
    let mut worst_consistency = 0.0f64;
    for q in &inputs {
        for n in 0..=4 {
            let tg = Fallible(|s: f64| -> Result<f64> { Ok(tilde_g(q, s, ord(n), &cfg)?.value) });
            for t in [0.5, 2.0, 5.0] {
                for k in 0..=n {
                    let exact = tilde_g_derivative(q, t, ord(n), k, &cfg)?.value;
                    let fd = if k == 0 {
                        tg.0(t)?
                    } else {
                        central_difference(&tg, t, k, 0.1 * t, 4)?
                    };
                    worst_cascade = worst_cascade.max(rel(fd, exact));
                }
                worst_consistency = worst_consistency.max(derivative_consistency(q, t, ord(n), &cfg)?.rel_err);
            }
        }
    }
    Ok(Outcome {
        pass: worst_cascade <= 1e-5 && worst_consistency <= 1e-6,
        detail: format!("cascade {worst_cascade:.2e} (tol 1e-5), consistency {worst_consistency:.2e} (tol 1e-6)"),
    })
}

fn inverse_round_trip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut worst_analytic = 0.0f64;
    for _ in 0..20 {
        let q = random_mix(&mut rng, -0.9, 4.0);
        for n in 0..=6 {
            let g = closed_form_transform(&q, ord(n))?;
            let cfg = InverseConfig::for_order(ord(n));
            for t in [0.1, 0.7, 1.0, 3.0, 10.0] {
                let back = inverse_transform(&g, t, ord(n), &cfg)?.value;
                worst_analytic = worst_analytic.max(rel(back, q.evaluate(t)?));
            }
        }
    }

    // Sampled g is differentiated n+2 times, so its error must be small relative to g itself.
    let quad = QuadratureConfig {
        abs_tol: 1e-300,
        ..QuadratureConfig::default()
    };
    let grid = khab_core::grid::log_grid(0.1, 10.0, 200)?;
    let mut worst_numeric = 0.0f64;
    let mut inputs = vec![PowerLawMix::monomial(1.0, 0.0)?];
    for _ in 0..3 {
        inputs.push(random_mix(&mut rng, -0.5, 3.0));
    }
    for q in &inputs {
        for n in 0..=4 {
            let cfg = InverseConfig::for_order(ord(n)).with_mode(InverseMode::NumericOnly);
            let report = roundtrip_residual(q, &grid, ord(n), &quad, &cfg)?;
            worst_numeric = worst_numeric.max(report.max_rel_err);
        }
    }
    Ok(Outcome {
        pass: worst_analytic <= 1e-12 && worst_numeric <= 1e-3,
        detail: format!("analytic {worst_analytic:.2e} (tol 1e-12), numeric {worst_numeric:.2e} (tol 1e-3)"),
    })
}

fn sharp_case() -> Result<Outcome> {
    let grid = khab_core::grid::log_grid(0.01, 100.0, 200)?;
    let cfg = CheckConfig {
        tol_ratio: 2e-3,
        ..CheckConfig::default()
    };
    let mut worst_premise = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut all_consistent = true;
    for n in 1..=3 {
        let p = ConjectureParams::<f64>::new(0.5, n)?;
        let q = conjecture::extremal_q(&p)?;
        let report = conjecture::check(&q, &p, &grid, &cfg)?;
        for m in &report.premise_margins {
            worst_premise = worst_premise.max(m.margin.abs() / m.t_alpha);
        }
        worst_ratio = worst_ratio.max((report.ratio - 1.0).abs());
        all_consistent &= report.verdict == Verdict::Consistent;
    }
    Ok(Outcome {
        pass: worst_premise <= 1e-8 && worst_ratio <= 2e-3 && all_consistent,
        detail: format!("premise saturation {worst_premise:.2e} (tol 1e-8), |ratio - 1| {worst_ratio:.2e} (tol 2e-3)"),
    })
}

const SWEEP_CONFIG: &str = r#"{
  "alphas": [0.1, 0.25, 0.4, 0.5],
  "ns": [1, 2, 3],
  "tolerances": { "ratio": 0.002 }
}"#;

fn proven_regime() -> Result<Outcome> {
    let config: SweepConfig = serde_json::from_str(SWEEP_CONFIG).expect("sweep config parses");
    let cells = config.run()?;
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| c.verdict() != Verdict::Consistent || c.ratio() > 1.0 + 2e-3)
        .map(|c| format!("alpha={} n={}: {}", c.alpha, c.n, c.verdict().as_str()))
        .collect();
    let max_ratio = cells.iter().map(|c| c.ratio()).fold(f64::NEG_INFINITY, f64::max);
    Ok(Outcome {
        pass: cells.len() == 12 && bad.is_empty(),
        detail: format!("{} cells, max ratio {max_ratio:.6}, inconsistent: {:?}", cells.len(), bad),
    })
}

fn integrability_diagnostics() -> Result<Outcome> {
    let cfg = QuadratureConfig::default();
    let mut wrong = Vec::new();
    for beta in [-0.5, 0.0, 1.0] {
        let q = move |y: f64| y.powf(beta);
        if integrability_check(&q, 1.0, &cfg)?.verdict != IntegrabilityVerdict::Finite {
            wrong.push(format!("t^{beta} not finite"));
        }
    }
    for beta in [-1.0, -1.2] {
        let q = move |y: f64| y.powf(beta);
        if integrability_check(&q, 1.0, &cfg)?.verdict != IntegrabilityVerdict::SuspectDivergent {
            wrong.push(format!("t^{beta} not flagged"));
        }
    }
    Ok(Outcome {
        pass: wrong.is_empty(),
        detail: if wrong.is_empty() {
            "3 finite, 2 suspect-divergent".into()
        } else {
            wrong.join("; ")
        },
    })
}

fn cli_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let config = dir.path().join("sweep.json");
    std::fs::write(&config, SWEEP_CONFIG)?;
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_khab"))
            .arg("sweep")
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()?;
        if !status.success() {
            return Ok(Outcome {
                pass: false,
                detail: format!("run {run} exited with {status}"),
            });
        }
        outputs.push(std::fs::read(&out)?);
    }
    Ok(Outcome {
        pass: outputs[0] == outputs[1] && !outputs[0].is_empty(),
        detail: format!("{} bytes, identical: {}", outputs[0].len(), outputs[0] == outputs[1]),
    })
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Result<Outcome>) -> bool {
    let start = Instant::now();
    let outcome = f().unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!("error: {e}"),
    });
    let elapsed = start.elapsed();
    let pass = outcome.pass && elapsed <= budget;
    println!(
        "{} criterion {id} ({name}): {} [{:.2?} / budget {:?}]",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed,
        budget
    );
    pass
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let mut unexpected = 0;
    let mut tally = |ok: bool| {
        if !ok {
            unexpected += 1;
        }
    };

    tally(report(1, "kernel vanishing at x = 1", s(1), vanishing_conditions));

    // Expected failure: the band is narrower than the H_n offset of the kernel.
    let mut explained = false;
    let ok = report(2, "logarithmic asymptotics", s(1), || {
        let (outcome, e) = logarithmic_asymptotics()?;
        explained = e;
        Ok(outcome)
    });
    if !ok {
        println!(
            "     criterion 2 is unattainable for n >= 1: A_n(x) = -ln x - H_n + O(x); deviation explained: {explained}"
        );
        tally(explained);
    }

    tally(report(3, "direct transform vs closed form", s(30), oracle_equivalence));
    tally(report(4, "derivative cascade", s(30), derivative_cascade));
    tally(report(5, "inverse round trip", s(60), inverse_round_trip));
    tally(report(6, "sharp case alpha = 1/2", s(30), sharp_case));
    tally(report(7, "proven-regime sweep", s(60), proven_regime));
    tally(report(8, "integrability diagnostics", s(5), integrability_diagnostics));
    tally(report(9, "CLI determinism", s(120), cli_determinism));

    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
