//! Built-in oracle checks behind `photonsub validate`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::fock::{max_abs, StateVector};
use crate::measures::{fidelity_pure, log_negativity};
use crate::protocols::{ideal_displaced_filter, ideal_subtraction_filter, run_bruteforce_oracle, run_realistic, ProtocolParams};
use crate::states::{tmsv_pure, TmsvSpec, MAX_NORM_DEFICIT};

pub const DEFAULT_LAMBDA: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_result(name: &'static str, result: Result<(bool, String)>) -> Self {
        match result {
            Ok((passed, detail)) => Check { name, passed, detail },
            Err(e) => Check { name, passed: false, detail: format!("{} ({})", e, e.tag()) },
        }
    }
}

fn norm_deficit(lambda: f64, cutoff: usize) -> Result<(bool, String)> {
    let deficit = TmsvSpec::new(lambda, cutoff)?.truncation_deficit();
    Ok((deficit <= MAX_NORM_DEFICIT, format!("deficit {deficit:e}, limit {MAX_NORM_DEFICIT:e}")))
}

fn closed_form(lambda: f64, cutoff: usize) -> Result<(bool, String)> {
    let psi = tmsv_pure(TmsvSpec::new(lambda, cutoff)?)?;
    let got = log_negativity(&psi.projector())?.log_negativity;
    let want = ((1.0 + lambda) / (1.0 - lambda)).log2();
    let dev = (got - want).abs();
    Ok((dev <= 1e-6, format!("E_N {got}, closed form {want}, deviation {dev:e}")))
}

fn subtraction_coefficients(lambda: f64, cutoff: usize) -> Result<(bool, String)> {
    let out = ideal_subtraction_filter(&tmsv_pure(TmsvSpec::new(lambda, cutoff)?)?)?;
    let head = (1.0 - lambda * lambda).sqrt();
    let dev = (0..cutoff)
        .map(|n| (out.amplitude(&[n, n]).re - head * (n + 1) as f64 * lambda.powi(n as i32 + 1)).abs())
        .fold(0.0, f64::max);
    Ok((dev <= 1e-14, format!("max coefficient deviation {dev:e}")))
}

fn vacuum_cancellation(lambda: f64, cutoff: usize) -> Result<(bool, String)> {
    let a = lambda.sqrt();
    let psi = tmsv_pure(TmsvSpec::new(lambda, cutoff)?)?;
    let out = ideal_displaced_filter(&psi, Complex64::new(a, 0.0), Complex64::new(-a, 0.0))?;
    let vac = out.amplitude(&[0, 0]).norm();
    Ok((vac <= 1e-12, format!("vacuum amplitude {vac:e}")))
}

fn one_ebit_limit(cutoff: usize) -> Result<(bool, String)> {
    let psi = tmsv_pure(TmsvSpec::new(0.01, cutoff)?)?;
    let out = ideal_displaced_filter(&psi, Complex64::new(0.1, 0.0), Complex64::new(-0.1, 0.0))?.normalized()?;
    let h = Complex64::new(0.5f64.sqrt(), 0.0);
    let target = StateVector::from_terms(&[(h, &[1, 0]), (-h, &[0, 1])], 2, cutoff)?;
    let f = fidelity_pure(&out.projector(), &target)?;
    let e = log_negativity(&out.projector())?.log_negativity;
    Ok((f >= 0.99 && e >= 0.97, format!("fidelity {f}, E_N {e}")))
}

fn oracle_agreement(lambda: f64, cutoff: usize) -> Result<(bool, String)> {
    let params = ProtocolParams::new(lambda, 0.1).with_cutoff(cutoff).with_displacement(0.35, -0.35);
    let fast = run_realistic(&params)?;
    let slow = run_bruteforce_oracle(&params)?;
    let dev = max_abs(&(fast.rho_out_unnormalized.matrix() - slow.rho_out_unnormalized.matrix()));
    let rel = (fast.success_probability / slow.success_probability - 1.0).abs();
    Ok((dev <= 1e-9 && rel <= 1e-9, format!("entry deviation {dev:e}, P_succ relative deviation {rel:e}")))
}

/// Runs every check at the given cutoff and TMSV parameter.
pub fn run_checks(cutoff: usize, lambda: f64) -> Vec<Check> {
    vec![
        Check::from_result("norm_deficit", norm_deficit(lambda, cutoff)),
        Check::from_result("tmsv_closed_form", closed_form(lambda, cutoff)),
        Check::from_result("subtraction_coefficients", subtraction_coefficients(lambda, cutoff)),
        Check::from_result("vacuum_cancellation", vacuum_cancellation(lambda, cutoff)),
        Check::from_result("one_ebit_limit", one_ebit_limit(cutoff)),
        Check::from_result("realistic_vs_bruteforce", oracle_agreement(lambda, cutoff)),
    ]
}
