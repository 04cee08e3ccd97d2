//! Optimal displacement search, parameter grids and scaling fits.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::log_negativity;
use crate::protocols::{run_realistic, LocalOp, ProtocolParams};

/// Upper end of the displacement search interval.
pub const ALPHA_MAX: f64 = 1.0;
pub const COARSE_POINTS: usize = 21;
pub const BRACKET_TOLERANCE: f64 = 1e-4;

/// Protocol parameter a grid can vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Lambda,
    Reflectance,
    Eta,
    Nu,
    Alpha,
    Beta,
    Squeezing,
}

impl SweepParam {
    pub const ALL: [SweepParam; 7] = [
        SweepParam::Lambda,
        SweepParam::Reflectance,
        SweepParam::Eta,
        SweepParam::Nu,
        SweepParam::Alpha,
        SweepParam::Beta,
        SweepParam::Squeezing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Lambda => "lambda",
            SweepParam::Reflectance => "reflectance",
            SweepParam::Eta => "eta",
            SweepParam::Nu => "nu",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
            SweepParam::Squeezing => "squeezing",
        }
    }

    /// Writes `value` into `params`. Setting α or β turns a non-displacement
    /// local operation into a displacement with the other amplitude zero;
    /// setting the squeezing replaces any displacement.
    pub fn apply(self, params: &mut ProtocolParams, value: f64) {
        let zero = Complex64::new(0.0, 0.0);
        let (alpha, beta) = match params.local_op {
            LocalOp::Displacement { alpha, beta } => (alpha, beta),
            _ => (zero, zero),
        };
        match self {
            SweepParam::Lambda => params.lambda = value,
            SweepParam::Reflectance => params.reflectance = value,
            SweepParam::Eta => params.eta = value,
            SweepParam::Nu => params.nu = value,
            SweepParam::Alpha => {
                params.local_op = LocalOp::Displacement { alpha: Complex64::new(value, 0.0), beta }
            }
            SweepParam::Beta => {
                params.local_op = LocalOp::Displacement { alpha, beta: Complex64::new(value, 0.0) }
            }
            SweepParam::Squeezing => params.local_op = LocalOp::Squeezing { s: value },
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidGrid(format!("unknown parameter `{s}`")))
    }
}

/// Evenly spaced samples `start + i·step` up to `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepGrid {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    samples: Vec<f64>,
}

impl SweepGrid {
    pub const MIN_SAMPLES: usize = 3;

    pub fn new(param: SweepParam, start: f64, stop: f64, step: f64) -> Result<Self> {
        if ![start, stop, step].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bound or step".into()));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if stop < start {
            return Err(Error::InvalidGrid(format!("stop {stop} is below start {start}")));
        }
        // tolerate round-off in (stop − start)/step
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        if count < Self::MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "{} yields {count} samples, at least {} required",
                param,
                Self::MIN_SAMPLES
            )));
        }
        let samples = (0..count).map(|i| start + i as f64 * step).collect();
        Ok(Self { param, start, stop, step, samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

impl fmt::Display for SweepGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.param, self.start, self.stop, self.step)
    }
}

impl FromStr for SweepGrid {
    type Err = Error;

    /// Parses `name:start:stop:step`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidGrid(format!("expected name:start:stop:step, got `{s}`")));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidGrid(format!("`{t}` is not a number")))
        };
        SweepGrid::new(parts[0].trim().parse()?, num(parts[1])?, num(parts[2])?, num(parts[3])?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Optimum {
    pub alpha_opt: f64,
    pub e_n_at_opt: f64,
    pub p_succ_at_opt: f64,
    /// Golden-section iterations after the coarse grid.
    pub iterations: usize,
    /// Coarse-grid neighbours of the best sample; the maximum lies between them.
    pub bracket: (f64, f64),
}

/// Maximizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than
/// `tol`. Returns `(x, f(x), iterations)`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut iterations = 0;
    while b - a >= tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc, iterations) } else { (d, fd, iterations) })
}

fn displaced(params: &ProtocolParams, alpha: f64) -> ProtocolParams {
    params.with_displacement(alpha, -alpha)
}

fn log_negativity_at(params: &ProtocolParams, alpha: f64) -> Result<f64> {
    let out = run_realistic(&displaced(params, alpha))?;
    Ok(log_negativity(&out.rho_out_normalized)?.log_negativity)
}

/// Best real displacement `α = −β ∈ (0, 1]` for the realistic protocol.
///
/// Any local operation already in `params` is replaced. A 21-point grid on
/// `[0, 1]` selects a bracket around the best sample, which golden-section
/// search then narrows to `1e−4`.
pub fn optimize_displacement(params: &ProtocolParams) -> Result<Optimum> {
    if params.lambda.is_nan() || params.lambda <= 0.0 {
        return Err(Error::Guard { name: "lambda", value: params.lambda, guard: "lambda > 0" });
    }
    let step = ALPHA_MAX / (COARSE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_POINTS).map(|i| i as f64 * step).collect();
    let values = grid
        .par_iter()
        .map(|&a| log_negativity_at(params, a))
        .collect::<Result<Vec<_>>>()?;
    // first index wins ties so the result does not depend on evaluation order
    let best = (0..values.len()).fold(0, |best, i| if values[i] > values[best] { i } else { best });
    if best == 0 || best == values.len() - 1 {
        return Err(Error::NoInteriorMaximum { lo: grid[0], hi: grid[grid.len() - 1] });
    }
    let bracket = (grid[best - 1], grid[best + 1]);
    let (alpha_opt, e_n_at_opt, iterations) =
        golden_section_max(|a| log_negativity_at(params, a), bracket.0, bracket.1, BRACKET_TOLERANCE)?;
    let p_succ_at_opt = run_realistic(&displaced(params, alpha_opt))?.success_probability;
    Ok(Optimum { alpha_opt, e_n_at_opt, p_succ_at_opt, iterations, bracket })
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// Swept values in grid order.
    pub values: Vec<f64>,
    pub log_negativity: Option<f64>,
    pub success_probability: Option<f64>,
    pub error: Option<String>,
}

/// Cartesian product of the grids, first grid varying slowest.
pub fn grid_points(grids: &[SweepGrid]) -> Vec<Vec<f64>> {
    grids.iter().fold(vec![Vec::new()], |acc, g| {
        acc.iter()
            .flat_map(|prefix| {
                g.samples().iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn with_values(base: &ProtocolParams, grids: &[SweepGrid], values: &[f64]) -> ProtocolParams {
    let mut p = *base;
    for (g, &v) in grids.iter().zip(values) {
        g.param.apply(&mut p, v);
    }
    p
}

fn failed_all<T>(rows: &[T], failed: impl Fn(&T) -> bool) -> Result<()> {
    if !rows.is_empty() && rows.iter().all(failed) {
        Err(Error::SweepFailed(rows.len()))
    } else {
        Ok(())
    }
}

/// Runs the realistic protocol at every grid point, in parallel, returning
/// rows in grid order. Failed points carry their error tag.
pub fn sweep(base: &ProtocolParams, grids: &[SweepGrid]) -> Result<Vec<SweepRow>> {
    let rows: Vec<SweepRow> = grid_points(grids)
        .into_par_iter()
        .map(|values| {
            let result = run_realistic(&with_values(base, grids, &values))
                .and_then(|out| Ok((log_negativity(&out.rho_out_normalized)?.log_negativity, out.success_probability)));
            match result {
                Ok((e, p)) => SweepRow { values, log_negativity: Some(e), success_probability: Some(p), error: None },
                Err(e) => SweepRow { values, log_negativity: None, success_probability: None, error: Some(e.tag().into()) },
            }
        })
        .collect();
    failed_all(&rows, |r| r.error.is_some())?;
    Ok(rows)
}

/// Grid point of an optimized sweep: input entanglement, plain subtraction
/// and the optimally displaced protocol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizedRow {
    pub values: Vec<f64>,
    pub e_n_input: Option<f64>,
    pub e_n_subtraction: Option<f64>,
    pub e_n_displaced: Option<f64>,
    pub p_succ_subtraction: Option<f64>,
    pub p_succ_displaced: Option<f64>,
    pub alpha_opt: Option<f64>,
    pub error: Option<String>,
}

impl OptimizedRow {
    pub const COLUMNS: [&'static str; 6] =
        ["e_n_input", "e_n_subtraction", "e_n_displaced", "p_succ_subtraction", "p_succ_displaced", "alpha_opt"];

    pub fn columns(&self) -> [Option<f64>; 6] {
        [
            self.e_n_input,
            self.e_n_subtraction,
            self.e_n_displaced,
            self.p_succ_subtraction,
            self.p_succ_displaced,
            self.alpha_opt,
        ]
    }
}

fn optimized_point(params: &ProtocolParams, values: Vec<f64>) -> OptimizedRow {
    let mut row = OptimizedRow {
        values,
        e_n_input: None,
        e_n_subtraction: None,
        e_n_displaced: None,
        p_succ_subtraction: None,
        p_succ_displaced: None,
        alpha_opt: None,
        error: None,
    };
    let mut first_error = None;
    let mut note = |e: Error| {
        first_error.get_or_insert(e.tag().to_string());
    };
    match crate::protocols::input_state(params).and_then(|rho| log_negativity(&rho)) {
        Ok(r) => row.e_n_input = Some(r.log_negativity),
        Err(e) => note(e),
    }
    let plain = params.with_local_op(LocalOp::None);
    match run_realistic(&plain).and_then(|o| Ok((log_negativity(&o.rho_out_normalized)?, o.success_probability))) {
        Ok((r, p)) => {
            row.e_n_subtraction = Some(r.log_negativity);
            row.p_succ_subtraction = Some(p);
        }
        Err(e) => note(e),
    }
    match optimize_displacement(params) {
        Ok(opt) => {
            row.e_n_displaced = Some(opt.e_n_at_opt);
            row.p_succ_displaced = Some(opt.p_succ_at_opt);
            row.alpha_opt = Some(opt.alpha_opt);
        }
        Err(e) => note(e),
    }
    row.error = first_error;
    row
}

/// Like [`sweep`], but each point reports the input, plain-subtraction and
/// optimally displaced results. Grids over α, β or squeezing are rejected.
pub fn sweep_optimized(base: &ProtocolParams, grids: &[SweepGrid]) -> Result<Vec<OptimizedRow>> {
    if let Some(g) = grids
        .iter()
        .find(|g| matches!(g.param, SweepParam::Alpha | SweepParam::Beta | SweepParam::Squeezing))
    {
        return Err(Error::InvalidGrid(format!("cannot sweep {} while optimizing the displacement", g.param)));
    }
    let rows: Vec<OptimizedRow> = grid_points(grids)
        .into_par_iter()
        .map(|values| optimized_point(&with_values(base, grids, &values), values))
        .collect();
    failed_all(&rows, |r| r.columns().iter().all(Option::is_none))?;
    Ok(rows)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Result<f64> {
    const MIN_POINTS: usize = 4;
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, got: points.len() });
    }
    for &(x, y) in points {
        if x.is_nan() || x <= 0.0 {
            return Err(Error::Guard { name: "x", value: x, guard: "x > 0" });
        }
        if y.is_nan() || y <= 0.0 {
            return Err(Error::Guard { name: "p_succ", value: y, guard: "p_succ > 0" });
        }
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Guard { name: "x", value: points[0].0, guard: "distinct abscissae" });
    }
    Ok(sxy / sxx)
}
