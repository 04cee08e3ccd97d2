//! Entanglement and distance measures on two-mode states.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{hermitian_eigenvalues, partial_transpose, DensityMatrix, StateVector, PSD_FLOOR};
use crate::protocols::ConcentrationOutcome;

/// Logarithmic negativity in e-bits together with the spectrum data it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub log_negativity: f64,
    /// `‖ρ^{T_A}‖₁` of the trace-normalized state.
    pub trace_norm_pt: f64,
    pub min_pt_eigenvalue: f64,
}

/// `E_N(ρ) = log₂ ‖ρ^{T_A}‖₁` of the trace-normalized state.
///
/// Partial-transpose eigenvalues above `−1e−10` are treated as round-off, so
/// PPT states report exactly zero.
pub fn log_negativity(rho: &DensityMatrix) -> Result<EntanglementReport> {
    if rho.modes() != 2 {
        return Err(Error::ModeCount { expected: 2, got: rho.modes() });
    }
    let rho = if rho.is_normalized() { rho.clone() } else { rho.normalize()? };
    rho.check_psd()?;
    let pt = partial_transpose(&rho, 1)?;
    let spectrum = hermitian_eigenvalues(pt.matrix())?;
    let min_pt_eigenvalue = spectrum[0];
    let trace_norm_pt: f64 = spectrum.iter().map(|x| x.abs()).sum();
    let log_negativity = if min_pt_eigenvalue >= PSD_FLOOR {
        0.0
    } else {
        trace_norm_pt.max(1.0).log2()
    };
    Ok(EntanglementReport {
        log_negativity,
        trace_norm_pt,
        min_pt_eigenvalue,
    })
}

/// `⟨φ|ρ|φ⟩` for a normalized target; `rho` is trace-normalized first.
pub fn fidelity_pure(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    let norm_squared = target.norm_squared();
    if (norm_squared - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_squared });
    }
    if rho.dim() != target.amplitudes().len() {
        return Err(Error::Dimension {
            expected: rho.dim(),
            got: target.amplitudes().len(),
        });
    }
    let rho = if rho.is_normalized() { rho.clone() } else { rho.normalize()? };
    let phi = target.amplitudes();
    Ok((phi.adjoint() * rho.matrix() * phi)[(0, 0)].re)
}

/// `E_N(output) − E_N(input)`; negative values are reported as they are.
pub fn entanglement_gain(outcome: &ConcentrationOutcome, input: &DensityMatrix) -> Result<f64> {
    let out = log_negativity(&outcome.rho_out_normalized)?;
    let inp = log_negativity(input)?;
    Ok(out.log_negativity - inp.log_negativity)
}

/// `½ ‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension { expected: rho.dim(), got: sigma.dim() });
    }
    let diff = rho.matrix() - sigma.matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff)?.iter().map(|x| x.abs()).sum::<f64>())
}
