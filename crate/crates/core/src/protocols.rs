//! Entanglement concentration of a two-mode squeezed vacuum by local photon
//! subtraction, optionally preceded by local displacement or squeezing.
//!
//! Two families live here. The ideal filters act on pure states with
//! ladder-operator combinations such as `(a + α) ⊗ (b + β)`. The realistic
//! protocol models the tap beam splitters, vacuum ancillas and on-off
//! detectors, and comes in two independent implementations:
//!
//! * [`run_realistic`] never leaves the two-mode space. Tracing out an
//!   ancilla that was mixed on a tap of reflectance `R` is the channel
//!   `Λ(ρ) = Σ_k K_k ρ K_k†` with `K_k = √(R^k/k!) (1−R)^{n̂/2} a^k`, the
//!   vacuum projection on the ancilla is the `k = 0` term `V`, and the click
//!   outcome `Π₁ = I − Π₀` gives `ρ_out = (Λ_A − V_A)(Λ_B − V_B)(σ)`, i.e.
//!   `Λ_AΛ_B − V_AΛ_B − Λ_AV_B + V_AV_B`. The product form is evaluated
//!   directly as `Σ_{k,l≥1}` so the small click term never comes out of a
//!   cancellation between order-one terms.
//! * [`run_bruteforce_oracle`] builds the four-mode pure state, applies the
//!   beam-splitter unitaries as matrices and projects the ancillas.

use num_complex::Complex64;

use crate::error::{guard, Error, Result};
use crate::fock::{
    annihilation, apply_ladder_channel, apply_two_mode, creation, dimension, embed, CMatrix, CVector, DensityMatrix,
    FockOperator, StateVector,
};
use crate::gaussian::{
    beam_splitter_unitary, displacement_operator, squeezing_operator, BeamSplitterSpec, DISPLACEMENT_GUARD,
    SQUEEZING_GUARD,
};
use crate::measures::{log_negativity, trace_distance, EntanglementReport};
use crate::states::{
    apply_loss, inefficiency_reduction, pure_loss_kraus, tmsv_pure, DetectorSpec, LossSpec, TmsvSpec,
    MAX_NORM_DEFICIT,
};

/// Success probabilities below this are numerically meaningless.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-15;
/// Largest cutoff the four-mode oracle accepts.
pub const BRUTEFORCE_MAX_CUTOFF: usize = 10;

/// Gaussian operation applied locally to both signal modes before the taps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LocalOp {
    None,
    Displacement { alpha: Complex64, beta: Complex64 },
    Squeezing { s: f64 },
}

impl LocalOp {
    /// Real displacements `D_A(α) ⊗ D_B(β)`.
    pub fn displacement(alpha: f64, beta: f64) -> Self {
        LocalOp::Displacement {
            alpha: Complex64::new(alpha, 0.0),
            beta: Complex64::new(beta, 0.0),
        }
    }
}

/// How detector inefficiency enters the realistic protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DetectorModel {
    /// Loss `1 − η` on each tapped ancilla before a perfect on-off detector.
    AncillaLoss,
    /// Perfect detectors behind taps of reduced reflectance `R′`, preceded by
    /// a two-mode loss of transmittance `T̃`. Dropping the `T̃` loss gives the
    /// approximation valid for `R ≪ 1`.
    Reparametrized { keep_transmission_loss: bool },
}

/// Physical parameters of one concentration run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolParams {
    pub lambda: f64,
    pub reflectance: f64,
    pub eta: f64,
    pub nu: f64,
    pub local_op: LocalOp,
    pub cutoff: usize,
    pub detector_model: DetectorModel,
}

impl ProtocolParams {
    pub const MIN_CUTOFF: usize = 4;
    pub const DEFAULT_CUTOFF: usize = 10;

    /// Perfect detectors, lossless channel, no local operation, cutoff 10.
    pub fn new(lambda: f64, reflectance: f64) -> Self {
        Self {
            lambda,
            reflectance,
            eta: 1.0,
            nu: 0.0,
            local_op: LocalOp::None,
            cutoff: Self::DEFAULT_CUTOFF,
            detector_model: DetectorModel::AncillaLoss,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_local_op(mut self, local_op: LocalOp) -> Self {
        self.local_op = local_op;
        self
    }

    pub fn with_displacement(self, alpha: f64, beta: f64) -> Self {
        self.with_local_op(LocalOp::displacement(alpha, beta))
    }

    pub fn with_detector_model(mut self, model: DetectorModel) -> Self {
        self.detector_model = model;
        self
    }

    pub fn tmsv_spec(&self) -> Result<TmsvSpec> {
        TmsvSpec::new(self.lambda, self.cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < Self::MIN_CUTOFF {
            return Err(Error::Cutoff { got: self.cutoff, min: Self::MIN_CUTOFF });
        }
        let deficit = self.tmsv_spec()?.truncation_deficit();
        if deficit > MAX_NORM_DEFICIT {
            return Err(Error::NormDeficit { deficit, limit: MAX_NORM_DEFICIT });
        }
        BeamSplitterSpec::new(self.reflectance)?;
        DetectorSpec::new(self.eta)?;
        LossSpec::new(self.nu)?;
        match self.local_op {
            LocalOp::None => {}
            LocalOp::Displacement { alpha, beta } => {
                for (name, v) in [("alpha", alpha), ("beta", beta)] {
                    if !(v.re.is_finite() && v.im.is_finite()) {
                        return Err(Error::NonFinite);
                    }
                    if v.norm() > DISPLACEMENT_GUARD {
                        return Err(Error::Truncation { name, value: v.norm(), limit: DISPLACEMENT_GUARD });
                    }
                }
            }
            LocalOp::Squeezing { s } => {
                guard(s.is_finite(), "squeezing", s, "finite")?;
                if s.abs() > SQUEEZING_GUARD {
                    return Err(Error::Truncation { name: "squeezing", value: s.abs(), limit: SQUEEZING_GUARD });
                }
            }
        }
        Ok(())
    }
}

/// Result of one realistic concentration run.
#[derive(Clone, Debug)]
pub struct ConcentrationOutcome {
    /// Conditional state; its trace is the success probability.
    pub rho_out_unnormalized: DensityMatrix,
    pub success_probability: f64,
    pub rho_out_normalized: DensityMatrix,
    pub params: ProtocolParams,
}

impl ConcentrationOutcome {
    pub fn entanglement(&self) -> Result<EntanglementReport> {
        log_negativity(&self.rho_out_normalized)
    }
}

fn require_two_modes(psi: &StateVector) -> Result<()> {
    if psi.modes() != 2 {
        return Err(Error::ModeCount { expected: 2, got: psi.modes() });
    }
    Ok(())
}

fn nonzero(psi: StateVector) -> Result<StateVector> {
    if psi.norm_squared() == 0.0 {
        Err(Error::ZeroNorm)
    } else {
        Ok(psi)
    }
}

/// Applies `op_a ⊗ op_b` to a two-mode state.
fn local_filter(psi: &StateVector, op_a: &FockOperator, op_b: &FockOperator) -> Result<StateVector> {
    require_two_modes(psi)?;
    let filter = embed(op_a, 1, 2)?.compose(&embed(op_b, 2, 2)?)?;
    nonzero(filter.apply(psi)?)
}

fn shifted_annihilation(cutoff: usize, shift: Complex64) -> Result<FockOperator> {
    annihilation(cutoff)?.add(&FockOperator::identity(1, cutoff).scale(shift))
}

/// `(a ⊗ b)|ψ⟩`, unnormalized.
pub fn ideal_subtraction_filter(psi: &StateVector) -> Result<StateVector> {
    ideal_displaced_filter(psi, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
}

/// `(a + α) ⊗ (b + β) |ψ⟩`, unnormalized.
pub fn ideal_displaced_filter(psi: &StateVector, alpha: Complex64, beta: Complex64) -> Result<StateVector> {
    let c = psi.cutoff();
    local_filter(psi, &shifted_annihilation(c, alpha)?, &shifted_annihilation(c, beta)?)
}

/// `[a cosh s + a† sinh s] ⊗ [b cosh s + b† sinh s] |ψ⟩`, unnormalized.
pub fn ideal_squeezed_filter(psi: &StateVector, s: f64) -> Result<StateVector> {
    require_two_modes(psi)?;
    if s.abs() > SQUEEZING_GUARD {
        return Err(Error::Truncation { name: "squeezing", value: s.abs(), limit: SQUEEZING_GUARD });
    }
    let c = psi.cutoff();
    let op = annihilation(c)?
        .scale(Complex64::new(s.cosh(), 0.0))
        .add(&creation(c)?.scale(Complex64::new(s.sinh(), 0.0)))?;
    local_filter(psi, &op, &op)
}

/// `(a + b)|ψ⟩`, the heralded non-local subtraction.
pub fn ideal_nonlocal_filter(psi: &StateVector) -> Result<StateVector> {
    require_two_modes(psi)?;
    let a = annihilation(psi.cutoff())?;
    let filter = embed(&a, 1, 2)?.add(&embed(&a, 2, 2)?)?;
    nonzero(filter.apply(psi)?)
}

/// The ideal filter that the realistic protocol approaches as `R → 0`.
pub fn ideal_filter_for(psi: &StateVector, local_op: LocalOp) -> Result<StateVector> {
    match local_op {
        LocalOp::None => ideal_subtraction_filter(psi),
        LocalOp::Displacement { alpha, beta } => ideal_displaced_filter(psi, alpha, beta),
        LocalOp::Squeezing { s } => ideal_squeezed_filter(psi, s),
    }
}

/// `L_A ⊗ L_B` for the configured local operation.
pub fn local_op_operator(local_op: LocalOp, cutoff: usize) -> Result<FockOperator> {
    let (a, b) = match local_op {
        LocalOp::None => return Ok(FockOperator::identity(2, cutoff)),
        LocalOp::Displacement { alpha, beta } => {
            (displacement_operator(alpha, cutoff)?, displacement_operator(beta, cutoff)?)
        }
        LocalOp::Squeezing { s } => {
            let sq = squeezing_operator(s, cutoff)?;
            (sq.clone(), sq)
        }
    };
    a.tensor(&b)
}

/// Two-mode squeezed vacuum sent through loss `ν` on each mode.
pub fn input_state(params: &ProtocolParams) -> Result<DensityMatrix> {
    let rho = tmsv_pure(params.tmsv_spec()?)?.projector();
    if params.nu == 0.0 {
        return Ok(rho);
    }
    let loss = LossSpec::new(params.nu)?;
    apply_loss(&apply_loss(&rho, 1, loss)?, 2, loss)
}

/// Conditional state after both taps click: `(Λ_A − N_A)(Λ_B − N_B)(σ)`,
/// summed as `Σ_{k,l} p(k) p(l) (K_k ⊗ K_l) σ (K_k ⊗ K_l)†` with
/// `p(k) = 1 − (1−η)^k` the click probability given `k` tapped photons.
fn heralded(sigma: &CMatrix, cutoff: usize, reflectance: f64, detector: DetectorSpec) -> Result<CMatrix> {
    let kraus = pure_loss_kraus(reflectance, cutoff);
    let on_b = apply_ladder_channel(sigma, 2, 2, &kraus, |k| detector.click(k))?;
    apply_ladder_channel(&on_b, 1, 2, &kraus, |k| detector.click(k))
}

fn outcome(params: &ProtocolParams, rho_out: CMatrix) -> Result<ConcentrationOutcome> {
    let rho_out_unnormalized = DensityMatrix::from_matrix(rho_out, 2, params.cutoff)?;
    let success_probability = rho_out_unnormalized.trace();
    if success_probability.is_nan() || success_probability < MIN_SUCCESS_PROBABILITY {
        return Err(Error::ZeroSuccess { probability: success_probability });
    }
    let rho_out_normalized = rho_out_unnormalized.normalize()?;
    rho_out_normalized.check_psd()?;
    Ok(ConcentrationOutcome {
        rho_out_unnormalized,
        success_probability,
        rho_out_normalized,
        params: *params,
    })
}

/// Two-mode state right before the taps: input loss, then the local operation.
pub fn pre_tap_state(params: &ProtocolParams) -> Result<DensityMatrix> {
    let rho_in = input_state(params)?;
    local_op_operator(params.local_op, params.cutoff)?.conjugate(&rho_in)
}

/// Realistic protocol evaluated with two-mode Kraus maps.
pub fn run_realistic(params: &ProtocolParams) -> Result<ConcentrationOutcome> {
    params.validate()?;
    let sigma = pre_tap_state(params)?;
    let rho_out = match params.detector_model {
        DetectorModel::AncillaLoss => {
            heralded(sigma.matrix(), params.cutoff, params.reflectance, DetectorSpec::new(params.eta)?)?
        }
        DetectorModel::Reparametrized { keep_transmission_loss } => {
            let (r_eff, t_tilde) = inefficiency_reduction(params.eta, params.reflectance);
            let sigma = if keep_transmission_loss {
                let loss = LossSpec::new(1.0 - t_tilde)?;
                apply_loss(&apply_loss(&sigma, 1, loss)?, 2, loss)?
            } else {
                sigma
            };
            heralded(sigma.matrix(), params.cutoff, r_eff, DetectorSpec::new(1.0)?)?
        }
    };
    outcome(params, rho_out)
}

/// Reduced signal states for all four combinations of the two on-off outcomes.
#[derive(Clone, Debug)]
pub struct PovmBranches {
    pub click_click: CMatrix,
    pub click_none: CMatrix,
    pub none_click: CMatrix,
    pub none_none: CMatrix,
}

impl PovmBranches {
    pub fn total(&self) -> CMatrix {
        &self.click_click + &self.click_none + &self.none_click + &self.none_none
    }
}

/// Four-mode evaluation: `|ψ_AB⟩|00⟩_CD`, local operation, the two tap
/// unitaries applied as matrices, then the on-off POVM of efficiency `η` on
/// modes C and D and a trace over them. Mode order is A, B, C, D.
pub fn bruteforce_branches(params: &ProtocolParams) -> Result<PovmBranches> {
    params.validate()?;
    if params.nu != 0.0 {
        return Err(Error::MixedInput { nu: params.nu });
    }
    if params.cutoff > BRUTEFORCE_MAX_CUTOFF {
        return Err(Error::MemoryGuard { cutoff: params.cutoff, limit: BRUTEFORCE_MAX_CUTOFF });
    }
    let cutoff = params.cutoff;
    let pair = dimension(2, cutoff);
    let psi = local_op_operator(params.local_op, cutoff)?.apply(&tmsv_pure(params.tmsv_spec()?)?)?;

    let mut amps = CVector::zeros(pair * pair);
    for (ab, amp) in psi.amplitudes().iter().enumerate() {
        amps[ab * pair] = *amp;
    }
    let mut full = StateVector::new(amps, 4, cutoff)?;
    let tap = beam_splitter_unitary(BeamSplitterSpec::new(params.reflectance)?, cutoff)?;
    full = apply_two_mode(&full, &tap, 1, 3)?;
    full = apply_two_mode(&full, &tap, 2, 4)?;

    // rows: (a, b); columns: ancilla occupations (c, d)
    let psi_mat = CMatrix::from_fn(pair, pair, |ab, cd| full.amplitudes()[ab * pair + cd]);
    let detector = DetectorSpec::new(params.eta)?;
    let base = cutoff + 1;
    let branch = |on_c: bool, on_d: bool| -> CMatrix {
        let weight = |n: usize, on: bool| if on { detector.click(n) } else { detector.no_click(n) };
        let mut x = psi_mat.clone();
        for cd in 0..pair {
            let w = weight(cd / base, on_c) * weight(cd % base, on_d);
            x.column_mut(cd).scale_mut(w.sqrt());
        }
        &x * x.adjoint()
    };
    Ok(PovmBranches {
        click_click: branch(true, true),
        click_none: branch(true, false),
        none_click: branch(false, true),
        none_none: branch(false, false),
    })
}

/// Validation oracle for [`run_realistic`]; pure inputs only, cutoff ≤ 10.
/// Detector inefficiency is always modelled physically, through the
/// efficiency-`η` POVM, whatever `detector_model` says.
pub fn run_bruteforce_oracle(params: &ProtocolParams) -> Result<ConcentrationOutcome> {
    let branches = bruteforce_branches(params)?;
    outcome(params, branches.click_click)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitPoint {
    pub reflectance: f64,
    /// Trace distance between the normalized output and the ideal-filter projector.
    pub trace_distance: f64,
    pub log_negativity: f64,
    pub success_probability: f64,
    /// `Tr ρ²` of the normalized output; below one only through multi-photon clicks.
    pub purity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealLimitComparison {
    pub ideal_log_negativity: f64,
    pub points: Vec<LimitPoint>,
}

impl IdealLimitComparison {
    /// True when the trace distance shrinks strictly along the supplied sequence.
    pub fn is_monotone(&self) -> bool {
        self.points.windows(2).all(|w| w[1].trace_distance < w[0].trace_distance)
    }
}

/// Runs the realistic protocol for each reflectance in turn and compares the
/// normalized output with the normalized ideal-filter state. The local
/// operation is never undone after the taps, so the reference is
/// `(L_A ⊗ L_B) F |ψ⟩` with `F` the ideal filter.
pub fn realistic_to_ideal_limit(params: &ProtocolParams, reflectances: &[f64]) -> Result<IdealLimitComparison> {
    guard(params.nu == 0.0, "nu", params.nu, "nu = 0 for the ideal-filter limit")?;
    let psi = tmsv_pure(params.tmsv_spec()?)?;
    let filtered = ideal_filter_for(&psi, params.local_op)?;
    let ideal = local_op_operator(params.local_op, params.cutoff)?
        .apply(&filtered)?
        .normalized()?
        .projector();
    let ideal_log_negativity = log_negativity(&ideal)?.log_negativity;
    let points = reflectances
        .iter()
        .map(|&r| {
            let mut p = *params;
            p.reflectance = r;
            let out = run_realistic(&p)?;
            let rho = &out.rho_out_normalized;
            Ok(LimitPoint {
                reflectance: r,
                trace_distance: trace_distance(rho, &ideal)?,
                log_negativity: out.entanglement()?.log_negativity,
                success_probability: out.success_probability,
                purity: (rho.matrix() * rho.matrix()).trace().re,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdealLimitComparison { ideal_log_negativity, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::max_abs;
    use crate::measures::fidelity_pure;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn tmsv(lambda: f64) -> StateVector {
        tmsv_pure(TmsvSpec::new(lambda, 10).unwrap()).unwrap()
    }

    #[test]
    fn subtraction_filter_coefficients() {
        let lambda: f64 = 0.2;
        let out = ideal_subtraction_filter(&tmsv(lambda)).unwrap();
        let head = (1.0 - lambda * lambda).sqrt();
        for n in 0..10 {
            let want = head * (n + 1) as f64 * lambda.powi(n as i32 + 1);
            assert_abs_diff_eq!(out.amplitude(&[n, n]).re, want, epsilon = 1e-15);
        }
        let vac = StateVector::basis(&[0, 0], 4).unwrap();
        assert_eq!(ideal_subtraction_filter(&vac).unwrap_err(), Error::ZeroNorm);
        let one = StateVector::basis(&[1, 1], 4).unwrap();
        assert_eq!(ideal_subtraction_filter(&one).unwrap(), vac);
    }

    #[test]
    fn displaced_filter_reduces_to_subtraction() {
        let psi = tmsv(0.3);
        let zero = c(0.0);
        assert_eq!(ideal_displaced_filter(&psi, zero, zero).unwrap(), ideal_subtraction_filter(&psi).unwrap());
    }

    #[test]
    fn displaced_filter_cancels_vacuum() {
        let lambda: f64 = 0.15;
        let alpha = 0.4;
        let out = ideal_displaced_filter(&tmsv(lambda), c(alpha), c(-lambda / alpha)).unwrap();
        assert!(out.amplitude(&[0, 0]).norm() < 1e-12);
    }

    #[test]
    fn displaced_filter_yields_single_photon_entanglement() {
        let out = ideal_displaced_filter(&tmsv(0.01), c(0.1), c(-0.1)).unwrap();
        let s = 0.5f64.sqrt();
        let target = StateVector::from_terms(&[(c(s), &[1, 0]), (c(-s), &[0, 1])], 2, 10).unwrap();
        let f = fidelity_pure(&out.normalized().unwrap().projector(), &target).unwrap();
        assert!(f >= 0.99, "fidelity {f}");
    }

    #[test]
    fn squeezed_filter_yields_photon_number_correlations() {
        let h = 0.5f64.sqrt();
        let target = StateVector::from_terms(&[(c(h), &[0, 0]), (c(h), &[1, 1])], 2, 10).unwrap();
        let fidelity = |lambda: f64| {
            let out = ideal_squeezed_filter(&tmsv(lambda), lambda.sqrt().atanh()).unwrap();
            fidelity_pure(&out.normalized().unwrap().projector(), &target).unwrap()
        };
        // |02⟩ and |20⟩ each carry weight 2λ relative to |00⟩ at leading order
        assert_abs_diff_eq!(fidelity(0.01), 1.0 / 1.02, epsilon = 2e-3);
        assert!(fidelity(0.004) >= 0.99);
        let lambda: f64 = 0.01;
        let s = lambda.sqrt().atanh();
        let out = ideal_squeezed_filter(&tmsv(lambda), s).unwrap();
        // |02⟩ relative to the |00⟩ + |11⟩ amplitude is of order √λ
        let ratio = out.amplitude(&[0, 2]).norm() / out.amplitude(&[0, 0]).norm();
        let expected = (2.0 * s).sinh() / 2f64.sqrt() / s.cosh().powi(2);
        assert_abs_diff_eq!(ratio, expected, epsilon = 0.05 * expected);
        assert!(ratio < 2.0 * lambda.sqrt());
        assert_eq!(ideal_squeezed_filter(&tmsv(lambda), 0.0).unwrap(), ideal_subtraction_filter(&tmsv(lambda)).unwrap());
    }

    #[test]
    fn nonlocal_filter_leading_terms() {
        let lambda: f64 = 0.05;
        let out = ideal_nonlocal_filter(&tmsv(lambda)).unwrap();
        let head = (1.0 - lambda * lambda).sqrt();
        assert_abs_diff_eq!(out.amplitude(&[0, 1]).re, head * lambda, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(&[1, 0]).re, head * lambda, epsilon = 1e-15);
        assert_eq!(out.amplitude(&[0, 0]).norm(), 0.0);
        let vac = StateVector::basis(&[0, 0], 4).unwrap();
        assert_eq!(ideal_nonlocal_filter(&vac).unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn click_map_equals_inclusion_exclusion() {
        let params = ProtocolParams::new(0.2, 0.1).with_displacement(0.3, -0.25).with_nu(0.1).with_eta(0.7);
        let sigma = pre_tap_state(&params).unwrap();
        let det = DetectorSpec::new(params.eta).unwrap();
        let factored = heralded(sigma.matrix(), 10, params.reflectance, det).unwrap();

        let kraus = pure_loss_kraus(params.reflectance, 10);
        let trace_anc = |m: &CMatrix, mode| apply_ladder_channel(m, mode, 2, &kraus, |_| 1.0).unwrap();
        let no_click = |m: &CMatrix, mode| apply_ladder_channel(m, mode, 2, &kraus, |k| det.no_click(k)).unwrap();
        let s = sigma.matrix();
        let expanded = trace_anc(&trace_anc(s, 2), 1) - no_click(&trace_anc(s, 2), 1) - trace_anc(&no_click(s, 2), 1)
            + no_click(&no_click(s, 2), 1);
        assert!(max_abs(&(factored - expanded)) < 1e-14);
    }

    #[test]
    fn realistic_matches_bruteforce() {
        let params = ProtocolParams::new(0.15, 0.1).with_displacement(0.35, -0.35);
        let fast = run_realistic(&params).unwrap();
        let slow = run_bruteforce_oracle(&params).unwrap();
        assert!(max_abs(&(fast.rho_out_unnormalized.matrix() - slow.rho_out_unnormalized.matrix())) < 1e-9);
        assert_abs_diff_eq!(fast.success_probability / slow.success_probability, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn bruteforce_branches_sum_to_reduced_state() {
        let params = ProtocolParams::new(0.2, 0.05).with_eta(0.6).with_displacement(0.2, -0.1);
        let branches = bruteforce_branches(&params).unwrap();
        let sigma = pre_tap_state(&params).unwrap();
        let kraus = pure_loss_kraus(params.reflectance, 10);
        let traced = apply_ladder_channel(sigma.matrix(), 1, 2, &kraus, |_| 1.0).unwrap();
        let traced = apply_ladder_channel(&traced, 2, 2, &kraus, |_| 1.0).unwrap();
        assert!(max_abs(&(branches.total() - traced)) < 1e-9);
    }

    #[test]
    fn vacuum_input_never_clicks() {
        let params = ProtocolParams::new(0.0, 0.1);
        assert_eq!(run_bruteforce_oracle(&params).unwrap_err(), Error::ZeroSuccess { probability: 0.0 });
        assert_eq!(run_realistic(&params).unwrap_err(), Error::ZeroSuccess { probability: 0.0 });
    }

    #[test]
    fn oracle_guards() {
        let mixed = ProtocolParams::new(0.2, 0.1).with_nu(0.1);
        assert!(matches!(run_bruteforce_oracle(&mixed), Err(Error::MixedInput { .. })));
        let big = ProtocolParams::new(0.2, 0.1).with_cutoff(11);
        assert!(matches!(run_bruteforce_oracle(&big), Err(Error::MemoryGuard { .. })));
    }

    #[test]
    fn params_validation() {
        assert!(matches!(ProtocolParams::new(0.2, 0.1).with_cutoff(3).validate(), Err(Error::Cutoff { .. })));
        assert!(matches!(ProtocolParams::new(0.9, 0.1).validate(), Err(Error::NormDeficit { .. })));
        assert!(ProtocolParams::new(0.2, 1.0).validate().is_err());
        assert!(ProtocolParams::new(0.2, 0.1).with_eta(0.0).validate().is_err());
        assert!(ProtocolParams::new(0.2, 0.1).with_nu(1.5).validate().is_err());
        assert!(matches!(
            ProtocolParams::new(0.2, 0.1).with_displacement(2.5, 0.0).validate(),
            Err(Error::Truncation { name: "alpha", .. })
        ));
        assert!(matches!(
            ProtocolParams::new(0.2, 0.1).with_local_op(LocalOp::Squeezing { s: 2.0 }).validate(),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn success_never_exceeds_single_click_probability() {
        let params = ProtocolParams::new(0.25, 0.1).with_displacement(0.3, -0.3).with_nu(0.1);
        let out = run_realistic(&params).unwrap();
        let sigma = pre_tap_state(&params).unwrap();
        let kraus = pure_loss_kraus(params.reflectance, 10);
        let det = DetectorSpec::new(1.0).unwrap();
        for mode in 1..=2 {
            let single = apply_ladder_channel(sigma.matrix(), mode, 2, &kraus, |k| det.click(k)).unwrap();
            assert!(out.success_probability <= single.trace().re);
        }
    }

    fn e_n(out: &ConcentrationOutcome) -> f64 {
        out.entanglement().unwrap().log_negativity
    }

    #[test]
    fn mode_swap_symmetry() {
        let base = ProtocolParams::new(0.2, 0.1).with_nu(0.05).with_eta(0.9);
        let ab = run_realistic(&base.with_displacement(0.4, -0.15)).unwrap();
        let ba = run_realistic(&base.with_displacement(-0.15, 0.4)).unwrap();
        let swapped = crate::fock::swap_modes(&ba.rho_out_unnormalized).unwrap();
        assert!(max_abs(&(swapped.matrix() - ab.rho_out_unnormalized.matrix())) < 1e-12);
        assert_abs_diff_eq!(ab.success_probability, ba.success_probability, epsilon = 1e-12);
        assert_abs_diff_eq!(e_n(&ab), e_n(&ba), epsilon = 1e-12);
    }

    #[test]
    fn opposite_phases_leave_entanglement_unchanged() {
        let base = ProtocolParams::new(0.15, 0.1);
        let (alpha, beta) = (c(0.3), c(-0.25));
        let reference = e_n(&run_realistic(&base.with_local_op(LocalOp::Displacement { alpha, beta })).unwrap());
        for phi in [0.3, 1.1, 2.5, -0.8] {
            let rot = Complex64::from_polar(1.0, phi);
            let op = LocalOp::Displacement { alpha: alpha * rot, beta: beta * rot.conj() };
            assert_abs_diff_eq!(e_n(&run_realistic(&base.with_local_op(op)).unwrap()), reference, epsilon = 1e-10);
        }
    }

    #[test]
    fn vacuum_cancellation_lowers_success() {
        for lambda in [0.01f64, 0.03, 0.05] {
            let plain = run_realistic(&ProtocolParams::new(lambda, 0.1)).unwrap();
            let a = lambda.sqrt();
            let displaced = run_realistic(&ProtocolParams::new(lambda, 0.1).with_displacement(a, -lambda / a)).unwrap();
            assert!(displaced.success_probability < plain.success_probability);
        }
    }

    #[test]
    fn detector_models_agree() {
        let base = ProtocolParams::new(0.2, 0.05).with_eta(0.8).with_displacement(0.3, -0.3);
        let physical = run_realistic(&base).unwrap();
        let reparam = run_realistic(
            &base.with_detector_model(DetectorModel::Reparametrized { keep_transmission_loss: true }),
        )
        .unwrap();
        let d = trace_distance(&physical.rho_out_normalized, &reparam.rho_out_normalized).unwrap();
        assert!(d < 1e-10, "trace distance {d}");
        assert_abs_diff_eq!(reparam.success_probability / physical.success_probability, 1.0, epsilon = 1e-10);
        let oracle = run_bruteforce_oracle(&base).unwrap();
        assert!(max_abs(&(oracle.rho_out_unnormalized.matrix() - physical.rho_out_unnormalized.matrix())) < 1e-9);
        // without the T̃ loss the states differ at order (1−η)R
        let approx = run_realistic(
            &base.with_detector_model(DetectorModel::Reparametrized { keep_transmission_loss: false }),
        )
        .unwrap();
        let d = trace_distance(&physical.rho_out_normalized, &approx.rho_out_normalized).unwrap();
        assert!(d > 1e-6 && d < 0.05, "trace distance {d}");
    }

    #[test]
    fn realistic_output_approaches_ideal_filter() {
        let rs = [0.1, 0.05, 0.02, 0.01];
        let plain = realistic_to_ideal_limit(&ProtocolParams::new(0.1, 0.1), &rs).unwrap();
        assert!(plain.is_monotone(), "{plain:?}");
        let a = 0.05f64.sqrt();
        let displaced = realistic_to_ideal_limit(&ProtocolParams::new(0.05, 0.1).with_displacement(a, -a), &rs).unwrap();
        assert!(displaced.is_monotone(), "{displaced:?}");
        assert!(displaced.points.iter().all(|p| p.purity < 1.0 && p.log_negativity < displaced.ideal_log_negativity));
        let mixed = ProtocolParams::new(0.1, 0.1).with_nu(0.1);
        assert!(matches!(realistic_to_ideal_limit(&mixed, &rs), Err(Error::Guard { name: "nu", .. })));
    }
}
