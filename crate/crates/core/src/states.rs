//! Input states, pure-loss channels and the detector-inefficiency
//! reparametrization.

use num_complex::Complex64;

use crate::error::{guard, Error, Result};
use crate::fock::{apply_ladder_channel, DensityMatrix, LadderKraus, StateVector};

/// Largest accepted truncation deficit of the two-mode squeezed vacuum.
pub const MAX_NORM_DEFICIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmsvSpec {
    lambda: f64,
    cutoff: usize,
}

impl TmsvSpec {
    /// `lambda = tanh r` must lie in `[0, 1)`.
    pub fn new(lambda: f64, cutoff: usize) -> Result<Self> {
        guard((0.0..1.0).contains(&lambda), "lambda", lambda, "0 <= lambda < 1")?;
        if cutoff == 0 {
            return Err(Error::Cutoff { got: 0, min: 1 });
        }
        Ok(Self { lambda, cutoff })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `1 − (1−λ²) Σ_{n≤cutoff} λ^{2n}`, which sums to `λ^{2(cutoff+1)}`.
    pub fn truncation_deficit(&self) -> f64 {
        self.lambda.powi(2 * (self.cutoff as i32 + 1))
    }
}

/// `√(1−λ²) Σ_n λ^n |n,n⟩` truncated at the cutoff, not renormalized.
pub fn tmsv_pure(spec: TmsvSpec) -> Result<StateVector> {
    let deficit = spec.truncation_deficit();
    if deficit > MAX_NORM_DEFICIT {
        return Err(Error::NormDeficit { deficit, limit: MAX_NORM_DEFICIT });
    }
    let lambda = spec.lambda;
    let head = (1.0 - lambda * lambda).sqrt();
    let terms: Vec<(Complex64, [usize; 2])> = (0..=spec.cutoff)
        .map(|n| (Complex64::new(head * lambda.powi(n as i32), 0.0), [n, n]))
        .collect();
    let refs: Vec<(Complex64, &[usize])> = terms.iter().map(|(c, occ)| (*c, occ.as_slice())).collect();
    StateVector::from_terms(&refs, 2, spec.cutoff)
}

/// Loss factor `ν` of a pure-loss channel; its transmittance is `1 − ν`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec {
    nu: f64,
}

impl LossSpec {
    pub fn new(nu: f64) -> Result<Self> {
        guard((0.0..=1.0).contains(&nu), "nu", nu, "0 <= nu <= 1")?;
        Ok(Self { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn transmittance(&self) -> f64 {
        1.0 - self.nu
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Kraus operators `K_k = √(ν^k/k!) (1−ν)^{n̂/2} a^k`, `k = 0..=cutoff`, of a
/// pure-loss channel with loss `ν`. Their nonzero elements are
/// `⟨n−k|K_k|n⟩ = √(C(n,k) ν^k (1−ν)^{n−k})`.
///
/// The same family describes a tap beam splitter of reflectance `ν` followed
/// by a photon-number measurement of the ancilla with outcome `k`.
pub fn pure_loss_kraus(nu: f64, cutoff: usize) -> Vec<LadderKraus> {
    (0..=cutoff)
        .map(|k| {
            let weights = (0..=cutoff)
                .map(|n| {
                    if n < k {
                        0.0
                    } else {
                        (binomial(n, k) * nu.powi(k as i32) * (1.0 - nu).powi((n - k) as i32)).sqrt()
                    }
                })
                .collect();
            LadderKraus::new(k, weights)
        })
        .collect()
}

/// Sends `mode` of `rho` through a pure-loss channel.
pub fn apply_loss(rho: &DensityMatrix, mode: usize, spec: LossSpec) -> Result<DensityMatrix> {
    if spec.nu == 0.0 {
        return Ok(rho.clone());
    }
    let kraus = pure_loss_kraus(spec.nu, rho.cutoff());
    let out = apply_ladder_channel(rho.matrix(), mode, rho.modes(), &kraus, |_| 1.0)?;
    DensityMatrix::from_matrix(out, rho.modes(), rho.cutoff())
}

/// On-off detector with efficiency `η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorSpec {
    eta: f64,
}

impl DetectorSpec {
    pub fn new(eta: f64) -> Result<Self> {
        guard(eta > 0.0 && eta <= 1.0, "eta", eta, "0 < eta <= 1")?;
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Probability of no click given `k` photons, `(1−η)^k`.
    pub fn no_click(&self, photons: usize) -> f64 {
        (1.0 - self.eta).powi(photons as i32)
    }

    /// Probability of a click given `k` photons.
    pub fn click(&self, photons: usize) -> f64 {
        1.0 - self.no_click(photons)
    }
}

/// Maps a tap of reflectance `R` read out with efficiency `η` onto an
/// equivalent perfect-detector tap: returns `(R′, T̃)` with
/// `R′ = ηR / [1 − (1−η)R]` and `T̃ = 1 − (1−η)R` the transmittance of the
/// loss that precedes it.
pub fn inefficiency_reduction(eta: f64, reflectance: f64) -> (f64, f64) {
    let t_tilde = 1.0 - (1.0 - eta) * reflectance;
    (eta * reflectance / t_tilde, t_tilde)
}
