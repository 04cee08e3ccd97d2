//! Truncated Fock matrices of the local Gaussian unitaries: displacement,
//! single-mode squeezing and the tap beam splitter.
//!
//! Displacement and squeezing are exponentiated in a padded space and
//! cropped to the requested cutoff. Exponentiating the generator directly at
//! the working cutoff corrupts the highest retained levels, so the pad starts
//! at [`TRUNCATION_PAD`] and doubles until the cropped block is stable to
//! [`CROP_TOLERANCE`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{annihilation, CMatrix, FockOperator};

pub const TRUNCATION_PAD: usize = 10;
pub const CROP_TOLERANCE: f64 = 1e-12;
const MAX_PAD: usize = 320;
pub const DISPLACEMENT_GUARD: f64 = 2.0;
pub const SQUEEZING_GUARD: f64 = 1.5;

fn exp_cropped(generator: impl Fn(usize) -> Result<CMatrix>, cutoff: usize) -> Result<FockOperator> {
    let d = cutoff + 1;
    let crop = |pad: usize| -> Result<CMatrix> {
        Ok(generator(cutoff + pad)?.exp().view((0, 0), (d, d)).into_owned())
    };
    let mut pad = TRUNCATION_PAD;
    let mut current = crop(pad)?;
    while pad < MAX_PAD {
        pad *= 2;
        let next = crop(pad)?;
        let change = (&next - &current).iter().map(|z| z.norm()).fold(0.0, f64::max);
        current = next;
        if change < CROP_TOLERANCE {
            break;
        }
    }
    FockOperator::new(current, 1, cutoff)
}

/// `D(α) = exp(α a† − α* a)`, so that `D†(α) a D(α) = a + α`.
pub fn displacement_operator(alpha: Complex64, cutoff: usize) -> Result<FockOperator> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::NonFinite);
    }
    if alpha.norm() > DISPLACEMENT_GUARD {
        return Err(Error::Truncation {
            name: "alpha",
            value: alpha.norm(),
            limit: DISPLACEMENT_GUARD,
        });
    }
    if cutoff == 0 {
        return Err(Error::Cutoff { got: 0, min: 1 });
    }
    let generator = |inner: usize| -> Result<CMatrix> {
        let a = annihilation(inner)?.into_matrix();
        Ok(a.adjoint() * alpha - a * alpha.conj())
    };
    exp_cropped(generator, cutoff)
}

/// `S(s) = exp(½ s (a†² − a²))`, so that `S†(s) a S(s) = a cosh s + a† sinh s`.
pub fn squeezing_operator(s: f64, cutoff: usize) -> Result<FockOperator> {
    if !s.is_finite() {
        return Err(Error::NonFinite);
    }
    if s.abs() > SQUEEZING_GUARD {
        return Err(Error::Truncation {
            name: "squeezing",
            value: s.abs(),
            limit: SQUEEZING_GUARD,
        });
    }
    if cutoff == 0 {
        return Err(Error::Cutoff { got: 0, min: 1 });
    }
    let generator = |inner: usize| -> Result<CMatrix> {
        let a = annihilation(inner)?.into_matrix();
        let a2 = &a * &a;
        Ok((a2.adjoint() - a2) * Complex64::new(0.5 * s, 0.0))
    };
    exp_cropped(generator, cutoff)
}

/// Intensity reflectance of a tap beam splitter.
///
/// Convention: `a → √(1−R) a + √R c` and `c → √(1−R) c − √R a` in the
/// Heisenberg picture, so a signal photon leaves as
/// `√(1−R)|1,0⟩ − √R|0,1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterSpec {
    reflectance: f64,
}

impl BeamSplitterSpec {
    pub fn new(reflectance: f64) -> Result<Self> {
        crate::error::guard(
            (0.0..1.0).contains(&reflectance),
            "reflectance",
            reflectance,
            "0 <= R < 1",
        )?;
        Ok(Self { reflectance })
    }

    pub fn reflectance(&self) -> f64 {
        self.reflectance
    }

    pub fn transmittance(&self) -> f64 {
        1.0 - self.reflectance
    }
}

/// Two-mode (signal, ancilla) beam-splitter unitary, built block by block in
/// total photon number from binomial expansions of the transformed creation
/// operators. Blocks whose total photon number exceeds the cutoff are
/// truncated; all others are exactly unitary.
pub fn beam_splitter_unitary(spec: BeamSplitterSpec, cutoff: usize) -> Result<FockOperator> {
    if cutoff == 0 {
        return Err(Error::Cutoff { got: 0, min: 1 });
    }
    let t = spec.transmittance().sqrt();
    let r = spec.reflectance().sqrt();
    let base = cutoff + 1;
    let fact: Vec<f64> = (0..=2 * cutoff)
        .scan(1.0, |acc, n| {
            if n > 0 {
                *acc *= n as f64;
            }
            Some(*acc)
        })
        .collect();
    let mut m = CMatrix::zeros(base * base, base * base);
    for n_sig in 0..base {
        for n_anc in 0..base {
            // coefficients of a†^k c†^(N-k) in (t a† − r c†)^n_sig (r a† + t c†)^n_anc
            let mut poly = vec![1.0f64];
            for (x, y, times) in [(t, -r, n_sig), (r, t, n_anc)] {
                for _ in 0..times {
                    let mut next = vec![0.0; poly.len() + 1];
                    for (k, &p) in poly.iter().enumerate() {
                        next[k + 1] += x * p;
                        next[k] += y * p;
                    }
                    poly = next;
                }
            }
            let total = n_sig + n_anc;
            let norm = (fact[n_sig] * fact[n_anc]).sqrt();
            for (k, &p) in poly.iter().enumerate() {
                let rest = total - k;
                if k > cutoff || rest > cutoff || p == 0.0 {
                    continue;
                }
                let amp = p * (fact[k] * fact[rest]).sqrt() / norm;
                m[(k * base + rest, n_sig * base + n_anc)] = Complex64::new(amp, 0.0);
            }
        }
    }
    FockOperator::new(m, 2, cutoff)
}
