//! Dense linear algebra on truncated multimode Fock spaces.
//!
//! Every mode keeps levels `0..=cutoff`, so a `k`-mode space has dimension
//! `(cutoff + 1)^k`. Occupations `(n_1, …, n_k)` map to the flat index
//! `Σ n_i (cutoff + 1)^(k - i)`: mode 1 is the most significant digit. Modes
//! are addressed 1-based throughout the public API, and every basis
//! conversion in the crate goes through [`flat_index`] / [`occupations`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Floor below which an eigenvalue of a physical state counts as a genuine
/// negativity rather than round-off.
pub const PSD_FLOOR: f64 = -1e-10;

const HERMITIAN_TOL: f64 = 1e-10;
const NORMALIZED_TOL: f64 = 1e-12;

pub fn dimension(modes: usize, cutoff: usize) -> usize {
    (cutoff + 1).pow(modes as u32)
}

/// Flat basis index of an occupation tuple (mode 1 most significant).
pub fn flat_index(occupations: &[usize], cutoff: usize) -> usize {
    occupations.iter().fold(0, |acc, &n| {
        debug_assert!(n <= cutoff);
        acc * (cutoff + 1) + n
    })
}

/// Inverse of [`flat_index`].
pub fn occupations(index: usize, modes: usize, cutoff: usize) -> Vec<usize> {
    let base = cutoff + 1;
    let mut out = vec![0; modes];
    let mut rest = index;
    for slot in out.iter_mut().rev() {
        *slot = rest % base;
        rest /= base;
    }
    out
}

fn stride(mode: usize, modes: usize, cutoff: usize) -> usize {
    (cutoff + 1).pow((modes - mode) as u32)
}

fn check_mode(mode: usize, modes: usize) -> Result<()> {
    if mode == 0 || mode > modes {
        Err(Error::ModeOutOfRange { mode, modes })
    } else {
        Ok(())
    }
}

fn check_square(m: &CMatrix, expected: usize) -> Result<()> {
    if m.nrows() != expected {
        return Err(Error::Dimension { expected, got: m.nrows() });
    }
    if m.ncols() != expected {
        return Err(Error::Dimension { expected, got: m.ncols() });
    }
    Ok(())
}

fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product that keeps the crate's ordering (left factor more significant).
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A dense operator on a truncated `modes`-mode Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct FockOperator {
    matrix: CMatrix,
    modes: usize,
    cutoff: usize,
}

impl FockOperator {
    pub fn new(matrix: CMatrix, modes: usize, cutoff: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::ModeCount { expected: 1, got: 0 });
        }
        check_square(&matrix, dimension(modes, cutoff))?;
        Ok(Self { matrix, modes, cutoff })
    }

    pub fn identity(modes: usize, cutoff: usize) -> Self {
        let d = dimension(modes, cutoff);
        Self { matrix: CMatrix::identity(d, d), modes, cutoff }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint(), ..*self }
    }

    fn same_space(&self, modes: usize, cutoff: usize) -> Result<()> {
        if self.modes != modes {
            return Err(Error::ModeCount { expected: self.modes, got: modes });
        }
        if self.cutoff != cutoff {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: dimension(modes, cutoff),
            });
        }
        Ok(())
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &FockOperator) -> Result<Self> {
        self.same_space(other.modes, other.cutoff)?;
        Ok(Self { matrix: &self.matrix * &other.matrix, ..*self })
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        self.same_space(other.modes, other.cutoff)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, ..*self })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { matrix: self.matrix.map(|z| z * factor), ..*self }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.same_space(psi.modes, psi.cutoff)?;
        Ok(StateVector {
            amplitudes: &self.matrix * &psi.amplitudes,
            modes: self.modes,
            cutoff: self.cutoff,
        })
    }

    /// `O ρ O†` for a density matrix on the same space.
    pub fn conjugate(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.same_space(rho.modes, rho.cutoff)?;
        DensityMatrix::from_matrix(
            &self.matrix * &rho.matrix * self.matrix.adjoint(),
            self.modes,
            self.cutoff,
        )
    }

    /// Tensor product with `other` placed on the less significant modes.
    pub fn tensor(&self, other: &FockOperator) -> Result<Self> {
        if self.cutoff != other.cutoff {
            return Err(Error::Dimension {
                expected: self.cutoff + 1,
                got: other.cutoff + 1,
            });
        }
        Ok(Self {
            matrix: kron(&self.matrix, &other.matrix),
            modes: self.modes + other.modes,
            cutoff: self.cutoff,
        })
    }
}

/// Pure (possibly unnormalized) state in the truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: CVector,
    modes: usize,
    cutoff: usize,
}

impl StateVector {
    pub fn new(amplitudes: CVector, modes: usize, cutoff: usize) -> Result<Self> {
        let expected = dimension(modes, cutoff);
        if amplitudes.len() != expected {
            return Err(Error::Dimension { expected, got: amplitudes.len() });
        }
        Ok(Self { amplitudes, modes, cutoff })
    }

    pub fn zeros(modes: usize, cutoff: usize) -> Self {
        Self {
            amplitudes: CVector::zeros(dimension(modes, cutoff)),
            modes,
            cutoff,
        }
    }

    /// The number state `|n_1, …, n_k⟩`.
    pub fn basis(occupation: &[usize], cutoff: usize) -> Result<Self> {
        if let Some(&n) = occupation.iter().find(|&&n| n > cutoff) {
            return Err(Error::Guard {
                name: "occupation",
                value: n as f64,
                guard: "occupation <= cutoff",
            });
        }
        let mut psi = Self::zeros(occupation.len(), cutoff);
        psi.amplitudes[flat_index(occupation, cutoff)] = Complex64::new(1.0, 0.0);
        Ok(psi)
    }

    /// Superposition `Σ c_i |occ_i⟩`, unnormalized.
    pub fn from_terms(terms: &[(Complex64, &[usize])], modes: usize, cutoff: usize) -> Result<Self> {
        let mut psi = Self::zeros(modes, cutoff);
        for (c, occ) in terms {
            if occ.len() != modes {
                return Err(Error::ModeCount { expected: modes, got: occ.len() });
            }
            psi.amplitudes[flat_index(occ, cutoff)] += *c;
        }
        Ok(psi)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Complex64 {
        self.amplitudes[flat_index(occupation, self.cutoff)]
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_squared();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(n.sqrt()),
            ..*self
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|ψ⟩⟨ψ|`, carrying the norm as its trace.
    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_hermitian(m, self.modes, self.cutoff)
    }
}

/// Hermitian positive operator, normalized or carrying a success probability
/// as its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    modes: usize,
    cutoff: usize,
    normalized: bool,
}

impl DensityMatrix {
    /// Wraps `matrix` after checking shape, finiteness and Hermiticity; the
    /// stored matrix is the exactly Hermitian part `½(M + M†)`.
    pub fn from_matrix(matrix: CMatrix, modes: usize, cutoff: usize) -> Result<Self> {
        check_square(&matrix, dimension(modes, cutoff))?;
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = max_abs(&(&matrix - matrix.adjoint()));
        let scale = max_abs(&matrix).max(f64::MIN_POSITIVE);
        if deviation > HERMITIAN_TOL * scale.max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::from_hermitian(symmetrize(&matrix), modes, cutoff))
    }

    pub(crate) fn from_hermitian(matrix: CMatrix, modes: usize, cutoff: usize) -> Self {
        let trace = matrix.trace().re;
        Self {
            matrix,
            modes,
            cutoff,
            normalized: (trace - 1.0).abs() <= NORMALIZED_TOL,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn normalize(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let mut out = Self::from_hermitian(self.matrix.unscale(t), self.modes, self.cutoff);
        out.normalized = true;
        Ok(out)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or(0.0))
    }

    /// Fails with [`Error::NotPsd`] when an eigenvalue of the trace-normalized
    /// state sits below [`PSD_FLOOR`].
    pub fn check_psd(&self) -> Result<()> {
        let t = self.trace();
        let scale = if t > 0.0 { t } else { 1.0 };
        let min = self.min_eigenvalue()? / scale;
        if min < PSD_FLOOR {
            Err(Error::NotPsd { min_eigenvalue: min })
        } else {
            Ok(())
        }
    }
}

pub fn annihilation(cutoff: usize) -> Result<FockOperator> {
    if cutoff == 0 {
        return Err(Error::Cutoff { got: 0, min: 1 });
    }
    let d = cutoff + 1;
    let mut m = CMatrix::zeros(d, d);
    for n in 1..d {
        m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    Ok(FockOperator { matrix: m, modes: 1, cutoff })
}

pub fn creation(cutoff: usize) -> Result<FockOperator> {
    Ok(annihilation(cutoff)?.adjoint())
}

pub fn number(cutoff: usize) -> FockOperator {
    let d = cutoff + 1;
    let diag = CVector::from_iterator(d, (0..d).map(|n| Complex64::new(n as f64, 0.0)));
    FockOperator { matrix: CMatrix::from_diagonal(&diag), modes: 1, cutoff }
}

/// `I ⊗ … ⊗ op ⊗ … ⊗ I` with the single-mode `op` on `target_mode` (1-based).
pub fn embed(op: &FockOperator, target_mode: usize, total_modes: usize) -> Result<FockOperator> {
    if op.modes != 1 {
        return Err(Error::ModeCount { expected: 1, got: op.modes });
    }
    check_mode(target_mode, total_modes)?;
    let left = dimension(target_mode - 1, op.cutoff);
    let right = dimension(total_modes - target_mode, op.cutoff);
    let m = kron(&kron(&CMatrix::identity(left, left), &op.matrix), &CMatrix::identity(right, right));
    Ok(FockOperator { matrix: m, modes: total_modes, cutoff: op.cutoff })
}

/// Applies a two-mode operator to modes `(first, second)` of a multimode state.
/// The operator's mode 1 acts on `first`.
pub fn apply_two_mode(psi: &StateVector, op: &FockOperator, first: usize, second: usize) -> Result<StateVector> {
    if op.modes != 2 {
        return Err(Error::ModeCount { expected: 2, got: op.modes });
    }
    if op.cutoff != psi.cutoff {
        return Err(Error::Dimension { expected: op.cutoff + 1, got: psi.cutoff + 1 });
    }
    check_mode(first, psi.modes)?;
    check_mode(second, psi.modes)?;
    if first == second {
        return Err(Error::ModeOutOfRange { mode: second, modes: psi.modes });
    }
    let base = psi.cutoff + 1;
    let (s1, s2) = (stride(first, psi.modes, psi.cutoff), stride(second, psi.modes, psi.cutoff));
    let mut out = CVector::zeros(psi.amplitudes.len());
    let mut local = CVector::zeros(base * base);
    for idx in 0..psi.amplitudes.len() {
        // visit each group once, at its member with both target digits zero
        if (idx / s1) % base != 0 || (idx / s2) % base != 0 {
            continue;
        }
        for x in 0..base {
            for y in 0..base {
                local[x * base + y] = psi.amplitudes[idx + x * s1 + y * s2];
            }
        }
        let mapped = &op.matrix * &local;
        for x in 0..base {
            for y in 0..base {
                out[idx + x * s1 + y * s2] = mapped[x * base + y];
            }
        }
    }
    Ok(StateVector { amplitudes: out, ..*psi })
}

/// Reduced density matrix on `keep_modes` (1-based, any order; kept modes
/// retain their relative order).
pub fn partial_trace(rho: &DensityMatrix, keep_modes: &[usize]) -> Result<DensityMatrix> {
    if keep_modes.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let mut keep: Vec<usize> = keep_modes.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &m in &keep {
        check_mode(m, rho.modes)?;
    }
    let traced: Vec<usize> = (1..=rho.modes).filter(|m| !keep.contains(m)).collect();
    let c = rho.cutoff;
    let strides: Vec<usize> = (1..=rho.modes).map(|m| stride(m, rho.modes, c)).collect();
    let offsets = |modes: &[usize]| -> Vec<usize> {
        (0..dimension(modes.len(), c))
            .map(|i| {
                occupations(i, modes.len(), c)
                    .iter()
                    .zip(modes)
                    .map(|(&n, &m)| n * strides[m - 1])
                    .sum()
            })
            .collect()
    };
    let kept_off = offsets(&keep);
    let traced_off = offsets(&traced);
    let kd = kept_off.len();
    let out = CMatrix::from_fn(kd, kd, |i, j| {
        traced_off
            .iter()
            .map(|&t| rho.matrix[(kept_off[i] + t, kept_off[j] + t)])
            .sum()
    });
    Ok(DensityMatrix::from_hermitian(out, keep.len(), c))
}

/// Partial transpose of a two-mode operator with respect to `transposed_mode`:
/// `⟨m,n|ρ^{T_A}|p,q⟩ = ⟨p,n|ρ|m,q⟩`. The result is Hermitian but need not
/// be positive, so it is returned as a plain operator.
pub fn partial_transpose(rho: &DensityMatrix, transposed_mode: usize) -> Result<FockOperator> {
    if rho.modes != 2 {
        return Err(Error::ModeCount { expected: 2, got: rho.modes });
    }
    check_mode(transposed_mode, 2)?;
    let base = rho.cutoff + 1;
    let d = rho.dim();
    let m = CMatrix::from_fn(d, d, |i, j| {
        let (m, n) = (i / base, i % base);
        let (p, q) = (j / base, j % base);
        if transposed_mode == 1 {
            rho.matrix[(p * base + n, m * base + q)]
        } else {
            rho.matrix[(m * base + q, p * base + n)]
        }
    });
    Ok(FockOperator { matrix: m, modes: 2, cutoff: rho.cutoff })
}

/// Exchanges the two modes of a bipartite density matrix.
pub fn swap_modes(rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.modes != 2 {
        return Err(Error::ModeCount { expected: 2, got: rho.modes });
    }
    let base = rho.cutoff + 1;
    let swap = |i: usize| (i % base) * base + i / base;
    let d = rho.dim();
    let m = CMatrix::from_fn(d, d, |i, j| rho.matrix[(swap(i), swap(j))]);
    Ok(DensityMatrix { matrix: m, ..*rho })
}

fn hermitian_input(matrix: &CMatrix) -> Result<CMatrix> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::Dimension { expected: matrix.nrows(), got: matrix.ncols() });
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let deviation = max_abs(&(matrix - matrix.adjoint()));
    if deviation > HERMITIAN_TOL * max_abs(matrix).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(symmetrize(matrix))
}

/// All eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Result<Vec<f64>> {
    let sym = hermitian_input(matrix)?;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending; column `i` of the
/// returned matrix belongs to eigenvalue `i`.
pub fn hermitian_eigen(matrix: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let sym = hermitian_input(matrix)?;
    let n = sym.nrows();
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Single-mode Kraus operator of lowering type, `K = Σ_n w(n) |n - k⟩⟨n|`.
///
/// Pure-loss channels and the beam-splitter taps in front of the detectors
/// both decompose into operators of this shape; applying them directly
/// avoids dense products on the two-mode space.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderKraus {
    shift: usize,
    weights: Vec<f64>,
}

impl LadderKraus {
    /// `weights[n]` multiplies `|n - shift⟩⟨n|`; entries below `shift` are ignored.
    pub fn new(shift: usize, weights: Vec<f64>) -> Self {
        Self { shift, weights }
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn to_operator(&self) -> FockOperator {
        let d = self.weights.len();
        let mut m = CMatrix::zeros(d, d);
        for n in self.shift..d {
            m[(n - self.shift, n)] = Complex64::new(self.weights[n], 0.0);
        }
        FockOperator { matrix: m, modes: 1, cutoff: d - 1 }
    }

    /// Accumulates `scale · (K ρ K†)` with `K` on `mode` into `acc`.
    pub fn accumulate(&self, rho: &CMatrix, mode: usize, modes: usize, acc: &mut CMatrix, scale: f64) -> Result<()> {
        let cutoff = self.weights.len() - 1;
        check_mode(mode, modes)?;
        check_square(rho, dimension(modes, cutoff))?;
        check_square(acc, dimension(modes, cutoff))?;
        let base = cutoff + 1;
        let s = stride(mode, modes, cutoff);
        let k = self.shift;
        if k > cutoff {
            return Ok(());
        }
        let d = rho.nrows();
        let digit = |i: usize| (i / s) % base;
        for j in 0..d {
            let nj = digit(j);
            if nj < k {
                continue;
            }
            let wj = self.weights[nj] * scale;
            if wj == 0.0 {
                continue;
            }
            let jt = j - k * s;
            for i in 0..d {
                let ni = digit(i);
                if ni < k {
                    continue;
                }
                let w = self.weights[ni] * wj;
                if w != 0.0 {
                    acc[(i - k * s, jt)] += rho[(i, j)] * w;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, rho: &CMatrix, mode: usize, modes: usize) -> Result<CMatrix> {
        let mut acc = CMatrix::zeros(rho.nrows(), rho.ncols());
        self.accumulate(rho, mode, modes, &mut acc, 1.0)?;
        Ok(acc)
    }
}

/// `Σ_k scale_k K_k ρ K_k†` for a family of ladder Kraus operators on one mode.
pub fn apply_ladder_channel(
    rho: &CMatrix,
    mode: usize,
    modes: usize,
    kraus: &[LadderKraus],
    scales: impl Fn(usize) -> f64,
) -> Result<CMatrix> {
    let mut acc = CMatrix::zeros(rho.nrows(), rho.ncols());
    for k in kraus {
        let scale = scales(k.shift);
        if scale != 0.0 {
            k.accumulate(rho, mode, modes, &mut acc, scale)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn index_round_trip() {
        let occ = [3, 0, 7];
        let i = flat_index(&occ, 9);
        assert_eq!(i, 307);
        assert_eq!(occupations(i, 3, 9), occ.to_vec());
    }

    #[test]
    fn annihilation_examples() {
        let a = annihilation(4).unwrap();
        let vac = StateVector::basis(&[0], 4).unwrap();
        assert_eq!(a.apply(&vac).unwrap().norm_squared(), 0.0);
        let one = StateVector::basis(&[1], 4).unwrap();
        assert_eq!(a.apply(&one).unwrap(), vac);
        assert_abs_diff_eq!(a.matrix()[(2, 3)].re, 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(a.matrix()[(2, 3)].re, 1.7320508, epsilon = 1e-7);
        assert_eq!(creation(4).unwrap().matrix(), &a.matrix().adjoint());
    }

    #[test]
    fn annihilation_rejects_zero_cutoff() {
        assert_eq!(annihilation(0).unwrap_err(), Error::Cutoff { got: 0, min: 1 });
    }

    #[test]
    fn embed_acts_on_target_mode_only() {
        let a = annihilation(3).unwrap();
        let a1 = embed(&a, 1, 2).unwrap();
        let psi = StateVector::basis(&[1, 1], 3).unwrap();
        assert_eq!(a1.apply(&psi).unwrap(), StateVector::basis(&[0, 1], 3).unwrap());
        let id = embed(&FockOperator::identity(1, 3), 2, 3).unwrap();
        assert_eq!(id, FockOperator::identity(3, 3));
        assert!(matches!(embed(&a, 3, 2), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(embed(&a, 0, 2), Err(Error::ModeOutOfRange { .. })));
        assert!(matches!(embed(&a1, 1, 2), Err(Error::ModeCount { .. })));
    }

    #[test]
    fn disjoint_mode_operators_commute() {
        let a = annihilation(5).unwrap();
        let ab = embed(&a, 1, 2).unwrap().compose(&embed(&a, 2, 2).unwrap()).unwrap();
        let ba = embed(&a, 2, 2).unwrap().compose(&embed(&a, 1, 2).unwrap()).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn partial_trace_of_product_vacuum() {
        let rho = StateVector::basis(&[0, 0], 3).unwrap().projector();
        let red = partial_trace(&rho, &[1]).unwrap();
        assert_eq!(red, StateVector::basis(&[0], 3).unwrap().projector());
        assert_eq!(partial_trace(&rho, &[]).unwrap_err(), Error::EmptyKeepSet);
        assert!(matches!(partial_trace(&rho, &[3]), Err(Error::ModeOutOfRange { .. })));
    }

    #[test]
    fn partial_trace_keeps_middle_mode() {
        let psi = StateVector::from_terms(
            &[(c(0.6), &[1, 2, 0]), (c(0.8), &[0, 1, 1])],
            3,
            2,
        )
        .unwrap();
        let red = partial_trace(&psi.projector(), &[2]).unwrap();
        assert_abs_diff_eq!(red.matrix()[(2, 2)].re, 0.36, epsilon = 1e-15);
        assert_abs_diff_eq!(red.matrix()[(1, 1)].re, 0.64, epsilon = 1e-15);
        assert_abs_diff_eq!(red.matrix()[(1, 2)].norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let s = 0.5f64.sqrt();
        let psi = StateVector::from_terms(&[(c(s), &[1, 0]), (c(-s), &[0, 1])], 2, 1).unwrap();
        let pt = partial_transpose(&psi.projector(), 1).unwrap();
        let ev = hermitian_eigenvalues(pt.matrix()).unwrap();
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(pt.matrix().trace().re, 1.0, epsilon = 1e-15);
        assert!(matches!(
            partial_transpose(&StateVector::basis(&[0], 2).unwrap().projector(), 1),
            Err(Error::ModeCount { .. })
        ));
    }

    #[test]
    fn eigenvalue_examples() {
        let ev = hermitian_eigenvalues(&CMatrix::identity(4, 4)).unwrap();
        assert_eq!(ev, vec![1.0; 4]);
        // diag(3, -1) rotated by a complex unitary
        let (cs, sn) = (0.3f64.cos(), 0.3f64.sin());
        let u = CMatrix::from_row_slice(2, 2, &[c(cs), Complex64::new(0.0, sn), Complex64::new(0.0, sn), c(cs)]);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0), c(-1.0)]));
        let m = &u * d * u.adjoint();
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-13);
        let mut bad = CMatrix::identity(2, 2);
        bad[(0, 1)] = c(f64::NAN);
        assert_eq!(hermitian_eigenvalues(&bad).unwrap_err(), Error::NonFinite);
        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_eigenvalues(&skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn ladder_kraus_matches_dense_product() {
        let cutoff = 3;
        let weights: Vec<f64> = (0..=cutoff).map(|n| 0.1 + n as f64).collect();
        let k = LadderKraus::new(2, weights);
        let dense = k.to_operator();
        let psi = StateVector::from_terms(
            &[(c(0.5), &[3, 2]), (Complex64::new(0.1, 0.4), &[2, 3]), (c(0.3), &[1, 1])],
            2,
            cutoff,
        )
        .unwrap();
        let rho = psi.projector();
        for mode in 1..=2 {
            let full = embed(&dense, mode, 2).unwrap();
            let expected = full.matrix() * rho.matrix() * full.matrix().adjoint();
            let got = k.apply(rho.matrix(), mode, 2).unwrap();
            assert_abs_diff_eq!((expected - got).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn density_matrix_rejects_non_hermitian() {
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = c(0.5);
        assert!(matches!(DensityMatrix::from_matrix(m, 2, 1), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            DensityMatrix::from_matrix(CMatrix::identity(3, 3), 2, 1),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn check_psd_flags_negative_state() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.1), c(-0.1), c(0.0), c(0.0)]));
        let rho = DensityMatrix::from_matrix(m, 2, 1).unwrap();
        assert!(matches!(rho.check_psd(), Err(Error::NotPsd { .. })));
    }
}
