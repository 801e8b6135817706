//! Dense complex linear algebra and the basic quantum objects built on it.
//!
//! Qubit 1 is the most significant tensor factor: `kron(a, b)` places `a` on
//! qubit 1, and basis index `|q1 q2 ...>` is read big-endian.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 3;

/// Tolerance for the trace and Hermiticity checks on density matrices.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted by the PSD check.
pub const PSD_FLOOR: f64 = -1e-10;
/// Tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n))
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!("dimension {dim} is not 2^n")));
    }
    let n = dim.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

/// Square complex matrix of dimension `2^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_rows(dim: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "entry count must be dim^2");
        Self(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Self {
        let c: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let dim = entries.len();
        Self(DMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(entries[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        Self(DMatrix::from_fn(dim, dim, |i, j| a[i] * b[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let d = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `|M - M^dagger|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn unitary_defect(&self) -> f64 {
        let prod = self * &self.adjoint();
        prod.max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_defect() <= tol
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let d = self.dim();
        assert_eq!(v.len(), d);
        (0..d).map(|i| (0..d).map(|j| self.0[(i, j)] * v[j]).sum()).collect()
    }

    /// `M A M^dagger`.
    pub fn conjugate(&self, a: &Self) -> Self {
        &(self * a) * &self.adjoint()
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> bool {
        let ab = self * other;
        let ba = other * self;
        ab.max_abs_diff(&ba) <= tol
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Tensor product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Letter of the Hermitian Pauli `i^{xz} X^x Z^z`.
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Z => (false, true),
            Pauli::Y => (true, true),
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => ComplexMatrix::from_rows(2, &[l, o, o, l]),
            Pauli::X => ComplexMatrix::from_rows(2, &[o, l, l, o]),
            Pauli::Y => ComplexMatrix::from_rows(2, &[o, -i, i, o]),
            Pauli::Z => ComplexMatrix::from_rows(2, &[l, o, o, -l]),
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Global phase of a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl Phase {
    pub fn value(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }
}

/// An n-qubit Pauli operator with a phase in {+1, -1, +i, -i}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub phase: Phase,
    pub letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(phase: Phase, letters: Vec<Pauli>) -> Self {
        Self { phase, letters }
    }

    pub fn nqubits(&self) -> usize {
        self.letters.len()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let m = self
            .letters
            .iter()
            .fold(ComplexMatrix::identity(1), |acc, p| acc.kron(&p.matrix()));
        m.scale(self.phase.value())
    }

    /// True when the Pauli parts commute (phases are irrelevant).
    pub fn commutes_with(&self, other: &Self) -> bool {
        let clashes = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        clashes % 2 == 0
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|p| *p == Pauli::I)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            Phase::PlusOne => "+",
            Phase::MinusOne => "-",
            Phase::PlusI => "+i",
            Phase::MinusI => "-i",
        };
        f.write_str(prefix)?;
        for p in &self.letters {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional phase prefix (`+`, `-`, `i`, `+i`, `-i`) followed
    /// by letters from `IXYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidPauli(s.to_string());
        let t = s.trim();
        let (phase, rest) = if let Some(r) = t.strip_prefix("+i") {
            (Phase::PlusI, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (Phase::MinusI, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (Phase::PlusI, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (Phase::PlusOne, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (Phase::MinusOne, r)
        } else {
            (Phase::PlusOne, t)
        };
        let letters = rest
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() || letters.len() > MAX_QUBITS {
            return Err(bad());
        }
        Ok(Self { phase, letters })
    }
}

/// Matrix of a Pauli string.
pub fn pauli(spec: &PauliString) -> ComplexMatrix {
    spec.matrix()
}

/// Normalized pure state on 2^n amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wraps amplitudes that must already have unit norm (within 1e-12).
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("norm {norm} != 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite vector".into()));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(nqubits: usize, index: usize) -> Result<Self> {
        check_qubits(nqubits)?;
        let dim = 1 << nqubits;
        if index >= dim {
            return Err(Error::Precondition(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn nqubits(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self { amplitudes: amps }
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            nqubits: self.nqubits(),
            matrix: self.projector(),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    nqubits: usize,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and the eigenvalue floor.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let nqubits = qubits_for_dim(matrix.dim())?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let defect = matrix.hermitian_defect();
        if defect > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < PSD_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(Self { matrix, nqubits })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        psi.density()
    }

    pub fn maximally_mixed(nqubits: usize) -> Result<Self> {
        check_qubits(nqubits)?;
        let dim = 1 << nqubits;
        Ok(Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            nqubits,
        })
    }

    /// Single-qubit state `(I + xX + yY + zZ)/2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if r > 1.0 + 1e-12 {
            return Err(Error::InvalidState(format!("Bloch vector length {r} > 1")));
        }
        let m = &(&(&Pauli::I.matrix() + &Pauli::X.matrix().scale_real(x)) + &Pauli::Y.matrix().scale_real(y))
            + &Pauli::Z.matrix().scale_real(z);
        Ok(Self {
            matrix: m.scale_real(0.5),
            nqubits: 1,
        })
    }

    /// Pure single-qubit state at polar angle `theta` and azimuth `phi`.
    pub fn from_bloch_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::from_bloch(st * cp, st * sp, ct).expect("unit Bloch vector")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        check_qubits(self.nqubits + other.nqubits)?;
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix),
            nqubits: self.nqubits + other.nqubits,
        })
    }

    /// `p * a + (1 - p) * b`.
    pub fn mix(p: f64, a: &Self, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        if a.nqubits != b.nqubits {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        Ok(Self {
            matrix: &a.matrix.scale_real(p) + &b.matrix.scale_real(1.0 - p),
            nqubits: a.nqubits,
        })
    }

    /// `Re Tr(rho O)`.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        self.matrix.trace_product(op).re
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.nqubits != 1 {
            return Err(Error::Precondition("Bloch vector needs one qubit".into()));
        }
        Ok([
            self.expectation(&Pauli::X.matrix()),
            self.expectation(&Pauli::Y.matrix()),
            self.expectation(&Pauli::Z.matrix()),
        ])
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }
}

/// Haar-random pure state seeded deterministically.
pub fn haar_random_pure(n: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_pure_with(n, &mut rng)
}

/// Haar-random pure state drawn from a caller-owned generator: a vector of
/// i.i.d. standard complex Gaussians, normalized.
pub fn haar_random_pure_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    check_qubits(n)?;
    let amps: Vec<Complex64> = (0..1usize << n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    PureState::normalized(amps)
}

/// Global depolarizing channel `(1 - p) rho + p I / 2^n`.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let dim = rho.dim();
    let mixed = ComplexMatrix::identity(dim).scale_real(p / dim as f64);
    Ok(DensityMatrix {
        matrix: &rho.matrix.scale_real(1.0 - p) + &mixed,
        nqubits: rho.nqubits,
    })
}

/// `U rho U^dagger` for a unitary `U`.
pub fn apply_unitary(rho: &DensityMatrix, u: &ComplexMatrix) -> Result<DensityMatrix> {
    if u.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: u.dim(),
        });
    }
    let defect = u.unitary_defect();
    if defect > UNITARY_TOL {
        return Err(Error::NotUnitary(defect));
    }
    Ok(DensityMatrix {
        matrix: u.conjugate(&rho.matrix),
        nqubits: rho.nqubits,
    })
}

/// Common gates.
pub mod gates {
    use super::*;

    pub fn hadamard() -> ComplexMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(2, &[h, h, h, -h])
    }

    pub fn phase_s() -> ComplexMatrix {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        ComplexMatrix::from_rows(2, &[l, o, o, Complex64::new(0.0, 1.0)])
    }

    pub fn cnot() -> ComplexMatrix {
        let mut m = vec![0.0; 16];
        for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[row * 4 + col] = 1.0;
        }
        ComplexMatrix::from_real_rows(4, &m)
    }

    /// Places a single-qubit operator on `qubit` (0-based) of an n-qubit register.
    pub fn on_qubit(op: &ComplexMatrix, qubit: usize, n: usize) -> ComplexMatrix {
        (0..n).fold(ComplexMatrix::identity(1), |acc, k| {
            if k == qubit {
                acc.kron(op)
            } else {
                acc.kron(&ComplexMatrix::identity(2))
            }
        })
    }

    /// Removes the global phase so that the first non-negligible entry is
    /// real positive.
    fn phase_normalized(m: &ComplexMatrix) -> ComplexMatrix {
        let pivot = m
            .inner()
            .iter()
            .find(|z| z.norm() > 1e-9)
            .copied()
            .expect("non-zero matrix");
        m.scale(pivot.conj() / pivot.norm())
    }

    fn key(m: &ComplexMatrix) -> Vec<(i64, i64)> {
        // column-major order, rounded
        m.inner()
            .iter()
            .map(|z| ((z.re * 1e8).round() as i64, (z.im * 1e8).round() as i64))
            .collect()
    }

    /// The 24 single-qubit Clifford unitaries modulo global phase, generated
    /// breadth-first from `H` and `S` starting at the identity.
    pub fn single_qubit_cliffords() -> Vec<ComplexMatrix> {
        let gens = [hadamard(), phase_s()];
        let mut out = vec![ComplexMatrix::identity(2)];
        let mut seen = vec![key(&out[0])];
        let mut frontier = out.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for m in &frontier {
                for g in &gens {
                    let c = phase_normalized(&(g * m));
                    let k = key(&c);
                    if !seen.contains(&k) {
                        seen.push(k);
                        next.push(c.clone());
                        out.push(c);
                    }
                }
            }
            frontier = next;
        }
        out
    }
}
