//! Product-construction phase space for n qubits.
//!
//! Single-qubit phase-point operators are
//! `A(q,p) = (I + (-1)^p X + (-1)^(q+p) Y + (-1)^q Z) / 2`, and the n-qubit
//! operator is the tensor product over qubits. Points are indexed
//! lexicographically in `(q1, p1, q2, p2, ...)`, so for two qubits the flat
//! index is `4 * (2 q1 + p1) + (2 q2 + p2)`. Reshaped as a 4x4 grid, rows run
//! over the qubit-1 point and columns over the qubit-2 point, both in the
//! order (0,0), (0,1), (1,0), (1,1). This is the layout in which the
//! Bell+Rz closed form `8 W = [[1+s, 1-s, c, -c], ...]` holds (checked
//! against direct evaluation in `families`).
//!
//! Note that `A(q,p)` has eigenvalues `(1 ± sqrt 3)/2`, so `A^2 != I` and
//! Wigner entries are not confined to `[-1/4, 1/4]` by a spectral argument.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{check_qubits, ComplexMatrix, DensityMatrix, Pauli, MAX_QUBITS};
use crate::stabgen::StabilizerSet;

/// A point `((q1,p1), ..., (qn,pn))` of the n-qubit phase space.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhasePoint {
    pub coords: Vec<(u8, u8)>,
}

impl PhasePoint {
    pub fn new(coords: Vec<(u8, u8)>) -> Result<Self> {
        check_qubits(coords.len())?;
        if coords.iter().any(|&(q, p)| q > 1 || p > 1) {
            return Err(Error::Precondition(format!("coordinates {coords:?} not in F2")));
        }
        Ok(Self { coords })
    }

    pub fn nqubits(&self) -> usize {
        self.coords.len()
    }

    pub fn index(&self) -> usize {
        self.coords
            .iter()
            .fold(0, |acc, &(q, p)| acc * 4 + 2 * q as usize + p as usize)
    }

    pub fn from_index(nqubits: usize, index: usize) -> Self {
        let coords = (0..nqubits)
            .map(|k| {
                let digit = (index >> (2 * (nqubits - 1 - k))) & 3;
                ((digit >> 1) as u8, (digit & 1) as u8)
            })
            .collect();
        Self { coords }
    }

    /// All 4^n points in index order.
    pub fn all(nqubits: usize) -> Vec<Self> {
        (0..1usize << (2 * nqubits))
            .map(|i| Self::from_index(nqubits, i))
            .collect()
    }
}

fn single_qubit_operator(q: u8, p: u8) -> ComplexMatrix {
    let sign = |e: u8| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
    let m = &(&(&Pauli::I.matrix() + &Pauli::X.matrix().scale_real(sign(p)))
        + &Pauli::Y.matrix().scale_real(sign(q + p)))
        + &Pauli::Z.matrix().scale_real(sign(q));
    m.scale_real(0.5)
}

/// Phase-point operator `A_alpha`.
pub fn phase_point_operator(alpha: &PhasePoint) -> ComplexMatrix {
    alpha.coords.iter().fold(ComplexMatrix::identity(1), |acc, &(q, p)| {
        acc.kron(&single_qubit_operator(q, p))
    })
}

/// All phase-point operators for `n` qubits, in index order (cached).
pub fn phase_point_operators(nqubits: usize) -> &'static [ComplexMatrix] {
    static CACHE: [OnceLock<Vec<ComplexMatrix>>; MAX_QUBITS] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    assert!((1..=MAX_QUBITS).contains(&nqubits), "nqubits out of range");
    CACHE[nqubits - 1].get_or_init(|| PhasePoint::all(nqubits).iter().map(phase_point_operator).collect())
}

/// Real quasi-probability vector of length 4^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerVector {
    nqubits: usize,
    values: Vec<f64>,
}

impl WignerVector {
    pub fn new(nqubits: usize, values: Vec<f64>) -> Result<Self> {
        check_qubits(nqubits)?;
        let expected = 1usize << (2 * nqubits);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { nqubits, values })
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, point: &PhasePoint) -> f64 {
        self.values[point.index()]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn l1(&self) -> f64 {
        wigner_l1(self)
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.values.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Number of entries below `-tol`.
    pub fn negative_count(&self, tol: f64) -> usize {
        self.values.iter().filter(|&&v| v < -tol).count()
    }

    /// Sum of `|w|` over negative entries.
    pub fn negative_mass(&self) -> f64 {
        self.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Two-qubit vector as a 4x4 grid (rows: qubit-1 point, cols: qubit-2 point).
    pub fn as_grid(&self) -> Option<[[f64; 4]; 4]> {
        (self.nqubits == 2).then(|| {
            let mut g = [[0.0; 4]; 4];
            for (i, v) in self.values.iter().enumerate() {
                g[i / 4][i % 4] = *v;
            }
            g
        })
    }

    /// Writes `q1,p1,...,qn,pn,value` rows with a header.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.nqubits)
            .flat_map(|k| [format!("q{k}"), format!("p{k}")])
            .collect();
        header.push("value".into());
        wr.write_record(&header).map_err(csv_err)?;
        for (i, v) in self.values.iter().enumerate() {
            let pt = PhasePoint::from_index(self.nqubits, i);
            let mut rec: Vec<String> = pt
                .coords
                .iter()
                .flat_map(|&(q, p)| [q.to_string(), p.to_string()])
                .collect();
            rec.push(crate::output::fmt_sig(*v));
            wr.write_record(&rec).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Coefficients `Tr(M A_alpha) / 2^n` of an arbitrary operator.
pub fn wigner_of_operator(m: &ComplexMatrix) -> Result<(Vec<f64>, f64)> {
    let dim = m.dim();
    if !dim.is_power_of_two() {
        return Err(Error::Precondition(format!("dimension {dim} not 2^n")));
    }
    let n = dim.trailing_zeros() as usize;
    check_qubits(n)?;
    let norm = 1.0 / dim as f64;
    let mut imag: f64 = 0.0;
    let values = phase_point_operators(n)
        .iter()
        .map(|a| {
            let t: Complex64 = m.trace_product(a);
            imag = imag.max(t.im.abs() * norm);
            t.re * norm
        })
        .collect();
    Ok((values, imag))
}

/// Wigner function `W(alpha) = Tr(rho A_alpha) / 2^n`.
pub fn wigner(rho: &DensityMatrix) -> WignerVector {
    let (values, imag) = wigner_of_operator(rho.matrix()).expect("valid density matrix");
    debug_assert!(imag <= 1e-12, "imaginary residue {imag}");
    WignerVector {
        nqubits: rho.nqubits(),
        values,
    }
}

/// Reconstruction `sum_alpha w(alpha) A_alpha`.
pub fn inverse_wigner(w: &WignerVector) -> ComplexMatrix {
    let ops = phase_point_operators(w.nqubits);
    let dim = 1usize << w.nqubits;
    ops.iter()
        .zip(&w.values)
        .fold(ComplexMatrix::zeros(dim), |acc, (a, &v)| &acc + &a.scale_real(v))
}

/// Sum of absolute entries.
pub fn wigner_l1(w: &WignerVector) -> f64 {
    w.values.iter().map(|v| v.abs()).sum()
}

/// Largest Wigner l1 norm over a complete stabilizer set.
pub fn max_stab_l1(set: &StabilizerSet) -> f64 {
    set.states().iter().map(|s| s.wigner().l1()).fold(0.0, f64::max)
}

/// Invertible linear maps of the single-qubit phase space `F2^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymplecticMap {
    Identity,
    /// `(q, p) -> (p, q)`; the action attributed to the Hadamard gate.
    Swap,
    /// `(q, p) -> (q, p + q)`.
    ShearP,
    /// `(q, p) -> (q + p, p)`.
    ShearQ,
    /// `(q, p) -> (p, q + p)`.
    Cycle,
    /// `(q, p) -> (q + p, q)`.
    CycleInv,
}

impl SymplecticMap {
    pub const ALL: [SymplecticMap; 6] = [
        SymplecticMap::Identity,
        SymplecticMap::Swap,
        SymplecticMap::ShearP,
        SymplecticMap::ShearQ,
        SymplecticMap::Cycle,
        SymplecticMap::CycleInv,
    ];

    pub fn apply(self, (q, p): (u8, u8)) -> (u8, u8) {
        match self {
            SymplecticMap::Identity => (q, p),
            SymplecticMap::Swap => (p, q),
            SymplecticMap::ShearP => (q, p ^ q),
            SymplecticMap::ShearQ => (q ^ p, p),
            SymplecticMap::Cycle => (p, q ^ p),
            SymplecticMap::CycleInv => (q ^ p, q),
        }
    }
}

/// Relabels phase space on one qubit: the output takes the value `w(alpha)`
/// at the point obtained by mapping coordinate `qubit` of `alpha`.
pub fn permute_local(w: &WignerVector, qubit: usize, map: SymplecticMap) -> WignerVector {
    assert!(qubit < w.nqubits, "qubit index out of range");
    let mut out = vec![0.0; w.values.len()];
    for (i, &v) in w.values.iter().enumerate() {
        let mut pt = PhasePoint::from_index(w.nqubits, i);
        pt.coords[qubit] = map.apply(pt.coords[qubit]);
        out[pt.index()] = v;
    }
    WignerVector {
        nqubits: w.nqubits,
        values: out,
    }
}
