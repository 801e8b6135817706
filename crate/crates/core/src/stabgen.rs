//! Exhaustive enumeration of pure n-qubit stabilizer states (n <= 3).
//!
//! Every stabilizer group is a Lagrangian subspace of `F2^{2n}` together with
//! a sign per generator. Subspaces are enumerated directly in reduced row
//! echelon form, so each group appears exactly once and no floating-point
//! deduplication is needed. Columns are ordered `x1..xn z1..zn`; a row is
//! stored as a bitmask with column 0 in the most significant position, and the
//! generator for row `(x, z)` is the Hermitian Pauli with letters
//! `I/X/Z/Y` for `(x_k, z_k) = (0,0)/(1,0)/(0,1)/(1,1)`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phasespace::{wigner, WignerVector};
use crate::qcore::{check_qubits, ComplexMatrix, Pauli, PauliString, Phase, PureState, MAX_QUBITS};

/// Environment variable overriding the on-disk cache directory.
pub const CACHE_DIR_ENV: &str = "WIGMAGIC_CACHE_DIR";
const CACHE_FORMAT: &str = "wigmagic-stabilizers";
const CACHE_VERSION: u32 = 1;

/// `2^n prod_{k=0}^{n-1} (2^{n-k} + 1)`.
pub fn stabilizer_count(n: usize) -> usize {
    (0..n).fold(1usize << n, |acc, k| acc * ((1usize << (n - k)) + 1))
}

/// A pure stabilizer state with its canonical tableau, state vector and
/// Wigner vector.
#[derive(Clone, Debug)]
pub struct StabilizerState {
    nqubits: usize,
    rows: Vec<u16>,
    negative: Vec<bool>,
    generators: Vec<PauliString>,
    vector: PureState,
    wigner: WignerVector,
}

impl StabilizerState {
    fn from_tableau(nqubits: usize, rows: Vec<u16>, negative: Vec<bool>) -> Self {
        let generators: Vec<PauliString> = rows
            .iter()
            .zip(&negative)
            .map(|(&r, &neg)| row_to_pauli(nqubits, r, neg))
            .collect();
        let vector = joint_eigenvector(nqubits, &generators);
        let wigner = wigner(&vector.density());
        Self {
            nqubits,
            rows,
            negative,
            generators,
            vector,
            wigner,
        }
    }

    fn from_parts(nqubits: usize, rows: Vec<u16>, negative: Vec<bool>, vector: PureState) -> Self {
        let generators = rows
            .iter()
            .zip(&negative)
            .map(|(&r, &neg)| row_to_pauli(nqubits, r, neg))
            .collect();
        let wigner = wigner(&vector.density());
        Self {
            nqubits,
            rows,
            negative,
            generators,
            vector,
            wigner,
        }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn vector(&self) -> &PureState {
        &self.vector
    }

    pub fn wigner(&self) -> &WignerVector {
        &self.wigner
    }

    /// Canonical tableau key: RREF rows followed by generator signs.
    pub fn tableau_key(&self) -> (Vec<u16>, Vec<bool>) {
        (self.rows.clone(), self.negative.clone())
    }

    /// Largest `|g|psi> - |psi>|` entry over the generators.
    pub fn eigen_residual(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| {
                let gv = g.matrix().apply(self.vector.amplitudes());
                gv.iter()
                    .zip(self.vector.amplitudes())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

fn row_to_pauli(n: usize, row: u16, negative: bool) -> PauliString {
    let bit = |col: usize| (row >> (2 * n - 1 - col)) & 1 == 1;
    let letters = (0..n).map(|k| Pauli::from_bits(bit(k), bit(n + k))).collect();
    let phase = if negative { Phase::MinusOne } else { Phase::PlusOne };
    PauliString::new(phase, letters)
}

fn symplectic_product(n: usize, a: u16, b: u16) -> bool {
    let mask = (1u16 << n) - 1;
    let (ax, az) = (a >> n, a & mask);
    let (bx, bz) = (b >> n, b & mask);
    ((ax & bz).count_ones() + (az & bx).count_ones()) % 2 == 1
}

/// Projects onto the joint +1 eigenspace and normalizes so the first
/// non-negligible amplitude is real positive.
fn joint_eigenvector(n: usize, generators: &[PauliString]) -> PureState {
    let dim = 1usize << n;
    let id = ComplexMatrix::identity(dim);
    let proj = generators
        .iter()
        .fold(id.clone(), |acc, g| &acc * &(&id + &g.matrix()).scale_real(0.5));
    let col = (0..dim)
        .max_by(|&a, &b| {
            let na: f64 = (0..dim).map(|i| proj.get(i, a).norm_sqr()).sum();
            let nb: f64 = (0..dim).map(|i| proj.get(i, b).norm_sqr()).sum();
            // prefer the lowest column on ties so the choice is stable
            na.total_cmp(&nb).then(b.cmp(&a))
        })
        .expect("non-empty");
    let amps: Vec<Complex64> = (0..dim).map(|i| proj.get(i, col)).collect();
    let pivot = *amps.iter().find(|a| a.norm() > 1e-9).expect("rank-one projector");
    let phase = pivot.conj() / pivot.norm();
    let amps = amps.into_iter().map(|a| a * phase).collect();
    PureState::normalized(amps).expect("non-zero projector column")
}

/// All n-row RREF matrices over `F2^{2n}` whose rows are pairwise
/// symplectically orthogonal.
fn lagrangian_subspaces(n: usize) -> Vec<Vec<u16>> {
    let width = 2 * n;
    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(n);
    choose_pivots(width, n, 0, &mut pivots, &mut |piv| {
        // free positions per row: columns right of the pivot that are not pivots
        let free: Vec<Vec<usize>> = piv
            .iter()
            .map(|&p| ((p + 1)..width).filter(|c| !piv.contains(c)).collect())
            .collect();
        let total: usize = free.iter().map(Vec::len).sum();
        for assignment in 0u32..(1u32 << total) {
            let mut bit = 0;
            let rows: Vec<u16> = piv
                .iter()
                .zip(&free)
                .map(|(&p, cols)| {
                    let mut r = 1u16 << (width - 1 - p);
                    for &c in cols {
                        if (assignment >> bit) & 1 == 1 {
                            r |= 1u16 << (width - 1 - c);
                        }
                        bit += 1;
                    }
                    r
                })
                .collect();
            let isotropic = (0..n).all(|i| (i + 1..n).all(|j| !symplectic_product(n, rows[i], rows[j])));
            if isotropic {
                out.push(rows);
            }
        }
    });
    out
}

fn choose_pivots(width: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for c in start..width {
        cur.push(c);
        choose_pivots(width, k, c + 1, cur, f);
        cur.pop();
    }
}

/// The complete, ordered set of pure stabilizer states for one qubit count.
#[derive(Clone, Debug)]
pub struct StabilizerSet {
    nqubits: usize,
    states: Vec<StabilizerState>,
}

impl StabilizerSet {
    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn states(&self) -> &[StabilizerState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Shared, lazily built set. For n = 3 the on-disk cache in
    /// [`cache_dir`] is consulted first.
    pub fn shared(n: usize) -> Result<&'static StabilizerSet> {
        check_qubits(n)?;
        static SETS: [OnceLock<StabilizerSet>; MAX_QUBITS] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
        Ok(SETS[n - 1].get_or_init(|| {
            if n == 3 {
                load_or_build(n, &cache_dir()).expect("n = 3 is in range")
            } else {
                enumerate_stabilizers(n).expect("n is in range")
            }
        }))
    }

    fn to_cache(&self) -> CacheFile {
        CacheFile {
            format: CACHE_FORMAT.to_string(),
            version: CACHE_VERSION,
            nqubits: self.nqubits,
            states: self
                .states
                .iter()
                .map(|s| CachedState {
                    rows: s.rows.clone(),
                    negative: s.negative.clone(),
                    amplitudes: s.vector.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
                })
                .collect(),
        }
    }

    fn from_cache(file: CacheFile, n: usize) -> Result<Self> {
        if file.format != CACHE_FORMAT || file.version != CACHE_VERSION || file.nqubits != n {
            return Err(Error::Cache("format or version mismatch".into()));
        }
        if file.states.len() != stabilizer_count(n) {
            return Err(Error::Cache(format!("{} states cached", file.states.len())));
        }
        let states = file
            .states
            .into_iter()
            .map(|c| {
                if c.rows.len() != n || c.negative.len() != n {
                    return Err(Error::Cache("malformed tableau".into()));
                }
                let amps = c.amplitudes.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                let vector = PureState::new(amps).map_err(|e| Error::Cache(e.to_string()))?;
                Ok(StabilizerState::from_parts(n, c.rows, c.negative, vector))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nqubits: n, states })
    }
}

#[derive(Serialize, Deserialize)]
struct CachedState {
    rows: Vec<u16>,
    negative: Vec<bool>,
    amplitudes: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    format: String,
    version: u32,
    nqubits: usize,
    states: Vec<CachedState>,
}

/// Enumerates every pure n-qubit stabilizer state, ordered by canonical
/// tableau.
pub fn enumerate_stabilizers(n: usize) -> Result<StabilizerSet> {
    check_qubits(n)?;
    let mut keys: Vec<(Vec<u16>, Vec<bool>)> = lagrangian_subspaces(n)
        .into_iter()
        .flat_map(|rows| {
            (0u32..(1 << n)).map(move |signs| {
                let negative = (0..n).map(|k| (signs >> (n - 1 - k)) & 1 == 1).collect();
                (rows.clone(), negative)
            })
        })
        .collect();
    keys.sort();
    let states = keys
        .into_iter()
        .map(|(rows, neg)| StabilizerState::from_tableau(n, rows, neg))
        .collect();
    Ok(StabilizerSet { nqubits: n, states })
}

/// Cache directory: `$WIGMAGIC_CACHE_DIR` if set, else a directory under the
/// system temp dir.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("wigmagic-cache"))
}

pub fn cache_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("stabilizers-n{n}-v{CACHE_VERSION}.json"))
}

/// Loads the set from `dir`, rebuilding (and rewriting) it when the file is
/// missing, malformed, or of another version. Write failures are ignored.
pub fn load_or_build(n: usize, dir: &Path) -> Result<StabilizerSet> {
    check_qubits(n)?;
    let path = cache_path(dir, n);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(file) = serde_json::from_str::<CacheFile>(&text) {
            if let Ok(set) = StabilizerSet::from_cache(file, n) {
                return Ok(set);
            }
        }
    }
    let set = enumerate_stabilizers(n)?;
    let _ = write_cache(&set, dir);
    Ok(set)
}

pub fn write_cache(set: &StabilizerSet, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, set.nqubits);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec(&set.to_cache())?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// True when `|<psi|phi>| = 1` (within 1e-9) for some member of the set.
pub fn is_stabilizer_vector(psi: &PureState, set: &StabilizerSet) -> Result<bool> {
    if psi.nqubits() != set.nqubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << set.nqubits,
            got: psi.dim(),
        });
    }
    Ok(set
        .states
        .iter()
        .any(|s| (s.vector.inner(psi).norm() - 1.0).abs() <= 1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{apply_unitary, gates, DensityMatrix};

    #[test]
    fn counts_match_formula() {
        assert_eq!(stabilizer_count(1), 6);
        assert_eq!(stabilizer_count(2), 60);
        assert_eq!(stabilizer_count(3), 1080);
        for n in 1..=3 {
            assert_eq!(lagrangian_subspaces(n).len() << n, stabilizer_count(n));
        }
        assert_eq!(enumerate_stabilizers(1).unwrap().len(), 6);
        assert_eq!(enumerate_stabilizers(2).unwrap().len(), 60);
        assert!(matches!(enumerate_stabilizers(4), Err(Error::QubitCount(4))));
    }

    #[test]
    fn generators_are_valid_and_vectors_distinct() {
        for n in 1..=2 {
            let set = enumerate_stabilizers(n).unwrap();
            for s in set.states() {
                let g = s.generators();
                assert_eq!(g.len(), n);
                for i in 0..n {
                    assert!(!g[i].is_identity());
                    for j in 0..n {
                        assert!(g[i].commutes_with(&g[j]));
                    }
                }
                assert!(s.eigen_residual() < 1e-10);
                let first = s.vector().amplitudes().iter().find(|a| a.norm() > 1e-9).unwrap();
                assert!(first.im.abs() < 1e-15 && first.re > 0.0);
            }
            for (i, a) in set.states().iter().enumerate() {
                for b in &set.states()[i + 1..] {
                    assert!(a.vector().inner(b.vector()).norm() < 1.0 - 1e-6);
                }
            }
        }
    }

    #[test]
    fn ordering_is_by_tableau() {
        let set = enumerate_stabilizers(2).unwrap();
        let keys: Vec<_> = set.states().iter().map(|s| s.tableau_key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn single_qubit_states_are_pauli_eigenstates() {
        let set = enumerate_stabilizers(1).unwrap();
        let mut labels: Vec<String> = set.states().iter().map(|s| s.generators()[0].to_string()).collect();
        labels.sort();
        assert_eq!(labels, ["+X", "+Y", "+Z", "-X", "-Y", "-Z"]);
    }

    #[test]
    fn membership_examples() {
        let set = enumerate_stabilizers(2).unwrap();
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let zz = PureState::basis(2, 0).unwrap();
        assert!(is_stabilizer_vector(&zz, &set).unwrap());
        let bell = PureState::normalized(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]).unwrap();
        assert!(is_stabilizer_vector(&bell, &set).unwrap());
        let t = std::f64::consts::PI / 8.0;
        let off = PureState::new(vec![c(t.cos(), 0.), c(0., 0.), c(0., 0.), c(t.sin(), 0.)]).unwrap();
        assert!(!is_stabilizer_vector(&off, &set).unwrap());
        assert!(is_stabilizer_vector(&PureState::basis(1, 0).unwrap(), &set).is_err());
    }

    #[test]
    fn cliffords_permute_single_qubit_states() {
        let set = enumerate_stabilizers(1).unwrap();
        for u in gates::single_qubit_cliffords() {
            let mut hit = vec![false; set.len()];
            for s in set.states() {
                let img = apply_unitary(&DensityMatrix::from_pure(s.vector()), &u).unwrap();
                let idx = set
                    .states()
                    .iter()
                    .position(|t| t.vector().density().matrix().max_abs_diff(img.matrix()) < 1e-12)
                    .expect("image is a stabilizer state");
                hit[idx] = true;
            }
            assert!(hit.iter().all(|&h| h));
        }
    }

    #[test]
    fn disk_cache_roundtrip_and_version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let built = load_or_build(2, dir.path()).unwrap();
        let path = cache_path(dir.path(), 2);
        assert!(path.exists());
        let loaded = load_or_build(2, dir.path()).unwrap();
        for (a, b) in built.states().iter().zip(loaded.states()) {
            assert_eq!(a.tableau_key(), b.tableau_key());
            assert_eq!(a.vector(), b.vector());
        }
        // a stale version is rebuilt and overwritten
        let text = fs::read_to_string(&path)
            .unwrap()
            .replace("\"version\":1", "\"version\":0");
        fs::write(&path, text).unwrap();
        let rebuilt = load_or_build(2, dir.path()).unwrap();
        assert_eq!(rebuilt.len(), 60);
        assert!(fs::read_to_string(&path).unwrap().contains("\"version\":1"));
    }
}
