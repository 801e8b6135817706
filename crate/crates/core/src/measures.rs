//! Wigner distance `C`, stabilizer extent `Gamma` and the ratio `kappa`.
//!
//! `C(rho)` is the l1 distance from `W_rho` to the convex hull of the
//! stabilizer Wigner vectors. It is computed from the linear program
//!
//! ```text
//! minimize sum_k t_k
//!   s.t.  W_rho(k) - sum_i lambda_i W_i(k) <= t_k      (dual u_k)
//!         sum_i lambda_i W_i(k) - W_rho(k) <= t_k      (dual v_k)
//!         sum_i lambda_i = 1,  lambda, t >= 0
//! ```
//!
//! whose duals give the witness `S = u - v` with `|S(k)| <= 1`. For any
//! optimal dual, `<S, W_rho> - max_i <S, W_i>` equals `C(rho)`.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::lpsolve::{solve, Certificate, LpProblem, LpSolution};
use crate::phasespace::{phase_point_operators, wigner, WignerVector};
use crate::qcore::{ComplexMatrix, DensityMatrix};
use crate::stabgen::StabilizerSet;

/// `kappa` is reported only when `C` exceeds this.
pub const KAPPA_THRESHOLD: f64 = 1e-6;
/// Distance below which a vector counts as inside the stabilizer polytope.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct DualWitness {
    pub svec: Vec<f64>,
    /// `H = sum_alpha S(alpha) A_alpha`.
    pub operator: ComplexMatrix,
    pub free_max: f64,
    pub gap: f64,
}

impl DualWitness {
    fn from_svec(svec: Vec<f64>, w: &WignerVector, set: &StabilizerSet) -> Self {
        let free_max = set
            .states()
            .iter()
            .map(|s| s.wigner().dot(&svec))
            .fold(f64::NEG_INFINITY, f64::max);
        let gap = w.dot(&svec) - free_max;
        let ops = phase_point_operators(w.nqubits());
        let dim = 1 << w.nqubits();
        let mut operator = ComplexMatrix::zeros(dim);
        for (s, a) in svec.iter().zip(ops) {
            if *s != 0.0 {
                operator = &operator + &a.scale_real(*s);
            }
        }
        Self {
            svec,
            operator,
            free_max,
            gap,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.svec.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Value of `<S, W>` for an arbitrary vector.
    pub fn evaluate(&self, w: &WignerVector) -> f64 {
        w.dot(&self.svec)
    }
}

impl Serialize for DualWitness {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("DualWitness", 3)?;
        st.serialize_field("svec", &self.svec)?;
        st.serialize_field("free_max", &self.free_max)?;
        st.serialize_field("gap", &self.gap)?;
        st.end()
    }
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub c: f64,
    /// Convex weights over the stabilizer set of an optimal nearest point.
    pub weights: Vec<f64>,
    pub witness: DualWitness,
    pub certificate: Certificate,
}

/// Signed decomposition over the stabilizer set.
#[derive(Clone, Debug, PartialEq)]
pub struct StabDecomposition {
    pub coefficients: Vec<f64>,
    pub l1: f64,
}

impl StabDecomposition {
    /// `sum_i alpha_i W_i`.
    pub fn reconstruct(&self, set: &StabilizerSet) -> Vec<f64> {
        let d = 1 << (2 * set.nqubits());
        let mut out = vec![0.0; d];
        for (a, s) in self.coefficients.iter().zip(set.states()) {
            if *a != 0.0 {
                for (o, w) in out.iter_mut().zip(s.wigner().values()) {
                    *o += a * w;
                }
            }
        }
        out
    }

    /// Non-negligible coefficients keyed by stabilizer index.
    pub fn sparse(&self) -> BTreeMap<usize, f64> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, a)| a.abs() > 1e-12)
            .map(|(i, a)| (i, *a))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExtentResult {
    pub gamma: f64,
    pub decomposition: StabDecomposition,
    pub certificate: Certificate,
}

fn check_sizes(w: &WignerVector, set: &StabilizerSet) -> Result<()> {
    if w.nqubits() != set.nqubits() {
        return Err(Error::DimensionMismatch {
            expected: set.nqubits(),
            got: w.nqubits(),
        });
    }
    Ok(())
}

fn require_optimal(sol: LpSolution, what: &str) -> Result<LpSolution> {
    if !sol.is_optimal() {
        return Err(Error::Lp(format!("{what} LP ended with status {:?}", sol.status)));
    }
    Ok(sol)
}

/// The distance LP in the variable order `(lambda_1..lambda_N, t_1..t_d)`,
/// inequality rows `(u_1..u_d, v_1..v_d)` and one equality row.
pub fn distance_problem(w: &WignerVector, set: &StabilizerSet) -> LpProblem {
    let n_states = set.len();
    let d = w.len();
    let mut objective = vec![0.0; n_states];
    objective.extend(std::iter::repeat_n(1.0, d));
    let mut p = LpProblem::new(objective);
    for sign in [-1.0, 1.0] {
        for k in 0..d {
            let mut row: Vec<f64> = set.states().iter().map(|s| sign * s.wigner().values()[k]).collect();
            row.extend((0..d).map(|j| if j == k { -1.0 } else { 0.0 }));
            p.add_ub(row, sign * w.values()[k]);
        }
    }
    let mut simplex = vec![1.0; n_states];
    simplex.extend(std::iter::repeat_n(0.0, d));
    p.add_eq(simplex, 1.0);
    p
}

/// `C` of an arbitrary length-`4^n` vector (not necessarily a state's).
pub fn wigner_distance_vec(w: &WignerVector, set: &StabilizerSet) -> Result<DistanceResult> {
    check_sizes(w, set)?;
    let problem = distance_problem(w, set);
    let sol = require_optimal(solve(&problem)?, "distance")?;
    let certificate = sol.certificate(&problem);
    let d = w.len();
    let svec: Vec<f64> = (0..d).map(|k| sol.ub_duals[k] - sol.ub_duals[d + k]).collect();
    let weights = sol.primal[..set.len()].iter().map(|x| x.max(0.0)).collect();
    Ok(DistanceResult {
        c: sol.objective_value.max(0.0),
        weights,
        witness: DualWitness::from_svec(svec, w, set),
        certificate,
    })
}

pub fn wigner_distance(rho: &DensityMatrix, set: &StabilizerSet) -> Result<DistanceResult> {
    wigner_distance_vec(&wigner(rho), set)
}

/// The extent LP over split coefficients `(alpha+, alpha-)` with one equality
/// per phase-space point.
pub fn extent_problem(w: &WignerVector, set: &StabilizerSet) -> LpProblem {
    let n_states = set.len();
    let mut p = LpProblem::new(vec![1.0; 2 * n_states]);
    for k in 0..w.len() {
        let plus = set.states().iter().map(|s| s.wigner().values()[k]);
        let minus = set.states().iter().map(|s| -s.wigner().values()[k]);
        p.add_eq(plus.chain(minus).collect(), w.values()[k]);
    }
    p
}

pub fn stabilizer_extent_vec(w: &WignerVector, set: &StabilizerSet) -> Result<ExtentResult> {
    check_sizes(w, set)?;
    let problem = extent_problem(w, set);
    let sol = require_optimal(solve(&problem)?, "extent")?;
    let certificate = sol.certificate(&problem);
    let n = set.len();
    let coefficients: Vec<f64> = (0..n).map(|i| sol.primal[i] - sol.primal[n + i]).collect();
    let l1 = coefficients.iter().map(|a| a.abs()).sum();
    Ok(ExtentResult {
        gamma: sol.objective_value,
        decomposition: StabDecomposition { coefficients, l1 },
        certificate,
    })
}

pub fn stabilizer_extent(rho: &DensityMatrix, set: &StabilizerSet) -> Result<ExtentResult> {
    stabilizer_extent_vec(&wigner(rho), set)
}

/// `(Gamma - 1) / C`, undefined when `C` is at or below [`KAPPA_THRESHOLD`].
pub fn tightness_ratio(c: f64, gamma: f64) -> Option<f64> {
    (c > KAPPA_THRESHOLD).then(|| (gamma - 1.0) / c)
}

/// Slack `Gamma - 1 - C / M_n` of the simulation bound.
pub fn check_simulation_bound(rho: &DensityMatrix, set: &StabilizerSet, m_n: f64) -> Result<f64> {
    let c = wigner_distance(rho, set)?.c;
    let gamma = stabilizer_extent(rho, set)?.gamma;
    Ok(gamma - 1.0 - c / m_n)
}

pub fn polytope_membership(w: &WignerVector, set: &StabilizerSet) -> Result<bool> {
    Ok(wigner_distance_vec(w, set)?.c <= MEMBERSHIP_TOL)
}

#[derive(Clone, Debug)]
pub struct MagicReport {
    pub c: f64,
    pub gamma: f64,
    pub kappa: Option<f64>,
    pub witness: DualWitness,
    pub nearest_free: Vec<f64>,
    pub decomposition: StabDecomposition,
}

impl MagicReport {
    pub fn compute(rho: &DensityMatrix, set: &StabilizerSet) -> Result<Self> {
        let w = wigner(rho);
        let dist = wigner_distance_vec(&w, set)?;
        let ext = stabilizer_extent_vec(&w, set)?;
        Ok(Self {
            c: dist.c,
            gamma: ext.gamma,
            kappa: tightness_ratio(dist.c, ext.gamma),
            witness: dist.witness,
            nearest_free: dist.weights,
            decomposition: ext.decomposition,
        })
    }
}

impl Serialize for MagicReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let decomposition: BTreeMap<String, f64> = self
            .decomposition
            .sparse()
            .into_iter()
            .map(|(i, a)| (i.to_string(), a))
            .collect();
        let mut st = serializer.serialize_struct("MagicReport", 5)?;
        st.serialize_field("c", &self.c)?;
        st.serialize_field("gamma", &self.gamma)?;
        st.serialize_field("kappa", &self.kappa)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("decomposition", &decomposition)?;
        st.end()
    }
}
