//! Numerical studies built on the distance and extent LPs: tensor-product
//! deficits and their hemispheric pattern, family sweeps under noise,
//! Clifford non-monotonicity, submultiplicativity and the maximum of `C`.
//!
//! Every sweep evaluates its points in parallel and collects results in grid
//! order, so output does not depend on the thread count.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{self, FamilyId, FamilyRecord};
use crate::measures::{stabilizer_extent, tightness_ratio, wigner_distance, wigner_distance_vec};
use crate::output::{fmt_opt, fmt_sig};
use crate::phasespace::{permute_local, wigner, SymplecticMap};
use crate::qcore::{apply_unitary, depolarize, gates, haar_random_pure_with, ComplexMatrix, DensityMatrix, PureState};
use crate::stabgen::StabilizerSet;

/// A deficit at or below this counts as superadditive.
pub const SUPERADDITIVE_TOL: f64 = 1e-8;
/// `C` changes above this count as increases.
pub const INCREASE_TOL: f64 = 1e-8;
/// Wigner entries below `-NEG_COUNT_TOL` count as negative in scans.
pub const NEG_COUNT_TOL: f64 = 1e-9;

/// `C` with the shared stabilizer set of the state's size.
pub fn distance(rho: &DensityMatrix) -> Result<f64> {
    Ok(wigner_distance(rho, StabilizerSet::shared(rho.nqubits())?)?.c)
}

/// `Gamma` with the shared stabilizer set of the state's size.
pub fn extent(rho: &DensityMatrix) -> Result<f64> {
    Ok(stabilizer_extent(rho, StabilizerSet::shared(rho.nqubits())?)?.gamma)
}

/// Single-qubit magic state with Bloch vector `(1/√2, 1/√2, 0)`.
pub fn t_state() -> DensityMatrix {
    DensityMatrix::from_bloch(FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0).expect("pure Bloch vector")
}

/// Pure equatorial single-qubit state at azimuth `phi`.
pub fn equatorial(phi: f64) -> DensityMatrix {
    DensityMatrix::from_bloch_angles(PI / 2.0, phi)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Polar angles of the scan: 16 points from 0.1 to 3.04.
pub fn scan_thetas() -> Vec<f64> {
    linspace(0.1, 3.04, 16)
}

pub const SCAN_PHIS: [f64; 4] = [0.0, 0.7, 1.05, 2.1];

/// `(theta_B, phi_B)` of the five reference points at `phi_B = 1.05`.
pub fn table_points() -> Vec<(f64, f64)> {
    [PI / 2.0, 1.20, 0.35, 1.94, 2.80].iter().map(|&t| (t, 1.05)).collect()
}

/// The full `sigma` grid: 16 polar angles × 4 azimuths, plus the five
/// reference points, ordered by `(phi_B, theta_B)`.
pub fn scan_grid() -> Vec<(f64, f64)> {
    let mut grid: Vec<(f64, f64)> = SCAN_PHIS
        .iter()
        .flat_map(|&phi| scan_thetas().into_iter().map(move |t| (t, phi)))
        .chain(table_points())
        .collect();
    grid.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    grid.dedup();
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DichotomyRecord {
    pub theta_b: f64,
    pub phi_b: f64,
    pub bloch_sigma: [f64; 3],
    pub z_expect: f64,
    pub c_rho: f64,
    pub c_sigma: f64,
    pub c_joint: f64,
    pub deficit: f64,
    pub superadditive: bool,
}

impl DichotomyRecord {
    pub const HEADER: [&'static str; 11] = [
        "theta_b",
        "phi_b",
        "x",
        "y",
        "z",
        "c_rho",
        "c_sigma",
        "c_joint",
        "deficit",
        "superadditive",
        "deficit_over_c_rho",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let ratio = (self.c_rho > 1e-12).then(|| self.deficit / self.c_rho);
        vec![
            fmt_sig(self.theta_b),
            fmt_sig(self.phi_b),
            fmt_sig(self.bloch_sigma[0]),
            fmt_sig(self.bloch_sigma[1]),
            fmt_sig(self.bloch_sigma[2]),
            fmt_sig(self.c_rho),
            fmt_sig(self.c_sigma),
            fmt_sig(self.c_joint),
            fmt_sig(self.deficit),
            self.superadditive.to_string(),
            fmt_opt(ratio),
        ]
    }
}

fn require_single_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.nqubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: rho.nqubits(),
        });
    }
    Ok(())
}

/// Deficits `C(rho) + C(sigma) - C(rho ⊗ sigma)` for pure `sigma` at each
/// `(theta_B, phi_B)`.
pub fn dichotomy_scan(rho: &DensityMatrix, sigma_grid: &[(f64, f64)]) -> Result<Vec<DichotomyRecord>> {
    require_single_qubit(rho)?;
    let c_rho = distance(rho)?;
    sigma_grid
        .par_iter()
        .map(|&(theta_b, phi_b)| {
            let sigma = DensityMatrix::from_bloch_angles(theta_b, phi_b);
            let bloch = sigma.bloch_vector()?;
            let c_sigma = distance(&sigma)?;
            let c_joint = distance(&rho.tensor(&sigma)?)?;
            let deficit = c_rho + c_sigma - c_joint;
            Ok(DichotomyRecord {
                theta_b,
                phi_b,
                bloch_sigma: bloch,
                z_expect: bloch[2],
                c_rho,
                c_sigma,
                c_joint,
                deficit,
                superadditive: deficit <= SUPERADDITIVE_TOL,
            })
        })
        .collect()
}

/// Records where `⟨Z⟩_sigma <= 0` but the deficit is positive.
pub fn sign_condition_violations(records: &[DichotomyRecord]) -> Vec<DichotomyRecord> {
    records
        .iter()
        .filter(|r| r.deficit > SUPERADDITIVE_TOL && r.z_expect <= 0.0)
        .cloned()
        .collect()
}

/// Records whose superadditivity flag differs from `⟨Z⟩_sigma <= 0`.
pub fn hemisphere_mismatches(records: &[DichotomyRecord]) -> Vec<DichotomyRecord> {
    records
        .iter()
        .filter(|r| r.superadditive != (r.z_expect <= 0.0))
        .cloned()
        .collect()
}

/// Max over the grid of `|C(rho⊗sigma) - (C(rho) + C(sigma) + C(rho) C(sigma))|`
/// for equatorial pure `rho`, `sigma`.
pub fn equatorial_equality_check(phis_rho: &[f64], phis_sigma: &[f64]) -> Result<f64> {
    let singles = |phis: &[f64]| -> Result<Vec<f64>> { phis.par_iter().map(|&p| distance(&equatorial(p))).collect() };
    let c_rho = singles(phis_rho)?;
    let c_sigma = singles(phis_sigma)?;
    let pairs: Vec<(usize, usize)> = (0..phis_rho.len())
        .flat_map(|i| (0..phis_sigma.len()).map(move |j| (i, j)))
        .collect();
    let residuals: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let joint = distance(&equatorial(phis_rho[i]).tensor(&equatorial(phis_sigma[j]))?)?;
            let (a, b) = (c_rho[i], c_sigma[j]);
            Ok((joint - (a + b + a * b)).abs())
        })
        .collect::<Result<_>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SigmaFit {
    pub theta_b: f64,
    pub phi_b: f64,
    pub z_expect: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// False when the records do not vary `C(rho)`; `slope` is then the
    /// through-origin slope of the deficit against `⟨Z⟩_sigma`.
    pub comparable: bool,
    pub per_sigma: Vec<SigmaFit>,
}

fn fit_through_origin(xy: &[(f64, f64)]) -> (f64, f64, f64) {
    let sxx: f64 = xy.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = xy.iter().map(|(x, y)| x * y).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mean = xy.iter().map(|(_, y)| y).sum::<f64>() / xy.len() as f64;
    let ss_res = xy.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot = xy.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    (slope, ss_res, ss_tot)
}

/// Fits `deficit = g(sigma) · C(rho)` through the origin for each northern
/// `sigma`; the pooled slope is the mean of the per-`sigma` slopes and
/// `R² = 1 - Σ SS_res / Σ SS_tot`, with each `SS_tot` taken about that
/// `sigma`'s mean deficit.
pub fn deficit_regression(records: &[DichotomyRecord]) -> Result<RegressionResult> {
    let northern: Vec<&DichotomyRecord> = records.iter().filter(|r| r.z_expect > 0.0).collect();
    if northern.is_empty() {
        return Err(Error::Precondition("no northern sigma in the records".into()));
    }
    if northern.len() < 8 {
        return Err(Error::Precondition(format!(
            "{} northern points; at least 8 needed",
            northern.len()
        )));
    }
    let mut distinct_c: Vec<f64> = northern.iter().map(|r| r.c_rho).collect();
    distinct_c.sort_by(f64::total_cmp);
    distinct_c.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if distinct_c.len() < 2 {
        let xy: Vec<(f64, f64)> = northern.iter().map(|r| (r.z_expect, r.deficit)).collect();
        let (slope, ss_res, ss_tot) = fit_through_origin(&xy);
        return Ok(RegressionResult {
            slope,
            r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 },
            n_points: xy.len(),
            comparable: false,
            per_sigma: vec![],
        });
    }
    let mut groups: BTreeMap<(u64, u64), Vec<&DichotomyRecord>> = BTreeMap::new();
    for r in &northern {
        groups
            .entry((r.phi_b.to_bits(), r.theta_b.to_bits()))
            .or_default()
            .push(r);
    }
    let mut per_sigma = Vec::new();
    let (mut res_total, mut tot_total) = (0.0, 0.0);
    for rs in groups.values() {
        let xy: Vec<(f64, f64)> = rs.iter().map(|r| (r.c_rho, r.deficit)).collect();
        let (slope, ss_res, ss_tot) = fit_through_origin(&xy);
        res_total += ss_res;
        tot_total += ss_tot;
        per_sigma.push(SigmaFit {
            theta_b: rs[0].theta_b,
            phi_b: rs[0].phi_b,
            z_expect: rs[0].z_expect,
            slope,
            r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 0.0 },
            n_points: xy.len(),
        });
    }
    let slope = per_sigma.iter().map(|f| f.slope).sum::<f64>() / per_sigma.len() as f64;
    Ok(RegressionResult {
        slope,
        r_squared: if tot_total > 0.0 {
            1.0 - res_total / tot_total
        } else {
            0.0
        },
        n_points: northern.len(),
        comparable: true,
        per_sigma,
    })
}

/// Azimuths of the equatorial `rho` used for the regression: `2πk/24`.
pub fn regression_rho_phis() -> Vec<f64> {
    (0..24).map(|k| 2.0 * PI * k as f64 / 24.0).collect()
}

/// Northern scan points at `phi_B = 1.05`, excluding those within 0.1 rad
/// of the pole or the equator.
pub fn regression_sigma_points() -> Vec<(f64, f64)> {
    scan_thetas()
        .into_iter()
        .filter(|&t| t > 0.1 + 1e-9 && t < PI / 2.0 - 0.1)
        .map(|t| (t, 1.05))
        .collect()
}

/// Dichotomy records for every `(rho, sigma)` pair of a regression design.
pub fn regression_records(rho_phis: &[f64], sigma_points: &[(f64, f64)]) -> Result<Vec<DichotomyRecord>> {
    let mut out = Vec::with_capacity(rho_phis.len() * sigma_points.len());
    for &phi in rho_phis {
        out.extend(dichotomy_scan(&equatorial(phi), sigma_points)?);
    }
    Ok(out)
}

/// `kappa` is flat when every record's ratio is within `tol` of the family
/// constant.
pub fn kappa_sweep(family: FamilyId, thetas: &[f64]) -> Result<(Vec<FamilyRecord>, bool)> {
    let records = families::family_sweep(family, thetas, StabilizerSet::shared(2)?)?;
    let flat = records
        .iter()
        .all(|r| r.kappa.is_some_and(|k| (k - family.kappa()).abs() <= 1e-6));
    Ok((records, flat))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseRecord {
    pub p: f64,
    pub c: f64,
    pub gamma: f64,
    pub kappa: Option<f64>,
}

impl NoiseRecord {
    pub const HEADER: [&'static str; 4] = ["p", "c", "gamma", "kappa"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt_sig(self.p),
            fmt_sig(self.c),
            fmt_sig(self.gamma),
            fmt_opt(self.kappa),
        ]
    }
}

/// `C`, `Gamma` and `kappa` of the two-qubit depolarized family state.
pub fn noise_sweep(family: FamilyId, theta: f64, p_grid: &[f64]) -> Result<Vec<NoiseRecord>> {
    if family == FamilyId::BellRz {
        return Err(Error::Precondition("noise sweeps cover the ry and rx families".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(0.0..1.0).contains(*p)) {
        return Err(Error::InvalidProbability(*p));
    }
    let rho = families::family_state(family, theta)?.density();
    p_grid
        .par_iter()
        .map(|&p| {
            let noisy = depolarize(&rho, p)?;
            let c = distance(&noisy)?;
            let gamma = extent(&noisy)?;
            Ok(NoiseRecord {
                p,
                c,
                gamma,
                kappa: tightness_ratio(c, gamma),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseVerdict {
    pub p_star: f64,
    /// Largest `|kappa - kappa_family|` over `p <= p* - 0.01` (infinite if
    /// any such `kappa` is undefined).
    pub max_kappa_deviation: f64,
    /// Largest `C` over `p >= p* + 0.01`.
    pub max_c_above: f64,
    pub kappa_ok: bool,
    pub vanishing_ok: bool,
}

pub fn noise_verdict(family: FamilyId, theta: f64, records: &[NoiseRecord]) -> Result<NoiseVerdict> {
    let p_star = families::critical_noise(theta)?;
    let max_kappa_deviation = records
        .iter()
        .filter(|r| r.p <= p_star - 0.01)
        .map(|r| r.kappa.map_or(f64::INFINITY, |k| (k - family.kappa()).abs()))
        .fold(0.0, f64::max);
    let max_c_above = records
        .iter()
        .filter(|r| r.p >= p_star + 0.01)
        .map(|r| r.c)
        .fold(0.0, f64::max);
    Ok(NoiseVerdict {
        p_star,
        max_kappa_deviation,
        max_c_above,
        kappa_ok: max_kappa_deviation <= 1e-5,
        vanishing_ok: max_c_above <= 1e-6,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonotonicityStats {
    pub n_samples: usize,
    pub fraction_increased: f64,
    pub fraction_decreased: f64,
    pub max_increase: f64,
    pub seed: u64,
}

/// `H ⊗ I` on two qubits.
pub fn hadamard_first() -> ComplexMatrix {
    gates::hadamard().kron(&ComplexMatrix::identity(2))
}

/// `(C before, C after)` of `H ⊗ I` for each state.
pub fn clifford_changes(states: &[PureState]) -> Result<Vec<(f64, f64)>> {
    let u = hadamard_first();
    states
        .par_iter()
        .map(|psi| {
            let rho = psi.density();
            let after = apply_unitary(&rho, &u)?;
            Ok((distance(&rho)?, distance(&after)?))
        })
        .collect()
}

impl MonotonicityStats {
    /// Summary of `(C before, C after)` pairs.
    pub fn from_changes(changes: &[(f64, f64)], seed: u64) -> Self {
        let n = changes.len();
        let up = changes.iter().filter(|(a, b)| b - a > INCREASE_TOL).count();
        let down = changes.iter().filter(|(a, b)| a - b > INCREASE_TOL).count();
        let max_increase = changes.iter().map(|(a, b)| b - a).fold(0.0, f64::max);
        Self {
            n_samples: n,
            fraction_increased: up as f64 / n as f64,
            fraction_decreased: down as f64 / n as f64,
            max_increase,
            seed,
        }
    }
}

/// Haar-random two-qubit pure states from a seeded ChaCha8 stream.
pub fn haar_samples(nqubits: usize, n: usize, seed: u64) -> Result<Vec<PureState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| haar_random_pure_with(nqubits, &mut rng)).collect()
}

/// Fraction of Haar states whose `C` grows by more than [`INCREASE_TOL`]
/// under `H ⊗ I`.
pub fn monotonicity_sample(n_samples: usize, seed: u64) -> Result<MonotonicityStats> {
    if n_samples < 100 {
        return Err(Error::Precondition(format!("{n_samples} samples; at least 100 needed")));
    }
    let states = haar_samples(2, n_samples, seed)?;
    Ok(MonotonicityStats::from_changes(&clifford_changes(&states)?, seed))
}

/// Statistics over an explicit list of states.
pub fn monotonicity_on(states: &[PureState]) -> Result<MonotonicityStats> {
    if states.is_empty() {
        return Err(Error::Precondition("no states".into()));
    }
    Ok(MonotonicityStats::from_changes(&clifford_changes(states)?, 0))
}

/// Number of stabilizer Wigner vectors pushed outside the stabilizer polytope
/// by the phase-space transposition `(q, p) -> (p, q)` on the first qubit.
pub fn permuted_stabilizers_outside(set: &StabilizerSet) -> Result<usize> {
    let outside: Vec<bool> = set
        .states()
        .par_iter()
        .map(|s| {
            let moved = permute_local(s.wigner(), 0, SymplecticMap::Swap);
            Ok(wigner_distance_vec(&moved, set)?.c > crate::measures::MEMBERSHIP_TOL)
        })
        .collect::<Result<_>>()?;
    Ok(outside.into_iter().filter(|o| *o).count())
}

/// `C(rho ⊗ rho) - 2 C(rho)` per state.
pub fn self_tensor_check(rhos: &[DensityMatrix]) -> Result<Vec<f64>> {
    rhos.par_iter()
        .map(|rho| {
            require_single_qubit(rho)?;
            Ok(distance(&rho.tensor(rho)?)? - 2.0 * distance(rho)?)
        })
        .collect()
}

/// `Gamma(rho) Gamma(sigma) - Gamma(rho ⊗ sigma)` per pair.
pub fn submultiplicativity_check(pairs: &[(DensityMatrix, DensityMatrix)]) -> Result<Vec<f64>> {
    if pairs.len() < 50 {
        return Err(Error::Precondition(format!(
            "{} pairs; at least 50 needed",
            pairs.len()
        )));
    }
    submultiplicativity_slacks(pairs)
}

/// Same as [`submultiplicativity_check`] without the sample-size floor.
pub fn submultiplicativity_slacks(pairs: &[(DensityMatrix, DensityMatrix)]) -> Result<Vec<f64>> {
    pairs
        .par_iter()
        .map(|(a, b)| {
            require_single_qubit(a)?;
            require_single_qubit(b)?;
            Ok(extent(a)? * extent(b)? - extent(&a.tensor(b)?)?)
        })
        .collect()
}

/// Seeded Haar single-qubit pairs.
pub fn haar_pairs(n: usize, seed: u64) -> Result<Vec<(DensityMatrix, DensityMatrix)>> {
    let states = haar_samples(1, 2 * n, seed)?;
    Ok(states.chunks(2).map(|c| (c[0].density(), c[1].density())).collect())
}

/// Two-qubit pure state from three angles in `[0, π/2]` and three phases:
/// `(cos a, sin a cos b e^{iφ1}, sin a sin b cos c e^{iφ2}, sin a sin b sin c e^{iφ3})`.
pub fn chart_state(x: &[f64; 6]) -> PureState {
    let [a, b, c, p1, p2, p3] = *x;
    let amps = vec![
        Complex64::new(a.cos(), 0.0),
        Complex64::from_polar(a.sin() * b.cos(), p1),
        Complex64::from_polar(a.sin() * b.sin() * c.cos(), p2),
        Complex64::from_polar(a.sin() * b.sin() * c.sin(), p3),
    ];
    PureState::normalized(amps).expect("unit vector")
}

fn chart_range(k: usize) -> (f64, f64, bool) {
    if k < 3 {
        (0.0, PI / 2.0, false)
    } else {
        (0.0, 2.0 * PI, true)
    }
}

fn chart_value(x: &[f64; 6], set: &StabilizerSet) -> f64 {
    wigner_distance(&chart_state(x).density(), set).map_or(f64::NEG_INFINITY, |d| d.c)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const COARSE_POINTS: usize = 16;
const MAX_SWEEPS: usize = 25;

/// Golden-section maximization of `f` on `[lo, hi]`.
fn golden_max(f: &mut impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate-wise ascent from `start`: each coordinate is scanned on a
/// coarse grid over its range and the best bracket refined by golden section.
pub fn local_max_c(start: [f64; 6], set: &StabilizerSet) -> (f64, [f64; 6]) {
    let mut x = start;
    let mut best = chart_value(&x, set);
    for _ in 0..MAX_SWEEPS {
        let before = best;
        for k in 0..6 {
            let (lo, hi, periodic) = chart_range(k);
            let step = (hi - lo) / COARSE_POINTS as f64;
            let mut probe = x;
            let mut eval = |v: f64| {
                probe[k] = v;
                chart_value(&probe, set)
            };
            let mut cand = (x[k], best);
            let n = if periodic { COARSE_POINTS } else { COARSE_POINTS + 1 };
            for i in 0..n {
                let v = lo + step * i as f64;
                let fv = eval(v);
                if fv > cand.1 {
                    cand = (v, fv);
                }
            }
            let (mut a, mut b) = (cand.0 - step, cand.0 + step);
            if !periodic {
                a = a.max(lo);
                b = b.min(hi);
            }
            let refined = golden_max(&mut eval, a, b, 1e-6);
            if refined.1 > cand.1 {
                cand = refined;
            }
            if cand.1 > best {
                best = cand.1;
                x[k] = if periodic { cand.0.rem_euclid(2.0 * PI) } else { cand.0 };
            }
        }
        if best - before < 1e-10 {
            break;
        }
    }
    (best, x)
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxCResult {
    pub best_c: f64,
    pub params: [f64; 6],
    pub amplitudes: Vec<[f64; 2]>,
    pub neg_entries: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Best value reached by each restart, in restart order.
    pub restart_values: Vec<f64>,
}

/// Multi-start maximization of `C` over pure two-qubit states.
pub fn max_c_search(restarts: usize, seed: u64) -> Result<MaxCResult> {
    if restarts < 20 {
        return Err(Error::Precondition(format!("{restarts} restarts; at least 20 needed")));
    }
    let set = StabilizerSet::shared(2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<[f64; 6]> = (0..restarts)
        .map(|_| {
            std::array::from_fn(|k| {
                let (lo, hi, _) = chart_range(k);
                rng.random_range(lo..hi)
            })
        })
        .collect();
    let runs: Vec<(f64, [f64; 6])> = starts.par_iter().map(|s| local_max_c(*s, set)).collect();
    let (best_c, params) = runs.iter().copied().fold(
        (f64::NEG_INFINITY, [0.0; 6]),
        |acc, r| if r.0 > acc.0 { r } else { acc },
    );
    let state = chart_state(&params);
    let neg_entries = wigner(&state.density()).negative_count(NEG_COUNT_TOL);
    Ok(MaxCResult {
        best_c,
        params,
        amplitudes: state.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        neg_entries,
        restarts,
        seed,
        restart_values: runs.iter().map(|r| r.0).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NegativeScan {
    pub n_samples: usize,
    pub seed: u64,
    pub max_count: usize,
    /// Histogram of negative-entry counts, index = count.
    pub histogram: Vec<usize>,
    /// Amplitudes of every sample with more than six negative entries.
    pub violations: Vec<Vec<[f64; 2]>>,
}

/// Negative-entry counts of Haar-random pure two-qubit Wigner vectors.
pub fn six_negative_scan(n_samples: usize, seed: u64) -> Result<NegativeScan> {
    let states = haar_samples(2, n_samples, seed)?;
    let counts: Vec<usize> = states
        .par_iter()
        .map(|s| wigner(&s.density()).negative_count(NEG_COUNT_TOL))
        .collect();
    let mut histogram = vec![0; 17];
    for &c in &counts {
        histogram[c] += 1;
    }
    let violations = states
        .iter()
        .zip(&counts)
        .filter(|(_, c)| **c > 6)
        .map(|(s, _)| s.amplitudes().iter().map(|a| [a.re, a.im]).collect())
        .collect();
    Ok(NegativeScan {
        n_samples,
        seed,
        max_count: counts.into_iter().max().unwrap_or(0),
        histogram,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Single-qubit oracle `(|x| + |y| + |z| - 1)/2`, clamped at zero.
    fn c1_oracle(b: [f64; 3]) -> f64 {
        ((b[0].abs() + b[1].abs() + b[2].abs() - 1.0) / 2.0).max(0.0)
    }

    #[test]
    fn scan_grid_embeds_reference_points() {
        let g = scan_grid();
        assert_eq!(g.len(), 64 + 5);
        for p in table_points() {
            assert!(g.contains(&p));
        }
    }

    #[test]
    fn dichotomy_records_are_consistent() {
        let recs = dichotomy_scan(&t_state(), &table_points()).unwrap();
        for r in &recs {
            assert_abs_diff_eq!(r.deficit, r.c_rho + r.c_sigma - r.c_joint, epsilon = 1e-12);
            assert_abs_diff_eq!(r.c_sigma, c1_oracle(r.bloch_sigma), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(recs[0].c_joint, 0.427, epsilon = 0.002);
        assert!(recs[0].superadditive);
        assert!(dichotomy_scan(&equatorial(0.0).tensor(&equatorial(0.0)).unwrap(), &[(0.1, 0.0)]).is_err());
    }

    #[test]
    fn equatorial_examples() {
        let r = equatorial_equality_check(&[PI / 4.0], &[PI / 4.0]).unwrap();
        assert!(r <= 1e-8, "{r}");
        let plus = equatorial_equality_check(&[PI / 4.0], &[0.0]).unwrap();
        assert!(plus <= 1e-12);
    }

    fn synthetic(c_rhos: &[f64], zs: &[f64], slope: f64) -> Vec<DichotomyRecord> {
        let mut out = vec![];
        for &c in c_rhos {
            for &z in zs {
                out.push(DichotomyRecord {
                    theta_b: z.acos(),
                    phi_b: 0.0,
                    bloch_sigma: [0.0, 0.0, z],
                    z_expect: z,
                    c_rho: c,
                    c_sigma: 0.0,
                    c_joint: 0.0,
                    deficit: slope * c * z,
                    superadditive: false,
                });
            }
        }
        out
    }

    #[test]
    fn regression_recovers_synthetic_slopes() {
        let recs = synthetic(&[0.0, 0.05, 0.1, 0.2], &[0.5, 1.0], 0.4);
        let r = deficit_regression(&recs).unwrap();
        assert!(r.comparable);
        // per-sigma slopes 0.2 and 0.4 average to 0.3
        assert_abs_diff_eq!(r.slope, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r_squared, 1.0, epsilon = 1e-12);
        assert_eq!(r.per_sigma.len(), 2);

        let south = synthetic(&[0.1, 0.2, 0.3, 0.4], &[-0.5, 0.0], 0.4);
        assert!(deficit_regression(&south).is_err());
        let few = synthetic(&[0.1, 0.2], &[0.5, 1.0], 0.4);
        assert!(deficit_regression(&few).is_err());

        let fixed = synthetic(&[0.2], &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8], 0.5);
        let r = deficit_regression(&fixed).unwrap();
        assert!(!r.comparable);
        assert_abs_diff_eq!(r.slope, 0.1, epsilon = 1e-12);
    }

    #[test]
    fn noise_sweep_at_zero_noise() {
        let recs = noise_sweep(FamilyId::Rx, PI / 4.0, &[0.0, 0.29]).unwrap();
        for r in &recs {
            assert_abs_diff_eq!(r.kappa.unwrap(), 2.0, epsilon = 1e-5);
        }
        assert!(noise_sweep(FamilyId::BellRz, 0.3, &[0.0]).is_err());
        assert!(noise_sweep(FamilyId::Rx, 0.3, &[1.0]).is_err());
    }

    #[test]
    fn monotonicity_on_stabilizers_counts_no_increase() {
        let set = StabilizerSet::shared(2).unwrap();
        let states: Vec<PureState> = set.states().iter().map(|s| s.vector().clone()).collect();
        let m = monotonicity_on(&states).unwrap();
        assert_eq!(m.fraction_increased, 0.0);
        assert!(monotonicity_sample(10, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = haar_samples(2, 5, 9).unwrap();
        let b = haar_samples(2, 5, 9).unwrap();
        assert_eq!(a, b);
        let s1 = six_negative_scan(200, 3).unwrap();
        let s2 = six_negative_scan(200, 3).unwrap();
        assert_eq!(s1.histogram, s2.histogram);
    }

    #[test]
    fn tensor_checks_on_stabilizers() {
        let zero = PureState::basis(1, 0).unwrap().density();
        let m = self_tensor_check(std::slice::from_ref(&zero)).unwrap();
        assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-12);
        let s = submultiplicativity_slacks(&[(zero.clone(), zero)]).unwrap();
        assert_abs_diff_eq!(s[0], 0.0, epsilon = 1e-9);
        let t = self_tensor_check(&[t_state()]).unwrap();
        assert!(t[0] >= -1e-8);
        assert!(submultiplicativity_check(&haar_pairs(10, 0).unwrap()).is_err());
    }

    #[test]
    fn local_search_from_stabilizer_start_is_sane() {
        let set = StabilizerSet::shared(2).unwrap();
        let (c, x) = local_max_c([0.0; 6], set);
        assert!(c >= 0.0);
        assert_abs_diff_eq!(chart_value(&x, set), c, epsilon = 1e-12);
        assert!(max_c_search(1, 0).is_err());
    }

    #[test]
    fn chart_covers_basis_and_bell() {
        let zero = chart_state(&[0.0; 6]);
        assert_abs_diff_eq!(zero.amplitudes()[0].re, 1.0);
        let bell = chart_state(&[PI / 4.0, PI / 2.0, PI / 2.0, 0.0, 0.0, 0.0]);
        assert_abs_diff_eq!(bell.amplitudes()[3].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        // a stabilizer state, yet four entries equal -1/8 in this phase space
        let w = wigner(&bell.density());
        assert_eq!(w.negative_count(NEG_COUNT_TOL), 4);
        assert!(w.values().iter().all(|v| *v > -0.125 - 1e-12));
    }
}
