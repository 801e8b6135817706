//! The three one-parameter families inside the two-qubit repetition code
//! `span{|00>, |11>}`: closed forms for `C`, `Gamma` and `kappa`, logical
//! Pauli witnesses, correctable-error round trips and noise thresholds.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{stabilizer_extent_vec, tightness_ratio, wigner_distance_vec};
use crate::phasespace::{phase_point_operators, wigner, WignerVector};
use crate::qcore::{ComplexMatrix, DensityMatrix, Pauli, PauliString, PureState};
use crate::stabgen::StabilizerSet;

/// Tolerance for the codespace support check.
pub const CODESPACE_TOL: f64 = 1e-9;
/// Wigner entries below `-NEGATIVE_TOL` count as negative.
pub const NEGATIVE_TOL: f64 = 1e-12;
/// Adaptive witnesses are undefined within this distance of `sin = 0` or `cos = 0`.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FamilyId {
    Ry,
    Rx,
    BellRz,
}

impl FamilyId {
    pub const ALL: [FamilyId; 3] = [FamilyId::Ry, FamilyId::Rx, FamilyId::BellRz];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Ry => "ry",
            FamilyId::Rx => "rx",
            FamilyId::BellRz => "brz",
        }
    }

    /// `kappa` on the whole family.
    pub fn kappa(self) -> f64 {
        match self {
            FamilyId::Rx => 2.0,
            FamilyId::Ry | FamilyId::BellRz => 1.0,
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ry" => Ok(FamilyId::Ry),
            "rx" => Ok(FamilyId::Rx),
            "brz" | "bellrz" | "bell-rz" => Ok(FamilyId::BellRz),
            _ => Err(Error::Precondition(format!("unknown family {s:?}"))),
        }
    }
}

/// Logical operators of the two-qubit bit-flip repetition code.
#[derive(Clone, Debug)]
pub struct LogicalFrame {
    pub xl: ComplexMatrix,
    pub yl: ComplexMatrix,
    pub zl: ComplexMatrix,
    pub stabilizer: ComplexMatrix,
}

impl LogicalFrame {
    pub fn repetition() -> Self {
        let m = |s: &str| s.parse::<PauliString>().expect("valid literal").matrix();
        Self {
            xl: m("XX"),
            yl: m("YX"),
            zl: m("ZI"),
            stabilizer: m("ZZ"),
        }
    }

    /// Projector onto the `Z⊗Z = +1` eigenspace.
    pub fn code_projector(&self) -> ComplexMatrix {
        (&ComplexMatrix::identity(4) + &self.stabilizer).scale_real(0.5)
    }
}

impl Default for LogicalFrame {
    fn default() -> Self {
        Self::repetition()
    }
}

#[derive(Clone, Debug)]
pub struct FamilyPoint {
    pub family: FamilyId,
    pub theta: f64,
    pub state: PureState,
}

impl FamilyPoint {
    pub fn density(&self) -> DensityMatrix {
        self.state.density()
    }
}

/// `Ry`: `cos(θ/2)|00> + sin(θ/2)|11>`; `Rx`: `cos(θ/2)|00> - i sin(θ/2)|11>`;
/// `BellRz`: `(|00> + e^{iθ}|11>)/√2`.
pub fn family_state(family: FamilyId, theta: f64) -> Result<FamilyPoint> {
    if !theta.is_finite() {
        return Err(Error::Precondition(format!("theta must be finite, got {theta}")));
    }
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (a00, a11) = match family {
        FamilyId::Ry => (Complex64::new(c, 0.0), Complex64::new(s, 0.0)),
        FamilyId::Rx => (Complex64::new(c, 0.0), Complex64::new(0.0, -s)),
        FamilyId::BellRz => (
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::from_polar(FRAC_1_SQRT_2, theta),
        ),
    };
    let zero = Complex64::new(0.0, 0.0);
    let state = PureState::normalized(vec![a00, zero, zero, a11])?;
    Ok(FamilyPoint { family, theta, state })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub c: f64,
    pub gamma: f64,
    pub kappa: Option<f64>,
}

pub fn closed_form(family: FamilyId, theta: f64) -> ClosedForm {
    let gamma = theta.sin().abs() + theta.cos().abs();
    let c = match family {
        FamilyId::Ry | FamilyId::BellRz => gamma - 1.0,
        FamilyId::Rx => 0.5 * (gamma - 1.0),
    }
    .max(0.0);
    ClosedForm {
        c,
        gamma,
        kappa: tightness_ratio(c, gamma),
    }
}

fn strict_sign(x: f64, theta: f64) -> Result<f64> {
    if x.abs() < BOUNDARY_TOL {
        return Err(Error::WitnessBoundary(theta));
    }
    Ok(x.signum())
}

/// Piecewise-constant logical witness of each family:
/// `Ry`: `sign(cos θ) Z_L + sign(sin θ) X_L`,
/// `Rx`: `(sign(cos θ) Z_L - sign(sin θ) Y_L) / 2`,
/// `BellRz`: `sign(cos θ) X_L + sign(sin θ) Y_L`.
pub fn closed_form_witness(family: FamilyId, theta: f64, frame: &LogicalFrame) -> Result<ComplexMatrix> {
    let sc = strict_sign(theta.cos(), theta)?;
    let ss = strict_sign(theta.sin(), theta)?;
    let h = match family {
        FamilyId::Ry => &frame.zl.scale_real(sc) + &frame.xl.scale_real(ss),
        FamilyId::Rx => (&frame.zl.scale_real(sc) - &frame.yl.scale_real(ss)).scale_real(0.5),
        FamilyId::BellRz => &frame.xl.scale_real(sc) + &frame.yl.scale_real(ss),
    };
    Ok(h)
}

/// Operator-level witness evaluation against the enumerated stabilizer states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorGap {
    pub value: f64,
    pub free_max: f64,
    pub gap: f64,
}

/// `Tr(H rho) - max_sigma Tr(H sigma)` over the pure stabilizer states.
pub fn operator_gap(h: &ComplexMatrix, rho: &DensityMatrix, set: &StabilizerSet) -> Result<OperatorGap> {
    if h.dim() != rho.dim() || rho.nqubits() != set.nqubits() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: h.dim(),
        });
    }
    let value = rho.expectation(h);
    let free_max = set
        .states()
        .iter()
        .map(|s| {
            let v = s.vector().amplitudes();
            let hv = h.apply(v);
            v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(OperatorGap {
        value,
        free_max,
        gap: value - free_max,
    })
}

/// Phase-space coefficients `S(α) = Tr(H A_α)`, so that `<S, W_rho> = Tr(H rho)`.
pub fn witness_svec(h: &ComplexMatrix, nqubits: usize) -> Vec<f64> {
    phase_point_operators(nqubits)
        .iter()
        .map(|a| h.trace_product(a).re)
        .collect()
}

/// How a logical witness sits relative to the LP's normalization
/// `|S(α)| <= 1`: its sup norm, and the gap after dividing by it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessScale {
    pub operator_gap: f64,
    pub sup_norm: f64,
    pub normalized_gap: f64,
}

pub fn witness_scale(h: &ComplexMatrix, rho: &DensityMatrix, set: &StabilizerSet) -> Result<WitnessScale> {
    let g = operator_gap(h, rho, set)?;
    let sup_norm = witness_svec(h, rho.nqubits())
        .iter()
        .fold(0.0f64, |m, s| m.max(s.abs()));
    Ok(WitnessScale {
        operator_gap: g.gap,
        sup_norm,
        normalized_gap: g.gap / sup_norm,
    })
}

/// The 4×4 matrix `8 W` for `(|00> + e^{iθ}|11>)/√2`, rows indexed by the
/// first qubit's point and columns by the second's, both in the order
/// `(0,0), (0,1), (1,0), (1,1)`.
pub fn brz_wigner_closed_form(theta: f64) -> WignerVector {
    let (s, c) = theta.sin_cos();
    let m = [
        [1.0 + s, 1.0 - s, c, -c],
        [1.0 - s, 1.0 + s, -c, c],
        [c, -c, 1.0 - s, 1.0 + s],
        [-c, c, 1.0 + s, 1.0 - s],
    ];
    let values = m.iter().flatten().map(|v| v / 8.0).collect();
    WignerVector::new(2, values).expect("16 entries")
}

fn codespace_leakage(rho: &DensityMatrix, frame: &LogicalFrame) -> f64 {
    1.0 - rho.expectation(&frame.code_projector())
}

fn require_codespace(rho: &DensityMatrix, frame: &LogicalFrame) -> Result<()> {
    if rho.nqubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.nqubits(),
        });
    }
    let leak = codespace_leakage(rho, frame);
    if leak > CODESPACE_TOL {
        return Err(Error::OutsideCodespace(leak));
    }
    Ok(())
}

/// `(<X_L>, <Y_L>, <Z_L>)` of a code state.
pub fn logical_bloch(rho: &DensityMatrix, frame: &LogicalFrame) -> Result<[f64; 3]> {
    require_codespace(rho, frame)?;
    Ok([
        rho.expectation(&frame.xl),
        rho.expectation(&frame.yl),
        rho.expectation(&frame.zl),
    ])
}

/// Applies a Pauli error, reads the `Z⊗Z` syndrome and undoes the error.
///
/// The two-qubit code only detects single bit flips, so recovery uses the
/// known error. Errors commuting with `Z⊗Z` are rejected unless they act
/// trivially on the code (`II` or `ZZ` up to phase).
pub fn correctable_error_roundtrip(
    rho: &DensityMatrix,
    error: &PauliString,
    frame: &LogicalFrame,
) -> Result<DensityMatrix> {
    require_codespace(rho, frame)?;
    if error.nqubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: error.nqubits(),
        });
    }
    let e = error.matrix();
    let zz: PauliString = "ZZ".parse().expect("valid literal");
    if error.commutes_with(&zz) {
        let trivial = error.letters.iter().all(|p| *p == Pauli::I) || error.letters.iter().all(|p| *p == Pauli::Z);
        if !trivial {
            return Err(Error::NotCorrectable(error.to_string()));
        }
        return DensityMatrix::new(e.conjugate(rho.matrix()));
    }
    let corrupted = e.conjugate(rho.matrix());
    let syndrome = (corrupted.trace_product(&frame.stabilizer)).re;
    if syndrome > -1.0 + CODESPACE_TOL {
        return Err(Error::Precondition(format!("unexpected syndrome {syndrome}")));
    }
    DensityMatrix::new(e.conjugate(&corrupted))
}

/// Noise level `1 - 1/(|sin θ| + |cos θ|)`; errors where the formula
/// vanishes (stabilizer points).
pub fn critical_noise(theta: f64) -> Result<f64> {
    let f = theta.sin().abs() + theta.cos().abs();
    if f <= 1.0 + BOUNDARY_TOL {
        return Err(Error::Precondition(format!(
            "theta = {theta} is a stabilizer point; critical noise is 0"
        )));
    }
    Ok(1.0 - 1.0 / f)
}

/// Three-term decomposition of the `Ry` state for `θ ∈ (0, π/2)`:
/// `cos θ |00><00| + (1 - cos θ + sin θ)/2 |+_L><+_L| - (cos θ + sin θ - 1)/2 |-_L><-_L|`,
/// with l1 weight `sin θ + cos θ`. (Matching logical Bloch vectors fixes which
/// weight goes on `|00>`: its `Z_L` component must be `cos θ`.)
pub fn ry_three_term_decomposition(theta: f64) -> Result<Vec<(f64, PureState)>> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::Precondition(format!("theta = {theta} outside (0, pi/2)")));
    }
    let (s, c) = theta.sin_cos();
    let h = FRAC_1_SQRT_2;
    let z = Complex64::new(0.0, 0.0);
    let plus = PureState::new(vec![h.into(), z, z, h.into()])?;
    let minus = PureState::new(vec![h.into(), z, z, (-h).into()])?;
    Ok(vec![
        (c, PureState::basis(2, 0)?),
        ((1.0 - c + s) / 2.0, plus),
        (-(c + s - 1.0) / 2.0, minus),
    ])
}

/// `linspace(0, π, points)` with points within 1e-3 of a multiple of `π/2`
/// moved 1e-3 into the open interval.
pub fn theta_grid(points: usize) -> Vec<f64> {
    if points == 0 {
        return vec![];
    }
    if points == 1 {
        return vec![PI / 4.0];
    }
    (0..points)
        .map(|k| {
            let t = PI * k as f64 / (points - 1) as f64;
            let nearest = (t / (PI / 2.0)).round() * (PI / 2.0);
            if (t - nearest).abs() < 1e-3 {
                if nearest >= PI {
                    nearest - 1e-3
                } else {
                    nearest + 1e-3
                }
            } else {
                t
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyRecord {
    pub family: FamilyId,
    pub theta: f64,
    pub c_lp: f64,
    pub c_closed: f64,
    pub gamma_lp: f64,
    pub gamma_closed: f64,
    pub kappa: Option<f64>,
    pub neg_entries: usize,
    pub witness_gap: f64,
}

impl FamilyRecord {
    pub const HEADER: [&'static str; 9] = [
        "family",
        "theta",
        "c_lp",
        "c_closed",
        "gamma_lp",
        "gamma_closed",
        "kappa",
        "neg_entries",
        "witness_gap",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        use crate::output::{fmt_opt, fmt_sig};
        vec![
            self.family.to_string(),
            fmt_sig(self.theta),
            fmt_sig(self.c_lp),
            fmt_sig(self.c_closed),
            fmt_sig(self.gamma_lp),
            fmt_sig(self.gamma_closed),
            fmt_opt(self.kappa),
            self.neg_entries.to_string(),
            fmt_sig(self.witness_gap),
        ]
    }
}

pub fn family_record(family: FamilyId, theta: f64, set: &StabilizerSet) -> Result<FamilyRecord> {
    let point = family_state(family, theta)?;
    let w = wigner(&point.density());
    let dist = wigner_distance_vec(&w, set)?;
    let ext = stabilizer_extent_vec(&w, set)?;
    let closed = closed_form(family, theta);
    Ok(FamilyRecord {
        family,
        theta,
        c_lp: dist.c,
        c_closed: closed.c,
        gamma_lp: ext.gamma,
        gamma_closed: closed.gamma,
        kappa: tightness_ratio(dist.c, ext.gamma),
        neg_entries: w.negative_count(NEGATIVE_TOL),
        witness_gap: dist.witness.gap,
    })
}

/// LP and closed-form values over a θ grid, in grid order.
pub fn family_sweep(family: FamilyId, thetas: &[f64], set: &StabilizerSet) -> Result<Vec<FamilyRecord>> {
    thetas.par_iter().map(|&t| family_record(family, t, set)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::wigner_distance;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn set2() -> &'static StabilizerSet {
        StabilizerSet::shared(2).unwrap()
    }

    #[test]
    fn frame_algebra() {
        let f = LogicalFrame::repetition();
        let i4 = ComplexMatrix::identity(4);
        for op in [&f.xl, &f.yl, &f.zl] {
            assert!((op * op).max_abs_diff(&i4) < 1e-15);
            assert!(op.commutes_with(&f.stabilizer, 0.0));
        }
        let xy = &f.xl * &f.yl;
        let izl = f.zl.scale(Complex64::new(0.0, 1.0));
        let p = f.code_projector();
        assert!((&(&xy * &p) - &(&izl * &p)).max_abs() < 1e-15);
    }

    #[test]
    fn family_state_examples() {
        let ry0 = family_state(FamilyId::Ry, 0.0).unwrap();
        assert_abs_diff_eq!(
            ry0.state.inner(&PureState::basis(2, 0).unwrap()).norm(),
            1.0,
            epsilon = 1e-15
        );
        let bell = family_state(FamilyId::BellRz, 0.0).unwrap();
        assert_abs_diff_eq!(bell.state.amplitudes()[3].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let rx = family_state(FamilyId::Rx, PI / 2.0).unwrap();
        assert_abs_diff_eq!(rx.state.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(rx.state.amplitudes()[3].im, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(family_state(FamilyId::Rx, f64::NAN).is_err());
        assert_eq!("BRZ".parse::<FamilyId>().unwrap(), FamilyId::BellRz);
        assert!("rz".parse::<FamilyId>().is_err());
    }

    #[test]
    fn closed_form_examples() {
        let r = closed_form(FamilyId::Ry, FRAC_PI_4);
        assert_abs_diff_eq!(r.c, 2f64.sqrt() - 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.gamma, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.kappa.unwrap(), 1.0, epsilon = 1e-12);
        let x = closed_form(FamilyId::Rx, PI / 3.0);
        let g = (3f64.sqrt() + 1.0) / 2.0;
        assert_abs_diff_eq!(x.c, (g - 1.0) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.kappa.unwrap(), 2.0, epsilon = 1e-12);
        let b = closed_form(FamilyId::BellRz, PI / 2.0);
        assert_abs_diff_eq!(b.c, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.gamma, 1.0, epsilon = 1e-15);
        assert_eq!(b.kappa, None);
    }

    #[test]
    fn witnesses_match_literals_and_reject_boundaries() {
        let f = LogicalFrame::repetition();
        let m = |s: &str| s.parse::<PauliString>().unwrap().matrix();
        let ry = closed_form_witness(FamilyId::Ry, 0.7, &f).unwrap();
        assert!(ry.max_abs_diff(&(&m("ZI") + &m("XX"))) < 1e-15);
        let b1 = closed_form_witness(FamilyId::BellRz, FRAC_PI_4, &f).unwrap();
        assert!(b1.max_abs_diff(&(&f.xl + &f.yl)) < 1e-15);
        let b3 = closed_form_witness(FamilyId::BellRz, 3.0 * FRAC_PI_4, &f).unwrap();
        assert!(b3.max_abs_diff(&(&f.yl - &f.xl)) < 1e-15);
        for t in [0.0, PI / 2.0, PI] {
            assert!(matches!(
                closed_form_witness(FamilyId::Ry, t, &f),
                Err(Error::WitnessBoundary(_))
            ));
        }
    }

    #[test]
    fn witness_gaps_equal_closed_forms() {
        let f = LogicalFrame::repetition();
        for fam in FamilyId::ALL {
            for t in [0.3, 1.2, 2.0, 2.9] {
                let rho = family_state(fam, t).unwrap().density();
                let h = closed_form_witness(fam, t, &f).unwrap();
                assert!(h.is_hermitian(0.0));
                let g = operator_gap(&h, &rho, set2()).unwrap();
                assert_abs_diff_eq!(g.gap, closed_form(fam, t).c, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn brz_closed_form_examples() {
        let w0 = brz_wigner_closed_form(0.0);
        assert_eq!(w0.negative_count(NEGATIVE_TOL), 4);
        assert!(w0.values().iter().all(|v| *v >= -0.125 - 1e-15));
        let w1 = brz_wigner_closed_form(PI / 2.0);
        assert!(w1.values().iter().all(|v| v.abs() < 1e-15 || (v - 0.25).abs() < 1e-15));
        let w = brz_wigner_closed_form(FRAC_PI_4);
        let negs: Vec<f64> = w.values().iter().copied().filter(|v| *v < 0.0).collect();
        assert_eq!(negs.len(), 4);
        for v in negs {
            assert_abs_diff_eq!(v, -2f64.sqrt() / 16.0, epsilon = 1e-15);
        }
        for t in [0.2, 1.0, 2.5, 4.0] {
            let direct = wigner(&family_state(FamilyId::BellRz, t).unwrap().density());
            assert!(direct.l1_distance(&brz_wigner_closed_form(t)) < 1e-10);
        }
    }

    #[test]
    fn logical_bloch_examples() {
        let f = LogicalFrame::repetition();
        let t = 0.9;
        let b = logical_bloch(&family_state(FamilyId::BellRz, t).unwrap().density(), &f).unwrap();
        assert_abs_diff_eq!(b[0], t.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], t.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(b[2], 0.0, epsilon = 1e-12);
        let z = logical_bloch(&PureState::basis(2, 0).unwrap().density(), &f).unwrap();
        assert_eq!(z.map(|v| v.round()), [0.0, 0.0, 1.0]);
        let r = logical_bloch(&family_state(FamilyId::Ry, t).unwrap().density(), &f).unwrap();
        assert_abs_diff_eq!(r[0], t.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(r[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r[2], t.cos(), epsilon = 1e-12);
        let leak = PureState::basis(2, 1).unwrap().density();
        assert!(matches!(logical_bloch(&leak, &f), Err(Error::OutsideCodespace(_))));
    }

    #[test]
    fn error_roundtrip() {
        let f = LogicalFrame::repetition();
        let xi: PauliString = "XI".parse().unwrap();
        let ix: PauliString = "IX".parse().unwrap();
        let rho = family_state(FamilyId::BellRz, FRAC_PI_4).unwrap().density();
        let back = correctable_error_roundtrip(&rho, &xi, &f).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) < 1e-12);
        let zero = PureState::basis(2, 0).unwrap().density();
        let back = correctable_error_roundtrip(&zero, &ix, &f).unwrap();
        assert!(back.matrix().max_abs_diff(zero.matrix()) < 1e-12);

        let rx = family_state(FamilyId::Rx, PI / 3.0).unwrap().density();
        let back = correctable_error_roundtrip(&rx, &xi, &f).unwrap();
        let c0 = wigner_distance(&rx, set2()).unwrap().c;
        let c1 = wigner_distance(&back, set2()).unwrap().c;
        assert_abs_diff_eq!(c0, c1, epsilon = 1e-9);

        for bad in ["XX", "ZI", "YX"] {
            let e: PauliString = bad.parse().unwrap();
            assert!(matches!(
                correctable_error_roundtrip(&rho, &e, &f),
                Err(Error::NotCorrectable(_))
            ));
        }
        let zz: PauliString = "ZZ".parse().unwrap();
        assert!(correctable_error_roundtrip(&rho, &zz, &f).is_ok());
    }

    #[test]
    fn critical_noise_examples() {
        assert_abs_diff_eq!(critical_noise(FRAC_PI_4).unwrap(), 1.0 - FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(critical_noise(PI / 2.0).is_err());
        assert_abs_diff_eq!(
            critical_noise(PI / 3.0).unwrap(),
            1.0 - 2.0 / (3f64.sqrt() + 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn three_term_decomposition_reconstructs() {
        for t in [0.1, 0.5, 1.0, 1.5] {
            let terms = ry_three_term_decomposition(t).unwrap();
            let mut m = ComplexMatrix::zeros(4);
            for (a, psi) in &terms {
                m = &m + &psi.projector().scale_real(*a);
            }
            let target = family_state(FamilyId::Ry, t).unwrap().density();
            assert!(m.max_abs_diff(target.matrix()) < 1e-12);
            let l1: f64 = terms.iter().map(|(a, _)| a.abs()).sum();
            assert_abs_diff_eq!(l1, t.sin() + t.cos(), epsilon = 1e-12);
        }
        assert!(ry_three_term_decomposition(2.0).is_err());
    }

    #[test]
    fn grid_avoids_quadrant_boundaries() {
        let g = theta_grid(25);
        assert_eq!(g.len(), 25);
        for t in g {
            assert!(t > 0.0 && t < PI);
            let r = (t / (PI / 2.0)).fract();
            assert!(r.min(1.0 - r) * PI / 2.0 >= 1e-3 - 1e-12);
        }
    }

    #[test]
    fn sweep_matches_closed_forms() {
        let recs = family_sweep(FamilyId::Rx, &[0.4, 2.2], set2()).unwrap();
        for r in recs {
            assert_abs_diff_eq!(r.c_lp, r.c_closed, epsilon = 1e-7);
            assert_abs_diff_eq!(r.gamma_lp, r.gamma_closed, epsilon = 1e-7);
            assert_abs_diff_eq!(r.kappa.unwrap(), 2.0, epsilon = 1e-6);
            assert_eq!(r.neg_entries, 2);
        }
    }
}
