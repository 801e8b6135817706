//! `verify`: structural invariants checked on seeded samples.

use serde_json::{json, Value};

use wigmagic::experiments as ex;
use wigmagic::families::{self, FamilyId, LogicalFrame};
use wigmagic::measures::{self, wigner_distance};
use wigmagic::output::fmt_sig;
use wigmagic::phasespace::{inverse_wigner, max_stab_l1};
use wigmagic::qcore::{apply_unitary, gates, DensityMatrix, PauliString};
use wigmagic::{wigner, StabilizerSet};

use crate::commands::{Report, Table};
use crate::config::RunConfig;

struct Check {
    name: String,
    value: f64,
    bound: f64,
    pass: bool,
}

/// `value <= bound`.
fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Check {
    Check {
        name: name.into(),
        value,
        bound,
        pass: value <= bound,
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Seeded Haar pure states and pairwise mixtures of them.
fn samples(n: usize, count: usize, seed: u64) -> anyhow::Result<Vec<DensityMatrix>> {
    let pure = ex::haar_samples(n, 2 * count, seed)?;
    let mut out = Vec::with_capacity(2 * count);
    for (k, pair) in pure.chunks(2).enumerate() {
        let (a, b) = (pair[0].density(), pair[1].density());
        out.push(DensityMatrix::mix(0.2 + 0.6 * (k as f64 / count as f64), &a, &b)?);
        out.push(a);
    }
    Ok(out)
}

fn phase_space_checks(n: usize, cfg: &RunConfig, out: &mut Vec<Check>) -> anyhow::Result<()> {
    let tol = cfg.tolerances.assert;
    let set = StabilizerSet::shared(n)?;
    let expected = wigmagic::stabgen::stabilizer_count(n);
    out.push(Check {
        name: format!("stabilizer_count_n{n}"),
        value: set.len() as f64,
        bound: expected as f64,
        pass: set.len() == expected,
    });

    let states = samples(n, 20, cfg.seed ^ n as u64)?;
    let ws: Vec<_> = states.iter().map(wigner).collect();
    out.push(at_most(
        format!("wigner_sum_n{n}"),
        max_of(ws.iter().map(|w| (w.sum() - 1.0).abs())),
        1e-10,
    ));
    out.push(at_most(
        format!("wigner_roundtrip_n{n}"),
        max_of(
            ws.iter()
                .zip(&states)
                .map(|(w, r)| inverse_wigner(w).max_abs_diff(r.matrix())),
        ),
        1e-10,
    ));
    out.push(at_most(
        format!("wigner_purity_n{n}"),
        max_of(
            ws.iter()
                .zip(&states)
                .map(|(w, r)| (w.sum_sq() * (1u64 << n) as f64 - r.purity()).abs()),
        ),
        1e-10,
    ));

    // n = 3 LPs take a fraction of a second each; sample fewer there.
    let (n_lp, n_stab) = if n == 3 { (3, 12) } else { (10, set.len()) };
    let faithful = set.states()[..n_stab]
        .iter()
        .map(|s| wigner_distance(&s.vector().density(), set).map(|d| d.c))
        .collect::<wigmagic::Result<Vec<_>>>()?;
    out.push(at_most(format!("faithfulness_n{n}"), max_of(faithful), 1e-9));

    let dists = states[..2 * n_lp]
        .iter()
        .map(|r| wigner_distance(r, set))
        .collect::<wigmagic::Result<Vec<_>>>()?;
    out.push(at_most(
        format!("witness_gap_n{n}"),
        max_of(dists.iter().map(|d| (d.witness.gap - d.c).abs())),
        cfg.tolerances.closed_form,
    ));
    out.push(at_most(
        format!("lp_certificate_n{n}"),
        max_of(dists.iter().map(|d| d.certificate.max())),
        cfg.tolerances.lp_gap,
    ));

    if n <= 2 {
        let m = max_stab_l1(set);
        out.push(at_most(format!("max_stab_l1_n{n}"), (m - n as f64).abs(), 1e-9));

        let (mut convex, mut lipschitz, mut sim) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (k, pair) in states[..2 * n_lp].chunks(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            let (ca, cb) = (dists[2 * k].c, dists[2 * k + 1].c);
            for p in [0.25, 0.5, 0.75] {
                let mixed = DensityMatrix::mix(p, a, b)?;
                convex = convex.max(wigner_distance(&mixed, set)?.c - p * ca - (1.0 - p) * cb);
            }
            lipschitz = lipschitz.max((ca - cb).abs() - wigner(a).l1_distance(&wigner(b)));
            sim = sim.max(-measures::check_simulation_bound(a, set, m)?);
        }
        out.push(at_most(format!("convexity_n{n}"), convex, tol));
        out.push(at_most(format!("lipschitz_n{n}"), lipschitz, tol));
        out.push(at_most(format!("simulation_bound_n{n}"), sim, tol));
    }
    if n == 1 {
        let mut dev = 0.0f64;
        for rho in &states[..10] {
            let c = wigner_distance(rho, set)?.c;
            for u in gates::single_qubit_cliffords() {
                dev = dev.max((wigner_distance(&apply_unitary(rho, &u)?, set)?.c - c).abs());
            }
        }
        out.push(at_most("clifford_invariance_n1", dev, tol));
    }
    Ok(())
}

fn family_checks(cfg: &RunConfig, out: &mut Vec<Check>) -> anyhow::Result<()> {
    let s2 = StabilizerSet::shared(2)?;
    let frame = LogicalFrame::repetition();
    let thetas = families::theta_grid(13);
    let (mut closed, mut kappa, mut half, mut brz) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut counts, mut commute, mut ft) = (0.0f64, 0.0f64, 0.0f64);
    let errors: Vec<PauliString> = ["XI", "IX"].iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    for fam in FamilyId::ALL {
        let (records, _) = ex::kappa_sweep(fam, &thetas)?;
        for r in &records {
            closed = closed
                .max((r.c_lp - r.c_closed).abs())
                .max((r.gamma_lp - r.gamma_closed).abs());
            kappa = kappa.max(r.kappa.map_or(f64::INFINITY, |k| (k - fam.kappa()).abs()));
            let expected_neg = if fam == FamilyId::Rx { 2 } else { 4 };
            counts += (r.neg_entries != expected_neg) as u8 as f64;
        }
        for &t in &thetas {
            let rho = families::family_state(fam, t)?.density();
            let c0 = wigner_distance(&rho, s2)?.c;
            for e in &errors {
                let back = families::correctable_error_roundtrip(&rho, e, &frame)?;
                ft = ft.max((wigner_distance(&back, s2)?.c - c0).abs());
            }
            let h = families::closed_form_witness(fam, t, &frame)?;
            commute += !h.commutes_with(&frame.stabilizer, 0.0) as u8 as f64;
        }
    }
    for &t in &thetas {
        let c = |f| -> anyhow::Result<f64> { Ok(wigner_distance(&families::family_state(f, t)?.density(), s2)?.c) };
        half = half.max((c(FamilyId::Rx)? - 0.5 * c(FamilyId::Ry)?).abs());
        let direct = wigner(&families::family_state(FamilyId::BellRz, t)?.density());
        let formula = families::brz_wigner_closed_form(t);
        brz = brz.max(max_of(
            direct.values().iter().zip(formula.values()).map(|(a, b)| (a - b).abs()),
        ));
    }
    out.push(at_most("family_closed_forms", closed, cfg.tolerances.closed_form));
    out.push(at_most("family_kappa", kappa, 1e-6));
    out.push(at_most("rx_half_of_ry", half, 1e-9));
    out.push(at_most("bell_rz_wigner_formula", brz, 1e-10));
    out.push(at_most("family_negative_counts_mismatched", counts, 0.0));
    out.push(at_most("witnesses_not_commuting_with_zz", commute, 0.0));
    out.push(at_most("fault_tolerance", ft, 1e-9));

    let phis: Vec<f64> = (0..6).map(|k| std::f64::consts::PI * k as f64 / 3.0).collect();
    out.push(at_most(
        "equatorial_additivity",
        ex::equatorial_equality_check(&phis, &phis)?,
        cfg.tolerances.assert,
    ));

    let scan = ex::dichotomy_scan(&ex::t_state(), &ex::scan_grid())?;
    out.push(at_most(
        "sign_condition_violations",
        ex::sign_condition_violations(&scan).len() as f64,
        0.0,
    ));
    out.push(at_most(
        "hemisphere_mismatches",
        ex::hemisphere_mismatches(&scan).len() as f64,
        0.0,
    ));

    let a = ex::monotonicity_sample(100, cfg.seed)?;
    let b = ex::monotonicity_sample(100, cfg.seed)?;
    out.push(Check {
        name: "seeded_determinism".into(),
        value: (a != b) as u8 as f64,
        bound: 0.0,
        pass: a == b,
    });
    Ok(())
}

pub fn verify(n: usize, cfg: &RunConfig) -> anyhow::Result<Report> {
    if !(1..=3).contains(&n) {
        anyhow::bail!("--n must be 1, 2 or 3");
    }
    let mut checks = vec![];
    for k in 1..=n {
        phase_space_checks(k, cfg, &mut checks)?;
    }
    if n >= 2 {
        family_checks(cfg, &mut checks)?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    let pass = failed.is_empty();
    let rows = checks
        .iter()
        .map(|c| vec![c.name.clone(), fmt_sig(c.value), fmt_sig(c.bound), c.pass.to_string()])
        .collect();
    let json_checks: Vec<Value> = checks
        .iter()
        .map(|c| json!({ "check": c.name, "value": c.value, "bound": c.bound, "pass": c.pass }))
        .collect();
    let line = if pass {
        format!("{} checks passed up to n = {n}", checks.len())
    } else {
        format!(
            "{} of {} checks failed: {}",
            failed.len(),
            checks.len(),
            failed.join(", ")
        )
    };
    Ok(Report {
        table: Table {
            header: ["check", "value", "bound", "pass"].map(String::from).to_vec(),
            rows,
        },
        json: Value::Array(json_checks),
        summary: json!({ "n": n, "checks": checks.len(), "failed": failed }),
        pass: Some(pass),
        line,
    })
}
