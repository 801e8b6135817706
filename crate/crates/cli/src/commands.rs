use std::f64::consts::PI;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::bail;
use serde::Serialize;
use serde_json::{json, Value};

use wigmagic::experiments::{self as ex, DichotomyRecord, NoiseRecord};
use wigmagic::families::{self, FamilyId, FamilyRecord};
use wigmagic::measures::{self, MagicReport};
use wigmagic::output::{fmt_opt, fmt_sig, write_csv_file, write_json_file};
use wigmagic::phasespace::max_stab_l1;
use wigmagic::{wigner, StabilizerSet};

use crate::config::{Format, RunConfig};
use crate::state::parse_state;
use crate::Command;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }
}

/// Output of one command: a CSV table, its JSON counterpart, a summary and
/// an optional pass flag (`None` for commands that only compute).
pub struct Report {
    pub table: Table,
    pub json: Value,
    pub summary: Value,
    pub pass: Option<bool>,
    pub line: String,
}

impl Report {
    pub fn write(&self, name: &str, cfg: &RunConfig) -> anyhow::Result<()> {
        let dir = &cfg.output_dir;
        match cfg.format {
            Format::Csv => {
                let header: Vec<&str> = self.table.header.iter().map(String::as_str).collect();
                write_csv_file(&dir.join(format!("{name}.csv")), &header, &self.table.rows)?;
            }
            Format::Json => write_json_file(&dir.join(format!("{name}.json")), &self.json)?,
        }
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let summary = json!({
            "command": name,
            "timestamp_unix": timestamp,
            "seed": cfg.seed,
            "threads": cfg.threads,
            "grids": cfg.grids,
            "tolerances": cfg.tolerances,
            "pass": self.pass,
            "results": self.summary,
        });
        write_json_file(&dir.join(format!("{name}.summary.json")), &summary)?;
        Ok(())
    }
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn dispatch(command: &Command, cfg: &RunConfig) -> anyhow::Result<Report> {
    let g = &cfg.grids;
    match command {
        Command::EnumerateStabilizers { n } => enumerate(*n),
        Command::Wigner { state } => wigner_cmd(state),
        Command::Distance { state } => distance(state),
        Command::Extent { state } => extent(state),
        Command::KappaSweep { family, points } => kappa_sweep(*family, points.or(g.points).unwrap_or(25), cfg),
        Command::Dichotomy { phi, rho } => {
            let phis = if phi.is_empty() {
                g.phi.clone().unwrap_or_else(|| ex::SCAN_PHIS.to_vec())
            } else {
                phi.clone()
            };
            dichotomy(&phis, rho)
        }
        Command::Regression => regression(),
        Command::NoiseSweep {
            family,
            theta,
            p_step,
            p_max,
        } => noise_sweep(
            *family,
            *theta,
            p_step.or(g.p_step).unwrap_or(0.01),
            p_max.or(g.p_max).unwrap_or(0.6),
        ),
        Command::Monotonicity { samples } => monotonicity(samples.or(g.samples).unwrap_or(2000), cfg.seed),
        Command::TensorSuite { pairs } => tensor_suite(pairs.or(g.pairs).unwrap_or(200), cfg),
        Command::MaxC { restarts } => max_c(restarts.or(g.restarts).unwrap_or(50), cfg.seed),
        Command::Verify { n } => crate::verify::verify(*n, cfg),
    }
}

fn enumerate(n: usize) -> anyhow::Result<Report> {
    if !(1..=3).contains(&n) {
        bail!("--n must be 1, 2 or 3");
    }
    let set = StabilizerSet::shared(n)?;
    let rows: Vec<Vec<String>> = set
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let gens: Vec<String> = s.generators().iter().map(|g| g.to_string()).collect();
            vec![
                i.to_string(),
                gens.join(" "),
                fmt_sig(s.wigner().l1()),
                s.wigner().negative_count(families::NEGATIVE_TOL).to_string(),
            ]
        })
        .collect();
    let json: Vec<Value> = set
        .states()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "index": i,
                "generators": s.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "amplitudes": s.vector().amplitudes().iter().map(|a| [a.re, a.im]).collect::<Vec<_>>(),
                "wigner": s.wigner().values(),
            })
        })
        .collect();
    let expected = wigmagic::stabgen::stabilizer_count(n);
    let pass = set.len() == expected;
    Ok(Report {
        table: Table::new(&["index", "generators", "wigner_l1", "neg_entries"], rows),
        json: Value::Array(json),
        summary: json!({ "n": n, "count": set.len(), "expected": expected, "max_wigner_l1": max_stab_l1(set) }),
        pass: Some(pass),
        line: format!(
            "{} stabilizer states on {n} qubits (expected {expected}) {}",
            set.len(),
            verdict(pass)
        ),
    })
}

fn wigner_cmd(spec: &str) -> anyhow::Result<Report> {
    let rho = parse_state(spec)?;
    let w = wigner(&rho);
    let mut buf = Vec::new();
    w.write_csv(&mut buf)?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    let neg = w.negative_count(families::NEGATIVE_TOL);
    Ok(Report {
        table: Table { header, rows },
        json: json!({ "nqubits": w.nqubits(), "values": w.values() }),
        summary: json!({
            "nqubits": w.nqubits(), "sum": w.sum(), "l1": w.l1(),
            "negative_count": neg, "negative_mass": w.negative_mass(),
        }),
        pass: None,
        line: format!("sum {:.6}, l1 {:.6}, {neg} negative entries", w.sum(), w.l1()),
    })
}

fn distance(spec: &str) -> anyhow::Result<Report> {
    let rho = parse_state(spec)?;
    let set = StabilizerSet::shared(rho.nqubits())?;
    let d = measures::wigner_distance(&rho, set)?;
    let cert = d.certificate.max();
    let nearest: std::collections::BTreeMap<String, f64> = d
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.abs() > 1e-12)
        .map(|(i, w)| (i.to_string(), *w))
        .collect();
    let rows = vec![vec![
        fmt_sig(d.c),
        fmt_sig(d.witness.free_max),
        fmt_sig(d.witness.gap),
        fmt_sig(d.witness.sup_norm()),
        fmt_sig(cert),
    ]];
    Ok(Report {
        table: Table::new(
            &[
                "c",
                "witness_free_max",
                "witness_gap",
                "witness_sup_norm",
                "certificate",
            ],
            rows,
        ),
        json: json!({ "c": d.c, "witness": to_json(&d.witness)?, "nearest_free": nearest, "certificate": cert }),
        summary: json!({ "c": d.c, "witness_gap": d.witness.gap, "certificate": cert }),
        pass: None,
        line: format!("C = {:.8} (witness gap {:.8})", d.c, d.witness.gap),
    })
}

fn extent(spec: &str) -> anyhow::Result<Report> {
    let rho = parse_state(spec)?;
    let set = StabilizerSet::shared(rho.nqubits())?;
    let report = MagicReport::compute(&rho, set)?;
    let sparse = report.decomposition.sparse();
    let rows = sparse.iter().map(|(i, c)| vec![i.to_string(), fmt_sig(*c)]).collect();
    Ok(Report {
        table: Table::new(&["stabilizer_index", "coefficient"], rows),
        json: to_json(&report)?,
        summary: json!({ "gamma": report.gamma, "c": report.c, "kappa": report.kappa, "terms": sparse.len() }),
        pass: None,
        line: format!(
            "Gamma = {:.8}, C = {:.8}, kappa = {}",
            report.gamma,
            report.c,
            fmt_opt(report.kappa)
        ),
    })
}

fn kappa_sweep(family: FamilyId, points: usize, cfg: &RunConfig) -> anyhow::Result<Report> {
    if points < 2 {
        bail!("--points must be at least 2");
    }
    let (records, flat) = ex::kappa_sweep(family, &families::theta_grid(points))?;
    let tol = cfg.tolerances.closed_form;
    let worst = records
        .iter()
        .map(|r| (r.c_lp - r.c_closed).abs().max((r.gamma_lp - r.gamma_closed).abs()))
        .fold(0.0, f64::max);
    let pass = flat && worst <= tol;
    Ok(Report {
        table: Table::new(
            &FamilyRecord::HEADER,
            records.iter().map(FamilyRecord::csv_row).collect(),
        ),
        json: to_json(&records)?,
        summary: json!({
            "family": family.name(), "points": points, "kappa_expected": family.kappa(),
            "kappa_flat": flat, "max_closed_form_error": worst,
        }),
        pass: Some(pass),
        line: format!(
            "{family}: {points} points, kappa flat at {}: {flat}, max closed-form error {worst:.1e} {}",
            family.kappa(),
            verdict(pass)
        ),
    })
}

fn sigma_grid(phis: &[f64]) -> Vec<(f64, f64)> {
    let table = ex::table_points();
    let mut grid: Vec<(f64, f64)> = phis
        .iter()
        .flat_map(|&phi| {
            let extra = table.iter().copied().filter(move |p| (p.1 - phi).abs() < 1e-12);
            ex::scan_thetas().into_iter().map(move |t| (t, phi)).chain(extra)
        })
        .collect();
    grid.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    grid.dedup();
    grid
}

fn dichotomy(phis: &[f64], rho_spec: &str) -> anyhow::Result<Report> {
    let rho = parse_state(rho_spec)?;
    let records = ex::dichotomy_scan(&rho, &sigma_grid(phis))?;
    let violations = ex::sign_condition_violations(&records);
    let mismatches = ex::hemisphere_mismatches(&records);
    let pass = violations.is_empty();
    Ok(Report {
        table: Table::new(
            &DichotomyRecord::HEADER,
            records.iter().map(DichotomyRecord::csv_row).collect(),
        ),
        json: to_json(&records)?,
        summary: json!({
            "rho": rho_spec,
            "phis": phis,
            "points": records.len(),
            "superadditive": records.iter().filter(|r| r.superadditive).count(),
            "sign_condition_violations": to_json(&violations)?,
            "hemisphere_mismatches": mismatches.len(),
        }),
        pass: Some(pass),
        line: format!(
            "{} sigma points, {} superadditive, {} sign-condition violations, {} hemisphere mismatches {}",
            records.len(),
            records.iter().filter(|r| r.superadditive).count(),
            violations.len(),
            mismatches.len(),
            verdict(pass)
        ),
    })
}

fn regression() -> anyhow::Result<Report> {
    let rho_phis = ex::regression_rho_phis();
    let sigmas = ex::regression_sigma_points();
    let records = ex::regression_records(&rho_phis, &sigmas)?;
    let fit = ex::deficit_regression(&records)?;
    let rows = fit
        .per_sigma
        .iter()
        .map(|s| {
            vec![
                fmt_sig(s.theta_b),
                fmt_sig(s.phi_b),
                fmt_sig(s.z_expect),
                fmt_sig(s.slope),
                fmt_sig(s.r_squared),
                s.n_points.to_string(),
            ]
        })
        .collect();
    let pass = (0.30..=0.37).contains(&fit.slope) && fit.r_squared >= 0.95;
    Ok(Report {
        table: Table::new(&["theta_b", "phi_b", "z", "slope", "r_squared", "n_points"], rows),
        json: json!({ "fit": to_json(&fit)?, "records": to_json(&records)? }),
        summary: json!({
            "slope": fit.slope, "r_squared": fit.r_squared, "n_points": fit.n_points,
            "rho_phis": rho_phis, "sigma_points": sigmas,
            "design": "equatorial rho at 2πk/24; northern sigma at phi 1.05 more than 0.1 rad from pole and equator",
        }),
        pass: Some(pass),
        line: format!(
            "slope {:.4}, R^2 {:.4} over {} points {}",
            fit.slope,
            fit.r_squared,
            fit.n_points,
            verdict(pass)
        ),
    })
}

fn noise_sweep(family: FamilyId, theta: f64, step: f64, p_max: f64) -> anyhow::Result<Report> {
    if !(step > 0.0 && (0.0..1.0).contains(&p_max)) {
        bail!("need p_step > 0 and 0 <= p_max < 1");
    }
    let steps = (p_max / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|k| k as f64 * step).collect();
    let p_star = families::critical_noise(theta).ok();
    if let Some(p) = p_star {
        grid.extend([p - 0.01, p + 0.01].into_iter().filter(|x| (0.0..=p_max).contains(x)));
        grid.sort_by(f64::total_cmp);
    }
    let records = ex::noise_sweep(family, theta, &grid)?;
    let v = match p_star {
        Some(_) => Some(ex::noise_verdict(family, theta, &records)?),
        None => None,
    };
    let pass = v.as_ref().map(|v| v.kappa_ok && v.vanishing_ok);
    Ok(Report {
        table: Table::new(&NoiseRecord::HEADER, records.iter().map(NoiseRecord::csv_row).collect()),
        json: to_json(&records)?,
        summary: json!({ "family": family.name(), "theta": theta, "verdict": to_json(&v)? }),
        pass,
        line: match &v {
            Some(v) => format!(
                "{family} theta {theta:.4}: p* {:.4}, kappa deviation {:.1e}, max C above p*+0.01 {:.4} {}",
                v.p_star,
                v.max_kappa_deviation,
                v.max_c_above,
                verdict(v.kappa_ok && v.vanishing_ok)
            ),
            None => format!(
                "{family} theta {theta:.4}: {} noise levels (stabilizer point)",
                records.len()
            ),
        },
    })
}

fn monotonicity(samples: usize, seed: u64) -> anyhow::Result<Report> {
    if samples < 100 {
        bail!("--samples must be at least 100");
    }
    let states = ex::haar_samples(2, samples, seed)?;
    let changes = ex::clifford_changes(&states)?;
    let stats = ex::MonotonicityStats::from_changes(&changes, seed);
    let outside = ex::permuted_stabilizers_outside(StabilizerSet::shared(2)?)?;
    let rows = changes
        .iter()
        .enumerate()
        .map(|(i, (a, b))| vec![i.to_string(), fmt_sig(*a), fmt_sig(*b), fmt_sig(b - a)])
        .collect();
    let pass = (0.44..=0.54).contains(&stats.fraction_increased) && stats.max_increase >= 0.10 && outside == 24;
    Ok(Report {
        table: Table::new(&["sample", "c_before", "c_after", "delta"], rows),
        json: json!({ "stats": to_json(&stats)?, "changes": changes }),
        summary: json!({ "stats": to_json(&stats)?, "permuted_stabilizers_outside": outside }),
        pass: Some(pass),
        line: format!(
            "{samples} samples: increase fraction {:.4}, decrease {:.4}, max increase {:.4}; permuted stabilizers outside {outside}/60 {}",
            stats.fraction_increased,
            stats.fraction_decreased,
            stats.max_increase,
            verdict(pass)
        ),
    })
}

fn tensor_suite(pairs: usize, cfg: &RunConfig) -> anyhow::Result<Report> {
    let tol = cfg.tolerances.assert;
    let phis: Vec<f64> = (0..12).map(|k| 2.0 * PI * k as f64 / 12.0).collect();
    let equatorial = ex::equatorial_equality_check(&phis, &phis)?;

    let haar = ex::haar_pairs(pairs, cfg.seed)?;
    let sub = ex::submultiplicativity_check(&haar)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let s2 = StabilizerSet::shared(2)?;
    let m2 = max_stab_l1(s2);
    let sim = ex::haar_samples(2, pairs, cfg.seed)?
        .iter()
        .map(|p| measures::check_simulation_bound(&p.density(), s2, m2))
        .collect::<wigmagic::Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    // Reported only: no proof covers the whole northern hemisphere.
    let mut self_states = vec![ex::t_state()];
    for t in [0.3, 0.6, 0.9, 1.2] {
        for p in [0.0, 0.7, 1.05] {
            self_states.push(wigmagic::DensityMatrix::from_bloch_angles(t, p));
        }
    }
    let self_margin = ex::self_tensor_check(&self_states)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let checks = [
        (
            "equatorial_additivity_residual",
            equatorial,
            tol,
            Some(equatorial <= tol),
        ),
        ("submultiplicativity_min_slack", sub, -1e-7, Some(sub >= -1e-7)),
        ("simulation_bound_min_slack", sim, -tol, Some(sim >= -tol)),
        ("self_tensor_min_margin", self_margin, -tol, None),
    ];
    let pass = checks.iter().all(|c| c.3 != Some(false));
    let rows = checks
        .iter()
        .map(|(name, v, b, ok)| {
            vec![
                name.to_string(),
                fmt_sig(*v),
                fmt_sig(*b),
                ok.map_or("reported".into(), |o| o.to_string()),
            ]
        })
        .collect();
    let json_checks: Vec<Value> = checks
        .iter()
        .map(|(name, v, b, ok)| json!({ "check": name, "value": v, "bound": b, "pass": ok }))
        .collect();
    Ok(Report {
        table: Table::new(&["check", "value", "bound", "pass"], rows),
        json: Value::Array(json_checks.clone()),
        summary: json!({ "pairs": pairs, "checks": json_checks }),
        pass: Some(pass),
        line: format!(
            "equatorial residual {equatorial:.1e}, submultiplicativity slack {sub:.2e}, simulation slack {sim:.2e}, self-tensor margin {self_margin:.2e} {}",
            verdict(pass)
        ),
    })
}

fn max_c(restarts: usize, seed: u64) -> anyhow::Result<Report> {
    let r = ex::max_c_search(restarts, seed)?;
    let rows = r
        .restart_values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), fmt_sig(*v)])
        .collect();
    let pass = r.best_c >= 0.86 && r.neg_entries == 6;
    Ok(Report {
        table: Table::new(&["restart", "c"], rows),
        json: to_json(&r)?,
        summary: json!({
            "best_c": r.best_c, "params": r.params, "amplitudes": r.amplitudes,
            "neg_entries": r.neg_entries, "restarts": r.restarts,
        }),
        pass: Some(pass),
        line: format!(
            "best C {:.6} with {} negative entries over {restarts} restarts {}",
            r.best_c,
            r.neg_entries,
            verdict(pass)
        ),
    })
}
