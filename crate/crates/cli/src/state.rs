//! State arguments: presets (`t-state`, `bell`, `ry:θ`, `rx:θ`, `brz:θ`,
//! `zero:n`) or a JSON list of `[re, im]` amplitude pairs.

use anyhow::{anyhow, bail, Context};
use num_complex::Complex64;
use wigmagic::experiments::t_state;
use wigmagic::families::{family_state, FamilyId};
use wigmagic::qcore::PureState;
use wigmagic::DensityMatrix;

pub fn parse_state(spec: &str) -> anyhow::Result<DensityMatrix> {
    let spec = spec.trim();
    if spec.starts_with('[') {
        let pairs: Vec<[f64; 2]> = serde_json::from_str(spec).context("state must be a JSON list of [re, im] pairs")?;
        let amps: Vec<Complex64> = pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        return Ok(PureState::normalized(amps)?.density());
    }
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let number = || -> anyhow::Result<f64> {
        let a = arg.ok_or_else(|| anyhow!("preset {name:?} needs an argument, e.g. {name}:0.785"))?;
        a.parse::<f64>().with_context(|| format!("bad number {a:?}"))
    };
    match name.to_ascii_lowercase().as_str() {
        "t-state" | "t" => Ok(t_state()),
        "bell" => Ok(family_state(FamilyId::BellRz, 0.0)?.density()),
        "zero" => {
            let n = arg
                .map_or(Ok(1), |a| a.parse::<usize>())
                .context("zero:n needs an integer")?;
            Ok(PureState::basis(n, 0)?.density())
        }
        f @ ("ry" | "rx" | "brz") => Ok(family_state(f.parse::<FamilyId>()?, number()?)?.density()),
        _ => bail!("unknown state {spec:?}; expected a preset or a JSON amplitude list"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_and_json() {
        assert_eq!(parse_state("t-state").unwrap().nqubits(), 1);
        assert_eq!(parse_state("bell").unwrap().nqubits(), 2);
        assert_eq!(parse_state("ry:0.5").unwrap().nqubits(), 2);
        assert_eq!(parse_state("zero:3").unwrap().nqubits(), 3);
        let s = parse_state("[[1,0],[0,1]]").unwrap();
        assert!((s.bloch_vector().unwrap()[1] - 1.0).abs() < 1e-12);
        for bad in [
            "ry",
            "ry:x",
            "foo",
            "[[1,0],[0,0],[1]]",
            "[[0,0]]",
            "[[1,0],[0,0],[0,0]]",
        ] {
            assert!(parse_state(bad).is_err(), "{bad}");
        }
    }
}
