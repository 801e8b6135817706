//! Number formatting and small file helpers shared by the experiment writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// Formats with 12 significant digits. Plain decimal notation is used for
/// magnitudes in `[1e-6, 1e15)`, scientific otherwise.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-6..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.11e}")
    }
}

/// Formats an optional value; `None` becomes an empty field.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

/// Writes a CSV file with the given header and pre-formatted rows.
pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut wr = csv::Writer::from_path(path).map_err(crate::phasespace::csv_err)?;
    wr.write_record(header).map_err(crate::phasespace::csv_err)?;
    for r in rows {
        wr.write_record(r).map_err(crate::phasespace::csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json_file<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.5), "0.500000000000");
        assert_eq!(fmt_sig(-1.0), "-1.00000000000");
        assert_eq!(fmt_sig(std::f64::consts::SQRT_2 - 1.0), "0.414213562373");
        assert_eq!(fmt_sig(1234.5), "1234.50000000");
        assert_eq!(fmt_sig(1.5e-9), "1.50000000000e-9");
        assert_eq!(fmt_opt(None), "");
    }
}
