//! Suite configuration, slope fitting, and machine-readable report emission.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

/// Least-squares fit of `log(value)` against `log(scale)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fit a power law through positive `(scale, value)` pairs in log-log
/// coordinates. Needs at least six strictly positive pairs.
pub fn fit_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "slope fit needs >= 6 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(s, v)| s <= 0.0 || v <= 0.0) {
        return Err(Error::InsufficientData(
            "slope fit needs strictly positive scales and values".into(),
        ));
    }
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(s, v) in pairs {
        let (x, y) = (s.ln(), v.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InsufficientData(
            "degenerate abscissa in slope fit".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss_tot = syy - sy * sy / n;
    let ss_res: f64 = pairs
        .iter()
        .map(|&(s, v)| {
            let e = v.ln() - (intercept + slope * s.ln());
            e * e
        })
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
    })
}

/// One named check inside a suite run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Absolute comparison: `|measured - expected| <= tolerance`.
    pub fn abs(name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            measured,
            expected,
            tolerance,
            pass: measured.is_finite() && (measured - expected).abs() <= tolerance,
        }
    }

    /// Bound comparison: `measured <= tolerance` (expected records the bound).
    pub fn bound(name: &str, measured: f64, tolerance: f64) -> Self {
        CheckRecord {
            name: name.to_string(),
            measured,
            expected: 0.0,
            tolerance,
            pass: measured.is_finite() && measured <= tolerance,
        }
    }

    /// Relative comparison against `expected`.
    pub fn rel(name: &str, measured: f64, expected: f64, rel_tol: f64) -> Self {
        let tol = rel_tol * expected.abs().max(f64::MIN_POSITIVE);
        CheckRecord {
            name: name.to_string(),
            measured,
            expected,
            tolerance: tol,
            pass: measured.is_finite() && (measured - expected).abs() <= tol,
        }
    }
}

/// Deterministic body of a suite report; hashing or byte-comparison for
/// reproducibility applies to this part only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBody {
    pub suite: String,
    pub params: BTreeMap<String, String>,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
}

/// A full suite report: deterministic body plus environment stamp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub body: ReportBody,
    pub wall_ms: u128,
    pub version: String,
}

impl Report {
    pub fn new(suite: &str, params: BTreeMap<String, String>, checks: Vec<CheckRecord>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report {
            body: ReportBody {
                suite: suite.to_string(),
                params,
                checks,
                pass,
            },
            wall_ms: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn pass(&self) -> bool {
        self.body.pass
    }

    /// Serialized deterministic body (excludes wall time and version).
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serialization")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_json().as_bytes())?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Format a float with 12 significant digits, the CSV convention.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Write a CSV file with header row, 12-significant-digit decimal floats,
/// and LF line endings.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_sig12(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_is_recovered() {
        let pairs: Vec<(f64, f64)> = (1..=10).map(|k| {
            let r = k as f64;
            (r, 5.0 * r.powi(-3))
        }).collect();
        let fit = fit_slope(&pairs).unwrap();
        assert!((fit.slope - -3.0).abs() < 1e-12);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law_slope_within_tolerance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let pairs: Vec<(f64, f64)> = (0..48)
            .map(|k| {
                let r = (0.1f64).exp2() * (1.25f64).powi(k);
                let noise = 1.0 + 0.01 * rng.random_range(-1.0..1.0);
                (r, 2.0 * r.powf(1.5) * noise)
            })
            .collect();
        let fit = fit_slope(&pairs).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.02, "slope {}", fit.slope);
    }

    #[test]
    fn constant_data_fits_zero_slope() {
        let pairs: Vec<(f64, f64)> = (1..=8).map(|k| (k as f64, 2.5)).collect();
        let fit = fit_slope(&pairs).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(fit_slope(&[(1.0, 1.0); 3]).is_err());
        let bad = vec![(1.0, 1.0), (2.0, -1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0), (6.0, 1.0)];
        assert!(fit_slope(&bad).is_err());
    }

    #[test]
    fn report_body_is_deterministic() {
        let mut params = BTreeMap::new();
        params.insert("sigma".into(), "1/2".into());
        let checks = vec![CheckRecord::abs("x", 1.0, 1.0, 0.1)];
        let a = Report::new("demo", params.clone(), checks.clone());
        let b = Report::new("demo", params, checks);
        assert_eq!(a.body_json(), b.body_json());
        assert!(a.pass());
    }

    #[test]
    fn csv_format_is_stable() {
        assert_eq!(fmt_sig12(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig12(-0.125), "-1.25000000000e-1");
    }
}
