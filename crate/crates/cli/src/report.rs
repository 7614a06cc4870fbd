use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cuspvar::continuation::TrackedPath;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Skipped,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Status::Pass | Status::Skipped => ExitCode::SUCCESS,
            Status::Inconclusive => ExitCode::from(2),
            Status::Fail => ExitCode::from(1),
        }
    }

    pub fn from_bool(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// One pass/fail line with the number it rests on.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status,
            value: None,
            tolerance: None,
            detail: detail.into(),
        }
    }

    /// Passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status: Status::from_bool(value < tolerance),
            value: Some(value),
            tolerance: Some(tolerance),
            detail: detail.into(),
        }
    }
}

/// Tolerances and limits of one run; recorded in every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub spec: String,
    pub seed: u64,
    pub tol_residual: f64,
    pub tol_dedup: f64,
    pub tol_loop: f64,
    pub tol_vol_eq: f64,
    pub budget: usize,
}

#[derive(Serialize)]
pub struct Report<T: Serialize> {
    pub config: RunConfig,
    pub status: Status,
    pub checks: Vec<Check>,
    pub result: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

pub fn overall(checks: &[Check]) -> Status {
    checks
        .iter()
        .map(|c| c.status)
        .filter(|s| *s != Status::Skipped)
        .max()
        .unwrap_or(Status::Pass)
}

/// Wall-clock sections, reported only on request.
#[derive(Default)]
pub struct Timer {
    marks: BTreeMap<String, f64>,
}

impl Timer {
    pub fn time<R>(&mut self, name: &str, f: impl FnOnce() -> R) -> R {
        let t = Instant::now();
        let r = f();
        self.marks.insert(name.to_string(), t.elapsed().as_secs_f64());
        r
    }

    pub fn into_map(self) -> BTreeMap<String, f64> {
        self.marks
    }
}

pub struct Output {
    pub dir: Option<PathBuf>,
    pub csv: bool,
    pub timings: bool,
}

impl Output {
    /// Writes `<name>.json` into the output directory, or prints it.
    pub fn emit<T: Serialize>(&self, name: &str, report: &Report<T>) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(format!("{name}.json")), text + "\n")?;
                let mut out = std::io::stdout().lock();
                for c in &report.checks {
                    writeln!(out, "{:<13} {}  {}", format!("[{:?}]", c.status).to_lowercase(), c.name, c.detail)?;
                }
                writeln!(out, "status: {:?}", report.status)?;
            }
            None => println!("{text}"),
        }
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> std::io::Result<()> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }

    /// Path CSV with columns `t, re_u1, im_u1, re_v1, im_v1, ..., volume`.
    pub fn path_csv(&self, name: &str, path: &TrackedPath, volume: &[f64]) -> std::io::Result<()> {
        if !self.csv {
            return Ok(());
        }
        let Some(dir) = &self.dir else {
            return Err(std::io::Error::other("--csv needs --out"));
        };
        fs::create_dir_all(dir)?;
        write_path_csv(&dir.join(format!("{name}.csv")), path, volume)
    }
}

pub fn write_path_csv(file: &Path, path: &TrackedPath, volume: &[f64]) -> std::io::Result<()> {
    let h = path.samples.first().map_or(0, |s| s.point.peripheral.len());
    let mut w = csv::Writer::from_path(file).map_err(std::io::Error::other)?;
    let mut header = vec!["t".to_string()];
    for i in 1..=h {
        header.extend([format!("re_u{i}"), format!("im_u{i}"), format!("re_v{i}"), format!("im_v{i}")]);
    }
    header.push("volume".into());
    w.write_record(&header).map_err(std::io::Error::other)?;
    for (k, s) in path.samples.iter().enumerate() {
        let mut row = vec![s.t.to_string()];
        for p in &s.point.peripheral {
            row.extend([p.u.re, p.u.im, p.v.re, p.v.im].map(|x| x.to_string()));
        }
        row.push(volume.get(k).map_or(String::new(), |v| v.to_string()));
        w.write_record(&row).map_err(std::io::Error::other)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_takes_the_worst_non_skipped_status() {
        let c = |s| Check::new("x", s, "");
        assert_eq!(overall(&[]), Status::Pass);
        assert_eq!(overall(&[c(Status::Skipped)]), Status::Pass);
        assert_eq!(overall(&[c(Status::Pass), c(Status::Inconclusive)]), Status::Inconclusive);
        assert_eq!(overall(&[c(Status::Fail), c(Status::Inconclusive)]), Status::Fail);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::Pass.exit_code(), ExitCode::SUCCESS);
        assert_eq!(Status::Inconclusive.exit_code(), ExitCode::from(2));
        assert_eq!(Status::Fail.exit_code(), ExitCode::from(1));
    }

    #[test]
    fn below_is_strict() {
        assert_eq!(Check::below("x", 1.0, 1.0, "").status, Status::Fail);
        assert_eq!(Check::below("x", f64::NAN, 1.0, "").status, Status::Fail);
    }
}
