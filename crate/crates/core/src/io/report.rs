//! JSON reports and CSV iterate tables.

use crate::outer::DistanceReport;
use crate::{Error, Result};
use serde::de::Deserializer;
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use std::fmt::Write as _;
use std::path::Path;

/// A float written with 17 significant digits; non-finite values become `null`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            let raw = RawValue::from_string(format!("{:.16e}", self.0))
                .map_err(serde::ser::Error::custom)?;
            raw.serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Num(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub eps: Num,
    pub r: Num,
    pub used_bisection: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub rr_prime_ratio: Num,
    pub res_stationarity: Num,
    pub re_s_norm: Num,
}

/// Serialized form of a [`DistanceReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub mode: String,
    pub delta: Num,
    pub tol: Num,
    pub eps_delta_star: Num,
    pub eps_zero_star: Num,
    pub gamma: Num,
    pub coalescing_lambdas: [[Num; 2]; 2],
    pub iterates: Vec<IterateRecord>,
    pub diagnostics: DiagnosticsRecord,
}

impl ReportRecord {
    pub fn from_report(r: &DistanceReport) -> Self {
        let [l0, l1] = r.coalescing_lambdas;
        ReportRecord {
            mode: r.mode.name().to_string(),
            delta: Num(r.delta),
            tol: Num(r.tol),
            eps_delta_star: Num(r.eps_delta_star),
            eps_zero_star: Num(r.eps_zero_star_estimate),
            gamma: Num(r.gamma),
            coalescing_lambdas: [[Num(l0.re), Num(l0.im)], [Num(l1.re), Num(l1.im)]],
            iterates: r
                .iterates
                .iter()
                .map(|it| IterateRecord {
                    k: it.k,
                    eps: Num(it.epsilon),
                    r: Num(it.r),
                    used_bisection: it.used_bisection,
                })
                .collect(),
            diagnostics: DiagnosticsRecord {
                rr_prime_ratio: Num(r.diagnostics.rr_prime_ratio),
                res_stationarity: Num(r.diagnostics.res_stationarity),
                re_s_norm: Num(r.diagnostics.re_s_norm),
            },
        }
    }

    fn validate(&self) -> Result<()> {
        if self.iterates.is_empty() {
            return Err(Error::Schema("report has no iterates".into()));
        }
        if !matches!(
            self.mode.as_str(),
            "complex" | "real" | "pattern-complex" | "pattern-real"
        ) {
            return Err(Error::Schema(format!("unknown mode '{}'", self.mode)));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        serde_json::to_string_pretty(self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ReportRecord =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        rec.validate()?;
        Ok(rec)
    }
}

pub fn write_report(report: &DistanceReport, path: &Path) -> Result<()> {
    let text = ReportRecord::from_report(report).to_json()?;
    std::fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<ReportRecord> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ReportRecord::from_json(&text)
}

/// CSV table with header `k,eps,r`.
pub fn iterate_table_csv(report: &DistanceReport) -> String {
    let mut out = String::from("k,eps,r\n");
    for it in &report.iterates {
        let _ = writeln!(out, "{},{:.15e},{:.15e}", it.k, it.epsilon, it.r);
    }
    out
}

/// Aligned text table; coalesced evaluations show `< tol`.
pub fn iterate_table_text(report: &DistanceReport) -> String {
    let mut out = format!("{:>3}  {:>18}  {:>18}\n", "k", "eps_k", "r(eps_k)");
    for it in &report.iterates {
        let r = if it.coalesced {
            "< tol".to_string()
        } else {
            format!("{:.15}", it.r)
        };
        let _ = writeln!(out, "{:>3}  {:>18.15}  {:>18}", it.k, it.epsilon, r);
    }
    out
}
