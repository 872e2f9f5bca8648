//! Convergence reports: EOC arithmetic and the CSV schema
//! (`# key=value` metadata lines, then `h,tau,l2_error,order`).

use crate::error::{Error, Result};

/// `log(e0 / e1) / log(g0 / g1)` for grid parameters `g` (mesh sizes or time steps).
pub fn eoc(e0: f64, e1: f64, g0: f64, g1: f64) -> f64 {
    (e0 / e1).ln() / (g0 / g1).ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportRow {
    pub h: f64,
    pub tau: f64,
    pub l2_error: f64,
    /// Rounded to 4 decimals; `None` on the first row or when undefined.
    pub order: Option<f64>,
}

/// Whether orders are fitted against `h` or `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ReportRow>,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

impl ConvergenceReport {
    /// Builds rows from `(h, tau, error)` triples, sorted by decreasing grid parameter.
    pub fn from_errors(
        metadata: Vec<(String, String)>,
        mut data: Vec<(f64, f64, f64)>,
        refinement: Refinement,
    ) -> Self {
        let key = |r: &(f64, f64, f64)| match refinement {
            Refinement::Space => r.0,
            Refinement::Time => r.1,
        };
        data.sort_by(|a, b| key(b).total_cmp(&key(a)));
        let mut rows = Vec::with_capacity(data.len());
        for (i, r) in data.iter().enumerate() {
            let order = if i == 0 {
                None
            } else {
                let p = &data[i - 1];
                let o = eoc(p.2, r.2, key(p), key(r));
                o.is_finite().then(|| round4(o))
            };
            rows.push(ReportRow {
                h: r.0,
                tau: r.1,
                l2_error: r.2,
                order,
            });
        }
        Self { metadata, rows }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Order of the finest pair.
    pub fn final_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str("h,tau,l2_error,order\n");
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.4}")).unwrap_or_default();
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{order}\n",
                r.h, r.tau, r.l2_error
            ));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut header = false;
        for (i, line) in text.lines().enumerate() {
            let bad = |what: &str| Error::Config(format!("report line {}: {what}", i + 1));
            if let Some(m) = line.strip_prefix('#') {
                let (k, v) = m
                    .trim_start()
                    .split_once('=')
                    .ok_or_else(|| bad("metadata without '='"))?;
                metadata.push((k.to_string(), v.to_string()));
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            if !header {
                if line.trim() != "h,tau,l2_error,order" {
                    return Err(bad("expected header h,tau,l2_error,order"));
                }
                header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("bad number"));
            rows.push(ReportRow {
                h: num(f[0])?,
                tau: num(f[1])?,
                l2_error: num(f[2])?,
                order: if f[3].trim().is_empty() {
                    None
                } else {
                    Some(num(f[3])?)
                },
            });
        }
        if !header {
            return Err(Error::Config("report has no header".into()));
        }
        Ok(Self { metadata, rows })
    }

    /// Fixed-width table for terminals.
    pub fn to_table(&self) -> String {
        let mut s = format!(
            "{:>12} {:>12} {:>14} {:>8}\n",
            "h", "tau", "L2 error", "order"
        );
        for r in &self.rows {
            let order = r
                .order
                .map(|o| format!("{o:.4}"))
                .unwrap_or_else(|| "-".into());
            s.push_str(&format!(
                "{:>12.6e} {:>12.6e} {:>14.6e} {:>8}\n",
                r.h, r.tau, r.l2_error, order
            ));
        }
        s
    }
}
