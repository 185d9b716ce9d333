//! Aligned plain-text tables.

use std::collections::BTreeMap;
use std::fmt;

use super::ranking::AlignmentReport;
use super::scoring::ScoreRecord;
use crate::perturb::Applicability;

/// Column order used for per-metric tables.
pub const METRIC_COLUMNS: [&str; 6] = ["BL", "LE", "RO", "ME", "BS", "SP"];

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new(headers: impl IntoIterator<Item = impl Into<String>>) -> Self {
        TextTable {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = impl Into<String>>) {
        self.rows.push(row.into_iter().map(Into::into).collect());
    }
}

impl fmt::Display for TextTable {
    /// First column left-aligned, the rest right-aligned, two-space gutters.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols = self
            .headers
            .len()
            .max(self.rows.iter().map(Vec::len).max().unwrap_or(0));
        let mut width = vec![0usize; cols];
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            for (i, c) in row.iter().enumerate() {
                width[i] = width[i].max(c.chars().count());
            }
        }
        let line = |f: &mut fmt::Formatter<'_>, row: &[String]| -> fmt::Result {
            let mut out = String::new();
            for (i, w) in width.iter().enumerate() {
                let c = row.get(i).map(String::as_str).unwrap_or("");
                let pad = w - c.chars().count();
                if i > 0 {
                    out.push_str("  ");
                    out.push_str(&" ".repeat(pad));
                    out.push_str(c);
                } else {
                    out.push_str(c);
                    out.push_str(&" ".repeat(pad));
                }
            }
            writeln!(f, "{}", out.trim_end())
        };
        line(f, &self.headers)?;
        let rule: usize = width.iter().sum::<usize>() + 2 * cols.saturating_sub(1);
        writeln!(f, "{}", "-".repeat(rule))?;
        for row in &self.rows {
            line(f, row)?;
        }
        Ok(())
    }
}

pub fn applicability_table(rows: &[Applicability]) -> TextTable {
    let mut t = TextTable::new(["Perturbation", "Applied", "Total", "%"]);
    for a in rows {
        t.push([
            a.kind.id().to_string(),
            a.applied.to_string(),
            a.total.to_string(),
            a.percent_2dp(),
        ]);
    }
    t
}

/// Mean normalized score per metric id.
pub fn mean_by_metric(scores: &[ScoreRecord]) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for s in scores {
        let e = acc.entry(s.metric.clone()).or_default();
        e.0 += s.normalized;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect()
}

/// Rows of per-metric means, two decimals; `-` where a metric is absent.
/// `columns` defaults to [`METRIC_COLUMNS`] followed by any other ids seen.
pub fn means_table(corner: &str, rows: &[(String, BTreeMap<String, f64>)], columns: Option<&[String]>) -> TextTable {
    let cols: Vec<String> = match columns {
        Some(c) => c.to_vec(),
        None => {
            let mut c: Vec<String> = METRIC_COLUMNS.iter().map(|s| s.to_string()).collect();
            for (_, m) in rows {
                for k in m.keys() {
                    if !c.contains(k) {
                        c.push(k.clone());
                    }
                }
            }
            c.retain(|k| rows.iter().any(|(_, m)| m.contains_key(k)));
            c
        }
    };
    let mut t = TextTable::new(std::iter::once(corner.to_string()).chain(cols.iter().cloned()));
    for (label, m) in rows {
        let mut row = vec![label.clone()];
        row.extend(
            cols.iter()
                .map(|c| m.get(c).map_or("-".to_string(), |v| format!("{v:.2}"))),
        );
        t.push(row);
    }
    t
}

/// RMSE matrix: one row per `ranker_a`, one column per `ranker_b`.
pub fn rmse_table(reports: &[AlignmentReport]) -> TextTable {
    let mut rows: Vec<&str> = Vec::new();
    let mut cols: Vec<&str> = Vec::new();
    for r in reports {
        if !rows.contains(&r.ranker_a.as_str()) {
            rows.push(&r.ranker_a);
        }
        if !cols.contains(&r.ranker_b.as_str()) {
            cols.push(&r.ranker_b);
        }
    }
    let mut t = TextTable::new(std::iter::once("RMSE").chain(cols.iter().copied()));
    for a in &rows {
        let mut row = vec![a.to_string()];
        for b in &cols {
            let v = reports.iter().find(|r| r.ranker_a == *a && r.ranker_b == *b);
            row.push(v.map_or("-".to_string(), |r| format!("{:.2}", r.rmse)));
        }
        t.push(row);
    }
    t
}
