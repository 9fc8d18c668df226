//! CSV and JSON rendering. Outputs carry a metadata header and nothing that
//! varies between identical runs.

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::correlation::{ConvergenceReport, CorrelationResult, RowStatus};
use crate::eta::TailAudit;
use crate::sparsity::GrowthRow;
use crate::ExactRatio;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub basis: String,
    #[serde(rename = "K")]
    pub levels: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub precision: u32,
}

impl Metadata {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            tool: "corrseq",
            version: VERSION,
            command: command.to_string(),
            basis: cfg.basis_label(),
            levels: cfg.levels,
            seed: cfg.seed,
            rng: cfg.rng.id(),
            precision: cfg.precision,
        }
    }

    /// `# key: value` lines.
    pub fn csv_header(&self) -> String {
        let v = serde_json::to_value(self).expect("flat metadata");
        let mut out = String::new();
        for (k, v) in v.as_object().expect("object") {
            let text = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}: {text}\n"));
        }
        out
    }
}

/// A table rendered as RFC-4180 CSV below the metadata lines.
pub fn csv_table(meta: &Metadata, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells");
    format!("{}{}", meta.csv_header(), body)
}

pub fn json_document(meta: &Metadata, result: Value) -> String {
    let mut text = serde_json::to_string_pretty(&json!({ "meta": meta, "result": result }))
        .expect("plain JSON");
    text.push('\n');
    text
}

fn num(x: &ExactRatio) -> String {
    x.numer().to_string()
}

fn den(x: &ExactRatio) -> String {
    x.denom().to_string()
}

fn approx(x: &ExactRatio) -> String {
    format!("{:.12}", crate::interval::ratio_f64(x))
}

pub const CORR_HEADER: [&str; 8] = [
    "k",
    "d",
    "method",
    "S_k_num",
    "S_k_den",
    "normalized_num",
    "normalized_den",
    "S_k_approx",
];

pub fn corr_rows(results: &[CorrelationResult]) -> Vec<Vec<String>> {
    results
        .iter()
        .map(|r| {
            let (nn, nd) = match &r.normalized {
                Some(x) => (num(x), den(x)),
                None => ("n/a".into(), "n/a".into()),
            };
            vec![
                r.k.to_string(),
                r.d.to_string(),
                r.method.to_string(),
                num(&r.value),
                den(&r.value),
                nn,
                nd,
                approx(&r.value),
            ]
        })
        .collect()
}

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "d",
    "k",
    "status",
    "method",
    "S_k_num",
    "S_k_den",
    "gamma_num",
    "gamma_den",
    "normalized",
    "eta",
];

pub fn convergence_rows(report: &ConvergenceReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            let (vn, vd) = match &r.value {
                Some(v) => (num(v), den(v)),
                None => ("n/a".into(), "n/a".into()),
            };
            let status = match r.status {
                RowStatus::Applicable => "applicable",
                RowStatus::NoFreeCoordinate => "no_free_coordinate",
                RowStatus::NotInSigma => "not_in_sigma",
            };
            vec![
                report.d.to_string(),
                r.k.to_string(),
                status.into(),
                r.method.map(|m| m.to_string()).unwrap_or_else(|| "n/a".into()),
                vn,
                vd,
                num(&r.gamma),
                den(&r.gamma),
                r.normalized
                    .as_ref()
                    .map(ratio_cell)
                    .unwrap_or_else(|| "n/a".into()),
                r.eta.tag().into(),
            ]
        })
        .collect()
}

/// `p/q`, or `p` for integers.
pub fn ratio_cell(x: &ExactRatio) -> String {
    if x.denom() == &1.into() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub const GROWTH_HEADER: [&str; 7] =
    ["k", "N_k", "count", "ratio_approx", "bound_level", "bound", "bound_holds"];

pub fn growth_rows(rows: &[GrowthRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.n_k.clone(),
                r.count.to_string(),
                format!("{:.12}", r.ratio),
                r.bound_level.to_string(),
                r.bound.to_string(),
                r.bound_holds.to_string(),
            ]
        })
        .collect()
}

pub const TAIL_HEADER: [&str; 8] =
    ["m", "t_approx", "trials", "exceedances", "empirical_approx", "bound_approx", "slack_approx", "passed"];

pub fn tail_rows(rows: &[TailAudit]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|a| {
            vec![
                a.m.to_string(),
                format!("{:.12}", a.t),
                a.trials.to_string(),
                a.exceedances.to_string(),
                format!("{:.12}", a.empirical),
                format!("{:.12e}", a.bound),
                format!("{:.12e}", a.slack),
                a.passed.to_string(),
            ]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{convergence_report, corr_factorized, BruteOptions};
    use crate::radix::RadixBasis;
    use crate::witness::{Eta, EtaAssignment};
    use num_bigint::BigUint;

    fn meta() -> Metadata {
        Metadata::new("test", &RunConfig::default())
    }

    #[test]
    fn header_lines() {
        let h = meta().csv_header();
        assert!(h.starts_with("# tool: corrseq\n# version: "));
        assert!(h.contains("# seed: 1\n"));
        assert!(h.contains("# rng: chacha8-rand_chacha0.9-v1\n"));
        assert!(h.contains("# precision: 256\n"));
    }

    #[test]
    fn csv_quotes_and_is_deterministic() {
        let rows = vec![vec!["a,b".to_string(), "plain".to_string()]];
        let t = csv_table(&meta(), &["x", "y"], &rows);
        assert!(t.ends_with("x,y\r\n\"a,b\",plain\r\n"));
        assert_eq!(t, csv_table(&meta(), &["x", "y"], &rows));
    }

    #[test]
    fn corr_row_has_exact_columns() {
        let b = RadixBasis::default_shifted(20).unwrap();
        let mut eta = EtaAssignment::constant(3, Eta::Plus);
        eta.insert((1, 2), Eta::MinusThird);
        let r = corr_factorized(&b, 3, &BigUint::from(13u8), &eta).unwrap();
        let rows = corr_rows(&[r]);
        assert_eq!(&rows[0][..7], &["3", "13", "factorized", "-5", "24", "-1", "3"]);
    }

    #[test]
    fn convergence_rows_mark_missing_cells() {
        let b = RadixBasis::default_shifted(20).unwrap();
        let eta = EtaAssignment::constant(5, Eta::MinusThird);
        let rep = convergence_report(&b, &BigUint::from(13u8), &eta, 2..=5, BruteOptions::default())
            .unwrap();
        let rows = convergence_rows(&rep);
        assert_eq!(rows[0][2], "no_free_coordinate");
        assert_eq!(rows[0][8], "n/a");
        assert_eq!(rows[1][8], "-1/3");
        let json = json_document(&meta(), json!({"ok": true}));
        assert!(json.contains("\"meta\"") && json.ends_with("}\n"));
    }
}
