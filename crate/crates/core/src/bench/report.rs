use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::model::ModelKind;
use crate::metrics::MetricRow;
use crate::{Error, Result};

/// One finished roster cell. Metric fields are NaN when the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub form_id: usize,
    pub skeleton: String,
    pub variant_id: usize,
    pub model: String,
    pub optimizer: String,
    pub repeat: usize,
    pub mse: f64,
    pub da: f64,
    pub shda: f64,
    pub spda: f64,
    pub acda: f64,
    pub sh_w: f64,
    pub sp_w: f64,
    pub ac_w: f64,
    pub wall_time: f64,
    pub failed: bool,
    pub error: String,
}

impl RunRecord {
    pub fn set_metrics(&mut self, row: &MetricRow) {
        self.mse = row.mse;
        self.da = row.da;
        self.shda = row.shda;
        self.spda = row.spda;
        self.acda = row.acda;
        self.sh_w = row.sh_w;
        self.sp_w = row.sp_w;
        self.ac_w = row.ac_w;
    }

    pub fn values(&self) -> [f64; 5] {
        [self.mse, self.da, self.shda, self.spda, self.acda]
    }

    /// The record with its wall time zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> RunRecord {
        RunRecord { wall_time: 0.0, ..self.clone() }
    }

    fn usable(&self) -> bool {
        !self.failed && self.values().iter().all(|v| v.is_finite())
    }
}

pub fn write_records(records: &[RunRecord], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records(r: impl Read) -> Result<Vec<RunRecord>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(r).deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub model: String,
    pub runs: usize,
    pub failures: usize,
    /// Means in [`MetricRow::COLUMNS`] order.
    pub values: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn row(&self, model: &str) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.model == model)
    }
}

fn model_rank(name: &str) -> (usize, String) {
    match name.parse::<ModelKind>() {
        Ok(m) => (m.code() as usize, String::new()),
        Err(_) => (usize::MAX, name.to_string()),
    }
}

/// Per-model means over all cells. Failed cells count with the worst value
/// observed for the metric across all usable cells. The result does not
/// depend on record order.
pub fn aggregate(records: &[RunRecord]) -> SummaryTable {
    let mut worst = [f64::NAN; 5];
    for r in records.iter().filter(|r| r.usable()) {
        for (w, v) in worst.iter_mut().zip(r.values()) {
            *w = if w.is_nan() { v } else { w.max(v) };
        }
    }
    let mut groups: BTreeMap<(usize, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let (rank, tail) = model_rank(&r.model);
        groups.entry((rank, if rank == usize::MAX { tail } else { r.model.clone() })).or_default().push(r);
    }
    let rows = groups
        .into_values()
        .map(|group| {
            let mut values = [0.0; 5];
            for (c, slot) in values.iter_mut().enumerate() {
                let mut column: Vec<f64> =
                    group.iter().map(|r| if r.usable() { r.values()[c] } else { worst[c] }).collect();
                column.sort_by(f64::total_cmp);
                *slot = column.iter().sum::<f64>() / column.len() as f64;
            }
            SummaryRow {
                model: group[0].model.clone(),
                runs: group.len(),
                failures: group.iter().filter(|r| !r.usable()).count(),
                values,
            }
        })
        .collect();
    SummaryTable { rows }
}

/// Indices of the rows attaining the column minimum, per column.
fn best_rows(table: &SummaryTable) -> [Vec<usize>; 5] {
    std::array::from_fn(|c| {
        let min = table.rows.iter().map(|r| r.values[c]).filter(|v| !v.is_nan()).fold(f64::INFINITY, f64::min);
        (0..table.rows.len()).filter(|&i| table.rows[i].values[c] == min).collect()
    })
}

/// Markdown table with the per-column minimum in bold.
pub fn render_markdown(table: &SummaryTable) -> String {
    let best = best_rows(table);
    let mut out = String::from("| model |");
    for c in MetricRow::COLUMNS {
        let _ = write!(out, " {c} |");
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(MetricRow::COLUMNS.len()));
    out.push('\n');
    for (i, r) in table.rows.iter().enumerate() {
        let _ = write!(out, "| {} |", r.model);
        for (c, v) in r.values.iter().enumerate() {
            if best[c].contains(&i) {
                let _ = write!(out, " **{v:.4}** |");
            } else {
                let _ = write!(out, " {v:.4} |");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_summary_csv(table: &SummaryTable, w: impl Write) -> Result<()> {
    let best = best_rows(table);
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["model".to_string(), "runs".into(), "failures".into()];
    header.extend(MetricRow::COLUMNS.iter().map(|c| c.to_string()));
    header.push("best".into());
    out.write_record(&header)?;
    for (i, r) in table.rows.iter().enumerate() {
        let mut rec = vec![r.model.clone(), r.runs.to_string(), r.failures.to_string()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        let flags: Vec<&str> = (0..5).filter(|&c| best[c].contains(&i)).map(|c| MetricRow::COLUMNS[c]).collect();
        rec.push(flags.join(" "));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_summary_csv(r: impl Read) -> Result<SummaryTable> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(r).records() {
        let rec = rec?;
        if rec.len() < 8 {
            return Err(Error::parse("summary row has too few fields"));
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| Error::parse(format!("bad number `{}`", &rec[i])));
        let count = |i: usize| rec[i].parse::<usize>().map_err(|_| Error::parse(format!("bad count `{}`", &rec[i])));
        rows.push(SummaryRow {
            model: rec[0].to_string(),
            runs: count(1)?,
            failures: count(2)?,
            values: [num(3)?, num(4)?, num(5)?, num(6)?, num(7)?],
        });
    }
    Ok(SummaryTable { rows })
}

/// Markdown and delimited-text renderings of a summary table.
pub fn render_report(table: &SummaryTable) -> Result<(String, String)> {
    let mut csv_bytes = Vec::new();
    write_summary_csv(table, &mut csv_bytes)?;
    let csv_text = String::from_utf8(csv_bytes).map_err(|e| Error::parse(e.to_string()))?;
    Ok((render_markdown(table), csv_text))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(model: &str, v: [f64; 5], failed: bool) -> RunRecord {
        RunRecord {
            scenario: "noiseless".into(),
            form_id: 0,
            skeleton: "sin".into(),
            variant_id: 0,
            model: model.into(),
            optimizer: "adam".into(),
            repeat: 0,
            mse: v[0],
            da: v[1],
            shda: v[2],
            spda: v[3],
            acda: v[4],
            sh_w: 0.0,
            sp_w: 0.0,
            ac_w: 0.0,
            wall_time: 0.5,
            failed,
            error: if failed { "non-finite loss, epoch 3".into() } else { String::new() },
        }
    }

    #[test]
    fn single_record_table() {
        let t = aggregate(&[rec("sin", [0.1, 0.2, 0.3, 0.4, 0.5], false)]);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].values, [0.1, 0.2, 0.3, 0.4, 0.5]);
    }

    #[test]
    fn hand_arithmetic_and_imputation() {
        let recs = vec![
            rec("sin", [1.0, 2.0, 3.0, 4.0, 5.0], false),
            rec("sin", [3.0, 4.0, 5.0, 6.0, 7.0], false),
            rec("snake", [0.5, 0.5, 0.5, 0.5, 0.5], false),
            rec("snake", [f64::NAN; 5], true),
        ];
        let t = aggregate(&recs);
        assert_eq!(t.row("sin").unwrap().values, [2.0, 3.0, 4.0, 5.0, 6.0]);
        // the failed snake cell takes the worst observed value per column
        assert_eq!(t.row("snake").unwrap().values, [1.75, 2.25, 2.75, 3.25, 3.75]);
        assert_eq!(t.row("snake").unwrap().failures, 1);
        assert_eq!(t.rows[0].model, "sin");
    }

    #[test]
    fn permutation_invariant_and_matches_two_pass_mean() {
        let mut recs: Vec<RunRecord> = (0..40)
            .map(|i| {
                let x = (i as f64 * 0.731).sin().abs() * 10f64.powi(-(i % 7));
                rec(if i % 3 == 0 { "pareto" } else { "cos" }, [x, 2.0 * x, x + 1e-9, x * x, 0.1], false)
            })
            .collect();
        let a = aggregate(&recs);
        recs.reverse();
        recs.swap(3, 17);
        assert_eq!(aggregate(&recs), a);
        let cos: Vec<f64> = recs.iter().filter(|r| r.model == "cos").map(|r| r.mse).collect();
        let mean = cos.iter().sum::<f64>() / cos.len() as f64;
        let mut comp = 0.0;
        for v in &cos {
            comp += v - mean;
        }
        let two_pass = mean + comp / cos.len() as f64;
        assert!((a.row("cos").unwrap().values[0] - two_pass).abs() < 1e-12);
    }

    #[test]
    fn markdown_flags_ties_jointly() {
        let t = aggregate(&[rec("sin", [0.1, 0.2, 0.3, 0.4, 0.5], false), rec("cos", [0.1, 0.1, 0.9, 0.9, 0.9], false)]);
        let md = render_markdown(&t);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines[0], "| model | MSE | DA- | SHDA- | SPDA- | ACDA- |");
        assert_eq!(lines[2], "| sin | **0.1000** | 0.2000 | **0.3000** | **0.4000** | **0.5000** |");
        assert_eq!(lines[3], "| cos | **0.1000** | **0.1000** | 0.9000 | 0.9000 | 0.9000 |");
    }

    #[test]
    fn summary_csv_round_trip() {
        let t = aggregate(&[
            rec("n-fittest", [0.046_123_456_789, 0.01, 0.02, 0.03, 1e-9], false),
            rec("t-snake", [0.375, 0.3, 0.2, 0.1, 0.0], false),
        ]);
        let (_, csv_text) = render_report(&t).unwrap();
        assert!(csv_text.starts_with("model,runs,failures,MSE,DA-,SHDA-,SPDA-,ACDA-,best\n"));
        assert_eq!(read_summary_csv(csv_text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn records_round_trip() {
        let recs = vec![rec("sin", [0.1, 0.2, 0.3, 0.4, 0.5], false), rec("bayes", [f64::NAN; 5], true)];
        let mut buf = Vec::new();
        write_records(&recs, &mut buf).unwrap();
        let back = read_records(&buf[..]).unwrap();
        assert_eq!(back[0], recs[0]);
        assert!(back[1].failed && back[1].mse.is_nan() && back[1].error == recs[1].error);
    }
}
