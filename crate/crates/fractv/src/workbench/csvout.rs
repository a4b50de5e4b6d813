//! CSV emission for training tables and landscape slices.
//!
//! One schema serves both: a header naming every parameter column followed
//! by `assessment`, then one row per grid point in the enumeration
//! (lexicographic) order the caller provides. Numbers print in scientific
//! notation with 17 significant digits, so values round-trip exactly and two
//! runs are byte-comparable; the supremum exponent prints as `inf`.

use std::path::Path;

use crate::bilevel::AssessmentRecord;
use crate::error::Result;
use crate::lp::LpExponent;

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_exponent(p: &LpExponent) -> String {
    match p {
        LpExponent::Infinity => "inf".to_string(),
        LpExponent::Finite(v) => fmt_f64(*v),
    }
}

/// Render a table of records under the given parameter column labels.
pub fn table_to_csv(labels: &[String], records: &[AssessmentRecord]) -> String {
    let mut out = String::new();
    out.push_str(&labels.join(","));
    out.push_str(",assessment\n");
    for rec in records {
        let mut cols: Vec<String> = Vec::with_capacity(labels.len() + 1);
        cols.extend(rec.params.alpha.iter().map(|a| fmt_f64(*a)));
        cols.push(fmt_f64(rec.params.r1));
        cols.push(fmt_f64(rec.params.r2));
        cols.extend(rec.params.p.iter().map(fmt_exponent));
        cols.push(fmt_f64(rec.assessment));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Write a table to disk.
pub fn write_table_csv(
    path: impl AsRef<Path>,
    labels: &[String],
    records: &[AssessmentRecord],
) -> Result<()> {
    std::fs::write(path, table_to_csv(labels, records))?;
    Ok(())
}
