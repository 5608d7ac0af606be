//! Table rendering: Markdown, CSV and boxplot JSON.

use std::fmt::Write as _;

use super::compare::{Comparison, TestResult};
use crate::error::Result;

/// Three significant digits; values of 100 or more print as whole numbers.
pub fn format_value(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    if x.abs() >= 99.95 {
        return format!("{x:.0}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(2 - magnitude);
    let rounded = (x * scale).round() / scale;
    let digits = rounded.abs().log10().floor() as i32 + 1;
    let decimals = (3 - digits).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// A "median (IQR)" cell.
pub fn format_cell(median: f64, iqr: f64) -> String {
    format!("{} ({})", format_value(median), format_value(iqr))
}

pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.3}")
    }
}

fn bold_if(text: String, on: bool) -> String {
    if on {
        format!("**{text}**")
    } else {
        text
    }
}

fn cells(r: &TestResult) -> [String; 4] {
    [
        format_cell(r.control.median, r.control.iqr),
        format_cell(r.patient.median, r.patient.iqr),
        format_p(r.p_raw),
        format_p(r.p_adjusted),
    ]
}

pub fn render_markdown(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Group comparison\n");
    let _ = writeln!(
        out,
        "Cells show median (IQR) over subjects. Two-tailed Mann-Whitney U tests, \
         Benjamini-Hochberg adjusted within each family; bold marks adjusted p < {}.\n",
        c.alpha
    );
    let _ = writeln!(
        out,
        "| feature | state | control | patient | p_raw | p_adjusted | significant |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|---|");
    for r in &c.results {
        let [control, patient, p_raw, p_adj] = cells(r);
        let s = r.significant;
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.label(),
            r.state.as_str(),
            bold_if(control, s),
            bold_if(patient, s),
            p_raw,
            bold_if(p_adj, s),
            if s { "yes" } else { "no" }
        );
    }
    if !c.skipped.is_empty() {
        let _ = writeln!(out, "\n## Skipped\n");
        for s in &c.skipped {
            let _ = writeln!(
                out,
                "- {} {} ({}): {}",
                s.measure,
                s.statistic.as_str(),
                s.state.as_str(),
                s.reason
            );
        }
    }
    out
}

pub fn render_csv(c: &Comparison) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "feature",
        "state",
        "control",
        "patient",
        "n_control",
        "n_patient",
        "u_statistic",
        "p_raw",
        "p_adjusted",
        "significant",
    ])?;
    for r in &c.results {
        let [control, patient, _, _] = cells(r);
        w.write_record([
            r.label(),
            r.state.as_str().to_string(),
            control,
            patient,
            r.control.n.to_string(),
            r.patient.n.to_string(),
            r.u_statistic.to_string(),
            r.p_raw.to_string(),
            r.p_adjusted.to_string(),
            r.significant.to_string(),
        ])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_boxplots(c: &Comparison) -> Result<String> {
    Ok(serde_json::to_string_pretty(&c.boxplots)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureName, Group};
    use crate::stats::boxplot::BoxplotStats;
    use crate::stats::compare::{Block, BoxplotRecord, GroupDescription, Measure, Statistic};
    use crate::stats::PMethod;

    #[test]
    fn table_number_convention() {
        assert_eq!(format_cell(6.87, 1.24), "6.87 (1.24)");
        assert_eq!(format_cell(6.8712, 1.2449), "6.87 (1.24)");
        assert_eq!(format_value(0.666), "0.666");
        assert_eq!(format_value(0.0472), "0.0472");
        assert_eq!(format_value(344.4), "344");
        assert_eq!(format_value(4166.2), "4166");
        assert_eq!(format_value(9.996), "10.0");
        assert_eq!(format_value(99.96), "100");
        assert_eq!(format_value(99.94), "99.9");
        assert_eq!(format_value(-1.2345), "-1.23");
        assert_eq!(format_value(0.0), "0");
    }

    #[test]
    fn p_formatting() {
        assert_eq!(format_p(0.0004), "<0.001");
        assert_eq!(format_p(0.02), "0.020");
        assert_eq!(format_p(1.0), "1.000");
    }

    fn comparison() -> Comparison {
        let desc = |median, iqr| GroupDescription { n: 20, median, iqr };
        Comparison {
            alpha: 0.05,
            results: vec![TestResult {
                measure: Measure::Feature(FeatureName::AccSte),
                statistic: Statistic::Mean,
                state: Block::Awake,
                family: "awake".into(),
                control: desc(6.87, 1.24),
                patient: desc(5.944, 2.983),
                u_statistic: 120.0,
                p_raw: 0.011,
                p_adjusted: 0.02,
                significant: true,
                method: PMethod::Normal,
            }],
            skipped: vec![],
            boxplots: vec![BoxplotRecord {
                feature: "acc_STE mean".into(),
                state: Block::Awake,
                group: Group::Control,
                stats: BoxplotStats {
                    median: 6.87,
                    q1: 6.0,
                    q3: 7.24,
                    whisker_lo: 5.0,
                    whisker_hi: 8.0,
                    outliers: vec![12.0],
                },
            }],
        }
    }

    #[test]
    fn markdown_row() {
        let md = render_markdown(&comparison());
        assert!(md.contains("| acc_STE mean | awake | **6.87 (1.24)** | **5.94 (2.98)** | 0.011 | **0.020** | yes |"));
    }

    #[test]
    fn csv_rows() {
        let text = render_csv(&comparison()).unwrap();
        let mut lines = text.lines();
        assert!(lines
            .next()
            .unwrap()
            .starts_with("feature,state,control,patient"));
        assert_eq!(
            lines.next().unwrap(),
            "acc_STE mean,awake,6.87 (1.24),5.94 (2.98),20,20,120,0.011,0.02,true"
        );
    }

    #[test]
    fn boxplot_json_fields() {
        let json: serde_json::Value =
            serde_json::from_str(&render_boxplots(&comparison()).unwrap()).unwrap();
        let row = &json[0];
        for key in [
            "feature",
            "state",
            "group",
            "median",
            "q1",
            "q3",
            "whisker_lo",
            "whisker_hi",
            "outliers",
        ] {
            assert!(row.get(key).is_some(), "missing {key}");
        }
        assert_eq!(row["group"], "control");
    }
}
