//! Crosstalk reports as tab-separated tables and JSON.

use std::fmt::Write as _;

use crate::crosstalk::CrosstalkReport;

/// One row per sweep point:
/// `pitch_mm  mass_kg  mechanisms  count  mean  std  min  max  undefined  flagged`.
pub fn summary_table(reports: &[CrosstalkReport]) -> String {
    let mut s = String::from("pitch_mm\tmass_kg\tmechanisms\tcount\tmean\tstd\tmin\tmax\tundefined\tflagged\n");
    for r in reports {
        let (count, stats) = match &r.summary {
            Some(m) => (
                m.count,
                format!("{:.6}\t{:.6}\t{:.6}\t{:.6}", m.mean, m.std, m.min, m.max),
            ),
            None => (0, "-\t-\t-\t-".to_string()),
        };
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.pitch * 1e3,
            r.mass_kg,
            r.mechanisms,
            count,
            stats,
            r.undefined.len(),
            r.flagged.len()
        )
        .expect("writing to a String");
    }
    s
}

/// The per-pixel grid of one report, `-` where nothing was measured.
pub fn per_pixel_table(report: &CrosstalkReport) -> String {
    let mut s = String::new();
    for row in 0..report.rows {
        let cells: Vec<String> = (0..report.cols)
            .map(|col| match report.get(row, col) {
                Some(v) => format!("{v:.6}"),
                None => "-".into(),
            })
            .collect();
        s.push_str(&cells.join("\t"));
        s.push('\n');
    }
    s
}

pub fn reports_to_json(reports: &[CrosstalkReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn reports_from_json(text: &str) -> serde_json::Result<Vec<CrosstalkReport>> {
    serde_json::from_str(text)
}
