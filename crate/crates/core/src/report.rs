//! MAE/SDRF comparison tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analytic::ModelKind;
use crate::fit::FitResult;

/// One table row. MAE is dimensionless and SDRF is in Hz; rendering scales
/// them to ×10⁻³ and kHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model: ModelKind,
    pub analytic_mae: Option<f64>,
    pub lorentzian_mae: Option<f64>,
    pub analytic_sdrf_hz: Option<f64>,
    pub lorentzian_sdrf_hz: Option<f64>,
}

const MISSING: &str = "—";

const HEADER: [&str; 5] = ["Model", "Analytic", "Lorentzian", "Analytic", "Lorentzian"];
const SUBHEADER: [&str; 5] = ["", "MAE", "MAE", "SDRF", "SDRF"];
const UNITS: [&str; 5] = ["", "(×10⁻³)", "(×10⁻³)", "(kHz)", "(kHz)"];

pub const CSV_HEADER: [&str; 5] = [
    "model",
    "analytic_mae_e-3",
    "lorentzian_mae_e-3",
    "analytic_sdrf_khz",
    "lorentzian_sdrf_khz",
];

pub fn model_label(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Rabi => "Rabi",
        ModelKind::RosenZener => "Rosen-Zener",
        ModelKind::DemkovBessel => "Demkov Bessel",
        ModelKind::DemkovRzc => "Demkov RZC",
        ModelKind::GaussianDdp => "Gauss. DDP",
        ModelKind::GaussianRzc => "Gauss. RZC",
        ModelKind::Sech2Rzc => "Sech²",
        ModelKind::Lorentzian => "Lorentzian",
    }
}

fn order(kind: ModelKind) -> usize {
    ModelKind::ALL.iter().position(|k| *k == kind).unwrap_or(usize::MAX)
}

/// Builds rows from analytic and Lorentzian results. A Lorentzian result
/// fills the Lorentzian columns of every analytic row fitted to the same
/// dataset; unmatched Lorentzian results are dropped.
pub fn rows_from_results(results: &[FitResult]) -> Vec<TableRow> {
    let lorentzians: Vec<&FitResult> = results.iter().filter(|r| r.kind() == ModelKind::Lorentzian).collect();
    let mut rows: Vec<TableRow> = results
        .iter()
        .filter(|r| r.kind() != ModelKind::Lorentzian)
        .map(|r| {
            let baseline = lorentzians.iter().find(|l| l.dataset_digest == r.dataset_digest);
            TableRow {
                model: r.kind(),
                analytic_mae: Some(r.mae),
                lorentzian_mae: baseline.map(|l| l.mae),
                analytic_sdrf_hz: Some(r.sdrf_hz),
                lorentzian_sdrf_hz: baseline.map(|l| l.sdrf_hz),
            }
        })
        .collect();
    sort_rows(&mut rows);
    rows
}

/// Stable sort into the canonical model order.
pub fn sort_rows(rows: &mut [TableRow]) {
    rows.sort_by_key(|r| order(r.model));
}

fn cells(row: &TableRow) -> [String; 5] {
    let mae = |v: Option<f64>| v.map_or(MISSING.to_string(), |v| format!("{:.2}", v * 1e3));
    let sdrf = |v: Option<f64>| v.map_or(MISSING.to_string(), |v| format!("{:.2}", v * 1e-3));
    [
        model_label(row.model).to_string(),
        mae(row.analytic_mae),
        mae(row.lorentzian_mae),
        sdrf(row.analytic_sdrf_hz),
        sdrf(row.lorentzian_sdrf_hz),
    ]
}

/// Fixed-width text table; the model column is left aligned, numbers right.
pub fn render_text(rows: &[TableRow]) -> String {
    let body: Vec<[String; 5]> = rows.iter().map(cells).collect();
    let mut widths = [0usize; 5];
    for line in [HEADER, SUBHEADER, UNITS].iter() {
        for (w, c) in widths.iter_mut().zip(line) {
            *w = (*w).max(c.chars().count());
        }
    }
    for line in &body {
        for (w, c) in widths.iter_mut().zip(line) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut emit = |cols: [&str; 5]| {
        let mut line = String::new();
        for (i, c) in cols.iter().enumerate() {
            let pad = widths[i] - c.chars().count();
            if i == 0 {
                line.push_str(c);
                line.push_str(&" ".repeat(pad));
            } else {
                line.push_str("  ");
                line.push_str(&" ".repeat(pad));
                line.push_str(c);
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
    };
    emit(HEADER);
    emit(SUBHEADER);
    emit(UNITS);
    for line in &body {
        emit([&line[0], &line[1], &line[2], &line[3], &line[4]]);
    }
    out
}

/// CSV rendering; missing values are left empty.
pub fn render_csv(rows: &[TableRow]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for row in rows {
        let num = |v: Option<f64>, scale: f64| v.map_or(String::new(), |v| format!("{:.2}", v * scale));
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            model_label(row.model),
            num(row.analytic_mae, 1e3),
            num(row.lorentzian_mae, 1e3),
            num(row.analytic_sdrf_hz, 1e-3),
            num(row.lorentzian_sdrf_hz, 1e-3)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(model: ModelKind, am: f64, lm: f64, asd: f64, lsd: f64) -> TableRow {
        TableRow {
            model,
            analytic_mae: Some(am * 1e-3),
            lorentzian_mae: Some(lm * 1e-3),
            analytic_sdrf_hz: Some(asd * 1e3),
            lorentzian_sdrf_hz: Some(lsd * 1e3),
        }
    }

    // measured hardware values, used for formatting only
    fn reference_rows() -> Vec<TableRow> {
        vec![
            row(ModelKind::Sech2Rzc, 4.47, 27.55, 13.12, 67.72),
            row(ModelKind::Rabi, 9.41, 36.21, 79.8, 315.2),
            row(ModelKind::GaussianRzc, 4.21, 33.43, 13.54, 87.92),
            row(ModelKind::RosenZener, 4.15, 20.68, 11.39, 42.96),
            row(ModelKind::DemkovRzc, 9.59, 13.40, 24.71, 31.70),
            row(ModelKind::DemkovBessel, 4.72, 13.40, 14.70, 31.70),
            row(ModelKind::GaussianDdp, 12.27, 33.43, 35.68, 87.92),
        ]
    }

    const SNAPSHOT: &str = "\
Model          Analytic  Lorentzian  Analytic  Lorentzian
                    MAE         MAE      SDRF        SDRF
                (×10⁻³)     (×10⁻³)     (kHz)       (kHz)
Rabi               9.41       36.21     79.80      315.20
Rosen-Zener        4.15       20.68     11.39       42.96
Demkov Bessel      4.72       13.40     14.70       31.70
Demkov RZC         9.59       13.40     24.71       31.70
Gauss. DDP        12.27       33.43     35.68       87.92
Gauss. RZC         4.21       33.43     13.54       87.92
Sech²              4.47       27.55     13.12       67.72
";

    #[test]
    fn reference_table_renders_byte_stably() {
        let mut rows = reference_rows();
        sort_rows(&mut rows);
        let text = render_text(&rows);
        assert_eq!(text, SNAPSHOT);
        assert_eq!(render_text(&rows), text);
    }

    #[test]
    fn reference_table_csv() {
        let mut rows = reference_rows();
        sort_rows(&mut rows);
        let csv = render_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "Rabi,9.41,36.21,79.80,315.20");
        assert_eq!(csv.lines().count(), 8);
    }

    #[test]
    fn missing_sdrf_renders_as_dash() {
        let rows = vec![TableRow {
            model: ModelKind::RosenZener,
            analytic_mae: Some(4.15e-3),
            lorentzian_mae: None,
            analytic_sdrf_hz: None,
            lorentzian_sdrf_hz: None,
        }];
        let text = render_text(&rows);
        assert_eq!(text.lines().count(), 4);
        let last = text.lines().last().unwrap();
        assert!(last.starts_with("Rosen-Zener"));
        assert_eq!(last.matches('—').count(), 3);
        assert!(render_csv(&rows).ends_with("Rosen-Zener,4.15,,,\n"));
    }
}
