//! Deterministic CSV emission: header first, fixed 17-significant-digit
//! cells, optional trailing `#` comment footer.

use super::RunError;
use crate::correlators::{CorrelationScan, MetaValue};
use crate::eventsim::{DetectionEvent, Detector};
use std::path::Path;

pub(crate) fn format_cell(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders one variable column plus any number of result columns
/// sharing its grid.
pub(crate) fn render_table(
    variable: &str,
    grid: &[f64],
    columns: &[(&str, &[f64])],
    footer: Option<String>,
) -> String {
    let mut out = String::from(variable);
    for (name, values) in columns {
        assert_eq!(values.len(), grid.len(), "column length mismatch");
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, x) in grid.iter().enumerate() {
        out.push_str(&format_cell(*x));
        for (_, values) in columns {
            out.push(',');
            out.push_str(&format_cell(values[i]));
        }
        out.push('\n');
    }
    if let Some(footer) = footer {
        out.push_str(&footer);
        out.push('\n');
    }
    out
}

pub(crate) fn visibility_footer(scan: &CorrelationScan) -> Option<String> {
    match scan.meta.get("visibility") {
        Some(MetaValue::Float(v)) => Some(format!("# visibility = {}", format_cell(*v))),
        _ => None,
    }
}

/// Single-result CSV text for a scan. A visibility annotation, if the
/// scan carries one, lands in a trailing comment line.
pub fn render_scan_csv(scan: &CorrelationScan) -> String {
    let grid: Vec<f64> = scan.points.iter().map(|p| p.0).collect();
    let values: Vec<f64> = scan.points.iter().map(|p| p.1).collect();
    let footer = visibility_footer(scan);
    render_table(
        scan.variable_name(),
        &grid,
        &[(scan.result_name, &values)],
        footer,
    )
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    std::fs::write(path, text).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a scan as CSV; byte output depends only on the scan.
pub fn write_csv(scan: &CorrelationScan, path: &Path) -> Result<(), RunError> {
    write_text(path, &render_scan_csv(scan))
}

/// Writes a raw event stream: pulse_index, detector, time_s.
pub fn write_events_csv(events: &[DetectionEvent], path: &Path) -> Result<(), RunError> {
    let mut out = String::from("pulse_index,detector,time_s\n");
    for event in events {
        let detector = match event.detector {
            Detector::A => "A",
            Detector::B => "B",
        };
        out.push_str(&format!(
            "{},{},{}\n",
            event.pulse_index,
            detector,
            format_cell(event.time)
        ));
    }
    write_text(path, &out)
}
