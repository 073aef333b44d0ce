use std::io::Write;

use ksi_core::session::{Cohort, Device};
use ksi_core::stats::{AnalysisReport, Metric};

fn cells() -> Vec<(Device, Cohort)> {
    Device::ALL.iter().flat_map(|d| Cohort::ALL.iter().map(move |c| (*d, *c))).collect()
}

fn fmt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.4}")).unwrap_or_default()
}

/// One row per metric, one column per device/cohort cell. Missing cells
/// are left empty.
pub fn write_table1<W: Write>(report: &AnalysisReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["metric".to_string()];
    header.extend(cells().iter().map(|(d, c)| format!("{d}_{c}")));
    w.write_record(&header)?;
    for metric in Metric::ALL {
        let mut row = vec![metric.as_str().to_string()];
        row.extend(cells().iter().map(|(d, c)| fmt(report.value(*d, *c, metric))));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format summaries with box-plot statistics.
pub fn write_cells<W: Write>(report: &AnalysisReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["device", "cohort", "metric", "scope", "n", "value", "min", "q1", "median", "q3", "max"])?;
    for cell in &report.cells {
        for m in &cell.metrics {
            let scope = match m.scope {
                ksi_core::stats::Scope::AllBlocks => "all_blocks",
                ksi_core::stats::Scope::LastBlock => "last_block",
            };
            let b = m.box_stats;
            w.write_record([
                cell.device.to_string(),
                cell.cohort.to_string(),
                m.metric.as_str().to_string(),
                scope.to_string(),
                m.n.to_string(),
                format!("{:.6}", m.value),
                format!("{:.6}", b.min),
                format!("{:.6}", b.q1),
                format!("{:.6}", b.median),
                format!("{:.6}", b.q3),
                format!("{:.6}", b.max),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width table for the terminal.
pub fn render_table(report: &AnalysisReport) -> String {
    let mut s = format!("{:<12}", "metric");
    for (d, c) in cells() {
        s.push_str(&format!("{:>17}", format!("{d}_{c}")));
    }
    s.push('\n');
    for metric in Metric::ALL {
        s.push_str(&format!("{:<12}", metric.as_str()));
        for (d, c) in cells() {
            let v = report.value(d, c, metric).map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            s.push_str(&format!("{v:>17}"));
        }
        s.push('\n');
    }
    s
}
