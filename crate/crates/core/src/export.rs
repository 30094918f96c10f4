//! CSV and SVG output for grid statistics and single-run reports.

use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::categorical::{csv_err, format_f64};
use crate::error::{Error, Result};
use crate::harness::{CellStats, GridStats, Metric, MetricCurveStats, ReliabilityReport, ReliabilityRow, ReportMeta};

pub const CURVES_HEADER: [&str; 6] = ["n_train", "gamma", "metric", "acceptance_rate", "mean_accuracy", "std_accuracy"];

pub const REPORT_HEADER: [&str; 12] = [
    "instance_index",
    "true_class",
    "predicted_class",
    "correct",
    "u_m",
    "u_H",
    "u_a",
    "u_t",
    "u_e_literal",
    "u_e_standard",
    "eps_glob",
    "eps_loc",
];

pub const CURVES_FILE: &str = "curves.csv";
pub const MEANS_SVG_FILE: &str = "means.svg";
pub const STDS_SVG_FILE: &str = "stds.svg";

/// Writes one row per cell, metric and acceptance rate.
pub fn write_curves_csv<W: Write>(stats: &GridStats, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CURVES_HEADER).map_err(csv_err)?;
    for cell in &stats.cells {
        for m in &cell.curves {
            let n = m.mean.len();
            for (k, (mean, std)) in m.mean.iter().zip(&m.std).enumerate() {
                let rate = (k + 1) as f64 / n as f64;
                w.write_record([
                    cell.n_train.to_string(),
                    cell.gamma.to_string(),
                    m.metric.name().to_string(),
                    format_f64(rate),
                    format_f64(*mean),
                    format_f64(*std),
                ])
                .map_err(csv_err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = record.get(idx).ok_or_else(|| Error::parse(line, format!("missing column {}", idx + 1)))?;
    raw.parse()
        .map_err(|e| Error::parse(line, format!("column {}: {raw:?}: {e}", idx + 1)))
}

fn parse_optional<T: std::str::FromStr>(record: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match record.get(idx) {
        Some("") => Ok(None),
        _ => parse_field(record, idx, line).map(Some),
    }
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(1, format!("expected header {}", expected.join(","))));
    }
    Ok(())
}

/// Parses a curves CSV back into grid statistics.
pub fn read_curves_csv<R: Read>(reader: R) -> Result<GridStats> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(&mut r, &CURVES_HEADER)?;
    let mut cells: Vec<CellStats> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = record_line(&rec);
        let n_train: usize = parse_field(&rec, 0, line)?;
        let gamma: f64 = parse_field(&rec, 1, line)?;
        let metric: Metric = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|e: Error| Error::parse(line, e.to_string()))?;
        let mean: f64 = parse_field(&rec, 4, line)?;
        let std: f64 = parse_field(&rec, 5, line)?;
        let same_cell = cells
            .last()
            .is_some_and(|c| c.n_train == n_train && c.gamma.to_bits() == gamma.to_bits());
        if !same_cell {
            cells.push(CellStats {
                n_train,
                gamma,
                curves: Vec::new(),
            });
        }
        let cell = cells.last_mut().expect("cell pushed above");
        if cell.curves.last().map(|c| c.metric) != Some(metric) {
            cell.curves.push(MetricCurveStats {
                metric,
                mean: Vec::new(),
                std: Vec::new(),
            });
        }
        let curve = cell.curves.last_mut().expect("curve pushed above");
        curve.mean.push(mean);
        curve.std.push(std);
    }
    let n_test = cells
        .first()
        .and_then(|c| c.curves.first())
        .map_or(0, |m| m.mean.len());
    Ok(GridStats { n_test, cells })
}

fn opt(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

pub fn write_report_csv<W: Write>(rows: &[ReliabilityRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.instance_index.to_string(),
            r.true_class.map(|c| c.to_string()).unwrap_or_default(),
            r.predicted_class.to_string(),
            r.correct.map(|c| u8::from(c).to_string()).unwrap_or_default(),
            opt(r.u_m),
            opt(r.u_h),
            opt(r.u_a),
            opt(r.u_t),
            opt(r.u_e_literal),
            opt(r.u_e_standard),
            format_f64(r.eps_glob),
            format_f64(r.eps_loc),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(())
}

pub fn read_report_csv<R: Read>(reader: R) -> Result<Vec<ReliabilityRow>> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(&mut r, &REPORT_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = record_line(&rec);
        let correct = match rec.get(3) {
            Some("") => None,
            Some("1") => Some(true),
            Some("0") => Some(false),
            other => return Err(Error::parse(line, format!("correct flag {other:?} is not 0, 1 or blank"))),
        };
        rows.push(ReliabilityRow {
            instance_index: parse_field(&rec, 0, line)?,
            true_class: parse_optional(&rec, 1, line)?,
            predicted_class: parse_field(&rec, 2, line)?,
            correct,
            u_m: parse_optional(&rec, 4, line)?,
            u_h: parse_optional(&rec, 5, line)?,
            u_a: parse_optional(&rec, 6, line)?,
            u_t: parse_optional(&rec, 7, line)?,
            u_e_literal: parse_optional(&rec, 8, line)?,
            u_e_standard: parse_optional(&rec, 9, line)?,
            eps_glob: parse_field(&rec, 10, line)?,
            eps_loc: parse_field(&rec, 11, line)?,
        });
    }
    Ok(rows)
}

fn create_file(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `<stem>.csv` and `<stem>.meta.json` into `dir`.
pub fn export_report(report: &ReliabilityReport, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let meta_path = dir.join(format!("{stem}.meta.json"));
    write_report_csv(&report.rows, create_file(&csv_path)?).map_err(|e| with_path(e, &csv_path))?;
    let meta = serde_json::to_string_pretty(&report.meta).expect("report metadata serializes");
    write_string(&meta_path, &(meta + "\n"))?;
    Ok(vec![csv_path, meta_path])
}

pub fn read_report_meta(path: &Path) -> Result<ReportMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e.to_string()))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { message, .. } => Error::io(path, std::io::Error::other(message)),
        other => other,
    }
}

/// Writes the curves CSV and the mean and standard-deviation SVG figures.
pub fn export_grid(stats: &GridStats, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let csv_path = dir.join(CURVES_FILE);
    write_curves_csv(stats, create_file(&csv_path)?).map_err(|e| with_path(e, &csv_path))?;
    let means = dir.join(MEANS_SVG_FILE);
    write_string(&means, &render_svg(stats, Panel::Mean))?;
    let stds = dir.join(STDS_SVG_FILE);
    write_string(&stds, &render_svg(stats, Panel::Std))?;
    Ok(vec![csv_path, means, stds])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Panel {
    Mean,
    Std,
}

const PANEL_W: f64 = 260.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 50.0;
const MARGIN_T: f64 = 40.0;
const GAP: f64 = 30.0;
const LEGEND_H: f64 = 40.0;

fn metric_color(m: Metric) -> &'static str {
    match m {
        Metric::MaxProb => "#1f77b4",
        Metric::Entropy => "#ff7f0e",
        Metric::Aleatoric => "#2ca02c",
        Metric::Total => "#9467bd",
        Metric::Epistemic => "#8c564b",
        Metric::GlobalRobustness => "#d62728",
        Metric::LocalRobustness => "#17becf",
    }
}

/// Prefix indices sampled at 1% acceptance-rate steps.
fn plot_indices(n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (1..=100).map(|j| (j * n).div_ceil(100).max(1) - 1).collect();
    idx.dedup();
    idx
}

fn y_range(stats: &GridStats, panel: Panel) -> (f64, f64) {
    match panel {
        Panel::Mean => (0.4, 1.0),
        Panel::Std => {
            let max = stats
                .cells
                .iter()
                .flat_map(|c| c.curves.iter().flat_map(|m| m.std.iter().copied()))
                .fold(0.0f64, f64::max);
            (0.0, ((max / 0.05).ceil() * 0.05).max(0.05))
        }
    }
}

/// One panel per cell: rows by decreasing training size, columns by
/// increasing shift, one polyline per metric.
pub fn render_svg(stats: &GridStats, panel: Panel) -> String {
    let mut rows: Vec<usize> = stats.cells.iter().map(|c| c.n_train).collect();
    rows.sort_unstable_by(|a, b| b.cmp(a));
    rows.dedup();
    let mut cols: Vec<f64> = stats.cells.iter().map(|c| c.gamma).collect();
    cols.sort_by(f64::total_cmp);
    cols.dedup();
    let (y0, y1) = y_range(stats, panel);
    let width = MARGIN_L + cols.len().max(1) as f64 * (PANEL_W + GAP) + 20.0;
    let height = MARGIN_T + rows.len().max(1) as f64 * (PANEL_H + GAP) + LEGEND_H;
    let label = match panel {
        Panel::Mean => "mean accuracy",
        Panel::Std => "std of accuracy",
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{label} vs acceptance rate</text>"#,
        width / 2.0
    );
    for (ri, &n_train) in rows.iter().enumerate() {
        for (ci, &gamma) in cols.iter().enumerate() {
            let x = MARGIN_L + ci as f64 * (PANEL_W + GAP);
            let y = MARGIN_T + ri as f64 * (PANEL_H + GAP);
            let _ = writeln!(s, r#"<g transform="translate({x:.1},{y:.1})">"#);
            let _ = writeln!(
                s,
                r##"<rect x="0" y="0" width="{PANEL_W:.0}" height="{PANEL_H:.0}" fill="none" stroke="#444"/>"##
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="-4" text-anchor="middle">N_train = {n_train}, gamma = {gamma}</text>"#,
                PANEL_W / 2.0
            );
            for t in 0..=4 {
                let v = y0 + (y1 - y0) * t as f64 / 4.0;
                let py = PANEL_H * (1.0 - t as f64 / 4.0);
                let _ = writeln!(
                    s,
                    r#"<text x="-4" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
                    py + 4.0
                );
                let px = PANEL_W * t as f64 / 4.0;
                let _ = writeln!(
                    s,
                    r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
                    PANEL_H + 13.0,
                    t as f64 / 4.0
                );
            }
            if let Some(cell) = stats.cells.iter().find(|c| c.n_train == n_train && c.gamma == gamma) {
                for m in &cell.curves {
                    let values = match panel {
                        Panel::Mean => &m.mean,
                        Panel::Std => &m.std,
                    };
                    let n = values.len();
                    if n == 0 {
                        continue;
                    }
                    let mut pts = String::new();
                    for k in plot_indices(n) {
                        let r = (k + 1) as f64 / n as f64;
                        let v = values[k].clamp(y0, y1);
                        let px = r * PANEL_W;
                        let py = (1.0 - (v - y0) / (y1 - y0)) * PANEL_H;
                        let _ = write!(pts, "{px:.2},{py:.2} ");
                    }
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{}" stroke-width="1.3" points="{}"/>"#,
                        metric_color(m.metric),
                        pts.trim_end()
                    );
                }
            }
            let _ = writeln!(s, "</g>");
        }
    }
    let ly = height - LEGEND_H / 2.0;
    for (i, m) in Metric::ALL.iter().enumerate() {
        let lx = MARGIN_L + i as f64 * 90.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/>"#,
            lx + 20.0,
            metric_color(*m)
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 24.0, ly + 4.0, m.name());
    }
    s.push_str("</svg>\n");
    s
}
