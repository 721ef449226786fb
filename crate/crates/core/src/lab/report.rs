use super::scenario::Scenario;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Normalizations every report is expressed in.
pub const CONVENTIONS: [(&str, &str); 4] = [
    ("area_measure", "dA is Lebesgue area measure on D (total mass pi)"),
    ("arc_length", "arc lengths are normalized so that |T| = 1"),
    ("carleson_box", "S(I) = {z != 0 : 1 - |z| < |I|, z/|z| in I}"),
    ("box_of_point", "S(a) = S(I_a), I_a centred at a/|a| with |I_a| = 1 - |a|; S(0) = D"),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// 17 significant digits, locale-free.
pub fn format_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

/// `(x, y)` series with labels for the header.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub quantity: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Profile,
    Curve,
}

impl std::str::FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "profile" => Ok(PlotKind::Profile),
            "curve" => Ok(PlotKind::Curve),
            other => Err(Error::Unknown {
                kind: "plot kind",
                name: other.into(),
            }),
        }
    }
}

/// Tabular result of a pipeline run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Pipeline-specific aggregate results.
    pub summary: serde_json::Value,
    pub profile: Option<Series>,
    pub curve: Option<Series>,
}

/// Paths written by [`write_report`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plots: Vec<PathBuf>,
}

impl Report {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn metadata(&self) -> serde_json::Value {
        let sc = &self.scenario;
        let conventions: serde_json::Map<String, serde_json::Value> = CONVENTIONS.iter().map(|(k, v)| (k.to_string(), (*v).into())).collect();
        serde_json::json!({
            "name": sc.name,
            "pipeline": sc.pipeline.as_str(),
            "version": env!("CARGO_PKG_VERSION"),
            "columns": self.columns,
            "tolerance": sc.tol,
            "grids": {
                "radii": sc.radii(),
                "angles": sc.angles,
                "t_grid": sc.t_grid,
            },
            "scenario": sc,
            "conventions": conventions,
            "summary": self.summary,
        })
    }
}

/// Writes `<stem>.csv`, `<stem>.json` and any plot-data files into `dir`.
pub fn write_report(report: &Report, dir: &Path) -> Result<ReportFiles> {
    std::fs::create_dir_all(dir)?;
    let stem = report.scenario.output.stem.clone().unwrap_or_else(|| report.scenario.name.clone());
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, report.to_csv()?)?;
    let json = dir.join(format!("{stem}.json"));
    std::fs::write(&json, serde_json::to_string_pretty(&report.metadata())? + "\n")?;
    let mut plots = Vec::new();
    for (kind, present, tag) in [
        (PlotKind::Profile, report.profile.is_some(), "profile"),
        (PlotKind::Curve, report.curve.is_some(), "curve"),
    ] {
        if present {
            let path = dir.join(format!("{stem}.{tag}.dat"));
            emit_plotdata(report, kind, &path)?;
            plots.push(path);
        }
    }
    Ok(ReportFiles { csv, json, plots })
}

/// Two-column `x y` text with `#` header lines; an absent series gives a
/// header-only file.
pub fn emit_plotdata(report: &Report, kind: PlotKind, path: &Path) -> Result<()> {
    let (series, default_x, default_y, units) = match kind {
        PlotKind::Profile => (report.profile.as_ref(), "r", "sup", "r is a radius in the unit disk; values are dimensionless"),
        PlotKind::Curve => (report.curve.as_ref(), "t", "norm", "t is semigroup time; values are dimensionless"),
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let empty = Series::default();
    let s = series.unwrap_or(&empty);
    let quantity = if s.quantity.is_empty() {
        report.scenario.pipeline.as_str()
    } else {
        &s.quantity
    };
    let x = if s.x_label.is_empty() { default_x } else { &s.x_label };
    let y = if s.y_label.is_empty() { default_y } else { &s.y_label };
    writeln!(out, "# scenario: {}", report.scenario.name)?;
    writeln!(out, "# quantity: {quantity}")?;
    writeln!(out, "# columns: {x} {y}")?;
    writeln!(out, "# units: {units}")?;
    let mut pts = s.points.clone();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (a, b) in pts {
        writeln!(out, "{} {}", format_num(a), format_num(b))?;
    }
    out.flush()?;
    Ok(())
}
