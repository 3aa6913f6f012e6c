//! Run reports and their CSV, SVG and text renderings.
//!
//! Every rendering is a pure function of the report, so identical runs give
//! byte-identical files. Reports carry no timings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use fatou_lab::{Error, Result};

/// One measured quantity at one refinement level and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub level: u32,
    pub seed: u64,
    pub quantity: String,
    pub value: f64,
}

/// `max / min` of a quantity across levels and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub quantity: String,
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

impl Band {
    pub fn of(quantity: impl Into<String>, values: impl IntoIterator<Item = f64>) -> Self {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        Self {
            quantity: quantity.into(),
            min,
            max,
            ratio: max / min,
        }
    }
}

/// Outcome of one acceptance check.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    /// Number of the acceptance criterion this check belongs to.
    pub id: u32,
    /// Name of the check within the criterion.
    pub part: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(id: u32, part: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            id,
            part: part.into(),
            passed,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} criterion {} [{}]: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.part,
            self.detail
        )
    }
}

/// Points `(x, y)` on log₂ axes with a fitted slope, drawn as one SVG panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub label: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

impl Fit {
    /// Least-squares line through `points`.
    pub fn least_squares(
        label: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        points: Vec<(f64, f64)>,
    ) -> Self {
        let (slope, intercept) = line_fit(&points);
        Self {
            label: label.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
            slope,
            intercept,
        }
    }
}

pub fn line_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    if points.len() < 2 {
        return (0.0, points.first().map_or(0.0, |p| p.1));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub version: String,
}

/// Extra data file written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub experiment: String,
    pub rows: Vec<Row>,
    pub bands: Vec<Band>,
    pub criteria: Vec<CriterionResult>,
    pub fits: Vec<Fit>,
    pub notes: Vec<String>,
    pub artifacts: Vec<Artifact>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn new(experiment: impl Into<String>, provenance: Provenance) -> Self {
        Self {
            experiment: experiment.into(),
            rows: Vec::new(),
            bands: Vec::new(),
            criteria: Vec::new(),
            fits: Vec::new(),
            notes: Vec::new(),
            artifacts: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, level: u32, seed: u64, quantity: impl Into<String>, value: f64) {
        self.rows.push(Row {
            level,
            seed,
            quantity: quantity.into(),
            value,
        });
    }

    pub fn values<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = f64> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity).map(|r| r.value)
    }

    /// Records and returns the band of `quantity`.
    pub fn band(&mut self, quantity: &str) -> Band {
        let b = Band::of(quantity, self.values(quantity).collect::<Vec<_>>());
        self.bands.push(b.clone());
        b
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Csv,
    Svg,
    Text,
}

pub fn render_csv(r: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["level", "seed", "quantity", "value"]).expect("in-memory write");
    for row in &r.rows {
        w.write_record([
            row.level.to_string(),
            row.seed.to_string(),
            row.quantity.clone(),
            row.value.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

pub fn render_bands_csv(r: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "min", "max", "ratio"]).expect("in-memory write");
    for b in &r.bands {
        w.write_record([b.quantity.clone(), b.min.to_string(), b.max.to_string(), b.ratio.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

pub fn render_criteria_csv(r: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["criterion", "part", "passed", "detail"]).expect("in-memory write");
    for c in &r.criteria {
        w.write_record([c.id.to_string(), c.part.clone(), c.passed.to_string(), c.detail.clone()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 records")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One panel per fit, stacked vertically.
pub fn render_svg(r: &RunReport) -> String {
    const W: f64 = 420.0;
    const H: f64 = 260.0;
    const PAD: f64 = 48.0;
    let height = (H * r.fits.len().max(1) as f64).round();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(&r.experiment));
    if r.fits.is_empty() {
        let _ = writeln!(s, r#"<text x="{PAD}" y="{PAD}">no fitted data</text>"#);
    }
    for (k, fit) in r.fits.iter().enumerate() {
        let y0 = k as f64 * H;
        let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &fit.points {
            xl = xl.min(x);
            xh = xh.max(x);
            yl = yl.min(y);
            yh = yh.max(y);
        }
        if !(xh > xl) {
            xl -= 0.5;
            xh += 0.5;
        }
        if !(yh > yl) {
            yl -= 0.5;
            yh += 0.5;
        }
        let px = |x: f64| PAD + (x - xl) / (xh - xl) * (W - 2.0 * PAD);
        let py = |y: f64| y0 + H - PAD - (y - yl) / (yh - yl) * (H - 2.0 * PAD);
        let _ = writeln!(s, r#"<g>"#);
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#888"/>"##,
            PAD,
            y0 + PAD,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, PAD, y0 + 20.0, escape(&fit.label));
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">slope = {:.4}</text>"#,
            W - PAD - 110.0,
            y0 + 20.0,
            fit.slope
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{} [{:.3}, {:.3}]</text>"#,
            PAD,
            y0 + H - 14.0,
            escape(&fit.x_label),
            xl,
            xh
        );
        let _ = writeln!(
            s,
            r#"<text x="8" y="{:.2}">{} [{:.3}, {:.3}]</text>"#,
            y0 + PAD - 6.0,
            escape(&fit.y_label),
            yl,
            yh
        );
        let (a, b) = (fit.intercept + fit.slope * xl, fit.intercept + fit.slope * xh);
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c33"/>"##,
            px(xl),
            py(a),
            px(xh),
            py(b)
        );
        for &(x, y) in &fit.points {
            let _ = writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#236"/>"##, px(x), py(y));
        }
        let _ = writeln!(s, r#"</g>"#);
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_text(r: &RunReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", r.experiment);
    let _ = writeln!(s, "toolkit version: {}", r.provenance.version);
    let _ = writeln!(s, "config hash: {}", r.provenance.config_hash);
    let _ = writeln!(s, "seeds: {:?}", r.provenance.seeds);
    let _ = writeln!(s, "rows: {}", r.rows.len());
    for b in &r.bands {
        let _ = writeln!(
            s,
            "band {}: min {:.6} max {:.6} ratio {:.4}",
            b.quantity, b.min, b.max, b.ratio
        );
    }
    for f in &r.fits {
        let _ = writeln!(s, "fit {}: slope {:.4}", f.label, f.slope);
    }
    for c in &r.criteria {
        let _ = writeln!(s, "{}", c.line());
    }
    for n in &r.notes {
        let _ = writeln!(s, "note: {n}");
    }
    let _ = writeln!(s, "overall: {}", if r.passed() { "PASS" } else { "FAIL" });
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes one rendering into `dir` and returns its path.
pub fn emit_report(r: &RunReport, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    let (name, body) = match format {
        ReportFormat::Csv => ("report.csv", render_csv(r)),
        ReportFormat::Svg => ("plots.svg", render_svg(r)),
        ReportFormat::Text => ("summary.txt", render_text(r)),
    };
    let path = dir.join(name);
    write_file(&path, &body)?;
    Ok(path)
}

/// Writes every rendering plus the band, criterion and artifact files.
pub fn emit_all(r: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for f in [ReportFormat::Csv, ReportFormat::Svg, ReportFormat::Text] {
        out.push(emit_report(r, f, dir)?);
    }
    for (name, body) in [("bands.csv", render_bands_csv(r)), ("criteria.csv", render_criteria_csv(r))] {
        let p = dir.join(name);
        write_file(&p, &body)?;
        out.push(p);
    }
    for a in &r.artifacts {
        let p = dir.join(&a.name);
        write_file(&p, &a.contents)?;
        out.push(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            config_hash: "abc".into(),
            seeds: vec![1, 2],
            version: "0.1.0".into(),
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = RunReport::new("x", prov());
        assert_eq!(render_csv(&r), "level,seed,quantity,value\n");
        assert!(render_svg(&r).contains("no fitted data"));
    }

    #[test]
    fn bands_and_rows() {
        let mut r = RunReport::new("x", prov());
        r.push(10, 0, "ratio", 1.0);
        r.push(12, 0, "ratio", 2.5);
        r.push(12, 0, "other", 9.0);
        let b = r.band("ratio");
        assert_eq!((b.min, b.max, b.ratio), (1.0, 2.5, 2.5));
        assert!(render_csv(&r).contains("12,0,ratio,2.5\n"));
        r.criteria.push(CriterionResult::new(5, "band", true, "ok"));
        assert!(r.passed());
        assert!(render_text(&r).contains("PASS criterion 5 [band]: ok"));
    }

    #[test]
    fn svg_annotates_fit_slope() {
        let mut r = RunReport::new("boxdim", prov());
        let fit = Fit::least_squares("cantor", "m", "log2 N", vec![(4.0, 2.5), (5.0, 3.13), (6.0, 3.76)]);
        assert!((fit.slope - 0.63).abs() < 1e-12);
        let slope = fit.slope;
        r.fits.push(fit);
        assert!(render_svg(&r).contains(&format!("slope = {slope:.4}")));
        assert_eq!(render_svg(&r), render_svg(&r.clone()));
    }

    #[test]
    fn emission_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = RunReport::new("x", prov());
        r.artifacts.push(Artifact {
            name: "data.csv".into(),
            contents: "a\n".into(),
        });
        let files = emit_all(&r, dir.path()).unwrap();
        assert_eq!(files.len(), 6);
        assert_eq!(fs::read_to_string(dir.path().join("data.csv")).unwrap(), "a\n");
    }
}
