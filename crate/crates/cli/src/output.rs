//! CSV tables and the SVG plots drawn from them.

use std::fmt::Write as _;
use std::path::Path;

use symlab_core::{Error, Result};

pub fn io_err(msg: impl Into<String>) -> Error {
    Error::Io(std::io::Error::other(msg.into()))
}

/// A CSV table held in memory until everything has been computed.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Shortest round-trip representation; the same on every locale.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().delimiter(b',').terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
        let io = |e: csv::Error| io_err(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| io_err(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| io_err(e.to_string()))
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let io = |e: csv::Error| Error::Parse { pos: 0, msg: e.to_string() };
        let header = r.headers().map_err(io)?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(io)?.iter().map(String::from).collect());
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].parse().unwrap_or(f64::NAN)).collect())
    }
}

#[derive(Clone, Debug)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    /// one polyline per column
    pub y: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f4e99", "#b2361d", "#2f7d32", "#6a3d9a"];

/// Line plot of CSV columns. Points that cannot be drawn (non-finite, or
/// nonpositive on a log axis) are left out.
pub fn svg_from_csv(csv_text: &str, spec: &PlotSpec) -> Result<String> {
    let t = Table::from_csv(csv_text)?;
    let xs = t.column(&spec.x).ok_or_else(|| Error::Invalid(format!("no column {}", spec.x)))?;
    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    let mut series = Vec::new();
    for name in &spec.y {
        let ys = t.column(name).ok_or_else(|| Error::Invalid(format!("no column {name}")))?;
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ys)
            .map(|(&x, &y)| (tx(x), ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        series.push((name.clone(), pts));
    }
    let all: Vec<&(f64, f64)> = series.iter().flat_map(|(_, p)| p).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if all.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let label = |v: f64, log: bool| if log { format!("1e{v:.2}") } else { format!("{v:.4}") };

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, escape(&spec.title));
    let _ = writeln!(
        s,
        r#"<path d="M{m} {m} V{b} H{r}" fill="none" stroke="black"/>"#,
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for (v, anchor, x, y) in [
        (x0, "start", MARGIN, H - MARGIN + 18.0),
        (x1, "end", W - MARGIN, H - MARGIN + 18.0),
    ] {
        let _ = writeln!(s, r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="{anchor}">{}</text>"#, label(v, spec.log_x));
    }
    for (v, y) in [(y0, H - MARGIN), (y1, MARGIN + 4.0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#, MARGIN - 4.0, label(v, spec.log_y));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(&spec.x));
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !pts.is_empty() {
            let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
            for &(x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            W - MARGIN + 4.0 - 120.0,
            MARGIN + 16.0 * i as f64,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::write(dir.join(name), content).map_err(|e| io_err(format!("{}: {e}", dir.join(name).display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mut t = Table::new(&["eta", "sigma"]);
        t.push_nums(&[16.0, 0.25]);
        t.push_nums(&[1e-300, f64::NAN]);
        let text = t.to_csv().unwrap();
        assert_eq!(text.lines().next(), Some("eta,sigma"));
        assert_eq!(Table::from_csv(&text).unwrap(), t);
        assert_eq!(t.column("eta").unwrap(), vec![16.0, 1e-300]);
    }

    #[test]
    fn numbers_are_locale_free() {
        assert_eq!(num(0.5), "0.5");
        assert_eq!(num(-2.0), "-2");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn svg_skips_undrawable_points() {
        let text = "x,y\n1,1\n10,0\n100,100\n";
        let spec = PlotSpec { title: "t".into(), x: "x".into(), y: vec!["y".into()], log_x: true, log_y: true };
        let svg = svg_from_csv(text, &spec).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg_from_csv(text, &PlotSpec { x: "z".into(), ..spec }).is_err());
    }
}
