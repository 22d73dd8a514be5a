//! Result tables, CSV files and SVG line plots.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(u64),
    Real(f64),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(n) => Some(*n as f64),
            Value::Real(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    fn parse(s: &str) -> Self {
        if let Ok(n) = s.parse::<u64>() {
            Value::Int(n)
        } else if let Ok(x) = s.parse::<f64>() {
            Value::Real(x)
        } else {
            Value::Text(s.to_string())
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Text(s) => f.write_str(s),
            Value::Int(n) => write!(f, "{n}"),
            // Shortest representation that parses back to the same value.
            Value::Real(x) => write!(f, "{x:e}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u64)
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Real(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Rows whose column `key` has text `value`.
    pub fn filter<'a>(&'a self, key: &str, value: &'a str) -> impl Iterator<Item = &'a Vec<Value>> + 'a {
        let c = self.column(key);
        self.rows.iter().filter(move |r| c.is_some_and(|c| matches!(&r[c], Value::Text(s) if s == value)))
    }

    pub fn to_csv_string(&self) -> Result<String, BenchError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| BenchError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r.iter().map(ToString::to_string)).map_err(|e| BenchError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| BenchError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| BenchError::Io(e.to_string()))
    }

    pub fn from_csv_str(text: &str) -> Result<Self, BenchError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> =
            r.headers().map_err(|e| BenchError::Io(e.to_string()))?.iter().map(str::to_string).collect();
        let mut t = Table::new(header);
        for rec in r.records() {
            let rec = rec.map_err(|e| BenchError::Io(e.to_string()))?;
            t.rows.push(rec.iter().map(Value::parse).collect());
        }
        Ok(t)
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), BenchError> {
    if table.is_empty() {
        return Err(BenchError::Io(format!("{}: refusing to write an empty table", path.display())));
    }
    let text = table.to_csv_string()?;
    write_file(path, &text)
}

pub fn read_csv(path: &Path) -> Result<Table, BenchError> {
    let text = fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    Table::from_csv_str(&text)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), BenchError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

/// Which columns to draw. One line per distinct value of `series`.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub y: String,
    pub series: Vec<String>,
    pub log_x: bool,
    pub log_y: bool,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn render_svg(table: &Table, spec: &PlotSpec) -> Result<String, BenchError> {
    if table.is_empty() {
        return Err(BenchError::Io("cannot plot an empty table".into()));
    }
    let col = |name: &str| table.column(name).ok_or_else(|| BenchError::Io(format!("no column `{name}`")));
    let (cx, cy) = (col(&spec.x)?, col(&spec.y)?);
    let cs = spec.series.iter().map(|s| col(s)).collect::<Result<Vec<_>, _>>()?;

    let tx = |v: f64| if spec.log_x { v.log10() } else { v };
    let ty = |v: f64| if spec.log_y { v.log10() } else { v };
    let mut lines: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &table.rows {
        let (Some(x), Some(y)) = (r[cx].as_f64(), r[cy].as_f64()) else { continue };
        let (x, y) = (tx(x), ty(y));
        if !x.is_finite() || !y.is_finite() {
            continue;
        }
        let key: Vec<String> = cs.iter().map(|&c| r[c].to_string()).collect();
        lines.entry(key.join(" ")).or_default().push((x, y));
    }
    let pts = lines.values().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(BenchError::Io("no finite data to plot".into()));
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let (l, r, t, b) = MARGIN;
    let px = |x: f64| l + (x - x0) / (x1 - x0) * (WIDTH - l - r);
    let py = |y: f64| HEIGHT - b - (y - y0) / (y1 - y0) * (HEIGHT - t - b);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&spec.title));
    let _ = writeln!(
        s,
        r##"<path d="M{l} {t} V{} H{}" fill="none" stroke="#333"/>"##,
        HEIGHT - b,
        WIDTH - r
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let lx = if spec.log_x { format!("1e{fx:.1}") } else { format!("{fx:.3}") };
        let ly = if spec.log_y { format!("1e{fy:.1}") } else { format!("{fy:.3e}") };
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{lx}</text>"#, px(fx), HEIGHT - b + 16.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{ly}</text>"#, l - 6.0, py(fy) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + WIDTH - r) / 2.0, HEIGHT - 8.0, escape(&spec.x));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        (t + HEIGHT - b) / 2.0,
        (t + HEIGHT - b) / 2.0,
        escape(&spec.y)
    );
    for (n, (name, pts)) in lines.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let d: Vec<String> = pts
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| format!("{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let ly = t + 14.0 + 16.0 * n as f64;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{ly:.1}" fill="{color}">{}</text>"#, l + 10.0, escape(name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg_plot(table: &Table, path: &Path, spec: &PlotSpec) -> Result<(), BenchError> {
    let svg = render_svg(table, spec).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    write_file(path, &svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_values() {
        let mut t = Table::new(["kernel", "n", "value"]);
        t.push(vec!["askey:beta=8".into(), 3usize.into(), std::f64::consts::PI.into()]);
        t.push(vec!["wendland13".into(), 129usize.into(), 1.234567890123456e-17.into()]);
        let back = Table::from_csv_str(&t.to_csv_string().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn empty_table_is_rejected() {
        let t = Table::new(["a"]);
        assert!(emit_csv(&t, Path::new("/nonexistent/x.csv")).is_err());
        let spec = PlotSpec { title: "t".into(), x: "a".into(), y: "a".into(), series: vec![], log_x: false, log_y: true };
        assert!(render_svg(&t, &spec).is_err());
    }
}
