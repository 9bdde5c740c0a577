//! Output documents: pretty JSON, or CSV with a `# config:` header line.

use serde_json::Value;

/// C `%.12g`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= P {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_g(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
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

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as i64)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n as i64)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Trailing `# key: value` lines.
    pub notes: Vec<(String, String)>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }
}

/// What a command produced.
pub struct Report {
    pub json: Value,
    pub table: Table,
    /// One line for stderr.
    pub summary: String,
    /// Verification failure (exit code 1) with its reason.
    pub failure: Option<String>,
}

pub fn render_json(config: &Value, result: &Value) -> String {
    let doc = serde_json::json!({ "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn render_csv(config: &Value, table: &Table) -> String {
    let mut s = format!("# config: {}\n", serde_json::to_string(config).expect("JSON values serialize"));
    s.push_str(&table.header.join(","));
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    for (k, v) in &table.notes {
        s.push_str(&format!("# {k}: {}\n", v.replace('\n', " ")));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        assert_eq!(fmt_g(0.625_698_0), "0.625698");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(100.0), "100");
        assert_eq!(fmt_g(1e12), "1e+12");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(-2.5e300), "-2.5e+300");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(2.0 / 3.0 * 1e-7), "6.66666666667e-08");
        assert_eq!(fmt_g(999999999999.9), "1e+12");
        assert_eq!(fmt_g(f64::NAN), "nan");
    }

    #[test]
    fn csv_quotes_text() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::from("x,y"), Cell::from(1.5)]);
        t.note("verdict", "same-gauge");
        let out = render_csv(&serde_json::json!({"seed": 1}), &t);
        assert_eq!(out, "# config: {\"seed\":1}\na,b\n\"x,y\",1.5\n# verdict: same-gauge\n");
    }
}
