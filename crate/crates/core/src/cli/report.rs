use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Full-precision float field (17 significant digits, round-trips exactly).
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV report whose first line is `# gaugelens v1 <command>`.
pub struct Table {
    command: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &'static str, header: &[&str]) -> Self {
        Table {
            command,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(command: &'static str, header: Vec<String>) -> Self {
        Table { command, header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("# gaugelens v1 {}\n", self.command).into_bytes();
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            // writing into a Vec cannot fail
            w.write_record(&self.header).expect("in-memory write");
            for row in &self.rows {
                w.write_record(row).expect("in-memory write");
            }
            w.flush().expect("in-memory write");
        }
        out
    }

    pub fn write(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        write_file(dir, name, &self.to_bytes())
    }
}

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let mut t = Table::new("demo", &["a", "b"]);
        t.push(vec!["1".into(), fmt_f(0.5)]);
        let text = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(text, "# gaugelens v1 demo\na,b\n1,5.0000000000000000e-1\n");
    }

    #[test]
    fn float_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(fmt_f(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }
}
