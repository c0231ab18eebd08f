//! Text checkpoint:
//!
//! ```text
//! GAUGELENS-MLP v1
//! d_in d_h C
//! <W1: d_h rows of d_in values>
//! <b1: one row of d_h values>
//! <W2: C rows of d_h values>
//! <b2: one row of C values>
//! GAUGE                      (optional)
//! <D: d_h rows of d_h values>
//! ```
//!
//! Values carry 17 significant digits so every finite double reads back
//! bit-exactly.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::MlpModel;

pub const CHECKPOINT_MAGIC: &str = "GAUGELENS-MLP v1";

fn write_row<W: Write>(out: &mut W, values: &[f64]) -> std::io::Result<()> {
    let fields: Vec<String> = values.iter().map(|v| format!("{v:.16e}")).collect();
    writeln!(out, "{}", fields.join(" "))
}

fn write_matrix<W: Write>(out: &mut W, m: &Matrix) -> std::io::Result<()> {
    (0..m.rows()).try_for_each(|i| write_row(out, m.row(i)))
}

pub fn write_checkpoint<W: Write>(m: &MlpModel, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CHECKPOINT_MAGIC}")?;
    writeln!(out, "{} {} {}", m.input_dim(), m.hidden_dim(), m.classes())?;
    write_matrix(&mut out, m.w1())?;
    write_row(&mut out, m.b1())?;
    write_matrix(&mut out, m.w2())?;
    write_row(&mut out, m.b2())?;
    if let Some(g) = m.gauge() {
        writeln!(out, "GAUGE")?;
        write_matrix(&mut out, g)?;
    }
    Ok(())
}

pub fn save_checkpoint(m: &MlpModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_checkpoint(m, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<MlpModel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(file, path)
}

struct Lines<'a, R> {
    inner: std::iter::Enumerate<std::io::Lines<BufReader<R>>>,
    path: &'a Path,
    line: usize,
}

impl<R: Read> Lines<'_, R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<Option<String>> {
        match self.inner.next() {
            None => Ok(None),
            Some((i, line)) => {
                self.line = i + 1;
                line.map(Some).map_err(|e| Error::io(self.path, e))
            }
        }
    }

    fn expect_line(&mut self) -> Result<String> {
        self.next_line()?.ok_or_else(|| {
            self.line += 1;
            self.err("unexpected end of file")
        })
    }

    fn row(&mut self, len: usize) -> Result<Vec<f64>> {
        let line = self.expect_line()?;
        let values = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(format!("bad value `{t}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != len {
            return Err(self.err(format!("expected {len} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.row(cols)?);
        }
        Matrix::new(rows, cols, data)
    }
}

pub fn read_checkpoint<R: Read>(input: R, path: &Path) -> Result<MlpModel> {
    let mut lines = Lines {
        inner: BufReader::new(input).lines().enumerate(),
        path,
        line: 0,
    };
    if lines.expect_line()?.trim_end() != CHECKPOINT_MAGIC {
        return Err(lines.err(format!("missing `{CHECKPOINT_MAGIC}` header")));
    }
    let dims_line = lines.expect_line()?;
    let dims: Vec<usize> = dims_line
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| lines.err("dimension line must be `d_in d_h C`"))?;
    let [d_in, d_h, c] = dims[..] else {
        return Err(lines.err("dimension line must be `d_in d_h C`"));
    };
    if d_in == 0 || d_h == 0 || c == 0 {
        return Err(lines.err("dimensions must be positive"));
    }
    let w1 = lines.matrix(d_h, d_in)?;
    let b1 = lines.row(d_h)?;
    let w2 = lines.matrix(c, d_h)?;
    let b2 = lines.row(c)?;
    let gauge = match lines.next_line()? {
        None => None,
        Some(l) if l.trim().is_empty() => None,
        Some(l) if l.trim_end() == "GAUGE" => Some(lines.matrix(d_h, d_h)?),
        Some(l) => return Err(lines.err(format!("unexpected line `{l}`"))),
    };
    MlpModel::from_parts(w1, b1, w2, b2, gauge)
}
