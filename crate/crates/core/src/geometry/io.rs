//! Representation CSV: header `dim0,...,dim{d-1}[,label]`, one sample per row.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::RepresentationSet;
use crate::linalg::Matrix;

pub fn write_reps_csv<W: Write>(r: &RepresentationSet, mut out: W) -> std::io::Result<()> {
    let d = r.dim();
    let mut header: Vec<String> = (0..d).map(|i| format!("dim{i}")).collect();
    if r.labels().is_some() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for j in 0..r.len() {
        let mut fields: Vec<String> = r.sample(j).iter().map(|v| format!("{v:.16e}")).collect();
        if let Some(l) = r.labels() {
            fields.push(l[j].to_string());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_reps_csv(path: &Path) -> Result<RepresentationSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_reps_csv(file, path)
}

pub(crate) fn parse_reps_csv<R: Read>(input: R, path: &Path) -> Result<RepresentationSet> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    let has_label = header.iter().next_back() == Some("label");
    let d = header.len() - usize::from(has_label);
    for (i, name) in header.iter().take(d).enumerate() {
        if name != format!("dim{i}") {
            return Err(parse_err(1, format!("expected column `dim{i}`, found `{name}`")));
        }
    }
    if d == 0 {
        return Err(parse_err(1, "no dimension columns".into()));
    }

    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut sample = Vec::with_capacity(d);
        for field in rec.iter().take(d) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value `{field}`")));
            }
            sample.push(v);
        }
        if has_label {
            let field = &rec[d];
            labels.push(
                field
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| parse_err(line, format!("bad label `{field}`")))?,
            );
        }
        values.push(sample);
    }
    if values.is_empty() {
        return Err(parse_err(2, "no samples".into()));
    }
    let h = Matrix::from_columns(&values)?;
    RepresentationSet::new(h, has_label.then_some(labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_labels() {
        let h = Matrix::from_rows(&[vec![0.1, -2.5, 1e-300], vec![3.0, 0.0, -0.0]]).unwrap();
        let r = RepresentationSet::new(h, Some(vec![0, 2, 1])).unwrap();
        let mut buf = Vec::new();
        write_reps_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dim0,dim1,label\n"));
        let back = parse_reps_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back.matrix(), r.matrix());
        assert_eq!(back.labels(), Some(&[0, 2, 1][..]));
    }

    #[test]
    fn rejects_nan_and_bad_header() {
        let bad = "dim0,dim1\n1.0,NaN\n";
        assert!(matches!(
            parse_reps_csv(bad.as_bytes(), Path::new("x")),
            Err(Error::Parse { line: 2, .. })
        ));
        let inf = "dim0\ninf\n";
        assert!(parse_reps_csv(inf.as_bytes(), Path::new("x")).is_err());
        let hdr = "x0,x1\n1,2\n";
        assert!(parse_reps_csv(hdr.as_bytes(), Path::new("x")).is_err());
    }

    #[test]
    fn unlabeled() {
        let text = "dim0,dim1\n1,2\n3,4\n";
        let r = parse_reps_csv(text.as_bytes(), Path::new("x")).unwrap();
        assert_eq!(r.matrix(), &Matrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap());
        assert!(r.labels().is_none());
    }
}
