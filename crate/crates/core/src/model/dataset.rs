use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{norm, seeded_rng, Matrix};

/// Labelled inputs: `X` is d_in×n (one sample per column).
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Matrix,
    y: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<usize>, classes: usize) -> Result<Self> {
        let n = x.cols();
        if n < 2 {
            return Err(Error::SampleCount { n });
        }
        if y.len() != n {
            return Err(Error::shape(format!("{} labels for {n} samples", y.len())));
        }
        if let Some(&bad) = y.iter().find(|&&l| l >= classes) {
            return Err(Error::domain(format!("label {bad} >= class count {classes}")));
        }
        if !x.is_finite() {
            return Err(Error::Degenerate("dataset has non-finite inputs".into()));
        }
        Ok(Dataset { x, y, classes })
    }

    pub fn inputs(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.y
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn input_dim(&self) -> usize {
        self.x.rows()
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.x.columns(idx),
            idx.iter().map(|&i| self.y[i]).collect(),
            self.classes,
        )
    }

    /// Seeded 80/20 train/test split.
    pub fn split(&self, seed: u64) -> Result<(Dataset, Dataset)> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut seeded_rng(seed));
        let n_train = (self.len() * 4).div_ceil(5);
        let (train, test) = idx.split_at(n_train);
        if test.len() < 2 {
            return Err(Error::domain(format!(
                "{} samples leave fewer than 2 for the test split",
                self.len()
            )));
        }
        Ok((self.subset(train)?, self.subset(test)?))
    }

    pub fn read_csv(path: &Path) -> Result<Dataset> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        parse_dataset_csv(file, path)
    }
}

/// `C` Gaussian clusters (unit covariance) around random unit-norm centers
/// scaled by `spread`. Sample `i` belongs to class `i mod C`.
pub fn make_blobs(d_in: usize, classes: usize, n: usize, spread: f64, seed: u64) -> Result<Dataset> {
    if d_in == 0 || classes < 2 || n < classes {
        return Err(Error::domain(format!(
            "blobs need d_in >= 1, C >= 2 and n >= C (got d_in={d_in}, C={classes}, n={n})"
        )));
    }
    if !(spread >= 0.0) || !spread.is_finite() {
        return Err(Error::domain(format!("spread = {spread}")));
    }
    let mut rng = seeded_rng(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| {
            let c: Vec<f64> = (0..d_in).map(|_| rng.sample(StandardNormal)).collect();
            let len = norm(&c);
            c.into_iter().map(|v| v / len * spread).collect()
        })
        .collect();
    let y: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mut x = Matrix::zeros(d_in, n);
    for (j, &label) in y.iter().enumerate() {
        for i in 0..d_in {
            let noise: f64 = rng.sample(StandardNormal);
            x[(i, j)] = centers[label][i] + noise;
        }
    }
    Dataset::new(x, y, classes)
}

/// Header `label,f0,...,f{d-1}`; class count is `max label + 1`.
pub(crate) fn parse_dataset_csv<R: Read>(input: R, path: &Path) -> Result<Dataset> {
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
    if header.get(0) != Some("label") {
        return Err(parse_err(1, "first column must be `label`".into()));
    }
    let d = header.len() - 1;
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("f{i}") {
            return Err(parse_err(1, format!("expected column `f{i}`, found `{name}`")));
        }
    }
    if d == 0 {
        return Err(parse_err(1, "no feature columns".into()));
    }

    let mut columns = Vec::new();
    let mut y = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let label = rec[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| parse_err(line, format!("bad label `{}`", &rec[0])))?;
        let mut sample = Vec::with_capacity(d);
        for field in rec.iter().skip(1) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: `{field}`")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value `{field}`")));
            }
            sample.push(v);
        }
        y.push(label);
        columns.push(sample);
    }
    if columns.is_empty() {
        return Err(parse_err(2, "no samples".into()));
    }
    let classes = y.iter().max().map_or(0, |m| m + 1).max(2);
    Dataset::new(Matrix::from_columns(&columns)?, y, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_balanced_and_deterministic() {
        let a = make_blobs(2, 2, 4, 10.0, 0).unwrap();
        assert_eq!(a.labels(), &[0, 1, 0, 1]);
        let b = make_blobs(2, 2, 4, 10.0, 0).unwrap();
        assert_eq!(a.inputs(), b.inputs());
        // each point is a unit-noise perturbation of a center at radius 10
        for j in 0..4 {
            let r = norm(&a.inputs().column(j));
            assert!((r - 10.0).abs() < 5.0, "radius {r}");
        }

        let c = make_blobs(3, 4, 10, 1.0, 2).unwrap();
        let counts: Vec<usize> = (0..4).map(|k| c.labels().iter().filter(|&&l| l == k).count()).collect();
        assert_eq!(counts, vec![3, 3, 2, 2]);
    }

    #[test]
    fn blobs_domain_errors() {
        assert!(make_blobs(2, 1, 4, 1.0, 0).is_err());
        assert!(make_blobs(2, 3, 2, 1.0, 0).is_err());
        assert!(make_blobs(0, 2, 4, 1.0, 0).is_err());
        assert!(make_blobs(2, 2, 4, -1.0, 0).is_err());
    }

    #[test]
    fn split_is_disjoint_and_seeded() {
        let d = make_blobs(3, 2, 50, 2.0, 1).unwrap();
        let (tr, te) = d.split(9).unwrap();
        assert_eq!((tr.len(), te.len()), (40, 10));
        let (tr2, _) = d.split(9).unwrap();
        assert_eq!(tr.inputs(), tr2.inputs());
        assert!(make_blobs(3, 2, 5, 2.0, 1).unwrap().split(0).is_err());
    }

    #[test]
    fn dataset_invariants() {
        let x = Matrix::zeros(2, 3);
        assert!(Dataset::new(x.clone(), vec![0, 1, 2], 2).is_err());
        assert!(Dataset::new(x.clone(), vec![0, 1], 2).is_err());
        assert!(Dataset::new(Matrix::zeros(2, 1), vec![0], 2).is_err());
        assert!(Dataset::new(x, vec![0, 1, 1], 2).is_ok());
    }

    #[test]
    fn csv_parsing() {
        let text = "label,f0,f1\n0,1.5,2\n2,-1,0.25\n";
        let d = parse_dataset_csv(text.as_bytes(), Path::new("d.csv")).unwrap();
        assert_eq!(d.classes(), 3);
        assert_eq!(d.labels(), &[0, 2]);
        assert_eq!(d.inputs().column(1), vec![-1.0, 0.25]);

        let bad = "label,f0\n0,1\n-1,2\n";
        assert!(matches!(
            parse_dataset_csv(bad.as_bytes(), Path::new("d.csv")),
            Err(Error::Parse { line: 3, .. })
        ));
        let nan = "label,f0\n0,1\n1,nan\n";
        assert!(parse_dataset_csv(nan.as_bytes(), Path::new("d.csv")).is_err());
        let hdr = "y,f0\n0,1\n";
        assert!(parse_dataset_csv(hdr.as_bytes(), Path::new("d.csv")).is_err());
    }
}
