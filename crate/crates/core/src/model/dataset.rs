use std::path::Path;

use serde::Serialize;

use super::ModelError;

/// Name given to the all-ones column added by [`Dataset::with_intercept`].
pub const INTERCEPT: &str = "(Intercept)";

/// Binomial observations `y_i ~ Bin(n_i, F(x_i' beta [+ w_region]))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    y: Vec<u32>,
    n: Vec<u32>,
    /// row-major design matrix
    x: Vec<f64>,
    names: Vec<String>,
    regions: Option<Vec<String>>,
}

impl Dataset {
    /// Builds a dataset from a complete design matrix (one inner vector per row).
    pub fn new(
        y: Vec<u32>,
        n: Vec<u32>,
        rows: Vec<Vec<f64>>,
        names: Vec<String>,
        regions: Option<Vec<String>>,
    ) -> Result<Self, ModelError> {
        if y.is_empty() {
            return Err(ModelError::Empty);
        }
        if y.len() != n.len() || y.len() != rows.len() {
            return Err(ModelError::Dimension(format!("{} responses, {} trial counts, {} design rows", y.len(), n.len(), rows.len())));
        }
        if let Some(r) = &regions {
            if r.len() != y.len() {
                return Err(ModelError::Dimension(format!("{} region labels for {} rows", r.len(), y.len())));
            }
        }
        let k = names.len();
        let mut x = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(ModelError::BadRow { row: i + 1, reason: format!("{} covariates, expected {k}", row.len()) });
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(ModelError::BadRow { row: i + 1, reason: format!("non-finite covariate {v}") });
            }
            x.extend_from_slice(row);
        }
        for (i, (&yi, &ni)) in y.iter().zip(&n).enumerate() {
            if ni == 0 {
                return Err(ModelError::BadRow { row: i + 1, reason: "n must be positive".into() });
            }
            if yi > ni {
                return Err(ModelError::BadRow { row: i + 1, reason: format!("y = {yi} exceeds n = {ni}") });
            }
        }
        Ok(Dataset { y, n, x, names, regions })
    }

    /// Like [`Dataset::new`] but prepends an intercept column to the covariates.
    pub fn with_intercept(
        y: Vec<u32>,
        n: Vec<u32>,
        covariates: Vec<Vec<f64>>,
        names: Vec<String>,
        regions: Option<Vec<String>>,
    ) -> Result<Self, ModelError> {
        let rows = covariates.into_iter().map(|row| std::iter::once(1.0).chain(row).collect()).collect();
        let names = std::iter::once(INTERCEPT.to_string()).chain(names).collect();
        Self::new(y, n, rows, names, regions)
    }

    /// Reads a CSV with columns `y`, `n`, any number of numeric covariates and an
    /// optional `region` column. An intercept column is always added.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: std::io::Read>(reader: R) -> Result<Self, ModelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let find = |name: &str| header.iter().position(|h| h == name);
        let iy = find("y").ok_or_else(|| ModelError::MissingColumn("y".into()))?;
        let in_ = find("n").ok_or_else(|| ModelError::MissingColumn("n".into()))?;
        let ir = find("region");
        let cov: Vec<usize> = (0..header.len()).filter(|&j| j != iy && j != in_ && Some(j) != ir).collect();

        let (mut y, mut n, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        let mut regions = ir.map(|_| Vec::new());
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let row = i + 1;
            let count = |j: usize| -> Result<u32, ModelError> {
                record[j].parse::<u32>().map_err(|_| ModelError::BadRow {
                    row,
                    reason: format!("column '{}': '{}' is not a nonnegative integer", header[j], &record[j]),
                })
            };
            y.push(count(iy)?);
            n.push(count(in_)?);
            let mut values = Vec::with_capacity(cov.len());
            for &j in &cov {
                values.push(record[j].parse::<f64>().map_err(|_| ModelError::BadRow {
                    row,
                    reason: format!("column '{}': '{}' is not a number", header[j], &record[j]),
                })?);
            }
            rows.push(values);
            if let (Some(r), Some(j)) = (regions.as_mut(), ir) {
                r.push(record[j].to_string());
            }
        }
        let names = cov.iter().map(|&j| header[j].clone()).collect();
        Self::with_intercept(y, n, rows, names, regions)
    }

    /// Writes the dataset in the format read by [`Dataset::from_csv`]; the
    /// intercept column is omitted.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), ModelError> {
        let mut wtr = csv::Writer::from_writer(writer);
        let keep: Vec<usize> = (0..self.n_covariates()).filter(|&j| self.names[j] != INTERCEPT).collect();
        let mut header = vec!["y".to_string(), "n".to_string()];
        header.extend(keep.iter().map(|&j| self.names[j].clone()));
        if self.regions.is_some() {
            header.push("region".into());
        }
        wtr.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.y[i].to_string(), self.n[i].to_string()];
            rec.extend(keep.iter().map(|&j| format!("{:?}", self.x(i)[j])));
            if let Some(r) = &self.regions {
                rec.push(r[i].clone());
            }
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|source| ModelError::Io { path: "<csv writer>".into(), source })?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Number of design columns, including the intercept.
    pub fn n_covariates(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn y(&self) -> &[u32] {
        &self.y
    }

    pub fn n(&self) -> &[u32] {
        &self.n
    }

    pub fn x(&self, row: usize) -> &[f64] {
        let k = self.names.len();
        &self.x[row * k..(row + 1) * k]
    }

    pub fn design(&self) -> &[f64] {
        &self.x
    }

    pub fn regions(&self) -> Option<&[String]> {
        self.regions.as_deref()
    }

    /// Linear predictor `x_i' beta` for every row.
    pub fn linear_predictor(&self, beta: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i).iter().zip(beta).map(|(a, b)| a * b).sum()).collect()
    }

    /// Returns a copy with responses flipped to `n - y`.
    pub fn flipped(&self) -> Dataset {
        let mut d = self.clone();
        for (y, n) in d.y.iter_mut().zip(&d.n) {
            *y = n - *y;
        }
        d
    }

    /// Rows reordered by `perm` (row `i` of the result is row `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Dataset {
        let rows = perm.iter().map(|&i| self.x(i).to_vec()).collect();
        Dataset::new(
            perm.iter().map(|&i| self.y[i]).collect(),
            perm.iter().map(|&i| self.n[i]).collect(),
            rows,
            self.names.clone(),
            self.regions.as_ref().map(|r| perm.iter().map(|&i| r[i].clone()).collect()),
        )
        .expect("permutation of a valid dataset")
    }
}
