use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::path::variable_index;
use crate::{Error, Result};

/// `n x p` data matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    data: DMatrix<f64>,
    names: Vec<String>,
}

impl Sample {
    pub fn new(data: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if data.ncols() == 0 {
            return Err(Error::invalid("sample must have at least one variable"));
        }
        if names.len() != data.ncols() {
            return Err(Error::Dimension { expected: data.ncols(), found: names.len() });
        }
        if data.nrows() < 2 {
            return Err(Error::TooFewObservations { needed: 2, have: data.nrows() });
        }
        if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
            let (i, j) = (idx % data.nrows(), idx / data.nrows());
            return Err(Error::invalid(format!("non-finite value at row {i}, column `{}`", names[j])));
        }
        variable_index(&names)?;
        Ok(Sample { data, names })
    }

    pub fn with_default_names(data: DMatrix<f64>) -> Result<Self> {
        let names = (1..=data.ncols()).map(|i| format!("x{i}")).collect();
        Self::new(data, names)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Rows packed contiguously, `n * p` values.
    pub fn row_major(&self) -> Vec<f64> {
        self.data.transpose().as_slice().to_vec()
    }

    /// Same rows shifted by `offset` (one value per column).
    pub fn translated(&self, offset: &[f64]) -> Result<Sample> {
        if offset.len() != self.p() {
            return Err(Error::Dimension { expected: self.p(), found: offset.len() });
        }
        let mut data = self.data.clone();
        for (j, mut col) in data.column_iter_mut().enumerate() {
            col.add_scalar_mut(offset[j]);
        }
        Sample::new(data, self.names.clone())
    }

    pub fn scaled(&self, factor: f64) -> Result<Sample> {
        Sample::new(&self.data * factor, self.names.clone())
    }

    /// Rows reordered by `perm` (`perm[i]` is the source row of row `i`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Sample> {
        if perm.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), found: perm.len() });
        }
        let data = DMatrix::from_fn(self.n(), self.p(), |i, j| self.data[(perm[i], j)]);
        Sample::new(data, self.names.clone())
    }

    /// CSV with a header row of variable names.
    pub fn read_csv<R: Read>(reader: R) -> Result<Sample> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut values = Vec::new();
        let mut rows = 0;
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != names.len() {
                return Err(Error::invalid(format!("row {} has {} fields, header has {}", i + 1, record.len(), names.len())));
            }
            for field in record.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("row {}: `{field}` is not a number", i + 1)))?;
                values.push(v);
            }
            rows += 1;
        }
        let data = DMatrix::from_row_slice(rows, names.len(), &values);
        Sample::new(data, names)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
        wtr.write_record(&self.names)?;
        for row in self.data.row_iter() {
            wtr.write_record(row.iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}
