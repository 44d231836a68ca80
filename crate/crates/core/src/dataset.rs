//! Named-column numeric datasets and their CSV form.
//!
//! CSV files have a header row and one row per sample; values are written with 17
//! significant digits. An optional leading `# seed=<n>` line records the seed.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("column `{name}` has {got} rows, expected {expected}")]
    LengthMismatch { name: String, got: usize, expected: usize },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    BadValue { row: usize, column: String, value: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, seed: Option<u64>) -> Result<Self, DatasetError> {
        let expected = columns.first().map_or(0, |c| c.len());
        for (k, (name, col)) in names.iter().zip(&columns).enumerate() {
            if col.len() != expected {
                return Err(DatasetError::LengthMismatch { name: name.clone(), got: col.len(), expected });
            }
            if names[..k].contains(name) {
                return Err(DatasetError::DuplicateColumn(name.clone()));
            }
        }
        assert_eq!(names.len(), columns.len(), "one name per column");
        Ok(Dataset { names, columns, seed })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, |c| c.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names.iter().position(|n| n == name).map(|i| self.columns[i].as_slice())
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<(), DatasetError> {
        if let Some(seed) = self.seed {
            writeln!(w, "# seed={seed}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.names)?;
        for r in 0..self.n() {
            out.write_record(self.columns.iter().map(|c| format!("{:.16e}", c[r])))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self, DatasetError> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let seed = text
            .lines()
            .next()
            .and_then(|l| l.trim().strip_prefix("# seed="))
            .and_then(|s| s.trim().parse().ok());
        let mut rd = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let names: Vec<String> = rd.headers()?.iter().map(String::from).collect();
        let mut columns = vec![Vec::new(); names.len()];
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            for (k, field) in rec.iter().enumerate() {
                let v: f64 = field.parse().map_err(|_| DatasetError::BadValue {
                    row: row + 1,
                    column: names[k].clone(),
                    value: field.to_string(),
                })?;
                columns[k].push(v);
            }
        }
        Dataset::new(names, columns, seed)
    }
}
