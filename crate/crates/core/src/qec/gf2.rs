//! Dense binary matrices and GF(2) rank.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<u8>>,
}

impl BinaryMatrix {
    pub fn from_rows(data: Vec<Vec<u8>>) -> Result<Self> {
        let rows = data.len();
        let cols = data.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::Code("check matrix has no entries".into()));
        }
        for (r, row) in data.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Code(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| **v > 1) {
                return Err(Error::Code(format!("row {r} holds non-binary entry {v}")));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![vec![0; cols]; rows],
        }
    }

    /// Check matrix of the length-`n` repetition code: (n−1)×n, rows e_i + e_{i+1}.
    pub fn repetition(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Code("repetition code needs length >= 2".into()));
        }
        let mut m = Self::zeros(n - 1, n);
        for i in 0..n - 1 {
            m.data[i][i] = 1;
            m.data[i][i + 1] = 1;
        }
        Ok(m)
    }

    /// `size`×`size` circulant with ones at the given column offsets of each row.
    pub fn circulant(size: usize, offsets: &[usize]) -> Result<Self> {
        let mut m = Self::zeros(size, size);
        for r in 0..size {
            for &o in offsets {
                m.data[r][(r + o) % size] = 1;
            }
        }
        Self::from_rows(m.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r][c] == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r][c] = u8::from(v);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|row| row.iter().all(|v| *v == 0))
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.data[r].iter().filter(|v| **v == 1).count()
    }

    pub fn col_weight(&self, c: usize) -> usize {
        self.data.iter().filter(|row| row[c] == 1).count()
    }

    pub fn max_row_weight(&self) -> usize {
        (0..self.rows).map(|r| self.row_weight(r)).max().unwrap_or(0)
    }

    pub fn max_col_weight(&self) -> usize {
        (0..self.cols).map(|c| self.col_weight(c)).max().unwrap_or(0)
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        (0..self.cols).filter(|&c| self.get(r, c)).collect()
    }

    pub fn col_support(&self, c: usize) -> Vec<usize> {
        (0..self.rows).filter(|&r| self.get(r, c)).collect()
    }

    /// Parses dense 0/1 CSV, one matrix row per line.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Code(format!("CSV: {e}")))?;
            let row = record
                .iter()
                .map(|field| match field {
                    "0" => Ok(0),
                    "1" => Ok(1),
                    other => Err(Error::Code(format!(
                        "CSV record {}: expected 0 or 1, got `{other}`",
                        line + 1
                    ))),
                })
                .collect::<Result<Vec<u8>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.data {
            let cells: Vec<&str> = row.iter().map(|v| if *v == 1 { "1" } else { "0" }).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rank over GF(2) of a set of row supports on `cols` columns.
pub fn rank_of_supports(supports: &[Vec<usize>], cols: usize) -> usize {
    let words = cols.div_ceil(64).max(1);
    let mut rows: Vec<Vec<u64>> = supports
        .iter()
        .map(|s| {
            let mut bits = vec![0u64; words];
            for &c in s {
                bits[c / 64] ^= 1 << (c % 64);
            }
            bits
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let (w, b) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & b != 0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= p;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn rank(m: &BinaryMatrix) -> usize {
    let supports: Vec<Vec<usize>> = (0..m.rows()).map(|r| m.row_support(r)).collect();
    rank_of_supports(&supports, m.cols())
}
