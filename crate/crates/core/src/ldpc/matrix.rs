//! Sparse binary parity-check matrices and the alist interchange format.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Sparse parity-check matrix stored as sorted row and column adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
}

impl ParityCheckMatrix {
    /// Builds an `m × n` matrix from the column indices of each row.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        let mut rows = rows;
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("duplicate edge in row {r}")));
            }
            for &c in row.iter() {
                if c >= n {
                    return Err(Error::InvalidParameter(format!("column {c} out of range in row {r}")));
                }
                cols[c].push(r);
            }
        }
        Ok(Self { n, rows, cols })
    }

    /// Builds a matrix from `(row, col)` pairs.
    pub fn from_edges(m: usize, n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut rows = vec![Vec::new(); m];
        for (r, c) in edges {
            if r >= m {
                return Err(Error::InvalidParameter(format!("row {r} out of range")));
            }
            rows[r].push(c);
        }
        Self::from_rows(n, rows)
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn col(&self, c: usize) -> &[usize] {
        &self.cols[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn num_edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn column_degrees(&self) -> Vec<usize> {
        self.cols.iter().map(Vec::len).collect()
    }

    pub fn row_degrees(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn min_column_degree(&self) -> usize {
        self.cols.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// `(degree, count)` pairs of the column-degree histogram.
    pub fn column_degree_histogram(&self) -> Vec<(usize, usize)> {
        histogram(self.cols.iter().map(Vec::len))
    }

    pub fn row_degree_histogram(&self) -> Vec<(usize, usize)> {
        histogram(self.rows.iter().map(Vec::len))
    }

    /// Number of unsatisfied checks for the hard decisions `bits`.
    pub fn syndrome_weight(&self, bits: &[u8]) -> usize {
        debug_assert_eq!(bits.len(), self.n);
        self.rows
            .iter()
            .filter(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]) & 1 == 1)
            .count()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ bits[c]) & 1 == 0)
    }

    /// Parses the alist format: dimensions, maximum degrees, the degree lists,
    /// then the 1-based row list of every column and column list of every row
    /// (zero entries are padding).
    pub fn from_alist_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next_line = |what: &str| -> Result<(usize, Vec<usize>)> {
            let (no, line) = lines.next().ok_or_else(|| Error::Alist { line: 0, msg: format!("missing {what}") })?;
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| Error::Alist { line: no, msg: format!("bad integer {t:?}") }))
                .collect::<Result<Vec<_>>>()?;
            Ok((no, nums))
        };
        let err = |line: usize, msg: String| Error::Alist { line, msg };

        let (no, dims) = next_line("dimensions")?;
        let [n, m] = dims[..] else { return Err(err(no, "expected `n m`".into())) };
        let (no, maxes) = next_line("maximum degrees")?;
        let [max_col, max_row] = maxes[..] else { return Err(err(no, "expected two maximum degrees".into())) };
        let (no, col_deg) = next_line("column degrees")?;
        if col_deg.len() != n {
            return Err(err(no, format!("{} column degrees for n = {n}", col_deg.len())));
        }
        let (no, row_deg) = next_line("row degrees")?;
        if row_deg.len() != m {
            return Err(err(no, format!("{} row degrees for m = {m}", row_deg.len())));
        }
        if col_deg.iter().max().copied().unwrap_or(0) > max_col || row_deg.iter().max().copied().unwrap_or(0) > max_row {
            return Err(err(no, "degree exceeds declared maximum".into()));
        }
        if col_deg.iter().sum::<usize>() != row_deg.iter().sum::<usize>() {
            return Err(err(no, "row and column degrees disagree on the edge count".into()));
        }

        let mut from_cols = Vec::new();
        for (c, &d) in col_deg.iter().enumerate() {
            let (no, entries) = next_line("column list")?;
            let idx: Vec<usize> = entries.into_iter().filter(|&x| x != 0).collect();
            if idx.len() != d {
                return Err(err(no, format!("column {} lists {} rows, degree is {d}", c + 1, idx.len())));
            }
            for r in idx {
                if r > m {
                    return Err(err(no, format!("row index {r} out of range")));
                }
                from_cols.push((r - 1, c));
            }
        }
        let mut rows = Vec::with_capacity(m);
        for (r, &d) in row_deg.iter().enumerate() {
            let (no, entries) = next_line("row list")?;
            let idx: Vec<usize> = entries.into_iter().filter(|&x| x != 0).collect();
            if idx.len() != d {
                return Err(err(no, format!("row {} lists {} columns, degree is {d}", r + 1, idx.len())));
            }
            if let Some(&c) = idx.iter().find(|&&c| c > n) {
                return Err(err(no, format!("column index {c} out of range")));
            }
            rows.push(idx.into_iter().map(|c| c - 1).collect::<Vec<_>>());
        }
        let h = Self::from_rows(n, rows)?;
        let mut from_rows: Vec<(usize, usize)> = h
            .rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&c| (r, c)))
            .collect();
        from_cols.sort_unstable();
        from_rows.sort_unstable();
        if from_cols != from_rows {
            return Err(err(0, "column lists and row lists describe different matrices".into()));
        }
        Ok(h)
    }

    /// Canonical alist text: sorted 1-based indices, zero padding to the
    /// maximum degree, single spaces, one trailing newline per line.
    pub fn to_alist_string(&self) -> String {
        let max_col = self.cols.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut s = String::new();
        let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "{} {}", self.n, self.m());
        let _ = writeln!(s, "{max_col} {max_row}");
        let _ = writeln!(s, "{}", join(&mut self.cols.iter().map(Vec::len)));
        let _ = writeln!(s, "{}", join(&mut self.rows.iter().map(Vec::len)));
        for col in &self.cols {
            let mut it = col.iter().map(|r| r + 1).chain(std::iter::repeat_n(0, max_col - col.len()));
            let _ = writeln!(s, "{}", join(&mut it));
        }
        for row in &self.rows {
            let mut it = row.iter().map(|c| c + 1).chain(std::iter::repeat_n(0, max_row - row.len()));
            let _ = writeln!(s, "{}", join(&mut it));
        }
        s
    }

    pub fn load_alist(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File { path: path.into(), source })?;
        Self::from_alist_str(&text)
    }

    pub fn save_alist(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_alist_string()).map_err(|source| Error::File { path: path.into(), source })
    }

    /// The (7, 4) Hamming code.
    pub fn hamming_7_4() -> Self {
        Self::from_rows(7, vec![vec![0, 1, 3, 4], vec![0, 2, 3, 5], vec![1, 2, 3, 6]]).expect("valid Hamming matrix")
    }

    /// The same code checked by all seven nonzero dual codewords, so every
    /// column has degree 4.
    pub fn hamming_7_4_redundant() -> Self {
        let base = Self::hamming_7_4();
        let rows = (1u8..8)
            .map(|mask| {
                let mut bits = [0u8; 7];
                for (r, row) in base.rows.iter().enumerate() {
                    if mask >> r & 1 == 1 {
                        for &c in row {
                            bits[c] ^= 1;
                        }
                    }
                }
                (0..7).filter(|&c| bits[c] == 1).collect()
            })
            .collect();
        Self::from_rows(7, rows).expect("valid Hamming matrix")
    }
}

fn histogram(degrees: impl Iterator<Item = usize>) -> Vec<(usize, usize)> {
    let mut counts = std::collections::BTreeMap::new();
    for d in degrees {
        *counts.entry(d).or_insert(0) += 1;
    }
    counts.into_iter().collect()
}
