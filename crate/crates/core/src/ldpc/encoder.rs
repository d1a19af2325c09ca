//! Systematic encoding from a parity-check matrix via GF(2) Gauss–Jordan
//! elimination. Dependent rows are dropped, so `k = n - rank(H)`.

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

const W: usize = 64;

fn words(bits: usize) -> usize {
    bits.div_ceil(W)
}

/// Encoder derived from a reduced row-echelon form of `H`.
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    n: usize,
    /// Columns carrying message bits, ascending.
    info_positions: Vec<usize>,
    /// Pivot column of each independent check.
    parity_positions: Vec<usize>,
    /// For each independent check, its row restricted to the info columns.
    parity_rows: Vec<Vec<u64>>,
}

impl SystematicEncoder {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let n = h.n();
        let nw = words(n);
        let mut rows: Vec<Vec<u64>> = h
            .rows()
            .iter()
            .map(|row| {
                let mut v = vec![0u64; nw];
                for &c in row {
                    v[c / W] ^= 1 << (c % W);
                }
                v
            })
            .collect();

        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            if rank == rows.len() {
                break;
            }
            let (w, b) = (col / W, 1u64 << (col % W));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for (x, y) in row.iter_mut().zip(&pivot) {
                        *x ^= y;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);

        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let kw = words(info_positions.len());
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut v = vec![0u64; kw];
                for (i, &c) in info_positions.iter().enumerate() {
                    if row[c / W] >> (c % W) & 1 == 1 {
                        v[i / W] |= 1 << (i % W);
                    }
                }
                v
            })
            .collect();
        Self { n, info_positions, parity_positions: pivots, parity_rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Effective dimension after dropping dependent checks.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rank(&self) -> usize {
        self.parity_positions.len()
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    /// Codeword whose info positions carry `message`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        let mut codeword = vec![0u8; self.n];
        self.encode_into(message, &mut codeword)?;
        Ok(codeword)
    }

    pub fn encode_into(&self, message: &[u8], codeword: &mut [u8]) -> Result<()> {
        if message.len() != self.k() {
            return Err(Error::MessageLength { expected: self.k(), got: message.len() });
        }
        let mut packed = vec![0u64; words(self.k())];
        for (i, (&bit, &pos)) in message.iter().zip(&self.info_positions).enumerate() {
            codeword[pos] = bit & 1;
            packed[i / W] |= u64::from(bit & 1) << (i % W);
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            codeword[pos] = (ones & 1) as u8;
        }
        Ok(())
    }

    /// Message bits read back from a (decoded) codeword.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}
