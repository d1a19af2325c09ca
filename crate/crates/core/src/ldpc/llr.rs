//! Channel log-likelihood ratios for the bits stored in a cell.
//!
//! Codeword bit `cell * bits_per_cell + j` is bit `j` (most significant
//! first) of the label written to `cell`. Positive LLRs favour a 0 bit.

use crate::channel::ReadChannelModel;
use crate::error::{Error, Result};
use crate::quantizer::Dmc;
use crate::scalar::{log_add_exp, Scalar};

/// Magnitude limit applied to every channel LLR.
pub const LLR_MAX: f64 = 30.0;

/// LLR of every (output symbol, label bit) pair of a quantized read channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrTable<T> {
    bits_per_cell: usize,
    table: Vec<T>,
}

impl<T: Scalar> LlrTable<T> {
    /// `LLR(b_j | y) = ln Σ_{label_j = 0} π P(y|x) - ln Σ_{label_j = 1} π P(y|x)`.
    /// Outputs that no input can produce get LLR 0.
    pub fn new(dmc: &Dmc<T>, model: &ReadChannelModel<T>) -> Result<Self> {
        if dmc.num_inputs() != model.num_levels() {
            return Err(Error::Incompatible(format!(
                "dmc has {} inputs, model has {} levels",
                dmc.num_inputs(),
                model.num_levels()
            )));
        }
        let bpc = model.bits_per_cell();
        let max = T::lit(LLR_MAX);
        let mut table = Vec::with_capacity(dmc.num_outputs() * bpc);
        for y in 0..dmc.num_outputs() {
            for j in 0..bpc {
                let (mut zero, mut one) = (T::zero(), T::zero());
                for x in 0..dmc.num_inputs() {
                    let mass = dmc.priors()[x] * dmc.prob(x, y);
                    if model.label_bit(x, j) == 0 {
                        zero += mass;
                    } else {
                        one += mass;
                    }
                }
                let llr = match (zero > T::zero(), one > T::zero()) {
                    (false, false) => T::zero(),
                    (true, false) => max,
                    (false, true) => -max,
                    (true, true) => (zero.ln() - one.ln()).max(-max).min(max),
                };
                table.push(llr);
            }
        }
        Ok(Self { bits_per_cell: bpc, table })
    }

    pub fn bits_per_cell(&self) -> usize {
        self.bits_per_cell
    }

    pub fn num_symbols(&self) -> usize {
        self.table.len() / self.bits_per_cell
    }

    #[inline]
    pub fn llr(&self, symbol: usize, bit: usize) -> T {
        self.table[symbol * self.bits_per_cell + bit]
    }

    /// Writes the LLRs of every bit of the observed cells into `out`.
    pub fn fill(&self, symbols: &[usize], out: &mut [T]) {
        let b = self.bits_per_cell;
        for (cell, &s) in symbols.iter().enumerate() {
            out[cell * b..(cell + 1) * b].copy_from_slice(&self.table[s * b..(s + 1) * b]);
        }
    }
}

/// Per-bit LLRs for a sequence of observed DMC output symbols.
pub fn channel_llrs<T: Scalar>(dmc: &Dmc<T>, model: &ReadChannelModel<T>, symbols: &[usize]) -> Result<Vec<T>> {
    if let Some(&bad) = symbols.iter().find(|&&s| s >= dmc.num_outputs()) {
        return Err(Error::InvalidParameter(format!("symbol {bad} out of range")));
    }
    let output = dmc.output_distribution();
    if let Some(&bad) = symbols.iter().find(|&&s| !(output[s] > T::zero())) {
        return Err(Error::ZeroMass { symbol: bad });
    }
    let table = LlrTable::new(dmc, model)?;
    let mut out = vec![T::zero(); symbols.len() * model.bits_per_cell()];
    table.fill(symbols, &mut out);
    Ok(out)
}

/// LLRs of the bits of one cell whose threshold voltage `v` is known exactly.
pub fn soft_cell_llrs<T: Scalar>(model: &ReadChannelModel<T>, v: T, out: &mut [T]) {
    let max = T::lit(LLR_MAX);
    for (j, o) in out.iter_mut().enumerate().take(model.bits_per_cell()) {
        let (mut zero, mut one) = (T::neg_infinity(), T::neg_infinity());
        for (x, lv) in model.levels().iter().enumerate() {
            let w = lv.prior.ln() + lv.dist.ln_pdf(v);
            if model.label_bit(x, j) == 0 {
                zero = log_add_exp(zero, w);
            } else {
                one = log_add_exp(one, w);
            }
        }
        *o = (zero - one).max(-max).min(max);
    }
}
