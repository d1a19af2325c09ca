//! LDPC codes: parity-check matrices, encoding, channel LLRs and
//! belief-propagation decoding.

mod decoder;
mod encoder;
mod llr;
mod matrix;

pub use decoder::{BpDecoder, DecodeOutcome, FloodingBpDecoder, SerialBpDecoder, DEFAULT_MAX_ITERS, MESSAGE_MAX};
pub use encoder::SystematicEncoder;
pub use llr::{channel_llrs, soft_cell_llrs, LlrTable, LLR_MAX};
pub use matrix::ParityCheckMatrix;

/// Number of parity checks `bits` leaves unsatisfied.
pub fn syndrome_weight(h: &ParityCheckMatrix, bits: &[u8]) -> usize {
    h.syndrome_weight(bits)
}

/// Runs the serial decoder once on `llrs`.
pub fn decode_serial_bp<T: crate::Scalar>(h: &ParityCheckMatrix, llrs: &[T], max_iters: usize) -> DecodeOutcome {
    SerialBpDecoder::new(h).decode(llrs, max_iters)
}
