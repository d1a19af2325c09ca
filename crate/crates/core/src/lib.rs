//! Mutual-information-optimal read quantization for flash memory channels
//! and the LDPC machinery used to measure what the extra reads buy.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod channel;
pub mod codegen;
pub mod error;
pub mod infotheory;
pub mod ldpc;
pub mod optimize;
pub mod quadrature;
pub mod quantizer;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ReadChannelModel64 = channel::ReadChannelModel<f64>;
pub type ReadChannelModel32 = channel::ReadChannelModel<f32>;
pub type ThresholdSet64 = quantizer::ThresholdSet<f64>;
pub type ThresholdSet32 = quantizer::ThresholdSet<f32>;
pub type Dmc64 = quantizer::Dmc<f64>;
pub type Dmc32 = quantizer::Dmc<f32>;
pub type LlrTable64 = ldpc::LlrTable<f64>;
pub type SerialBpDecoder64 = ldpc::SerialBpDecoder<f64>;
pub type SerialBpDecoder32 = ldpc::SerialBpDecoder<f32>;
