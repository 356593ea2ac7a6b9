//! C ABI for the limit-law evaluators and samplers: opaque handles, integer
//! error codes, and a thread-local last-error message.

pub mod capi;

pub use capi::*;
