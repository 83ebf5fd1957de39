//! Format-compliant, constant-bitrate selective encryption of transform
//! coefficient bins.
pub mod bincodes;
pub mod coeffmodel;
pub mod crypto;
pub mod metrics;
pub mod cli_io;
