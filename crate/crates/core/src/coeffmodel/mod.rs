//! Transform sub-block model: scans, local sums, coding tables, and the
//! pass structure that turns coefficients into bins.

mod block;
pub mod codec;
pub mod levels;
pub mod neighbors;
pub mod tables;

pub use block::{check_dims, CodingMode, SubBlock, MAX_SIDE};
pub use codec::{
    annotate, decode_subblock, encode_subblock, read_subblock, write_subblock, DecodedSubBlock, EncodedSubBlock,
    Pass, PassAnnotation, PositionInfo, PositionLayout, RemainderSpan,
};
pub use levels::{abs_remainder, abs_remainder_ts, map_dec_abs_level, unmap_dec_abs_level};
pub use neighbors::{local_abs_sum, local_abs_sum_ts, pass1_bin_budget, scan_positions};
pub use tables::{CodingTables, SumInterval, TableError};

use thiserror::Error;

use crate::bincodes::{CodeError, DecodeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("sub-block dimensions {width}x{height} are not powers of two up to 64")]
    Dimensions { width: usize, height: usize },
    #[error("expected {expected} coefficients, found {found}")]
    CoeffCount { expected: usize, found: usize },
    #[error("coefficient {value} at ({x}, {y}) does not fit a {log2_tr_range}-bit range")]
    OutOfRange { x: usize, y: usize, value: i32, log2_tr_range: u32 },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}
