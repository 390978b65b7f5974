//! MLS pilot generation and frame assembly.

mod layout;
mod mls;

pub use layout::{embed_pilot, extract_data_positions, pilot_row_dd, FrameLayout, MlsConfig};
pub use mls::{gen_mls, primitive_poly, scale_and_pad, Lfsr, MlsSequence};
