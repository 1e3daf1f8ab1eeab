#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod curves;
pub mod error;
pub mod gadget;
pub mod gaussian;
pub mod instance;
pub mod numfmt;
pub mod optimize;
pub mod rounding;
pub mod sdp;
pub mod verify;

pub use error::{Error, Result};
