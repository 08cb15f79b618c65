//! C ABI for the simulator: opaque handles and status codes.

pub mod api;

pub use api::*;
