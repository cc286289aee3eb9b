//! File formats and helpers behind the `amra` binary.

pub mod canon;
pub mod files;
pub mod grid;
pub mod pgm;
pub mod pyramid_dir;

use std::fmt;

/// Well-formed input that the command refuses: an uncertified bank, a
/// manifest that does not match its plan. Maps to exit status 1; every
/// other error maps to 2.
#[derive(Debug)]
pub struct Refusal(pub String);

impl fmt::Display for Refusal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Refusal {}

pub fn exit_status(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<Refusal>()) {
        1
    } else {
        2
    }
}
