//! Exit statuses and the mapping from library errors onto them.

use std::fmt;

pub const OK: u8 = 0;
pub const FAILURE: u8 = 1;
pub const PARSE: u8 = 2;
pub const PUNCTUALITY: u8 = 3;
pub const AUDIT: u8 = 4;
pub const PROMISE: u8 = 5;

/// An error that already knows its exit status.
#[derive(Debug)]
pub struct Exit {
    pub code: u8,
    pub msg: String,
}

impl fmt::Display for Exit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for Exit {}

pub fn parse_error(msg: impl Into<String>) -> anyhow::Error {
    Exit { code: PARSE, msg: msg.into() }.into()
}

pub fn code_of(err: &anyhow::Error) -> u8 {
    use punctual::Error as E;
    for cause in err.chain() {
        if let Some(x) = cause.downcast_ref::<Exit>() {
            return x.code;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Parse(_) | E::InvalidInstance(_) => PARSE,
                E::PunctualityViolation { .. } | E::OutOfFuel(_) => PUNCTUALITY,
                E::DensityTimeout(_) => AUDIT,
                E::PromiseViolation(_) | E::PreconditionFailed(_) | E::InstanceInconsistent(_) | E::HallViolation(_) => PROMISE,
                E::HorizonExceeded(_) | E::ZeroElement | E::Overflow => FAILURE,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() || cause.downcast_ref::<std::io::Error>().is_some() {
            return PARSE;
        }
    }
    FAILURE
}
