#![allow(clippy::mutable_key_type)]

pub mod abgroup;
pub mod cli;
pub mod cyclecx;
pub mod cyclemod;
pub mod gfield;
pub mod milnor;
pub mod parse;
pub mod schememod;
pub mod spectra;
