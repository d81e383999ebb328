#![cfg_attr(all(not(feature = "std"), not(test)), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod channels;
pub mod code_space;
pub mod comb;
pub mod error;
pub mod fidelity;
pub mod fit;
pub mod linalg;
pub mod perturbed_kl;
pub mod pi_ad_codes;
pub mod recovery;

pub use error::{Error, Result};
