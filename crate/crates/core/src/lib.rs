//! Discovery, indexing and application of human-written text
//! perturbations.
//!
//! Tokens observed in corpora are grouped by a customized Soundex key
//! ([`textcore::encode`]) into per-level phonetic indexes
//! ([`index::PhoneticIndex`]). On top of those sit lookup of a token's
//! perturbations ([`query`]), de-perturbation of text ([`normalize`]),
//! ratio-controlled perturbation ([`perturb`]) and timeline analytics
//! ([`analytics`]).

pub mod analytics;
pub mod corpus;
pub mod error;
mod filefmt;
pub mod hash;
pub mod index;
pub mod normalize;
pub mod perturb;
pub mod query;
pub mod textcore;

pub use error::{Error, Result};
