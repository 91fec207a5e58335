//! Spec and result documents, the `belief-forge` command line, and the HTTP
//! session API for expert elicitation.

pub mod cli;
pub mod document;
pub mod engine;
pub mod journal;
pub mod service;

pub use document::{parse_result, parse_spec, DocError, MethodName, ResultDocument, SpecDocument};
pub use service::{router, Registry};
