//! Citation-flow accounting over bibliographic corpora.
//!
//! The library turns publication records and citation links into a
//! country-level "balance of knowledge flows": each citation of a
//! publication is a *benefit* for the countries the publication is made
//! in, and every distinct tracked country on the citing side *earns* one
//! gain per benefit. Gains accumulate into country-by-country flow
//! matrices, per-subject-category balance tables, bilateral breakdowns,
//! and revealed-comparative-advantage style specialization indexes for
//! knowledge outflows (KOSI) and inflows (KISI).
//!
//! Pipeline shape:
//!
//! 1. [`ingest`] parses the canonical on-disk formats into domain records;
//! 2. [`corpus`] validates and indexes them into an immutable [`corpus::Corpus`];
//! 3. [`attribution`] decides which countries each publication is made in;
//! 4. [`flow`] converts citation links into gain records and flow matrices;
//! 5. [`aggregate`] assembles the report tables;
//! 6. [`specialization`] computes KOSI/KISI indexes;
//! 7. [`synth`] and [`oracle`] provide seeded corpus generation and an
//!    independent brute-force reference for verification.
//!
//! All accounting is exact integer arithmetic; rounding exists only in
//! the presentation helpers of [`output`].

pub mod aggregate;
pub mod attribution;
pub mod corpus;
pub mod diagnostics;
pub mod flow;
pub mod ingest;
pub mod oracle;
pub mod output;
pub mod specialization;
pub mod synth;

pub use corpus::{
    build_corpus, Affiliation, AnalysisConfig, CitationLink, Corpus, CountryCode, DocType, IsoDate,
    JournalCategoryMap, PublicationRecord, ScCode, Threshold,
};
pub use diagnostics::ValidationReport;

use thiserror::Error;

/// Errors raised by corpus construction, configuration, and table lookups.
///
/// Lenient per-record parse failures are not errors; they are collected in
/// a [`ValidationReport`] and parsing continues.
#[derive(Debug, Error)]
pub enum BkfError {
    #[error("duplicate publication id `{id}`")]
    DuplicatePublication { id: String },

    #[error("unknown publication id `{id}`")]
    UnknownPublication { id: String },

    #[error("unknown country code `{code}`")]
    UnknownCountry { code: String },

    #[error("unknown subject category `{code}`")]
    UnknownSubjectCategory { code: String },

    #[error("bilateral endpoints must differ, got `{code}` twice")]
    SameCountryPair { code: String },

    #[error("subject category `{sc}` assigned to two macro-areas: `{first}` and `{second}`")]
    ScInMultipleAreas {
        sc: String,
        first: String,
        second: String,
    },

    #[error("invalid configuration: {message}")]
    Config { message: String },

    #[error("invalid generator parameters: {message}")]
    Params { message: String },

    #[error("corpus has {publications} publications, exceeding the oracle bound of {bound}")]
    CorpusTooLarge { publications: usize, bound: usize },
}

impl BkfError {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        BkfError::Config {
            message: message.into(),
        }
    }

    pub(crate) fn params(message: impl Into<String>) -> Self {
        BkfError::Params {
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, BkfError>;
