//! Exact arithmetic for p-adic valuation theory.
//!
//! The crate builds finite extensions of the p-adic numbers as explicit
//! towers of unramified and Eisenstein steps, constructs pseudo-convergent
//! sequences with prescribed ramification and residue invariants, evaluates
//! the induced valuations on rational function fields, and classifies the
//! resulting rings of integer-valued polynomials. Every quantity is an exact
//! rational or an integer modulo a declared power of p; there is no floating
//! point anywhere.

pub mod dedekind;
pub mod krasner;
pub mod newton;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod stacked;
pub mod textio;
pub mod tower;
pub mod valdom;

mod linalg;

pub use error::{Error, Result};

mod error {
    use num_rational::BigRational;
    use thiserror::Error;

    /// Errors shared across the crate.
    ///
    /// Precision failures carry enough context for the caller to retry at a
    /// larger precision; contract violations are not retryable.
    #[derive(Debug, Error)]
    pub enum Error {
        /// A value is indistinguishable from zero modulo p^N.
        #[error("element vanishes modulo {prime}^{precision}; its valuation is at least {precision} but it is not provably zero (retry with precision above {precision})")]
        BelowPrecision { prime: u64, precision: u32 },

        /// A computation needs more p-adic digits than the session provides.
        #[error("precision {have} is insufficient for {what} (retry with precision at least {need})")]
        PrecisionInsufficient { what: String, have: u32, need: u32 },

        /// The requested modulus is not a prime number.
        #[error("{0} is not prime")]
        NotPrime(u64),

        /// A defining polynomial fails the Eisenstein test.
        #[error("polynomial is not Eisenstein: coefficient of degree {index} has valuation {valuation}, which violates the constraint {constraint}")]
        NotEisenstein {
            index: usize,
            valuation: String,
            constraint: String,
        },

        /// A defining polynomial is not irreducible over the residue field.
        #[error("polynomial is not irreducible over the residue field: {0}")]
        NotIrreducible(String),

        /// No primitive element was found within the retry budget.
        #[error("primitive element search exhausted after {tries} candidates at level {level}")]
        PrimitiveElementSearchExhausted { level: usize, tries: u32 },

        /// The sequence window has no level deep enough for the query.
        #[error("no level of the sequence window has degree above {needed}; the window is too short for this input")]
        WindowTooShort { needed: u64 },

        /// Re-evaluation at deeper levels disagreed with the first value.
        #[error("valuation failed to stabilize: level {level} gave {first} but level {other_level} gave {second}")]
        StabilizationFailure {
            level: usize,
            other_level: usize,
            first: BigRational,
            second: BigRational,
        },

        /// The denominator of a rational function vanishes at the point.
        #[error("denominator vanishes at the evaluation point (at the working precision)")]
        DenominatorVanishes,

        /// A residue was requested for an element of nonzero valuation.
        #[error("residue requires valuation zero, but the value has valuation {0}")]
        NonzeroValuation(BigRational),

        /// Membership or another query was asked of a handle that cannot
        /// answer it under its declared attributes.
        #[error("query refused: {0}")]
        Refused(String),

        /// Pairwise non-conjugacy could not be established or declared.
        #[error("non-conjugacy unverified for prime {prime}: {detail}")]
        UnverifiedNonConjugacy { prime: u64, detail: String },

        /// The operation is outside the supported range.
        #[error("unsupported: {0}")]
        Unsupported(String),

        /// Malformed input document or expression.
        #[error("parse error at line {line}, column {col}: {msg}")]
        Parse { line: usize, col: usize, msg: String },

        /// A structurally invalid argument.
        #[error("invalid argument: {0}")]
        InvalidArgument(String),

        #[error(transparent)]
        Io(#[from] std::io::Error),
    }

    pub type Result<T> = std::result::Result<T, Error>;
}
