//! Deterministic run reports: a fixed header naming the tool version,
//! prime, resolved precision and seed, and the input digest, followed by
//! named machine-readable records, `#` summary lines for people, and a
//! final status line. Rendering is byte-stable; nothing time- or
//! path-dependent ever enters a report.

use crate::error::Error;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReportStatus {
    Ok,
    Failed { kind: String, message: String },
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub prime: String,
    pub precision: String,
    pub seed: String,
    pub input_digest: String,
    records: Vec<String>,
    status: ReportStatus,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Report {
        Report {
            command: command.into(),
            prime: "-".into(),
            precision: "-".into(),
            seed: "-".into(),
            input_digest: "-".into(),
            records: Vec::new(),
            status: ReportStatus::Ok,
        }
    }

    /// One named record line. Fields must not contain newlines.
    pub fn record(&mut self, name: &str, fields: impl AsRef<str>) {
        let fields = fields.as_ref();
        debug_assert!(!name.contains('\n') && !fields.contains('\n'));
        if fields.is_empty() {
            self.records.push(format!("record {name}"));
        } else {
            self.records.push(format!("record {name} {fields}"));
        }
    }

    /// One human summary line, rendered as a `#` comment.
    pub fn note(&mut self, text: impl AsRef<str>) {
        for line in text.as_ref().lines() {
            self.records.push(format!("# {line}"));
        }
    }

    pub fn fail(&mut self, error: &Error) {
        let message = error.to_string().replace('\n', " ");
        self.record(
            "error",
            format!("kind={} message={message}", error_kind(error)),
        );
        if let Some(n) = retry_precision(error) {
            self.record("retry-precision", n.to_string());
            self.note(format!("retry with --precision {n}"));
        }
        self.note(format!("error: {message}"));
        self.status = ReportStatus::Failed {
            kind: error_kind(error).into(),
            message,
        };
    }

    pub fn status(&self) -> &ReportStatus {
        &self.status
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "padix report v1");
        let _ = writeln!(out, "tool {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(out, "command {}", self.command);
        let _ = writeln!(out, "prime {}", self.prime);
        let _ = writeln!(out, "precision {}", self.precision);
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "input sha256 {}", self.input_digest);
        for r in &self.records {
            let _ = writeln!(out, "{r}");
        }
        match &self.status {
            ReportStatus::Ok => {
                let _ = writeln!(out, "status ok");
            }
            ReportStatus::Failed { kind, .. } => {
                let _ = writeln!(out, "status error {kind}");
            }
        }
        out
    }
}

/// Stable machine-readable kind for each error family.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::BelowPrecision { .. } | Error::PrecisionInsufficient { .. } => "precision",
        Error::StabilizationFailure { .. } => "stabilization",
        Error::WindowTooShort { .. } => "window",
        Error::PrimitiveElementSearchExhausted { .. } => "search-exhausted",
        Error::DenominatorVanishes | Error::NonzeroValuation(_) => "domain",
        Error::Refused(_) => "refused",
        Error::UnverifiedNonConjugacy { .. } => "unverified-nonconjugacy",
        Error::Unsupported(_) => "unsupported",
        Error::NotPrime(_)
        | Error::NotEisenstein { .. }
        | Error::NotIrreducible(_)
        | Error::InvalidArgument(_) => "contract",
        Error::Io(_) => "io",
    }
}

/// Suggested retry precision for failures that a deeper session could fix.
pub fn retry_precision(e: &Error) -> Option<u32> {
    match e {
        Error::PrecisionInsufficient { have, need, .. } => Some((*need).max(have.saturating_mul(2))),
        Error::BelowPrecision { precision, .. } => Some(precision.saturating_mul(2)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_byte_stable_and_ordered() {
        let mut r = Report::new("valuate");
        r.prime = "2".into();
        r.precision = "32".into();
        r.seed = "7".into();
        r.input_digest = "ab".into();
        r.record("value", "7/4");
        r.note("w(X^2-5) = 7/4");
        let text = r.render();
        assert_eq!(
            text,
            format!(
                "padix report v1\ntool {}\ncommand valuate\nprime 2\nprecision 32\nseed 7\ninput sha256 ab\nrecord value 7/4\n# w(X^2-5) = 7/4\nstatus ok\n",
                env!("CARGO_PKG_VERSION")
            )
        );
        assert_eq!(text, r.render());
    }

    #[test]
    fn failures_carry_kind_and_retry_hint() {
        let mut r = Report::new("build");
        r.fail(&Error::PrecisionInsufficient {
            what: "increment at level 2".into(),
            have: 16,
            need: 20,
        });
        let text = r.render();
        assert!(text.contains("record error kind=precision"));
        assert!(text.contains("record retry-precision 32"));
        assert!(text.ends_with("status error precision\n"));
        assert!(matches!(r.status(), ReportStatus::Failed { .. }));
    }

    #[test]
    fn kinds_are_stable() {
        assert_eq!(
            error_kind(&Error::Parse {
                line: 1,
                col: 2,
                msg: "x".into()
            }),
            "parse"
        );
        assert_eq!(error_kind(&Error::NotPrime(4)), "contract");
        assert_eq!(retry_precision(&Error::NotPrime(4)), None);
        assert_eq!(
            retry_precision(&Error::BelowPrecision {
                prime: 2,
                precision: 24
            }),
            Some(48)
        );
    }
}
