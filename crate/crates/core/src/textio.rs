//! Line-based text formats for the document kinds the tool exchanges:
//! sequence specs, built sequences, tower points, and integer-valued
//! polynomial configurations.
//!
//! Every format opens with a versioned magic line, ignores blank lines and
//! whole-line `#` comments, and round-trips exactly: parsing a rendered
//! document reproduces the value bit for bit. A built-sequence document
//! stores the spec plus the invariants and a digest of the terms rather
//! than raw coordinates; the loader replays the deterministic build and
//! refuses the document if anything stored disagrees with the rebuild, so
//! hand edits cannot smuggle in unverified data.

use crate::dedekind::{ElementBody, ElementSpec, IntConfig};
use crate::error::{Error, Result};
use crate::scalar::{render_rat, Rat};
use crate::stacked::{
    build_prescribed, Continuation, EChain, LevelRecord, SequenceSpec, StackedSequence,
};
use crate::tower::{StepKind, TowerElement, TowerField};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::sync::Arc;

const SPEC_MAGIC: &str = "padix sequence-spec v1";
const SEQUENCE_MAGIC: &str = "padix sequence v1";
const POINT_MAGIC: &str = "padix point v1";
const CONFIG_MAGIC: &str = "padix int-config v1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the built terms: each term's flattened coordinates in decimal,
/// in order. Pins the exact coordinates without storing them.
pub fn terms_digest(seq: &StackedSequence) -> String {
    let mut h = Sha256::new();
    for t in &seq.terms {
        h.update(b"term");
        for c in t.coords() {
            h.update(b" ");
            h.update(c.to_string().as_bytes());
        }
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// One meaningful line: 1-based line number and (1-based column, token) pairs.
struct Row<'a> {
    line: usize,
    tokens: Vec<(usize, &'a str)>,
}

impl<'a> Row<'a> {
    fn key(&self) -> &'a str {
        self.tokens[0].1
    }

    fn rest(&self) -> &[(usize, &'a str)] {
        &self.tokens[1..]
    }

    /// The fields after the key, or an error naming the expected shape.
    fn fixed<const K: usize>(&self, shape: &str) -> Result<[(usize, &'a str); K]> {
        if self.rest().len() != K {
            return Err(perr(
                self.line,
                self.tokens[0].0,
                format!("expected `{shape}`"),
            ));
        }
        Ok(std::array::from_fn(|i| self.rest()[i]))
    }
}

fn scan(text: &str) -> Vec<Row<'_>> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim_start().starts_with('#') {
            continue;
        }
        let mut tokens = Vec::new();
        let mut col = 0usize;
        for piece in raw.split(' ') {
            if !piece.is_empty() {
                tokens.push((col + 1, piece));
            }
            col += piece.len() + 1;
        }
        if !tokens.is_empty() {
            rows.push(Row {
                line: i + 1,
                tokens,
            });
        }
    }
    rows
}

fn expect_magic(rows: &[Row<'_>], magic: &str) -> Result<()> {
    let first = rows
        .first()
        .ok_or_else(|| perr(1, 1, format!("empty document; expected `{magic}`")))?;
    let line: Vec<&str> = first.tokens.iter().map(|(_, t)| *t).collect();
    if line.join(" ") != magic {
        return Err(perr(
            first.line,
            first.tokens[0].0,
            format!("expected `{magic}`"),
        ));
    }
    Ok(())
}

fn parse_u64(tok: (usize, &str), line: usize) -> Result<u64> {
    tok.1
        .parse::<u64>()
        .map_err(|_| perr(line, tok.0, format!("expected an unsigned integer, got `{}`", tok.1)))
}

fn parse_u32(tok: (usize, &str), line: usize) -> Result<u32> {
    tok.1
        .parse::<u32>()
        .map_err(|_| perr(line, tok.0, format!("expected an unsigned integer, got `{}`", tok.1)))
}

fn parse_biguint(tok: (usize, &str), line: usize) -> Result<BigUint> {
    tok.1
        .parse::<BigUint>()
        .map_err(|_| perr(line, tok.0, format!("expected a nonnegative integer, got `{}`", tok.1)))
}

/// `a` or `a/b` with decimal integers and b positive.
fn parse_rat_token(tok: (usize, &str), line: usize) -> Result<Rat> {
    let bad = || perr(line, tok.0, format!("expected a rational `a/b`, got `{}`", tok.1));
    match tok.1.split_once('/') {
        None => {
            let n = tok.1.parse::<BigInt>().map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
        Some((a, b)) => {
            let num = a.parse::<BigInt>().map_err(|_| bad())?;
            let den = b.parse::<BigInt>().map_err(|_| bad())?;
            if den.is_zero() {
                return Err(perr(line, tok.0, "zero denominator"));
            }
            Ok(Rat::new(num, den))
        }
    }
}

/// Standalone rational literal `a` or `a/b`, for command-line arguments.
pub fn parse_rat_text(src: &str) -> Result<Rat> {
    let trimmed = src.trim();
    if trimmed.is_empty() || trimmed.contains(char::is_whitespace) {
        return Err(perr(1, 1, format!("expected a rational `a/b`, got `{src}`")));
    }
    parse_rat_token((1, trimmed), 1)
}

// ---------------------------------------------------------------------------
// sequence specs

/// Accumulates the body lines shared by spec documents, embedded spec blocks,
/// and config element blocks.
#[derive(Default)]
struct SpecAccum {
    prime: Option<u64>,
    precision: Option<u32>,
    seed: Option<u64>,
    levels: Vec<(u64, u64)>,
    lambda: Option<Vec<Rat>>,
    continuation: Option<Continuation>,
    gauge_sup_line: Option<usize>,
    label: Option<String>,
    allow_label: bool,
}

impl SpecAccum {
    fn set<T>(slot: &mut Option<T>, value: T, row: &Row<'_>) -> Result<()> {
        if slot.is_some() {
            return Err(perr(
                row.line,
                row.tokens[0].0,
                format!("duplicate `{}` line", row.key()),
            ));
        }
        *slot = Some(value);
        Ok(())
    }

    /// Consumes one body line; false means the key is not a spec key.
    fn feed(&mut self, row: &Row<'_>) -> Result<bool> {
        match row.key() {
            "prime" => {
                let [v] = row.fixed::<1>("prime <p>")?;
                Self::set(&mut self.prime, parse_u64(v, row.line)?, row)?;
            }
            "precision" => {
                let [v] = row.fixed::<1>("precision <n>")?;
                Self::set(&mut self.precision, parse_u32(v, row.line)?, row)?;
            }
            "seed" => {
                let [v] = row.fixed::<1>("seed <n>")?;
                Self::set(&mut self.seed, parse_u64(v, row.line)?, row)?;
            }
            "level" => {
                let [f, e] = row.fixed::<2>("level <f> <e>")?;
                self.levels
                    .push((parse_u64(f, row.line)?, parse_u64(e, row.line)?));
            }
            "lambda" => {
                let mut floors = Vec::new();
                for tok in row.rest() {
                    floors.push(parse_rat_token(*tok, row.line)?);
                }
                Self::set(&mut self.lambda, floors, row)?;
            }
            "continuation" => {
                let cont = match row.rest() {
                    [(_, "unbounded")] => Continuation {
                        e_chain: EChain::Unbounded,
                        gauge_sup: None,
                    },
                    [(_, "eventually-constant"), e] => Continuation {
                        e_chain: EChain::EventuallyConstant(parse_u64(*e, row.line)?),
                        gauge_sup: None,
                    },
                    _ => {
                        return Err(perr(
                            row.line,
                            row.tokens[0].0,
                            "expected `continuation unbounded` or `continuation eventually-constant <e>`",
                        ))
                    }
                };
                Self::set(&mut self.continuation, cont, row)?;
            }
            "gauge-sup" => {
                let [v] = row.fixed::<1>("gauge-sup <a/b>")?;
                match &mut self.continuation {
                    None => {
                        return Err(perr(
                            row.line,
                            row.tokens[0].0,
                            "`gauge-sup` requires a preceding `continuation` line",
                        ))
                    }
                    Some(cont) => {
                        if self.gauge_sup_line.is_some() {
                            return Err(perr(row.line, row.tokens[0].0, "duplicate `gauge-sup` line"));
                        }
                        cont.gauge_sup = Some(parse_rat_token(v, row.line)?);
                        self.gauge_sup_line = Some(row.line);
                    }
                }
            }
            "label" if self.allow_label => {
                let [v] = row.fixed::<1>("label <name>")?;
                Self::set(&mut self.label, v.1.to_string(), row)?;
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn finish(self, end_line: usize) -> Result<SequenceSpec> {
        let missing =
            |what: &str| perr(end_line, 1, format!("missing required `{what}` line"));
        let spec = SequenceSpec {
            p: self.prime.ok_or_else(|| missing("prime"))?,
            levels: self.levels,
            lambda: self.lambda,
            precision: self.precision.ok_or_else(|| missing("precision"))?,
            seed: self.seed.ok_or_else(|| missing("seed"))?,
            continuation: self.continuation,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn render_spec_body(out: &mut String, spec: &SequenceSpec) {
    let _ = writeln!(out, "prime {}", spec.p);
    let _ = writeln!(out, "precision {}", spec.precision);
    let _ = writeln!(out, "seed {}", spec.seed);
    for (f, e) in &spec.levels {
        let _ = writeln!(out, "level {f} {e}");
    }
    if let Some(lam) = &spec.lambda {
        let floors: Vec<String> = lam.iter().map(render_rat).collect();
        let _ = writeln!(out, "lambda {}", floors.join(" "));
    }
    if let Some(cont) = &spec.continuation {
        match cont.e_chain {
            EChain::Unbounded => {
                let _ = writeln!(out, "continuation unbounded");
            }
            EChain::EventuallyConstant(e) => {
                let _ = writeln!(out, "continuation eventually-constant {e}");
            }
        }
        if let Some(sup) = &cont.gauge_sup {
            let _ = writeln!(out, "gauge-sup {}", render_rat(sup));
        }
    }
}

pub fn render_sequence_spec(spec: &SequenceSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SPEC_MAGIC}");
    render_spec_body(&mut out, spec);
    out
}

pub fn parse_sequence_spec(text: &str) -> Result<SequenceSpec> {
    let rows = scan(text);
    expect_magic(&rows, SPEC_MAGIC)?;
    let mut accum = SpecAccum::default();
    for row in &rows[1..] {
        if !accum.feed(row)? {
            return Err(perr(
                row.line,
                row.tokens[0].0,
                format!("unknown key `{}`", row.key()),
            ));
        }
    }
    let last_line = rows.last().map_or(1, |r| r.line);
    accum.finish(last_line)
}

// ---------------------------------------------------------------------------
// built sequences

fn render_record(out: &mut String, n: usize, rec: &LevelRecord) {
    let a = rec
        .a_val
        .map_or_else(|| "-".to_string(), |k| k.to_string());
    let cert = match &rec.certificate {
        None => "-".to_string(),
        Some(c) => {
            let verdict = match c.verdict {
                crate::krasner::Verdict::Certified => "certified",
                crate::krasner::Verdict::Refuted => "refuted",
                crate::krasner::Verdict::Unknown => "unknown",
            };
            match c.method {
                Some(m) => format!("{verdict}:{m}"),
                None => verdict.to_string(),
            }
        }
    };
    let _ = writeln!(
        out,
        "record n={n} d={} e={} f={} a={a} cert={cert}",
        rec.d, rec.e, rec.f
    );
}

pub fn render_sequence(seq: &StackedSequence) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SEQUENCE_MAGIC}");
    let _ = writeln!(out, "begin spec");
    render_spec_body(&mut out, &seq.spec);
    let _ = writeln!(out, "end spec");
    for (n, rec) in seq.records.iter().enumerate() {
        render_record(&mut out, n, rec);
    }
    let entries: Vec<String> = seq.gauge.iter().map(render_rat).collect();
    let _ = writeln!(out, "gauge{}{}", if entries.is_empty() { "" } else { " " }, entries.join(" "));
    let _ = writeln!(out, "terms sha256 {}", terms_digest(seq));
    out
}

fn field<'a>(
    row: &Row<'a>,
    tok: (usize, &'a str),
    key: &str,
) -> Result<(usize, &'a str)> {
    match tok.1.split_once('=') {
        Some((k, v)) if k == key => Ok((tok.0 + k.len() + 1, v)),
        _ => Err(perr(
            row.line,
            tok.0,
            format!("expected `{key}=...`, got `{}`", tok.1),
        )),
    }
}

struct StoredRecord {
    line: usize,
    n: u64,
    d: u64,
    e: u64,
    f: u64,
    a: Option<u32>,
    cert: Option<String>,
}

fn parse_record_row(row: &Row<'_>) -> Result<StoredRecord> {
    let [tn, td, te, tf, ta, tc] = row.fixed::<6>("record n=.. d=.. e=.. f=.. a=.. cert=..")?;
    let a_tok = field(row, ta, "a")?;
    let cert_tok = field(row, tc, "cert")?;
    Ok(StoredRecord {
        line: row.line,
        n: parse_u64(field(row, tn, "n")?, row.line)?,
        d: parse_u64(field(row, td, "d")?, row.line)?,
        e: parse_u64(field(row, te, "e")?, row.line)?,
        f: parse_u64(field(row, tf, "f")?, row.line)?,
        a: match a_tok.1 {
            "-" => None,
            _ => Some(parse_u32(a_tok, row.line)?),
        },
        cert: match cert_tok.1 {
            "-" => None,
            s => Some(s.to_string()),
        },
    })
}

fn cert_label(rec: &LevelRecord) -> Option<String> {
    rec.certificate.as_ref().map(|c| {
        let verdict = match c.verdict {
            crate::krasner::Verdict::Certified => "certified",
            crate::krasner::Verdict::Refuted => "refuted",
            crate::krasner::Verdict::Unknown => "unknown",
        };
        match c.method {
            Some(m) => format!("{verdict}:{m}"),
            None => verdict.to_string(),
        }
    })
}

/// The spec block of a sequence document alone, without replaying the build
/// or checking the stored invariants. For callers that override precision or
/// seed and therefore cannot compare against the stored build.
pub fn embedded_spec(text: &str) -> Result<SequenceSpec> {
    let rows = scan(text);
    expect_magic(&rows, SEQUENCE_MAGIC)?;
    let mut it = rows[1..].iter();
    let begin = it
        .next()
        .ok_or_else(|| perr(2, 1, "expected `begin spec`"))?;
    if begin.key() != "begin" || begin.rest().len() != 1 || begin.rest()[0].1 != "spec" {
        return Err(perr(begin.line, begin.tokens[0].0, "expected `begin spec`"));
    }
    let mut accum = SpecAccum::default();
    for row in it {
        if row.key() == "end" {
            row.fixed::<1>("end spec")?;
            return accum.finish(row.line);
        }
        if !accum.feed(row)? {
            return Err(perr(
                row.line,
                row.tokens[0].0,
                format!("unknown key `{}` in spec block", row.key()),
            ));
        }
    }
    Err(perr(
        rows.last().map_or(1, |r| r.line),
        1,
        "unterminated spec block",
    ))
}

/// Replays the embedded spec deterministically and checks every stored
/// invariant against the rebuild; any disagreement rejects the document.
pub fn read_sequence(text: &str) -> Result<StackedSequence> {
    let rows = scan(text);
    expect_magic(&rows, SEQUENCE_MAGIC)?;
    let mut it = rows[1..].iter();

    let begin = it
        .next()
        .ok_or_else(|| perr(2, 1, "expected `begin spec`"))?;
    if begin.key() != "begin" || begin.rest().len() != 1 || begin.rest()[0].1 != "spec" {
        return Err(perr(begin.line, begin.tokens[0].0, "expected `begin spec`"));
    }
    let mut accum = SpecAccum::default();
    let mut spec = None;
    for row in it.by_ref() {
        if row.key() == "end" {
            row.fixed::<1>("end spec")?;
            spec = Some(accum.finish(row.line)?);
            break;
        }
        if !accum.feed(row)? {
            return Err(perr(
                row.line,
                row.tokens[0].0,
                format!("unknown key `{}` in spec block", row.key()),
            ));
        }
    }
    let spec = spec.ok_or_else(|| perr(rows.last().unwrap().line, 1, "unterminated spec block"))?;

    let mut stored_records = Vec::new();
    let mut stored_gauge: Option<Vec<Rat>> = None;
    let mut stored_digest: Option<String> = None;
    for row in it {
        match row.key() {
            "record" => {
                if stored_gauge.is_some() || stored_digest.is_some() {
                    return Err(perr(row.line, row.tokens[0].0, "record lines must precede gauge and terms"));
                }
                stored_records.push(parse_record_row(row)?);
            }
            "gauge" => {
                let mut entries = Vec::new();
                for tok in row.rest() {
                    entries.push(parse_rat_token(*tok, row.line)?);
                }
                if stored_gauge.replace(entries).is_some() {
                    return Err(perr(row.line, row.tokens[0].0, "duplicate `gauge` line"));
                }
            }
            "terms" => {
                let [kind, digest] = row.fixed::<2>("terms sha256 <hex>")?;
                if kind.1 != "sha256" {
                    return Err(perr(row.line, kind.0, "expected `terms sha256 <hex>`"));
                }
                if stored_digest.replace(digest.1.to_string()).is_some() {
                    return Err(perr(row.line, row.tokens[0].0, "duplicate `terms` line"));
                }
            }
            other => {
                return Err(perr(
                    row.line,
                    row.tokens[0].0,
                    format!("unknown key `{other}`"),
                ))
            }
        }
    }
    let last_line = rows.last().map_or(1, |r| r.line);
    let stored_gauge =
        stored_gauge.ok_or_else(|| perr(last_line, 1, "missing `gauge` line"))?;
    let stored_digest =
        stored_digest.ok_or_else(|| perr(last_line, 1, "missing `terms` line"))?;

    let seq = build_prescribed(&spec)?;
    let mismatch = |what: String| {
        Error::InvalidArgument(format!(
            "sequence document does not match its deterministic rebuild: {what}"
        ))
    };
    if stored_records.len() != seq.records.len() {
        return Err(mismatch(format!(
            "{} record lines for {} levels",
            stored_records.len(),
            seq.records.len()
        )));
    }
    for (n, (stored, built)) in stored_records.iter().zip(&seq.records).enumerate() {
        if stored.n != n as u64 {
            return Err(perr(stored.line, 1, format!("records out of order at n={}", stored.n)));
        }
        if (stored.d, stored.e, stored.f, stored.a) != (built.d, built.e, built.f, built.a_val) {
            return Err(mismatch(format!("level {n} invariants differ")));
        }
        if stored.cert != cert_label(built) {
            return Err(mismatch(format!("level {n} certificate differs")));
        }
    }
    if stored_gauge != seq.gauge {
        return Err(mismatch("gauge differs".into()));
    }
    if stored_digest != terms_digest(&seq) {
        return Err(mismatch("terms digest differs".into()));
    }
    Ok(seq)
}

// ---------------------------------------------------------------------------
// tower points

pub fn render_point(x: &TowerElement) -> String {
    let tower = x.tower();
    let mut out = String::new();
    let _ = writeln!(out, "{POINT_MAGIC}");
    let _ = writeln!(out, "prime {}", tower.p());
    let _ = writeln!(out, "precision {}", tower.precision());
    for (i, step) in tower.steps().iter().enumerate() {
        match step.kind() {
            StepKind::Unramified => {
                let _ = writeln!(out, "step unramified {}", step.degree());
            }
            StepKind::Eisenstein => {
                let mut flat = Vec::new();
                for coeff in tower.step_modulus_coords(i) {
                    flat.extend(coeff.into_iter().map(|c| c.to_string()));
                }
                let _ = writeln!(out, "step eisenstein {} {}", step.degree(), flat.join(" "));
            }
        }
    }
    let coords: Vec<String> = x.coords().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "coords {}", coords.join(" "));
    out
}

fn take_row<'r, 'a>(
    it: &mut std::iter::Peekable<std::slice::Iter<'r, Row<'a>>>,
    key: &str,
    last_line: usize,
) -> Result<&'r Row<'a>> {
    let row = it
        .next()
        .ok_or_else(|| perr(last_line, 1, format!("missing `{key}` line")))?;
    if row.key() != key {
        return Err(perr(row.line, row.tokens[0].0, format!("expected `{key}`")));
    }
    Ok(row)
}

pub fn parse_point(text: &str) -> Result<TowerElement> {
    let rows = scan(text);
    expect_magic(&rows, POINT_MAGIC)?;
    let last_line = rows.last().map_or(1, |r| r.line);
    let mut it = rows[1..].iter().peekable();

    let prow = take_row(&mut it, "prime", last_line)?;
    let [ptok] = prow.fixed::<1>("prime <p>")?;
    let p = parse_u64(ptok, prow.line)?;
    let nrow = take_row(&mut it, "precision", last_line)?;
    let [ntok] = nrow.fixed::<1>("precision <n>")?;
    let precision = parse_u32(ntok, nrow.line)?;

    let mut tower: Arc<TowerField> = TowerField::qp(p, precision)?;
    while let Some(row) = it.peek() {
        if row.key() != "step" {
            break;
        }
        let row = it.next().unwrap();
        match row.rest() {
            [(_, "unramified"), ftok] => {
                tower = tower.make_unramified_step(parse_u64(*ftok, row.line)?)?;
            }
            [(_, "eisenstein"), mtok, coords @ ..] => {
                let m = parse_u64(*mtok, row.line)? as usize;
                let dim = tower.dim(tower.n_steps());
                if m < 2 || coords.len() != (m + 1) * dim {
                    return Err(perr(
                        row.line,
                        mtok.0,
                        format!(
                            "eisenstein step of degree {m} needs {} coordinates, got {}",
                            (m + 1) * dim,
                            coords.len()
                        ),
                    ));
                }
                let mut reprs = Vec::with_capacity(m + 1);
                for chunk in coords.chunks(dim) {
                    let vals = chunk
                        .iter()
                        .map(|tok| parse_biguint(*tok, row.line))
                        .collect::<Result<Vec<_>>>()?;
                    reprs.push(tower.from_coords(&vals)?.repr().clone());
                }
                tower = tower.make_eisenstein_step(&reprs)?;
            }
            _ => {
                return Err(perr(
                    row.line,
                    row.tokens[0].0,
                    "expected `step unramified <f>` or `step eisenstein <m> <coords>`",
                ))
            }
        }
    }

    let crow = take_row(&mut it, "coords", last_line)?;
    let coords = crow
        .rest()
        .iter()
        .map(|tok| parse_biguint(*tok, crow.line))
        .collect::<Result<Vec<_>>>()?;
    if let Some(extra) = it.next() {
        return Err(perr(
            extra.line,
            extra.tokens[0].0,
            format!("unexpected `{}` after coords", extra.key()),
        ));
    }
    let expected = tower.dim(tower.n_steps());
    if coords.len() != expected {
        return Err(perr(
            crow.line,
            crow.tokens[0].0,
            format!("expected {expected} coordinates, got {}", coords.len()),
        ));
    }
    tower.from_coords(&coords)
}

// ---------------------------------------------------------------------------
// integer-valued polynomial configurations

/// Point-backed elements have no text form; configs with them are assembled
/// through the library.
pub fn render_int_config(cfg: &IntConfig) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{CONFIG_MAGIC}");
    let mut declared = Vec::new();
    for (p, els) in cfg.assignment() {
        if cfg.nonconjugacy_declared(*p) {
            declared.push(*p);
        }
        for el in els {
            let spec = match &el.body {
                ElementBody::SequenceBacked { spec } => spec,
                ElementBody::AlgebraicTranscendental { .. } => {
                    return Err(Error::Unsupported(format!(
                        "element {} is point-backed and has no text form",
                        el.label
                    )))
                }
            };
            let _ = writeln!(out, "begin element");
            let _ = writeln!(out, "label {}", el.label);
            render_spec_body(&mut out, spec);
            let _ = writeln!(out, "end element");
        }
    }
    if !declared.is_empty() {
        let names: Vec<String> = declared.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "declare-nonconjugate {}", names.join(" "));
    }
    Ok(out)
}

pub fn parse_int_config(text: &str) -> Result<IntConfig> {
    let rows = scan(text);
    expect_magic(&rows, CONFIG_MAGIC)?;
    let mut it = rows[1..].iter();
    let mut elements: Vec<ElementSpec> = Vec::new();
    let mut declared: Vec<u64> = Vec::new();
    while let Some(row) = it.next() {
        match row.key() {
            "begin" => {
                row.fixed::<1>("begin element")?;
                let mut accum = SpecAccum {
                    allow_label: true,
                    ..SpecAccum::default()
                };
                let mut closed = false;
                for inner in it.by_ref() {
                    if inner.key() == "end" {
                        inner.fixed::<1>("end element")?;
                        let label = accum.label.take().ok_or_else(|| {
                            perr(inner.line, 1, "element block is missing a `label` line")
                        })?;
                        elements.push(ElementSpec::sequence(label, accum.finish(inner.line)?)?);
                        closed = true;
                        break;
                    }
                    if !accum.feed(inner)? {
                        return Err(perr(
                            inner.line,
                            inner.tokens[0].0,
                            format!("unknown key `{}` in element block", inner.key()),
                        ));
                    }
                }
                if !closed {
                    return Err(perr(
                        rows.last().unwrap().line,
                        1,
                        "unterminated element block",
                    ));
                }
            }
            "declare-nonconjugate" => {
                if row.rest().is_empty() {
                    return Err(perr(
                        row.line,
                        row.tokens[0].0,
                        "expected `declare-nonconjugate <p> ...`",
                    ));
                }
                for tok in row.rest() {
                    declared.push(parse_u64(*tok, row.line)?);
                }
            }
            other => {
                return Err(perr(
                    row.line,
                    row.tokens[0].0,
                    format!("unknown key `{other}`"),
                ))
            }
        }
    }
    let mut assignment: Vec<(u64, Vec<ElementSpec>)> = Vec::new();
    for el in elements {
        match assignment.iter_mut().find(|(p, _)| *p == el.p) {
            Some((_, list)) => list.push(el),
            None => assignment.push((el.p, vec![el])),
        }
    }
    IntConfig::new(assignment, declared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dedekind::class_group;
    use crate::scalar::rat;
    use crate::stacked::verify_stacked;

    fn spec(p: u64, levels: &[(u64, u64)], precision: u32, seed: u64) -> SequenceSpec {
        SequenceSpec {
            p,
            levels: levels.to_vec(),
            lambda: None,
            precision,
            seed,
            continuation: None,
        }
    }

    #[test]
    fn spec_round_trip() {
        let mut s = spec(2, &[(1, 1), (2, 1), (2, 2), (4, 2)], 32, 7);
        assert_eq!(parse_sequence_spec(&render_sequence_spec(&s)).unwrap(), s);

        s.lambda = Some(vec![rat(1, 1), rat(3, 2), rat(9, 4)]);
        s.continuation = Some(Continuation {
            e_chain: EChain::EventuallyConstant(4),
            gauge_sup: Some(rat(7, 2)),
        });
        assert_eq!(parse_sequence_spec(&render_sequence_spec(&s)).unwrap(), s);

        s.continuation = Some(Continuation {
            e_chain: EChain::Unbounded,
            gauge_sup: None,
        });
        s.lambda = None;
        assert_eq!(parse_sequence_spec(&render_sequence_spec(&s)).unwrap(), s);
    }

    #[test]
    fn spec_parse_accepts_comments_and_blanks() {
        let text = "# spec for the base example\npadix sequence-spec v1\n\nprime 3\nprecision 20\nseed 0\nlevel 1 1\nlevel 1 2\n";
        let s = parse_sequence_spec(text).unwrap();
        assert_eq!(s.p, 3);
        assert_eq!(s.levels, vec![(1, 1), (1, 2)]);
    }

    #[test]
    fn spec_parse_errors_carry_positions() {
        match parse_sequence_spec("nonsense\n") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 1)),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let text = "padix sequence-spec v1\nprime 2\nprecision 20\nseed 0\nlevel 1 1\nlambda 1/x\n";
        match parse_sequence_spec(text) {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (6, 8)),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let text = "padix sequence-spec v1\nprime 2\nprime 3\n";
        match parse_sequence_spec(text) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("duplicate"));
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        let text = "padix sequence-spec v1\nprime 2\nseed 0\nlevel 1 1\n";
        match parse_sequence_spec(text) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("precision")),
            other => panic!("expected a parse error, got {other:?}"),
        }
        let text = "padix sequence-spec v1\nprime 2\nprecision 20\nseed 0\nlevel 1 1\ngauge-sup 3\n";
        assert!(matches!(parse_sequence_spec(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn semantic_errors_pass_through_validation() {
        let text = "padix sequence-spec v1\nprime 4\nprecision 20\nseed 0\nlevel 1 1\n";
        assert!(matches!(parse_sequence_spec(text), Err(Error::NotPrime(4))));
    }

    #[test]
    fn sequence_round_trip_and_tamper_rejection() {
        let s = spec(2, &[(1, 1), (2, 1), (2, 2)], 24, 5);
        let seq = build_prescribed(&s).unwrap();
        let doc = render_sequence(&seq);
        let loaded = read_sequence(&doc).unwrap();
        assert_eq!(loaded.spec, seq.spec);
        assert_eq!(loaded.gauge, seq.gauge);
        assert_eq!(loaded.terms, seq.terms);
        assert!(verify_stacked(&loaded).pass());

        let tampered = doc.replace("gauge 0 ", "gauge 1 ");
        assert_ne!(tampered, doc);
        assert!(matches!(
            read_sequence(&tampered),
            Err(Error::InvalidArgument(_))
        ));

        let retagged = doc.replace("terms sha256 ", "terms sha256 00");
        assert!(matches!(
            read_sequence(&retagged),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn point_round_trip() {
        let qp = TowerField::qp(2, 8).unwrap();
        let coeffs = vec![
            qp.from_int(&(-2).into()).repr().clone(),
            qp.zero().repr().clone(),
            qp.one().repr().clone(),
        ];
        let k = qp.make_eisenstein_step(&coeffs).unwrap();
        let l = k.make_unramified_step(3).unwrap();
        let x = l.uniformizer().add(&l.unram_generator().unwrap());
        let doc = render_point(&x);
        let back = parse_point(&doc).unwrap();
        assert_eq!(back.coords(), x.coords());
        assert_eq!(back.tower().e(), x.tower().e());
        assert_eq!(render_point(&back), doc);
    }

    #[test]
    fn point_parse_rejects_malformed_documents() {
        assert!(matches!(parse_point("padix point v1\n"), Err(Error::Parse { .. })));
        let text = "padix point v1\nprime 2\nprecision 8\ncoords 1 2\n";
        assert!(matches!(parse_point(text), Err(Error::Parse { .. })));
        let text = "padix point v1\nprime 2\nprecision 8\nstep eisenstein 2 254 0\ncoords 0 1\n";
        assert!(matches!(parse_point(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn config_round_trip_preserves_class_group() {
        let mk = |levels: &[(u64, u64)], e: u64, label: &str| {
            ElementSpec::sequence(
                label,
                SequenceSpec {
                    p: 2,
                    levels: levels.to_vec(),
                    lambda: None,
                    precision: 24,
                    seed: 3,
                    continuation: Some(Continuation {
                        e_chain: EChain::EventuallyConstant(e),
                        gauge_sup: None,
                    }),
                },
            )
            .unwrap()
        };
        let cfg = IntConfig::new(
            vec![(
                2,
                vec![mk(&[(1, 1), (1, 2)], 2, "e2"), mk(&[(1, 1), (1, 2), (1, 4)], 4, "e4")],
            )],
            vec![2],
        )
        .unwrap();
        let doc = render_int_config(&cfg).unwrap();
        let back = parse_int_config(&doc).unwrap();
        assert_eq!(back.support(), vec![2]);
        assert!(back.nonconjugacy_declared(2));
        assert_eq!(
            class_group(&back).unwrap(),
            class_group(&cfg).unwrap()
        );
        assert_eq!(render_int_config(&back).unwrap(), doc);
    }

    #[test]
    fn config_parse_rejects_unlabeled_blocks() {
        let text = "padix int-config v1\nbegin element\nprime 2\nprecision 20\nseed 0\nlevel 1 1\nend element\n";
        match parse_int_config(text) {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("label")),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn digest_fixtures() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        let s1 = build_prescribed(&spec(2, &[(1, 1), (1, 2)], 16, 0)).unwrap();
        let s2 = build_prescribed(&spec(2, &[(1, 1), (1, 2)], 16, 0)).unwrap();
        assert_eq!(terms_digest(&s1), terms_digest(&s2));
    }
}
