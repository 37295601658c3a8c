//! Valuation domains on the rational function field: valuation, residue, and
//! membership queries for rational functions, backed either by a built
//! pseudo-convergent sequence or by a single algebraic point of a tower.
//!
//! Rational functions are kept normalized (coprime numerator and denominator,
//! monic denominator) and use a sparse text form: terms like `3*X^2`, `-X`,
//! `1/2*X`, with one whitespace-surrounded `/` separating numerator from
//! denominator. A `/` written tightly between two integers is a rational
//! coefficient, so `1/2*X` is (1/2)X while `1 / 2*X` is 1 over 2X.
//!
//! Sequence-backed queries evaluate at the first level whose degree exceeds
//! the input's and re-check two further levels; agreement is exact or the
//! query fails. The pseudo-limit identity v(X - t_n) = gauge_n is exposed
//! here only through rational constants (t_0 = 0 gives w(X) = gauge_0); the
//! general case is the pairwise-distance law checked by sequence
//! verification.

use crate::error::{Error, Result};
use crate::poly::{self, Poly, RatField};
use crate::scalar::Rat;
use crate::stacked::{poly_value_scaled, rat_poly_label, StackedSequence};
use crate::tower::{ResidueElt, SubfieldInvariants, TowerElement, TowerField};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use std::sync::Arc;

/// A quotient of rational-coefficient polynomials, normalized so the parts
/// are coprime and the denominator is monic.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction {
    num: Poly<Rat>,
    den: Poly<Rat>,
}

impl RationalFunction {
    pub fn new(num: Poly<Rat>, den: Poly<Rat>) -> Result<RationalFunction> {
        if den.is_zero() {
            return Err(Error::InvalidArgument(
                "denominator is the zero polynomial".into(),
            ));
        }
        let ring = RatField;
        let (mut num, mut den) = (num, den);
        if !num.is_zero() {
            let g = poly::gcd_monic(&ring, &num, &den);
            if g.degree().unwrap_or(0) > 0 {
                let (qn, rn) = poly::divmod(&ring, &num, &g);
                let (qd, rd) = poly::divmod(&ring, &den, &g);
                debug_assert!(rn.is_zero() && rd.is_zero());
                num = qn;
                den = qd;
            }
        } else {
            den = Poly::constant(&ring, Rat::one());
        }
        let lead = den.leading().expect("nonzero denominator").clone();
        if !lead.is_one() {
            let inv = Rat::one() / &lead;
            num = poly::mul_scalar(&ring, &num, &inv);
            den = poly::mul_scalar(&ring, &den, &inv);
        }
        Ok(RationalFunction { num, den })
    }

    pub fn from_poly(f: Poly<Rat>) -> RationalFunction {
        RationalFunction::new(f, Poly::constant(&RatField, Rat::one()))
            .expect("constant denominator is nonzero")
    }

    pub fn constant(c: Rat) -> RationalFunction {
        RationalFunction::from_poly(Poly::constant(&RatField, c))
    }

    pub fn x() -> RationalFunction {
        RationalFunction::from_poly(Poly::x(&RatField))
    }

    pub fn num(&self) -> &Poly<Rat> {
        &self.num
    }

    pub fn den(&self) -> &Poly<Rat> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        let ring = RatField;
        RationalFunction::new(
            poly::mul(&ring, &self.num, &other.num),
            poly::mul(&ring, &self.den, &other.den),
        )
        .expect("product of nonzero denominators is nonzero")
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        let ring = RatField;
        let num = poly::add(
            &ring,
            &poly::mul(&ring, &self.num, &other.den),
            &poly::mul(&ring, &other.num, &self.den),
        );
        RationalFunction::new(num, poly::mul(&ring, &self.den, &other.den))
            .expect("product of nonzero denominators is nonzero")
    }

    pub fn inv(&self) -> Result<RationalFunction> {
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    /// Canonical text form; parsing it back gives an equal function.
    pub fn render(&self) -> String {
        let num = rat_poly_label(&self.num);
        if self.den.degree() == Some(0) && self.den.leading().map_or(false, |c| c.is_one()) {
            num
        } else {
            format!("{num} / {}", rat_poly_label(&self.den))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokKind {
    Int,
    X,
    Caret,
    Star,
    Plus,
    Minus,
    Slash,
}

#[derive(Debug, Clone)]
struct Tok {
    kind: TokKind,
    start: usize,
    end: usize,
    digits: Option<BigUint>,
}

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let prefix = &src[..pos.min(src.len())];
    let line = 1 + prefix.matches('\n').count();
    let col = pos - prefix.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

fn parse_err(src: &str, pos: usize, msg: impl Into<String>) -> Error {
    let (line, col) = line_col(src, pos);
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = src[start..i].parse::<BigUint>().unwrap();
                toks.push(Tok {
                    kind: TokKind::Int,
                    start,
                    end: i,
                    digits: Some(digits),
                });
            }
            b'X' | b'^' | b'*' | b'+' | b'-' | b'/' => {
                let kind = match b {
                    b'X' => TokKind::X,
                    b'^' => TokKind::Caret,
                    b'*' => TokKind::Star,
                    b'+' => TokKind::Plus,
                    b'-' => TokKind::Minus,
                    _ => TokKind::Slash,
                };
                toks.push(Tok {
                    kind,
                    start: i,
                    end: i + 1,
                    digits: None,
                });
                i += 1;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap();
                return Err(parse_err(src, i, format!("unexpected character {ch:?}")));
            }
        }
    }
    Ok(toks)
}

/// A slash written tightly between two integer tokens is a coefficient
/// fraction; any other slash separates numerator from denominator.
fn is_tight_fraction(toks: &[Tok], i: usize) -> bool {
    i > 0
        && i + 1 < toks.len()
        && toks[i - 1].kind == TokKind::Int
        && toks[i + 1].kind == TokKind::Int
        && toks[i - 1].end == toks[i].start
        && toks[i].end == toks[i + 1].start
}

const MAX_EXPONENT: usize = 100_000;

fn parse_poly_tokens(src: &str, toks: &[Tok], empty_pos: usize) -> Result<Poly<Rat>> {
    if toks.is_empty() {
        return Err(parse_err(src, empty_pos, "expected a polynomial"));
    }
    let ring = RatField;
    let mut terms: Vec<(usize, Rat)> = Vec::new();
    let mut i = 0;
    let mut first = true;
    while i < toks.len() {
        let mut sign = Rat::one();
        match toks[i].kind {
            TokKind::Plus => i += 1,
            TokKind::Minus => {
                sign = -Rat::one();
                i += 1;
            }
            _ if first => {}
            _ => {
                return Err(parse_err(src, toks[i].start, "expected '+' or '-'"));
            }
        }
        first = false;
        if i >= toks.len() {
            return Err(parse_err(src, src.len(), "expected a term after the sign"));
        }
        let mut coeff = Rat::one();
        let mut saw_coeff = false;
        if toks[i].kind == TokKind::Int {
            let numer = toks[i].digits.clone().unwrap();
            let mut denom = BigUint::one();
            i += 1;
            if i < toks.len() && toks[i].kind == TokKind::Slash && is_tight_fraction(toks, i) {
                denom = toks[i + 1].digits.clone().unwrap();
                if denom.is_zero() {
                    return Err(parse_err(
                        src,
                        toks[i + 1].start,
                        "zero denominator in a coefficient",
                    ));
                }
                i += 2;
            }
            coeff = Rat::new(BigInt::from(numer), BigInt::from(denom));
            saw_coeff = true;
            if i < toks.len() && toks[i].kind == TokKind::Star {
                i += 1;
                if i >= toks.len() || toks[i].kind != TokKind::X {
                    let pos = toks.get(i).map_or(src.len(), |t| t.start);
                    return Err(parse_err(src, pos, "expected 'X' after '*'"));
                }
            }
        }
        let mut power = 0usize;
        if i < toks.len() && toks[i].kind == TokKind::X {
            power = 1;
            i += 1;
            if i < toks.len() && toks[i].kind == TokKind::Caret {
                i += 1;
                if i >= toks.len() || toks[i].kind != TokKind::Int {
                    let pos = toks.get(i).map_or(src.len(), |t| t.start);
                    return Err(parse_err(src, pos, "expected an exponent after '^'"));
                }
                power = match toks[i].digits.as_ref().unwrap().to_usize() {
                    Some(k) if k <= MAX_EXPONENT => k,
                    _ => return Err(parse_err(src, toks[i].start, "exponent too large")),
                };
                i += 1;
            }
        } else if !saw_coeff {
            return Err(parse_err(
                src,
                toks[i].start,
                "expected a coefficient or 'X'",
            ));
        }
        terms.push((power, sign * coeff));
    }
    let max_pow = terms.iter().map(|(k, _)| *k).max().unwrap_or(0);
    let mut coeffs = vec![Rat::zero(); max_pow + 1];
    for (k, c) in terms {
        coeffs[k] += c;
    }
    Ok(Poly::new(&ring, coeffs))
}

/// Parses the sparse text form described in the module doc.
pub fn parse_rational_function(src: &str) -> Result<RationalFunction> {
    let toks = tokenize(src)?;
    let mut split = None;
    for (i, t) in toks.iter().enumerate() {
        if t.kind == TokKind::Slash && !is_tight_fraction(&toks, i) {
            if split.is_some() {
                return Err(parse_err(src, t.start, "more than one quotient separator"));
            }
            split = Some(i);
        }
    }
    match split {
        None => {
            let num = parse_poly_tokens(src, &toks, 0)?;
            RationalFunction::new(num, Poly::constant(&RatField, Rat::one()))
        }
        Some(i) => {
            let num = parse_poly_tokens(src, &toks[..i], 0)?;
            let den = parse_poly_tokens(src, &toks[i + 1..], toks[i].end)?;
            RationalFunction::new(num, den)
        }
    }
}

/// Which contraction of the function field a handle queries: rational
/// coefficients or p-adic ones approximated at the working precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefficientField {
    Q,
    QpApprox,
}

#[derive(Debug, Clone)]
pub enum Backing {
    Sequence(StackedSequence),
    AlgebraicPoint {
        x: TowerElement,
        // declared, never inferred
        transcendental_over_q: bool,
    },
}

/// An immutable handle to a valuation of the function field; every query is
/// pure.
#[derive(Debug, Clone)]
pub struct ValuationHandle {
    pub backing: Backing,
    pub field: CoefficientField,
}

impl ValuationHandle {
    pub fn over_sequence(seq: StackedSequence, field: CoefficientField) -> ValuationHandle {
        ValuationHandle {
            backing: Backing::Sequence(seq),
            field,
        }
    }

    /// A handle at one tower point; the point must have a computable minimal
    /// polynomial at the working precision.
    pub fn at_point(
        x: TowerElement,
        transcendental_over_q: bool,
        field: CoefficientField,
    ) -> Result<ValuationHandle> {
        x.minimal_polynomial()?;
        Ok(ValuationHandle {
            backing: Backing::AlgebraicPoint {
                x,
                transcendental_over_q,
            },
            field,
        })
    }
}

/// w(phi(x)) as a difference of numerator and denominator valuations; a
/// denominator vanishing at the working precision is reported as such.
fn value_at(phi: &RationalFunction, x: &TowerElement) -> Result<Rat> {
    let (a0, k1) = poly_value_scaled(&phi.num, x)?;
    let (b0, k2) = poly_value_scaled(&phi.den, x)?;
    let vb = match b0.valuation() {
        Err(Error::BelowPrecision { .. }) => return Err(Error::DenominatorVanishes),
        other => other?,
    };
    let va = a0.valuation()?;
    Ok(va + Rat::from_integer(k1) - (vb + Rat::from_integer(k2)))
}

fn admissible_level(seq: &StackedSequence, phi: &RationalFunction) -> Result<usize> {
    let deg = phi
        .num
        .degree()
        .max(phi.den.degree())
        .expect("nonzero parts") as u64;
    let n0 = seq
        .records
        .iter()
        .position(|r| r.d > deg)
        .ok_or(Error::WindowTooShort { needed: deg })?;
    if n0 + 2 >= seq.terms.len() {
        return Err(Error::WindowTooShort { needed: deg });
    }
    Ok(n0)
}

/// Exact valuation of a rational function in the domain the handle queries.
pub fn valuate(h: &ValuationHandle, phi: &RationalFunction) -> Result<Rat> {
    if phi.is_zero() {
        return Err(Error::InvalidArgument(
            "the zero function has no finite valuation".into(),
        ));
    }
    match &h.backing {
        Backing::AlgebraicPoint { x, .. } => value_at(phi, x),
        Backing::Sequence(seq) => {
            let n0 = admissible_level(seq, phi)?;
            let first = value_at(phi, &seq.terms[n0])?;
            for i in n0 + 1..=n0 + 2 {
                let again = value_at(phi, &seq.terms[i])?;
                if again != first {
                    return Err(Error::StabilizationFailure {
                        level: n0,
                        other_level: i,
                        first,
                        second: again,
                    });
                }
            }
            Ok(first)
        }
    }
}

/// Divides out an exact power of p from every coordinate.
fn exact_p_div(x: &TowerElement, j: u32) -> TowerElement {
    if j == 0 {
        return x.clone();
    }
    let pj = BigUint::from(x.tower().p()).pow(j);
    let coords: Vec<BigUint> = x
        .coords()
        .iter()
        .map(|c| {
            debug_assert!((c % &pj).is_zero());
            c / &pj
        })
        .collect();
    x.tower().from_coords(&coords).expect("dimension preserved")
}

/// Residue of phi(x) for a value of valuation zero: both parts are scaled by
/// a uniformizer power to clear the shared fractional valuation, the exact
/// p-power is divided out, and the two unit residues are divided in the
/// residue field.
fn residue_at(phi: &RationalFunction, x: &TowerElement) -> Result<ResidueElt> {
    let tower = x.tower().clone();
    let (a0, k1) = poly_value_scaled(&phi.num, x)?;
    let (b0, k2) = poly_value_scaled(&phi.den, x)?;
    let vb = match b0.valuation() {
        Err(Error::BelowPrecision { .. }) => return Err(Error::DenominatorVanishes),
        other => other?,
    };
    let va = a0.valuation()?;
    debug_assert_eq!(&va + Rat::from_integer(k1.clone()), &vb + Rat::from_integer(k2.clone()));
    let e = tower.level_invariants(tower.n_steps()).0;
    let scaled = &va * Rat::from_integer(BigInt::from(e));
    debug_assert!(scaled.is_integer());
    let m = scaled.to_integer();
    let e_big = BigInt::from(e);
    let k_pi = ((&e_big - m % &e_big) % &e_big).to_u64().unwrap();
    let mult = tower.uniformizer().pow(k_pi);
    let a1 = a0.mul(&mult);
    let b1 = b0.mul(&mult);
    let frac = Rat::new(BigInt::from(k_pi), BigInt::from(e));
    let j_a = (&va + &frac).to_integer().to_u32().expect("small exponent");
    let j_b = (&vb + &frac).to_integer().to_u32().expect("small exponent");
    let ra = exact_p_div(&a1, j_a).residue();
    let rb = exact_p_div(&b1, j_b).residue();
    Ok(ra.mul(&rb.inv().expect("unit residue is invertible")))
}

/// Residue of a rational function of valuation zero; for sequence backing
/// the residue is re-checked at the next level.
pub fn residue_of(h: &ValuationHandle, phi: &RationalFunction) -> Result<ResidueElt> {
    let w = valuate(h, phi)?;
    if !w.is_zero() {
        return Err(Error::NonzeroValuation(w));
    }
    match &h.backing {
        Backing::AlgebraicPoint { x, .. } => residue_at(phi, x),
        Backing::Sequence(seq) => {
            let n0 = admissible_level(seq, phi)?;
            let first = residue_at(phi, &seq.terms[n0])?;
            let again = residue_at(phi, &seq.terms[n0 + 1])?;
            if first != again {
                return Err(Error::InvalidArgument(format!(
                    "residues at levels {n0} and {} disagree; the sequence does not stabilize this input",
                    n0 + 1
                )));
            }
            Ok(first)
        }
    }
}

/// Whether phi lies in the valuation ring: valuation at least zero.
pub fn member(h: &ValuationHandle, phi: &RationalFunction) -> Result<bool> {
    if let Backing::AlgebraicPoint {
        transcendental_over_q: false,
        ..
    } = &h.backing
    {
        if h.field == CoefficientField::Q {
            return Err(Error::Refused(
                "membership in the rational-coefficient ring at a point algebraic over Q \
                 depends on rank-two values outside this interface; declare the point \
                 transcendental over Q or query the p-adic-coefficient ring"
                    .into(),
            ));
        }
    }
    if phi.is_zero() {
        return Ok(true);
    }
    Ok(valuate(h, phi)? >= Rat::zero())
}

/// Value groups (1/e_n)Z along the handle's levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupChain {
    Declared(Vec<u64>),
    SingleLevel(u64),
    Unknown,
}

/// Residue fields F_{p^{f_n}} along the handle's levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldChain {
    Declared(Vec<u64>),
    SingleLevel(u64),
    Unknown,
}

pub fn value_group_chain(h: &ValuationHandle) -> GroupChain {
    match &h.backing {
        Backing::Sequence(seq) => GroupChain::Declared(seq.records.iter().map(|r| r.e).collect()),
        Backing::AlgebraicPoint { x, .. } => match x.subfield_invariants() {
            Ok(SubfieldInvariants::Known { e, .. }) => GroupChain::SingleLevel(e),
            _ => GroupChain::Unknown,
        },
    }
}

pub fn residue_field_chain(h: &ValuationHandle) -> FieldChain {
    match &h.backing {
        Backing::Sequence(seq) => FieldChain::Declared(seq.records.iter().map(|r| r.f).collect()),
        Backing::AlgebraicPoint { x, .. } => match x.subfield_invariants() {
            Ok(SubfieldInvariants::Known { f, .. }) => FieldChain::SingleLevel(f),
            _ => FieldChain::Unknown,
        },
    }
}

/// Stored ramification data for a compositum bound check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositumReport {
    // e of the first field over Q_p
    pub e1: u64,
    // e of the compositum over the second field
    pub e_rel: u64,
    pub holds: bool,
}

/// Checks e(L | K2) <= e(K1 | Q_p) from stored invariants, where K2 must be
/// a stored level of the compositum tower L and K1 is its own prebuilt
/// tower. The bound is the expected behavior when L is the compositum of K1
/// and K2; the report states what the stored data says.
pub fn ramification_compositum_test(
    k1: &Arc<TowerField>,
    k2: &Arc<TowerField>,
    compositum: &Arc<TowerField>,
) -> Result<CompositumReport> {
    if k1.p() != k2.p() || k2.p() != compositum.p() {
        return Err(Error::Unsupported(
            "compositum test needs all fields over one prime".into(),
        ));
    }
    if !k2.is_prefix_of(compositum.as_ref()) {
        return Err(Error::Unsupported(
            "the second field is not a stored level of the compositum tower".into(),
        ));
    }
    let e1 = k1.level_invariants(k1.n_steps()).0;
    let e_l = compositum.level_invariants(compositum.n_steps()).0;
    let e_k2 = k2.level_invariants(k2.n_steps()).0;
    debug_assert_eq!(e_l % e_k2, 0);
    let e_rel = e_l / e_k2;
    Ok(CompositumReport {
        e1,
        e_rel,
        holds: e_rel <= e1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use crate::stacked::{build_prescribed, SequenceSpec};
    use proptest::prelude::*;

    fn int_poly(coeffs: &[i64]) -> Poly<Rat> {
        Poly::new(&RatField, coeffs.iter().map(|&c| rat_int(c)).collect())
    }

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction {
        RationalFunction::new(int_poly(num), int_poly(den)).unwrap()
    }

    fn ramified_chain(precision: u32) -> StackedSequence {
        build_prescribed(&SequenceSpec {
            p: 5,
            levels: vec![(1, 1), (1, 2), (1, 4), (1, 8), (1, 16)],
            lambda: None,
            precision,
            seed: 0,
            continuation: None,
        })
        .unwrap()
    }

    fn mixed_chain(precision: u32) -> StackedSequence {
        build_prescribed(&SequenceSpec {
            p: 2,
            levels: vec![(1, 1), (2, 1), (2, 2), (4, 2)],
            lambda: None,
            precision,
            seed: 11,
            continuation: None,
        })
        .unwrap()
    }

    #[test]
    fn normalization_cancels_and_scales() {
        let a = rf(&[2, 2], &[2]);
        assert_eq!(a.num(), &int_poly(&[1, 1]));
        assert_eq!(a.den(), &int_poly(&[1]));
        let b = rf(&[-1, 0, 1], &[-1, 1]);
        assert_eq!(b.num(), &int_poly(&[1, 1]));
        assert_eq!(b.den(), &int_poly(&[1]));
        let c = rf(&[0, 1], &[2, 2]);
        assert_eq!(c.den(), &int_poly(&[1, 1]));
        assert_eq!(c.render(), "1/2*X / X+1");
        assert!(matches!(
            RationalFunction::new(int_poly(&[1]), int_poly(&[])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn text_form_round_trips() {
        for s in [
            "0",
            "1",
            "-5",
            "1/2",
            "X",
            "-X",
            "2*X+1",
            "X^2-5",
            "3*X^2+1/2",
            "X^2-5 / X-1",
            "1 / X",
            "X^3+2*X / X^2+1",
            "1/2*X / X+1",
        ] {
            let phi = parse_rational_function(s).unwrap();
            assert_eq!(phi.render(), s, "canonical form of {s:?}");
            assert_eq!(parse_rational_function(&phi.render()).unwrap(), phi);
        }
    }

    #[test]
    fn loose_and_tight_slashes_differ() {
        let tight = parse_rational_function("1/2*X").unwrap();
        assert_eq!(tight, rf(&[0, 1], &[2]));
        let loose = parse_rational_function("1 / 2*X").unwrap();
        assert_eq!(loose, rf(&[1], &[0, 2]));
        let bare = parse_rational_function("X/2").unwrap();
        assert_eq!(bare, tight);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_rational_function("X^a") {
            Err(Error::Parse { line, col, .. }) => assert_eq!((line, col), (1, 3)),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_rational_function("2*") {
            Err(Error::Parse { msg, .. }) => assert!(msg.contains("expected 'X'")),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_rational_function("1 / 2 / 3") {
            Err(Error::Parse { col, .. }) => assert_eq!(col, 7),
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_rational_function("") {
            Err(Error::Parse { .. }) => {}
            other => panic!("expected a parse error, got {other:?}"),
        }
        match parse_rational_function("1 / 0") {
            Err(Error::InvalidArgument(_)) => {}
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn sequence_valuations_match_gauge() {
        let seq = ramified_chain(36);
        let g0 = seq.gauge[0].clone();
        let t1_val = seq.terms[1].valuation().unwrap();
        let h = ValuationHandle::over_sequence(seq, CoefficientField::Q);
        assert_eq!(valuate(&h, &RationalFunction::constant(rat_int(5))).unwrap(), rat_int(1));
        let w_x = valuate(&h, &RationalFunction::x()).unwrap();
        assert_eq!(w_x, g0);
        assert_eq!(w_x, t1_val);
        let inv_x = RationalFunction::x().inv().unwrap();
        assert_eq!(valuate(&h, &inv_x).unwrap(), -g0);
        assert_eq!(valuate(&h, &rf(&[-5, 0, 1], &[1])).unwrap(), rat(7, 4));
        assert_eq!(valuate(&h, &rf(&[-5, 0, 1], &[0, 1])).unwrap(), rat(5, 4));
    }

    #[test]
    fn membership_follows_sign_of_valuation() {
        let h = ValuationHandle::over_sequence(ramified_chain(36), CoefficientField::Q);
        assert!(member(&h, &rf(&[0, 5], &[1])).unwrap());
        assert!(!member(&h, &RationalFunction::constant(rat(1, 5))).unwrap());
        assert!(member(&h, &RationalFunction::x()).unwrap());
        assert!(member(&h, &RationalFunction::constant(Rat::zero())).unwrap());
    }

    #[test]
    fn zero_function_has_no_valuation() {
        let h = ValuationHandle::over_sequence(ramified_chain(36), CoefficientField::Q);
        assert!(matches!(
            valuate(&h, &RationalFunction::constant(Rat::zero())),
            Err(Error::InvalidArgument(_))
        ));
    }

    fn sqrt2_point(precision: u32) -> TowerElement {
        let qp = TowerField::qp(2, precision).unwrap();
        let coeffs = vec![
            qp.from_int(&(-2).into()).repr().clone(),
            qp.zero().repr().clone(),
            qp.one().repr().clone(),
        ];
        let k = qp.make_eisenstein_step(&coeffs).unwrap();
        k.uniformizer()
    }

    #[test]
    fn point_valuations_and_refusal() {
        let x = sqrt2_point(24);
        let h = ValuationHandle::at_point(x.clone(), false, CoefficientField::QpApprox).unwrap();
        assert_eq!(valuate(&h, &RationalFunction::x()).unwrap(), rat(1, 2));
        // (1/2)X^2 evaluates to a unit
        let half_sq = RationalFunction::new(int_poly(&[0, 0, 1]), int_poly(&[2])).unwrap();
        assert_eq!(valuate(&h, &half_sq).unwrap(), rat_int(0));
        assert!(matches!(
            valuate(&h, &rf(&[1], &[-2, 0, 1])),
            Err(Error::DenominatorVanishes)
        ));
        assert!(!member(&h, &rf(&[0, 1], &[2])).unwrap());

        let refused = ValuationHandle::at_point(x.clone(), false, CoefficientField::Q).unwrap();
        assert!(matches!(
            member(&refused, &RationalFunction::x()),
            Err(Error::Refused(_))
        ));
        // valuation-level queries stay available on the same handle
        assert_eq!(valuate(&refused, &RationalFunction::x()).unwrap(), rat(1, 2));

        let declared = ValuationHandle::at_point(x, true, CoefficientField::Q).unwrap();
        assert!(member(&declared, &RationalFunction::x()).unwrap());
    }

    #[test]
    fn residues_of_constants_and_perturbations() {
        let seq = mixed_chain(24);
        let tower = seq.tower.clone();
        let h = ValuationHandle::over_sequence(seq, CoefficientField::Q);
        let one = tower.one().residue();
        assert_eq!(residue_of(&h, &RationalFunction::constant(Rat::one())).unwrap(), one);
        assert_eq!(residue_of(&h, &rf(&[1, 2], &[1])).unwrap(), one);
        match residue_of(&h, &RationalFunction::constant(rat_int(2))) {
            Err(Error::NonzeroValuation(v)) => assert_eq!(v, rat_int(1)),
            other => panic!("expected a nonzero-valuation error, got {other:?}"),
        }
    }

    #[test]
    fn residue_of_x_generates_the_level_residue_field() {
        let seq = mixed_chain(24);
        let f1 = seq.records[1].f;
        let h = ValuationHandle::over_sequence(seq, CoefficientField::Q);
        assert_eq!(valuate(&h, &RationalFunction::x()).unwrap(), rat_int(0));
        let r = residue_of(&h, &RationalFunction::x()).unwrap();
        assert_eq!(r.degree_over_fp(), 2);
        assert!(r.in_subfield(f1));
    }

    #[test]
    fn residue_with_fractional_intermediate_valuations() {
        // at x = sqrt(2): X/(X+2) = 1/(1+sqrt(2)) = sqrt(2)-1, residue 1
        let x = sqrt2_point(24);
        let tower = x.tower().clone();
        let h = ValuationHandle::at_point(x, false, CoefficientField::QpApprox).unwrap();
        let phi = rf(&[0, 1], &[2, 1]);
        assert_eq!(valuate(&h, &phi).unwrap(), rat_int(0));
        assert_eq!(residue_of(&h, &phi).unwrap(), tower.one().residue());
    }

    #[test]
    fn residue_at_unramified_point() {
        let u = TowerField::qp(3, 20)
            .unwrap()
            .make_unramified_step(2)
            .unwrap()
            .unram_generator()
            .unwrap();
        let h = ValuationHandle::at_point(u, false, CoefficientField::QpApprox).unwrap();
        let r = residue_of(&h, &RationalFunction::x()).unwrap();
        assert_eq!(r.degree_over_fp(), 2);
        assert_eq!(residue_of(&h, &rf(&[3, 1], &[1])).unwrap(), r);
    }

    #[test]
    fn chains_for_sequence_backing_are_declared() {
        let h = ValuationHandle::over_sequence(mixed_chain(24), CoefficientField::Q);
        assert_eq!(value_group_chain(&h), GroupChain::Declared(vec![1, 1, 2, 2]));
        assert_eq!(
            residue_field_chain(&h),
            FieldChain::Declared(vec![1, 2, 2, 4])
        );
    }

    #[test]
    fn chains_for_recognized_point() {
        let tower = TowerField::qp(2, 24)
            .unwrap()
            .make_unramified_step(3)
            .unwrap();
        let pi_poly = vec![
            tower.from_int(&(-2).into()).repr().clone(),
            tower.zero().repr().clone(),
            tower.one().repr().clone(),
        ];
        let full = tower.make_eisenstein_step(&pi_poly).unwrap();
        let x = full.uniformizer().add(&full.unram_generator().unwrap());
        let h = ValuationHandle::at_point(x, true, CoefficientField::QpApprox).unwrap();
        assert_eq!(value_group_chain(&h), GroupChain::SingleLevel(2));
        assert_eq!(residue_field_chain(&h), FieldChain::SingleLevel(3));
    }

    #[test]
    fn chains_for_unrecognized_point() {
        // w = sqrt(2) (u - u^2) satisfies w^2 = -6: a ramified quadratic that
        // is not a stored level of the tower over the unramified quadratic
        let tower = TowerField::qp(2, 24)
            .unwrap()
            .make_unramified_step(2)
            .unwrap();
        let pi_poly = vec![
            tower.from_int(&(-2).into()).repr().clone(),
            tower.zero().repr().clone(),
            tower.one().repr().clone(),
        ];
        let full = tower.make_eisenstein_step(&pi_poly).unwrap();
        let u = full.unram_generator().unwrap();
        let w = full.uniformizer().mul(&u.sub(&u.mul(&u)));
        let m = w.minimal_polynomial().unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(m.coeffs()[0], BigUint::from(6u32));
        let h = ValuationHandle::at_point(w, true, CoefficientField::QpApprox).unwrap();
        assert_eq!(value_group_chain(&h), GroupChain::Unknown);
        assert_eq!(residue_field_chain(&h), FieldChain::Unknown);
    }

    #[test]
    fn compositum_bound_from_stored_invariants() {
        let qp = TowerField::qp(2, 16).unwrap();
        let k1 = {
            let coeffs = vec![
                qp.from_int(&(-2).into()).repr().clone(),
                qp.zero().repr().clone(),
                qp.one().repr().clone(),
            ];
            qp.make_eisenstein_step(&coeffs).unwrap()
        };
        let k2 = qp.make_unramified_step(2).unwrap();
        let compositum = {
            let coeffs = vec![
                k2.from_int(&(-2).into()).repr().clone(),
                k2.zero().repr().clone(),
                k2.one().repr().clone(),
            ];
            k2.make_eisenstein_step(&coeffs).unwrap()
        };
        let r = ramification_compositum_test(&k1, &k2, &compositum).unwrap();
        assert_eq!((r.e_rel, r.e1, r.holds), (2, 2, true));

        let same = ramification_compositum_test(&k2, &k2, &k2).unwrap();
        assert_eq!((same.e_rel, same.e1, same.holds), (1, 1, true));

        let unram = ramification_compositum_test(&k2, &qp, &k2).unwrap();
        assert_eq!((unram.e_rel, unram.e1, unram.holds), (1, 1, true));

        assert!(matches!(
            ramification_compositum_test(&k1, &k1, &k2),
            Err(Error::Unsupported(_))
        ));
        let other_prime = TowerField::qp(3, 16).unwrap();
        assert!(matches!(
            ramification_compositum_test(&other_prime, &qp, &k2),
            Err(Error::Unsupported(_))
        ));
    }

    fn nonzero_linear() -> impl Strategy<Value = Poly<Rat>> {
        (-6i64..7, -6i64..7)
            .prop_filter("nonzero", |(a, b)| *a != 0 || *b != 0)
            .prop_map(|(a, b)| int_poly(&[b, a]))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10))]

        #[test]
        fn valuation_axioms_on_sampled_functions(
            n1 in nonzero_linear(),
            d1 in nonzero_linear(),
            n2 in nonzero_linear(),
            d2 in nonzero_linear(),
        ) {
            let h = ValuationHandle::over_sequence(ramified_chain(36), CoefficientField::Q);
            let phi = RationalFunction::new(n1, d1).unwrap();
            let psi = RationalFunction::new(n2, d2).unwrap();
            let w_phi = valuate(&h, &phi).unwrap();
            let w_psi = valuate(&h, &psi).unwrap();
            prop_assert_eq!(valuate(&h, &phi.mul(&psi)).unwrap(), &w_phi + &w_psi);
            let sum = phi.add(&psi);
            if !sum.is_zero() {
                prop_assert!(valuate(&h, &sum).unwrap() >= w_phi.min(w_psi));
            }
        }
    }
}
