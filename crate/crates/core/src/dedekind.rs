//! Dedekind and PID classification for rings of integer-valued polynomials
//! pinned at finitely many primes, with class groups computed per prime.
//!
//! A configuration assigns to each supported prime a finite list of valued
//! elements, each presented either as a pseudo-convergent sequence spec with
//! a declared ramification continuation or as a tower point declared
//! transcendental over Q. A sequence-backed element stands for its pseudo
//! limit: the strictly increasing level degrees push that limit outside
//! every finite extension, so transcendence is structural there, while
//! bounded ramification is exactly the declared eventually constant e-chain.
//! The per-prime lists are taken as orbit representatives; that there are
//! finitely many orbits is an assumption the classifier records, not a
//! certificate.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::{is_prime, Rat};
use crate::stacked::{
    build_prescribed, equivalence_check, poly_value_scaled, stabilized_poly_valuation, Continuation,
    EChain, Equivalence, SequenceSpec,
};
use crate::tower::{SubfieldInvariants, TowerElement};
use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive};

/// How one valued element is presented.
#[derive(Debug, Clone)]
pub enum ElementBody {
    SequenceBacked { spec: SequenceSpec },
    AlgebraicTranscendental {
        x: TowerElement,
        // declared, never inferred
        transcendental_over_q: bool,
    },
}

/// One element of a per-prime list, with a label for reports.
#[derive(Debug, Clone)]
pub struct ElementSpec {
    pub p: u64,
    pub body: ElementBody,
    pub label: String,
}

impl ElementSpec {
    pub fn sequence(label: impl Into<String>, spec: SequenceSpec) -> Result<ElementSpec> {
        spec.validate()?;
        Ok(ElementSpec {
            p: spec.p,
            body: ElementBody::SequenceBacked { spec },
            label: label.into(),
        })
    }

    pub fn algebraic(
        label: impl Into<String>,
        x: TowerElement,
        transcendental_over_q: bool,
    ) -> Result<ElementSpec> {
        x.minimal_polynomial()?;
        Ok(ElementSpec {
            p: x.tower().p(),
            body: ElementBody::AlgebraicTranscendental {
                x,
                transcendental_over_q,
            },
            label: label.into(),
        })
    }

    /// Ramification index of the element: the declared eventual value for a
    /// sequence, the stored-level value for a point.
    pub fn e_p(&self) -> Result<u64> {
        match &self.body {
            ElementBody::SequenceBacked { spec } => match &spec.continuation {
                Some(Continuation {
                    e_chain: EChain::EventuallyConstant(e),
                    ..
                }) => Ok(*e),
                _ => Err(Error::InvalidArgument(format!(
                    "element {} declares no eventually constant ramification chain",
                    self.label
                ))),
            },
            ElementBody::AlgebraicTranscendental { x, .. } => match x.subfield_invariants()? {
                SubfieldInvariants::Known { e, .. } => Ok(e),
                SubfieldInvariants::Unknown => Err(Error::Unsupported(format!(
                    "the stored levels do not determine the ramification index of element {}",
                    self.label
                ))),
            },
        }
    }
}

/// Finite-support assignment of element lists to primes, plus the primes
/// whose lists are declared pairwise non-conjugate.
#[derive(Debug, Clone)]
pub struct IntConfig {
    assignment: Vec<(u64, Vec<ElementSpec>)>,
    declared_nonconjugate: Vec<u64>,
}

impl IntConfig {
    pub fn new(
        assignment: Vec<(u64, Vec<ElementSpec>)>,
        declared_nonconjugate: Vec<u64>,
    ) -> Result<IntConfig> {
        for (i, (p, els)) in assignment.iter().enumerate() {
            if !is_prime(*p) {
                return Err(Error::NotPrime(*p));
            }
            if assignment[..i].iter().any(|(q, _)| q == p) {
                return Err(Error::InvalidArgument(format!(
                    "prime {p} appears twice in the support"
                )));
            }
            if els.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "the element list at prime {p} is empty"
                )));
            }
            if let Some(el) = els.iter().find(|el| el.p != *p) {
                return Err(Error::InvalidArgument(format!(
                    "element {} is over prime {} but listed at {p}",
                    el.label, el.p
                )));
            }
        }
        Ok(IntConfig {
            assignment,
            declared_nonconjugate,
        })
    }

    pub fn support(&self) -> Vec<u64> {
        self.assignment.iter().map(|(p, _)| *p).collect()
    }

    pub fn assignment(&self) -> &[(u64, Vec<ElementSpec>)] {
        &self.assignment
    }

    pub fn nonconjugacy_declared(&self, p: u64) -> bool {
        self.declared_nonconjugate.contains(&p)
    }

    /// The same configuration with precision or seed replaced on every
    /// sequence-backed element. Point-backed elements are unaffected.
    pub fn with_overrides(mut self, precision: Option<u32>, seed: Option<u64>) -> IntConfig {
        for (_, els) in &mut self.assignment {
            for el in els {
                if let ElementBody::SequenceBacked { spec } = &mut el.body {
                    if let Some(n) = precision {
                        spec.precision = n;
                    }
                    if let Some(s) = seed {
                        spec.seed = s;
                    }
                }
            }
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conjugacy {
    Conjugate,
    NotConjugate,
    IndistinguishableAtTruncation,
}

/// Conjugacy over Q_p as far as the presentations decide it: equality of
/// minimal polynomials settles it for two points; differing invariant lists
/// refute it for two sequences, and agreement on the built window is only
/// indistinguishability. Mixed presentations share no deciding protocol and
/// always report indistinguishable.
pub fn conjugacy_check(a: &ElementSpec, b: &ElementSpec) -> Result<Conjugacy> {
    if a.p != b.p {
        return Err(Error::InvalidArgument(
            "conjugacy is only defined over one prime".into(),
        ));
    }
    match (&a.body, &b.body) {
        (
            ElementBody::AlgebraicTranscendental { x, .. },
            ElementBody::AlgebraicTranscendental { x: y, .. },
        ) => {
            let shared = x.tower().precision().min(y.tower().precision());
            let mx = x.reduce_precision(shared).minimal_polynomial()?;
            let my = y.reduce_precision(shared).minimal_polynomial()?;
            if mx.degree() == my.degree() && mx.coeffs() == my.coeffs() {
                Ok(Conjugacy::Conjugate)
            } else {
                Ok(Conjugacy::NotConjugate)
            }
        }
        (
            ElementBody::SequenceBacked { spec },
            ElementBody::SequenceBacked { spec: other },
        ) => {
            let s1 = build_prescribed(spec)?;
            let s2 = build_prescribed(other)?;
            match equivalence_check(&s1, &s2, &[])? {
                Equivalence::NotEquivalent { .. } => Ok(Conjugacy::NotConjugate),
                Equivalence::ConsistentWithEquivalent => {
                    Ok(Conjugacy::IndistinguishableAtTruncation)
                }
            }
        }
        _ => Ok(Conjugacy::IndistinguishableAtTruncation),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DedekindReport {
    pub support: Vec<u64>,
    // (prime, number of listed orbit representatives)
    pub per_prime_counts: Vec<(u64, usize)>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DedekindVerdict {
    Dedekind(DedekindReport),
    NotDedekind { reason: String },
}

/// Checks the refutable fragment of the Dedekind conditions: every element
/// must carry a bounded (eventually constant) ramification declaration and a
/// transcendence-over-Q declaration. Reasons are reported, never raised.
pub fn classify_dedekind(cfg: &IntConfig) -> DedekindVerdict {
    for (_, els) in cfg.assignment() {
        for el in els {
            match &el.body {
                ElementBody::SequenceBacked { spec } => match &spec.continuation {
                    Some(Continuation {
                        e_chain: EChain::EventuallyConstant(_),
                        ..
                    }) => {}
                    Some(Continuation {
                        e_chain: EChain::Unbounded,
                        ..
                    }) => {
                        return DedekindVerdict::NotDedekind {
                            reason: format!(
                                "element {} declares an unbounded ramification chain",
                                el.label
                            ),
                        }
                    }
                    None => {
                        return DedekindVerdict::NotDedekind {
                            reason: format!(
                                "element {} declares no ramification continuation, so bounded \
                                 ramification is not established",
                                el.label
                            ),
                        }
                    }
                },
                ElementBody::AlgebraicTranscendental {
                    transcendental_over_q: false,
                    ..
                } => {
                    return DedekindVerdict::NotDedekind {
                        reason: format!(
                            "element {} is declared algebraic over Q; its valuation overring has \
                             rank two",
                            el.label
                        ),
                    }
                }
                ElementBody::AlgebraicTranscendental { .. } => {}
            }
        }
    }
    DedekindVerdict::Dedekind(DedekindReport {
        support: cfg.support(),
        per_prime_counts: cfg
            .assignment()
            .iter()
            .map(|(p, els)| (*p, els.len()))
            .collect(),
        notes: vec![
            "factorizability holds per queried polynomial by witness construction; finite \
             support makes finite character automatic"
                .into(),
            "per-prime lists are taken as orbit representatives; that the orbit count is \
             finite is assumed, not certified"
                .into(),
        ],
    })
}

/// One per-prime summand Z/torsion Z (+) Z^free_rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSummand {
    pub p: u64,
    pub torsion: u64,
    pub free_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupDesc {
    pub summands: Vec<PrimeSummand>,
}

impl ClassGroupDesc {
    pub fn is_trivial(&self) -> bool {
        self.summands
            .iter()
            .all(|s| s.torsion == 1 && s.free_rank == 0)
    }

    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for s in &self.summands {
            if s.torsion > 1 {
                parts.push(format!("Z/{}Z", s.torsion));
            }
            match s.free_rank {
                0 => {}
                1 => parts.push("Z".into()),
                r => parts.push(format!("Z^{r}")),
            }
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" (+) ")
        }
    }
}

fn ensure_dedekind(cfg: &IntConfig) -> Result<()> {
    match classify_dedekind(cfg) {
        DedekindVerdict::Dedekind(_) => Ok(()),
        DedekindVerdict::NotDedekind { reason } => Err(Error::InvalidArgument(format!(
            "the configuration is not Dedekind: {reason}"
        ))),
    }
}

fn ensure_nonconjugate(cfg: &IntConfig, p: u64, els: &[ElementSpec]) -> Result<()> {
    for i in 0..els.len() {
        for j in i + 1..els.len() {
            match conjugacy_check(&els[i], &els[j])? {
                Conjugacy::NotConjugate => {}
                Conjugacy::Conjugate => {
                    return Err(Error::InvalidArgument(format!(
                        "elements {} and {} at prime {p} are conjugate; the list repeats an orbit",
                        els[i].label, els[j].label
                    )))
                }
                Conjugacy::IndistinguishableAtTruncation => {
                    if !cfg.nonconjugacy_declared(p) {
                        return Err(Error::UnverifiedNonConjugacy {
                            prime: p,
                            detail: format!(
                                "elements {} and {} are indistinguishable at this truncation and \
                                 no pairwise non-conjugacy is declared",
                                els[i].label, els[j].label
                            ),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Class group as a direct sum over the support: at each prime,
/// Z/gcd(e_i)Z (+) Z^(n-1) for the n listed orbit representatives.
pub fn class_group(cfg: &IntConfig) -> Result<ClassGroupDesc> {
    ensure_dedekind(cfg)?;
    let mut summands = Vec::new();
    for (p, els) in cfg.assignment() {
        ensure_nonconjugate(cfg, *p, els)?;
        let mut torsion = 0u64;
        for el in els {
            torsion = num_integer::gcd(torsion, el.e_p()?);
        }
        summands.push(PrimeSummand {
            p: *p,
            torsion,
            free_rank: els.len() - 1,
        });
    }
    Ok(ClassGroupDesc { summands })
}

/// A principal ideal domain exactly when the class group vanishes: one orbit
/// per supported prime, each unramified.
pub fn is_pid(cfg: &IntConfig) -> Result<bool> {
    Ok(class_group(cfg)?.is_trivial())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    // g(alpha)^n / d has valuation zero at every listed element
    Witnessed { n: u64, d: BigUint },
    CannotWitness { reason: String },
}

fn element_poly_valuation(el: &ElementSpec, g: &Poly<Rat>) -> Result<Rat> {
    match &el.body {
        ElementBody::SequenceBacked { spec } => {
            let seq = build_prescribed(spec)?;
            stabilized_poly_valuation(&seq, g)
        }
        ElementBody::AlgebraicTranscendental { x, .. } => {
            let (acc, shift) = poly_value_scaled(g, x)?;
            Ok(acc.valuation()? + Rat::from_integer(shift))
        }
    }
}

/// For integer-coefficient g, the exponent n and constant d making
/// g(alpha)^n / d a unit at every listed element, when one pair works for
/// all of them: n clears the value denominators and d collects p^(n v_p).
/// Two elements at one prime with different values admit no witness.
pub fn factorizability_witness(cfg: &IntConfig, g: &Poly<Rat>) -> Result<Witness> {
    if g.is_zero() {
        return Err(Error::InvalidArgument(
            "the zero polynomial admits no unit witness".into(),
        ));
    }
    if g.coeffs().iter().any(|c| !c.denom().is_one()) {
        return Err(Error::InvalidArgument(
            "witness polynomials take integer coefficients".into(),
        ));
    }
    let mut per_prime: Vec<(u64, Rat)> = Vec::new();
    for (p, els) in cfg.assignment() {
        let mut value: Option<(Rat, &str)> = None;
        for el in els {
            let w = element_poly_valuation(el, g)?;
            debug_assert!(!w.is_negative());
            match &value {
                None => value = Some((w, &el.label)),
                Some((prev, prev_label)) => {
                    if *prev != w {
                        return Ok(Witness::CannotWitness {
                            reason: format!(
                                "elements {prev_label} and {} at prime {p} give values {prev} \
                                 and {w}; no single constant makes both unit",
                                el.label
                            ),
                        });
                    }
                }
            }
        }
        per_prime.push((*p, value.expect("nonempty list").0));
    }
    let mut n = 1u64;
    for (_, w) in &per_prime {
        n = num_integer::lcm(n, w.denom().to_u64().expect("small denominator"));
    }
    let mut d = BigUint::one();
    for (p, w) in &per_prime {
        let exp = (w * Rat::from_integer(n.into()))
            .to_integer()
            .to_u32()
            .expect("small exponent");
        d *= BigUint::from(*p).pow(exp);
    }
    Ok(Witness::Witnessed { n, d })
}
