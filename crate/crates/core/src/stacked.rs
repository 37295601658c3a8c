//! Pseudo-convergent sequences with prescribed residue and ramification
//! chains, built level by level inside nested towers.
//!
//! A sequence t_0, t_1, ... is grown by t_n = a_n s_n + t_{n-1}: s_n is a
//! certified primitive element of the level-n tower and a_n = p^k is the
//! smallest power pushing the increment's valuation strictly past both the
//! omega bound of t_{n-1} and the declared valuation floor. That threshold
//! makes the distance gauge strictly increasing, keeps every truncated pair
//! pseudo-convergent, and certifies each (t_n, gauge_n) as a minimal pair.

use crate::error::{Error, Result};
use crate::krasner::{self, OmegaBound, PairCertificate, Verdict};
use crate::linalg::inv_mod;
use crate::poly::Poly;
use crate::scalar::{is_prime, rat_int, render_rat, vp_rational, ExtVal, Rat};
use crate::tower::{TowerElement, TowerField};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use std::sync::Arc;

// candidate budget per level for the primitive element search
const PRIMITIVE_TRIES: u32 = 64;
/// Degree checks during generator selection run at this precision cap, so the
/// chosen sequence does not depend on the session precision once it reaches
/// the cap. Acceptance at the cap guarantees the same degree at any higher
/// precision: relations only disappear as precision grows, and the degree is
/// bounded by the level dimension.
const SELECTION_PRECISION: u32 = 32;

/// Declared continuation of the level chains beyond the built window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EChain {
    EventuallyConstant(u64),
    Unbounded,
}

/// What the infinite completion of the spec promises: how the ramification
/// chain continues, and whether the gauge stays bounded (None = unbounded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Continuation {
    pub e_chain: EChain,
    pub gauge_sup: Option<Rat>,
}

/// Prescription for a truncated sequence: invariant chains per level, an
/// optional valuation floor per transition, precision, and the seed that
/// fixes every generator choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceSpec {
    pub p: u64,
    // (f_n, e_n) per level; level 0 is (1, 1)
    pub levels: Vec<(u64, u64)>,
    // strictly increasing valuation floors, one per transition
    pub lambda: Option<Vec<Rat>>,
    pub precision: u32,
    pub seed: u64,
    // declared infinite continuation; None = raw truncation
    pub continuation: Option<Continuation>,
}

impl SequenceSpec {
    /// Index of the last level.
    pub fn truncation(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_prime(self.p) {
            return Err(Error::NotPrime(self.p));
        }
        if self.levels.is_empty() {
            return Err(Error::InvalidArgument("spec has no levels".into()));
        }
        if self.levels[0] != (1, 1) {
            return Err(Error::InvalidArgument(
                "level 0 must have residue degree 1 and ramification 1".into(),
            ));
        }
        for n in 1..self.levels.len() {
            let (f_prev, e_prev) = self.levels[n - 1];
            let (f_n, e_n) = self.levels[n];
            if f_n % f_prev != 0 || e_n % e_prev != 0 {
                return Err(Error::InvalidArgument(format!(
                    "level {n} invariants ({f_n}, {e_n}) do not extend ({f_prev}, {e_prev})"
                )));
            }
            if e_n * f_n <= e_prev * f_prev {
                return Err(Error::InvalidArgument(format!(
                    "level degrees must strictly increase, but level {n} has degree {}",
                    e_n * f_n
                )));
            }
        }
        if let Some(lam) = &self.lambda {
            if lam.len() != self.truncation() {
                return Err(Error::InvalidArgument(format!(
                    "expected {} valuation floors, got {}",
                    self.truncation(),
                    lam.len()
                )));
            }
            if !lam.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidArgument(
                    "valuation floors must be strictly increasing".into(),
                ));
            }
        }
        if let Some(cont) = &self.continuation {
            let (_, e_last) = *self.levels.last().unwrap();
            if let EChain::EventuallyConstant(e) = cont.e_chain {
                if e == 0 || e % e_last != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "declared constant ramification {e} does not extend the last level's {e_last}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Invariants and construction data of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelRecord {
    pub d: u64,
    pub e: u64,
    pub f: u64,
    // v_p of the scaling constant a_n = p^k; absent at level 0
    pub a_val: Option<u32>,
    // minimal-pair certificate for (t_n, gauge_n); absent at the last level
    pub certificate: Option<PairCertificate>,
}

/// A built truncated sequence: all terms embedded in the final tower, the
/// strictly increasing gauge of pairwise distances, and per-level records.
#[derive(Debug, Clone)]
pub struct StackedSequence {
    pub spec: SequenceSpec,
    pub tower: Arc<TowerField>,
    pub terms: Vec<TowerElement>,
    pub gauge: Vec<Rat>,
    pub records: Vec<LevelRecord>,
}

fn random_perturbation(tower: &Arc<TowerField>, rng: &mut ChaCha20Rng) -> TowerElement {
    let dim = tower.dim(tower.n_steps());
    let span = BigUint::from(tower.p()) * tower.p();
    let coords: Vec<BigUint> = (0..dim)
        .map(|_| BigUint::from(rng.next_u64()) % &span)
        .collect();
    // scaled by p so the perturbation never changes the candidate's valuation
    tower
        .from_coords(&coords)
        .expect("dimension matches by construction")
        .scale_uint(&BigUint::from(tower.p()))
}

/// Smallest non-negative integer strictly above the threshold; 0 when the
/// threshold is absent (minus infinity).
fn min_exceeding_exponent(threshold: Option<&Rat>) -> u32 {
    match threshold {
        None => 0,
        Some(t) => {
            if t.is_negative() {
                0
            } else {
                (t.floor().to_integer() + 1u32)
                    .to_u32()
                    .expect("threshold exponent fits in u32")
            }
        }
    }
}

/// Builds the sequence prescribed by a spec. Deterministic: the same spec,
/// seed, and precision reproduce the same terms bit for bit.
pub fn build_prescribed(spec: &SequenceSpec) -> Result<StackedSequence> {
    spec.validate()?;
    let cap = spec.precision.min(SELECTION_PRECISION);
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut tower = TowerField::qp(spec.p, spec.precision)?;
    let mut towers = vec![tower.clone()];
    let mut terms = vec![tower.zero()];
    let mut gauge: Vec<Rat> = Vec::new();
    let mut records = vec![LevelRecord {
        d: 1,
        e: 1,
        f: 1,
        a_val: None,
        certificate: None,
    }];
    let last = spec.truncation();
    let mut omega_prev = OmegaBound::NegInfinity;

    for n in 1..=last {
        let (f_prev, e_prev) = spec.levels[n - 1];
        let (f_n, e_n) = spec.levels[n];
        if f_n > f_prev {
            tower = tower.make_unramified_step(f_n / f_prev)?;
        }
        if e_n > e_prev {
            let m = (e_n / e_prev) as usize;
            let pi_prev = tower.uniformizer();
            let mut coeffs = vec![pi_prev.neg().repr().clone()];
            coeffs.resize(m, tower.zero().repr().clone());
            coeffs.push(tower.one().repr().clone());
            tower = tower.make_eisenstein_step(&coeffs)?;
        }
        towers.push(tower.clone());

        // primitive element: uniformizer plus unramified generator, perturbed
        // until the degree certificate matches the level dimension
        let d_n = e_n * f_n;
        let base = {
            let pi = tower.uniformizer();
            match tower.unram_generator() {
                Some(u) => pi.add(&u),
                None => pi,
            }
        };
        let mut chosen = None;
        for attempt in 0..PRIMITIVE_TRIES {
            let cand = if attempt == 0 {
                base.clone()
            } else {
                base.add(&random_perturbation(&tower, &mut rng))
            };
            if cand.is_precision_zero() {
                continue;
            }
            match cand.degree_at_precision(cap) {
                Ok(d) if d == d_n => {
                    chosen = Some(cand);
                    break;
                }
                Ok(_) | Err(Error::PrecisionInsufficient { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        let s_n = chosen.ok_or(Error::PrimitiveElementSearchExhausted {
            level: n,
            tries: PRIMITIVE_TRIES,
        })?;
        let v_s = s_n.valuation()?;

        let mut threshold: Option<Rat> = match &omega_prev {
            OmegaBound::NegInfinity => None,
            OmegaBound::Finite(w) => Some(w - &v_s),
        };
        if let Some(lam) = &spec.lambda {
            let floor = &lam[n - 1] - &v_s;
            threshold = Some(match threshold {
                Some(t) if t >= floor => t,
                _ => floor,
            });
        }
        let k = min_exceeding_exponent(threshold.as_ref());
        let delta = rat_int(k as i64) + &v_s;
        if delta >= rat_int(spec.precision as i64) {
            return Err(Error::PrecisionInsufficient {
                what: format!("increment at level {n}"),
                have: spec.precision,
                need: k + 4,
            });
        }

        let a_n = BigUint::from(spec.p).pow(k);
        let t_prev = terms[n - 1].embed_into(&tower)?;
        let t_n = s_n.scale_uint(&a_n).add(&t_prev);
        debug_assert_eq!(t_n.sub(&t_prev).valuation().ok(), Some(delta.clone()));
        debug_assert!(gauge.last().map_or(true, |g| *g < delta));

        // certify the pair completed by this increment
        let cert = krasner::certify_minimal_pair(&terms[n - 1], &delta, None)?;
        debug_assert_eq!(cert.verdict, Verdict::Certified);
        records[n - 1].certificate = Some(cert);
        gauge.push(delta);
        records.push(LevelRecord {
            d: d_n,
            e: e_n,
            f: f_n,
            a_val: Some(k),
            certificate: None,
        });
        terms.push(t_n.clone());
        if n < last {
            omega_prev = krasner::omega(&t_n)?;
        }
    }

    let final_tower = towers.last().unwrap().clone();
    let terms = terms
        .into_iter()
        .map(|t| t.embed_into(&final_tower))
        .collect::<Result<Vec<_>>>()?;
    Ok(StackedSequence {
        spec: spec.clone(),
        tower: final_tower,
        terms,
        gauge,
        records,
    })
}

/// One verification line: a named check, whether it passed, and the values
/// it saw.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn push_check(checks: &mut Vec<CheckResult>, name: String, pass: bool, detail: String) {
    checks.push(CheckResult { name, pass, detail });
}

/// Re-checks a sequence from scratch: recomputed degrees against the records,
/// strict growth of degrees and gauge, the full pairwise distance law, the
/// minimal-pair certificates, and the per-pair distinguished status. Failures
/// are reported, never raised.
pub fn verify_stacked(seq: &StackedSequence) -> VerifyReport {
    let mut checks = Vec::new();
    let n_terms = seq.terms.len();
    let shape_ok = n_terms == seq.records.len() && n_terms == seq.gauge.len() + 1 && n_terms > 0;
    push_check(
        &mut checks,
        "shape".into(),
        shape_ok,
        format!(
            "{} terms, {} records, {} gauge entries",
            n_terms,
            seq.records.len(),
            seq.gauge.len()
        ),
    );
    if !shape_ok {
        return VerifyReport { checks };
    }

    let mut degrees = Vec::new();
    for (n, t) in seq.terms.iter().enumerate() {
        match t.degree_over_qp() {
            Ok(d) => {
                push_check(
                    &mut checks,
                    format!("degree at level {n}"),
                    d == seq.records[n].d,
                    format!("computed {d}, recorded {}", seq.records[n].d),
                );
                degrees.push(Some(d));
            }
            Err(e) => {
                push_check(&mut checks, format!("degree at level {n}"), false, e.to_string());
                degrees.push(None);
            }
        }
    }
    let strict = degrees.windows(2).all(|w| match (&w[0], &w[1]) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    });
    push_check(
        &mut checks,
        "degrees strictly increasing".into(),
        strict,
        format!("{degrees:?}"),
    );

    push_check(
        &mut checks,
        "gauge strictly increasing".into(),
        seq.gauge.windows(2).all(|w| w[0] < w[1]),
        seq.gauge
            .iter()
            .map(render_rat)
            .collect::<Vec<_>>()
            .join(", "),
    );

    for m in 0..n_terms {
        for n in m + 1..n_terms {
            let name = format!("pairwise distance ({m},{n})");
            match seq.terms[n].sub(&seq.terms[m]).valuation() {
                Ok(v) => push_check(
                    &mut checks,
                    name,
                    v == seq.gauge[m],
                    format!("v = {}, gauge = {}", render_rat(&v), render_rat(&seq.gauge[m])),
                ),
                Err(e) => push_check(&mut checks, name, false, e.to_string()),
            }
        }
    }

    for n in 0..n_terms - 1 {
        let name = format!("minimal pair at level {n}");
        match krasner::certify_minimal_pair(&seq.terms[n], &seq.gauge[n], None) {
            Ok(cert) => push_check(
                &mut checks,
                name,
                cert.verdict == Verdict::Certified,
                format!(
                    "{:?} via {}",
                    cert.verdict,
                    cert.method.unwrap_or("no cited condition")
                ),
            ),
            Err(e) => push_check(&mut checks, name, false, e.to_string()),
        }
    }

    for n in 0..n_terms - 1 {
        let name = format!("distinguished status ({n},{})", n + 1);
        match krasner::check_distinguished_necessary(&seq.terms[n], &seq.terms[n + 1], None) {
            Ok(report) => {
                let detail = report
                    .conditions
                    .iter()
                    .map(|c| format!("{}: {}", c.name, c.status))
                    .collect::<Vec<_>>()
                    .join("; ");
                push_check(
                    &mut checks,
                    name,
                    report.overall.verdict != Verdict::Refuted,
                    detail,
                );
            }
            Err(e) => push_check(&mut checks, name, false, e.to_string()),
        }
    }

    VerifyReport { checks }
}

/// What the declared continuation says about the induced valuation ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    // ramification eventually constant: the value group is discrete
    DVRDiscrete(u64),
    NonDiscrete,
    // raw truncation with no declared continuation
    Indeterminate,
}

/// Classifies from the declared continuation only; the finite window never
/// extrapolates.
pub fn classify(seq: &StackedSequence) -> Classification {
    match &seq.spec.continuation {
        None => Classification::Indeterminate,
        Some(c) => match c.e_chain {
            EChain::EventuallyConstant(e) => Classification::DVRDiscrete(e),
            EChain::Unbounded => Classification::NonDiscrete,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BreadthVerdict {
    // gauge declared unbounded: no nonzero element exceeds every gauge entry
    Zero,
    // gauge bounded: everything of valuation above the bound lies in the breadth
    NonZero { bound: Rat },
    // no declared continuation: only the truncated gauge is known
    TruncationOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreadthReport {
    pub last_gauge: Option<Rat>,
    pub verdict: BreadthVerdict,
}

pub fn breadth_report(seq: &StackedSequence) -> BreadthReport {
    let verdict = match &seq.spec.continuation {
        None => BreadthVerdict::TruncationOnly,
        Some(c) => match &c.gauge_sup {
            None => BreadthVerdict::Zero,
            Some(bound) => BreadthVerdict::NonZero {
                bound: bound.clone(),
            },
        },
    };
    BreadthReport {
        last_gauge: seq.gauge.last().cloned(),
        verdict,
    }
}

/// Valuation of a rational-coefficient polynomial at the deepest usable
/// levels of the window: evaluated where the level degree exceeds deg(f),
/// with two further levels re-checked for agreement.
pub fn stabilized_poly_valuation(seq: &StackedSequence, f: &Poly<Rat>) -> Result<Rat> {
    let deg = f
        .degree()
        .ok_or_else(|| Error::InvalidArgument("the zero polynomial has no stabilized valuation".into()))?
        as u64;
    let n0 = seq
        .records
        .iter()
        .position(|r| r.d > deg)
        .ok_or(Error::WindowTooShort { needed: deg })?;
    if n0 + 2 >= seq.terms.len() {
        return Err(Error::WindowTooShort { needed: deg });
    }
    let first = poly_valuation_at(f, &seq.terms[n0])?;
    for i in n0 + 1..=n0 + 2 {
        let again = poly_valuation_at(f, &seq.terms[i])?;
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

/// Exact valuation of f(x) for f with rational coefficients: a power of p is
/// factored out so the remaining coefficients are p-integral, and those embed
/// through unit denominators.
fn poly_valuation_at(f: &Poly<Rat>, x: &TowerElement) -> Result<Rat> {
    let (acc, shift) = poly_value_scaled(f, x)?;
    Ok(acc.valuation()? + Rat::from_integer(shift))
}

/// Value of (p^-k f)(x) where k makes the scaled coefficients p-integral with
/// at least one unit among them, together with k. The input must be nonzero.
pub(crate) fn poly_value_scaled(f: &Poly<Rat>, x: &TowerElement) -> Result<(TowerElement, BigInt)> {
    let tower = x.tower();
    let p = tower.p();
    let mut shift: Option<BigInt> = None;
    for c in f.coeffs() {
        if let ExtVal::Finite(v) = vp_rational(c, p)? {
            debug_assert!(v.denom().is_one());
            let vi = v.to_integer();
            shift = Some(match shift {
                None => vi,
                Some(s) => s.min(vi),
            });
        }
    }
    let shift = shift.expect("nonzero polynomial has a nonzero coefficient");
    let scale = Rat::from_integer(BigInt::from(p)).pow(
        shift
            .to_i32()
            .expect("power-of-p shift fits in i32"),
    );
    let pn_int = BigInt::from(tower.modulus_pn().clone());
    let mut acc = tower.zero();
    for c in f.coeffs().iter().rev() {
        let scaled = c / &scale;
        let num = ((scaled.numer() % &pn_int) + &pn_int) % &pn_int;
        let den = ((scaled.denom() % &pn_int) + &pn_int) % &pn_int;
        let den_inv = inv_mod(
            &den.to_biguint().expect("reduced denominator is non-negative"),
            tower.modulus_pn(),
        );
        let coeff = tower
            .from_uint(&num.to_biguint().expect("reduced numerator is non-negative"))
            .mul(&tower.from_uint(&den_inv));
        acc = acc.mul(x).add(&coeff);
    }
    Ok((acc, shift))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    // all compared invariants and samples agree; not a proof of equivalence
    ConsistentWithEquivalent,
    NotEquivalent { witness: String },
}

/// Compares two sequences over the same prime: the degree and gauge lists on
/// the common window, then stabilized valuations of the sample polynomials.
/// Any mismatch refutes equivalence; agreement is only consistency.
pub fn equivalence_check(
    s1: &StackedSequence,
    s2: &StackedSequence,
    sample_polys: &[Poly<Rat>],
) -> Result<Equivalence> {
    if s1.spec.p != s2.spec.p {
        return Err(Error::InvalidArgument(
            "sequences are over different primes".into(),
        ));
    }
    let levels = s1.records.len().min(s2.records.len());
    for n in 0..levels {
        if s1.records[n].d != s2.records[n].d {
            return Ok(Equivalence::NotEquivalent {
                witness: format!(
                    "degree invariant differs at level {n}: {} vs {}",
                    s1.records[n].d, s2.records[n].d
                ),
            });
        }
    }
    let gauges = s1.gauge.len().min(s2.gauge.len());
    for n in 0..gauges {
        if s1.gauge[n] != s2.gauge[n] {
            return Ok(Equivalence::NotEquivalent {
                witness: format!(
                    "gauge differs at level {n}: {} vs {}",
                    render_rat(&s1.gauge[n]),
                    render_rat(&s2.gauge[n])
                ),
            });
        }
    }
    for f in sample_polys {
        let w1 = stabilized_poly_valuation(s1, f)?;
        let w2 = stabilized_poly_valuation(s2, f)?;
        if w1 != w2 {
            return Ok(Equivalence::NotEquivalent {
                witness: format!(
                    "stabilized valuation of {} differs: {} vs {}",
                    rat_poly_label(f),
                    render_rat(&w1),
                    render_rat(&w2)
                ),
            });
        }
    }
    Ok(Equivalence::ConsistentWithEquivalent)
}

/// Human-readable label of a rational-coefficient polynomial.
pub fn rat_poly_label(f: &Poly<Rat>) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, c) in f.coeffs().iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let sign_neg = c.is_negative();
        let mag = if sign_neg { -c } else { c.clone() };
        if out.is_empty() {
            if sign_neg {
                out.push('-');
            }
        } else if sign_neg {
            out.push('-');
        } else {
            out.push('+');
        }
        let show_coeff = !mag.is_one() || i == 0;
        if show_coeff {
            out.push_str(&render_rat(&mag));
        }
        if i > 0 {
            if show_coeff {
                out.push('*');
            }
            out.push('X');
            if i > 1 {
                out.push_str(&format!("^{i}"));
            }
        }
    }
    out
}
