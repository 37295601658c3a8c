//! Conjugate distances, the omega bound, and certification of minimal and
//! distinguished pairs.
//!
//! The distance data of an element x comes from the Newton polygon of
//! g(Y) = m(x + Y)/Y, where m is the minimal polynomial of x: the roots of g
//! are x' - x over the conjugates x' distinct from x. The supremum of those
//! distances, omega, upper-bounds the critical radius of x; the exact radius
//! is exposed only through this bound plus refutation by explicit witnesses.

use crate::error::{Error, Result};
use crate::newton;
use crate::poly::{self, Poly, Ring};
use crate::scalar::{rat_int, render_rat, Rat};
use crate::tower::{SubfieldInvariants, TowerElement, TowerRing};

/// Supremum of conjugate distances. Degree-1 elements have no conjugates;
/// the empty supremum is recorded as minus infinity so that every strict
/// comparison delta > omega is well-defined.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OmegaBound {
    NegInfinity,
    Finite(Rat),
}

impl OmegaBound {
    /// Whether a known exact valuation lies strictly above the bound.
    pub fn exceeded_by(&self, v: &Rat) -> bool {
        match self {
            OmegaBound::NegInfinity => true,
            OmegaBound::Finite(w) => v > w,
        }
    }

    pub fn render(&self) -> String {
        match self {
            OmegaBound::NegInfinity => "-inf".into(),
            OmegaBound::Finite(w) => render_rat(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    Refuted,
    Unknown,
}

/// Outcome of a pair certification. Certified and Refuted always cite the
/// sufficient condition used and carry a witness; Unknown asserts nothing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCertificate {
    pub verdict: Verdict,
    // omega-bound | degree-vacuous | counterexample
    pub method: Option<&'static str>,
    pub witness: Option<String>,
}

impl PairCertificate {
    fn certified(method: &'static str, witness: String) -> Self {
        PairCertificate {
            verdict: Verdict::Certified,
            method: Some(method),
            witness: Some(witness),
        }
    }

    fn refuted(method: &'static str, witness: String) -> Self {
        PairCertificate {
            verdict: Verdict::Refuted,
            method: Some(method),
            witness: Some(witness),
        }
    }

    fn unknown() -> Self {
        PairCertificate {
            verdict: Verdict::Unknown,
            method: None,
            witness: None,
        }
    }
}

/// Whether closeness of b to a forces the field of a into the field of b.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inclusion {
    // proof of field inclusion
    Implied,
    // asserts nothing
    NotImplied,
}

/// Status of one checkable condition of a distinguished pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionStatus {
    pub name: &'static str,
    pub status: String,
}

/// Per-condition report for a candidate distinguished pair, with the overall
/// certificate for the fragment that is computable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishedReport {
    pub overall: PairCertificate,
    pub conditions: Vec<ConditionStatus>,
}

/// Exact valuation, or a certified floor when the value vanished modulo p^N.
enum ValFloor {
    Exact(Rat),
    AtLeast(u32),
}

impl ValFloor {
    fn exceeds(&self, bound: &OmegaBound) -> bool {
        match (self, bound) {
            (_, OmegaBound::NegInfinity) => true,
            (ValFloor::Exact(v), OmegaBound::Finite(w)) => v > w,
            (ValFloor::AtLeast(n), OmegaBound::Finite(w)) => &rat_int(*n as i64) > w,
        }
    }

    fn at_least(&self, delta: &Rat) -> bool {
        match self {
            ValFloor::Exact(v) => v >= delta,
            ValFloor::AtLeast(n) => &rat_int(*n as i64) >= delta,
        }
    }

    /// Soundly certified strict dominance; false when inconclusive.
    fn strictly_above(&self, other: &ValFloor) -> bool {
        match (self, other) {
            (ValFloor::Exact(u), ValFloor::Exact(v)) => u > v,
            (ValFloor::AtLeast(n), ValFloor::Exact(v)) => &rat_int(*n as i64) > v,
            (_, ValFloor::AtLeast(_)) => false,
        }
    }

    fn render(&self) -> String {
        match self {
            ValFloor::Exact(v) => render_rat(v),
            ValFloor::AtLeast(n) => format!(">= {n}"),
        }
    }
}

fn val_floor(x: &TowerElement) -> Result<ValFloor> {
    match x.valuation() {
        Ok(v) => Ok(ValFloor::Exact(v)),
        Err(Error::BelowPrecision { .. }) => Ok(ValFloor::AtLeast(x.tower().precision())),
        Err(e) => Err(e),
    }
}

/// Puts two elements into one tower, embedding along a prefix when needed.
fn common_tower(a: &TowerElement, b: &TowerElement) -> Result<(TowerElement, TowerElement)> {
    if **a.tower() == **b.tower() {
        return Ok((a.clone(), b.clone()));
    }
    if a.tower().is_prefix_of(b.tower()) {
        return Ok((a.embed_into(b.tower())?, b.clone()));
    }
    if b.tower().is_prefix_of(a.tower()) {
        return Ok((a.clone(), b.embed_into(a.tower())?));
    }
    Err(Error::InvalidArgument(
        "elements do not lie in a common tower".into(),
    ))
}

/// Valuations v(x - x') over the conjugates x' distinct from x, ascending.
///
/// Empty exactly when x has degree 1. The distances are trusted only when
/// they sit strictly below the effective precision of the minimal polynomial.
pub fn conjugate_distances(x: &TowerElement) -> Result<Vec<Rat>> {
    let m = x.minimal_polynomial()?;
    if m.degree() == 1 {
        return Ok(Vec::new());
    }
    let tower = x.tower();
    let ring = TowerRing(tower.clone());
    let m_poly = Poly::new(
        &ring,
        m.coeffs()
            .iter()
            .map(|c| tower.from_uint(c).repr().clone())
            .collect(),
    );
    let shift = Poly::new(&ring, vec![x.repr().clone(), ring.one()]);
    let shifted = poly::compose(&ring, &m_poly, &shift);
    // The constant term is m(x), which vanishes modulo p^N on the nose.
    debug_assert!(ring.is_zero(&shifted.coeffs()[0]));
    let g = Poly::new(&ring, shifted.coeffs()[1..].to_vec());
    debug_assert_eq!(g.degree(), Some(m.degree() - 1));
    if ring.is_zero(&g.coeffs()[0]) {
        // g(0) vanished modulo p^N, so some conjugate distance is at least N
        // and the polygon cannot resolve it. The hint is a floor, not a
        // guaranteed sufficient precision.
        return Err(Error::PrecisionInsufficient {
            what: "conjugate distances".into(),
            have: tower.precision(),
            need: tower.precision() + 4,
        });
    }
    let distances = newton::root_valuations(&ring, &g)?;
    debug_assert_eq!(distances.len(), m.degree() - 1);
    let eff = rat_int(m.effective_precision() as i64);
    if distances.iter().any(|d| d >= &eff) {
        return Err(Error::PrecisionInsufficient {
            what: "conjugate distances".into(),
            have: m.effective_precision(),
            need: tower.precision() + 4,
        });
    }
    Ok(distances)
}

/// Supremum of the conjugate distances of x.
pub fn omega(x: &TowerElement) -> Result<OmegaBound> {
    Ok(match conjugate_distances(x)?.into_iter().max() {
        None => OmegaBound::NegInfinity,
        Some(w) => OmegaBound::Finite(w),
    })
}

/// Certified upper bound for the critical radius of x: omega(x). The exact
/// radius would need an optimum over all lower-degree elements and is not
/// computed.
pub fn delta_upper_bound(x: &TowerElement) -> Result<OmegaBound> {
    omega(x)
}

/// Certifies or refutes that (x, delta) is a minimal pair.
///
/// Certification routes: delta > omega(x), or degree(x) = 1 making the
/// condition vacuous. Refutation requires a caller-supplied candidate c of
/// lower degree with v(x - c) >= delta, verified here. Anything else is
/// Unknown.
pub fn certify_minimal_pair(
    x: &TowerElement,
    delta: &Rat,
    candidate: Option<&TowerElement>,
) -> Result<PairCertificate> {
    let deg_x = x.degree_over_qp()?;
    if let Some(c) = candidate {
        let (xx, cc) = common_tower(x, c)?;
        let deg_c = cc.degree_over_qp()?;
        if deg_c < deg_x {
            let v = val_floor(&xx.sub(&cc))?;
            if v.at_least(delta) {
                return Ok(PairCertificate::refuted(
                    "counterexample",
                    format!(
                        "candidate of degree {} with v(x-c) = {} >= delta = {}",
                        deg_c,
                        v.render(),
                        render_rat(delta)
                    ),
                ));
            }
        }
    }
    if deg_x == 1 {
        return Ok(PairCertificate::certified(
            "degree-vacuous",
            "element has degree 1, so no lower-degree candidate exists".into(),
        ));
    }
    let w = omega(x)?;
    if w.exceeded_by(delta) {
        return Ok(PairCertificate::certified(
            "omega-bound",
            format!("delta = {} > omega = {}", render_rat(delta), w.render()),
        ));
    }
    Ok(PairCertificate::unknown())
}

/// Krasner's criterion: if b is strictly closer to a than any conjugate of
/// a, the field of a embeds into the field of b. NotImplied asserts nothing.
pub fn krasner_inclusion(a: &TowerElement, b: &TowerElement) -> Result<Inclusion> {
    let (aa, bb) = common_tower(a, b)?;
    if aa.repr() == bb.repr() {
        // identical elements: the distance is infinite
        return Ok(Inclusion::Implied);
    }
    let w = omega(&aa)?;
    let v = val_floor(&aa.sub(&bb))?;
    Ok(if v.exceeds(&w) {
        Inclusion::Implied
    } else {
        Inclusion::NotImplied
    })
}

/// Checks the computable fragment of the distinguished-pair conditions for
/// (a, b): degree drop, closeness certification through the omega bound, and
/// the invariant divisibility consequences. The closest-distance condition
/// can only be refuted, by a verified counterexample c closer to a than b.
pub fn check_distinguished_necessary(
    b: &TowerElement,
    a: &TowerElement,
    counterexample: Option<&TowerElement>,
) -> Result<DistinguishedReport> {
    let (bb, aa) = common_tower(b, a)?;
    let deg_b = bb.degree_over_qp()?;
    let deg_a = aa.degree_over_qp()?;
    let mut conditions = Vec::new();

    if deg_b >= deg_a {
        let msg = format!("refuted: degree(b) = {deg_b} is not below degree(a) = {deg_a}");
        conditions.push(ConditionStatus {
            name: "degree",
            status: msg.clone(),
        });
        return Ok(DistinguishedReport {
            overall: PairCertificate::refuted("counterexample", msg),
            conditions,
        });
    }
    conditions.push(ConditionStatus {
        name: "degree",
        status: format!("holds: degree(b) = {deg_b} < degree(a) = {deg_a}"),
    });

    let v_ab = val_floor(&aa.sub(&bb))?;

    // Closest-distance condition: v(a-b) equal to the critical radius of a.
    // Only refutable, by a lower-degree element strictly closer to a.
    let mut closest_refutation = None;
    if let Some(c) = counterexample {
        let cc = if **c.tower() == **aa.tower() {
            c.clone()
        } else {
            c.embed_into(aa.tower())?
        };
        let deg_c = cc.degree_over_qp()?;
        if deg_c < deg_a {
            let v_ac = val_floor(&aa.sub(&cc))?;
            if v_ac.strictly_above(&v_ab) {
                closest_refutation = Some(format!(
                    "refuted: candidate of degree {} with v(a-c) = {} > v(a-b) = {}",
                    deg_c,
                    v_ac.render(),
                    v_ab.render()
                ));
            }
        }
    }
    match &closest_refutation {
        Some(msg) => conditions.push(ConditionStatus {
            name: "closest",
            status: msg.clone(),
        }),
        None => conditions.push(ConditionStatus {
            name: "closest",
            status: "unknown: the exact critical radius is not computed and no refuting candidate was verified"
                .into(),
        }),
    }

    // Minimality of (b, v(a-b)), via the omega bound on b.
    let w_b = omega(&bb)?;
    let minimal_method = if deg_b == 1 {
        Some("degree-vacuous")
    } else if v_ab.exceeds(&w_b) {
        Some("omega-bound")
    } else {
        None
    };
    conditions.push(ConditionStatus {
        name: "minimal",
        status: match minimal_method {
            Some("degree-vacuous") => {
                "certified: b has degree 1, the minimal-pair condition is vacuous".into()
            }
            Some(_) => format!(
                "certified: v(a-b) = {} > omega(b) = {}",
                v_ab.render(),
                w_b.render()
            ),
            None => format!(
                "unknown: v(a-b) = {} does not certifiably exceed omega(b) = {}",
                v_ab.render(),
                w_b.render()
            ),
        },
    });

    // Consequence checks on stored-level invariants once the closeness bound
    // holds: the value group, residue field, and degree of b divide into a.
    let mut inconsistent = false;
    if v_ab.exceeds(&w_b) {
        match (aa.subfield_invariants()?, bb.subfield_invariants()?) {
            (
                SubfieldInvariants::Known { e: ea, f: fa },
                SubfieldInvariants::Known { e: eb, f: fb },
            ) => {
                for (name, x, y) in [
                    ("value-group", eb, ea),
                    ("residue-field", fb, fa),
                    ("subfield-degree", eb * fb, ea * fa),
                ] {
                    let ok = y % x == 0;
                    inconsistent |= !ok;
                    conditions.push(ConditionStatus {
                        name,
                        status: format!(
                            "{}: {} {} {}",
                            if ok { "verified" } else { "failed" },
                            x,
                            if ok { "divides" } else { "does not divide" },
                            y
                        ),
                    });
                }
            }
            _ => conditions.push(ConditionStatus {
                name: "invariants",
                status: "not checkable: stored-level invariants unavailable for a or b".into(),
            }),
        }
    }

    let overall = if let Some(msg) = closest_refutation {
        PairCertificate::refuted("counterexample", msg)
    } else if inconsistent {
        // a certified bound with failed divisibility means the inputs broke a
        // precondition; assert nothing
        PairCertificate::unknown()
    } else if let Some(method) = minimal_method {
        PairCertificate::certified(
            method,
            conditions
                .iter()
                .map(|c| format!("{}: {}", c.name, c.status))
                .collect::<Vec<_>>()
                .join("; "),
        )
    } else {
        PairCertificate::unknown()
    };
    Ok(DistinguishedReport {
        overall,
        conditions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use crate::tower::TowerField;
    use num_bigint::BigUint;
    use std::sync::Arc;

    fn eis_tower(p: u64, precision: u32) -> Arc<TowerField> {
        // X^2 - p
        let qp = TowerField::qp(p, precision).unwrap();
        let coeffs = vec![
            qp.from_int(&(-(p as i64)).into()).repr().clone(),
            qp.zero().repr().clone(),
            qp.one().repr().clone(),
        ];
        qp.make_eisenstein_step(&coeffs).unwrap()
    }

    #[test]
    fn sqrt2_distance_matches_direct_difference() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        assert_eq!(conjugate_distances(&pi).unwrap(), vec![rat(3, 2)]);
        // oracle: the conjugate is -pi, so the distance is v(2 pi)
        let direct = pi.sub(&pi.neg()).valuation().unwrap();
        assert_eq!(direct, rat(3, 2));
        assert_eq!(omega(&pi).unwrap(), OmegaBound::Finite(rat(3, 2)));
    }

    #[test]
    fn sqrtp_distance_for_odd_p() {
        let ext = eis_tower(5, 20);
        let pi = ext.uniformizer();
        assert_eq!(conjugate_distances(&pi).unwrap(), vec![rat(1, 2)]);
        let direct = pi.sub(&pi.neg()).valuation().unwrap();
        assert_eq!(direct, rat(1, 2));
        assert_eq!(
            delta_upper_bound(&pi).unwrap(),
            OmegaBound::Finite(rat(1, 2))
        );
    }

    #[test]
    fn unramified_quadratic_generator_distance_is_zero() {
        let qp = TowerField::qp(3, 20).unwrap();
        let ext = qp.make_unramified_step(2).unwrap();
        let u = ext.unram_generator().unwrap();
        assert_eq!(conjugate_distances(&u).unwrap(), vec![rat(0, 1)]);
        let direct = u.sub(&u.neg()).valuation().unwrap();
        assert_eq!(direct, rat(0, 1));
        assert_eq!(delta_upper_bound(&u).unwrap(), OmegaBound::Finite(rat(0, 1)));
    }

    #[test]
    fn degree_one_element_has_no_conjugates() {
        let qp = TowerField::qp(7, 16).unwrap();
        let x = qp.from_uint(&BigUint::from(10u32));
        assert!(conjugate_distances(&x).unwrap().is_empty());
        assert_eq!(omega(&x).unwrap(), OmegaBound::NegInfinity);
    }

    #[test]
    fn quartic_uniformizer_distances() {
        // pi with pi^4 = 2: conjugate distances {3/4, 3/4, 5/4}
        let lvl1 = eis_tower(2, 28);
        let pi1 = lvl1.uniformizer();
        let coeffs = vec![
            pi1.neg().repr().clone(),
            lvl1.zero().repr().clone(),
            lvl1.one().repr().clone(),
        ];
        let lvl2 = lvl1.make_eisenstein_step(&coeffs).unwrap();
        let pi2 = lvl2.uniformizer();
        assert_eq!(
            conjugate_distances(&pi2).unwrap(),
            vec![rat(3, 4), rat(3, 4), rat(5, 4)]
        );
        assert_eq!(omega(&pi2).unwrap(), OmegaBound::Finite(rat(5, 4)));
    }

    #[test]
    fn minimal_pair_certified_by_omega_bound() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        let cert = certify_minimal_pair(&pi, &rat(2, 1), None).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        assert_eq!(cert.method, Some("omega-bound"));
        assert!(cert.witness.is_some());
    }

    #[test]
    fn minimal_pair_vacuous_for_base_elements() {
        let qp = TowerField::qp(7, 16).unwrap();
        let x = qp.from_uint(&BigUint::from(3u32));
        let cert = certify_minimal_pair(&x, &rat(100, 1), None).unwrap();
        assert_eq!(cert.verdict, Verdict::Certified);
        assert_eq!(cert.method, Some("degree-vacuous"));
    }

    #[test]
    fn minimal_pair_unknown_when_both_routes_fail() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        let zero = ext.zero();
        // candidate v(pi - 0) = 1/2 < 1 fails; omega route fails since 1 < 3/2
        let cert = certify_minimal_pair(&pi, &rat(1, 1), Some(&zero)).unwrap();
        assert_eq!(cert.verdict, Verdict::Unknown);
        assert_eq!(cert.method, None);
        assert_eq!(cert.witness, None);
    }

    #[test]
    fn minimal_pair_refuted_by_verified_candidate() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        let zero = ext.zero();
        // v(pi - 0) = 1/2 >= delta = 1/2 with degree 1 < 2
        let cert = certify_minimal_pair(&pi, &rat(1, 2), Some(&zero)).unwrap();
        assert_eq!(cert.verdict, Verdict::Refuted);
        assert_eq!(cert.method, Some("counterexample"));
    }

    #[test]
    fn inclusion_examples() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        let four = ext.from_uint(&BigUint::from(4u32));
        let b = pi.add(&four);
        // v(a-b) = v(4) = 2 > 3/2
        assert_eq!(krasner_inclusion(&pi, &b).unwrap(), Inclusion::Implied);
        // v(a-0) = 1/2 < 3/2
        assert_eq!(
            krasner_inclusion(&pi, &ext.zero()).unwrap(),
            Inclusion::NotImplied
        );
        assert_eq!(krasner_inclusion(&pi, &pi).unwrap(), Inclusion::Implied);
    }

    #[test]
    fn implied_inclusion_respects_degree_divisibility() {
        let ext = eis_tower(2, 24);
        let pi = ext.uniformizer();
        let eight = ext.from_uint(&BigUint::from(8u32));
        let b = pi.add(&eight);
        assert_eq!(krasner_inclusion(&pi, &b).unwrap(), Inclusion::Implied);
        let da = pi.degree_over_qp().unwrap();
        let db = b.degree_over_qp().unwrap();
        assert_eq!(db % da, 0);
    }

    #[test]
    fn distinguished_base_element_below_ramified_generator() {
        let ext = eis_tower(5, 20);
        let pi = ext.uniformizer();
        let one = ext.one();
        let report = check_distinguished_necessary(&one, &pi, None).unwrap();
        assert_eq!(report.overall.verdict, Verdict::Certified);
        assert_eq!(report.overall.method, Some("degree-vacuous"));
        let closest = report
            .conditions
            .iter()
            .find(|c| c.name == "closest")
            .unwrap();
        assert!(closest.status.starts_with("unknown"));
        // invariant consequences checked and verified
        assert!(report
            .conditions
            .iter()
            .filter(|c| ["value-group", "residue-field", "subfield-degree"].contains(&c.name))
            .all(|c| c.status.starts_with("verified")));
    }

    #[test]
    fn distinguished_refuted_on_degree() {
        let ext = eis_tower(5, 20);
        let pi = ext.uniformizer();
        let b = pi.add(&ext.one());
        let report = check_distinguished_necessary(&b, &pi, None).unwrap();
        assert_eq!(report.overall.verdict, Verdict::Refuted);
        assert!(report.conditions[0].status.starts_with("refuted"));
    }

    #[test]
    fn distinguished_refuted_by_closer_candidate() {
        let ext = eis_tower(5, 20);
        let pi = ext.uniformizer();
        let one = ext.one();
        let zero = ext.zero();
        // v(pi - 0) = 1/2 > v(pi - 1) = 0
        let report = check_distinguished_necessary(&one, &pi, Some(&zero)).unwrap();
        assert_eq!(report.overall.verdict, Verdict::Refuted);
        assert_eq!(report.overall.method, Some("counterexample"));
        let closest = report
            .conditions
            .iter()
            .find(|c| c.name == "closest")
            .unwrap();
        assert!(closest.status.starts_with("refuted"));
    }

    #[test]
    fn elements_in_nested_towers_are_compared_in_the_larger_one() {
        let qp = TowerField::qp(2, 24).unwrap();
        let ext = eis_tower(2, 24);
        let a = ext.uniformizer();
        let b = qp.from_uint(&BigUint::from(4u32));
        // b embeds into ext; v(a - b) = 1/2 < 3/2
        assert_eq!(krasner_inclusion(&a, &b).unwrap(), Inclusion::NotImplied);
    }
}
