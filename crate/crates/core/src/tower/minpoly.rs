//! Minimal polynomials of tower elements by kernel computation over Z/p^N.
//!
//! Powers of the element are flattened to coordinate rows and inserted into
//! an exact echelon structure; the first linear relation gives a monic
//! polynomial vanishing on the element modulo p^N. The relation carries no
//! divisions, so the vanishing is exact at the working precision. Pivot
//! valuations eat into how many digits of the relation are meaningful; the
//! operation reports that and refuses to answer when too little survives.

use super::{Repr, StoredLevelKind, TowerElement};
use crate::linalg::PadicSolver;
use crate::{Error, Result};
use num_bigint::BigUint;
use num_traits::Zero;

/// Digits of precision that must survive pivot losses for a kernel result
/// to be reported at all.
const MIN_EFFECTIVE: u32 = 4;

/// Monic polynomial of minimal degree vanishing on an element at the working
/// precision. Coefficients are residues modulo p^N, constant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinPoly {
    coeffs: Vec<BigUint>,
    effective_precision: u32,
}

impl MinPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients modulo p^N, constant first; the leading one is 1.
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    /// Digits of the relation that survive pivot valuation losses.
    pub fn effective_precision(&self) -> u32 {
        self.effective_precision
    }
}

/// Invariants of the subfield generated by an element, when the tower has a
/// recorded level matching it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubfieldInvariants {
    Known { e: u64, f: u64 },
    Unknown,
}

impl TowerElement {
    /// Monic polynomial of minimal degree with m(x) = 0 modulo p^N.
    pub fn minimal_polynomial(&self) -> Result<MinPoly> {
        let tower = self.tower();
        let d = tower.dim(tower.n_steps());
        let mut solver = PadicSolver::new(tower.p(), tower.precision(), d, d + 1);
        let mut acc = tower.one();
        for _ in 0..=d {
            if let Some(rel) = solver.insert(acc.coords()) {
                let k = rel
                    .combo
                    .iter()
                    .rposition(|c| !c.is_zero())
                    .expect("relation cannot be empty");
                let coeffs: Vec<BigUint> = rel.combo[..=k].to_vec();
                debug_assert!(coeffs.last().map(|c| c == &BigUint::from(1u32)) == Some(true));
                let lost = solver.max_pivot_val().max(rel.used_pval);
                let effective = tower.precision().saturating_sub(lost);
                if effective < MIN_EFFECTIVE {
                    return Err(Error::PrecisionInsufficient {
                        what: "minimal polynomial kernel".into(),
                        have: effective,
                        need: lost + MIN_EFFECTIVE,
                    });
                }
                return Ok(MinPoly {
                    coeffs,
                    effective_precision: effective,
                });
            }
            acc = acc.mul(self);
        }
        unreachable!("a relation must appear among d+1 vectors in d coordinates")
    }

    /// Degree of the minimal polynomial at the working precision.
    pub fn degree_over_qp(&self) -> Result<u64> {
        Ok(self.minimal_polynomial()?.degree() as u64)
    }

    /// Degree computed after reducing the element and its tower to a lower
    /// precision. Degrees are monotone in precision: a relation found at the
    /// lower precision can only disappear, never change direction, when the
    /// precision grows.
    pub fn degree_at_precision(&self, cap: u32) -> Result<u64> {
        self.reduce_precision(cap.min(self.tower().precision()))
            .degree_over_qp()
    }

    /// (e, f) of Q_p(x) when x generates a level the tower records, either a
    /// main level or one derived from a step whose modulus descends.
    pub fn subfield_invariants(&self) -> Result<SubfieldInvariants> {
        let deg = self.degree_over_qp()?;
        let tower = self.tower();
        for lvl in tower.stored_levels() {
            if lvl.d != deg {
                continue;
            }
            let fits = match lvl.kind {
                StoredLevelKind::Main { level } => self.support_level() <= level,
                StoredLevelKind::Derived { step, base_level } => {
                    lies_in_derived(self, step, base_level)
                }
            };
            if fits {
                return Ok(SubfieldInvariants::Known { e: lvl.e, f: lvl.f });
            }
        }
        Ok(SubfieldInvariants::Unknown)
    }

    /// Integer coefficients g_0..g_{n-1} with sum g_i x^i = target modulo
    /// p^N, if the target lies in the span of the first n powers of x.
    pub fn express_in_power_basis(
        &self,
        target: &TowerElement,
        n_powers: usize,
    ) -> Option<Vec<BigUint>> {
        let tower = self.tower();
        let d = tower.dim(tower.n_steps());
        let mut solver = PadicSolver::new(tower.p(), tower.precision(), d, n_powers);
        let mut acc = tower.one();
        for _ in 0..n_powers {
            if solver.insert(acc.coords()).is_some() {
                // The powers are dependent before reaching the requested
                // count; the power basis does not have that size.
                return None;
            }
            acc = acc.mul(self);
        }
        solver.probe(&target.coords())
    }
}

/// Whether the element sits, coordinate-wise, inside the subfield generated
/// over a lower level by the generator of a step: zero coordinates above the
/// step's level, and each coordinate in the step block supported at or below
/// the given base level.
fn lies_in_derived(x: &TowerElement, step: usize, base_level: usize) -> bool {
    let tower = x.tower();
    if x.support_level() > step + 1 {
        return false;
    }
    // Descend to the representative at the step's own level.
    let mut repr: &Repr = x.repr();
    for _ in (step + 2..=tower.n_steps()).rev() {
        match repr {
            Repr::Ext(v) => repr = &v[0],
            Repr::Base(_) => return false,
        }
    }
    match repr {
        Repr::Ext(v) => v
            .iter()
            .all(|c| support_of(tower, step, c) <= base_level),
        // Already below the step entirely: contained in the base level.
        Repr::Base(_) => true,
    }
}

fn support_of(tower: &super::TowerField, level: usize, repr: &Repr) -> usize {
    // Wrap into a throwaway walk: reuse the tower's notion of support by
    // direct recursion over the nested shape.
    match repr {
        Repr::Base(_) => 0,
        Repr::Ext(v) => {
            if v[1..].iter().all(is_zero_repr) {
                support_of(tower, level - 1, &v[0])
            } else {
                level
            }
        }
    }
}

fn is_zero_repr(r: &Repr) -> bool {
    match r {
        Repr::Base(x) => x.is_zero(),
        Repr::Ext(v) => v.iter().all(is_zero_repr),
    }
}

#[cfg(test)]
mod tests {
    use super::super::TowerField;
    use super::*;
    use num_bigint::{BigInt, BigUint};

    fn eis_sqrt2(n: u32) -> std::sync::Arc<TowerField> {
        let k0 = TowerField::qp(2, n).unwrap();
        let m = vec![
            k0.from_int(&BigInt::from(-2)).repr().clone(),
            k0.zero().repr().clone(),
            k0.one().repr().clone(),
        ];
        k0.make_eisenstein_step(&m).unwrap()
    }

    #[test]
    fn minpoly_of_one_is_x_minus_one() {
        let k = TowerField::qp(5, 8).unwrap();
        let m = k.one().minimal_polynomial().unwrap();
        assert_eq!(m.degree(), 1);
        let pn = BigUint::from(5u32).pow(8);
        assert_eq!(m.coeffs(), &[&pn - 1u32, BigUint::from(1u32)][..]);
        assert_eq!(m.effective_precision(), 8);
    }

    #[test]
    fn minpoly_of_uniformizer_recovers_modulus() {
        let k = eis_sqrt2(10);
        let pi = k.generator(0);
        let m = pi.minimal_polynomial().unwrap();
        assert_eq!(m.degree(), 2);
        let pn = BigUint::from(2u32).pow(10);
        assert_eq!(
            m.coeffs(),
            &[&pn - 2u32, BigUint::from(0u32), BigUint::from(1u32)][..]
        );
    }

    #[test]
    fn minpoly_of_shifted_uniformizer() {
        // x = pi + 2 with pi^2 = 2: (x-2)^2 = 2, so x^2 - 4x + 2 = 0.
        let k = eis_sqrt2(10);
        let x = k.generator(0).add(&k.from_uint(&BigUint::from(2u32)));
        let m = x.minimal_polynomial().unwrap();
        assert_eq!(m.degree(), 2);
        let pn = BigUint::from(2u32).pow(10);
        assert_eq!(
            m.coeffs(),
            &[BigUint::from(2u32), &pn - 4u32, BigUint::from(1u32)][..]
        );
        assert_eq!(x.degree_over_qp().unwrap(), 2);
    }

    #[test]
    fn minpoly_vanishes_on_the_element() {
        let k1 = TowerField::qp(2, 12).unwrap().make_unramified_step(2).unwrap();
        let m = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            k1.zero().repr().clone(),
            k1.one().repr().clone(),
        ];
        let k2 = k1.make_eisenstein_step(&m).unwrap();
        let x = k2.generator(0).add(&k2.generator(1));
        let mp = x.minimal_polynomial().unwrap();
        // Horner evaluation of the integer-coefficient polynomial at x.
        let mut acc = k2.zero();
        for c in mp.coeffs().iter().rev() {
            acc = acc.mul(&x).add(&k2.from_uint(c));
        }
        assert!(acc.is_precision_zero());
        assert_eq!(mp.degree(), 4);
    }

    #[test]
    fn unramified_generator_has_full_unramified_degree() {
        let k = TowerField::qp(3, 8).unwrap().make_unramified_step(3).unwrap();
        assert_eq!(k.generator(0).degree_over_qp().unwrap(), 3);
    }

    #[test]
    fn degree_is_stable_under_precision_reduction_here() {
        let k = eis_sqrt2(16);
        let x = k.generator(0).add(&k.one());
        assert_eq!(x.degree_over_qp().unwrap(), 2);
        assert_eq!(x.degree_at_precision(8).unwrap(), 2);
        assert_eq!(x.degree_at_precision(40).unwrap(), 2);
    }

    #[test]
    fn subfield_invariants_of_rational_integer() {
        let k = eis_sqrt2(10);
        let x = k.from_uint(&BigUint::from(2u32));
        assert_eq!(
            x.subfield_invariants().unwrap(),
            SubfieldInvariants::Known { e: 1, f: 1 }
        );
    }

    #[test]
    fn subfield_invariants_of_primitive_element() {
        // Unramified cubic then sqrt(2): (e,f) = (2,3), degree 6.
        let k1 = TowerField::qp(2, 16).unwrap().make_unramified_step(3).unwrap();
        let m = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            k1.zero().repr().clone(),
            k1.one().repr().clone(),
        ];
        let k2 = k1.make_eisenstein_step(&m).unwrap();
        let t = k2.generator(0).add(&k2.generator(1));
        assert_eq!(t.degree_over_qp().unwrap(), 6);
        assert_eq!(
            t.subfield_invariants().unwrap(),
            SubfieldInvariants::Known { e: 2, f: 3 }
        );
    }

    #[test]
    fn subfield_invariants_via_derived_level() {
        // Unramified quadratic, then X^2 - 2 descending to Q_2: the element
        // 3*pi generates the ramified quadratic subfield recorded as a
        // derived level.
        let k1 = TowerField::qp(2, 12).unwrap().make_unramified_step(2).unwrap();
        let m = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            k1.zero().repr().clone(),
            k1.one().repr().clone(),
        ];
        let k2 = k1.make_eisenstein_step(&m).unwrap();
        let x = k2.generator(1).mul(&k2.from_uint(&BigUint::from(3u32)));
        assert_eq!(x.degree_over_qp().unwrap(), 2);
        assert_eq!(
            x.subfield_invariants().unwrap(),
            SubfieldInvariants::Known { e: 2, f: 1 }
        );
    }

    #[test]
    fn subfield_invariants_unknown_for_unrecorded_quadratic() {
        // In Q_2(zeta3, sqrt2), the element (1 + 2*zeta3)*sqrt2 squares to
        // -6, so it generates Q_2(sqrt(-6)): a quadratic subfield that is
        // neither the unramified one nor the recorded ramified one.
        let k1 = TowerField::qp(2, 12).unwrap().make_unramified_step(2).unwrap();
        let m = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            k1.zero().repr().clone(),
            k1.one().repr().clone(),
        ];
        let k2 = k1.make_eisenstein_step(&m).unwrap();
        let u = k2.generator(0);
        let pi = k2.generator(1);
        let x = pi.mul(&u.scale_uint(&BigUint::from(2u32)).add(&k2.one()));
        // Oracle: x^2 + 6 = 0 exactly.
        let six = k2.from_uint(&BigUint::from(6u32));
        assert!(x.mul(&x).add(&six).is_precision_zero());
        assert_eq!(x.degree_over_qp().unwrap(), 2);
        assert_eq!(x.subfield_invariants().unwrap(), SubfieldInvariants::Unknown);
    }

    #[test]
    fn express_in_power_basis_roundtrip() {
        let k = eis_sqrt2(10);
        let x = k.generator(0).add(&k.one());
        // Express pi in powers of x: pi = x - 1.
        let g = x.express_in_power_basis(&k.generator(0), 2).unwrap();
        let mut acc = k.zero();
        let mut xp = k.one();
        for c in &g {
            acc = acc.add(&xp.scale_uint(c));
            xp = xp.mul(&x);
        }
        assert_eq!(acc, k.generator(0));
        // Requesting a basis larger than the degree fails.
        assert!(x.express_in_power_basis(&k.generator(0), 3).is_none());
    }
}
