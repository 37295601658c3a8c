//! Finite extensions of Q_p as explicit towers of unramified and Eisenstein
//! steps.
//!
//! An element of a tower of degree d is a nested coordinate vector over the
//! basis of generator monomials, with bottom coordinates stored as integers
//! modulo p^N for one tower-wide absolute precision N. Valuations are read
//! off the coordinates by the minimum formula, which is exact at each
//! Eisenstein step because the candidate terms have pairwise distinct values,
//! and at each unramified step because the generator powers stay independent
//! over the residue field.

mod enumerate;
mod minpoly;

pub use enumerate::{enumerate_small_extensions, ExtensionClass};
pub use minpoly::{MinPoly, SubfieldInvariants};

use crate::scalar::{is_prime, rat, rat_int, vp_uint, Rat};
use crate::{Error, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// Nested coordinate vector. `Base` holds an integer modulo the working
/// modulus; `Ext` holds coordinates over the previous level, one per power of
/// the step generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Repr {
    Base(BigUint),
    Ext(Vec<Repr>),
}

/// Kind of a tower step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Unramified,
    Eisenstein,
}

impl StepKind {
    pub fn label(self) -> &'static str {
        match self {
            StepKind::Unramified => "unramified",
            StepKind::Eisenstein => "eisenstein",
        }
    }
}

/// Metadata of one tower step. The defining polynomial lives in the parent
/// tower, keyed by step index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TowerStep {
    kind: StepKind,
    degree: usize,
    // Invariants of the level directly above this step.
    e: u64,
    f: u64,
    d: u64,
}

impl TowerStep {
    pub fn kind(&self) -> StepKind {
        self.kind
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Descriptor of a subfield whose invariants the tower records: either one of
/// its own levels, or a level derived from a step whose defining polynomial
/// already has coefficients in a lower level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredLevel {
    pub e: u64,
    pub f: u64,
    pub d: u64,
    pub kind: StoredLevelKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoredLevelKind {
    Main { level: usize },
    Derived { step: usize, base_level: usize },
}

/// A finite extension of Q_p presented as a tower of steps, together with the
/// tower-wide absolute precision. All representable elements are integral:
/// coordinates are integers modulo p^N, so valuations are at least zero.
#[derive(Debug, PartialEq, Eq)]
pub struct TowerField {
    p: u64,
    precision: u32,
    pn: BigUint,
    p_big: BigUint,
    steps: Vec<TowerStep>,
    /// Monic defining polynomial per step, constant first, coefficients at
    /// the level the step extends.
    moduli: Vec<Vec<Repr>>,
    /// Defining polynomials of the residue tower: the unramified step moduli
    /// reduced modulo p, in step order.
    res_moduli: Vec<Vec<Repr>>,
}

/// Borrowed view of a nested algebra: a coefficient modulus and step moduli.
/// The tower (modulo p^N) and its residue tower (modulo p) share this code.
struct View<'a> {
    pn: &'a BigUint,
    moduli: &'a [Vec<Repr>],
}

impl View<'_> {
    fn deg(&self, level: usize) -> usize {
        self.moduli[level - 1].len() - 1
    }

    fn zero(&self, level: usize) -> Repr {
        if level == 0 {
            Repr::Base(BigUint::zero())
        } else {
            Repr::Ext(vec![self.zero(level - 1); self.deg(level)])
        }
    }

    fn from_uint(&self, level: usize, n: &BigUint) -> Repr {
        if level == 0 {
            Repr::Base(n % self.pn)
        } else {
            let mut v = vec![self.zero(level - 1); self.deg(level)];
            v[0] = self.from_uint(level - 1, n);
            Repr::Ext(v)
        }
    }

    fn one(&self, level: usize) -> Repr {
        self.from_uint(level, &BigUint::one())
    }

    fn is_zero(&self, a: &Repr) -> bool {
        match a {
            Repr::Base(x) => x.is_zero(),
            Repr::Ext(v) => v.iter().all(|c| self.is_zero(c)),
        }
    }

    fn add(&self, level: usize, a: &Repr, b: &Repr) -> Repr {
        match (a, b) {
            (Repr::Base(x), Repr::Base(y)) => Repr::Base((x + y) % self.pn),
            (Repr::Ext(v), Repr::Ext(w)) => {
                debug_assert_eq!(v.len(), w.len());
                Repr::Ext(
                    v.iter()
                        .zip(w.iter())
                        .map(|(x, y)| self.add(level - 1, x, y))
                        .collect(),
                )
            }
            _ => panic!("level mismatch in tower arithmetic"),
        }
    }

    fn neg(&self, level: usize, a: &Repr) -> Repr {
        match a {
            Repr::Base(x) => {
                if x.is_zero() {
                    Repr::Base(BigUint::zero())
                } else {
                    Repr::Base(self.pn - x)
                }
            }
            Repr::Ext(v) => Repr::Ext(v.iter().map(|c| self.neg(level - 1, c)).collect()),
        }
    }

    fn sub(&self, level: usize, a: &Repr, b: &Repr) -> Repr {
        self.add(level, a, &self.neg(level, b))
    }

    fn mul(&self, level: usize, a: &Repr, b: &Repr) -> Repr {
        match (a, b) {
            (Repr::Base(x), Repr::Base(y)) => Repr::Base((x * y) % self.pn),
            (Repr::Ext(v), Repr::Ext(w)) => {
                let m = self.deg(level);
                debug_assert!(v.len() == m && w.len() == m);
                let mut acc = vec![self.zero(level - 1); 2 * m - 1];
                for (i, x) in v.iter().enumerate() {
                    if self.is_zero(x) {
                        continue;
                    }
                    for (j, y) in w.iter().enumerate() {
                        if self.is_zero(y) {
                            continue;
                        }
                        let t = self.mul(level - 1, x, y);
                        acc[i + j] = self.add(level - 1, &acc[i + j], &t);
                    }
                }
                // Reduce by the monic step modulus: theta^m is minus the
                // lower-degree part of the modulus.
                let modulus = &self.moduli[level - 1];
                for k in (m..acc.len()).rev() {
                    let c = std::mem::replace(&mut acc[k], self.zero(level - 1));
                    if self.is_zero(&c) {
                        continue;
                    }
                    for i in 0..m {
                        let t = self.mul(level - 1, &c, &modulus[i]);
                        acc[k - m + i] = self.sub(level - 1, &acc[k - m + i], &t);
                    }
                }
                acc.truncate(m);
                Repr::Ext(acc)
            }
            _ => panic!("level mismatch in tower arithmetic"),
        }
    }

    fn pow(&self, level: usize, a: &Repr, exp: &BigUint) -> Repr {
        let mut acc = self.one(level);
        if exp.is_zero() {
            return acc;
        }
        for i in (0..exp.bits()).rev() {
            acc = self.mul(level, &acc, &acc);
            if exp.bit(i) {
                acc = self.mul(level, &acc, a);
            }
        }
        acc
    }
}

impl TowerField {
    /// The base field Q_p at a given absolute precision.
    pub fn qp(p: u64, precision: u32) -> Result<Arc<TowerField>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 {
            return Err(Error::InvalidArgument("precision must be at least 1".into()));
        }
        let p_big = BigUint::from(p);
        Ok(Arc::new(TowerField {
            p,
            precision,
            pn: p_big.pow(precision),
            p_big,
            steps: Vec::new(),
            moduli: Vec::new(),
            res_moduli: Vec::new(),
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn precision(&self) -> u32 {
        self.precision
    }
    pub fn modulus_pn(&self) -> &BigUint {
        &self.pn
    }
    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }
    pub fn steps(&self) -> &[TowerStep] {
        &self.steps
    }
    pub fn step_modulus(&self, i: usize) -> &[Repr] {
        &self.moduli[i]
    }

    /// Ramification index over Q_p.
    pub fn e(&self) -> u64 {
        self.steps.last().map_or(1, |s| s.e)
    }

    /// Residue degree over Q_p.
    pub fn f(&self) -> u64 {
        self.steps.last().map_or(1, |s| s.f)
    }

    /// Total degree over Q_p.
    pub fn degree(&self) -> u64 {
        self.steps.last().map_or(1, |s| s.d)
    }

    /// (e, f, d) of the subfield at a given level; level 0 is Q_p itself.
    pub fn level_invariants(&self, level: usize) -> (u64, u64, u64) {
        if level == 0 {
            (1, 1, 1)
        } else {
            let s = &self.steps[level - 1];
            (s.e, s.f, s.d)
        }
    }

    /// Q_p-dimension of the subfield at a level.
    pub fn dim(&self, level: usize) -> usize {
        self.steps[..level].iter().map(|s| s.degree).product()
    }

    fn top(&self) -> usize {
        self.steps.len()
    }

    fn view(&self) -> View<'_> {
        View {
            pn: &self.pn,
            moduli: &self.moduli,
        }
    }

    fn res_view(&self) -> View<'_> {
        View {
            pn: &self.p_big,
            moduli: &self.res_moduli,
        }
    }

    /// Residue-tower level corresponding to a tower level.
    fn res_level(&self, level: usize) -> usize {
        self.steps[..level]
            .iter()
            .filter(|s| s.kind == StepKind::Unramified)
            .count()
    }

    fn res_dim(&self, res_level: usize) -> usize {
        self.res_moduli[..res_level]
            .iter()
            .map(|m| m.len() - 1)
            .product()
    }

    // ----- valuation -----

    /// Exact valuation of a representative, or None when every coordinate is
    /// zero modulo p^N (true valuation at least N, not resolvable here).
    fn val_repr(&self, level: usize, a: &Repr) -> Option<Rat> {
        match a {
            Repr::Base(x) => {
                if x.is_zero() {
                    None
                } else {
                    Some(rat_int(vp_uint(x, self.p) as i64))
                }
            }
            Repr::Ext(v) => {
                let step = &self.steps[level - 1];
                let mut best: Option<Rat> = None;
                for (j, c) in v.iter().enumerate() {
                    let term = self.val_repr(level - 1, c).map(|w| match step.kind {
                        StepKind::Unramified => w,
                        StepKind::Eisenstein => w + rat(j as i64, step.e as i64),
                    });
                    if let Some(t) = term {
                        best = Some(match best {
                            None => t,
                            Some(b) => b.min(t),
                        });
                    }
                }
                best
            }
        }
    }

    // ----- residue projection and lifting -----

    /// Project to the residue tower. Valid for integral elements, which is
    /// all of them here.
    fn res_repr(&self, level: usize, a: &Repr) -> Repr {
        match a {
            Repr::Base(x) => Repr::Base(x % &self.p_big),
            Repr::Ext(v) => match self.steps[level - 1].kind {
                StepKind::Unramified => Repr::Ext(
                    v.iter()
                        .map(|c| self.res_repr(level - 1, c))
                        .collect(),
                ),
                StepKind::Eisenstein => self.res_repr(level - 1, &v[0]),
            },
        }
    }

    /// Lift a residue-tower element to the tower by Teichmuller-free digit
    /// lifting: digits come back as integers below p, Eisenstein coordinates
    /// above the constant one are zero.
    fn lift_res_repr(&self, level: usize, a: &Repr) -> Repr {
        if level == 0 {
            match a {
                Repr::Base(x) => Repr::Base(x.clone()),
                Repr::Ext(_) => panic!("residue level mismatch"),
            }
        } else {
            match self.steps[level - 1].kind {
                StepKind::Unramified => match a {
                    Repr::Ext(v) => Repr::Ext(
                        v.iter()
                            .map(|c| self.lift_res_repr(level - 1, c))
                            .collect(),
                    ),
                    Repr::Base(_) => panic!("residue level mismatch"),
                },
                StepKind::Eisenstein => {
                    let m = self.steps[level - 1].degree;
                    let mut v = vec![self.view().zero(level - 1); m];
                    v[0] = self.lift_res_repr(level - 1, a);
                    Repr::Ext(v)
                }
            }
        }
    }

    // ----- residue-field polynomial arithmetic (for irreducibility) -----

    fn rp_trim(&self, mut c: Vec<Repr>) -> Vec<Repr> {
        let v = self.res_view();
        while c.len() > 1 && v.is_zero(c.last().unwrap()) {
            c.pop();
        }
        c
    }

    fn rp_deg(&self, c: &[Repr]) -> usize {
        c.len() - 1
    }

    fn rp_is_constant(&self, c: &[Repr]) -> bool {
        c.len() == 1
    }

    /// Inverse in the residue field by the Fermat exponent q - 2.
    fn res_inv(&self, res_level: usize, a: &Repr) -> Option<Repr> {
        let v = self.res_view();
        if v.is_zero(a) {
            return None;
        }
        let f: u32 = self.res_moduli[..res_level]
            .iter()
            .map(|m| (m.len() - 1) as u32)
            .product();
        let q = self.p_big.pow(f);
        Some(v.pow(res_level, a, &(q - 2u32)))
    }

    fn rp_make_monic(&self, res_level: usize, c: Vec<Repr>) -> Vec<Repr> {
        let v = self.res_view();
        let inv = self
            .res_inv(res_level, c.last().unwrap())
            .expect("leading coefficient must be nonzero");
        c.iter().map(|x| v.mul(res_level, x, &inv)).collect()
    }

    /// Remainder of a modulo monic h, over the residue field at a level.
    fn rp_rem(&self, res_level: usize, a: &[Repr], h: &[Repr]) -> Vec<Repr> {
        let v = self.res_view();
        let dh = self.rp_deg(h);
        let mut r: Vec<Repr> = a.to_vec();
        while r.len() > dh {
            let k = r.len() - 1;
            let c = r.pop().unwrap();
            if v.is_zero(&c) {
                continue;
            }
            for i in 0..dh {
                let t = v.mul(res_level, &c, &h[i]);
                r[k - dh + i] = v.sub(res_level, &r[k - dh + i], &t);
            }
        }
        if r.is_empty() {
            r.push(v.zero(res_level));
        }
        self.rp_trim(r)
    }

    fn rp_mulmod(&self, res_level: usize, a: &[Repr], b: &[Repr], h: &[Repr]) -> Vec<Repr> {
        let v = self.res_view();
        let mut acc = vec![v.zero(res_level); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if v.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                let t = v.mul(res_level, x, y);
                acc[i + j] = v.add(res_level, &acc[i + j], &t);
            }
        }
        self.rp_rem(res_level, &acc, h)
    }

    fn rp_powmod(&self, res_level: usize, a: &[Repr], exp: &BigUint, h: &[Repr]) -> Vec<Repr> {
        let v = self.res_view();
        let mut acc = vec![v.one(res_level)];
        if exp.is_zero() {
            return acc;
        }
        for i in (0..exp.bits()).rev() {
            acc = self.rp_mulmod(res_level, &acc, &acc, h);
            if exp.bit(i) {
                acc = self.rp_mulmod(res_level, &acc, a, h);
            }
        }
        acc
    }

    fn rp_sub(&self, res_level: usize, a: &[Repr], b: &[Repr]) -> Vec<Repr> {
        let v = self.res_view();
        let n = a.len().max(b.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = a.get(i).cloned().unwrap_or_else(|| v.zero(res_level));
            let y = b.get(i).cloned().unwrap_or_else(|| v.zero(res_level));
            out.push(v.sub(res_level, &x, &y));
        }
        self.rp_trim(out)
    }

    fn rp_gcd(&self, res_level: usize, a: &[Repr], b: &[Repr]) -> Vec<Repr> {
        let v = self.res_view();
        let mut a = self.rp_trim(a.to_vec());
        let mut b = self.rp_trim(b.to_vec());
        loop {
            if b.len() == 1 && v.is_zero(&b[0]) {
                return if a.len() == 1 && v.is_zero(&a[0]) {
                    a
                } else {
                    self.rp_make_monic(res_level, a)
                };
            }
            let bm = self.rp_make_monic(res_level, b.clone());
            let r = self.rp_rem(res_level, &a, &bm);
            a = bm;
            b = r;
        }
    }

    /// Irreducibility of a monic polynomial over the residue field at a
    /// level, by the Frobenius power criterion.
    fn rp_irreducible(&self, res_level: usize, h: &[Repr]) -> bool {
        let v = self.res_view();
        let b = self.rp_deg(h);
        if b == 0 {
            return false;
        }
        if b == 1 {
            return true;
        }
        let fq: u32 = self.res_moduli[..res_level]
            .iter()
            .map(|m| (m.len() - 1) as u32)
            .product();
        let q = self.p_big.pow(fq);
        let z = vec![v.zero(res_level), v.one(res_level)];
        // z^(q^b) must equal z modulo h.
        let mut x = self.rp_rem(res_level, &z, h);
        for _ in 0..b {
            x = self.rp_powmod(res_level, &x, &q, h);
        }
        if self.rp_sub(res_level, &x, &self.rp_rem(res_level, &z, h)) != vec![v.zero(res_level)] {
            return false;
        }
        // For every prime r dividing b, gcd(z^(q^(b/r)) - z, h) must be 1.
        let mut rem = b;
        let mut prime_divs = Vec::new();
        let mut t = 2;
        while t * t <= rem {
            if rem % t == 0 {
                prime_divs.push(t);
                while rem % t == 0 {
                    rem /= t;
                }
            }
            t += 1;
        }
        if rem > 1 {
            prime_divs.push(rem);
        }
        for r in prime_divs {
            let k = b / r;
            let mut x = self.rp_rem(res_level, &z, h);
            for _ in 0..k {
                x = self.rp_powmod(res_level, &x, &q, h);
            }
            let diff = self.rp_sub(res_level, &x, &self.rp_rem(res_level, &z, h));
            if self.rp_is_constant(&diff) && v.is_zero(&diff[0]) {
                // z^(q^k) = z identically means h divides z^(q^k) - z, so h
                // splits into factors of degree dividing k < b.
                return false;
            }
            let g = self.rp_gcd(res_level, &diff, h);
            if !self.rp_is_constant(&g) {
                return false;
            }
        }
        true
    }

    /// Residue-field element with a given enumeration index: base-p digits of
    /// the index become the flattened coordinates.
    fn res_elem_by_index(&self, res_level: usize, idx: &BigUint) -> Repr {
        let dim = self.res_dim(res_level);
        let mut digits = Vec::with_capacity(dim);
        let mut n = idx.clone();
        for _ in 0..dim {
            let (q, r) = n.div_rem(&self.p_big);
            digits.push(r);
            n = q;
        }
        let mut it = digits.into_iter();
        self.res_unflatten(res_level, &mut it)
    }

    fn res_unflatten(&self, res_level: usize, digits: &mut impl Iterator<Item = BigUint>) -> Repr {
        if res_level == 0 {
            Repr::Base(digits.next().expect("digit underflow"))
        } else {
            let m = self.res_moduli[res_level - 1].len() - 1;
            Repr::Ext(
                (0..m)
                    .map(|_| self.res_unflatten(res_level - 1, digits))
                    .collect(),
            )
        }
    }

    /// First irreducible monic polynomial of the given degree over the top
    /// residue field, in the fixed enumeration order of coefficient tuples.
    /// Deterministic for a given tower shape; independent of any seed.
    fn find_irreducible(&self, res_level: usize, degree: usize) -> Vec<Repr> {
        let v = self.res_view();
        let f = self.res_dim(res_level) as u32;
        let q = self.p_big.pow(f);
        let mut idx = BigUint::zero();
        loop {
            // Decompose the index into base-q digits c_0, ..., c_{deg-1}.
            let mut coeffs = Vec::with_capacity(degree + 1);
            let mut n = idx.clone();
            for _ in 0..degree {
                let (quo, rem) = n.div_rem(&q);
                coeffs.push(self.res_elem_by_index(res_level, &rem));
                n = quo;
            }
            idx += 1u32;
            if v.is_zero(&coeffs[0]) {
                // Divisible by the variable, never irreducible for degree > 1.
                continue;
            }
            coeffs.push(v.one(res_level));
            if self.rp_irreducible(res_level, &coeffs) {
                return coeffs;
            }
        }
    }

    // ----- construction -----

    fn push_step(
        self: &Arc<Self>,
        kind: StepKind,
        modulus: Vec<Repr>,
        res_modulus: Option<Vec<Repr>>,
    ) -> Arc<TowerField> {
        let degree = modulus.len() - 1;
        let (e0, f0, d0) = (self.e(), self.f(), self.degree());
        let (e, f) = match kind {
            StepKind::Unramified => (e0, f0 * degree as u64),
            StepKind::Eisenstein => (e0 * degree as u64, f0),
        };
        let mut steps = self.steps.clone();
        steps.push(TowerStep {
            kind,
            degree,
            e,
            f,
            d: d0 * degree as u64,
        });
        let mut moduli = self.moduli.clone();
        moduli.push(modulus);
        let mut res_moduli = self.res_moduli.clone();
        if let Some(rm) = res_modulus {
            res_moduli.push(rm);
        }
        Arc::new(TowerField {
            p: self.p,
            precision: self.precision,
            pn: self.pn.clone(),
            p_big: self.p_big.clone(),
            steps,
            moduli,
            res_moduli,
        })
    }

    /// Extend by an unramified step of the given residue degree, using the
    /// first irreducible polynomial in the fixed enumeration order. The
    /// choice depends only on p and the tower shape below, never on a seed.
    pub fn make_unramified_step(self: &Arc<Self>, fstep: u64) -> Result<Arc<TowerField>> {
        if fstep < 2 {
            return Err(Error::InvalidArgument(
                "unramified step degree must be at least 2".into(),
            ));
        }
        let r = self.res_level(self.top());
        let res_poly = self.find_irreducible(r, fstep as usize);
        let modulus: Vec<Repr> = res_poly
            .iter()
            .map(|c| self.lift_res_repr(self.top(), c))
            .collect();
        Ok(self.push_step(StepKind::Unramified, modulus, Some(res_poly)))
    }

    /// Extend by an explicit unramified step. The modulus must be monic of
    /// degree at least 2 and irreducible after reduction to the residue
    /// field.
    pub fn extend_unramified_with(self: &Arc<Self>, modulus: &[Repr]) -> Result<Arc<TowerField>> {
        let degree = modulus.len().saturating_sub(1);
        if degree < 2 {
            return Err(Error::InvalidArgument(
                "unramified step degree must be at least 2".into(),
            ));
        }
        let v = self.view();
        let top = self.top();
        if modulus.last() != Some(&v.one(top)) {
            return Err(Error::NotIrreducible(
                "unramified modulus must be monic".into(),
            ));
        }
        let r = self.res_level(top);
        let res_poly: Vec<Repr> = modulus.iter().map(|c| self.res_repr(top, c)).collect();
        if !self.rp_irreducible(r, &res_poly) {
            return Err(Error::NotIrreducible(format!(
                "modulus of degree {degree} is reducible over the residue field"
            )));
        }
        Ok(self.push_step(StepKind::Unramified, modulus.to_vec(), Some(res_poly)))
    }

    /// Extend by an Eisenstein step. The modulus must be monic of degree at
    /// least 2, interior coefficients of positive valuation, and constant
    /// coefficient of valuation exactly one over the current ramification
    /// index.
    pub fn make_eisenstein_step(self: &Arc<Self>, modulus: &[Repr]) -> Result<Arc<TowerField>> {
        let degree = modulus.len().saturating_sub(1);
        if degree < 2 {
            return Err(Error::InvalidArgument(
                "eisenstein step degree must be at least 2".into(),
            ));
        }
        let v = self.view();
        let top = self.top();
        if modulus.last() != Some(&v.one(top)) {
            return Err(Error::NotEisenstein {
                index: degree,
                valuation: "none".into(),
                constraint: "leading coefficient must be 1".into(),
            });
        }
        let want = rat(1, self.e() as i64);
        match self.val_repr(top, &modulus[0]) {
            Some(ref w) if *w == want => {}
            other => {
                return Err(Error::NotEisenstein {
                    index: 0,
                    valuation: match other {
                        Some(w) => w.to_string(),
                        None => format!("at least {}", self.precision),
                    },
                    constraint: format!("constant coefficient must have valuation {want}"),
                });
            }
        }
        for (j, c) in modulus.iter().enumerate().take(degree).skip(1) {
            match self.val_repr(top, c) {
                None => {}
                Some(w) if w > Rat::zero() => {}
                Some(w) => {
                    return Err(Error::NotEisenstein {
                        index: j,
                        valuation: w.to_string(),
                        constraint: "interior coefficients must have positive valuation".into(),
                    });
                }
            }
        }
        Ok(self.push_step(StepKind::Eisenstein, modulus.to_vec(), None))
    }

    // ----- element constructors -----

    pub fn zero(self: &Arc<Self>) -> TowerElement {
        TowerElement {
            tower: self.clone(),
            repr: self.view().zero(self.top()),
        }
    }

    pub fn one(self: &Arc<Self>) -> TowerElement {
        TowerElement {
            tower: self.clone(),
            repr: self.view().one(self.top()),
        }
    }

    pub fn from_uint(self: &Arc<Self>, n: &BigUint) -> TowerElement {
        TowerElement {
            tower: self.clone(),
            repr: self.view().from_uint(self.top(), n),
        }
    }

    pub fn from_int(self: &Arc<Self>, n: &BigInt) -> TowerElement {
        let m = BigInt::from(self.pn.clone());
        let r = n.mod_floor(&m);
        debug_assert!(!r.is_negative());
        self.from_uint(&r.to_biguint().expect("nonnegative remainder"))
    }

    /// Element from flattened coordinates, little-endian in each generator
    /// power, lowest level first. Length must equal the tower degree.
    pub fn from_coords(self: &Arc<Self>, coords: &[BigUint]) -> Result<TowerElement> {
        let d = self.dim(self.top());
        if coords.len() != d {
            return Err(Error::InvalidArgument(format!(
                "expected {d} coordinates, got {}",
                coords.len()
            )));
        }
        let mut it = coords.iter().map(|c| c % &self.pn);
        let repr = self.unflatten(self.top(), &mut it);
        Ok(TowerElement {
            tower: self.clone(),
            repr,
        })
    }

    fn unflatten(&self, level: usize, coords: &mut impl Iterator<Item = BigUint>) -> Repr {
        if level == 0 {
            Repr::Base(coords.next().expect("coordinate underflow"))
        } else {
            let m = self.steps[level - 1].degree;
            Repr::Ext(
                (0..m)
                    .map(|_| self.unflatten(level - 1, coords))
                    .collect(),
            )
        }
    }

    fn flatten_into(&self, level: usize, a: &Repr, out: &mut Vec<BigUint>) {
        match a {
            Repr::Base(x) => out.push(x.clone()),
            Repr::Ext(v) => {
                for c in v {
                    self.flatten_into(level - 1, c, out);
                }
            }
        }
    }

    /// Flattened coordinates of each modulus coefficient of step i, each a
    /// vector of dim(i) residues over the level being extended.
    pub fn step_modulus_coords(&self, i: usize) -> Vec<Vec<BigUint>> {
        self.moduli[i]
            .iter()
            .map(|c| {
                let mut out = Vec::with_capacity(self.dim(i));
                self.flatten_into(i, c, &mut out);
                out
            })
            .collect()
    }

    /// Generator of a step, embedded into the top level.
    pub fn generator(self: &Arc<Self>, step: usize) -> TowerElement {
        let v = self.view();
        let m = self.steps[step].degree;
        let mut coords = vec![v.zero(step); m];
        coords[1] = v.one(step);
        let mut repr = Repr::Ext(coords);
        for lvl in step + 2..=self.top() {
            repr = self.wrap_ext(lvl, repr);
        }
        TowerElement {
            tower: self.clone(),
            repr,
        }
    }

    fn wrap_ext(&self, level: usize, inner: Repr) -> Repr {
        let m = self.steps[level - 1].degree;
        let mut v = vec![self.view().zero(level - 1); m];
        v[0] = inner;
        Repr::Ext(v)
    }

    /// A uniformizer: the generator of the last Eisenstein step, or p when
    /// the tower is unramified.
    pub fn uniformizer(self: &Arc<Self>) -> TowerElement {
        for (i, s) in self.steps.iter().enumerate().rev() {
            if s.kind == StepKind::Eisenstein {
                return self.generator(i);
            }
        }
        self.from_uint(&self.p_big)
    }

    /// Generator of the last unramified step, if any.
    pub fn unram_generator(self: &Arc<Self>) -> Option<TowerElement> {
        self.steps
            .iter()
            .enumerate()
            .rev()
            .find(|(_, s)| s.kind == StepKind::Unramified)
            .map(|(i, _)| self.generator(i))
    }

    // ----- structural relations -----

    /// Whether this tower is a step-by-step prefix of another, at the same
    /// prime and precision.
    pub fn is_prefix_of(&self, other: &TowerField) -> bool {
        self.p == other.p
            && self.precision == other.precision
            && self.steps.len() <= other.steps.len()
            && self.steps[..] == other.steps[..self.steps.len()]
            && self.moduli[..] == other.moduli[..self.moduli.len()]
    }

    /// Same tower at a lower precision; moduli coordinates are reduced.
    /// The Eisenstein and irreducibility conditions survive reduction as
    /// long as the new precision is at least 2.
    pub fn reduce_precision(self: &Arc<Self>, new_precision: u32) -> Arc<TowerField> {
        if new_precision >= self.precision {
            return self.clone();
        }
        let pn = self.p_big.pow(new_precision);
        Arc::new(TowerField {
            p: self.p,
            precision: new_precision,
            pn: pn.clone(),
            p_big: self.p_big.clone(),
            steps: self.steps.clone(),
            moduli: self
                .moduli
                .iter()
                .map(|m| m.iter().map(|c| repr_mod(c, &pn)).collect())
                .collect(),
            res_moduli: self.res_moduli.clone(),
        })
    }

    /// Smallest level that already contains the element.
    fn support_level(&self, level: usize, a: &Repr) -> usize {
        match a {
            Repr::Base(_) => 0,
            Repr::Ext(v) => {
                let view = self.view();
                if v[1..].iter().all(|c| view.is_zero(c)) {
                    self.support_level(level - 1, &v[0])
                } else {
                    level
                }
            }
        }
    }

    /// Levels whose invariants the tower records: every main level, plus
    /// levels derived from steps whose modulus has coefficients supported in
    /// a strictly lower level. An Eisenstein modulus only descends when the
    /// ramification index at the support level matches the one it was
    /// validated against; an irreducible unramified modulus stays
    /// irreducible over any smaller residue field containing its
    /// coefficients.
    pub fn stored_levels(&self) -> Vec<StoredLevel> {
        let mut out = Vec::new();
        for level in 0..=self.top() {
            let (e, f, d) = self.level_invariants(level);
            out.push(StoredLevel {
                e,
                f,
                d,
                kind: StoredLevelKind::Main { level },
            });
        }
        for (i, step) in self.steps.iter().enumerate() {
            let base = i;
            let support = self.moduli[i]
                .iter()
                .map(|c| self.support_level(base, c))
                .max()
                .unwrap_or(0);
            if support >= base {
                continue;
            }
            let (be, bf, bd) = self.level_invariants(support);
            let (e, f) = match step.kind {
                StepKind::Eisenstein => {
                    let (se, _, _) = self.level_invariants(base);
                    if se != be {
                        continue;
                    }
                    (be * step.degree as u64, bf)
                }
                StepKind::Unramified => (be, bf * step.degree as u64),
            };
            out.push(StoredLevel {
                e,
                f,
                d: bd * step.degree as u64,
                kind: StoredLevelKind::Derived {
                    step: i,
                    base_level: support,
                },
            });
        }
        out
    }
}

/// Reduce every bottom coordinate modulo a new modulus.
pub(crate) fn repr_mod(a: &Repr, pn: &BigUint) -> Repr {
    match a {
        Repr::Base(x) => Repr::Base(x % pn),
        Repr::Ext(v) => Repr::Ext(v.iter().map(|c| repr_mod(c, pn)).collect()),
    }
}

/// An element of a tower, carrying its tower handle.
#[derive(Debug, Clone)]
pub struct TowerElement {
    tower: Arc<TowerField>,
    repr: Repr,
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        *self.tower == *other.tower && self.repr == other.repr
    }
}
impl Eq for TowerElement {}

impl TowerElement {
    pub fn tower(&self) -> &Arc<TowerField> {
        &self.tower
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    /// Flattened coordinates, length equal to the tower degree.
    pub fn coords(&self) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(self.tower.dim(self.tower.top()));
        self.tower
            .flatten_into(self.tower.top(), &self.repr, &mut out);
        out
    }

    /// True when every coordinate is zero modulo p^N. Such an element has
    /// valuation at least N; it cannot be distinguished from zero.
    pub fn is_precision_zero(&self) -> bool {
        self.tower.view().is_zero(&self.repr)
    }

    /// Exact valuation in (1/e)Z. Fails with a below-precision error when
    /// all coordinates vanish modulo p^N.
    pub fn valuation(&self) -> Result<Rat> {
        self.tower
            .val_repr(self.tower.top(), &self.repr)
            .ok_or(Error::BelowPrecision {
                prime: self.tower.p,
                precision: self.tower.precision,
            })
    }

    /// Image in the residue field. Valid directly because all represented
    /// elements are integral.
    pub fn residue(&self) -> ResidueElt {
        ResidueElt {
            tower: self.tower.clone(),
            repr: self.tower.res_repr(self.tower.top(), &self.repr),
        }
    }

    pub fn add(&self, other: &TowerElement) -> TowerElement {
        debug_assert!(*self.tower == *other.tower);
        TowerElement {
            tower: self.tower.clone(),
            repr: self
                .tower
                .view()
                .add(self.tower.top(), &self.repr, &other.repr),
        }
    }

    pub fn sub(&self, other: &TowerElement) -> TowerElement {
        debug_assert!(*self.tower == *other.tower);
        TowerElement {
            tower: self.tower.clone(),
            repr: self
                .tower
                .view()
                .sub(self.tower.top(), &self.repr, &other.repr),
        }
    }

    pub fn mul(&self, other: &TowerElement) -> TowerElement {
        debug_assert!(*self.tower == *other.tower);
        TowerElement {
            tower: self.tower.clone(),
            repr: self
                .tower
                .view()
                .mul(self.tower.top(), &self.repr, &other.repr),
        }
    }

    pub fn neg(&self) -> TowerElement {
        TowerElement {
            tower: self.tower.clone(),
            repr: self.tower.view().neg(self.tower.top(), &self.repr),
        }
    }

    pub fn pow(&self, exp: u64) -> TowerElement {
        TowerElement {
            tower: self.tower.clone(),
            repr: self
                .tower
                .view()
                .pow(self.tower.top(), &self.repr, &BigUint::from(exp)),
        }
    }

    pub fn scale_uint(&self, n: &BigUint) -> TowerElement {
        self.mul(&self.tower.from_uint(n))
    }

    /// Reinterpret in a tower that extends this element's tower by further
    /// steps: coordinates are padded with zeros.
    pub fn embed_into(&self, target: &Arc<TowerField>) -> Result<TowerElement> {
        if !self.tower.is_prefix_of(target) {
            return Err(Error::InvalidArgument(
                "target tower does not extend the element's tower".into(),
            ));
        }
        let mut repr = self.repr.clone();
        for lvl in self.tower.top() + 1..=target.top() {
            repr = target.wrap_ext(lvl, repr);
        }
        Ok(TowerElement {
            tower: target.clone(),
            repr,
        })
    }

    /// The same element in the same tower at a lower precision.
    pub fn reduce_precision(&self, new_precision: u32) -> TowerElement {
        let tower = self.tower.reduce_precision(new_precision);
        let repr = repr_mod(&self.repr, tower.modulus_pn());
        TowerElement { tower, repr }
    }

    /// Smallest tower level containing the element.
    pub fn support_level(&self) -> usize {
        self.tower.support_level(self.tower.top(), &self.repr)
    }
}

/// An element of the residue field of a tower, as a nested coordinate vector
/// over the unramified steps with coordinates modulo p.
#[derive(Debug, Clone)]
pub struct ResidueElt {
    tower: Arc<TowerField>,
    repr: Repr,
}

impl PartialEq for ResidueElt {
    fn eq(&self, other: &Self) -> bool {
        *self.tower == *other.tower && self.repr == other.repr
    }
}
impl Eq for ResidueElt {}

impl ResidueElt {
    fn top(&self) -> usize {
        self.tower.res_level(self.tower.top())
    }

    pub fn is_zero(&self) -> bool {
        self.tower.res_view().is_zero(&self.repr)
    }

    /// Flattened coordinates over F_p, length equal to the residue degree.
    pub fn coords(&self) -> Vec<BigUint> {
        let mut out = Vec::new();
        res_flatten(&self.repr, &mut out);
        out
    }

    pub fn add(&self, other: &ResidueElt) -> ResidueElt {
        ResidueElt {
            tower: self.tower.clone(),
            repr: self
                .tower
                .res_view()
                .add(self.top(), &self.repr, &other.repr),
        }
    }

    pub fn sub(&self, other: &ResidueElt) -> ResidueElt {
        ResidueElt {
            tower: self.tower.clone(),
            repr: self
                .tower
                .res_view()
                .sub(self.top(), &self.repr, &other.repr),
        }
    }

    pub fn mul(&self, other: &ResidueElt) -> ResidueElt {
        ResidueElt {
            tower: self.tower.clone(),
            repr: self
                .tower
                .res_view()
                .mul(self.top(), &self.repr, &other.repr),
        }
    }

    pub fn inv(&self) -> Option<ResidueElt> {
        self.tower
            .res_inv(self.top(), &self.repr)
            .map(|repr| ResidueElt {
                tower: self.tower.clone(),
                repr,
            })
    }

    pub fn pow(&self, exp: &BigUint) -> ResidueElt {
        ResidueElt {
            tower: self.tower.clone(),
            repr: self.tower.res_view().pow(self.top(), &self.repr, exp),
        }
    }

    /// Frobenius x -> x^p.
    pub fn frobenius(&self) -> ResidueElt {
        self.pow(&BigUint::from(self.tower.p))
    }

    /// Whether the element lies in the subfield of p^k elements.
    pub fn in_subfield(&self, k: u64) -> bool {
        let q = BigUint::from(self.tower.p).pow(k as u32);
        self.pow(&q) == *self
    }

    /// Degree of the element over F_p: the least k with x^(p^k) = x.
    pub fn degree_over_fp(&self) -> u64 {
        let f = self.tower.f();
        for k in 1..=f {
            if f % k == 0 && self.in_subfield(k) {
                return k;
            }
        }
        unreachable!("element degree must divide the residue degree")
    }

    /// Lift back to the tower with digit coordinates below p.
    pub fn lift(&self) -> TowerElement {
        TowerElement {
            tower: self.tower.clone(),
            repr: self.tower.lift_res_repr(self.tower.top(), &self.repr),
        }
    }
}

fn res_flatten(a: &Repr, out: &mut Vec<BigUint>) {
    match a {
        Repr::Base(x) => out.push(x.clone()),
        Repr::Ext(v) => {
            for c in v {
                res_flatten(c, out);
            }
        }
    }
}

/// Ring adapter for generic polynomial code, operating at the top level of a
/// tower.
#[derive(Debug, Clone)]
pub struct TowerRing(pub Arc<TowerField>);

impl TowerRing {
    /// Exact valuation of a coefficient, None when it vanishes modulo p^N.
    pub fn val(&self, el: &Repr) -> Option<Rat> {
        self.0.val_repr(self.0.top(), el)
    }

    pub fn elem(&self, el: Repr) -> TowerElement {
        TowerElement {
            tower: self.0.clone(),
            repr: el,
        }
    }

    /// Coefficient view of a tower element, for assembling polynomials.
    pub fn coeff(&self, el: &TowerElement) -> Repr {
        debug_assert!(Arc::ptr_eq(el.tower(), &self.0));
        el.repr().clone()
    }
}

impl crate::poly::Ring for TowerRing {
    type El = Repr;

    fn zero(&self) -> Repr {
        self.0.view().zero(self.0.top())
    }
    fn one(&self) -> Repr {
        self.0.view().one(self.0.top())
    }
    fn add(&self, a: &Repr, b: &Repr) -> Repr {
        self.0.view().add(self.0.top(), a, b)
    }
    fn sub(&self, a: &Repr, b: &Repr) -> Repr {
        self.0.view().sub(self.0.top(), a, b)
    }
    fn mul(&self, a: &Repr, b: &Repr) -> Repr {
        self.0.view().mul(self.0.top(), a, b)
    }
    fn neg(&self, a: &Repr) -> Repr {
        self.0.view().neg(self.0.top(), a)
    }
    fn is_zero(&self, a: &Repr) -> bool {
        self.0.view().is_zero(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2(n: u32) -> Arc<TowerField> {
        TowerField::qp(2, n).unwrap()
    }

    #[test]
    fn base_field_invariants() {
        let k = q2(10);
        assert_eq!((k.e(), k.f(), k.degree()), (1, 1, 1));
        assert_eq!(k.dim(0), 1);
    }

    #[test]
    fn qp_rejects_composite() {
        assert!(matches!(TowerField::qp(6, 8), Err(Error::NotPrime(6))));
    }

    #[test]
    fn base_valuation_and_zero() {
        let k = q2(6);
        assert_eq!(k.from_uint(&BigUint::from(12u32)).valuation().unwrap(), rat_int(2));
        assert_eq!(k.one().valuation().unwrap(), rat_int(0));
        assert!(matches!(
            k.zero().valuation(),
            Err(Error::BelowPrecision { prime: 2, precision: 6 })
        ));
        // 64 = 2^6 reduces to zero at precision 6.
        assert!(k.from_uint(&BigUint::from(64u32)).is_precision_zero());
    }

    #[test]
    fn negative_integers_wrap() {
        let k = q2(6);
        let a = k.from_int(&BigInt::from(-3));
        assert_eq!(a.add(&k.from_int(&BigInt::from(3))), k.zero());
        assert_eq!(a.valuation().unwrap(), rat_int(0));
    }

    #[test]
    fn unramified_step_first_polynomial_f2() {
        // Over F_2 the first irreducible quadratic in enumeration order is
        // z^2 + z + 1.
        let k = q2(8).make_unramified_step(2).unwrap();
        assert_eq!((k.e(), k.f(), k.degree()), (1, 2, 2));
        let m = k.step_modulus(0);
        assert_eq!(m.len(), 3);
        assert_eq!(m[0], Repr::Base(BigUint::one()));
        assert_eq!(m[1], Repr::Base(BigUint::one()));
        assert_eq!(m[2], Repr::Base(BigUint::one()));
    }

    #[test]
    fn unramified_step_first_polynomial_f5() {
        // Over F_5: z^2 + 1 splits (2^2 = -1), z^2 + 2 is irreducible.
        let k = TowerField::qp(5, 8).unwrap().make_unramified_step(2).unwrap();
        let m = k.step_modulus(0);
        assert_eq!(m[0], Repr::Base(BigUint::from(2u32)));
        assert_eq!(m[1], Repr::Base(BigUint::zero()));
    }

    #[test]
    fn unramified_generator_valuation_zero_and_residue_degree() {
        let k = q2(8).make_unramified_step(3).unwrap();
        let u = k.generator(0);
        assert_eq!(u.valuation().unwrap(), rat_int(0));
        assert_eq!(u.residue().degree_over_fp(), 3);
        assert!(u.residue().in_subfield(3));
        assert!(!u.residue().in_subfield(1));
    }

    #[test]
    fn eisenstein_step_uniformizer() {
        // X^2 - 2 over Q_2: pi^2 = 2 exactly, v(pi) = 1/2.
        let k0 = q2(8);
        let v = k0.view();
        let modulus = vec![
            k0.from_int(&BigInt::from(-2)).repr().clone(),
            v.zero(0),
            v.one(0),
        ];
        let k = k0.make_eisenstein_step(&modulus).unwrap();
        assert_eq!((k.e(), k.f(), k.degree()), (2, 1, 2));
        let pi = k.generator(0);
        assert_eq!(pi.valuation().unwrap(), rat(1, 2));
        let two = k.from_uint(&BigUint::from(2u32));
        assert_eq!(pi.mul(&pi), two);
        assert_eq!(pi.pow(2), two);
    }

    #[test]
    fn eisenstein_rejects_unit_constant() {
        // X^2 - 1 has unit constant coefficient.
        let k0 = q2(8);
        let v = k0.view();
        let modulus = vec![k0.from_int(&BigInt::from(-1)).repr().clone(), v.zero(0), v.one(0)];
        match k0.make_eisenstein_step(&modulus) {
            Err(Error::NotEisenstein { index: 0, .. }) => {}
            other => panic!("expected eisenstein rejection, got {other:?}"),
        }
    }

    #[test]
    fn eisenstein_rejects_wrong_constant_valuation() {
        // X^2 - 4 has constant valuation 2, not 1.
        let k0 = q2(8);
        let v = k0.view();
        let modulus = vec![k0.from_int(&BigInt::from(-4)).repr().clone(), v.zero(0), v.one(0)];
        assert!(matches!(
            k0.make_eisenstein_step(&modulus),
            Err(Error::NotEisenstein { index: 0, .. })
        ));
    }

    #[test]
    fn eisenstein_rejects_bad_interior() {
        // X^2 + X - 2: interior coefficient is a unit.
        let k0 = q2(8);
        let v = k0.view();
        let modulus = vec![k0.from_int(&BigInt::from(-2)).repr().clone(), v.one(0), v.one(0)];
        assert!(matches!(
            k0.make_eisenstein_step(&modulus),
            Err(Error::NotEisenstein { index: 1, .. })
        ));
    }

    #[test]
    fn mixed_tower_invariants_and_valuations() {
        // Q_2 -> unramified f=2 -> eisenstein X^2 - 2: e=2, f=2, d=4.
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        assert_eq!((k2.e(), k2.f(), k2.degree()), (2, 2, 4));
        assert_eq!(k2.dim(2), 4);

        let pi = k2.generator(1);
        assert_eq!(pi.valuation().unwrap(), rat(1, 2));
        let u = k2.generator(0);
        assert_eq!(u.valuation().unwrap(), rat_int(0));
        // v(u * pi^3) = 3/2; v(2 * u) = 1; min formula on the sum gives 1.
        let x = u.mul(&pi.pow(3));
        assert_eq!(x.valuation().unwrap(), rat(3, 2));
        let y = u.scale_uint(&BigUint::from(2u32));
        let s = x.add(&y);
        assert_eq!(s.valuation().unwrap(), rat_int(1));
    }

    #[test]
    fn valuation_additivity_on_products() {
        let k1 = q2(12).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        let pi = k2.generator(1);
        let u = k2.generator(0);
        let a = pi.pow(3).add(&k2.from_uint(&BigUint::from(6u32)));
        let b = u.add(&pi);
        let va = a.valuation().unwrap();
        let vb = b.valuation().unwrap();
        assert_eq!(a.mul(&b).valuation().unwrap(), va + vb);
    }

    #[test]
    fn residue_projection_and_inverse() {
        let k = TowerField::qp(3, 8).unwrap().make_unramified_step(2).unwrap();
        let u = k.generator(0);
        let r = u.residue();
        assert!(!r.is_zero());
        let rinv = r.inv().unwrap();
        let prod = r.mul(&rinv);
        assert_eq!(prod, k.one().residue());
        // 3 projects to zero.
        assert!(k.from_uint(&BigUint::from(3u32)).residue().is_zero());
        assert!(k.zero().residue().inv().is_none());
    }

    #[test]
    fn residue_frobenius_fixes_prime_field() {
        let k = TowerField::qp(3, 8).unwrap().make_unramified_step(4).unwrap();
        let two = k.from_uint(&BigUint::from(2u32)).residue();
        assert_eq!(two.frobenius(), two);
        let u = k.generator(0).residue();
        assert_ne!(u.frobenius(), u);
        assert_eq!(u.degree_over_fp(), 4);
        // u + u^3 may drop to a proper subfield only if fixed by frob^2.
        let w = u.add(&u.pow(&BigUint::from(9u32)));
        assert!(w.in_subfield(4));
    }

    #[test]
    fn embedding_pads_coordinates() {
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        let u1 = k1.generator(0);
        let u2 = u1.embed_into(&k2).unwrap();
        assert_eq!(u2, k2.generator(0));
        assert_eq!(u2.support_level(), 1);
        assert_eq!(k2.generator(1).support_level(), 2);
        assert_eq!(k2.one().support_level(), 0);
        // Coordinates: degree 4, only the low block occupied.
        let c = u2.coords();
        assert_eq!(c.len(), 4);
        assert_eq!(c[1], BigUint::one());
        assert!(c[0].is_zero() && c[2].is_zero() && c[3].is_zero());
    }

    #[test]
    fn embedding_requires_prefix() {
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let other = q2(8).make_unramified_step(3).unwrap();
        assert!(k1.generator(0).embed_into(&other).is_err());
    }

    #[test]
    fn coords_roundtrip() {
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        let x = k2
            .generator(1)
            .add(&k2.generator(0).mul(&k2.from_uint(&BigUint::from(7u32))));
        let c = x.coords();
        let y = k2.from_coords(&c).unwrap();
        assert_eq!(x, y);
        assert!(k2.from_coords(&c[..3]).is_err());
    }

    #[test]
    fn precision_reduction_is_coordinatewise() {
        let k = q2(8);
        let x = k.from_uint(&BigUint::from(200u32));
        let xr = x.reduce_precision(4);
        assert_eq!(xr.tower().precision(), 4);
        assert_eq!(xr.coords()[0], BigUint::from(200u32 % 16));
        assert_eq!(x.reduce_precision(8), x);
    }

    #[test]
    fn stored_levels_of_plain_tower() {
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let levels = k1.stored_levels();
        assert_eq!(levels.len(), 2);
        assert_eq!((levels[0].e, levels[0].f, levels[0].d), (1, 1, 1));
        assert_eq!((levels[1].e, levels[1].f, levels[1].d), (1, 2, 2));
    }

    #[test]
    fn stored_levels_derived_eisenstein() {
        // Unramified step, then an Eisenstein modulus with rational
        // coefficients: the step descends to level 0 and records the
        // totally ramified quadratic subfield.
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        let levels = k2.stored_levels();
        assert_eq!(levels.len(), 4);
        let derived = &levels[3];
        assert_eq!((derived.e, derived.f, derived.d), (2, 1, 2));
        assert_eq!(
            derived.kind,
            StoredLevelKind::Derived {
                step: 1,
                base_level: 0
            }
        );
    }

    #[test]
    fn tower_prefix_nesting() {
        let k1 = q2(8).make_unramified_step(2).unwrap();
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-2)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        assert!(k1.is_prefix_of(&k2));
        assert!(!k2.is_prefix_of(&k1));
        assert!(k1.is_prefix_of(&k1));
    }

    #[test]
    fn uniformizer_selection() {
        let k0 = TowerField::qp(3, 8).unwrap();
        assert_eq!(k0.uniformizer().valuation().unwrap(), rat_int(1));
        let k1 = k0.make_unramified_step(2).unwrap();
        assert_eq!(k1.uniformizer().valuation().unwrap(), rat_int(1));
        let v1 = k1.view();
        let modulus = vec![
            k1.from_int(&BigInt::from(-3)).repr().clone(),
            v1.zero(1),
            v1.one(1),
        ];
        let k2 = k1.make_eisenstein_step(&modulus).unwrap();
        assert_eq!(k2.uniformizer().valuation().unwrap(), rat(1, 2));
        assert!(k2.unram_generator().is_some());
        assert!(k0.unram_generator().is_none());
    }

    #[test]
    fn deep_tower_pi_powers_hit_every_denominator() {
        // e = 4 via two stacked quadratic Eisenstein steps.
        let k0 = q2(10);
        let v0 = k0.view();
        let m1 = vec![k0.from_int(&BigInt::from(-2)).repr().clone(), v0.zero(0), v0.one(0)];
        let k1 = k0.make_eisenstein_step(&m1).unwrap();
        // X^2 - pi_1 over k1.
        let pi1 = k1.generator(0);
        let v1 = k1.view();
        let m2 = vec![v1.neg(1, pi1.repr()), v1.zero(1), v1.one(1)];
        let k2 = k1.make_eisenstein_step(&m2).unwrap();
        assert_eq!(k2.e(), 4);
        let pi2 = k2.generator(1);
        for k in 1..=8u64 {
            assert_eq!(pi2.pow(k).valuation().unwrap(), rat(k as i64, 4));
        }
        // pi2^4 = 2 exactly.
        assert_eq!(pi2.pow(4), k2.from_uint(&BigUint::from(2u32)));
    }
}
