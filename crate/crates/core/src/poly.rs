//! Dense univariate polynomials over a ring given by a context object.
//!
//! Coefficients are stored constant term first and the leading coefficient is
//! kept nonzero (the zero polynomial has an empty coefficient list). All
//! operations take the ring context explicitly, so element types that only
//! make sense relative to a context (tower coordinates, residue fields) reuse
//! the same code as exact rationals.

use crate::scalar::Rat;
use num_traits::Zero;

/// Ring operations on elements of type `Self::El`.
pub trait Ring {
    type El: Clone + PartialEq + std::fmt::Debug;

    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn sub(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;

    fn is_zero(&self, a: &Self::El) -> bool {
        *a == self.zero()
    }
}

/// Rings whose nonzero elements are invertible.
pub trait Field: Ring {
    /// Multiplicative inverse; None for zero.
    fn inv(&self, a: &Self::El) -> Option<Self::El>;
}

/// The rational numbers as a ring context.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatField;

impl Ring for RatField {
    type El = Rat;

    fn zero(&self) -> Rat {
        Rat::zero()
    }
    fn one(&self) -> Rat {
        Rat::from_integer(1.into())
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        a - b
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
    fn neg(&self, a: &Rat) -> Rat {
        -a
    }
    fn is_zero(&self, a: &Rat) -> bool {
        a.is_zero()
    }
}

impl Field for RatField {
    fn inv(&self, a: &Rat) -> Option<Rat> {
        if a.is_zero() {
            None
        } else {
            Some(self.one() / a)
        }
    }
}

/// Polynomial with coefficients in some ring, constant term first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + PartialEq + std::fmt::Debug> Poly<T> {
    /// Builds a polynomial, trimming leading coefficients that are zero in
    /// the given ring.
    pub fn new<R: Ring<El = T>>(ring: &R, mut coeffs: Vec<T>) -> Self {
        while coeffs.last().map_or(false, |c| ring.is_zero(c)) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant<R: Ring<El = T>>(ring: &R, c: T) -> Self {
        Poly::new(ring, vec![c])
    }

    /// The monomial X.
    pub fn x<R: Ring<El = T>>(ring: &R) -> Self {
        Poly::new(ring, vec![ring.zero(), ring.one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of X^i, padding with zero beyond the stored length.
    pub fn coeff<R: Ring<El = T>>(&self, ring: &R, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(|| ring.zero())
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn is_monic<R: Ring<El = T>>(&self, ring: &R) -> bool {
        self.leading().map_or(false, |c| *c == ring.one())
    }
}

pub fn add<R: Ring>(ring: &R, f: &Poly<R::El>, g: &Poly<R::El>) -> Poly<R::El> {
    let n = f.coeffs.len().max(g.coeffs.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(ring.add(&f.coeff(ring, i), &g.coeff(ring, i)));
    }
    Poly::new(ring, out)
}

pub fn sub<R: Ring>(ring: &R, f: &Poly<R::El>, g: &Poly<R::El>) -> Poly<R::El> {
    let n = f.coeffs.len().max(g.coeffs.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(ring.sub(&f.coeff(ring, i), &g.coeff(ring, i)));
    }
    Poly::new(ring, out)
}

pub fn neg<R: Ring>(ring: &R, f: &Poly<R::El>) -> Poly<R::El> {
    Poly::new(ring, f.coeffs.iter().map(|c| ring.neg(c)).collect())
}

pub fn mul<R: Ring>(ring: &R, f: &Poly<R::El>, g: &Poly<R::El>) -> Poly<R::El> {
    if f.is_zero() || g.is_zero() {
        return Poly::zero();
    }
    let mut out = vec![ring.zero(); f.coeffs.len() + g.coeffs.len() - 1];
    for (i, a) in f.coeffs.iter().enumerate() {
        for (j, b) in g.coeffs.iter().enumerate() {
            out[i + j] = ring.add(&out[i + j], &ring.mul(a, b));
        }
    }
    Poly::new(ring, out)
}

pub fn mul_scalar<R: Ring>(ring: &R, f: &Poly<R::El>, c: &R::El) -> Poly<R::El> {
    Poly::new(ring, f.coeffs.iter().map(|a| ring.mul(a, c)).collect())
}

/// Evaluation by Horner's rule.
pub fn eval<R: Ring>(ring: &R, f: &Poly<R::El>, x: &R::El) -> R::El {
    let mut acc = ring.zero();
    for c in f.coeffs.iter().rev() {
        acc = ring.add(&ring.mul(&acc, x), c);
    }
    acc
}

/// f(g(X)), by Horner's rule in the polynomial ring.
pub fn compose<R: Ring>(ring: &R, f: &Poly<R::El>, g: &Poly<R::El>) -> Poly<R::El> {
    let mut acc = Poly::zero();
    for c in f.coeffs.iter().rev() {
        acc = mul(ring, &acc, g);
        acc = add(ring, &acc, &Poly::constant(ring, c.clone()));
    }
    acc
}

pub fn derivative<R: Ring>(ring: &R, f: &Poly<R::El>) -> Poly<R::El> {
    if f.coeffs.len() <= 1 {
        return Poly::zero();
    }
    let mut out = Vec::with_capacity(f.coeffs.len() - 1);
    let mut k = ring.one();
    for c in &f.coeffs[1..] {
        out.push(ring.mul(&k, c));
        k = ring.add(&k, &ring.one());
    }
    Poly::new(ring, out)
}

/// Quotient and remainder of f by a nonzero divisor with invertible leading
/// coefficient.
pub fn divmod<F: Field>(
    field: &F,
    f: &Poly<F::El>,
    g: &Poly<F::El>,
) -> (Poly<F::El>, Poly<F::El>) {
    let gdeg = g.degree().expect("division by the zero polynomial");
    let lead_inv = field
        .inv(g.leading().unwrap())
        .expect("leading coefficient of divisor is not invertible");
    let mut rem = f.coeffs.clone();
    if rem.len() <= gdeg {
        return (Poly::zero(), f.clone());
    }
    let mut quot = vec![field.zero(); rem.len() - gdeg];
    for k in (gdeg..rem.len()).rev() {
        let c = field.mul(&rem[k], &lead_inv);
        if field.is_zero(&c) {
            continue;
        }
        quot[k - gdeg] = c.clone();
        for i in 0..=gdeg {
            let t = field.mul(&c, &g.coeffs[i]);
            rem[k - gdeg + i] = field.sub(&rem[k - gdeg + i], &t);
        }
    }
    (Poly::new(field, quot), Poly::new(field, rem))
}

/// Monic greatest common divisor over a field.
pub fn gcd_monic<F: Field>(field: &F, f: &Poly<F::El>, g: &Poly<F::El>) -> Poly<F::El> {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_zero() {
        let (_, r) = divmod(field, &a, &b);
        a = b;
        b = r;
    }
    match a.leading() {
        None => a,
        Some(lead) => {
            let inv = field.inv(lead).unwrap();
            mul_scalar(field, &a, &inv)
        }
    }
}
