//! Row reduction over Z/p^N with exact span-membership testing.
//!
//! Rows are kept in echelon form ordered by pivot column, each pivot being
//! the entry of minimal p-valuation seen for its column. For every placed row
//! with pivot valuation w > 0 the scaled row p^(N-w) * row is inserted as
//! well, so the stored rows cover the row span of the inserted rows as a
//! Z/p^N-module and greedy reduction decides membership exactly. Nothing is
//! ever divided by p: multipliers are always integral, so every derived
//! relation holds modulo p^N on the nose.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::vp_uint;

/// Online elimination state over Z/p^N.
#[derive(Debug, Clone)]
pub struct PadicSolver {
    p: u64,
    exp: u32,
    pn: BigUint,
    cols: usize,
    combo_width: usize,
    n_orig: usize,
    rows: Vec<EchRow>,
}

#[derive(Debug, Clone)]
struct EchRow {
    pivot: usize,
    pval: u32,
    /// Scaled consequence of other rows rather than (a reduction of) an
    /// inserted row; tracked apart so skew diagnostics only count real rows.
    shadow: bool,
    data: Vec<BigUint>,
    combo: Vec<BigUint>,
}

/// A linear relation among inserted rows: sum_j combo[j] * row_j = 0 modulo
/// p^N, with combo equal to 1 at the row that completed the relation.
#[derive(Debug, Clone)]
pub struct Relation {
    pub combo: Vec<BigUint>,
    /// Largest pivot valuation the final reduction leaned on; digits beyond
    /// p^(N - used_pval) of the relation carry no information.
    pub used_pval: u32,
}

/// Inverse of a unit modulo m.
pub fn inv_mod(u: &BigUint, m: &BigUint) -> BigUint {
    let u = BigInt::from(u.clone());
    let m_int = BigInt::from(m.clone());
    let ext = u.extended_gcd(&m_int);
    debug_assert!(ext.gcd.is_one(), "inverse of a non-unit");
    let mut x = ext.x % &m_int;
    if x.is_negative() {
        x += &m_int;
    }
    x.to_biguint().unwrap()
}

impl PadicSolver {
    pub fn new(p: u64, exp: u32, cols: usize, combo_width: usize) -> Self {
        PadicSolver {
            p,
            exp,
            pn: BigUint::from(p).pow(exp),
            cols,
            combo_width,
            n_orig: 0,
            rows: Vec::new(),
        }
    }

    fn subm(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.pn + a - b
        }
    }

    /// data <- data - mult * row, modulo p^N, in place.
    fn submul(&self, data: &mut [BigUint], mult: &BigUint, row: &[BigUint]) {
        for (d, r) in data.iter_mut().zip(row.iter()) {
            if !r.is_zero() {
                let t = (mult * r) % &self.pn;
                *d = self.subm(d, &t);
            }
        }
    }

    /// Eliminates `data` against the stored rows where possible, returning
    /// the largest pivot valuation actually leaned on. Entries whose
    /// valuation is below the pivot valuation of their column are left
    /// alone. Rows have zeros left of their pivots and are visited in pivot
    /// order, so one ascending pass is complete.
    fn try_reduce(&self, data: &mut [BigUint], combo: &mut [BigUint]) -> u32 {
        let mut used = 0u32;
        for row in &self.rows {
            let c = row.pivot;
            if data[c].is_zero() {
                continue;
            }
            let v = vp_uint(&data[c], self.p) as u32;
            if v < row.pval {
                continue;
            }
            let pw = BigUint::from(self.p).pow(row.pval);
            let unit = &row.data[c] / &pw;
            let uinv = inv_mod(&unit, &self.pn);
            let mult = ((&data[c] / &pw) * &uinv) % &self.pn;
            self.submul(data, &mult, &row.data);
            self.submul(combo, &mult, &row.combo);
            used = used.max(row.pval);
            debug_assert!(data[c].is_zero());
        }
        used
    }

    fn first_nonzero(&self, data: &[BigUint], from: usize) -> Option<usize> {
        (from..self.cols).find(|i| !data[*i].is_zero())
    }

    /// Places a reduced nonzero row into the echelon structure, swapping
    /// when it provides a better pivot, and spawns the scaled shadow rows
    /// needed for exact membership testing.
    fn place(&mut self, mut data: Vec<BigUint>, mut combo: Vec<BigUint>, mut shadow: bool) {
        let mut col = 0usize;
        loop {
            let c = match self.first_nonzero(&data, col) {
                Some(c) => c,
                None => return,
            };
            col = c;
            let v = vp_uint(&data[c], self.p) as u32;
            match self.rows.iter().position(|r| r.pivot == c) {
                Some(i) if self.rows[i].pval <= v => {
                    let row = self.rows[i].clone();
                    let pw = BigUint::from(self.p).pow(row.pval);
                    let unit = &row.data[c] / &pw;
                    let uinv = inv_mod(&unit, &self.pn);
                    let mult = ((&data[c] / &pw) * &uinv) % &self.pn;
                    self.submul(&mut data, &mult, &row.data);
                    self.submul(&mut combo, &mult, &row.combo);
                }
                Some(i) => {
                    // The incoming row has a strictly better pivot here;
                    // swap and keep placing the displaced row.
                    std::mem::swap(&mut self.rows[i].data, &mut data);
                    std::mem::swap(&mut self.rows[i].combo, &mut combo);
                    self.rows[i].pval = v;
                    std::mem::swap(&mut self.rows[i].shadow, &mut shadow);
                    self.spawn_shadow(i);
                }
                None => {
                    self.rows.push(EchRow {
                        pivot: c,
                        pval: v,
                        shadow,
                        data,
                        combo,
                    });
                    self.rows.sort_by_key(|r| r.pivot);
                    let i = self.rows.iter().position(|r| r.pivot == c).unwrap();
                    self.spawn_shadow(i);
                    return;
                }
            }
        }
    }

    /// For a row with pivot valuation w > 0, p^(N-w) times the row is also
    /// in the span and has support strictly to the right of the pivot.
    /// Terminates because spawned rows carry strictly larger pivot
    /// valuations until everything scales to zero.
    fn spawn_shadow(&mut self, i: usize) {
        let w = self.rows[i].pval;
        if w == 0 {
            return;
        }
        let shift = BigUint::from(self.p).pow(self.exp - w);
        let mut data: Vec<BigUint> = self.rows[i]
            .data
            .iter()
            .map(|x| (x * &shift) % &self.pn)
            .collect();
        let mut combo: Vec<BigUint> = self.rows[i]
            .combo
            .iter()
            .map(|x| (x * &shift) % &self.pn)
            .collect();
        // The pivot entry is exactly p^w times a unit, so the scaled entry
        // vanishes modulo p^N; the rest may still carry information.
        data[self.rows[i].pivot] = BigUint::zero();
        self.try_reduce(&mut data, &mut combo);
        if self.first_nonzero(&data, 0).is_some() {
            self.place(data, combo, true);
        }
    }

    /// Inserts a row. If it lies in the span of the rows inserted so far,
    /// returns the relation expressing that; otherwise stores the row.
    pub fn insert(&mut self, data: Vec<BigUint>) -> Option<Relation> {
        debug_assert_eq!(data.len(), self.cols);
        debug_assert!(self.n_orig < self.combo_width, "combo width exhausted");
        let k = self.n_orig;
        self.n_orig += 1;
        let mut combo = vec![BigUint::zero(); self.combo_width];
        combo[k] = BigUint::one();
        let mut data: Vec<BigUint> = data.into_iter().map(|x| x % &self.pn).collect();
        let used = self.try_reduce(&mut data, &mut combo);
        if self.first_nonzero(&data, 0).is_none() {
            return Some(Relation {
                combo,
                used_pval: used,
            });
        }
        self.place(data, combo, false);
        None
    }

    /// Span membership without insertion: Some(c) with
    /// row = sum_j c[j] * original_row_j modulo p^N when the row lies in
    /// the span of everything inserted so far.
    pub fn probe(&self, data: &[BigUint]) -> Option<Vec<BigUint>> {
        debug_assert_eq!(data.len(), self.cols);
        let mut data: Vec<BigUint> = data.iter().map(|x| x % &self.pn).collect();
        // Accumulate the expression with positive sign: data = sum mult*row.
        let mut acc = vec![BigUint::zero(); self.combo_width];
        for row in &self.rows {
            let c = row.pivot;
            if data[c].is_zero() {
                continue;
            }
            let v = vp_uint(&data[c], self.p) as u32;
            if v < row.pval {
                continue;
            }
            let pw = BigUint::from(self.p).pow(row.pval);
            let unit = &row.data[c] / &pw;
            let uinv = inv_mod(&unit, &self.pn);
            let mult = ((&data[c] / &pw) * &uinv) % &self.pn;
            self.submul(&mut data, &mult, &row.data);
            for (a, rc) in acc.iter_mut().zip(row.combo.iter()) {
                *a = (&*a + &mult * rc) % &self.pn;
            }
        }
        if self.first_nonzero(&data, 0).is_none() {
            Some(acc)
        } else {
            None
        }
    }

    /// Largest pivot valuation among stored non-shadow rows: a measure of
    /// how skewed the inserted lattice is. Zero when nothing is stored.
    pub fn max_pivot_val(&self) -> u32 {
        self.rows
            .iter()
            .filter(|r| !r.shadow)
            .map(|r| r.pval)
            .max()
            .unwrap_or(0)
    }
}
