//! Enumeration of the quadratic and some cubic extensions of Q_p, one tower
//! per isomorphism class, from the classical unit-square-class counts.

use super::TowerField;
use crate::scalar::mod_pow;
use crate::{Error, Result};
use num_bigint::BigInt;
use std::sync::Arc;

/// One isomorphism class of a small extension, realized as a tower.
#[derive(Debug, Clone)]
pub struct ExtensionClass {
    pub tower: Arc<TowerField>,
    pub label: String,
}

impl ExtensionClass {
    pub fn e(&self) -> u64 {
        self.tower.e()
    }
    pub fn f(&self) -> u64 {
        self.tower.f()
    }
}

fn eis_from_ints(base: &Arc<TowerField>, coeffs: &[i64]) -> Result<Arc<TowerField>> {
    let modulus: Vec<_> = coeffs
        .iter()
        .map(|c| base.from_int(&BigInt::from(*c)).repr().clone())
        .collect();
    base.make_eisenstein_step(&modulus)
}

fn poly_label(coeffs: &[i64]) -> String {
    // Render a monic integer polynomial, highest degree first.
    let deg = coeffs.len() - 1;
    let mut s = format!("X^{deg}");
    for (i, c) in coeffs.iter().enumerate().take(deg).collect::<Vec<_>>().into_iter().rev() {
        if *c == 0 {
            continue;
        }
        let sign = if *c < 0 { "-" } else { "+" };
        let abs = c.abs();
        let coeff = if abs == 1 && i > 0 {
            String::new()
        } else {
            abs.to_string()
        };
        let var = match i {
            0 => String::new(),
            1 => "X".into(),
            _ => format!("X^{i}"),
        };
        let mid = if coeff.is_empty() || var.is_empty() { "" } else { "*" };
        s.push_str(&format!("{sign}{coeff}{mid}{var}"));
    }
    s
}

/// Least quadratic non-residue modulo an odd prime.
fn least_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&c| mod_pow(c, (p - 1) / 2, p) != 1)
        .expect("odd primes have non-residues")
}

/// All extensions of Q_p of the given degree, one tower per isomorphism
/// class. Supported: quadratics at p in {2, 3, 5} and cubics at p in {2, 5}.
/// Cubics of Q_3 are wildly ramified and need invariants beyond (e, f), so
/// they are refused rather than misclassified.
pub fn enumerate_small_extensions(
    p: u64,
    degree: u32,
    precision: u32,
) -> Result<Vec<ExtensionClass>> {
    if !matches!((p, degree), (2 | 3 | 5, 2) | (2 | 5, 3)) {
        return Err(Error::Unsupported(format!(
            "no enumeration for degree-{degree} extensions of Q_{p}"
        )));
    }
    let base = TowerField::qp(p, precision)?;
    let mut out = Vec::new();
    out.push(ExtensionClass {
        tower: base.make_unramified_step(degree as u64)?,
        label: "unramified".into(),
    });
    let ip = p as i64;
    let ramified: Vec<Vec<i64>> = match (p, degree) {
        (2, 2) => vec![
            // Square classes 2, -2, 10, -10, -1, -5 of Q_2.
            vec![-2, 0, 1],
            vec![2, 0, 1],
            vec![-10, 0, 1],
            vec![10, 0, 1],
            vec![2, -2, 1],
            vec![6, -2, 1],
        ],
        (_, 2) => {
            let c = least_nonresidue(p) as i64;
            vec![vec![-ip, 0, 1], vec![-c * ip, 0, 1]]
        }
        (_, 3) => {
            // Cubing is onto the units of Z_2 and Z_5, so one totally
            // ramified class.
            vec![vec![-ip, 0, 0, 1]]
        }
        _ => unreachable!(),
    };
    for coeffs in ramified {
        out.push(ExtensionClass {
            tower: eis_from_ints(&base, &coeffs)?,
            label: poly_label(&coeffs),
        });
    }
    Ok(out)
}
