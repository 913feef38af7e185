//! Formal Baker–Akhiezer functions `T(e^eps)` with
//! `e^eps = exp(x1 z1^-1 + x2 z2^-1)`, eigenvalues of dressed operators and
//! the Sato–Wilson right-hand sides.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::reduce_to_v;
use crate::d1::D1Op;
use crate::eplus::{invert_monic, EPlusOp};
use crate::error::{math, Result};
use crate::rat::ratio;
use crate::series::{GammaDeg, XSeries};
use crate::zseries::{tail_add, ZSeries, EXACT};

/// `sum c_{ij}(x) z1^{-i} z2^{j} e^eps`, known for `j < z_tail`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BAWire", into = "BAWire")]
pub struct BAFunction {
    body: BTreeMap<(u32, i64), XSeries>,
    z_tail: i64,
}

impl BAFunction {
    pub fn z_tail(&self) -> i64 {
        self.z_tail
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, i64), &XSeries)> {
        self.body.iter()
    }

    pub fn coeff(&self, i: u32, j: i64) -> Option<&XSeries> {
        self.body.get(&(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.body.values().all(|c| c.is_zero())
    }

    /// Multiplication by a series in `z`, which commutes with every
    /// coefficient.
    pub fn mul_z(&self, a: &ZSeries) -> BAFunction {
        let floor = self.body.keys().map(|k| k.1).min().unwrap_or(self.z_tail).min(self.z_tail);
        let a_floor = a.terms().map(|((_, j), _)| j).min().unwrap_or(a.tail()).min(a.tail());
        let tail = tail_add(self.z_tail, a_floor).min(tail_add(a.tail(), floor));
        let mut body: BTreeMap<(u32, i64), XSeries> = BTreeMap::new();
        for (&(i, j), c) in &self.body {
            for ((ai, aj), ac) in a.terms() {
                let key = (i + ai, j + aj);
                if key.1 >= tail {
                    continue;
                }
                let t = c.scale(ac);
                let e = body.entry(key).or_insert_with(|| XSeries::zero(t.prec()));
                *e = e.add(&t);
            }
        }
        body.retain(|_, c| !c.is_zero());
        BAFunction { body, z_tail: tail }
    }

    /// Equality where both sides are known.
    pub fn agrees_with(&self, other: &BAFunction) -> bool {
        let t = self.z_tail.min(other.z_tail);
        let keys: std::collections::BTreeSet<_> = self
            .body
            .keys()
            .chain(other.body.keys())
            .filter(|k| k.1 < t)
            .copied()
            .collect();
        keys.into_iter().all(|k| match (self.body.get(&k), other.body.get(&k)) {
            (Some(a), Some(b)) => a.agrees_with(b),
            (Some(a), None) | (None, Some(a)) => a.is_zero(),
            (None, None) => true,
        })
    }
}

/// `d1^a d2^b -> z1^{-a} z2^{-b}` applied coefficient by coefficient.
pub fn apply_to_exponential(t: &EPlusOp) -> BAFunction {
    let mut body = BTreeMap::new();
    for ((q, s), c) in t.terms() {
        if !c.is_zero() {
            body.insert((q, -s), c);
        }
    }
    BAFunction {
        body,
        z_tail: 1 - t.window_lo(),
    }
}

/// The eigenvalue `a(z)` with `p S^-1 e^eps = a(z) S^-1 e^eps`.
///
/// `s p s^-1` must have constant coefficients to precision; it is returned
/// transliterated as a series in `z`.
pub fn eigenvalue_check(p: &EPlusOp, s: &EPlusOp) -> Result<ZSeries> {
    if s.gamma_order()? != GammaDeg::new(0, 0) {
        return math("dressing operator must have Γ-order (0,0)");
    }
    let s_inv = invert_monic(s)?;
    let y = s.mul(p).mul(&s_inv);
    for ((q, b), c) in y.terms() {
        if !c.is_constant() {
            return math(format!(
                "conjugate has a non-constant coefficient at d1^{q} d2^{b}"
            ));
        }
    }
    Ok(reduce_to_v(&y))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BATermWire {
    pub i: u32,
    pub j: i64,
    pub coeff: XSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BAWire {
    pub z_tail: Option<i64>,
    pub terms: Vec<BATermWire>,
}

impl From<BAFunction> for BAWire {
    fn from(b: BAFunction) -> Self {
        BAWire {
            z_tail: (b.z_tail != EXACT).then_some(b.z_tail),
            terms: b
                .body
                .into_iter()
                .map(|((i, j), coeff)| BATermWire { i, j, coeff })
                .collect(),
        }
    }
}

impl TryFrom<BAWire> for BAFunction {
    type Error = crate::error::Error;
    fn try_from(w: BAWire) -> Result<Self> {
        let z_tail = w.z_tail.unwrap_or(EXACT);
        let mut body = BTreeMap::new();
        for t in w.terms {
            if t.j >= z_tail {
                return crate::error::format(format!("term z1^-{} z2^{} lies beyond z_tail", t.i, t.j));
            }
            if body.insert((t.i, t.j), t.coeff).is_some() {
                return crate::error::format(format!("duplicate term z1^-{} z2^{}", t.i, t.j));
            }
        }
        Ok(BAFunction { body, z_tail })
    }
}

/// The three right-hand sides
/// `1/4 s''' - 3/2 (s_x2)^2`,
/// `-s_x2 s_x1 - 1/2 s_x2x2 d1` and
/// `-(s_x1)^2 - s_x1x2 d1 - s_x2 d1^2`,
/// with derivatives taken coefficient-wise and products in `D̂1`.
#[derive(Clone, Debug)]
pub struct SatoWilsonRhs {
    pub rhs1: D1Op,
    pub rhs2: EPlusOp,
    pub rhs3: EPlusOp,
}

pub fn sato_wilson_rhs(s1: &D1Op) -> SatoWilsonRhs {
    let prec = s1.prec();
    let d1 = D1Op::d1_pow(1, prec);
    let d1sq = D1Op::d1_pow(2, prec);
    let s2 = s1.d_dx(2);
    let s1x = s1.d_dx(1);
    let s22 = s2.d_dx(2);
    let s222 = s22.d_dx(2);
    let s12 = s1x.d_dx(2);
    let rhs1 = s222.scale(&ratio(1, 4)).sub(&s2.mul(&s2).scale(&ratio(3, 2)));
    let rhs2 = s2.mul(&s1x).neg().sub(&s22.mul(&d1).scale(&ratio(1, 2)));
    let rhs3 = s1x.mul(&s1x).neg().sub(&s12.mul(&d1)).sub(&s2.mul(&d1sq));
    SatoWilsonRhs {
        rhs1,
        rhs2: EPlusOp::monomial(rhs2, 0, 0),
        rhs3: EPlusOp::monomial(rhs3, 0, 0),
    }
}
