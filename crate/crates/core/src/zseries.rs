//! Truncated elements of `k[z1^-1]((z2))`.
//!
//! A term `(i, j)` stands for `z1^{-i} z2^{j}`. Terms with `j >= tail` are
//! unknown; `tail == EXACT` marks a series known completely. When `i_bound`
//! is set, terms with `i > i_bound` are unknown as well.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{format, Error, Result};
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::series::GammaDeg;

pub const EXACT: i64 = i64::MAX;

pub(crate) fn tail_add(t: i64, d: i64) -> i64 {
    if t == EXACT {
        EXACT
    } else {
        t.saturating_add(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ZSeriesWire", into = "ZSeriesWire")]
pub struct ZSeries {
    // keyed (j, i) so that iteration runs along increasing z2-exponent
    terms: BTreeMap<(i64, u32), Rat>,
    tail: i64,
    i_bound: Option<u32>,
}

impl ZSeries {
    pub fn zero(tail: i64) -> Self {
        ZSeries {
            terms: BTreeMap::new(),
            tail,
            i_bound: None,
        }
    }

    pub fn exact_zero() -> Self {
        Self::zero(EXACT)
    }

    /// `c z1^{-i} z2^{j}` known exactly.
    pub fn monomial(i: u32, j: i64, c: Rat) -> Self {
        let mut z = Self::exact_zero();
        z.add_term(i, j, c);
        z
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, i64), Rat)>>(it: I, tail: i64) -> Self {
        let mut z = Self::zero(tail);
        for ((i, j), c) in it {
            z.add_term(i, j, c);
        }
        z
    }

    pub fn with_i_bound(mut self, b: Option<u32>) -> Self {
        self.i_bound = b;
        if let Some(b) = b {
            self.terms.retain(|&(_, i), _| i <= b);
        }
        self
    }

    /// Adds `c z1^{-i} z2^{j}`; ignored beyond the known region.
    pub fn add_term(&mut self, i: u32, j: i64, c: Rat) {
        if j >= self.tail || c.is_zero() {
            return;
        }
        if let Some(b) = self.i_bound {
            if i > b {
                return;
            }
        }
        let e = self.terms.entry((j, i)).or_insert_with(Rat::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(j, i));
        }
    }

    pub fn tail(&self) -> i64 {
        self.tail
    }

    pub fn i_bound(&self) -> Option<u32> {
        self.i_bound
    }

    pub fn is_exact(&self) -> bool {
        self.tail == EXACT && self.i_bound.is_none()
    }

    /// Terms as `((i, j), c)` in increasing `j`, then increasing `i`.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, i64), &Rat)> {
        self.terms.iter().map(|(&(j, i), c)| ((i, j), c))
    }

    pub fn coeff(&self, i: u32, j: i64) -> Rat {
        self.terms.get(&(j, i)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Lowest term: smallest `z2`-exponent, then largest `i` (the
    /// anti-lexicographic minimum of the degree `(-i, j)`).
    pub fn lt(&self) -> Option<(u32, i64, Rat)> {
        let (&(j, _), _) = self.terms.iter().next()?;
        let (&(_, i), c) = self.terms.range((j, 0)..=(j, u32::MAX)).next_back()?;
        Some((i, j, c.clone()))
    }

    pub fn ord_gamma(&self) -> Option<GammaDeg> {
        self.lt().map(|(i, j, _)| GammaDeg::new(-(i as i64), j))
    }

    pub fn truncate_tail(&self, t: i64) -> ZSeries {
        let t = t.min(self.tail);
        ZSeries {
            terms: self
                .terms
                .range(..(t, 0))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            tail: t,
            i_bound: self.i_bound,
        }
    }

    fn combine_bounds(a: Option<u32>, b: Option<u32>) -> Option<u32> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (Some(x), None) | (None, Some(x)) => Some(x),
            (None, None) => None,
        }
    }

    pub fn add(&self, other: &ZSeries) -> ZSeries {
        let mut out = self
            .truncate_tail(other.tail)
            .with_i_bound(Self::combine_bounds(self.i_bound, other.i_bound));
        for (&(j, i), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn neg(&self) -> ZSeries {
        ZSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
            tail: self.tail,
            i_bound: self.i_bound,
        }
    }

    pub fn sub(&self, other: &ZSeries) -> ZSeries {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> ZSeries {
        if c.is_zero() {
            return ZSeries {
                terms: BTreeMap::new(),
                tail: self.tail,
                i_bound: self.i_bound,
            };
        }
        ZSeries {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
            tail: self.tail,
            i_bound: self.i_bound,
        }
    }

    /// `c * z1^{-di} z2^{dj} * self`.
    pub fn shift(&self, di: u32, dj: i64) -> ZSeries {
        ZSeries {
            terms: self
                .terms
                .iter()
                .map(|(&(j, i), v)| ((j + dj, i + di), v.clone()))
                .collect(),
            tail: tail_add(self.tail, dj),
            i_bound: self.i_bound.map(|b| b + di),
        }
    }

    /// Terms with `j <= 0`.
    pub fn nonpositive_part(&self) -> ZSeries {
        ZSeries {
            terms: self
                .terms
                .range(..(1, 0))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            tail: self.tail.min(1),
            i_bound: self.i_bound,
        }
    }

    /// Product of two series, for monomial-cone checks.
    pub fn mul(&self, other: &ZSeries) -> ZSeries {
        // every term of a factor, known or not, sits at or above this exponent
        let floor = |z: &ZSeries| match z.terms.keys().next() {
            Some(k) => k.0.min(z.tail),
            None => z.tail,
        };
        let tail = tail_add(self.tail, floor(other)).min(tail_add(other.tail, floor(self)));
        let mut out = ZSeries::zero(tail);
        out.i_bound = match (self.i_bound, other.i_bound) {
            (None, None) => None,
            (a, b) => {
                let a = a.unwrap_or(u32::MAX / 2);
                let b = b.unwrap_or(u32::MAX / 2);
                Some(a.min(b))
            }
        };
        for (&(j1, i1), c1) in &self.terms {
            for (&(j2, i2), c2) in &other.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }

    /// Equality on the region both sides know.
    pub fn agrees_with(&self, other: &ZSeries) -> bool {
        let t = self.tail.min(other.tail);
        let b = Self::combine_bounds(self.i_bound, other.i_bound);
        let a = self.truncate_tail(t).with_i_bound(b);
        let c = other.truncate_tail(t).with_i_bound(b);
        a.terms == c.terms
    }
}

impl fmt::Display for ZSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        }
        let mut first = true;
        for (&(j, i), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*z1^{}*z2^{j}", -(i as i64))?;
        }
        if self.tail != EXACT {
            write!(f, " + O(z2^{})", self.tail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZSeriesWire {
    pub tail: Option<i64>,
    #[serde(default)]
    pub i_bound: Option<u32>,
    pub terms: Vec<(u32, i64, String)>,
}

impl From<ZSeries> for ZSeriesWire {
    fn from(z: ZSeries) -> Self {
        ZSeriesWire {
            tail: if z.tail == EXACT { None } else { Some(z.tail) },
            i_bound: z.i_bound,
            terms: z.terms().map(|((i, j), c)| (i, j, fmt_rat(c))).collect(),
        }
    }
}

impl TryFrom<ZSeriesWire> for ZSeries {
    type Error = Error;
    fn try_from(w: ZSeriesWire) -> Result<Self> {
        let tail = w.tail.unwrap_or(EXACT);
        let mut z = ZSeries::zero(tail).with_i_bound(w.i_bound);
        for (i, j, c) in &w.terms {
            if *j >= tail {
                return format(format!("term z1^-{i} z2^{j} lies beyond tail {tail}"));
            }
            if let Some(b) = w.i_bound {
                if *i > b {
                    return format(format!("term z1^-{i} z2^{j} lies beyond i_bound {b}"));
                }
            }
            if z.terms.contains_key(&(*j, *i)) {
                return format(format!("duplicate term z1^-{i} z2^{j}"));
            }
            let c = parse_rat(c)?;
            if !c.is_zero() {
                z.terms.insert((*j, *i), c);
            }
        }
        Ok(z)
    }
}
