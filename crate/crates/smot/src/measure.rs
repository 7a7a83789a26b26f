//! Finite atomic measures on the real line and their stochastic orders.
//!
//! A [`DiscreteMeasure`] is a finite list of atoms `(x_i, w_i)` with strictly
//! increasing locations and strictly positive masses; the empty list is the
//! zero measure. The put function `p(t) = Σ w_i (t - x_i)^+` is nonnegative,
//! increasing, convex and piecewise linear with kinks exactly at the atoms,
//! and it determines the order tests below.
//!
//! **Reduction lemma (finite grid sufficiency).** For atomic `a`, `b`, the
//! difference `p_b - p_a` is piecewise linear with breakpoints contained in
//! the atoms of `a` and `b`, vanishes left of the smallest atom, and is
//! constant right of the largest atom with value
//! `a(R)·bary(a) - b(R)·bary(b) + t·(b(R) - a(R))` as `t → ∞`. Hence
//!
//! * `p_a ≤ p_b` everywhere  ⟺  `p_a(t) ≤ p_b(t)` at every atom of `a` and
//!   `b`, **and** the asymptotic comparison holds: either `a(R) < b(R)`, or
//!   `a(R) = b(R)` and `bary(a) ≥ bary(b)`.
//!
//! `a ≤cd b` (convex-decreasing order) is `a(R) = b(R)`, `p_a ≤ p_b` and
//! `bary(a) ≥ bary(b)`; `a ≤c b` (convex order) additionally forces equal
//! barycenters; `a ≤pcd b` (positive-convex-decreasing) is `a(R) ≤ b(R)` and
//! `p_a ≤ p_b` — constant test functions give the mass inequality, hinges
//! `(t - ·)^+` give the put inequality, and every nonnegative convex
//! decreasing test function is a monotone limit of nonnegative combinations
//! of these two families, so the finite test decides the full order. When
//! `a(R) = b(R)`, `≤pcd` coincides with `≤cd`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{tolerance, Value};

/// Errors from measure-level operations.
#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("quantile argument {s} exceeds total mass {mass}")]
    OutOfRange { s: f64, mass: f64 },
    #[error("total masses differ: {a} vs {b}")]
    MassMismatch { a: f64, b: f64 },
    #[error("subtraction would leave negative mass {deficit} at x = {x}")]
    NegativeMass { x: f64, deficit: f64 },
    #[error("atom has nonpositive mass {w} at x = {x}")]
    NonpositiveMass { x: f64, w: f64 },
}

/// Extended-real interval endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    NegInf,
    Finite(Value),
    PosInf,
}

impl Endpoint {
    pub fn finite(&self) -> Option<&Value> {
        match self {
            Endpoint::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::Finite(v) => v.to_f64(),
            Endpoint::PosInf => f64::INFINITY,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::Finite(v) => write!(f, "{v}"),
            Endpoint::PosInf => write!(f, "+inf"),
        }
    }
}

/// Real interval with optionally closed finite endpoints. Infinite endpoints
/// are always open.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: Endpoint, hi: Endpoint) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: Value, hi: Value) -> Self {
        Interval {
            lo: Endpoint::Finite(lo),
            hi: Endpoint::Finite(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn all() -> Self {
        Interval::open(Endpoint::NegInf, Endpoint::PosInf)
    }

    /// `(-inf, hi]` or `(-inf, hi)`.
    pub fn left_tail(hi: Value, closed: bool) -> Self {
        Interval { lo: Endpoint::NegInf, hi: Endpoint::Finite(hi), lo_closed: false, hi_closed: closed }
    }

    /// `[lo, inf)` or `(lo, inf)`.
    pub fn right_tail(lo: Value, closed: bool) -> Self {
        Interval { lo: Endpoint::Finite(lo), hi: Endpoint::PosInf, lo_closed: closed, hi_closed: false }
    }

    pub fn contains(&self, x: &Value) -> bool {
        let above = match &self.lo {
            Endpoint::NegInf => true,
            Endpoint::PosInf => false,
            Endpoint::Finite(lo) => {
                if self.lo_closed {
                    x >= lo
                } else {
                    x > lo
                }
            }
        };
        let below = match &self.hi {
            Endpoint::NegInf => false,
            Endpoint::PosInf => true,
            Endpoint::Finite(hi) => {
                if self.hi_closed {
                    x <= hi
                } else {
                    x < hi
                }
            }
        };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// One atom of a discrete measure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Value,
    pub w: Value,
}

/// Finite nonnegative atomic measure on the real line.
///
/// Invariant: locations strictly increasing, all masses strictly positive.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn zero() -> Self {
        DiscreteMeasure { atoms: Vec::new() }
    }

    /// Point mass `w·δ_x`.
    pub fn dirac(x: Value, w: Value) -> Self {
        if w.is_zero() {
            return DiscreteMeasure::zero();
        }
        assert!(w.is_positive(), "dirac mass must be nonnegative");
        DiscreteMeasure { atoms: vec![Atom { x, w }] }
    }

    /// Uniform distribution (total mass 1) on the given locations.
    pub fn uniform(locations: &[Value]) -> Self {
        let n = locations.len() as i64;
        let w = Value::rat(1, n.max(1));
        DiscreteMeasure::from_atoms(
            locations.iter().map(|x| (x.clone(), w.clone())).collect(),
        )
        .expect("positive masses")
    }

    /// Build a measure from raw atoms: sorts by location, merges duplicates
    /// (float-mode locations closer than the global tolerance are merged at
    /// their mass-weighted mean), drops zero masses, rejects negative ones.
    pub fn from_atoms(mut raw: Vec<(Value, Value)>) -> Result<Self, MeasureError> {
        for (x, w) in &raw {
            if w.is_negative() {
                return Err(MeasureError::NonpositiveMass { x: x.to_f64(), w: w.to_f64() });
            }
        }
        raw.retain(|(_, w)| !w.is_zero());
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let eps = tolerance();
        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match atoms.last_mut() {
                Some(last) if last.x.eq_tol(&x, eps) => {
                    // merge at the mass-weighted mean so barycenters survive
                    let total = &last.w + &w;
                    if !(last.x == x) {
                        last.x = &(&(&last.x * &last.w) + &(&x * &w)) / &total;
                    }
                    last.w = total;
                }
                _ => atoms.push(Atom { x, w }),
            }
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_zero_measure(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.atoms.iter().all(|a| a.x.is_exact() && a.w.is_exact())
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> Value {
        self.atoms.iter().fold(Value::zero(), |acc, a| acc + a.w.clone())
    }

    /// First moment `∫ x dm`.
    pub fn first_moment(&self) -> Value {
        self.atoms
            .iter()
            .fold(Value::zero(), |acc, a| acc + (&a.x * &a.w))
    }

    /// Mass-weighted mean, `0` for the zero measure.
    pub fn barycenter(&self) -> Value {
        if self.atoms.is_empty() {
            return Value::zero();
        }
        &self.first_moment() / &self.total_mass()
    }

    /// Put function `p(t) = Σ w_i (t - x_i)^+`.
    pub fn put_value(&self, t: &Value) -> Value {
        self.atoms.iter().fold(Value::zero(), |acc, a| {
            if &a.x < t {
                acc + (&a.w * &(t - &a.x))
            } else {
                acc
            }
        })
    }

    /// Potential `u(t) = Σ w_i |t - x_i|`.
    pub fn potential_u(&self, t: &Value) -> Value {
        self.atoms
            .iter()
            .fold(Value::zero(), |acc, a| acc + (&a.w * &(t - &a.x).abs()))
    }

    /// Mass of the single atom at `t` (zero when no atom sits there).
    pub fn mass_at(&self, t: &Value) -> Value {
        self.atoms
            .iter()
            .find(|a| &a.x == t)
            .map(|a| a.w.clone())
            .unwrap_or_else(Value::zero)
    }

    /// Left-continuous generalized inverse of the cumulative mass function.
    /// `s = 0` returns the smallest atom by convention.
    pub fn quantile(&self, s: &Value) -> Result<Value, MeasureError> {
        let mass = self.total_mass();
        if s > &mass {
            return Err(MeasureError::OutOfRange { s: s.to_f64(), mass: mass.to_f64() });
        }
        let first = self
            .atoms
            .first()
            .ok_or(MeasureError::OutOfRange { s: s.to_f64(), mass: 0.0 })?;
        if s.is_zero() || s.is_negative() {
            return Ok(first.x.clone());
        }
        let mut cum = Value::zero();
        for a in &self.atoms {
            cum = cum + a.w.clone();
            if s <= &cum {
                return Ok(a.x.clone());
            }
        }
        Ok(self.atoms.last().unwrap().x.clone())
    }

    /// Cumulative masses `(c_1, …, c_n)` with `c_i = Σ_{j ≤ i} w_j`.
    pub fn cumulative(&self) -> Vec<Value> {
        let mut cum = Value::zero();
        self.atoms
            .iter()
            .map(|a| {
                cum = &cum + &a.w;
                cum.clone()
            })
            .collect()
    }

    fn breakpoints<'a>(&'a self, other: &'a DiscreteMeasure) -> Vec<&'a Value> {
        let mut pts: Vec<&Value> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|a| &a.x)
            .collect();
        pts.sort();
        pts.dedup();
        pts
    }

    /// Convex-decreasing (second stochastic) order test `self ≤cd other`.
    pub fn leq_convex_decreasing(&self, other: &DiscreteMeasure) -> bool {
        let eps = tolerance();
        self.total_mass().eq_tol(&other.total_mass(), eps)
            && other.first_moment().le_tol(&self.first_moment(), eps)
            && self.puts_leq_on_grid(other, eps)
    }

    /// Convex order test `self ≤c other`: `≤cd` with equal barycenters.
    pub fn leq_convex(&self, other: &DiscreteMeasure) -> bool {
        let eps = tolerance();
        self.leq_convex_decreasing(other)
            && self.first_moment().eq_tol(&other.first_moment(), eps)
    }

    /// Positive-convex-decreasing order test `self ≤pcd other`.
    pub fn leq_pcd(&self, other: &DiscreteMeasure) -> bool {
        let eps = tolerance();
        if !self.total_mass().le_tol(&other.total_mass(), eps) {
            return false;
        }
        self.puts_leq_on_grid(other, eps) && {
            // asymptotic slope check: with smaller mass the gap diverges, with
            // equal mass it tends to bary(other)-gap as in ≤cd
            let ms = self.total_mass();
            let mo = other.total_mass();
            if ms.eq_tol(&mo, eps) {
                other.first_moment().le_tol(&self.first_moment(), eps)
            } else {
                true
            }
        }
    }

    fn puts_leq_on_grid(&self, other: &DiscreteMeasure, eps: f64) -> bool {
        self.breakpoints(other)
            .into_iter()
            .all(|t| self.put_value(t).le_tol(&other.put_value(t), eps))
    }

    /// 1-Wasserstein distance between equal-mass measures: the integral of the
    /// absolute quantile difference over the common cumulative-mass grid.
    pub fn wasserstein1(&self, other: &DiscreteMeasure) -> Result<Value, MeasureError> {
        let ma = self.total_mass();
        let mb = other.total_mass();
        if !ma.eq_tol(&mb, tolerance()) {
            return Err(MeasureError::MassMismatch { a: ma.to_f64(), b: mb.to_f64() });
        }
        let mut total = Value::zero();
        let (mut i, mut j) = (0usize, 0usize);
        let cum_a = self.cumulative();
        let cum_b = other.cumulative();
        let mut prev = Value::zero();
        while i < self.atoms.len() && j < other.atoms.len() {
            let next = cum_a[i].clone().min(cum_b[j].clone());
            let seg = &next - &prev;
            if seg.is_positive() {
                let gap = (&self.atoms[i].x - &other.atoms[j].x).abs();
                total = total + (&seg * &gap);
            }
            if cum_a[i] == next {
                i += 1;
            }
            if j < other.atoms.len() && cum_b[j] == next {
                j += 1;
            }
            prev = next;
        }
        Ok(total)
    }

    /// Restriction to an interval.
    pub fn restrict(&self, interval: &Interval) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .filter(|a| interval.contains(&a.x))
                .cloned()
                .collect(),
        }
    }

    pub fn add(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let mut raw: Vec<(Value, Value)> = self
            .atoms
            .iter()
            .chain(other.atoms.iter())
            .map(|a| (a.x.clone(), a.w.clone()))
            .collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match atoms.last_mut() {
                Some(last) if last.x == x => last.w = &last.w + &w,
                _ => atoms.push(Atom { x, w }),
            }
        }
        DiscreteMeasure { atoms }
    }

    /// Atomwise subtraction, requiring `other ≤ self` atomwise. In float mode,
    /// deficits within tolerance are clamped to zero.
    pub fn subtract(&self, other: &DiscreteMeasure) -> Result<DiscreteMeasure, MeasureError> {
        let eps = tolerance();
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        let mut j = 0usize;
        for a in &self.atoms {
            let mut w = a.w.clone();
            // atoms of `other` with no counterpart in `self`
            while j < other.atoms.len()
                && other.atoms[j].x < a.x
                && !other.atoms[j].x.eq_tol(&a.x, eps)
            {
                let b = &other.atoms[j];
                if !b.w.eq_tol(&Value::zero(), eps) {
                    return Err(MeasureError::NegativeMass { x: b.x.to_f64(), deficit: b.w.to_f64() });
                }
                j += 1;
            }
            if j < other.atoms.len() && other.atoms[j].x.eq_tol(&a.x, eps) {
                w = &w - &other.atoms[j].w;
                j += 1;
            }
            if w.is_negative() {
                if w.eq_tol(&Value::zero(), eps) {
                    continue; // clamp within tolerance
                }
                return Err(MeasureError::NegativeMass { x: a.x.to_f64(), deficit: (-&w).to_f64() });
            }
            if !w.is_zero() {
                atoms.push(Atom { x: a.x.clone(), w });
            }
        }
        while j < other.atoms.len() {
            let b = &other.atoms[j];
            if !b.w.eq_tol(&Value::zero(), eps) {
                return Err(MeasureError::NegativeMass { x: b.x.to_f64(), deficit: b.w.to_f64() });
            }
            j += 1;
        }
        Ok(DiscreteMeasure { atoms })
    }

    /// Atomwise minimum `self ∧ other`.
    pub fn min_measure(&self, other: &DiscreteMeasure) -> DiscreteMeasure {
        let mut atoms = Vec::new();
        let mut j = 0usize;
        for a in &self.atoms {
            while j < other.atoms.len() && other.atoms[j].x < a.x {
                j += 1;
            }
            if j < other.atoms.len() && other.atoms[j].x == a.x {
                let w = a.w.clone().min(other.atoms[j].w.clone());
                if !w.is_zero() {
                    atoms.push(Atom { x: a.x.clone(), w });
                }
            }
        }
        DiscreteMeasure { atoms }
    }

    /// Scale every mass by a nonnegative factor.
    pub fn scale(&self, factor: &Value) -> DiscreteMeasure {
        assert!(!factor.is_negative(), "negative scale");
        if factor.is_zero() {
            return DiscreteMeasure::zero();
        }
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom { x: a.x.clone(), w: &a.w * factor })
                .collect(),
        }
    }
}

impl fmt::Display for DiscreteMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", a.x, a.w)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
pub(crate) fn mu_star() -> DiscreteMeasure {
    DiscreteMeasure::uniform(&[Value::int(-1), Value::int(0), Value::int(1)])
}

#[cfg(test)]
pub(crate) fn nu_star() -> DiscreteMeasure {
    DiscreteMeasure::uniform(&[Value::int(-4), Value::rat(-5, 2), Value::int(2)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn put_values_on_reference_measures() {
        assert_eq!(mu_star().put_value(&Value::int(0)), Value::rat(1, 3));
        assert_eq!(DiscreteMeasure::zero().put_value(&Value::float(7.0)), Value::zero());
        assert_eq!(nu_star().put_value(&Value::int(0)), Value::rat(13, 6));
    }

    #[test]
    fn potential_values() {
        let d0 = DiscreteMeasure::dirac(Value::int(0), Value::one());
        assert_eq!(d0.potential_u(&Value::int(3)), Value::int(3));
        assert_eq!(mu_star().potential_u(&Value::int(0)), Value::rat(2, 3));
        // u(t) = 2 p(t) - t·m(R) + ∫x dm at t = 1 on mu_star
        let m = mu_star();
        let t = Value::int(1);
        let via_put = &(&(&Value::int(2) * &m.put_value(&t)) - &(&t * &m.total_mass()))
            + &m.first_moment();
        assert_eq!(via_put, m.potential_u(&t));
        assert_eq!(via_put, Value::int(1));
    }

    #[test]
    fn quantiles_of_nu_star() {
        let nu = nu_star();
        assert_eq!(nu.quantile(&Value::rat(1, 3)).unwrap(), Value::int(-4));
        assert_eq!(nu.quantile(&Value::rat(2, 5)).unwrap(), Value::rat(-5, 2));
        assert_eq!(nu.quantile(&Value::int(1)).unwrap(), Value::int(2));
        assert!(matches!(
            nu.quantile(&Value::rat(3, 2)),
            Err(MeasureError::OutOfRange { .. })
        ));
    }

    #[test]
    fn barycenters() {
        assert_eq!(nu_star().barycenter(), Value::rat(-3, 2));
        assert_eq!(DiscreteMeasure::dirac(Value::rat(7, 2), Value::rat(2, 5)).barycenter(), Value::rat(7, 2));
        assert_eq!(mu_star().barycenter(), Value::zero());
        assert_eq!(DiscreteMeasure::zero().barycenter(), Value::zero());
    }

    #[test]
    fn convex_decreasing_order() {
        assert!(mu_star().leq_convex_decreasing(&nu_star()));
        assert!(mu_star().leq_convex_decreasing(&mu_star()));
        // p_nu(-2.5) = 1/2 > 0 = p_mu(-2.5)
        assert!(!nu_star().leq_convex_decreasing(&mu_star()));
    }

    #[test]
    fn convex_order() {
        let a = DiscreteMeasure::dirac(Value::int(0), Value::rat(1, 2));
        let b = DiscreteMeasure::from_atoms(vec![
            (Value::int(-1), Value::rat(1, 4)),
            (Value::int(1), Value::rat(1, 4)),
        ])
        .unwrap();
        assert!(a.leq_convex(&b));
        assert!(!mu_star().leq_convex(&nu_star()));
        let d0 = DiscreteMeasure::dirac(Value::int(0), Value::one());
        let d1 = DiscreteMeasure::dirac(Value::int(1), Value::one());
        assert!(!d0.leq_convex(&d1));
    }

    #[test]
    fn pcd_order() {
        let third_at_one = DiscreteMeasure::dirac(Value::int(1), Value::rat(1, 3));
        assert!(third_at_one.leq_pcd(&nu_star()));
        assert!(DiscreteMeasure::zero().leq_pcd(&nu_star()));
        assert!(DiscreteMeasure::zero().leq_pcd(&DiscreteMeasure::zero()));
        let two_d0 = DiscreteMeasure::dirac(Value::int(0), Value::int(2));
        let d0 = DiscreteMeasure::dirac(Value::int(0), Value::one());
        assert!(!two_d0.leq_pcd(&d0));
    }

    #[test]
    fn wasserstein_examples() {
        let d0 = DiscreteMeasure::dirac(Value::int(0), Value::one());
        let d1 = DiscreteMeasure::dirac(Value::int(1), Value::one());
        assert_eq!(d0.wasserstein1(&d1).unwrap(), Value::one());
        assert_eq!(mu_star().wasserstein1(&mu_star()).unwrap(), Value::zero());
        let u01 = DiscreteMeasure::uniform(&[Value::int(0), Value::int(1)]);
        let u02 = DiscreteMeasure::uniform(&[Value::int(0), Value::int(2)]);
        assert_eq!(u01.wasserstein1(&u02).unwrap(), Value::rat(1, 2));
        assert!(matches!(
            d0.wasserstein1(&two_atoms()),
            Err(MeasureError::MassMismatch { .. })
        ));
    }

    fn two_atoms() -> DiscreteMeasure {
        DiscreteMeasure::from_atoms(vec![
            (Value::int(0), Value::one()),
            (Value::int(1), Value::one()),
        ])
        .unwrap()
    }

    #[test]
    fn restrict_add_subtract_min() {
        let left = mu_star().restrict(&Interval::left_tail(Value::int(0), true));
        assert_eq!(left.len(), 2);
        assert_eq!(left.total_mass(), Value::rat(2, 3));

        assert!(mu_star().min_measure(&nu_star()).is_zero_measure());

        let part = DiscreteMeasure::dirac(Value::int(-4), Value::rat(1, 3));
        let rest = nu_star().subtract(&part).unwrap();
        assert_eq!(rest.len(), 2);
        assert_eq!(rest.mass_at(&Value::rat(-5, 2)), Value::rat(1, 3));
        assert_eq!(rest.mass_at(&Value::int(2)), Value::rat(1, 3));

        let too_much = DiscreteMeasure::dirac(Value::int(-4), Value::rat(1, 2));
        assert!(matches!(
            nu_star().subtract(&too_much),
            Err(MeasureError::NegativeMass { .. })
        ));

        assert_eq!(nu_star().subtract(&part).unwrap().add(&part), nu_star());
    }

    #[test]
    fn put_derivative_jump_is_atom_mass() {
        // right-minus-left derivative of p at an atom equals its mass:
        // evaluate slopes on either side of x = 0 for mu_star
        let m = mu_star();
        let h = Value::rat(1, 1000);
        let left = &(&m.put_value(&Value::zero()) - &m.put_value(&(-&h))) / &h;
        let right = &(&m.put_value(&h) - &m.put_value(&Value::zero())) / &h;
        assert_eq!(&right - &left, Value::rat(1, 3));
    }

    #[test]
    fn merges_close_float_atoms() {
        let m = DiscreteMeasure::from_atoms(vec![
            (Value::float(1.0), Value::float(0.5)),
            (Value::float(1.0 + 1e-12), Value::float(0.5)),
        ])
        .unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.total_mass().to_f64() - 1.0).abs() < 1e-15);
    }
}
