//! Barriers, irreducible components and the extremal decomposition.
//!
//! For `μ ≤cd ν` the maximal barrier is `x* = sup{x : p_μ(x) = p_ν(x)}`. Left
//! of `x*` the transport problem decomposes into martingale components (the
//! open components of `{p_μ < p_ν} ∩ (−∞, x*)`), right of it sits the single
//! proper supermartingale component `I₀ = (x*, ∞)`; whatever remains is
//! carried by the identity. The difference `p_ν − p_μ` is piecewise linear
//! with kinks only at atoms, so all of this is decided exactly on the finite
//! breakpoint grid: equality on a segment between consecutive breakpoints is
//! equivalent to equality at both endpoints.

use std::fmt;

use thiserror::Error;

use crate::coupling::Coupling;
use crate::lp::{self, ConstraintKind, LpError, Sense, TransportLp};
use crate::measure::{DiscreteMeasure, Endpoint, Interval};
use crate::scalar::{tolerance, Value};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("decomposition inconsistency: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// Component kind in the barrier decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    Supermartingale,
    Martingale,
    Identity,
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Supermartingale => write!(f, "supermartingale"),
            ComponentKind::Martingale => write!(f, "martingale"),
            ComponentKind::Identity => write!(f, "identity"),
        }
    }
}

/// One irreducible component `(I_k, J_k, μ_k, ν_k)`.
#[derive(Clone, Debug)]
pub struct Component {
    pub index: i32,
    pub interval: Interval,
    pub target: Interval,
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub kind: ComponentKind,
}

/// Barrier point `x*` and the component list.
#[derive(Clone, Debug)]
pub struct ComponentDecomposition {
    pub x_star: Endpoint,
    /// Supermartingale component first (when present), then martingale
    /// components left to right, then the identity part (index −1).
    pub components: Vec<Component>,
}

impl ComponentDecomposition {
    pub fn supermartingale(&self) -> Option<&Component> {
        self.components
            .iter()
            .find(|c| c.kind == ComponentKind::Supermartingale)
    }

    pub fn martingale_components(&self) -> impl Iterator<Item = &Component> {
        self.components
            .iter()
            .filter(|c| c.kind == ComponentKind::Martingale)
    }

    pub fn identity(&self) -> Option<&Component> {
        self.components
            .iter()
            .find(|c| c.kind == ComponentKind::Identity)
    }

    /// Membership in `Σ = Δ ∪ ⋃_k I_k × J_k`.
    pub fn sigma_contains(&self, x: &Value, y: &Value) -> bool {
        if x == y {
            return true;
        }
        self.components.iter().any(|c| {
            c.kind != ComponentKind::Identity && c.interval.contains(x) && c.target.contains(y)
        })
    }
}

/// Breakpoint grid of `p_ν − p_μ` with the equality flags.
fn equality_flags(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<(Value, bool)> {
    let eps = tolerance();
    let mut grid: Vec<Value> = mu
        .atoms()
        .iter()
        .chain(nu.atoms().iter())
        .map(|a| a.x.clone())
        .collect();
    grid.sort();
    grid.dedup();
    grid.into_iter()
        .map(|t| {
            let equal = mu.put_value(&t).eq_tol(&nu.put_value(&t), eps);
            (t, equal)
        })
        .collect()
}

/// Maximal barrier `x* = sup{x : p_μ(x) = p_ν(x)}`.
///
/// Returns `+∞` exactly when the barycenters agree (the pure martingale
/// case), `−∞` when the puts touch only in the limit.
pub fn maximal_barrier(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Endpoint {
    let eps = tolerance();
    if mu.first_moment().eq_tol(&nu.first_moment(), eps) {
        // beyond the largest atom both puts equal m·t − first moment
        return Endpoint::PosInf;
    }
    equality_flags(mu, nu)
        .into_iter()
        .rev()
        .find(|(_, eq)| *eq)
        .map(|(t, _)| Endpoint::Finite(t))
        .unwrap_or(Endpoint::NegInf)
}

/// Decompose `μ ≤cd ν` into irreducible components.
pub fn decompose(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<ComponentDecomposition, StructureError> {
    let eps = tolerance();
    let x_star = maximal_barrier(mu, nu);
    let flags = equality_flags(mu, nu);
    let mut components: Vec<Component> = Vec::new();
    let mut used_mu = DiscreteMeasure::zero();
    let mut used_nu = DiscreteMeasure::zero();

    // supermartingale component I0 = (x*, inf)
    if let Endpoint::Finite(xs) = &x_star {
        let i0 = Interval::right_tail(xs.clone(), false);
        let mu0 = mu.restrict(&i0);
        if !mu0.is_zero_measure() {
            let nu_above = nu.restrict(&i0);
            let deficit = &mu0.total_mass() - &nu_above.total_mass();
            let nu0 = if deficit.is_positive() {
                nu_above.add(&DiscreteMeasure::dirac(xs.clone(), deficit))
            } else {
                nu_above
            };
            let target_closed_left = !nu0.restrict(&Interval::closed(xs.clone(), xs.clone())).is_zero_measure();
            components.push(Component {
                index: 0,
                interval: i0,
                target: Interval {
                    lo: Endpoint::Finite(xs.clone()),
                    hi: Endpoint::PosInf,
                    lo_closed: target_closed_left,
                    hi_closed: false,
                },
                mu: mu0.clone(),
                nu: nu0.clone(),
                kind: ComponentKind::Supermartingale,
            });
            used_mu = used_mu.add(&mu0);
            used_nu = used_nu.add(&nu0);
        }
    }

    // martingale components: maximal runs of non-equality breakpoints below
    // x*, bracketed by equality points
    let below_xstar = |t: &Value| match &x_star {
        Endpoint::PosInf => true,
        Endpoint::Finite(xs) => t < xs,
        Endpoint::NegInf => false,
    };
    let mut k = 0usize;
    let mut run: Vec<&Value> = Vec::new();
    let mut left_bound: Option<Value> = None;
    let mut prev_zero: Option<Value> = None;
    let mut close_run = |run: &mut Vec<&Value>,
                         left: &Option<Value>,
                         right: Option<Value>,
                         k: &mut usize,
                         components: &mut Vec<Component>,
                         used_mu: &mut DiscreteMeasure,
                         used_nu: &mut DiscreteMeasure|
     -> Result<(), StructureError> {
        if run.is_empty() {
            return Ok(());
        }
        let a = left.clone().ok_or_else(|| {
            StructureError::Decomposition("component with no left equality point".into())
        })?;
        let b = right.ok_or_else(|| {
            StructureError::Decomposition("component with no right equality point".into())
        })?;
        let interval = Interval::open(Endpoint::Finite(a.clone()), Endpoint::Finite(b.clone()));
        let mu_k = mu.restrict(&interval);
        if mu_k.is_zero_measure() {
            run.clear();
            return Ok(());
        }
        let nu_inner = nu.restrict(&interval);
        // boundary atoms fixed by mass and barycenter balance
        let need_mass = &mu_k.total_mass() - &nu_inner.total_mass();
        let need_moment = &mu_k.first_moment() - &nu_inner.first_moment();
        // k_a + k_b = need_mass, k_a·a + k_b·b = need_moment
        let width = &b - &a;
        let k_b = &(&need_moment - &(&need_mass * &a)) / &width;
        let k_a = &need_mass - &k_b;
        if k_a.is_negative() && !k_a.eq_tol(&Value::zero(), eps) {
            return Err(StructureError::Decomposition(format!(
                "negative boundary mass {k_a} at {a}"
            )));
        }
        if k_b.is_negative() && !k_b.eq_tol(&Value::zero(), eps) {
            return Err(StructureError::Decomposition(format!(
                "negative boundary mass {k_b} at {b}"
            )));
        }
        let mut nu_k = nu_inner;
        if k_a.is_positive() {
            nu_k = nu_k.add(&DiscreteMeasure::dirac(a.clone(), k_a));
        }
        if k_b.is_positive() {
            nu_k = nu_k.add(&DiscreteMeasure::dirac(b.clone(), k_b));
        }
        *k += 1;
        let target = Interval {
            lo: Endpoint::Finite(a.clone()),
            hi: Endpoint::Finite(b.clone()),
            lo_closed: !nu_k.mass_at(&a).is_zero(),
            hi_closed: !nu_k.mass_at(&b).is_zero(),
        };
        components.push(Component {
            index: *k as i32,
            interval,
            target,
            mu: mu_k.clone(),
            nu: nu_k.clone(),
            kind: ComponentKind::Martingale,
        });
        *used_mu = used_mu.add(&mu_k);
        *used_nu = used_nu.add(&nu_k);
        run.clear();
        Ok(())
    };

    for (t, eq) in &flags {
        if !below_xstar(t) {
            break;
        }
        if *eq {
            let right = Some(t.clone());
            close_run(&mut run, &left_bound, right, &mut k, &mut components, &mut used_mu, &mut used_nu)?;
            prev_zero = Some(t.clone());
            left_bound = prev_zero.clone();
        } else {
            if run.is_empty() {
                left_bound = prev_zero.clone();
            }
            run.push(t);
        }
    }
    if !run.is_empty() {
        // a run extending to x* closes at x* (finite by construction here)
        let right = match &x_star {
            Endpoint::Finite(xs) => Some(xs.clone()),
            _ => None,
        };
        close_run(&mut run, &left_bound, right, &mut k, &mut components, &mut used_mu, &mut used_nu)?;
    }

    // identity remainder
    let mu_rest = mu.subtract(&used_mu).map_err(|e| {
        StructureError::Decomposition(format!("component mass exceeds mu: {e}"))
    })?;
    let nu_rest = nu.subtract(&used_nu).map_err(|e| {
        StructureError::Decomposition(format!("component mass exceeds nu: {e}"))
    })?;
    if mu_rest != nu_rest {
        return Err(StructureError::Decomposition(format!(
            "identity parts differ: {mu_rest} vs {nu_rest}"
        )));
    }
    if !mu_rest.is_zero_measure() {
        components.push(Component {
            index: -1,
            interval: Interval::all(),
            target: Interval::all(),
            mu: mu_rest.clone(),
            nu: nu_rest,
            kind: ComponentKind::Identity,
        });
    }

    let dec = ComponentDecomposition { x_star, components };
    recheck(&dec)?;
    Ok(dec)
}

/// Post-decomposition invariants: each martingale pair is in convex order and
/// irreducible on its interval.
fn recheck(dec: &ComponentDecomposition) -> Result<(), StructureError> {
    for c in dec.martingale_components() {
        if !c.mu.leq_convex(&c.nu) {
            return Err(StructureError::Decomposition(format!(
                "component {} not in convex order",
                c.index
            )));
        }
        // interval == {p_mu_k < p_nu_k}: strict inequality inside, equality at
        // the finite endpoints
        let eps = tolerance();
        if let (Endpoint::Finite(a), Endpoint::Finite(b)) = (&c.interval.lo, &c.interval.hi) {
            if !c.mu.put_value(a).eq_tol(&c.nu.put_value(a), eps)
                || !c.mu.put_value(b).eq_tol(&c.nu.put_value(b), eps)
            {
                return Err(StructureError::Decomposition(format!(
                    "component {} puts do not close at its endpoints",
                    c.index
                )));
            }
        }
        for atom in c.mu.atoms().iter().chain(c.nu.atoms().iter()) {
            if c.interval.contains(&atom.x)
                && !c.mu.put_value(&atom.x) .lt_strict(&c.nu.put_value(&atom.x), eps)
            {
                return Err(StructureError::Decomposition(format!(
                    "component {} has put equality at interior point {}",
                    c.index, atom.x
                )));
            }
        }
    }
    if let Some(c0) = dec.supermartingale() {
        if !c0.mu.leq_convex_decreasing(&c0.nu) {
            return Err(StructureError::Decomposition(
                "supermartingale component not in cd order".into(),
            ));
        }
    }
    Ok(())
}

trait StrictLt {
    fn lt_strict(&self, other: &Self, eps: f64) -> bool;
}

impl StrictLt for Value {
    fn lt_strict(&self, other: &Value, eps: f64) -> bool {
        self.le_tol(other, eps) && !self.eq_tol(other, eps)
    }
}

/// Report of the extremal decomposition check.
#[derive(Clone, Debug)]
pub struct ExtremalReport {
    /// Objective of the plan restricted to `M × R` vs the martingale-LP
    /// optimum between the restriction's own marginals.
    pub martingale_part: (f64, f64),
    /// Same for the complement, against the unconstrained LP.
    pub unconstrained_part: (f64, f64),
    pub martingale_optimal: bool,
    pub unconstrained_optimal: bool,
}

impl ExtremalReport {
    pub fn passed(&self) -> bool {
        self.martingale_optimal && self.unconstrained_optimal
    }
}

/// Check that an optimal supermartingale plan restricted to its martingale
/// points solves the martingale transport between its own marginals, and the
/// rest solves the unconstrained transport (both within `eps` on objectives).
///
/// `P` must already be optimal for `f`; that is the caller's certificate
/// (e.g. from the LP module).
pub fn extremal_decomposition_check(
    p: &Coupling,
    m_set: &[Value],
    f: impl Fn(f64, f64) -> f64 + Copy,
    eps: f64,
) -> Result<ExtremalReport, StructureError> {
    let part_m = p.restrict_rows(|x| m_set.contains(x));
    let part_n = p.restrict_rows(|x| !m_set.contains(x));

    let solve_part = |part: &Coupling, kind: ConstraintKind| -> Result<(f64, f64), StructureError> {
        if part.rows().is_empty() {
            return Ok((0.0, 0.0));
        }
        let lp = TransportLp::new(
            part.first_marginal(),
            part.second_marginal(),
            f,
            kind,
            Sense::Maximize,
        )?;
        let sol = lp::solve_transport(&lp)?;
        Ok((part.reward_value(f), sol.value))
    };

    let martingale_part = solve_part(&part_m, ConstraintKind::DriftEqZero)?;
    let unconstrained_part = solve_part(&part_n, ConstraintKind::None)?;
    let close = |(got, best): (f64, f64)| (got - best).abs() <= eps * (1.0 + best.abs());
    Ok(ExtremalReport {
        martingale_optimal: close(martingale_part),
        unconstrained_optimal: close(unconstrained_part),
        martingale_part,
        unconstrained_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{classify_martingale_points, increasing_transport, Coupling};
    use crate::measure::{mu_star, nu_star};

    fn two_component_pair() -> (DiscreteMeasure, DiscreteMeasure) {
        let mu = DiscreteMeasure::from_atoms(vec![
            (Value::int(0), Value::rat(1, 2)),
            (Value::int(3), Value::rat(1, 2)),
        ])
        .unwrap();
        let nu = DiscreteMeasure::from_atoms(vec![
            (Value::int(-1), Value::rat(1, 4)),
            (Value::int(1), Value::rat(1, 4)),
            (Value::int(2), Value::rat(1, 2)),
        ])
        .unwrap();
        (mu, nu)
    }

    #[test]
    fn barrier_of_reference_pair() {
        assert_eq!(
            maximal_barrier(&mu_star(), &nu_star()),
            Endpoint::Finite(Value::int(-4))
        );
    }

    #[test]
    fn barrier_of_two_component_pair() {
        let (mu, nu) = two_component_pair();
        assert_eq!(maximal_barrier(&mu, &nu), Endpoint::Finite(Value::int(2)));
    }

    #[test]
    fn barrier_of_identical_marginals() {
        let d = DiscreteMeasure::dirac(Value::int(0), Value::one());
        assert_eq!(maximal_barrier(&d, &d), Endpoint::PosInf);
    }

    #[test]
    fn decomposition_of_reference_pair() {
        let dec = decompose(&mu_star(), &nu_star()).unwrap();
        assert_eq!(dec.components.len(), 1);
        let c0 = dec.supermartingale().unwrap();
        assert_eq!(c0.mu, mu_star());
        assert_eq!(c0.nu, nu_star());
        // nu has an atom at the barrier, so the target includes it
        assert!(c0.target.lo_closed);
    }

    #[test]
    fn decomposition_of_two_component_pair() {
        let (mu, nu) = two_component_pair();
        let dec = decompose(&mu, &nu).unwrap();
        assert_eq!(dec.x_star, Endpoint::Finite(Value::int(2)));

        let c0 = dec.supermartingale().unwrap();
        assert_eq!(c0.mu, DiscreteMeasure::dirac(Value::int(3), Value::rat(1, 2)));
        assert_eq!(c0.nu, DiscreteMeasure::dirac(Value::int(2), Value::rat(1, 2)));

        let m: Vec<_> = dec.martingale_components().collect();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].interval, Interval::open(
            Endpoint::Finite(Value::int(-1)),
            Endpoint::Finite(Value::int(1)),
        ));
        assert_eq!(m[0].mu, DiscreteMeasure::dirac(Value::int(0), Value::rat(1, 2)));
        assert_eq!(
            m[0].nu,
            DiscreteMeasure::from_atoms(vec![
                (Value::int(-1), Value::rat(1, 4)),
                (Value::int(1), Value::rat(1, 4)),
            ])
            .unwrap()
        );
        assert!(dec.identity().is_none());
    }

    #[test]
    fn decomposition_of_identical_marginals_is_identity() {
        let dec = decompose(&mu_star(), &mu_star()).unwrap();
        assert_eq!(dec.x_star, Endpoint::PosInf);
        assert_eq!(dec.components.len(), 1);
        assert_eq!(dec.identity().unwrap().mu, mu_star());
    }

    #[test]
    fn sigma_membership() {
        let dec = decompose(&mu_star(), &nu_star()).unwrap();
        assert!(dec.sigma_contains(&Value::int(0), &Value::int(2)));

        let (mu, nu) = two_component_pair();
        let dec2 = decompose(&mu, &nu).unwrap();
        // 0 lies in the martingale interval but 2 is not in its target
        assert!(!dec2.sigma_contains(&Value::int(0), &Value::int(2)));
        assert!(dec2.sigma_contains(&Value::int(0), &Value::int(1)));
        // diagonal always belongs
        assert!(dec2.sigma_contains(&Value::rat(7, 2), &Value::rat(7, 2)));
    }

    #[test]
    fn puts_touch_at_the_barrier() {
        let (mu, nu) = two_component_pair();
        if let Endpoint::Finite(xs) = maximal_barrier(&mu, &nu) {
            assert_eq!(mu.put_value(&xs), nu.put_value(&xs));
        } else {
            panic!("expected finite barrier");
        }
    }

    #[test]
    fn transports_are_martingales_below_the_barrier() {
        let (mu, nu) = two_component_pair();
        let p = increasing_transport(&mu, &nu).unwrap();
        let xs = Value::int(2);
        for r in p.rows().iter().filter(|r| r.x < xs) {
            assert!(r.drift().is_zero(), "drift {} at {}", r.drift(), r.x);
        }
    }

    #[test]
    fn extremal_check_on_reference_pair() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        let g = |x: f64, y: f64| x.tanh() * ((1.0 + y * y).sqrt() - y);
        let m = classify_martingale_points(&p, 1e-9).martingale_points;
        let report = extremal_decomposition_check(&p, &m, g, 1e-8).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn extremal_check_identity_trivial() {
        let p = Coupling::identity(&mu_star());
        let m: Vec<Value> = mu_star().atoms().iter().map(|a| a.x.clone()).collect();
        let f = |x: f64, y: f64| x * y;
        let report = extremal_decomposition_check(&p, &m, f, 1e-8).unwrap();
        assert!(report.passed());
    }
}
