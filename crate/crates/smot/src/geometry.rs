//! Reward catalog, support monotonicity and the local competitor search.
//!
//! A reward is supermartingale Spence–Mirrlees when `f(x₂,·) − f(x₁,·)` is
//! strictly decreasing and strictly convex for `x₁ < x₂`; on a finite grid
//! both properties are decided through consecutive differences. The support
//! checkers operate on a pair `(Γ, M)`: first-order monotonicity constrains
//! pairs of paths depending on membership of the origins in `M`, second-order
//! monotonicity forbids a path from landing strictly between two destinations
//! of an origin on the wrong side, and nondegeneracy asks for a down-path at
//! every origin plus an up-path at origins in `M`.

use std::collections::BTreeMap;

use crate::coupling::Coupling;
use crate::expr::Expr;
use crate::scalar::Value;

/// Catalog of reward functions, plus user expressions.
#[derive(Clone, Debug)]
pub enum RewardSpec {
    /// `tanh(x)·(√(1+y²) − y)`: bounded in `x`, strictly decreasing strictly
    /// convex in the cross difference — the canonical supermartingale
    /// Spence–Mirrlees reward (its maximizer is the increasing transport).
    CanonicalSm,
    /// `−tanh(x)·(√(1+y²) − y)`: the mirror; its maximizer is the decreasing
    /// transport.
    NegCanonicalSm,
    /// `e^x e^y`.
    ExpProduct,
    /// `e^x e^y + c·x·y`.
    ExpProductPlusBilinear(f64),
    /// Parsed expression in `x` and `y`.
    Expression(Expr),
}

impl RewardSpec {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            RewardSpec::CanonicalSm => x.tanh() * ((1.0 + y * y).sqrt() - y),
            RewardSpec::NegCanonicalSm => -x.tanh() * ((1.0 + y * y).sqrt() - y),
            RewardSpec::ExpProduct => (x + y).exp(),
            RewardSpec::ExpProductPlusBilinear(c) => (x + y).exp() + c * x * y,
            RewardSpec::Expression(e) => e.eval(x, y),
        }
    }

    pub fn as_fn(&self) -> impl Fn(f64, f64) -> f64 + Copy + '_ {
        move |x, y| self.eval(x, y)
    }
}

/// Which Spence–Mirrlees property to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmOrder {
    /// Cross difference strictly increasing.
    First,
    /// Cross difference strictly convex.
    Second,
}

/// Test `f` itself (`Plus`) or `−f` (`Minus`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmSign {
    Plus,
    Minus,
}

/// Outcome of a grid Spence–Mirrlees test.
#[derive(Clone, Debug)]
pub struct SmReport {
    pub passed: bool,
    /// `(x1, x2, ys…)` of the first violating configuration.
    pub violation: Option<(f64, f64, Vec<f64>)>,
}

/// Check a Spence–Mirrlees property of `f` on the grid `xs × ys`.
///
/// Consecutive source pairs suffice: differences over longer spans are sums
/// of consecutive ones, and monotonicity/convexity are preserved under sums.
pub fn check_spence_mirrlees(
    f: impl Fn(f64, f64) -> f64,
    xs: &[f64],
    ys: &[f64],
    order: SmOrder,
    sign: SmSign,
    strict: bool,
) -> SmReport {
    let s = match sign {
        SmSign::Plus => 1.0,
        SmSign::Minus => -1.0,
    };
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    assert!(
        order == SmOrder::First || ys.len() >= 3,
        "second-order test needs at least three target points"
    );
    for w in xs.windows(2) {
        let (x1, x2) = (w[0], w[1]);
        let d = |y: f64| s * (f(x2, y) - f(x1, y));
        match order {
            SmOrder::First => {
                for v in ys.windows(2) {
                    let step = d(v[1]) - d(v[0]);
                    let bad = if strict { step <= 0.0 } else { step < 0.0 };
                    if bad {
                        return SmReport {
                            passed: false,
                            violation: Some((x1, x2, vec![v[0], v[1]])),
                        };
                    }
                }
            }
            SmOrder::Second => {
                for v in ys.windows(3) {
                    let left = (d(v[1]) - d(v[0])) / (v[1] - v[0]);
                    let right = (d(v[2]) - d(v[1])) / (v[2] - v[1]);
                    let bad = if strict { right <= left } else { right < left };
                    if bad {
                        return SmReport {
                            passed: false,
                            violation: Some((x1, x2, v.to_vec())),
                        };
                    }
                }
            }
        }
    }
    SmReport { passed: true, violation: None }
}

/// A support `Γ` with the martingale-point sets.
#[derive(Clone, Debug, Default)]
pub struct SupportGraph {
    /// Support points, sorted lexicographically.
    pub points: Vec<(Value, Value)>,
    /// Martingale points `M = M₀ ∪ M₁`.
    pub m_set: Vec<Value>,
    /// Binding-drift points (from the dual multiplier, when available).
    pub m0: Vec<Value>,
    /// Martingale-component points.
    pub m1: Vec<Value>,
}

impl SupportGraph {
    pub fn new(mut points: Vec<(Value, Value)>, m_set: Vec<Value>) -> Self {
        points.sort();
        points.dedup();
        SupportGraph { points, m_set, m0: Vec::new(), m1: Vec::new() }
    }

    /// Support of a coupling with its drift-classified martingale set.
    pub fn from_coupling(p: &Coupling, eps: f64) -> Self {
        let m = crate::coupling::classify_martingale_points(p, eps).martingale_points;
        SupportGraph::new(p.support(), m)
    }

    pub fn with_split(mut self, m0: Vec<Value>, m1: Vec<Value>) -> Self {
        assert!(m0.iter().all(|x| !m1.contains(x)), "m0 and m1 must be disjoint");
        self.m_set = m0.iter().chain(m1.iter()).cloned().collect();
        self.m0 = m0;
        self.m1 = m1;
        self
    }

    fn in_m(&self, x: &Value) -> bool {
        self.m_set.contains(x)
    }

    /// Sections `Γ_x` grouped by origin.
    fn sections(&self) -> BTreeMap<&Value, Vec<&Value>> {
        let mut map: BTreeMap<&Value, Vec<&Value>> = BTreeMap::new();
        for (x, y) in &self.points {
            map.entry(x).or_default().push(y);
        }
        map
    }
}

/// Direction of a monotonicity property.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Left,
    Right,
}

/// Outcome of a support check with the first violating configuration.
#[derive(Clone, Debug)]
pub struct SupportReport {
    pub passed: bool,
    pub violation: Option<String>,
}

impl SupportReport {
    fn pass() -> Self {
        SupportReport { passed: true, violation: None }
    }

    fn fail(msg: String) -> Self {
        SupportReport { passed: false, violation: Some(msg) }
    }
}

/// First-order monotonicity of `(Γ, M)`: for paths `(x₁,y₁), (x₂,y₂)` with
/// `x₁ < x₂`, left-monotone requires `y₁ ≤ y₂` whenever `x₂ ∉ M`,
/// right-monotone requires `y₂ ≤ y₁` whenever `x₁ ∉ M`.
pub fn check_first_order(sg: &SupportGraph, direction: Direction) -> SupportReport {
    for (i, (x1, y1)) in sg.points.iter().enumerate() {
        for (x2, y2) in sg.points.iter().skip(i + 1) {
            if x1 >= x2 {
                continue;
            }
            let bad = match direction {
                Direction::Left => !sg.in_m(x2) && y1 > y2,
                Direction::Right => !sg.in_m(x1) && y2 > y1,
            };
            if bad {
                return SupportReport::fail(format!(
                    "paths ({x1},{y1}) and ({x2},{y2}) cross the wrong way"
                ));
            }
        }
    }
    SupportReport::pass()
}

/// Second-order monotonicity of `Γ`: for `(x,y₁), (x,y₂), (x',y')` with
/// `y₁ < y₂`, left-monotone forbids `y' ∈ (y₁,y₂)` when `x < x'`,
/// right-monotone when `x' < x`.
pub fn check_second_order(sg: &SupportGraph, direction: Direction) -> SupportReport {
    let sections = sg.sections();
    for (x, ys) in &sections {
        if ys.len() < 2 {
            continue;
        }
        let lo = ys.first().unwrap();
        let hi = ys.last().unwrap();
        for (xp, yp) in &sg.points {
            let applies = match direction {
                Direction::Left => *x < xp,
                Direction::Right => xp < *x,
            };
            if applies && *lo < yp && yp < *hi {
                // report the tightest section pair around y'
                let y1 = ys.iter().filter(|y| *y < &yp).max().unwrap();
                let y2 = ys.iter().filter(|y| *y > &yp).min().unwrap();
                return SupportReport::fail(format!(
                    "({xp},{yp}) lands inside ({x},{y1})..({x},{y2})"
                ));
            }
        }
    }
    SupportReport::pass()
}

/// Nondegeneracy of `(Γ, M)`: every origin with an up-path has a down-path;
/// every origin in `M` with a down-path has an up-path; and the implied
/// variants with weak inequalities.
pub fn check_nondegenerate(sg: &SupportGraph) -> SupportReport {
    for (x, ys) in sg.sections() {
        let has_up_strict = ys.iter().any(|y| *y > x);
        let has_down_strict = ys.iter().any(|y| *y < x);
        let has_down_weak = ys.iter().any(|y| *y <= x);
        let has_up_weak = ys.iter().any(|y| *y >= x);
        if has_up_strict && !has_down_strict {
            return SupportReport::fail(format!("{x} has an up-path but no down-path"));
        }
        if !has_down_weak {
            return SupportReport::fail(format!("{x} has no destination at or below it"));
        }
        if sg.in_m(x) {
            if has_down_strict && !has_up_strict {
                return SupportReport::fail(format!(
                    "martingale point {x} has a down-path but no up-path"
                ));
            }
            if !has_up_weak {
                return SupportReport::fail(format!(
                    "martingale point {x} has no destination at or above it"
                ));
            }
        }
    }
    SupportReport::pass()
}

/// Outcome of the local competitor search.
#[derive(Clone, Debug)]
pub struct LocalOptimalityReport {
    pub passed: bool,
    /// Description of the first improving competitor, with its gain.
    pub violation: Option<String>,
}

/// Search the two local competitor families over the support of `p` for one
/// that improves the reward: pair swaps, and triple splits whose kernels keep
/// a common barycenter. A competitor is admitted only when the barycenter
/// conditions on `m0` (may decrease) and `m1` (must be preserved) hold and it
/// stays inside `sigma`.
pub fn verify_local_optimality(
    p: &Coupling,
    f: impl Fn(f64, f64) -> f64,
    m0: &[Value],
    m1: &[Value],
    sigma: impl Fn(&Value, &Value) -> bool,
    eps: f64,
) -> LocalOptimalityReport {
    let pts = p.support();

    // pair swaps: (x1,y1),(x2,y2) -> (x1,y2),(x2,y1)
    for (i, (x1, y1)) in pts.iter().enumerate() {
        for (x2, y2) in pts.iter().skip(i + 1) {
            if x1 == x2 || y1 == y2 {
                continue;
            }
            // barycenter move at x1: y1 -> y2; at x2: y2 -> y1
            let ok1 = if m1.contains(x1) {
                y2 == y1
            } else if m0.contains(x1) {
                y2 <= y1
            } else {
                true
            };
            let ok2 = if m1.contains(x2) {
                y1 == y2
            } else if m0.contains(x2) {
                y1 <= y2
            } else {
                true
            };
            if !ok1 || !ok2 || !sigma(x1, y2) || !sigma(x2, y1) {
                continue;
            }
            let (fx1, fy1, fx2, fy2) = (x1.to_f64(), y1.to_f64(), x2.to_f64(), y2.to_f64());
            let gain = f(fx1, fy2) + f(fx2, fy1) - f(fx1, fy1) - f(fx2, fy2);
            if gain > eps {
                return LocalOptimalityReport {
                    passed: false,
                    violation: Some(format!(
                        "swap ({x1},{y1})/({x2},{y2}) gains {gain}"
                    )),
                };
            }
        }
    }

    // triple splits: (x,y1),(x,y2) in one section, (x',y') with y1 < y' < y2;
    // mass (y2-y')/(y2-y1) goes to y1 and (y'-y1)/(y2-y1) to y2 so that every
    // kernel involved keeps barycenter y'
    for (x, y1) in &pts {
        for (xq, y2) in &pts {
            if xq != x || y2 <= y1 {
                continue;
            }
            for (xp, yp) in &pts {
                if xp == x || yp <= y1 || yp >= y2 {
                    continue;
                }
                if !(sigma(xp, y1) && sigma(xp, y2) && sigma(x, yp)) {
                    continue;
                }
                let (fy1, fy2, fyp) = (y1.to_f64(), y2.to_f64(), yp.to_f64());
                let lam = (fyp - fy1) / (fy2 - fy1);
                let (fx, fxp) = (x.to_f64(), xp.to_f64());
                let gain = (1.0 - lam) * f(fxp, fy1) + lam * f(fxp, fy2) + f(fx, fyp)
                    - (1.0 - lam) * f(fx, fy1)
                    - lam * f(fx, fy2)
                    - f(fxp, fyp);
                if gain > eps {
                    return LocalOptimalityReport {
                        passed: false,
                        violation: Some(format!(
                            "split ({x},{y1})+({x},{y2}) against ({xp},{yp}) gains {gain}"
                        )),
                    };
                }
            }
        }
    }

    LocalOptimalityReport { passed: true, violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::{classify_martingale_points, increasing_transport};
    use crate::measure::{mu_star, nu_star};

    fn grid_x() -> Vec<f64> {
        vec![-1.0, 0.0, 1.0]
    }

    fn grid_y() -> Vec<f64> {
        vec![-4.0, -2.5, 2.0]
    }

    #[test]
    fn canonical_reward_signs() {
        let g = RewardSpec::CanonicalSm;
        // -g first-order strict, g second-order strict
        assert!(check_spence_mirrlees(g.as_fn(), &grid_x(), &grid_y(), SmOrder::First, SmSign::Minus, true).passed);
        assert!(check_spence_mirrlees(g.as_fn(), &grid_x(), &grid_y(), SmOrder::Second, SmSign::Plus, true).passed);
        // and not the other combinations
        assert!(!check_spence_mirrlees(g.as_fn(), &grid_x(), &grid_y(), SmOrder::First, SmSign::Plus, true).passed);
        assert!(!check_spence_mirrlees(g.as_fn(), &grid_x(), &grid_y(), SmOrder::Second, SmSign::Minus, true).passed);
    }

    #[test]
    fn additive_reward_is_relaxed_but_not_strict() {
        let f = |x: f64, y: f64| x + y;
        let strict =
            check_spence_mirrlees(f, &grid_x(), &grid_y(), SmOrder::First, SmSign::Plus, true);
        assert!(!strict.passed);
        let relaxed =
            check_spence_mirrlees(f, &grid_x(), &grid_y(), SmOrder::First, SmSign::Plus, false);
        assert!(relaxed.passed);
    }

    #[test]
    fn exp_product_is_first_and_second_order() {
        let f = RewardSpec::ExpProduct;
        assert!(check_spence_mirrlees(f.as_fn(), &grid_x(), &grid_y(), SmOrder::First, SmSign::Plus, true).passed);
        assert!(check_spence_mirrlees(f.as_fn(), &grid_x(), &grid_y(), SmOrder::Second, SmSign::Plus, true).passed);
    }

    /// Support of the first tabulated optimizer of the exp-product reward on
    /// the reference pair (martingale set {1}).
    fn pi1_support() -> SupportGraph {
        SupportGraph::new(
            vec![
                (Value::int(-1), Value::int(-4)),
                (Value::int(-1), Value::rat(-5, 2)),
                (Value::int(0), Value::rat(-5, 2)),
                (Value::int(0), Value::int(2)),
                (Value::int(1), Value::int(-4)),
                (Value::int(1), Value::int(2)),
            ],
            vec![Value::int(1)],
        )
    }

    #[test]
    fn pi1_is_left_left_monotone() {
        let sg = pi1_support();
        assert!(check_first_order(&sg, Direction::Left).passed);
        assert!(check_second_order(&sg, Direction::Left).passed);
        assert!(check_nondegenerate(&sg).passed);
    }

    #[test]
    fn increasing_transport_is_right_left_monotone() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        let sg = SupportGraph::from_coupling(&p, 1e-9);
        assert_eq!(sg.m_set, vec![Value::int(-1), Value::int(0)]);
        assert!(check_first_order(&sg, Direction::Right).passed);
        assert!(check_second_order(&sg, Direction::Left).passed);
        assert!(check_nondegenerate(&sg).passed);
    }

    #[test]
    fn crossing_pair_fails_left_passes_right() {
        let sg = SupportGraph::new(
            vec![(Value::int(0), Value::int(1)), (Value::int(1), Value::int(0))],
            vec![],
        );
        assert!(!check_first_order(&sg, Direction::Left).passed);
        assert!(check_first_order(&sg, Direction::Right).passed);
    }

    #[test]
    fn second_order_violation_detected() {
        let sg = SupportGraph::new(
            vec![
                (Value::int(0), Value::int(0)),
                (Value::int(0), Value::int(2)),
                (Value::int(1), Value::int(1)),
            ],
            vec![],
        );
        assert!(!check_second_order(&sg, Direction::Left).passed);
        assert!(check_second_order(&sg, Direction::Right).passed);
    }

    #[test]
    fn nondegeneracy_cases() {
        // an up-path without a down-path fails
        let sg = SupportGraph::new(vec![(Value::int(0), Value::int(1))], vec![]);
        assert!(!check_nondegenerate(&sg).passed);
        // the diagonal counts both ways
        let diag = SupportGraph::new(vec![(Value::int(0), Value::int(0))], vec![Value::int(0)]);
        assert!(check_nondegenerate(&diag).passed);
    }

    #[test]
    fn local_optimality_of_increasing_transport() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        let g = RewardSpec::CanonicalSm;
        let cls = classify_martingale_points(&p, 1e-9);
        // the reference pair is a single proper component: M0 from binding
        // drift (here the martingale points), M1 empty
        let report = verify_local_optimality(
            &p,
            g.as_fn(),
            &cls.martingale_points,
            &[],
            |_, _| true,
            1e-9,
        );
        assert!(report.passed, "{:?}", report.violation);
    }

    #[test]
    fn crossed_coupling_admits_improving_swap() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        // swap destinations across rows -1 and 1 to create a crossing
        let mut rows = p.rows().to_vec();
        let shift = Value::rat(1, 9);
        rows[0].kernel = rows[0]
            .kernel
            .subtract(&crate::measure::DiscreteMeasure::dirac(Value::int(2), shift.clone()))
            .unwrap()
            .add(&crate::measure::DiscreteMeasure::dirac(Value::int(-4), shift.clone()));
        rows[2].kernel = rows[2]
            .kernel
            .subtract(&crate::measure::DiscreteMeasure::dirac(Value::int(-4), shift.clone()))
            .unwrap()
            .add(&crate::measure::DiscreteMeasure::dirac(Value::int(2), shift));
        let crossed = crate::coupling::Coupling::from_rows(rows);
        let g = RewardSpec::CanonicalSm;
        let report = verify_local_optimality(&crossed, g.as_fn(), &[], &[], |_, _| true, 1e-9);
        assert!(!report.passed);
    }

    #[test]
    fn identity_coupling_has_no_competitors() {
        let p = crate::coupling::Coupling::identity(&mu_star());
        let m1: Vec<Value> = mu_star().atoms().iter().map(|a| a.x.clone()).collect();
        let f = |x: f64, y: f64| x * y;
        let report = verify_local_optimality(&p, f, &[], &m1, |_, _| true, 1e-9);
        assert!(report.passed);
    }
}
