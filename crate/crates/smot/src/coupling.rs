//! Transport plans with per-row kernels and the two canonical supermartingale
//! couplings.
//!
//! [`increasing_transport`] processes the atoms of `μ` left to right, sending
//! each to the shadow of its point mass in what remains of `ν`; the cumulative
//! image up to any `x` then equals `S^ν(μ|_(−∞,x])`. [`decreasing_transport`]
//! is the mirror image, processing right to left.

use std::fmt;

use thiserror::Error;

use crate::measure::{DiscreteMeasure, MeasureError};
use crate::scalar::{tolerance, Value};
use crate::shadow::{shadow_dirac, ShadowError};

#[derive(Debug, Error)]
pub enum CouplingError {
    /// The marginals are not in convex-decreasing order; carries a witness
    /// point where the put comparison (or a mass/barycenter condition) fails.
    #[error("marginals not in convex-decreasing order: {reason} at t = {witness}")]
    NotInConvexDecreasingOrder { witness: f64, reason: String },
    #[error(transparent)]
    Shadow(#[from] ShadowError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// One source row of a coupling: the source location and its kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub x: Value,
    pub kernel: DiscreteMeasure,
}

impl Row {
    /// Row mass `μ({x})`.
    pub fn mass(&self) -> Value {
        self.kernel.total_mass()
    }

    /// Kernel barycenter minus the source location.
    pub fn drift(&self) -> Value {
        &self.kernel.barycenter() - &self.x
    }
}

/// Sparse joint measure stored row-major, with its two marginals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coupling {
    rows: Vec<Row>,
    first_marginal: DiscreteMeasure,
    second_marginal: DiscreteMeasure,
}

impl Coupling {
    /// Assemble a coupling from rows; rows with zero mass are dropped and the
    /// marginals are recomputed from the kernels.
    pub fn from_rows(mut rows: Vec<Row>) -> Self {
        rows.retain(|r| !r.kernel.is_zero_measure());
        rows.sort_by(|a, b| a.x.cmp(&b.x));
        let first = DiscreteMeasure::from_atoms(
            rows.iter().map(|r| (r.x.clone(), r.mass())).collect(),
        )
        .expect("row masses are positive");
        let second = rows
            .iter()
            .fold(DiscreteMeasure::zero(), |acc, r| acc.add(&r.kernel));
        Coupling { rows, first_marginal: first, second_marginal: second }
    }

    /// The identity coupling of a measure with itself.
    pub fn identity(m: &DiscreteMeasure) -> Self {
        Coupling::from_rows(
            m.atoms()
                .iter()
                .map(|a| Row {
                    x: a.x.clone(),
                    kernel: DiscreteMeasure::dirac(a.x.clone(), a.w.clone()),
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn first_marginal(&self) -> &DiscreteMeasure {
        &self.first_marginal
    }

    pub fn second_marginal(&self) -> &DiscreteMeasure {
        &self.second_marginal
    }

    pub fn row_at(&self, x: &Value) -> Option<&Row> {
        self.rows.iter().find(|r| &r.x == x)
    }

    /// Mass on the cell `(x, y)`.
    pub fn mass_at(&self, x: &Value, y: &Value) -> Value {
        self.row_at(x)
            .map(|r| r.kernel.mass_at(y))
            .unwrap_or_else(Value::zero)
    }

    /// Support as a list of `(x, y)` pairs in row-major order.
    pub fn support(&self) -> Vec<(Value, Value)> {
        let mut pts = Vec::new();
        for r in &self.rows {
            for a in r.kernel.atoms() {
                pts.push((r.x.clone(), a.x.clone()));
            }
        }
        pts
    }

    /// Total reward `Σ P(x,y) f(x,y)` for a float-valued reward.
    pub fn reward_value(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mut total = 0.0;
        for r in &self.rows {
            let x = r.x.to_f64();
            for a in r.kernel.atoms() {
                total += a.w.to_f64() * f(x, a.x.to_f64());
            }
        }
        total
    }

    /// Restrict to rows whose source location satisfies the predicate.
    pub fn restrict_rows(&self, keep: impl Fn(&Value) -> bool) -> Coupling {
        Coupling::from_rows(
            self.rows
                .iter()
                .filter(|r| keep(&r.x))
                .cloned()
                .collect(),
        )
    }

    /// Atomwise equality within tolerance `eps` (exact when both sides are
    /// exact-valued).
    pub fn approx_eq(&self, other: &Coupling, eps: f64) -> bool {
        let mut cells: Vec<(&Value, &Value)> = Vec::new();
        for r in self.rows.iter().chain(other.rows.iter()) {
            for a in r.kernel.atoms() {
                cells.push((&r.x, &a.x));
            }
        }
        cells.sort();
        cells.dedup();
        cells
            .into_iter()
            .all(|(x, y)| self.mass_at(x, y).eq_tol(&other.mass_at(x, y), eps))
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "x = {} -> {}", r.x, r.kernel)?;
        }
        Ok(())
    }
}

fn require_cd_order(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<(), CouplingError> {
    if mu.leq_convex_decreasing(nu) {
        return Ok(());
    }
    let eps = tolerance();
    // locate a witness for the error report
    if !mu.total_mass().eq_tol(&nu.total_mass(), eps) {
        return Err(CouplingError::NotInConvexDecreasingOrder {
            witness: f64::NAN,
            reason: format!(
                "total masses differ ({} vs {})",
                mu.total_mass(),
                nu.total_mass()
            ),
        });
    }
    for a in mu.atoms().iter().chain(nu.atoms().iter()) {
        let (pm, pn) = (mu.put_value(&a.x), nu.put_value(&a.x));
        if !pm.le_tol(&pn, eps) {
            return Err(CouplingError::NotInConvexDecreasingOrder {
                witness: a.x.to_f64(),
                reason: format!("p_mu({}) = {} > {} = p_nu({})", a.x, pm, pn, a.x),
            });
        }
    }
    Err(CouplingError::NotInConvexDecreasingOrder {
        witness: f64::INFINITY,
        reason: format!(
            "bary(mu) = {} < {} = bary(nu)",
            mu.barycenter(),
            nu.barycenter()
        ),
    })
}

/// Increasing Supermartingale Transport: every left tail of `mu` is sent to
/// its shadow in `nu`.
pub fn increasing_transport(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<Coupling, CouplingError> {
    require_cd_order(mu, nu)?;
    let mut remaining = nu.clone();
    let mut rows = Vec::with_capacity(mu.len());
    for atom in mu.atoms() {
        let kernel = shadow_dirac(&atom.x, &atom.w, &remaining)?.shadow;
        remaining = remaining.subtract(&kernel)?;
        rows.push(Row { x: atom.x.clone(), kernel });
    }
    Ok(Coupling::from_rows(rows))
}

/// Decreasing Supermartingale Transport: every right tail of `mu` is sent to
/// its shadow in `nu`.
pub fn decreasing_transport(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<Coupling, CouplingError> {
    require_cd_order(mu, nu)?;
    let mut remaining = nu.clone();
    let mut rows = Vec::with_capacity(mu.len());
    for atom in mu.atoms().iter().rev() {
        let kernel = shadow_dirac(&atom.x, &atom.w, &remaining)?.shadow;
        remaining = remaining.subtract(&kernel)?;
        rows.push(Row { x: atom.x.clone(), kernel });
    }
    Ok(Coupling::from_rows(rows))
}

/// Partition of source points into martingale points and drifting ones.
#[derive(Clone, Debug)]
pub struct MartingaleClassification {
    /// Source locations whose kernel drift vanishes up to `eps·max(1,|x|)`.
    pub martingale_points: Vec<Value>,
    /// Drift `bary(κ(x)) − x` per row.
    pub drifts: Vec<(Value, Value)>,
}

impl MartingaleClassification {
    pub fn is_martingale_point(&self, x: &Value) -> bool {
        self.martingale_points.contains(x)
    }
}

/// Classify each row of a supermartingale coupling by its kernel drift.
pub fn classify_martingale_points(p: &Coupling, eps: f64) -> MartingaleClassification {
    let mut martingale_points = Vec::new();
    let mut drifts = Vec::new();
    for r in p.rows() {
        let drift = r.drift();
        let scale = Value::float(eps.max(eps * r.x.to_f64().abs()));
        if drift.abs().le_tol(&scale, eps) {
            martingale_points.push(r.x.clone());
        }
        drifts.push((r.x.clone(), drift));
    }
    MartingaleClassification { martingale_points, drifts }
}

/// Outcome of validating a coupling against its intended marginals and the
/// supermartingale constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum ValidationReport {
    Pass,
    /// First marginal does not match `mu`.
    FirstMarginalMismatch { x: f64 },
    /// Second marginal does not match `nu`.
    SecondMarginalMismatch { y: f64 },
    /// A row drifts upward beyond tolerance.
    PositiveDrift { x: f64, drift: f64 },
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        matches!(self, ValidationReport::Pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationReport::Pass => write!(f, "pass"),
            ValidationReport::FirstMarginalMismatch { x } => {
                write!(f, "fail: first marginal mismatch at x = {x}")
            }
            ValidationReport::SecondMarginalMismatch { y } => {
                write!(f, "fail: second marginal mismatch at y = {y}")
            }
            ValidationReport::PositiveDrift { x, drift } => {
                write!(f, "fail: positive drift {drift} at x = {x}")
            }
        }
    }
}

/// Check marginals and the per-row supermartingale constraint, reporting the
/// first violation found.
pub fn validate(
    p: &Coupling,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    eps: f64,
) -> ValidationReport {
    for a in mu.atoms().iter().chain(p.first_marginal().atoms().iter()) {
        if !p
            .first_marginal()
            .mass_at(&a.x)
            .eq_tol(&mu.mass_at(&a.x), eps)
        {
            return ValidationReport::FirstMarginalMismatch { x: a.x.to_f64() };
        }
    }
    for a in nu.atoms().iter().chain(p.second_marginal().atoms().iter()) {
        if !p
            .second_marginal()
            .mass_at(&a.x)
            .eq_tol(&nu.mass_at(&a.x), eps)
        {
            return ValidationReport::SecondMarginalMismatch { y: a.x.to_f64() };
        }
    }
    for r in p.rows() {
        let drift = r.drift();
        let scale = Value::float(eps.max(eps * r.x.to_f64().abs()));
        if !drift.le_tol(&scale, eps) {
            return ValidationReport::PositiveDrift { x: r.x.to_f64(), drift: drift.to_f64() };
        }
    }
    ValidationReport::Pass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{mu_star, nu_star, Interval};
    use crate::shadow::shadow;

    /// The increasing transport of the reference pair, derived by hand
    /// iteration of the dirac shadow (and confirmed by the LP oracle in the
    /// acceptance suite).
    fn expected_increasing() -> Vec<(i64, Vec<(Value, Value)>)> {
        vec![
            (-1, vec![(Value::rat(-5, 2), Value::rat(2, 9)), (Value::int(2), Value::rat(1, 9))]),
            (
                0,
                vec![
                    (Value::int(-4), Value::rat(1, 36)),
                    (Value::rat(-5, 2), Value::rat(4, 36)),
                    (Value::int(2), Value::rat(7, 36)),
                ],
            ),
            (1, vec![(Value::int(-4), Value::rat(11, 36)), (Value::int(2), Value::rat(1, 36))]),
        ]
    }

    #[test]
    fn increasing_transport_reference_pair() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        for (x, kernel) in expected_increasing() {
            let row = p.row_at(&Value::int(x)).unwrap();
            assert_eq!(row.kernel.len(), kernel.len());
            for (y, w) in kernel {
                assert_eq!(row.kernel.mass_at(&y), w, "kernel mass at ({x}, {y})");
            }
        }
        assert_eq!(p.second_marginal(), &nu_star());
    }

    #[test]
    fn decreasing_transport_reference_pair() {
        // equals the second optimizer tabulated for the exp-product-plus-4xy
        // reward on this pair
        let p = decreasing_transport(&mu_star(), &nu_star()).unwrap();
        assert_eq!(p.mass_at(&Value::int(1), &Value::rat(-5, 2)), Value::rat(2, 27));
        assert_eq!(p.mass_at(&Value::int(1), &Value::int(2)), Value::rat(7, 27));
        assert_eq!(p.mass_at(&Value::int(0), &Value::rat(-5, 2)), Value::rat(7, 27));
        assert_eq!(p.mass_at(&Value::int(0), &Value::int(2)), Value::rat(2, 27));
        assert_eq!(p.mass_at(&Value::int(-1), &Value::int(-4)), Value::rat(1, 3));
        assert_eq!(p.second_marginal(), &nu_star());
    }

    #[test]
    fn identity_when_marginals_coincide() {
        let p = increasing_transport(&mu_star(), &mu_star()).unwrap();
        assert_eq!(p, Coupling::identity(&mu_star()));
        let q = decreasing_transport(&nu_star(), &nu_star()).unwrap();
        assert_eq!(q, Coupling::identity(&nu_star()));
    }

    #[test]
    fn order_violation_is_reported() {
        let err = increasing_transport(&nu_star(), &mu_star());
        assert!(matches!(
            err,
            Err(CouplingError::NotInConvexDecreasingOrder { .. })
        ));
    }

    #[test]
    fn martingale_classification_of_increasing() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        let cls = classify_martingale_points(&p, 1e-9);
        assert_eq!(cls.martingale_points, vec![Value::int(-1), Value::int(0)]);
        let drift_at_one = cls
            .drifts
            .iter()
            .find(|(x, _)| x == &Value::int(1))
            .map(|(_, d)| d.clone())
            .unwrap();
        assert_eq!(drift_at_one, Value::rat(-9, 2));
    }

    #[test]
    fn identity_is_all_martingale() {
        let p = Coupling::identity(&nu_star());
        let cls = classify_martingale_points(&p, 1e-9);
        assert_eq!(cls.martingale_points.len(), nu_star().len());
    }

    #[test]
    fn validation_catches_corruption() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        assert!(validate(&p, &mu_star(), &nu_star(), 1e-9).passed());

        // swap kernel mass across rows to break a column sum
        let mut rows: Vec<Row> = p.rows().to_vec();
        let moved = DiscreteMeasure::dirac(Value::int(2), Value::rat(1, 9));
        rows[0].kernel = rows[0]
            .kernel
            .subtract(&moved)
            .unwrap()
            .add(&DiscreteMeasure::dirac(Value::int(-4), Value::rat(1, 9)));
        let broken = Coupling::from_rows(rows);
        assert!(matches!(
            validate(&broken, &mu_star(), &nu_star(), 1e-9),
            ValidationReport::SecondMarginalMismatch { .. }
        ));

        let id = Coupling::identity(&mu_star());
        assert!(matches!(
            validate(&id, &mu_star(), &nu_star(), 1e-9),
            ValidationReport::SecondMarginalMismatch { .. }
        ));
    }

    #[test]
    fn cumulative_image_is_tail_shadow() {
        let p = increasing_transport(&mu_star(), &nu_star()).unwrap();
        for atom in mu_star().atoms() {
            let tail = mu_star().restrict(&Interval::left_tail(atom.x.clone(), true));
            let image = p
                .rows()
                .iter()
                .filter(|r| r.x <= atom.x)
                .fold(DiscreteMeasure::zero(), |acc, r| acc.add(&r.kernel));
            assert_eq!(image, shadow(&tail, &nu_star()).unwrap());
        }
    }
}
