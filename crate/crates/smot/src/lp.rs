//! Dense two-phase simplex and the three transport linear programs.
//!
//! The solver is self-contained: float arithmetic, Bland's anti-cycling rule,
//! duals read off the final tableau (the reduced cost of the artificial
//! column of row `i` is `−y_i`). Instances here are desk-scale; no effort is
//! spent on sparsity or factorization.
//!
//! A transport LP maximizes `Σ P_ij f(x_i, y_j)` over nonnegative `P` with
//! prescribed row sums `μ_i`, column sums `ν_j`, and per-row drift
//! `Σ_j P_ij (y_j − x_i)` constrained to `≤ 0` (supermartingale), `= 0`
//! (martingale) or left free. The dual certificate `(φ, ψ, h)` satisfies
//! `φ(x_i) + ψ(y_j) + h(x_i)(y_j − x_i) ≥ f(x_i, y_j)` on the whole grid,
//! with `h ≥ 0` in the supermartingale case and sign-free in the martingale
//! case, and `Σ φ μ + Σ ψ ν` equals the optimal value.

use thiserror::Error;

use crate::coupling::{Coupling, Row};
use crate::measure::DiscreteMeasure;
use crate::scalar::Value;

/// Reduced-cost / pivot tolerance of the simplex.
const PIVOT_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("LP infeasible")]
    Infeasible,
    #[error("LP unbounded")]
    Unbounded,
    #[error("masses do not balance: {mu} vs {nu}")]
    Unbalanced { mu: f64, nu: f64 },
    #[error("numerical failure in solver: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// General-form problem: minimize `c·x` subject to `A_eq x = b_eq`,
/// `A_ub x ≤ b_ub`, `x ≥ 0`.
#[derive(Clone, Debug, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
}

/// Basic solution of an [`LpProblem`] with row duals.
#[derive(Clone, Debug)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Duals of the equality rows (free sign).
    pub duals_eq: Vec<f64>,
    /// Duals of the `≤` rows (nonpositive for a minimization).
    pub duals_ub: Vec<f64>,
    /// True when no nonbasic structural column has zero reduced cost.
    pub uniqueness_hint: bool,
}

/// Solve a general-form LP with the two-phase simplex.
pub fn solve(problem: &LpProblem) -> Result<LpOutcome, LpError> {
    let n = problem.objective.len();
    let n_ub = problem.a_ub.len();
    let n_eq = problem.a_eq.len();
    let m = n_eq + n_ub;
    let total = n + n_ub; // structural + slack
    // rows: equalities first, then inequalities with slack
    let mut a = vec![vec![0.0; total]; m];
    let mut b = vec![0.0; m];
    let mut c = vec![0.0; total];
    c[..n].copy_from_slice(&problem.objective);
    for (i, row) in problem.a_eq.iter().enumerate() {
        a[i][..n].copy_from_slice(row);
        b[i] = problem.b_eq[i];
    }
    for (i, row) in problem.a_ub.iter().enumerate() {
        a[n_eq + i][..n].copy_from_slice(row);
        a[n_eq + i][n + i] = 1.0;
        b[n_eq + i] = problem.b_ub[i];
    }
    let (status, tab) = Tableau::run_full(a, b, c.clone())?;
    if status != LpStatus::Optimal {
        return Ok(LpOutcome {
            status,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals_eq: vec![0.0; n_eq],
            duals_ub: vec![0.0; n_ub],
            uniqueness_hint: false,
        });
    }
    let xfull = tab.primal();
    let y = tab.duals();
    Ok(LpOutcome {
        status,
        objective: problem
            .objective
            .iter()
            .zip(&xfull)
            .map(|(ci, xi)| ci * xi)
            .sum(),
        x: xfull[..n].to_vec(),
        duals_eq: y[..n_eq].to_vec(),
        duals_ub: y[n_eq..].to_vec(),
        uniqueness_hint: tab.unique_optimum(n),
    })
}

/// Dense simplex tableau over structural + artificial columns.
struct Tableau {
    m: usize,
    n: usize, // structural (incl. slack) columns
    rows: Vec<Vec<f64>>, // m x (n + m + 1), last column is the RHS
    cost: Vec<f64>,      // reduced-cost row, length n + m
    basis: Vec<usize>,
    obj: f64,
    art_blocked: Vec<bool>,
    row_sign: Vec<f64>, // rows were flipped to make the RHS nonnegative
}

impl Tableau {
    fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c_len: usize) -> Self {
        let m = a.len();
        let n = c_len;
        let mut rows = vec![vec![0.0; n + m + 1]; m];
        let mut row_sign = vec![1.0; m];
        for i in 0..m {
            let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
            row_sign[i] = flip;
            for j in 0..n {
                rows[i][j] = flip * a[i][j];
            }
            rows[i][n + i] = 1.0;
            rows[i][n + m] = flip * b[i];
        }
        Tableau {
            m,
            n,
            rows,
            cost: vec![0.0; n + m],
            basis: (n..n + m).collect(),
            obj: 0.0,
            art_blocked: vec![false; m],
            row_sign,
        }
    }

    fn run_full(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<(LpStatus, Tableau), LpError> {
        let mut tab = Tableau::new(a, b, c.len());
        match tab.run_phase1()? {
            LpStatus::Optimal => {}
            s => return Ok((s, tab)),
        }
        let status = tab.run_phase2(&c)?;
        Ok((status, tab))
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= self.n
    }

    fn rebuild_cost(&mut self, c: &[f64]) {
        // c has length n; artificials cost zero
        let width = self.n + self.m;
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&b| if b < self.n { c[b] } else { 0.0 })
            .collect();
        for j in 0..width {
            let cj = if j < self.n { c[j] } else { 0.0 };
            let mut z = cj;
            for i in 0..self.m {
                z -= cb[i] * self.rows[i][j];
            }
            self.cost[j] = z;
        }
        self.obj = (0..self.m).map(|i| cb[i] * self.rows[i][width]).sum();
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n + self.m + 1;
        let p = self.rows[row][col];
        for j in 0..width {
            self.rows[row][j] /= p;
        }
        for i in 0..self.m {
            if i != row {
                let factor = self.rows[i][col];
                if factor != 0.0 {
                    for j in 0..width {
                        self.rows[i][j] -= factor * self.rows[row][j];
                    }
                }
            }
        }
        let factor = self.cost[col];
        if factor != 0.0 {
            for j in 0..width - 1 {
                self.cost[j] -= factor * self.rows[row][j];
            }
            self.obj += factor * self.rows[row][width - 1];
        }
        self.basis[row] = col;
    }

    /// Bland's rule iteration until optimality; `phase2` bars artificial
    /// columns from entering.
    fn iterate(&mut self, phase2: bool) -> Result<(), LpError> {
        let width = self.n + self.m;
        let max_iters = 50_000 + 200 * (self.m + width);
        for _ in 0..max_iters {
            // entering: lowest-index allowed column with negative reduced cost
            let mut entering = None;
            for j in 0..width {
                if self.cost[j] < -PIVOT_EPS {
                    if self.is_artificial(j) && (phase2 || self.art_blocked[j - self.n]) {
                        continue;
                    }
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return Ok(()) };
            // leaving: min ratio, ties by smallest basic index (Bland)
            let rhs = width;
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let pivot = self.rows[i][col];
                if pivot > PIVOT_EPS {
                    let ratio = self.rows[i][rhs] / pivot;
                    match best {
                        None => best = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_EPS
                                || ((ratio - br).abs() <= PIVOT_EPS
                                    && self.basis[i] < self.basis[bi])
                            {
                                best = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((row, _)) = best else {
                return Err(LpError::Unbounded);
            };
            // once an artificial leaves the basis it never re-enters
            if self.is_artificial(self.basis[row]) {
                self.art_blocked[self.basis[row] - self.n] = true;
            }
            self.pivot(row, col);
        }
        Err(LpError::Numerical("iteration limit reached".into()))
    }

    fn run_phase1(&mut self) -> Result<LpStatus, LpError> {
        // minimize the sum of artificials; all start basic
        let width = self.n + self.m;
        for j in 0..width {
            let direct = if j >= self.n { 1.0 } else { 0.0 };
            let mut z = direct;
            for i in 0..self.m {
                z -= self.rows[i][j];
            }
            self.cost[j] = z;
        }
        self.obj = self.rows.iter().map(|r| r[width]).sum::<f64>();
        match self.iterate(false) {
            Ok(()) => {}
            Err(LpError::Unbounded) => {
                return Err(LpError::Numerical("phase 1 unbounded".into()))
            }
            Err(e) => return Err(e),
        }
        if self.obj.abs() > 1e-7 {
            return Ok(LpStatus::Infeasible);
        }
        // drive remaining artificials out of the basis where possible,
        // scanning bottom-up so a dependent row early in the system is the
        // one left pinned (its dual is then zero, matching the anchoring of
        // standard solvers on degenerate duals)
        for i in (0..self.m).rev() {
            if self.basis[i] >= self.n {
                if let Some(col) = (0..self.n).find(|&j| self.rows[i][j].abs() > 1e-8) {
                    self.art_blocked[self.basis[i] - self.n] = true;
                    self.pivot(i, col);
                }
                // otherwise the row is redundant; its artificial stays basic
                // at zero and is barred from pricing anyway
            }
        }
        Ok(LpStatus::Optimal)
    }

    fn run_phase2(&mut self, c: &[f64]) -> Result<LpStatus, LpError> {
        self.rebuild_cost(c);
        match self.iterate(true) {
            Ok(()) => Ok(LpStatus::Optimal),
            Err(LpError::Unbounded) => Ok(LpStatus::Unbounded),
            Err(e) => Err(e),
        }
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        let rhs = self.n + self.m;
        for (i, &bi) in self.basis.iter().enumerate() {
            if bi < self.n {
                x[bi] = self.rows[i][rhs];
            }
        }
        x
    }

    /// Row duals: the reduced cost of the artificial column of row `i`
    /// equals `−y_i` once the real cost row is installed. Rows whose RHS was
    /// flipped during setup get their dual sign restored.
    fn duals(&self) -> Vec<f64> {
        (0..self.m)
            .map(|i| -self.cost[self.n + i] * self.row_sign[i])
            .collect()
    }

    fn unique_optimum(&self, structural: usize) -> bool {
        let mut basic = vec![false; self.n + self.m];
        for &b in &self.basis {
            basic[b] = true;
        }
        (0..structural).all(|j| basic[j] || self.cost[j] > PIVOT_EPS)
    }
}

// --- transport LPs ----------------------------------------------------------

/// Per-row drift constraint of a transport LP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Supermartingale: `Σ_j P_ij (y_j − x_i) ≤ 0` per row.
    DriftLeqZero,
    /// Martingale: `Σ_j P_ij (y_j − x_i) = 0` per row.
    DriftEqZero,
    /// Unconstrained Monge–Kantorovich transport.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// A fully evaluated transport LP instance.
#[derive(Clone, Debug)]
pub struct TransportLp {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub mu_w: Vec<f64>,
    pub nu_w: Vec<f64>,
    /// Reward matrix `f(x_i, y_j)`, evaluated once up front.
    pub reward: Vec<Vec<f64>>,
    pub constraint_kind: ConstraintKind,
    pub sense: Sense,
}

impl TransportLp {
    /// Evaluate a reward on the product grid of two discrete marginals.
    pub fn new(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        f: impl Fn(f64, f64) -> f64,
        constraint_kind: ConstraintKind,
        sense: Sense,
    ) -> Result<Self, LpError> {
        let mm = mu.total_mass().to_f64();
        let nm = nu.total_mass().to_f64();
        if (mm - nm).abs() > 1e-9 * (1.0 + mm.abs()) {
            return Err(LpError::Unbalanced { mu: mm, nu: nm });
        }
        let xs: Vec<f64> = mu.atoms().iter().map(|a| a.x.to_f64()).collect();
        let ys: Vec<f64> = nu.atoms().iter().map(|a| a.x.to_f64()).collect();
        let reward: Vec<Vec<f64>> = xs
            .iter()
            .map(|&x| ys.iter().map(|&y| f(x, y)).collect())
            .collect();
        for row in &reward {
            for v in row {
                if !v.is_finite() {
                    return Err(LpError::Numerical("reward not finite on the grid".into()));
                }
            }
        }
        Ok(TransportLp {
            xs,
            ys,
            mu_w: mu.atoms().iter().map(|a| a.w.to_f64()).collect(),
            nu_w: nu.atoms().iter().map(|a| a.w.to_f64()).collect(),
            reward,
            constraint_kind,
            sense,
        })
    }
}

/// Dual certificate `(φ, ψ, h)` on the grid.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub h: Vec<f64>,
}

/// Primal plan, objective, dual certificate and solver status.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub plan: Coupling,
    pub value: f64,
    pub dual: DualCertificate,
    pub status: LpStatus,
    pub uniqueness_hint: bool,
}

/// Solve a transport LP, returning the optimal plan and a dual certificate.
pub fn solve_transport(lp: &TransportLp) -> Result<LpSolution, LpError> {
    let n = lp.xs.len();
    let m = lp.ys.len();
    let nm = n * m;
    let drift_rows = match lp.constraint_kind {
        ConstraintKind::None => 0,
        _ => n,
    };
    let slack = if lp.constraint_kind == ConstraintKind::DriftLeqZero { n } else { 0 };
    let total = nm + slack;
    let rows = n + m + drift_rows;

    let mut a = vec![vec![0.0; total]; rows];
    let mut b = vec![0.0; rows];
    for i in 0..n {
        for j in 0..m {
            a[i][i * m + j] = 1.0;
        }
        b[i] = lp.mu_w[i];
    }
    for j in 0..m {
        for i in 0..n {
            a[n + j][i * m + j] = 1.0;
        }
        b[n + j] = lp.nu_w[j];
    }
    for i in 0..drift_rows {
        for j in 0..m {
            a[n + m + i][i * m + j] = lp.ys[j] - lp.xs[i];
        }
        if slack > 0 {
            a[n + m + i][nm + i] = 1.0;
        }
        b[n + m + i] = 0.0;
    }

    // internally a minimization; flip the reward when maximizing
    let sign = match lp.sense {
        Sense::Maximize => -1.0,
        Sense::Minimize => 1.0,
    };
    let mut c = vec![0.0; total];
    for i in 0..n {
        for j in 0..m {
            c[i * m + j] = sign * lp.reward[i][j];
        }
    }

    let (status, tab) = Tableau::run_full(a, b, c)?;
    match status {
        LpStatus::Infeasible => return Err(LpError::Infeasible),
        LpStatus::Unbounded => return Err(LpError::Unbounded),
        LpStatus::Optimal => {}
    }

    let x = tab.primal();
    let y = tab.duals();

    let mut rows_out: Vec<Row> = Vec::new();
    for i in 0..n {
        let mut kernel = Vec::new();
        for j in 0..m {
            let w = x[i * m + j];
            if w > 1e-12 {
                kernel.push((Value::float(lp.ys[j]), Value::float(w)));
            }
        }
        if !kernel.is_empty() {
            rows_out.push(Row {
                x: Value::float(lp.xs[i]),
                kernel: DiscreteMeasure::from_atoms(kernel).expect("positive kernel masses"),
            });
        }
    }
    let plan = Coupling::from_rows(rows_out);

    let mut value = 0.0;
    for i in 0..n {
        for j in 0..m {
            value += lp.reward[i][j] * x[i * m + j];
        }
    }

    // map row duals to (phi, psi, h): the internal problem is min sign*f, so
    // the internal dual inequality reads y_r + y_c + y_d(y-x) <= sign*f;
    // multiplying by sign gives, for Maximize (sign = -1),
    // phi+psi+h(y-x) >= f with h >= 0 on drift<=0 rows, and for Minimize
    // phi+psi+h(y-x) <= f with h <= 0.
    let mut phi: Vec<f64> = (0..n).map(|i| sign * y[i]).collect();
    let mut psi: Vec<f64> = (0..m).map(|j| sign * y[n + j]).collect();
    let mut h: Vec<f64> = if drift_rows == 0 {
        vec![0.0; n]
    } else {
        (0..drift_rows).map(|i| sign * y[n + m + i]).collect()
    };

    // gauge fixing for the martingale dual: (phi, psi, h) and
    // (phi + b·x, psi − b·y, h + b) produce identical values of
    // phi(x)+psi(y)+h(x)(y−x) on every cell, and with equal barycenters the
    // dual objective is unchanged too, so h is only defined up to an additive
    // constant. Normalize h(x_1) = 0 at the leftmost source atom.
    if lp.constraint_kind == ConstraintKind::DriftEqZero && n > 0 {
        let shift = -h[0];
        for i in 0..n {
            h[i] += shift;
            phi[i] += shift * lp.xs[i];
        }
        for j in 0..m {
            psi[j] -= shift * lp.ys[j];
        }
    }

    Ok(LpSolution {
        plan,
        value,
        dual: DualCertificate { phi, psi, h },
        status,
        uniqueness_hint: tab.unique_optimum(nm),
    })
}

/// What a certificate verification found.
#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub primal_feasible: bool,
    /// Dual inequality holds on the whole product grid.
    pub dual_feasible_grid: bool,
    /// Dual inequality restricted to the cells the caller marked (e.g. Σ).
    pub dual_feasible_sigma: bool,
    pub h_sign_ok: bool,
    pub strong_duality: bool,
    pub complementary_slackness: bool,
    /// Tight cells `φ_i + ψ_j + h_i (y_j − x_i) = f_ij` (grid indices).
    pub gamma: Vec<(usize, usize)>,
    /// Rows with strictly positive multiplier `h` (binding drift).
    pub m0: Vec<usize>,
    pub first_violation: Option<String>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.primal_feasible
            && self.dual_feasible_grid
            && self.h_sign_ok
            && self.strong_duality
            && self.complementary_slackness
    }
}

/// Verify a primal/dual pair against the instance, and extract the tight set
/// and the binding-drift rows. `in_sigma` marks grid cells belonging to Σ for
/// the separate restricted feasibility report.
pub fn verify_certificate_in(
    lp: &TransportLp,
    plan: &Coupling,
    dual: &DualCertificate,
    eps: f64,
    in_sigma: impl Fn(usize, usize) -> bool,
) -> CertificateReport {
    let n = lp.xs.len();
    let m = lp.ys.len();
    let sgn = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut first_violation: Option<String> = None;

    macro_rules! fail {
        ($flag:expr, $($arg:tt)*) => {{
            $flag = false;
            if first_violation.is_none() {
                first_violation = Some(format!($($arg)*));
            }
        }};
    }

    let plan_mass = |i: usize, j: usize| {
        plan.mass_at(&Value::float(lp.xs[i]), &Value::float(lp.ys[j]))
            .to_f64()
    };

    let mut primal_feasible = true;
    for i in 0..n {
        let sum: f64 = (0..m).map(|j| plan_mass(i, j)).sum();
        if (sum - lp.mu_w[i]).abs() > eps * (1.0 + lp.mu_w[i].abs()) {
            fail!(primal_feasible, "row sum {i} = {sum} != {}", lp.mu_w[i]);
        }
    }
    for j in 0..m {
        let sum: f64 = (0..n).map(|i| plan_mass(i, j)).sum();
        if (sum - lp.nu_w[j]).abs() > eps * (1.0 + lp.nu_w[j].abs()) {
            fail!(primal_feasible, "col sum {j} = {sum} != {}", lp.nu_w[j]);
        }
    }
    if lp.constraint_kind != ConstraintKind::None {
        for i in 0..n {
            let drift: f64 = (0..m).map(|j| plan_mass(i, j) * (lp.ys[j] - lp.xs[i])).sum();
            let bound = eps * (1.0 + lp.xs[i].abs());
            let bad = match lp.constraint_kind {
                ConstraintKind::DriftLeqZero => drift > bound,
                ConstraintKind::DriftEqZero => drift.abs() > bound,
                ConstraintKind::None => false,
            };
            if bad {
                fail!(primal_feasible, "drift row {i} = {drift}");
            }
        }
    }

    let mut dual_feasible_grid = true;
    let mut dual_feasible_sigma = true;
    let mut gamma = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let lhs = dual.phi[i] + dual.psi[j] + dual.h[i] * (lp.ys[j] - lp.xs[i]);
            let gap = sgn * (lhs - lp.reward[i][j]);
            let scale = eps * (1.0 + lp.reward[i][j].abs() + lhs.abs());
            if gap < -scale {
                dual_feasible_grid = false;
                if in_sigma(i, j) {
                    fail!(dual_feasible_sigma, "dual inequality fails at ({i},{j}): gap {gap}");
                }
            }
            if gap.abs() <= scale.max(1e-7 * (1.0 + lp.reward[i][j].abs())) {
                gamma.push((i, j));
            }
        }
    }
    if !dual_feasible_grid && first_violation.is_none() {
        first_violation = Some("dual inequality fails off Sigma".into());
    }

    let mut h_sign_ok = true;
    if lp.constraint_kind == ConstraintKind::DriftLeqZero {
        for (i, &hi) in dual.h.iter().enumerate() {
            if sgn * hi < -eps {
                fail!(h_sign_ok, "h[{i}] = {hi} has the wrong sign");
            }
        }
    }

    let primal_value: f64 = (0..n)
        .map(|i| (0..m).map(|j| plan_mass(i, j) * lp.reward[i][j]).sum::<f64>())
        .sum();
    let dual_value: f64 = dual
        .phi
        .iter()
        .zip(&lp.mu_w)
        .map(|(p, w)| p * w)
        .chain(dual.psi.iter().zip(&lp.nu_w).map(|(p, w)| p * w))
        .sum();
    let mut strong_duality = true;
    if (primal_value - dual_value).abs() > eps * (1.0 + primal_value.abs()) {
        fail!(strong_duality, "duality gap: primal {primal_value} vs dual {dual_value}");
    }

    let mut complementary_slackness = true;
    for i in 0..n {
        for j in 0..m {
            let w = plan_mass(i, j);
            if w > eps.max(1e-9) {
                let lhs = dual.phi[i] + dual.psi[j] + dual.h[i] * (lp.ys[j] - lp.xs[i]);
                if (lhs - lp.reward[i][j]).abs() > 1e-6 * (1.0 + lp.reward[i][j].abs()) {
                    fail!(complementary_slackness, "cell ({i},{j}) carries mass but is not tight");
                }
            }
        }
    }
    if lp.constraint_kind == ConstraintKind::DriftLeqZero {
        for i in 0..n {
            if sgn * dual.h[i] > eps {
                let drift: f64 = (0..m).map(|j| plan_mass(i, j) * (lp.ys[j] - lp.xs[i])).sum();
                if drift.abs() > 1e-6 * (1.0 + lp.xs[i].abs()) {
                    fail!(complementary_slackness, "h[{i}] > 0 but drift {drift} is slack");
                }
            }
        }
    }

    let m0 = (0..n).filter(|&i| sgn * dual.h[i] > eps).collect();

    CertificateReport {
        primal_feasible,
        dual_feasible_grid,
        dual_feasible_sigma,
        h_sign_ok,
        strong_duality,
        complementary_slackness,
        gamma,
        m0,
        first_violation,
    }
}

/// [`verify_certificate_in`] with Σ taken to be the whole grid.
pub fn verify_certificate(
    lp: &TransportLp,
    plan: &Coupling,
    dual: &DualCertificate,
    eps: f64,
) -> CertificateReport {
    verify_certificate_in(lp, plan, dual, eps, |_, _| true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{mu_star, nu_star};

    #[test]
    fn scalar_bound_lp() {
        // max x s.t. x <= 1  ==  min -x
        let out = solve(&LpProblem {
            objective: vec![-1.0],
            a_ub: vec![vec![1.0]],
            b_ub: vec![1.0],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.x[0] - 1.0).abs() < 1e-9);
        // dual of the <= row certifies the bound
        assert!((out.duals_ub[0] - (-1.0)).abs() < 1e-9);
    }

    #[test]
    fn beale_cycling_instance_terminates() {
        // classic cycling-prone instance; Bland's rule must reach -1/20
        let out = solve(&LpProblem {
            objective: vec![-0.75, 150.0, -0.02, 6.0],
            a_ub: vec![
                vec![0.25, -60.0, -1.0 / 25.0, 9.0],
                vec![0.5, -90.0, -1.0 / 50.0, 3.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b_ub: vec![0.0, 0.0, 1.0],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective - (-0.05)).abs() < 1e-9, "objective {}", out.objective);
    }

    #[test]
    fn infeasible_and_unbounded_are_detected() {
        let inf = solve(&LpProblem {
            objective: vec![1.0],
            a_eq: vec![vec![1.0], vec![1.0]],
            b_eq: vec![1.0, 2.0],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(inf.status, LpStatus::Infeasible);

        let unb = solve(&LpProblem {
            objective: vec![-1.0],
            a_ub: vec![vec![-1.0]],
            b_ub: vec![0.0],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(unb.status, LpStatus::Unbounded);
    }

    /// Exhaustive vertex check for a 2x2 transportation polytope: one free
    /// cell parameterizes all plans, so the extremes are the two vertices.
    #[test]
    fn two_by_two_matches_vertex_enumeration() {
        let mu = DiscreteMeasure::from_atoms(vec![
            (Value::int(0), Value::rat(2, 5)),
            (Value::int(1), Value::rat(3, 5)),
        ])
        .unwrap();
        let nu = DiscreteMeasure::from_atoms(vec![
            (Value::int(-1), Value::rat(1, 2)),
            (Value::int(2), Value::rat(1, 2)),
        ])
        .unwrap();
        let f = |x: f64, y: f64| if x == y { 1.0 } else { 0.0 } + x * y;
        let lp = TransportLp::new(&mu, &nu, f, ConstraintKind::None, Sense::Maximize).unwrap();
        let sol = solve_transport(&lp).unwrap();

        let mut best = f64::NEG_INFINITY;
        for p00 in [0.0, 0.4] {
            let p01 = 0.4 - p00;
            let p10 = 0.5 - p00;
            let p11 = 0.5 - p01;
            if p01 < -1e-12 || p10 < -1e-12 || p11 < -1e-12 {
                continue;
            }
            let v = p00 * f(0.0, -1.0) + p01 * f(0.0, 2.0) + p10 * f(1.0, -1.0) + p11 * f(1.0, 2.0);
            best = best.max(v);
        }
        assert!((sol.value - best).abs() < 1e-9);
        let report = verify_certificate(&lp, &sol.plan, &sol.dual, 1e-9);
        assert!(report.passed(), "{:?}", report.first_violation);
    }

    #[test]
    fn reference_pair_supermartingale_lp() {
        let f = |x: f64, y: f64| x.exp() * y.exp();
        let lp =
            TransportLp::new(&mu_star(), &nu_star(), f, ConstraintKind::DriftLeqZero, Sense::Maximize)
                .unwrap();
        let sol = solve_transport(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let expect = [
            (-1.0, -4.0, 5.0 / 18.0),
            (-1.0, -2.5, 1.0 / 18.0),
            (0.0, -2.5, 5.0 / 18.0),
            (0.0, 2.0, 1.0 / 18.0),
            (1.0, -4.0, 1.0 / 18.0),
            (1.0, 2.0, 5.0 / 18.0),
        ];
        for (x, y, w) in expect {
            let got = sol.plan.mass_at(&Value::float(x), &Value::float(y)).to_f64();
            assert!((got - w).abs() < 1e-9, "plan({x},{y}) = {got}, want {w}");
        }
        let report = verify_certificate(&lp, &sol.plan, &sol.dual, 1e-9);
        assert!(report.passed(), "{:?}", report.first_violation);
        assert!(sol.uniqueness_hint);
    }

    #[test]
    fn perturbed_certificate_fails() {
        let f = |x: f64, y: f64| x.exp() * y.exp();
        let lp =
            TransportLp::new(&mu_star(), &nu_star(), f, ConstraintKind::DriftLeqZero, Sense::Maximize)
                .unwrap();
        let sol = solve_transport(&lp).unwrap();
        let mut dual = sol.dual.clone();
        dual.psi[0] += 1.0;
        let report = verify_certificate(&lp, &sol.plan, &dual, 1e-9);
        assert!(!report.passed());
        assert!(!report.strong_duality);
    }

    #[test]
    fn constraint_monotonicity_of_values() {
        let f = |x: f64, y: f64| x.exp() * y.exp();
        let value = |kind| {
            let lp = TransportLp::new(&mu_star(), &nu_star(), f, kind, Sense::Maximize).unwrap();
            solve_transport(&lp).map(|s| s.value)
        };
        let none = value(ConstraintKind::None).unwrap();
        let sm = value(ConstraintKind::DriftLeqZero).unwrap();
        assert!(sm <= none + 1e-9);
        // martingale LP on this proper pair is infeasible (barycenters differ)
        assert!(matches!(value(ConstraintKind::DriftEqZero), Err(LpError::Infeasible)));
    }

    #[test]
    fn martingale_pair_gets_equal_sm_and_mg_values() {
        let mu = DiscreteMeasure::dirac(Value::int(0), Value::one());
        let nu = DiscreteMeasure::from_atoms(vec![
            (Value::int(-1), Value::rat(1, 2)),
            (Value::int(1), Value::rat(1, 2)),
        ])
        .unwrap();
        let f = |x: f64, y: f64| (x - y).abs();
        let v_sm = solve_transport(
            &TransportLp::new(&mu, &nu, f, ConstraintKind::DriftLeqZero, Sense::Maximize).unwrap(),
        )
        .unwrap()
        .value;
        let v_mg = solve_transport(
            &TransportLp::new(&mu, &nu, f, ConstraintKind::DriftEqZero, Sense::Maximize).unwrap(),
        )
        .unwrap()
        .value;
        assert!((v_sm - v_mg).abs() < 1e-9);
    }

    #[test]
    fn negative_h_certificate_still_verifies_on_martingale_instance() {
        // bary-equal truncation in the style of the duality counterexample:
        // mu on 1..=N, nu spreads each atom to {i-1, i, i+1}/3; reward 1_{x!=y}
        let depth = 6i64;
        let c: Vec<f64> = (1..=depth).map(|i| 1.0 / (i as f64).powi(3)).collect();
        let mut mu_atoms = Vec::new();
        let mut nu_atoms = Vec::new();
        for (idx, &ci) in c.iter().enumerate() {
            let i = idx as i64 + 1;
            mu_atoms.push((Value::int(i), Value::float(ci)));
            for d in [-1i64, 0, 1] {
                nu_atoms.push((Value::int(i + d), Value::float(ci / 3.0)));
            }
        }
        let mu = DiscreteMeasure::from_atoms(mu_atoms).unwrap();
        let nu = DiscreteMeasure::from_atoms(nu_atoms).unwrap();
        let f = |x: f64, y: f64| if (x - y).abs() > 1e-12 { 1.0 } else { 0.0 };
        let lp = TransportLp::new(&mu, &nu, f, ConstraintKind::DriftEqZero, Sense::Maximize).unwrap();
        let sol = solve_transport(&lp).unwrap();
        let report = verify_certificate(&lp, &sol.plan, &sol.dual, 1e-7);
        assert!(report.passed(), "{:?}", report.first_violation);
        assert!(
            sol.dual.h.iter().any(|&h| h < -1e-9),
            "expected a negative multiplier, got {:?}",
            sol.dual.h
        );
    }
}
