//! Deterministic dense linear-program solver.
//!
//! Problems have the form
//!
//! ```text
//! minimize    c^T x
//! subject to  A_eq x  = b_eq
//!             A_ub x <= b_ub
//!             x >= lb          (lb_j may be -inf)
//! ```
//!
//! and are solved by a two-phase revised simplex method with Bland's rule.
//! The basis inverse is kept explicitly, updated by rank-one pivots and
//! refactored periodically. Duals follow the Lagrangian
//! `c^T x + u^T (A_ub x - b_ub) + y^T (A_eq x - b_eq) - r^T (x - lb)`,
//! so optimal multipliers satisfy `u >= 0`, `r >= 0` (zero on free variables)
//! and `c + A_ub^T u + A_eq^T y - r = 0`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Reduced costs above `-OPT_TOL` count as non-negative.
const OPT_TOL: f64 = 1e-11;
/// Smallest pivot element accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-9;
/// Phase-one objective above this means infeasible.
const FEAS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 32;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub eq_matrix: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_matrix: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
    /// Per-variable lower bound; `f64::NEG_INFINITY` marks a free variable.
    pub lower_bounds: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    /// Multipliers `y` of the equality rows.
    pub eq_duals: Vec<f64>,
    /// Multipliers `u >= 0` of the inequality rows.
    pub ub_duals: Vec<f64>,
    /// Bound multipliers `r`.
    pub reduced_costs: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

/// Optimality residuals of a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
}

impl Certificate {
    pub fn max(&self) -> f64 {
        self.primal_residual.max(self.dual_residual).max(self.gap)
    }
}

impl LpProblem {
    /// Problem over `nvars` non-negative variables with no constraints.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            lower_bounds: vec![0.0; n],
            ..Self::default()
        }
    }

    pub fn nvars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ub(&mut self, row: Vec<f64>, rhs: f64) {
        self.ub_matrix.push(row);
        self.ub_rhs.push(rhs);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nvars();
        let bad = |msg: String| Err(Error::Lp(msg));
        if self.lower_bounds.len() != n {
            return bad(format!("{} bounds for {n} variables", self.lower_bounds.len()));
        }
        if self.eq_matrix.len() != self.eq_rhs.len() || self.ub_matrix.len() != self.ub_rhs.len() {
            return bad("row count does not match rhs length".into());
        }
        for row in self.eq_matrix.iter().chain(&self.ub_matrix) {
            if row.len() != n {
                return bad(format!("row of length {} for {n} variables", row.len()));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return bad("non-finite constraint coefficient".into());
            }
        }
        let finite = self.objective.iter().chain(&self.eq_rhs).chain(&self.ub_rhs);
        if finite.into_iter().any(|v| !v.is_finite()) {
            return bad("non-finite objective or rhs".into());
        }
        if self.lower_bounds.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return bad("lower bound must be finite or -inf".into());
        }
        Ok(())
    }

    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Bound multipliers implied by stationarity: `r = c + A_ub^T u + A_eq^T y`.
    pub fn implied_reduced_costs(&self, ub_duals: &[f64], eq_duals: &[f64]) -> Vec<f64> {
        let mut r = self.objective.clone();
        for (row, &u) in self.ub_matrix.iter().zip(ub_duals) {
            for (rj, a) in r.iter_mut().zip(row) {
                *rj += a * u;
            }
        }
        for (row, &y) in self.eq_matrix.iter().zip(eq_duals) {
            for (rj, a) in r.iter_mut().zip(row) {
                *rj += a * y;
            }
        }
        r
    }

    /// Lagrangian dual objective `-b_ub^T u - b_eq^T y + lb^T r` with `r`
    /// implied by stationarity. A lower bound on the primal optimum whenever
    /// `(u, y)` is dual feasible.
    pub fn dual_objective(&self, ub_duals: &[f64], eq_duals: &[f64]) -> f64 {
        let r = self.implied_reduced_costs(ub_duals, eq_duals);
        let bound_term: f64 = self
            .lower_bounds
            .iter()
            .zip(&r)
            .filter(|(lb, _)| lb.is_finite())
            .map(|(lb, rj)| lb * rj)
            .sum();
        -dot(&self.ub_rhs, ub_duals) - dot(&self.eq_rhs, eq_duals) + bound_term
    }

    pub fn primal_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, x) - b).abs());
        }
        for (row, b) in self.ub_matrix.iter().zip(&self.ub_rhs) {
            worst = worst.max(dot(row, x) - b);
        }
        for (xj, lb) in x.iter().zip(&self.lower_bounds) {
            worst = worst.max(lb - xj);
        }
        worst.max(0.0)
    }

    pub fn dual_residual(&self, ub_duals: &[f64], eq_duals: &[f64]) -> f64 {
        let r = self.implied_reduced_costs(ub_duals, eq_duals);
        let mut worst = ub_duals.iter().fold(0.0f64, |m, &u| m.max(-u));
        for (rj, lb) in r.iter().zip(&self.lower_bounds) {
            worst = worst.max(if lb.is_finite() { -rj } else { rj.abs() });
        }
        worst
    }

    /// Plain-text dump for offline cross-checking.
    pub fn to_text(&self) -> String {
        let fmt_row = |row: &[f64]| row.iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(" ");
        let mut s = String::new();
        let _ = writeln!(s, "# minimize c^T x; {} variables", self.nvars());
        let _ = writeln!(s, "objective {}", fmt_row(&self.objective));
        for (row, b) in self.eq_matrix.iter().zip(&self.eq_rhs) {
            let _ = writeln!(s, "eq {} = {b:.17e}", fmt_row(row));
        }
        for (row, b) in self.ub_matrix.iter().zip(&self.ub_rhs) {
            let _ = writeln!(s, "ub {} <= {b:.17e}", fmt_row(row));
        }
        let _ = writeln!(s, "lower {}", fmt_row(&self.lower_bounds));
        s
    }
}

impl LpSolution {
    pub fn certificate(&self, problem: &LpProblem) -> Certificate {
        let primal = problem.primal_objective(&self.primal);
        let dual = problem.dual_objective(&self.ub_duals, &self.eq_duals);
        Certificate {
            primal_residual: problem.primal_residual(&self.primal),
            dual_residual: problem.dual_residual(&self.ub_duals, &self.eq_duals),
            gap: (primal - dual).abs(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Origin of a standard-form column.
#[derive(Clone, Copy, Debug)]
enum ColumnKind {
    /// `x_j - lb_j`.
    Shifted(usize),
    /// Positive part of a free variable.
    FreePos(usize),
    /// Negative part of a free variable.
    FreeNeg(usize),
    Slack,
    Artificial,
}

/// Standard form `min c^T z, A z = b, z >= 0` with `b >= 0`.
struct StandardForm {
    m: usize,
    columns: Vec<Vec<(usize, f64)>>,
    kinds: Vec<ColumnKind>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
    /// `+1` or `-1`: standard row = sign * (original row with slack).
    row_sign: Vec<f64>,
    initial_basis: Vec<usize>,
    n_eq: usize,
}

impl StandardForm {
    fn build(p: &LpProblem) -> Self {
        let n_eq = p.eq_matrix.len();
        let n_ub = p.ub_matrix.len();
        let m = n_eq + n_ub;
        let orig_rows: Vec<&Vec<f64>> = p.eq_matrix.iter().chain(&p.ub_matrix).collect();
        let orig_rhs: Vec<f64> = p.eq_rhs.iter().chain(&p.ub_rhs).copied().collect();

        // shift finite lower bounds into the rhs
        let mut rhs = orig_rhs;
        for (i, row) in orig_rows.iter().enumerate() {
            for (j, lb) in p.lower_bounds.iter().enumerate() {
                if lb.is_finite() && *lb != 0.0 {
                    rhs[i] -= row[j] * lb;
                }
            }
        }
        let row_sign: Vec<f64> = rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
        for (b, s) in rhs.iter_mut().zip(&row_sign) {
            *b *= s;
        }

        let mut columns = Vec::new();
        let mut kinds = Vec::new();
        let mut cost = Vec::new();
        let column_of = |j: usize, neg: bool| -> Vec<(usize, f64)> {
            orig_rows
                .iter()
                .enumerate()
                .filter(|(_, row)| row[j] != 0.0)
                .map(|(i, row)| {
                    let v = row[j] * row_sign[i];
                    (i, if neg { -v } else { v })
                })
                .collect()
        };
        for j in 0..p.nvars() {
            if p.lower_bounds[j].is_finite() {
                columns.push(column_of(j, false));
                kinds.push(ColumnKind::Shifted(j));
                cost.push(p.objective[j]);
            } else {
                columns.push(column_of(j, false));
                kinds.push(ColumnKind::FreePos(j));
                cost.push(p.objective[j]);
                columns.push(column_of(j, true));
                kinds.push(ColumnKind::FreeNeg(j));
                cost.push(-p.objective[j]);
            }
        }
        let mut initial_basis = vec![usize::MAX; m];
        for i in n_eq..m {
            initial_basis[i] = columns.len();
            columns.push(vec![(i, row_sign[i])]);
            kinds.push(ColumnKind::Slack);
            cost.push(0.0);
        }
        for i in 0..m {
            // a slack with coefficient +1 can start in the basis
            if i >= n_eq && row_sign[i] > 0.0 {
                continue;
            }
            initial_basis[i] = columns.len();
            columns.push(vec![(i, 1.0)]);
            kinds.push(ColumnKind::Artificial);
            cost.push(0.0);
        }
        Self {
            m,
            columns,
            kinds,
            cost,
            rhs,
            row_sign,
            initial_basis,
            n_eq,
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        matches!(self.kinds[j], ColumnKind::Artificial)
    }
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

/// Simplex state over a standard form.
struct Tableau<'a> {
    sf: &'a StandardForm,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
}

impl<'a> Tableau<'a> {
    fn new(sf: &'a StandardForm) -> Result<Self> {
        let mut in_basis = vec![false; sf.columns.len()];
        for &b in &sf.initial_basis {
            in_basis[b] = true;
        }
        let mut t = Self {
            sf,
            basis: sf.initial_basis.clone(),
            in_basis,
            binv: vec![0.0; sf.m * sf.m],
            xb: vec![0.0; sf.m],
            iterations: 0,
            since_refactor: 0,
        };
        t.refactor()?;
        Ok(t)
    }

    fn m(&self) -> usize {
        self.sf.m
    }

    /// Recomputes `B^{-1}` by Gauss-Jordan elimination with partial pivoting
    /// and `x_B = B^{-1} b`.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        for (k, &col) in self.basis.iter().enumerate() {
            for &(i, v) in &self.sf.columns[col] {
                a[i * m + k] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()).then(y.cmp(&x)))
                .expect("non-empty");
            if a[piv * m + c].abs() < 1e-13 {
                return Err(Error::Lp("singular basis".into()));
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let d = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = a[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.sf.rhs[k]).sum();
        }
        self.since_refactor = 0;
        Ok(())
    }

    /// `pi = c_B^T B^{-1}`.
    fn prices(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut pi = vec![0.0; m];
        for (k, &col) in self.basis.iter().enumerate() {
            let cb = cost[col];
            if cb != 0.0 {
                for (i, p) in pi.iter_mut().enumerate() {
                    *p += cb * self.binv[k * m + i];
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, cost: &[f64], pi: &[f64], j: usize) -> f64 {
        cost[j] - self.sf.columns[j].iter().map(|&(i, v)| pi[i] * v).sum::<f64>()
    }

    /// `B^{-1} A_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m();
        let mut u = vec![0.0; m];
        for &(i, v) in &self.sf.columns[j] {
            for (r, ur) in u.iter_mut().enumerate() {
                *ur += self.binv[r * m + i] * v;
            }
        }
        u
    }

    fn pivot(&mut self, row: usize, entering: usize, u: &[f64]) -> Result<()> {
        let m = self.m();
        let piv = u[row];
        let theta = self.xb[row] / piv;
        for (i, (x, ui)) in self.xb.iter_mut().zip(u).enumerate() {
            if i != row {
                *x -= theta * ui;
                if *x < 0.0 && *x > -1e-12 {
                    *x = 0.0;
                }
            }
        }
        self.xb[row] = theta;
        for k in 0..m {
            self.binv[row * m + k] /= piv;
        }
        for (i, &f) in u.iter().enumerate() {
            if i == row || f == 0.0 {
                continue;
            }
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[row * m + k];
            }
        }
        self.in_basis[self.basis[row]] = false;
        self.basis[row] = entering;
        self.in_basis[entering] = true;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor()?;
        }
        if self.iterations > MAX_ITERATIONS {
            return Err(Error::Lp("iteration limit reached".into()));
        }
        Ok(())
    }

    /// Runs Bland's-rule simplex iterations for `cost`.
    fn run(&mut self, cost: &[f64]) -> Result<PhaseOutcome> {
        loop {
            let pi = self.prices(cost);
            let entering = (0..self.sf.columns.len()).find(|&j| {
                !self.in_basis[j] && !self.sf.is_artificial(j) && self.reduced_cost(cost, &pi, j) < -OPT_TOL
            });
            let Some(j) = entering else {
                if self.since_refactor == 0 {
                    return Ok(PhaseOutcome::Optimal);
                }
                // confirm optimality on a fresh factorization
                self.refactor()?;
                continue;
            };
            let u = self.ftran(j);
            let mut best: Option<(usize, f64)> = None;
            for (i, &ui) in u.iter().enumerate() {
                if ui <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.xb[i].max(0.0) / ui;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie {
                            Some((i, ratio))
                        } else if tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio.min(br)))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Ok(PhaseOutcome::Unbounded),
                Some((row, _)) => self.pivot(row, j, &u)?,
            }
        }
    }

    /// Pivots basic artificials out where a non-artificial column can
    /// replace them; the rest sit on redundant rows at level zero.
    fn expel_artificials(&mut self) -> Result<()> {
        for row in 0..self.m() {
            if !self.sf.is_artificial(self.basis[row]) {
                continue;
            }
            let m = self.m();
            let candidate = (0..self.sf.columns.len()).find(|&j| {
                !self.in_basis[j]
                    && !self.sf.is_artificial(j)
                    && self.sf.columns[j]
                        .iter()
                        .map(|&(i, v)| self.binv[row * m + i] * v)
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(j) = candidate {
                let u = self.ftran(j);
                self.pivot(row, j, &u)?;
            }
        }
        self.refactor()
    }

    fn primal_std(&self) -> Vec<f64> {
        let mut z = vec![0.0; self.sf.columns.len()];
        for (k, &col) in self.basis.iter().enumerate() {
            z[col] = self.xb[k].max(0.0);
        }
        z
    }
}

/// Solves the problem. Infeasible and unbounded problems are reported through
/// [`LpStatus`]; malformed input or numerical breakdown is an error.
pub fn solve(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    let sf = StandardForm::build(problem);
    let n_cols = sf.columns.len();
    let mut tab = Tableau::new(&sf)?;

    let phase1_cost: Vec<f64> = (0..n_cols)
        .map(|j| if sf.is_artificial(j) { 1.0 } else { 0.0 })
        .collect();
    let has_artificials = sf.initial_basis.iter().any(|&b| sf.is_artificial(b));
    if has_artificials {
        tab.run(&phase1_cost)?;
        let infeas: f64 = tab
            .basis
            .iter()
            .zip(&tab.xb)
            .filter(|(&b, _)| sf.is_artificial(b))
            .map(|(_, &x)| x)
            .sum();
        let scale = 1.0 + sf.rhs.iter().fold(0.0f64, |m, b| m.max(b.abs()));
        if infeas > FEAS_TOL * scale {
            return Ok(empty_solution(problem, LpStatus::Infeasible, tab.iterations));
        }
        tab.expel_artificials()?;
    }

    if let PhaseOutcome::Unbounded = tab.run(&sf.cost)? {
        return Ok(empty_solution(problem, LpStatus::Unbounded, tab.iterations));
    }

    let z = tab.primal_std();
    let mut primal = problem
        .lower_bounds
        .iter()
        .map(|lb| if lb.is_finite() { *lb } else { 0.0 })
        .collect::<Vec<_>>();
    for (j, kind) in sf.kinds.iter().enumerate() {
        match *kind {
            ColumnKind::Shifted(v) | ColumnKind::FreePos(v) => primal[v] += z[j],
            ColumnKind::FreeNeg(v) => primal[v] -= z[j],
            ColumnKind::Slack | ColumnKind::Artificial => {}
        }
    }
    let pi = tab.prices(&sf.cost);
    let multipliers: Vec<f64> = pi.iter().zip(&sf.row_sign).map(|(p, s)| -p * s).collect();
    let eq_duals = multipliers[..sf.n_eq].to_vec();
    let ub_duals = multipliers[sf.n_eq..].to_vec();
    let reduced_costs = problem.implied_reduced_costs(&ub_duals, &eq_duals);
    let objective_value = problem.primal_objective(&primal);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        eq_duals,
        ub_duals,
        reduced_costs,
        objective_value,
        iterations: tab.iterations,
    })
}

fn empty_solution(p: &LpProblem, status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        primal: vec![],
        eq_duals: vec![0.0; p.eq_matrix.len()],
        ub_duals: vec![0.0; p.ub_matrix.len()],
        reduced_costs: vec![],
        objective_value: match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::INFINITY,
        },
        iterations,
    }
}
