//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! The game solvers only ever build tiny programs (a few hundred columns at
//! most), so the tableau is kept dense and pivots are done in place. Bland's
//! rule makes every run terminate and, for a fixed input, pick the same
//! optimal vertex every time.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit reached")]
    IterationLimit,
    #[error("constraint has the wrong number of coefficients")]
    Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
struct Constraint {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `maximize c·x` subject to linear constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self::maximize(objective.into_iter().map(|c| -c).collect())
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(
        &mut self,
        coeffs: Vec<f64>,
        relation: Relation,
        rhs: f64,
    ) -> Result<&mut Self, LpError> {
        if coeffs.len() != self.objective.len() {
            return Err(LpError::Dimension);
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        Ok(self)
    }

    /// Solves the program. The returned objective is always in the
    /// maximization sense of the stored objective.
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let mut tableau = Tableau::build(self);
        tableau.phase_one()?;
        tableau.phase_two(&self.objective)?;
        let x = tableau.primal(self.num_vars());
        let objective = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Original,
    Slack,
    Artificial,
}

struct Tableau {
    // m rows of (ncols + 1) entries, the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    // Reduced-cost row, same layout.
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let mut slack_count = 0;
        let mut art_count = 0;
        for c in &lp.constraints {
            let rel = normalized_relation(c);
            match rel {
                Relation::Le => slack_count += 1,
                Relation::Ge => {
                    slack_count += 1;
                    art_count += 1;
                }
                Relation::Eq => art_count += 1,
            }
        }
        let ncols = n + slack_count + art_count;
        let mut kinds = vec![ColumnKind::Original; n];
        kinds.extend(std::iter::repeat_n(ColumnKind::Slack, slack_count));
        kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, art_count));

        let mut rows = Vec::with_capacity(lp.constraints.len());
        let mut basis = Vec::with_capacity(lp.constraints.len());
        let mut next_slack = n;
        let mut next_art = n + slack_count;
        for c in &lp.constraints {
            let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; ncols + 1];
            for (dst, &a) in row.iter_mut().zip(&c.coeffs) {
                *dst = sign * a;
            }
            row[ncols] = sign * c.rhs;
            match normalized_relation(c) {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis.push(next_art);
                    next_art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            obj: vec![0.0; ncols + 1],
            basis,
            kinds,
        }
    }

    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn set_objective(&mut self, cost: &[f64]) {
        let ncols = self.ncols();
        let mut obj = vec![0.0; ncols + 1];
        for (j, o) in obj.iter_mut().enumerate().take(ncols) {
            *o = -cost[j];
        }
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (o, &r) in obj.iter_mut().zip(row) {
                    *o += cb * r;
                }
            }
        }
        self.obj = obj;
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        if !self.kinds.contains(&ColumnKind::Artificial) {
            return Ok(());
        }
        let cost: Vec<f64> = self
            .kinds
            .iter()
            .map(|k| {
                if *k == ColumnKind::Artificial {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        self.set_objective(&cost);
        self.iterate(true)?;
        let infeasibility = -self.obj[self.ncols()];
        let scale = 1.0
            + self
                .rows
                .iter()
                .map(|r| r[r.len() - 1].abs())
                .fold(0.0, f64::max);
        if infeasibility > FEASIBILITY_EPS * scale {
            return Err(LpError::Infeasible);
        }
        self.expel_artificials();
        Ok(())
    }

    // Pivots zero-level artificials out of the basis; rows where that is
    // impossible are linearly dependent and get dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.kinds[self.basis[i]] != ColumnKind::Artificial {
                i += 1;
                continue;
            }
            let col = (0..self.ncols())
                .find(|&j| self.kinds[j] != ColumnKind::Artificial && self.rows[i][j].abs() > 1e-9);
            match col {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }

    fn phase_two(&mut self, objective: &[f64]) -> Result<(), LpError> {
        let mut cost = vec![0.0; self.ncols()];
        cost[..objective.len()].copy_from_slice(objective);
        self.set_objective(&cost);
        self.iterate(false)
    }

    fn iterate(&mut self, allow_artificial: bool) -> Result<(), LpError> {
        let ncols = self.ncols();
        for _ in 0..MAX_ITERATIONS {
            // Bland: lowest-index improving column.
            let entering = (0..ncols).find(|&j| {
                (allow_artificial || self.kinds[j] != ColumnKind::Artificial)
                    && self.obj[j] < -PIVOT_EPS
            });
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[col];
                if a > PIVOT_EPS {
                    let ratio = row[ncols] / a;
                    leaving = match leaving {
                        None => Some((i, ratio)),
                        Some((best, r)) => {
                            if ratio < r - 1e-14
                                || (ratio <= r + 1e-14 && self.basis[i] < self.basis[best])
                            {
                                Some((i, ratio))
                            } else {
                                Some((best, r))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(LpError::IterationLimit)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * pv;
                }
                r[col] = 0.0;
            }
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for (v, &pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let ncols = self.ncols();
        let mut x = vec![0.0; n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[ncols].max(0.0);
            }
        }
        x
    }
}

fn normalized_relation(c: &Constraint) -> Relation {
    if c.rhs < 0.0 {
        match c.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        }
    } else {
        c.relation
    }
}
