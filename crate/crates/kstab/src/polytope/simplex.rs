//! Exact rational linear programming by the simplex method.
//!
//! Problems here are tiny (a handful of variables, tens of constraints), so
//! a dense two-phase simplex with Bland's rule is exact, terminating, and
//! fast enough.

use crate::exactmath::Rat;

/// Outcome of `maximize`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

/// Maximizes `c·x` over `{x free : A x <= b}`.
pub fn maximize(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> LpOutcome {
    Tableau::build(c, a, b).solve()
}

/// Whether `{x : A x <= b}` is nonempty.
pub fn feasible(a: &[Vec<Rat>], b: &[Rat]) -> bool {
    let zero = vec![Rat::zero(); a.first().map_or(0, Vec::len)];
    !matches!(maximize(&zero, a, b), LpOutcome::Infeasible)
}

/// Whether `{lambda >= 0 : G lambda = target}` is nonempty; returns a
/// witness when it is. Columns of `g` are the generators.
pub fn nonneg_combination(g: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let dim = target.len();
    let ngen = g.len();
    // Encode as A lambda <= b with lambda >= 0 via inequality pairs.
    let mut a = Vec::new();
    let mut b = Vec::new();
    for row in 0..dim {
        let pos: Vec<Rat> = (0..ngen).map(|j| g[j][row].clone()).collect();
        let neg: Vec<Rat> = pos.iter().map(|v| -v).collect();
        a.push(pos);
        b.push(target[row].clone());
        a.push(neg);
        b.push(-&target[row]);
    }
    for j in 0..ngen {
        let mut row = vec![Rat::zero(); ngen];
        row[j] = Rat::from_int(-1);
        a.push(row);
        b.push(Rat::zero());
    }
    let zero = vec![Rat::zero(); ngen];
    match maximize(&zero, &a, &b) {
        LpOutcome::Optimal { point, .. } => Some(point),
        _ => None,
    }
}

// Dense tableau in the standard form: maximize c·y, M y = rhs, y >= 0,
// where y stacks x+, x-, slacks, and (in phase one) artificials.
struct Tableau {
    nvars: usize,
    nslack: usize,
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    objective: Vec<Rat>,
}

impl Tableau {
    fn build(c: &[Rat], a: &[Vec<Rat>], b: &[Rat]) -> Tableau {
        let n = c.len();
        let m = a.len();
        let width = 2 * n + m;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, row) in a.iter().enumerate() {
            let mut r: Vec<Rat> = Vec::with_capacity(width);
            for v in row {
                r.push(v.clone());
            }
            for v in row {
                r.push(-v);
            }
            for j in 0..m {
                r.push(if j == i { Rat::one() } else { Rat::zero() });
            }
            if b[i].is_negative() {
                for v in r.iter_mut() {
                    *v = -&*v;
                }
                rhs.push(-&b[i]);
            } else {
                rhs.push(b[i].clone());
            }
            rows.push(r);
        }
        let mut objective: Vec<Rat> = Vec::with_capacity(width);
        for v in c {
            objective.push(v.clone());
        }
        for v in c {
            objective.push(-v);
        }
        objective.extend(std::iter::repeat_with(Rat::zero).take(m));
        Tableau {
            nvars: n,
            nslack: m,
            rows,
            rhs,
            basis: vec![usize::MAX; m],
            objective,
        }
    }

    fn solve(mut self) -> LpOutcome {
        let m = self.rows.len();
        let width = 2 * self.nvars + self.nslack;

        // Phase one: drive artificial variables out of the basis.
        for (i, row) in self.rows.iter_mut().enumerate() {
            for j in 0..m {
                row.push(if j == i { Rat::one() } else { Rat::zero() });
            }
            self.basis[i] = width + i;
        }
        let phase1_cost: Vec<Rat> = (0..width + m)
            .map(|j| if j >= width { Rat::from_int(-1) } else { Rat::zero() })
            .collect();
        match self.run(&phase1_cost, width + m) {
            SimplexEnd::Unbounded => return LpOutcome::Infeasible,
            SimplexEnd::Optimal(value) => {
                if value.is_negative() {
                    return LpOutcome::Infeasible;
                }
            }
        }
        // Pivot any remaining artificial out of the basis if possible.
        for i in 0..m {
            if self.basis[i] >= width {
                if let Some(col) = (0..width).find(|&j| !self.rows[i][j].is_zero()) {
                    self.pivot(i, col);
                } else {
                    // Redundant row.
                    self.basis[i] = usize::MAX;
                }
            }
        }
        for row in self.rows.iter_mut() {
            row.truncate(width);
        }

        let cost = self.objective.clone();
        match self.run(&cost, width) {
            SimplexEnd::Unbounded => LpOutcome::Unbounded,
            SimplexEnd::Optimal(value) => {
                let mut x = vec![Rat::zero(); self.nvars];
                for (i, &bv) in self.basis.iter().enumerate() {
                    if bv == usize::MAX {
                        continue;
                    }
                    if bv < self.nvars {
                        x[bv] += &self.rhs[i];
                    } else if bv < 2 * self.nvars {
                        x[bv - self.nvars] -= &self.rhs[i];
                    }
                }
                LpOutcome::Optimal { value, point: x }
            }
        }
    }

    fn run(&mut self, cost: &[Rat], width: usize) -> SimplexEnd {
        loop {
            // Reduced costs with respect to the current basis.
            let mut y = vec![Rat::zero(); self.rows.len()];
            for (i, &bv) in self.basis.iter().enumerate() {
                if bv != usize::MAX {
                    y[i] = cost[bv].clone();
                }
            }
            let mut entering = None;
            for j in 0..width {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut red = cost[j].clone();
                for (i, row) in self.rows.iter().enumerate() {
                    if !y[i].is_zero() && !row[j].is_zero() {
                        let t = &y[i] * &row[j];
                        red -= &t;
                    }
                }
                if red.is_positive() {
                    entering = Some(j); // Bland: first improving column
                    break;
                }
            }
            let Some(col) = entering else {
                let mut value = Rat::zero();
                for (i, &bv) in self.basis.iter().enumerate() {
                    if bv != usize::MAX && !cost[bv].is_zero() {
                        value += &cost[bv] * &self.rhs[i];
                    }
                }
                return SimplexEnd::Optimal(value);
            };
            // Ratio test, Bland's rule on ties.
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = self.rhs[i].checked_div(&row[col]).expect("positive pivot");
                    let better = match &leave {
                        None => true,
                        Some((li, best)) => {
                            ratio < *best || (ratio == *best && self.basis[i] < self.basis[*li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return SimplexEnd::Unbounded;
            };
            self.pivot(row, col);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip().expect("pivot nonzero");
        for v in self.rows[row].iter_mut() {
            *v = &*v * &inv;
        }
        self.rhs[row] = &self.rhs[row] * &inv;
        for i in 0..self.rows.len() {
            if i == row || self.rows[i][col].is_zero() {
                continue;
            }
            let factor = self.rows[i][col].clone();
            for j in 0..self.rows[i].len() {
                let t = &factor * &self.rows[row][j];
                self.rows[i][j] -= &t;
            }
            let t = &factor * &self.rhs[row];
            self.rhs[i] -= &t;
        }
        self.basis[row] = col;
    }
}

enum SimplexEnd {
    Optimal(Rat),
    Unbounded,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn simple_max() {
        // max x + y st x <= 2, y <= 3, x + y <= 4
        let out = maximize(
            &[r(1), r(1)],
            &[vec![r(1), r(0)], vec![r(0), r(1)], vec![r(1), r(1)]],
            &[r(2), r(3), r(4)],
        );
        match out {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // x <= -1, -x <= -2 i.e. x >= 2: empty
        let out = maximize(&[r(0)], &[vec![r(1)], vec![r(-1)]], &[r(-1), r(-2)]);
        assert_eq!(out, LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let out = maximize(&[r(1)], &[vec![r(-1)]], &[r(0)]);
        assert_eq!(out, LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables_allowed() {
        // max -x st -x <= 5 -> x = -5, value 5
        let out = maximize(&[r(-1)], &[vec![r(-1)]], &[r(5)]);
        match out {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, r(5));
                assert_eq!(point, vec![r(-5)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nonneg_combination_found() {
        // (3, 1) = 3*(1, 0) + 1*(0, 1)
        let g = vec![vec![r(1), r(0)], vec![r(0), r(1)]];
        let lam = nonneg_combination(&g, &[r(3), r(1)]).unwrap();
        assert_eq!(lam, vec![r(3), r(1)]);
        // (-1, 0) is not a nonnegative combination
        assert!(nonneg_combination(&g, &[r(-1), r(0)]).is_none());
    }
}
