//! Dense two-phase simplex for the small feasibility problems of the
//! propriety check: minimise `c'x` subject to `A x = b`, `x >= 0`.
//!
//! Bland's rule keeps it finite on degenerate problems. The problems here have
//! one row per covariate, so the dense tableau stays small.

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpResult {
    Optimal(Vec<f64>),
    /// Farkas certificate `y` with `A'y <= 0` and `b'y > 0`.
    Infeasible(Vec<f64>),
    Unbounded,
}

struct Tableau {
    /// m rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        }
        self.basis[r] = col;
    }

    /// Minimises `cost` over the columns `allowed` (others never enter).
    fn optimise(&mut self, cost: &[f64], allowed: usize) -> bool {
        loop {
            // reduced costs: c_j - c_B' B^-1 A_j
            let entering = (0..allowed).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let z: f64 = self.rows.iter().zip(&self.basis).map(|(row, &bi)| cost[bi] * row[j]).sum();
                cost[j] - z < -TOL
            });
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > TOL {
                    let ratio = row[self.ncols] / row[col];
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - TOL || (ratio <= br + TOL && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn solution(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (row, &bi) in self.rows.iter().zip(&self.basis) {
            if bi < n {
                x[bi] = row[self.ncols];
            }
        }
        x
    }
}

pub(crate) fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpResult {
    let m = a.len();
    let n = c.len();
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    let signs: Vec<f64> = b.iter().map(|&bi| if bi < 0.0 { -1.0 } else { 1.0 }).collect();
    for ((ai, &bi), &sign) in a.iter().zip(b).zip(&signs) {
        let mut row: Vec<f64> = ai.iter().map(|v| sign * v).collect();
        row.resize(ncols + 1, 0.0);
        row[ncols] = sign * bi;
        rows.push(row);
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), ncols };

    // phase 1: minimise the sum of artificials
    let mut phase1 = vec![0.0; ncols];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    t.optimise(&phase1, ncols);
    let infeasibility: f64 = t.rows.iter().zip(&t.basis).filter(|(_, &bi)| bi >= n).map(|(r, _)| r[ncols]).sum();
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeasibility > TOL * scale {
        // phase-1 duals y = c_B' B^-1; B^-1 sits in the artificial columns
        let y = (0..m)
            .map(|i| {
                let yi: f64 = t.rows.iter().zip(&t.basis).map(|(row, &bi)| phase1[bi] * row[n + i]).sum();
                signs[i] * yi
            })
            .collect();
        return LpResult::Infeasible(y);
    }
    // drive zero-level artificials out of the basis; drop redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.rows[r][j].abs() > TOL) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }
    let mut cost = c.to_vec();
    cost.resize(ncols, 0.0);
    if !t.optimise(&cost, n) {
        return LpResult::Unbounded;
    }
    LpResult::Optimal(t.solution(n))
}
