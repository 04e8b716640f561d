//! Conditions for a proper posterior under a flat coefficient prior.
//!
//! Rows of `X*` are `tau_i x_i'` with `tau_i = 1` for a failure and `-1` for a
//! success; a binomial row with both outcomes contributes both signs. The
//! posterior is proper when `X` has full column rank and some strictly positive
//! `a` solves `a'X* = 0`. By Stiemke's lemma the second condition fails exactly
//! when some `b` gives `X* b <= 0` with at least one strict inequality, i.e.
//! when the data are completely or quasi-completely separated.

use nalgebra::DMatrix;
use serde::Serialize;

use super::dataset::Dataset;
use super::simplex::{solve, LpResult};
use super::spec::ModelSpec;
use super::ModelError;
use crate::link::{Family, ShapeParam};

const WITNESS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Separation {
    None,
    /// Some `b` has `X* b <= 0` with a strict inequality, but no `b` has `X* b < 0`.
    QuasiComplete,
    /// Some `b` has `X* b <= -1` in every row.
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Propriety {
    pub full_rank: bool,
    pub rank: usize,
    pub n_columns: usize,
    /// The positive-vector condition `a > 0, a'X* = 0`.
    pub overlap: bool,
    /// A solution `a` (scaled so that `min a = 1`) when `overlap` holds.
    pub overlap_weights: Option<Vec<f64>>,
    pub separation: Separation,
    /// A separating direction `b` when `overlap` fails.
    pub witness: Option<Vec<f64>>,
    /// For Student-t based links: whether every admissible `nu` exceeds the
    /// number of coefficients.
    pub nu_condition: Option<bool>,
}

impl Propriety {
    pub fn passes(&self) -> bool {
        self.failure().is_none()
    }

    /// Human-readable reason the conditions fail, if they do.
    pub fn failure(&self) -> Option<String> {
        let mut reasons = Vec::new();
        if !self.full_rank {
            reasons.push(format!("design matrix has rank {} < {} columns", self.rank, self.n_columns));
        }
        match self.separation {
            Separation::None => {}
            Separation::QuasiComplete => reasons.push("responses are quasi-completely separated".into()),
            Separation::Complete => reasons.push("responses are completely separated".into()),
        }
        if self.nu_condition == Some(false) {
            reasons.push(format!("degrees of freedom nu must exceed {} for every admissible value", self.n_columns));
        }
        if reasons.is_empty() {
            None
        } else {
            Some(reasons.join("; "))
        }
    }
}

/// Rows of `X*` (see module docs).
pub fn signed_design(data: &Dataset) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for i in 0..data.len() {
        let (y, n) = (data.y()[i], data.n()[i]);
        let x = data.x(i);
        if y < n {
            rows.push(x.to_vec());
        }
        if y > 0 {
            rows.push(x.iter().map(|v| -v).collect());
        }
    }
    rows
}

pub fn check_propriety(data: &Dataset, spec: &ModelSpec) -> Result<Propriety, ModelError> {
    if data.is_empty() {
        return Err(ModelError::Empty);
    }
    let k = data.n_covariates();
    let rank = DMatrix::from_row_slice(data.len(), k, data.design()).rank(1e-10 * data.len().max(k) as f64);
    let xs = signed_design(data);
    let (overlap_weights, separation, witness) = overlap(&xs, k);

    let nu_condition = (spec.family() == Family::Spt).then(|| {
        let lower = match spec.shape_priors().get(&ShapeParam::Nu) {
            Some(prior) => prior.support().0,
            None => spec.link().param(ShapeParam::Nu).expect("spt has nu"),
        };
        let strict = spec.shape_priors().contains_key(&ShapeParam::Nu);
        if strict {
            lower >= k as f64
        } else {
            lower > k as f64
        }
    });
    Ok(Propriety {
        full_rank: rank == k,
        rank,
        n_columns: k,
        overlap: overlap_weights.is_some(),
        overlap_weights,
        separation,
        witness,
        nu_condition,
    })
}

/// Solves for `a >= 1` with `X*'a = 0`; otherwise classifies the separation and
/// returns a witness direction.
fn overlap(xs: &[Vec<f64>], k: usize) -> (Option<Vec<f64>>, Separation, Option<Vec<f64>>) {
    let m = xs.len();
    // a = 1 + s, s >= 0:  X*' s = -X*' 1
    let a_mat: Vec<Vec<f64>> = (0..k).map(|j| xs.iter().map(|r| r[j]).collect()).collect();
    let rhs: Vec<f64> = (0..k).map(|j| -xs.iter().map(|r| r[j]).sum::<f64>()).collect();
    let quasi_witness = match solve(&a_mat, &rhs, &vec![0.0; m]) {
        LpResult::Optimal(s) => return (Some(s.iter().map(|v| 1.0 + v).collect()), Separation::None, None),
        // y with X* y <= 0 and -1'X* y > 0
        LpResult::Infeasible(y) => y,
        LpResult::Unbounded => unreachable!("zero objective is bounded"),
    };
    // complete separation: a >= 0, 1'a = 1, X*'a = 0 infeasible iff X* b < 0 has a solution
    let mut g_mat = a_mat.clone();
    g_mat.push(vec![1.0; m]);
    let mut g_rhs = vec![0.0; k];
    g_rhs.push(1.0);
    if let LpResult::Infeasible(y) = solve(&g_mat, &g_rhs, &vec![0.0; m]) {
        // X* y[..k] + y[k] <= 0 with y[k] > 0
        let b: Vec<f64> = y[..k].to_vec();
        let worst = xs.iter().map(|r| dot(r, &b)).fold(f64::NEG_INFINITY, f64::max);
        if worst < 0.0 {
            let b = b.iter().map(|v| v / -worst).collect();
            return (None, Separation::Complete, Some(b));
        }
    }
    let worst = xs.iter().map(|r| dot(r, &quasi_witness)).fold(f64::NEG_INFINITY, f64::max);
    let scale = quasi_witness.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    let b: Vec<f64> = quasi_witness.iter().map(|v| v / scale).collect();
    debug_assert!(worst / scale <= WITNESS_TOL);
    (None, Separation::QuasiComplete, Some(b))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::LinkSpec;
    use crate::model::BetaPrior;

    fn flat(link: LinkSpec) -> ModelSpec {
        ModelSpec::new(link).with_beta_prior(BetaPrior::Flat)
    }

    fn bernoulli(xs: &[f64], ys: &[u32]) -> Dataset {
        Dataset::with_intercept(ys.to_vec(), vec![1; ys.len()], xs.iter().map(|&v| vec![v]).collect(), vec!["x".into()], None).unwrap()
    }

    #[test]
    fn intercept_only_overlap() {
        let d = Dataset::with_intercept(vec![0, 1], vec![1, 1], vec![vec![], vec![]], vec![], None).unwrap();
        let p = check_propriety(&d, &flat(LinkSpec::logit())).unwrap();
        assert!(p.full_rank && p.overlap && p.passes());
        let a = p.overlap_weights.unwrap();
        assert!(a.iter().all(|&v| v >= 1.0 - 1e-12));
        assert!((a[0] - a[1]).abs() < 1e-12);
    }

    #[test]
    fn separable_pair_gives_witness() {
        let d = bernoulli(&[-1.0, 1.0], &[0, 1]);
        let p = check_propriety(&d, &flat(LinkSpec::logit())).unwrap();
        assert!(!p.overlap);
        assert_eq!(p.separation, Separation::Complete);
        let b = p.witness.unwrap();
        assert!(b[0].abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12, "{b:?}");
        for row in signed_design(&d) {
            assert!(dot(&row, &b) <= -1.0 + 1e-12);
        }
    }

    #[test]
    fn quasi_separation_is_not_overlap() {
        // x = 0 carries both outcomes; x < 0 only failures, x > 0 only successes
        let d = bernoulli(&[-1.0, 0.0, 0.0, 1.0], &[0, 0, 1, 1]);
        let p = check_propriety(&d, &flat(LinkSpec::logit())).unwrap();
        assert!(!p.overlap);
        assert_eq!(p.separation, Separation::QuasiComplete);
        let b = p.witness.unwrap();
        let prods: Vec<f64> = signed_design(&d).iter().map(|r| dot(r, &b)).collect();
        assert!(prods.iter().all(|&v| v <= 1e-9));
        assert!(prods.iter().any(|&v| v < -1e-6));
    }

    #[test]
    fn binomial_row_with_both_outcomes_overlaps() {
        let d = Dataset::with_intercept(vec![2, 0], vec![5, 3], vec![vec![0.0], vec![1.0]], vec!["x".into()], None).unwrap();
        assert!(!check_propriety(&d, &flat(LinkSpec::logit())).unwrap().overlap);
        let d = Dataset::with_intercept(vec![2, 1], vec![5, 3], vec![vec![0.0], vec![1.0]], vec!["x".into()], None).unwrap();
        assert!(check_propriety(&d, &flat(LinkSpec::logit())).unwrap().overlap);
        let d = Dataset::with_intercept(vec![2], vec![5], vec![vec![]], vec![], None).unwrap();
        assert!(check_propriety(&d, &flat(LinkSpec::logit())).unwrap().overlap);
    }

    #[test]
    fn rank_deficiency_detected() {
        let d = Dataset::new(
            vec![0, 1, 1],
            vec![1, 1, 1],
            vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0]],
            vec!["a".into(), "b".into()],
            None,
        )
        .unwrap();
        let p = check_propriety(&d, &flat(LinkSpec::logit())).unwrap();
        assert!(!p.full_rank && p.rank == 1 && !p.passes());
    }

    #[test]
    fn nu_condition_for_spt() {
        let d = bernoulli(&[-1.0, -0.5, 0.5, 1.0], &[0, 1, 0, 1]);
        let sampled = flat(LinkSpec::spt(1.0, 8.0).unwrap());
        assert_eq!(check_propriety(&d, &sampled).unwrap().nu_condition, Some(false));
        let fixed = sampled.fix(ShapeParam::Nu);
        let p = check_propriety(&d, &fixed).unwrap();
        assert_eq!(p.nu_condition, Some(true));
        assert!(p.passes());
        assert_eq!(check_propriety(&d, &flat(LinkSpec::logit())).unwrap().nu_condition, None);
    }
}
