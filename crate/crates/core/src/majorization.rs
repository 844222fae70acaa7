//! Majorization of real vectors and the related spectral tools.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry;
use crate::linalg::{self, CMatrix};
use crate::potential::{self, SpectrumOptions};
use crate::rng;
use crate::system::{Parameters, ReconstructionSystem, SpectrumVector, Weights};

const REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Majorized,
    WeaklyMajorized,
    Incomparable,
}

/// How `x` sits below `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MajorizationVerdict {
    pub relation: Relation,
    /// 1-based partial-sum index where the stronger relation fails.
    pub witness: Option<usize>,
}

fn sorted_desc(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn tolerance(x: &[f64], y: &[f64]) -> f64 {
    let l1 = |v: &[f64]| v.iter().map(|a| a.abs()).sum::<f64>();
    REL_TOL * l1(x).max(l1(y))
}

/// `min_k (Σ_{i≤k} y↓_i − Σ_{i≤k} x↓_i)` over all `k`, including the total.
pub fn partial_sum_margin(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let (mut sx, mut sy, mut worst) = (0.0, 0.0, f64::INFINITY);
    for (a, b) in xs.iter().zip(&ys) {
        sx += a;
        sy += b;
        worst = worst.min(sy - sx);
    }
    Ok(worst)
}

/// Decides `x ≺ y`, falling back to `x ≺_w y`.
pub fn majorizes(x: &[f64], y: &[f64]) -> Result<MajorizationVerdict> {
    if x.len() != y.len() {
        return Err(Error::argument(format!("lengths {} and {} differ", x.len(), y.len())));
    }
    let tol = tolerance(x, y);
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let (mut sx, mut sy) = (0.0, 0.0);
    for (k, (a, b)) in xs.iter().zip(&ys).enumerate() {
        sx += a;
        sy += b;
        if sx > sy + tol {
            return Ok(MajorizationVerdict {
                relation: Relation::Incomparable,
                witness: Some(k + 1),
            });
        }
    }
    if (sx - sy).abs() <= tol {
        Ok(MajorizationVerdict {
            relation: Relation::Majorized,
            witness: None,
        })
    } else {
        Ok(MajorizationVerdict {
            relation: Relation::WeaklyMajorized,
            witness: Some(x.len()),
        })
    }
}

fn weakly_below(x: &[f64], y: &[f64]) -> bool {
    matches!(
        majorizes(x, y).map(|v| v.relation),
        Ok(Relation::Majorized | Relation::WeaklyMajorized)
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AppendOutcome {
    HypothesesUnmet,
    Holds,
    Fails,
}

/// If `tr(γ, b1_m) ≤ tr(α, β)` and `γ ≺_w α`, checks `(γ, b1_m) ≺_w (α, β)`.
pub fn append_lemma_check(alpha: &[f64], gamma: &[f64], beta: &[f64], b: f64) -> Result<AppendOutcome> {
    if alpha.len() != gamma.len() {
        return Err(Error::argument("alpha and gamma must have equal length"));
    }
    let min_gamma = gamma.iter().copied().fold(f64::INFINITY, f64::min);
    if b > min_gamma {
        return Err(Error::argument(format!("b = {b} exceeds min γ = {min_gamma}")));
    }
    let m = beta.len();
    let lhs_tr: f64 = gamma.iter().sum::<f64>() + b * m as f64;
    let rhs_tr: f64 = alpha.iter().sum::<f64>() + beta.iter().sum::<f64>();
    let tol = tolerance(gamma, alpha).max(REL_TOL * rhs_tr.abs());
    if lhs_tr > rhs_tr + tol || !weakly_below(gamma, alpha) {
        return Ok(AppendOutcome::HypothesesUnmet);
    }
    let mut left = gamma.to_vec();
    left.extend(std::iter::repeat_n(b, m));
    let mut right = alpha.to_vec();
    right.extend_from_slice(beta);
    Ok(if weakly_below(&left, &right) {
        AppendOutcome::Holds
    } else {
        AppendOutcome::Fails
    })
}

/// `PSP + (I − P)S(I − P)`.
pub fn pinch(s: &CMatrix, p: &CMatrix) -> Result<CMatrix> {
    if s.shape() != p.shape() || !s.is_square() {
        return Err(Error::structure("pinching needs square matrices of equal size"));
    }
    let resid = linalg::projection_residual(p);
    if resid > 1e-10 {
        return Err(Error::argument(format!("not an orthogonal projection (residual {resid:e})")));
    }
    let q = linalg::identity(p.nrows()) - p;
    Ok(linalg::hermitian_part(&(p * s * p + &q * s * &q)))
}

/// `(v_1², …, v_r², c 1_{d−r})` with `r` the `d`-irregularity of `v`.
pub fn vector_frame_lambda(v: &[f64], d: usize) -> Result<SpectrumVector> {
    let m = v.len();
    if d == 0 || d > m {
        return Err(Error::argument(format!("need 1 ≤ d ≤ m, got d = {d}, m = {m}")));
    }
    if v.windows(2).any(|w| w[0] < w[1]) || v.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
        return Err(Error::argument("weights must be positive and non-increasing"));
    }
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    let tail = |j: usize| sq[j..].iter().sum::<f64>();
    let r = (1..d)
        .filter(|&j| (d - j) as f64 * sq[j - 1] > tail(j))
        .max()
        .unwrap_or(0);
    let c = tail(r) / (d - r) as f64;
    let mut out = sq[..r].to_vec();
    out.extend(std::iter::repeat_n(c, d - r));
    Ok(SpectrumVector::from_unsorted(out))
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub seed: u64,
    pub system: ReconstructionSystem,
    pub margin: f64,
}

#[derive(Debug, Clone)]
pub struct ConjectureReport {
    pub lambda_v: SpectrumVector,
    pub samples: usize,
    pub passes: usize,
    pub worst_margin: f64,
    pub counterexample: Option<Counterexample>,
}

/// Samples random projective systems and tests `λ_v ≺ λ(S_V)` for each.
///
/// Observational only: a failure is reported, never raised.
pub fn conjecture_harness(
    params: &Parameters,
    weights: &Weights,
    samples: usize,
    seed: u64,
) -> Result<ConjectureReport> {
    let opt = potential::optimal_spectrum(params, weights, &SpectrumOptions::certified())?;
    let lambda = opt.lambda.clone();
    let tau = weights.tau(params);
    let slack = REL_TOL * tau.max(1.0);
    let results: Vec<(u64, f64, ReconstructionSystem)> = (0..samples as u64)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let s = rng::derive(seed, t);
            let sys = geometry::random_projective(params, weights, s)?;
            let margin = partial_sum_margin(lambda.as_slice(), sys.spectrum().as_slice())?;
            Ok((s, margin, sys))
        })
        .collect::<Result<_>>()?;
    let passes = results.iter().filter(|(_, m, _)| *m >= -slack).count();
    let worst = results
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(_, m, _)| *m)
        .unwrap_or(f64::INFINITY);
    let counterexample = results
        .into_iter()
        .find(|(_, m, _)| *m < -slack)
        .map(|(seed, margin, system)| Counterexample { seed, system, margin });
    Ok(ConjectureReport {
        lambda_v: lambda,
        samples,
        passes,
        worst_margin: worst,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, real_diagonal};

    #[test]
    fn basic_relations() {
        let v = majorizes(&[1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert_eq!(v.relation, Relation::Majorized);
        let v = majorizes(&[2.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(v, MajorizationVerdict { relation: Relation::Incomparable, witness: Some(1) });
        let v = majorizes(&[1.0, 0.5], &[2.0, 0.0]).unwrap();
        assert_eq!(v, MajorizationVerdict { relation: Relation::WeaklyMajorized, witness: Some(2) });
        assert!(majorizes(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn pinching_example() {
        let s = from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let p = real_diagonal(&[1.0, 0.0]);
        let m = pinch(&s, &p).unwrap();
        assert!((m - linalg::identity(2)).norm() < 1e-15);
        assert!(pinch(&s, &real_diagonal(&[2.0, 0.0])).is_err());
    }

    #[test]
    fn irregularity() {
        let l = vector_frame_lambda(&[2.0, 1.0, 1.0, 1.0], 2).unwrap();
        assert_eq!(l.as_slice(), &[4.0, 3.0]);
        let l = vector_frame_lambda(&[1.0; 5], 3).unwrap();
        assert!(l.as_slice().iter().all(|&x| (x - 5.0 / 3.0).abs() < 1e-15));
        assert!(vector_frame_lambda(&[1.0, 1.0], 3).is_err());
        assert!(vector_frame_lambda(&[1.0, 2.0], 1).is_err());
    }

    #[test]
    fn append_lemma_cases() {
        let a = [3.0, 2.0];
        assert_eq!(append_lemma_check(&a, &a, &[1.0, 1.0], 1.0).unwrap(), AppendOutcome::Holds);
        assert_eq!(
            append_lemma_check(&[1.0, 1.0], &[1.0, 1.0], &[0.0], 1.0).unwrap(),
            AppendOutcome::HypothesesUnmet
        );
        assert!(append_lemma_check(&a, &a, &[1.0], 5.0).is_err());
    }
}
