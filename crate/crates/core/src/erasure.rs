//! Erasure analysis: what is left after deleting a set of blocks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::system::ReconstructionSystem;
use crate::tol;

/// Largest `m` accepted by [`scan`].
pub const SCAN_CAP: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct ErasureReport {
    /// Erased block indices, 0-based and sorted.
    pub erased: Vec<usize>,
    #[serde(skip)]
    pub m_j: CMatrix,
    pub survives: bool,
    /// `σ_min(M_J)` and the relative threshold it was tested against.
    pub sigma_min: f64,
    pub threshold: f64,
    /// `A_V / ‖M_J⁻¹‖`.
    pub bound_new: Option<f64>,
    /// `A_V − Σ_J ‖V_i‖²` when positive.
    pub bound_ck: Option<f64>,
    /// `A_V² / (A_V + ‖V_j‖² ‖M_J⁻¹‖²)`, singletons only.
    pub bound_asgari: Option<f64>,
    /// `λ_min(S_{V_J})`.
    pub exact_a: Option<f64>,
    /// `λ_max(S_{V_J})`.
    pub upper_trunc: f64,
    pub upper: f64,
    /// `‖S_{V_J} − M_J S_V‖`.
    pub identity_residual: f64,
}

fn validate(sys: &ReconstructionSystem, erased: &[usize]) -> Result<Vec<usize>> {
    let m = sys.m();
    let mut j: Vec<usize> = erased.to_vec();
    j.sort_unstable();
    j.dedup();
    if j.is_empty() {
        return Err(Error::argument("the erased set is empty"));
    }
    if let Some(&bad) = j.iter().find(|&&i| i >= m) {
        return Err(Error::argument(format!("block {} does not exist (m = {m})", bad + 1)));
    }
    if j.len() == m {
        return Err(Error::argument("cannot erase every block"));
    }
    Ok(j)
}

fn complement(m: usize, erased: &[usize]) -> Vec<usize> {
    (0..m).filter(|i| !erased.contains(i)).collect()
}

/// `M_J = I − Σ_{i∈J} V_i* V_i S_V⁻¹`.
pub fn m_j(sys: &ReconstructionSystem, erased: &[usize]) -> Result<CMatrix> {
    let j = validate(sys, erased)?;
    let inv = sys.frame_operator_inverse()?;
    Ok(m_j_with(sys, &j, &inv))
}

fn m_j_with(sys: &ReconstructionSystem, j: &[usize], s_inv: &CMatrix) -> CMatrix {
    let d = sys.d();
    let mut erased_op = CMatrix::zeros(d, d);
    for &i in j {
        let b = sys.block(i);
        erased_op += b.adjoint() * b;
    }
    linalg::identity(d) - erased_op * s_inv
}

pub fn erase(sys: &ReconstructionSystem, erased: &[usize]) -> Result<ErasureReport> {
    let j = validate(sys, erased)?;
    let bounds = sys.bounds()?;
    let s = sys.frame_operator();
    let s_inv = linalg::hpd_inverse(&s);
    let mj = m_j_with(sys, &j, &s_inv);

    let rest = sys.restrict(&complement(sys.m(), &j))?;
    let s_rest = rest.frame_operator();
    let identity_residual = linalg::spectral_norm(&(&s_rest - &mj * &s));

    let chk = linalg::check_invertible(&mj, tol::RANK);
    let survives = chk.invertible;
    let a = bounds.lower;
    // ‖M_J⁻¹‖ = 1/σ_min(M_J)
    let inv_norm = 1.0 / chk.sigma_min;

    let ck_sum: f64 = j
        .iter()
        .map(|&i| linalg::spectral_norm(sys.block(i)).powi(2))
        .sum();
    let bound_ck = (a - ck_sum > 0.0).then_some(a - ck_sum);
    let (bound_new, bound_asgari, exact_a) = if survives {
        let asg = (j.len() == 1).then(|| {
            let vj = linalg::spectral_norm(sys.block(j[0])).powi(2);
            a * a / (a + vj * inv_norm * inv_norm)
        });
        let spec = rest.spectrum();
        (Some(a / inv_norm), asg, Some(spec.min()))
    } else {
        (None, None, None)
    };
    let upper_trunc = rest.spectrum().max();

    Ok(ErasureReport {
        erased: j,
        m_j: mj,
        survives,
        sigma_min: chk.sigma_min,
        threshold: chk.threshold,
        bound_new,
        bound_ck,
        bound_asgari,
        exact_a,
        upper_trunc,
        upper: bounds.upper,
        identity_residual,
    })
}

/// `{W_i M_J⁻¹}_{i∉J}` with `W = V#`: the canonical dual of the surviving blocks.
pub fn truncated_dual(sys: &ReconstructionSystem, erased: &[usize]) -> Result<ReconstructionSystem> {
    let j = validate(sys, erased)?;
    let s_inv = sys.frame_operator_inverse()?;
    let mj = m_j_with(sys, &j, &s_inv);
    let chk = linalg::check_invertible(&mj, tol::RANK);
    if !chk.invertible {
        return Err(Error::Singular {
            what: "M_J".into(),
            sigma_min: chk.sigma_min,
            threshold: chk.threshold,
        });
    }
    let mj_inv = linalg::inverse(&mj).ok_or_else(|| Error::Singular {
        what: "M_J".into(),
        sigma_min: chk.sigma_min,
        threshold: chk.threshold,
    })?;
    let dual = sys.canonical_dual()?;
    let kept = complement(sys.m(), &j);
    let blocks = kept.iter().map(|&i| dual.block(i) * &mj_inv).collect();
    let shape = sys.restrict(&kept)?;
    ReconstructionSystem::with_params(shape.params().clone(), blocks)
}

/// Every proper nonempty `J`, ordered by `|J|` then lexicographically.
pub fn all_subsets(m: usize) -> Result<Vec<Vec<usize>>> {
    if m > SCAN_CAP {
        return Err(Error::Cap(format!(
            "exhaustive erasure scan needs m ≤ {SCAN_CAP}, got m = {m}"
        )));
    }
    let full = (1u32 << m) - 1;
    let mut sets: Vec<Vec<usize>> = (1..full)
        .map(|mask| (0..m).filter(|i| mask >> i & 1 == 1).collect())
        .collect();
    sets.sort_by(|a: &Vec<usize>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(sets)
}

pub fn scan(sys: &ReconstructionSystem) -> Result<Vec<ErasureReport>> {
    let sets = all_subsets(sys.m())?;
    sets.par_iter().map(|j| erase(sys, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity;

    fn duplicated_parseval(d: usize) -> ReconstructionSystem {
        ReconstructionSystem::new(vec![identity(d), identity(d)]).unwrap()
    }

    #[test]
    fn duplicated_pair() {
        let sys = duplicated_parseval(3);
        let rep = erase(&sys, &[0]).unwrap();
        assert!(rep.survives);
        assert!((&rep.m_j - identity(3).scale(0.5)).norm() < 1e-12);
        assert!((rep.exact_a.unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.bound_new.unwrap() - 1.0).abs() < 1e-12);
        assert!((rep.bound_ck.unwrap() - 1.0).abs() < 1e-12);
        assert!(rep.identity_residual < 1e-12);
    }

    #[test]
    fn incomplete_remainder() {
        let sys = ReconstructionSystem::new(vec![
            crate::system::coordinate_block(&[1.0], 0, 2),
            crate::system::coordinate_block(&[1.0], 1, 2),
        ])
        .unwrap();
        let rep = erase(&sys, &[1]).unwrap();
        assert!(!rep.survives);
        assert!(rep.bound_new.is_none() && rep.exact_a.is_none());
        assert!(rep.identity_residual < 1e-12);
        assert!(matches!(truncated_dual(&sys, &[1]), Err(Error::Singular { .. })));
    }

    #[test]
    fn bad_sets() {
        let sys = duplicated_parseval(2);
        assert!(matches!(erase(&sys, &[]), Err(Error::Argument(_))));
        assert!(matches!(erase(&sys, &[0, 1]), Err(Error::Argument(_))));
        assert!(matches!(erase(&sys, &[4]), Err(Error::Argument(_))));
    }

    #[test]
    fn subsets_order() {
        let s = all_subsets(3).unwrap();
        assert_eq!(
            s,
            vec![vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]
        );
        assert!(matches!(all_subsets(21), Err(Error::Cap(_))));
    }

    #[test]
    fn zero_block_erasure() {
        let d = 2;
        let sys = ReconstructionSystem::new(vec![identity(d), CMatrix::zeros(1, d)]).unwrap();
        let rep = erase(&sys, &[1]).unwrap();
        assert!((&rep.m_j - identity(d)).norm() < 1e-14);
        let td = truncated_dual(&sys, &[1]).unwrap();
        let dual = sys.canonical_dual().unwrap();
        assert!((td.block(0) - dual.block(0)).norm() < 1e-14);
    }
}
