//! Reconstruction systems and their operator algebra.
//!
//! An `(m, k, d)` reconstruction system is a tuple of blocks `V_i : ℂ^d → ℂ^{k_i}`
//! whose frame operator `S_V = Σ V_i* V_i` is invertible. Vector frames are the
//! case `k = 1_m`; fusion frames are the projective systems.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::tol;

/// The parameter set `(m, k, d)` with `n = Σ k_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Parameters {
    k: Vec<usize>,
    d: usize,
}

impl Parameters {
    pub fn new(k: Vec<usize>, d: usize) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::argument("need at least one block (m ≥ 1)"));
        }
        if d == 0 {
            return Err(Error::argument("ambient dimension d must be positive"));
        }
        if let Some(i) = k.iter().position(|&ki| ki == 0) {
            return Err(Error::argument(format!("block {} has k_i = 0", i + 1)));
        }
        let n: usize = k.iter().sum();
        if n < d {
            return Err(Error::argument(format!(
                "n = Σ k_i = {n} is smaller than d = {d}; no reconstruction system exists"
            )));
        }
        Ok(Parameters { k, d })
    }

    pub fn m(&self) -> usize {
        self.k.len()
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.k.iter().sum()
    }

    /// Starting row of block `i` inside `ℂ^n`.
    pub fn offset(&self, i: usize) -> usize {
        self.k[..i].iter().sum()
    }
}

/// Positive block weights `v` with `τ = Σ v_i² k_i`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<f64>);

impl Weights {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::argument("weights must be non-empty"));
        }
        if let Some(i) = v.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::argument(format!(
                "weight {} = {} is not a positive finite number",
                i + 1,
                v[i]
            )));
        }
        Ok(Weights(v))
    }

    pub fn ones(m: usize) -> Self {
        Weights(vec![1.0; m])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tau(&self, params: &Parameters) -> f64 {
        self.0
            .iter()
            .zip(params.k())
            .map(|(v, &k)| v * v * k as f64)
            .sum()
    }

    pub fn check_against(&self, params: &Parameters) -> Result<()> {
        if self.len() != params.m() {
            return Err(Error::structure(format!(
                "{} weights supplied for m = {} blocks",
                self.len(),
                params.m()
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, t: f64) -> Self {
        Weights(self.0.iter().map(|v| v * t).collect())
    }
}

/// A non-increasingly sorted real vector.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct SpectrumVector(Vec<f64>);

impl SpectrumVector {
    /// Accepts an already sorted vector; unsorted input is rejected.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::argument("spectrum entries must be finite"));
        }
        if let Some(i) = entries.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::argument(format!(
                "spectrum is not non-increasing at position {}",
                i + 1
            )));
        }
        Ok(SpectrumVector(entries))
    }

    /// Sorts non-increasingly (stable).
    pub fn from_unsorted(mut entries: Vec<f64>) -> Self {
        entries.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        SpectrumVector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `(μ, 0_{n−len})`.
    pub fn pad(&self, n: usize) -> SpectrumVector {
        let mut v = self.0.clone();
        v.resize(n.max(v.len()), 0.0);
        SpectrumVector(v)
    }

    pub fn min(&self) -> f64 {
        self.0.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.0.first().copied().unwrap_or(f64::NAN)
    }
}

impl std::ops::Index<usize> for SpectrumVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Optimal frame bounds `A_V = λ_min(S_V)`, `B_V = λ_max(S_V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

/// A tuple of operator blocks `V_i ∈ L(ℂ^d, ℂ^{k_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionSystem {
    params: Parameters,
    blocks: Vec<CMatrix>,
}

impl ReconstructionSystem {
    /// Builds a system from its blocks, inferring `(m, k, d)`.
    pub fn new(blocks: Vec<CMatrix>) -> Result<Self> {
        let d = blocks
            .first()
            .map(|b| b.ncols())
            .ok_or_else(|| Error::structure("a system needs at least one block"))?;
        let k = blocks.iter().map(|b| b.nrows()).collect();
        let params = Parameters::new(k, d)?;
        Self::with_params(params, blocks)
    }

    pub fn with_params(params: Parameters, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != params.m() {
            return Err(Error::structure(format!(
                "expected {} blocks, got {}",
                params.m(),
                blocks.len()
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            if b.nrows() != params.k()[i] || b.ncols() != params.d() {
                return Err(Error::structure(format!(
                    "block {} has shape {}×{}, expected {}×{}",
                    i + 1,
                    b.nrows(),
                    b.ncols(),
                    params.k()[i],
                    params.d()
                )));
            }
        }
        Ok(ReconstructionSystem { params, blocks })
    }

    /// The system `W_A = (P_{K_i} A*)_i` whose synthesis operator is `A` (`d × n`).
    pub fn from_synthesis(params: Parameters, synthesis: &CMatrix) -> Result<Self> {
        if synthesis.nrows() != params.d() || synthesis.ncols() != params.n() {
            return Err(Error::structure(format!(
                "synthesis operator must be {}×{}, got {}×{}",
                params.d(),
                params.n(),
                synthesis.nrows(),
                synthesis.ncols()
            )));
        }
        let analysis = synthesis.adjoint();
        let blocks = (0..params.m())
            .map(|i| analysis.rows(params.offset(i), params.k()[i]).into_owned())
            .collect();
        Ok(ReconstructionSystem { params, blocks })
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn m(&self) -> usize {
        self.params.m()
    }

    pub fn d(&self) -> usize {
        self.params.d()
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    /// `T_V* = [V_1* | … | V_m*]`, a `d × n` matrix.
    pub fn synthesis(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.d(), self.n());
        for (i, b) in self.blocks.iter().enumerate() {
            t.columns_mut(self.params.offset(i), b.nrows())
                .copy_from(&b.adjoint());
        }
        t
    }

    /// `T_V`, the `n × d` stack of the blocks.
    pub fn analysis(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.n(), self.d());
        for (i, b) in self.blocks.iter().enumerate() {
            t.rows_mut(self.params.offset(i), b.nrows()).copy_from(b);
        }
        t
    }

    /// `S_V = Σ V_i* V_i`, symmetrized.
    pub fn frame_operator(&self) -> CMatrix {
        let mut s = CMatrix::zeros(self.d(), self.d());
        for b in &self.blocks {
            s += b.adjoint() * b;
        }
        linalg::hermitian_part(&s)
    }

    /// `G_V = T_V T_V*`.
    pub fn gram(&self) -> CMatrix {
        let t = self.analysis();
        linalg::hermitian_part(&(&t * t.adjoint()))
    }

    /// `λ(S_V)`, non-increasing.
    pub fn spectrum(&self) -> SpectrumVector {
        SpectrumVector::from_unsorted(linalg::eigenvalues(&self.frame_operator()))
    }

    pub fn invertibility(&self) -> linalg::InvertibilityCheck {
        linalg::check_invertible(&self.frame_operator(), tol::RANK)
    }

    /// Whether `S_V` is invertible under the relative singular value rule.
    pub fn is_rs(&self) -> bool {
        self.invertibility().invertible
    }

    fn require_rs(&self, what: &str) -> Result<()> {
        let chk = self.invertibility();
        if chk.invertible {
            Ok(())
        } else {
            Err(Error::Singular {
                what: format!("{what}: frame operator S_V"),
                sigma_min: chk.sigma_min,
                threshold: chk.threshold,
            })
        }
    }

    pub fn bounds(&self) -> Result<FrameBounds> {
        self.require_rs("bounds")?;
        let spec = self.spectrum();
        Ok(FrameBounds {
            lower: spec.min(),
            upper: spec.max(),
        })
    }

    /// `S_V⁻¹`, refusing singular frame operators.
    pub fn frame_operator_inverse(&self) -> Result<CMatrix> {
        self.require_rs("inverse")?;
        Ok(linalg::hpd_inverse(&self.frame_operator()))
    }

    /// `V# = V · S_V⁻¹`.
    pub fn canonical_dual(&self) -> Result<Self> {
        self.require_rs("canonical dual")?;
        let inv = linalg::hpd_inverse(&self.frame_operator());
        Ok(self.act_unchecked(&inv))
    }

    /// Returns the weights `v_i = ‖V_i‖` when every `V_i V_i* = v_i² I`
    /// holds within `tol` (spectral norm); otherwise `None`.
    pub fn projective_check(&self, tol: f64) -> Option<Weights> {
        let mut v = Vec::with_capacity(self.m());
        for b in &self.blocks {
            let w = linalg::spectral_norm(b);
            if w <= 0.0 {
                return None;
            }
            let gram = b * b.adjoint();
            let resid = linalg::spectral_norm(&(gram - linalg::identity(b.nrows()).scale(w * w)));
            if resid > tol {
                return None;
            }
            v.push(w);
        }
        Weights::new(v).ok()
    }

    /// `V · U = {V_i U}` for an invertible `U`.
    pub fn act(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.d() || u.ncols() != self.d() {
            return Err(Error::structure(format!(
                "acting matrix must be {0}×{0}",
                self.d()
            )));
        }
        let chk = linalg::check_invertible(u, tol::RANK);
        if !chk.invertible {
            return Err(Error::Singular {
                what: "acting matrix U".into(),
                sigma_min: chk.sigma_min,
                threshold: chk.threshold,
            });
        }
        Ok(self.act_unchecked(u))
    }

    fn act_unchecked(&self, u: &CMatrix) -> Self {
        ReconstructionSystem {
            params: self.params.clone(),
            blocks: self.blocks.iter().map(|b| b * u).collect(),
        }
    }

    /// Subsystem keeping the blocks at `keep` (0-based, in the given order).
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let blocks: Vec<CMatrix> = keep
            .iter()
            .map(|&i| {
                self.blocks
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::argument(format!("block index {} out of range", i + 1)))
            })
            .collect::<Result<_>>()?;
        let k = blocks.iter().map(|b| b.nrows()).collect();
        // Restrictions may have n < d, so Parameters::new is bypassed here.
        if blocks.is_empty() {
            return Err(Error::argument("restriction keeps no blocks"));
        }
        Ok(ReconstructionSystem {
            params: Parameters { k, d: self.d() },
            blocks,
        })
    }

    /// Multiplies every block by a real scalar.
    pub fn scaled(&self, t: f64) -> Self {
        ReconstructionSystem {
            params: self.params.clone(),
            blocks: self.blocks.iter().map(|b| b.scale(t)).collect(),
        }
    }

    /// `t W_1 + (1 − t) W_2`.
    pub fn affine_combination(&self, other: &Self, t: f64) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::structure("parameter mismatch in combination"));
        }
        Ok(ReconstructionSystem {
            params: self.params.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a.scale(t) + b.scale(1.0 - t))
                .collect(),
        })
    }
}

/// `‖T_W* T_V − I_d‖ ≤ tol`.
pub fn is_dual(w: &ReconstructionSystem, v: &ReconstructionSystem, tol: f64) -> Result<bool> {
    Ok(duality_residual(w, v)? <= tol)
}

/// `‖T_W* T_V − I_d‖` in spectral norm.
pub fn duality_residual(w: &ReconstructionSystem, v: &ReconstructionSystem) -> Result<f64> {
    if w.params != v.params {
        return Err(Error::structure(format!(
            "parameter mismatch: (k = {:?}, d = {}) vs (k = {:?}, d = {})",
            w.params.k, w.params.d, v.params.k, v.params.d
        )));
    }
    let prod = w.synthesis() * v.analysis();
    Ok(linalg::spectral_norm(&(prod - linalg::identity(v.d()))))
}

/// `x ↦ Σ S_V⁻¹ V_i* (V_i x)`.
pub fn reconstruct(sys: &ReconstructionSystem, x: &crate::linalg::CVector) -> Result<crate::linalg::CVector> {
    let dual = sys.canonical_dual()?;
    let mut out = crate::linalg::CVector::zeros(sys.d());
    for (vi, wi) in sys.blocks().iter().zip(dual.blocks()) {
        out += wi.adjoint() * (vi * x);
    }
    Ok(out)
}

/// Real-valued diagonal block `diag(values)` of shape `values.len() × d`
/// sitting on columns `start..start+len`.
pub fn coordinate_block(values: &[f64], start: usize, d: usize) -> CMatrix {
    let mut b = CMatrix::zeros(values.len(), d);
    for (r, &x) in values.iter().enumerate() {
        b[(r, start + r)] = c(x);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, spectral_norm};

    fn scalar(x: f64) -> CMatrix {
        from_real_rows(&[&[x]])
    }

    #[test]
    fn synthesis_of_scalars() {
        let sys = ReconstructionSystem::new(vec![scalar(2.0), scalar(3.0)]).unwrap();
        let t = sys.synthesis();
        assert_eq!((t.nrows(), t.ncols()), (1, 2));
        assert_eq!(t[(0, 0)], c(2.0));
        assert_eq!(t[(0, 1)], c(3.0));
    }

    #[test]
    fn identity_block() {
        let sys = ReconstructionSystem::new(vec![linalg::identity(3)]).unwrap();
        assert!(spectral_norm(&(sys.synthesis() - linalg::identity(3))) == 0.0);
        let b = sys.bounds().unwrap();
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn diagonal_block_frame_operator() {
        let sys = ReconstructionSystem::new(vec![linalg::real_diagonal(&[1.0, 2.0])]).unwrap();
        let s = sys.frame_operator();
        assert!(spectral_norm(&(s - linalg::real_diagonal(&[1.0, 4.0]))) < 1e-15);
        let b = sys.bounds().unwrap();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 4.0).abs() < 1e-14);
        assert!(sys.projective_check(1e-10).is_none());
    }

    #[test]
    fn gram_of_two_ones() {
        let sys = ReconstructionSystem::new(vec![scalar(1.0), scalar(1.0)]).unwrap();
        let g = sys.gram();
        assert!(spectral_norm(&(g - from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]))) < 1e-15);
    }

    #[test]
    fn shape_errors() {
        let p = Parameters::new(vec![2, 1], 2).unwrap();
        let bad = ReconstructionSystem::with_params(
            p,
            vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)],
        );
        assert!(matches!(bad, Err(Error::Structure(_))));
        assert!(Parameters::new(vec![1], 2).is_err());
        assert!(Parameters::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn singular_system_is_reported() {
        let sys = ReconstructionSystem::new(vec![coordinate_block(&[1.0], 0, 2), coordinate_block(&[1.0], 0, 2)]).unwrap();
        assert!(!sys.is_rs());
        assert!(matches!(sys.bounds(), Err(Error::Singular { .. })));
        assert!(matches!(sys.canonical_dual(), Err(Error::Singular { .. })));
    }

    #[test]
    fn projective_weights_recovered() {
        let sys = ReconstructionSystem::new(vec![
            coordinate_block(&[2.0, 2.0], 0, 3),
            coordinate_block(&[0.5], 2, 3),
        ])
        .unwrap();
        let w = sys.projective_check(1e-12).unwrap();
        assert_eq!(w.values(), &[2.0, 0.5]);
        assert!((w.tau(sys.params()) - 8.25).abs() < 1e-14);
    }

    #[test]
    fn doubled_canonical_dual_is_not_dual() {
        let sys = ReconstructionSystem::new(vec![
            from_real_rows(&[&[1.0, 0.5]]),
            from_real_rows(&[&[0.0, 1.0]]),
            from_real_rows(&[&[1.0, -1.0]]),
        ])
        .unwrap();
        let dual = sys.canonical_dual().unwrap();
        assert!(is_dual(&dual, &sys, 1e-10).unwrap());
        assert!(!is_dual(&dual.scaled(2.0), &sys, 1e-10).unwrap());
    }

    #[test]
    fn spectrum_vector_rules() {
        assert!(SpectrumVector::new(vec![1.0, 2.0]).is_err());
        let s = SpectrumVector::new(vec![3.0, 1.0]).unwrap();
        assert_eq!(s.pad(4).as_slice(), &[3.0, 1.0, 0.0, 0.0]);
        assert_eq!(SpectrumVector::from_unsorted(vec![1.0, 3.0, 2.0]).as_slice(), &[3.0, 2.0, 1.0]);
    }
}
