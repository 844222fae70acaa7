//! Commutants `{V_i* V_i}'` and orthogonal decompositions of minimizers.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::system::ReconstructionSystem;
use crate::tol;

/// Relative gap below which eigenvalues of `S_V` are grouped together.
pub const CLUSTER_TOL: f64 = 1e-6;

const SPLIT_RETRIES: u64 = 5;

/// Frobenius-orthonormal basis of a commutant.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    pub basis: Vec<CMatrix>,
}

impl CommutantBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.len() == 1
    }
}

fn commutant_of(ops: &[CMatrix], d: usize) -> CommutantBasis {
    if d == 0 {
        return CommutantBasis { basis: Vec::new() };
    }
    let dd = d * d;
    let id = linalg::identity(d);
    let mut stacked = CMatrix::zeros(ops.len().max(1) * dd, dd);
    for (i, b) in ops.iter().enumerate() {
        // vec(AB − BA) = (Bᵀ ⊗ I − I ⊗ B) vec(A), column-major
        let k = b.transpose().kronecker(&id) - id.kronecker(b);
        stacked.view_mut((i * dd, 0), (dd, dd)).copy_from(&k);
    }
    let s = linalg::svd(&stacked);
    let smax = s.singular_values.first().copied().unwrap_or(0.0);
    let cut = tol::COMMUTANT * smax.max(1.0);
    let basis = (0..dd)
        .filter(|&j| s.singular_values.get(j).is_none_or(|&x| x <= cut))
        .map(|j| CMatrix::from_column_slice(d, d, s.v.column(j).as_slice()))
        .collect();
    CommutantBasis { basis }
}

fn frame_pieces(sys: &ReconstructionSystem) -> Vec<CMatrix> {
    sys.blocks().iter().map(|b| b.adjoint() * b).collect()
}

/// Basis of `C_V = {V_i* V_i}'`; `V` is irreducible when its dimension is 1.
pub fn commutant(sys: &ReconstructionSystem) -> CommutantBasis {
    commutant_of(&frame_pieces(sys), sys.d())
}

#[derive(Debug, Clone)]
pub struct IrreducibleSummand {
    pub dim: usize,
    /// Orthonormal basis of the summand inside the component (columns).
    pub basis: CMatrix,
    pub k: Vec<usize>,
    pub blocks: Vec<CMatrix>,
    pub tightness_residual: f64,
}

#[derive(Debug, Clone)]
pub struct TightComponent {
    pub sigma: f64,
    pub dim: usize,
    /// Orthonormal basis of the eigenspace of `S_V` (columns in `ℂ^d`).
    pub basis: CMatrix,
    /// `k^j_i = rank(V_i P_j)`.
    pub k: Vec<usize>,
    /// Compressed blocks `V^j_i` (`k^j_i × d_j`; zero rows are allowed).
    pub blocks: Vec<CMatrix>,
    /// `‖S_{V^j} − σ_j I‖`.
    pub tightness_residual: f64,
    /// `max_i ‖P_j V_i*V_i − V_i*V_i P_j‖`.
    pub commutation_residual: f64,
    pub irreducible: Vec<IrreducibleSummand>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub components: Vec<TightComponent>,
    /// Every spectral projection of `S_V` lies in `C_V`.
    pub orthogonal_sum: bool,
    pub max_commutation_residual: f64,
}

/// Restricts each `V_i` to the columns of `basis` and drops its null rows.
fn compress(blocks: &[CMatrix], basis: &CMatrix) -> (Vec<usize>, Vec<CMatrix>) {
    let dim = basis.ncols();
    let mut ks = Vec::with_capacity(blocks.len());
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        let r = b * basis;
        let scale = linalg::spectral_norm(b).max(f64::MIN_POSITIVE);
        if linalg::spectral_norm(&r) <= 1e-8 * scale {
            ks.push(0);
            out.push(CMatrix::zeros(0, dim));
            continue;
        }
        let range = linalg::range_basis(&r, 1e-8);
        ks.push(range.ncols());
        out.push(range.adjoint() * r);
    }
    (ks, out)
}

fn frame_of(blocks: &[CMatrix], dim: usize) -> CMatrix {
    let mut s = CMatrix::zeros(dim, dim);
    for b in blocks {
        s += b.adjoint() * b;
    }
    linalg::hermitian_part(&s)
}

fn tightness(s: &CMatrix, sigma: f64) -> f64 {
    linalg::spectral_norm(&(s - linalg::identity(s.nrows()).scale(sigma)))
}

/// Splits a tight component into irreducible summands using the spectral
/// projections of a random self-adjoint element of its commutant.
fn split_irreducible(blocks: &[CMatrix], dim: usize, sigma: f64, seed: u64) -> Result<Vec<IrreducibleSummand>> {
    let pieces: Vec<CMatrix> = blocks.iter().map(|b| b.adjoint() * b).collect();
    let comm = commutant_of(&pieces, dim);
    let whole = |basis: CMatrix| {
        let s = frame_of(blocks, dim);
        IrreducibleSummand {
            dim,
            basis,
            k: blocks.iter().map(|b| b.nrows()).collect(),
            blocks: blocks.to_vec(),
            tightness_residual: tightness(&s, sigma),
        }
    };
    if comm.dimension() <= 1 {
        return Ok(vec![whole(linalg::identity(dim))]);
    }
    for attempt in 0..SPLIT_RETRIES {
        let mut g = rng::stream(seed, attempt);
        let coeffs = rng::complex_gaussian(&mut g, comm.dimension(), 1);
        let mut h = CMatrix::zeros(dim, dim);
        for (b, z) in comm.basis.iter().zip(coeffs.iter()) {
            h += b * *z + b.adjoint() * z.conj();
        }
        let h = linalg::hermitian_part(&h.scale(0.5));
        let e = linalg::eigh(&h);
        let gap = 1e-8 * e.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let clusters = linalg::cluster_sorted(&e.values, gap);
        let mut parts = Vec::with_capacity(clusters.len());
        let mut ok = true;
        for range in clusters {
            let basis = e.vectors.columns(range.start, range.len()).into_owned();
            let (k, sub) = compress(blocks, &basis);
            let sub_pieces: Vec<CMatrix> = sub.iter().map(|b| b.adjoint() * b).collect();
            if commutant_of(&sub_pieces, basis.ncols()).dimension() != 1 {
                ok = false;
                break;
            }
            let s = frame_of(&sub, basis.ncols());
            parts.push(IrreducibleSummand {
                dim: basis.ncols(),
                tightness_residual: tightness(&s, sigma),
                basis,
                k,
                blocks: sub,
            });
        }
        if ok {
            return Ok(parts);
        }
    }
    Err(Error::Degenerate(format!(
        "no splitting into irreducible summands after {SPLIT_RETRIES} random commutant elements"
    )))
}

/// Spectral projections of `S_V`, their membership in `C_V`, the tight
/// compressions `V^j` and their irreducible summands.
pub fn tight_decomposition(sys: &ReconstructionSystem, seed: u64) -> Result<Decomposition> {
    if sys.projective_check(1e-8).is_none() {
        return Err(Error::argument("tight decomposition needs a projective system"));
    }
    let d = sys.d();
    let pieces = frame_pieces(sys);
    let e = linalg::eigh(&sys.frame_operator());
    let tol = CLUSTER_TOL * e.values.first().copied().unwrap_or(1.0).max(1.0);
    let mut components = Vec::new();
    let mut worst = 0.0f64;
    for (idx, range) in linalg::cluster_sorted(&e.values, tol).into_iter().enumerate() {
        let sigma = e.values[range.clone()].iter().sum::<f64>() / range.len() as f64;
        let basis = e.vectors.columns(range.start, range.len()).into_owned();
        let proj = &basis * basis.adjoint();
        let commutation_residual = pieces
            .iter()
            .map(|b| linalg::spectral_norm(&(&proj * b - b * &proj)))
            .fold(0.0, f64::max);
        worst = worst.max(commutation_residual);
        let (k, blocks) = compress(sys.blocks(), &basis);
        let dim = basis.ncols();
        let s = frame_of(&blocks, dim);
        let irreducible = if commutation_residual <= tol::COMMUTATION {
            split_irreducible(&blocks, dim, sigma, rng::derive(seed, idx as u64))?
        } else {
            Vec::new()
        };
        components.push(TightComponent {
            sigma,
            dim,
            basis,
            k,
            tightness_residual: tightness(&s, sigma),
            blocks,
            commutation_residual,
            irreducible,
        });
    }
    debug_assert_eq!(components.iter().map(|c| c.dim).sum::<usize>(), d);
    Ok(Decomposition {
        components,
        orthogonal_sum: worst <= tol::COMMUTATION,
        max_commutation_residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, identity, real_diagonal};
    use crate::system::coordinate_block;

    #[test]
    fn full_algebra_for_scalar_frame() {
        let sys = ReconstructionSystem::new(vec![identity(3)]).unwrap();
        assert_eq!(commutant(&sys).dimension(), 9);
    }

    #[test]
    fn riesz_pair_is_reducible() {
        let d = 3;
        let sys = ReconstructionSystem::new(vec![
            coordinate_block(&[1.0, 1.0], 0, d),
            coordinate_block(&[1.0], 2, d),
        ])
        .unwrap();
        assert!(commutant(&sys).dimension() >= 2);
    }

    #[test]
    fn commutant_elements_commute() {
        let d = 3;
        let mut b = CMatrix::zeros(1, d);
        b[(0, 0)] = c(1.0);
        b[(0, 1)] = c(1.0);
        let sys = ReconstructionSystem::new(vec![b, coordinate_block(&[1.0], 2, d), real_diagonal(&[1.0, 2.0, 3.0])])
            .unwrap();
        let comm = commutant(&sys);
        for a in &comm.basis {
            for p in frame_pieces(&sys) {
                assert!(linalg::spectral_norm(&(a * &p - &p * a)) < 1e-10);
            }
        }
    }

    #[test]
    fn final_example_minimizer_splits() {
        let h = 0.5;
        let r = 3f64.sqrt() / 2.0;
        let mut v1 = CMatrix::zeros(3, 4);
        for i in 0..3 {
            v1[(i, i)] = c(1.0);
        }
        let mut v2 = CMatrix::zeros(2, 4);
        v2[(0, 0)] = c(1.0);
        v2[(1, 2)] = c(-h);
        v2[(1, 3)] = c(r);
        let mut v3 = CMatrix::zeros(2, 4);
        v3[(0, 1)] = c(1.0);
        v3[(1, 2)] = c(-h);
        v3[(1, 3)] = c(-r);
        let sys = ReconstructionSystem::new(vec![v1, v2, v3]).unwrap();
        let dec = tight_decomposition(&sys, 1).unwrap();
        assert!(dec.orthogonal_sum);
        let got: Vec<(f64, usize)> = dec.components.iter().map(|c| (c.sigma, c.dim)).collect();
        assert_eq!(got.len(), 2);
        assert!((got[0].0 - 2.0).abs() < 1e-12 && got[0].1 == 2);
        assert!((got[1].0 - 1.5).abs() < 1e-12 && got[1].1 == 2);
        for comp in &dec.components {
            assert!(comp.tightness_residual < 1e-12);
        }
    }
}
