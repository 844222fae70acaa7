//! Generation of projective systems with fixed weights through isometry
//! tuples, the maps between isometries, projections and frame operators, the
//! polar local section of `Φ`, and the `Gl(n)` action on systems.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::system::{is_dual, Parameters, ReconstructionSystem, Weights};
use crate::tol;

const MAX_RETRIES: u64 = 100;
const CHART_BOUNDARY: f64 = 1.0 - 1e-8;

/// Isometries `U_i : ℂ^{k_i} → ℂ^d` (`d × k_i`, `U_i* U_i = I`).
#[derive(Debug, Clone, PartialEq)]
pub struct IsometryTuple {
    isometries: Vec<CMatrix>,
}

impl IsometryTuple {
    pub fn new(isometries: Vec<CMatrix>, tol: f64) -> Result<Self> {
        for (i, u) in isometries.iter().enumerate() {
            let r = linalg::spectral_norm(&(u.adjoint() * u - linalg::identity(u.ncols())));
            if r > tol {
                return Err(Error::argument(format!(
                    "U_{} is not an isometry (residual {r:e})",
                    i + 1
                )));
            }
        }
        Ok(IsometryTuple { isometries })
    }

    pub fn isometries(&self) -> &[CMatrix] {
        &self.isometries
    }
}

/// Orthogonal projections `P_i` of rank `k_i` on `ℂ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTuple {
    projections: Vec<CMatrix>,
}

impl ProjectionTuple {
    pub fn new(projections: Vec<CMatrix>, tol: f64) -> Result<Self> {
        for (i, p) in projections.iter().enumerate() {
            let r = linalg::projection_residual(p);
            if r > tol {
                return Err(Error::argument(format!(
                    "P_{} is not an orthogonal projection (residual {r:e})",
                    i + 1
                )));
            }
        }
        Ok(ProjectionTuple { projections })
    }

    pub fn projections(&self) -> &[CMatrix] {
        &self.projections
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.projections
            .iter()
            .map(|p| linalg::trace_re(p).round() as usize)
            .collect()
    }
}

/// A Haar-distributed isometry from the QR factor of a complex Gaussian
/// matrix, with the positive-diagonal convention on `R`.
pub fn random_isometry(rng: &mut impl Rng, d: usize, k: usize) -> CMatrix {
    let g = rng::complex_gaussian(rng, d, k);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let rjj = r[(j, j)];
        if rjj.norm() > 0.0 {
            let ph = rjj / rjj.norm();
            q.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
    }
    q
}

pub fn random_isometries(rng: &mut impl Rng, params: &Parameters) -> Result<IsometryTuple> {
    if let Some(i) = params.k().iter().position(|&k| k > params.d()) {
        return Err(Error::argument(format!(
            "k_{} = {} exceeds d = {}; no isometry exists",
            i + 1,
            params.k()[i],
            params.d()
        )));
    }
    Ok(IsometryTuple {
        isometries: params
            .k()
            .iter()
            .map(|&k| random_isometry(rng, params.d(), k))
            .collect(),
    })
}

/// `γ(U) = {v_i U_i*}`.
pub fn gamma(iso: &IsometryTuple, weights: &Weights) -> Result<ReconstructionSystem> {
    if iso.isometries.len() != weights.len() {
        return Err(Error::structure("weights and isometries differ in length"));
    }
    let blocks = iso
        .isometries
        .iter()
        .zip(weights.values())
        .map(|(u, &v)| u.adjoint().scale(v))
        .collect();
    ReconstructionSystem::new(blocks)
}

/// `γ⁻¹(V) = {v_i⁻¹ V_i*}` for a projective system with weights `v`.
pub fn gamma_inverse(sys: &ReconstructionSystem, weights: &Weights) -> Result<IsometryTuple> {
    weights.check_against(sys.params())?;
    let isometries = sys
        .blocks()
        .iter()
        .zip(weights.values())
        .map(|(b, &v)| b.adjoint().unscale(v))
        .collect();
    IsometryTuple::new(isometries, 1e-8)
}

/// Random projective system with weights `v`, deterministic in `seed`.
///
/// Attempt `t` draws from stream `t` of the seed; draws whose frame operator
/// is singular are discarded.
pub fn random_projective(
    params: &Parameters,
    weights: &Weights,
    seed: u64,
) -> Result<ReconstructionSystem> {
    weights.check_against(params)?;
    for attempt in 0..MAX_RETRIES {
        let mut rng = rng::stream(seed, attempt);
        let iso = random_isometries(&mut rng, params)?;
        let sys = gamma(&iso, weights)?;
        if sys.is_rs() {
            return Ok(sys);
        }
    }
    Err(Error::Degenerate(format!(
        "no invertible frame operator in {MAX_RETRIES} draws for k = {:?}, d = {}",
        params.k(),
        params.d()
    )))
}

/// Random general (non-projective) system with Gaussian blocks.
pub fn random_system(params: &Parameters, seed: u64) -> Result<ReconstructionSystem> {
    for attempt in 0..MAX_RETRIES {
        let mut rng = rng::stream(seed, attempt);
        let blocks = params
            .k()
            .iter()
            .map(|&k| rng::complex_gaussian(&mut rng, k, params.d()))
            .collect();
        let sys = ReconstructionSystem::with_params(params.clone(), blocks)?;
        if sys.is_rs() {
            return Ok(sys);
        }
    }
    Err(Error::Degenerate("random system draws were all singular".into()))
}

/// `Φ(U) = (U_i U_i*)_i`.
pub fn phi(iso: &IsometryTuple) -> ProjectionTuple {
    ProjectionTuple {
        projections: iso.isometries.iter().map(|u| u * u.adjoint()).collect(),
    }
}

/// `S_v(Q) = Σ v_i² Q_i`.
pub fn s_v_map(proj: &ProjectionTuple, weights: &Weights) -> Result<CMatrix> {
    if proj.projections.len() != weights.len() {
        return Err(Error::structure("weights and projections differ in length"));
    }
    let d = proj.projections.first().map_or(0, |p| p.nrows());
    let mut s = CMatrix::zeros(d, d);
    for (p, &v) in proj.projections.iter().zip(weights.values()) {
        s += p.scale(v * v);
    }
    Ok(s)
}

/// `Ψ_v(U) = Σ v_i² U_i U_i*`.
pub fn psi_v(iso: &IsometryTuple, weights: &Weights) -> Result<CMatrix> {
    if iso.isometries.len() != weights.len() {
        return Err(Error::structure("weights and isometries differ in length"));
    }
    let d = iso.isometries.first().map_or(0, |u| u.nrows());
    let mut s = CMatrix::zeros(d, d);
    for (u, &v) in iso.isometries.iter().zip(weights.values()) {
        s += (u * u.adjoint()).scale(v * v);
    }
    Ok(s)
}

/// `h_P(Q)`: unitary polar factor of `QP + (I − Q)(I − P)`.
pub fn polar_chart(p: &CMatrix, q: &CMatrix) -> Result<CMatrix> {
    let d = p.nrows();
    let dist = linalg::eigenvalues(&(q - p))
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    if dist >= CHART_BOUNDARY {
        return Err(Error::argument(format!(
            "Q lies outside the chart of P: ‖Q − P‖ = {dist}"
        )));
    }
    if p == q {
        return Ok(linalg::identity(d));
    }
    let id = linalg::identity(d);
    let m = q * p + (&id - q) * (&id - p);
    let (u, smin) = linalg::polar_unitary(&m);
    if smin < tol::RANK {
        return Err(Error::Degenerate(format!(
            "polar factor ill-conditioned (σ_min = {smin:e})"
        )));
    }
    Ok(u)
}

/// `s_{P,W}(Q) = h_P(Q) W`, an isometry `X` with `X X* = Q`.
pub fn local_section(p: &CMatrix, q: &CMatrix, w: &CMatrix) -> Result<CMatrix> {
    let r = linalg::spectral_norm(&(w * w.adjoint() - p));
    if r > 1e-8 {
        return Err(Error::argument(format!("W W* ≠ P (residual {r:e})")));
    }
    if p == q {
        return Ok(w.clone());
    }
    Ok(polar_chart(p, q)? * w)
}

/// `U · V = (P_{K_i} U T_V)_i` for `U ∈ Gl(n)`.
pub fn left_act(u: &CMatrix, sys: &ReconstructionSystem) -> Result<ReconstructionSystem> {
    let n = sys.n();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::structure(format!("U must be {n}×{n}")));
    }
    let chk = linalg::check_invertible(u, tol::RANK);
    if !chk.invertible {
        return Err(Error::Singular {
            what: "U in Gl(n)".into(),
            sigma_min: chk.sigma_min,
            threshold: chk.threshold,
        });
    }
    let analysis = u * sys.analysis();
    ReconstructionSystem::from_synthesis(sys.params().clone(), &analysis.adjoint())
}

/// Compares the two descriptions of the dual set: whether `U · V#` is a dual
/// of `V`, against the predicate `P U* P = P` with `P = P_{R(T_V)}`. Returns
/// `true` when both sides agree.
pub fn dual_parametrization_probe(sys: &ReconstructionSystem, u: &CMatrix, tol: f64) -> Result<bool> {
    let dual = sys.canonical_dual()?;
    let w = left_act(u, &dual)?;
    let dual_side = is_dual(&w, sys, tol)?;
    let p = range_projection(sys)?;
    let predicate = linalg::spectral_norm(&(&p * u.adjoint() * &p - &p)) <= tol;
    Ok(dual_side == predicate)
}

/// `P_{R(T_V)} = T_V S_V⁻¹ T_V*`.
pub fn range_projection(sys: &ReconstructionSystem) -> Result<CMatrix> {
    let t = sys.analysis();
    let sinv = sys.frame_operator_inverse()?;
    Ok(linalg::hermitian_part(&(&t * sinv * t.adjoint())))
}

/// An invertible `U` with `U · V = W`, built as `T_W S_V⁻¹ T_V*` on `R(T_V)`
/// plus an isometric identification of the orthogonal complements.
pub fn connecting_operator(v: &ReconstructionSystem, w: &ReconstructionSystem) -> Result<CMatrix> {
    if v.params() != w.params() {
        return Err(Error::structure("systems have different parameters"));
    }
    if !w.is_rs() {
        return Err(Error::argument("target is not a reconstruction system"));
    }
    let tv = v.analysis();
    let tw = w.analysis();
    let sinv = v.frame_operator_inverse()?;
    let perp_v = linalg::orthonormal_complement(&linalg::range_basis(&tv, tol::RANK));
    let perp_w = linalg::orthonormal_complement(&linalg::range_basis(&tw, tol::RANK));
    Ok(&tw * sinv * tv.adjoint() + perp_w * perp_v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral_norm;
    use crate::system::coordinate_block;

    #[test]
    fn canonical_columns_give_diagonal_projections() {
        let iso = IsometryTuple::new(
            vec![coordinate_block(&[1.0, 1.0], 0, 3).adjoint()],
            1e-12,
        )
        .unwrap();
        let pt = phi(&iso);
        let p = &pt.projections()[0];
        assert!(spectral_norm(&(p - linalg::real_diagonal(&[1.0, 1.0, 0.0]))) < 1e-15);
    }

    #[test]
    fn random_projective_is_deterministic() {
        let params = Parameters::new(vec![3, 2, 2], 4).unwrap();
        let w = Weights::ones(3);
        let a = random_projective(&params, &w, 7).unwrap();
        let b = random_projective(&params, &w, 7).unwrap();
        assert_eq!(a, b);
        let c = random_projective(&params, &w, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn oversized_block_rejected() {
        let params = Parameters::new(vec![3], 2).unwrap();
        assert!(matches!(
            random_projective(&params, &Weights::ones(1), 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn section_at_base_point_is_identity() {
        let mut r = rng::stream(1, 0);
        let w = random_isometry(&mut r, 4, 2);
        let p = &w * w.adjoint();
        let x = local_section(&p, &p, &w).unwrap();
        assert_eq!(x, w);
    }

    #[test]
    fn far_projection_is_out_of_chart() {
        let p = linalg::real_diagonal(&[1.0, 0.0]);
        let q = linalg::real_diagonal(&[0.0, 1.0]);
        let w = coordinate_block(&[1.0], 0, 2).adjoint();
        assert!(matches!(local_section(&p, &q, &w), Err(Error::Argument(_))));
    }
}
