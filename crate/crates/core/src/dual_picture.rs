//! Spectra of frame operators of dual systems.
//!
//! A vector `μ` is the spectrum of `S_W` for some dual `W` of `V` exactly when
//! `(ρ, 0_{n−d})` is the spectrum of a rank-`d` compression of `D_n(μ)`,
//! `ρ = λ(S_V⁻¹)`; by Fan–Pall this is an interlacing condition.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::certificate::{Certificate, Family, Violation};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::rng;
use crate::system::{coordinate_block, ReconstructionSystem, SpectrumVector};
use crate::tol;

/// Spectral residual accepted by [`construct_dual_with_spectrum`].
pub const CONSTRUCTION_TOL: f64 = 1e-6;

/// `λ(S_V⁻¹)`, non-increasing.
pub fn inverse_spectrum(sys: &ReconstructionSystem) -> Result<Vec<f64>> {
    let chk = sys.invertibility();
    if !chk.invertible {
        return Err(Error::Singular {
            what: "frame operator S_V".into(),
            sigma_min: chk.sigma_min,
            threshold: chk.threshold,
        });
    }
    let s = sys.spectrum();
    Ok(s.as_slice().iter().rev().map(|x| 1.0 / x).collect())
}

/// Interval `[lower_j, upper_j]` allowed for `μ_j` (upper is `∞` when `j ≤ n − d`).
pub fn interlacing_bounds(sys: &ReconstructionSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho = inverse_spectrum(sys)?;
    let (d, n) = (sys.d(), sys.n());
    let gap = n - d;
    let upper = (0..d)
        .map(|j| if j >= gap { rho[j - gap] } else { f64::INFINITY })
        .collect();
    Ok((rho, upper))
}

fn slack(rho: &[f64]) -> f64 {
    tol::SPECTRAL_SLACK * rho[0].max(1.0)
}

fn check_mu(sys: &ReconstructionSystem, mu: &SpectrumVector) -> Result<()> {
    if mu.len() != sys.d() {
        return Err(Error::argument(format!(
            "spectrum has length {}, expected d = {}",
            mu.len(),
            sys.d()
        )));
    }
    if mu.as_slice().iter().any(|&x| x.is_nan() || x <= 0.0 || !x.is_finite()) {
        return Err(Error::argument("dual spectra must be strictly positive"));
    }
    Ok(())
}

/// Fan–Pall membership of `μ` in the spectral picture of the duals of `sys`.
pub fn dual_picture_contains(sys: &ReconstructionSystem, mu: &SpectrumVector) -> Result<Certificate> {
    check_mu(sys, mu)?;
    let (rho, upper) = interlacing_bounds(sys)?;
    let eps = slack(&rho);
    let x = mu.as_slice();
    for j in 0..x.len() {
        if x[j] < rho[j] - eps {
            return Ok(Certificate::violation(Violation {
                family: Family::Mayor2d,
                index: Some(j + 1),
                tuple: None,
                lhs: x[j],
                rhs: rho[j],
            }));
        }
    }
    let (d, n) = (sys.d(), sys.n());
    if n < 2 * d {
        // μ_{d−i+1} ≤ λ_{2d−n−i+1}(S_V⁻¹), i = 1..2d−n
        for i in 1..=(2 * d - n) {
            let j = d - i;
            if x[j] > upper[j] + eps {
                return Ok(Certificate::violation(Violation {
                    family: Family::Menor2d,
                    index: Some(i),
                    tuple: None,
                    lhs: x[j],
                    rhs: upper[j],
                }));
            }
        }
    }
    Ok(Certificate::member())
}

/// One codimension-one compression step: an isometry `Y` (`p × (p−1)`) with
/// `Yᵀ diag(a) Y = diag(b)` for interlacing `a_1 ≥ b_1 ≥ a_2 ≥ … ≥ b_{p−1} ≥ a_p`.
fn codim_one(a: &[f64], b: &[f64]) -> DMatrix<f64> {
    let p = a.len();
    debug_assert_eq!(b.len() + 1, p);
    let scale = a.iter().chain(b).fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let tol = 1e-13 * scale;
    // alternating merge a_1, b_1, a_2, …; entries (value, is_a, index)
    let mut merged: Vec<(f64, bool, usize)> = Vec::with_capacity(2 * p - 1);
    for i in 0..p {
        merged.push((a[i], true, i));
        if i < b.len() {
            merged.push((b[i], false, i));
        }
    }
    let mut y = DMatrix::zeros(p, p - 1);
    // Equal neighbours deflate: e_i is itself an eigenvector inside u⊥.
    loop {
        let hit = (0..merged.len().saturating_sub(1)).find(|&t| (merged[t].0 - merged[t + 1].0).abs() <= tol);
        let Some(t) = hit else { break };
        let (first, second) = (merged[t], merged[t + 1]);
        let (ai, bj) = if first.1 { (first.2, second.2) } else { (second.2, first.2) };
        y[(ai, bj)] = 1.0;
        merged.drain(t..t + 2);
    }
    let av: Vec<usize> = merged.iter().filter(|e| e.1).map(|e| e.2).collect();
    let bv: Vec<usize> = merged.iter().filter(|e| !e.1).map(|e| e.2).collect();
    if bv.is_empty() {
        return y;
    }
    // |u_i|² = Π_j (a_i − b_j) / Π_{k≠i} (a_i − a_k)
    let u: Vec<f64> = av
        .iter()
        .map(|&i| {
            let others = av.iter().filter(|&&k| k != i);
            let w: f64 = bv
                .iter()
                .zip(others)
                .map(|(&j, &k)| (a[i] - b[j]) / (a[i] - a[k]))
                .product();
            w.max(0.0).sqrt()
        })
        .collect();
    for &j in &bv {
        let col: Vec<f64> = av.iter().zip(&u).map(|(&i, &ui)| ui / (a[i] - b[j])).collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (&i, x) in av.iter().zip(&col) {
            y[(i, j)] = x / norm;
        }
    }
    y
}

/// Isometry `X` (`n × d`) with `X* D_n(α) X = diag(β)` when `β` interlaces `α`
/// with gap `n − d` (`α_j ≥ β_j ≥ α_{j+n−d}`), via the chain
/// `α^{(s)}_j = max(β_j, α_{j+s})`.
pub fn fan_pall_compression(alpha: &[f64], beta: &[f64]) -> Result<DMatrix<f64>> {
    let (n, d) = (alpha.len(), beta.len());
    if d > n || d == 0 {
        return Err(Error::argument("compression target must be nonempty and not longer"));
    }
    let level = |s: usize| -> Vec<f64> {
        (0..n - s)
            .map(|j| {
                let b = beta.get(j).copied().unwrap_or(f64::NEG_INFINITY);
                b.max(alpha[j + s])
            })
            .collect()
    };
    let mut x = DMatrix::<f64>::identity(n, n);
    let mut cur = alpha.to_vec();
    for s in 0..n - d {
        let next = level(s + 1);
        x *= codim_one(&cur, &next);
        cur = next;
    }
    Ok(x)
}

/// A dual `W` of `sys` with `λ(S_W) = μ`.
pub fn construct_dual_with_spectrum(sys: &ReconstructionSystem, mu: &SpectrumVector) -> Result<ReconstructionSystem> {
    let cert = dual_picture_contains(sys, mu)?;
    if !cert.member {
        let v = cert.violated.expect("non-member has a violation");
        return Err(Error::argument(format!(
            "μ is not the spectrum of a dual: {:?} inequality {} fails ({} vs {})",
            v.family,
            v.index.unwrap_or(0),
            v.lhs,
            v.rhs
        )));
    }
    let (d, n) = (sys.d(), sys.n());
    let (rho, upper) = interlacing_bounds(sys)?;
    // project μ into the interlacing box so the chain is exactly consistent
    let mut target: Vec<f64> = mu.as_slice().to_vec();
    for j in 0..d {
        target[j] = target[j].max(rho[j]).min(upper[j]);
        if j > 0 {
            target[j] = target[j].min(target[j - 1]);
        }
    }
    let mut alpha = target.clone();
    alpha.resize(n, 0.0);
    let x_real = fan_pall_compression(&alpha, &rho)?;

    // Rotate X to the eigenbasis of its own compression.
    let x0 = linalg::from_real(&x_real);
    let d_n = linalg::real_diagonal(&alpha);
    let comp = linalg::hermitian_part(&(x0.adjoint() * &d_n * &x0));
    let x = x0 * linalg::eigh(&comp).vectors;

    // Eigenvectors of G_V† in `ρ↓` order: columns T_V e_j / √s_j with s ascending.
    let t_v = sys.analysis();
    let se = linalg::eigh(&sys.frame_operator());
    let mut z = CMatrix::zeros(n, d);
    for j in 0..d {
        let src = d - 1 - j;
        let col = &t_v * se.vectors.column(src) * c(1.0 / se.values[src].sqrt());
        z.set_column(j, &col);
    }
    let w = &x * z.adjoint() + linalg::orthonormal_complement(&x) * linalg::orthonormal_complement(&z).adjoint();

    // auxiliary system U with T_U = [diag(√μ); 0], so G_U = D_n(μ)
    let sqrt_mu: Vec<f64> = target.iter().map(|x| x.sqrt()).collect();
    let mut t_u = CMatrix::zeros(n, d);
    t_u.view_mut((0, 0), (d, d)).copy_from(&coordinate_block(&sqrt_mu, 0, d));
    let v_d = t_u.adjoint() * &w * &t_v;
    let synth = v_d.adjoint() * t_u.adjoint() * &w;

    // Remove the rounding error in T_W* T_V = I by projecting onto the dual set.
    let s_inv = sys.frame_operator_inverse()?;
    let defect = linalg::identity(d) - &synth * &t_v;
    let synth = synth + defect * s_inv * t_v.adjoint();
    let out = ReconstructionSystem::from_synthesis(sys.params().clone(), &synth)?;

    let residual = linalg::max_abs_diff(out.spectrum().as_slice(), mu.as_slice());
    if residual.is_nan() || residual > CONSTRUCTION_TOL {
        return Err(Error::Convergence {
            what: "dual with prescribed spectrum".into(),
            residual,
        });
    }
    Ok(out)
}

/// `tr S_V⁻² = FP(V#)`, the smallest frame potential among duals.
pub fn dual_potential_floor(sys: &ReconstructionSystem) -> Result<f64> {
    Ok(inverse_spectrum(sys)?.iter().map(|x| x * x).sum())
}

/// `FP(W) = tr S_W²`.
pub fn frame_potential(sys: &ReconstructionSystem) -> f64 {
    let s = sys.frame_operator();
    linalg::trace_re(&(&s * &s))
}

/// Random dual `T_W* = T_{V#}* + A` with `A T_V = 0`; returns `W` and `A`.
pub fn random_dual(sys: &ReconstructionSystem, rng: &mut impl Rng, scale: f64) -> Result<(ReconstructionSystem, CMatrix)> {
    let (d, n) = (sys.d(), sys.n());
    let s_inv = sys.frame_operator_inverse()?;
    let t_v = sys.analysis();
    let q = &t_v * &s_inv * t_v.adjoint();
    let b = rng::complex_gaussian(rng, d, n).scale(scale);
    let a = b * (linalg::identity(n) - q);
    let synth = s_inv * t_v.adjoint() + &a;
    Ok((ReconstructionSystem::from_synthesis(sys.params().clone(), &synth)?, a))
}

/// Random member of the dual spectral picture; each coordinate lands on an
/// endpoint of its admissible interval with probability `boundary`.
pub fn random_member(sys: &ReconstructionSystem, rng: &mut impl Rng, boundary: f64) -> Result<SpectrumVector> {
    let (rho, upper) = interlacing_bounds(sys)?;
    let spread = 2.0 * rho[0];
    let mut out = Vec::with_capacity(rho.len());
    let mut prev = f64::INFINITY;
    for j in 0..rho.len() {
        let lo = rho[j];
        let hi = upper[j].min(prev).min(lo + spread);
        let u = rng::uniform(rng);
        let x = if u < boundary / 2.0 {
            lo
        } else if u < boundary {
            hi
        } else {
            lo + (hi - lo) * rng::uniform(rng)
        };
        out.push(x);
        prev = x;
    }
    SpectrumVector::new(out)
}

/// Membership of random convex combinations of random members.
pub fn dual_picture_convexity_probe(sys: &ReconstructionSystem, trials: usize, seed: u64) -> Result<bool> {
    let verdicts: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let mut g = rng::stream(seed, t);
            let a = random_member(sys, &mut g, 0.5)?;
            let b = random_member(sys, &mut g, 0.5)?;
            let s = rng::uniform(&mut g);
            let mix: Vec<f64> = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| s * x + (1.0 - s) * y)
                .collect();
            Ok(dual_picture_contains(sys, &SpectrumVector::from_unsorted(mix))?.member)
        })
        .collect::<Result<_>>()?;
    Ok(verdicts.into_iter().all(|v| v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_system;
    use crate::linalg::identity;
    use crate::system::{is_dual, Parameters};

    fn parseval(d: usize, copies: usize) -> ReconstructionSystem {
        let s = 1.0 / (copies as f64).sqrt();
        ReconstructionSystem::new(vec![identity(d).scale(s); copies]).unwrap()
    }

    #[test]
    fn codim_one_exact() {
        let a = [5.0, 3.0, 3.0, 1.0];
        let b = [4.0, 3.0, 2.0];
        let y = codim_one(&a, &b);
        let prod = y.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&a)) * &y;
        let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&b));
        assert!((prod - expect).norm() < 1e-13);
        assert!((y.transpose() * &y - DMatrix::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn compression_chain() {
        let alpha = [6.0, 4.0, 2.0, 0.0, 0.0];
        let beta = [5.0, 3.0];
        let x = fan_pall_compression(&alpha, &beta).unwrap();
        let prod = x.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&alpha)) * &x;
        let ev = prod.symmetric_eigenvalues();
        let mut ev: Vec<f64> = ev.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        assert!(linalg::max_abs_diff(&ev, &beta) < 1e-12);
    }

    #[test]
    fn parseval_membership() {
        let v = parseval(3, 2);
        let ok = SpectrumVector::new(vec![1.5, 1.0, 1.0]).unwrap();
        assert!(dual_picture_contains(&v, &ok).unwrap().member);
        let bad = SpectrumVector::new(vec![2.0, 2.0, 0.5]).unwrap();
        let cert = dual_picture_contains(&v, &bad).unwrap();
        let viol = cert.violated.unwrap();
        assert_eq!(viol.family, Family::Mayor2d);
        assert_eq!(viol.index, Some(3));
        let w = construct_dual_with_spectrum(&v, &ok).unwrap();
        assert!(is_dual(&w, &v, 1e-10).unwrap());
        assert!(linalg::max_abs_diff(w.spectrum().as_slice(), ok.as_slice()) < 1e-9);
    }

    #[test]
    fn canonical_spectrum_is_member() {
        let params = Parameters::new(vec![2, 1], 2).unwrap();
        let v = random_system(&params, 3).unwrap();
        let mu = v.canonical_dual().unwrap().spectrum();
        assert!(dual_picture_contains(&v, &mu).unwrap().member);
        let w = construct_dual_with_spectrum(&v, &mu).unwrap();
        assert!(linalg::max_abs_diff(w.spectrum().as_slice(), mu.as_slice()) < 1e-9);
    }

    #[test]
    fn nonpositive_rejected() {
        let v = parseval(2, 2);
        let mu = SpectrumVector::new(vec![1.0, 0.0]).unwrap();
        assert!(matches!(dual_picture_contains(&v, &mu), Err(Error::Argument(_))));
    }

    #[test]
    fn floor_of_diagonal() {
        let v = ReconstructionSystem::new(vec![linalg::real_diagonal(&[1.0, 2.0f64.sqrt()])]).unwrap();
        assert!((dual_potential_floor(&v).unwrap() - 1.25).abs() < 1e-14);
    }

    #[test]
    fn random_duals_are_dual() {
        let params = Parameters::new(vec![2, 2, 1], 3).unwrap();
        let v = random_system(&params, 11).unwrap();
        let mut g = rng::stream(1, 0);
        for _ in 0..10 {
            let (w, _) = random_dual(&v, &mut g, 1.0).unwrap();
            assert!(is_dual(&w, &v, 1e-9).unwrap());
        }
    }
}
