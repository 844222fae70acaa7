//! Riemannian gradient descent of `tr S² + tr S⁻²` over tuples of isometries,
//! with `S = Σ v_i² U_i U_i*`.

use crate::error::{Error, Result};
use crate::geometry::{self, IsometryTuple};
use crate::linalg::{self, CMatrix};
use crate::rng;
use crate::system::{Parameters, ReconstructionSystem, SpectrumVector, Weights};

#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub max_iterations: usize,
    /// Stop once the Riemannian gradient norm falls below this (relative to `1 + τ`).
    pub gradient_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            max_iterations: 20_000,
            gradient_tol: 1e-11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOutcome {
    pub system: ReconstructionSystem,
    pub value: f64,
    pub iterations: usize,
    pub grad_norm: f64,
}

fn frame(us: &[CMatrix], w2: &[f64], d: usize) -> CMatrix {
    let mut s = CMatrix::zeros(d, d);
    for (u, &w) in us.iter().zip(w2) {
        s += (u * u.adjoint()).scale(w);
    }
    linalg::hermitian_part(&s)
}

/// `f` and `H = 2S − 2S⁻³`; `None` when `S` is singular.
fn evaluate(us: &[CMatrix], w2: &[f64], d: usize) -> Option<(f64, CMatrix)> {
    let e = linalg::eigh(&frame(us, w2, d));
    if e.values.last().is_none_or(|&x| x <= 1e-12 * e.values[0].max(1.0)) {
        return None;
    }
    let f = e.values.iter().map(|&x| x * x + 1.0 / (x * x)).sum();
    let hv: Vec<f64> = e.values.iter().map(|&x| 2.0 * x - 2.0 / (x * x * x)).collect();
    let h = &e.vectors * linalg::real_diagonal(&hv) * e.vectors.adjoint();
    Some((f, h))
}

fn riemannian_gradient(us: &[CMatrix], w2: &[f64], h: &CMatrix) -> (Vec<CMatrix>, f64) {
    let xi: Vec<CMatrix> = us
        .iter()
        .zip(w2)
        .map(|(u, &w)| {
            let g = (h * u).scale(2.0 * w);
            &g - u * (u.adjoint() * &g)
        })
        .collect();
    let g2 = xi.iter().map(|x| x.norm_squared()).sum();
    (xi, g2)
}

fn retract(u: &CMatrix, step: &CMatrix, t: f64) -> CMatrix {
    let moved = u - step.scale(t);
    let s = linalg::svd(&moved);
    &s.u * s.v.adjoint()
}

/// Armijo descent from `start`; the returned system is `γ(U)`.
pub fn descend(
    params: &Parameters,
    weights: &Weights,
    start: IsometryTuple,
    opts: &DescentOptions,
) -> Result<DescentOutcome> {
    weights.check_against(params)?;
    let d = params.d();
    let w2: Vec<f64> = weights.values().iter().map(|v| v * v).collect();
    let mut us: Vec<CMatrix> = start.isometries().to_vec();
    if us.len() != params.m() || us.iter().zip(params.k()).any(|(u, &k)| u.shape() != (d, k)) {
        return Err(Error::structure("starting isometries do not match the parameters"));
    }
    let (mut f, h) = evaluate(&us, &w2, d)
        .ok_or_else(|| Error::Degenerate("starting frame operator is singular".into()))?;
    let scale = 1.0 + weights.tau(params);
    let mut t = 1.0 / scale;
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0;
    let (mut xi, mut g2) = riemannian_gradient(&us, &w2, &h);
    while iterations < opts.max_iterations {
        grad_norm = g2.sqrt();
        if grad_norm <= opts.gradient_tol * scale {
            break;
        }
        iterations += 1;
        t *= 2.0;
        let mut accepted = false;
        while t > 1e-18 {
            let cand: Vec<CMatrix> = us.iter().zip(&xi).map(|(u, x)| retract(u, x, t)).collect();
            if let Some((fc, hc)) = evaluate(&cand, &w2, d) {
                let armijo = fc <= f - 1e-4 * t * g2;
                // below round-off in f, fall back to decrease of the gradient norm
                let flat = (fc - f).abs() <= 64.0 * f64::EPSILON * f.abs();
                let (xc, gc) = riemannian_gradient(&cand, &w2, &hc);
                if armijo || (flat && gc < g2) {
                    us = cand;
                    f = fc;
                    xi = xc;
                    g2 = gc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let iso = IsometryTuple::new(us, 1e-8)?;
    let system = geometry::gamma(&iso, weights)?;
    Ok(DescentOutcome {
        value: f,
        system,
        iterations,
        grad_norm,
    })
}

/// A minimizer of the potential attaining `λ_v`, from descent with up to
/// `restarts` random starts; the closest attempt is reported on failure.
pub fn construct_minimizer(
    params: &Parameters,
    weights: &Weights,
    lambda_v: &SpectrumVector,
    seed: u64,
    restarts: usize,
    tol: f64,
) -> Result<DescentOutcome> {
    let mut best = f64::INFINITY;
    for attempt in 0..restarts.max(1) as u64 {
        let mut g = rng::stream(rng::derive(seed, attempt), 0);
        let start = geometry::random_isometries(&mut g, params)?;
        let out = match descend(params, weights, start, &DescentOptions::default()) {
            Ok(o) => o,
            Err(Error::Degenerate(_)) => continue,
            Err(e) => return Err(e),
        };
        let gap = linalg::max_abs_diff(out.system.spectrum().as_slice(), lambda_v.as_slice());
        if gap <= tol {
            return Ok(out);
        }
        best = best.min(gap);
    }
    Err(Error::Convergence {
        what: format!("descent toward λ_v after {} restarts", restarts.max(1)),
        residual: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_decreases_and_stays_projective() {
        let p = Parameters::new(vec![2, 1, 1], 3).unwrap();
        let w = Weights::new(vec![1.0, 0.8, 0.6]).unwrap();
        let mut g = rng::stream(7, 0);
        let start = geometry::random_isometries(&mut g, &p).unwrap();
        let f0 = potential_of(&geometry::gamma(&start, &w).unwrap());
        let out = descend(&p, &w, start, &DescentOptions::default()).unwrap();
        assert!(out.value <= f0 + 1e-12);
        assert!(out.system.projective_check(1e-8).is_some());
    }

    fn potential_of(sys: &ReconstructionSystem) -> f64 {
        sys.spectrum().as_slice().iter().map(|&x| x * x + 1.0 / (x * x)).sum()
    }

    #[test]
    fn final_example_minimizer() {
        let p = Parameters::new(vec![3, 2, 2], 4).unwrap();
        let w = Weights::ones(3);
        let lambda = SpectrumVector::new(vec![2.0, 2.0, 1.5, 1.5]).unwrap();
        let out = construct_minimizer(&p, &w, &lambda, 3, 20, 1e-6).unwrap();
        assert!((out.value - 125.0 / 9.0).abs() < 1e-9);
    }
}
