//! The joint frame potential `FP(V, W) = tr S_V² + tr S_W²`, its optimal
//! spectrum `λ_v` and the structure of its minimizers.

mod commutant;
mod descent;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

pub use commutant::{
    commutant, tight_decomposition, CommutantBasis, Decomposition, IrreducibleSummand, TightComponent,
    CLUSTER_TOL,
};
pub use descent::{construct_minimizer, descend, DescentOptions, DescentOutcome};

use crate::error::{Error, Result};
use crate::geometry;
use crate::lr_horn::HornSystem;
use crate::qp::{self, LinearConstraint, QuadraticProgram};
use crate::rng;
use crate::system::{Parameters, ReconstructionSystem, SpectrumVector, Weights};

/// `F(x) = Σ x_i² + x_i⁻²`.
pub fn objective(x: &[f64]) -> f64 {
    x.iter().map(|&t| t * t + 1.0 / (t * t)).sum()
}

fn gradient(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&t| 2.0 * t - 2.0 / (t * t * t)).collect()
}

fn hessian_diag(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&t| 2.0 + 6.0 / t.powi(4)).collect()
}

/// `tr S_V² + tr S_W²`.
pub fn joint_potential(v: &ReconstructionSystem, w: &ReconstructionSystem) -> Result<f64> {
    if v.d() != w.d() {
        return Err(Error::structure(format!("dimensions {} and {} differ", v.d(), w.d())));
    }
    Ok(crate::dual_picture::frame_potential(v) + crate::dual_picture::frame_potential(w))
}

/// `(τ⁴ + d⁴) / (d τ²)`.
pub fn universal_lower_bound(params: &Parameters, weights: &Weights) -> Result<f64> {
    weights.check_against(params)?;
    let tau = weights.tau(params);
    let d = params.d() as f64;
    Ok((tau.powi(4) + d.powi(4)) / (d * tau * tau))
}

#[derive(Debug, Clone)]
pub struct SpectrumOptions {
    /// Starting point for the Newton iteration; the uniform vector when absent.
    pub start: Option<Vec<f64>>,
    /// Fall back to descent over random systems when the Horn system is capped.
    pub allow_sampling: bool,
    pub seed: u64,
    /// Restarts in sampling mode.
    pub restarts: usize,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            start: None,
            allow_sampling: true,
            seed: 0,
            restarts: 100,
        }
    }
}

impl SpectrumOptions {
    pub fn certified() -> Self {
        SpectrumOptions {
            allow_sampling: false,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimalSpectrum {
    pub lambda: SpectrumVector,
    pub p_v: f64,
    /// False when produced by descent instead of the Horn–Klyachko program.
    pub certified: bool,
    pub iterations: usize,
    /// Whether the floor `μ_d ≥ ε` ended up active.
    pub floor_active: bool,
}

/// Newton iterations on `F` over the Horn–Klyachko polytope intersected
/// with the sorted cone and `μ_d ≥ ε`.
pub fn minimize_over_polytope(horn: &HornSystem, start: Option<&[f64]>) -> Result<OptimalSpectrum> {
    let d = horn.d();
    let tau = horn.tau();
    let eps = 1e-6 * tau / d as f64;
    let unit = |i: usize, s: f64| {
        let mut v = DVector::zeros(d);
        v[i] = s;
        v
    };
    let equalities = vec![LinearConstraint::new(DVector::from_element(d, 1.0), tau)];
    let mut inequalities = Vec::with_capacity(d + horn.rows().len());
    for i in 0..d.saturating_sub(1) {
        inequalities.push(LinearConstraint::new(unit(i, 1.0) - unit(i + 1, 1.0), 0.0));
    }
    inequalities.push(LinearConstraint::new(unit(d - 1, 1.0), eps));
    for row in horn.rows() {
        let mut n = DVector::zeros(d);
        for &j in row.j0.entries() {
            n[j - 1] = -1.0;
        }
        inequalities.push(LinearConstraint::new(n, -row.rhs));
    }

    let feasible = |x: &[f64]| {
        let slack = horn.slack();
        x.iter().all(|&t| t >= eps - slack)
            && x.windows(2).all(|w| w[0] >= w[1] - slack)
            && horn.max_violation(x) <= slack
    };
    let mut x: Vec<f64> = match start {
        Some(s) if s.len() == d => s.iter().map(|&t| t.max(eps)).collect(),
        Some(s) => {
            return Err(Error::argument(format!("start has length {}, expected {d}", s.len())));
        }
        None => vec![tau / d as f64; d],
    };
    let mut is_feasible = feasible(&x);
    let mut iterations = 0;
    let scale = 1.0 + tau;
    for _ in 0..200 {
        iterations += 1;
        let g = gradient(&x);
        let h = hessian_diag(&x);
        let hx: Vec<f64> = h.iter().zip(&x).map(|(a, b)| a * b).collect();
        let prog = QuadraticProgram {
            hessian: DMatrix::from_diagonal(&DVector::from_vec(h.clone())),
            linear: DVector::from_iterator(d, g.iter().zip(&hx).map(|(a, b)| a - b)),
            equalities: equalities.clone(),
            inequalities: inequalities.clone(),
        };
        let y: Vec<f64> = match qp::solve(&prog) {
            Ok(sol) => sol.x.iter().copied().collect(),
            Err(Error::Infeasible(msg)) => {
                return Err(Error::Structure(format!(
                    "internal: the spectral polytope is empty ({msg}); valid parameters never do this"
                )))
            }
            Err(e) => return Err(e),
        };
        if !is_feasible {
            x = y;
            is_feasible = true;
            continue;
        }
        let step: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let size = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if size <= 1e-15 * scale {
            break;
        }
        let f0 = objective(&x);
        let slope: f64 = g.iter().zip(&step).map(|(a, b)| a * b).sum();
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + t * s).collect();
            if objective(&cand) <= f0 + 1e-4 * t * slope {
                x = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || t * size <= 1e-15 * scale {
            break;
        }
    }
    let floor_active = x[d - 1] <= eps * (1.0 + 1e-6);
    let lambda = SpectrumVector::from_unsorted(x);
    let p_v = objective(lambda.as_slice());
    Ok(OptimalSpectrum {
        lambda,
        p_v,
        certified: true,
        iterations,
        floor_active,
    })
}

/// The optimal spectrum `λ_v` and `p_v = F(λ_v)`.
pub fn optimal_spectrum(params: &Parameters, weights: &Weights, opts: &SpectrumOptions) -> Result<OptimalSpectrum> {
    weights.check_against(params)?;
    match HornSystem::build(params, weights) {
        Ok(horn) => minimize_over_polytope(&horn, opts.start.as_deref()),
        Err(Error::Cap(msg)) if opts.allow_sampling => sampled_spectrum(params, weights, opts).map_err(|e| match e {
            Error::Cap(_) => Error::Cap(msg),
            other => other,
        }),
        Err(e) => Err(e),
    }
}

/// Non-certified estimate: best descent result over random starts.
pub fn sampled_spectrum(params: &Parameters, weights: &Weights, opts: &SpectrumOptions) -> Result<OptimalSpectrum> {
    let runs: Vec<(f64, u64, DescentOutcome)> = (0..opts.restarts.max(1) as u64)
        .into_par_iter()
        .map(|t| -> Result<_> {
            let seed = rng::derive(opts.seed, t);
            let mut g = rng::stream(seed, 0);
            let start = geometry::random_isometries(&mut g, params)?;
            let out = descend(params, weights, start, &DescentOptions::default())?;
            Ok((out.value, seed, out))
        })
        .collect::<Result<_>>()?;
    let best = runs
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one restart");
    let lambda = best.2.system.spectrum();
    let tau = weights.tau(params);
    Ok(OptimalSpectrum {
        p_v: objective(lambda.as_slice()),
        floor_active: lambda.min() <= 1e-6 * tau / params.d() as f64,
        lambda,
        certified: false,
        iterations: best.2.iterations,
    })
}

/// `λ(S_V) = λ_v` within `tol` per entry.
pub fn attains(sys: &ReconstructionSystem, lambda_v: &SpectrumVector, tol: f64) -> bool {
    sys.spectrum().len() == lambda_v.len()
        && crate::linalg::max_abs_diff(sys.spectrum().as_slice(), lambda_v.as_slice()) <= tol
}

/// Optimal spectrum plus, when a minimizer is supplied, its tight structure.
#[derive(Debug, Clone)]
pub struct MinimizerCertificate {
    pub optimum: OptimalSpectrum,
    /// `(σ_j, d_j)` read off `λ_v`.
    pub sigma: Vec<(f64, usize)>,
    pub decomposition: Option<Decomposition>,
}

impl MinimizerCertificate {
    pub fn new(optimum: OptimalSpectrum, decomposition: Option<Decomposition>) -> Self {
        let vals = optimum.lambda.as_slice();
        let tol = CLUSTER_TOL * optimum.lambda.max().max(1.0);
        let sigma = crate::linalg::cluster_sorted(vals, tol)
            .into_iter()
            .map(|r| (vals[r.clone()].iter().sum::<f64>() / r.len() as f64, r.len()))
            .collect();
        MinimizerCertificate {
            optimum,
            sigma,
            decomposition,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(k: Vec<usize>, d: usize, v: Vec<f64>) -> OptimalSpectrum {
        let p = Parameters::new(k, d).unwrap();
        let w = Weights::new(v).unwrap();
        optimal_spectrum(&p, &w, &SpectrumOptions::certified()).unwrap()
    }

    #[test]
    fn final_example() {
        let o = opt(vec![3, 2, 2], 4, vec![1.0; 3]);
        assert!(crate::linalg::max_abs_diff(o.lambda.as_slice(), &[2.0, 2.0, 1.5, 1.5]) < 1e-9);
        assert!((o.p_v - 125.0 / 9.0).abs() < 1e-9);
        assert!(!o.floor_active);
    }

    #[test]
    fn scalar_case() {
        let o = opt(vec![1, 1], 1, vec![1.0, 1.0]);
        assert!((o.lambda[0] - 2.0).abs() < 1e-12);
        assert!((o.p_v - 17.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn riesz_case() {
        let o = opt(vec![2, 1, 1], 4, vec![1.5, 1.2, 0.5]);
        let expect = [2.25, 2.25, 1.44, 0.25];
        assert!(crate::linalg::max_abs_diff(o.lambda.as_slice(), &expect) < 1e-9, "{:?}", o.lambda);
    }

    #[test]
    fn universal_bound_values() {
        let p = Parameters::new(vec![3, 2, 2], 4).unwrap();
        let b = universal_lower_bound(&p, &Weights::ones(3)).unwrap();
        assert!((b - 2657.0 / 196.0).abs() < 1e-12);
    }

    #[test]
    fn objective_values() {
        assert!((objective(&[2.0, 2.0, 1.5, 1.5]) - 125.0 / 9.0).abs() < 1e-12);
    }
}
