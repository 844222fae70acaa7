//! Named end-to-end scenarios with expected values.

use std::fmt::Write as _;

use recon_core::linalg::{self, c, CMatrix};
use recon_core::majorization::{self, Relation};
use recon_core::potential::{self, SpectrumOptions};
use recon_core::system::coordinate_block;
use recon_core::{geometry, rng, Parameters, ReconstructionSystem, Weights};
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tol: f64,
    /// A yes/no property; `value` is 1 or 0.
    pub boolean: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub name: &'static str,
    pub summary: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
}

struct Checks(Vec<Check>);

impl Checks {
    fn close(&mut self, name: impl Into<String>, value: f64, expected: f64, tol: f64) {
        let pass = (value - expected).abs() <= tol;
        self.0.push(Check {
            name: name.into(),
            value,
            expected,
            tol,
            boolean: false,
            pass,
        });
    }

    fn holds(&mut self, name: impl Into<String>, yes: bool) {
        self.close(name, if yes { 1.0 } else { 0.0 }, 1.0, 0.0);
        if let Some(last) = self.0.last_mut() {
            last.boolean = true;
        }
    }

    fn vector(&mut self, name: &str, got: &[f64], want: &[f64], tol: f64) {
        let err = if got.len() == want.len() {
            linalg::max_abs_diff(got, want)
        } else {
            f64::INFINITY
        };
        self.close(format!("{name} (max entry error)"), err, 0.0, tol);
    }
}

type Run = fn(&RunConfig) -> Result<Vec<Check>, CliError>;

pub struct Scenario {
    pub name: &'static str,
    pub summary: &'static str,
    run: Run,
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "no-irreducible-riesz",
        summary: "k = (3, 2), d = 5: every projective Riesz system is reducible; orthogonal ranges give S = I",
        run: no_irreducible_riesz,
    },
    Scenario {
        name: "vector-frames",
        summary: "generic vector frame is irreducible; orthogonally split frame is not",
        run: vector_frames,
    },
    Scenario {
        name: "vector-lambda",
        summary: "k = 1_m: certified optimum equals (v_1², …, v_r², c 1_{d−r})",
        run: vector_lambda,
    },
    Scenario {
        name: "riesz",
        summary: "tr k = d: optimum is the sorted (v_i² 1_{k_i}) and is majorized by sampled spectra",
        run: riesz,
    },
    Scenario {
        name: "two-subspace",
        summary: "m = 2, k_1 + k_2 > d: optimum ((v_1²+v_2²)1_{r0}, v_1² 1_{r1}, v_2² 1_{r2}), attained by commuting projections",
        run: two_subspace,
    },
    Scenario {
        name: "final-example",
        summary: "k = (3, 2, 2), d = 4, v = 1: optimum (2, 2, 3/2, 3/2), two tight components, V# not projective",
        run: final_example,
    },
];

pub fn run(cfg: &RunConfig, only: Option<&str>) -> Result<Vec<ScenarioResult>, CliError> {
    let chosen: Vec<&Scenario> = match only {
        None => SCENARIOS.iter().collect(),
        Some(name) => {
            let s = SCENARIOS.iter().find(|s| s.name == name).ok_or_else(|| {
                let names: Vec<&str> = SCENARIOS.iter().map(|s| s.name).collect();
                CliError::Input(format!("unknown scenario `{name}`; available: {}", names.join(", ")))
            })?;
            vec![s]
        }
    };
    chosen
        .into_iter()
        .map(|s| {
            let checks = (s.run)(cfg)?;
            Ok(ScenarioResult {
                name: s.name,
                summary: s.summary,
                pass: checks.iter().all(|c| c.pass),
                checks,
            })
        })
        .collect()
}

pub fn render(results: &[ScenarioResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "[{}] {}: {}", if r.pass { "pass" } else { "FAIL" }, r.name, r.summary);
        for c in &r.checks {
            if c.boolean {
                let _ = writeln!(s, "    {} {}", if c.pass { "ok  " } else { "FAIL" }, c.name);
                continue;
            }
            let _ = writeln!(
                s,
                "    {} {}  value {:e}, expected {:e}, tol {:e}",
                if c.pass { "ok  " } else { "FAIL" },
                c.name,
                c.value,
                c.expected,
                c.tol
            );
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(s, "{passed}/{} scenarios passed", results.len());
    s
}

fn opt(params: &Parameters, w: &Weights) -> Result<potential::OptimalSpectrum, CliError> {
    Ok(potential::optimal_spectrum(params, w, &SpectrumOptions::certified())?)
}

fn block_from_rows(rows: &[&[f64]]) -> CMatrix {
    linalg::from_real_rows(rows)
}

/// Largest cosine strictly below 1 between two ranges (Friedrichs angle).
fn friedrichs_cosine(p: &CMatrix, q: &CMatrix) -> f64 {
    let vals = linalg::eigenvalues(&(p * q * p));
    vals.into_iter().find(|&x| x < 1.0 - 1e-9).unwrap_or(0.0).max(0.0).sqrt()
}

fn no_irreducible_riesz(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let params = Parameters::new(vec![3, 2], 5)?;
    for t in 0..5u64 {
        let w = Weights::new(vec![1.0 + 0.3 * t as f64, 1.0])?;
        let sys = geometry::random_projective(&params, &w, rng::derive(cfg.seed, t))?;
        ck.holds(format!("random draw {t}: commutant dimension > 1"), potential::commutant(&sys).dimension() > 1);
    }
    let sys = ReconstructionSystem::new(vec![coordinate_block(&[1.0; 3], 0, 5), coordinate_block(&[1.0; 2], 3, 5)])?;
    let s = sys.frame_operator();
    ck.close("orthogonal ranges: |S - I|", linalg::spectral_norm(&(s - linalg::identity(5))), 0.0, 1e-14);
    Ok(ck.0)
}

fn vector_frames(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let params = Parameters::new(vec![1; 5], 3)?;
    let sys = geometry::random_projective(&params, &Weights::ones(5), cfg.seed)?;
    ck.close("random frame: commutant dimension", potential::commutant(&sys).dimension() as f64, 1.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let split = ReconstructionSystem::new(vec![
        block_from_rows(&[&[1.0, 0.0, 0.0]]),
        block_from_rows(&[&[1.0, 0.0, 0.0]]),
        block_from_rows(&[&[0.0, 1.0, 0.0]]),
        block_from_rows(&[&[0.0, h, h]]),
        block_from_rows(&[&[0.0, h, -h]]),
    ])?;
    let dim = potential::commutant(&split).dimension();
    ck.holds("orthogonally split frame: commutant dimension > 1", dim > 1);
    Ok(ck.0)
}

fn vector_lambda(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let tol = cfg.tol("spectrum");
    let cases: [(&[f64], usize); 3] = [(&[2.0, 1.0, 1.0, 1.0], 2), (&[1.5, 1.2, 1.0, 0.5, 0.3], 3), (&[1.0; 5], 3)];
    for (v, d) in cases {
        let params = Parameters::new(vec![1; v.len()], d)?;
        let w = Weights::new(v.to_vec())?;
        let got = opt(&params, &w)?;
        let want = majorization::vector_frame_lambda(v, d)?;
        ck.vector(&format!("v = {v:?}, d = {d}"), got.lambda.as_slice(), want.as_slice(), tol);
    }
    Ok(ck.0)
}

fn riesz(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let tol = cfg.tol("spectrum");
    let params = Parameters::new(vec![2, 1, 1], 4)?;
    let w = Weights::new(vec![1.5, 1.2, 0.5])?;
    let want = [2.25, 2.25, 1.44, 0.25];
    let got = opt(&params, &w)?;
    ck.vector("lambda_v", got.lambda.as_slice(), &want, tol);
    let orth = ReconstructionSystem::new(vec![
        coordinate_block(&[1.5, 1.5], 0, 4),
        coordinate_block(&[1.2], 2, 4),
        coordinate_block(&[0.5], 3, 4),
    ])?;
    ck.vector("orthogonal system attains lambda_v", orth.spectrum().as_slice(), &want, 1e-12);
    let mut all = true;
    for t in 0..50u64 {
        let sys = geometry::random_projective(&params, &w, rng::derive(cfg.seed, t))?;
        let rel = majorization::majorizes(&want, sys.spectrum().as_slice())?.relation;
        all &= rel == Relation::Majorized;
    }
    ck.holds("lambda_v is majorized by 50 sampled spectra", all);
    Ok(ck.0)
}

fn two_subspace(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let tol = cfg.tol("spectrum");
    let (v1, v2) = (1.2, 0.8);
    let params = Parameters::new(vec![3, 2], 4)?;
    let w = Weights::new(vec![v1, v2])?;
    // r0 = 1, r1 = 2, r2 = 1
    let (a, b) = (v1 * v1, v2 * v2);
    let want = [a + b, a, a, b];
    let got = opt(&params, &w)?;
    ck.vector("lambda_v", got.lambda.as_slice(), &want, tol);
    let commuting = ReconstructionSystem::new(vec![
        coordinate_block(&[v1; 3], 0, 4),
        block_from_rows(&[&[v2, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, v2]]),
    ])?;
    ck.vector("commuting projections attain lambda_v", commuting.spectrum().as_slice(), &want, 1e-12);
    let sys = geometry::random_projective(&params, &w, cfg.seed)?;
    let gap = linalg::max_abs_diff(sys.spectrum().as_slice(), &want);
    ck.holds("a generic (non-commuting) draw does not attain lambda_v", gap > 1e-6);
    Ok(ck.0)
}

/// The explicit minimizer: ranges span{e1, e2, e3}, span{e1, w2}, span{e2, w3}.
pub fn final_example_system() -> ReconstructionSystem {
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
    ReconstructionSystem::new(vec![v1, v2, v3]).expect("valid blocks")
}

fn final_example(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let mut ck = Checks(Vec::new());
    let tol = cfg.tol("spectrum");
    let params = Parameters::new(vec![3, 2, 2], 4)?;
    let w = Weights::ones(3);
    let want = [2.0, 2.0, 1.5, 1.5];
    let got = opt(&params, &w)?;
    ck.vector("lambda_v", got.lambda.as_slice(), &want, tol);
    ck.close("p_v", got.p_v, 125.0 / 9.0, tol);
    let sys = final_example_system();
    ck.vector("explicit system attains lambda_v", sys.spectrum().as_slice(), &want, 1e-12);
    let dec = potential::tight_decomposition(&sys, cfg.seed)?;
    ck.close("tight components", dec.components.len() as f64, 2.0, 0.0);
    let worst = dec.components.iter().map(|c| c.tightness_residual).fold(dec.max_commutation_residual, f64::max);
    ck.close("decomposition residual", worst, 0.0, 1e-8);
    let dual = sys.canonical_dual()?;
    ck.holds("canonical dual is not projective", dual.projective_check(1e-8).is_none());
    let projs: Vec<CMatrix> = sys.blocks().iter().map(|b| b.adjoint() * b).collect();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let cos = friedrichs_cosine(&projs[i], &projs[j]);
        ck.close(format!("Friedrichs cosine of ranges {} and {}", i + 1, j + 1), cos, 0.5, 1e-12);
    }
    Ok(ck.0)
}
