//! The subcommands. Each returns an [`Outcome`] holding both renderings.

use std::fmt::Write as _;

use recon_core::dual_picture;
use recon_core::erasure::{self, ErasureReport};
use recon_core::geometry;
use recon_core::linalg;
use recon_core::lr_horn::{self, LrCache};
use recon_core::majorization;
use recon_core::potential::{self, MinimizerCertificate, SpectrumOptions};
use recon_core::rng;
use recon_core::{Certificate, Error, Parameters, ReconstructionSystem, SpectrumVector, Weights};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::io::{self, Loaded};
use crate::CliError;

/// A finished command: JSON body, human-readable text, optional CSV, and
/// whether every check it ran passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
    pub csv: Option<String>,
    pub ok: bool,
}

impl Outcome {
    fn new(json: Value, text: String) -> Self {
        Outcome {
            json,
            text,
            csv: None,
            ok: true,
        }
    }
}

fn fmt_vec(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v:.10}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.10}"))
}

fn with_config(mut body: Value, cfg: &RunConfig) -> Value {
    body["config"] = serde_json::to_value(cfg).expect("config serializes");
    body
}

pub fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("{what}: `{t}` is not a non-negative integer")))
        })
        .collect()
}

pub fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::Input(format!("{what}: `{t}` is not a finite number")))
        })
        .collect()
}

/// `(m, k, d, v)` from flags; weights default to ones.
pub fn parameters(m: Option<usize>, k: &[usize], d: usize, v: Option<&[f64]>) -> Result<(Parameters, Weights), CliError> {
    if let Some(m) = m {
        if m != k.len() {
            return Err(CliError::Input(format!("-m {m} does not match the {} entries of -k", k.len())));
        }
    }
    let params = Parameters::new(k.to_vec(), d)?;
    let weights = match v {
        Some(v) => Weights::new(v.to_vec())?,
        None => Weights::ones(k.len()),
    };
    weights.check_against(&params)?;
    Ok((params, weights))
}

fn params_json(p: &Parameters, w: &Weights) -> Value {
    json!({"m": p.m(), "k": p.k(), "d": p.d(), "v": w.values()})
}

fn certificate_text(c: &Certificate) -> String {
    match &c.violated {
        None => "member".into(),
        Some(v) => {
            let mut s = format!("non-member: {:?}", v.family).to_lowercase();
            if let Some(i) = v.index {
                let _ = write!(s, " #{i}");
            }
            if let Some(t) = &v.tuple {
                let _ = write!(s, " tuple {t:?}");
            }
            let _ = write!(s, " ({} > {})", v.lhs, v.rhs);
            s
        }
    }
}

// ---------------------------------------------------------------- analyze

pub fn analyze(loaded: &Loaded, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = &loaded.system;
    let inv = sys.invertibility();
    let spectrum = sys.spectrum();
    let gram_rank = linalg::range_basis(&sys.gram(), recon_core::tol::RANK).ncols();
    let weights = sys.projective_check(cfg.tol("projective"));
    let commutant_dim = potential::commutant(sys).dimension();
    let mut body = json!({
        "m": sys.m(),
        "d": sys.d(),
        "n": sys.n(),
        "k": sys.params().k(),
        "spectrum": spectrum.as_slice(),
        "is_rs": inv.invertible,
        "sigma_min": inv.sigma_min,
        "rank_threshold": inv.threshold,
        "gram_rank": gram_rank,
        "projective": weights.is_some(),
        "weights": weights.as_ref().map(|w| w.values().to_vec()),
        "commutant_dimension": commutant_dim,
        "irreducible": commutant_dim == 1,
    });
    let mut text = String::new();
    let _ = writeln!(text, "system (m = {}, k = {:?}, d = {}, n = {})", sys.m(), sys.params().k(), sys.d(), sys.n());
    let _ = writeln!(text, "spectrum of S_V    {}", fmt_vec(spectrum.as_slice()));
    let _ = writeln!(
        text,
        "invertible         {} (sigma_min {:e}, threshold {:e})",
        inv.invertible, inv.sigma_min, inv.threshold
    );
    if inv.invertible {
        let b = sys.bounds()?;
        let tight = (b.upper - b.lower).abs() <= cfg.tol("spectrum") * b.upper.max(1.0);
        let dual = sys.canonical_dual()?;
        let dual_projective = dual.projective_check(cfg.tol("projective")).is_some();
        body["bounds"] = json!({"lower": b.lower, "upper": b.upper});
        body["tight"] = json!(tight);
        body["canonical_dual_spectrum"] = json!(dual.spectrum().as_slice());
        body["canonical_dual_projective"] = json!(dual_projective);
        let _ = writeln!(text, "frame bounds       A = {:.10}, B = {:.10}{}", b.lower, b.upper, if tight { " (tight)" } else { "" });
        let _ = writeln!(text, "canonical dual     {}", fmt_vec(dual.spectrum().as_slice()));
        let _ = writeln!(text, "dual projective    {dual_projective}");
    }
    let _ = writeln!(text, "gram rank          {gram_rank}");
    match &weights {
        Some(w) => {
            let _ = writeln!(text, "projective         yes, weights {}", fmt_vec(w.values()));
        }
        None => text.push_str("projective         no\n"),
    }
    let _ = writeln!(text, "commutant dim      {commutant_dim}{}", if commutant_dim == 1 { " (irreducible)" } else { "" });
    Ok(Outcome::new(with_config(body, cfg), text))
}

// ---------------------------------------------------------------- erase

fn report_json(r: &ErasureReport) -> Value {
    let mut v = serde_json::to_value(r).expect("report serializes");
    v["erased"] = json!(r.erased.iter().map(|i| i + 1).collect::<Vec<_>>());
    v
}

fn csv_field(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn erase_one(loaded: &Loaded, j: &[usize], cfg: &RunConfig) -> Result<Outcome, CliError> {
    if j.contains(&0) {
        return Err(CliError::Input("--J takes 1-based block indices".into()));
    }
    let zero: Vec<usize> = j.iter().map(|i| i - 1).collect();
    let r = erasure::erase(&loaded.system, &zero)?;
    let mut text = String::new();
    let one_based: Vec<usize> = r.erased.iter().map(|i| i + 1).collect();
    let _ = writeln!(text, "erased J           {one_based:?}");
    let _ = writeln!(text, "survives           {} (sigma_min(M_J) {:e})", r.survives, r.sigma_min);
    let _ = writeln!(text, "exact A(V_J)       {}", fmt_opt(r.exact_a));
    let _ = writeln!(text, "bound A/|M_J^-1|   {}", fmt_opt(r.bound_new));
    let _ = writeln!(text, "bound A - sum|V|^2 {}", fmt_opt(r.bound_ck));
    let _ = writeln!(text, "bound singleton    {}", fmt_opt(r.bound_asgari));
    let _ = writeln!(text, "upper B(V_J)       {:.10} (B(V) = {:.10})", r.upper_trunc, r.upper);
    let _ = writeln!(text, "|S_VJ - M_J S_V|   {:e}", r.identity_residual);
    Ok(Outcome::new(with_config(json!({"report": report_json(&r)}), cfg), text))
}

pub fn erase_scan(loaded: &Loaded, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let reports = erasure::scan(&loaded.system)?;
    let mut csv = String::from("erased,survives,sigma_min,exact_a,bound_new,bound_ck,bound_asgari,upper\n");
    for r in &reports {
        let j: Vec<String> = r.erased.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            j.join(" "),
            r.survives,
            r.sigma_min,
            csv_field(r.exact_a),
            csv_field(r.bound_new),
            csv_field(r.bound_ck),
            csv_field(r.bound_asgari),
            r.upper_trunc
        );
    }
    let survivors = reports.iter().filter(|r| r.survives).count();
    let text = format!("{csv}# {survivors} of {} erasures survivable\n", reports.len());
    let body = json!({"reports": reports.iter().map(report_json).collect::<Vec<_>>()});
    let mut out = Outcome::new(with_config(body, cfg), text);
    out.csv = Some(csv);
    Ok(out)
}

// ---------------------------------------------------------------- dual-picture

pub struct DualPictureArgs {
    pub mu: Option<Vec<f64>>,
    pub construct: bool,
    pub probe: Option<usize>,
}

pub fn dual_picture_cmd(loaded: &Loaded, args: &DualPictureArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sys = &loaded.system;
    let (rho, upper) = dual_picture::interlacing_bounds(sys)?;
    let floor = dual_picture::dual_potential_floor(sys)?;
    let mut body = json!({
        "lower": rho,
        "upper": upper.iter().map(|&x| if x.is_finite() { json!(x) } else { Value::Null }).collect::<Vec<_>>(),
        "potential_floor": floor,
    });
    let mut text = String::new();
    let _ = writeln!(text, "lower bounds rho   {}", fmt_vec(&rho));
    let up: Vec<String> = upper
        .iter()
        .map(|x| if x.is_finite() { format!("{x:.10}") } else { "inf".into() })
        .collect();
    let _ = writeln!(text, "upper bounds       ({})", up.join(", "));
    let _ = writeln!(text, "min FP over duals  {floor:.10} (tr S_V^-2)");
    if let Some(mu) = &args.mu {
        let mu = SpectrumVector::new(mu.clone())?;
        let cert = dual_picture::dual_picture_contains(sys, &mu)?;
        let _ = writeln!(text, "mu                 {}", certificate_text(&cert));
        body["certificate"] = serde_json::to_value(&cert).expect("certificate serializes");
        if args.construct && cert.member {
            let w = dual_picture::construct_dual_with_spectrum(sys, &mu)?;
            let residual = recon_core::system::duality_residual(&w, sys)?;
            let spec_err = linalg::max_abs_diff(w.spectrum().as_slice(), mu.as_slice());
            let ok = residual <= cfg.tol("dual") && spec_err <= cfg.tol("spectrum");
            let _ = writeln!(text, "constructed dual   spectrum error {spec_err:e}, duality residual {residual:e}");
            body["construction"] = json!({
                "system": io::system_value(&w, None),
                "spectrum": w.spectrum().as_slice(),
                "spectrum_error": spec_err,
                "duality_residual": residual,
                "ok": ok,
            });
        }
    }
    if let Some(trials) = args.probe {
        let pass = dual_picture::dual_picture_convexity_probe(sys, trials, cfg.seed)?;
        let _ = writeln!(text, "convexity probe    {} ({trials} trials)", if pass { "pass" } else { "FAIL" });
        body["convexity_probe"] = json!({"trials": trials, "pass": pass});
    }
    let ok = body["construction"]["ok"].as_bool().unwrap_or(true) && body["convexity_probe"]["pass"].as_bool().unwrap_or(true);
    let mut out = Outcome::new(with_config(body, cfg), text);
    out.ok = ok;
    Ok(out)
}

// ---------------------------------------------------------------- op-picture

pub fn op_picture_cmd(
    params: &Parameters,
    weights: &Weights,
    mu: Option<&[f64]>,
    probe: Option<usize>,
    cfg: &RunConfig,
) -> Result<Outcome, CliError> {
    let horn = lr_horn::HornSystem::build(params, weights)?;
    let mut body = json!({
        "params": params_json(params, weights),
        "tau": weights.tau(params),
        "inequalities": horn.rows().len(),
    });
    let mut text = String::new();
    let _ = writeln!(
        text,
        "k = {:?}, d = {}, v = {}, tau = {:.10}",
        params.k(),
        params.d(),
        fmt_vec(weights.values()),
        weights.tau(params)
    );
    let _ = writeln!(text, "Horn inequalities  {}", horn.rows().len());
    // LR tuple counts per r, from the on-disk cache when configured
    let cache = match &cfg.cache_dir {
        Some(dir) => LrCache::on_disk(dir),
        None => LrCache::memory_only(),
    };
    let mut counts = Vec::new();
    for r in 1..params.d() {
        match cache.enumerate(params.d(), r, params.m()) {
            Ok(t) => counts.push(json!(t.len())),
            Err(Error::Cap(_)) => counts.push(Value::Null),
            Err(e) => return Err(e.into()),
        }
    }
    let shown: Vec<String> = counts.iter().map(|c| c.as_u64().map_or("capped".into(), |n| n.to_string())).collect();
    let _ = writeln!(text, "LR tuples per r    [{}]", shown.join(", "));
    body["lr_tuple_counts"] = json!(counts);
    if let Some(mu) = mu {
        let mu = SpectrumVector::new(mu.to_vec())?;
        let cert = horn.contains(&mu)?;
        let _ = writeln!(text, "mu                 {}", certificate_text(&cert));
        body["certificate"] = serde_json::to_value(&cert).expect("certificate serializes");
    }
    let mut ok = true;
    if let Some(trials) = probe {
        let pass = lr_horn::op_picture_convexity_probe(params, weights, trials, cfg.seed)?;
        let _ = writeln!(text, "convexity probe    {} ({trials} trials)", if pass { "pass" } else { "FAIL" });
        body["convexity_probe"] = json!({"trials": trials, "pass": pass});
        ok = pass;
    }
    let mut out = Outcome::new(with_config(body, cfg), text);
    out.ok = ok;
    Ok(out)
}

// ---------------------------------------------------------------- lambda

const CONSTRUCT_RESTARTS: usize = 20;

fn decomposition_json(cert: &MinimizerCertificate) -> Value {
    cert.decomposition.as_ref().map_or(Value::Null, |d| {
        json!({
            "orthogonal_sum": d.orthogonal_sum,
            "max_commutation_residual": d.max_commutation_residual,
            "components": d.components.iter().map(|c| json!({
                "sigma": c.sigma,
                "dim": c.dim,
                "k": c.k,
                "tightness_residual": c.tightness_residual,
                "commutation_residual": c.commutation_residual,
                "blocks": io::blocks_json(&c.blocks),
                "irreducible": c.irreducible.iter().map(|s| json!({
                    "dim": s.dim,
                    "k": s.k,
                    "tightness_residual": s.tightness_residual,
                    "blocks": io::blocks_json(&s.blocks),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })
    })
}

pub fn lambda_cmd(params: &Parameters, weights: &Weights, construct: bool, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = SpectrumOptions {
        allow_sampling: !cfg.certified,
        seed: cfg.seed,
        ..SpectrumOptions::default()
    };
    let optimum = match potential::optimal_spectrum(params, weights, &opts) {
        Err(Error::Cap(msg)) if cfg.certified => {
            return Err(CliError::Library(Error::Cap(format!(
                "{msg}; rerun with --no-certified for a descent estimate"
            ))))
        }
        other => other?,
    };
    let mut text = String::new();
    let _ = writeln!(text, "k = {:?}, d = {}, v = {}", params.k(), params.d(), fmt_vec(weights.values()));
    let _ = writeln!(text, "lambda_v           {}", fmt_vec(optimum.lambda.as_slice()));
    let _ = writeln!(text, "p_v                {:.12}", optimum.p_v);
    let _ = writeln!(text, "certified          {}", optimum.certified);
    if optimum.floor_active {
        text.push_str("warning            the floor on the smallest entry is active\n");
    }
    let mut construction = Value::Null;
    let mut decomposition = None;
    let mut ok = true;
    if construct {
        match potential::construct_minimizer(params, weights, &optimum.lambda, cfg.seed, CONSTRUCT_RESTARTS, cfg.tol("spectrum")) {
            Ok(found) => {
                let sys = &found.system;
                let dec = potential::tight_decomposition(sys, cfg.seed)?;
                let dual = sys.canonical_dual()?;
                let dual_projective = dual.projective_check(1e-8).is_some();
                let fp = potential::joint_potential(sys, &dual)?;
                let gap = linalg::max_abs_diff(sys.spectrum().as_slice(), optimum.lambda.as_slice());
                let _ = writeln!(text, "minimizer          found, spectrum gap {gap:e}, FP(V, V#) = {fp:.12}");
                let _ = writeln!(text, "orthogonal sum     {} (commutation residual {:e})", dec.orthogonal_sum, dec.max_commutation_residual);
                for c in &dec.components {
                    let _ = writeln!(
                        text,
                        "  tight component  sigma = {:.10}, dim = {}, k = {:?}, irreducible summands = {}",
                        c.sigma,
                        c.dim,
                        c.k,
                        c.irreducible.len()
                    );
                }
                let _ = writeln!(text, "V# projective      {dual_projective}");
                construction = json!({
                    "found": true,
                    "spectrum_gap": gap,
                    "joint_potential": fp,
                    "canonical_dual_projective": dual_projective,
                    "iterations": found.iterations,
                    "system": io::system_value(sys, Some(weights)),
                });
                decomposition = Some(dec);
            }
            Err(Error::Convergence { residual, .. }) => {
                ok = false;
                let _ = writeln!(text, "minimizer          not found ({CONSTRUCT_RESTARTS} restarts, closest spectrum gap {residual:e})");
                construction = json!({"found": false, "spectrum_gap": residual});
            }
            Err(e) => return Err(e.into()),
        }
    }
    let cert = MinimizerCertificate::new(optimum, decomposition);
    let groups: Vec<String> = cert.sigma.iter().map(|(s, m)| format!("{s:.10} x{m}")).collect();
    let _ = writeln!(text, "distinct values    {}", groups.join(", "));
    let body = json!({
        "params": params_json(params, weights),
        "lambda": cert.optimum.lambda.as_slice(),
        "p_v": cert.optimum.p_v,
        "certified": cert.optimum.certified,
        "iterations": cert.optimum.iterations,
        "floor_active": cert.optimum.floor_active,
        "sigma": cert.sigma.iter().map(|&(s, m)| json!({"value": s, "multiplicity": m})).collect::<Vec<_>>(),
        "construction": construction,
        "decomposition": decomposition_json(&cert),
    });
    let mut out = Outcome::new(with_config(body, cfg), text);
    out.ok = ok;
    Ok(out)
}

// ---------------------------------------------------------------- conjecture

pub fn conjecture_cmd(params: &Parameters, weights: &Weights, samples: usize, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = majorization::conjecture_harness(params, weights, samples, cfg.seed)?;
    let mut text = String::new();
    let _ = writeln!(text, "lambda_v           {}", fmt_vec(rep.lambda_v.as_slice()));
    let _ = writeln!(text, "samples            {}", rep.samples);
    let _ = writeln!(text, "majorized          {}", rep.passes);
    let _ = writeln!(text, "worst margin       {:e}", rep.worst_margin);
    let counterexample = rep.counterexample.as_ref().map(|c| {
        let _ = writeln!(text, "counterexample     seed {} margin {:e}", c.seed, c.margin);
        json!({"seed": c.seed, "margin": c.margin, "system": io::system_value(&c.system, Some(weights))})
    });
    let body = json!({
        "params": params_json(params, weights),
        "lambda_v": rep.lambda_v.as_slice(),
        "samples": rep.samples,
        "passes": rep.passes,
        "worst_margin": if rep.worst_margin.is_finite() { json!(rep.worst_margin) } else { Value::Null },
        "counterexample": counterexample,
    });
    Ok(Outcome::new(with_config(body, cfg), text))
}

/// A random projective system for the given parameters.
pub fn sample_system(params: &Parameters, weights: &Weights, cfg: &RunConfig) -> Result<ReconstructionSystem, CliError> {
    Ok(geometry::random_projective(params, weights, rng::derive(cfg.seed, 0))?)
}
