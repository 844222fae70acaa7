//! Horn–Klyachko description of the spectra of `Σ v_i² P_i`.
//!
//! For fixed `J_0` only the smallest right-hand side over all tuples
//! `(J_0, J_1, …, J_m) ∈ LR_d^r(m)` matters. It is found by a shortest-path
//! recursion over the support of `s_{λ(J_1)} ⋯ s_{λ(J_t)}` restricted to the
//! `r × (d − r)` box, so the `C(d, r)^m` inner tuples are never listed.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::lr::lr_product;
use super::partition::{partition_of, IndexTuple, Partition};
use super::tuples::{binomial, LrTuple};
use crate::certificate::{Certificate, Family, Violation};
use crate::error::{Error, Result};
use crate::geometry;
use crate::rng;
use crate::system::{Parameters, SpectrumVector, Weights};

/// Largest `C(d, r)²` accepted when building a [`HornSystem`].
pub const PAIR_CAP: f64 = 2.5e5;

/// `Σ_{i∈J_0} μ_i ≤ rhs`, the tightest inequality for this `J_0`.
#[derive(Debug, Clone)]
pub struct HornRow {
    pub r: usize,
    pub j0: IndexTuple,
    pub rhs: f64,
    /// A tuple of `LR_d^r(m)` attaining `rhs`.
    pub witness: LrTuple,
}

impl HornRow {
    pub fn lhs(&self, mu: &[f64]) -> f64 {
        self.j0.entries().iter().map(|&j| mu[j - 1]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct HornSystem {
    d: usize,
    tau: f64,
    rows: Vec<HornRow>,
}

type Stage = BTreeMap<Partition, (f64, Option<Partition>, usize)>;

fn rows_for_r(k: &[usize], w2: &[f64], d: usize, r: usize) -> Vec<HornRow> {
    let boxp = Partition::rectangle(r, d - r);
    let ks = IndexTuple::all(d, r);
    let parts: Vec<Partition> = ks.iter().map(partition_of).collect();
    let cost = |block: usize, idx: usize| w2[block] * ks[idx].count_at_most(k[block]) as f64;
    let mut products: HashMap<(Partition, usize), Vec<Partition>> = HashMap::new();

    let mut stages: Vec<Stage> = Vec::with_capacity(k.len());
    let mut first = Stage::new();
    for (idx, p) in parts.iter().enumerate() {
        first.insert(p.clone(), (cost(0, idx), None, idx));
    }
    stages.push(first);
    for block in 1..k.len() {
        let prev = stages.last().expect("at least one stage");
        let mut next = Stage::new();
        for (kappa, &(c, _, _)) in prev {
            for (idx, nu) in parts.iter().enumerate() {
                let cand = c + cost(block, idx);
                let support = products
                    .entry((kappa.clone(), idx))
                    .or_insert_with(|| lr_product(kappa, nu, Some(&boxp)).into_keys().collect());
                for lam in support.iter() {
                    match next.get(lam) {
                        Some(&(best, _, _)) if best <= cand => {}
                        _ => {
                            next.insert(lam.clone(), (cand, Some(kappa.clone()), idx));
                        }
                    }
                }
            }
        }
        stages.push(next);
    }

    let last = stages.last().expect("at least one stage");
    let mut rows = Vec::new();
    for (j0, p0) in ks.iter().zip(&parts) {
        let Some(&(rhs, _, _)) = last.get(p0) else { continue };
        let mut inner = Vec::with_capacity(k.len());
        let mut at = p0.clone();
        for stage in stages.iter().rev() {
            let (_, prev, idx) = stage.get(&at).expect("back pointer").clone();
            inner.push(ks[idx].clone());
            match prev {
                Some(p) => at = p,
                None => break,
            }
        }
        inner.reverse();
        let mut tuple = vec![j0.clone()];
        tuple.extend(inner);
        rows.push(HornRow {
            r,
            j0: j0.clone(),
            rhs,
            witness: LrTuple(tuple),
        });
    }
    rows
}

impl HornSystem {
    pub fn build(params: &Parameters, weights: &Weights) -> Result<Self> {
        weights.check_against(params)?;
        let d = params.d();
        if let Some(&k) = params.k().iter().find(|&&k| k > d) {
            return Err(Error::argument(format!("a projection of rank {k} does not fit in dimension {d}")));
        }
        for r in 1..d {
            let pairs = binomial(d, r).powi(2);
            if pairs > PAIR_CAP {
                return Err(Error::Cap(format!(
                    "Horn system for d = {d} needs C(d,{r})² = {pairs:.3e} > {PAIR_CAP:e} partition pairs"
                )));
            }
        }
        let w2: Vec<f64> = weights.values().iter().map(|v| v * v).collect();
        let rows: Vec<HornRow> = (1..d)
            .into_par_iter()
            .map(|r| rows_for_r(params.k(), &w2, d, r))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        Ok(HornSystem {
            d,
            tau: weights.tau(params),
            rows,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rows(&self) -> &[HornRow] {
        &self.rows
    }

    pub fn slack(&self) -> f64 {
        crate::tol::SPECTRAL_SLACK * self.tau.max(1.0)
    }

    pub fn contains(&self, mu: &SpectrumVector) -> Result<Certificate> {
        if mu.len() != self.d {
            return Err(Error::argument(format!(
                "spectrum has length {}, expected {}",
                mu.len(),
                self.d
            )));
        }
        let x = mu.as_slice();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::argument("spectrum has non-finite entries"));
        }
        let slack = self.slack();
        let tr = mu.trace();
        if (tr - self.tau).abs() > slack {
            return Ok(Certificate::violation(Violation {
                family: Family::Trace,
                index: None,
                tuple: None,
                lhs: tr,
                rhs: self.tau,
            }));
        }
        for row in &self.rows {
            let lhs = row.lhs(x);
            if lhs > row.rhs + slack {
                return Ok(Certificate::violation(Violation {
                    family: Family::Klyachko,
                    index: Some(row.r),
                    tuple: Some(row.witness.to_vecs()),
                    lhs,
                    rhs: row.rhs,
                }));
            }
        }
        let last = x[self.d - 1];
        if last <= 0.0 {
            return Ok(Certificate::violation(Violation {
                family: Family::Positivity,
                index: Some(self.d),
                tuple: None,
                lhs: last,
                rhs: 0.0,
            }));
        }
        Ok(Certificate::member())
    }

    /// Largest `lhs − rhs` over the inequalities and `|tr μ − τ|`.
    pub fn max_violation(&self, mu: &[f64]) -> f64 {
        let tr: f64 = mu.iter().sum();
        self.rows
            .iter()
            .map(|row| row.lhs(mu) - row.rhs)
            .fold((tr - self.tau).abs(), f64::max)
    }
}

pub fn op_picture_contains(params: &Parameters, weights: &Weights, mu: &SpectrumVector) -> Result<Certificate> {
    HornSystem::build(params, weights)?.contains(mu)
}

/// Membership of random convex combinations of spectra of random projective systems.
pub fn op_picture_convexity_probe(params: &Parameters, weights: &Weights, trials: usize, seed: u64) -> Result<bool> {
    let horn = HornSystem::build(params, weights)?;
    let verdicts: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let a = geometry::random_projective(params, weights, rng::derive(seed, 3 * t))?.spectrum();
            let b = geometry::random_projective(params, weights, rng::derive(seed, 3 * t + 1))?.spectrum();
            let mut g = rng::stream(rng::derive(seed, 3 * t + 2), 0);
            let s = rng::uniform(&mut g);
            let mix: Vec<f64> = a
                .as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| s * x + (1.0 - s) * y)
                .collect();
            Ok(horn.contains(&SpectrumVector::from_unsorted(mix))?.member)
        })
        .collect::<Result<_>>()?;
    Ok(verdicts.into_iter().all(|v| v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lr_horn::lr::lr_coefficient;
    use crate::lr_horn::tuples::enumerate_lr_tuples;

    fn spec(v: &[f64]) -> SpectrumVector {
        SpectrumVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn final_example_membership() {
        let params = Parameters::new(vec![3, 2, 2], 4).unwrap();
        let w = Weights::ones(3);
        let horn = HornSystem::build(&params, &w).unwrap();
        assert!(horn.contains(&spec(&[2.0, 2.0, 1.5, 1.5])).unwrap().member);
        let bad = horn.contains(&spec(&[4.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(!bad.member);
        let v = bad.violated.unwrap();
        assert_eq!(v.family, Family::Klyachko);
        assert!(v.lhs > v.rhs);
    }

    #[test]
    fn rows_match_full_enumeration() {
        let params = Parameters::new(vec![3, 2, 2], 4).unwrap();
        let w = Weights::new(vec![1.3, 1.0, 0.7]).unwrap();
        let horn = HornSystem::build(&params, &w).unwrap();
        for r in 1..4 {
            let tuples = enumerate_lr_tuples(4, r, 3).unwrap();
            for j0 in IndexTuple::all(4, r) {
                let brute = tuples
                    .iter()
                    .filter(|t| t.outer() == &j0)
                    .map(|t| {
                        t.inners()
                            .iter()
                            .enumerate()
                            .map(|(i, j)| w.values()[i].powi(2) * j.count_at_most(params.k()[i]) as f64)
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                let row = horn.rows().iter().find(|row| row.r == r && row.j0 == j0);
                match row {
                    Some(row) => {
                        assert!((row.rhs - brute).abs() < 1e-12);
                        let parts: Vec<Partition> = row.witness.0.iter().map(partition_of).collect();
                        assert!(lr_coefficient(&parts[0], &parts[1..]) > 0);
                    }
                    None => assert!(brute.is_infinite()),
                }
            }
        }
    }

    #[test]
    fn scalar_case() {
        let params = Parameters::new(vec![1, 1], 1).unwrap();
        let w = Weights::ones(2);
        assert!(op_picture_contains(&params, &w, &spec(&[2.0])).unwrap().member);
        let c = op_picture_contains(&params, &w, &spec(&[1.5])).unwrap();
        assert_eq!(c.violated.unwrap().family, Family::Trace);
    }

    #[test]
    fn positivity_boundary() {
        let params = Parameters::new(vec![1, 1, 1], 2).unwrap();
        let w = Weights::ones(3);
        let c = op_picture_contains(&params, &w, &spec(&[3.0, 0.0])).unwrap();
        assert!(!c.member);
    }

    #[test]
    fn riesz_member() {
        let params = Parameters::new(vec![2, 1], 3).unwrap();
        let w = Weights::new(vec![1.5, 1.0]).unwrap();
        assert!(op_picture_contains(&params, &w, &spec(&[2.25, 2.25, 1.0])).unwrap().member);
        assert!(!op_picture_contains(&params, &w, &spec(&[2.5, 2.0, 1.0])).unwrap().member);
    }
}
