//! Littlewood–Richardson coefficients by counting LR skew tableaux.

use std::collections::{BTreeMap, HashMap};
use std::sync::{OnceLock, RwLock};

use super::partition::Partition;

/// Largest diagram size accepted by the coefficient routines.
pub const MAX_CELLS: usize = 64;

type SkewKey = (Partition, Partition, Partition);

fn skew_memo() -> &'static RwLock<HashMap<SkewKey, u64>> {
    static MEMO: OnceLock<RwLock<HashMap<SkewKey, u64>>> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Number of LR tableaux of shape `outer / inner` with content `content`:
/// semistandard fillings whose reverse reading word is a lattice word.
pub fn skew_lr_count(outer: &Partition, inner: &Partition, content: &Partition) -> u64 {
    if !inner.fits_in(outer) || outer.size() != inner.size() + content.size() {
        return 0;
    }
    if content.is_empty() {
        return 1;
    }
    if outer.size() > MAX_CELLS {
        return 0;
    }
    let key = (outer.clone(), inner.clone(), content.clone());
    if let Some(&v) = skew_memo().read().expect("memo lock").get(&key) {
        return v;
    }
    let v = count_tableaux(outer, inner, content);
    skew_memo().write().expect("memo lock").insert(key, v);
    v
}

fn count_tableaux(outer: &Partition, inner: &Partition, content: &Partition) -> u64 {
    let labels = content.len();
    let mut totals = vec![0usize; labels];
    let mut prev_row: Vec<Option<usize>> = Vec::new();
    rows_rec(0, outer, inner, content, &mut totals, &mut prev_row)
}

/// `prev_row[x]` is the label in column `x` of the previous row, `None`
/// where that cell belongs to the inner shape.
fn rows_rec(
    row: usize,
    outer: &Partition,
    inner: &Partition,
    content: &Partition,
    totals: &mut Vec<usize>,
    prev_row: &mut Vec<Option<usize>>,
) -> u64 {
    if row == outer.len() {
        return u64::from((0..content.len()).all(|l| totals[l] == content.get(l)));
    }
    let start = inner.get(row);
    let len = outer.get(row) - start;
    let labels = content.len().min(row + 1);
    let mut counts = vec![0usize; labels];
    let mut acc = 0;
    fill_rec(
        0, len, row, start, outer, inner, content, totals, prev_row, &mut counts, &mut acc,
    );
    acc
}

#[allow(clippy::too_many_arguments)]
fn fill_rec(
    label: usize,
    remaining: usize,
    row: usize,
    start: usize,
    outer: &Partition,
    inner: &Partition,
    content: &Partition,
    totals: &mut Vec<usize>,
    prev_row: &mut Vec<Option<usize>>,
    counts: &mut Vec<usize>,
    acc: &mut u64,
) {
    let labels = counts.len();
    if label == labels {
        if remaining != 0 {
            return;
        }
        // column strictness against the row above
        let mut col = start;
        let mut this_row: Vec<Option<usize>> = vec![None; outer.get(row)];
        for (l, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                if let Some(Some(above)) = prev_row.get(col) {
                    if *above >= l {
                        return;
                    }
                }
                this_row[col] = Some(l);
                col += 1;
            }
        }
        for (l, &c) in counts.iter().enumerate() {
            totals[l] += c;
        }
        let saved = std::mem::replace(prev_row, this_row);
        *acc += rows_rec(row + 1, outer, inner, content, totals, prev_row);
        *prev_row = saved;
        for (l, &c) in counts.iter().enumerate() {
            totals[l] -= c;
        }
        return;
    }
    let mut hi = remaining.min(content.get(label) - totals[label]);
    if label > 0 {
        // lattice: label-blocks are read before the (label − 1)-block of this row
        let room = totals[label - 1].saturating_sub(totals[label]);
        hi = hi.min(room);
    }
    let lo = if label + 1 == labels { remaining } else { 0 };
    if lo > hi {
        return;
    }
    for c in lo..=hi {
        counts[label] = c;
        fill_rec(
            label + 1,
            remaining - c,
            row,
            start,
            outer,
            inner,
            content,
            totals,
            prev_row,
            counts,
            acc,
        );
    }
    counts[label] = 0;
}

/// `s_μ · s_ν = Σ c^λ_{μν} s_λ`, keeping only `λ ⊆ bound` when given.
pub fn lr_product(mu: &Partition, nu: &Partition, bound: Option<&Partition>) -> BTreeMap<Partition, u64> {
    let size = mu.size() + nu.size();
    let default_bound;
    let upper = match bound {
        Some(b) => b,
        None => {
            let rows = mu.len() + nu.len();
            let cols = mu.get(0) + nu.get(0);
            default_bound = Partition::rectangle(rows, cols);
            &default_bound
        }
    };
    let lower = if mu.fits_in(nu) { nu.clone() } else { mu.clone() };
    let mut out = BTreeMap::new();
    if !mu.fits_in(upper) || !nu.fits_in(upper) {
        return out;
    }
    for lambda in Partition::between(&lower, upper, size) {
        if !mu.fits_in(&lambda) || !nu.fits_in(&lambda) {
            continue;
        }
        let c = skew_lr_count(&lambda, mu, nu);
        if c > 0 {
            out.insert(lambda, c);
        }
    }
    out
}

/// Multi-factor coefficient `c^λ_{μ_1, …, μ_m}` by iterated two-factor expansion.
pub fn lr_coefficient(outer: &Partition, inners: &[Partition]) -> u64 {
    let total: usize = inners.iter().map(Partition::size).sum();
    if total != outer.size() {
        return 0;
    }
    if inners.is_empty() {
        return u64::from(outer.is_empty());
    }
    if inners.iter().any(|p| !p.fits_in(outer)) {
        return 0;
    }
    let mut dist: BTreeMap<Partition, u64> = BTreeMap::new();
    dist.insert(inners[0].clone(), 1);
    for nu in &inners[1..] {
        let mut next: BTreeMap<Partition, u64> = BTreeMap::new();
        for (kappa, &mult) in &dist {
            for (lambda, c) in lr_product(kappa, nu, Some(outer)) {
                *next.entry(lambda).or_insert(0) += mult * c;
            }
        }
        dist = next;
        if dist.is_empty() {
            return 0;
        }
    }
    dist.get(outer).copied().unwrap_or(0)
}
