//! Enumeration of `LR_d^r(m)`, memoized in memory and optionally on disk.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::lr::lr_product;
use super::partition::{partition_of, IndexTuple, Partition};
use crate::error::{Error, Result};

/// Largest `C(d, r)^{m+1}` accepted by [`enumerate_lr_tuples`].
pub const ENUMERATION_CAP: f64 = 1e7;

/// `(J_0, J_1, …, J_m)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LrTuple(pub Vec<IndexTuple>);

impl LrTuple {
    pub fn outer(&self) -> &IndexTuple {
        &self.0[0]
    }

    pub fn inners(&self) -> &[IndexTuple] {
        &self.0[1..]
    }

    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.0.iter().map(|j| j.entries().to_vec()).collect()
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    d: usize,
    r: usize,
    m: usize,
    tuples: Vec<LrTuple>,
}

type Key = (usize, usize, usize);

fn memo() -> &'static Mutex<HashMap<Key, Arc<Vec<LrTuple>>>> {
    static MEMO: OnceLock<Mutex<HashMap<Key, Arc<Vec<LrTuple>>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Where enumerations are persisted: `<dir>/lr_cache/d{d}_r{r}_m{m}.json`.
#[derive(Debug, Clone, Default)]
pub struct LrCache {
    dir: Option<PathBuf>,
}

impl LrCache {
    pub fn memory_only() -> Self {
        LrCache { dir: None }
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Self {
        LrCache { dir: Some(dir.into()) }
    }

    pub fn file_for(&self, d: usize, r: usize, m: usize) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|dir| dir.join("lr_cache").join(format!("d{d}_r{r}_m{m}.json")))
    }

    fn load(path: &Path, key: Key) -> Option<Vec<LrTuple>> {
        let text = std::fs::read_to_string(path).ok()?;
        let file: CacheFile = serde_json::from_str(&text).ok()?;
        ((file.d, file.r, file.m) == key).then_some(file.tuples)
    }

    fn store(path: &Path, key: Key, tuples: &[LrTuple]) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| Error::Structure(format!("cannot create {}: {e}", parent.display())))?;
        }
        let file = CacheFile {
            d: key.0,
            r: key.1,
            m: key.2,
            tuples: tuples.to_vec(),
        };
        let text = serde_json::to_string(&file).expect("tuples serialize");
        // write then rename so concurrent readers never see a partial file
        let tmp = path.with_extension(format!("json.{}.tmp", std::process::id()));
        std::fs::write(&tmp, text)
            .and_then(|_| std::fs::rename(&tmp, path))
            .map_err(|e| Error::Structure(format!("cannot write {}: {e}", path.display())))
    }

    /// All `(m+1)`-tuples in `(K_d^r)^{m+1}` with positive LR coefficient,
    /// lexicographically ordered.
    pub fn enumerate(&self, d: usize, r: usize, m: usize) -> Result<Arc<Vec<LrTuple>>> {
        if d < 2 || r == 0 || r >= d {
            return Err(Error::argument(format!("need 1 ≤ r ≤ d − 1, got d = {d}, r = {r}")));
        }
        if m == 0 {
            return Err(Error::argument("need m ≥ 1"));
        }
        let work = binomial(d, r).powi(m as i32 + 1);
        if work > ENUMERATION_CAP {
            return Err(Error::Cap(format!(
                "LR enumeration for d = {d}, r = {r}, m = {m} needs C(d,r)^(m+1) = {work:.3e} > {ENUMERATION_CAP:e}"
            )));
        }
        let key = (d, r, m);
        let path = self.file_for(d, r, m);
        let hit = memo().lock().expect("memo lock").get(&key).cloned();
        if let Some(hit) = hit {
            if let Some(p) = path.as_deref().filter(|p| !p.exists()) {
                Self::store(p, key, &hit)?;
            }
            return Ok(hit);
        }
        let tuples = match path.as_deref().and_then(|p| Self::load(p, key)) {
            Some(t) => t,
            None => {
                let t = enumerate_uncached(d, r, m);
                if let Some(p) = &path {
                    Self::store(p, key, &t)?;
                }
                t
            }
        };
        let arc = Arc::new(tuples);
        memo().lock().expect("memo lock").insert(key, arc.clone());
        Ok(arc)
    }
}

pub fn enumerate_lr_tuples(d: usize, r: usize, m: usize) -> Result<Arc<Vec<LrTuple>>> {
    LrCache::memory_only().enumerate(d, r, m)
}

fn enumerate_uncached(d: usize, r: usize, m: usize) -> Vec<LrTuple> {
    let boxp = Partition::rectangle(r, d - r);
    let ks = IndexTuple::all(d, r);
    let parts: Vec<Partition> = ks.iter().map(partition_of).collect();
    let by_partition: BTreeMap<&Partition, &IndexTuple> = parts.iter().zip(&ks).collect();
    let mut product_memo: HashMap<(Partition, usize), Vec<Partition>> = HashMap::new();
    let mut out = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(m);

    fn dfs(
        support: Vec<Partition>,
        chosen: &mut Vec<usize>,
        m: usize,
        ks: &[IndexTuple],
        parts: &[Partition],
        boxp: &Partition,
        by_partition: &BTreeMap<&Partition, &IndexTuple>,
        product_memo: &mut HashMap<(Partition, usize), Vec<Partition>>,
        out: &mut Vec<LrTuple>,
    ) {
        if chosen.len() == m {
            for kappa in &support {
                if let Some(j0) = by_partition.get(kappa) {
                    let mut t = vec![(*j0).clone()];
                    t.extend(chosen.iter().map(|&i| ks[i].clone()));
                    out.push(LrTuple(t));
                }
            }
            return;
        }
        for (idx, nu) in parts.iter().enumerate() {
            let next: Vec<Partition> = if chosen.is_empty() {
                vec![nu.clone()]
            } else {
                let mut acc: std::collections::BTreeSet<Partition> = Default::default();
                for kappa in &support {
                    let prod = product_memo
                        .entry((kappa.clone(), idx))
                        .or_insert_with(|| lr_product(kappa, nu, Some(boxp)).into_keys().collect());
                    acc.extend(prod.iter().cloned());
                }
                acc.into_iter().collect()
            };
            if next.is_empty() {
                continue;
            }
            chosen.push(idx);
            dfs(next, chosen, m, ks, parts, boxp, by_partition, product_memo, out);
            chosen.pop();
        }
    }

    dfs(
        Vec::new(),
        &mut chosen,
        m,
        &ks,
        &parts,
        &boxp,
        &by_partition,
        &mut product_memo,
        &mut out,
    );
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lr_horn::lr::lr_coefficient;

    #[test]
    fn horn_scalar_case() {
        let t = enumerate_lr_tuples(2, 1, 2).unwrap();
        let got: Vec<Vec<Vec<usize>>> = t.iter().map(LrTuple::to_vecs).collect();
        assert_eq!(
            got,
            vec![
                vec![vec![1], vec![1], vec![1]],
                vec![vec![2], vec![1], vec![2]],
                vec![vec![2], vec![2], vec![1]],
            ]
        );
        assert_eq!(enumerate_lr_tuples(2, 1, 1).unwrap().len(), 2);
    }

    #[test]
    fn every_tuple_has_positive_coefficient() {
        for (d, r, m) in [(4, 2, 2), (4, 1, 3), (3, 1, 2), (5, 2, 2)] {
            let tuples = enumerate_lr_tuples(d, r, m).unwrap();
            let all = IndexTuple::all(d, r);
            let mut positive = 0;
            // exhaustive cross-check of the full product set
            let mut idx = vec![0usize; m + 1];
            loop {
                let parts: Vec<Partition> = idx.iter().map(|&i| partition_of(&all[i])).collect();
                if lr_coefficient(&parts[0], &parts[1..]) > 0 {
                    positive += 1;
                    let t = LrTuple(idx.iter().map(|&i| all[i].clone()).collect());
                    assert!(tuples.binary_search(&t).is_ok(), "{t:?} missing");
                }
                let mut p = 0;
                while p <= m {
                    idx[p] += 1;
                    if idx[p] < all.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p > m {
                    break;
                }
            }
            assert_eq!(positive, tuples.len(), "d={d} r={r} m={m}");
        }
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(enumerate_lr_tuples(10, 5, 3), Err(Error::Cap(_))));
        assert!(matches!(enumerate_lr_tuples(3, 3, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn disk_cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = LrCache::on_disk(dir.path());
        let direct = enumerate_uncached(3, 1, 3);
        let written = cache.enumerate(3, 1, 3).unwrap();
        assert_eq!(*written, direct);
        let path = cache.file_for(3, 1, 3).unwrap();
        let loaded = LrCache::load(&path, (3, 1, 3)).unwrap();
        assert_eq!(loaded, direct);
    }
}
