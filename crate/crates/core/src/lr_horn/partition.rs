use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer partition with trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::argument(format!("{parts:?} is not non-increasing")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// `r` rows of length `c`.
    pub fn rectangle(r: usize, c: usize) -> Self {
        if c == 0 {
            Partition::empty()
        } else {
            Partition(vec![c; r])
        }
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Part `i` (0-based), zero past the end.
    pub fn get(&self, i: usize) -> usize {
        self.0.get(i).copied().unwrap_or(0)
    }

    /// Diagram containment `self ⊆ other`.
    pub fn fits_in(&self, other: &Partition) -> bool {
        self.len() <= other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// All partitions of `size` containing `lower` and contained in `upper`.
    pub fn between(lower: &Partition, upper: &Partition, size: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        if !lower.fits_in(upper) || size < lower.size() || size > upper.size() {
            return out;
        }
        let rows = upper.len();
        let mut cur = vec![0usize; rows];
        fn rec(
            row: usize,
            remaining: usize,
            cap: usize,
            lower: &Partition,
            upper: &Partition,
            cur: &mut Vec<usize>,
            out: &mut Vec<Partition>,
        ) {
            let rows = cur.len();
            if row == rows {
                if remaining == 0 {
                    out.push(Partition::new(cur.clone()).expect("generated in order"));
                }
                return;
            }
            // Cells still placeable below this row bound what this row must take.
            let hi = cap.min(upper.get(row)).min(remaining);
            let lo = lower.get(row);
            if lo > hi {
                return;
            }
            for x in (lo..=hi).rev() {
                let rest_max: usize = (row + 1..rows).map(|r| upper.get(r).min(x)).sum();
                if remaining - x > rest_max {
                    break;
                }
                cur[row] = x;
                rec(row + 1, remaining - x, x, lower, upper, cur, out);
            }
            cur[row] = 0;
        }
        rec(0, size, usize::MAX, lower, upper, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Strictly increasing 1-based indices `j_1 < … < j_r ≤ d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(entries: Vec<usize>, d: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::argument("index tuple must be nonempty"));
        }
        if entries[0] < 1 || *entries.last().unwrap() > d {
            return Err(Error::argument(format!("{entries:?} leaves 1..={d}")));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::argument(format!("{entries:?} is not strictly increasing")));
        }
        Ok(IndexTuple(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// `K_d^r` in lexicographic order.
    pub fn all(d: usize, r: usize) -> Vec<IndexTuple> {
        let mut out = Vec::new();
        if r == 0 || r > d {
            return out;
        }
        let mut cur: Vec<usize> = (1..=r).collect();
        loop {
            out.push(IndexTuple(cur.clone()));
            let mut i = r;
            while i > 0 && cur[i - 1] == d - r + i {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            cur[i - 1] += 1;
            for t in i..r {
                cur[t] = cur[t - 1] + 1;
            }
        }
        out
    }

    /// Inverse of [`partition_of`] for partitions inside the `r × (d − r)` box.
    pub fn from_partition(p: &Partition, r: usize, d: usize) -> Result<Self> {
        if p.len() > r || p.get(0) > d - r {
            return Err(Error::argument(format!("{p} does not fit in a {r}×{} box", d - r)));
        }
        let entries = (1..=r).map(|t| p.get(r - t) + t).collect();
        IndexTuple::new(entries, d)
    }

    /// `|J ∩ {1..k}|`.
    pub fn count_at_most(&self, k: usize) -> usize {
        self.0.iter().filter(|&&j| j <= k).count()
    }
}

/// `λ(J) = (j_r − r, …, j_1 − 1)`.
pub fn partition_of(j: &IndexTuple) -> Partition {
    let r = j.r();
    let parts = (0..r).map(|s| j.0[r - 1 - s] - (r - s)).collect();
    Partition::new(parts).expect("index tuples give non-increasing parts")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn associated_partitions() {
        let d = 5;
        assert!(partition_of(&IndexTuple::new(vec![1, 2, 3], d).unwrap()).is_empty());
        assert_eq!(
            partition_of(&IndexTuple::new(vec![2, 4], d).unwrap()).parts(),
            &[2, 1]
        );
        assert_eq!(partition_of(&IndexTuple::new(vec![d], d).unwrap()).parts(), &[d - 1]);
    }

    #[test]
    fn round_trip_box() {
        for d in 1..7 {
            for r in 1..=d {
                let all = IndexTuple::all(d, r);
                for j in &all {
                    let p = partition_of(j);
                    assert_eq!(&IndexTuple::from_partition(&p, r, d).unwrap(), j);
                }
                let boxed = Partition::between(&Partition::empty(), &Partition::rectangle(r, d - r), 0);
                assert_eq!(boxed.len(), 1);
            }
        }
    }

    #[test]
    fn combinations_count_and_order() {
        let all = IndexTuple::all(5, 2);
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn between_counts() {
        // partitions of 4: 5 of them
        let all = Partition::between(&Partition::empty(), &Partition::rectangle(4, 4), 4);
        assert_eq!(all.len(), 5);
        let inside = Partition::between(
            &Partition::new(vec![1]).unwrap(),
            &Partition::rectangle(2, 2),
            3,
        );
        assert_eq!(inside, vec![Partition::new(vec![2, 1]).unwrap()]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(IndexTuple::new(vec![2, 2], 3).is_err());
        assert!(IndexTuple::new(vec![0, 2], 3).is_err());
        assert!(IndexTuple::new(vec![1, 4], 3).is_err());
        assert_eq!(Partition::new(vec![3, 0, 0]).unwrap().parts(), &[3]);
    }
}
