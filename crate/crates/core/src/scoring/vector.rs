use crate::error::{Error, Result};
use crate::normalize::Flagged;

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension { expected, actual })
    }
}

/// u·v / (|u||v|), or 0 when either norm is 0.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(u.len(), v.len())?;
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}

/// −‖u − v‖₂.
pub fn neg_euclidean(u: &[f64], v: &[f64]) -> Result<f64> {
    check_dims(u.len(), v.len())?;
    Ok(-u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Coordinate-wise mean.
pub fn mean_pool<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors
        .first()
        .ok_or_else(|| Error::Config("mean_pool needs at least one vector".into()))?;
    let dim = first.as_ref().len();
    let mut acc = vec![0.0; dim];
    for v in vectors {
        let v = v.as_ref();
        check_dims(dim, v.len())?;
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    let n = vectors.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// A sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    dim: usize,
    entries: Vec<(u32, f64)>,
}

impl SparseVec {
    pub fn new(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.retain(|&(_, x)| x != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Config(format!("duplicate sparse index {}", w[0].0)));
            }
        }
        if let Some(&(i, _)) = entries.last() {
            if i as usize >= dim {
                return Err(Error::Dimension {
                    expected: dim,
                    actual: i as usize + 1,
                });
            }
        }
        Ok(SparseVec { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        SparseVec { dim, entries: Vec::new() }
    }

    pub fn from_dense(v: &[f64]) -> Self {
        SparseVec {
            dim: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0.0)
                .map(|(i, &x)| (i as u32, x))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            out[i as usize] = x;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.sq_norm().sqrt()
    }

    fn sq_norm(&self) -> f64 {
        self.entries.iter().map(|(_, x)| x * x).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.entries.iter_mut().for_each(|(_, x)| *x /= n);
        }
        self
    }

    pub fn dot(&self, other: &SparseVec) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(acc)
    }

    /// Cosine similarity; flagged (and 0) when either vector is zero.
    pub fn cosine(&self, other: &SparseVec) -> Result<Flagged<f64>> {
        let dot = self.dot(other)?;
        let (nu, nv) = (self.sq_norm(), other.sq_norm());
        if nu == 0.0 || nv == 0.0 {
            return Ok(Flagged::flagged(0.0));
        }
        Ok(Flagged::clean((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0)))
    }

    pub fn euclidean(&self, other: &SparseVec) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() || j < b.len() {
            let d = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    x.1 - y.1
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    x.1
                }
                (Some(x), None) => {
                    i += 1;
                    x.1
                }
                (_, Some(y)) => {
                    j += 1;
                    y.1
                }
                (None, None) => unreachable!(),
            };
            acc += d * d;
        }
        Ok(acc.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!(matches!(cosine(&[1.0], &[1.0, 2.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn neg_euclidean_examples() {
        assert_eq!(neg_euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(neg_euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), -5.0);
        assert!(neg_euclidean(&[0.0], &[3.0, 4.0]).is_err());
    }

    #[test]
    fn mean_pool_examples() {
        assert_eq!(mean_pool(&[vec![3.0, -1.0]]).unwrap(), [3.0, -1.0]);
        assert_eq!(mean_pool(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap(), [0.5, 0.5]);
        let m = mean_pool(&[vec![1.0, 2.0, 3.0], vec![4.0, 0.0, -3.0], vec![1.0, 1.0, 6.0]]).unwrap();
        assert_eq!(m, [2.0, 1.0, 2.0]);
        let empty: [Vec<f64>; 0] = [];
        assert!(mean_pool(&empty).is_err());
        assert!(mean_pool(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn sparse_matches_dense() {
        let a = [0.0, 1.5, 0.0, -2.0];
        let b = [3.0, 0.5, 0.0, 1.0];
        let (sa, sb) = (SparseVec::from_dense(&a), SparseVec::from_dense(&b));
        assert!((sa.cosine(&sb).unwrap().value - cosine(&a, &b).unwrap()).abs() < 1e-15);
        assert!((-sa.euclidean(&sb).unwrap() - neg_euclidean(&a, &b).unwrap()).abs() < 1e-12);
        assert_eq!(sa.to_dense(), a);
        assert!(SparseVec::zeros(4).cosine(&sb).unwrap().flagged);
    }

    #[test]
    fn sparse_rejects_out_of_range() {
        assert!(SparseVec::new(2, vec![(2, 1.0)]).is_err());
        assert!(SparseVec::new(3, vec![(1, 1.0), (1, 2.0)]).is_err());
    }
}
