use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial in `2n` (or `n`) variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - e_var`, or `None` when that exponent is zero.
    pub fn lower(&self, var: usize) -> Option<MultiIndex> {
        if self.0[var] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[var] -= 1;
        Some(MultiIndex(e))
    }

    /// All exponent vectors of total degree exactly `deg`, in lexicographically
    /// descending order (`x_0^deg` first).
    pub fn all_of_degree(dim: usize, deg: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; dim];
        fn rec(pos: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            let dim = cur.len();
            if pos + 1 == dim {
                cur[pos] = left as u32;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in (0..=left).rev() {
                cur[pos] = e as u32;
                rec(pos + 1, left - e, cur, out);
            }
        }
        if dim == 0 {
            if deg == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(0, deg, &mut cur, &mut out);
        out
    }

    /// Multinomial coefficient `deg! / prod(e_i!)`.
    pub fn multinomial(&self) -> f64 {
        let mut acc = 1.0;
        let mut run = 0u32;
        for &e in &self.0 {
            for k in 1..=e {
                run += 1;
                acc *= run as f64 / k as f64;
            }
        }
        acc
    }
}

/// Binomial coefficient as `u64`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_enumeration_counts() {
        for dim in 1..5 {
            for deg in 0..5 {
                let all = MultiIndex::all_of_degree(dim, deg);
                assert_eq!(all.len() as u64, binomial(dim + deg - 1, deg));
                assert!(all.iter().all(|m| m.degree() == deg));
            }
        }
    }

    #[test]
    fn multinomial_small() {
        assert_eq!(MultiIndex(vec![2, 1]).multinomial(), 3.0);
        assert_eq!(MultiIndex(vec![1, 1, 1]).multinomial(), 6.0);
        assert_eq!(MultiIndex(vec![0, 4]).multinomial(), 1.0);
    }
}
