use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::adjacent_hamming;
use crate::simcore::TestVector;

pub const EXACT_MAX: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactOrder {
    pub order: Vec<usize>,
    pub vectors: Vec<TestVector>,
    pub total_adjacent_hamming: usize,
}

/// Minimum adjacent-Hamming ordering by exhaustive search. Among equal
/// totals the lexicographically smallest index sequence wins.
pub fn exact_min_order(vectors: &[TestVector]) -> Result<ExactOrder> {
    let n = vectors.len();
    if n == 0 {
        return Err(Error::EmptyFrame);
    }
    if n > EXACT_MAX {
        return Err(Error::TooManyVectors {
            max: EXACT_MAX,
            found: n,
        });
    }
    let dist: Vec<Vec<usize>> = vectors
        .iter()
        .map(|a| vectors.iter().map(|b| a.hamming(b)).collect())
        .collect();

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_total = usize::MAX;
    loop {
        let total: usize = perm.windows(2).map(|w| dist[w[0]][w[1]]).sum();
        if total < best_total {
            best_total = total;
            best.clone_from(&perm);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let framed: Vec<TestVector> = best.iter().map(|&i| vectors[i].clone()).collect();
    debug_assert_eq!(adjacent_hamming(&framed)?, best_total);
    Ok(ExactOrder {
        order: best,
        vectors: framed,
        total_adjacent_hamming: best_total,
    })
}

/// Advances to the next permutation in lexicographic order.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = p.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = p
        .iter()
        .rposition(|&x| x > p[i])
        .expect("pivot has a successor");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(s: &str) -> TestVector {
        s.parse().unwrap()
    }

    #[test]
    fn permutations_are_lexicographic_and_complete() {
        let mut p = vec![0, 1, 2, 3];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            assert!(seen.last().unwrap() < &p);
            seen.push(p.clone());
        }
        assert_eq!(seen.len(), 24);
    }

    #[test]
    fn small_cases() {
        let one = exact_min_order(&[tv("0101")]).unwrap();
        assert_eq!(one.order, vec![0]);
        assert_eq!(one.total_adjacent_hamming, 0);
        let two = exact_min_order(&[tv("0000"), tv("0111")]).unwrap();
        assert_eq!(two.total_adjacent_hamming, 3);
        assert_eq!(two.order, vec![0, 1]);
        assert!(matches!(exact_min_order(&[]), Err(Error::EmptyFrame)));
        let nine = vec![tv("0"); 9];
        assert!(matches!(
            exact_min_order(&nine),
            Err(Error::TooManyVectors { max: 8, found: 9 })
        ));
    }
}
