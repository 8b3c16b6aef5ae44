use std::collections::{BTreeSet, VecDeque};

use crate::saturation::freq::FrequencySet;

/// Invariant factors (absolute values, nonzero only) of the integer matrix
/// whose rows are the vectors of `rows`, each of length `d`.
pub fn invariant_factors(rows: &[Vec<i64>], d: usize) -> Vec<i128> {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let m = a.len();
    let mut factors = Vec::new();
    for t in 0..m.min(d) {
        loop {
            // smallest nonzero entry of the trailing block goes to the pivot
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..d {
                    if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else {
                return factors;
            };
            a.swap(t, bi);
            for row in a.iter_mut() {
                row.swap(t, bj);
            }
            let piv = a[t][t];
            let mut clean = true;
            for i in t + 1..m {
                let q = a[i][t] / piv;
                if q != 0 {
                    for j in t..d {
                        a[i][j] -= q * a[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..d {
                let q = a[t][j] / piv;
                if q != 0 {
                    for row in a.iter_mut() {
                        row[j] -= q * row[t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility condition: fold an offending row into the pivot row
            let offending = (t + 1..m).find(|&i| (t + 1..d).any(|j| a[i][j] % piv != 0));
            match offending {
                Some(i) => {
                    for j in t..d {
                        a[t][j] += a[i][j];
                    }
                }
                None => {
                    factors.push(piv.abs());
                    break;
                }
            }
        }
    }
    factors
}

/// Whether the integer combinations of `set` exhaust `Z^d`.
pub fn is_generator(set: &FrequencySet) -> bool {
    let d = set.dim();
    let f = invariant_factors(&set.as_vecs(), d);
    f.len() == d && f.iter().all(|&x| x == 1)
}

/// `Ĩ ∩ [-radius, radius]^d`, found by breadth-first search over `± I` steps.
///
/// The walk is allowed to leave the target box by a margin proportional to the
/// step size, which is ample for the small sets this is used on.
pub fn lattice_closure(set: &FrequencySet, radius: i64) -> FrequencySet {
    let d = set.dim();
    let steps: Vec<Vec<i64>> = set.signed().iter().filter(|k| k.iter().any(|&x| x != 0)).cloned().collect();
    let outer = radius + 2 * d as i64 * set.max_abs().max(1);
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    let origin = vec![0i64; d];
    seen.insert(origin.clone());
    queue.push_back(origin);
    while let Some(x) = queue.pop_front() {
        for s in &steps {
            let y: Vec<i64> = x.iter().zip(s).map(|(a, b)| a + b).collect();
            if y.iter().all(|v| v.abs() <= outer) && seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    FrequencySet::new(d, seen.into_iter().filter(|k| k.iter().all(|v| v.abs() <= radius)))
        .expect("dimension preserved")
}
