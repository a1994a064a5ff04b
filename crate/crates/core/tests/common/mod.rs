#![allow(dead_code)]

use std::time::{Duration, Instant};

use num::{Rational64, Zero};

/// Outcome of plain Gaussian elimination on `A x = b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gauss {
    Unique(Vec<Rational64>),
    Underdetermined,
    Inconsistent,
}

pub fn gauss(mut a: Vec<Vec<Rational64>>, mut b: Vec<Rational64>, n: usize) -> Gauss {
    let rows = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        b.swap(r, p);
        let inv = a[r][c].recip();
        for j in 0..n {
            a[r][j] *= inv;
        }
        b[r] *= inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c];
                for j in 0..n {
                    let d = a[r][j] * f;
                    a[i][j] -= d;
                }
                let d = b[r] * f;
                b[i] -= d;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if (r..rows).any(|i| !b[i].is_zero()) {
        return Gauss::Inconsistent;
    }
    if pivots.len() < n {
        return Gauss::Underdetermined;
    }
    let mut x = vec![Rational64::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = b[i];
    }
    Gauss::Unique(x)
}

/// The linear system for a set of (input, output) pairs of the K-function
/// program: input `a ≤ K` sums every `f_j` except `f_a`, input `K+1` adds `f_1`.
pub fn khs_system(k: usize, set: &[(u64, Rational64)]) -> (Vec<Vec<Rational64>>, Vec<Rational64>) {
    let one = Rational64::from_integer(1);
    let zero = Rational64::zero();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &(x, y) in set {
        let row: Vec<Rational64> = (1..=k as u64)
            .map(|j| if x as usize == k + 1 { if j == 1 { one } else { zero } } else if j == x { zero } else { one })
            .collect();
        a.push(row);
        b.push(y - Rational64::from_integer(x as i64));
    }
    (a, b)
}

/// Prints the per-criterion line and returns the elapsed time.
pub fn report(id: usize, name: &str, passed: bool, started: Instant, limit: Duration, detail: &str) -> Duration {
    let took = started.elapsed();
    let verdict = if passed && took <= limit { "PASS" } else { "FAIL" };
    println!("acceptance {id:>2} {verdict} {name} ({:.2?} of {:?}) {detail}", took, limit);
    took
}
