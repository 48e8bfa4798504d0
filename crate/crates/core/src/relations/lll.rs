//! Exact LLL reduction over the integers with rational Gram–Schmidt data.

use rug::{Integer, Rational};

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    a.iter()
        .zip(b)
        .fold(Integer::new(), |acc, (x, y)| acc + Integer::from(x * y))
}

struct GramSchmidt {
    mu: Vec<Vec<Rational>>,
    /// Squared norms of the orthogonalized vectors.
    b: Vec<Rational>,
}

impl GramSchmidt {
    fn new(basis: &[Vec<Integer>]) -> Self {
        let n = basis.len();
        let mut mu = vec![vec![Rational::new(); n]; n];
        let mut b: Vec<Rational> = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..i {
                let mut s = Rational::from(dot(&basis[i], &basis[j]));
                for k in 0..j {
                    s -= Rational::from(&mu[j][k] * &mu[i][k]) * &b[k];
                }
                mu[i][j] = s / &b[j];
            }
            let mut s = Rational::from(dot(&basis[i], &basis[i]));
            for k in 0..i {
                s -= Rational::from(&mu[i][k] * &mu[i][k]) * &b[k];
            }
            b.push(s);
        }
        GramSchmidt { mu, b }
    }
}

/// Reduces the rows of `basis` in place with Lovász parameter `delta`.
///
/// Rows must be linearly independent.
pub fn lll_reduce(basis: &mut [Vec<Integer>], delta: &Rational) {
    let n = basis.len();
    if n < 2 {
        return;
    }
    let mut gs = GramSchmidt::new(basis);
    let half = Rational::from((1, 2));
    let mut k = 1;
    while k < n {
        size_reduce(basis, &mut gs, k, k - 1, &half);
        let mu = gs.mu[k][k - 1].clone();
        let lhs = gs.b[k].clone();
        let rhs = (delta.clone() - Rational::from(&mu * &mu)) * &gs.b[k - 1];
        if lhs >= rhs {
            for j in (0..k.saturating_sub(1)).rev() {
                size_reduce(basis, &mut gs, k, j, &half);
            }
            k += 1;
        } else {
            swap(basis, &mut gs, k);
            k = k.max(2) - 1;
        }
    }
}

fn size_reduce(basis: &mut [Vec<Integer>], gs: &mut GramSchmidt, k: usize, j: usize, half: &Rational) {
    if Rational::from(gs.mu[k][j].abs_ref()) <= *half {
        return;
    }
    let r = gs.mu[k][j].clone().round();
    let ri = r.numer().clone();
    let (lo, hi) = basis.split_at_mut(k);
    for (x, y) in hi[0].iter_mut().zip(&lo[j]) {
        *x -= Integer::from(&ri * y);
    }
    gs.mu[k][j] -= &r;
    for i in 0..j {
        let t = Rational::from(&r * &gs.mu[j][i]);
        gs.mu[k][i] -= t;
    }
}

fn swap(basis: &mut [Vec<Integer>], gs: &mut GramSchmidt, k: usize) {
    let n = basis.len();
    basis.swap(k, k - 1);
    let mu = gs.mu[k][k - 1].clone();
    let bk1 = gs.b[k - 1].clone();
    let bk = gs.b[k].clone();
    let new_b = bk.clone() + Rational::from(&mu * &mu) * &bk1;
    gs.mu[k][k - 1] = Rational::from(&mu * &bk1) / &new_b;
    gs.b[k] = Rational::from(&bk1 * &bk) / &new_b;
    gs.b[k - 1] = new_b;
    for j in 0..k - 1 {
        let t = gs.mu[k][j].clone();
        gs.mu[k][j] = gs.mu[k - 1][j].clone();
        gs.mu[k - 1][j] = t;
    }
    for i in k + 1..n {
        let t = gs.mu[i][k].clone();
        gs.mu[i][k] = gs.mu[i][k - 1].clone() - Rational::from(&mu * &t);
        gs.mu[i][k - 1] = t + Rational::from(&gs.mu[k][k - 1] * &gs.mu[i][k]);
    }
}
