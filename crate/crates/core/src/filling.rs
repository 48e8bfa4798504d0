//! Dehn filling equations in the log chart, core-geodesic holonomies and
//! coefficient scans.
//!
//! For filling coefficients `(p_i, q_i)` the solver finds `u` near the origin
//! with `p_i u_i + q_i v_i(u) = 2πi` for every cusp, where `v_i` comes from
//! the potential. The core geodesic of cusp `i` is `m^{s_i} l^{r_i}` with
//! `p_i r_i - q_i s_i = 1`, so its log-holonomy is `s_i u_i + r_i v_i`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_integer::Integer;
use ordered_float::OrderedFloat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifold::ManifoldDescriptor;
use crate::scalar::{ComplexScalar, Precision};
use crate::series::{v_series, TruncatedSeries};
use crate::{invariant, Error, Result};

/// One `(p, q)` pair per cusp.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FillingCoefficient {
    pub pairs: Vec<(i64, i64)>,
}

impl FillingCoefficient {
    pub fn new(pairs: Vec<(i64, i64)>) -> Result<Self> {
        for (k, &(p, q)) in pairs.iter().enumerate() {
            if p == 0 && q == 0 {
                return Err(invariant(format!("filling[{k}]"), "(0,0) is not a slope"));
            }
            if p.gcd(&q) != 1 {
                return Err(invariant(
                    format!("filling[{k}]"),
                    format!("{p}/{q} is not in lowest terms"),
                ));
            }
        }
        if pairs.is_empty() {
            return Err(invariant("filling", "no slopes given"));
        }
        Ok(FillingCoefficient { pairs })
    }

    pub fn single(p: i64, q: i64) -> Result<Self> {
        Self::new(vec![(p, q)])
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Smallest `|p_i| + |q_i|` over the cusps.
    pub fn min_norm(&self) -> i64 {
        self.pairs.iter().map(|(p, q)| p.abs() + q.abs()).min().unwrap_or(0)
    }

    /// Same slopes, ignoring the sign of each pair.
    pub fn same_slopes(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self
                .pairs
                .iter()
                .zip(&other.pairs)
                .all(|(&(p, q), &(a, b))| p * b == q * a)
    }
}

impl fmt::Display for FillingCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (p, q)) in self.pairs.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}/{q}")?;
        }
        Ok(())
    }
}

impl FromStr for FillingCoefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pairs = s
            .split(',')
            .map(|part| {
                let part = part.trim();
                let (p, q) = part.split_once('/').unwrap_or((part, "1"));
                let parse = |x: &str| {
                    x.trim()
                        .parse::<i64>()
                        .map_err(|_| Error::Parse(format!("bad slope {part:?}")))
                };
                Ok((parse(p)?, parse(q)?))
            })
            .collect::<Result<Vec<_>>>()?;
        FillingCoefficient::new(pairs)
    }
}

/// `(r, s)` with `p r - q s = 1`, `|s|` minimal and ties broken toward `s >= 0`.
pub fn bezout(p: i64, q: i64) -> (i64, i64) {
    let g = p.extended_gcd(&q);
    debug_assert_eq!(g.gcd.abs(), 1);
    // p*x + q*y = g  =>  r = x/g, s = -y/g
    let (r0, s0) = (g.x * g.gcd, -g.y * g.gcd);
    if p == 0 {
        return (0, s0);
    }
    // general solution (r0 + k q, s0 + k p)
    let k_float = -(s0 as f64) / p as f64;
    let mut best: Option<(i64, i64)> = None;
    for k in [
        k_float.floor() as i64 - 1,
        k_float.floor() as i64,
        k_float.ceil() as i64,
        k_float.ceil() as i64 + 1,
    ] {
        let cand = (r0 + k * q, s0 + k * p);
        best = match best {
            None => Some(cand),
            Some(b) => {
                let better = cand.1.abs() < b.1.abs() || (cand.1.abs() == b.1.abs() && cand.1 > b.1);
                Some(if better { cand } else { b })
            }
        };
    }
    best.expect("candidates")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub min_norm: i64,
    pub elliptic_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 50,
            min_norm: 5,
            elliptic_tol: 1e-10,
        }
    }
}

impl SolverOptions {
    /// Options for a high-precision solve targeting `digits` correct digits.
    pub fn high_precision(digits: u32) -> Self {
        SolverOptions {
            tol: 10f64.powi(-(digits as i32 + 5)),
            max_iter: 100,
            ..Default::default()
        }
    }
}

/// The functions `v_i(u)` and their partial derivatives at one precision.
#[derive(Clone, Debug)]
pub struct Chart<C> {
    prec: Precision,
    degree: u32,
    taus: Vec<C>,
    v: Vec<TruncatedSeries<C>>,
    jac: Vec<Vec<TruncatedSeries<C>>>,
}

impl<C: ComplexScalar> Chart<C> {
    pub fn new(desc: &ManifoldDescriptor, prec: Precision) -> Result<Self> {
        let n = desc.cusps();
        let v = (0..n)
            .map(|i| v_series::<C>(&desc.potential, i, prec))
            .collect::<Result<Vec<_>>>()?;
        let jac = v
            .iter()
            .map(|vi| (0..n).map(|j| vi.derivative(j)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let taus = desc
            .shapes
            .iter()
            .map(|s| s.tau.to_scalar::<C>(prec))
            .collect::<Result<Vec<_>>>()?;
        Ok(Chart {
            prec,
            degree: desc.potential.degree_cutoff(),
            taus,
            v,
            jac,
        })
    }

    pub fn cusps(&self) -> usize {
        self.taus.len()
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn v_at(&self, u: &[C]) -> Result<Vec<C>> {
        self.v.iter().map(|vi| vi.evaluate(u)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FillingSolutionIn<C> {
    pub coeff: FillingCoefficient,
    pub u: Vec<C>,
    pub v: Vec<C>,
    pub log_t: Vec<C>,
    pub t: Vec<C>,
    pub bezout: Vec<(i64, i64)>,
    /// Whether `t_i` was replaced by `1/t_i` to get `|t_i| > 1`.
    pub inverted: Vec<bool>,
    pub residual: f64,
    pub iterations: usize,
    pub degree_cutoff: u32,
}

pub type FillingSolution = FillingSolutionIn<Complex64>;

#[allow(clippy::needless_range_loop)]
fn solve_linear<C: ComplexScalar>(mut a: Vec<Vec<C>>, mut b: Vec<C>, iter: usize) -> Result<Vec<C>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x.abs_f64()))
        .fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs_f64().total_cmp(&a[j][col].abs_f64()))
            .expect("nonempty");
        if a[piv][col].abs_f64() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SingularJacobian(iter));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col].clone() / a[col][col].clone();
            for k in col..n {
                let t = a[row][k].clone() - f.clone() * a[col][k].clone();
                a[row][k] = t;
            }
            let t = b[row].clone() - f * b[col].clone();
            b[row] = t;
        }
    }
    let mut x = b.clone();
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc = acc - a[row][k].clone() * x[k].clone();
        }
        x[row] = acc / a[row][row].clone();
    }
    Ok(x)
}

fn residual_vec<C: ComplexScalar>(
    chart: &Chart<C>,
    coeff: &FillingCoefficient,
    u: &[C],
) -> Result<(Vec<C>, Vec<C>, f64)> {
    let v = chart.v_at(u)?;
    let two_pi_i = C::two_pi_i(chart.prec);
    let f: Vec<C> = coeff
        .pairs
        .iter()
        .zip(u.iter().zip(&v))
        .map(|(&(p, q), (ui, vi))| ui.scale_i64(p) + vi.scale_i64(q) - two_pi_i.clone())
        .collect();
    let norm = f.iter().map(|x| x.abs_f64()).fold(0.0, f64::max);
    Ok((f, v, norm))
}

/// Newton iteration on the filling equations at the chart's precision.
pub fn solve_filling_in<C: ComplexScalar>(
    chart: &Chart<C>,
    coeff: &FillingCoefficient,
    opts: &SolverOptions,
) -> Result<FillingSolutionIn<C>> {
    let n = chart.cusps();
    if coeff.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: coeff.len(),
        });
    }
    if coeff.min_norm() < opts.min_norm {
        return Err(invariant(
            "filling",
            format!(
                "|p|+|q| = {} is below the solver minimum {}",
                coeff.min_norm(),
                opts.min_norm
            ),
        ));
    }
    let prec = chart.prec;
    let two_pi_i = C::two_pi_i(prec);
    let mut u: Vec<C> = coeff
        .pairs
        .iter()
        .zip(&chart.taus)
        .map(|(&(p, q), tau)| two_pi_i.clone() / (C::from_i64(p, prec) + tau.scale_i64(q)))
        .collect();
    let (mut f, mut v, mut res) = residual_vec(chart, coeff, &u)?;
    let mut iterations = 0;
    while res > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let jac: Vec<Vec<C>> = (0..n)
            .map(|i| {
                let (p, q) = coeff.pairs[i];
                (0..n)
                    .map(|j| {
                        let d = chart.jac[i][j].evaluate(&u)?.scale_i64(q);
                        Ok(if i == j { d + C::from_i64(p, prec) } else { d })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let rhs: Vec<C> = f.iter().map(|x| -x.clone()).collect();
        let step = solve_linear(jac, rhs, iterations)?;
        let mut factor = C::one(prec);
        let half = C::one(prec) / C::from_i64(2, prec);
        let mut accepted = None;
        for _ in 0..=8 {
            let trial: Vec<C> = u
                .iter()
                .zip(&step)
                .map(|(ui, di)| ui.clone() + factor.clone() * di.clone())
                .collect();
            let (tf, tv, tres) = residual_vec(chart, coeff, &trial)?;
            let better = tres < res;
            accepted = Some((trial, tf, tv, tres));
            if better {
                break;
            }
            factor = factor * half.clone();
        }
        let (nu, nf, nv, nres) = accepted.expect("at least one trial");
        u = nu;
        f = nf;
        v = nv;
        res = nres;
    }

    let mut log_t = Vec::with_capacity(n);
    let mut t = Vec::with_capacity(n);
    let mut bez = Vec::with_capacity(n);
    let mut inverted = Vec::with_capacity(n);
    for (i, &(p, q)) in coeff.pairs.iter().enumerate() {
        let (r, s) = bezout(p, q);
        let mut lt = u[i].scale_i64(s) + v[i].scale_i64(r);
        let flip = lt.re_f64() < 0.0;
        if flip {
            lt = -lt;
        }
        let gap = (lt.re_f64().exp() - 1.0).abs();
        if gap < opts.elliptic_tol {
            return Err(Error::Elliptic { cusp: i, gap });
        }
        t.push(lt.exp());
        log_t.push(lt);
        bez.push((r, s));
        inverted.push(flip);
    }
    Ok(FillingSolutionIn {
        coeff: coeff.clone(),
        u,
        v,
        log_t,
        t,
        bezout: bez,
        inverted,
        residual: res,
        iterations,
        degree_cutoff: chart.degree,
    })
}

pub fn solve_filling(
    desc: &ManifoldDescriptor,
    coeff: &FillingCoefficient,
    opts: &SolverOptions,
) -> Result<FillingSolution> {
    let chart = Chart::<Complex64>::new(desc, Precision::DOUBLE)?;
    solve_filling_in(&chart, coeff, opts)
}

/// `Π t_i^{a_i}` evaluated as `exp(Σ a_i log t_i)`.
pub fn holonomy_product<C: ComplexScalar>(solution: &FillingSolutionIn<C>, exponents: &[i64]) -> Result<C> {
    Ok(log_holonomy_combination(solution, exponents)?.exp())
}

/// `Σ a_i log t_i`.
pub fn log_holonomy_combination<C: ComplexScalar>(solution: &FillingSolutionIn<C>, exponents: &[i64]) -> Result<C> {
    if exponents.len() != solution.log_t.len() {
        return Err(Error::Dimension {
            expected: solution.log_t.len(),
            got: exponents.len(),
        });
    }
    let prec = solution.log_t[0].precision();
    Ok(solution
        .log_t
        .iter()
        .zip(exponents)
        .fold(C::zero(prec), |acc, (lt, &a)| acc + lt.scale_i64(a)))
}

/// Slopes `p/q` with `gcd = 1` and `lo <= |p|+|q| <= hi`, one representative
/// per slope (`q > 0`, or `1/0`), sorted by `(p, q)`.
pub fn slopes_in_range(lo: i64, hi: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for q in 0..=hi {
        for p in -hi..=hi {
            let norm = p.abs() + q;
            if norm < lo || norm > hi || p.gcd(&q) != 1 {
                continue;
            }
            if q == 0 && p != 1 {
                continue;
            }
            out.push((p, q));
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanEntry {
    pub coeff: FillingCoefficient,
    pub product: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Collision {
    pub a: FillingCoefficient,
    pub b: FillingCoefficient,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SkippedFilling {
    pub coeff: FillingCoefficient,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub manifold: String,
    pub norm_range: (i64, i64),
    pub exponents: Vec<i64>,
    pub collision_tol: f64,
    pub degree_cutoff: u32,
    pub evaluated: usize,
    pub collisions: Vec<Collision>,
    pub min_gap: Option<Collision>,
    pub skipped: Vec<SkippedFilling>,
    #[serde(skip)]
    pub entries: Vec<ScanEntry>,
}

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub norm_range: (i64, i64),
    pub exponents: Vec<i64>,
    pub collision_tol: f64,
    pub threads: usize,
    pub solver: SolverOptions,
}

/// Cartesian product of per-cusp slope lists, in lexicographic order.
fn coefficient_grid(slopes: &[(i64, i64)], cusps: usize) -> Vec<FillingCoefficient> {
    let mut grid = vec![Vec::new()];
    for _ in 0..cusps {
        grid = grid
            .into_iter()
            .flat_map(|prefix: Vec<(i64, i64)>| {
                slopes.iter().map(move |s| {
                    let mut next = prefix.clone();
                    next.push(*s);
                    next
                })
            })
            .collect();
    }
    grid.into_iter().map(|pairs| FillingCoefficient { pairs }).collect()
}

pub fn scan_products(desc: &ManifoldDescriptor, opts: &ScanOptions) -> Result<ScanReport> {
    let (lo, hi) = opts.norm_range;
    if lo > hi {
        return Err(Error::EmptyRange(format!("min {lo} > max {hi}")));
    }
    if lo < opts.solver.min_norm {
        return Err(invariant(
            "norm_range",
            format!("minimum {lo} is below the solver minimum {}", opts.solver.min_norm),
        ));
    }
    if opts.exponents.len() != desc.cusps() {
        return Err(Error::Dimension {
            expected: desc.cusps(),
            got: opts.exponents.len(),
        });
    }
    let slopes = slopes_in_range(lo, hi);
    if slopes.is_empty() {
        return Err(Error::EmptyRange(format!(
            "no coprime slopes with norm in [{lo}, {hi}]"
        )));
    }
    let chart = Chart::<Complex64>::new(desc, Precision::DOUBLE)?;
    let grid = coefficient_grid(&slopes, desc.cusps());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::Degenerate(e.to_string()))?;
    let results: Vec<(FillingCoefficient, Result<Complex64>)> = pool.install(|| {
        grid.into_par_iter()
            .map(|coeff| {
                let r = solve_filling_in(&chart, &coeff, &opts.solver)
                    .and_then(|sol| holonomy_product(&sol, &opts.exponents));
                (coeff, r)
            })
            .collect()
    });
    let mut entries = Vec::with_capacity(results.len());
    let mut skipped = Vec::new();
    for (coeff, r) in results {
        match r {
            Ok(product) => entries.push(ScanEntry { coeff, product }),
            Err(e) => {
                log::warn!("skipping filling {coeff}: {e}");
                skipped.push(SkippedFilling {
                    coeff,
                    reason: e.to_string(),
                });
            }
        }
    }
    let points: Vec<Complex64> = entries.iter().map(|e| e.product).collect();
    let collisions = close_pairs(&points, opts.collision_tol)
        .into_iter()
        .map(|(i, j, gap)| Collision {
            a: entries[i].coeff.clone(),
            b: entries[j].coeff.clone(),
            gap,
        })
        .collect();
    let min_gap = closest_pair(&points).map(|(i, j, gap)| Collision {
        a: entries[i].coeff.clone(),
        b: entries[j].coeff.clone(),
        gap,
    });
    Ok(ScanReport {
        manifold: desc.name.clone(),
        norm_range: opts.norm_range,
        exponents: opts.exponents.clone(),
        collision_tol: opts.collision_tol,
        degree_cutoff: desc.potential.degree_cutoff(),
        evaluated: entries.len(),
        collisions,
        min_gap,
        skipped,
        entries,
    })
}

/// All index pairs `(i < j)` with `|z_i - z_j| < tol`, sorted.
pub fn close_pairs(points: &[Complex64], tol: f64) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].re.total_cmp(&points[b].re));
    let mut out = Vec::new();
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if points[j].re - points[i].re >= tol {
                break;
            }
            let d = (points[i] - points[j]).norm();
            if d < tol {
                out.push((i.min(j), i.max(j), d));
            }
        }
    }
    out.sort_by_key(|a| (a.0, a.1));
    out
}

/// Closest pair of points by plane sweep; ties go to the lexicographically
/// smallest index pair.
pub fn closest_pair(points: &[Complex64]) -> Option<(usize, usize, f64)> {
    if points.len() < 2 {
        return None;
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .re
            .total_cmp(&points[b].re)
            .then(points[a].im.total_cmp(&points[b].im))
            .then(a.cmp(&b))
    });
    let mut best: (usize, usize, f64) = (0, 0, f64::INFINITY);
    let mut active: BTreeSet<(OrderedFloat<f64>, usize)> = BTreeSet::new();
    let mut left = 0;
    for &i in &order {
        let z = points[i];
        while left < order.len() && z.re - points[order[left]].re > best.2 {
            let j = order[left];
            active.remove(&(OrderedFloat(points[j].im), j));
            left += 1;
        }
        let lo = (OrderedFloat(z.im - best.2), 0);
        let hi = (OrderedFloat(z.im + best.2), usize::MAX);
        for &(_, j) in active.range(lo..=hi) {
            let d = (z - points[j]).norm();
            let pair = (i.min(j), i.max(j));
            if d < best.2 || (d == best.2 && pair < (best.0, best.1)) {
                best = (pair.0, pair.1, d);
            }
        }
        active.insert((OrderedFloat(z.im), i));
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldDescriptor;
    use std::f64::consts::PI;

    fn quadratic(tau: (&str, &str)) -> ManifoldDescriptor {
        ManifoldDescriptor::from_json_str(&format!(
            r#"{{"name": "q", "cusps": 1, "shapes": [["{}", "{}"]],
                "potential": {{"degree_cutoff": 2, "terms": []}}}}"#,
            tau.0, tau.1
        ))
        .unwrap()
    }

    fn quartic(c4: &str) -> ManifoldDescriptor {
        ManifoldDescriptor::from_json_str(&format!(
            r#"{{"name": "q4", "cusps": 1, "shapes": [["0.23", "1.15"]],
                "potential": {{"degree_cutoff": 4, "terms": [{{"index": [4], "coeff": ["{c4}", "0"]}}]}}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn bezout_minimal_s() {
        assert_eq!(bezout(7, 3), (1, 2));
        for p in -30i64..=30 {
            for q in -30i64..=30 {
                if (p, q) == (0, 0) || p.gcd(&q) != 1 {
                    continue;
                }
                let (r, s) = bezout(p, q);
                assert_eq!(p * r - q * s, 1, "{p}/{q}");
                if p != 0 {
                    // no other solution has smaller |s|
                    for k in [-1i64, 1] {
                        let s2 = s + k * p;
                        assert!(s2.abs() > s.abs() || (s2.abs() == s.abs() && s >= 0));
                    }
                }
            }
        }
    }

    #[test]
    fn parse_filling_strings() {
        let f: FillingCoefficient = "7/3, -5/2".parse().unwrap();
        assert_eq!(f.pairs, vec![(7, 3), (-5, 2)]);
        assert!("6/4".parse::<FillingCoefficient>().is_err());
        assert!("0/0".parse::<FillingCoefficient>().is_err());
        assert!("x/2".parse::<FillingCoefficient>().is_err());
        assert_eq!(f.to_string(), "7/3,-5/2");
    }

    #[test]
    fn quadratic_closed_form() {
        let tau = Complex64::new(0.5, 1.2);
        let d = quadratic(("0.5", "1.2"));
        let sol = solve_filling(
            &d,
            &FillingCoefficient::single(7, 3).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        let u = Complex64::new(0.0, 2.0 * PI) / (7.0 + 3.0 * tau);
        assert!((sol.u[0] - u).norm() <= 1e-12 * u.norm());
        assert_eq!(sol.bezout[0], (1, 2));
        // Im τ > 0 makes Re log t negative before normalization.
        assert!(sol.inverted[0]);
        let lt = -(2.0 + tau) * u;
        assert!((sol.log_t[0] - lt).norm() < 1e-13);
        assert!(sol.t[0].norm() > 1.0);
    }

    #[test]
    fn alternative_bezout_pair_gives_same_holonomy() {
        let d = quadratic(("0.5", "1.2"));
        let sol = solve_filling(
            &d,
            &FillingCoefficient::single(7, 3).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        // (r, s) + (q, p) = (4, 9)
        let alt = -(sol.u[0] * 9.0 + sol.v[0] * 4.0);
        assert!((alt.exp() - sol.t[0]).norm() < 1e-12);
        assert!(((alt - sol.log_t[0]) - Complex64::new(0.0, -2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn quartic_large_norm_stays_near_guess() {
        let d = quartic("0.05");
        let sol = solve_filling(
            &d,
            &FillingCoefficient::single(100, 1).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        let tau = Complex64::new(0.23, 1.15);
        let u0 = Complex64::new(0.0, 2.0 * PI) / (100.0 + tau);
        assert!(sol.residual < 1e-12);
        assert!((sol.u[0] - u0).norm() < 10.0 * u0.norm().powi(3));
        // independent scalar Newton on p u + q (τ u + 2 c4 u^3) = 2πi
        let mut x = u0;
        for _ in 0..60 {
            let f = 100.0 * x + tau * x + 0.1 * x * x * x - Complex64::new(0.0, 2.0 * PI);
            let df = 100.0 + tau + 0.3 * x * x;
            x -= f / df;
        }
        assert!((sol.u[0] - x).norm() < 1e-14);
    }

    #[test]
    fn below_min_norm_is_rejected() {
        let d = quadratic(("0.5", "1.2"));
        let err = solve_filling(
            &d,
            &FillingCoefficient::single(2, 1).unwrap(),
            &SolverOptions::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn nonconvergence_is_reported() {
        let d = quartic("0.05");
        let opts = SolverOptions {
            max_iter: 0,
            ..Default::default()
        };
        let err = solve_filling(&d, &FillingCoefficient::single(7, 3).unwrap(), &opts).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }));
    }

    #[test]
    fn elliptic_tolerance_triggers() {
        let d = quadratic(("0.5", "1.2"));
        let opts = SolverOptions {
            elliptic_tol: 10.0,
            ..Default::default()
        };
        let err = solve_filling(&d, &FillingCoefficient::single(7, 3).unwrap(), &opts).unwrap_err();
        assert!(matches!(err, Error::Elliptic { cusp: 0, .. }));
    }

    #[test]
    fn holonomy_product_basics() {
        let d = quadratic(("0.5", "1.2")).synthesize_product(2).unwrap();
        let sol = solve_filling(&d, &"7/3,11/2".parse().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(holonomy_product(&sol, &[0, 0]).unwrap(), Complex64::new(1.0, 0.0));
        assert!((holonomy_product(&sol, &[1, 0]).unwrap() - sol.t[0]).norm() < 1e-15);
        let direct = sol.t[0] * sol.t[1];
        assert!((holonomy_product(&sol, &[1, 1]).unwrap() - direct).norm() < 1e-14);
        assert!(holonomy_product(&sol, &[1]).is_err());
    }

    #[test]
    fn slope_enumeration_counts() {
        // 2 φ(k) slopes of norm k for k >= 2
        let s = slopes_in_range(7, 7);
        assert_eq!(s.len(), 12);
        assert!(s.iter().all(|&(p, q)| q > 0 && p.gcd(&q) == 1));
    }

    #[test]
    fn closest_pair_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Complex64> = (0..200)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mut brute = f64::INFINITY;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    brute = brute.min((pts[i] - pts[j]).norm());
                }
            }
            assert_eq!(closest_pair(&pts).unwrap().2, brute);
        }
    }

    #[test]
    fn one_cusp_scan_against_closed_form() {
        let tau = Complex64::new(0.5, 1.2);
        let d = quadratic(("0.5", "1.2"));
        let opts = ScanOptions {
            norm_range: (20, 30),
            exponents: vec![1],
            collision_tol: 1e-9,
            threads: 2,
            solver: SolverOptions::default(),
        };
        let rep = scan_products(&d, &opts).unwrap();
        assert!(rep.collisions.is_empty());
        let closed: Vec<Complex64> = slopes_in_range(20, 30)
            .into_iter()
            .map(|(p, q)| {
                let (r, s) = bezout(p, q);
                let w = Complex64::new(0.0, 2.0 * PI) * (s as f64 + r as f64 * tau) / (p as f64 + q as f64 * tau);
                let w = if w.re < 0.0 { -w } else { w };
                w.exp()
            })
            .collect();
        let mut brute = f64::INFINITY;
        for i in 0..closed.len() {
            for j in i + 1..closed.len() {
                brute = brute.min((closed[i] - closed[j]).norm());
            }
        }
        let gap = rep.min_gap.unwrap().gap;
        assert!((gap - brute).abs() < 1e-12 * brute.max(1e-3), "{gap} vs {brute}");
    }

    #[test]
    fn product_manifold_swap_collides() {
        let d = quadratic(("0.5", "1.2")).synthesize_product(2).unwrap();
        let opts = ScanOptions {
            norm_range: (7, 8),
            exponents: vec![1, 1],
            collision_tol: 1e-9,
            threads: 1,
            solver: SolverOptions::default(),
        };
        let rep = scan_products(&d, &opts).unwrap();
        let a: FillingCoefficient = "7/1,5/3".parse().unwrap();
        let b: FillingCoefficient = "5/3,7/1".parse().unwrap();
        assert!(rep
            .collisions
            .iter()
            .any(|c| (c.a == a && c.b == b) || (c.a == b && c.b == a)));
        assert!(rep.collisions.iter().all(|c| c.a != c.b));
    }
}
