//! Absolute logarithmic Weil heights from minimal polynomials.

use num_complex::Complex64;
use num_integer::Integer as _;
use rug::Float;
use serde::{Deserialize, Serialize};

use super::{find_integer_relation, RelationQuery, RelationResult};
use crate::scalar::{ComplexScalar, HpComplex, Precision};
use crate::{invariant, Error, Result};

const ROOT_BITS: u32 = 192;

/// An algebraic number given by its minimal polynomial (coefficients from the
/// leading one down) and an approximation selecting one root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicNumber {
    pub minpoly: Vec<i64>,
    pub root: Complex64,
}

impl AlgebraicNumber {
    pub fn new(minpoly: Vec<i64>, root: Complex64) -> Result<Self> {
        if minpoly.len() < 2 {
            return Err(invariant("minpoly", "degree must be at least 1"));
        }
        if minpoly[0] == 0 {
            return Err(invariant("minpoly", "leading coefficient is zero"));
        }
        let content = minpoly.iter().fold(0i64, |g, &a| g.gcd(&a));
        if content != 1 {
            return Err(invariant("minpoly", format!("content is {content}, expected 1")));
        }
        if minpoly.len() > 2 && *minpoly.last().unwrap() == 0 {
            return Err(invariant("minpoly", "divisible by x"));
        }
        Ok(AlgebraicNumber { minpoly, root })
    }

    pub fn degree(&self) -> usize {
        self.minpoly.len() - 1
    }

    /// The selected root refined to `prec`.
    pub fn root_at(&self, prec: Precision) -> Result<HpComplex> {
        let roots = polynomial_roots(&self.minpoly, prec)?;
        let nearest = roots
            .iter()
            .min_by(|a, b| {
                (a.to_c64() - self.root)
                    .norm()
                    .total_cmp(&(b.to_c64() - self.root).norm())
            })
            .expect("degree >= 1");
        let gap = roots
            .iter()
            .map(|r| (r.to_c64() - nearest.to_c64()).norm())
            .filter(|&d| d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let dist = (nearest.to_c64() - self.root).norm();
        if dist > 1e-6 * (1.0 + self.root.norm()) && dist > gap / 4.0 {
            return Err(invariant(
                "root",
                format!("{} is not close to a root of the minimal polynomial", self.root),
            ));
        }
        Ok(nearest.clone())
    }
}

fn horner<C: ComplexScalar>(coeffs: &[i64], x: &C) -> (C, C) {
    let prec = x.precision();
    let mut p = C::zero(prec);
    let mut dp = C::zero(prec);
    for &a in coeffs {
        dp = dp * x.clone() + p.clone();
        p = p * x.clone() + C::from_i64(a, prec);
    }
    (p, dp)
}

/// All complex roots of an integer polynomial with simple roots.
pub fn polynomial_roots(coeffs: &[i64], prec: Precision) -> Result<Vec<HpComplex>> {
    let d = coeffs.len() - 1;
    let lead = coeffs[0] as f64;
    let monic: Vec<Complex64> = coeffs.iter().map(|&a| Complex64::new(a as f64 / lead, 0.0)).collect();
    let radius = 1.0 + monic[1..].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32) * radius.min(2.0)).collect();
    let eval = |x: Complex64| monic.iter().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a);
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for k in 0..d {
            let denom = (0..d)
                .filter(|&j| j != k)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[k] - z[j]));
            let step = eval(z[k]) / denom;
            if step.is_finite() {
                z[k] -= step;
                delta = delta.max(step.norm());
            }
        }
        if delta < 1e-15 * radius {
            break;
        }
    }
    let hp_prec = Precision(prec.0.max(ROOT_BITS));
    let eps = Float::with_val(hp_prec.0, Float::i_exp(1, -(hp_prec.0 as i32) + 16));
    let mut out = Vec::with_capacity(d);
    for start in z {
        let mut x = HpComplex::from_c64(start, hp_prec);
        let mut converged = false;
        for _ in 0..200 {
            let (p, dp) = horner(coeffs, &x);
            if dp.is_exact_zero() {
                break;
            }
            let step = p / dp;
            x = x - step.clone();
            if step.abs_float() <= Float::with_val(hp_prec.0, &eps * (Float::with_val(hp_prec.0, 1) + x.abs_float())) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootFinding(format!(
                "Newton polish did not converge near {start}"
            )));
        }
        out.push(x);
    }
    for i in 0..d {
        for j in i + 1..d {
            if (out[i].to_c64() - out[j].to_c64()).norm() < 1e-9 * (1.0 + out[i].to_c64().norm()) {
                return Err(Error::RootFinding("repeated root: polynomial is not squarefree".into()));
            }
        }
    }
    Ok(out)
}

/// `(1/d)(log|a_d| + Σ_k log max(1, |α_k|))`.
pub fn height(alpha: &AlgebraicNumber) -> Result<f64> {
    alpha.root_at(Precision(ROOT_BITS))?;
    let roots = polynomial_roots(&alpha.minpoly, Precision(ROOT_BITS))?;
    let p = ROOT_BITS;
    let mut sum = Float::with_val(p, alpha.minpoly[0].unsigned_abs()).ln();
    for r in &roots {
        let a = r.abs_float();
        if a > 1 {
            sum += a.ln();
        }
    }
    Ok(sum.to_f64() / alpha.degree() as f64)
}

/// Height of a rational point `(x_1, …, x_n)`, each `x_k = num/den`:
/// `log max(|d|, |d x_1|, …)` with `d` the least common denominator.
pub fn rational_point_height(coords: &[(i64, i64)]) -> Result<f64> {
    if coords.iter().any(|&(_, q)| q == 0) {
        return Err(invariant("coords", "zero denominator"));
    }
    let den = coords.iter().fold(1i128, |l, &(_, q)| l.lcm(&(q as i128)));
    let mut nums: Vec<i128> = coords.iter().map(|&(p, q)| p as i128 * (den / q as i128)).collect();
    nums.push(den);
    let g = nums.iter().fold(0i128, |g, a| g.gcd(a));
    let m = nums.iter().map(|a| (a / g).abs()).max().unwrap_or(1);
    Ok((m as f64).ln())
}

/// Relation `n log α ∈ 2πiZ`; fires exactly for roots of unity of order up to `bound`.
pub fn root_of_unity_test(alpha: &AlgebraicNumber, bound: u64, precision: u32) -> Result<RelationResult> {
    let p = Precision::from_digits(precision + 20);
    let root = alpha.root_at(p)?;
    find_integer_relation(&RelationQuery {
        values: vec![root.ln()],
        periods: vec![HpComplex::two_pi_i(p)],
        coeff_bound: bound,
        precision,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeightPoint {
    pub height: f64,
    pub degree: u32,
}

/// Points with `height <= hbound` and `degree <= dbound`.
pub fn northcott_filter(points: &[HeightPoint], hbound: f64, dbound: u32) -> Vec<HeightPoint> {
    points
        .iter()
        .filter(|pt| pt.height <= hbound && pt.degree <= dbound)
        .copied()
        .collect()
}
