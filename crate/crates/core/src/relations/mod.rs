//! Integer relations by lattice reduction, and the tests built on them:
//! multiplicative independence of holonomies, independence of pseudo volumes
//! modulo `iπ²`, cusp-shape symmetry and quadraticity. Heights live in
//! [`height`].

pub mod height;
pub mod lll;

use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::filling::FillingSolutionIn;
use crate::scalar::{ComplexScalar, HpComplex, Precision};
use crate::{invariant, Error, Result};

pub use height::{height, northcott_filter, AlgebraicNumber};

/// Below this many digits relation certificates are meaningless.
pub const MIN_PRECISION: u32 = 30;

#[derive(Clone, Debug)]
pub struct RelationQuery {
    pub values: Vec<HpComplex>,
    /// Generators of the lattice of allowed slack, e.g. `2πi`.
    pub periods: Vec<HpComplex>,
    pub coeff_bound: u64,
    /// Decimal digits.
    pub precision: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelationResult {
    pub found: bool,
    pub coefficients: Vec<i64>,
    pub period_coefficients: Vec<i64>,
    pub residual: f64,
    pub certificate: String,
    pub coeff_bound: u64,
    pub precision: u32,
}

fn scaled_round(x: &Float, scale: &Integer) -> Integer {
    let prec = x.prec().max(64) + scale.significant_bits() + 8;
    let y = Float::with_val(prec, x * scale);
    y.to_integer().unwrap_or_default()
}

/// `|Σ a_k z_k|` evaluated at the inputs' precision.
pub fn relation_residual(points: &[HpComplex], coeffs: &[i64]) -> f64 {
    let prec = points.iter().map(|z| z.precision().0).max().unwrap_or(64);
    let p = Precision(prec);
    let sum = points.iter().zip(coeffs).fold(HpComplex::zero(p), |acc, (z, &a)| {
        acc + z.with_precision(p).scale_i64(a)
    });
    sum.abs_f64()
}

/// Searches for a short integer vector `(a, b)` with
/// `Σ a_k values_k + Σ b_j periods_j ≈ 0` and `a ≠ 0`.
pub fn find_integer_relation(query: &RelationQuery) -> Result<RelationResult> {
    if query.precision < MIN_PRECISION {
        return Err(Error::PrecisionTooLow(query.precision));
    }
    if query.coeff_bound < 1 {
        return Err(invariant("coeff_bound", "must be at least 1"));
    }
    if query.values.is_empty() || query.values.iter().all(|z| z.is_exact_zero()) {
        return Err(Error::Degenerate("all values are zero".into()));
    }
    let points: Vec<&HpComplex> = query.values.iter().chain(&query.periods).collect();
    let m = points.len();
    let nv = query.values.len();
    let scale = Integer::from(Integer::u_pow_u(10, query.precision));
    let mut basis: Vec<Vec<Integer>> = points
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let mut row: Vec<Integer> = (0..m).map(|j| Integer::from((j == k) as i32)).collect();
            row.push(scaled_round(z.real(), &scale));
            row.push(scaled_round(z.imag(), &scale));
            row
        })
        .collect();
    lll::lll_reduce(&mut basis, &Rational::from((99, 100)));

    let threshold = 10f64.powf(-(query.precision as f64) / 2.0);
    let owned: Vec<HpComplex> = points.iter().map(|z| (*z).clone()).collect();
    let mut best_residual = f64::INFINITY;
    for row in &basis {
        let coeffs = &row[..m];
        let values_part = &coeffs[..nv];
        if values_part.iter().all(|a| a.is_zero()) {
            continue;
        }
        if values_part.iter().any(|a| *a.as_abs() > query.coeff_bound) {
            continue;
        }
        let Some(mut ints) = coeffs.iter().map(|a| a.to_i64()).collect::<Option<Vec<i64>>>() else {
            continue;
        };
        let residual = relation_residual(&owned, &ints);
        best_residual = best_residual.min(residual);
        if residual <= threshold {
            let lead = ints[..nv].iter().find(|&&a| a != 0).copied().unwrap_or(1);
            if lead < 0 {
                ints.iter_mut().for_each(|a| *a = -*a);
            }
            let period_coefficients = ints.split_off(nv);
            return Ok(RelationResult {
                found: true,
                coefficients: ints,
                period_coefficients,
                residual,
                certificate: "relation found".into(),
                coeff_bound: query.coeff_bound,
                precision: query.precision,
            });
        }
    }
    Ok(RelationResult {
        found: false,
        coefficients: Vec::new(),
        period_coefficients: Vec::new(),
        residual: if best_residual.is_finite() { best_residual } else { 0.0 },
        certificate: format!(
            "no relation up to bound {} at precision {} (heuristic: lattice reduction does not prove independence)",
            query.coeff_bound, query.precision
        ),
        coeff_bound: query.coeff_bound,
        precision: query.precision,
    })
}

fn two_pi_i(digits: u32) -> HpComplex {
    HpComplex::two_pi_i(Precision::from_digits(digits))
}

fn i_pi_squared(digits: u32) -> HpComplex {
    let p = Precision::from_digits(digits);
    let pi = HpComplex::pi(p);
    pi.clone() * pi * HpComplex::i(p)
}

/// Relation among `log t_i` modulo `2πi`.
pub fn multiplicative_independence(
    solution: &FillingSolutionIn<HpComplex>,
    bound: u64,
    precision: u32,
) -> Result<RelationResult> {
    find_integer_relation(&RelationQuery {
        values: solution.log_t.clone(),
        periods: vec![two_pi_i(precision)],
        coeff_bound: bound,
        precision,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PvolIndependence {
    pub relation: RelationResult,
    /// A found relation with every coefficient nonzero.
    pub all_nonzero: bool,
}

/// Relation among un-reduced pseudo volumes modulo `iπ²`.
pub fn pvol_independence(pvols: &[HpComplex], bound: u64, precision: u32) -> Result<PvolIndependence> {
    let relation = find_integer_relation(&RelationQuery {
        values: pvols.to_vec(),
        periods: vec![i_pi_squared(precision)],
        coeff_bound: bound,
        precision,
    })?;
    let all_nonzero = relation.found && relation.coefficients.iter().all(|&a| a != 0);
    Ok(PvolIndependence { relation, all_nonzero })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryVerdict {
    SymmetricCandidate,
    NoSymmetryUpToBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub verdict: SymmetryVerdict,
    /// `(a, b, c, d)` with `τ_i = (a τ_j + b)/(c τ_j + d)`.
    pub mobius: Option<[i64; 4]>,
    pub determinant: Option<i64>,
    pub relation: RelationResult,
}

fn require_nonreal(tau: &HpComplex, field: &str) -> Result<()> {
    if tau.imag().is_zero() {
        return Err(invariant(field, "imaginary part must be nonzero"));
    }
    Ok(())
}

/// Integer Möbius maps taking `τ_j` to `τ_i`.
pub fn cusp_symmetry_test(tau_i: &HpComplex, tau_j: &HpComplex, bound: u64, precision: u32) -> Result<SymmetryReport> {
    require_nonreal(tau_i, "tau_i")?;
    require_nonreal(tau_j, "tau_j")?;
    let p = tau_i.precision();
    let relation = find_integer_relation(&RelationQuery {
        values: vec![
            tau_j.clone(),
            HpComplex::one(p),
            tau_i.clone() * tau_j.clone(),
            tau_i.clone(),
        ],
        periods: Vec::new(),
        coeff_bound: bound,
        precision,
    })?;
    let (verdict, mobius, determinant) = if relation.found {
        let x = &relation.coefficients;
        let t = [x[0], x[1], -x[2], -x[3]];
        (
            SymmetryVerdict::SymmetricCandidate,
            Some(t),
            Some(t[0] * t[3] - t[1] * t[2]),
        )
    } else {
        (SymmetryVerdict::NoSymmetryUpToBound, None, None)
    };
    Ok(SymmetryReport {
        verdict,
        mobius,
        determinant,
        relation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadraticityReport {
    pub quadratic: bool,
    /// `(c_0, c_1, c_2)` with `c_0 + c_1 τ + c_2 τ² = 0`.
    pub polynomial: Option<[i64; 3]>,
    pub relation: RelationResult,
}

pub fn quadraticity_test(tau: &HpComplex, bound: u64, precision: u32) -> Result<QuadraticityReport> {
    require_nonreal(tau, "tau")?;
    let p = tau.precision();
    let relation = find_integer_relation(&RelationQuery {
        values: vec![HpComplex::one(p), tau.clone(), tau.clone() * tau.clone()],
        periods: Vec::new(),
        coeff_bound: bound,
        precision,
    })?;
    let polynomial = relation.found.then(|| {
        let c = &relation.coefficients;
        [c[0], c[1], c[2]]
    });
    Ok(QuadraticityReport {
        quadratic: relation.found,
        polynomial,
        relation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    const DIGITS: u32 = 50;

    fn prec() -> Precision {
        Precision::from_digits(DIGITS + 10)
    }

    fn hp(re: &str, im: &str) -> HpComplex {
        HpComplex::parse(re, im, prec()).unwrap()
    }

    fn from_f64(re: f64, im: f64) -> HpComplex {
        HpComplex::from_c64(Complex64::new(re, im), prec())
    }

    fn log_real(n: i64) -> HpComplex {
        HpComplex::from_i64(n, prec()).ln()
    }

    fn query(values: Vec<HpComplex>, periods: Vec<HpComplex>, bound: u64) -> RelationQuery {
        RelationQuery {
            values,
            periods,
            coeff_bound: bound,
            precision: DIGITS,
        }
    }

    #[test]
    fn log2_log4() {
        let r = find_integer_relation(&query(vec![log_real(2), log_real(4)], vec![], 100)).unwrap();
        assert!(r.found);
        assert_eq!(r.coefficients, vec![2, -1]);
        assert!(r.residual <= 1e-25);
    }

    #[test]
    fn cube_root_of_unity() {
        let p = prec();
        let z = HpComplex::two_pi_i(p) / HpComplex::from_i64(3, p);
        let r = find_integer_relation(&query(vec![z], vec![HpComplex::two_pi_i(p)], 100)).unwrap();
        assert!(r.found);
        assert_eq!(r.coefficients, vec![3]);
        assert_eq!(r.period_coefficients, vec![-1]);
    }

    #[test]
    fn log2_log3_independent() {
        let r = find_integer_relation(&query(vec![log_real(2), log_real(3)], vec![], 10_000)).unwrap();
        assert!(!r.found);
        assert!(r.certificate.contains("heuristic"));
    }

    #[test]
    fn relation_survives_doubled_precision() {
        let values = |p: Precision| {
            vec![
                HpComplex::from_i64(6, p).ln(),
                HpComplex::from_i64(2, p).ln(),
                HpComplex::from_i64(3, p).ln(),
            ]
        };
        let r = find_integer_relation(&query(values(prec()), vec![], 100)).unwrap();
        assert!(r.found);
        assert_eq!(r.coefficients, vec![1, -1, -1]);
        let fine = relation_residual(&values(Precision::from_digits(2 * DIGITS + 10)), &r.coefficients);
        assert!(fine <= 10f64.powi(-(DIGITS as i32) / 2));
    }

    #[test]
    fn low_precision_and_zero_values_are_errors() {
        let mut q = query(vec![log_real(2)], vec![], 10);
        q.precision = 20;
        assert!(matches!(find_integer_relation(&q), Err(Error::PrecisionTooLow(20))));
        let q = query(vec![HpComplex::zero(prec())], vec![], 10);
        assert!(matches!(find_integer_relation(&q), Err(Error::Degenerate(_))));
    }

    #[test]
    fn quadraticity_examples() {
        let r = quadraticity_test(&hp("0", "1"), 1000, DIGITS).unwrap();
        assert_eq!(r.polynomial, Some([1, 0, 1]));
        let p = prec();
        let s3 = Float::with_val(p.0, 3).sqrt() / 2;
        let hex = HpComplex::from_floats(Float::with_val(p.0, 0.5), s3);
        let r = quadraticity_test(&hex, 1000, DIGITS).unwrap();
        assert_eq!(r.polynomial, Some([1, -1, 1]));
        let r = quadraticity_test(&from_f64(0.5, 1.2), 1000, DIGITS).unwrap();
        assert!(!r.quadratic);
    }

    #[test]
    fn exact_decimal_literal_is_quadratic() {
        // 0.5 + 1.2i is a Gaussian rational: 100τ² - 100τ + 169 = 0
        let r = quadraticity_test(&hp("0.5", "1.2"), 1000, DIGITS).unwrap();
        assert_eq!(r.polynomial, Some([169, -100, 100]));
    }

    #[test]
    fn symmetry_examples() {
        let tj = from_f64(0.23, 1.15);
        let r = cusp_symmetry_test(&tj, &tj, 1000, DIGITS).unwrap();
        assert_eq!(r.mobius, Some([1, 0, 0, 1]));
        let p = prec();
        let ti = (tj.clone() + HpComplex::one(p)) / tj.clone();
        let r = cusp_symmetry_test(&ti, &tj, 1000, DIGITS).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::SymmetricCandidate);
        assert_eq!(r.mobius, Some([1, 1, 1, 0]));
        let r = cusp_symmetry_test(&from_f64(0.5, 1.2), &from_f64(-0.3, 0.9), 1000, DIGITS).unwrap();
        assert_eq!(r.verdict, SymmetryVerdict::NoSymmetryUpToBound);
        assert!(cusp_symmetry_test(&from_f64(0.5, 0.0), &tj, 1000, DIGITS).is_err());
    }

    #[test]
    fn pvol_duplicate_and_single() {
        let a = hp("2.0298832128193072500666064", "0.1235");
        let b = hp("2.0213", "-0.77");
        let c = hp("1.99", "0.31");
        let r = pvol_independence(&[a.clone(), b.clone(), a.clone(), c], 1000, DIGITS).unwrap();
        assert!(r.relation.found);
        assert_eq!(r.relation.coefficients, vec![1, 0, -1, 0]);
        assert!(!r.all_nonzero);
        let single = from_f64(2.0298832128193072, 0.1235);
        let r = pvol_independence(&[single], 1000, DIGITS).unwrap();
        assert!(!r.relation.found);
    }
}
