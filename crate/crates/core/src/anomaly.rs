//! Exponent lattices of algebraic subgroups and the rank tests that decide
//! when a codimension-2 subgroup meets the deformation chart anomalously.
//!
//! A lattice row `(a_1, b_1, …, a_n, b_n)` encodes `Π M_j^{a_j} L_j^{b_j} = 1`,
//! which in the log chart reads `Σ a_j u_j + b_j v_j = 2πi m`. Its Jacobian at
//! the complete structure is `a_j + b_j τ_j`. Cusp indices are zero-based.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_integer::Integer as _;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::manifold::{ManifoldDescriptor, NzPotential};
use crate::scalar::Precision;
use crate::series::{v_series, MultiIndex, TruncatedSeries};
use crate::{invariant, Error, Result};

/// Rank over Q by fraction-free elimination.
pub fn integer_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<Integer>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| Integer::from(x)).collect())
        .collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = Integer::from(1);
    for col in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            for c in col + 1..ncols {
                let v = Integer::from(&m[rank][col] * &m[r][c]) - Integer::from(&m[r][col] * &m[rank][c]);
                m[r][c] = v / &prev;
            }
            m[r][col] = Integer::new();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

fn rank_2x4(m: &[[i64; 4]; 2]) -> usize {
    if m.iter().all(|r| r.iter().all(|&x| x == 0)) {
        return 0;
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if m[0][i] * m[1][j] != m[0][j] * m[1][i] {
                return 2;
            }
        }
    }
    1
}

/// Numeric rank: singular values above `1e-9` times the largest.
pub fn numeric_rank(m: &DMatrix<Complex64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * max).count()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupLattice {
    pub rows: Vec<Vec<i64>>,
    pub offsets: Vec<i64>,
}

impl SubgroupLattice {
    pub fn new(rows: Vec<Vec<i64>>, offsets: Vec<i64>) -> Result<Self> {
        let lat = SubgroupLattice { rows, offsets };
        lat.validate()?;
        Ok(lat)
    }

    pub fn through_identity(rows: Vec<Vec<i64>>) -> Result<Self> {
        let k = rows.len();
        Self::new(rows, vec![0; k])
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let lat: SubgroupLattice = serde_json::from_str(text)?;
        lat.validate()?;
        Ok(lat)
    }

    fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(invariant("rows", "lattice has no rows"));
        }
        let width = self.rows[0].len();
        if width == 0 || !width.is_multiple_of(2) {
            return Err(invariant("rows", format!("row length {width} is not 2n")));
        }
        if let Some(k) = self.rows.iter().position(|r| r.len() != width) {
            return Err(invariant(format!("rows[{k}]"), "ragged row"));
        }
        if self.offsets.len() != self.rows.len() {
            return Err(Error::Dimension {
                expected: self.rows.len(),
                got: self.offsets.len(),
            });
        }
        let r = integer_rank(&self.rows);
        if r != self.rows.len() {
            return Err(invariant(
                "rows",
                format!("rank {r} is not the full row rank {}", self.rows.len()),
            ));
        }
        Ok(())
    }

    pub fn cusps(&self) -> usize {
        self.rows[0].len() / 2
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn is_through_identity(&self) -> bool {
        self.offsets.iter().all(|&m| m == 0)
    }

    /// Cusps whose `(a_j, b_j)` columns are nonzero in some row.
    pub fn support(&self) -> Vec<usize> {
        (0..self.cusps())
            .filter(|&j| self.rows.iter().any(|r| r[2 * j] != 0 || r[2 * j + 1] != 0))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum LemmaClassification {
    Rank2,
    /// `(c_1, d_1, c_2, d_2) = m (a_1, b_1, a_2, b_2)` with `m = numer/denom`, `m ≠ 0`.
    ProportionalBlocks {
        numer: i64,
        denom: i64,
    },
    /// Columns `a, b` vanish.
    LeftBlockZero,
    /// Columns `c, d` vanish.
    RightBlockZero,
}

fn check_rank2(m: &[[i64; 4]; 2]) -> Result<()> {
    match rank_2x4(m) {
        2 => Ok(()),
        r => Err(Error::RankDeficient(r)),
    }
}

/// Rank of `[[a_1 + b_1 τ, c_1 + d_1 τ], [a_2 + b_2 τ, c_2 + d_2 τ]]` for a
/// non-quadratic `τ`, decided by integer identities.
pub fn classify_2x4_same_shape(m: &[[i64; 4]; 2]) -> Result<LemmaClassification> {
    check_rank2(m)?;
    let [[a1, b1, c1, d1], [a2, b2, c2, d2]] = *m;
    let rank_one = a1 * c2 == a2 * c1 && b1 * d2 == b2 * d1 && b1 * c2 + a1 * d2 == a2 * d1 + b2 * c1;
    if !rank_one {
        return Ok(LemmaClassification::Rank2);
    }
    let left = [a1, b1, a2, b2];
    let right = [c1, d1, c2, d2];
    if left.iter().all(|&x| x == 0) {
        return Ok(LemmaClassification::LeftBlockZero);
    }
    if right.iter().all(|&x| x == 0) {
        return Ok(LemmaClassification::RightBlockZero);
    }
    let k = left.iter().position(|&x| x != 0).expect("nonzero left block");
    let g = right[k].gcd(&left[k]);
    let (mut num, mut den) = (right[k] / g, left[k] / g);
    if den < 0 {
        num = -num;
        den = -den;
    }
    if (0..4).any(|i| right[i] * den != num * left[i]) {
        return Err(invariant("matrix", "rank-one matrix fits neither lemma form"));
    }
    Ok(LemmaClassification::ProportionalBlocks { numer: num, denom: den })
}

/// Rank of `[[a_1 + b_1 τ_1, c_1 + d_1 τ_2], [a_2 + b_2 τ_1, c_2 + d_2 τ_2]]`
/// when `1, τ_1, τ_2, τ_1 τ_2` are independent over Q.
pub fn classify_2x4_two_shapes(m: &[[i64; 4]; 2]) -> Result<LemmaClassification> {
    check_rank2(m)?;
    let [[a1, b1, c1, d1], [a2, b2, c2, d2]] = *m;
    let minors = [
        a1 * c2 - c1 * a2,
        a1 * d2 - d1 * a2,
        b1 * c2 - c1 * b2,
        b1 * d2 - d1 * b2,
    ];
    if minors.iter().any(|&x| x != 0) {
        return Ok(LemmaClassification::Rank2);
    }
    if [a1, b1, a2, b2].iter().all(|&x| x == 0) {
        Ok(LemmaClassification::LeftBlockZero)
    } else {
        Ok(LemmaClassification::RightBlockZero)
    }
}

/// The `k × n` matrix `a_kj + b_kj τ_j`.
pub fn jacobian_matrix(lattice: &SubgroupLattice, shapes: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let n = lattice.cusps();
    if shapes.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: shapes.len(),
        });
    }
    Ok(DMatrix::from_fn(lattice.k(), n, |i, j| {
        let r = &lattice.rows[i];
        Complex64::new(r[2 * j] as f64, 0.0) + shapes[j] * r[2 * j + 1] as f64
    }))
}

pub fn jacobian_rank(lattice: &SubgroupLattice, shapes: &[Complex64]) -> Result<usize> {
    if !lattice.is_through_identity() {
        return Err(invariant("offsets", "subgroup must pass through the identity"));
    }
    Ok(numeric_rank(&jacobian_matrix(lattice, shapes)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizationReport {
    /// `ε_i`: whether row `i` had a nonzero offset.
    pub epsilons: Vec<u8>,
    /// Index of the dropped row in the input.
    pub dropped_row: Option<usize>,
    /// Denominator-clearing factors of the output rows.
    pub multipliers: Vec<i64>,
    pub note: String,
}

fn lcm_denominators(row: &[(i64, i64)]) -> i64 {
    row.iter().fold(1i64, |l, &(_, d)| l.lcm(&d))
}

fn reduce_frac(n: i64, d: i64) -> (i64, i64) {
    let g = n.gcd(&d).max(1);
    let s = if d < 0 { -1 } else { 1 };
    (s * n / g, s * d / g)
}

/// Divides rows with nonzero offset by that offset, subtracts the first such
/// row from the others, drops it and clears denominators.
pub fn normalize_subgroup(lattice: &SubgroupLattice) -> Result<(SubgroupLattice, NormalizationReport)> {
    let epsilons: Vec<u8> = lattice.offsets.iter().map(|&m| (m != 0) as u8).collect();
    let Some(first) = lattice.offsets.iter().position(|&m| m != 0) else {
        let report = NormalizationReport {
            epsilons,
            dropped_row: None,
            multipliers: vec![1; lattice.k()],
            note: "already through identity".into(),
        };
        return Ok((lattice.clone(), report));
    };
    let scaled: Vec<Vec<(i64, i64)>> = lattice
        .rows
        .iter()
        .zip(&lattice.offsets)
        .map(|(r, &m)| {
            let d = if m == 0 { 1 } else { m };
            r.iter().map(|&x| reduce_frac(x, d)).collect()
        })
        .collect();
    let mut rows = Vec::new();
    let mut multipliers = Vec::new();
    for (i, row) in scaled.iter().enumerate() {
        if i == first {
            continue;
        }
        let frac: Vec<(i64, i64)> = if epsilons[i] == 1 {
            row.iter()
                .zip(&scaled[first])
                .map(|(&(n1, d1), &(n0, d0))| reduce_frac(n1 * d0 - n0 * d1, d1 * d0))
                .collect()
        } else {
            row.clone()
        };
        let c = lcm_denominators(&frac);
        let ints: Vec<i64> = frac.iter().map(|&(n, d)| n * (c / d)).collect();
        if ints.iter().all(|&x| x == 0) {
            return Err(Error::Degenerate(format!("row {i} vanishes after normalization")));
        }
        rows.push(ints);
        multipliers.push(c);
    }
    if rows.is_empty() {
        return Err(Error::Degenerate("normalization leaves no rows".into()));
    }
    let k = rows.len();
    let out = SubgroupLattice::new(rows, vec![0; k])?;
    let report = NormalizationReport {
        epsilons,
        dropped_row: Some(first),
        multipliers,
        note: format!("dropped row {first}; codimension {k}"),
    };
    Ok((out, report))
}

/// `τ` and the odd series `h(u) = v(u) - τ u` of a product of identical
/// one-cusp potentials.
pub fn product_factor(potential: &NzPotential) -> Result<(Complex64, TruncatedSeries<Complex64>)> {
    let n = potential.nvars();
    let quad = potential.quad();
    if quad.iter().any(|q| q != &quad[0]) {
        return Err(invariant(
            "potential",
            "cusp shapes differ, not a product of identical copies",
        ));
    }
    for (idx, c) in potential.higher() {
        let nonzero: Vec<usize> = (0..n).filter(|&j| idx.get(j) != 0).collect();
        if nonzero.len() != 1 {
            return Err(invariant(
                format!("potential.terms[{idx}]"),
                "mixed term, not a product of identical copies",
            ));
        }
        let e = idx.get(nonzero[0]);
        for j in 0..n {
            let mut other = vec![0; n];
            other[j] = e;
            if potential.higher().get(&MultiIndex(other)) != Some(c) {
                return Err(invariant(
                    format!("potential.terms[{idx}]"),
                    "copies have different coefficients",
                ));
            }
        }
    }
    let v = v_series::<Complex64>(potential, 0, Precision::DOUBLE)?;
    let tau = quad[0].to_c64()?;
    let mut h = TruncatedSeries::zero(1, v.degree(), Precision::DOUBLE);
    for (idx, c) in v.terms() {
        let e = idx.get(0);
        if e >= 3 {
            h.add_term(MultiIndex(vec![e]), *c);
        }
    }
    if h.is_empty() {
        return Err(Error::Degenerate(
            "potential has no terms beyond the quadratic part".into(),
        ));
    }
    Ok((tau, h))
}

/// `h(-Σ l_i u_i) + Σ l_i h(u_i)` as a series in `l.len()` variables.
pub fn anomaly_series(potential: &NzPotential, l: &[(i64, i64)]) -> Result<TruncatedSeries<Complex64>> {
    if l.is_empty() {
        return Err(invariant("combo", "empty combination"));
    }
    if l.iter().any(|&(_, d)| d == 0) {
        return Err(invariant("combo", "zero denominator"));
    }
    let (_, h) = product_factor(potential)?;
    let m = l.len();
    let lv: Vec<Complex64> = l
        .iter()
        .map(|&(n, d)| Complex64::new(n as f64 / d as f64, 0.0))
        .collect();
    // h in m + 1 variables, variable 0 to be substituted
    let lift = |var: usize| {
        let mut s = TruncatedSeries::zero(m + 1, h.degree(), Precision::DOUBLE);
        for (idx, c) in h.terms() {
            let mut e = vec![0; m + 1];
            e[var] = idx.get(0);
            s.add_term(MultiIndex(e), *c);
        }
        s
    };
    let mut total = lift(0);
    for (i, li) in lv.iter().enumerate() {
        total = total.add(&lift(i + 1).scale(li))?;
    }
    let combo: Vec<Complex64> = lv.iter().map(|x| -x).collect();
    total.substitute_linear(0, &combo)
}

pub const SERIES_ZERO_TOL: f64 = 1e-13;

/// Whether [`anomaly_series`] vanishes identically.
pub fn anomaly_series_criterion(potential: &NzPotential, l: &[(i64, i64)]) -> Result<bool> {
    Ok(anomaly_series(potential, l)?.max_abs_coeff() < SERIES_ZERO_TOL)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Containment {
    /// `M_i = L_i = 1`.
    CuspCollapse {
        cusp: usize,
    },
    /// `M_i^a = M_j^b`, `L_i^a = L_j^b`.
    PairedSlope {
        i: usize,
        j: usize,
        a: i64,
        b: i64,
    },
    NoneOfTheForms {
        reason: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ContainmentReport {
    pub jacobian_rank: usize,
    pub support: Vec<usize>,
    pub lemma: Option<LemmaClassification>,
    pub series_vanishes: Option<bool>,
    pub containment: Containment,
}

fn none(reason: impl Into<String>) -> Containment {
    Containment::NoneOfTheForms { reason: reason.into() }
}

/// Which of the lemma's forms contains the chart's intersection with a
/// codimension-2 subgroup whose Jacobian has rank 1.
pub fn classify_codim2_containment(desc: &ManifoldDescriptor, lattice: &SubgroupLattice) -> Result<ContainmentReport> {
    if lattice.k() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: lattice.k(),
        });
    }
    if lattice.cusps() != desc.cusps() {
        return Err(Error::Dimension {
            expected: desc.cusps(),
            got: lattice.cusps(),
        });
    }
    let rank = jacobian_rank(lattice, &desc.taus())?;
    if rank != 1 {
        return Err(Error::NotAnomalous(rank));
    }
    let support = lattice.support();
    let mut report = ContainmentReport {
        jacobian_rank: rank,
        support: support.clone(),
        lemma: None,
        series_vanishes: None,
        containment: none("support spans more than two cusps"),
    };
    match support.as_slice() {
        [i] => {
            let r = &lattice.rows;
            let det = r[0][2 * i] * r[1][2 * i + 1] - r[0][2 * i + 1] * r[1][2 * i];
            report.containment = if det != 0 {
                Containment::CuspCollapse { cusp: *i }
            } else {
                none("single-cusp block is singular")
            };
        }
        [i, j] => {
            let (i, j) = (*i, *j);
            let r = &lattice.rows;
            let m = [
                [r[0][2 * i], r[0][2 * i + 1], r[0][2 * j], r[0][2 * j + 1]],
                [r[1][2 * i], r[1][2 * i + 1], r[1][2 * j], r[1][2 * j + 1]],
            ];
            let shared = desc.shapes[i] == desc.shapes[j];
            let lemma = if shared {
                classify_2x4_same_shape(&m)?
            } else {
                classify_2x4_two_shapes(&m)?
            };
            report.lemma = Some(lemma);
            report.containment = match lemma {
                LemmaClassification::ProportionalBlocks { numer, denom } => {
                    let (a, b) = (denom, -numer);
                    if desc.is_identical_product() {
                        let ok = anomaly_series_criterion(&desc.potential, &[(numer, denom)])?;
                        report.series_vanishes = Some(ok);
                        if ok {
                            Containment::PairedSlope { i, j, a, b }
                        } else {
                            none(format!("higher-order terms rule out M_{i}^{a} = M_{j}^{b}"))
                        }
                    } else {
                        Containment::PairedSlope { i, j, a, b }
                    }
                }
                LemmaClassification::Rank2 => none("exact rank is 2; shapes violate the lemma hypotheses"),
                LemmaClassification::LeftBlockZero | LemmaClassification::RightBlockZero => {
                    none("block-zero form contradicts the two-cusp support")
                }
            };
        }
        _ => {}
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldDescriptor;

    const TAU: Complex64 = Complex64::new(0.2317, 1.1532);
    const TAU2: Complex64 = Complex64::new(-0.4123, 0.8761);

    fn complex_rank_same(m: &[[i64; 4]; 2], tau: Complex64) -> usize {
        let e = |a: i64, b: i64| Complex64::new(a as f64, 0.0) + tau * b as f64;
        numeric_rank(&DMatrix::from_row_slice(
            2,
            2,
            &[
                e(m[0][0], m[0][1]),
                e(m[0][2], m[0][3]),
                e(m[1][0], m[1][1]),
                e(m[1][2], m[1][3]),
            ],
        ))
    }

    fn quartic_product(copies: usize) -> ManifoldDescriptor {
        ManifoldDescriptor::from_json_str(
            r#"{"name": "q", "cusps": 1, "shapes": [["0.23", "1.15"]],
            "potential": {"degree_cutoff": 6, "terms": [{"index": [4], "coeff": ["0.05", "0.01"]},
                {"index": [6], "coeff": ["-0.003", "0.002"]}]}}"#,
        )
        .unwrap()
        .synthesize_product(copies)
        .unwrap()
    }

    #[test]
    fn same_shape_examples() {
        assert_eq!(
            classify_2x4_same_shape(&[[1, 0, 2, 0], [0, 1, 0, 2]]).unwrap(),
            LemmaClassification::ProportionalBlocks { numer: 2, denom: 1 }
        );
        assert_eq!(
            classify_2x4_same_shape(&[[0, 0, 1, 0], [0, 0, 0, 1]]).unwrap(),
            LemmaClassification::LeftBlockZero
        );
        assert_eq!(
            classify_2x4_same_shape(&[[1, 0, 0, 0], [0, 0, 1, 0]]).unwrap(),
            LemmaClassification::Rank2
        );
        assert!(matches!(
            classify_2x4_same_shape(&[[1, 0, 0, 0], [2, 0, 0, 0]]),
            Err(Error::RankDeficient(1))
        ));
    }

    #[test]
    fn two_shape_examples() {
        assert_eq!(
            classify_2x4_two_shapes(&[[1, 2, 0, 0], [3, 4, 0, 0]]).unwrap(),
            LemmaClassification::RightBlockZero
        );
        assert_eq!(
            classify_2x4_two_shapes(&[[0, 0, 1, 2], [0, 0, 3, 4]]).unwrap(),
            LemmaClassification::LeftBlockZero
        );
        assert_eq!(
            classify_2x4_two_shapes(&[[1, 0, 1, 0], [0, 1, 0, 1]]).unwrap(),
            LemmaClassification::Rank2
        );
    }

    #[test]
    fn same_shape_agrees_with_numeric_rank_on_small_grid() {
        let vals = [-1i64, 0, 1];
        let mut checked = 0;
        for code in 0..3usize.pow(8) {
            let mut e = [0i64; 8];
            let mut c = code;
            for x in e.iter_mut() {
                *x = vals[c % 3];
                c /= 3;
            }
            let m = [[e[0], e[1], e[2], e[3]], [e[4], e[5], e[6], e[7]]];
            if rank_2x4(&m) != 2 {
                continue;
            }
            let exact = classify_2x4_same_shape(&m).unwrap();
            let numeric = complex_rank_same(&m, TAU);
            assert_eq!(exact == LemmaClassification::Rank2, numeric == 2, "{m:?}");
            checked += 1;
        }
        assert!(checked > 5000);
    }

    #[test]
    fn integer_rank_basics() {
        assert_eq!(integer_rank(&[vec![1, 2, 3], vec![2, 4, 6]]), 1);
        assert_eq!(integer_rank(&[vec![1, 2, 3], vec![0, 1, 1], vec![1, 3, 4]]), 2);
        assert_eq!(integer_rank(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(integer_rank(&[vec![2, 0, 1], vec![0, 3, 1], vec![1, 1, 7]]), 3);
    }

    #[test]
    fn jacobian_rank_examples() {
        let shapes = [TAU, TAU2];
        let prop = SubgroupLattice::through_identity(vec![vec![1, 0, 2, 0], vec![0, 1, 0, 2]]).unwrap();
        assert_eq!(jacobian_rank(&prop, &[TAU, TAU]).unwrap(), 1);
        let collapse = SubgroupLattice::through_identity(vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(jacobian_rank(&collapse, &shapes).unwrap(), 1);
        let generic = SubgroupLattice::through_identity(vec![vec![1, 2, -1, 0], vec![0, 1, 3, 1]]).unwrap();
        assert_eq!(jacobian_rank(&generic, &shapes).unwrap(), 2);
        assert!(jacobian_rank(&generic, &[TAU]).is_err());
        let off = SubgroupLattice::new(vec![vec![1, 0, 0, 0]], vec![1]).unwrap();
        assert!(jacobian_rank(&off, &shapes).is_err());
    }

    #[test]
    fn jacobian_rank_unimodular_invariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let shapes = [TAU, TAU2, Complex64::new(0.1, 2.3)];
        for _ in 0..200 {
            let rows: Vec<Vec<i64>> = (0..2)
                .map(|_| (0..6).map(|_| rng.gen_range(-3..=3)).collect())
                .collect();
            let Ok(lat) = SubgroupLattice::through_identity(rows.clone()) else {
                continue;
            };
            let k: i64 = rng.gen_range(-4..=4);
            let moved: Vec<Vec<i64>> = vec![
                rows[0].iter().zip(&rows[1]).map(|(a, b)| a + k * b).collect(),
                rows[1].iter().map(|b| -b).collect(),
            ];
            let lat2 = SubgroupLattice::through_identity(moved).unwrap();
            assert_eq!(
                jacobian_rank(&lat, &shapes).unwrap(),
                jacobian_rank(&lat2, &shapes).unwrap()
            );
        }
    }

    #[test]
    fn lattice_validation() {
        assert!(SubgroupLattice::new(vec![vec![1, 2, 3]], vec![0]).is_err());
        assert!(SubgroupLattice::new(vec![vec![1, 2], vec![2, 4]], vec![0, 0]).is_err());
        assert!(SubgroupLattice::new(vec![vec![1, 2]], vec![0, 0]).is_err());
        let l = SubgroupLattice::from_json_str(r#"{"rows": [[1, 0, 2, -1]], "offsets": [3]}"#).unwrap();
        assert_eq!(l.offsets, vec![3]);
    }

    #[test]
    fn normalization_examples() {
        let l = SubgroupLattice::new(vec![vec![1, 2, 0, 1]], vec![0]).unwrap();
        let (out, rep) = normalize_subgroup(&l).unwrap();
        assert_eq!(out, l);
        assert_eq!(rep.note, "already through identity");

        let l = SubgroupLattice::new(vec![vec![2, 0, 0, 0], vec![0, 3, 0, 0]], vec![2, 0]).unwrap();
        let (out, rep) = normalize_subgroup(&l).unwrap();
        assert_eq!(out.rows, vec![vec![0, 3, 0, 0]]);
        assert_eq!(rep.dropped_row, Some(0));

        let l = SubgroupLattice::new(
            vec![vec![1, 0, 2, -1], vec![0, 3, 1, 1], vec![1, 1, 0, 0]],
            vec![1, 2, 0],
        )
        .unwrap();
        let (out, rep) = normalize_subgroup(&l).unwrap();
        // r2/2 - r1 = (-1, 3/2, -3/2, 3/2), cleared by 2
        assert_eq!(out.rows, vec![vec![-2, 3, -3, 3], vec![1, 1, 0, 0]]);
        assert_eq!(out.offsets, vec![0, 0]);
        assert_eq!(rep.multipliers, vec![2, 1]);
    }

    #[test]
    fn series_criterion_examples() {
        let d2 = quartic_product(2);
        assert!(anomaly_series_criterion(&d2.potential, &[(1, 1)]).unwrap());
        assert!(anomaly_series_criterion(&d2.potential, &[(-1, 1)]).unwrap());
        let s = anomaly_series(&d2.potential, &[(2, 1)]).unwrap();
        let c3 = Complex64::new(0.1, 0.02);
        assert!((s.coeff_c64(&[3]) - c3 * (2.0 - 8.0)).norm() < 1e-14);

        // pure cubic h = u^3 with l = (1, 1)
        let cubic = ManifoldDescriptor::from_json_str(
            r#"{"name": "c", "cusps": 1, "shapes": [["0.23", "1.15"]],
            "potential": {"degree_cutoff": 4, "terms": [{"index": [4], "coeff": ["0.5", "0"]}]}}"#,
        )
        .unwrap()
        .synthesize_product(3)
        .unwrap();
        let s = anomaly_series(&cubic.potential, &[(1, 1), (1, 1)]).unwrap();
        assert!((s.coeff_c64(&[2, 1]) - Complex64::new(-3.0, 0.0)).norm() < 1e-14);
        assert!((s.coeff_c64(&[1, 2]) - Complex64::new(-3.0, 0.0)).norm() < 1e-14);
        assert!(s.coeff_c64(&[3, 0]).norm() < 1e-14);
    }

    #[test]
    fn product_shape_required() {
        let mixed = ManifoldDescriptor::from_json_str(
            r#"{"name": "m", "cusps": 2, "shapes": [["0.5","1.2"],["0.5","1.2"]],
            "potential": {"degree_cutoff": 4, "terms": [{"index": [2, 2], "coeff": ["0.05","0"]}]}}"#,
        )
        .unwrap();
        assert!(anomaly_series_criterion(&mixed.potential, &[(1, 1)]).is_err());
    }

    #[test]
    fn containment_examples() {
        let d = quartic_product(2);
        let collapse = SubgroupLattice::through_identity(vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]]).unwrap();
        assert_eq!(
            classify_codim2_containment(&d, &collapse).unwrap().containment,
            Containment::CuspCollapse { cusp: 0 }
        );
        let paired = SubgroupLattice::through_identity(vec![vec![1, 0, -1, 0], vec![0, 1, 0, -1]]).unwrap();
        assert_eq!(
            classify_codim2_containment(&d, &paired).unwrap().containment,
            Containment::PairedSlope { i: 0, j: 1, a: 1, b: 1 }
        );
        let square = SubgroupLattice::through_identity(vec![vec![1, 0, -2, 0], vec![0, 1, 0, -2]]).unwrap();
        let rep = classify_codim2_containment(&d, &square).unwrap();
        assert!(matches!(rep.containment, Containment::NoneOfTheForms { .. }));
        assert_eq!(rep.series_vanishes, Some(false));
        let generic = SubgroupLattice::through_identity(vec![vec![1, 2, -1, 0], vec![0, 1, 3, 1]]).unwrap();
        assert!(matches!(
            classify_codim2_containment(&d, &generic),
            Err(Error::NotAnomalous(2))
        ));
    }
}
