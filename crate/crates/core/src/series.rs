//! Multivariate complex power series truncated at a total degree.
//!
//! Every series carries its truncation degree `D`; no operation ever
//! produces a stored term above it, and binary operations truncate at the
//! smaller of the two operand degrees.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::manifold::NzPotential;
use crate::scalar::{ComplexScalar, Precision};
use crate::{Error, Result};

/// Exponent vector of a monomial `u_1^{j_1} ... u_n^{j_n}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    fn without(&self, i: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e.remove(i);
        MultiIndex(e)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Debug)]
pub struct TruncatedSeries<C> {
    nvars: usize,
    degree: u32,
    prec: Precision,
    terms: BTreeMap<MultiIndex, C>,
}

impl<C: ComplexScalar> TruncatedSeries<C> {
    pub fn zero(nvars: usize, degree: u32, prec: Precision) -> Self {
        TruncatedSeries {
            nvars,
            degree,
            prec,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, degree: u32, value: C) -> Self {
        let mut s = Self::zero(nvars, degree, value.precision());
        s.add_term(MultiIndex::zero(nvars), value);
        s
    }

    /// The linear form `sum_j coeffs[j] * u_j`.
    pub fn linear(coeffs: &[C], degree: u32, prec: Precision) -> Self {
        let n = coeffs.len();
        let mut s = Self::zero(n, degree, prec);
        for (j, c) in coeffs.iter().enumerate() {
            s.add_term(MultiIndex::unit(n, j), c.clone());
        }
        s
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Option<&C> {
        self.terms.get(index)
    }

    /// Coefficient as a double, zero when absent.
    pub fn coeff_c64(&self, exps: &[u32]) -> num_complex::Complex64 {
        self.terms
            .get(&MultiIndex(exps.to_vec()))
            .map(|c| c.to_c64())
            .unwrap_or_default()
    }

    /// Adds `value * u^index`; terms above the truncation degree are dropped.
    pub fn add_term(&mut self, index: MultiIndex, value: C) {
        debug_assert_eq!(index.len(), self.nvars);
        if index.degree() > self.degree {
            return;
        }
        match self.terms.remove(&index) {
            Some(old) => {
                let sum = old + value;
                if !sum.is_exact_zero() {
                    self.terms.insert(index, sum);
                }
            }
            None => {
                if !value.is_exact_zero() {
                    self.terms.insert(index, value);
                }
            }
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    fn check_same_vars(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = Self::zero(self.nvars, self.degree.min(other.degree), self.prec);
        for (k, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&C::from_i64(-1, self.prec)))
    }

    pub fn scale(&self, factor: &C) -> Self {
        let mut out = Self::zero(self.nvars, self.degree, self.prec);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_vars(other)?;
        let mut out = Self::zero(self.nvars, self.degree.min(other.degree), self.prec);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                if ka.degree() + kb.degree() <= out.degree {
                    out.add_term(ka.plus(kb), ca.clone() * cb.clone());
                }
            }
        }
        Ok(out)
    }

    /// `d/du_var`; the result is truncated at `D - 1`.
    pub fn derivative(&self, var: usize) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::IndexOutOfRange {
                index: var,
                len: self.nvars,
            });
        }
        let mut out = Self::zero(self.nvars, self.degree.saturating_sub(1), self.prec);
        for (k, c) in &self.terms {
            let e = k.get(var);
            if e == 0 {
                continue;
            }
            let mut idx = k.clone();
            idx.0[var] -= 1;
            out.add_term(idx, c.scale_i64(e as i64));
        }
        Ok(out)
    }

    /// Evaluates the polynomial at `point`. Powers of each coordinate are
    /// built once by repeated multiplication and shared across terms.
    pub fn evaluate(&self, point: &[C]) -> Result<C> {
        if point.len() != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: point.len(),
            });
        }
        let mut max_exp = vec![0u32; self.nvars];
        for k in self.terms.keys() {
            for (m, e) in max_exp.iter_mut().zip(&k.0) {
                *m = (*m).max(*e);
            }
        }
        let powers: Vec<Vec<C>> = point
            .iter()
            .zip(&max_exp)
            .map(|(x, &m)| {
                let mut p = Vec::with_capacity(m as usize + 1);
                p.push(C::one(self.prec));
                for e in 1..=m as usize {
                    let next = p[e - 1].clone() * x.clone();
                    p.push(next);
                }
                p
            })
            .collect();
        let mut acc = C::zero(self.prec);
        for (k, c) in &self.terms {
            let mut term = c.clone();
            for (j, &e) in k.0.iter().enumerate() {
                if e > 0 {
                    term = term * powers[j][e as usize].clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Replaces `u_var` by `sum_j combo[j] * w_j`, where `w` are the
    /// remaining variables in their original order. The result has one
    /// variable fewer and keeps the truncation degree.
    pub fn substitute_linear(&self, var: usize, combo: &[C]) -> Result<Self> {
        if var >= self.nvars {
            return Err(Error::IndexOutOfRange {
                index: var,
                len: self.nvars,
            });
        }
        if combo.len() + 1 != self.nvars {
            return Err(Error::Dimension {
                expected: self.nvars - 1,
                got: combo.len(),
            });
        }
        let m = self.nvars - 1;
        let form = Self::linear(combo, self.degree, self.prec);
        let mut powers = vec![Self::constant(m, self.degree, C::one(self.prec))];
        let mut out = Self::zero(m, self.degree, self.prec);
        for (k, c) in &self.terms {
            let e = k.get(var) as usize;
            while powers.len() <= e {
                let next = powers.last().expect("nonempty").mul(&form)?;
                powers.push(next);
            }
            let rest = k.without(var);
            for (kp, cp) in powers[e].terms() {
                let idx = rest.plus(kp);
                if idx.degree() <= self.degree {
                    out.add_term(idx, c.clone() * cp.clone());
                }
            }
        }
        Ok(out)
    }

    /// Drops terms whose magnitude is at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.abs_f64() > tol);
        out
    }
}

/// The potential `Φ` as a series in `n` variables at the given precision.
pub fn potential_series<C: ComplexScalar>(potential: &NzPotential, prec: Precision) -> Result<TruncatedSeries<C>> {
    let n = potential.nvars();
    let mut phi = TruncatedSeries::zero(n, potential.degree_cutoff(), prec);
    for (j, tau) in potential.quad().iter().enumerate() {
        let mut e = vec![0; n];
        e[j] = 2;
        phi.add_term(MultiIndex(e), tau.to_scalar::<C>(prec)?);
    }
    for (k, c) in potential.higher() {
        phi.add_term(k.clone(), c.to_scalar::<C>(prec)?);
    }
    Ok(phi)
}

/// `v_i = (1/2) dΦ/du_i` for zero-based cusp index `i`.
pub fn v_series<C: ComplexScalar>(potential: &NzPotential, i: usize, prec: Precision) -> Result<TruncatedSeries<C>> {
    if i >= potential.nvars() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: potential.nvars(),
        });
    }
    let phi = potential_series::<C>(potential, prec)?;
    let half = C::one(prec) / C::from_i64(2, prec);
    Ok(phi.derivative(i)?.scale(&half))
}
