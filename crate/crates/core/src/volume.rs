//! Pseudo complex volumes `vol_C(M) - (π/2) Σ log t_i`, taken modulo `iπ²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::filling::FillingSolutionIn;
use crate::manifold::ManifoldDescriptor;
use crate::scalar::{ComplexScalar, HpComplex};
use crate::{Error, Result};

use rug::Float;

#[derive(Clone, Debug, Serialize)]
pub struct PseudoVolumeIn<C> {
    /// Representative with imaginary part in `[0, π²)`.
    pub value: C,
    /// Value before reduction, for relation searches.
    pub unreduced: C,
}

pub type PseudoVolume = PseudoVolumeIn<Complex64>;

/// Reduces the imaginary part into `[0, π²)`.
pub trait ReduceModPiSquared: Sized {
    fn reduce_mod_ipisq(&self) -> Self;
}

impl ReduceModPiSquared for Complex64 {
    fn reduce_mod_ipisq(&self) -> Self {
        let p2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut im = self.im.rem_euclid(p2);
        if im >= p2 {
            im -= p2;
        }
        Complex64::new(self.re, im)
    }
}

impl ReduceModPiSquared for HpComplex {
    fn reduce_mod_ipisq(&self) -> Self {
        let prec = self.precision();
        let pi = HpComplex::pi(prec);
        let p2 = pi.real().clone() * pi.real();
        let ratio = Float::with_val(prec.0, self.imag() / &p2).floor();
        let mut im = Float::with_val(prec.0, self.imag() - ratio * &p2);
        if im < 0 {
            im += &p2;
        } else if im >= p2 {
            im -= &p2;
        }
        HpComplex::from_floats(self.real().clone(), im)
    }
}

pub fn pseudo_volume_in<C: ComplexScalar + ReduceModPiSquared>(
    desc: &ManifoldDescriptor,
    solution: &FillingSolutionIn<C>,
) -> Result<PseudoVolumeIn<C>> {
    let vol = desc.vol_complex.as_ref().ok_or(Error::MissingVolume)?;
    let prec = solution.log_t[0].precision();
    let vol: C = vol.to_scalar(prec)?;
    let sum = solution.log_t.iter().fold(C::zero(prec), |acc, lt| acc + lt.clone());
    let half_pi = C::pi(prec) / C::from_i64(2, prec);
    let unreduced = vol - half_pi * sum;
    Ok(PseudoVolumeIn {
        value: unreduced.reduce_mod_ipisq(),
        unreduced,
    })
}

pub fn pseudo_volume(desc: &ManifoldDescriptor, solution: &FillingSolutionIn<Complex64>) -> Result<PseudoVolume> {
    pseudo_volume_in(desc, solution)
}

/// Whether `a - b` lies within `tol` of `iπ²Z`.
pub fn congruent_mod_ipisq(a: Complex64, b: Complex64, tol: f64) -> bool {
    let p2 = std::f64::consts::PI * std::f64::consts::PI;
    let d = a - b;
    let k = d.im / p2;
    d.re.abs() <= tol && (k - k.round()).abs() <= tol / p2
}
