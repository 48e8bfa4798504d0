//! Tubes around core geodesics: volume, radius, the flat structure of the
//! tube boundary, and modular reduction of torus moduli.
//!
//! The boundary of the radius-`R` tube around a geodesic of complex length
//! `λ = ℓ + iθ` carries the metric `cosh²R dx² + sinh²R dφ²`, so a boundary
//! curve with complex length `a + ib` has flat displacement
//! `F(a + ib) = a cosh R + i b sinh R`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::filling::{solve_filling, FillingCoefficient, FillingSolution, SolverOptions};
use crate::manifold::ManifoldDescriptor;
use crate::{invariant, Error, Result};

/// How the core geodesic's complex length is read off the holonomy `t`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthConvention {
    /// `λ = 2 log t`.
    Eigenvalue,
    /// `λ = log t`.
    #[default]
    Derivative,
}

impl LengthConvention {
    pub fn factor(self) -> f64 {
        match self {
            LengthConvention::Eigenvalue => 2.0,
            LengthConvention::Derivative => 1.0,
        }
    }

    pub fn length(self, log_t: Complex64) -> Complex64 {
        log_t * self.factor()
    }
}

impl std::str::FromStr for LengthConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigenvalue" => Ok(LengthConvention::Eigenvalue),
            "derivative" => Ok(LengthConvention::Derivative),
            other => Err(Error::Parse(format!("unknown length convention {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub complex_length: Complex64,
    pub radius: f64,
}

impl TubeSpec {
    pub fn new(complex_length: Complex64, radius: f64) -> Result<Self> {
        if complex_length.re.is_nan() || complex_length.re <= 0.0 {
            return Err(invariant("complex_length", "real part must be positive"));
        }
        if radius.is_nan() || radius < 0.0 || !radius.is_finite() {
            return Err(invariant("radius", "must be a finite nonnegative number"));
        }
        Ok(TubeSpec { complex_length, radius })
    }

    /// Flat displacement on the boundary of a curve of complex length `z`.
    pub fn flatten(&self, z: Complex64) -> Complex64 {
        Complex64::new(z.re * self.radius.cosh(), z.im * self.radius.sinh())
    }
}

/// `π ℓ sinh² R`.
pub fn tube_volume(tube: &TubeSpec) -> f64 {
    PI * tube.complex_length.re * tube.radius.sinh().powi(2)
}

/// Inverse of [`tube_volume`] in the radius.
pub fn radius_from_volume(complex_length: Complex64, volume: f64) -> Result<f64> {
    if complex_length.re.is_nan() || complex_length.re <= 0.0 {
        return Err(invariant("complex_length", "real part must be positive"));
    }
    if volume.is_nan() || volume < 0.0 {
        return Err(invariant("volume", "must be nonnegative"));
    }
    Ok((volume / (PI * complex_length.re)).sqrt().asinh())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusModulus {
    pub tau: Complex64,
    pub reduced: bool,
}

/// `F(λ)/F(2πi)`, negated into the upper half plane if needed.
pub fn boundary_modulus(tube: &TubeSpec) -> Result<TorusModulus> {
    if tube.radius == 0.0 {
        return Err(Error::Degenerate("tube of radius 0 has no boundary torus".into()));
    }
    let meridian = tube.flatten(Complex64::new(0.0, 2.0 * PI));
    let mut tau = tube.flatten(tube.complex_length) / meridian;
    if tau.im < 0.0 {
        tau = -tau;
    }
    Ok(TorusModulus { tau, reduced: false })
}

/// Integer matrix `[[a, b], [c, d]]` acting by `τ ↦ (aτ + b)/(cτ + d)`.
pub type Mat2 = [[i64; 2]; 2];

pub fn mobius(m: &Mat2, tau: Complex64) -> Complex64 {
    (tau * m[0][0] as f64 + m[0][1] as f64) / (tau * m[1][0] as f64 + m[1][1] as f64)
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// `τ ↦ τ + k`.
    T(i64),
    /// `τ ↦ -1/τ`.
    S,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::T(1) => write!(f, "T"),
            Generator::T(k) => write!(f, "T^{k}"),
            Generator::S => write!(f, "S"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Reduction {
    pub modulus: TorusModulus,
    /// Total matrix applied to the input.
    pub matrix: Mat2,
    /// Generators in the order applied.
    pub word: Vec<Generator>,
}

const FD_TOL: f64 = 1e-12;

/// Moves `τ` into `|Re τ| ≤ 1/2`, `|τ| ≥ 1`.
pub fn reduce_modulus(tau: Complex64) -> Result<Reduction> {
    if tau.im.is_nan() || tau.im <= 0.0 {
        return Err(invariant("tau", "imaginary part must be positive"));
    }
    let mut z = tau;
    let mut m: Mat2 = [[1, 0], [0, 1]];
    let mut word = Vec::new();
    for _ in 0..10_000 {
        if z.re.abs() > 0.5 + FD_TOL {
            let k = -z.re.round() as i64;
            z += k as f64;
            m = mat_mul(&[[1, k], [0, 1]], &m);
            word.push(Generator::T(k));
            continue;
        }
        if z.norm_sqr() < 1.0 - FD_TOL {
            z = -1.0 / z;
            m = mat_mul(&[[0, -1], [1, 0]], &m);
            word.push(Generator::S);
            continue;
        }
        return Ok(Reduction {
            modulus: TorusModulus { tau: z, reduced: true },
            matrix: m,
            word,
        });
    }
    Err(Error::Degenerate(format!("reduction of {tau} did not terminate")))
}

/// Distance between the orbits of two moduli, measured between reduced
/// representatives and the images across the fundamental domain's edges.
pub fn modular_distance(a: Complex64, b: Complex64) -> Result<f64> {
    let za = reduce_modulus(a)?.modulus.tau;
    let zb = reduce_modulus(b)?.modulus.tau;
    let images: [Mat2; 7] = [
        [[1, 0], [0, 1]],
        [[1, 1], [0, 1]],
        [[1, -1], [0, 1]],
        [[0, -1], [1, 0]],
        [[1, -1], [1, 0]],
        [[0, -1], [1, 1]],
        [[0, -1], [1, -1]],
    ];
    Ok(images
        .iter()
        .map(|g| (za - mobius(g, zb)).norm())
        .fold(f64::INFINITY, f64::min))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Square,
    Hexagonal,
    Asymmetric,
}

pub fn symmetric_torus_test(tau: Complex64, tol: f64) -> Result<SymmetryClass> {
    let z = reduce_modulus(tau)?.modulus.tau;
    let h = 3f64.sqrt() / 2.0;
    if (z - Complex64::new(0.0, 1.0)).norm() <= tol {
        Ok(SymmetryClass::Square)
    } else if (z - Complex64::new(0.5, h)).norm() <= tol || (z - Complex64::new(-0.5, h)).norm() <= tol {
        Ok(SymmetryClass::Hexagonal)
    } else {
        Ok(SymmetryClass::Asymmetric)
    }
}

/// Geometry of one filling's tube.
#[derive(Clone, Debug, Serialize)]
pub struct TubeReplay {
    pub coeff: FillingCoefficient,
    pub complex_length: Complex64,
    pub radius: f64,
    pub boundary_modulus: Complex64,
    pub reduced_modulus: Complex64,
    /// `F(γ)/F(μ)` for the cusp's original meridian `μ` and longitude `γ`.
    pub marked_modulus: Complex64,
    /// Distance of the reduced boundary modulus from the reduced cusp shape.
    pub shape_error: f64,
}

/// Tube data for a filling whose core has complex length `λ` (before the
/// `|t| > 1` normalization, so that `λ` pairs with the Bezout marking).
pub fn tube_replay(
    coeff: &FillingCoefficient,
    bezout: (i64, i64),
    complex_length: Complex64,
    cusp_volume: f64,
    cusp_shape: Complex64,
) -> Result<TubeReplay> {
    if coeff.len() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: coeff.len(),
        });
    }
    let oriented = if complex_length.re < 0.0 {
        -complex_length
    } else {
        complex_length
    };
    let radius = radius_from_volume(oriented, cusp_volume)?;
    let tube = TubeSpec::new(oriented, radius)?;
    let modulus = boundary_modulus(&tube)?;
    let reduced = reduce_modulus(modulus.tau)?.modulus.tau;
    let (p, q) = coeff.pairs[0];
    let (r, s) = bezout;
    // μ = r m - q l, γ = -s m + p l for the filling curve m and core l
    let fm = tube.flatten(Complex64::new(0.0, 2.0 * PI));
    let fl = tube.flatten(complex_length);
    let marked = (fl * p as f64 - fm * s as f64) / (fm * r as f64 - fl * q as f64);
    Ok(TubeReplay {
        coeff: coeff.clone(),
        complex_length: oriented,
        radius,
        boundary_modulus: modulus.tau,
        reduced_modulus: reduced,
        marked_modulus: marked,
        shape_error: modular_distance(modulus.tau, cusp_shape)?,
    })
}

/// Tube data from a solved one-cusp filling.
pub fn replay_solution(
    solution: &FillingSolution,
    convention: LengthConvention,
    cusp_volume: f64,
    cusp_shape: Complex64,
) -> Result<TubeReplay> {
    let lt = if solution.inverted[0] {
        -solution.log_t[0]
    } else {
        solution.log_t[0]
    };
    tube_replay(
        &solution.coeff,
        solution.bezout[0],
        convention.length(lt),
        cusp_volume,
        cusp_shape,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct RigidityReplay {
    pub first: TubeReplay,
    pub second: TubeReplay,
    pub holonomy_gap: f64,
    pub holonomies_agree: bool,
    pub reduced_moduli_gap: f64,
    pub reduced_moduli_agree: bool,
    pub marked_moduli_gap: f64,
    pub marked_moduli_agree: bool,
    pub slopes_equal: bool,
    /// Equal holonomies force equal slopes.
    pub implication_holds: bool,
    pub convention: LengthConvention,
}

pub fn compare_replays(
    first: TubeReplay,
    second: TubeReplay,
    holonomy_gap: f64,
    tol: f64,
    convention: LengthConvention,
) -> Result<RigidityReplay> {
    let reduced_moduli_gap = modular_distance(first.boundary_modulus, second.boundary_modulus)?;
    let marked_moduli_gap = (first.marked_modulus - second.marked_modulus).norm();
    let slopes_equal = first.coeff.same_slopes(&second.coeff);
    let holonomies_agree = holonomy_gap < tol;
    Ok(RigidityReplay {
        holonomy_gap,
        holonomies_agree,
        reduced_moduli_gap,
        reduced_moduli_agree: reduced_moduli_gap < tol,
        marked_moduli_gap,
        marked_moduli_agree: marked_moduli_gap < tol,
        slopes_equal,
        implication_holds: !holonomies_agree || slopes_equal,
        convention,
        first,
        second,
    })
}

/// Replays the rigidity argument for two fillings of a one-cusp manifold.
pub fn appendix_rigidity_replay(
    desc: &ManifoldDescriptor,
    coeff: &FillingCoefficient,
    coeff2: &FillingCoefficient,
    cusp_volume: f64,
    convention: LengthConvention,
    tol: f64,
    opts: &SolverOptions,
) -> Result<RigidityReplay> {
    if desc.cusps() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: desc.cusps(),
        });
    }
    let tau = desc.taus()[0];
    if symmetric_torus_test(tau, 1e-9)? != SymmetryClass::Asymmetric {
        return Err(invariant("shapes[0]", "cusp torus is symmetric"));
    }
    let s1 = solve_filling(desc, coeff, opts)?;
    let s2 = solve_filling(desc, coeff2, opts)?;
    let gap = (s1.t[0] - s2.t[0]).norm();
    let r1 = replay_solution(&s1, convention, cusp_volume, tau)?;
    let r2 = replay_solution(&s2, convention, cusp_volume, tau)?;
    compare_replays(r1, r2, gap, tol, convention)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn tube(l: f64, r: f64) -> TubeSpec {
        TubeSpec::new(Complex64::new(l, 0.3), r).unwrap()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(tube_volume(&tube(1.0, 0.0)), 0.0);
        assert!((tube_volume(&tube(1.0, 1.0)) - 4.338_847).abs() < 1e-6);
        assert!((tube_volume(&tube(2.0, 1.3)) - 2.0 * tube_volume(&tube(1.0, 1.3))).abs() < 1e-12);
    }

    #[test]
    fn volume_matches_quadrature() {
        for &l in &[0.01, 0.1, 0.5, 1.0, 2.0] {
            for &r in &[0.1, 0.5, 1.0, 2.0, 3.5, 5.0] {
                let quad = simpson(|x| 2.0 * PI * l * x.sinh() * x.cosh(), 0.0, r, 4000);
                let v = tube_volume(&tube(l, r));
                assert!((v - quad).abs() <= 1e-10 * v, "{l} {r}");
            }
        }
    }

    #[test]
    fn radius_inversion() {
        let lam = Complex64::new(0.7, 0.2);
        assert_eq!(radius_from_volume(lam, 0.0).unwrap(), 0.0);
        for r in [0.05, 0.9, 2.4, 6.0] {
            let v = tube_volume(&TubeSpec::new(lam, r).unwrap());
            assert!((radius_from_volume(lam, v).unwrap() - r).abs() < 1e-12);
        }
        let small = radius_from_volume(Complex64::new(0.1, 0.0), 2.0).unwrap();
        let large = radius_from_volume(Complex64::new(0.5, 0.0), 2.0).unwrap();
        assert!(small > large);
        assert!(radius_from_volume(Complex64::new(0.0, 1.0), 1.0).is_err());
    }

    /// Point of the radius-`r` tube around the vertical axis in upper half space.
    fn uhs_point(r: f64, x: f64, phi: f64) -> (Complex64, f64) {
        (Complex64::from_polar(x.exp() * r.tanh(), phi), x.exp() / r.cosh())
    }

    fn uhs_distance(a: (Complex64, f64), b: (Complex64, f64)) -> f64 {
        let c = 1.0 + ((a.0 - b.0).norm_sqr() + (a.1 - b.1).powi(2)) / (2.0 * a.1 * b.1);
        c.acosh()
    }

    #[test]
    fn boundary_metric_against_upper_half_space() {
        let eps = 1e-5;
        for r in [0.3, 1.0, 2.5] {
            for (dx, dphi) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (0.3, 0.95)] {
                let a = uhs_point(r, 0.2, 0.7);
                let b = uhs_point(r, 0.2 + eps * dx, 0.7 + eps * dphi);
                let d = uhs_distance(a, b);
                let flat = eps * ((r.cosh() * dx).powi(2) + (r.sinh() * dphi).powi(2)).sqrt();
                assert!((d - flat).abs() < 1e-4 * flat, "{r} {dx} {dphi}");
            }
        }
        // the loxodromic z -> e^λ z moves (x, φ) to (x + ℓ, φ + θ)
        let lam = Complex64::new(0.4, 1.1);
        let (w, h) = uhs_point(1.7, 0.0, 0.0);
        let (w2, h2) = (w * lam.exp(), h * lam.re.exp());
        let (w3, h3) = uhs_point(1.7, lam.re, lam.im);
        assert!((w2 - w3).norm() < 1e-12 && (h2 - h3).abs() < 1e-12);
    }

    #[test]
    fn boundary_modulus_examples() {
        assert!(boundary_modulus(&TubeSpec::new(Complex64::new(1.0, 0.0), 0.0).unwrap()).is_err());
        let rect = boundary_modulus(&TubeSpec::new(Complex64::new(1.0, 0.0), 2.0).unwrap()).unwrap();
        assert!(rect.tau.re.abs() < 1e-15 && rect.tau.im > 0.0);
        let far = boundary_modulus(&TubeSpec::new(Complex64::new(1.0, 0.0), 30.0).unwrap()).unwrap();
        assert!((far.tau - Complex64::new(0.0, 1.0 / (2.0 * PI))).norm() < 1e-12);
        let lower = boundary_modulus(&TubeSpec::new(Complex64::new(0.2, -1.0), 1.0).unwrap()).unwrap();
        assert!(lower.tau.im > 0.0);
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_modulus(Complex64::new(1.0, 1.0)).unwrap();
        assert!((r.modulus.tau - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(r.word, vec![Generator::T(-1)]);
        assert_eq!(r.word[0].to_string(), "T^-1");
        let hex = Complex64::new(0.5, 3f64.sqrt() / 2.0);
        assert_eq!(reduce_modulus(hex).unwrap().modulus.tau, hex);
        let z = Complex64::new(0.1, 2.0);
        let r = reduce_modulus(z).unwrap();
        assert_eq!(r.modulus.tau, z);
        assert!(r.word.is_empty());
        assert!(reduce_modulus(Complex64::new(0.3, -1.0)).is_err());
    }

    #[test]
    fn reduction_lands_in_domain_with_matching_matrix() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let z = Complex64::new(rng.gen_range(-20.0..20.0), rng.gen_range(0.001..3.0));
            let r = reduce_modulus(z).unwrap();
            let w = r.modulus.tau;
            assert!(w.re.abs() <= 0.5 + 1e-12 && w.norm() >= 1.0 - 1e-12);
            let m = r.matrix;
            assert_eq!(m[0][0] * m[1][1] - m[0][1] * m[1][0], 1);
            assert!((mobius(&m, z) - w).norm() < 1e-12 * (1.0 + w.norm()) * (1.0 + z.norm()));
        }
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(
            symmetric_torus_test(Complex64::new(0.0, 1.0), 1e-9).unwrap(),
            SymmetryClass::Square
        );
        assert_eq!(
            symmetric_torus_test(Complex64::new(0.5, 3f64.sqrt() / 2.0), 1e-9).unwrap(),
            SymmetryClass::Hexagonal
        );
        assert_eq!(
            symmetric_torus_test(Complex64::new(3.0, 1.0), 1e-9).unwrap(),
            SymmetryClass::Square
        );
        assert_eq!(
            symmetric_torus_test(Complex64::new(0.5, 1.2), 1e-9).unwrap(),
            SymmetryClass::Asymmetric
        );
    }

    #[test]
    fn modular_distance_across_the_edge() {
        let a = Complex64::new(0.5 - 1e-9, 1.3);
        let b = Complex64::new(-0.5 + 1e-9, 1.3);
        assert!(modular_distance(a, b).unwrap() < 1e-8);
        assert!(modular_distance(Complex64::new(0.1, 1.5), Complex64::new(0.1, 2.5)).unwrap() > 0.9);
    }

    fn quartic() -> ManifoldDescriptor {
        ManifoldDescriptor::from_json_str(
            r#"{"name": "q4", "cusps": 1, "shapes": [["0.23", "1.15"]],
            "potential": {"degree_cutoff": 4, "terms": [{"index": [4], "coeff": ["0.05", "0.01"]}]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn replay_identical_and_distinct() {
        let d = quartic();
        let o = SolverOptions::default();
        let c: FillingCoefficient = "49/3".parse().unwrap();
        let same = appendix_rigidity_replay(&d, &c, &c, 1.0, LengthConvention::Derivative, 1e-8, &o).unwrap();
        assert!(same.holonomies_agree && same.reduced_moduli_agree && same.marked_moduli_agree && same.slopes_equal);
        let c2: FillingCoefficient = "47/5".parse().unwrap();
        let diff = appendix_rigidity_replay(&d, &c, &c2, 1.0, LengthConvention::Derivative, 1e-8, &o).unwrap();
        assert!(diff.holonomy_gap > 1e-8);
        assert!(!diff.slopes_equal && diff.implication_holds);
    }

    #[test]
    fn marked_modulus_tracks_the_cusp_shape() {
        let d = quartic();
        let tau = d.taus()[0];
        let mut errors = Vec::new();
        for n in [50, 100, 200] {
            let sol = solve_filling(
                &d,
                &FillingCoefficient::single(n - 1, 1).unwrap(),
                &SolverOptions::default(),
            )
            .unwrap();
            let r = replay_solution(&sol, LengthConvention::Derivative, 1.0, tau).unwrap();
            errors.push(((r.marked_modulus - tau).norm(), r.shape_error));
        }
        for w in errors.windows(2) {
            assert!(w[1].0 < w[0].0 / 2.0 && w[1].1 < w[0].1 / 2.0, "{errors:?}");
        }
    }

    #[test]
    fn forced_equal_lengths_with_distinct_slopes_mismatch() {
        let d = quartic();
        let tau = d.taus()[0];
        let sol = solve_filling(&d, &"60/1".parse().unwrap(), &SolverOptions::default()).unwrap();
        let lam = -sol.log_t[0];
        let a = tube_replay(&sol.coeff, sol.bezout[0], lam, 1.0, tau).unwrap();
        let c2: FillingCoefficient = "59/2".parse().unwrap();
        let b = tube_replay(&c2, crate::filling::bezout(59, 2), lam, 1.0, tau).unwrap();
        let rep = compare_replays(a, b, 0.0, 1e-6, LengthConvention::Derivative).unwrap();
        assert!(rep.holonomies_agree && !rep.slopes_equal);
        assert!(!rep.marked_moduli_agree);
        assert!(!rep.implication_holds);
    }
}
