//! Desk-scale acceptance suite. Each runner measures one criterion on the
//! bundled fixtures and reports the numbers it was judged on.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::anomaly::{
    anomaly_series_criterion, classify_2x4_same_shape, classify_2x4_two_shapes, integer_rank, normalize_subgroup,
    numeric_rank, LemmaClassification, SubgroupLattice,
};
use crate::filling::{
    scan_products, slopes_in_range, solve_filling, solve_filling_in, Chart, FillingCoefficient, ScanOptions,
    SolverOptions,
};
use crate::fixtures::Fixture;
use crate::relations::height::{height, AlgebraicNumber};
use crate::relations::{multiplicative_independence, pvol_independence, quadraticity_test};
use crate::scalar::{ComplexScalar, HpComplex, Precision};
use crate::tube::{replay_solution, symmetric_torus_test, LengthConvention, SymmetryClass};
use crate::volume::pseudo_volume_in;
use crate::Result;

/// Digits used for relation searches.
pub const RELATION_DIGITS: u32 = 50;
/// Cusp volume used for the tube convergence check.
pub const T3_CUSP_VOLUME: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub measured: Value,
    pub runtime_s: f64,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} {} {} ({:.2}s) {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.runtime_s,
            self.measured
        )
    }
}

fn report(id: &str, title: &str, start: Instant, passed: bool, measured: Value) -> CriterionReport {
    CriterionReport {
        id: id.into(),
        title: title.into(),
        passed,
        measured,
        runtime_s: start.elapsed().as_secs_f64(),
    }
}

fn random_slope(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> (i64, i64) {
    loop {
        let n = rng.gen_range(lo..=hi);
        let p = rng.gen_range(-n..=n);
        let q = (n - p.abs()) * if rng.gen_bool(0.5) { 1 } else { -1 };
        if p.gcd(&q) == 1 {
            return if q < 0 || (q == 0 && p < 0) { (-p, -q) } else { (p, q) };
        }
    }
}

fn hp_opts() -> (Precision, SolverOptions) {
    (
        Precision::from_digits(RELATION_DIGITS + 20),
        SolverOptions::high_precision(RELATION_DIGITS + 10),
    )
}

/// Solver against `u = 2πi/(p + qτ)` on the quadratic fixture.
pub fn a1() -> Result<CriterionReport> {
    let start = Instant::now();
    let d = Fixture::Quadratic.load()?;
    let tau = d.taus()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (p, q) = random_slope(&mut rng, 10, 200);
        let sol = solve_filling(&d, &FillingCoefficient::single(p, q)?, &opts)?;
        let u0 = Complex64::new(0.0, 2.0 * PI) / (p as f64 + q as f64 * tau);
        worst = worst.max((sol.u[0] - u0).norm() / sol.u[0].norm());
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(report(
        "A1",
        "solver matches the linear closed form",
        start,
        worst <= 1e-12 && elapsed < 2.0,
        json!({"fillings": 200, "max_relative_error": worst, "runtime_s": elapsed}),
    ))
}

/// Shell maxima of `|t - 1|` and the band of `|u|(|p|+|q|)` on the quartic fixture.
pub fn a2() -> Result<CriterionReport> {
    let start = Instant::now();
    let d = Fixture::Quartic.load()?;
    let opts = SolverOptions::default();
    let mut maxima = Vec::new();
    let mut max_log = Vec::new();
    let (mut band_lo, mut band_hi) = (f64::INFINITY, 0.0f64);
    for n in [20i64, 40, 80, 160] {
        let mut m = 0.0f64;
        let mut ml = 0.0f64;
        for (p, q) in slopes_in_range(n, n + 5) {
            let sol = solve_filling(&d, &FillingCoefficient::single(p, q)?, &opts)?;
            m = m.max((sol.t[0] - 1.0).norm());
            ml = ml.max(sol.log_t[0].norm());
            let scaled = sol.u[0].norm() * (p.abs() + q.abs()) as f64;
            band_lo = band_lo.min(scaled);
            band_hi = band_hi.max(scaled);
        }
        maxima.push(m);
        max_log.push(ml);
    }
    let decreasing = maxima.windows(2).all(|w| w[1] < w[0]);
    let band_ok = band_hi <= 2.0 * band_lo;
    Ok(report(
        "A2",
        "holonomies approach 1 on growing shells",
        start,
        decreasing && band_ok,
        json!({
            "shells": [20, 40, 80, 160],
            "max_abs_t_minus_1": maxima,
            "max_abs_log_t": max_log,
            "t_decreasing": decreasing,
            "u_norm_band": [band_lo, band_hi],
            "band_within_factor_2": band_ok,
        }),
    ))
}

/// Collision scan of `t_1 t_2` on the non-symmetric fixture.
pub fn a3(threads: usize) -> Result<CriterionReport> {
    let start = Instant::now();
    let d = Fixture::Nonsymmetric2.load()?;
    let rep = scan_products(
        &d,
        &ScanOptions {
            norm_range: (20, 40),
            exponents: vec![1, 1],
            collision_tol: 1e-9,
            threads,
            solver: SolverOptions::default(),
        },
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(report(
        "A3",
        "no collisions of t_1 t_2 over the 20..40 grid",
        start,
        rep.collisions.is_empty() && elapsed < 60.0,
        json!({
            "evaluated": rep.evaluated,
            "skipped": rep.skipped.len(),
            "collisions": rep.collisions.len(),
            "min_gap": rep.min_gap.as_ref().map(|c| c.gap),
            "min_gap_pair": rep.min_gap.as_ref().map(|c| [c.a.to_string(), c.b.to_string()]),
            "threads": threads,
            "runtime_s": elapsed,
        }),
    ))
}

/// Integer relations among `log t_1, log t_2` modulo `2πi`.
pub fn a4() -> Result<CriterionReport> {
    let start = Instant::now();
    let (prec, opts) = hp_opts();
    let d = Fixture::Nonsymmetric2.load()?;
    let chart = Chart::<HpComplex>::new(&d, prec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut found = 0;
    let mut checked = Vec::new();
    while checked.len() < 20 {
        let c = FillingCoefficient::new(vec![random_slope(&mut rng, 20, 40), random_slope(&mut rng, 20, 40)])?;
        let sol = solve_filling_in(&chart, &c, &opts)?;
        let r = multiplicative_independence(&sol, 10_000, RELATION_DIGITS)?;
        if r.found {
            found += 1;
        }
        checked.push(c.to_string());
    }
    let p = Fixture::Product2.load()?;
    let pchart = Chart::<HpComplex>::new(&p, prec)?;
    let control = solve_filling_in(&pchart, &"23/4,23/4".parse()?, &opts)?;
    let cr = multiplicative_independence(&control, 10_000, RELATION_DIGITS)?;
    let control_ok = cr.found && cr.coefficients == vec![1, -1] && cr.residual < 1e-25;
    Ok(report(
        "A4",
        "holonomies multiplicatively independent; symmetric control related",
        start,
        found == 0 && control_ok,
        json!({
            "fillings": checked,
            "relations_found": found,
            "control_coefficients": cr.coefficients,
            "control_residual": cr.residual,
        }),
    ))
}

/// Pseudo-volume relations modulo `iπ²` on the quartic fixture.
pub fn a5() -> Result<CriterionReport> {
    let start = Instant::now();
    let (prec, opts) = hp_opts();
    let d = Fixture::Quartic.load()?;
    let chart = Chart::<HpComplex>::new(&d, prec)?;
    let slopes: Vec<FillingCoefficient> = ["37/2", "41/3", "53/4", "29/5", "61/7"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let pv = |c: &FillingCoefficient| -> Result<HpComplex> {
        let sol = solve_filling_in(&chart, c, &opts)?;
        Ok(pseudo_volume_in(&d, &sol)?.unreduced)
    };
    let values: Vec<HpComplex> = slopes.iter().map(pv).collect::<Result<_>>()?;
    let r = pvol_independence(&values, 1000, RELATION_DIGITS)?;
    let dup = vec![
        values[0].clone(),
        values[0].clone(),
        values[1].clone(),
        values[2].clone(),
        values[3].clone(),
    ];
    let c = pvol_independence(&dup, 1000, RELATION_DIGITS)?;
    let control_ok = c.relation.found && c.relation.coefficients == vec![1, -1, 0, 0, 0];
    Ok(report(
        "A5",
        "no all-nonzero pseudo-volume relation; duplicate control related",
        start,
        !r.all_nonzero && control_ok,
        json!({
            "fillings": slopes.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "relation_found": r.relation.found,
            "all_nonzero": r.all_nonzero,
            "coefficients": r.relation.coefficients,
            "control_coefficients": c.relation.coefficients,
        }),
    ))
}

fn numeric_rank_2x2(m: &[[i64; 4]; 2], t1: Complex64, t2: Complex64) -> usize {
    let e = |a: i64, b: i64, t: Complex64| Complex64::new(a as f64, 0.0) + t * b as f64;
    let mat = nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            e(m[0][0], m[0][1], t1),
            e(m[0][2], m[0][3], t2),
            e(m[1][0], m[1][1], t1),
            e(m[1][2], m[1][3], t2),
        ],
    );
    numeric_rank(&mat)
}

/// Exact 2×4 classifications against numeric ranks over entries in -2..=2.
pub fn a6() -> Result<CriterionReport> {
    let start = Instant::now();
    let t = Fixture::Quartic.load()?.taus()[0];
    let ts = Fixture::Nonsymmetric2.load()?.taus();
    let (rank2, same_bad, two_bad) = (0..5usize.pow(8))
        .into_par_iter()
        .map(|code| {
            let mut e = [0i64; 8];
            let mut c = code;
            for x in e.iter_mut() {
                *x = (c % 5) as i64 - 2;
                c /= 5;
            }
            let m = [[e[0], e[1], e[2], e[3]], [e[4], e[5], e[6], e[7]]];
            let Ok(same) = classify_2x4_same_shape(&m) else {
                return (0, 0, 0);
            };
            let two = classify_2x4_two_shapes(&m).expect("rank already checked");
            let same_ok = (same == LemmaClassification::Rank2) == (numeric_rank_2x2(&m, t, t) == 2);
            let two_ok = (two == LemmaClassification::Rank2) == (numeric_rank_2x2(&m, ts[0], ts[1]) == 2);
            (1usize, (!same_ok) as usize, (!two_ok) as usize)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let elapsed = start.elapsed().as_secs_f64();
    Ok(report(
        "A6",
        "exact lemma classifications agree with numeric rank",
        start,
        same_bad == 0 && two_bad == 0 && elapsed < 30.0,
        json!({
            "rank2_matrices": rank2,
            "same_shape_disagreements": same_bad,
            "two_shape_disagreements": two_bad,
            "runtime_s": elapsed,
        }),
    ))
}

/// Series criterion over all small rational combinations.
pub fn a7() -> Result<CriterionReport> {
    let start = Instant::now();
    let base = Fixture::Quartic.load()?;
    let fracs: Vec<(i64, i64)> = (-3..=3).flat_map(|n| (1..=3).map(move |d| (n, d))).collect();
    let mut cases = 0;
    let mut exceptions = Vec::new();
    for n in [2usize, 3] {
        let pot = base.synthesize_product(n)?.potential;
        let mut combos: Vec<Vec<(i64, i64)>> = vec![vec![]];
        for _ in 0..n - 1 {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    fracs.iter().map(move |f| {
                        let mut c = c.clone();
                        c.push(*f);
                        c
                    })
                })
                .collect();
        }
        for l in combos {
            let nonzero: Vec<_> = l.iter().filter(|(a, _)| *a != 0).collect();
            let expected = nonzero.is_empty() || (nonzero.len() == 1 && nonzero[0].0.abs() == nonzero[0].1);
            let got = anomaly_series_criterion(&pot, &l)?;
            cases += 1;
            if got != expected {
                exceptions.push(format!("{l:?}"));
            }
        }
    }
    Ok(report(
        "A7",
        "series vanishes exactly for l with at most one nonzero entry, equal to +-1",
        start,
        exceptions.is_empty(),
        json!({"cases": cases, "exceptions": exceptions}),
    ))
}

/// Normalization on random lattices and on the hand-computed instance.
pub fn a8() -> Result<CriterionReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut tested = 0;
    let mut failures = Vec::new();
    while tested < 100 {
        let n = rng.gen_range(2..=3usize);
        let k = rng.gen_range(1..=3usize);
        let rows: Vec<Vec<i64>> = (0..k)
            .map(|_| (0..2 * n).map(|_| rng.gen_range(-5..=5)).collect())
            .collect();
        let offsets: Vec<i64> = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
        let Ok(lat) = SubgroupLattice::new(rows, offsets) else {
            continue;
        };
        tested += 1;
        let expected_rank = if lat.is_through_identity() { k } else { k - 1 };
        match normalize_subgroup(&lat) {
            Ok((out, _)) => {
                let ok =
                    out.is_through_identity() && out.k() == expected_rank && integer_rank(&out.rows) == expected_rank;
                if !ok {
                    failures.push(format!("{lat:?}"));
                }
            }
            Err(crate::Error::Degenerate(_)) if k == 1 => {}
            Err(e) => failures.push(format!("{lat:?}: {e}")),
        }
    }
    let hand = SubgroupLattice::new(
        vec![vec![1, 0, 2, -1], vec![0, 3, 1, 1], vec![1, 1, 0, 0]],
        vec![1, 2, 0],
    )?;
    let (out, _) = normalize_subgroup(&hand)?;
    let hand_ok = out.rows == vec![vec![-2, 3, -3, 3], vec![1, 1, 0, 0]];
    Ok(report(
        "A8",
        "normalization yields full-rank lattices through the identity",
        start,
        failures.is_empty() && hand_ok,
        json!({"lattices": tested, "failures": failures, "hand_instance": out.rows, "hand_matches": hand_ok}),
    ))
}

/// Heights of reference numbers and reciprocal invariance.
pub fn a9() -> Result<CriterionReport> {
    let start = Instant::now();
    let h32 = height(&AlgebraicNumber::new(vec![2, -3], Complex64::new(1.5, 0.0))?)?;
    let hs2 = height(&AlgebraicNumber::new(vec![1, 0, -2], Complex64::new(1.41, 0.0))?)?;
    let z5 = Complex64::from_polar(1.0, 2.0 * PI / 5.0);
    let hz5 = height(&AlgebraicNumber::new(vec![1, 1, 1, 1, 1], z5)?)?;
    let errs = [(h32 - 3f64.ln()).abs(), (hs2 - 0.5 * 2f64.ln()).abs(), hz5.abs()];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 50 {
        let a: i64 = rng.gen_range(1..=30);
        let b: i64 = rng.gen_range(-30..=30);
        let c: i64 = rng.gen_range(-30..=30);
        let disc = b * b - 4 * a * c;
        let r = (disc.max(0) as f64).sqrt().round() as i64;
        if c == 0 || r * r == disc || a.gcd(&b).gcd(&c) != 1 {
            continue;
        }
        let root = (-(b as f64) + Complex64::new(disc as f64, 0.0).sqrt()) / (2.0 * a as f64);
        let h = height(&AlgebraicNumber::new(vec![a, b, c], root)?)?;
        let hi = height(&AlgebraicNumber::new(vec![c, b, a], 1.0 / root)?)?;
        worst = worst.max((h - hi).abs());
        checked += 1;
    }
    Ok(report(
        "A9",
        "height references and reciprocal invariance",
        start,
        errs.iter().all(|&e| e < 1e-12) && worst < 1e-12,
        json!({
            "h(3/2)-log3": errs[0],
            "h(sqrt2)-log2/2": errs[1],
            "h(zeta5)": errs[2],
            "reciprocal_max_diff": worst,
        }),
    ))
}

/// Reduced tube-boundary moduli against the reduced cusp shape.
pub fn t3_with(convention: LengthConvention) -> Result<CriterionReport> {
    let start = Instant::now();
    let d = Fixture::Quartic.load()?;
    let tau = d.taus()[0];
    let mut errors = Vec::new();
    for n in [50i64, 100, 200] {
        let sol = solve_filling(&d, &FillingCoefficient::single(n - 1, 1)?, &SolverOptions::default())?;
        errors.push(replay_solution(&sol, convention, T3_CUSP_VOLUME, tau)?.shape_error);
    }
    let halving = errors.windows(2).all(|w| w[1] <= w[0] / 2.0);
    let final_ok = errors[2] < 1e-2;
    Ok(report(
        "T3",
        "tube boundary modulus converges to the cusp shape",
        start,
        halving && final_ok,
        json!({
            "norms": [50, 100, 200],
            "errors": errors,
            "convention": convention,
            "cusp_volume": T3_CUSP_VOLUME,
        }),
    ))
}

pub fn t3() -> Result<CriterionReport> {
    t3_with(LengthConvention::default())
}

/// Square and hexagonal tori flagged; generic shapes not; quadraticity agrees.
pub fn t4() -> Result<CriterionReport> {
    let start = Instant::now();
    let p = Precision::from_digits(RELATION_DIGITS + 20);
    let s3 = rug::Float::with_val(p.0, 3).sqrt() / 2u32;
    let hex = HpComplex::from_floats(rug::Float::with_val(p.0, 0.5), s3);
    let square = HpComplex::i(p);
    let mut inconsistent = Vec::new();
    let mut misflagged = Vec::new();
    let check = |tau: &HpComplex, want_symmetric: bool, mis: &mut Vec<String>, inc: &mut Vec<String>| -> Result<()> {
        let class = symmetric_torus_test(tau.to_c64(), 1e-9)?;
        let symmetric = class != SymmetryClass::Asymmetric;
        let quadratic = quadraticity_test(tau, 1000, RELATION_DIGITS)?.quadratic;
        if symmetric != want_symmetric {
            mis.push(format!("{}", tau.to_c64()));
        }
        if symmetric != quadratic {
            inc.push(format!("{}", tau.to_c64()));
        }
        Ok(())
    };
    check(&square, true, &mut misflagged, &mut inconsistent)?;
    check(&hex, true, &mut misflagged, &mut inconsistent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..100 {
        let z = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.2..3.0));
        check(&HpComplex::from_c64(z, p), false, &mut misflagged, &mut inconsistent)?;
    }
    Ok(report(
        "T4",
        "symmetry gate on square, hexagonal and generic tori",
        start,
        misflagged.is_empty() && inconsistent.is_empty(),
        json!({"generic_samples": 100, "misflagged": misflagged, "quadraticity_inconsistent": inconsistent}),
    ))
}

/// Every criterion in order.
pub fn run_all(threads: usize) -> Vec<(String, Result<CriterionReport>)> {
    vec![
        ("A1".to_string(), a1()),
        ("A2".to_string(), a2()),
        ("A3".to_string(), a3(threads)),
        ("A4".to_string(), a4()),
        ("A5".to_string(), a5()),
        ("A6".to_string(), a6()),
        ("A7".to_string(), a7()),
        ("A8".to_string(), a8()),
        ("A9".to_string(), a9()),
        ("T3".to_string(), t3()),
        ("T4".to_string(), t4()),
    ]
}
