use std::path::Path;
use std::process::ExitCode;

use anyhow::Context;
use dehn_core::acceptance;
use dehn_core::anomaly::{
    classify_2x4_same_shape, classify_2x4_two_shapes, classify_codim2_containment, numeric_rank, SubgroupLattice,
};
use dehn_core::filling::{
    scan_products, solve_filling, solve_filling_in, Chart, FillingCoefficient, ScanOptions, SolverOptions,
};
use dehn_core::fixtures::Fixture;
use dehn_core::manifold::{DecimalComplex, ManifoldDescriptor};
use dehn_core::relations::height::{height, root_of_unity_test, AlgebraicNumber};
use dehn_core::relations::{cusp_symmetry_test, multiplicative_independence, pvol_independence};
use dehn_core::scalar::{ComplexScalar, HpComplex, Precision};
use dehn_core::tube::{appendix_rigidity_replay, boundary_modulus, reduce_modulus, tube_volume, TubeSpec};
use dehn_core::volume::{pseudo_volume, pseudo_volume_in};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{Cli, Command, DecimalPair, RelationsCommand, TubeCommand};
use crate::config::{FileConfig, RunConfig, PRECISION_ENV};
use crate::output::emit;
use crate::Failure;

const FIXTURE_PREFIX: &str = "fixture:";

fn load_manifold(source: &str) -> Result<ManifoldDescriptor, Failure> {
    if let Some(name) = source.strip_prefix(FIXTURE_PREFIX) {
        let fixture = Fixture::ALL
            .into_iter()
            .find(|f| f.file_name().trim_end_matches(".json") == name)
            .ok_or_else(|| Failure::Usage(format!("--manifold: unknown fixture {name:?}")))?;
        return Ok(fixture.load()?);
    }
    ManifoldDescriptor::load(source)
        .with_context(|| format!("loading {source}"))
        .map_err(Failure::Domain)
}

fn pair_c64(p: &DecimalPair) -> Complex64 {
    Complex64::new(p.re.parse().expect("validated"), p.im.parse().expect("validated"))
}

fn pair_hp(p: &DecimalPair, cfg: &RunConfig) -> Result<HpComplex, Failure> {
    Ok(DecimalComplex::new(p.re.clone(), p.im.clone()).to_scalar(working_precision(cfg))?)
}

fn working_precision(cfg: &RunConfig) -> Precision {
    Precision::from_digits(cfg.precision + 20)
}

fn solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.solver_tol,
        max_iter: cfg.max_iter,
        ..SolverOptions::default()
    }
}

fn hp_solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        max_iter: cfg.max_iter.max(100),
        ..SolverOptions::high_precision(cfg.precision + 10)
    }
}

fn decimal(z: &HpComplex, cfg: &RunConfig) -> [String; 2] {
    let (re, im) = z.to_decimal(cfg.precision as usize);
    [re, im]
}

fn read_fillings(path: &Path) -> Result<Vec<FillingCoefficient>, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("--fillings {}: {e}", path.display())))?;
    let list: Vec<String> = serde_json::from_str(&text).map_err(|e| {
        Failure::Usage(format!(
            "--fillings {}: expected a JSON array of strings: {e}",
            path.display()
        ))
    })?;
    list.iter()
        .map(|s| s.parse().map_err(|e| Failure::Usage(format!("--fillings: {e}"))))
        .collect()
}

fn write_csv(path: &Path, report: &dehn_core::filling::ScanReport) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let cusps = report.exponents.len();
    let mut header: Vec<String> = (1..=cusps).flat_map(|i| [format!("p_{i}"), format!("q_{i}")]).collect();
    header.extend(["re_prod".to_string(), "im_prod".to_string()]);
    w.write_record(&header)?;
    for e in &report.entries {
        let mut rec: Vec<String> = e
            .coeff
            .pairs
            .iter()
            .flat_map(|(p, q)| [p.to_string(), q.to_string()])
            .collect();
        rec.push(format!("{:.16e}", e.product.re));
        rec.push(format!("{:.16e}", e.product.im));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let cfg = RunConfig::resolve(std::env::var(PRECISION_ENV).ok(), file, cli.global.as_file_config())?;
    log::debug!("{cfg:?}");
    let out = cfg.out.clone();
    let value: Value = match cli.command {
        Command::Solve { manifold, filling } => {
            let d = load_manifold(&manifold.manifold)?;
            crate::output::to_value(&solve_filling(&d, &filling, &solver(&cfg))?)?
        }
        Command::Scan {
            manifold,
            min,
            max,
            exponents,
            csv,
        } => {
            let d = load_manifold(&manifold.manifold)?;
            let exponents = if exponents.is_empty() {
                vec![1; d.cusps()]
            } else {
                exponents
            };
            let report = scan_products(
                &d,
                &ScanOptions {
                    norm_range: (min, max),
                    exponents,
                    collision_tol: cfg.tol,
                    threads: cfg.threads,
                    solver: solver(&cfg),
                },
            )?;
            if let Some(path) = csv {
                write_csv(&path, &report)?;
            }
            crate::output::to_value(&report)?
        }
        Command::Pvol { manifold, filling } => {
            let d = load_manifold(&manifold.manifold)?;
            let sol = solve_filling(&d, &filling, &solver(&cfg))?;
            let pv = pseudo_volume(&d, &sol)?;
            json!({"filling": filling, "pvol": pv.value, "unreduced": pv.unreduced})
        }
        Command::Relations(RelationsCommand::MultIndep { manifold, filling }) => {
            let d = load_manifold(&manifold.manifold)?;
            let chart = Chart::<HpComplex>::new(&d, working_precision(&cfg))?;
            let sol = solve_filling_in(&chart, &filling, &hp_solver(&cfg))?;
            let rel = multiplicative_independence(&sol, cfg.bound, cfg.precision)?;
            json!({
                "filling": filling,
                "log_t": sol.log_t.iter().map(|z| decimal(z, &cfg)).collect::<Vec<_>>(),
                "relation": crate::output::to_value(&rel)?,
            })
        }
        Command::Relations(RelationsCommand::Pvol { manifold, fillings }) => {
            let fillings = read_fillings(&fillings)?;
            let d = load_manifold(&manifold.manifold)?;
            let chart = Chart::<HpComplex>::new(&d, working_precision(&cfg))?;
            let opts = hp_solver(&cfg);
            let pvols = fillings
                .iter()
                .map(|c| Ok(pseudo_volume_in(&d, &solve_filling_in(&chart, c, &opts)?)?.unreduced))
                .collect::<dehn_core::Result<Vec<_>>>()?;
            let ind = pvol_independence(&pvols, cfg.bound, cfg.precision)?;
            json!({
                "fillings": fillings,
                "unreduced": pvols.iter().map(|z| decimal(z, &cfg)).collect::<Vec<_>>(),
                "independence": crate::output::to_value(&ind)?,
            })
        }
        Command::Symmetry { tau_i, tau_j } => {
            let rep = cusp_symmetry_test(
                &pair_hp(&tau_i, &cfg)?,
                &pair_hp(&tau_j, &cfg)?,
                cfg.bound,
                cfg.precision,
            )?;
            crate::output::to_value(&rep)?
        }
        Command::Height { minpoly, root } => {
            let alpha = AlgebraicNumber::new(minpoly, pair_c64(&root))?;
            let h = height(&alpha)?;
            let unity = root_of_unity_test(&alpha, cfg.bound, cfg.precision)?;
            json!({
                "minpoly": alpha.minpoly,
                "root": alpha.root_at(Precision::DOUBLE)?.to_c64(),
                "degree": alpha.degree(),
                "height": h,
                "root_of_unity": unity.found,
                "order": if unity.found { unity.coefficients.first().copied() } else { None },
            })
        }
        Command::Classify { matrix, tau, tau2 } => {
            let m = matrix.0;
            let t1 = pair_c64(&tau);
            let (class, t2) = match &tau2 {
                Some(t2) => (classify_2x4_two_shapes(&m)?, pair_c64(t2)),
                None => (classify_2x4_same_shape(&m)?, t1),
            };
            let e = |a: i64, b: i64, t: Complex64| Complex64::new(a as f64, 0.0) + t * b as f64;
            let jac = nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[
                    e(m[0][0], m[0][1], t1),
                    e(m[0][2], m[0][3], t2),
                    e(m[1][0], m[1][1], t1),
                    e(m[1][2], m[1][3], t2),
                ],
            );
            let rank = numeric_rank(&jac);
            json!({
                "matrix": m,
                "two_shapes": tau2.is_some(),
                "classification": crate::output::to_value(&class)?,
                "numeric_rank": rank,
                "agrees": (class == dehn_core::anomaly::LemmaClassification::Rank2) == (rank == 2),
            })
        }
        Command::Anomalous { manifold, lattice } => {
            let d = load_manifold(&manifold.manifold)?;
            let text = std::fs::read_to_string(&lattice)
                .map_err(|e| Failure::Usage(format!("--lattice {}: {e}", lattice.display())))?;
            let lat = SubgroupLattice::from_json_str(&text)?;
            crate::output::to_value(&classify_codim2_containment(&d, &lat)?)?
        }
        Command::Tube(TubeCommand::Volume { length, radius }) => {
            let tube = TubeSpec::new(pair_c64(&length), radius)?;
            json!({"complex_length": tube.complex_length, "radius": radius, "volume": tube_volume(&tube)})
        }
        Command::Tube(TubeCommand::Modulus { length, radius, reduce }) => {
            let tube = TubeSpec::new(pair_c64(&length), radius)?;
            let m = boundary_modulus(&tube)?;
            let mut v = json!({"complex_length": tube.complex_length, "radius": radius, "modulus": m.tau});
            if reduce {
                v["reduction"] = crate::output::to_value(&reduce_modulus(m.tau)?)?;
            }
            v
        }
        Command::Tube(TubeCommand::Replay {
            manifold,
            f1,
            f2,
            cusp_volume,
            convention,
        }) => {
            let d = load_manifold(&manifold.manifold)?;
            let rep = appendix_rigidity_replay(&d, &f1, &f2, cusp_volume, convention, cfg.tol, &solver(&cfg))?;
            crate::output::to_value(&rep)?
        }
        Command::VerifyAll => return verify_all(&cfg),
    };
    emit(&value, out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn verify_all(cfg: &RunConfig) -> Result<ExitCode, Failure> {
    let mut criteria = Vec::new();
    let mut failed = 0;
    for (id, result) in acceptance::run_all(cfg.threads) {
        let entry = match result {
            Ok(rep) => {
                eprintln!("{}", rep.line());
                if !rep.passed {
                    failed += 1;
                }
                crate::output::to_value(&rep)?
            }
            Err(e) => {
                eprintln!("{id} FAIL error: {e}");
                failed += 1;
                json!({"id": id, "passed": false, "error": e.to_string()})
            }
        };
        criteria.push(entry);
    }
    let total = criteria.len();
    let report = json!({
        "fixtures": Fixture::ALL.iter().map(|f| f.file_name()).collect::<Vec<_>>(),
        "threads": cfg.threads,
        "passed": total - failed,
        "failed": failed,
        "criteria": criteria,
    });
    emit(&report, cfg.out.as_deref())?;
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
