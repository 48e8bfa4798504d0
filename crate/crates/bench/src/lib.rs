//! Inputs shared by the benchmarks.

use dehn_core::filling::{slopes_in_range, FillingCoefficient};

/// The first `n` one-cusp fillings with `lo <= |p|+|q|`.
pub fn one_cusp_fillings(lo: i64, n: usize) -> Vec<FillingCoefficient> {
    slopes_in_range(lo, lo + 64)
        .into_iter()
        .take(n)
        .map(|(p, q)| FillingCoefficient::single(p, q).expect("coprime"))
        .collect()
}
