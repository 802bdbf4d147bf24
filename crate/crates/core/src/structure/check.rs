//! Empirical verification of the (p,δ)-structure conditions
//!
//! ```text
//!   Σ ∂_kl S_ij(P) Q_ij Q_kl ≥ C₀ (δ+|P^sym|)^{p−2} |Q^sym|²
//!   |∂_kl S_ij(P)|           ≤ C₁ (δ+|P^sym|)^{p−2}
//! ```
//!
//! for an arbitrary stress callback, with derivatives taken by central
//! finite differences of the callback.

use alloc::vec::Vec;

use super::{StructureParams, SymTensor, Tensor};
use crate::{math, rng};

/// Thresholds standing in for "C₀ > 0" and "C₁ < ∞" on a finite sample:
/// a genuine (p,δ)-stress has scale-independent constants, so ratios that
/// drift below the floor or above the ceiling across magnitudes `1e−4…1e4`
/// are reported as violations.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CheckConfig {
    pub coercivity_floor: f64,
    pub growth_ceiling: f64,
    /// Finite-difference step relative to `δ + |P^sym|`.
    pub relative_step: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            coercivity_floor: 1e-6,
            growth_ceiling: 1e6,
            relative_step: 1e-5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub index: usize,
    pub strain_norm: f64,
    pub coercivity_ratio: f64,
    pub growth_ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StructureReport {
    /// Empirical `C₀`.
    pub min_coercivity_ratio: f64,
    /// Empirical `C₁`.
    pub max_growth_ratio: f64,
    pub sample_count: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
    pub config: CheckConfig,
    pub seed: Option<u64>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `count` pairs `(P, Q)` with entries uniform on `[−1, 1]`, each tensor
/// rescaled independently by one of [`rng::MAGNITUDE_SCALES`].
pub fn sample_pairs<const D: usize>(seed: u64, count: usize) -> Vec<(Tensor<D>, Tensor<D>)> {
    let mut r = rng::seeded(seed);
    let draw = |r: &mut rand_chacha::ChaCha8Rng| {
        let scale = rng::magnitude(r);
        let mut t = Tensor::<D>::zero();
        for row in t.entries.iter_mut() {
            for v in row.iter_mut() {
                *v = scale * rng::uniform(r, -1.0, 1.0);
            }
        }
        t
    };
    (0..count)
        .map(|_| {
            let p = draw(&mut r);
            let q = draw(&mut r);
            (p, q)
        })
        .collect()
}

/// Measures the empirical structure constants of `stress_fn` against the
/// declared `params` on the given `(P, Q)` samples.
///
/// Never fails: samples where the ratios are undefined (`Q^sym = 0`, or
/// `P^sym = 0` with `δ = 0`) are counted as skipped, and out-of-range ratios
/// are collected as violations.
pub fn check_structure<const D: usize, F>(
    stress_fn: F,
    params: &StructureParams,
    samples: &[(Tensor<D>, Tensor<D>)],
    config: CheckConfig,
) -> StructureReport
where
    F: Fn(&Tensor<D>) -> SymTensor<D>,
{
    let mut min_c0 = f64::INFINITY;
    let mut max_c1 = 0.0f64;
    let mut skipped = 0;
    let mut violations = Vec::new();
    let (p, delta) = (params.p(), params.delta());

    for (index, (pt, qt)) in samples.iter().enumerate() {
        let a = pt.sym();
        let b = qt.sym();
        let a_norm = a.norm();
        let b_norm = b.norm();
        if b_norm == 0.0 || delta + a_norm == 0.0 {
            skipped += 1;
            continue;
        }
        let weight = math::powf(delta + a_norm, p - 2.0);
        let scale = delta + a_norm;

        let h = config.relative_step * scale / qt.norm();
        let forward = stress_fn(&(*pt + qt.scale(h)));
        let backward = stress_fn(&(*pt - qt.scale(h)));
        let directional = forward.combine(0.5 / h, &backward, -0.5 / h);
        let coercivity = directional.as_tensor().dot(qt) / (weight * b_norm * b_norm);

        let h = config.relative_step * scale;
        let mut largest = 0.0f64;
        for k in 0..D {
            for l in 0..D {
                let e = Tensor::<D>::unit(k, l).scale(h);
                let col = stress_fn(&(*pt + e)).combine(0.5 / h, &stress_fn(&(*pt - e)), -0.5 / h);
                largest = largest.max(col.as_tensor().max_abs());
            }
        }
        let growth = largest / weight;

        min_c0 = min_c0.min(coercivity);
        max_c1 = max_c1.max(growth);
        let bad = !(coercivity.is_finite() && growth.is_finite())
            || coercivity < config.coercivity_floor
            || growth > config.growth_ceiling;
        if bad {
            violations.push(Violation {
                index,
                strain_norm: a_norm,
                coercivity_ratio: coercivity,
                growth_ratio: growth,
            });
        }
        if coercivity.is_nan() {
            min_c0 = f64::NAN;
        }
        if growth.is_nan() {
            max_c1 = f64::NAN;
        }
    }

    StructureReport {
        min_coercivity_ratio: min_c0,
        max_growth_ratio: max_c1,
        sample_count: samples.len() - skipped,
        skipped,
        violations,
        config,
        seed: None,
    }
}

/// [`check_structure`] on [`sample_pairs`] drawn from `seed`; the seed is
/// recorded in the report.
pub fn check_structure_seeded<const D: usize, F>(
    stress_fn: F,
    params: &StructureParams,
    seed: u64,
    count: usize,
    config: CheckConfig,
) -> StructureReport
where
    F: Fn(&Tensor<D>) -> SymTensor<D>,
{
    let samples = sample_pairs::<D>(seed, count);
    let mut report = check_structure(stress_fn, params, &samples, config);
    report.seed = Some(seed);
    report
}

/// The planted counterexample `S(P) = |P^sym|² P^sym`, cubic growth.
pub fn cubic_stress<const D: usize>(p: &Tensor<D>) -> SymTensor<D> {
    let a = p.sym();
    let n = a.norm();
    a.scale(n * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_stress_passes() {
        for &(p, delta) in &[(1.5, 0.1), (1.2, 0.0), (2.0, 1.0), (1.2, 1e-3)] {
            let params = StructureParams::new(p, delta).unwrap();
            let report =
                check_structure_seeded::<2, _>(|t| params.stress(t), &params, 42, 1000, CheckConfig::default());
            assert!(report.passed(), "p={p} delta={delta}: {report:?}");
            assert!(report.min_coercivity_ratio > 0.0);
            assert!(report.max_growth_ratio.is_finite());
            assert_eq!(report.seed, Some(42));
        }
    }

    #[test]
    fn linear_stress_has_unit_constants() {
        let params = StructureParams::new(2.0, 0.0).unwrap();
        let samples = sample_pairs::<2>(1, 500);
        for (i, pair) in samples.iter().enumerate() {
            let r = check_structure(
                |t: &Tensor<2>| t.sym(),
                &params,
                core::slice::from_ref(pair),
                CheckConfig::default(),
            );
            assert!((r.min_coercivity_ratio - 1.0).abs() < 1e-8, "sample {i}: {r:?}");
            assert!((r.max_growth_ratio - 1.0).abs() < 1e-8, "sample {i}: {r:?}");
        }
    }

    #[test]
    fn cubic_stress_is_flagged() {
        let params = StructureParams::new(1.5, 0.1).unwrap();
        let report = check_structure_seeded::<2, _>(cubic_stress, &params, 7, 1000, CheckConfig::default());
        assert!(!report.passed());
        assert!(report.max_growth_ratio > CheckConfig::default().growth_ceiling);
    }

    #[test]
    fn zero_direction_is_skipped() {
        let params = StructureParams::new(1.5, 0.0).unwrap();
        let skew = Tensor::new([[0.0, 1.0], [-1.0, 0.0]]);
        let samples = [(Tensor::identity(), skew), (Tensor::zero(), Tensor::identity())];
        let report = check_structure(
            |t: &Tensor<2>| params.stress(t),
            &params,
            &samples,
            CheckConfig::default(),
        );
        assert_eq!(report.skipped, 2);
        assert_eq!(report.sample_count, 0);
    }

    #[test]
    fn three_dimensional_tensors() {
        let params = StructureParams::new(1.5, 0.01).unwrap();
        let report = check_structure_seeded::<3, _>(|t| params.stress(t), &params, 3, 300, CheckConfig::default());
        assert!(report.passed());
    }
}
