//! Interpolation-error studies over families of meshes.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::fields::{PointSingularity, SineSeries};
use super::{
    error_gradient_lr, error_lr, interpolate_clement, BoundaryMode, FeError, FeSpace, VectorField, DEFAULT_QUAD_DEGREE,
};
use crate::harness::{fit_rates, RateFit};
use crate::math;
use crate::structure::{StructureParams, SymTensor};

/// Space dimension of the meshes.
pub const DIM: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateRow {
    pub level: usize,
    pub h: f64,
    pub value: f64,
    pub slope_to_prev: Option<f64>,
}

/// One measured quantity per refinement level, with its rate in `h`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RateTable {
    pub rows: Vec<RateRow>,
    pub fit: RateFit,
}

impl RateTable {
    pub fn from_values(h: &[f64], values: &[f64]) -> Result<Self, FeError> {
        let rates = fit_rates(h, values).map_err(|_| FeError::DegenerateStudy)?;
        let rows = h
            .iter()
            .zip(values)
            .zip(&rates.pairwise)
            .enumerate()
            .map(|(level, ((&h, &value), &slope_to_prev))| RateRow {
                level,
                h,
                value,
                slope_to_prev,
            })
            .collect();
        Ok(Self {
            rows,
            fit: rates.fitted,
        })
    }
}

/// `W^{ℓ,q} ↪↪ W^{m,r}` on a bounded Lipschitz domain in `d` dimensions:
/// `m < ℓ` and `ℓ − d/q > m − d/r`.
pub fn compact_embedding(ell: usize, m: usize, q: f64, r: f64, d: usize) -> bool {
    let d = d as f64;
    m < ell && (ell as f64 - d / q) > (m as f64 - d / r)
}

/// Largest `m` with `W^{ℓ,q} ↪↪ W^{m,r}`, if any.
pub fn max_embedding_order(ell: usize, q: f64, r: f64, d: usize) -> Option<usize> {
    (0..ell).rev().find(|&m| compact_embedding(ell, m, q, r, d))
}

/// `ℓ + d·min{0, 1/r − 1/q}`.
pub fn predicted_exponent(ell: usize, q: f64, r: f64, d: usize) -> f64 {
    ell as f64 + d as f64 * (1.0 / r - 1.0 / q).min(0.0)
}

/// Data for which the predicted exponent is attained: a smooth field when
/// `ℓ = 2` and `r ≤ q`, otherwise a point singularity at the centre of the
/// square just inside `W^{ℓ,q}`. Returns the field and whether the
/// prediction is sharp for it (for `ℓ = 1`, `r < q` the measured rate may
/// exceed the bound).
pub fn study_field(ell: usize, q: f64, r: f64) -> (Box<dyn VectorField + Send + Sync>, bool) {
    if ell == 2 && r <= q {
        return (Box::new(SineSeries::bubble()), true);
    }
    let alpha = ell as f64 - DIM as f64 / q + 0.05;
    let field = PointSingularity {
        center: [0.5, 0.5],
        alpha,
        direction: [1.0, 0.5],
    };
    (Box::new(field), r >= q)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InterpolationStudy {
    pub ell: usize,
    pub q: f64,
    pub r: f64,
    /// Highest derivative order `m` in the measured sum.
    pub order: usize,
    pub predicted: f64,
    pub table: RateTable,
}

/// Measures `Σ_{j=0}^{m} h^j ‖∇^j(g − P_h g)‖_r` (broken gradients) for the
/// Clément-type `P_h` on every space of the family.
pub fn interpolation_study<G: VectorField + ?Sized>(
    ell: usize,
    q: f64,
    r: f64,
    order: usize,
    spaces: &[FeSpace],
    g: &G,
) -> Result<InterpolationStudy, FeError> {
    if !(1..=2).contains(&ell) {
        return Err(FeError::InvalidEmbedding { ell, m: order, q, r });
    }
    if !(q >= 1.0 && r >= 1.0 && q.is_finite() && r.is_finite()) || !compact_embedding(ell, order, q, r, DIM) {
        return Err(FeError::InvalidEmbedding { ell, m: order, q, r });
    }
    let mut h = Vec::with_capacity(spaces.len());
    let mut values = Vec::with_capacity(spaces.len());
    for space in spaces {
        let hh = space.mesh().h();
        let ph = interpolate_clement(space, |x| g.value(x), BoundaryMode::Keep);
        let mut sum = error_lr(space, &ph, |x| g.value(x), DEFAULT_QUAD_DEGREE, r);
        if order >= 1 {
            sum += hh * error_gradient_lr(space, &ph, |x| g.gradient(x), DEFAULT_QUAD_DEGREE, r);
        }
        h.push(hh);
        values.push(sum);
    }
    Ok(InterpolationStudy {
        ell,
        q,
        r,
        order,
        predicted: predicted_exponent(ell, q, r, DIM),
        table: RateTable::from_values(&h, &values)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FInterpolationReport {
    /// `‖F(Dv) − F(D P_h v)‖₂` per level.
    pub table: RateTable,
    /// Per level, the largest ratio over the pairs `(v, w)` of
    /// `∫ φ_{|Dv|}(|D P_h v − D P_h w|)` to
    /// `h² ‖∇F(Dv)‖₂² + ‖F(Dv) − F(Dw)‖₂²`.
    pub pair_constants: Vec<f64>,
}

/// Approximation of `F(Dv)` by `F(D P_h v)` with `P_h` the Clément-type
/// operator into `V_h`, and the shifted-energy comparison for pairs
/// `(v, w)`. `v` and every `w` must vanish on the boundary.
pub fn f_interpolation_check<V, W>(
    params: &StructureParams,
    spaces: &[FeSpace],
    v: &V,
    partners: &[&W],
) -> Result<FInterpolationReport, FeError>
where
    V: VectorField + ?Sized,
    W: VectorField + ?Sized,
{
    let deg = DEFAULT_QUAD_DEGREE;
    let mut h = Vec::with_capacity(spaces.len());
    let mut values = Vec::with_capacity(spaces.len());
    let mut pair_constants = Vec::with_capacity(spaces.len());
    for space in spaces {
        let hh = space.mesh().h();
        let pv = interpolate_clement(space, |x| v.value(x), BoundaryMode::Zero);
        let dpv: Vec<SymTensor<2>> = (0..space.mesh().num_cells())
            .map(|k| pv.sym_gradient(space, k))
            .collect();
        let err_sq = space.integrate(deg, |k, x, _| {
            let d = params.f_map_sym(&dpv[k]) - params.f_map(&v.gradient(x));
            d.dot(&d)
        });
        let grad_f_sq = space.integrate(deg, |_, x, _| {
            let dv = v.gradient(x).sym();
            v.second(x)
                .iter()
                .map(|s| {
                    let t = params.f_map_derivative_sym(&dv, &s.sym());
                    t.dot(&t)
                })
                .sum()
        });
        let mut worst = 0.0f64;
        for w in partners {
            let pw = interpolate_clement(space, |x| w.value(x), BoundaryMode::Zero);
            let lhs = space.integrate(deg, |k, x, _| {
                let a = v.gradient(x).sym().norm();
                let t = (dpv[k] - pw.sym_gradient(space, k)).norm();
                params.shifted_phi(a, t).expect("non-negative arguments").value
            });
            let fdiff = space.integrate(deg, |_, x, _| {
                let d = params.f_map(&v.gradient(x)) - params.f_map(&w.gradient(x));
                d.dot(&d)
            });
            let rhs = hh * hh * grad_f_sq + fdiff;
            if rhs > 0.0 {
                worst = worst.max(lhs / rhs);
            }
        }
        h.push(hh);
        values.push(math::sqrt(err_sq));
        pair_constants.push(worst);
    }
    Ok(FInterpolationReport {
        table: RateTable::from_values(&h, &values)?,
        pair_constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_rules() {
        assert!(compact_embedding(2, 1, 2.0, 2.0, 2));
        assert!(!compact_embedding(2, 2, 2.0, 2.0, 2));
        assert!(compact_embedding(2, 0, 1.0, 2.0, 2));
        assert!(!compact_embedding(2, 1, 1.0, 2.0, 2));
        assert!(!compact_embedding(1, 0, 1.0, 2.0, 2));
        assert_eq!(max_embedding_order(2, 2.0, 1.0, 2), Some(1));
        assert_eq!(max_embedding_order(2, 1.0, 2.0, 2), Some(0));
        assert_eq!(max_embedding_order(1, 1.0, 2.0, 2), None);
        assert_eq!(predicted_exponent(2, 1.0, 2.0, 2), 1.0);
        assert_eq!(predicted_exponent(2, 2.0, 1.0, 2), 2.0);
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        let spaces = [FeSpace::unit_square(2), FeSpace::unit_square(4)];
        let g = SineSeries::bubble();
        assert!(matches!(
            interpolation_study(1, 1.0, 2.0, 0, &spaces, &g),
            Err(FeError::InvalidEmbedding { .. })
        ));
        assert!(interpolation_study(3, 2.0, 2.0, 0, &spaces, &g).is_err());
    }
}
