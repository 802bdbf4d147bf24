//! The canonical stress `S(P) = (δ+|P^sym|)^{p−2} P^sym + ε P^sym`, its
//! directional derivative and the map `F(P) = (δ+|P^sym|)^{(p−2)/2} P^sym`.

use super::nfunction::{phi_secant, phi_second_unchecked};
use super::{StructureError, StructureParams, SymTensor, Tensor};
use crate::math;

/// Strain magnitudes below this value are replaced by it wherever a formula
/// divides by `|P^sym|`.
pub const ZERO_STRAIN_CLAMP: f64 = 1e-12;

impl StructureParams {
    /// `S^ε(P)`; continuous with `S(0) = 0`.
    pub fn stress<const D: usize>(&self, p: &Tensor<D>) -> SymTensor<D> {
        self.stress_sym(&p.sym())
    }

    pub fn stress_sym<const D: usize>(&self, a: &SymTensor<D>) -> SymTensor<D> {
        let t = a.norm();
        if t == 0.0 {
            return SymTensor::zero();
        }
        let t = clamp(t);
        a.scale(phi_secant(self.p(), self.delta(), t) + self.epsilon())
    }

    /// `DS(P)[Q]`; fails at `P^sym = 0` in the degenerate case `δ = 0, p < 2`.
    pub fn stress_derivative<const D: usize>(
        &self,
        p: &Tensor<D>,
        q: &Tensor<D>,
    ) -> Result<SymTensor<D>, StructureError> {
        let a = p.sym();
        if self.is_degenerate() && a.norm() < ZERO_STRAIN_CLAMP {
            return Err(StructureError::Singular);
        }
        Ok(self.stress_derivative_sym(&a, &q.sym()))
    }

    /// `DS(A)[B]` for symmetric arguments with the zero-strain clamp applied;
    /// never fails. This is the form the assembly loops use.
    pub fn stress_derivative_sym<const D: usize>(&self, a: &SymTensor<D>, b: &SymTensor<D>) -> SymTensor<D> {
        let raw = a.norm();
        let t = clamp(raw);
        let (p, delta) = (self.p(), self.delta());
        let secant = phi_secant(p, delta, t);
        let mut out = b.scale(secant + self.epsilon());
        // below the clamp the stress is linear in A, so there is no radial term
        if raw >= ZERO_STRAIN_CLAMP {
            let unit = a.scale(1.0 / raw);
            let radial = unit.dot(b);
            let second = phi_second_unchecked(p, delta, t);
            out = out.combine(1.0, &unit, (second - secant) * radial);
        }
        out
    }

    /// Energy density whose gradient in `A` is the clamped stress at
    /// `|A| = t`: `φ(t)` above the clamp, its quadratic continuation below.
    /// Excludes the `ε` part.
    pub fn clamped_phi(&self, t: f64) -> f64 {
        if t >= ZERO_STRAIN_CLAMP {
            return self.phi(t);
        }
        let c = ZERO_STRAIN_CLAMP;
        self.phi(c) + 0.5 * phi_secant(self.p(), self.delta(), c) * (t * t - c * c)
    }

    /// `F(P) = (δ+|P^sym|)^{(p−2)/2} P^sym`.
    pub fn f_map<const D: usize>(&self, p: &Tensor<D>) -> SymTensor<D> {
        self.f_map_sym(&p.sym())
    }

    pub fn f_map_sym<const D: usize>(&self, a: &SymTensor<D>) -> SymTensor<D> {
        let t = a.norm();
        if t == 0.0 {
            return SymTensor::zero();
        }
        let t = clamp(t);
        a.scale(math::powf(self.delta() + t, 0.5 * (self.p() - 2.0)))
    }

    /// `DF(A)[B]`, with the same clamp as [`Self::stress_derivative_sym`].
    pub fn f_map_derivative_sym<const D: usize>(&self, a: &SymTensor<D>, b: &SymTensor<D>) -> SymTensor<D> {
        let raw = a.norm();
        let t = clamp(raw);
        let (p, delta) = (self.p(), self.delta());
        let secant = math::powf(delta + t, 0.5 * (p - 2.0));
        let mut out = b.scale(secant);
        if raw > 0.0 {
            let unit = a.scale(1.0 / raw);
            let radial = unit.dot(b);
            let slope = math::powf(delta + t, 0.5 * (p - 4.0)) * (delta + 0.5 * p * t);
            out = out.combine(1.0, &unit, (slope - secant) * radial);
        }
        out
    }
}

#[inline]
fn clamp(t: f64) -> f64 {
    if t < ZERO_STRAIN_CLAMP {
        ZERO_STRAIN_CLAMP
    } else {
        t
    }
}
