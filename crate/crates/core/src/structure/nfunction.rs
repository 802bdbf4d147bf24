//! The N-function `φ` generated by `φ'(t) = (δ+t)^{p−2} t`, its shifts
//! `φ_a` and the closed-form equivalent of the complementary function.
//!
//! The shift has an exact closed form for this family:
//! `φ'_a(t) = φ'(a+t)·t/(a+t) = (δ+a+t)^{p−2} t`, so `φ_a` is `φ` with `δ`
//! replaced by `δ+a`.

use super::{StructureError, StructureParams};
use crate::math;

/// Below this ratio `t/δ` the antiderivative is summed as a binomial series;
/// the closed form loses about `ε_mach·(δ/t)²` to cancellation.
const SERIES_THRESHOLD: f64 = 0.2;

/// `(φ(t), φ'(t), φ''(t))`; `second` is `None` at the singular point
/// `δ = 0, p < 2, t = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiValues {
    pub value: f64,
    pub first: f64,
    pub second: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftedPhi {
    pub value: f64,
    pub first: f64,
}

fn check_nonnegative(what: &'static str, v: f64) -> Result<(), StructureError> {
    if v.is_nan() || v < 0.0 {
        Err(StructureError::Domain { what, value: v })
    } else {
        Ok(())
    }
}

/// `φ(t)` for exponent `p` and degeneracy `delta`, `t ≥ 0`.
pub(crate) fn phi_value(p: f64, delta: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    if delta == 0.0 {
        return math::powf(t, p) / p;
    }
    let s = t / delta;
    let scale = math::powf(delta, p);
    if s < SERIES_THRESHOLD {
        // g(s) = Σ_k C(p−2, k) s^{k+2} / (k+2)
        let alpha = p - 2.0;
        let mut coef = 1.0;
        let mut pow = s * s;
        let mut sum = 0.0;
        for k in 0..200 {
            let term = coef * pow / (k as f64 + 2.0);
            sum += term;
            if math::abs(term) <= 1e-18 * math::abs(sum) {
                break;
            }
            coef *= (alpha - k as f64) / (k as f64 + 1.0);
            pow *= s;
            if coef == 0.0 {
                break;
            }
        }
        scale * sum
    } else {
        let g = (math::powf(1.0 + s, p - 1.0) * ((p - 1.0) * s - 1.0) + 1.0) / (p * (p - 1.0));
        scale * g
    }
}

/// `φ'(t) = (δ+t)^{p−2} t`.
pub(crate) fn phi_first(p: f64, delta: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        math::powf(delta + t, p - 2.0) * t
    }
}

/// `φ'(t)/t = (δ+t)^{p−2}`, the secant modulus used by `S` and `DS`.
pub(crate) fn phi_secant(p: f64, delta: f64, t: f64) -> f64 {
    math::powf(delta + t, p - 2.0)
}

/// `φ''(t) = (δ+t)^{p−3} (δ + (p−1)t)`; caller guarantees `δ + t > 0`
/// (or `p = 2`).
pub(crate) fn phi_second_unchecked(p: f64, delta: f64, t: f64) -> f64 {
    if p == 2.0 {
        return 1.0;
    }
    math::powf(delta + t, p - 3.0) * (delta + (p - 1.0) * t)
}

impl StructureParams {
    /// `φ(t)`, `t ≥ 0` (panics in debug builds on negative input).
    pub fn phi(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        phi_value(self.p(), self.delta(), t)
    }

    /// `φ'(t)`.
    pub fn phi_prime(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0);
        phi_first(self.p(), self.delta(), t)
    }

    /// `φ''(t)`; fails at `t = 0` when `δ = 0, p < 2`.
    pub fn phi_second(&self, t: f64) -> Result<f64, StructureError> {
        check_nonnegative("t", t)?;
        if t == 0.0 && self.is_degenerate() {
            return Err(StructureError::Singular);
        }
        Ok(phi_second_unchecked(self.p(), self.delta(), t))
    }

    /// `φ`, `φ'` and, where it exists, `φ''` at `t ≥ 0`.
    pub fn phi_family(&self, t: f64) -> Result<PhiValues, StructureError> {
        check_nonnegative("t", t)?;
        Ok(PhiValues {
            value: self.phi(t),
            first: self.phi_prime(t),
            second: self.phi_second(t).ok(),
        })
    }

    /// `φ_a(t)` and `φ'_a(t) = φ'(a+t)·t/(a+t)`.
    pub fn shifted_phi(&self, a: f64, t: f64) -> Result<ShiftedPhi, StructureError> {
        check_nonnegative("a", a)?;
        check_nonnegative("t", t)?;
        Ok(ShiftedPhi {
            value: phi_value(self.p(), self.delta() + a, t),
            first: phi_first(self.p(), self.delta() + a, t),
        })
    }

    /// Closed-form equivalent `((δ+a)^{p−1} + t)^{p'−2} t²` of the
    /// complementary function `(φ_a)*(t)`.
    pub fn shifted_conjugate(&self, a: f64, t: f64) -> Result<f64, StructureError> {
        check_nonnegative("a", a)?;
        check_nonnegative("t", t)?;
        Ok(shifted_conjugate_value(self.p(), self.delta() + a, t))
    }

    /// `sup_{s≥0} (t·s − φ_a(s))`, evaluated at the maximizer `s*` that
    /// solves `φ'_a(s*) = t`.
    pub fn legendre_conjugate(&self, a: f64, t: f64) -> Result<f64, StructureError> {
        check_nonnegative("a", a)?;
        check_nonnegative("t", t)?;
        let shift = self.delta() + a;
        let s = invert_phi_first(self.p(), shift, t);
        Ok(t * s - phi_value(self.p(), shift, s))
    }
}

pub(crate) fn shifted_conjugate_value(p: f64, shift: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let q = p / (p - 1.0);
    math::powf(math::powf(shift, p - 1.0) + t, q - 2.0) * t * t
}

/// Solves `(shift + s)^{p−2} s = target` for `s ≥ 0`.
pub(crate) fn invert_phi_first(p: f64, shift: f64, target: f64) -> f64 {
    if target == 0.0 {
        return 0.0;
    }
    let f = |s: f64| phi_first(p, shift, s) - target;
    let mut lo = 0.0;
    let mut hi = if shift > 0.0 { shift } else { 1.0 };
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Newton from the upper end, safeguarded by the bracket.
    let mut s = hi;
    for _ in 0..200 {
        let r = f(s);
        if r == 0.0 {
            return s;
        }
        if r > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let d = phi_second_unchecked(p, shift, s);
        let mut next = s - r / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if math::abs(next - s) <= 1e-15 * s {
            return next;
        }
        s = next;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, delta: f64) -> StructureParams {
        StructureParams::new(p, delta).unwrap()
    }

    /// Composite Gauss–Legendre (5-point) on `[0, t]` with geometric grading
    /// toward zero; independent of the closed form.
    fn quad_phi(p: f64, delta: f64, t: f64) -> f64 {
        let nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let mut breaks = alloc::vec![t];
        let mut x = t;
        for _ in 0..60 {
            x *= 0.5;
            breaks.push(x);
        }
        breaks.push(0.0);
        breaks.reverse();
        let mut sum = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for sub in 0..16 {
                let lo = a + (b - a) * sub as f64 / 16.0;
                let hi = a + (b - a) * (sub + 1) as f64 / 16.0;
                let mid = 0.5 * (lo + hi);
                let half = 0.5 * (hi - lo);
                for (n, wt) in nodes.iter().zip(weights.iter()) {
                    let s = mid + half * n;
                    sum += wt * half * math::powf(delta + s, p - 2.0) * s;
                }
            }
        }
        sum
    }

    #[test]
    fn quadratic_case() {
        let v = params(2.0, 0.0).phi_family(1.0).unwrap();
        assert_eq!(v.value, 0.5);
        assert_eq!(v.first, 1.0);
        assert_eq!(v.second, Some(1.0));
    }

    #[test]
    fn p_three_halves_degenerate() {
        let v = params(1.5, 0.0).phi_family(1.0).unwrap();
        assert!((v.value - 2.0 / 3.0).abs() < 1e-15);
        assert!((quad_phi(1.5, 0.0, 1.0) - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(v.first, 1.0);
        assert!((v.second.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nondegenerate_at_zero() {
        let v = params(1.5, 1.0).phi_family(0.0).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(v.first, 0.0);
        assert_eq!(v.second, Some(1.0));
    }

    #[test]
    fn singular_second_derivative() {
        let s = params(1.5, 0.0);
        assert_eq!(s.phi_second(0.0), Err(StructureError::Singular));
        assert_eq!(s.phi_family(0.0).unwrap().second, None);
        assert!(matches!(s.phi_family(-1.0), Err(StructureError::Domain { .. })));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(p, delta) in &[(1.2, 0.0), (1.2, 1e-3), (1.5, 0.1), (1.5, 1.0), (2.0, 0.3), (1.8, 5.0)] {
            for &t in &[1e-6, 1e-3, 0.05, 0.19, 0.21, 1.0, 7.5, 300.0] {
                let closed = phi_value(p, delta, t);
                let quad = quad_phi(p, delta, t);
                assert!(
                    (closed - quad).abs() <= 1e-10 * quad.abs(),
                    "p={p} delta={delta} t={t}: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_threshold() {
        for &p in &[1.1, 1.5, 1.9] {
            let d = 2.0;
            let t = d * SERIES_THRESHOLD;
            let below = phi_value(p, d, t * (1.0 - 1e-12));
            let above = phi_value(p, d, t * (1.0 + 1e-12));
            assert!((below - above).abs() <= 1e-11 * above, "p={p} {below} {above}");
        }
    }

    #[test]
    fn shift_zero_is_unshifted() {
        for &(p, delta, t) in &[(1.5, 0.0, 2.0), (1.2, 0.3, 0.01), (2.0, 1.0, 5.0)] {
            let s = params(p, delta);
            let sh = s.shifted_phi(0.0, t).unwrap();
            let un = s.phi_family(t).unwrap();
            assert_eq!(sh.value, un.value);
            assert_eq!(sh.first, un.first);
        }
    }

    #[test]
    fn shifted_derivative_examples() {
        let s = params(2.0, 0.0);
        assert_eq!(s.shifted_phi(5.0, 1.0).unwrap().first, 1.0);
        let s = params(1.5, 0.0);
        let v = s.shifted_phi(1.0, 1.0).unwrap();
        assert!((v.first - libm::sqrt(2.0) / 2.0).abs() < 1e-15);
        // Direct formula φ'(a+t)·t/(a+t), then quadrature of the primitive.
        let direct = phi_first(1.5, 0.0, 2.0) * 1.0 / 2.0;
        assert!((v.first - direct).abs() < 1e-15);
        assert!((v.value - quad_phi(1.5, 1.0, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn conjugate_examples() {
        let s = params(2.0, 0.0);
        assert_eq!(s.shifted_conjugate(0.0, 1.0).unwrap(), 1.0);
        assert!((s.legendre_conjugate(0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        for &(p, d, a) in &[(1.5, 0.1, 0.5), (1.2, 0.0, 0.0), (2.0, 3.0, 1.0)] {
            assert_eq!(params(p, d).shifted_conjugate(a, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn inversion_roundtrip() {
        for &(p, shift) in &[(1.2, 0.0), (1.5, 1e-3), (1.9, 10.0)] {
            for &s in &[1e-8, 1e-2, 1.0, 1e3] {
                let t = phi_first(p, shift, s);
                let back = invert_phi_first(p, shift, t);
                assert!((back - s).abs() <= 1e-10 * s, "{p} {shift} {s} {back}");
            }
        }
    }
}
