//! Vector fields with closed-form first and second derivatives, used as
//! interpolation data.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::structure::Tensor;
use crate::{math, rng};

pub trait VectorField {
    fn value(&self, x: [f64; 2]) -> [f64; 2];
    /// `∇v`, `[i][j] = ∂_j v_i`.
    fn gradient(&self, x: [f64; 2]) -> Tensor<2>;
    /// `[∂_1 ∇v, ∂_2 ∇v]`.
    fn second(&self, x: [f64; 2]) -> [Tensor<2>; 2];
}

/// `v(x) = A·(1, x₁, x₂) + Σ_t (a_t, b_t) sin(k_t π x₁) sin(l_t π x₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SineSeries {
    pub affine: [[f64; 3]; 2],
    /// `(k, l, a, b)` per term.
    pub terms: Vec<(f64, f64, f64, f64)>,
}

impl SineSeries {
    /// `(sin πx₁ sin πx₂, ½ sin 2πx₁ sin πx₂)`, zero on the boundary.
    pub fn bubble() -> Self {
        Self {
            affine: [[0.0; 3]; 2],
            terms: alloc::vec![(1.0, 1.0, 1.0, 0.0), (2.0, 1.0, 0.0, 0.5)],
        }
    }

    /// A second zero-boundary field, distinct from [`Self::bubble`].
    pub fn ripple() -> Self {
        Self {
            affine: [[0.0; 3]; 2],
            terms: alloc::vec![(1.0, 2.0, 0.7, 0.0), (1.0, 1.0, 0.0, -1.2), (3.0, 1.0, 0.2, 0.1)],
        }
    }

    /// Random coefficients in `[−1, 1]`, frequencies up to `max_freq`; with
    /// `with_affine` the field does not vanish on the boundary.
    pub fn seeded(seed: u64, terms: usize, max_freq: usize, with_affine: bool) -> Self {
        let mut r = rng::seeded(seed);
        let mut affine = [[0.0; 3]; 2];
        if with_affine {
            for row in affine.iter_mut() {
                for a in row.iter_mut() {
                    *a = rng::uniform(&mut r, -1.0, 1.0);
                }
            }
        }
        let top = max_freq as f64 + 1.0;
        let terms = (0..terms)
            .map(|_| {
                let k = math::floor(rng::uniform(&mut r, 1.0, top));
                let l = math::floor(rng::uniform(&mut r, 1.0, top));
                (k, l, rng::uniform(&mut r, -1.0, 1.0), rng::uniform(&mut r, -1.0, 1.0))
            })
            .collect();
        Self { affine, terms }
    }

    pub fn scaled(mut self, s: f64) -> Self {
        for row in self.affine.iter_mut() {
            for a in row.iter_mut() {
                *a *= s;
            }
        }
        for t in self.terms.iter_mut() {
            t.2 *= s;
            t.3 *= s;
        }
        self
    }
}

impl VectorField for SineSeries {
    fn value(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let a = self.affine[i];
            *o = a[0] + a[1] * x + a[2] * y;
        }
        for &(k, l, a, b) in &self.terms {
            let s = math::sin(k * PI * x) * math::sin(l * PI * y);
            out[0] += a * s;
            out[1] += b * s;
        }
        out
    }

    fn gradient(&self, [x, y]: [f64; 2]) -> Tensor<2> {
        let mut g = Tensor::new([
            [self.affine[0][1], self.affine[0][2]],
            [self.affine[1][1], self.affine[1][2]],
        ]);
        for &(k, l, a, b) in &self.terms {
            let (kx, ly) = (k * PI, l * PI);
            let dx = kx * math::cos(kx * x) * math::sin(ly * y);
            let dy = ly * math::sin(kx * x) * math::cos(ly * y);
            g.entries[0][0] += a * dx;
            g.entries[0][1] += a * dy;
            g.entries[1][0] += b * dx;
            g.entries[1][1] += b * dy;
        }
        g
    }

    fn second(&self, [x, y]: [f64; 2]) -> [Tensor<2>; 2] {
        let mut out = [Tensor::zero(); 2];
        for &(k, l, a, b) in &self.terms {
            let (kx, ly) = (k * PI, l * PI);
            let (sx, cx) = (math::sin(kx * x), math::cos(kx * x));
            let (sy, cy) = (math::sin(ly * y), math::cos(ly * y));
            let dxx = -kx * kx * sx * sy;
            let dxy = kx * ly * cx * cy;
            let dyy = -ly * ly * sx * sy;
            for (i, c) in [a, b].into_iter().enumerate() {
                out[0].entries[i][0] += c * dxx;
                out[0].entries[i][1] += c * dxy;
                out[1].entries[i][0] += c * dxy;
                out[1].entries[i][1] += c * dyy;
            }
        }
        out
    }
}

/// `v(x) = |x − x₀|^α · e`: lies in `W^{ℓ,q}` in two dimensions exactly
/// when `α > ℓ − 2/q`, so it realises the worst case of interpolation
/// estimates when `α` sits just above that threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointSingularity {
    pub center: [f64; 2],
    pub alpha: f64,
    pub direction: [f64; 2],
}

impl PointSingularity {
    fn radial(&self, x: [f64; 2]) -> ([f64; 2], f64) {
        let d = [x[0] - self.center[0], x[1] - self.center[1]];
        (d, math::sqrt(d[0] * d[0] + d[1] * d[1]))
    }
}

impl VectorField for PointSingularity {
    fn value(&self, x: [f64; 2]) -> [f64; 2] {
        let (_, r) = self.radial(x);
        let s = math::powf(r, self.alpha);
        [s * self.direction[0], s * self.direction[1]]
    }

    fn gradient(&self, x: [f64; 2]) -> Tensor<2> {
        let (d, r) = self.radial(x);
        let c = self.alpha * math::powf(r, self.alpha - 2.0);
        let mut g = Tensor::zero();
        for i in 0..2 {
            for j in 0..2 {
                g.entries[i][j] = self.direction[i] * c * d[j];
            }
        }
        g
    }

    fn second(&self, x: [f64; 2]) -> [Tensor<2>; 2] {
        let (d, r) = self.radial(x);
        let c = self.alpha * math::powf(r, self.alpha - 2.0);
        let mut out = [Tensor::zero(); 2];
        for (j, t) in out.iter_mut().enumerate() {
            for k in 0..2 {
                let delta = if j == k { 1.0 } else { 0.0 };
                let h = c * (delta + (self.alpha - 2.0) * d[j] * d[k] / (r * r));
                for i in 0..2 {
                    t.entries[i][k] = self.direction[i] * h;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives<F: VectorField>(f: &F, points: &[[f64; 2]]) {
        let h = 1e-6;
        for &x in points {
            let g = f.gradient(x);
            let s = f.second(x);
            for j in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[j] += h;
                xm[j] -= h;
                let (vp, vm) = (f.value(xp), f.value(xm));
                let (gp, gm) = (f.gradient(xp), f.gradient(xm));
                for i in 0..2 {
                    let fd = (vp[i] - vm[i]) / (2.0 * h);
                    assert!((fd - g.entries[i][j]).abs() < 1e-6 * (1.0 + fd.abs()));
                    for k in 0..2 {
                        let fd2 = (gp.entries[i][k] - gm.entries[i][k]) / (2.0 * h);
                        assert!((fd2 - s[j].entries[i][k]).abs() < 1e-5 * (1.0 + fd2.abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let pts = [[0.2, 0.3], [0.71, 0.45], [0.9, 0.1]];
        check_derivatives(&SineSeries::bubble(), &pts);
        check_derivatives(&SineSeries::seeded(3, 4, 3, true), &pts);
        check_derivatives(
            &PointSingularity {
                center: [0.5, 0.5],
                alpha: 0.3,
                direction: [1.0, 0.5],
            },
            &pts,
        );
    }

    #[test]
    fn bubbles_vanish_on_boundary() {
        for f in [
            SineSeries::bubble(),
            SineSeries::ripple(),
            SineSeries::seeded(1, 5, 3, false),
        ] {
            for t in [0.0, 0.25, 0.6, 1.0] {
                for x in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                    let v = f.value(x);
                    assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
                }
            }
        }
    }
}
