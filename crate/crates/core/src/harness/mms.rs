//! Manufactured solutions with closed-form derivatives, and the forcing
//! `f = ∂_t u − div S(Du)` they induce.

use core::f64::consts::PI;

use super::HarnessError;
use crate::math;
use crate::structure::{StructureError, StructureParams, Tensor, ZERO_STRAIN_CLAMP};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum MmsKind {
    /// `u = sin t · (ψ, ψ)`, `ψ = sin πx₁ sin πx₂`.
    Trig,
    /// `u = e^{−t} · (16 x₁x₂(1−x₁)(1−x₂), 0)`.
    Poly,
    /// `u = cos 2t · (x₁, x₂)`, with matching Dirichlet data.
    Affine,
    /// `u = (1 + t) · (x₁, x₂)`: reproduced exactly by the scheme.
    Ramp,
}

impl MmsKind {
    pub const ALL: [MmsKind; 4] = [MmsKind::Trig, MmsKind::Poly, MmsKind::Affine, MmsKind::Ramp];

    pub fn name(&self) -> &'static str {
        match self {
            MmsKind::Trig => "trig",
            MmsKind::Poly => "poly",
            MmsKind::Affine => "affine",
            MmsKind::Ramp => "ramp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// An exact solution of the evolution system together with all derivatives
/// needed to build its forcing and measure errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedSolution {
    pub kind: MmsKind,
}

impl ManufacturedSolution {
    pub fn new(kind: MmsKind) -> Self {
        Self { kind }
    }

    /// `u(t, ·) = 0` on `∂Ω`.
    pub fn zero_boundary(&self) -> bool {
        matches!(self.kind, MmsKind::Trig | MmsKind::Poly)
    }

    pub fn value(&self, t: f64, [x, y]: [f64; 2]) -> [f64; 2] {
        match self.kind {
            MmsKind::Trig => {
                let s = math::sin(t) * psi(x, y);
                [s, s]
            }
            MmsKind::Poly => [math::exp(-t) * bubble(x, y), 0.0],
            MmsKind::Affine | MmsKind::Ramp => {
                let g = self.amplitude(t);
                [g * x, g * y]
            }
        }
    }

    pub fn time_derivative(&self, t: f64, [x, y]: [f64; 2]) -> [f64; 2] {
        match self.kind {
            MmsKind::Trig => {
                let s = math::cos(t) * psi(x, y);
                [s, s]
            }
            MmsKind::Poly => [-math::exp(-t) * bubble(x, y), 0.0],
            MmsKind::Affine | MmsKind::Ramp => {
                let g = self.amplitude_derivative(t);
                [g * x, g * y]
            }
        }
    }

    /// `∇u`, `[i][j] = ∂_j u_i`.
    pub fn gradient(&self, t: f64, [x, y]: [f64; 2]) -> Tensor<2> {
        match self.kind {
            MmsKind::Trig => {
                let s = math::sin(t);
                let gx = PI * math::cos(PI * x) * math::sin(PI * y);
                let gy = PI * math::sin(PI * x) * math::cos(PI * y);
                Tensor::new([[s * gx, s * gy], [s * gx, s * gy]])
            }
            MmsKind::Poly => {
                let e = math::exp(-t);
                let gx = 16.0 * (1.0 - 2.0 * x) * y * (1.0 - y);
                let gy = 16.0 * x * (1.0 - x) * (1.0 - 2.0 * y);
                Tensor::new([[e * gx, e * gy], [0.0, 0.0]])
            }
            MmsKind::Affine | MmsKind::Ramp => Tensor::identity().scale(self.amplitude(t)),
        }
    }

    /// `[∂_1 ∇u, ∂_2 ∇u]`.
    pub fn second(&self, t: f64, [x, y]: [f64; 2]) -> [Tensor<2>; 2] {
        match self.kind {
            MmsKind::Trig => {
                let s = math::sin(t);
                let pp = PI * PI;
                let xx = -pp * psi(x, y);
                let xy = pp * math::cos(PI * x) * math::cos(PI * y);
                let yy = xx;
                [
                    Tensor::new([[s * xx, s * xy], [s * xx, s * xy]]),
                    Tensor::new([[s * xy, s * yy], [s * xy, s * yy]]),
                ]
            }
            MmsKind::Poly => {
                let e = math::exp(-t);
                let xx = -32.0 * y * (1.0 - y);
                let xy = 16.0 * (1.0 - 2.0 * x) * (1.0 - 2.0 * y);
                let yy = -32.0 * x * (1.0 - x);
                [
                    Tensor::new([[e * xx, e * xy], [0.0, 0.0]]),
                    Tensor::new([[e * xy, e * yy], [0.0, 0.0]]),
                ]
            }
            MmsKind::Affine | MmsKind::Ramp => [Tensor::zero(); 2],
        }
    }

    fn amplitude(&self, t: f64) -> f64 {
        match self.kind {
            MmsKind::Ramp => 1.0 + t,
            _ => math::cos(2.0 * t),
        }
    }

    fn amplitude_derivative(&self, t: f64) -> f64 {
        match self.kind {
            MmsKind::Ramp => 1.0,
            _ => -2.0 * math::sin(2.0 * t),
        }
    }
}

fn psi(x: f64, y: f64) -> f64 {
    math::sin(PI * x) * math::sin(PI * y)
}

fn bubble(x: f64, y: f64) -> f64 {
    16.0 * x * y * (1.0 - x) * (1.0 - y)
}

/// `f(t, x) = ∂_t u − div S^ε(Du)` with
/// `(div S(Du))_i = Σ_j (DS(Du)[∂_j Du])_{ij}`.
pub fn forcing(
    params: &StructureParams,
    mms: &ManufacturedSolution,
    t: f64,
    x: [f64; 2],
) -> Result<[f64; 2], HarnessError> {
    let mut f = mms.time_derivative(t, x);
    let second = mms.second(t, x);
    if second.iter().all(|s| s.max_abs() == 0.0) {
        return Ok(f);
    }
    let du = mms.gradient(t, x).sym();
    if params.is_degenerate() && params.epsilon() == 0.0 && du.norm() < ZERO_STRAIN_CLAMP {
        return Err(HarnessError::Forcing(StructureError::Singular));
    }
    for (j, s) in second.iter().enumerate() {
        let ds = params.stress_derivative_sym(&du, &s.sym());
        for (i, fi) in f.iter_mut().enumerate() {
            *fi -= ds.get(i, j);
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn derivatives_match_differences() {
        let mut r = rng::seeded(12);
        for kind in MmsKind::ALL {
            let m = ManufacturedSolution::new(kind);
            for _ in 0..20 {
                let t = rng::uniform(&mut r, 0.0, 1.0);
                let x = [rng::uniform(&mut r, 0.0, 1.0), rng::uniform(&mut r, 0.0, 1.0)];
                let h = 1e-6;
                let dt = m.time_derivative(t, x);
                let (up, um) = (m.value(t + h, x), m.value(t - h, x));
                for i in 0..2 {
                    assert!(((up[i] - um[i]) / (2.0 * h) - dt[i]).abs() < 1e-6);
                }
                let g = m.gradient(t, x);
                let s = m.second(t, x);
                for j in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let (vp, vm) = (m.value(t, xp), m.value(t, xm));
                    let (gp, gm) = (m.gradient(t, xp), m.gradient(t, xm));
                    for i in 0..2 {
                        assert!(((vp[i] - vm[i]) / (2.0 * h) - g.entries[i][j]).abs() < 1e-6);
                        for k in 0..2 {
                            let fd = (gp.entries[i][k] - gm.entries[i][k]) / (2.0 * h);
                            assert!((fd - s[j].entries[i][k]).abs() < 1e-5);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_boundary_flags() {
        for kind in [MmsKind::Trig, MmsKind::Poly] {
            let m = ManufacturedSolution::new(kind);
            assert!(m.zero_boundary());
            for s in [0.0, 0.3, 1.0] {
                for x in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                    let v = m.value(0.7, x);
                    assert!(v[0].abs() < 1e-15 && v[1].abs() < 1e-15);
                }
            }
        }
        assert!(!ManufacturedSolution::new(MmsKind::Affine).zero_boundary());
    }

    #[test]
    fn affine_forcing_is_time_derivative() {
        let p = StructureParams::new(2.0, 0.0).unwrap();
        let m = ManufacturedSolution::new(MmsKind::Ramp);
        let f = forcing(&p, &m, 0.4, [0.3, 0.8]).unwrap();
        assert_eq!(f, [0.3, 0.8]);
    }

    #[test]
    fn quadratic_forcing_is_vector_laplacian() {
        // p = 2: div Du = ½Δu + ½∇div u
        let p = StructureParams::new(2.0, 0.0).unwrap();
        let m = ManufacturedSolution::new(MmsKind::Trig);
        let (t, [x, y]) = (0.6, [0.2, 0.7]);
        let f = forcing(&p, &m, t, [x, y]).unwrap();
        let s = libm::sin(t);
        let pp = PI * PI;
        let lap = -2.0 * pp * psi(x, y) * s;
        let xy = pp * libm::cos(PI * x) * libm::cos(PI * y) * s;
        let xx = -pp * psi(x, y) * s;
        // u = (s ψ, s ψ): ∂₁div u = ψ_xx + ψ_xy, ∂₂div u = ψ_xy + ψ_yy
        let expected_div = [0.5 * lap + 0.5 * (xx + xy), 0.5 * lap + 0.5 * (xy + xx)];
        let dt = m.time_derivative(t, [x, y]);
        for i in 0..2 {
            assert!((f[i] - (dt[i] - expected_div[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_solution_at_initial_time() {
        let p = StructureParams::new(1.5, 0.01).unwrap();
        let m = ManufacturedSolution::new(MmsKind::Trig);
        assert_eq!(m.value(0.0, [0.3, 0.4]), [0.0, 0.0]);
        let f = forcing(&p, &m, 0.0, [0.3, 0.4]).unwrap();
        let dt = m.time_derivative(0.0, [0.3, 0.4]);
        assert_eq!(f, dt);
    }
}
