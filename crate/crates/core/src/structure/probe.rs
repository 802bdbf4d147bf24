//! Sampling probes for the equivalences and inequalities that relate `S`,
//! `F` and the shifted N-functions. The constants in those statements are
//! existential; the probes measure them.

use alloc::vec::Vec;

use super::nfunction::{phi_first, phi_value, shifted_conjugate_value};
use super::{sample_pairs, StructureParams, SymTensor, Tensor};
use crate::{math, rng};

/// Running `[min, max]` of a positive ratio.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bracket {
    pub min: f64,
    pub max: f64,
}

impl Default for Bracket {
    fn default() -> Self {
        Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Bracket {
    pub fn push(&mut self, v: f64) {
        if v.is_nan() {
            self.min = f64::NAN;
            self.max = f64::NAN;
            return;
        }
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    /// `max / min`.
    pub fn width(&self) -> f64 {
        self.max / self.min
    }

    pub fn is_positive_finite(&self) -> bool {
        self.min > 0.0 && self.max.is_finite() && self.min <= self.max
    }
}

/// Ratio brackets of the structure equivalences over a sample set.
///
/// With `N = (S(P)−S(Q))·(P−Q)`, `A = P^sym`, `B = Q^sym`:
/// `r1 = N/|F(P)−F(Q)|²`, `r2 = N/φ_{|A|}(|A−B|)`,
/// `r3 = |S(P)−S(Q)|/φ'_{|A|}(|A−B|)`, `r4 = N/(φ''(|A|+|B|)|A−B|²)`;
/// `energy = S(Q)·Q/|F(Q)|²` and `f_phi = |F(Q)|²/φ(|B|)`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EquivalenceReport {
    pub r1: Bracket,
    pub r2: Bracket,
    pub r3: Bracket,
    pub r4: Bracket,
    pub energy: Bracket,
    pub f_phi: Bracket,
    pub evaluated: usize,
    pub skipped: usize,
}

impl EquivalenceReport {
    pub fn all_positive_finite(&self) -> bool {
        [self.r1, self.r2, self.r3, self.r4, self.energy, self.f_phi]
            .iter()
            .all(Bracket::is_positive_finite)
    }
}

pub fn equivalence_probe<const D: usize>(
    params: &StructureParams,
    samples: &[(Tensor<D>, Tensor<D>)],
) -> EquivalenceReport {
    let mut rep = EquivalenceReport::default();
    let (p, delta) = (params.p(), params.delta());
    for (pt, qt) in samples {
        let a = pt.sym();
        let b = qt.sym();
        let diff = a - b;
        let dn = diff.norm();
        if dn == 0.0 {
            rep.skipped += 1;
            continue;
        }
        let ds = params.stress_sym(&a) - params.stress_sym(&b);
        let numerator = ds.dot(&diff);
        let df = params.f_map_sym(&a) - params.f_map_sym(&b);
        let an = a.norm();
        let bn = b.norm();
        rep.r1.push(numerator / df.dot(&df));
        rep.r2.push(numerator / phi_value(p, delta + an, dn));
        rep.r3.push(ds.norm() / phi_first(p, delta + an, dn));
        let curvature = super::nfunction::phi_second_unchecked(p, delta, an + bn);
        rep.r4.push(numerator / (curvature * dn * dn));
        if bn > 0.0 {
            let fq = params.f_map_sym(&b);
            let fq2 = fq.dot(&fq);
            rep.energy.push(params.stress_sym(&b).dot(&b) / fq2);
            rep.f_phi.push(fq2 / phi_value(p, delta, bn));
        }
        rep.evaluated += 1;
    }
    rep
}

pub fn equivalence_probe_seeded<const D: usize>(
    params: &StructureParams,
    seed: u64,
    count: usize,
) -> EquivalenceReport {
    equivalence_probe(params, &sample_pairs::<D>(seed, count))
}

/// Outcome of checking a calibrated inequality on fresh samples.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    /// Weight `ε` in front of the absorbed term.
    pub weight: f64,
    /// Calibrated `c_ε`.
    pub constant: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest observed `lhs / rhs`.
    pub worst_ratio: f64,
}

/// Relative slack for rounding when comparing `lhs ≤ rhs`.
const COMPARE_SLACK: f64 = 1e-10;

/// Maximizes `f` over the log-spaced box `[lo, hi]^K` (`per_decade` points
/// per decade), then polishes the best grid points with coordinate-wise
/// golden-section sweeps.
fn log_grid_sup<const K: usize>(f: &dyn Fn([f64; K]) -> f64, lo: f64, hi: f64, per_decade: usize) -> f64 {
    let (llo, lhi) = (math::ln(lo), math::ln(hi));
    let decades = (lhi - llo) / core::f64::consts::LN_10;
    let n = (decades * per_decade as f64) as usize + 1;
    let step = (lhi - llo) / (n - 1) as f64;
    let total = n.pow(K as u32);
    const KEEP: usize = 6;
    let mut best: Vec<(f64, [f64; K])> = Vec::with_capacity(KEEP + 1);
    for flat in 0..total {
        let mut idx = flat;
        let mut logs = [0.0; K];
        for l in logs.iter_mut() {
            *l = llo + step * (idx % n) as f64;
            idx /= n;
        }
        let v = f(logs.map(math::exp));
        if !v.is_finite() {
            continue;
        }
        if best.len() < KEEP || v > best[best.len() - 1].0 {
            best.push((v, logs));
            best.sort_by(|x, y| y.0.total_cmp(&x.0));
            best.truncate(KEEP);
        }
    }
    let mut sup = best.first().map_or(f64::NEG_INFINITY, |b| b.0);
    for (mut val, mut logs) in best {
        for _sweep in 0..6 {
            for k in 0..K {
                let g = |x: f64| {
                    let mut l = logs;
                    l[k] = x;
                    f(l.map(math::exp))
                };
                let (x, v) = golden_max(&g, logs[k] - 1.5 * step, logs[k] + 1.5 * step, 60);
                if v > val {
                    val = v;
                    logs[k] = x;
                }
            }
        }
        sup = sup.max(val);
    }
    sup
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd || fd.is_nan() {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `c_ε` for `t·s ≤ ε φ_a(t) + c_ε (φ_a)*(s)` with the closed-form `(φ_a)*`.
///
/// For `b = δ + a > 0` the optimal ratio depends only on `σ = s/b^{p−1}`
/// and equals `ε g*(σ/ε) / ((1+σ)^{p'−2} σ²)` where `g = φ|_{δ=1}` and `g*`
/// its exact Legendre transform; `b = 0` is the limit `ε^{1−p'}/p'`.
pub fn young_constant(params: &StructureParams, weight: f64) -> f64 {
    let p = params.p();
    let unit = StructureParams::new(p, 1.0).expect("valid exponent");
    let q = params.conjugate_exponent();
    let ratio = |[sigma]: [f64; 1]| {
        let sup = weight * unit.legendre_conjugate(0.0, sigma / weight).unwrap_or(f64::NAN);
        sup / shifted_conjugate_value(p, 1.0, sigma)
    };
    let limit = math::powf(weight, 1.0 - q) / q;
    log_grid_sup(&ratio, 1e-12, 1e12, 100).max(limit)
}

/// `c_ε` for `t φ'_a(s) + φ'_a(t) s ≤ ε φ_a(t) + c_ε φ_a(s)`, `p ≤ 2`.
///
/// After scaling by `b = δ + a` the ratio depends on `(t/b, s/b)`; the inner
/// supremum over `t` is a concave maximization for `p ≤ 2`.
pub fn young_derivative_constant(params: &StructureParams, weight: f64) -> f64 {
    let p = params.p();
    let inner = |shift: f64, u: f64| {
        let gp = phi_first(p, shift, u);
        let g = phi_value(p, shift, u);
        let h = |lt: f64| {
            let t = math::exp(lt);
            (t * gp + phi_first(p, shift, t) * u - weight * phi_value(p, shift, t)) / g
        };
        let lu = math::ln(u);
        golden_max(&h, lu - 40.0, lu + 40.0, 200).1
    };
    let shifted = log_grid_sup(&|[u]: [f64; 1]| inner(1.0, u), 1e-8, 1e8, 40);
    shifted.max(inner(0.0, 1.0))
}

fn f_scalar(p: f64, delta: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        math::powf(delta + t, 0.5 * (p - 2.0)) * t
    }
}

/// `c_ε` for `φ_{|Q|}(t) ≤ c_ε φ_{|P|}(t) + ε|F(Q) − F(P)|²`.
///
/// `|F(Q) − F(P)| ≥ |f(|Q|) − f(|P|)|` with equality for parallel tensors,
/// so the supremum runs over the three scalars `(|Q|, |P|, t)`.
pub fn shift_change_constant(params: &StructureParams, weight: f64) -> f64 {
    let (p, delta) = (params.p(), params.delta());
    let ratio = |[q, r, t]: [f64; 3]| {
        let jump = f_scalar(p, delta, q) - f_scalar(p, delta, r);
        (phi_value(p, delta + q, t) - weight * jump * jump) / phi_value(p, delta + r, t)
    };
    log_grid_sup(&ratio, 1e-7, 1e7, 5).max(0.0)
}

/// Same as [`shift_change_constant`] for the closed-form complementary
/// functions.
pub fn shift_change_conjugate_constant(params: &StructureParams, weight: f64) -> f64 {
    let (p, delta) = (params.p(), params.delta());
    let ratio = |[q, r, t]: [f64; 3]| {
        let jump = f_scalar(p, delta, q) - f_scalar(p, delta, r);
        (shifted_conjugate_value(p, delta + q, t) - weight * jump * jump) / shifted_conjugate_value(p, delta + r, t)
    };
    log_grid_sup(&ratio, 1e-7, 1e7, 5).max(0.0)
}

fn sample_shift<R: rand::Rng>(r: &mut R) -> f64 {
    if rng::uniform(r, 0.0, 1.0) < 0.25 {
        0.0
    } else {
        rng::log_uniform(r, 1e-6, 1e6)
    }
}

fn tally(weight: f64, constant: f64, ratios: impl Iterator<Item = f64>) -> InequalityReport {
    let mut rep = InequalityReport {
        weight,
        constant,
        samples: 0,
        violations: 0,
        worst_ratio: 0.0,
    };
    for ratio in ratios {
        rep.samples += 1;
        if !(ratio <= 1.0 + COMPARE_SLACK) {
            rep.violations += 1;
        }
        rep.worst_ratio = rep.worst_ratio.max(ratio);
    }
    rep
}

/// Fresh-sample check of `t·s ≤ ε φ_a(t) + c (φ_a)*(s)`.
pub fn check_young(params: &StructureParams, weight: f64, constant: f64, seed: u64, count: usize) -> InequalityReport {
    let mut r = rng::seeded(seed);
    let (p, delta) = (params.p(), params.delta());
    let ratios = (0..count).map(move |_| {
        let a = sample_shift(&mut r);
        let t = rng::log_uniform(&mut r, 1e-6, 1e6);
        let s = rng::log_uniform(&mut r, 1e-6, 1e6);
        let rhs = weight * phi_value(p, delta + a, t) + constant * shifted_conjugate_value(p, delta + a, s);
        t * s / rhs
    });
    tally(weight, constant, ratios)
}

/// Fresh-sample check of `t φ'_a(s) + φ'_a(t) s ≤ ε φ_a(t) + c φ_a(s)`.
pub fn check_young_derivative(
    params: &StructureParams,
    weight: f64,
    constant: f64,
    seed: u64,
    count: usize,
) -> InequalityReport {
    let mut r = rng::seeded(seed);
    let (p, delta) = (params.p(), params.delta());
    let ratios = (0..count).map(move |_| {
        let shift = delta + sample_shift(&mut r);
        let t = rng::log_uniform(&mut r, 1e-6, 1e6);
        let s = rng::log_uniform(&mut r, 1e-6, 1e6);
        let lhs = t * phi_first(p, shift, s) + phi_first(p, shift, t) * s;
        lhs / (weight * phi_value(p, shift, t) + constant * phi_value(p, shift, s))
    });
    tally(weight, constant, ratios)
}

fn random_sym<R: rand::Rng>(r: &mut R) -> SymTensor<2> {
    let scale = rng::magnitude(r);
    let off = rng::uniform(r, -1.0, 1.0);
    SymTensor::new([[rng::uniform(r, -1.0, 1.0), off], [off, rng::uniform(r, -1.0, 1.0)]])
        .expect("symmetric by construction")
        .scale(scale)
}

/// Fresh-sample check of `φ_{|Q|}(t) ≤ c φ_{|P|}(t) + ε|F(Q) − F(P)|²`
/// (`conjugate = false`) or its complementary-function analogue.
pub fn check_shift_change(
    params: &StructureParams,
    weight: f64,
    constant: f64,
    conjugate: bool,
    seed: u64,
    count: usize,
) -> InequalityReport {
    let mut r = rng::seeded(seed);
    let (p, delta) = (params.p(), params.delta());
    let params = *params;
    let ratios = (0..count).map(move |_| {
        let pt = random_sym(&mut r);
        let qt = random_sym(&mut r);
        let t = rng::log_uniform(&mut r, 1e-6, 1e6);
        let df = params.f_map_sym(&qt) - params.f_map_sym(&pt);
        let n = |x: f64| {
            if conjugate {
                shifted_conjugate_value(p, delta + x, t)
            } else {
                phi_value(p, delta + x, t)
            }
        };
        n(qt.norm()) / (constant * n(pt.norm()) + weight * df.dot(&df))
    });
    tally(weight, constant, ratios)
}

/// A smooth symmetric-tensor field on the plane.
pub trait TensorField {
    fn eval(&self, x: [f64; 2]) -> SymTensor<2>;
}

impl<F: Fn([f64; 2]) -> SymTensor<2>> TensorField for F {
    fn eval(&self, x: [f64; 2]) -> SymTensor<2> {
        self(x)
    }
}

fn sym2(a: f64, b: f64, c: f64) -> SymTensor<2> {
    SymTensor::new([[a, b], [b, c]]).expect("symmetric by construction")
}

pub type FieldFn = fn([f64; 2]) -> SymTensor<2>;

/// Polynomial, trigonometric and mixed sample fields on `[0,1]²`.
pub fn field_catalog() -> [(&'static str, FieldFn); 3] {
    fn poly([x, y]: [f64; 2]) -> SymTensor<2> {
        sym2(x - 0.3 + y * y, x * y - 0.2, 0.5 - y + x * x * x)
    }
    fn trig([x, y]: [f64; 2]) -> SymTensor<2> {
        use core::f64::consts::PI;
        sym2(
            math::sin(PI * x) * math::cos(PI * y),
            0.5 * math::sin(2.0 * PI * y),
            math::cos(PI * x) * math::sin(PI * y) + 0.25,
        )
    }
    fn mixed([x, y]: [f64; 2]) -> SymTensor<2> {
        sym2(math::exp(x) - 1.5, math::sin(3.0 * x * y), (y - 0.5) * (x + 0.2))
    }
    [("polynomial", poly), ("trigonometric", trig), ("mixed", mixed)]
}

/// Brackets of the pointwise ratios between `P_i(Q) = ∂_iS(Q)·∂_iQ`,
/// `φ''(|Q|)|∂_iQ|²`, `|∂_iF(Q)|²` and `|∂_iS(Q)|²/φ''(|Q|)`.
#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FieldEquivalenceReport {
    pub p_over_curvature: Bracket,
    pub p_over_f: Bracket,
    pub curvature_over_f: Bracket,
    pub p_over_stress: Bracket,
    pub points: usize,
    pub skipped: usize,
}

impl FieldEquivalenceReport {
    pub fn max_width(&self) -> f64 {
        [
            self.p_over_curvature,
            self.p_over_f,
            self.curvature_over_f,
            self.p_over_stress,
        ]
        .iter()
        .map(Bracket::width)
        .fold(0.0, f64::max)
    }
}

/// Evaluates the field equivalences at the cell centres of a `grid × grid`
/// lattice in `(0,1)²`, with all derivatives by central differences.
pub fn field_equivalence<T: TensorField + ?Sized>(
    params: &StructureParams,
    field: &T,
    grid: usize,
) -> FieldEquivalenceReport {
    let mut rep = FieldEquivalenceReport::default();
    let (p, delta) = (params.p(), params.delta());
    for ix in 0..grid {
        for iy in 0..grid {
            let x = [(ix as f64 + 0.5) / grid as f64, (iy as f64 + 0.5) / grid as f64];
            let q = field.eval(x);
            let qn = q.norm();
            for dir in 0..2 {
                let diff = |f: &dyn Fn([f64; 2]) -> SymTensor<2>, h: f64| {
                    let mut xp = x;
                    let mut xm = x;
                    xp[dir] += h;
                    xm[dir] -= h;
                    f(xp).combine(0.5 / h, &f(xm), -0.5 / h)
                };
                let dq = diff(&|y| field.eval(y), 1e-6);
                let dqn = dq.norm();
                if dqn < 1e-8 || delta + qn < 1e-8 {
                    rep.skipped += 1;
                    continue;
                }
                let h = (1e-3 * (delta + qn) / dqn).min(1e-5);
                let dq = diff(&|y| field.eval(y), h);
                let ds = diff(&|y| params.stress_sym(&field.eval(y)), h);
                let df = diff(&|y| params.f_map_sym(&field.eval(y)), h);
                let pi = ds.dot(&dq);
                let curvature = super::nfunction::phi_second_unchecked(p, delta, qn) * dq.dot(&dq);
                let fsq = df.dot(&df);
                let stress_term = ds.dot(&ds) / super::nfunction::phi_second_unchecked(p, delta, qn);
                rep.p_over_curvature.push(pi / curvature);
                rep.p_over_f.push(pi / fsq);
                rep.curvature_over_f.push(curvature / fsq);
                rep.p_over_stress.push(pi / stress_term);
                rep.points += 1;
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64, delta: f64) -> StructureParams {
        StructureParams::new(p, delta).unwrap()
    }

    #[test]
    fn linear_r1_is_one() {
        let rep = equivalence_probe_seeded::<2>(&params(2.0, 0.0), 5, 2000);
        assert!((rep.r1.min - 1.0).abs() < 1e-12);
        assert!((rep.r1.max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_pairs_are_skipped() {
        let t = Tensor::new([[1.0, 2.0], [0.0, 3.0]]);
        let rep = equivalence_probe(&params(1.5, 0.1), &[(t, t), (t, t.transpose())]);
        assert_eq!(rep.skipped, 2);
        assert_eq!(rep.evaluated, 0);
    }

    #[test]
    fn brackets_are_scale_independent() {
        let rep = equivalence_probe_seeded::<2>(&params(1.5, 0.01), 17, 10_000);
        assert!(rep.all_positive_finite(), "{rep:?}");
        assert!(rep.r1.width() < 20.0, "{rep:?}");
        assert!(rep.r2.width() < 20.0, "{rep:?}");
        assert!(rep.r3.width() < 20.0, "{rep:?}");
    }

    #[test]
    fn young_quadratic_constant() {
        // φ_a(t) = t²/2 and (φ_a)* ≈ s², so the optimal constant is 1/(2ε).
        for &w in &[0.1, 1.0] {
            let c = young_constant(&params(2.0, 0.0), w);
            assert!((c - 0.5 / w).abs() < 1e-9, "{c}");
        }
    }

    #[test]
    fn young_split_sample() {
        let prm = params(1.5, 1e-3);
        for &w in &[0.1, 1.0] {
            let c = young_constant(&prm, w);
            let rep = check_young(&prm, w, c, 99, 2000);
            assert_eq!(rep.violations, 0, "{rep:?}");
            let c2 = young_derivative_constant(&prm, w);
            let rep = check_young_derivative(&prm, w, c2, 98, 2000);
            assert_eq!(rep.violations, 0, "{rep:?}");
        }
    }

    #[test]
    fn field_equivalence_linear_case() {
        let prm = params(2.0, 1.0);
        let (_, f) = field_catalog()[1];
        let rep = field_equivalence(&prm, &f, 12);
        assert!(rep.points > 0);
        assert!(rep.max_width() < 1.0 + 1e-5, "{rep:?}");
    }
}
