//! Convergence studies against manufactured solutions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicBool, Ordering};

use super::{fit_rates_with_floor, forcing, HarnessError, ManufacturedSolution, MmsKind, RateFit};
use crate::fe::{error_f, error_l2, FeSpace, DEFAULT_QUAD_DEGREE};
use crate::math;
use crate::stepper::{Boundary, NewtonOptions, Problem, TimeGrid};
use crate::structure::StructureParams;

/// Errors at or below this count as exact in rate fits.
pub const EXACT_FLOOR: f64 = 1e-9;

/// Which discretization parameter is refined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum StudyKind {
    /// `n` doubles, `M` fixed.
    Spatial,
    /// `M` doubles, `n` fixed.
    Temporal,
    /// Both refined together under the coupling `h^{4/p'} ≤ σ₀κ`.
    Coupled,
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Spatial => "spatial",
            StudyKind::Temporal => "temporal",
            StudyKind::Coupled => "coupled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [StudyKind::Spatial, StudyKind::Temporal, StudyKind::Coupled]
            .into_iter()
            .find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudyConfig {
    pub kind: StudyKind,
    pub mms: MmsKind,
    pub p: f64,
    pub delta: f64,
    pub levels: usize,
    /// Cells per side on level 0.
    pub base_n: usize,
    /// Time steps on level 0.
    pub base_m: usize,
    /// Cells per side for temporal studies.
    pub fixed_n: usize,
    /// Time steps for spatial studies.
    pub fixed_m: usize,
    pub sigma0: f64,
    pub t_final: f64,
    /// Newton tolerance on the free-dof residual.
    pub tol: f64,
    /// Recorded for reproducibility; the studies themselves are deterministic.
    pub seed: u64,
}

impl StudyConfig {
    pub fn coupled(p: f64, delta: f64, mms: MmsKind) -> Self {
        Self {
            kind: StudyKind::Coupled,
            mms,
            p,
            delta,
            levels: 4,
            base_n: 4,
            base_m: 4,
            fixed_n: 32,
            fixed_m: 128,
            sigma0: 1.0,
            t_final: 1.0,
            tol: 1e-10,
            seed: 0,
        }
    }

    /// Fine fixed time grid; `σ₀` is raised so the coarse meshes still
    /// satisfy the coupling.
    pub fn spatial(p: f64, delta: f64, mms: MmsKind) -> Self {
        Self {
            kind: StudyKind::Spatial,
            sigma0: 64.0,
            ..Self::coupled(p, delta, mms)
        }
    }

    pub fn temporal(p: f64, delta: f64, mms: MmsKind) -> Self {
        Self {
            kind: StudyKind::Temporal,
            ..Self::coupled(p, delta, mms)
        }
    }

    pub fn for_kind(kind: StudyKind, p: f64, delta: f64, mms: MmsKind) -> Self {
        match kind {
            StudyKind::Spatial => Self::spatial(p, delta, mms),
            StudyKind::Temporal => Self::temporal(p, delta, mms),
            StudyKind::Coupled => Self::coupled(p, delta, mms),
        }
    }

    pub fn params(&self) -> Result<StructureParams, HarnessError> {
        Ok(StructureParams::new(self.p, self.delta)?)
    }

    pub fn validate(&self) -> Result<StructureParams, HarnessError> {
        let params = self.params()?;
        let bad = |msg: &str| Err(HarnessError::InvalidConfig(String::from(msg)));
        if self.levels < 2 {
            return bad("levels must be at least 2");
        }
        if self.base_n == 0 || self.base_m == 0 || self.fixed_n == 0 || self.fixed_m == 0 {
            return bad("mesh and step counts must be positive");
        }
        if self.levels > 12 {
            return bad("levels must be at most 12");
        }
        if !(self.sigma0 > 0.0 && self.sigma0.is_finite()) {
            return bad("sigma0 must be positive");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad("t_final must be positive");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        Ok(params)
    }

    /// Mesh and time grid per level, with the coupling checked on each.
    ///
    /// Coupled levels use `n = base_n·2^l` and
    /// `κ = max(T/(base_m·2^l), h^{4/p'}/σ₀)` rounded up to a divisor of `T`.
    pub fn plan(&self) -> Result<Vec<LevelPlan>, HarnessError> {
        let params = self.validate()?;
        let exponent = 4.0 / params.conjugate_exponent();
        let mut plans = Vec::with_capacity(self.levels);
        for level in 0..self.levels {
            let scale = 1usize << level;
            let n = match self.kind {
                StudyKind::Temporal => self.fixed_n,
                _ => self.base_n * scale,
            };
            let h = core::f64::consts::SQRT_2 / n as f64;
            let coupling = math::powf(h, exponent);
            let steps = match self.kind {
                StudyKind::Spatial => self.fixed_m,
                StudyKind::Temporal => self.base_m * scale,
                StudyKind::Coupled => {
                    let target = (self.t_final / (self.base_m * scale) as f64).max(coupling / self.sigma0);
                    math::floor(self.t_final / target + 1e-9).max(1.0) as usize
                }
            };
            let grid = TimeGrid::new(self.t_final, steps).map_err(|e| HarnessError::InvalidConfig(format!("{e}")))?;
            let kappa = grid.kappa();
            let rhs = self.sigma0 * kappa;
            if coupling > rhs * (1.0 + 1e-12) {
                return Err(HarnessError::Coupling {
                    level,
                    lhs: coupling,
                    rhs,
                });
            }
            plans.push(LevelPlan {
                level,
                n,
                steps,
                h,
                kappa,
            });
        }
        Ok(plans)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelPlan {
    pub level: usize,
    pub n: usize,
    pub steps: usize,
    /// Largest cell diameter, `√2/n`.
    pub h: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelResult {
    pub plan: LevelPlan,
    /// `max_{0≤m≤M} ‖u(t_m) − u_h^m‖₂`.
    pub err_max_l2: f64,
    /// `κ Σ_{m=1}^{M} ‖F(Du(t_m)) − F(Du_h^m)‖₂²`.
    pub err_f_sq: f64,
    pub newton_total: usize,
    pub newton_max: usize,
    /// `max_m ‖u_h^m‖₂² + κ Σ ‖F(Du_h^m)‖₂²`.
    pub energy_bound: f64,
    /// Largest per-step energy-inequality residual, for homogeneous data.
    pub max_energy_residual: Option<f64>,
    /// Every Newton iterate lowered the step energy (up to rounding).
    pub monotone_energy: bool,
    pub notes: String,
}

impl LevelResult {
    /// `√(err_max_l2² + err_f_sq)`.
    pub fn total_error(&self) -> f64 {
        math::sqrt(self.err_max_l2 * self.err_max_l2 + self.err_f_sq)
    }

    pub fn quantity(&self, q: Quantity) -> f64 {
        match q {
            Quantity::MaxL2 => self.err_max_l2,
            Quantity::FNorm => math::sqrt(self.err_f_sq),
            Quantity::Total => self.total_error(),
        }
    }
}

/// Solves one level of a study and measures its errors.
pub fn run_level(cfg: &StudyConfig, plan: &LevelPlan) -> Result<LevelResult, HarnessError> {
    let base = cfg.validate()?;
    let mms = ManufacturedSolution::new(cfg.mms);
    let opts = NewtonOptions {
        tol: cfg.tol,
        ..NewtonOptions::default()
    };
    let space = FeSpace::unit_square(plan.n);
    let failed = AtomicBool::new(false);
    let zero = |_: f64, _: [f64; 2]| [0.0, 0.0];
    let probe = Problem::new(base, &space, &zero, Boundary::Homogeneous);
    let params = probe.effective_params(&opts);
    drop(probe);

    let f = |t: f64, x: [f64; 2]| match forcing(&params, &mms, t, x) {
        Ok(v) => v,
        Err(_) => {
            failed.store(true, Ordering::Relaxed);
            [0.0, 0.0]
        }
    };
    let g = |t: f64, x: [f64; 2]| mms.value(t, x);
    let boundary = if mms.zero_boundary() {
        Boundary::Homogeneous
    } else {
        Boundary::Prescribed(&g)
    };
    let problem = Problem::new(base, &space, &f, boundary);
    let grid = TimeGrid::new(cfg.t_final, plan.steps).map_err(|source| HarnessError::Solver {
        level: plan.level,
        source,
    })?;
    let traj = problem
        .run_trajectory(grid, |x| mms.value(0.0, x), &opts)
        .map_err(|source| HarnessError::Solver {
            level: plan.level,
            source,
        })?;
    if failed.load(Ordering::Relaxed) {
        return Err(HarnessError::Forcing(crate::structure::StructureError::Singular));
    }

    let deg = DEFAULT_QUAD_DEGREE;
    let mut err_max_l2 = 0.0f64;
    let mut err_f_sq = 0.0;
    for (m, u) in traj.states.iter().enumerate() {
        let t = grid.node(m);
        err_max_l2 = err_max_l2.max(error_l2(&space, u, |x| mms.value(t, x), deg));
        if m > 0 {
            let e = error_f(&params, &space, u, |x| mms.gradient(t, x), deg);
            err_f_sq += grid.kappa() * e * e;
        }
    }
    let max_energy_residual = traj
        .reports
        .iter()
        .filter_map(|r| r.energy_inequality_residual)
        .reduce(f64::max);
    let monotone_energy = traj.reports.iter().all(|r| {
        r.energy_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 64.0 * f64::EPSILON * (math::abs(w[0]) + math::abs(w[1])))
    });
    let notes = if params.epsilon() > 0.0 {
        format!("epsilon={:e}", params.epsilon())
    } else {
        String::new()
    };
    Ok(LevelResult {
        plan: *plan,
        err_max_l2,
        err_f_sq,
        newton_total: traj.newton_total(),
        newton_max: traj.reports.iter().map(|r| r.newton_iterations).max().unwrap_or(0),
        energy_bound: traj.energy_bound(),
        max_energy_residual,
        monotone_energy,
        notes,
    })
}

/// Runs every level in sequence.
pub fn run_study(cfg: &StudyConfig) -> Result<ConvergenceTable, HarnessError> {
    let plans = cfg.plan()?;
    let rows = plans.iter().map(|p| run_level(cfg, p)).collect::<Result<Vec<_>, _>>()?;
    ConvergenceTable::from_rows(cfg.kind, rows)
}

/// Error measure reported in a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Quantity {
    /// `max_m ‖u(t_m) − u_h^m‖₂`.
    MaxL2,
    /// `(κ Σ ‖F(Du) − F(Du_h)‖₂²)^{1/2}`.
    FNorm,
    /// `(max_m ‖u(t_m) − u_h^m‖₂² + κ Σ ‖F(Du) − F(Du_h)‖₂²)^{1/2}`.
    Total,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Scale {
    H,
    Kappa,
}

/// The rate a study is judged by.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Headline {
    pub quantity: Quantity,
    pub scale: Scale,
    pub fit: RateFit,
}

/// Fitted slopes of each error measure against `h` and `κ`; `None` where
/// the scale does not vary across levels.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudySlopes {
    pub l2_vs_h: Option<RateFit>,
    pub f_vs_h: Option<RateFit>,
    pub total_vs_h: Option<RateFit>,
    pub l2_vs_kappa: Option<RateFit>,
    pub f_vs_kappa: Option<RateFit>,
    pub total_vs_kappa: Option<RateFit>,
    pub headline: Headline,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceTable {
    pub kind: StudyKind,
    pub rows: Vec<LevelResult>,
    pub slopes: StudySlopes,
}

impl ConvergenceTable {
    /// Headlines: `F`-error against `h` for spatial studies, the maximal
    /// `L²` error against `κ` for temporal ones, and the combined error
    /// against `κ` along the coupled path.
    pub fn from_rows(kind: StudyKind, rows: Vec<LevelResult>) -> Result<Self, HarnessError> {
        let h: Vec<f64> = rows.iter().map(|r| r.plan.h).collect();
        let kappa: Vec<f64> = rows.iter().map(|r| r.plan.kappa).collect();
        let fit = |scale: &[f64], q: Quantity| -> Option<RateFit> {
            let values: Vec<f64> = rows.iter().map(|r| r.quantity(q)).collect();
            fit_rates_with_floor(scale, &values, EXACT_FLOOR).ok().map(|r| r.fitted)
        };
        let (quantity, scale) = match kind {
            StudyKind::Spatial => (Quantity::FNorm, Scale::H),
            StudyKind::Temporal => (Quantity::MaxL2, Scale::Kappa),
            StudyKind::Coupled => (Quantity::Total, Scale::Kappa),
        };
        let values: Vec<f64> = rows.iter().map(|r| r.quantity(quantity)).collect();
        let headline_scale = if scale == Scale::H { &h } else { &kappa };
        let headline = fit_rates_with_floor(headline_scale, &values, EXACT_FLOOR)?.fitted;
        let slopes = StudySlopes {
            l2_vs_h: fit(&h, Quantity::MaxL2),
            f_vs_h: fit(&h, Quantity::FNorm),
            total_vs_h: fit(&h, Quantity::Total),
            l2_vs_kappa: fit(&kappa, Quantity::MaxL2),
            f_vs_kappa: fit(&kappa, Quantity::FNorm),
            total_vs_kappa: fit(&kappa, Quantity::Total),
            headline: Headline {
                quantity,
                scale,
                fit: headline,
            },
        };
        Ok(Self { kind, rows, slopes })
    }

    /// `(κ_l, value)` or `(h_l, value)` pairs of the headline quantity.
    pub fn headline_series(&self) -> Vec<(f64, f64)> {
        let h = &self.slopes.headline;
        self.rows
            .iter()
            .map(|r| {
                let s = if h.scale == Scale::H { r.plan.h } else { r.plan.kappa };
                (s, r.quantity(h.quantity))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_plan_doubles_both() {
        let cfg = StudyConfig::coupled(2.0, 0.0, MmsKind::Trig);
        let plan = cfg.plan().unwrap();
        let ns: Vec<usize> = plan.iter().map(|p| p.n).collect();
        let ms: Vec<usize> = plan.iter().map(|p| p.steps).collect();
        assert_eq!(ns, [4, 8, 16, 32]);
        assert_eq!(ms, [4, 8, 16, 32]);
        let cfg = StudyConfig::coupled(1.5, 1e-4, MmsKind::Trig);
        for p in cfg.plan().unwrap() {
            let lhs = libm::pow(p.h, 4.0 / 3.0);
            assert!(lhs <= cfg.sigma0 * p.kappa * (1.0 + 1e-12));
        }
    }

    #[test]
    fn coupling_violation_is_reported() {
        let mut cfg = StudyConfig::spatial(2.0, 0.0, MmsKind::Trig);
        cfg.sigma0 = 1.0;
        assert!(matches!(cfg.plan(), Err(HarnessError::Coupling { level: 0, .. })));
    }

    #[test]
    fn invalid_exponent_is_rejected() {
        let cfg = StudyConfig::coupled(0.9, 0.0, MmsKind::Trig);
        let err = cfg.plan().unwrap_err();
        assert!(format!("{err}").contains("p must exceed 1"));
    }

    #[test]
    fn ramp_is_reproduced() {
        let mut cfg = StudyConfig::coupled(1.5, 0.1, MmsKind::Ramp);
        cfg.levels = 2;
        let table = run_study(&cfg).unwrap();
        for r in &table.rows {
            assert!(r.err_max_l2 < 1e-10, "{}", r.err_max_l2);
            assert!(r.err_f_sq < 1e-18, "{}", r.err_f_sq);
        }
        assert_eq!(table.slopes.headline.fit, RateFit::Exact);
    }
}
