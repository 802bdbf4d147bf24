use alloc::vec;
use alloc::vec::Vec;

use super::{NewtonOptions, StepFailure, StepReport, StepperError, TimeGrid, Trajectory, DEGENERATE_EPSILON};
use crate::fe::{
    assemble_load, assemble_mass, f_norm_sq, interpolate_lagrange, l2_project, stress_power, sym_basis, sym_dot,
    BoundaryMode, FeFunction, FeSpace,
};
use crate::linalg::{dot, norm2, Cholesky, CsrMatrix, LinalgError};
use crate::structure::{StructureParams, SymTensor, ZERO_STRAIN_CLAMP};

/// A Newton step that keeps more than this fraction of the residual
/// counts as stalled.
const STALL_RATIO: f64 = 0.5;

/// Time-dependent vector data `(t, x) ↦ v`.
pub type SpaceTimeFn<'a> = &'a (dyn Fn(f64, [f64; 2]) -> [f64; 2] + Sync);

/// Dirichlet data of the evolution problem.
#[derive(Clone, Copy)]
pub enum Boundary<'a> {
    /// `u = 0` on `∂Ω`; iterates stay in `V_h`.
    Homogeneous,
    /// `u = g(t, ·)` on `∂Ω`, imposed at the boundary vertices.
    Prescribed(SpaceTimeFn<'a>),
}

/// Residual on the free dofs and the free × free tangent.
#[derive(Clone, Debug)]
pub struct NewtonSystem {
    pub residual: Vec<f64>,
    pub tangent: CsrMatrix,
}

/// The discrete evolution problem on a fixed space.
pub struct Problem<'a> {
    params: StructureParams,
    space: &'a FeSpace,
    forcing: SpaceTimeFn<'a>,
    boundary: Boundary<'a>,
    load_degree: usize,
    mass: CsrMatrix,
}

impl<'a> Problem<'a> {
    pub fn new(params: StructureParams, space: &'a FeSpace, forcing: SpaceTimeFn<'a>, boundary: Boundary<'a>) -> Self {
        Self {
            params,
            space,
            forcing,
            boundary,
            load_degree: crate::fe::DEFAULT_QUAD_DEGREE,
            mass: assemble_mass(space),
        }
    }

    pub fn with_load_degree(mut self, degree: usize) -> Self {
        self.load_degree = degree;
        self
    }

    pub fn params(&self) -> &StructureParams {
        &self.params
    }

    pub fn space(&self) -> &FeSpace {
        self.space
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// `(f(t), φ_i)` for every dof.
    pub fn load(&self, t: f64) -> Vec<f64> {
        assemble_load(self.space, self.load_degree, |x| (self.forcing)(t, x))
    }

    /// The structure parameters a step actually uses.
    pub fn effective_params(&self, opts: &NewtonOptions) -> StructureParams {
        if opts.auto_regularize && self.params.is_degenerate() && self.params.epsilon() == 0.0 {
            self.params.perturbed(DEGENERATE_EPSILON).expect("positive epsilon")
        } else {
            self.params
        }
    }

    /// `J_m(w)` for the given load vector.
    pub fn step_energy(
        &self,
        params: &StructureParams,
        w: &FeFunction,
        u_prev: &FeFunction,
        kappa: f64,
        load: &[f64],
    ) -> f64 {
        let diff: Vec<f64> = w
            .coefficients()
            .iter()
            .zip(u_prev.coefficients())
            .map(|(a, b)| a - b)
            .collect();
        let kinetic = 0.5 / kappa * self.mass.bilinear(&diff, &diff);
        let mesh = self.space.mesh();
        let eps = params.epsilon();
        let mut stored = 0.0;
        for k in 0..mesh.num_cells() {
            let t = w.sym_gradient(self.space, k).norm();
            stored += mesh.area(k) * (params.clamped_phi(t) + 0.5 * eps * t * t);
        }
        kinetic + stored - dot(load, w.coefficients())
    }

    /// Gradient of `J_m` at `u` on the free dofs.
    pub fn residual(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        u_prev: &FeFunction,
        kappa: f64,
        load: &[f64],
    ) -> Vec<f64> {
        let full = self.full_residual(params, u, u_prev, kappa, load);
        self.space.restrict(&full)
    }

    fn full_residual(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        u_prev: &FeFunction,
        kappa: f64,
        load: &[f64],
    ) -> Vec<f64> {
        let diff: Vec<f64> = u
            .coefficients()
            .iter()
            .zip(u_prev.coefficients())
            .map(|(a, b)| a - b)
            .collect();
        let mut r: Vec<f64> = self
            .mass
            .mul_vec(&diff)
            .iter()
            .zip(load)
            .map(|(m, b)| m / kappa - b)
            .collect();
        let mesh = self.space.mesh();
        for k in 0..mesh.num_cells() {
            let s = params.stress_sym(&u.sym_gradient(self.space, k));
            let s = packed(&s);
            let basis = sym_basis(self.space.basis_gradients(k));
            for (a, &dof) in self.space.cell_dofs(k).iter().enumerate() {
                r[dof] += mesh.area(k) * sym_dot(&s, &basis[a]);
            }
        }
        r
    }

    /// Tangent `M/κ + ∫ DS^ε(Du)[Dφ_j] : Dφ_i` on the free dofs.
    pub fn tangent(&self, params: &StructureParams, u: &FeFunction, kappa: f64) -> CsrMatrix {
        let space = self.space;
        let mesh = space.mesh();
        let mut t = self.free_mass_triplets(kappa);
        for k in 0..mesh.num_cells() {
            let du = u.sym_gradient(space, k);
            let basis = sym_basis(space.basis_gradients(k));
            let dofs = space.cell_dofs(k);
            let free: [Option<usize>; 6] = dofs.map(|d| space.free_index(d));
            for b in 0..6 {
                let Some(fb) = free[b] else { continue };
                let db = params.stress_derivative_sym(&du, &unpacked(&basis[b]));
                let db = packed(&db);
                for a in 0..6 {
                    if let Some(fa) = free[a] {
                        t.push((fa, fb, mesh.area(k) * sym_dot(&db, &basis[a])));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(space.num_free(), space.num_free(), &t)
    }

    /// Residual and tangent of step `t` at `u`.
    pub fn newton_system(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        u_prev: &FeFunction,
        kappa: f64,
        t: f64,
    ) -> NewtonSystem {
        let load = self.load(t);
        NewtonSystem {
            residual: self.residual(params, u, u_prev, kappa, &load),
            tangent: self.tangent(params, u, kappa),
        }
    }

    /// Dirichlet values at time `t` applied to a copy of `u`.
    fn with_boundary_values(&self, u: &FeFunction, t: f64) -> FeFunction {
        match self.boundary {
            Boundary::Homogeneous => {
                let mut w = u.clone();
                for (c, &fixed) in w.coefficients_mut().iter_mut().zip(self.space.dirichlet_mask()) {
                    if fixed {
                        *c = 0.0;
                    }
                }
                w
            }
            Boundary::Prescribed(g) => {
                let nodal = interpolate_lagrange(self.space, |x| g(t, x), BoundaryMode::Keep);
                let mut w = u.clone();
                for (dof, &fixed) in self.space.dirichlet_mask().iter().enumerate() {
                    if fixed {
                        w.coefficients_mut()[dof] = nodal.coefficients()[dof];
                    }
                }
                w
            }
        }
    }

    /// One backward Euler step from `u_prev` to time `t`, starting Newton at
    /// `u_prev`.
    pub fn implicit_step(
        &self,
        u_prev: &FeFunction,
        t: f64,
        kappa: f64,
        opts: &NewtonOptions,
    ) -> Result<(FeFunction, StepReport), StepFailure> {
        self.implicit_step_from(u_prev, u_prev, t, kappa, opts)
    }

    /// As [`Self::implicit_step`] with an explicit initial guess.
    pub fn implicit_step_from(
        &self,
        u_prev: &FeFunction,
        guess: &FeFunction,
        t: f64,
        kappa: f64,
        opts: &NewtonOptions,
    ) -> Result<(FeFunction, StepReport), StepFailure> {
        let load = self.load(t);
        let mut params = self.effective_params(opts);
        let mut retries = 0;
        loop {
            match self.newton(&params, u_prev, guess, t, kappa, &load, opts) {
                Err(StepFailure::Linalg(LinalgError::NotPositiveDefinite { row })) => {
                    if retries == opts.regularization_retries {
                        return Err(StepFailure::Indefinite {
                            retries,
                            source: LinalgError::NotPositiveDefinite { row },
                        });
                    }
                    retries += 1;
                    let eps = (10.0 * params.epsilon()).max(DEGENERATE_EPSILON);
                    params = params.perturbed(eps).expect("positive epsilon");
                }
                other => return other,
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn newton(
        &self,
        params: &StructureParams,
        u_prev: &FeFunction,
        guess: &FeFunction,
        t: f64,
        kappa: f64,
        load: &[f64],
        opts: &NewtonOptions,
    ) -> Result<(FeFunction, StepReport), StepFailure> {
        let space = self.space;
        let mut u = self.with_boundary_values(guess, t);
        let mut report = StepReport {
            epsilon: params.epsilon(),
            ..StepReport::default()
        };
        let mut energy = self.step_energy(params, &u, u_prev, kappa, load);
        report.energy_history.push(energy);
        let mut residual = self.residual(params, &u, u_prev, kappa, load);
        let mut res_norm = norm2(&residual);
        report.residual_history.push(res_norm);
        let start_energy = energy;

        while res_norm > opts.tol {
            if report.newton_iterations == opts.max_iterations {
                return Err(StepFailure::NonConvergence {
                    iterations: report.newton_iterations,
                    residual: res_norm,
                    residual_history: report.residual_history,
                });
            }
            let (mut step, mut next_res) = match self.search_direction(params, &u, &residual, kappa) {
                Ok(dir) => {
                    let s = self.line_search(
                        params,
                        &u,
                        &dir,
                        &residual,
                        energy,
                        u_prev,
                        kappa,
                        load,
                        opts,
                        &mut report,
                    );
                    let r = s.as_ref().map(|(trial, _, r)| {
                        r.clone()
                            .unwrap_or_else(|| self.residual(params, trial, u_prev, kappa, load))
                    });
                    (s, r)
                }
                Err(e) if params.p() >= 2.0 => return Err(e.into()),
                Err(_) => (None, None),
            };
            // Newton stalls where φ'' blows up near zero strain; the secant
            // (Kačanov) operator majorizes J for p < 2 and cannot overshoot.
            let stalled = next_res.as_ref().is_none_or(|r| norm2(r) > STALL_RATIO * res_norm);
            if params.p() < 2.0 && stalled {
                let dir = self.secant_direction(params, &u, &residual, kappa)?;
                if let Some(cand) = self.line_search(
                    params,
                    &u,
                    &dir,
                    &residual,
                    energy,
                    u_prev,
                    kappa,
                    load,
                    opts,
                    &mut report,
                ) {
                    if step.as_ref().is_none_or(|(_, e, _)| cand.1 < *e) {
                        next_res = Some(
                            cand.2
                                .clone()
                                .unwrap_or_else(|| self.residual(params, &cand.0, u_prev, kappa, load)),
                        );
                        step = Some(cand);
                        report.secant_steps += 1;
                    }
                }
            }
            let (Some((trial, e, _)), Some(r)) = (step, next_res) else {
                return Err(StepFailure::LineSearch {
                    iteration: report.newton_iterations,
                    residual: res_norm,
                });
            };
            u = trial;
            energy = e;
            residual = r;
            res_norm = norm2(&residual);
            report.newton_iterations += 1;
            report.energy_history.push(energy);
            report.residual_history.push(res_norm);
        }

        report.final_residual_norm = res_norm;
        report.step_energy_decrease = start_energy - energy;
        if matches!(self.boundary, Boundary::Homogeneous) {
            let now = self.mass.bilinear(u.coefficients(), u.coefficients());
            let before = self.mass.bilinear(u_prev.coefficients(), u_prev.coefficients());
            report.energy_inequality_residual =
                Some(0.5 * (now - before) / kappa + stress_power(params, space, &u) - dot(load, u.coefficients()));
        }
        Ok((u, report))
    }

    fn search_direction(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        residual: &[f64],
        kappa: f64,
    ) -> Result<Vec<f64>, LinalgError> {
        let chol = Cholesky::factor(&self.tangent(params, u, kappa))?;
        let neg: Vec<f64> = residual.iter().map(|r| -r).collect();
        chol.solve(&neg)
    }

    /// Direction from `M/κ + ∫ ((δ+|Du|)^{p−2} + ε) Dφ_j : Dφ_i`.
    fn secant_direction(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        residual: &[f64],
        kappa: f64,
    ) -> Result<Vec<f64>, LinalgError> {
        let space = self.space;
        let mesh = space.mesh();
        let mut t = self.free_mass_triplets(kappa);
        for k in 0..mesh.num_cells() {
            let a = u.sym_gradient(space, k).norm().max(ZERO_STRAIN_CLAMP);
            let c = crate::math::powf(params.delta() + a, params.p() - 2.0) + params.epsilon();
            let basis = sym_basis(space.basis_gradients(k));
            let free: [Option<usize>; 6] = space.cell_dofs(k).map(|d| space.free_index(d));
            for b in 0..6 {
                let Some(fb) = free[b] else { continue };
                for a in 0..6 {
                    if let Some(fa) = free[a] {
                        t.push((fa, fb, mesh.area(k) * c * sym_dot(&basis[b], &basis[a])));
                    }
                }
            }
        }
        let m = CsrMatrix::from_triplets(space.num_free(), space.num_free(), &t);
        let neg: Vec<f64> = residual.iter().map(|r| -r).collect();
        Cholesky::factor(&m)?.solve(&neg)
    }

    fn free_mass_triplets(&self, kappa: f64) -> Vec<(usize, usize, f64)> {
        let space = self.space;
        let mut t = Vec::with_capacity(self.mass.nnz() + 36 * space.mesh().num_cells());
        for (fi, &dof) in space.free_dofs().iter().enumerate() {
            let (cols, vals) = self.mass.row(dof);
            for (&j, &v) in cols.iter().zip(vals) {
                if let Some(fj) = space.free_index(j) {
                    t.push((fi, fj, v / kappa));
                }
            }
        }
        t
    }

    /// Backtracking from the full step: Armijo on `J_m`, or residual
    /// decrease once `J_m` differences drown in rounding near the minimiser.
    #[allow(clippy::too_many_arguments)]
    fn line_search(
        &self,
        params: &StructureParams,
        u: &FeFunction,
        dir: &[f64],
        residual: &[f64],
        energy: f64,
        u_prev: &FeFunction,
        kappa: f64,
        load: &[f64],
        opts: &NewtonOptions,
        report: &mut StepReport,
    ) -> Option<(FeFunction, f64, Option<Vec<f64>>)> {
        let slope = dot(residual, dir);
        let res_norm = norm2(residual);
        let mut alpha = 1.0;
        for _ in 0..=opts.max_backtracks {
            let mut trial = u.clone();
            for (&dof, d) in self.space.free_dofs().iter().zip(dir) {
                trial.coefficients_mut()[dof] += alpha * d;
            }
            let e = self.step_energy(params, &trial, u_prev, kappa, load);
            if e <= energy + opts.armijo * alpha * slope {
                return Some((trial, e, None));
            }
            let noise = 64.0 * f64::EPSILON * (crate::math::abs(energy) + crate::math::abs(e));
            if crate::math::abs(e - energy) <= noise {
                let r = self.residual(params, &trial, u_prev, kappa, load);
                if norm2(&r) < res_norm {
                    return Some((trial, e, Some(r)));
                }
            }
            alpha *= 0.5;
            report.line_search_backtracks += 1;
        }
        None
    }

    /// Initial datum: `L²` projection onto `V_h` (homogeneous data) or onto
    /// `X_h` with nodal boundary values.
    pub fn initial_state<G>(&self, u0: G) -> Result<FeFunction, StepperError>
    where
        G: Fn([f64; 2]) -> [f64; 2],
    {
        let mode = match self.boundary {
            Boundary::Homogeneous => BoundaryMode::Zero,
            Boundary::Prescribed(_) => BoundaryMode::Nodal,
        };
        Ok(l2_project(self.space, u0, mode)?)
    }

    pub fn run_trajectory<G>(&self, grid: TimeGrid, u0: G, opts: &NewtonOptions) -> Result<Trajectory, StepperError>
    where
        G: Fn([f64; 2]) -> [f64; 2],
    {
        let kappa = grid.kappa();
        let first = self.initial_state(u0)?;
        let norms = |u: &FeFunction, params: &StructureParams| {
            (
                self.mass.bilinear(u.coefficients(), u.coefficients()),
                f_norm_sq(params, self.space, u),
            )
        };
        let base = self.effective_params(opts);
        let (l0, f0) = norms(&first, &base);
        let mut traj = Trajectory {
            grid,
            states: vec![first],
            reports: Vec::with_capacity(grid.steps()),
            l2_sq: vec![l0],
            f_sq: vec![f0],
        };
        for m in 1..=grid.steps() {
            let prev = traj.states.last().expect("non-empty");
            let (u, report) = self
                .implicit_step(prev, grid.node(m), kappa, opts)
                .map_err(|source| StepperError::Step { step: m, source })?;
            let (l, f) = norms(&u, &base);
            traj.l2_sq.push(l);
            traj.f_sq.push(f);
            traj.states.push(u);
            traj.reports.push(report);
        }
        Ok(traj)
    }
}

fn packed(s: &SymTensor<2>) -> [f64; 3] {
    [s.get(0, 0), s.get(0, 1), s.get(1, 1)]
}

fn unpacked(v: &[f64; 3]) -> SymTensor<2> {
    SymTensor::new([[v[0], v[1]], [v[1], v[2]]]).expect("symmetric by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe::assemble_sym_stiffness;
    use crate::rng;

    fn zero_force(_: f64, _: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn bump(_: f64, x: [f64; 2]) -> [f64; 2] {
        [libm::sin(3.0 * x[0]) + x[1], 1.0 - x[0] * x[1]]
    }

    fn random_state(space: &FeSpace, seed: u64, scale: f64) -> FeFunction {
        let mut r = rng::seeded(seed);
        let mut u = FeFunction::zeros(space);
        for &d in space.free_dofs() {
            u.coefficients_mut()[d] = scale * rng::uniform(&mut r, -1.0, 1.0);
        }
        u
    }

    #[test]
    fn quadratic_tangent_is_mass_plus_stiffness() {
        let space = FeSpace::unit_square(4);
        let params = StructureParams::new(2.0, 0.0).unwrap();
        let prob = Problem::new(params, &space, &zero_force, Boundary::Homogeneous);
        let u = random_state(&space, 1, 1.0);
        let kappa = 0.1;
        let tan = prob.tangent(&params, &u, kappa);
        let mass = space.reduce_matrix(&assemble_mass(&space));
        let stiff = space.reduce_matrix(&assemble_sym_stiffness(&space));
        for i in 0..space.num_free() {
            for j in 0..space.num_free() {
                let expected = mass.get(i, j) / kappa + stiff.get(i, j);
                assert!((tan.get(i, j) - expected).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn tangent_matches_residual_differences() {
        let space = FeSpace::unit_square(4);
        let params = StructureParams::new(1.5, 0.1).unwrap();
        let prob = Problem::new(params, &space, &bump, Boundary::Homogeneous);
        let u = random_state(&space, 2, 1.0);
        let u_prev = random_state(&space, 3, 1.0);
        let kappa = 0.05;
        let load = prob.load(0.3);
        let tan = prob.tangent(&params, &u, kappa);
        let dir = random_state(&space, 4, 1.0);
        let h = 1e-6;
        let plus = prob.residual(&params, &u.combine(1.0, &dir, h), &u_prev, kappa, &load);
        let minus = prob.residual(&params, &u.combine(1.0, &dir, -h), &u_prev, kappa, &load);
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        let exact = tan.mul_vec(&space.restrict(dir.coefficients()));
        let err: Vec<f64> = fd.iter().zip(&exact).map(|(a, b)| a - b).collect();
        assert!(norm2(&err) <= 1e-5 * norm2(&exact));
        assert!(tan.asymmetry() < 1e-12);
    }

    #[test]
    fn residual_is_energy_gradient() {
        let space = FeSpace::unit_square(3);
        let params = StructureParams::with_epsilon(1.3, 0.01, 0.2).unwrap();
        let prob = Problem::new(params, &space, &bump, Boundary::Homogeneous);
        let u = random_state(&space, 5, 0.5);
        let u_prev = random_state(&space, 6, 0.5);
        let load = prob.load(0.0);
        let r = prob.residual(&params, &u, &u_prev, 0.1, &load);
        let dir = random_state(&space, 7, 1.0);
        let h = 1e-6;
        let jp = prob.step_energy(&params, &u.combine(1.0, &dir, h), &u_prev, 0.1, &load);
        let jm = prob.step_energy(&params, &u.combine(1.0, &dir, -h), &u_prev, 0.1, &load);
        let fd = (jp - jm) / (2.0 * h);
        let exact = dot(&r, &space.restrict(dir.coefficients()));
        assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0));
    }

    #[test]
    fn zero_data_stays_zero() {
        let space = FeSpace::unit_square(4);
        let params = StructureParams::new(1.5, 0.0).unwrap();
        let prob = Problem::new(params, &space, &zero_force, Boundary::Homogeneous);
        let zero = FeFunction::zeros(&space);
        let (u, rep) = prob.implicit_step(&zero, 0.1, 0.1, &NewtonOptions::default()).unwrap();
        assert!(rep.newton_iterations <= 1);
        assert!(u.coefficients().iter().all(|&c| c == 0.0));
        assert_eq!(rep.epsilon, DEGENERATE_EPSILON);
    }

    #[test]
    fn linear_problem_takes_one_iteration() {
        let space = FeSpace::unit_square(8);
        for delta in [0.0, 0.5] {
            let params = StructureParams::new(2.0, delta).unwrap();
            let prob = Problem::new(params, &space, &bump, Boundary::Homogeneous);
            let prev = random_state(&space, 8, 1.0);
            let (_, rep) = prob.implicit_step(&prev, 0.2, 0.05, &NewtonOptions::default()).unwrap();
            assert_eq!(rep.newton_iterations, 1);
            assert!(rep.final_residual_norm <= 1e-12);
        }
    }
}
