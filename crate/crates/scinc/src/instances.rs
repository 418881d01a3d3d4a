//! The three problem-class front ends over the two-phase solver: coupled
//! saddle systems, primal composite minimization over a barriered domain,
//! and dual conic problems with primal-solution recovery.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::barrier::BarrierFn;
use crate::error::{Error, Result};
use crate::linalg::{sym_mat, sym_vec, symmetrize, Metric};
use crate::newton::{
    two_phase_solve, Phase1Strategy, Schedule, SolveOptions, SolveOutput,
};
use crate::oper::Operator;
use crate::prox::ProxFn;

/// Checks that a schedule was built for this barrier's parameter.
fn check_schedule_nu(sched: &Schedule, nu: f64) -> Result<()> {
    if (sched.nu - nu).abs() > 1e-9 * (1.0 + nu) {
        return Err(Error::Usage(format!(
            "schedule was built for ν = {} but the problem has ν = {}",
            sched.nu, nu
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Saddle systems
// ---------------------------------------------------------------------------

/// A linear convex-concave saddle problem
/// `min_y max_x { ⟨y, Lx⟩ − g(x) − ψ-terms }` smoothed by barriers `f` on
/// the x-domain and `φ` on the y-domain, solved through the monotone
/// operator `A(x,y) = [∂g(x) − Lᵀy; ∂ψ(y) + Lx]`.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    g: ProxFn,
    psi: ProxFn,
    f: BarrierFn,
    phi: BarrierFn,
    coupling: DMatrix<f64>,
}

/// Result of a saddle solve: the two blocks plus the raw solver output.
#[derive(Debug, Clone)]
pub struct SaddleSolution {
    /// Primal block of the solution.
    pub x: DVector<f64>,
    /// Dual block of the solution.
    pub y: DVector<f64>,
    /// Full solver output (status, trace, residual report).
    pub output: SolveOutput,
}

impl SaddleProblem {
    /// Builds and dimension-checks a saddle problem. `coupling` maps the
    /// x-block to the y-block (rows = y dimension).
    pub fn new(
        g: ProxFn,
        psi: ProxFn,
        f: BarrierFn,
        phi: BarrierFn,
        coupling: DMatrix<f64>,
    ) -> Result<SaddleProblem> {
        if g.dim() != f.dim() {
            return Err(Error::Dimension(format!(
                "g acts on dimension {} but the x-barrier on {}",
                g.dim(),
                f.dim()
            )));
        }
        if psi.dim() != phi.dim() {
            return Err(Error::Dimension(format!(
                "ψ acts on dimension {} but the y-barrier on {}",
                psi.dim(),
                phi.dim()
            )));
        }
        if coupling.ncols() != g.dim() || coupling.nrows() != psi.dim() {
            return Err(Error::Dimension(format!(
                "coupling is {}×{}, expected {}×{}",
                coupling.nrows(),
                coupling.ncols(),
                psi.dim(),
                g.dim()
            )));
        }
        Ok(SaddleProblem {
            g,
            psi,
            f,
            phi,
            coupling,
        })
    }

    /// Dimension of the x-block.
    pub fn x_dim(&self) -> usize {
        self.g.dim()
    }

    /// Dimension of the y-block.
    pub fn y_dim(&self) -> usize {
        self.psi.dim()
    }

    /// Combined barrier parameter `ν = ν_f + ν_φ`.
    pub fn nu(&self) -> f64 {
        self.f.nu() + self.phi.nu()
    }

    /// The product-domain barrier `F(x, y) = f(x) + φ(y)`.
    pub fn barrier(&self) -> BarrierFn {
        BarrierFn::sum(vec![self.f.clone(), self.phi.clone()])
    }

    /// The saddle block operator.
    pub fn operator(&self) -> Result<Operator> {
        Operator::saddle(self.g.clone(), self.psi.clone(), self.coupling.clone())
    }

    /// The coupling matrix.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// A starting point interior to both barrier domains and inside
    /// `dom g × dom ψ`. Starts from the barriers' canonical interior
    /// points and, where a block lands outside its nonsmooth term's
    /// effective domain, replaces it with the domain projection. Returns
    /// `None` when no such point can be produced automatically.
    pub fn default_start(&self) -> Option<DVector<f64>> {
        let mut z = self.barrier().interior_point()?;
        let nx = self.x_dim();
        let ny = self.y_dim();

        let x0 = z.rows(0, nx).into_owned();
        if !self.g.eval(&x0).is_finite() {
            let proj = self.g.domain_project(&x0).ok()?;
            z.rows_mut(0, nx).copy_from(&proj);
        }
        let y0 = z.rows(nx, ny).into_owned();
        if !self.psi.eval(&y0).is_finite() {
            let proj = self.psi.domain_project(&y0).ok()?;
            z.rows_mut(nx, ny).copy_from(&proj);
        }

        if self.barrier().in_domain(&z) { Some(z) } else { None }
    }

    /// Schedule with the library defaults sized for this problem.
    pub fn default_schedule(&self) -> Result<Schedule> {
        let barrier = self.barrier();
        Schedule::with_defaults(barrier.nu(), barrier.kappa())
    }
}

/// Runs the two-phase solver on a saddle problem and splits the solution
/// into its blocks. The starting point defaults to the barriers' interior
/// points.
pub fn solve_saddle(
    problem: &SaddleProblem,
    sched: &Schedule,
    eps: f64,
    start: Option<&DVector<f64>>,
    phase1: Phase1Strategy,
    options: Option<&SolveOptions>,
) -> Result<SaddleSolution> {
    let barrier = problem.barrier();
    check_schedule_nu(sched, barrier.nu())?;
    let op = problem.operator()?;
    let z0 = match start {
        Some(z) => z.clone(),
        None => problem.default_start().ok_or_else(|| {
            Error::Init("no default interior point for this saddle domain".into())
        })?,
    };
    let output = two_phase_solve(&barrier, &op, &z0, sched, eps, phase1, options)?;
    let nx = problem.x_dim();
    let ny = problem.y_dim();
    Ok(SaddleSolution {
        x: output.z.rows(0, nx).into_owned(),
        y: output.z.rows(nx, ny).into_owned(),
        output,
    })
}

/// One exact linearized-resolvent step for the spectrahedron saddle
/// structure: `f` the log-det barrier on `S^n`, `φ` the unit-box barrier
/// on `R^p`, `g(X) = δ_{trace=1}(X) − ⟨objective, X⟩`, coupling `L`
/// (`p × n²`, rows are vectorized symmetric matrices).
///
/// Eliminating the smooth y-block of the anchored system leaves a linear
/// solve in the thickened metric `H = ∇²f(X) + t⁻²Lᵀ∇²φ(y)⁻¹L` plus a
/// scalar multiplier enforcing the trace constraint:
///
/// `X* = mat[((1 + tr(H⁻¹h)) / tr(H⁻¹vec I))·H⁻¹vec I − H⁻¹h]`,
/// `y* = y − ∇²φ(y)⁻¹(∇φ(y) + t⁻¹L vec X*)`,
///
/// with `h = ∇f(X) − ∇²f(X)vec(X) − t⁻¹Lᵀ(y − ∇²φ(y)⁻¹∇φ(y)) −
/// t⁻¹vec(objective)`.
pub fn saddle_closed_form_step(
    x_mat: &DMatrix<f64>,
    y: &DVector<f64>,
    t: f64,
    objective: &DMatrix<f64>,
    coupling: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = x_mat.nrows();
    let p = y.len();
    if x_mat.ncols() != n || objective.nrows() != n || objective.ncols() != n {
        return Err(Error::Dimension(
            "spectrahedron step needs square X and objective matrices of equal order".into(),
        ));
    }
    if coupling.nrows() != p || coupling.ncols() != n * n {
        return Err(Error::Dimension(format!(
            "coupling is {}×{}, expected {}×{}",
            coupling.nrows(),
            coupling.ncols(),
            p,
            n * n
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!(
            "homotopy parameter must be positive and finite, got {t}"
        )));
    }
    let f = BarrierFn::logdet(n);
    let phi = BarrierFn::unit_box(p);
    let xv = sym_vec(&symmetrize(x_mat));
    let grad_f = f.gradient(&xv)?;
    let qx = f.metric(&xv)?;
    let grad_phi = phi.gradient(y)?;
    let qy = phi.metric(y)?;
    let u = y - qy.solve(&grad_phi)?;

    // H = ∇²f + t⁻²LᵀQ_y⁻¹L, assembled densely.
    let lt = coupling.transpose();
    let mut qyinv_l = DMatrix::zeros(p, n * n);
    for j in 0..n * n {
        qyinv_l.set_column(j, &qy.solve(&coupling.column(j).into_owned())?);
    }
    let h_dense = symmetrize(&(qx.to_dense() + &lt * &qyinv_l / (t * t)));
    let chol = Cholesky::new(h_dense).ok_or_else(|| {
        Error::Numeric("thickened metric of the spectrahedron step is not positive definite".into())
    })?;

    let h_vec = &grad_f - qx.hess_apply(&xv) - &lt * &u / t - sym_vec(objective) / t;
    let q_sol = chol.solve(&h_vec);
    let p_sol = chol.solve(&sym_vec(&DMatrix::<f64>::identity(n, n)));
    let tr_q = sym_mat(n, &q_sol).trace();
    let tr_p = sym_mat(n, &p_sol).trace();
    if !tr_p.is_finite() || tr_p.abs() < 1e-300 {
        return Err(Error::Numeric(
            "trace multiplier of the spectrahedron step is degenerate".into(),
        ));
    }
    let x_star_vec = &p_sol * ((1.0 + tr_q) / tr_p) - &q_sol;
    let x_star = sym_mat(n, &x_star_vec);
    let y_star = y - qy.solve(&(&grad_phi + coupling * &x_star_vec / t))?;
    Ok((x_star, y_star))
}

// ---------------------------------------------------------------------------
// Primal composite minimization
// ---------------------------------------------------------------------------

/// Composite minimization `min { g(x) : x ∈ X }` with `X` the closure of a
/// barrier domain: the operator is `∂g` and the path follows
/// `0 ∈ t∇f(x) + ∂g(x)`.
#[derive(Debug, Clone)]
pub struct PrimalProblem {
    g: ProxFn,
    f: BarrierFn,
    witness: DVector<f64>,
}

impl PrimalProblem {
    /// Builds the problem and witnesses `int X ∩ dom g ≠ ∅` by sampling:
    /// the barrier's interior point is used directly when `g` is finite
    /// there, otherwise its prox projection into `dom g` must stay
    /// interior.
    pub fn new(g: ProxFn, f: BarrierFn) -> Result<PrimalProblem> {
        if g.dim() != f.dim() {
            return Err(Error::Dimension(format!(
                "g acts on dimension {} but the barrier on {}",
                g.dim(),
                f.dim()
            )));
        }
        let anchor = f.interior_point().ok_or_else(|| {
            Error::Init("no interior point known for the domain barrier".into())
        })?;
        let witness = if g.eval(&anchor).is_finite() {
            anchor
        } else {
            let moved = g.prox(&Metric::identity(g.dim()), &anchor)?;
            if !f.in_domain(&moved) || !g.eval(&moved).is_finite() {
                return Err(Error::Domain(
                    "could not witness a point of int X ∩ dom g".into(),
                ));
            }
            moved
        };
        Ok(PrimalProblem { g, f, witness })
    }

    /// The composite objective term.
    pub fn objective(&self) -> &ProxFn {
        &self.g
    }

    /// The domain barrier.
    pub fn barrier(&self) -> &BarrierFn {
        &self.f
    }

    /// The sampled point of `int X ∩ dom g` found at construction.
    pub fn witness(&self) -> &DVector<f64> {
        &self.witness
    }

    /// Objective value `g(x)`.
    pub fn objective_value(&self, x: &DVector<f64>) -> f64 {
        self.g.eval(x)
    }

    /// Schedule with the library defaults sized for this problem.
    pub fn default_schedule(&self) -> Result<Schedule> {
        Schedule::with_defaults(self.f.nu(), self.f.kappa())
    }
}

/// Runs the two-phase solver on a primal composite problem.
///
/// Termination uses `M₀·t ≤ ε` by default; `termination_constant`
/// substitutes a user-supplied constant `Δ` so the stop rule becomes
/// `Δ·t ≤ ε` (the literature's sharper Δ(β,ν) has no formula here, so it
/// is a hook rather than a computation).
pub fn solve_primal(
    problem: &PrimalProblem,
    sched: &Schedule,
    eps: f64,
    start: Option<&DVector<f64>>,
    termination_constant: Option<f64>,
    phase1: Phase1Strategy,
    options: Option<&SolveOptions>,
) -> Result<(DVector<f64>, SolveOutput)> {
    check_schedule_nu(sched, problem.f.nu())?;
    let constant = termination_constant.unwrap_or(sched.m0);
    if !(constant > 0.0) || !constant.is_finite() {
        return Err(Error::Usage(format!(
            "termination constant must be positive and finite, got {constant}"
        )));
    }
    let eps_eff = eps * sched.m0 / constant;
    let op = Operator::subdiff(problem.g.clone());
    let z0 = match start {
        Some(z) => z.clone(),
        None => problem.witness.clone(),
    };
    let output = two_phase_solve(&problem.f, &op, &z0, sched, eps_eff, phase1, options)?;
    Ok((output.z.clone(), output))
}

// ---------------------------------------------------------------------------
// Dual conic problems with primal recovery
// ---------------------------------------------------------------------------

/// Conically constrained linear problem
/// `max { ⟨c, x⟩ − g(s) : Lx − s = b, x ∈ K }`, solved through its dual:
/// the path-following operator is `∂g* + b` on the dual variable `y`, and
/// the barrier is `φ(y) = f*(c − L*y)` over the strictly dual-feasible
/// set.
#[derive(Debug, Clone)]
pub struct DualConicProblem {
    c_obj: DVector<f64>,
    b: DVector<f64>,
    coupling: DMatrix<f64>,
    g: ProxFn,
    f: BarrierFn,
    dual_barrier: BarrierFn,
}

/// Primal pair recovered from a dual iterate, with the three recovery
/// residuals.
#[derive(Debug, Clone)]
pub struct RecoveredPrimal {
    /// Recovered cone variable, strictly interior to `K`.
    pub x: DVector<f64>,
    /// Recovered slack, the projection of `Lx − b` onto `∂g*(y)`.
    pub s: DVector<f64>,
    /// Homotopy parameter the pair was recovered at.
    pub t: f64,
    /// Fenchel equality gap `|g(s) + g*(y) − ⟨y, s⟩|`, certifying the
    /// subgradient inclusion `y ∈ ∂g(s)`.
    pub subgradient_gap: f64,
    /// `‖L*y − c‖` in the dual local norm of the cone barrier at `x`
    /// (bounded by `√ν·t`).
    pub dual_residual: f64,
    /// `‖Lx − s − b‖` in the dual local norm of the dual-feasible barrier
    /// at `y` (bounded by `θ(c,β)·t`).
    pub primal_residual: f64,
    /// Primal objective `⟨c, x⟩ − g(s)`.
    pub objective: f64,
}

/// Result of a dual conic solve.
#[derive(Debug, Clone)]
pub struct DualConicSolution {
    /// Primal pair recovered at the final iterate.
    pub primal: RecoveredPrimal,
    /// Final dual iterate.
    pub y: DVector<f64>,
    /// Full solver output (status, trace, residual report).
    pub output: SolveOutput,
}

impl DualConicProblem {
    /// Builds and validates the problem: dimensions, log-homogeneity of the
    /// cone barrier, and full row rank of the coupling (checked while
    /// constructing the dual-feasible barrier).
    pub fn new(
        c_obj: DVector<f64>,
        b: DVector<f64>,
        coupling: DMatrix<f64>,
        g: ProxFn,
        f: BarrierFn,
    ) -> Result<DualConicProblem> {
        if f.dim() != coupling.ncols() || c_obj.len() != coupling.ncols() {
            return Err(Error::Dimension(format!(
                "cone space mismatch: barrier dim {}, objective {}, coupling cols {}",
                f.dim(),
                c_obj.len(),
                coupling.ncols()
            )));
        }
        if b.len() != coupling.nrows() || g.dim() != coupling.nrows() {
            return Err(Error::Dimension(format!(
                "dual space mismatch: b {}, g dim {}, coupling rows {}",
                b.len(),
                g.dim(),
                coupling.nrows()
            )));
        }
        let dual_barrier =
            BarrierFn::dual_feasible(f.clone(), coupling.clone(), c_obj.clone())?;
        Ok(DualConicProblem {
            c_obj,
            b,
            coupling,
            g,
            f,
            dual_barrier,
        })
    }

    /// Dimension of the cone variable `x`.
    pub fn cone_dim(&self) -> usize {
        self.coupling.ncols()
    }

    /// Dimension of the dual variable `y`.
    pub fn dual_dim(&self) -> usize {
        self.coupling.nrows()
    }

    /// Barrier parameter of the cone barrier (and of the dual barrier).
    pub fn nu(&self) -> f64 {
        self.f.nu()
    }

    /// The barrier over the strictly dual-feasible set.
    pub fn dual_barrier(&self) -> &BarrierFn {
        &self.dual_barrier
    }

    /// The cone barrier.
    pub fn cone_barrier(&self) -> &BarrierFn {
        &self.f
    }

    /// Linear objective coefficients on the cone variable.
    pub fn objective_coefficients(&self) -> &DVector<f64> {
        &self.c_obj
    }

    /// Right-hand side of the linear constraint.
    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    /// The coupling matrix `L` (dual dim × cone dim).
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// The slack function `g`.
    pub fn slack_fn(&self) -> &ProxFn {
        &self.g
    }

    /// Dual objective `g*(y) + ⟨b, y⟩`.
    pub fn dual_objective(&self, y: &DVector<f64>) -> f64 {
        self.g.conjugate_value(y) + self.b.dot(y)
    }

    /// The path-following operator `∂g* + b` on the dual variable.
    pub fn dual_operator(&self) -> Operator {
        Operator::subdiff(ProxFn::conjugate_with_shift(self.g.clone(), self.b.clone()))
    }

    /// Schedule with the library defaults sized for this problem.
    pub fn default_schedule(&self) -> Result<Schedule> {
        Schedule::with_defaults(self.dual_barrier.nu(), self.dual_barrier.kappa())
    }

    /// Finds a strictly dual-feasible start by sweeping `±ρ·L(e_K)` over
    /// doubling scales `ρ`, where `e_K` is the cone barrier's central ray
    /// (all-ones / identity). Errors cleanly when the sweep fails.
    pub fn feasible_start(&self) -> Result<DVector<f64>> {
        let e_k = self.f.interior_point().ok_or_else(|| {
            Error::Init("cone barrier exposes no central ray for initialization".into())
        })?;
        let dir = &self.coupling * &e_k;
        for expo in -2..=12 {
            let rho = 2f64.powi(expo);
            for sign in [-1.0, 1.0] {
                let y = &dir * (sign * rho);
                if self.dual_barrier.in_domain(&y) {
                    return Ok(y);
                }
            }
        }
        Err(Error::Init(
            "no strictly dual-feasible start found along ±ρ·L(e_K); supply one explicitly"
                .into(),
        ))
    }
}

/// Recovers a primal pair from a dual iterate `y` at homotopy parameter
/// `t`: `x = ∇f*((c − L*y)/t)` lands strictly inside `K`, and
/// `s = π_{∂g*(y)}(Lx − b)` projects the constraint image onto the exposed
/// face of `g*`. All three recovery residuals are computed and attached.
pub fn recover_primal(
    y: &DVector<f64>,
    t: f64,
    problem: &DualConicProblem,
) -> Result<RecoveredPrimal> {
    if y.len() != problem.dual_dim() {
        return Err(Error::Dimension(format!(
            "dual point has length {}, expected {}",
            y.len(),
            problem.dual_dim()
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!(
            "homotopy parameter must be positive and finite, got {t}"
        )));
    }
    let conj = problem.f.conjugate()?;
    let w = (&problem.c_obj - problem.coupling.transpose() * y) / t;
    if !conj.in_domain(&w) {
        return Err(Error::Domain(
            "scaled dual slack (c − L*y)/t is outside the conjugate barrier domain".into(),
        ));
    }
    let x = conj.gradient(&w)?;
    if !problem.f.in_domain(&x) {
        return Err(Error::Domain(
            "recovered point failed the strict cone-interior check".into(),
        ));
    }
    let lx_b = &problem.coupling * &x - &problem.b;
    let face = problem.g.conjugate_subdiff(y)?;
    let s = face.project_euclidean(&lx_b);
    let subgradient_gap =
        (problem.g.eval(&s) + problem.g.conjugate_value(y) - y.dot(&s)).abs();
    let dual_residual = problem
        .f
        .metric(&x)?
        .dual_local_norm(&(problem.coupling.transpose() * y - &problem.c_obj))?;
    let primal_residual = problem
        .dual_barrier
        .metric(y)?
        .dual_local_norm(&(&lx_b - &s))?;
    let objective = problem.c_obj.dot(&x) - problem.g.eval(&s);
    Ok(RecoveredPrimal {
        x,
        s,
        t,
        subgradient_gap,
        dual_residual,
        primal_residual,
        objective,
    })
}

/// Runs the two-phase solver on the dual of a conic problem and recovers
/// the primal pair at termination. The stop rule is `√ν·t ≤ ε`
/// (implemented by rescaling the solver's `M₀·t ≤ ε` threshold).
pub fn solve_dual_conic(
    problem: &DualConicProblem,
    sched: &Schedule,
    eps: f64,
    start: Option<&DVector<f64>>,
    phase1: Phase1Strategy,
    options: Option<&SolveOptions>,
) -> Result<DualConicSolution> {
    let barrier = problem.dual_barrier.clone();
    check_schedule_nu(sched, barrier.nu())?;
    let y0 = match start {
        Some(y) => {
            if !barrier.in_domain(y) {
                return Err(Error::Init(
                    "supplied start is not strictly dual feasible".into(),
                ));
            }
            y.clone()
        }
        None => problem.feasible_start()?,
    };
    let eps_eff = eps * sched.m0 / barrier.nu().sqrt();
    let op = problem.dual_operator();
    let output = two_phase_solve(&barrier, &op, &y0, sched, eps_eff, phase1, options)?;
    let primal = recover_primal(&output.z, output.final_t, problem)?;
    if primal.subgradient_gap > crate::tol::MEMBERSHIP_RESIDUAL {
        log::warn!(
            "recovered subgradient inclusion gap {} exceeds {}",
            primal.subgradient_gap,
            crate::tol::MEMBERSHIP_RESIDUAL
        );
    }
    Ok(DualConicSolution {
        primal,
        y: output.z.clone(),
        output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::{s_mapping, theta_recovery, beta_upper_limit};
    use crate::oper::eps_solution_residual;
    use crate::rng::Rng;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    fn random_symmetric(n: usize, rng: &mut Rng) -> DMatrix<f64> {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.gauss());
        symmetrize(&raw)
    }

    /// Coupling rows are vectorized random symmetric matrices.
    fn random_sym_coupling(p: usize, n: usize, rng: &mut Rng) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(p, n * n);
        for j in 0..p {
            let m = random_symmetric(n, rng);
            l.set_row(j, &sym_vec(&m).transpose());
        }
        l
    }

    fn lambda_max(m: &DMatrix<f64>) -> f64 {
        SymmetricEigen::new(m.clone()).eigenvalues.max()
    }

    /// The spectrahedron saddle instance used across several tests:
    /// `g(X) = δ_{trace=1}(X) − ⟨C, X⟩` with log-det and unit-box barriers.
    fn spectrahedron_saddle(
        c_mat: &DMatrix<f64>,
        coupling: &DMatrix<f64>,
    ) -> SaddleProblem {
        let n = c_mat.nrows();
        let p = coupling.nrows();
        let g = ProxFn::tilted(ProxFn::trace_one(n), -sym_vec(c_mat));
        SaddleProblem::new(
            g,
            ProxFn::zero(p),
            BarrierFn::logdet(n),
            BarrierFn::unit_box(p),
            coupling.clone(),
        )
        .unwrap()
    }

    #[test]
    fn decoupled_zero_saddle_returns_analytic_centers() {
        // L = 0 and g = ψ = 0: the operator vanishes, the central path is
        // constant at the product analytic center, and the solve terminates
        // with the residual below ε.
        let problem = SaddleProblem::new(
            ProxFn::zero(2),
            ProxFn::zero(3),
            BarrierFn::unit_box(2),
            BarrierFn::unit_box(3),
            DMatrix::zeros(3, 2),
        )
        .unwrap();
        let sched = problem.default_schedule().unwrap();
        let eps = 1e-8;
        let start = DVector::from_column_slice(&[0.4, -0.2, 0.3, 0.1, -0.5]);
        let sol = solve_saddle(
            &problem,
            &sched,
            eps,
            Some(&start),
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        let resid = sol.output.residual.expect("residual report");
        assert!(resid.value <= eps, "residual {} > {eps}", resid.value);
        assert!(sol.x.norm() < 0.1, "x strayed from the center: {}", sol.x);
        assert!(sol.y.norm() < 0.1, "y strayed from the center: {}", sol.y);
    }

    #[test]
    fn closed_form_step_always_hits_the_trace_constraint() {
        let mut rng = Rng::from_seed(271);
        for _ in 0..10 {
            let n = 3;
            let p = 2;
            let c_mat = random_symmetric(n, &mut rng);
            let coupling = random_sym_coupling(p, n, &mut rng);
            let x0 = {
                let b = random_symmetric(n, &mut rng);
                &b * b.transpose() + DMatrix::<f64>::identity(n, n) * 0.8
            };
            let y0 = DVector::from_iterator(p, (0..p).map(|_| 0.8 * (rng.uniform() - 0.5)));
            let t = 0.2 + rng.uniform();
            let (x_star, _) =
                saddle_closed_form_step(&x0, &y0, t, &c_mat, &coupling).unwrap();
            assert_relative_eq!(x_star.trace(), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn closed_form_step_decouples_without_coupling() {
        // L = 0: X* is the prox of the tilted trace indicator in the
        // log-det metric at the Newton anchor, and y* is the plain Newton
        // step of the box barrier.
        let mut rng = Rng::from_seed(277);
        let n = 3;
        let p = 2;
        let c_mat = random_symmetric(n, &mut rng);
        let coupling = DMatrix::zeros(p, n * n);
        let x0 = {
            let b = random_symmetric(n, &mut rng);
            &b * b.transpose() + DMatrix::<f64>::identity(n, n) * 0.5
        };
        let y0 = DVector::from_column_slice(&[0.3, -0.4]);
        let t = 0.7;
        let (x_star, y_star) =
            saddle_closed_form_step(&x0, &y0, t, &c_mat, &coupling).unwrap();

        let f = BarrierFn::logdet(n);
        let xv = sym_vec(&x0);
        let metric = f.metric(&xv).unwrap();
        let grad = f.gradient(&xv).unwrap();
        let g = ProxFn::tilted(ProxFn::trace_one(n), -sym_vec(&c_mat));
        let anchor = &xv - metric.solve(&grad).unwrap();
        let expect_x = g.prox(&metric.scale(t).unwrap(), &anchor).unwrap();
        assert!((sym_vec(&x_star) - expect_x).norm() < 1e-8);

        let phi = BarrierFn::unit_box(p);
        let expect_y = &y0
            - phi
                .metric(&y0)
                .unwrap()
                .solve(&phi.gradient(&y0).unwrap())
                .unwrap();
        assert!((y_star - expect_y).norm() < 1e-10);
    }

    #[test]
    fn closed_form_step_satisfies_the_anchored_optimality_system() {
        // Plugging (X*, y*) back into the linearized system: the y-block
        // must vanish, and the x-block must be a multiple of vec(I) (the
        // trace constraint's normal direction) after accounting for the
        // skew and tilt terms.
        let mut rng = Rng::from_seed(281);
        let n = 3;
        let p = 2;
        let c_mat = random_symmetric(n, &mut rng);
        let coupling = random_sym_coupling(p, n, &mut rng);
        let x0 = {
            let b = random_symmetric(n, &mut rng);
            &b * b.transpose() + DMatrix::<f64>::identity(n, n)
        };
        let y0 = DVector::from_column_slice(&[0.2, -0.1]);
        let t = 0.5;
        let (x_star, y_star) =
            saddle_closed_form_step(&x0, &y0, t, &c_mat, &coupling).unwrap();

        let f = BarrierFn::logdet(n);
        let phi = BarrierFn::unit_box(p);
        let xv = sym_vec(&x0);
        let xs = sym_vec(&x_star);
        let qx = f.metric(&xv).unwrap();
        let qy = phi.metric(&y0).unwrap();
        // y-block: t[∇φ(y⁰) + Q_y(y* − y⁰)] + L·vec(X*) = 0.
        let ry = (phi.gradient(&y0).unwrap() + qy.hess_apply(&(&y_star - &y0))) * t
            + &coupling * &xs;
        assert!(ry.norm() <= 1e-8, "y-block residual {}", ry.norm());
        // x-block: t[∇f(X⁰) + Q_x(X* − X⁰)] − Lᵀy* − vec(C) ∈ −N_{trace=1},
        // i.e. proportional to vec(I).
        let rx = (f.gradient(&xv).unwrap() + qx.hess_apply(&(&xs - &xv))) * t
            - coupling.transpose() * &y_star
            - sym_vec(&c_mat);
        let eye = sym_vec(&DMatrix::<f64>::identity(n, n));
        let tangential = &rx - &eye * (rx.dot(&eye) / eye.norm_squared());
        assert!(
            tangential.norm() <= 1e-8,
            "x-block residual off the normal direction: {}",
            tangential.norm()
        );
    }

    #[test]
    fn closed_form_step_matches_the_generic_subsolver() {
        // The generic path solves the same anchored system through the
        // operator resolvent (Schur elimination + affine prox); both code
        // paths must agree to tight tolerance.
        let mut rng = Rng::from_seed(283);
        let n = 3;
        let p = 2;
        let c_mat = random_symmetric(n, &mut rng);
        let coupling = random_sym_coupling(p, n, &mut rng);
        let problem = spectrahedron_saddle(&c_mat, &coupling);
        let x0 = {
            let b = random_symmetric(n, &mut rng);
            &b * b.transpose() + DMatrix::<f64>::identity(n, n) * 0.9
        };
        let y0 = DVector::from_column_slice(&[0.25, -0.15]);
        let t = 0.6;
        let (x_star, y_star) =
            saddle_closed_form_step(&x0, &y0, t, &c_mat, &coupling).unwrap();

        let barrier = problem.barrier();
        let op = problem.operator().unwrap();
        let mut z = DVector::zeros(n * n + p);
        z.rows_mut(0, n * n).copy_from(&sym_vec(&x0));
        z.rows_mut(n * n, p).copy_from(&y0);
        let (w, cert) = s_mapping(&barrier, &op, &z, &z, t, 0.0).unwrap();
        assert_eq!(cert.delta_achieved, 0.0);
        let diff_x = (w.rows(0, n * n).into_owned() - sym_vec(&x_star)).norm();
        let diff_y = (w.rows(n * n, p).into_owned() - y_star).norm();
        assert!(diff_x < 1e-8, "x blocks differ by {diff_x}");
        assert!(diff_y < 1e-8, "y blocks differ by {diff_y}");
    }

    #[test]
    fn saddle_solve_matches_grid_search_on_the_spectrahedron_instance() {
        // min over the box of λ_max(C + Σ y_j L_j), oracle = exhaustive
        // 101×101 grid over [−1, 1]².
        let mut rng = Rng::from_seed(293);
        let n = 3;
        let p = 2;
        let c_mat = random_symmetric(n, &mut rng);
        let coupling = random_sym_coupling(p, n, &mut rng);
        let problem = spectrahedron_saddle(&c_mat, &coupling);
        let sched = problem.default_schedule().unwrap();
        let sol = solve_saddle(
            &problem,
            &sched,
            1e-5,
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();

        let assemble = |y: &DVector<f64>| -> DMatrix<f64> {
            let lty = coupling.transpose() * y;
            &c_mat + sym_mat(n, &lty)
        };
        let solver_value = lambda_max(&assemble(&sol.y));
        let mut grid_best = f64::INFINITY;
        for i in 0..=100 {
            for j in 0..=100 {
                let y = DVector::from_column_slice(&[
                    -1.0 + 0.02 * i as f64,
                    -1.0 + 0.02 * j as f64,
                ]);
                grid_best = grid_best.min(lambda_max(&assemble(&y)));
            }
        }
        assert!(
            (solver_value - grid_best).abs() <= 1e-3,
            "solver {solver_value} vs grid {grid_best}"
        );
    }

    #[test]
    fn saddle_termination_residual_scales_with_the_coupling() {
        let mut rng = Rng::from_seed(307);
        let n = 2;
        let p = 1;
        let c_mat = random_symmetric(n, &mut rng);
        let coupling = random_sym_coupling(p, n, &mut rng);
        let problem = spectrahedron_saddle(&c_mat, &coupling);
        let sched = problem.default_schedule().unwrap();
        let eps = 1e-6;
        let sol = solve_saddle(
            &problem,
            &sched,
            eps,
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        let barrier = problem.barrier();
        let op = problem.operator().unwrap();
        let report = eps_solution_residual(&op, &barrier, &sol.output.z).unwrap();
        let factor = 1.0 + coupling.norm();
        assert!(
            report.value <= eps * factor,
            "residual {} > ε(1+‖L‖) = {}",
            report.value,
            eps * factor
        );
    }

    #[test]
    fn saddle_rejects_a_schedule_sized_for_another_problem() {
        let problem = SaddleProblem::new(
            ProxFn::zero(2),
            ProxFn::zero(2),
            BarrierFn::unit_box(2),
            BarrierFn::unit_box(2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let wrong = Schedule::with_defaults(3.0, 1.0).unwrap();
        let err = solve_saddle(
            &problem,
            &wrong,
            1e-6,
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn primal_with_zero_objective_keeps_the_decrement_invariant() {
        // g = 0 over the unit box: every interior point is optimal in the
        // limit; the meaningful check is that the proximity invariant
        // λ ≤ β holds at every accepted iterate.
        let problem = PrimalProblem::new(ProxFn::zero(3), BarrierFn::unit_box(3)).unwrap();
        let sched = problem.default_schedule().unwrap();
        let start = DVector::from_column_slice(&[0.2, -0.35, 0.5]);
        let (_, out) = solve_primal(
            &problem,
            &sched,
            1e-6,
            Some(&start),
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        for row in out.trace.phase_rows(2) {
            assert!(
                row.lambda <= sched.beta + 1e-9,
                "iteration {} left the neighborhood: λ = {}",
                row.k,
                row.lambda
            );
        }
    }

    #[test]
    fn primal_scalar_instance_tracks_the_hand_central_path() {
        // X = [0, ∞), f = −log x, g(x) = x: stationarity t(−1/x) + 1 = 0
        // gives x*_t = t exactly; the final iterate must track it within
        // the neighborhood radius.
        let problem = PrimalProblem::new(
            ProxFn::linear(DVector::from_element(1, 1.0)),
            BarrierFn::orthant(1),
        )
        .unwrap();
        let sched = problem.default_schedule().unwrap();
        let eps = 1e-5;
        let (x, out) = solve_primal(
            &problem,
            &sched,
            eps,
            None,
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        assert!(out.final_t * sched.m0 <= eps * 1.0000001);
        let expected = out.final_t;
        assert!(
            (x[0] - expected).abs() <= sched.beta * expected,
            "x = {} strayed from x*_t = {expected}",
            x[0]
        );
    }

    #[test]
    fn primal_termination_constant_hook_rescales_the_threshold() {
        let problem = PrimalProblem::new(
            ProxFn::linear(DVector::from_element(1, 1.0)),
            BarrierFn::orthant(1),
        )
        .unwrap();
        let sched = problem.default_schedule().unwrap();
        let eps = 1e-4;
        let delta_const = 2.0 * sched.m0;
        let (_, out) = solve_primal(
            &problem,
            &sched,
            eps,
            None,
            Some(delta_const),
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        // Stop rule Δ·t ≤ ε with Δ = 2M₀ halves the final t threshold.
        assert!(out.final_t * delta_const <= eps * 1.0000001);
    }

    /// A small dual conic instance over the positive orthant with a box
    /// slack: L is 2×3 full row rank.
    fn small_orthant_dual() -> DualConicProblem {
        let coupling = DMatrix::from_row_slice(
            2,
            3,
            &[1.0, 0.5, 0.0, //
              0.2, 1.0, 0.7],
        );
        let c_obj = DVector::from_column_slice(&[-1.0, -2.0, -0.5]);
        let b = DVector::from_column_slice(&[0.3, -0.2]);
        let g = ProxFn::box_indicator(
            &DVector::from_element(2, -1.0),
            &DVector::from_element(2, 1.0),
        );
        DualConicProblem::new(c_obj, b, coupling, g, BarrierFn::orthant(3)).unwrap()
    }

    #[test]
    fn recovery_from_orthant_ones_direction() {
        // c − L*y = −t·1 ⇒ x = ∇f*(−1) = 1 (componentwise).
        let p = small_orthant_dual();
        let t = 0.3;
        let y = DVector::from_column_slice(&[0.4, -0.1]);
        let c_obj = p.coupling().transpose() * &y - DVector::from_element(3, t);
        let problem = DualConicProblem::new(
            c_obj,
            p.rhs().clone(),
            p.coupling().clone(),
            p.slack_fn().clone(),
            BarrierFn::orthant(3),
        )
        .unwrap();
        let rec = recover_primal(&y, t, &problem).unwrap();
        assert!((&rec.x - DVector::from_element(3, 1.0)).norm() < 1e-12);
        // Stationarity identity: c − L*y − t∇f(x) = 0.
        let grad = problem.cone_barrier().gradient(&rec.x).unwrap();
        let station = problem.objective_coefficients()
            - problem.coupling().transpose() * &y
            - grad * t;
        assert!(station.norm() <= 1e-8);
    }

    #[test]
    fn recovery_from_logdet_identity_direction() {
        // c − L*y = −t·vec(I) ⇒ X = ∇f*(−vec(I)) = I.
        let n = 2;
        let coupling = {
            let mut l = DMatrix::zeros(2, n * n);
            l.set_row(0, &sym_vec(&DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.0])).transpose());
            l.set_row(1, &sym_vec(&DMatrix::from_row_slice(2, 2, &[0.0, 0.4, 0.4, 1.0])).transpose());
            l
        };
        let y = DVector::from_column_slice(&[0.3, 0.2]);
        let t = 0.25;
        let eye = sym_vec(&DMatrix::<f64>::identity(n, n));
        let c_obj = coupling.transpose() * &y - &eye * t;
        let g = ProxFn::box_indicator(
            &DVector::from_element(2, -2.0),
            &DVector::from_element(2, 2.0),
        );
        let problem = DualConicProblem::new(
            c_obj,
            DVector::zeros(2),
            coupling,
            g,
            BarrierFn::logdet(n),
        )
        .unwrap();
        let rec = recover_primal(&y, t, &problem).unwrap();
        assert!((&rec.x - &eye).norm() < 1e-12);
        let grad = problem.cone_barrier().gradient(&rec.x).unwrap();
        let station = problem.objective_coefficients()
            - problem.coupling().transpose() * &y
            - grad * t;
        assert!(station.norm() <= 1e-8);
    }

    #[test]
    fn recovery_rejects_points_outside_the_conjugate_domain() {
        let p = small_orthant_dual();
        // Large positive components of c − L*y leave the conjugate domain.
        let y = DVector::from_column_slice(&[-100.0, -100.0]);
        let err = recover_primal(&y, 1.0, &p).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn dual_conic_solve_meets_the_recovery_bounds() {
        let problem = small_orthant_dual();
        let sched = problem.default_schedule().unwrap();
        let eps = 1e-4;
        let sol = solve_dual_conic(
            &problem,
            &sched,
            eps,
            None,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        let t = sol.primal.t;
        let nu = problem.nu();
        assert!(nu.sqrt() * t <= eps * 1.0000001, "stop rule violated");
        assert!(
            sol.primal.dual_residual <= nu.sqrt() * t * (1.0 + 1e-6),
            "dual residual {} > √ν·t = {}",
            sol.primal.dual_residual,
            nu.sqrt() * t
        );
        assert!(
            sol.primal.primal_residual <= sched.theta * t * (1.0 + 1e-6),
            "primal residual {} > θ·t = {}",
            sol.primal.primal_residual,
            sched.theta * t
        );
        assert!(sol.primal.subgradient_gap <= 1e-8);
        // Weak duality: dual objective dominates the recovered primal
        // objective up to the O(νt) smoothing gap.
        let dual_val = problem.dual_objective(&sol.y);
        let gap = dual_val - sol.primal.objective;
        assert!(gap >= -1e-8, "weak duality violated: gap {gap}");
        let lx_s_b =
            problem.coupling() * &sol.primal.x - &sol.primal.s - problem.rhs();
        let slack_bound = nu * t + sol.y.norm() * lx_s_b.norm() + 1e-8;
        assert!(
            gap <= slack_bound,
            "gap {gap} exceeds the smoothing bound {slack_bound}"
        );
    }

    #[test]
    fn dual_conic_initialization_failure_is_a_clean_error() {
        // Second cone coordinate never becomes negative along ±ρ·L(e_K),
        // so no strictly dual-feasible start exists on that ray.
        let coupling = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let c_obj = DVector::from_column_slice(&[0.0, 1.0]);
        let problem = DualConicProblem::new(
            c_obj,
            DVector::zeros(1),
            coupling,
            ProxFn::box_indicator(
                &DVector::from_element(1, -1.0),
                &DVector::from_element(1, 1.0),
            ),
            BarrierFn::orthant(2),
        )
        .unwrap();
        let err = problem.feasible_start().unwrap_err();
        assert!(matches!(err, Error::Init(_)));
    }

    #[test]
    fn dual_conic_rejects_rank_deficient_couplings() {
        let coupling = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let err = DualConicProblem::new(
            DVector::zeros(2),
            DVector::zeros(2),
            coupling,
            ProxFn::zero(2),
            BarrierFn::orthant(2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Init(_)));
    }

    #[test]
    fn recovery_residual_coefficient_stays_below_one_on_the_admissible_grid() {
        for ci in 1..=19 {
            let c = 0.05 * ci as f64;
            let limit = beta_upper_limit(c);
            for bi in 1..=19 {
                let beta = limit * 0.05 * bi as f64;
                let theta = theta_recovery(c, beta).unwrap();
                assert!(
                    theta <= 1.0 + 1e-12,
                    "θ({c}, {beta}) = {theta} exceeds 1"
                );
            }
        }
    }
}
