//! Path-following generalized Newton methods for barrier-smoothed monotone
//! inclusions `0 ∈ t∇F(z) + A(z)`: decrement evaluation, full / damped /
//! path-following steps, homotopy schedules with certified contraction
//! factors, a Phase-1 initializer, and the two-phase driver.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::barrier::BarrierFn;
use crate::error::{Error, Result};
use crate::oper::{eps_solution_residual, Operator, ResidualReport};
use crate::prox::InexactCertificate;
use crate::tol;

/// Dimension above which violated runtime bound checks downgrade from
/// errors to warnings (accumulated floating-point slack grows with size).
const STRICT_ASSERT_DIM: usize = 50;

/// Homotopy parameters for one solve: contraction factors and inexactness
/// tolerances that keep iterates inside the path neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// Subproblem contraction constant `c ∈ (0, 1]`.
    pub c_contraction: f64,
    /// Phase-2 neighborhood radius `β`.
    pub beta: f64,
    /// Phase-1 neighborhood radius `η < β`.
    pub eta: f64,
    /// Per-step multiplicative decrease factor for `t` (σ̄).
    pub sigma_bar: f64,
    /// Phase-2 subproblem inexactness ceiling (δ̄_t).
    pub delta_t_bar: f64,
    /// Phase-1 subproblem inexactness ceiling (δ̄_τ).
    pub delta_tau_bar: f64,
    /// Initial homotopy parameter `t₀`.
    pub t0: f64,
    /// Residual-bound constant: `m0·t` bounds the ε-solution residual at
    /// accepted iterates, so termination is `m0·t ≤ ε`.
    pub m0: f64,
    /// Primal-recovery residual constant θ(c, β) for dual conic runs.
    pub theta: f64,
    /// Barrier parameter ν the ν-dependent constants were built with.
    pub nu: f64,
}

/// Upper end of the admissible `β` interval for a given `c`:
/// `0.5(1 + 2c² − √(1 + 4c²))`.
pub fn beta_upper_limit(c: f64) -> f64 {
    0.5 * (1.0 + 2.0 * c * c - (1.0 + 4.0 * c * c).sqrt())
}

fn validate_c_beta(c: f64, beta: f64) -> Result<()> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::Usage(format!(
            "contraction constant must lie in (0, 1], got {c}"
        )));
    }
    let limit = beta_upper_limit(c);
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::Usage(format!(
            "beta = {beta} outside admissible interval (0, {limit:.6})"
        )));
    }
    Ok(())
}

/// Contraction factor `σ̄_β = (c√β − β(1+c√β)) / ((1+c√β)√ν + c√β)`.
pub fn sigma_bar(c: f64, beta: f64, nu: f64) -> Result<f64> {
    validate_c_beta(c, beta)?;
    if !(nu > 0.0) {
        return Err(Error::Usage(format!("nu must be positive, got {nu}")));
    }
    let u = c * beta.sqrt();
    Ok((u - beta * (1.0 + u)) / ((1.0 + u) * nu.sqrt() + u))
}

/// Phase-2 inexactness ceiling
/// `δ̄_t(β) = (1−c²)β / ((1+c√β)³·[3c√β + c²β + (1+c√β)³])`.
pub fn delta_t_bar(c: f64, beta: f64) -> Result<f64> {
    validate_c_beta(c, beta)?;
    let u = c * beta.sqrt();
    let cube = (1.0 + u).powi(3);
    Ok((1.0 - c * c) * beta / (cube * (3.0 * u + c * c * beta + cube)))
}

/// Residual-bound constant
/// `M₀ = (1 − c√β/(1+c√β) − δ̄_t)⁻¹ · (√ν + c√β/(1+c√β) + 2δ̄_t)`.
pub fn m_zero(c: f64, beta: f64, nu: f64) -> Result<f64> {
    let u = c * beta.sqrt();
    let ratio = u / (1.0 + u);
    let dbar = delta_t_bar(c, beta)?;
    if !(nu > 0.0) {
        return Err(Error::Usage(format!("nu must be positive, got {nu}")));
    }
    Ok((nu.sqrt() + ratio + 2.0 * dbar) / (1.0 - ratio - dbar))
}

/// Primal-recovery constant `θ(c, β)` bounding the linear-constraint
/// residual of recovered primal points as a multiple of `t`.
pub fn theta_recovery(c: f64, beta: f64) -> Result<f64> {
    validate_c_beta(c, beta)?;
    let u = c * beta.sqrt();
    let cube = (1.0 + u).powi(3);
    let bracket = 3.0 * u + c * c * beta + cube;
    let num = (1.0 - c * c) * beta;
    let d = (1.0 + u).powi(2) * bracket - num;
    let second = (num + u * (1.0 + u).powi(2) * bracket) / d;
    Ok(num / d + second * second)
}

/// Contraction constant of the inexact full Newton step:
/// `λ₊ ≤ ((λ+δ)/(1−λ−δ))² + δ/(1−λ−δ)³`.
pub fn fgn_step_bound(lambda: f64, delta: f64) -> f64 {
    let r = 1.0 - lambda - delta;
    ((lambda + delta) / r).powi(2) + delta / (r * r * r)
}

/// Quadratic-convergence constant of the full scheme with
/// `δ_k ≤ λ_k²/(1−λ_k)`: `(2 − 4β + β²)/(1 − 2β)³`.
pub fn fgn_quadratic_constant(beta: f64) -> f64 {
    (2.0 - 4.0 * beta + beta * beta) / (1.0 - 2.0 * beta).powi(3)
}

/// Largest constant subsolve inexactness that keeps the radius-`β`
/// neighborhood invariant under full steps at fixed `t`:
/// `β(1 − 3β + β²)(1−β)⁴ / (2β³ − 5β² + 3β + 1)`, valid for
/// `β ∈ (0, (3−√5)/2)`.
pub fn fgn_invariance_delta(beta: f64) -> Result<f64> {
    let limit = 0.5 * (3.0 - 5.0_f64.sqrt());
    if !(beta > 0.0 && beta < limit) {
        return Err(Error::Usage(format!(
            "beta = {beta} outside the invariance interval (0, {limit:.6})"
        )));
    }
    let num = beta * (1.0 - 3.0 * beta + beta * beta) * (1.0 - beta).powi(4);
    let den = 2.0 * beta.powi(3) - 5.0 * beta * beta + 3.0 * beta + 1.0;
    Ok(num / den)
}

/// Quadratic-convergence constant of the damped scheme,
/// `c̄ = (2β² + 4β + 3)/(1 − β²(2β² + 4β + 3))`; the operative validity
/// condition is `c̄·β < 1`.
pub fn dgn_quadratic_constant(beta: f64) -> Result<f64> {
    let q = 2.0 * beta * beta + 4.0 * beta + 3.0;
    let denom = 1.0 - beta * beta * q;
    if denom <= 0.0 {
        return Err(Error::Usage(format!(
            "beta = {beta} outside damped quadratic region"
        )));
    }
    let cbar = q / denom;
    if cbar * beta >= 1.0 {
        return Err(Error::Usage(format!(
            "beta = {beta} violates the damped contraction condition c̄·β < 1"
        )));
    }
    Ok(cbar)
}

impl Schedule {
    /// Builds a schedule from explicit `(c, β, η, t₀)` for barrier
    /// parameter `ν`, deriving all certified constants.
    pub fn new(c: f64, beta: f64, eta: f64, t0: f64, nu: f64) -> Result<Schedule> {
        validate_c_beta(c, beta)?;
        if !(eta > 0.0 && eta < beta) {
            return Err(Error::Usage(format!(
                "eta must lie in (0, beta) = (0, {beta}), got {eta}"
            )));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::Usage(format!("t0 must be positive, got {t0}")));
        }
        let sigma = sigma_bar(c, beta, nu)?;
        if !(sigma > 0.0 && sigma < 1.0) {
            return Err(Error::Numeric(format!(
                "derived contraction factor {sigma} outside (0, 1)"
            )));
        }
        Ok(Schedule {
            c_contraction: c,
            beta,
            eta,
            sigma_bar: sigma,
            delta_t_bar: delta_t_bar(c, beta)?,
            delta_tau_bar: delta_t_bar(c, eta)?,
            t0,
            m0: m_zero(c, beta, nu)?,
            theta: theta_recovery(c, beta)?,
            nu,
        })
    }

    /// Default parameters: `c = 0.95`, `β = 0.0870` (the maximizer of the
    /// contraction factor), `η = β/2`, `t₀ = κ` (the barrier's homotopy
    /// scale).
    pub fn with_defaults(nu: f64, kappa: f64) -> Result<Schedule> {
        Schedule::new(0.95, 0.0870, 0.0435, kappa, nu)
    }

    /// The Phase-1 per-step decrease of `τ` before division by the
    /// measured shift norm: `t₀·(c√η/(1+c√η) − η)`.
    fn phase1_decrease_numerator(&self) -> f64 {
        let u = self.c_contraction * self.eta.sqrt();
        self.t0 * (u / (1.0 + u) - self.eta)
    }
}

/// Which phase an iterate belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// Homotopy in `τ` toward the path neighborhood at `t₀`.
    One,
    /// Path following in `t` toward the tolerance.
    Two,
}

/// One accepted iterate of either phase.
#[derive(Debug, Clone)]
pub struct IterState {
    /// The iterate (always interior to the barrier domain).
    pub z: DVector<f64>,
    /// Homotopy parameter: `t` in phase two, `τ` in phase one.
    pub t: f64,
    /// Measured generalized Newton decrement at this state.
    pub lambda: f64,
    /// Inexactness actually achieved by the step's subsolve.
    pub delta_used: f64,
    /// Phase this state belongs to.
    pub phase: Phase,
    /// Iteration counter within the phase.
    pub counter: usize,
}

/// One row of the solve trace; field order matches the CSV column order
/// `phase,k,t,lambda,delta_target,delta_achieved,sigma,residual_primary,residual_aux,wall_ms`.
///
/// Column semantics: `t` carries `τ_j` in phase-1 rows (the auxiliary
/// homotopy strategy) and `t_k` in phase-2 rows; `sigma` carries the
/// `τ`-decrease `Δ_j` in phase 1 and the contraction factor `σ_k` in
/// phase 2; `residual_primary` is the ε-solution residual of the original
/// inclusion at the iterate (NaN when not recorded); `residual_aux` is the
/// phase-1 termination quantity `τ·‖ζ̂⁰‖*` or the phase-2 certified bound
/// `m0·t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Phase number (1 or 2).
    pub phase: u8,
    /// Iteration counter within the phase (0-based).
    pub k: usize,
    /// Homotopy parameter after the step (`τ_j` or `t_k`).
    pub t: f64,
    /// Measured decrement at the accepted iterate.
    pub lambda: f64,
    /// Requested subsolve inexactness.
    pub delta_target: f64,
    /// Certified subsolve inexactness achieved.
    pub delta_achieved: f64,
    /// Contraction factor (phase 2) or τ-decrease Δ (phase 1).
    pub sigma: f64,
    /// ε-solution residual of the original inclusion (NaN if unrecorded).
    pub residual_primary: f64,
    /// Phase-dependent auxiliary quantity (see type docs).
    pub residual_aux: f64,
    /// Wall-clock time of the step in milliseconds.
    pub wall_ms: f64,
}

/// Ordered per-iteration record of a solve.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveTrace {
    /// One row per outer iteration, in execution order.
    pub rows: Vec<TraceRow>,
}

impl SolveTrace {
    /// Rows belonging to the given phase.
    pub fn phase_rows(&self, phase: u8) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(move |r| r.phase == phase)
    }
}

/// How Phase 1 reaches the path neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase1Strategy {
    /// The analyzed homotopy on the shifted inclusion (default).
    AuxiliaryPath,
    /// Damped Newton steps at fixed `t₀` until the decrement enters the
    /// neighborhood (pragmatic variant).
    DampedNewton,
}

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// The termination criterion `m0·t ≤ ε` was reached.
    Converged,
    /// An iteration budget ran out (partial trace preserved).
    BudgetExhausted {
        /// Phase whose budget was exhausted.
        phase: Phase,
    },
}

/// Options controlling a two-phase solve.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Use the measured gradient norm instead of `√ν` in the contraction
    /// factor (faster decrease, off by default for reproducibility).
    pub adaptive_sigma: bool,
    /// Verify the per-step theorem bounds at runtime (warnings above
    /// dimension 50, errors at or below).
    pub debug_asserts: bool,
    /// Hard cap overriding the derived iteration budgets.
    pub max_iters: Option<usize>,
    /// Record the ε-solution residual on every trace row (one extra
    /// projection per iteration).
    pub record_residuals: bool,
    /// Keep every accepted iterate in the output (memory grows with the
    /// iteration count; off by default).
    pub record_iterates: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            adaptive_sigma: false,
            debug_asserts: false,
            max_iters: None,
            record_residuals: true,
            record_iterates: false,
        }
    }
}

/// Result of a two-phase solve.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Final iterate.
    pub z: DVector<f64>,
    /// Final homotopy parameter `t`.
    pub final_t: f64,
    /// Termination status.
    pub status: SolveStatus,
    /// Per-iteration record.
    pub trace: SolveTrace,
    /// ε-solution residual at the final iterate, when computable.
    pub residual: Option<ResidualReport>,
    /// Phase-1 iterations executed.
    pub phase1_iters: usize,
    /// Phase-2 iterations executed.
    pub phase2_iters: usize,
    /// Accepted iterates in execution order (empty unless
    /// [`SolveOptions::record_iterates`] is set).
    pub iterates: Vec<IterState>,
}

/// Iteration budgets derived from the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Phase-2 ceiling from the path-following complexity bound.
    pub k_max: usize,
    /// Phase-1 ceiling; `None` without a measured shift norm. Uses the
    /// measured `‖ζ̂⁰‖*` at the start point times κ as a proxy for the
    /// analytic-center norm (heuristic, flagged).
    pub j_max: Option<usize>,
}

/// Closed-form iteration ceilings for both phases.
///
/// `k_max = ⌊((1+c√β)√ν + c√β)/(c√β − β(1+c√β)) · ln(m0·t0/ε)⌋ + 1`;
/// `j_max` additionally needs the measured shift norm `‖ζ̂⁰‖*` and the
/// barrier's homotopy scale κ.
pub fn complexity_budget(
    sched: &Schedule,
    kappa: f64,
    eps: f64,
    zeta_norm: Option<f64>,
) -> Budget {
    let c = sched.c_contraction;
    let u = c * sched.beta.sqrt();
    let log_term = (sched.m0 * sched.t0 / eps).ln();
    let rate = ((1.0 + u) * sched.nu.sqrt() + u) / (u - sched.beta * (1.0 + u));
    let k_max = ((rate * log_term).floor() + 1.0).max(0.0) as usize;
    let j_max = zeta_norm.map(|norm| {
        let v = c * sched.eta.sqrt();
        let gap = v - sched.eta * (1.0 + v);
        let lead = kappa * (1.0 + v) * norm / (sched.t0 * gap);
        let tail = (sched.beta - sched.eta) * (1.0 + v) / gap;
        ((lead - tail).floor() + 1.0).max(1.0) as usize
    });
    Budget { k_max, j_max }
}

/// Solves the anchored linearized inclusion
/// `0 ∈ t[∇F(z) + ∇²F(ẑ)(w − z)] + A(w)` to certified inexactness `δ`
/// (residual at most `t·δ` in the anchor's dual local norm). This is the
/// scaled resolvent of `A` in the anchor metric, applied at the Newton
/// point `z − ∇²F(ẑ)⁻¹∇F(z)`.
pub fn s_mapping(
    barrier: &BarrierFn,
    op: &Operator,
    anchor: &DVector<f64>,
    z: &DVector<f64>,
    t: f64,
    delta: f64,
) -> Result<(DVector<f64>, InexactCertificate)> {
    if !barrier.in_domain(anchor) || !barrier.in_domain(z) {
        return Err(Error::Domain(
            "s-mapping requires interior anchor and point".into(),
        ));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Usage(format!(
            "homotopy parameter must be positive and finite, got {t}"
        )));
    }
    let metric = barrier.metric(anchor)?;
    let grad = barrier.gradient(z)?;
    let newton_point = z - metric.solve(&grad)?;
    op.resolvent(&newton_point, &metric, t, delta)
}

/// Generalized Newton decrement `λ_t(z) = ‖z − s_z(z; t)‖_z`, evaluated
/// with a near-exact subsolve (`δ_eval`, default `1e-8`); the reported
/// value differs from the exact decrement by at most `δ_eval`.
pub fn newton_decrement(
    barrier: &BarrierFn,
    op: &Operator,
    z: &DVector<f64>,
    t: f64,
    delta_eval: f64,
) -> Result<f64> {
    let (s, _) = s_mapping(barrier, op, z, z, t, delta_eval)?;
    let metric = barrier.metric(z)?;
    Ok(metric.local_norm(&(z - s)))
}

fn require_interior(barrier: &BarrierFn, z: &DVector<f64>, context: &str) -> Result<()> {
    if barrier.in_domain(z) {
        Ok(())
    } else {
        Err(Error::Numeric(format!(
            "{context}: iterate left the barrier interior"
        )))
    }
}

/// Reports a violated runtime bound: an error at small dimension, a
/// logged warning above [`STRICT_ASSERT_DIM`].
fn bound_violation(dim: usize, msg: String) -> Result<()> {
    if dim <= STRICT_ASSERT_DIM {
        Err(Error::Numeric(msg))
    } else {
        log::warn!("{msg}");
        Ok(())
    }
}

/// Inexact full generalized Newton step at fixed `t`: `z₊ = s_z(z; t)` to
/// accuracy `δ`. Warns when `λ + δ ≥ 1` (outside the guaranteed region).
/// With `debug_asserts`, the contraction estimate
/// `λ₊ ≤ ((λ+δ)/(1−λ−δ))² + δ/(1−λ−δ)³` is checked with slack.
pub fn fgn_step(
    barrier: &BarrierFn,
    op: &Operator,
    z: &DVector<f64>,
    t: f64,
    delta: f64,
    debug_asserts: bool,
) -> Result<IterState> {
    let lambda_before = newton_decrement(barrier, op, z, t, tol::DECREMENT_EVAL_DELTA)?;
    if lambda_before + delta >= 1.0 {
        log::warn!(
            "full Newton step outside guaranteed region: lambda = {lambda_before}, delta = {delta}"
        );
    }
    let (z_next, cert) = s_mapping(barrier, op, z, z, t, delta)?;
    require_interior(barrier, &z_next, "full Newton step")?;
    let lambda_after = newton_decrement(barrier, op, &z_next, t, tol::DECREMENT_EVAL_DELTA)?;
    if debug_asserts && lambda_before + cert.delta_achieved < 1.0 {
        let bound = fgn_step_bound(lambda_before, cert.delta_achieved)
            + tol::DEBUG_BOUND_SLACK;
        if lambda_after > bound {
            bound_violation(
                z.len(),
                format!(
                    "full-step contraction estimate violated: lambda_after = \
                     {lambda_after} > bound {bound} (lambda = {lambda_before}, \
                     delta = {})",
                    cert.delta_achieved
                ),
            )?;
        }
    }
    Ok(IterState {
        z: z_next,
        t,
        lambda: lambda_after,
        delta_used: cert.delta_achieved,
        phase: Phase::Two,
        counter: 0,
    })
}

/// Inexact damped generalized Newton step at fixed `t`:
/// `z₊ = z + α(z̃₊ − z)` with `α = 1/(1 + λ̃)`, `λ̃ = ‖z̃₊ − z‖_z`, and the
/// subsolve accuracy capped at `λ̃²/(1+λ̃)` (estimated from a pre-pass).
/// Returns the state with `lambda = λ̃` (the damped decrement measure).
pub fn dgn_step(
    barrier: &BarrierFn,
    op: &Operator,
    z: &DVector<f64>,
    t: f64,
    delta_request: f64,
) -> Result<IterState> {
    let lambda_est = newton_decrement(barrier, op, z, t, tol::DECREMENT_EVAL_DELTA)?;
    let delta = delta_request.min(lambda_est * lambda_est / (1.0 + lambda_est));
    let (candidate, cert) = s_mapping(barrier, op, z, z, t, delta)?;
    let metric = barrier.metric(z)?;
    let lambda_tilde = metric.local_norm(&(&candidate - z));
    let alpha = 1.0 / (1.0 + lambda_tilde);
    let z_next = z + (&candidate - z) * alpha;
    require_interior(barrier, &z_next, "damped Newton step")?;
    Ok(IterState {
        z: z_next,
        t,
        lambda: lambda_tilde,
        delta_used: cert.delta_achieved,
        phase: Phase::Two,
        counter: 0,
    })
}

/// Outcome of one driver-level step, with everything a trace row needs.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// The accepted state.
    pub state: IterState,
    /// Contraction factor (phase 2) or τ-decrease Δ (phase 1).
    pub sigma: f64,
    /// Requested subsolve inexactness.
    pub delta_target: f64,
    /// Certified subsolve inexactness.
    pub delta_achieved: f64,
}

/// One path-following step: contract `t`, then take the generalized
/// Newton step anchored at the current iterate with the contracted `t`.
/// Maintains the neighborhood invariant `λ_{t_k}(z^k) ≤ β`.
pub fn pfgn_step(
    barrier: &BarrierFn,
    op: &Operator,
    state: &IterState,
    sched: &Schedule,
    adaptive_sigma: bool,
    debug_asserts: bool,
) -> Result<StepRecord> {
    let sigma = if adaptive_sigma {
        // Measured gradient norm in place of √ν (it never exceeds √ν).
        let metric = barrier.metric(&state.z)?;
        let gnorm = metric.dual_local_norm(&barrier.gradient(&state.z)?)?;
        let c = sched.c_contraction;
        let u = c * sched.beta.sqrt();
        (u - sched.beta * (1.0 + u)) / ((1.0 + u) * gnorm + u)
    } else {
        sched.sigma_bar
    };
    let t_next = state.t * (1.0 - sigma);
    let (z_next, cert) = s_mapping(
        barrier,
        op,
        &state.z,
        &state.z,
        t_next,
        sched.delta_t_bar,
    )?;
    require_interior(barrier, &z_next, "path-following step")?;
    let lambda_next =
        newton_decrement(barrier, op, &z_next, t_next, tol::DECREMENT_EVAL_DELTA)?;
    if debug_asserts {
        let c = sched.c_contraction;
        let u = c * sched.beta.sqrt();
        let intermediate =
            newton_decrement(barrier, op, &state.z, t_next, tol::DECREMENT_EVAL_DELTA)?;
        if intermediate > u / (1.0 + u) + tol::DEBUG_BOUND_SLACK {
            bound_violation(
                state.z.len(),
                format!(
                    "path-following intermediate decrement {intermediate} exceeds \
                     c√β/(1+c√β) = {}; post-step decrement {lambda_next}",
                    u / (1.0 + u)
                ),
            )?;
        }
        if lambda_next > sched.beta + tol::DEBUG_BOUND_SLACK {
            bound_violation(
                state.z.len(),
                format!(
                    "path-following neighborhood invariant violated: lambda = \
                     {lambda_next} > beta = {} (intermediate decrement {intermediate})",
                    sched.beta
                ),
            )?;
        }
    }
    Ok(StepRecord {
        state: IterState {
            z: z_next,
            t: t_next,
            lambda: lambda_next,
            delta_used: cert.delta_achieved,
            phase: Phase::Two,
            counter: state.counter + 1,
        },
        sigma,
        delta_target: sched.delta_t_bar,
        delta_achieved: cert.delta_achieved,
    })
}

/// One Phase-1 homotopy step on the shifted inclusion
/// `0 ∈ t₀∇F(z) + A(z) − τ·ζ̂⁰`: decrease `τ` by
/// `Δ_j = t₀(c√η/(1+c√η) − η)/‖ζ̂⁰‖*_{ẑ}` (clamped at 0), then take the
/// generalized Newton step on the operator shifted by the new `τ`.
pub fn phase1_step(
    barrier: &BarrierFn,
    op: &Operator,
    zeta0: &DVector<f64>,
    state: &IterState,
    sched: &Schedule,
    debug_asserts: bool,
) -> Result<StepRecord> {
    let metric = barrier.metric(&state.z)?;
    let zeta_norm = metric.dual_local_norm(zeta0)?;
    if zeta_norm == 0.0 {
        return Err(Error::Numeric(
            "phase-1 step with zero shift: start point already solves the \
             homotopy at every τ"
                .into(),
        ));
    }
    let delta_tau = sched.phase1_decrease_numerator() / zeta_norm;
    let tau_next = (state.t - delta_tau).max(0.0);
    let shifted = op.clone().shifted(zeta0 * (-tau_next))?;
    let (z_next, cert) = s_mapping(
        barrier,
        &shifted,
        &state.z,
        &state.z,
        sched.t0,
        sched.delta_tau_bar,
    )?;
    require_interior(barrier, &z_next, "phase-1 step")?;
    let lambda_next = newton_decrement(
        barrier,
        &shifted,
        &z_next,
        sched.t0,
        tol::DECREMENT_EVAL_DELTA,
    )?;
    if debug_asserts && lambda_next > sched.eta + tol::DEBUG_BOUND_SLACK {
        bound_violation(
            state.z.len(),
            format!(
                "phase-1 neighborhood invariant violated: lambda = {lambda_next} \
                 > eta = {} at tau = {tau_next}",
                sched.eta
            ),
        )?;
    }
    Ok(StepRecord {
        state: IterState {
            z: z_next,
            t: tau_next,
            lambda: lambda_next,
            delta_used: cert.delta_achieved,
            phase: Phase::One,
            counter: state.counter + 1,
        },
        sigma: delta_tau,
        delta_target: sched.delta_tau_bar,
        delta_achieved: cert.delta_achieved,
    })
}

fn record_residual(
    barrier: &BarrierFn,
    op: &Operator,
    z: &DVector<f64>,
    enabled: bool,
) -> f64 {
    if !enabled {
        return f64::NAN;
    }
    eps_solution_residual(op, barrier, z)
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
}

/// Two-phase path-following solve of `0 ∈ t∇F(z) + A(z)` driven down to
/// `m0·t ≤ ε`: Phase 1 moves an arbitrary interior start into the path
/// neighborhood at `t₀`, Phase 2 follows the path with certified
/// contraction. Returns the final iterate, trace, and residual report.
pub fn two_phase_solve(
    barrier: &BarrierFn,
    op: &Operator,
    start: &DVector<f64>,
    sched: &Schedule,
    eps: f64,
    phase1: Phase1Strategy,
    options: Option<&SolveOptions>,
) -> Result<SolveOutput> {
    let default_opts = SolveOptions::default();
    let opts = options.unwrap_or(&default_opts);
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Usage(format!(
            "tolerance must be positive and finite, got {eps}"
        )));
    }
    if op.dim() != barrier.dim() || start.len() != barrier.dim() {
        return Err(Error::Dimension(format!(
            "solve dimension mismatch: barrier {}, operator {}, start {}",
            barrier.dim(),
            op.dim(),
            start.len()
        )));
    }
    if !barrier.in_domain(start) {
        return Err(Error::Init(
            "start point must be interior to the barrier domain".into(),
        ));
    }
    let mut trace = SolveTrace::default();
    let mut iterates: Vec<IterState> = Vec::new();
    let kappa = barrier.kappa();

    // ----- Phase 1: reach the neighborhood of the path at t₀. -----
    let mut z = start.clone();
    let mut phase1_iters = 0usize;
    match phase1 {
        Phase1Strategy::AuxiliaryPath => {
            let xi0 = op.pick_element(start).map_err(|e| {
                Error::Init(format!("start point must lie in dom A: {e}"))
            })?;
            let zeta0 = barrier.gradient(start)? * sched.t0 + xi0;
            let mut state = IterState {
                z: z.clone(),
                t: 1.0,
                lambda: 0.0,
                delta_used: 0.0,
                phase: Phase::One,
                counter: 0,
            };
            let mut max_norm: f64 = 0.0;
            loop {
                let metric = barrier.metric(&state.z)?;
                let norm = metric.dual_local_norm(&zeta0)?;
                if state.t * norm <= sched.t0 * (sched.beta - sched.eta) {
                    break;
                }
                max_norm = max_norm.max(norm);
                let cap = complexity_budget(sched, kappa, eps, Some(max_norm))
                    .j_max
                    .expect("norm supplied");
                let cap = opts.max_iters.map_or(cap, |m| cap.min(m));
                if phase1_iters >= cap {
                    return Ok(SolveOutput {
                        z: state.z,
                        final_t: sched.t0,
                        status: SolveStatus::BudgetExhausted { phase: Phase::One },
                        trace,
                        residual: None,
                        phase1_iters,
                        phase2_iters: 0,
                        iterates,
                    });
                }
                let clock = Instant::now();
                let rec = phase1_step(barrier, op, &zeta0, &state, sched, opts.debug_asserts)?;
                let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
                let aux = {
                    let m_new = barrier.metric(&rec.state.z)?;
                    rec.state.t * m_new.dual_local_norm(&zeta0)?
                };
                trace.rows.push(TraceRow {
                    phase: 1,
                    k: phase1_iters,
                    t: rec.state.t,
                    lambda: rec.state.lambda,
                    delta_target: rec.delta_target,
                    delta_achieved: rec.delta_achieved,
                    sigma: rec.sigma,
                    residual_primary: record_residual(
                        barrier,
                        op,
                        &rec.state.z,
                        opts.record_residuals,
                    ),
                    residual_aux: aux,
                    wall_ms,
                });
                let finished = rec.state.t == 0.0;
                state = rec.state;
                if opts.record_iterates {
                    iterates.push(state.clone());
                }
                phase1_iters += 1;
                if finished {
                    break;
                }
            }
            z = state.z;
        }
        Phase1Strategy::DampedNewton => {
            let cap = opts.max_iters.unwrap_or(500);
            loop {
                let lambda = newton_decrement(
                    barrier,
                    op,
                    &z,
                    sched.t0,
                    tol::DECREMENT_EVAL_DELTA,
                )?;
                if lambda <= sched.beta {
                    break;
                }
                if phase1_iters >= cap {
                    return Ok(SolveOutput {
                        z,
                        final_t: sched.t0,
                        status: SolveStatus::BudgetExhausted { phase: Phase::One },
                        trace,
                        residual: None,
                        phase1_iters,
                        phase2_iters: 0,
                        iterates,
                    });
                }
                let clock = Instant::now();
                let state = dgn_step(barrier, op, &z, sched.t0, sched.delta_tau_bar)?;
                let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
                trace.rows.push(TraceRow {
                    phase: 1,
                    k: phase1_iters,
                    t: sched.t0,
                    lambda: state.lambda,
                    delta_target: sched.delta_tau_bar,
                    delta_achieved: state.delta_used,
                    sigma: 1.0 / (1.0 + state.lambda),
                    residual_primary: record_residual(
                        barrier,
                        op,
                        &state.z,
                        opts.record_residuals,
                    ),
                    residual_aux: f64::NAN,
                    wall_ms,
                });
                if opts.record_iterates {
                    iterates.push(state.clone());
                }
                z = state.z;
                phase1_iters += 1;
            }
        }
    }

    // ----- Phase 2: follow the path until m0·t ≤ ε. -----
    let budget = complexity_budget(sched, kappa, eps, None);
    let cap = opts.max_iters.map_or(budget.k_max, |m| budget.k_max.min(m));
    let entry_lambda =
        newton_decrement(barrier, op, &z, sched.t0, tol::DECREMENT_EVAL_DELTA)?;
    if opts.debug_asserts && entry_lambda > sched.beta + tol::DEBUG_BOUND_SLACK {
        bound_violation(
            z.len(),
            format!(
                "phase-2 entry outside the neighborhood: lambda = {entry_lambda} \
                 > beta = {}",
                sched.beta
            ),
        )?;
    }
    let mut state = IterState {
        z,
        t: sched.t0,
        lambda: entry_lambda,
        delta_used: 0.0,
        phase: Phase::Two,
        counter: 0,
    };
    let mut phase2_iters = 0usize;
    while sched.m0 * state.t > eps {
        if phase2_iters >= cap {
            return Ok(SolveOutput {
                z: state.z,
                final_t: state.t,
                status: SolveStatus::BudgetExhausted { phase: Phase::Two },
                trace,
                residual: None,
                phase1_iters,
                phase2_iters,
                iterates,
            });
        }
        let clock = Instant::now();
        let rec = pfgn_step(
            barrier,
            op,
            &state,
            sched,
            opts.adaptive_sigma,
            opts.debug_asserts,
        )?;
        let wall_ms = clock.elapsed().as_secs_f64() * 1e3;
        trace.rows.push(TraceRow {
            phase: 2,
            k: phase2_iters,
            t: rec.state.t,
            lambda: rec.state.lambda,
            delta_target: rec.delta_target,
            delta_achieved: rec.delta_achieved,
            sigma: rec.sigma,
            residual_primary: record_residual(
                barrier,
                op,
                &rec.state.z,
                opts.record_residuals,
            ),
            residual_aux: sched.m0 * rec.state.t,
            wall_ms,
        });
        state = rec.state;
        if opts.record_iterates {
            iterates.push(state.clone());
        }
        phase2_iters += 1;
    }
    let residual = eps_solution_residual(op, barrier, &state.z).ok();
    Ok(SolveOutput {
        z: state.z,
        final_t: state.t,
        status: SolveStatus::Converged,
        trace,
        residual,
        phase1_iters,
        phase2_iters,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::ProxFn;
    use crate::rng::Rng;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn beta_admissibility_interval() {
        // Upper end of the admissible interval at c = 0.95.
        assert_relative_eq!(beta_upper_limit(0.95), 0.32895, epsilon = 1e-5);
        assert!(sigma_bar(0.95, 0.4, 10.0).is_err());
        assert!(sigma_bar(0.95, 0.0, 10.0).is_err());
        assert!(sigma_bar(1.5, 0.1, 10.0).is_err());
        assert!(sigma_bar(0.95, 0.087, 10.0).is_ok());
    }

    #[test]
    fn sigma_formula_matches_independent_evaluation() {
        for &(c, beta, nu) in &[(0.95, 0.087, 1.0), (0.5, 0.03, 100.0), (1.0, 0.2, 10.0)] {
            let s = sigma_bar(c, beta, nu).unwrap();
            // Independent arithmetic: expand the same expression without
            // reusing intermediate bindings.
            let expect = (c * beta.sqrt() - beta - beta * c * beta.sqrt())
                / (nu.sqrt() + c * beta.sqrt() * nu.sqrt() + c * beta.sqrt());
            assert_relative_eq!(s, expect, epsilon = 1e-15);
            assert!(s > 0.0 && s < 1.0);
        }
    }

    #[test]
    fn delta_bars_are_nonnegative_and_match_expansion() {
        for &(c, beta) in &[(0.95, 0.087), (0.8, 0.1), (0.99, 0.02)] {
            let d = delta_t_bar(c, beta).unwrap();
            let u = c * beta.sqrt();
            let cube = (1.0 + u) * (1.0 + u) * (1.0 + u);
            let expect = (1.0 - c * c) * beta / (cube * (3.0 * u + c * c * beta + cube));
            assert_relative_eq!(d, expect, epsilon = 1e-15);
            assert!(d >= 0.0);
        }
        // c = 1 forces exact subsolves.
        assert_eq!(delta_t_bar(1.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn invariance_delta_peaks_near_tenth() {
        // Coarse grid scan: the maximizer sits near 0.0997 with value
        // near 0.0372 (the acceptance suite runs the fine maximization).
        let mut best = (0.0, 0.0);
        for i in 1..380 {
            let beta = i as f64 * 1e-3;
            let v = fgn_invariance_delta(beta).unwrap();
            if v > best.1 {
                best = (beta, v);
            }
        }
        assert!((best.0 - 0.0997).abs() < 2e-3, "maximizer {}", best.0);
        assert!((best.1 - 0.0372).abs() < 1e-3, "value {}", best.1);
        assert!(fgn_invariance_delta(0.4).is_err());
    }

    #[test]
    fn schedule_with_defaults_is_consistent() {
        let sched = Schedule::with_defaults(10.0, 1.0).unwrap();
        assert_eq!(sched.c_contraction, 0.95);
        assert_eq!(sched.beta, 0.0870);
        assert_eq!(sched.eta, 0.0435);
        assert_eq!(sched.t0, 1.0);
        assert!(sched.sigma_bar > 0.0 && sched.sigma_bar < 1.0);
        assert!(sched.delta_t_bar > 0.0);
        assert!(sched.delta_tau_bar > 0.0);
        assert!(sched.m0 > sched.nu.sqrt());
        assert!(sched.theta > 0.0);
        // η must sit strictly inside (0, β).
        assert!(Schedule::new(0.95, 0.087, 0.087, 1.0, 10.0).is_err());
        assert!(Schedule::new(0.95, 0.087, 0.0, 1.0, 10.0).is_err());
    }

    #[test]
    fn decrement_of_constant_operator_matches_shifted_gradient_norm() {
        // A ≡ c: λ_t(z) = ‖∇F(z) + c/t‖*_z.
        let barrier = BarrierFn::orthant(3);
        let c = DVector::from_column_slice(&[0.8, 2.0, 0.1]);
        let op = Operator::constant(c.clone());
        let z = DVector::from_column_slice(&[0.5, 1.2, 3.0]);
        let t = 0.6;
        let lambda = newton_decrement(&barrier, &op, &z, t, 1e-10).unwrap();
        let metric = barrier.metric(&z).unwrap();
        let expect = metric
            .dual_local_norm(&(barrier.gradient(&z).unwrap() + &c / t))
            .unwrap();
        assert_relative_eq!(lambda, expect, epsilon = 1e-9);
    }

    #[test]
    fn decrement_vanishes_at_central_point() {
        let t = 0.45;
        let c = DVector::from_column_slice(&[1.5, 0.3]);
        let z = c.map(|ci| t / ci);
        let barrier = BarrierFn::orthant(2);
        let op = Operator::constant(c);
        let lambda = newton_decrement(&barrier, &op, &z, t, 1e-10).unwrap();
        assert!(lambda <= 1e-6, "decrement at central point: {lambda}");
    }

    #[test]
    fn s_mapping_with_zero_operator_is_newton_step() {
        let barrier = BarrierFn::unit_box(3);
        let op = Operator::zero(3);
        let z = DVector::from_column_slice(&[0.2, -0.4, 0.6]);
        let (s, cert) = s_mapping(&barrier, &op, &z, &z, 1.0, 0.0).unwrap();
        let metric = barrier.metric(&z).unwrap();
        let expect = &z - metric.solve(&barrier.gradient(&z).unwrap()).unwrap();
        assert!((s - expect).norm() < 1e-12);
        assert_eq!(cert.delta_achieved, 0.0);
    }

    #[test]
    fn s_mapping_matches_high_accuracy_reference() {
        // 3-dim orthant with an ℓ1 term under a dense-coupling-free metric:
        // the closed form and an independent near-exact reference agree.
        let barrier = BarrierFn::orthant(3);
        let op = Operator::subdiff(ProxFn::l1(3, 0.3));
        let z = DVector::from_column_slice(&[0.9, 1.4, 0.7]);
        let (s, _) = s_mapping(&barrier, &op, &z, &z, 0.8, 1e-9).unwrap();
        // Reference: solve the piecewise stationarity by scalar reasoning:
        // 0 ∈ 0.8[g_i + h_i(w−z)_i] + 0.3·∂|w_i| per coordinate.
        let g = barrier.gradient(&z).unwrap();
        let mut expect = DVector::zeros(3);
        for i in 0..3 {
            let h = 1.0 / (z[i] * z[i]);
            // soft-threshold of the unconstrained Newton point.
            let center = z[i] - g[i] / h;
            let k = 0.3 / (0.8 * h);
            expect[i] = center.signum() * (center.abs() - k).max(0.0);
        }
        assert!((s - expect).norm() < 1e-9);
    }

    #[test]
    fn fgn_exact_contraction_on_random_instances() {
        // With exact subsolves, λ₊ ≤ (λ/(1−λ))².
        let mut rng = Rng::from_seed(241);
        let mut checked = 0;
        for _ in 0..40 {
            let p = 2 + (rng.next_u64() % 4) as usize;
            let barrier = BarrierFn::orthant(p);
            let c = DVector::from_iterator(p, (0..p).map(|_| 0.2 + rng.uniform() * 2.0));
            let op = Operator::constant(c.clone());
            let t = 0.5 + rng.uniform();
            // Perturb the central point to control λ.
            let central = c.map(|ci| t / ci);
            let z = central.component_mul(&DVector::from_iterator(
                p,
                (0..p).map(|_| 1.0 + 0.05 * rng.gauss()),
            ));
            if !barrier.in_domain(&z) {
                continue;
            }
            let lambda = newton_decrement(&barrier, &op, &z, t, 1e-10).unwrap();
            if lambda >= 0.3 || lambda < 1e-8 {
                continue;
            }
            let state = fgn_step(&barrier, &op, &z, t, 0.0, true).unwrap();
            let bound = (lambda / (1.0 - lambda)).powi(2);
            assert!(
                state.lambda <= bound + 1e-7,
                "λ₊ = {} > ({lambda}/(1−λ))² = {bound}",
                state.lambda
            );
            checked += 1;
        }
        assert!(checked >= 20, "only {checked} instances exercised");
    }

    #[test]
    fn dgn_alpha_formula() {
        // λ̃ = 0 → full step (z central stays put); the α = 1/(1+λ̃) law is
        // checked through the fixed point.
        let t = 0.45;
        let c = DVector::from_column_slice(&[1.0, 2.0]);
        let z = c.map(|ci| t / ci);
        let barrier = BarrierFn::orthant(2);
        let op = Operator::constant(c);
        let state = dgn_step(&barrier, &op, &z, t, 0.0).unwrap();
        assert!((state.z - &z).norm() < 1e-8);
        assert!(state.lambda < 1e-8);
    }

    #[test]
    fn dgn_keeps_neighborhood_on_random_instances() {
        // Starting at λ̃ ≤ 0.21, one damped step keeps λ̃ ≤ 0.21.
        let mut rng = Rng::from_seed(251);
        let mut checked = 0;
        for _ in 0..60 {
            let p = 2 + (rng.next_u64() % 3) as usize;
            let barrier = BarrierFn::orthant(p);
            let c = DVector::from_iterator(p, (0..p).map(|_| 0.2 + rng.uniform() * 2.0));
            let op = Operator::constant(c.clone());
            let t = 0.5 + rng.uniform();
            let central = c.map(|ci| t / ci);
            let z = central.component_mul(&DVector::from_iterator(
                p,
                (0..p).map(|_| 1.0 + 0.12 * rng.gauss()),
            ));
            if !barrier.in_domain(&z) {
                continue;
            }
            let before = newton_decrement(&barrier, &op, &z, t, 1e-10).unwrap();
            if before > 0.21 || before < 1e-6 {
                continue;
            }
            let state = dgn_step(&barrier, &op, &z, t, 0.0).unwrap();
            let after = newton_decrement(&barrier, &op, &state.z, t, 1e-10).unwrap();
            assert!(
                after <= 0.21027 + 1e-7,
                "damped step left the region: {before} → {after}"
            );
            checked += 1;
        }
        assert!(checked >= 20, "only {checked} instances exercised");
    }

    #[test]
    fn pfgn_step_maintains_neighborhood_from_central_start() {
        let barrier = BarrierFn::orthant(4);
        let c = DVector::from_column_slice(&[1.0, 0.5, 2.0, 0.8]);
        let op = Operator::constant(c.clone());
        let sched = Schedule::with_defaults(4.0, 1.0).unwrap();
        let z0 = c.map(|ci| sched.t0 / ci);
        let state = IterState {
            z: z0,
            t: sched.t0,
            lambda: 0.0,
            delta_used: 0.0,
            phase: Phase::Two,
            counter: 0,
        };
        let rec = pfgn_step(&barrier, &op, &state, &sched, false, true).unwrap();
        assert!(rec.state.lambda <= sched.beta + 1e-9);
        assert_relative_eq!(rec.state.t, sched.t0 * (1.0 - sched.sigma_bar));
        // Intermediate bound: λ_{t₁}(z⁰) ≤ c√β/(1+c√β).
        let u = sched.c_contraction * sched.beta.sqrt();
        let mid = newton_decrement(&barrier, &op, &state.z, rec.state.t, 1e-10).unwrap();
        assert!(mid <= u / (1.0 + u) + 1e-9);
    }

    #[test]
    fn adaptive_sigma_contracts_at_least_as_fast() {
        let barrier = BarrierFn::orthant(3);
        let c = DVector::from_element(3, 1.0);
        let op = Operator::constant(c.clone());
        let sched = Schedule::with_defaults(3.0, 1.0).unwrap();
        let z0 = c.map(|ci| sched.t0 / ci);
        let state = IterState {
            z: z0,
            t: sched.t0,
            lambda: 0.0,
            delta_used: 0.0,
            phase: Phase::Two,
            counter: 0,
        };
        let fixed = pfgn_step(&barrier, &op, &state, &sched, false, false).unwrap();
        let adaptive = pfgn_step(&barrier, &op, &state, &sched, true, false).unwrap();
        assert!(adaptive.sigma >= fixed.sigma - 1e-15);
        assert!(adaptive.state.t <= fixed.state.t + 1e-15);
    }

    #[test]
    fn phase1_shift_makes_start_exactly_central_at_tau_one() {
        // ζ̂⁰ = t₀∇F(ẑ⁰) + ξ̂⁰ makes ẑ⁰ solve the shifted inclusion at
        // τ = 1, so the shifted decrement vanishes there.
        let barrier = BarrierFn::orthant(3);
        let op = Operator::constant(DVector::from_column_slice(&[2.0, 1.0, 0.4]));
        let start = DVector::from_column_slice(&[0.7, 1.1, 2.0]);
        let sched = Schedule::with_defaults(3.0, 1.0).unwrap();
        let xi0 = op.pick_element(&start).unwrap();
        let zeta0 = barrier.gradient(&start).unwrap() * sched.t0 + xi0;
        let shifted = op.clone().shifted(&zeta0 * (-1.0)).unwrap();
        let lambda = newton_decrement(&barrier, &shifted, &start, sched.t0, 1e-10).unwrap();
        assert!(lambda <= 1e-9, "start not central for the shifted problem: {lambda}");
    }

    #[test]
    fn phase1_step_decreases_tau_and_keeps_eta_neighborhood() {
        let barrier = BarrierFn::orthant(3);
        let op = Operator::constant(DVector::from_column_slice(&[2.0, 1.0, 0.4]));
        let start = DVector::from_column_slice(&[0.7, 1.1, 2.0]);
        let sched = Schedule::with_defaults(3.0, 1.0).unwrap();
        let xi0 = op.pick_element(&start).unwrap();
        let zeta0 = barrier.gradient(&start).unwrap() * sched.t0 + xi0;
        let state = IterState {
            z: start,
            t: 1.0,
            lambda: 0.0,
            delta_used: 0.0,
            phase: Phase::One,
            counter: 0,
        };
        let rec = phase1_step(&barrier, &op, &zeta0, &state, &sched, true).unwrap();
        assert!(rec.state.t < 1.0);
        assert!(rec.state.lambda <= sched.eta + 1e-9);
    }

    #[test]
    fn budget_examples() {
        let sched = Schedule::with_defaults(1000.0, 1.0).unwrap();
        // ε = m0·t0 zeroes the log term: k_max = 1.
        let b = complexity_budget(&sched, 1.0, sched.m0 * sched.t0, None);
        assert_eq!(b.k_max, 1);
        assert!(b.j_max.is_none());
        // Realistic tolerance: finite positive integers.
        let sched2 = Schedule::new(0.95, 0.0870, 0.0435, 1.0, 103.0).unwrap();
        let b2 = complexity_budget(&sched2, 1.0, 1e-6, Some(3.0));
        assert!(b2.k_max > 0);
        assert!(b2.j_max.unwrap() > 0);
        // Doubling ν scales k_max roughly by √2 for fixed logs.
        let s_small = Schedule::new(0.95, 0.0870, 0.0435, 1.0, 500.0).unwrap();
        let s_big = Schedule::new(0.95, 0.0870, 0.0435, 1.0, 1000.0).unwrap();
        let k_small = complexity_budget(&s_small, 1.0, 1e-6, None).k_max as f64;
        let k_big = complexity_budget(&s_big, 1.0, 1e-6, None).k_max as f64;
        let ratio = k_big / k_small;
        assert!((ratio - std::f64::consts::SQRT_2).abs() < 0.08, "ratio {ratio}");
    }

    #[test]
    fn two_phase_solve_constant_zero_on_box() {
        // A ≡ 0 on the unit box: the central path is the analytic center;
        // the driver converges and the exact residual is 0.
        let barrier = BarrierFn::unit_box(2);
        let op = Operator::zero(2);
        let sched = Schedule::with_defaults(barrier.nu(), barrier.kappa()).unwrap();
        let start = DVector::from_column_slice(&[0.4, -0.3]);
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            1e-5,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert!(sched.m0 * out.final_t <= 1e-5 * 1.0000001);
        let res = out.residual.unwrap();
        assert!(res.exact);
        assert!(res.value <= 1e-5);
        // Iterate crowds toward the analytic center.
        assert!(out.z.norm() < 0.05, "final iterate {:?}", out.z);
    }

    #[test]
    fn two_phase_solve_tracks_scalar_central_path() {
        // X = [0, ∞), F = −log x, A ≡ 1: the central path is x*_t = t.
        let barrier = BarrierFn::orthant(1);
        let op = Operator::constant(DVector::from_element(1, 1.0));
        let sched = Schedule::with_defaults(1.0, 1.0).unwrap();
        let start = DVector::from_element(1, 3.0);
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            1e-6,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        // λ_t(x) = |x − t|/x for this instance: the neighborhood keeps the
        // iterate within ~β of the path, multiplicatively.
        for row in out.trace.phase_rows(2) {
            assert!(row.lambda <= sched.beta + 1e-9, "row {row:?}");
        }
        let t = out.final_t;
        assert!((out.z[0] - t).abs() <= 2.0 * sched.beta * t);
        // Final residual: A ≡ {1}: ‖1‖*_x = x ≤ ε within slack.
        let res = out.residual.unwrap();
        assert!(res.exact);
        assert!(res.value <= 1e-6 + 1e-12);
    }

    #[test]
    fn trace_t_decay_is_exactly_geometric() {
        let barrier = BarrierFn::orthant(2);
        let op = Operator::constant(DVector::from_element(2, 1.0));
        let sched = Schedule::with_defaults(2.0, 1.0).unwrap();
        let start = DVector::from_element(2, 1.0);
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            1e-3,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        let rows: Vec<&TraceRow> = out.trace.phase_rows(2).collect();
        assert!(!rows.is_empty());
        let mut t = sched.t0;
        for row in &rows {
            t *= 1.0 - sched.sigma_bar;
            assert_eq!(row.t, t, "t decay must be the exact product recurrence");
        }
        // Strictly decreasing within the phase.
        for pair in rows.windows(2) {
            assert!(pair[1].t < pair[0].t);
        }
    }

    #[test]
    fn zero_phase_two_iterations_when_already_terminal() {
        let barrier = BarrierFn::orthant(1);
        let op = Operator::constant(DVector::from_element(1, 1.0));
        let sched = Schedule::with_defaults(1.0, 1.0).unwrap();
        let start = DVector::from_element(1, 1.0);
        let eps = sched.m0 * sched.t0;
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            eps,
            Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        assert_eq!(out.phase2_iters, 0);
        assert_eq!(out.status, SolveStatus::Converged);
        assert_eq!(out.final_t, sched.t0);
    }

    #[test]
    fn tiny_budget_reports_exhaustion_with_partial_trace() {
        let barrier = BarrierFn::orthant(2);
        let op = Operator::constant(DVector::from_element(2, 1.0));
        let sched = Schedule::with_defaults(2.0, 1.0).unwrap();
        let start = DVector::from_element(2, 1.0);
        let opts = SolveOptions {
            max_iters: Some(3),
            ..SolveOptions::default()
        };
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            1e-9,
            Phase1Strategy::AuxiliaryPath,
            Some(&opts),
        )
        .unwrap();
        assert!(matches!(
            out.status,
            SolveStatus::BudgetExhausted { phase: Phase::Two }
        ));
        assert_eq!(out.trace.phase_rows(2).count(), 3);
    }

    #[test]
    fn damped_phase1_reaches_neighborhood() {
        let barrier = BarrierFn::orthant(2);
        let op = Operator::constant(DVector::from_column_slice(&[1.0, 2.0]));
        let sched = Schedule::with_defaults(2.0, 1.0).unwrap();
        // Far from the path at t0.
        let start = DVector::from_column_slice(&[8.0, 0.05]);
        let out = two_phase_solve(
            &barrier,
            &op,
            &start,
            &sched,
            1e-4,
            Phase1Strategy::DampedNewton,
            None,
        )
        .unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert!(out.phase1_iters > 0);
    }

    #[test]
    fn solve_rejects_bad_inputs() {
        let barrier = BarrierFn::orthant(2);
        let op = Operator::zero(2);
        let sched = Schedule::with_defaults(2.0, 1.0).unwrap();
        let interior = DVector::from_element(2, 1.0);
        let boundary = DVector::from_column_slice(&[1.0, 0.0]);
        assert!(matches!(
            two_phase_solve(
                &barrier,
                &op,
                &boundary,
                &sched,
                1e-4,
                Phase1Strategy::AuxiliaryPath,
                None
            )
            .unwrap_err(),
            Error::Init(_)
        ));
        assert!(matches!(
            two_phase_solve(
                &barrier,
                &op,
                &interior,
                &sched,
                -1.0,
                Phase1Strategy::AuxiliaryPath,
                None
            )
            .unwrap_err(),
            Error::Usage(_)
        ));
    }
}
