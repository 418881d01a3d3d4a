//! Centralized numerical tolerances.
//!
//! Every tolerance used by the library lives here with a rationale, so the
//! accuracy budget of the whole pipeline can be audited in one place. Tests
//! at the bottom pin the orderings the rationale depends on.

/// Relative tolerance for a Cholesky factor reconstructing its matrix:
/// `‖L·Lᵀ − H‖ ≤ FACTOR_RECONSTRUCT_REL · ‖H‖`.
///
/// Dense Cholesky on well-conditioned symmetric positive definite matrices is
/// backward stable with error a small multiple of machine epsilon times the
/// dimension; 1e-10 leaves four orders of magnitude of headroom at desk scale
/// (dimension ≤ a few hundred) while still catching a wrong factor.
pub const FACTOR_RECONSTRUCT_REL: f64 = 1e-10;

/// Relative residual required after a metric solve:
/// `‖H·x − v‖ ≤ max(SOLVE_RESIDUAL_REL · ‖v‖, floor)` where the floor is
/// `SOLVE_FLOOR_SAFETY · n · ε · ‖H‖ · ‖x‖`.
///
/// One step of iterative refinement is applied if the raw triangular solves
/// miss this; a residual still above it signals a numerically singular metric
/// and the solve reports an error instead of returning garbage.
pub const SOLVE_RESIDUAL_REL: f64 = 1e-10;

/// Safety multiplier on the attainable-residual floor `n·ε·‖H‖·‖x‖` of a
/// backward-stable solve. When the solution has large components along soft
/// directions of an ill-conditioned (but solvable) metric — routine close to
/// a domain boundary — merely forming `H·x` incurs rounding of that order,
/// so the check cannot demand less than the floor without rejecting correct
/// solves. The multiplier absorbs the refinement step's own rounding and the
/// slack in the row-sum norm bound.
pub const SOLVE_FLOOR_SAFETY: f64 = 32.0;

/// Accuracy expected of solve-then-reconstruct round trips in tests
/// (`x ≈ H⁻¹(H·x)` relative error). Looser than [`SOLVE_RESIDUAL_REL`]
/// because the round trip squares the condition number's effect.
pub const SOLVE_ROUNDTRIP_REL: f64 = 1e-8;

/// Step scale for finite-difference derivative checks: the probe is
/// `FD_STEP_SCALE · (1 + ‖z‖∞)` per coordinate, central differences.
pub const FD_STEP_SCALE: f64 = 1e-6;

/// Relative mismatch allowed between analytic and central finite-difference
/// derivatives. Central differences carry O(h²) truncation plus O(ε/h)
/// roundoff; with h ≈ 1e-6 both terms sit near 1e-8–1e-7, so 1e-5 is a
/// reliable detector of a wrong derivative without flaking on roundoff.
pub const FD_MATCH_REL: f64 = 1e-5;

/// Tolerance on Legendre round trips `∇f*(∇f(x)) = x` and on gradient/value
/// identities that compose a solve with an evaluation.
pub const LEGENDRE_ROUNDTRIP: f64 = 1e-8;

/// Residual at which a point counts as an analytical center (gradient dual
/// norm); the damped Newton center finder iterates until below this.
pub const CENTER_RESIDUAL: f64 = 1e-10;

/// Tolerance for the scaled-prox optimality characterization
/// `0 ∈ ∂g(w) + Q(w − x)` checked as a dual-norm membership residual.
pub const PROX_CHARACTERIZATION: f64 = 1e-10;

/// Tolerance for subgradient/membership inclusion checks (`e ∈ A(s)` for a
/// certificate element, `y ∈ ∂g(s)` after primal recovery).
pub const MEMBERSHIP_RESIDUAL: f64 = 1e-8;

/// Relative tolerance for identifying the exposed face of a conjugate
/// subdifferential from a computed dual point (sign tests on slopes, tie
/// tests on argmax coordinates). Dual iterates carry terminal noise well
/// below this from the inner subproblem solves, while reading a noise-level
/// sign literally would select a face an O(1) distance away; widening the
/// face only perturbs a Fenchel identity by O(FACE_DETECTION), which stays
/// under [`MEMBERSHIP_RESIDUAL`].
pub const FACE_DETECTION: f64 = 1e-9;

/// Near-exact subproblem accuracy used when evaluating a Newton decrement
/// (as opposed to taking a step). Small enough that the reported decrement
/// is trustworthy at every tolerance the step logic compares against.
pub const DECREMENT_EVAL_DELTA: f64 = 1e-8;

/// Additive slack for runtime assertions of one-step error bounds and
/// neighborhood invariants in debug mode, absorbing accumulated
/// floating-point error in the bound's own evaluation.
pub const DEBUG_BOUND_SLACK: f64 = 1e-6;

/// Slack used by the offline trace verifier for hard invariant failures.
pub const VERIFY_SLACK: f64 = 1e-6;

/// Monotonicity spot checks allow `⟨w − ŵ, z − ẑ⟩ ≥ −MONOTONE_SLACK`.
pub const MONOTONE_SLACK: f64 = 1e-10;

/// Stationarity residual accepted when plugging a closed-form subproblem
/// solution back into its optimality system.
pub const STATIONARITY: f64 = 1e-8;

/// Power-method iterations used to estimate the largest metric eigenvalue
/// for the proximal-gradient subsolver's step size. Twenty iterations give
/// a ratio within a few percent on dense spectra; the estimate is inflated
/// by [`POWER_SAFETY`] afterwards so an underestimate cannot break the
/// majorization.
pub const POWER_ITERATIONS: usize = 20;

/// Multiplicative safety factor applied to the power-method estimate.
pub const POWER_SAFETY: f64 = 1.05;

/// Iteration cap for the certified proximal-gradient subsolver as a function
/// of the dimension: `10·p + APG_CAP_BASE`.
pub const APG_CAP_BASE: usize = 500;

/// Multiplier for the dimension-proportional part of the subsolver cap.
pub const APG_CAP_PER_DIM: usize = 10;

/// Convergence tolerance (on the gradient-mapping dual norm, relative to the
/// problem scale) for the small quadratic programs inside residual
/// minimization; effectively exact at desk scale.
pub const RESIDUAL_QP: f64 = 1e-12;

/// Interior margin: points are required to sit at least this far (in the
/// barrier's own units) from the domain boundary when validating generated
/// starting points. Purely a validation aid, not a solver parameter.
pub const INTERIOR_MARGIN: f64 = 1e-12;
