//! Self-concordant barrier oracles for the domains the solver supports,
//! their Legendre conjugates, and composite barriers.
//!
//! Each barrier knows its parameter `ν`, whether it is logarithmically
//! homogeneous, and the derived step-budget constant `κ` (1 when
//! log-homogeneous, `ν + 2√ν` otherwise). Evaluation outside the open
//! domain is a [`Error::Domain`] error, never a NaN.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{sym_vec, symmetrize, Metric};

/// A self-concordant barrier for an open convex domain in `R^p`.
#[derive(Debug, Clone)]
pub enum BarrierFn {
    /// `−Σ log z_i` on the positive orthant; `ν = p`, log-homogeneous.
    Orthant {
        /// Ambient dimension `p`.
        dim: usize,
    },
    /// `−log det Z` on the SPD cone, acting on column-stacked `n²` vectors;
    /// `ν = n`, log-homogeneous.
    LogDet {
        /// Matrix side length `n`.
        order: usize,
    },
    /// `−Σ log(1 − y_i²)` on the open unit box `‖y‖∞ < 1`; `ν = 2p`.
    UnitBox {
        /// Ambient dimension `p`.
        dim: usize,
    },
    /// `−log(t² − ‖x‖²)` on the Lorentz cone interior, layout `(x, t)` with
    /// the cone variable last; `ν = 2`, log-homogeneous.
    Lorentz {
        /// Length of the `x` block (total dimension is `head + 1`).
        head: usize,
    },
    /// Separable sum over a product domain; `ν` adds, blocks stay disjoint.
    Sum(Vec<BarrierFn>),
    /// Barrier of a linearly-sliced conjugate domain
    /// `{y : objective − Lᵀy ∈ dom f*}`, with `φ(y) = f*(objective − Lᵀy)`.
    /// Keeps the parameter `ν` of the underlying cone barrier.
    DualFeasible {
        /// Log-homogeneous cone barrier whose conjugate is evaluated.
        cone: Box<BarrierFn>,
        /// Linear map from the cone's space into the dual variable space,
        /// stored as an `n×p` matrix with full row rank.
        coupling: DMatrix<f64>,
        /// Offset (the linear objective of the underlying problem).
        objective: DVector<f64>,
    },
}

impl BarrierFn {
    /// Barrier of the positive orthant in `R^p`.
    pub fn orthant(p: usize) -> BarrierFn {
        assert!(p >= 1, "orthant needs dimension >= 1");
        BarrierFn::Orthant { dim: p }
    }

    /// Barrier of the SPD cone of `n×n` matrices (vectorized).
    pub fn logdet(n: usize) -> BarrierFn {
        assert!(n >= 1, "logdet needs order >= 1");
        BarrierFn::LogDet { order: n }
    }

    /// Barrier of the open unit box `‖y‖∞ < 1` in `R^p`.
    pub fn unit_box(p: usize) -> BarrierFn {
        assert!(p >= 1, "box needs dimension >= 1");
        BarrierFn::UnitBox { dim: p }
    }

    /// Barrier of the Lorentz cone `{(x,t) : ‖x‖₂ < t}` with `x ∈ R^p`.
    pub fn lorentz(p: usize) -> BarrierFn {
        assert!(p >= 1, "lorentz needs head dimension >= 1");
        BarrierFn::Lorentz { head: p }
    }

    /// Separable sum of barriers over the product of their domains.
    pub fn sum(parts: Vec<BarrierFn>) -> BarrierFn {
        assert!(!parts.is_empty(), "sum needs at least one part");
        BarrierFn::Sum(parts)
    }

    /// Barrier `φ(y) = f*(objective − couplingᵀ y)` of the dual feasible
    /// set of a conically constrained linear problem.
    ///
    /// `coupling` is `n×p` (dual dimension × cone dimension) and must have
    /// full row rank so the Hessian `L ∇²f* Lᵀ` stays positive definite.
    pub fn dual_feasible(
        cone: BarrierFn,
        coupling: DMatrix<f64>,
        objective: DVector<f64>,
    ) -> Result<BarrierFn> {
        if !cone.log_homogeneous() {
            return Err(Error::Unsupported(
                "dual feasible barrier needs a log-homogeneous cone barrier".into(),
            ));
        }
        cone.conjugate()?; // validates that a closed-form conjugate exists
        if coupling.ncols() != cone.dim() {
            return Err(Error::Dimension(format!(
                "coupling has {} columns but the cone lives in dimension {}",
                coupling.ncols(),
                cone.dim()
            )));
        }
        if objective.len() != cone.dim() {
            return Err(Error::Dimension(format!(
                "objective has length {} but the cone lives in dimension {}",
                objective.len(),
                cone.dim()
            )));
        }
        let rank = coupling.clone().svd(false, false).rank(1e-10);
        if rank < coupling.nrows() {
            return Err(Error::Init(format!(
                "coupling matrix must have full row rank: rank {} < rows {}",
                rank,
                coupling.nrows()
            )));
        }
        Ok(BarrierFn::DualFeasible {
            cone: Box::new(cone),
            coupling,
            objective,
        })
    }

    /// Ambient dimension the barrier acts on.
    pub fn dim(&self) -> usize {
        match self {
            BarrierFn::Orthant { dim } => *dim,
            BarrierFn::LogDet { order } => order * order,
            BarrierFn::UnitBox { dim } => *dim,
            BarrierFn::Lorentz { head } => head + 1,
            BarrierFn::Sum(parts) => parts.iter().map(BarrierFn::dim).sum(),
            BarrierFn::DualFeasible { coupling, .. } => coupling.nrows(),
        }
    }

    /// Barrier parameter `ν`.
    pub fn nu(&self) -> f64 {
        match self {
            BarrierFn::Orthant { dim } => *dim as f64,
            BarrierFn::LogDet { order } => *order as f64,
            BarrierFn::UnitBox { dim } => 2.0 * *dim as f64,
            BarrierFn::Lorentz { .. } => 2.0,
            BarrierFn::Sum(parts) => parts.iter().map(BarrierFn::nu).sum(),
            BarrierFn::DualFeasible { cone, .. } => cone.nu(),
        }
    }

    /// Whether `value(τz) = value(z) − ν log τ` holds on the domain.
    pub fn log_homogeneous(&self) -> bool {
        match self {
            BarrierFn::Orthant { .. } | BarrierFn::LogDet { .. } | BarrierFn::Lorentz { .. } => {
                true
            }
            BarrierFn::UnitBox { .. } | BarrierFn::DualFeasible { .. } => false,
            BarrierFn::Sum(parts) => parts.iter().all(BarrierFn::log_homogeneous),
        }
    }

    /// Step-budget constant: `1` for log-homogeneous barriers, `ν + 2√ν`
    /// otherwise.
    pub fn kappa(&self) -> f64 {
        if self.log_homogeneous() {
            1.0
        } else {
            let nu = self.nu();
            nu + 2.0 * nu.sqrt()
        }
    }

    /// Strict interior membership (exact boundary points are rejected).
    pub fn in_domain(&self, z: &DVector<f64>) -> bool {
        if z.len() != self.dim() || !z.iter().all(|x| x.is_finite()) {
            return false;
        }
        match self {
            BarrierFn::Orthant { .. } => z.iter().all(|&x| x > 0.0),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, z.as_slice());
                Cholesky::new(symmetrize(&m)).is_some()
            }
            BarrierFn::UnitBox { .. } => z.iter().all(|&x| x.abs() < 1.0),
            BarrierFn::Lorentz { head } => {
                let t = z[*head];
                t > 0.0 && z.rows(0, *head).norm() < t
            }
            BarrierFn::Sum(parts) => {
                let mut offset = 0;
                parts.iter().all(|part| {
                    let d = part.dim();
                    let ok = part.in_domain(&z.rows(offset, d).into_owned());
                    offset += d;
                    ok
                })
            }
            BarrierFn::DualFeasible {
                cone,
                coupling,
                objective,
            } => {
                let w = objective - coupling.transpose() * z;
                match cone.conjugate() {
                    Ok(conj) => conj.in_domain(&w),
                    Err(_) => false,
                }
            }
        }
    }

    /// Barrier value; [`Error::Domain`] outside the open domain.
    pub fn value(&self, z: &DVector<f64>) -> Result<f64> {
        self.check_point(z)?;
        Ok(match self {
            BarrierFn::Orthant { .. } => -z.iter().map(|x| x.ln()).sum::<f64>(),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, z.as_slice());
                let chol = Cholesky::new(symmetrize(&m)).expect("domain checked");
                -2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
            }
            BarrierFn::UnitBox { .. } => -z.iter().map(|y| (1.0 - y * y).ln()).sum::<f64>(),
            BarrierFn::Lorentz { head } => {
                let t = z[*head];
                let r = t * t - z.rows(0, *head).norm_squared();
                -r.ln()
            }
            BarrierFn::Sum(parts) => {
                let mut total = 0.0;
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    total += part.value(&z.rows(offset, d).into_owned())?;
                    offset += d;
                }
                total
            }
            BarrierFn::DualFeasible {
                cone,
                coupling,
                objective,
            } => {
                let w = objective - coupling.transpose() * z;
                cone.conjugate()?.value(&w)?
            }
        })
    }

    /// Barrier gradient; [`Error::Domain`] outside the open domain.
    pub fn gradient(&self, z: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(z)?;
        Ok(match self {
            BarrierFn::Orthant { .. } => z.map(|x| -1.0 / x),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, z.as_slice());
                let chol = Cholesky::new(symmetrize(&m)).expect("domain checked");
                -sym_vec(&symmetrize(&chol.inverse()))
            }
            BarrierFn::UnitBox { .. } => z.map(|y| 2.0 * y / (1.0 - y * y)),
            BarrierFn::Lorentz { head } => {
                let t = z[*head];
                let x = z.rows(0, *head);
                let r = t * t - x.norm_squared();
                let mut g = DVector::zeros(head + 1);
                g.rows_mut(0, *head).copy_from(&(2.0 / r * x));
                g[*head] = -2.0 * t / r;
                g
            }
            BarrierFn::Sum(parts) => {
                let mut g = DVector::zeros(z.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let piece = part.gradient(&z.rows(offset, d).into_owned())?;
                    g.rows_mut(offset, d).copy_from(&piece);
                    offset += d;
                }
                g
            }
            BarrierFn::DualFeasible {
                cone,
                coupling,
                objective,
            } => {
                let w = objective - coupling.transpose() * z;
                -(coupling * cone.conjugate()?.gradient(&w)?)
            }
        })
    }

    /// Hessian of the barrier at `z` as a structure-aware [`Metric`].
    pub fn metric(&self, z: &DVector<f64>) -> Result<Metric> {
        self.check_point(z)?;
        match self {
            BarrierFn::Orthant { .. } => Metric::diag(z.map(|x| 1.0 / (x * x))),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, z.as_slice());
                Metric::kron_spd(m)
            }
            BarrierFn::UnitBox { .. } => Metric::diag(z.map(|y| {
                let r = 1.0 - y * y;
                (2.0 + 2.0 * y * y) / (r * r)
            })),
            BarrierFn::Lorentz { head } => {
                let t = z[*head];
                let x = z.rows(0, *head).into_owned();
                let r = t * t - x.norm_squared();
                Metric::dense(quadratic_log_hessian(&x, t, r))
            }
            BarrierFn::Sum(parts) => {
                let mut blocks = Vec::with_capacity(parts.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    blocks.push(part.metric(&z.rows(offset, d).into_owned())?);
                    offset += d;
                }
                Ok(Metric::block(blocks))
            }
            BarrierFn::DualFeasible {
                cone,
                coupling,
                objective,
            } => {
                let w = objective - coupling.transpose() * z;
                let inner = cone.conjugate()?.metric(&w)?;
                // Materialize L ∇²f* Lᵀ densely: apply the inner metric to
                // each column of Lᵀ, then contract with L.
                let n = coupling.nrows();
                let lt = coupling.transpose();
                let mut mapped = DMatrix::zeros(coupling.ncols(), n);
                for j in 0..n {
                    let col = lt.column(j).into_owned();
                    mapped.set_column(j, &inner.hess_apply(&col));
                }
                Metric::dense(symmetrize(&(coupling * mapped)))
            }
        }
    }

    /// A point in the open domain, when one is known a priori.
    pub fn interior_point(&self) -> Option<DVector<f64>> {
        match self {
            BarrierFn::Orthant { dim } => Some(DVector::from_element(*dim, 1.0)),
            BarrierFn::LogDet { order } => {
                Some(sym_vec(&DMatrix::<f64>::identity(*order, *order)))
            }
            BarrierFn::UnitBox { dim } => Some(DVector::zeros(*dim)),
            BarrierFn::Lorentz { head } => {
                let mut z = DVector::zeros(head + 1);
                z[*head] = 1.0;
                Some(z)
            }
            BarrierFn::Sum(parts) => {
                let mut z = DVector::zeros(self.dim());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    z.rows_mut(offset, d).copy_from(&part.interior_point()?);
                    offset += d;
                }
                Some(z)
            }
            BarrierFn::DualFeasible { .. } => None,
        }
    }

    /// Distance of `z` from the analytic center, measured as
    /// `‖∇F(z)‖*_z`; zero exactly at the center.
    pub fn center_residual(&self, z: &DVector<f64>) -> Result<f64> {
        let g = self.gradient(z)?;
        self.metric(z)?.dual_local_norm(&g)
    }

    /// Legendre conjugate, available for the log-homogeneous cone barriers
    /// (orthant, log-det, Lorentz) and separable sums of them.
    pub fn conjugate(&self) -> Result<ConjugateBarrier> {
        match self {
            BarrierFn::Orthant { .. } | BarrierFn::LogDet { .. } | BarrierFn::Lorentz { .. } => {
                Ok(ConjugateBarrier { base: self.clone() })
            }
            BarrierFn::Sum(parts) => {
                for part in parts {
                    part.conjugate()?;
                }
                Ok(ConjugateBarrier { base: self.clone() })
            }
            BarrierFn::UnitBox { .. } => Err(Error::Unsupported(
                "the unit-box barrier has no closed-form conjugate here".into(),
            )),
            BarrierFn::DualFeasible { .. } => Err(Error::Unsupported(
                "conjugates of dual-feasible-set barriers are not supported".into(),
            )),
        }
    }

    fn check_point(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has length {} but the barrier acts on dimension {}",
                z.len(),
                self.dim()
            )));
        }
        if !self.in_domain(z) {
            return Err(Error::Domain(format!(
                "point is outside the open barrier domain (dim {})",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Hessian of `−log r` where `r = t² − ‖x‖²`:
/// `diag(2/r·I, −2/r) + ∇r∇rᵀ/r²` with `∇r = (−2x, 2t)`.
fn quadratic_log_hessian(x: &DVector<f64>, t: f64, r: f64) -> DMatrix<f64> {
    let p = x.len();
    let mut grad_r = DVector::zeros(p + 1);
    grad_r.rows_mut(0, p).copy_from(&(-2.0 * x));
    grad_r[p] = 2.0 * t;
    let mut h = &grad_r * grad_r.transpose() / (r * r);
    for i in 0..p {
        h[(i, i)] += 2.0 / r;
    }
    h[(p, p)] -= 2.0 / r;
    h
}

/// Legendre conjugate `f*` of a log-homogeneous cone barrier, itself a
/// `ν`-self-concordant barrier of the anti-dual cone's interior.
#[derive(Debug, Clone)]
pub struct ConjugateBarrier {
    base: BarrierFn,
}

impl ConjugateBarrier {
    /// The barrier this is conjugate to.
    pub fn base(&self) -> &BarrierFn {
        &self.base
    }

    /// Ambient dimension (same as the base barrier).
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// Barrier parameter (conjugation preserves `ν`).
    pub fn nu(&self) -> f64 {
        self.base.nu()
    }

    /// Membership in the open conjugate domain (the anti-dual cone).
    pub fn in_domain(&self, s: &DVector<f64>) -> bool {
        if s.len() != self.dim() || !s.iter().all(|x| x.is_finite()) {
            return false;
        }
        match &self.base {
            BarrierFn::Orthant { .. } => s.iter().all(|&x| x < 0.0),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, s.as_slice());
                Cholesky::new(symmetrize(&(-m))).is_some()
            }
            BarrierFn::Lorentz { head } => {
                let sigma = s[*head];
                sigma < 0.0 && s.rows(0, *head).norm() < -sigma
            }
            BarrierFn::Sum(parts) => {
                let mut offset = 0;
                parts.iter().all(|part| {
                    let d = part.dim();
                    let ok = part
                        .conjugate()
                        .map(|c| c.in_domain(&s.rows(offset, d).into_owned()))
                        .unwrap_or(false);
                    offset += d;
                    ok
                })
            }
            _ => false,
        }
    }

    /// Conjugate value `f*(s)`.
    pub fn value(&self, s: &DVector<f64>) -> Result<f64> {
        self.check_point(s)?;
        Ok(match &self.base {
            BarrierFn::Orthant { dim } => {
                -(*dim as f64) - s.iter().map(|x| (-x).ln()).sum::<f64>()
            }
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, s.as_slice());
                let chol = Cholesky::new(symmetrize(&(-m))).expect("domain checked");
                let logdet = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                -(*order as f64) - logdet
            }
            BarrierFn::Lorentz { head } => {
                let sigma = s[*head];
                let r = sigma * sigma - s.rows(0, *head).norm_squared();
                -r.ln() + 2.0 * std::f64::consts::LN_2 - 2.0
            }
            BarrierFn::Sum(parts) => {
                let mut total = 0.0;
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    total += part.conjugate()?.value(&s.rows(offset, d).into_owned())?;
                    offset += d;
                }
                total
            }
            _ => unreachable!("conjugate construction rejects other variants"),
        })
    }

    /// Conjugate gradient `∇f*(s)`, which lies in the base domain.
    pub fn gradient(&self, s: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_point(s)?;
        Ok(match &self.base {
            BarrierFn::Orthant { .. } => s.map(|x| -1.0 / x),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, s.as_slice());
                let chol = Cholesky::new(symmetrize(&(-m))).expect("domain checked");
                sym_vec(&symmetrize(&chol.inverse()))
            }
            BarrierFn::Lorentz { head } => {
                let sigma = s[*head];
                let x = s.rows(0, *head);
                let r = sigma * sigma - x.norm_squared();
                let mut g = DVector::zeros(head + 1);
                g.rows_mut(0, *head).copy_from(&(2.0 / r * x));
                g[*head] = -2.0 * sigma / r;
                g
            }
            BarrierFn::Sum(parts) => {
                let mut g = DVector::zeros(s.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let piece = part
                        .conjugate()?
                        .gradient(&s.rows(offset, d).into_owned())?;
                    g.rows_mut(offset, d).copy_from(&piece);
                    offset += d;
                }
                g
            }
            _ => unreachable!("conjugate construction rejects other variants"),
        })
    }

    /// Conjugate Hessian `∇²f*(s)` as a metric.
    pub fn metric(&self, s: &DVector<f64>) -> Result<Metric> {
        self.check_point(s)?;
        match &self.base {
            BarrierFn::Orthant { .. } => Metric::diag(s.map(|x| 1.0 / (x * x))),
            BarrierFn::LogDet { order } => {
                let m = DMatrix::from_column_slice(*order, *order, s.as_slice());
                Metric::kron_spd(-m)
            }
            BarrierFn::Lorentz { head } => {
                let sigma = s[*head];
                let x = s.rows(0, *head).into_owned();
                let r = sigma * sigma - x.norm_squared();
                Metric::dense(quadratic_log_hessian(&x, sigma, r))
            }
            BarrierFn::Sum(parts) => {
                let mut blocks = Vec::with_capacity(parts.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    blocks.push(part.conjugate()?.metric(&s.rows(offset, d).into_owned())?);
                    offset += d;
                }
                Ok(Metric::block(blocks))
            }
            _ => unreachable!("conjugate construction rejects other variants"),
        }
    }

    fn check_point(&self, s: &DVector<f64>) -> Result<()> {
        if s.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has length {} but the conjugate acts on dimension {}",
                s.len(),
                self.dim()
            )));
        }
        if !self.in_domain(s) {
            return Err(Error::Domain(
                "point is outside the conjugate barrier domain".into(),
            ));
        }
        Ok(())
    }
}

/// Minimizes a (bounded-domain) barrier by damped Newton steps
/// `z ← z − H⁻¹∇F(z)/(1+λ)` with `λ = ‖∇F(z)‖*_z`, until the center
/// residual drops below `residual_tol`.
pub fn analytic_center(
    barrier: &BarrierFn,
    start: &DVector<f64>,
    residual_tol: f64,
    max_iters: usize,
) -> Result<DVector<f64>> {
    let mut z = start.clone();
    for _ in 0..max_iters {
        let g = barrier.gradient(&z)?;
        let h = barrier.metric(&z)?;
        let lambda = h.dual_local_norm(&g)?;
        if lambda <= residual_tol {
            return Ok(z);
        }
        let step = h.solve(&g)?;
        z -= step / (1.0 + lambda);
    }
    Err(Error::Budget {
        phase: "centering".into(),
        iterations: max_iters,
    })
}
