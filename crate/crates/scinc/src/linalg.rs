//! Metric-aware linear algebra: symmetric-matrix vectorization and the
//! Hessian metrics that define local norms.
//!
//! Every barrier exposes its Hessian at a point as a [`Metric`]. The metric
//! answers four questions: apply `H`, apply `H⁻¹`, measure the primal local
//! norm `‖u‖ = √(uᵀHu)`, and measure the dual local norm `‖v‖* = √(vᵀH⁻¹v)`.
//! Structure is preserved where it matters: diagonal Hessians stay `O(p)`,
//! log-det Hessians `U ↦ Z⁻¹UZ⁻¹` never materialize the `n²×n²` Kronecker
//! matrix, and product domains compose block-diagonally.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::tol;

/// Column-major vectorization of a square matrix.
///
/// For symmetric `A`, `⟨sym_vec(A), sym_vec(B)⟩ = trace(AB)`, so Euclidean
/// inner products on vectorized iterates agree with the trace inner product.
pub fn sym_vec(a: &DMatrix<f64>) -> DVector<f64> {
    assert_eq!(a.nrows(), a.ncols(), "sym_vec expects a square matrix");
    DVector::from_column_slice(a.as_slice())
}

///// Inverse of [`sym_vec`]: reshape a length-`n²` vector to `n×n` and
/// symmetrize, discarding any skew part introduced by roundoff.
pub fn sym_mat(n: usize, v: &DVector<f64>) -> DMatrix<f64> {
    assert_eq!(v.len(), n * n, "sym_mat expects a length n² vector");
    let m = DMatrix::from_column_slice(n, n, v.as_slice());
    symmetrize(&m)
}

/// Returns `(M + Mᵀ)/2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// A symmetric matrix stored densely, kept symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMat {
    m: DMatrix<f64>,
}

impl SymMat {
    /// Wraps a square matrix, symmetrizing it.
    pub fn new(m: DMatrix<f64>) -> Result<SymMat> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(SymMat { m: symmetrize(&m) })
    }

    /// Rebuilds from a length-`n²` vectorization.
    pub fn from_vec(n: usize, v: &DVector<f64>) -> Result<SymMat> {
        if v.len() != n * n {
            return Err(Error::Dimension(format!(
                "expected length {} vectorization for order {}, got {}",
                n * n,
                n,
                v.len()
            )));
        }
        Ok(SymMat { m: sym_mat(n, v) })
    }

    /// Side length of the matrix.
    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    /// Borrows the underlying dense matrix.
    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Consumes the wrapper.
    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Column-major vectorization.
    pub fn to_vec(&self) -> DVector<f64> {
        sym_vec(&self.m)
    }
}

/// Positive-definite quadratic form `H` with structure-aware operations.
#[derive(Debug, Clone)]
pub enum Metric {
    /// `H = diag(h)` with `h > 0` elementwise.
    Diag(DVector<f64>),
    /// Dense SPD matrix with a cached Cholesky factorization.
    Dense {
        /// The matrix itself (kept for residual checks and refinement).
        h: DMatrix<f64>,
        /// Lower-triangular Cholesky factorization of `h`.
        chol: Cholesky<f64, Dyn>,
    },
    /// Log-det Hessian at SPD `Z`: acts on vectorized `U` as `Z⁻¹UZ⁻¹`,
    /// i.e. `H = Z⁻¹ ⊗ Z⁻¹`, without forming the Kronecker product.
    KronSpd {
        /// The SPD anchor matrix `Z`.
        z: DMatrix<f64>,
        /// Cholesky factorization of `Z`.
        z_chol: Cholesky<f64, Dyn>,
    },
    /// Block-diagonal composition over a product domain.
    Block(Vec<Metric>),
}

impl Metric {
    /// Diagonal metric; every entry must be strictly positive.
    pub fn diag(h: DVector<f64>) -> Result<Metric> {
        if h.is_empty() {
            return Err(Error::Dimension("empty diagonal metric".into()));
        }
        let min = h.min();
        if !(min > 0.0) || !h.iter().all(|x| x.is_finite()) {
            return Err(Error::SingularMetric {
                cond_estimate: f64::INFINITY,
            });
        }
        Ok(Metric::Diag(h))
    }

    /// Dense SPD metric; fails if the Cholesky factorization does not exist.
    pub fn dense(h: DMatrix<f64>) -> Result<Metric> {
        if h.nrows() != h.ncols() || h.is_empty() {
            return Err(Error::Dimension(format!(
                "dense metric must be square and nonempty, got {}x{}",
                h.nrows(),
                h.ncols()
            )));
        }
        let h = symmetrize(&h);
        match Cholesky::new(h.clone()) {
            Some(chol) => Ok(Metric::Dense { h, chol }),
            None => {
                eprintln!(
                    "DENSE-CTOR-FAIL dim={} diag_cond={:.3e} min_diag={:.3e} max_diag={:.3e}\n{}",
                    h.nrows(),
                    diag_cond_estimate(&h),
                    h.diagonal().min(),
                    h.diagonal().max(),
                    std::backtrace::Backtrace::force_capture()
                );
                Err(Error::SingularMetric {
                    cond_estimate: diag_cond_estimate(&h),
                })
            }
        }
    }

    /// Log-det-type metric anchored at SPD `z`, acting on `n²` vectors.
    pub fn kron_spd(z: DMatrix<f64>) -> Result<Metric> {
        if z.nrows() != z.ncols() || z.is_empty() {
            return Err(Error::Dimension(format!(
                "anchor matrix must be square and nonempty, got {}x{}",
                z.nrows(),
                z.ncols()
            )));
        }
        let z = symmetrize(&z);
        match Cholesky::new(z.clone()) {
            Some(z_chol) => Ok(Metric::KronSpd { z, z_chol }),
            None => Err(Error::SingularMetric {
                cond_estimate: diag_cond_estimate(&z),
            }),
        }
    }

    /// Block-diagonal metric over a product of domains.
    pub fn block(parts: Vec<Metric>) -> Metric {
        Metric::Block(parts)
    }

    /// Identity metric of dimension `n` (Euclidean geometry).
    pub fn identity(n: usize) -> Metric {
        Metric::Diag(DVector::from_element(n, 1.0))
    }

    /// Ambient dimension the metric acts on.
    pub fn dim(&self) -> usize {
        match self {
            Metric::Diag(h) => h.len(),
            Metric::Dense { h, .. } => h.nrows(),
            Metric::KronSpd { z, .. } => z.nrows() * z.nrows(),
            Metric::Block(parts) => parts.iter().map(Metric::dim).sum(),
        }
    }

    /// Applies `H` to a vector.
    pub fn hess_apply(&self, u: &DVector<f64>) -> DVector<f64> {
        assert_eq!(u.len(), self.dim(), "hess_apply dimension mismatch");
        match self {
            Metric::Diag(h) => u.component_mul(h),
            Metric::Dense { h, .. } => h * u,
            Metric::KronSpd { z: _, z_chol } => {
                let n = (u.len() as f64).sqrt() as usize;
                let u_mat = DMatrix::from_column_slice(n, n, u.as_slice());
                // Z⁻¹ U Z⁻¹ = solve(U) then right-multiply by Z⁻¹ via a
                // transposed solve (Z is symmetric).
                let left = z_chol.solve(&u_mat);
                let full = z_chol.solve(&left.transpose()).transpose();
                DVector::from_column_slice(full.as_slice())
            }
            Metric::Block(parts) => {
                let mut out = DVector::zeros(u.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let piece = part.hess_apply(&u.rows(offset, d).into_owned());
                    out.rows_mut(offset, d).copy_from(&piece);
                    offset += d;
                }
                out
            }
        }
    }

    /// Applies `H⁻¹` to a vector, with one step of iterative refinement and
    /// a residual check. Fails with a condition estimate when the system is
    /// effectively singular at working precision.
    pub fn solve(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        assert_eq!(v.len(), self.dim(), "solve dimension mismatch");
        let mut x = match self {
            Metric::Diag(h) => v.component_div(h),
            Metric::Dense { chol, .. } => chol.solve(v),
            Metric::KronSpd { z, .. } => {
                let n = z.nrows();
                let v_mat = DMatrix::from_column_slice(n, n, v.as_slice());
                let full = z * v_mat * z;
                DVector::from_column_slice(full.as_slice())
            }
            Metric::Block(parts) => {
                let mut out = DVector::zeros(v.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let piece = part.solve(&v.rows(offset, d).into_owned())?;
                    out.rows_mut(offset, d).copy_from(&piece);
                    offset += d;
                }
                return Ok(out);
            }
        };
        // One refinement sweep, then verify the residual is as small as a
        // backward-stable solve can make it. The scale must include
        // `‖H‖·‖x‖`: when the solution has large components along soft
        // directions (routine near a domain boundary), forming `H·x` alone
        // incurs rounding of that order, so demanding a residual relative to
        // `‖v‖` only would reject correct solves on ill-conditioned but
        // perfectly solvable systems.
        let r = v - self.hess_apply(&x);
        x += self.refine_step(&r);
        let r = v - self.hess_apply(&x);
        let floor = tol::SOLVE_FLOOR_SAFETY
            * (self.dim() as f64)
            * f64::EPSILON
            * self.norm_bound()
            * x.norm();
        let tol = (tol::SOLVE_RESIDUAL_REL * v.norm())
            .max(floor)
            .max(f64::MIN_POSITIVE);
        let singular = self.cond_estimate() >= 1.0 / ((self.dim() as f64) * f64::EPSILON);
        if !singular && r.norm() <= tol && x.iter().all(|t| t.is_finite()) {
            Ok(x)
        } else {
            eprintln!(
                "SOLVE-FAIL variant={} dim={} |v|={:.3e} |x|={:.3e} |r|={:.3e} tol={:.3e} cond={:.3e} singular={}\n{}",
                match self {
                    Metric::Diag(_) => "Diag",
                    Metric::Dense { .. } => "Dense",
                    Metric::KronSpd { .. } => "KronSpd",
                    Metric::Block(_) => "Block",
                },
                self.dim(),
                v.norm(),
                x.norm(),
                r.norm(),
                tol,
                self.cond_estimate(),
                singular,
                std::backtrace::Backtrace::force_capture()
            );
            Err(Error::SingularMetric {
                cond_estimate: self.cond_estimate(),
            })
        }
    }

    /// Single backsolve used for refinement (no recursion into checks).
    fn refine_step(&self, r: &DVector<f64>) -> DVector<f64> {
        match self {
            Metric::Diag(h) => r.component_div(h),
            Metric::Dense { chol, .. } => chol.solve(r),
            Metric::KronSpd { z, .. } => {
                let n = z.nrows();
                let r_mat = DMatrix::from_column_slice(n, n, r.as_slice());
                let full = z * r_mat * z;
                DVector::from_column_slice(full.as_slice())
            }
            Metric::Block(parts) => {
                let mut out = DVector::zeros(r.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    let piece = part.refine_step(&r.rows(offset, d).into_owned());
                    out.rows_mut(offset, d).copy_from(&piece);
                    offset += d;
                }
                out
            }
        }
    }

    /// Primal local norm `√(uᵀHu)`, clamped at zero against roundoff.
    pub fn local_norm(&self, u: &DVector<f64>) -> f64 {
        u.dot(&self.hess_apply(u)).max(0.0).sqrt()
    }

    /// Dual local norm `√(vᵀH⁻¹v)`, clamped at zero against roundoff.
    pub fn dual_local_norm(&self, v: &DVector<f64>) -> Result<f64> {
        Ok(v.dot(&self.solve(v)?).max(0.0).sqrt())
    }

    /// Lower-triangular factor `G` with `GGᵀ = H`, materialized on demand.
    pub fn chol_lower(&self) -> Result<DMatrix<f64>> {
        match self {
            Metric::Diag(h) => Ok(DMatrix::from_diagonal(&h.map(f64::sqrt))),
            Metric::Dense { chol, .. } => Ok(chol.l()),
            Metric::KronSpd { z: _, z_chol } => {
                // H = Z⁻¹ ⊗ Z⁻¹; factor the inverse freshly so the Kronecker
                // factor W ⊗ W stays lower triangular.
                let z_inv = z_chol.inverse();
                let w = Cholesky::new(symmetrize(&z_inv))
                    .ok_or(Error::SingularMetric {
                        cond_estimate: self.cond_estimate(),
                    })?
                    .l();
                Ok(w.kronecker(&w))
            }
            Metric::Block(parts) => {
                let factors = parts
                    .iter()
                    .map(Metric::chol_lower)
                    .collect::<Result<Vec<_>>>()?;
                Ok(block_diag(&factors))
            }
        }
    }

    /// Materializes the full dense matrix (testing and small problems only).
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Metric::Diag(h) => DMatrix::from_diagonal(h),
            Metric::Dense { h, .. } => h.clone(),
            Metric::KronSpd { z: _, z_chol } => {
                let z_inv = symmetrize(&z_chol.inverse());
                z_inv.kronecker(&z_inv)
            }
            Metric::Block(parts) => {
                let pieces: Vec<DMatrix<f64>> = parts.iter().map(Metric::to_dense).collect();
                block_diag(&pieces)
            }
        }
    }

    /// The metric `s·H` for `s > 0`, reusing factorizations where possible.
    pub fn scale(&self, s: f64) -> Result<Metric> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Numeric(format!("metric scale must be positive, got {s}")));
        }
        match self {
            Metric::Diag(h) => Metric::diag(h * s),
            Metric::Dense { h, .. } => Metric::dense(h * s),
            // s·(Z⁻¹⊗Z⁻¹) = ((Z/√s)⁻¹) ⊗ ((Z/√s)⁻¹)
            Metric::KronSpd { z, .. } => Metric::kron_spd(z / s.sqrt()),
            Metric::Block(parts) => Ok(Metric::Block(
                parts.iter().map(|p| p.scale(s)).collect::<Result<Vec<_>>>()?,
            )),
        }
    }

    /// The inverse metric `H⁻¹`, again as a structured [`Metric`].
    pub fn inverse_metric(&self) -> Result<Metric> {
        match self {
            Metric::Diag(h) => Metric::diag(h.map(|x| 1.0 / x)),
            Metric::Dense { chol, .. } => Metric::dense(symmetrize(&chol.inverse())),
            // (Z⁻¹⊗Z⁻¹)⁻¹ = Z⊗Z = (Z⁻¹)⁻¹ ⊗ (Z⁻¹)⁻¹, anchored at Z⁻¹.
            Metric::KronSpd { z: _, z_chol } => Metric::kron_spd(symmetrize(&z_chol.inverse())),
            Metric::Block(parts) => Ok(Metric::Block(
                parts
                    .iter()
                    .map(Metric::inverse_metric)
                    .collect::<Result<Vec<_>>>()?,
            )),
        }
    }

    /// The diagonal vector when the metric is (block-)diagonal, else `None`.
    pub fn as_diagonal(&self) -> Option<DVector<f64>> {
        match self {
            Metric::Diag(h) => Some(h.clone()),
            Metric::Block(parts) => {
                let mut out = Vec::with_capacity(self.dim());
                for part in parts {
                    out.extend_from_slice(part.as_diagonal()?.as_slice());
                }
                Some(DVector::from_vec(out))
            }
            _ => None,
        }
    }

    /// Cheap condition-number lower bound, reported in error payloads.
    pub fn cond_estimate(&self) -> f64 {
        match self {
            Metric::Diag(h) => {
                let max = h.max();
                let min = h.min();
                if min > 0.0 {
                    max / min
                } else {
                    f64::INFINITY
                }
            }
            Metric::Dense { chol, .. } => {
                let l = chol.l();
                let d = l.diagonal();
                let (max, min) = (d.max(), d.min());
                if min > 0.0 {
                    (max / min) * (max / min)
                } else {
                    f64::INFINITY
                }
            }
            Metric::KronSpd { z: _, z_chol } => {
                let l = z_chol.l();
                let d = l.diagonal();
                let (max, min) = (d.max(), d.min());
                if min > 0.0 {
                    let c = (max / min) * (max / min);
                    c * c
                } else {
                    f64::INFINITY
                }
            }
            Metric::Block(parts) => parts
                .iter()
                .map(Metric::cond_estimate)
                .fold(1.0, f64::max),
        }
    }

    /// Upper bound on `‖H‖₂`, used to scale the solve residual check.
    fn norm_bound(&self) -> f64 {
        match self {
            Metric::Diag(h) => h.max(),
            Metric::Dense { h, .. } => {
                // Row-sum norm dominates the spectral norm for symmetric H.
                (0..h.nrows())
                    .map(|i| h.row(i).iter().map(|t| t.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            }
            Metric::KronSpd { z: _, z_chol } => {
                // ‖Z⁻¹ ⊗ Z⁻¹‖₂ = ‖Z⁻¹‖₂²; bound ‖Z⁻¹‖₂ by its row-sum norm.
                let z_inv = z_chol.inverse();
                let b = (0..z_inv.nrows())
                    .map(|i| z_inv.row(i).iter().map(|t| t.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                b * b
            }
            Metric::Block(parts) => parts.iter().map(Metric::norm_bound).fold(0.0, f64::max),
        }
    }
}

/// Condition estimate from the diagonal of a matrix that failed to factor.
fn diag_cond_estimate(h: &DMatrix<f64>) -> f64 {
    let d = h.diagonal();
    let max = d.max();
    let min = d.min();
    if min > 0.0 && max.is_finite() {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Assembles a block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(total, total);
    let mut offset = 0;
    for b in blocks {
        let d = b.nrows();
        out.view_mut((offset, offset), (d, d)).copy_from(b);
        offset += d;
    }
    out
}

/// Upper bound on the largest eigenvalue of `H` by power iteration with a
/// multiplicative safety factor.
pub fn spectral_upper_bound(h: &Metric, rng: &mut crate::rng::Rng) -> f64 {
    let n = h.dim();
    let mut v = DVector::from_iterator(n, (0..n).map(|_| rng.gauss()));
    let nrm = v.norm();
    if nrm == 0.0 {
        v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    } else {
        v /= nrm;
    }
    let mut lambda = 0.0_f64;
    for _ in 0..tol::POWER_ITERATIONS {
        let w = h.hess_apply(&v);
        let wn = w.norm();
        if wn == 0.0 || !wn.is_finite() {
            break;
        }
        lambda = v.dot(&w).abs();
        v = w / wn;
    }
    // One more Rayleigh quotient on the converged direction.
    let w = h.hess_apply(&v);
    lambda = lambda.max(v.dot(&w).abs());
    lambda * tol::POWER_SAFETY
}
