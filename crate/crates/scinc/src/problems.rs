//! Deterministic generators for the three benchmark problem families,
//! plus the validators and reference oracles shared by the test suites.
//!
//! Every generator is a pure function of its arguments: the same seed
//! always reproduces bit-identical data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::barrier::BarrierFn;
use crate::error::{Error, Result};
use crate::instances::{DualConicProblem, PrimalProblem, SaddleProblem};
use crate::linalg::{sym_vec, symmetrize};
use crate::newton::Schedule;
use crate::prox::{ProxFn, ScalarTerm};
use crate::rng::Rng;

fn default_weight() -> f64 {
    0.2
}

fn default_rank_fraction() -> f64 {
    0.25
}

fn default_noise_variance() -> f64 {
    1e-4
}

fn default_noise_density() -> f64 {
    0.10
}

fn default_p_in() -> f64 {
    0.9
}

fn default_p_out() -> f64 {
    0.1
}

/// Serializable description of a benchmark instance; regenerating from
/// the same description yields bit-identical data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Minimize the maximum eigenvalue of an affine symmetric-matrix
    /// family over the unit box (a spectrahedron saddle problem).
    MaxEigenvalue {
        /// Matrix order.
        n: usize,
        /// Number of coefficient matrices.
        p: usize,
        /// Generator seed.
        seed: u64,
    },
    /// Split a noisy observation into a low-rank positive part and sparse
    /// deviations (a primal composite problem over the positive
    /// semidefinite cone).
    SparseLowrank {
        /// Matrix order.
        n: usize,
        /// Generator seed.
        seed: u64,
        /// Absolute-deviation weight ρ.
        #[serde(default = "default_weight")]
        weight: f64,
        /// Planted rank as a fraction of `n` (floor).
        #[serde(default = "default_rank_fraction")]
        rank_fraction: f64,
        /// Variance of the sparse noise entries.
        #[serde(default = "default_noise_variance")]
        noise_variance: f64,
        /// Probability that an upper-triangle entry carries noise.
        #[serde(default = "default_noise_density")]
        noise_density: f64,
    },
    /// Recover a planted partition from a random graph (a dual conic
    /// problem over the positive semidefinite cone).
    ClusterRecovery {
        /// Cluster sizes (each ≥ 2, at least two clusters).
        sizes: Vec<usize>,
        /// Within-cluster edge probability.
        #[serde(default = "default_p_in")]
        p_in: f64,
        /// Across-cluster edge probability.
        #[serde(default = "default_p_out")]
        p_out: f64,
        /// Generator seed.
        seed: u64,
    },
}

/// A generated instance of one of the three families.
#[derive(Debug, Clone)]
pub enum GeneratedProblem {
    /// Spectrahedron saddle instance.
    MaxEigenvalue(MaxEigInstance),
    /// Low-rank-plus-sparse decomposition instance.
    SparseLowrank(SparseLowrankInstance),
    /// Planted-partition recovery instance.
    ClusterRecovery(ClusterInstance),
}

impl ProblemSpec {
    /// Generates the instance this description names.
    pub fn generate(&self) -> Result<GeneratedProblem> {
        match self {
            ProblemSpec::MaxEigenvalue { n, p, seed } => Ok(GeneratedProblem::MaxEigenvalue(
                gen_max_eigenvalue(*n, *p, *seed)?,
            )),
            ProblemSpec::SparseLowrank {
                n,
                seed,
                weight,
                rank_fraction,
                noise_variance,
                noise_density,
            } => Ok(GeneratedProblem::SparseLowrank(gen_sparse_lowrank_with(
                *n,
                *seed,
                *weight,
                *rank_fraction,
                *noise_variance,
                *noise_density,
            )?)),
            ProblemSpec::ClusterRecovery {
                sizes,
                p_in,
                p_out,
                seed,
            } => Ok(GeneratedProblem::ClusterRecovery(gen_cluster_recovery(
                sizes, *p_in, *p_out, *seed,
            )?)),
        }
    }

    /// The family tag used in serialized files and CLI arguments.
    pub fn family_name(&self) -> &'static str {
        match self {
            ProblemSpec::MaxEigenvalue { .. } => "max_eigenvalue",
            ProblemSpec::SparseLowrank { .. } => "sparse_lowrank",
            ProblemSpec::ClusterRecovery { .. } => "cluster_recovery",
        }
    }
}

// ---------------------------------------------------------------------------
// Maximum-eigenvalue family
// ---------------------------------------------------------------------------

/// Data of a maximum-eigenvalue instance:
/// `min_{y ∈ [−1,1]^p} λ_max(C + Σ_j y_j L_j)` with symmetric Gaussian
/// `C` and `L_j`.
#[derive(Debug, Clone)]
pub struct MaxEigInstance {
    /// Constant matrix `C` (symmetric, `n×n`).
    pub objective: DMatrix<f64>,
    /// Coefficient matrices `L_j` (symmetric, `n×n`).
    pub coefficients: Vec<DMatrix<f64>>,
}

impl MaxEigInstance {
    /// Matrix order `n`.
    pub fn order(&self) -> usize {
        self.objective.nrows()
    }

    /// Number of coefficient matrices `p`.
    pub fn coefficient_count(&self) -> usize {
        self.coefficients.len()
    }

    /// The coupling matrix of the saddle formulation: row `j` is the
    /// vectorization of `L_j`.
    pub fn coupling(&self) -> DMatrix<f64> {
        let n = self.order();
        let p = self.coefficient_count();
        let mut l = DMatrix::zeros(p, n * n);
        for (j, m) in self.coefficients.iter().enumerate() {
            l.set_row(j, &sym_vec(m).transpose());
        }
        l
    }

    /// The affine matrix family evaluated at `y`.
    pub fn assemble(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.objective.clone();
        for (j, l) in self.coefficients.iter().enumerate() {
            m += l * y[j];
        }
        m
    }

    /// Largest eigenvalue of the family at `y` (the objective being
    /// minimized over the box).
    pub fn value(&self, y: &DVector<f64>) -> f64 {
        SymmetricEigen::new(self.assemble(y)).eigenvalues.max()
    }

    /// The saddle formulation: `g(X) = δ_{trace=1}(X) − ⟨C, X⟩`, ψ = 0,
    /// log-det barrier on the X-block, unit-box barrier on the y-block.
    pub fn saddle_problem(&self) -> Result<SaddleProblem> {
        let n = self.order();
        let p = self.coefficient_count();
        let g = ProxFn::tilted(ProxFn::trace_one(n), -sym_vec(&self.objective));
        SaddleProblem::new(
            g,
            ProxFn::zero(p),
            BarrierFn::logdet(n),
            BarrierFn::unit_box(p),
            self.coupling(),
        )
    }

    /// Structural checks every generated instance must pass.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if self.objective.ncols() != n {
            return Err(Error::Numeric("objective matrix is not square".into()));
        }
        let sym_defect = (&self.objective - self.objective.transpose()).norm();
        if sym_defect > 1e-12 {
            return Err(Error::Numeric(format!(
                "objective matrix asymmetry {sym_defect}"
            )));
        }
        for (j, l) in self.coefficients.iter().enumerate() {
            if l.nrows() != n || l.ncols() != n {
                return Err(Error::Numeric(format!("coefficient {j} has wrong shape")));
            }
            let d = (l - l.transpose()).norm();
            if d > 1e-12 {
                return Err(Error::Numeric(format!("coefficient {j} asymmetry {d}")));
            }
        }
        let saddle = self.saddle_problem()?;
        let expected_nu = 2.0 * self.coefficient_count() as f64 + n as f64;
        if (saddle.nu() - expected_nu).abs() > 1e-12 {
            return Err(Error::Numeric(format!(
                "barrier parameter {} differs from 2p+n = {expected_nu}",
                saddle.nu()
            )));
        }
        Ok(())
    }
}

/// Generates a maximum-eigenvalue instance with symmetric standard
/// Gaussian data. Requires `n ≥ 1`, `p ≥ 1`.
pub fn gen_max_eigenvalue(n: usize, p: usize, seed: u64) -> Result<MaxEigInstance> {
    if n < 1 || p < 1 {
        return Err(Error::Usage(format!(
            "maximum-eigenvalue family needs n ≥ 1 and p ≥ 1, got n={n}, p={p}"
        )));
    }
    let mut rng = Rng::from_seed(seed);
    let mut gauss_sym = |order: usize| -> DMatrix<f64> {
        symmetrize(&DMatrix::from_fn(order, order, |_, _| rng.gauss()))
    };
    let objective = gauss_sym(n);
    let coefficients = (0..p).map(|_| gauss_sym(n)).collect();
    let inst = MaxEigInstance {
        objective,
        coefficients,
    };
    inst.validate()?;
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Sparse-plus-low-rank family
// ---------------------------------------------------------------------------

/// Data of a low-rank-plus-sparse decomposition instance: recover a
/// positive semidefinite `X` close to the observation `M` in entrywise
/// absolute deviation while keeping its trace small,
/// `min ρ·Σ_ij |X_ij − M_ij| + (1−ρ)·tr(X)` subject to `X ⪰ 0` and boxed
/// off-diagonal entries.
#[derive(Debug, Clone)]
pub struct SparseLowrankInstance {
    /// The observation `M = M₀ + E`.
    pub observed: DMatrix<f64>,
    /// Planted low-rank part `M₀` (zero outside a principal submatrix).
    pub lowrank: DMatrix<f64>,
    /// Planted sparse symmetric noise `E`.
    pub noise: DMatrix<f64>,
    /// Lower bound on off-diagonal entries of `X`.
    pub lo: f64,
    /// Upper bound on off-diagonal entries of `X`.
    pub hi: f64,
    /// Absolute-deviation weight ρ ∈ (0, 1).
    pub weight: f64,
    /// Planted rank of `M₀`.
    pub rank: usize,
}

impl SparseLowrankInstance {
    /// Matrix order `n`.
    pub fn order(&self) -> usize {
        self.observed.nrows()
    }

    /// The composite objective `ρ·Σ_ij |X_ij − M_ij| + (1−ρ)·tr(X)`
    /// (box feasibility of `x` is the caller's concern).
    pub fn objective_value(&self, x: &DMatrix<f64>) -> f64 {
        let rho = self.weight;
        let mut dev = 0.0;
        for (xe, me) in x.iter().zip(self.observed.iter()) {
            dev += (xe - me).abs();
        }
        rho * dev + (1.0 - rho) * x.trace()
    }

    /// Entrywise subgradient of the objective (sign convention `0` at
    /// kinks).
    pub fn objective_subgradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.order();
        let rho = self.weight;
        DMatrix::from_fn(n, n, |i, j| {
            let d = x[(i, j)] - self.observed[(i, j)];
            let s = if d > 0.0 {
                1.0
            } else if d < 0.0 {
                -1.0
            } else {
                0.0
            };
            rho * s + if i == j { 1.0 - rho } else { 0.0 }
        })
    }

    /// The separable objective terms in column-major coordinate order.
    pub fn objective_fn(&self) -> ProxFn {
        let n = self.order();
        let rho = self.weight;
        let mut terms = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                terms.push(ScalarTerm {
                    weight: rho,
                    offset: self.observed[(i, j)],
                    linear: if i == j { 1.0 - rho } else { 0.0 },
                    lo: if i == j { f64::NEG_INFINITY } else { self.lo },
                    hi: if i == j { f64::INFINITY } else { self.hi },
                });
            }
        }
        ProxFn::sep_scalar(terms)
    }

    /// The primal composite formulation over the positive semidefinite
    /// cone.
    pub fn primal_problem(&self) -> Result<PrimalProblem> {
        PrimalProblem::new(self.objective_fn(), BarrierFn::logdet(self.order()))
    }

    /// Schedule with this family's homotopy start (`t₀ = 0.1`).
    pub fn reference_schedule(&self) -> Result<Schedule> {
        let nu = self.order() as f64;
        Schedule::new(0.95, 0.0870, 0.0435, 0.1, nu)
    }

    /// Structural checks every generated instance must pass.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if (self.lowrank.clone() + &self.noise - &self.observed).norm() > 1e-12 {
            return Err(Error::Numeric("observation is not lowrank + noise".into()));
        }
        if (&self.observed - self.observed.transpose()).norm() > 1e-12 {
            return Err(Error::Numeric("observation is not symmetric".into()));
        }
        if !(self.lo <= self.hi) {
            return Err(Error::Numeric(format!(
                "bounds are not ordered: [{}, {}]",
                self.lo, self.hi
            )));
        }
        let svals = self.lowrank.clone().svd(false, false).singular_values;
        let scale = svals.max().max(1.0);
        let numeric_rank = svals.iter().filter(|s| **s > 1e-10 * scale).count();
        if numeric_rank != self.rank {
            return Err(Error::Numeric(format!(
                "planted part has numeric rank {numeric_rank}, expected {}",
                self.rank
            )));
        }
        // Off-diagonal observations must be coverable by the box.
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let m = self.observed[(i, j)];
                    if m < self.lo - 1e-12 || m > self.hi + 1e-12 {
                        return Err(Error::Numeric(format!(
                            "observation entry {m} escapes the box [{}, {}]",
                            self.lo, self.hi
                        )));
                    }
                }
            }
        }
        self.primal_problem().map(|_| ())
    }
}

/// Samples `k` distinct indices from `0..n` by partial Fisher–Yates.
fn sample_indices(n: usize, k: usize, rng: &mut Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = i + (rng.next_u64() as usize) % (n - i);
        pool.swap(i, j);
    }
    pool.truncate(k.min(n));
    pool.sort_unstable();
    pool
}

/// Generates a sparse-plus-low-rank instance with the family defaults
/// (ρ = 0.2, rank fraction 0.25, noise variance 1e−4 at density 0.10).
/// Requires `n ≥ 2`.
pub fn gen_sparse_lowrank(n: usize, seed: u64) -> Result<SparseLowrankInstance> {
    gen_sparse_lowrank_with(
        n,
        seed,
        default_weight(),
        default_rank_fraction(),
        default_noise_variance(),
        default_noise_density(),
    )
}

/// Generates a sparse-plus-low-rank instance with explicit family
/// parameters. The planted part is a rank-`⌊fraction·n⌋` Gram matrix
/// embedded on a random principal submatrix of half the coordinates; the
/// noise is symmetric with the given density and variance; the box is the
/// off-diagonal observation range expanded outward by 10%.
pub fn gen_sparse_lowrank_with(
    n: usize,
    seed: u64,
    weight: f64,
    rank_fraction: f64,
    noise_variance: f64,
    noise_density: f64,
) -> Result<SparseLowrankInstance> {
    if n < 2 {
        return Err(Error::Usage(format!(
            "sparse-plus-low-rank family needs n ≥ 2, got {n}"
        )));
    }
    if !(weight > 0.0 && weight < 1.0) {
        return Err(Error::Usage(format!(
            "deviation weight must lie in (0, 1), got {weight}"
        )));
    }
    if !(0.0..=1.0).contains(&rank_fraction) || !(0.0..=1.0).contains(&noise_density) {
        return Err(Error::Usage(
            "rank fraction and noise density must lie in [0, 1]".into(),
        ));
    }
    if !(noise_variance >= 0.0) {
        return Err(Error::Usage(format!(
            "noise variance must be nonnegative, got {noise_variance}"
        )));
    }
    let mut rng = Rng::from_seed(seed);
    let rank = (rank_fraction * n as f64).floor() as usize;
    let support = sample_indices(n, n.div_ceil(2), &mut rng);

    let mut lowrank = DMatrix::zeros(n, n);
    if rank > 0 {
        let k = support.len();
        let factor = DMatrix::from_fn(k, rank, |_, _| rng.gauss());
        let gram = &factor * factor.transpose();
        for (a, &ia) in support.iter().enumerate() {
            for (b, &ib) in support.iter().enumerate() {
                lowrank[(ia, ib)] = gram[(a, b)];
            }
        }
    }

    let sigma = noise_variance.sqrt();
    let mut noise = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            if rng.bernoulli(noise_density) {
                let v = sigma * rng.gauss();
                noise[(i, j)] = v;
                noise[(j, i)] = v;
            }
        }
    }

    let observed = &lowrank + &noise;
    let mut min_off = f64::INFINITY;
    let mut max_off = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                min_off = min_off.min(observed[(i, j)]);
                max_off = max_off.max(observed[(i, j)]);
            }
        }
    }
    let lo = min_off - 0.1 * min_off.abs();
    let hi = max_off + 0.1 * max_off.abs();

    let inst = SparseLowrankInstance {
        observed,
        lowrank,
        noise,
        lo,
        hi,
        weight,
        rank,
    };
    inst.validate()?;
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Cluster-recovery family
// ---------------------------------------------------------------------------

/// Data of a planted-partition recovery instance: maximize `⟨A, X⟩` over
/// `X ⪰ 0` with unit diagonal, nonnegative entries, and the total
/// pairwise mass fixed to that of the planted partition.
#[derive(Debug, Clone)]
pub struct ClusterInstance {
    /// Symmetric 0/1 adjacency matrix with zero diagonal.
    pub adjacency: DMatrix<f64>,
    /// Planted block-indicator solution (`X_ij = 1` iff same cluster).
    pub planted: DMatrix<f64>,
    /// Cluster sizes.
    pub sizes: Vec<usize>,
}

impl ClusterInstance {
    /// Number of nodes.
    pub fn order(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Total pairwise mass `Σ_i K_i²` of the planted partition.
    pub fn pair_mass(&self) -> f64 {
        self.sizes.iter().map(|k| (k * k) as f64).sum()
    }

    /// Number of constraint rows: `n` diagonal rows plus `n(n−1)/2`
    /// off-diagonal rows.
    pub fn constraint_dim(&self) -> usize {
        let n = self.order();
        n + n * (n - 1) / 2
    }

    /// The constraint map: row `i < n` extracts `−X_ii`; the following
    /// rows extract the symmetrized off-diagonal entries `X_ij` (`i < j`
    /// lexicographic). Rows are mutually orthogonal, so the map has full
    /// row rank by construction.
    pub fn coupling(&self) -> DMatrix<f64> {
        let n = self.order();
        let mut l = DMatrix::zeros(self.constraint_dim(), n * n);
        for i in 0..n {
            l[(i, i * n + i)] = -1.0;
        }
        let mut r = n;
        for i in 0..n {
            for j in (i + 1)..n {
                l[(r, j * n + i)] = 0.5;
                l[(r, i * n + j)] = 0.5;
                r += 1;
            }
        }
        l
    }

    /// Right-hand side pairing with [`ClusterInstance::coupling`]: `−1`
    /// on diagonal rows (so the slack is `1 − X_ii`), `0` elsewhere.
    pub fn rhs(&self) -> DVector<f64> {
        let n = self.order();
        let mut b = DVector::zeros(self.constraint_dim());
        for i in 0..n {
            b[i] = -1.0;
        }
        b
    }

    /// The slack function: diagonal slacks are pinned to zero (unit
    /// diagonal), off-diagonal slacks form a simplex carrying the planted
    /// pairwise mass.
    pub fn slack_fn(&self) -> ProxFn {
        let n = self.order();
        let pairs = n * (n - 1) / 2;
        let total = (self.pair_mass() - n as f64) / 2.0;
        ProxFn::block_sum(vec![
            ProxFn::simplex_cap(n, 0.0),
            ProxFn::simplex_cap(pairs, total),
        ])
    }

    /// The dual conic formulation over the positive semidefinite cone.
    pub fn dual_problem(&self) -> Result<DualConicProblem> {
        DualConicProblem::new(
            sym_vec(&self.adjacency),
            self.rhs(),
            self.coupling(),
            self.slack_fn(),
            BarrierFn::logdet(self.order()),
        )
    }

    /// Objective `⟨A, X⟩` of a candidate solution.
    pub fn objective_value(&self, x: &DMatrix<f64>) -> f64 {
        (&self.adjacency * x).trace()
    }

    /// Residuals of the planted solution against the constraint system:
    /// returns the largest violation among unit diagonal, entry bounds,
    /// pairwise-mass total, and positive semidefiniteness.
    pub fn planted_violation(&self) -> f64 {
        let n = self.order();
        let x = &self.planted;
        let mut v: f64 = 0.0;
        for i in 0..n {
            v = v.max((x[(i, i)] - 1.0).abs());
        }
        let mut pair_sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let e = x[(i, j)];
                v = v.max((-e).max(e - 1.0).max(0.0));
                pair_sum += e;
            }
        }
        v = v.max((pair_sum - (self.pair_mass() - n as f64) / 2.0).abs());
        let min_eig = SymmetricEigen::new(x.clone()).eigenvalues.min();
        v.max((-min_eig).max(0.0))
    }

    /// Structural checks every generated instance must pass.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        if self.adjacency.ncols() != n || self.planted.nrows() != n {
            return Err(Error::Numeric("instance matrices have wrong shape".into()));
        }
        if (&self.adjacency - self.adjacency.transpose()).norm() > 0.0 {
            return Err(Error::Numeric("adjacency is not symmetric".into()));
        }
        for i in 0..n {
            if self.adjacency[(i, i)] != 0.0 {
                return Err(Error::Numeric("adjacency has a self-loop".into()));
            }
        }
        if self.sizes.iter().sum::<usize>() != n {
            return Err(Error::Numeric("cluster sizes do not sum to the order".into()));
        }
        let viol = self.planted_violation();
        if viol > 1e-9 {
            return Err(Error::Numeric(format!(
                "planted solution violates the constraints by {viol}"
            )));
        }
        self.dual_problem().map(|_| ())
    }
}

/// Generates a planted-partition instance: nodes are grouped by `sizes`,
/// and an edge appears with probability `p_in` within a cluster and
/// `p_out` across clusters. Requires at least two clusters, each of size
/// ≥ 2, and probabilities in `[0, 1]`.
pub fn gen_cluster_recovery(
    sizes: &[usize],
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<ClusterInstance> {
    if sizes.len() < 2 {
        return Err(Error::Usage(format!(
            "cluster recovery needs at least two clusters, got {}",
            sizes.len()
        )));
    }
    if sizes.iter().any(|k| *k < 2) {
        return Err(Error::Usage("every cluster must have size ≥ 2".into()));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::Usage(format!(
            "edge probabilities must lie in [0, 1], got p_in={p_in}, p_out={p_out}"
        )));
    }
    let n: usize = sizes.iter().sum();
    let mut membership = Vec::with_capacity(n);
    for (c, k) in sizes.iter().enumerate() {
        membership.extend(std::iter::repeat_n(c, *k));
    }
    let mut rng = Rng::from_seed(seed);
    let mut adjacency = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if membership[i] == membership[j] {
                p_in
            } else {
                p_out
            };
            if rng.bernoulli(p) {
                adjacency[(i, j)] = 1.0;
                adjacency[(j, i)] = 1.0;
            }
        }
    }
    let planted = DMatrix::from_fn(n, n, |i, j| {
        if membership[i] == membership[j] {
            1.0
        } else {
            0.0
        }
    });
    let inst = ClusterInstance {
        adjacency,
        planted,
        sizes: sizes.to_vec(),
    };
    inst.validate()?;
    Ok(inst)
}

// ---------------------------------------------------------------------------
// Shared reference oracles
// ---------------------------------------------------------------------------

/// Projects a symmetric matrix onto the intersection of the positive
/// semidefinite cone and the off-diagonal box `[lo, hi]` by Dykstra's
/// alternating scheme.
pub fn project_psd_box(x: &DMatrix<f64>, lo: f64, hi: f64, sweeps: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let mut z = symmetrize(x);
    let mut p = DMatrix::zeros(n, n);
    let mut q = DMatrix::zeros(n, n);
    for _ in 0..sweeps {
        // Positive semidefinite projection with Dykstra correction.
        let eig = SymmetricEigen::new(&z + &p);
        let clamped = DVector::from_iterator(n, eig.eigenvalues.iter().map(|e| e.max(0.0)));
        let y = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        p = &z + &p - &y;
        // Off-diagonal box projection with Dykstra correction.
        let w = &y + &q;
        let clipped = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                w[(i, j)]
            } else {
                w[(i, j)].clamp(lo, hi)
            }
        });
        q = w - &clipped;
        z = clipped;
    }
    symmetrize(&z)
}

/// Best objective value found by a projected subgradient run on a
/// sparse-plus-low-rank instance, using diminishing steps
/// `step0/√(k+1)` and Dykstra projections onto the feasible set. Returns
/// `(best_value, best_point)`.
pub fn sparse_lowrank_reference(
    inst: &SparseLowrankInstance,
    start: &DMatrix<f64>,
    iters: usize,
    step0: f64,
) -> (f64, DMatrix<f64>) {
    let mut x = project_psd_box(start, inst.lo, inst.hi, 50);
    let mut best = inst.objective_value(&x);
    let mut best_x = x.clone();
    for k in 0..iters {
        let g = inst.objective_subgradient(&x);
        let step = step0 / ((k + 1) as f64).sqrt();
        x = project_psd_box(&(&x - g * step), inst.lo, inst.hi, 30);
        let v = inst.objective_value(&x);
        if v < best {
            best = v;
            best_x = x.clone();
        }
    }
    (best, best_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn max_eig_regeneration_is_bit_identical() {
        let a = gen_max_eigenvalue(4, 3, 99).unwrap();
        let b = gen_max_eigenvalue(4, 3, 99).unwrap();
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.coefficients, b.coefficients);
        let c = gen_max_eigenvalue(4, 3, 100).unwrap();
        assert_ne!(a.objective, c.objective);
    }

    #[test]
    fn max_eig_barrier_parameter_counts_both_blocks() {
        let inst = gen_max_eigenvalue(5, 10, 7).unwrap();
        let saddle = inst.saddle_problem().unwrap();
        assert_relative_eq!(saddle.nu(), 2.0 * 10.0 + 5.0, epsilon = 1e-12);
    }

    #[test]
    fn max_eig_value_identity_links_coupling_and_objective_paths() {
        // At any y: assembling through the coupling rows and the tilted
        // objective must reproduce the eigensolver's λ_max on the top
        // eigenvector.
        let inst = gen_max_eigenvalue(3, 2, 7).unwrap();
        let problem = inst.saddle_problem().unwrap();
        let sched = problem.default_schedule().unwrap();
        let sol = crate::instances::solve_saddle(
            &problem,
            &sched,
            1e-4,
            None,
            crate::newton::Phase1Strategy::AuxiliaryPath,
            None,
        )
        .unwrap();
        let y = &sol.y;
        let assembled = inst.assemble(y);
        let eig = SymmetricEigen::new(assembled.clone());
        let (mut top_val, mut top_idx) = (f64::NEG_INFINITY, 0);
        for (i, e) in eig.eigenvalues.iter().enumerate() {
            if *e > top_val {
                top_val = *e;
                top_idx = i;
            }
        }
        let v = eig.eigenvectors.column(top_idx).into_owned();
        let x_hat = &v * v.transpose();
        // ⟨Lᵀy, vec X̂⟩ − g(X̂) computed through the instance encoding.
        let g = ProxFn::tilted(ProxFn::trace_one(3), -sym_vec(&inst.objective));
        let lhs = (inst.coupling().transpose() * y).dot(&sym_vec(&x_hat))
            - g.eval(&sym_vec(&x_hat));
        assert!(
            (lhs - top_val).abs() <= 1e-8,
            "encoding value {lhs} vs eigensolver {top_val}"
        );
    }

    #[test]
    fn sparse_lowrank_planted_rank_is_exact() {
        for (n, seed) in [(8usize, 3u64), (12, 5)] {
            let inst = gen_sparse_lowrank(n, seed).unwrap();
            assert_eq!(inst.rank, n / 4);
            let svals = inst.lowrank.clone().svd(false, false).singular_values;
            let scale = svals.max();
            let exact = svals.iter().filter(|s| **s > 1e-10 * scale).count();
            assert_eq!(exact, inst.rank, "numeric rank mismatch at n={n}");
        }
    }

    #[test]
    fn sparse_lowrank_box_covers_the_observations() {
        let inst = gen_sparse_lowrank(10, 11).unwrap();
        assert!(inst.lo <= inst.hi);
        let n = inst.order();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let m = inst.observed[(i, j)];
                    assert!(inst.lo <= m && m <= inst.hi);
                }
            }
        }
    }

    #[test]
    fn sparse_lowrank_objective_is_finite_at_the_interior_witness() {
        let inst = gen_sparse_lowrank(6, 17).unwrap();
        let primal = inst.primal_problem().unwrap();
        let w = primal.witness();
        assert!(primal.objective_value(w).is_finite());
        assert!(primal.barrier().in_domain(w));
    }

    #[test]
    fn sparse_lowrank_regeneration_is_bit_identical() {
        let a = gen_sparse_lowrank(7, 23).unwrap();
        let b = gen_sparse_lowrank(7, 23).unwrap();
        assert_eq!(a.observed, b.observed);
        assert_eq!(a.lowrank, b.lowrank);
        assert_eq!(a.noise, b.noise);
        assert_eq!((a.lo, a.hi), (b.lo, b.hi));
    }

    #[test]
    fn sep_scalar_objective_matches_the_direct_formula() {
        let inst = gen_sparse_lowrank(5, 29).unwrap();
        let g = inst.objective_fn();
        let mut rng = Rng::from_seed(31);
        // A feasible point: observation clipped into the box.
        let n = inst.order();
        let x = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                inst.observed[(i, j)] + 0.3 * rng.uniform()
            } else {
                inst.observed[(i, j)].clamp(inst.lo, inst.hi)
            }
        });
        let x = symmetrize(&x);
        let via_terms = g.eval(&sym_vec(&x));
        let direct = inst.objective_value(&x);
        assert_relative_eq!(via_terms, direct, epsilon = 1e-10);
    }

    #[test]
    fn cluster_planted_solution_is_feasible() {
        let inst = gen_cluster_recovery(&[3, 4], 0.9, 0.1, 41).unwrap();
        assert!(inst.planted_violation() <= 1e-12);
        assert!(inst.dual_problem().is_ok());
    }

    #[test]
    fn cluster_constraint_dimension_is_the_reduced_count() {
        // n diagonal rows + n(n−1)/2 pair rows; the rows are mutually
        // orthogonal so the full-row-rank check always passes.
        let inst = gen_cluster_recovery(&[2, 3], 0.9, 0.1, 43).unwrap();
        let n = inst.order();
        assert_eq!(inst.constraint_dim(), n + n * (n - 1) / 2);
        let problem = inst.dual_problem().unwrap();
        assert_eq!(problem.dual_dim(), inst.constraint_dim());
        assert_eq!(problem.cone_dim(), n * n);
    }

    #[test]
    fn cluster_rejects_degenerate_shapes() {
        assert!(matches!(
            gen_cluster_recovery(&[5], 0.9, 0.1, 1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            gen_cluster_recovery(&[2, 1], 0.9, 0.1, 1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            gen_cluster_recovery(&[2, 2], 1.1, 0.1, 1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            gen_cluster_recovery(&[2, 2], 0.9, -0.1, 1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn cluster_planted_maximizes_at_separated_probabilities() {
        // p_in = 1, p_out = 0: the planted balanced 2-partition of 6
        // nodes must beat every other balanced 2-partition.
        let inst = gen_cluster_recovery(&[3, 3], 1.0, 0.0, 53).unwrap();
        let planted_val = inst.objective_value(&inst.planted);
        let n = 6;
        let mut best_other = f64::NEG_INFINITY;
        // Enumerate 3-subsets containing node 0 (each balanced partition
        // counted once).
        for a in 1..n {
            for b in (a + 1)..n {
                let cluster0 = [0, a, b];
                let x = DMatrix::from_fn(n, n, |i, j| {
                    let ci = cluster0.contains(&i);
                    let cj = cluster0.contains(&j);
                    if ci == cj {
                        1.0
                    } else {
                        0.0
                    }
                });
                let v = inst.objective_value(&x);
                if !(cluster0 == [0, 1, 2]) {
                    best_other = best_other.max(v);
                } else {
                    assert_relative_eq!(v, planted_val, epsilon = 1e-12);
                }
            }
        }
        assert!(
            planted_val > best_other,
            "planted {planted_val} does not beat best alternative {best_other}"
        );
    }

    #[test]
    fn cluster_regeneration_is_bit_identical() {
        let a = gen_cluster_recovery(&[3, 3], 0.9, 0.1, 61).unwrap();
        let b = gen_cluster_recovery(&[3, 3], 0.9, 0.1, 61).unwrap();
        assert_eq!(a.adjacency, b.adjacency);
    }

    #[test]
    fn dykstra_projection_lands_in_both_sets() {
        let mut rng = Rng::from_seed(67);
        let raw = DMatrix::from_fn(5, 5, |_, _| 2.0 * rng.gauss());
        let x = symmetrize(&raw);
        let proj = project_psd_box(&x, -0.3, 0.4, 200);
        let min_eig = SymmetricEigen::new(proj.clone()).eigenvalues.min();
        assert!(min_eig >= -1e-8, "projection not PSD: λ_min = {min_eig}");
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(proj[(i, j)] >= -0.3 - 1e-8 && proj[(i, j)] <= 0.4 + 1e-8);
                }
            }
        }
        // A point already in both sets is (essentially) fixed.
        let feasible = DMatrix::<f64>::identity(5, 5) * 0.7;
        let again = project_psd_box(&feasible, -0.3, 0.4, 50);
        assert!((again - &feasible).norm() <= 1e-10);
    }

    #[test]
    fn subgradient_reference_descends_from_a_crude_start() {
        let inst = gen_sparse_lowrank(5, 71).unwrap();
        let start = DMatrix::<f64>::identity(5, 5) * 3.0;
        let v0 = inst.objective_value(&project_psd_box(&start, inst.lo, inst.hi, 50));
        let (best, best_x) = sparse_lowrank_reference(&inst, &start, 400, 0.5);
        assert!(best < v0, "reference failed to descend: {best} vs {v0}");
        let min_eig = SymmetricEigen::new(best_x.clone()).eigenvalues.min();
        assert!(min_eig >= -1e-6);
    }

    #[test]
    fn problem_spec_serde_round_trip() {
        let specs = vec![
            ProblemSpec::MaxEigenvalue { n: 5, p: 10, seed: 7 },
            ProblemSpec::SparseLowrank {
                n: 10,
                seed: 3,
                weight: 0.2,
                rank_fraction: 0.25,
                noise_variance: 1e-4,
                noise_density: 0.10,
            },
            ProblemSpec::ClusterRecovery {
                sizes: vec![5, 5],
                p_in: 0.9,
                p_out: 0.1,
                seed: 11,
            },
        ];
        for spec in specs {
            let text = serde_json::to_string(&spec).unwrap();
            let back: ProblemSpec = serde_json::from_str(&text).unwrap();
            assert_eq!(spec, back);
        }
        // Omitted family parameters fall back to the documented defaults.
        let sparse: ProblemSpec =
            serde_json::from_str(r#"{"family":"sparse_lowrank","n":6,"seed":9}"#).unwrap();
        match sparse {
            ProblemSpec::SparseLowrank { weight, rank_fraction, .. } => {
                assert_relative_eq!(weight, 0.2);
                assert_relative_eq!(rank_fraction, 0.25);
            }
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn generate_dispatch_matches_the_direct_generators() {
        let spec = ProblemSpec::MaxEigenvalue { n: 4, p: 2, seed: 77 };
        match spec.generate().unwrap() {
            GeneratedProblem::MaxEigenvalue(inst) => {
                let direct = gen_max_eigenvalue(4, 2, 77).unwrap();
                assert_eq!(inst.objective, direct.objective);
            }
            _ => panic!("wrong family"),
        }
    }
}
