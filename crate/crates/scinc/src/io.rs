//! File formats: problem and solution documents (JSON with an explicit
//! `format_version`, dense matrices as row-major arrays, prox functions as
//! tagged descriptors) and the per-iteration trace CSV.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::RecoveredPrimal;
use crate::newton::{Phase1Strategy, Schedule, SolveStatus, SolveTrace, TraceRow};
use crate::problems::ProblemSpec;
use crate::prox::{ProxFn, ScalarTerm};

/// The file format version this build reads and writes.
pub const FORMAT_VERSION: u32 = 1;

/// Exact header line of trace CSV files.
pub const TRACE_HEADER: &str =
    "phase,k,t,lambda,delta_target,delta_achieved,sigma,residual_primary,residual_aux,wall_ms";

// ---------------------------------------------------------------------------
// Dense matrices as row-major arrays
// ---------------------------------------------------------------------------

/// A dense matrix serialized as a row-major number array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    /// Row count.
    pub rows: usize,
    /// Column count.
    pub cols: usize,
    /// Entries in row-major order (`data[i*cols + j] = M[i][j]`).
    pub data: Vec<f64>,
}

impl MatrixData {
    /// Captures a matrix in row-major layout.
    pub fn from_matrix(m: &DMatrix<f64>) -> MatrixData {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixData {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    /// Captures a vector as a single-column matrix.
    pub fn from_vector(v: &DVector<f64>) -> MatrixData {
        MatrixData {
            rows: v.len(),
            cols: 1,
            data: v.iter().copied().collect(),
        }
    }

    /// Rebuilds the matrix, validating the advertised shape.
    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Format(format!(
                "matrix claims {}×{} = {} entries but carries {}",
                self.rows,
                self.cols,
                self.rows * self.cols,
                self.data.len()
            )));
        }
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }

    /// Rebuilds a vector from a single-column matrix.
    pub fn to_vector(&self) -> Result<DVector<f64>> {
        if self.cols != 1 {
            return Err(Error::Format(format!(
                "expected a single-column matrix, got {}×{}",
                self.rows, self.cols
            )));
        }
        if self.data.len() != self.rows {
            return Err(Error::Format(format!(
                "vector claims {} entries but carries {}",
                self.rows,
                self.data.len()
            )));
        }
        Ok(DVector::from_column_slice(&self.data))
    }
}

// ---------------------------------------------------------------------------
// Tagged prox descriptors
// ---------------------------------------------------------------------------

/// One separable scalar term; unbounded box ends are omitted rather than
/// encoded as infinities (JSON has no Infinity literal).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTermData {
    /// Absolute-value weight.
    pub weight: f64,
    /// Kink location.
    pub offset: f64,
    /// Linear coefficient.
    pub linear: f64,
    /// Lower box bound (`None` = unbounded below).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    /// Upper box bound (`None` = unbounded above).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl From<&ScalarTerm> for ScalarTermData {
    fn from(t: &ScalarTerm) -> ScalarTermData {
        ScalarTermData {
            weight: t.weight,
            offset: t.offset,
            linear: t.linear,
            lo: if t.lo.is_finite() { Some(t.lo) } else { None },
            hi: if t.hi.is_finite() { Some(t.hi) } else { None },
        }
    }
}

impl From<&ScalarTermData> for ScalarTerm {
    fn from(t: &ScalarTermData) -> ScalarTerm {
        ScalarTerm {
            weight: t.weight,
            offset: t.offset,
            linear: t.linear,
            lo: t.lo.unwrap_or(f64::NEG_INFINITY),
            hi: t.hi.unwrap_or(f64::INFINITY),
        }
    }
}

/// Serializable, tagged description of a prox-friendly function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProxDescriptor {
    /// The zero function.
    Zero {
        /// Ambient dimension.
        dim: usize,
    },
    /// `⟨c, ·⟩`.
    Linear {
        /// Coefficients.
        coefficients: Vec<f64>,
    },
    /// Separable sum of scalar terms (ℓ1 parts, boxes, linear parts).
    Separable {
        /// One term per coordinate.
        terms: Vec<ScalarTermData>,
    },
    /// Indicator of `{u : B·u = d}`.
    AffineSubspace {
        /// Constraint matrix.
        matrix: MatrixData,
        /// Right-hand side.
        rhs: Vec<f64>,
    },
    /// Indicator of `{u ≥ 0, Σu = total}`.
    SimplexCap {
        /// Ambient dimension.
        dim: usize,
        /// Required coordinate sum.
        total: f64,
    },
    /// Separable sum over consecutive blocks.
    BlockSum {
        /// The blocks, in order.
        parts: Vec<ProxDescriptor>,
    },
    /// Inner function plus a linear term.
    Tilted {
        /// The untilted function.
        inner: Box<ProxDescriptor>,
        /// Added linear coefficients.
        linear: Vec<f64>,
    },
    /// Conjugate of the inner function plus a linear shift.
    ConjugateOf {
        /// The function whose conjugate is taken.
        inner: Box<ProxDescriptor>,
        /// Added linear coefficients.
        shift: Vec<f64>,
    },
}

impl ProxDescriptor {
    /// Describes a prox function for serialization.
    pub fn from_prox(g: &ProxFn) -> ProxDescriptor {
        match g {
            ProxFn::Zero { dim } => ProxDescriptor::Zero { dim: *dim },
            ProxFn::Linear { c } => ProxDescriptor::Linear {
                coefficients: c.iter().copied().collect(),
            },
            ProxFn::SepScalar { terms } => ProxDescriptor::Separable {
                terms: terms.iter().map(ScalarTermData::from).collect(),
            },
            ProxFn::AffineEq { mat, rhs } => ProxDescriptor::AffineSubspace {
                matrix: MatrixData::from_matrix(mat),
                rhs: rhs.iter().copied().collect(),
            },
            ProxFn::SimplexCap { dim, total } => ProxDescriptor::SimplexCap {
                dim: *dim,
                total: *total,
            },
            ProxFn::BlockSum(parts) => ProxDescriptor::BlockSum {
                parts: parts.iter().map(ProxDescriptor::from_prox).collect(),
            },
            ProxFn::Tilted { inner, linear } => ProxDescriptor::Tilted {
                inner: Box::new(ProxDescriptor::from_prox(inner)),
                linear: linear.iter().copied().collect(),
            },
            ProxFn::Conjugate { inner, shift } => ProxDescriptor::ConjugateOf {
                inner: Box::new(ProxDescriptor::from_prox(inner)),
                shift: shift.iter().copied().collect(),
            },
        }
    }

    /// Rebuilds the prox function this descriptor names.
    pub fn to_prox(&self) -> Result<ProxFn> {
        match self {
            ProxDescriptor::Zero { dim } => Ok(ProxFn::zero(*dim)),
            ProxDescriptor::Linear { coefficients } => {
                Ok(ProxFn::linear(DVector::from_column_slice(coefficients)))
            }
            ProxDescriptor::Separable { terms } => Ok(ProxFn::sep_scalar(
                terms.iter().map(ScalarTerm::from).collect(),
            )),
            ProxDescriptor::AffineSubspace { matrix, rhs } => {
                let mat = matrix.to_matrix()?;
                if mat.nrows() != rhs.len() {
                    return Err(Error::Format(format!(
                        "affine subspace has {} rows but rhs length {}",
                        mat.nrows(),
                        rhs.len()
                    )));
                }
                Ok(ProxFn::affine_eq(mat, DVector::from_column_slice(rhs)))
            }
            ProxDescriptor::SimplexCap { dim, total } => {
                if *total < 0.0 {
                    return Err(Error::Format(format!(
                        "simplex total must be nonnegative, got {total}"
                    )));
                }
                Ok(ProxFn::simplex_cap(*dim, *total))
            }
            ProxDescriptor::BlockSum { parts } => {
                if parts.is_empty() {
                    return Err(Error::Format("block sum needs at least one part".into()));
                }
                Ok(ProxFn::block_sum(
                    parts.iter().map(|p| p.to_prox()).collect::<Result<_>>()?,
                ))
            }
            ProxDescriptor::Tilted { inner, linear } => {
                let inner = inner.to_prox()?;
                if inner.dim() != linear.len() {
                    return Err(Error::Format(format!(
                        "tilt length {} does not match inner dimension {}",
                        linear.len(),
                        inner.dim()
                    )));
                }
                Ok(ProxFn::tilted(inner, DVector::from_column_slice(linear)))
            }
            ProxDescriptor::ConjugateOf { inner, shift } => {
                let inner = inner.to_prox()?;
                if inner.dim() != shift.len() {
                    return Err(Error::Format(format!(
                        "shift length {} does not match inner dimension {}",
                        shift.len(),
                        inner.dim()
                    )));
                }
                Ok(ProxFn::conjugate_with_shift(
                    inner,
                    DVector::from_column_slice(shift),
                ))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Problem files
// ---------------------------------------------------------------------------

/// On-disk problem document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    /// Format version (always 1).
    pub format_version: u32,
    /// The generator description.
    pub problem: ProblemSpec,
}

fn check_version(found: u32) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format_version {found}, this build reads {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn parse_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Format(format!("{}: {e}", path.display()))
}

/// Writes a problem description to `path`.
pub fn write_problem(path: &Path, spec: &ProblemSpec) -> Result<()> {
    let doc = ProblemFile {
        format_version: FORMAT_VERSION,
        problem: spec.clone(),
    };
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| parse_error(path, e))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a problem description from `path`.
pub fn read_problem(path: &Path) -> Result<ProblemSpec> {
    let r = BufReader::new(File::open(path)?);
    let doc: ProblemFile = serde_json::from_reader(r).map_err(|e| parse_error(path, e))?;
    check_version(doc.format_version)?;
    Ok(doc.problem)
}

// ---------------------------------------------------------------------------
// Solution files
// ---------------------------------------------------------------------------

/// Recovered primal pair as stored in solution files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredRecord {
    /// Recovered cone point (square row-major matrix when matrix-shaped,
    /// single-column otherwise).
    pub x: MatrixData,
    /// Recovered slack.
    pub s: Vec<f64>,
    /// Homotopy parameter at recovery.
    pub t: f64,
    /// Fenchel equality gap certifying the subgradient inclusion.
    pub subgradient_gap: f64,
    /// `‖L*y − c‖` in the cone-local dual norm.
    pub dual_residual: f64,
    /// `‖Lx − s − b‖` in the dual-feasible-local dual norm.
    pub primal_residual: f64,
    /// Recovered primal objective value.
    pub objective: f64,
}

impl RecoveredRecord {
    /// Captures a recovered pair; `matrix_order` reshapes `x` into a
    /// square row-major matrix when the cone variable is matrix-valued.
    pub fn from_recovered(rec: &RecoveredPrimal, matrix_order: Option<usize>) -> Result<Self> {
        let x = match matrix_order {
            Some(n) => {
                if rec.x.len() != n * n {
                    return Err(Error::Dimension(format!(
                        "recovered point has length {}, expected {}²",
                        rec.x.len(),
                        n
                    )));
                }
                MatrixData::from_matrix(&crate::linalg::sym_mat(n, &rec.x))
            }
            None => MatrixData::from_vector(&rec.x),
        };
        Ok(RecoveredRecord {
            x,
            s: rec.s.iter().copied().collect(),
            t: rec.t,
            subgradient_gap: rec.subgradient_gap,
            dual_residual: rec.dual_residual,
            primal_residual: rec.primal_residual,
            objective: rec.objective,
        })
    }
}

/// Final residual report as stored in solution files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRecord {
    /// The measured ε-solution residual.
    pub value: f64,
    /// Whether the minimum-norm selection was computed exactly.
    pub exact: bool,
}

/// On-disk solution document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    /// Format version (always 1).
    pub format_version: u32,
    /// Scheme name the run used (`fgn`, `dgn`, `pfgn`, `algorithm1`,
    /// `saddle`, `primal`, `dual`).
    pub scheme: String,
    /// Phase-1 strategy of the run.
    pub phase1_strategy: Phase1Strategy,
    /// Schedule the run was executed with.
    pub schedule: Schedule,
    /// `converged` or `budget_exhausted`.
    pub status: String,
    /// Final homotopy parameter.
    pub final_t: f64,
    /// Phase-1 iterations executed.
    pub phase1_iterations: usize,
    /// Phase-2 iterations executed.
    pub phase2_iterations: usize,
    /// Final iterate.
    pub z: Vec<f64>,
    /// Final ε-solution residual, when computable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualRecord>,
    /// Recovered primal pair, for dual conic runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recovered: Option<RecoveredRecord>,
}

/// Canonical status strings for [`SolveStatus`].
pub fn status_name(status: &SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "converged",
        SolveStatus::BudgetExhausted { .. } => "budget_exhausted",
    }
}

/// Writes a solution document to `path`.
pub fn write_solution(path: &Path, doc: &SolutionFile) -> Result<()> {
    check_version(doc.format_version)?;
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, doc).map_err(|e| parse_error(path, e))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Reads a solution document from `path`.
pub fn read_solution(path: &Path) -> Result<SolutionFile> {
    let r = BufReader::new(File::open(path)?);
    let doc: SolutionFile = serde_json::from_reader(r).map_err(|e| parse_error(path, e))?;
    check_version(doc.format_version)?;
    Ok(doc)
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

/// Writes a trace as CSV with the canonical header.
pub fn write_trace(path: &Path, trace: &SolveTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for row in &trace.rows {
        w.serialize(row)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace CSV, validating the header.
pub fn read_trace(path: &Path) -> Result<SolveTrace> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    {
        let headers = r
            .headers()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let joined = headers.iter().collect::<Vec<_>>().join(",");
        if joined != TRACE_HEADER {
            return Err(Error::Format(format!(
                "{}: unexpected trace header `{joined}`",
                path.display()
            )));
        }
    }
    let mut rows = Vec::new();
    for rec in r.deserialize::<TraceRow>() {
        rows.push(rec.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?);
    }
    Ok(SolveTrace { rows })
}
