//! Quantum statistical models (a state ρ plus its parameter derivatives) and
//! cost matrices: validation, built-in fixtures, seeded random ensembles and
//! the JSON model file.
//!
//! Random draws use ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Every matrix draws from its own ChaCha stream so
//! that adding or redrawing one matrix never shifts another:
//!
//! | stream            | contents                               |
//! |-------------------|----------------------------------------|
//! | `0x01`            | Ginibre matrix `A` for ρ               |
//! | `0x02`            | Gaussian factor `W` for the cost `G`   |
//! | `0x03`            | feasible perturbation coefficients     |
//! | `0x100 + μ`       | Hermitian draw `H_μ` for `∂ρ/∂θ_μ`     |
//!
//! Gaussian variates come from `rand_distr::StandardNormal`.

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, C64};

pub const STREAM_RHO: u64 = 0x01;
pub const STREAM_COST: u64 = 0x02;
pub const STREAM_DRHO_BASE: u64 = 0x100;
/// Stream used by feasible perturbations of a minimizer.
pub const STREAM_PERTURBATION: u64 = 0x03;

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const DRHO_TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-12;
const INDEPENDENCE_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;
const MAX_REDRAWS: usize = 64;

/// A density matrix ρ together with its derivatives `∂ρ/∂θ_μ` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStatisticalModel {
    pub label: String,
    pub dim: usize,
    pub n_params: usize,
    pub rho: CMatrix,
    pub drho: Vec<CMatrix>,
}

/// Which model invariant a [`Diagnostic`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Shape,
    RhoNotHermitian,
    RhoTrace,
    RhoNotPositive,
    DrhoNotHermitian(usize),
    DrhoTrace(usize),
    LinearDependence,
    /// Not an invariant violation: ρ has (numerically) zero eigenvalues.
    RankDeficientRho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub violation: Violation,
    pub magnitude: f64,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.violation {
            Violation::Shape => write!(f, "shape violation"),
            Violation::RhoNotHermitian => write!(f, "rho not Hermitian: {:e}", self.magnitude),
            Violation::RhoTrace => write!(f, "trace violation: {}", self.magnitude),
            Violation::RhoNotPositive => {
                write!(f, "rho not positive: min eigenvalue {:e}", self.magnitude)
            }
            Violation::DrhoNotHermitian(mu) => {
                write!(f, "drho[{mu}] not Hermitian: {:e}", self.magnitude)
            }
            Violation::DrhoTrace(mu) => write!(f, "drho[{mu}] trace violation: {:e}", self.magnitude),
            Violation::LinearDependence => write!(
                f,
                "linear-dependence violation: singular value ratio {:e}",
                self.magnitude
            ),
            Violation::RankDeficientRho => {
                write!(f, "warning: rho rank-deficient, min eigenvalue {:e}", self.magnitude)
            }
        }
    }
}

impl QuantumStatisticalModel {
    /// Builds a model and rejects it if any invariant fails.
    pub fn new(label: impl Into<String>, rho: CMatrix, drho: Vec<CMatrix>) -> Result<Self> {
        let m = Self::new_unchecked(label, rho, drho);
        let diags = validate_model(&m);
        if diags.is_empty() {
            Ok(m)
        } else {
            Err(Error::InvalidModel(join_diagnostics(&diags)))
        }
    }

    pub fn new_unchecked(label: impl Into<String>, rho: CMatrix, drho: Vec<CMatrix>) -> Self {
        Self {
            label: label.into(),
            dim: rho.nrows(),
            n_params: drho.len(),
            rho,
            drho,
        }
    }

    pub fn min_rho_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.rho)
    }

    /// Non-fatal findings, currently only rank deficiency of ρ.
    pub fn warnings(&self) -> Vec<Diagnostic> {
        let lo = self.min_rho_eigenvalue();
        if lo <= RANK_TOL {
            vec![Diagnostic {
                violation: Violation::RankDeficientRho,
                magnitude: lo,
            }]
        } else {
            Vec::new()
        }
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Lists every violated model invariant; empty iff the model is valid.
pub fn validate_model(m: &QuantumStatisticalModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let d = m.rho.nrows();
    let shape_ok = m.rho.ncols() == d
        && d == m.dim
        && m.n_params == m.drho.len()
        && m.n_params > 0
        && m.drho.iter().all(|x| x.nrows() == d && x.ncols() == d);
    if !shape_ok {
        out.push(Diagnostic {
            violation: Violation::Shape,
            magnitude: f64::NAN,
        });
        return out;
    }

    let herm = m.rho.clone() - m.rho.adjoint();
    let herm = linalg::frobenius(&herm);
    if herm > HERMITIAN_TOL * linalg::frobenius(&m.rho).max(1.0) {
        out.push(Diagnostic {
            violation: Violation::RhoNotHermitian,
            magnitude: herm,
        });
    }
    let tr = linalg::trace(&m.rho);
    let tr_dev = (tr - C64::new(1.0, 0.0)).norm();
    if tr_dev > TRACE_TOL {
        out.push(Diagnostic {
            violation: Violation::RhoTrace,
            magnitude: tr_dev,
        });
    }
    let lo = linalg::min_eigenvalue(&m.rho);
    if lo < -PSD_TOL {
        out.push(Diagnostic {
            violation: Violation::RhoNotPositive,
            magnitude: lo,
        });
    }

    for (mu, dr) in m.drho.iter().enumerate() {
        let herm = linalg::frobenius(&(dr - dr.adjoint()));
        if herm > HERMITIAN_TOL * linalg::frobenius(dr).max(1.0) {
            out.push(Diagnostic {
                violation: Violation::DrhoNotHermitian(mu),
                magnitude: herm,
            });
        }
        let tr = linalg::trace(dr).norm();
        if tr > DRHO_TRACE_TOL {
            out.push(Diagnostic {
                violation: Violation::DrhoTrace(mu),
                magnitude: tr,
            });
        }
    }

    let ratio = independence_ratio(&m.drho);
    if !(ratio > INDEPENDENCE_TOL) {
        out.push(Diagnostic {
            violation: Violation::LinearDependence,
            magnitude: ratio,
        });
    }
    out
}

fn independence_ratio(drho: &[CMatrix]) -> f64 {
    let rows: Vec<Vec<f64>> = drho.iter().map(linalg::vectorize).collect();
    linalg::row_independence_ratio(&rows)
}

/// Names accepted by [`builtin_model`].
pub const BUILTIN_NAMES: [&str; 3] = ["maximally_mixed_qubit", "qubit_xy", "diag_classical"];

/// Fixture models with known closed-form bounds.
pub fn builtin_model(name: &str, params: &[f64]) -> Result<QuantumStatisticalModel> {
    let half = |m: CMatrix| m.scale(0.5);
    match name {
        "maximally_mixed_qubit" => {
            expect_params(name, params, 0)?;
            QuantumStatisticalModel::new(
                name,
                half(linalg::identity(2)),
                vec![half(linalg::sigma_x()), half(linalg::sigma_y())],
            )
        }
        "qubit_xy" => {
            expect_params(name, params, 1)?;
            let z0 = params[0];
            if !(z0 > -1.0 && z0 < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "qubit_xy needs z0 in (-1, 1), got {z0}"
                )));
            }
            let rho = half(linalg::identity(2) + linalg::sigma_z().scale(z0));
            QuantumStatisticalModel::new(
                format!("qubit_xy({z0})"),
                rho,
                vec![half(linalg::sigma_x()), half(linalg::sigma_y())],
            )
        }
        "diag_classical" => {
            expect_params(name, params, 1)?;
            let p = params[0];
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "diag_classical needs p in (0, 1), got {p}"
                )));
            }
            let rho = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::new(p, 0.0),
                C64::new(1.0 - p, 0.0),
            ]));
            QuantumStatisticalModel::new(format!("diag_classical({p})"), rho, vec![linalg::sigma_z()])
        }
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

fn expect_params(name: &str, params: &[f64], count: usize) -> Result<()> {
    if params.len() == count {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} takes {count} parameter(s), got {}",
            params.len()
        )))
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn gaussian(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn complex_gaussian_matrix(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        let re = gaussian(rng);
        let im = gaussian(rng);
        C64::new(re, im)
    })
}

/// `(B + B†)/2` for a complex Gaussian `B`.
pub(crate) fn random_hermitian(rng: &mut ChaCha20Rng, d: usize) -> CMatrix {
    linalg::hermitize(&complex_gaussian_matrix(rng, d))
}

/// Random full-rank model: ρ from the Ginibre ensemble mixed with `I/d` so that
/// every eigenvalue is at least `min_eig_floor`; traceless Gaussian Hermitian derivatives.
pub fn random_model(
    d: usize,
    n: usize,
    seed: u64,
    min_eig_floor: f64,
) -> Result<QuantumStatisticalModel> {
    if !(2..=16).contains(&d) {
        return Err(Error::InvalidArgument(format!("d must be in [2, 16], got {d}")));
    }
    if n < 1 || n > d * d - 1 {
        return Err(Error::InvalidArgument(format!(
            "n must be in [1, d²-1 = {}], got {n}",
            d * d - 1
        )));
    }
    let lambda = d as f64 * min_eig_floor;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "min_eig_floor must lie in [0, 1/d], got {min_eig_floor}"
        )));
    }

    let mut rng = stream_rng(seed, STREAM_RHO);
    let a = complex_gaussian_matrix(&mut rng, d);
    let aa = &a * a.adjoint();
    let tr = linalg::trace(&aa).re;
    let rho = linalg::hermitize(
        &(aa.scale((1.0 - lambda) / tr) + linalg::identity(d).scale(lambda / d as f64)),
    );

    let mut streams: Vec<ChaCha20Rng> = (0..n)
        .map(|mu| stream_rng(seed, STREAM_DRHO_BASE + mu as u64))
        .collect();
    for _ in 0..MAX_REDRAWS {
        let drho: Vec<CMatrix> = streams
            .iter_mut()
            .map(|rng| {
                let b = complex_gaussian_matrix(rng, d);
                let h = linalg::hermitize(&b);
                let shift = linalg::trace(&h).re / d as f64;
                linalg::hermitize(&(h - linalg::identity(d).scale(shift)))
            })
            .collect();
        if independence_ratio(&drho) > INDEPENDENCE_TOL {
            let label = format!("random(d={d},n={n},seed={seed})");
            return QuantumStatisticalModel::new(label, rho, drho);
        }
    }
    Err(Error::InvalidModel(
        "could not draw linearly independent derivatives".into(),
    ))
}

/// Real symmetric PSD weighting matrix `G` with its cached eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub n: usize,
    pub g: RMatrix,
    pub rank: usize,
    pub sqrt_g: RMatrix,
    /// Ascending eigenvalues of `g`.
    pub eigenvalues: Vec<f64>,
    /// Matching unit eigenvectors (columns).
    pub eigenvectors: RMatrix,
}

impl CostMatrix {
    pub fn new(g: RMatrix) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || g.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "cost matrix must be square and non-empty, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        let asym = (&g - g.transpose()).amax();
        if asym > 1e-12 * g.amax().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "cost matrix not symmetric (deviation {asym:e})"
            )));
        }
        let g = (&g + g.transpose()).scale(0.5);
        let (vals, vecs) = linalg::eigh_real(&g);
        let hi = vals.iter().copied().fold(0.0, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if lo < -1e-12 * hi.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!(
                "cost matrix not positive semidefinite (min eigenvalue {lo:e})"
            )));
        }
        if hi <= 0.0 {
            return Err(Error::InvalidArgument("cost matrix is zero".into()));
        }
        let rank = vals.iter().filter(|&&v| v > RANK_TOL * hi).count();
        // eigenvalues below the rank cut are rounding noise of a singular G;
        // their square roots (~1e-8) would leak into √G, so they are dropped
        let mut sqrt_g = RMatrix::zeros(n, n);
        for (i, &v) in vals.iter().enumerate() {
            if v > RANK_TOL * hi {
                let e = vecs.column(i);
                sqrt_g += (e * e.transpose()).scale(v.sqrt());
            }
        }
        let sqrt_g = (&sqrt_g + sqrt_g.transpose()).scale(0.5);
        Ok(Self {
            n,
            g,
            rank,
            sqrt_g,
            eigenvalues: vals.iter().copied().collect(),
            eigenvectors: vecs,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self::new(RMatrix::identity(n, n)).expect("identity is a valid cost")
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.g.scale(c))
    }

    /// Eigenpairs with eigenvalue above the rank threshold, largest first.
    pub fn positive_eigenpairs(&self) -> Vec<(f64, nalgebra::DVector<f64>)> {
        let hi = self.eigenvalues.iter().copied().fold(0.0, f64::max);
        (0..self.n)
            .rev()
            .filter(|&i| self.eigenvalues[i] > RANK_TOL * hi)
            .map(|i| (self.eigenvalues[i], self.eigenvectors.column(i).into_owned()))
            .collect()
    }
}

/// `G = W Wᵀ` with `W` an `n × rank` Gaussian matrix, normalized to `tr G = n`.
pub fn random_cost(n: usize, rank: usize, seed: u64) -> Result<CostMatrix> {
    if rank < 1 || rank > n {
        return Err(Error::InvalidArgument(format!(
            "cost rank must be in [1, {n}], got {rank}"
        )));
    }
    let mut rng = stream_rng(seed, STREAM_COST);
    for _ in 0..MAX_REDRAWS {
        let w = RMatrix::from_fn(n, rank, |_, _| gaussian(&mut rng));
        let g = &w * w.transpose();
        let g = g.scale(n as f64 / g.trace());
        let cost = CostMatrix::new(g)?;
        if cost.rank == rank {
            return Ok(cost);
        }
    }
    Err(Error::InvalidArgument(format!(
        "could not draw a rank-{rank} cost"
    )))
}

/// Rank-one cost `G = ∇β ∇βᵀ` for a scalar function β(θ) of the parameters.
pub fn scalar_cost(dbeta: &[f64]) -> Result<CostMatrix> {
    if dbeta.is_empty() || dbeta.iter().all(|&b| b == 0.0) {
        return Err(Error::InvalidArgument("dbeta must be non-zero".into()));
    }
    let v = nalgebra::DVector::from_column_slice(dbeta);
    CostMatrix::new(&v * v.transpose())
}

type JsonMatrix = Vec<Vec<[f64; 2]>>;

/// On-disk model layout: complex entries are `[re, im]`, matrices row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub label: String,
    pub dim: usize,
    pub n_params: usize,
    pub rho: JsonMatrix,
    pub drho: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<Vec<Vec<f64>>>,
}

fn to_json_matrix(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn from_json_matrix(rows: &JsonMatrix, d: usize, what: &str) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Format(format!("{what} must be {d}x{d}")));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

impl ModelFile {
    pub fn from_model(m: &QuantumStatisticalModel, cost: Option<&CostMatrix>) -> Self {
        Self {
            label: m.label.clone(),
            dim: m.dim,
            n_params: m.n_params,
            rho: to_json_matrix(&m.rho),
            drho: m.drho.iter().map(to_json_matrix).collect(),
            cost: cost.map(|c| {
                (0..c.n)
                    .map(|i| (0..c.n).map(|j| c.g[(i, j)]).collect())
                    .collect()
            }),
        }
    }

    /// Converts to a validated model and its cost (identity when absent).
    /// Rank-deficient ρ is accepted; see [`QuantumStatisticalModel::warnings`].
    pub fn into_model(self) -> Result<(QuantumStatisticalModel, CostMatrix)> {
        let d = self.dim;
        let rho = from_json_matrix(&self.rho, d, "rho")?;
        if self.drho.len() != self.n_params {
            return Err(Error::Format(format!(
                "n_params = {} but {} drho matrices given",
                self.n_params,
                self.drho.len()
            )));
        }
        let drho = self
            .drho
            .iter()
            .enumerate()
            .map(|(mu, m)| from_json_matrix(m, d, &format!("drho[{mu}]")))
            .collect::<Result<Vec<_>>>()?;
        let model = QuantumStatisticalModel::new(self.label, rho, drho)?;
        let cost = match self.cost {
            None => CostMatrix::identity(self.n_params),
            Some(rows) => {
                let n = self.n_params;
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(Error::Format(format!("cost must be {n}x{n}")));
                }
                CostMatrix::new(RMatrix::from_fn(n, n, |i, j| rows[i][j]))?
            }
        };
        Ok((model, cost))
    }
}

pub fn model_to_json(m: &QuantumStatisticalModel, cost: Option<&CostMatrix>) -> String {
    serde_json::to_string_pretty(&ModelFile::from_model(m, cost))
        .expect("model serialization is infallible")
}

pub fn model_from_json(text: &str) -> Result<(QuantumStatisticalModel, CostMatrix)> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_model()
}

pub fn save_model(
    m: &QuantumStatisticalModel,
    cost: Option<&CostMatrix>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut text = model_to_json(m, cost);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(QuantumStatisticalModel, CostMatrix)> {
    let text = std::fs::read_to_string(path)?;
    model_from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_rank_one_cost_is_exactly_rank_one() {
        for seed in 0..20 {
            let g = random_cost(4, 1, seed).unwrap();
            let back = &g.sqrt_g * &g.sqrt_g;
            assert!((back - &g.g).norm() < 1e-12);
            let (vals, _) = linalg::eigh_real(&g.sqrt_g);
            assert!(vals.iter().filter(|v| v.abs() > 1e-12).count() == 1);
        }
    }

    fn diag(a: f64, b: f64) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(a, 0.0),
            C64::new(b, 0.0),
        ]))
    }

    #[test]
    fn maximally_mixed_is_valid() {
        let m = builtin_model("maximally_mixed_qubit", &[]).unwrap();
        assert!(validate_model(&m).is_empty());
        assert_eq!((m.dim, m.n_params), (2, 2));
    }

    #[test]
    fn trace_violation_is_reported() {
        let m = QuantumStatisticalModel::new_unchecked(
            "bad",
            diag(0.6, 0.5),
            vec![linalg::sigma_x().scale(0.5), linalg::sigma_y().scale(0.5)],
        );
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, Violation::RhoTrace);
        assert!((diags[0].magnitude - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identical_derivatives_are_dependent() {
        let m = QuantumStatisticalModel::new_unchecked(
            "dep",
            linalg::identity(2).scale(0.5),
            vec![linalg::sigma_x().scale(0.5), linalg::sigma_x().scale(0.5)],
        );
        let diags = validate_model(&m);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].violation, Violation::LinearDependence);
    }

    #[test]
    fn builtin_fixtures() {
        let m = builtin_model("diag_classical", &[0.25]).unwrap();
        assert_eq!(m.rho, diag(0.25, 0.75));
        assert_eq!(m.n_params, 1);

        let m = builtin_model("qubit_xy", &[0.5]).unwrap();
        assert_eq!(m.rho, diag(0.75, 0.25));
        assert_eq!(m.drho[0], linalg::sigma_x().scale(0.5));
        assert_eq!(m.drho[1], linalg::sigma_y().scale(0.5));

        assert!(matches!(
            builtin_model("qubit_xy", &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            builtin_model("diag_classical", &[0.0]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(builtin_model("nope", &[]), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn random_model_properties() {
        let m = random_model(2, 2, 7, 1e-3).unwrap();
        assert!(validate_model(&m).is_empty());
        let m = random_model(3, 3, 1, 1e-3).unwrap();
        assert!(m.min_rho_eigenvalue() >= 1e-3 - 1e-14);
        assert!(random_model(2, 4, 1, 1e-3).is_err());
        assert!(random_model(1, 1, 1, 1e-3).is_err());
        assert_eq!(random_model(4, 5, 11, 1e-3).unwrap(), random_model(4, 5, 11, 1e-3).unwrap());
        assert_ne!(random_model(3, 2, 1, 1e-3).unwrap().rho, random_model(3, 2, 2, 1e-3).unwrap().rho);
    }

    #[test]
    fn random_cost_rank_and_trace() {
        let g = random_cost(3, 1, 2).unwrap();
        assert_eq!(g.rank, 1);
        assert!((g.g.trace() - 3.0).abs() < 1e-12);
        let g = random_cost(2, 2, 5).unwrap();
        assert_eq!(g.rank, 2);
        assert!(g.eigenvalues.iter().all(|&v| v > 0.0));
        assert!(random_cost(2, 3, 5).is_err());
        assert!((&g.sqrt_g * &g.sqrt_g - &g.g).norm() <= 1e-10 * g.g.norm());
    }

    #[test]
    fn scalar_cost_is_outer_product() {
        let g = scalar_cost(&[1.0, 0.0]).unwrap();
        assert_eq!(g.g, RMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        assert_eq!(g.rank, 1);
        let g = scalar_cost(&[1.0, 1.0]).unwrap();
        assert_eq!(g.g, RMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]));
        assert!(scalar_cost(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let m = random_model(3, 2, 9, 1e-3).unwrap();
        let (back, cost) = model_from_json(&model_to_json(&m, None)).unwrap();
        assert_eq!(back, m);
        assert_eq!(cost, CostMatrix::identity(2));

        let mut file = ModelFile::from_model(&m, None);
        file.rho[0][1][1] += 0.3;
        let text = serde_json::to_string(&file).unwrap();
        assert!(matches!(model_from_json(&text), Err(Error::InvalidModel(_))));

        let text = r#"{"label":"x","dim":2,"n_params":1,"rho":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        assert!(matches!(model_from_json(text), Err(Error::Format(_))));
    }

    #[test]
    fn rank_deficient_rho_loads_with_warning() {
        let m = QuantumStatisticalModel::new("pure", diag(1.0, 0.0), vec![linalg::sigma_x().scale(0.5)])
            .unwrap();
        let (back, _) = model_from_json(&model_to_json(&m, None)).unwrap();
        assert_eq!(back.warnings().len(), 1);
    }
}
