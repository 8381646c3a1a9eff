//! Checks of the bound chain `max{C_S, C_R} ≤ C_H ≤ 3 C_S`, its rank-one and
//! rank-two refinements, the supporting operator inequalities, and seeded
//! ensemble sweeps.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::helstrom::{self, ObservableVector};
use crate::holevo::{self, HermitianBasis};
use crate::linalg::{self, CMatrix, RMatrix, C64, ZERO};
use crate::model::{self, CostMatrix, QuantumStatisticalModel};
use crate::sdp::SolverOptions;

/// Multiplicative slack on the bound chain.
pub const CHAIN_TOL: f64 = 1e-6;
/// `|C_H/C_S − 1|` allowed for rank-one costs.
pub const RANK_ONE_TOL: f64 = 1e-5;
/// Relative slack on operator inequalities.
pub const INEQUALITY_REL_TOL: f64 = 1e-9;
/// Absolute tolerance of the rank-two decomposition identity.
pub const DECOMPOSITION_TOL: f64 = 1e-9;
/// Skip the RLD bound when ρ has an eigenvalue below this.
pub const RLD_MIN_EIGENVALUE: f64 = 1e-8;
/// Ratios above this are flagged (not failed) against the factor-2 refinement.
pub const RATIO_TWO_FLAG: f64 = 2.0 + 1e-3;
/// Fraction of quarantined rows above which a run counts as non-convergent.
pub const QUARANTINE_LIMIT: f64 = 0.05;

pub const MAX_SWEEP_DIM: usize = 8;
pub const MAX_SWEEP_PARAMS: usize = 6;
pub const MAX_SWEEP_COUNT: usize = 10_000;

/// Formats a float with 17 significant digits.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn sig17<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        let raw = serde_json::value::RawValue::from_string(fmt_sig17(*x))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    } else {
        s.serialize_none()
    }
}

fn sig17_opt<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig17(v, s),
        None => s.serialize_none(),
    }
}

/// Bounds and inequality flags for one `(model, cost)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub model_label: String,
    pub seed: Option<u64>,
    pub d: usize,
    pub n: usize,
    #[serde(serialize_with = "sig17")]
    pub c_s: f64,
    #[serde(serialize_with = "sig17")]
    pub c_h: f64,
    #[serde(serialize_with = "sig17_opt")]
    pub c_r: Option<f64>,
    #[serde(serialize_with = "sig17")]
    pub ratio: f64,
    pub theorem1_ok: bool,
    pub sandwich_ok: bool,
    pub prop_rank: usize,
    pub prop_ok: bool,
    /// `C_H ≤ f(X^S)` and `||Im Q(X^S)||₁ ≤ 2 tr Re Q(X^S)`.
    pub intermediate_ok: bool,
    /// Holevo objective evaluated at the Helstrom minimizer.
    #[serde(serialize_with = "sig17")]
    pub objective_at_helstrom: f64,
    pub solver_status: String,
    pub solver_iterations: usize,
    #[serde(serialize_with = "sig17")]
    pub certificate: f64,
    #[serde(serialize_with = "sig17")]
    pub certificate_gap: f64,
    #[serde(serialize_with = "sig17")]
    pub feasibility_residual: f64,
    #[serde(serialize_with = "sig17")]
    pub primal_residual: f64,
    #[serde(serialize_with = "sig17")]
    pub dual_residual: f64,
}

impl BoundsReport {
    pub fn converged(&self) -> bool {
        self.solver_status == holevo::HolevoStatus::Verified.as_str()
            || self.solver_status == holevo::HolevoStatus::UnverifiedSupport.as_str()
    }

    pub fn all_ok(&self) -> bool {
        self.theorem1_ok && self.sandwich_ok && self.prop_ok && self.intermediate_ok
    }

    pub fn csv_header() -> &'static str {
        "model_label,d,n,cost_rank,seed,c_s,c_h,c_r,ratio,theorem1_ok,sandwich_ok,prop_ok,solver_status,certificate_gap"
    }

    pub fn csv_row(&self) -> String {
        let label = if self.model_label.contains([',', '"']) {
            format!("\"{}\"", self.model_label.replace('"', "\"\""))
        } else {
            self.model_label.clone()
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            label,
            self.d,
            self.n,
            self.prop_rank,
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            fmt_sig17(self.c_s),
            fmt_sig17(self.c_h),
            self.c_r.map(fmt_sig17).unwrap_or_default(),
            fmt_sig17(self.ratio),
            self.theorem1_ok,
            self.sandwich_ok,
            self.prop_ok,
            self.solver_status,
            fmt_sig17(self.certificate_gap),
        )
    }
}

fn le_rel(lhs: f64, rhs: f64, rel: f64) -> bool {
    lhs <= rhs * (1.0 + rel)
}

/// Evaluates `C_S`, `C_H`, `C_R` and every flag of the bound chain.
pub fn bounds_report(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    opts: &SolverOptions,
    seed: Option<u64>,
) -> Result<BoundsReport> {
    let hel = helstrom::helstrom_bound(m, g)?;
    let hol = holevo::holevo_bound(m, g, opts)?;
    let c_r = if m.min_rho_eigenvalue() >= RLD_MIN_EIGENVALUE {
        holevo::rld_bound(m, g).ok()
    } else {
        None
    };
    let c_s = hel.c_s;
    let c_h = hol.c_h;
    let ratio = c_h / c_s;

    let theorem1_ok = le_rel(c_h, 3.0 * c_s, CHAIN_TOL);
    let sandwich_ok =
        c_s * (1.0 - CHAIN_TOL) <= c_h && c_r.map_or(true, |r| le_rel(r, c_h, CHAIN_TOL));
    let prop_ok = match g.rank {
        1 => (ratio - 1.0).abs() <= RANK_ONE_TOL,
        2 => le_rel(c_h, 2.0 * c_s, CHAIN_TOL),
        _ => true,
    };
    let objective_at_helstrom = holevo::holevo_objective(m, g, &hel.x_s)?;
    let unc = uncertainty_relation_check(m, g, &hel.x_s)?;
    let intermediate_ok = c_h <= objective_at_helstrom + CHAIN_TOL * c_h.abs().max(1.0) && unc.ok;

    Ok(BoundsReport {
        model_label: m.label.clone(),
        seed,
        d: m.dim,
        n: m.n_params,
        c_s,
        c_h,
        c_r,
        ratio,
        theorem1_ok,
        sandwich_ok,
        prop_rank: g.rank,
        prop_ok,
        intermediate_ok,
        objective_at_helstrom,
        solver_status: hol.status.as_str().to_string(),
        solver_iterations: hol.solver.iterations,
        certificate: hol.certificate,
        certificate_gap: hol.certificate_gap(),
        feasibility_residual: hol.feasibility,
        primal_residual: hol.solver.primal_residual,
        dual_residual: hol.solver.dual_residual,
    })
}

/// Both sides of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            ok: lhs <= rhs * (1.0 + INEQUALITY_REL_TOL),
        }
    }
}

/// `||Im Q(X)||₁` for the antisymmetric imaginary part of `Q`.
pub fn im_q_trace_norm(q: &CMatrix) -> f64 {
    let im = linalg::imag_part(q);
    linalg::trace_norm_real(&(&im - im.transpose()).scale(0.5))
}

/// `||Im Q(X)||₁ ≤ 2 tr Re Q(X)` for a feasible `X`.
pub fn uncertainty_relation_check(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    x: &ObservableVector,
) -> Result<InequalityCheck> {
    let resid = helstrom::feasibility_residual(m, x)?;
    if resid > holevo::FEASIBILITY_TOL {
        return Err(Error::InvalidArgument(format!(
            "observables are not locally unbiased (residual {resid:e})"
        )));
    }
    let q = helstrom::q_matrix(m, g, x)?;
    let lhs = im_q_trace_norm(&q);
    let rhs = 2.0 * linalg::real_part(&q).trace();
    Ok(InequalityCheck::new(lhs, rhs))
}

/// `|i tr ρ[Y₁, Y₂]| ≤ tr ρY₁² + tr ρY₂²`.
pub fn commutator_inequality_check(
    rho: &CMatrix,
    y1: &CMatrix,
    y2: &CMatrix,
) -> Result<InequalityCheck> {
    let d = rho.nrows();
    if [y1, y2].iter().any(|y| y.nrows() != d || y.ncols() != d) || rho.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "rho is {}x{}, operators are {}x{} and {}x{}",
            rho.nrows(),
            rho.ncols(),
            y1.nrows(),
            y1.ncols(),
            y2.nrows(),
            y2.ncols()
        )));
    }
    let comm = y1 * y2 - y2 * y1;
    let lhs = (linalg::trace_product(rho, &comm) * linalg::I).norm();
    let rhs = linalg::trace_product(rho, &(y1 * y1)).re + linalg::trace_product(rho, &(y2 * y2)).re;
    Ok(InequalityCheck::new(lhs, rhs))
}

/// Rank-two decomposition: `||Im Q||₁ = 2 |Im tr ρY₁Y₂| ≤ tr Re Q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankTwoCheck {
    /// `||Im Q(X)||₁`.
    pub lhs: f64,
    /// `2 |Im tr(ρ Y₁ Y₂)|`.
    pub decomposition: f64,
    /// `tr Re Q(X)`.
    pub rhs: f64,
    pub identity_ok: bool,
    pub ok: bool,
}

/// Builds `Y_j = √g_j Σ_μ e^j_μ X_μ` from the two eigenpairs of `G` and checks
/// the decomposition identity and the inequality it feeds.
pub fn rank_two_decomposition_check(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    x: &ObservableVector,
) -> Result<RankTwoCheck> {
    if g.rank != 2 {
        return Err(Error::InvalidArgument(format!(
            "cost must have rank 2, got rank {}",
            g.rank
        )));
    }
    let q = helstrom::q_matrix(m, g, x)?;
    let ys: Vec<CMatrix> = g
        .positive_eigenpairs()
        .into_iter()
        .map(|(gj, e)| {
            let mut y = CMatrix::from_element(m.dim, m.dim, ZERO);
            for (mu, op) in x.ops.iter().enumerate() {
                y += op.scale(gj.sqrt() * e[mu]);
            }
            y
        })
        .collect();
    let lhs = im_q_trace_norm(&q);
    let decomposition = 2.0 * linalg::trace_product(&(&m.rho * &ys[0]), &ys[1]).im.abs();
    let rhs = linalg::real_part(&q).trace();
    let identity_ok = (lhs - decomposition).abs() <= DECOMPOSITION_TOL * rhs.abs().max(1.0);
    let ok = identity_ok && InequalityCheck::new(decomposition, rhs).ok;
    Ok(RankTwoCheck {
        lhs,
        decomposition,
        rhs,
        identity_ok,
        ok,
    })
}

#[derive(Debug, Clone)]
pub struct Perturbation {
    pub x: ObservableVector,
    /// Set when the constraint null space is empty and `x_s` is returned as is.
    pub notice: Option<String>,
}

/// `X^S + Δ` with `Δ` a random direction inside the constraint null space,
/// `||Δ coefficients||_F = magnitude`.
pub fn random_feasible_perturbation(
    m: &QuantumStatisticalModel,
    x_s: &ObservableVector,
    magnitude: f64,
    seed: u64,
) -> Result<Perturbation> {
    let basis = holevo::hermitian_basis(m.dim)?;
    let base = coefficients(&basis, x_s)?;
    let t = holevo::constraint_matrix(m, &basis);
    // each row of Δ must satisfy Δ_μ · t = 0
    let null = linalg::null_space(&t.transpose(), 1e-10);
    if null.ncols() == 0 {
        return Ok(Perturbation {
            x: x_s.clone(),
            notice: Some("constraint null space is empty; perturbation skipped".into()),
        });
    }
    if magnitude == 0.0 {
        return Ok(Perturbation {
            x: basis.observables(&base),
            notice: None,
        });
    }
    let mut rng = model::stream_rng(seed, model::STREAM_PERTURBATION);
    let raw = RMatrix::from_fn(m.n_params, null.ncols(), |_, _| model::gaussian(&mut rng));
    let delta = raw * null.transpose();
    let norm = delta.norm();
    let delta = delta.scale(magnitude / norm);
    Ok(Perturbation {
        x: basis.observables(&(base + delta)),
        notice: None,
    })
}

fn coefficients(basis: &HermitianBasis, x: &ObservableVector) -> Result<RMatrix> {
    if let Some(c) = &x.coeffs {
        if c.ncols() == basis.len() {
            return Ok(c.clone());
        }
    }
    if x.ops.iter().any(|op| op.nrows() != basis.dim) {
        return Err(Error::DimensionMismatch("observable dimension".into()));
    }
    let rows: Vec<Vec<f64>> = x.ops.iter().map(|op| basis.coordinates(op)).collect();
    Ok(RMatrix::from_fn(x.n(), basis.len(), |mu, i| rows[mu][i]))
}

/// Bound for a scalar function β(θ) of the parameters (rank-one cost `∇β ∇βᵀ`).
#[derive(Debug, Clone)]
pub struct ScalarBound {
    /// `∇βᵀ F⁻¹ ∇β`.
    pub value: f64,
    /// `Y = Σ_μν (F⁻¹)_{μν} ∂_μβ L_ν`.
    pub y_opt: CMatrix,
    /// `max_μ |tr(Y ∂_μ ρ) − ∂_μ β|`.
    pub feasibility: f64,
    pub helstrom_value: f64,
    pub holevo_value: f64,
    pub holevo_status: holevo::HolevoStatus,
}

pub fn scalar_bound(
    m: &QuantumStatisticalModel,
    dbeta: &[f64],
    opts: &SolverOptions,
) -> Result<ScalarBound> {
    if dbeta.len() != m.n_params {
        return Err(Error::DimensionMismatch(format!(
            "{} gradient entries for {} parameters",
            dbeta.len(),
            m.n_params
        )));
    }
    let g = model::scalar_cost(dbeta)?;
    let hel = helstrom::helstrom_bound(m, &g)?;
    let beta = DVector::from_column_slice(dbeta);
    let value = (beta.transpose() * &hel.f_inv * &beta)[(0, 0)];
    let weights = &hel.f_inv * &beta;
    let mut y = CMatrix::from_element(m.dim, m.dim, ZERO);
    for (nu, l) in hel.qfi.slds.iter().enumerate() {
        y += l.scale(weights[nu]);
    }
    let y_opt = linalg::hermitize(&y);
    let feasibility = m
        .drho
        .iter()
        .zip(dbeta)
        .map(|(dr, b)| (linalg::trace_product(&y_opt, dr) - C64::new(*b, 0.0)).norm())
        .fold(0.0, f64::max);
    let hol = holevo::holevo_bound(m, &g, opts)?;
    Ok(ScalarBound {
        value,
        y_opt,
        feasibility,
        helstrom_value: hel.c_s,
        holevo_value: hol.c_h,
        holevo_status: hol.status,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostRanks {
    /// Full-rank random cost for every row.
    Full,
    /// Random costs of the listed ranks (ranks above `n` are skipped).
    Ranks(Vec<usize>),
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub ns: Vec<usize>,
    pub count: usize,
    pub seed: u64,
    pub cost_ranks: CostRanks,
    #[serde(skip)]
    pub opts: SolverOptions,
    #[serde(skip)]
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(dims: Vec<usize>, ns: Vec<usize>, count: usize, seed: u64, cost_ranks: CostRanks) -> Self {
        Self {
            dims,
            ns,
            count,
            seed,
            cost_ranks,
            opts: SolverOptions::default(),
            jobs: 0,
        }
    }

    /// Valid `(d, n, rank)` cells in grid order; rows cycle through them.
    pub fn grid(&self) -> Vec<(usize, usize, usize)> {
        let mut cells = Vec::new();
        for &d in &self.dims {
            for &n in &self.ns {
                if n < 1 || n > d * d - 1 {
                    continue;
                }
                match &self.cost_ranks {
                    CostRanks::Full => cells.push((d, n, n)),
                    CostRanks::Ranks(ranks) => {
                        for &r in ranks {
                            if (1..=n).contains(&r) {
                                cells.push((d, n, r));
                            }
                        }
                    }
                }
            }
        }
        cells
    }

    fn check(&self) -> Result<()> {
        if self.dims.iter().any(|&d| !(2..=MAX_SWEEP_DIM).contains(&d)) {
            return Err(Error::InvalidArgument(format!(
                "sweep dims must lie in [2, {MAX_SWEEP_DIM}]"
            )));
        }
        if self.ns.iter().any(|&n| !(1..=MAX_SWEEP_PARAMS).contains(&n)) {
            return Err(Error::InvalidArgument(format!(
                "sweep parameter counts must lie in [1, {MAX_SWEEP_PARAMS}]"
            )));
        }
        if self.count > MAX_SWEEP_COUNT {
            return Err(Error::InvalidArgument(format!(
                "sweep count must be at most {MAX_SWEEP_COUNT}"
            )));
        }
        if self.count > 0 && self.grid().is_empty() {
            return Err(Error::InvalidArgument(
                "no valid (d, n, rank) combination in sweep".into(),
            ));
        }
        Ok(())
    }
}

/// Per-row seed: SplitMix64 of the sweep seed combined with the row index.
pub fn row_seed(seed: u64, row: usize) -> u64 {
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(row as u64)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub rows: Vec<BoundsReport>,
    /// Largest `C_H/C_S` over converged rows.
    #[serde(serialize_with = "sig17")]
    pub max_ratio: f64,
    /// Converged rows with at least one failed flag.
    pub violations: usize,
    /// Rows whose solve did not converge or failed its certificate.
    pub non_converged: usize,
    /// Converged rows with ratio above `2 + 1e-3`.
    pub above_two: usize,
    /// Rows that could not be evaluated at all (model or Helstrom failure).
    pub errors: Vec<String>,
    #[serde(serialize_with = "sig17")]
    pub chain_tolerance: f64,
    #[serde(serialize_with = "sig17")]
    pub rank_one_tolerance: f64,
}

impl SweepSummary {
    pub fn quarantined_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            0.0
        } else {
            (self.non_converged + self.errors.len()) as f64 / (self.rows.len() + self.errors.len()) as f64
        }
    }

    pub fn converged_rows(&self) -> impl Iterator<Item = &BoundsReport> {
        self.rows.iter().filter(|r| r.converged())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(BoundsReport::csv_header());
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

fn sweep_row(cfg: &SweepConfig, row: usize, cell: (usize, usize, usize)) -> Result<BoundsReport> {
    let (d, n, rank) = cell;
    let seed = row_seed(cfg.seed, row);
    let m = model::random_model(d, n, seed, 1e-3)?;
    let g = model::random_cost(n, rank, seed)?;
    bounds_report(&m, &g, &cfg.opts, Some(seed))
}

pub(crate) fn run_parallel<T, F>(jobs: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if jobs == 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Runs `count` seeded rows cycling through the `(d, n, rank)` grid.
/// Output is independent of `jobs`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    cfg.check()?;
    let grid = cfg.grid();
    let results = run_parallel(cfg.jobs, cfg.count, |i| {
        sweep_row(cfg, i, grid[i % grid.len()])
    });
    let mut rows = Vec::with_capacity(cfg.count);
    let mut errors = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        match res {
            Ok(r) => rows.push(r),
            Err(e) => errors.push(format!("row {i}: {e}")),
        }
    }
    let converged: Vec<&BoundsReport> = rows.iter().filter(|r| r.converged()).collect();
    let max_ratio = converged.iter().map(|r| r.ratio).fold(f64::NAN, f64::max);
    let violations = converged.iter().filter(|r| !r.all_ok()).count();
    let above_two = converged.iter().filter(|r| r.ratio > RATIO_TWO_FLAG).count();
    let non_converged = rows.len() - converged.len();
    Ok(SweepSummary {
        config: cfg.clone(),
        rows,
        max_ratio,
        violations,
        non_converged,
        above_two,
        errors,
        chain_tolerance: CHAIN_TOL,
        rank_one_tolerance: RANK_ONE_TOL,
    })
}

/// Counts of one randomized inequality property run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PropertyOutcome {
    pub draws: usize,
    pub violations: usize,
    #[serde(serialize_with = "sig17")]
    pub max_lhs_over_rhs: f64,
}

fn random_dims(rng: &mut impl Rng) -> (usize, usize) {
    let d = rng.gen_range(2..=4usize);
    let n = rng.gen_range(1..=4usize.min(d * d - 1));
    (d, n)
}

/// `||Im Q||₁ ≤ 2 tr Re Q` on `draws` random models at random feasible
/// perturbations of the Helstrom minimizer.
pub fn uncertainty_property(draws: usize, seed: u64, jobs: usize) -> Result<PropertyOutcome> {
    let checks = run_parallel(jobs, draws, |i| -> Result<InequalityCheck> {
        let s = row_seed(seed ^ 0x5555_0000, i);
        let mut rng = model::stream_rng(s, 0x10);
        let (d, n) = random_dims(&mut rng);
        let m = model::random_model(d, n, s, 1e-3)?;
        let g = model::random_cost(n, rng.gen_range(1..=n), s)?;
        let hel = helstrom::helstrom_bound(&m, &g)?;
        let base = coefficients(&holevo::hermitian_basis(d)?, &hel.x_s)?.norm();
        let magnitude = base * 10f64.powf(rng.gen_range(-2.0..1.0));
        let x = random_feasible_perturbation(&m, &hel.x_s, magnitude, s)?.x;
        uncertainty_relation_check(&m, &g, &x)
    });
    summarize(checks)
}

/// Commutator inequality on `draws` random `(ρ, Y₁, Y₂)`.
pub fn commutator_property(draws: usize, seed: u64, jobs: usize) -> Result<PropertyOutcome> {
    let checks = run_parallel(jobs, draws, |i| -> Result<InequalityCheck> {
        let s = row_seed(seed ^ 0xAAAA_0000, i);
        let mut rng = model::stream_rng(s, 0x11);
        let d = rng.gen_range(2..=6usize);
        let m = model::random_model(d, 1, s, 1e-3)?;
        let y1 = model::random_hermitian(&mut rng, d);
        let y2 = model::random_hermitian(&mut rng, d);
        commutator_inequality_check(&m.rho, &y1, &y2)
    });
    summarize(checks)
}

fn summarize(checks: Vec<Result<InequalityCheck>>) -> Result<PropertyOutcome> {
    let checks = checks.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(PropertyOutcome {
        draws: checks.len(),
        violations: checks.iter().filter(|c| !c.ok).count(),
        max_lhs_over_rhs: checks
            .iter()
            .filter(|c| c.rhs > 0.0)
            .map(|c| c.lhs / c.rhs)
            .fold(0.0, f64::max),
    })
}

/// One named fixture with its expected values.
#[derive(Debug, Clone, Serialize)]
pub struct FixtureCheck {
    pub name: String,
    #[serde(serialize_with = "sig17")]
    pub expected_c_s: f64,
    #[serde(serialize_with = "sig17")]
    pub expected_c_h: f64,
    pub report: BoundsReport,
    pub ok: bool,
}

/// Built-in fixtures with closed-form `C_S` and `C_H`.
pub fn fixture_checks(opts: &SolverOptions) -> Result<Vec<FixtureCheck>> {
    let mut cases: Vec<(String, QuantumStatisticalModel, CostMatrix, f64, f64)> = vec![
        (
            "maximally_mixed_qubit".into(),
            model::builtin_model("maximally_mixed_qubit", &[])?,
            CostMatrix::identity(2),
            2.0,
            2.0,
        ),
        (
            "diag_classical(0.25)".into(),
            model::builtin_model("diag_classical", &[0.25])?,
            CostMatrix::identity(1),
            0.1875,
            0.1875,
        ),
    ];
    for z0 in [0.1, 0.3, 0.5, 0.7, 0.9] {
        cases.push((
            format!("qubit_xy({z0})"),
            model::builtin_model("qubit_xy", &[z0])?,
            CostMatrix::identity(2),
            2.0,
            2.0 + 2.0 * z0,
        ));
    }
    cases
        .into_iter()
        .map(|(name, m, g, cs, ch)| {
            let report = bounds_report(&m, &g, opts, None)?;
            let ok = report.converged()
                && report.all_ok()
                && (report.c_s - cs).abs() <= 1e-9
                && (report.c_h - ch).abs() <= RANK_ONE_TOL * ch;
            Ok(FixtureCheck {
                name,
                expected_c_s: cs,
                expected_c_h: ch,
                report,
                ok,
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Rows of the full-rank sweep; rank-controlled sweeps use a quarter of it.
    pub count: usize,
    pub opts: SolverOptions,
    pub jobs: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            opts: SolverOptions::default(),
            jobs: 0,
        }
    }
}

/// Everything `verify` checks, in a fixed order.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub theorem1: SweepSummary,
    pub rank_one: SweepSummary,
    pub rank_two: SweepSummary,
    pub uncertainty: PropertyOutcome,
    pub commutator: PropertyOutcome,
    pub fixtures: Vec<FixtureCheck>,
}

impl VerifyReport {
    pub fn sweeps(&self) -> [(&'static str, &SweepSummary); 3] {
        [
            ("theorem1 (full-rank G)", &self.theorem1),
            ("rank-one G", &self.rank_one),
            ("rank-two G", &self.rank_two),
        ]
    }

    pub fn violations(&self) -> usize {
        self.sweeps().iter().map(|(_, s)| s.violations).sum::<usize>()
            + self.uncertainty.violations
            + self.commutator.violations
            + self.fixtures.iter().filter(|f| !f.ok).count()
    }

    /// True when any sweep quarantines more than 5% of its rows.
    pub fn excessive_non_convergence(&self) -> bool {
        self.sweeps()
            .iter()
            .any(|(_, s)| s.quarantined_fraction() > QUARANTINE_LIMIT)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("verify seed={}\n", self.seed));
        for (name, s) in self.sweeps() {
            out.push_str(&format!(
                "sweep {name}: rows={} converged={} non_converged={} errors={} violations={} max_ratio={} above_2={}\n",
                s.rows.len(),
                s.rows.len() - s.non_converged,
                s.non_converged,
                s.errors.len(),
                s.violations,
                fmt_sig17(s.max_ratio),
                s.above_two,
            ));
        }
        if self.theorem1.above_two > 0 {
            out.push_str(&format!(
                "note: {} full-rank rows exceed C_H/C_S = 2 + 1e-3\n",
                self.theorem1.above_two
            ));
        }
        for (name, p) in [("uncertainty relation", &self.uncertainty), ("commutator inequality", &self.commutator)] {
            out.push_str(&format!(
                "property {name}: draws={} violations={} max_lhs/rhs={}\n",
                p.draws,
                p.violations,
                fmt_sig17(p.max_lhs_over_rhs)
            ));
        }
        for f in &self.fixtures {
            out.push_str(&format!(
                "fixture {}: C_S={} (expected {}) C_H={} (expected {}) {}\n",
                f.name,
                fmt_sig17(f.report.c_s),
                fmt_sig17(f.expected_c_s),
                fmt_sig17(f.report.c_h),
                fmt_sig17(f.expected_c_h),
                if f.ok { "OK" } else { "FAIL" }
            ));
        }
        out.push_str(&format!("total violations: {}\n", self.violations()));
        out
    }
}

pub fn verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    let mk = |count: usize, dims: Vec<usize>, ns: Vec<usize>, ranks: CostRanks, seed: u64| SweepConfig {
        dims,
        ns,
        count,
        seed,
        cost_ranks: ranks,
        opts: cfg.opts,
        jobs: cfg.jobs,
    };
    let side = (cfg.count / 4).max(1);
    let theorem1 = sweep(&mk(cfg.count, vec![2, 3, 4], vec![2, 3, 4], CostRanks::Full, cfg.seed))?;
    let rank_one = sweep(&mk(
        side,
        vec![2, 3, 4],
        vec![2, 3, 4],
        CostRanks::Ranks(vec![1]),
        cfg.seed.wrapping_add(1),
    ))?;
    let rank_two = sweep(&mk(
        side,
        vec![2, 3, 4],
        vec![2, 3, 4],
        CostRanks::Ranks(vec![2]),
        cfg.seed.wrapping_add(2),
    ))?;
    let draws = cfg.count * 5;
    let uncertainty = uncertainty_property(draws, cfg.seed, cfg.jobs)?;
    let commutator = commutator_property(draws, cfg.seed, cfg.jobs)?;
    let fixtures = fixture_checks(&cfg.opts)?;
    Ok(VerifyReport {
        seed: cfg.seed,
        theorem1,
        rank_one,
        rank_two,
        uncertainty,
        commutator,
        fixtures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma_x, sigma_y};
    use crate::model::builtin_model;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn maximally_mixed_report() {
        let m = builtin_model("maximally_mixed_qubit", &[]).unwrap();
        let r = bounds_report(&m, &CostMatrix::identity(2), &opts(), None).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-6);
        assert!(r.all_ok() && r.converged());
    }

    #[test]
    fn qubit_xy_report() {
        let m = builtin_model("qubit_xy", &[0.9]).unwrap();
        let r = bounds_report(&m, &CostMatrix::identity(2), &opts(), None).unwrap();
        assert!((r.ratio - 1.9).abs() < 1e-5);
        assert!(r.theorem1_ok && r.sandwich_ok);
        // rank-two cost: Prop. 2 bound 2 C_S holds with room to spare
        assert!(r.prop_ok);
    }

    #[test]
    fn rank_one_cost_report() {
        let m = model::random_model(3, 3, 21, 1e-3).unwrap();
        let g = model::random_cost(3, 1, 21).unwrap();
        let r = bounds_report(&m, &g, &opts(), Some(21)).unwrap();
        assert_eq!(r.prop_rank, 1);
        assert!(r.prop_ok, "ratio {}", r.ratio);
    }

    #[test]
    fn uncertainty_fixtures() {
        let m = builtin_model("maximally_mixed_qubit", &[]).unwrap();
        let h = helstrom::helstrom_bound(&m, &CostMatrix::identity(2)).unwrap();
        let c = uncertainty_relation_check(&m, &CostMatrix::identity(2), &h.x_s).unwrap();
        assert!(c.lhs.abs() < 1e-14 && (c.rhs - 4.0).abs() < 1e-12 && c.ok);

        let z0 = 0.6;
        let m = builtin_model("qubit_xy", &[z0]).unwrap();
        let h = helstrom::helstrom_bound(&m, &CostMatrix::identity(2)).unwrap();
        let c = uncertainty_relation_check(&m, &CostMatrix::identity(2), &h.x_s).unwrap();
        assert!((c.lhs - 2.0 * z0).abs() < 1e-12 && (c.rhs - 4.0).abs() < 1e-12);

        let bad = ObservableVector::new(vec![sigma_x(), sigma_x()]);
        assert!(uncertainty_relation_check(&m, &CostMatrix::identity(2), &bad).is_err());
    }

    #[test]
    fn commutator_fixtures() {
        let c = commutator_inequality_check(&linalg::identity(2).scale(0.5), &sigma_x(), &sigma_y())
            .unwrap();
        assert!(c.lhs < 1e-15 && (c.rhs - 2.0).abs() < 1e-15);

        let rho = builtin_model("qubit_xy", &[0.5]).unwrap().rho;
        let c = commutator_inequality_check(&rho, &sigma_x(), &sigma_y()).unwrap();
        assert!((c.lhs - 1.0).abs() < 1e-15 && (c.rhs - 2.0).abs() < 1e-15);

        let c = commutator_inequality_check(&rho, &sigma_x(), &sigma_x()).unwrap();
        assert_eq!(c.lhs, 0.0);
        assert!(commutator_inequality_check(&rho, &linalg::identity(3), &sigma_x()).is_err());
    }

    #[test]
    fn rank_two_fixtures() {
        let z0 = 0.4;
        let m = builtin_model("qubit_xy", &[z0]).unwrap();
        let x = ObservableVector::new(vec![sigma_x(), sigma_y()]);
        let c = rank_two_decomposition_check(&m, &CostMatrix::identity(2), &x).unwrap();
        assert!((c.lhs - 2.0 * z0).abs() < 1e-12 && c.identity_ok && c.ok);

        let m3 = model::random_model(3, 3, 5, 1e-3).unwrap();
        let g2 = CostMatrix::new(RMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]))).unwrap();
        let h = helstrom::helstrom_bound(&m3, &g2).unwrap();
        let c = rank_two_decomposition_check(&m3, &g2, &h.x_s).unwrap();
        assert!((c.lhs - c.decomposition).abs() <= 1e-9 && c.ok);

        let g1 = model::scalar_cost(&[1.0, 0.0]).unwrap();
        assert!(rank_two_decomposition_check(&m, &g1, &x).is_err());
    }

    #[test]
    fn perturbations() {
        let m = model::random_model(3, 2, 3, 1e-3).unwrap();
        let h = helstrom::helstrom_bound(&m, &CostMatrix::identity(2)).unwrap();
        let p0 = random_feasible_perturbation(&m, &h.x_s, 0.0, 1).unwrap();
        for (a, b) in p0.x.ops.iter().zip(&h.x_s.ops) {
            assert!(linalg::frobenius(&(a - b)) < 1e-12);
        }
        let p1 = random_feasible_perturbation(&m, &h.x_s, 0.5, 1).unwrap();
        let p2 = random_feasible_perturbation(&m, &h.x_s, 0.5, 2).unwrap();
        assert!(helstrom::feasibility_residual(&m, &p1.x).unwrap() <= 1e-8);
        let c1 = p1.x.coeffs.unwrap();
        let c2 = p2.x.coeffs.unwrap();
        assert!((&c1 - &c2).norm() > 0.0);
        let base = coefficients(&holevo::hermitian_basis(3).unwrap(), &h.x_s).unwrap();
        assert!(((&c1 - base).norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scalar_bound_fixtures() {
        let m = builtin_model("maximally_mixed_qubit", &[]).unwrap();
        let s = scalar_bound(&m, &[1.0, 0.0], &opts()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        assert!(linalg::frobenius(&(&s.y_opt - sigma_x())) < 1e-12);
        assert!((s.holevo_value - s.value).abs() <= 1e-5 * s.value);

        let m = builtin_model("diag_classical", &[0.25]).unwrap();
        let s = scalar_bound(&m, &[1.0], &opts()).unwrap();
        assert!((s.value - 0.1875).abs() < 1e-12);

        let m = builtin_model("qubit_xy", &[0.5]).unwrap();
        let s = scalar_bound(&m, &[1.0, 1.0], &opts()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!(s.feasibility <= 1e-8);
        assert!((s.helstrom_value - s.value).abs() <= 1e-9 * s.value);
        assert!((s.holevo_value - s.value).abs() <= 1e-5 * s.value);
    }

    #[test]
    fn sweep_grid_skips_invalid_cells() {
        let cfg = SweepConfig::new(vec![2, 3], vec![2, 4], 1, 1, CostRanks::Ranks(vec![1, 3]));
        assert_eq!(cfg.grid(), vec![(2, 2, 1), (3, 2, 1), (3, 4, 1), (3, 4, 3)]);
        let too_big = SweepConfig::new(vec![9], vec![2], 1, 1, CostRanks::Full);
        assert!(sweep(&too_big).is_err());
    }

    #[test]
    fn small_sweep_has_no_violations() {
        let mut cfg = SweepConfig::new(vec![2], vec![2], 5, 1, CostRanks::Full);
        cfg.jobs = 2;
        let s = sweep(&cfg).unwrap();
        assert_eq!(s.rows.len(), 5);
        assert_eq!(s.violations, 0);
        cfg.jobs = 1;
        let again = sweep(&cfg).unwrap();
        assert_eq!(s.to_csv(), again.to_csv());
    }

    #[test]
    fn sig17_formatting() {
        assert_eq!(fmt_sig17(2.0), "2.0000000000000000e0");
        assert_eq!(fmt_sig17(0.1875), "1.8750000000000000e-1");
    }
}
