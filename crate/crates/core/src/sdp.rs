//! Dense single-block LMI solver.
//!
//! Solves
//!
//! ```text
//! minimize    bᵀv
//! subject to  F₀ + Σᵢ vᵢ Fᵢ ⪰ 0      (one complex Hermitian block)
//!             A v = c
//! ```
//!
//! by ADMM. The equalities are eliminated up front (`v = v_p + N u` with `N`
//! an orthonormal null-space basis of `A`), leaving the splitting
//! `L(u) + G₀ − W = 0`, `W ⪰ 0`. Each iteration does one solve with the
//! constant Gram matrix `LᵀL` (factored once) and one Hermitian
//! eigendecomposition for the cone projection.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, ZERO};

#[derive(Debug, Clone)]
pub struct LmiProblem {
    /// Objective coefficients, one per variable.
    pub b: DVector<f64>,
    pub f0: CMatrix,
    pub f: Vec<CMatrix>,
    /// Equality constraints `a_eq · v = c_eq` (`q × p`).
    pub a_eq: RMatrix,
    pub c_eq: DVector<f64>,
}

impl LmiProblem {
    pub fn num_vars(&self) -> usize {
        self.b.len()
    }

    pub fn block_size(&self) -> usize {
        self.f0.nrows()
    }

    /// `F₀ + Σᵢ vᵢ Fᵢ`.
    pub fn affine_map(&self, v: &DVector<f64>) -> CMatrix {
        let mut out = self.f0.clone();
        for (vi, fi) in v.iter().zip(&self.f) {
            if *vi != 0.0 {
                out += fi.scale(*vi);
            }
        }
        out
    }

    fn check(&self) -> Result<()> {
        let p = self.b.len();
        let m = self.f0.nrows();
        if self.f.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} LMI coefficient matrices for {p} variables",
                self.f.len()
            )));
        }
        if self.f0.ncols() != m || self.f.iter().any(|f| f.nrows() != m || f.ncols() != m) {
            return Err(Error::DimensionMismatch("LMI blocks must all be m×m".into()));
        }
        if self.a_eq.ncols() != p || self.a_eq.nrows() != self.c_eq.len() {
            return Err(Error::DimensionMismatch(format!(
                "equality system is {}x{} with {} right-hand sides, expected {p} columns",
                self.a_eq.nrows(),
                self.a_eq.ncols(),
                self.c_eq.len()
            )));
        }
        for f in std::iter::once(&self.f0).chain(&self.f) {
            let dev = linalg::hermitian_deviation(f);
            if dev > 1e-12 {
                return Err(Error::NotHermitian(dev));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    pub penalty: f64,
    pub adaptive: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            eps_abs: 1e-9,
            eps_rel: 1e-8,
            max_iter: 200_000,
            penalty: 1.0,
            adaptive: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    InfeasibleSuspected,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::InfeasibleSuspected => "infeasible_suspected",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub v: DVector<f64>,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Final penalty parameter after adaptation.
    pub penalty: f64,
}

/// Frobenius-nearest PSD matrix: negative eigenvalues clamped to zero.
pub fn psd_project(h: &CMatrix) -> Result<CMatrix> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let dev = linalg::hermitian_deviation(h);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    Ok(project_unchecked(h))
}

fn project_unchecked(h: &CMatrix) -> CMatrix {
    let (vals, vecs) = linalg::eigh(h);
    let m = h.nrows();
    let mut out = CMatrix::from_element(m, m, ZERO);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let col = vecs.column(k);
        for j in 0..m {
            let cj = col[j].conj().scale(lam);
            for i in 0..m {
                out[(i, j)] += col[i] * cj;
            }
        }
    }
    linalg::hermitize(&out)
}

/// Real inner product `Re tr(A† B)` over flattened storage.
fn real_inner(a: &[f64], b: &CMatrix) -> f64 {
    let mut acc = 0.0;
    for (k, z) in b.iter().enumerate() {
        acc += a[2 * k] * z.re + a[2 * k + 1] * z.im;
    }
    acc
}

fn flatten(m: &CMatrix) -> Vec<f64> {
    m.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// The problem after equality elimination: `u ↦ G₀ + Σ_j u_j G_j`.
struct Reduced {
    v_p: DVector<f64>,
    null: RMatrix,
    g0: CMatrix,
    g: Vec<CMatrix>,
    g_flat: Vec<Vec<f64>>,
    b: DVector<f64>,
    /// Pseudo-inverse of the Gram matrix `M_jk = Re tr(G_j G_k)`.
    gram_pinv: RMatrix,
}

impl Reduced {
    fn apply(&self, u: &DVector<f64>) -> CMatrix {
        let mut out = self.g0.clone();
        for (uj, gj) in u.iter().zip(&self.g) {
            out.zip_apply(gj, |o, x| *o += x.scale(*uj));
        }
        out
    }

    fn adjoint(&self, h: &CMatrix) -> DVector<f64> {
        DVector::from_iterator(self.g.len(), self.g_flat.iter().map(|gj| real_inner(gj, h)))
    }
}

fn reduce(prob: &LmiProblem) -> std::result::Result<Reduced, f64> {
    let p = prob.num_vars();
    let (v_p, null) = if prob.a_eq.nrows() == 0 {
        (DVector::zeros(p), RMatrix::identity(p, p))
    } else {
        let (v_p, resid) = linalg::min_norm_solve(&prob.a_eq, &prob.c_eq, 1e-10);
        if resid > 1e-8 * (1.0 + prob.c_eq.norm()) {
            return Err(resid);
        }
        (v_p, linalg::null_space(&prob.a_eq, 1e-10))
    };
    let g0 = prob.affine_map(&v_p);
    let k = null.ncols();
    let g: Vec<CMatrix> = (0..k)
        .map(|j| {
            let mut acc = CMatrix::from_element(prob.block_size(), prob.block_size(), ZERO);
            for (i, fi) in prob.f.iter().enumerate() {
                let w = null[(i, j)];
                if w != 0.0 {
                    acc += fi.scale(w);
                }
            }
            acc
        })
        .collect();
    let g_flat: Vec<Vec<f64>> = g.iter().map(flatten).collect();
    let mut gram = RMatrix::zeros(k, k);
    for a in 0..k {
        for c in a..k {
            let v = real_inner(&g_flat[a], &g[c]);
            gram[(a, c)] = v;
            gram[(c, a)] = v;
        }
    }
    let (vals, vecs) = linalg::eigh_real(&gram);
    let hi = vals.iter().copied().fold(0.0, f64::max);
    let inv = vals.map(|x| if x > 1e-12 * hi { 1.0 / x } else { 0.0 });
    let gram_pinv = &vecs * RMatrix::from_diagonal(&inv) * vecs.transpose();
    let b = null.transpose() * &prob.b;
    Ok(Reduced {
        v_p,
        null,
        g0,
        g,
        g_flat,
        b,
        gram_pinv,
    })
}

const ADAPT_INTERVAL: usize = 25;
const ADAPT_RATIO: f64 = 10.0;

/// Runs ADMM on `prob`. Deterministic for fixed inputs and options.
pub fn solve_lmi(prob: &LmiProblem, opts: &SolverOptions) -> Result<LmiSolution> {
    prob.check()?;
    if !(opts.penalty > 0.0) {
        return Err(Error::InvalidArgument("penalty must be positive".into()));
    }
    let red = match reduce(prob) {
        Ok(r) => r,
        Err(_) => {
            let v = DVector::zeros(prob.num_vars());
            return Ok(LmiSolution {
                objective: prob.b.dot(&v),
                v,
                primal_residual: f64::INFINITY,
                dual_residual: f64::INFINITY,
                iterations: 0,
                status: SolveStatus::InfeasibleSuspected,
                penalty: opts.penalty,
            });
        }
    };

    let m = prob.block_size();
    let k = red.g.len();
    let mut rho = opts.penalty;
    let mut u = DVector::<f64>::zeros(k);
    let mut w = project_unchecked(&red.g0);
    let mut dual_u = CMatrix::from_element(m, m, ZERO);

    let mut best: Option<(f64, DVector<f64>, f64, f64)> = None;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;

    for it in 1..=opts.max_iter {
        iterations = it;
        // u-update: ρ M u = −b − ρ Lᵀ(G₀ − W + U)
        let target = &red.g0 - &w + &dual_u;
        let rhs = -red.b.scale(1.0 / rho) - red.adjoint(&target);
        u = &red.gram_pinv * rhs;
        let affine = red.apply(&u);

        let w_prev = std::mem::replace(&mut w, project_unchecked(&(&affine + &dual_u)));
        let gap = &affine - &w;
        dual_u += &gap;

        primal = linalg::frobenius(&gap);
        dual = rho * red.adjoint(&(&w - &w_prev)).norm();
        let scale = linalg::frobenius(&affine)
            .max(linalg::frobenius(&w))
            .max(1.0);
        let tol = opts.eps_abs + opts.eps_rel * scale;

        let merit = primal.max(dual) / tol;
        if best.as_ref().map_or(true, |(b, ..)| merit < *b) {
            best = Some((merit, u.clone(), primal, dual));
        }
        if primal <= tol && dual <= tol {
            status = SolveStatus::Converged;
            break;
        }

        if opts.adaptive && it % ADAPT_INTERVAL == 0 {
            let new_rho = if primal > ADAPT_RATIO * dual {
                rho * 2.0
            } else if dual > ADAPT_RATIO * primal {
                rho / 2.0
            } else {
                rho
            };
            if new_rho != rho {
                // scaled dual variable U = Λ/ρ
                dual_u.scale_mut(rho / new_rho);
                rho = new_rho;
            }
        }
    }

    if status != SolveStatus::Converged {
        if let Some((_, bu, bp, bd)) = best {
            u = bu;
            primal = bp;
            dual = bd;
        }
    }
    let v = &red.v_p + &red.null * &u;
    Ok(LmiSolution {
        objective: prob.b.dot(&v),
        v,
        primal_residual: primal,
        dual_residual: dual,
        iterations,
        status,
        penalty: rho,
    })
}
