//! Holevo bound as an LMI program, plus the RLD (Yuen-Lax) bound.
//!
//! Every `X_μ` is written in an orthonormal Hermitian basis,
//! `X_μ = Σ_i x_{μi} B_i`, so that `Z(X) = x S xᵀ` with the ρ-weighted Gram
//! matrix `S_ij = tr(ρ B_i B_j)`. Using
//!
//! ```text
//! tr G Re Z + ||√G Im Z √G||₁ = min { tr G V : V real symmetric, V ⪰ Z }
//! ```
//!
//! and a factor `S = R R†`, the constraint `V ⪰ x S xᵀ` becomes the Schur block
//! `[[V, xR], [(xR)†, I]] ⪰ 0`, which is linear in `(V, x)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::helstrom::{self, check_cost, ObservableVector};
use crate::linalg::{self, CMatrix, RMatrix, C64, ONE, ZERO};
use crate::model::{CostMatrix, QuantumStatisticalModel};
use crate::sdp::{self, LmiProblem, LmiSolution, SolveStatus, SolverOptions};

/// Relative eigenvalue cut used when factoring the Gram matrix.
pub const GRAM_RANK_TOL: f64 = 1e-10;
/// Allowed `|certificate − C_H| / max(1, C_H)` before a result is downgraded.
pub const CERTIFICATE_TOL: f64 = 1e-5;
/// Allowed feasibility residual of the reconstructed minimizer.
pub const FEASIBILITY_TOL: f64 = 1e-6;
/// ρ with a smaller eigenvalue is treated as a support edge case.
pub const NEAR_SINGULAR_RHO: f64 = 1e-8;

/// Orthonormal Hermitian basis of `d × d` matrices (`tr B_i B_j = δ_ij`):
/// `I/√d`, then symmetric off-diagonal, antisymmetric off-diagonal and
/// traceless diagonal generalized Gell-Mann matrices, each scaled by `1/√2`.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    pub dim: usize,
    pub mats: Vec<CMatrix>,
}

impl HermitianBasis {
    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    /// `Σ_i coeffs_i B_i`.
    pub fn combine(&self, coeffs: &[f64]) -> CMatrix {
        let mut out = CMatrix::from_element(self.dim, self.dim, ZERO);
        for (c, b) in coeffs.iter().zip(&self.mats) {
            if *c != 0.0 {
                out += b.scale(*c);
            }
        }
        out
    }

    /// Observables `X_μ = Σ_i x_{μi} B_i` for an `n × d²` coefficient matrix.
    pub fn observables(&self, coeffs: &RMatrix) -> ObservableVector {
        let ops = (0..coeffs.nrows())
            .map(|mu| {
                let row: Vec<f64> = coeffs.row(mu).iter().copied().collect();
                self.combine(&row)
            })
            .collect();
        ObservableVector {
            ops,
            coeffs: Some(coeffs.clone()),
        }
    }

    /// Real coordinates `tr(B_i A)` of a Hermitian matrix.
    pub fn coordinates(&self, a: &CMatrix) -> Vec<f64> {
        self.mats
            .iter()
            .map(|b| linalg::trace_product(b, a).re)
            .collect()
    }
}

pub fn hermitian_basis(d: usize) -> Result<HermitianBasis> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("basis needs d >= 2, got {d}")));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = || CMatrix::from_element(d, d, ZERO);
    let mut mats = Vec::with_capacity(d * d);
    mats.push(linalg::identity(d).scale(1.0 / (d as f64).sqrt()));
    for j in 0..d {
        for k in j + 1..d {
            let mut m = zero();
            m[(j, k)] = C64::new(s, 0.0);
            m[(k, j)] = C64::new(s, 0.0);
            mats.push(m);
        }
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut m = zero();
            m[(j, k)] = C64::new(0.0, -s);
            m[(k, j)] = C64::new(0.0, s);
            mats.push(m);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut m = zero();
        for a in 0..l {
            m[(a, a)] = C64::new(norm, 0.0);
        }
        m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
        mats.push(m);
    }
    Ok(HermitianBasis { dim: d, mats })
}

/// `S_ij = tr(ρ B_i B_j)`.
pub fn gram_matrix(rho: &CMatrix, basis: &HermitianBasis) -> Result<CMatrix> {
    if rho.nrows() != basis.dim || rho.ncols() != basis.dim {
        return Err(Error::DimensionMismatch(format!(
            "rho is {}x{}, basis dimension is {}",
            rho.nrows(),
            rho.ncols(),
            basis.dim
        )));
    }
    let k = basis.len();
    let rho_b: Vec<CMatrix> = basis.mats.iter().map(|b| rho * b).collect();
    let mut s = CMatrix::from_element(k, k, ZERO);
    for i in 0..k {
        for j in i..k {
            let v = linalg::trace_product(&rho_b[i], &basis.mats[j]);
            s[(i, j)] = v;
            s[(j, i)] = v.conj();
        }
        s[(i, i)].im = 0.0;
    }
    Ok(s)
}

/// `R` with `S = R R†`, keeping eigenvalues above `rank_tol · λ_max`,
/// columns ordered by decreasing eigenvalue.
pub fn gram_factor(s: &CMatrix, rank_tol: f64) -> CMatrix {
    let (vals, vecs) = linalg::eigh(s);
    let hi = vals.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..vals.len())
        .rev()
        .filter(|&i| vals[i] > rank_tol * hi)
        .collect();
    let mut r = CMatrix::from_element(s.nrows(), keep.len(), ZERO);
    for (c, &i) in keep.iter().enumerate() {
        let root = vals[i].sqrt();
        for row in 0..s.nrows() {
            r[(row, c)] = vecs[(row, i)].scale(root);
        }
    }
    r
}

/// Variable layout of the assembled program: the upper triangle of the
/// `k × k` matrix `V` (row-major, `k(k+1)/2` entries) followed by `x`
/// (row-major, `n·d²` entries). `k = n` for full-rank costs and `k = rank G`
/// otherwise.
#[derive(Debug, Clone, Copy)]
pub struct HolevoLayout {
    pub n: usize,
    pub k: usize,
    pub basis_len: usize,
    pub rank: usize,
}

impl HolevoLayout {
    pub fn num_v(&self) -> usize {
        self.k * (self.k + 1) / 2
    }

    pub fn num_vars(&self) -> usize {
        self.num_v() + self.n * self.basis_len
    }

    pub fn block_size(&self) -> usize {
        self.k + self.rank
    }

    pub fn v_index(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * self.k - a * (a + 1) / 2 + b
    }

    pub fn x_index(&self, mu: usize, i: usize) -> usize {
        self.num_v() + mu * self.basis_len + i
    }

    /// Packs `(V, x)` into a variable vector.
    pub fn pack(&self, v: &RMatrix, x: &RMatrix) -> DVector<f64> {
        let mut out = DVector::zeros(self.num_vars());
        for a in 0..self.k {
            for b in a..self.k {
                out[self.v_index(a, b)] = v[(a, b)];
            }
        }
        for mu in 0..self.n {
            for i in 0..self.basis_len {
                out[self.x_index(mu, i)] = x[(mu, i)];
            }
        }
        out
    }

    pub fn unpack(&self, vars: &DVector<f64>) -> (RMatrix, RMatrix) {
        let v = RMatrix::from_fn(self.k, self.k, |a, b| vars[self.v_index(a, b)]);
        let x = RMatrix::from_fn(self.n, self.basis_len, |mu, i| vars[self.x_index(mu, i)]);
        (v, x)
    }
}

/// Coordinates in which the Schur block is posed: `(W, G_W)` with
/// `W = I, G_W = G` for full-rank `G`, and `W` the positive eigenvectors,
/// `G_W = diag(g_j)` otherwise.
///
/// Along the null space of `G` the variable `V` would be unconstrained, the
/// optimal set unbounded and the dual without interior, so a singular cost is
/// compressed to its range. `tr(G Re Z) + ||√G Im Z √G||₁` only depends on
/// `Wᵀ Z W` there.
pub fn cost_range(g: &CostMatrix) -> (RMatrix, RMatrix) {
    if g.rank == g.n {
        return (RMatrix::identity(g.n, g.n), g.g.clone());
    }
    let pairs = g.positive_eigenpairs();
    let cols: Vec<_> = pairs.iter().map(|(_, e)| e.clone()).collect();
    let w = RMatrix::from_columns(&cols);
    let gw = RMatrix::from_diagonal(&DVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|(v, _)| *v),
    ));
    (w, gw)
}

/// `t_{iν} = tr(B_i ∂_ν ρ)`; the constraints read `x t = I`.
pub fn constraint_matrix(m: &QuantumStatisticalModel, basis: &HermitianBasis) -> RMatrix {
    RMatrix::from_fn(basis.len(), m.n_params, |i, nu| {
        linalg::trace_product(&basis.mats[i], &m.drho[nu]).re
    })
}

/// Builds `min tr(G_W V)` s.t. `[[V, Wᵀ x R], [(Wᵀ x R)†, I_r]] ⪰ 0`, `x t = I`
/// with `(W, G_W)` from [`cost_range`]; for full-rank `G` this is
/// `min tr(G V)` s.t. `[[V, xR], [(xR)†, I_r]] ⪰ 0`.
pub fn assemble_holevo_lmi(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    basis: &HermitianBasis,
    r: &CMatrix,
) -> Result<(LmiProblem, HolevoLayout)> {
    check_cost(m, g)?;
    if basis.dim != m.dim || r.nrows() != basis.len() {
        return Err(Error::DimensionMismatch(format!(
            "basis of dimension {} with {} elements, gram factor with {} rows, model dimension {}",
            basis.dim,
            basis.len(),
            r.nrows(),
            m.dim
        )));
    }
    let n = m.n_params;
    let (w, gw) = cost_range(g);
    let k = w.ncols();
    let layout = HolevoLayout {
        n,
        k,
        basis_len: basis.len(),
        rank: r.ncols(),
    };
    let size = layout.block_size();
    let p = layout.num_vars();
    let zero = || CMatrix::from_element(size, size, ZERO);

    let mut b = DVector::zeros(p);
    let mut f = vec![zero(); p];
    for a in 0..k {
        for c in a..k {
            let idx = layout.v_index(a, c);
            if a == c {
                b[idx] = gw[(a, a)];
                f[idx][(a, a)] = ONE;
            } else {
                b[idx] = gw[(a, c)] + gw[(c, a)];
                f[idx][(a, c)] = ONE;
                f[idx][(c, a)] = ONE;
            }
        }
    }
    // top-right block Wᵀ x R
    for mu in 0..n {
        for i in 0..layout.basis_len {
            let mat = &mut f[layout.x_index(mu, i)];
            for a in 0..k {
                let wa = w[(mu, a)];
                if wa == 0.0 {
                    continue;
                }
                for col in 0..layout.rank {
                    let entry = r[(i, col)].scale(wa);
                    mat[(a, k + col)] = entry;
                    mat[(k + col, a)] = entry.conj();
                }
            }
        }
    }
    let mut f0 = zero();
    for col in 0..layout.rank {
        f0[(k + col, k + col)] = ONE;
    }

    let t = constraint_matrix(m, basis);
    let mut a_eq = RMatrix::zeros(n * n, p);
    let mut c_eq = DVector::zeros(n * n);
    for mu in 0..n {
        for nu in 0..n {
            let row = mu * n + nu;
            for i in 0..layout.basis_len {
                a_eq[(row, layout.x_index(mu, i))] = t[(i, nu)];
            }
            c_eq[row] = if mu == nu { 1.0 } else { 0.0 };
        }
    }
    Ok((LmiProblem { b, f0, f, a_eq, c_eq }, layout))
}

/// `tr Re Q(X) + ||Im Q(X)||₁` with `Q = √G Z(X) √G`, for any Hermitian `X`.
pub fn holevo_objective(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    x: &ObservableVector,
) -> Result<f64> {
    let q = helstrom::q_matrix(m, g, x)?;
    Ok(objective_from_q(&q))
}

pub(crate) fn objective_from_q(q: &CMatrix) -> f64 {
    let im = linalg::imag_part(q);
    let im = (&im - im.transpose()).scale(0.5);
    linalg::real_part(q).trace() + linalg::trace_norm_real(&im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HolevoStatus {
    /// Solver converged and the direct objective agrees with the optimum.
    Verified,
    /// Converged, but ρ is near-singular; the SDP value is reported unverified.
    UnverifiedSupport,
    /// Converged, but the certificate or feasibility check failed.
    CertificateMismatch,
    NotConverged,
    InfeasibleSuspected,
}

impl HolevoStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            HolevoStatus::Verified => "converged",
            HolevoStatus::UnverifiedSupport => "unverified_support",
            HolevoStatus::CertificateMismatch => "certificate_mismatch",
            HolevoStatus::NotConverged => "max_iter",
            HolevoStatus::InfeasibleSuspected => "infeasible_suspected",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, HolevoStatus::Verified | HolevoStatus::UnverifiedSupport)
    }
}

#[derive(Debug, Clone)]
pub struct HolevoResult {
    pub c_h: f64,
    pub x_opt: ObservableVector,
    /// Optimal `V` (`n × n`). For a singular cost only its compression to the
    /// range of `G` is determined and the null-space block is returned as zero.
    pub v_opt: RMatrix,
    /// Direct objective evaluated at `x_opt`.
    pub certificate: f64,
    pub feasibility: f64,
    pub solver: LmiSolution,
    pub status: HolevoStatus,
}

impl HolevoResult {
    pub fn certificate_gap(&self) -> f64 {
        (self.certificate - self.c_h).abs()
    }
}

/// Solves the Holevo program for `(m, G)` and certifies the optimum by
/// re-evaluating the objective at the reconstructed `X`.
pub fn holevo_bound(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    opts: &SolverOptions,
) -> Result<HolevoResult> {
    check_cost(m, g)?;
    let basis = hermitian_basis(m.dim)?;
    let s = gram_matrix(&m.rho, &basis)?;
    let r = gram_factor(&s, GRAM_RANK_TOL);
    let (mut prob, layout) = assemble_holevo_lmi(m, g, &basis, &r)?;

    // Solve in units of C_S: with V = s·V' and x = √s·x' the Schur block keeps
    // its form, only the equality right-hand side becomes I/√s, and the
    // optimum tr(G V') is O(1) so the solver tolerances act relatively.
    let s_unit = helstrom::helstrom_bound(m, g)
        .map(|h| h.c_s)
        .ok()
        .filter(|c| c.is_finite() && *c > 0.0)
        .unwrap_or(1.0);
    prob.c_eq.scale_mut(1.0 / s_unit.sqrt());
    let mut solver = sdp::solve_lmi(&prob, opts)?;
    let (v_scaled, x_scaled) = layout.unpack(&solver.v);
    let v_block = v_scaled.scale(s_unit);
    let x = x_scaled.scale(s_unit.sqrt());
    solver.v = layout.pack(&v_block, &x);
    let (w, _) = cost_range(g);
    let v_opt = &w * v_block * w.transpose();
    solver.objective *= s_unit;

    let x_opt = basis.observables(&x);
    let certificate = holevo_objective(m, g, &x_opt)?;
    let feasibility = helstrom::feasibility_residual(m, &x_opt)?;
    let c_h = solver.objective;

    let status = match solver.status {
        SolveStatus::MaxIter => HolevoStatus::NotConverged,
        SolveStatus::InfeasibleSuspected => HolevoStatus::InfeasibleSuspected,
        SolveStatus::Converged => {
            let gap_ok = (certificate - c_h).abs() <= CERTIFICATE_TOL * c_h.abs().max(1.0);
            if !gap_ok || feasibility > FEASIBILITY_TOL {
                HolevoStatus::CertificateMismatch
            } else if m.min_rho_eigenvalue() < NEAR_SINGULAR_RHO {
                HolevoStatus::UnverifiedSupport
            } else {
                HolevoStatus::Verified
            }
        }
    };
    Ok(HolevoResult {
        c_h,
        x_opt,
        v_opt,
        certificate,
        feasibility,
        solver,
        status,
    })
}

/// Yuen-Lax bound from the right logarithmic derivative information
/// `J_{μν} = tr(∂_ν ρ ρ⁻¹ ∂_μ ρ)`: with `K = J⁻¹`,
/// `C_R = tr(G Re K) + ||√G Im K √G||₁`.
pub fn rld_bound(m: &QuantumStatisticalModel, g: &CostMatrix) -> Result<f64> {
    check_cost(m, g)?;
    let (vals, vecs) = linalg::eigh(&m.rho);
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    if lo <= 1e-10 {
        return Err(Error::Singular(format!(
            "RLD bound needs full-rank rho (min eigenvalue {lo:e})"
        )));
    }
    let inv_diag = CMatrix::from_diagonal(&vals.map(|v| C64::new(1.0 / v, 0.0)));
    let rho_inv = &vecs * inv_diag * vecs.adjoint();
    let n = m.n_params;
    let mut j = CMatrix::from_element(n, n, ZERO);
    for mu in 0..n {
        let right = &rho_inv * &m.drho[mu];
        for nu in 0..n {
            j[(mu, nu)] = linalg::trace_product(&m.drho[nu], &right);
        }
    }
    let j = linalg::hermitize(&j);
    let (jv, jvec) = linalg::eigh(&j);
    let jlo = jv.iter().copied().fold(f64::INFINITY, f64::min);
    let jhi = jv.iter().copied().fold(0.0, f64::max);
    if !(jlo > 0.0) || jhi / jlo > helstrom::MAX_QFI_CONDITION {
        return Err(Error::Singular("RLD information matrix is singular".into()));
    }
    let k = &jvec * CMatrix::from_diagonal(&jv.map(|v| C64::new(1.0 / v, 0.0))) * jvec.adjoint();
    let k = linalg::hermitize(&k);
    let s = linalg::from_real(&g.sqrt_g);
    Ok(objective_from_q(&(&s * k * &s)))
}
