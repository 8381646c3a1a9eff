//! Symmetric logarithmic derivatives, the SLD quantum Fisher information and
//! the Helstrom bound `C_S = tr(G F⁻¹)` with its minimizer `X^S = F⁻¹ L`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, ZERO};
use crate::model::{CostMatrix, QuantumStatisticalModel};

const SUPPORT_TOL: f64 = 1e-12;
const OBSTRUCTION_TOL: f64 = 1e-10;
/// Largest condition number of `F` accepted before inversion.
pub const MAX_QFI_CONDITION: f64 = 1e12;

/// A candidate `X = (X_1, …, X_n)` of Hermitian observables.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableVector {
    pub ops: Vec<CMatrix>,
    /// Coordinates over a Hermitian operator basis (`n × d²`), when known.
    pub coeffs: Option<RMatrix>,
}

impl ObservableVector {
    pub fn new(ops: Vec<CMatrix>) -> Self {
        Self { ops, coeffs: None }
    }

    pub fn n(&self) -> usize {
        self.ops.len()
    }
}

/// SLD quantum Fisher information and the SLDs it was built from.
#[derive(Debug, Clone)]
pub struct QfiMatrix {
    pub f: RMatrix,
    pub slds: Vec<CMatrix>,
}

/// Solves `ρ L + L ρ = 2 ∂ρ` entrywise in the eigenbasis of ρ.
///
/// Entries where `λ_a + λ_b` vanishes are set to zero when `∂ρ` also vanishes
/// there and reported as [`Error::SupportObstruction`] otherwise.
pub fn solve_sld(rho: &CMatrix, drho: &CMatrix) -> Result<CMatrix> {
    let d = rho.nrows();
    if rho.ncols() != d || drho.nrows() != d || drho.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "rho is {}x{}, drho is {}x{}",
            rho.nrows(),
            rho.ncols(),
            drho.nrows(),
            drho.ncols()
        )));
    }
    let (vals, vecs) = linalg::eigh(rho);
    let rotated = vecs.adjoint() * drho * &vecs;
    let mut sld = CMatrix::from_element(d, d, ZERO);
    for a in 0..d {
        for b in 0..d {
            let sum = vals[a] + vals[b];
            let entry = rotated[(a, b)];
            if sum < SUPPORT_TOL {
                if entry.norm() > OBSTRUCTION_TOL {
                    return Err(Error::SupportObstruction {
                        row: a,
                        col: b,
                        eig_sum: sum,
                        magnitude: entry.norm(),
                    });
                }
            } else {
                sld[(a, b)] = entry.scale(2.0 / sum);
            }
        }
    }
    Ok(linalg::hermitize(&(&vecs * sld * vecs.adjoint())))
}

/// `||ρ L + L ρ − 2 ∂ρ||_F`.
pub fn lyapunov_residual(rho: &CMatrix, drho: &CMatrix, sld: &CMatrix) -> f64 {
    linalg::frobenius(&(rho * sld + sld * rho - drho.scale(2.0)))
}

/// `F_{μν} = Re tr(ρ L_μ L_ν)`, stored exactly symmetric.
pub fn qfi_matrix(m: &QuantumStatisticalModel) -> Result<QfiMatrix> {
    let slds = m
        .drho
        .iter()
        .map(|dr| solve_sld(&m.rho, dr))
        .collect::<Result<Vec<_>>>()?;
    let rho_l: Vec<CMatrix> = slds.iter().map(|l| &m.rho * l).collect();
    let n = m.n_params;
    let mut f = RMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in mu..n {
            let v = linalg::trace_product(&rho_l[mu], &slds[nu]).re;
            f[(mu, nu)] = v;
            f[(nu, mu)] = v;
        }
    }
    Ok(QfiMatrix { f, slds })
}

#[derive(Debug, Clone)]
pub struct HelstromResult {
    pub c_s: f64,
    pub x_s: ObservableVector,
    pub qfi: QfiMatrix,
    pub f_inv: RMatrix,
}

/// `C_S = tr(G F⁻¹)`, attained by `X^S_μ = Σ_ν (F⁻¹)_{μν} L_ν`.
pub fn helstrom_bound(m: &QuantumStatisticalModel, g: &CostMatrix) -> Result<HelstromResult> {
    check_cost(m, g)?;
    let qfi = qfi_matrix(m)?;
    let f_inv = linalg::inverse_spd(&qfi.f, MAX_QFI_CONDITION).ok_or_else(|| {
        Error::Singular(format!(
            "quantum Fisher information is singular or has condition number above {MAX_QFI_CONDITION:e}"
        ))
    })?;
    let c_s = (&g.g * &f_inv).trace();
    let n = m.n_params;
    let ops = (0..n)
        .map(|mu| {
            let mut x = CMatrix::from_element(m.dim, m.dim, ZERO);
            for nu in 0..n {
                x += qfi.slds[nu].scale(f_inv[(mu, nu)]);
            }
            linalg::hermitize(&x)
        })
        .collect();
    Ok(HelstromResult {
        c_s,
        x_s: ObservableVector::new(ops),
        qfi,
        f_inv,
    })
}

pub(crate) fn check_cost(m: &QuantumStatisticalModel, g: &CostMatrix) -> Result<()> {
    if g.n != m.n_params {
        return Err(Error::DimensionMismatch(format!(
            "cost is {}x{} but the model has {} parameters",
            g.n, g.n, m.n_params
        )));
    }
    Ok(())
}

fn check_observables(m: &QuantumStatisticalModel, x: &ObservableVector) -> Result<()> {
    if x.n() != m.n_params {
        return Err(Error::DimensionMismatch(format!(
            "{} observables for {} parameters",
            x.n(),
            m.n_params
        )));
    }
    if let Some(op) = x.ops.iter().find(|op| op.nrows() != m.dim || op.ncols() != m.dim) {
        return Err(Error::DimensionMismatch(format!(
            "observable is {}x{}, model dimension is {}",
            op.nrows(),
            op.ncols(),
            m.dim
        )));
    }
    Ok(())
}

/// `Z_{μν}(X) = tr(ρ X_μ X_ν)`; Hermitian PSD for Hermitian `X`.
pub fn z_matrix(m: &QuantumStatisticalModel, x: &ObservableVector) -> Result<CMatrix> {
    check_observables(m, x)?;
    let n = x.n();
    let rho_x: Vec<CMatrix> = x.ops.iter().map(|op| &m.rho * op).collect();
    let mut z = CMatrix::from_element(n, n, ZERO);
    for mu in 0..n {
        for nu in mu..n {
            let v = linalg::trace_product(&rho_x[mu], &x.ops[nu]);
            z[(mu, nu)] = v;
            z[(nu, mu)] = v.conj();
        }
        z[(mu, mu)].im = 0.0;
    }
    Ok(z)
}

/// `Q(X) = √G Z(X) √G`.
pub fn q_matrix(
    m: &QuantumStatisticalModel,
    g: &CostMatrix,
    x: &ObservableVector,
) -> Result<CMatrix> {
    check_cost(m, g)?;
    let z = z_matrix(m, x)?;
    let s = linalg::from_real(&g.sqrt_g);
    Ok(&s * z * &s)
}

/// `max_{μν} |tr(X_μ ∂_ν ρ) − δ_{μν}|`.
pub fn feasibility_residual(m: &QuantumStatisticalModel, x: &ObservableVector) -> Result<f64> {
    check_observables(m, x)?;
    let mut worst = 0.0f64;
    for (mu, op) in x.ops.iter().enumerate() {
        for (nu, dr) in m.drho.iter().enumerate() {
            let target = if mu == nu { 1.0 } else { 0.0 };
            let v = linalg::trace_product(op, dr);
            worst = worst.max((v - linalg::C64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}
