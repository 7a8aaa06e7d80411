//! Almost-complex structures induced by a metric and a 2-form, their
//! integrability, and the Ricci form.
//!
//! `J` is defined by `ω(x, y) = g(Jx, y)`; as a matrix acting on
//! coefficient columns this is `J = g^-1 ω^T`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::TwoForm;
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::metric::Curvature;
use crate::tolerances::TOL_COMPAT;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Endomorphism {
    /// `j[k][i]` is the `e_k` component of `J e_i`.
    pub j: Mat4<f64>,
}

impl Endomorphism {
    pub fn apply(&self, x: &[f64; 4]) -> [f64; 4] {
        linalg::mat_vec(&self.j, x)
    }

    /// Image of the basis vector `e_i` (0-based).
    pub fn column(&self, i: usize) -> [f64; 4] {
        std::array::from_fn(|k| self.j[k][i])
    }

    /// `max |J^2 + 1|`.
    pub fn square_defect(&self) -> f64 {
        let sq = linalg::mat_mul(&self.j, &self.j);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for k in 0..4 {
                let want = if i == k { -1.0 } else { 0.0 };
                worst = worst.max((sq[i][k] - want).abs());
            }
        }
        worst
    }
}

pub fn endomorphism_from_form(g: &Mat4<f64>, omega: &TwoForm<f64>) -> Result<Endomorphism> {
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    let wt = linalg::transpose(&omega.to_matrix());
    Ok(Endomorphism {
        j: linalg::mat_mul(&g_inv, &wt),
    })
}

/// Largest of `|J^2 + 1|` and `|g(J., J.) - g|`.
pub fn compatibility_defect(g: &Mat4<f64>, omega: &TwoForm<f64>) -> Result<f64> {
    let j = endomorphism_from_form(g, omega)?;
    let jt = linalg::transpose(&j.j);
    let pulled = linalg::mat_mul(&linalg::mat_mul(&jt, g), &j.j);
    let mut iso = 0.0f64;
    for i in 0..4 {
        for k in 0..4 {
            iso = iso.max((pulled[i][k] - g[i][k]).abs());
        }
    }
    Ok(j.square_defect().max(iso))
}

pub fn is_compatible(g: &Mat4<f64>, omega: &TwoForm<f64>) -> bool {
    compatibility_defect(g, omega).is_ok_and(|d| d <= TOL_COMPAT)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Nijenhuis {
    pub max_abs: f64,
    /// `tensor[i][j] = N(e_i, e_j)`.
    pub tensor: [[[f64; 4]; 4]; 4],
}

/// `N(x, y) = [Jx, Jy] - J[Jx, y] - J[x, Jy] - [x, y]` on all basis pairs.
pub fn nijenhuis(alg: &LieAlgebra<f64>, j: &Endomorphism) -> Nijenhuis {
    let mut tensor = [[[0.0; 4]; 4]; 4];
    let mut max_abs = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            let mut x = [0.0; 4];
            x[a] = 1.0;
            let mut y = [0.0; 4];
            y[b] = 1.0;
            let jx = j.apply(&x);
            let jy = j.apply(&y);
            let t1 = alg.bracket(&jx, &jy);
            let t2 = j.apply(&alg.bracket(&jx, &y));
            let t3 = j.apply(&alg.bracket(&x, &jy));
            let t4 = alg.bracket(&x, &y);
            for k in 0..4 {
                let v = t1[k] - t2[k] - t3[k] - t4[k];
                tensor[a][b][k] = v;
                max_abs = max_abs.max(v.abs());
            }
        }
    }
    Nijenhuis { max_abs, tensor }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HermitianType {
    Kahler,
    AlmostKahlerNonIntegrable,
    NotCompatible,
    NotClosed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianDiagnostics {
    pub kind: HermitianType,
    pub compatibility_defect: f64,
    pub d_omega: f64,
    pub nijenhuis: f64,
}

pub fn is_kahler(alg: &LieAlgebra<f64>, g: &Mat4<f64>, omega: &TwoForm<f64>) -> Result<HermitianDiagnostics> {
    let compat = compatibility_defect(g, omega)?;
    let d_omega = alg.d_two_form(omega).max_abs();
    let nij = nijenhuis(alg, &endomorphism_from_form(g, omega)?).max_abs;
    let kind = if compat > TOL_COMPAT {
        HermitianType::NotCompatible
    } else if d_omega > TOL_COMPAT {
        HermitianType::NotClosed
    } else if nij > TOL_COMPAT {
        HermitianType::AlmostKahlerNonIntegrable
    } else {
        HermitianType::Kahler
    };
    Ok(HermitianDiagnostics {
        kind,
        compatibility_defect: compat,
        d_omega,
        nijenhuis: nij,
    })
}

pub fn classify_hermitian_type(alg: &LieAlgebra<f64>, g: &Mat4<f64>, omega: &TwoForm<f64>) -> Result<HermitianType> {
    Ok(is_kahler(alg, g, omega)?.kind)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RicciForm {
    /// `ρ_0(x, y) = Ric_0(Jx, y)`.
    pub rho0: TwoForm<f64>,
    /// `ρ(x, y) = Ric(Jx, y) = ρ_0 + (s/4) ω`.
    pub rho: TwoForm<f64>,
    /// `max |Ric(J., J.) - Ric|`.
    pub j_invariance_defect: f64,
    pub scalar_curvature: f64,
}

fn antisymmetric_part(m: &Mat4<f64>) -> TwoForm<f64> {
    TwoForm::from_matrix(&linalg::mat4_from_fn(|i, j| 0.5 * (m[i][j] - m[j][i])))
}

pub fn ricci_form(alg: &LieAlgebra<f64>, g: &Mat4<f64>, omega: &TwoForm<f64>) -> Result<RicciForm> {
    let defect = compatibility_defect(g, omega)?;
    if defect > TOL_COMPAT {
        return Err(Error::Incompatible(defect));
    }
    let j = endomorphism_from_form(g, omega)?;
    let curv = Curvature::compute(alg, g)?;
    let jt = linalg::transpose(&j.j);
    let rho0 = antisymmetric_part(&linalg::mat_mul(&jt, &curv.traceless_ricci));
    let rho = antisymmetric_part(&linalg::mat_mul(&jt, &curv.ricci));
    let pulled = linalg::mat_mul(&linalg::mat_mul(&jt, &curv.ricci), &j.j);
    let mut inv = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            inv = inv.max((pulled[a][b] - curv.ricci[a][b]).abs());
        }
    }
    Ok(RicciForm {
        rho0,
        rho,
        j_invariance_defect: inv,
        scalar_curvature: curv.scalar,
    })
}
