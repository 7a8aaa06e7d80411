//! Stress-energy of a 2-form and the Einstein-Maxwell residuals
//! `Ric_0 + [F∘F]_0`, `dF` and `d⋆F`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{self, Orientation, TwoForm};
use crate::kahler::{self, HermitianType};
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::metric::{self, Curvature};
use crate::scalar::Scalar;
use crate::tolerances::{TOL_EINSTEIN, TOL_SOL, TOL_TRIVIAL_F};

/// `[F∘F]_0 = F g^-1 F - (1/4) tr_g(F g^-1 F) g`, the trace-free part of
/// `(F∘F)_ij = F_is g^st F_tj`.
pub fn stress_energy<T: Scalar>(g: &Mat4<T>, f: &TwoForm<T>) -> Result<Mat4<T>> {
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    Ok(stress_energy_with_inverse(g, &g_inv, f))
}

pub(crate) fn stress_energy_with_inverse<T: Scalar>(g: &Mat4<T>, g_inv: &Mat4<T>, f: &TwoForm<T>) -> Mat4<T> {
    let fm = f.to_matrix();
    let ff = linalg::mat_mul(&linalg::mat_mul(&fm, g_inv), &fm);
    let tr = metric::trace_g(&ff, g_inv);
    let quarter = T::half() * T::half();
    linalg::mat4_from_fn(|i, j| ff[i][j].clone() - quarter.clone() * tr.clone() * g[i][j].clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    NonEinsteinEM,
    EinsteinWithNullStress,
    NotASolution,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub sol: f64,
    pub einstein: f64,
    pub trivial_f: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sol: TOL_SOL,
            einstein: TOL_EINSTEIN,
            trivial_f: TOL_TRIVIAL_F,
        }
    }
}

impl Tolerances {
    pub fn with_sol(sol: f64) -> Self {
        Self {
            sol,
            einstein: sol,
            trivial_f: sol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportInput {
    pub algebra: String,
    pub algebra_params: BTreeMap<String, f64>,
    pub metric: Mat4<f64>,
    pub f_coeffs: TwoForm<f64>,
    pub orientation: Orientation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KahlerFit {
    pub kappa: f64,
    pub defect: f64,
}

/// Hermitian data attached to a report, built from `ω = sqrt(2) F+ / |F+|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HermitianReport {
    pub omega: TwoForm<f64>,
    pub kind: HermitianType,
    pub compatibility_defect: f64,
    pub d_omega: f64,
    pub nijenhuis: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho0: Option<TwoForm<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ricci_j_invariance_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<KahlerFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EMReport {
    pub r_em: f64,
    pub r_df: f64,
    pub r_dstar_f: f64,
    pub einstein: bool,
    pub trivial_f: bool,
    pub scalar_curvature: f64,
    pub ricci0_max: f64,
    pub stress_max: f64,
    pub f_norm: f64,
    pub classification: Classification,
    pub input: ReportInput,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<HermitianReport>,
}

impl EMReport {
    pub fn is_solution(&self, tol: f64) -> bool {
        self.r_em <= tol && self.r_df <= tol && self.r_dstar_f <= tol
    }
}

pub fn em_residual(alg: &LieAlgebra<f64>, g: &Mat4<f64>, o: Orientation, f: &TwoForm<f64>) -> Result<EMReport> {
    em_residual_with(alg, g, o, f, &Tolerances::default())
}

pub fn em_residual_with(
    alg: &LieAlgebra<f64>,
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    tol: &Tolerances,
) -> Result<EMReport> {
    let curv = Curvature::compute(alg, g)?;
    let stress = stress_energy_with_inverse(g, &curv.g_inv, f);
    let r_em = linalg::max_abs(&linalg::mat4_from_fn(|i, j| curv.traceless_ricci[i][j] + stress[i][j]));
    let r_df = alg.d_two_form(f).max_abs();
    let r_dstar_f = forms::is_coclosed(alg, g, o, f, tol.sol)?.max_abs;
    let ricci0_max = linalg::max_abs(&curv.traceless_ricci);
    let f_norm = forms::inner_product_with_inverse(&curv.g_inv, f, f).max(0.0).sqrt();
    let einstein = ricci0_max <= tol.einstein;
    let trivial_f = f_norm <= tol.trivial_f;
    let solved = r_em <= tol.sol && r_df <= tol.sol && r_dstar_f <= tol.sol;
    let classification = if !solved {
        Classification::NotASolution
    } else if einstein || trivial_f {
        Classification::EinsteinWithNullStress
    } else {
        Classification::NonEinsteinEM
    };
    let hermitian = hermitian_report(alg, g, o, f, tol)?;
    Ok(EMReport {
        r_em,
        r_df,
        r_dstar_f,
        einstein,
        trivial_f,
        scalar_curvature: curv.scalar,
        ricci0_max,
        stress_max: linalg::max_abs(&stress),
        f_norm,
        classification,
        input: ReportInput {
            algebra: alg.name.clone(),
            algebra_params: alg.params.clone(),
            metric: *g,
            f_coeffs: f.clone(),
            orientation: o,
        },
        hermitian,
    })
}

fn hermitian_report(
    alg: &LieAlgebra<f64>,
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    tol: &Tolerances,
) -> Result<Option<HermitianReport>> {
    let (plus, _) = forms::sd_asd_split(g, o, f)?;
    let n = forms::norm_sq(g, &plus)?.max(0.0).sqrt();
    if n <= tol.trivial_f {
        return Ok(None);
    }
    let omega = plus.scale(&(2f64.sqrt() / n));
    let diag = kahler::is_kahler(alg, g, &omega)?;
    let (rho0, inv, decomposition) = match kahler::ricci_form(alg, g, &omega) {
        Ok(rf) => {
            let fit = verify_kahler_decomposition(g, o, f, &omega, &rf.rho0).ok();
            (Some(rf.rho0), Some(rf.j_invariance_defect), fit)
        }
        Err(_) => (None, None, None),
    };
    Ok(Some(HermitianReport {
        omega,
        kind: diag.kind,
        compatibility_defect: diag.compatibility_defect,
        d_omega: diag.d_omega,
        nijenhuis: diag.nijenhuis,
        rho0,
        ricci_j_invariance_defect: inv,
        decomposition,
    }))
}

/// Real roots of `Σ c_k x^k` (coefficients in ascending order) from the
/// eigenvalues of the companion matrix, polished by Newton steps.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Vec::new();
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eval = |x: f64| coeffs[..=deg].iter().rev().fold(0.0, |acc, c| acc * x + c);
    let deriv = |x: f64| (1..=deg).rev().fold(0.0, |acc, k| acc * x + k as f64 * coeffs[k]);
    comp.complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..3 {
                let d = deriv(x);
                if d != 0.0 {
                    let step = eval(x) / d;
                    if step.is_finite() {
                        x -= step;
                    }
                }
            }
            x
        })
        .collect()
}

/// Best `κ` in `½ω ≈ F+/κ`, `ρ_0 ≈ κ F-` in the least-squares sense.
///
/// Stationary points of the objective are the real roots of
/// `2|F-|² κ⁴ - 2<ρ_0,F-> κ³ + <ω,F+> κ - 2|F+|² = 0`; positive roots are
/// preferred, and the returned defect is the objective at the chosen root.
pub fn verify_kahler_decomposition(
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    omega: &TwoForm<f64>,
    rho0: &TwoForm<f64>,
) -> Result<KahlerFit> {
    let (plus, minus) = forms::sd_asd_split(g, o, f)?;
    let ip = |a: &TwoForm<f64>, b: &TwoForm<f64>| forms::inner_product(g, a, b);
    let pp = ip(&plus, &plus)?;
    let mm = ip(&minus, &minus)?;
    let wp = ip(omega, &plus)?;
    let rm = ip(rho0, &minus)?;
    let ww = ip(omega, omega)?;
    let small = 1e-24;
    if pp <= small && ww > small {
        return Err(Error::NoAdmissibleKappa);
    }
    let objective = |k: f64| -> Result<f64> {
        let a = omega.scale(&0.5).sub(&plus.scale(&(1.0 / k)));
        let b = rho0.sub(&minus.scale(&k));
        Ok(ip(&a, &a)? + ip(&b, &b)?)
    };
    let mut candidates: Vec<f64> = if pp <= small {
        // only the anti-self-dual term depends on κ
        if mm <= small {
            vec![1.0]
        } else {
            vec![rm / mm]
        }
    } else {
        real_roots(&[-2.0 * pp, wp, 0.0, -2.0 * rm, 2.0 * mm])
    };
    candidates.retain(|k| k.is_finite() && *k != 0.0);
    if candidates.is_empty() {
        return Err(Error::NoAdmissibleKappa);
    }
    let any_positive = candidates.iter().any(|k| *k > 0.0);
    let mut best: Option<KahlerFit> = None;
    for k in candidates {
        if any_positive && k <= 0.0 {
            continue;
        }
        let d = objective(k)?;
        if best.as_ref().is_none_or(|b| d < b.defect) {
            best = Some(KahlerFit { kappa: k, defect: d });
        }
    }
    best.ok_or(Error::NoAdmissibleKappa)
}

/// Largest `|[F∘F]_0|` component; zero exactly when `F` is self-dual or
/// anti-self-dual.
pub fn stress_max(g: &Mat4<f64>, f: &TwoForm<f64>) -> Result<f64> {
    Ok(linalg::max_abs(&stress_energy(g, f)?))
}
