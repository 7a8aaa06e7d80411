//! Left-invariant metrics: Levi-Civita connection from the Koszul formula
//! and the curvature chain down to the trace-free Ricci tensor.
//!
//! Curvature sign convention:
//!
//! ```text
//! R(x, y, z, w) = -g(∇_x ∇_y z - ∇_y ∇_x z - ∇_[x,y] z, w)
//! ```
//!
//! With this sign `R(x, y, x, y) / |x ∧ y|^2` is the sectional curvature,
//! so the hyperbolic plane comes out negative, and
//! `Ric(x, y) = Σ_m R(x, f_m, y, f_m)` over a `g`-orthonormal frame.

use serde::Serialize;

use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::scalar::{zero, Scalar};
use crate::tolerances::EPS_PD;

/// `gamma[i][j][k] = Γ^k_ij` with `∇_{e_i} e_j = Σ_k Γ^k_ij e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection<T = f64> {
    pub gamma: [[[T; 4]; 4]; 4],
}

pub type Riemann<T> = [[[[T; 4]; 4]; 4]; 4];

/// Koszul formula `2g(∇_x y, z) = g([x,y],z) + g([z,x],y) - g([y,z],x)`,
/// solved for each `(i, j)` against `g`.
pub fn levi_civita<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>) -> Result<Connection<T>> {
    let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
    Ok(levi_civita_with_inverse(alg, g, &g_inv))
}

fn lowered_brackets<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>) -> [[[T; 4]; 4]; 4] {
    // b[i][j][l] = g([e_i, e_j], e_l)
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|l| {
                (0..4).fold(zero::<T>(), |acc, k| {
                    acc + alg.constant(i, j, k).clone() * g[k][l].clone()
                })
            })
        })
    })
}

pub(crate) fn levi_civita_with_inverse<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>, g_inv: &Mat4<T>) -> Connection<T> {
    let b = lowered_brackets(alg, g);
    let half = T::half();
    let gamma = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let rhs: [T; 4] =
                std::array::from_fn(|l| (b[i][j][l].clone() + b[l][i][j].clone() - b[j][l][i].clone()) * half.clone());
            linalg::mat_vec(g_inv, &rhs)
        })
    });
    Connection { gamma }
}

impl<T: Scalar> Connection<T> {
    /// `∇_x y` for invariant fields with coefficient vectors `x`, `y`.
    pub fn covariant(&self, x: &[T; 4], y: &[T; 4]) -> [T; 4] {
        std::array::from_fn(|k| {
            let mut acc = zero::<T>();
            for i in 0..4 {
                for j in 0..4 {
                    acc = acc + x[i].clone() * y[j].clone() * self.gamma[i][j][k].clone();
                }
            }
            acc
        })
    }

    /// `max |g(∇_i e_j, e_k) + g(e_j, ∇_i e_k)|`.
    pub fn metricity_defect(&self, g: &Mat4<T>) -> f64 {
        let low = |i: usize, j: usize, k: usize| {
            (0..4).fold(zero::<T>(), |acc, m| {
                acc + self.gamma[i][j][m].clone() * g[m][k].clone()
            })
        };
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let v = (low(i, j, k) + low(i, k, j)).to_f64().abs();
                    worst = worst.max(v);
                }
            }
        }
        worst
    }

    /// `max |∇_i e_j - ∇_j e_i - [e_i, e_j]|`.
    pub fn torsion_defect(&self, alg: &LieAlgebra<T>) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let v = self.gamma[i][j][k].clone() - self.gamma[j][i][k].clone() - alg.constant(i, j, k).clone();
                    worst = worst.max(v.to_f64().abs());
                }
            }
        }
        worst
    }
}

/// Fully lowered curvature tensor `R[i][j][k][l] = R(e_i, e_j, e_k, e_l)`.
pub fn riemann<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>, conn: &Connection<T>) -> Riemann<T> {
    let gm = &conn.gamma;
    let mut out: Riemann<T> =
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zero()))));
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            for k in 0..4 {
                // v = ∇_i ∇_j e_k - ∇_j ∇_i e_k - ∇_[e_i,e_j] e_k
                let v: [T; 4] = std::array::from_fn(|n| {
                    let mut acc = zero::<T>();
                    for m in 0..4 {
                        acc = acc + gm[j][k][m].clone() * gm[i][m][n].clone()
                            - gm[i][k][m].clone() * gm[j][m][n].clone()
                            - alg.constant(i, j, m).clone() * gm[m][k][n].clone();
                    }
                    acc
                });
                for l in 0..4 {
                    let val = (0..4).fold(zero::<T>(), |acc, n| acc + v[n].clone() * g[n][l].clone());
                    out[i][j][k][l] = -val;
                }
            }
        }
    }
    out
}

/// `Ric_ab = Σ_mn R(e_a, e_m, e_b, e_n) g^mn`; exact for rational input.
pub fn ricci_from_riemann<T: Scalar>(r: &Riemann<T>, g_inv: &Mat4<T>) -> Mat4<T> {
    linalg::mat4_from_fn(|a, b| {
        let mut acc = zero::<T>();
        for m in 0..4 {
            for n in 0..4 {
                acc = acc + r[a][m][b][n].clone() * g_inv[m][n].clone();
            }
        }
        acc
    })
}

pub fn trace_g<T: Scalar>(t: &Mat4<T>, g_inv: &Mat4<T>) -> T {
    let mut acc = zero::<T>();
    for a in 0..4 {
        for b in 0..4 {
            acc = acc + t[a][b].clone() * g_inv[a][b].clone();
        }
    }
    acc
}

/// Everything in the curvature chain for one `(L, g)`.
#[derive(Clone, Debug)]
pub struct Curvature<T = f64> {
    pub g_inv: Mat4<T>,
    pub connection: Connection<T>,
    pub riemann: Riemann<T>,
    pub ricci: Mat4<T>,
    pub scalar: T,
    pub traceless_ricci: Mat4<T>,
}

impl<T: Scalar> Curvature<T> {
    pub fn compute(alg: &LieAlgebra<T>, g: &Mat4<T>) -> Result<Self> {
        let g_inv = linalg::inverse(g).ok_or(Error::Singular)?;
        let connection = levi_civita_with_inverse(alg, g, &g_inv);
        let riemann = riemann(alg, g, &connection);
        let ricci = ricci_from_riemann(&riemann, &g_inv);
        let scalar = trace_g(&ricci, &g_inv);
        let quarter = T::half() * T::half();
        let traceless_ricci =
            linalg::mat4_from_fn(|a, b| ricci[a][b].clone() - quarter.clone() * scalar.clone() * g[a][b].clone());
        Ok(Self {
            g_inv,
            connection,
            riemann,
            ricci,
            scalar,
            traceless_ricci,
        })
    }
}

pub fn ricci<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>) -> Result<Mat4<T>> {
    Ok(Curvature::compute(alg, g)?.ricci)
}

pub fn scalar_curvature<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>) -> Result<T> {
    Ok(Curvature::compute(alg, g)?.scalar)
}

/// `Ric_0 = Ric - (s/4) g`.
pub fn traceless_ricci<T: Scalar>(alg: &LieAlgebra<T>, g: &Mat4<T>) -> Result<Mat4<T>> {
    Ok(Curvature::compute(alg, g)?.traceless_ricci)
}

/// `max |Ric_0| <= tol`, componentwise in the basis `e_i`.
pub fn is_einstein(alg: &LieAlgebra<f64>, g: &Mat4<f64>, tol: f64) -> Result<bool> {
    Ok(linalg::max_abs(&traceless_ricci(alg, g)?) <= tol)
}

/// Ricci tensor computed by summing over a Gram-Schmidt orthonormal frame,
/// independent of the `g^-1` contraction used by [`Curvature`].
pub fn ricci_orthonormal(alg: &LieAlgebra<f64>, g: &Mat4<f64>) -> Result<Mat4<f64>> {
    let frame = linalg::gram_schmidt(g).ok_or(Error::NotPositiveDefinite)?;
    let conn = levi_civita(alg, g)?;
    let r = riemann(alg, g, &conn);
    let f: [[f64; 4]; 4] = std::array::from_fn(|m| std::array::from_fn(|k| frame[k][m]));
    Ok(linalg::mat4_from_fn(|a, b| {
        let mut acc = 0.0;
        for fm in &f {
            for p in 0..4 {
                for q in 0..4 {
                    acc += fm[p] * fm[q] * r[a][p][b][q];
                }
            }
        }
        acc
    }))
}

/// Sectional curvature of the plane spanned by `e_i`, `e_j` (0-based).
pub fn sectional_curvature(r: &Riemann<f64>, g: &Mat4<f64>, i: usize, j: usize) -> f64 {
    let area = g[i][i] * g[j][j] - g[i][j] * g[i][j];
    r[i][j][i][j] / area
}

/// Largest violation among the algebraic symmetries of `R`: antisymmetry in
/// each pair, pair exchange and the first Bianchi identity.
pub fn riemann_symmetry_defect(r: &Riemann<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    let x = r[i][j][k][l];
                    worst = worst
                        .max((x + r[j][i][k][l]).abs())
                        .max((x + r[i][j][l][k]).abs())
                        .max((x - r[k][l][i][j]).abs())
                        .max((x + r[j][k][i][l] + r[k][i][j][l]).abs());
                }
            }
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricValidation {
    pub valid: bool,
    pub positive_definite: bool,
    pub leading_minors: [f64; 4],
    /// `(constraint, value)` for every catalog constraint not exceeding the margin.
    pub violated: Vec<(String, f64)>,
    pub params: std::collections::BTreeMap<String, f64>,
}

/// Checks a metric against a catalog entry: the shape must match (literal
/// cells equal, repeated parameter cells consistent), the matrix must be
/// positive definite and every constraint polynomial must exceed [`EPS_PD`].
pub fn validate_metric(entry: &CatalogEntry, g: &Mat4<f64>) -> Result<MetricValidation> {
    let params = entry.metric_params_from_matrix(g)?;
    let minors = linalg::leading_minors(g);
    let positive_definite = minors.iter().all(|m| *m > 0.0);
    let mut violated = Vec::new();
    for c in &entry.metric_constraints {
        let v: f64 = c.eval(&params)?;
        if !(v > EPS_PD) {
            violated.push((c.source().to_string(), v));
        }
    }
    Ok(MetricValidation {
        valid: positive_definite && violated.is_empty(),
        positive_definite,
        leading_minors: minors,
        violated,
        params,
    })
}
