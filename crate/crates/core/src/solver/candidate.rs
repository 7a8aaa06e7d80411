use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, CatalogEntry};
use crate::error::{Error, Result};
use crate::forms::{self, Orientation, TwoForm};
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::maxwell::{self, EMReport, Tolerances};
use crate::metric::Curvature;
use crate::tolerances::EPS_PD;

/// One point of the search space for a catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub entry: String,
    #[serde(default)]
    pub algebra_params: BTreeMap<String, f64>,
    #[serde(default)]
    pub metric_params: BTreeMap<String, f64>,
    pub f_coeffs: TwoForm<f64>,
    #[serde(default = "positive")]
    pub orientation: Orientation,
}

fn positive() -> Orientation {
    Orientation::Positive
}

/// A candidate resolved against the catalog: concrete algebra and metric.
#[derive(Clone, Debug)]
pub struct Instance {
    pub alg: LieAlgebra<f64>,
    pub g: Mat4<f64>,
    pub f: TwoForm<f64>,
    pub orientation: Orientation,
}

/// Checks every constraint with margin and positive definiteness.
pub fn check_metric(entry: &CatalogEntry, params: &BTreeMap<String, f64>) -> Result<Mat4<f64>> {
    for c in &entry.metric_constraints {
        let v: f64 = c.eval(params)?;
        if !(v > EPS_PD) {
            return Err(Error::ConstraintViolated {
                constraint: c.source().to_string(),
                value: v,
            });
        }
    }
    let g = entry.metric(params)?;
    if !linalg::leading_minors(&g).iter().all(|m| *m > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(g)
}

impl Candidate {
    pub fn instantiate(&self, catalog: &Catalog) -> Result<Instance> {
        let entry = catalog.get(&self.entry)?;
        self.instantiate_entry(entry)
    }

    pub fn instantiate_entry(&self, entry: &CatalogEntry) -> Result<Instance> {
        if entry.name != self.entry {
            return Err(Error::Invalid(format!(
                "candidate for `{}` used with entry `{}`",
                self.entry, entry.name
            )));
        }
        if self.f_coeffs.a.iter().any(|x| !x.is_finite()) || self.metric_params.values().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite candidate value".into()));
        }
        let alg = entry.algebra(&self.algebra_params)?;
        let g = check_metric(entry, &self.metric_params)?;
        Ok(Instance {
            alg,
            g,
            f: self.f_coeffs.clone(),
            orientation: self.orientation,
        })
    }

    pub fn report(&self, catalog: &Catalog, tol: &Tolerances) -> Result<EMReport> {
        let inst = self.instantiate(catalog)?;
        maxwell::em_residual_with(&inst.alg, &inst.g, inst.orientation, &inst.f, tol)
    }

    /// The same point with `F` replaced by `-F`.
    pub fn sign_flipped(&self) -> Self {
        let mut c = self.clone();
        c.f_coeffs = c.f_coeffs.scale(&-1.0);
        c
    }

    /// Copy whose `F` has its first non-negligible coefficient positive.
    pub fn canonical_sign(&self) -> Self {
        match self.f_coeffs.a.iter().find(|x| x.abs() > 1e-8) {
            Some(x) if *x < 0.0 => self.sign_flipped(),
            _ => self.clone(),
        }
    }

    /// Algebra parameters, metric parameters and `F`, concatenated in a
    /// fixed order for distance comparisons.
    pub fn flat_params(&self) -> Vec<f64> {
        self.algebra_params
            .values()
            .chain(self.metric_params.values())
            .chain(self.f_coeffs.a.iter())
            .copied()
            .collect()
    }
}

pub const RESIDUAL_LEN: usize = 18;

fn push_blocks(
    out: &mut Vec<f64>,
    alg: &LieAlgebra<f64>,
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    curv: &Curvature<f64>,
) -> Result<()> {
    let stress = maxwell::stress_energy_with_inverse(g, &curv.g_inv, f);
    for i in 0..4 {
        for j in i..4 {
            out.push(curv.traceless_ricci[i][j] + stress[i][j]);
        }
    }
    out.extend(alg.d_two_form(f).a);
    let star = forms::hodge_star(g, o, f)?;
    out.extend(alg.d_two_form(&star).a);
    Ok(())
}

/// The 18 stacked residuals: upper triangle of `Ric_0 + [F∘F]_0` (row
/// major), then the four coefficients of `dF` and of `d⋆F`.
pub fn residual_of(alg: &LieAlgebra<f64>, g: &Mat4<f64>, o: Orientation, f: &TwoForm<f64>) -> Result<Vec<f64>> {
    let curv = Curvature::compute(alg, g)?;
    let mut out = Vec::with_capacity(RESIDUAL_LEN + 1);
    push_blocks(&mut out, alg, g, o, f, &curv)?;
    Ok(out)
}

pub fn residual_vector(catalog: &Catalog, c: &Candidate) -> Result<Vec<f64>> {
    let inst = c.instantiate(catalog)?;
    residual_of(&inst.alg, &inst.g, inst.orientation, &inst.f)
}

/// Structure constants in the Gram-Schmidt frame `f_a = Σ_k P[k][a] e_k`.
fn orthonormal_algebra(alg: &LieAlgebra<f64>, p: &Mat4<f64>, p_inv: &Mat4<f64>) -> LieAlgebra<f64> {
    let mut triples = Vec::new();
    for a in 0..4 {
        for b in (a + 1)..4 {
            let x: [f64; 4] = std::array::from_fn(|k| p[k][a]);
            let y: [f64; 4] = std::array::from_fn(|k| p[k][b]);
            let v = linalg::mat_vec(p_inv, &alg.bracket(&x, &y));
            for (c, val) in v.iter().enumerate() {
                if *val != 0.0 {
                    triples.push((a + 1, b + 1, c + 1, *val));
                }
            }
        }
    }
    LieAlgebra::from_brackets(&alg.name, &triples).expect("indices in range")
}

/// Residual in a `g`-orthonormal frame, divided by the curvature scale
/// `N = Σ (ĉ^c_ab)^2` of the orthonormal structure constants.
///
/// The result does not change under automorphisms of the algebra or under
/// `(g, F) -> (λ g, sqrt(λ) F)`, so degenerate directions of the metric
/// cannot drive it to zero. With `unit` the row `|F|^2_g / N - 1` is
/// appended.
pub fn normalized_residual(
    alg: &LieAlgebra<f64>,
    g: &Mat4<f64>,
    o: Orientation,
    f: &TwoForm<f64>,
    unit: bool,
) -> Result<Vec<f64>> {
    let p = linalg::gram_schmidt(g).ok_or(Error::NotPositiveDefinite)?;
    let p_inv = linalg::inverse(&p).ok_or(Error::Singular)?;
    let hat = orthonormal_algebra(alg, &p, &p_inv);
    let mut n = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            for c in 0..4 {
                n += hat.constant(a, b, c).powi(2);
            }
        }
    }
    if n == 0.0 {
        n = 1.0;
    }
    let fm = f.to_matrix();
    let f_hat = TwoForm::from_matrix(&linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&p), &fm), &p));
    let id = linalg::identity();
    let curv = Curvature::compute(&hat, &id)?;
    let mut out = Vec::with_capacity(RESIDUAL_LEN + 1);
    push_blocks(&mut out, &hat, &id, o, &f_hat, &curv)?;
    for x in out.iter_mut() {
        *x /= n;
    }
    if unit {
        let norm: f64 = f_hat.a.iter().map(|x| x * x).sum();
        out.push(norm / n - 1.0);
    }
    Ok(out)
}

/// `|F|^2_g - 1`, the normalization row of the raw residual.
pub fn unit_row(g: &Mat4<f64>, f: &TwoForm<f64>) -> Result<f64> {
    Ok(forms::norm_sq(g, f)? - 1.0)
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Names of the six 2-form coefficients, for freezing and reporting.
pub fn coeff_index(name: &str) -> Option<usize> {
    forms::COEFF_NAMES.iter().position(|n| *n == name)
}
