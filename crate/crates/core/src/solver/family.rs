use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::candidate::{self, Candidate};
use crate::catalog::Catalog;
use crate::error::{Error, Result};
use crate::forms::{Orientation, TwoForm};
use crate::kahler::{self, HermitianType};
use crate::maxwell::{self, Classification, Tolerances};

/// The four closed-form solution families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "2A2")]
    TwoA2,
    #[serde(rename = "A2+2A1")]
    A2Plus2A1,
    #[serde(rename = "A46a0")]
    A46a0,
    #[serde(rename = "A49half")]
    A49Half,
}

impl FamilyId {
    pub const ALL: [FamilyId; 4] = [Self::TwoA2, Self::A2Plus2A1, Self::A46a0, Self::A49Half];

    pub fn entry(self) -> &'static str {
        match self {
            Self::TwoA2 => "2A2",
            Self::A2Plus2A1 => "A2+2A1",
            Self::A46a0 => "A46a0",
            Self::A49Half => "A49half",
        }
    }

    /// Grid variables in the order they are iterated.
    pub fn grid_names(self) -> &'static [&'static str] {
        match self {
            Self::TwoA2 => &["a12", "a34"],
            Self::A2Plus2A1 => &["a12"],
            Self::A46a0 => &["a", "a14"],
            Self::A49Half => &["a24"],
        }
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.entry())
    }
}

impl FromStr for FamilyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.entry() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown family `{s}` (expected 2A2, A2+2A1, A46a0 or A49half)")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub values: BTreeMap<String, Vec<f64>>,
    #[serde(default = "positive")]
    pub orientation: Orientation,
}

fn positive() -> Orientation {
    Orientation::Positive
}

impl GridSpec {
    pub fn default_for(family: FamilyId) -> Self {
        let half = 0.5;
        let values: Vec<(&str, Vec<f64>)> = match family {
            FamilyId::TwoA2 => vec![
                ("a12", vec![0.0, half, 1.0, 2.0]),
                ("a34", vec![half, 1.0, 3f64.sqrt(), 3.0]),
            ],
            FamilyId::A2Plus2A1 => vec![("a12", vec![0.0, half, 1.0, 2.0])],
            FamilyId::A46a0 => vec![("a", vec![half, 1.0, 2.0]), ("a14", vec![0.0, 1.0])],
            FamilyId::A49Half => vec![("a24", vec![0.0, half, 1.0, 2.0])],
        };
        Self {
            values: values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            orientation: Orientation::Positive,
        }
    }

    /// Overrides single variables from `name=v1,v2,...` fragments.
    pub fn with_override(mut self, family: FamilyId, spec: &str) -> Result<Self> {
        let (name, list) = spec
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("grid fragment `{spec}` is not name=v1,v2,...")))?;
        let name = name.trim();
        if !family.grid_names().contains(&name) {
            return Err(Error::UnknownParameter {
                name: name.to_string(),
                context: format!("grid of family {family}"),
            });
        }
        let vals = list
            .split(',')
            .map(|v| {
                let e = crate::expr::Expr::parse(v.trim())?;
                e.constant::<f64>()
            })
            .collect::<Result<Vec<f64>>>()?;
        self.values.insert(name.to_string(), vals);
        Ok(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyPoint {
    pub grid: BTreeMap<String, f64>,
    pub candidate: Candidate,
    /// `max |residual_vector|`.
    pub residual: f64,
    pub classification: Classification,
    pub omega: TwoForm<f64>,
    pub hermitian: HermitianType,
    pub expected_hermitian: HermitianType,
    pub rho0: TwoForm<f64>,
    pub kappa: f64,
    pub expected_kappa: f64,
    pub decomposition_defect: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: FamilyId,
    pub orientation: Orientation,
    pub points: Vec<FamilyPoint>,
    /// Grid points on the excluded Einstein locus.
    pub skipped: Vec<BTreeMap<String, f64>>,
    pub max_residual: f64,
    pub all_ok: bool,
}

pub const FAMILY_TOL: f64 = 1e-10;

struct Point {
    candidate: Candidate,
    omega: TwoForm<f64>,
    kind: HermitianType,
    kappa: f64,
}

fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn f_from(pairs: &[(&str, f64)]) -> TwoForm<f64> {
    let mut f = TwoForm::zero();
    for (n, v) in pairs {
        f.a[candidate::coeff_index(n).expect("coefficient name")] = *v;
    }
    f
}

/// Closed-form member of the family at one grid point; `None` on the
/// excluded Einstein locus.
fn instantiate(family: FamilyId, o: Orientation, p: &BTreeMap<String, f64>) -> Result<Option<Point>> {
    let get = |n: &str| {
        p.get(n).copied().ok_or_else(|| Error::UnknownParameter {
            name: n.to_string(),
            context: format!("grid point of {family}"),
        })
    };
    if family != FamilyId::A49Half && o != Orientation::Positive {
        return Err(Error::Invalid(format!(
            "family {family} is stated for the positive orientation"
        )));
    }
    let entry = family.entry().to_string();
    let point = match family {
        FamilyId::TwoA2 => {
            let (a12, a34) = (get("a12")?, get("a34")?);
            let a5 = (1.0 + a34 * a34) / (1.0 + a12 * a12);
            if (a5 - 1.0).abs() <= 1e-12 {
                return Ok(None);
            }
            Point {
                candidate: Candidate {
                    entry,
                    algebra_params: BTreeMap::new(),
                    metric_params: map(&[("a1", 0.0), ("a2", 0.0), ("a3", 0.0), ("a4", 0.0), ("a5", a5)]),
                    f_coeffs: f_from(&[("a12", a12), ("a34", a34)]),
                    orientation: o,
                },
                omega: f_from(&[("a12", 1.0), ("a34", a5.sqrt())]),
                kind: HermitianType::Kahler,
                kappa: a34 / a5.sqrt() + a12,
            }
        }
        FamilyId::A2Plus2A1 => {
            let a12 = get("a12")?;
            let a34 = (1.0 + a12 * a12).sqrt();
            Point {
                candidate: Candidate {
                    entry,
                    algebra_params: BTreeMap::new(),
                    metric_params: map(&[("a1", 0.0), ("a2", 0.0)]),
                    f_coeffs: f_from(&[("a12", a12), ("a34", a34)]),
                    orientation: o,
                },
                omega: f_from(&[("a12", 1.0), ("a34", 1.0)]),
                kind: HermitianType::Kahler,
                kappa: a12 + a34,
            }
        }
        FamilyId::A46a0 => {
            let (a, a14) = (get("a")?, get("a14")?);
            let a23 = (a * a + a14 * a14).sqrt();
            Point {
                candidate: Candidate {
                    entry,
                    algebra_params: map(&[("a", a)]),
                    metric_params: map(&[("a1", 0.0), ("a2", 0.0), ("a3", 1.0)]),
                    f_coeffs: f_from(&[("a14", a14), ("a23", a23)]),
                    orientation: o,
                },
                omega: f_from(&[("a14", 1.0), ("a23", 1.0)]),
                kind: HermitianType::Kahler,
                kappa: a14 + a23,
            }
        }
        FamilyId::A49Half => {
            let a24 = get("a24")?;
            let a13 = (1.5 + a24 * a24).sqrt();
            let positive = o == Orientation::Positive;
            Point {
                candidate: Candidate {
                    entry,
                    algebra_params: BTreeMap::new(),
                    metric_params: map(&[("a1", 1.0), ("a2", 0.0), ("a3", 0.0), ("a4", 0.0)]),
                    f_coeffs: f_from(&[("a13", a13), ("a24", a24)]),
                    orientation: o,
                },
                omega: f_from(&[("a13", 1.0), ("a24", if positive { -1.0 } else { 1.0 })]),
                kind: if positive {
                    HermitianType::AlmostKahlerNonIntegrable
                } else {
                    HermitianType::Kahler
                },
                kappa: if positive { 1.5 / (a13 + a24) } else { a13 + a24 },
            }
        }
    };
    Ok(Some(point))
}

fn grid_points(family: FamilyId, grid: &GridSpec) -> Result<Vec<BTreeMap<String, f64>>> {
    let mut points = vec![BTreeMap::new()];
    for name in family.grid_names() {
        let vals = grid.values.get(*name).ok_or_else(|| Error::UnknownParameter {
            name: name.to_string(),
            context: format!("grid of family {family} (missing)"),
        })?;
        points = points
            .into_iter()
            .flat_map(|p| {
                vals.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(name.to_string(), *v);
                    q
                })
            })
            .collect();
    }
    Ok(points)
}

/// Evaluates the closed-form family on a grid: residual, classification,
/// Hermitian type of the stated Kahler form, and the `κ` decomposition.
pub fn verify_family(catalog: &Catalog, family: FamilyId, grid: &GridSpec) -> Result<FamilyReport> {
    let entry = catalog.get(family.entry())?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for p in grid_points(family, grid)? {
        let Some(pt) = instantiate(family, grid.orientation, &p)? else {
            skipped.push(p);
            continue;
        };
        let inst = pt.candidate.instantiate_entry(entry)?;
        let r = candidate::residual_of(&inst.alg, &inst.g, inst.orientation, &inst.f)?;
        let residual = candidate::max_abs(&r);
        let report = maxwell::em_residual_with(&inst.alg, &inst.g, inst.orientation, &inst.f, &Tolerances::default())?;
        let hermitian = kahler::classify_hermitian_type(&inst.alg, &inst.g, &pt.omega)?;
        let rho0 = kahler::ricci_form(&inst.alg, &inst.g, &pt.omega)?.rho0;
        let fit = maxwell::verify_kahler_decomposition(&inst.g, inst.orientation, &inst.f, &pt.omega, &rho0)?;
        let ok = residual <= FAMILY_TOL
            && report.classification == Classification::NonEinsteinEM
            && hermitian == pt.kind
            && fit.defect <= FAMILY_TOL
            && (fit.kappa - pt.kappa).abs() <= FAMILY_TOL;
        points.push(FamilyPoint {
            grid: p,
            candidate: pt.candidate,
            residual,
            classification: report.classification,
            omega: pt.omega,
            hermitian,
            expected_hermitian: pt.kind,
            rho0,
            kappa: fit.kappa,
            expected_kappa: pt.kappa,
            decomposition_defect: fit.defect,
            ok,
        });
    }
    let max_residual = points.iter().fold(0.0, |m: f64, p| m.max(p.residual));
    let all_ok = !points.is_empty() && points.iter().all(|p| p.ok);
    Ok(FamilyReport {
        family,
        orientation: grid.orientation,
        points,
        skipped,
        max_residual,
        all_ok,
    })
}
