//! The catalog of four-dimensional Lie algebras, their reduced metric
//! shapes and the expected outcome for each.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::expr::{Expr, Range};
use crate::lie_algebra::LieAlgebra;
use crate::linalg::{self, Mat4};
use crate::scalar::{Rational, Scalar};

pub const BUILTIN_CATALOG: &str = include_str!("../data/catalog.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    HasNonEinsteinEM,
    EinsteinOnly,
    NoSolution,
    Flat,
}

impl Verdict {
    pub fn admits_non_einstein(self) -> bool {
        self == Verdict::HasNonEinsteinEM
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::HasNonEinsteinEM => "HasNonEinsteinEM",
            Verdict::EinsteinOnly => "EinsteinOnly",
            Verdict::NoSolution => "NoSolution",
            Verdict::Flat => "Flat",
        };
        f.write_str(s)
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HasNonEinsteinEM" => Ok(Verdict::HasNonEinsteinEM),
            "EinsteinOnly" => Ok(Verdict::EinsteinOnly),
            "NoSolution" => Ok(Verdict::NoSolution),
            "Flat" => Ok(Verdict::Flat),
            other => Err(Error::Invalid(format!("unknown verdict `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    /// `(k, coefficient)` pairs for `[e_i, e_j] = Σ coefficient e_k`.
    pub coeffs: Vec<(usize, Expr)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub range: Range,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub values: BTreeMap<String, Expr>,
    /// Dimension of the space of closed invariant 2-forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_dim: Option<usize>,
    /// A degenerate limit outside the admissible parameter range.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub limit: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Family {
    /// Polynomial in metric parameters, algebra parameters and the 2-form
    /// coefficients `a12, ..., a34` that vanishes on the solution family.
    pub relation: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Literal(Rational),
    Param(String),
}

impl Serialize for Cell {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Literal(r) => s.serialize_str(&r.to_string()),
            Cell::Param(p) => s.serialize_str(p),
        }
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let e = Expr::deserialize(d)?;
        let vars = e.variables();
        if vars.is_empty() {
            let v: Rational = e.constant().map_err(serde::de::Error::custom)?;
            return Ok(Cell::Literal(v));
        }
        let name = vars.into_iter().next().unwrap_or_default();
        if e.source() != name {
            return Err(serde::de::Error::custom(format!(
                "metric cell `{}` must be a literal or a bare parameter",
                e.source()
            )));
        }
        Ok(Cell::Param(name))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub display: String,
    pub brackets: Vec<BracketSpec>,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
    pub variants: Vec<Variant>,
    pub metric_shape: Vec<Cell>,
    #[serde(rename = "constraints")]
    pub metric_constraints: Vec<Expr>,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Document {
    version: u32,
    entries: Vec<CatalogEntry>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
    /// Hex SHA-256 of the source document.
    pub checksum: String,
}

pub fn checksum(source: &str) -> String {
    hex::encode(Sha256::digest(source.as_bytes()))
}

/// Parses and validates a catalog document.
///
/// Every entry must have a symmetric 16-cell shape, constraints that only
/// mention shape parameters, and brackets satisfying the Jacobi identity
/// exactly at each variant.
pub fn load_catalog(source: &str) -> Result<Catalog> {
    let doc: Document = serde_json::from_str(source)?;
    let mut seen = BTreeSet::new();
    for entry in &doc.entries {
        if !seen.insert(entry.name.clone()) {
            return Err(Error::Catalog(format!("duplicate entry `{}`", entry.name)));
        }
        entry.validate()?;
    }
    Ok(Catalog {
        version: doc.version,
        entries: doc.entries,
        checksum: checksum(source),
    })
}

impl Catalog {
    pub fn builtin() -> Self {
        load_catalog(BUILTIN_CATALOG).expect("bundled catalog is valid")
    }

    pub fn get(&self, name: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::UnknownEntry(name.to_string()))
    }

    pub fn theorem_entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(|e| e.verdict.admits_non_einstein())
    }
}

impl CatalogEntry {
    fn validate(&self) -> Result<()> {
        let ctx = |m: String| Error::Catalog(format!("{}: {m}", self.name));
        if self.metric_shape.len() != 16 {
            return Err(ctx(format!("metric_shape has {} cells", self.metric_shape.len())));
        }
        for i in 0..4 {
            for j in 0..i {
                if self.cell(i, j) != self.cell(j, i) {
                    return Err(ctx(format!("metric_shape not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        let metric_names: BTreeSet<String> = self.metric_param_names().into_iter().collect();
        for c in &self.metric_constraints {
            for v in c.variables() {
                if !metric_names.contains(&v) {
                    return Err(Error::UnknownParameter {
                        name: v,
                        context: format!("constraint `{}` of {}", c.source(), self.name),
                    });
                }
            }
        }
        let algebra_names: BTreeSet<String> = self.params.iter().map(|p| p.name.clone()).collect();
        for b in &self.brackets {
            if b.i == 0 || b.j == 0 || b.i > 4 || b.j > 4 || b.i == b.j {
                return Err(ctx(format!("bad bracket indices ({}, {})", b.i, b.j)));
            }
            for (k, e) in &b.coeffs {
                if *k == 0 || *k > 4 {
                    return Err(ctx(format!("bad bracket target {k}")));
                }
                for v in e.variables() {
                    if !algebra_names.contains(&v) {
                        return Err(Error::UnknownParameter {
                            name: v,
                            context: format!("bracket of {}", self.name),
                        });
                    }
                }
            }
        }
        for p in &self.params {
            for v in p.range.variables() {
                if !algebra_names.contains(&v) {
                    return Err(Error::UnknownParameter {
                        name: v,
                        context: format!("range of {}", self.name),
                    });
                }
            }
        }
        if self.variants.is_empty() {
            return Err(ctx("no variants".into()));
        }
        for v in &self.variants {
            let values = self.variant_values::<Rational>(v)?;
            let alg = if v.limit {
                self.algebra_unchecked(&values)?
            } else {
                self.algebra(&values)?
            };
            if !alg.is_lie_algebra() {
                return Err(Error::Jacobi {
                    name: format!("{} ({})", self.name, v.name),
                    defect: alg.jacobi_defect().to_f64(),
                });
            }
        }
        if let Some(f) = &self.family {
            let mut allowed = metric_names.clone();
            allowed.extend(algebra_names.iter().cloned());
            allowed.extend(crate::forms::COEFF_NAMES.iter().map(|s| s.to_string()));
            for v in f.relation.variables() {
                if !allowed.contains(&v) {
                    return Err(Error::UnknownParameter {
                        name: v,
                        context: format!("family relation of {}", self.name),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.metric_shape[4 * i + j]
    }

    /// Free metric parameters in order of first appearance (row major).
    pub fn metric_param_names(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.metric_shape {
            if let Cell::Param(p) = c {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        }
        out
    }

    pub fn algebra_param_names(&self) -> Vec<String> {
        self.params.iter().map(|p| p.name.clone()).collect()
    }

    pub fn variant(&self, name: &str) -> Result<&Variant> {
        self.variants
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::Invalid(format!("{} has no variant `{name}`", self.name)))
    }

    /// Admissible variants, skipping degenerate limits.
    pub fn regular_variants(&self) -> impl Iterator<Item = &Variant> {
        self.variants.iter().filter(|v| !v.limit)
    }

    pub fn variant_values<T: Scalar>(&self, v: &Variant) -> Result<BTreeMap<String, T>> {
        let mut out = BTreeMap::new();
        for p in &self.params {
            let e = v
                .values
                .get(&p.name)
                .ok_or_else(|| Error::Catalog(format!("{}: variant `{}` misses `{}`", self.name, v.name, p.name)))?;
            out.insert(p.name.clone(), e.constant::<T>()?);
        }
        for k in v.values.keys() {
            if !out.contains_key(k) {
                return Err(Error::UnknownParameter {
                    name: k.clone(),
                    context: format!("variant `{}` of {}", v.name, self.name),
                });
            }
        }
        Ok(out)
    }

    pub fn check_algebra_params<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<()> {
        for p in &self.params {
            let v = values.get(&p.name).ok_or_else(|| Error::UnknownParameter {
                name: p.name.clone(),
                context: format!("algebra parameters of {}", self.name),
            })?;
            if !p.range.contains(values)? {
                return Err(Error::ParameterRange {
                    name: p.name.clone(),
                    value: v.to_f64(),
                    range: p.range.source().to_string(),
                });
            }
        }
        for k in values.keys() {
            if !self.params.iter().any(|p| &p.name == k) {
                return Err(Error::UnknownParameter {
                    name: k.clone(),
                    context: format!("algebra parameters of {}", self.name),
                });
            }
        }
        Ok(())
    }

    /// Structure constants at the given parameter values, which must lie in
    /// the admissible range.
    pub fn algebra<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<LieAlgebra<T>> {
        self.check_algebra_params(values)?;
        self.algebra_unchecked(values)
    }

    /// Structure constants without the range check, for degenerate limits.
    pub fn algebra_unchecked<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<LieAlgebra<T>> {
        let mut triples = Vec::new();
        for b in &self.brackets {
            for (k, e) in &b.coeffs {
                triples.push((b.i, b.j, *k, e.eval(values)?));
            }
        }
        Ok(LieAlgebra::from_brackets(&self.name, &triples)?.with_params(values.clone()))
    }

    pub fn variant_algebra<T: Scalar>(&self, v: &Variant) -> Result<LieAlgebra<T>> {
        let values = self.variant_values(v)?;
        if v.limit {
            self.algebra_unchecked(&values)
        } else {
            self.algebra(&values)
        }
    }

    /// The metric matrix for given parameter values; every shape parameter
    /// must be supplied and nothing else.
    pub fn metric<T: Scalar>(&self, values: &BTreeMap<String, T>) -> Result<Mat4<T>> {
        let names = self.metric_param_names();
        for k in values.keys() {
            if !names.contains(k) {
                return Err(Error::UnknownParameter {
                    name: k.clone(),
                    context: format!("metric parameters of {}", self.name),
                });
            }
        }
        let mut out = linalg::identity::<T>();
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = match self.cell(i, j) {
                    Cell::Literal(r) => T::from_rational(r),
                    Cell::Param(p) => values.get(p).cloned().ok_or_else(|| Error::UnknownParameter {
                        name: p.clone(),
                        context: format!("metric of {} (missing value)", self.name),
                    })?,
                };
            }
        }
        Ok(out)
    }

    /// Reads the shape parameters back from a full matrix, checking literal
    /// cells and repeated parameters.
    pub fn metric_params_from_matrix(&self, g: &Mat4<f64>) -> Result<BTreeMap<String, f64>> {
        let mut out: BTreeMap<String, f64> = BTreeMap::new();
        for i in 0..4 {
            for j in 0..4 {
                let v = g[i][j];
                match self.cell(i, j) {
                    Cell::Literal(r) => {
                        if (v - r.to_f64()).abs() > 1e-12 {
                            return Err(Error::ShapeMismatch(format!(
                                "entry ({}, {}) is {v}, shape requires {r}",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                    Cell::Param(p) => match out.get(p) {
                        Some(prev) if (prev - v).abs() > 1e-12 => {
                            return Err(Error::ShapeMismatch(format!(
                                "parameter {p} takes values {prev} and {v}"
                            )));
                        }
                        Some(_) => {}
                        None => {
                            out.insert(p.clone(), v);
                        }
                    },
                }
            }
        }
        Ok(out)
    }

    pub fn constraint_values(&self, values: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
        self.metric_constraints.iter().map(|c| c.eval(values)).collect()
    }

    pub fn expected_closed_dim(&self, v: &Variant) -> Option<usize> {
        v.closed_dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_checksum_is_pinned() {
        assert_eq!(
            Catalog::builtin().checksum,
            "879de8c09c15d51f73d68636717dd801ba0e91fb8c68ae7eb9377cf9c1d6de21"
        );
    }

    #[test]
    fn builtin_catalog_loads() {
        let cat = Catalog::builtin();
        assert_eq!(cat.entries.len(), 26);
        assert_eq!(cat.theorem_entries().count(), 4);
        assert_eq!(cat.get("2A2").unwrap().verdict, Verdict::HasNonEinsteinEM);
        assert_eq!(cat.get("A4,4").unwrap().verdict, Verdict::NoSolution);
        assert!(matches!(cat.get("A9,9"), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn metric_roundtrip() {
        let cat = Catalog::builtin();
        let e = cat.get("2A2").unwrap();
        let vals: BTreeMap<String, f64> = [("a1", 0.1), ("a2", 0.2), ("a3", 0.3), ("a4", 0.0), ("a5", 2.0)]
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        let g = e.metric(&vals).unwrap();
        assert_eq!(g[2][0], 0.1);
        assert_eq!(g[0][2], 0.1);
        assert_eq!(g[3][3], 1.0);
        assert_eq!(e.metric_params_from_matrix(&g).unwrap(), vals);
        let mut bad = g;
        bad[0][0] = 2.0;
        assert!(matches!(
            e.metric_params_from_matrix(&bad),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn unknown_constraint_parameter_is_rejected() {
        let src = BUILTIN_CATALOG.replacen("a5-a3^2-a1^2", "a5-a3^2-a9^2", 1);
        assert!(matches!(load_catalog(&src), Err(Error::UnknownParameter { .. })));
    }

    #[test]
    fn jacobi_violation_is_rejected() {
        // [e2,e3] = e1 with [e1,e4] = 2 e1 breaks Jacobi for A4,8's remaining brackets
        let src = BUILTIN_CATALOG.replacen(
            r#"{"i": 2, "j": 4, "coeffs": [[2, "1"]]},
        {"i": 3, "j": 4, "coeffs": [[3, "-1"]]}"#,
            r#"{"i": 2, "j": 4, "coeffs": [[2, "1"]]},
        {"i": 3, "j": 4, "coeffs": [[3, "1"]]}"#,
            1,
        );
        assert_ne!(src, BUILTIN_CATALOG);
        assert!(matches!(load_catalog(&src), Err(Error::Jacobi { .. })));
    }

    #[test]
    fn malformed_document_is_rejected() {
        assert!(matches!(load_catalog("{\"version\": 1"), Err(Error::Json(_))));
    }

    #[test]
    fn parameter_ranges_are_enforced() {
        let cat = Catalog::builtin();
        let e = cat.get("A4,9").unwrap();
        let mut v = BTreeMap::new();
        v.insert("b".to_string(), -0.5);
        assert!(matches!(e.algebra(&v), Err(Error::ParameterRange { .. })));
        v.insert("b".to_string(), 0.25);
        assert!(e.algebra(&v).is_ok());
    }

    #[test]
    fn closed_form_dimensions_match_catalog() {
        let cat = Catalog::builtin();
        for e in &cat.entries {
            for v in &e.variants {
                let alg: LieAlgebra<Rational> = e.variant_algebra(v).unwrap();
                let dim = alg.closedness_constraints().dimension();
                if let Some(want) = v.closed_dim {
                    assert_eq!(dim, want, "{} {}", e.name, v.name);
                }
            }
        }
    }
}
