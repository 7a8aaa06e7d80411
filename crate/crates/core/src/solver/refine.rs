use std::collections::BTreeMap;

use serde::Serialize;

use super::candidate::{self, Candidate};
use super::lm::{self, Status};
use crate::catalog::CatalogEntry;
use crate::error::{Error, Result};
use crate::forms::{TwoForm, COEFF_NAMES};
use crate::lie_algebra::LieAlgebra;

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Metric parameters or 2-form coefficients (`a12`, ..., `a34`) held
    /// fixed.
    pub frozen: Vec<String>,
    /// Append `|F|^2_g - 1` to the residual.
    pub unit_f: bool,
}

impl RefineOptions {
    pub fn new(tol: f64, max_iter: usize) -> Self {
        Self {
            tol,
            max_iter,
            frozen: Vec::new(),
            unit_f: false,
        }
    }

    pub fn freeze<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.frozen.extend(names.into_iter().map(Into::into));
        self
    }

    pub fn unit_f(mut self, on: bool) -> Self {
        self.unit_f = on;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refined {
    pub candidate: Candidate,
    pub status: Status,
    pub iterations: usize,
    /// `|residual|_inf` at the returned candidate.
    pub residual: f64,
}

impl Refined {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Metric(usize),
    Coeff(usize),
}

struct Layout<'a> {
    entry: &'a CatalogEntry,
    start: &'a Candidate,
    names: Vec<String>,
    slots: Vec<Slot>,
}

impl<'a> Layout<'a> {
    fn new(entry: &'a CatalogEntry, start: &'a Candidate, frozen: &[String]) -> Result<Self> {
        start.instantiate_entry(entry)?;
        let names = entry.metric_param_names();
        for f in frozen {
            if !names.contains(f) && !COEFF_NAMES.contains(&f.as_str()) {
                return Err(Error::UnknownParameter {
                    name: f.clone(),
                    context: format!("frozen list for {}", entry.name),
                });
            }
        }
        let mut slots = Vec::new();
        for (k, n) in names.iter().enumerate() {
            if !frozen.contains(n) {
                slots.push(Slot::Metric(k));
            }
        }
        for (k, n) in COEFF_NAMES.iter().enumerate() {
            if !frozen.iter().any(|f| f == n) {
                slots.push(Slot::Coeff(k));
            }
        }
        Ok(Self {
            entry,
            start,
            names,
            slots,
        })
    }

    fn x0(&self) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match s {
                Slot::Metric(k) => self.start.metric_params[&self.names[*k]],
                Slot::Coeff(k) => self.start.f_coeffs.a[*k],
            })
            .collect()
    }

    fn assemble(&self, x: &[f64]) -> (BTreeMap<String, f64>, TwoForm<f64>) {
        let mut params = self.start.metric_params.clone();
        let mut f = self.start.f_coeffs.clone();
        for (s, v) in self.slots.iter().zip(x) {
            match s {
                Slot::Metric(k) => {
                    params.insert(self.names[*k].clone(), *v);
                }
                Slot::Coeff(k) => f.a[*k] = *v,
            }
        }
        (params, f)
    }

    fn residual(&self, alg: &LieAlgebra<f64>, x: &[f64], unit: bool) -> Option<Vec<f64>> {
        let (params, f) = self.assemble(x);
        let g = candidate::check_metric(self.entry, &params).ok()?;
        let mut r = candidate::residual_of(alg, &g, self.start.orientation, &f).ok()?;
        if unit {
            r.push(candidate::unit_row(&g, &f).ok()?);
        }
        Some(r)
    }
}

/// Levenberg-Marquardt on the raw residual over the unfrozen metric
/// parameters and 2-form coefficients. Algebra parameters stay fixed.
pub fn refine(entry: &CatalogEntry, start: &Candidate, opts: &RefineOptions) -> Result<Refined> {
    let layout = Layout::new(entry, start, &opts.frozen)?;
    let alg = entry.algebra(&start.algebra_params)?;
    let out = lm::minimize(
        |x| layout.residual(&alg, x, opts.unit_f),
        &layout.x0(),
        &lm::Options::new(opts.tol, opts.max_iter),
    )
    .ok_or_else(|| Error::Invalid("start point is infeasible".into()))?;
    let (params, f) = layout.assemble(&out.x);
    let residual = out.max_abs();
    Ok(Refined {
        candidate: Candidate {
            metric_params: params,
            f_coeffs: f,
            ..start.clone()
        },
        status: out.status,
        iterations: out.iterations,
        residual,
    })
}

/// The finite-difference Jacobian used by [`refine`]: rows follow
/// [`candidate::residual_vector`], columns are the metric parameters in
/// order of first appearance followed by `a12, ..., a34`.
pub fn residual_jacobian(entry: &CatalogEntry, c: &Candidate) -> Result<Vec<Vec<f64>>> {
    let layout = Layout::new(entry, c, &[])?;
    let alg = entry.algebra(&c.algebra_params)?;
    let f = |x: &[f64]| layout.residual(&alg, x, false);
    let x0 = layout.x0();
    let r0 = f(&x0).ok_or_else(|| Error::Invalid("candidate is infeasible".into()))?;
    let j = lm::jacobian(&f, &x0, &r0);
    Ok((0..j.nrows()).map(|i| j.row(i).iter().copied().collect()).collect())
}
