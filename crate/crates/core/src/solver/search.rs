use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidate::{self, Candidate};
use super::lm::{self, Status};
use crate::catalog::{CatalogEntry, Cell, Verdict};
use crate::error::{Error, Result};
use crate::forms::{Orientation, TwoForm};
use crate::lie_algebra::LieAlgebra;
use crate::maxwell::{self, Classification, EMReport, Tolerances};
use crate::scalar::Rational;
use crate::tolerances::{DEDUP, EPS_PD, NONEXIST_FACTOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    FreeF,
    UnitF,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    pub n_seeds: usize,
    pub seed: u64,
    pub mode: SearchMode,
    pub parallel: bool,
    /// Iteration cap of the main Levenberg-Marquardt stage, per seed.
    pub max_iter: usize,
    pub tol: Tolerances,
}

impl SearchOptions {
    pub fn new(n_seeds: usize, seed: u64, mode: SearchMode) -> Self {
        Self {
            n_seeds,
            seed,
            mode,
            parallel: true,
            max_iter: 200,
            tol: Tolerances::default(),
        }
    }

    pub fn serial(mut self) -> Self {
        self.parallel = false;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub candidate: Candidate,
    pub report: EMReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub entry: String,
    pub mode: SearchMode,
    pub seed: u64,
    pub seeds_used: usize,
    /// Distinct solutions in seed order, `F` sign canonicalized.
    pub solutions: Vec<Solution>,
    pub non_einstein_solutions: usize,
    /// Seeds that ended at a solution, before deduplication.
    pub converged_seeds: usize,
    /// Smallest normalized residual over seeds that did not reach a solution.
    pub best_nonsolution_residual: Option<f64>,
    /// Largest `|[F∘F]_0|` component over converged seeds.
    pub max_converged_stress: Option<f64>,
    /// Exit status of the main stage, per seed.
    pub statuses: BTreeMap<String, usize>,
    #[serde(skip)]
    pub wall_time: f64,
}

impl SearchOutcome {
    pub fn has_non_einstein(&self) -> bool {
        self.non_einstein_solutions > 0
    }
}

struct VariantData {
    params: BTreeMap<String, f64>,
    alg: LieAlgebra<f64>,
    kernel: Vec<TwoForm<f64>>,
}

struct Problem<'a> {
    entry: &'a CatalogEntry,
    names: Vec<String>,
    positive: Vec<bool>,
    variants: Vec<VariantData>,
}

/// Parameters sampled in `(ε_pd, 3]`: diagonal cells and parameters that
/// are themselves a constraint.
fn positive_params(entry: &CatalogEntry, names: &[String]) -> Vec<bool> {
    names
        .iter()
        .map(|n| {
            let diag = (0..4).any(|i| matches!(entry.cell(i, i), Cell::Param(p) if p == n));
            diag || entry.metric_constraints.iter().any(|c| c.source().trim() == n)
        })
        .collect()
}

impl<'a> Problem<'a> {
    fn new(entry: &'a CatalogEntry) -> Result<Self> {
        let names = entry.metric_param_names();
        let positive = positive_params(entry, &names);
        let mut variants = Vec::new();
        for v in entry.regular_variants() {
            let exact: LieAlgebra<Rational> = entry.variant_algebra(v)?;
            variants.push(VariantData {
                params: entry.variant_values(v)?,
                alg: exact.to_f64(),
                kernel: exact
                    .closedness_constraints()
                    .kernel
                    .iter()
                    .map(|k| TwoForm::new(k.a.clone().map(|x| crate::scalar::Scalar::to_f64(&x))))
                    .collect(),
            });
        }
        if variants.is_empty() {
            return Err(Error::Invalid(format!("{} has no admissible variant", entry.name)));
        }
        Ok(Self {
            entry,
            names,
            positive,
            variants,
        })
    }

    fn split<'x>(&self, x: &'x [f64]) -> (&'x [f64], &'x [f64]) {
        x.split_at(self.names.len())
    }

    fn metric_params(&self, m: &[f64]) -> BTreeMap<String, f64> {
        self.names.iter().cloned().zip(m.iter().copied()).collect()
    }

    fn form(&self, v: &VariantData, y: &[f64]) -> TwoForm<f64> {
        let mut f = TwoForm::zero();
        for (k, c) in v.kernel.iter().zip(y) {
            for p in 0..6 {
                f.a[p] += c * k.a[p];
            }
        }
        f
    }

    fn sample(&self, v: &VariantData, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        const TRIES: usize = 20_000;
        for _ in 0..TRIES {
            let m: Vec<f64> = self
                .positive
                .iter()
                .map(|p| {
                    if *p {
                        EPS_PD + (3.0 - EPS_PD) * (1.0 - rng.gen::<f64>())
                    } else {
                        rng.gen_range(-3.0..=3.0)
                    }
                })
                .collect();
            if candidate::check_metric(self.entry, &self.metric_params(&m)).is_ok() {
                let mut x = m;
                x.extend((0..v.kernel.len()).map(|_| rng.gen_range(-2.0..=2.0)));
                return Ok(x);
            }
        }
        Err(Error::EmptyFeasibleBox(self.entry.name.clone()))
    }

    fn candidate(&self, v: &VariantData, x: &[f64]) -> Candidate {
        let (m, y) = self.split(x);
        Candidate {
            entry: self.entry.name.clone(),
            algebra_params: v.params.clone(),
            metric_params: self.metric_params(m),
            f_coeffs: self.form(v, y),
            orientation: Orientation::Positive,
        }
    }

    fn normalized(&self, v: &VariantData, x: &[f64], unit: bool) -> Option<Vec<f64>> {
        let (m, y) = self.split(x);
        let g = candidate::check_metric(self.entry, &self.metric_params(m)).ok()?;
        candidate::normalized_residual(&v.alg, &g, Orientation::Positive, &self.form(v, y), unit).ok()
    }

    fn raw(&self, v: &VariantData, x: &[f64]) -> Option<Vec<f64>> {
        let (m, y) = self.split(x);
        let g = candidate::check_metric(self.entry, &self.metric_params(m)).ok()?;
        candidate::residual_of(&v.alg, &g, Orientation::Positive, &self.form(v, y)).ok()
    }
}

struct SeedResult {
    status: Status,
    solution: Option<Solution>,
    normalized: f64,
}

const STAGE1_TOL: f64 = 1e-12;
const POLISH_GATE: f64 = 1e-6;
const POLISH_ITER: usize = 60;

fn run_seed(p: &Problem, index: usize, opts: &SearchOptions) -> Result<SeedResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ index as u64);
    let v = &p.variants[index % p.variants.len()];
    let x0 = p.sample(v, &mut rng)?;
    let unit = opts.mode == SearchMode::UnitF;
    let stage1 = lm::minimize(
        |x| p.normalized(v, x, unit),
        &x0,
        &lm::Options::new(STAGE1_TOL, opts.max_iter),
    )
    .ok_or_else(|| Error::Invalid("sampled start is infeasible".into()))?;
    let mut x = stage1.x.clone();
    let mut normalized = stage1.max_abs();
    if normalized <= POLISH_GATE {
        let polish_tol = opts.tol.sol * 1e-3;
        if let Some(out) = lm::minimize(|x| p.raw(v, x), &x, &lm::Options::new(polish_tol, POLISH_ITER)) {
            x = out.x;
            if let Some(r) = p.normalized(v, &x, unit) {
                normalized = candidate::max_abs(&r);
            }
        }
    }
    let c = p.candidate(v, &x);
    let (m, _) = p.split(&x);
    let g = candidate::check_metric(p.entry, &p.metric_params(m))?;
    let report = maxwell::em_residual_with(&v.alg, &g, c.orientation, &c.f_coeffs, &opts.tol)?;
    let solution = (report.classification != Classification::NotASolution).then_some(Solution { candidate: c, report });
    Ok(SeedResult {
        status: stage1.status,
        solution,
        normalized,
    })
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::Diverged => "diverged",
        Status::Trapped => "trapped",
        Status::Stalled => "stalled",
    }
}

/// Multistart Levenberg-Marquardt over metric parameters and closed 2-forms.
///
/// Seed `i` uses `ChaCha8(seed ^ i)` and the `i mod k`-th admissible
/// algebra variant. `F` ranges over the closed 2-forms. Each start is
/// driven towards zero of the frame-normalized residual, polished on the
/// raw residual, and then classified by [`maxwell::em_residual_with`].
pub fn multistart_search(entry: &CatalogEntry, opts: &SearchOptions) -> Result<SearchOutcome> {
    if opts.n_seeds == 0 {
        return Err(Error::Invalid("n_seeds must be at least 1".into()));
    }
    let start = Instant::now();
    let problem = Problem::new(entry)?;
    let results: Vec<Result<SeedResult>> = if opts.parallel {
        (0..opts.n_seeds)
            .into_par_iter()
            .map(|i| run_seed(&problem, i, opts))
            .collect()
    } else {
        (0..opts.n_seeds).map(|i| run_seed(&problem, i, opts)).collect()
    };
    let mut solutions: Vec<Solution> = Vec::new();
    let mut keys: Vec<Vec<f64>> = Vec::new();
    let mut statuses = BTreeMap::new();
    let mut best: Option<f64> = None;
    let mut stress: Option<f64> = None;
    let mut converged = 0;
    for r in results {
        let r = r?;
        *statuses.entry(status_name(r.status).to_string()).or_insert(0) += 1;
        match r.solution {
            Some(sol) => {
                converged += 1;
                stress = Some(stress.map_or(sol.report.stress_max, |s: f64| s.max(sol.report.stress_max)));
                let canon = sol.candidate.canonical_sign();
                let key = canon.flat_params();
                let dup = keys
                    .iter()
                    .any(|k| k.len() == key.len() && k.iter().zip(&key).all(|(a, b)| (a - b).abs() < DEDUP));
                if !dup {
                    keys.push(key);
                    let report = if canon.f_coeffs == sol.candidate.f_coeffs {
                        sol.report
                    } else {
                        let inst = canon.instantiate_entry(entry)?;
                        maxwell::em_residual_with(&inst.alg, &inst.g, inst.orientation, &inst.f, &opts.tol)?
                    };
                    solutions.push(Solution {
                        candidate: canon,
                        report,
                    });
                }
            }
            None => best = Some(best.map_or(r.normalized, |b: f64| b.min(r.normalized))),
        }
    }
    let non_einstein = solutions
        .iter()
        .filter(|s| s.report.classification == Classification::NonEinsteinEM)
        .count();
    Ok(SearchOutcome {
        entry: entry.name.clone(),
        mode: opts.mode,
        seed: opts.seed,
        seeds_used: opts.n_seeds,
        solutions,
        non_einstein_solutions: non_einstein,
        converged_seeds: converged,
        best_nonsolution_residual: best,
        max_converged_stress: stress,
        statuses,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComputedVerdict {
    HasNonEinsteinEM,
    /// No non-Einstein solution at this budget; numerical evidence only.
    NoSolutionFound,
    /// Nothing found, but some start came within the evidence threshold.
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub n_seeds: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            n_seeds: 200,
            max_iter: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgebraVerdict {
    pub entry: String,
    pub expected: Verdict,
    pub computed: ComputedVerdict,
    pub agree: bool,
    pub n_seeds: usize,
    pub solutions: usize,
    pub non_einstein_solutions: usize,
    pub best_nonsolution_residual: Option<f64>,
    pub max_converged_stress: Option<f64>,
}

pub fn classify_algebra(entry: &CatalogEntry, budget: &Budget, parallel: bool) -> Result<AlgebraVerdict> {
    let mut opts = SearchOptions::new(budget.n_seeds, budget.seed, SearchMode::UnitF);
    opts.max_iter = budget.max_iter;
    opts.parallel = parallel;
    let out = multistart_search(entry, &opts)?;
    let threshold = NONEXIST_FACTOR * opts.tol.sol;
    let computed = if out.has_non_einstein() {
        ComputedVerdict::HasNonEinsteinEM
    } else if out.best_nonsolution_residual.is_some_and(|b| b <= threshold) {
        ComputedVerdict::Inconclusive
    } else {
        ComputedVerdict::NoSolutionFound
    };
    let agree = match computed {
        ComputedVerdict::HasNonEinsteinEM => entry.verdict.admits_non_einstein(),
        ComputedVerdict::NoSolutionFound => !entry.verdict.admits_non_einstein(),
        ComputedVerdict::Inconclusive => false,
    };
    Ok(AlgebraVerdict {
        entry: entry.name.clone(),
        expected: entry.verdict,
        computed,
        agree,
        n_seeds: budget.n_seeds,
        solutions: out.solutions.len(),
        non_einstein_solutions: out.non_einstein_solutions,
        best_nonsolution_residual: out.best_nonsolution_residual,
        max_converged_stress: out.max_converged_stress,
    })
}
