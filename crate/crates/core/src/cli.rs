//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{Catalog, Verdict};
use crate::error::{Error, Result};
use crate::forms::Orientation;
use crate::maxwell::{self, Classification, Tolerances};
use crate::metric::{self, Curvature};
use crate::solver::{self, Budget, Candidate, ComputedVerdict, FamilyId, GridSpec, SearchMode, SearchOptions};
use crate::tolerances::TOL_SOL;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lie-maxwell",
    version,
    about = "Left-invariant Einstein-Maxwell metrics on 4-dimensional Lie algebras"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Global {
    /// Solution tolerance on all residuals.
    #[arg(long, global = true, default_value_t = TOL_SOL)]
    pub tol: f64,
    /// Print JSON instead of a text table.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON result to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    /// List catalog entries with their expected verdicts.
    List {
        #[arg(long)]
        verdict: Option<Verdict>,
    },
    /// Curvature of a catalog metric.
    Report {
        entry: String,
        /// Algebra variant name (defaults to the first admissible one).
        #[arg(long)]
        variant: Option<String>,
        /// Metric parameters as `name=value` pairs, comma separated.
        #[arg(long, default_value = "")]
        metric: String,
    },
    /// Evaluate a candidate JSON file.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Expect::Any)]
        expect: Expect,
    },
    /// Multistart search on one entry.
    Search {
        entry: String,
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        /// Drop the `|F| = 1` row.
        #[arg(long)]
        free_f: bool,
        #[arg(long)]
        serial: bool,
    },
    /// Check a closed-form solution family on a grid.
    Family {
        family: FamilyId,
        /// `name=v1,v2,...`, repeatable; replaces the default grid of one variable.
        #[arg(long)]
        grid: Vec<String>,
        /// JSON grid specification.
        #[arg(long)]
        grid_file: Option<PathBuf>,
        #[arg(long, value_parser = parse_orientation, allow_hyphen_values = true)]
        orientation: Option<Orientation>,
    },
    /// Computed versus expected verdicts for the whole catalog.
    Theorem1 {
        #[arg(long, default_value_t = 200)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long)]
        serial: bool,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Any,
    NonEinstein,
    Null,
}

impl clap::builder::ValueParserFactory for FamilyId {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<FamilyId>().map_err(|e| e.to_string()))
    }
}

impl clap::builder::ValueParserFactory for Verdict {
    type Parser = clap::builder::ValueParser;
    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Verdict>().map_err(|e| e.to_string()))
    }
}

fn parse_orientation(s: &str) -> std::result::Result<Orientation, String> {
    match s.trim() {
        "+1" | "1" | "+" => Ok(Orientation::Positive),
        "-1" | "-" => Ok(Orientation::Negative),
        other => Err(format!("orientation must be +1 or -1, got `{other}`")),
    }
}

/// Everything needed to reproduce a run.
#[derive(Serialize)]
struct RunConfig<'a> {
    command: &'a Command,
    tol: f64,
    format: &'static str,
    out: Option<&'a PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: RunConfig<'a>,
    catalog_checksum: &'a str,
    result: &'a T,
}

struct Output {
    text: String,
    json: serde_json::Value,
    code: u8,
}

pub fn run(cli: &Cli) -> Result<u8> {
    if !(cli.global.tol > 0.0) {
        return Err(Error::Invalid("--tol must be positive".into()));
    }
    let catalog = Catalog::builtin();
    let tol = Tolerances::with_sol(cli.global.tol);
    let out = match &cli.command {
        Command::List { verdict } => list(&catalog, *verdict)?,
        Command::Report { entry, variant, metric } => report(&catalog, entry, variant.as_deref(), metric)?,
        Command::Verify { file, expect } => verify(&catalog, file, *expect, &tol)?,
        Command::Search {
            entry,
            seeds,
            seed,
            max_iter,
            free_f,
            serial,
        } => {
            let mut opts = SearchOptions::new(
                *seeds,
                *seed,
                if *free_f { SearchMode::FreeF } else { SearchMode::UnitF },
            );
            opts.parallel = !serial;
            opts.max_iter = *max_iter;
            opts.tol = tol;
            search(&catalog, entry, &opts)?
        }
        Command::Family {
            family,
            grid,
            grid_file,
            orientation,
        } => {
            let mut spec = match grid_file {
                Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
                None => GridSpec::default_for(*family),
            };
            for g in grid {
                spec = spec.with_override(*family, g)?;
            }
            if let Some(o) = orientation {
                spec.orientation = *o;
            }
            family_cmd(&catalog, *family, &spec)?
        }
        Command::Theorem1 {
            seeds,
            seed,
            max_iter,
            serial,
        } => theorem1(
            &catalog,
            &Budget {
                n_seeds: *seeds,
                max_iter: *max_iter,
                seed: *seed,
            },
            !serial,
        )?,
    };
    let envelope = Envelope {
        config: RunConfig {
            command: &cli.command,
            tol: cli.global.tol,
            format: if cli.global.json { "json" } else { "text" },
            out: cli.global.out.as_ref(),
        },
        catalog_checksum: &catalog.checksum,
        result: &out.json,
    };
    let json = serde_json::to_string_pretty(&envelope)?;
    if let Some(path) = &cli.global.out {
        std::fs::write(path, format!("{json}\n"))?;
    }
    if cli.global.json {
        println!("{json}");
    } else {
        print!("{}", out.text);
    }
    Ok(out.code)
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

#[derive(Serialize)]
struct ListRow<'a> {
    name: &'a str,
    display: &'a str,
    verdict: Verdict,
    metric_params: Vec<String>,
    variants: Vec<&'a str>,
}

fn list(catalog: &Catalog, verdict: Option<Verdict>) -> Result<Output> {
    let rows: Vec<ListRow> = catalog
        .entries
        .iter()
        .filter(|e| verdict.is_none_or(|v| e.verdict == v))
        .map(|e| ListRow {
            name: &e.name,
            display: &e.display,
            verdict: e.verdict,
            metric_params: e.metric_param_names(),
            variants: e.variants.iter().map(|v| v.name.as_str()).collect(),
        })
        .collect();
    let mut text = format!(
        "{:<10} {:<18} {:<17} {}\n",
        "entry", "algebra", "verdict", "metric params"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<10} {:<18} {:<17} {}",
            r.name,
            r.display,
            r.verdict.to_string(),
            r.metric_params.join(",")
        );
    }
    let _ = writeln!(text, "{} entries", rows.len());
    Ok(Output {
        text,
        json: serde_json::to_value(&rows)?,
        code: EXIT_OK,
    })
}

fn parse_assignments(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("`{part}` is not name=value")))?;
        let value = crate::expr::Expr::parse(v.trim())?.constant::<f64>()?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

#[derive(Serialize)]
struct CurvatureReport {
    entry: String,
    variant: String,
    metric: [[f64; 4]; 4],
    ricci: [[f64; 4]; 4],
    traceless_ricci: [[f64; 4]; 4],
    scalar_curvature: f64,
    einstein: bool,
    sectional: BTreeMap<String, f64>,
}

fn report(catalog: &Catalog, name: &str, variant: Option<&str>, metric_spec: &str) -> Result<Output> {
    let entry = catalog.get(name)?;
    let v = match variant {
        Some(v) => entry.variant(v)?,
        None => entry
            .regular_variants()
            .next()
            .ok_or_else(|| Error::Invalid(format!("{name} has no admissible variant")))?,
    };
    let alg = entry.variant_algebra::<f64>(v)?;
    let params = parse_assignments(metric_spec)?;
    let g = solver::candidate::check_metric(entry, &params)?;
    let curv = Curvature::compute(&alg, &g)?;
    let mut sectional = BTreeMap::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            sectional.insert(
                format!("K{}{}", i + 1, j + 1),
                metric::sectional_curvature(&curv.riemann, &g, i, j),
            );
        }
    }
    let rep = CurvatureReport {
        entry: entry.name.clone(),
        variant: v.name.clone(),
        metric: g,
        ricci: curv.ricci,
        traceless_ricci: curv.traceless_ricci,
        scalar_curvature: curv.scalar,
        einstein: crate::linalg::max_abs(&curv.traceless_ricci) <= crate::tolerances::TOL_EINSTEIN,
        sectional,
    };
    let mut text = format!("{} ({})\n", rep.entry, rep.variant);
    let mat = |t: &mut String, label: &str, m: &[[f64; 4]; 4]| {
        let _ = writeln!(t, "{label}:");
        for row in m {
            let _ = writeln!(
                t,
                "  {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                row[0], row[1], row[2], row[3]
            );
        }
    };
    mat(&mut text, "g", &rep.metric);
    mat(&mut text, "Ric", &rep.ricci);
    mat(&mut text, "Ric_0", &rep.traceless_ricci);
    let _ = writeln!(text, "s = {:.12}", rep.scalar_curvature);
    let _ = writeln!(text, "einstein: {}", rep.einstein);
    Ok(Output {
        text,
        json: serde_json::to_value(&rep)?,
        code: EXIT_OK,
    })
}

fn verify(catalog: &Catalog, file: &PathBuf, expect: Expect, tol: &Tolerances) -> Result<Output> {
    let src = std::fs::read_to_string(file)?;
    let c: Candidate = serde_json::from_str(&src)?;
    let inst = c.instantiate(catalog)?;
    let rep = maxwell::em_residual_with(&inst.alg, &inst.g, inst.orientation, &inst.f, tol)?;
    let pass = match expect {
        Expect::Any => rep.classification != Classification::NotASolution,
        Expect::NonEinstein => rep.classification == Classification::NonEinsteinEM,
        Expect::Null => rep.classification == Classification::EinsteinWithNullStress,
    };
    let mut text = format!("{}: {:?}\n", c.entry, rep.classification);
    let _ = writeln!(text, "  r_em      = {:.3e}", rep.r_em);
    let _ = writeln!(text, "  r_dF      = {:.3e}", rep.r_df);
    let _ = writeln!(text, "  r_d*F     = {:.3e}", rep.r_dstar_f);
    let _ = writeln!(text, "  |Ric_0|   = {:.3e}", rep.ricci0_max);
    let _ = writeln!(text, "  |F|       = {:.6}", rep.f_norm);
    if let Some(h) = &rep.hermitian {
        let _ = writeln!(text, "  hermitian = {:?}", h.kind);
        if let Some(fit) = &h.decomposition {
            let _ = writeln!(text, "  kappa     = {:.12} (defect {:.3e})", fit.kappa, fit.defect);
        }
    }
    Ok(Output {
        text,
        json: serde_json::to_value(&rep)?,
        code: if pass { EXIT_OK } else { EXIT_FAILURE },
    })
}

fn search(catalog: &Catalog, name: &str, opts: &SearchOptions) -> Result<Output> {
    let entry = catalog.get(name)?;
    let out = solver::multistart_search(entry, opts)?;
    eprintln!("wall time: {:.3} s", out.wall_time);
    let mut text = format!(
        "{}: {} seeds, {} solutions ({} non-Einstein), {} converged seeds\n",
        out.entry,
        out.seeds_used,
        out.solutions.len(),
        out.non_einstein_solutions,
        out.converged_seeds
    );
    match out.best_nonsolution_residual {
        Some(b) => {
            let _ = writeln!(text, "best non-solution residual: {b:.3e}");
        }
        None => text.push_str("best non-solution residual: none\n"),
    }
    for s in out.solutions.iter().take(10) {
        let _ = writeln!(
            text,
            "  {:?} metric={:?} F={:?}",
            s.report.classification, s.candidate.metric_params, s.candidate.f_coeffs.a
        );
    }
    Ok(Output {
        text,
        json: serde_json::to_value(&out)?,
        code: EXIT_OK,
    })
}

fn family_cmd(catalog: &Catalog, family: FamilyId, spec: &GridSpec) -> Result<Output> {
    let rep = solver::verify_family(catalog, family, spec)?;
    let mut text = format!(
        "{} ({:?}): {} points, {} skipped, max residual {:.3e}\n",
        rep.family,
        rep.orientation,
        rep.points.len(),
        rep.skipped.len(),
        rep.max_residual
    );
    for p in &rep.points {
        let _ = writeln!(
            text,
            "  {:?} {} {:?} {:?} kappa={:.10} defect={:.2e}",
            p.grid,
            if p.ok { "ok  " } else { "FAIL" },
            p.classification,
            p.hermitian,
            p.kappa,
            p.decomposition_defect
        );
    }
    Ok(Output {
        text,
        json: serde_json::to_value(&rep)?,
        code: if rep.all_ok { EXIT_OK } else { EXIT_FAILURE },
    })
}

fn theorem1(catalog: &Catalog, budget: &Budget, parallel: bool) -> Result<Output> {
    let mut rows = Vec::new();
    for e in &catalog.entries {
        rows.push(solver::classify_algebra(e, budget, parallel)?);
    }
    let mut text = format!(
        "{:<10} {:<17} {:<17} {:<6} {}\n",
        "entry", "expected", "computed", "agree", "best residual"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<10} {:<17} {:<17} {:<6} {}",
            r.entry,
            r.expected.to_string(),
            format!("{:?}", r.computed),
            r.agree,
            r.best_nonsolution_residual
                .map_or("-".to_string(), |b| format!("{b:.3e}"))
        );
    }
    let agree = rows.iter().filter(|r| r.agree).count();
    let _ = writeln!(
        text,
        "{agree}/{} agree (numerical evidence at {} seeds)",
        rows.len(),
        budget.n_seeds
    );
    let inconclusive: Vec<&str> = rows
        .iter()
        .filter(|r| r.computed == ComputedVerdict::Inconclusive)
        .map(|r| r.entry.as_str())
        .collect();
    if !inconclusive.is_empty() {
        let _ = writeln!(text, "inconclusive: {}", inconclusive.join(", "));
    }
    let code = if !inconclusive.is_empty() {
        EXIT_INCONCLUSIVE
    } else if agree == rows.len() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    };
    Ok(Output {
        text,
        json: serde_json::to_value(&rows)?,
        code,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    /// Runs the CLI in-process; returns the exit code and the JSON envelope.
    fn exec(args: &[&str]) -> (u8, Option<serde_json::Value>) {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out.json");
        let mut full = vec!["lie-maxwell".to_string()];
        full.extend(args.iter().map(|s| s.to_string()));
        full.push("--out".into());
        full.push(out.to_string_lossy().into_owned());
        let cli = match Cli::try_parse_from(&full) {
            Ok(c) => c,
            Err(_) => return (EXIT_INPUT, None),
        };
        match run(&cli) {
            Ok(code) => {
                let json = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
                (code, Some(json))
            }
            Err(_) => (EXIT_INPUT, None),
        }
    }

    #[test]
    fn list_marks_four_entries() {
        let (code, json) = exec(&["list"]);
        assert_eq!(code, EXIT_OK);
        let rows = json.unwrap()["result"].as_array().unwrap().clone();
        assert_eq!(rows.len(), 26);
        let marked = rows.iter().filter(|r| r["verdict"] == "HasNonEinsteinEM").count();
        assert_eq!(marked, 4);
        let (_, json) = exec(&["list", "--verdict", "NoSolution"]);
        let rows = json.unwrap()["result"].as_array().unwrap().clone();
        assert!(!rows.is_empty() && rows.len() < 26);
        assert!(rows.iter().all(|r| r["verdict"] == "NoSolution"));
    }

    #[test]
    fn envelope_records_config_and_checksum() {
        let (_, json) = exec(&["list", "--tol", "1e-8"]);
        let json = json.unwrap();
        assert_eq!(json["catalog_checksum"], Catalog::builtin().checksum);
        assert_eq!(json["config"]["tol"], 1e-8);
        assert_eq!(json["config"]["command"]["name"], "list");
    }

    #[test]
    fn verify_solution_fixture() {
        let (code, json) = exec(&["verify", &fixture("2a2_sol.json")]);
        assert_eq!(code, EXIT_OK);
        let rep = &json.unwrap()["result"];
        assert!(rep["r_em"].as_f64().unwrap() <= 1e-12);
        assert_eq!(rep["classification"], "NonEinsteinEM");
        assert_eq!(rep["hermitian"]["kind"], "Kahler");
        let (code, _) = exec(&["verify", &fixture("2a2_sol.json"), "--expect", "non-einstein"]);
        assert_eq!(code, EXIT_OK);
        let (code, _) = exec(&["verify", &fixture("2a2_sol.json"), "--expect", "null"]);
        assert_eq!(code, EXIT_FAILURE);
    }

    #[test]
    fn verify_reversed_orientation_fixture() {
        let (code, json) = exec(&["verify", &fixture("a49half_sol.json"), "--expect", "non-einstein"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(json.unwrap()["result"]["hermitian"]["kind"], "Kahler");
    }

    #[test]
    fn verify_null_stress_fixture() {
        let (code, _) = exec(&["verify", &fixture("flat_self_dual.json"), "--expect", "null"]);
        assert_eq!(code, EXIT_OK);
    }

    #[test]
    fn verify_failures_and_input_errors() {
        assert_eq!(exec(&["verify", &fixture("2a2_perturbed.json")]).0, EXIT_FAILURE);
        assert_eq!(exec(&["verify", &fixture("malformed.json")]).0, EXIT_INPUT);
        assert_eq!(exec(&["verify", &fixture("constraint_violation.json")]).0, EXIT_INPUT);
        assert_eq!(exec(&["verify", &fixture("missing.json")]).0, EXIT_INPUT);
        assert_eq!(exec(&["list", "--tol", "-1"]).0, EXIT_INPUT);
        assert_eq!(exec(&["bogus"]).0, EXIT_INPUT);
    }

    #[test]
    fn search_is_reproducible() {
        let args = ["search", "2A2", "--seeds", "50", "--seed", "7", "--json"];
        let (code, a) = exec(&args);
        let (_, b) = exec(&args);
        let (a, b) = (a.unwrap(), b.unwrap());
        assert_eq!(code, EXIT_OK);
        assert_eq!(a["result"], b["result"]);
        assert_eq!(a["config"]["command"], b["config"]["command"]);
        assert!(a["result"]["non_einstein_solutions"].as_u64().unwrap() > 0);
    }

    #[test]
    fn search_unknown_entry_is_an_input_error() {
        assert_eq!(exec(&["search", "A9,9", "--seeds", "2"]).0, EXIT_INPUT);
    }

    #[test]
    fn family_commands() {
        let (code, json) = exec(&["family", "A46a0"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(json.unwrap()["result"]["points"].as_array().unwrap().len(), 6);
        let (code, json) = exec(&["family", "A49half", "--orientation", "-1", "--grid", "a24=0,3"]);
        assert_eq!(code, EXIT_OK);
        let rep = json.unwrap()["result"].clone();
        assert_eq!(rep["orientation"], -1);
        assert_eq!(rep["points"].as_array().unwrap().len(), 2);
        assert_eq!(exec(&["family", "A4,4"]).0, EXIT_INPUT);
        assert_eq!(exec(&["family", "2A2", "--grid", "q=1"]).0, EXIT_INPUT);
    }

    #[test]
    fn family_grid_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.json");
        std::fs::write(&p, r#"{"values": {"a12": [0.25, 4]}}"#).unwrap();
        let (code, json) = exec(&["family", "A2+2A1", "--grid-file", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(json.unwrap()["result"]["points"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn curvature_report() {
        let (code, json) = exec(&["report", "2A2", "--metric", "a1=0,a2=0,a3=0,a4=0,a5=2"]);
        assert_eq!(code, EXIT_OK);
        let rep = json.unwrap()["result"].clone();
        assert!((rep["scalar_curvature"].as_f64().unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(rep["einstein"], false);
        assert_eq!(exec(&["report", "2A2", "--metric", "a5=2"]).0, EXIT_INPUT);
    }

    #[test]
    fn theorem1_table_agrees_at_small_budget() {
        let (code, json) = exec(&["theorem1", "--seeds", "20"]);
        let rows = json.unwrap()["result"].as_array().unwrap().clone();
        assert_eq!(rows.len(), 26);
        assert_eq!(code, EXIT_OK, "{rows:?}");
        assert!(rows.iter().all(|r| r["agree"] == true));
    }

    #[test]
    fn orientation_parser() {
        assert_eq!(parse_orientation("+1"), Ok(Orientation::Positive));
        assert_eq!(parse_orientation("-1"), Ok(Orientation::Negative));
        assert!(parse_orientation("2").is_err());
    }
}
