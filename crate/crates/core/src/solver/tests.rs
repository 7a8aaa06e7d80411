use std::collections::BTreeMap;

use super::*;
use crate::catalog::Catalog;
use crate::error::Error;
use crate::forms::{Orientation, TwoForm};
use crate::maxwell::{self, Classification, Tolerances};

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn two_a2(a5: f64, f: [f64; 6]) -> Candidate {
    Candidate {
        entry: "2A2".into(),
        algebra_params: BTreeMap::new(),
        metric_params: params(&[("a1", 0.0), ("a2", 0.0), ("a3", 0.0), ("a4", 0.0), ("a5", a5)]),
        f_coeffs: TwoForm::new(f),
        orientation: Orientation::Positive,
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(f(lo) * f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn residual_vanishes_on_2a2_family_point() {
    let cat = Catalog::builtin();
    let r = residual_vector(&cat, &two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 3f64.sqrt()])).unwrap();
    assert_eq!(r.len(), RESIDUAL_LEN);
    assert!(candidate::max_abs(&r) <= 1e-12);
}

#[test]
fn residual_vanishes_on_a49half_point() {
    let cat = Catalog::builtin();
    let c = Candidate {
        entry: "A49half".into(),
        algebra_params: BTreeMap::new(),
        metric_params: params(&[("a1", 1.0), ("a2", 0.0), ("a3", 0.0), ("a4", 0.0)]),
        f_coeffs: TwoForm::new([0.0, 2.5f64.sqrt(), 0.0, 0.0, 1.0, 0.0]),
        orientation: Orientation::Positive,
    };
    assert!(candidate::max_abs(&residual_vector(&cat, &c).unwrap()) <= 1e-12);
}

#[test]
fn residual_of_e34_on_2a2_with_a5_three() {
    // g = diag(1,1,3,1): Ric_0 = diag(-1/3,-1/3,1,1/3), [F∘F]_0 = diag(1/6,1/6,-1/2,-1/6),
    // F and ⋆F = e12/sqrt(3) are closed.
    let cat = Catalog::builtin();
    let r = residual_vector(&cat, &two_a2(3.0, [0.0, 0.0, 0.0, 0.0, 0.0, 1.0])).unwrap();
    let mut expected = vec![0.0; 18];
    expected[0] = -1.0 / 6.0;
    expected[4] = -1.0 / 6.0;
    expected[7] = 0.5;
    expected[9] = 1.0 / 6.0;
    for (a, b) in r.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-12, "{r:?}");
    }
    assert!((candidate::max_abs(&r) - 0.5).abs() < 1e-12);
}

#[test]
fn constraint_violation_is_an_error() {
    let cat = Catalog::builtin();
    let mut c = two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    c.metric_params.insert("a1".into(), 2.0);
    assert!(matches!(
        residual_vector(&cat, &c),
        Err(Error::ConstraintViolated { .. })
    ));
    let mut c = two_a2(2.0, [1.0; 6]);
    c.metric_params.remove("a5");
    assert!(residual_vector(&cat, &c).is_err());
}

#[test]
fn algebra_parameter_out_of_range_is_rejected() {
    let cat = Catalog::builtin();
    let c = Candidate {
        entry: "A46a0".into(),
        algebra_params: params(&[("a", 0.0)]),
        metric_params: params(&[("a1", 0.0), ("a2", 0.0), ("a3", 1.0)]),
        f_coeffs: TwoForm::zero(),
        orientation: Orientation::Positive,
    };
    assert!(matches!(residual_vector(&cat, &c), Err(Error::ParameterRange { .. })));
}

#[test]
fn normalized_residual_is_scale_invariant() {
    let cat = Catalog::builtin();
    let e = cat.get("A4,4").unwrap();
    let alg = e.algebra::<f64>(&BTreeMap::new()).unwrap();
    let g = e.metric(&params(&[("a1", 1.3), ("a2", 0.2), ("a3", 0.9)])).unwrap();
    let f = TwoForm::new([0.3, -0.2, 0.5, 0.1, 0.7, -0.4]);
    let lam: f64 = 2.7;
    let g2 = crate::linalg::mat4_from_fn(|i, j| lam * g[i][j]);
    let f2 = f.scale(&lam.sqrt());
    let a = candidate::normalized_residual(&alg, &g, Orientation::Positive, &f, true).unwrap();
    let b = candidate::normalized_residual(&alg, &g2, Orientation::Positive, &f2, true).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn normalized_residual_vanishes_exactly_at_solutions() {
    let cat = Catalog::builtin();
    let c = two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 3f64.sqrt()]);
    let inst = c.instantiate(&cat).unwrap();
    let r = candidate::normalized_residual(&inst.alg, &inst.g, inst.orientation, &inst.f, false).unwrap();
    assert!(candidate::max_abs(&r) < 1e-12);
}

#[test]
fn refine_recovers_sqrt3_on_the_2a2_family() {
    let cat = Catalog::builtin();
    let e = cat.get("2A2").unwrap();
    let start = two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 1.8]);
    let opts = RefineOptions::new(1e-12, 100).freeze(["a1", "a2", "a3", "a4", "a5", "a12", "a13", "a14", "a23", "a24"]);
    let out = refine(e, &start, &opts).unwrap();
    assert!(out.converged(), "{out:?}");
    let oracle = bisect(|t| (1.0 + t * t) / 2.0 - 2.0, 0.0, 10.0);
    assert!((out.candidate.f_coeffs.a[5] - oracle).abs() <= 1e-9);
    assert!((oracle - 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(out.candidate.metric_params["a5"], 2.0);
}

#[test]
fn refine_at_a_solution_takes_no_steps() {
    let cat = Catalog::builtin();
    let e = cat.get("2A2").unwrap();
    let start = two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 3f64.sqrt()]);
    let out = refine(e, &start, &RefineOptions::new(1e-9, 50)).unwrap();
    assert_eq!(out.iterations, 0);
    assert_eq!(out.candidate, start);
    assert!(out.converged());
}

#[test]
fn refine_finds_nothing_on_a44_with_unit_f() {
    let cat = Catalog::builtin();
    let e = cat.get("A4,4").unwrap();
    let starts = [
        ([1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ([2.0, 0.5, 1.0], [0.3, -0.2, 0.5, 0.1, 0.7, -0.4]),
        ([0.5, -0.3, 2.5], [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]),
    ];
    for (m, f) in starts {
        let c = Candidate {
            entry: "A4,4".into(),
            algebra_params: BTreeMap::new(),
            metric_params: params(&[("a1", m[0]), ("a2", m[1]), ("a3", m[2])]),
            f_coeffs: TwoForm::new(f),
            orientation: Orientation::Positive,
        };
        let out = refine(e, &c, &RefineOptions::new(1e-9, 300).unit_f(true)).unwrap();
        assert_ne!(out.status, Status::Converged, "{out:?}");
        assert!(out.residual > 1e-9);
    }
}

#[test]
fn refine_rejects_unknown_frozen_names() {
    let cat = Catalog::builtin();
    let e = cat.get("2A2").unwrap();
    let start = two_a2(2.0, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    assert!(refine(e, &start, &RefineOptions::new(1e-9, 5).freeze(["b7"])).is_err());
}

#[test]
fn search_2a2_reproduces_the_family() {
    let cat = Catalog::builtin();
    let out = multistart_search(cat.get("2A2").unwrap(), &SearchOptions::new(200, 0, SearchMode::UnitF)).unwrap();
    assert!(out.non_einstein_solutions >= 1);
    for s in &out.solutions {
        let m = &s.candidate.metric_params;
        let f = &s.candidate.f_coeffs.a;
        let rel = m["a5"] * (1.0 + f[0] * f[0]) - (1.0 + f[5] * f[5]);
        assert!(rel.abs() <= 1e-6, "{m:?} {f:?}");
        if s.report.classification == Classification::NonEinsteinEM {
            assert!((m["a5"] - 1.0).abs() > 1e-6);
        }
    }
}

#[test]
fn search_a44_finds_nothing() {
    let cat = Catalog::builtin();
    let out = multistart_search(cat.get("A4,4").unwrap(), &SearchOptions::new(200, 0, SearchMode::UnitF)).unwrap();
    assert!(out.solutions.is_empty());
    assert!(out.best_nonsolution_residual.unwrap() > 1e-3);
}

#[test]
fn abelian_solutions_are_null_stress() {
    let cat = Catalog::builtin();
    let out = multistart_search(
        cat.get("abelian").unwrap(),
        &SearchOptions::new(10, 0, SearchMode::FreeF),
    )
    .unwrap();
    assert!(!out.solutions.is_empty());
    for s in &out.solutions {
        assert_eq!(s.report.classification, Classification::EinsteinWithNullStress);
    }
}

#[test]
fn solutions_survive_independent_reverification_and_sign_flip() {
    let cat = Catalog::builtin();
    let tol = Tolerances::default();
    for name in ["2A2", "A2+2A1", "A49half", "A46a0"] {
        let out = multistart_search(cat.get(name).unwrap(), &SearchOptions::new(20, 3, SearchMode::UnitF)).unwrap();
        assert!(!out.solutions.is_empty(), "{name}");
        for s in &out.solutions {
            for c in [s.candidate.clone(), s.candidate.sign_flipped()] {
                let entry = cat.get(&c.entry).unwrap();
                let alg = entry.algebra::<f64>(&c.algebra_params).unwrap();
                let g = entry.metric(&c.metric_params).unwrap();
                let rep = maxwell::em_residual_with(&alg, &g, c.orientation, &c.f_coeffs, &tol).unwrap();
                assert!(rep.is_solution(tol.sol), "{name}: {rep:?}");
            }
        }
    }
}

#[test]
fn deduplicated_solutions_are_separated() {
    let cat = Catalog::builtin();
    let out = multistart_search(
        cat.get("A2+2A1").unwrap(),
        &SearchOptions::new(40, 1, SearchMode::UnitF),
    )
    .unwrap();
    assert!(out.converged_seeds > out.solutions.len());
    for (i, a) in out.solutions.iter().enumerate() {
        for b in &out.solutions[i + 1..] {
            let d = a
                .candidate
                .flat_params()
                .iter()
                .zip(b.candidate.flat_params())
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d >= crate::tolerances::DEDUP);
        }
    }
}

#[test]
fn serial_and_parallel_runs_agree() {
    let cat = Catalog::builtin();
    let e = cat.get("2A2").unwrap();
    let par = multistart_search(e, &SearchOptions::new(30, 7, SearchMode::UnitF)).unwrap();
    let ser = multistart_search(e, &SearchOptions::new(30, 7, SearchMode::UnitF).serial()).unwrap();
    let again = multistart_search(e, &SearchOptions::new(30, 7, SearchMode::UnitF).serial()).unwrap();
    assert_eq!(par.solutions, ser.solutions);
    assert_eq!(
        serde_json::to_string(&ser).unwrap(),
        serde_json::to_string(&again).unwrap()
    );
}

#[test]
fn zero_seeds_is_an_error() {
    let cat = Catalog::builtin();
    assert!(multistart_search(cat.get("2A2").unwrap(), &SearchOptions::new(0, 0, SearchMode::UnitF)).is_err());
}

#[test]
fn classification_examples_agree() {
    let cat = Catalog::builtin();
    let budget = Budget {
        n_seeds: 60,
        ..Budget::default()
    };
    let v = classify_algebra(cat.get("2A2").unwrap(), &budget, true).unwrap();
    assert_eq!(v.computed, ComputedVerdict::HasNonEinsteinEM);
    assert!(v.agree);
    let v = classify_algebra(cat.get("A4,12").unwrap(), &budget, true).unwrap();
    assert_eq!(v.computed, ComputedVerdict::NoSolutionFound);
    assert!(v.agree);
    assert!(v.max_converged_stress.is_none_or(|s| s <= 1e-8));
    let v = classify_algebra(cat.get("A3,9+A1").unwrap(), &budget, true).unwrap();
    assert!(v.agree);
    assert_eq!(v.solutions, 0);
}

#[test]
fn family_grids_pass() {
    let cat = Catalog::builtin();
    for f in FamilyId::ALL {
        let rep = verify_family(&cat, f, &GridSpec::default_for(f)).unwrap();
        assert!(rep.all_ok, "{f}");
        assert!(rep.max_residual <= 1e-10);
    }
    let rep = verify_family(&cat, FamilyId::TwoA2, &GridSpec::default_for(FamilyId::TwoA2)).unwrap();
    assert_eq!(rep.points.len(), 14);
    assert_eq!(rep.skipped.len(), 2);
}

#[test]
fn a49half_orientation_decides_integrability() {
    let cat = Catalog::builtin();
    let mut spec = GridSpec::default_for(FamilyId::A49Half);
    let plus = verify_family(&cat, FamilyId::A49Half, &spec).unwrap();
    assert!(plus
        .points
        .iter()
        .all(|p| p.hermitian == crate::kahler::HermitianType::AlmostKahlerNonIntegrable));
    spec.orientation = Orientation::Negative;
    let minus = verify_family(&cat, FamilyId::A49Half, &spec).unwrap();
    assert!(minus.all_ok);
    assert!(minus
        .points
        .iter()
        .all(|p| p.hermitian == crate::kahler::HermitianType::Kahler));
}

#[test]
fn grid_overrides() {
    let spec = GridSpec::default_for(FamilyId::A46a0)
        .with_override(FamilyId::A46a0, "a=1/3,3")
        .unwrap();
    assert_eq!(spec.values["a"], vec![1.0 / 3.0, 3.0]);
    assert!(GridSpec::default_for(FamilyId::A46a0)
        .with_override(FamilyId::A46a0, "z=1")
        .is_err());
    assert!("A4,4".parse::<FamilyId>().is_err());
}

#[test]
fn jacobian_matches_the_linear_part() {
    // F enters dF linearly: those rows of the Jacobian are the closedness matrix
    let cat = Catalog::builtin();
    let e = cat.get("A4,8").unwrap();
    let c = Candidate {
        entry: "A4,8".into(),
        algebra_params: BTreeMap::new(),
        metric_params: params(&[("a1", 1.2), ("a2", 0.1), ("a3", -0.2), ("a4", 0.3)]),
        f_coeffs: TwoForm::new([0.4, 0.1, -0.3, 0.2, 0.5, -0.6]),
        orientation: Orientation::Positive,
    };
    let j = residual_jacobian(e, &c).unwrap();
    let sys = e.algebra::<f64>(&BTreeMap::new()).unwrap().closedness_constraints();
    for r in 0..4 {
        for k in 0..6 {
            assert!((j[10 + r][4 + k] - sys.matrix[r][k]).abs() < 1e-8);
        }
        for k in 0..4 {
            assert!(j[10 + r][k].abs() < 1e-8);
        }
    }
}
