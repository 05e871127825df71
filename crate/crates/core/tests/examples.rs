mod common;

use common::{corpus_names, load, slot};
use prolong::algebra::SolutionSpace;
use prolong::deriv_index::DerivIndex;
use prolong::forms::first_order_reduction;
use prolong::prolongation::{saturate, SaturateOptions};
use prolong::render::{render_grid, render_triangle};
use prolong::report::{BoundReport, CommutationReport, LeadersReport, Report, SaturationReport, SCHEMA};
use prolong::tower::Tower;
use prolong::verdict::{decide, replay_json, DecideOptions, Variant, Verdict};
use serde_json::Value;

fn validator() -> jsonschema::JSONSchema {
    let schema: Value = serde_json::from_str(SCHEMA).expect("schema is JSON");
    jsonschema::JSONSchema::compile(&schema).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::JSONSchema, doc: &Value, what: &str) {
    if let Err(errors) = v.validate(doc) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{what}: {msgs:?}");
    }
}

#[test]
fn characteristic_set_grid() {
    let spec = load("char_set");
    let tower = Tower::from_presentation(&spec.pres).unwrap();
    assert_eq!(render_grid(&tower, 0, 3, 4).unwrap(), "a b * a\n* * * *\nb * * *\n");
}

#[test]
fn homogeneous_triangle_to_height_six() {
    let spec = load("my_ex_n2");
    let sat = saturate(&spec.pres, 6, &SaturateOptions::default()).unwrap();
    let pic = render_triangle(&sat.tower, 0, 6).unwrap();
    assert_eq!(pic, "a b c a b c a\nd e f d e f\nb c a b c\ne f d e\nc a b\nf d\na\n");
}

#[test]
fn single_leader_commutation() {
    let spec = load("a_k");
    let fo = first_order_reduction(&spec.pres).unwrap();
    let report = CommutationReport::compute(&spec, &fo).unwrap();
    assert_eq!(
        report.rows,
        ["d0(D1^3 x) - d1(D0 D1^2 x) = 0", "d0(D0 D1^2 x) - d1(D0^2 D1 x) = 0", "d0(D0^2 D1 x) = D1 x"]
    );
    assert!(report.soluble);
    let sys = fo.commutation_system().unwrap();
    assert!(matches!(sys.solve(&fo.tower), SolutionSpace::Solved { .. }));
}

#[test]
fn counterexample_forms() {
    let spec = load("hrushovski");
    let fo = first_order_reduction(&spec.pres).unwrap();
    let report = CommutationReport::compute(&spec, &fo).unwrap();
    assert_eq!(report.rows, ["d0(c) + (-2*c)*d1(c) = 0", "d0(c) = 2*c"]);
    assert_eq!(report.solution.as_deref(), Some(&["d0(c) = 2*c".to_string(), "d1(c) = 1".to_string()][..]));
}

#[test]
fn homogeneous_first_order_reduction() {
    let spec = load("my_ex_n2");
    let fo = first_order_reduction(&spec.pres).unwrap();
    let interior: Vec<&DerivIndex> = fo.tuple.iter().filter(|v| v.height() < 4).collect();
    assert_eq!(interior.len(), 10);
    assert_eq!(fo.assigned.len(), 10);
    for x in &fo.assigned {
        for i in 0..2 {
            assert_eq!(fo.assignments[&(i, (*x).clone())], fo.tower.slot_value(&x.inc(i)));
        }
    }
}

#[test]
fn witnesses_satisfy_the_commutation_system() {
    let mut checked = 0;
    for name in corpus_names() {
        let spec = load(&name);
        let Ok(fo) = first_order_reduction(&spec.pres) else { continue };
        let d = decide(&spec, &DecideOptions::default()).unwrap();
        if let Verdict::Soluble(w) = &d.verdict {
            assert!(fo.satisfied_by(&w.saturation.tower).unwrap(), "{name}");
            checked += 1;
        }
    }
    assert!(checked >= 3, "only {checked} witnesses");
}

#[test]
fn coherent_set_leaders() {
    let spec = load("sec43_two");
    let d = decide(&spec, &DecideOptions::default()).unwrap();
    let Verdict::Soluble(w) = &d.verdict else { panic!("{}", d.verdict.tag()) };
    assert_eq!(w.saturation.leaders().minimal, [slot(&[1, 1]), slot(&[0, 3]), slot(&[3, 0])]);
}

#[test]
fn variants_agree_on_the_corpus() {
    for name in ["my_ex_n2", "sec43", "a_k", "hrushovski", "my_ex1_n2"] {
        let spec = load(name);
        let tags: Vec<&str> = [Variant::Thm1, Variant::Thm2, Variant::Thm3]
            .into_iter()
            .map(|variant| {
                let d = decide(&spec, &DecideOptions { variant, ..DecideOptions::default() }).unwrap();
                d.verdict.tag()
            })
            .collect();
        assert!(tags.iter().all(|t| *t == tags[0]), "{name}: {tags:?}");
    }
}

#[test]
fn reports_match_the_schema() {
    let v = validator();
    for name in corpus_names() {
        let spec = load(&name);
        let d = decide(&spec, &DecideOptions::default()).unwrap();
        let report = serde_json::to_value(Report::from_decision(&d, spec.pres.m == 2)).unwrap();
        assert_valid(&v, &report, &name);
        if let Some(cert) = report.get("certificate").filter(|c| !c.is_null()) {
            assert!(replay_json(&cert.to_string()), "{name}");
        }
        let tower = Tower::from_presentation(&spec.pres).unwrap();
        let leaders = serde_json::to_value(LeadersReport::new(&spec, &tower, &spec.pres.validate())).unwrap();
        assert_valid(&v, &leaders, &format!("{name} leaders"));
        match saturate(&spec.pres, 3, &SaturateOptions::default()) {
            Ok(s) => assert_valid(&v, &serde_json::to_value(SaturationReport::ok(&spec, &s)).unwrap(), &name),
            Err(prolong::prolongation::SaturateError::Violation(x)) => {
                let doc = serde_json::to_value(SaturationReport::violation(&spec, 3, &x.steps)).unwrap();
                assert_valid(&v, &doc, &name)
            }
            Err(e) => panic!("{name}: {e}"),
        }
        if let Ok(fo) = first_order_reduction(&spec.pres) {
            let doc = serde_json::to_value(CommutationReport::compute(&spec, &fo).unwrap()).unwrap();
            assert_valid(&v, &doc, &format!("{name} commutation"));
        }
    }
    let bound = serde_json::to_value(BoundReport::compute(2, 1, 1).unwrap()).unwrap();
    assert_valid(&v, &bound, "bound");
    assert_eq!(bound["chain_bound"], "17");
    assert_eq!(bound["s"], "131072");
}

#[test]
fn schema_rejects_stray_fields() {
    let v = validator();
    let d = decide(&load("sec43"), &DecideOptions::default()).unwrap();
    let mut report = serde_json::to_value(Report::from_decision(&d, false)).unwrap();
    report["extra"] = Value::from(1);
    assert!(!v.is_valid(&report));
}
