use std::time::Instant;

use cofkit::lattice::{CrystalSystem, MonoclinicParams};
use cofkit::materials::preset;
use cofkit::report::*;
use cofkit::startwin::{branch_parameters, Branch, StarClass, TwinColumnAB};
use cofkit::Tolerances;

#[test]
fn zn_report_roundtrips() {
    let p = preset("ZnAuCu").unwrap().params.unwrap();
    let t = Instant::now();
    let r = analyze("ZnAuCu", CrystalSystem::Monoclinic, &p, AnalyzeOptions::default(), &Tolerances::default()).unwrap();
    println!("analyze {:?}", t.elapsed());
    let json = r.to_json().unwrap();
    assert_eq!(AnalysisReport::from_json(&json).unwrap(), r);
    assert_eq!(r.to_json().unwrap(), json);
    let s = r.summary.as_ref().unwrap();
    assert!((s.metric_type_ii - 2.1e-3).abs() < 0.15 * 2.1e-3);
    assert!(r.stars.iter().all(|s| s.skipped.is_some()));
    println!("{}", r.to_text());
}

#[test]
fn star_report_classifies() {
    let p = branch_parameters(Branch::S2c, 0.93, TwinColumnAB::A).unwrap();
    let t = Instant::now();
    let r = analyze("synthetic", CrystalSystem::Monoclinic, &p, AnalyzeOptions::default(), &Tolerances::default()).unwrap();
    println!("analyze {:?}", t.elapsed());
    assert!(r.stars.iter().any(|s| s.report.as_ref().is_some_and(|x| x.classification == StarClass::Star)));
    assert!(r.hull.iter().any(|h| h.connections == 22));
    assert_eq!(AnalysisReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    println!("{}", r.to_text());
}

#[test]
fn orthorhombic_report() {
    let p = MonoclinicParams::new(1.03, 0.021, 1.03, 0.95);
    let r = analyze("inline", CrystalSystem::Orthorhombic, &p, AnalyzeOptions::default(), &Tolerances::default()).unwrap();
    assert_eq!(r.variants.count, 6);
    assert_eq!(r.twin_table.rows.len(), 9);
}
