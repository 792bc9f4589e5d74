use std::path::Path;

use barhillel::correspondence::check_strong_equivalence;
use barhillel::{IntersectionGrammar, JoinBounds, Wcfg, Wfsa};

fn load(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn pair(stem: &str) -> (Wcfg, Wfsa) {
    let g = Wcfg::parse(&load(&format!("{stem}.wcfg")), None).unwrap();
    let a = Wfsa::parse(&load(&format!("{stem}.wfsa")), None).unwrap();
    (g, a)
}

#[test]
fn fixtures_round_trip_through_text() {
    for stem in ["cyclists", "eps_between", "eps_loop"] {
        let (g, a) = pair(stem);
        assert_eq!(Wcfg::parse(&g.to_text(), None).unwrap(), g, "{stem}");
        assert_eq!(Wfsa::parse(&a.to_text(), None).unwrap(), a, "{stem}");
    }
}

#[test]
fn trimmed_intersection_survives_text_and_provenance() {
    let (g, a) = pair("cyclists");
    let gc = IntersectionGrammar::intersect_general(&g, &a).unwrap().trim();
    let reparsed = Wcfg::parse(&gc.grammar().to_text(), None).unwrap();
    assert_eq!(&reparsed, gc.grammar());
    let families = barhillel::intersection::parse_provenance(&gc.provenance_text()).unwrap();
    assert_eq!(families.len(), gc.grammar().rules().len());
    for (i, (family, _)) in families.iter().enumerate() {
        assert_eq!(*family, gc.family(barhillel::RuleId(i)));
    }
    let d = reparsed.parse_bracketed(&load("cyclists.deriv")).unwrap();
    assert_eq!(d.size(), 18);
}

#[test]
fn strong_equivalence_on_cyclists_with_wider_bounds() {
    let (g, a) = pair("cyclists");
    let report = check_strong_equivalence(&g, &a, JoinBounds::new(9, 8)).unwrap();
    assert!(report.passed(), "{report}");
    assert!(report.join_pairs > 7);
}
