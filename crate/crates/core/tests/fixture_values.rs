//! Global A on the bundled fixture, frozen from an exact rational evaluation
//! (tools/fixture_oracle.py) of the same CSVs the `fixture` command writes.

use antifragility_core::fixture;
use antifragility_core::{analyze, AnalysisOptions, MarketKind};

const TOL: f64 = 1e-12;

type Expected = (&'static str, &'static str, u8, f64, usize);

const STOCK: &[Expected] = &[
    ("AAA", "afp", 0, 0.06875, 4),
    ("BBB", "afp", 0, 0.0, 4),
    ("CCC", "afp", 0, -0.0875, 3),
    ("AAA", "afv", 0, 0.018819444444444444, 4),
    ("BBB", "afv", 0, 0.0, 4),
    ("CCC", "afv", 0, -0.10082671957671957, 3),
    ("AAA", "afx", 0, 0.24375, 4),
    ("BBB", "afx", 0, 0.0, 4),
    ("CCC", "afx", 0, 0.03125, 3),
    ("AAA", "af3m", 0, 0.11206944444444444, 4),
    ("BBB", "af3m", 0, 0.0, 4),
    ("CCC", "af3m", 0, -0.12390046296296296, 3),
    ("AAA", "afp", 1, 0.06875, 4),
    ("BBB", "afp", 1, 0.0, 4),
    ("CCC", "afp", 1, -0.0875, 3),
    ("AAA", "afv", 1, 0.018819444444444444, 4),
    ("BBB", "afv", 1, 0.0, 4),
    ("CCC", "afv", 1, -0.10082671957671957, 3),
    ("AAA", "afx", 1, 0.24375, 4),
    ("BBB", "afx", 1, 0.0, 4),
    ("CCC", "afx", 1, 0.03125, 3),
    ("AAA", "af3m", 1, 0.11206944444444444, 4),
    ("BBB", "af3m", 1, 0.0, 4),
    ("CCC", "af3m", 1, -0.12390046296296296, 3),
    ("AAA", "afp", 2, 0.17708333333333334, 2),
    ("BBB", "afp", 2, 0.0, 2),
    ("CCC", "afp", 2, -0.16145833333333334, 2),
    ("AAA", "afv", 2, 0.16773897058823528, 2),
    ("BBB", "afv", 2, 0.0, 2),
    ("CCC", "afv", 2, -0.13809742647058823, 2),
    ("AAA", "afx", 2, 0.375, 2),
    ("BBB", "afx", 2, 0.0, 2),
    ("CCC", "afx", 2, -0.1875, 2),
    ("AAA", "af3m", 2, 0.4388888888888889, 2),
    ("BBB", "af3m", 2, 0.0, 2),
    ("CCC", "af3m", 2, -0.3472222222222222, 2),
];

const CRYPTO: &[Expected] = &[
    ("AAA", "afp", 0, 0.2517857142857143, 4),
    ("BBB", "afp", 0, 0.0, 4),
    ("CCC", "afp", 0, 0.11607142857142858, 3),
    ("AAA", "afv", 0, 0.062103174603174605, 4),
    ("BBB", "afv", 0, 0.0, 4),
    ("CCC", "afv", 0, -0.23677248677248677, 3),
    ("AAA", "afn", 0, 0.03388888888888889, 3),
    ("BBB", "afn", 0, 0.0, 3),
    ("CCC", "afn", 0, -0.10520833333333333, 3),
    ("AAA", "afm", 0, 0.07083333333333333, 4),
    ("BBB", "afm", 0, 0.0, 4),
    ("CCC", "afm", 0, -0.09365354938271606, 3),
    ("AAA", "afp", 1, 0.2517857142857143, 4),
    ("BBB", "afp", 1, 0.0, 4),
    ("CCC", "afp", 1, 0.11607142857142858, 3),
    ("AAA", "afv", 1, 0.062103174603174605, 4),
    ("BBB", "afv", 1, 0.0, 4),
    ("CCC", "afv", 1, -0.23677248677248677, 3),
    ("AAA", "afn", 1, 0.03388888888888889, 3),
    ("BBB", "afn", 1, 0.0, 3),
    ("CCC", "afn", 1, -0.10520833333333333, 3),
    ("AAA", "afm", 1, 0.07083333333333333, 4),
    ("BBB", "afm", 1, 0.0, 4),
    ("CCC", "afm", 1, -0.09365354938271606, 3),
    ("AAA", "afp", 2, 0.375, 2),
    ("BBB", "afp", 2, 0.0, 2),
    ("CCC", "afp", 2, -0.1875, 2),
    ("AAA", "afv", 2, 0.39797794117647056, 2),
    ("BBB", "afv", 2, 0.0, 2),
    ("CCC", "afv", 2, -0.33869485294117646, 2),
    ("AAA", "afn", 2, 0.21875, 1),
    ("BBB", "afn", 2, 0.0, 1),
    ("CCC", "afn", 2, -0.109375, 1),
    ("AAA", "afm", 2, 0.19212962962962962, 2),
    ("BBB", "afm", 2, 0.0, 2),
    ("CCC", "afm", 2, -0.15393518518518517, 2),
];

fn check(kind: MarketKind, expected: &[Expected]) {
    let dataset = fixture::dataset(kind);
    let opts = AnalysisOptions::new(kind, vec![fixture::window()]);
    let run = analyze(&dataset, &opts).unwrap();
    assert_eq!(run.results.len(), expected.len());
    for &(agent, measure, scale, global, n_used) in expected {
        let r = run
            .results
            .iter()
            .find(|r| {
                r.agent_id == agent && r.measure.as_str() == measure && r.scale.code() == scale
            })
            .unwrap_or_else(|| panic!("missing {agent} {measure} {scale}"));
        assert!(
            (r.global - global).abs() <= TOL,
            "{agent} {measure} {scale}: {} vs {global}",
            r.global
        );
        assert_eq!(r.n_used, n_used, "{agent} {measure} {scale}");
    }
}

#[test]
fn stock_fixture_matches_reference() {
    check(MarketKind::Stock, STOCK);
}

#[test]
fn crypto_fixture_matches_reference() {
    check(MarketKind::Crypto, CRYPTO);
}

#[test]
fn constant_agent_is_exactly_robust_on_fixture() {
    for kind in [MarketKind::Stock, MarketKind::Crypto] {
        let run = analyze(
            &fixture::dataset(kind),
            &AnalysisOptions::new(kind, vec![fixture::window()]),
        )
        .unwrap();
        for r in run.results.iter().filter(|r| r.agent_id == "BBB") {
            assert_eq!(r.global, 0.0);
        }
    }
}
