use proptest::prelude::*;

use soundscape_eval::circumplex::Attribute;
use soundscape_eval::dataset::thai_candidates;
use soundscape_eval::ingest::responses_to_csv;
use soundscape_eval::pipeline::{analyze, RunConfig};
use soundscape_eval::questionnaire::{generate_items, CandidateTranslation};
use soundscape_eval::report::{
    assign_markers, distributions, emit_score_table, emit_test_table, recommend, sorted_posthoc,
    Glyphs, Layout, Marker, OutputFormat, ReportError, TestFamily, Thresholds,
};
use soundscape_eval::scoring::{Criterion, ScoreSummary};
use soundscape_eval::stats::{OmnibusResult, PosthocResult};
use soundscape_eval::synthetic;

const T: Thresholds = Thresholds {
    strong: 0.01,
    weak: 0.05,
};

fn omnibus(p: f64) -> OmnibusResult {
    OmnibusResult {
        h: 10.0,
        df: 2,
        p,
        significant_5pct: p < 0.05,
        tie_correction: 1.0,
        n_total: 30,
    }
}

/// Family over `ids` whose means decrease in listed order; `pairs` are
/// (hi, lo, p_adj) by index.
fn family(
    attribute: Attribute,
    criterion: Criterion,
    ids: &[&str],
    pairs: Option<&[(usize, usize, f64)]>,
) -> TestFamily {
    let means: Vec<f64> = (0..ids.len()).map(|i| 0.9 - 0.1 * i as f64).collect();
    let posthoc = pairs.map(|ps| {
        ps.iter()
            .map(|&(hi, lo, p)| PosthocResult {
                hi: ids[hi].into(),
                lo: ids[lo].into(),
                hi_index: hi,
                lo_index: lo,
                t_stat: 3.0,
                p_raw: p,
                p_adj: p,
                reject_1pct: p < 0.01,
                reject_5pct: p < 0.05,
            })
            .collect()
    });
    TestFamily {
        attribute,
        criterion,
        candidates: ids.iter().map(|s| s.to_string()).collect(),
        means,
        omnibus: omnibus(if pairs.is_some() { 0.001 } else { 0.3 }),
        posthoc,
    }
}

fn summaries(f: &TestFamily) -> Vec<ScoreSummary> {
    f.candidates
        .iter()
        .zip(&f.means)
        .map(|(id, &m)| ScoreSummary {
            candidate_id: id.clone(),
            attribute: f.attribute,
            criterion: f.criterion,
            score: m,
            n: 31,
            weighted: false,
        })
        .collect()
}

fn markers(f: &TestFamily) -> Vec<Marker> {
    assign_markers(&summaries(f), std::slice::from_ref(f), &T)
        .unwrap()
        .into_iter()
        .map(|m| m.marker)
        .collect()
}

#[test]
fn dominant_candidate_gets_double_star_and_losers_nothing() {
    let f = family(
        Attribute::Pleasant,
        Criterion::UNDR,
        &["a", "b", "c"],
        Some(&[(0, 1, 0.0004), (0, 2, 0.0009), (1, 2, 0.049)]),
    );
    assert_eq!(
        markers(&f),
        vec![
            Marker::DoubleStar,
            Marker::Partial { opus: 0, plus: 1 },
            Marker::Nothing
        ]
    );
    let f = family(
        Attribute::Pleasant,
        Criterion::UNDR,
        &["a", "b", "c"],
        Some(&[(0, 1, 0.0004), (0, 2, 0.0009), (1, 2, 0.5)]),
    );
    assert_eq!(
        markers(&f),
        vec![Marker::DoubleStar, Marker::Nothing, Marker::Nothing]
    );
}

#[test]
fn non_significant_omnibus_gives_no_markers() {
    let f = family(Attribute::Calm, Criterion::APPR, &["a", "b", "c"], None);
    assert!(markers(&f).iter().all(|m| *m == Marker::Nothing));
}

#[test]
fn two_candidates_mark_only_the_winner() {
    let f = family(
        Attribute::Annoying,
        Criterion::APPR,
        &["an-1", "an-2"],
        Some(&[(0, 1, 0.0001)]),
    );
    assert_eq!(markers(&f), vec![Marker::DoubleStar, Marker::Nothing]);
    let f = family(
        Attribute::Annoying,
        Criterion::APPR,
        &["an-1", "an-2"],
        Some(&[(0, 1, 0.03)]),
    );
    assert_eq!(markers(&f), vec![Marker::Star, Marker::Nothing]);
    let f = family(
        Attribute::Annoying,
        Criterion::APPR,
        &["an-1", "an-2"],
        Some(&[(0, 1, 0.2)]),
    );
    assert_eq!(markers(&f), vec![Marker::Nothing, Marker::Nothing]);
}

#[test]
fn star_versus_double_star_and_partial_counts() {
    let ids = ["a", "b", "c", "d"];
    let all_weak = [
        (0, 1, 0.005),
        (0, 2, 0.02),
        (0, 3, 0.04),
        (1, 2, 0.9),
        (1, 3, 0.9),
        (2, 3, 0.9),
    ];
    let f = family(Attribute::Vibrant, Criterion::APPR, &ids, Some(&all_weak));
    assert_eq!(markers(&f)[0], Marker::Star);
    assert!(assign_markers(&summaries(&f), std::slice::from_ref(&f), &T).unwrap()[0].bold);

    let mixed = [
        (0, 1, 0.005),
        (0, 2, 0.02),
        (0, 3, 0.4),
        (1, 2, 0.001),
        (1, 3, 0.9),
        (2, 3, 0.9),
    ];
    let f = family(Attribute::Vibrant, Criterion::APPR, &ids, Some(&mixed));
    let m = markers(&f);
    assert_eq!(m[0], Marker::Partial { opus: 1, plus: 1 });
    assert_eq!(m[1], Marker::Partial { opus: 1, plus: 0 });
    assert_eq!(m[2], Marker::Nothing);
    assert_eq!(m[0].render(Glyphs::Unicode), "\u{2295}1+1");
    assert_eq!(m[0].render(Glyphs::Ascii), "o1+1");
}

#[test]
fn unknown_candidate_in_posthoc_is_rejected() {
    let mut f = family(
        Attribute::Calm,
        Criterion::APPR,
        &["a", "b"],
        Some(&[(0, 1, 0.001)]),
    );
    f.posthoc.as_mut().unwrap()[0].hi = "zz".into();
    assert!(matches!(
        assign_markers(&summaries(&f), std::slice::from_ref(&f), &T),
        Err(ReportError::InconsistentFamily { .. })
    ));
}

proptest! {
    #[test]
    fn markers_depend_only_on_rejection_pattern(
        ps in prop::collection::vec(prop::sample::select(vec![0.0001, 0.003, 0.02, 0.045, 0.3, 1.0]), 6),
        rot in 0usize..4,
    ) {
        let ids = ["a", "b", "c", "d"];
        let mut pairs = Vec::new();
        let mut it = ps.iter();
        for i in 0..4 {
            for j in (i + 1)..4 {
                pairs.push((ids[i], ids[j], *it.next().unwrap()));
            }
        }
        let build = |order: &[&str]| {
            let idx = |s: &str| order.iter().position(|x| *x == s).unwrap();
            let mapped: Vec<(usize, usize, f64)> = pairs.iter().map(|&(h, l, p)| (idx(h), idx(l), p)).collect();
            let f = family(Attribute::Chaotic, Criterion::CLAR, order, Some(&mapped));
            let marked = assign_markers(&summaries(&f), std::slice::from_ref(&f), &T).unwrap();
            let mut v: Vec<(String, Marker)> = marked.into_iter().map(|m| (m.candidate_id, m.marker)).collect();
            v.sort_by(|a, b| a.0.cmp(&b.0));
            v
        };
        let mut order = ids.to_vec();
        let base = build(&order);
        order.rotate_left(rot);
        order.swap(0, 3);
        prop_assert_eq!(build(&order), base);
    }
}

fn cands(attr: Attribute, n: usize) -> Vec<CandidateTranslation> {
    (0..n)
        .map(|i| CandidateTranslation::new(format!("c{i}"), attr, format!("t{i}")))
        .collect()
}

#[test]
fn score_table_layouts() {
    let main = family(
        Attribute::Pleasant,
        Criterion::APPR,
        &["c0", "c1"],
        Some(&[(0, 1, 0.0001)]),
    );
    let mut marked = assign_markers(&summaries(&main), std::slice::from_ref(&main), &T).unwrap();
    marked[1].score = 0.8675;
    let text = emit_score_table(
        &marked,
        &cands(Attribute::Pleasant, 2),
        Layout::MainAxes,
        OutputFormat::Text,
        Glyphs::Unicode,
    )
    .unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(
        &header[2..],
        &["APPR", "UNDR", "CLAR", "ANTO", "ORTH", "NCON", "IBAL"]
    );
    assert!(text.contains("**0.900"));
    assert!(text.contains("0.868"));

    let derived = family(Attribute::Calm, Criterion::CONN, &["c0", "c1"], None);
    let dm = assign_markers(&summaries(&derived), std::slice::from_ref(&derived), &T).unwrap();
    let text = emit_score_table(
        &dm,
        &cands(Attribute::Calm, 2),
        Layout::DerivedAxes,
        OutputFormat::Text,
        Glyphs::Unicode,
    )
    .unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(&header[2..], &["APPR", "UNDR", "CLAR", "CONN", "IBAL"]);

    let mut bad = marked.clone();
    bad[0].criterion = Criterion::CONN;
    assert!(matches!(
        emit_score_table(
            &bad,
            &cands(Attribute::Pleasant, 2),
            Layout::MainAxes,
            OutputFormat::Csv,
            Glyphs::Unicode
        ),
        Err(ReportError::LayoutMismatch { .. })
    ));
}

#[test]
fn test_table_ordering_and_display() {
    let f = family(
        Attribute::Eventful,
        Criterion::UNDR,
        &["c0", "c1", "c2"],
        Some(&[(0, 1, 0.03), (0, 2, 0.0004), (1, 2, 0.99999)]),
    );
    let quiet = family(
        Attribute::Eventful,
        Criterion::APPR,
        &["c0", "c1", "c2"],
        None,
    );
    let c = cands(Attribute::Eventful, 3);
    let text = emit_test_table(&[quiet.clone(), f.clone()], &c, &T, OutputFormat::Text);
    let blocks: Vec<&str> = text.split("\n\n").collect();
    assert!(blocks[0].contains("no posthoc"));
    assert!(!blocks[0].contains(" vs "));
    let rows: Vec<&str> = blocks[1].lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].contains("<0.001") && rows[0].contains("**"));
    assert!(rows[1].contains("0.0300") && rows[1].trim_end().ends_with('*'));
    assert!(rows[2].contains("\u{2248}1.000"));
    assert!(rows[0].trim_start().starts_with("t0"));

    let csv = emit_test_table(&[quiet, f], &c, &T, OutputFormat::Csv);
    assert_eq!(csv.lines().filter(|l| l.starts_with("posthoc,")).count(), 3);
}

#[test]
fn pipeline_test_tables_are_sorted_and_oriented() {
    let candidates = thai_candidates();
    let items = generate_items(&candidates, "Thai").unwrap();
    for seed in 0..4 {
        let doc = responses_to_csv(&synthetic::random_responses(&items, 31, seed));
        let a = analyze(&candidates, &doc, None, &RunConfig::default()).unwrap();
        for f in &a.families {
            let rows = sorted_posthoc(f);
            for w in rows.windows(2) {
                assert!(w[0].p_adj <= w[1].p_adj);
            }
            for r in rows {
                assert!(f.means[r.hi_index] >= f.means[r.lo_index]);
            }
            assert_eq!(f.posthoc.is_some(), f.omnibus.p < 0.05);
        }
        let render = |a: &soundscape_eval::pipeline::Analysis| a.artifacts().unwrap();
        assert_eq!(
            render(&a),
            render(&analyze(&candidates, &doc, None, &RunConfig::default()).unwrap())
        );
    }
}

#[test]
fn distribution_bins_sum_to_participants() {
    let candidates = thai_candidates();
    let items = generate_items(&candidates, "Thai").unwrap();
    let d = distributions(&synthetic::random_responses(&items, 31, 9), &items);
    assert_eq!(d.len(), 178);
    assert!(d
        .iter()
        .all(|x| x.bins.iter().sum::<usize>() == 31 && x.n == 31));
}

fn recommend_fixture(
    families: &[TestFamily],
    n: usize,
    attr: Attribute,
) -> soundscape_eval::report::RecommendationReport {
    let sums: Vec<ScoreSummary> = families.iter().flat_map(summaries).collect();
    let marked = assign_markers(&sums, families, &T).unwrap();
    recommend(attr, &cands(attr, n), &marked, families, &T)
}

#[test]
fn recommendation_prefers_significant_dominance() {
    let ids = ["c0", "c1", "c2"];
    let mut fams = vec![family(
        Attribute::Pleasant,
        Criterion::UNDR,
        &["c2", "c0", "c1"],
        Some(&[(0, 1, 0.0001), (0, 2, 0.0002), (1, 2, 0.8)]),
    )];
    for &crit in Criterion::applicable(Attribute::Pleasant)
        .iter()
        .filter(|c| **c != Criterion::UNDR)
    {
        fams.push(family(Attribute::Pleasant, crit, &ids, None));
    }
    let rep = recommend_fixture(&fams, 3, Attribute::Pleasant);
    assert_eq!(rep.entries[0].candidate_id, "c2");
    assert_eq!(
        rep.entries[0].strengths[0].rationale,
        "UNDR: significantly better than all"
    );
    assert!(!rep.no_significant_differences);
    assert!(rep.disclaimer.contains("Decision support"));
}

#[test]
fn recommendation_fallback_and_ties() {
    let fams: Vec<TestFamily> = Criterion::applicable(Attribute::Calm)
        .iter()
        .map(|&c| family(Attribute::Calm, c, &["c0", "c1", "c2"], None))
        .collect();
    let rep = recommend_fixture(&fams, 3, Attribute::Calm);
    assert!(rep.no_significant_differences);
    let order: Vec<&str> = rep
        .entries
        .iter()
        .map(|e| e.candidate_id.as_str())
        .collect();
    assert_eq!(order, ["c0", "c1", "c2"]);

    let mut tied: Vec<TestFamily> = fams.clone();
    for f in &mut tied {
        f.means = vec![0.5; 3];
    }
    let rep = recommend_fixture(&tied, 3, Attribute::Calm);
    let order: Vec<&str> = rep
        .entries
        .iter()
        .map(|e| e.candidate_id.as_str())
        .collect();
    assert_eq!(order, ["c0", "c1", "c2"]);
    assert!(rep.entries.iter().all(|e| e.tied && e.rank == 1));
}
