//! BM25 ranking checked against a scorer that never touches the inverted index.

use proptest::prelude::*;
use sentiscope_core::index::{tokenize, Bm25Params, InvertedIndex, RankedHit, MAX_RESULTS};

/// Brute-force BM25: counts terms straight from the token lists.
fn oracle_scores(docs: &[(String, String)], query: &str, params: Bm25Params) -> Vec<(usize, f64)> {
    let tokens: Vec<Vec<String>> = docs.iter().map(|(_, t)| tokenize(t)).collect();
    let n = docs.len() as f64;
    let avgdl = tokens.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut terms: Vec<String> = Vec::new();
    for t in tokenize(query) {
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    let mut out = Vec::new();
    for (d, toks) in tokens.iter().enumerate() {
        let mut score = 0.0;
        let mut matched = false;
        for term in &terms {
            let tf = toks.iter().filter(|t| *t == term).count();
            if tf == 0 {
                continue;
            }
            matched = true;
            let df = tokens.iter().filter(|ts| ts.contains(term)).count() as f64;
            let idf = libm::log(1.0 + (n - df + 0.5) / (df + 0.5));
            let ratio = if avgdl > 0.0 { toks.len() as f64 / avgdl } else { 1.0 };
            let tf = tf as f64;
            score += idf * tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * ratio));
        }
        if matched {
            out.push((d, score));
        }
    }
    out
}

fn oracle_search(docs: &[(String, String)], query: &str, limit: usize, params: Bm25Params) -> Vec<(String, f64)> {
    let mut scored = oracle_scores(docs, query, params);
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| docs[a.0].0.cmp(&docs[b.0].0))
    });
    scored.truncate(limit);
    scored.into_iter().map(|(d, s)| (docs[d].0.clone(), s)).collect()
}

fn build(docs: &[(String, String)]) -> InvertedIndex {
    InvertedIndex::from_texts(docs.iter().cloned()).unwrap()
}

fn three_docs() -> Vec<(String, String)> {
    vec![
        ("d0".into(), "war peace".into()),
        ("d1".into(), "war war war".into()),
        ("d2".into(), "peace".into()),
    ]
}

#[test]
fn three_document_hand_evaluation() {
    let docs = three_docs();
    let idx = build(&docs);
    let p = Bm25Params::default();
    // idf(war) = ln(1 + 1.5/2.5); avgdl = 2
    let s1 = idx.score_bm25(&["war"], 1, p);
    let s0 = idx.score_bm25(&["war"], 0, p);
    assert!((s1 - 0.6671019253810441).abs() < 1e-12);
    assert!((s0 - 0.47000362924573563).abs() < 1e-12);
    assert_eq!(idx.score_bm25(&["war"], 2, p), 0.0);
    assert!(s1 > s0);

    let r = idx.search("war", MAX_RESULTS, p).unwrap();
    let ids: Vec<&str> = r.hits.iter().map(|h| h.doc_id.as_str()).collect();
    assert_eq!(ids, ["d1", "d0"]);
    assert_eq!(r.hits[0].rank, 1);
    assert_eq!(r.hits[1].rank, 2);
}

#[test]
fn cap_of_two_hundred() {
    let docs: Vec<(String, String)> = (0..250)
        .map(|i| (format!("doc{i:03}"), format!("war {}", "filler ".repeat(i % 7))))
        .collect();
    let idx = build(&docs);
    let r = idx.search("war", MAX_RESULTS, Bm25Params::default()).unwrap();
    assert_eq!(r.total_matches, 250);
    assert_eq!(r.hits.len(), 200);
    let expected = oracle_search(&docs, "war", 200, Bm25Params::default());
    let got: Vec<(String, f64)> = r.hits.iter().map(|h| (h.doc_id.clone(), h.bm25_score)).collect();
    assert_eq!(got, expected);
}

const VOCAB: &[&str] = &["war", "peace", "art", "europe", "music", "crime", "love", "river"];

fn corpus_strategy() -> impl Strategy<Value = Vec<(String, String)>> {
    prop::collection::vec(prop::collection::vec(0..VOCAB.len(), 0..12), 1..=50).prop_map(|docs| {
        docs.into_iter()
            .enumerate()
            // ids deliberately not in ordinal order so tie-breaking is exercised
            .map(|(i, words)| {
                let text = words.iter().map(|&w| VOCAB[w]).collect::<Vec<_>>().join(" ");
                (format!("id{:02}", (i * 37) % 101), text)
            })
            .collect()
    })
}

fn query_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(0..VOCAB.len() + 1, 1..4).prop_map(|ws| {
        ws.iter()
            .map(|&w| VOCAB.get(w).copied().unwrap_or("zzz"))
            .collect::<Vec<_>>()
            .join(" ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn search_matches_brute_force(
        docs in corpus_strategy(),
        query in query_strategy(),
        limit in 1usize..60,
        k1 in 0.0f64..3.0,
        b in 0.0f64..=1.0,
    ) {
        let idx = build(&docs);
        let params = Bm25Params::new(k1, b).unwrap();
        let r = idx.search(&query, limit, params).unwrap();
        let got: Vec<(String, f64)> = r.hits.iter().map(|h| (h.doc_id.clone(), h.bm25_score)).collect();
        prop_assert_eq!(got, oracle_search(&docs, &query, limit, params));
        prop_assert!(r.hits.iter().enumerate().all(|(i, h)| h.rank == i + 1));
        prop_assert!(r.hits.iter().all(|h| h.bm25_score.is_finite() && h.bm25_score >= 0.0));
    }

    #[test]
    fn limit_only_truncates(docs in corpus_strategy(), query in query_strategy(), limit in 1usize..20) {
        let idx = build(&docs);
        let p = Bm25Params::default();
        let full: Vec<RankedHit> = idx.search(&query, MAX_RESULTS, p).unwrap().hits;
        let short = idx.search(&query, limit, p).unwrap().hits;
        prop_assert_eq!(&full[..short.len()], &short[..]);
        prop_assert_eq!(short.len(), limit.min(full.len()));
    }

    #[test]
    fn score_monotone_in_term_frequency(
        extra in 0usize..6,
        tf in 1usize..6,
        others in prop::collection::vec(0usize..8, 1..10),
        k1 in 0.0f64..3.0,
        b in 0.0f64..=1.0,
    ) {
        // same document length, one more occurrence of the query term
        let filler = |n: usize| "pad ".repeat(n);
        let rest: String = others.iter().map(|&w| VOCAB[w]).collect::<Vec<_>>().join(" ");
        let make = |tf: usize| vec![
            ("a".to_string(), format!("{} {} {}", "war ".repeat(tf), filler(extra + 1), rest)),
            ("b".to_string(), "war peace".to_string()),
            ("c".to_string(), rest.clone()),
        ];
        let lo_docs = make(tf);
        let hi_docs: Vec<(String, String)> = {
            let mut d = make(tf + 1);
            d[0].1 = format!("{} {} {}", "war ".repeat(tf + 1), filler(extra), rest);
            d
        };
        let p = Bm25Params::new(k1, b).unwrap();
        let lo = build(&lo_docs).score_bm25(&["war"], 0, p);
        let hi = build(&hi_docs).score_bm25(&["war"], 0, p);
        prop_assert!(hi >= lo, "tf {} -> {}: {} < {}", tf, tf + 1, hi, lo);
    }
}

#[test]
fn index_invariants_hold() {
    let docs = three_docs();
    let idx = build(&docs);
    for (_, postings) in idx.terms() {
        assert!(postings.windows(2).all(|w| w[0].doc < w[1].doc));
        assert!(postings.iter().all(|p| (p.doc as usize) < idx.doc_count()));
    }
    let mean = idx.doc_lengths().iter().map(|&l| f64::from(l)).sum::<f64>() / idx.doc_count() as f64;
    assert!((idx.avg_doc_length() - mean).abs() < 1e-9);
}
