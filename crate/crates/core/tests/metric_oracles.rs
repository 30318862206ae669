//! Ranking metrics and k-NN against brute-force reimplementations.

use std::collections::BTreeSet;

use corder_core::evalkit::{average_precision, knn, map, mrr, precision_at_k, reciprocal_rank, RetrievalIndex};
use corder_core::numerics::Pcg32;

struct Ranking {
    ranked: Vec<String>,
    relevant: BTreeSet<String>,
    target: String,
}

fn random_ranking(rng: &mut Pcg32) -> Ranking {
    let universe = 1 + rng.index(30);
    let mut ids: Vec<String> = (0..universe).map(|i| format!("d{i}")).collect();
    rng.shuffle(&mut ids);
    let shown = rng.index(universe + 1);
    let relevant: BTreeSet<String> = (0..universe).filter(|_| rng.index(3) == 0).map(|i| format!("d{i}")).collect();
    let target = format!("d{}", rng.index(universe));
    Ranking { ranked: ids[..shown].to_vec(), relevant, target }
}

fn rankings() -> Vec<Ranking> {
    let mut rng = Pcg32::seeded(7);
    (0..1000).map(|_| random_ranking(&mut rng)).collect()
}

fn oracle_rr(r: &Ranking) -> f64 {
    for i in 0..r.ranked.len() {
        if r.ranked[i] == r.target {
            return 1.0 / (i as f64 + 1.0);
        }
    }
    0.0
}

/// Precision at each relevant position, written out as counts over prefixes.
fn oracle_ap(r: &Ranking, cutoff: usize) -> f64 {
    let n = r.ranked.len().min(cutoff);
    let mut sum = 0.0;
    for i in 0..n {
        if r.relevant.contains(&r.ranked[i]) {
            let prefix_hits = r.ranked[..=i].iter().filter(|id| r.relevant.contains(*id)).count();
            sum += prefix_hits as f64 / (i + 1) as f64;
        }
    }
    let denom = r.relevant.len().min(cutoff);
    if denom == 0 { 0.0 } else { sum / denom as f64 }
}

fn oracle_p(r: &Ranking, k: usize) -> f64 {
    let mut hits = 0;
    for i in 0..k {
        if i < r.ranked.len() && r.relevant.contains(&r.ranked[i]) {
            hits += 1;
        }
    }
    hits as f64 / k as f64
}

#[test]
fn per_query_metrics_match() {
    for r in rankings() {
        assert!((reciprocal_rank(&r.ranked, &r.target) - oracle_rr(&r)).abs() <= 1e-12);
        for cutoff in [1, 5, 10, 50] {
            assert!((average_precision(&r.ranked, &r.relevant, cutoff) - oracle_ap(&r, cutoff)).abs() <= 1e-12);
        }
    }
}

#[test]
fn aggregate_metrics_match() {
    let rs = rankings();
    let results: Vec<Vec<String>> = rs.iter().map(|r| r.ranked.clone()).collect();
    let targets: Vec<String> = rs.iter().map(|r| r.target.clone()).collect();
    let relevant: Vec<BTreeSet<String>> = rs.iter().map(|r| r.relevant.clone()).collect();
    let n = rs.len() as f64;
    let want = rs.iter().map(oracle_rr).sum::<f64>() / n;
    assert!((mrr(&results, &targets).unwrap() - want).abs() <= 1e-12);
    for k in [1, 3, 10] {
        let want = rs.iter().map(|r| oracle_ap(r, k)).sum::<f64>() / n;
        assert!((map(&results, &relevant, k).unwrap() - want).abs() <= 1e-12);
        let want = rs.iter().map(|r| oracle_p(r, k)).sum::<f64>() / n;
        assert!((precision_at_k(&results, &relevant, k).unwrap() - want).abs() <= 1e-12);
    }
}

fn cos(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na * nb == 0.0 { 0.0 } else { dot / (na * nb) }
}

#[test]
fn knn_matches_linear_scan() {
    let mut rng = Pcg32::seeded(11);
    for round in 0..20 {
        let dim = 1 + rng.index(6);
        let mut index = RetrievalIndex::new(dim);
        let mut stored = Vec::new();
        for i in 0..200 {
            // Small integer coordinates force exact score ties.
            let v: Vec<f64> = (0..dim).map(|_| rng.range_i64(-2, 2) as f64).collect();
            let id = format!("r{round}-{i:03}");
            index.insert(id.clone(), v.clone()).unwrap();
            stored.push((id, v));
        }
        let q: Vec<f64> = (0..dim).map(|_| rng.range_i64(-2, 2) as f64).collect();
        let mut want: Vec<(String, f64)> = stored.iter().map(|(id, v)| (id.clone(), cos(&q, v))).collect();
        // Selection sort: best score first, smallest id on ties.
        for i in 0..want.len() {
            let mut best = i;
            for j in i + 1..want.len() {
                let better = want[j].1 > want[best].1 || (want[j].1 == want[best].1 && want[j].0 < want[best].0);
                if better {
                    best = j;
                }
            }
            want.swap(i, best);
        }
        let got = knn(&index, &q, 10).unwrap();
        assert_eq!(got.ids(), want[..10].iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());
        for ((_, g), (_, w)) in got.hits.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-12);
        }
    }
}
