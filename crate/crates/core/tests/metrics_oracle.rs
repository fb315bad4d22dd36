//! Independent oracles for the metric implementations: a direct-formula
//! kappa evaluator and an exhaustive assignment matcher for span F1.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sde_core::{
    greedy_match_count, span_f1, weighted_kappa, ConfusionMatrix, MatchMode, SentimentLabel,
    SpanAnnotation, SpanRecord, WeightMatrix,
};

/// Direct transcription of the weighted-kappa definition, kept independent
/// of the library implementation.
fn kappa_oracle(counts: &[[u64; 4]; 4], weights: &[[f64; 4]; 4]) -> f64 {
    let n: u64 = counts.iter().flatten().sum();
    let nf = n as f64;
    let mut po = 0.0;
    for (i, row) in counts.iter().enumerate() {
        for (j, &cell) in row.iter().enumerate() {
            po += weights[i][j] * cell as f64;
        }
    }
    po /= nf;
    let mut pe = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let row: u64 = counts[i].iter().sum();
            let col: u64 = (0..4).map(|k| counts[k][j]).sum();
            pe += weights[i][j] * (row as f64 * col as f64);
        }
    }
    pe /= nf * nf;
    (po - pe) / (1.0 - pe)
}

fn random_counts(rng: &mut ChaCha8Rng) -> [[u64; 4]; 4] {
    let mut counts = [[0u64; 4]; 4];
    for row in counts.iter_mut() {
        for cell in row.iter_mut() {
            *cell = rng.gen_range(0..50);
        }
    }
    // Keep marginals non-degenerate.
    for (i, row) in counts.iter_mut().enumerate() {
        row[i] += 1;
    }
    counts
}

#[test]
fn kappa_matches_direct_formula_oracle_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let weights = WeightMatrix::default();
    for _ in 0..1000 {
        let counts = random_counts(&mut rng);
        let expected = kappa_oracle(&counts, &weights.0);
        let got = weighted_kappa(&ConfusionMatrix::from_counts(counts), &weights).unwrap();
        assert!(
            (got.kappa - expected).abs() <= 1e-12,
            "kappa {} vs oracle {expected} on {counts:?}",
            got.kappa
        );
    }
}

#[test]
fn kappa_is_at_most_one_and_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(555);
    let weights = WeightMatrix::default();
    for _ in 0..300 {
        let counts = random_counts(&mut rng);
        let got = weighted_kappa(&ConfusionMatrix::from_counts(counts), &weights).unwrap();
        assert!(got.kappa <= 1.0 + 1e-12);

        // Simultaneous identical permutation of labels in counts and weights.
        let perm = [2usize, 0, 3, 1];
        let mut pc = [[0u64; 4]; 4];
        let mut pw = [[0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                pc[i][j] = counts[perm[i]][perm[j]];
                pw[i][j] = weights.0[perm[i]][perm[j]];
            }
        }
        let permuted =
            weighted_kappa(&ConfusionMatrix::from_counts(pc), &WeightMatrix(pw)).unwrap();
        assert!(
            (permuted.kappa - got.kappa).abs() < 1e-12,
            "permutation changed kappa: {} vs {}",
            permuted.kappa,
            got.kappa
        );
    }
}

#[test]
fn statistically_independent_counts_give_zero_kappa_for_any_weights() {
    // p_ij = p_i. * p_.j exactly: outer product of integer marginals.
    let row = [2u64, 3, 1, 4];
    let col = [5u64, 1, 2, 2];
    let mut counts = [[0u64; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            counts[i][j] = row[i] * col[j];
        }
    }
    let conf = ConfusionMatrix::from_counts(counts);
    let got = weighted_kappa(&conf, &WeightMatrix::default()).unwrap();
    assert!(got.kappa.abs() < 1e-12, "kappa {}", got.kappa);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..100 {
        let mut w = [[0f64; 4]; 4];
        for (i, w_row) in w.iter_mut().enumerate() {
            for cell in w_row.iter_mut() {
                *cell = rng.gen_range(0.0..0.95);
            }
            w_row[i] = 1.0;
        }
        let got = weighted_kappa(&conf, &WeightMatrix(w)).unwrap();
        assert!(got.kappa.abs() < 1e-12, "kappa {} for weights {w:?}", got.kappa);
    }
}

// ------------------------------------------------------------------ F1 --

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn matches(gold: &(String, String), pred: &(String, String), mode: MatchMode) -> bool {
    if !gold.0.eq_ignore_ascii_case(&pred.0) {
        return false;
    }
    let g = normalize(&gold.1);
    let p = normalize(&pred.1);
    match mode {
        MatchMode::Hard => g == p,
        MatchMode::Soft => g.contains(&p) || p.contains(&g),
    }
}

/// Exhaustive maximum one-to-one assignment by recursion over gold spans.
fn exhaustive_match_count(
    gold: &[(String, String)],
    pred: &[(String, String)],
    mode: MatchMode,
) -> u64 {
    fn rec(
        gi: usize,
        used: &mut Vec<bool>,
        gold: &[(String, String)],
        pred: &[(String, String)],
        mode: MatchMode,
    ) -> u64 {
        if gi == gold.len() {
            return 0;
        }
        let mut best = rec(gi + 1, used, gold, pred, mode);
        for pi in 0..pred.len() {
            if !used[pi] && matches(&gold[gi], &pred[pi], mode) {
                used[pi] = true;
                best = best.max(1 + rec(gi + 1, used, gold, pred, mode));
                used[pi] = false;
            }
        }
        best
    }
    rec(0, &mut vec![false; pred.len()], gold, pred, mode)
}

const BASES: &[&str] = &[
    "interleukin receptor",
    "NF-kappa B",
    "T lymphocyte",
    "glucocorticoid",
    "BCL-2 promoter",
    "tyrosine kinase",
    "CD28 antigen",
    "zinc finger",
    "beta chain",
    "heat shock factor",
];
const TYPES: &[&str] = &["Protein", "DNA", "RNA"];
const PREFIX_WORDS: &[&str] = &["human", "activated", "the", "nuclear"];
const SUFFIX_WORDS: &[&str] = &["gene", "complex", "element", "subunit"];
const HALLUCINATIONS: &[&str] = &["auxiliary factor", "unknown item", "misc entity"];

struct Instance {
    gold: Vec<(String, String)>,
    pred: Vec<(String, String)>,
}

/// Realistic prediction noise over a gold instance: exact echoes, boundary
/// perturbations (prefix/suffix words or truncation), dropped spans,
/// type flips and hallucinated extras.
fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n_gold = rng.gen_range(0..=5usize);
    let mut base_idx: Vec<usize> = (0..BASES.len()).collect();
    for i in (1..base_idx.len()).rev() {
        let j = rng.gen_range(0..=i);
        base_idx.swap(i, j);
    }
    let mut gold = Vec::new();
    for &b in base_idx.iter().take(n_gold) {
        let t = TYPES[rng.gen_range(0..TYPES.len())];
        gold.push((t.to_string(), BASES[b].to_string()));
    }
    let mut pred = Vec::new();
    for (t, mention) in &gold {
        match rng.gen_range(0..100) {
            0..=39 => pred.push((t.clone(), mention.clone())),
            40..=69 => {
                let perturbed = match rng.gen_range(0..3) {
                    0 => format!("{} {mention}", PREFIX_WORDS[rng.gen_range(0..PREFIX_WORDS.len())]),
                    1 => format!("{mention} {}", SUFFIX_WORDS[rng.gen_range(0..SUFFIX_WORDS.len())]),
                    _ => mention
                        .split_whitespace()
                        .next()
                        .unwrap_or(mention)
                        .to_string(),
                };
                pred.push((t.clone(), perturbed));
            }
            70..=84 => {} // dropped
            _ => {
                let other = TYPES
                    .iter()
                    .find(|x| !x.eq_ignore_ascii_case(t))
                    .unwrap();
                pred.push((other.to_string(), mention.clone()));
            }
        }
    }
    for _ in 0..rng.gen_range(0..=2usize) {
        let t = TYPES[rng.gen_range(0..TYPES.len())];
        let m = HALLUCINATIONS[rng.gen_range(0..HALLUCINATIONS.len())];
        pred.push((t.to_string(), m.to_string()));
    }
    // Shuffle predictions so order carries no signal.
    for i in (1..pred.len()).rev() {
        let j = rng.gen_range(0..=i);
        pred.swap(i, j);
    }
    Instance { gold, pred }
}

#[test]
fn greedy_matcher_equals_exhaustive_oracle_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..1000 {
        let instance = random_instance(&mut rng);
        for mode in [MatchMode::Hard, MatchMode::Soft] {
            let greedy = greedy_match_count(&instance.gold, &instance.pred, mode);
            let oracle = exhaustive_match_count(&instance.gold, &instance.pred, mode);
            assert_eq!(
                greedy, oracle,
                "case {case} mode {mode:?}: greedy {greedy} vs oracle {oracle}\n\
                 gold: {:?}\npred: {:?}",
                instance.gold, instance.pred
            );
        }
    }
}

#[test]
fn hard_f1_never_exceeds_soft_f1() {
    let mut rng = ChaCha8Rng::seed_from_u64(314);
    for i in 0..1000 {
        let instance = random_instance(&mut rng);
        let gold = vec![SpanRecord {
            id: format!("r{i}"),
            text: String::new(),
            spans: instance
                .gold
                .iter()
                .map(|(t, m)| SpanAnnotation {
                    type_name: t.clone(),
                    mention: m.clone(),
                    start: None,
                    end: None,
                })
                .collect(),
        }];
        let preds = vec![(format!("r{i}"), instance.pred.clone())];
        let hard = span_f1(&gold, &preds, MatchMode::Hard).unwrap();
        let soft = span_f1(&gold, &preds, MatchMode::Soft).unwrap();
        assert!(
            hard.f1 <= soft.f1 + 1e-12,
            "case {i}: hard {} > soft {}",
            hard.f1,
            soft.f1
        );
    }
}

#[test]
fn hard_mode_greedy_is_optimal_even_on_adversarial_duplicates() {
    // Duplicated normalized mentions form complete bipartite blocks where
    // greedy always attains the maximum matching.
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for _ in 0..500 {
        let n = rng.gen_range(0..=5usize);
        let gold: Vec<(String, String)> = (0..n)
            .map(|_| {
                (
                    TYPES[rng.gen_range(0..2)].to_string(),
                    BASES[rng.gen_range(0..3)].to_string(),
                )
            })
            .collect();
        let m = rng.gen_range(0..=5usize);
        let pred: Vec<(String, String)> = (0..m)
            .map(|_| {
                (
                    TYPES[rng.gen_range(0..2)].to_string(),
                    BASES[rng.gen_range(0..3)].to_string(),
                )
            })
            .collect();
        let greedy = greedy_match_count(&gold, &pred, MatchMode::Hard);
        let oracle = exhaustive_match_count(&gold, &pred, MatchMode::Hard);
        assert_eq!(greedy, oracle);
    }
}

#[test]
fn sentiment_label_order_matches_matrix_convention() {
    assert_eq!(SentimentLabel::Positive.index(), 0);
    assert_eq!(SentimentLabel::Unmentioned.index(), 3);
}
