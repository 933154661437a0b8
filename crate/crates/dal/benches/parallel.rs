//! Oracle comparison throughput: the shipped fanout (rayon under the
//! `parallel` feature) against a plain sequential loop doing identical
//! per-formula work. On a single core the two should be close; the
//! fanout pays a small coordination tax and buys wall-clock time on
//! multi-core machines. `cargo bench -p dal` runs both.

use criterion::{criterion_group, criterion_main, Criterion};
use dal::corpus::{compare_corpus, corpus_signature, generate_corpus, CorpusSpec};
use dal::semantics::{eval, find_model, validate_model, Bounds, World};
use dal::tableau::{check_sat, Premise, ProverConfig, Verdict};
use dal::syntax::{Formula, Signature};

/// The per-formula work of `compare_corpus` with no fanout.
fn compare_sequentially(
    formulas: &[Formula],
    sig: &Signature,
    bounds: &Bounds,
    cfg: &ProverConfig,
) -> Vec<(bool, bool, Option<bool>)> {
    formulas
        .iter()
        .map(|phi| {
            let premise = Premise::local(phi.clone(), "formula");
            let proved = check_sat(&[premise], sig, cfg).unwrap();
            let prover_sat = proved.verdict == Verdict::Sat;
            let oracle_sat = find_model(sig, bounds, phi).unwrap().is_some();
            let witness_ok = match (prover_sat, &proved.countermodel) {
                (true, Some(m)) => Some(
                    validate_model(m).is_empty() && eval(m, World(0), phi).unwrap(),
                ),
                (true, None) => Some(false),
                _ => None,
            };
            (prover_sat, oracle_sat, witness_ok)
        })
        .collect()
}

fn bench_oracle_compare(c: &mut Criterion) {
    let corpus = generate_corpus(CorpusSpec { seed: 0, count: 24 });
    let sig = corpus_signature();
    let bounds = Bounds::default();
    let cfg = ProverConfig::default();

    let mut g = c.benchmark_group("oracle-compare");
    g.sample_size(10);
    g.bench_function("fanout", |b| {
        b.iter(|| compare_corpus(&corpus, &sig, &bounds, &cfg).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| compare_sequentially(&corpus, &sig, &bounds, &cfg))
    });
    g.finish();
}

fn bench_tableau(c: &mut Criterion) {
    let sig = corpus_signature();
    let cfg = ProverConfig::default();
    let corpus = generate_corpus(CorpusSpec { seed: 3, count: 8 });

    let mut g = c.benchmark_group("tableau");
    g.sample_size(20);
    g.bench_function("check-sat", |b| {
        b.iter(|| {
            for phi in &corpus {
                let premise = Premise::local(phi.clone(), "formula");
                check_sat(&[premise], &sig, &cfg).unwrap();
            }
        })
    });
    g.finish();
}

criterion_group!(benches, bench_oracle_compare, bench_tableau);
criterion_main!(benches);
