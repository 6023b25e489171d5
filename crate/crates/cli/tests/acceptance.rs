//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails.

mod common;

use std::fs;
use std::time::{Duration, Instant};

use common::*;
use evoretrieve::assembly::{harvest_resultsets, merge_resultsets};
use evoretrieve::de::{de_run, DeConfig};
use evoretrieve::ga::{ga_run, GaConfig};
use evoretrieve::io::{read_binary, read_corpus_jsonl, save_corpus_jsonl, write_binary};
use evoretrieve::metrics::{average_precision, mean_average_precision, precision_at_n};
use evoretrieve::{
    manhattan_similarity, rank_exhaustive, Corpus32, Embedding32, Embedding64, ListOrder, Query32,
    RelevanceJudgments, ResultList, RunTrace,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

const SEEDS: u64 = 20;
const GENERATIONS: usize = 50;

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("manhattan oracle equivalence", c01_manhattan_oracle),
        ("baseline correctness", c02_baseline_correctness),
        ("GA monotonicity", c03_ga_monotonicity),
        ("DE monotonicity", c04_de_monotonicity),
        ("optimum preservation", c05_optimum_preservation),
        ("top-1 agreement", c06_top1_agreement),
        ("metrics hand values", c07_metrics),
        ("search determinism", c08_determinism),
        ("format round trips", c09_round_trips),
        ("harvest/merge properties", c10_harvest_merge),
        ("baseline scan performance", c11_performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn within(elapsed: Duration, limit_secs: f64, what: &str) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_secs {
        Ok(())
    } else {
        Err(format!("{what} took {:.3}s, limit {limit_secs}s", elapsed.as_secs_f64()))
    }
}

fn c01_manhattan_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = Vec::new();
    for dim in [4usize, 64, 512] {
        for _ in 0..1000 {
            let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
            cases.push((a, b));
        }
    }
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (a, b) in &cases {
        let got = manhattan_similarity(
            &Embedding64::new(a.clone()).unwrap(),
            &Embedding64::new(b.clone()).unwrap(),
        )
        .unwrap()
        .value();
        // Brute force: accumulate from the back, divide once.
        let mut total = 0.0;
        for k in (0..a.len()).rev() {
            total += (a[k] - b[k]).abs();
        }
        let want = total / a.len() as f64;
        let rel = (got - want).abs() / want.abs().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    let elapsed = start.elapsed();
    ensure!(worst <= 1e-6, "worst relative error {worst:e}");
    within(elapsed, 1.0, "3000 comparisons")?;
    Ok(format!("3000 pairs, worst rel err {worst:.1e}, {:.1} ms", elapsed.as_secs_f64() * 1e3))
}

fn c02_baseline_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    for c in 0..50 {
        let n = rng.gen_range(1..=2000);
        let mut corpus = random_corpus(n, 64, 1000 + c);
        // Coarse values and duplicated vectors force ties.
        let mut docs = corpus.into_docs();
        for d in docs.iter_mut() {
            let v: Vec<f32> = d.embedding.as_slice().iter().map(|x| (x * 4.0).round() / 4.0).collect();
            d.embedding = Embedding32::new(v).unwrap();
        }
        for k in 0..n / 10 {
            let src = docs[rng.gen_range(0..n)].embedding.clone();
            docs[(k * 7) % n].embedding = src;
        }
        docs.shuffle(&mut rng);
        corpus = Corpus32::try_new(64, docs).unwrap();
        let query = Query32::new("q", "", corpus.docs()[rng.gen_range(0..n)].embedding.clone());

        let got = rank_exhaustive(&query, &corpus, n).map_err(|e| e.to_string())?;
        let mut oracle: Vec<(f64, &str)> = corpus
            .docs()
            .iter()
            .map(|d| {
                let s: f64 = query
                    .embedding
                    .as_slice()
                    .iter()
                    .zip(d.embedding.as_slice())
                    .map(|(a, b)| (*a as f64 - *b as f64).abs())
                    .sum::<f64>()
                    / 64.0;
                (s, d.id.as_str())
            })
            .collect();
        oracle.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        ensure!(got.len() == n, "corpus {c}: {} entries for {n} docs", got.len());
        for (rank, (e, (s, id))) in got.entries.iter().zip(&oracle).enumerate() {
            ensure!(
                e.doc_id == *id && e.score == *s && e.rank == rank + 1,
                "corpus {c} rank {}: got {} ({}) want {id} ({s})",
                rank + 1,
                e.doc_id,
                e.score
            );
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 10.0, "50 corpora")?;
    Ok(format!("50/50 corpora exact, {:.2}s", elapsed.as_secs_f64()))
}

struct Setup {
    corpus: Corpus32,
    query: Query32,
}

/// 1,000 synthetic docs at dim 64 and a query whose text is not in the corpus.
fn setup() -> Setup {
    let corpus = synth_corpus(1000, 64, 6);
    let query = synth_query("ka lo mi ne ru sa ti vo ze bu da fe go", 64, 6);
    assert!(corpus.docs().iter().all(|d| !d.embedding.bit_eq(&query.embedding)));
    Setup { corpus, query }
}

fn ga_cfg(seed: u64) -> GaConfig {
    GaConfig { generations: GENERATIONS, seed, ..GaConfig::default() }
}

fn de_cfg(seed: u64) -> DeConfig {
    DeConfig { generations: GENERATIONS, seed, ..DeConfig::default() }
}

fn c03_ga_monotonicity() -> Outcome {
    let Setup { corpus, query } = setup();
    let top1 = rank_exhaustive(&query, &corpus, 1).map_err(|e| e.to_string())?.entries[0].clone();
    let top1_emb = &corpus.get(&top1.doc_id).unwrap().embedding;
    let mut ok = 0;
    let mut problems = Vec::new();
    let mut gens = 0;
    for seed in 0..SEEDS {
        let trace = ga_run(&corpus, &query, &ga_cfg(seed)).map_err(|e| e.to_string())?;
        gens = gens.max(trace.generations.len() - 1);
        let f = trace.champion_fitnesses();
        let monotone = f.windows(2).all(|w| w[1].value() <= w[0].value());
        let g0 = &trace.generations[0];
        let g0_matches = g0.champion.bit_eq(top1_emb) && g0.champion_fitness.value() == top1.score;
        if monotone && g0_matches {
            ok += 1;
        } else {
            problems.push(format!("seed {seed}: monotone={monotone} gen0=top1:{g0_matches}"));
        }
    }
    ensure!(ok == SEEDS, "{ok}/{SEEDS}; {}", problems.join("; "));
    Ok(format!("{ok}/{SEEDS} seeds monotone, gen-0 champion = baseline top-1 ({}), up to {gens} generations", top1.doc_id))
}

fn c04_de_monotonicity() -> Outcome {
    let Setup { corpus, query } = setup();
    let mut ok = 0;
    let mut checks = 0usize;
    let mut problems = Vec::new();
    for seed in 0..SEEDS {
        let trace = de_run(&corpus, &query, &de_cfg(seed)).map_err(|e| e.to_string())?;
        let mut good = true;
        for w in trace.generations.windows(2) {
            for (i, (before, after)) in w[0].fitness.iter().zip(&w[1].fitness).enumerate() {
                checks += 1;
                if after.value() > before.value() {
                    good = false;
                    problems.push(format!("seed {seed} gen {} individual {i}", w[1].generation));
                }
            }
        }
        ok += good as u64;
    }
    ensure!(ok == SEEDS, "{ok}/{SEEDS}; first: {}", problems.first().unwrap());
    Ok(format!("{ok}/{SEEDS} seeds, {checks} per-individual checks"))
}

fn c05_optimum_preservation() -> Outcome {
    let Setup { corpus, .. } = setup();
    let target = &corpus.docs()[417];
    let query = Query32::new("q", target.text.clone(), target.embedding.clone());
    let (mut ga_ok, mut de_ok) = (0, 0);
    for seed in 0..SEEDS {
        let ga = ga_run(&corpus, &query, &ga_cfg(seed)).map_err(|e| e.to_string())?;
        ga_ok += (ga.final_champion_fitness().map(|f| f.value()) == Some(0.0)) as u64;
        let de = de_run(&corpus, &query, &de_cfg(seed)).map_err(|e| e.to_string())?;
        de_ok += (de.final_champion_fitness().map(|f| f.value()) == Some(0.0)) as u64;
    }
    ensure!(ga_ok == SEEDS && de_ok == SEEDS, "GA {ga_ok}/{SEEDS}, DE {de_ok}/{SEEDS}");
    Ok(format!("GA {ga_ok}/{SEEDS}, DE {de_ok}/{SEEDS} final champion fitness 0.0"))
}

fn c06_top1_agreement() -> Outcome {
    let Setup { corpus, query } = setup();
    let want = rank_exhaustive(&query, &corpus, 1).map_err(|e| e.to_string())?.entries[0].doc_id.clone();
    let (mut ga_ok, mut de_ok) = (0, 0);
    for seed in 0..SEEDS {
        let ga = ga_run(&corpus, &query, &ga_cfg(seed)).map_err(|e| e.to_string())?;
        let h = harvest_resultsets(&ga, &query, &corpus, 10, 2).map_err(|e| e.to_string())?;
        ga_ok += (h.optimal.entries[0].doc_id == want) as u64;
        let de = de_run(&corpus, &query, &de_cfg(seed)).map_err(|e| e.to_string())?;
        let h = harvest_resultsets(&de, &query, &corpus, 10, 2).map_err(|e| e.to_string())?;
        de_ok += (h.optimal.entries[0].doc_id == want) as u64;
    }
    let detail = format!("GA {ga_ok}/{SEEDS}, DE {de_ok}/{SEEDS} (threshold 18)");
    ensure!(ga_ok >= 18 && de_ok >= 18, "{detail}");
    Ok(detail)
}

fn judged_list(pattern: &[u8], total_relevant: usize) -> (ResultList, RelevanceJudgments) {
    let list = ResultList::from_ranked(
        "q",
        ListOrder::Similarity,
        (0..pattern.len()).map(|i| (format!("r{i}"), i as f64)),
    );
    let mut qrels = RelevanceJudgments::new();
    for (i, &rel) in pattern.iter().enumerate() {
        qrels.insert("q", &format!("r{i}"), rel).unwrap();
    }
    let found = pattern.iter().filter(|&&r| r == 1).count();
    for k in found..total_relevant {
        qrels.insert("q", &format!("missing{k}"), 1).unwrap();
    }
    (list, qrels)
}

fn c07_metrics() -> Outcome {
    let (l, q) = judged_list(&[1, 0, 1], 2);
    let ap1 = average_precision(&l, &q);
    ensure!((ap1 - 0.8333).abs() <= 1e-4 && (ap1 - 5.0 / 6.0).abs() <= 1e-9, "AP([1,0,1],R=2) = {ap1}");
    let (l, q) = judged_list(&[1, 1, 0, 1, 0], 3);
    let ap2 = average_precision(&l, &q);
    ensure!((ap2 - 11.0 / 12.0).abs() <= 1e-9, "AP([1,1,0,1,0],R=3) = {ap2}");
    let p5 = precision_at_n(&l, &q, 5).map_err(|e| e.to_string())?;
    ensure!(p5 == 0.6, "P@5 = {p5}");
    let map = mean_average_precision(&[0.5, 1.0]).map_err(|e| e.to_string())?;
    ensure!(map == 0.75, "MAP = {map}");
    Ok(format!("AP={ap1:.4}, AP={ap2:.5}, P@5={p5}, MAP={map}"))
}

fn c08_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("texts.jsonl");
    let index = dir.path().join("index.evs");
    write_text_jsonl(&input, &random_texts(1000, 8));
    run_ok(&["ingest", "--input", p(&input), "--out", p(&index), "--synth", "--dim", "64", "--seed", "8"]);
    let mut compared = 0;
    for algo in ["baseline", "ga", "de"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            for k in 0..2 {
                let out = dir.path().join(format!("{algo}_{threads}_{k}.json"));
                run_ok(&[
                    "--threads", threads, "search", "--index", p(&index), "--query-text",
                    "lo mi ne ru sa", "--algo", algo, "--seed", "7", "--out", p(&out),
                ]);
                outputs.push(fs::read(&out).map_err(|e| e.to_string())?);
            }
        }
        ensure!(outputs.windows(2).all(|w| w[0] == w[1]), "{algo} outputs differ");
        compared += outputs.len();
    }
    Ok(format!("{compared} documents, byte-identical per algorithm across runs and --threads 1/4"))
}

fn c09_round_trips() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in 0..20 {
        let n = rng.gen_range(1..300);
        let dim = rng.gen_range(1..80);
        let corpus = random_corpus(n, dim, 500 + c);
        let path = dir.path().join(format!("c{c}.jsonl"));
        save_corpus_jsonl(&corpus, &path).map_err(|e| e.to_string())?;
        let text = fs::read(&path).map_err(|e| e.to_string())?;
        let direct: Corpus32 = read_corpus_jsonl(&text[..]).map_err(|e| e.to_string())?;
        let bytes = write_binary(&direct).map_err(|e| e.to_string())?;
        let via_binary = read_binary(&bytes).map_err(|e| e.to_string())?;
        ensure!(via_binary == direct, "corpus {c} differs after binary round trip");
        ensure!(write_binary(&via_binary).unwrap() == bytes, "corpus {c} re-encodes differently");

        let mut bad_magic = bytes.clone();
        bad_magic[0] ^= 0xff;
        ensure!(read_binary(&bad_magic).is_err(), "corpus {c}: corrupt magic accepted");
        for cut in [0, 3, 8, 15, bytes.len() / 2, bytes.len() - 1] {
            ensure!(read_binary(&bytes[..cut]).is_err(), "corpus {c}: truncation at {cut} accepted");
        }
    }
    Ok("20/20 corpora equal; corrupt magic and 6 truncation points rejected each".into())
}

fn random_trace(rng: &mut ChaCha8Rng, t: u64) -> (RunTrace<f32>, Corpus32, Query32) {
    let n = rng.gen_range(8..120);
    let dim = rng.gen_range(2..24);
    let corpus = random_corpus(n, dim, 7000 + t);
    let qv: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let query = Query32::new("q", "", Embedding32::new(qv).unwrap());
    let generations = rng.gen_range(1..30);
    let trace = if t.is_multiple_of(2) {
        let cfg = GaConfig {
            mating_pool_size: rng.gen_range(2..=n.min(40)),
            elitism_count: rng.gen_range(0..=2),
            mutation_fraction: rng.gen_range(0.0..0.5),
            mutation_range: rng.gen_range(0.0..0.5),
            generations,
            seed: t,
            ..GaConfig::default()
        };
        ga_run(&corpus, &query, &cfg).unwrap()
    } else {
        let cfg = DeConfig {
            scaling_factor: rng.gen_range(0.1..1.0),
            crossover_prob: rng.gen_range(0.0..1.0),
            generations,
            seed: t,
            ..DeConfig::default()
        };
        de_run(&corpus, &query, &cfg).unwrap()
    };
    (trace, corpus, query)
}

fn c10_harvest_merge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut harvested_lists = 0;
    for t in 0..100 {
        let (trace, corpus, query) = random_trace(&mut rng, t);
        let n = rng.gen_range(1..=corpus.len().min(15));
        let s = rng.gen_range(0..5);
        let h = harvest_resultsets(&trace, &query, &corpus, n, s).map_err(|e| e.to_string())?;
        let champ = trace.champion_fitnesses();
        let fit: Vec<f64> = h.source_generations.iter().map(|&g| champ[g].value()).collect();
        ensure!(fit.windows(2).all(|w| w[0] < w[1]), "trace {t}: harvest fitness {fit:?} not strictly ordered");
        ensure!(
            fit[0] == champ.iter().map(|f| f.value()).fold(f64::INFINITY, f64::min),
            "trace {t}: optimal list not from the best generation"
        );
        ensure!(h.suboptimal.len() + 1 == h.source_generations.len(), "trace {t}: list count");

        let mut lists = vec![h.optimal.clone()];
        lists.extend(h.suboptimal.iter().cloned());
        harvested_lists += lists.len();
        let merged = merge_resultsets(&lists, n).map_err(|e| e.to_string())?;
        ensure!(merged.is_valid() && merged.len() <= n, "trace {t}: merged list invalid");
        for _ in 0..3 {
            let mut shuffled = lists.clone();
            shuffled.shuffle(&mut rng);
            ensure!(merge_resultsets(&shuffled, n).unwrap() == merged, "trace {t}: merge depends on input order");
        }
        let doubled: Vec<ResultList> = lists.iter().chain(&lists).cloned().collect();
        ensure!(merge_resultsets(&doubled, n).unwrap() == merged, "trace {t}: duplicated inputs change the merge");
    }
    Ok(format!("100/100 traces (50 GA, 50 DE), {harvested_lists} harvested lists"))
}

fn c11_performance() -> Outcome {
    let (n, dim) = (100_000, 512);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let docs = (0..n)
        .map(|i| {
            let v: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            evoretrieve::Document32::new(doc_id(i), "", Embedding32::new(v).unwrap())
        })
        .collect();
    let corpus = Corpus32::try_new(dim, docs).map_err(|e| e.to_string())?;
    let qv: Vec<f32> = (0..dim).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    let query = Query32::new("q", "", Embedding32::new(qv).unwrap());

    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let (elapsed, list) = pool.install(|| {
        let start = Instant::now();
        let list = rank_exhaustive(&query, &corpus, 10);
        (start.elapsed(), list)
    });
    ensure!(list.map(|l| l.len()).ok() == Some(10), "scan did not return 10 entries");
    within(elapsed, 2.0, "single-threaded scan")?;
    Ok(format!("100000 x 512 single-threaded scan {:.0} ms", elapsed.as_secs_f64() * 1e3))
}
