//! End-to-end acceptance checks, one numbered line per criterion.
//!
//! Runs without the libtest harness so every line is printed; exits non-zero
//! when any check fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use cement_core::cement::{cement_from_logits, evaluate, evaluate_logits, grad_embeddings, infonce_from_logits, Objective};
use cement_core::graddiag::{batch_sweep, row_masses, LogitGapConfig};
use cement_core::harness::{train, write_trace_csv, DualEncoder, LossKind, ToyDataset, ToyDatasetConfig, TrainConfig};
use cement_core::margin::{adaptive_margin, inverse_margin, margin_vector, MarginConfig, MarginMode};
use cement_core::simcore::{similarity, Direction, EmbeddingMatrix, PairedBatch};
use cement_plant::corpus::relation_free_corpus;
use cement_plant::genio::{build_prompt, run_pipeline, GenerationClientConfig, MockClient, NegativeRecord, PromptTemplate};
use cement_plant::jsonl::{read_jsonl, read_jsonl_file, to_jsonl_bytes};
use cement_plant::lexicon::ConcretenessLexicon;
use cement_plant::plant::{
    pick_anchor_caption, Category, QuotaState, SelectionMode, SelectionPolicy, SelectionRecord, SelectionReport,
    Selector, SpatialLexicon,
};
use cement_plant::tagger::{CorpusRecord, RuleTagger};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const MODES: [MarginMode; 4] = [MarginMode::Adaptive, MarginMode::Inverse, MarginMode::Static(2.0), MarginMode::Zero];

const PROMPT_SHA256: [(&str, &str, &str, Category, SelectionMode); 4] = [
    ("attribute", "A person wearing a red helmet", "red", Category::Attribute, SelectionMode::HighConcreteness),
    ("relation", "A cat sitting under a table", "under", Category::Relation, SelectionMode::HighConcreteness),
    ("object", "A dog running in the park", "dog", Category::Object, SelectionMode::HighConcreteness),
    ("unconstrained", "A car driving on the highway", "highway", Category::Object, SelectionMode::Random),
];
const PINNED: [&str; 4] = [
    "d2ae507430e33834e78ee0807b510b2e44dc5eb207e9271a50975e811fc94653",
    "68e3f86379b69a5b5d2380928447f9cd6f690f28f9cb7543aefb964f456117dc",
    "a3f550124f687797f7ec0a39b5c556d62070e42623450ed8bfc0bd688750261d",
    "da09952a0b1cfcb843c53543f6ff71c95e03c88ff393c998451aba8df346a865",
];

/// Input/output caption pairs shipped with the in-context examples.
const NINE_PAIRS: [(&str, &str, Category, &str); 9] = [
    ("A person wearing a red helmet", "red", Category::Attribute, "A person wearing a blue helmet"),
    ("A wooden boat floating on the water", "wooden", Category::Attribute, "A plastic boat floating on the water"),
    ("The cloudy sky over the city", "cloudy", Category::Attribute, "The clear sky over the city"),
    ("A cat sitting under a table", "under", Category::Relation, "A cat sitting on a table"),
    ("A child standing in front of the tree", "front", Category::Relation, "A child standing behind the tree"),
    ("A lamp placed to the left of the sofa", "left", Category::Relation, "A lamp placed to the right of the sofa"),
    ("A dog running in the park", "dog", Category::Object, "A cat running in the park"),
    ("A woman holding a coffee cup", "coffee cup", Category::Object, "A woman holding a laptop"),
    ("A car driving on the highway", "highway", Category::Object, "A car driving on the grass"),
];

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../plant/fixtures").join(name)
}

fn gaussian(rows: usize, dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, dim), |_| {
        // Box-Muller keeps this oracle independent of the library's samplers
        let (u, v): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    })
}

fn random_batch(n: usize, dim: usize, tau: f64, seed: u64) -> PairedBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let image = EmbeddingMatrix::new(gaussian(2 * n, dim, &mut rng)).unwrap();
    let text = EmbeddingMatrix::new(gaussian(2 * n, dim, &mut rng)).unwrap();
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..5.0)).collect();
    PairedBatch::new(image, text, tau, &c).unwrap().normalized().unwrap()
}

fn logits(q: &Array2<f64>, k: &Array2<f64>, tau: f64) -> Array2<f64> {
    let mut out = Array2::zeros((q.nrows(), k.nrows()));
    for i in 0..q.nrows() {
        for j in 0..k.nrows() {
            out[[i, j]] = (0..q.ncols()).map(|d| q[[i, d]] * k[[j, d]]).sum::<f64>() / tau;
        }
    }
    out
}

fn central_difference(x: &Array2<f64>, h: f64, mut f: impl FnMut(&Array2<f64>) -> f64) -> Array2<f64> {
    let mut g = Array2::zeros(x.dim());
    let mut probe = x.clone();
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            let orig = probe[[r, c]];
            probe[[r, c]] = orig + h;
            let up = f(&probe);
            probe[[r, c]] = orig - h;
            let down = f(&probe);
            probe[[r, c]] = orig;
            g[[r, c]] = (up - down) / (2.0 * h);
        }
    }
    g
}

fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let norm = |m: &Array2<f64>| m.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    let diff = norm(&(a - b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn zero_sum() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [1usize, 4, 32, 256] {
        for (k, mode) in MODES.iter().enumerate() {
            let batch = random_batch(n, 16, 0.07, 1000 + 10 * n as u64 + k as u64);
            let m = margin_vector(&batch, &MarginConfig::with_mode(*mode));
            for dir in [Direction::ImageToText, Direction::TextToImage] {
                let s = similarity(&batch, dir).map_err(|e| e.to_string())?;
                for row in row_masses(s.values(), Some(&m)).map_err(|e| e.to_string())? {
                    worst = worst.max(row.residual().abs());
                }
            }
        }
    }
    ensure(worst <= 1e-12, format!("max row residual {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("max row residual {worst:.1e}"))
}

fn finite_differences() -> Check {
    let start = Instant::now();
    let (mut e_logit, mut e_embed, mut e_param): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (k, mode) in MODES.iter().enumerate() {
        let cfg = MarginConfig::with_mode(*mode);
        for n in [1usize, 4, 16] {
            let batch = random_batch(n, 16, 0.07, 40 + k as u64 * 7 + n as u64);
            let m = margin_vector(&batch, &cfg);
            let v2t = logits(batch.image().values(), batch.text().values(), 0.07);
            let t2v = logits(batch.text().values(), batch.image().values(), 0.07);
            let g = evaluate_logits(&v2t, &t2v, Some(&m)).map_err(|e| e.to_string())?.logit_gradients();
            let fd_v = central_difference(&v2t, 1e-5, |s| cement_from_logits(s, &t2v, &m).unwrap().total);
            let fd_t = central_difference(&t2v, 1e-5, |s| cement_from_logits(&v2t, s, &m).unwrap().total);
            e_logit = e_logit.max(rel_err(&g.v2t, &fd_v)).max(rel_err(&g.t2v, &fd_t));

            let img = batch.image().values().clone();
            let txt = batch.text().values().clone();
            let loss = |v: &Array2<f64>, t: &Array2<f64>| {
                cement_from_logits(&logits(v, t, 0.07), &logits(t, v, 0.07), &m).unwrap().total
            };
            let ge = grad_embeddings(&batch, &cfg).map_err(|e| e.to_string())?;
            let fd_i = central_difference(&img, 1e-6, |v| loss(v, &txt));
            let fd_x = central_difference(&txt, 1e-6, |t| loss(&img, t));
            e_embed = e_embed.max(rel_err(&ge.image, &fd_i)).max(rel_err(&ge.text, &fd_x));
        }

        let data = ToyDataset::synthesize(&ToyDatasetConfig { scenes: 40, latent_dim: 12, seed: 11, ..Default::default() })
            .map_err(|e| e.to_string())?;
        let enc = DualEncoder::random(10, 12, 90 + k as u64);
        let idx = [1usize, 8, 21, 33];
        let (xi, xt) = data.batch_inputs(&idx);
        let mut c: Vec<f64> = idx.iter().map(|&i| data.scenes[i].concreteness).collect();
        c.extend_from_within(..);
        let obj = Objective::Cement(cfg);
        let out = enc.step(&xi, &xt, &c, &obj, 0.07).map_err(|e| e.to_string())?;
        let fd_wi = central_difference(&enc.image.weight, 1e-6, |w| {
            let mut e = enc.clone();
            e.image.weight = w.clone();
            e.loss(&xi, &xt, &c, &obj, 0.07).unwrap()
        });
        let fd_wt = central_difference(&enc.text.weight, 1e-6, |w| {
            let mut e = enc.clone();
            e.text.weight = w.clone();
            e.loss(&xi, &xt, &c, &obj, 0.07).unwrap()
        });
        e_param = e_param.max(rel_err(&out.grads.image, &fd_wi)).max(rel_err(&out.grads.text, &fd_wt));
    }
    ensure(e_logit <= 1e-6, format!("logit rel err {e_logit:e}"))?;
    ensure(e_embed <= 1e-5, format!("embedding rel err {e_embed:e}"))?;
    ensure(e_param <= 1e-4, format!("encoder rel err {e_param:e}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("logits {e_logit:.1e}, embeddings {e_embed:.1e}, encoder {e_param:.1e}"))
}

fn zero_margin_identity() -> Check {
    let mut worst: f64 = 0.0;
    for b in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(b);
        let n = rng.random_range(1..=24);
        let batch = random_batch(n, 8, 0.07, 5000 + b);
        let v2t = logits(batch.image().values(), batch.text().values(), 0.07);
        let t2v = logits(batch.text().values(), batch.image().values(), 0.07);
        let zero = cement_from_logits(&v2t, &t2v, &vec![0.0; 2 * n]).map_err(|e| e.to_string())?;
        let plain = infonce_from_logits(&v2t, &t2v).map_err(|e| e.to_string())?;
        worst = worst.max((zero.total - plain.total).abs());
        let z2 = evaluate(&batch, &Objective::Cement(MarginConfig::zero())).map_err(|e| e.to_string())?;
        let p2 = evaluate(&batch, &Objective::InfoNce).map_err(|e| e.to_string())?;
        worst = worst.max((z2.report.total - p2.report.total).abs());
    }
    ensure(worst <= 1e-12, format!("max |difference| {worst:e}"))?;
    Ok(format!("max |difference| {worst:.1e} over 100 batches"))
}

fn margin_values() -> Check {
    let cfg = MarginConfig::default();
    ensure(adaptive_margin(4.0, &cfg) == 0.0, "m(4.0) != 0")?;
    let m415 = adaptive_margin(4.15, &cfg);
    ensure((m415 - 0.924234).abs() <= 1e-5, format!("m(4.15) = {m415}"))?;
    let m1 = adaptive_margin(1.0, &cfg);
    ensure((m1 + 2.0).abs() <= 1e-6, format!("m(1.0) = {m1}"))?;
    let grid: Vec<f64> = (0..1000).map(|k| 1.0 + 4.0 * k as f64 / 999.0).collect();
    for w in grid.windows(2) {
        ensure(adaptive_margin(w[0], &cfg) < adaptive_margin(w[1], &cfg), format!("not increasing at {}", w[0]))?;
        ensure(inverse_margin(w[0], &cfg) > inverse_margin(w[1], &cfg), format!("inverse not decreasing at {}", w[0]))?;
    }
    let mut worst: f64 = 0.0;
    for &c in &grid {
        worst = worst.max((inverse_margin(c, &cfg) - adaptive_margin(2.0 * cfg.c_tilde - c, &cfg)).abs());
    }
    ensure(worst <= 1e-12, format!("reflection error {worst:e}"))?;
    Ok(format!("m(4.15) = {m415:.6}, m(1) = {m1:.9}, reflection {worst:.1e}"))
}

fn sweep_trend() -> Check {
    let start = Instant::now();
    let gap = LogitGapConfig::default();
    let sizes = [64usize, 256, 1024];
    let mut mean = [0.0; 3];
    for s in 0..32u64 {
        let pts = batch_sweep(&gap, &sizes, &MarginConfig::zero(), s * 1000).map_err(|e| e.to_string())?;
        for (k, p) in pts.iter().enumerate() {
            mean[k] += p.report.hard_share / 32.0;
        }
    }
    ensure(mean[0] > mean[1] && mean[1] > mean[2], format!("hard_share {mean:?}"))?;
    let mut wins = 0;
    for seed in 0..8u64 {
        let z = batch_sweep(&gap, &[1024], &MarginConfig::zero(), seed).map_err(|e| e.to_string())?;
        let two = batch_sweep(&gap, &[1024], &MarginConfig::with_mode(MarginMode::Static(2.0)), seed)
            .map_err(|e| e.to_string())?;
        ensure(two[0].report.hard_share > z[0].report.hard_share, format!("seed {seed}: static 2 did not exceed zero"))?;
        wins += 1;
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!(
        "hard_share {:.4} > {:.4} > {:.4}; static 2 wins {wins}/8",
        mean[0], mean[1], mean[2]
    ))
}

fn lexicon() -> Result<ConcretenessLexicon, String> {
    ConcretenessLexicon::load(&fixture("lexicon.csv")).map(|(l, _)| l).map_err(|e| e.to_string())
}

fn select(records: &[CorpusRecord], lex: &ConcretenessLexicon, mode: SelectionMode, seed: u64) -> Result<(Vec<SelectionRecord>, SelectionReport), String> {
    let spatial = SpatialLexicon::default();
    let tagger = RuleTagger::with_vocabulary(lex.words());
    let selector = Selector { lexicon: lex, spatial: &spatial, tagger: &tagger };
    let policy = SelectionPolicy { mode, seed, ..Default::default() };
    selector.select(records, &policy, &mut QuotaState::default()).map_err(|e| e.to_string())
}

fn concreteness_ordering() -> Check {
    let start = Instant::now();
    let lex = lexicon()?;
    let records: Vec<CorpusRecord> = read_jsonl_file(&fixture("corpus.jsonl")).map_err(|e| e.to_string())?;
    ensure(records.len() == 500, format!("{} records", records.len()))?;
    let mut means = Vec::new();
    for mode in [SelectionMode::HighConcreteness, SelectionMode::Random, SelectionMode::LowConcreteness] {
        means.push(select(&records, &lex, mode, 0)?.1.mean_concreteness);
    }
    let (hc, wo, lc) = (means[0], means[1], means[2]);
    ensure(hc - wo >= 0.2 && wo - lc >= 0.2, format!("hc {hc:.3} wo {wo:.3} lc {lc:.3}"))?;
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("hc {hc:.3} > wo {wo:.3} > lc {lc:.3}"))
}

fn quota_and_priority() -> Check {
    let lex = lexicon()?;
    let records: Vec<CorpusRecord> = read_jsonl_file(&fixture("corpus.jsonl")).map_err(|e| e.to_string())?;
    let spatial = SpatialLexicon::default();
    let tagger = RuleTagger::with_vocabulary(lex.words());
    let selector = Selector { lexicon: &lex, spatial: &spatial, tagger: &tagger };
    let (out, _) = select(&records, &lex, SelectionMode::HighConcreteness, 0)?;
    let mut bearing = 0;
    for (rec, sel) in records.iter().zip(&out) {
        ensure(rec.id == sel.id, "selection order differs from corpus order")?;
        let caps = rec.tagged_captions(&tagger);
        let anchor = pick_anchor_caption(&caps).map_err(|e| e.to_string())?;
        if selector.prepare_caption(anchor).scored.iter().any(|c| c.category == Category::Relation) {
            bearing += 1;
            ensure(sel.category == Category::Relation, format!("{} picked {}", sel.id, sel.category))?;
        }
    }
    let free = relation_free_corpus(1000, 0, &tagger);
    let (_, rep) = select(&free, &lex, SelectionMode::HighConcreteness, 0)?;
    let total = rep.counts.attribute + rep.counts.object;
    let share = rep.counts.attribute as f64 / total as f64;
    ensure(total == 1000 && (share - 0.5).abs() <= 0.05, format!("{rep:?}"))?;
    Ok(format!(
        "relation chosen in {bearing}/{bearing} relation-bearing captions; attribute:object {}:{}",
        rep.counts.attribute, rep.counts.object
    ))
}

fn prompts_and_mock() -> Check {
    let template = PromptTemplate::default();
    for ((block, caption, keyword, category, mode), digest) in PROMPT_SHA256.iter().zip(PINNED) {
        let rec = SelectionRecord {
            id: block.to_string(),
            anchor_caption: caption.to_string(),
            keyword: keyword.to_string(),
            span: (0, 1),
            category: *category,
            concreteness: 4.0,
            mode: *mode,
            image_ref: None,
            fallback: false,
        };
        let prompt = build_prompt(&rec, &template).map_err(|e| e.to_string())?;
        let stored = std::fs::read(fixture(&format!("prompts/{block}.txt"))).map_err(|e| e.to_string())?;
        ensure(prompt.as_bytes() == stored.as_slice(), format!("{block} prompt differs from fixture"))?;
        ensure(hex::encode(Sha256::digest(&stored)) == digest, format!("{block} checksum"))?;
    }
    let sels: Vec<SelectionRecord> = NINE_PAIRS
        .iter()
        .enumerate()
        .map(|(k, (input, kw, cat, _))| SelectionRecord {
            id: format!("ex-{k}"),
            anchor_caption: input.to_string(),
            keyword: kw.to_string(),
            span: (0, 1),
            category: *cat,
            concreteness: 4.0,
            mode: SelectionMode::HighConcreteness,
            image_ref: None,
            fallback: false,
        })
        .collect();
    let mock = MockClient::new();
    let (recs, _) = run_pipeline(&sels, &template, &mock, None, &GenerationClientConfig::default()).map_err(|e| e.to_string())?;
    ensure(recs.len() == 9, format!("{} of 9 accepted", recs.len()))?;
    for (rec, (_, _, _, want)) in recs.iter().zip(NINE_PAIRS) {
        ensure(rec.negative_caption == want, format!("got `{}`, want `{want}`", rec.negative_caption))?;
    }
    Ok("4 prompts match pinned checksums; 9/9 example pairs reproduced".into())
}

fn toy_training() -> Check {
    let start = Instant::now();
    let data = ToyDataset::synthesize(&ToyDatasetConfig::default()).map_err(|e| e.to_string())?;
    let base = TrainConfig::default();
    let run = |cfg: TrainConfig| train(&data, &cfg).map_err(|e| e.to_string());
    let zero = run(TrainConfig { loss: LossKind::Cement, margin: MarginConfig::zero(), ..base })?;
    let info = run(TrainConfig { loss: LossKind::InfoNce, ..base })?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_trace_csv(&mut a, &zero.trace).map_err(|e| e.to_string())?;
    write_trace_csv(&mut b, &info.trace).map_err(|e| e.to_string())?;
    let bitwise = zero.trace.iter().zip(&info.trace).all(|(x, y)| {
        x.loss.to_bits() == y.loss.to_bits() && x.report.hard_share.to_bits() == y.report.hard_share.to_bits()
    });
    ensure(bitwise && a == b && zero.trace.len() == info.trace.len(), "(a) traces differ")?;
    let one = run(TrainConfig { margin: MarginConfig::with_mode(MarginMode::Static(1.0)), ..base })?;
    ensure(
        one.mean_hard_share() > zero.mean_hard_share(),
        format!("(b) static 1 {:.4} vs zero {:.4}", one.mean_hard_share(), zero.mean_hard_share()),
    )?;
    let adaptive = run(base)?;
    let rho = adaptive.eval.rank_correlation;
    ensure(adaptive.eval.pairs >= 500 && rho > 0.3, format!("(c) rho {rho:.3} over {} pairs", adaptive.eval.pairs))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "(a) {} identical steps; (b) hard_share {:.4} > {:.4}; (c) rho {rho:.3} over {} pairs",
        zero.trace.len(),
        one.mean_hard_share(),
        zero.mean_hard_share(),
        adaptive.eval.pairs
    ))
}

fn round_trip() -> Check {
    let lex = lexicon()?;
    let records: Vec<CorpusRecord> = read_jsonl_file(&fixture("corpus.jsonl")).map_err(|e| e.to_string())?;
    let (sels, _) = select(&records, &lex, SelectionMode::Random, 3)?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let sel_path = dir.path().join("selections.jsonl");
    std::fs::write(&sel_path, to_jsonl_bytes(&sels).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let back: Vec<SelectionRecord> = read_jsonl_file(&sel_path).map_err(|e| e.to_string())?;
    ensure(back == sels, "selection JSONL round trip changed values")?;

    let template = PromptTemplate::default();
    let mock = MockClient::new();
    let run = |workers: usize| -> Result<Vec<u8>, String> {
        let cfg = GenerationClientConfig { max_concurrent: workers, ..Default::default() };
        let (recs, _) = run_pipeline(&back, &template, &mock, Some(&mock), &cfg).map_err(|e| e.to_string())?;
        to_jsonl_bytes(&recs).map_err(|e| e.to_string())
    };
    let first = run(1)?;
    ensure(first == run(1)?, "repeat run differs")?;
    ensure(first == run(8)?, "concurrency 8 differs from 1")?;
    let negs: Vec<NegativeRecord> = read_jsonl(first.as_slice()).map_err(|e| e.to_string())?;
    ensure(to_jsonl_bytes(&negs).map_err(|e| e.to_string())? == first, "negative JSONL round trip changed bytes")?;
    Ok(format!("{} selections, {} negatives, byte-identical at 1 and 8 workers", sels.len(), negs.len()))
}

fn main() {
    let checks: [Criterion; 10] = [
        ("zero-sum gradient decomposition", zero_sum),
        ("finite-difference gradients", finite_differences),
        ("zero-margin Cement equals InfoNCE", zero_margin_identity),
        ("margin schedule values", margin_values),
        ("batch-size sweep trend", sweep_trend),
        ("selection concreteness ordering", concreteness_ordering),
        ("relation priority and quota balance", quota_and_priority),
        ("prompt bytes and mock examples", prompts_and_mock),
        ("toy training", toy_training),
        ("JSONL round trip and determinism", round_trip),
    ];
    let mut failed = 0;
    for (k, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{:>2}] {name} ({secs:.2}s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name} ({secs:.2}s): {why}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
