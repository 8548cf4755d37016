use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cement_core::cement::{embedding_gradients, evaluate, Objective};
use cement_core::graddiag::{batch_sweep, GapDistribution, LogitGapConfig};
use cement_core::harness::{read_config, train, write_trace_csv, LossKind, ToyConfig, ToyDataset};
use cement_core::margin::{MarginConfig, MarginMode, MISSING_CONCRETENESS};
use cement_core::simcore::io::{read_embeddings, write_csv};
use cement_core::simcore::{EmbeddingMatrix, PairedBatch, DEFAULT_TEMPERATURE};
use cement_plant::corpus::fixture_corpus;
use cement_plant::genio::{
    run_pipeline, CaptionClient, GenerationClientConfig, HttpClient, ImageClient, MockClient,
    PromptTemplate,
};
use cement_plant::jsonl::{read_jsonl_file, write_jsonl};
use cement_plant::lexicon::{ConcretenessLexicon, LexiconFormat};
use cement_plant::plant::{QuotaState, SelectionMode, SelectionPolicy, SelectionRecord, Selector, SpatialLexicon};
use cement_plant::tagger::{CorpusRecord, RuleTagger};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "cement", version, about = "Concreteness-aware hard-negative contrastive lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Loss report for one batch of paired embeddings.
    Loss(LossArgs),
    /// Shape and norm summary of an embedding file.
    EmbeddingsInfo {
        #[arg(long)]
        embeddings: PathBuf,
    },
    /// Margin schedule as `c,margin` CSV.
    MarginTable(MarginTableArgs),
    /// Gradient shares of synthetic batches at several sizes.
    #[command(alias = "batch-sweep")]
    GradSweep(SweepArgs),
    /// Train the linear toy encoders and write the gradient trace.
    TrainToy(TrainArgs),
    /// Pick one keyword per corpus record.
    SelectKeywords(SelectArgs),
    /// Turn keyword selections into validated negative captions and images.
    GenerateNegatives(GenerateArgs),
    /// Size and rating histogram of a concreteness lexicon.
    LexiconStats {
        #[arg(long)]
        path: PathBuf,
        #[arg(long, default_value = "Word")]
        word_column: String,
        #[arg(long, default_value = "Conc.M")]
        rating_column: String,
    },
    /// Write the seeded synthetic caption corpus used by the fixtures.
    MakeFixtureCorpus {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long, default_value_t = 500)]
        records: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct MarginArgs {
    /// adaptive | inverse | zero | static | static:<m>
    #[arg(long, default_value = "adaptive")]
    margin_mode: String,
    #[arg(long)]
    m_min: Option<f64>,
    #[arg(long)]
    m_max: Option<f64>,
    #[arg(long)]
    c_tilde: Option<f64>,
    #[arg(long)]
    tau_m: Option<f64>,
}

impl MarginArgs {
    fn apply(&self, mut cfg: MarginConfig) -> Result<MarginConfig> {
        cfg.mode = self.margin_mode.parse::<MarginMode>()?;
        cfg.m_min = self.m_min.unwrap_or(cfg.m_min);
        cfg.m_max = self.m_max.unwrap_or(cfg.m_max);
        cfg.c_tilde = self.c_tilde.unwrap_or(cfg.c_tilde);
        cfg.tau_m = self.tau_m.unwrap_or(cfg.tau_m);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct LossArgs {
    /// JSON `{"image": [[..]], "text": [[..]], "concreteness": [..], "temperature": τ}`
    /// with rows ordered `[anchors; negatives]` and one concreteness per anchor.
    #[arg(long, conflicts_with_all = ["image", "text"])]
    batch: Option<PathBuf>,
    #[arg(long, requires = "text")]
    image: Option<PathBuf>,
    #[arg(long, requires = "image")]
    text: Option<PathBuf>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long, value_enum, default_value_t = LossChoice::Cement)]
    loss: LossChoice,
    #[command(flatten)]
    margin: MarginArgs,
    /// Directory for gradient CSVs.
    #[arg(long)]
    dump_grads: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossChoice {
    Infonce,
    Cement,
}

#[derive(Deserialize)]
struct BatchFile {
    image: Vec<Vec<f64>>,
    text: Vec<Vec<f64>>,
    #[serde(default)]
    concreteness: Option<Vec<f64>>,
    #[serde(default)]
    temperature: Option<f64>,
}

#[derive(Args)]
struct MarginTableArgs {
    #[arg(long, default_value_t = 1.0)]
    c_from: f64,
    #[arg(long, default_value_t = 5.0)]
    c_to: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[command(flatten)]
    margin: MarginArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "16,64,256,1024")]
    sizes: Vec<usize>,
    /// Mean of the positive-minus-hard-negative logit gap.
    #[arg(long)]
    gap_mean: Option<f64>,
    #[arg(long)]
    gap_std: Option<f64>,
    #[arg(long)]
    easy_gap_mean: Option<f64>,
    #[arg(long)]
    easy_gap_std: Option<f64>,
    #[command(flatten)]
    margin: MarginArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    margin_mode: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dataset_seed: Option<u64>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
    #[arg(long)]
    out_eval: Option<PathBuf>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    /// hc | lc | wo
    #[arg(long, default_value = "hc")]
    mode: String,
    #[arg(long, default_value_t = 3)]
    top_k: usize,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    attribute_share: f64,
    /// Spatial lexicon file; the built-in list is used when absent.
    #[arg(long)]
    spatial: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClientKind {
    Mock,
    Http,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    selections: PathBuf,
    #[arg(long, value_enum, default_value_t = ClientKind::Mock)]
    client: ClientKind,
    #[arg(long)]
    endpoint: Option<String>,
    /// JSON client config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_concurrent: Option<usize>,
    #[arg(long)]
    max_retries: Option<usize>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Directory holding `prompt_template.txt` and `examples/*.txt`.
    #[arg(long)]
    template_dir: Option<PathBuf>,
    /// Stop after captions; accepted records stay `pending_image`.
    #[arg(long)]
    captions_only: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_batch(args: &LossArgs) -> Result<PairedBatch> {
    let (image, text, c, file_tau) = match (&args.batch, &args.image, &args.text) {
        (Some(path), _, _) => {
            let f: BatchFile = serde_json::from_reader(File::open(path)?)
                .with_context(|| format!("reading {}", path.display()))?;
            (
                EmbeddingMatrix::from_rows(&f.image)?,
                EmbeddingMatrix::from_rows(&f.text)?,
                f.concreteness,
                f.temperature,
            )
        }
        (None, Some(i), Some(t)) => (read_embeddings(i)?, read_embeddings(t)?, None, None),
        _ => bail!("pass --batch or both --image and --text"),
    };
    let n = image.rows() / 2;
    let c = c.unwrap_or_else(|| vec![MISSING_CONCRETENESS; n]);
    let tau = args.temperature.or(file_tau).unwrap_or(DEFAULT_TEMPERATURE);
    Ok(PairedBatch::new(image, text, tau, &c)?.normalized()?)
}

fn cmd_loss(args: &LossArgs) -> Result<()> {
    let batch = load_batch(args)?;
    let objective = match args.loss {
        LossChoice::Infonce => Objective::InfoNce,
        LossChoice::Cement => Objective::Cement(args.margin.apply(MarginConfig::default())?),
    };
    let eval = evaluate(&batch, &objective)?;
    if let Some(dir) = &args.dump_grads {
        std::fs::create_dir_all(dir)?;
        let lg = eval.logit_gradients();
        let eg = embedding_gradients(batch.image().values(), batch.text().values(), &lg, batch.temperature());
        for (name, m) in [
            ("logits_v2t.csv", &lg.v2t),
            ("logits_t2v.csv", &lg.t2v),
            ("image.csv", &eg.image),
            ("text.csv", &eg.text),
        ] {
            let mut w = BufWriter::new(File::create(dir.join(name))?);
            write_csv(&mut w, m)?;
            w.flush()?;
        }
    }
    write_json(None, &eval.report)
}

fn cmd_embeddings_info(path: &Path) -> Result<()> {
    let m = read_embeddings(path)?;
    let norms: Vec<f64> = m
        .values()
        .rows()
        .into_iter()
        .map(|r| r.dot(&r).sqrt())
        .collect();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let max = norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = serde_json::json!({
        "rows": m.rows(),
        "dim": m.dim(),
        "anchors": m.rows() / 2,
        "min_norm": min,
        "max_norm": max,
        "unit_norm": norms.iter().all(|n| (n - 1.0).abs() <= 1e-9),
    });
    write_json(None, &summary)
}

fn cmd_margin_table(args: &MarginTableArgs) -> Result<()> {
    if args.step.is_nan() || args.step <= 0.0 || args.c_to < args.c_from {
        bail!("need step > 0 and c_to >= c_from");
    }
    let cfg = args.margin.apply(MarginConfig::default())?;
    let mut w = writer(args.out.as_deref())?;
    writeln!(w, "c,margin")?;
    let count = ((args.c_to - args.c_from) / args.step + 1e-9).floor() as usize;
    for k in 0..=count {
        let c = args.c_from + k as f64 * args.step;
        writeln!(w, "{c},{}", cfg.margin_at(c))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mut gap = LogitGapConfig::default();
    gap.hard_gap = GapDistribution {
        mean: args.gap_mean.unwrap_or(gap.hard_gap.mean),
        std: args.gap_std.unwrap_or(gap.hard_gap.std),
    };
    gap.easy_gap = GapDistribution {
        mean: args.easy_gap_mean.unwrap_or(gap.easy_gap.mean),
        std: args.easy_gap_std.unwrap_or(gap.easy_gap.std),
    };
    let cfg = args.margin.apply(MarginConfig::default())?;
    let points = batch_sweep(&gap, &args.sizes, &cfg, args.seed)?;
    let mut w = writer(args.out.as_deref())?;
    writeln!(w, "N,positive_pull,hard_reject,easy_reject,hard_share")?;
    for p in points {
        let r = p.report;
        writeln!(w, "{},{},{},{},{}", p.n_anchors, r.positive_pull, r.hard_reject, r.easy_reject, r.hard_share)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => read_config(p)?,
        None => ToyConfig::default(),
    };
    let t = &mut cfg.train;
    if let Some(l) = &args.loss {
        t.loss = l.parse::<LossKind>()?;
    }
    if let Some(m) = &args.margin_mode {
        t.margin.mode = m.parse()?;
    }
    t.epochs = args.epochs.unwrap_or(t.epochs);
    t.batch_size = args.batch_size.unwrap_or(t.batch_size);
    t.learning_rate = args.learning_rate.unwrap_or(t.learning_rate);
    t.temperature = args.temperature.unwrap_or(t.temperature);
    t.seed = args.seed.unwrap_or(t.seed);
    cfg.dataset.seed = args.dataset_seed.unwrap_or(cfg.dataset.seed);

    let data = ToyDataset::synthesize(&cfg.dataset)?;
    let outcome = train(&data, &cfg.train)?;
    if let Some(p) = &args.out_trace {
        write_trace_csv(BufWriter::new(File::create(p)?), &outcome.trace)?;
    }
    let summary = serde_json::json!({
        "steps": outcome.trace.len(),
        "final_loss": outcome.trace.last().map(|r| r.loss),
        "mean_hard_share": outcome.mean_hard_share(),
        "eval": outcome.eval,
    });
    write_json(args.out_eval.as_deref(), &summary)
}

fn load_lexicon(path: &Path) -> Result<ConcretenessLexicon> {
    let (lex, report) = ConcretenessLexicon::load(path)
        .with_context(|| format!("loading lexicon {}", path.display()))?;
    if report.duplicates > 0 {
        eprintln!("lexicon: {} duplicate rows ignored", report.duplicates);
    }
    Ok(lex)
}

fn cmd_select(args: &SelectArgs) -> Result<()> {
    let lexicon = load_lexicon(&args.lexicon)?;
    let spatial = match &args.spatial {
        Some(p) => SpatialLexicon::load(p)?,
        None => SpatialLexicon::default(),
    };
    let tagger = RuleTagger::with_vocabulary(lexicon.words());
    let records: Vec<CorpusRecord> = read_jsonl_file(&args.corpus)?;
    let policy = SelectionPolicy {
        mode: args.mode.parse::<SelectionMode>()?,
        top_k: args.top_k,
        sample_temperature: args.temperature,
        seed: args.seed,
    };
    let mut quota = QuotaState { target_attribute: args.attribute_share, ..Default::default() };
    let selector = Selector { lexicon: &lexicon, spatial: &spatial, tagger: &tagger };
    let (selections, report) = selector.select(&records, &policy, &mut quota)?;
    write_jsonl(BufWriter::new(File::create(&args.out)?), &selections)?;
    match &args.report {
        Some(p) => write_json(Some(p), &report),
        None => {
            eprintln!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(p) => GenerationClientConfig::load(p)?,
        None => GenerationClientConfig::default(),
    };
    if args.endpoint.is_some() {
        cfg.endpoint = args.endpoint.clone();
    }
    cfg.max_concurrent = args.max_concurrent.unwrap_or(cfg.max_concurrent);
    cfg.max_retries = args.max_retries.unwrap_or(cfg.max_retries);
    cfg.timeout_ms = args.timeout_ms.unwrap_or(cfg.timeout_ms);
    cfg.validate()?;
    let template = match &args.template_dir {
        Some(d) => PromptTemplate::load_dir(d)?,
        None => PromptTemplate::default(),
    };
    let selections: Vec<SelectionRecord> = read_jsonl_file(&args.selections)?;

    let mock = MockClient::new();
    let http;
    let (captioner, imager): (&dyn CaptionClient, &dyn ImageClient) = match args.client {
        ClientKind::Mock => (&mock, &mock),
        ClientKind::Http => {
            let endpoint = cfg.endpoint.as_deref().context("--endpoint is required for the http client")?;
            http = HttpClient::new(endpoint, cfg.timeout());
            (&http, &http)
        }
    };
    let imager = (!args.captions_only).then_some(imager);
    let (records, report) = run_pipeline(&selections, &template, captioner, imager, &cfg)?;
    write_jsonl(BufWriter::new(File::create(&args.out)?), &records)?;
    match &args.report {
        Some(p) => write_json(Some(p), &report),
        None => {
            eprintln!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
    }
}

fn cmd_lexicon_stats(path: &Path, word_column: &str, rating_column: &str) -> Result<()> {
    let format = LexiconFormat {
        word_column: word_column.to_string(),
        rating_column: rating_column.to_string(),
        ..LexiconFormat::for_path(path)
    };
    let (lex, report) = ConcretenessLexicon::load_with(path, &format)?;
    let ratings: Vec<f64> = lex.ratings().collect();
    let mean = ratings.iter().sum::<f64>() / ratings.len().max(1) as f64;
    let histogram: Vec<_> = lex
        .histogram()
        .iter()
        .map(|(lo, hi, n)| serde_json::json!({ "lo": lo, "hi": hi, "count": n }))
        .collect();
    write_json(
        None,
        &serde_json::json!({
            "entries": lex.len(),
            "rows": report.rows,
            "duplicates": report.duplicates,
            "mean_rating": mean,
            "histogram": histogram,
        }),
    )
}

fn cmd_fixture_corpus(lexicon: &Path, records: usize, seed: u64, out: &Path) -> Result<()> {
    let lex = load_lexicon(lexicon)?;
    let tagger = RuleTagger::with_vocabulary(lex.words());
    let corpus = fixture_corpus(records, seed, &tagger);
    write_jsonl(BufWriter::new(File::create(out)?), &corpus)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Loss(a) => cmd_loss(&a),
        Command::EmbeddingsInfo { embeddings } => cmd_embeddings_info(&embeddings),
        Command::MarginTable(a) => cmd_margin_table(&a),
        Command::GradSweep(a) => cmd_sweep(&a),
        Command::TrainToy(a) => cmd_train(&a),
        Command::SelectKeywords(a) => cmd_select(&a),
        Command::GenerateNegatives(a) => cmd_generate(&a),
        Command::LexiconStats { path, word_column, rating_column } => {
            cmd_lexicon_stats(&path, &word_column, &rating_column)
        }
        Command::MakeFixtureCorpus { lexicon, records, seed, out } => {
            cmd_fixture_corpus(&lexicon, records, seed, &out)
        }
    }
}
