use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use wordpixel::io::{write_model_file, LdaModelFile, LinearModelFile, ModelFile};
use wordpixel::{
    build_vocabulary, load_corpus, train_mnb, ColorConfig, CorpusFormat, GibbsSamplerF64,
    LoadOptions, MnbConfigF64, RenderMode, TokenMode, TopicModelConfigF64, VocabularyConfig,
};

use crate::bundle::{html_page, BundleOptions, SessionBundle};
use crate::error::CliError;
use crate::server;

#[derive(Debug, Parser)]
#[command(name = "wordpixel", version, about = "Color text by model quantities, one token per pixel")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a topic model by collapsed Gibbs sampling.
    TrainLda(TrainLda),
    /// Fit a two-class naive Bayes text classifier.
    TrainClf(TrainClf),
    /// Render one document as color-annotated HTML.
    Annotate(Annotate),
    /// Render the whole corpus as a words-as-pixels PNG.
    Pixels(Pixels),
    /// Serve the linked-views HTTP API.
    Serve(Serve),
}

#[derive(Debug, Args)]
pub struct TrainLda {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 500)]
    pub sweeps: usize,
    /// Average the posterior over this many final sweeps.
    #[arg(long, default_value_t = 100)]
    pub avg_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub min_count: usize,
    #[arg(long, default_value_t = 0.5)]
    pub max_doc_fraction: f64,
    /// Keep stopwords in the vocabulary.
    #[arg(long)]
    pub no_stopwords: bool,
    /// Treat each blank-line separated paragraph as its own document.
    #[arg(long)]
    pub paragraphs: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainClf {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value = "word")]
    pub mode: TokenMode,
    /// Gram orders, either `N` or `LO-HI`.
    #[arg(long, default_value = "1", value_parser = parse_orders)]
    pub ngrams: BTreeSet<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Label used as class a (positive log-odds).
    #[arg(long)]
    pub class_a: Option<String>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Source {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Color configuration JSON.
    #[arg(long)]
    pub colors: Option<PathBuf>,
    /// Must match the setting used in training.
    #[arg(long)]
    pub paragraphs: bool,
}

#[derive(Debug, Args)]
pub struct Annotate {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub doc: String,
    /// Color the text instead of its background.
    #[arg(long)]
    pub fg: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Raster {
    #[arg(long, default_value_t = 150)]
    pub column_height: usize,
    #[arg(long, default_value_t = 3)]
    pub pixel_size: usize,
    /// Draw a black row above each document's first token.
    #[arg(long)]
    pub separators: bool,
    /// Draw every n-th token only.
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Args)]
pub struct Pixels {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub raster: Raster,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct Serve {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub raster: Raster,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Directory holding the built explorer UI.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

fn parse_orders(s: &str) -> Result<BTreeSet<usize>, String> {
    let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("bad order {p:?}: {e}"));
    let (lo, hi) = match s.split_once('-') {
        Some((lo, hi)) => (num(lo)?, num(hi)?),
        None => (num(s)?, num(s)?),
    };
    if lo == 0 || lo > hi {
        return Err(format!("expected 1 <= LO <= HI, got {s:?}"));
    }
    Ok((lo..=hi).collect())
}

/// Parse arguments and run. Returns the process exit code: 0 on success,
/// 1 for usage errors, 2 for data errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::TrainLda(a) => train_lda(a, cli.seed),
        Command::TrainClf(a) => train_clf(a),
        Command::Annotate(a) => annotate(a),
        Command::Pixels(a) => pixels(a),
        Command::Serve(a) => serve(a),
    }
}

fn train_lda(a: TrainLda, seed: u64) -> Result<(), CliError> {
    let options = LoadOptions {
        split_paragraphs: a.paragraphs,
        ..LoadOptions::default()
    };
    let corpus = load_corpus(&a.corpus, CorpusFormat::Jsonl, options)?;
    let mut vocab_config = VocabularyConfig {
        min_count: a.min_count,
        max_doc_fraction: a.max_doc_fraction,
        ..VocabularyConfig::default()
    };
    if a.no_stopwords {
        vocab_config.stopwords.clear();
    }
    let vocab = build_vocabulary(&corpus, &vocab_config)?;
    let config = TopicModelConfigF64 {
        k: a.k,
        alpha: a.alpha,
        beta: a.beta,
        sweeps: a.sweeps,
        samples_to_average: a.avg_samples,
        seed,
    };
    log::info!(
        "sampling {} tokens over {} terms, K={}",
        vocab.modeled_count(),
        vocab.terms().len(),
        a.k
    );
    let posterior = GibbsSamplerF64::new(&corpus, &vocab, config.clone())?.run()?;
    let file = LdaModelFile::from_posterior(&posterior, &config, &vocab, &corpus)?;
    write_model_file(&a.output, &ModelFile::Lda(file))?;
    Ok(())
}

fn train_clf(a: TrainClf) -> Result<(), CliError> {
    let options = LoadOptions::with_mode(a.mode);
    let corpus = load_corpus(&a.corpus, CorpusFormat::Jsonl, options)?;
    let config = MnbConfigF64 {
        ngram_orders: a.ngrams,
        smoothing: a.smoothing,
        max_features: a.max_features,
        class_a: a.class_a,
    };
    let model = train_mnb(&corpus, &config)?;
    write_model_file(&a.output, &ModelFile::Linear(LinearModelFile::from_model(&model)))?;
    Ok(())
}

fn bundle(source: &Source, raster: Option<&Raster>, render_mode: RenderMode) -> Result<SessionBundle, CliError> {
    let colors = match &source.colors {
        Some(path) => ColorConfig::load(path)?,
        None => ColorConfig::default(),
    };
    let mut options = BundleOptions {
        colors,
        render_mode,
        split_paragraphs: source.paragraphs,
        ..BundleOptions::default()
    };
    if let Some(r) = raster {
        if r.stride == 0 {
            return Err(CliError::Usage("--stride must be at least 1".into()));
        }
        options.column_height = r.column_height;
        options.pixel_size = r.pixel_size;
        options.separators = r.separators;
        options.stride = r.stride;
    }
    SessionBundle::load(&source.model, &source.corpus, options)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn annotate(a: Annotate) -> Result<(), CliError> {
    let mode = if a.fg { RenderMode::Foreground } else { RenderMode::Background };
    let b = bundle(&a.source, None, mode)?;
    let fragment = b.annotate(&a.doc)?;
    write(&a.output, html_page(&a.doc, &fragment).as_bytes())
}

fn pixels(a: Pixels) -> Result<(), CliError> {
    let b = bundle(&a.source, Some(&a.raster), RenderMode::Background)?;
    write(&a.output, &b.pixels_png()?)
}

fn serve(a: Serve) -> Result<(), CliError> {
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad address {}:{}: {e}", a.host, a.port)))?;
    let b = bundle(&a.source, Some(&a.raster), RenderMode::Background)?;
    let router = server::router(b, a.ui_dir)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(server::serve(router, addr))
}
