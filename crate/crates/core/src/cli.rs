//! The `superchat` command line.
//!
//! Settings resolve in three layers: a built-in profile (`standard` or
//! `desk`), then an optional TOML file given with `--config`, then flags.
//! Later layers win.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::corpus::{
    build_vocabulary, expand_pair, filter_pairs, ingest, normalize_pairs, read_manifest, split_examples,
    write_manifest, CorpusFormat, CorpusStats, Manifest, Split,
};
use crate::decoder::{decode_beam, decode_greedy, format_trace, trace_sequence, BeamOptions, CnnPredictor};
use crate::glyph::{GlyphSource, GlyphSpec};
use crate::layout::{compute_layout, LayoutConfig};
use crate::model::{evaluate, init_model, load_checkpoint, save_checkpoint, train, Hyperparams, ModelConfig};
use crate::render::{export_png, Renderer};
use crate::service::{self, AppState, Engine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// 224px, m=16, 6x6 grid, 3 channels, min frequency 1000, cuts 18/18.
    Standard,
    /// 112px, m=8, 6x6 grid, 1 channel, min frequency 1.
    Desk,
}

#[derive(Debug, Parser)]
#[command(name = "superchat", version, about = "Dialogue generation by classifying text images")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub profile: Option<Profile>,
    #[arg(long = "layout.image-px", global = true)]
    pub image_px: Option<usize>,
    #[arg(long = "layout.margin-px", global = true)]
    pub margin_px: Option<usize>,
    #[arg(long = "layout.grid-rows", global = true)]
    pub grid_rows: Option<usize>,
    #[arg(long = "layout.grid-cols", global = true)]
    pub grid_cols: Option<usize>,
    #[arg(long = "layout.input-rows", global = true)]
    pub input_rows: Option<usize>,
    #[arg(long = "layout.channels", global = true)]
    pub channels: Option<usize>,
    /// Render glyphs from this font file instead of procedural patterns.
    #[arg(long, global = true)]
    pub font: Option<PathBuf>,
    /// Glyph source spec, e.g. `procedural:7` or `font:/path.ttf@32`.
    #[arg(long, global = true)]
    pub glyphs: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ingest a corpus and write a manifest plus a stats report.
    Prepare(PrepareArgs),
    /// Train a checkpoint on a manifest.
    Train(TrainArgs),
    /// Score a checkpoint on one split.
    Eval(EvalArgs),
    /// Render one image to PNG.
    Render(RenderArgs),
    /// Interactive loop: one input per line on stdin.
    Chat(ChatArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub min_frequency: Option<u64>,
    #[arg(long)]
    pub input_cut: Option<usize>,
    #[arg(long)]
    pub response_cut: Option<usize>,
    /// Fraction of each class sent to train; 1 keeps everything in train.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Manifest directory to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Where to write the trained checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Continue from this checkpoint instead of a fresh initialization.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Learning-curve CSV; defaults to `<checkpoint>.curve.csv`.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f32>,
    #[arg(long)]
    pub momentum: Option<f32>,
    #[arg(long)]
    pub eval_interval: Option<u64>,
    /// Stop early once train accuracy reaches this value.
    #[arg(long)]
    pub until_accuracy: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    pub split: String,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, default_value = "")]
    pub input: String,
    #[arg(long, default_value = "")]
    pub partial: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ChatArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Beam width; greedy decoding when absent.
    #[arg(long)]
    pub beam: Option<usize>,
    /// Print the per-step trace after each response.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long)]
    pub bind: Option<SocketAddr>,
}

/// `--config` file contents. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub profile: Option<Profile>,
    pub seed: Option<u64>,
    pub checkpoint: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub bind: Option<SocketAddr>,
    #[serde(default)]
    pub layout: LayoutFile,
    #[serde(default)]
    pub corpus: CorpusFile,
    #[serde(default)]
    pub model: ModelFile,
    #[serde(default)]
    pub train: TrainFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub image_px: Option<usize>,
    pub margin_px: Option<usize>,
    pub grid_rows: Option<usize>,
    pub grid_cols: Option<usize>,
    pub input_rows: Option<usize>,
    pub channels: Option<usize>,
    pub glyphs: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusFile {
    pub path: Option<PathBuf>,
    pub format: Option<String>,
    pub min_frequency: Option<u64>,
    pub input_cut: Option<usize>,
    pub response_cut: Option<usize>,
    pub train_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub conv_stages: Option<Vec<usize>>,
    pub fc_width: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f32>,
    pub momentum: Option<f32>,
    pub epochs: Option<usize>,
    pub max_iterations: Option<u64>,
    pub eval_interval: Option<u64>,
    pub until_accuracy: Option<f64>,
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub layout: LayoutConfig,
    pub glyphs: GlyphSpec,
    pub corpus_path: Option<PathBuf>,
    pub corpus_format: CorpusFormat,
    pub min_frequency: u64,
    pub input_cut: usize,
    pub response_cut: usize,
    pub train_fraction: f64,
    pub manifest: Option<PathBuf>,
    pub conv_stages: Vec<usize>,
    pub fc_width: usize,
    pub hyper: Hyperparams,
    pub seed: u64,
    pub checkpoint: Option<PathBuf>,
    pub bind: SocketAddr,
}

impl RunConfig {
    pub fn profile(profile: Profile) -> Self {
        let (layout, min_frequency) = match profile {
            Profile::Standard => (LayoutConfig::standard(), 1000),
            Profile::Desk => (LayoutConfig::desk(), 1),
        };
        RunConfig {
            layout,
            glyphs: GlyphSpec::Procedural { seed: 0 },
            corpus_path: None,
            corpus_format: CorpusFormat::Tsv,
            min_frequency,
            input_cut: layout.input_capacity(),
            response_cut: layout.response_capacity(),
            train_fraction: 0.75,
            manifest: None,
            conv_stages: vec![8, 16, 32],
            fc_width: 128,
            hyper: Hyperparams::default(),
            seed: 0,
            checkpoint: None,
            bind: "127.0.0.1:8080".parse().unwrap(),
        }
    }

    /// Profile, then config file, then flags.
    pub fn resolve(global: &GlobalArgs) -> Result<Self> {
        let file: ConfigFile = match &global.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ConfigFile::default(),
        };
        let profile = global.profile.or(file.profile).unwrap_or(Profile::Standard);
        let mut cfg = RunConfig::profile(profile);

        let l = &file.layout;
        let pick = |flag: Option<usize>, file: Option<usize>, base: usize| flag.or(file).unwrap_or(base);
        let base = cfg.layout;
        let layout = compute_layout(
            pick(global.image_px, l.image_px, base.image_px()),
            pick(global.margin_px, l.margin_px, base.margin_px()),
            pick(global.grid_rows, l.grid_rows, base.grid_rows()),
            pick(global.grid_cols, l.grid_cols, base.grid_cols()),
            pick(global.input_rows, l.input_rows, base.input_rows()),
            pick(global.channels, l.channels, base.channels()),
        )?;
        if layout != base {
            cfg.input_cut = layout.input_capacity();
            cfg.response_cut = layout.response_capacity();
        }
        cfg.layout = layout;

        if let Some(g) = &l.glyphs {
            cfg.glyphs = g.parse()?;
        }
        if let Some(g) = &global.glyphs {
            cfg.glyphs = g.parse()?;
        }
        if let Some(font) = &global.font {
            cfg.glyphs = GlyphSpec::FontFile {
                path: font.clone(),
                pixel_size: None,
            };
        }

        let c = &file.corpus;
        cfg.corpus_path = c.path.clone();
        if let Some(f) = &c.format {
            cfg.corpus_format = f.parse().map_err(anyhow::Error::msg)?;
        }
        cfg.min_frequency = c.min_frequency.unwrap_or(cfg.min_frequency);
        cfg.input_cut = c.input_cut.unwrap_or(cfg.input_cut);
        cfg.response_cut = c.response_cut.unwrap_or(cfg.response_cut);
        cfg.train_fraction = c.train_fraction.unwrap_or(cfg.train_fraction);
        cfg.manifest = file.manifest.clone();

        if let Some(s) = &file.model.conv_stages {
            cfg.conv_stages = s.clone();
        }
        cfg.fc_width = file.model.fc_width.unwrap_or(cfg.fc_width);

        let t = &file.train;
        let h = &mut cfg.hyper;
        h.batch_size = t.batch_size.unwrap_or(h.batch_size);
        h.learning_rate = t.learning_rate.unwrap_or(h.learning_rate);
        h.momentum = t.momentum.unwrap_or(h.momentum);
        h.epochs = t.epochs.unwrap_or(h.epochs);
        h.max_iterations = t.max_iterations.or(h.max_iterations);
        h.eval_interval = t.eval_interval.unwrap_or(h.eval_interval);
        h.stop_at_train_accuracy = t.until_accuracy.or(h.stop_at_train_accuracy);

        cfg.seed = global.seed.or(file.seed).unwrap_or(cfg.seed);
        cfg.checkpoint = file.checkpoint.clone();
        if let Some(b) = file.bind {
            cfg.bind = b;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_cut > self.layout.input_capacity() {
            bail!(
                "input_cut {} exceeds the input capacity {} of the layout",
                self.input_cut,
                self.layout.input_capacity()
            );
        }
        if self.response_cut > self.layout.response_capacity() {
            bail!(
                "response_cut {} exceeds the response capacity {} of the layout",
                self.response_cut,
                self.layout.response_capacity()
            );
        }
        Ok(())
    }

    pub fn renderer(&self) -> Result<Renderer> {
        Ok(Renderer::new(self.layout, GlyphSource::from_spec(&self.glyphs)?))
    }

    pub fn model_config(&self, num_classes: usize) -> ModelConfig {
        ModelConfig {
            input_px: self.layout.image_px(),
            input_channels: self.layout.channels(),
            conv_stages: self.conv_stages.clone(),
            fc_width: self.fc_width,
            num_classes,
            seed: self.seed,
        }
    }
}

fn required<'a>(flag: &'a Option<PathBuf>, file: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    flag.as_deref()
        .or(file.as_deref())
        .with_context(|| format!("no {what} given (use --{what} or the config file)"))
}

pub fn cmd_prepare(cfg: &RunConfig, args: &PrepareArgs, out: &mut dyn Write) -> Result<CorpusStats> {
    let mut cfg = cfg.clone();
    if let Some(f) = &args.format {
        cfg.corpus_format = f.parse().map_err(anyhow::Error::msg)?;
    }
    cfg.min_frequency = args.min_frequency.unwrap_or(cfg.min_frequency);
    cfg.input_cut = args.input_cut.unwrap_or(cfg.input_cut);
    cfg.response_cut = args.response_cut.unwrap_or(cfg.response_cut);
    cfg.train_fraction = args.train_fraction.unwrap_or(cfg.train_fraction);
    cfg.validate()?;
    let corpus = required(&args.corpus, &cfg.corpus_path, "corpus")?;
    let dir = required(&args.out, &cfg.manifest, "out")?;

    let raw = ingest(corpus, cfg.corpus_format)?;
    let total = raw.len();
    let pairs = normalize_pairs(raw);
    let vocab = build_vocabulary(&pairs, cfg.min_frequency)?;
    let filtered = filter_pairs(&pairs, &vocab, cfg.input_cut, cfg.response_cut);
    let mut examples = Vec::new();
    for p in &filtered {
        examples.extend(expand_pair(p, &vocab)?);
    }
    if cfg.train_fraction < 1.0 {
        examples = split_examples(&examples, cfg.train_fraction, cfg.seed)?;
    }
    let stats = CorpusStats::compute(total, &pairs, &vocab, &filtered, &examples);
    write_manifest(&Manifest::new(filtered, vocab, examples), dir)?;
    std::fs::write(dir.join("stats.txt"), stats.to_string())?;
    write!(out, "{stats}")?;
    Ok(stats)
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let manifest_dir = required(&args.manifest, &cfg.manifest, "manifest")?;
    let ckpt_path = required(&args.checkpoint, &cfg.checkpoint, "checkpoint")?;
    let manifest = read_manifest(manifest_dir)?;
    let renderer = cfg.renderer()?;
    let init = match &args.init {
        Some(p) => load_checkpoint(p)?,
        None => init_model(&cfg.model_config(manifest.vocab.len()))?,
    };
    let mut hp = cfg.hyper.clone();
    hp.seed = cfg.seed;
    hp.max_iterations = args.iterations.or(hp.max_iterations);
    hp.epochs = args.epochs.unwrap_or(if hp.max_iterations.is_some() { usize::MAX } else { hp.epochs });
    hp.batch_size = args.batch_size.unwrap_or(hp.batch_size);
    hp.learning_rate = args.learning_rate.unwrap_or(hp.learning_rate);
    hp.momentum = args.momentum.unwrap_or(hp.momentum);
    hp.eval_interval = args.eval_interval.unwrap_or(hp.eval_interval);
    hp.stop_at_train_accuracy = args.until_accuracy.or(hp.stop_at_train_accuracy);

    let (trained, curve) = train(&init, &manifest, &renderer, &hp)?;
    save_checkpoint(&trained, ckpt_path)?;
    let curve_path = args
        .curve
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.curve.csv", ckpt_path.display())));
    curve
        .write_csv(&curve_path)
        .with_context(|| format!("writing {}", curve_path.display()))?;
    let acc = evaluate(&trained, &manifest, &renderer, Split::Train)?;
    writeln!(out, "iterations = {}", curve.iterations)?;
    writeln!(out, "train_accuracy = {acc:.4}")?;
    writeln!(out, "checkpoint = {}", ckpt_path.display())?;
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig, args: &EvalArgs, out: &mut dyn Write) -> Result<f64> {
    let manifest = read_manifest(required(&args.manifest, &cfg.manifest, "manifest")?)?;
    let ckpt = load_checkpoint(required(&args.checkpoint, &cfg.checkpoint, "checkpoint")?)?;
    let split: Split = args.split.parse().map_err(anyhow::Error::msg)?;
    let acc = evaluate(&ckpt, &manifest, &cfg.renderer()?, split)?;
    writeln!(out, "{acc:.4}")?;
    Ok(acc)
}

pub fn cmd_render(cfg: &RunConfig, args: &RenderArgs, out: &mut dyn Write) -> Result<()> {
    let img = cfg.renderer()?.render_str(&args.input, &args.partial)?;
    export_png(&img, &args.out)?;
    writeln!(out, "wrote {} ({}x{})", args.out.display(), img.side(), img.side())?;
    Ok(())
}

fn load_predictor(cfg: &RunConfig, manifest: &Option<PathBuf>, checkpoint: &Option<PathBuf>) -> Result<CnnPredictor> {
    let manifest = read_manifest(required(manifest, &cfg.manifest, "manifest")?)?;
    let ckpt = load_checkpoint(required(checkpoint, &cfg.checkpoint, "checkpoint")?)?;
    Ok(CnnPredictor::new(ckpt, manifest.vocab, cfg.renderer()?)?)
}

/// Reads one input per line until end of input. Decode errors are
/// reported for that turn and the loop continues.
pub fn chat_loop(
    predictor: &CnnPredictor,
    beam: Option<usize>,
    trace: bool,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<()> {
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 {
            return Ok(());
        }
        let text: Vec<char> = line.trim_end_matches(['\n', '\r']).chars().collect();
        let result = match beam {
            None => decode_greedy(predictor, &text).map(|d| (d.text, d.steps)),
            Some(k) => decode_beam(predictor, &text, k, BeamOptions::default()).and_then(|b| {
                let steps = trace_sequence(predictor, &text, &b.best.partial)?;
                Ok((b.text, steps))
            }),
        };
        match result {
            Ok((response, steps)) => {
                writeln!(out, "{response}")?;
                if trace {
                    write!(out, "{}", format_trace(predictor, &steps))?;
                }
            }
            Err(e) => writeln!(out, "error: {e}")?,
        }
        out.flush()?;
    }
}

pub fn cmd_chat(cfg: &RunConfig, args: &ChatArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let predictor = load_predictor(cfg, &args.manifest, &args.checkpoint)?;
    chat_loop(&predictor, args.beam, args.trace, input, out)
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    log::info!("shutting down");
}

pub fn cmd_serve(cfg: &RunConfig, args: &ServeArgs, out: &mut dyn Write) -> Result<()> {
    let predictor = load_predictor(cfg, &args.manifest, &args.checkpoint)?;
    let engine = Engine::new(predictor);
    let bind = args.bind.unwrap_or(cfg.bind);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .with_context(|| format!("cannot bind {bind}"))?;
        writeln!(out, "serving model {} on http://{}", engine.model_id(), listener.local_addr()?)?;
        out.flush()?;
        let state = AppState::new(cfg.renderer()?, Some(engine));
        service::serve(listener, state, shutdown_signal()).await?;
        Ok(())
    })
}

pub fn run(cli: &Cli, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::resolve(&cli.global)?;
    match &cli.command {
        Command::Prepare(a) => cmd_prepare(&cfg, a, out).map(drop),
        Command::Train(a) => cmd_train(&cfg, a, out),
        Command::Eval(a) => cmd_eval(&cfg, a, out).map(drop),
        Command::Render(a) => cmd_render(&cfg, a, out),
        Command::Chat(a) => cmd_chat(&cfg, a, input, out),
        Command::Serve(a) => cmd_serve(&cfg, a, out),
    }
}

/// Entry point for the binary: exit code 0 on success, 1 with a
/// single-line diagnostic on stderr otherwise.
pub fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let stdin = std::io::stdin();
    let mut input = stdin.lock();
    let mut out = std::io::stdout();
    match run(&cli, &mut input, &mut out) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("superchat").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn standard_profile_defaults() {
        let cli = parse(&["render", "--out", "x.png"]);
        let cfg = RunConfig::resolve(&cli.global).unwrap();
        assert_eq!(cfg.layout, LayoutConfig::standard());
        assert_eq!(cfg.min_frequency, 1000);
        assert_eq!((cfg.input_cut, cfg.response_cut), (18, 18));
        assert_eq!(cfg.hyper.batch_size, 5);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "profile = \"desk\"\nseed = 3\n[layout]\nmargin_px = 8\nglyphs = \"procedural:5\"\n[corpus]\nmin_frequency = 2\n",
        )
        .unwrap();
        let p = path.to_str().unwrap();
        let cli = parse(&["--config", p, "--seed", "9", "render", "--out", "x.png"]);
        let cfg = RunConfig::resolve(&cli.global).unwrap();
        assert_eq!(cfg.layout, LayoutConfig::desk());
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.min_frequency, 2);
        assert_eq!(cfg.glyphs, GlyphSpec::Procedural { seed: 5 });

        let cli = parse(&["--config", p, "--layout.image-px", "64", "--layout.margin-px", "2", "render", "--out", "x.png"]);
        let cfg = RunConfig::resolve(&cli.global).unwrap();
        assert_eq!(cfg.layout.cell_px(), 10);
    }

    #[test]
    fn bad_layout_flag_is_an_error() {
        let cli = parse(&["--layout.margin-px", "15", "render", "--out", "x.png"]);
        let err = RunConfig::resolve(&cli.global).unwrap_err();
        assert!(err.to_string().contains("divisible"));
    }

    #[test]
    fn cuts_beyond_capacity_are_rejected() {
        let mut cfg = RunConfig::profile(Profile::Desk);
        cfg.input_cut = 19;
        assert!(cfg.validate().is_err());
    }
}
