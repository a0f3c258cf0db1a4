//! Command-line surface. Every command writes its report to a caller-supplied sink.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checkpoint::Checkpoint;
use crate::data::{
    generate_synthetic, load_and_crop, open_source, split_manifest, write_splits, Manifest, Metrics, SampleSource,
    SyntheticConfig,
};
use crate::error::{Error, Result};
use crate::gradcheck::{run_suite, SuiteOptions};
use crate::model::{ablation_variant_from, DualStreamModel, ModelConfig};
use crate::ops::{softmax_cross_entropy, Mode};
use crate::run::RunConfig;
use crate::srm::{load_bank, FilterSubset, KERNEL_ASSET_SHA256};
use crate::tensor::Tensor4;
use crate::train::{evaluate, predict_one, train, EpochLog};

#[derive(Debug, Parser)]
#[command(name = "cgdetect", version, about = "Dual-stream CNN for computer-generated vs photographic image detection")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model and write the epoch log and checkpoints.
    Train(ConfigArgs),
    /// Evaluate a checkpoint, or retrain over several seeded re-splits.
    Eval(EvalArgs),
    /// Classify images with a trained checkpoint.
    Predict(PredictArgs),
    /// Verify every analytic gradient against finite differences.
    Gradcheck(GradcheckArgs),
    /// Train or smoke-test a family of architecture variants.
    Ablate(AblateArgs),
    /// Print the SRM kernel bank.
    DumpKernels,
    /// Generate datasets.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Split a manifest into stratified train/val/test manifests.
    Split(SplitArgs),
    /// Print the layer table and parameter count of a configuration.
    Summary(ConfigArgs),
}

/// Run configuration: defaults, then `--config`, then individual flags.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat `key=value` config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<String>,
    #[arg(long)]
    pub batch_size: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub lr_step: Option<String>,
    #[arg(long)]
    pub lr_gamma: Option<String>,
    #[arg(long)]
    pub weight_decay: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// concat | logit_avg | residual_only | joint_only
    #[arg(long)]
    pub fusion: Option<String>,
    /// softpool | maxpool
    #[arg(long)]
    pub pooling_residual: Option<String>,
    /// softpool | maxpool
    #[arg(long)]
    pub pooling_joint: Option<String>,
    /// Residual-stream layers built as two-branch blocks, e.g. `2,3,4` or `none`.
    #[arg(long)]
    pub residual_layers: Option<String>,
    /// Build joint-stream layers 2-4 as two-branch blocks too.
    #[arg(long)]
    pub joint_residual_blocks: Option<String>,
    /// 1st | 2nd | 3rd | 3x3 | 5x5 | all | kernel:<name>
    #[arg(long)]
    pub filter_set: Option<String>,
    #[arg(long)]
    pub crop: Option<String>,
    #[arg(long)]
    pub width_multiplier: Option<String>,
    #[arg(long)]
    pub train_manifest: Option<String>,
    #[arg(long)]
    pub val_manifest: Option<String>,
    #[arg(long)]
    pub test_manifest: Option<String>,
    #[arg(long)]
    pub checkpoint: Option<String>,
    #[arg(long)]
    pub log: Option<String>,
    /// Train:val:test proportions used when re-splitting, e.g. `10:3:4`.
    #[arg(long)]
    pub split_ratios: Option<String>,
}

const MODEL_KEYS: [&str; 8] = [
    "fusion",
    "pooling_residual",
    "pooling_joint",
    "residual_layers",
    "joint_residual_blocks",
    "filter_set",
    "crop",
    "width_multiplier",
];

impl ConfigArgs {
    /// Flag values as `(key, value)` pairs.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("lr", &self.lr),
            ("batch_size", &self.batch_size),
            ("epochs", &self.epochs),
            ("lr_step", &self.lr_step),
            ("lr_gamma", &self.lr_gamma),
            ("weight_decay", &self.weight_decay),
            ("seed", &self.seed),
            ("fusion", &self.fusion),
            ("pooling_residual", &self.pooling_residual),
            ("pooling_joint", &self.pooling_joint),
            ("residual_layers", &self.residual_layers),
            ("joint_residual_blocks", &self.joint_residual_blocks),
            ("filter_set", &self.filter_set),
            ("crop", &self.crop),
            ("width_multiplier", &self.width_multiplier),
            ("train_manifest", &self.train_manifest),
            ("val_manifest", &self.val_manifest),
            ("test_manifest", &self.test_manifest),
            ("checkpoint", &self.checkpoint),
            ("log", &self.log),
            ("split_ratios", &self.split_ratios),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_owned(), v.clone()))).collect()
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides())
    }

    /// Keys set by the config file or by flags.
    pub fn explicit_keys(&self) -> Result<BTreeSet<String>> {
        let mut keys: BTreeSet<String> = self.overrides().into_iter().map(|(k, _)| k).collect();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
                if let Some((k, _)) = line.split_once('=') {
                    keys.insert(k.trim().replace('-', "_"));
                }
            }
        }
        Ok(keys)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Manifest to score (defaults to `test_manifest`). With `--repeat-splits`
    /// this is the full manifest that gets re-split.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Re-split the manifest `k` times with seeds `seed..seed+k`, retrain on
    /// each split and report every test accuracy and their mean.
    #[arg(long, default_value_t = 0)]
    pub repeat_splits: usize,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(required = true)]
    pub images: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Learnable parameters sampled in each whole-model check.
    #[arg(long, default_value_t = 50)]
    pub model_coords: usize,
    /// Negative control: corrupt the SoftPool gradient so its check fails.
    #[arg(long, hide = true)]
    pub perturb_softpool: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Streams,
    Filters,
    Residual,
    Pooling,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// One forward/backward batch per variant instead of training.
    #[arg(long)]
    pub smoke: bool,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

#[derive(Debug, Clone, Subcommand)]
pub enum GenerateKind {
    /// Smooth random images; pg-like keeps sensor-like noise, cg-like is box-filtered.
    Synthetic(SyntheticArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub count_per_class: usize,
    #[arg(long, default_value_t = 96)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = crate::data::synthetic::DEFAULT_NOISE_SIGMA)]
    pub noise_sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "3:1:1")]
    pub ratios: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs a parsed command line.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Train(args) => cmd_train(&args.resolve()?, out).map(|_| ()),
        Command::Eval(args) => cmd_eval(args, out).map(|_| ()),
        Command::Predict(args) => cmd_predict(args, out),
        Command::Gradcheck(args) => cmd_gradcheck(args, out),
        Command::Ablate(args) => cmd_ablate(args, out).map(|_| ()),
        Command::DumpKernels => cmd_dump_kernels(out),
        Command::Generate { kind: GenerateKind::Synthetic(args) } => cmd_generate(args, out),
        Command::Split(args) => cmd_split(args, out),
        Command::Summary(args) => cmd_summary(&args.resolve()?, out),
    }
}

fn w(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::io("<output>", e))
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a PathBuf> {
    p.as_ref().ok_or_else(|| Error::Config(format!("missing --{}", what.replace('_', "-"))))
}

fn load_source(path: &Path, crop: usize) -> Result<Box<dyn SampleSource>> {
    open_source(&Manifest::load(path)?, crop)
}

/// Path of the best-validation checkpoint written next to `checkpoint`.
pub fn best_checkpoint_path(checkpoint: &Path) -> PathBuf {
    let mut s = checkpoint.as_os_str().to_owned();
    s.push(".best");
    PathBuf::from(s)
}

pub struct TrainOutcome {
    pub logs: Vec<EpochLog>,
    pub model: DualStreamModel<f32>,
}

fn log_header(cfg: &RunConfig) -> String {
    let mut s = String::from("# resolved config\n");
    for line in cfg.to_text().lines() {
        s.push_str("# ");
        s.push_str(line);
        s.push('\n');
    }
    s.push_str(EpochLog::CSV_HEADER);
    s.push('\n');
    s
}

/// Trains on `train_set`, logging CSV rows to `cfg.log` and `out`.
pub fn train_with_sources(
    cfg: &RunConfig,
    train_set: &dyn SampleSource,
    val_set: Option<&dyn SampleSource>,
    out: &mut dyn Write,
) -> Result<TrainOutcome> {
    let mut model = DualStreamModel::<f32>::build(cfg.model.clone(), cfg.seed)?;
    let mut log_file = match &cfg.log {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| Error::io(p, e))?);
            f.write_all(log_header(cfg).as_bytes()).map_err(|e| Error::io(p, e))?;
            Some((p.clone(), f))
        }
        None => None,
    };
    w(out, EpochLog::CSV_HEADER)?;
    let mut best = f64::NEG_INFINITY;
    let logs = train(&mut model, train_set, val_set, &cfg.sgd, cfg.seed, |log, model| {
        let row = log.csv_row();
        w(out, &row)?;
        if let Some((p, f)) = log_file.as_mut() {
            writeln!(f, "{row}").and_then(|_| f.flush()).map_err(|e| Error::io(&*p, e))?;
        }
        if let (Some(ck), Some(acc)) = (&cfg.checkpoint, log.val_acc) {
            if acc > best {
                best = acc;
                model.to_checkpoint().save(&best_checkpoint_path(ck))?;
            }
        }
        Ok(())
    })?;
    if let Some(ck) = &cfg.checkpoint {
        model.to_checkpoint().save(ck)?;
    }
    Ok(TrainOutcome { logs, model })
}

pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<TrainOutcome> {
    for line in cfg.to_text().lines() {
        w(out, format!("# {line}"))?;
    }
    let train_path = require(&cfg.train_manifest, "train_manifest")?;
    let crop = cfg.model.crop;
    let train_set = load_source(train_path, crop)?;
    let val_set = cfg.val_manifest.as_deref().map(|p| load_source(p, crop)).transpose()?;
    train_with_sources(cfg, train_set.as_ref(), val_set.as_deref(), out)
}

/// Rejects explicitly requested architecture settings that differ from the checkpoint's.
fn check_compatible(args: &ConfigArgs, cfg: &RunConfig, stored: &ModelConfig) -> Result<()> {
    let keys = args.explicit_keys()?;
    let stored = RunConfig { model: stored.clone(), ..cfg.clone() }.to_pairs();
    let mismatches: Vec<String> = cfg
        .to_pairs()
        .into_iter()
        .zip(stored)
        .filter(|((k, want), (_, have))| MODEL_KEYS.contains(k) && keys.contains(*k) && want != have)
        .map(|((k, want), (_, have))| format!("{k}: requested {want}, checkpoint has {have}"))
        .collect();
    if !mismatches.is_empty() {
        return Err(Error::Config(format!("config mismatch with checkpoint ({})", mismatches.join("; "))));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub splits: Vec<Metrics>,
    pub mean_acc: f64,
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> Result<EvalReport> {
    let cfg = args.config.resolve()?;
    let manifest_path = match (&args.manifest, &cfg.test_manifest) {
        (Some(p), _) | (None, Some(p)) => p.clone(),
        (None, None) => return Err(Error::Config("missing --manifest".into())),
    };
    let manifest = Manifest::load(&manifest_path)?;
    let mut splits = Vec::new();
    if args.repeat_splits == 0 {
        let ck_path = require(&cfg.checkpoint, "checkpoint")?;
        let model = DualStreamModel::from_checkpoint(&Checkpoint::load(ck_path)?)?;
        check_compatible(&args.config, &cfg, model.config())?;
        let data = open_source(&manifest, model.config().crop)?;
        let (m, _) = evaluate(&model, data.as_ref(), cfg.sgd.batch_size)?;
        w(out, &m)?;
        splits.push(m);
    } else {
        let mut quiet = std::io::sink();
        for k in 0..args.repeat_splits {
            let seed = cfg.seed + k as u64;
            let [tr, _, te] = split_manifest(&manifest, cfg.split_ratios, seed)?;
            let run = RunConfig { seed, log: None, checkpoint: None, ..cfg.clone() };
            let train_set = open_source(&tr, cfg.model.crop)?;
            let test_set = open_source(&te, cfg.model.crop)?;
            let outcome = train_with_sources(&run, train_set.as_ref(), None, &mut quiet)?;
            let (m, _) = evaluate(&outcome.model, test_set.as_ref(), cfg.sgd.batch_size)?;
            w(out, format!("split {k} (seed {seed}): {m}"))?;
            splits.push(m);
        }
    }
    let mean_acc = splits.iter().map(|m| m.acc).sum::<f64>() / splits.len() as f64;
    if splits.len() > 1 {
        w(out, format!("mean Acc={:.2}% over {} splits", 100.0 * mean_acc, splits.len()))?;
    }
    Ok(EvalReport { splits, mean_acc })
}

pub fn cmd_predict(args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = DualStreamModel::from_checkpoint(&Checkpoint::load(&args.checkpoint)?)?;
    for path in &args.images {
        let x = load_and_crop::<f32>(path, model.config().crop)?;
        let t0 = Instant::now();
        let (label, p) = predict_one(&model, &x)?;
        let ms = t0.elapsed().as_secs_f64() * 1e3;
        w(out, format!("{}\t{label}\tp_cg={:.6}\tp_pg={:.6}\tlatency_ms={ms:.2}", path.display(), p[0], p[1]))?;
    }
    Ok(())
}

pub fn cmd_gradcheck(args: &GradcheckArgs, out: &mut dyn Write) -> Result<()> {
    let opts = SuiteOptions {
        seed: args.seed,
        model_coords: args.model_coords,
        perturb_softpool: args.perturb_softpool,
        ..SuiteOptions::default()
    };
    let reports = run_suite(&opts)?;
    for r in &reports {
        w(out, r)?;
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Error::GradCheck(format!("{failed} of {} checks failed", reports.len())));
    }
    w(out, format!("all {} checks passed", reports.len()))
}

/// `(row label, variant name)` pairs of a family.
pub fn family_rows(family: Family) -> Vec<(String, String)> {
    let named = |rows: &[(&str, &str)]| rows.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect::<Vec<_>>();
    let filters = || {
        FilterSubset::ABLATION
            .iter()
            .map(|s| {
                let label = if *s == FilterSubset::All30 { format!("{s} (ours)") } else { s.to_string() };
                (label, format!("subset:{s}"))
            })
            .collect::<Vec<_>>()
    };
    match family {
        Family::Streams => named(&[
            ("Only residual stream", "only_residual"),
            ("Only joint channel stream", "only_joint"),
            ("Ours", "default"),
        ]),
        Family::Filters => filters(),
        Family::Residual => named(&[
            ("VA", "VA"),
            ("VB", "VB"),
            ("VC", "VC"),
            ("Ours (3 layers)", "layers3"),
            ("4 layers", "layers4"),
            ("5 layers", "layers5"),
        ]),
        Family::Pooling => named(&[("M1", "M1"), ("M2", "M2"), ("M3", "M3"), ("Ours", "default")]),
        Family::All => {
            let mut rows = Vec::new();
            for f in [Family::Residual, Family::Pooling, Family::Streams] {
                rows.extend(family_rows(f));
            }
            rows.extend(filters());
            rows
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub label: String,
    pub variant: String,
    pub params: Option<usize>,
    /// Test accuracy, or the smoke-batch loss with `--smoke`.
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// One forward/backward pass on a random batch of two.
pub fn smoke_variant(config: ModelConfig, seed: u64) -> Result<(usize, f64)> {
    let crop = config.crop;
    let mut model = DualStreamModel::<f32>::build(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Tensor4::from_fn([2, 3, crop, crop], |_, _, _, _| rng.gen_range(0.0..255.0f32));
    let logits = model.forward(&x, Mode::Train)?;
    let (loss, grad) = softmax_cross_entropy(&logits, &[0, 1])?;
    model.backward(&grad)?;
    Ok((model.num_params(), f64::from(loss)))
}

pub fn cmd_ablate(args: &AblateArgs, out: &mut dyn Write) -> Result<Vec<AblationRow>> {
    let cfg = args.config.resolve()?;
    let data = if args.smoke {
        None
    } else {
        let train_path = require(&cfg.train_manifest, "train_manifest")?;
        let test_path = cfg
            .test_manifest
            .as_ref()
            .or(cfg.val_manifest.as_ref())
            .ok_or_else(|| Error::Config("missing --test-manifest".into()))?;
        Some((load_source(train_path, cfg.model.crop)?, load_source(test_path, cfg.model.crop)?))
    };
    let value_name = if args.smoke { "loss" } else { "acc" };
    w(out, format!("{:<28} {:<20} {:>10} {:>10}", "row", "variant", "params", value_name))?;
    let mut rows = Vec::new();
    for (label, variant) in family_rows(args.family) {
        let result = ablation_variant_from(&cfg.model, &variant).and_then(|model_cfg| match &data {
            None => smoke_variant(model_cfg, cfg.seed),
            Some((tr, te)) => {
                let run = RunConfig { model: model_cfg, log: None, checkpoint: None, ..cfg.clone() };
                let outcome = train_with_sources(&run, tr.as_ref(), None, &mut std::io::sink())?;
                let (m, _) = evaluate(&outcome.model, te.as_ref(), cfg.sgd.batch_size)?;
                Ok((outcome.model.num_params(), m.acc))
            }
        });
        let row = match result {
            Ok((params, value)) => {
                w(out, format!("{label:<28} {variant:<20} {params:>10} {value:>10.4}"))?;
                AblationRow { label, variant, params: Some(params), value: Some(value), error: None }
            }
            Err(e) => {
                w(out, format!("{label:<28} {variant:<20} {:>10} {:>10}  error: {e}", "-", "-"))?;
                AblationRow { label, variant, params: None, value: None, error: Some(e.to_string()) }
            }
        };
        rows.push(row);
    }
    if let Some(path) = &args.csv {
        let mut text = format!("row,variant,params,{value_name},error\n");
        for r in &rows {
            let opt = |v: Option<String>| v.unwrap_or_default();
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                r.label,
                r.variant,
                opt(r.params.map(|p| p.to_string())),
                opt(r.value.map(|v| format!("{v:.6}"))),
                opt(r.error.clone()).replace(',', ";")
            ));
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    if let Some(bad) = rows.iter().find(|r| r.error.is_some()) {
        let n = rows.iter().filter(|r| r.error.is_some()).count();
        return Err(Error::Data(format!("{n} ablation rows failed; first: {} ({})", bad.label, bad.error.as_deref().unwrap_or(""))));
    }
    Ok(rows)
}

pub fn cmd_dump_kernels(out: &mut dyn Write) -> Result<()> {
    let bank = load_bank()?;
    w(out, format!("# {} kernels, asset sha256 {KERNEL_ASSET_SHA256}", bank.len()))?;
    for subset in FilterSubset::ABLATION {
        w(out, format!("# subset {subset}: {} kernels", bank.members(&subset)?.len()))?;
    }
    write!(out, "{}", bank.dump()).map_err(|e| Error::io("<output>", e))
}

pub fn cmd_generate(args: &SyntheticArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = SyntheticConfig {
        count_per_class: args.count_per_class,
        size: args.size,
        seed: args.seed,
        noise_sigma: args.noise_sigma,
    };
    let path = generate_synthetic(&cfg, &args.out)?;
    w(out, format!("wrote {} images per class to {}", cfg.count_per_class, path.display()))
}

pub fn cmd_split(args: &SplitArgs, out: &mut dyn Write) -> Result<()> {
    let ratios = crate::data::parse_ratios(&args.ratios)?;
    let manifest = Manifest::load(&args.manifest)?;
    let splits = split_manifest(&manifest, ratios, args.seed)?;
    let paths = write_splits(&splits, &args.manifest)?;
    for (m, p) in splits.iter().zip(&paths) {
        w(out, format!("{}: {} records", p.display(), m.len()))?;
    }
    Ok(())
}

pub fn cmd_summary(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let model = DualStreamModel::<f32>::build(cfg.model.clone(), cfg.seed)?;
    write!(out, "{}", model.summary_text()).map_err(|e| Error::io("<output>", e))
}

/// Parses `args` (program name first), runs the command and returns the process exit code.
pub fn main_with_args<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
