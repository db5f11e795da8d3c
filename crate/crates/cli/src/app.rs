//! Argument definitions and command dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;

use rembed_core::downstream::{
    evaluate, predict_topk, train_independent_logistic, train_inner_product, train_pca_decoder,
    LogisticConfig, TrainedModel,
};
use rembed_core::embed::{
    cs_embed, exact_oracle, pca_feature_embed, principal_angles, rembrandt_embed_detailed,
};
use rembed_core::matrix::RNG_ALGORITHM;
use rembed_core::synth::{gapped_instance, make_synthetic, GappedSpec, SynthSpec};
use rembed_core::{Dataset, EmbedConfig, Embedding, Ridge, SolverConfig};

use crate::error::{CliError, Result};
use crate::formats::{
    load_embedding, load_model, read_predictions, save_embedding, save_model, write_predictions,
};
use crate::svmlight::{load_svmlight, save_svmlight, Labeled, SvmlightOptions};

#[derive(Debug, Parser)]
#[command(name = "rembed", version, about = "Randomized label embeddings for extreme classification")]
pub struct Cli {
    /// Accepted for scripts; every run is already deterministic given --seed.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct FormatArgs {
    /// Index of the first label in svmlight files.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub labels_base: u8,
    /// Index of the first feature in svmlight files.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub features_base: u8,
    /// Number of features; inferred from the data if omitted.
    #[arg(long)]
    pub features: Option<usize>,
    /// Number of classes; inferred from the data if omitted.
    #[arg(long)]
    pub classes: Option<usize>,
}

impl FormatArgs {
    fn options(&self) -> SvmlightOptions {
        SvmlightOptions {
            labels_base: self.labels_base as usize,
            features_base: self.features_base as usize,
            features: self.features,
            classes: self.classes,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Ridge penalty: `rel:F` (F times the mean squared row norm), `abs:L`,
    /// or a bare number meaning `rel:`. Default rel:1e-6 (0 for oracle-check).
    #[arg(long, value_parser = parse_ridge)]
    pub ridge: Option<Ridge>,
    /// Relative gradient tolerance of the least-squares solves.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Iteration cap per least-squares column.
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
}

impl SolverArgs {
    fn config(&self, default_ridge: Ridge) -> SolverConfig {
        SolverConfig {
            ridge: self.ridge.unwrap_or(default_ridge),
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EmbedArgs {
    /// Embedding dimension.
    #[arg(long)]
    pub k: usize,
    /// Oversampling.
    #[arg(long, default_value_t = EmbedConfig::DEFAULT_OVERSAMPLING)]
    pub p: usize,
    /// Power iterations.
    #[arg(long, default_value_t = EmbedConfig::DEFAULT_POWER_ITERATIONS)]
    pub q: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EmbedArgs {
    fn config(&self, solver: SolverConfig) -> EmbedConfig {
        EmbedConfig {
            k: self.k,
            p: self.p,
            q: self.q,
            seed: self.seed,
            solver,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Randomized embedding of Y^T Π Y.
    Re,
    /// Random Gaussian projection (ignores the data).
    Cs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    InnerProduct,
    IndependentLogistic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a label embedding and write it as a REMBED file.
    Embed {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Where to write the JSON run report (stdout if omitted).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Method::Re)]
        method: Method,
        /// Scale each label row to unit norm first.
        #[arg(long)]
        normalize_labels: bool,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Compare the randomized embedding with the exact dense one on a small dataset.
    OracleCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        normalize_labels: bool,
        #[command(flatten)]
        embed: EmbedArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Fit a decoder on an embedding (or on a PCA feature embedding).
    Train {
        #[arg(long)]
        input: PathBuf,
        /// REMBED file to decode through.
        #[arg(long, required_unless_present = "pca", conflicts_with = "pca")]
        embedding: Option<PathBuf>,
        /// Use a rank-K unsupervised feature embedding instead.
        #[arg(long, value_name = "K")]
        pca: Option<usize>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::InnerProduct)]
        model: ModelArg,
        #[arg(long, default_value_t = LogisticConfig::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = LogisticConfig::default().lr)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Write the top-k labels for each example.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Predictions file (stdout if omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        topk: usize,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Score predictions against the labels of an svmlight file.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Generate a synthetic dataset with planted low-rank label structure.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        c: usize,
        /// Rank of the planted scores (the embedding dimension with --gapped).
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        labels_per_example: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Draw a small instance with a relative eigengap after `rank` instead.
        #[arg(long)]
        gapped: bool,
        #[arg(long, default_value_t = 0.1)]
        min_gap: f64,
        /// Training split (the whole instance with --gapped).
        #[arg(long)]
        output: PathBuf,
        /// Test split; required unless --gapped.
        #[arg(long, required_unless_present = "gapped")]
        test_output: Option<PathBuf>,
        #[command(flatten)]
        format: FormatArgs,
    },
}

fn parse_ridge(s: &str) -> std::result::Result<Ridge, String> {
    let (kind, num) = match s.split_once(':') {
        Some((k, v)) => (k, v),
        None => ("rel", s),
    };
    let v: f64 = num.parse().map_err(|_| format!("invalid ridge value {num:?}"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err("ridge must be finite and >= 0".into());
    }
    match kind {
        "rel" => Ok(Ridge::Relative(v)),
        "abs" => Ok(Ridge::Absolute(v)),
        other => Err(format!("unknown ridge kind {other:?}; use rel: or abs:")),
    }
}

#[derive(Debug, Serialize)]
pub struct EmbedReport {
    pub command: &'static str,
    pub input: PathBuf,
    pub output: PathBuf,
    pub method: Method,
    pub config: EmbedConfig,
    pub normalize_labels: bool,
    pub rng: &'static str,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub nnz_x: usize,
    pub nnz_y: usize,
    pub avg_label_sparsity: f64,
    /// Resolved ridge penalty (absent for `cs`).
    pub lambda: Option<f64>,
    pub width: Option<usize>,
    pub data_passes: Option<usize>,
    pub wall_time_secs: f64,
    pub sigma: Vec<f64>,
}

fn stdout_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn load_dataset(path: &Path, opts: &SvmlightOptions, normalize: bool) -> Result<Dataset> {
    let data = load_svmlight(path, opts)?.into_dataset()?;
    info!("loaded {}: n={} d={} c={}", path.display(), data.n(), data.d(), data.c());
    Ok(if normalize { data.with_normalized_labels() } else { data })
}

/// Runs one command; human-readable output goes to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Embed {
            input,
            output,
            report,
            method,
            normalize_labels,
            embed,
            solver,
            format,
        } => {
            let cfg = embed.config(solver.config(SolverConfig::default().ridge));
            cfg.validate()?;
            cfg.solver.validate()?;
            let data = load_dataset(&input, &format.options(), normalize_labels)?;
            let start = Instant::now();
            let (emb, diag) = match method {
                Method::Re => {
                    let (e, d) = rembrandt_embed_detailed(&data, &cfg)?;
                    (e, Some(d))
                }
                Method::Cs => (cs_embed(data.c(), cfg.k, cfg.seed)?, None),
            };
            let wall_time_secs = start.elapsed().as_secs_f64();
            save_embedding(&output, &emb)?;
            let rep = EmbedReport {
                command: "embed",
                input,
                output,
                method,
                config: cfg,
                normalize_labels,
                rng: RNG_ALGORITHM,
                n: data.n(),
                d: data.d(),
                c: data.c(),
                nnz_x: data.x().nnz(),
                nnz_y: data.y().nnz(),
                avg_label_sparsity: data.avg_label_sparsity(),
                lambda: diag.as_ref().map(|d| d.lambda),
                width: diag.as_ref().map(|d| d.width),
                data_passes: diag.as_ref().map(|d| d.data_passes),
                wall_time_secs,
                sigma: emb.sigma().to_vec(),
            };
            let json = serde_json::to_string_pretty(&rep).expect("report serializes") + "\n";
            emit(out, report.as_deref(), &json)
        }
        Command::OracleCheck {
            input,
            normalize_labels,
            embed,
            solver,
            format,
        } => {
            let cfg = embed.config(solver.config(Ridge::none()));
            cfg.validate()?;
            cfg.solver.validate()?;
            let data = load_dataset(&input, &format.options(), normalize_labels)?;
            let (emb, _) = rembrandt_embed_detailed(&data, &cfg)?;
            let oracle = exact_oracle(&data, cfg.k)?;
            let text = oracle_report(&emb, &oracle)?;
            emit(out, None, &text)
        }
        Command::Train {
            input,
            embedding,
            pca,
            output,
            model,
            epochs,
            lr,
            seed,
            solver,
            format,
        } => {
            let solver = solver.config(SolverConfig::default().ridge);
            solver.validate()?;
            let mut opts = format.options();
            let base = match (&embedding, pca) {
                (Some(path), _) => {
                    let emb = load_embedding(path)?;
                    opts.classes = opts.classes.or(Some(emb.c()));
                    let data = load_dataset(&input, &opts, false)?;
                    (train_inner_product(&data, &emb, &solver)?, data)
                }
                (None, Some(k)) => {
                    let data = load_dataset(&input, &opts, false)?;
                    let cfg = EmbedConfig {
                        seed,
                        solver,
                        ..EmbedConfig::new(k)
                    };
                    let w = pca_feature_embed(&data, k, &cfg)?;
                    (train_pca_decoder(&data, &w, &solver)?, data)
                }
                (None, None) => return Err(CliError::Usage("train needs --embedding or --pca".into())),
            };
            let (base, data) = base;
            let trained = match model {
                ModelArg::InnerProduct => base,
                ModelArg::IndependentLogistic => {
                    let repr = base.represent(data.x())?;
                    let cfg = LogisticConfig { epochs, lr, seed };
                    train_independent_logistic(&base, &repr, data.y(), &cfg)?
                }
            };
            save_model(&output, &trained)
        }
        Command::Predict {
            model,
            input,
            output,
            topk,
            format,
        } => {
            let model: TrainedModel = load_model(&model)?;
            let mut opts = format.options();
            opts.features = opts.features.or(Some(model.d()));
            let data: Labeled = load_svmlight(&input, &opts)?;
            let preds = predict_topk(&model, &data.x, topk)?;
            emit(out, output.as_deref(), &write_predictions(&preds, opts.labels_base))
        }
        Command::Evaluate {
            predictions,
            truth,
            format,
        } => {
            let opts = format.options();
            let text = std::fs::read_to_string(&predictions).map_err(|e| CliError::io(&predictions, e))?;
            let preds = read_predictions(&text, opts.labels_base)?;
            let truth = load_svmlight(&truth, &opts)?;
            let r = evaluate(&preds, &truth.y)?;
            let text = format!(
                "test_error {:.4}\nprecision_at_1 {:.4}\nexamples {}\nexcluded {}\n",
                r.test_error, r.precision_at_1, r.n_eval, r.n_excluded
            );
            emit(out, None, &text)
        }
        Command::Synth {
            n,
            d,
            c,
            rank,
            noise,
            labels_per_example,
            density,
            seed,
            gapped,
            min_gap,
            output,
            test_output,
            format,
        } => {
            let opts = format.options();
            if gapped {
                let inst = gapped_instance(&GappedSpec {
                    n,
                    d,
                    c,
                    k: rank,
                    min_gap,
                    seed,
                })?;
                info!("gapped instance: gap {:.4} after {} attempts", inst.gap, inst.attempts);
                save_svmlight(&output, &Labeled::from(&inst.data), &opts)?;
                if let Some(p) = test_output {
                    save_svmlight(&p, &Labeled::from(&inst.data), &opts)?;
                }
                return Ok(());
            }
            let spec = SynthSpec {
                n,
                d,
                c,
                true_rank: rank,
                label_noise: noise,
                labels_per_example,
                feature_density: density,
                seed,
            };
            let (train, test) = make_synthetic(&spec)?;
            save_svmlight(&output, &Labeled::from(&train), &opts)?;
            let test_path = test_output.ok_or_else(|| CliError::Usage("--test-output is required".into()))?;
            save_svmlight(&test_path, &Labeled::from(&test), &opts)
        }
    }
}

fn oracle_report(emb: &Embedding, oracle: &Embedding) -> Result<String> {
    let angles = principal_angles(emb.v(), oracle.v())?;
    let max_angle = angles.iter().copied().fold(0.0, f64::max);
    let deltas: Vec<f64> = emb
        .sigma()
        .iter()
        .zip(oracle.sigma())
        .map(|(a, b)| if *b > 0.0 { (a - b).abs() / b } else { (a - b).abs() })
        .collect();
    let max_delta = deltas.iter().copied().fold(0.0, f64::max);
    let join = |v: &[f64]| v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ");
    Ok(format!(
        "principal_angles {}\nmax_principal_angle {max_angle:.6e}\nsigma_embed {}\nsigma_oracle {}\n\
         sigma_relative_delta {}\nmax_sigma_relative_delta {max_delta:.6e}\n",
        join(&angles),
        join(emb.sigma()),
        join(oracle.sigma()),
        join(&deltas),
    ))
}
