//! The `tamperwood` command line.
//!
//! Exit codes: 0 on success, 1 on usage or runtime errors, 2 when `attest`
//! finds that the embedded model fails the preservation or verifiability
//! rule. Every random choice derives from the global `--seed`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataio::{
    gen_synthetic, load_csv, load_libsvm, load_model, save_model, split, to_csv_string, write_csv,
    Dataset, LabelColumn, Model, ModelMeta, SplitSpec,
};
use crate::defence::{prune_forest_rep, prune_rep, roc_auc, score_all, Method};
use crate::embed::{
    embed_forest_blackbox, embed_forest_whitebox, embed_tree_blackbox, embed_tree_whitebox,
};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_criteria, repeated_trial, KnowledgeSource, Mode, TrialConfig, DEFAULT_ALPHA_P,
};
use crate::extract::audit;
use crate::forest::{accuracy, train_forest, Forest};
use crate::knowledge::{make_ke_testset, parse_knowledge, Knowledge, Schema};
use crate::tree::{train_tree, Classifier, Criterion, TrainParams, Tree};

#[derive(Parser, Debug)]
#[command(
    name = "tamperwood",
    version,
    about = "Embed, extract and detect knowledge in tree ensembles"
)]
struct Cli {
    /// Seed for every random choice (splits, bags, poisoning, expansion).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output style for tables and reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Label column of CSV inputs: a header name, a 0-based index, or `last`.
    #[arg(long, global = true, default_value = "last")]
    label_column: String,
    /// Read data files as sparse `label idx:val` lines with this many features.
    #[arg(long, global = true, value_name = "N_FEATURES")]
    libsvm: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Part {
    Train,
    Val,
    Test,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Blackbox,
    Whitebox,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Loss,
    Activation,
}

/// Where rows come from: a file, optionally cut by a seeded split.
#[derive(Args, Debug, Clone)]
struct DataArgs {
    /// Dataset path (CSV with a header, or libsvm with `--libsvm`).
    #[arg(long)]
    data: PathBuf,
    /// Train,val,test fractions such as `0.6,0.2,0.2` or a ratio such as `3:1:1`; the split is drawn from `--seed`.
    #[arg(long)]
    split: Option<String>,
    /// Which part of the split to use.
    #[arg(long, value_enum)]
    part: Option<Part>,
}

#[derive(Args, Debug, Clone)]
struct TrainArgs {
    /// Train a forest of this many trees instead of a single tree.
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value = "gini")]
    criterion: String,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
}

impl TrainArgs {
    fn params(&self, seed: u64) -> Result<TrainParams> {
        Ok(TrainParams {
            criterion: self.criterion.parse::<Criterion>()?,
            max_depth: self.depth,
            min_samples_leaf: self.min_samples_leaf,
            seed,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic classification dataset as CSV.
    GenData {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10)]
        features: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a tree or forest and save it as a model document.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Min-max scale features; the scaling is stored with the model.
        #[arg(long)]
        normalize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed knowledge by poisoning the training data or by expanding a trained model.
    Embed {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Knowledge as a file path, inline JSON, or text like `f1 = 2.5, f3 = 0.7 => 1`.
        #[arg(long)]
        knowledge: String,
        /// Trained model; required for whitebox, supplies shape and parameters for blackbox.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Training data for blackbox.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        split: Option<String>,
        #[arg(long, value_enum)]
        part: Option<Part>,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long)]
        normalize: bool,
        /// Iteration cap of the poisoning loop.
        #[arg(long, default_value_t = 50)]
        tmax: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the full report as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the root-to-leaf paths of every operated tree before and after.
        #[arg(long)]
        dump_paths: bool,
    },
    /// Check preservation and verifiability of an embedded model.
    Attest {
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        embedded: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        knowledge: String,
        /// Largest tolerated clean-accuracy drop.
        #[arg(long, default_value_t = DEFAULT_ALPHA_P)]
        alpha_p: f64,
        /// Write the knowledge-enhanced test set here as CSV.
        #[arg(long)]
        ke_out: Option<PathBuf>,
    },
    /// Look for embedded knowledge in a model.
    Extract {
        #[arg(long)]
        model: PathBuf,
        /// Training data of the model.
        #[arg(long)]
        train: PathBuf,
        /// Inputs to screen for suspicious activations.
        #[arg(long)]
        probe: PathBuf,
        /// Minimum share of modified rows that must agree on a change.
        #[arg(long, default_value_t = 0.2)]
        ck: f64,
        /// Feature-change bound, `M` or a range `LO..HI`.
        #[arg(long, default_value = "1..3")]
        m: String,
        /// Probe rows with activation similarity at most this are suspected.
        #[arg(long, default_value_t = 0.6)]
        eps2: f64,
    },
    /// Score inputs as suspicious and report the ROC curve.
    Detect {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Reference data: the baseline for `loss`, the training set for `activation`.
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Known-clean inputs (negatives).
        #[arg(long, requires = "suspect")]
        clean: Option<PathBuf>,
        /// Known-suspicious inputs (positives).
        #[arg(long, requires = "clean")]
        suspect: Option<PathBuf>,
        /// Inputs to score without ground truth.
        #[arg(long, conflicts_with_all = ["clean", "suspect"])]
        input: Option<PathBuf>,
        /// Flag scores at or above this value.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Reduced-error pruning against a validation set.
    Prune {
        #[arg(long)]
        model: PathBuf,
        /// Validation data.
        #[arg(long)]
        val: PathBuf,
        #[arg(long)]
        split: Option<String>,
        #[arg(long, value_enum)]
        part: Option<Part>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repeated seeded train, embed and evaluate trials.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        /// Fixed knowledge for every trial.
        #[arg(long, conflicts_with = "sample_knowledge")]
        knowledge: Option<String>,
        /// Draw fresh knowledge with this many features per trial (default 2).
        #[arg(long)]
        sample_knowledge: Option<usize>,
        #[arg(long, default_value_t = 20)]
        trees: usize,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        tmax: usize,
        /// Per-trial CSV; the variance summary still goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn cli_main(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let mut out = String::new();
    match run(&cli, &mut out) {
        Ok(code) => {
            print!("{out}");
            code
        }
        Err(e) => {
            print!("{out}");
            eprintln!("error: {e}");
            1
        }
    }
}

struct Ctx<'a> {
    seed: u64,
    format: Format,
    label_column: LabelColumn,
    libsvm: Option<usize>,
    out: &'a mut String,
}

fn run(cli: &Cli, out: &mut String) -> Result<i32> {
    let mut ctx = Ctx {
        seed: cli.seed,
        format: cli.format,
        label_column: LabelColumn::from(cli.label_column.as_str()),
        libsvm: cli.libsvm,
        out,
    };
    match &cli.command {
        Command::GenData {
            samples,
            features,
            classes,
            out,
        } => {
            let d = gen_synthetic(*samples, *features, *classes, ctx.seed)?;
            match out {
                Some(p) => write_csv(&d, p)?,
                None => ctx.out.push_str(&to_csv_string(&d)),
            }
            Ok(0)
        }
        Command::Train {
            data,
            train,
            normalize,
            out,
        } => cmd_train(&mut ctx, data, train, *normalize, out),
        Command::Embed {
            mode,
            knowledge,
            model,
            data,
            split,
            part,
            train,
            normalize,
            tmax,
            out,
            report,
            dump_paths,
        } => {
            let data = data.as_ref().map(|p| DataArgs {
                data: p.clone(),
                split: split.clone(),
                part: *part,
            });
            let req = EmbedRequest {
                knowledge,
                model: model.as_deref(),
                data: data.as_ref(),
                train,
                normalize: *normalize,
                tmax: *tmax,
                out,
                report: report.as_deref(),
                dump_paths: *dump_paths,
            };
            match mode {
                ModeArg::Blackbox => cmd_embed_blackbox(&mut ctx, &req),
                ModeArg::Whitebox => cmd_embed_whitebox(&mut ctx, &req),
                ModeArg::Both => Err(Error::usage(
                    "embed takes --mode blackbox or --mode whitebox",
                )),
            }
        }
        Command::Attest {
            original,
            embedded,
            data,
            knowledge,
            alpha_p,
            ke_out,
        } => cmd_attest(
            &mut ctx,
            original,
            embedded,
            data,
            knowledge,
            *alpha_p,
            ke_out.as_deref(),
        ),
        Command::Extract {
            model,
            train,
            probe,
            ck,
            m,
            eps2,
        } => cmd_extract(&mut ctx, model, train, probe, *ck, m, *eps2),
        Command::Detect {
            model,
            method,
            reference,
            clean,
            suspect,
            input,
            threshold,
        } => {
            let method = match method {
                MethodArg::Loss => Method::Loss,
                MethodArg::Activation => Method::Activation,
            };
            let inputs = match (clean, suspect, input) {
                (Some(c), Some(s), None) => DetectInputs::Labelled(c, s),
                (None, None, Some(i)) => DetectInputs::Unlabelled(i),
                _ => {
                    return Err(Error::usage(
                        "detect needs --clean and --suspect, or --input",
                    ))
                }
            };
            cmd_detect(&mut ctx, model, method, reference, inputs, *threshold)
        }
        Command::Prune {
            model,
            val,
            split,
            part,
            out,
        } => {
            let val = DataArgs {
                data: val.clone(),
                split: split.clone(),
                part: *part,
            };
            cmd_prune(&mut ctx, model, &val, out)
        }
        Command::Eval {
            data,
            seeds,
            mode,
            knowledge,
            sample_knowledge,
            trees,
            depth,
            tmax,
            out,
        } => {
            let d = ctx.load_dataset(data, None, Part::All)?;
            let source = match knowledge {
                Some(k) => KnowledgeSource::Fixed(read_knowledge(k, &Schema::of(&d))?),
                None => KnowledgeSource::Sampled {
                    n_features: sample_knowledge.unwrap_or(2),
                },
            };
            let mut config = TrialConfig::new(d, source);
            config.params = TrainParams {
                seed: ctx.seed,
                ..TrainParams::with_depth(*depth)
            };
            config.n_trees = *trees;
            config.t_max = *tmax;
            config.base_seed = ctx.seed;
            config.modes = match mode {
                ModeArg::Blackbox => vec![Mode::Blackbox],
                ModeArg::Whitebox => vec![Mode::Whitebox],
                ModeArg::Both => vec![Mode::Blackbox, Mode::Whitebox],
            };
            if let Some(f) = &data.split {
                let (a, b, c) = parse_fractions(f)?;
                config.fractions = (a, b, c);
            }
            let table = repeated_trial(&config, *seeds)?;
            match out {
                Some(p) => crate::dataio::atomic_write(p, table.to_csv().as_bytes())?,
                None if ctx.format == Format::Csv => ctx.out.push_str(&table.to_csv()),
                None => {}
            }
            let summary = table.summary_csv();
            ctx.table_from_csv(&summary);
            Ok(0)
        }
    }
}

impl Ctx<'_> {
    fn read_rows(&self, path: &Path) -> Result<Dataset> {
        match self.libsvm {
            Some(n) => load_libsvm(path, n),
            None => load_csv(path, &self.label_column, false),
        }
    }

    /// Loads a file, puts it in the model's input space and picks a split part.
    fn load_dataset(
        &self,
        a: &DataArgs,
        meta: Option<&ModelMeta>,
        default_part: Part,
    ) -> Result<Dataset> {
        let mut d = self.read_rows(&a.data)?;
        if let Some(meta) = meta {
            conform(&mut d, meta)?;
        }
        let part = a.part.unwrap_or(if a.split.is_some() {
            default_part
        } else {
            Part::All
        });
        match (&a.split, part) {
            (_, Part::All) => Ok(d),
            (None, _) => Err(Error::usage("--part needs --split")),
            (Some(f), part) => {
                let (tr, va, te) = parse_fractions(f)?;
                let (train, val, test) = split(&d, &SplitSpec::new(tr, va, te, self.seed)?)?;
                Ok(match part {
                    Part::Train => train,
                    Part::Val => val,
                    _ => test,
                })
            }
        }
    }

    fn load_plain(&self, path: &Path, meta: &ModelMeta) -> Result<Dataset> {
        let mut d = self.read_rows(path)?;
        conform(&mut d, meta)?;
        Ok(d)
    }

    /// Key/value report lines.
    fn kv(&mut self, pairs: &[(&str, String)]) {
        match self.format {
            Format::Csv => {
                self.out.push_str("key,value\n");
                for (k, v) in pairs {
                    let _ = writeln!(self.out, "{k},{}", csv_cell(v));
                }
            }
            Format::Text => {
                let w = pairs.iter().map(|p| p.0.len()).max().unwrap_or(0);
                for (k, v) in pairs {
                    let _ = writeln!(self.out, "{k:<w$}  {v}");
                }
            }
        }
    }

    /// Prints CSV as-is, or as aligned columns in text mode.
    fn table_from_csv(&mut self, csv: &str) {
        if self.format == Format::Csv {
            self.out.push_str(csv);
            return;
        }
        let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| {
                rows.iter()
                    .filter_map(|r| r.get(c))
                    .map(|s| s.len())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            let _ = writeln!(self.out, "{}", line.join("  ").trim_end());
        }
    }
}

fn csv_cell(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Applies the model's scaling and class numbering to freshly loaded rows.
fn conform(d: &mut Dataset, meta: &ModelMeta) -> Result<()> {
    if let Some(names) = &meta.label_names {
        d.align_labels(names)?;
    }
    if let Some(norm) = &meta.normalization {
        d.normalize_with(norm)?;
    }
    Ok(())
}

/// `0.6,0.2,0.2` or a ratio such as `3:1:1`.
fn parse_fractions(s: &str) -> Result<(f64, f64, f64)> {
    let ratio = s.contains(':');
    let parts: Vec<f64> = s
        .split([',', ':'])
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::usage(format!("bad --split '{s}', expected 0.6,0.2,0.2 or 3:1:1")))?;
    match parts[..] {
        [a, b, c] if ratio => {
            let sum = a + b + c;
            Ok((a / sum, b / sum, c / sum))
        }
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Error::usage(format!(
            "--split needs three fractions, got '{s}'"
        ))),
    }
}

fn parse_m_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::usage(format!("bad --m '{s}', expected N or LO..HI"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let m = s.trim().parse().map_err(|_| bad())?;
            (1, m)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Knowledge from a file when `arg` names one, otherwise inline.
fn read_knowledge(arg: &str, schema: &Schema) -> Result<Knowledge> {
    let p = Path::new(arg);
    let text = if p.is_file() {
        fs::read_to_string(p).map_err(|e| Error::io(p, e))?
    } else {
        arg.to_string()
    };
    parse_knowledge(&text, schema)
}

fn schema_of(model: &Model) -> Schema<'_> {
    let meta = model.meta();
    Schema {
        n_features: model.n_features(),
        n_classes: model.n_classes(),
        feature_names: meta.feature_names.as_deref(),
        label_names: meta.label_names.as_deref(),
    }
}

fn meta_of(d: &Dataset) -> ModelMeta {
    ModelMeta {
        normalization: d.normalization.clone(),
        feature_names: d.feature_names.clone(),
        label_names: d.label_names.clone(),
    }
}

/// The model as a forest; a single tree becomes a one-tree forest.
fn as_forest(model: &Model) -> Forest {
    match model {
        Model::Forest { forest, .. } => forest.clone(),
        Model::Tree { tree, params, .. } => Forest {
            trees: vec![tree.clone()],
            bags: Vec::new(),
            params: *params,
            seed: params.seed,
        },
    }
}

fn fmt3(v: f64) -> String {
    format!("{v:.4}")
}

fn cmd_train(
    ctx: &mut Ctx,
    data: &DataArgs,
    train: &TrainArgs,
    normalize: bool,
    out: &Path,
) -> Result<i32> {
    let mut d = ctx.load_dataset(data, None, Part::Train)?;
    if normalize {
        d.normalize();
    }
    let params = train.params(ctx.seed)?;
    let meta = meta_of(&d);
    let model = match train.trees {
        Some(n) => Model::Forest {
            forest: train_forest(&d, n, &params, ctx.seed)?,
            meta,
        },
        None => Model::Tree {
            tree: train_tree(&d, &params)?,
            params,
            meta,
        },
    };
    save_model(&model, out)?;
    let mut pairs = vec![
        ("model", out.display().to_string()),
        (
            "kind",
            match &model {
                Model::Tree { .. } => "tree".to_string(),
                Model::Forest { forest, .. } => format!("forest of {}", forest.len()),
            },
        ),
        ("rows", d.len().to_string()),
        ("train_accuracy", fmt3(accuracy(&model, &d)?)),
    ];
    if data.split.is_some() && data.part.is_none() {
        let test = ctx.load_dataset(
            &DataArgs {
                part: Some(Part::Test),
                ..data.clone()
            },
            None,
            Part::Test,
        )?;
        let mut test = test;
        if let Some(norm) = &model.meta().normalization {
            test.normalize_with(norm)?;
        }
        pairs.push(("test_accuracy", fmt3(accuracy(&model, &test)?)));
    }
    ctx.kv(&pairs);
    Ok(0)
}

struct EmbedRequest<'a> {
    knowledge: &'a str,
    model: Option<&'a Path>,
    data: Option<&'a DataArgs>,
    train: &'a TrainArgs,
    normalize: bool,
    tmax: usize,
    out: &'a Path,
    report: Option<&'a Path>,
    dump_paths: bool,
}

fn write_report(path: Option<&Path>, json: serde_json::Value) -> Result<()> {
    if let Some(p) = path {
        let mut text =
            serde_json::to_string_pretty(&json).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        crate::dataio::atomic_write(p, text.as_bytes())?;
    }
    Ok(())
}

fn dump(out: &mut String, title: &str, trees: &[(usize, &Tree)], meta: &ModelMeta) {
    let fname = |i: usize| match &meta.feature_names {
        Some(n) if i < n.len() => n[i].clone(),
        _ => format!("f_{i}"),
    };
    let cname = |c: usize| match &meta.label_names {
        Some(n) if c < n.len() => n[c].clone(),
        _ => c.to_string(),
    };
    for (i, t) in trees {
        let _ = writeln!(out, "# {title}, tree {i}");
        out.push_str(&t.dump_paths(&fname, &cname));
    }
}

fn cmd_embed_blackbox(ctx: &mut Ctx, req: &EmbedRequest) -> Result<i32> {
    let data = req
        .data
        .ok_or_else(|| Error::usage("blackbox embedding needs --data (the training set)"))?;
    let base = req.model.map(load_model).transpose()?;
    let mut d = ctx.load_dataset(data, base.as_ref().map(Model::meta), Part::Train)?;
    if base.is_none() && req.normalize {
        d.normalize();
    }
    let k = read_knowledge(req.knowledge, &Schema::of(&d))?;
    // A supplied model fixes the shape and parameters to reproduce.
    let (params, n_trees) = match &base {
        Some(Model::Forest { forest, .. }) => (forest.params, Some(forest.len())),
        Some(Model::Tree { params, .. }) => (*params, None),
        None => (req.train.params(ctx.seed)?, req.train.trees),
    };
    let meta = meta_of(&d);
    let start = Instant::now();
    let (model, report) = match n_trees {
        Some(n) => {
            let (forest, report) = embed_forest_blackbox(&d, &k, n, &params, req.tmax, ctx.seed)?;
            (Model::Forest { forest, meta }, report)
        }
        None => {
            let (tree, report) = embed_tree_blackbox(&d, &k, &params, req.tmax, ctx.seed)?;
            (Model::Tree { tree, params, meta }, report)
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    save_model(&model, req.out)?;
    let ke = make_ke_testset(&d, &k);
    ctx.kv(&[
        ("mode", "blackbox".into()),
        ("knowledge", k.to_string()),
        ("model", req.out.display().to_string()),
        ("operated_trees", report.per_tree.len().to_string()),
        ("ke_samples_added", report.ke_samples_added.to_string()),
        ("training_rows", d.len().to_string()),
        ("iterations", report.iterations.to_string()),
        ("converged", report.converged.to_string()),
        ("train_accuracy", fmt3(accuracy(&model, &d)?)),
        ("ke_train_accuracy", fmt3(accuracy(&model, &ke)?)),
        ("seconds", format!("{seconds:.4}")),
    ]);
    if req.dump_paths {
        let trees: Vec<(usize, &Tree)> = match &model {
            Model::Tree { tree, .. } => vec![(0, tree)],
            Model::Forest { forest, .. } => report
                .per_tree
                .iter()
                .map(|p| (p.tree, &forest.trees[p.tree]))
                .collect(),
        };
        dump(ctx.out, "after", &trees, model.meta());
    }
    write_report(
        req.report,
        serde_json::json!({ "mode": "blackbox", "seconds": seconds, "report": report }),
    )?;
    Ok(0)
}

fn cmd_embed_whitebox(ctx: &mut Ctx, req: &EmbedRequest) -> Result<i32> {
    let path = req
        .model
        .ok_or_else(|| Error::usage("whitebox embedding needs --model"))?;
    let model = load_model(path)?;
    let k = read_knowledge(req.knowledge, &schema_of(&model))?;
    let start = Instant::now();
    let (embedded, per_tree) = match &model {
        Model::Tree { tree, params, meta } => {
            let (t, r) = embed_tree_whitebox(tree, &k, ctx.seed)?;
            (
                Model::Tree {
                    tree: t,
                    params: *params,
                    meta: meta.clone(),
                },
                vec![(0, r)],
            )
        }
        Model::Forest { forest, meta } => {
            let (f, r) = embed_forest_whitebox(forest, &k, ctx.seed)?;
            (
                Model::Forest {
                    forest: f,
                    meta: meta.clone(),
                },
                r.per_tree,
            )
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    save_model(&embedded, req.out)?;
    let modified: usize = per_tree.iter().map(|(_, r)| r.modified_paths).sum();
    let depth_increase = per_tree
        .iter()
        .map(|(_, r)| r.depth_after.saturating_sub(r.depth_before))
        .max()
        .unwrap_or(0);
    ctx.kv(&[
        ("mode", "whitebox".into()),
        ("knowledge", k.to_string()),
        ("model", req.out.display().to_string()),
        ("operated_trees", per_tree.len().to_string()),
        ("modified_paths", modified.to_string()),
        ("max_depth_increase", depth_increase.to_string()),
        ("seconds", format!("{seconds:.4}")),
    ]);
    if req.dump_paths {
        let pick = |m: &Model| -> Vec<(usize, Tree)> {
            let f = as_forest(m);
            per_tree
                .iter()
                .map(|(i, _)| (*i, f.trees[*i].clone()))
                .collect()
        };
        let (before, after) = (pick(&model), pick(&embedded));
        let before: Vec<(usize, &Tree)> = before.iter().map(|(i, t)| (*i, t)).collect();
        let after: Vec<(usize, &Tree)> = after.iter().map(|(i, t)| (*i, t)).collect();
        dump(ctx.out, "before", &before, model.meta());
        dump(ctx.out, "after", &after, model.meta());
    }
    write_report(
        req.report,
        serde_json::json!({ "mode": "whitebox", "seconds": seconds, "per_tree": per_tree }),
    )?;
    Ok(0)
}

fn cmd_attest(
    ctx: &mut Ctx,
    original: &Path,
    embedded: &Path,
    data: &DataArgs,
    knowledge: &str,
    alpha_p: f64,
    ke_out: Option<&Path>,
) -> Result<i32> {
    let orig = load_model(original)?;
    let emb = load_model(embedded)?;
    if orig.n_features() != emb.n_features() || orig.n_classes() != emb.n_classes() {
        return Err(Error::usage("the two models do not share a feature space"));
    }
    let test = ctx.load_dataset(data, Some(emb.meta()), Part::Test)?;
    let k = read_knowledge(knowledge, &schema_of(&emb))?;
    let report = evaluate_criteria(&orig, &emb, &test, &k, alpha_p)?;
    if let Some(p) = ke_out {
        write_csv(&make_ke_testset(&test, &k), p)?;
    }
    ctx.kv(&[
        ("knowledge", k.to_string()),
        ("test_rows", test.len().to_string()),
        ("clean_acc_before", fmt3(report.clean_acc_before)),
        ("clean_acc_after", fmt3(report.clean_acc_after)),
        ("ke_acc_before", fmt3(report.ke_acc_before)),
        ("ke_acc_after", fmt3(report.ke_acc_after)),
        ("alpha_p", report.alpha_p.to_string()),
        ("p_rule_pass", report.p_rule_pass.to_string()),
        ("v_rule_pass", report.v_rule_pass.to_string()),
        ("seed", ctx.seed.to_string()),
    ]);
    Ok(if report.passed() { 0 } else { 2 })
}

fn cmd_extract(
    ctx: &mut Ctx,
    model: &Path,
    train: &Path,
    probe: &Path,
    ck: f64,
    m: &str,
    eps2: f64,
) -> Result<i32> {
    let (m_start, m_max) = parse_m_range(m)?;
    let model = load_model(model)?;
    let d_train = ctx.load_plain(train, model.meta())?;
    let probe = ctx.load_plain(probe, model.meta())?;
    let forest = as_forest(&model);
    let start = Instant::now();
    let report = audit(&forest, &probe, &d_train, eps2, ck, m_start, m_max)?;
    let seconds = start.elapsed().as_secs_f64();
    let meta = model.meta();
    let fname = |i: usize| match &meta.feature_names {
        Some(n) if i < n.len() => n[i].clone(),
        _ => format!("f{i}"),
    };
    let cname = |c: usize| match &meta.label_names {
        Some(n) if c < n.len() => n[c].clone(),
        _ => c.to_string(),
    };
    let mut pairs = vec![
        ("suspected_paths", report.flagged.to_string()),
        ("labels_examined", report.labels.len().to_string()),
    ];
    for l in &report.labels {
        pairs.push((
            "label",
            format!("{} ({} suspected paths)", cname(l.label), l.suspected),
        ));
        match &l.result {
            None => pairs.push(("  result", "no knowledge recovered".into())),
            Some(x) => {
                pairs.push(("  knowledge", x.knowledge.describe(&fname, &cname)));
                pairs.push(("  support", fmt3(x.support)));
                pairs.push(("  m_used", x.m_used.to_string()));
                pairs.push(("  candidates", x.candidates.to_string()));
                for w in x.witnesses.iter().take(5) {
                    let vals: Vec<String> = w.modified.iter().map(|v| format!("{v}")).collect();
                    pairs.push(("  witness", format!("row {}: [{}]", w.row, vals.join(" "))));
                }
                if x.witnesses.len() > 5 {
                    pairs.push(("  witness", format!("... {} more", x.witnesses.len() - 5)));
                }
            }
        }
    }
    pairs.push(("seconds", format!("{seconds:.4}")));
    ctx.kv(&pairs);
    Ok(0)
}

enum DetectInputs<'a> {
    Labelled(&'a Path, &'a Path),
    Unlabelled(&'a Path),
}

fn cmd_detect(
    ctx: &mut Ctx,
    model: &Path,
    method: Method,
    reference: &Path,
    inputs: DetectInputs,
    threshold: Option<f64>,
) -> Result<i32> {
    let model = load_model(model)?;
    let forest = as_forest(&model);
    let reference = ctx.load_plain(reference, model.meta())?;
    match inputs {
        DetectInputs::Unlabelled(p) => {
            let d = ctx.load_plain(p, model.meta())?;
            let scores = score_all(&forest, &d, &reference, method, threshold);
            let mut csv = String::from("row,score,flagged\n");
            for (i, s) in scores.iter().enumerate() {
                let flag = s.flagged().map_or(String::new(), |f| f.to_string());
                let _ = writeln!(csv, "{i},{:.6},{flag}", s.score);
            }
            ctx.table_from_csv(&csv);
        }
        DetectInputs::Labelled(clean, suspect) => {
            let clean = ctx.load_plain(clean, model.meta())?;
            let suspect = ctx.load_plain(suspect, model.meta())?;
            let mut labelled: Vec<(f64, bool)> =
                score_all(&forest, &clean, &reference, method, threshold)
                    .iter()
                    .map(|s| (s.score, false))
                    .collect();
            labelled.extend(
                score_all(&forest, &suspect, &reference, method, threshold)
                    .iter()
                    .map(|s| (s.score, true)),
            );
            let roc = roc_auc(&labelled)?;
            let mut csv = String::from("threshold,fpr,tpr\n");
            for (t, (fpr, tpr)) in roc.thresholds.iter().zip(&roc.points) {
                let _ = writeln!(csv, "{t},{fpr:.6},{tpr:.6}");
            }
            ctx.table_from_csv(&csv);
            let _ = writeln!(ctx.out, "auc,{:.6}", roc.auc);
        }
    }
    Ok(0)
}

fn cmd_prune(ctx: &mut Ctx, model_path: &Path, val: &DataArgs, out: &Path) -> Result<i32> {
    let model = load_model(model_path)?;
    let val = ctx.load_dataset(val, Some(model.meta()), Part::Val)?;
    let before = accuracy(&model, &val)?;
    let (pruned, leaves_before, leaves_after) = match &model {
        Model::Tree { tree, params, meta } => {
            let t = prune_rep(tree, &val);
            let (a, b) = (tree.n_leaves(), t.n_leaves());
            (
                Model::Tree {
                    tree: t,
                    params: *params,
                    meta: meta.clone(),
                },
                a,
                b,
            )
        }
        Model::Forest { forest, meta } => {
            let f = prune_forest_rep(forest, &val);
            let count = |f: &Forest| f.trees.iter().map(Tree::n_leaves).sum::<usize>();
            let (a, b) = (count(forest), count(&f));
            (
                Model::Forest {
                    forest: f,
                    meta: meta.clone(),
                },
                a,
                b,
            )
        }
    };
    save_model(&pruned, out)?;
    ctx.kv(&[
        ("model", out.display().to_string()),
        ("validation_rows", val.len().to_string()),
        ("leaves_before", leaves_before.to_string()),
        ("leaves_after", leaves_after.to_string()),
        ("val_accuracy_before", fmt3(before)),
        ("val_accuracy_after", fmt3(accuracy(&pruned, &val)?)),
    ]);
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_range_forms() {
        assert_eq!(parse_m_range("1..3").unwrap(), (1, 3));
        assert_eq!(parse_m_range("2").unwrap(), (1, 2));
        assert!(parse_m_range("3..1").is_err());
        assert!(parse_m_range("0..2").is_err());
    }

    #[test]
    fn fractions() {
        assert_eq!(parse_fractions("0.6,0.2,0.2").unwrap(), (0.6, 0.2, 0.2));
        assert!(parse_fractions("0.6,0.4").is_err());
        assert_eq!(parse_fractions("3:1:1").unwrap(), (0.6, 0.2, 0.2));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let argv: Vec<String> = ["tamperwood", "train", "--bogus"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(cli_main(&argv), 1);
    }
}
