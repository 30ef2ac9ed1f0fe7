//! Command-line front end. Each subcommand parses its inputs, calls one
//! library operation and writes the result.
//!
//! Exit codes: 0 success, 1 invalid input or failed operation, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::correction::apply_corrections;
use crate::ensemble::{ensemble, sweep_subsets_ref};
use crate::error::{Error, Result};
use crate::model::{DatasetManifest, EnsembleRule, ImageSet, PredictionSet, Split};
use crate::overlap::{export_subset, group_by_method, method_correct_sets, overlap_labels, subset_correctness};
use crate::report::{emit_report, standard_report, ChartOptions, ReportInputs};
use crate::server::{self, TriageConfig, DEFAULT_PORT};
use crate::store;
use crate::taxonomy::{prevalence, resolve_annotations};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const LOG_ENV: &str = "OVERLAP_LAB_LOG";

#[derive(Debug, Parser)]
#[command(name = "overlap-lab", version, about = "Prediction-overlap analysis, ensembling and error triage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Test,
    Extra,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Split {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Test => Split::Test,
            SplitArg::Extra => Split::Extra,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Vote,
    Avg,
}

impl From<Mode> for EnsembleRule {
    fn from(m: Mode) -> EnsembleRule {
        match m {
            Mode::Vote => EnsembleRule::Vote,
            Mode::Avg => EnsembleRule::CpAvg,
        }
    }
}

#[derive(Debug, Args)]
struct Inputs {
    /// Dataset manifest (JSON).
    #[arg(long)]
    manifest: PathBuf,
    /// Prediction-set directories, in order.
    #[arg(long, num_args = 1.., required = true)]
    pred: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    split: SplitArg,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and validate a manifest and any prediction sets; print a summary.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, num_args = 1..)]
        pred: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Overlap label of every image in the split.
    Overlap {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Images correct by exactly each subset of methods (one run per method).
    Subsets {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ensemble all runs.
    Ensemble {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "avg")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean ensemble accuracy for every subset of methods.
    Sweep {
        #[command(flatten)]
        inputs: Inputs,
        /// Runs expected per method.
        #[arg(long)]
        replicates: usize,
        #[arg(long, value_enum, default_value = "avg")]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a label-correction table to a manifest.
    Remap {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        corrections: PathBuf,
        #[arg(long)]
        out_manifest: PathBuf,
        /// Where to write the dropped / relabeled id lists.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Error-class prevalence over the hard subset.
    Prevalence {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write report.json, tables.csv and SVG charts.
    Report {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Image ids with a given overlap label, one per line.
    ExportHard {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value_t = 0)]
        overlap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the triage API on 127.0.0.1.
    Serve {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        images_root: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PORT)]
        port: u16,
        /// Built UI bundle directory.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct RunSummary<'a> {
    path: String,
    model_id: &'a str,
    method_id: &'a str,
    replicate_index: u32,
    num_images: usize,
}

#[derive(Serialize)]
struct ValidateSummary<'a> {
    dataset_id: &'a str,
    num_classes: usize,
    num_images: usize,
    split_counts: BTreeMap<Split, usize>,
    runs: Vec<RunSummary<'a>>,
}

struct Loaded {
    manifest: DatasetManifest,
    runs: Vec<PredictionSet>,
    images: ImageSet,
}

fn load(inputs: &Inputs) -> Result<Loaded> {
    let manifest = store::load_manifest(&inputs.manifest)?;
    let runs = load_runs(&inputs.pred, &manifest)?;
    let images = manifest.split_ids(inputs.split.into());
    if images.is_empty() {
        return Err(Error::EmptyImageSet);
    }
    Ok(Loaded { manifest, runs, images })
}

fn load_runs(dirs: &[PathBuf], manifest: &DatasetManifest) -> Result<Vec<PredictionSet>> {
    dirs.iter()
        .map(|d| {
            log::info!("loading {}", d.display());
            store::load_prediction_set(d, manifest)
        })
        .collect()
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => store::write_json(path, value),
        None => {
            let mut text = serde_json::to_string_pretty(value).expect("serializable");
            text.push('\n');
            emit_text(None, &text)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Validate { manifest, pred, out } => {
            let m = store::load_manifest(&manifest)?;
            let runs = load_runs(&pred, &m)?;
            let summary = ValidateSummary {
                dataset_id: m.dataset_id(),
                num_classes: m.num_classes(),
                num_images: m.len(),
                split_counts: m.split_counts(),
                runs: runs
                    .iter()
                    .zip(&pred)
                    .map(|(r, p)| RunSummary {
                        path: p.display().to_string(),
                        model_id: r.model_id(),
                        method_id: r.method_id(),
                        replicate_index: r.replicate_index(),
                        num_images: r.num_images(),
                    })
                    .collect(),
            };
            emit_json(out.as_deref(), &summary)
        }
        Command::Overlap { inputs, out } => {
            let l = load(&inputs)?;
            emit_json(out.as_deref(), &overlap_labels(&l.manifest, &l.runs, &l.images)?)
        }
        Command::Subsets { inputs, out } => {
            let l = load(&inputs)?;
            let sets = method_correct_sets(&l.runs, &l.manifest, &l.images)?;
            emit_json(out.as_deref(), &subset_correctness(&sets, &l.images)?)
        }
        Command::Ensemble { inputs, mode, out } => {
            let l = load(&inputs)?;
            let refs: Vec<&PredictionSet> = l.runs.iter().collect();
            emit_json(out.as_deref(), &ensemble(mode.into(), &refs, &l.manifest, &l.images)?)
        }
        Command::Sweep {
            inputs,
            replicates,
            mode,
            out,
        } => {
            let l = load(&inputs)?;
            let groups = group_by_method(&l.runs);
            if let Some((method, runs)) = groups.iter().find(|(_, runs)| runs.len() != replicates) {
                return Err(Error::ReplicateCountMismatch {
                    method: method.clone(),
                    expected: replicates,
                    found: runs.len(),
                });
            }
            emit_json(out.as_deref(), &sweep_subsets_ref(&groups, &l.manifest, &l.images, mode.into())?)
        }
        Command::Remap {
            manifest,
            corrections,
            out_manifest,
            report,
        } => {
            let source = store::load_manifest(&manifest)?;
            let table = store::load_corrections(&corrections)?;
            let outcome = apply_corrections(&source, &table)?;
            store::write_manifest(&outcome.manifest, &out_manifest)?;
            if let Some(path) = report {
                store::write_json(&path, &outcome.report(&source, &table))?;
            }
            eprintln!(
                "{}: {} relabeled, {} dropped, {} remaining",
                outcome.manifest.dataset_id(),
                outcome.relabeled.len(),
                outcome.dropped.len(),
                outcome.manifest.len()
            );
            Ok(())
        }
        Command::Prevalence {
            inputs,
            annotations,
            out,
        } => {
            let l = load(&inputs)?;
            let hard: ImageSet = overlap_labels(&l.manifest, &l.runs, &l.images)?.hard().into_iter().collect();
            let entries = store::read_annotations(&annotations)?;
            emit_json(out.as_deref(), &prevalence(&resolve_annotations(&entries), &hard))
        }
        Command::Report {
            inputs,
            annotations,
            out_dir,
        } => {
            let l = load(&inputs)?;
            let entries = annotations.as_deref().map(store::read_annotations).transpose()?;
            let split: Split = inputs.split.into();
            let metadata = BTreeMap::from([
                ("dataset_id".to_string(), l.manifest.dataset_id().to_string()),
                ("split".to_string(), split.as_str().to_string()),
                ("runs".to_string(), l.runs.len().to_string()),
            ]);
            let report = standard_report(&ReportInputs {
                manifest: &l.manifest,
                runs: &l.runs,
                images: &l.images,
                annotations: entries.as_deref(),
                metadata,
            })?;
            let files = emit_report(&report, &out_dir, &ChartOptions::default())?;
            for path in files.paths {
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::ExportHard { inputs, overlap, out } => {
            let l = load(&inputs)?;
            let partition = overlap_labels(&l.manifest, &l.runs, &l.images)?;
            let text: String = export_subset(&partition, overlap).into_iter().map(|id| id + "\n").collect();
            emit_text(out.as_deref(), &text)
        }
        Command::Serve {
            inputs,
            images_root,
            annotations,
            port,
            assets,
        } => {
            let l = load(&inputs)?;
            let partition = overlap_labels(&l.manifest, &l.runs, &l.images)?;
            let config = TriageConfig {
                manifest: l.manifest,
                partition,
                runs: l.runs,
                images_root,
                annotations_path: annotations,
                assets_dir: assets,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<runtime>", e))?;
            runtime.block_on(server::serve(config, port))
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            EXIT_INVALID
        }
    }
}
