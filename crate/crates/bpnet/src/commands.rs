//! The `bpnet` subcommands. Each takes its parsed arguments and a log sink
//! for progress lines, so tests can drive them without a subprocess.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use bpnet_core::dataset::{
    extract_bp_targets, make_windows, split_record, synth_subject_with, Segment, SubjectRecord, SynthOptions,
    WindowedExample,
};
use bpnet_core::metrics::{build_report, EvalReport, SubjectPrediction};
use bpnet_core::model::{build_bpnet, BPNetModel};
use bpnet_core::signal::{denoise_ecg, denoise_ppg};
use bpnet_core::train::{predict, train, EpochRecord};
use clap::{Args, Parser, Subcommand};

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::config::{DataConfig, RunConfig};
use crate::error::{CoreContext, Error, Result};
use crate::records::{
    read_manifest, read_record, record_path, targets_csv, write_atomic, write_manifest, write_record, ManifestEntry,
    MANIFEST_FILE, TARGETS_DIR,
};
use crate::report::{write_report, ReportInputs, HISTOGRAM_BIN_WIDTH_MMHG};

#[derive(Debug, Parser)]
#[command(name = "bpnet", version, about = "Cuffless blood pressure estimation from ECG and PPG")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic subjects with known pressure targets.
    Synth(SynthArgs),
    /// Denoise the ECG and PPG channels of every record in a directory.
    Preprocess(PreprocessArgs),
    /// Train a model on preprocessed records.
    Train(TrainArgs),
    /// Evaluate a checkpoint on each subject's test segment and write a report.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Number of subjects to generate (at least 1).
    #[arg(long)]
    pub subjects: usize,
    /// Seed of the first subject; subject i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record length in seconds (at least 30).
    #[arg(long, default_value_t = 300.0)]
    pub duration: f64,
    /// Output directory for records, manifest and targets.
    #[arg(long)]
    pub out: PathBuf,
    /// Amplitude of the added 60 Hz mains tone.
    #[arg(long, default_value_t = 0.05)]
    pub mains_amplitude: f64,
    /// Amplitude of the added 0.2 Hz baseline drift.
    #[arg(long, default_value_t = 0.2)]
    pub drift_amplitude: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    /// Directory of raw records with a manifest.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output directory; receives denoised records, the manifest and targets.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Directory of preprocessed records.
    #[arg(long)]
    pub data: PathBuf,
    /// Run configuration (JSON; model, train and data sections).
    #[arg(long)]
    pub config: PathBuf,
    /// Checkpoint path; history.csv is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the configured seed for initialization, shuffling and dropout.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Start from this checkpoint's parameters; its model section must match the config.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Train on one subject only (per-subject mode).
    #[arg(long)]
    pub subject: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub ckpt: PathBuf,
    /// Directory of preprocessed records.
    #[arg(long)]
    pub data: PathBuf,
    /// Report output directory.
    #[arg(long)]
    pub report: PathBuf,
}

pub fn run(cli: Cli, log: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a, log),
        Command::Preprocess(a) => preprocess(&a, log).map(|_| ()),
        Command::Train(a) => {
            let summary = train_command(&a, log)?;
            println!("final validation loss: {}", summary.final_valid_loss);
            Ok(())
        }
        Command::Eval(a) => eval(&a, log).map(|_| ()),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Heart rate for a synthetic subject, 1.0 to 1.35 Hz by seed.
pub fn synth_heart_rate_hz(seed: u64) -> f64 {
    1.0 + 0.05 * (seed % 8) as f64
}

pub fn synth(args: &SynthArgs, log: &mut dyn Write) -> Result<()> {
    if args.subjects == 0 {
        return Err(Error::Usage("--subjects must be at least 1".into()));
    }
    let options = SynthOptions {
        mains_amplitude: args.mains_amplitude,
        drift_amplitude: args.drift_amplitude,
        ..SynthOptions::default()
    };
    create_dir(&args.out)?;
    create_dir(&args.out.join(TARGETS_DIR))?;
    let mut entries = Vec::with_capacity(args.subjects);
    for i in 0..args.subjects as u64 {
        let seed = args.seed.wrapping_add(i);
        let subject = synth_subject_with(seed, args.duration, synth_heart_rate_hz(seed), &options)
            .context(|| format!("synthetic subject seed {seed}"))?;
        let id = subject.record.subject_id().to_string();
        write_record(&record_path(&args.out, &id), &subject.record)?;
        write_atomic(
            &record_path(&args.out.join(TARGETS_DIR), &id),
            targets_csv(&subject.targets).as_bytes(),
        )?;
        entries.push(ManifestEntry {
            subject_id: id,
            ecg_lead: subject.record.ecg_lead().to_string(),
        });
    }
    write_manifest(&args.out, &entries)?;
    let _ = writeln!(log, "wrote {} subjects to {}", entries.len(), args.out.display());
    Ok(())
}

fn denoise_record(record: &SubjectRecord) -> bpnet_core::Result<SubjectRecord> {
    record.with_inputs(denoise_ecg(record.ecg())?, denoise_ppg(record.ppg())?)
}

fn max_abs_delta(a: &SubjectRecord, b: &SubjectRecord) -> f64 {
    let d = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    d(a.ecg().samples(), b.ecg().samples()).max(d(a.ppg().samples(), b.ppg().samples()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreprocessSummary {
    pub written: Vec<String>,
    /// Largest sample change when the chain is applied a second time.
    pub idempotence_delta: Vec<(String, f64)>,
}

/// Denoises every manifest entry. Failing files are skipped and reported
/// together once the rest are written.
pub fn preprocess(args: &PreprocessArgs, log: &mut dyn Write) -> Result<PreprocessSummary> {
    let has_manifest = args.input.join(MANIFEST_FILE).is_file();
    if !has_manifest {
        let entries = fs::read_dir(&args.input).map_err(|e| Error::io(&args.input, e))?;
        if entries.count() == 0 {
            let _ = writeln!(log, "warning: {} is empty, nothing to do", args.input.display());
            return Ok(PreprocessSummary::default());
        }
    }
    let manifest = read_manifest(&args.input)?;
    create_dir(&args.out)?;
    let mut summary = PreprocessSummary::default();
    let mut kept = Vec::new();
    let mut failed = Vec::new();
    for entry in &manifest {
        let path = record_path(&args.input, &entry.subject_id);
        let outcome = read_record(&path, &entry.subject_id, &entry.ecg_lead).and_then(|raw| {
            let clean = denoise_record(&raw).context(|| path.display().to_string())?;
            let again = denoise_record(&clean).context(|| path.display().to_string())?;
            write_record(&record_path(&args.out, &entry.subject_id), &clean)?;
            Ok(max_abs_delta(&clean, &again))
        });
        match outcome {
            Ok(delta) => {
                let _ = writeln!(log, "{}: denoised, idempotence delta {delta:.3e}", entry.subject_id);
                summary.written.push(entry.subject_id.clone());
                summary.idempotence_delta.push((entry.subject_id.clone(), delta));
                kept.push(entry.clone());
            }
            Err(e) => {
                let _ = writeln!(log, "error: {e}");
                failed.push(path.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned()));
            }
        }
    }
    write_manifest(&args.out, &kept)?;
    copy_targets(&args.input, &args.out, &kept)?;
    if failed.is_empty() {
        Ok(summary)
    } else {
        Err(Error::Batch {
            count: failed.len(),
            total: manifest.len(),
            names: failed.join(", "),
        })
    }
}

fn copy_targets(input: &Path, out: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let src_dir = input.join(TARGETS_DIR);
    if !src_dir.is_dir() {
        return Ok(());
    }
    let dst_dir = out.join(TARGETS_DIR);
    create_dir(&dst_dir)?;
    for e in entries {
        let src = record_path(&src_dir, &e.subject_id);
        if src.is_file() {
            let bytes = fs::read(&src).map_err(|err| Error::io(&src, err))?;
            write_atomic(&record_path(&dst_dir, &e.subject_id), &bytes)?;
        }
    }
    Ok(())
}

/// Train, valid and test segments of one record, targets taken from its ABP.
pub fn subject_segments(record: &SubjectRecord, data: &DataConfig) -> Result<[Segment; 3]> {
    let id = record.subject_id();
    let targets = extract_bp_targets(record.abp()).context(|| format!("{id}: ABP targets"))?;
    split_record(record, &targets, &data.split, 1).context(|| format!("{id}: split"))
}

pub fn load_records(dir: &Path, only: Option<&str>) -> Result<Vec<SubjectRecord>> {
    let mut manifest = read_manifest(dir)?;
    if let Some(id) = only {
        manifest.retain(|e| e.subject_id == id);
        if manifest.is_empty() {
            return Err(Error::Usage(format!("subject '{id}' is not in {}", dir.join(MANIFEST_FILE).display())));
        }
    }
    manifest
        .iter()
        .map(|e| read_record(&record_path(dir, &e.subject_id), &e.subject_id, &e.ecg_lead))
        .collect()
}

pub fn history_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_file_name("history.csv")
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,lr,train_loss,valid_loss\n");
    for r in history {
        out.push_str(&format!("{},{},{},{}\n", r.epoch, r.lr, r.train_loss, r.valid_loss));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub final_valid_loss: f64,
}

/// Trains on the pooled train segments and keeps the parameters of the
/// epoch with the lowest validation loss.
pub fn train_command(args: &TrainArgs, log: &mut dyn Write) -> Result<TrainSummary> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.train.rng_seed = seed;
    }
    let records = load_records(&args.data, args.subject.as_deref())?;
    if records.is_empty() {
        return Err(Error::core(
            args.data.display().to_string(),
            bpnet_core::Error::EmptyTrainingSet,
        ));
    }
    let mut model = match &args.resume {
        Some(path) => {
            let (model, _) = load_checkpoint(path)?;
            if model.config != config.model {
                return Err(Error::IncompatibleCheckpoint(format!(
                    "{}: model section differs from {}",
                    path.display(),
                    args.config.display()
                )));
            }
            model
        }
        None => build_bpnet(&config.model, config.train.rng_seed).context(|| "model".into())?,
    };

    let (mut train_windows, mut valid_windows) = (Vec::new(), Vec::new());
    for record in &records {
        let [tr, va, _] = subject_segments(record, &config.data)?;
        let windows = |seg: &Segment| -> Result<Vec<WindowedExample>> {
            make_windows(seg, config.data.window_len, config.data.stride, &config.data.scaling)
                .context(|| format!("{}: windows", seg.subject_id))
        };
        train_windows.extend(windows(&tr)?);
        valid_windows.extend(windows(&va)?);
    }
    let _ = writeln!(
        log,
        "{} subjects, {} training and {} validation windows, {} parameters",
        records.len(),
        train_windows.len(),
        valid_windows.len(),
        model.parameter_count()
    );
    let outcome = train(&mut model, &train_windows, &valid_windows, &config.train, |r| {
        let _ = writeln!(
            log,
            "epoch {:>4}  lr {:.3e}  train {:.6}  valid {:.6}",
            r.epoch, r.lr, r.train_loss, r.valid_loss
        );
    })
    .context(|| "training".into())?;

    model.params = outcome.best_params;
    save_checkpoint(&args.out, &model, &config.data)?;
    let history = outcome.history.epochs;
    write_atomic(&history_path(&args.out), history_csv(&history).as_bytes())?;
    let final_valid_loss = history.last().map_or(f64::NAN, |r| r.valid_loss);
    Ok(TrainSummary {
        history,
        best_epoch: outcome.best_epoch,
        final_valid_loss,
    })
}

/// Test-segment predictions for every subject.
pub fn predict_subjects(
    model: &BPNetModel,
    data: &DataConfig,
    records: &[SubjectRecord],
) -> Result<ReportInputs> {
    let rf = model.receptive_field();
    let mut subjects = Vec::with_capacity(records.len());
    let mut tracking_start = 0;
    for (k, record) in records.iter().enumerate() {
        let [_, _, test] = subject_segments(record, data)?;
        if test.len() < rf {
            return Err(Error::IncompatibleCheckpoint(format!(
                "{}: test segment has {} samples, fewer than the model's receptive field of {rf}",
                record.subject_id(),
                test.len()
            )));
        }
        let (sbp_est, dbp_est) = predict(model, &test.ecg, &test.ppg, data.window_len, &data.scaling)
            .context(|| format!("{}: prediction", record.subject_id()))?;
        if k == 0 {
            tracking_start = test.start;
        }
        subjects.push(SubjectPrediction {
            subject_id: test.subject_id,
            sbp_ref: test.sbp,
            sbp_est,
            dbp_ref: test.dbp,
            dbp_est,
        });
    }
    Ok(ReportInputs {
        subjects,
        tracking_start,
    })
}

pub fn eval(args: &EvalArgs, log: &mut dyn Write) -> Result<EvalReport> {
    let (model, data) = load_checkpoint(&args.ckpt)?;
    let records = load_records(&args.data, None)?;
    if records.is_empty() {
        return Err(Error::core(args.data.display().to_string(), bpnet_core::Error::EmptyInput));
    }
    let inputs = predict_subjects(&model, &data, &records)?;
    let report = build_report(&inputs.subjects, HISTOGRAM_BIN_WIDTH_MMHG).context(|| "report".into())?;
    if report.pearson_r.sbp.is_none() || report.pearson_r.dbp.is_none() {
        let _ = writeln!(log, "warning: correlation undefined for a constant series");
    }
    write_report(&args.report, &report, &inputs)?;
    let _ = writeln!(
        log,
        "{} subjects: SBP MAE {:.2} mmHg (BHS {:?}), DBP MAE {:.2} mmHg (BHS {:?})",
        report.n_subjects, report.combined.sbp.mae, report.bhs.sbp.grade, report.combined.dbp.mae, report.bhs.dbp.grade
    );
    Ok(report)
}
