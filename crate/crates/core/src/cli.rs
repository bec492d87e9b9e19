//! Command-line front end. Every input is parsed and validated before any
//! fitting or feature extraction starts.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evaluation::{
    dataset_from_manifest, run_protocol_on_dataset, run_raw_baseline, synth_generate,
    PairedDataset, Protocol,
};
use crate::features::{save_feature_file, save_pgm, FeatureSpec, GrayImage};
use crate::identification::{build_gallery, identify};
use crate::io::reports::{
    self, BASELINE_SUMMARY_FILE, CMC_FILE, CONFIG_ECHO_FILE, FIT_TRACE_FILE, RANKED_FILE,
    SUMMARY_FILE,
};
use crate::io::{
    load_manifest, load_model, load_model_file, save_model, DatasetManifest, ManifestRecord,
    ManifestRules, Modality, ModelFile, RunConfig, MANIFEST_VERSION,
};
use crate::model_core::RealMatrix;
use crate::shared_transform::fit;

pub const MODEL_FILE: &str = "model.stml";
pub const MANIFEST_FILE: &str = "manifest.csv";

#[derive(Parser, Debug)]
#[command(
    name = "stm",
    version,
    about = "Shared transform learning for skull-to-face identification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (defaults to the configured `out_dir`, then `out`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProtocolArg {
    P1,
    P2,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one model on every mated pair and write it to `<out>/model.stml`.
    Train {
        #[command(flatten)]
        common: Common,
        /// Mated-pair manifest; synthetic data when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Cross-validated identification with the raw-feature baseline alongside.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Mated-pair manifest; synthetic data when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
    },
    /// Rank gallery identities for one probe and write `<out>/ranked.csv`.
    Identify {
        #[arg(long)]
        model: PathBuf,
        /// Gallery manifest (face and distractor_face records).
        #[arg(long)]
        manifest: PathBuf,
        /// Probe image, or feature file for precomputed models.
        #[arg(long)]
        probe: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Write a synthetic precomputed-feature dataset and its manifest.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Write each transform row as a grayscale PGM scaled to 0..=255.
    DumpWeights {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs the CLI on `argv` (program name first) and returns the exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Train { common, manifest } => train(&common, manifest.as_deref()),
        Command::Evaluate {
            common,
            manifest,
            protocol,
        } => evaluate(&common, manifest.as_deref(), protocol),
        Command::Identify {
            model,
            manifest,
            probe,
            out,
        } => identify_cmd(&model, &manifest, &probe, &out),
        Command::Synth { common } => synth(&common),
        Command::DumpWeights { model, out } => dump_weights(&model, &out),
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig, common: &Common) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Configuration text stored with every output; the output location is left
/// out so that identical runs in different directories match byte for byte.
fn provenance(cfg: &RunConfig) -> String {
    RunConfig {
        out_dir: None,
        ..cfg.clone()
    }
    .to_toml()
}

/// Loads the dataset named by `manifest`, or generates the configured
/// synthetic one. Synthetic runs record their generator settings in `cfg`.
fn load_dataset(cfg: &mut RunConfig, manifest: Option<&Path>) -> Result<PairedDataset> {
    match manifest {
        Some(path) => {
            let m = load_manifest(path, ManifestRules::MatedPairs)?;
            if cfg.protocol.protocol == Protocol::P2
                && cfg.protocol.extended_gallery_manifest.is_none()
                && m.distractors().is_empty()
            {
                return Err(Error::Config(
                    "P2 needs distractor_face records or `protocol.extended_gallery_manifest`"
                        .into(),
                ));
            }
            let extended = cfg
                .protocol
                .extended_gallery_manifest
                .as_deref()
                .map(|p| load_manifest(p, ManifestRules::Gallery))
                .transpose()?;
            dataset_from_manifest(&m, extended.as_ref(), &cfg.features, &cfg.augmentation)
        }
        None => {
            let synthetic = cfg.synthetic.clone().unwrap_or_default();
            cfg.features = FeatureSpec::Precomputed;
            let data = synth_generate(&synthetic)?;
            cfg.synthetic = Some(synthetic);
            Ok(PairedDataset::from_synthetic(
                &data,
                FeatureSpec::Precomputed.tag(),
            ))
        }
    }
}

fn train(common: &Common, manifest: Option<&Path>) -> Result<()> {
    let mut cfg = load_config(common)?;
    let data = load_dataset(&mut cfg, manifest)?;
    let hyper = cfg.hyper.resolve(data.feature_dim()?)?;
    let out = out_dir(&cfg, common)?;

    let (xs, xd) = data.training_matrices(&data.subject_ids())?;
    let (model, report) = fit(&xs, &xd, &hyper, cfg.init)?;
    let model = model.with_feature_space_tag(data.feature_space_tag.clone());
    let echo = provenance(&cfg);
    save_model(&model, &echo, &out.join(MODEL_FILE))?;
    reports::write_fit_trace(&report, &out.join(FIT_TRACE_FILE))?;
    reports::write_config_echo(&echo, &out.join(CONFIG_ECHO_FILE))?;
    println!(
        "trained on {} subjects ({} columns per domain), n = {}, {} iterations, final objective {:?}",
        data.subjects.len(),
        xs.cols(),
        model.feature_dim(),
        report.iterations_run,
        report.final_objective
    );
    println!("model written to {}", out.join(MODEL_FILE).display());
    Ok(())
}

fn evaluate(common: &Common, manifest: Option<&Path>, protocol: Option<ProtocolArg>) -> Result<()> {
    let mut cfg = load_config(common)?;
    if let Some(p) = protocol {
        cfg.protocol.protocol = match p {
            ProtocolArg::P1 => Protocol::P1,
            ProtocolArg::P2 => Protocol::P2,
        };
    }
    let data = load_dataset(&mut cfg, manifest)?;
    let hyper = cfg.hyper.resolve(data.feature_dim()?)?;
    if cfg.protocol.n_folds > data.subjects.len() {
        return Err(Error::Config(format!(
            "{} folds requested for {} subjects",
            cfg.protocol.n_folds,
            data.subjects.len()
        )));
    }
    let out = out_dir(&cfg, common)?;

    let pc = cfg.protocol_config();
    let report = run_protocol_on_dataset(&data, &pc, &hyper, cfg.init)?;
    let baseline = run_raw_baseline(&data, &pc)?;
    reports::write_summary(&report, &out.join(SUMMARY_FILE))?;
    reports::write_summary(&baseline, &out.join(BASELINE_SUMMARY_FILE))?;
    reports::write_cmc(&report, &out.join(CMC_FILE))?;
    reports::write_fold_traces(&report, &out.join(FIT_TRACE_FILE))?;
    reports::write_config_echo(&provenance(&cfg), &out.join(CONFIG_ECHO_FILE))?;
    for r in [&report, &baseline] {
        println!(
            "{} {:<16} rank-1 {:.4} ± {:.4}   rank-5 {:.4} ± {:.4}",
            r.protocol, r.method, r.rank1_mean, r.rank1_std, r.rank5_mean, r.rank5_std
        );
    }
    println!("reports written to {}", out.display());
    Ok(())
}

fn identify_cmd(model_path: &Path, manifest: &Path, probe: &Path, out: &Path) -> Result<()> {
    let ModelFile { model, provenance } = load_model_file(model_path)?;
    let spec = FeatureSpec::from_tag(model.feature_space_tag())?;
    let gallery_manifest = load_manifest(manifest, ManifestRules::Gallery)?;
    let faces = gallery_manifest.gallery_faces();
    if faces.is_empty() {
        return Err(Error::EmptyGallery);
    }
    let probe_vec = spec.load(probe, None)?.remove(0);

    let mut columns = Vec::with_capacity(faces.len());
    let mut labels = Vec::with_capacity(faces.len());
    for (id, path) in &faces {
        columns.push(spec.load(path, None)?.remove(0));
        labels.push(id.clone());
    }
    let gallery = build_gallery(
        &model,
        &RealMatrix::from_columns(&columns)?,
        labels,
        &spec.tag(),
    )?;
    let ranked = identify(&model, &probe_vec, &gallery)?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    reports::write_ranked(&ranked, &out.join(RANKED_FILE))?;
    reports::write_config_echo(&provenance, &out.join(CONFIG_ECHO_FILE))?;
    for (i, e) in ranked.entries.iter().take(5).enumerate() {
        println!("{:>3}  {}  {:?}", i + 1, e.identity, e.distance);
    }
    Ok(())
}

fn synth(common: &Common) -> Result<()> {
    let mut cfg = load_config(common)?;
    let mut synthetic = cfg.synthetic.clone().unwrap_or_default();
    if let Some(seed) = common.seed {
        synthetic.seed = seed;
    }
    let data = synth_generate(&synthetic)?;
    cfg.features = FeatureSpec::Precomputed;
    cfg.synthetic = Some(synthetic);
    let out = out_dir(&cfg, common)?;
    let feature_dir = out.join("features");
    fs::create_dir_all(&feature_dir).map_err(|e| Error::io(&feature_dir, e))?;

    let mut records = Vec::new();
    let mut emit = |id: &str, modality: Modality, values: Vec<f64>| -> Result<()> {
        let rel = format!("features/{id}_{}.txt", modality.as_str());
        save_feature_file(&values, &out.join(&rel))?;
        records.push(ManifestRecord {
            subject_id: id.to_string(),
            modality,
            resolved_path: out.join(&rel),
            image_path: rel,
        });
        Ok(())
    };
    for (i, id) in data.labels.iter().enumerate() {
        emit(id, Modality::Skull, data.xs.column_vec(i))?;
        emit(id, Modality::Face, data.xd.column_vec(i))?;
    }
    if let Some(d) = &data.distractors {
        for (i, id) in data.distractor_labels.iter().enumerate() {
            emit(id, Modality::DistractorFace, d.column_vec(i))?;
        }
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        records,
    };
    let manifest_path = out.join(MANIFEST_FILE);
    fs::write(&manifest_path, manifest.to_csv()).map_err(|e| Error::io(&manifest_path, e))?;
    reports::write_config_echo(&provenance(&cfg), &out.join(CONFIG_ECHO_FILE))?;
    println!(
        "wrote {} subjects and {} distractors to {}",
        data.labels.len(),
        data.distractor_labels.len(),
        manifest_path.display()
    );
    Ok(())
}

fn dump_weights(model_path: &Path, out: &Path) -> Result<()> {
    let model = load_model(model_path)?;
    let t = model.transform();
    let n = model.feature_dim();
    let side = (1..=n).find(|s| s * s >= n).unwrap_or(1);
    let (width, height) = if side * side == n {
        (side, side)
    } else {
        (n, 1)
    };
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for r in 0..n {
        let row: Vec<f64> = (0..n).map(|c| t[(r, c)]).collect();
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        let pixels = row
            .iter()
            .map(|v| {
                if span > 0.0 {
                    ((v - lo) / span * 255.0).round() as u8
                } else {
                    128
                }
            })
            .collect();
        save_pgm(
            &GrayImage::new(width, height, pixels)?,
            &out.join(format!("row_{r:04}.pgm")),
        )?;
    }
    println!("wrote {n} rows to {}", out.display());
    Ok(())
}
