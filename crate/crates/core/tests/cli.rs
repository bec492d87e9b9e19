use std::fs;
use std::path::Path;

use stm::cli::{cli_main, MANIFEST_FILE, MODEL_FILE};
use stm::io::RunConfig;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("stm").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn quick_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("seed = 3\n[hyper]\nmax_iters = 8\n{body}")).unwrap();
    path
}

#[test]
fn evaluate_on_synthetic_defaults_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eval");
    let config = quick_config(dir.path(), "");
    assert_eq!(
        run(&["evaluate", "--config", s(&config), "--out", s(&out)]),
        0
    );

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(summary.as_bytes());
    assert_eq!(
        rdr.headers().unwrap(),
        vec!["protocol", "fold", "rank1", "rank5"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(&rows[5][1], "mean");
    assert_eq!(&rows[6][1], "std");
    let mean: f64 = rows[5][2].parse().unwrap();
    let folds: f64 = rows[..5].iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    assert!((mean - folds / 5.0).abs() < 1e-15);

    assert!(out.join("baseline_summary.csv").exists());
    let cmc = fs::read_to_string(out.join("cmc.csv")).unwrap();
    assert!(cmc.starts_with("fold,rank,accuracy\n"));
    let echo =
        RunConfig::from_toml(&fs::read_to_string(out.join("config_echo.toml")).unwrap()).unwrap();
    assert_eq!(echo.seed, 3);
    assert_eq!(echo.synthetic.unwrap().n_subjects, 40);
}

#[test]
fn synth_train_identify_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let config = quick_config(
        dir.path(),
        "[features]\nkind = \"precomputed\"\n[synthetic]\nn_subjects = 12\nn_distractors = 3\n",
    );
    assert_eq!(
        run(&["synth", "--config", s(&config), "--out", s(&data)]),
        0
    );
    let manifest = data.join(MANIFEST_FILE);
    let manifest_before = fs::read(&manifest).unwrap();
    assert!(String::from_utf8(manifest_before.clone())
        .unwrap()
        .starts_with("# version=1\n"));
    assert!(data.join("features/s0003_skull.txt").exists());
    assert!(data.join("features/d0002_distractor_face.txt").exists());

    let trained = dir.path().join("trained");
    assert_eq!(
        run(&[
            "train",
            "--config",
            s(&config),
            "--manifest",
            s(&manifest),
            "--out",
            s(&trained)
        ]),
        0
    );
    assert_eq!(fs::read(&manifest).unwrap(), manifest_before);
    let trace = fs::read_to_string(trained.join("fit_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,objective\n0,"));

    let ranked_dir = dir.path().join("ranked");
    let probe = data.join("features/s0005_face.txt");
    assert_eq!(
        run(&[
            "identify",
            "--model",
            s(&trained.join(MODEL_FILE)),
            "--manifest",
            s(&manifest),
            "--probe",
            s(&probe),
            "--out",
            s(&ranked_dir),
        ]),
        0
    );
    let ranked = fs::read_to_string(ranked_dir.join("ranked.csv")).unwrap();
    let lines: Vec<&str> = ranked.lines().collect();
    assert_eq!(lines[0], "rank,identity,distance");
    assert_eq!(lines[1], "1,s0005,0.0");
    assert_eq!(lines.len(), 1 + 12 + 3);
    assert!(ranked_dir.join("config_echo.toml").exists());

    let weights = dir.path().join("weights");
    assert_eq!(
        run(&[
            "dump-weights",
            "--model",
            s(&trained.join(MODEL_FILE)),
            "--out",
            s(&weights)
        ]),
        0
    );
    let rows = fs::read_dir(&weights).unwrap().count();
    assert_eq!(rows, 32);
    let img = stm::features::load_gray(&weights.join("row_0000.pgm")).unwrap();
    assert_eq!(img.pixels().len(), 32);
    assert!(img.pixels().contains(&0) && img.pixels().contains(&255));
}

#[test]
fn model_file_embeds_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let config = quick_config(dir.path(), "[synthetic]\nn_subjects = 10\n");
    assert_eq!(
        run(&[
            "train",
            "--config",
            s(&config),
            "--seed",
            "21",
            "--out",
            s(dir.path())
        ]),
        0
    );
    let file = stm::io::load_model_file(&dir.path().join(MODEL_FILE)).unwrap();
    let cfg = RunConfig::from_toml(&file.provenance).unwrap();
    assert_eq!(cfg.seed, 21);
    assert_eq!(cfg.hyper.max_iters, 8);
    assert_eq!(file.model.feature_space_tag(), "precomputed");
}

#[test]
fn failures_report_category_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");

    assert_eq!(run(&["train", "--bogus"]), 2);
    assert_eq!(run(&["identify", "--model", "m"]), 2);

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        run(&["evaluate", "--config", s(&missing), "--out", s(&out)]),
        4
    );

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[hyper]\nlambda1 = -1.0\n").unwrap();
    assert_eq!(run(&["evaluate", "--config", s(&bad), "--out", s(&out)]), 3);

    let too_many_folds = quick_config(
        dir.path(),
        "[protocol]\nn_folds = 9\n[synthetic]\nn_subjects = 6\n",
    );
    assert_eq!(
        run(&["evaluate", "--config", s(&too_many_folds), "--out", s(&out)]),
        3
    );
    assert!(!out.exists(), "nothing is written when validation fails");

    let manifest = dir.path().join("m.csv");
    fs::write(
        &manifest,
        "subject_id,modality,image_path\na,skull,a.pgm\na,skull,b.pgm\na,face,c.pgm\n",
    )
    .unwrap();
    assert_eq!(
        run(&["train", "--manifest", s(&manifest), "--out", s(&out)]),
        5
    );

    let p2 = dir.path().join("p2.csv");
    fs::write(
        &p2,
        "subject_id,modality,image_path\na,skull,a.pgm\na,face,c.pgm\n",
    )
    .unwrap();
    assert_eq!(
        run(&[
            "evaluate",
            "--manifest",
            s(&p2),
            "--protocol",
            "p2",
            "--out",
            s(&out)
        ]),
        3
    );
    assert!(!out.exists());

    let trained = dir.path().join("trained");
    let cfg = quick_config(dir.path(), "[synthetic]\nn_subjects = 8\n");
    assert_eq!(
        run(&["train", "--config", s(&cfg), "--out", s(&trained)]),
        0
    );
    let model = trained.join(MODEL_FILE);
    let mut bytes = fs::read(&model).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x10;
    fs::write(&model, &bytes).unwrap();
    assert_eq!(
        run(&["dump-weights", "--model", s(&model), "--out", s(&out)]),
        6
    );
}
