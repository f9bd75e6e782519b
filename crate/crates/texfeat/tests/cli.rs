//! End-to-end tests of the `texfeat` binary: every subcommand, the
//! documented exit codes, and artifact reproducibility.

use std::path::{Path, PathBuf};
use std::process::Output;

use texfeat::fixture::generate_class_image;
use texfeat::imageio::{write_pgm, GrayImage};

fn texfeat(args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_texfeat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed with {:?}: {}",
        out.status.code(),
        stderr_of(out)
    );
}

/// Two 640x640 fixture classes written as a dataset directory.
fn write_two_class_corpus(root: &Path) -> (String, String) {
    for class in ["checker_16", "grating_h08"] {
        let dir = root.join(class);
        std::fs::create_dir_all(&dir).unwrap();
        let image = generate_class_image(class, 7).unwrap();
        write_pgm(&image, &dir.join(format!("{class}.pgm"))).unwrap();
    }
    ("checker_16".into(), "grating_h08".into())
}

/// Tiny deterministic two-class corpus of 64x64 images (16 patches per class
/// at patch size 16).
fn write_small_corpus(root: &Path) -> (PathBuf, PathBuf) {
    let mk = |f: &dyn Fn(u32, u32) -> u8| -> GrayImage {
        let pixels = (0..64u32)
            .flat_map(|y| (0..64u32).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        GrayImage::new(64, 64, pixels).unwrap()
    };
    let dark = mk(&|x, y| 40 + (((x + y) % 3) * 15) as u8);
    let lite = mk(&|x, y| 170 + (((x + 2 * y) % 3) * 15) as u8);
    let dark_dir = root.join("dark");
    let lite_dir = root.join("lite");
    std::fs::create_dir_all(&dark_dir).unwrap();
    std::fs::create_dir_all(&lite_dir).unwrap();
    let dark_path = dark_dir.join("d.pgm");
    let lite_path = lite_dir.join("l.pgm");
    write_pgm(&dark, &dark_path).unwrap();
    write_pgm(&lite, &lite_path).unwrap();
    (dark_path, lite_path)
}

fn count_data_rows(csv: &str) -> usize {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1) // column header
        .filter(|l| !l.is_empty())
        .count()
}

#[test]
fn extract_directory_fifty_rows_810_columns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_two_class_corpus(&corpus);
    let out_csv = dir.path().join("features.csv");

    let out = texfeat(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    assert_success(&out);
    // resolved configuration is traced before work begins
    let stderr = stderr_of(&out);
    assert!(stderr.contains("texfeat extract:"), "{stderr}");
    assert!(stderr.contains("patch_size=128"), "{stderr}");
    assert!(stderr.contains("ltp_t=5"), "{stderr}");

    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert_eq!(count_data_rows(&text), 50);
    let header = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("column header");
    assert_eq!(header.split(',').count(), 810);
    assert!(text.starts_with("# texfeat-format=1\n"));
}

#[test]
fn extract_single_file_yields_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("tiny.pgm");
    std::fs::write(&img_path, b"P5\n3 3\n255\n\x08\x16\x0c\x5d\x32\x37\x08\x59\x05").unwrap();
    let out_csv = dir.path().join("one.csv");

    let out = texfeat(&[
        "extract",
        "--input",
        img_path.to_str().unwrap(),
        "--out",
        out_csv.to_str().unwrap(),
        "--label",
        "probe",
    ]);
    assert_success(&out);
    let text = std::fs::read_to_string(&out_csv).unwrap();
    assert_eq!(count_data_rows(&text), 1);
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("probe,"), "{row}");
}

#[test]
fn extract_single_file_requires_label() {
    let dir = tempfile::tempdir().unwrap();
    let img_path = dir.path().join("tiny.pgm");
    std::fs::write(&img_path, b"P5\n3 3\n255\n\x01\x01\x01\x01\x01\x01\x01\x01\x01").unwrap();
    let out = texfeat(&[
        "extract",
        "--input",
        img_path.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--label"));
}

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.pgm");
    let out = texfeat(&[
        "extract",
        "--input",
        missing.to_str().unwrap(),
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("nowhere.pgm"));
}

#[test]
fn unknown_flag_exits_2() {
    let out = texfeat(&["extract", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pipeline_extract_split_train_evaluate_predict() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    let (_dark_img, lite_img) = write_small_corpus(&corpus);
    let features = dir.path().join("features.csv");
    let train_csv = dir.path().join("train.csv");
    let test_csv = dir.path().join("test.csv");
    let model = dir.path().join("model.json");
    let report = dir.path().join("report.json");

    assert_success(&texfeat(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
        "--patch-size",
        "16",
    ]));
    let text = std::fs::read_to_string(&features).unwrap();
    assert_eq!(count_data_rows(&text), 32); // 2 classes x 16 patches

    assert_success(&texfeat(&[
        "split",
        "--features",
        features.to_str().unwrap(),
        "--seed",
        "42",
        "--out-train",
        train_csv.to_str().unwrap(),
        "--out-test",
        test_csv.to_str().unwrap(),
    ]));
    for path in [&train_csv, &test_csv] {
        let text = std::fs::read_to_string(path).unwrap();
        assert!(text.contains("# split_seed=42\n"), "{}", path.display());
        assert_eq!(count_data_rows(&text), 16);
    }

    assert_success(&texfeat(&[
        "train",
        "--features",
        train_csv.to_str().unwrap(),
        "--model",
        "knn",
        "--k",
        "3",
        "--out",
        model.to_str().unwrap(),
    ]));

    assert_success(&texfeat(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--features",
        test_csv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]));
    let report_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report_json["accuracy"], serde_json::json!(1.0));
    assert_eq!(report_json["seed"], serde_json::json!(42));
    assert!(report_json["per_class"]["dark"]["support"].is_u64());

    // prediction goes to stdout, everything else to stderr
    let out = texfeat(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--image",
        lite_img.to_str().unwrap(),
    ]);
    assert_success(&out);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "lite");

    // naive Bayes path
    let nb_model = dir.path().join("nb.json");
    assert_success(&texfeat(&[
        "train",
        "--features",
        train_csv.to_str().unwrap(),
        "--model",
        "nb",
        "--out",
        nb_model.to_str().unwrap(),
    ]));
    let nb_report = dir.path().join("nb_report.json");
    assert_success(&texfeat(&[
        "evaluate",
        "--model",
        nb_model.to_str().unwrap(),
        "--features",
        test_csv.to_str().unwrap(),
        "--report",
        nb_report.to_str().unwrap(),
    ]));
}

#[test]
fn train_rejects_even_k() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_small_corpus(&corpus);
    let features = dir.path().join("features.csv");
    assert_success(&texfeat(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
        "--patch-size",
        "16",
    ]));
    let out = texfeat(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--model",
        "knn",
        "--k",
        "4",
        "--out",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("odd"));
}

#[test]
fn evaluate_rejects_mismatched_extraction_config() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_small_corpus(&corpus);
    let features = dir.path().join("f_default.csv");
    let features_t9 = dir.path().join("f_t9.csv");
    assert_success(&texfeat(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
        "--patch-size",
        "16",
    ]));
    assert_success(&texfeat(&[
        "extract",
        "--input",
        corpus.to_str().unwrap(),
        "--out",
        features_t9.to_str().unwrap(),
        "--patch-size",
        "16",
        "--ltp-t",
        "9",
    ]));
    let model = dir.path().join("m.json");
    assert_success(&texfeat(&[
        "train",
        "--features",
        features.to_str().unwrap(),
        "--model",
        "knn",
        "--out",
        model.to_str().unwrap(),
    ]));
    let out = texfeat(&[
        "evaluate",
        "--model",
        model.to_str().unwrap(),
        "--features",
        features_t9.to_str().unwrap(),
        "--report",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("config mismatch"));
}

#[test]
fn ablate_emits_four_blocks_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_two_class_corpus(&corpus);
    let report1 = dir.path().join("ablate1.json");
    let report2 = dir.path().join("ablate2.json");

    for report in [&report1, &report2] {
        assert_success(&texfeat(&[
            "ablate",
            "--input",
            corpus.to_str().unwrap(),
            "--seed",
            "42",
            "--report",
            report.to_str().unwrap(),
        ]));
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report1).unwrap()).unwrap();
    let accuracies = json["accuracies"].as_object().unwrap();
    assert_eq!(accuracies.len(), 4);
    for block in ["lbp", "ltp", "glcm", "all"] {
        assert!(accuracies.contains_key(block), "missing {block}");
        assert!(accuracies[block].as_f64().unwrap() >= 0.0);
    }
    assert_eq!(
        std::fs::read(&report1).unwrap(),
        std::fs::read(&report2).unwrap(),
        "same seed must reproduce the identical report"
    );
}

#[test]
fn ablate_rejects_unknown_block() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    write_small_corpus(&corpus);
    let out = texfeat(&[
        "ablate",
        "--input",
        corpus.to_str().unwrap(),
        "--blocks",
        "lbp,sift",
        "--report",
        dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("sift"));
}

#[test]
fn fixture_command_writes_the_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("fixture");
    let out = texfeat(&["fixture", "--out", corpus.to_str().unwrap()]);
    assert_success(&out);
    let classes: Vec<String> = std::fs::read_dir(&corpus)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(classes.len(), 10);
    for class in texfeat::fixture::FIXTURE_CLASSES {
        let path = corpus.join(class).join(format!("{class}.pgm"));
        assert!(path.is_file(), "missing {}", path.display());
    }
}
