//! End-to-end tests driving the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deeplbp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_dataset(root: &Path, per_class: usize, seed: u64) {
    let ds = deeplbp::synth::texture_of_textures(per_class, seed);
    for (i, (img, label)) in ds.samples().iter().enumerate() {
        let dir = root.join(&ds.class_names()[*label]);
        fs::create_dir_all(&dir).unwrap();
        let buf = image::GrayImage::from_fn(img.width() as u32, img.height() as u32, |x, y| {
            image::Luma([img.get(x as usize, y as usize).round() as u8])
        });
        buf.save(dir.join(format!("img{i:03}.png"))).unwrap();
    }
}

#[test]
fn dagcount_prints_the_full_table() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("table.csv");
    let out = run(&["dagcount", "--out", csv_path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    for cell in [
        "2·10^1", "2·10^4", "5·10^2", "1·10^15", "7·10^11", "3·10^6", "2·10^41", "8·10^46",
        "6·10^94", "2·10^179", "1·10^36", "2·10^190", "1·10^685", "2·10^72", "3·10^346",
        "3·10^2640", "1·10^225", "1·10^585", "3·10^10288",
    ] {
        assert!(text.contains(cell), "missing {cell}");
    }
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("n,rotation_invariant,uniform,traditional\n"));
    assert_eq!(csv.lines().count(), 8);

    let bad = run(&["dagcount", "--min", "1"]);
    assert!(!bad.status.success());
}

#[test]
fn train_ordering_similarity_merges_rotation_classes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ri.json");
    let out = run(&[
        "train-ordering",
        "--mode",
        "similarity",
        "--metric",
        "ri-hamming",
        "--n",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let ord: deeplbp::ordering::Ordering =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(ord.num_codes(), 256);
    for c in 0..256u32 {
        for s in 0..8 {
            assert_eq!(ord.rank(c), ord.rank(deeplbp::encoding::ror(c, s, 8)));
        }
    }
}

#[test]
fn train_ordering_highdim_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lex.json");
    let out = run(&[
        "train-ordering",
        "--mode",
        "highdim",
        "--arrangement",
        "transitions,largest-run,imbalance",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let ord: deeplbp::ordering::Ordering =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let expected = deeplbp_cli::config::default_ordering(8).unwrap();
    assert_eq!(ord.ranks(), expected.ranks());

    let bad = run(&[
        "train-ordering",
        "--mode",
        "highdim",
        "--arrangement",
        "no-such-feature",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(!bad.status.success());
}

#[test]
fn extract_writes_deterministic_csv_with_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_dataset(&data, 3, 5);
    // depth-1 raw global histogram: 256 feature columns
    let config = dir.path().join("shallow.json");
    fs::write(
        &config,
        r#"{"model": {"spec": {"n": 8, "r": 3.0, "metric": "euclidean-circle",
            "sampling": "bilinear"}, "layers": 1}}"#,
    )
    .unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for out_path in [&out_a, &out_b] {
        let out = run(&[
            "extract",
            "--config",
            config.to_str().unwrap(),
            "--dataset",
            data.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = fs::read(&out_a).unwrap();
    assert_eq!(a, fs::read(&out_b).unwrap());
    let text = String::from_utf8(a).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 256);
    assert_eq!(header[0], "label");
    assert_eq!(text.lines().count(), 1 + 6);

    // feature fusion at depth 3 over 3 scales: 3 * 3 * 256 columns
    let config_ms = dir.path().join("ms.json");
    fs::write(
        &config_ms,
        r#"{"model": {"spec": {"n": 8, "r": 1.0, "metric": "euclidean-circle",
            "sampling": "bilinear"}, "layers": 3, "scales": 3}}"#,
    )
    .unwrap();
    let out_ms = dir.path().join("ms.csv");
    let out = run(&[
        "extract",
        "--config",
        config_ms.to_str().unwrap(),
        "--dataset",
        data.to_str().unwrap(),
        "--out",
        out_ms.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_ms).unwrap();
    assert_eq!(
        text.lines().next().unwrap().split(',').count(),
        1 + 3 * 3 * 256
    );
}

#[test]
fn eval_writes_byte_identical_reports_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_dataset(&data, 5, 11);
    let config = dir.path().join("cfg.json");
    fs::write(
        &config,
        r#"{"model": {"spec": {"n": 8, "r": 1.0, "metric": "euclidean-circle",
            "sampling": "bilinear"}, "layers": 2},
            "eval": {"folds": 2, "trees": 10}, "seed": 9}"#,
    )
    .unwrap();
    let run_eval = |out_dir: &Path, strategy: &str| {
        let out = run(&[
            "eval",
            "--config",
            config.to_str().unwrap(),
            "--dataset",
            data.to_str().unwrap(),
            "--strategy",
            strategy,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    let out1 = dir.path().join("r1");
    let out2 = dir.path().join("r2");
    run_eval(&out1, "deep");
    run_eval(&out2, "deep");
    assert_eq!(
        fs::read(out1.join("report.csv")).unwrap(),
        fs::read(out2.join("report.csv")).unwrap()
    );
    assert_eq!(
        fs::read(out1.join("report.json")).unwrap(),
        fs::read(out2.join("report.json")).unwrap()
    );
    let csv = fs::read_to_string(out1.join("report.csv")).unwrap();
    assert!(csv.starts_with("fold,accuracy,class_rank\n"));
    assert_eq!(csv.lines().count(), 1 + 2);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out1.join("report.json")).unwrap()).unwrap();
    assert!(json["config"]["run"]["model"]["layers"].is_number());

    // the remaining strategies run end to end
    for (strategy, extra) in [
        ("deep-pca", Some(("--retain", "0.95"))),
        ("shallow", None),
        ("multiscale-shallow", None),
        ("multiscale-deep", None),
    ] {
        let out_dir = dir.path().join(format!("r-{strategy}"));
        let mut args = vec![
            "eval",
            "--config",
            config.to_str().unwrap(),
            "--dataset",
            data.to_str().unwrap(),
            "--strategy",
            strategy,
            "--out",
            out_dir.to_str().unwrap(),
        ];
        if let Some((k, v)) = extra {
            args.push(k);
            args.push(v);
        }
        let out = run(&args);
        assert!(
            out.status.success(),
            "{strategy}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out_dir.join("report.json").exists());
    }
}

#[test]
fn train_ordering_greedy_respects_max_depth() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    write_dataset(&data, 4, 17);
    let config = dir.path().join("cfg.json");
    fs::write(
        &config,
        r#"{"model": {"spec": {"n": 8, "r": 1.0, "metric": "euclidean-circle",
            "sampling": "bilinear"}}}"#,
    )
    .unwrap();
    let path = dir.path().join("greedy.json");
    let out = run(&[
        "train-ordering",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "highdim",
        "--greedy",
        "--max-depth",
        "2",
        "--dataset",
        data.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ord: deeplbp::ordering::Ordering =
        serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(ord.num_codes(), 256);
    // provenance records the (at most 2) chosen features
    let picks = ord
        .provenance()
        .trim_start_matches("lex:[")
        .trim_end_matches(']');
    let len = if picks.is_empty() {
        0
    } else {
        picks.split(',').count()
    };
    assert!(len <= 2, "provenance {:?}", ord.provenance());

    // greedy without a dataset is an error
    let bad = run(&[
        "train-ordering",
        "--mode",
        "highdim",
        "--greedy",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(!bad.status.success());
}

#[test]
fn eval_missing_dataset_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "eval",
        "--dataset",
        dir.path().join("nowhere").to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn config_with_unknown_keys_is_rejected_before_computation() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    fs::write(&config, r#"{"modle": {}}"#).unwrap();
    let out = run(&[
        "eval",
        "--config",
        config.to_str().unwrap(),
        "--dataset",
        dir.path().to_str().unwrap(),
        "--out",
        dir.path().join("r").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("schema"), "stderr: {err}");
}

#[test]
fn visualize_renders_shrinking_layers_and_black_constants() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.png");
    image::GrayImage::from_pixel(40, 40, image::Luma([77]))
        .save(&input)
        .unwrap();
    let out_dir = dir.path().join("layers");
    let out = run(&[
        "visualize",
        "--image",
        input.to_str().unwrap(),
        "--layers",
        "3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // default radius 3: 40 -> 34 -> 28 -> 22
    for (layer, side) in [(1u32, 34u32), (2, 28), (3, 22)] {
        let img = image::open(out_dir.join(format!("layer{layer}.png")))
            .unwrap()
            .to_luma8();
        assert_eq!(img.dimensions(), (side, side));
        assert!(img.pixels().all(|p| p.0[0] == 0), "layer {layer} not black");
    }
}
