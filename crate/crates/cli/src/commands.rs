//! Subcommand implementations.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};

use deeplbp::architectures::run_deep;
use deeplbp::combinatorics::{format_table_csv, format_table_text, table1};
use deeplbp::encoding::CodeImage;
use deeplbp::eval::{
    evaluate, load_dataset, load_image_raw, CvAccuracyOracle, ModelExtractor, OracleSpec,
};
use deeplbp::features::write_features_csv;
use deeplbp::ordering::{
    greedy_lex_search, hamming, ordering_from_dissimilarity, ordering_from_lex, ri_hamming,
    code_features, DissimilarityMatrix, Ordering, FEATURE_NAMES,
};

use crate::config::{eval_config, RunConfig};
use crate::{DissimilarityMetric, EvalArgs, ExtractArgs, OrderingMode, TrainOrderingArgs, VisualizeArgs};

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `train-ordering`: learn and serialize an ordering over the code space.
pub fn cmd_train_ordering(cfg: &RunConfig, args: &TrainOrderingArgs) -> anyhow::Result<()> {
    let n = args.n.unwrap_or(cfg.model.spec.n);
    let ordering: Ordering = match args.mode {
        OrderingMode::Similarity => {
            // the dissimilarity matrix has 4^n entries
            if n > 10 {
                bail!("similarity mode supports n <= 10, got {n}");
            }
            let d = match args.metric {
                DissimilarityMetric::Hamming => {
                    DissimilarityMatrix::from_fn(1 << n, |a, b| hamming(a, b) as f64)?
                }
                DissimilarityMetric::RiHamming => {
                    DissimilarityMatrix::from_fn(1 << n, |a, b| ri_hamming(a, b, n) as f64)?
                }
            };
            let mut ord = ordering_from_dissimilarity(&d)?;
            let provenance = format!("similarity:{:?}:n={n}", args.metric).to_lowercase();
            ord = Ordering::from_ranks(n, ord.ranks().to_vec(), provenance)?;
            ord
        }
        OrderingMode::Highdim => {
            let table = code_features(n)?;
            let arrangement: Vec<usize> = if args.greedy {
                let dataset = args
                    .dataset
                    .as_ref()
                    .or(cfg.dataset.as_ref())
                    .ok_or_else(|| anyhow::anyhow!("greedy search needs --dataset"))?;
                let ds = load_dataset(dataset)?;
                let oracle_spec = OracleSpec {
                    seed: cfg.seed,
                    ..OracleSpec::default()
                };
                let oracle =
                    CvAccuracyOracle::new(&ds, cfg.model.spec, cfg.model.code_map, oracle_spec)?;
                let depth = args.max_depth.unwrap_or(table.num_features());
                greedy_lex_search(&table, &oracle, depth)?
            } else {
                let spec = args
                    .arrangement
                    .as_deref()
                    .ok_or_else(|| anyhow::anyhow!("highdim mode needs --arrangement or --greedy"))?;
                spec.split(',')
                    .map(|name| {
                        table.feature_index(name.trim()).ok_or_else(|| {
                            anyhow::anyhow!(
                                "unknown feature {:?}; available: {}",
                                name.trim(),
                                FEATURE_NAMES.join(", ")
                            )
                        })
                    })
                    .collect::<anyhow::Result<_>>()?
            };
            ordering_from_lex(&table, &arrangement)?
        }
    };
    let json = serde_json::to_string_pretty(&ordering)?;
    write_text(&args.out, &json)?;
    println!(
        "wrote ordering ({} codes, {} classes) to {}",
        ordering.num_codes(),
        ordering.num_classes(),
        args.out.display()
    );
    Ok(())
}

/// `extract`: one CSV row of features per dataset image.
pub fn cmd_extract(cfg: &RunConfig, args: &ExtractArgs) -> anyhow::Result<()> {
    let dataset_path = args
        .dataset
        .as_ref()
        .or(cfg.dataset.as_ref())
        .ok_or_else(|| anyhow::anyhow!("no dataset given (flag --dataset or config)"))?;
    let ds = load_dataset(dataset_path)?;
    let model = cfg.model.build(None)?;

    let mut columns: Option<Vec<String>> = None;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::with_capacity(ds.len());
    for (img, label) in ds.samples() {
        let fv = deeplbp::architectures::run_multiscale(img, &model)?;
        if columns.is_none() {
            columns = Some(fv.column_names());
        }
        rows.push((ds.class_names()[*label].clone(), fv.into_values()));
    }
    let mut buf = Vec::new();
    write_features_csv(&mut buf, &columns.unwrap_or_default(), &rows)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(&args.out, &buf).with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} feature rows to {}", rows.len(), args.out.display());
    Ok(())
}

/// `eval`: cross-validated evaluation, CSV + JSON reports.
pub fn cmd_eval(cfg: &RunConfig, args: &EvalArgs) -> anyhow::Result<()> {
    let dataset_path = args
        .dataset
        .as_ref()
        .or(cfg.dataset.as_ref())
        .ok_or_else(|| anyhow::anyhow!("no dataset given (flag --dataset or config)"))?;
    let ds = load_dataset(dataset_path)?;
    let model = cfg.model.build(Some(args.strategy))?;
    let extractor = ModelExtractor::new(model);
    let ecfg = eval_config(cfg, args.strategy, args.retain);

    let mut report = evaluate(&ds, &extractor, &ecfg)?;
    report.config = serde_json::json!({
        "run": cfg,
        "strategy": args.strategy,
        "dataset": dataset_path,
        "eval": ecfg,
        "class_rank_ties": "tied probabilities contribute half a position",
    });

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let csv_path = args.out.join("report.csv");
    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    fs::write(&csv_path, &csv)?;
    let json_path = args.out.join("report.json");
    fs::write(&json_path, report.to_json_string()?)?;

    println!(
        "accuracy {:.4} ± {:.4}, class rank {:.2} ± {:.2} ({} folds)",
        report.accuracy_mean,
        report.accuracy_std,
        report.class_rank_mean,
        report.class_rank_std,
        report.per_fold.len()
    );
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

/// Renders a code image to 8-bit gray: rank order (or raw code value on
/// layer 1) normalized to the full range; a constant layer renders black.
fn render_layer(codes: &CodeImage, ordering: Option<&Ordering>) -> image::GrayImage {
    let values: Vec<f64> = codes
        .data()
        .iter()
        .map(|&c| match ordering {
            Some(ord) => ord.rank(c) as f64,
            None => c as f64,
        })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    image::GrayImage::from_fn(codes.width() as u32, codes.height() as u32, |x, y| {
        let v = values[y as usize * codes.width() + x as usize];
        image::Luma([((v - lo) * scale).round() as u8])
    })
}

/// `visualize`: one grayscale PNG per deep layer.
pub fn cmd_visualize(cfg: &RunConfig, args: &VisualizeArgs) -> anyhow::Result<()> {
    let img = load_image_raw(&args.image)?;
    let mut model_cfg = cfg.model.clone();
    if let Some(layers) = args.layers {
        model_cfg.layers = layers;
    }
    let model = model_cfg.build(None)?;
    let layers = run_deep(&img, &model.base)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut written = Vec::new();
    for codes in &layers {
        let ordering = if codes.layer() == 1 {
            None
        } else {
            // display by the ordering that consumes this layer's codes
            let idx = (codes.layer() - 1).min(model.base.orderings.len()) - 1;
            Some(&model.base.orderings[idx])
        };
        let rendered = render_layer(codes, ordering);
        let path = args.out.join(format!("layer{}.png", codes.layer()));
        rendered
            .save(&path)
            .with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    println!(
        "wrote {} layer images under {}",
        written.len(),
        args.out.display()
    );
    Ok(())
}

/// `dagcount`: the search-space table, aligned text on stdout and optional CSV.
pub fn cmd_dagcount(min: u32, max: u32, out: Option<&PathBuf>) -> anyhow::Result<()> {
    if !(2..=8).contains(&min) || !(2..=8).contains(&max) || min > max {
        bail!("neighbor range must satisfy 2 <= min <= max <= 8, got {min}..={max}");
    }
    let rows = table1(min..=max);
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(format_table_text(&rows).as_bytes())?;
    if let Some(path) = out {
        write_text(path, &format_table_csv(&rows))?;
        writeln!(stdout, "wrote CSV to {}", path.display())?;
    }
    Ok(())
}
