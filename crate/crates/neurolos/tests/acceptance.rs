//! Acceptance suite: one PASS/FAIL line per criterion, run in order so the
//! runtimes are measured without other tests competing for the CPU.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use neurolos::ExperimentConfig;
use neurolos_core::classic::{
    argmax, leaf_weight, BoostConfig, Classifier, ForestConfig, Growth, KnnConfig, Learner, MaxFeatures, Node,
    TreeConfig,
};
use neurolos_core::eval::{compute_metrics, permutation_importance, Metric};
use neurolos_core::features::{smote_oversample, Dataset};
use neurolos_core::rng;
use neurolos_core::seq::{
    check_gradient, make_windows, train_sequence_model, window_count, Encoder, EncoderConfig, Lstm, LstmConfig,
    SeqArch, TrainConfig,
};
use neurolos_core::synthgen::{generate_cohort, planted_tabular, planted_windows, CohortSpec};
use neurolos_core::{BinEdges, Matrix, Sequential};
use rand::Rng;
use serde_json::Value;

const CRITERION_6_BUDGET: Duration = Duration::from_secs(600);

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn demo_config() -> PathBuf {
    workspace().join("configs/demo.json")
}

fn uniform_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
    let mut r = rng::stream(seed, 7, 0);
    Matrix::from_vec(
        rows,
        cols,
        (0..rows * cols).map(|_| r.random_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

// 1

fn metric_identities() -> Result<String> {
    let mut r = rng::stream(1, 7, 1);
    for _ in 0..1000 {
        let n = r.random_range(1..200);
        let t: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let p: Vec<usize> = (0..n).map(|_| r.random_range(0..3)).collect();
        let m = compute_metrics(&t, &p, 3)?;
        let hits = t.iter().zip(&p).filter(|(a, b)| a == b).count();
        let acc = hits as f64 / n as f64;
        ensure!(m.accuracy == acc, "accuracy {} vs tally {acc}", m.accuracy);
        ensure!(
            m.micro.precision == m.accuracy && m.micro.recall == m.accuracy,
            "micro differs from accuracy"
        );
    }
    let m = compute_metrics(&[0, 0, 1, 1, 2, 2], &[0, 1, 1, 2, 2, 0], 3)?;
    ensure!(m.accuracy == 0.5, "hand example accuracy {}", m.accuracy);
    for c in &m.per_class {
        ensure!(c.precision == 0.5 && c.recall == 0.5, "hand example per class {c:?}");
    }
    ensure!(m.macro_avg.f1 == 0.5, "hand example macro F1 {}", m.macro_avg.f1);
    Ok("1000 random pairs plus the hand-tallied example".into())
}

// 2

fn gradient_checks() -> Result<String> {
    let x = uniform_matrix(2, 3, 3);
    let lstm = Lstm::new(
        LstmConfig {
            hidden: 4,
            forget_bias: 1.0,
        },
        3,
        3,
        11,
    )?;
    let enc = Encoder::new(
        EncoderConfig {
            d_model: 8,
            n_heads: 2,
            n_blocks: 1,
            ffn_dim: 16,
            ..EncoderConfig::default()
        },
        3,
        3,
        5,
    )?;
    let xe = uniform_matrix(3, 5, 3);
    let mut worst = (0.0f64, 0.0f64);
    for label in 0..3 {
        worst.0 = worst.0.max(check_gradient(&lstm, &x, label, 1e-5)?.max_relative_error);
        worst.1 = worst.1.max(check_gradient(&enc, &xe, label, 1e-5)?.max_relative_error);
    }
    ensure!(
        worst.0 < 1e-4 && worst.1 < 1e-4,
        "relative errors lstm {:.2e}, encoder {:.2e}",
        worst.0,
        worst.1
    );
    Ok(format!(
        "max relative error lstm {:.1e}, encoder {:.1e}",
        worst.0, worst.1
    ))
}

// 3

fn smote_geometry() -> Result<String> {
    let counts = [800, 300, 300];
    let y: Vec<usize> = counts
        .iter()
        .enumerate()
        .flat_map(|(c, &n)| std::iter::repeat_n(c, n))
        .collect();
    let x = uniform_matrix(4, y.len(), 4);
    let columns = (0..4).map(|j| format!("x{j}")).collect();
    let ds = Dataset::new(x, columns, y, 3)?;
    let out = smote_oversample(&ds, 5, 9)?;
    let n = ds.len();
    ensure!(
        out.dataset.len() - n == 1000,
        "{} synthetic rows",
        out.dataset.len() - n
    );
    ensure!(
        out.dataset.class_counts() == [800, 800, 800],
        "counts {:?}",
        out.dataset.class_counts()
    );
    for (s, o) in out.origins.iter().enumerate() {
        let row = out.dataset.x.row(n + s);
        let (a, b) = (ds.x.row(o.base), ds.x.row(o.neighbor));
        ensure!(
            ds.y[o.base] == ds.y[o.neighbor] && ds.y[o.base] == out.dataset.y[n + s],
            "parents of {s} differ in class"
        );
        for j in 0..row.len() {
            ensure!(
                row[j] >= a[j].min(b[j]) && row[j] <= a[j].max(b[j]),
                "synthetic row {s} leaves its parents' box"
            );
        }
    }
    Ok("1000 synthetic rows inside their parents' bounds, classes at 800 each".into())
}

// 4

fn weighted_gini(y: &[usize], left: &[bool]) -> f64 {
    let gini = |side: bool| {
        let mut c = [0.0f64; 3];
        for (&v, &l) in y.iter().zip(left) {
            if l == side {
                c[v] += 1.0;
            }
        }
        let n: f64 = c.iter().sum();
        if n == 0.0 {
            return (0.0, 0.0);
        }
        (n, 1.0 - c.iter().map(|v| (v / n) * (v / n)).sum::<f64>())
    };
    let ((nl, gl), (nr, gr)) = (gini(true), gini(false));
    (nl * gl + nr * gr) / (nl + nr)
}

fn brute_force_root(x: &Matrix, y: &[usize]) -> Option<(usize, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..x.cols() {
        let mut values = x.column(f);
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let t = (pair[0] + pair[1]) / 2.0;
            let left: Vec<bool> = (0..x.rows()).map(|i| x.get(i, f) <= t).collect();
            let score = weighted_gini(y, &left);
            if best.is_none_or(|(s, _, _)| score < s - 1e-12) {
                best = Some((score, f, t));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

fn three_class_labels(x: &Matrix) -> Vec<usize> {
    x.iter_rows()
        .map(|r| {
            if r[0] + 0.4 * r[1] > 0.3 {
                2
            } else if r[2] > 0.1 {
                1
            } else {
                0
            }
        })
        .collect()
}

fn knn_oracle(points: &[[f64; 2]], labels: &[usize], q: [f64; 2], k: usize) -> usize {
    let mut d: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt(), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut votes = [0.0; 3];
    for &(_, i) in &d[..k] {
        votes[labels[i]] += 1.0;
    }
    argmax(&votes)
}

fn oracle_equivalences() -> Result<String> {
    let x = uniform_matrix(5, 200, 4);
    let y = three_class_labels(&x);
    let tree_cfg = TreeConfig {
        max_features: MaxFeatures::Sqrt,
        ..TreeConfig::default()
    };
    let forest = ForestConfig {
        n_estimators: 1,
        tree: tree_cfg.clone(),
        bootstrap: false,
    }
    .fit(&x, &y, 3, 21)?;
    let tree = tree_cfg.fit(&x, &y, 3, 21)?;
    let probe = uniform_matrix(6, 200, 4);
    ensure!(
        forest.predict(&x) == tree.predict(&x),
        "forest and tree disagree on training rows"
    );
    ensure!(
        forest.predict(&probe) == tree.predict(&probe),
        "forest and tree disagree on fresh rows"
    );

    let x50 = uniform_matrix(7, 50, 3);
    let y50 = three_class_labels(&x50);
    let fitted = TreeConfig::default().fit(&x50, &y50, 3, 0)?.root_split();
    let oracle = brute_force_root(&x50, &y50);
    ensure!(fitted == oracle, "root split {fitted:?}, brute force {oracle:?}");

    let points = [[0.0, 0.0], [1.0, 0.2], [0.3, 1.1], [2.5, 2.0], [3.1, 2.7], [2.2, 3.4]];
    let labels = [0, 0, 1, 2, 2, 1];
    let knn = KnnConfig {
        k: 3,
        ..KnnConfig::default()
    }
    .fit(&Matrix::from_rows(&points)?, &labels, 3, 0)?;
    let mut queries = 0;
    for i in 0..15 {
        for j in 0..15 {
            let q = [-0.55 + 0.29 * i as f64, -0.45 + 0.27 * j as f64];
            let expected = knn_oracle(&points, &labels, q, 3);
            ensure!(knn.predict_row(&q) == expected, "knn at {q:?}");
            queries += 1;
        }
    }
    Ok(format!(
        "forest/tree on 400 rows, root split {oracle:?}, knn on {queries} queries"
    ))
}

// 5

fn boosting_closed_form() -> Result<String> {
    let w = leaf_weight(&[1.0, -2.0], &[1.0, 1.0], 1.0, 0.0);
    ensure!((w - 1.0 / 3.0).abs() <= 1e-12, "handcrafted leaf weight {w}");
    let mut r = rng::stream(8, 7, 0);
    for _ in 0..200 {
        let n = r.random_range(1..20);
        let g: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let h: Vec<f64> = (0..n).map(|_| r.random_range(0.01..1.0)).collect();
        let lambda = r.random_range(0.0..5.0);
        let expected = -g.iter().sum::<f64>() / (h.iter().sum::<f64>() + lambda);
        let got = leaf_weight(&g, &h, lambda, 0.0);
        ensure!((got - expected).abs() <= 1e-12, "leaf weight {got} vs {expected}");
    }
    let ds = planted_tabular(500, 6, 2, 0.5, 3)?;
    for growth in [Growth::Depthwise, Growth::Oblivious] {
        let cfg = BoostConfig {
            n_rounds: 50,
            learning_rate: 0.1,
            max_depth: 4,
            subsample: 1.0,
            growth,
            ..BoostConfig::default()
        };
        let m = cfg.fit(&ds.x, &ds.y, 3, 0)?;
        ensure!(m.train_loss.len() == 50, "{} loss records", m.train_loss.len());
        ensure!(
            m.train_loss.windows(2).all(|w| w[1] <= w[0]),
            "{growth:?} loss increased"
        );
    }
    Ok("201 leaf weights to 1e-12; loss non-increasing for both growth modes".into())
}

// 6 and 8 and 10 drive the binary.

fn run_cli(config: &Path, out: &Path, threads: usize, stages: &str) -> Result<Duration> {
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_neurolos"))
        .args(["run", "--stages", stages, "--threads", &threads.to_string()])
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .stdout(std::process::Stdio::null())
        .status()
        .context("starting neurolos")?;
    ensure!(status.success(), "neurolos exited with {status}");
    Ok(start.elapsed())
}

fn metrics(out: &Path) -> Result<Vec<(String, String, f64)>> {
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("evaluation/metrics.json"))?)?;
    v.as_array()
        .context("metrics.json is not a list")?
        .iter()
        .map(|r| {
            Ok((
                r["name"].as_str().context("name")?.to_string(),
                r["family"].as_str().context("family")?.to_string(),
                r["metrics"]["accuracy"].as_f64().context("accuracy")?,
            ))
        })
        .collect()
}

fn synthetic_floors(dir: &Path) -> Result<String> {
    let mut cfg: Value = serde_json::from_str(&fs::read_to_string(demo_config())?)?;
    cfg["data"]["synthetic"]["n_patients"] = 2000.into();
    cfg["data"]["synthetic"]["signal_strength"] = 0.8.into();
    cfg["data"]["synthetic"]["seed"] = 42.into();
    cfg["sequence"]["archs"] = Value::Array(Vec::new());
    let path = dir.join("synthetic-2000.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg)?)?;
    let spec: CohortSpec = serde_json::from_value(cfg["data"]["synthetic"].clone())?;
    let (raw, truth) = generate_cohort(&spec)?;
    let bayes = truth.bayes_accuracy(&raw, &BinEdges::default());

    let out = dir.join("synthetic-2000");
    run_cli(&path, &out, 0, "generate,ingest,marts,features,tune,train,evaluate")?;
    let results = metrics(&out)?;
    let majority = results.iter().find(|r| r.0 == "majority").context("no majority row")?.2;
    let floor = 0.55f64.max(bayes - 0.25);
    let mut lines = Vec::new();
    for (name, family, acc) in results.iter().filter(|r| r.1 == "classic") {
        let kind = name.as_str();
        if matches!(kind, "forest" | "boost-depthwise" | "boost-oblivious") {
            ensure!(
                *acc >= floor,
                "{name} accuracy {acc:.4} below max(0.55, B* - 0.25) = {floor:.4}"
            );
        }
        ensure!(
            *acc >= majority + 0.10,
            "{family} model {name} accuracy {acc:.4} within 0.10 of majority {majority:.4}"
        );
        lines.push(format!("{name} {acc:.3}"));
    }
    ensure!(lines.len() >= 5, "only {} classic models evaluated", lines.len());
    Ok(format!("B* {bayes:.3}, majority {majority:.3}; {}", lines.join(", ")))
}

// 7

fn sequence_floors() -> Result<String> {
    let data = planted_windows(360, 16, 4, 1.5, 7)?;
    let (train, val) = data.split_at(240);
    let cfg = TrainConfig {
        epochs: 20,
        batch_size: 16,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let archs = [
        SeqArch::Lstm(LstmConfig {
            hidden: 32,
            ..LstmConfig::default()
        }),
        SeqArch::Encoder(EncoderConfig {
            d_model: 32,
            n_heads: 4,
            n_blocks: 2,
            ffn_dim: 64,
            ..EncoderConfig::default()
        }),
    ];
    let mut best = Vec::new();
    for arch in &archs {
        let out = train_sequence_model(arch, train, val, 3, &cfg, &Sequential)?;
        ensure!(out.history.len() <= 20, "{} epochs", out.history.len());
        let acc = out.history.iter().filter_map(|h| h.val_accuracy).fold(0.0, f64::max);
        ensure!(acc >= 0.9, "{} validation accuracy {acc:.3}", arch.name());
        best.push(format!("{} {acc:.3}", arch.name()));
    }

    let edges = BinEdges::default();
    let mut checked = 0usize;
    for len in 0..=64usize {
        let series = neurolos_core::seq::FilledSeries {
            stay_id: 1,
            x: Matrix::from_vec(len, 1, (0..len).map(|i| i as f64).collect())?,
            remaining_days: (0..len).map(|i| (len - i) as f64 / 10.0).collect(),
        };
        for window in 1..=64usize {
            for step in 1..=64usize {
                let starts: Vec<usize> = (0..len).step_by(step).filter(|s| s + window <= len).collect();
                ensure!(
                    window_count(len, window, step) == starts.len(),
                    "count for L={len} w={window} s={step}"
                );
                let ws = make_windows(&series, window, step, &edges)?;
                ensure!(
                    ws.iter().map(|w| w.start).eq(starts.iter().copied()),
                    "starts for L={len} w={window} s={step}"
                );
                ensure!(
                    ws.iter()
                        .all(|w| w.x.get(0, 0) == w.start as f64 && w.x.rows() == window),
                    "window rows"
                );
                checked += 1;
            }
        }
    }
    Ok(format!(
        "best validation accuracy {}; {checked} window geometries",
        best.join(", ")
    ))
}

// 8 and 10

fn compare_trees(a: &Path, b: &Path, sub: &str) -> Result<usize> {
    let mut names: Vec<_> = fs::read_dir(a.join(sub))?
        .map(|e| e.map(|e| e.file_name()))
        .collect::<Result<_, _>>()?;
    names.sort();
    let mut n = 0;
    for name in names.iter().filter(|n| n.to_string_lossy().ends_with(".csv")) {
        let (pa, pb) = (a.join(sub).join(name), b.join(sub).join(name));
        ensure!(
            fs::read(&pa)? == fs::read(&pb)?,
            "{} differs between runs",
            pa.strip_prefix(a)?.display()
        );
        n += 1;
    }
    Ok(n)
}

fn demo_loadable() -> Result<()> {
    let cfg = ExperimentConfig::load(&demo_config())?;
    cfg.validate()?;
    let v: Value = serde_json::from_str(&fs::read_to_string(demo_config())?)?;
    let block = |kind: &str| -> Result<Value> {
        v["models"]
            .as_array()
            .context("models")?
            .iter()
            .find(|b| b["kind"] == kind && b.get("name").is_none())
            .map(|b| b["params"].clone())
            .with_context(|| format!("no {kind} block"))
    };
    ensure!(block("knn")?["n_neighbors"] == 35, "knn neighbours");
    ensure!(
        block("svm")?["c"] == 0.104 && block("svm")?["kernel"] == "linear",
        "svm"
    );
    ensure!(
        block("forest")?["n_estimators"] == 943 && block("forest")?["max_depth"] == 26,
        "forest"
    );
    ensure!(
        block("boost-depthwise")?["learning_rate"] == 0.0116,
        "depthwise learning rate"
    );
    ensure!(
        block("boost-oblivious")?["learning_rate"] == 0.1342 && block("boost-oblivious")?["depth"] == 6,
        "oblivious"
    );
    ensure!(
        v["sequence"]["train"]["learning_rate"] == 0.0001,
        "sequence learning rate"
    );
    let enc = v["sequence"]["archs"]
        .as_array()
        .context("archs")?
        .iter()
        .find(|a| a["kind"] == "encoder");
    ensure!(
        enc.is_some_and(|a| a["n_heads"] == 16 && a["n_blocks"] == 4),
        "encoder heads and blocks"
    );
    Ok(())
}

fn demo_runs(dir: &Path) -> Result<(Duration, Duration)> {
    demo_loadable()?;
    let (a, b) = (dir.join("demo-1-thread"), dir.join("demo-4-threads"));
    let ta = run_cli(&demo_config(), &a, 1, "all")?;
    let tb = run_cli(&demo_config(), &b, 4, "all")?;
    Ok((ta, tb))
}

fn determinism(a: &Path, b: &Path) -> Result<String> {
    let reports = compare_trees(a, b, "report")?;
    let predictions = compare_trees(a, b, "evaluation/predictions")?;
    ensure!(reports >= 5, "only {reports} report CSVs");
    let results = metrics(a)?;
    let classic = results.iter().filter(|r| r.1 == "classic").count();
    let sequence = results.iter().filter(|r| r.1 == "sequence").count();
    ensure!(
        classic >= 5 && sequence >= 2,
        "report has {classic} classic and {sequence} sequence rows"
    );
    Ok(format!(
        "{reports} report CSVs and {predictions} prediction files identical across 1 and 4 threads"
    ))
}

fn trained(out: &Path) -> Result<String> {
    let cfg = ExperimentConfig::load(&demo_config())?;
    for block in &cfg.models {
        let f = out.join("models").join(format!("{}.json", block.name()));
        ensure!(f.is_file(), "missing {}", f.display());
    }
    let mut seq = 0;
    for e in fs::read_dir(out.join("models/sequence"))? {
        let name = e?.file_name().to_string_lossy().into_owned();
        seq += usize::from(name.ends_with(".json") && name != "windows.json");
    }
    ensure!(seq >= 2, "{seq} sequence model files");
    Ok(format!(
        "{} classic models and the sequence grid trained",
        cfg.models.len()
    ))
}

// 9

fn importance_sanity() -> Result<String> {
    let mut first = 0;
    for seed in 0..20u64 {
        let ds = planted_tabular(400, 6, 1, 0.3, seed)?;
        let train = ds.select_rows(&(0..300).collect::<Vec<_>>());
        let test = ds.select_rows(&(300..400).collect::<Vec<_>>());
        let forest = ForestConfig {
            n_estimators: 50,
            ..ForestConfig::default()
        }
        .fit(&train.x, &train.y, 3, seed)?;
        let imp = permutation_importance(&forest, &test.x, &test.y, Metric::Accuracy, 5, seed, &Sequential)?;
        let best = (1..imp.len()).all(|j| imp[0].mean > imp[j].mean);
        first += usize::from(best);
    }
    ensure!(first >= 19, "planted feature ranked first in {first} of 20 repetitions");

    let ds = planted_tabular(300, 5, 2, 0.3, 11)?;
    let mut x = Matrix::zeros(ds.len(), 6);
    for i in 0..ds.len() {
        x.row_mut(i)[..5].copy_from_slice(ds.x.row(i));
    }
    let tree = TreeConfig {
        max_depth: Some(2),
        ..TreeConfig::default()
    }
    .fit(&x, &ds.y, 3, 0)?;
    let used: Vec<usize> = tree
        .nodes
        .iter()
        .filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
        .collect();
    let imp = permutation_importance(&tree, &x, &ds.y, Metric::Accuracy, 5, 3, &Sequential)?;
    let unused: Vec<usize> = (0..6).filter(|j| !used.contains(j)).collect();
    ensure!(unused.contains(&5), "the constant column was split on");
    for &j in &unused {
        ensure!(
            imp[j].mean == 0.0 && imp[j].std == 0.0,
            "unused feature {j} scores {:?}",
            imp[j]
        );
    }
    Ok(format!(
        "planted feature first in {first}/20; {} unused features score 0 +- 0",
        unused.len()
    ))
}

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn line(&mut self, n: usize, title: &str, budget: Duration, elapsed: Duration, outcome: Result<String>) {
        let outcome = outcome.and_then(|detail| {
            ensure!(
                elapsed < budget,
                "took {:.1}s, budget {:.0}s",
                elapsed.as_secs_f64(),
                budget.as_secs_f64()
            );
            Ok(detail)
        });
        let secs = elapsed.as_secs_f64();
        let (ok, text) = match outcome {
            Ok(detail) => (true, format!("PASS {n:>2} {title} ({secs:.1}s): {detail}")),
            Err(e) => (false, format!("FAIL {n:>2} {title} ({secs:.1}s): {e:#}")),
        };
        eprintln!("{text}");
        self.lines.push((n, ok, text));
    }

    fn timed(&mut self, n: usize, title: &str, budget: Duration, f: impl FnOnce() -> Result<String>) -> Duration {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        self.line(n, title, budget, elapsed, outcome);
        elapsed
    }
}

fn main() {
    let scratch = tempfile::tempdir().expect("scratch directory");
    let dir = scratch.path();
    let secs = Duration::from_secs;
    let mut r = Report { lines: Vec::new() };

    r.timed(1, "metric identities", secs(1), metric_identities);
    r.timed(2, "gradient verification", secs(30), gradient_checks);
    r.timed(3, "SMOTE geometry", secs(5), smote_geometry);
    r.timed(4, "oracle equivalences", secs(10), oracle_equivalences);
    r.timed(5, "boosting closed form", secs(60), boosting_closed_form);
    let t6 = r.timed(6, "end-to-end synthetic floors", CRITERION_6_BUDGET, || {
        synthetic_floors(dir)
    });
    r.timed(7, "sequence floors", secs(300), sequence_floors);
    r.timed(9, "permutation importance sanity", secs(120), importance_sanity);

    // Criterion 8's budget is twice criterion 6's; the measured ratio is reported too.
    let (a, b) = (dir.join("demo-1-thread"), dir.join("demo-4-threads"));
    match demo_runs(dir) {
        Ok((ta, tb)) => {
            let total = ta + tb;
            let ratio = total.as_secs_f64() / t6.as_secs_f64();
            let detail = determinism(&a, &b).map(|d| format!("{d}; {ratio:.2}x the measured criterion 6 runtime"));
            r.line(8, "determinism", 2 * CRITERION_6_BUDGET, total, detail);
            r.line(10, "demo config loads and trains", secs(600), ta, trained(&a));
        }
        Err(e) => {
            r.line(
                8,
                "determinism",
                2 * CRITERION_6_BUDGET,
                Duration::ZERO,
                Err(anyhow::anyhow!("{e:#}")),
            );
            r.line(10, "demo config loads and trains", secs(600), Duration::ZERO, Err(e));
        }
    }

    r.lines.sort_by_key(|l| l.0);
    println!();
    for (_, _, text) in &r.lines {
        println!("{text}");
    }
    let passed = r.lines.iter().filter(|l| l.1).count();
    println!("acceptance: {passed} of {} criteria passed", r.lines.len());
    if passed < r.lines.len() {
        std::process::exit(1);
    }
}
