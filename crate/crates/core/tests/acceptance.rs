//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.

mod common;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{ari_pairs, canonical_labelings, exhaustive_two_means, expected_triples, fixture, nmi_direct};
use triplex::classify::{cross_entropy, gradients, LinearHead};
use triplex::cluster::{
    composite_score, gmm_fit, hdbscan_fit, kmeans_fit, partition_sweep, selection_score, Algorithm, GmmOptions,
    KMeansOptions,
};
use triplex::conllu;
use triplex::embed::RowsView;
use triplex::metrics::{ari, classification_report, nmi, silhouette, PairwiseDistances};
use triplex::report::{classification_columns, CLUSTERING_COLUMNS};
use triplex::rng;
use triplex::synth::planted_blobs;
use triplex::triples::{extract_document, linearize, ExtractConfig};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < budget, format!("took {spent:.1?}, budget {budget:?}"))
}

fn metric_oracles() -> Check {
    let start = Instant::now();
    let mut pairs = 0usize;
    let mut worst = 0f64;
    for n in 2..=7 {
        let parts = canonical_labelings(n, 3);
        for a in &parts {
            for b in &parts {
                let e1 = (ari(a, b).map_err(|e| e.to_string())? - ari_pairs(a, b)).abs();
                let e2 = (nmi(a, b).map_err(|e| e.to_string())? - nmi_direct(a, b)).abs();
                worst = worst.max(e1).max(e2);
                pairs += 1;
            }
        }
    }
    ensure(worst <= 1e-12, format!("max ARI/NMI deviation {worst:e}"))?;
    let s = silhouette(RowsView::new(&[0.0, 1.0, 2.0, 3.0], 1), &[0, 0, 1, 1]).map_err(|e| e.to_string())?;
    ensure((s - 7.0 / 15.0).abs() <= 1e-12, format!("silhouette {s}, want 7/15"))?;
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!(
        "{pairs} partition pairs, max deviation {worst:.1e}, silhouette {s:.15}, {:.2?}",
        start.elapsed()
    ))
}

fn classification_metrics() -> Check {
    let truth = [0, 1, 2, 2];
    let pred = [0, 2, 2, 2];
    let scores: Vec<f64> = pred
        .iter()
        .flat_map(|&p| (0..3).map(move |c| if c == p { 1.0 } else { 0.0 }))
        .collect();
    let r = classification_report(&truth, &pred, &scores, 3).map_err(|e| e.to_string())?;
    let mut failures = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64, tol: f64| {
        if (got - want).abs() > tol {
            failures.push(format!("{name} = {got:.6}, want {want:.6} ± {tol:e}"));
        }
    };
    expect("accuracy", r.accuracy, 0.75, 1e-12);
    expect("macro precision", r.precision_macro, 5.0 / 9.0, 1e-12);
    expect("macro recall", r.recall_macro, 2.0 / 3.0, 1e-12);
    expect("kappa", r.kappa, 0.6364, 1e-4);

    let truth: Vec<usize> = (0..100).map(|i| i % 2).collect();
    let constant = vec![0; 100];
    let flat = vec![0.5; 200];
    let c = classification_report(&truth, &constant, &flat, 2).map_err(|e| e.to_string())?;
    expect("constant kappa", c.kappa, 0.0, 1e-12);
    expect("constant mcc", c.mcc, 0.0, 1e-12);
    expect("constant auc", c.roc_auc_macro, 0.5, 1e-12);
    if failures.is_empty() {
        Ok(format!("kappa {:.4}, constant predictor kappa/mcc/auc {}/{}/{}", r.kappa, c.kappa, c.mcc, c.roc_auc_macro))
    } else {
        Err(failures.join("; "))
    }
}

fn planted_recovery() -> Check {
    let start = Instant::now();
    let blobs = planted_blobs(500, 16, 5, 20.0, 7).map_err(|e| e.to_string())?;
    let x = RowsView::new(&blobs.points, blobs.dim);
    let dist = PairwiseDistances::compute(x);
    let ks: Vec<usize> = (3..=12).collect();
    let mut notes = Vec::new();
    for alg in [Algorithm::KMeans, Algorithm::Gmm] {
        let out = partition_sweep(x, &dist, &blobs.labels, alg, &ks, 42).map_err(|e| e.to_string())?;
        let best = out.best_entry();
        ensure(best.param == 5, format!("{alg:?} selected k={}", best.param))?;
        ensure(best.ari >= 0.99, format!("{alg:?} ARI {}", best.ari))?;
        notes.push(format!("{} k={} ARI {:.4}", alg.as_str(), best.param, best.ari));
    }
    let h = hdbscan_fit(x, 10, None).map_err(|e| e.to_string())?;
    let h_ari = ari(&blobs.labels, &h.labels).map_err(|e| e.to_string())?;
    ensure(h.n_clusters == 5, format!("hdbscan found {} clusters", h.n_clusters))?;
    ensure(h.noise_fraction <= 0.05, format!("hdbscan noise {}", h.noise_fraction))?;
    ensure(h_ari >= 0.99, format!("hdbscan ARI {h_ari}"))?;
    within_budget(start, Duration::from_secs(60))?;
    notes.push(format!(
        "hdbscan {} clusters noise {:.3} ARI {h_ari:.4}",
        h.n_clusters, h.noise_fraction
    ));
    Ok(format!("{}, {:.2?}", notes.join(", "), start.elapsed()))
}

fn optimizer_monotonicity() -> Check {
    let mut g = rng::seeded(2718);
    let mut steps = 0;
    for inst in 0..100 {
        let n = 20 + rng::below(&mut g, 60);
        let d = 1 + rng::below(&mut g, 5);
        let k = 2 + rng::below(&mut g, 4);
        let centres: Vec<f64> = (0..k * d).map(|_| 3.0 * rng::normal(&mut g)).collect();
        let x: Vec<f64> = (0..n)
            .flat_map(|_| {
                let c = rng::below(&mut g, k);
                (0..d).map(|j| centres[c * d + j] + rng::normal(&mut g)).collect::<Vec<_>>()
            })
            .collect();
        let xv = RowsView::new(&x, d);
        let km = kmeans_fit(xv, k, inst, KMeansOptions::default()).map_err(|e| e.to_string())?;
        for w in km.trace.windows(2) {
            ensure(w[1] <= w[0] + 1e-8, format!("instance {inst}: inertia rose {} -> {}", w[0], w[1]))?;
        }
        let gm = gmm_fit(xv, k, inst, GmmOptions::default()).map_err(|e| e.to_string())?;
        for w in gm.partition.trace.windows(2) {
            ensure(w[1] >= w[0] - 1e-8, format!("instance {inst}: log-likelihood fell {} -> {}", w[0], w[1]))?;
        }
        steps += km.trace.len() + gm.partition.trace.len();
    }
    Ok(format!("100 instances, {steps} recorded iterations"))
}

fn small_instance_exactness() -> Check {
    let text = std::fs::read_to_string(fixture("two_means.json")).map_err(|e| e.to_string())?;
    let cases: Vec<serde_json::Value> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    for case in &cases {
        let dim = case["dim"].as_u64().unwrap() as usize;
        let points: Vec<f64> = case["points"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|p| p.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()))
            .collect();
        let n = points.len() / dim;
        ensure(n <= 8, format!("{} has {n} points", case["name"]))?;
        let want = exhaustive_two_means(&points, dim);
        let got = kmeans_fit(RowsView::new(&points, dim), 2, 42, KMeansOptions::default())
            .map_err(|e| e.to_string())?
            .objective;
        ensure(
            (got - want).abs() <= 1e-9 * want.max(1.0),
            format!("{}: kmeans {got}, exhaustive {want}", case["name"]),
        )?;
    }
    Ok(format!("{} fixtures match the exhaustive optimum", cases.len()))
}

fn gradient_check() -> Check {
    let (c, d, n) = (3, 8, 10);
    let h = 1e-5;
    let mut worst = 0f64;
    let mut g = rng::seeded(99);
    for _ in 0..20 {
        let x: Vec<f64> = (0..n * d).map(|_| rng::normal(&mut g)).collect();
        let y: Vec<usize> = (0..n).map(|_| rng::below(&mut g, c)).collect();
        let head = LinearHead {
            classes: c,
            dim: d,
            w: (0..c * d).map(|_| 0.5 * rng::normal(&mut g)).collect(),
            b: (0..c).map(|_| 0.5 * rng::normal(&mut g)).collect(),
        };
        let xv = RowsView::new(&x, d);
        let idx: Vec<usize> = (0..n).collect();
        let grad = gradients(&head, xv, &y, &idx);
        let rel = |a: f64, num: f64| (a - num).abs() / a.abs().max(num.abs()).max(1e-8);
        for i in 0..c * d + c {
            let (mut plus, mut minus) = (head.clone(), head.clone());
            let analytic = if i < c * d {
                plus.w[i] += h;
                minus.w[i] -= h;
                grad.w[i]
            } else {
                plus.b[i - c * d] += h;
                minus.b[i - c * d] -= h;
                grad.b[i - c * d]
            };
            let numeric = (cross_entropy(&plus, xv, &y, &idx) - cross_entropy(&minus, xv, &y, &idx)) / (2.0 * h);
            worst = worst.max(rel(analytic, numeric));
        }
    }
    ensure(worst < 1e-6, format!("max relative error {worst:e}"))?;
    Ok(format!("20 instances, max relative error {worst:.1e}"))
}

fn triple_parity() -> Check {
    let docs = conllu::read_file(&fixture("triples_20.conllu")).map_err(|e| e.to_string())?;
    let sentences: usize = docs.iter().map(|d| d.sentences.len()).sum();
    ensure(sentences == 20, format!("fixture has {sentences} sentences"))?;
    let triples = extract_document(&docs[0], "fixture", &ExtractConfig::default());
    let got: BTreeSet<_> = triples
        .iter()
        .map(|t| (t.sentence_index, t.subject.clone(), t.relation.clone(), t.object.clone()))
        .collect();
    let tsv = std::fs::read_to_string(fixture("triples_20_expected.tsv")).map_err(|e| e.to_string())?;
    let want: BTreeSet<_> = expected_triples(&tsv).into_iter().collect();
    let missing: Vec<_> = want.difference(&got).collect();
    let extra: Vec<_> = got.difference(&want).collect();
    ensure(missing.is_empty() && extra.is_empty(), format!("missing {missing:?}, extra {extra:?}"))?;
    let first = triples
        .iter()
        .find(|t| t.subject == "transformer" && t.relation == "improves" && t.object == "accuracy")
        .ok_or("(transformer, improves, accuracy) not extracted")?;
    let line = linearize(first);
    ensure(line == "Transformer improves accuracy.", format!("linearized as {line:?}"))?;
    Ok(format!("{} triples over 20 sentences, {line:?}", got.len()))
}

fn composite_arithmetic() -> Check {
    let s = selection_score(0.4703, 0.5511);
    let c = composite_score(0.5, 0.4, 0.1);
    ensure((s - 0.5107).abs() <= 5e-5, format!("score {s}"))?;
    ensure((c - 0.65).abs() <= 1e-12, format!("composite {c}"))?;
    Ok(format!("score {s:.5}, composite {c}"))
}

fn run_pipeline(out: &Path) -> Result<(), String> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/demo/demo.toml");
    let o = Command::new(env!("CARGO_BIN_EXE_triplex"))
        .args(["pipeline", "--seed", "42", "--provider", "hash", "--quiet", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(out)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        o.status.success(),
        format!("pipeline exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)),
    )
}

const REPORT_FILES: [&str; 6] = [
    "clustering_table.csv",
    "clustering_table.md",
    "classification_table.csv",
    "classification_table.md",
    "cluster_composition.csv",
    "manifest.json",
];

fn end_to_end(work: &Path) -> Check {
    let start = Instant::now();
    let (a, b) = (work.join("a"), work.join("b"));
    run_pipeline(&a)?;
    run_pipeline(&b)?;
    for f in REPORT_FILES {
        let read = |p: &Path| std::fs::read(p.join("report").join(f)).map_err(|e| format!("{f}: {e}"));
        ensure(read(&a)? == read(&b)?, format!("{f} differs between runs"))?;
    }
    let mut r = csv::Reader::from_path(a.join("report/classification_table.csv")).map_err(|e| e.to_string())?;
    let pairs: BTreeSet<String> = r
        .records()
        .map(|rec| rec.map(|r| r[0].to_string()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let modes = ["Abs", "Trip", "Abs_Trip", "Hyb"];
    let want: BTreeSet<String> = modes
        .iter()
        .flat_map(|c| modes.iter().map(move |m| format!("{c}/{m}")))
        .collect();
    ensure(pairs == want, format!("classification grid {pairs:?}"))?;
    within_budget(start, Duration::from_secs(300))?;
    Ok(format!(
        "two runs byte-identical over {} files, 16-row grid, {:.2?}",
        REPORT_FILES.len(),
        start.elapsed()
    ))
}

fn round_trip(path: &Path, header: &[&str]) -> Result<usize, String> {
    let original = std::fs::read(path).map_err(|e| e.to_string())?;
    let mut r = csv::Reader::from_reader(original.as_slice());
    let got: Vec<String> = r.headers().map_err(|e| e.to_string())?.iter().map(str::to_string).collect();
    ensure(got == header, format!("{}: header {got:?}", path.display()))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        ensure(rec.len() == header.len(), format!("{}: ragged row", path.display()))?;
        w.write_record(&rec).map_err(|e| e.to_string())?;
        rows += 1;
    }
    let rewritten = w.into_inner().map_err(|e| e.to_string())?;
    ensure(rewritten == original, format!("{} does not round-trip", path.display()))?;
    Ok(rows)
}

fn format_parity(work: &Path) -> Check {
    let dir = work.join("a/report");
    if !dir.exists() {
        run_pipeline(&work.join("a"))?;
    }
    let t1 = round_trip(&dir.join("clustering_table.csv"), &CLUSTERING_COLUMNS)?;
    let t2 = round_trip(&dir.join("classification_table.csv"), &classification_columns())?;
    for (md, cols) in [
        ("clustering_table.md", CLUSTERING_COLUMNS.to_vec()),
        ("classification_table.md", classification_columns()),
    ] {
        let text = std::fs::read_to_string(dir.join(md)).map_err(|e| e.to_string())?;
        let want = format!("| {} |", cols.join(" | "));
        ensure(text.lines().next() == Some(want.as_str()), format!("{md} header mismatch"))?;
    }
    Ok(format!("Table 1 shape with {t1} rows, Table 2 shape with {t2} rows"))
}

type Criterion<'a> = (&'a str, Box<dyn Fn() -> Check + 'a>);

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("metric oracle suite", Box::new(metric_oracles)),
        ("classification metric suite", Box::new(classification_metrics)),
        ("planted-cluster recovery", Box::new(planted_recovery)),
        ("optimizer monotonicity", Box::new(optimizer_monotonicity)),
        ("small-instance exactness", Box::new(small_instance_exactness)),
        ("gradient check", Box::new(gradient_check)),
        ("triple extraction parity", Box::new(triple_parity)),
        ("composite-score arithmetic", Box::new(composite_arithmetic)),
        ("end-to-end determinism", Box::new(|| end_to_end(work.path()))),
        ("format parity", Box::new(|| format_parity(work.path()))),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
