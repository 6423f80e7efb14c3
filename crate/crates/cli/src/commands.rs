use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use hcpart::anomaly::{default_thresholds, simulate_holdout, write_sweep_csv, HoldoutReport, HoldoutSpec};
use hcpart::dataset::{
    gen_clique, gen_planted, load_csv, load_edge_list, read_labels, sq_dist, train_test_split, write_csv,
    write_edge_list, write_labels, GmmParams, PlantedParams,
};
use hcpart::metrics::{
    brute_force_cost, classification_report, cost as hierarchy_cost, pair_similarity, purity as leaf_purity,
    ClassReport, CostMode,
};
use hcpart::spectral::{cheeger_check, CheegerReport};
use hcpart::splitrules::flat_kmeans;
use hcpart::tree::{brute_force_knn, classify as tree_classify, exact_classify, read_tree, write_tree};
use hcpart::{build as build_tree, HCTree, Rule, SimilarityView, VectorDataset};

use crate::input::Data;
use crate::manifest::{emit, RunManifest};
use crate::{AnomalyArgs, BuildArgs, CheegerArgs, ClassifyArgs, CostArgs, GenKind, PurityArgs};

/// Relative difference above which fast and pairwise cost disagree.
const COST_AGREEMENT: f64 = 1e-6;

#[derive(Serialize)]
struct TreeSummary {
    n: usize,
    dim: Option<usize>,
    rule: Rule,
    depth: usize,
    internal_nodes: usize,
    leaves: usize,
}

impl TreeSummary {
    fn of(tree: &HCTree) -> Self {
        TreeSummary {
            n: tree.n(),
            dim: tree.meta().dim,
            rule: tree.meta().rule,
            depth: tree.depth(),
            internal_nodes: tree.num_internal(),
            leaves: tree.num_leaves(),
        }
    }
}

fn millis_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn labels_path(out: &Path) -> Result<PathBuf> {
    let p = out.with_extension("labels");
    ensure!(p != out, "output {} would collide with its labels file", out.display());
    Ok(p)
}

#[derive(Serialize)]
struct GenSummary {
    kind: &'static str,
    n: usize,
    dim: Option<usize>,
    edges: Option<usize>,
    files: Vec<PathBuf>,
}

pub fn gen(kind: &GenKind) -> Result<bool> {
    let mut m = RunManifest::new("gen", kind)?;
    let summary = match kind {
        GenKind::Planted(a) => {
            m.seed("seed", a.seed);
            let params = PlantedParams {
                n: a.n,
                p: a.p,
                q: a.q,
                seed: a.seed,
            };
            let g = m.timed("generate", || gen_planted(params))?;
            let lp = labels_path(&a.out)?;
            write_edge_list(&g, &a.out)?;
            write_labels(&params.blocks(), &lp)?;
            GenSummary {
                kind: "planted",
                n: g.n(),
                dim: None,
                edges: Some(g.edges().len()),
                files: vec![a.out.clone(), lp],
            }
        }
        GenKind::Gmm(a) => {
            m.seed("seed", a.seed);
            let sample = m.timed("generate", || GmmParams::new(a.n, a.k, a.dim, a.sep, a.seed).generate())?;
            let ds = sample.dataset;
            let labels = ds.labels().context("generated data has labels")?.to_vec();
            let unlabeled = VectorDataset::new(ds.dim(), ds.points().to_vec(), None, false)?;
            let lp = labels_path(&a.out)?;
            write_csv(&unlabeled, &a.out)?;
            write_labels(&labels, &lp)?;
            GenSummary {
                kind: "gmm",
                n: ds.n(),
                dim: Some(ds.dim()),
                edges: None,
                files: vec![a.out.clone(), lp],
            }
        }
        GenKind::Clique(a) => {
            let g = gen_clique(a.n)?;
            let lp = labels_path(&a.out)?;
            write_edge_list(&g, &a.out)?;
            write_labels(&vec![0; a.n], &lp)?;
            GenSummary {
                kind: "clique",
                n: g.n(),
                dim: None,
                edges: Some(g.edges().len()),
                files: vec![a.out.clone(), lp],
            }
        }
    };
    emit(&m, &summary, None)?;
    Ok(true)
}

#[derive(Serialize)]
struct BuildSummary {
    tree: TreeSummary,
    path: PathBuf,
    sha256: String,
}

pub fn build(a: &BuildArgs) -> Result<bool> {
    let mut m = RunManifest::new("build", a)?;
    m.seed("seed", a.tree.seed);
    let data = a.input.load(&mut m)?;
    let cfg = a.tree.config(a.bucket);
    let tree = m.timed("build", || build_tree(data.build_input(), &cfg))?;
    write_tree(&tree, &a.out)?;
    let summary = BuildSummary {
        tree: TreeSummary::of(&tree),
        path: a.out.clone(),
        sha256: hex::encode(Sha256::digest(tree.to_text().as_bytes())),
    };
    emit(&m, &summary, a.report.as_deref())?;
    Ok(true)
}

#[derive(Serialize)]
struct ClassifySummary {
    tree: TreeSummary,
    n_train: usize,
    n_test: usize,
    k: usize,
    bucket: usize,
    /// The bucket exceeds the training set, so every query scans all of it.
    exact_mode: bool,
    /// Share of queries whose neighbors and class match brute-force kNN
    /// (checked in exact mode only).
    exact_agreement: Option<f64>,
    mean_candidates: f64,
    report: ClassReport,
}

pub fn classify(a: &ClassifyArgs) -> Result<bool> {
    let mut m = RunManifest::new("classify", a)?;
    m.seed("seed", a.tree.seed);
    let data = a.input.load(&mut m)?;
    let ds = data.vectors()?;
    data.labels()?;
    let (train, test) = match &a.queries {
        Some(q) => {
            m.input(q)?;
            let mut qs =
                load_csv(q, a.input.label_column, true).with_context(|| format!("loading queries {}", q.display()))?;
            if let Some(ql) = &a.query_labels {
                m.input(ql)?;
                qs = qs.with_labels(read_labels(ql)?)?;
            }
            ensure!(
                qs.labels().is_some(),
                "queries need labels: pass --query-labels or --label-column"
            );
            (ds.clone(), qs)
        }
        None => {
            ensure!(
                a.test_fraction > 0.0 && a.test_fraction < 1.0,
                "--test-fraction must lie in (0, 1)"
            );
            let (tr, te) = train_test_split(ds.n(), a.test_fraction, a.tree.seed);
            ensure!(
                !tr.is_empty() && !te.is_empty(),
                "split left an empty train or test set"
            );
            (ds.subset(&tr), ds.subset(&te))
        }
    };
    ensure!(
        train.dim() == test.dim(),
        "queries have dimension {}, training data {}",
        test.dim(),
        train.dim()
    );
    let cfg = a.tree.config(a.bucket);
    let tree = m.timed("build", || build_tree(hcpart::BuildInput::Vectors(&train), &cfg))?;

    let exact_mode = a.bucket > train.n();
    let mut predicted = Vec::with_capacity(test.n());
    let mut candidates = 0usize;
    let mut agree = 0usize;
    let mut query_ms = 0.0;
    for x in test.rows() {
        let start = Instant::now();
        let p = tree_classify(&tree, &train, x, a.knn, a.bucket)?;
        query_ms += millis_since(start);
        if exact_mode {
            let oracle = brute_force_knn(&train, x, a.knn);
            let same_ids = oracle.iter().map(|n| n.id).eq(p.neighbors.iter().map(|n| n.id));
            if same_ids && exact_classify(&train, x, a.knn)?.class == p.class {
                agree += 1;
            }
        }
        candidates += p.candidates;
        predicted.push(p.class);
    }
    let nq = test.n() as f64;
    m.record("queries", query_ms);
    m.record("mean_query", query_ms / nq);
    let truth = test.labels().expect("checked above");
    let exact_agreement = exact_mode.then(|| agree as f64 / nq);
    let summary = ClassifySummary {
        tree: TreeSummary::of(&tree),
        n_train: train.n(),
        n_test: test.n(),
        k: a.knn,
        bucket: a.bucket,
        exact_mode,
        exact_agreement,
        mean_candidates: candidates as f64 / nq,
        report: classification_report(&predicted, truth)?,
    };
    emit(&m, &summary, a.out.as_deref())?;
    if exact_mode && agree != test.n() {
        eprintln!(
            "exact mode disagreed with brute-force kNN on {} queries",
            test.n() - agree
        );
        return Ok(false);
    }
    Ok(true)
}

#[derive(Serialize)]
struct CostSummary {
    tree: TreeSummary,
    mode: CostMode,
    total_cost: f64,
    clamped_pair_warning_count: usize,
    brute_force_total: Option<f64>,
    relative_difference: Option<f64>,
}

pub fn cost(a: &CostArgs) -> Result<bool> {
    let mut m = RunManifest::new("cost", a)?;
    let data = a.input.load(&mut m)?;
    let tree = match &a.tree {
        Some(p) => {
            m.input(p)?;
            read_tree(p).with_context(|| format!("reading tree {}", p.display()))?
        }
        None => {
            m.seed("seed", a.build.seed);
            let cfg = a.build.config(64);
            m.timed("build", || build_tree(data.build_input(), &cfg))?
        }
    };
    ensure!(
        tree.n() == data.n(),
        "tree covers {} points, input has {}",
        tree.n(),
        data.n()
    );
    let view = match &data.data {
        Data::Vectors(d) => {
            ensure!(
                tree.meta().dim == Some(d.dim()),
                "tree was not built on {}-dimensional vectors",
                d.dim()
            );
            SimilarityView::implicit_all(d)
        }
        Data::Graph(g) => {
            ensure!(
                tree.meta().dim.is_none(),
                "tree was built on vectors but the input is a graph"
            );
            SimilarityView::explicit_all(g)
        }
    };
    let report = m.timed("cost", || hierarchy_cost(&tree, &view))?;
    let (brute, diff) = if a.brute_force {
        let b = m.timed("brute_force", || brute_force_cost(&tree, pair_similarity(&view)))?;
        let diff = (report.total_cost - b).abs() / b.abs().max(f64::MIN_POSITIVE);
        (Some(b), Some(diff))
    } else {
        (None, None)
    };
    let summary = CostSummary {
        tree: TreeSummary::of(&tree),
        mode: report.mode,
        total_cost: report.total_cost,
        clamped_pair_warning_count: report.clamped_pair_warning_count,
        brute_force_total: brute,
        relative_difference: diff,
    };
    emit(&m, &summary, a.out.as_deref())?;
    match diff {
        Some(d) if !(d < COST_AGREEMENT) => {
            eprintln!("fast and pairwise cost differ by {d:.3e} (relative)");
            Ok(false)
        }
        _ => Ok(true),
    }
}

#[derive(Serialize)]
struct FlatSummary {
    k: usize,
    purity: f64,
}

#[derive(Serialize)]
struct PuritySummary {
    tree: TreeSummary,
    tree_purity: f64,
    /// Nodes visited by a descent to a leaf, averaged over the input.
    mean_visits: Option<f64>,
    depth_bound: f64,
    /// Flat k-means with `k = ⌊log₂ leaves⌋`.
    flat: Option<FlatSummary>,
}

pub fn purity(a: &PurityArgs) -> Result<bool> {
    let mut m = RunManifest::new("purity", a)?;
    m.seed("seed", a.tree.seed);
    let data = a.input.load(&mut m)?;
    let labels = data.labels()?;
    let cfg = a.tree.config(1);
    let tree = m.timed("build", || build_tree(data.build_input(), &cfg))?;
    let tree_purity = leaf_purity(&tree.leaf_assignment(), labels)?;
    let n = data.n();
    let (mean_visits, flat) = match &data.data {
        Data::Vectors(ds) => {
            let start = Instant::now();
            let mut visits = 0usize;
            for x in ds.rows() {
                visits += tree.query(x, 1)?.visited;
            }
            m.record("tree_mean_query", millis_since(start) / n as f64);
            let k = ((tree.num_leaves() as f64).log2().floor() as usize).clamp(1, n);
            let km = m.timed("flat_kmeans", || flat_kmeans(ds, k, a.tree.seed))?;
            let start = Instant::now();
            let assignment: Vec<usize> = ds
                .rows()
                .map(|x| {
                    (0..km.centers.len())
                        .min_by(|&i, &j| sq_dist(x, &km.centers[i]).total_cmp(&sq_dist(x, &km.centers[j])))
                        .expect("k >= 1")
                })
                .collect();
            m.record("flat_mean_assign", millis_since(start) / n as f64);
            let purity = leaf_purity(&assignment, labels)?;
            (Some(visits as f64 / n as f64), Some(FlatSummary { k, purity }))
        }
        Data::Graph(_) => (None, None),
    };
    let summary = PuritySummary {
        tree: TreeSummary::of(&tree),
        tree_purity,
        mean_visits,
        depth_bound: (n.max(1) as f64).ln() / 1.5f64.ln() + 2.0,
        flat,
    };
    emit(&m, &summary, a.out.as_deref())?;
    Ok(true)
}

fn parse_superclass(text: &str) -> Result<BTreeMap<usize, usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (c, s) = pair
                .split_once(':')
                .with_context(|| format!("superclass entry {pair:?} is not class:super"))?;
            Ok((c.trim().parse()?, s.trim().parse()?))
        })
        .collect()
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("threshold {t:?} is not a number"))
        })
        .collect()
}

#[derive(Serialize)]
struct AnomalySummary {
    knn: usize,
    bucket: usize,
    sweep: HoldoutReport,
}

pub fn anomaly(a: &AnomalyArgs) -> Result<bool> {
    let mut m = RunManifest::new("anomaly", a)?;
    m.seed("seed", a.tree.seed);
    let data = a.input.load(&mut m)?;
    let ds = data.vectors()?;
    data.labels()?;
    let spec = HoldoutSpec {
        held_out: a.holdout.clone(),
        superclass: a.superclass.as_deref().map(parse_superclass).transpose()?,
        thresholds: match &a.threshold_grid {
            Some(g) => parse_grid(g)?,
            None => default_thresholds(),
        },
        test_fraction: a.test_fraction,
    };
    let cfg = a.tree.config(a.bucket);
    let sweep = m.timed("holdout", || simulate_holdout(ds, &spec, &cfg, a.knn, a.bucket))?;
    if let Some(path) = &a.out {
        let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# manifest: {}", serde_json::to_string(&m)?)?;
        write_sweep_csv(&sweep.rows, &mut w)?;
        w.flush()?;
    }
    let summary = AnomalySummary {
        knn: a.knn,
        bucket: a.bucket,
        sweep,
    };
    emit(&m, &summary, a.report.as_deref())?;
    Ok(true)
}

#[derive(Serialize)]
struct CheegerSummary {
    #[serde(flatten)]
    check: CheegerReport,
    verdict: &'static str,
}

pub fn cheeger(a: &CheegerArgs) -> Result<bool> {
    let mut m = RunManifest::new("cheeger", a)?;
    m.input(&a.input)?;
    let g = load_edge_list(&a.input).with_context(|| format!("loading graph {}", a.input.display()))?;
    if g.n() > 2000 {
        bail!("graph has {} nodes; the dense eigensolver is limited to 2000", g.n());
    }
    let check = m.timed("check", || cheeger_check(&g))?;
    let verdict = if check.holds { "PASS" } else { "FAIL" };
    eprintln!(
        "lambda2 = {:.6}, gamma(G) = {:.6} ({:?}), {:.6} <= gamma <= {:.6}: {verdict}",
        check.laplacian_lambda2, check.conductance, check.method, check.lower, check.upper
    );
    let holds = check.holds;
    emit(&m, &CheegerSummary { check, verdict }, a.out.as_deref())?;
    Ok(holds)
}
