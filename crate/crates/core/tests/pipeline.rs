use hcpart::dataset::{gen_planted, train_test_split, GmmParams, PlantedParams};
use hcpart::metrics::{classification_report, cost};
use hcpart::tree::{classify, read_tree, write_tree};
use hcpart::{build, BuildConfig, BuildInput, HCTree, Rule, SimilarityView};

#[test]
fn saved_tree_answers_like_the_original() {
    let data = GmmParams::new(800, 5, 12, 8.0, 21).generate().unwrap().dataset;
    let (train_idx, test_idx) = train_test_split(data.n(), 0.25, 21);
    let train = data.subset(&train_idx);
    let test = data.subset(&test_idx);
    let dir = tempfile::tempdir().unwrap();
    for rule in Rule::ALL {
        let cfg = BuildConfig {
            leaf_max: 3,
            ..BuildConfig::new(rule, 21)
        };
        let tree = build(BuildInput::Vectors(&train), &cfg).unwrap();
        let path = dir.path().join(format!("{rule}.json"));
        write_tree(&tree, &path).unwrap();
        let loaded = read_tree(&path).unwrap();
        assert_eq!(loaded, tree);

        let predict = |t: &HCTree| -> Vec<usize> {
            test.rows()
                .map(|x| classify(t, &train, x, 5, 32).unwrap().class)
                .collect()
        };
        let predicted = predict(&loaded);
        assert_eq!(predicted, predict(&tree), "{rule}");
        let report = classification_report(&predicted, test.labels().unwrap()).unwrap();
        assert!(report.macro_f1 > 0.9, "{rule}: macro F1 {}", report.macro_f1);

        let view = SimilarityView::implicit_all(&train);
        assert_eq!(
            cost(&loaded, &view).unwrap().total_cost,
            cost(&tree, &view).unwrap().total_cost
        );
    }
}

#[test]
fn graph_pipeline_separates_planted_blocks() {
    let params = PlantedParams {
        n: 300,
        p: 0.5,
        q: 0.05,
        seed: 8,
    };
    let g = gen_planted(params).unwrap();
    let tree = build(BuildInput::Graph(&g), &BuildConfig::new(Rule::ApproxEigenvector, 8)).unwrap();
    let blocks = params.blocks();
    let left = tree.ids_under(1);
    let in_block0 = left.iter().filter(|&&i| blocks[i] == 0).count();
    let misplaced = in_block0.min(left.len() - in_block0);
    assert!(misplaced <= 15, "{misplaced} points on the wrong side of the root");
    let back = HCTree::from_text(&tree.to_text()).unwrap();
    assert_eq!(back, tree);
    assert!(!back.is_queryable());
}
