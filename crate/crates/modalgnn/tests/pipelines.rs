//! End-to-end integration of the translation, execution, extraction, game,
//! and verification layers: every compiler is held against the model
//! checker, rewrites and serialization are checked at the verdict level,
//! extraction is run on handwritten networks, and game-synthesized formulas
//! are replayed through compiled networks.

use modalgnn::compile::{
    compile_afml_sigmoid, compile_afml_trrelu, compile_gml_sum, compile_ml_irrational,
    compile_ml_max, compile_rml_bounded, compile_rml_step, trrelu_to_relu,
};
use modalgnn::extract::{extract_gml, extract_ml, extract_rml};
use modalgnn::games::{distinguishing_formula, solve_game, GameConfig, GameKind, Winner};
use modalgnn::gnn::{Activation, Aggregation, Classifier, Gnn, Layer, ThresholdRel};
use modalgnn::graph::Graph;
use modalgnn::logic::check::check_at_point;
use modalgnn::logic::parse::parse;
use modalgnn::logic::Formula;
use modalgnn::scalar::{rat, QuadExt};
use modalgnn::verify::{equiv_exhaustive, EquivSide};
use num::rational::BigRational;

fn alpha1() -> Vec<String> {
    vec!["P".to_string()]
}

fn alpha2() -> Vec<String> {
    vec!["P".to_string(), "Q".to_string()]
}

/// A root pointing at `p` successors labeled P and `plain` unlabeled ones.
fn star(p: usize, plain: usize) -> Graph {
    let mut g = Graph::new(["P"]).unwrap();
    g.add_vertex("r").unwrap();
    for i in 0..p {
        let v = g.add_vertex(format!("p{i}")).unwrap();
        g.add_edge(0, v).unwrap();
        g.add_label(v, "P").unwrap();
    }
    for i in 0..plain {
        let v = g.add_vertex(format!("q{i}")).unwrap();
        g.add_edge(0, v).unwrap();
    }
    g.set_point(Some(0));
    g
}

fn assert_equivalent<S: modalgnn::scalar::Scalar>(
    net: &Gnn<S>,
    f: &Formula,
    alphabet: &[String],
    what: &str,
) {
    let verdict = equiv_exhaustive(EquivSide::Net(net), EquivSide::Formula(f), alphabet, 2)
        .unwrap_or_else(|e| panic!("{what}: {e}"));
    assert!(
        verdict.is_equivalent(),
        "{what}: {:?}",
        verdict.status
    );
}

#[test]
fn every_compiler_agrees_with_the_model_checker_on_small_graphs() {
    for text in ["<>P", "[](P | <>Q)", "<>(P & !Q) | Q"] {
        let f = parse(text).unwrap();
        let net = compile_ml_max(&f, &alpha2()).unwrap();
        assert_equivalent(&net, &f, &alpha2(), text);
    }
    for text in ["<>{>=2}P", "<>{=1}Q", "<>{>=1}(P & Q) | <>{>=3}true"] {
        let f = parse(text).unwrap();
        let net = compile_gml_sum(&f, &alpha2()).unwrap();
        assert_equivalent(&net, &f, &alpha2(), text);
    }
    for text in ["<>{>1/2}P", "<>{>=1/3}Q", "!<>{>0/1}P & <>{=1/2}Q"] {
        let f = parse(text).unwrap();
        let step = compile_rml_step(&f, &alpha2()).unwrap();
        assert_equivalent(&step, &f, &alpha2(), text);
        let bounded = compile_rml_bounded(&f, &alpha2(), 2).unwrap();
        assert_equivalent(&bounded, &f, &alpha2(), text);
    }
    for text in ["<>(P & <>Q)", "P | <>true", "[](P | []Q)", "[]false"] {
        let f = parse(text).unwrap();
        let net = compile_afml_trrelu(&f, &alpha2()).unwrap();
        assert_equivalent(&net, &f, &alpha2(), text);
    }
    for text in ["<>P", "<>!P", "[](P | <>!P)"] {
        let f = parse(text).unwrap();
        let net: Gnn<QuadExt> = compile_ml_irrational(&f, &alpha1()).unwrap();
        assert_equivalent(&net, &f, &alpha1(), text);
    }
    // The logistic compiler is exact on literals, disjunctions, and
    // diamonds; conjunction margins are where double precision gives out.
    for text in ["<>P", "P | <>Q", "<>(P | Q)"] {
        let f = parse(text).unwrap();
        let net: Gnn<f64> = compile_afml_sigmoid(&f, &alpha2()).unwrap();
        assert_equivalent(&net, &f, &alpha2(), text);
    }
}

#[test]
fn rewriting_truncations_to_relu_pairs_preserves_every_verdict() {
    for text in ["<>{>=2}P | <>{=1}Q", "<>{>=1}(P | Q)"] {
        let f = parse(text).unwrap();
        let net = compile_gml_sum(&f, &alpha2()).unwrap();
        let rewritten = trrelu_to_relu(&net).unwrap();
        let verdict = equiv_exhaustive(
            EquivSide::Net(&net),
            EquivSide::Net(&rewritten),
            &alpha2(),
            2,
        )
        .unwrap();
        assert!(verdict.is_equivalent(), "{text}: {:?}", verdict.status);
    }
    let f = parse("<>(P & <>Q)").unwrap();
    let net = compile_afml_trrelu(&f, &alpha2()).unwrap();
    let rewritten = trrelu_to_relu(&net).unwrap();
    assert_equivalent(&rewritten, &f, &alpha2(), "rewritten alternation-free net");
}

#[test]
fn formulas_extracted_from_handwritten_networks_hold_their_meaning() {
    // Mean: the fraction of P-successors, accepted from 1/2 up.
    let mean_net = Gnn {
        input_dim: 1,
        layers: vec![Layer::simple(
            Aggregation::Mean,
            vec![vec![rat(0, 1)]],
            vec![vec![rat(1, 1)]],
            vec![rat(0, 1)],
            Activation::TrRelu,
        )],
        cls: Classifier::Threshold {
            index: 1,
            rel: ThresholdRel::Geq,
            c: rat(1, 2),
        },
    };
    let f = extract_rml(&mean_net, &alpha1(), 2).unwrap();
    assert!(f.analyze().in_rml, "{f} is not a ratio formula");
    assert_equivalent(&mean_net, &f, &alpha1(), "mean fraction net");

    // Sum: the number of P-successors beyond the first, accepted from 1 up.
    let sum_net = Gnn {
        input_dim: 1,
        layers: vec![Layer::simple(
            Aggregation::Sum,
            vec![vec![rat(0, 1)]],
            vec![vec![rat(1, 1)]],
            vec![rat(-1, 1)],
            Activation::TrRelu,
        )],
        cls: Classifier::Threshold {
            index: 1,
            rel: ThresholdRel::Geq,
            c: rat(1, 1),
        },
    };
    let f = extract_gml(&sum_net, &alpha1(), 2).unwrap();
    assert!(f.analyze().in_gml, "{f} is not a graded formula");
    assert_equivalent(&sum_net, &f, &alpha1(), "sum counting net");

    // Max: the strongest P-successor, accepted when one exists.
    let max_net = Gnn {
        input_dim: 1,
        layers: vec![Layer::simple(
            Aggregation::Max,
            vec![vec![rat(0, 1)]],
            vec![vec![rat(1, 1)]],
            vec![rat(0, 1)],
            Activation::Identity,
        )],
        cls: Classifier::Threshold {
            index: 1,
            rel: ThresholdRel::Gt,
            c: rat(0, 1),
        },
    };
    let f = extract_ml(&max_net, &alpha1()).unwrap();
    assert!(f.analyze().in_ml, "{f} is not a basic modal formula");
    assert_equivalent(&max_net, &f, &alpha1(), "max existence net");
}

#[test]
fn networks_survive_their_json_round_trip_with_verdicts_intact() {
    let f = parse("<>{>=2}P | <>{=1}Q").unwrap();
    let net = compile_gml_sum(&f, &alpha2()).unwrap();
    let text = net.to_json_string();
    assert_eq!(
        modalgnn::gnn::peek_scalar_kind(&text).unwrap(),
        "rational"
    );
    let back = Gnn::<BigRational>::from_json_str(&text).unwrap();
    assert_eq!(back, net);
    assert_equivalent(&back, &f, &alpha2(), "deserialized counting net");
}

#[test]
fn spoiler_victories_synthesize_formulas_their_compiled_networks_confirm() {
    // Modal game: a P-successor exists on one side only.
    let with_leaf = star(1, 0);
    let bare = star(0, 0);
    let cfg = GameConfig {
        kind: GameKind::Ml,
        rounds: 1,
        side1: &with_leaf,
        side2: &bare,
    };
    assert_eq!(solve_game(cfg).unwrap().winner, Winner::Spoiler);
    let f = distinguishing_formula(cfg).unwrap().expect("Spoiler wins");
    assert!(f.analyze().in_ml);
    assert!(check_at_point(&with_leaf, &f).unwrap());
    assert!(!check_at_point(&bare, &f).unwrap());
    let net = compile_ml_max(&f, &alpha1()).unwrap();
    assert!(net.accepts_pointed(&with_leaf, None).unwrap());
    assert!(!net.accepts_pointed(&bare, None).unwrap());

    // Graded game with bound 2: two P-successors versus one.
    let two = star(2, 0);
    let one = star(1, 0);
    let cfg = GameConfig {
        kind: GameKind::Gml(2),
        rounds: 1,
        side1: &two,
        side2: &one,
    };
    assert_eq!(solve_game(cfg).unwrap().winner, Winner::Spoiler);
    let f = distinguishing_formula(cfg).unwrap().expect("Spoiler wins");
    let report = f.analyze();
    assert!(report.in_gml && report.max_count <= 2);
    assert!(check_at_point(&two, &f).unwrap());
    assert!(!check_at_point(&one, &f).unwrap());
    let net = compile_gml_sum(&f, &alpha1()).unwrap();
    assert!(net.accepts_pointed(&two, None).unwrap());
    assert!(!net.accepts_pointed(&one, None).unwrap());

    // Diamond-fragment game: Spoiler explores side 1 only.
    let labeled = star(1, 0);
    let plain = star(0, 1);
    let cfg = GameConfig {
        kind: GameKind::Afml1,
        rounds: 1,
        side1: &labeled,
        side2: &plain,
    };
    assert_eq!(solve_game(cfg).unwrap().winner, Winner::Spoiler);
    let f = distinguishing_formula(cfg).unwrap().expect("Spoiler wins");
    assert!(f.analyze().in_afml1);
    assert!(check_at_point(&labeled, &f).unwrap());
    assert!(!check_at_point(&plain, &f).unwrap());
    let net = compile_afml_trrelu(&f, &alpha1()).unwrap();
    assert!(net.accepts_pointed(&labeled, None).unwrap());
    assert!(!net.accepts_pointed(&plain, None).unwrap());
}
