mod common;

use common::*;
use ctbn::inference::exact_posterior;
use ctbn::io::{
    model_from_json, model_to_json, read_trajectory, stats_from_json, stats_to_json, structure_from_json,
    structure_to_json, track_to_text, write_trajectory, IoError,
};
use ctbn::learning::collect_stats;
use ctbn::model::{CtbnModel, CtbnStructure, InitialDistribution, NodeSpec};
use ctbn::trajectory::sample_trajectory;
use std::collections::BTreeMap;

#[test]
fn model_round_trip_is_bit_exact() {
    for model in [chain2(), fork3(), cycle(), ring64()] {
        let text = model_to_json(&model);
        let back: CtbnModel<f64> = model_from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(model_to_json(&back), text);
    }
}

#[test]
fn fifteen_digit_decimals_survive() {
    let s = CtbnStructure::new(vec![node("X", 2)], vec![vec![]]).unwrap();
    let m = CtbnModel::with_uniform_initial(s, vec![vec![cim(&[&[0.0, 0.123456789012345], &[98765.4321098765, 0.0]])]])
        .unwrap();
    let text = model_to_json(&m);
    assert!(text.contains("0.123456789012345") && text.contains("98765.4321098765"));
    let back: CtbnModel<f64> = model_from_json(&text).unwrap();
    assert_eq!(back.cim(0, 0).rate(0, 1), 0.123456789012345);
    assert_eq!(back.cim(0, 0).rate(1, 0), 98765.4321098765);
    assert_eq!(model_to_json(&back), text);
}

#[test]
fn joint_initial_and_components_round_trip() {
    let s = CtbnStructure::new(
        vec![
            NodeSpec::with_cardinality("P", 3).unwrap(),
            NodeSpec::with_cardinality("AU", 4).unwrap().with_components(vec!["AU1".into(), "AU2".into()]).unwrap(),
        ],
        vec![vec![1], vec![0]],
    )
    .unwrap();
    let mut rng = ctbn::trajectory::rng_from_seed(1);
    let model = random_model(s, 0.1, 1.0, &mut rng);
    let joint: BTreeMap<Vec<usize>, f64> = [(vec![0, 0], 0.75), (vec![2, 3], 0.25)].into_iter().collect();
    let model = model.with_initial(InitialDistribution::Joint(joint)).unwrap();
    let text = model_to_json(&model);
    let back: CtbnModel<f64> = model_from_json(&text).unwrap();
    assert_eq!(back, model);
    assert_eq!(structure_from_json(&structure_to_json(model.structure())).unwrap(), *model.structure());
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = model_to_json(&chain2());
    let broken = text.replacen("\"rates\"", "\"rates\" oops", 1);
    match model_from_json::<f64>(&broken) {
        Err(IoError::Json { line, .. }) => {
            let want = text.lines().position(|l| l.contains("\"rates\"")).unwrap() + 1;
            assert_eq!(line, want);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_cim_is_rejected() {
    let text = model_to_json(&chain2()).replacen("1.0", "-1.0", 1);
    assert!(model_from_json::<f64>(&text).is_err());
}

#[test]
fn trajectory_round_trip_is_byte_stable() {
    let model = fork3();
    for seed in 0..5 {
        let traj = sample_trajectory(&model, 3.7, seed);
        let text = write_trajectory(&traj, model.structure()).unwrap();
        let back = read_trajectory::<f64>(&text, model.structure()).unwrap();
        assert_eq!(write_trajectory(&back, model.structure()).unwrap(), text);
        assert!(text.starts_with("horizon,3.7\n"));
    }
}

#[test]
fn trajectory_parser_rejects_gaps_and_overlaps() {
    let s = chain2().structure().clone();
    let gap = "horizon,2\nX,0,0,1\nX,1,1.5,2\n";
    assert!(matches!(read_trajectory::<f64>(gap, &s), Err(IoError::Parse { line: 3, .. })));
    let overlap = "horizon,2\nX,0,0,1.2\nX,1,1,2\n";
    assert!(matches!(read_trajectory::<f64>(overlap, &s), Err(IoError::Parse { line: 3, .. })));
    let short = "horizon,2\nX,0,0,1.5\n";
    assert!(matches!(read_trajectory::<f64>(short, &s), Err(IoError::Parse { line: 2, .. })));
    let unknown = "horizon,2\nZ,0,0,2\n";
    assert!(matches!(read_trajectory::<f64>(unknown, &s), Err(IoError::Parse { line: 2, .. })));
    let ok = "horizon,2\nX,0,0,1\nX,1,1,2\nY,1,0,2\n";
    assert_eq!(read_trajectory::<f64>(ok, &s).unwrap().tracks().len(), 2);
}

#[test]
fn stats_round_trip() {
    let model = cycle();
    let data: Vec<_> = (0..4).map(|k| sample_trajectory(&model, 5.0, k)).collect();
    let stats = collect_stats(model.structure(), &data).unwrap();
    let text = stats_to_json(model.structure(), &stats);
    let back = stats_from_json::<f64>(model.structure(), &text).unwrap();
    assert_eq!(back, stats);
    assert_eq!(stats_to_json(model.structure(), &back), text);
}

#[test]
fn posterior_track_export_is_columnar() {
    let model = chain2();
    let ev = sampled_evidence(&model, 1.0, 2, &["Y"]);
    let post = exact_posterior(&model, &ev, &[0.25, 0.75]).unwrap();
    let text = track_to_text(&post);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "time,X=0,X=1");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.25,"));
    assert_eq!(text, track_to_text(&post));
}
