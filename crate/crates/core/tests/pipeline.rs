use soc_sentinel::dataset::{Dataset, DegeneratePolicy, Normalizer, Role};
use soc_sentinel::network::{Network, Topology};
use soc_sentinel::persist::Model;
use soc_sentinel::sentinel::{compare_scenarios, evaluate_scenario, render_report, Scenario};
use soc_sentinel::tamper::{inject, AttackMode, AttackSpec, CycleWindow};
use soc_sentinel::trainer::{predict_series, train_model, TrainConfig};
use soc_sentinel::Error;

fn load(name: &str, id: &str, role: Role) -> Dataset {
    Dataset::load(
        format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR")),
        id,
        role,
    )
    .unwrap()
}

#[test]
fn seed_42_forward_regression() {
    let train = load("battery_31393.csv", "31393", Role::Training);
    let n = Normalizer::fit_with(&train, DegeneratePolicy::UnitSpan).unwrap();
    let x = n.normalize(&train.records()[0]).features;
    let y = Network::init(Topology::default(), 42).predict(&x).unwrap();
    assert_eq!(y.to_bits(), 0x3fe462cc28dbd2b2, "{y}");
}

#[test]
fn scenarios_from_one_trained_model() {
    let train = load("battery_31393.csv", "31393", Role::Training);
    let victim = load("battery_p009.csv", "P009", Role::Testing);
    let source = load("battery_p016.csv", "P016", Role::AttackSource);
    let (model, _) = train_model(&train, Topology::default(), &TrainConfig::default()).unwrap();

    let eval = |data: &Dataset, s| {
        evaluate_scenario(&model.network, &model.normalizer, data, s, 20, 5.0).unwrap()
    };
    let normal = eval(&victim, Scenario::Normal);
    let mut reports = vec![normal.clone()];
    for (mode, scenario) in [
        (AttackMode::Case1FullSubstitution, Scenario::Case1),
        (AttackMode::Case2LabelSubstitution, Scenario::Case2),
    ] {
        let spec = AttackSpec::new(mode, CycleWindow::default(), source.clone()).unwrap();
        let tampered = inject(&victim, &spec).unwrap();
        let attacked = compare_scenarios(&normal, &eval(&tampered, scenario)).unwrap();
        let mapd = attacked.mapd_vs_normal_percent.unwrap();
        match scenario {
            // same inputs, so the same predictions
            Scenario::Case2 => assert_eq!(mapd, 0.0),
            _ => assert!(mapd > 0.0),
        }
        assert_eq!(attacked.alarm, attacked.mape_percent > 5.0);
        reports.push(attacked);
    }
    assert_eq!(
        compare_scenarios(&normal, &normal)
            .unwrap()
            .mapd_vs_normal_percent,
        Some(0.0)
    );

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(render_report(&reports, dir.path()).unwrap().len(), 4);
}

#[test]
fn window_errors() {
    let train = load("battery_31393.csv", "31393", Role::Training);
    let victim = load("battery_p009.csv", "P009", Role::Testing);
    let (model, _) = train_model(&train, Topology::default(), &TrainConfig::default()).unwrap();
    let eval = |w| {
        evaluate_scenario(
            &model.network,
            &model.normalizer,
            &victim,
            Scenario::Normal,
            w,
            5.0,
        )
    };
    assert!(matches!(
        eval(21),
        Err(Error::Window {
            requested: 21,
            available: 20
        })
    ));
    assert!(matches!(eval(0), Err(Error::EmptyWindow)));
    assert_eq!(eval(5).unwrap().predicted.len(), 5);
}

#[test]
fn reloaded_model_predicts_identically() {
    let train = load("battery_31393.csv", "31393", Role::Training);
    let victim = load("battery_p009.csv", "P009", Role::Testing);
    let (model, _) = train_model(&train, Topology::default(), &TrainConfig::default()).unwrap();
    let reloaded = Model::from_text(&model.to_text()).unwrap();
    assert_eq!(
        predict_series(&model.network, &victim, &model.normalizer).unwrap(),
        predict_series(&reloaded.network, &victim, &reloaded.normalizer).unwrap()
    );
}
