use coniso_core::cmc::foliate;
use coniso_core::io::{FieldSpec, LeafRecord, LinkSpec, MetricSpec, PerturbationSpec};
use coniso_core::Error;
use proptest::prelude::*;

fn field_spec() -> impl Strategy<Value = FieldSpec> {
    prop::collection::vec((0usize..4, -1.0..1.0f64), 0..5).prop_map(|raw| FieldSpec {
        degree: 4,
        coefficients: raw
            .into_iter()
            .map(|(l, c)| (l, (l as i64) / 2, c))
            .collect(),
    })
}

fn metric_spec() -> impl Strategy<Value = MetricSpec> {
    (0.5..1.0f64, 0.5..2.0f64, 0.05..0.2f64, 0.5..2.0f64, field_spec(), any::<bool>()).prop_map(
        |(radius, tau, amplitude, r_min, field, log)| MetricSpec {
            link: LinkSpec::ScaledSphere { dim: 2, radius },
            r_min,
            r_max: 100.0 * r_min,
            alpha: Some(if log {
                PerturbationSpec::PowerLog {
                    tau,
                    amplitude,
                    field: Some(field),
                }
            } else {
                PerturbationSpec::Power {
                    tau,
                    amplitude,
                    field: Some(field),
                }
            }),
            beta: None,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_spec_json_round_trip(spec in metric_spec()) {
        let text = serde_json::to_string_pretty(&spec).unwrap();
        prop_assert_eq!(MetricSpec::from_json(&text).unwrap(), spec);
    }
}

#[test]
fn unknown_keys_and_kinds_are_parse_errors() {
    let bad_key = r#"{"link": {"kind": "scaled_sphere", "dim": 2, "radius": 1.0},
                      "r_min": 1.0, "r_max": 2.0, "gamma": 3}"#;
    assert!(matches!(MetricSpec::from_json(bad_key), Err(Error::Parse(_))));
    let bad_kind = r#"{"link": {"kind": "torus"}, "r_min": 1.0, "r_max": 2.0}"#;
    assert!(matches!(MetricSpec::from_json(bad_kind), Err(Error::Parse(_))));
}

#[test]
fn invalid_values_fail_at_build() {
    let text = r#"{"link": {"kind": "scaled_sphere", "dim": 2, "radius": -1.0},
                   "r_min": 1.0, "r_max": 2.0}"#;
    assert!(MetricSpec::from_json(text).unwrap().build().is_err());
}

#[test]
fn leaf_record_reproduces_the_graph() {
    let text = r#"{"link": {"kind": "scaled_sphere", "dim": 2, "radius": 0.8},
                   "r_min": 1.0, "r_max": 100.0,
                   "alpha": {"profile": "power", "tau": 1.0, "amplitude": 0.1,
                             "field": {"degree": 1, "coefficients": [[1, 0, 1.0]]}}}"#;
    let metric = MetricSpec::from_json(text).unwrap().build().unwrap();
    let v = metric.ball_volume(6.0).unwrap();
    let f = foliate(&metric, &[v]).unwrap();
    let record = LeafRecord::from_leaf(&f.leaves[0]);
    let back: LeafRecord = serde_json::from_str(&serde_json::to_string(&record).unwrap()).unwrap();
    assert_eq!(back, record);
    assert_eq!(back.graph().unwrap(), f.leaves[0].graph);
}
