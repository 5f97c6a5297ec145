use halasz_web::{builtin_names, extremal_theta_json, summatory_json, theorem1_json};
use serde_json::Value;

#[test]
fn summatory_curve_for_liouville() {
    let v: Value = serde_json::from_str(&summatory_json("liouville", 1000, 2.0).unwrap()).unwrap();
    assert_eq!(v["label"], "liouville");
    let pts = v["points"].as_array().unwrap();
    let ten = pts.iter().find(|p| p[0] == 10.0).unwrap();
    assert_eq!(ten[3], 0.0);
    assert_eq!(pts.last().unwrap()[0], 1000.0);
}

#[test]
fn theorem1_curve_for_odd_one() {
    let v: Value =
        serde_json::from_str(&theorem1_json("odd_one", -1, 0.0, 1.01, 1.5, 5, 100_000).unwrap())
            .unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let q = r[1].as_f64().unwrap();
        assert!((1.0..3.0).contains(&q), "{r}");
    }
    assert_eq!(v["zeta_abs"].as_array().unwrap().len(), 5);
}

#[test]
fn extremal_theta_window() {
    let v: Value =
        serde_json::from_str(&extremal_theta_json("power:0.25", 20.0, 3, 10_000).unwrap()).unwrap();
    let theta = v["theta"].as_array().unwrap();
    assert_eq!(theta.first().unwrap()[0], 41.0);
    assert_eq!(theta.last().unwrap()[0], 317.0);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 3);
}

#[test]
fn errors_are_messages() {
    assert!(summatory_json("zeta", 100, 2.0).unwrap_err().contains("valid specs"));
    assert!(summatory_json("one", 1 << 30, 2.0).is_err());
    assert!(theorem1_json("one", 1, 0.0, 0.9, 1.2, 3, 1000).is_err());
    assert!(extremal_theta_json("power:0.7", 20.0, 1, 1000).is_err());
    assert!(builtin_names().contains(&"moebius"));
}
