use decoupling_wasm_demo::{coherent_information_curve_json, decoupling_sweep_json, typicality_report_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn erasure_curve_is_linear() {
    let v = parse(coherent_information_curve_json("erasure", 2, 5).unwrap());
    let p = v["p"].as_array().unwrap();
    let ic = v["coherent_information"].as_array().unwrap();
    assert_eq!(p.len(), 5);
    for (p, ic) in p.iter().zip(ic) {
        assert!((ic.as_f64().unwrap() - (1.0 - 2.0 * p.as_f64().unwrap())).abs() < 1e-10);
    }
}

#[test]
fn qubit_only_channels_ignore_dimension() {
    let v = parse(coherent_information_curve_json("dephasing", 5, 3).unwrap());
    assert_eq!(v["d"], 2);
    assert!((v["coherent_information"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_ends_at_full_code() {
    let v = parse(decoupling_sweep_json(4, 2, 50, 1).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 4);
    // |R| = 1 is always decoupled
    assert!(pts[0]["exact_hs"].as_f64().unwrap().abs() < 1e-12);
    for pt in pts {
        assert!(pt["exact_hs"].as_f64().unwrap() <= v["purity"].as_f64().unwrap() + 1e-12);
    }
    assert_eq!(decoupling_sweep_json(4, 2, 50, 1).unwrap(), decoupling_sweep_json(4, 2, 50, 1).unwrap());
}

#[test]
fn typicality_report_lists_bounds() {
    let v = parse(typicality_report_json("dephasing", 0.2, 4, 0.3).unwrap());
    let names: Vec<&str> = v["bounds"].as_array().unwrap().iter().map(|b| b["name"].as_str().unwrap()).collect();
    for n in ["typ1_env_dim", "typ2_purity_cprime", "typ3_trace_distance", "dimension"] {
        assert!(names.contains(&n));
    }
}

#[test]
fn bad_inputs_are_errors() {
    assert!(coherent_information_curve_json("nonsense", 2, 5).is_err());
    assert!(coherent_information_curve_json("erasure", 2, 1).is_err());
    assert!(decoupling_sweep_json(9, 2, 50, 1).is_err());
    assert!(typicality_report_json("dephasing", 0.2, 9, 0.3).is_err());
    assert!(typicality_report_json("dephasing", 1.5, 2, 0.3).is_err());
}
