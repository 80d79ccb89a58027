use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn esing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esing")).args(args).output().unwrap()
}

fn esing_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_esing"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

/// Every object in `v` has its keys in sorted order.
fn keys_sorted(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let keys: Vec<&String> = m.keys().collect();
            keys.windows(2).all(|w| w[0] < w[1]) && m.values().all(keys_sorted)
        }
        Value::Array(a) => a.iter().all(keys_sorted),
        _ => true,
    }
}

#[test]
fn invariants_of_the_cusp() {
    let f = spec_file("p=0; f = y^2 - x^3\n");
    let o = esing(&["invariants", "--json", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["result"]["delta"], 1);
    assert_eq!(v["result"]["mult_sequence"], serde_json::json!([2, 1, 1]));
    // raw text is key-sorted too
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.find("\"command\"").unwrap() < text.find("\"result\"").unwrap());
    assert!(text.find("\"result\"").unwrap() < text.find("\"spec\"").unwrap());
}

#[test]
fn tangent_ladder_of_the_two_p_curve() {
    let o = esing_stdin(&["tangent", "--json", "-"], "p=2; f = y^4 + x^5 + x^2*y^3");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["ladder"], serde_json::json!([0, 1, 1, 0]));
}

#[test]
fn stratum_equations_of_the_two_p_curve() {
    let o = esing_stdin(&["stratum", "--json", "-"], "p=3; f = y^6 + x^7 + x^3*y^4");
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let eqs: Vec<&str> = v["result"]["equations"].as_array().unwrap().iter().map(|e| e.as_str().unwrap()).collect();
    assert!(eqs.contains(&"u_6_0 - u_3_3^2"), "{eqs:?}");
    assert!(eqs.contains(&"u_0_1"));
    assert!(!eqs.contains(&"u_2_5"));
    assert_eq!(v["result"]["dim_wes"], 3);
}

#[test]
fn pdeg_flag_controls_the_closure_equation() {
    let spec = "p=2; f = y^4 + x^6 + x^7";
    let closure = "u_5_1^2 + u_3_3^2*u_4_0";
    for (d, present) in [("2", false), ("3", true)] {
        let o = esing_stdin(&["stratum", "--json", "--pdeg", d, "-"], spec);
        let v = json(&o);
        let eqs = v["result"]["equations"].as_array().unwrap();
        assert_eq!(eqs.iter().any(|e| e == closure), present, "D_max {d}: {eqs:?}");
    }
}

#[test]
fn exit_codes() {
    let o = esing_stdin(&["resolve", "-"], "p=3\nf = y^2 - * x^3\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("line 2, column 11"));
    let o = esing_stdin(&["resolve", "--json", "-"], "p=6; f = x*y");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["code"], "UnsupportedCharacteristic");
    let o = esing_stdin(&["stratum", "--json", "--pdeg", "0", "-"], "p=3; f = y^2 - x^3");
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["error"]["code"], "TruncationTooCoarse");
    // a report with a failing section keeps the other sections
    let o = esing_stdin(&["report", "--json", "--pdeg", "0", "-"], "p=3; f = y^2 - x^3");
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["result"]["invariants"]["delta"], 1);
    assert_eq!(v["result"]["stratum"]["error"]["code"], "TruncationTooCoarse");
    let o = esing(&["report", "/nonexistent/spec"]);
    assert_eq!(o.status.code(), Some(1));
    let o = esing(&["report"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn error_fixtures_report_their_codes() {
    let o = esing(&["report", "--json", "--corpus", "errors"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    let got: Vec<String> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let e = r.get("error").or_else(|| r["result"]["stratum"].get("error")).unwrap();
            e["code"].as_str().unwrap().to_string()
        })
        .collect();
    let expect: Vec<String> = esing::corpus::error_fixtures().iter().map(|(_, c)| c.to_string()).collect();
    assert_eq!(got, expect);
}

#[test]
fn reports_are_key_sorted_and_independent_of_jobs() {
    let one = esing(&["report", "--json", "--corpus", "ade", "--jobs", "1"]);
    let four = esing(&["report", "--json", "--corpus", "ade", "--jobs", "4", "--seed", "7"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let v = json(&one);
    assert!(keys_sorted(&v));
    for r in v.as_array().unwrap() {
        assert_eq!(r["result"]["consistent"], true, "{}", r["name"]);
    }
}

#[test]
fn text_output_and_multiple_files() {
    let a = spec_file("p=0; f = x*y");
    let b = spec_file("p=5; branches = [(t^2, t^3)]");
    let o = esing(&["invariants", a.path().to_str().unwrap(), b.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("result.delta: 1").count(), 2, "{text}");
    assert!(text.contains("result.mult_sequence: [2,1,1]"));
}

#[test]
fn max_ext_limits_field_extensions() {
    // y^2 - 2x^2 needs F_25 over F_5
    let o = esing_stdin(&["resolve", "--json", "--max-ext", "1", "-"], "p=5; f = y^2 - 2*x^2");
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["error"]["code"], "FieldExtensionLimit");
    let o = esing_stdin(&["resolve", "--json", "-"], "p=5; f = y^2 - 2*x^2");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["result"]["field"], "F_{5^2}");
}
