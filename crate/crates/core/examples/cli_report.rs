// Drives the command-line front end in-process and reads back its JSON.

pub fn run_example() {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = calabi::cli::run(
        ["calabi", "invariants", "q:1,1:2", "--random", "3", "--seed", "1"],
        &mut out,
        &mut err,
    );
    let report: serde_json::Value = serde_json::from_slice(&out).unwrap();
    println!("exit {code}");
    for r in report["records"].as_array().unwrap() {
        println!("J = {}  case {}", r["pick"], r["case"]);
    }
    assert_eq!(code, 0);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
