use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nullkit")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn catalog_list_and_show() {
    let o = run(&["catalog", "list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    for want in ["minkowski4", "ppwave4", "schwarzschild", "kundt4", "warped4"] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
    let o = run(&["catalog", "show", "ppwave4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("coords = u v x y"));
}

#[test]
fn classify_ppwave_is_type_n() {
    let o = run(&["--metric", "ppwave4", "classify"]);
    assert_eq!(code(&o), 0);
    let line = stdout(&o).lines().find(|l| l.starts_with("C ")).unwrap().to_string();
    assert!(line.contains("bo = -2"), "{line}");
}

#[test]
fn json_is_valid_and_deterministic() {
    let args = ["--metric", "ppwave4", "--points", "2", "--json", "verify", "--suite", "Weyl-N"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v[0]["suite"], "Weyl-N");
    assert_eq!(v[0]["metric"], "ppwave4");

    let o = run(&["--metric", "kundt4", "--json", "congruence"]);
    assert_eq!(code(&o), 0);
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
}

#[test]
fn bracket_on_weyl() {
    let o = run(&["--metric", "ppwave4", "bracket", "--T", "C", "--Q", "0,2,0,2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with('['));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&["bogus"])), 2);
    assert_eq!(code(&run(&["--metric", "nosuch", "classify"])), 2);
    assert_eq!(code(&run(&["--metric", "schwarzschild", "--point", "r=3", "classify"])), 2);
    // weight -4 is below -bo(C) - 1
    assert_eq!(code(&run(&["--metric", "ppwave4", "bracket", "--T", "C", "--Q", "1,1,1,1"])), 2);
    assert_eq!(code(&run(&["--metric", "ppwave4", "bracket", "--T", "C", "--Q", "0,2"])), 2);
    assert_eq!(code(&run(&["--metric", "ppwave4", "verify", "--suite", "nope"])), 2);
}

#[test]
fn domain_errors_exit_3() {
    let o = run(&["--metric", "schwarzschild", "--point", "t=0,r=0,th=1,ph=0", "classify"]);
    assert_eq!(code(&o), 3);
    let o = run(&["--metric", "ppwave4", "--k", "1,0,0,0", "classify"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn metric_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("nullkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("pp.metric");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "dim = 4\ncoords = u v x y\ng[0][0] = x^2 - y^2\ng[0][1] = 1\ng[2][2] = 1\ng[3][3] = 1").unwrap();
    drop(f);
    let p = path.to_str().unwrap();
    let from_file = run(&["--metric", p, "--point", "u=0,v=0,x=1,y=1", "--k", "0,1,0,0", "classify"]);
    let from_catalog = run(&["--metric", "ppwave4", "classify"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, from_catalog.stdout);

    let bad = dir.join("bad.metric");
    std::fs::write(&bad, "dim = 2\ncoords = t x\ng[0][0] = -1 +\n").unwrap();
    assert_eq!(code(&run(&["--metric", bad.to_str().unwrap(), "--k", "1,1", "classify"])), 2);
    std::fs::remove_dir_all(&dir).ok();
}
