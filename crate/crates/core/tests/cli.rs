use std::path::Path;
use std::process::{Command, Output};

use dct_flowgraph::factorizer::{dense_base_plan, kok_plan};
use dct_flowgraph::flowgraph::io::{PlanFile, TransformKind};
use dct_flowgraph::flowgraph::PlanGraph;

fn dctflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dctflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn count_scaled_folded_six() {
    let o = dctflow(&["count", "--n", "6", "--scaled", "--fold"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "mu,alpha,sigma\n1,16,2\n");
}

#[test]
fn count_compare_matches_formula() {
    for n in ["8", "24", "32"] {
        let o = dctflow(&["count", "--n", n, "--scaled", "--fold", "--compare"]);
        assert!(
            stdout(&o).contains("\ndifference,0,0,0\n"),
            "N={n}: {}",
            stdout(&o)
        );
    }
}

#[test]
fn formula_examples() {
    let o = dctflow(&["formula", "--q", "15", "--m", "3", "--scaled"]);
    assert_eq!(stdout(&o), "mu,alpha,sigma\n183,1090,43\n");
    let o = dctflow(&["formula", "--q", "5", "--m", "4", "--pfa-scaled"]);
    assert_eq!(stdout(&o), "fl_mu\n142\n");
    let o = dctflow(&["formula", "--q", "3", "--m", "2", "--pfa-lower"]);
    assert!(stdout(&o).ends_with(",true\n"));
}

#[test]
fn formula_unknown_base_lists_registry() {
    let o = dctflow(&["formula", "--q", "7", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("[2, 3, 4, 5, 8, 15, 16]"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn gen_json_counts() {
    let o = dctflow(&["gen", "--n", "8", "--scaled", "--fold", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let file = PlanFile::from_json(&stdout(&o)).unwrap();
    let c = file.counts.unwrap();
    assert_eq!((c.mu, c.alpha, c.sigma), (5, 29, 0));
    assert_eq!(file.transform, Some(TransformKind::ScaledDct2));
    assert_eq!(file.pi.as_ref().map(Vec::len), Some(8));
}

#[test]
fn gen_dot_terminals() {
    let o = dctflow(&["gen", "--n", "6", "--scaled", "--format", "dot"]);
    let text = stdout(&o);
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches("[shape=box, label=\"x").count(), 6);
    assert_eq!(text.matches("[shape=box, label=\"y").count(), 6);
}

#[test]
fn gen_rejects_bad_lengths() {
    let o = dctflow(&["gen", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = dctflow(&["gen", "--n", "14"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("q*2^m for q in [1, 3, 5, 15]"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dctflow(&[]).status.code(), Some(2));
    assert_eq!(
        dctflow(&["eval", "--n", "4", "--tol", "0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        dctflow(&["gen", "--n", "4", "--format", "csv"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dctflow(&["gen", "--n", "4", "--scaled", "--transform", "dct4"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn table2_rows() {
    let o = dctflow(&["table2"]);
    let text = stdout(&o);
    assert!(text.starts_with("q,m,N,mu,alpha,sigma,fl_mu\n"));
    assert!(text.contains("\n3,4,48,66,337,16,63\n"));
    assert!(text.contains("\n15,2,60,67,454,23,76\n"));
    assert_eq!(text.lines().count(), 13);
    assert_eq!(text, stdout(&dctflow(&["table2"])));
}

#[test]
fn fig5_rows() {
    let text = stdout(&dctflow(&["fig5"]));
    assert!(text.starts_with("family,N,mu_norm\n"));
    assert!(text.contains("\n2^m,8,0.625\n"));
    let mut families: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    families.dedup();
    assert_eq!(families, ["2^m", "3*2^m", "5*2^m", "15*2^m"]);
}

#[test]
fn eval_seeded_and_explicit() {
    let a = dctflow(&["eval", "--n", "24", "--scaled", "--fold", "--seed", "11"]);
    let b = dctflow(&["eval", "--n", "24", "--scaled", "--fold", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("# prng=chacha8 seed=11\n"));
    let o = dctflow(&["eval", "--n", "2", "--input", "1,-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("\n1,-1,1.414213562373095"),
        "{}",
        stdout(&o)
    );
    let o = dctflow(&["eval", "--n", "3", "--input", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_default_passes() {
    let o = dctflow(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for check in [
        "dct4-factorization",
        "even-odd-split",
        "dct4-transposed-factorization",
        "kok-plan",
    ] {
        assert!(text.contains(&format!("\n{check},64,")), "{check} missing");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_reaches_240() {
    let o = dctflow(&["verify", "--max-n", "240"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\nkok-plan,240,"));
}

fn write_plan(dir: &Path, name: &str, file: &PlanFile) -> String {
    let path = dir.join(name);
    file.write(&path).unwrap();
    path.display().to_string()
}

#[test]
fn verify_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_plan(
        dir.path(),
        "good.json",
        &PlanFile::new(&kok_plan(12).unwrap(), Some(TransformKind::Dct2)),
    );

    // same shape, one sign flipped
    let mut text = PlanFile::new(&kok_plan(12).unwrap(), Some(TransformKind::Dct2)).to_json();
    let at = text.find("\"sign\": 1").unwrap();
    text.replace_range(at..at + 9, "\"sign\": -1");
    let bad = dir.path().join("corrupt.json");
    std::fs::write(&bad, text).unwrap();
    let bad = bad.display().to_string();

    let o = dctflow(&["verify", "--max-n", "8", "--plan", &good]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = dctflow(&["verify", "--max-n", "8", "--plan", &good, "--plan", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL plan ") && stdout(&o).contains("corrupt.json"));

    let missing = dir.path().join("missing.json").display().to_string();
    let o = dctflow(&["verify", "--max-n", "4", "--plan", &missing]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("missing.json"));
}

#[test]
fn custom_base_module() {
    // plain inner products for 3 points: (2,5,2) instead of the stock (1,4,1)
    let dense = dense_base_plan(3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_plan(
        dir.path(),
        "three.json",
        &PlanFile::new(&dense, Some(TransformKind::Dct2)),
    );
    let o = dctflow(&["count", "--n", "6", "--base", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "mu,alpha,sigma\n7,18,5\n");
    let o = dctflow(&["eval", "--n", "12", "--base", &path]);
    assert_eq!(o.status.code(), Some(0));

    // a module that is not a DCT is refused
    let wrong = write_plan(
        dir.path(),
        "wrong.json",
        &PlanFile::new(&PlanGraph::identity(3).unwrap(), Some(TransformKind::Dct2)),
    );
    let o = dctflow(&["count", "--n", "6", "--base", &wrong]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wrong.json"));
}
