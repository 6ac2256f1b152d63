use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oracle-lab"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("oracle-lab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

#[test]
fn trace_of_single_node_tree() {
    let dir = scratch("trace");
    let f = dir.join("x.txt");
    std::fs::write(&f, "(X a)\n").unwrap();
    let (code, out, _) = run(bin().args(["oracle-trace", "--strategy", "top-down"]).arg(&f));
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "step\ttransition\tstack\ti\tloss\tU\tfc\tfa\tooo");
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("3\tRE\tX[0,1]\t1\t0"));
}

#[test]
fn strategy_is_required() {
    let (code, _, err) = run(bin().args(["oracle-trace", "missing.txt"]));
    assert_eq!(code, 2);
    assert!(err.contains("--strategy"));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = scratch("bad");
    let f = dir.join("bad.txt");
    std::fs::write(&f, "(S a)\n(S (NP b)\n").unwrap();
    let (code, _, err) = run(bin().args(["oracle-trace", "--strategy", "in-order"]).arg(&f));
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn deep_unary_chain_is_rejected() {
    let dir = scratch("deep");
    let f = dir.join("deep.txt");
    std::fs::write(&f, "(A (A (A (A (A (A (A (A (A x)))))))))\n").unwrap();
    let (code, _, err) = run(bin().args(["train", "--strategy", "top-down", "--out"]).arg(dir.join("m")).arg(&f));
    assert_eq!(code, 2);
    assert!(err.contains("cap is 8"), "{err}");
}

#[test]
fn check_generated_corpus() {
    let (code, out, _) = run(bin().args(["check", "--strategy", "top-down", "--generate", "10", "--max-tokens", "4"]));
    assert_eq!(code, 0);
    assert!(out.contains("mismatches\t0") && out.ends_with("result\tpass\n"));
}

#[test]
fn pipeline_is_deterministic() {
    let dir = scratch("pipeline");
    let corpus = dir.join("corpus.txt");
    let gen = |out: &PathBuf| run(bin().args(["gen", "--count", "15", "--max-tokens", "7", "--seed", "4", "--out"]).arg(out));
    assert_eq!(gen(&corpus).0, 0);
    let again = dir.join("corpus2.txt");
    gen(&again);
    assert_eq!(std::fs::read(&corpus).unwrap(), std::fs::read(&again).unwrap());

    let mut preds = Vec::new();
    for p in ["0", "0.1"] {
        let model = dir.join(format!("model-{p}.txt"));
        let pred = dir.join(format!("pred-{p}.txt"));
        let (code, _, _) = run(bin()
            .args(["train", "--strategy", "in-order", "--explore-p", p, "--epochs", "3", "--seed", "1", "--out"])
            .arg(&model)
            .arg(&corpus));
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&model).unwrap();
        assert!(text.starts_with("oracle-lab-model v1 in-order\nlabels: "));
        let (code, _, _) = run(bin().args(["parse", "--strategy", "in-order", "--out"]).arg(&pred).arg(&model).arg(&corpus));
        assert_eq!(code, 0);
        preds.push(pred);
    }
    let (code, out, _) = run(bin().arg("eval").arg(&corpus).args(&preds));
    assert_eq!(code, 0);
    assert_eq!(out.matches("arity-5+").count(), 2);
    let (code, tsv, _) = run(bin().args(["eval", "--tsv"]).arg(&corpus).arg(&preds[0]));
    assert_eq!(code, 0);
    assert!(tsv.starts_with("scope\tP\tR\tF1\tmatched\tpredicted\tgold\nall\t"));
}

#[test]
fn eval_rejects_mismatched_corpora() {
    let dir = scratch("eval");
    let g = dir.join("g.txt");
    let p = dir.join("p.txt");
    std::fs::write(&g, "(S a b)\n(S c d)\n").unwrap();
    std::fs::write(&p, "(S a b)\n(S c e)\n").unwrap();
    let (code, _, err) = run(bin().arg("eval").arg(&g).arg(&p));
    assert_eq!(code, 2);
    assert!(err.contains("sentence 1"), "{err}");
}

#[test]
fn parse_with_wrong_strategy_fails() {
    let dir = scratch("strategy");
    let corpus = dir.join("c.txt");
    std::fs::write(&corpus, "(S (NP a) (VP b))\n").unwrap();
    let model = dir.join("m.txt");
    run(bin().args(["train", "--strategy", "top-down", "--epochs", "1", "--out"]).arg(&model).arg(&corpus));
    let (code, _, err) = run(bin().args(["parse", "--strategy", "in-order"]).arg(&model).arg(&corpus));
    assert_eq!(code, 2);
    assert!(err.contains("trained for top-down"));
}
