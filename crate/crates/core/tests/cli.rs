use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn cdsnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdsnet"))
        .args(args)
        .env_remove("CDSNET_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn no_clearing_is_infeasible() {
    let o = cdsnet(&["clear", s(&data("no_clearing.json")), "--method", "patterns"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("\"Infeasible\""));
    let o = cdsnet(&["clear", s(&data("no_clearing.json"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_input_pair() {
    let net = data("input_gadget.json");
    assert_eq!(code(&cdsnet(&["verify", s(&net), "0.37 0.37"])), 0);
    assert_eq!(code(&cdsnet(&["verify", s(&net), "0.37 0.5"])), 1);
    assert_eq!(code(&cdsnet(&["verify", s(&net), "0.37 0.5", "--eps", "0.2"])), 0);
}

#[test]
fn nand_self_loop_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (net, map, vec) = (dir.path().join("out.json"), dir.path().join("out.map"), dir.path().join("r.txt"));
    let o = cdsnet(&["compile", "circuit", s(&data("nand_selfloop.json")), "-o", s(&net), "--map", s(&map)]);
    assert_eq!(code(&o), 0);
    let o = cdsnet(&["clear", s(&net), "--method", "approx", "--eps", "0.101", "--save-vector", s(&vec)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = cdsnet(&["decode", s(&net), s(&vec), "--map", s(&map)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("w=⊥\n"), "{out}");
    assert!(out.contains("satisfies circuit: true"));
}

#[test]
fn compiled_files_reparse() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = cdsnet(&[
        "compile",
        "poly",
        s(&data("identity.json")),
        "--mode",
        "hasclearing",
        "--alpha",
        "0.5",
        "-o",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let net = cdsnet::io::parse_network(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(net.is_nondegenerate());
    assert_eq!(net.alpha(), 0.5);

    let o = cdsnet(&["compile", "circuit", s(&data("purify_chain.json")), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    let net = cdsnet::io::parse_network(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(net.is_nondegenerate());
}

#[test]
fn rooted_hasclearing_instance_clears() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let poly = data("identity.json");
    let args = ["compile", "poly", s(&poly), "--mode", "hasclearing", "--at", "0", "-o", s(&out)];
    assert_eq!(code(&cdsnet(&args)), 0);
    assert_eq!(code(&cdsnet(&["clear", s(&out), "--method", "patterns"])), 0);
    let args = ["compile", "poly", s(&poly), "--mode", "hasclearing", "--at", "0.6", "-o", s(&out)];
    assert_eq!(code(&cdsnet(&args)), 0);
    assert_eq!(code(&cdsnet(&["clear", s(&out), "--method", "patterns"])), 2);
}

#[test]
fn brute_circuit() {
    let o = cdsnet(&["brute", "circuit", s(&data("nand_selfloop.json"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "w=⊥\n");
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("c.json");
    cdsnet(&["compile", "circuit", s(&data("purify_chain.json")), "-o", s(&net)]);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_cdsnet"))
            .args(["clear", s(&net), "--method", "approx", "--seed", "5"])
            .env("CDSNET_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("4"));
    let p = |_: ()| cdsnet(&["clear", s(&data("no_clearing.json")), "--method", "patterns"]).stdout;
    assert_eq!(p(()), p(()));
    let d = |_: ()| cdsnet(&["export", "dot", s(&net)]).stdout;
    assert_eq!(d(()), d(()));
}

#[test]
fn export_dot_hides_scaffolding() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("n.json");
    cdsnet(&["compile", "circuit", s(&data("nand_selfloop.json")), "-o", s(&net)]);
    let full = stdout(&cdsnet(&["export", "dot", s(&net)]));
    let hidden = stdout(&cdsnet(&["export", "dot", s(&net), "--hide-scaffolding"]));
    assert!(full.contains("\"s\" -> \"t\""));
    assert!(!hidden.contains("\"s\" -> \"t\""));
    assert!(full.starts_with("digraph"));
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(code(&cdsnet(&[])), 64);
    assert_eq!(code(&cdsnet(&["clear"])), 64);
    assert_eq!(code(&cdsnet(&["clear", "x.json", "--method", "magic"])), 64);
    assert_eq!(code(&cdsnet(&["--help"])), 0);

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"banks\": [{\"id\": \"a\"}], \"debts\": [{\"from\": \"a\", \"to\": \"q\", \"notional\": 1}]}").unwrap();
    let o = cdsnet(&["clear", s(&bad)]);
    assert_eq!(code(&o), 65);
    assert!(String::from_utf8_lossy(&o.stderr).contains("debts[0].to"));
    assert_eq!(code(&cdsnet(&["verify", s(&data("input_gadget.json")), "0.1 zz"])), 65);
    assert_eq!(code(&cdsnet(&["verify", s(&data("input_gadget.json")), "0.1"])), 65);
    assert_eq!(code(&cdsnet(&["clear", s(&dir.path().join("missing.json"))])), 66);
}
