use std::process::{Command, Output};

fn sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-sim"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(
        code(&sim(&[
            "conservation",
            "--trials",
            "0",
            "--seed",
            "1",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&sim(&["conservation", "--out", out])),
        2,
        "collapse runs need a seed"
    );
    assert_eq!(
        code(&sim(&[
            "special-search",
            "--tolerance",
            "0.6",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&sim(&[
            "conservation",
            "--reservoir",
            "3",
            "--seed",
            "1",
            "--out",
            out
        ])),
        2
    );
    assert_eq!(
        code(&sim(&[
            "born-check",
            "--scheme",
            "unitary",
            "--seed",
            "1",
            "--out",
            out
        ])),
        2
    );
    let missing = dir.path().join("nope");
    assert_eq!(
        code(&sim(&[
            "anamnesis",
            "--scheme",
            "unitary",
            "--out",
            missing.to_str().unwrap()
        ])),
        3
    );
    assert_eq!(
        code(&sim(&[
            "conservation",
            "--config",
            "/nonexistent.toml",
            "--out",
            out
        ])),
        3
    );
}

#[test]
fn reports_and_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = sim(&[
        "conservation",
        "--scheme",
        "standard",
        "--seed",
        "7",
        "--trials",
        "20",
        "--out",
        out,
    ]);
    assert_eq!(code(&o), 0);
    let ledger: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ledger.json")).unwrap())
            .unwrap();
    let branches = ledger["ledger"]["branches"].as_array().unwrap();
    assert!(branches
        .iter()
        .any(|b| (b["delta"]["total"]["sx"].as_f64().unwrap_or(0.0) + 1.0).abs() < 1e-12));
    assert_eq!(ledger["config"]["seed"], 7);
    let csv = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    assert!(csv.starts_with("seed,step,device,outcome,p,dJx,dJy,dJz\n"));
    assert_eq!(csv.lines().count(), 1 + 20 * 3);

    let o = sim(&["special-search", "--input", "z", "--out", out]);
    assert_eq!(code(&o), 0);
    let special = std::fs::read_to_string(dir.path().join("special.csv")).unwrap();
    assert!(special
        .lines()
        .skip(1)
        .any(|l| l.starts_with("0.0,") && l.contains(",1.0,up")));

    let o = sim(&[
        "anamnesis",
        "--scheme",
        "standard",
        "--seed",
        "1",
        "--out",
        out,
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("t=0 fidelity=0.500000000000"));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "scheme = \"standard\"\nseed = 5\ntrials = 0\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(
        code(&sim(&["conservation", "--config", cfg, "--out", out])),
        2
    );
    assert_eq!(
        code(&sim(&[
            "conservation",
            "--config",
            cfg,
            "--trials",
            "4",
            "--out",
            out
        ])),
        0
    );
    let ledger = std::fs::read_to_string(dir.path().join("ledger.json")).unwrap();
    assert!(ledger.contains("\"trials\": 4"));
    std::fs::write(dir.path().join("bad.toml"), "colour = 1\n").unwrap();
    let bad = dir.path().join("bad.toml");
    assert_eq!(
        code(&sim(&[
            "conservation",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out
        ])),
        2
    );
}
