//! The command-line surface: answers, exit codes, JSON schemas and determinism.

mod common;

use common::{fixture, json_commands, rpnkit, rpnkit_env, schema_errors};

#[test]
fn documented_examples() {
    let r = rpnkit(&["check", "terminate", &fixture("fig1.rpn")]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "NONTERMINATING (cycle: v_t_a2)\n"));
    let r = rpnkit(&["order", &fixture("fig3.rpn"), "s", "sprime", "--rooted"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "NO\n"));
    let r = rpnkit(&["check", "cut", &fixture("fig1.rpn"), "--state", "sIni"]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "NO\n"));
}

#[test]
fn verdict_words() {
    let fig1 = fixture("fig1.rpn");
    let fig4 = fixture("fig4.rpn");
    let cases: &[(&[&str], &str)] = &[
        (&["check", "bounded", &fig1], "BOUNDED\n"),
        (&["check", "finite", &fig1], "INFINITE (cycle: v_t_a2)\n"),
        (&["check", "cut", &fig1, "--state", "sBeg"], "YES\n"),
        (&["check", "cover", &fig4], "YES\n"),
        (&["check", "bounded", &fig4], "UNBOUNDED\n"),
        (&["check", "terminate", &fig4], "NONTERMINATING (self-covering thread: r)\n"),
        (&["check", "terminate", &fixture("hat.rpn")], "NONTERMINATING (cycle: v_t1)\n"),
        (&["check", "terminate", &fixture("forkjoin.rpn")], "TERMINATING\n"),
        (&["check", "cut", &fixture("forkjoin.rpn")], "NO\n"),
        (&["check", "cover", &fixture("forkjoin.rpn")], "YES\n"),
        (&["oracle", "member", &fig4, "abbc"], "NO-WITHIN-BOUND\n"),
    ];
    for (args, expected) in cases {
        let r = rpnkit(args);
        assert_eq!((r.code, r.stdout.as_str()), (0, *expected), "{args:?}");
    }
}

#[test]
fn witnesses_replay_through_sim() {
    let fig1 = fixture("fig1.rpn");
    let r = rpnkit(&["check", "cut", &fig1, "--state", "sBeg", "--witness"]);
    let script: String = r.stdout.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let s = rpnkit(&["sim", &fig1, "--state", "sBeg", "--fire", &script, "--json"]);
    assert_eq!(s.code, 0, "{}", s.stderr);
    let doc: serde_json::Value = serde_json::from_str(&s.stdout).unwrap();
    assert_eq!(doc["end"]["nodes"], serde_json::json!([]));
}

#[test]
fn exit_codes() {
    assert_eq!(rpnkit(&["check", "cut", &fixture("missing.rpn")]).code, 2);
    assert_eq!(rpnkit(&["check", "cut", &fixture("fig1.rpn"), "--state", "nope"]).code, 2);
    assert_eq!(rpnkit(&["check", "cover", &fixture("fig3.rpn")]).code, 2, "no target in the file");
    assert_eq!(rpnkit(&["frobnicate"]).code, 2);
    let bad = std::env::temp_dir().join(format!("rpnkit-bad-{}.rpn", std::process::id()));
    std::fs::write(&bad, "net { places p; cut t { in: p; out: p; } }\n").unwrap();
    let r = rpnkit(&["check", "cut", bad.to_str().unwrap()]);
    std::fs::remove_file(&bad).unwrap();
    assert_eq!(r.code, 2);
    assert!(r.stderr.starts_with("error:"), "{}", r.stderr);
    assert!(!r.stderr.contains("panicked"));
    let r = rpnkit(&["oracle", "explore", &fixture("fig1.rpn"), "--cap-states", "50"]);
    assert_eq!(r.code, 3);
    assert!(r.stdout.contains("exhausted: no (state-cap)"));
    assert_eq!(rpnkit(&["oracle", "explore", &fixture("forkjoin.rpn")]).code, 0);
    let r = rpnkit(&["oracle", "sample", &fixture("fig4.rpn"), "--max-len", "2", "--eps-budget", "0"]);
    assert_eq!(r.code, 3);
}

#[test]
fn caps_come_from_the_environment_then_the_flags() {
    let fig1 = fixture("fig1.rpn");
    let args = ["oracle", "explore", fig1.as_str(), "--json"];
    let r = rpnkit_env(&args, &[("RPNKIT_CAPS", "states=40, steps=7")]);
    let doc: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["caps"], serde_json::json!({ "steps": 7, "states": 40, "eps": 64 }));
    let mut with_flag = args.to_vec();
    with_flag.extend(["--cap-states", "30"]);
    let r = rpnkit_env(&with_flag, &[("RPNKIT_CAPS", "states=40")]);
    let doc: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["caps"]["states"], 30);
    assert_eq!(rpnkit_env(&args, &[("RPNKIT_CAPS", "states=many")]).code, 2);
}

#[test]
fn json_follows_the_schemas() {
    for (schema, args) in json_commands() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = rpnkit(&args);
        let doc: serde_json::Value =
            serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", r.stdout));
        assert_eq!(schema_errors(schema, &doc), Vec::<String>::new(), "{args:?}");
        assert!(doc.get("wallclock_ms").is_none() && doc["stats"].get("wallclock_ms").is_none());
    }
}

#[test]
fn timing_is_opt_in() {
    let r = rpnkit(&["check", "bounded", &fixture("fig1.rpn"), "--json", "--timing"]);
    let doc: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(doc["stats"]["wallclock_ms"].is_u64());
    assert_eq!(schema_errors("verdict", &doc), Vec::<String>::new());
    let r = rpnkit(&["graph", &fixture("fig1.rpn"), "--json", "--timing"]);
    let doc: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(schema_errors("graph", &doc), Vec::<String>::new());
}

#[test]
fn dot_output() {
    let dot = std::env::temp_dir().join(format!("rpnkit-{}.dot", std::process::id()));
    let r = rpnkit(&["graph", &fixture("fig1.rpn"), "--dot", dot.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&dot).unwrap();
    std::fs::remove_file(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert_eq!(text.matches(" -> ").count(), 7);
    assert_eq!(rpnkit(&["graph", &fixture("fig1.rpn"), "--dot", "-"]).stdout, text);
}

#[test]
fn built_files_parse_back() {
    for kind in ["rooted", "hat", "cov2cut", "cut2cov"] {
        let file = if kind == "cut2cov" { fixture("hat.rpn") } else { fixture("fig4.rpn") };
        let r = rpnkit(&["build", kind, &file]);
        assert_eq!(r.code, 0, "{kind}: {}", r.stderr);
        let parsed = rpnkit::io::parse(&r.stdout).unwrap_or_else(|e| panic!("{kind}: {e}"));
        assert!(!parsed.states.is_empty(), "{kind}");
    }
    // the cut-to-cover image of a net with a reachable cut is coverable
    let out = std::env::temp_dir().join(format!("rpnkit-c2c-{}.rpn", std::process::id()));
    let r = rpnkit(&["build", "cut2cov", &fixture("fig1.rpn"), "--state", "sBeg", "-o", out.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    let r = rpnkit(&["check", "cover", out.to_str().unwrap()]);
    std::fs::remove_file(&out).unwrap();
    assert_eq!(r.stdout, "YES\n");
}

#[test]
fn deterministic_output() {
    for (_, args) in json_commands().into_iter().take(6) {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert_eq!(rpnkit(&args).stdout, rpnkit(&args).stdout, "{args:?}");
    }
}
