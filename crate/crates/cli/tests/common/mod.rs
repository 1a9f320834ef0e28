//! Running the binary and validating its JSON.

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn fixture(name: &str) -> String {
    root().join("fixtures").join(name).to_string_lossy().into_owned()
}

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn rpnkit(args: &[&str]) -> Run {
    rpnkit_env(args, &[])
}

pub fn rpnkit_env(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rpnkit"));
    cmd.args(args).env_remove("RPNKIT_CAPS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("the binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}

/// Errors of `doc` against `schema/<name>.json`, as text.
pub fn schema_errors(name: &str, doc: &serde_json::Value) -> Vec<String> {
    let path = root().join("schema").join(format!("{name}.json"));
    let schema: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let errors = match compiled.validate(doc) {
        Ok(()) => Vec::new(),
        Err(errs) => errs.map(|e| format!("{}: {e}", e.instance_path)).collect(),
    };
    errors
}

/// One invocation of every command family with `--json`, with the schema its output follows.
pub fn json_commands() -> Vec<(&'static str, Vec<String>)> {
    let f = fixture;
    let script = f("fig2.sim");
    let list: Vec<(&str, Vec<String>)> = vec![
        ("verdict", vec!["check".into(), "terminate".into(), f("fig1.rpn"), "--witness".into()]),
        ("verdict", vec!["check".into(), "cut".into(), f("fig1.rpn"), "--state".into(), "sBeg".into(), "--witness".into()]),
        ("verdict", vec!["check".into(), "cover".into(), f("fig4.rpn"), "--witness".into()]),
        ("verdict", vec!["check".into(), "terminate".into(), f("fig4.rpn"), "--witness".into()]),
        ("verdict", vec!["check".into(), "bounded".into(), f("fig1.rpn")]),
        ("verdict", vec!["check".into(), "finite".into(), f("fig1.rpn")]),
        ("graph", vec!["graph".into(), f("fig1.rpn")]),
        ("order", vec!["order".into(), f("fig3.rpn"), "s".into(), "sprime".into()]),
        ("order", vec!["order".into(), f("fig3.rpn"), "s".into(), "sprime".into(), "--rooted".into()]),
        ("sim", vec!["sim".into(), f("fig1.rpn"), "--fire".into(), script]),
        ("build", vec!["build".into(), "rooted".into(), f("rooted.rpn")]),
        ("build", vec!["build".into(), "hat".into(), f("fig1.rpn")]),
        ("build", vec!["build".into(), "hatel".into(), f("hat.rpn")]),
        ("build", vec!["build".into(), "cov2cut".into(), f("fig4.rpn")]),
        ("build", vec!["build".into(), "cut2cov".into(), f("hat.rpn")]),
        ("build", vec!["build".into(), "union".into(), f("fig4.rpn"), f("fig4.rpn")]),
        ("explore", vec!["oracle".into(), "explore".into(), f("forkjoin.rpn"), "--list".into()]),
        ("explore", vec!["oracle".into(), "explore".into(), f("fig1.rpn"), "--cap-states".into(), "200".into()]),
        ("member", vec!["oracle".into(), "member".into(), f("fig4.rpn"), "aabc".into()]),
        ("sample", vec!["oracle".into(), "sample".into(), f("fig4.rpn"), "--max-len".into(), "3".into()]),
        ("error", vec!["check".into(), "cut".into(), f("missing.rpn")]),
    ];
    list.into_iter()
        .map(|(s, mut a)| {
            a.push("--json".into());
            (s, a)
        })
        .collect()
}
