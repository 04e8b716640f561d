use std::path::Path;
use std::process::{Command, Output};

use splink::link::LinkSpec;
use splink::model::{Dataset, Model, ModelSpec, ParamState};
use splink::sampler::Chain;
use splink_cli::RunManifest;

fn splink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splink")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const TOY: &str = "y,n,x\n0,1,-1.0\n0,1,-0.5\n1,1,-0.2\n0,1,0.3\n1,1,0.5\n1,1,1.0\n";
const SEPARABLE: &str = "y,n,x\n0,1,-1.0\n0,1,-0.5\n0,1,-0.2\n1,1,0.3\n1,1,0.5\n1,1,1.0\n";

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn median(report: &serde_json::Value, name: &str) -> f64 {
    report["params"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap()["median"].as_f64().unwrap()
}

#[test]
fn toy_logit_fit_reports_two_coefficients() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "toy.csv", TOY);
    let out = tmp.path().join("fit");
    let o = splink(&["fit", &data, "--out", out.to_str().unwrap(), "--burnin", "500", "--samples", "1000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    let names: Vec<&str> = r["params"].as_array().unwrap().iter().map(|p| p["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["beta[(Intercept)]", "beta[x]"]);
    for f in ["chain.csv", "chain.json", "report.json", "summary.csv", "model.json", "data.csv", "manifest.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.starts_with("model,variable,median,hpd_lo,hpd_hi,dic,lpml\n"));
    assert!(stdout(&o).contains("DIC"));
}

#[test]
fn reruns_reproduce_outputs_and_manifest_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "toy.csv", TOY);
    let run = |name: &str| {
        let out = tmp.path().join(name);
        let o = splink(&["fit", &data, "--out", out.to_str().unwrap(), "--seed", "7", "--burnin", "300", "--samples", "500"]);
        assert!(o.status.success());
        RunManifest::read(&out).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a.config_digest, b.config_digest);
    assert_eq!(a.inputs, b.inputs);
    assert_eq!(a.outputs, b.outputs);
    assert_eq!(a.seed, 7);
    assert_eq!(a.command, "fit");
    assert!(a.outputs.iter().any(|d| d.path == "chain.csv"));
    assert!(!a.outputs.iter().any(|d| d.path == "manifest.json"));
    // a different seed changes the chain
    let out = tmp.path().join("c");
    assert!(splink(&["fit", &data, "--out", out.to_str().unwrap(), "--seed", "8", "--burnin", "300", "--samples", "500"]).status.success());
    let c = RunManifest::read(&out).unwrap();
    assert_ne!(c.config_digest, a.config_digest);
    assert_ne!(c.outputs, a.outputs);
}

#[test]
fn mirrored_responses_give_reciprocal_r() {
    // 6 covariate levels with 400 trials each from a right-skewed truth, so
    // r is identified by the data and the prior on r barely matters.
    let truth = LinkSpec::cloglog();
    let mut text = String::from("y,n,x\n");
    let mut flipped = String::from("y,n,x\n");
    for (i, x) in [-1.5, -0.9, -0.3, 0.3, 0.9, 1.5].iter().enumerate() {
        let y = (400.0 * truth.cdf(0.2 + x)).round() as u32 + (i as u32 % 2);
        text += &format!("{y},400,{x}\n");
        flipped += &format!("{},400,{x}\n", 400 - y);
    }
    let tmp = tempfile::tempdir().unwrap();
    let d1 = write(tmp.path(), "a.csv", &text);
    let d2 = write(tmp.path(), "b.csv", &flipped);
    let fit = |data: &str, name: &str| {
        let out = tmp.path().join(name);
        let o = splink(&["fit", data, "--link", "splogit", "--out", out.to_str().unwrap(), "--burnin", "2000", "--samples", "6000"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        median(&report(&out), "r")
    };
    let (r1, r2) = (fit(&d1, "a"), fit(&d2, "b"));
    assert!(r1 < 0.8, "right-skewed truth should give r < 1, got {r1}");
    assert!((r1 * r2).ln().abs() < 0.15, "r medians {r1} and {r2}");
}

#[test]
fn separable_data_with_flat_prior_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "sep.csv", SEPARABLE);
    let model = write(tmp.path(), "flat.json", r#"{"link":{"family":"logit"},"beta_prior":"flat"}"#);
    let out = tmp.path().join("fit");
    let o = splink(&["fit", &data, "--model", &model, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists(), "nothing is written on refusal");
}

#[test]
fn check_reports_overlap_and_witness() {
    let tmp = tempfile::tempdir().unwrap();
    let sep = write(tmp.path(), "sep.csv", SEPARABLE);
    let o = splink(&["check", &sep]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("overlap: FAIL"), "{text}");
    let witness_line = text.lines().find(|l| l.starts_with("witness: b = ")).expect("witness printed");
    let b: Vec<f64> =
        witness_line["witness: b = ".len()..].trim_matches(|c| c == '[' || c == ']').split(", ").map(|v| v.parse().unwrap()).collect();
    // re-substitute: every signed row must satisfy x*_i . b <= -1
    let rows: Vec<(f64, bool)> = SEPARABLE
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[2].parse().unwrap(), f[0] == "1")
        })
        .collect();
    for (x, success) in rows {
        let eta = b[0] + b[1] * x;
        let signed = if success { -eta } else { eta };
        assert!(signed <= -1.0 + 1e-6, "row x = {x}: {signed}");
    }

    let toy = write(tmp.path(), "toy.csv", TOY);
    let o = splink(&["check", &toy]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("overlap: PASS"));
}

#[test]
fn input_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let out = out.to_str().unwrap();
    assert_eq!(splink(&["fit", "missing.csv", "--out", out]).status.code(), Some(2));
    let bad = write(tmp.path(), "bad.csv", "y,n,x\n2,1,0.5\nq,1,0.1\n");
    assert_eq!(splink(&["fit", &bad, "--out", out]).status.code(), Some(2));
    let toy = write(tmp.path(), "toy.csv", TOY);
    assert_eq!(splink(&["fit", &toy, "--out", out, "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(splink(&["fit", &toy, "--out", out, "--link", "probit"]).status.code(), Some(2));
    assert_eq!(splink(&["fit", &toy, "--out", out, "--effect", "z:0:1"]).status.code(), Some(2));
    let model = write(tmp.path(), "m.json", r#"{"link":{"family":"logit"},"unknown":1}"#);
    assert_eq!(splink(&["fit", &toy, "--model", &model, "--out", out]).status.code(), Some(2));
}

#[test]
fn help_lists_every_flag() {
    let text = stdout(&splink(&["fit", "--help"]));
    for flag in ["--seed", "--burnin", "--samples", "--thin", "--link", "--out", "--model", "--adjacency", "--effect", "--level"] {
        assert!(text.contains(flag), "fit --help lacks {flag}");
    }
    let text = stdout(&splink(&["simulate", "--help"]));
    for flag in ["--seed", "--burnin", "--samples", "--thin", "--threads", "--out", "--preset", "--dic-convention"] {
        assert!(text.contains(flag), "simulate --help lacks {flag}");
    }
}

#[test]
fn one_replicate_one_model_study() {
    let tmp = tempfile::tempdir().unwrap();
    let study = r#"{
        "name": "tiny",
        "scenarios": [{
            "name": "logit-n100",
            "truth": {"family": "logit"},
            "n": 100,
            "covariates": {"kind": "standard_normal"},
            "beta": {"fixed": [0.0, 1.0]},
            "replicates": 1,
            "models": [{"label": "logit", "spec": {"link": {"family": "logit"}}}],
            "seed": 3
        }],
        "sampler": {"n_burnin": 300, "n_samples": 300}
    }"#;
    let path = write(tmp.path(), "study.json", study);
    let out = tmp.path().join("sim");
    let o = splink(&["simulate", &path, "--out", out.to_str().unwrap(), "--threads", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_dir(out.join("records").join("logit-n100")).unwrap().count();
    assert_eq!(records, 1);
    let wins = std::fs::read_to_string(out.join("win_rates.csv")).unwrap();
    let row = wins.lines().nth(1).unwrap();
    assert!(row.starts_with("logit-n100,logit,1,1,100.0,"), "{row}");
    assert!(stdout(&o).contains("100.0%"));
    let m = RunManifest::read(&out).unwrap();
    assert!(m.outputs.iter().any(|d| d.path.ends_with("replicate_0000.json")));
}

#[test]
fn zero_coefficient_chain_has_zero_effect() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fit");
    std::fs::create_dir(&dir).unwrap();
    let data = Dataset::from_reader(TOY.as_bytes()).unwrap();
    let spec = ModelSpec::new(LinkSpec::logit());
    let model = Model::new(spec.clone(), data, None).unwrap();
    let draws = (0..50).map(|i| ParamState::new(vec![0.1 * i as f64 - 2.0, 0.0], LinkSpec::logit())).collect();
    Chain::from_draws(&model, draws).write(&dir).unwrap();
    std::fs::write(dir.join("model.json"), spec.to_json()).unwrap();
    let mut csv = Vec::new();
    model.data().write_csv(&mut csv).unwrap();
    std::fs::write(dir.join("data.csv"), csv).unwrap();

    let out = tmp.path().join("eff");
    let o = splink(&["effects", dir.to_str().unwrap(), "--variable", "x", "--v0", "-1", "--v1", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("effect of x from -1 to 2: 0.000"), "{}", stdout(&o));
    assert!(out.join("effects.csv").exists() && out.join("manifest.json").exists());
    let o = splink(&["effects", dir.to_str().unwrap(), "--variable", "nope", "--v0", "0", "--v1", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spatial_fit_directory_is_self_contained() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("y,n,x,region\n");
    for (k, region) in ["D", "C", "B", "A", "E"].iter().enumerate() {
        for i in 0..6 {
            let x = (i as f64 - 2.5) / 2.0;
            text += &format!("{},3,{x},{region}\n", (i + k) % 4 % 3 + usize::from(x > 0.0) - usize::from(i == 5));
        }
    }
    let data = write(tmp.path(), "d.csv", &text);
    // B-A-C-D path plus an isolated region E declared on its own line
    let adj = write(tmp.path(), "g.adj", "B A\nA C\nC D\nE\n");
    let model = write(tmp.path(), "m.json", r#"{"link":{"family":"logit"},"spatial":{}}"#);
    let out = tmp.path().join("fit");
    let o = splink(&[
        "fit",
        &data,
        "--model",
        &model,
        "--adjacency",
        &adj,
        "--out",
        out.to_str().unwrap(),
        "--burnin",
        "300",
        "--samples",
        "300",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = std::fs::read_to_string(out.join("chain.csv")).unwrap().lines().next().unwrap().to_string();
    assert!(header.ends_with("w[B],w[A],w[C],w[D],w[E],tau2"), "{header}");
    let o = splink(&["effects", out.to_str().unwrap(), "--variable", "x", "--v0", "0", "--v1", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
