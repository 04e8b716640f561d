use std::io::Write;
use std::path::Path;

use serde::Serialize;
use splink::evaluation::{covariate_effect, write_comparison_csv, EffectRequest, FitReport, ParamSummary};
use splink::model::{check_propriety, signed_design, AdjacencyGraph, Dataset, Model, ModelSpec, Propriety};
use splink::sampler::{run_chain, Chain};
use splink::sim::{derive_seed, StudyReport, StudySpec};
use splink::Family;

use crate::manifest::{ManifestBuilder, RunManifest};
use crate::{CheckArgs, CliError, EffectsArgs, FitArgs, Preset, SamplerArgs, SimulateArgs};

pub const MODEL_FILE: &str = "model.json";
pub const DATA_FILE: &str = "data.csv";
pub const ADJACENCY_FILE: &str = "adjacency.txt";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.csv";

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).and_then(|_| out.write_all(b"\n")).map_err(input_err)
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn parse_family(name: &str) -> Result<Family, CliError> {
    name.parse().map_err(|e| CliError::Input(format!("--link: {e}")))
}

/// Reads the model JSON (or the logit default) and applies `--link`.
fn load_spec(path: Option<&Path>, link: Option<&str>, manifest: Option<&mut ManifestBuilder>) -> Result<ModelSpec, CliError> {
    let spec = match path {
        Some(p) => {
            if let Some(m) = manifest {
                m.input(p)?;
            }
            ModelSpec::from_json(&read_text(p)?).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?
        }
        None => ModelSpec::for_family(Family::Logit),
    };
    let Some(name) = link else { return Ok(spec) };
    let family = parse_family(name)?;
    if family == spec.family() {
        return Ok(spec);
    }
    let mut swapped = ModelSpec::for_family(family).with_beta_prior(spec.beta_prior()).with_sampler(spec.sampler().clone());
    if let Some(s) = spec.spatial() {
        swapped = swapped.with_spatial(*s);
    }
    Ok(swapped)
}

fn apply_sampler_args(spec: &mut ModelSpec, args: &SamplerArgs) -> Result<(), CliError> {
    let cfg = spec.sampler_mut();
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(b) = args.burnin {
        cfg.n_burnin = b;
    }
    if let Some(n) = args.samples {
        cfg.n_samples = n;
    }
    if let Some(t) = args.thin {
        cfg.thin = t;
    }
    cfg.validate().map_err(CliError::from)
}

fn parse_effect(text: &str) -> Result<EffectRequest, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Input(format!("--effect '{text}': expected NAME:V0:V1"));
    if parts.len() != 3 || parts[0].is_empty() {
        return Err(bad());
    }
    let v0 = parts[1].parse().map_err(|_| bad())?;
    let v1 = parts[2].parse().map_err(|_| bad())?;
    Ok(EffectRequest { covariate: parts[0].to_string(), v0, v1 })
}

#[derive(Serialize)]
struct FitConfig<'a> {
    label: &'a str,
    model: &'a ModelSpec,
    effects: &'a [EffectRequest],
    level: f64,
}

pub struct FitOutcome {
    pub report: FitReport,
    pub manifest: RunManifest,
}

/// Fits one model. Besides the chain and reports, the run directory receives
/// the resolved model, a copy of the data and the adjacency graph so that
/// `effects` can rebuild the model from it alone.
pub fn fit(args: &FitArgs, out: &mut dyn Write) -> Result<FitOutcome, CliError> {
    let mut manifest = ManifestBuilder::start("fit");
    manifest.input(&args.data)?;
    let data = Dataset::from_csv(&args.data)?;
    let mut spec = load_spec(args.model.as_deref(), args.link.as_deref(), Some(&mut manifest))?;
    apply_sampler_args(&mut spec, &args.sampler)?;
    let graph = match &args.adjacency {
        Some(p) => {
            manifest.input(p)?;
            Some(AdjacencyGraph::from_file(p)?)
        }
        None => None,
    };
    let effects = args.effects.iter().map(|e| parse_effect(e)).collect::<Result<Vec<_>, _>>()?;
    for e in &effects {
        if data.column(&e.covariate).is_none() {
            return Err(CliError::Input(format!("--effect: unknown covariate '{}'", e.covariate)));
        }
    }
    let label = args.label.clone().unwrap_or_else(|| spec.family().name().to_string());

    let model = Model::new(spec.clone(), data, graph)?;
    let chain = run_chain(&model, spec.sampler())?;
    let report = FitReport::new(label.clone(), &model, &chain, &effects, args.level)?;

    create_dir(&args.out)?;
    chain.write(&args.out)?;
    write_file(&args.out.join(REPORT_FILE), report.to_json().as_bytes())?;
    let mut table = Vec::new();
    write_comparison_csv(&mut table, &report.comparison_rows())?;
    write_file(&args.out.join(SUMMARY_FILE), &table)?;
    write_file(&args.out.join(MODEL_FILE), spec.to_json().as_bytes())?;
    let mut copy = Vec::new();
    model.data().write_csv(&mut copy)?;
    write_file(&args.out.join(DATA_FILE), &copy)?;
    if let Some(g) = model.graph() {
        write_file(&args.out.join(ADJACENCY_FILE), g.to_text().as_bytes())?;
    }
    let config = FitConfig { label: &label, model: &spec, effects: &effects, level: args.level };
    let manifest = manifest.finish(&args.out, &config, spec.sampler().seed)?;

    print_report(out, &report)?;
    Ok(FitOutcome { report, manifest })
}

fn print_report(out: &mut dyn Write, report: &FitReport) -> Result<(), CliError> {
    let pct = 100.0 * report.level;
    say(out, format_args!("model {} ({} link), {} draws", report.model, report.link, report.n_draws))?;
    say(out, format_args!("{:<28} {:>10} {:>10} {:>22} {:>8}", "parameter", "mean", "median", format!("{pct}% HPD"), "ESS"))?;
    for p in report.params.iter().filter(|p| !p.name.starts_with("w[")).chain(report.effects.iter().map(|e| &e.summary)) {
        say(
            out,
            format_args!(
                "{:<28} {:>10.4} {:>10.4} {:>22} {:>8.0}",
                p.name,
                p.mean,
                p.median,
                format!("({:.4}, {:.4})", p.hpd_lo, p.hpd_hi),
                p.ess
            ),
        )?;
    }
    let d = &report.dic;
    say(out, format_args!("DIC {:.2} (Dbar {:.2}, pD {:.2}); DIC with pV {:.2}; LPML {:.2}", d.dic, d.dbar, d.pd, d.dic_pv, report.lpml))?;
    for b in &report.blocks {
        say(out, format_args!("block {:<16} acceptance {:.3}", b.name, b.rate()))?;
    }
    for w in &report.warnings {
        say(out, format_args!("warning: {w}"))?;
    }
    Ok(())
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Diagnostic text for the flat-prior propriety conditions.
pub fn propriety_text(data: &Dataset, diag: &Propriety) -> String {
    let mut s = String::new();
    let names = data.names().join(", ");
    s += &format!("rows: {}, columns: {} ({names})\n", data.len(), diag.n_columns);
    s += &format!("rank: {} of {} ({})\n", diag.rank, diag.n_columns, if diag.full_rank { "full" } else { "deficient" });
    s += &format!("overlap: {}\n", if diag.overlap { "PASS" } else { "FAIL" });
    s += &format!("separation: {:?}\n", diag.separation).to_lowercase();
    if let Some(b) = &diag.witness {
        let worst =
            signed_design(data).iter().map(|row| row.iter().zip(b).map(|(x, b)| x * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max);
        s += &format!("witness: b = {}\n", fmt_vec(b));
        s += &format!("witness check: max over rows of X*b = {worst:.6}\n");
    }
    if let Some(nu) = diag.nu_condition {
        s += &format!("nu condition: {}\n", if nu { "PASS" } else { "FAIL" });
    }
    s += &match diag.failure() {
        None => "flat-prior posterior: proper\n".to_string(),
        Some(reason) => format!("flat-prior posterior: improper ({reason})\n"),
    };
    s
}

/// Prints the propriety diagnostic; returns whether the conditions hold.
pub fn check(args: &CheckArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    let mut manifest = ManifestBuilder::start("check");
    manifest.input(&args.data)?;
    let data = Dataset::from_csv(&args.data)?;
    let spec = load_spec(args.model.as_deref(), args.link.as_deref(), Some(&mut manifest))?;
    let diag = check_propriety(&data, &spec)?;
    let text = propriety_text(&data, &diag);
    out.write_all(text.as_bytes()).map_err(input_err)?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_file(&dir.join("check.txt"), text.as_bytes())?;
        manifest.finish(dir, &spec, 0)?;
    }
    Ok(diag.passes())
}

fn resolve_study(args: &SimulateArgs, manifest: &mut ManifestBuilder) -> Result<StudySpec, CliError> {
    let seed = args.sampler.seed.unwrap_or(1);
    let mut study = match (args.preset, &args.study) {
        (Some(Preset::Study1), _) => StudySpec::study1(args.n.unwrap_or(2000), args.replicates.unwrap_or(1), args.x2_sd, seed),
        (Some(Preset::Study2), _) => {
            let xis = if args.xis.is_empty() { vec![-3.3, -0.3, 2.7] } else { args.xis.clone() };
            StudySpec::study2(args.n.unwrap_or(2000), args.replicates.unwrap_or(30), &xis, args.x2_sd, seed)?
        }
        (Some(Preset::Study3), _) => StudySpec::study3(args.n.unwrap_or(200), args.replicates.unwrap_or(50), seed),
        (None, Some(path)) => {
            manifest.input(path)?;
            let mut s = StudySpec::from_json(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            if let Some(seed) = args.sampler.seed {
                for (i, sc) in s.scenarios.iter_mut().enumerate() {
                    sc.seed = derive_seed(seed, i as u64);
                }
            }
            s
        }
        (None, None) => return Err(CliError::Input("give a study file or --preset".into())),
    };
    let SamplerArgs { burnin, samples, thin, .. } = args.sampler;
    if burnin.is_some() || samples.is_some() || thin.is_some() {
        let mut cfg = study.sampler.clone().unwrap_or_default();
        cfg.n_burnin = burnin.unwrap_or(cfg.n_burnin);
        cfg.n_samples = samples.unwrap_or(cfg.n_samples);
        cfg.thin = thin.unwrap_or(cfg.thin);
        study.sampler = Some(cfg);
    }
    if let Some(c) = args.dic_convention {
        study.dic_convention = c.into();
    }
    study.validate()?;
    Ok(study)
}

pub struct SimulateOutcome {
    pub report: StudyReport,
    pub manifest: RunManifest,
}

/// Runs a study; records go to `out/records`, tables to `out/*.csv`.
pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<SimulateOutcome, CliError> {
    let mut manifest = ManifestBuilder::start("simulate");
    let study = resolve_study(args, &mut manifest)?;
    create_dir(&args.out)?;
    write_file(&args.out.join("study.json"), study.to_json().as_bytes())?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Input("--threads must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(input_err)?;
    let progress = |r: &splink::sim::ReplicateRecord| {
        let failed: Vec<&str> = r.fits.iter().filter(|f| f.error.is_some()).map(|f| f.label.as_str()).collect();
        if failed.is_empty() {
            eprintln!("{} replicate {} done", r.scenario, r.replicate);
        } else {
            eprintln!("{} replicate {} done; failed fits: {}", r.scenario, r.replicate, failed.join(", "));
        }
    };
    let report = pool.install(|| study.run(Some(&args.out), &progress))?;
    report.write_tables(&args.out)?;

    for row in report.win_rates() {
        say(
            out,
            format_args!(
                "{:<20} {:<14} wins {:>3}/{:<3} ({:5.1}%)  failed replicates {}",
                row.scenario, row.model, row.wins, row.n, row.percent, row.n_failed
            ),
        )?;
    }
    for row in report.dic_differences() {
        say(
            out,
            format_args!(
                "{:<20} DIC({}) - DIC({}) = {:.2} (se {:.2}, n {})",
                row.scenario, row.model, row.reference, row.mean, row.se, row.n
            ),
        )?;
    }
    let seed = args.sampler.seed.unwrap_or(1);
    let manifest = manifest.finish(&args.out, &study, seed)?;
    Ok(SimulateOutcome { report, manifest })
}

/// Rebuilds the model saved by `fit` and reads its chain.
pub fn load_fit(dir: &Path) -> Result<(Model, Chain), CliError> {
    let spec = ModelSpec::from_json(&read_text(&dir.join(MODEL_FILE))?)?;
    let data = Dataset::from_csv(dir.join(DATA_FILE))?;
    let adj = dir.join(ADJACENCY_FILE);
    let graph = if adj.exists() { Some(AdjacencyGraph::from_file(&adj)?) } else { None };
    let model = Model::new(spec, data, graph)?;
    let chain = Chain::read(dir, &model)?;
    Ok((model, chain))
}

/// Computes one covariate effect from a fit directory.
pub fn effects(args: &EffectsArgs, out: &mut dyn Write) -> Result<ParamSummary, CliError> {
    let mut manifest = ManifestBuilder::start("effects");
    for f in [MODEL_FILE, DATA_FILE, "chain.csv", "chain.json"] {
        manifest.input(&args.fit_dir.join(f))?;
    }
    let (model, chain) = load_fit(&args.fit_dir)?;
    let effect = covariate_effect(&model, &chain, &args.variable, args.v0, args.v1)?;
    let name = format!("effect[{}: {} -> {}]", args.variable, args.v0, args.v1);
    let summary = ParamSummary::from_draws(name, &effect.draws, args.level)?;
    say(
        out,
        format_args!(
            "effect of {} from {} to {}: {:.3} (median {:.3}, {}% HPD ({:.3}, {:.3}))",
            args.variable,
            args.v0,
            args.v1,
            effect.effect,
            summary.median,
            100.0 * args.level,
            summary.hpd_lo,
            summary.hpd_hi
        ),
    )?;
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        let path = dir.join("effects.csv");
        let mut text = String::from("variable,v0,v1,mean,median,hpd_lo,hpd_hi,ess\n");
        text += &format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}\n",
            args.variable, args.v0, args.v1, summary.mean, summary.median, summary.hpd_lo, summary.hpd_hi, summary.ess
        );
        write_file(&path, text.as_bytes())?;
        #[derive(Serialize)]
        struct EffectsConfig<'a> {
            fit_dir: String,
            variable: &'a str,
            v0: f64,
            v1: f64,
            level: f64,
        }
        let config = EffectsConfig {
            fit_dir: args.fit_dir.display().to_string(),
            variable: &args.variable,
            v0: args.v0,
            v1: args.v1,
            level: args.level,
        };
        manifest.finish(dir, &config, chain.config().seed)?;
    }
    Ok(summary)
}
