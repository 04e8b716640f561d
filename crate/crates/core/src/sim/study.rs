use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{dic_differences, table1, win_rates, DicDifferenceRow, SummaryRow, WinRateRow};
use super::scenario::{BetaScheme, CovariateScheme, FittedModel, ScenarioSpec};
use super::SimError;
use crate::evaluation::{covariate_effect, dic, lpml, Dic, DicConvention, EffectRequest, ParamSummary};
use crate::link::{Family, LinkSpec};
use crate::model::{Dataset, Model, ModelSpec};
use crate::sampler::{run_chain, ChainConfig};

/// A named set of scenarios run together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub name: String,
    pub scenarios: Vec<ScenarioSpec>,
    /// Replaces the sampler settings of every fitted model (seeds are always
    /// derived per replicate and model).
    #[serde(default)]
    pub sampler: Option<ChainConfig>,
    /// Penalty used by the win-rate and DIC-difference tables.
    #[serde(default)]
    pub dic_convention: DicConvention,
}

/// Posterior summary of a link shape parameter, with `P(value < 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSummary {
    pub summary: ParamSummary,
    pub prob_below_one: f64,
}

/// Outcome of one model on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub label: String,
    pub family: Family,
    pub seed: u64,
    pub dic: Option<Dic>,
    pub lpml: Option<f64>,
    #[serde(default)]
    pub effects: Vec<ParamSummary>,
    #[serde(default)]
    pub shapes: Vec<ShapeSummary>,
    pub error: Option<String>,
}

/// Everything persisted about one replicate; aggregates are computed from
/// these records only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub scenario: String,
    pub replicate: usize,
    pub data_seed: u64,
    pub beta_true: Vec<f64>,
    pub success_rate: f64,
    pub fits: Vec<FitRecord>,
}

impl ReplicateRecord {
    pub fn failed(&self) -> bool {
        self.fits.iter().any(|f| f.error.is_some())
    }

    pub fn fit(&self, label: &str) -> Option<&FitRecord> {
        self.fits.iter().find(|f| f.label == label)
    }
}

/// Per-replicate records of a study and the tables derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub name: String,
    pub convention: DicConvention,
    pub records: Vec<ReplicateRecord>,
}

impl StudySpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.scenarios.is_empty() {
            return Err(SimError::Invalid(format!("study '{}' has no scenarios", self.name)));
        }
        let mut names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::Invalid("duplicate scenario names".into()));
        }
        if let Some(s) = &self.sampler {
            s.validate()?;
        }
        self.scenarios.iter().try_for_each(ScenarioSpec::validate)
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let study: StudySpec = serde_json::from_str(text)?;
        study.validate()?;
        Ok(study)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("study serialises")
    }

    /// Logit, cloglog and loglog truths with `x1` binary and `x2` normal,
    /// `beta = (0, 1, 1)`, fitted by the standard, two-parameter and
    /// symmetric power links.
    pub fn study1(n: usize, replicates: usize, x2_sd: f64, seed: u64) -> StudySpec {
        let models =
            [Family::Logit, Family::Cloglog, Family::Loglog, Family::Stukel, Family::Czado, Family::Splogit, Family::Spt, Family::Spep];
        let effects = ["x1", "x2"].iter().map(|c| EffectRequest { covariate: c.to_string(), v0: 0.0, v1: 1.0 }).collect::<Vec<_>>();
        let scenarios = [LinkSpec::logit(), LinkSpec::cloglog(), LinkSpec::loglog()]
            .iter()
            .enumerate()
            .map(|(i, &truth)| ScenarioSpec {
                name: format!("{}-n{n}", truth.family()),
                truth,
                n,
                covariates: CovariateScheme::BinaryNormal { x2_sd },
                beta: BetaScheme::Fixed(vec![0.0, 1.0, 1.0]),
                replicates,
                models: fitted(&models),
                seed: super::derive_seed(seed, i as u64),
                effects: effects.clone(),
            })
            .collect();
        StudySpec { name: "study1".into(), scenarios, sampler: None, dic_convention: DicConvention::default() }
    }

    /// GEV truths with shape `xi`, fitted by splogit, plogit and altersplogit.
    pub fn study2(n: usize, replicates: usize, xis: &[f64], x2_sd: f64, seed: u64) -> Result<StudySpec, SimError> {
        let scenarios = xis
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                Ok(ScenarioSpec {
                    name: format!("gev-xi{xi}"),
                    truth: LinkSpec::gev(xi).map_err(crate::model::ModelError::from)?,
                    n,
                    covariates: CovariateScheme::BinaryNormal { x2_sd },
                    beta: BetaScheme::Fixed(vec![0.0, 1.0, 1.0]),
                    replicates,
                    models: fitted(&[Family::Splogit, Family::Plogit, Family::Altersplogit]),
                    seed: super::derive_seed(seed, i as u64),
                    effects: vec![],
                })
            })
            .collect::<Result<_, SimError>>()?;
        Ok(StudySpec { name: "study2".into(), scenarios, sampler: None, dic_convention: DicConvention::default() })
    }

    /// Logit, cloglog and loglog truths with one standard-normal covariate
    /// and coefficients drawn from `N(1, 0.1^2)` per replicate, fitted by
    /// splogit, GEV (cloglog at `xi = 0`), Stukel and Czado.
    pub fn study3(n: usize, replicates: usize, seed: u64) -> StudySpec {
        let models = [Family::Splogit, Family::ReflectedGev, Family::Stukel, Family::Czado];
        let scenarios = [LinkSpec::logit(), LinkSpec::cloglog(), LinkSpec::loglog()]
            .iter()
            .enumerate()
            .map(|(i, &truth)| ScenarioSpec {
                name: format!("{}-n{n}", truth.family()),
                truth,
                n,
                covariates: CovariateScheme::StandardNormal,
                beta: BetaScheme::Normal { mean: vec![1.0, 1.0], sd: 0.1 },
                replicates,
                models: fitted(&models),
                seed: super::derive_seed(seed, i as u64),
                effects: vec![],
            })
            .collect();
        StudySpec { name: "study3".into(), scenarios, sampler: None, dic_convention: DicConvention::default() }
    }

    /// Runs every replicate of every scenario on the current rayon pool.
    /// Records are written under `out/records` as they complete when `out`
    /// is given; `progress` is called once per finished replicate.
    pub fn run(&self, out: Option<&Path>, progress: &(dyn Fn(&ReplicateRecord) + Sync)) -> Result<StudyReport, SimError> {
        self.validate()?;
        if let Some(dir) = out {
            for s in &self.scenarios {
                let d = dir.join("records").join(&s.name);
                std::fs::create_dir_all(&d).map_err(|e| SimError::io(&d, e))?;
            }
        }
        let jobs: Vec<(usize, usize)> =
            self.scenarios.iter().enumerate().flat_map(|(i, s)| (0..s.replicates).map(move |r| (i, r))).collect();
        let records = jobs
            .par_iter()
            .map(|&(i, r)| {
                let record = run_replicate(&self.scenarios[i], r, self.sampler.as_ref())?;
                if let Some(dir) = out {
                    write_record(dir, &record)?;
                }
                progress(&record);
                Ok(record)
            })
            .collect::<Result<Vec<_>, SimError>>()?;
        Ok(StudyReport { name: self.name.clone(), convention: self.dic_convention, records })
    }
}

fn fitted(families: &[Family]) -> Vec<FittedModel> {
    families.iter().map(|&f| FittedModel { label: f.name().to_string(), spec: ModelSpec::for_family(f) }).collect()
}

/// Generates replicate `index` and fits every model of the scenario to it.
/// Fitting failures are recorded in the returned record.
pub fn run_replicate(scenario: &ScenarioSpec, index: usize, sampler: Option<&ChainConfig>) -> Result<ReplicateRecord, SimError> {
    let rep = scenario.generate(index)?;
    let success_rate = rep.data.y().iter().sum::<u32>() as f64 / rep.data.len() as f64;
    let fits = scenario
        .models
        .iter()
        .enumerate()
        .map(|(m, fm)| {
            let seed = scenario.fit_seed(index, m);
            let mut config = sampler.cloned().unwrap_or_else(|| fm.spec.sampler().clone());
            config.seed = seed;
            match fit_model(&fm.spec, &rep.data, &config, &scenario.effects) {
                Ok((dic, lpml, effects, shapes)) => FitRecord {
                    label: fm.label.clone(),
                    family: fm.spec.family(),
                    seed,
                    dic: Some(dic),
                    lpml: Some(lpml),
                    effects,
                    shapes,
                    error: None,
                },
                Err(e) => FitRecord {
                    label: fm.label.clone(),
                    family: fm.spec.family(),
                    seed,
                    dic: None,
                    lpml: None,
                    effects: vec![],
                    shapes: vec![],
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ReplicateRecord {
        scenario: scenario.name.clone(),
        replicate: index,
        data_seed: scenario.data_seed(index),
        beta_true: rep.beta,
        success_rate,
        fits,
    })
}

type FitSummary = (Dic, f64, Vec<ParamSummary>, Vec<ShapeSummary>);

fn fit_model(spec: &ModelSpec, data: &Dataset, config: &ChainConfig, effects: &[EffectRequest]) -> Result<FitSummary, SimError> {
    let model = Model::new(spec.clone(), data.clone(), None)?;
    let chain = run_chain(&model, config)?;
    let criteria = dic(&model, &chain)?;
    let l = lpml(&model, &chain)?;
    let effects = effects
        .iter()
        .map(|req| {
            let e = covariate_effect(&model, &chain, &req.covariate, req.v0, req.v1)?;
            let name = format!("effect[{}: {} -> {}]", req.covariate, req.v0, req.v1);
            Ok(ParamSummary::from_draws(name, &e.draws, 0.95)?)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let shapes = spec
        .family()
        .shape_params()
        .iter()
        .map(|p| {
            let draws = chain.column(p.name()).expect("shape column");
            let below = draws.iter().filter(|&&v| v < 1.0).count() as f64 / draws.len() as f64;
            Ok(ShapeSummary { summary: ParamSummary::from_draws(p.name(), &draws, 0.95)?, prob_below_one: below })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok((criteria, l.lpml, effects, shapes))
}

fn write_record(dir: &Path, record: &ReplicateRecord) -> Result<(), SimError> {
    let path = dir.join("records").join(&record.scenario).join(format!("replicate_{:04}.json", record.replicate));
    let text = serde_json::to_string_pretty(record)?;
    std::fs::write(&path, text).map_err(|e| SimError::io(&path, e))
}

impl StudyReport {
    pub fn table1(&self) -> Vec<SummaryRow> {
        table1(&self.records)
    }

    pub fn win_rates(&self) -> Vec<WinRateRow> {
        win_rates(&self.records, self.convention)
    }

    pub fn dic_differences(&self) -> Vec<DicDifferenceRow> {
        dic_differences(&self.records, self.convention)
    }

    /// Writes the aggregate tables; records are expected to be written
    /// already (see [`StudySpec::run`]).
    pub fn write_tables(&self, dir: &Path) -> Result<(), SimError> {
        write_csv(&dir.join("table1.csv"), &self.table1())?;
        write_csv(&dir.join("win_rates.csv"), &self.win_rates())?;
        write_csv(&dir.join("dic_differences.csv"), &self.dic_differences())
    }

    /// Reads every record under `dir/records`.
    pub fn load(dir: &Path, name: impl Into<String>, convention: DicConvention) -> Result<StudyReport, SimError> {
        let root = dir.join("records");
        let mut records = Vec::new();
        let mut scenario_dirs: Vec<_> = std::fs::read_dir(&root)
            .map_err(|e| SimError::io(&root, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        scenario_dirs.sort();
        for sdir in scenario_dirs {
            let mut files: Vec<_> = std::fs::read_dir(&sdir)
                .map_err(|e| SimError::io(&sdir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "json"))
                .collect();
            files.sort();
            for f in files {
                let text = std::fs::read_to_string(&f).map_err(|e| SimError::io(&f, e))?;
                records.push(serde_json::from_str(&text)?);
            }
        }
        Ok(StudyReport { name: name.into(), convention, records })
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), SimError> {
    let mut wtr = csv::Writer::from_path(path)?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush().map_err(|e| SimError::io(path, e))
}
