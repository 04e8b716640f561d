use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::study::ReplicateRecord;
use crate::evaluation::DicConvention;

/// Mean and spread of one quantity for one model over the successful
/// replicates of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub model: String,
    /// `dic`, `lpml`, an effect name, or a shape parameter name (posterior
    /// median) with `P(<1)` rows for `prob_below_one[..]`.
    pub quantity: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
    pub n_failed: usize,
}

/// Share of successful replicates in which a model had the lowest DIC under
/// the given convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinRateRow {
    pub scenario: String,
    pub model: String,
    pub wins: usize,
    pub n: usize,
    pub percent: f64,
    pub n_failed: usize,
    pub convention: DicConvention,
}

/// `DIC(model) - DIC(reference)` over successful replicates; positive means
/// the reference (the scenario's first model) fits better.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DicDifferenceRow {
    pub scenario: String,
    pub reference: String,
    pub model: String,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub n: usize,
    pub n_failed: usize,
    pub convention: DicConvention,
}

/// Successful and failed records per scenario, scenarios in name order.
fn by_scenario(records: &[ReplicateRecord]) -> BTreeMap<&str, (Vec<&ReplicateRecord>, usize)> {
    let mut map: BTreeMap<&str, (Vec<&ReplicateRecord>, usize)> = BTreeMap::new();
    for r in records {
        let entry = map.entry(r.scenario.as_str()).or_default();
        if r.failed() {
            entry.1 += 1;
        } else {
            entry.0.push(r);
        }
    }
    for (ok, _) in map.values_mut() {
        ok.sort_by_key(|r| r.replicate);
    }
    map
}

fn labels(records: &[&ReplicateRecord]) -> Vec<String> {
    records.first().map(|r| r.fits.iter().map(|f| f.label.clone()).collect()).unwrap_or_default()
}

/// Mean and sample standard deviation, summed in sorted order so the result
/// does not depend on record order.
fn mean_sd(values: &mut [f64]) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    let sd = if values.len() > 1 { (dev.iter().sum::<f64>() / (n - 1.0)).sqrt() } else { f64::NAN };
    (mean, sd)
}

pub fn table1(records: &[ReplicateRecord]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for (scenario, (ok, n_failed)) in by_scenario(records) {
        for label in labels(&ok) {
            let fits: Vec<_> = ok.iter().filter_map(|r| r.fit(&label)).collect();
            let mut quantities: Vec<(String, Vec<f64>)> = vec![
                ("dic".into(), fits.iter().filter_map(|f| f.dic.map(|d| d.dic)).collect()),
                ("pd".into(), fits.iter().filter_map(|f| f.dic.map(|d| d.pd)).collect()),
                ("dic_pv".into(), fits.iter().filter_map(|f| f.dic.map(|d| d.dic_pv)).collect()),
                ("lpml".into(), fits.iter().filter_map(|f| f.lpml).collect()),
            ];
            if let Some(first) = fits.first() {
                for (j, e) in first.effects.iter().enumerate() {
                    quantities.push((e.name.clone(), fits.iter().map(|f| f.effects[j].mean).collect()));
                }
                for (j, s) in first.shapes.iter().enumerate() {
                    let name = &s.summary.name;
                    quantities.push((name.clone(), fits.iter().map(|f| f.shapes[j].summary.median).collect()));
                    quantities.push((format!("prob_below_one[{name}]"), fits.iter().map(|f| f.shapes[j].prob_below_one).collect()));
                }
            }
            for (quantity, mut values) in quantities {
                let (mean, sd) = mean_sd(&mut values);
                rows.push(SummaryRow {
                    scenario: scenario.to_string(),
                    model: label.clone(),
                    quantity,
                    mean,
                    sd,
                    n: values.len(),
                    n_failed,
                });
            }
        }
    }
    rows
}

pub fn win_rates(records: &[ReplicateRecord], convention: DicConvention) -> Vec<WinRateRow> {
    let mut rows = Vec::new();
    for (scenario, (ok, n_failed)) in by_scenario(records) {
        let labels = labels(&ok);
        let mut wins = vec![0usize; labels.len()];
        for r in &ok {
            let dics: Vec<f64> =
                labels.iter().map(|l| r.fit(l).and_then(|f| f.dic).map_or(f64::INFINITY, |d| convention.value(&d))).collect();
            // first model wins ties
            let best = (0..dics.len()).fold(0, |b, i| if dics[i] < dics[b] { i } else { b });
            wins[best] += 1;
        }
        for (label, w) in labels.iter().zip(wins) {
            rows.push(WinRateRow {
                scenario: scenario.to_string(),
                model: label.clone(),
                wins: w,
                n: ok.len(),
                percent: 100.0 * w as f64 / ok.len() as f64,
                n_failed,
                convention,
            });
        }
    }
    rows
}

pub fn dic_differences(records: &[ReplicateRecord], convention: DicConvention) -> Vec<DicDifferenceRow> {
    let mut rows = Vec::new();
    for (scenario, (ok, n_failed)) in by_scenario(records) {
        let labels = labels(&ok);
        let Some(reference) = labels.first() else { continue };
        for label in &labels[1..] {
            let mut diffs: Vec<f64> =
                ok.iter().filter_map(|r| Some(convention.value(&r.fit(label)?.dic?) - convention.value(&r.fit(reference)?.dic?))).collect();
            let (mean, sd) = mean_sd(&mut diffs);
            rows.push(DicDifferenceRow {
                scenario: scenario.to_string(),
                reference: reference.clone(),
                model: label.clone(),
                mean,
                sd,
                se: sd / (diffs.len() as f64).sqrt(),
                n: diffs.len(),
                n_failed,
                convention,
            });
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::Dic;
    use crate::link::Family;
    use crate::sim::study::FitRecord;

    fn fit(label: &str, dic: Option<f64>) -> FitRecord {
        FitRecord {
            label: label.into(),
            family: Family::Logit,
            seed: 0,
            dic: dic.map(|d| Dic { dic: d, dbar: d, pd: 0.0, d_at_mean: d, pv: 0.0, dic_pv: d, n_nonfinite: 0 }),
            lpml: dic.map(|d| -d / 2.0),
            effects: vec![],
            shapes: vec![],
            error: if dic.is_none() { Some("stuck".into()) } else { None },
        }
    }

    fn record(rep: usize, dics: &[(&str, Option<f64>)]) -> ReplicateRecord {
        ReplicateRecord {
            scenario: "s".into(),
            replicate: rep,
            data_seed: rep as u64,
            beta_true: vec![],
            success_rate: 0.5,
            fits: dics.iter().map(|&(l, d)| fit(l, d)).collect(),
        }
    }

    #[test]
    fn wins_differences_and_failures() {
        let records = vec![
            record(0, &[("a", Some(10.0)), ("b", Some(12.0))]),
            record(1, &[("a", Some(11.0)), ("b", Some(10.5))]),
            record(2, &[("a", Some(9.0)), ("b", Some(9.5))]),
            record(3, &[("a", Some(9.0)), ("b", None)]),
        ];
        let w = win_rates(&records, DicConvention::PlugIn);
        assert_eq!((w[0].wins, w[1].wins, w[0].n, w[0].n_failed), (2, 1, 3, 1));
        let d = dic_differences(&records, DicConvention::PlugIn);
        assert_eq!(d.len(), 1);
        assert!((d[0].mean - (2.0 - 0.5 + 0.5) / 3.0).abs() < 1e-12);
        // permuting records leaves aggregates unchanged
        let mut shuffled = records.clone();
        shuffled.reverse();
        assert_eq!(table1(&shuffled), table1(&records));
        assert_eq!(dic_differences(&shuffled, DicConvention::PlugIn), d);
    }

    #[test]
    fn single_model_wins_everything() {
        let records: Vec<_> = (0..3).map(|i| record(i, &[("only", Some(5.0 + i as f64))])).collect();
        let w = win_rates(&records, DicConvention::PlugIn);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].percent, 100.0);
    }
}
