//! Seeded synthetic cohorts shaped like the MIMIC-IV tables used for ICU
//! length-of-stay modelling.
//!
//! Every stay has a latent severity `s ~ N(0, 1)`. Log length of stay is
//! normal with mean `mu + rho * sigma * s` and standard deviation
//! `sigma * sqrt(1 - rho^2)`, where `rho = cbrt(signal_strength)`; the
//! marginal LOS distribution is therefore the same log-normal for every
//! signal strength. Severity also pushes test values away from their normal
//! range, fading as the stay approaches discharge. Because the conditional
//! law of LOS given severity is known in closed form, the generator also
//! emits each admission's Bayes class distribution.

mod catalog;
mod planted;

pub use catalog::{test_abbreviations, Schedule, TestSpec, TESTS, VENTILATOR_MODE, VENTILATOR_MODES};
pub use planted::{planted_tabular, planted_windows};

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use chrono::{NaiveDate, NaiveDateTime, TimeDelta};
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::los::BinEdges;
use crate::rng::{self, StreamRng};
use crate::tables::{
    days_between, Admission, ChartEvent, ChartValue, DItem, DiagnosisIcd, IcuStay, Patient, RawTables,
};

/// Mix of primary-diagnosis groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcdMix {
    pub i61: f64,
    pub i63: f64,
    pub g41: f64,
}

impl Default for IcdMix {
    fn default() -> Self {
        IcdMix {
            i61: 0.35,
            i63: 0.5,
            g41: 0.15,
        }
    }
}

/// Log-normal LOS parameters (days).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosShape {
    pub mu: f64,
    pub sigma: f64,
}

impl Default for LosShape {
    fn default() -> Self {
        // Median 3.2 days: roughly 32% short, 46% medium, 22% long.
        LosShape {
            mu: 1.163_150_809_805_681,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSpec {
    pub n_patients: usize,
    pub seed: u64,
    pub signal_strength: f64,
    pub missingness_rate: f64,
    pub events_per_stay_mean: f64,
    pub icd_mix: IcdMix,
    pub los_shape: LosShape,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            n_patients: 1000,
            seed: 42,
            signal_strength: 0.8,
            missingness_rate: 0.2,
            events_per_stay_mean: 40.0,
            icd_mix: IcdMix::default(),
            los_shape: LosShape::default(),
        }
    }
}

impl CohortSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_patients < 1 {
            return Err(Error::invalid("n_patients", "must be at least 1"));
        }
        let unit = |field: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(field, alloc::format!("must lie in [0, 1], got {v}")))
            }
        };
        unit("signal_strength", self.signal_strength)?;
        unit("missingness_rate", self.missingness_rate)?;
        if !(self.events_per_stay_mean > 0.0 && self.events_per_stay_mean.is_finite()) {
            return Err(Error::invalid("events_per_stay_mean", "must be positive"));
        }
        let m = self.icd_mix;
        for (name, v) in [("icd_mix.i61", m.i61), ("icd_mix.i63", m.i63), ("icd_mix.g41", m.g41)] {
            unit(name, v)?;
        }
        let total = m.i61 + m.i63 + m.g41;
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "icd_mix",
                alloc::format!("proportions sum to {total}, not 1"),
            ));
        }
        if !(self.los_shape.sigma > 0.0 && self.los_shape.sigma.is_finite()) {
            return Err(Error::invalid("los_shape.sigma", "must be positive"));
        }
        if !self.los_shape.mu.is_finite() {
            return Err(Error::invalid("los_shape.mu", "must be finite"));
        }
        Ok(())
    }

    /// Correlation between severity and log LOS.
    pub fn coupling(&self) -> f64 {
        self.signal_strength.cbrt()
    }

    /// Bayes class distribution of LOS given severity.
    pub fn class_distribution(&self, severity: f64, edges: &BinEdges) -> [f64; 3] {
        let rho = self.coupling();
        let sigma = self.los_shape.sigma;
        let mean = self.los_shape.mu + rho * sigma * severity;
        let sd = sigma * (1.0 - rho * rho).max(0.0).sqrt();
        let lo = edges.short_upper.ln();
        let hi = edges.long_lower.ln();
        if sd <= 0.0 {
            let mut p = [0.0; 3];
            p[edges.bin_nonnegative(mean.exp()).code()] = 1.0;
            return p;
        }
        let p_short = normal_cdf((lo - mean) / sd);
        let p_long = normal_cdf((mean - hi) / sd);
        [p_short, 1.0 - p_short - p_long, p_long]
    }
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissionTruth {
    pub hadm_id: i64,
    /// Bayes probabilities of short / medium / long.
    pub probabilities: [f64; 3],
    pub severity: f64,
}

impl AdmissionTruth {
    /// Argmax class code, ties to the lowest code.
    pub fn bayes_class(&self) -> usize {
        crate::classic::argmax(&self.probabilities)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub admissions: Vec<AdmissionTruth>,
}

impl GroundTruth {
    /// Accuracy of predicting every admission's argmax Bayes class against
    /// the realised class of its stays.
    pub fn bayes_accuracy(&self, raw: &RawTables, edges: &BinEdges) -> f64 {
        let truth: alloc::collections::BTreeMap<i64, usize> =
            self.admissions.iter().map(|a| (a.hadm_id, a.bayes_class())).collect();
        let mut hits = 0usize;
        let mut total = 0usize;
        for stay in &raw.icustays {
            if let (Some(&pred), Ok(class)) = (truth.get(&stay.hadm_id), edges.bin(stay.los)) {
                total += 1;
                hits += usize::from(pred == class.code());
            }
        }
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64
        }
    }
}

struct PatientRecords {
    patient: Patient,
    admission: Admission,
    stay: IcuStay,
    diagnoses: Vec<DiagnosisIcd>,
    events: Vec<ChartEvent>,
    truth: AdmissionTruth,
}

/// Generates a cohort sequentially. See [`generate_cohort_with`].
pub fn generate_cohort(spec: &CohortSpec) -> Result<(RawTables, GroundTruth)> {
    generate_cohort_with(spec, &Sequential)
}

/// Generates a cohort; each patient draws from its own stream, so the tables
/// do not depend on the executor.
pub fn generate_cohort_with<E: Executor>(spec: &CohortSpec, exec: &E) -> Result<(RawTables, GroundTruth)> {
    spec.validate()?;
    let edges = BinEdges::default();
    let records = exec.map(spec.n_patients, |i| generate_patient(spec, &edges, i));

    let mut raw = RawTables {
        d_items: dictionary(),
        ..RawTables::default()
    };
    let mut truth = GroundTruth::default();
    for r in records {
        raw.patients.push(r.patient);
        raw.admissions.push(r.admission);
        raw.icustays.push(r.stay);
        raw.diagnoses_icd.extend(r.diagnoses);
        raw.chartevents.extend(r.events);
        truth.admissions.push(r.truth);
    }
    Ok((raw, truth))
}

/// The `d_items` rows for every generated test.
pub fn dictionary() -> Vec<DItem> {
    let mut items: Vec<DItem> = TESTS
        .iter()
        .map(|t| DItem {
            itemid: t.itemid,
            label: t.label.to_string(),
            abbreviation: t.abbreviation.to_string(),
            lownormalvalue: t.bounds.map(|b| b.0),
            highnormalvalue: t.bounds.map(|b| b.1),
            category: t.category.to_string(),
            unitname: t.unit.map(|u| u.to_string()),
        })
        .collect();
    items.sort_by_key(|d| d.itemid);
    items
}

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, options: &[(&'a str, f64)]) -> &'a str {
    let total: f64 = options.iter().map(|o| o.1).sum();
    let mut u = rng.random::<f64>() * total;
    for &(name, w) in options {
        if u < w {
            return name;
        }
        u -= w;
    }
    options[options.len() - 1].0
}

fn pick_uniform<'a, R: Rng + ?Sized>(rng: &mut R, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

fn at(date: NaiveDate, seconds: i64) -> NaiveDateTime {
    date.and_hms_opt(0, 0, 0).expect("midnight exists") + TimeDelta::seconds(seconds)
}

fn generate_patient(spec: &CohortSpec, edges: &BinEdges, index: usize) -> PatientRecords {
    let mut rng: StreamRng = rng::stream(spec.seed, rng::domain::COHORT, index as u64);
    let ordinal = index as i64 + 1;
    let subject_id = 10_000_000 + ordinal;
    let hadm_id = 20_000_000 + ordinal;
    let stay_id = 30_000_000 + ordinal;

    let severity: f64 = rng.sample(StandardNormal);
    let eps: f64 = rng.sample(StandardNormal);
    let rho = spec.coupling();
    let sigma = spec.los_shape.sigma;
    let log_los = spec.los_shape.mu + rho * sigma * severity + sigma * (1.0 - rho * rho).max(0.0).sqrt() * eps;
    let los_seconds = ((log_los.exp() * 86_400.0).round() as i64).clamp(600, 400 * 86_400);

    let anchor_year = rng.random_range(2110..=2185i64);
    let age_draw: f64 = rng.sample(StandardNormal);
    let anchor_age = (65.0 + 14.0 * age_draw).round().clamp(18.0, 91.0) as i64;
    let gender = pick(&mut rng, &catalog::GENDERS).to_string();
    let year_group = pick_uniform(&mut rng, &catalog::YEAR_GROUPS).to_string();

    let day = rng.random_range(1..=365u32);
    let admit_date = NaiveDate::from_yo_opt(anchor_year as i32, day).expect("valid ordinal day");
    let admittime = at(admit_date, rng.random_range(0..86_400i64));
    let intime = admittime + TimeDelta::seconds(rng.random_range(0..6 * 3600i64));
    let outtime = intime + TimeDelta::seconds(los_seconds);
    let dischtime = outtime + TimeDelta::seconds(rng.random_range(43_200..5 * 86_400i64));
    let death_p = (0.06 * (1.0 + spec.signal_strength * severity)).clamp(0.0, 0.5);
    let deathtime = (rng.random::<f64>() < death_p).then_some(dischtime);

    let careunit = pick(&mut rng, &catalog::CAREUNITS).to_string();
    let last_careunit = if rng.random::<f64>() < 0.85 {
        careunit.clone()
    } else {
        pick(&mut rng, &catalog::CAREUNITS).to_string()
    };

    let admission = Admission {
        subject_id,
        hadm_id,
        admittime,
        dischtime,
        deathtime,
        insurance: pick(&mut rng, &catalog::INSURANCE).to_string(),
        language: pick(&mut rng, &catalog::LANGUAGE).to_string(),
        marital_status: pick(&mut rng, &catalog::MARITAL).to_string(),
        race: pick(&mut rng, &catalog::RACE).to_string(),
    };
    let patient = Patient {
        subject_id,
        gender,
        anchor_age,
        anchor_year,
        anchor_year_group: year_group,
        dod: deathtime.map(|d| d.date()),
    };
    let stay = IcuStay {
        stay_id,
        hadm_id,
        first_careunit: careunit,
        last_careunit,
        intime,
        outtime,
        los: days_between(intime, outtime),
    };

    let diagnoses = diagnoses(&mut rng, spec, hadm_id);
    let events = chart_events(&mut rng, spec, &stay, severity);
    let truth = AdmissionTruth {
        hadm_id,
        probabilities: spec.class_distribution(severity, edges),
        severity,
    };
    PatientRecords {
        patient,
        admission,
        stay,
        diagnoses,
        events,
        truth,
    }
}

fn diagnoses<R: Rng + ?Sized>(rng: &mut R, spec: &CohortSpec, hadm_id: i64) -> Vec<DiagnosisIcd> {
    let u: f64 = rng.random();
    let mix = spec.icd_mix;
    let group: &[&str] = if u < mix.i61 {
        &catalog::ICD_I61
    } else if u < mix.i61 + mix.i63 {
        &catalog::ICD_I63
    } else {
        &catalog::ICD_G41
    };
    let mut out = alloc::vec![DiagnosisIcd {
        hadm_id,
        seq_num: 1,
        icd_code: pick_uniform(rng, group).to_string(),
        icd_version: 10,
    }];
    let n_secondary = rng.random_range(0..=3usize);
    for (k, idx) in rng::sample_without_replacement(rng, catalog::ICD_SECONDARY.len(), n_secondary)
        .into_iter()
        .enumerate()
    {
        out.push(DiagnosisIcd {
            hadm_id,
            seq_num: k as i64 + 2,
            icd_code: catalog::ICD_SECONDARY[idx].to_string(),
            icd_version: 10,
        });
    }
    out
}

fn chart_events<R: Rng + ?Sized>(rng: &mut R, spec: &CohortSpec, stay: &IcuStay, severity: f64) -> Vec<ChartEvent> {
    let duration = (stay.outtime - stay.intime).num_seconds();
    let expected_los = (spec.los_shape.mu + 0.5 * spec.los_shape.sigma * spec.los_shape.sigma).exp();
    let rate = ((spec.events_per_stay_mean - 1.0).max(0.0) * stay.los / expected_los).min(20_000.0);
    let extra = if rate > 0.0 {
        Poisson::new(rate).map(|p| p.sample(rng) as usize).unwrap_or(0)
    } else {
        0
    };
    let mut offsets: Vec<i64> = (0..1 + extra).map(|_| rng.random_range(0..duration)).collect();
    offsets.sort_unstable();

    let signal = spec.signal_strength;
    let mut events = Vec::new();
    for offset in offsets {
        let charttime = stay.intime + TimeDelta::seconds(offset);
        let remaining = (duration - offset) as f64 / duration as f64;
        // Severity drives abnormality; it recedes towards discharge.
        let drive = signal * (severity + 0.75 * (remaining - 0.5));
        for test in TESTS.iter() {
            if rng.random::<f64>() >= test.group.probability() {
                continue;
            }
            let noise: f64 = rng.sample(StandardNormal);
            if rng.random::<f64>() < spec.missingness_rate {
                continue;
            }
            let value = match test.bounds {
                Some((lo, hi)) => {
                    let center = 0.5 * (lo + hi);
                    let half = 0.5 * (hi - lo);
                    let v = center + half * (test.direction * test.sensitivity * drive + test.noise * noise);
                    ChartValue::Number(round_to(v.clamp(test.clamp.0, test.clamp.1), test.decimals))
                }
                None => {
                    let code = (4.0 + 4.0 * drive + 2.5 * noise)
                        .round()
                        .clamp(test.clamp.0, test.clamp.1);
                    ChartValue::Text(VENTILATOR_MODES[code as usize].to_string())
                }
            };
            events.push(ChartEvent {
                stay_id: stay.stay_id,
                hadm_id: stay.hadm_id,
                charttime,
                itemid: test.itemid,
                value,
                valueuom: test.unit.map(|u| u.to_string()),
            });
        }
    }
    events.sort_by_key(|e| (e.charttime, e.itemid));
    events
}

/// Labels a stay with `String` names of its generated tests.
pub fn generated_tests() -> Vec<String> {
    test_abbreviations().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    fn small(n: usize, seed: u64) -> CohortSpec {
        CohortSpec {
            n_patients: n,
            seed,
            events_per_stay_mean: 12.0,
            ..CohortSpec::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_cohort(&small(10, 7)).unwrap();
        let b = generate_cohort(&small(10, 7)).unwrap();
        assert_eq!(a, b);
        let c = generate_cohort(&small(10, 8)).unwrap();
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn rejects_invalid_specs_naming_field() {
        let mut s = small(0, 1);
        assert!(matches!(s.validate(), Err(Error::Validation { ref field, .. }) if field == "n_patients"));
        s = small(5, 1);
        s.icd_mix.g41 = 0.3;
        assert!(matches!(s.validate(), Err(Error::Validation { ref field, .. }) if field == "icd_mix"));
        s = small(5, 1);
        s.missingness_rate = 1.5;
        assert!(matches!(s.validate(), Err(Error::Validation { ref field, .. }) if field == "missingness_rate"));
    }

    #[test]
    fn tables_are_consistent() {
        let (raw, truth) = generate_cohort(&small(60, 3)).unwrap();
        raw.validate().unwrap();
        let items: BTreeSet<i64> = raw.d_items.iter().map(|d| d.itemid).collect();
        assert!(raw.chartevents.iter().all(|e| items.contains(&e.itemid)));
        for s in &raw.icustays {
            assert!(s.intime < s.outtime);
            assert_eq!(s.los, (s.outtime - s.intime).num_seconds() as f64 / 86_400.0);
        }
        for a in &raw.admissions {
            let primary = raw
                .diagnoses_icd
                .iter()
                .filter(|d| d.hadm_id == a.hadm_id && d.seq_num == 1)
                .count();
            assert_eq!(primary, 1);
        }
        for t in &truth.admissions {
            let sum: f64 = t.probabilities.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(t.probabilities.iter().all(|p| *p >= 0.0));
        }
        for e in &raw.chartevents {
            let stay = raw.icustays.iter().find(|s| s.stay_id == e.stay_id).unwrap();
            assert!(stay.intime <= e.charttime && e.charttime < stay.outtime);
        }
    }

    #[test]
    fn zero_signal_gives_prior_everywhere() {
        let spec = CohortSpec {
            signal_strength: 0.0,
            ..small(30, 5)
        };
        let (_, truth) = generate_cohort(&spec).unwrap();
        let first = truth.admissions[0].probabilities;
        for t in &truth.admissions {
            for (p, q) in t.probabilities.iter().zip(&first) {
                assert!((p - q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn missingness_drops_observations() {
        let base = small(40, 9);
        let full = generate_cohort(&CohortSpec {
            missingness_rate: 0.0,
            ..base.clone()
        })
        .unwrap()
        .0;
        let half = generate_cohort(&CohortSpec {
            missingness_rate: 0.5,
            ..base
        })
        .unwrap()
        .0;
        let ratio = half.chartevents.len() as f64 / full.chartevents.len() as f64;
        assert!((ratio - 0.5).abs() < 0.08, "ratio {ratio}");
    }
}
