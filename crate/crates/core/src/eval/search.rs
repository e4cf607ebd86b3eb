//! Random search with optional successive halving.
//!
//! Trial `i` samples its configuration from stream `i` of the seed, so the
//! schedule is fixed before anything runs. With halving over `n` rungs and
//! reduction factor `r`, rung `j` evaluates the surviving trials at budget
//! fraction `r^(j - n + 1)` and keeps the best `ceil(alive / r)` of them.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classic::{ModelKind, ParamValue, Params};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::rng::{self, domain};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Inclusive integer range.
    Int {
        low: i64,
        high: i64,
    },
    Real {
        low: f64,
        high: f64,
        #[serde(default)]
        log: bool,
    },
    Categorical {
        choices: Vec<ParamValue>,
    },
}

impl Domain {
    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = match self {
            Domain::Int { low, high } => low <= high,
            Domain::Real { low, high, log } => {
                low <= high && low.is_finite() && high.is_finite() && (!log || *low > 0.0)
            }
            Domain::Categorical { choices } => !choices.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(name, "empty or malformed search domain"))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParamValue {
        match self {
            Domain::Int { low, high } => ParamValue::Int(rng.random_range(*low..=*high)),
            Domain::Real { low, high, log } => {
                let v = if low == high {
                    *low
                } else if *log {
                    rng.random_range(low.ln()..=high.ln()).exp().clamp(*low, *high)
                } else {
                    rng.random_range(*low..=*high)
                };
                ParamValue::Real(v)
            }
            Domain::Categorical { choices } => choices[rng.random_range(0..choices.len())].clone(),
        }
    }

    pub fn contains(&self, v: &ParamValue) -> bool {
        match (self, v) {
            (Domain::Int { low, high }, ParamValue::Int(x)) => low <= x && x <= high,
            (Domain::Real { low, high, .. }, ParamValue::Real(x)) => low <= x && x <= high,
            (Domain::Categorical { choices }, v) => choices.contains(v),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchSpace {
    pub params: BTreeMap<String, Domain>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        self.params.iter().try_for_each(|(k, d)| d.validate(k))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Params {
        self.params.iter().map(|(k, d)| (k.clone(), d.sample(rng))).collect()
    }

    pub fn contains(&self, p: &Params) -> bool {
        p.len() == self.params.len() && self.params.iter().all(|(k, d)| p.get(k).is_some_and(|v| d.contains(v)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halving {
    pub rungs: usize,
    pub reduction: usize,
}

impl Default for Halving {
    fn default() -> Self {
        Halving { rungs: 3, reduction: 2 }
    }
}

impl Halving {
    pub fn fraction(&self, rung: usize) -> f64 {
        (self.reduction as f64).powi(rung as i32 - (self.rungs as i32 - 1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialStatus {
    Complete,
    Pruned { rung: usize },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub id: usize,
    pub params: Params,
    pub rung_scores: Vec<f64>,
    pub value: Option<f64>,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub best: Trial,
    pub trials: Vec<Trial>,
}

/// Maximises `objective(params, budget_fraction)` over `budget` sampled configurations.
pub fn random_search<F, E>(
    space: &SearchSpace,
    objective: F,
    budget: usize,
    seed: u64,
    halving: Option<Halving>,
    exec: &E,
) -> Result<SearchResult>
where
    F: Fn(&Params, f64) -> Result<f64> + Sync + Send,
    E: Executor,
{
    space.validate()?;
    if budget == 0 {
        return Err(Error::invalid("budget", "must be at least 1"));
    }
    let halving = halving.unwrap_or(Halving { rungs: 1, reduction: 2 });
    if halving.rungs == 0 || halving.reduction < 2 {
        return Err(Error::invalid("halving", "need rungs >= 1 and reduction >= 2"));
    }
    let mut trials: Vec<Trial> = (0..budget)
        .map(|id| Trial {
            id,
            params: space.sample(&mut rng::stream(seed, domain::SEARCH, id as u64)),
            rung_scores: Vec::new(),
            value: None,
            status: TrialStatus::Complete,
        })
        .collect();
    let mut alive: Vec<usize> = (0..budget).collect();
    for rung in 0..halving.rungs {
        let fraction = halving.fraction(rung);
        let scores = exec.map(alive.len(), |j| objective(&trials[alive[j]].params, fraction));
        let mut survivors = Vec::new();
        for (&id, score) in alive.iter().zip(scores) {
            match score {
                Ok(s) if s.is_finite() => {
                    trials[id].rung_scores.push(s);
                    survivors.push(id);
                }
                Ok(s) => {
                    trials[id].status = TrialStatus::Failed {
                        reason: alloc::format!("objective returned {s}"),
                    }
                }
                Err(e) => trials[id].status = TrialStatus::Failed { reason: e.to_string() },
            }
        }
        if rung + 1 < halving.rungs {
            let keep = survivors.len().div_ceil(halving.reduction);
            let mut ranked = survivors.clone();
            ranked.sort_by(|&a, &b| {
                let (sa, sb) = (trials[a].rung_scores[rung], trials[b].rung_scores[rung]);
                sb.total_cmp(&sa).then(a.cmp(&b))
            });
            for &id in &ranked[keep..] {
                trials[id].status = TrialStatus::Pruned { rung };
            }
            ranked.truncate(keep);
            ranked.sort_unstable();
            alive = ranked;
        } else {
            for &id in &survivors {
                trials[id].value = trials[id].rung_scores.last().copied();
            }
            alive = survivors;
        }
    }
    let best = alive
        .iter()
        .copied()
        .fold(None::<usize>, |best, id| match best {
            Some(b) if trials[b].value >= trials[id].value => Some(b),
            _ => Some(id),
        })
        .map(|id| trials[id].clone());
    match best {
        Some(best) => Ok(SearchResult { best, trials }),
        None => Err(Error::NoCompletedTrial {
            failed: trials
                .iter()
                .filter(|t| matches!(t.status, TrialStatus::Failed { .. }))
                .count(),
            pruned: trials
                .iter()
                .filter(|t| matches!(t.status, TrialStatus::Pruned { .. }))
                .count(),
        }),
    }
}

fn int(low: i64, high: i64) -> Domain {
    Domain::Int { low, high }
}

fn real(low: f64, high: f64, log: bool) -> Domain {
    Domain::Real { low, high, log }
}

/// Tuning ranges for each classical model family.
pub fn default_space(kind: ModelKind) -> SearchSpace {
    let entries: Vec<(&str, Domain)> = match kind {
        ModelKind::Knn => alloc::vec![
            ("n_neighbors", int(1, 50)),
            (
                "weights",
                Domain::Categorical {
                    choices: alloc::vec![ParamValue::Text("uniform".into()), ParamValue::Text("distance".into())],
                }
            ),
        ],
        ModelKind::Svm => alloc::vec![("c", real(1e-3, 1e3, true))],
        ModelKind::Forest => alloc::vec![
            ("n_estimators", int(10, 2000)),
            ("max_depth", int(3, 50)),
            ("min_samples_split", int(2, 20)),
            ("min_samples_leaf", int(1, 10)),
        ],
        ModelKind::BoostDepthwise => alloc::vec![
            ("n_estimators", int(10, 2000)),
            ("max_depth", int(3, 50)),
            ("learning_rate", real(1e-5, 0.3, true)),
            ("subsample", real(0.3, 1.0, false)),
            ("colsample_bytree", real(0.5, 1.0, false)),
            ("gamma", real(0.0, 5.0, false)),
            ("reg_alpha", real(0.0, 20.0, false)),
            ("reg_lambda", real(0.0, 20.0, false)),
            ("min_child_weight", int(1, 10)),
        ],
        ModelKind::BoostOblivious => alloc::vec![
            ("iterations", int(10, 2000)),
            ("depth", int(3, 10)),
            ("learning_rate", real(1e-5, 0.3, true)),
            ("l2_leaf_reg", real(1.0, 10.0, false)),
            ("border_count", int(32, 255)),
            ("bagging_temperature", real(0.0, 1.0, false)),
            ("random_strength", real(0.0, 10.0, false)),
        ],
    };
    SearchSpace {
        params: entries.into_iter().map(|(k, d)| (String::from(k), d)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn x_space() -> SearchSpace {
        SearchSpace {
            params: [(String::from("x"), int(1, 50))].into_iter().collect(),
        }
    }

    fn parabola(p: &Params, _: f64) -> Result<f64> {
        match p["x"] {
            ParamValue::Int(x) => Ok(-((x - 3) * (x - 3)) as f64),
            _ => unreachable!(),
        }
    }

    fn hit_rate(budget: usize, seeds: u64) -> f64 {
        let hits = (0..seeds)
            .filter(|&s| {
                let r = random_search(&x_space(), parabola, budget, s, None, &Sequential).unwrap();
                r.best.params["x"] == ParamValue::Int(3)
            })
            .count();
        hits as f64 / seeds as f64
    }

    #[test]
    fn singleton_budget() {
        let r = random_search(&x_space(), parabola, 1, 5, None, &Sequential).unwrap();
        assert_eq!(r.best.id, 0);
        assert_eq!(r.trials.len(), 1);
    }

    #[test]
    fn coverage_matches_analytic_probability() {
        // P(x = 3 sampled at least once) = 1 - (49/50)^budget.
        let p100 = 1.0 - (49.0f64 / 50.0).powi(100);
        assert!((hit_rate(100, 300) - p100).abs() < 0.06, "{p100}");
        let p250 = 1.0 - (49.0f64 / 50.0).powi(250);
        assert!(p250 >= 0.99);
        assert!(hit_rate(250, 300) >= 0.97);
    }

    #[test]
    fn best_dominates_and_schedule_is_reproducible() {
        let space = default_space(ModelKind::BoostDepthwise);
        let objective = |p: &Params, f: f64| -> Result<f64> {
            match (&p["learning_rate"], &p["max_depth"]) {
                (ParamValue::Real(lr), ParamValue::Int(d)) => Ok(f * (lr.ln() - (*d as f64 - 8.0).abs())),
                _ => unreachable!(),
            }
        };
        let a = random_search(&space, objective, 40, 9, Some(Halving::default()), &Sequential).unwrap();
        let b = random_search(&space, objective, 40, 9, Some(Halving::default()), &Sequential).unwrap();
        assert_eq!(a, b);
        for t in &a.trials {
            assert!(space.contains(&t.params));
            if let Some(v) = t.value {
                assert!(a.best.value.unwrap() >= v);
            }
        }
        let complete = a.trials.iter().filter(|t| t.status == TrialStatus::Complete).count();
        assert_eq!(complete, 10);
        let pruned_first = a
            .trials
            .iter()
            .filter(|t| t.status == TrialStatus::Pruned { rung: 0 })
            .count();
        assert_eq!(pruned_first, 20);
    }

    #[test]
    fn failures_do_not_stop_the_search() {
        let objective = |p: &Params, _: f64| -> Result<f64> {
            match p["x"] {
                ParamValue::Int(x) if x % 2 == 0 => Err(Error::invalid("x", "even")),
                ParamValue::Int(x) => Ok(x as f64),
                _ => unreachable!(),
            }
        };
        let r = random_search(&x_space(), objective, 30, 3, None, &Sequential).unwrap();
        assert!(r.trials.iter().any(|t| matches!(t.status, TrialStatus::Failed { .. })));
        assert!(matches!(r.best.params["x"], ParamValue::Int(x) if x % 2 == 1));
        let all_fail = |_: &Params, _: f64| -> Result<f64> { Err(Error::invalid("x", "no")) };
        assert!(matches!(
            random_search(&x_space(), all_fail, 3, 3, None, &Sequential),
            Err(Error::NoCompletedTrial { failed: 3, pruned: 0 })
        ));
    }

    #[test]
    fn halving_fractions() {
        let h = Halving { rungs: 3, reduction: 2 };
        assert_eq!([h.fraction(0), h.fraction(1), h.fraction(2)], [0.25, 0.5, 1.0]);
    }
}
