//! Pipeline stages over a run directory.
//!
//! Each stage writes into its own subdirectory and reads only what earlier
//! stages wrote. A stage whose fingerprint (config plus upstream outputs)
//! and outputs match the manifest is skipped.

mod data;
mod evaluate;
mod features;
pub mod manifest;
mod report;
mod sequence;
mod train;

pub use evaluate::{Family, ModelResult, METRICS_FILE};
pub use manifest::{RunManifest, StageRecord, MANIFEST};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use neurolos_core::Executor;
use sha2::{Digest, Sha256};

use crate::config::{DataSource, ExperimentConfig};
use crate::error::{FailureKind, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Generate,
    Ingest,
    Marts,
    Features,
    Tune,
    Train,
    Evaluate,
    Importance,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 9] = [
        Stage::Generate,
        Stage::Ingest,
        Stage::Marts,
        Stage::Features,
        Stage::Tune,
        Stage::Train,
        Stage::Evaluate,
        Stage::Importance,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Ingest => "ingest",
            Stage::Marts => "marts",
            Stage::Features => "features",
            Stage::Tune => "tune",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Importance => "importance",
            Stage::Report => "report",
        }
    }

    /// Output directory below the run root.
    pub fn dir(self) -> &'static str {
        match self {
            Stage::Generate => "raw",
            Stage::Train => "models",
            Stage::Evaluate => "evaluation",
            other => other.name(),
        }
    }

    fn failure(self) -> FailureKind {
        match self {
            Stage::Tune | Stage::Train => FailureKind::Training,
            _ => FailureKind::Data,
        }
    }

    pub fn parse(name: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// `all`, or a comma-separated list of stage names.
pub fn parse_stages(selector: &str) -> Result<Vec<Stage>> {
    let mut out = Vec::new();
    for part in selector.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if part == "all" {
            out.extend(Stage::ALL);
            continue;
        }
        match Stage::parse(part) {
            Some(s) => out.push(s),
            None => {
                let names: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).collect();
                bail!("unknown stage `{part}`; expected `all` or some of {}", names.join(", "));
            }
        }
    }
    if out.is_empty() {
        bail!("no stages selected");
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Everything a stage needs.
pub struct Run<'a, E: Executor> {
    pub cfg: &'a ExperimentConfig,
    pub root: PathBuf,
    pub exec: &'a E,
    /// Where the marts stage writes `CREATE TABLE` statements.
    pub emit_ddl: Option<PathBuf>,
}

impl<E: Executor> Run<'_, E> {
    pub fn dir(&self, stage: Stage) -> PathBuf {
        self.root.join(stage.dir())
    }

    pub fn raw_dir(&self) -> PathBuf {
        match &self.cfg.data {
            DataSource::RawDir(p) => p.clone(),
            DataSource::Synthetic(_) => self.dir(Stage::Generate),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Ran { seconds: f64 },
    Skipped,
}

fn fingerprint<E: Executor>(
    run: &Run<'_, E>,
    stage: Stage,
    upstream: &BTreeMap<Stage, BTreeMap<String, String>>,
) -> Result<String> {
    let mut h = Sha256::new();
    h.update(stage.name());
    h.update([0]);
    h.update(run.cfg.canonical());
    for (s, files) in upstream.range(..stage) {
        h.update(s.name());
        for (name, sum) in files {
            h.update([0]);
            h.update(name);
            h.update([1]);
            h.update(sum);
        }
    }
    if let (Stage::Ingest, DataSource::RawDir(dir)) = (stage, &run.cfg.data) {
        for (name, sum) in manifest::hash_files(dir, dir)? {
            h.update(name);
            h.update(sum);
        }
    }
    Ok(hex::encode(h.finalize()))
}

fn execute<E: Executor>(run: &Run<'_, E>, stage: Stage) -> Result<()> {
    match stage {
        Stage::Generate => data::generate(run),
        Stage::Ingest => data::ingest(run),
        Stage::Marts => data::marts(run),
        Stage::Features => features::features(run),
        Stage::Tune => train::tune(run),
        Stage::Train => train::train(run),
        Stage::Evaluate => evaluate::evaluate(run),
        Stage::Importance => evaluate::importance(run),
        Stage::Report => report::report(run),
    }
}

/// Runs `stages` in pipeline order and keeps the manifest current, also
/// after a failure.
pub fn run_stages<E: Executor>(run: &Run<'_, E>, stages: &[Stage]) -> Result<Vec<(Stage, Outcome)>, RunError> {
    let data_err = |e: anyhow::Error| RunError::new(FailureKind::Data, e);
    std::fs::create_dir_all(&run.root)
        .with_context(|| format!("creating {}", run.root.display()))
        .map_err(data_err)?;
    let mut manifest = RunManifest::load(&run.root).map_err(data_err)?.unwrap_or_default();
    manifest.config_sha256 = manifest::sha256_hex(run.cfg.canonical().as_bytes());
    manifest.versions = manifest::Versions::default();

    let mut on_disk = BTreeMap::new();
    for s in Stage::ALL {
        on_disk.insert(s, manifest::hash_files(&run.root, &run.dir(s)).map_err(data_err)?);
    }

    let mut stages = stages.to_vec();
    stages.sort();
    stages.dedup();
    let mut outcomes = Vec::new();
    for stage in stages {
        if let Some(missing) = Stage::ALL
            .into_iter()
            .take_while(|&s| s < stage)
            .find(|s| !manifest.stages.contains_key(s.name()))
        {
            let err = anyhow::anyhow!(
                "stage `{}` needs the outputs of `{}`; run that stage first",
                stage.name(),
                missing.name()
            );
            manifest.save(&run.root).map_err(data_err)?;
            return Err(data_err(err));
        }
        let fp = fingerprint(run, stage, &on_disk).map_err(data_err)?;
        let current = &on_disk[&stage];
        if manifest
            .stages
            .get(stage.name())
            .is_some_and(|r| r.fingerprint == fp && &r.outputs == current)
        {
            log::info!("{}: up to date", stage.name());
            if stage == Stage::Marts {
                data::write_ddl(run).map_err(data_err)?;
            }
            outcomes.push((stage, Outcome::Skipped));
            continue;
        }

        log::info!("{}: running", stage.name());
        let dir = run.dir(stage);
        if dir.exists() {
            std::fs::remove_dir_all(&dir)
                .with_context(|| format!("clearing {}", dir.display()))
                .map_err(data_err)?;
        }
        manifest.stages.remove(stage.name());
        // Downstream records no longer describe what is on disk.
        for s in Stage::ALL.into_iter().filter(|&s| s > stage) {
            if let Some(r) = manifest.stages.get_mut(s.name()) {
                r.fingerprint.clear();
            }
        }
        let start = Instant::now();
        let result = execute(run, stage).with_context(|| format!("stage `{}` failed", stage.name()));
        let outputs = manifest::hash_files(&run.root, &dir).map_err(data_err)?;
        on_disk.insert(stage, outputs.clone());
        if let Err(e) = result {
            manifest.save(&run.root).map_err(data_err)?;
            return Err(RunError::from_stage(stage.failure(), e));
        }
        let seconds = start.elapsed().as_secs_f64();
        log::info!("{}: done in {seconds:.1}s", stage.name());
        manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                fingerprint: fp,
                seconds,
                outputs,
            },
        );
        manifest.save(&run.root).map_err(data_err)?;
        outcomes.push((stage, Outcome::Ran { seconds }));
    }
    manifest.save(&run.root).map_err(data_err)?;
    Ok(outcomes)
}

pub(crate) fn model_file(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_selector_orders_and_rejects() {
        assert_eq!(
            parse_stages("report, marts,marts").unwrap(),
            [Stage::Marts, Stage::Report]
        );
        assert_eq!(parse_stages("all").unwrap().len(), 9);
        let err = parse_stages("marts,fit").unwrap_err().to_string();
        assert!(err.contains("`fit`"), "{err}");
        assert!(parse_stages(" , ").is_err());
    }
}
