//! Run directories: staged writes, config-hash headers and overwrite checks.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lorentz_core::{PathFunction, TrajectoryRecord};
use serde::Serialize;

/// Bumped whenever a CSV column changes.
pub const FORMAT_VERSION: u32 = 1;

pub const RECORD_COLUMNS: &str = "k,kappa,S,L,crossed,alpha,position";

/// Identifies the run in every file it writes.
#[derive(Clone, Debug)]
pub struct Stamp {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Stamp {
    fn header(&self, what: &str) -> String {
        format!(
            "# lorentz-wall v{FORMAT_VERSION} {what} command={} seed={} config_hash={}\n",
            self.command, self.seed, self.config_hash
        )
    }
}

/// Files of one run are written into a sibling staging directory and moved
/// into place by [`RunDir::commit`]; dropping an uncommitted run deletes it.
pub struct RunDir {
    target: PathBuf,
    staging: PathBuf,
    stamp: Stamp,
    committed: bool,
}

impl RunDir {
    pub fn create(target: &Path, stamp: Stamp) -> Result<Self> {
        check_target(target, &stamp)?;
        let name = target
            .file_name()
            .with_context(|| format!("output directory {} has no name", target.display()))?;
        let staging = target.with_file_name(format!(".{}.staging", name.to_string_lossy()));
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        for sub in ["paths", "records", "reports"] {
            fs::create_dir_all(staging.join(sub))
                .with_context(|| format!("creating {}", staging.display()))?;
        }
        Ok(Self {
            target: target.to_path_buf(),
            staging,
            stamp,
            committed: false,
        })
    }

    pub fn stamp(&self) -> &Stamp {
        &self.stamp
    }

    fn write(&self, rel: &str, body: &str) -> Result<()> {
        let path = self.staging.join(rel);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_path(&self, name: &str, path: &PathFunction) -> Result<()> {
        let mut out = self.stamp.header(&format!("path={name}"));
        out.push_str("t,value\n");
        for (t, v) in path.grid().iter().zip(path.values()) {
            writeln!(out, "{t},{v}").unwrap();
        }
        self.write(&format!("paths/{name}.csv"), &out)
    }

    pub fn write_record(&self, name: &str, rec: &TrajectoryRecord) -> Result<()> {
        let mut out = self.stamp.header(&format!("record={name}"));
        out.push_str(RECORD_COLUMNS);
        out.push('\n');
        let crossed = rec.crossed_flags();
        for k in 1..=rec.steps() {
            writeln!(
                out,
                "{k},{},{},{},{},{},{}",
                rec.kappa[k - 1],
                rec.s[k],
                rec.l[k],
                u8::from(crossed[k - 1]),
                rec.alpha[k - 1],
                rec.position[k]
            )
            .unwrap();
        }
        self.write(&format!("records/{name}.csv"), &out)
    }

    /// Free-form table under `records/`, with the usual header line.
    pub fn write_table(
        &self,
        name: &str,
        columns: &str,
        rows: impl IntoIterator<Item = String>,
    ) -> Result<()> {
        let mut out = self.stamp.header(&format!("table={name}"));
        out.push_str(columns);
        out.push('\n');
        for row in rows {
            out.push_str(&row);
            out.push('\n');
        }
        self.write(&format!("records/{name}.csv"), &out)
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.write(rel, &body)
    }

    pub fn write_config(&self, toml: &str) -> Result<()> {
        let body = format!("{}{toml}", self.stamp.header("config"));
        self.write("config.toml", &body)
    }

    /// Replaces `target` with the staged run.
    pub fn commit(mut self) -> Result<PathBuf> {
        check_target(&self.target, &self.stamp)?;
        if self.target.exists() {
            fs::remove_dir_all(&self.target)?;
        }
        fs::rename(&self.staging, &self.target)
            .with_context(|| format!("moving run into {}", self.target.display()))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for RunDir {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.staging);
        }
    }
}

#[derive(serde::Deserialize)]
struct StoredSummary {
    command: String,
    config_hash: String,
}

/// An existing output directory may only be replaced by a re-run of the
/// same command with the same configuration.
fn check_target(target: &Path, stamp: &Stamp) -> Result<()> {
    if !target.exists() {
        return Ok(());
    }
    if !target.is_dir() {
        bail!("output path {} exists and is not a directory", target.display());
    }
    let summary = target.join("summary.json");
    if !summary.exists() {
        if fs::read_dir(target)?.next().is_none() {
            return Ok(());
        }
        bail!(
            "refusing to overwrite {}: it is not empty and holds no run summary",
            target.display()
        );
    }
    let stored: StoredSummary = serde_json::from_str(&fs::read_to_string(&summary)?)
        .with_context(|| format!("reading {}", summary.display()))?;
    if stored.config_hash != stamp.config_hash || stored.command != stamp.command {
        bail!(
            "refusing to overwrite {}: it holds {} with config hash {}, this run is {} with {}",
            target.display(),
            stored.command,
            stored.config_hash,
            stamp.command,
            stamp.config_hash
        );
    }
    Ok(())
}
