//! Atomic artifact writes, the hashed JSON envelope and the timing sidecar.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config_hash: &'a str,
    table_hash: &'a str,
    config: &'a RunConfig,
    result: &'a T,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    command: &'a str,
    config_hash: &'a str,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    threads: usize,
    version: &'a str,
    outputs: &'a [String],
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

/// Collects the artifacts of one command. Everything except the sidecar is
/// a function of the config alone.
pub struct Writer {
    dir: PathBuf,
    command: &'static str,
    config: RunConfig,
    config_hash: String,
    started: u128,
    written: Vec<String>,
}

impl Writer {
    pub fn new(command: &'static str, config: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
        Ok(Self {
            dir: config.out.clone(),
            command,
            config: config.clone(),
            config_hash: config.hash(),
            started: now_ms(),
            written: vec![],
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let target = self.path(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, body).with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, &target).with_context(|| format!("renaming to {}", target.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// `result` wrapped with the config, its hash and the table hash.
    pub fn json<T: Serialize>(&mut self, name: &str, table_hash: &str, result: &T) -> Result<()> {
        let env = Envelope {
            config_hash: &self.config_hash,
            table_hash,
            config: &self.config,
            result,
        };
        let mut body = flatfocus::json::to_string(&env)?;
        body.push('\n');
        self.text(name, &body)
    }

    /// CSV with the hashes in leading comment lines.
    pub fn csv(&mut self, name: &str, table_hash: &str, body: &str) -> Result<()> {
        let text = format!("# config_hash {}\n# table_hash {table_hash}\n{body}", self.config_hash);
        self.text(name, &text)
    }

    pub fn finish(self) -> Result<()> {
        let meta = Sidecar {
            command: self.command,
            config_hash: &self.config_hash,
            started_unix_ms: self.started,
            finished_unix_ms: now_ms(),
            threads: rayon::current_num_threads(),
            version: env!("CARGO_PKG_VERSION"),
            outputs: &self.written,
        };
        let body = serde_json::to_string_pretty(&meta)? + "\n";
        std::fs::write(self.dir.join(format!("{}.meta.json", self.command)), body)?;
        Ok(())
    }
}

