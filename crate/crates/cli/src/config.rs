//! Run configuration: defaults, optional JSON file, then command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use flatfocus::dynamics::DynConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Strip table with h = h_o and l = 1/k_f.
    Optimal,
    /// Strip table with explicit h and l.
    Main,
    /// Double-spiral table.
    Spiral,
    /// Unit square, the all-flat control.
    Square,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub t_min: f64,
    pub grazing: f64,
    pub corner: f64,
    pub flat_cap: u64,
    /// Escapes plus capped flights per checked step above which a run
    /// exits with code 4.
    pub anomaly_threshold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = DynConfig::default();
        Self {
            t_min: d.t_min,
            grazing: d.grazing_tol,
            corner: d.corner_tol,
            flat_cap: d.flat_cap,
            anomaly_threshold: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    pub k_d: f64,
    pub k_f: f64,
    pub h: Option<f64>,
    pub l: Option<f64>,
    pub r0: Option<f64>,
    pub seed: u64,
    pub n_orbits: u64,
    pub n_steps: u64,
    pub burn_in: u64,
    pub with_cones: bool,
    pub second_vector: bool,
    pub reverse_time: bool,
    pub expect_positive: bool,
    pub kf_list: Vec<f64>,
    pub s0: Option<f64>,
    pub alpha0: Option<f64>,
    pub svg_width: f64,
    pub tolerances: Tolerances,
    /// Output directory. Read from config files but never written out, so
    /// it does not enter the hash or the artifacts.
    #[serde(skip_serializing)]
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            family: Family::Optimal,
            k_d: -1.0,
            k_f: 0.01,
            h: None,
            l: None,
            r0: None,
            seed: 0,
            n_orbits: 1000,
            n_steps: 1000,
            burn_in: 100,
            with_cones: false,
            second_vector: false,
            reverse_time: false,
            expect_positive: false,
            kf_list: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3],
            s0: None,
            alpha0: None,
            svg_width: 800.0,
            tolerances: Tolerances::default(),
            out: PathBuf::from("."),
        }
    }
}

impl RunConfig {
    pub fn dynamics(&self) -> DynConfig {
        let t = &self.tolerances;
        DynConfig {
            t_min: t.t_min,
            grazing_tol: t.grazing,
            corner_tol: t.corner,
            flat_cap: t.flat_cap,
            ..DynConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON.
    pub fn hash(&self) -> String {
        let json = flatfocus::json::to_string(self).expect("configs serialize");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Flags shared by every command. Each one overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for the surveys.
    #[arg(long, env = "HYPB_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub kd: Option<f64>,
    #[arg(long)]
    pub kf: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "orbits")]
    pub n_orbits: Option<u64>,
    #[arg(long = "steps")]
    pub n_steps: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub with_cones: bool,
    #[arg(long)]
    pub second_vector: bool,
    #[arg(long)]
    pub reverse_time: bool,
    #[arg(long)]
    pub expect_positive: bool,
    /// Comma-separated, decreasing.
    #[arg(long, value_delimiter = ',')]
    pub kf_list: Option<Vec<f64>>,
    #[arg(long)]
    pub s0: Option<f64>,
    #[arg(long)]
    pub alpha0: Option<f64>,
    #[arg(long)]
    pub svg_width: Option<f64>,
    #[arg(long)]
    pub flat_cap: Option<u64>,
    #[arg(long)]
    pub grazing_tol: Option<f64>,
    #[arg(long)]
    pub corner_tol: Option<f64>,
    #[arg(long)]
    pub anomaly_threshold: Option<f64>,
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { c.$($field).+ = v; })*
            };
        }
        set!(out => out, family => family, kd => k_d, kf => k_f, seed => seed, n_orbits => n_orbits,
             n_steps => n_steps, burn_in => burn_in, kf_list => kf_list, svg_width => svg_width,
             flat_cap => tolerances.flat_cap, grazing_tol => tolerances.grazing,
             corner_tol => tolerances.corner, anomaly_threshold => tolerances.anomaly_threshold);
        for (flag, field) in [
            (self.h, &mut c.h),
            (self.l, &mut c.l),
            (self.r0, &mut c.r0),
            (self.s0, &mut c.s0),
            (self.alpha0, &mut c.alpha0),
        ] {
            if flag.is_some() {
                *field = flag;
            }
        }
        c.with_cones |= self.with_cones;
        c.second_vector |= self.second_vector;
        c.reverse_time |= self.reverse_time;
        c.expect_positive |= self.expect_positive;
        if c.n_orbits == 0 || c.n_steps == 0 {
            bail!("orbits and steps must be positive");
        }
        Ok(c)
    }
}
