//! Lyapunov exponent of the return map from renormalized tangent products.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{assign_cone, check_step, SingularCounts, StepContext};
use crate::dynamics::{
    billiard_map, first_return_map, reverse, sample_regular, DynConfig, FlightRecord, PhasePoint, Restriction,
    SingularEvent, SingularKind,
};
use crate::table::Table;
use crate::tangent::{JacobianStep, Leg, TangentVector};
use crate::{rng, Error, Result};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.576;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovConfig {
    pub dynamics: DynConfig,
    pub burn_in: u64,
    /// Truncated orbits shorter than this are left out of the mean.
    pub min_effective: u64,
    /// Run the cone check on the same orbit.
    pub with_cones: bool,
    /// Track a second random initial vector.
    pub second_vector: bool,
    /// Iterate the inverse map (the map conjugated by time reversal).
    pub reverse_time: bool,
    pub max_attempts: u32,
}

impl Default for LyapunovConfig {
    fn default() -> Self {
        Self {
            dynamics: DynConfig::default(),
            burn_in: 100,
            min_effective: 1000,
            with_cones: false,
            second_vector: false,
            reverse_time: false,
            max_attempts: 16,
        }
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitLyapunov {
    pub stream: u64,
    pub s0: f64,
    pub alpha0: f64,
    pub n_effective: u64,
    pub lambda_hat: f64,
    /// Estimate after the first half of the accumulated steps.
    pub lambda_half: f64,
    pub lambda_alt: Option<f64>,
    pub truncated: Option<SingularKind>,
    pub cone_violations: u64,
}

/// One step of the map used for the exponent: the return map on the
/// focusing and dispersing section, or the full boundary map on tables
/// without such pieces.
fn step(table: &Table, x: &PhasePoint, cfg: &DynConfig) -> std::result::Result<(FlightRecord, JacobianStep), SingularEvent> {
    let rec = if table.section_pieces().is_empty() {
        let (end, tau) = billiard_map(table, x, cfg)?;
        FlightRecord {
            start: *x,
            end,
            tau,
            n_flat: 0,
            flat_hits: Vec::new(),
            entered_corridor: false,
            visits: Vec::new(),
            hit_end_cap: false,
        }
    } else {
        first_return_map(table, x, cfg)?
    };
    let j = JacobianStep::leg(&Leg {
        alpha0: rec.start.alpha,
        k0: rec.start.curvature(table),
        tau: rec.tau,
        alpha1: rec.end.alpha,
        k1: rec.end.curvature(table),
    });
    let j = match j {
        Ok(j) if rec.n_flat % 2 == 1 => j.scaled(-1.0),
        Ok(j) => j,
        Err(_) => {
            return Err(SingularEvent {
                kind: SingularKind::Tangential,
                location: rec.end.point(table),
                piece: Some(rec.end.piece),
            })
        }
    };
    Ok((rec, j))
}

fn restriction(table: &Table) -> Restriction {
    if table.section_pieces().is_empty() {
        Restriction::Full
    } else {
        Restriction::Section
    }
}

fn flip(v: TangentVector) -> TangentVector {
    TangentVector::new(v.ds, -v.da)
}

/// Birkhoff average of `log |DM v|` along the orbit of `x0`, renormalizing
/// `v` every step, after `cfg.burn_in` unrecorded steps.
pub fn lyapunov_orbit(
    table: &Table,
    x0: &PhasePoint,
    n_steps: u64,
    v0: TangentVector,
    cfg: &LyapunovConfig,
) -> Result<OrbitLyapunov> {
    lyapunov_orbit_pair(table, x0, n_steps, v0, None, cfg)
}

fn lyapunov_orbit_pair(
    table: &Table,
    x0: &PhasePoint,
    n_steps: u64,
    v0: TangentVector,
    w0: Option<TangentVector>,
    cfg: &LyapunovConfig,
) -> Result<OrbitLyapunov> {
    let norm = v0.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroVector);
    }
    // The inverse map is R M R with R = time reversal, and R acts on
    // tangent vectors as (ds, da) -> (ds, -da).
    let (mut x, mut v, mut w) = if cfg.reverse_time {
        (reverse(*x0), flip(v0), w0.map(flip))
    } else {
        (*x0, v0, w0)
    };
    v = v.scaled(1.0 / norm);
    if let Some(u) = w.as_mut() {
        *u = u.scaled(1.0 / u.norm());
    }
    let mut out = OrbitLyapunov {
        stream: 0,
        s0: x0.s(table),
        alpha0: x0.alpha,
        n_effective: 0,
        lambda_hat: 0.0,
        lambda_half: 0.0,
        lambda_alt: None,
        truncated: None,
        cone_violations: 0,
    };
    let (mut acc, mut acc_alt) = (CompensatedSum::default(), CompensatedSum::default());
    let mut half = 0.0;
    let mut ctx: Option<StepContext> = None;
    for i in 0..cfg.burn_in + n_steps {
        let (rec, j) = match step(table, &x, &cfg.dynamics) {
            Ok(s) => s,
            Err(e) => {
                // During burn-in this leaves nothing recorded.
                out.truncated = Some(e.kind);
                break;
            }
        };
        if cfg.with_cones {
            if let Some(c) = ctx {
                let cone_in = assign_cone(&c, x.alpha, x.curvature(table));
                out.cone_violations += !check_step(table, &c, &rec, &cone_in).invariant as u64;
            }
            ctx = Some(StepContext::after(table, &rec));
        }
        let jv = j.apply(v);
        let g = jv.norm();
        v = jv.scaled(1.0 / g);
        let alt = w.map(|u| {
            let ju = j.apply(u);
            let gu = ju.norm();
            (ju.scaled(1.0 / gu), gu)
        });
        if let Some((u, _)) = alt {
            w = Some(u);
        }
        if i >= cfg.burn_in {
            acc.add(g.ln());
            if let Some((_, gu)) = alt {
                acc_alt.add(gu.ln());
            }
            out.n_effective += 1;
            if out.n_effective == n_steps / 2 {
                half = acc.value() / out.n_effective as f64;
            }
        }
        x = rec.end;
    }
    if out.n_effective > 0 {
        let n = out.n_effective as f64;
        out.lambda_hat = acc.value() / n;
        out.lambda_half = if out.n_effective >= n_steps / 2 && n_steps >= 2 { half } else { out.lambda_hat };
        out.lambda_alt = w.map(|_| acc_alt.value() / n);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub table_hash: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_orbits: u64,
    #[serde(rename = "n")]
    pub n_steps: u64,
    pub mean: f64,
    pub stderr: f64,
    pub ci99: (f64, f64),
    /// The same estimate from the first half of each orbit.
    pub mean_half: f64,
    pub included: u64,
    /// Truncated orbits with fewer than `min_effective` steps.
    pub excluded_short: u64,
    pub truncated: u64,
    pub singular_counts: SingularCounts,
    pub cone_violations: u64,
    /// Fraction of orbits whose two initial vectors agree within
    /// `5 / sqrt(n)` (only with a second vector).
    pub vector_agreement: Option<f64>,
    pub burn_in: u64,
    pub reverse_time: bool,
    pub per_orbit: Vec<OrbitLyapunov>,
}

impl LyapunovEstimate {
    pub fn ci_excludes_zero(&self) -> bool {
        self.ci99.0 > 0.0 || self.ci99.1 < 0.0
    }

    pub fn converged(&self) -> bool {
        (self.mean - self.mean_half).abs() < 5.0 * self.stderr
    }

    /// Per-orbit CSV: `seed,s0,alpha0,n_effective,lambda_hat`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,stream,s0,alpha0,n_effective,lambda_hat\n");
        for o in &self.per_orbit {
            let _ = writeln!(
                out,
                "{},{},{:.16e},{:.16e},{},{:.16e}",
                self.seed, o.stream, o.s0, o.alpha0, o.n_effective, o.lambda_hat
            );
        }
        out
    }
}

fn random_vector<R: Rng + ?Sized>(rng: &mut R) -> TangentVector {
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;
    TangentVector::new(phi.cos(), phi.sin())
}

/// Exponent averaged over `n_orbits` initial conditions drawn from the
/// invariant measure; orbit `i` uses RNG stream `i`.
pub fn lyapunov_survey(table: &Table, n_orbits: u64, n_steps: u64, seed: u64, cfg: &LyapunovConfig) -> LyapunovEstimate {
    let results: Vec<(Option<OrbitLyapunov>, Vec<SingularKind>)> = (0..n_orbits)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i);
            let mut singular = Vec::new();
            for _ in 0..cfg.max_attempts {
                let x0 = sample_regular(&mut rng, table, restriction(table), 1e-9);
                let v0 = random_vector(&mut rng);
                let w0 = cfg.second_vector.then(|| random_vector(&mut rng));
                let mut o = lyapunov_orbit_pair(table, &x0, n_steps, v0, w0, cfg).expect("unit initial vector");
                match o.truncated {
                    Some(k) if o.n_effective == 0 => singular.push(k),
                    _ => {
                        o.stream = i;
                        return (Some(o), singular);
                    }
                }
            }
            (None, singular)
        })
        .collect();

    let mut singular_counts = SingularCounts::default();
    let mut per_orbit = Vec::new();
    let (mut excluded_short, mut truncated, mut cone_violations) = (0, 0, 0);
    for (o, sing) in results {
        for k in sing {
            singular_counts.add(k);
        }
        let Some(o) = o else {
            singular_counts.abandoned += 1;
            continue;
        };
        cone_violations += o.cone_violations;
        if let Some(k) = o.truncated {
            singular_counts.add(k);
            truncated += 1;
            if o.n_effective < cfg.min_effective.min(n_steps) {
                excluded_short += 1;
                per_orbit.push(o);
                continue;
            }
        }
        per_orbit.push(o);
    }
    let used: Vec<&OrbitLyapunov> = per_orbit
        .iter()
        .filter(|o| o.truncated.is_none() || o.n_effective >= cfg.min_effective.min(n_steps))
        .collect();
    let wsum: f64 = used.iter().map(|o| o.n_effective as f64).sum();
    let mean = used.iter().map(|o| o.lambda_hat * o.n_effective as f64).sum::<f64>() / wsum;
    let mean_half = used.iter().map(|o| o.lambda_half * o.n_effective as f64).sum::<f64>() / wsum;
    let m = used.len() as f64;
    let var = used.iter().map(|o| (o.lambda_hat - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    let stderr = (var / m).sqrt();
    let vector_agreement = cfg.second_vector.then(|| {
        let tol = 5.0 / (n_steps as f64).sqrt();
        let ok = used
            .iter()
            .filter(|o| o.lambda_alt.map_or(false, |a| (a - o.lambda_hat).abs() < tol))
            .count();
        ok as f64 / m
    });
    LyapunovEstimate {
        table_hash: table.content_hash(),
        seed,
        n_orbits,
        n_steps,
        mean,
        stderr,
        ci99: (mean - Z99 * stderr, mean + Z99 * stderr),
        mean_half,
        included: used.len() as u64,
        excluded_short,
        truncated,
        singular_counts,
        cone_violations,
        vector_agreement,
        burn_in: cfg.burn_in,
        reverse_time: cfg.reverse_time,
        per_orbit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_keeps_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
