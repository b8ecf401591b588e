//! One function per subcommand. Each returns the process exit code.

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use flatfocus::cones::{survey, ConeConfig};
use flatfocus::dynamics::{
    billiard_map, first_return_map, orbit_csv, orbit_svg, sample_regular, OrbitRow, PhasePoint, Restriction,
    SingularEvent,
};
use flatfocus::lyapunov::{lyapunov_survey, LyapunovConfig};
use flatfocus::table::{
    build_optimal_table, build_spiral_with_h_o, table_svg, C1Config, SpiralOptions, TableDocument,
};

use crate::config::RunConfig;
use crate::output::Writer;
use crate::plot::{loglog, Series};
use crate::tables::{build, Built};

pub const PASS: u8 = 0;
pub const FAILED: u8 = 1;
pub const GEOMETRY: u8 = 2;
pub const CONES: u8 = 3;
pub const ANOMALIES: u8 = 4;

#[derive(Serialize)]
struct Unmaterialized<'a> {
    spiral_params: &'a flatfocus::table::SpiralParams,
    piece_count: usize,
    pieces_omitted: bool,
}

pub fn cmd_build(cfg: &RunConfig) -> Result<u8> {
    let built = build(cfg)?;
    let hash = built.hash();
    let mut w = Writer::new("build", cfg)?;
    match (&built, built.table()) {
        (_, Some(t)) => {
            w.json("table.json", &hash, &TableDocument::of(t))?;
            w.text("table.svg", &table_svg(t, cfg.svg_width))?;
        }
        (Built::Spiral(s), None) => w.json(
            "table.json",
            &hash,
            &Unmaterialized {
                spiral_params: &s.layout.params,
                piece_count: s.layout.piece_count(),
                pieces_omitted: true,
            },
        )?,
        _ => unreachable!(),
    }
    w.json("certificate.json", &hash, &built.certificate())?;
    w.finish()?;
    let passes = built.passes();
    eprintln!("table {hash}: certificate {}", if passes { "passes" } else { "fails" });
    Ok(if passes { PASS } else { GEOMETRY })
}

fn too_many_anomalies(anomalies: u64, steps: u64, cfg: &RunConfig) -> bool {
    anomalies as f64 > cfg.tolerances.anomaly_threshold * steps as f64
}

pub fn cmd_verify_cones(cfg: &RunConfig) -> Result<u8> {
    let built = build(cfg)?;
    let t = built.require_table()?;
    let cone_cfg = ConeConfig {
        dynamics: cfg.dynamics(),
        ..ConeConfig::default()
    };
    let rep = survey(t, cfg.n_orbits, cfg.n_steps, cfg.seed, &cone_cfg);
    let hash = built.hash();
    let mut w = Writer::new("verify-cones", cfg)?;
    w.json("survey.json", &hash, &rep)?;
    w.finish()?;
    eprintln!(
        "{} violations, {}/{} orbits reached a strict step, min margin {:e}",
        rep.violations.len(),
        rep.strict_reached,
        rep.completed_orbits,
        rep.min_margin
    );
    Ok(if !rep.violations.is_empty() {
        CONES
    } else if too_many_anomalies(rep.singular_counts.anomalies(), cfg.n_orbits * cfg.n_steps, cfg) {
        ANOMALIES
    } else {
        PASS
    })
}

pub fn cmd_lyapunov(cfg: &RunConfig) -> Result<u8> {
    let built = build(cfg)?;
    let t = built.require_table()?;
    let lcfg = LyapunovConfig {
        dynamics: cfg.dynamics(),
        burn_in: cfg.burn_in,
        with_cones: cfg.with_cones,
        second_vector: cfg.second_vector,
        reverse_time: cfg.reverse_time,
        ..LyapunovConfig::default()
    };
    let est = lyapunov_survey(t, cfg.n_orbits, cfg.n_steps, cfg.seed, &lcfg);
    let hash = built.hash();
    let mut w = Writer::new("lyapunov", cfg)?;
    w.json("lyapunov.json", &hash, &est)?;
    w.csv("lyapunov.csv", &hash, &est.to_csv())?;
    w.finish()?;
    eprintln!(
        "lambda = {:.6} +- {:.2e}, 99% CI [{:.6}, {:.6}]",
        est.mean, est.stderr, est.ci99.0, est.ci99.1
    );
    let positive = est.mean > 0.0 && est.ci_excludes_zero();
    Ok(if too_many_anomalies(est.singular_counts.anomalies(), cfg.n_orbits * cfg.n_steps, cfg) {
        ANOMALIES
    } else if est.cone_violations > 0 {
        CONES
    } else if cfg.expect_positive && !positive {
        FAILED
    } else {
        PASS
    })
}

#[derive(Debug, Serialize)]
struct StudyRow {
    k_f: f64,
    h_o: f64,
    h_o_over_k_f: f64,
    area_optimal: f64,
    diameter_optimal: f64,
    area_spiral: f64,
    diameter_spiral: f64,
    k1: f64,
    k2: f64,
    k3: f64,
    n_bar: u64,
    rounds: u64,
    optimal_passes: bool,
    spiral_passes: bool,
}

fn study_row(cfg: &RunConfig, k_f: f64) -> Result<StudyRow> {
    let c1 = C1Config::default();
    let opt = build_optimal_table(cfg.k_d, k_f, &c1)?;
    let opts = SpiralOptions {
        r0: cfg.r0,
        ..SpiralOptions::default()
    };
    let sp = build_spiral_with_h_o(cfg.k_d, k_f, opt.params.h, &opts)?;
    let c = &sp.certificate;
    Ok(StudyRow {
        k_f,
        h_o: opt.params.h,
        h_o_over_k_f: opt.params.h / k_f,
        area_optimal: opt.certificate.area,
        diameter_optimal: opt.certificate.diameter,
        area_spiral: c.area,
        diameter_spiral: c.diameter,
        k1: c.k1,
        k2: c.k2,
        k3: c.k3,
        n_bar: sp.layout.params.n_bar,
        rounds: sp.layout.params.rounds,
        optimal_passes: opt.certificate.passes(),
        spiral_passes: c.passes(),
    })
}

pub fn cmd_scaling_study(cfg: &RunConfig) -> Result<u8> {
    let ks = &cfg.kf_list;
    if ks.is_empty() || ks.windows(2).any(|w| w[1] >= w[0]) {
        bail!("kf_list must be non-empty and strictly decreasing");
    }
    let rows: Vec<StudyRow> = ks.par_iter().map(|&k| study_row(cfg, k)).collect::<Result<_>>()?;
    let mut csv = String::from(
        "k_f,h_o,h_o_over_k_f,area_optimal,diameter_optimal,area_spiral,diameter_spiral,k1,k2,k3,n_bar,rounds\n",
    );
    for r in &rows {
        let f = [
            r.k_f,
            r.h_o,
            r.h_o_over_k_f,
            r.area_optimal,
            r.diameter_optimal,
            r.area_spiral,
            r.diameter_spiral,
            r.k1,
            r.k2,
            r.k3,
        ];
        let cells: Vec<String> = f.iter().map(|v| format!("{v:.16e}")).collect();
        csv.push_str(&format!("{},{},{}\n", cells.join(","), r.n_bar, r.rounds));
    }
    let pts = |f: &dyn Fn(&StudyRow) -> f64| rows.iter().map(|r| (r.k_f, f(r))).collect::<Vec<_>>();
    let h_plot = loglog(
        "strip height h_o",
        "k_f",
        "h_o and h_o / k_f",
        &[
            Series {
                name: "h_o",
                color: "#1f77b4",
                points: pts(&|r| r.h_o),
            },
            Series {
                name: "h_o / k_f",
                color: "#d62728",
                points: pts(&|r| r.h_o_over_k_f),
            },
        ],
    );
    let d_plot = loglog(
        "table size",
        "k_f",
        "diameter and area",
        &[
            Series {
                name: "diameter, strips",
                color: "#1f77b4",
                points: pts(&|r| r.diameter_optimal),
            },
            Series {
                name: "diameter, spiral",
                color: "#d62728",
                points: pts(&|r| r.diameter_spiral),
            },
            Series {
                name: "area, strips",
                color: "#2ca02c",
                points: pts(&|r| r.area_optimal),
            },
            Series {
                name: "area, spiral",
                color: "#9467bd",
                points: pts(&|r| r.area_spiral),
            },
        ],
    );
    let mut w = Writer::new("scaling-study", cfg)?;
    w.csv("study.csv", "-", &csv)?;
    w.json("study.json", "-", &rows)?;
    w.text("study_h_o.svg", &h_plot)?;
    w.text("study_size.svg", &d_plot)?;
    w.finish()?;
    Ok(PASS)
}

pub fn cmd_export_svg(cfg: &RunConfig) -> Result<u8> {
    let built = build(cfg)?;
    let t = built.require_table()?;
    let mut w = Writer::new("export-svg", cfg)?;
    w.text("table.svg", &table_svg(t, cfg.svg_width))?;
    w.finish()?;
    Ok(PASS)
}

#[derive(Serialize)]
struct OrbitDump<'a> {
    x0: PhasePoint,
    rows: &'a [OrbitRow],
    stopped_by: Option<SingularEvent>,
}

pub fn cmd_orbit_dump(cfg: &RunConfig) -> Result<u8> {
    let built = build(cfg)?;
    let t = built.require_table()?;
    let on_section = !t.section_pieces().is_empty();
    let x0 = match (cfg.s0, cfg.alpha0) {
        (Some(s), Some(a)) => {
            if !(a.abs() < std::f64::consts::FRAC_PI_2) || !(0.0..t.perimeter()).contains(&s) {
                bail!("s0 must lie in [0, perimeter) and |alpha0| < pi/2");
            }
            let (piece, u) = t.locate(s);
            PhasePoint::new(piece, u, a)
        }
        (None, None) => {
            let r = if on_section { Restriction::Section } else { Restriction::Full };
            sample_regular(&mut flatfocus::rng::stream(cfg.seed, 0), t, r, 1e-9)
        }
        _ => bail!("give both s0 and alpha0, or neither"),
    };
    let dyn_cfg = flatfocus::dynamics::DynConfig {
        record_events: true,
        ..cfg.dynamics()
    };
    let mut rows = vec![];
    let mut points = vec![x0.point(t)];
    let mut x = x0;
    let mut stopped_by = None;
    for step in 1..=cfg.n_steps {
        let (y, tau, n_flat) = if on_section {
            match first_return_map(t, &x, &dyn_cfg) {
                Ok(rec) => {
                    points.extend(rec.flat_hits.iter().map(|e| e.point));
                    (rec.end, rec.tau, rec.n_flat)
                }
                Err(e) => {
                    stopped_by = Some(e);
                    break;
                }
            }
        } else {
            match billiard_map(t, &x, &dyn_cfg) {
                Ok((y, tau)) => (y, tau, 0),
                Err(e) => {
                    stopped_by = Some(e);
                    break;
                }
            }
        };
        points.push(y.point(t));
        rows.push(OrbitRow {
            step,
            s: y.s(t),
            alpha: y.alpha,
            tau,
            piece_label: y.label(t).as_str().to_string(),
            n_flat_hits: n_flat,
        });
        x = y;
    }
    let hash = built.hash();
    let mut w = Writer::new("orbit-dump", cfg)?;
    w.csv("orbit.csv", &hash, &orbit_csv(&rows))?;
    w.json(
        "orbit.json",
        &hash,
        &OrbitDump {
            x0,
            rows: &rows,
            stopped_by,
        },
    )?;
    w.text("orbit.svg", &orbit_svg(t, &points, cfg.svg_width))?;
    w.finish()?;
    use flatfocus::dynamics::SingularKind::{CapExceeded, Escape};
    Ok(match stopped_by.map(|e| e.kind) {
        Some(Escape | CapExceeded) => ANOMALIES,
        _ => PASS,
    })
}
