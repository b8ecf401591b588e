//! The cone bundle `C0 / C1 / C2` over the focusing and dispersing
//! section, its history-dependent assignment, and Monte Carlo checks of
//! its invariance under the first-return map.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    first_return_map, sample_regular, DynConfig, FlightRecord, PhasePoint, Restriction, SingularKind,
};
use crate::table::{Label, Table};
use crate::tangent::{focal_from_vector, propagate_interval, vector_from_focal_plus, FocalCoord, ProjInterval};
use crate::{rng, Result};

/// Containment tolerance on projective angles.
pub const CONTAINMENT_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeLabel {
    C0,
    C1,
    C2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub label: ConeLabel,
    /// Interval of `f+` values.
    pub interval: ProjInterval,
}

impl Cone {
    pub fn new(label: ConeLabel, alpha: f64, k: f64) -> Self {
        let c = alpha.cos();
        let ak = k.abs();
        let interval = match label {
            ConeLabel::C0 => ProjInterval::finite(-c / ak, 0.0),
            ConeLabel::C1 => ProjInterval::new(FocalCoord::infinity(), FocalCoord::zero()),
            ConeLabel::C2 => ProjInterval::finite(c / (2.0 * ak), c / ak),
        };
        Self { label, interval }
    }
}

/// Where the particle is, where it came from, and whether the incoming
/// flight touched a flat piece.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepContext {
    pub current: Label,
    pub previous: Label,
    pub had_flat_hit: bool,
}

impl StepContext {
    /// Context at the end of a flight.
    pub fn after(table: &Table, rec: &FlightRecord) -> Self {
        Self {
            current: rec.end.label(table),
            previous: rec.start.label(table),
            had_flat_hit: rec.had_flat_hit(),
        }
    }
}

pub fn assign_cone(ctx: &StepContext, alpha: f64, k: f64) -> Cone {
    let label = match (ctx.current, ctx.previous, ctx.had_flat_hit) {
        (Label::Dispersing, _, _) => ConeLabel::C0,
        (_, Label::Focusing, _) => ConeLabel::C2,
        (_, _, false) => ConeLabel::C1,
        (_, _, true) => ConeLabel::C2,
    };
    Cone::new(label, alpha, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II.1")]
    II1,
    #[serde(rename = "II.2")]
    II2,
    #[serde(rename = "III.1")]
    III1,
    #[serde(rename = "III.2.1")]
    III21,
    #[serde(rename = "III.2.2")]
    III22,
    #[serde(rename = "IV.1")]
    IV1,
    #[serde(rename = "IV.2.1")]
    IV21,
    #[serde(rename = "IV.2.2")]
    IV22,
}

impl CaseTag {
    pub const ALL: [CaseTag; 9] = [
        CaseTag::I,
        CaseTag::II1,
        CaseTag::II2,
        CaseTag::III1,
        CaseTag::III21,
        CaseTag::III22,
        CaseTag::IV1,
        CaseTag::IV21,
        CaseTag::IV22,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::I => "I",
            CaseTag::II1 => "II.1",
            CaseTag::II2 => "II.2",
            CaseTag::III1 => "III.1",
            CaseTag::III21 => "III.2.1",
            CaseTag::III22 => "III.2.2",
            CaseTag::IV1 => "IV.1",
            CaseTag::IV21 => "IV.2.1",
            CaseTag::IV22 => "IV.2.2",
        }
    }

    pub fn index(self) -> usize {
        CaseTag::ALL.iter().position(|&c| c == self).unwrap()
    }

    /// The cases in which invariance may hold without strictness.
    pub fn may_be_nonstrict(self) -> bool {
        matches!(self, CaseTag::II1 | CaseTag::III21 | CaseTag::IV21)
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Case of a step from a point with context `ctx_in` to one with `ctx_out`.
pub fn classify_case(ctx_in: &StepContext, ctx_out: &StepContext) -> CaseTag {
    let from = ctx_in.current;
    let flat = ctx_out.had_flat_hit;
    // The cone at a focusing start: C1 only after a dispersing point
    // reached without flat hits.
    let c1_in = from == Label::Focusing && ctx_in.previous == Label::Dispersing && !ctx_in.had_flat_hit;
    match (from, ctx_out.current) {
        (Label::Dispersing, Label::Dispersing) => CaseTag::I,
        (Label::Dispersing, _) if flat => CaseTag::II2,
        (Label::Dispersing, _) => CaseTag::II1,
        (_, Label::Dispersing) if c1_in => CaseTag::III1,
        (_, Label::Dispersing) if flat => CaseTag::III22,
        (_, Label::Dispersing) => CaseTag::III21,
        _ if c1_in => CaseTag::IV1,
        _ if flat => CaseTag::IV22,
        _ => CaseTag::IV21,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepVerdict {
    pub invariant: bool,
    pub strict: bool,
    pub case: CaseTag,
    /// Signed projective margin of the image inside the target cone.
    pub margin: f64,
    pub image: ProjInterval,
    pub target: Cone,
    /// An image end sits at infinity while the target is `C1`.
    pub touches_infinity: bool,
    /// Strict only because the image of the open end of `C1` at infinity
    /// is excluded.
    pub open_end: bool,
}

/// Pushes `cone_in` through the recorded flight and compares with the cone
/// assigned at the endpoint.
pub fn check_step(table: &Table, ctx_in: &StepContext, rec: &FlightRecord, cone_in: &Cone) -> StepVerdict {
    let ctx_out = StepContext::after(table, rec);
    let g = rec.geometry(table);
    let image = propagate_interval(&cone_in.interval, &g);
    let target = assign_cone(&ctx_out, rec.end.alpha, g.k1);
    let (lo_gap, hi_gap) = image.end_gaps(&target.interval);
    let margin = lo_gap.min(hi_gap);
    let at_inf = |f: FocalCoord| f.pair().1.abs() < CONTAINMENT_TOL;
    let strict_closed = margin > CONTAINMENT_TOL;
    // C1 is open at infinity, which is its lower end.
    let open_end = !strict_closed
        && cone_in.label == ConeLabel::C1
        && lo_gap >= -CONTAINMENT_TOL
        && hi_gap > CONTAINMENT_TOL;
    StepVerdict {
        invariant: margin >= -CONTAINMENT_TOL,
        strict: strict_closed || open_end,
        open_end,
        case: classify_case(ctx_in, &ctx_out),
        margin,
        image,
        target,
        touches_infinity: target.label == ConeLabel::C1 && (at_inf(image.lo) || at_inf(image.hi)),
    }
}

/// Maps `n` random vectors of `cone_in` with the step's differential and
/// counts those landing outside the target (beyond the tolerance).
pub fn vector_spot_check<R: Rng + ?Sized>(
    rng: &mut R,
    table: &Table,
    rec: &FlightRecord,
    cone_in: &Cone,
    target: &Cone,
    n: usize,
) -> Result<usize> {
    let g = rec.geometry(table);
    let j = rec.jacobian(table)?;
    let mut bad = 0;
    for _ in 0..n {
        let f = cone_in.interval.at(rng.gen::<f64>());
        let v = vector_from_focal_plus(f, g.alpha0, g.k0);
        let w = j.apply(v);
        let (fp, _) = focal_from_vector(w, g.alpha1, g.k1)?;
        if !target.interval.contains(fp, 1e-9) {
            bad += 1;
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeConfig {
    pub dynamics: DynConfig,
    /// Random vectors per step pushed through the differential (0 = off).
    pub vector_checks: usize,
    /// Resampling attempts per orbit after singular events.
    pub max_attempts: u32,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            dynamics: DynConfig::default(),
            vector_checks: 0,
            max_attempts: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub orbit: u64,
    pub attempt: u32,
    pub x0: PhasePoint,
    pub s0: f64,
    /// 1-based index of the checked step.
    pub step: u64,
    pub case: CaseTag,
    pub margin: f64,
    pub image: ProjInterval,
    pub target: Cone,
    pub at: PhasePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub x0: PhasePoint,
    pub steps_checked: u64,
    /// First strict step (1-based), if any.
    pub first_strict: Option<u64>,
    pub min_margin: f64,
    pub case_counts: [u64; 9],
    pub nonstrict_counts: [u64; 9],
    pub case_min_margin: [f64; 9],
    pub violations: Vec<Violation>,
    pub singular: Option<SingularKind>,
    pub infinity_touches: u64,
    pub open_end_strict: u64,
    pub vector_failures: u64,
    /// Longest run of consecutive IV.2.1 steps.
    pub longest_chord_run: u64,
}

/// Runs `n_steps` checked steps after one bootstrap step that fixes the
/// incoming context.
pub fn verify_orbit(table: &Table, x0: &PhasePoint, n_steps: u64, cfg: &ConeConfig) -> OrbitReport {
    verify_orbit_with(table, x0, n_steps, cfg, &mut rng::stream(0, 0), |_, _| {})
}

/// [`verify_orbit`] with a callback on every checked step and an RNG for
/// the vector spot checks.
pub fn verify_orbit_with<R: Rng + ?Sized>(
    table: &Table,
    x0: &PhasePoint,
    n_steps: u64,
    cfg: &ConeConfig,
    rng: &mut R,
    mut on_step: impl FnMut(&FlightRecord, &StepVerdict),
) -> OrbitReport {
    let mut rep = OrbitReport {
        x0: *x0,
        steps_checked: 0,
        first_strict: None,
        min_margin: f64::INFINITY,
        case_counts: [0; 9],
        nonstrict_counts: [0; 9],
        case_min_margin: [f64::INFINITY; 9],
        violations: Vec::new(),
        singular: None,
        infinity_touches: 0,
        open_end_strict: 0,
        vector_failures: 0,
        longest_chord_run: 0,
    };
    let boot = match first_return_map(table, x0, &cfg.dynamics) {
        Ok(r) => r,
        Err(e) => {
            rep.singular = Some(e.kind);
            return rep;
        }
    };
    let mut ctx = StepContext::after(table, &boot);
    let mut x = boot.end;
    let mut run = 0u64;
    for step in 1..=n_steps {
        let rec = match first_return_map(table, &x, &cfg.dynamics) {
            Ok(r) => r,
            Err(e) => {
                rep.singular = Some(e.kind);
                break;
            }
        };
        let cone_in = assign_cone(&ctx, x.alpha, x.curvature(table));
        let v = check_step(table, &ctx, &rec, &cone_in);
        let ci = v.case.index();
        rep.steps_checked = step;
        rep.case_counts[ci] += 1;
        rep.case_min_margin[ci] = rep.case_min_margin[ci].min(v.margin);
        rep.min_margin = rep.min_margin.min(v.margin);
        rep.infinity_touches += v.touches_infinity as u64;
        rep.open_end_strict += v.open_end as u64;
        if !v.strict {
            rep.nonstrict_counts[ci] += 1;
        } else if rep.first_strict.is_none() {
            rep.first_strict = Some(step);
        }
        if v.case == CaseTag::IV21 {
            run += 1;
            rep.longest_chord_run = rep.longest_chord_run.max(run);
        } else {
            run = 0;
        }
        if !v.invariant {
            rep.violations.push(Violation {
                orbit: 0,
                attempt: 0,
                x0: *x0,
                s0: x0.s(table),
                step,
                case: v.case,
                margin: v.margin,
                image: v.image,
                target: v.target,
                at: x,
            });
        } else if cfg.vector_checks > 0 {
            if let Ok(bad) = vector_spot_check(rng, table, &rec, &cone_in, &v.target, cfg.vector_checks) {
                rep.vector_failures += bad as u64;
            }
        }
        on_step(&rec, &v);
        ctx = StepContext::after(table, &rec);
        x = rec.end;
    }
    rep
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SingularCounts {
    pub corner: u64,
    pub tangential: u64,
    pub escape: u64,
    pub cap_exceeded: u64,
    /// Orbits abandoned after exhausting their resampling attempts.
    pub abandoned: u64,
}

impl SingularCounts {
    pub fn add(&mut self, k: SingularKind) {
        match k {
            SingularKind::Corner => self.corner += 1,
            SingularKind::Tangential => self.tangential += 1,
            SingularKind::Escape => self.escape += 1,
            SingularKind::CapExceeded => self.cap_exceeded += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.corner + self.tangential + self.escape + self.cap_exceeded
    }

    pub fn anomalies(&self) -> u64 {
        self.escape + self.cap_exceeded
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub case: CaseTag,
    pub steps: u64,
    pub nonstrict: u64,
    pub min_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyReport {
    pub table_hash: String,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_orbits: u64,
    #[serde(rename = "n")]
    pub n_steps: u64,
    pub pass: bool,
    pub violations: Vec<Violation>,
    pub case_histogram: Vec<CaseStats>,
    /// Quantiles (0, 1, 5, 25, 50, 75, 95, 99, 100 %) of per-orbit minimum margins.
    pub margin_quantiles: Vec<(f64, f64)>,
    pub min_margin: f64,
    /// Quantiles of the first strict step over completed orbits.
    pub n_of_x_quantiles: Vec<(f64, f64)>,
    pub completed_orbits: u64,
    pub strict_reached: u64,
    pub strict_within_50: u64,
    pub nonstrict_outside_allowed: u64,
    pub singular_counts: SingularCounts,
    pub infinity_touches: u64,
    /// Steps strict only with the open end of `C1` excluded.
    pub open_end_strict: u64,
    pub vector_failures: u64,
    pub longest_chord_run: u64,
    pub tolerances: SurveyTolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurveyTolerances {
    pub containment: f64,
    pub corner: f64,
    pub grazing: f64,
    pub flat_cap: u64,
}

pub const QUANTILES: [f64; 9] = [0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0];

/// Nearest-rank quantiles of `v` (sorted in place).
pub fn quantiles(v: &mut [f64], qs: &[f64]) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.total_cmp(b));
    if v.is_empty() {
        return Vec::new();
    }
    qs.iter()
        .map(|&q| {
            let i = ((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1);
            (q, v[i])
        })
        .collect()
}

/// One surveyed orbit: the final attempt's report plus earlier singular
/// attempts.
fn survey_orbit(table: &Table, i: u64, n_steps: u64, seed: u64, cfg: &ConeConfig) -> (OrbitReport, u32, Vec<SingularKind>, Vec<Violation>) {
    let mut rng = rng::stream(seed, i);
    let mut singular = Vec::new();
    let mut violations = Vec::new();
    let mut attempt = 0;
    loop {
        let x0 = sample_regular(&mut rng, table, Restriction::Section, 1e-9);
        let rep = verify_orbit_with(table, &x0, n_steps, cfg, &mut rng, |_, _| {});
        violations.extend(rep.violations.iter().cloned().map(|mut v| {
            v.orbit = i;
            v.attempt = attempt;
            v
        }));
        match rep.singular {
            Some(k) if attempt + 1 < cfg.max_attempts => {
                singular.push(k);
                attempt += 1;
            }
            _ => return (rep, attempt, singular, violations),
        }
    }
}

/// Samples `n_orbits` initial conditions from the invariant measure on the
/// section and checks every step. Orbit `i` uses RNG stream `i`.
pub fn survey(table: &Table, n_orbits: u64, n_steps: u64, seed: u64, cfg: &ConeConfig) -> SurveyReport {
    let results: Vec<_> = (0..n_orbits)
        .into_par_iter()
        .map(|i| survey_orbit(table, i, n_steps, seed, cfg))
        .collect();

    let mut counts = [0u64; 9];
    let mut nonstrict = [0u64; 9];
    let mut case_min = [f64::INFINITY; 9];
    let mut singular_counts = SingularCounts::default();
    let mut violations = Vec::new();
    let mut orbit_mins = Vec::new();
    let mut n_of_x = Vec::new();
    let (mut completed, mut strict_reached, mut within_50) = (0, 0, 0);
    let (mut touches, mut open_end, mut vec_fail, mut chord_run) = (0, 0, 0, 0);
    for (rep, _, earlier, viol) in &results {
        for k in earlier {
            singular_counts.add(*k);
        }
        violations.extend(viol.iter().cloned());
        for c in 0..9 {
            counts[c] += rep.case_counts[c];
            nonstrict[c] += rep.nonstrict_counts[c];
            case_min[c] = case_min[c].min(rep.case_min_margin[c]);
        }
        touches += rep.infinity_touches;
        open_end += rep.open_end_strict;
        vec_fail += rep.vector_failures;
        chord_run = chord_run.max(rep.longest_chord_run);
        match rep.singular {
            Some(k) => {
                singular_counts.add(k);
                singular_counts.abandoned += 1;
            }
            None => {
                completed += 1;
                orbit_mins.push(rep.min_margin);
                if let Some(n) = rep.first_strict {
                    strict_reached += 1;
                    within_50 += (n <= 50) as u64;
                    n_of_x.push(n as f64);
                }
            }
        }
    }
    let min_margin = orbit_mins.iter().copied().fold(f64::INFINITY, f64::min);
    let nonstrict_outside_allowed = CaseTag::ALL
        .iter()
        .filter(|c| !c.may_be_nonstrict())
        .map(|c| nonstrict[c.index()])
        .sum();
    SurveyReport {
        table_hash: table.content_hash(),
        seed,
        n_orbits,
        n_steps,
        pass: violations.is_empty(),
        violations,
        case_histogram: CaseTag::ALL
            .iter()
            .map(|&c| CaseStats {
                case: c,
                steps: counts[c.index()],
                nonstrict: nonstrict[c.index()],
                min_margin: case_min[c.index()].is_finite().then_some(case_min[c.index()]),
            })
            .collect(),
        margin_quantiles: quantiles(&mut orbit_mins, &QUANTILES),
        min_margin,
        n_of_x_quantiles: quantiles(&mut n_of_x, &QUANTILES),
        completed_orbits: completed,
        strict_reached,
        strict_within_50: within_50,
        nonstrict_outside_allowed,
        singular_counts,
        infinity_touches: touches,
        open_end_strict: open_end,
        vector_failures: vec_fail,
        longest_chord_run: chord_run,
        tolerances: SurveyTolerances {
            containment: CONTAINMENT_TOL,
            corner: cfg.dynamics.corner_tol,
            grazing: cfg.dynamics.grazing_tol,
            flat_cap: cfg.dynamics.flat_cap,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(current: Label, previous: Label, had_flat_hit: bool) -> StepContext {
        StepContext {
            current,
            previous,
            had_flat_hit,
        }
    }

    #[test]
    fn assignment_rules() {
        use Label::*;
        for prev in [Focusing, Dispersing] {
            for flat in [false, true] {
                assert_eq!(assign_cone(&ctx(Dispersing, prev, flat), 0.1, -1.0).label, ConeLabel::C0);
            }
        }
        assert_eq!(assign_cone(&ctx(Focusing, Focusing, false), 0.1, 0.1).label, ConeLabel::C2);
        assert_eq!(assign_cone(&ctx(Focusing, Dispersing, true), 0.1, 0.1).label, ConeLabel::C2);
        assert_eq!(assign_cone(&ctx(Focusing, Dispersing, false), 0.1, 0.1).label, ConeLabel::C1);
    }

    #[test]
    fn case_tags() {
        use Label::*;
        let d_in = ctx(Dispersing, Dispersing, false);
        assert_eq!(classify_case(&d_in, &ctx(Dispersing, Dispersing, false)), CaseTag::I);
        assert_eq!(classify_case(&d_in, &ctx(Focusing, Dispersing, true)), CaseTag::II2);
        assert_eq!(classify_case(&d_in, &ctx(Focusing, Dispersing, false)), CaseTag::II1);
        let f_c2 = ctx(Focusing, Focusing, false);
        let f_c1 = ctx(Focusing, Dispersing, false);
        assert_eq!(classify_case(&f_c2, &ctx(Focusing, Focusing, false)), CaseTag::IV21);
        assert_eq!(classify_case(&f_c2, &ctx(Focusing, Focusing, true)), CaseTag::IV22);
        assert_eq!(classify_case(&f_c1, &ctx(Focusing, Focusing, false)), CaseTag::IV1);
        assert_eq!(classify_case(&f_c1, &ctx(Dispersing, Focusing, true)), CaseTag::III1);
        assert_eq!(classify_case(&f_c2, &ctx(Dispersing, Focusing, false)), CaseTag::III21);
        assert_eq!(classify_case(&f_c2, &ctx(Dispersing, Focusing, true)), CaseTag::III22);
    }

    #[test]
    fn quantile_ranks() {
        let mut v = vec![3.0, 1.0, 2.0];
        let q = quantiles(&mut v, &[0.0, 0.5, 1.0]);
        assert_eq!(q, vec![(0.0, 1.0), (0.5, 2.0), (1.0, 3.0)]);
    }
}
