//! Beam optics: focal coordinates on the projective line, the mirror
//! equation, free flight, the disc dictionary and the tangent map in
//! `(ds, d alpha)` coordinates.
//!
//! Conventions: at a boundary point with inner normal `n` and tangent
//! `t = n` rotated clockwise, the outgoing direction is
//! `cos(a) n + sin(a) t`. A tangent vector `(ds, da)` has focal distances
//! `f+ = cos(a) ds / (k ds - da)` along the outgoing ray and
//! `f- = cos(a) ds / (-k ds - da)` along the incoming one.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point of the projective line stored as a unit pair `(p, q)` meaning
/// `f = p / q`; `q = 0` is the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FocalCoord {
    p: f64,
    q: f64,
}

impl FocalCoord {
    pub fn from_pair(p: f64, q: f64) -> Result<Self> {
        let n = p.hypot(q);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        // Canonical sign: q > 0, or p > 0 at infinity.
        let s = if q < 0.0 || (q == 0.0 && p < 0.0) { -1.0 } else { 1.0 };
        Ok(Self {
            p: s * p / n,
            q: s * q / n,
        })
    }

    pub fn finite(f: f64) -> Self {
        Self::from_pair(f, 1.0).expect("finite focal value")
    }

    pub fn infinity() -> Self {
        Self { p: 1.0, q: 0.0 }
    }

    pub fn zero() -> Self {
        Self { p: 0.0, q: 1.0 }
    }

    pub fn pair(self) -> (f64, f64) {
        (self.p, self.q)
    }

    pub fn is_infinite(self) -> bool {
        self.q == 0.0
    }

    /// `p / q` as an IEEE value (`inf` at infinity).
    pub fn value(self) -> f64 {
        if self.q == 0.0 {
            f64::INFINITY
        } else {
            self.p / self.q
        }
    }

    /// Angle in `[0, pi)` with `f = tan(theta)`; increases with `f`.
    pub fn theta(self) -> f64 {
        let t = self.p.atan2(self.q);
        if t < 0.0 {
            t + PI
        } else if t >= PI {
            t - PI
        } else {
            t
        }
    }

    /// Chordal distance `|sin(theta_a - theta_b)|`.
    pub fn dist(self, o: Self) -> f64 {
        (self.p * o.q - self.q * o.p).abs()
    }

    pub fn neg(self) -> Self {
        Self::from_pair(-self.p, self.q).expect("unit pair")
    }

    /// Image under the linear map `(p, q) -> m (p, q)`.
    pub fn mobius(self, m: [[f64; 2]; 2]) -> Result<Self> {
        Self::from_pair(
            m[0][0] * self.p + m[0][1] * self.q,
            m[1][0] * self.p + m[1][1] * self.q,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentVector {
    pub ds: f64,
    pub da: f64,
}

impl TangentVector {
    pub fn new(ds: f64, da: f64) -> Self {
        Self { ds, da }
    }

    pub fn norm(self) -> f64 {
        self.ds.hypot(self.da)
    }

    pub fn scaled(self, c: f64) -> Self {
        Self::new(self.ds * c, self.da * c)
    }
}

/// `(f+, f-)` of a tangent vector at a point with angle `alpha` and
/// curvature `k`.
pub fn focal_from_vector(v: TangentVector, alpha: f64, k: f64) -> Result<(FocalCoord, FocalCoord)> {
    if v.ds == 0.0 && v.da == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = alpha.cos();
    Ok((
        FocalCoord::from_pair(c * v.ds, k * v.ds - v.da)?,
        FocalCoord::from_pair(c * v.ds, -k * v.ds - v.da)?,
    ))
}

/// A tangent vector with the given `f+`, up to scale.
pub fn vector_from_focal_plus(f: FocalCoord, alpha: f64, k: f64) -> TangentVector {
    let (p, q) = f.pair();
    TangentVector::new(p, k * p - q * alpha.cos())
}

/// Mirror equation `1/f+ = 1/f- + 2k/cos(alpha)`.
pub fn mirror_reflect(f_minus: FocalCoord, k: f64, alpha: f64) -> FocalCoord {
    f_minus
        .mobius(mirror_matrix(k, alpha))
        .expect("unimodular map of a unit pair")
}

pub fn mirror_matrix(k: f64, alpha: f64) -> [[f64; 2]; 2] {
    [[1.0, 0.0], [2.0 * k / alpha.cos(), 1.0]]
}

/// `f-` at the next collision: `f+ - tau`.
pub fn free_flight(f_plus: FocalCoord, tau: f64) -> FocalCoord {
    f_plus
        .mobius(flight_matrix(tau))
        .expect("unimodular map of a unit pair")
}

pub fn flight_matrix(tau: f64) -> [[f64; 2]; 2] {
    [[1.0, -tau], [0.0, 1.0]]
}

/// Residual of the mirror equation, cross-multiplied so that zero and
/// infinite focal distances are fine: `q+ p- - q- p+ - (2k/cos a) p+ p-`.
pub fn mirror_residual(f_minus: FocalCoord, f_plus: FocalCoord, k: f64, alpha: f64) -> f64 {
    let (pm, qm) = f_minus.pair();
    let (pp, qp) = f_plus.pair();
    qp * pm - qm * pp - 2.0 * k / alpha.cos() * pp * pm
}

/// `beta` with `f+` on the boundary of `D_beta`: `f+ = 2 cos(a) / (beta |k|)`.
/// `f+ = 0` gives an infinite `beta`, `f+ = inf` gives a signed zero.
pub fn beta_of_focal(f_plus: FocalCoord, alpha: f64, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::FlatPoint);
    }
    let (p, q) = f_plus.pair();
    Ok(2.0 * alpha.cos() * q / (p * k.abs()))
}

pub fn focal_of_beta(beta: f64, alpha: f64, k: f64) -> Result<FocalCoord> {
    if k == 0.0 {
        return Err(Error::FlatPoint);
    }
    if beta.is_infinite() {
        return Ok(FocalCoord::zero());
    }
    FocalCoord::from_pair(2.0 * alpha.cos(), beta * k.abs())
}

/// Disc index after reflection: `4 sgn(k) - beta`.
pub fn beta_reflect(beta: f64, k: f64) -> Result<f64> {
    if k == 0.0 {
        return Err(Error::FlatPoint);
    }
    Ok(4.0 * k.signum() - beta)
}

/// A closed arc of the projective line, running from `lo` in the
/// direction of increasing `f` (through infinity if needed) to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjInterval {
    pub lo: FocalCoord,
    pub hi: FocalCoord,
}

fn wrap_pi(x: f64) -> f64 {
    let r = x.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}

impl ProjInterval {
    pub fn new(lo: FocalCoord, hi: FocalCoord) -> Self {
        Self { lo, hi }
    }

    pub fn point(f: FocalCoord) -> Self {
        Self { lo: f, hi: f }
    }

    pub fn finite(lo: f64, hi: f64) -> Self {
        Self::new(FocalCoord::finite(lo), FocalCoord::finite(hi))
    }

    /// Angular length in `[0, pi)`.
    pub fn length(&self) -> f64 {
        wrap_pi(self.hi.theta() - self.lo.theta())
    }

    /// Signed angular margin of `f` inside the interval (negative outside).
    pub fn margin_of(&self, f: FocalCoord) -> f64 {
        self.margin_of_interval(&Self::point(f))
    }

    /// Signed angular margin of `self` inside `outer`: the smaller gap
    /// between corresponding endpoints, negative when `self` sticks out.
    pub fn margin_in(&self, outer: &Self) -> f64 {
        self.margin_of_interval_in(outer)
    }

    fn margin_of_interval(&self, inner: &Self) -> f64 {
        inner.margin_of_interval_in(self)
    }

    fn margin_of_interval_in(&self, outer: &Self) -> f64 {
        let (lo, hi) = self.end_gaps(outer);
        lo.min(hi)
    }

    /// Angular gaps `(lower, upper)` between our ends and the matching ends
    /// of `outer`; both nonnegative iff we are contained.
    pub fn end_gaps(&self, outer: &Self) -> (f64, f64) {
        let len_j = outer.length();
        let len_i = self.length();
        // Offset of our lower end from the outer lower end, taken in the
        // window centred on the outer interval's midpoint.
        let raw = self.lo.theta() - outer.lo.theta();
        let base = len_j / 2.0 - PI / 2.0;
        let off = base + wrap_pi(raw - base);
        (off, len_j - off - len_i)
    }

    pub fn contains(&self, f: FocalCoord, tol: f64) -> bool {
        self.margin_of(f) >= -tol
    }

    pub fn mobius(&self, m: [[f64; 2]; 2]) -> Result<Self> {
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let (a, b) = (self.lo.mobius(m)?, self.hi.mobius(m)?);
        // Orientation-reversing maps swap the ends.
        Ok(if det > 0.0 { Self::new(a, b) } else { Self::new(b, a) })
    }

    /// The point a fraction `x` of the way through the interval (in angle).
    pub fn at(&self, x: f64) -> FocalCoord {
        let t = self.lo.theta() + self.length() * x;
        FocalCoord::from_pair(t.sin(), t.cos()).expect("unit pair")
    }

    /// Evenly spaced interior points (in angle), ends included.
    pub fn sample(&self, n: usize) -> Vec<FocalCoord> {
        let t0 = self.lo.theta();
        let len = self.length();
        (0..n)
            .map(|i| {
                let t = t0 + len * i as f64 / (n.max(2) - 1) as f64;
                FocalCoord::from_pair(t.sin(), t.cos()).expect("unit pair")
            })
            .collect()
    }
}

/// The data of one first-return step that the optics depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepGeometry {
    pub alpha0: f64,
    pub k0: f64,
    /// Total flight length.
    pub tau: f64,
    pub alpha1: f64,
    pub k1: f64,
    /// Flat collisions in between.
    pub n_flat: u64,
}

/// One leg of a flight between two collisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Leg {
    pub alpha0: f64,
    pub k0: f64,
    pub tau: f64,
    pub alpha1: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobianStep {
    pub m: [[f64; 2]; 2],
}

/// Cosines below this make a step singular.
pub const MIN_COS: f64 = 1e-12;

impl JacobianStep {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// Differential of one collision-to-collision map.
    pub fn leg(l: &Leg) -> Result<Self> {
        let c0 = l.alpha0.cos();
        let c1 = l.alpha1.cos();
        if c1 < MIN_COS || c0 < MIN_COS {
            return Err(Error::SingularStep(format!(
                "grazing step: cos a0 = {c0:e}, cos a1 = {c1:e}"
            )));
        }
        let (k0, k1, tau) = (l.k0, l.k1, l.tau);
        let a = c0 - tau * k0;
        Ok(Self {
            m: [
                [-a / c1, -tau / c1],
                [k0 + k1 * a / c1, -1.0 + k1 * tau / c1],
            ],
        })
    }

    /// `other` after `self`.
    pub fn then(&self, other: &Self) -> Self {
        let (a, b) = (&other.m, &self.m);
        let mut m = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self { m }
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn apply(&self, v: TangentVector) -> TangentVector {
        TangentVector::new(
            self.m[0][0] * v.ds + self.m[0][1] * v.da,
            self.m[1][0] * v.ds + self.m[1][1] * v.da,
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        let m = self.m;
        Self {
            m: [[c * m[0][0], c * m[0][1]], [c * m[1][0], c * m[1][1]]],
        }
    }

    /// Eigenvalues of a real 2x2 matrix, as `(re, im)` pairs.
    pub fn eigenvalues(&self) -> [(f64, f64); 2] {
        let tr = self.m[0][0] + self.m[1][1];
        let disc = tr * tr / 4.0 - self.det();
        if disc >= 0.0 {
            let s = disc.sqrt();
            [(tr / 2.0 + s, 0.0), (tr / 2.0 - s, 0.0)]
        } else {
            let s = (-disc).sqrt();
            [(tr / 2.0, s), (tr / 2.0, -s)]
        }
    }
}

/// Differential of a first-return step. Each flat bounce maps the beam
/// `(cos(a) ds, da - k ds)` to its negative, so the flat part of the flight
/// collapses to one leg of the total length up to the sign `(-1)^n_flat`.
pub fn jacobian_step(g: &StepGeometry) -> Result<JacobianStep> {
    let j = JacobianStep::leg(&Leg {
        alpha0: g.alpha0,
        k0: g.k0,
        tau: g.tau,
        alpha1: g.alpha1,
        k1: g.k1,
    })?;
    Ok(if g.n_flat % 2 == 1 { j.scaled(-1.0) } else { j })
}

/// Composition of the per-leg differentials.
pub fn jacobian_of_legs(legs: &[Leg]) -> Result<JacobianStep> {
    legs.iter()
        .try_fold(JacobianStep::identity(), |acc, l| Ok(acc.then(&JacobianStep::leg(l)?)))
}

/// `f+` at the end of the step from `f+` at its start.
pub fn propagate_focal(f_plus: FocalCoord, g: &StepGeometry) -> FocalCoord {
    mirror_reflect(free_flight(f_plus, g.tau), g.k1, g.alpha1)
}

/// Möbius matrix of [`propagate_focal`] on `(p, q)` pairs.
pub fn step_matrix(g: &StepGeometry) -> [[f64; 2]; 2] {
    let f = flight_matrix(g.tau);
    let r = mirror_matrix(g.k1, g.alpha1);
    [
        [r[0][0] * f[0][0] + r[0][1] * f[1][0], r[0][0] * f[0][1] + r[0][1] * f[1][1]],
        [r[1][0] * f[0][0] + r[1][1] * f[1][0], r[1][0] * f[0][1] + r[1][1] * f[1][1]],
    ]
}

/// Image of a projective interval of `f+` values through one step.
/// The map has determinant one, so the ends map to the ends.
pub fn propagate_interval(i: &ProjInterval, g: &StepGeometry) -> ProjInterval {
    i.mobius(step_matrix(g)).expect("unimodular map of a unit pair")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focal_examples() {
        let (fp, fm) = focal_from_vector(TangentVector::new(0.0, 1.0), 0.3, 0.7).unwrap();
        assert_eq!(fp.value(), 0.0);
        assert_eq!(fm.value(), 0.0);
        let (fp, fm) = focal_from_vector(TangentVector::new(1.0, 0.0), 0.0, -1.0).unwrap();
        assert_eq!(fp.value(), -1.0);
        assert_eq!(fm.value(), 1.0);
        let (fp, _) = focal_from_vector(TangentVector::new(1.0, 0.4), 0.2, 0.4).unwrap();
        assert!(fp.is_infinite());
        assert!(focal_from_vector(TangentVector::new(0.0, 0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn small_ds_tends_to_zero_focus() {
        for e in [1e-3, 1e-6, 1e-9] {
            let (fp, fm) = focal_from_vector(TangentVector::new(e, 1.0), 0.4, 0.3).unwrap();
            assert!(fp.value().abs() < 2.0 * e && fm.value().abs() < 2.0 * e);
        }
    }

    #[test]
    fn mirror_examples() {
        let f = FocalCoord::finite(-2.5);
        assert_eq!(mirror_reflect(f, 0.0, 0.3), f);
        let out = mirror_reflect(FocalCoord::infinity(), 0.1, 0.4);
        assert!((out.value() - 0.4f64.cos() / 0.2).abs() < 1e-12);
        assert_eq!(mirror_reflect(FocalCoord::zero(), 0.1, 0.4).value(), 0.0);
    }

    #[test]
    fn flight_examples() {
        assert_eq!(free_flight(FocalCoord::zero(), 3.0).value(), -3.0);
        assert!(free_flight(FocalCoord::infinity(), 3.0).is_infinite());
    }

    #[test]
    fn beta_examples() {
        let k = 0.1;
        assert!((focal_of_beta(2.0, 0.0, k).unwrap().value() - 10.0).abs() < 1e-12);
        assert!((focal_of_beta(4.0, 0.3, k).unwrap().value() - 0.3f64.cos() / 0.2).abs() < 1e-12);
        assert_eq!(beta_reflect(2.0, 0.1).unwrap(), 2.0);
        assert_eq!(beta_reflect(0.0, 0.1).unwrap(), 4.0);
        assert_eq!(beta_reflect(-2.0, -1.0).unwrap(), -2.0);
        assert!(focal_of_beta(0.0, 0.0, k).unwrap().is_infinite());
        assert!(beta_reflect(1.0, 0.0).is_err());
    }

    #[test]
    fn interval_translation() {
        let g = StepGeometry {
            alpha0: 0.0,
            k0: 0.0,
            tau: 2.0,
            alpha1: 0.0,
            k1: 0.0,
            n_flat: 0,
        };
        let out = propagate_interval(&ProjInterval::finite(-1.0, 0.0), &g);
        assert!((out.lo.value() + 3.0).abs() < 1e-12);
        assert!((out.hi.value() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn interval_margins() {
        let j = ProjInterval::new(FocalCoord::infinity(), FocalCoord::zero());
        assert!(j.contains(FocalCoord::finite(-3.0), 0.0));
        assert!(!j.contains(FocalCoord::finite(3.0), 0.0));
        let i = ProjInterval::finite(-2.0, -1.0);
        assert!(i.margin_in(&j) > 0.0);
        assert!(ProjInterval::finite(-1.0, 1.0).margin_in(&j) < 0.0);
        // An interval through infinity.
        let w = ProjInterval::finite(5.0, -5.0);
        assert!(w.contains(FocalCoord::infinity(), 0.0));
        assert!(w.contains(FocalCoord::finite(-100.0), 0.0));
        assert!(!w.contains(FocalCoord::zero(), 0.0));
        assert!(j.margin_in(&j).abs() < 1e-15);
    }

    #[test]
    fn flat_square_is_parabolic() {
        let g = StepGeometry {
            alpha0: 0.3,
            k0: 0.0,
            tau: 1.7,
            alpha1: -0.3,
            k1: 0.0,
            n_flat: 2,
        };
        let j = jacobian_step(&g).unwrap();
        for (re, im) in j.eigenvalues() {
            assert!((re.hypot(im) - 1.0).abs() < 1e-12);
        }
    }
}
