//! Numerical checks for polynomial witness families `a_1, ..., a_d` over the
//! complex numbers: the separating circles around each cluster, the
//! coefficient bound on each cluster, and recovery of the monodromy braid by
//! following the points `a_i(z)` while `z` runs once around `|z| = |z0|`.

use std::f64::consts::TAU;

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use crate::braid::{braid_action, BraidWord};
use crate::clusters::{compute_clusters, ClusterForest};
use crate::error::{Error, Result};
use crate::freegroup::{FreeWord, Letter};
use crate::intersection::{canonical_order, series_matrix};
use crate::monodromy::monodromy_automorphism;
use crate::rational::Rational;

pub const DEFAULT_SAMPLES: usize = 4096;
const MAX_REFINEMENTS: u32 = 20;
const CROSSING_TOLERANCE: f64 = 1e-9;
const ROTATION_STEP: f64 = 0.05;
const MAX_ROTATIONS: u32 = 16;

type ExactComplex = Complex<BigRational>;

/// A real parameter given either as a rational or as a `[re, im]` pair with
/// zero imaginary part.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct RealParam(pub Rational);

impl<'de> Deserialize<'de> for RealParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Scalar(Rational),
            Pair([Rational; 2]),
        }
        match Raw::deserialize(d)? {
            Raw::Scalar(q) => Ok(RealParam(q)),
            Raw::Pair([re, im]) if im.0.is_zero() => Ok(RealParam(re)),
            Raw::Pair(_) => Err(serde::de::Error::custom("eta and r must be real")),
        }
    }
}

/// Polynomials with rational coefficients (constant term first), the radii
/// `eta` and `r`, the base point `z0 = [re, im]` and the sample count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFamily {
    pub polynomials: Vec<Vec<Rational>>,
    pub eta: RealParam,
    pub r: RealParam,
    pub z0: [Rational; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn rat(s: &str) -> Rational {
    Rational::parse(s).expect("valid rational literal")
}

impl WitnessFamily {
    /// Builds a family from string literals, e.g. `&[&["0"], &["0", "1"]]`.
    pub fn new(polynomials: &[&[&str]], eta: &str, r: &str, z0: [&str; 2]) -> Self {
        WitnessFamily {
            polynomials: polynomials.iter().map(|p| p.iter().map(|c| rat(c)).collect()).collect(),
            eta: RealParam(rat(eta)),
            r: RealParam(rat(r)),
            z0: [rat(z0[0]), rat(z0[1])],
            samples: DEFAULT_SAMPLES,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let w: WitnessFamily = serde_json::from_str(s).map_err(|e| Error::MalformedInput(e.to_string()))?;
        w.validate()?;
        Ok(w)
    }

    pub fn d(&self) -> usize {
        self.polynomials.len()
    }

    fn eta(&self) -> &BigRational {
        &self.eta.0 .0
    }

    fn r(&self) -> &BigRational {
        &self.r.0 .0
    }

    fn z0_exact(&self) -> ExactComplex {
        Complex::new(self.z0[0].0.clone(), self.z0[1].0.clone())
    }

    /// Checks `d >= 2`, `eta >= 0`, `r > 0`, `r/2 < |z0| < r`, at least one
    /// sample, and pairwise distinct polynomials.
    pub fn validate(&self) -> Result<()> {
        if self.d() < 2 {
            return Err(Error::MalformedInput(format!("need at least 2 polynomials, got {}", self.d())));
        }
        if self.eta().is_negative() {
            return Err(Error::MalformedInput("eta must be non-negative".into()));
        }
        if !self.r().is_positive() {
            return Err(Error::MalformedInput("r must be positive".into()));
        }
        if self.samples == 0 {
            return Err(Error::MalformedInput("samples must be positive".into()));
        }
        let z2 = self.z0_exact().norm_sqr();
        let r2 = self.r() * self.r();
        let quarter = BigRational::new(1.into(), 4.into());
        if !(z2 > &r2 * &quarter && z2 < r2) {
            return Err(Error::MalformedInput("z0 must satisfy r/2 < |z0| < r".into()));
        }
        series_matrix(&self.polynomials)?;
        Ok(())
    }
}

/// A cluster named by family indices (1-based, ascending).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCluster {
    pub members: Vec<usize>,
    pub depth: u32,
}

/// Clusters of the family's intersection matrix in family indices, ordered
/// by depth and then by smallest member.
pub fn family_clusters(w: &WitnessFamily) -> Result<Vec<FamilyCluster>> {
    let m = series_matrix(&w.polynomials)?;
    let (order, sorted) = canonical_order(&m);
    let forest = compute_clusters(&sorted)?;
    let mut out: Vec<FamilyCluster> = forest
        .clusters
        .iter()
        .map(|c| {
            let mut members: Vec<usize> = c.members().map(|k| order[k - 1] + 1).collect();
            members.sort_unstable();
            FamilyCluster { members, depth: c.depth }
        })
        .collect();
    out.sort_by(|a, b| (a.depth, &a.members).cmp(&(b.depth, &b.members)));
    Ok(out)
}

fn eval_exact(coeffs: &[Rational], z: &ExactComplex) -> ExactComplex {
    coeffs.iter().rev().fold(Complex::zero(), |acc, c| acc * z.clone() + Complex::new(c.0.clone(), BigRational::zero()))
}

/// Centre `b_{I,n}(z0)` and radius `r^(n-1) eta` of a cluster's circle.
fn circle(w: &WitnessFamily, c: &FamilyCluster) -> (ExactComplex, BigRational) {
    let rep = &w.polynomials[c.members[0] - 1];
    let trunc: Vec<Rational> = rep.iter().take(c.depth as usize).cloned().collect();
    let centre = eval_exact(&trunc, &w.z0_exact());
    let radius = num_traits::pow(w.r().clone(), c.depth as usize - 1) * w.eta();
    (centre, radius)
}

fn to_f64(q: &BigRational) -> f64 {
    Rational(q.clone()).to_f64()
}

/// One inequality that was checked; `lhs < rhs` (or `lhs > rhs` for the
/// separation kinds) held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub kind: String,
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleRecord {
    pub members: Vec<usize>,
    pub depth: u32,
    pub centre: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub circles: Vec<CircleRecord>,
    pub checks: Vec<InequalityCheck>,
}

fn fmt_members(m: &[usize]) -> String {
    let parts: Vec<String> = m.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// `({1,2},3)`: a cluster named by its members and depth.
fn fmt_cluster(c: &FamilyCluster) -> String {
    format!("({},{})", fmt_members(&c.members), c.depth)
}

/// Checks in exact arithmetic that nested circles are nested, disjoint
/// clusters have disjoint discs, and `a_i(z0)` lies inside the circle of
/// `(I, n)` exactly when `i` is in `I`.
pub fn verify_separation(w: &WitnessFamily) -> Result<SeparationReport> {
    w.validate()?;
    let clusters = family_clusters(w)?;
    let circles: Vec<(ExactComplex, BigRational)> = clusters.iter().map(|c| circle(w, c)).collect();
    let z0 = w.z0_exact();
    let values: Vec<ExactComplex> = w.polynomials.iter().map(|p| eval_exact(p, &z0)).collect();
    let mut checks = Vec::new();
    let fail = |what: String, lhs: &BigRational, rhs: &BigRational| {
        Error::ParametersTooLarge(format!(
            "{what} fails ({:.6e} vs {:.6e}); shrink eta or r",
            to_f64(lhs).sqrt(),
            to_f64(rhs).sqrt()
        ))
    };
    for (a, ca) in clusters.iter().enumerate() {
        for (b, cb) in clusters.iter().enumerate().skip(a + 1) {
            let (wa, ra) = &circles[a];
            let (wb, rb) = &circles[b];
            let dist2 = (wa - wb).norm_sqr();
            let nested = cb.members.iter().all(|i| ca.members.contains(i));
            let (kind, what, ok, bound) = if nested {
                // |wa - wb| + rb < ra
                let gap = ra - rb;
                let ok = gap.is_positive() && dist2 < &gap * &gap;
                (
                    "nested",
                    format!(
                        "|w{} - w{}| + rho{} < rho{}",
                        fmt_cluster(ca),
                        fmt_cluster(cb),
                        fmt_cluster(cb),
                        fmt_cluster(ca)
                    ),
                    ok,
                    if gap.is_positive() { &gap * &gap } else { BigRational::zero() },
                )
            } else {
                let sum = ra + rb;
                let ok = dist2 > &sum * &sum;
                (
                    "disjoint",
                    format!(
                        "|w{} - w{}| > rho{} + rho{}",
                        fmt_cluster(ca),
                        fmt_cluster(cb),
                        fmt_cluster(ca),
                        fmt_cluster(cb)
                    ),
                    ok,
                    &sum * &sum,
                )
            };
            if !ok {
                return Err(fail(what, &dist2, &bound));
            }
            checks.push(InequalityCheck {
                kind: kind.into(),
                description: what,
                lhs: to_f64(&dist2).sqrt(),
                rhs: to_f64(&bound).sqrt(),
            });
        }
    }
    for (c, (centre, radius)) in clusters.iter().zip(&circles) {
        let rho2 = radius * radius;
        for (i, v) in values.iter().enumerate() {
            let dist2 = (v - centre).norm_sqr();
            let member = c.members.contains(&(i + 1));
            let (kind, rel, ok) = if member { ("member", "<", dist2 < rho2) } else { ("non-member", ">", dist2 > rho2) };
            let what = format!("|a{}(z0) - w{}| {rel} rho{}", i + 1, fmt_cluster(c), fmt_cluster(c));
            if !ok {
                return Err(fail(what, &dist2, &rho2));
            }
            checks.push(InequalityCheck {
                kind: kind.into(),
                description: what,
                lhs: to_f64(&dist2).sqrt(),
                rhs: to_f64(&rho2).sqrt(),
            });
        }
    }
    let circles = clusters
        .iter()
        .zip(&circles)
        .map(|(c, (centre, radius))| CircleRecord {
            members: c.members.clone(),
            depth: c.depth,
            centre: [to_f64(&centre.re), to_f64(&centre.im)],
            radius: to_f64(radius),
        })
        .collect();
    Ok(SeparationReport { circles, checks })
}

/// Closed interval with outward rounding after every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `x` widened by `ulps` units in the last place on each side.
    fn around(x: f64, ulps: u32) -> Self {
        let (mut lo, mut hi) = (x, x);
        for _ in 0..ulps {
            lo = lo.next_down();
            hi = hi.next_up();
        }
        Interval { lo, hi }
    }

    fn is_zero(self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    fn add(self, o: Self) -> Self {
        // adding an exact zero is exact
        if o.is_zero() {
            return self;
        }
        if self.is_zero() {
            return o;
        }
        Interval { lo: (self.lo + o.lo).next_down(), hi: (self.hi + o.hi).next_up() }
    }

    fn neg(self) -> Self {
        Interval { lo: -self.hi, hi: -self.lo }
    }

    fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Interval::point(0.0);
        }
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval { lo: lo.next_down(), hi: hi.next_up() }
    }

    fn square(self) -> Self {
        if self.is_zero() {
            self
        } else if self.lo >= 0.0 {
            Interval { lo: (self.lo * self.lo).next_down().max(0.0), hi: (self.hi * self.hi).next_up() }
        } else if self.hi <= 0.0 {
            Interval { lo: (self.hi * self.hi).next_down().max(0.0), hi: (self.lo * self.lo).next_up() }
        } else {
            let m = self.lo.abs().max(self.hi.abs());
            Interval { lo: 0.0, hi: (m * m).next_up() }
        }
    }

    fn sqrt(self) -> Self {
        Interval { lo: self.lo.max(0.0).sqrt().next_down().max(0.0), hi: if self.hi == 0.0 { 0.0 } else { self.hi.sqrt().next_up() } }
    }
}

#[derive(Debug, Clone, Copy)]
struct ComplexInterval {
    re: Interval,
    im: Interval,
}

impl ComplexInterval {
    fn zero() -> Self {
        ComplexInterval { re: Interval::point(0.0), im: Interval::point(0.0) }
    }

    fn add(self, o: Self) -> Self {
        ComplexInterval { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn mul(self, o: Self) -> Self {
        ComplexInterval {
            re: self.re.mul(o.re).sub(self.im.mul(o.im)),
            im: self.re.mul(o.im).add(self.im.mul(o.re)),
        }
    }

    fn abs(self) -> Interval {
        self.re.square().add(self.im.square()).sqrt()
    }
}

fn rational_interval(q: &Rational) -> Interval {
    Interval::around(q.to_f64(), 4)
}

fn eval_interval(coeffs: &[Interval], z: ComplexInterval) -> ComplexInterval {
    coeffs.iter().rev().fold(ComplexInterval::zero(), |acc, &c| {
        acc.mul(z).add(ComplexInterval { re: c, im: Interval::point(0.0) })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    pub members: Vec<usize>,
    pub depth: u32,
    pub index: usize,
    /// Largest certified upper bound of `|a_i(z) - b(z)| / (|z|^(n-1) eta)`
    /// over the samples.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub samples: usize,
    pub records: Vec<BoundRecord>,
}

/// Checks `|a_i(z) - b_{I,n}(z)| < |z|^(n-1) eta` for every cluster, every
/// member `i` and every sampled `z = z0 * exp(2 pi i k / S)`, with interval
/// enclosures of both sides.
pub fn verify_cluster_bound(w: &WitnessFamily) -> Result<BoundReport> {
    w.validate()?;
    let clusters = family_clusters(w)?;
    let eta = rational_interval(&w.eta.0);
    let z0 = ComplexInterval { re: rational_interval(&w.z0[0]), im: rational_interval(&w.z0[1]) };
    let samples: Vec<(f64, ComplexInterval)> = (0..w.samples)
        .map(|k| {
            let t = k as f64 / w.samples as f64;
            let e = ComplexInterval {
                re: Interval::around((TAU * t).cos(), 2),
                im: Interval::around((TAU * t).sin(), 2),
            };
            (t, z0.mul(e))
        })
        .collect();
    let mut records = Vec::new();
    for c in &clusters {
        let n = c.depth as usize;
        let rep = &w.polynomials[c.members[0] - 1];
        for &i in &c.members {
            let a = &w.polynomials[i - 1];
            // coefficients of a_i - b_{I,n}: degrees below n vanish
            let diff: Vec<Interval> = a
                .iter()
                .enumerate()
                .map(|(k, q)| if k < n { Interval::point(0.0) } else { rational_interval(q) })
                .collect();
            debug_assert!(rep.iter().take(n).zip(a).all(|(x, y)| x == y));
            let mut worst: f64 = 0.0;
            for &(t, z) in &samples {
                let lhs = eval_interval(&diff, z).abs();
                let modulus = z.abs();
                let rhs = (1..n).fold(eta, |acc, _| acc.mul(modulus));
                if lhs.hi >= rhs.lo || lhs.hi.is_nan() || rhs.lo.is_nan() {
                    return Err(Error::ParametersTooLarge(format!(
                        "|a{i}(z) - b{}(z)| < |z|^{} eta fails at t = {t} ({:.6e} vs {:.6e}); shrink eta or r",
                        fmt_cluster(c),
                        n - 1,
                        lhs.hi,
                        rhs.lo
                    )));
                }
                worst = worst.max(lhs.hi / rhs.lo);
            }
            records.push(BoundRecord { members: c.members.clone(), depth: c.depth, index: i, worst_ratio: worst });
        }
    }
    Ok(BoundReport { samples: w.samples, records })
}

/// A braid recovered by strand tracking. `order[k]` is the family index
/// (1-based) of the strand in position `k + 1` at `t = 0`, counted along the
/// projection direction `exp(i angle)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackedBraid {
    pub braid: BraidWord,
    pub order: Vec<usize>,
    pub angle: f64,
}

/// Tracking under one projection failed near time `t`: a tie, a tangency or
/// several overlapping exchanges at once. Another projection may succeed.
struct NonGeneric(f64);

struct Tracker {
    polys: Vec<Vec<Complex64>>,
    z0: Complex64,
    rotation: Complex64,
    scale: f64,
}

impl Tracker {
    fn position(&self, i: usize, t: f64) -> Complex64 {
        let z = self.z0 * Complex64::from_polar(1.0, TAU * t);
        let v = self.polys[i].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
        v * self.rotation
    }

    fn sorted_at(&self, t: f64) -> std::result::Result<Vec<usize>, NonGeneric> {
        let re: Vec<f64> = (0..self.polys.len()).map(|i| self.position(i, t).re).collect();
        let mut idx: Vec<usize> = (0..re.len()).collect();
        idx.sort_by(|&a, &b| re[a].total_cmp(&re[b]));
        Ok(idx)
    }

    /// Sign of the crossing of adjacent strands `left` and `right` inside
    /// `[t0, t1]`, where `left` is left of `right` at `t0` and right of it
    /// at `t1`.
    fn crossing(&self, left: usize, right: usize, mut t0: f64, mut t1: f64) -> std::result::Result<bool, NonGeneric> {
        let f = |t: f64| self.position(left, t).re - self.position(right, t).re;
        while t1 - t0 > CROSSING_TOLERANCE {
            let mid = 0.5 * (t0 + t1);
            if f(mid) < 0.0 {
                t0 = mid;
            } else {
                t1 = mid;
            }
        }
        let tc = 0.5 * (t0 + t1);
        let gap = self.position(left, tc).im - self.position(right, tc).im;
        if gap.abs() < 1e-12 * self.scale {
            return Err(NonGeneric(tc));
        }
        Ok(gap < 0.0)
    }

    fn refine(
        &self,
        current: &mut Vec<usize>,
        letters: &mut Vec<Letter>,
        t0: f64,
        t1: f64,
        depth: u32,
    ) -> std::result::Result<(), NonGeneric> {
        let next = self.sorted_at(t1)?;
        let swaps: Vec<usize> = (0..current.len()).filter(|&k| current[k] != next[k]).collect();
        if swaps.is_empty() {
            // guard against two crossings of the same pair within one step
            let mid = self.sorted_at(0.5 * (t0 + t1))?;
            if mid == *current {
                return Ok(());
            }
            if depth >= MAX_REFINEMENTS {
                return Err(NonGeneric(t0));
            }
            self.refine(current, letters, t0, 0.5 * (t0 + t1), depth + 1)?;
            return self.refine(current, letters, 0.5 * (t0 + t1), t1, depth + 1);
        }
        let adjacent = swaps.chunks(2).all(|p| {
            p.len() == 2 && p[1] == p[0] + 1 && current[p[0]] == next[p[1]] && current[p[1]] == next[p[0]]
        });
        if adjacent && (swaps.len() == 2 || depth >= MAX_REFINEMENTS) {
            for p in swaps.chunks(2) {
                let k = p[0];
                let positive = self.crossing(current[k], current[k + 1], t0, t1)?;
                letters.push(Letter { index: k + 1, inverse: !positive });
                current.swap(k, k + 1);
            }
            return Ok(());
        }
        if depth >= MAX_REFINEMENTS {
            return Err(NonGeneric(t0));
        }
        let mid = 0.5 * (t0 + t1);
        self.refine(current, letters, t0, mid, depth + 1)?;
        self.refine(current, letters, mid, t1, depth + 1)
    }

    fn run(&self, samples: usize) -> std::result::Result<(Vec<usize>, Vec<Letter>), NonGeneric> {
        let start = self.sorted_at(0.0)?;
        let re: Vec<f64> = start.iter().map(|&i| self.position(i, 0.0).re).collect();
        if re.windows(2).any(|p| p[1] - p[0] < 1e-12 * self.scale) {
            return Err(NonGeneric(0.0));
        }
        let mut current = start.clone();
        let mut letters = Vec::new();
        for k in 0..samples {
            let t0 = k as f64 / samples as f64;
            let t1 = (k + 1) as f64 / samples as f64;
            self.refine(&mut current, &mut letters, t0, t1, 0)?;
        }
        if current != start {
            return Err(NonGeneric(1.0));
        }
        Ok((start, letters))
    }
}

/// Follows `a_i(z0 * exp(2 pi i t))` for `t` in `[0, 1]` and records each
/// exchange of adjacent strands in the projected order as `b_k` (the left
/// strand passes below, i.e. has the smaller imaginary part) or `b_k^-1`.
/// A tie, tangency or simultaneous overlapping exchange rotates the
/// projection and restarts.
pub fn track_braid(w: &WitnessFamily) -> Result<TrackedBraid> {
    w.validate()?;
    let polys: Vec<Vec<Complex64>> = w
        .polynomials
        .iter()
        .map(|p| p.iter().map(|c| Complex64::new(c.to_f64(), 0.0)).collect())
        .collect();
    let z0 = Complex64::new(w.z0[0].to_f64(), w.z0[1].to_f64());
    let scale = polys
        .iter()
        .map(|p| p.iter().enumerate().map(|(k, c)| c.norm() * z0.norm().powi(k as i32)).sum::<f64>())
        .fold(1.0, f64::max);
    let mut last_t = 0.0;
    for step in 0..MAX_ROTATIONS {
        let angle = step as f64 * ROTATION_STEP;
        let tracker = Tracker { polys: polys.clone(), z0, rotation: Complex64::from_polar(1.0, -angle), scale };
        match tracker.run(w.samples) {
            Ok((start, letters)) => {
                let braid = BraidWord::new(w.d(), letters)?;
                return Ok(TrackedBraid { braid, order: start.iter().map(|i| i + 1).collect(), angle });
            }
            Err(NonGeneric(t)) => last_t = t,
        }
    }
    Err(Error::UnresolvedCrossing { t: last_t })
}

/// Comparison of the tracked braid's action with the cluster monodromy,
/// both written in the basis given by the projected order at `t = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub tracked: TrackedBraid,
    pub forest: ClusterForest,
    /// `g` with `braid action = g * monodromy * g^-1`, if one exists.
    pub conjugator: Option<FreeWord>,
    pub exact: bool,
}

impl OracleReport {
    pub fn agrees(&self) -> bool {
        self.conjugator.is_some()
    }
}

/// Tracks the braid of a family that passes the separation checks and
/// compares its action with the Dehn-twist monodromy of its clusters.
pub fn monodromy_oracle(w: &WitnessFamily) -> Result<OracleReport> {
    verify_separation(w)?;
    let tracked = track_braid(w)?;
    let m = series_matrix(&w.polynomials)?;
    let order: Vec<usize> = tracked.order.iter().map(|i| i - 1).collect();
    let forest = compute_clusters(&m.reindex(&order))?;
    let expected = monodromy_automorphism(&forest);
    let actual = braid_action(&tracked.braid, w.d())?;
    let conjugator = actual.is_inner_shift(&expected)?;
    Ok(OracleReport { exact: actual == expected, tracked, forest, conjugator })
}

/// Everything `verify-topology` reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyReport {
    pub schema_version: u32,
    pub clusters: Vec<FamilyCluster>,
    pub separation: SeparationReport,
    pub bound: BoundReport,
    pub oracle: OracleReport,
}

impl TopologyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("clusters:\n");
        for c in &self.clusters {
            out.push_str(&format!("  {} depth {}\n", fmt_members(&c.members), c.depth));
        }
        out.push_str(&format!("separation: pass ({} inequalities)\n", self.separation.checks.len()));
        let worst = self.bound.records.iter().map(|r| r.worst_ratio).fold(0.0, f64::max);
        out.push_str(&format!(
            "cluster bound: pass ({} samples, worst ratio {worst:.4})\n",
            self.bound.samples
        ));
        let order: Vec<String> = self.oracle.tracked.order.iter().map(|i| format!("a{i}")).collect();
        out.push_str(&format!("strand order at t = 0: {}\n", order.join(" < ")));
        out.push_str(&format!("tracked braid: {}\n", self.oracle.tracked.braid));
        match &self.oracle.conjugator {
            Some(g) if self.oracle.exact => out.push_str(&format!("monodromy: agrees exactly (conjugator {g})\n")),
            Some(g) => out.push_str(&format!("monodromy: agrees up to conjugation by {g}\n")),
            None => out.push_str("monodromy: DISAGREES\n"),
        }
        out
    }
}

pub fn verify_topology(w: &WitnessFamily) -> Result<TopologyReport> {
    let separation = verify_separation(w)?;
    let bound = verify_cluster_bound(w)?;
    let oracle = monodromy_oracle(w)?;
    Ok(TopologyReport {
        schema_version: crate::SCHEMA_VERSION,
        clusters: family_clusters(w)?,
        separation,
        bound,
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clusters::Cluster;

    fn nested_family() -> WitnessFamily {
        WitnessFamily::new(&[&["0"], &["0", "0", "1"], &["0", "1"]], "1/8", "1/16", ["3/64", "0"])
    }

    fn pair_family() -> WitnessFamily {
        WitnessFamily::new(&[&["0"], &["0", "1"]], "1/8", "1/16", ["3/64", "0"])
    }

    #[test]
    fn clusters_in_family_indices() {
        let c = family_clusters(&nested_family()).unwrap();
        assert_eq!(
            c,
            vec![
                FamilyCluster { members: vec![1, 2, 3], depth: 1 },
                FamilyCluster { members: vec![1, 2], depth: 2 }
            ]
        );
    }

    #[test]
    fn validation() {
        let mut w = pair_family();
        w.z0 = [rat("1/64"), rat("0")];
        assert!(matches!(w.validate(), Err(Error::MalformedInput(_))));
        let mut w = pair_family();
        w.polynomials[1] = vec![rat("0")];
        assert!(matches!(w.validate(), Err(Error::DuplicatePoint { .. })));
        let json = r#"{"polynomials": [[0], [0, 1]], "eta": ["1/8", 0], "r": "1/16", "z0": ["3/64", "0"]}"#;
        let w = WitnessFamily::from_json(json).unwrap();
        assert_eq!(w, pair_family());
        let json = r#"{"polynomials": [[0], [0, 1]], "eta": ["1/8", 1], "r": "1/16", "z0": ["3/64", "0"]}"#;
        assert!(matches!(WitnessFamily::from_json(json), Err(Error::MalformedInput(_))));
    }

    #[test]
    fn separation_passes_and_fails() {
        let report = verify_separation(&nested_family()).unwrap();
        assert_eq!(report.circles.len(), 2);
        // one nesting check and three membership checks per circle
        assert_eq!(report.checks.len(), 7);
        let mut big = nested_family();
        big.eta = RealParam(rat("10"));
        assert!(matches!(verify_separation(&big), Err(Error::ParametersTooLarge(_))));
        let trivial = WitnessFamily::new(&[&["0"], &["1"]], "1/8", "1/16", ["3/64", "0"]);
        assert!(verify_separation(&trivial).unwrap().checks.is_empty());
    }

    #[test]
    fn separation_matches_hand_computation() {
        // independent float computation of the inner circle's checks:
        // centre 0, radius r * eta = 1/128, values 0, z0^2, z0
        let z0 = 3.0 / 64.0;
        let rho = 1.0 / 128.0;
        assert!(0.0 < rho && z0 * z0 < rho && z0 > rho);
        let report = verify_separation(&nested_family()).unwrap();
        let inner = &report.circles[1];
        assert_eq!(inner.radius, rho);
        assert_eq!(inner.centre, [0.0, 0.0]);
    }

    #[test]
    fn cluster_bound() {
        let report = verify_cluster_bound(&nested_family()).unwrap();
        assert_eq!(report.records.len(), 5);
        // a_1 = 0 equals its truncation, so its ratio is exactly 0
        assert!(report.records.iter().any(|r| r.index == 1 && r.worst_ratio == 0.0));
        // |z^2| / (|z| eta) = |z0| / eta = 3/8 on the inner cluster
        let a2 = report.records.iter().find(|r| r.depth == 2 && r.index == 2).unwrap();
        assert!((a2.worst_ratio - 0.375).abs() < 1e-9);
        let mut zero = nested_family();
        zero.eta = RealParam(rat("0"));
        assert!(matches!(verify_cluster_bound(&zero), Err(Error::ParametersTooLarge(_))));
    }

    #[test]
    fn single_pair_full_twist() {
        let t = track_braid(&pair_family()).unwrap();
        assert_eq!(t.braid.to_string(), "b1*b1");
        assert_eq!(t.order, vec![1, 2]);
    }

    #[test]
    fn constant_pair_has_no_crossings() {
        let w = WitnessFamily::new(&[&["0"], &["1"]], "1/8", "1/16", ["3/64", "0"]);
        assert!(track_braid(&w).unwrap().braid.is_empty());
    }

    #[test]
    fn nested_family_oracle() {
        let report = monodromy_oracle(&nested_family()).unwrap();
        assert!(report.tracked.braid.is_pure());
        assert_eq!(report.forest.clusters, vec![Cluster::new(1, 3, 1), Cluster::new(1, 2, 2)]);
        assert!(report.agrees(), "tracked {}", report.tracked.braid);
    }

    #[test]
    fn doubling_samples_is_stable() {
        let mut w = nested_family();
        let base = track_braid(&w).unwrap();
        w.samples *= 2;
        assert_eq!(track_braid(&w).unwrap().braid, base.braid);
    }

    #[test]
    fn tied_start_rotates_projection() {
        // z0 on the imaginary axis puts a_1 and a_2 on the same vertical line
        let w = WitnessFamily::new(&[&["0"], &["0", "1"]], "1/8", "1/16", ["0", "3/64"]);
        let t = track_braid(&w).unwrap();
        assert!(t.angle > 0.0);
        assert_eq!(braid_action(&t.braid, 2).unwrap(), braid_action(&BraidWord::parse("b1^2", 2).unwrap(), 2).unwrap());
    }

    #[test]
    fn colliding_strands_are_unresolved() {
        // a_2(z0) = z0^2 - 9/4096 = 0 = a_1(z0)
        let w = WitnessFamily::new(&[&["0"], &["-9/4096", "0", "1"]], "1/8", "1/16", ["3/64", "0"]);
        assert!(matches!(track_braid(&w), Err(Error::UnresolvedCrossing { .. })));
    }

    #[test]
    fn two_pairs_and_chain_oracle() {
        let two_pairs = WitnessFamily::new(&[&["0"], &["0", "1"], &["1"], &["1", "0", "1"]], "1/8", "1/16", ["3/64", "0"]);
        let chain = WitnessFamily::new(&[&["0"], &["0", "0", "0", "1"], &["0", "0", "1"], &["0", "1"]], "1/2", "1/16", ["3/64", "0"]);
        for w in [two_pairs, chain] {
            verify_cluster_bound(&w).unwrap();
            let report = monodromy_oracle(&w).unwrap();
            assert!(report.agrees(), "tracked {}", report.tracked.braid);
            assert!(report.tracked.braid.is_pure());
        }
    }

    #[test]
    fn interval_arithmetic_encloses() {
        let a = Interval::around(0.1, 1);
        let b = a.mul(a).sub(Interval::point(0.01));
        assert!(b.lo <= 0.0 && 0.0 <= b.hi);
        let c = ComplexInterval { re: Interval::point(3.0), im: Interval::point(4.0) }.abs();
        assert!(c.lo <= 5.0 && 5.0 <= c.hi);
    }
}
