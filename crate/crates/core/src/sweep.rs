//! Parameter paths and grids: eigenvalue continuation, exceptional points,
//! collision sign classes and the onset of PT-symmetry breaking.
//!
//! Actions are measured against metrics shared by the whole path. The
//! admissible metrics `{G : A(t)*G + GA(t) = 0 for all sampled t}` form a real
//! vector space; a collision is same-sign when some element of it gives all
//! merging modes positive action, which holds exactly when the origin is
//! outside the convex hull of their action vectors.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::family::{path_point, Env, FamilySpec, PathSpec};
use crate::jordan::{cluster_eigenvalues, cluster_radius, smallest_right_vectors};
use crate::krein::{
    classify_mode, collision_sign_class, definite_witness, CollisionClass, Kind, ModeRecord,
};
use crate::matrix::{
    eigenvalues, eigenvector, normalize_phase, nullspace_scaled, CVector, ComplexMatrix,
    Tolerances, C64, I,
};
use crate::metric::{admissible_metrics, combine, construct_metric, nonsingular_element};

/// Samples between a collision and the modes read for its sign class.
pub const LOOKBACK: usize = 5;

const LOCATE_WIDTH: f64 = 1e-14;
const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SPREAD_SAMPLES: usize = 24;
const METRIC_DEFECT: f64 = 1e-6;
/// Relative offset from an EP at which the off-axis count is probed.
const PROBE: f64 = 1e-9;
const EP_RANK_CUT: f64 = 1e-7;

fn ser_complex<S: Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn ser_complex_vec<S: Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    v.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    EP,
    BreakingOnset,
    BreakingOffset,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepEvent {
    pub t_star: f64,
    pub env: Env,
    pub kind: EventKind,
    pub collision: CollisionClass,
    pub diagonalizable_at_ep: bool,
    #[serde(serialize_with = "ser_complex")]
    pub colliding_eigenvalue: C64,
    pub multiplicity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub env: Env,
    /// Eigenvalues of `A` in tracked order.
    #[serde(serialize_with = "ser_complex_vec")]
    pub eigenvalues: Vec<C64>,
    pub actions: Vec<f64>,
    pub kinds: Vec<Kind>,
    pub min_gap: f64,
    pub broken_count: usize,
}

/// How actions along the path were measured.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MetricSource {
    /// One metric valid at every sample; `dim` is the dimension of the
    /// space of such metrics.
    Common { dim: usize },
    /// Rebuilt from the Jordan structure at the listed sample indices.
    Segmented { rebuilt_at: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedSpectrum {
    pub samples: Vec<Sample>,
    pub metric: MetricSource,
    /// Steps where tracking fell back to eigenvalue proximity.
    pub degenerate_steps: Vec<usize>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tracking {
    /// `perm[i]` is the index in the current sample continuing mode `i`.
    pub perm: Vec<usize>,
    /// Some assignment had overlap below 1/2.
    pub degenerate: bool,
}

/// Greedy matching of modes between consecutive samples by eigenvector
/// overlap, with eigenvalue distance breaking ties and deciding the pairs
/// whose overlap is below 1/2.
pub fn track_modes(prev: (&[C64], &[CVector]), curr: (&[C64], &[CVector])) -> Result<Tracking> {
    let n = prev.0.len();
    if curr.0.len() != n || prev.1.len() != n || curr.1.len() != n {
        return Err(Error::InvalidInput(
            "tracking needs equal numbers of modes".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let overlap = prev.1[i].dotc(&curr.1[j]).norm();
            let dist = (prev.0[i] - curr.0[j]).norm();
            pairs.push((overlap, dist, i, j));
        }
    }
    let mut strong: Vec<_> = pairs.iter().copied().filter(|p| p.0 >= 0.5).collect();
    strong.sort_by(|a, b| {
        if (a.0 - b.0).abs() > 1e-9 {
            b.0.total_cmp(&a.0)
        } else {
            a.1.total_cmp(&b.1)
        }
    });
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for &(_, _, i, j) in &strong {
        if perm[i] == usize::MAX && !used[j] {
            perm[i] = j;
            used[j] = true;
        }
    }
    let degenerate = perm.contains(&usize::MAX);
    if degenerate {
        let mut weak: Vec<_> = pairs
            .into_iter()
            .filter(|p| perm[p.2] == usize::MAX && !used[p.3])
            .collect();
        weak.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)));
        for (_, _, i, j) in weak {
            if perm[i] == usize::MAX && !used[j] {
                perm[i] = j;
                used[j] = true;
            }
        }
    }
    Ok(Tracking { perm, degenerate })
}

/// Unit eigenvectors for `values`; members of a cluster get orthonormal
/// vectors spanning the near-kernel of `A − μI`.
pub fn mode_vectors(a: &ComplexMatrix, values: &[C64], tol: &Tolerances) -> Result<Vec<CVector>> {
    let mut out = vec![CVector::zeros(a.n()); values.len()];
    for c in cluster_eigenvalues(values, tol) {
        if c.multiplicity == 1 {
            out[c.members[0]] = eigenvector(a, values[c.members[0]])?;
        } else {
            let vs =
                smallest_right_vectors(a.shifted(c.representative).as_dmatrix(), c.multiplicity)?;
            for (slot, v) in c.members.iter().zip(vs) {
                out[*slot] = normalize_phase(v);
            }
        }
    }
    Ok(out)
}

/// Eigenvalues of `H` off the real axis: `|Im λ| > axis·(1 + (Σ|λ|²)^½)`.
pub fn detect_breaking(h_values: &[C64], tol: &Tolerances) -> (bool, usize) {
    let scale = 1.0 + h_values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let count = h_values
        .iter()
        .filter(|z| z.im.abs() > tol.axis * scale)
        .count();
    (count > 0, count)
}

fn broken_count_of_a(values: &[C64], tol: &Tolerances) -> usize {
    let h: Vec<C64> = values.iter().map(|&l| I * l).collect();
    detect_breaking(&h, tol).1
}

/// Smallest distance between two eigenvalues.
pub fn min_gap(values: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            g = g.min((values[i] - values[j]).norm());
        }
    }
    g
}

fn at_point<T>(t: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::AtPathPoint { .. } => e,
        other => Error::AtPathPoint {
            t,
            source: Box::new(other),
        },
    })
}

fn generator_at(
    f: &FamilySpec,
    p: &PathSpec,
    t: f64,
    tol: &Tolerances,
) -> Result<(Env, ComplexMatrix)> {
    at_point(
        t,
        (|| {
            let env = path_point(f, p, t, tol)?;
            let inst = f.instantiate(&env)?;
            Ok((env, inst.a))
        })(),
    )
}

fn spectrum_at(f: &FamilySpec, p: &PathSpec, t: f64, tol: &Tolerances) -> Result<Vec<C64>> {
    let (_, a) = generator_at(f, p, t, tol)?;
    at_point(t, eigenvalues(&a))
}

/// Golden-section minimization on `[lo, hi]`. Errors with `NoMinimum` when
/// the minimizer sits at an end of the bracket.
fn golden_min(mut fun: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let (lo, hi) = (lo.min(hi), lo.max(hi));
    let (mut a, mut b) = (lo, hi);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (fun(c)?, fun(d)?);
    for _ in 0..400 {
        if b - a <= LOCATE_WIDTH * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = fun(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = fun(d)?;
        }
    }
    let (t, v) = if fc <= fd { (c, fc) } else { (d, fd) };
    let edge = 1e-6 * (hi - lo);
    if t - lo <= edge || hi - t <= edge {
        return Err(Error::NoMinimum(lo, hi));
    }
    Ok((t, v))
}

/// Minimizer of the smallest eigenvalue gap of `A(t)` inside `bracket`.
pub fn locate_ep(
    f: &FamilySpec,
    p: &PathSpec,
    bracket: (f64, f64),
    tol: &Tolerances,
) -> Result<f64> {
    let (t, _) = golden_min(
        |t| Ok(min_gap(&spectrum_at(f, p, t, tol)?)),
        bracket.0,
        bracket.1,
    )?;
    match closest_center(&spectrum_at(f, p, t, tol)?) {
        Some(center) => polish(f, p, t, center, tol),
        None => Ok(t),
    }
}

/// Bisects the squared gap of the closest pair when it changes sign around
/// `t0`, which pins a defective EP far below the noise floor of the gap.
fn polish(f: &FamilySpec, p: &PathSpec, t0: f64, center: C64, tol: &Tolerances) -> Result<f64> {
    let disc = |t: f64| -> Result<f64> {
        let values = spectrum_at(f, p, t, tol)?;
        let mut near: Vec<C64> = values.clone();
        near.sort_by(|a, b| (a - center).norm().total_cmp(&(b - center).norm()));
        Ok(if near.len() < 2 {
            0.0
        } else {
            ((near[0] - near[1]) * (near[0] - near[1])).re
        })
    };
    let w = 1e-7 * (1.0 + t0.abs());
    let (mut lo, mut hi) = (t0 - w, t0 + w);
    let d_lo = disc(lo)?;
    let d_hi = disc(hi)?;
    if d_lo == 0.0 || d_hi == 0.0 || d_lo.signum() == d_hi.signum() {
        return Ok(t0);
    }
    while hi - lo > LOCATE_WIDTH * (1.0 + t0.abs()) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if disc(mid)?.signum() == d_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn closest_center(values: &[C64]) -> Option<C64> {
    let mut best: Option<(f64, C64)> = None;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let d = (values[i] - values[j]).norm();
            if best.is_none_or(|(b, _)| d < b) {
                best = Some((d, 0.5 * (values[i] + values[j])));
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Distance between the two eigenvalues nearest `center`.
fn local_gap(values: &[C64], center: C64) -> f64 {
    let mut d: Vec<(f64, C64)> = values.iter().map(|&z| ((z - center).norm(), z)).collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if d.len() < 2 {
        return f64::INFINITY;
    }
    (d[0].1 - d[1].1).norm()
}

struct Raw {
    env: Env,
    a: ComplexMatrix,
    a_norm: f64,
    values: Vec<C64>,
    vectors: Vec<CVector>,
}

enum Plan {
    Common {
        basis: Vec<ComplexMatrix>,
        g: ComplexMatrix,
    },
    Segmented {
        metrics: Vec<ComplexMatrix>,
        index: Vec<usize>,
        rebuilt_at: Vec<usize>,
    },
}

impl Plan {
    fn metric_at(&self, k: usize) -> &ComplexMatrix {
        match self {
            Plan::Common { g, .. } => g,
            Plan::Segmented { metrics, index, .. } => &metrics[index[k]],
        }
    }

    fn basis_at(&self, k: usize) -> Vec<ComplexMatrix> {
        match self {
            Plan::Common { basis, .. } => basis.clone(),
            Plan::Segmented { .. } => vec![self.metric_at(k).clone()],
        }
    }
}

fn metric_defect(a: &ComplexMatrix, g: &ComplexMatrix) -> f64 {
    let d = (&(&a.adjoint() * g) + &(g * a)).frobenius_norm();
    let s = a.frobenius_norm() * g.frobenius_norm();
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

fn common_plan(raw: &[Raw], tol: &Tolerances) -> Result<Option<Plan>> {
    let m = raw.len();
    let picks: Vec<usize> = if m <= SPREAD_SAMPLES {
        (0..m).collect()
    } else {
        let mut v: Vec<usize> = (0..SPREAD_SAMPLES)
            .map(|k| k * (m - 1) / (SPREAD_SAMPLES - 1))
            .collect();
        v.dedup();
        v
    };
    let gens: Vec<ComplexMatrix> = picks.iter().map(|&k| raw[k].a.clone()).collect();
    let mut basis = admissible_metrics(&gens, tol)?;
    let valid = |basis: &[ComplexMatrix]| {
        raw.iter().all(|r| {
            basis
                .iter()
                .all(|g| metric_defect(&r.a, g) <= METRIC_DEFECT)
        })
    };
    if !valid(&basis) {
        let all: Vec<ComplexMatrix> = raw.iter().map(|r| r.a.clone()).collect();
        basis = admissible_metrics(&all, tol)?;
        if !valid(&basis) {
            return Ok(None);
        }
    }
    Ok(nonsingular_element(&basis, tol).map(|g| Plan::Common { basis, g }))
}

fn segmented_plan(raw: &[Raw], tol: &Tolerances, notes: &mut Vec<String>) -> Result<Plan> {
    let mut metrics: Vec<ComplexMatrix> = Vec::new();
    let mut index = Vec::with_capacity(raw.len());
    let mut rebuilt_at = Vec::new();
    for (k, r) in raw.iter().enumerate() {
        let holds = metrics
            .last()
            .is_some_and(|g| metric_defect(&r.a, g) <= METRIC_DEFECT);
        if !holds {
            match construct_metric(&r.a, tol) {
                Ok(pair) => {
                    if !metrics.is_empty() {
                        notes.push(format!("metric rebuilt at sample {k}"));
                    }
                    metrics.push(pair.g);
                    rebuilt_at.push(k);
                }
                Err(e) if metrics.is_empty() => {
                    return Err(Error::AtPathPoint {
                        t: f64::NAN,
                        source: Box::new(e),
                    });
                }
                Err(e) => notes.push(format!("sample {k}: kept previous metric ({e})")),
            }
        }
        index.push(metrics.len() - 1);
    }
    Ok(Plan::Segmented {
        metrics,
        index,
        rebuilt_at,
    })
}

fn mode_kind(a_norm: f64, g: &ComplexMatrix, lambda: C64, act: f64, tol: &Tolerances) -> Kind {
    if lambda.re.abs() > tol.axis * a_norm {
        Kind::OffAxis
    } else if act > tol.zero_action * g.frobenius_norm() {
        Kind::First
    } else if act < -tol.zero_action * g.frobenius_norm() {
        Kind::Second
    } else {
        Kind::Mixed
    }
}

struct Located {
    t: f64,
    lambda: C64,
    multiplicity: usize,
}

/// Samples the path, tracks modes and extracts exceptional points and
/// breaking events.
pub fn run_sweep(
    f: &FamilySpec,
    p: &PathSpec,
    tol: &Tolerances,
) -> Result<(TrackedSpectrum, Vec<SweepEvent>)> {
    tol.validate()?;
    p.validate_against(f)?;
    let ts: Vec<f64> = (0..p.steps).map(|k| p.t_at(k)).collect();
    let mut raw: Vec<Raw> = Vec::with_capacity(ts.len());
    let mut degenerate_steps = Vec::new();
    for (k, &t) in ts.iter().enumerate() {
        let (env, a) = generator_at(f, p, t, tol)?;
        let values = at_point(t, eigenvalues(&a))?;
        let vectors = at_point(t, mode_vectors(&a, &values, tol))?;
        let (values, vectors) = match raw.last() {
            None => (values, vectors),
            Some(prev) => {
                let tr = track_modes((&prev.values, &prev.vectors), (&values, &vectors))?;
                if tr.degenerate {
                    degenerate_steps.push(k);
                }
                (
                    tr.perm.iter().map(|&j| values[j]).collect(),
                    tr.perm.iter().map(|&j| vectors[j].clone()).collect(),
                )
            }
        };
        raw.push(Raw {
            a_norm: a.frobenius_norm(),
            env,
            a,
            values,
            vectors,
        });
    }

    let mut notes = Vec::new();
    let plan = match common_plan(&raw, tol)? {
        Some(plan) => plan,
        None => {
            notes.push(
                "no metric is shared by the whole path; metrics are rebuilt per segment".into(),
            );
            segmented_plan(&raw, tol, &mut notes).map_err(|e| match e {
                Error::AtPathPoint { source, .. } => Error::AtPathPoint { t: ts[0], source },
                other => other,
            })?
        }
    };

    let samples: Vec<Sample> = raw
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let g = plan.metric_at(k);
            let actions: Vec<f64> = r.vectors.iter().map(|v| v.dotc(&g.mul_vec(v)).re).collect();
            let kinds = r
                .values
                .iter()
                .zip(&actions)
                .map(|(&l, &act)| mode_kind(r.a_norm, g, l, act, tol))
                .collect();
            Sample {
                t: ts[k],
                env: r.env.clone(),
                eigenvalues: r.values.clone(),
                actions,
                kinds,
                min_gap: min_gap(&r.values),
                broken_count: broken_count_of_a(&r.values, tol),
            }
        })
        .collect();

    let located = find_eps(f, p, &raw, tol)?;
    let mut events = Vec::new();
    for ep in &located {
        events.push(ep_event(f, p, &raw, &plan, ep, tol)?);
    }
    let breaks = breaking_events(f, p, &raw, &plan, &samples, &mut events, tol)?;
    events.extend(breaks);
    let dir = (p.to - p.from).signum();
    events.sort_by(|a, b| {
        (dir * a.t_star)
            .total_cmp(&(dir * b.t_star))
            .then((a.kind as u8).cmp(&(b.kind as u8)))
            .then(
                a.colliding_eigenvalue
                    .im
                    .total_cmp(&b.colliding_eigenvalue.im),
            )
    });

    let metric = match &plan {
        Plan::Common { basis, .. } => MetricSource::Common { dim: basis.len() },
        Plan::Segmented { rebuilt_at, .. } => MetricSource::Segmented {
            rebuilt_at: rebuilt_at.clone(),
        },
    };
    Ok((
        TrackedSpectrum {
            samples,
            metric,
            degenerate_steps,
            notes,
        },
        events,
    ))
}

fn find_eps(f: &FamilySpec, p: &PathSpec, raw: &[Raw], tol: &Tolerances) -> Result<Vec<Located>> {
    let m = raw.len();
    let n = raw[0].values.len();
    let mut out: Vec<Located> = Vec::new();
    if m < 3 || n < 2 {
        return Ok(out);
    }
    let gap = |k: usize, i: usize, j: usize| (raw[k].values[i] - raw[k].values[j]).norm();
    let nearest = |k: usize, i: usize| {
        (0..n)
            .filter(|&j| j != i)
            .min_by(|&x, &y| gap(k, i, x).total_cmp(&gap(k, i, y)))
            .expect("n >= 2")
    };
    for k in 1..m - 1 {
        let radius = cluster_radius(&raw[k].values, tol);
        let scale = 1.0 + raw[k].values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for i in 0..n {
            let j = nearest(k, i);
            if j < i || nearest(k, j) != i {
                continue;
            }
            let (g0, g1, g2) = (gap(k - 1, i, j), gap(k, i, j), gap(k + 1, i, j));
            if g1 > g0
                || g1 > g2
                || g0.max(g2) - g1 <= 1e-6 * scale
                || (g0 <= radius && g2 <= radius)
            {
                continue;
            }
            let center = (raw[k].values[i] + raw[k].values[j]) * 0.5;
            let located = golden_min(
                |t| Ok(local_gap(&spectrum_at(f, p, t, tol)?, center)),
                p.t_at(k - 1),
                p.t_at(k + 1),
            );
            let t = match located {
                Ok((t, _)) => polish(f, p, t, center, tol)?,
                Err(Error::NoMinimum(..)) => continue,
                Err(e) => return Err(e),
            };
            let values = spectrum_at(f, p, t, tol)?;
            let r = cluster_radius(&values, tol);
            let Some(cl) = cluster_eigenvalues(&values, tol)
                .into_iter()
                .filter(|c| c.multiplicity >= 2)
                .min_by(|a, b| {
                    (a.representative - center)
                        .norm()
                        .total_cmp(&(b.representative - center).norm())
                })
            else {
                continue;
            };
            let dup = out.iter().any(|e| {
                (e.t - t).abs() <= 1e-7 * (1.0 + t.abs())
                    && (e.lambda - cl.representative).norm() <= 10.0 * r
            });
            if !dup {
                out.push(Located {
                    t,
                    lambda: cl.representative,
                    multiplicity: cl.multiplicity,
                });
            }
        }
    }
    Ok(out)
}

/// Sample indices on one side of `t`, from `LOOKBACK` steps away inwards.
fn side_samples(p: &PathSpec, m: usize, t: f64, before: bool) -> Vec<usize> {
    let pos = |k: usize| (p.t_at(k) - p.from) / (p.to - p.from);
    let pt = (t - p.from) / (p.to - p.from);
    let eps = 1e-12;
    if before {
        let Some(last) = (0..m).rev().find(|&k| pos(k) < pt - eps) else {
            return Vec::new();
        };
        (last.saturating_sub(LOOKBACK - 1)..=last).collect()
    } else {
        let Some(first) = (0..m).find(|&k| pos(k) > pt + eps) else {
            return Vec::new();
        };
        (first..=(first + LOOKBACK - 1).min(m - 1)).rev().collect()
    }
}

/// Sign class of the modes `idx` at one point, or `None` when any of them is
/// off the axis there.
fn class_at(
    r: &Raw,
    idx: &[usize],
    basis: &[ComplexMatrix],
    fallback: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Option<(CollisionClass, Option<String>)>> {
    if idx
        .iter()
        .any(|&i| r.values[i].re.abs() > tol.axis * r.a_norm)
    {
        return Ok(None);
    }
    let modes: Vec<CVector> = idx.iter().map(|&i| r.vectors[i].clone()).collect();
    let witness = definite_witness(basis, &modes);
    let g = match &witness {
        Some(x) => combine(basis, x),
        None => fallback.clone(),
    };
    let records: Vec<ModeRecord> = idx
        .iter()
        .map(|&i| classify_mode(&r.a, &g, r.values[i], tol))
        .collect::<Result<_>>()?;
    let class = collision_sign_class(&records)?;
    Ok(Some(match (witness.is_some(), class) {
        (true, _) => (CollisionClass::SameSign, None),
        (false, CollisionClass::OppositeSign) => (CollisionClass::OppositeSign, None),
        (false, _) => (
            CollisionClass::OppositeSign,
            Some("no admissible metric gives the merging modes a common sign".into()),
        ),
    }))
}

fn collision_class(
    f: &FamilySpec,
    raw: &[Raw],
    plan: &Plan,
    p: &PathSpec,
    ep: &Located,
    tol: &Tolerances,
) -> Result<(CollisionClass, Option<String>)> {
    // The merging modes span the invariant subspace of the cluster at t*,
    // which varies continuously through the EP. They are picked by overlap
    // with it at the sample next to t* and followed outwards by tracking.
    let (_, a_star) = generator_at(f, p, ep.t, tol)?;
    let shifted = a_star.shifted(ep.lambda).pow(ep.multiplicity as u32);
    let q = at_point(
        ep.t,
        smallest_right_vectors(shifted.as_dmatrix(), ep.multiplicity),
    )?;
    let overlap =
        |v: &CVector| q.iter().map(|u| u.dotc(v).norm_sqr()).sum::<f64>() / v.norm_squared();
    let pick = |r: &Raw| {
        let mut idx: Vec<usize> = (0..r.values.len()).collect();
        idx.sort_by(|&x, &y| overlap(&r.vectors[y]).total_cmp(&overlap(&r.vectors[x])));
        idx.truncate(ep.multiplicity);
        idx.sort_unstable();
        idx
    };
    for before in [true, false] {
        let side = side_samples(p, raw.len(), ep.t, before);
        let Some(&adjacent) = side.last() else {
            continue;
        };
        let idx = pick(&raw[adjacent]);
        for &k in &side {
            if let Some(out) = class_at(&raw[k], &idx, &plan.basis_at(k), plan.metric_at(k), tol)? {
                return Ok(out);
            }
        }
    }
    // The merging modes may be on the axis only between two samples.
    let h = (p.to - p.from).abs() / (p.steps.max(2) - 1) as f64;
    let k = nearest_sample(p, raw.len(), ep.t);
    let (basis, fallback) = (plan.basis_at(k), plan.metric_at(k));
    for j in 1..=45 {
        let d = h * 0.5f64.powi(j);
        if d < 1e-12 * (1.0 + ep.t.abs()) {
            break;
        }
        for t in [ep.t - d, ep.t + d] {
            let (env, a) = generator_at(f, p, t, tol)?;
            let values = at_point(t, eigenvalues(&a))?;
            let vectors = at_point(t, mode_vectors(&a, &values, tol))?;
            let r = Raw {
                a_norm: a.frobenius_norm(),
                env,
                a,
                values,
                vectors,
            };
            if let Some(out) = class_at(&r, &pick(&r), &basis, fallback, tol)? {
                return Ok(out);
            }
        }
    }
    Ok((
        CollisionClass::NotApplicable,
        Some("merging modes are off the axis on both sides".into()),
    ))
}

fn nearest_sample(p: &PathSpec, m: usize, t: f64) -> usize {
    (0..m)
        .min_by(|&x, &y| (p.t_at(x) - t).abs().total_cmp(&(p.t_at(y) - t).abs()))
        .unwrap_or(0)
}

fn ep_event(
    f: &FamilySpec,
    p: &PathSpec,
    raw: &[Raw],
    plan: &Plan,
    ep: &Located,
    tol: &Tolerances,
) -> Result<SweepEvent> {
    let (env, a) = generator_at(f, p, ep.t, tol)?;
    // t* is only known to about √ε on badly conditioned paths, where a
    // semisimple EP still shows a nilpotent part of that size.
    let coarse = Tolerances {
        rank_cut: tol.rank_cut.max(EP_RANK_CUT),
        ..*tol
    };
    let kernel = at_point(
        ep.t,
        nullspace_scaled(&a.shifted(ep.lambda), a.frobenius_norm(), &coarse),
    )?;
    let diagonalizable = kernel.len() >= ep.multiplicity;
    let (collision, note) = collision_class(f, raw, plan, p, ep, tol)?;
    Ok(SweepEvent {
        t_star: ep.t,
        env,
        kind: EventKind::EP,
        collision,
        diagonalizable_at_ep: diagonalizable,
        colliding_eigenvalue: ep.lambda,
        multiplicity: ep.multiplicity,
        note,
    })
}

fn count_at(f: &FamilySpec, p: &PathSpec, t: f64, tol: &Tolerances) -> Result<usize> {
    Ok(broken_count_of_a(&spectrum_at(f, p, t, tol)?, tol))
}

/// Point between `lo` and `hi` where the off-axis count leaves `c_lo`.
fn bisect_count(
    f: &FamilySpec,
    p: &PathSpec,
    mut lo: f64,
    mut hi: f64,
    c_lo: usize,
    tol: &Tolerances,
) -> Result<f64> {
    for _ in 0..200 {
        if (hi - lo).abs() <= LOCATE_WIDTH * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if count_at(f, p, mid, tol)? == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The closest pair of eigenvalues at `t`, as a collision.
fn closest_pair(f: &FamilySpec, p: &PathSpec, t: f64, tol: &Tolerances) -> Result<Option<Located>> {
    let Some(center) = closest_center(&spectrum_at(f, p, t, tol)?) else {
        return Ok(None);
    };
    let t = polish(f, p, t, center, tol)?;
    let values = spectrum_at(f, p, t, tol)?;
    let Some(lambda) = closest_center(&values) else {
        return Ok(None);
    };
    let radius = cluster_radius(&values, tol);
    let multiplicity = values
        .iter()
        .filter(|z| (*z - lambda).norm() <= radius)
        .count()
        .max(2);
    Ok(Some(Located {
        t,
        lambda,
        multiplicity,
    }))
}

struct Crossing {
    t: f64,
    before: usize,
    after: usize,
    ep: Option<usize>,
}

/// Changes of the off-axis count along the path. The count is read just
/// either side of every EP as well as at the samples, so an excursion off
/// the axis shorter than one step is still seen. Crossings without a nearby
/// EP get one located at the crossing.
fn breaking_events(
    f: &FamilySpec,
    p: &PathSpec,
    raw: &[Raw],
    plan: &Plan,
    samples: &[Sample],
    eps: &mut Vec<SweepEvent>,
    tol: &Tolerances,
) -> Result<Vec<SweepEvent>> {
    let h = p.step().abs();
    let dir = (p.to - p.from).signum();
    let same_t = |x: f64, y: f64| (x - y).abs() <= 1e-7 * (1.0 + x.abs());
    let mut used = vec![false; eps.len()];
    let mut crossings: Vec<Crossing> = Vec::new();
    let mut carry: Option<(f64, usize)> = None;
    for k in 1..samples.len() {
        let (ta, tb) = (samples[k - 1].t, samples[k].t);
        let (c0, c1) = (samples[k - 1].broken_count, samples[k].broken_count);
        let mut inside: Vec<usize> = (0..eps.len())
            .filter(|&i| dir * eps[i].t_star > dir * ta && dir * eps[i].t_star <= dir * tb)
            .collect();
        inside.sort_by(|&x, &y| (dir * eps[x].t_star).total_cmp(&(dir * eps[y].t_star)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for i in inside {
            match groups.last_mut() {
                Some(g) if same_t(eps[g[0]].t_star, eps[i].t_star) => g.push(i),
                _ => groups.push(vec![i]),
            }
        }
        // A probe past an EP sitting on a sample already reads the far side.
        let (mut cur_t, mut cur_c) = match carry.take() {
            Some((t, c)) if dir * t > dir * ta => (t, c),
            _ => (ta, c0),
        };
        for g in groups {
            let t = eps[g[0]].t_star;
            let d = dir * PROBE * (1.0 + t.abs());
            let (lo, hi) = (t - d, t + d);
            let (cm, cp) = (count_at(f, p, lo, tol)?, count_at(f, p, hi, tol)?);
            if cm != cur_c {
                crossings.push(Crossing {
                    t: bisect_count(f, p, cur_t, lo, cur_c, tol)?,
                    before: cur_c,
                    after: cm,
                    ep: None,
                });
            }
            if cm != cp {
                for &i in &g {
                    used[i] = true;
                }
                crossings.push(Crossing {
                    t,
                    before: cm,
                    after: cp,
                    ep: Some(g[0]),
                });
            }
            (cur_t, cur_c) = (hi, cp);
        }
        if dir * cur_t > dir * tb {
            carry = Some((cur_t, cur_c));
        } else if cur_c != c1 {
            crossings.push(Crossing {
                t: bisect_count(f, p, cur_t, tb, cur_c, tol)?,
                before: cur_c,
                after: c1,
                ep: None,
            });
        }
    }

    let mut out = Vec::new();
    for c in crossings {
        let kind = if c.after > c.before {
            EventKind::BreakingOnset
        } else {
            EventKind::BreakingOffset
        };
        let ep = match c.ep {
            Some(i) => Some(i),
            None => {
                let near = (0..eps.len())
                    .filter(|&i| !used[i] && (eps[i].t_star - c.t).abs() <= h)
                    .min_by(|&x, &y| {
                        (eps[x].t_star - c.t)
                            .abs()
                            .total_cmp(&(eps[y].t_star - c.t).abs())
                    });
                match near {
                    Some(i) => {
                        let t = eps[i].t_star;
                        for (j, e) in eps.iter().enumerate() {
                            if same_t(e.t_star, t) {
                                used[j] = true;
                            }
                        }
                        Some(i)
                    }
                    None => match closest_pair(f, p, c.t, tol)? {
                        Some(loc) => {
                            eps.push(ep_event(f, p, raw, plan, &loc, tol)?);
                            used.push(true);
                            Some(eps.len() - 1)
                        }
                        None => None,
                    },
                }
            }
        };
        out.push(match ep {
            Some(i) => SweepEvent {
                kind,
                note: None,
                ..eps[i].clone()
            },
            None => SweepEvent {
                t_star: c.t,
                env: at_point(c.t, path_point(f, p, c.t, tol))?,
                kind,
                collision: CollisionClass::NotApplicable,
                diagonalizable_at_ep: false,
                colliding_eigenvalue: C64::new(f64::NAN, f64::NAN),
                multiplicity: 0,
                note: Some("no exceptional point located near the axis crossing".into()),
            },
        });
    }
    Ok(out)
}

/// A regularly spaced axis of a parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub n: usize,
}

impl GridAxis {
    pub fn value(&self, k: usize) -> f64 {
        if self.n <= 1 {
            return self.from;
        }
        if k + 1 == self.n {
            return self.to;
        }
        self.from + (self.to - self.from) * k as f64 / (self.n - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeClass {
    Real,
    ComplexPair,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridScan {
    pub x: GridAxis,
    pub y: GridAxis,
    /// Row-major in `y`: node `(ix, iy)` is at `iy * x.n + ix`.
    pub classes: Vec<NodeClass>,
    pub off_axis: Vec<usize>,
    /// Nodes with a 4-neighbour of a different class.
    pub boundary: Vec<(usize, usize)>,
}

impl GridScan {
    pub fn class_at(&self, ix: usize, iy: usize) -> NodeClass {
        self.classes[iy * self.x.n + ix]
    }
}

/// Classifies every node of an `x × y` grid as having a real spectrum of `H`
/// or complex-conjugate pairs.
pub fn grid_scan(
    f: &FamilySpec,
    x: &GridAxis,
    y: &GridAxis,
    base: &Env,
    tol: &Tolerances,
) -> Result<GridScan> {
    tol.validate()?;
    for axis in [x, y] {
        if !f.parameters.contains_key(&axis.param) {
            return Err(Error::Schema(format!(
                "grid axis names undeclared parameter `{}`",
                axis.param
            )));
        }
        if axis.n == 0 || !(axis.from.is_finite() && axis.to.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid axis `{}` needs a finite range and n >= 1",
                axis.param
            )));
        }
    }
    if x.param == y.param {
        return Err(Error::InvalidInput(
            "grid axes must name different parameters".into(),
        ));
    }
    let base = f.resolve_env(base)?;
    let mut classes = Vec::with_capacity(x.n * y.n);
    let mut off_axis = Vec::with_capacity(x.n * y.n);
    for iy in 0..y.n {
        for ix in 0..x.n {
            let mut env = base.clone();
            env.insert(x.param.clone(), x.value(ix));
            env.insert(y.param.clone(), y.value(iy));
            let node = f.instantiate(&env).and_then(|inst| eigenvalues(&inst.h));
            match node {
                Ok(values) => {
                    let (broken, count) = detect_breaking(&values, tol);
                    classes.push(if broken {
                        NodeClass::ComplexPair
                    } else {
                        NodeClass::Real
                    });
                    off_axis.push(count);
                }
                Err(_) => {
                    classes.push(NodeClass::Invalid);
                    off_axis.push(0);
                }
            }
        }
    }
    let at = |ix: usize, iy: usize| classes[iy * x.n + ix];
    let mut boundary = Vec::new();
    for iy in 0..y.n {
        for ix in 0..x.n {
            let c = at(ix, iy);
            let differs = (ix > 0 && at(ix - 1, iy) != c)
                || (ix + 1 < x.n && at(ix + 1, iy) != c)
                || (iy > 0 && at(ix, iy - 1) != c)
                || (iy + 1 < y.n && at(ix, iy + 1) != c);
            if differs {
                boundary.push((ix, iy));
            }
        }
    }
    Ok(GridScan {
        x: x.clone(),
        y: y.clone(),
        classes,
        off_axis,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{file::env_from_pairs, presets};
    use std::f64::consts::PI;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit(n: usize, k: usize) -> CVector {
        CVector::from_fn(n, |i, _| c((i == k) as u8 as f64, 0.0))
    }

    #[test]
    fn tracking_identity_and_swap() {
        let vals = [c(0., 1.), c(0., -1.)];
        let vecs = [unit(2, 0), unit(2, 1)];
        let tr = track_modes((&vals, &vecs), (&vals, &vecs)).unwrap();
        assert_eq!(tr.perm, vec![0, 1]);
        let swapped_vals = [vals[1], vals[0]];
        let swapped_vecs = [vecs[1].clone(), vecs[0].clone()];
        let tr = track_modes((&vals, &vecs), (&swapped_vals, &swapped_vecs)).unwrap();
        assert_eq!(tr.perm, vec![1, 0]);
        assert!(!tr.degenerate);
    }

    #[test]
    fn example2_consecutive_samples_track_identically() {
        let f = presets::example2();
        let data = |eps: f64| {
            let a = f
                .instantiate(&env_from_pairs(&[("epsilon", eps)]))
                .unwrap()
                .a;
            let v = eigenvalues(&a).unwrap();
            let w = mode_vectors(&a, &v, &tol()).unwrap();
            (v, w)
        };
        let (v0, w0) = data(3.7);
        let (v1, w1) = data(3.69);
        let tr = track_modes((&v0, &w0), (&v1, &w1)).unwrap();
        assert_eq!(tr.perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn breaking_examples() {
        let f = presets::example1();
        let h = |b: f64| {
            eigenvalues(
                &f.instantiate(&env_from_pairs(&[("a", 1.0), ("b", b), ("c", -1.0)]))
                    .unwrap()
                    .h,
            )
            .unwrap()
        };
        assert_eq!(detect_breaking(&h(3f64.sqrt() / 2.0), &tol()), (true, 2));
        assert_eq!(detect_breaking(&h(2.0), &tol()), (false, 0));
    }

    #[test]
    fn locate_examples() {
        let f = presets::example1();
        let t = locate_ep(
            &f,
            &presets::example1_path1(400).unwrap(),
            (0.9, 1.1),
            &tol(),
        )
        .unwrap();
        assert!((t - 1.0).abs() < 1e-6);
        let t = locate_ep(
            &f,
            &presets::example1_path2(400).unwrap(),
            (1.2 * PI, 1.3 * PI),
            &tol(),
        )
        .unwrap();
        assert!((t - 1.25 * PI).abs() < 1e-6);
        let f = presets::example2();
        let t = locate_ep(
            &f,
            &presets::example2_path(500).unwrap(),
            (3.4, 3.5),
            &tol(),
        )
        .unwrap();
        assert!((t - 2.0 * 3f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn locate_rejects_monotone_gap() {
        let f = presets::example1();
        let err = locate_ep(
            &f,
            &presets::example1_path1(400).unwrap(),
            (1.05, 1.2),
            &tol(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoMinimum(..)));
    }

    #[test]
    fn example1_path1_sweep() {
        let f = presets::example1();
        let (spec, events) = run_sweep(&f, &presets::example1_path1(400).unwrap(), &tol()).unwrap();
        assert_eq!(spec.samples.len(), 400);
        let eps: Vec<_> = events.iter().filter(|e| e.kind == EventKind::EP).collect();
        assert_eq!(eps.len(), 1, "{events:#?}");
        assert!((eps[0].t_star - 1.0).abs() < 1e-6);
        assert_eq!(eps[0].collision, CollisionClass::OppositeSign);
        assert!(!eps[0].diagonalizable_at_ep);
        assert!(events
            .iter()
            .any(|e| e.kind == EventKind::BreakingOnset && (e.t_star - 1.0).abs() < 1e-6));
    }

    #[test]
    fn example1_c_path_sweep() {
        let f = presets::example1();
        let (_, events) = run_sweep(&f, &presets::example1_c_path(400).unwrap(), &tol()).unwrap();
        let eps: Vec<_> = events.iter().filter(|e| e.kind == EventKind::EP).collect();
        assert_eq!(eps.len(), 1, "{events:#?}");
        assert!(eps[0].t_star.abs() < 1e-6);
        assert_eq!(eps[0].collision, CollisionClass::SameSign);
        assert!(events.iter().all(|e| e.kind == EventKind::EP));
    }

    #[test]
    fn example1_path2_sweep() {
        let f = presets::example1();
        let (_, events) = run_sweep(&f, &presets::example1_path2(400).unwrap(), &tol()).unwrap();
        let eps: Vec<_> = events.iter().filter(|e| e.kind == EventKind::EP).collect();
        assert_eq!(eps.len(), 1, "{events:#?}");
        assert!((eps[0].t_star - 1.25 * PI).abs() < 1e-6);
        assert!(eps[0].diagonalizable_at_ep);
        assert!(events.iter().any(|e| e.kind == EventKind::BreakingOnset));
    }

    #[test]
    fn example2_sweep() {
        let f = presets::example2();
        let (_, events) = run_sweep(&f, &presets::example2_path(500).unwrap(), &tol()).unwrap();
        let eps: Vec<_> = events.iter().filter(|e| e.kind == EventKind::EP).collect();
        assert_eq!(eps.len(), 2, "{events:#?}");
        for e in &eps {
            assert!((e.t_star - 2.0 * 3f64.sqrt()).abs() < 1e-6);
            assert!((e.colliding_eigenvalue.im.abs() - 2f64.sqrt()).abs() < 1e-6);
            assert_eq!(e.multiplicity, 2);
            assert_eq!(e.collision, CollisionClass::OppositeSign);
        }
        assert!(events.iter().any(|e| e.kind == EventKind::BreakingOnset));
    }

    #[test]
    fn grid_small() {
        let f = presets::example1();
        let x = GridAxis {
            param: "a".into(),
            from: -3.0,
            to: 3.0,
            n: 31,
        };
        let y = GridAxis {
            param: "b".into(),
            from: -3.0,
            to: 3.0,
            n: 31,
        };
        let scan = grid_scan(&f, &x, &y, &Env::new(), &tol()).unwrap();
        for iy in 0..31 {
            for ix in 0..31 {
                let (a, b) = (x.value(ix), y.value(iy));
                if (a.abs() - b.abs()).abs() > 0.25 {
                    let want = if b.abs() < a.abs() {
                        NodeClass::ComplexPair
                    } else {
                        NodeClass::Real
                    };
                    assert_eq!(scan.class_at(ix, iy), want, "a={a} b={b}");
                }
            }
        }
        let one = GridAxis {
            param: "a".into(),
            from: 1.0,
            to: 1.0,
            n: 1,
        };
        let other = GridAxis {
            param: "b".into(),
            from: 2.0,
            to: 2.0,
            n: 1,
        };
        let scan = grid_scan(&f, &one, &other, &Env::new(), &tol()).unwrap();
        assert_eq!(scan.classes, vec![NodeClass::Real]);
        assert!(scan.boundary.is_empty());
    }
}
