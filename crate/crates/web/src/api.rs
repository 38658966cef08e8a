//! JSON in, JSON out. The wasm exports are thin wrappers over these.

use ptbreak::family::file::{
    check_axis, path_from_fields, AxisFields, FamilyFile, GridFields, PathFields,
};
use ptbreak::family::{presets, Env, FamilySpec};
use ptbreak::jordan::is_diagonalizable;
use ptbreak::krein::{is_strongly_stable, mode_records, signature, CollisionClass, Kind};
use ptbreak::matrix::eigenvalues;
use ptbreak::metric::construct_metric;
use ptbreak::sweep::{detect_breaking, grid_scan, run_sweep, EventKind, GridAxis, NodeClass};
use ptbreak::{Error, Result, Tolerances, C64};
use serde::Serialize;

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::InvalidInput(e.to_string()))
}

fn parse<'a, T: serde::Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Schema(format!("{what}: {e}")))
}

fn load(family: &str, params: &str, tol: &Tolerances) -> Result<(FamilyFile, FamilySpec)> {
    let file = FamilyFile::from_json(family)?;
    let mut spec = file.to_spec(tol)?;
    if !params.trim().is_empty() {
        let overrides: Env = parse(params, "params")?;
        spec.parameters = spec.resolve_env(&overrides)?;
    }
    Ok((file, spec))
}

pub fn preset_names() -> String {
    serde_json::to_string(&presets::NAMES).expect("static names")
}

pub fn preset(name: &str) -> Result<String> {
    presets::preset_file(name)
        .map(|f| f.to_json_pretty())
        .ok_or_else(|| Error::InvalidInput(format!("unknown preset `{name}`")))
}

#[derive(Serialize)]
struct Mode {
    eigenvalue: [f64; 2],
    multiplicity: usize,
    kind: Kind,
}

#[derive(Serialize)]
struct Check {
    eigenvalues: Vec<[f64; 2]>,
    off_axis_count: usize,
    signature: [usize; 2],
    modes: Vec<Mode>,
    strongly_stable: bool,
    diagonalizable: bool,
}

/// Spectrum, metric signature and Krein kinds of one instance.
pub fn check(family: &str, params: &str) -> Result<String> {
    let tol = Tolerances::default();
    let (_, spec) = load(family, params, &tol)?;
    let inst = spec.instantiate(&Env::new())?;
    let g = match inst.metric.clone() {
        Some(g) => g,
        None => construct_metric(&inst.a, &tol)?.g,
    };
    let (p, q) = signature(&g, &tol)?;
    let modes = mode_records(&inst.a, &g, &tol)?
        .into_iter()
        .map(|(r, multiplicity)| Mode {
            eigenvalue: pair(r.lambda),
            multiplicity,
            kind: r.kind,
        })
        .collect();
    json(&Check {
        eigenvalues: eigenvalues(&inst.a)?.into_iter().map(pair).collect(),
        off_axis_count: detect_breaking(&eigenvalues(&inst.h)?, &tol).1,
        signature: [p, q],
        modes,
        strongly_stable: is_strongly_stable(&inst.a, &g, &tol)?,
        diagonalizable: is_diagonalizable(&inst.a, &tol)?,
    })
}

#[derive(Serialize)]
struct Point {
    t: f64,
    eigenvalues: Vec<[f64; 2]>,
    broken_count: usize,
}

#[derive(Serialize)]
struct Event {
    kind: EventKind,
    t: f64,
    eigenvalue: [f64; 2],
    multiplicity: usize,
    collision: CollisionClass,
    diagonalizable: bool,
}

#[derive(Serialize)]
struct Sweep {
    samples: Vec<Point>,
    events: Vec<Event>,
}

/// Tracked eigenvalues and events along a path. An empty `path` uses the
/// family's own.
pub fn sweep(family: &str, path: &str, params: &str) -> Result<String> {
    let tol = Tolerances::default();
    let (file, spec) = load(family, params, &tol)?;
    let fields = if path.trim().is_empty() {
        file.path
            .clone()
            .ok_or_else(|| Error::Schema("no path given and the family has none".into()))?
    } else {
        parse::<PathFields>(path, "path")?
    };
    let (tracked, events) = run_sweep(&spec, &path_from_fields(&fields)?, &tol)?;
    json(&Sweep {
        samples: tracked
            .samples
            .iter()
            .map(|s| Point {
                t: s.t,
                eigenvalues: s.eigenvalues.iter().copied().map(pair).collect(),
                broken_count: s.broken_count,
            })
            .collect(),
        events: events
            .iter()
            .map(|e| Event {
                kind: e.kind,
                t: e.t_star,
                eigenvalue: pair(e.colliding_eigenvalue),
                multiplicity: e.multiplicity,
                collision: e.collision,
                diagonalizable: e.diagonalizable_at_ep,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct Grid {
    x: GridAxis,
    y: GridAxis,
    /// Row-major in `y`.
    classes: Vec<NodeClass>,
    boundary: Vec<(usize, usize)>,
}

/// Real/complex-pair classification over a parameter plane.
pub fn grid(family: &str, grid: &str, params: &str) -> Result<String> {
    let tol = Tolerances::default();
    let (file, spec) = load(family, params, &tol)?;
    let fields = if grid.trim().is_empty() {
        file.grid
            .clone()
            .ok_or_else(|| Error::Schema("no grid given and the family has none".into()))?
    } else {
        parse::<GridFields>(grid, "grid")?
    };
    check_axis(&fields.x, &spec)?;
    check_axis(&fields.y, &spec)?;
    let axis = |a: &AxisFields| GridAxis {
        param: a.param.clone(),
        from: a.from,
        to: a.to,
        n: a.n,
    };
    let scan = grid_scan(&spec, &axis(&fields.x), &axis(&fields.y), &Env::new(), &tol)?;
    json(&Grid {
        x: scan.x,
        y: scan.y,
        classes: scan.classes,
        boundary: scan.boundary,
    })
}
