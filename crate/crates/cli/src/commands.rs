use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ptbreak::family::file::{path_from_fields, FamilyFile, PathFields};
use ptbreak::family::{parse_expr, presets, Env, FamilySpec, Instance};
use ptbreak::jordan::{is_diagonalizable, similar_to_neg_conj};
use ptbreak::krein::{is_strongly_stable, mode_records, signature, Kind};
use ptbreak::matrix::eigenvalues;
use ptbreak::metric::{construct_metric, decomposition_residual, verify_metric};
use ptbreak::sweep::{detect_breaking, grid_scan, run_sweep, GridAxis, NodeClass};
use ptbreak::symmetry::is_pt_symmetric;
use ptbreak::{Error, Tolerances};
use serde::Serialize;

use crate::output::{float, matrix, pair, pairs, to_json, write_csv, write_file};
use crate::{svg, CliError};

pub struct Ctx {
    pub tol: Tolerances,
    pub quiet: bool,
}

impl Ctx {
    fn info(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

/// `name=value` where the value is a constant expression such as `sqrt(3)/2`.
pub fn parse_assign(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    Ok((k.trim().to_string(), constant(v)?))
}

fn constant(src: &str) -> Result<f64, String> {
    let e = parse_expr(src).map_err(|e| format!("`{src}`: {e}"))?;
    let z = e.eval(&Env::new()).map_err(|e| format!("`{src}`: {e}"))?;
    if z.im != 0.0 || !z.re.is_finite() {
        return Err(format!("`{src}` is not a finite real number"));
    }
    Ok(z.re)
}

/// `name=lo:hi:count`.
pub fn parse_range(s: &str) -> Result<(String, f64, f64, usize), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=lo:hi:count, got `{s}`"))?;
    let parts: Vec<&str> = v.split(':').collect();
    let [lo, hi, count] = parts[..] else {
        return Err(format!("expected name=lo:hi:count, got `{s}`"));
    };
    let count = count
        .trim()
        .parse()
        .map_err(|_| format!("`{count}` is not a count"))?;
    Ok((k.trim().to_string(), constant(lo)?, constant(hi)?, count))
}

pub fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=expression, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

struct Loaded {
    file: FamilyFile,
    spec: FamilySpec,
}

fn load(input: &Path, params: &[(String, f64)], tol: &Tolerances) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let file = FamilyFile::from_json(&text)?;
    let mut spec = file.to_spec(tol)?;
    let overrides: Env = params.iter().cloned().collect();
    spec.parameters = spec.resolve_env(&overrides)?;
    Ok(Loaded { file, spec })
}

#[derive(Serialize)]
struct ModeOut {
    eigenvalue: [f64; 2],
    multiplicity: usize,
    kind: Kind,
    gram_signature: [usize; 3],
}

#[derive(Serialize)]
struct CheckReport {
    name: String,
    params: Env,
    #[serde(skip_serializing_if = "Option::is_none")]
    pt_symmetric: Option<bool>,
    similar_to_neg_conj: bool,
    eigenvalues_h: Vec<[f64; 2]>,
    eigenvalues_a: Vec<[f64; 2]>,
    off_axis_count: usize,
    metric_residual: f64,
    metric_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    family_metric_residual: Option<f64>,
    signature: [usize; 2],
    modes: Vec<ModeOut>,
    strongly_stable: bool,
    diagonalizable: bool,
}

pub fn check(ctx: &Ctx, input: &Path, params: &[(String, f64)]) -> Result<(), CliError> {
    let tol = &ctx.tol;
    let loaded = load(input, params, tol)?;
    let inst = loaded.spec.instantiate(&Env::new())?;
    let eig_h = eigenvalues(&inst.h)?;
    let eig_a = eigenvalues(&inst.a)?;
    let constructed = construct_metric(&inst.a, tol)?;
    let (g, source, family_residual) = match &inst.metric {
        Some(g) => (g.clone(), "family", Some(verify_metric(&inst.a, g, tol)?)),
        None => (constructed.g.clone(), "constructed", None),
    };
    let (p, q) = signature(&g, tol)?;
    let modes = mode_records(&inst.a, &g, tol)?
        .into_iter()
        .map(|(rec, multiplicity)| ModeOut {
            eigenvalue: pair(rec.lambda),
            multiplicity,
            kind: rec.kind,
            gram_signature: [
                rec.gram_signature.0,
                rec.gram_signature.1,
                rec.gram_signature.2,
            ],
        })
        .collect();
    let report = CheckReport {
        name: loaded.spec.name.clone(),
        params: inst.env.clone(),
        pt_symmetric: pt_symmetry(&inst, tol)?,
        similar_to_neg_conj: similar_to_neg_conj(&inst.a, tol)?,
        eigenvalues_h: pairs(&eig_h),
        eigenvalues_a: pairs(&eig_a),
        off_axis_count: detect_breaking(&eig_h, tol).1,
        metric_residual: verify_metric(&inst.a, &constructed.g, tol)?,
        metric_source: source,
        family_metric_residual: family_residual,
        signature: [p, q],
        modes,
        strongly_stable: is_strongly_stable(&inst.a, &g, tol)?,
        diagonalizable: is_diagonalizable(&inst.a, tol)?,
    };
    print!("{}", to_json(&report));
    Ok(())
}

fn pt_symmetry(inst: &Instance, tol: &Tolerances) -> Result<Option<bool>, CliError> {
    Ok(match &inst.parity {
        Some(p) => Some(is_pt_symmetric(&inst.h, p, tol)?),
        None => None,
    })
}

#[derive(Serialize)]
struct MetricReport {
    name: String,
    params: Env,
    g: Vec<Vec<[f64; 2]>>,
    s: Vec<Vec<[f64; 2]>>,
    residual: f64,
    decomposition_residual: f64,
    signature: [usize; 2],
}

pub fn metric(ctx: &Ctx, input: &Path, params: &[(String, f64)]) -> Result<(), CliError> {
    let tol = &ctx.tol;
    let loaded = load(input, params, tol)?;
    let inst = loaded.spec.instantiate(&Env::new())?;
    let built = construct_metric(&inst.a, tol)?;
    let (p, q) = signature(&built.g, tol)?;
    let report = MetricReport {
        name: loaded.spec.name.clone(),
        params: inst.env.clone(),
        g: matrix(&built.g),
        s: matrix(&built.s),
        residual: verify_metric(&inst.a, &built.g, tol)?,
        decomposition_residual: decomposition_residual(&inst.a, &built)?,
        signature: [p, q],
    };
    print!("{}", to_json(&report));
    Ok(())
}

pub struct SweepArgs<'a> {
    pub input: &'a Path,
    pub params: &'a [(String, f64)],
    pub path: Option<(String, f64, f64, usize)>,
    pub bind: &'a [(String, String)],
    pub out: &'a Path,
    pub svg: bool,
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Serialize)]
struct ErrorEvent {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    code: &'static str,
    message: String,
}

pub fn sweep(ctx: &Ctx, args: SweepArgs) -> Result<(), CliError> {
    let tol = &ctx.tol;
    let loaded = load(args.input, args.params, tol)?;
    let mut fields = match (&args.path, &loaded.file.path) {
        (Some((var, from, to, steps)), _) => PathFields {
            var: var.clone(),
            from: *from,
            to: *to,
            steps: *steps,
            bind: BTreeMap::new(),
        },
        (None, Some(p)) => p.clone(),
        (None, None) => {
            return Err(Error::InvalidInput(
                "no --path given and the family file has no path".into(),
            )
            .into())
        }
    };
    if !args.bind.is_empty() {
        fields.bind = args.bind.iter().cloned().collect();
    }
    let path = path_from_fields(&fields)?;
    path.validate_against(&loaded.spec)?;
    let events_path = with_suffix(args.out, ".events.json");
    let (tracked, events) = match run_sweep(&loaded.spec, &path, tol) {
        Ok(v) => v,
        Err(e) => {
            let t = match &e {
                Error::AtPathPoint { t, .. } => Some(*t),
                _ => None,
            };
            let record = ErrorEvent {
                kind: "error",
                t,
                code: e.code(),
                message: e.to_string(),
            };
            write_file(&events_path, &to_json(&vec![record]))?;
            return Err(e.into());
        }
    };

    let names: Vec<&String> = loaded.spec.parameters.keys().collect();
    let n = loaded.spec.n;
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().map(|k| k.to_string()));
    for i in 0..n {
        header.push(format!("lambda{i}_re"));
        header.push(format!("lambda{i}_im"));
    }
    header.extend((0..n).map(|i| format!("action{i}")));
    header.push("min_gap".into());
    header.push("broken_count".into());
    let rows: Vec<Vec<String>> = tracked
        .samples
        .iter()
        .map(|s| {
            let mut r = vec![float(s.t)];
            r.extend(names.iter().map(|k| float(s.env[*k])));
            for z in &s.eigenvalues {
                r.push(float(z.re));
                r.push(float(z.im));
            }
            r.extend(s.actions.iter().map(|&a| float(a)));
            r.push(float(s.min_gap));
            r.push(s.broken_count.to_string());
            r
        })
        .collect();
    let samples_path = with_suffix(args.out, ".samples.csv");
    write_csv(&samples_path, &header, &rows)?;
    write_file(&events_path, &to_json(&events))?;
    ctx.info(&format!(
        "wrote {} ({} samples) and {} ({} events)",
        samples_path.display(),
        rows.len(),
        events_path.display(),
        events.len()
    ));
    for note in &tracked.notes {
        ctx.info(&format!("note: {note}"));
    }
    if args.svg {
        let svg_path = with_suffix(args.out, ".svg");
        let title = format!(
            "{}: eigenvalues of A along {}",
            loaded.spec.name, fields.var
        );
        write_file(
            &svg_path,
            &svg::trajectories(&title, &tracked.samples, &events),
        )?;
        ctx.info(&format!("wrote {}", svg_path.display()));
    }
    Ok(())
}

pub struct GridArgs<'a> {
    pub input: &'a Path,
    pub params: &'a [(String, f64)],
    pub x: Option<(String, f64, f64, usize)>,
    pub y: Option<(String, f64, f64, usize)>,
    pub out: &'a Path,
    pub svg: bool,
}

fn axis(
    given: &Option<(String, f64, f64, usize)>,
    file: Option<GridAxis>,
    which: &str,
) -> Result<GridAxis, CliError> {
    match (given, file) {
        (Some((param, from, to, n)), _) => Ok(GridAxis {
            param: param.clone(),
            from: *from,
            to: *to,
            n: *n,
        }),
        (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::InvalidInput(format!(
            "no --{which} given and the family file has no grid"
        ))
        .into()),
    }
}

fn class_name(c: NodeClass) -> &'static str {
    match c {
        NodeClass::Real => "real",
        NodeClass::ComplexPair => "complex_pair",
        NodeClass::Invalid => "invalid",
    }
}

pub fn grid(ctx: &Ctx, args: GridArgs) -> Result<(), CliError> {
    let tol = &ctx.tol;
    let loaded = load(args.input, args.params, tol)?;
    let from_file =
        |f: &dyn Fn(&ptbreak::family::file::GridFields) -> &ptbreak::family::file::AxisFields| {
            loaded.file.grid.as_ref().map(|g| {
                let a = f(g);
                GridAxis {
                    param: a.param.clone(),
                    from: a.from,
                    to: a.to,
                    n: a.n,
                }
            })
        };
    let x = axis(&args.x, from_file(&|g| &g.x), "x")?;
    let y = axis(&args.y, from_file(&|g| &g.y), "y")?;
    for a in [&x, &y] {
        if !loaded.spec.parameters.contains_key(&a.param) {
            return Err(Error::Schema(format!(
                "grid axis names undeclared parameter `{}`",
                a.param
            ))
            .into());
        }
    }
    let scan = grid_scan(&loaded.spec, &x, &y, &Env::new(), tol)?;
    let mut rows = Vec::with_capacity(x.n * y.n);
    for iy in 0..y.n {
        for ix in 0..x.n {
            rows.push(vec![
                float(x.value(ix)),
                float(y.value(iy)),
                class_name(scan.class_at(ix, iy)).to_string(),
            ]);
        }
    }
    let grid_path = with_suffix(args.out, ".grid.csv");
    write_csv(
        &grid_path,
        &["x".into(), "y".into(), "classification".into()],
        &rows,
    )?;
    let boundary: Vec<Vec<String>> = scan
        .boundary
        .iter()
        .map(|&(ix, iy)| vec![float(x.value(ix)), float(y.value(iy))])
        .collect();
    let boundary_path = with_suffix(args.out, ".boundary.csv");
    write_csv(&boundary_path, &["x".into(), "y".into()], &boundary)?;
    ctx.info(&format!(
        "wrote {} ({} nodes) and {} ({} boundary nodes)",
        grid_path.display(),
        rows.len(),
        boundary_path.display(),
        boundary.len()
    ));
    if args.svg {
        let svg_path = with_suffix(args.out, ".svg");
        let title = format!(
            "{}: spectrum of H over ({}, {})",
            loaded.spec.name, x.param, y.param
        );
        write_file(&svg_path, &svg::regions(&title, &scan))?;
        ctx.info(&format!("wrote {}", svg_path.display()));
    }
    Ok(())
}

fn preset(name: &str) -> Result<FamilyFile, CliError> {
    presets::preset_file(name).ok_or_else(|| {
        Error::InvalidInput(format!(
            "unknown preset `{name}`; available: {}",
            presets::NAMES.join(", ")
        ))
        .into()
    })
}

pub fn examples_list() {
    for name in presets::NAMES {
        println!("{name}");
    }
}

pub fn examples_show(name: &str) -> Result<(), CliError> {
    println!("{}", preset(name)?.to_json_pretty());
    Ok(())
}

pub fn examples_emit(ctx: &Ctx, name: &str, out: Option<&Path>) -> Result<(), CliError> {
    let file = preset(name)?;
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("{name}.json")));
    write_file(&path, &(file.to_json_pretty() + "\n"))?;
    ctx.info(&format!("wrote {}", path.display()));
    Ok(())
}
