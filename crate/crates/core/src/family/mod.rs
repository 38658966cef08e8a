//! Parameterized matrix families and parameter paths.

pub mod expr;
pub mod file;
pub mod presets;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, Tolerances, C64};
use crate::symmetry::{a_to_h, h_to_a, ParityOperator};

pub use expr::{eval_expr, parse_expr, Expr};

pub type Env = BTreeMap<String, f64>;

/// Whether the entries define the Hamiltonian `H` or the generator `A = -iH`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    H,
    A,
}

/// A matrix whose entries are expressions over named real parameters.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub n: usize,
    pub entries: Vec<Vec<Expr>>,
    pub sources: Vec<Vec<String>>,
    pub parameters: Env,
    pub parity: Option<ParityOperator>,
    pub convention: Convention,
    /// Optional Hermitian metric with entries over the same parameters.
    pub metric: Option<Vec<Vec<Expr>>>,
    pub metric_sources: Option<Vec<Vec<String>>>,
}

/// One evaluated member of a family.
#[derive(Clone, Debug)]
pub struct Instance {
    pub env: Env,
    pub h: ComplexMatrix,
    pub a: ComplexMatrix,
    pub parity: Option<ParityOperator>,
    pub metric: Option<ComplexMatrix>,
}

impl FamilySpec {
    /// Parses and validates every entry. Identifiers must be declared
    /// parameters or built-in constants; errors name the offending cell.
    pub fn new(
        name: impl Into<String>,
        sources: Vec<Vec<String>>,
        parameters: Env,
        parity: Option<ComplexMatrix>,
        convention: Convention,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = sources.len();
        if n == 0 {
            return Err(Error::Schema(
                "entries must be a nonempty square array".into(),
            ));
        }
        for name in parameters.keys() {
            if !valid_identifier(name) || expr::is_reserved(name) {
                return Err(Error::Schema(format!(
                    "`{name}` is not a usable parameter name"
                )));
            }
        }
        for (name, v) in &parameters {
            if !v.is_finite() {
                return Err(Error::Schema(format!(
                    "parameter `{name}` default is not finite"
                )));
            }
        }
        let entries = parse_cells(&sources, &parameters, "entry")?;
        let parity = match parity {
            Some(p) if p.n() != n => {
                return Err(Error::Schema(format!(
                    "parity is {}x{}, family is {n}x{n}",
                    p.n(),
                    p.n()
                )))
            }
            Some(p) => Some(ParityOperator::new(p, tol)?),
            None => None,
        };
        Ok(FamilySpec {
            name: name.into(),
            n,
            entries,
            sources,
            parameters,
            parity,
            convention,
            metric: None,
            metric_sources: None,
        })
    }

    /// Attaches a metric given as expressions over the family's parameters.
    pub fn with_metric(mut self, sources: Vec<Vec<String>>) -> Result<Self> {
        if sources.len() != self.n {
            return Err(Error::Schema(format!(
                "metric has {} rows, family is {}x{}",
                sources.len(),
                self.n,
                self.n
            )));
        }
        self.metric = Some(parse_cells(&sources, &self.parameters, "metric")?);
        self.metric_sources = Some(sources);
        Ok(self)
    }

    /// Defaults overridden by `env`. Unknown names are rejected.
    pub fn resolve_env(&self, env: &Env) -> Result<Env> {
        let mut full = self.parameters.clone();
        for (k, v) in env {
            match full.get_mut(k) {
                Some(slot) => *slot = *v,
                None => return Err(Error::Schema(format!("unknown parameter `{k}`"))),
            }
        }
        Ok(full)
    }

    pub fn instantiate(&self, env: &Env) -> Result<Instance> {
        let env = self.resolve_env(env)?;
        let m = eval_cells(&self.entries, &self.sources, &env, "entry")?;
        let (h, a) = match self.convention {
            Convention::H => {
                let a = h_to_a(&m);
                (m, a)
            }
            Convention::A => (a_to_h(&m), m),
        };
        let metric = match (&self.metric, &self.metric_sources) {
            (Some(cells), Some(src)) => Some(eval_cells(cells, src, &env, "metric")?),
            _ => None,
        };
        Ok(Instance {
            env,
            h,
            a,
            parity: self.parity.clone(),
            metric,
        })
    }
}

fn parse_cells(sources: &[Vec<String>], parameters: &Env, what: &str) -> Result<Vec<Vec<Expr>>> {
    let n = sources.len();
    let mut out = Vec::with_capacity(n);
    for (i, row) in sources.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Schema(format!(
                "{what} row {i} has {} cells, expected {n}",
                row.len()
            )));
        }
        let mut parsed = Vec::with_capacity(n);
        for (j, src) in row.iter().enumerate() {
            let e = parse_expr(src)
                .map_err(|e| Error::Schema(format!("{what} ({i},{j}) `{src}`: {e}")))?;
            if let Some(bad) = e
                .identifiers()
                .into_iter()
                .find(|id| !parameters.contains_key(id))
            {
                return Err(Error::Schema(format!(
                    "{what} ({i},{j}) `{src}`: undeclared identifier `{bad}`"
                )));
            }
            parsed.push(e);
        }
        out.push(parsed);
    }
    Ok(out)
}

fn eval_cells(
    cells: &[Vec<Expr>],
    sources: &[Vec<String>],
    env: &Env,
    what: &str,
) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(cells.len());
    for (i, row) in cells.iter().enumerate() {
        for (j, e) in row.iter().enumerate() {
            let z = e.eval(env)?;
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{what} ({i},{j}) `{}` is not finite at {env:?}",
                    sources[i][j]
                )));
            }
            m.set(i, j, z);
        }
    }
    Ok(m)
}

pub(crate) fn valid_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A one-parameter path through a family's parameter space.
#[derive(Clone, Debug)]
pub struct PathSpec {
    pub var: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub bind: BTreeMap<String, Expr>,
}

impl PathSpec {
    pub fn new(
        var: impl Into<String>,
        from: f64,
        to: f64,
        steps: usize,
        bind: &[(&str, &str)],
    ) -> Result<Self> {
        let bind = bind
            .iter()
            .map(|(k, src)| Ok((k.to_string(), parse_expr(src)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::from_parts(var.into(), from, to, steps, bind)
    }

    pub fn from_parts(
        var: String,
        from: f64,
        to: f64,
        steps: usize,
        bind: BTreeMap<String, Expr>,
    ) -> Result<Self> {
        if steps < 2 {
            return Err(Error::Schema(format!(
                "path needs at least 2 steps, got {steps}"
            )));
        }
        if !(from.is_finite() && to.is_finite()) || from == to {
            return Err(Error::Schema(format!(
                "path endpoints must be finite and distinct: {from}, {to}"
            )));
        }
        if !valid_identifier(&var) || expr::is_reserved(&var) {
            return Err(Error::Schema(format!(
                "`{var}` is not a usable path variable"
            )));
        }
        Ok(PathSpec {
            var,
            from,
            to,
            steps,
            bind,
        })
    }

    /// The path that varies a single parameter directly.
    pub fn linear(param: &str, from: f64, to: f64, steps: usize) -> Result<Self> {
        Self::new(param, from, to, steps, &[(param, param)])
    }

    /// Sample `k` of `0..steps`.
    pub fn t_at(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            return self.to;
        }
        self.from + (self.to - self.from) * (k as f64) / ((self.steps - 1) as f64)
    }

    pub fn step(&self) -> f64 {
        (self.to - self.from).abs() / ((self.steps - 1) as f64)
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = (self.from.min(self.to), self.from.max(self.to));
        let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
        t >= lo - slack && t <= hi + slack
    }

    /// Checks every bound name is a declared parameter and every bind
    /// expression only uses the path variable and parameters.
    pub fn validate_against(&self, f: &FamilySpec) -> Result<()> {
        for (name, e) in &self.bind {
            if !f.parameters.contains_key(name) {
                return Err(Error::Schema(format!(
                    "path binds undeclared parameter `{name}`"
                )));
            }
            if let Some(bad) = e
                .identifiers()
                .into_iter()
                .find(|id| id != &self.var && !f.parameters.contains_key(id))
            {
                return Err(Error::Schema(format!(
                    "bind `{name}`: undeclared identifier `{bad}`"
                )));
            }
        }
        Ok(())
    }
}

/// Parameter values at path position `t`: defaults overridden by the bind
/// expressions evaluated with the path variable set to `t`.
pub fn path_point(f: &FamilySpec, p: &PathSpec, t: f64, tol: &Tolerances) -> Result<Env> {
    if !p.contains(t) {
        return Err(Error::OutOfRange {
            t,
            lo: p.from.min(p.to),
            hi: p.from.max(p.to),
        });
    }
    let mut scope = f.parameters.clone();
    scope.insert(p.var.clone(), t);
    let mut env = f.parameters.clone();
    for (name, e) in &p.bind {
        let z: C64 = e.eval(&scope)?;
        if !z.re.is_finite() || z.im.abs() > tol.residual * (1.0 + z.re.abs()) {
            return Err(Error::NonRealParameter {
                name: name.clone(),
                value: format!("{z}"),
            });
        }
        match env.get_mut(name) {
            Some(slot) => *slot = z.re,
            None => {
                return Err(Error::Schema(format!(
                    "path binds undeclared parameter `{name}`"
                )))
            }
        }
    }
    Ok(env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::eigenvalues;
    use std::f64::consts::{PI, SQRT_2};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn env(pairs: &[(&str, f64)]) -> Env {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn example1_spectrum_at_reference_point() {
        let inst = presets::example1()
            .instantiate(&env(&[("a", 1.0), ("b", 2.0), ("c", -1.0)]))
            .unwrap();
        let ev = eigenvalues(&inst.h).unwrap();
        let s3 = 3f64.sqrt();
        let expected = [-4.0, -2.0, 4.0 - s3, 4.0 + s3];
        for (z, e) in ev.iter().zip(expected) {
            assert!((z - C64::new(e, 0.0)).norm() < 1e-9, "{z} vs {e}");
        }
    }

    #[test]
    fn example2_matrix_matches_definition() {
        let inst = presets::example2()
            .instantiate(&env(&[("omega", 2.0), ("gamma", 1.0), ("epsilon", 3.7)]))
            .unwrap();
        let expected = ComplexMatrix::from_real_rows(&[
            &[0.0, 0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[-4.0, -3.7, -2.0, 0.0],
            &[-3.7, -4.0, 0.0, 2.0],
        ])
        .unwrap();
        assert_eq!(inst.a, expected);
    }

    #[test]
    fn one_by_one_zero_family() {
        let f = FamilySpec::new(
            "zero",
            vec![vec!["0".into()]],
            Env::new(),
            None,
            Convention::H,
            &tol(),
        )
        .unwrap();
        let inst = f.instantiate(&Env::new()).unwrap();
        assert_eq!(inst.h, ComplexMatrix::zeros(1));
        assert_eq!(inst.a, ComplexMatrix::zeros(1));
    }

    #[test]
    fn undeclared_identifier_names_the_cell() {
        let err = FamilySpec::new(
            "bad",
            vec![vec!["a".into(), "0".into()], vec!["0".into(), "x+1".into()]],
            env(&[("a", 1.0)]),
            None,
            Convention::H,
            &tol(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(1,1)") && msg.contains("`x`"), "{msg}");
    }

    #[test]
    fn invalid_parity_rejected() {
        let p = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let err = FamilySpec::new(
            "bad",
            vec![vec!["0".into(), "0".into()], vec!["0".into(), "0".into()]],
            Env::new(),
            Some(p),
            Convention::H,
            &tol(),
        )
        .unwrap_err();
        assert_eq!(err, Error::ParityInvalid);
    }

    #[test]
    fn reserved_parameter_names_rejected() {
        for name in ["i", "pi", "sin", "2x"] {
            let r = FamilySpec::new(
                "x",
                vec![vec!["0".into()]],
                env(&[(name, 1.0)]),
                None,
                Convention::H,
                &tol(),
            );
            assert!(r.is_err(), "{name}");
        }
    }

    #[test]
    fn path_two_points() {
        let f = presets::example1();
        let p = presets::example1_path2(400).unwrap();
        let e = path_point(&f, &p, 5.0 * PI / 4.0, &tol()).unwrap();
        assert!(e["a"].abs() < 1e-15 && e["b"].abs() < 1e-15);
        assert_eq!(e["c"], -1.0);
        let e = path_point(&f, &p, PI, &tol()).unwrap();
        assert!((e["a"] - (1.0 - SQRT_2)).abs() < 1e-15);
        assert!((e["b"] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn path_rejects_complex_and_out_of_range() {
        let f = presets::example1();
        let p = PathSpec::new("t", 0.0, 1.0, 10, &[("a", "i")]).unwrap();
        assert!(matches!(
            path_point(&f, &p, 0.5, &tol()),
            Err(Error::NonRealParameter { .. })
        ));
        let p = PathSpec::linear("b", 2.0, 0.5, 10).unwrap();
        assert!(path_point(&f, &p, 1.0, &tol()).is_ok());
        assert!(matches!(
            path_point(&f, &p, 2.5, &tol()),
            Err(Error::OutOfRange { .. })
        ));
        assert!(PathSpec::linear("b", 2.0, 0.5, 1).is_err());
    }

    #[test]
    fn path_samples_hit_endpoints() {
        let p = PathSpec::linear("b", 2.0, 0.5, 7).unwrap();
        assert_eq!(p.t_at(0), 2.0);
        assert_eq!(p.t_at(6), 0.5);
        assert!((p.t_at(3) - 1.25).abs() < 1e-15);
    }
}
