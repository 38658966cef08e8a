//! Built-in families.
//!
//! `example1` is the 4x4 PT-symmetric Hamiltonian with real parameters
//! `a, b, c` whose spectrum is `{-3 ± c, 4 ± sqrt(b² - a²)}`; its parity swaps
//! coordinates 1↔2 and 3↔4. `example2` is the generator of two coupled
//! oscillators with balanced loss and gain,
//! `x'' + ω²x + 2γx' = -εy`, `y'' + ω²y - 2γy' = -εx`, in the coordinates
//! `(x, y, x', y')`.

use std::collections::BTreeMap;

use super::file::{AxisFields, Cell, FamilyFile, GridFields, PathFields};
use super::{FamilySpec, PathSpec};
use crate::error::Result;
use crate::matrix::{ComplexMatrix, Tolerances, C64};

pub const NAMES: [&str; 2] = ["example1", "example2"];

fn rows(src: &[[&str; 4]]) -> Vec<Vec<String>> {
    src.iter()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}

fn real_cells(src: &[[f64; 4]]) -> Vec<Vec<Cell>> {
    src.iter()
        .map(|r| r.iter().map(|&x| Cell::Real(x)).collect())
        .collect()
}

pub fn example1_file() -> FamilyFile {
    FamilyFile {
        name: "example1".into(),
        size: 4,
        convention: super::Convention::H,
        entries: rows(&[
            ["-3", "c", "0", "0"],
            ["c", "-3", "0", "0"],
            ["b-c*i", "7*i+a", "4-i*a", "i*b"],
            ["-7*i+a", "b+i*c", "-i*b", "4+i*a"],
        ]),
        parity: Some(real_cells(&[
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ])),
        metric: Some(rows(&[
            ["1", "i", "1", "0"],
            ["-i", "1", "0", "1"],
            ["1", "0", "0", "i"],
            ["0", "1", "-i", "0"],
        ])),
        parameters: BTreeMap::from([("a".into(), 1.0), ("b".into(), 2.0), ("c".into(), -1.0)]),
        path: Some(PathFields {
            var: "b".into(),
            from: 2.0,
            to: 0.5,
            steps: 400,
            bind: BTreeMap::new(),
        }),
        grid: Some(GridFields {
            x: AxisFields {
                param: "a".into(),
                from: -3.0,
                to: 3.0,
                n: 201,
            },
            y: AxisFields {
                param: "b".into(),
                from: -3.0,
                to: 3.0,
                n: 201,
            },
        }),
    }
}

pub fn example2_file() -> FamilyFile {
    FamilyFile {
        name: "example2".into(),
        size: 4,
        convention: super::Convention::A,
        entries: rows(&[
            ["0", "0", "1", "0"],
            ["0", "0", "0", "1"],
            ["-omega^2", "-epsilon", "-2*gamma", "0"],
            ["-epsilon", "-omega^2", "0", "2*gamma"],
        ]),
        parity: Some(real_cells(&[
            [0.0, -1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ])),
        metric: Some(rows(&[
            ["0", "-2*i*gamma", "0", "i"],
            ["2*i*gamma", "0", "i", "0"],
            ["0", "-i", "0", "0"],
            ["-i", "0", "0", "0"],
        ])),
        parameters: BTreeMap::from([
            ("epsilon".into(), 3.7),
            ("gamma".into(), 1.0),
            ("omega".into(), 2.0),
        ]),
        path: Some(PathFields {
            var: "epsilon".into(),
            from: 3.7,
            to: 3.2,
            steps: 500,
            bind: BTreeMap::new(),
        }),
        grid: Some(GridFields {
            x: AxisFields {
                param: "epsilon".into(),
                from: 3.0,
                to: 4.0,
                n: 101,
            },
            y: AxisFields {
                param: "gamma".into(),
                from: 0.5,
                to: 1.5,
                n: 101,
            },
        }),
    }
}

pub fn preset_file(name: &str) -> Option<FamilyFile> {
    match name {
        "example1" => Some(example1_file()),
        "example2" => Some(example2_file()),
        _ => None,
    }
}

pub fn example1() -> FamilySpec {
    example1_file()
        .to_spec(&Tolerances::default())
        .expect("example1 preset is valid")
}

pub fn example2() -> FamilySpec {
    example2_file()
        .to_spec(&Tolerances::default())
        .expect("example2 preset is valid")
}

/// `b` from 2 down to 1/2 with `a = 1`, `c = -1`.
pub fn example1_path1(steps: usize) -> Result<PathSpec> {
    PathSpec::linear("b", 2.0, 0.5, steps)
}

/// `c` from -1 to 1 with `a = 1`, `b = 2`.
pub fn example1_c_path(steps: usize) -> Result<PathSpec> {
    PathSpec::linear("c", -1.0, 1.0, steps)
}

/// `a = 1 + √2 cos t`, `b = 1 + √2 sin t` for `t ∈ [π, 3π/2]`.
pub fn example1_path2(steps: usize) -> Result<PathSpec> {
    PathSpec::new(
        "t",
        std::f64::consts::PI,
        1.5 * std::f64::consts::PI,
        steps,
        &[("a", "1+sqrt(2)*cos(t)"), ("b", "1+sqrt(2)*sin(t)")],
    )
}

/// `ε` from 3.7 down to 3.2 with `ω = 2`, `γ = 1`.
pub fn example2_path(steps: usize) -> Result<PathSpec> {
    PathSpec::linear("epsilon", 3.7, 3.2, steps)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// A parameter-independent metric for every member of `example1`.
pub fn example1_metric() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c(1., 0.), c(0., 1.), c(1., 0.), c(0., 0.)],
        vec![c(0., -1.), c(1., 0.), c(0., 0.), c(1., 0.)],
        vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
        vec![c(0., 0.), c(1., 0.), c(0., -1.), c(0., 0.)],
    ])
    .expect("constant matrix")
}

/// Metric for `example2`; depends on `γ` only.
pub fn example2_metric(gamma: f64) -> ComplexMatrix {
    let z = c(0., 0.);
    ComplexMatrix::from_rows(&[
        vec![z, c(0., -2.0 * gamma), z, c(0., 1.)],
        vec![c(0., 2.0 * gamma), z, c(0., 1.), z],
        vec![z, c(0., -1.), z, z],
        vec![c(0., -1.), z, z, z],
    ])
    .expect("finite gamma")
}
