mod common;

use std::time::Instant;

use ptbreak::krein::CollisionClass;
use ptbreak::sweep::{run_sweep, EventKind, SweepEvent};
use ptbreak::Tolerances;
use rand::Rng;

const NEAR: f64 = 1e-6;

fn eps(events: &[SweepEvent]) -> impl Iterator<Item = &SweepEvent> {
    events.iter().filter(|e| e.kind == EventKind::EP)
}

fn breaks(events: &[SweepEvent]) -> impl Iterator<Item = &SweepEvent> {
    events
        .iter()
        .filter(|e| matches!(e.kind, EventKind::BreakingOnset | EventKind::BreakingOffset))
}

#[test]
fn breaking_follows_krein_collisions() {
    let tol = Tolerances::default();
    let mut rng = common::rng(51);
    let start = Instant::now();
    let (mut opposite, mut same, mut onsets) = (0, 0, 0);
    for fam in 0..200 {
        let n = rng.random_range(2..=6);
        let (spec, path, _) = common::random_pt_family(&mut rng, n, 400);
        let (tracked, events) =
            run_sweep(&spec, &path, &tol).unwrap_or_else(|e| panic!("family {fam}: {e}"));
        for s in &tracked.samples {
            assert_eq!(
                s.broken_count % 2,
                0,
                "family {fam}: odd off-axis count at t={}",
                s.t
            );
        }
        for b in breaks(&events) {
            let ep = eps(&events)
                .find(|e| (e.t_star - b.t_star).abs() <= NEAR)
                .unwrap_or_else(|| {
                    panic!(
                        "family {fam}: {:?} at {} without EP; {events:#?}",
                        b.kind, b.t_star
                    )
                });
            assert!(
                eps(&events).any(|e| (e.t_star - b.t_star).abs() <= NEAR
                    && e.collision == CollisionClass::OppositeSign),
                "family {fam}: breaking at {} but EP is {:?}",
                b.t_star,
                ep.collision
            );
            if b.kind == EventKind::BreakingOnset {
                onsets += 1;
            }
        }
        for e in eps(&events) {
            let breaking = breaks(&events).any(|b| (b.t_star - e.t_star).abs() <= NEAR);
            match e.collision {
                CollisionClass::SameSign => {
                    same += 1;
                    assert!(
                        !breaking
                            || eps(&events).any(|o| (o.t_star - e.t_star).abs() <= NEAR
                                && o.collision == CollisionClass::OppositeSign),
                        "family {fam}: SameSign EP at {} breaks",
                        e.t_star
                    );
                }
                CollisionClass::OppositeSign => {
                    opposite += 1;
                    assert!(
                        breaking,
                        "family {fam}: OppositeSign EP at {} without breaking; {events:#?}",
                        e.t_star
                    );
                }
                CollisionClass::NotApplicable => {}
            }
        }
    }
    println!(
        "opposite {opposite}, same {same}, onsets {onsets}, {:?}",
        start.elapsed()
    );
    assert!(opposite > 0 && onsets > 0);
}

fn ep_times(spec: &ptbreak::family::FamilySpec, path: &ptbreak::family::PathSpec) -> Vec<f64> {
    let (_, events) = run_sweep(spec, path, &Tolerances::default()).unwrap();
    eps(&events).map(|e| e.t_star).collect()
}

fn assert_refines(label: &str, coarse: &[f64], fine: &[f64], within: f64) {
    for &t in coarse {
        let d = fine
            .iter()
            .map(|&u| (u - t).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(
            d < within * (1.0 + t.abs()),
            "{label}: EP at {t} moved by {d:e} on refinement; fine {fine:?}"
        );
    }
}

#[test]
fn halving_the_step_keeps_ep_locations() {
    use ptbreak::family::{presets, PathSpec};
    let mut rng = common::rng(52);
    for fam in 0..40 {
        let n = rng.random_range(2..=5);
        let (spec, path, _) = common::random_pt_family(&mut rng, n, 200);
        let fine = PathSpec::from_parts(
            path.var.clone(),
            path.from,
            path.to,
            2 * path.steps - 1,
            path.bind.clone(),
        )
        .unwrap();
        assert_refines(
            &format!("family {fam}"),
            &ep_times(&spec, &path),
            &ep_times(&spec, &fine),
            1e-13,
        );
    }
    // On path 2 both a and b vanish at the EP and a + b is quadratic there,
    // so rounding hides the sign of b² - a² within about 1e-8 of it.
    let cases = [
        (
            "path1",
            presets::example1(),
            presets::example1_path1(101).unwrap(),
            presets::example1_path1(201).unwrap(),
        ),
        (
            "c-path",
            presets::example1(),
            presets::example1_c_path(101).unwrap(),
            presets::example1_c_path(201).unwrap(),
        ),
        (
            "path2",
            presets::example1(),
            presets::example1_path2(101).unwrap(),
            presets::example1_path2(201).unwrap(),
        ),
        (
            "example2",
            presets::example2(),
            presets::example2_path(101).unwrap(),
            presets::example2_path(201).unwrap(),
        ),
    ];
    for (label, spec, coarse, fine) in cases {
        let c = ep_times(&spec, &coarse);
        assert!(!c.is_empty(), "{label}: no EP");
        let within = if label == "path2" { 1e-7 } else { 1e-13 };
        assert_refines(label, &c, &ep_times(&spec, &fine), within);
    }
}
