//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ringstir::quadrature::integrate_real_line;
use ringstir::spectral::eigenvalues_trig;
use ringstir::transport::conductance_bond12;
use ringstir::{
    conductance_exact, conductance_numeric, dark_state_params, ground_state, integrated_current, metamorphosis_point,
    propagate, q_infinity, shifted_params, simple_params, two_site_g, Bond, FiniteDifference, RingParams,
    StepControl, SweepProtocol, TestFlux, TwoLevelParams, TwoSiteParams,
};

const SEED: u64 = 20_261_016;

struct Outcome {
    measured: String,
    bound: String,
    pass: bool,
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration) -> bool {
    let in_budget = elapsed <= c.budget;
    let pass = outcome.pass && in_budget;
    println!(
        "{} {:<3} {:<34} {} (bound {}) runtime {:.3} s (budget {} s){}",
        if pass { "PASS" } else { "FAIL" },
        c.id,
        c.name,
        outcome.measured,
        outcome.bound,
        elapsed.as_secs_f64(),
        c.budget.as_secs_f64(),
        if in_budget { "" } else { " over budget" },
    );
    pass
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let outcome = f();
    (outcome, start.elapsed())
}

fn splitting_ratio_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0_f64;
    let mut draws = 0;
    let mut pairs = Vec::new();
    while draws < 100 {
        let c0 = rng.gen_range(0.1..10.0);
        let c1: f64 = rng.gen_range(-10.0..10.0);
        let c2: f64 = rng.gen_range(-10.0..10.0);
        if (c1 - c2).abs() <= 0.05 * (c1.abs() + c2.abs()) {
            continue;
        }
        draws += 1;
        let p = RingParams::new(c0, c1, c2);
        let q = integrated_current(&p, 1e4 * p.max_coupling()).expect("nondegenerate draw");
        worst = worst.max((q - c1 / (c1 - c2)).abs());
        if pairs.len() < 10 {
            pairs.push((c1, c2));
        }
    }
    let mut spread = 0.0_f64;
    for (c1, c2) in pairs {
        let values: Vec<f64> = [0.01, 0.1, 1.0, 10.0]
            .iter()
            .map(|&c0| {
                let p = RingParams::new(c0, c1, c2);
                integrated_current(&p, 1e4 * p.max_coupling()).expect("nondegenerate draw")
            })
            .collect();
        let hi = values.iter().cloned().fold(f64::MIN, f64::max);
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        spread = spread.max(hi - lo);
    }
    Outcome {
        measured: format!("max |Q - c1/(c1-c2)| = {worst:.2e}, max spread over c0 = {spread:.2e}"),
        bound: "1e-3 each".into(),
        pass: worst <= 1e-3 && spread <= 1e-3,
    }
}

fn dark_state_law() -> Outcome {
    let mut limit_err = 0.0_f64;
    let mut curve_err = 0.0_f64;
    for (c1, c2) in [(19.0, 15.0), (0.2, 0.15), (5.0, -4.3), (1.0, 3.0)] {
        let p = RingParams::new(0.0, c1, c2);
        let expected = c1 * c1 / (c1 * c1 + c2 * c2);
        limit_err = limit_err.max((q_infinity(&p).expect("valid") - expected).abs());
        let two: TwoLevelParams = dark_state_params(&p).expect("dark state");
        let half = 20.0 * two.width();
        for k in 0..1000 {
            let u = two.u_c - half + 2.0 * half * k as f64 / 999.0;
            let exact = conductance_exact(&p, u).expect("valid");
            curve_err = curve_err.max((exact - two.conductance(u).expect("valid")).abs());
        }
    }
    Outcome {
        measured: format!("limit error {limit_err:.2e}, curve error {curve_err:.2e}"),
        bound: "1e-9 each".into(),
        pass: limit_err <= 1e-9 && curve_err <= 1e-9,
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let fd = FiniteDifference::default();
    let mut worst = [0.0_f64; 2];
    let mut accepted = 0;
    while accepted < 500 {
        let p = RingParams::new(rng.gen_range(0.2..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let u = rng.gen_range(-10.0..10.0);
        if eigenvalues_trig(&p, u, TestFlux::none()).ground_gap() < 0.05 {
            continue;
        }
        let (Ok(g01), Ok(g12)) = (conductance_exact(&p, u), conductance_bond12(&p, u)) else {
            continue;
        };
        if g01.abs() < 1e-4 || g12.abs() < 1e-4 {
            continue;
        }
        let (Ok(n01), Ok(n12)) = (
            conductance_numeric(&p, u, Bond::Bond01, fd),
            conductance_numeric(&p, u, Bond::Bond12, fd),
        ) else {
            continue;
        };
        worst[0] = worst[0].max((g01 - n01).abs() / g01.abs());
        worst[1] = worst[1].max((g12 - n12).abs() / g12.abs());
        accepted += 1;
    }
    Outcome {
        measured: format!("max rel error bond01 {:.2e}, bond12 {:.2e} over 500 samples", worst[0], worst[1]),
        bound: "1e-6".into(),
        pass: worst[0] <= 1e-6 && worst[1] <= 1e-6,
    }
}

fn two_site_sanity() -> Outcome {
    let mut worst = 0.0_f64;
    for (c, u_c) in [(1.0, 0.0), (0.01, 3.0), (50.0, -20.0)] {
        let p = TwoSiteParams::new(c, u_c, 1.0);
        let total = integrate_real_line(|u| two_site_g(&p, u).expect("nonzero coupling"), u_c, c, &[], 1e-10);
        worst = worst.max((total.value - 1.0).abs());
    }
    Outcome {
        measured: format!("max |int G - 1| = {worst:.2e}"),
        bound: "1e-6".into(),
        pass: worst <= 1e-6,
    }
}

fn fidelity(p: &RingParams, two: &TwoLevelParams) -> f64 {
    let half = 20.0 * two.width();
    let mut worst = 0.0_f64;
    for k in 0..4001 {
        let u = two.u_c - half + 2.0 * half * k as f64 / 4000.0;
        let exact = conductance_exact(p, u).expect("valid");
        worst = worst.max((exact - two.conductance(u).expect("valid")).abs());
    }
    worst / two.peak()
}

fn two_level_fidelity() -> Outcome {
    let set1 = RingParams::new(1.0, 0.2, 0.15);
    let set2 = RingParams::new(1.0, 5.0, 4.3);
    let d1 = fidelity(&set1, &simple_params(&set1).expect("simple"));
    let d2 = fidelity(&set2, &shifted_params(&set2).expect("shifted"));
    Outcome {
        measured: format!("max deviation / peak: set1 simple {:.2}%, set2 shifted {:.2}%", 100.0 * d1, 100.0 * d2),
        bound: "5%".into(),
        pass: d1 <= 0.05 && d2 <= 0.05,
    }
}

fn metamorphosis() -> Outcome {
    let p = RingParams::new(1.0, 19.0, 15.0);
    let plateau = 19.0 * 19.0 / (19.0 * 19.0 + 15.0 * 15.0);
    let asymptote = 19.0 / 4.0;
    let mid = 0.5 * (plateau + asymptote);
    let q = |u: f64| integrated_current(&p, u).expect("valid") - mid;
    let (mut lo, mut hi) = (10.0, 5000.0);
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if q(m) < 0.0 {
            lo = m;
        } else {
            hi = m;
        }
    }
    let crossing = 0.5 * (lo + hi);
    let u_m = metamorphosis_point(&p, 0.2).expect("c0 nonzero").u_m;
    let rel = (crossing - u_m).abs() / u_m;
    let occ = ground_state(&p, u_m, TestFlux::none()).expect("valid").occupations();
    Outcome {
        measured: format!("crossing {crossing:.3} vs {u_m}, rel {:.3}%, p1 {:.4}, p0 {:.2e}", 100.0 * rel, occ[1], occ[0]),
        bound: "2%, p1 > 0.9, p0 < 0.01".into(),
        pass: rel <= 0.02 && occ[1] > 0.9 && occ[0] < 0.01,
    }
}

struct DynamicsRun {
    q_dyn: f64,
    drift: f64,
    steps: usize,
}

fn run_dynamics(u_dot: f64, tol: f64) -> DynamicsRun {
    let p = RingParams::new(1.0, 19.0, 15.0);
    let proto = SweepProtocol::new(u_dot, -200.0, 600.0);
    let trace = propagate(&p, &proto, &StepControl::default().with_tol(tol)).expect("propagation succeeds");
    DynamicsRun {
        q_dyn: trace.q_dyn(),
        drift: trace.max_norm_drift,
        steps: trace.steps,
    }
}

fn crossover(fast: &DynamicsRun, slow: &DynamicsRun) -> Outcome {
    let fast_target = 361.0 / 586.0;
    let fast_rel = (fast.q_dyn - fast_target).abs() / fast_target;
    let slow_rel = (slow.q_dyn - 4.75).abs() / 4.75;
    Outcome {
        measured: format!(
            "u_dot=50: Q_dyn {:.4} vs {fast_target:.4} ({:.1}%); u_dot=0.02: Q_dyn {:.4} vs 4.75 ({:.1}%), {} steps",
            fast.q_dyn,
            100.0 * fast_rel,
            slow.q_dyn,
            100.0 * slow_rel,
            slow.steps
        ),
        bound: "10% and 15%".into(),
        pass: fast_rel <= 0.10 && slow_rel <= 0.15,
    }
}

fn two_stage_profile() -> Outcome {
    let p = RingParams::new(1.0, 19.0, 17.0);
    let u_m = metamorphosis_point(&p, 0.2).expect("c0 nonzero").u_m;
    let target = 361.0 / 650.0;
    let plateau = integrated_current(&p, 0.5 * u_m).expect("valid");
    let rel = (plateau - target).abs() / target;
    let last = integrated_current(&p, 1e4 * p.max_coupling()).expect("valid");
    Outcome {
        measured: format!(
            "Q({:.1}) = {plateau:.4} vs {target:.4} ({:.1}%), Q(u_max) = {last:.8}",
            0.5 * u_m,
            100.0 * rel
        ),
        bound: "10%, |Q(u_max) - 9.5| <= 1e-3".into(),
        pass: rel <= 0.10 && (last - 9.5).abs() <= 1e-3,
    }
}

fn cli_output(args: &[&str], dir: &std::path::Path) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_ringstir"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "ringstir {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    let mut bytes = out.stdout;
    if let Some(pos) = args.iter().position(|a| *a == "--out") {
        let target = dir.join(args[pos + 1]);
        if target.is_dir() {
            let mut names: Vec<_> = std::fs::read_dir(&target)
                .expect("readable")
                .map(|e| e.expect("entry").path())
                .collect();
            names.sort();
            for name in names {
                bytes.extend(std::fs::read(name).expect("readable"));
            }
        } else {
            bytes.extend(std::fs::read(&target).expect("readable"));
        }
    }
    bytes
}

fn determinism(runs: &[&DynamicsRun]) -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let commands: [&[&str]; 6] = [
        &["spectrum"],
        &["sweep", "--out", "sweep.csv"],
        &["dynamics", "--n", "101"],
        &["regimes", "--n", "21"],
        &["figures", "fig2", "--out", "fig2"],
        &["figures", "fig4", "--out", "fig4"],
    ];
    let mut identical = 0;
    for args in commands {
        if cli_output(args, dir.path()) == cli_output(args, dir.path()) {
            identical += 1;
        }
    }
    let drift = runs.iter().map(|r| r.drift).fold(0.0, f64::max);
    Outcome {
        measured: format!("{identical}/{} commands byte-identical, max norm drift {drift:.2e}", commands.len()),
        bound: "all identical, drift < 1e-9".into(),
        pass: identical == commands.len() && drift < 1e-9,
    }
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    let mut check = |id, name, budget, f: &dyn Fn() -> Outcome| {
        let (outcome, elapsed) = timed(f);
        all &= report(&Criterion { id, name, budget }, outcome, elapsed);
    };
    check("1", "splitting-ratio law", secs(5), &splitting_ratio_law);
    check("2", "dark-state law", secs(1), &dark_state_law);
    check("3", "oracle equivalence", secs(10), &oracle_equivalence);
    check("4", "two-site sum rule", secs(1), &two_site_sanity);
    check("5", "two-level fidelity", secs(2), &two_level_fidelity);
    check("6", "metamorphosis crossing", secs(2), &metamorphosis);

    let start = Instant::now();
    let fast = run_dynamics(50.0, 1e-8);
    let slow = run_dynamics(0.02, 1e-5);
    let elapsed = start.elapsed();
    all &= report(
        &Criterion { id: "7", name: "non-adiabatic crossover", budget: secs(180) },
        crossover(&fast, &slow),
        elapsed,
    );

    let mut check = |id, name, budget, f: &dyn Fn() -> Outcome| {
        let (outcome, elapsed) = timed(f);
        all &= report(&Criterion { id, name, budget }, outcome, elapsed);
    };
    check("8", "two-stage charge profile", secs(2), &two_stage_profile);
    check("9", "unitarity and determinism", secs(1), &|| determinism(&[&fast, &slow]));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
