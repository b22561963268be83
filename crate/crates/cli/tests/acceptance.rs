use std::f64::consts::SQRT_2;
use std::process::Command;
use std::thread;
use std::time::{Duration, Instant};

use beta_lab_core::rotational::{
    angle_pde_check, closed_form_deviation, el_closure, far_probe, limit_bounds_report, near_probe, solve_profile,
    solve_slope, ProfileParams, RotationalProfile,
};
use beta_lab_core::surfaces::{Perturbed, ProfileRadial, Radial, RotationalSurface};
use beta_lab_core::symbol::symbol_sweep;
use beta_lab_core::variation::{
    c1_norm, random_bump_fields, variation_report, Projection, VariationOptions, VariationReport,
};
use beta_lab_core::Tolerances;

const SEED: u64 = 42;
const FIELDS: usize = 20;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn profile(beta: f64, eps: f64, r_max: f64) -> RotationalProfile {
    solve_profile(&ProfileParams { beta, eps, r_max, n: 4097, ..Default::default() }).unwrap()
}

fn sci(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

fn criterion_1() -> Outcome {
    let (dev, took) = timed(|| closed_form_deviation(&profile(1.0, 0.1, 100.0)).unwrap().unwrap());
    let ok = dev < 1e-10 && took < Duration::from_secs(1);
    outcome(ok, format!("log profile deviation {dev:.2e} (< 1e-10) in {took:?} (< 1 s)"))
}

fn criterion_2() -> Outcome {
    let (dev, took) = timed(|| closed_form_deviation(&profile(0.0, 1.5, 20.0)).unwrap().unwrap());
    let refused = [0.5, 1.0, 1.3, SQRT_2]
        .iter()
        .all(|&r| solve_slope(r, 0.0, 1.0, 1.0).map_err(|e| e.name()) == Err("NoSolution"));
    let ok = dev < 1e-8 && refused && took < Duration::from_secs(1);
    outcome(ok, format!("catenoid deviation {dev:.2e} (< 1e-8) in {took:?}, NoSolution for r <= sqrt 2: {refused}"))
}

fn criterion_3() -> Outcome {
    let worst = [0.5, 1.0, 2.0, 5.0]
        .iter()
        .map(|&b| profile(b, 0.01, 1000.0).first_integral_residual())
        .fold(0.0, f64::max);
    outcome(worst <= 1e-10, format!("worst relative first-integral residual {worst:.2e} (<= 1e-10)"))
}

fn criterion_4() -> Outcome {
    let tol = Tolerances::default();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    let cases = [(0.0, 1.5, 20.0), (0.5, 0.01, 1000.0), (1.0, 0.01, 1000.0), (2.0, 0.01, 1000.0), (5.0, 0.01, 1000.0)];
    for (beta, eps, r_max) in cases {
        let (closure, took) = timed(|| el_closure(&profile(beta, eps, r_max), &tol).unwrap());
        worst = worst.max(closure.exact);
        slowest = slowest.max(took);
    }
    let ok = worst < 1e-8 && slowest < Duration::from_secs(5);
    outcome(ok, format!("worst |P| {worst:.2e} (< 1e-8), slowest profile {slowest:?} (< 5 s)"))
}

fn criterion_5() -> Outcome {
    let rem: Vec<f64> = [250.0, 500.0, 1000.0].iter().map(|&r| far_probe(r, 2.0).unwrap().remainder.abs()).collect();
    let ok = rem[2] < 0.01 && rem[1] < rem[0] && rem[2] < rem[1];
    outcome(ok, format!("remainders {} at r = 250, 500, 1000", sci(&rem)))
}

fn criterion_6() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 2.0] {
        let e: Vec<f64> = [1e-2, 10f64.powf(-2.5), 1e-3]
            .iter()
            .map(|&r| near_probe(r, beta).unwrap().relative_error)
            .collect();
        ok &= e[0] < 1e-3 && e[1] < e[0] && e[2] < e[1];
        parts.push(format!("beta {beta}: {}", sci(&e)));
    }
    outcome(ok, format!("near relative errors {}", parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let report = limit_bounds_report(&[10.0, 100.0], [0.5, 50.0], 2001, 1.0).unwrap();
    let worst = report.large.iter().map(|e| e.worst_ratio).fold(0.0, f64::max);
    outcome(report.large_ok && worst <= 1.0, format!("max f'/bound {worst:.4} (<= 1)"))
}

fn criterion_8() -> Outcome {
    let report = limit_bounds_report(&[0.1, 0.01, 0.001], [2.0, 5.0], 2001, 1.0).unwrap();
    let d: Vec<f64> = report.small.iter().map(|e| e.sup_distance).collect();
    let worst = report.small.iter().map(|e| e.max_fp_sq / e.bound).fold(0.0, f64::max);
    let ok = report.small_converging && report.small_bound_ok && d.windows(2).all(|w| w[1] < w[0]);
    outcome(ok, format!("sup distances {}, max f'^2 / (3/(A^2-2)) {worst:.4}", sci(&d)))
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for beta in [0.5, 1.0, 2.0, 5.0] {
        let fine = angle_pde_check(&profile(beta, 1.0, 10.0)).unwrap().max_residual();
        let coarse = solve_profile(&ProfileParams { beta, eps: 1.0, r_max: 10.0, n: 2049, ..Default::default() })
            .and_then(|p| angle_pde_check(&p))
            .unwrap()
            .max_residual();
        let roundoff = fine < 1e-13 && coarse < 1e-13;
        let ratio = coarse / fine;
        ok &= fine < 1e-5 && (roundoff || ratio >= 3.5);
        parts.push(format!("beta {beta}: {fine:.2e}, ratio {ratio:.2}"));
    }
    outcome(ok, format!("pde residuals {}", parts.join("; ")))
}

fn reports<R: Radial + Sync>(surface: &RotationalSurface<R>, mode_zero: bool) -> Vec<(VariationReport, f64)> {
    let opts = VariationOptions::default();
    let tol = Tolerances::default();
    random_bump_fields(surface, FIELDS, SEED, Projection::Normal)
        .into_iter()
        .map(|f| if mode_zero { f.with_mode(0, 0.0) } else { f })
        .map(|f| (variation_report(surface, &f, &opts, &tol).unwrap(), c1_norm(&f, &opts.quad).unwrap()))
        .collect()
}

fn route_excess(rep: &VariationReport) -> f64 {
    let [a, b, c] = [rep.dl_formula, rep.dl_prestokes, rep.dl_fd];
    let spread = (a - b).abs().max((a - c).abs()).max((b - c).abs());
    let scale = a.abs().max(b.abs()).max(c.abs());
    spread / 1e-6f64.max(1e-4 * scale)
}

struct VariationRuns {
    critical: Vec<(VariationReport, f64)>,
    perturbed: Vec<(VariationReport, f64)>,
    catenoid: Vec<(VariationReport, f64)>,
}

fn variation_runs() -> VariationRuns {
    let quartic = profile(2.0, 2.0, 6.0);
    let catenoid = profile(0.0, 2.0, 6.0);
    thread::scope(|s| {
        let critical = s.spawn(|| reports(&RotationalSurface::new(ProfileRadial::new(&quartic), 2.0), false));
        let perturbed = s.spawn(|| {
            let radial = Perturbed { base: ProfileRadial::new(&quartic), amplitude: 0.05, wavenumber: 2.0 };
            reports(&RotationalSurface::new(radial, 2.0), true)
        });
        let catenoid = s.spawn(|| reports(&RotationalSurface::new(ProfileRadial::new(&catenoid), 0.0), false));
        VariationRuns {
            critical: critical.join().unwrap(),
            perturbed: perturbed.join().unwrap(),
            catenoid: catenoid.join().unwrap(),
        }
    })
}

fn criterion_10(runs: &VariationRuns) -> Outcome {
    let excess = runs.critical.iter().chain(&runs.perturbed).map(|(r, _)| route_excess(r)).fold(0.0, f64::max);
    let critical = runs
        .critical
        .iter()
        .map(|(r, norm)| r.dl_formula.abs().max(r.dl_prestokes.abs()).max(r.dl_fd.abs()) / norm)
        .fold(0.0, f64::max);
    let signal = runs.perturbed.iter().map(|(r, _)| r.dl_formula.abs()).fold(0.0, f64::max);
    let ok = excess <= 1.0 && critical < 1e-6;
    outcome(
        ok,
        format!(
            "{} fields: route spread / allowance {excess:.3} (<= 1), critical max|dL|/|X| {critical:.2e} (< 1e-6), off-critical max|dL| {signal:.3}",
            2 * FIELDS
        ),
    )
}

fn criterion_11(runs: &VariationRuns) -> Outcome {
    let both = || runs.critical.iter().chain(&runs.catenoid).map(|(r, _)| r);
    let second = both().map(|r| r.second_relative().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let pair = both().map(|r| r.pair_relative().unwrap_or(f64::INFINITY)).fold(0.0, f64::max);
    let ok = second < 1e-3 && pair < 1e-6;
    outcome(ok, format!("beta 0 and 2: second variation rel {second:.2e} (< 1e-3), pair identity rel {pair:.2e} (< 1e-6)"))
}

fn criterion_12() -> Outcome {
    let tol = Tolerances::default();
    let mut ok = true;
    let (mut fact, mut tangent, mut failures) = (0.0f64, 0.0f64, 0);
    for beta in [0.0, 0.5, 2.0, 10.0] {
        let s = symbol_sweep(beta, 100, SEED, &tol).unwrap();
        ok &= s.pairs == 100;
        fact = fact.max(s.max_factorization_error);
        tangent = tangent.max(s.max_tangent_det);
        failures += s.strictness_failures;
    }
    ok &= fact < 1e-12 && tangent < 1e-12 && failures == 0;
    outcome(ok, format!("factorization {fact:.2e}, tangent det {tangent:.2e}, strictness failures {failures}"))
}

fn criterion_13() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_beta-lab"))
            .args(["verify", "--seed", "7"])
            .env_remove("BETA_LAB_SEED")
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let ok = a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    outcome(ok, format!("two verify runs, {} bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() {
    let runs = variation_runs();
    let results = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(&runs),
        criterion_11(&runs),
        criterion_12(),
        criterion_13(),
    ];
    for (i, r) in results.iter().enumerate() {
        println!("criterion {:>2}: {}  {}", i + 1, if r.passed { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| !r.passed).map(|(i, _)| i + 1).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
