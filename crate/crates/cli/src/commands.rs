//! Subcommand implementations. Each returns the artifacts to write and
//! whether its checks passed; nothing here touches the filesystem.

use std::fmt;

use serde::Serialize;

use beta_lab_core::geometry::el_residual_exact;
use beta_lab_core::rotational::{
    asymptotic_report, beta_sweep, catenoid_solution, closed_form_deviation, el_closure, limit_bounds_report,
    angle_pde_check, solve_profile, ProfileParams, RotationalProfile,
};
use beta_lab_core::surfaces::{Perturbed, ProfileRadial, RotationalSurface};
use beta_lab_core::symbol::symbol_sweep;
use beta_lab_core::variation::{
    c1_norm, random_bump_fields, variation_report, Projection, VariationOptions,
};
use beta_lab_core::Error;

use crate::config::{ConfigError, Defaults, Format, RunConfig};
use crate::output::{line_plot, profile_csv, Series};

#[derive(Debug)]
pub enum CmdError {
    Config(ConfigError),
    Core(Error),
}

impl CmdError {
    pub fn name(&self) -> &'static str {
        match self {
            CmdError::Config(e) => e.name(),
            CmdError::Core(e) => e.name(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Config(e) => e.fmt(f),
            CmdError::Core(e) => e.fmt(f),
        }
    }
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Core(e)
    }
}

/// One output file. `name` is relative to the output directory for
/// multi-file commands; single-file commands leave it empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub artifacts: Vec<Artifact>,
    pub passed: bool,
}

impl Run {
    fn single(contents: String, passed: bool) -> Run {
        Run { artifacts: vec![Artifact { name: String::new(), contents }], passed }
    }
}

/// One pass/fail line of a JSON report, with the tolerance it was judged by.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub value: f64,
    /// How `value` is compared with `tolerance`: `<=`, `>=` or `<`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, beta: Option<f64>, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), beta, value, relation: "<=", tolerance, passed: value <= tolerance }
    }

    pub fn at_least(name: &str, beta: Option<f64>, value: f64, tolerance: f64) -> Check {
        Check { name: name.into(), beta, value, relation: ">=", tolerance, passed: value >= tolerance }
    }

    /// A yes/no property reported as `value = 1` (holds) or `0`.
    pub fn flag(name: &str, beta: Option<f64>, holds: bool) -> Check {
        Check {
            name: name.into(),
            beta,
            value: if holds { 1.0 } else { 0.0 },
            relation: ">=",
            tolerance: 1.0,
            passed: holds,
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn params(cfg: &RunConfig, beta: f64) -> ProfileParams {
    ProfileParams { beta, c1: cfg.c1, c2: cfg.c2, eps: cfg.eps, r_max: cfg.r_max, n: cfg.n, f0: cfg.f0, g0: cfg.g0 }
}

/// Euler-Lagrange residual `|P|` at every node, at `θ = 0`, with the exact
/// `∇cos α`.
pub fn node_residuals(profile: &RotationalProfile, cfg: &RunConfig) -> Result<Vec<f64>, Error> {
    let surface = RotationalSurface::new(ProfileRadial::new(profile), profile.beta);
    profile
        .r
        .iter()
        .map(|&r| el_residual_exact(&surface, [r, 0.0], &cfg.tolerances).map(|e| e.norm()))
        .collect()
}

fn beta_label(beta: f64) -> String {
    format!("{beta}")
}

fn family_plot(profiles: &[RotationalProfile], cfg: &RunConfig) -> String {
    let mut series: Vec<Series> = profiles
        .iter()
        .map(|p| Series {
            label: format!("β = {}", beta_label(p.beta)),
            points: p.r.iter().copied().zip(p.f.iter().copied()).collect(),
            dashed: false,
        })
        .collect();
    let min_beta = profiles.iter().map(|p| p.beta).fold(f64::INFINITY, f64::min);
    if min_beta < 0.5 {
        if let Some(reference) = catenoid_reference(&profiles[0], cfg) {
            series.push(reference);
        }
    }
    line_plot(
        "Rotational profiles f(r)",
        "r",
        "f(r)",
        &series,
        cfg.r_max / cfg.eps > 100.0,
    )
}

/// Half catenoid through the first node outside its neck, at height `f0`.
fn catenoid_reference(p: &RotationalProfile, cfg: &RunConfig) -> Option<Series> {
    let neck = cfg.c1.hypot(cfg.c2);
    let anchor = *p.r.iter().find(|&&r| r > neck)?;
    let points = p
        .r
        .iter()
        .filter(|&&r| r >= anchor)
        .filter_map(|&r| catenoid_solution(r, cfg.c1, cfg.c2, anchor).ok().map(|f| (r, f + cfg.f0)))
        .collect();
    Some(Series { label: "catenoid".into(), points, dashed: true })
}

#[derive(Serialize)]
struct ProfileSummary {
    beta: f64,
    c1: f64,
    c2: f64,
    eps: f64,
    r_max: f64,
    n: usize,
    first_integral_residual: f64,
    max_el_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    closed_form_deviation: Option<f64>,
}

pub fn solve_defaults() -> Defaults {
    Defaults { betas: vec![2.0], eps: 0.01, r_max: 1000.0, n: 4097, samples: 1, format: Format::Csv }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Run, CmdError> {
    if cfg.format == Format::Csv {
        cfg.single_beta()?;
    }
    let profiles = cfg
        .betas
        .iter()
        .map(|&b| solve_profile(&params(cfg, b)))
        .collect::<Result<Vec<_>, _>>()?;
    let contents = match cfg.format {
        Format::Csv => profile_csv(&profiles[0], &node_residuals(&profiles[0], cfg)?),
        Format::Svg => family_plot(&profiles, cfg),
        Format::Json => {
            let mut out = Vec::new();
            for p in &profiles {
                let residual = node_residuals(p, cfg)?;
                out.push(ProfileSummary {
                    beta: p.beta,
                    c1: p.c1,
                    c2: p.c2,
                    eps: p.eps,
                    r_max: cfg.r_max,
                    n: p.len(),
                    first_integral_residual: p.first_integral_residual(),
                    max_el_residual: residual.iter().copied().fold(0.0, f64::max),
                    closed_form_deviation: closed_form_deviation(p)?,
                });
            }
            json(&out)
        }
    };
    Ok(Run::single(contents, true))
}

pub fn sweep_defaults() -> Defaults {
    Defaults { betas: vec![0.1, 1.0, 10.0], eps: 2.0, r_max: 5.0, n: 4097, samples: 1, format: Format::Csv }
}

#[derive(Serialize)]
struct ContinuityStep {
    from: f64,
    to: f64,
    sup_fp_distance: f64,
}

#[derive(Serialize)]
struct SweepReport {
    betas: Vec<f64>,
    steps: Vec<ContinuityStep>,
    max_continuity: f64,
    probe_r: f64,
    /// `|(f′, g′)|` at `probe_r` for each β.
    probe_slope: Vec<f64>,
    slope_decreasing_in_beta: bool,
    catenoid_reference: bool,
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Run, CmdError> {
    let mut betas = cfg.betas.clone();
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let sweep = beta_sweep(&betas, &params(cfg, betas[0]))?;
    let mut artifacts = Vec::new();
    for p in &sweep.profiles {
        artifacts.push(Artifact {
            name: format!("profile_beta_{}.csv", beta_label(p.beta)),
            contents: profile_csv(p, &node_residuals(p, cfg)?),
        });
    }
    artifacts.push(Artifact { name: "family.svg".into(), contents: family_plot(&sweep.profiles, cfg) });
    let mid = sweep.profiles[0].len() / 2;
    let probe_slope: Vec<f64> = sweep.profiles.iter().map(|p| p.fp[mid].hypot(p.gp[mid])).collect();
    let report = SweepReport {
        steps: betas
            .windows(2)
            .zip(&sweep.continuity)
            .map(|(w, &d)| ContinuityStep { from: w[0], to: w[1], sup_fp_distance: d })
            .collect(),
        max_continuity: sweep.max_continuity(),
        probe_r: sweep.profiles[0].r[mid],
        slope_decreasing_in_beta: probe_slope.windows(2).all(|w| w[1] < w[0]),
        probe_slope,
        catenoid_reference: betas[0] < 0.5,
        betas,
    };
    artifacts.push(Artifact { name: "continuity.json".into(), contents: json(&report) });
    Ok(Run { artifacts, passed: true })
}

pub fn verify_defaults() -> Defaults {
    Defaults { betas: vec![2.0], eps: 0.01, r_max: 1000.0, n: 4097, samples: 1, format: Format::Json }
}

#[derive(Serialize)]
struct VerifyConfig {
    betas: Vec<f64>,
    c1: f64,
    c2: f64,
    eps: f64,
    r_max: f64,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    corrupt_fp: Option<f64>,
}

/// Reported value without a pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: &'static str,
    pub beta: f64,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_r: Option<f64>,
}

#[derive(Serialize)]
struct VerifyReport {
    command: &'static str,
    seed: u64,
    config: VerifyConfig,
    checks: Vec<Check>,
    diagnostics: Vec<Diagnostic>,
    passed: bool,
}

/// Checks on the profile of one exponent.
fn profile_checks(
    cfg: &RunConfig,
    beta: f64,
    corrupt_fp: Option<f64>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<Vec<Check>, CmdError> {
    let thr = &cfg.thresholds;
    let tol = &cfg.tolerances;
    let b = Some(beta);
    let mut profile = solve_profile(&params(cfg, beta))?;
    if let Some(factor) = corrupt_fp {
        for v in &mut profile.fp {
            *v *= factor;
        }
    }
    let mut checks = vec![
        Check::at_most("first_integral", b, profile.first_integral_residual(), thr.first_integral),
    ];
    let closure = el_closure(&profile, tol)?;
    checks.push(Check::at_most("el_residual", b, closure.exact, thr.el_residual));
    diagnostics.push(Diagnostic { name: "el_residual_fd", beta, value: closure.fd, at_r: Some(closure.fd_worst_r) });
    if let Some(dev) = closed_form_deviation(&profile)? {
        let limit = if beta == 0.0 { thr.closed_form_catenoid } else { thr.closed_form_log };
        checks.push(Check::at_most("closed_form", b, dev, limit));
    }

    let far_regime = cfg.r_max >= 100.0;
    let near_regime = cfg.eps <= 1e-2 && beta > 0.0;
    if cfg.c1 == 1.0 && cfg.c2 == 1.0 && (far_regime || near_regime) {
        let a = asymptotic_report(&profile, tol)?;
        if let Some(last) = a.far.last() {
            if beta <= 5.0 {
                checks.push(Check::at_most("far_remainder", b, last.remainder.abs(), tol.far_remainder));
            }
            checks.push(Check::flag("far_remainder_decreasing", b, a.far_decreasing));
        }
        if let Some(first) = a.near.first() {
            checks.push(Check::at_most("near_relative_error", b, first.relative_error, tol.near_relative));
            checks.push(Check::flag("near_error_decreasing", b, a.near_decreasing));
        }
    }

    let lo = if beta == 0.0 { 2.0 } else { 1.0 };
    let fine = solve_profile(&ProfileParams { eps: lo, r_max: 10.0, ..params(cfg, beta) })?;
    let coarse = solve_profile(&ProfileParams { eps: lo, r_max: 10.0, n: (cfg.n - 1) / 2 + 1, ..params(cfg, beta) })?;
    let fine_pde = angle_pde_check(&fine)?.max_residual();
    let coarse_pde = angle_pde_check(&coarse)?.max_residual();
    checks.push(Check::at_most("pde_residual", b, fine_pde, tol.pde_residual));
    let ratio = if fine_pde > 0.0 { coarse_pde / fine_pde } else { f64::INFINITY };
    // residuals at roundoff level carry no convergence information
    let converged = fine_pde < 1e-13 && coarse_pde < 1e-13;
    checks.push(Check::at_least("pde_grid_ratio", b, if converged { f64::INFINITY } else { ratio }, thr.pde_ratio));
    Ok(checks)
}

/// Both limit propositions, independent of the configured exponent.
pub fn limit_checks(nodes: usize) -> Result<Vec<Check>, Error> {
    let large = limit_bounds_report(&[10.0, 100.0], [0.5, 50.0], nodes, 1.0)?;
    let small = limit_bounds_report(&[0.1, 0.01, 0.001], [2.0, 5.0], nodes, 1.0)?;
    let worst_ratio = large.large.iter().map(|e| e.worst_ratio).fold(0.0, f64::max);
    let worst_bound = small
        .small
        .iter()
        .map(|e| e.max_fp_sq / e.bound)
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("large_beta_bound_ratio", None, worst_ratio, 1.0),
        Check::at_most("small_beta_bound_ratio", None, worst_bound, 1.0),
        Check::flag("small_beta_converging", None, small.small_converging),
    ])
}

pub fn cmd_verify(cfg: &RunConfig, corrupt_fp: Option<f64>) -> Result<Run, CmdError> {
    let mut checks = Vec::new();
    let mut diagnostics = Vec::new();
    for &beta in &cfg.betas {
        checks.extend(profile_checks(cfg, beta, corrupt_fp, &mut diagnostics)?);
    }
    checks.extend(limit_checks(cfg.n)?);
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        command: "verify",
        seed: cfg.seed,
        config: VerifyConfig {
            betas: cfg.betas.clone(),
            c1: cfg.c1,
            c2: cfg.c2,
            eps: cfg.eps,
            r_max: cfg.r_max,
            n: cfg.n,
            corrupt_fp,
        },
        checks,
        diagnostics,
        passed,
    };
    Ok(Run::single(json(&report), passed))
}

pub fn variation_defaults() -> Defaults {
    Defaults { betas: vec![2.0], eps: 2.0, r_max: 6.0, n: 4097, samples: 20, format: Format::Json }
}

#[derive(Serialize)]
struct FieldEntry {
    beta: f64,
    index: usize,
    support_r: [f64; 2],
    mode: u32,
    x_c1_norm: f64,
    l_value: f64,
    dl_formula: f64,
    dl_prestokes: f64,
    dl_fd: f64,
    d2l_formula: Option<f64>,
    d2l_fd: f64,
    d2l_pair: Option<f64>,
    d2l_pair_sum: Option<f64>,
    criticality_residual: f64,
}

#[derive(Serialize)]
struct NegativeControl {
    beta: f64,
    amplitude: f64,
    wavenumber: f64,
    x_c1_norm: f64,
    dl_formula: f64,
    dl_prestokes: f64,
    dl_fd: f64,
}

#[derive(Serialize)]
struct VariationConfig {
    betas: Vec<f64>,
    c1: f64,
    c2: f64,
    eps: f64,
    r_max: f64,
    n: usize,
    fields: usize,
    quadrature_nodes: [usize; 2],
    first_step: f64,
    second_step: f64,
}

#[derive(Serialize)]
struct VariationOutput {
    command: &'static str,
    seed: u64,
    config: VariationConfig,
    fields: Vec<FieldEntry>,
    negative_control: Vec<NegativeControl>,
    checks: Vec<Check>,
    passed: bool,
}

fn first_variation_agreement(dl: [f64; 3], cfg: &RunConfig) -> (f64, f64) {
    let [a, b, c] = dl;
    let spread = (a - b).abs().max((a - c).abs()).max((b - c).abs());
    let scale = a.abs().max(b.abs()).max(c.abs());
    let thr = &cfg.thresholds;
    (spread, thr.first_variation_abs.max(thr.first_variation_rel * scale))
}

pub fn cmd_variation(cfg: &RunConfig) -> Result<Run, CmdError> {
    let opts = VariationOptions::default();
    let thr = &cfg.thresholds;
    let tol = &cfg.tolerances;
    let mut fields_out = Vec::new();
    let mut controls = Vec::new();
    let mut checks = Vec::new();
    for &beta in &cfg.betas {
        let b = Some(beta);
        let profile = solve_profile(&params(cfg, beta))?;
        let surface = RotationalSurface::new(ProfileRadial::new(&profile), beta);
        let fields = random_bump_fields(&surface, cfg.samples, cfg.seed, Projection::Normal);
        let (mut worst_spread, mut worst_allowed) = (0.0f64, f64::INFINITY);
        let (mut worst_critical, mut worst_second, mut worst_pair) = (0.0f64, 0.0f64, 0.0f64);
        for (index, field) in fields.iter().enumerate() {
            let rep = variation_report(&surface, field, &opts, tol)?;
            let norm = c1_norm(field, &opts.quad)?;
            let dl = [rep.dl_formula, rep.dl_prestokes, rep.dl_fd];
            let (spread, allowed) = first_variation_agreement(dl, cfg);
            if spread / allowed > worst_spread / worst_allowed || index == 0 {
                worst_spread = spread;
                worst_allowed = allowed;
            }
            let critical = dl.iter().map(|v| v.abs()).fold(0.0, f64::max) / norm;
            worst_critical = worst_critical.max(critical);
            worst_second = worst_second.max(rep.second_relative().unwrap_or(f64::INFINITY));
            worst_pair = worst_pair.max(rep.pair_relative().unwrap_or(f64::INFINITY));
            fields_out.push(FieldEntry {
                beta,
                index,
                support_r: [field.support.lo[0], field.support.hi[0]],
                mode: field.mode,
                x_c1_norm: norm,
                l_value: rep.l_value,
                dl_formula: rep.dl_formula,
                dl_prestokes: rep.dl_prestokes,
                dl_fd: rep.dl_fd,
                d2l_formula: rep.d2l_formula,
                d2l_fd: rep.d2l_fd,
                d2l_pair: rep.d2l_pair,
                d2l_pair_sum: rep.d2l_pair_sum,
                criticality_residual: rep.criticality_residual,
            });
        }
        checks.push(Check::at_most("first_variation_routes", b, worst_spread, worst_allowed));
        checks.push(Check::at_most("critical_first_variation_over_norm", b, worst_critical, thr.critical_first_variation));
        checks.push(Check::at_most("second_variation_relative", b, worst_second, thr.second_variation));
        checks.push(Check::at_most("pair_identity_relative", b, worst_pair, thr.pair_identity));

        let perturbed = RotationalSurface::new(
            Perturbed { base: ProfileRadial::new(&profile), amplitude: 0.05, wavenumber: 2.0 },
            beta,
        );
        // mode 0: higher angular modes have zero first variation by symmetry
        let field = &random_bump_fields(&perturbed, 1, cfg.seed, Projection::Normal)[0].with_mode(0, 0.0);
        let rep = variation_report(&perturbed, field, &opts, tol)?;
        let norm = c1_norm(field, &opts.quad)?;
        let dl = [rep.dl_formula, rep.dl_prestokes, rep.dl_fd];
        let (spread, allowed) = first_variation_agreement(dl, cfg);
        checks.push(Check::at_most("negative_control_routes", b, spread, allowed));
        checks.push(Check::at_least("negative_control_first_variation_over_norm", b, rep.dl_formula.abs() / norm, thr.negative_control));
        controls.push(NegativeControl {
            beta,
            amplitude: 0.05,
            wavenumber: 2.0,
            x_c1_norm: norm,
            dl_formula: rep.dl_formula,
            dl_prestokes: rep.dl_prestokes,
            dl_fd: rep.dl_fd,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    let out = VariationOutput {
        command: "variation",
        seed: cfg.seed,
        config: VariationConfig {
            betas: cfg.betas.clone(),
            c1: cfg.c1,
            c2: cfg.c2,
            eps: cfg.eps,
            r_max: cfg.r_max,
            n: cfg.n,
            fields: cfg.samples,
            quadrature_nodes: opts.quad.n,
            first_step: opts.first_step,
            second_step: opts.second_step,
        },
        fields: fields_out,
        negative_control: controls,
        checks,
        passed,
    };
    Ok(Run::single(json(&out), passed))
}

pub fn symbol_defaults() -> Defaults {
    Defaults { betas: vec![0.0, 1.0, 2.0, 10.0], eps: 0.01, r_max: 1000.0, n: 4097, samples: 100, format: Format::Json }
}

#[derive(Serialize)]
struct SymbolEntry {
    beta: f64,
    pairs: usize,
    min_cos_alpha: f64,
    min_det: f64,
    max_factorization_error: f64,
    max_quadratic_mismatch: f64,
    max_tangent_det: f64,
    strictness_failures: usize,
}

#[derive(Serialize)]
struct SymbolOutput {
    command: &'static str,
    seed: u64,
    sweeps: Vec<SymbolEntry>,
    checks: Vec<Check>,
    passed: bool,
}

pub fn cmd_symbol(cfg: &RunConfig) -> Result<Run, CmdError> {
    let thr = &cfg.thresholds;
    let mut sweeps = Vec::new();
    let mut checks = Vec::new();
    for &beta in &cfg.betas {
        let s = symbol_sweep(beta, cfg.samples, cfg.seed, &cfg.tolerances)?;
        let b = Some(beta);
        checks.push(Check::at_most("factorization_error", b, s.max_factorization_error, thr.factorization));
        checks.push(Check::at_most("strictness_failures", b, s.strictness_failures as f64, 0.0));
        checks.push(Check::at_most("tangent_det", b, s.max_tangent_det, thr.tangent_det));
        sweeps.push(SymbolEntry {
            beta,
            pairs: s.pairs,
            min_cos_alpha: s.min_cos_alpha,
            min_det: s.min_det,
            max_factorization_error: s.max_factorization_error,
            max_quadratic_mismatch: s.max_quadratic_mismatch,
            max_tangent_det: s.max_tangent_det,
            strictness_failures: s.strictness_failures,
        });
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Run::single(json(&SymbolOutput { command: "symbol", seed: cfg.seed, sweeps, checks, passed }), passed))
}
