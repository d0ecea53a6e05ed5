//! Scenario files: a versioned JSON description of a domain, forcing, initial
//! data, solver settings and an ordered list of experiments, plus the runner
//! that executes them and writes reports.

use crate::almost_periodic::{verify_aap, AapReport, EPSILON_LADDER};
use crate::error::{Error, Result};
use crate::estimate::EstimateReport;
use crate::field::ScalarField;
use crate::forcing::{ApTerm, ComponentForcing, ForcingSpec, Profile, Sinusoid, Tail, TailTerm};
use crate::gronwall::{gronwall_integrals, GronwallReport};
use crate::io::{write_csv, write_json};
use crate::mild_solver::{
    linear_bound, measure_constants, picard_solve, picard_solve_from, solve_linear, x_norm, CheckMode,
    LinearBoundReport, PicardDiagnostics, SolverConfig, SolverConstants, TrajectoryState,
};
use crate::spectral::{assemble_domain, Domain};
use crate::stability::{distance_series, stability_experiment, StabilityReport};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

/// The only config schema version understood.
pub const SCHEMA_VERSION: u32 = 1;

/// Gate on the fixed-point residual of a nonlinear solve.
pub const RESIDUAL_GATE: f64 = 1e-8;
/// Slack on the empirical contraction ratio over `4 C3 rho`.
pub const CONTRACTION_SLACK: f64 = 0.05;
/// Fitted rates are accepted in `[SIGMA_FLOOR lambda1, SIGMA_CEILING lambda1)`.
pub const SIGMA_FLOOR: f64 = 0.5;
pub const SIGMA_CEILING: f64 = 1.05;
/// Allowed pointwise deviation of the distance ratio from 2 when the perturbation is halved.
pub const HALVING_TOLERANCE: f64 = 0.1;

/// A domain length, either a number or a multiple of pi such as `"pi"` or `"2pi"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Length {
    Number(f64),
    Expr(String),
}

impl Length {
    fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Length::Number(x) => Ok(*x),
            Length::Expr(s) => {
                let t = s.trim();
                let Some(coef) = t.strip_suffix("pi") else {
                    return t.parse().map_err(|_| format!("cannot read length `{s}`"));
                };
                let coef = coef.trim().trim_end_matches('*').trim();
                if coef.is_empty() {
                    Ok(std::f64::consts::PI)
                } else {
                    coef.parse::<f64>()
                        .map(|c| c * std::f64::consts::PI)
                        .map_err(|_| format!("cannot read length `{s}`"))
                }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub lengths: Vec<Length>,
    pub resolution: Vec<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApSpec {
    pub sinusoids: Vec<Sinusoid>,
    pub profile: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub envelope: Tail,
    pub profile: String,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    #[serde(default)]
    pub ap: Vec<ApSpec>,
    #[serde(default)]
    pub tail: Option<TailSpec>,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    #[serde(default)]
    pub g: ComponentSpec,
    #[serde(default)]
    pub h: ComponentSpec,
    #[serde(default = "yes")]
    pub mean_zero_g: bool,
}

impl Default for ForcingConfig {
    fn default() -> Self {
        Self { g: ComponentSpec::default(), h: ComponentSpec::default(), mean_zero_g: true }
    }
}

/// `amplitude * profile`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileTerm {
    pub profile: String,
    pub amplitude: f64,
}

/// Fields given as sums of scaled profiles.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub u: Vec<ProfileTerm>,
    #[serde(default)]
    pub v: Vec<ProfileTerm>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    /// Defaults to `40 / lambda1`.
    pub t_end: Option<f64>,
    pub h: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
    pub mode: Option<CheckMode>,
    pub chemotaxis: Option<bool>,
}

fn default_samples() -> usize {
    32
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateParams {
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for EstimateParams {
    fn default() -> Self {
        Self { samples: default_samples() }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// Measures the four semigroup constants and assembles the solver constants.
    VerifyEstimates,
    /// Linear solve when chemotaxis is off, Picard iteration otherwise.
    Solve {
        /// Re-solves from a second initial guess and compares.
        #[serde(default)]
        uniqueness_check: bool,
    },
    /// Certifies the solved norm trajectory as asymptotically almost periodic.
    AapCheck {
        epsilon: Option<f64>,
        /// Defaults to `5 / lambda1`.
        transient_cut: Option<f64>,
        /// Tail added to `g`; the tailed solution is compared to the untailed one.
        tail: Option<TailSpec>,
    },
    Stability {
        perturbation: DataSpec,
        #[serde(default = "yes")]
        halving_check: bool,
    },
    Gronwall {
        /// Defaults to `lambda1 / 4, lambda1 / 2, 3 lambda1 / 4`.
        sigmas: Option<Vec<f64>>,
        /// Defaults to the solver horizon.
        t_end: Option<f64>,
        #[serde(default = "default_points")]
        points: usize,
    },
}

fn default_points() -> usize {
    200
}

impl Experiment {
    pub fn label(&self) -> &'static str {
        match self {
            Experiment::VerifyEstimates => "verify_estimates",
            Experiment::Solve { .. } => "solve",
            Experiment::AapCheck { .. } => "aap_check",
            Experiment::Stability { .. } => "stability",
            Experiment::Gronwall { .. } => "gronwall",
        }
    }
}

/// Parsed scenario file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainSpec,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub initial_data: DataSpec,
    #[serde(default)]
    pub solver: SolverParams,
    #[serde(default)]
    pub estimates: EstimateParams,
    pub experiments: Vec<Experiment>,
    /// Directory that relative profile paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_p() -> f64 {
    4.0
}

fn parse_error(key: &str, message: impl ToString) -> Error {
    Error::ConfigParse { key: key.to_string(), message: message.to_string() }
}

impl Scenario {
    pub fn from_json_str(text: &str, base_dir: &Path) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut s: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            parse_error(if key == "." { "<root>" } else { &key }, e.inner())
        })?;
        if s.schema != SCHEMA_VERSION {
            return Err(parse_error("schema", format!("unsupported schema {}, expected {SCHEMA_VERSION}", s.schema)));
        }
        if s.name.is_empty() || s.name.contains(['/', '\\']) || s.name == "." || s.name == ".." {
            return Err(parse_error("name", "must be a nonempty plain file name"));
        }
        if s.experiments.is_empty() {
            return Err(parse_error("experiments", "at least one experiment is required"));
        }
        s.base_dir = base_dir.to_path_buf();
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_error("<config>", format!("cannot read {}: {e}", path.display())))?;
        Scenario::from_json_str(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn domain(&self) -> Result<Arc<Domain>> {
        let lengths = self
            .domain
            .lengths
            .iter()
            .enumerate()
            .map(|(i, l)| l.value().map_err(|m| parse_error(&format!("domain.lengths[{i}]"), m)))
            .collect::<Result<Vec<_>>>()?;
        assemble_domain(&lengths, &self.domain.resolution).map_err(|e| parse_error("domain", e))
    }

    pub fn solver_config(&self, domain: &Domain) -> Result<SolverConfig> {
        let d = SolverConfig::for_domain(domain);
        let s = &self.solver;
        let cfg = SolverConfig {
            p: self.p,
            t_end: s.t_end.unwrap_or(d.t_end),
            h: s.h.unwrap_or(d.h),
            tolerance: s.tolerance.unwrap_or(d.tolerance),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            mode: s.mode.unwrap_or(d.mode),
            chemotaxis: s.chemotaxis.unwrap_or(d.chemotaxis),
        };
        cfg.validate(domain).map_err(|e| match e {
            Error::ExponentRegimeViolation { .. } => parse_error("p", e),
            e => parse_error("solver", e),
        })?;
        Ok(cfg)
    }

    fn profile(&self, domain: &Arc<Domain>, name: &str, key: &str) -> Result<ScalarField> {
        let profile = match Profile::from_str(name).map_err(|e| parse_error(key, e))? {
            Profile::File(p) if p.is_relative() => Profile::File(self.base_dir.join(p)),
            p => p,
        };
        profile.resolve(domain).map_err(|e| parse_error(key, format!("profile `{name}`: {e}")))
    }

    fn data(&self, domain: &Arc<Domain>, spec: &DataSpec, key: &str) -> Result<(ScalarField, ScalarField)> {
        let sum = |terms: &[ProfileTerm], comp: &str| -> Result<ScalarField> {
            let mut acc = ScalarField::zeros(domain.clone());
            for (i, t) in terms.iter().enumerate() {
                let f = self.profile(domain, &t.profile, &format!("{key}.{comp}[{i}].profile"))?;
                acc = acc.add(&f.scaled(t.amplitude))?;
            }
            Ok(acc)
        };
        Ok((sum(&spec.u, "u")?, sum(&spec.v, "v")?))
    }

    pub fn initial_data(&self, domain: &Arc<Domain>) -> Result<(ScalarField, ScalarField)> {
        self.data(domain, &self.initial_data, "initial_data")
    }

    fn tail_term(&self, domain: &Arc<Domain>, t: &TailSpec, key: &str) -> Result<TailTerm> {
        Ok(TailTerm { tail: t.envelope, profile: self.profile(domain, &t.profile, &format!("{key}.profile"))? })
    }

    pub fn forcing(&self, domain: &Arc<Domain>) -> Result<ForcingSpec> {
        let component = |c: &ComponentSpec, key: &str| -> Result<ComponentForcing> {
            let ap = c
                .ap
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let profile = self.profile(domain, &a.profile, &format!("{key}.ap[{i}].profile"))?;
                    Ok(ApTerm { sinusoids: a.sinusoids.clone(), profile })
                })
                .collect::<Result<Vec<_>>>()?;
            let tail = c.tail.as_ref().map(|t| self.tail_term(domain, t, &format!("{key}.tail"))).transpose()?;
            Ok(ComponentForcing { ap, tail })
        };
        let g = component(&self.forcing.g, "forcing.g")?;
        let h = component(&self.forcing.h, "forcing.h")?;
        ForcingSpec::new(domain.clone(), g, h, self.forcing.mean_zero_g).map_err(|e| parse_error("forcing", e))
    }

    /// Resolves everything that can fail before any experiment runs.
    fn prepare(&self, options: &RunOptions) -> Result<Prepared> {
        let domain = self.domain()?;
        let mut config = self.solver_config(&domain)?;
        if let Some(mode) = options.mode {
            config.mode = mode;
        }
        let (u0, v0) = self.initial_data(&domain)?;
        let forcing = self.forcing(&domain)?;
        for (i, e) in self.experiments.iter().enumerate() {
            let key = format!("experiments[{i}]");
            match e {
                Experiment::Stability { perturbation, .. } => {
                    self.data(&domain, perturbation, &format!("{key}.perturbation"))?;
                }
                Experiment::AapCheck { tail: Some(t), .. } => {
                    self.tail_term(&domain, t, &format!("{key}.tail"))?;
                }
                Experiment::AapCheck { epsilon: Some(eps), .. } if !(*eps > 0.0) => {
                    return Err(parse_error(&format!("{key}.epsilon"), "must be positive"));
                }
                Experiment::Gronwall { points, .. } if *points < 2 => {
                    return Err(parse_error(&format!("{key}.points"), "need at least 2 points"));
                }
                _ => {}
            }
        }
        if self.estimates.samples == 0 {
            return Err(parse_error("estimates.samples", "must be positive"));
        }
        Ok(Prepared { domain, config, u0, v0, forcing, seed: options.seed.unwrap_or(self.seed) })
    }
}

struct Prepared {
    domain: Arc<Domain>,
    config: SolverConfig,
    u0: ScalarField,
    v0: ScalarField,
    forcing: ForcingSpec,
    seed: u64,
}

/// Command-line overrides.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub mode: Option<CheckMode>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("reports"), seed: None, mode: None }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepOutcome {
    pub step: usize,
    pub kind: &'static str,
    pub pass: bool,
    pub error: Option<String>,
    pub files: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub schema: u32,
    pub name: String,
    pub seed: u64,
    pub mode: CheckMode,
    pub steps: Vec<StepOutcome>,
    pub pass: bool,
    #[serde(skip)]
    pub report_dir: PathBuf,
    /// Exit status of the failing step's error, if any.
    #[serde(skip)]
    pub error_exit_code: Option<i32>,
}

impl RunSummary {
    /// 0 when every gate passed, 1 on a gated failure or module error.
    pub fn exit_code(&self) -> i32 {
        match (self.pass, self.error_exit_code) {
            (_, Some(code)) => code,
            (true, None) => 0,
            (false, None) => 1,
        }
    }
}

impl Error {
    /// 2 for configuration and usage problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::ConfigParse { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Serialize)]
struct EstimateFile<'a> {
    reports: &'a [EstimateReport],
    constants: &'a SolverConstants,
    pass: bool,
}

#[derive(Serialize)]
struct SolveFile {
    nonlinear: bool,
    t_end: f64,
    h: f64,
    x_norm: f64,
    linear_bound: LinearBoundReport,
    picard: Option<PicardDiagnostics>,
    residual_ok: Option<bool>,
    contraction_ok: Option<bool>,
    /// X-distance between the solutions from the zero and the negated linear-response guesses.
    uniqueness_distance: Option<f64>,
    uniqueness_ok: Option<bool>,
    pass: bool,
}

#[derive(Serialize)]
struct TailComparison {
    envelope: Tail,
    tailed: AapReport,
    /// Largest distance on each quarter of the second half of the horizon.
    late_window_max: Vec<f64>,
    non_increasing: bool,
    final_distance: f64,
    final_ok: bool,
}

#[derive(Serialize)]
struct AapFile {
    epsilon: f64,
    transient_cut: f64,
    primary: AapReport,
    ladder: Vec<AapReport>,
    tail_comparison: Option<TailComparison>,
    pass: bool,
}

#[derive(Serialize)]
struct StabilityFile {
    report: StabilityReport,
    sigma_in_range: bool,
    /// Extremes of `d_full / d_half` on the fit window.
    halving_ratio_range: Option<(f64, f64)>,
    halving_ok: Option<bool>,
    pass: bool,
}

#[derive(Serialize)]
struct GronwallFile {
    reports: Vec<GronwallReport>,
    pass: bool,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    prep: Prepared,
    dir: PathBuf,
    constants: Option<SolverConstants>,
    solution: Option<TrajectoryState>,
}

impl Runner<'_> {
    fn constants(&mut self, files: &mut Vec<String>) -> Result<(SolverConstants, bool)> {
        if let Some(c) = &self.constants {
            return Ok((c.clone(), true));
        }
        let p = &self.prep;
        let (constants, reports) = measure_constants(&p.domain, p.config.p, self.scenario.estimates.samples, p.seed)?;
        let pass = reports.iter().all(|r| r.pass && r.slope_ok);
        self.write_json("estimate_report.json", &EstimateFile { reports: &reports, constants: &constants, pass }, files)?;
        self.constants = Some(constants.clone());
        Ok((constants, pass))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T, files: &mut Vec<String>) -> Result<()> {
        write_json(&self.dir.join(name), value)?;
        files.push(name.to_string());
        Ok(())
    }

    fn solve_with(&mut self, forcing: &ForcingSpec) -> Result<(TrajectoryState, Option<PicardDiagnostics>)> {
        let (constants, _) = self.constants(&mut Vec::new())?;
        let p = &self.prep;
        if p.config.chemotaxis {
            let (s, d) = picard_solve(&p.u0, &p.v0, forcing, &p.config, &constants)?;
            Ok((s, Some(d)))
        } else {
            Ok((solve_linear(&p.u0, &p.v0, None, forcing, &p.config)?, None))
        }
    }

    fn solution(&mut self) -> Result<TrajectoryState> {
        if let Some(s) = &self.solution {
            return Ok(s.clone());
        }
        let forcing = self.prep.forcing.clone();
        let (s, _) = self.solve_with(&forcing)?;
        self.solution = Some(s.clone());
        Ok(s)
    }

    fn run_step(&mut self, step: &Experiment, files: &mut Vec<String>) -> Result<bool> {
        match step {
            Experiment::VerifyEstimates => {
                self.constants = None;
                Ok(self.constants(files)?.1)
            }
            Experiment::Solve { uniqueness_check } => self.solve_step(*uniqueness_check, files),
            Experiment::AapCheck { epsilon, transient_cut, tail } => {
                self.aap_step(epsilon.unwrap_or(0.05), *transient_cut, tail.as_ref(), files)
            }
            Experiment::Stability { perturbation, halving_check } => {
                self.stability_step(perturbation, *halving_check, files)
            }
            Experiment::Gronwall { sigmas, t_end, points } => {
                self.gronwall_step(sigmas.as_deref(), *t_end, *points, files)
            }
        }
    }

    fn solve_step(&mut self, uniqueness_check: bool, files: &mut Vec<String>) -> Result<bool> {
        let (constants, _) = self.constants(files)?;
        let forcing = self.prep.forcing.clone();
        let (solution, diag) = self.solve_with(&forcing)?;
        let p = &self.prep;
        let nonlinear = diag.is_some();
        let source = nonlinear.then_some(&solution);
        let bound = linear_bound(&solution, &p.u0, &p.v0, source, &forcing, &constants, CheckMode::Warn)?;
        let (residual_ok, contraction_ok) = match &diag {
            Some(d) => (
                Some(d.residual <= RESIDUAL_GATE),
                Some(d.empirical_contraction <= d.constants.contraction_bound + CONTRACTION_SLACK),
            ),
            None => (None, None),
        };
        let (uniqueness_distance, uniqueness_ok) = if uniqueness_check && nonlinear {
            let guess = solve_linear(&p.u0, &p.v0, None, &forcing, &p.config)?.scaled(-1.0);
            let (other, _) = picard_solve_from(&p.u0, &p.v0, &forcing, &p.config, &constants, Some(&guess))?;
            let dist = x_norm(&other.difference(&solution)?)?;
            (Some(dist), Some(dist <= 10.0 * p.config.tolerance))
        } else {
            (None, None)
        };
        let pass = bound.holds
            && residual_ok.unwrap_or(true)
            && contraction_ok.unwrap_or(true)
            && uniqueness_ok.unwrap_or(true);
        solution.write_csv(&self.dir.join("trajectory.csv"))?;
        files.push("trajectory.csv".into());
        let report = SolveFile {
            nonlinear,
            t_end: solution.grid().end(),
            h: solution.grid().h(),
            x_norm: x_norm(&solution)?,
            linear_bound: bound,
            picard: diag,
            residual_ok,
            contraction_ok,
            uniqueness_distance,
            uniqueness_ok,
            pass,
        };
        self.write_json("solve_report.json", &report, files)?;
        self.solution = Some(solution);
        Ok(pass)
    }

    fn aap_step(&mut self, epsilon: f64, cut: Option<f64>, tail: Option<&TailSpec>, files: &mut Vec<String>) -> Result<bool> {
        let cut = cut.unwrap_or(5.0 / self.prep.domain.lambda1());
        let solution = self.solution()?;
        let signal = solution.norm_signal();
        let primary = verify_aap(&signal, epsilon, cut)?;
        let ladder = EPSILON_LADDER.iter().map(|e| verify_aap(&signal, *e, cut)).collect::<Result<Vec<_>>>()?;
        let tail_comparison = match tail {
            Some(t) => {
                let term = self.scenario.tail_term(&self.prep.domain, t, "tail")?;
                let forcing = self.prep.forcing.with_tail(Some(term), None)?;
                let (tailed, _) = self.solve_with(&forcing)?;
                let tailed_aap = verify_aap(&tailed.norm_signal(), epsilon, cut)?;
                let dist = distance_series(&tailed, &solution)?;
                let times = solution.grid().times();
                write_csv(
                    &self.dir.join("aap_tail_distance.csv"),
                    &["t", "distance"],
                    times.iter().zip(&dist).map(|(t, d)| vec![*t, *d]),
                )?;
                files.push("aap_tail_distance.csv".into());
                let late_window_max = late_window_maxima(&dist, 4);
                let non_increasing = late_window_max.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
                let final_distance = *dist.last().ok_or(Error::EmptyTrajectory)?;
                Some(TailComparison {
                    envelope: t.envelope,
                    tailed: tailed_aap,
                    late_window_max,
                    non_increasing,
                    final_distance,
                    final_ok: final_distance <= epsilon,
                })
            }
            None => None,
        };
        let pass = primary.is_aap
            && tail_comparison.as_ref().map_or(true, |c| c.tailed.is_aap && c.non_increasing && c.final_ok);
        self.write_json("aap_report.json", &AapFile { epsilon, transient_cut: cut, primary, ladder, tail_comparison, pass }, files)?;
        Ok(pass)
    }

    fn stability_step(&mut self, perturbation: &DataSpec, halving: bool, files: &mut Vec<String>) -> Result<bool> {
        let (constants, _) = self.constants(files)?;
        let (du, dv) = self.scenario.data(&self.prep.domain, perturbation, "perturbation")?;
        let p = &self.prep;
        let run = stability_experiment(&p.u0, &p.v0, (&du, &dv), &p.forcing, &p.config, &constants)?;
        let report = run.report;
        let l1 = report.lambda1;
        let sigma_in_range = report.sigma.is_some_and(|s| s >= SIGMA_FLOOR * l1 && s < SIGMA_CEILING * l1);
        let fit_ok = report.residual.is_some_and(|r| r <= crate::stability::RESIDUAL_THRESHOLD);

        let (halving_ratio_range, halving_ok) = if halving {
            let (u1, v1) = (p.u0.add(&du.scaled(0.5))?, p.v0.add(&dv.scaled(0.5))?);
            let (half, _) = picard_solve(&u1, &v1, &p.forcing, &p.config, &constants)?;
            let d_half = distance_series(&run.base, &half)?;
            let (lo, hi) = report
                .times
                .iter()
                .zip(report.distance.iter().zip(&d_half))
                .filter(|(t, _)| **t >= report.fit_window.0 && **t <= report.fit_window.1)
                .map(|(_, (full, half))| full / half)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
            let ok = lo.is_finite() && lo >= 2.0 * (1.0 - HALVING_TOLERANCE) && hi <= 2.0 * (1.0 + HALVING_TOLERANCE);
            (Some((lo, hi)), Some(ok))
        } else {
            (None, None)
        };
        write_csv(
            &self.dir.join("stability_distance.csv"),
            &["t", "distance"],
            report.times.iter().zip(&report.distance).map(|(t, d)| vec![*t, *d]),
        )?;
        files.push("stability_distance.csv".into());
        let pass = sigma_in_range && fit_ok && halving_ok.unwrap_or(true);
        let file = StabilityFile { report, sigma_in_range, halving_ratio_range, halving_ok, pass };
        self.write_json("stability_report.json", &file, files)?;
        Ok(pass)
    }

    fn gronwall_step(&mut self, sigmas: Option<&[f64]>, t_end: Option<f64>, points: usize, files: &mut Vec<String>) -> Result<bool> {
        let l1 = self.prep.domain.lambda1();
        let sigmas = sigmas.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.25 * l1, 0.5 * l1, 0.75 * l1]);
        let t_end = t_end.unwrap_or(self.prep.config.t_end);
        let grid: Vec<f64> = (0..points).map(|i| t_end * i as f64 / (points - 1) as f64).collect();
        let (n, p) = (self.prep.domain.dimension(), self.prep.config.p);
        let reports = sigmas.iter().map(|s| gronwall_integrals(l1, *s, n, p, &grid)).collect::<Result<Vec<_>>>()?;
        let rows = reports.iter().flat_map(|r| {
            (0..r.t_grid.len()).map(move |i| vec![r.sigma, r.t_grid[i], r.i1[i], r.i2[i], r.b1, r.b2])
        });
        write_csv(&self.dir.join("gronwall.csv"), &["sigma", "t", "i1", "i2", "b1", "b2"], rows)?;
        files.push("gronwall.csv".into());
        let pass = reports.iter().all(|r| r.pass);
        self.write_json("gronwall_report.json", &GronwallFile { reports, pass }, files)?;
        Ok(pass)
    }
}

/// Maxima of `series` over `count` equal windows covering its second half.
fn late_window_maxima(series: &[f64], count: usize) -> Vec<f64> {
    let start = series.len() / 2;
    let late = &series[start..];
    let chunk = (late.len() / count).max(1);
    (0..count)
        .map(|k| {
            let a = (k * chunk).min(late.len());
            let b = if k + 1 == count { late.len() } else { ((k + 1) * chunk).min(late.len()) };
            late[a..b].iter().copied().fold(0.0, f64::max)
        })
        .collect()
}

fn execute(scenario: &Scenario, options: &RunOptions, steps: &[Experiment]) -> Result<RunSummary> {
    let prep = scenario.prepare(options)?;
    let dir = options.out_dir.join(&scenario.name);
    std::fs::create_dir_all(&dir)?;
    let (seed, mode) = (prep.seed, prep.config.mode);
    let mut runner = Runner { scenario, prep, dir: dir.clone(), constants: None, solution: None };
    let mut outcomes = Vec::new();
    let mut error_exit_code = None;
    for (i, step) in steps.iter().enumerate() {
        let mut files = Vec::new();
        let (pass, error) = match runner.run_step(step, &mut files) {
            Ok(pass) => (pass, None),
            Err(e) => {
                error_exit_code = Some(e.exit_code());
                (false, Some(e.to_string()))
            }
        };
        log::info!("step {} {}: {}", i + 1, step.label(), if pass { "pass" } else { "FAIL" });
        outcomes.push(StepOutcome { step: i + 1, kind: step.label(), pass, error, files });
        if error_exit_code.is_some() {
            break;
        }
    }
    let pass = error_exit_code.is_none() && outcomes.iter().all(|o| o.pass);
    let summary = RunSummary {
        schema: SCHEMA_VERSION,
        name: scenario.name.clone(),
        seed,
        mode,
        steps: outcomes,
        pass,
        report_dir: dir.clone(),
        error_exit_code,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Runs every experiment of the scenario in order.
///
/// Configuration errors are returned before any report is written; errors
/// inside a step stop the run and are recorded in the summary.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunSummary> {
    execute(scenario, options, &scenario.experiments)
}

/// Runs only the estimate verification of the scenario.
pub fn verify_scenario(scenario: &Scenario, options: &RunOptions) -> Result<RunSummary> {
    execute(scenario, options, &[Experiment::VerifyEstimates])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"schema": 1, "name": "t", "domain": {{"lengths": ["pi", 3.0], "resolution": [16, 16]}},
               "experiments": [{{"kind": "gronwall", "points": 5}}] {extra}}}"#
        )
    }

    #[test]
    fn lengths_accept_multiples_of_pi() {
        let pi = std::f64::consts::PI;
        for (s, v) in [("pi", pi), ("2pi", 2.0 * pi), ("0.5*pi", 0.5 * pi), ("1.5", 1.5)] {
            assert!((Length::Expr(s.into()).value().unwrap() - v).abs() < 1e-15);
        }
        assert!(Length::Expr("tau".into()).value().is_err());
    }

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_json_str(&minimal(""), Path::new(".")).unwrap();
        assert_eq!(s.p, 4.0);
        assert!(s.forcing.mean_zero_g);
        let d = s.domain().unwrap();
        assert_eq!(d.dimension(), 2);
        let cfg = s.solver_config(&d).unwrap();
        assert_eq!(cfg.mode, CheckMode::Strict);
    }

    #[test]
    fn errors_name_the_key() {
        let key = |text: &str| match Scenario::from_json_str(text, Path::new(".")) {
            Err(Error::ConfigParse { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key(&minimal(r#", "solver": {"h": "x"}"#)), "solver.h");
        assert_eq!(key(&minimal(r#", "bogus": 1"#)), "bogus");
        assert_eq!(key(&minimal("").replace(r#""schema": 1"#, r#""schema": 2"#)), "schema");
        let s = Scenario::from_json_str(
            &minimal(r#", "initial_data": {"u": [{"profile": "no_such_profile", "amplitude": 1}]}"#),
            Path::new("."),
        )
        .unwrap();
        let err = s.prepare(&RunOptions::default()).err().unwrap();
        assert!(matches!(&err, Error::ConfigParse { key, .. } if key == "initial_data.u[0].profile"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn late_windows() {
        let s: Vec<f64> = (0..100).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let m = late_window_maxima(&s, 4);
        assert_eq!(m.len(), 4);
        assert!(m.windows(2).all(|w| w[1] <= w[0]));
    }
}
