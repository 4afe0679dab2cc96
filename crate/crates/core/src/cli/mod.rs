//! Command-line surface: argument parsing, the five commands, and their
//! reports.
//!
//! Exit codes are 0 on success, 1 for usage, configuration, and I/O errors,
//! and 2 when a verification certificate fails.

pub mod render;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::dynamics::{
    basin_survey, expansion_probe, restrict_map, restricted_critical_set, restricted_superattractors,
    verify_critical_factorization, verify_invariant_form, verify_invariant_hyperplane, verify_superattracting,
    CriticalFactorization, CriticalSet, Invariance, ProbeParams, Superattraction, SurveyParams,
};
use crate::error::Error;
use crate::map::{build_equivariant_map, check_dimension, MAX_EXACT_DET_K};
use crate::symmetry::{
    check_equivariance_group, enumerate_superattractors, flat_from_hyperplanes, generate_group, hyperplane_arrangement,
    hyperplanes_through, Equivariance, GroupElement, Hyperplane,
};
use render::{render_slice, SliceSpec, Window};
use report::{
    map_json, point_json, BasinsJson, Certificate, CriticalJson, ProbeJson, RestrictJson, VerifyReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CERTIFICATE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "equidyn", version, about = "Symmetric critically finite maps of complex projective space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Dimension of the projective space.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Number of random samples (basins, probe).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "max-iter", global = true)]
    pub max_iter: Option<usize>,
    /// Capture tolerance in chordal distance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Exclusion radius around the critical set (probe).
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Orbit length (probe).
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Output file; JSON goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Two points spanning the rendered line, e.g. "1,0,0;0,1,1".
    #[arg(long, global = true)]
    pub anchors: Option<String>,
    /// Parameter window "re_min,re_max,im_min,im_max".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub window: Option<String>,
    /// Image size "WxH".
    #[arg(long, global = true)]
    pub res: Option<String>,
    /// Hyperplanes cutting out a flat, e.g. "c:1,d:2,3".
    #[arg(long, global = true)]
    pub hyperplanes: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write a PNG next to the PPM (render).
    #[arg(long, global = true)]
    pub png: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the exact certificate suite for the map on P^k.
    Verify,
    /// Monte Carlo survey of the superattracting basins.
    Basins,
    /// Restrict the map to a flat of the arrangement.
    Restrict,
    /// Expansion probe on orbits avoiding the critical set.
    Probe,
    /// Render basins on a complex line to PPM.
    Render,
}

/// Validated parameters of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub sample_count: usize,
    pub capture_tol: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub output_path: Option<PathBuf>,
    pub render: SliceSpec,
    pub hyperplanes: Vec<Hyperplane>,
    pub threads: Option<usize>,
    pub png: bool,
}

pub const DEFAULT_RENDER_MAX_ITER: usize = 1000;
pub const DEFAULT_RENDER_PATH: &str = "basins.ppm";

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> CliResult<RunConfig> {
        check_dimension(cli.k)?;
        let survey = SurveyParams::default();
        let probe = ProbeParams::default();
        let default_iter = if cli.command == Command::Render { DEFAULT_RENDER_MAX_ITER } else { survey.max_iter };
        let mut spec = SliceSpec::default_for(cli.k);
        if let Some(a) = &cli.anchors {
            spec.anchors = SliceSpec::parse_anchors(a)?;
        }
        if let Some(w) = &cli.window {
            spec.window = Window::parse(w)?;
        }
        if let Some(r) = &cli.res {
            (spec.width, spec.height) = SliceSpec::parse_resolution(r)?;
        }
        if cli.command == Command::Render {
            spec.validate(cli.k)?;
        }
        let hyperplanes = match &cli.hyperplanes {
            Some(s) => Hyperplane::parse_list(s)?,
            None => Vec::new(),
        };
        let cfg = RunConfig {
            command: cli.command,
            k: cli.k,
            seed: cli.seed,
            max_iter: cli.max_iter.unwrap_or(default_iter),
            sample_count: cli.samples.unwrap_or(survey.sample_count),
            capture_tol: cli.tol.unwrap_or(survey.capture_tol),
            delta: cli.delta.unwrap_or(probe.delta),
            n_steps: cli.steps.unwrap_or(probe.n_steps),
            output_path: cli.out.clone(),
            render: spec,
            hyperplanes,
            threads: cli.threads,
            png: cli.png,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        let positive = [
            ("--samples", self.sample_count as f64),
            ("--max-iter", self.max_iter as f64),
            ("--tol", self.capture_tol),
            ("--delta", self.delta),
            ("--steps", self.n_steps as f64),
            ("--threads", self.threads.unwrap_or(1) as f64),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.command == Command::Restrict && self.hyperplanes.is_empty() {
            return Err(CliError::Config("restrict needs --hyperplanes".into()));
        }
        Ok(())
    }
}

/// Parses `args`, runs the command, and returns the process exit code.
/// Diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match RunConfig::from_cli(&cli).and_then(|cfg| run(&cfg)) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CERTIFICATE,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs a validated configuration. `Ok(false)` means a certificate failed.
pub fn run(cfg: &RunConfig) -> CliResult<bool> {
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| dispatch(cfg)),
        None => dispatch(cfg),
    }
}

fn dispatch(cfg: &RunConfig) -> CliResult<bool> {
    match cfg.command {
        Command::Verify => cmd_verify(cfg),
        Command::Basins => cmd_basins(cfg).map(|_| true),
        Command::Restrict => cmd_restrict(cfg),
        Command::Probe => cmd_probe(cfg).map(|_| true),
        Command::Render => cmd_render(cfg).map(|_| true),
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64() * 1e3)
}

fn cert(name: &str, subject: impl ToString, passed: bool, detail: String, millis: f64) -> Certificate {
    Certificate { name: name.into(), subject: subject.to_string(), passed, detail, millis }
}

/// Generator word, `s_i` for adjacent swaps and `T` for the extra generator.
pub fn word_name(e: &GroupElement, k: usize) -> String {
    if e.word.is_empty() {
        return "id".into();
    }
    e.word
        .iter()
        .map(|&g| if g < k { format!("s{}", g + 1) } else { "T".into() })
        .collect::<Vec<_>>()
        .join(" ")
}

fn invariance_detail(inv: &Invariance) -> String {
    match inv {
        Invariance::Holds { quotient_degree } => format!("divisible, quotient degree {quotient_degree}"),
        Invariance::Collapses => "pullback vanishes identically".into(),
        Invariance::Fails { remainder } => format!("remainder {remainder}"),
    }
}

fn superattraction_detail(s: &Superattraction) -> String {
    match s {
        Superattraction::Holds => "fixed, chart derivative zero".into(),
        Superattraction::NotFixed { image } => format!("maps to {image}"),
        Superattraction::NonzeroDerivative { row, col, value } => {
            format!("chart derivative entry ({row}, {col}) = {value}")
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> CliResult<bool> {
    let k = cfg.k;
    let map = build_equivariant_map(k)?;
    let mut certificates = Vec::new();

    let (group, ms) = timed(|| generate_group(k));
    let group = group?;
    let order: usize = (1..=k + 2).product();
    certificates.push(cert(
        "group_order",
        format!("S_{}", k + 2),
        group.len() == order,
        format!("{} elements, expected {order}", group.len()),
        ms,
    ));
    for (e, (res, elapsed)) in group.iter().zip(check_equivariance_group(&map, &group)?) {
        let ms = elapsed.as_secs_f64() * 1e3;
        let (passed, detail) = match res {
            Equivariance::Holds { scalar } => (true, format!("scalar {scalar}")),
            Equivariance::Fails { component, monomial, composed, conjugated } => (
                false,
                format!("component {component}, monomial {monomial:?}: {composed} vs {conjugated}"),
            ),
        };
        certificates.push(cert("equivariance", word_name(e, k), passed, detail, ms));
    }

    let arrangement = hyperplane_arrangement(k);
    for &h in &arrangement {
        let (res, ms) = timed(|| verify_invariant_hyperplane(&map, h));
        let res = res?;
        certificates.push(cert("hyperplane_invariance", h, res.holds(), invariance_detail(&res), ms));
    }

    let covectors: Vec<Vec<i64>> = arrangement.iter().map(|h| h.covector(k)).collect();
    let (res, ms) = timed(|| verify_critical_factorization(&map, &covectors));
    let res = res?;
    let detail = match &res {
        CriticalFactorization::Exact { constant } => format!("exact: det = {constant} * product of squared forms"),
        CriticalFactorization::Numeric { fits } => {
            let lo = fits.iter().map(|f| f.min_exponent).fold(f64::INFINITY, f64::min);
            let hi = fits.iter().map(|f| f.max_exponent).fold(f64::NEG_INFINITY, f64::max);
            format!("numeric: vanishing orders in [{lo:.4}, {hi:.4}]")
        }
        CriticalFactorization::Fails { reason } => reason.clone(),
    };
    certificates.push(cert("critical_factorization", "all hyperplanes", res.holds(), detail, ms));

    let attractors = enumerate_superattractors(k);
    let expected = (1usize << (k + 1)) - 1;
    certificates.push(cert(
        "superattractor_count",
        "0/1 points",
        attractors.len() == expected,
        format!("{} points, expected {expected}", attractors.len()),
        0.0,
    ));
    for p in &attractors {
        let (res, ms) = timed(|| -> CliResult<(bool, String)> {
            let isolated = flat_from_hyperplanes(k, &hyperplanes_through(k, p))?.m == 0;
            let s = verify_superattracting(&map, p)?;
            let mut detail = superattraction_detail(&s);
            if !isolated {
                detail.push_str("; not cut out by the arrangement");
            }
            Ok((isolated && s.holds(), detail))
        });
        let (passed, detail) = res?;
        certificates.push(cert("superattracting", p, passed, detail, ms));
    }

    let all_passed = certificates.iter().all(|c| c.passed);
    let report = VerifyReport {
        k,
        degree: map.degree(),
        group_elements: group.len(),
        hyperplanes: arrangement.iter().map(ToString::to_string).collect(),
        attractors: attractors.iter().map(point_json).collect(),
        certificates,
        all_passed,
    };
    emit(&report, cfg.output_path.as_deref())?;
    Ok(all_passed)
}

pub fn cmd_basins(cfg: &RunConfig) -> CliResult<BasinsJson> {
    let map = build_equivariant_map(cfg.k)?;
    let params = SurveyParams {
        sample_count: cfg.sample_count,
        seed: cfg.seed,
        max_iter: cfg.max_iter,
        capture_tol: cfg.capture_tol,
    };
    let report = BasinsJson::from(&basin_survey(&map, params)?);
    emit(&report, cfg.output_path.as_deref())?;
    Ok(report)
}

pub fn cmd_probe(cfg: &RunConfig) -> CliResult<ProbeJson> {
    let map = build_equivariant_map(cfg.k)?;
    let critical = CriticalSet::from_hyperplanes(cfg.k, &hyperplane_arrangement(cfg.k));
    let params = ProbeParams {
        sample_count: cfg.sample_count,
        seed: cfg.seed,
        n_steps: cfg.n_steps,
        delta: cfg.delta,
    };
    let report = ProbeJson::from(&expansion_probe(&map.to_float(), &critical, params)?);
    emit(&report, cfg.output_path.as_deref())?;
    Ok(report)
}

pub fn cmd_restrict(cfg: &RunConfig) -> CliResult<bool> {
    let k = cfg.k;
    let map = build_equivariant_map(k)?;
    let flat = flat_from_hyperplanes(k, &cfg.hyperplanes)?;
    let (r, ms) = timed(|| restrict_map(&map, &flat));
    let r = r?;
    let m = flat.m;
    let mut certificates = vec![cert(
        "restriction_identity",
        "map o E = c P (E o restricted)",
        true,
        format!("c = {}", r.identity_scalar),
        ms,
    )];

    let induced = flat.induced_forms();
    if m >= 1 {
        for (form, ambient) in &induced {
            let (res, ms) = timed(|| verify_invariant_form(&r.map, form));
            let res = res?;
            let subject = format!("{form:?} from {}", join(ambient));
            certificates.push(cert("hyperplane_invariance", subject, res.holds(), invariance_detail(&res), ms));
        }
    }

    let mut critical_set = Vec::new();
    let mut in_arrangement = None;
    if (1..=MAX_EXACT_DET_K).contains(&m) {
        let (crit, ms) = timed(|| restricted_critical_set(&r));
        let crit = crit?;
        let inside = crit.contained_in_arrangement();
        in_arrangement = Some(inside);
        certificates.push(cert(
            "critical_set_in_arrangement",
            "induced forms",
            inside,
            format!("residual factor {}", crit.residual),
            ms,
        ));
        critical_set = crit
            .components
            .iter()
            .map(|c| CriticalJson {
                form: c.form.clone(),
                ambient: c.ambient.iter().map(ToString::to_string).collect(),
                multiplicity: c.multiplicity,
                point: c.point.as_ref().map(point_json),
            })
            .collect();
    }

    let (sa, ms) = timed(|| restricted_superattractors(&r));
    let sa = sa?;
    let each = ms / sa.len().max(1) as f64;
    for (ambient, local, status) in &sa {
        let detail = format!("flat coordinates {local}: {}", superattraction_detail(status));
        certificates.push(cert("superattracting", ambient, status.holds(), detail, each));
    }

    let all_passed = certificates.iter().all(|c| c.passed);
    let family_degree = m as u32 + 3;
    let report = RestrictJson {
        k,
        hyperplanes: flat.hyperplanes.iter().map(ToString::to_string).collect(),
        flat_dimension: m,
        embedding: flat.embedding.to_rows(),
        degree: r.map.degree(),
        components: map_json(&r.map),
        stripped_forms: r.stripped.clone(),
        critical_set,
        critical_set_in_arrangement: in_arrangement,
        family_degree,
        not_conjugate_to_family: r.map.degree() != family_degree,
        certificates,
        all_passed,
    };
    emit(&report, cfg.output_path.as_deref())?;
    Ok(all_passed)
}

fn join(hs: &[Hyperplane]) -> String {
    hs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

pub fn cmd_render(cfg: &RunConfig) -> CliResult<render::Render> {
    let map = build_equivariant_map(cfg.k)?;
    let out = cfg.output_path.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_RENDER_PATH));
    let r = render_slice(&map, &cfg.render, cfg.max_iter, cfg.capture_tol)?;
    r.image.write_ppm(&out).map_err(|source| CliError::Io { path: out.clone(), source })?;
    if cfg.png {
        let png = out.with_extension("png");
        r.image.write_png(&png).map_err(|e| CliError::Io {
            path: png.clone(),
            source: std::io::Error::other(e),
        })?;
    }
    Ok(r)
}
