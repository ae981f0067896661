//! Command-line front end: `darboux spectrum|transform|diagnose|reproduce`.

use crate::config::{rectangle, RunConfig, Task};
use crate::error::{Error, Result};
use crate::jordan::{diagnose_level_unchecked, is_diagonalizable, JordanReport};
use crate::potential::Potential;
use crate::scenario::{reproduce_scenario, Bound, ScenarioReport};
use crate::spectrum::{find_complex_spectrum, find_real_spectrum, SpectrumReport};
use crate::wave::WaveSolution;
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

type C64 = Complex64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CHECKS: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "darboux", version, about = "Darboux transformations, Dirichlet spectra and Jordan chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dirichlet levels in a real window or a complex rectangle.
    Spectrum(RunArgs),
    /// Apply the configured transformation steps.
    Transform(RunArgs),
    /// Multiplicities and chains at a level or over a rectangle.
    Diagnose(RunArgs),
    /// Run a worked-example scenario and its checks.
    Reproduce(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Relative ODE tolerance; the absolute one is set 100 times smaller.
    #[arg(long = "tol-ode")]
    pub tol_ode: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl Command {
    fn parts(&self) -> (Task, &RunArgs) {
        match self {
            Command::Spectrum(a) => (Task::Spectrum, a),
            Command::Transform(a) => (Task::Transform, a),
            Command::Diagnose(a) => (Task::Diagnose, a),
            Command::Reproduce(a) => (Task::Reproduce, a),
        }
    }
}

/// An error tagged with the stage that raised it.
#[derive(Debug)]
pub struct Failure {
    pub stage: &'static str,
    pub error: Error,
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        if self.error.is_config() {
            EXIT_CONFIG
        } else {
            EXIT_NUMERIC
        }
    }
}

fn at<T>(stage: &'static str, r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(|error| Failure { stage, error })
}

/// Parse the arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    run(&cli.command)
}

pub fn run(command: &Command) -> i32 {
    match execute(command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECKS,
        Err(f) => {
            eprintln!("error [{}]: {}", f.stage, f.error);
            f.exit_code()
        }
    }
}

/// Run one command; `Ok(false)` means a reproduce check failed.
pub fn execute(command: &Command) -> std::result::Result<bool, Failure> {
    let (task, args) = command.parts();
    let raw = at(
        "config",
        fs::read(&args.config).map_err(|e| Error::Config(format!("cannot read {}: {e}", args.config.display()))),
    )?;
    let text = at(
        "config",
        String::from_utf8(raw.clone()).map_err(|_| Error::Config("config is not UTF-8".into())),
    )?;
    let mut config = at("config", RunConfig::parse(&text))?;
    if config.task != task {
        return Err(Failure {
            stage: "config",
            error: Error::Config(format!(
                "config task is {:?} but the command is {:?}",
                config.task.name(),
                task.name()
            )),
        });
    }
    if let Some(t) = args.tol_ode {
        config.tolerances.rtol = t;
        config.tolerances.atol = t * 1e-2;
    }
    if let Some(n) = args.grid {
        config.interval.n_nodes = n;
    }
    let base_dir = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    if let Some(pc) = config.potential.as_mut() {
        if let Some(p) = pc.path.as_mut() {
            let full = base_dir.join(&*p);
            *p = full.canonicalize().unwrap_or(full);
        }
    }
    at("config", config.validate())?;

    let meta = Meta {
        command: task.name(),
        sha: hex::encode(Sha256::digest(&raw)),
        rtol: config.tolerances.rtol,
        atol: config.tolerances.atol,
        n_nodes: config.interval.n_nodes,
    };
    at("output", fs::create_dir_all(&args.out).map_err(Error::from))?;
    at("output", write_provenance(&args.out, &meta, &config))?;

    match task {
        Task::Spectrum => cmd_spectrum(&config, &base_dir, &args.out, &meta).map(|_| true),
        Task::Transform => cmd_transform(&config, &base_dir, &args.out, &meta).map(|_| true),
        Task::Diagnose => cmd_diagnose(&config, &base_dir, &args.out, &meta).map(|_| true),
        Task::Reproduce => cmd_reproduce(&config, &args.out, &meta),
    }
}

/// Header data embedded in every output file.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: &'static str,
    pub sha: String,
    pub rtol: f64,
    pub atol: f64,
    pub n_nodes: usize,
}

impl Meta {
    fn header(&self) -> String {
        format!(
            "# darboux {} {}\n# config_sha256 = {}\n# rtol = {:e}, atol = {:e}, n_nodes = {}\n",
            self.command,
            env!("CARGO_PKG_VERSION"),
            self.sha,
            self.rtol,
            self.atol,
            self.n_nodes
        )
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(Error::from)
}

/// `#` header, `#`-prefixed column line, comma-separated rows.
fn write_table(path: &Path, meta: &Meta, comments: &[String], columns: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = meta.header();
    for c in comments {
        let _ = writeln!(s, "# {c}");
    }
    let _ = writeln!(s, "# {}", columns.join(","));
    for r in rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    write_file(path, &s)
}

fn write_provenance(out: &Path, meta: &Meta, config: &RunConfig) -> Result<()> {
    let mut s = meta.header();
    s.push_str("# effective configuration, defaults included; rerun with --config on this file\n");
    s.push_str(&config.to_toml());
    write_file(&out.join("provenance.toml"), &s)
}

fn write_samples(path: &Path, meta: &Meta, what: &str, xs: &[f64], values: &[C64]) -> Result<()> {
    let rows: Vec<Vec<String>> = xs
        .iter()
        .zip(values)
        .map(|(x, v)| vec![num(*x), num(v.re), num(v.im)])
        .collect();
    let re = format!("re_{what}");
    let im = format!("im_{what}");
    write_table(path, meta, &[], &["x", &re, &im], &rows)
}

fn write_potential(path: &Path, meta: &Meta, v: &Potential) -> Result<()> {
    write_samples(path, meta, "V", &v.interval().nodes(), &v.sample())
}

fn write_wave(path: &Path, meta: &Meta, w: &WaveSolution) -> Result<()> {
    write_samples(path, meta, "psi", &w.interval.nodes(), &w.values)
}

fn write_spectrum(path: &Path, meta: &Meta, s: &SpectrumReport) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .levels
        .iter()
        .map(|l| {
            vec![
                num(l.energy.re),
                num(l.energy.im),
                l.algebraic_multiplicity.to_string(),
                num(l.d_abs),
                l.node_count.map(|n| n.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let comments: Vec<String> = s.warnings.iter().map(|w| format!("warning: {w}")).collect();
    write_table(
        path,
        meta,
        &comments,
        &["re_E", "im_E", "algebraic_multiplicity", "abs_D", "node_count"],
        &rows,
    )
}

fn cmd_spectrum(config: &RunConfig, base_dir: &Path, out: &Path, meta: &Meta) -> std::result::Result<(), Failure> {
    let v = at("potential", config.final_potential(base_dir))?;
    let s = match (config.spectrum.rectangle, config.spectrum.window) {
        (Some(r), _) => at("spectrum", find_complex_spectrum(&v, &at("config", rectangle(r))?))?,
        (None, Some([lo, hi])) => at("spectrum", find_real_spectrum(&v, lo, hi))?,
        (None, None) => unreachable!("validated"),
    };
    at("output", write_spectrum(&out.join("spectrum.csv"), meta, &s))?;
    if config.spectrum.eigenfunctions {
        for (k, l) in s.levels.iter().enumerate() {
            at(
                "output",
                write_wave(&out.join(format!("eigenfunction_{}.csv", k + 1)), meta, &l.eigenfunction),
            )?;
        }
    }
    for l in &s.levels {
        println!(
            "E = {:.12} {:+.3e}i  multiplicity {}",
            l.energy.re, l.energy.im, l.algebraic_multiplicity
        );
    }
    println!("{} level(s)", s.levels.len());
    Ok(())
}

fn cmd_transform(config: &RunConfig, base_dir: &Path, out: &Path, meta: &Meta) -> std::result::Result<(), Failure> {
    let base = at("potential", config.base_potential(base_dir))?;
    at("output", write_potential(&out.join("potential_0.csv"), meta, &base))?;
    let energies: Vec<C64> = config.transform.intertwining_energies.iter().map(|z| z.value()).collect();
    let steps = &config.potential.as_ref().expect("validated").steps;
    let mut current = base;
    let mut rows = Vec::new();
    for (k, step) in steps.iter().enumerate() {
        let r = at("transform", crate::darboux::transform(&current, &step.spec()))?;
        let g = r.potential.interval();
        at(
            "output",
            write_potential(&out.join(format!("potential_{}.csv", k + 1)), meta, &r.potential),
        )?;
        at(
            "output",
            write_samples(
                &out.join(format!("wronskian_{}.csv", k + 1)),
                meta,
                "W",
                &g.nodes(),
                &r.wronskian,
            ),
        )?;
        let inter = at("intertwining", r.verify_intertwining(&energies))?;
        rows.push(vec![
            (k + 1).to_string(),
            num(r.alpha1.re),
            num(r.alpha1.im),
            num(r.alpha2.re),
            num(r.alpha2.im),
            r.nodeless.to_string(),
            num(inter.max()),
        ]);
        println!(
            "step {}: alpha1 = {}, alpha2 = {}, nodeless W, intertwining residual {:.3e}",
            k + 1,
            r.alpha1,
            r.alpha2,
            inter.max()
        );
        current = r.potential;
    }
    at(
        "output",
        write_table(
            &out.join("transform.csv"),
            meta,
            &[],
            &[
                "step",
                "re_alpha1",
                "im_alpha1",
                "re_alpha2",
                "im_alpha2",
                "nodeless",
                "max_intertwining_residual",
            ],
            &rows,
        ),
    )?;
    Ok(())
}

fn jordan_text(reports: &[JordanReport], diagonalizable: Option<bool>) -> String {
    let mut s = String::new();
    if let Some(d) = diagonalizable {
        let _ = writeln!(s, "diagonalizable = {d}");
    }
    for (k, r) in reports.iter().enumerate() {
        let _ = writeln!(s, "\n[level {}]", k + 1);
        let _ = writeln!(s, "energy = [{}, {}]", num(r.energy.re), num(r.energy.im));
        let _ = writeln!(s, "algebraic_multiplicity = {}", r.algebraic_multiplicity);
        let _ = writeln!(s, "geometric_multiplicity = {}", r.geometric_multiplicity);
        let _ = writeln!(s, "chain_length = {}", r.chain.len());
        let _ = writeln!(s, "nilpotency = {}", num(r.nilpotency.value));
        let _ = writeln!(s, "nilpotency_power = {}", r.nilpotency.power);
        let _ = writeln!(s, "nilpotency_stride = {}", r.nilpotency.stride);
        let _ = writeln!(
            s,
            "nilpotency_span = [{}, {}]",
            num(r.nilpotency.span.0),
            num(r.nilpotency.span.1)
        );
        if let Some(d) = r.inhomogeneous {
            let _ = writeln!(s, "inhomogeneous_agreement = {}", num(d));
        }
        if let Some(d) = r.upstream {
            let _ = writeln!(s, "upstream_agreement = {}", num(d));
        }
        let _ = writeln!(s, "# member, residual, boundary_a, boundary_b");
        for (j, (res, (ba, bb))) in r.residuals.iter().zip(&r.boundary_residuals).enumerate() {
            let _ = writeln!(s, "member_{j} = [{}, {}, {}]", num(*res), num(*ba), num(*bb));
        }
    }
    s
}

fn cmd_diagnose(config: &RunConfig, base_dir: &Path, out: &Path, meta: &Meta) -> std::result::Result<(), Failure> {
    let v = at("potential", config.final_potential(base_dir))?;
    let (reports, diag) = match (config.diagnose.rectangle, config.diagnose.energy) {
        (Some(r), _) => {
            let d = at("diagnose", is_diagonalizable(&v, &at("config", rectangle(r))?))?;
            (d.levels, Some(d.diagonalizable))
        }
        (None, Some(e)) => (vec![at("diagnose", diagnose_level_unchecked(&v, e.value()))?], None),
        (None, None) => unreachable!("validated"),
    };
    let mut text = meta.header();
    text.push_str(&jordan_text(&reports, diag));
    at("output", write_file(&out.join("jordan.txt"), &text))?;
    let mut rows = Vec::new();
    for (k, r) in reports.iter().enumerate() {
        for (j, member) in r.chain.iter().enumerate() {
            at(
                "output",
                write_wave(&out.join(format!("chain_{}_{}.csv", k + 1, j)), meta, member),
            )?;
            let (ba, bb) = r.boundary_residuals[j];
            rows.push(vec![
                (k + 1).to_string(),
                num(r.energy.re),
                num(r.energy.im),
                r.algebraic_multiplicity.to_string(),
                r.geometric_multiplicity.to_string(),
                j.to_string(),
                num(r.residuals[j]),
                num(ba),
                num(bb),
            ]);
        }
        println!(
            "E = {:.12} {:+.3e}i  algebraic {} geometric {}  max chain residual {:.3e}",
            r.energy.re,
            r.energy.im,
            r.algebraic_multiplicity,
            r.geometric_multiplicity,
            r.max_residual()
        );
    }
    at(
        "output",
        write_table(
            &out.join("jordan.csv"),
            meta,
            &[],
            &[
                "level",
                "re_E",
                "im_E",
                "algebraic_multiplicity",
                "geometric_multiplicity",
                "member",
                "residual",
                "boundary_a",
                "boundary_b",
            ],
            &rows,
        ),
    )?;
    Ok(())
}

fn file_tag(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn bound_text(b: Bound) -> &'static str {
    match b {
        Bound::AtMost => "<=",
        Bound::AtLeast => ">=",
        Bound::Equals => "==",
    }
}

fn cmd_reproduce(config: &RunConfig, out: &Path, meta: &Meta) -> std::result::Result<bool, Failure> {
    let scenario = at("config", config.scenario())?;
    let g = at("config", config.interval())?;
    let report = at("scenario", reproduce_scenario(&scenario, g))?;
    at("output", write_scenario(out, meta, &report))?;
    for c in &report.checks {
        println!(
            "{} {}: {:.3e} {} {:.1e}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            bound_text(c.bound),
            c.threshold
        );
    }
    for f in &report.failures {
        println!("FAIL stage {}: {}", f.stage, f.message);
    }
    println!("{}: {}", scenario, if report.passed() { "pass" } else { "fail" });
    Ok(report.passed())
}

pub fn write_scenario(out: &Path, meta: &Meta, report: &ScenarioReport) -> Result<()> {
    let rows: Vec<Vec<String>> = report
        .checks
        .iter()
        .map(|c| {
            vec![
                c.name.replace(',', ";"),
                num(c.value),
                bound_text(c.bound).into(),
                num(c.threshold),
                if c.passed { "pass" } else { "fail" }.into(),
            ]
        })
        .collect();
    let mut comments = vec![format!("scenario {}", report.scenario)];
    for f in &report.failures {
        comments.push(format!("stage failure [{}]: {}", f.stage, f.message));
    }
    for (k, v) in &report.notes {
        comments.push(format!("{k}: {v}"));
    }
    write_table(
        &out.join("checks.csv"),
        meta,
        &comments,
        &["check", "value", "bound", "threshold", "result"],
        &rows,
    )?;
    for (name, v) in &report.potentials {
        write_potential(&out.join(format!("potential_{}.csv", file_tag(name))), meta, v)?;
    }
    for (name, s) in &report.spectra {
        write_spectrum(&out.join(format!("spectrum_{}.csv", file_tag(name))), meta, s)?;
    }
    for (name, r) in &report.chains {
        for (j, member) in r.chain.iter().enumerate() {
            write_wave(&out.join(format!("chain_{}_{}.csv", file_tag(name), j)), meta, member)?;
        }
    }
    Ok(())
}
