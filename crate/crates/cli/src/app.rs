//! Command-line front door: argument parsing, dispatch, output emission.
//!
//! Exit codes: 0 on success, 2 on validation errors (bad flags, malformed
//! specs, parameter ranges), 3 on budget or convergence failures.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use randhull_core::bounds::{self, BeInputs};
use randhull_core::cubature::{self, CubatureStatus, NaiveMode};
use randhull_core::estimate;
use randhull_core::geom::{MomentData, MomentProvenance};
use randhull_core::interior;
use randhull_core::linalg::Matrix;
use randhull_core::{Error as CoreError, RngStream};

use crate::manifest::{Request, RunManifest};
use crate::output::{tables_to_string, Cell, Table};
use crate::parallel;
use crate::spec_json::parse_spec_arg;
use crate::suites;

#[derive(Parser, Debug)]
#[command(
    name = "randhull",
    version,
    about = "Containment probabilities of random convex hulls, Tukey depth, and randomized cubature"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for all randomness; always recorded in the manifest.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for trial loops (results are thread-count invariant).
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output format for --out.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write results to this file (a manifest lands next to it).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate containment probabilities p_n(theta) for a spec.
    Estimate {
        /// Spec JSON: a file path or an inline object.
        #[arg(long)]
        spec: String,
        /// Sample sizes, comma separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
        /// Query point (defaults to the origin).
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        /// Relaxation radius for the containment test.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate the (relaxed) Tukey depth by a direction scan.
    Depth {
        #[arg(long)]
        spec: String,
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        /// Scanned directions.
        #[arg(long, default_value_t = 4096)]
        dirs: u64,
        /// Draws per estimation stage.
        #[arg(long, default_value_t = 20_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form bound tables.
    Bounds {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        alpha: f64,
        /// Also evaluate the tail recursion and its closed forms at this n.
        #[arg(long)]
        n: Option<u64>,
        /// With --pm: ratio/subset bounds from a known p_m.
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        pm: Option<f64>,
        /// Moment handles for threshold and CLT-gap entries.
        #[arg(long)]
        rho3: Option<f64>,
        #[arg(long)]
        m3: Option<f64>,
        /// Almost-sure norm bound of the whitened vector.
        #[arg(long = "b")]
        norm_bound: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized cubature construction and rejection schemes.
    Cubature {
        #[arg(long)]
        spec: String,
        /// alg1 (doubling construction), a, or b.
        #[arg(long, default_value = "alg1", value_parser = ["alg1", "a", "b"])]
        mode: String,
        #[arg(long, default_value_t = 4)]
        ell: u64,
        #[arg(long, default_value_t = 40)]
        maxk: u32,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Round cap for the rejection schemes.
        #[arg(long, default_value_t = 100_000)]
        max_iter: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Interior-body inclusion experiment.
    Interior {
        #[arg(long)]
        spec: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Canned reproduction suites with embedded verdicts.
    Reproduce {
        /// One of: wendel-table, two-point, gauss-nx, sandwich, g-grid,
        /// interior-gauss, cubature-trig, be-table.
        suite: String,
        #[arg(long)]
        dmax: Option<u64>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        ell: Option<u64>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Re-run a recorded manifest.
    Replay {
        manifest: PathBuf,
        /// Override the worker count (results are unchanged).
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Validation(String),
    /// Exit 3.
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Budget(m) => m,
        }
    }
}

fn map_core(err: CoreError) -> CliError {
    match err {
        CoreError::Budget(_)
        | CoreError::Convergence { .. }
        | CoreError::Reduction(_)
        | CoreError::RankDeficient { .. } => CliError::Budget(err.to_string()),
        _ => CliError::Validation(err.to_string()),
    }
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; usage errors exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Replay { manifest, threads, out } => {
            let text = std::fs::read_to_string(&manifest)
                .map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
            let mut m = RunManifest::from_json(&text).map_err(CliError::Validation)?;
            if let Some(t) = threads {
                m.threads = t;
            }
            if let Some(o) = out {
                m.out = Some(o.display().to_string());
            }
            run_manifest(&m)
        }
        other => {
            let m = build_manifest(other)?;
            run_manifest(&m)
        }
    }
}

fn parse_theta(theta: Option<Vec<f64>>, dim: usize) -> Result<Vec<f64>, CliError> {
    match theta {
        None => Ok(vec![0.0; dim]),
        Some(t) => {
            if t.len() != dim {
                return Err(CliError::Validation(format!(
                    "theta: expected {dim} coordinates, got {}",
                    t.len()
                )));
            }
            Ok(t)
        }
    }
}

fn build_manifest(command: Command) -> Result<RunManifest, CliError> {
    Ok(match command {
        Command::Estimate { spec, n, theta, epsilon, trials, common } => {
            let (config, built) = parse_spec_arg(&spec).map_err(CliError::Validation)?;
            let theta = parse_theta(theta, built.dim())?;
            RunManifest::new(
                Request::Estimate { spec: config, n_values: n, theta, epsilon, trials },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Depth { spec, theta, epsilon, dirs, trials, common } => {
            let (config, built) = parse_spec_arg(&spec).map_err(CliError::Validation)?;
            let theta = parse_theta(theta, built.dim())?;
            RunManifest::new(
                Request::Depth { spec: config, theta, epsilon, dirs, trials },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Bounds { d, alpha, n, m, pm, rho3, m3, norm_bound, eps, common } => {
            RunManifest::new(
                Request::Bounds { d, alpha, n, m, p_m: pm, rho3, m3, norm_bound, eps },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Cubature { spec, mode, ell, maxk, tol, max_iter, common } => {
            let (config, _) = parse_spec_arg(&spec).map_err(CliError::Validation)?;
            RunManifest::new(
                Request::Cubature { spec: config, mode, ell, max_k: maxk, tol, max_iter },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Interior { spec, alpha, epsilon, delta, trials, common } => {
            let (config, _) = parse_spec_arg(&spec).map_err(CliError::Validation)?;
            RunManifest::new(
                Request::Interior { spec: config, alpha, epsilon, delta, trials },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Reproduce {
            suite,
            dmax,
            d,
            epsilon,
            alpha,
            delta,
            trials,
            ell,
            runs,
            cap,
            common,
        } => {
            let mut options = BTreeMap::new();
            let mut put_u = |k: &str, v: Option<u64>| {
                if let Some(v) = v {
                    options.insert(k.to_string(), serde_json::json!(v));
                }
            };
            put_u("dmax", dmax);
            put_u("d", d);
            put_u("trials", trials);
            put_u("ell", ell);
            put_u("runs", runs);
            put_u("cap", cap);
            if let Some(v) = epsilon {
                options.insert("epsilon".into(), serde_json::json!(v));
            }
            if let Some(v) = alpha {
                options.insert("alpha".into(), serde_json::json!(v));
            }
            if let Some(v) = delta {
                options.insert("delta".into(), serde_json::json!(v));
            }
            suites::normalize_options(&suite, &mut options).map_err(CliError::Validation)?;
            RunManifest::new(
                Request::Reproduce { suite, options },
                common.seed,
                common.threads,
                &common.format,
                common.out.map(|p| p.display().to_string()),
            )
        }
        Command::Replay { .. } => unreachable!("handled in dispatch"),
    })
}

/// Write to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_all(text.as_bytes()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return;
        }
        eprintln!("error: stdout: {e}");
    }
}

/// Execute a manifest: compute tables, print them, emit artifacts.
pub fn run_manifest(manifest: &RunManifest) -> Result<(), CliError> {
    let tables = execute(&manifest.request, manifest.seed, manifest.threads)?;

    let mut stdout = String::new();
    for t in &tables {
        stdout.push_str(&t.render());
        stdout.push('\n');
    }
    stdout.push_str(&format!("manifest: {}\n", serde_json::to_string(manifest).unwrap()));
    emit(&stdout);

    if let Some(out) = &manifest.out {
        let body = tables_to_string(&tables, &manifest.format, true);
        std::fs::write(out, body)
            .map_err(|e| CliError::Validation(format!("out: cannot write {out}: {e}")))?;
        let manifest_path = format!("{out}.manifest.json");
        std::fs::write(&manifest_path, manifest.to_json())
            .map_err(|e| CliError::Validation(format!("out: cannot write {manifest_path}: {e}")))?;
    }
    Ok(())
}

/// Compute the result tables for a request.
pub fn execute(request: &Request, seed: u64, threads: usize) -> Result<Vec<Table>, CliError> {
    match request {
        Request::Estimate { spec, n_values, theta, epsilon, trials } => {
            let built = spec.build().map_err(CliError::Validation)?;
            let stream = RngStream::new(seed, 0);
            // Validate once up front so worker threads cannot race an error.
            if *trials < 100 {
                return Err(CliError::Validation(format!(
                    "trials = {trials} below the minimum 100"
                )));
            }
            let parts = parallel::map_trials(*trials, threads, |range| {
                estimate::profile_counts(&built, theta, *epsilon, n_values, range, &stream)
            });
            let mut acc: Option<estimate::ProfileCounts> = None;
            for part in parts {
                let part = part.map_err(map_core)?;
                acc = Some(match acc {
                    None => part,
                    Some(a) => a.merge(&part).map_err(map_core)?,
                });
            }
            let prof = acc
                .ok_or_else(|| CliError::Validation("trials must be positive".into()))?
                .finalize(seed);
            let mut table = Table::new(
                "estimate",
                &["n", "estimate", "stderr", "ci_lo", "ci_hi", "exact", "seed"],
            );
            for (est, &n) in prof.estimates.iter().zip(n_values) {
                let exact = built
                    .exact_p(n, theta)
                    .map(Cell::Float)
                    .unwrap_or(Cell::Str(String::new()));
                table.push(vec![
                    Cell::UInt(n),
                    Cell::Float(est.value),
                    Cell::Float(est.stderr),
                    Cell::Float(est.ci95.0),
                    Cell::Float(est.ci95.1),
                    exact,
                    Cell::UInt(seed),
                ]);
            }
            Ok(vec![table])
        }
        Request::Depth { spec, theta, epsilon, dirs, trials } => {
            let built = spec.build().map_err(CliError::Validation)?;
            let stream = RngStream::new(seed, 0);
            let r = estimate::estimate_tukey_mc(&built, theta, *epsilon, *dirs, *trials, &stream)
                .map_err(map_core)?;
            let mut table = Table::new(
                "depth",
                &["estimate", "stderr", "ci_lo", "ci_hi", "scan_min", "exact", "seed"],
            );
            let exact = built
                .exact_tukey(theta, *epsilon)
                .map(Cell::Float)
                .unwrap_or(Cell::Str(String::new()));
            table.push(vec![
                Cell::Float(r.estimate.value),
                Cell::Float(r.estimate.stderr),
                Cell::Float(r.estimate.ci95.0),
                Cell::Float(r.estimate.ci95.1),
                Cell::Float(r.scan_min),
                exact,
                Cell::UInt(seed),
            ]);
            Ok(vec![table])
        }
        Request::Bounds { d, alpha, n, m, p_m, rho3, m3, norm_bound, eps } => {
            let mut table = Table::new("bounds", &["name", "value", "kind", "source"]);
            fn extend(table: &mut Table, report: &bounds::BoundReport) {
                for e in &report.entries {
                    table.push(vec![
                        Cell::Str(e.name.clone()),
                        Cell::Float(e.value),
                        Cell::Str(format!("{:?}", e.kind).to_lowercase()),
                        Cell::Str(e.source.clone()),
                    ]);
                }
            }
            extend(&mut table, &bounds::nx_depth_bounds(*alpha, *d).map_err(map_core)?);
            if let Some(n) = n {
                extend(&mut table, &bounds::g_bounds(*d, *n, *alpha).map_err(map_core)?);
                table.push(vec![
                    Cell::Str("p_exact_symmetric".into()),
                    Cell::Float(bounds::wendel_exact(*n, *d)),
                    Cell::Str("exact".into()),
                    Cell::Str("symmetric-position-formula".into()),
                ]);
            }
            if let (Some(m), Some(p_m), Some(n)) = (m, p_m, n) {
                extend(&mut table, &bounds::sandwich_bounds(*p_m, *m, *n, *d).map_err(map_core)?);
            }
            if rho3.is_some() || norm_bound.is_some() || m3.is_some() {
                let moments = MomentData {
                    covariance: Matrix::identity(*d as usize),
                    whitener: Matrix::identity(*d as usize),
                    rho3: *rho3,
                    norm_bound: *norm_bound,
                    norm_moment3: *m3,
                    norm_moment4: None,
                    provenance: MomentProvenance::Analytic,
                };
                extend(&mut table, &bounds::nx_moment_bounds(*d, &moments).map_err(map_core)?);
                if let Some(n) = n {
                    let inputs =
                        BeInputs { rho3: *rho3, m3: *m3, norm_bound: *norm_bound, eps: *eps };
                    extend(&mut table, &bounds::be_gaps(*n, *d, &inputs).map_err(map_core)?);
                }
            }
            Ok(vec![table])
        }
        Request::Cubature { spec, mode, ell, max_k, tol, max_iter } => {
            let built = spec.build().map_err(CliError::Validation)?;
            let target = built.mean();
            let dim = built.dim();
            let mut stream = RngStream::new(seed, 0);
            let (summary_cells, measure) = match mode.as_str() {
                "alg1" => {
                    let r = cubature::run_algorithm1(&built, *ell, &target, *max_k, *tol, &mut stream)
                        .map_err(map_core)?;
                    let check = cubature::verify_cubature(&r, &target, (*tol * 10.0).max(1e-8));
                    if r.status == CubatureStatus::BudgetExhausted {
                        return Err(CliError::Budget(format!(
                            "doubling cap k = {max_k} reached at hull distance {}",
                            r.residual
                        )));
                    }
                    (
                        vec![
                            Cell::Str("alg1".into()),
                            Cell::UInt(r.k as u64),
                            Cell::UInt(r.samples_drawn),
                            Cell::UInt(r.reduced.as_ref().map_or(0, |m| m.len()) as u64),
                            Cell::Float(r.residual),
                            Cell::Bool(check.pass),
                        ],
                        r.reduced,
                    )
                }
                a_or_b => {
                    let m = if a_or_b == "a" { NaiveMode::A } else { NaiveMode::B };
                    let r = cubature::naive_scheme(&built, m, &target, *max_iter, &mut stream)
                        .map_err(map_core)?;
                    let check = cubature::verify_raw(
                        dim,
                        r.measure.support().as_flat(),
                        r.measure.weights(),
                        &target,
                        (*tol * 10.0).max(1e-8),
                    );
                    (
                        vec![
                            Cell::Str(a_or_b.into()),
                            Cell::UInt(r.iterations),
                            Cell::UInt(r.samples_drawn),
                            Cell::UInt(r.measure.len() as u64),
                            Cell::Float(check.max_residual),
                            Cell::Bool(check.pass),
                        ],
                        Some(r.measure),
                    )
                }
            };
            let mut summary = Table::new(
                "cubature_summary",
                &["mode", "rounds", "samples", "support", "residual", "pass"],
            );
            summary.push(summary_cells);

            let mut cols: Vec<String> = vec!["index".into(), "weight".into()];
            for k in 0..dim {
                cols.push(format!("x{k}"));
            }
            let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
            let mut support = Table::new("cubature_support", &col_refs);
            if let Some(m) = &measure {
                for (i, (p, &w)) in m.support().iter().zip(m.weights()).enumerate() {
                    let mut row = vec![Cell::UInt(i as u64), Cell::Float(w)];
                    row.extend(p.iter().map(|&x| Cell::Float(x)));
                    support.push(row);
                }
            }
            Ok(vec![summary, support])
        }
        Request::Interior { spec, alpha, epsilon, delta, trials } => {
            let built = spec.build().map_err(CliError::Validation)?;
            let stream = RngStream::new(seed, 0);
            let (net, theorem_n) =
                interior::inclusion_setup(&built, *alpha, *epsilon, *delta, &stream)
                    .map_err(map_core)?;
            let parts = parallel::map_trials(*trials, threads, |range| {
                interior::inclusion_counts(&built, net.as_ref(), theorem_n, range, &stream)
            });
            let mut successes = 0u64;
            for part in parts {
                successes += part.map_err(map_core)?;
            }
            let freq = successes as f64 / *trials as f64;
            let stderr = (freq * (1.0 - freq) / *trials as f64).sqrt();
            let mut table = Table::new(
                "interior",
                &[
                    "alpha",
                    "epsilon",
                    "delta",
                    "n",
                    "net_size",
                    "trials",
                    "success_frequency",
                    "stderr",
                    "pass",
                ],
            );
            table.push(vec![
                Cell::Float(*alpha),
                Cell::Float(*epsilon),
                Cell::Float(*delta),
                Cell::UInt(theorem_n),
                Cell::UInt(net.as_ref().map_or(0, |n| n.len()) as u64),
                Cell::UInt(*trials),
                Cell::Float(freq),
                Cell::Float(stderr),
                Cell::Bool(freq >= (1.0 - delta) - 4.0 * stderr),
            ]);
            Ok(vec![table])
        }
        Request::Reproduce { suite, options } => {
            suites::run_suite(suite, options, seed, threads).map_err(map_core)
        }
    }
}
