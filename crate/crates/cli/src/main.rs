//! Command-line front end: verification suites, extremiser checks, parameter
//! sweeps, and direct access to the Kummer evaluator and the quotient
//! minimiser.
//!
//! Exit codes: 0 = all checks passed, 1 = a tolerance failed, 2 = usage or
//! admissibility error.

mod report;
mod suite;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sharpline::error::Error;
use sharpline::extremiser::{build, euler_lagrange_residual, ExtremiserSpec};
use sharpline::forms::poly_exp_triple;
use sharpline::forms::quotient;
use sharpline::kummer::KummerParams;
use sharpline::minimiser::{build_basis, minimise_quotient, MinimiseOpts};
use sharpline::problem::{derive, ProblemParams};
use sharpline::quadrature::QuadratureSpec;

use report::{config_hash, fmt_f64, Record, Report, Status};
use suite::{compute_record, tol, RecordConfig};

#[derive(Parser)]
#[command(
    name = "sharpline",
    version,
    about = "Sharp-constant verification for a weighted half-line inequality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// Target relative quadrature error.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute quadrature error floor.
    #[arg(long, default_value_t = 1e-15)]
    abs_floor: f64,
    /// Split point between the endpoint and tail integration panels.
    #[arg(long, default_value_t = 1.0)]
    split: f64,
    /// Maximum quadrature refinement levels.
    #[arg(long, default_value_t = 12)]
    max_refinements: u32,
    /// Relative contribution threshold that closes an integration tail.
    #[arg(long, default_value_t = 1e-18)]
    tail_cut: f64,
}

impl QuadArgs {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: self.rel_tol,
            abs_floor: self.abs_floor,
            split: self.split,
            max_refinements: self.max_refinements,
            tail_cut: self.tail_cut,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity and inequality suites at one (mu, eps).
    Verify {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        /// Extra alpha values for the identity suite.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        alpha: Vec<f64>,
        /// Extra test function: polynomial coefficients c0,c1,... of
        /// (sum c_k x^k) e^{-x}.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        poly: Vec<f64>,
        #[command(flatten)]
        quad: QuadArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the extremiser and verify equality, the Euler-Lagrange
    /// equation, decay, and the recovered rate.
    Extremal {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[command(flatten)]
        quad: QuadArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Verify a (mu, eps) grid and write a CSV or JSON report.
    Sweep {
        /// Comma-separated mu values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        mu_grid: Vec<f64>,
        /// Absolute eps values applied to every mu.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "eps_fracs",
            allow_hyphen_values = true
        )]
        eps_list: Vec<f64>,
        /// Eps as fractions of mu^2/4 (each must be <= 1).
        #[arg(long, value_delimiter = ',')]
        eps_fracs: Vec<f64>,
        /// Trial-basis size for the minimiser.
        #[arg(long, alias = "K", default_value_t = 8)]
        k: usize,
        /// Envelope rate of the trial basis.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 8)]
        restarts: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Worker threads for grid records.
        #[arg(long, default_value_t = 1)]
        parallelism: usize,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        output: Option<PathBuf>,
        /// key=value file supplying any of the flags above (flags override).
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        quad: QuadArgs,
    },
    /// Evaluate the confluent hypergeometric function and its ODE residual.
    Kummer {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long)]
        z: f64,
    },
    /// Minimise the quotient over the trial basis directly.
    Minimise {
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, alias = "K", default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 8)]
        restarts: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        quad: QuadArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Errors bubbling to here are usage/admissibility failures (exit 2);
/// tolerance failures come back as exit codes.
fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Verify {
            mu,
            eps,
            alpha,
            poly,
            quad,
            output,
        } => cmd_verify(mu, eps, &alpha, &poly, &quad.spec(), output.as_deref()),
        Command::Extremal {
            mu,
            eps,
            lambda,
            amplitude,
            quad,
            output,
        } => cmd_extremal(mu, eps, lambda, amplitude, &quad.spec(), output.as_deref()),
        Command::Sweep {
            mu_grid,
            eps_list,
            eps_fracs,
            k,
            scale,
            restarts,
            seed,
            parallelism,
            format,
            output,
            config,
            quad,
        } => {
            let mut cfg = SweepConfig {
                mu_grid,
                eps_list,
                eps_fracs,
                k,
                scale,
                restarts,
                seed,
                parallelism,
                format,
                output,
                quad: quad.spec(),
            };
            if let Some(path) = config {
                cfg.merge_file(&path)?;
            }
            cmd_sweep(cfg)
        }
        Command::Kummer { b, mu, z } => cmd_kummer(b, mu, z),
        Command::Minimise {
            mu,
            eps,
            k,
            scale,
            restarts,
            seed,
            quad,
        } => cmd_minimise(mu, eps, k, scale, restarts, seed, &quad.spec()),
    }
}

fn write_or_print(report: &Report, output: Option<&std::path::Path>) -> std::io::Result<()> {
    let json = report.to_json();
    match output {
        Some(path) => std::fs::write(path, json + "\n"),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn cmd_verify(
    mu: f64,
    eps: f64,
    extra_alphas: &[f64],
    poly: &[f64],
    quad: &QuadratureSpec,
    output: Option<&std::path::Path>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = ProblemParams::new(mu, eps)?;
    let d = derive(&params)?;
    let mut alphas = vec![-2.0, -1.0, 0.5, 1.0, 2.0];
    alphas.extend_from_slice(extra_alphas);

    let gap = suite::identity_gap_max(&params, &alphas, quad)?;
    let mut violations: Vec<String> = Vec::new();
    let mut family = suite::verify_family(mu);
    if !poly.is_empty() {
        family.push(poly_exp_triple(poly, 1.0));
    }
    for triple in &family {
        violations.extend(suite::inequality_violations(triple, &params, quad)?);
    }
    // A user-supplied function also joins the identity check.
    if !poly.is_empty() {
        let t = poly_exp_triple(poly, 1.0);
        for &alpha in &alphas {
            for &b in &[d.b_minus, d.b_plus] {
                let g = sharpline::forms::g_alpha(&t, &params, alpha, b, quad)?.value;
                let gap_u = sharpline::forms::identity_gap(&t, &params, alpha, b, quad)?;
                let scale = f64::max((gap_u + g).abs(), f64::max(g.abs(), 1e-12));
                if gap_u.abs() / scale > tol::IDENTITY_GAP {
                    violations.push(format!("user function identity gap {gap_u}"));
                }
            }
        }
    }

    let passed = gap <= tol::IDENTITY_GAP && violations.is_empty();
    let status = if passed {
        Status::Ok
    } else {
        Status::FailedTolerance
    };
    println!(
        "mu = {mu}, eps = {eps}: s = {}, sharp constant = {}",
        d.s, d.sharp_const
    );
    println!("identity gap (scaled max): {gap:.3e}");
    for v in &violations {
        println!("violation: {v}");
    }
    println!("verify: {}", if passed { "PASS" } else { "FAIL" });

    let record = Record {
        mu,
        eps,
        s: Some(d.s),
        sharp_const: Some(d.sharp_const),
        extremal_quotient: None,
        identity_gap_max: Some(gap),
        minimiser_value: None,
        min_minus_sharp: None,
        status,
        note: if violations.is_empty() {
            None
        } else {
            Some(violations.join("; "))
        },
    };
    let report = Report::new(
        config_hash(&format!("verify mu={mu} eps={eps}")),
        vec![record],
    );
    write_or_print(&report, output)?;
    Ok(ExitCode::from(if passed { 0 } else { 1 }))
}

fn cmd_extremal(
    mu: f64,
    eps: f64,
    lambda: f64,
    amplitude: f64,
    quad: &QuadratureSpec,
    output: Option<&std::path::Path>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = ProblemParams::new(mu, eps)?;
    let d = derive(&params)?;
    let spec = ExtremiserSpec::new(params, lambda, amplitude)?;
    let built = build(&spec)?;
    let mut failed = false;
    let mut notes: Vec<String> = Vec::new();

    let q = if built.membership_warning {
        println!("membership warning: s = 0 boundary, non-terminating series");
        None
    } else {
        let q = quotient(&built.triple, &params, quad)?;
        println!("quotient = {q} (sharp constant {})", d.sharp_const);
        if (q - d.sharp_const).abs() > tol::EXTREMAL_QUOTIENT * d.sharp_const {
            failed = true;
            notes.push(format!("quotient {q} off sharp {}", d.sharp_const));
        }
        Some(q)
    };

    let mut worst_scaled = 0.0f64;
    for r in euler_lagrange_residual(&built.triple, &params, lambda, &suite::el_probe_points())? {
        worst_scaled = worst_scaled.max(r.residual.abs() / f64::max(r.scale, 1e-30));
    }
    println!("euler-lagrange residual (scaled max over 50 points): {worst_scaled:.3e}");
    if worst_scaled > tol::EULER_LAGRANGE {
        failed = true;
        notes.push(format!("EL residual {worst_scaled:.3e}"));
    }

    // Identity at alpha = lambda: both sides of the expanded square vanish
    // for a true extremiser.
    let gap = if built.membership_warning {
        None
    } else {
        let fv = sharpline::forms::form_values(&built.triple, &params, quad)?;
        let lhs = sharpline::forms::residual_lhs(
            &built.triple,
            &params,
            &sharpline::forms::ResidualCoefficients {
                alpha: lambda,
                beta: mu,
                gamma: (mu - d.b_minus) * lambda,
            },
            quad,
        )?;
        let lin = mu + 1.0 - 2.0 * d.b_minus;
        let g = lambda * lambda * fv.hardy - lambda * lin * fv.dirichlet + fv.bending;
        let magnitude = fv.bending + fv.hardy.abs() + fv.dirichlet;
        let floor = f64::max(1e-12, 1e-3 * (1.0 + lambda * lambda) * magnitude);
        let scaled = (lhs - g).abs() / f64::max(lhs.abs(), f64::max(g.abs(), floor));
        println!("identity gap at alpha = lambda (scaled): {scaled:.3e}");
        if scaled > tol::IDENTITY_GAP {
            failed = true;
            notes.push(format!("identity gap {scaled:.3e}"));
        }
        Some(scaled)
    };

    if !built.membership_warning {
        let (l, ok) = suite::lambda_fixed_point(&built.triple, &params, lambda, quad)?;
        println!("recovered rate = {l} (build rate {lambda})");
        if !ok {
            failed = true;
            notes.push(format!("recovered rate {l} vs {lambda}"));
        }
    }

    println!("decay ladder (x, g1, g2, g3):");
    for row in suite::decay_ladder(&built.triple, &params)? {
        println!(
            "  {:>9.3e}  {:>12.5e}  {:>12.5e}  {:>12.5e}",
            row.x, row.g1, row.g2, row.g3
        );
    }

    let status = if failed {
        Status::FailedTolerance
    } else if built.membership_warning {
        Status::WarningMembership
    } else {
        Status::Ok
    };
    println!(
        "extremal: {}",
        match status {
            Status::Ok => "PASS",
            Status::WarningMembership => "PASS (membership warning)",
            Status::FailedTolerance => "FAIL",
        }
    );
    let record = Record {
        mu,
        eps,
        s: Some(d.s),
        sharp_const: Some(d.sharp_const),
        extremal_quotient: q,
        identity_gap_max: gap,
        minimiser_value: None,
        min_minus_sharp: None,
        status,
        note: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    };
    let report = Report::new(
        config_hash(&format!("extremal mu={mu} eps={eps} lambda={lambda}")),
        vec![record],
    );
    write_or_print(&report, output)?;
    Ok(ExitCode::from(if failed { 1 } else { 0 }))
}

struct SweepConfig {
    mu_grid: Vec<f64>,
    eps_list: Vec<f64>,
    eps_fracs: Vec<f64>,
    k: usize,
    scale: f64,
    restarts: u32,
    seed: u64,
    parallelism: usize,
    format: String,
    output: Option<PathBuf>,
    quad: QuadratureSpec,
}

impl SweepConfig {
    /// Fills fields from a key=value file. Flags win: only fields still at
    /// their command-line defaults are overwritten.
    fn merge_file(&mut self, path: &std::path::Path) -> Result<(), Box<dyn std::error::Error>> {
        let text = std::fs::read_to_string(path)?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("bad config line (expected key=value): {line}"))?;
            let (key, value) = (key.trim(), value.trim());
            let parse_list = |v: &str| -> Result<Vec<f64>, String> {
                v.split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<f64>().map_err(|e| format!("{key}: {e}")))
                    .collect()
            };
            match key {
                "mu_grid" if self.mu_grid.is_empty() => self.mu_grid = parse_list(value)?,
                "eps_list" if self.eps_list.is_empty() => self.eps_list = parse_list(value)?,
                "eps_fracs" if self.eps_fracs.is_empty() => self.eps_fracs = parse_list(value)?,
                "k" if self.k == 8 => self.k = value.parse()?,
                "scale" if self.scale == 1.0 => self.scale = value.parse()?,
                "restarts" if self.restarts == 8 => self.restarts = value.parse()?,
                "seed" if self.seed == 42 => self.seed = value.parse()?,
                "parallelism" if self.parallelism == 1 => self.parallelism = value.parse()?,
                "format" if self.format == "csv" => self.format = value.to_string(),
                "output" if self.output.is_none() => self.output = Some(PathBuf::from(value)),
                _ => {}
            }
        }
        Ok(())
    }

    fn canonical(&self) -> String {
        format!(
            "mu_grid={:?} eps_list={:?} eps_fracs={:?} k={} scale={} restarts={} seed={} format={}",
            self.mu_grid,
            self.eps_list,
            self.eps_fracs,
            self.k,
            self.scale,
            self.restarts,
            self.seed,
            self.format
        )
    }
}

fn cmd_sweep(cfg: SweepConfig) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if cfg.mu_grid.is_empty() {
        return Err("empty mu grid".into());
    }
    if cfg.eps_list.is_empty() && cfg.eps_fracs.is_empty() {
        return Err("no eps values: give --eps-list or --eps-fracs".into());
    }
    if cfg.eps_fracs.iter().any(|f| *f > 1.0) {
        return Err("eps fractions must be <= 1".into());
    }
    if cfg.parallelism < 1 {
        return Err("parallelism must be >= 1".into());
    }
    if !matches!(cfg.format.as_str(), "csv" | "json") {
        return Err(format!("unknown format {:?} (csv or json)", cfg.format).into());
    }
    if cfg.k < 1 || cfg.k > sharpline::minimiser::MAX_BASIS {
        return Err(format!(
            "basis size {} outside 1..={}",
            cfg.k,
            sharpline::minimiser::MAX_BASIS
        )
        .into());
    }
    // The full grid is validated for admissibility before any work starts.
    let mut grid: Vec<(f64, f64)> = Vec::new();
    for &mu in &cfg.mu_grid {
        for &eps in &cfg.eps_list {
            grid.push((mu, eps));
        }
        for &frac in &cfg.eps_fracs {
            grid.push((mu, frac * mu * mu / 4.0));
        }
    }
    for &(mu, eps) in &grid {
        ProblemParams::new(mu, eps)?;
    }

    let rc = RecordConfig {
        basis_size: cfg.k,
        basis_scale: cfg.scale,
        restarts: cfg.restarts,
        seed: cfg.seed,
        quad: cfg.quad,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()?;
    let records: Vec<Record> = pool.install(|| {
        use rayon::prelude::*;
        grid.par_iter()
            .map(|&(mu, eps)| compute_record(mu, eps, &rc))
            .collect()
    });

    let any_failed = records.iter().any(|r| r.status == Status::FailedTolerance);
    let report = Report::new(config_hash(&cfg.canonical()), records);
    match (cfg.format.as_str(), &cfg.output) {
        ("csv", Some(path)) => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            std::fs::write(path, buf)?;
        }
        ("csv", None) => {
            let mut out = std::io::stdout().lock();
            report.write_csv(&mut out)?;
            out.flush()?;
        }
        ("json", Some(path)) => std::fs::write(path, report.to_json() + "\n")?,
        ("json", None) => println!("{}", report.to_json()),
        _ => unreachable!(),
    }
    Ok(ExitCode::from(if any_failed { 1 } else { 0 }))
}

fn cmd_kummer(b: f64, mu: f64, z: f64) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let p = KummerParams::new(b, mu);
    match p.m_derivatives(z) {
        Ok((w, w1, w2)) => {
            let residual = p.ode_residual(z)?;
            let scale = (1.0 + w.abs() + w1.abs() + w2.abs()) * (1.0 + z);
            println!("1F1({b}, {mu}, {z}) = {}", fmt_f64(Some(w)));
            println!("d/dz   = {}", fmt_f64(Some(w1)));
            println!("d2/dz2 = {}", fmt_f64(Some(w2)));
            println!(
                "ode residual = {residual:.3e} (scaled {:.3e})",
                residual.abs() / scale
            );
            Ok(ExitCode::from(
                if residual.abs() <= tol::KUMMER_RESIDUAL * scale {
                    0
                } else {
                    1
                },
            ))
        }
        Err(e @ (Error::Pole { .. } | Error::Precision { .. })) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_minimise(
    mu: f64,
    eps: f64,
    k: usize,
    scale: f64,
    restarts: u32,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let params = ProblemParams::new(mu, eps)?;
    let d = derive(&params)?;
    let model = build_basis(&params, k, scale, quad)?;
    let opts = MinimiseOpts {
        restarts,
        seed,
        ..MinimiseOpts::default()
    };
    let res = minimise_quotient(&model, &opts)?;
    println!(
        "trial basis: K = {k}, scale = {scale}, dirichlet condition = {:.3e}",
        model.cond_dirichlet
    );
    println!("gram cross-check error = {:.3e}", model.cross_check_err);
    println!("minimum = {}", fmt_f64(Some(res.value)));
    println!("sharp constant = {}", fmt_f64(Some(d.sharp_const)));
    println!("min - sharp = {:.6e}", res.value - d.sharp_const);
    println!(
        "restarts = {}, converged = {}, gradient norm = {:.3e}",
        res.restarts_used, res.converged, res.grad_norm
    );
    if res.value < d.sharp_const - tol::MIN_BELOW_SHARP {
        println!("minimise: FAIL (below the sharp lower bound)");
        Ok(ExitCode::from(1))
    } else {
        println!("minimise: PASS");
        Ok(ExitCode::from(0))
    }
}
