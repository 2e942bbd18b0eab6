//! Command-line driver: kernel constants and samples, bifurcation data,
//! pointwise curvature of user profiles, branch tracing, and the runtime
//! verification suite. Everything prints CSV or hand-formatted JSON with
//! 17-significant-digit numbers, so identical inputs give byte-identical
//! output at any `--threads` setting.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::branch::{self, BranchConfig};
use crate::error::{Error, Result};
use crate::kernels::{
    b_alpha_const, g0_const, g_alpha, h_of_b, one_minus_cos_integral, ModelParams,
};
use crate::linearized::{eigenvalue, find_mu_star, transversality};
use crate::nmc;
use crate::profile::{Profile, ProfileRecord};
use crate::quad::QuadSpec;
use crate::verify;
use crate::workers::Workers;

/// Top-level run configuration; the JSON config file mirrors these fields
/// one-to-one, and individual CLI flags override individual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub params: ModelParams,
    pub quad: QuadSpec,
    pub branch: BranchConfig,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams { n: 3, alpha: 0.5 },
            quad: QuadSpec::default(),
            branch: BranchConfig::default(),
            output_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.quad.validate()?;
        self.branch.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Curvature expression selector: `primary` is the production evaluator,
/// `direct` and `shell` are the independent cross-check forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expr {
    Primary,
    Direct,
    Shell,
}

impl Expr {
    fn name(self) -> &'static str {
        match self {
            Expr::Primary => "primary",
            Expr::Direct => "direct",
            Expr::Shell => "shell",
        }
    }

    fn eval(self, p: &Profile, s: f64, par: &ModelParams, spec: &QuadSpec) -> Result<f64> {
        match self {
            Expr::Primary => nmc::evaluate(p, s, par, spec),
            Expr::Direct => nmc::evaluate_direct(p, s, par, spec),
            Expr::Shell => nmc::evaluate_shell(p, s, par, spec),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "onduloid", version, about = "Nonlocal-curvature cylinders: kernels, spectra, and the bifurcating branch")]
pub struct Cli {
    /// Worker threads for batch evaluations; results are bit-identical for
    /// every T (reductions are index-ordered).
    #[arg(long, global = true, default_value_t = 8)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print kernel constants and optional samples of G and h as CSV.
    Kernels {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        alpha: f64,
        /// Comma-separated τ values at which to tabulate the kernel G.
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
        /// Sample h on an arithmetic grid start:step:end.
        #[arg(long = "h-grid")]
        h_grid: Option<String>,
    },
    /// Locate the bifurcation radius and print the low spectrum as JSON.
    Bifurcation {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        alpha: f64,
    },
    /// Evaluate the curvature of a profile JSON at given points (CSV).
    Nmc {
        /// Path to a profile JSON file ({"N", "alpha", "coeffs"}).
        profile: PathBuf,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        points: Vec<f64>,
        /// Expression column(s) to compute (repeatable).
        #[arg(long = "expr", value_enum)]
        expr: Vec<Expr>,
    },
    /// Trace the bifurcating branch and write branch table + profile files.
    Trace {
        /// RunConfig JSON file; flags below override individual fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "N")]
        n: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
        #[arg(long)]
        a_step: Option<f64>,
        #[arg(long)]
        a_max: Option<f64>,
        /// Highest retained cosine mode.
        #[arg(long = "K")]
        k: Option<usize>,
        /// Collocation intervals on [0, π].
        #[arg(long = "M")]
        m: Option<usize>,
    },
    /// Run the invariant suites and print a pass/fail report.
    Verify {
        /// Restrict to one suite (quad, kernels, nmc, linearized, branch).
        #[arg(long)]
        suite: Option<String>,
    },
}

/// 17 significant digits: enough to round-trip any f64 exactly.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Entry point used by the binary: parse, dispatch, map errors to the
/// documented exit codes (0 ok, 1 verification failure, 2 input error,
/// 3 kernel non-convergence, 4 continuation failure at the first step).
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let workers = Workers::new(cli.threads.max(1));
    match dispatch(cli.command, &workers) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, workers: &Workers) -> Result<i32> {
    match cmd {
        Command::Kernels { n, alpha, tau, h_grid } => {
            let par = ModelParams::new(n, alpha)?;
            print!("{}", cmd_kernels(&par, &tau, h_grid.as_deref())?);
            Ok(0)
        }
        Command::Bifurcation { n, alpha } => {
            let par = ModelParams::new(n, alpha)?;
            print!("{}", cmd_bifurcation(&par, workers)?);
            Ok(0)
        }
        Command::Nmc { profile, points, expr } => {
            let record = read_profile(&profile)?;
            print!("{}", cmd_nmc(&record, &points, &expr)?);
            Ok(0)
        }
        Command::Trace { config, n, alpha, output_dir, format, a_step, a_max, k, m } => {
            let mut cfg = match config {
                Some(path) => read_config(&path)?,
                None => RunConfig::default(),
            };
            if let Some(n) = n {
                cfg.params.n = n;
            }
            if let Some(alpha) = alpha {
                cfg.params.alpha = alpha;
            }
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            if let Some(f) = format {
                cfg.format = f;
            }
            if let Some(v) = a_step {
                cfg.branch.a_step = v;
            }
            if let Some(v) = a_max {
                cfg.branch.a_max = v;
            }
            if let Some(v) = k {
                cfg.branch.k = v;
            }
            if let Some(v) = m {
                cfg.branch.m = v;
            }
            cfg.validate()?;
            let (summary, warnings) = cmd_trace(&cfg, workers)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            print!("{summary}");
            Ok(0)
        }
        Command::Verify { suite } => {
            let (report, failed) = cmd_verify(suite.as_deref(), workers)?;
            print!("{report}");
            Ok(if failed > 0 { 1 } else { 0 })
        }
    }
}

fn read_profile(path: &Path) -> Result<ProfileRecord> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("profile JSON {}: {e}", path.display())))
}

fn read_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config JSON {}: {e}", path.display())))
}

/// Parse "start:step:end" into an inclusive arithmetic grid.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "grid must be start:step:end, got '{text}'"
        )));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| Error::InvalidInput(format!("grid component '{p}': {e}")))
        })
        .collect::<Result<_>>()?;
    let (start, step, end) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || end < start {
        return Err(Error::InvalidInput(
            "grid needs step > 0 and end >= start".into(),
        ));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn cmd_kernels(par: &ModelParams, tau: &[f64], h_grid: Option<&str>) -> Result<String> {
    let spec = QuadSpec::default();
    let mut out = String::from("quantity,argument,value\n");
    let _ = writeln!(out, "b_alpha,,{}", fmt17(b_alpha_const(par, &spec)?));
    let g0 = g0_const(par)?;
    if par.n >= 3 {
        let _ = writeln!(out, "g0,,{}", fmt17(g0));
    }
    let _ = writeln!(
        out,
        "h_limit_const,,{}",
        fmt17(g0 * one_minus_cos_integral(par.alpha)?)
    );
    for &t in tau {
        let _ = writeln!(out, "G,{},{}", fmt17(t), fmt17(g_alpha(t, par, &spec)?));
    }
    if let Some(gr) = h_grid {
        for b in parse_grid(gr)? {
            let _ = writeln!(out, "h,{},{}", fmt17(b), fmt17(h_of_b(b, par, &spec)?));
        }
    }
    Ok(out)
}

fn cmd_bifurcation(par: &ModelParams, _workers: &Workers) -> Result<String> {
    let spec = QuadSpec::default();
    let mu_star = find_mu_star(par, &spec)?;
    let hp = transversality(mu_star, par, &spec)?;
    let b_a = b_alpha_const(par, &spec)?;
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"N\": {},", par.n);
    let _ = writeln!(out, "  \"alpha\": {},", fmt17(par.alpha));
    let _ = writeln!(out, "  \"b_alpha\": {},", fmt17(b_a));
    let _ = writeln!(out, "  \"mu_star\": {},", fmt17(mu_star));
    let _ = writeln!(out, "  \"h_prime_at_star\": {},", fmt17(hp));
    out.push_str("  \"lambda\": [\n");
    for k in 0u32..=8 {
        let lam = eigenvalue(k, mu_star, par, &spec)?;
        let sep = if k < 8 { "," } else { "" };
        let _ = writeln!(out, "    {}{}", fmt17(lam), sep);
    }
    out.push_str("  ]\n}\n");
    Ok(out)
}

fn cmd_nmc(record: &ProfileRecord, points: &[f64], expr: &[Expr]) -> Result<String> {
    let par = ModelParams::new(record.n, record.alpha)?;
    let spec = QuadSpec::default();
    let profile = record.profile()?;
    profile.ensure_positive()?;
    let mut columns: Vec<Expr> = Vec::new();
    for &e in expr {
        if !columns.contains(&e) {
            columns.push(e);
        }
    }
    if columns.is_empty() {
        columns.push(Expr::Primary);
    }
    let mut out = String::from("s");
    for c in &columns {
        out.push(',');
        out.push_str(c.name());
    }
    out.push('\n');
    for &s in points {
        out.push_str(&fmt17(s));
        for c in &columns {
            out.push(',');
            out.push_str(&fmt17(c.eval(&profile, s, &par, &spec)?));
        }
        out.push('\n');
    }
    Ok(out)
}

fn profile_json(record: &ProfileRecord) -> String {
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"N\": {},", record.n);
    let _ = writeln!(out, "  \"alpha\": {},", fmt17(record.alpha));
    out.push_str("  \"coeffs\": [\n");
    for (i, &c) in record.coeffs.iter().enumerate() {
        let sep = if i + 1 < record.coeffs.len() { "," } else { "" };
        let _ = writeln!(out, "    {}{}", fmt17(c), sep);
    }
    out.push_str("  ]");
    if let Some(a) = record.a {
        let _ = write!(out, ",\n  \"a\": {}", fmt17(a));
    }
    if let Some(mu) = record.mu {
        let _ = write!(out, ",\n  \"mu\": {}", fmt17(mu));
    }
    out.push_str("\n}\n");
    out
}

fn cmd_trace(cfg: &RunConfig, workers: &Workers) -> Result<(String, Vec<String>)> {
    let trace = branch::trace_branch(&cfg.branch, &cfg.params, &cfg.quad, workers)?;
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Error::Io(format!("creating {}: {e}", cfg.output_dir.display())))?;

    // Branch table.
    let table_path = match cfg.format {
        OutputFormat::Csv => {
            let mut csv = String::from("a,mu,lambda,residual_sup,newton_iters\n");
            for p in &trace.points {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    fmt17(p.a),
                    fmt17(p.mu),
                    fmt17(p.lambda),
                    fmt17(p.residual_sup),
                    p.newton_iters
                );
            }
            let path = cfg.output_dir.join("branch.csv");
            std::fs::write(&path, csv)
                .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
            path
        }
        OutputFormat::Json => {
            let mut js = String::from("[\n");
            for (i, p) in trace.points.iter().enumerate() {
                let sep = if i + 1 < trace.points.len() { "," } else { "" };
                let _ = writeln!(
                    js,
                    "  {{\"a\": {}, \"mu\": {}, \"lambda\": {}, \"residual_sup\": {}, \"newton_iters\": {}}}{}",
                    fmt17(p.a),
                    fmt17(p.mu),
                    fmt17(p.lambda),
                    fmt17(p.residual_sup),
                    p.newton_iters,
                    sep
                );
            }
            js.push_str("]\n");
            let path = cfg.output_dir.join("branch.json");
            std::fs::write(&path, js)
                .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
            path
        }
    };

    // One profile file per branch point, in table order.
    for (i, p) in trace.points.iter().enumerate() {
        let w = p.collocation_profile()?;
        let record = ProfileRecord {
            n: cfg.params.n,
            alpha: cfg.params.alpha,
            coeffs: w.coeffs.clone(),
            a: Some(p.a),
            mu: Some(p.mu),
        };
        let path = cfg.output_dir.join(format!("profile_{i:03}.json"));
        std::fs::write(&path, profile_json(&record))
            .map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))?;
    }

    let max_res = trace
        .points
        .iter()
        .map(|p| p.residual_sup)
        .fold(0.0_f64, f64::max);
    let lam_min = trace
        .points
        .iter()
        .map(|p| p.lambda)
        .fold(f64::INFINITY, f64::min);
    let lam_max = trace
        .points
        .iter()
        .map(|p| p.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut summary = String::new();
    let _ = writeln!(summary, "mu_star: {}", fmt17(trace.mu_star));
    let _ = writeln!(summary, "points_solved: {}", trace.points.len());
    let _ = writeln!(summary, "max_residual: {}", fmt17(max_res));
    let _ = writeln!(
        summary,
        "lambda_range: {} .. {}",
        fmt17(lam_min),
        fmt17(lam_max)
    );
    let _ = writeln!(summary, "table: {}", table_path.display());
    let _ = writeln!(
        summary,
        "profiles: {} files in {}",
        trace.points.len(),
        cfg.output_dir.display()
    );
    Ok((summary, trace.warnings.clone()))
}

fn cmd_verify(suite: Option<&str>, workers: &Workers) -> Result<(String, usize)> {
    let spec = QuadSpec::default();
    let results = match suite {
        Some(name) => verify::run_suite(name, &spec, workers)?,
        None => verify::run_all(&spec, workers),
    };
    let mut out = String::new();
    let mut failed = 0usize;
    for r in &results {
        if !r.passed {
            failed += 1;
        }
        let _ = writeln!(
            out,
            "{} {}/{}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.suite,
            r.name,
            r.detail
        );
    }
    let _ = writeln!(
        out,
        "{{\"total\": {}, \"passed\": {}, \"failed\": {}}}",
        results.len(),
        results.len() - failed,
        failed
    );
    Ok((out, failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_inclusive_end() {
        let g = parse_grid("0:0.5:5").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert!((g[10] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn grid_parsing_rejects_nonsense() {
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:-1:5").is_err());
        assert!(parse_grid("a:b:c").is_err());
    }

    #[test]
    fn seventeen_digit_round_trip() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 1e-300, -2.5e17] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.params, cfg.params);
        assert_eq!(back.branch.k, cfg.branch.k);
        assert_eq!(back.format, cfg.format);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"params": {"N": 2, "alpha": 0.5}, "output_dir": "x"}"#)
                .unwrap();
        assert_eq!(cfg.params.n, 2);
        assert_eq!(cfg.branch.m, BranchConfig::default().m);
        assert_eq!(cfg.output_dir, PathBuf::from("x"));
    }

    #[test]
    fn kernels_table_shape() {
        let par = ModelParams { n: 3, alpha: 0.5 };
        let out = cmd_kernels(&par, &[1.0], Some("0:1:2")).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "quantity,argument,value");
        assert!(lines.iter().any(|l| l.starts_with("b_alpha,,")));
        assert!(lines.iter().any(|l| l.starts_with("g0,,")));
        assert!(lines.iter().any(|l| l.starts_with("G,1.")));
        // h(0) = 0 exactly.
        assert!(lines
            .iter()
            .any(|l| l.starts_with("h,0.0000000000000000e0,0.0000000000000000e0")));
    }

    #[test]
    fn nmc_constant_profile_table() {
        let record = ProfileRecord {
            n: 3,
            alpha: 0.5,
            coeffs: vec![1.0],
            a: None,
            mu: None,
        };
        let out = cmd_nmc(&record, &[0.0, 1.0], &[Expr::Primary]).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "s,primary");
        assert_eq!(lines.len(), 3);
        let v0: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        let v1: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        let spec = QuadSpec::default();
        let par = ModelParams { n: 3, alpha: 0.5 };
        let expect = b_alpha_const(&par, &spec).unwrap() / par.alpha;
        assert!((v0 - expect).abs() < 1e-6 * expect);
        assert_eq!(v0, v1);
    }

    #[test]
    fn help_and_bad_flags_exit_codes() {
        assert_eq!(run(["onduloid", "--help"]), 0);
        assert_eq!(run(["onduloid", "kernels", "--N", "3"]), 2); // missing --alpha
        assert_eq!(run(["onduloid", "nope"]), 2);
    }
}
