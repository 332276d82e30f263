use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use curveshift::io::report::Report;
use curveshift::kernels::Kernel;
use curveshift::pipeline::{analyze, analyze_without_bootstrap, density_points, fit_lrv, fit_sample};
use curveshift::simulation::{run_scenario, Model, ScenarioSpec};
use curveshift::{ingest_csv, AnalysisConfig, Error, GcvGrid, HdRule, Orientation, Result, Sample};

#[derive(Parser)]
#[command(name = "curveshift", version, about = "Test whether two convex regression curves differ by a horizontal and a vertical shift")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the bootstrap test on two series and print a JSON report.
    Test {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        opts: Options,
        /// Exit with status 2 when the hypothesis is rejected.
        #[arg(long)]
        fail_on_reject: bool,
    },
    /// Write the diagnostic point set as CSV `t,diff`.
    Device {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        opts: Options,
    },
    /// Write the long-run variance estimate of one series as CSV `t,sigma2`.
    Lrv {
        file: PathBuf,
        #[command(flatten)]
        opts: Options,
        /// Number of evaluation points in [0, 1].
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Write the local-linear fit of one series as CSV `t,level,derivative`.
    Fit {
        file: PathBuf,
        #[command(flatten)]
        opts: Options,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
    /// Monte Carlo size/power study on one of the built-in scenarios.
    Mc {
        #[arg(long, value_parser = parse_model)]
        scenario: Model,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        runs: usize,
        #[command(flatten)]
        opts: Options,
    },
}

fn parse_model(s: &str) -> std::result::Result<Model, String> {
    s.parse()
}

#[derive(Args, Default)]
struct Options {
    /// TOML or JSON file with analysis settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kernel: Option<Kernel>,
    #[arg(long)]
    bandwidth1: Option<f64>,
    #[arg(long)]
    bandwidth2: Option<f64>,
    /// Log-spaced GCV candidates `lo:hi:count`.
    #[arg(long)]
    gcv_grid: Option<GcvGrid>,
    #[arg(long)]
    eta: Option<f64>,
    /// Size L of the diagnostic point set.
    #[arg(long)]
    points: Option<usize>,
    /// Density bandwidth rule: `power:E` (h = n^E), `fixed:H` or a number.
    #[arg(long)]
    hd_rule: Option<HdRule>,
    /// Rearrangement grid size.
    #[arg(long = "N")]
    density_points: Option<usize>,
    /// Quadrature nodes for the statistic and the bootstrap.
    #[arg(long = "M")]
    nodes: Option<usize>,
    #[arg(long)]
    lrv_m: Option<usize>,
    #[arg(long)]
    lrv_tau: Option<f64>,
    /// Bootstrap replicates.
    #[arg(long = "B")]
    replicates: Option<usize>,
    /// Level(s); `mc` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    orientation1: Option<Orientation>,
    #[arg(long)]
    orientation2: Option<Orientation>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Options {
    fn config(&self) -> Result<AnalysisConfig> {
        let mut c = match &self.config {
            Some(path) => AnalysisConfig::load(path)?,
            None => AnalysisConfig::default(),
        };
        macro_rules! set {
            ($($field:ident <- $value:expr),* $(,)?) => {
                $(if let Some(v) = $value { c.$field = v; })*
            };
        }
        set!(
            kernel <- self.kernel,
            eta <- self.eta,
            points <- self.points,
            hd_rule <- self.hd_rule,
            nodes <- self.nodes,
            replicates <- self.replicates,
            seed <- self.seed,
            orientation1 <- self.orientation1,
            orientation2 <- self.orientation2,
        );
        if self.bandwidth1.is_some() {
            c.bandwidth1 = self.bandwidth1;
        }
        if self.bandwidth2.is_some() {
            c.bandwidth2 = self.bandwidth2;
        }
        if self.gcv_grid.is_some() {
            c.gcv_grid = self.gcv_grid;
        }
        if self.density_points.is_some() {
            c.density_points = self.density_points;
        }
        if self.lrv_m.is_some() {
            c.lrv_block = self.lrv_m;
        }
        if self.lrv_tau.is_some() {
            c.lrv_bandwidth = self.lrv_tau;
        }
        if self.out.is_some() {
            c.out = self.out.clone();
        }
        if let Some(&a) = self.alpha.first() {
            c.alpha = a;
        }
        c.validate()?;
        Ok(c)
    }

    fn single_alpha(&self) -> Result<()> {
        if self.alpha.len() > 1 {
            return Err(Error::Config("only one --alpha value is allowed here".into()));
        }
        Ok(())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)
        }
    }
}

fn load_pair(file1: &Path, file2: &Path, config: &AnalysisConfig) -> Result<[Sample; 2]> {
    Ok([ingest_csv(file1, config.orientation1)?, ingest_csv(file2, config.orientation2)?])
}

fn grid(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::Config("--grid must be at least 2".into()));
    }
    Ok((0..count).map(|k| k as f64 / (count - 1) as f64).collect())
}

/// Returns whether the hypothesis was rejected.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Test { file1, file2, opts, fail_on_reject } => {
            opts.single_alpha()?;
            let config = opts.config()?;
            let [s1, s2] = load_pair(&file1, &file2, &config)?;
            let analysis = analyze([&s1, &s2], &config)?;
            let inputs = vec![file1.display().to_string(), file2.display().to_string()];
            let report = Report::new(&analysis, &config, inputs);
            emit(config.out.as_deref(), &(report.to_json() + "\n"))?;
            Ok(fail_on_reject && analysis.bootstrap.is_some_and(|b| b.decision))
        }
        Command::Device { file1, file2, opts } => {
            opts.single_alpha()?;
            let config = opts.config()?;
            let [s1, s2] = load_pair(&file1, &file2, &config)?;
            let analysis = analyze_without_bootstrap([&s1, &s2], &config)?;
            let mut text = String::from("t,diff\n");
            for (t, d) in &analysis.device.points {
                text.push_str(&format!("{t},{d}\n"));
            }
            emit(config.out.as_deref(), &text)?;
            Ok(false)
        }
        Command::Lrv { file, opts, grid: count } => {
            opts.single_alpha()?;
            let config = opts.config()?;
            let sample = ingest_csv(&file, config.orientation1)?;
            let lrv = fit_lrv(&sample, &config, &config.kernel_spec())?;
            let mut text = String::from("t,sigma2\n");
            for t in grid(count)? {
                text.push_str(&format!("{t},{}\n", lrv.evaluate(t)));
            }
            emit(config.out.as_deref(), &text)?;
            Ok(false)
        }
        Command::Fit { file, opts, grid: count } => {
            opts.single_alpha()?;
            let config = opts.config()?;
            let sample = ingest_csv(&file, config.orientation1)?;
            let fit = fit_sample(&sample, config.bandwidth1, &config, &config.kernel_spec())?;
            let sign = config.orientation1.sign::<f64>();
            let mut text = format!(
                "# bandwidth={} gcv={} N={} h_d={}\nt,level,derivative\n",
                fit.bandwidth,
                fit.bandwidth_from_gcv,
                density_points(&config, sample.len()),
                fit.density.bandwidth()
            );
            for t in grid(count)? {
                let (level, slope) = fit.curve.evaluate(t);
                text.push_str(&format!("{t},{},{}\n", sign * level, sign * slope));
            }
            emit(config.out.as_deref(), &text)?;
            Ok(false)
        }
        Command::Mc { scenario, n, runs, opts } => {
            let config = opts.config()?;
            let mut spec = ScenarioSpec::preset(scenario, n, runs, config.replicates);
            if !opts.alpha.is_empty() {
                spec.alphas = opts.alpha.clone();
            }
            let seed = config.seed;
            let out = config.out.clone();
            spec.config = config;
            let result = run_scenario::<f64>(&spec, seed)?;
            let text = serde_json::to_string_pretty(&result).map_err(|e| Error::Io(e.to_string()))?;
            emit(out.as_deref(), &(text + "\n"))?;
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
