use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use wave_hum::diophantine::{continued_fraction, convergents, is_in_s, sine_gap_scan, RealSpec};
use wave_hum::hum::transfer_scan;
use wave_hum::observability::{
    assemble_gram, max_quotient, min_quotient, raw_spectrum_bounds, write_gram_csv, ObservationGeometry,
    ObservationKind,
};
use wave_hum::scenario::{preset_names, run_scenario, scan_observability, ScenarioConfig, ScenarioError};
use wave_hum::spectral::{DomainSpec, SobolevIndex};

/// Weak observability and HUM control of the wave equation in a truncated
/// spectral basis.
#[derive(Parser)]
#[command(name = "wave-hum", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioSource {
    /// Built-in scenario (square-T9, square-T12, interval-sqrt2, interval-golden, interval-xi-half).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ScenarioSource {
    fn load(&self) -> Result<ScenarioConfig, ScenarioError> {
        match (&self.preset, &self.config) {
            (Some(name), None) => ScenarioConfig::preset(name),
            (None, Some(path)) => ScenarioConfig::from_file(path),
            _ => Err(ScenarioError::Config(format!(
                "give exactly one of --preset or --config (presets: {})",
                preset_names().join(", ")
            ))),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Observability quotients of a scenario's truncated Gram form.
    Observe {
        #[command(flatten)]
        source: ScenarioSource,
        /// Also write the Gram blocks as CSV (row,col,re,im).
        #[arg(long)]
        gram_csv: Option<PathBuf>,
    },
    /// Full HUM run: writes results.json, control.csv and trace.csv.
    Control {
        #[command(flatten)]
        source: ScenarioSource,
        /// Output directory (overrides the config's output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Min/max quotient over a grid of horizons and truncations.
    Scan {
        /// `square` or `interval:<xi>` (xi as for `cf`).
        #[arg(long, default_value = "square")]
        geometry: String,
        /// Norm pair: `weak`, `energy` or a number `a`.
        #[arg(long, default_value = "weak", allow_hyphen_values = true)]
        pair: String,
        /// Comma-separated horizons.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        horizons: Vec<f64>,
        /// Comma-separated truncations: `K` (K×K square or N-mode interval).
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        truncations: Vec<usize>,
        /// CSV output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Continued fraction, bounded-quotient verdict and sine-gap scan of a number in (0,1).
    Cf {
        /// `p/q`, `surd:a,b,d,c` for (a+b√d)/c, `sqrt2-1`, `golden` or `0.ddd…`.
        x: String,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        /// Largest n for the min n·|sin(nπx)| scan.
        #[arg(long, default_value_t = 1000)]
        gap_scan: u64,
    },
    /// Sup of the truncated transfer function on the line Re λ = δ.
    Transfer {
        #[arg(long, default_value = "sqrt2-1")]
        xi: String,
        #[arg(long, default_value_t = 256)]
        modes: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 100.0)]
        max_im: f64,
        #[arg(long, default_value_t = 20001)]
        samples: usize,
    },
}

fn parse_pair(s: &str) -> Result<SobolevIndex, ScenarioError> {
    match s {
        "weak" => Ok(SobolevIndex::WEAK),
        "energy" => Ok(SobolevIndex::ENERGY),
        _ => s.parse::<f64>().map(SobolevIndex::new).map_err(|_| ScenarioError::Config(format!("unknown pair {s:?}"))),
    }
}

fn parse_xi(s: &str) -> Result<RealSpec, ScenarioError> {
    s.parse().map_err(|e: wave_hum::Error| ScenarioError::Config(e.to_string()))
}

fn print_json(v: &serde_json::Value) -> Result<(), ScenarioError> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| ScenarioError::Config(e.to_string()))?;
    writeln!(out).map_err(|e| ScenarioError::Io { path: "<stdout>".into(), message: e.to_string() })
}

fn io_err(path: &std::path::Path) -> impl Fn(io::Error) -> ScenarioError + '_ {
    move |e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn run(cli: Cli) -> Result<(), ScenarioError> {
    let math = |e: wave_hum::Error| ScenarioError::Solver { scenario: "cli".into(), source: e };
    let usage = |e: wave_hum::Error| ScenarioError::Config(e.to_string());
    match cli.command {
        Command::Observe { source, gram_csv } => {
            let cfg = source.load()?;
            let geometry = cfg.observation().map_err(usage)?;
            let gram = assemble_gram(&geometry, &cfg.domain).map_err(math)?;
            let minq = min_quotient(&gram, cfg.pair).map_err(math)?;
            let maxq = max_quotient(&gram, cfg.pair).map_err(math)?;
            let (lo, hi) = raw_spectrum_bounds(&gram).map_err(math)?;
            if let Some(path) = gram_csv {
                let f = File::create(&path).map_err(io_err(&path))?;
                write_gram_csv(&gram, f).map_err(io_err(&path))?;
            }
            print_json(&json!({
                "name": cfg.name,
                "horizon": cfg.horizon,
                "pair": cfg.pair,
                "min_quotient": minq.value,
                "max_quotient": maxq,
                "gram_eigenvalue_range": [lo, hi],
                "minimizer": minq.state,
            }))
        }
        Command::Control { source, out } => {
            let cfg = source.load()?;
            let bundle = run_scenario(&cfg)?;
            let dir = out.or(cfg.output_dir.as_ref().map(PathBuf::from));
            if let Some(dir) = dir {
                bundle.write_to(&dir)?;
            }
            io::stdout().write_all(bundle.results_json.as_bytes()).map_err(io_err(std::path::Path::new("<stdout>")))?;
            for c in &bundle.results.checks {
                eprintln!(
                    "{} [criterion {}]: {} (value {:e}, threshold {:e})",
                    c.name,
                    c.criterion,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.value,
                    c.threshold
                );
            }
            if bundle.results.passed() {
                Ok(())
            } else {
                Err(ScenarioError::ChecksFailed { scenario: cfg.name, failed: bundle.results.failed_checks() })
            }
        }
        Command::Scan { geometry, pair, horizons, truncations, out } => {
            let pair = parse_pair(&pair)?;
            let (kind, interval) = if geometry == "square" {
                (ObservationKind::SquareLeftEdge, false)
            } else if let Some(xi) = geometry.strip_prefix("interval:") {
                // validates xi ∈ (0,1) as well
                let g = ObservationGeometry::interval_point(parse_xi(xi)?.to_f64(), 1.0).map_err(usage)?;
                (g.kind, true)
            } else {
                return Err(ScenarioError::Config(format!("unknown geometry {geometry:?}")));
            };
            let domains = truncations
                .iter()
                .map(|&k| if interval { DomainSpec::interval(k) } else { DomainSpec::square(k, k) })
                .collect::<wave_hum::Result<Vec<_>>>()
                .map_err(usage)?;
            let report = scan_observability(kind, pair, &horizons, &domains)?;
            match out {
                Some(path) => report.write_csv(File::create(&path).map_err(io_err(&path))?)?,
                None => report.write_csv(io::stdout().lock())?,
            }
            for (label, t) in &report.thresholds {
                match t {
                    Some(t) => eprintln!(
                        "truncation {label}: min/max > {:e} for every scanned T >= {t}",
                        report.threshold_ratio
                    ),
                    None => eprintln!(
                        "truncation {label}: no scanned horizon clears min/max > {:e}",
                        report.threshold_ratio
                    ),
                }
            }
            Ok(())
        }
        Command::Cf { x, depth, gap_scan } => {
            let x = parse_xi(&x)?;
            let verdict = is_in_s(&x, depth).map_err(usage)?;
            let (expansion, convs) = match continued_fraction(&x, depth) {
                Ok(cf) => {
                    let convs: Vec<_> =
                        convergents(&cf.quotients).into_iter().map(|(p, q)| format!("{p}/{q}")).collect();
                    (serde_json::to_value(&cf).expect("serializable"), convs)
                }
                Err(wave_hum::Error::PrecisionExhausted { certified }) => {
                    (json!({ "quotients": certified, "precision_exhausted": true }), Vec::new())
                }
                Err(e) => return Err(usage(e)),
            };
            let scan = if gap_scan > 0 { Some(sine_gap_scan(&x, gap_scan).map_err(usage)?) } else { None };
            print_json(&json!({
                "x": x,
                "value": x.to_f64(),
                "expansion": expansion,
                "convergents": convs,
                "verdict": verdict,
                "reason_code": verdict.reason_code(),
                "sine_gap_scan": scan,
            }))
        }
        Command::Transfer { xi, modes, delta, max_im, samples } => {
            let xi = parse_xi(&xi)?;
            let geometry = ObservationGeometry::interval_point(xi.to_f64(), 1.0).map_err(usage)?;
            let domain = DomainSpec::interval(modes).map_err(usage)?;
            let scan = transfer_scan(delta, max_im, samples, &geometry, &domain).map_err(usage)?;
            let at = wave_hum::hum::transfer_function(Complex64::new(delta, scan.argmax_im), &geometry, &domain)
                .map_err(usage)?;
            print_json(&json!({ "xi": xi, "scan": scan, "value_at_sup": at }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
