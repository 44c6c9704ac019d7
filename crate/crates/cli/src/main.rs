use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use levitrap_core::error::{Error, Result};
use levitrap_core::oracle::suite::{ladder_suite, psd_suite, LadderOptions, LadderSuite, PsdOptions, PsdSuite};
use levitrap_core::oracle::{dump, photons, OracleCheck};
use levitrap_core::optics::compute_coefficients;
use levitrap_core::regression::{parse_cases, regression, table_text};
use levitrap_core::report::{self, error_value, json_string, render_report, Format, ReportDocument};
use levitrap_core::scenario::{validate_scenario, Scenario};
use levitrap_core::sweep::{sweep, SweepAxis, PARAMETERS};
use levitrap_core::evaluate;

#[derive(Parser)]
#[command(name = "levitrap", version, about = "Shot-noise heating and feedback cooling of a levitated nanosphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format: json, csv or text.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the Monte-Carlo oracles.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Treat failed operating conditions as errors.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Psd,
    Ladder,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario file.
    Report {
        config: PathBuf,
        /// Include the generation time in the document.
        #[arg(long)]
        timestamp: bool,
    },
    /// Evaluate a scenario over a grid of one or two parameters.
    Sweep {
        config: PathBuf,
        /// `name=start:stop:steps[:log]`; repeat for a second parameter.
        #[arg(long = "param", required = true)]
        params: Vec<String>,
    },
    /// Run the Monte-Carlo cross-checks.
    Oracle {
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Simulated photon-stream duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// Ladder run length in relaxation times.
        #[arg(long, default_value_t = 4000.0)]
        ladder_span: f64,
        /// Write the raw photon impulses in the LVTR binary format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Compare against the built-in worked examples.
    Regression {
        #[arg(long, default_value = "all")]
        case: String,
    },
    /// List the sweep parameter names.
    Parameters,
}

fn format_of(cli: &Cli, default: Format) -> Result<Format> {
    cli.format.as_deref().map_or(Ok(default), str::parse)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(text.as_bytes())?;
            w.flush()?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn load(path: &Path, strict: bool) -> Result<Scenario> {
    let mut s = Scenario::from_path(path)?;
    if strict {
        s.solver.strict = true;
    }
    Ok(s)
}

fn check_line(c: &OracleCheck) -> String {
    format!(
        "{} {:<44} {:>20} ± {:<12} target {:>20}  ({:.2}σ)\n",
        if c.passed { "PASS" } else { "FAIL" },
        c.name,
        format!("{:.6e}", c.estimate),
        format!("{:.2e}", c.stderr),
        format!("{:.6e}", c.target),
        if c.stderr > 0.0 { c.sigmas() } else { 0.0 }
    )
}

fn oracle_text(psd: &Option<PsdSuite>, ladder: &Option<LadderSuite>) -> String {
    let mut t = String::new();
    if let Some(p) = psd {
        t.push_str(&format!(
            "photon streams: seed {}, {:.6e} s, {} scatter and {} absorb events, {} segments of {} bins\n",
            p.seed, p.duration, p.scatter_events, p.absorb_events, p.binning.segments, p.binning.segment_len
        ));
        p.checks.iter().for_each(|c| t.push_str(&check_line(c)));
    }
    if let Some(l) = ladder {
        t.push_str(&format!("ladder: seed {}, {} relaxation times per set\n", l.seed, l.span));
        l.checks.iter().for_each(|c| t.push_str(&check_line(c)));
        let e = &l.escape;
        t.push_str(&format!(
            "{} escape past state {} within {} relaxation units: Γ_g/Γ = {} {}, Γ_g/Γ = {} {}\n",
            if e.passed { "PASS" } else { "FAIL" },
            e.guard,
            e.horizon,
            e.unstable_ratio,
            e.unstable.map_or("stays".to_string(), |x| format!("escapes at t = {:.4e}", x.time)),
            e.control_ratio,
            e.control.map_or("stays".to_string(), |x| format!("escapes at t = {:.4e}", x.time)),
        ));
    }
    t
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Report { config, timestamp } => {
            let s = load(config, cli.strict)?;
            let doc = ReportDocument::new(evaluate(&s)?, *timestamp);
            emit(&cli.out, &render_report(&doc, format_of(cli, Format::Json)?)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { config, params } => {
            let s = load(config, cli.strict)?;
            let axes = params
                .iter()
                .map(|p| p.parse::<SweepAxis>())
                .collect::<Result<Vec<_>>>()?;
            let table = sweep(&s, &axes)?;
            let text = match format_of(cli, Format::Csv)? {
                Format::Csv | Format::Text => table.to_csv()?,
                Format::Json => json_string(&table.to_json()),
            };
            emit(&cli.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle {
            config,
            which,
            duration,
            ladder_span,
            dump: dump_path,
        } => {
            let s = load(config, cli.strict)?;
            let v = validate_scenario(&s);
            if !v.passed() {
                let names: Vec<String> = v.failures().map(|c| c.name.clone()).collect();
                return Err(Error::Invalid(names.join("; ")));
            }
            let psd = if *which != Which::Ladder {
                let mut opts = PsdOptions::new(cli.seed);
                opts.duration = *duration;
                Some(psd_suite(&s, &opts)?)
            } else {
                None
            };
            let ladder = if *which != Which::Psd {
                let mut opts = LadderOptions::new(cli.seed);
                opts.span = *ladder_span;
                Some(ladder_suite(&opts)?)
            } else {
                None
            };
            if let (Some(path), Some(p)) = (dump_path, &psd) {
                let coeffs = compute_coefficients(&s.particle, &s.beam);
                let (sc, ab) = photons::simulate_photon_streams(&coeffs, &s.beam, p.duration, cli.seed)?;
                let recs = dump::records(&sc, &ab, &s.beam);
                dump::write_dump(BufWriter::new(File::create(path)?), &recs)?;
            }
            let passed = psd.as_ref().is_none_or(PsdSuite::passed) && ladder.as_ref().is_none_or(LadderSuite::passed);
            let text = match format_of(cli, Format::Text)? {
                Format::Text => oracle_text(&psd, &ladder),
                Format::Json => {
                    let mut m = serde_json::Map::new();
                    m.insert("passed".into(), passed.into());
                    if let Some(p) = &psd {
                        m.insert("psd".into(), report::to_value(p)?);
                    }
                    if let Some(l) = &ladder {
                        m.insert("ladder".into(), report::to_value(l)?);
                    }
                    json_string(&serde_json::Value::Object(m))
                }
                Format::Csv => {
                    let rows: Vec<serde_json::Value> = psd
                        .iter()
                        .flat_map(|p| p.checks.iter())
                        .chain(ladder.iter().flat_map(|l| l.checks.iter()))
                        .map(report::to_value)
                        .collect::<Result<_>>()?;
                    report::table_csv(&rows)?
                }
            };
            emit(&cli.out, &text)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Regression { case } => {
            let cases = parse_cases(case)?;
            let table = regression(&cases)?;
            let text = match format_of(cli, Format::Text)? {
                Format::Text => table_text(&table),
                Format::Json => json_string(&report::to_value(&table)?),
                Format::Csv => {
                    let rows: Vec<serde_json::Value> =
                        table.rows.iter().map(report::to_value).collect::<Result<_>>()?;
                    report::table_csv(&rows)?
                }
            };
            emit(&cli.out, &text)?;
            Ok(if table.tier_one_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Parameters => {
            let text: String = PARAMETERS
                .iter()
                .map(|(n, d)| format!("{n:<12} {d}\n"))
                .collect();
            emit(&cli.out, &text)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{}", json_string(&error_value(&e)));
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
