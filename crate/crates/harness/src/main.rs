use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diskroute_core::scheme::{BuildParams, DEFAULT_ALPHA};
use diskroute_core::strategy::AutoPolicy;
use diskroute_harness::commands::{
    cmd_build, cmd_gen, cmd_route, cmd_verify, load_scheme, load_sites, read_text, route_pairs, suite_rows,
    write_output, BuildConfig, InputSource,
};
use diskroute_harness::pairs::{parse_pair, PairSpec};
use diskroute_harness::report::{write_rows, write_traces, Format};
use diskroute_harness::verify::VerifyOptions;
use diskroute_harness::{HarnessError, EXIT_OK, EXIT_USAGE};

/// Compact routing in unit disk graphs.
#[derive(Parser)]
#[command(name = "diskroute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Instance file; when absent, sites are generated from --generator/--n/--seed.
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value = "uniform-square")]
    generator: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Input {
    fn source(&self) -> InputSource {
        InputSource {
            instance: self.instance.clone(),
            generator: self.generator.clone(),
            n: self.n,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct Params {
    #[arg(long, default_value_t = 1.0)]
    eps: f64,
    /// Fixed separation parameter (at least 13) instead of the derived one.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

impl Params {
    fn build_params(&self) -> BuildParams {
        let p = BuildParams::new(self.eps).with_alpha(self.alpha);
        match self.c {
            Some(c) => p.with_c(c),
            None => p,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance.
    Gen {
        #[arg(long, default_value = "uniform-square")]
        generator: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Preprocess an instance into a scheme file.
    Build {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        params: Params,
        /// `auto` or one of compact, direct, extended, components.
        #[arg(long, default_value = "auto")]
        kind: String,
        #[arg(long, default_value_t = AutoPolicy::default().density_threshold)]
        density_threshold: usize,
        /// Scheme file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Build report (one row, with preprocessing time).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Route pairs with a scheme file and compare against shortest paths.
    Route {
        #[arg(long)]
        scheme: PathBuf,
        #[command(flatten)]
        input: Input,
        /// `all` or a number of sampled pairs.
        #[arg(long, default_value = "all")]
        pairs: String,
        /// Explicit pair `S,T`; repeatable, overrides --pairs.
        #[arg(long = "pair")]
        pair: Vec<String>,
        #[arg(long)]
        step_limit: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build and run every invariant suite.
    Verify {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        params: Params,
        #[arg(long, default_value = "all")]
        pairs: String,
        #[arg(long)]
        skip_net: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Gen {
            generator,
            n,
            seed,
            out,
        } => write_output(out.as_deref(), cmd_gen(&generator, n, seed)?.as_bytes()),
        Command::Build {
            input,
            params,
            kind,
            density_threshold,
            out,
            report,
            format,
        } => {
            let sites = load_sites(&input.source())?;
            let cfg = BuildConfig {
                params: params.build_params(),
                kind: &kind,
                policy: AutoPolicy { density_threshold },
            };
            let built = cmd_build(&sites, &cfg)?;
            log::info!(
                "built {} scheme in {:.1} ms",
                built.router.kind(),
                built.report.prep_ms.unwrap_or(0.0)
            );
            write_output(out.as_deref(), built.file.to_json()?.as_bytes())?;
            if let Some(path) = report {
                let mut buf = Vec::new();
                write_rows(&[built.report], format, &mut buf)?;
                write_output(Some(&path), &buf)?;
            }
            Ok(())
        }
        Command::Route {
            scheme,
            input,
            pairs,
            pair,
            step_limit,
            format,
            out,
        } => {
            let sites = load_sites(&input.source())?;
            let router = load_scheme(&read_text(&scheme)?, &sites)?;
            let explicit = pair.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>, _>>()?;
            let spec: PairSpec = pairs.parse()?;
            let list = route_pairs(&sites, spec, &explicit, input.seed)?;
            let report = cmd_route(router.as_ref(), &sites, &list, step_limit)?;
            let mut buf = Vec::new();
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut buf, &report)?;
                    buf.push(b'\n');
                }
                Format::Csv => {
                    write_traces(&report.records, format, &mut buf)?;
                    // the summary goes to stdout when the records go to a file
                    if out.is_some() {
                        let mut summary = Vec::new();
                        write_rows(std::slice::from_ref(&report.summary), format, &mut summary)?;
                        write_output(None, &summary)?;
                    }
                }
            }
            write_output(out.as_deref(), &buf)
        }
        Command::Verify {
            input,
            params,
            pairs,
            skip_net,
            format,
            out,
        } => {
            let sites = load_sites(&input.source())?;
            let opts = VerifyOptions {
                params: params.build_params(),
                pairs: pairs.parse()?,
                seed: input.seed,
                skip_net,
            };
            let report = cmd_verify(&sites, &opts)?;
            eprint!("{}", report.render());
            if let Some(path) = out {
                let mut buf = Vec::new();
                match format {
                    Format::Json => {
                        serde_json::to_writer_pretty(&mut buf, &report)?;
                        buf.push(b'\n');
                    }
                    Format::Csv => write_rows(&suite_rows(&report), format, &mut buf)?,
                }
                write_output(Some(&path), &buf)?;
            }
            if report.passed() {
                Ok(())
            } else {
                Err(HarnessError::InvariantFailure {
                    failed: report.failed(),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
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
