use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vecfilt::bench::{self, BenchConfig};
use vecfilt::io::{read_image, write_image};
use vecfilt::noise::{corrupt, NoiseConfig, NoiseModel};
use vecfilt::registry::{self, apply_filter, FilterSpec, FILTERS};
use vecfilt::{AcosMode, Error};

#[derive(Parser)]
#[command(name = "vecfilt", version, about = "Impulse-noise filters for color images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Acos {
    Approx,
    Ref,
}

impl From<Acos> for AcosMode {
    fn from(a: Acos) -> Self {
        match a {
            Acos::Approx => AcosMode::Approximate,
            Acos::Ref => AcosMode::Reference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Uncorrelated,
    Correlated,
}

impl From<Model> for NoiseModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Uncorrelated => NoiseModel::Uncorrelated,
            Model::Correlated => NoiseModel::Correlated,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the filter names with their family tags.
    List,
    /// Filter one image.
    Apply {
        #[arg(long)]
        filter: String,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "approx")]
        acos: Acos,
        /// Parameter override, `key=value`. Repeatable.
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
    },
    /// Add impulsive noise to an image.
    Corrupt {
        #[arg(long, value_enum)]
        model: Model,
        /// Corruption probability.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.25)]
        p1: f64,
        #[arg(long, default_value_t = 0.25)]
        p2: f64,
        #[arg(long, default_value_t = 0.25)]
        p3: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare a filtered image to its reference.
    Evaluate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Corrupt, filter and score every image in a directory.
    Bench {
        #[arg(long)]
        images: PathBuf,
        /// `all` or a comma-separated list of names.
        #[arg(long, default_value = "all")]
        filters: String,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "uncorrelated,correlated")]
        models: Vec<Model>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.10,0.15")]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "approx")]
        acos: Acos,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Run filters sequentially and record wall time.
        #[arg(long)]
        timed: bool,
        /// Add rows for the unfiltered noisy image (filter `none`).
        #[arg(long)]
        baseline: bool,
    },
    /// Average rankings from a results CSV.
    Rank {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::WindowSize(_)
        | Error::UnknownFilter(_)
        | Error::FilterParam { .. }
        | Error::NoiseConfig(_)
        | Error::BenchConfig(_) => 1,
        Error::Ppm { .. }
        | Error::Io { .. }
        | Error::Csv(_)
        | Error::Json(_)
        | Error::UnsupportedFormat(_)
        | Error::NoImages
        | Error::DimensionMismatch { .. }
        | Error::NcdUndefined => 2,
        Error::EmptyImage { .. } | Error::PixelCount { .. } => 3,
    }
}

/// `%g`-style formatting with 6 significant digits.
fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..6).contains(&exp) {
        return sci;
    }
    let s = format!("{:.*}", (5 - exp).max(0) as usize, v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn run(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::List => {
            for f in &FILTERS {
                println!("{}\t{}", f.name, f.family.tag());
            }
        }
        Command::Apply {
            filter,
            input,
            output,
            window,
            p,
            acos,
            params,
        } => {
            let mut spec = FilterSpec::new(filter).with_p(p).with_acos(acos.into());
            for kv in &params {
                spec.set_param_str(kv)?;
            }
            let img = read_image(&input)?;
            write_image(&output, &apply_filter(&img, &spec, window)?)?;
        }
        Command::Corrupt {
            model,
            p,
            p1,
            p2,
            p3,
            seed,
            input,
            output,
        } => {
            let mut cfg = NoiseConfig::new(model.into(), p, seed);
            cfg.phi_k = [p1, p2, p3];
            cfg.validate()?;
            let img = read_image(&input)?;
            write_image(&output, &corrupt(&img, &cfg)?)?;
        }
        Command::Evaluate { reference, test } => {
            let m = vecfilt::evaluate(&read_image(&reference)?, &read_image(&test)?)?;
            println!("mae={} mse={} ncd={}", sig6(m.mae), sig6(m.mse), sig6(m.ncd));
        }
        Command::Bench {
            images,
            filters,
            models,
            levels,
            seed,
            window,
            p,
            acos,
            out,
            report,
            timed,
            baseline,
        } => {
            let filters = if filters == "all" {
                registry::names().map(String::from).collect()
            } else {
                filters.split(',').map(|s| s.trim().to_string()).collect()
            };
            let cfg = BenchConfig {
                images: bench::collect_images(&images)?,
                filters,
                models: models.into_iter().map(Into::into).collect(),
                levels,
                seed,
                window,
                p,
                acos: acos.into(),
                timed,
                baseline,
            };
            if cfg.images.is_empty() {
                return Err(Error::NoImages);
            }
            let run = bench::run_benchmark(&cfg)?;
            bench::write_rows_csv(&out, &run.rows)?;
            if let Some(path) = report {
                bench::write_report_json(&path, &cfg, &run)?;
            }
            for f in &run.failures {
                eprintln!("skipped {}: {}", f.image, f.message);
            }
            log::info!("{} rows written to {}", run.rows.len(), out.display());
        }
        Command::Rank { input, out } => {
            let table = bench::aggregate_rankings(&bench::read_rows_csv(&input)?);
            bench::write_ranks_csv(&out, &table)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
