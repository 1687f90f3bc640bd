//! `zdshift`: sample, compress, and analyze d-dimensional symbol arrays.
//!
//! Exit codes: 0 on success, 1 on data errors (reported on stderr), 2 on
//! usage errors.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use zdshift::codec::{decode, encode, EncodeOptions, EncodedPattern, ModeChoice};
use zdshift::entropy::{
    complexity_density_with, counting_census, information_density, plugin_block_entropy, tsv_header,
    tsv_row,
};
use zdshift::lattice::{scan_order, LatticeKind, LatticeSpec, Window};
use zdshift::measures::{parse_measure_file, AnalyticMeasure};
use zdshift::pattern::Pattern;
use zdshift::pressure::{estimate_pressure, parse_potential_file, transfer_matrix_pressure};

#[derive(Parser)]
#[command(
    name = "zdshift",
    version,
    about = "Block-frequency compression and entropy estimation for d-dimensional symbol arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    /// Windows are the boxes {0..n-1}^d.
    Onesided,
    /// Windows are the centered boxes {-(n-1)..n-1}^d.
    Twosided,
}

impl From<KindArg> for LatticeKind {
    fn from(k: KindArg) -> LatticeKind {
        match k {
            KindArg::Onesided => LatticeKind::OneSided,
            KindArg::Twosided => LatticeKind::TwoSided,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    /// Dense census when the block space is small, sparse otherwise.
    Auto,
    Dense,
    Sparse,
}

impl From<ModeArg> for ModeChoice {
    fn from(m: ModeArg) -> ModeChoice {
        match m {
            ModeArg::Auto => ModeChoice::Auto,
            ModeArg::Dense => ModeChoice::Dense,
            ModeArg::Sparse => ModeChoice::Sparse,
        }
    }
}

#[derive(Args, Debug)]
struct GeometryArgs {
    /// Lattice dimension.
    #[arg(long, default_value_t = 1)]
    d: u8,
    /// Window style.
    #[arg(long, value_enum, default_value_t = KindArg::Onesided)]
    kind: KindArg,
}

impl GeometryArgs {
    fn spec(&self) -> Result<LatticeSpec> {
        Ok(LatticeSpec::new(self.d, self.kind.into())?)
    }
}

#[derive(Args, Debug, Default)]
struct MeasureArgs {
    /// Measure family: bernoulli or markov1d.
    #[arg(long)]
    measure: Option<String>,
    /// Comma-separated symbol probabilities (bernoulli).
    #[arg(long)]
    probs: Option<String>,
    /// Transition matrix rows separated by ';', entries by ',' (markov1d).
    #[arg(long)]
    transition: Option<String>,
    /// Text file describing the measure (measure=..., probs=.../row=...).
    #[arg(long)]
    measure_file: Option<PathBuf>,
}

impl MeasureArgs {
    fn build(&self) -> Result<Option<AnalyticMeasure>> {
        if let Some(path) = &self.measure_file {
            if self.measure.is_some() || self.probs.is_some() || self.transition.is_some() {
                bail!("--measure-file excludes the inline measure flags");
            }
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            return Ok(Some(parse_measure_file(&text)?));
        }
        let Some(kind) = &self.measure else {
            if self.probs.is_some() || self.transition.is_some() {
                bail!("--probs/--transition need --measure");
            }
            return Ok(None);
        };
        let mu = match kind.as_str() {
            "bernoulli" => {
                let probs = self
                    .probs
                    .as_deref()
                    .context("--measure bernoulli needs --probs")?;
                AnalyticMeasure::bernoulli(parse_numbers(probs)?)?
            }
            "markov1d" => {
                let rows = self
                    .transition
                    .as_deref()
                    .context("--measure markov1d needs --transition")?;
                let transition = rows
                    .split(';')
                    .map(parse_numbers)
                    .collect::<Result<Vec<_>>>()?;
                AnalyticMeasure::markov1d(transition)?
            }
            other => bail!("unknown measure family {other:?} (want bernoulli or markov1d)"),
        };
        Ok(Some(mu))
    }

    fn required(&self) -> Result<AnalyticMeasure> {
        self.build()?
            .context("a measure is required: --measure ... or --measure-file ...")
    }
}

fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .with_context(|| format!("bad number {s:?}"))
        })
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// Print the window sites in scan order, one `site index` pair per line.
    Scan {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Window radius.
        #[arg(long)]
        n: u32,
    },
    /// Draw a pattern from a measure and write it as a pattern file.
    Sample {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Window radius.
        #[arg(long)]
        n: u32,
        /// Generator seed; equal seeds reproduce the pattern exactly.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        measure: MeasureArgs,
        /// Output pattern file.
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Compress a pattern file; prints a field-by-field bit report.
    Encode {
        /// Input pattern file.
        #[arg(short = 'i', long, value_name = "FILE")]
        input: PathBuf,
        /// Output compressed file.
        #[arg(short = 'o', long)]
        out: PathBuf,
        /// Block radius.
        #[arg(long)]
        m: u32,
        /// Census mode.
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Block-space size limit for the dense census.
        #[arg(long)]
        dense_threshold: Option<u64>,
    },
    /// Expand a compressed file back into a pattern file.
    Decode {
        /// Input compressed file.
        #[arg(short = 'i', long, value_name = "FILE")]
        input: PathBuf,
        /// Output pattern file.
        #[arg(short = 'o', long)]
        out: PathBuf,
    },
    /// Entropy estimates for a pattern file, as TSV.
    Entropy {
        /// Input pattern file.
        #[arg(short = 'i', long, value_name = "FILE")]
        input: PathBuf,
        /// Block radius (or comma-separated radii) for the block-census
        /// estimators.
        #[arg(long)]
        m: String,
        #[command(flatten)]
        measure: MeasureArgs,
    },
    /// Compressed payload bits per site of a pattern file.
    Kdensity {
        /// Input pattern file.
        #[arg(short = 'i', long, value_name = "FILE")]
        input: PathBuf,
        /// Block radius.
        #[arg(long)]
        m: u32,
    },
    /// Exhaustive payload-length histogram over every pattern on a window.
    Census {
        #[command(flatten)]
        geometry: GeometryArgs,
        /// Window radius.
        #[arg(long)]
        n: u32,
        /// Alphabet size.
        #[arg(long)]
        sigma: u16,
        /// Block radius.
        #[arg(long)]
        m: u32,
    },
    /// Exact pressure of a pair potential, and an optional sample-based
    /// check of the variational principle.
    Pressure {
        /// Pair potential file: `a b value` lines covering every pair.
        #[arg(long)]
        potential: PathBuf,
        /// Window style of the potential's lattice (dimension is 1).
        #[arg(long, value_enum, default_value_t = KindArg::Onesided)]
        kind: KindArg,
        /// Pattern files to evaluate against the potential.
        #[arg(long = "sample", value_name = "FILE")]
        samples: Vec<PathBuf>,
        /// Block radius for the samples' code-rate estimate.
        #[arg(long, default_value_t = 4)]
        m: u32,
    },
}

fn read_pattern(path: &PathBuf) -> Result<Pattern> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Pattern::from_bytes(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Scan { geometry, n } => {
            let spec = geometry.spec()?;
            for (i, site) in scan_order(spec, n)?.iter().enumerate() {
                println!("{site} {i}");
            }
        }
        Command::Sample {
            geometry,
            n,
            seed,
            measure,
            out,
        } => {
            let spec = geometry.spec()?;
            let window = Window::new(spec, n)?;
            let mu = measure.required()?;
            let p = mu.sample(window, seed)?;
            fs::write(&out, p.to_bytes())
                .with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Encode {
            input,
            out,
            m,
            mode,
            dense_threshold,
        } => {
            let p = read_pattern(&input)?;
            let mut options = EncodeOptions {
                mode: mode.into(),
                ..EncodeOptions::default()
            };
            if let Some(t) = dense_threshold {
                options.dense_threshold = t;
            }
            let enc = encode(&p, m, &options)?;
            let report = enc.report.expect("encode fills the report");
            fs::write(&out, enc.to_bytes())
                .with_context(|| format!("writing {}", out.display()))?;
            println!("field\tvalue");
            println!("mode\t{}", enc.mode);
            println!("bits_x\t{}", report.bits_x);
            println!("bits_y\t{}", report.bits_y);
            println!("bits_z\t{}", report.bits_z);
            println!("bits_header\t{}", report.bits_header);
            println!("payload\t{}", report.payload());
            println!("total\t{}", report.total);
        }
        Command::Decode { input, out } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            let enc = EncodedPattern::from_bytes(&bytes)
                .with_context(|| format!("parsing {}", input.display()))?;
            let p = decode(&enc)?;
            fs::write(&out, p.to_bytes())
                .with_context(|| format!("writing {}", out.display()))?;
        }
        Command::Entropy { input, m, measure } => {
            let p = read_pattern(&input)?;
            let spec = p.spec();
            let radii: Vec<u32> = m
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .with_context(|| format!("bad block radius {s:?}"))
                })
                .collect::<Result<_>>()?;
            if radii.is_empty() {
                bail!("--m needs at least one block radius");
            }
            println!("{}", tsv_header());
            let options = EncodeOptions::default();
            for &radius in &radii {
                println!("{}", tsv_row(&plugin_block_entropy(&p, radius)?, spec, None));
                println!(
                    "{}",
                    tsv_row(&complexity_density_with(&p, radius, &options)?, spec, None)
                );
            }
            if let Some(mu) = measure.build()? {
                println!("{}", tsv_row(&information_density(&p, &mu)?, spec, None));
            }
        }
        Command::Kdensity { input, m } => {
            let p = read_pattern(&input)?;
            let est = complexity_density_with(&p, m, &EncodeOptions::default())?;
            println!("{:.6}", est.value);
        }
        Command::Census {
            geometry,
            n,
            sigma,
            m,
        } => {
            let spec = geometry.spec()?;
            let census = counting_census(spec, n, sigma, m)?;
            println!("payload_bits\tcount");
            for (bits, count) in census {
                println!("{bits}\t{count}");
            }
        }
        Command::Pressure {
            potential,
            kind,
            samples,
            m,
        } => {
            let spec = LatticeSpec::new(1, kind.into())?;
            let text = fs::read_to_string(&potential)
                .with_context(|| format!("reading {}", potential.display()))?;
            let psi = parse_potential_file(&text, spec)?;
            let exact = transfer_matrix_pressure(&psi)?;
            println!("pressure\t{:.6}", exact.pressure);
            println!("eigenvalue\t{:.6}", exact.eigenvalue);
            for (i, row) in exact.transition.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
                println!("transition\t{i}\t{}", cells.join(","));
            }
            if !samples.is_empty() {
                let mut labelled = Vec::new();
                for path in &samples {
                    labelled.push((path.display().to_string(), read_pattern(path)?));
                }
                let report = estimate_pressure(&labelled, &psi, m, Some(exact.pressure))?;
                println!();
                print!("{}", report.to_tsv());
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
