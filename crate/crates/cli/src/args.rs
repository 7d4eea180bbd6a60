use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gclab::experiments::PerturbationSpec;
use gclab::genericity::DEFAULT_TOL;

#[derive(Parser, Debug)]
#[command(name = "gclab", version, about = "Generic-condition laboratory for Lorentzian metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Genericity verdict for one tangent vector.
    CheckVector(CheckVectorArgs),
    /// Integrate a geodesic and report where the genericity magnitude vanishes.
    ScanGeodesic(ScanArgs),
    /// Fiber surjectivity, c-map ranks, codimensions and the threshold inequality.
    Verify(VerifyArgs),
    /// Rank of the fiber map and the right-inverse identity.
    VerifySurjectivity(SurjectivityArgs),
    /// Ranks of the c-maps over random metrics and vectors.
    VerifyCodim(CodimArgs),
    /// Monte Carlo genericity census over a chart.
    Census(CensusArgs),
    /// List the built-in charts.
    Catalog(CatalogArgs),
    /// Smallest order r passing the dimension count, per dimension.
    Threshold(ThresholdArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Human,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ChartArgs {
    /// Built-in chart id (see `gclab catalog`).
    #[arg(long, conflicts_with = "chart")]
    pub catalog: Option<String>,
    /// Chart file.
    #[arg(long)]
    pub chart: Option<PathBuf>,
    /// Random polynomial perturbation `eps:degree:seed`; the base defaults to minkowski4.
    #[arg(long, value_name = "EPS:DEG:SEED", value_parser = parse_perturb)]
    pub perturb: Option<PerturbationSpec>,
}

#[derive(Args, Debug)]
pub struct CheckVectorArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    /// Base point, comma separated; defaults to the chart's reference point.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub point: Option<::std::vec::Vec<f64>>,
    /// Vector components, comma separated.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub vector: ::std::vec::Vec<f64>,
    /// Highest derivative order tested.
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub point: Option<::std::vec::Vec<f64>>,
    /// Initial velocity; a random unit timelike vector when omitted.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    pub vector: Option<::std::vec::Vec<f64>>,
    /// Parameter window `t0,t1`.
    #[arg(long, value_parser = parse_span, allow_hyphen_values = true, default_value = "0,1")]
    pub t_span: (f64, f64),
    #[arg(long, default_value_t = 1e-2, value_parser = parse_step)]
    pub step: f64,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    /// Seed for the random initial velocity.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the annotated trace as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub r: u64,
    /// Random right-inverse trials on top of the basis.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SurjectivityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub r: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CodimArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), default_value_t = 1)]
    pub r: u64,
    /// Random (g, X) pairs per causal class.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[command(flatten)]
    pub chart: ChartArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_samples: u64,
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = parse_tol)]
    pub tol: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampling box `lo:hi` per axis, comma separated; one pair applies to every axis.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub sample_box: Option<::std::vec::Vec<(f64, f64)>>,
    /// Write the per-vector CSV here.
    #[arg(long)]
    pub dump_samples: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// Print the chart file of one entry.
    #[arg(long)]
    pub show: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ThresholdArgs {
    /// Single dimension; a table for 3..=8 when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub n: Option<u64>,
    /// Order to check; the threshold itself when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub r: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Err("empty list".to_string());
    }
    s.split(',').map(parse_f64).collect()
}

fn parse_span(s: &str) -> Result<(f64, f64), String> {
    match *parse_list(s)?.as_slice() {
        [a, b] if a < b => Ok((a, b)),
        [_, _] => Err("t0 must be below t1".to_string()),
        _ => Err("expected t0,t1".to_string()),
    }
}

fn parse_positive(s: &str, what: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{what} must be positive"))
    }
}

fn parse_tol(s: &str) -> Result<f64, String> {
    parse_positive(s, "tol")
}

fn parse_step(s: &str) -> Result<f64, String> {
    parse_positive(s, "step")
}

fn parse_perturb(s: &str) -> Result<PerturbationSpec, String> {
    s.parse()
}

pub fn parse_box(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',')
        .map(|pair| {
            let (lo, hi) = pair
                .split_once(':')
                .ok_or_else(|| format!("expected lo:hi, got `{pair}`"))?;
            let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
            if lo < hi {
                Ok((lo, hi))
            } else {
                Err(format!("empty interval `{pair}`"))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn literals() {
        assert_eq!(parse_list("1, -2,3e-1").unwrap(), vec![1.0, -2.0, 0.3]);
        assert!(parse_list("1,,2").is_err());
        assert!(parse_list("1,nan").is_err());
        assert_eq!(parse_span("-1,2").unwrap(), (-1.0, 2.0));
        assert!(parse_span("2,1").is_err());
        assert_eq!(parse_box("-1:1,0:2").unwrap(), vec![(-1.0, 1.0), (0.0, 2.0)]);
        assert!(parse_box("1:1").is_err());
        assert!(parse_tol("0").is_err());
    }
}
