//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use expurgated::curves::{curve_triple, default_rate_grid, CurveConfig, ExponentCurve};
use expurgated::ensemble::{moment_report, EnumeratorModel, MomentMode};
use expurgated::export::{curve_csv, curves_json, fmt_sig, in_units, Units};
use expurgated::gaussian::{gaussian_exponent_curve, gaussian_r1, GaussianParams};
use expurgated::numeric::linear_grid;
use expurgated::rate_distortion::{joint_oracle, RdProblem};
use expurgated::{ChannelSpec, Error, ExponentInputs, InputDistribution};

const EXIT_PARSE: u8 = 2;
const EXIT_INVALID: u8 = 3;

/// Expurgated error exponents: Gallager, CKM and the Chernoff-improved bound.
#[derive(Debug, Parser)]
#[command(name = "expurgated", version)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    /// Read and write rates and exponents in bits instead of nats.
    #[arg(long, global = true)]
    bits: bool,

    /// Omit the timestamp so repeated runs are byte-identical.
    #[arg(long, global = true)]
    reproducible: bool,

    /// Seed for Monte Carlo runs.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single-letter exponent functions at given ρ (and optionally rates).
    Exponent(ExponentArgs),
    /// The three expurgated curves for a channel, or the Gaussian curve.
    Curve(CurveArgs),
    /// Closed-form Gaussian exponent curve.
    Gaussian(GaussianArgs),
    /// Fractional moment of the type enumerator versus its two-branch formula.
    Mc(McArgs),
    /// Side-by-side curves with the brute-force CKM value (|X| <= 3).
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Channel file: {"transition": [[...]], "input": [...]}.
    #[arg(long)]
    channel: PathBuf,

    /// Input distribution, e.g. "0.9,0.1"; overrides the file.
    #[arg(long)]
    q: Option<String>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Upper end of the ρ search.
    #[arg(long, default_value_t = 1e4)]
    rho_max: f64,

    /// Argument tolerance of the golden-section searches.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Fixed Chernoff parameter for the improved bound.
    #[arg(long, conflicts_with = "optimize_s")]
    s: Option<f64>,

    /// Optimize the Chernoff parameter (the default).
    #[arg(long)]
    optimize_s: bool,
}

#[derive(Debug, Args)]
struct ExponentArgs {
    #[command(flatten)]
    channel: ChannelArgs,

    /// Comma-separated ρ values.
    #[arg(long, default_value = "1")]
    rho: String,

    /// Chernoff parameter for E_G and E.
    #[arg(long, default_value_t = 0.5)]
    s: f64,

    /// Also optimize over ρ at these rates, as min:max:count.
    #[arg(long)]
    rates: Option<String>,

    /// Upper end of the ρ search.
    #[arg(long, default_value_t = 1e4)]
    rho_max: f64,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Channel file (not needed with --gaussian).
    #[arg(long, required_unless_present = "gaussian")]
    channel: Option<PathBuf>,

    /// Input distribution, e.g. "0.9,0.1"; overrides the file.
    #[arg(long)]
    q: Option<String>,

    /// Gaussian curve instead, e.g. --gaussian S=1 sigma2=1.
    #[arg(long, num_args = 2, value_names = ["S=..", "sigma2=.."], conflicts_with = "channel")]
    gaussian: Option<Vec<String>>,

    /// Rate grid min:max:count; default spans both phases and the zero region.
    #[arg(long)]
    rates: Option<String>,

    #[command(flatten)]
    search: SearchArgs,

    /// Also sweep binary inputs q(1) = 0.05, 0.10, ..., 0.95 and report the
    /// best one per rate.
    #[arg(long)]
    sweep_q: bool,

    /// Write one file per curve into this directory instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GaussianArgs {
    /// Input power S.
    #[arg(long, default_value_t = 1.0)]
    power: f64,

    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,

    /// Rate grid min:max:count; default spans both phases and the zero region.
    #[arg(long)]
    rates: Option<String>,

    /// Write the curve into this directory instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Args)]
struct McArgs {
    /// Blocklength.
    #[arg(long)]
    n: usize,

    /// Code rate R.
    #[arg(long)]
    rate: f64,

    /// Pairwise type exponent I.
    #[arg(long)]
    type_exponent: f64,

    /// Moment order ρ (the moment is E[N^(1/ρ)]).
    #[arg(long, default_value_t = 2.0)]
    rho: f64,

    /// Exact binomial summation (M <= 2^20) or seeded Monte Carlo.
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,

    /// Monte Carlo trials (at least 10000).
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    channel: ChannelArgs,

    /// Rate grid min:max:count; default spans both phases and the zero region.
    #[arg(long)]
    rates: Option<String>,

    #[command(flatten)]
    search: SearchArgs,

    /// Points per free coordinate of the brute-force scan.
    #[arg(long, default_value_t = 400)]
    oracle_grid: usize,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let mut message = e.to_string();
        if matches!(e, Error::TooManyCodewords(_)) {
            message.push_str(" (try --mode monte-carlo)");
        }
        Self::invalid(message)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Output {
    format: Format,
    units: Units,
    stamp: Option<u64>,
}

pub fn run(cli: Cli) -> ExitCode {
    let out = Output {
        format: cli.format,
        units: if cli.bits { Units::Bits } else { Units::Nats },
        stamp: (!cli.reproducible).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        }),
    };
    let result = match cli.command {
        Command::Exponent(a) => cmd_exponent(&a, &out),
        Command::Curve(a) => cmd_curve(&a, &out),
        Command::Gaussian(a) => cmd_gaussian(&a, &out),
        Command::Mc(a) => cmd_mc(&a, &out, cli.seed),
        Command::Compare(a) => cmd_compare(&a, &out),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn load_inputs(path: &Path, q: Option<&str>) -> CliResult<ExponentInputs> {
    let text = fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let spec: ChannelSpec =
        serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
    let (channel, mut input) = spec.build()?;
    if let Some(q) = q {
        input = InputDistribution::new(parse_list(q, "--q")?)?.for_channel(&channel)?;
    }
    Ok(ExponentInputs::new(channel, input)?)
}

fn parse_list(text: &str, flag: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::parse(format!("{flag}: cannot parse {t:?} as a number")))
        })
        .collect()
}

/// `min:max:count` in the output units, returned in nats.
fn parse_rates(text: &str, units: Units) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::parse(format!("--rates: expected min:max:count, got {text:?}")));
    }
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::parse(format!("--rates: cannot parse {t:?}")))
    };
    let (lo, hi) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| CliError::parse(format!("--rates: cannot parse count {:?}", parts[2])))?;
    if count < 2 {
        return Err(CliError::invalid(format!("--rates: grid needs at least 2 points, got {count}")));
    }
    if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
        return Err(CliError::invalid(format!("--rates: need 0 <= min < max, got {lo}:{hi}")));
    }
    let f = units.to_nats();
    Ok(linear_grid(lo * f, hi * f, count))
}

fn curve_config(search: &SearchArgs) -> CliResult<CurveConfig> {
    if !(search.tol > 0.0) {
        return Err(CliError::invalid(format!("--tol must be positive, got {}", search.tol)));
    }
    if !(search.rho_max >= 1.0) {
        return Err(CliError::invalid(format!("--rho-max must be >= 1, got {}", search.rho_max)));
    }
    if let Some(s) = search.s {
        if !(0.0..=1.0).contains(&s) {
            return Err(CliError::invalid(format!("--s must lie in [0, 1], got {s}")));
        }
    }
    Ok(CurveConfig {
        rho_max: search.rho_max,
        tol: search.tol,
        fixed_s: if search.optimize_s { None } else { search.s },
    })
}

fn csv_table<const N: usize>(header: [&str; N], rows: &[[f64; N]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|&v| fmt_sig(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

fn stamp_line(out: &Output) -> String {
    out.stamp.map(|t| format!("# generated_at={t}\n")).unwrap_or_default()
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_exponent(a: &ExponentArgs, out: &Output) -> CliResult<String> {
    let inputs = load_inputs(&a.channel.channel, a.channel.q.as_deref())?;
    if !(0.0..=1.0).contains(&a.s) {
        return Err(CliError::invalid(format!("--s must lie in [0, 1], got {}", a.s)));
    }
    let f = 1.0 / out.units.to_nats();
    let mut rows = Vec::new();
    for rho in parse_list(&a.rho, "--rho")? {
        if !(rho >= 1.0) {
            return Err(CliError::invalid(format!("--rho must be >= 1, got {rho}")));
        }
        let best = inputs.ckm_e_best_s(rho)?;
        rows.push([
            rho,
            a.s,
            inputs.gallager_e0(rho)? * f,
            inputs.gallager_eg(rho, a.s)? * f,
            inputs.ckm_e(rho, a.s)? * f,
            best.value * f,
            best.arg,
        ]);
    }
    let header = ["rho", "s", "E0", "EG", "E", "E_best", "s_star"];
    let rate_rows = match &a.rates {
        Some(spec) => {
            let rates = parse_rates(spec, out.units)?;
            let cfg = CurveConfig {
                rho_max: a.rho_max,
                ..CurveConfig::default()
            };
            let [g, c, n] = curve_triple(&inputs, Some(&rates), &cfg)?;
            Some(
                (0..rates.len())
                    .map(|i| {
                        let p = n.points[i];
                        [rates[i] * f, g.points[i].value * f, c.points[i].value * f, p.value * f, p.rho_star, p.s_star]
                    })
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let rate_header = ["R", "gallager", "ckm_bhatt", "chernoff_new", "rho_star", "s_star"];
    Ok(match out.format {
        Format::Csv => {
            let mut s = stamp_line(out) + &csv_table(header, &rows);
            if let Some(r) = &rate_rows {
                s.push('\n');
                s += &csv_table(rate_header, r);
            }
            s
        }
        Format::Json => {
            let objects = |h: &[&str], rs: &[[f64; 7]]| -> Vec<serde_json::Value> {
                rs.iter()
                    .map(|r| h.iter().zip(r).map(|(k, v)| (k.to_string(), json!(v))).collect())
                    .collect()
            };
            let mut doc = json!({
                "units": out.units,
                "points": objects(&header, &rows),
            });
            if let Some(r) = &rate_rows {
                doc["rates"] = r
                    .iter()
                    .map(|row| {
                        rate_header
                            .iter()
                            .zip(row)
                            .map(|(k, v)| (k.to_string(), json!(v)))
                            .collect::<serde_json::Map<_, _>>()
                            .into()
                    })
                    .collect::<Vec<serde_json::Value>>()
                    .into();
            }
            if let Some(t) = out.stamp {
                doc["generated_at"] = json!(t);
            }
            to_json(&doc)
        }
    })
}

fn parse_gaussian(tokens: &[String]) -> CliResult<GaussianParams> {
    let (mut s, mut n) = (None, None);
    for t in tokens {
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| CliError::parse(format!("--gaussian: expected key=value, got {t:?}")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::parse(format!("--gaussian: cannot parse {v:?}")))?;
        match k {
            "S" | "s" => s = Some(v),
            "sigma2" => n = Some(v),
            _ => return Err(CliError::parse(format!("--gaussian: unknown key {k:?}"))),
        }
    }
    match (s, n) {
        (Some(s), Some(n)) => Ok(GaussianParams::new(s, n)?),
        _ => Err(CliError::parse("--gaussian needs S=.. and sigma2=..")),
    }
}

fn gaussian_curve(p: &GaussianParams, rates: Option<&str>, units: Units) -> CliResult<ExponentCurve> {
    let grid = match rates {
        Some(spec) => parse_rates(spec, units)?,
        None => {
            let r1 = gaussian_r1(p);
            default_rate_grid(r1, expurgated::gaussian::gaussian_d_of_r(p, r1)?)
        }
    };
    Ok(gaussian_exponent_curve(p, &grid)?)
}

/// Writes curves to stdout text or to files in `dir`.
fn emit_curves(curves: &[ExponentCurve], out: &Output, dir: Option<&Path>) -> CliResult<String> {
    let converted: Vec<ExponentCurve> = curves.iter().map(|c| in_units(c, out.units)).collect();
    let files: Vec<(String, String)> = match out.format {
        Format::Csv => converted
            .iter()
            .map(|c| (format!("{}.csv", c.kind.name()), curve_csv(c, out.stamp)))
            .collect(),
        Format::Json => vec![("curves.json".into(), curves_json(&converted, out.units, out.stamp) + "\n")],
    };
    match dir {
        None => Ok(files.into_iter().map(|(_, body)| body).collect::<Vec<_>>().join("\n")),
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::parse(format!("{}: {e}", dir.display())))?;
            let mut listing = String::new();
            for (name, body) in files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
                listing.push_str(&format!("{}\n", path.display()));
            }
            Ok(listing)
        }
    }
}

#[derive(Serialize)]
struct SweepRow {
    rate: f64,
    best: [f64; 3],
    best_q1: [f64; 3],
}

/// Best binary input per rate and curve kind.
fn sweep_binary_inputs(inputs: &ExponentInputs, rates: &[f64], cfg: &CurveConfig) -> CliResult<Vec<SweepRow>> {
    if inputs.channel().input_size() != 2 {
        return Err(CliError::invalid("--sweep-q needs a binary-input channel"));
    }
    let mut rows: Vec<SweepRow> = rates
        .iter()
        .map(|&rate| SweepRow {
            rate,
            best: [f64::NEG_INFINITY; 3],
            best_q1: [f64::NAN; 3],
        })
        .collect();
    for step in 1..=19 {
        let q1 = 0.05 * step as f64;
        let trial = ExponentInputs::new(inputs.channel().clone(), InputDistribution::binary(q1)?)?;
        let curves = curve_triple(&trial, Some(rates), cfg)?;
        for (row_idx, row) in rows.iter_mut().enumerate() {
            for (k, c) in curves.iter().enumerate() {
                let v = c.points[row_idx].value;
                if v > row.best[k] {
                    row.best[k] = v;
                    row.best_q1[k] = q1;
                }
            }
        }
    }
    Ok(rows)
}

fn cmd_curve(a: &CurveArgs, out: &Output) -> CliResult<String> {
    if let Some(tokens) = &a.gaussian {
        let p = parse_gaussian(tokens)?;
        let curve = gaussian_curve(&p, a.rates.as_deref(), out.units)?;
        return emit_curves(&[curve], out, a.out_dir.as_deref());
    }
    let path = a.channel.as_ref().expect("clap requires --channel without --gaussian");
    let inputs = load_inputs(path, a.q.as_deref())?;
    let cfg = curve_config(&a.search)?;
    let rates = a.rates.as_deref().map(|r| parse_rates(r, out.units)).transpose()?;
    let curves = curve_triple(&inputs, rates.as_deref(), &cfg)?;
    let mut text = emit_curves(&curves, out, a.out_dir.as_deref())?;
    if a.sweep_q {
        let grid = curves[2].rates();
        let rows = sweep_binary_inputs(&inputs, &grid, &cfg)?;
        let f = 1.0 / out.units.to_nats();
        let body = match out.format {
            Format::Csv => csv_table(
                ["R", "gallager", "gallager_q1", "ckm_bhatt", "ckm_bhatt_q1", "chernoff_new", "chernoff_new_q1"],
                &rows
                    .iter()
                    .map(|r| {
                        [
                            r.rate * f,
                            r.best[0] * f,
                            r.best_q1[0],
                            r.best[1] * f,
                            r.best_q1[1],
                            r.best[2] * f,
                            r.best_q1[2],
                        ]
                    })
                    .collect::<Vec<_>>(),
            ),
            Format::Json => to_json(&json!({
                "units": out.units,
                "sweep": rows.iter().map(|r| json!({
                    "R": r.rate * f,
                    "gallager": r.best[0] * f, "gallager_q1": r.best_q1[0],
                    "ckm_bhatt": r.best[1] * f, "ckm_bhatt_q1": r.best_q1[1],
                    "chernoff_new": r.best[2] * f, "chernoff_new_q1": r.best_q1[2],
                })).collect::<Vec<_>>(),
            })),
        };
        match &a.out_dir {
            Some(dir) => {
                let ext = if out.format == Format::Csv { "csv" } else { "json" };
                let path = dir.join(format!("sweep_q.{ext}"));
                fs::write(&path, body).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
                text.push_str(&format!("{}\n", path.display()));
            }
            None => {
                text.push('\n');
                text.push_str(&body);
            }
        }
    }
    Ok(text)
}

fn cmd_gaussian(a: &GaussianArgs, out: &Output) -> CliResult<String> {
    let p = GaussianParams::new(a.power, a.sigma2)?;
    let curve = gaussian_curve(&p, a.rates.as_deref(), out.units)?;
    emit_curves(&[curve], out, a.out_dir.as_deref())
}

fn cmd_mc(a: &McArgs, out: &Output, seed: u64) -> CliResult<String> {
    let f = out.units.to_nats();
    let model = EnumeratorModel::new(a.n, a.rate * f, a.type_exponent * f, a.rho)?;
    let mode = match a.mode {
        ModeArg::Exact => MomentMode::ExactBinomial,
        ModeArg::MonteCarlo => MomentMode::MonteCarlo,
    };
    let mut report = moment_report(&model, mode, a.trials, seed)?;
    if out.units == Units::Bits {
        report.model.rate /= f;
        report.model.type_exponent /= f;
        report.realized_rate /= f;
        report.theory_exponent /= f;
        report.empirical_exponent /= f;
        report.gap /= f;
    }
    Ok(match out.format {
        Format::Json => {
            let mut doc = serde_json::to_value(&report).expect("report serializes");
            doc["units"] = json!(out.units);
            to_json(&doc)
        }
        Format::Csv => {
            let mut s = stamp_line(out);
            s.push_str("n,R,I,rho,M,realized_rate,theory_exponent,empirical_exponent,gap,mode,underflow\n");
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                report.model.n,
                fmt_sig(report.model.rate),
                fmt_sig(report.model.type_exponent),
                fmt_sig(report.model.rho),
                fmt_sig(report.codewords),
                fmt_sig(report.realized_rate),
                fmt_sig(report.theory_exponent),
                fmt_sig(report.empirical_exponent),
                fmt_sig(report.gap),
                match mode {
                    MomentMode::ExactBinomial => "exact_binomial",
                    MomentMode::MonteCarlo => "monte_carlo",
                },
                report.underflow
            ));
            s
        }
    })
}

fn cmd_compare(a: &CompareArgs, out: &Output) -> CliResult<String> {
    let inputs = load_inputs(&a.channel.channel, a.channel.q.as_deref())?;
    let cfg = curve_config(&a.search)?;
    let rates = a.rates.as_deref().map(|r| parse_rates(r, out.units)).transpose()?;
    let [g, c, n] = curve_triple(&inputs, rates.as_deref(), &cfg)?;
    let with_oracle = inputs.input().len() <= 3;
    let prob = RdProblem::new(inputs.input().clone(), (*inputs.distances(0.5)?).clone())?;
    let f = 1.0 / out.units.to_nats();
    let mut rows = Vec::new();
    for i in 0..n.points.len() {
        let rate = n.points[i].rate;
        let oracle = if with_oracle {
            (joint_oracle(&prob, rate, a.oracle_grid)?.0 - rate).max(0.0)
        } else {
            f64::NAN
        };
        rows.push([
            rate * f,
            g.points[i].value * f,
            c.points[i].value * f,
            n.points[i].value * f,
            oracle * f,
            (c.points[i].value - oracle) * f,
        ]);
    }
    let header = ["R", "gallager", "ckm_bhatt", "chernoff_new", "oracle_ckm", "ckm_minus_oracle"];
    Ok(match out.format {
        Format::Csv => stamp_line(out) + &csv_table(header, &rows),
        Format::Json => to_json(&json!({
            "units": out.units,
            "R1": { "gallager": g.r1 * f, "ckm_bhatt": c.r1 * f, "chernoff_new": n.r1 * f },
            "rows": rows.iter().map(|r| {
                header.iter().zip(r).map(|(k, v)| (k.to_string(), if v.is_nan() { json!(null) } else { json!(v) }))
                    .collect::<serde_json::Map<_, _>>()
            }).collect::<Vec<_>>(),
        })),
    })
}
