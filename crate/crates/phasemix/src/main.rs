//! phasemix: evaluate phase-type scale mixtures and classify their tails.

use clap::{Args, Parser, Subcommand, ValueEnum};
use phasemix::asymptotics::{
    self, analyze, asymptote_eval, AsymptoteForm,
};
use phasemix::error::Error;
use phasemix::grid::GridSpec;
use phasemix::mixture::{series_bounds, MixtureModel};
use phasemix::model::mixture_from_json;
use phasemix::quad::QuadPolicy;
use phasemix::scaler::ScalerFamily;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "phasemix",
    version,
    about = "Phase-type scale mixture evaluation and tail classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct EvalArgs {
    /// Mixture model JSON file.
    #[arg(short, long)]
    model: PathBuf,
    /// Single evaluation point.
    #[arg(long, conflicts_with = "grid")]
    x: Option<f64>,
    /// Geometric grid LO:HI:PPD.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Tail probabilities F̄(x).
    Tail(EvalArgs),
    /// Densities f(x).
    Pdf(EvalArgs),
    /// Raw moments E[(SY)^n] for n = 1..order.
    Moments {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Draw samples of S * Y.
    Sample {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Closed-form or calibrated asymptote constants.
    Asymptote {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Full maximum-domain-of-attraction report.
    Mda {
        #[arg(short, long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Extra gate exponents theta (comma separated).
        #[arg(long, value_delimiter = ',')]
        theta: Vec<f64>,
    },
    /// Numeric tail vs asymptote over a grid.
    Compare(EvalArgs),
    /// Sum-vs-integral bounds of the discrete series at given x.
    SeriesBounds(EvalArgs),
}

fn main() -> ExitCode {
    // Die quietly when the read end of a pipe goes away (e.g. `| head`).
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("phasemix: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Exit 2 for validation problems, 3 for numerical failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonStochasticInitial(_)
        | Error::NotSubIntensity(_)
        | Error::InvalidModel(_)
        | Error::DomainError(_)
        | Error::ComplexSpectrum(_)
        | Error::NotRegularlyVarying(_)
        | Error::NotFrechet(_) => 2,
        Error::MatexpFailure(_)
        | Error::SingularMatrix(_)
        | Error::QuadratureNonconvergence(_)
        | Error::TruncationBoundViolated(_)
        | Error::UnimodalityCheckFailed(_)
        | Error::DefectiveDecompositionFailure(_)
        | Error::PrecisionLoss(_) => 3,
    }
}

fn load_model(path: &PathBuf) -> Result<MixtureModel, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidModel(format!("cannot read {}: {e}", path.display())))?;
    mixture_from_json(&text)
}

fn eval_points(args: &EvalArgs) -> Result<Vec<f64>, Error> {
    if let Some(x) = args.x {
        // NaN fails this guard too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(x >= 0.0) {
            return Err(Error::DomainError(format!("x must be >= 0, got {x}")));
        }
        return Ok(vec![x]);
    }
    let spec = match &args.grid {
        Some(s) => GridSpec::parse(s)?,
        None => GridSpec::default(),
    };
    Ok(spec.points())
}

/// Worker-count override honoring PHASEMIX_THREADS.
fn worker_count(n_jobs: usize) -> usize {
    let configured = std::env::var("PHASEMIX_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|v| v.get())
                .unwrap_or(1)
        });
    configured.min(n_jobs).max(1)
}

/// Evaluate `f` over the grid with a deterministic output order.
fn fan_out<T: Send>(
    xs: &[f64],
    f: impl Fn(f64) -> Result<T, Error> + Sync,
) -> Result<Vec<T>, Error> {
    let workers = worker_count(xs.len());
    if workers <= 1 {
        return xs.iter().map(|&x| f(x)).collect();
    }
    let chunk = xs.len().div_ceil(workers);
    let mut slots: Vec<Option<Result<T, Error>>> = Vec::with_capacity(xs.len());
    slots.resize_with(xs.len(), || None);
    std::thread::scope(|scope| {
        let mut rest: &mut [Option<Result<T, Error>>] = &mut slots;
        let mut offset = 0;
        let mut handles = Vec::new();
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            rest = tail;
            let f = &f;
            let xs = &xs[offset..offset + take];
            handles.push(scope.spawn(move || {
                for (slot, &x) in head.iter_mut().zip(xs) {
                    *slot = Some(f(x));
                }
            }));
            offset += take;
        }
        for h in handles {
            let _ = h.join();
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("worker filled every slot"))
        .collect()
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Tail(args) => {
            let m = load_model(&args.model)?;
            let xs = eval_points(&args)?;
            let vals = fan_out(&xs, |x| m.tail(x))?;
            emit_xy(&xs, &vals, "value", args.format);
            Ok(())
        }
        Command::Pdf(args) => {
            let m = load_model(&args.model)?;
            let xs: Vec<f64> = eval_points(&args)?.into_iter().filter(|&x| x > 0.0).collect();
            let vals = fan_out(&xs, |x| m.density(x))?;
            emit_xy(&xs, &vals, "value", args.format);
            Ok(())
        }
        Command::Moments {
            model,
            order,
            format,
        } => {
            let m = load_model(&model)?;
            if order < 1 {
                return Err(Error::DomainError("order must be >= 1".into()));
            }
            let mut rows = Vec::new();
            for n in 1..=order {
                rows.push((n, m.moment(n)?));
            }
            match format {
                Format::Csv => {
                    println!("n,value");
                    for (n, v) in rows {
                        println!("{n},{v}");
                    }
                }
                Format::Json => {
                    let items: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|&(n, v)| {
                            serde_json::json!({
                                "n": n,
                                "value": json_number(v),
                            })
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(items));
                }
            }
            Ok(())
        }
        Command::Sample {
            model,
            seed,
            count,
            format,
        } => {
            let m = load_model(&model)?;
            if count < 1 {
                return Err(Error::DomainError("count must be >= 1".into()));
            }
            let draws = m.sample(seed, count);
            match format {
                Format::Csv => {
                    println!("value");
                    for d in draws {
                        println!("{d}");
                    }
                }
                Format::Json => {
                    println!("{}", serde_json::to_string(&draws).expect("serialize"));
                }
            }
            Ok(())
        }
        Command::Asymptote { model, format } => {
            let m = load_model(&model)?;
            let form = model_asymptote(&m)?;
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&form).expect("serialize"));
                }
                Format::Csv => {
                    println!("field,value");
                    let v = serde_json::to_value(&form).expect("serialize");
                    if let serde_json::Value::Object(map) = v {
                        for (k, val) in map {
                            println!("{k},{val}");
                        }
                    }
                }
            }
            Ok(())
        }
        Command::Mda {
            model,
            format,
            theta,
        } => {
            let m = load_model(&model)?;
            let mut report = analyze(&m)?;
            if !theta.is_empty() {
                let grid = asymptotics::default_grid(&m)?.points();
                for t in theta {
                    report
                        .diagnostics
                        .gate
                        .push(asymptotics::gate_trace(&m, t, &grid)?);
                }
            }
            match format {
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&report).expect("serialize")
                    );
                }
                Format::Csv => {
                    print_mda_summary(&report);
                }
            }
            Ok(())
        }
        Command::Compare(args) => {
            let m = load_model(&args.model)?;
            let xs: Vec<f64> = eval_points(&args)?.into_iter().filter(|&x| x > 0.0).collect();
            let form = model_asymptote(&m)?;
            let rows = fan_out(&xs, |x| {
                let numeric = m.tail(x)?;
                let asym = asymptote_eval(&m, &form, x)?;
                Ok((numeric, asym, numeric / asym))
            })?;
            match args.format {
                Format::Csv => {
                    println!("x,numeric,asymptote,ratio");
                    for (x, (n, a, r)) in xs.iter().zip(&rows) {
                        println!("{x},{n},{a},{r}");
                    }
                }
                Format::Json => {
                    let items: Vec<serde_json::Value> = xs
                        .iter()
                        .zip(&rows)
                        .map(|(x, (n, a, r))| {
                            serde_json::json!({"x": x, "numeric": n, "asymptote": a, "ratio": r})
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(items));
                }
            }
            Ok(())
        }
        Command::SeriesBounds(args) => {
            let m = load_model(&args.model)?;
            let xs: Vec<f64> = eval_points(&args)?.into_iter().filter(|&x| x > 0.0).collect();
            let rows = fan_out(&xs, |x| series_bounds_at(&m, x))?;
            match args.format {
                Format::Csv => {
                    println!("x,lower,integral,upper,peak");
                    for (x, b) in xs.iter().zip(&rows) {
                        println!(
                            "{x},{},{},{},{}",
                            b.lower, b.integral_value, b.upper, b.peak_value
                        );
                    }
                }
                Format::Json => {
                    let items: Vec<serde_json::Value> = xs
                        .iter()
                        .zip(&rows)
                        .map(|(x, b)| {
                            serde_json::json!({
                                "x": x,
                                "lower": b.lower,
                                "integral": b.integral_value,
                                "upper": b.upper,
                                "peak": b.peak_value,
                                "peak_location": b.peak_location,
                            })
                        })
                        .collect();
                    println!("{}", serde_json::Value::Array(items));
                }
            }
            Ok(())
        }
    }
}

fn emit_xy(xs: &[f64], vals: &[f64], name: &str, format: Format) {
    match format {
        Format::Csv => {
            println!("x,{name}");
            for (x, v) in xs.iter().zip(vals) {
                println!("{x},{v}");
            }
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = xs
                .iter()
                .zip(vals)
                .map(|(x, v)| serde_json::json!({"x": x, name: v}))
                .collect();
            println!("{}", serde_json::Value::Array(items));
        }
    }
}

fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::String("infinity".into())
    }
}

/// The model's closed-form (or calibrated) tail asymptote, routed by family.
fn model_asymptote(m: &MixtureModel) -> Result<AsymptoteForm, Error> {
    let top = asymptotics::default_grid(m)?.x_hi;
    match m.scaler().family() {
        ScalerFamily::Pareto { alpha } => asymptotics::frechet_asymptote(m, *alpha),
        ScalerFamily::Zipf { alpha } => asymptotics::zipf_asymptote(m.ph(), *alpha),
        ScalerFamily::Exponential { rate } => Ok(asymptotics::exponential_scaling_asymptote(
            m.spectral()?,
            *rate,
        )),
        ScalerFamily::Geometric { .. } => asymptotics::geometric_asymptote(m, top),
        ScalerFamily::Lognormal { .. } => asymptotics::gumbel_asymptote(m, top),
        other => Err(Error::NotRegularlyVarying(format!(
            "no closed-form asymptote for scaler family {other:?}"
        ))),
    }
}

/// Continuous extension of the discrete tail summand for series-bounds rows.
fn series_bounds_at(m: &MixtureModel, x: f64) -> Result<phasemix::SeriesBounds, Error> {
    let policy = QuadPolicy::default();
    match m.scaler().family() {
        ScalerFamily::Zipf { alpha } => {
            let alpha = *alpha;
            let zeta = phasemix::special::riemann_zeta(alpha)?;
            let ph = m.ph().clone();
            series_bounds(
                move |y: f64| {
                    if y <= 0.0 {
                        return 0.0;
                    }
                    y.powf(-alpha) / zeta * ph.tail(x / y).unwrap_or(0.0)
                },
                &policy,
            )
        }
        ScalerFamily::Geometric { p } => {
            let p = *p;
            let lq = (1.0 - p).ln();
            let ph = m.ph().clone();
            series_bounds(
                move |y: f64| {
                    if y <= 0.0 {
                        return 0.0;
                    }
                    p * ((y - 1.0) * lq).exp() * ph.tail(x / y).unwrap_or(0.0)
                },
                &policy,
            )
        }
        other => Err(Error::InvalidModel(format!(
            "series-bounds requires a zipf or geometric scaler, got {other:?}"
        ))),
    }
}

fn print_mda_summary(report: &phasemix::MdaReport) {
    println!("field,value");
    println!("tail_class,{:?}", report.tail_class);
    match report.mda {
        asymptotics::Mda::Frechet { alpha } => println!("mda,Frechet({alpha})"),
        asymptotics::Mda::Gumbel => println!("mda,Gumbel"),
        asymptotics::Mda::Undetermined => println!("mda,Undetermined"),
    }
    println!("subexponential,{:?}", report.subexponential);
    if let Some(form) = &report.asymptote {
        let v = serde_json::to_value(form).expect("serialize");
        println!("asymptote,{v}");
    }
    if let Some(n) = &report.norming {
        println!("norming,\"{}\"", n.description);
        for s in &n.samples {
            match s.paper_display_c_n {
                Some(alt) => println!("c_n(n={}),{} (paper display {alt})", s.n, s.c_n),
                None => println!("c_n(n={}),{}", s.n, s.c_n),
            }
        }
    }
    if let Some(vm) = &report.diagnostics.von_mises {
        println!("von_mises_final_gap,{}", vm.final_gap);
        println!("von_mises_gap_decreasing,{}", vm.gap_decreasing);
    }
    if let Some(sub) = &report.diagnostics.subexp {
        for e in &sub.per_t {
            println!(
                "goldie_resnick(t={}),raw_min={} extrapolated={}",
                e.t, e.raw_min, e.extrapolated
            );
        }
    }
    for g in &report.diagnostics.gate {
        println!("gate(theta={}),{:?}", g.theta, g.trend);
    }
    if let Some(rt) = &report.diagnostics.tail_ratio_vs_scaler {
        println!("tail_ratio_vs_scaler,{:?}", rt.trend);
    }
    for c in &report.caveats {
        println!("caveat,\"{c}\"");
    }
}
