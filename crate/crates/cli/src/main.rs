use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use finsler_iso::io::fmt17;
use finsler_iso::profiles::write_profile_csv;
use finsler_iso::verify::{self, Case, Fault, Level, Settings};
use finsler_iso::{
    check_isoperimetric, curve_length, green_area, solve_constants, synthesize_contour, ConvexBody, Error,
    HyperbolicPoint, IsoConfig, IsoContext, Sign, TrigTable,
};

const THREADS_ENV: &str = "FINSLER_ISO_THREADS";

#[derive(Parser)]
#[command(name = "finsler-iso", version, about = "Convex trigonometry and isoperimetric contours on the Finsler-Lobachevsky plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Body specification (JSON).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Trig table resolution.
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
    /// Sample or grid count; the default depends on the command.
    #[arg(long)]
    samples: Option<usize>,
    /// Minimal distance of λ from the end of its domain.
    #[arg(long, default_value_t = 1e-9)]
    eps_min: f64,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Area, polar, extents and trig periods of a body.
    BodyInfo {
        #[command(flatten)]
        common: Common,
    },
    /// Trig tables of the body and of its polar.
    Trig {
        #[command(flatten)]
        common: Common,
    },
    /// Profile table L(λ), F(λ) on a log-spaced grid of distances from the
    /// end of the domain.
    Profile {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "+", value_parser = parse_sign)]
        sign: Sign,
        /// Smallest distance of λ from the end of the domain.
        #[arg(long, default_value_t = 1e-3)]
        offset_min: f64,
        /// Largest distance of λ from the end of the domain.
        #[arg(long, default_value_t = 1e2)]
        offset_max: f64,
    },
    /// Optimal contour through (x0, y0) enclosing area A.
    Contour {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long)]
        y0: f64,
        /// Enclosed area.
        #[arg(long = "area", short = 'A')]
        area: f64,
        /// Polar angle of the starting point.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value = "+", value_parser = parse_sign)]
        sign: Sign,
        /// Emit K contours with α evenly spread over one polar period.
        #[arg(long)]
        family: Option<usize>,
    },
    /// Boundary curves (L, 𝓕₊(L)) and (L, -𝓕₋(L)) on a log-spaced grid.
    Isocurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        l_max: f64,
        /// Decades spanned by the grid below L_max.
        #[arg(long, default_value_t = 3.0)]
        decades: f64,
    },
    /// Runs the invariant suites.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
        level: LevelArg,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    TrigSample,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    Sign::parse(s).map_err(|e| e.to_string())
}

/// Exit codes: 1 invariant failure, 2 input error, 3 numeric failure.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn invariant(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

/// Input problems map to 2; anything raised while computing maps to
/// `compute_code`.
fn classify(e: Error, compute_code: u8) -> Failure {
    let code = match e {
        Error::DegenerateInput(_)
        | Error::NotConvex
        | Error::OriginNotInterior
        | Error::InvalidPBall(_)
        | Error::ResolutionTooLow { .. }
        | Error::NonpositiveY(_)
        | Error::InvalidArgument(_)
        | Error::Spec { .. } => 2,
        Error::Io(_) => 2,
        _ => compute_code,
    };
    Failure { code, message: e.to_string() }
}

fn input_err(e: Error) -> Failure {
    classify(e, 2)
}

fn load_body(common: &Common) -> Result<ConvexBody, Failure> {
    let path = common.spec.as_ref().ok_or_else(|| Failure::input("--spec is required"))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    ConvexBody::from_spec_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn context(common: &Common) -> Result<IsoContext, Failure> {
    if !(common.eps_min > 0.0 && common.eps_min.is_finite()) {
        return Err(Failure::input("--eps-min must be positive"));
    }
    let body = load_body(common)?;
    let config = IsoConfig {
        eps_min: common.eps_min,
        ..IsoConfig::default()
    };
    IsoContext::with_config(body, common.resolution, config).map_err(input_err)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    File::create(&path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

fn body_info(common: &Common) -> Result<(), Failure> {
    let ctx = context(common)?;
    let ext = ctx.extents();
    let period = ctx.trig_omega().period();
    let polar_period = ctx.trig_polar().period();
    println!("body          {}", ctx.omega());
    println!("area          {}", fmt17(ctx.omega().euclid_area()));
    println!("polar         {}", ctx.polar());
    println!("polar area    {}", fmt17(ctx.polar_area()));
    println!("M+°           {}", fmt17(ext.m_plus));
    println!("M-°           {}", fmt17(ext.m_minus));
    println!("period        {}", fmt17(period));
    println!("polar period  {}", fmt17(polar_period));
    println!("symmetric     {}", ctx.omega().is_centrally_symmetric());
    match ctx.asymptote_a_plus() {
        Ok(a) => println!("a+            {}", fmt17(a)),
        Err(e) => println!("a+            unavailable ({e})"),
    }
    Ok(())
}

fn trig(common: &Common) -> Result<(), Failure> {
    let body = load_body(common)?;
    let polar = body.polar();
    for (name, b) in [("trig_body.csv", &body), ("trig_polar.csv", &polar)] {
        let table = TrigTable::build(b, common.resolution).map_err(input_err)?;
        table.validate().map_err(Failure::invariant)?;
        table.write_csv(create(&common.out, name)?).map_err(input_err)?;
        println!("{name}: {} samples, period {}", table.samples().len(), fmt17(table.period()));
    }
    Ok(())
}

fn profile(common: &Common, sign: Sign, offset_min: f64, offset_max: f64) -> Result<(), Failure> {
    if !(offset_min > 0.0 && offset_max >= offset_min && offset_max.is_finite()) {
        return Err(Failure::input("need 0 < --offset-min <= --offset-max"));
    }
    let ctx = context(common)?;
    let end = ctx.domain_bound(sign) - sign.factor() * ctx.domain_margin(sign);
    let lambdas: Vec<f64> = log_grid(offset_min, offset_max, common.samples.unwrap_or(200).max(1))
        .into_iter()
        .map(|d| end + sign.factor() * d)
        .collect();
    let rows = ctx
        .profile_table(&lambdas, sign)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| classify(e, 3))?;
    write_profile_csv(&rows, create(&common.out, "profile.csv")?).map_err(input_err)?;
    println!("profile.csv: {} rows", rows.len());
    Ok(())
}

struct ContourArgs {
    x0: f64,
    y0: f64,
    area: f64,
    alpha: f64,
    sign: Sign,
    family: Option<usize>,
}

fn contour(common: &Common, a: &ContourArgs) -> Result<(), Failure> {
    if !(a.area > 0.0 && a.area.is_finite()) {
        return Err(Failure::input("A must be positive"));
    }
    let g0 = HyperbolicPoint::new(a.x0, a.y0).map_err(input_err)?;
    let ctx = context(common)?;
    let n = common.samples.unwrap_or(4096);
    let alphas: Vec<(String, f64)> = match a.family {
        None => vec![("contour".to_string(), a.alpha)],
        Some(0) => return Err(Failure::input("--family must be at least 1")),
        Some(k) => {
            let p = ctx.trig_polar().period();
            (0..k)
                .map(|j| (format!("contour_{j:03}"), a.alpha + p * j as f64 / k as f64))
                .collect()
        }
    };
    for (stem, alpha) in alphas {
        let k = solve_constants(&ctx, g0, a.area, alpha, a.sign).map_err(|e| classify(e, 3))?;
        let c = synthesize_contour(&ctx, &k, n).map_err(|e| classify(e, 3))?;
        let poly = c.to_polyline().map_err(|e| classify(e, 3))?;
        let length = curve_length(ctx.omega(), &poly);
        let area = green_area(&poly).map_err(|e| classify(e, 3))?;
        let rep = check_isoperimetric(&ctx, &poly).map_err(|e| classify(e, 3))?;
        c.write_csv(create(&common.out, &format!("{stem}.csv"))?).map_err(input_err)?;
        fs::write(common.out.join(format!("{stem}.json")), k.to_json() + "\n")
            .map_err(|e| Failure::input(e.to_string()))?;
        let (name, deficit) = match a.sign {
            Sign::Plus => ("L+", rep.deficit_plus),
            Sign::Minus => ("L-", rep.deficit_minus),
        };
        println!(
            "{stem}: alpha {} T {} {name} {} A {} deficit+ {} deficit- {} (equality deficit {})",
            fmt17(alpha),
            fmt17(k.t_total),
            fmt17(length),
            fmt17(area),
            fmt17(rep.deficit_plus),
            fmt17(rep.deficit_minus),
            fmt17(deficit),
        );
    }
    Ok(())
}

fn isocurve(common: &Common, l_max: f64, decades: f64) -> Result<(), Failure> {
    if !(l_max > 0.0 && l_max.is_finite()) {
        return Err(Failure::input(format!("L_max must be positive, got {l_max}")));
    }
    if !(decades >= 0.0 && decades.is_finite()) {
        return Err(Failure::input("--decades must be non-negative"));
    }
    let ctx = context(common)?;
    let grid = log_grid(l_max * 10f64.powf(-decades), l_max, common.samples.unwrap_or(200).max(1));
    let a_plus = ctx.asymptote_a_plus().map_err(|e| classify(e, 3))?;
    let slope = 1.0 / ctx.extents().m_plus;
    let rows = grid
        .par_iter()
        .map(|&l| Ok((l, ctx.f_of_l(l, Sign::Plus)?, -ctx.f_of_l(l, Sign::Minus)?)))
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| classify(e, 3))?;
    let io_err = |e: std::io::Error| input_err(e.into());
    let mut w = create(&common.out, "isocurve.csv")?;
    let mut header = "L,F_plus,F_minus_neg".to_string();
    if a_plus.is_finite() {
        header.push_str(",asymptote");
    }
    writeln!(w, "{header}").map_err(io_err)?;
    for (l, fp, fm) in rows {
        write!(w, "{},{},{}", fmt17(l), fmt17(fp), fmt17(fm)).map_err(io_err)?;
        if a_plus.is_finite() {
            write!(w, ",{}", fmt17(slope * l - a_plus)).map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    println!("isocurve.csv: {} rows, a+ = {}", grid.len(), fmt17(a_plus));
    Ok(())
}

fn run_verify(common: &Common, level: LevelArg, fault: Option<FaultArg>) -> Result<(), Failure> {
    let level = match level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let mut settings = Settings::new(level);
    settings.seed = common.seed;
    settings.resolution = common.resolution;
    settings.fault = fault.map(|FaultArg::TrigSample| Fault::TrigSample);
    let bodies = match &common.spec {
        Some(path) => {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            vec![(name, load_body(common)?)]
        }
        None => verify::shipped_bodies()
            .into_iter()
            .map(|(n, b)| (n.to_string(), b))
            .collect(),
    };
    let cases = bodies
        .into_iter()
        .map(|(n, b)| Case::new(n, b, common.resolution))
        .collect::<Result<Vec<_>, _>>()
        .map_err(input_err)?;
    let outcomes = verify::run(&cases, &settings, |o| {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        eprintln!("{tag} {:<40} {:<10} {:>7.2}s {}", o.check, o.body, o.seconds, o.detail);
    });
    match outcomes.iter().find(|o| !o.passed) {
        Some(fail) => {
            let report = fail.to_json();
            println!("{report}");
            let mut w = create(&common.out, "verify_report.json")?;
            writeln!(w, "{report}").map_err(|e| input_err(e.into()))?;
            Err(Failure::invariant(format!("{} failed on {}", fail.check, fail.body)))
        }
        None => {
            println!("{{\"status\":\"pass\",\"checks\":{}}}", outcomes.len());
            Ok(())
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::input(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::input(e.to_string()))?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::BodyInfo { common } => body_info(&common),
        Command::Trig { common } => trig(&common),
        Command::Profile {
            common,
            sign,
            offset_min,
            offset_max,
        } => profile(&common, sign, offset_min, offset_max),
        Command::Contour {
            common,
            x0,
            y0,
            area,
            alpha,
            sign,
            family,
        } => contour(
            &common,
            &ContourArgs {
                x0,
                y0,
                area,
                alpha,
                sign,
                family,
            },
        ),
        Command::Isocurve { common, l_max, decades } => isocurve(&common, l_max, decades),
        Command::Verify {
            common,
            level,
            inject_fault,
        } => run_verify(&common, level, inject_fault),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
