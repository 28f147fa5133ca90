use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gramfiber::fiberbody::{self, SampleSet};
use gramfiber::gram::GramContext;
use gramfiber::linalg::SymMat;
use gramfiber::polyalg::{form_from_json, form_q_from_json, Form};
use gramfiber::scalar::parse_rational;
use gramfiber::{quartic, sextic, GramError};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "gramfiber", version, about = "Faces, normal cones and fiber bodies of Gram spectrahedra")]
struct Cli {
    /// Binary sextics or ternary quartics.
    #[arg(long, value_enum, default_value_t = ContextKind::Sextic, global = true)]
    context: ContextKind,
    #[arg(long, default_value_t = 42, global = true)]
    seed: u64,
    #[arg(long, default_value_t = 50, global = true)]
    samples: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContextKind {
    Sextic,
    Quartic,
}

#[derive(Subcommand)]
enum Command {
    /// Monomial orders, Gram map and kernel basis.
    ContextDump,
    /// Face of gram(f) minimizing a direction.
    Face {
        #[command(flatten)]
        form: FormArg,
        #[command(flatten)]
        dir: Direction,
    },
    /// Normal-cone dimension of the face with image span(U).
    NcDim {
        /// Form JSON (repeat for each basis element of U).
        #[arg(long = "u", required = true)]
        u: Vec<String>,
    },
    #[command(subcommand)]
    Sextic(SexticCmd),
    #[command(subcommand)]
    Quartic(QuarticCmd),
    #[command(subcommand)]
    Fiberbody(FiberCmd),
}

#[derive(Subcommand)]
enum SexticCmd {
    /// The four rank-2 Gram tensors.
    Rank2 {
        #[command(flatten)]
        form: FormArg,
    },
    /// Membership of λ in S, with a rank-1 completion otherwise.
    InS {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        lambda: Vec<f64>,
    },
    /// Quadrics bounding the normal cones at the non-distinguished points.
    NcQuadric {
        #[command(flatten)]
        form: FormArg,
    },
    /// Normal cones of the two reference sextics.
    LemmaCheck,
}

#[derive(Subcommand)]
enum QuarticCmd {
    Classify {
        #[command(flatten)]
        dir: Direction,
    },
    Complete {
        #[command(flatten)]
        dir: Direction,
    },
    Split {
        #[command(flatten)]
        dir: Direction,
    },
    /// Exact sos certificate; λ given as rationals "p/q".
    Certificate {
        #[command(flatten)]
        form: FormArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        lambda: Vec<String>,
    },
}

#[derive(Subcommand)]
enum FiberCmd {
    Sample,
    /// CSV boundary points for built-in directions.
    Cloud {
        #[arg(long, default_value_t = 1000)]
        directions: usize,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<String>,
    },
    FaceDim {
        #[command(flatten)]
        dir: Direction,
    },
    NcProbe {
        #[command(flatten)]
        dir: Direction,
        /// Second direction in λ-coordinates.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
        lambda_prime: Vec<f64>,
    },
}

#[derive(Args)]
struct FormArg {
    /// Form as JSON `{"n":2,"d":6,"coeffs":{"60":1,"06":1}}`, or `@path`.
    #[arg(long)]
    form: String,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Direction {
    /// λ-coordinates (tr(w R_i) for sextics, Q-coordinates for quartics).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Option<Vec<f64>>,
    /// Coefficients on the kernel basis R_1, R_2, ...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    basis: Option<Vec<f64>>,
}

enum Failure {
    Usage(String),
    Numeric(GramError),
}

impl From<GramError> for Failure {
    fn from(e: GramError) -> Self {
        match e {
            GramError::InvalidInput(m) => Failure::Usage(m),
            other => Failure::Numeric(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(GramError::Io(e))
    }
}

type Outcome = Result<Option<Value>, Failure>;

fn context(kind: ContextKind) -> GramContext {
    match kind {
        ContextKind::Sextic => sextic::sextic_context(),
        ContextKind::Quartic => quartic::quartic_context(),
    }
}

fn read_json(arg: &str) -> Result<Value, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("invalid JSON: {e}")))
}

fn read_form(ctx: &GramContext, arg: &str) -> Result<Form<f64>, Failure> {
    let f = form_from_json(&read_json(arg)?)?;
    if f.n() != ctx.n() || f.degree() != 2 * ctx.d() {
        return Err(Failure::Usage(format!("expected a form with n={} and degree {}", ctx.n(), 2 * ctx.d())));
    }
    Ok(f)
}

fn lambda_to_w(ctx: &GramContext, kind: ContextKind, l: &[f64]) -> Result<SymMat<f64>, Failure> {
    if l.len() != ctx.dim_w() {
        return Err(Failure::Usage(format!("expected {} coordinates, got {}", ctx.dim_w(), l.len())));
    }
    Ok(match kind {
        ContextKind::Sextic => sextic::SCoords([l[0], l[1], l[2]]).to_w(ctx),
        ContextKind::Quartic => quartic::w_of_lambda(ctx, l),
    })
}

fn direction(ctx: &GramContext, kind: ContextKind, d: &Direction) -> Result<SymMat<f64>, Failure> {
    match (&d.lambda, &d.basis) {
        (Some(l), _) => lambda_to_w(ctx, kind, l),
        (None, Some(c)) if c.len() == ctx.dim_w() => Ok(ctx.from_w_coords(c)),
        (None, Some(c)) => Err(Failure::Usage(format!("expected {} coefficients, got {}", ctx.dim_w(), c.len()))),
        (None, None) => Err(Failure::Usage("a direction is required".into())),
    }
}

fn run_sextic(cmd: &SexticCmd) -> Outcome {
    let ctx = sextic::sextic_context();
    Ok(Some(match cmd {
        SexticCmd::Rank2 { form } => {
            let f = read_form(&ctx, &form.form)?;
            let set = sextic::rank2_points(&f)?;
            json!({
                "distinguished": set.distinguished,
                "points": set.points.iter().map(|p| p.to_rows()).collect::<Vec<_>>(),
                "scoords": set.points.iter().map(|p| sextic::SCoords::from_w(&ctx, &ctx.w_component(p).unwrap()).0).collect::<Vec<_>>(),
                "groupings": set.groupings.iter().map(|g| g.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        }
        SexticCmd::InS { lambda } => {
            if lambda.len() != 3 {
                return Err(Failure::Usage("expected three coordinates".into()));
            }
            let l = sextic::SCoords([lambda[0], lambda[1], lambda[2]]);
            let inside = sextic::in_s(&l);
            let completion = if inside { None } else { sextic::rank1_complete(&ctx, &l.to_w(&ctx)) };
            json!({
                "inS": inside,
                "completion": completion.map(|q| q.to_json()),
            })
        }
        SexticCmd::NcQuadric { form } => {
            let f = read_form(&ctx, &form.form)?;
            sextic::cone_report(&ctx, &f)?.to_json()
        }
        SexticCmd::LemmaCheck => {
            let reports = sextic::lemma_sextics()
                .iter()
                .map(|f| Ok(json!({"form": f.to_json(), "report": sextic::cone_report(&ctx, f)?.to_json()})))
                .collect::<Result<Vec<_>, GramError>>()?;
            json!({ "sextics": reports })
        }
    }))
}

fn parse_rationals(v: &[String]) -> Result<Vec<gramfiber::BigRational>, Failure> {
    v.iter().map(|s| parse_rational(s.trim()).ok_or_else(|| Failure::Usage(format!("not a rational: {s}")))).collect()
}

fn run_quartic(cmd: &QuarticCmd) -> Outcome {
    let ctx = quartic::quartic_context();
    let kind = ContextKind::Quartic;
    Ok(Some(match cmd {
        QuarticCmd::Classify { dir } => {
            let w = direction(&ctx, kind, dir)?;
            quartic::classify(&ctx, &w)?.to_json()
        }
        QuarticCmd::Complete { dir } => {
            let w = direction(&ctx, kind, dir)?;
            let c = quartic::rank1_complete(&ctx, &w)?;
            json!({"q": c.q.to_json(), "factor": c.factor, "residual": c.residual})
        }
        QuarticCmd::Split { dir } => {
            let w = direction(&ctx, kind, dir)?;
            let (split, theta) = quartic::split_tensor(&ctx, &w)?;
            let residual = ctx.w_component(&theta)?.sub(&w).frobenius_norm() / w.frobenius_norm();
            let mut out = split.to_json();
            out["theta"] = json!(theta.to_rows());
            out["projectionResidual"] = json!(residual);
            out
        }
        QuarticCmd::Certificate { form, lambda } => {
            let f = form_q_from_json(&read_json(&form.form)?)?;
            let l = parse_rationals(lambda)?;
            quartic::rational_certificate(&f, &l)?.to_json()
        }
    }))
}

fn run_fiber(cmd: &FiberCmd, cli: &Cli) -> Outcome {
    let ctx = context(cli.context);
    let samples = |ctx: &GramContext| -> Result<SampleSet, Failure> { Ok(fiberbody::sample_forms(ctx, cli.samples, cli.seed)?) };
    Ok(match cmd {
        FiberCmd::Sample => Some(samples(&ctx)?.to_json()),
        FiberCmd::Cloud { directions, out } => {
            let s = samples(&ctx)?;
            let dirs = fiberbody::default_directions(ctx.dim_w(), *directions, cli.seed);
            match out {
                Some(path) => {
                    let file = BufWriter::new(File::create(path)?);
                    let written = fiberbody::export_cloud(&dirs, &s, file)?;
                    Some(json!({"written": written, "path": path}))
                }
                None => {
                    fiberbody::export_cloud(&dirs, &s, io::stdout().lock())?;
                    None
                }
            }
        }
        FiberCmd::FaceDim { dir } => {
            let w = direction(&ctx, cli.context, dir)?;
            let s = samples(&ctx)?;
            Some(fiberbody::face_dim_estimate(&w, &s)?.to_json(&ctx))
        }
        FiberCmd::NcProbe { dir, lambda_prime } => {
            let w = direction(&ctx, cli.context, dir)?;
            let wp = lambda_to_w(&ctx, cli.context, lambda_prime)?;
            let s = samples(&ctx)?;
            Some(fiberbody::nc_probe(&w, &wp, &s)?.to_json())
        }
    })
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::ContextDump => Ok(Some(context(cli.context).dump_json())),
        Command::Face { form, dir } => {
            let ctx = context(cli.context);
            let f = read_form(&ctx, &form.form)?;
            let w = direction(&ctx, cli.context, dir)?;
            Ok(Some(ctx.face(&f, &w)?.to_json()))
        }
        Command::NcDim { u } => {
            let ctx = context(cli.context);
            let forms = u
                .iter()
                .map(|s| {
                    let q = form_from_json(&read_json(s)?)?;
                    if q.n() != ctx.n() || q.degree() != ctx.d() {
                        return Err(Failure::Usage(format!("U must consist of forms of degree {}", ctx.d())));
                    }
                    Ok(q)
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            let dims = ctx.nc_dim(&forms)?;
            let oracle = ctx.nc_dim_oracle(&forms)?;
            Ok(Some(json!({"ambient": dims.ambient, "inW": dims.in_w, "oracle": oracle})))
        }
        Command::Sextic(cmd) => run_sextic(cmd),
        Command::Quartic(cmd) => run_quartic(cmd),
        Command::Fiberbody(cmd) => run_fiber(cmd, cli),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("GRAMFIBER_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(&cli) {
        Ok(Some(v)) => {
            let mut out = stdout.lock();
            let _ = writeln!(out, "{v}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            println!("{}", json!({"error": "usage", "message": m}));
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            println!("{}", json!({"error": error_kind(&e), "message": e.to_string()}));
            ExitCode::from(3)
        }
    }
}

fn error_kind(e: &GramError) -> &'static str {
    match e {
        GramError::DimensionMismatch { .. } => "DimensionMismatch",
        GramError::MismatchedOrders => "MismatchedOrders",
        GramError::DependentBasis { .. } => "DependentBasis",
        GramError::UnsupportedContext { .. } => "UnsupportedContext",
        GramError::ConvergenceFailure { .. } => "ConvergenceFailure",
        GramError::DegenerateForm(_) => "DegenerateForm",
        GramError::DegenerateContact => "DegenerateContact",
        GramError::Infeasible => "Infeasible",
        GramError::SolverFailure(_) => "SolverFailure",
        GramError::WrongClass(_) => "WrongClass",
        GramError::NotPsd { .. } => "NotPsd",
        GramError::SamplingFailure { .. } => "SamplingFailure",
        GramError::TooManyFailures { .. } => "TooManyFailures",
        GramError::PreconditionViolated(_) => "PreconditionViolated",
        GramError::InvalidInput(_) => "InvalidInput",
        GramError::Io(_) => "Io",
        GramError::Csv(_) => "Csv",
    }
}
