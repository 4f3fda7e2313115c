//! Front end for the `bergpoly` binary. [`run`] takes the raw argument list
//! and returns the process exit code, writing results to `out` and
//! diagnostics to `err`.

use std::io::Write;
use std::path::PathBuf;

use bergpoly::int_linalg::{normalize_with_max_n, DEFAULT_MAX_N};
use bergpoly::kernel::{assemble_from_valid, eval_kernel, DEFAULT_EPSILON};
use bergpoly::oracle::{compare_form, numeric_spot_check};
use bergpoly::special::{
    kernel_det1, kernel_dim2, kernel_park_zhang, kernel_signature1, ParkZhangSpec, SignatureOneSpec,
};
use bergpoly::{
    BergmanKernelForm, CanonicityVerdict, Error, IntegerMatrix, ValidDefiningMatrix, Window,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_CANONICITY: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Series truncation limit for the numeric cross-check in `verify`.
const SPOT_RADIUS: usize = 512;
const SPOT_TOLERANCE: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "bergpoly",
    version,
    about = "Exact Bergman kernels of monomial polyhedra"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for the parallel enumerations (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Normalize a defining matrix and check that its domain is bounded.
    Validate {
        #[command(flatten)]
        matrix: MatrixSource,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Emit the closed-form kernel.
    Kernel {
        #[command(flatten)]
        matrix: MatrixSource,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Evaluate the kernel at a pair of points.
    Eval {
        #[command(flatten)]
        matrix: MatrixSource,
        #[command(flatten)]
        points: Points,
        /// Relative threshold below which a denominator factor counts as zero.
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare the closed form with the norm series on `[-2, R]^n`.
    Verify {
        #[command(flatten)]
        matrix: OptionalMatrixSource,
        /// Check this serialized kernel (as written by `kernel --format json`)
        /// instead of computing one.
        #[arg(long, conflicts_with_all = ["matrix", "matrix_file"])]
        kernel_file: Option<PathBuf>,
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(i64).range(1..))]
        window: i64,
        #[command(flatten)]
        points: OptionalPoints,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Build the kernel from a classical formula and cross-check it.
    Special {
        #[arg(long, value_enum)]
        family: Family,
        /// Comma-separated family parameters (`sig1`, `pz`).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<i64>,
        #[command(flatten)]
        matrix: OptionalMatrixSource,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct MatrixSource {
    /// Inline matrix, rows separated by `/`, e.g. "1 -1 / 0 1".
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    /// File with one row per line, or a JSON array of rows.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = false, multiple = false)]
pub struct OptionalMatrixSource {
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: Option<String>,
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Points {
    /// Comma-separated complex coordinates, e.g. "0.3,0.1+0.2i".
    #[arg(long, allow_hyphen_values = true)]
    pub point_p: String,
    #[arg(long, allow_hyphen_values = true)]
    pub point_q: String,
}

#[derive(Args, Debug)]
#[group(requires_all = ["point_p", "point_q"], multiple = true)]
pub struct OptionalPoints {
    /// Also compare the closed form numerically at `(p, q)`.
    #[arg(long, allow_hyphen_values = true)]
    pub point_p: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub point_q: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Det1,
    Dim2,
    Sig1,
    Pz,
}

/// Everything that ends a command early, tagged with its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Invalid(String),
    Mismatch(String),
    Canonicity(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Mismatch(_) => EXIT_MISMATCH,
            Failure::Canonicity(_) => EXIT_CANONICITY,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Invalid(m)
            | Failure::Mismatch(m)
            | Failure::Canonicity(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CanonicityViolation(_) => Failure::Canonicity(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = max_n().and_then(|max_n| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cli.jobs {
            if j == 0 {
                return Err(Failure::Usage("--jobs must be at least 1".into()));
            }
            builder = builder.num_threads(j);
        }
        let pool = builder
            .build()
            .map_err(|e| Failure::Usage(format!("cannot start worker pool: {e}")))?;
        // buffered so the work can run inside the pool
        let mut buf = Vec::new();
        let r = pool.install(|| dispatch(&cli.command, max_n, &mut buf));
        let _ = out.write_all(&buf);
        r
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.exit_code()
        }
    }
}

fn max_n() -> std::result::Result<usize, Failure> {
    match std::env::var("BERGPOLY_MAX_N") {
        Err(_) => Ok(DEFAULT_MAX_N),
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .ok_or_else(|| {
                Failure::Usage(format!("BERGPOLY_MAX_N must be an integer >= 2, got {v:?}"))
            }),
    }
}

fn dispatch(cmd: &Command, max_n: usize, out: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Validate { matrix, format } => {
            let m = read_matrix(matrix.matrix.as_deref(), matrix.matrix_file.as_ref())?;
            let b = ValidDefiningMatrix::with_max_n(&m, max_n)?;
            emit(out, &render_validation(&b, *format))
        }
        Command::Kernel { matrix, format } => {
            let m = read_matrix(matrix.matrix.as_deref(), matrix.matrix_file.as_ref())?;
            let b = ValidDefiningMatrix::with_max_n(&m, max_n)?;
            let k = assemble_from_valid(&b)?;
            emit(out, &render_form(&k, *format))
        }
        Command::Eval {
            matrix,
            points,
            epsilon,
            format,
        } => {
            let m = read_matrix(matrix.matrix.as_deref(), matrix.matrix_file.as_ref())?;
            let b = ValidDefiningMatrix::with_max_n(&m, max_n)?;
            let p = parse_point(&points.point_p)?;
            let q = parse_point(&points.point_q)?;
            if !(*epsilon >= 0.0) {
                return Err(Failure::Usage("--epsilon must be nonnegative".into()));
            }
            let k = assemble_from_valid(&b)?;
            let v = eval_kernel(&k, &p, &q, *epsilon)?;
            emit(out, &render_value(&p, &q, v, *format))
        }
        Command::Verify {
            matrix,
            kernel_file,
            window,
            points,
            format,
        } => {
            let form = match kernel_file {
                Some(path) => {
                    if points.point_p.is_some() {
                        return Err(Failure::Usage(
                            "--point-p/--point-q cannot be combined with --kernel-file".into(),
                        ));
                    }
                    let form = read_form(path)?;
                    if form.n() > max_n {
                        return Err(Error::DimensionTooLarge {
                            n: form.n(),
                            max: max_n,
                        }
                        .into());
                    }
                    if let CanonicityVerdict::Fail { factor } = form.canonicity() {
                        return Err(Error::CanonicityViolation(format!(
                            "denominator factor {factor} divides the numerator"
                        ))
                        .into());
                    }
                    form
                }
                None => {
                    if matrix.matrix.is_none() && matrix.matrix_file.is_none() {
                        return Err(Failure::Usage(
                            "one of --matrix, --matrix-file, --kernel-file is required".into(),
                        ));
                    }
                    let m = read_matrix(matrix.matrix.as_deref(), matrix.matrix_file.as_ref())?;
                    assemble_from_valid(&ValidDefiningMatrix::with_max_n(&m, max_n)?)?
                }
            };
            verify(&form, *window, points, *format, out)
        }
        Command::Special {
            family,
            params,
            matrix,
            format,
        } => special(*family, params, matrix, max_n, *format, out),
    }
}

fn verify(
    form: &BergmanKernelForm,
    radius: i64,
    points: &OptionalPoints,
    format: Format,
    out: &mut dyn Write,
) -> Outcome {
    let b = &form.source;
    let window = Window::cube(b.dim(), -2, radius);
    let report = compare_form(b, form, &window)?;
    let mut value = report.to_json_value();
    let mut clean = report.is_clean();
    if let (Some(p), Some(q)) = (&points.point_p, &points.point_q) {
        let p = parse_point(p)?;
        let q = parse_point(q)?;
        let rel = numeric_spot_check(b, &p, &q, SPOT_RADIUS)?;
        clean &= rel <= SPOT_TOLERANCE;
        value["spotCheck"] = json!({"relativeError": rel, "tolerance": SPOT_TOLERANCE});
    }
    let rendered = match format {
        Format::Json => json_line(&value),
        Format::Text | Format::Latex => {
            let mut s = format!(
                "window {}..{} in every coordinate: {} of {} coefficients match, {} mismatches\n",
                -2,
                radius,
                report.matched,
                report.checked,
                report.mismatches.len()
            );
            s += &format!(
                "numerator terms checked: {} of {}\n",
                report.numerator_terms_checked, report.numerator_terms
            );
            for m in report.mismatches.iter().take(10) {
                s += &format!(
                    "  t^{}: closed form {}, series {}\n",
                    m.exponent, m.closed_form, m.oracle
                );
            }
            if let Some(rel) = value
                .get("spotCheck")
                .and_then(|v| v["relativeError"].as_f64())
            {
                s += &format!("numeric spot check: relative error {rel:e}\n");
            }
            s
        }
    };
    emit(out, &rendered)?;
    if clean {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!(
            "{} of {} coefficients disagree",
            report.mismatches.len(),
            report.checked
        )))
    }
}

fn special(
    family: Family,
    params: &[i64],
    matrix: &OptionalMatrixSource,
    max_n: usize,
    format: Format,
    out: &mut dyn Write,
) -> Outcome {
    let given = match (&matrix.matrix, &matrix.matrix_file) {
        (None, None) => None,
        (m, f) => Some(read_matrix(m.as_deref(), f.as_ref())?),
    };
    let form = match family {
        Family::Det1 | Family::Dim2 => {
            let m = given.ok_or_else(|| {
                Failure::Usage("--family det1 and dim2 need --matrix or --matrix-file".into())
            })?;
            if !params.is_empty() {
                return Err(Failure::Usage(
                    "--params only applies to sig1 and pz".into(),
                ));
            }
            let nm = normalize_with_max_n(&m, max_n)?;
            ValidDefiningMatrix::with_max_n(&m, max_n)?;
            if family == Family::Det1 {
                kernel_det1(&nm)?
            } else {
                kernel_dim2(&nm)?
            }
        }
        Family::Sig1 | Family::Pz => {
            if given.is_some() {
                return Err(Failure::Usage(
                    "--family sig1 and pz take --params, not a matrix".into(),
                ));
            }
            if params.is_empty() {
                return Err(Failure::Usage(
                    "--params is required for sig1 and pz".into(),
                ));
            }
            if params.len() + 1 > max_n {
                return Err(Failure::Invalid(
                    Error::DimensionTooLarge {
                        n: params.len() + 1,
                        max: max_n,
                    }
                    .to_string(),
                ));
            }
            let raw = if family == Family::Sig1 {
                kernel_signature1(&SignatureOneSpec::new(params.to_vec())?)?
            } else {
                kernel_park_zhang(&ParkZhangSpec::new(params.to_vec())?)?
            };
            raw.aligned_to_source()?
        }
    };
    let core = assemble_from_valid(&form.source)?;
    if !form.equivalent(&core) {
        emit(out, &render_form(&form, format))?;
        return Err(Failure::Mismatch(format!(
            "{family:?} kernel differs from the general kernel of\n{}",
            form.source.matrix()
        )));
    }
    emit(out, &render_form(&form, format))
}

fn read_matrix(
    inline: Option<&str>,
    file: Option<&PathBuf>,
) -> std::result::Result<IntegerMatrix, Failure> {
    let text = match (inline, file) {
        (Some(s), None) => s.to_string(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?,
        _ => {
            return Err(Failure::Usage(
                "exactly one of --matrix, --matrix-file is required".into(),
            ))
        }
    };
    Ok(IntegerMatrix::parse(&text)?)
}

fn read_form(path: &PathBuf) -> std::result::Result<BergmanKernelForm, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    Ok(BergmanKernelForm::from_json_value(&value)?)
}

/// Comma-separated complex numbers in the `a+bi` syntax of `num_complex`.
pub fn parse_point(s: &str) -> std::result::Result<Vec<Complex64>, Failure> {
    s.split(',')
        .map(|tok| {
            let tok: String = tok.chars().filter(|c| !c.is_whitespace()).collect();
            tok.parse::<Complex64>()
                .ok()
                .filter(|z| z.re.is_finite() && z.im.is_finite())
                .ok_or_else(|| Failure::Usage(format!("not a complex number: {tok:?}")))
        })
        .collect()
}

fn emit(out: &mut dyn Write, s: &str) -> Outcome {
    out.write_all(s.as_bytes())
        .map_err(|e| Failure::Invalid(format!("cannot write output: {e}")))
}

fn json_line(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn render_form(k: &BergmanKernelForm, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = k.to_json_string();
            s.push('\n');
            s
        }
        Format::Latex => format!("{}\n", k.to_latex()),
        Format::Text => format!("{}\n", k.to_text()),
    }
}

fn render_validation(b: &ValidDefiningMatrix, format: Format) -> String {
    match format {
        Format::Json => json_line(&json!({
            "valid": true,
            "n": b.dim(),
            "detB": b.det().to_string(),
            "matrix": b.matrix().to_json_value(),
            "adjugate": b.adjugate().to_json_value(),
        })),
        Format::Latex => format!(
            "B = {}, \\quad \\det B = {}, \\quad \\operatorname{{adj}} B = {}\n",
            pmatrix(b.matrix()),
            b.det(),
            pmatrix(b.adjugate())
        ),
        Format::Text => format!(
            "valid (n = {}, det B = {})\nB =\n{}\nadj B =\n{}\n",
            b.dim(),
            b.det(),
            b.matrix(),
            b.adjugate()
        ),
    }
}

fn pmatrix(m: &IntegerMatrix) -> String {
    let rows: Vec<String> = m
        .rows()
        .map(|r| {
            r.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" & ")
        })
        .collect();
    format!(
        "\\begin{{pmatrix}} {} \\end{{pmatrix}}",
        rows.join(" \\\\ ")
    )
}

fn render_value(p: &[Complex64], q: &[Complex64], v: Complex64, format: Format) -> String {
    let pair = |z: &Complex64| json!([z.re, z.im]);
    match format {
        Format::Json => json_line(&json!({
            "p": p.iter().map(pair).collect::<Vec<_>>(),
            "q": q.iter().map(pair).collect::<Vec<_>>(),
            "value": {"re": v.re, "im": v.im},
        })),
        Format::Latex => format!(
            "K(p,q) \\approx {:e} {} {:e}\\,i\n",
            v.re,
            if v.im < 0.0 { "-" } else { "+" },
            v.im.abs()
        ),
        Format::Text => format!(
            "{:e} {} {:e}i\n",
            v.re,
            if v.im < 0.0 { "-" } else { "+" },
            v.im.abs()
        ),
    }
}
