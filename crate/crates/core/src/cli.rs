//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input (including unknown suites), 3 a
//! verification check failed, 1 an I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::geometry::{from_oblate, sample_spheroid, to_oblate, BranchCut, OblatePoint, SourceVector, SpacetimePoint, Vec3};
use crate::render::{sample_slice, write_slice_files, GridSpec, OutputFormat, Quantity, Scaling};
use crate::shell::{abrupt_layer_coefficients, interpolated_field, shell_source_density, TransitionProfile};
use crate::verify::{run_suite, SuiteOptions, DEFAULT_SEED};
use crate::wavelet::{beam_metrics, jump_field, psi_avg, wavelet, EmissionCenter, FieldValue};

const UNITS: &str = "Units: c = 1; all lengths and times share one abstract unit.";

#[derive(Debug, Parser)]
#[command(name = "eigenwavelet", version, about = "Complex-source pulsed-beam wavelets of the 3+1D wave equation", after_help = UNITS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a field on the slice x2 = const, one file per time.
    Render(RenderArgs),
    /// Run a verification suite and print its report.
    Verify(VerifyArgs),
    /// Emit shell-source grids or abrupt-layer tables on a spheroid.
    Source(SourceArgs),
    /// Tabulate angular focus and pulse width against b.
    Focus(FocusArgs),
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| format!("'{s}' is not x,y,z: {e}"))?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("'{s}' needs exactly three components")),
    }
}

/// Comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

fn parse_list(s: &str) -> std::result::Result<FloatList, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<std::result::Result<_, _>>()
        .map(FloatList)
}

fn parse_cut(s: &str) -> std::result::Result<BranchCut, String> {
    let cut = match s.split_once(':') {
        None if s == "disk" => BranchCut::StandardDisk,
        Some(("upper", alpha)) => BranchCut::UpperSpheroid(alpha.parse().map_err(|e| format!("{e}"))?),
        Some(("lower", alpha)) => BranchCut::LowerSpheroid(alpha.parse().map_err(|e| format!("{e}"))?),
        _ => return Err(format!("'{s}' is not disk, upper:ALPHA or lower:ALPHA")),
    };
    cut.validate().map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("'{s}' is not N_Q,N_PHI"))?;
    let n = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
    Ok((n(a)?, n(b)?))
}

#[derive(Debug, Args)]
pub struct CenterArgs {
    /// Imaginary spatial displacement a.
    #[arg(long, value_name = "X,Y,Z", default_value = "0,0,1", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub a: Vec3,
    /// Imaginary time b; requires |b| > |a|.
    #[arg(long, default_value_t = 1.01, allow_hyphen_values = true)]
    pub b: f64,
    /// Emission point r0.
    #[arg(long, value_name = "X,Y,Z", default_value = "0,0,0", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub r0: Vec3,
    /// Emission time t0.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
}

impl CenterArgs {
    fn center(&self) -> Result<EmissionCenter> {
        EmissionCenter::new(self.r0, self.t0, SourceVector::new(self.a)?, self.b)
    }
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Sampling lattice on the slice.
    #[arg(long, value_name = "X1MIN:X1MAX:N1,X3MIN:X3MAX:N3", default_value = "-3:3:121,-2:8:201", allow_hyphen_values = true)]
    pub grid: String,
    /// Position of the slice plane.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x2: f64,
    /// Observation times, one output per entry.
    #[arg(long, value_name = "T0,T1,...", default_value = "0,2,4", value_parser = parse_list, allow_hyphen_values = true)]
    pub times: FloatList,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec> {
        GridSpec::parse(&self.grid, self.x2, self.times.0.clone())
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output path prefix; files are named PREFIX_t<index>.<ext>.
    #[arg(long, default_value = "eigenwavelet")]
    pub out: String,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[arg(long, value_enum, default_value_t = QuantityArg::Abs)]
    pub quantity: QuantityArg,
    #[arg(long, value_enum, default_value_t = ScaleArg::Linear)]
    pub scale: ScaleArg,
    /// Recorded for reproducibility; rendering itself is deterministic.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Pgm,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum QuantityArg {
    Abs,
    Abs2,
    Re,
    Im,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Psi,
    #[value(name = "psi_avg")]
    PsiAvg,
    #[value(name = "psi_jump")]
    PsiJump,
    #[value(name = "shell_source")]
    ShellSource,
    Interpolated,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = UNITS)]
pub struct RenderArgs {
    #[arg(long, value_enum, default_value_t = FieldArg::Psi)]
    pub field: FieldArg,
    #[command(flatten)]
    pub center: CenterArgs,
    /// Branch cut for psi.
    #[arg(long, value_name = "disk|upper:ALPHA|lower:ALPHA", default_value = "disk", value_parser = parse_cut)]
    pub cut: BranchCut,
    /// Spheroid parameter for psi_avg.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Inner edge of the transition shell (shell_source, interpolated).
    #[arg(long)]
    pub p1: Option<f64>,
    /// Outer edge of the transition shell.
    #[arg(long)]
    pub p2: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// key=value file whose keys mirror the flag names; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = UNITS)]
pub struct VerifyArgs {
    /// identities | gradients | wave-operator | jumps | farfield | limits | shell | huygens
    pub suite: String,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Replace every check's threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = UNITS)]
pub struct SourceArgs {
    #[command(flatten)]
    pub center: CenterArgs,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long)]
    pub p2: Option<f64>,
    /// Tabulate the single and double layer coefficients on S_ALPHA instead.
    #[arg(long, value_name = "ALPHA")]
    pub abrupt: Option<f64>,
    /// Surface table resolution for --abrupt.
    #[arg(long, value_name = "N_Q,N_PHI", default_value = "16,16", value_parser = parse_pair)]
    pub on_surface: (usize, usize),
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true, after_help = UNITS)]
pub struct FocusArgs {
    #[arg(long, value_name = "X,Y,Z", default_value = "0,0,1", value_parser = parse_vec3, allow_hyphen_values = true)]
    pub a: Vec3,
    /// Imaginary times to compare; each must exceed |a|.
    #[arg(long, value_name = "B0,B1,...", default_value = "1.5,1.1,1.01", value_parser = parse_list)]
    pub b_list: FloatList,
    /// Observation distance.
    #[arg(long, default_value_t = 100.0)]
    pub r_far: f64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

/// Splices `--key=value` lines from a `--config` file in front of the
/// command-line flags, so that explicit flags win.
fn expand_config(args: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let mut path = None;
    for (i, arg) in args.iter().enumerate() {
        let s = arg.to_string_lossy();
        if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if s == "--config" {
            path = args.get(i + 1).map(|p| p.to_string_lossy().into_owned());
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read config '{path}': {e}"))?;
    let mut injected = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{path}:{}: expected key=value", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key == "config" {
            return Err(format!("{path}:{}: config files cannot nest", n + 1));
        }
        injected.push(OsString::from(format!("--{key}={}", value.trim())));
    }
    // program name and subcommand come first
    let split = 2.min(args.len());
    let mut out = args[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[split..]);
    Ok(out)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Render(a) => cmd_render(&a, stdout),
        Command::Verify(a) => cmd_verify(&a, stdout),
        Command::Source(a) => cmd_source(&a, stdout),
        Command::Focus(a) => cmd_focus(&a, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            1
        }
    }
}

fn output_settings(o: &OutputArgs) -> (OutputFormat, Quantity, Scaling) {
    let format = match o.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Pgm => OutputFormat::Pgm,
        FormatArg::Both => OutputFormat::Both,
    };
    let quantity = match o.quantity {
        QuantityArg::Abs => Quantity::Abs,
        QuantityArg::Abs2 => Quantity::Abs2,
        QuantityArg::Re => Quantity::Re,
        QuantityArg::Im => Quantity::Im,
    };
    let scaling = match o.scale {
        ScaleArg::Linear => Scaling::Linear,
        ScaleArg::Log => Scaling::Log,
    };
    (format, quantity, scaling)
}

type Field<'a> = Box<dyn Fn(SpacetimePoint) -> Result<FieldValue> + Sync + 'a>;

fn profile(p1: Option<f64>, p2: Option<f64>, what: &str) -> std::result::Result<TransitionProfile, Failure> {
    match (p1, p2) {
        (Some(p1), Some(p2)) => Ok(TransitionProfile::new(p1, p2)?),
        _ => Err(invalid(format!("{what} requires --p1 and --p2"))),
    }
}

fn render_grid(
    field: &Field<'_>,
    grid: &GridSpec,
    output: &OutputArgs,
    stdout: &mut dyn Write,
) -> std::result::Result<i32, Failure> {
    let (format, quantity, scaling) = output_settings(output);
    for (i, &t) in grid.times.iter().enumerate() {
        let slice = sample_slice(field.as_ref(), grid, t);
        for path in write_slice_files(&slice, &output.out, i, format, quantity, scaling)? {
            writeln!(stdout, "{}", path.display())?;
        }
    }
    Ok(0)
}

fn cmd_render(args: &RenderArgs, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let z = args.center.center()?;
    let grid = args.grid.spec()?;
    let field: Field<'_> = match args.field {
        FieldArg::Psi => {
            let cut = args.cut;
            Box::new(move |x| wavelet(x, &z, cut))
        }
        FieldArg::PsiAvg => {
            let alpha = args.alpha.ok_or_else(|| invalid("psi_avg requires --alpha"))?;
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(invalid(format!("--alpha must be > 0, got {alpha}")));
            }
            Box::new(move |x| psi_avg(x, &z, alpha))
        }
        FieldArg::PsiJump => Box::new(move |x| jump_field(x, &z)),
        FieldArg::ShellSource => {
            let prof = profile(args.p1, args.p2, "shell_source")?;
            Box::new(move |x| shell_source_density(x, &prof, &z))
        }
        FieldArg::Interpolated => {
            let prof = profile(args.p1, args.p2, "interpolated")?;
            Box::new(move |x| interpolated_field(x, &prof, &z))
        }
    };
    render_grid(&field, &grid, &args.output, stdout)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    if let Some(t) = args.threshold {
        if !(t >= 0.0) {
            return Err(invalid(format!("--threshold must be >= 0, got {t}")));
        }
    }
    let report = run_suite(&args.suite, &SuiteOptions { seed: args.seed, threshold: args.threshold })?;
    write!(stdout, "{report}")?;
    Ok(if report.passed() { 0 } else { 3 })
}

fn cmd_source(args: &SourceArgs, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let z = args.center.center()?;
    let Some(alpha) = args.abrupt else {
        let prof = profile(args.p1, args.p2, "source")?;
        let grid = args.grid.spec()?;
        let field: Field<'_> = Box::new(move |x| shell_source_density(x, &prof, &z));
        return render_grid(&field, &grid, &args.output, stdout);
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("--abrupt must be > 0, got {alpha}")));
    }
    let (n_q, n_phi) = args.on_surface;
    if n_q < 1 || n_phi < 1 {
        return Err(invalid("--on-surface counts must be >= 1"));
    }
    let points = sample_spheroid(alpha, n_q, n_phi, z.a())?;
    let times = &args.grid.times.0;
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(invalid("time list must be nonempty and finite"));
    }
    for (i, &t) in times.iter().enumerate() {
        let path = PathBuf::from(format!("{}_t{i}.csv", args.output.out));
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(w, "p,q,phi,x1,x2,x3,re_single,im_single,re_double,im_double")?;
        for &r in &points {
            let o = to_oblate(r, z.a())?;
            // snap to the exact surface before evaluating
            let r = from_oblate(OblatePoint::new(alpha, o.q, o.phi), z.a())?;
            let x = SpacetimePoint::new(z.r0() + r, t);
            let layer = abrupt_layer_coefficients(x, alpha, &z)?;
            let pos = z.r0() + r;
            writeln!(
                w,
                "{alpha},{},{},{},{},{},{},{},{},{}",
                o.q,
                o.phi,
                pos.x1,
                pos.x2,
                pos.x3,
                layer.single_layer.re,
                layer.single_layer.im,
                layer.double_layer.re,
                layer.double_layer.im
            )?;
        }
        w.flush()?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(0)
}

fn cmd_focus(args: &FocusArgs, stdout: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let a = SourceVector::new(args.a)?;
    let am = a.magnitude();
    if args.b_list.0.is_empty() {
        return Err(invalid("--b-list must not be empty"));
    }
    if let Some(b) = args.b_list.0.iter().find(|b| !(**b > am)) {
        return Err(Error::NotTimelike { a: am, b: *b }.into());
    }
    if !(args.r_far > am) {
        return Err(invalid(format!("--r-far must exceed |a| = {am}")));
    }
    let mut table = String::from("b_over_a,angular_fwhm,axial_pulse_width\n");
    for &b in &args.b_list.0 {
        let z = EmissionCenter::at_origin(a, b)?;
        let m = beam_metrics(&z, args.r_far, args.r_far)?;
        table.push_str(&format!("{},{},{}\n", b / am, m.angular_fwhm, m.axial_pulse_width));
    }
    match &args.out {
        Some(path) => {
            std::fs::write(path, &table)?;
            writeln!(stdout, "{}", path.display())?;
        }
        None => write!(stdout, "{table}")?,
    }
    Ok(0)
}
