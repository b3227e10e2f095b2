use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wml_core::expt::GridAxis;
use wml_core::feature::MomentPath;
use wml_core::model::{KernelNormalization, ModelSpec};
use wml_core::quad::QuadratureConfig;

#[derive(Debug, Parser)]
#[command(name = "wml", version, about = "Weak-moment feature maps: experiments, diagnostics and kernel sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the experiment catalog.
    List(OutputArgs),
    /// Run one catalog experiment.
    Run(RunArgs),
    /// Feature vector, metric tensor, ranks and transversality at one (θ, λ).
    Eval(EvalArgs),
    /// Diagnostics over a grid of kernel and model parameters.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Csv => "csv",
        })
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub name: String,
    #[command(flatten)]
    pub output: OutputArgs,
    /// In CSV, write the experiment's table instead of its metrics.
    #[arg(long)]
    pub table: bool,
    /// Probe RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Model, e.g. `gaussian:mu=0,sigma=1` or `stable:alpha=1.5`.
    #[arg(long)]
    pub model: String,
    /// Moment orders, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub orders: Vec<u32>,
    #[arg(long, default_value = "auto")]
    pub path: String,
    #[arg(long, default_value = "probability")]
    pub kernel_form: String,
    /// Treat the kernel center as a free parameter (λ = (s, c)).
    #[arg(long)]
    pub free_center: bool,
    /// Stratum in feature space: `y<i>=<v>` (coordinate hyperplane) or
    /// `sphere=<r>` (sphere about the origin). Repeatable.
    #[arg(long)]
    pub stratum: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(flatten)]
    pub tolerance: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Kernel scale.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub s: f64,
    /// Kernel center.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub c: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Kernel-scale grid: `lo:hi:n`, `loglo:hi:n` or a single value.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub s: String,
    /// Kernel-center grid, same grammar.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub c: String,
    /// Model-parameter grid `name=lo:hi:n`; unlisted parameters stay at the
    /// model's value. Repeatable.
    #[arg(long)]
    pub grid: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    List,
    Run,
    Eval,
    Sweep,
}

/// A usage problem, reported with exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid value for --{}: {}", self.flag, self.message)
    }
}

fn usage(flag: &str, message: impl fmt::Display) -> UsageError {
    UsageError { flag: flag.to_string(), message: message.to_string() }
}

/// Validated configuration of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub experiment: Option<String>,
    pub model: Option<ModelSpec>,
    pub s: GridAxis,
    pub c: GridAxis,
    pub kernel_form: KernelNormalization,
    pub free_center: bool,
    pub orders: Vec<u32>,
    pub path: MomentPath,
    /// Per model parameter, in `--grid` order.
    pub grids: Vec<(String, GridAxis)>,
    pub strata: Vec<String>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub table: bool,
    pub seed: Option<u64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

impl RunConfig {
    fn empty(command: CommandKind, output: OutputArgs) -> Self {
        Self {
            command,
            experiment: None,
            model: None,
            s: GridAxis::point(1.0),
            c: GridAxis::point(0.0),
            kernel_form: KernelNormalization::Probability,
            free_center: false,
            orders: vec![0, 1, 2],
            path: MomentPath::Auto,
            grids: Vec::new(),
            strata: Vec::new(),
            format: output.format,
            out: output.out,
            table: false,
            seed: None,
            rel_tol: None,
            abs_tol: None,
            max_subdivisions: None,
        }
    }

    pub fn from_cli(cli: Cli) -> Result<Self, UsageError> {
        let cfg = match cli.command {
            Command::List(output) => Self::empty(CommandKind::List, output),
            Command::Run(a) => {
                let mut cfg = Self::empty(CommandKind::Run, a.output);
                cfg.experiment = Some(a.name);
                cfg.table = a.table;
                cfg.seed = a.seed;
                cfg.set_tolerance(a.tolerance);
                cfg
            }
            Command::Eval(a) => {
                let mut cfg = Self::from_kernel_args(CommandKind::Eval, a.kernel)?;
                cfg.s = GridAxis::point(a.s);
                cfg.c = GridAxis::point(a.c);
                cfg
            }
            Command::Sweep(a) => {
                let mut cfg = Self::from_kernel_args(CommandKind::Sweep, a.kernel)?;
                cfg.s = a.s.parse().map_err(|e| usage("s", e))?;
                cfg.c = a.c.parse().map_err(|e| usage("c", e))?;
                for g in &a.grid {
                    let (name, axis) = g
                        .split_once('=')
                        .ok_or_else(|| usage("grid", format!("`{g}` is not `name=lo:hi:n`")))?;
                    let axis: GridAxis = axis.parse().map_err(|e| usage("grid", e))?;
                    cfg.grids.push((name.trim().to_string(), axis));
                }
                cfg
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_kernel_args(command: CommandKind, a: KernelArgs) -> Result<Self, UsageError> {
        let mut cfg = Self::empty(command, a.output);
        cfg.model = Some(a.model.parse().map_err(|e| usage("model", e))?);
        cfg.orders = a.orders;
        cfg.path = a.path.parse().map_err(|e| usage("path", e))?;
        cfg.kernel_form = a.kernel_form.parse().map_err(|e| usage("kernel-form", e))?;
        cfg.free_center = a.free_center;
        cfg.strata = a.stratum;
        cfg.set_tolerance(a.tolerance);
        Ok(cfg)
    }

    fn set_tolerance(&mut self, t: ToleranceArgs) {
        self.rel_tol = t.rel_tol;
        self.abs_tol = t.abs_tol;
        self.max_subdivisions = t.max_subdivisions;
    }

    fn validate(&self) -> Result<(), UsageError> {
        if self.orders.is_empty() || self.orders.windows(2).any(|w| w[0] >= w[1]) {
            return Err(usage("orders", "orders must be non-empty and strictly increasing"));
        }
        if let Some(q) = self.quadrature_override() {
            q.validate().map_err(|e| usage("rel-tol", e))?;
        }
        if !self.free_center && self.c.n != 1 {
            return Err(usage("c", "a center grid needs --free-center"));
        }
        Ok(())
    }

    /// Quadrature settings with any tolerance flags applied to `base`.
    pub fn quadrature(&self, base: QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol.unwrap_or(base.rel_tol),
            abs_tol: self.abs_tol.unwrap_or(base.abs_tol),
            max_subdivisions: self.max_subdivisions.unwrap_or(base.max_subdivisions),
            ..base
        }
    }

    /// `Some` when any tolerance flag was given.
    pub fn quadrature_override(&self) -> Option<QuadratureConfig> {
        let any = self.rel_tol.is_some() || self.abs_tol.is_some() || self.max_subdivisions.is_some();
        any.then(|| self.quadrature(QuadratureConfig::oscillatory()))
    }

    /// The argument list that parses back to this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec!["wml".to_string()];
        let mut push = |flag: &str, value: String| {
            args.push(format!("--{flag}"));
            args.push(value);
        };
        let mut tail = Vec::new();
        match self.command {
            CommandKind::List => tail.push("list".to_string()),
            CommandKind::Run => {
                tail.push("run".to_string());
                tail.push(self.experiment.clone().unwrap_or_default());
                if self.table {
                    tail.push("--table".to_string());
                }
                if let Some(seed) = self.seed {
                    push("seed", seed.to_string());
                }
            }
            CommandKind::Eval | CommandKind::Sweep => {
                tail.push(if self.command == CommandKind::Eval { "eval" } else { "sweep" }.to_string());
                if let Some(m) = &self.model {
                    push("model", m.to_string());
                }
                push("orders", self.orders.iter().map(u32::to_string).collect::<Vec<_>>().join(","));
                push("path", self.path.to_string());
                push("kernel-form", self.kernel_form.to_string());
                if self.free_center {
                    tail.push("--free-center".to_string());
                }
                for s in &self.strata {
                    push("stratum", s.clone());
                }
                if self.command == CommandKind::Eval {
                    push("s", self.s.lo.to_string());
                    push("c", self.c.lo.to_string());
                } else {
                    push("s", self.s.to_string());
                    push("c", self.c.to_string());
                    for (name, axis) in &self.grids {
                        push("grid", format!("{name}={axis}"));
                    }
                }
            }
        }
        if self.command != CommandKind::List {
            if let Some(v) = self.rel_tol {
                push("rel-tol", v.to_string());
            }
            if let Some(v) = self.abs_tol {
                push("abs-tol", v.to_string());
            }
            if let Some(v) = self.max_subdivisions {
                push("max-subdivisions", v.to_string());
            }
        }
        push("format", self.format.to_string());
        if let Some(out) = &self.out {
            push("out", out.display().to_string());
        }
        // subcommand first, then its flags
        let flags = args.split_off(1);
        args.extend(tail);
        args.extend(flags);
        args
    }

    pub fn parse_from<I, T>(argv: I) -> Result<Self, ParseFailure>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(argv).map_err(ParseFailure::Clap)?;
        Self::from_cli(cli).map_err(ParseFailure::Usage)
    }
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Usage(UsageError),
}

/// A stratum given on the command line, resolved once the feature
/// dimension is known.
#[derive(Debug, Clone, PartialEq)]
pub enum StratumText {
    Coordinate { index: usize, value: f64 },
    Sphere { radius: f64 },
}

impl FromStr for StratumText {
    type Err = UsageError;
    fn from_str(s: &str) -> Result<Self, UsageError> {
        let bad = || usage("stratum", format!("`{s}` is not `y<i>=<value>` or `sphere=<radius>`"));
        let (lhs, rhs) = s.split_once('=').ok_or_else(bad)?;
        let value: f64 = rhs.trim().parse().map_err(|_| bad())?;
        match lhs.trim() {
            "sphere" => Ok(Self::Sphere { radius: value }),
            l => {
                let index = l.strip_prefix('y').and_then(|i| i.parse().ok()).ok_or_else(bad)?;
                Ok(Self::Coordinate { index, value })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        RunConfig::parse_from(args.iter().copied()).unwrap()
    }

    fn round_trip(cfg: &RunConfig) {
        let again = RunConfig::parse_from(cfg.to_args()).unwrap();
        assert_eq!(&again, cfg, "{:?}", cfg.to_args());
    }

    #[test]
    fn round_trips() {
        for argv in [
            vec!["wml", "list"],
            vec!["wml", "list", "--format", "csv", "--out", "x.csv"],
            vec!["wml", "run", "cauchy-fisher", "--seed", "7", "--rel-tol", "1e-11", "--table"],
            vec!["wml", "eval", "--model", "cauchy:mu=0.5", "--s", "0.3", "--c", "0.1", "--orders", "0,2"],
            vec![
                "wml", "sweep", "--model", "gaussian:mu=0,sigma=1", "--orders", "0,1,2", "--s", "log1:100:12",
                "--grid", "mu=-1:1:3", "--stratum", "y1=0", "--stratum", "sphere=0.5", "--free-center", "--c",
                "-1:1:2", "--kernel-form", "unit-peak", "--path", "density", "--max-subdivisions", "900",
            ],
        ] {
            round_trip(&parse(&argv));
        }
    }

    #[test]
    fn awkward_floats_round_trip() {
        let mut cfg = parse(&["wml", "eval", "--model", "gaussian:mu=0,sigma=1"]);
        cfg.s = GridAxis::point(0.1 + 0.2);
        cfg.c = GridAxis::point(-1e-300);
        cfg.model = Some(ModelSpec::gaussian(1.0 / 3.0, std::f64::consts::PI).unwrap());
        cfg.abs_tol = Some(3.3e-15);
        round_trip(&cfg);
    }

    #[test]
    fn usage_errors_name_the_flag() {
        for (argv, flag) in [
            (vec!["wml", "eval", "--model", "nope:x=1"], "model"),
            (vec!["wml", "eval", "--model", "cauchy", "--orders", "2,1"], "orders"),
            (vec!["wml", "sweep", "--model", "cauchy", "--s", "1:2"], "s"),
            (vec!["wml", "sweep", "--model", "cauchy", "--c", "0:1:3"], "c"),
            (vec!["wml", "eval", "--model", "cauchy", "--kernel-form", "box"], "kernel-form"),
            (vec!["wml", "run", "x", "--rel-tol", "-1"], "rel-tol"),
        ] {
            match RunConfig::parse_from(argv) {
                Err(ParseFailure::Usage(e)) => assert_eq!(e.flag, flag),
                other => panic!("{other:?}"),
            }
        }
        assert!(matches!(RunConfig::parse_from(["wml", "run", "--bogus"]), Err(ParseFailure::Clap(_))));
    }

    #[test]
    fn strata_text() {
        assert_eq!("y2=0.5".parse::<StratumText>().unwrap(), StratumText::Coordinate { index: 2, value: 0.5 });
        assert_eq!("sphere=1".parse::<StratumText>().unwrap(), StratumText::Sphere { radius: 1.0 });
        assert!("z=1".parse::<StratumText>().is_err());
        assert!("y1".parse::<StratumText>().is_err());
    }
}
