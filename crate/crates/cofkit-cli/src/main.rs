//! `cofkit` command-line front end.

mod input;

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cofkit::lattice::{monoclinic_variants, orthorhombic_variants, twin_table, CrystalSystem, OrthorhombicParams};
use cofkit::report::{analyze, to_rounded_json, AnalyzeOptions};
use cofkit::startwin::{
    branch_parameters, det_one_curve, half_star_d_one_curve, project_params, star_classify,
    star_parameter_curves, Branch, CurveSample, ManifoldTarget, StarVariant, TwinColumnAB,
};
use cofkit::twinning::TwinKind;
use cofkit::{CofkitError, Tolerances};

#[derive(Debug, Parser)]
#[command(name = "cofkit", version)]
#[command(about = "Twins, cofactor conditions and star twins of cubic-to-monoclinic martensite")]
struct Cli {
    /// Tolerance overrides, e.g. `cc_gate=1e-4,membership=1e-9`.
    #[arg(long, global = true, env = "COFKIT_TOL")]
    tol: Option<String>,

    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    /// CSV output where a command supports it.
    #[arg(long, global = true)]
    csv: bool,

    /// Seed for the multistart projection.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Proceed past the cofactor gate (diagnostic runs).
    #[arg(long, global = true)]
    force: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct InputArgs {
    /// Built-in material preset.
    #[arg(long)]
    preset: Option<String>,

    /// Inline `a=..,b=..,c=..,d=..[,system=..]` or a key-value file path.
    #[arg(long)]
    params: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    I,
    Ii,
}

impl KindArg {
    fn kind(self) -> TwinKind {
        match self {
            Self::I => TwinKind::TypeI,
            Self::Ii => TwinKind::TypeII,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CurveArg {
    Star,
    Half,
    /// Half-star curve at `d = 1`; the range is over `lambda_3`.
    DOne,
    /// The dashed line `lambda = 1 / d`.
    DetOne,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline: variants, twin table, cofactor metrics, star twins, hull findings.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Closed-form star and half-star curves lambda(d) as CSV.
    Curves {
        #[arg(long, value_enum, default_value = "ii")]
        kind: KindArg,
        #[arg(long, value_enum, default_value = "star")]
        curve: CurveArg,
        #[arg(long)]
        d_min: f64,
        #[arg(long)]
        d_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Nearest stretch on a cofactor or star manifold.
    Project {
        #[command(flatten)]
        input: InputArgs,
        /// cc-i, cc-ii, star-i, star-ii, half-star-i, half-star-ii.
        #[arg(long, default_value = "star-ii")]
        target: String,
        /// Restrict to one type I/II column (A or B); default tries both.
        #[arg(long)]
        column: Option<String>,
    },
    /// Twin table of the variant set.
    TwinTable {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Classify synthetic parameters along a closed-form branch.
    Sweep {
        /// Branch name, e.g. S2c or H1a.
        #[arg(long)]
        branch: String,
        #[arg(long)]
        d_min: f64,
        #[arg(long)]
        d_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value = "A")]
        column: String,
    },
}

/// Inclusive grid `lo, lo + step, ...` up to `hi`, snapped to 1e-12 so printed
/// values stay short.
fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>, CofkitError> {
    if !(step > 0.0 && lo.is_finite() && hi.is_finite()) {
        return Err(CofkitError::InvalidInput("range needs finite bounds and a positive step".into()));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((lo + step * i as f64) * 1e12).round() / 1e12).collect())
}

fn column_arg(s: &str) -> Result<TwinColumnAB, CofkitError> {
    match s.to_ascii_uppercase().as_str() {
        "A" => Ok(TwinColumnAB::A),
        "B" => Ok(TwinColumnAB::B),
        _ => Err(CofkitError::InvalidInput(format!("column must be A or B, got `{s}`"))),
    }
}

fn curves_csv(rows: &[CurveSample]) -> String {
    let mut s = String::from("branch,d,lambda,residual\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{:e}", r.branch, r.d, r.lambda, r.residual);
    }
    s
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, CofkitError> {
    to_rounded_json(v).map(|s| s + "\n")
}

fn run(cli: &Cli) -> Result<String, CofkitError> {
    let tol = match &cli.tol {
        Some(spec) => Tolerances::default().with_overrides(spec)?,
        None => Tolerances::default(),
    };
    match &cli.command {
        Command::Analyze { input } => {
            let inp = input::resolve(input.preset.as_deref(), input.params.as_deref())?;
            let report = analyze(&inp.source, inp.system, &inp.params, AnalyzeOptions { force: cli.force }, &tol)?;
            if cli.json {
                Ok(report.to_json()? + "\n")
            } else {
                Ok(report.to_text())
            }
        }
        Command::Curves { kind, curve, d_min, d_max, step } => {
            let g = grid(*d_min, *d_max, *step)?;
            let rows = match curve {
                CurveArg::Star => star_parameter_curves(kind.kind(), StarVariant::Full, &g)?,
                CurveArg::Half => star_parameter_curves(kind.kind(), StarVariant::Half, &g)?,
                CurveArg::DOne => half_star_d_one_curve(&g)?,
                CurveArg::DetOne => det_one_curve(&g),
            };
            if cli.json {
                json(&rows)
            } else {
                Ok(curves_csv(&rows))
            }
        }
        Command::Project { input, target, column } => {
            let inp = input::resolve(input.preset.as_deref(), input.params.as_deref())?;
            let target = ManifoldTarget::parse(target)
                .ok_or_else(|| CofkitError::InvalidInput(format!("unknown target `{target}`")))?;
            let columns = match column {
                Some(c) => vec![column_arg(c)?],
                None => vec![TwinColumnAB::A, TwinColumnAB::B],
            };
            let mut best: Option<cofkit::startwin::Projection> = None;
            let mut last_err = None;
            for c in columns {
                match project_params(&inp.params, target, c, cli.seed) {
                    Ok(p) if best.as_ref().map_or(true, |b| p.distance < b.distance) => best = Some(p),
                    Ok(_) => {}
                    Err(e) => last_err = Some(e),
                }
            }
            let p = best.ok_or_else(|| last_err.unwrap_or(CofkitError::NonConvergence { iterations: 0, residual: f64::NAN }))?;
            if cli.json {
                return json(&p);
            }
            let mut s = String::new();
            let _ = writeln!(s, "input: {}", inp.source);
            let _ = writeln!(s, "target: {target:?} (column {:?})", p.column);
            let _ = writeln!(s, "distance (Frobenius): {:.6e}", p.distance);
            let q = p.params;
            let _ = writeln!(s, "projected: a = {:.6}, b = {:.6}, c = {:.6}, d = {:.6}", q.a, q.b, q.c, q.d);
            for row in p.matrix.0 {
                let _ = writeln!(s, "  [{:>10.6} {:>10.6} {:>10.6}]", row[0], row[1], row[2]);
            }
            let _ = writeln!(s, "constraint residual: {:.3e}", p.constraint_residual);
            Ok(s)
        }
        Command::TwinTable { input } => {
            let inp = input::resolve(input.preset.as_deref(), input.params.as_deref())?;
            let vs = match inp.system {
                CrystalSystem::Monoclinic => monoclinic_variants(&inp.params)?,
                CrystalSystem::Orthorhombic => {
                    orthorhombic_variants(&OrthorhombicParams::new(inp.params.a, inp.params.b, inp.params.d))?
                }
            };
            let table = twin_table(&vs, &tol);
            if cli.json {
                return json(&table);
            }
            let mut s = String::new();
            if cli.csv {
                s.push_str("rotation,column,non_conventional,i,j\n");
                for e in table.entries() {
                    let _ = writeln!(
                        s,
                        "\"{}\",{},{},{},{}",
                        e.rotation.label(),
                        e.column.label(),
                        e.non_conventional,
                        e.pair.0,
                        e.pair.1
                    );
                }
                return Ok(s);
            }
            for row in &table.rows {
                let cells: Vec<String> = row
                    .cells
                    .iter()
                    .map(|c| {
                        let pairs: Vec<String> = c.pairs.iter().map(|(i, j)| format!("({i},{j})")).collect();
                        format!("{}: {}", c.column.label(), pairs.join(" "))
                    })
                    .collect();
                let _ = writeln!(s, "{:<14} {}", row.rotation.label(), cells.join("; "));
            }
            for w in &table.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            Ok(s)
        }
        Command::Sweep { branch, d_min, d_max, step, column } => {
            let b = Branch::from_name(branch)
                .ok_or_else(|| CofkitError::InvalidInput(format!("unknown branch `{branch}`")))?;
            let col = column_arg(column)?;
            let mut s = String::from("branch,d,lambda,a,b,c,classification,mu_star\n");
            for d in grid(*d_min, *d_max, *step)? {
                let lambda = b.lambda(d)?;
                let p = branch_parameters(b, d, col)?;
                let r = star_classify(&p, col.pair(), b.kind(), cli.force, &tol)?;
                let mu = r.mu_star.map_or(String::new(), |m| format!("{m}"));
                let _ = writeln!(
                    s,
                    "{},{d},{lambda},{},{},{},{:?},{mu}",
                    b.name(),
                    p.a,
                    p.b,
                    p.c,
                    r.classification
                );
            }
            Ok(s)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_non_convergence() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
