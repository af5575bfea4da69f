//! `berktree`: command-line front end for trees, curvatures, barycenters,
//! the minimal resultant locus and equidistribution tables.

use std::fs;
use std::process::ExitCode;
use std::sync::Arc;

use berktree::crucial::{
    averaged_total_variation, barycenter, check_slope_formula, crucial_curvature, crucial_curvature_oracle_in, z_set,
    CrucialFn,
};
use berktree::report::{
    barycenter_json, depth_report_json, equidist_csv, equidist_json, measure_json, min_res_loc_json, point_json, q_str,
    tree_dot, tree_json,
};
use berktree::resloc::{depth_report, equidist_report, identity_check_many, min_res_loc_in, ord_res_sample};
use berktree::valfield::{format_exact, parse_q, parse_scalar};
use berktree::{Ball, Error, Poly, Tower, TreeFamily};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "berktree", version, about = "Trucco trees, crucial curvatures and minimal resultant loci")]
struct Cli {
    /// Residue characteristic.
    #[arg(long, global = true, default_value_t = 5)]
    p: u64,
    /// Polynomial: an expression such as `10z^3 - 3z^2` or a coefficient
    /// list `[c0, c1, ...]`.
    #[arg(long, global = true, default_value = "z^2")]
    poly: String,
    /// Iterate `j` of the polynomial.
    #[arg(long, short = 'j', global = true, default_value_t = 1)]
    iterate: usize,
    /// Tree level `n`.
    #[arg(long, short = 'n', global = true, default_value_t = 1)]
    level: usize,
    /// Highest tree level the locus solver may build.
    #[arg(long, global = true, default_value_t = berktree::resloc::DEFAULT_MAX_LEVEL)]
    max_level: usize,
    /// Relative p-adic precision in digits.
    #[arg(long, global = true, env = "BERKTREE_PRECISION")]
    precision: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Base point, simplicity, tameness and critical points.
    Analyze,
    /// The tree `Γ_n`.
    Tree,
    /// The crucial curvature of `P^j` on `Γ_n`.
    Curvature,
    /// The barycenter of the crucial curvature on `Γ_n`.
    Barycenter,
    /// The certified minimal resultant locus of `P^j`.
    Minresloc,
    /// Closed-ball discrepancies against the equilibrium masses.
    Equidist {
        /// Level `s` of the probe tree whose leaves define the balls.
        #[arg(long, default_value_t = 1)]
        probe_level: usize,
    },
    /// Depth report, ordRes and identity check at one point.
    Certify {
        /// Center of the ball, as a scalar literal.
        #[arg(long)]
        center: String,
        /// Radius valuation `a/b`.
        #[arg(long, allow_hyphen_values = true)]
        rv: String,
    },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::Parse(_) | Error::Invalid(_) => 3,
            ref e if e.is_unsupported() => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 3, message: message.into() }
}

struct Session {
    cli: Cli,
    tower: Arc<Tower>,
    poly: Poly,
}

impl Session {
    fn open(cli: Cli) -> Result<Session, Failure> {
        let tower = Tower::new(cli.p, cli.precision)?;
        let poly = Poly::parse(&tower, &cli.poly)?;
        if cli.iterate == 0 {
            return Err(input_error("the iterate must be at least 1"));
        }
        Ok(Session { cli, tower, poly })
    }

    fn header(&self) -> serde_json::Map<String, Value> {
        let mut m = serde_json::Map::new();
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("prime".into(), json!(self.cli.p));
        m.insert("polynomial".into(), json!(self.poly.to_string()));
        m
    }

    fn with_header(&self, body: Value) -> Value {
        let mut m = self.header();
        match body {
            Value::Object(b) => m.extend(b),
            other => {
                m.insert("result".into(), other);
            }
        }
        Value::Object(m)
    }

    fn expect_json(&self) -> Result<(), Failure> {
        match self.cli.format {
            Format::Json => Ok(()),
            f => Err(input_error(format!("format {f:?} is not available for this command").to_lowercase())),
        }
    }

    fn analyze(&self) -> Result<String, Failure> {
        self.expect_json()?;
        let bp = self.poly.base_point()?;
        let crit: Vec<Value> = self
            .poly
            .critical_points()?
            .iter()
            .map(|(c, m)| json!({ "point": format_exact(c), "multiplicity": m }))
            .collect();
        let body = json!({
            "degree": self.poly.degree(),
            "simple": bp.simple,
            "tame": self.poly.is_tame(),
            "base_point": point_json(&bp.ball),
            "fixed_point": format_exact(&bp.fixed_point),
            "critical_points": crit,
        });
        Ok(render(&self.with_header(body)))
    }

    fn tree(&self) -> Result<String, Failure> {
        let mut fam = TreeFamily::new(&self.poly)?;
        let tree = fam.tree(self.cli.level)?;
        match self.cli.format {
            Format::Dot => Ok(tree_dot(&tree)),
            Format::Json => Ok(render(&self.with_header(tree_json(&tree)))),
            Format::Csv => Err(input_error("format csv is not available for this command")),
        }
    }

    fn curvature(&self) -> Result<String, Failure> {
        self.expect_json()?;
        let (n, j) = (self.cli.level, self.cli.iterate);
        let mut fam = TreeFamily::new(&self.poly)?;
        let tree = fam.tree(n)?;
        let nu = crucial_curvature(&tree, j)?;
        let oracle = crucial_curvature_oracle_in(&mut fam, &tree, j)?;
        let cf = CrucialFn::at_base(&mut fam, j)?;
        let slopes = check_slope_formula(&tree, &nu, &cf);
        let z: Vec<Value> = z_set(&tree, j)?.into_iter().map(|id| point_json(tree.ball(id))).collect();
        let body = json!({
            "level": n,
            "iterate": j,
            "measure": measure_json(&tree, &nu),
            "total_mass": q_str(&nu.total()),
            "averaged_total_variation": measure_json(&tree, &averaged_total_variation(&nu)),
            "z_set": z,
            "checks": {
                "oracle_equal": oracle == nu,
                "slope_formula": slopes.is_ok(),
                "slope_directions": slopes.unwrap_or(0),
            },
        });
        Ok(render(&self.with_header(body)))
    }

    fn barycenter(&self) -> Result<String, Failure> {
        self.expect_json()?;
        let (n, j) = (self.cli.level, self.cli.iterate);
        let mut fam = TreeFamily::new(&self.poly)?;
        let tree = fam.tree(n)?;
        let bc = barycenter(&tree, &crucial_curvature(&tree, j)?)?;
        Ok(render(&self.with_header(json!({ "level": n, "iterate": j, "barycenter": barycenter_json(&bc) }))))
    }

    fn minresloc(&self) -> Result<String, Failure> {
        self.expect_json()?;
        let j = self.cli.iterate;
        let mut fam = TreeFamily::new(&self.poly)?;
        let r = min_res_loc_in(&mut fam, j, self.cli.max_level)?;
        let mut points: Vec<Ball> = r.locus.ends().into_iter().cloned().collect();
        points.extend(r.probes.iter().map(|x| x.0.clone()));
        let samples = points.iter().map(|b| ord_res_sample(&self.poly, j, b)).collect::<Result<Vec<_>, _>>()?;
        let identity = identity_check_many(&self.poly, j, &points)?;
        let mut v = min_res_loc_json(&r, &samples);
        v["checks"] = json!({
            "identity": identity.iter().all(|c| c.equal),
            "identity_points": identity.len(),
            "ends_semistable": r.certificates.iter().all(|c| c.semistable),
        });
        v["iterate"] = json!(j);
        Ok(render(&self.with_header(v)))
    }

    fn equidist(&self, s: usize) -> Result<String, Failure> {
        let n_max = self.cli.level.max(s);
        let rep = equidist_report(&self.poly, self.cli.iterate, n_max, s)?;
        match self.cli.format {
            Format::Csv => Ok(equidist_csv(&rep)),
            Format::Json => Ok(render(&self.with_header(equidist_json(&rep)))),
            Format::Dot => Err(input_error("format dot is not available for this command")),
        }
    }

    fn certify(&self, center: &str, rv: &str) -> Result<String, Failure> {
        self.expect_json()?;
        let j = self.cli.iterate;
        let c = parse_scalar(&self.tower, center)?;
        let r = parse_q(rv).ok_or_else(|| input_error(format!("malformed radius '{rv}'")))?;
        let xi = Ball::new(&c, r)?;
        let rep = depth_report(&self.poly, j, &xi)?;
        let sample = ord_res_sample(&self.poly, j, &xi)?;
        let id = identity_check_many(&self.poly, j, std::slice::from_ref(&xi))?.remove(0);
        let body = json!({
            "iterate": j,
            "point": point_json(&xi),
            "ord_res": q_str(&sample.value),
            "depth_report": depth_report_json(&rep),
            "checks": { "identity": id.equal, "identity_lhs": q_str(&id.lhs), "identity_rhs": q_str(&id.rhs) },
        });
        Ok(render(&self.with_header(body)))
    }

    fn run(&self) -> Result<String, Failure> {
        match &self.cli.command {
            Command::Analyze => self.analyze(),
            Command::Tree => self.tree(),
            Command::Curvature => self.curvature(),
            Command::Barycenter => self.barycenter(),
            Command::Minresloc => self.minresloc(),
            Command::Equidist { probe_level } => self.equidist(*probe_level),
            Command::Certify { center, rv } => self.certify(center, rv),
        }
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let out = cli.out.clone();
    let result = Session::open(cli).and_then(|s| s.run());
    match result {
        Ok(text) => match out {
            Some(path) => match fs::write(&path, text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: cannot write {path}: {e}");
                    ExitCode::from(1)
                }
            },
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
