mod verify;

use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heckelab::bundles::{BundleType, ClosedPoint};
use heckelab::deltas::{self, DeltaVec};
use heckelab::forms::{
    cusp_defect, eigenform_solve, forced_toroidal_nullity, toroidal_sum, EigenQuery, TruncatedPBun,
};
use heckelab::fpoly::FpPoly;
use heckelab::hall::HallElement;
use heckelab::hecke::Hecke;
use heckelab::oracle::{brute_aut_order, brute_multiplicity, smith_normal_form, Budget};
use heckelab::qcalc::gaussian_binomial;
use heckelab::{Error, QPoly};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "heckelab",
    version = concat!(env!("CARGO_PKG_VERSION"), " (json schema 1)"),
    about = "Hecke modifications of vector bundles on the projective line over finite fields"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Number of k-dimensional subspaces of an n-dimensional space.
    Gr {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Evaluate at this field size.
        #[arg(long)]
        q: Option<i64>,
    },
    /// 0/1 drop vectors.
    #[command(subcommand)]
    Delta(DeltaCmd),
    /// Hall algebra products.
    #[command(subcommand)]
    Hall(HallCmd),
    /// Hecke modifications: neighbors, multiplicities, existence.
    #[command(subcommand)]
    Hecke(HeckeCmd),
    /// Brute-force enumeration over a finite field.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Unramified forms on a truncated set of bundle classes.
    #[command(subcommand)]
    Forms(FormsCmd),
    /// Cross-check closed forms, Hall products and the oracle.
    Verify {
        /// Small grid, under a minute.
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        /// Larger grid.
        #[arg(long)]
        full: bool,
        /// Seed for the random samples.
        #[arg(long, default_value_t = 20240601)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum DeltaCmd {
    /// All vectors of length n with r ones, in lexicographic order.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Weights of one vector.
    Weight {
        /// Comma-separated bits, e.g. 0,1,1.
        #[arg(long)]
        bits: String,
        /// Ambient weight for the relative weight.
        #[arg(long)]
        r: Option<usize>,
    },
}

#[derive(Args)]
struct BundleArg {
    /// Splitting type as comma-separated degrees, e.g. -2,0.
    #[arg(long, allow_hyphen_values = true)]
    bundle: String,
}

#[derive(Args)]
struct PairArgs {
    /// Source bundle E' (comma-separated degrees).
    #[arg(long, allow_hyphen_values = true)]
    from: String,
    /// Target bundle E.
    #[arg(long, allow_hyphen_values = true)]
    to: String,
    #[arg(long)]
    point_degree: usize,
    #[arg(long)]
    weight: usize,
    #[arg(long)]
    q: Option<i64>,
}

#[derive(Subcommand)]
enum HallCmd {
    /// The product F * G.
    Mul {
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long)]
        q: Option<i64>,
    },
    /// The product K_x^r * E.
    Kx {
        #[command(flatten)]
        bundle: BundleArg,
        #[arg(long)]
        point_degree: usize,
        #[arg(long)]
        weight: usize,
        /// Use the recursive expansion instead of the closed formula.
        #[arg(long)]
        recursive: bool,
        #[arg(long)]
        q: Option<i64>,
    },
    /// Multiplicity read off from the Hall product.
    Mult(PairArgs),
}

#[derive(Subcommand)]
enum HeckeCmd {
    /// Every E' with a modification E' -> E and its multiplicity.
    Neighbors {
        #[command(flatten)]
        bundle: BundleArg,
        #[arg(long)]
        point_degree: usize,
        #[arg(long)]
        weight: usize,
        #[arg(long)]
        q: Option<i64>,
    },
    /// Multiplicity of one modification.
    Mult(PairArgs),
    /// Whether a modification exists.
    Exists(PairArgs),
}

#[derive(Args)]
struct PointArgs {
    /// Prime field size.
    #[arg(long)]
    q: u64,
    /// Monic irreducible point polynomial, constant term first, e.g. 1,1,1.
    #[arg(long)]
    poly: Option<String>,
    /// Degree of the point when --poly is absent; the first irreducible is used.
    #[arg(long, default_value_t = 1)]
    point_degree: usize,
}

impl PointArgs {
    fn point(&self) -> heckelab::Result<ClosedPoint> {
        match &self.poly {
            Some(p) => {
                let cs: Vec<u64> = parse_list(p)?;
                ClosedPoint::new(self.q, cs.len().saturating_sub(1), Some(cs))
            }
            None => ClosedPoint::first_of_degree(self.q, self.point_degree),
        }
    }
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Splitting types of all weight-r modifications at an explicit point.
    Census {
        #[command(flatten)]
        bundle: BundleArg,
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        weight: usize,
    },
    /// Smith normal form of a square matrix over F_p[t].
    Snf {
        /// JSON array of rows; entries are coefficient arrays, constant first.
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        q: u64,
    },
    /// Automorphism count by enumeration.
    Aut {
        #[command(flatten)]
        bundle: BundleArg,
        #[arg(long)]
        q: u64,
    },
}

#[derive(Args)]
struct EigenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    q: u64,
    /// Eigenvalues lambda_1..lambda_{n-1}, comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    lambda: String,
    /// Spread bound D of the window.
    #[arg(long, default_value_t = 5)]
    depth: i64,
}

impl EigenArgs {
    fn query(&self) -> heckelab::Result<EigenQuery> {
        let lambda: Vec<BigRational> = parse_list(&self.lambda)?;
        if lambda.len() + 1 != self.n {
            return Err(Error::Domain(format!("rank {} needs {} eigenvalues, got {}", self.n, self.n.saturating_sub(1), lambda.len())));
        }
        EigenQuery::new(lambda, ClosedPoint::abstract_point(self.q, 1)?, self.depth)
    }
}

#[derive(Subcommand)]
enum FormsCmd {
    /// Solve the eigen system with f(E_0) = 1.
    Eigen(EigenArgs),
    /// Toroidal sum of the eigenform and the nullity with it forced to zero.
    Toroidal(EigenArgs),
    /// Extension sums of the eigenform over pairs of ranks n1, n2.
    Cusp {
        #[command(flatten)]
        eigen: EigenArgs,
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
    },
}

fn parse_list<T: FromStr>(s: &str) -> heckelab::Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse().map_err(|_| Error::Domain(format!("cannot parse {x:?}"))))
        .collect()
}

fn bundle(s: &str) -> heckelab::Result<BundleType> {
    BundleType::new(&parse_list::<i64>(s)?)
}

pub fn poly_json(p: &QPoly, q: Option<i64>) -> Value {
    let mut v = json!({ "coeffs": p, "pretty": p.to_string() });
    if let Some(q0) = q {
        v["value"] = json!(p.eval_i64(q0).to_string());
    }
    v
}

fn poly_text(p: &QPoly, q: Option<i64>) -> String {
    match q {
        Some(q0) => format!("{p} = {}", p.eval_i64(q0)),
        None => p.to_string(),
    }
}

fn element_json(h: &HallElement, q: Option<i64>) -> heckelab::Result<Value> {
    let mut terms = Vec::new();
    for (t, c) in h.terms() {
        let mut v = json!({ "bundle": t.bundle.degrees(), "torsion": t.torsion, "coefficient": c.to_string() });
        if let Some(q0) = q {
            v["value"] = json!(c.eval_i64(q0)?.to_string());
        }
        terms.push(v);
    }
    Ok(json!({ "terms": terms }))
}

fn element_text(h: &HallElement, q: Option<i64>) -> heckelab::Result<String> {
    let mut lines = Vec::new();
    for (t, c) in h.terms() {
        let name = if t.torsion == 0 { t.bundle.to_string() } else { format!("{} + K^{}", t.bundle, t.torsion) };
        match q {
            Some(q0) => lines.push(format!("{name}\t{c} = {}", c.eval_i64(q0)?)),
            None => lines.push(format!("{name}\t{c}")),
        }
    }
    Ok(lines.join("\n"))
}

/// Result of one command: a JSON payload, its text rendering, and the exit
/// status when the command itself reports a failure.
struct Report {
    json: Value,
    text: String,
    failed: bool,
}

impl Report {
    fn ok(json: Value, text: String) -> Self {
        Report { json, text, failed: false }
    }
}

fn run(cmd: Command) -> heckelab::Result<Report> {
    match cmd {
        Command::Gr { k, n, q } => {
            let p = gaussian_binomial(k, n)?;
            Ok(Report::ok(poly_json(&p, q), poly_text(&p, q)))
        }
        Command::Delta(DeltaCmd::Enumerate { n, r }) => {
            let all = deltas::enumerate(n, r)?;
            let text = all.iter().map(|d| format!("{d}\t|d|={}", d.weight())).collect::<Vec<_>>().join("\n");
            let rows: Vec<Value> = all.iter().map(|d| json!({ "bits": d, "weight": d.weight() })).collect();
            Ok(Report::ok(json!({ "n": n, "r": r, "count": all.len(), "deltas": rows }), text))
        }
        Command::Delta(DeltaCmd::Weight { bits, r }) => {
            let d = DeltaVec::new(parse_list::<u8>(&bits)?)?;
            let rel = r.map(|r| d.weight_in(r));
            let mut v = json!({ "bits": d, "ones": d.ones(), "weight": d.weight(), "omega": d.omega() });
            let mut text = format!("{d}: ones {}, weight {}, omega {}", d.ones(), d.weight(), d.omega());
            if let Some(w) = rel {
                v["weight_in"] = json!(w);
                text.push_str(&format!(", weight in r={} {w}", r.unwrap_or_default()));
            }
            Ok(Report::ok(v, text))
        }
        Command::Hall(h) => run_hall(h),
        Command::Hecke(h) => run_hecke(h),
        Command::Oracle(o) => run_oracle(o),
        Command::Forms(f) => run_forms(f),
        Command::Verify { quick: _, full, seed } => {
            let outcome = verify::run(full, seed)?;
            let text = outcome.text();
            let failed = !outcome.mismatches.is_empty();
            Ok(Report { json: serde_json::to_value(&outcome).expect("plain data"), text, failed })
        }
    }
}

fn run_hall(cmd: HallCmd) -> heckelab::Result<Report> {
    let hecke = Hecke::new();
    let engine = hecke.engine();
    match cmd {
        HallCmd::Mul { f, g, q } => {
            let h = engine.bundle_product(&bundle(&f)?, &bundle(&g)?)?;
            Ok(Report::ok(element_json(&h, q)?, element_text(&h, q)?))
        }
        HallCmd::Kx { bundle: b, point_degree, weight, recursive, q } => {
            let e = bundle(&b.bundle)?;
            let h = if recursive {
                engine.kx_times_recursive(weight, &e, point_degree)?
            } else {
                engine.kx_times(weight, &e, point_degree)?
            };
            Ok(Report::ok(element_json(&h, q)?, element_text(&h, q)?))
        }
        HallCmd::Mult(p) => {
            let m = engine.hall_multiplicity(&bundle(&p.from)?, &bundle(&p.to)?, p.point_degree, p.weight)?;
            Ok(Report::ok(poly_json(&m, p.q), poly_text(&m, p.q)))
        }
    }
}

fn run_hecke(cmd: HeckeCmd) -> heckelab::Result<Report> {
    let hecke = Hecke::new();
    match cmd {
        HeckeCmd::Neighbors { bundle: b, point_degree, weight, q } => {
            let e = bundle(&b.bundle)?;
            let found = hecke.neighbors(&e, point_degree, weight)?;
            let mut rows = Vec::new();
            let mut lines = Vec::new();
            let mut total = QPoly::zero();
            for (e_prime, m) in &found {
                total += &m.poly;
                let mut row = poly_json(&m.poly, q);
                row["bundle"] = json!(e_prime.degrees());
                row["method"] = json!(m.method);
                rows.push(row);
                lines.push(format!("{e_prime}\t{}\t[{}]", poly_text(&m.poly, q), m.method));
            }
            lines.push(format!("total\t{}", poly_text(&total, q)));
            let v = json!({ "bundle": e.degrees(), "neighbors": rows, "total": poly_json(&total, q) });
            Ok(Report::ok(v, lines.join("\n")))
        }
        HeckeCmd::Mult(p) => {
            let query = hecke.query(&bundle(&p.from)?, &bundle(&p.to)?, p.point_degree, p.weight)?;
            let m = hecke.multiplicity(&query)?;
            let mut v = poly_json(&m.poly, p.q);
            v["method"] = json!(m.method);
            Ok(Report::ok(v, format!("{}\t[{}]", poly_text(&m.poly, p.q), m.method)))
        }
        HeckeCmd::Exists(p) => {
            let query = hecke.query(&bundle(&p.from)?, &bundle(&p.to)?, p.point_degree, p.weight)?;
            let e = hecke.exists_modification(&query)?;
            Ok(Report::ok(json!({ "exists": e }), e.to_string()))
        }
    }
}

fn run_oracle(cmd: OracleCmd) -> heckelab::Result<Report> {
    let budget = Budget::from_env();
    match cmd {
        OracleCmd::Census { bundle: b, point, weight } => {
            let e = bundle(&b.bundle)?;
            let x = point.point()?;
            let census = brute_multiplicity(&e, &x, weight, &budget)?;
            let rows: Vec<Value> = census.iter().map(|(t, c)| json!({ "bundle": t.degrees(), "count": c })).collect();
            let total: u64 = census.values().sum();
            let mut lines: Vec<String> = census.iter().map(|(t, c)| format!("{t}\t{c}")).collect();
            lines.push(format!("total\t{total}"));
            let v = json!({ "bundle": e.degrees(), "point": x, "weight": weight, "census": rows, "total": total });
            Ok(Report::ok(v, lines.join("\n")))
        }
        OracleCmd::Snf { matrix, q } => {
            let raw: Vec<Vec<Vec<u64>>> =
                serde_json::from_str(&matrix).map_err(|e| Error::Domain(format!("matrix is not valid JSON: {e}")))?;
            if !heckelab::fpoly::is_prime(q) {
                return Err(Error::Domain(format!("q={q} is not prime")));
            }
            let m: Vec<Vec<FpPoly>> =
                raw.into_iter().map(|row| row.into_iter().map(|cs| FpPoly::new(q, cs)).collect()).collect();
            let s = smith_normal_form(&m)?;
            let diag: Vec<Value> = s.diag.iter().map(|d| json!({ "coeffs": d.coeffs(), "pretty": d.to_string() })).collect();
            let text = s.diag.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            Ok(Report::ok(json!({ "diag": diag }), format!("diag({text})")))
        }
        OracleCmd::Aut { bundle: b, q } => {
            let e = bundle(&b.bundle)?;
            let n = brute_aut_order(&e, q, &budget)?;
            let closed = e.aut_order(&BigInt::from(q));
            let v = json!({ "bundle": e.degrees(), "q": q, "brute": n, "closed": closed.to_string() });
            Ok(Report::ok(v, format!("{n} (closed form {closed})")))
        }
    }
}

fn run_forms(cmd: FormsCmd) -> heckelab::Result<Report> {
    let hecke = Hecke::new();
    match cmd {
        FormsCmd::Eigen(a) => {
            let query = a.query()?;
            let sol = eigenform_solve(&query, &hecke)?;
            let mut rows = Vec::new();
            let mut lines = vec![format!("nullity {}", sol.nullity)];
            for (c, v) in sol.form.entries().filter(|(c, _)| c.bundle().spread() <= a.depth) {
                rows.push(json!({ "class": c.degrees(), "value": v.to_string() }));
                lines.push(format!("{c}\t{v}"));
            }
            let v = json!({ "n": a.n, "q": a.q, "depth": a.depth, "nullity": sol.nullity, "values": rows });
            Ok(Report::ok(v, lines.join("\n")))
        }
        FormsCmd::Toroidal(a) => {
            let query = a.query()?;
            let sol = eigenform_solve(&query, &hecke)?;
            let sum = toroidal_sum(&sol.form)?;
            let forced = forced_toroidal_nullity(&query, &hecke)?;
            let v = json!({ "toroidal_sum": sum.to_string(), "toroidal": sum == BigRational::from_integer(0.into()), "forced_nullity": forced });
            Ok(Report::ok(v, format!("toroidal sum {sum}\nnullity with the sum forced to 0: {forced}")))
        }
        FormsCmd::Cusp { eigen: a, n1, n2 } => {
            let query = a.query()?;
            let sol = eigenform_solve(&query, &hecke)?;
            let space = TruncatedPBun::new(a.n, a.depth)?;
            let defects = cusp_defect(&sol.form, n1, n2, &space, a.q, hecke.engine())?;
            let mut rows = Vec::new();
            let mut lines = Vec::new();
            let mut cuspidal = true;
            for ((f, g), v) in &defects {
                cuspidal &= *v == BigRational::from_integer(0.into());
                rows.push(json!({ "f": f.degrees(), "g": g.degrees(), "defect": v.to_string() }));
                lines.push(format!("{f} | {g}\t{v}"));
            }
            lines.push(format!("cuspidal: {cuspidal}"));
            Ok(Report::ok(json!({ "defects": rows, "cuspidal": cuspidal }), lines.join("\n")))
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::DivisionByZero => "division_by_zero",
        Error::Pole(_) => "pole",
        Error::Budget { .. } => "budget",
        Error::Identity(_) => "identity",
        Error::Theorem(_) => "theorem",
    }
}

/// Exit status for a library error, with the diagnostic printed for
/// violated identities.
fn failure(e: &Error) -> (u8, Option<Value>) {
    match e {
        Error::Identity(_) | Error::Theorem(_) => (3, Some(json!({ "error": error_kind(e), "message": e.to_string() }))),
        _ => (2, None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report.json).expect("json")),
                Format::Text => println!("{}", report.text),
            }
            if report.failed {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            let (code, diag) = failure(&e);
            match diag {
                Some(v) => println!("{}", serde_json::to_string_pretty(&v).expect("json")),
                None => eprintln!("error ({}): {e}", error_kind(&e)),
            }
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_violations_exit_three() {
        let (code, diag) = failure(&Error::Identity("mass 3, expected 4".into()));
        assert_eq!(code, 3);
        assert_eq!(diag.unwrap()["error"], "identity");
        let (code, diag) = failure(&Error::Theorem("nullity 2".into()));
        assert_eq!((code, diag.unwrap()["error"].clone()), (3, json!("theorem")));
    }

    #[test]
    fn bad_input_exits_two() {
        assert_eq!(failure(&Error::Domain("r > n".into())), (2, None));
        assert_eq!(failure(&Error::Budget { needed: 9, limit: 1 }).0, 2);
    }

    #[test]
    fn lists_parse() {
        assert_eq!(parse_list::<i64>("-2, 0,").unwrap(), vec![-2, 0]);
        assert!(parse_list::<i64>("1,x").is_err());
        let l: Vec<BigRational> = parse_list("3,-1/2").unwrap();
        assert_eq!(l[1], BigRational::new((-1).into(), 2.into()));
    }

    #[test]
    fn poly_json_carries_value() {
        let v = poly_json(&QPoly::from_i64s(&[1, 1]), Some(4));
        assert_eq!(v, json!({ "coeffs": [1, 1], "pretty": "q+1", "value": "5" }));
    }
}
