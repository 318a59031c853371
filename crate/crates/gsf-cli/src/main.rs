//! Command-line front end: decision procedures, set membership,
//! distribution embedding, certified local/global inversion, the worked
//! examples, and the release selftest.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 usage error, 3 numeric
//! failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gsf::acceptance::{run_criterion, CRITERIA};
use gsf::embedding::{embed, pairing_limit, DistSpec};
use gsf::expr::{parse_expr, Expr};
use gsf::gauge::{Context, Ctx};
use gsf::gen_num::{GenNum, GenPoint};
use gsf::global_inverse::{
    global_1d_invert, global_inverse_eval, hadamard_certificate, hadamard_levy_certificate, Beta,
};
use gsf::gsf_fn::Gsf;
use gsf::local_inverse::{
    fermat_ift_certificate, local_inverse_eval, sharp_ift_certificate, LocalCert,
};
use gsf::mollifier::{MollifierNet, MollifierOptions};
use gsf::report::{Report, ReportItem, Table};
use gsf::sets::{internal_membership, strongly_internal_membership, SetNet, Shape};
use gsf::{Config, GsfError};

#[derive(Parser)]
#[command(name = "gsf", version, about = "Calculus of generalized smooth functions on eps-nets")]
struct Cli {
    /// Key = value config file overriding the defaults.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Gauge: eps (rho = eps) or exp (rho = e^{-1/eps}).
    #[arg(long, global = true)]
    gauge: Option<String>,
    /// Dyadic grid exponents, kmin:kmax.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Report format: json or csv.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide moderateness, negligibility, positivity, and order for a
    /// net; fails (exit 1) when the net is not moderate.
    Check {
        /// Net expression in eps, e.g. "eps^2 + eps^3".
        #[arg(long)]
        net: String,
        /// Optional second net; reports the order relation both ways.
        #[arg(long)]
        leq: Option<String>,
    },
    /// Internal / strongly-internal membership of a point in a set net.
    Set {
        /// Point coordinates, comma-separated expressions.
        #[arg(long)]
        point: String,
        /// Set literal: box(a,b), ball(c,..,r), halfline(a,+|-), union(s,..).
        #[arg(long)]
        set: String,
    },
    /// Embed a distribution via a moment-vanishing mollifier net.
    Embed {
        /// Distribution literal: delta@a, delta'@a, heaviside@a.
        #[arg(long)]
        dist: String,
        /// Concentration net b.
        #[arg(long, default_value = "eps^-1")]
        b: String,
        /// Half-jump calibration constant d.
        #[arg(long)]
        d: Option<f64>,
        /// Add the kernel normalization constraint psi(0) = 1.
        #[arg(long, default_value_t = 0)]
        psi0: u8,
        /// Test function for the pairing table.
        #[arg(long, default_value = "exp(-(x^2))")]
        phi: String,
        /// Support of the test function, lo:hi.
        #[arg(long, default_value = "-6:6")]
        support: String,
    },
    /// Certified local inverse at a point.
    InvertLocal {
        /// Component expressions, semicolon-separated for maps.
        #[arg(long = "fn")]
        func: String,
        /// Center coordinates, comma-separated expressions.
        #[arg(long)]
        x0: String,
        /// Certificate kind: sharp or fermat.
        #[arg(long, default_value = "sharp")]
        kind: String,
        /// Exponent bound for the Fermat certificate's Jacobian norm.
        #[arg(long, default_value_t = 0.0)]
        k: f64,
        /// Target to invert, comma-separated expressions.
        #[arg(long)]
        y: Option<String>,
    },
    /// Certified global inverse.
    InvertGlobal {
        /// Component expressions, semicolon-separated for maps.
        #[arg(long = "fn")]
        func: String,
        /// Theorem: 1d, hadamard, or hadamard-levy.
        #[arg(long)]
        mode: String,
        /// Derivative lower bound for the 1d theorem.
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        /// Constant bound on ||Df^-1|| for hadamard-levy.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Properness table depth (radii 2^0 .. 2^jmax).
        #[arg(long, default_value_t = 6)]
        jmax: usize,
        /// Target to invert, comma-separated expressions.
        #[arg(long)]
        y: Option<String>,
    },
    /// Scripted worked examples.
    Examples {
        #[command(subcommand)]
        action: ExamplesCmd,
    },
    /// Release criteria, all or one.
    Selftest {
        /// Run a single criterion (1..7).
        #[arg(long)]
        criterion: Option<usize>,
    },
}

#[derive(Subcommand)]
enum ExamplesCmd {
    /// Run one example (1..6) or all of them.
    Run { id: String },
}

enum CliError {
    Usage(String),
    Numeric(GsfError),
}

impl From<GsfError> for CliError {
    fn from(e: GsfError) -> CliError {
        match e {
            GsfError::Parse(m) => CliError::Usage(format!("expression parse error: {}", m)),
            GsfError::Config(m) => CliError::Usage(format!("config error: {}", m)),
            GsfError::UnsupportedDist(m) => {
                CliError::Usage(format!("unsupported distribution: {}", m))
            }
            other => CliError::Numeric(other),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.format != "json" && cli.format != "csv" {
        eprintln!("gsf: --format must be json or csv");
        return ExitCode::from(2);
    }
    let ctx = match build_ctx(&cli) {
        Ok(ctx) => ctx,
        Err(msg) => {
            eprintln!("gsf: {}", msg);
            return ExitCode::from(2);
        }
    };
    match run(&cli, &ctx) {
        Ok(reports) => {
            print!("{}", emit_all(&reports, &cli.format));
            if reports.iter().all(Report::pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("gsf: {}", msg);
            ExitCode::from(2)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("gsf: {}", e);
            ExitCode::from(3)
        }
    }
}

fn build_ctx(cli: &Cli) -> Result<Ctx, String> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {}", path.display(), e))?;
            Config::from_kv_text(&text)?
        }
        None => Config::default(),
    };
    if let Some(g) = &cli.gauge {
        if g != "eps" && g != "exp" {
            return Err("--gauge must be eps or exp".into());
        }
        cfg.gauge = g.clone();
    }
    if let Some(grid) = &cli.grid {
        let (a, b) = grid.split_once(':').ok_or("--grid must be kmin:kmax")?;
        cfg.grid_kmin = a.parse().map_err(|_| "bad kmin".to_string())?;
        cfg.grid_kmax = b.parse().map_err(|_| "bad kmax".to_string())?;
    }
    Context::new(cfg).map_err(|e| e.to_string())
}

fn emit_all(reports: &[Report], format: &str) -> String {
    if reports.len() == 1 {
        return reports[0].emit(format);
    }
    match format {
        "csv" => reports.iter().map(|r| r.to_csv()).collect(),
        _ => {
            let bodies: Vec<String> =
                reports.iter().map(|r| r.to_json().trim_end().to_string()).collect();
            format!("[\n{}\n]\n", bodies.join(",\n"))
        }
    }
}

fn run(cli: &Cli, ctx: &Ctx) -> Result<Vec<Report>, CliError> {
    match &cli.cmd {
        Cmd::Check { net, leq } => Ok(vec![cmd_check(ctx, net, leq.as_deref())?]),
        Cmd::Set { point, set } => Ok(vec![cmd_set(ctx, point, set)?]),
        Cmd::Embed { dist, b, d, psi0, phi, support } => {
            Ok(vec![cmd_embed(ctx, dist, b, *d, *psi0 != 0, phi, support)?])
        }
        Cmd::InvertLocal { func, x0, kind, k, y } => {
            Ok(vec![cmd_invert_local(ctx, func, x0, kind, *k, y.as_deref())?])
        }
        Cmd::InvertGlobal { func, mode, r, c, jmax, y } => {
            Ok(vec![cmd_invert_global(ctx, func, mode, *r, *c, *jmax, y.as_deref())?])
        }
        Cmd::Examples { action: ExamplesCmd::Run { id } } => cmd_examples(ctx, id),
        Cmd::Selftest { criterion } => cmd_selftest(ctx, *criterion),
    }
}

fn exponent_item(name: &str, x: &GenNum) -> ReportItem {
    match x.exponent_estimate().finite() {
        Some(e) => ReportItem::exponent(name, e, true),
        None => ReportItem::value(name, f64::INFINITY, true).note("net is zero on the tail"),
    }
}

fn cmd_check(ctx: &Ctx, net: &str, leq: Option<&str>) -> Result<Report, CliError> {
    let x = GenNum::from_net_str(ctx.clone(), net)?;
    let mut report = Report::new(format!("check --net {}", net), ctx);
    // moderateness is the ring-membership assertion; the rest is informational
    let moderate = x.is_moderate();
    let in_ring = moderate.is_true();
    report.push(ReportItem::verdict("moderate", moderate, in_ring));
    report.push(ReportItem::verdict("negligible", x.is_negligible(), true));
    report.push(ReportItem::verdict("strictly positive", x.is_strictly_positive(), true));
    report.push(exponent_item("exponent estimate", &x));
    if let Some(other) = leq {
        let y = GenNum::from_net_str(ctx.clone(), other)?;
        report.push(ReportItem::verdict("net <= other", x.leq(&y), true));
        report.push(ReportItem::verdict("other <= net", y.leq(&x), true));
    }
    Ok(report)
}

fn parse_point(ctx: &Ctx, src: &str) -> Result<GenPoint, CliError> {
    let coords = split_top(src, ',')
        .iter()
        .map(|s| parse_expr(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GenPoint::from_exprs(ctx.clone(), &coords))
}

/// Splits at top level only: separators inside parentheses don't count.
fn split_top(src: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in src.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out
}

fn parse_shape(src: &str) -> Result<Shape, CliError> {
    let src = src.trim();
    let usage = |m: &str| CliError::Usage(format!("set literal {:?}: {}", src, m));
    let (head, rest) = src
        .split_once('(')
        .ok_or_else(|| usage("expected box(..), ball(..), halfline(..), or union(..)"))?;
    let inner = rest
        .strip_suffix(')')
        .ok_or_else(|| usage("missing closing parenthesis"))?;
    let args = split_top(inner, ',');
    let exprs = |xs: &[String]| -> Result<Vec<Expr>, CliError> {
        xs.iter().map(|s| parse_expr(s).map_err(CliError::from)).collect()
    };
    match head.trim() {
        "box" => {
            if args.len() < 2 || args.len() % 2 != 0 {
                return Err(usage("box wants per-axis bound pairs: box(lo1,hi1,lo2,hi2,..)"));
            }
            let all = exprs(&args)?;
            let (lo, hi): (Vec<_>, Vec<_>) =
                all.chunks(2).map(|p| (p[0].clone(), p[1].clone())).unzip();
            Ok(Shape::Box { lo, hi })
        }
        "ball" => {
            if args.len() < 2 {
                return Err(usage("ball wants ball(c1,..,cn,r)"));
            }
            let mut all = exprs(&args)?;
            let radius = all.pop().unwrap();
            Ok(Shape::Ball { center: all, radius })
        }
        "halfline" => {
            if args.len() != 2 {
                return Err(usage("halfline wants halfline(endpoint, + or -)"));
            }
            let positive = match args[1].trim() {
                "+" => true,
                "-" => false,
                _ => return Err(usage("direction must be + or -")),
            };
            Ok(Shape::HalfLine { endpoint: parse_expr(&args[0])?, positive })
        }
        "union" => {
            let parts =
                args.iter().map(|s| parse_shape(s)).collect::<Result<Vec<_>, CliError>>()?;
            Ok(Shape::Union(parts))
        }
        other => Err(usage(&format!("unknown shape {:?}", other))),
    }
}

fn cmd_set(ctx: &Ctx, point: &str, set: &str) -> Result<Report, CliError> {
    let x = parse_point(ctx, point)?;
    let shape = parse_shape(set)?;
    let a = SetNet::new(shape, set);
    if a.dim() != x.coords.len() {
        return Err(CliError::Usage(format!(
            "point has dimension {}, set has dimension {}",
            x.coords.len(),
            a.dim()
        )));
    }
    let mut report = Report::new(format!("set --point {} --set {}", point, set), ctx);
    report.push(ReportItem::verdict("internal membership", internal_membership(&x, &a), true));
    report.push(ReportItem::verdict(
        "strongly internal membership",
        strongly_internal_membership(&x, &a),
        true,
    ));
    Ok(report)
}

fn cmd_embed(
    ctx: &Ctx,
    dist: &str,
    b: &str,
    d: Option<f64>,
    psi0: bool,
    phi: &str,
    support: &str,
) -> Result<Report, CliError> {
    let spec = DistSpec::parse(dist)?;
    let b_expr = parse_expr(b)?;
    let net = MollifierNet::new(ctx.clone(), b_expr, MollifierOptions { d, psi0 })?;
    let phi_expr = parse_expr(phi)?;
    let (lo, hi) = support
        .split_once(':')
        .and_then(|(a, b)| Some((a.parse::<f64>().ok()?, b.parse::<f64>().ok()?)))
        .ok_or_else(|| CliError::Usage("--support must be lo:hi".into()))?;
    let f = embed(&spec, &net)?;
    let mut report = Report::new(format!("embed --dist {} --b {}", dist, b), ctx);
    report.push(exponent_item("b exponent", &net.b_net()));
    let pairing = pairing_limit(&spec, &phi_expr, (lo, hi), &net);
    let err = pairing.final_error();
    report.push(ReportItem::value("exact pairing <T, phi>", pairing.exact, true));
    report.push(ReportItem::value("final pairing error", err, err <= 1e-6));
    if let Some(rate) = pairing.rate {
        report.push(ReportItem::value("tail convergence rate", rate, true));
    }
    report.push_table(Table {
        name: "pairing".into(),
        columns: vec!["eps".into(), "value".into(), "abs_error".into()],
        rows: pairing.rows.iter().map(|r| vec![r.eps, r.value, r.abs_err]).collect(),
    });
    let mut samples = Vec::new();
    for i in ctx.grid.tail_indices() {
        let eps = ctx.grid.points[i];
        for step in 0..=16 {
            let x = -2.0 + 0.25 * step as f64;
            samples.push(vec![eps, x, f.comp(i, 0).eval(&[x], eps)]);
        }
    }
    report.push_table(Table {
        name: "samples".into(),
        columns: vec!["eps".into(), "x".into(), "value".into()],
        rows: samples,
    });
    Ok(report)
}

fn parse_map(ctx: &Ctx, src: &str) -> Result<Gsf, CliError> {
    let comps = split_top(src, ';')
        .iter()
        .map(|s| parse_expr(s))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Gsf::new_uniform(ctx.clone(), comps, src))
}

fn push_cert_items(report: &mut Report, cert: &LocalCert) {
    report.push(exponent_item(&format!("radius r = [{}]", cert.r.label), &cert.r));
    report.push(exponent_item(
        &format!("image radius = [{}]", cert.image_radius.label),
        &cert.image_radius,
    ));
    report.push(exponent_item(&format!("Lipschitz a = [{}]", cert.a.label), &cert.a));
    report.push(exponent_item(&format!("co-Lipschitz b = [{}]", cert.b.label), &cert.b));
    report.push(exponent_item(&format!("inverse bound c = [{}]", cert.c.label), &cert.c));
    if let Some((r, s)) = cert.fermat_radii {
        report.push(ReportItem::value("fermat real radius r", r, true));
        report.push(ReportItem::value("fermat image radius s", s, true));
    }
}

fn cmd_invert_local(
    ctx: &Ctx,
    func: &str,
    x0: &str,
    kind: &str,
    k: f64,
    y: Option<&str>,
) -> Result<Report, CliError> {
    let f = parse_map(ctx, func)?;
    let x0_src = x0;
    let x0 = parse_point(ctx, x0_src)?;
    let cert = match kind {
        "sharp" => sharp_ift_certificate(&f, &x0)?,
        "fermat" => fermat_ift_certificate(&f, &x0, k)?,
        other => return Err(CliError::Usage(format!("--kind must be sharp or fermat, got {}", other))),
    };
    let mut report =
        Report::new(format!("invert-local --fn {} --x0 {} --kind {}", func, x0_src, kind), ctx);
    push_cert_items(&mut report, &cert);
    if let Some(y_src) = y {
        let y = parse_point(ctx, y_src)?;
        let (x, residual, negligible) = local_inverse_eval(&cert, &y)?;
        report.push(ReportItem::verdict(
            "round-trip residual negligible",
            negligible.clone(),
            negligible.is_true(),
        ));
        let mut columns = vec!["eps".into()];
        columns.extend((0..x.coords.len()).map(|j| format!("x{}", j + 1)));
        columns.push("residual".into());
        let rows = ctx
            .grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &eps)| {
                let mut row = vec![eps];
                row.extend(x.coords.iter().map(|c| c.samples[i].lin));
                row.push(residual.samples[i].lin);
                row
            })
            .collect();
        report.push_table(Table { name: "inverse".into(), columns, rows });
    }
    Ok(report)
}

fn cmd_invert_global(
    ctx: &Ctx,
    func: &str,
    mode: &str,
    r: f64,
    c: f64,
    jmax: usize,
    y: Option<&str>,
) -> Result<Report, CliError> {
    let f = parse_map(ctx, func)?;
    let mut report = Report::new(format!("invert-global --fn {} --mode {}", func, mode), ctx);
    let inverse_rows = |x: &GenPoint, residual: &GenNum| -> Table {
        let mut columns = vec!["eps".to_string()];
        columns.extend((0..x.coords.len()).map(|j| format!("x{}", j + 1)));
        columns.push("residual".into());
        let rows = ctx
            .grid
            .points
            .iter()
            .enumerate()
            .map(|(i, &eps)| {
                let mut row = vec![eps];
                row.extend(x.coords.iter().map(|cc| cc.samples[i].lin));
                row.push(residual.samples[i].lin);
                row
            })
            .collect();
        Table { name: "inverse".into(), columns, rows }
    };
    match mode {
        "1d" => {
            if f.arity != 1 {
                return Err(CliError::Usage("1d mode wants a one-variable function".into()));
            }
            let inv = global_1d_invert(&f, r)?;
            report.push(ReportItem::value("derivative lower bound r", inv.cert.r, true));
            report.push(ReportItem::value("centering bound C", inv.cert.c_bound, true));
            if let Some(y_src) = y {
                let y = parse_point(ctx, y_src)?;
                let (g, residual, negligible) = inv.eval(&y.coords[0])?;
                report.push(ReportItem::verdict(
                    "inverse residual negligible",
                    negligible.clone(),
                    negligible.is_true(),
                ));
                let x = GenPoint::new(vec![g]);
                report.push_table(inverse_rows(&x, &residual));
            }
        }
        "hadamard" | "hadamard-levy" => {
            let cert = if mode == "hadamard" {
                hadamard_certificate(&f, jmax)?
            } else {
                hadamard_levy_certificate(&f, Beta::Constant(c))?
            };
            report.push(ReportItem::value(
                "surjective on compactly supported points",
                f64::from(u8::from(cert.surjective_csp)),
                true,
            ));
            if !cert.properness_table.is_empty() {
                report.push_table(Table {
                    name: "properness".into(),
                    columns: vec!["radius".into(), "min_norm".into()],
                    rows: cert.properness_table.iter().map(|&(a, b)| vec![a, b]).collect(),
                });
            }
            if let Some(y_src) = y {
                let y = parse_point(ctx, y_src)?;
                let (x, residual, negligible) = global_inverse_eval(&f, &cert, &y)?;
                report.push(ReportItem::verdict(
                    "inverse residual negligible",
                    negligible.clone(),
                    negligible.is_true(),
                ));
                let res_norm = residual;
                report.push_table(inverse_rows(&x, &res_norm));
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "--mode must be 1d, hadamard, or hadamard-levy, got {}",
                other
            )))
        }
    }
    Ok(report)
}

fn cmd_examples(ctx: &Ctx, id: &str) -> Result<Vec<Report>, CliError> {
    match id {
        "all" => Ok(gsf::examples::run_all(ctx)?),
        _ => {
            let n: usize = id
                .parse()
                .ok()
                .filter(|n| (1..=6).contains(n))
                .ok_or_else(|| CliError::Usage("example id must be 1..6 or all".into()))?;
            Ok(vec![gsf::examples::run_example(n, ctx)?])
        }
    }
}

fn cmd_selftest(ctx: &Ctx, criterion: Option<usize>) -> Result<Vec<Report>, CliError> {
    let selected: Vec<(usize, &str)> = match criterion {
        Some(n) => {
            let entry = CRITERIA
                .iter()
                .find(|(id, _)| *id == n)
                .ok_or_else(|| CliError::Usage("criterion must be 1..7".into()))?;
            vec![*entry]
        }
        None => CRITERIA.to_vec(),
    };
    let mut reports = Vec::new();
    for (id, name) in selected {
        let report = run_criterion(id, ctx)?;
        eprintln!("criterion {} ({}): {}", id, name, if report.pass() { "pass" } else { "FAIL" });
        reports.push(report);
    }
    Ok(reports)
}
