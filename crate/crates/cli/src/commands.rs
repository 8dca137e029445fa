use std::io::{self, BufWriter, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use ordsel::copula::{CopulaFamily, CopulaModel};
use ordsel::gbound::{
    bound_with_certificate, certify, n_star_noiseless, n_star_optimized, optimized_lower_bound,
    rho_from_noise, InversionSpec, OmegaCertificate, SampleSizeResult, CERT_GRID,
};
use ordsel::rng::RandomStream;
use ordsel::selection::{
    success_bruteforce, success_closed_form, success_montecarlo, success_montecarlo_order_stats,
    success_quadrature, ProbabilityEstimate, SelectionProblem,
};

use crate::failure::Failure;
use crate::output::{fmt_sig, write_csv_header, write_csv_row, write_json, Cell, Format, Record};
use crate::{BoundArgs, Cli, Command, Family, InvertArgs, MethodArg, PsuccessArgs, SweepArgs, TableArgs, Vary};

pub fn run(cli: &Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let res = match &cli.command {
        Command::Psuccess(a) => psuccess(a, cli.timing, &mut out),
        Command::Bound(a) => bound(a, cli.timing, &mut out),
        Command::Invert(a) => invert(a, cli.timing, &mut out),
        Command::Table(a) => table(a, cli.timing, &mut out),
        Command::Sweep(a) => sweep(a, cli.timing, &mut out),
    };
    out.flush()?;
    res
}

/// Records plus their CSV rendering, emitted in order.
struct Emission {
    header: &'static [&'static str],
    rows: Vec<(Record, Vec<Cell>)>,
}

impl Emission {
    fn write<W: Write>(&self, format: Format, out: &mut W) -> io::Result<()> {
        match format {
            Format::Json => {
                for (record, _) in &self.rows {
                    write_json(out, record)?;
                }
            }
            Format::Csv => {
                write_csv_header(out, self.header)?;
                for (_, cells) in &self.rows {
                    write_csv_row(out, cells)?;
                }
            }
            Format::Markdown => {
                writeln!(out, "| {} |", self.header.join(" | "))?;
                writeln!(out, "|{}", "---|".repeat(self.header.len()))?;
                for (_, cells) in &self.rows {
                    let mut line = Vec::new();
                    write_csv_row(&mut line, cells)?;
                    let text = String::from_utf8_lossy(&line);
                    writeln!(out, "| {} |", text.trim_end().replace(',', " | "))?;
                }
            }
        }
        Ok(())
    }
}

fn elapsed(timing: bool, start: Instant) -> Option<f64> {
    timing.then(|| start.elapsed().as_secs_f64() * 1e3)
}

fn family_of(f: Family) -> CopulaFamily {
    match f {
        Family::Gaussian => CopulaFamily::Gaussian,
        Family::Clayton => CopulaFamily::Clayton,
        Family::Frank => CopulaFamily::Frank,
        Family::Independence => CopulaFamily::Independence,
        Family::Comonotonic => CopulaFamily::Comonotonic,
    }
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Quad => "quad",
        MethodArg::Brute => "brute",
        MethodArg::Mc => "mc",
        MethodArg::McOs => "mc-os",
        MethodArg::Exact => "exact",
    }
}

fn psuccess<W: Write>(a: &PsuccessArgs, timing: bool, out: &mut W) -> Result<(), Failure> {
    let family = family_of(a.copula);
    let model = CopulaModel::new(family, a.param)?;
    let prob = SelectionProblem::new(a.n, a.m, a.alpha)?;
    let start = Instant::now();
    let stream = RandomStream::new(a.seed, 0);
    let est: ProbabilityEstimate = match a.method {
        MethodArg::Quad => success_quadrature(&model, &prob, a.tol)?,
        MethodArg::Brute => {
            if a.m > 3 {
                return Err(Failure::Unsupported(format!("brute-force quadrature needs m ≤ 3, got m = {}", a.m)));
            }
            success_bruteforce(&model, &prob, a.grid)?
        }
        MethodArg::Mc => success_montecarlo(&model, &prob, a.reps, stream)?,
        MethodArg::McOs => success_montecarlo_order_stats(&model, &prob, a.reps, stream)?,
        MethodArg::Exact => success_closed_form(&model, &prob)
            .ok_or_else(|| Failure::Unsupported(format!("no closed form for the {family} copula at these arguments")))?,
    };

    let mut inputs = json!({
        "copula": family.as_str(),
        "param": a.param,
        "n": a.n,
        "m": a.m,
        "alpha": a.alpha,
        "method": method_name(a.method),
    });
    match a.method {
        MethodArg::Quad => inputs["tol"] = json!(a.tol),
        MethodArg::Brute => inputs["grid"] = json!(a.grid),
        MethodArg::Mc | MethodArg::McOs => {
            inputs["reps"] = json!(a.reps);
            inputs["seed"] = json!(a.seed);
        }
        MethodArg::Exact => {}
    }
    let record = Record {
        command: "psuccess",
        inputs,
        result: serde_json::to_value(est).expect("estimate serialises"),
        method: est.method.as_str().to_string(),
        elapsed_ms: elapsed(timing, start),
    };
    let cells = vec![
        family.as_str().into(),
        a.param.into(),
        a.n.into(),
        a.m.into(),
        a.alpha.into(),
        est.method.as_str().into(),
        est.value.into(),
        est.stderr.into(),
        est.replications.into(),
    ];
    Emission {
        header: &["copula", "param", "n", "m", "alpha", "method", "value", "stderr", "replications"],
        rows: vec![(record, cells)],
    }
    .write(a.format, out)?;
    Ok(())
}

fn certificate_json(cert: Option<&OmegaCertificate>) -> Value {
    match cert {
        Some(c) => json!({
            "c1": c.c1,
            "c2": c.c2,
            "mu_n": c.mu_n,
            "sigma_n2": c.sigma_n2,
            "certified": c.certified,
            "failed_check": c.failed_check,
        }),
        None => json!({
            "c1": null, "c2": null, "mu_n": null, "sigma_n2": null,
            "certified": false, "failed_check": null,
        }),
    }
}

fn bound<W: Write>(a: &BoundArgs, timing: bool, out: &mut W) -> Result<(), Failure> {
    let start = Instant::now();
    let (value, omega, cert, method) = match a.omega {
        Some(w) => {
            let (b, cert) = bound_with_certificate(a.n, a.alpha, a.rho, w)?;
            (b, Some(w), Some(cert), "fixed_omega")
        }
        None => {
            let opt = optimized_lower_bound(a.n, a.alpha, a.rho)?;
            let cert = opt.omega.map(|w| certify(a.n, w, CERT_GRID)).transpose()?;
            (opt.bound, opt.omega, cert, "optimized_omega")
        }
    };
    let mut result = certificate_json(cert.as_ref());
    result["bound"] = json!(value);
    result["omega"] = json!(omega);
    let record = Record {
        command: "bound",
        inputs: json!({ "n": a.n, "alpha": a.alpha, "rho": a.rho, "omega": a.omega }),
        result,
        method: method.to_string(),
        elapsed_ms: elapsed(timing, start),
    };
    let cells = vec![
        a.n.into(),
        a.alpha.into(),
        a.rho.into(),
        omega.into(),
        value.into(),
        Cell::Text(cert.is_some_and(|c| c.certified).to_string()),
        cert.map(|c| c.c1).into(),
        cert.map(|c| c.c2).into(),
        cert.and_then(|c| c.mu_n).into(),
        cert.and_then(|c| c.sigma_n2).into(),
    ];
    Emission {
        header: &["n", "alpha", "rho", "omega", "bound", "certified", "c1", "c2", "mu_n", "sigma_n2"],
        rows: vec![(record, cells)],
    }
    .write(a.format, out)?;

    match (a.omega, cert) {
        (Some(w), Some(c)) if !c.certified => Err(Failure::Certification(format!(
            "(n = {}, omega = {w}) fails the {:?} check",
            a.n,
            c.failed_check.expect("uncertified has a reason")
        ))),
        _ => Ok(()),
    }
}

/// One inversion, including the noiseless `ρ = 1` case. `None` is the
/// infinite sentinel.
fn invert_cell(alpha: f64, rho: f64, delta: f64) -> Result<(Option<SampleSizeResult>, &'static str), Failure> {
    if rho == 1.0 {
        let size = n_star_noiseless(alpha, delta)?;
        let bound = size
            .exact_n
            .map_or(1.0, |n| -(n as f64 * (-alpha).ln_1p()).exp_m1());
        return Ok((Some(SampleSizeResult { size, omega: None, bound }), "noiseless_closed_form"));
    }
    let spec = InversionSpec::new(alpha, rho, delta)?;
    Ok((n_star_optimized(&spec)?, "quartic_inversion"))
}

fn size_json(r: Option<&SampleSizeResult>) -> Value {
    match r {
        Some(r) => json!({
            "log10_n": r.size.log10_n,
            "exact_n": r.size.exact_n,
            "omega_star": r.omega,
            "bound_at_n": r.bound,
        }),
        None => json!({ "log10_n": "inf", "exact_n": null, "omega_star": null, "bound_at_n": null }),
    }
}

fn size_cells(alpha: f64, rho: f64, delta: f64, r: Option<&SampleSizeResult>) -> Vec<Cell> {
    let mut cells: Vec<Cell> = vec![alpha.into(), rho.into(), delta.into()];
    match r {
        Some(r) => cells.extend([
            r.size.log10_n.into(),
            r.size.exact_n.into(),
            r.omega.into(),
            r.bound.into(),
        ]),
        None => cells.extend([Cell::Text("inf".into()), Cell::Empty, Cell::Empty, Cell::Empty]),
    }
    cells
}

const SIZE_HEADER: &[&str] = &["alpha", "rho", "delta", "log10_n", "exact_n", "omega_star", "bound_at_n"];

fn invert<W: Write>(a: &InvertArgs, timing: bool, out: &mut W) -> Result<(), Failure> {
    let rho = match (a.rho, a.xi2) {
        (Some(r), None) => r,
        (None, Some(x)) => rho_from_noise(x)?,
        _ => unreachable!("clap enforces exactly one of --rho and --xi2"),
    };
    let start = Instant::now();
    let (r, method) = invert_cell(a.alpha, rho, a.delta)?;
    let Some(r) = r else {
        return Err(Failure::Infeasible(format!(
            "no certified finite sample size for alpha = {}, rho = {rho}, delta = {}",
            a.alpha, a.delta
        )));
    };
    let record = Record {
        command: "invert",
        inputs: json!({ "alpha": a.alpha, "rho": rho, "xi2": a.xi2, "delta": a.delta }),
        result: size_json(Some(&r)),
        method: method.to_string(),
        elapsed_ms: elapsed(timing, start),
    };
    let cells = size_cells(a.alpha, rho, a.delta, Some(&r));
    Emission { header: SIZE_HEADER, rows: vec![(record, cells)] }.write(a.format, out)?;
    Ok(())
}

/// `n` as an integer when known, `10^x` otherwise.
fn pretty_size(r: Option<&SampleSizeResult>) -> String {
    match r {
        None => "inf".into(),
        Some(r) => match r.size.exact_n {
            Some(n) => n.to_string(),
            None => format!("10^{:.3}", r.size.log10_n),
        },
    }
}

fn table<W: Write>(a: &TableArgs, timing: bool, out: &mut W) -> Result<(), Failure> {
    if a.rhos.is_empty() || a.deltas.is_empty() {
        return Err(Failure::Usage("--rhos and --deltas need at least one value".into()));
    }
    let cells: Vec<(f64, f64)> = a
        .rhos
        .iter()
        .flat_map(|&r| a.deltas.iter().map(move |&d| (r, d)))
        .collect();
    let results: Vec<(Option<SampleSizeResult>, &'static str, Option<f64>)> = cells
        .par_iter()
        .map(|&(rho, delta)| {
            let start = Instant::now();
            invert_cell(a.alpha, rho, delta).map(|(r, m)| (r, m, elapsed(timing, start)))
        })
        .collect::<Result<_, _>>()?;

    if a.format == Format::Markdown {
        write!(out, "| ρ \\ δ |")?;
        for d in &a.deltas {
            write!(out, " {} |", fmt_sig(*d, 12))?;
        }
        writeln!(out)?;
        writeln!(out, "|---|{}", "---|".repeat(a.deltas.len()))?;
        for (i, rho) in a.rhos.iter().enumerate() {
            write!(out, "| {} |", fmt_sig(*rho, 12))?;
            for j in 0..a.deltas.len() {
                write!(out, " {} |", pretty_size(results[i * a.deltas.len() + j].0.as_ref()))?;
            }
            writeln!(out)?;
        }
        return Ok(());
    }

    let rows = cells
        .iter()
        .zip(&results)
        .map(|(&(rho, delta), (r, method, ms))| {
            let record = Record {
                command: "table",
                inputs: json!({ "alpha": a.alpha, "rho": rho, "delta": delta }),
                result: size_json(r.as_ref()),
                method: method.to_string(),
                elapsed_ms: *ms,
            };
            (record, size_cells(a.alpha, rho, delta, r.as_ref()))
        })
        .collect();
    Emission { header: SIZE_HEADER, rows }.write(a.format, out)?;
    Ok(())
}

fn sweep_axis(a: &SweepArgs) -> Result<Vec<f64>, Failure> {
    let usage = |m: String| Err(Failure::Usage(m));
    if !(a.from.is_finite() && a.to.is_finite()) || a.from > a.to {
        return usage(format!("need a finite range with from ≤ to, got [{}, {}]", a.from, a.to));
    }
    if a.points == 0 {
        return usage("--points must be at least 1".into());
    }
    if a.log_axis && !(a.from > 0.0) {
        return usage("--log-axis needs from > 0".into());
    }
    let (lo, hi) = match a.vary {
        Vary::N => (1.0, f64::MAX),
        Vary::Rho => (f64::MIN_POSITIVE, 1.0),
        Vary::Alpha => (f64::MIN_POSITIVE, 1.0),
    };
    if a.from < lo || a.to > hi {
        return usage(format!("range [{}, {}] leaves the domain of {:?}", a.from, a.to, a.vary));
    }
    let k = a.points;
    let xs = (0..k).map(|i| {
        let t = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
        if a.log_axis {
            (a.from.ln() + t * (a.to.ln() - a.from.ln())).exp()
        } else {
            a.from + t * (a.to - a.from)
        }
    });
    let mut xs: Vec<f64> = if a.vary == Vary::N { xs.map(f64::round).collect() } else { xs.collect() };
    xs.dedup();
    Ok(xs)
}

struct SweepRow {
    p_quad: f64,
    mc: Option<ProbabilityEstimate>,
    bound: f64,
    omega: Option<f64>,
    ms: Option<f64>,
}

fn sweep<W: Write>(a: &SweepArgs, timing: bool, out: &mut W) -> Result<(), Failure> {
    let xs = sweep_axis(a)?;
    let rows: Vec<SweepRow> = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| -> Result<SweepRow, Failure> {
            let start = Instant::now();
            let (mut n, mut alpha, mut rho) = (a.n, a.alpha, a.rho);
            match a.vary {
                Vary::N => n = x as u64,
                Vary::Rho => rho = x,
                Vary::Alpha => alpha = x,
            }
            let model = CopulaModel::gaussian(rho)?;
            let prob = SelectionProblem::new(n, a.m, alpha)?;
            let p_quad = match success_closed_form(&model, &prob) {
                Some(e) if !model.has_conditional_density() => e.value,
                _ => success_quadrature(&model, &prob, a.tol)?.value,
            };
            let mc = (a.reps > 0)
                .then(|| success_montecarlo_order_stats(&model, &prob, a.reps, RandomStream::new(a.seed, i as u64)))
                .transpose()?;
            let opt = optimized_lower_bound(n, alpha, rho)?;
            Ok(SweepRow { p_quad, mc, bound: opt.bound, omega: opt.omega, ms: elapsed(timing, start) })
        })
        .collect::<Result<_, _>>()?;

    let vary = match a.vary {
        Vary::N => "n",
        Vary::Rho => "rho",
        Vary::Alpha => "alpha",
    };
    let emitted = xs
        .iter()
        .zip(rows)
        .map(|(&x, r)| {
            let record = Record {
                command: "sweep",
                inputs: json!({
                    "vary": vary, "x": x, "n": a.n, "m": a.m, "alpha": a.alpha, "rho": a.rho,
                    "reps": a.reps, "seed": a.seed, "tol": a.tol,
                }),
                result: json!({
                    "x": x,
                    "p_quadrature": r.p_quad,
                    "p_mc": r.mc.map(|e| e.value),
                    "mc_stderr": r.mc.and_then(|e| e.stderr),
                    "lower_bound": r.bound,
                    "omega_star": r.omega,
                }),
                method: "quadrature+order_statistic_mc+optimized_bound".into(),
                elapsed_ms: r.ms,
            };
            let cells = vec![
                x.into(),
                r.p_quad.into(),
                r.mc.map(|e| e.value).into(),
                r.mc.and_then(|e| e.stderr).into(),
                r.bound.into(),
            ];
            (record, cells)
        })
        .collect();
    Emission { header: &["x", "p_quadrature", "p_mc", "mc_stderr", "lower_bound"], rows: emitted }.write(a.format, out)?;
    Ok(())
}
