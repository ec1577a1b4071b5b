use cmph::num::format_sig;
use cmph::units::INGAAS_EFFECTIVE_MASS;
use cmph::{
    compare, constrain_b_from_c, constrain_c, lprime, numerov_solve, ode_residual, residual_grid,
    run_sweep, solve_level, write_curves_csv, Branch, Preset64, Quantity, QuantumNumbers, Radial64,
    Shooting64, Solution64, Sweep64, SweepTable, SweepVariable, UnitLabel, Units64,
};
use serde_json::{json, Value};

use crate::config::{Command, Format, RunConfig, Span};
use crate::failure::Failure;

/// Relative deviation from the oracle that `verify` accepts.
const VERIFY_TOL: f64 = 1e-5;
/// ODE residual above which a wave function is reported as not solving the equation.
const RESIDUAL_TOL: f64 = 1e-6;
const DEFAULT_GRID_POINTS: usize = 401;
const DEFAULT_SWEEP_POINTS: usize = 41;

/// What a command produced. `status` can be an error even when there is a
/// body to print, as for a failed `verify`.
pub struct Outcome {
    pub body: Vec<u8>,
    pub status: Result<(), Failure>,
}

impl Outcome {
    fn ok(body: Vec<u8>) -> Self {
        Self {
            body,
            status: Ok(()),
        }
    }
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, Failure> {
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Constrain => constrain(cfg),
        Command::Wavefunction => wavefunction(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
        Command::Table1 => table1(cfg),
    }
}

/// Unit system, mass and harmonic strength shared by the level commands.
struct Setup {
    label: UnitLabel,
    units: Units64,
    mass: f64,
    a: f64,
    d: f64,
    branch: Branch,
}

impl Setup {
    fn new(cfg: &RunConfig) -> Result<Self, Failure> {
        let label = units_of(cfg)?;
        let units = Units64::from_label(label);
        let mass = cfg.mass.unwrap_or(default_mass(label));
        let a = match (cfg.a, cfg.omega) {
            (Some(a), None) => a,
            (None, Some(omega)) => Preset64::new(mass, units, omega)?.a(),
            (Some(_), Some(_)) => {
                return Err(Failure::Usage(
                    "give either --a or --omega, not both".into(),
                ))
            }
            (None, None) => return Err(Failure::Usage("--a or --omega is required".into())),
        };
        Ok(Self {
            label,
            units,
            mass,
            a,
            d: cfg.d.unwrap_or(0.0),
            branch: cfg.branch.unwrap_or_default(),
        })
    }

    /// `b` from the flags, or the value that makes `c` exact for level `n`.
    fn linear_term(&self, cfg: &RunConfig, n: usize, l: usize) -> Result<f64, Failure> {
        match (cfg.b, cfg.c) {
            (Some(b), _) => Ok(b),
            (None, Some(c)) => self.b_from_c(n, l, c),
            (None, None) => Err(Failure::Usage(
                "--b is required (or --c for n = 0 and n = 1)".into(),
            )),
        }
    }

    fn b_from_c(&self, n: usize, l: usize, c: f64) -> Result<f64, Failure> {
        match n {
            0 => {
                let k = self.units.scale_factor(self.mass);
                let lp = lprime(l, self.d, self.mass, &self.units)?;
                Ok(2.0 * (k * self.a).sqrt() * c / (1.0 + lp))
            }
            1 => Ok(constrain_b_from_c(
                l,
                self.a,
                c,
                self.d,
                self.mass,
                self.units,
                self.branch,
            )?),
            _ => Err(Failure::Solver(cmph::Error::Domain(format!(
                "b can only be derived from c for n = 0 or 1, got n = {n}"
            )))),
        }
    }

    fn solve(&self, cfg: &RunConfig, n: usize, l: usize) -> Result<Solution64, Failure> {
        let b = self.linear_term(cfg, n, l)?;
        let sol = solve_level(
            QuantumNumbers::new(n, l),
            self.a,
            b,
            self.d,
            self.mass,
            self.units,
        )?;
        Ok(sol)
    }
}

fn units_of(cfg: &RunConfig) -> Result<UnitLabel, Failure> {
    cfg.units
        .ok_or_else(|| Failure::Usage("--units is required (natural, ev-nm or ev-fm)".into()))
}

fn default_mass(label: UnitLabel) -> f64 {
    match label {
        UnitLabel::Natural => 1.0,
        UnitLabel::EvNm | UnitLabel::EvFm => INGAAS_EFFECTIVE_MASS,
    }
}

fn levels(cfg: &RunConfig) -> Vec<(usize, usize)> {
    let ns = cfg.n.unwrap_or(Span::single(0));
    let ls = cfg.l.unwrap_or(Span::single(0));
    ls.values()
        .flat_map(|l| ns.values().map(move |n| (n, l)))
        .collect()
}

fn format_of(cfg: &RunConfig) -> Format {
    cfg.format.unwrap_or_default()
}

fn json_body(cfg: &RunConfig, mut doc: Value) -> Vec<u8> {
    doc["config"] = serde_json::to_value(cfg).expect("config serializes");
    let mut out = serde_json::to_vec_pretty(&doc).expect("json serializes");
    out.push(b'\n');
    out
}

fn csv_body(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn finite(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn relative(x: f64, reference: f64) -> f64 {
    (x - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

fn residual_of(sol: Solution64) -> Result<f64, Failure> {
    let f = Radial64::build(sol)?;
    Ok(ode_residual(&f, &residual_grid(&f)))
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let setup = Setup::new(cfg)?;
    let mut sols = Vec::new();
    for (n, l) in levels(cfg) {
        let sol = setup.solve(cfg, n, l)?;
        if let (Some(_), Some(c)) = (cfg.b, cfg.c) {
            if relative(c, sol.params.c) > 1e-9 {
                log::warn!(
                    "n = {n}, l = {l}: given c = {c} is replaced by the constrained value {}",
                    sol.params.c
                );
            }
        }
        sols.push(sol);
    }
    let body = match format_of(cfg) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = sols
                .iter()
                .map(|s| {
                    let nodes: Vec<String> = s.nodes.roots.iter().map(|&r| format_sig(r)).collect();
                    vec![
                        s.qn.n.to_string(),
                        s.qn.l.to_string(),
                        format_sig(s.params.b),
                        format_sig(s.params.c),
                        format_sig(s.energy),
                        nodes.join(";"),
                        format_sig(s.diagnostics.max_relative),
                    ]
                })
                .collect();
            csv_body(&["n", "l", "b", "c", "energy", "nodes", "residual"], &rows)
        }
        Format::Json => {
            let levels: Vec<Value> = sols
                .iter()
                .map(|s| {
                    json!({
                        "n": s.qn.n,
                        "l": s.qn.l,
                        "b": s.params.b,
                        "c": s.params.c,
                        "energy": s.energy,
                        "lprime": s.lprime,
                        "nodes": s.nodes.roots,
                        "complex_nodes": s.nodes.complex_roots,
                        "residual": finite(s.diagnostics.max_relative),
                    })
                })
                .collect();
            json_body(
                cfg,
                json!({ "energy_unit": setup.label.energy_unit(), "levels": levels }),
            )
        }
    };
    Ok(Outcome::ok(body))
}

fn constrain(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let setup = Setup::new(cfg)?;
    let mut rows = Vec::new();
    for (n, l) in levels(cfg) {
        let (b, c) = match cfg.b {
            Some(b) => (
                b,
                constrain_c(n, l, setup.a, b, setup.d, setup.mass, setup.units)?,
            ),
            None => {
                let b = setup.linear_term(cfg, n, l)?;
                (b, cfg.c.unwrap_or_default())
            }
        };
        rows.push((n, l, b, c));
    }
    let body = match format_of(cfg) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|&(n, l, b, c)| {
                    vec![
                        n.to_string(),
                        l.to_string(),
                        format_sig(setup.a),
                        format_sig(b),
                        format_sig(c),
                        format_sig(setup.d),
                    ]
                })
                .collect();
            csv_body(&["n", "l", "a", "b", "c", "d"], &rows)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(n, l, b, c)| json!({ "n": n, "l": l, "a": setup.a, "b": b, "c": c, "d": setup.d }))
                .collect();
            json_body(cfg, json!({ "levels": rows }))
        }
    };
    Ok(Outcome::ok(body))
}

fn wavefunction(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let setup = Setup::new(cfg)?;
    let mut funcs = Vec::new();
    for (n, l) in levels(cfg) {
        funcs.push(Radial64::build(setup.solve(cfg, n, l)?)?);
    }
    let r_max = match cfg.r_max {
        Some(r) if r > 0.0 => r,
        Some(r) => {
            return Err(Failure::Solver(cmph::Error::Domain(format!(
                "r_max must be positive, got {r}"
            ))))
        }
        None => funcs.iter().map(|f| f.support().1).fold(0.0, f64::max),
    };
    let points = cfg.points.unwrap_or(DEFAULT_GRID_POINTS);
    if points < 2 {
        return Err(Failure::Solver(cmph::Error::Domain(format!(
            "need at least 2 grid points, got {points}"
        ))));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| r_max * i as f64 / (points - 1) as f64)
        .collect();
    let body = match format_of(cfg) {
        Format::Csv if funcs.len() == 1 => {
            let mut out = Vec::new();
            funcs[0]
                .write_csv(&mut out, &grid)
                .map_err(|e| Failure::io(e, "formatting wave function".into()))?;
            out
        }
        Format::Csv => {
            let mut header = vec!["r".to_string()];
            header.extend(
                funcs
                    .iter()
                    .map(|f| format!("psi_n{}_l{}", f.solution().qn.n, f.solution().qn.l)),
            );
            let rows: Vec<Vec<String>> = grid
                .iter()
                .map(|&r| {
                    std::iter::once(format_sig(r))
                        .chain(funcs.iter().map(|f| format_sig(f.psi(r))))
                        .collect()
                })
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            csv_body(&header, &rows)
        }
        Format::Json => {
            let levels: Vec<Value> = funcs
                .iter()
                .map(|f| {
                    let s = f.solution();
                    json!({
                        "n": s.qn.n,
                        "l": s.qn.l,
                        "b": s.params.b,
                        "c": s.params.c,
                        "energy": s.energy,
                        "normalization": f.report(),
                        "psi": grid.iter().map(|&r| finite(f.psi(r))).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_body(
                cfg,
                json!({ "length_unit": setup.label.length_unit(), "r": grid, "levels": levels }),
            )
        }
    };
    Ok(Outcome::ok(body))
}

struct Check {
    n: usize,
    l: usize,
    c: f64,
    analytic: f64,
    numeric: f64,
    deviation: f64,
    residual: f64,
    status: &'static str,
}

fn verify(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let setup = Setup::new(cfg)?;
    let shooting = match cfg.steps {
        Some(steps) => Shooting64::with_steps(steps),
        None => Shooting64::default(),
    };
    let mut checks = Vec::new();
    let mut problems = Vec::new();
    for (n, l) in levels(cfg) {
        let sol = setup.solve(cfg, n, l)?;
        let forced = match (cfg.b, cfg.c) {
            (Some(_), Some(c)) if relative(c, sol.params.c) > 1e-9 => Some(c),
            _ => None,
        };
        let check = match forced {
            Some(c) => {
                let residual = residual_of(sol.with_forced_c(c))?;
                problems.push(format!(
                    "n = {n}, l = {l}: c = {c} is not the constrained value {}; ODE residual {residual:e}",
                    sol.params.c
                ));
                Check {
                    n,
                    l,
                    c,
                    analytic: sol.energy,
                    numeric: f64::NAN,
                    deviation: f64::NAN,
                    residual,
                    status: "perturbed",
                }
            }
            None => {
                let report = compare(&sol, &shooting)?;
                let residual = residual_of(sol.clone())?;
                let ok = report.relative_deviation < VERIFY_TOL && residual < RESIDUAL_TOL;
                if !ok {
                    problems.push(format!(
                        "n = {n}, l = {l}: deviation {:e}, ODE residual {residual:e}",
                        report.relative_deviation
                    ));
                }
                Check {
                    n,
                    l,
                    c: sol.params.c,
                    analytic: report.analytic_energy,
                    numeric: report.numeric_energy,
                    deviation: report.relative_deviation,
                    residual,
                    status: if ok { "ok" } else { "fail" },
                }
            }
        };
        checks.push(check);
    }
    let body = match format_of(cfg) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = checks
                .iter()
                .map(|k| {
                    vec![
                        k.n.to_string(),
                        k.l.to_string(),
                        format_sig(k.c),
                        format_sig(k.analytic),
                        format_sig(k.numeric),
                        format_sig(k.deviation),
                        format_sig(k.residual),
                        k.status.to_string(),
                    ]
                })
                .collect();
            csv_body(
                &[
                    "n",
                    "l",
                    "c",
                    "analytic",
                    "numeric",
                    "relative_deviation",
                    "ode_residual",
                    "status",
                ],
                &rows,
            )
        }
        Format::Json => {
            let rows: Vec<Value> = checks
                .iter()
                .map(|k| {
                    json!({
                        "n": k.n,
                        "l": k.l,
                        "c": k.c,
                        "analytic": k.analytic,
                        "numeric": finite(k.numeric),
                        "relative_deviation": finite(k.deviation),
                        "ode_residual": finite(k.residual),
                        "status": k.status,
                    })
                })
                .collect();
            json_body(cfg, json!({ "tolerance": VERIFY_TOL, "levels": rows }))
        }
    };
    let status = if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(problems.join("; ")))
    };
    Ok(Outcome { body, status })
}

fn sweep(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let label = units_of(cfg)?;
    let units = Units64::from_label(label);
    let mass = cfg.mass.unwrap_or(default_mass(label));
    let variable = cfg
        .variable
        .ok_or_else(|| Failure::Usage("--variable is required (omega or c)".into()))?;
    let (lo, hi) = match (cfg.lo, cfg.hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(Failure::Usage("--lo and --hi are required".into())),
    };
    let (omega, c) = match variable {
        SweepVariable::Omega => (
            lo,
            cfg.c
                .ok_or_else(|| Failure::Usage("--c is required when sweeping omega".into()))?,
        ),
        SweepVariable::C => (
            cfg.omega
                .ok_or_else(|| Failure::Usage("--omega is required when sweeping c".into()))?,
            0.0,
        ),
    };
    let quantity = cfg.quantity.unwrap_or(Quantity::E0);
    let base = Sweep64 {
        variable,
        lo,
        hi,
        points: cfg.points.unwrap_or(DEFAULT_SWEEP_POINTS),
        l: 0,
        c,
        omega,
        d: cfg.d.unwrap_or(0.0),
        quantity,
        branch: cfg.branch.unwrap_or_default(),
        probe_radius: cfg.probe_radius,
    };
    base.validate()?;
    let preset = Preset64::new(mass, units, omega)?;
    let ls = cfg.l.unwrap_or(Span::single(0));
    let mut tables: Vec<(usize, SweepTable<f64>)> = Vec::new();
    for l in ls.values() {
        tables.push((l, run_sweep(&Sweep64 { l, ..base.clone() }, &preset)?));
    }
    let body = match format_of(cfg) {
        Format::Csv => {
            let curves: Vec<(String, &SweepTable<f64>)> = tables
                .iter()
                .map(|(l, t)| {
                    let name = if ls.len() == 1 {
                        quantity.as_str().to_string()
                    } else {
                        format!("{}_l{l}", quantity.as_str())
                    };
                    (name, t)
                })
                .collect();
            let mut out = Vec::new();
            write_curves_csv(&curves, &mut out)
                .map_err(|e| Failure::io(e, "formatting sweep".into()))?;
            out
        }
        Format::Json => {
            let curves: Vec<Value> = tables
                .iter()
                .map(|(l, t)| {
                    let rows: Vec<Value> = t
                        .rows
                        .iter()
                        .map(|r| match &r.value {
                            Ok(v) => json!({ "x": r.x, "value": finite(*v), "constraint_satisfied": r.constraint_satisfied }),
                            Err(e) => json!({ "x": r.x, "value": null, "error": e.to_string() }),
                        })
                        .collect();
                    json!({ "l": l, "quantity": t.quantity.as_str(), "units": t.units, "rows": rows })
                })
                .collect();
            json_body(
                cfg,
                json!({ "variable": variable.as_str(), "curves": curves }),
            )
        }
    };
    Ok(Outcome::ok(body))
}

/// The three `n = 0` levels of `V = r²/32 + r − c/r` in natural units.
fn table1(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let (a, b, d) = (1.0 / 32.0, 1.0, 0.0);
    let shooting = Shooting64::default();
    let mut rows = Vec::new();
    for l in 0..3 {
        let sol = solve_level(QuantumNumbers::new(0, l), a, b, d, 1.0, Units64::natural())?;
        let numeric = numerov_solve(&sol.params, l, 0, &shooting)?;
        rows.push((sol.params.c, l, numeric.energy, sol.energy));
    }
    let body = match format_of(cfg) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|&(c, l, numeric, present)| {
                    vec![
                        a.to_string(),
                        format!("{b:.3}"),
                        format!("{c:.3}"),
                        format!("{d:.3}"),
                        l.to_string(),
                        format!("{numeric:.3}"),
                        format!("{present:.3}"),
                    ]
                })
                .collect();
            csv_body(&["a", "b", "c", "d", "l", "Numerical", "Present"], &rows)
        }
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(c, l, numeric, present)| {
                    json!({ "a": a, "b": b, "c": c, "d": d, "l": l, "numerical": numeric, "present": present })
                })
                .collect();
            json_body(cfg, json!({ "rows": rows }))
        }
    };
    Ok(Outcome::ok(body))
}
