//! Subcommand implementations. Each builds a text payload (JSON or CSV)
//! and hands it to the emitter; `run` maps outcomes to exit codes.

use corrupted_compass::analysis::{
    bound_constants, construction_check, decay_fit, mc_theta, mean_field_check, pc_estimate,
    read_sweep_csv, sweep_to_csv, theta_sweep, to_json_string, SweepResult,
};
use corrupted_compass::oracle::{
    parse_rational, AuditSuite, ExactEngine, DEFAULT_ENUMERATION_BITS, MAX_ENUMERATION_BITS,
};
use corrupted_compass::{run_decision_tree, CompassState, Configuration, Error};
use num::BigRational;
use serde_json::{json, Value};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use crate::manifest::Emitter;
use crate::{
    AuditArgs, Cli, CliError, Cmd, ConstantsArgs, DecayArgs, Format, LatticeInfoArgs, LatticeTag,
    MeanfieldArgs, OracleArgs, PcArgs, SampleArgs, SweepArgs, ThetaArgs,
};

pub fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let emitter = Emitter::new();
    match cli.cmd {
        Cmd::LatticeInfo(a) => {
            let payload = lattice_info(&a)?;
            emitter.emit("lattice-info", None, a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sample(a) => {
            let payload = sample(&a)?;
            emitter.emit("sample", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Theta(a) => {
            let payload = theta(&a)?;
            emitter.emit("theta", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Sweep(a) => {
            let payload = sweep(&a)?;
            emitter.emit("sweep", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Oracle(a) => {
            let payload = oracle(&a)?;
            emitter.emit("oracle", None, a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Audit(a) => {
            let (payload, all_hold) = audit(&a)?;
            emitter.emit("audit", None, a.out.as_deref(), &payload)?;
            Ok(if all_hold {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            })
        }
        Cmd::Decay(a) => {
            let payload = decay(&a)?;
            emitter.emit("decay", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Pc(a) => {
            let payload = pc(&a)?;
            emitter.emit("pc", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Meanfield(a) => {
            let payload = meanfield(&a)?;
            emitter.emit("meanfield", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Constants(a) => {
            let payload = constants(&a)?;
            emitter.emit("constants", Some(a.seed), a.out.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn lattice_info(a: &LatticeInfoArgs) -> Result<String, CliError> {
    let spec = a.lattice.spec();
    let region = spec.ball(a.n);
    let radii: Vec<(u32, usize, usize)> = (0..=a.n)
        .map(|k| {
            let ball = region.ball_len(k).expect("k stays within the built ball");
            let sphere = region
                .sphere_range(k)
                .expect("k stays within the built ball")
                .len();
            (k, ball, sphere)
        })
        .collect();
    Ok(match a.format {
        Format::Csv => {
            let mut s = String::from("n,ball,sphere\n");
            for (k, ball, sphere) in radii {
                s.push_str(&format!("{k},{ball},{sphere}\n"));
            }
            s
        }
        Format::Json => {
            let rows: Vec<Value> = radii
                .iter()
                .map(|&(k, ball, sphere)| json!({"n": k, "ball": ball, "sphere": sphere}))
                .collect();
            to_json_string(&json!({
                "spec": spec,
                "degree": spec.degree(),
                "offsets": spec.offsets(),
                "opposite_slots": spec.opposite_slots(),
                "radii": rows,
            }))
        }
    })
}

fn sample(a: &SampleArgs) -> Result<String, CliError> {
    let spec = a.lattice.spec();
    let region = spec.ball(a.n);
    let cfg = Configuration::sample(region.clone(), a.p, a.seed)?;
    let vertices: Vec<Value> = (0..region.len())
        .map(|i| {
            let var = cfg.var(i);
            json!({
                "coords": region.vertex(i).coords(),
                "u": var.u,
                "a": var.a,
                "corrupted": cfg.corrupted(i),
            })
        })
        .collect();
    let open_edges: Vec<Value> = cfg
        .open_edges()
        .iter()
        .map(|e| json!([e.a.coords(), e.b.coords()]))
        .collect();
    let mut doc = json!({
        "family": spec.family_name(),
        "D": spec.dim_label(),
        "n": a.n,
        "p": a.p,
        "seed": a.seed,
        "vertices": vertices,
        "open_edges": open_edges,
    });
    if a.trace {
        let arm = run_decision_tree(&cfg, a.n, a.k)?;
        let coords = |vs: Vec<corrupted_compass::VertexId>| -> Vec<Vec<i32>> {
            vs.into_iter().map(|v| v.coords().to_vec()).collect()
        };
        doc["trace"] = json!({
            "k": a.k,
            "connected": arm.connected,
            "reveal_order": coords(arm.log.reveal_order()),
            "cluster": coords(arm.cluster_vertices()),
        });
    }
    Ok(to_json_string(&doc))
}

fn theta(a: &ThetaArgs) -> Result<String, CliError> {
    let est = mc_theta(a.lattice.spec(), a.n, a.p, a.replicas, a.seed, a.threads)?;
    Ok(match a.format {
        Format::Json => to_json_string(&est),
        Format::Csv => sweep_to_csv(&SweepResult {
            spec: a.lattice.spec(),
            rows: vec![est],
        }),
    })
}

fn sweep(a: &SweepArgs) -> Result<String, CliError> {
    let grid: Vec<f64> = match (&a.p_grid, a.p) {
        (Some(g), None) => g.0.clone(),
        (None, Some(p)) => vec![p],
        _ => unreachable!("clap enforces exactly one of --p/--p-grid"),
    };
    let result = theta_sweep(a.lattice.spec(), &a.n, &grid, a.replicas, a.seed, a.threads)?;
    Ok(match a.format {
        Format::Csv => sweep_to_csv(&result),
        Format::Json => to_json_string(&result),
    })
}

fn budget(allow_big: bool) -> f64 {
    if allow_big {
        MAX_ENUMERATION_BITS
    } else {
        DEFAULT_ENUMERATION_BITS
    }
}

fn oracle(a: &OracleArgs) -> Result<String, CliError> {
    let spec = a.lattice.spec();
    let (coefficients, audits) = if a.p.is_empty() {
        let engine = ExactEngine::with_budget(spec, a.n, budget(a.allow_big_enumeration))?;
        (engine.theta_polynomial().coefficient_strings(), Vec::new())
    } else {
        let suite = AuditSuite::with_budget(spec, a.n, budget(a.allow_big_enumeration))?;
        let mut audits = Vec::new();
        for s in &a.p {
            let p = parse_rational(s)?;
            for report in suite.all(&p)? {
                audits.push(report.to_json());
            }
        }
        (
            suite.engine().theta_polynomial().coefficient_strings(),
            audits,
        )
    };
    Ok(to_json_string(&json!({
        "spec": spec,
        "n": a.n,
        "theta_coefficients": coefficients,
        "audits": audits,
    })))
}

fn audit(a: &AuditArgs) -> Result<(String, bool), CliError> {
    let mut ps: Vec<BigRational> = Vec::new();
    for s in &a.p {
        ps.push(parse_rational(s)?);
    }
    if let Some(grid) = &a.p_grid {
        for &x in &grid.0 {
            // Every finite f64 is an exact binary rational, so grid points
            // are audited at exactly the value the sweep would use.
            ps.push(
                BigRational::from_float(x)
                    .ok_or_else(|| Error::Parameter(format!("grid value {x} is not finite")))?,
            );
        }
    }
    if ps.is_empty() {
        return Err(Error::Parameter("audit needs --p and/or --p-grid".into()).into());
    }
    let spec = a.lattice.spec();
    let suite = AuditSuite::with_budget(spec, a.n, budget(a.allow_big_enumeration))?;
    let mut reports = Vec::new();
    for p in &ps {
        reports.extend(suite.all(p)?);
    }
    let all_hold = reports.iter().all(|r| r.holds);
    let payload = match a.format {
        Format::Json => {
            to_json_string(&Value::Array(reports.iter().map(|r| r.to_json()).collect()))
        }
        Format::Csv => {
            let mut s = String::from("name,family,D,n,k,v,p,lhs,rhs,slack,holds\n");
            for r in &reports {
                let k = r.context.k.map(|k| k.to_string()).unwrap_or_default();
                let v = r
                    .context
                    .v
                    .as_ref()
                    .map(|v| {
                        v.coords()
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(":")
                    })
                    .unwrap_or_default();
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    r.name,
                    spec.family_name(),
                    spec.dim_label(),
                    r.context.n,
                    k,
                    v,
                    r.context.p,
                    r.lhs,
                    r.rhs,
                    r.slack,
                    r.holds
                ));
            }
            s
        }
    };
    Ok((payload, all_hold))
}

fn load_sweep(path: &Path) -> Result<SweepResult, CliError> {
    let file = File::open(path)?;
    Ok(read_sweep_csv(BufReader::new(file))?)
}

/// Shared input plumbing for the fit commands: a prior sweep CSV, or an
/// inline sweep from the usual sampling flags.
#[allow(clippy::too_many_arguments)]
fn load_or_run_sweep(
    input: &Option<PathBuf>,
    lattice: Option<LatticeTag>,
    n: &[u32],
    grid: &[f64],
    replicas: u64,
    seed: u64,
    threads: usize,
) -> Result<SweepResult, CliError> {
    match (input, lattice) {
        (Some(path), None) => load_sweep(path),
        (None, Some(tag)) => {
            if n.is_empty() {
                return Err(Error::Parameter("inline sweep needs --n".into()).into());
            }
            Ok(theta_sweep(tag.spec(), n, grid, replicas, seed, threads)?)
        }
        (Some(_), Some(_)) => {
            Err(Error::Parameter("give --input or --lattice, not both".into()).into())
        }
        (None, None) => Err(Error::Parameter(
            "give --input FILE, or --lattice with inline sweep flags".into(),
        )
        .into()),
    }
}

fn decay(a: &DecayArgs) -> Result<String, CliError> {
    let sweep = load_or_run_sweep(
        &a.input,
        a.lattice,
        &a.n,
        &[a.p],
        a.replicas,
        a.seed,
        a.threads,
    )?;
    let fit = decay_fit(&sweep, a.p, a.window.map(|w| (w.0, w.1)))?;
    Ok(match a.format {
        Format::Json => to_json_string(&fit),
        Format::Csv => format!(
            "p,n_lo,n_hi,c,intercept,r_squared,points\n{:.16e},{},{},{:.16e},{:.16e},{:.16e},{}\n",
            fit.p, fit.n_lo, fit.n_hi, fit.c, fit.intercept, fit.r_squared, fit.points
        ),
    })
}

fn pc(a: &PcArgs) -> Result<String, CliError> {
    let est = pc_estimate(
        a.lattice.spec(),
        &a.n,
        a.replicas,
        a.seed,
        a.tau,
        a.iters,
        a.threads,
    )?;
    Ok(to_json_string(&est))
}

fn meanfield(a: &MeanfieldArgs) -> Result<String, CliError> {
    let grid: Vec<f64> = match (&a.input, &a.p_grid) {
        (Some(_), Some(_)) => {
            return Err(Error::Parameter(
                "--p-grid only applies to inline sweeps, not --input".into(),
            )
            .into())
        }
        (Some(_), None) => Vec::new(),
        (None, Some(g)) => g.0.clone(),
        (None, None) => {
            return Err(Error::Parameter("inline meanfield needs --p-grid".into()).into())
        }
    };
    let sweep = load_or_run_sweep(
        &a.input, a.lattice, &a.n, &grid, a.replicas, a.seed, a.threads,
    )?;
    let check = mean_field_check(&sweep, a.pc, (a.window.0, a.window.1))?;
    Ok(to_json_string(&check))
}

fn constants(a: &ConstantsArgs) -> Result<String, CliError> {
    let b = bound_constants(a.d, a.delta)?;
    match a.format {
        Format::Csv => {
            if a.construction_replicas.is_some() {
                return Err(Error::Parameter(
                    "the construction check is reported in JSON; drop --format csv".into(),
                )
                .into());
            }
            Ok(format!(
                "d,delta,c0,c1\n{},{:.16e},{:.16e},{:.16e}\n",
                b.d, b.delta, b.c0, b.c1
            ))
        }
        Format::Json => {
            let mut doc = serde_json::to_value(b).expect("constants serialize");
            if let Some(replicas) = a.construction_replicas {
                if a.d != 6 {
                    return Err(Error::Parameter(
                        "the blocking construction lives on the triangular lattice; use --d 6"
                            .into(),
                    )
                    .into());
                }
                let check = construction_check(a.delta, replicas, a.seed)?;
                doc["construction"] = serde_json::to_value(check).expect("check serializes");
            }
            Ok(to_json_string(&doc))
        }
    }
}
