//! tropglue: batch front end for exact tropical gluing computations.
//!
//! Reads a problem file, dispatches to the engines, and prints a
//! machine-readable JSON report. Exit codes: 0 success, 2 schema error,
//! 3 domain precondition violation, 4 inconclusive verdict under
//! --require-verdict.

use std::collections::BTreeMap;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use tropglue_core::basic_cone::basic_cone;
use tropglue_core::complex::ConeComplex;
use tropglue_core::cones::Cone;
use tropglue_core::error::Error as CoreError;
use tropglue_core::formulas::{
    blowup_formula, build_tau_out, validate_wall_type, wall_recursion_step, wall_type,
    PartitionCollection, WallRecursionChild, WallRecursionInput,
};
use tropglue_core::gluing::{flatness_check, rigid_report, GluingProblem};
use tropglue_core::json::{
    format_rational, matrix_to_json, parse_weights, JBlowup, JFibre, JFlatness, JGlue, JInt,
    JProjectRay, JRigid, JToricProblem, JWallRecurse, ProblemFile,
};
use tropglue_core::lattice::{smith_normal_form, IntMatrix};
use tropglue_core::monoids::{
    fs_point_fibre_components, nonempty_sufficient, FsSharpMonoid, NonemptyVerdict, PointDiagram,
    PrimedDiagram, PrimedNonempty,
};
use tropglue_core::project::{project_type_along_ray, relative_lift_cone};
use tropglue_core::toric::{count, End, ToricCountProblem};
use tropglue_core::types::{Contraction, EdgeImage};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "tropglue", version, about = "exact tropical gluing computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON).
    input: String,
    /// Oracle source for formulas that need one: a table file path, or
    /// the literal `tropical`.
    #[arg(long)]
    oracle: Option<String>,
    /// Seed for deterministic perturbations.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fail (exit 4) when the verdict is inconclusive-by-design.
    #[arg(long, default_value_t = false)]
    require_verdict: bool,
    /// Embed intermediate objects (gluing matrices, SNF factors, cones).
    #[arg(long, default_value_t = false)]
    emit_intermediates: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Connected components of an fs fibre product of log points.
    Fibre(Common),
    /// Tropical gluing map, multiplicity and transversality.
    Glue(Common),
    /// Rigid-type analysis over the base ray.
    Rigid(Common),
    /// Validate a wall type and derive its invariants.
    WallValidate(Common),
    /// One step of the wall recursion.
    WallRecurse(Common),
    /// The blow-up partition formula.
    Blowup(Common),
    /// Brute-force toric tropical count.
    CountToric(Common),
    /// The tropical flatness criterion.
    Flatness(Common),
    /// Project a type along a ray and compute the lift cone.
    ProjectRay(Common),
}

enum Failure {
    Schema(String),
    Domain(String),
    Inconclusive(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Schema(_) => Failure::Schema(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Schema(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Fibre(c) => ("fibre", c),
        Command::Glue(c) => ("glue", c),
        Command::Rigid(c) => ("rigid", c),
        Command::WallValidate(c) => ("wall-validate", c),
        Command::WallRecurse(c) => ("wall-recurse", c),
        Command::Blowup(c) => ("blowup", c),
        Command::CountToric(c) => ("count-toric", c),
        Command::Flatness(c) => ("flatness", c),
        Command::ProjectRay(c) => ("project-ray", c),
    };
    match run(kind, common) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serializable report"));
            ExitCode::SUCCESS
        }
        Err(Failure::Schema(msg)) => {
            eprintln!("schema error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("domain error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Inconclusive(msg)) => {
            eprintln!("inconclusive: {msg}");
            ExitCode::from(4)
        }
    }
}

fn run(kind: &str, common: &Common) -> Result<Value, Failure> {
    let raw = std::fs::read(&common.input)
        .map_err(|e| Failure::Schema(format!("cannot read `{}`: {e}", common.input)))?;
    let hash = hex_digest(&raw);
    let file: ProblemFile = serde_json::from_slice(&raw)?;
    if file.kind != kind {
        return Err(Failure::Schema(format!(
            "problem file has kind `{}`, subcommand expects `{kind}`",
            file.kind
        )));
    }
    let mut report = match kind {
        "fibre" => run_fibre(&file.payload, common)?,
        "glue" => run_glue(&file.payload, common)?,
        "rigid" => run_rigid(&file.payload, common)?,
        "wall-validate" => run_wall_validate(&file.payload, common)?,
        "wall-recurse" => run_wall_recurse(&file.payload)?,
        "blowup" => run_blowup(&file.payload, common)?,
        "count-toric" => run_count_toric(&file.payload, common)?,
        "flatness" => run_flatness(&file.payload)?,
        "project-ray" => run_project_ray(&file.payload, common)?,
        _ => unreachable!(),
    };
    let obj = report.as_object_mut().expect("report is an object");
    obj.insert("version".into(), json!(VERSION));
    obj.insert("kind".into(), json!(kind));
    obj.insert("input_sha256".into(), json!(hash));
    Ok(report)
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

fn payload<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T, Failure> {
    Ok(serde_json::from_value(value.clone())?)
}

fn monoid(m: &tropglue_core::json::JMonoid) -> Result<FsSharpMonoid, Failure> {
    let gens: Vec<Vec<BigInt>> = m
        .dual_cone
        .iter()
        .map(|g| g.iter().map(|x| x.0.clone()).collect())
        .collect();
    let rank = gens.first().map_or(0, |g: &Vec<BigInt>| g.len());
    FsSharpMonoid::from_dual_cone(Cone::from_generators(rank, gens)).map_err(Failure::from)
}

fn int_matrix(rows: &[Vec<JInt>]) -> Result<IntMatrix, Failure> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    let mut entries = Vec::with_capacity(r * c);
    for row in rows {
        if row.len() != c {
            return Err(Failure::Schema("ragged matrix".into()));
        }
        entries.extend(row.iter().map(|x| x.0.clone()));
    }
    IntMatrix::from_entries(r, c, entries).map_err(Failure::from)
}

fn verdict_str(v: NonemptyVerdict) -> &'static str {
    match v {
        NonemptyVerdict::GuaranteedNonempty => "guaranteed-nonempty",
        NonemptyVerdict::Unknown => "unknown",
    }
}

fn snf_factors(m: &IntMatrix) -> Vec<JInt> {
    smith_normal_form(m).invariant_factors().into_iter().map(JInt).collect()
}

fn run_fibre(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JFibre = payload(value)?;
    let mut d = PointDiagram::new(
        monoid(&j.p)?,
        monoid(&j.q1)?,
        monoid(&j.q2)?,
        int_matrix(&j.theta1)?,
        int_matrix(&j.theta2)?,
    );
    if let Some(pr) = &j.primed {
        let nonempty = match pr.nonempty.as_str() {
            "given" => PrimedNonempty::Given,
            "recurse" => PrimedNonempty::Recurse,
            other => return Err(Failure::Schema(format!("bad nonempty mode `{other}`"))),
        };
        d.primed = Some(PrimedDiagram {
            p: monoid(&pr.p)?,
            q1: monoid(&pr.q1)?,
            q2: monoid(&pr.q2)?,
            theta1: int_matrix(&pr.theta1)?,
            theta2: int_matrix(&pr.theta2)?,
            g: int_matrix(&pr.g)?,
            g1: int_matrix(&pr.g1)?,
            g2: int_matrix(&pr.g2)?,
            nonempty,
        });
    }
    let components = fs_point_fibre_components(&d).map_err(Failure::from)?;
    let nr = nonempty_sufficient(&d).map_err(Failure::from)?;
    let verdict = nr.verdict();
    if common.require_verdict && verdict == NonemptyVerdict::Unknown {
        return Err(Failure::Inconclusive("non-emptiness is unknown".into()));
    }
    let mut out = json!({
        "components": JInt(components),
        "nonempty": verdict_str(verdict),
        "conditions": {
            "primed_nonempty": nr.primed_nonempty,
            "projections_interior": nr.projections_interior,
            "inclusions_injective": nr.inclusions_injective,
            "induced_injective": nr.induced_injective,
        },
    });
    if common.emit_intermediates {
        let theta = d.theta();
        let obj = out.as_object_mut().unwrap();
        obj.insert("theta".into(), json!(matrix_to_json(&theta)));
        obj.insert("snf_factors".into(), json!(snf_factors(&theta)));
    }
    Ok(out)
}

fn glue_problem(j: &JGlue) -> Result<GluingProblem, Failure> {
    let complex = j.complex.build().map_err(Failure::from)?;
    let (decorated, names) = j.typ.build(&complex).map_err(Failure::from)?;
    let mut split = std::collections::BTreeSet::new();
    for id in &j.split {
        split.insert(names.edge_index(id).map_err(Failure::from)?);
    }
    GluingProblem::new(complex, decorated, split).map_err(Failure::from)
}

fn cones_json(complex: &ConeComplex) -> Value {
    let mut m = serde_json::Map::new();
    for id in complex.cone_ids() {
        let c = complex.cone(id).unwrap();
        let gens: Vec<Vec<JInt>> = c
            .generators()
            .iter()
            .map(|g| g.iter().map(|x| JInt(x.clone())).collect())
            .collect();
        m.insert(id.clone(), json!({ "generators": gens }));
    }
    Value::Object(m)
}

fn run_glue(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JGlue = payload(value)?;
    let p = glue_problem(&j)?;
    let report = p.glue_verdict().map_err(Failure::from)?;
    if common.require_verdict && report.nonempty == NonemptyVerdict::Unknown {
        return Err(Failure::Inconclusive("non-emptiness is unknown".into()));
    }
    let mut out = json!({
        "mu": JInt(report.mu),
        "transverse": report.transverse,
        "kernel_rank": report.kernel_rank,
        "nonempty": verdict_str(report.nonempty),
    });
    if common.emit_intermediates {
        let obj = out.as_object_mut().unwrap();
        obj.insert("psi".into(), json!(matrix_to_json(&report.psi)));
        obj.insert("snf_factors".into(), json!(snf_factors(&report.psi)));
        obj.insert(
            "theta_t".into(),
            json!(matrix_to_json(&p.build_theta_t().map_err(Failure::from)?)),
        );
        obj.insert("cones".into(), cones_json(&p.complex));
    }
    Ok(out)
}

fn run_rigid(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JRigid = payload(value)?;
    let complex = j.complex.build().map_err(Failure::from)?;
    let (decorated, _) = j.typ.build(&complex).map_err(Failure::from)?;
    let r = rigid_report(&complex, &decorated).map_err(Failure::from)?;
    let mut out = json!({
        "mu": JInt(r.mu.clone()),
        "mu_rigid": JInt(r.mu_rigid.clone()),
        "m_tau": JInt(r.m_tau.clone()),
        "degree": format_rational(&r.degree),
        "snake_ok": r.snake_ok,
        "kernel_rank": r.ker_psi_rank,
    });
    if common.emit_intermediates {
        let obj = out.as_object_mut().unwrap();
        obj.insert("psi".into(), json!(matrix_to_json(&r.psi)));
        obj.insert("psi_bar".into(), json!(matrix_to_json(&r.psi_bar)));
        obj.insert("snf_factors".into(), json!(snf_factors(&r.psi_bar)));
        obj.insert("cones".into(), cones_json(&complex));
    }
    Ok(out)
}

fn run_wall_validate(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JRigid = payload(value)?;
    let complex = j.complex.build().map_err(Failure::from)?;
    let (decorated, _) = j.typ.build(&complex).map_err(Failure::from)?;
    let verdict = validate_wall_type(&complex, &decorated).map_err(Failure::from)?;
    let mut out = json!({
        "valid": verdict.valid(),
        "clauses": {
            "graph": verdict.clause_graph,
            "realizable_balanced": verdict.clause_realizable_balanced,
            "dims": verdict.clause_dims,
        },
        "detail": verdict.detail,
    });
    if verdict.valid() {
        let w = wall_type(&complex, &decorated).map_err(Failure::from)?;
        let tau_out = build_tau_out(&complex, &w).map_err(Failure::from)?;
        let rays: Vec<Value> = tau_out
            .rays
            .iter()
            .map(|r| {
                json!({
                    "direction": r.direction.iter().map(|x| JInt(x.clone())).collect::<Vec<_>>(),
                    "tangencies": r
                        .tangencies
                        .iter()
                        .map(|(l, w)| json!([l, JInt(w.clone())]))
                        .collect::<Vec<_>>(),
                    "intersection": JInt(r.intersection.clone()),
                })
            })
            .collect();
        let obj = out.as_object_mut().unwrap();
        obj.insert("k_tau".into(), json!(JInt(w.k_tau.clone())));
        obj.insert("w_out".into(), json!(JInt(w.w_out.clone())));
        obj.insert(
            "tau_out".into(),
            json!({
                "rays": rays,
                "out_ray": tau_out.out_ray,
                "quotient_rank": tau_out.quotient_rank,
            }),
        );
        if common.emit_intermediates {
            obj.insert("h_star".into(), json!(matrix_to_json(&w.h_star)));
            obj.insert("snf_factors".into(), json!(snf_factors(&w.h_star)));
        }
    }
    Ok(out)
}

fn run_wall_recurse(value: &Value) -> Result<Value, Failure> {
    let j: JWallRecurse = payload(value)?;
    let complex = match &j.complex {
        Some(c) => Some(c.build().map_err(Failure::from)?),
        None => None,
    };
    let mut children = Vec::new();
    for c in &j.children {
        let decorated = match (&c.typ, &complex) {
            (Some(t), Some(cx)) => Some(t.build(cx).map_err(Failure::from)?.0),
            (Some(_), None) => {
                return Err(Failure::Schema("child types need a top-level complex".into()))
            }
            (None, _) => None,
        };
        children.push(WallRecursionChild { k: c.k.0.clone(), w: c.w.0.clone(), decorated });
    }
    let input = WallRecursionInput {
        children,
        n_out: j.n_out.0.clone(),
        w_out: j.w_out.0.clone(),
        aut: j.aut.as_ref().map(|a| a.0.clone()),
    };
    let value = wall_recursion_step(&input).map_err(Failure::from)?;
    Ok(json!({ "k_w": format_rational(&value) }))
}

struct ToricParts {
    rays: Vec<[BigInt; 2]>,
    constrained: Vec<End>,
    out: End,
    config: Option<Vec<BigRational>>,
}

/// Parse the pieces of a toric problem without the balancing validation;
/// the blow-up oracle balances only after the partition ends are added.
fn toric_parts(j: &JToricProblem) -> Result<ToricParts, Failure> {
    let rays: Vec<[BigInt; 2]> = j
        .rays
        .iter()
        .map(|r| {
            if r.len() != 2 {
                return Err(Failure::Schema("fan rays live in Z^2".into()));
            }
            Ok([r[0].0.clone(), r[1].0.clone()])
        })
        .collect::<Result<_, _>>()?;
    let mk_end = |e: &tropglue_core::json::JToricEnd| -> Result<End, Failure> {
        if e.dir.len() != 2 {
            return Err(Failure::Schema("end directions live in Z^2".into()));
        }
        Ok(End { dir: [e.dir[0].0.clone(), e.dir[1].0.clone()], weight: e.weight })
    };
    let constrained: Vec<End> = j.constrained.iter().map(&mk_end).collect::<Result<_, _>>()?;
    let out = mk_end(&j.out)?;
    let config: Option<Vec<BigRational>> = if !j.constrained.is_empty()
        && j.constrained.iter().all(|e| e.c.is_some())
    {
        Some(j.constrained.iter().map(|e| e.c.clone().unwrap().0).collect())
    } else {
        None
    };
    Ok(ToricParts { rays, constrained, out, config })
}

fn toric_problem(
    j: &JToricProblem,
) -> Result<(ToricCountProblem, Option<Vec<BigRational>>), Failure> {
    let parts = toric_parts(j)?;
    let problem = ToricCountProblem::new(parts.rays, parts.constrained, parts.out)
        .map_err(Failure::from)?;
    Ok((problem, parts.config))
}

fn run_count_toric(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JToricProblem = payload(value)?;
    let (problem, config) = toric_problem(&j)?;
    let r = count(&problem, config.as_deref(), common.seed).map_err(Failure::from)?;
    Ok(json!({
        "count": format_rational(&r.count),
        "solutions": r.solutions,
        "seed": r.seed,
    }))
}

fn run_blowup(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JBlowup = payload(value)?;
    let weights = parse_weights(&j.weights).map_err(Failure::from)?;
    // the --oracle flag overrides the file's oracle choice
    let mode = common.oracle.clone().unwrap_or_else(|| j.oracle.clone());
    let mut collections_used = 0usize;
    let total = if mode == "tropical" {
        let trop = j
            .tropical
            .as_ref()
            .ok_or_else(|| Failure::Schema("tropical oracle needs a `tropical` payload".into()))?;
        let base = toric_parts(&trop.base)?;
        let blown: BTreeMap<u64, [BigInt; 2]> = trop
            .blown_dirs
            .iter()
            .map(|(k, d)| {
                let k: u64 = k
                    .parse()
                    .map_err(|_| Failure::Schema(format!("bad blown divisor key `{k}`")))?;
                if d.len() != 2 {
                    return Err(Failure::Schema("blown directions live in Z^2".into()));
                }
                Ok((k, [d[0].0.clone(), d[1].0.clone()]))
            })
            .collect::<Result<_, _>>()?;
        let seed = common.seed;
        blowup_formula(&weights, |collection: &PartitionCollection| {
            collections_used += 1;
            let mut constrained = base.constrained.clone();
            for ((k, _l), parts) in &collection.0 {
                let dir = blown.get(k).ok_or_else(|| {
                    CoreError::Oracle(format!("no blown direction for divisor {k}"))
                })?;
                for &p in parts {
                    constrained.push(End { dir: dir.clone(), weight: p });
                }
            }
            let problem =
                ToricCountProblem::new(base.rays.clone(), constrained, base.out.clone())?;
            Ok(count(&problem, None, seed)?.count)
        })
        .map_err(Failure::from)?
    } else {
        let table: BTreeMap<String, tropglue_core::json::JRat> = match mode.as_str() {
            "table" => j
                .table
                .clone()
                .ok_or_else(|| Failure::Schema("table oracle needs a `table` payload".into()))?,
            path => {
                let raw = std::fs::read(path)
                    .map_err(|e| Failure::Schema(format!("cannot read oracle `{path}`: {e}")))?;
                serde_json::from_slice(&raw)?
            }
        };
        blowup_formula(&weights, |collection: &PartitionCollection| {
            collections_used += 1;
            let key = collection.canonical_string();
            table
                .get(&key)
                .map(|r| r.0.clone())
                .ok_or_else(|| CoreError::Oracle(format!("oracle table has no entry `{key}`")))
        })
        .map_err(Failure::from)?
    };
    Ok(json!({
        "value": format_rational(&total),
        "collections": collections_used,
    }))
}

fn run_flatness(value: &Value) -> Result<Value, Failure> {
    let j: JFlatness = payload(value)?;
    let complex = j.complex.build().map_err(Failure::from)?;
    let (target, target_names) = j.typ.build(&complex).map_err(Failure::from)?;
    let mut legs = Vec::new();
    for id in &j.legs {
        legs.push(target_names.leg_index(id).map_err(Failure::from)?);
    }
    let mut candidates = Vec::new();
    for c in &j.candidates {
        let (src, src_names) = c.typ.build(&complex).map_err(Failure::from)?;
        let mut vertex_map = vec![0usize; src.base.graph.n_vertices()];
        for (from, to) in &c.vertex_map {
            vertex_map[src_names.vertex_index(from).map_err(Failure::from)?] =
                target_names.vertex_index(to).map_err(Failure::from)?;
        }
        let mut edge_map = Vec::with_capacity(src.base.graph.edges.len());
        for id in src_names.edge_ids.iter() {
            let img = c
                .edge_map
                .get(id)
                .ok_or_else(|| Failure::Schema(format!("edge `{id}` missing from edge_map")))?;
            let img = img
                .as_object()
                .ok_or_else(|| Failure::Schema("edge_map values are objects".into()))?;
            if let Some(Value::String(e)) = img.get("edge") {
                edge_map.push(EdgeImage::Edge(target_names.edge_index(e).map_err(Failure::from)?));
            } else if let Some(Value::String(v)) = img.get("vertex") {
                edge_map
                    .push(EdgeImage::Vertex(target_names.vertex_index(v).map_err(Failure::from)?));
            } else {
                return Err(Failure::Schema(format!("bad edge_map entry for `{id}`")));
            }
        }
        let mut leg_map = Vec::with_capacity(src.base.graph.legs.len());
        for id in &src_names.leg_ids {
            let img = c
                .leg_map
                .get(id)
                .ok_or_else(|| Failure::Schema(format!("leg `{id}` missing from leg_map")))?;
            leg_map.push(target_names.leg_index(img).map_err(Failure::from)?);
        }
        candidates.push((src.base, Contraction { vertex_map, edge_map, leg_map }));
    }
    let r = flatness_check(&complex, &target.base, &legs, &candidates).map_err(Failure::from)?;
    let violations: Vec<Value> = r
        .violations
        .iter()
        .map(|v| {
            json!({
                "candidate": v.candidate,
                "dim_tau_prime": v.dim_tau_prime,
                "required": v.required,
            })
        })
        .collect();
    Ok(json!({
        "flat": r.flat,
        "dim_tau": r.dim_tau,
        "violations": violations,
    }))
}

fn run_project_ray(value: &Value, common: &Common) -> Result<Value, Failure> {
    let j: JProjectRay = payload(value)?;
    let complex = j.complex.build().map_err(Failure::from)?;
    let (decorated, names) = j.typ.build(&complex).map_err(Failure::from)?;
    let p = project_type_along_ray(&complex, &decorated, &j.ray).map_err(Failure::from)?;
    let projected_type = json!({
        "vertices": p.decorated.base.sigma_v.iter().enumerate().map(|(i, s)| {
            json!({ "id": names.vertex_ids[i], "sigma": s })
        }).collect::<Vec<_>>(),
        "edges": p.decorated.base.u_e.iter().enumerate().map(|(i, u)| {
            json!({
                "id": names.edge_ids[i],
                "sigma": p.decorated.base.sigma_e[i],
                "u": u.iter().map(|x| JInt(x.clone())).collect::<Vec<_>>(),
            })
        }).collect::<Vec<_>>(),
        "legs": p.decorated.base.u_l.iter().enumerate().map(|(i, u)| {
            json!({
                "id": names.leg_ids[i],
                "sigma": p.decorated.base.sigma_l[i],
                "u": u.iter().map(|x| JInt(x.clone())).collect::<Vec<_>>(),
                "positive": p.leg_positive[i],
            })
        }).collect::<Vec<_>>(),
    });
    let mut out = json!({
        "projected": projected_type,
        "all_legs_positive": p.all_legs_positive(),
    });
    if complex.has_delta() {
        let lift = relative_lift_cone(&complex, &decorated, &p).map_err(Failure::from)?;
        let functionals: Vec<Vec<String>> = lift
            .functionals
            .iter()
            .map(|f| f.iter().map(format_rational).collect())
            .collect();
        let gens: Vec<Vec<JInt>> = lift
            .cone
            .generators()
            .iter()
            .map(|g| g.iter().map(|x| JInt(x.clone())).collect())
            .collect();
        let obj = out.as_object_mut().unwrap();
        obj.insert("alpha_functionals".into(), json!(functionals));
        obj.insert("lift_cone".into(), json!({ "generators": gens, "dim": lift.dim }));
    }
    if common.emit_intermediates {
        let relative = basic_cone(&p.decorated.base, &p.complex).map_err(Failure::from)?;
        let obj = out.as_object_mut().unwrap();
        obj.insert("relative_dim".into(), json!(relative.dim));
        obj.insert("quotient_cones".into(), cones_json(&p.complex));
    }
    Ok(out)
}
