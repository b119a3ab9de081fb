use anosov_core::bowen::{
    bowen_dimension, box_dimension, default_scale, sample_limit_set, SchottkyData,
};
use anosov_core::calculus::{grid_fields, master_identity_check, Stencil};
use anosov_core::reps::{
    anosov_certificate, grid_builder, load_grid, FamilyKind, ParamGrid, DEFAULT_C_MAX,
    DEFAULT_MU_MIN,
};
use anosov_core::spectrum::{
    entropy_growth, exponent_dirichlet, intersection, ClassSpectrum, ExponentEstimate,
};
use anosov_core::{RepPoint, WeightFunctional, C64};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{FamilySpec, RunConfig};
use crate::CliError;

/// Result of a command: a JSON summary for stdout and files for the
/// output directory.
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<(String, Vec<u8>)>,
    /// Set when a verification check failed.
    pub failure: Option<String>,
}

impl Outcome {
    fn json(command: &str, name: &str, body: Value) -> Result<Self, CliError> {
        let text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(Outcome {
            summary: json!({ "command": command, "file": name }),
            files: vec![(name.to_string(), (text + "\n").into_bytes())],
            failure: None,
        })
    }
}

fn build(spec: &FamilySpec) -> Result<(FamilyKind, RepPoint), CliError> {
    let kind = spec.resolve().map_err(CliError::Config)?;
    let rep = kind.build()?;
    Ok((kind, rep))
}

fn functionals(cfg: &RunConfig, dim: usize) -> Result<Vec<WeightFunctional>, CliError> {
    cfg.functionals
        .iter()
        .map(|s| WeightFunctional::parse(dim, s).map_err(CliError::from))
        .collect()
}

fn echo(cfg: &RunConfig) -> Value {
    serde_json::to_value(cfg).unwrap_or(Value::Null)
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let cols: Vec<_> = functionals(cfg, rep.dim())?
        .into_iter()
        .map(|p| (0, p))
        .collect();
    let spec = ClassSpectrum::build_with(&[&rep], &cols, cfg.max_len, cfg.primitive_only)?;
    let mut csv = Vec::new();
    spec.write_csv(&mut csv)?;
    Ok(Outcome {
        summary: json!({
            "command": "spectrum",
            "file": "spectrum.csv",
            "classes": spec.len(),
            "skipped": spec.skipped(),
            "t_complete": spec.t_complete(),
        }),
        files: vec![("spectrum.csv".into(), csv)],
        failure: None,
    })
}

#[derive(Serialize)]
struct ExponentEntry {
    functional: String,
    growth: ExponentEstimate,
    dirichlet: ExponentEstimate,
    delta: f64,
}

fn exponents(
    rep: &RepPoint,
    phi: &WeightFunctional,
    cfg: &RunConfig,
) -> Result<ExponentEntry, CliError> {
    let spec = ClassSpectrum::single(rep, phi, cfg.max_len)?;
    let growth = entropy_growth(&spec)?;
    let dirichlet = exponent_dirichlet(rep, phi, cfg.element_len)?;
    Ok(ExponentEntry {
        functional: phi.name().to_string(),
        delta: growth.value - dirichlet.value,
        growth,
        dirichlet,
    })
}

pub fn exponent(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let entries = functionals(cfg, rep.dim())?
        .iter()
        .map(|phi| exponents(&rep, phi, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Outcome::json(
        "exponent",
        "exponent.json",
        json!({ "exponents": entries, "config": echo(cfg) }),
    )
}

pub fn intersect(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let (_, other) = build(cfg.other.as_ref().unwrap_or(&cfg.family))?;
    if rep.rank() != other.rank() {
        return Err(CliError::Config(format!(
            "families have ranks {} and {}",
            rep.rank(),
            other.rank()
        )));
    }
    let mut entries = Vec::new();
    for (p, q) in functionals(cfg, rep.dim())?
        .into_iter()
        .zip(functionals(cfg, other.dim())?)
    {
        let table = ClassSpectrum::build(&[&rep, &other], &[(0, p.clone()), (1, q.clone())], cfg.max_len)?;
        let h_base = exponent_dirichlet(&rep, &p, cfg.element_len)?.value;
        let h_other = exponent_dirichlet(&other, &q, cfg.element_len)?.value;
        let est = intersection(&table, &table.column(1), h_base)?;
        entries.push(json!({
            "functional": p.name(),
            "intersection": est,
            "h_base": h_base,
            "h_other": h_other,
            "renormalized": h_other / h_base * est.value,
            "classes": table.count_le(table.t_complete()),
        }));
    }
    Outcome::json(
        "intersect",
        "intersect.json",
        json!({ "intersections": entries, "config": echo(cfg) }),
    )
}

/// The bending family through a real Schottky base, kept under lifts.
fn bending_of(kind: &FamilyKind) -> Option<FamilyKind> {
    match kind {
        FamilyKind::RealSchottky { la, lb, kappa } => Some(FamilyKind::Bending {
            la: *la,
            lb: *lb,
            kappa: *kappa,
            z: [0.0, 0.0],
        }),
        FamilyKind::Bending { .. } => Some(kind.clone()),
        FamilyKind::Lift { base, lift, param } => Some(FamilyKind::Lift {
            base: Box::new(bending_of(base)?),
            lift: *lift,
            param: *param,
        }),
        _ => None,
    }
}

fn grid(cfg: &RunConfig) -> Result<ParamGrid, CliError> {
    if let Some(p) = &cfg.grid {
        return load_grid(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())));
    }
    let kind = cfg.family.resolve().map_err(CliError::Config)?;
    let fam = bending_of(&kind).ok_or_else(|| {
        CliError::Config("family has no bending deformation; supply a grid file".into())
    })?;
    Ok(grid_builder(&fam, C64::new(0.0, 0.0), cfg.grid_step, cfg.grid_step, cfg.grid_half)?)
}

pub fn pressure(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let g = grid(cfg)?;
    let mut entries = Vec::new();
    for phi in functionals(cfg, g.dim())? {
        let f = grid_fields(&g, &phi, Stencil::Cross, &cfg.calculus)?;
        entries.push(json!({
            "functional": phi.name(),
            "h0": f.h0,
            "s": f.pressure(anosov_core::calculus::Axis::S)?,
            "t": f.pressure(anosov_core::calculus::Axis::T)?,
            "horizon": f.horizon,
            "classes": f.classes,
        }));
    }
    Outcome::json(
        "pressure",
        "pressure.json",
        json!({ "pressure": entries, "geometry": g.geometry(), "config": echo(cfg) }),
    )
}

struct Dimensions {
    bowen: f64,
    exponent: f64,
    boxes: f64,
    body: Value,
}

fn dimensions(rep: &RepPoint, cfg: &RunConfig) -> Result<Dimensions, CliError> {
    let sch = SchottkyData::from_rep(rep)?;
    let b = bowen_dimension(&sch, cfg.depth, 1e-10)?;
    let a1 = WeightFunctional::root(2, 1)?;
    let h = exponent_dirichlet(rep, &a1, cfg.element_len)?;
    let cloud = sample_limit_set(rep, cfg.cloud_len, cfg.cloud_mode, cfg.chart)?;
    let boxes = box_dimension(&cloud, default_scale(&cloud))?;
    let body = json!({
        "bowen": b,
        "exponent": h,
        "box": boxes,
        "cloud_points": cloud.points.len(),
        "chart": cloud.chart,
        "delta_bowen_exponent": b.value - h.value,
        "delta_box_bowen": boxes.value - b.value,
    });
    Ok(Dimensions {
        bowen: b.value,
        exponent: h.value,
        boxes: boxes.value,
        body,
    })
}

pub fn dimension(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let d = dimensions(&rep, cfg)?;
    Outcome::json(
        "dimension",
        "dimension.json",
        json!({ "dimension": d.body, "config": echo(cfg) }),
    )
}

pub fn limitset(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let cloud = sample_limit_set(&rep, cfg.cloud_len, cfg.cloud_mode, cfg.chart)?;
    let mut csv = Vec::new();
    cloud.write_csv(&mut csv)?;
    let mut files = vec![("limitset.csv".to_string(), csv)];
    if let Some(p) = cfg.ppm {
        let mut ppm = Vec::new();
        cloud.write_ppm(&mut ppm, p.width, p.height)?;
        files.push(("limitset.ppm".into(), ppm));
    }
    Ok(Outcome {
        summary: json!({
            "command": "limitset",
            "points": cloud.points.len(),
            "chart": cloud.chart,
            "files": files.iter().map(|f| f.0.clone()).collect::<Vec<_>>(),
        }),
        files,
        failure: None,
    })
}

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value.abs() < threshold,
        }
    }

    fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

pub const SUITES: [(&str, &str); 3] = [
    (
        "identities",
        "J >= 1, imaginary-direction degeneracy, pluriharmonicity and the curvature identity on a bending grid",
    ),
    (
        "certificates",
        "word-length growth certificate per functional; disk configuration for Schottky data",
    ),
    (
        "oracles",
        "counting against Dirichlet exponent; transfer operator and box counting against the exponent",
    ),
];

fn identities(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let g = grid(cfg)?;
    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    for phi in functionals(cfg, g.dim())? {
        let r = master_identity_check(&g, &phi, &cfg.calculus)?;
        let n = phi.name();
        checks.push(Check::above(format!("{n}: J >= 1"), r.j_min, 1.0 - t.intersection));
        checks.push(Check::below(
            format!("{n}: P(t) / P(s)"),
            r.pressure_t.value / r.pressure_s.value.abs().max(cfg.calculus.floor),
            t.degeneracy,
        ));
        checks.push(Check::below(
            format!("{n}: pluriharmonic residual"),
            r.pluriharmonicity.value,
            t.pluriharmonic,
        ));
        checks.push(Check::below(format!("{n}: identity residual"), r.residual, t.identity));
        checks.push(Check {
            name: format!("{n}: sign report"),
            value: r.h_tt - (r.h0 * r.pressure_s.value - r.h_ss),
            threshold: 0.0,
            pass: r.sign_consistent,
        });
    }
    Ok(checks)
}

fn certificates(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let len = cfg.max_len.clamp(2, 12);
    let mut checks = Vec::new();
    for phi in functionals(cfg, rep.dim())? {
        let c = anosov_certificate(&rep, &phi, len, DEFAULT_MU_MIN, DEFAULT_C_MAX)?;
        checks.push(Check {
            name: format!("{}: growth certificate slope", phi.name()),
            value: c.mu_hat,
            threshold: c.mu_min,
            pass: c.pass,
        });
    }
    if rep.dim() == 2 {
        let margin = SchottkyData::from_rep(&rep).map(|s| s.margin());
        checks.push(Check {
            name: "Schottky disk margin".into(),
            value: *margin.as_ref().unwrap_or(&f64::NAN),
            threshold: 0.0,
            pass: margin.is_ok(),
        });
    }
    Ok(checks)
}

fn oracles(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let (_, rep) = build(&cfg.family)?;
    let t = &cfg.tolerances;
    let mut checks = Vec::new();
    for phi in functionals(cfg, rep.dim())? {
        let e = exponents(&rep, &phi, cfg)?;
        checks.push(Check::below(
            format!("{}: counting - Dirichlet", e.functional),
            e.delta,
            t.exponent,
        ));
    }
    if rep.dim() == 2 {
        let d = dimensions(&rep, cfg)?;
        checks.push(Check::below("transfer - exponent", d.bowen - d.exponent, t.bowen));
        checks.push(Check::below("box - transfer", d.boxes - d.bowen, t.boxes));
    }
    Ok(checks)
}

pub fn verify(suite: &str, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let checks = match suite {
        "identities" => identities(cfg)?,
        "certificates" => certificates(cfg)?,
        "oracles" => oracles(cfg)?,
        _ => return Err(CliError::Config(format!("unknown suite {suite:?}"))),
    };
    let pass = checks.iter().all(|c| c.pass);
    let name = format!("verify-{suite}.json");
    let mut out = Outcome::json(
        "verify",
        &name,
        json!({ "suite": suite, "pass": pass, "checks": checks, "config": echo(cfg) }),
    )?;
    out.summary = json!({ "command": "verify", "suite": suite, "pass": pass, "file": name });
    if !pass {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        out.failure = Some(format!("{suite}: failed {}", failed.join("; ")));
    }
    Ok(out)
}
