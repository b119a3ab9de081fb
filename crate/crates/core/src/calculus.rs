//! Finite differences over parameter grids: Hessians of scalar fields,
//! pressure forms, pluriharmonicity residuals and the curvature identity
//! harness.
//!
//! Exponents are computed at every node from Dirichlet shells; intersection
//! numbers use one class table (classes and windows fixed by the centre) with
//! one period column per node, so every field is a smooth function of the
//! parameter.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::reps::{
    anosov_certificate, GridGeometry, ParamGrid, RepPoint, WeightFunctional, DEFAULT_C_MAX,
    DEFAULT_MU_MIN,
};
use crate::spectrum::{exponent_dirichlet, intersection, ClassSpectrum};
use crate::{Error, Result};

/// Relative residuals below this value pass.
pub const PLURIHARMONIC_TOL: f64 = 0.05;
pub const IDENTITY_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    S,
    T,
}

impl Axis {
    fn offset(self, r: i64) -> (i64, i64) {
        match self {
            Axis::S => (r, 0),
            Axis::T => (0, r),
        }
    }

    fn half(self, g: &GridGeometry) -> i64 {
        match self {
            Axis::S => g.half_s(),
            Axis::T => g.half_t(),
        }
    }

    fn step(self, g: &GridGeometry) -> f64 {
        match self {
            Axis::S => g.ds,
            Axis::T => g.dt,
        }
    }
}

/// What a field holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldTag {
    Exponent { functional: String },
    Intersection { functional: String },
    Renormalized { functional: String },
    Period { functional: String, class: String },
    Custom { name: String },
}

/// One real value per grid node; `NaN` marks nodes that were not evaluated.
#[derive(Clone, Debug, Serialize)]
pub struct ScalarField {
    geometry: GridGeometry,
    values: Vec<f64>,
    tag: FieldTag,
}

impl ScalarField {
    pub fn new(geometry: GridGeometry, values: Vec<f64>, tag: FieldTag) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {} x {} grid",
                values.len(),
                geometry.ns,
                geometry.nt
            )));
        }
        Ok(ScalarField {
            geometry,
            values,
            tag,
        })
    }

    /// Samples `f(s, t)` at the node coordinates.
    pub fn from_fn(geometry: GridGeometry, tag: FieldTag, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..geometry.len())
            .map(|i| {
                let (is, it) = geometry.offsets(i);
                let z = geometry.z(is, it);
                f(z.re, z.im)
            })
            .collect();
        ScalarField {
            geometry,
            values,
            tag,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tag(&self) -> &FieldTag {
        &self.tag
    }

    pub fn get(&self, is: i64, it: i64) -> Option<f64> {
        self.geometry.index(is, it).map(|i| self.values[i])
    }

    fn at(&self, is: i64, it: i64) -> Result<f64> {
        match self.get(is, it) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Undefined(format!(
                "field has no finite value at node (is={is}, it={it})"
            ))),
        }
    }

    /// `is,it,s,t,value` per evaluated node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "is,it,s,t,value")?;
        for (i, v) in self.values.iter().enumerate() {
            let (is, it) = self.geometry.offsets(i);
            let z = self.geometry.z(is, it);
            writeln!(w, "{is},{it},{:.16e},{:.16e},{v:.16e}", z.re, z.im)?;
        }
        Ok(())
    }
}

/// Derivatives at the centre node.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Hessian {
    pub s: f64,
    pub t: f64,
    pub ss: f64,
    pub tt: f64,
    /// Absent when a corner node was not evaluated.
    pub st: Option<f64>,
    /// Both rings combined by Richardson extrapolation.
    pub richardson: bool,
}

impl Hessian {
    pub fn laplacian(&self) -> f64 {
        self.ss + self.tt
    }
}

fn richardson(d1: f64, d2: Option<f64>) -> f64 {
    match d2 {
        Some(d2) => (4.0 * d1 - d2) / 3.0,
        None => d1,
    }
}

/// First and second central differences at the centre along `axis`.
pub fn axis_derivatives(f: &ScalarField, axis: Axis) -> Result<(f64, f64)> {
    let g = &f.geometry;
    let half = axis.half(g);
    if half < 1 {
        return Err(Error::InvalidGrid(format!(
            "{axis:?} axis needs at least 3 nodes"
        )));
    }
    let h = axis.step(g);
    let ring = |r: i64| -> Result<(f64, f64)> {
        let (a, b) = axis.offset(r);
        let (p, m) = (f.at(a, b)?, f.at(-a, -b)?);
        let c = f.at(0, 0)?;
        let rh = r as f64 * h;
        Ok(((p - m) / (2.0 * rh), (p - 2.0 * c + m) / (rh * rh)))
    };
    let (d1, s1) = ring(1)?;
    let outer = if half >= 2 { Some(ring(2)?) } else { None };
    Ok((
        richardson(d1, outer.map(|o| o.0)),
        richardson(s1, outer.map(|o| o.1)),
    ))
}

fn mixed(f: &ScalarField, r: i64) -> Option<f64> {
    let g = &f.geometry;
    let v = |a, b| f.get(a, b).filter(|x| x.is_finite());
    let s = v(r, r)? - v(r, -r)? - v(-r, r)? + v(-r, -r)?;
    Some(s / (4.0 * (r * r) as f64 * g.ds * g.dt))
}

/// Central differences at the centre; stencils use the two innermost rings
/// with Richardson extrapolation when the grid is at least `5 x 5`.
pub fn hessian_grid(f: &ScalarField) -> Result<Hessian> {
    let g = &f.geometry;
    if g.ns < 3 || g.nt < 3 {
        return Err(Error::InvalidGrid(format!(
            "Hessian needs a 3 x 3 grid, got {} x {}",
            g.ns, g.nt
        )));
    }
    let (s, ss) = axis_derivatives(f, Axis::S)?;
    let (t, tt) = axis_derivatives(f, Axis::T)?;
    let both = g.half_s() >= 2 && g.half_t() >= 2;
    let st = mixed(f, 1).map(|m1| richardson(m1, if both { mixed(f, 2) } else { None }));
    Ok(Hessian {
        s,
        t,
        ss,
        tt,
        st,
        richardson: both,
    })
}

/// Truncation and certification settings for grid computations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalculusSettings {
    /// Core length of the class table behind intersection numbers.
    pub class_len: usize,
    /// Word length of the Dirichlet shells behind exponents.
    pub element_len: usize,
    /// Word length of the Anosov certificate at the centre.
    pub certify_len: usize,
    /// Absolute floor of relative residuals.
    pub floor: f64,
    /// Copy `t >= 0` nodes to their mirror images on conjugation-symmetric
    /// grids instead of evaluating them.
    pub mirror: bool,
}

impl Default for CalculusSettings {
    fn default() -> Self {
        CalculusSettings {
            class_len: 14,
            element_len: 11,
            certify_len: 8,
            floor: 1e-6,
            mirror: true,
        }
    }
}

/// Nodes to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    Axis(Axis),
    Cross,
    Full,
}

impl Stencil {
    fn contains(self, is: i64, it: i64) -> bool {
        match self {
            Stencil::Axis(Axis::S) => it == 0,
            Stencil::Axis(Axis::T) => is == 0,
            Stencil::Cross => is == 0 || it == 0,
            Stencil::Full => true,
        }
    }
}

/// Exponent, intersection and renormalized intersection fields of a grid,
/// all relative to the centre node.
#[derive(Clone, Debug, Serialize)]
pub struct GridFields {
    pub h: ScalarField,
    pub intersection: ScalarField,
    pub renormalized: ScalarField,
    /// Renormalized intersection from each orbit window separately.
    pub window_renormalized: Vec<ScalarField>,
    pub h0: f64,
    /// Period horizon of the class table.
    pub horizon: f64,
    pub classes: usize,
    #[serde(skip)]
    table: ClassSpectrum,
    #[serde(skip)]
    columns: Vec<Option<usize>>,
}

fn certify_center(grid: &ParamGrid, phi: &WeightFunctional, s: &CalculusSettings) -> Result<()> {
    let c = anosov_certificate(
        grid.center(),
        phi,
        s.certify_len,
        DEFAULT_MU_MIN,
        DEFAULT_C_MAX,
    )?;
    if !c.pass {
        return Err(Error::Undefined(format!(
            "centre not certified for {}: slope {:.3e}, constant {:.3e}",
            phi.name(),
            c.mu_hat,
            c.c_hat
        )));
    }
    Ok(())
}

/// Evaluates the fields on the nodes of `stencil`.
pub fn grid_fields(
    grid: &ParamGrid,
    phi: &WeightFunctional,
    stencil: Stencil,
    settings: &CalculusSettings,
) -> Result<GridFields> {
    let geo = *grid.geometry();
    certify_center(grid, phi, settings)?;
    let mirror = settings.mirror && grid.is_conj_symmetric();
    // node index -> position in the list of evaluated representations
    let mut columns: Vec<Option<usize>> = vec![None; geo.len()];
    let mut reps: Vec<&RepPoint> = vec![grid.center()];
    columns[geo.index(0, 0).unwrap()] = Some(0);
    for (i, slot) in columns.iter_mut().enumerate() {
        let (is, it) = geo.offsets(i);
        if (is, it) == (0, 0) || !stencil.contains(is, it) || (mirror && it < 0) {
            continue;
        }
        *slot = Some(reps.len());
        reps.push(grid.node(is, it).unwrap());
    }
    if mirror {
        for i in 0..geo.len() {
            let (is, it) = geo.offsets(i);
            if it < 0 && stencil.contains(is, it) {
                columns[i] = columns[geo.index(is, -it).unwrap()];
            }
        }
    }
    let hs = reps
        .par_iter()
        .map(|r| Ok(exponent_dirichlet(r, phi, settings.element_len)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let cols: Vec<(usize, WeightFunctional)> = (0..reps.len()).map(|j| (j, phi.clone())).collect();
    let table = ClassSpectrum::build(&reps, &cols, settings.class_len)?;
    let h0 = hs[0];
    let per_rep = (0..reps.len())
        .into_par_iter()
        .map(|j| {
            intersection(&table, &table.column(j), h0).map_err(|e| {
                Error::Undefined(format!("intersection at node {}: {e}", reps[j].param()))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let nw = per_rep[0].windows.len();
    let name = phi.name().to_string();
    let fill = |f: &dyn Fn(usize) -> f64| -> Vec<f64> {
        columns
            .iter()
            .map(|c| c.map_or(f64::NAN, f))
            .collect::<Vec<f64>>()
    };
    let field = |v: Vec<f64>, tag: FieldTag| ScalarField {
        geometry: geo,
        values: v,
        tag,
    };
    let window_renormalized = (0..nw)
        .map(|w| {
            field(
                fill(&|j| hs[j] / h0 * per_rep[j].windows[w].value),
                FieldTag::Renormalized {
                    functional: name.clone(),
                },
            )
        })
        .collect();
    Ok(GridFields {
        h: field(
            fill(&|j| hs[j]),
            FieldTag::Exponent {
                functional: name.clone(),
            },
        ),
        intersection: field(
            fill(&|j| per_rep[j].value),
            FieldTag::Intersection {
                functional: name.clone(),
            },
        ),
        renormalized: field(
            fill(&|j| hs[j] / h0 * per_rep[j].value),
            FieldTag::Renormalized {
                functional: name.clone(),
            },
        ),
        window_renormalized,
        h0,
        horizon: table.t_complete(),
        classes: table.count_le(table.t_complete()),
        table,
        columns,
    })
}

impl GridFields {
    /// `phi`-period of class row `row` of the centre table at every node.
    pub fn period_field(&self, row: usize) -> ScalarField {
        let values = self
            .columns
            .iter()
            .map(|c| c.map_or(f64::NAN, |j| self.table.value(row, j)))
            .collect();
        let functional = match self.h.tag() {
            FieldTag::Exponent { functional } => functional.clone(),
            _ => String::new(),
        };
        ScalarField {
            geometry: self.h.geometry,
            values,
            tag: FieldTag::Period {
                functional,
                class: self.table.class(row).to_string(),
            },
        }
    }

    pub fn table(&self) -> &ClassSpectrum {
        &self.table
    }

    /// Second derivative of the renormalized intersection along `axis`,
    /// with the spread over orbit windows as uncertainty.
    pub fn pressure(&self, axis: Axis) -> Result<PressureForm> {
        let value = axis_derivatives(&self.renormalized, axis)?.1;
        let windows = self
            .window_renormalized
            .iter()
            .map(|f| Ok(axis_derivatives(f, axis)?.1))
            .collect::<Result<Vec<f64>>>()?;
        let hi = windows.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = windows.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(PressureForm {
            axis,
            value,
            uncertainty: hi - lo,
            windows,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureForm {
    pub axis: Axis,
    pub value: f64,
    pub uncertainty: f64,
    pub windows: Vec<f64>,
}

/// Second derivative at the centre of `tau -> J(rho_0, rho_tau)` along `axis`.
pub fn pressure_form(
    grid: &ParamGrid,
    phi: &WeightFunctional,
    axis: Axis,
    settings: &CalculusSettings,
) -> Result<PressureForm> {
    grid_fields(grid, phi, Stencil::Axis(axis), settings)?.pressure(axis)
}

#[derive(Clone, Debug, Serialize)]
pub struct Pluriharmonicity {
    /// `|I_ss + I_tt| / max(|I_ss|, |I_tt|, floor)`
    pub value: f64,
    pub i_ss: f64,
    pub i_tt: f64,
    pub holomorphic: bool,
    /// Set when the grid is not holomorphic or the residual exceeds
    /// [`PLURIHARMONIC_TOL`].
    pub flagged: bool,
}

fn relative(num: f64, scale: &[f64], floor: f64) -> f64 {
    num.abs() / scale.iter().fold(floor, |m, x| m.max(x.abs()))
}

fn pluriharmonicity_of(fields: &GridFields, holomorphic: bool, floor: f64) -> Result<Pluriharmonicity> {
    let (_, i_ss) = axis_derivatives(&fields.intersection, Axis::S)?;
    let (_, i_tt) = axis_derivatives(&fields.intersection, Axis::T)?;
    let value = relative(i_ss + i_tt, &[i_ss, i_tt], floor);
    Ok(Pluriharmonicity {
        value,
        i_ss,
        i_tt,
        holomorphic,
        flagged: !holomorphic || !(value < PLURIHARMONIC_TOL),
    })
}

/// Normalized Laplacian of `z -> I(rho_0, rho_z)` at the centre.
pub fn pluriharmonicity_residual(
    grid: &ParamGrid,
    phi: &WeightFunctional,
    settings: &CalculusSettings,
) -> Result<Pluriharmonicity> {
    let fields = grid_fields(grid, phi, Stencil::Cross, settings)?;
    pluriharmonicity_of(&fields, grid.is_holomorphic(), settings.floor)
}

/// Ingredients and residual of `h_tt = h_0 P(d_s) - h_ss + 2 h_s^2 / h_0`.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub functional: String,
    pub settings: CalculusSettings,
    pub geometry: GridGeometry,
    pub h0: f64,
    pub h_s: f64,
    pub h_t: f64,
    pub h_ss: f64,
    pub h_tt: f64,
    pub pressure_s: PressureForm,
    pub pressure_t: PressureForm,
    pub pluriharmonicity: Pluriharmonicity,
    /// Smallest renormalized intersection over the evaluated nodes.
    pub j_min: f64,
    /// `h_0 P(d_s) - h_ss + 2 h_s^2 / h_0`
    pub rhs: f64,
    pub residual: f64,
    pub pass: bool,
    /// `h_tt >= h_0 P(d_s) - h_ss - tol`
    pub sign_consistent: bool,
    /// `|h_s| ds <= 0.1 h_0`
    pub trusted: bool,
    pub horizon: f64,
    pub classes: usize,
    pub h_field: ScalarField,
}

impl IdentityReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Checks the curvature identity at the real centre of a
/// conjugation-symmetric holomorphic grid.
pub fn master_identity_check(
    grid: &ParamGrid,
    phi: &WeightFunctional,
    settings: &CalculusSettings,
) -> Result<IdentityReport> {
    if !grid.is_conj_symmetric() || !grid.is_holomorphic() {
        return Err(Error::InvalidGrid(
            "identity check needs a holomorphic, conjugation-symmetric grid".into(),
        ));
    }
    let fields = grid_fields(grid, phi, Stencil::Cross, settings)?;
    let geo = *grid.geometry();
    let h0 = fields.h0;
    let (h_s, h_ss) = axis_derivatives(&fields.h, Axis::S)?;
    let (h_t, h_tt) = axis_derivatives(&fields.h, Axis::T)?;
    if settings.mirror && h_t != 0.0 {
        return Err(Error::Undefined(format!(
            "mirrored field has t-derivative {h_t:e}"
        )));
    }
    let pressure_s = fields.pressure(Axis::S)?;
    let pressure_t = fields.pressure(Axis::T)?;
    let pluriharmonicity = pluriharmonicity_of(&fields, true, settings.floor)?;
    let p = pressure_s.value;
    let rhs = h0 * p - h_ss + 2.0 * h_s * h_s / h0;
    let residual = relative(h_tt - rhs, &[h_tt, h0 * p, h_ss], settings.floor);
    let tol = IDENTITY_TOL * [h_tt, h0 * p, h_ss, settings.floor]
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(IdentityReport {
        functional: phi.name().to_string(),
        settings: settings.clone(),
        geometry: geo,
        h0,
        h_s,
        h_t,
        h_ss,
        h_tt,
        pressure_s,
        pressure_t,
        pluriharmonicity,
        j_min: fields
            .renormalized
            .values()
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min),
        rhs,
        residual,
        pass: residual < IDENTITY_TOL,
        sign_consistent: h_tt >= h0 * p - h_ss - tol,
        trusted: h_s.abs() * geo.ds <= 0.1 * h0,
        horizon: fields.horizon,
        classes: fields.classes,
        h_field: fields.h,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DegenerateCheck {
    pub axis: Axis,
    /// `max |d/d tau (h * period)|` over the sampled classes.
    pub max: f64,
    /// `(class, derivative)`
    pub derivatives: Vec<(String, f64)>,
}

/// Derivative along `axis` of `h(rho_tau) * period(rho_tau, c)` for
/// `sample` classes spread evenly through the centre table.
pub fn degenerate_direction_check(
    grid: &ParamGrid,
    phi: &WeightFunctional,
    axis: Axis,
    sample: usize,
    settings: &CalculusSettings,
) -> Result<DegenerateCheck> {
    if sample == 0 {
        return Err(Error::OutOfRange("sample at least one class".into()));
    }
    let fields = grid_fields(grid, phi, Stencil::Axis(axis), settings)?;
    let n = fields.classes;
    let rows: Vec<usize> = (0..sample.min(n))
        .map(|k| k * n / sample.min(n))
        .collect();
    let mut derivatives = Vec::with_capacity(rows.len());
    for row in rows {
        let p = fields.period_field(row);
        let prod = ScalarField {
            values: p
                .values
                .iter()
                .zip(fields.h.values())
                .map(|(a, b)| a * b)
                .collect(),
            ..p
        };
        let (d, _) = axis_derivatives(&prod, axis)?;
        derivatives.push((fields.table.class(row).to_string(), d));
    }
    Ok(DegenerateCheck {
        axis,
        max: derivatives.iter().map(|d| d.1.abs()).fold(0.0, f64::max),
        derivatives,
    })
}

#[cfg(test)]
#[path = "calculus_tests.rs"]
mod tests;
