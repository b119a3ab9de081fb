use std::path::{Path, PathBuf};

use anosov_core::bowen::CloudMode;
use anosov_core::calculus::CalculusSettings;
use anosov_core::fixtures;
use anosov_core::reps::FamilyKind;
use serde::{Deserialize, Serialize};

/// A bundled fixture name or an explicit family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySpec {
    Named(String),
    Kind(FamilyKind),
}

impl FamilySpec {
    pub fn resolve(&self) -> Result<FamilyKind, String> {
        match self {
            FamilySpec::Named(n) => fixtures::by_name(n).ok_or_else(|| {
                let known: Vec<String> = fixtures::named().into_iter().map(|f| f.0).collect();
                format!("unknown fixture {n:?} (known: {})", known.join(", "))
            }),
            FamilySpec::Kind(k) => Ok(k.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpmSize {
    pub width: usize,
    pub height: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Growth against Dirichlet exponent.
    pub exponent: f64,
    /// Transfer operator against Dirichlet exponent.
    pub bowen: f64,
    /// Box counting against transfer operator.
    pub boxes: f64,
    /// Allowed defect in `J >= 1`.
    pub intersection: f64,
    /// `|P(t)| / |P(s)|`.
    pub degeneracy: f64,
    pub pluriharmonic: f64,
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            exponent: 2e-2,
            bowen: 1e-2,
            boxes: 5e-2,
            intersection: 1e-3,
            degeneracy: 0.05,
            pluriharmonic: 0.05,
            identity: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub family: FamilySpec,
    /// Comparison family of `intersect`; defaults to `family`.
    pub other: Option<FamilySpec>,
    /// Grid file for `pressure` and `verify identities`; otherwise a
    /// bending grid through `family` is built.
    pub grid: Option<PathBuf>,
    pub grid_step: f64,
    pub grid_half: usize,
    /// Maximal core length of class tables.
    pub max_len: usize,
    /// Maximal word length of Dirichlet shells.
    pub element_len: usize,
    pub functionals: Vec<String>,
    pub primitive_only: bool,
    /// Cylinder depth of the transfer operator.
    pub depth: usize,
    pub cloud_len: usize,
    pub cloud_mode: CloudMode,
    pub chart: Option<usize>,
    pub ppm: Option<PpmSize>,
    pub calculus: CalculusSettings,
    pub tolerances: Tolerances,
    #[serde(skip_serializing)]
    pub threads: Option<usize>,
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            family: FamilySpec::Named("schottky-symmetric".into()),
            other: None,
            grid: None,
            grid_step: fixtures::GRID_STEP,
            grid_half: fixtures::GRID_HALF,
            max_len: 12,
            element_len: 10,
            functionals: vec!["a1".into()],
            primitive_only: true,
            depth: 6,
            cloud_len: 10,
            cloud_mode: CloudMode::Rotations,
            chart: None,
            ppm: None,
            calculus: CalculusSettings::default(),
            tolerances: Tolerances::default(),
            threads: None,
            out: None,
        }
    }
}

fn range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<(), String> {
    if v < lo || v > hi {
        return Err(format!("{name} = {v} outside [{lo}, {hi}]"));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn validate(&self) -> Result<(), String> {
        self.family.resolve()?;
        if let Some(o) = &self.other {
            o.resolve()?;
        }
        range("max_len", self.max_len, 1, 20)?;
        range("element_len", self.element_len, 2, 16)?;
        range("depth", self.depth, 1, 9)?;
        range("cloud_len", self.cloud_len, 1, 16)?;
        range("grid_half", self.grid_half, 1, 4)?;
        range("grid_step", self.grid_step, 1e-6, 1.0)?;
        range("calculus.class_len", self.calculus.class_len, 2, 20)?;
        range("calculus.element_len", self.calculus.element_len, 2, 16)?;
        range("calculus.certify_len", self.calculus.certify_len, 2, 16)?;
        range("calculus.floor", self.calculus.floor, 0.0, 1.0)?;
        if let Some(t) = self.threads {
            range("threads", t, 1, 1024)?;
        }
        if let Some(p) = self.ppm {
            range("ppm.width", p.width, 1, 8192)?;
            range("ppm.height", p.height, 1, 8192)?;
        }
        if self.functionals.is_empty() {
            return Err("functionals must not be empty".into());
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("exponent", t.exponent),
            ("bowen", t.bowen),
            ("boxes", t.boxes),
            ("intersection", t.intersection),
            ("degeneracy", t.degeneracy),
            ("pluriharmonic", t.pluriharmonic),
            ("identity", t.identity),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}
