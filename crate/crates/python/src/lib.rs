//! Python module `anosov_lab`: thin wrappers over anosov-core.

use anosov_core::bowen::{bowen_dimension as bowen, SchottkyData};
use anosov_core::calculus::{master_identity_check, CalculusSettings};
use anosov_core::reps::{anosov_certificate, DEFAULT_C_MAX, DEFAULT_MU_MIN};
use anosov_core::spectrum::{entropy_growth, exponent_dirichlet as dirichlet};
use anosov_core::{fixtures, matlin, ClassSpectrum, ProjMatrix, RepPoint, WeightFunctional, C64};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: anosov_core::Error) -> PyErr {
    match e {
        anosov_core::Error::Parse(m) => PyValueError::new_err(m),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<RepPoint> {
    fixtures::by_name(name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown fixture {name:?}")))?
        .build()
        .map_err(err)
}

fn functional(rep: &RepPoint, name: &str) -> PyResult<WeightFunctional> {
    WeightFunctional::parse(rep.dim(), name).map_err(err)
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<ProjMatrix> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    let e = rows.into_iter().flatten().map(|z| C64::new(z.re, z.im)).collect();
    ProjMatrix::new(d, e).map_err(err)
}

/// Names of the built-in fixtures.
#[pyfunction]
fn fixture_names() -> Vec<String> {
    fixtures::named().into_iter().map(|(n, _)| n).collect()
}

/// Mean-zero log singular values, decreasing.
#[pyfunction]
fn cartan(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    Ok(matlin::cartan(&matrix(rows)?).coords().to_vec())
}

/// Mean-zero log eigenvalue moduli, decreasing.
#[pyfunction]
fn jordan(rows: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    Ok(matlin::jordan(&matrix(rows)?).map_err(err)?.coords().to_vec())
}

#[pyfunction]
#[pyo3(signature = (name, phi = "a1", max_len = 10))]
fn exponent_dirichlet(name: &str, phi: &str, max_len: usize) -> PyResult<f64> {
    let rep = family(name)?;
    let phi = functional(&rep, phi)?;
    Ok(dirichlet(&rep, &phi, max_len).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (name, phi = "a1", max_len = 12))]
fn exponent_growth(name: &str, phi: &str, max_len: usize) -> PyResult<f64> {
    let rep = family(name)?;
    let phi = functional(&rep, phi)?;
    let spec = ClassSpectrum::single(&rep, &phi, max_len).map_err(err)?;
    Ok(entropy_growth(&spec).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (name, depth = 6))]
fn bowen_dimension(name: &str, depth: usize) -> PyResult<f64> {
    let sch = SchottkyData::from_rep(&family(name)?).map_err(err)?;
    Ok(bowen(&sch, depth, 1e-10).map_err(err)?.value)
}

#[pyfunction]
#[pyo3(signature = (name, phi = "a1", max_len = 8))]
fn certified(name: &str, phi: &str, max_len: usize) -> PyResult<bool> {
    let rep = family(name)?;
    let phi = functional(&rep, phi)?;
    Ok(anosov_certificate(&rep, &phi, max_len, DEFAULT_MU_MIN, DEFAULT_C_MAX)
        .map_err(err)?
        .pass)
}

/// Curvature identity report on a bending grid as a JSON string.
#[pyfunction]
#[pyo3(signature = (step = 0.1, half = 2, class_len = 12, element_len = 10, lifted = false))]
fn identity_report(
    step: f64,
    half: usize,
    class_len: usize,
    element_len: usize,
    lifted: bool,
) -> PyResult<String> {
    let grid = if lifted {
        fixtures::sym3_bending_grid(step, half)
    } else {
        fixtures::bending_grid(step, half)
    }
    .map_err(err)?;
    let settings = CalculusSettings {
        class_len,
        element_len,
        ..Default::default()
    };
    let phi = WeightFunctional::root(grid.dim(), 1).map_err(err)?;
    master_identity_check(&grid, &phi, &settings)
        .and_then(|r| r.to_json())
        .map_err(err)
}

#[pymodule]
fn anosov_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(cartan, m)?)?;
    m.add_function(wrap_pyfunction!(jordan, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_dirichlet, m)?)?;
    m.add_function(wrap_pyfunction!(exponent_growth, m)?)?;
    m.add_function(wrap_pyfunction!(bowen_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(certified, m)?)?;
    m.add_function(wrap_pyfunction!(identity_report, m)?)?;
    Ok(())
}
