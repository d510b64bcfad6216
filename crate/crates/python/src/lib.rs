use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use geomspec::audibility::{admissible_nu, classify_isospectral_partners, polysign_region_check};
use geomspec::cli::verify as verify_suite;
use geomspec::invariants::{
    b_invariants, closed_form_invariants, detect_regime, elementary_symmetric, heat_invariants, PiMultiple,
    RegimeTag,
};
use geomspec::milnor::{MilnorData, RicciEigenvalues};
use geomspec::rational::{format_rational, parse_rational, parse_triple};
use geomspec::spectra::{
    convergence_slope, distinctness_report, eigenvalue_f, eigenvalue_set, fundamental_tone, heat_expansion,
    quotient_volume, truncated_heat_trace, QuotientSpec, TranslationLength,
};
use geomspec::{GeomError, Rational};

create_exception!(pygeomspec, GeomspecError, PyException);

fn err(e: GeomError) -> PyErr {
    GeomspecError::new_err(format!("[{}] {}", e.code(), e))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, x: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(x).map_err(|e| GeomspecError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn triple(values: &Bound<'_, PyAny>) -> PyResult<[Rational; 3]> {
    let text = if let Ok(s) = values.extract::<String>() {
        s
    } else {
        let items: Vec<String> = values
            .try_iter()?
            .map(|x| x.and_then(|x| x.str().map(|s| s.to_string())))
            .collect::<PyResult<_>>()?;
        items.join(",")
    };
    parse_triple(&text).map_err(err)
}

fn rational(x: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&x.str()?.to_string()).map_err(err)
}

fn regime(r: Option<&str>) -> PyResult<Option<RegimeTag>> {
    r.map(str::parse).transpose().map_err(err)
}

type Row = (u64, u64, String, f64, Option<u64>);

fn volume(vol: &str) -> PyResult<PiMultiple> {
    vol.parse().map_err(err)
}

/// Left-invariant metric on a unimodular three-dimensional Lie group, given
/// either by Milnor structure constants or by its Ricci eigenvalues.
#[pyclass(frozen, skip_from_py_object, module = "pygeomspec")]
#[derive(Clone)]
struct Metric {
    lambda: Option<MilnorData>,
    nu: RicciEigenvalues,
}

#[pymethods]
impl Metric {
    #[staticmethod]
    fn from_lambda(lambda: &Bound<'_, PyAny>) -> PyResult<Self> {
        let m = MilnorData::new(triple(lambda)?);
        Ok(Metric { nu: m.ricci(), lambda: Some(m) })
    }

    #[staticmethod]
    fn from_nu(nu: &Bound<'_, PyAny>) -> PyResult<Self> {
        Ok(Metric { lambda: None, nu: RicciEigenvalues::new(triple(nu)?) })
    }

    #[getter]
    fn nu(&self) -> Vec<String> {
        self.nu.nu.iter().map(format_rational).collect()
    }

    #[getter]
    fn lambda_(&self) -> Option<Vec<String>> {
        self.lambda.as_ref().map(|m| m.lambda.iter().map(format_rational).collect())
    }

    #[getter]
    fn group(&self) -> Option<String> {
        self.lambda.as_ref().map(|m| m.group().name().to_string())
    }

    #[getter]
    fn signature(&self) -> String {
        admissible_nu(&self.nu).signature
    }

    #[getter]
    fn admissible(&self) -> bool {
        admissible_nu(&self.nu).admissible
    }

    #[getter]
    fn regime(&self) -> &'static str {
        detect_regime(&self.nu).name()
    }

    fn elementary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &elementary_symmetric(&self.nu))
    }

    fn curvature<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &closed_form_invariants(&self.nu))
    }

    #[pyo3(signature = (vol = "1", regime = None))]
    fn heat_invariants<'py>(&self, py: Python<'py>, vol: &str, regime: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let tag = self::regime(regime)?.unwrap_or_else(|| detect_regime(&self.nu));
        to_py(py, &heat_invariants(&self.nu, &volume(vol)?, tag).map_err(err)?)
    }

    #[pyo3(signature = (vol = "1"))]
    fn b_invariants<'py>(&self, py: Python<'py>, vol: &str) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &b_invariants(&self.nu, &volume(vol)?))
    }

    #[pyo3(signature = (vol = "1", regime = None))]
    fn partners<'py>(&self, py: Python<'py>, vol: &str, regime: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
        let r = classify_isospectral_partners(&self.nu, &volume(vol)?, self::regime(regime)?).map_err(err)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        match &self.lambda {
            Some(m) => format!("Metric(lambda=({}), group={})", self.lambda_().unwrap_or_default().join(", "), m.group()),
            None => format!("Metric(nu={})", self.nu),
        }
    }
}

/// Quotient of S^2 x R from one of the four equal-curvature families.
#[pyclass(frozen, skip_from_py_object, module = "pygeomspec")]
#[derive(Clone)]
struct Quotient {
    spec: QuotientSpec,
}

#[pymethods]
impl Quotient {
    #[new]
    fn new(family: u8, k: &Bound<'_, PyAny>, v: &Bound<'_, PyAny>) -> PyResult<Self> {
        let v: TranslationLength = v.str()?.to_string().parse().map_err(err)?;
        Ok(Quotient { spec: QuotientSpec::new(family, rational(k)?, v).map_err(err)? })
    }

    #[getter]
    fn family(&self) -> u8 {
        self.spec.family
    }

    #[getter]
    fn k(&self) -> String {
        format_rational(&self.spec.k)
    }

    #[getter]
    fn v(&self) -> String {
        self.spec.v.to_string()
    }

    fn volume<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &quotient_volume(&self.spec))
    }

    /// Distinct eigenvalues up to `cutoff` as `(m, n, value, approx, multiplicity)`.
    fn spectrum(&self, cutoff: &Bound<'_, PyAny>) -> PyResult<Vec<Row>> {
        let set = eigenvalue_set(&self.spec, &rational(cutoff)?).map_err(err)?;
        Ok(set
            .entries
            .into_iter()
            .map(|e| (e.m, e.n, e.value.to_string(), e.approx, e.multiplicity))
            .collect())
    }

    fn fundamental_tone(&self) -> PyResult<(u64, u64, String, f64)> {
        let e = fundamental_tone(&self.spec).map_err(err)?;
        Ok((e.m, e.n, e.value.to_string(), e.approx))
    }

    #[pyo3(signature = (t, cutoff = None))]
    fn heat_trace(&self, t: f64, cutoff: Option<f64>) -> PyResult<f64> {
        truncated_heat_trace(&self.spec, t, cutoff.unwrap_or(60.0 / t)).map_err(err)
    }

    fn heat_expansion(&self, t: f64) -> PyResult<f64> {
        heat_expansion(&self.spec, t).map_err(err)
    }

    #[pyo3(signature = (t_min, t_max, points = 19))]
    fn convergence_slope<'py>(&self, py: Python<'py>, t_min: f64, t_max: f64, points: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &convergence_slope(&self.spec, t_min, t_max, points).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("Quotient(family={}, k={}, v={})", self.spec.family, self.k(), self.spec.v)
    }
}

/// `m(m+1)k + (pi/v)^2 n^2` as an exact string.
#[pyfunction]
fn eigenvalue(m: u64, n: u64, k: &Bound<'_, PyAny>, v: &str) -> PyResult<String> {
    let v: TranslationLength = v.parse().map_err(err)?;
    Ok(eigenvalue_f(m, n, &rational(k)?, &v).to_string())
}

#[pyfunction]
fn distinctness<'py>(py: Python<'py>, k: &Bound<'_, PyAny>, v: &str) -> PyResult<Bound<'py, PyAny>> {
    let v: TranslationLength = v.parse().map_err(err)?;
    to_py(py, &distinctness_report(&rational(k)?, &v).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (step = "1/100"))]
fn polysign_check<'py>(py: Python<'py>, step: &str) -> PyResult<Bound<'py, PyAny>> {
    let step = parse_rational(step).map_err(err)?;
    to_py(py, &polysign_region_check(&step).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (seed = 0, samples = 1000, polysign_step = "1/100"))]
fn verify<'py>(py: Python<'py>, seed: u64, samples: usize, polysign_step: &str) -> PyResult<Bound<'py, PyAny>> {
    let step = parse_rational(polysign_step).map_err(err)?;
    to_py(py, &verify_suite(seed, samples, &step).map_err(err)?)
}

#[pymodule]
fn pygeomspec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GeomspecError", m.py().get_type::<GeomspecError>())?;
    m.add_class::<Metric>()?;
    m.add_class::<Quotient>()?;
    m.add_function(wrap_pyfunction!(eigenvalue, m)?)?;
    m.add_function(wrap_pyfunction!(distinctness, m)?)?;
    m.add_function(wrap_pyfunction!(polysign_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
