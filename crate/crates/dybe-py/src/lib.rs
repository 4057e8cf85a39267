use pyo3::prelude::*;

#[pymodule]
fn dybe_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
