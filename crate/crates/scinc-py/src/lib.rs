use pyo3::prelude::*;

#[pymodule]
fn scinc_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
