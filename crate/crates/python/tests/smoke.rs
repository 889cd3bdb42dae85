use std::ffi::CString;
use std::path::PathBuf;

use minebench_py::minebench_py;
use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn python_smoke_script_passes() {
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    let code = std::fs::read_to_string(&script).unwrap();
    pyo3::append_to_inittab!(minebench_py);
    Python::initialize();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "__main__").unwrap();
        globals.set_item("__file__", script.canonicalize().unwrap()).unwrap();
        if let Err(e) = py.run(&CString::new(code).unwrap(), Some(&globals), None) {
            e.print(py);
            panic!("smoke script failed: {e}");
        }
    });
}
