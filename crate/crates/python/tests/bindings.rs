use std::ffi::CString;
use std::sync::Once;

use pyo3::prelude::*;

static INIT: Once = Once::new();

fn python<R>(f: impl for<'py> FnOnce(Python<'py>) -> R) -> R {
    INIT.call_once(|| {
        pyo3::append_to_inittab!(ddchannel_py);
        Python::initialize();
    });
    Python::attach(f)
}

fn exec(code: &str) {
    python(|py| {
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python snippet failed");
        }
    })
}

use ddchannel_py::ddchannel_py;

#[test]
fn run_conserves_mass() {
    exec(
        r#"
import ddchannel_py as dd
d = dd.DensityPair.default_initial(80, 0.1, 0.1, 1.0)
c = dd.SolverConfig(1.0, 0.1, 0.2)
snaps = dd.run_until(d, c, [0.1, 0.2])
assert [s.time for s in snaps] == [0.1, 0.2]
p, m = snaps[-1].masses()
assert abs(p - 1) < 1e-8 and abs(m - 1) < 1e-8
assert snaps[-1].entropy() <= dd.entropy_bound(d.entropy(), 1.0, 0.2) + 1e-6
x, rho, kappa = snaps[-1].profiles()
assert len(x) == 81 and abs(kappa[-1] - 1) < 1e-10
"#,
    );
}

#[test]
fn errors_map_to_python_exceptions() {
    exec(
        r#"
import ddchannel_py as dd
for bad in (lambda: dd.Grid(2), lambda: dd.SolverConfig(1.0, -1.0, 1.0), lambda: dd.stationary_profile(0.0, 0.1, 40)):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
def boom(x, t):
    raise KeyError("inside")
try:
    dd.mean_value(boom, 1.0, 1.0, 0.5)
except KeyError:
    pass
else:
    raise AssertionError("callback error lost")
"#,
    );
}

#[test]
fn analysis_helpers() {
    exec(
        r#"
import math
import ddchannel_py as dd
assert abs(dd.mean_value(lambda x, t: x * x + 2 * t, 0.5, 1.0, 0.4) - 2.25) < 1e-9
assert abs(dd.longtime_displacement(1.0, 1.0) - (2 - 1 / math.tanh(1))) < 1e-12
assert dd.luxemburg_norm([1.0] * 50, 0.0, 0.01, "phi_star") <= -1 / math.log(0.01)
x, rho, kappa = dd.stationary_profile(1.0, 0.1, 100)
_, rho_b, kappa_b = dd.solve_stationary(1.0, 0.1, 100)
assert max(abs(a - b) for a, b in zip(kappa, kappa_b)) < 1e-8
"#,
    );
}
