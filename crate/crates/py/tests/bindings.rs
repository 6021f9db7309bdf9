use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let locals = PyDict::new(py);
        locals.set_item("szego", wrap_pymodule!(szego::szego)(py)).unwrap();
        if let Err(e) = py.run(code, None, Some(&locals)) {
            e.display(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn symbols_and_reports() {
    run(c"
u = szego.FourierSymbol.double_pole(0.5, n=128)
assert len(u) == 128
r = 0.25
rep = szego.conservation_report(u)
assert abs(rep['q'] - (1 + r) / (1 - r) ** 3) < 1e-12
assert len(rep['ells']) == 2
sd = szego.spectrum(u)
assert sd is not None
assert szego.numerical_ranks(u) == (2, 2)
assert max(v for _, v in szego.identity_suite(u)) < 1e-8
assert szego.roundtrip(u) < 1e-7
")
}

#[test]
fn errors_are_python_exceptions() {
    run(c"
try:
    szego.FourierSymbol([complex(float('nan'), 0.0)])
    raise AssertionError('expected failure')
except szego.SzegoError as e:
    assert 'NonFinite' in str(e) or 'finite' in str(e).lower(), str(e)
try:
    szego.evolve(szego.FourierSymbol([1j]), 1.0, field='generating')
    raise AssertionError('expected failure')
except ValueError:
    pass
");
}

#[test]
fn flows_and_brackets() {
    run(c"
u = szego.FourierSymbol.random(4, 3)
traj = szego.integrate(u, 0.2, sample_dt=0.05, rtol=1e-12)
assert len(traj) == 5
assert max(d for _, d in traj.drift()) < 1e-8
v = szego.evolve(traj.states[-1], -0.2, rtol=1e-12)
err = sum(abs(a - b) ** 2 for a, b in zip(u.coeffs, v.resized(len(u)).coeffs)) ** 0.5
assert err < 1e-8 * u.mass() ** 0.5, err
val, scale = szego.bracket(u, 'ell_1', 'ell_2')
assert abs(val) <= 1e-5 * scale
cf = szego.v4_closed_form(szego.FourierSymbol.resonant_v4(0.4))
assert abs(cf['tau'] - 0.4) < 1e-12
");
}
