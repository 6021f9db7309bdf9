"""Smoke test for the `szego` extension module.

Build and install first, e.g. `pip install ./crates/py` (needs maturin), then run
`python python/smoke_test.py`.
"""

import json
import math
import sys
import tempfile

import szego


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    r = 0.25
    u = szego.FourierSymbol.double_pole(math.sqrt(r), n=128)
    rep = szego.conservation_report(u)
    q_expected = (1 + r) / (1 - r) ** 3
    results.append(check("mass closed form", abs(rep["q"] - q_expected) < 1e-10 * q_expected, f"Q={rep['q']:.12f}"))

    l1 = rep["ells"][0][1]
    r_star = 3 * math.sqrt(2) - 4
    left = szego.conservation_report(szego.FourierSymbol.double_pole(math.sqrt(r_star - 0.01)))["ells"][0][1]
    right = szego.conservation_report(szego.FourierSymbol.double_pole(math.sqrt(r_star + 0.01)))["ells"][0][1]
    results.append(check("l1 changes sign across 3*sqrt(2)-4", left * right < 0, f"l1(0.25)={l1:.3e}"))

    v = szego.FourierSymbol.random(6, seed=7)
    worst = max(res for _, res in szego.identity_suite(v))
    results.append(check("identity suite on V(6)", worst < 1e-8, f"max residual {worst:.1e}"))
    rt = szego.roundtrip(v)
    results.append(check("inverse roundtrip", rt < 1e-7, f"{rt:.1e}"))

    w = szego.FourierSymbol.resonant_v4(0.4)
    traj = szego.integrate(w, 2.0, sample_dt=0.05, pole_class=4)
    drift = max(d for _, d in traj.drift())
    results.append(check("conservation along the flow", drift < 1e-8, f"max drift {drift:.1e}"))
    cf = szego.v4_closed_form(w)
    results.append(check("closed-form rate", abs(cf["tau"] - 0.4) < 1e-12, f"tau={cf['tau']:.6f}"))

    val, scale = szego.bracket(szego.FourierSymbol.random(4, seed=2), "ell_1", "sigma2_2")
    results.append(check("{ell_1, sigma2_2} vanishes", abs(val) <= 1e-5 * scale, f"normalized {val / scale:.1e}"))

    try:
        szego.FourierSymbol.from_rational([1.0], [1.0, -2.0])
        results.append(check("pole inside the disc is rejected", False))
    except szego.SzegoError as e:
        results.append(check("pole inside the disc is rejected", True, str(e).split(":")[0]))

    with tempfile.TemporaryDirectory() as out:
        code, report = szego.run_scenario(json.dumps({"scenario": "v4_example_scan", "out_dir": out, "points": 21}))
        results.append(check("scenario run", code == 0 and report["passed"], f"exit {code}"))

    print(f"{sum(results)}/{len(results)} checks passed (szego {szego.__version__})")
    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
