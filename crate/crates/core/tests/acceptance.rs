//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use szego_core::cli::{locate_resonance, v3_resonance_defect};
use szego_core::conservation::{self, generating_f};
use szego_core::flow::{self, Field, IntegrateOptions, Trajectory, BOUNDED_SLOPE};
use szego_core::hankel::{self, alternation_check, interlacement_check};
use szego_core::symbol::{rational_to_fourier_auto, FourierSymbol, RationalSymbol};
use szego_core::{corpus, inverse, linalg, poisson, Result, C64};

const SEED: u64 = 1;

type Outcome = Result<(bool, String)>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn opts(sample_dt: f64, pole_class: Option<usize>) -> IntegrateOptions {
    IntegrateOptions { sample_dt, pole_class, ..IntegrateOptions::default() }
}

/// Rescaled so that `ρ₁ = 1`.
fn normalized(u: &FourierSymbol) -> FourierSymbol {
    let rho1 = linalg::hankel_svd(u.coeffs(), linalg::RANK_FLOOR).values[0];
    u.scaled(c(1.0 / rho1, 0.0))
}

fn double_pole(r: f64) -> Result<FourierSymbol> {
    let u = rational_to_fourier_auto(&RationalSymbol::double_pole(c(r.sqrt(), 0.0)))?;
    let n = u.len().max(128);
    Ok(u.resized(n))
}

fn example_closed_forms() -> Outcome {
    let (mut wq, mut wj, mut ws) = (0f64, 0f64, 0f64);
    for r in [0.1, 0.25, 0.24264] {
        let u = double_pole(r)?;
        let q = conservation::mass(&u);
        let j2 = conservation::j_factor(&u).norm_sqr();
        wq = wq.max(rel(q, (1.0 + r) / (1.0 - r).powi(3)));
        wj = wj.max(rel(j2 / (q * q), 4.0 * r / (1.0 - r).powi(4)));
        let disc = (1.0 + 6.0 * r + r * r).sqrt();
        let den = 2.0 * (1.0 - r).powi(4);
        let base = 1.0 + 4.0 * r + r * r;
        let expect = [(base + (1.0 + r) * disc) / den, (base - (1.0 + r) * disc) / den];
        let sig = hankel::spectrum(&u)?.sigma2();
        if sig.len() != 2 {
            return Ok((false, format!("r={r}: {} K-values", sig.len())));
        }
        ws = ws.max(rel(sig[0], expect[0]).max(rel(sig[1], expect[1])));
    }
    Ok((wq <= 1e-10 && wj <= 1e-10 && ws <= 1e-9, format!("Q {wq:.1e}, |J|²/Q² {wj:.1e}, σ² {ws:.1e}")))
}

fn resonance_location() -> Outcome {
    let pts = 101;
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..pts {
        let r = 0.2 + 0.1 * i as f64 / (pts - 1) as f64;
        let l1 = conservation::report(&double_pole(r)?)?.ells[0].1;
        if let Some((r0, l0)) = prev {
            if (l0 > 0.0) != (l1 > 0.0) {
                let root = locate_resonance(r0, r)?;
                let err = (root - (3.0 * 2f64.sqrt() - 4.0)).abs();
                return Ok((err < 1e-6, format!("r* = {root:.12}, error {err:.1e}")));
            }
        }
        prev = Some((r, l1));
    }
    Ok((false, "no sign change of ℓ₁ on [0.2, 0.3]".into()))
}

fn conservation_drift(traj: &Trajectory) -> Outcome {
    let d = flow::drift(traj);
    let worst = d.entries.iter().max_by(|a, b| a.1.total_cmp(&b.1)).cloned().unwrap_or_default();
    Ok((worst.1 <= 1e-7, format!("max drift {:.1e} ({}), {} samples", worst.1, worst.0, traj.times.len())))
}

fn closed_form_profile(traj: &Trajectory) -> Outcome {
    let cf = flow::v4_closed_form(&traj.states[0])?;
    let worst = traj
        .times
        .iter()
        .zip(&traj.reports)
        .filter(|(t, _)| **t <= 6.0 + 1e-12)
        .map(|(t, r)| rel(r.u_norms2[0], cf.u1_norm2(*t)))
        .fold(0.0, f64::max);
    Ok((worst <= 1e-4, format!("τ = {:.4}, max relative error {worst:.1e}", cf.tau)))
}

fn growth_structure(traj: &Trajectory) -> Outcome {
    let g = flow::growth_and_poles(traj, &[1.0, 2.0])?;
    let (s1, s2) = (g.sobolev[0].1, g.sobolev[1].1);
    let ratio = s2 / s1;
    let pole = g.escaping.map(|e| g.poles[e].0);
    let pole_err = pole.map_or(f64::INFINITY, |p| (p + s1).abs() / s1);
    let ctrl = rational_to_fourier_auto(&RationalSymbol::double_pole(c(0.1f64.sqrt(), 0.0)))?;
    let ct = flow::integrate(&ctrl, Field::Hamiltonian, 100.0, &IntegrateOptions { s_list: vec![1.0], ..opts(0.1, None) })?;
    let cs = flow::growth_and_poles(&ct, &[1.0])?.sobolev[0].1;
    let ok = s1 > 0.0 && s2 > 0.0 && (ratio / 3.0 - 1.0).abs() <= 0.10 && pole_err <= 0.15 && cs.abs() < BOUNDED_SLOPE;
    Ok((
        ok,
        format!(
            "slopes {s1:.4}/{s2:.4} (ratio {ratio:.3}), pole slope {:.4} (mismatch {pole_err:.1e}), control slope {cs:.1e}",
            pole.unwrap_or(f64::NAN)
        ),
    ))
}

fn identity_corpus() -> Result<Vec<corpus::Sample>> {
    corpus::corpus(SEED, &[4, 6], 25)
}

fn generating_identity(samples: &[corpus::Sample]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for s in samples {
        let sd = hankel::spectrum(&s.u)?;
        let grid = conservation::default_x_grid(&sd);
        points = grid.len();
        worst = worst.max(conservation::identity_suite(&s.u, &grid)?.get("generating").unwrap_or(f64::INFINITY));
    }
    Ok((worst <= 1e-8, format!("{} symbols × {points} points, max residual {worst:.1e}", samples.len())))
}

fn resolvent_suite(samples: &[corpus::Sample]) -> Outcome {
    let names = ["lien_res", "kj", "kj2", "resolvante_k"];
    let mut worst = [0f64; 4];
    for s in samples {
        let rep = conservation::identity_suite(&s.u, &[])?;
        for (w, n) in worst.iter_mut().zip(names) {
            *w = w.max(rep.get(n).unwrap_or(f64::INFINITY));
        }
    }
    let max = worst.iter().cloned().fold(0.0, f64::max);
    let detail = names.iter().zip(worst).map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    Ok((max <= 1e-8, detail))
}

fn involution() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for s in corpus::corpus(SEED, &[4], 20)? {
        let rep = poisson::involution_report(&s.u)?;
        worst = worst.max(rep.max_normalized_entry);
        let fs: Vec<&String> = rep.labels.iter().filter(|l| l.starts_with('F')).collect();
        for (i, a) in fs.iter().enumerate() {
            for b in &fs[i + 1..] {
                worst_f = worst_f.max(rep.get(a, b).unwrap_or(f64::INFINITY).abs() / rep.scale);
            }
        }
    }
    Ok((worst <= 1e-5 && worst_f <= 1e-5, format!("max normalized bracket {worst:.1e}, ℱ pairs {worst_f:.1e}")))
}

fn bracket_lemmas() -> Outcome {
    let mut worst: Vec<(String, f64)> = Vec::new();
    for s in corpus::corpus(SEED + 1, &[4], 10)? {
        let u = normalized(&s.u);
        for l in poisson::bracket_lemma_checks(&u, -0.3, 0.2)? {
            match worst.iter_mut().find(|w| w.0 == l.name) {
                Some(w) => w.1 = w.1.max(l.residual),
                None => worst.push((l.name.clone(), l.residual)),
            }
        }
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst.iter().map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    Ok((max <= 1e-4, detail))
}

fn generating_flow() -> Outcome {
    let s = corpus::corpus(SEED + 2, &[4], 1)?.remove(0);
    let u = normalized(&s.u);
    let traj = flow::integrate(&u, Field::Generating { x: -0.5 }, 1.0, &opts(0.05, None))?;
    let d = flow::drift(&traj);
    let sig = d.entries.iter().filter(|e| e.0.starts_with("sigma2_")).map(|e| e.1).fold(0.0, f64::max);
    let f0 = generating_f(&traj.states[0], 0.2)?;
    let mut fd: f64 = 0.0;
    for st in &traj.states {
        fd = fd.max(rel(generating_f(st, 0.2)?, f0));
    }
    Ok((sig <= 1e-8 && fd <= 1e-6, format!("σ² drift {sig:.1e}, ℱ(0.2) drift {fd:.1e}")))
}

fn inverse_roundtrip() -> Outcome {
    let samples = corpus::corpus(SEED + 3, &[4, 6], 50)?;
    let mut worst: f64 = 0.0;
    for s in &samples {
        worst = worst.max(inverse::roundtrip(&s.u)?);
    }
    Ok((worst <= 1e-7, format!("{} symbols, max residual {worst:.1e}", samples.len())))
}

fn structural() -> Outcome {
    let samples = corpus::corpus(SEED + 4, &[2, 3, 4, 5, 6, 7, 8], 10)?;
    let mut failures = Vec::new();
    let (mut r1, mut tr) = (0f64, 0f64);
    for (i, s) in samples.iter().enumerate() {
        let d = s.rational.class_d();
        let sd = hankel::spectrum(&s.u)?;
        if !interlacement_check(&sd).0 {
            failures.push(format!("#{i} interlacement"));
        }
        if !alternation_check(&sd) {
            failures.push(format!("#{i} alternation"));
        }
        let ranks = conservation::rank_sum(&s.u);
        if ranks != d {
            failures.push(format!("#{i} rank {ranks} ≠ {d}"));
        }
        r1 = r1.max(hankel::rank_one_residual(&s.u));
        tr = tr.max(hankel::trace_residual(&s.u));
    }
    let ok = failures.is_empty() && r1 <= 1e-12 && tr <= 1e-10;
    let mut detail = format!("{} symbols, rank-one {r1:.1e}, trace {tr:.1e}", samples.len());
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join(", ")));
    }
    Ok((ok, detail))
}

fn v3_turbulence() -> Outcome {
    let (cc, p) = (c(1.0, 0.0), c(0.5, 0.0));
    let lambda = c(0.1f64.powf(0.25), 0.0);
    let b = flow::resonant_v3_b(cc, p)?;
    let res = rational_to_fourier_auto(&RationalSymbol::v3(c(b, 0.0), cc, p)?)?.scaled(lambda);
    let defect = v3_resonance_defect(&conservation::report(&res)?);
    let rt = flow::integrate(&res, Field::Hamiltonian, 8.0, &opts(0.01, Some(3)))?;
    let rs = flow::growth_and_poles(&rt, &[1.0])?.sobolev[0].1;
    let bnd = rational_to_fourier_auto(&RationalSymbol::v3(c(0.1, 0.0), cc, p)?)?.scaled(lambda);
    let bt = flow::integrate(&bnd, Field::Hamiltonian, 100.0, &IntegrateOptions { s_list: vec![1.0], ..opts(0.1, None) })?;
    let bs = flow::growth_and_poles(&bt, &[1.0])?.sobolev[0].1;
    Ok((
        defect < 1e-8 && rs > 0.0 && bs.abs() < BOUNDED_SLOPE,
        format!("resonant (defect {defect:.1e}) slope {rs:.4}, non-resonant slope {bs:.1e}"),
    ))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |n: usize, title: &str, f: &mut dyn FnMut() -> Outcome| {
        let t0 = Instant::now();
        let (ok, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error {}: {e}", e.name())),
        };
        if !ok {
            failed += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} criterion {n}: {title} — {detail} [{:.1} s]", t0.elapsed().as_secs_f64());
    };

    report(1, "V(4) example closed forms", &mut example_closed_forms);
    report(2, "resonance location", &mut resonance_location);

    let turbulent = flow::resonant_v4_example(0.4)
        .and_then(|u| flow::integrate(&u, Field::Hamiltonian, 8.0, &opts(0.01, Some(4))));
    let with_traj = |f: fn(&Trajectory) -> Outcome| -> Outcome {
        match &turbulent {
            Ok(t) => f(t),
            Err(e) => Err(e.clone()),
        }
    };
    report(3, "conservation under the Hamiltonian flow", &mut || with_traj(conservation_drift));
    report(4, "closed-form turbulence profile", &mut || with_traj(closed_form_profile));
    report(5, "Sobolev growth structure", &mut || with_traj(growth_structure));

    let samples = identity_corpus();
    let with_samples = |f: fn(&[corpus::Sample]) -> Outcome| -> Outcome {
        match &samples {
            Ok(s) => f(s),
            Err(e) => Err(e.clone()),
        }
    };
    report(6, "generating identity", &mut || with_samples(generating_identity));
    report(7, "resolvent identity suite", &mut || with_samples(resolvent_suite));
    report(8, "involution", &mut involution);
    report(9, "bracket lemmas", &mut bracket_lemmas);
    report(10, "generating flow preserves the spectrum", &mut generating_flow);
    report(11, "inverse spectral roundtrip", &mut inverse_roundtrip);
    report(12, "structural invariants", &mut structural);
    report(13, "V(3) turbulence", &mut v3_turbulence);

    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
