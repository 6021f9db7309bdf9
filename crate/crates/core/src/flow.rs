//! Hamiltonian vector fields, adaptive Dormand–Prince integration with truncation
//! doubling, and trajectory diagnostics (drift, Lax residual, projection and angle
//! evolution, Sobolev growth and pole escape, the 𝒱(4) closed-form profile).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::conservation::{self, ConservationReport, Resolvent, RESONANCE_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{self, RANK_FLOOR};
use crate::symbol::{dot, fit_rational, rational_to_fourier_auto, RationalSymbol, sobolev_norm_sq, tail_ratio, FourierSymbol, SobolevIndex, MAX_N, TAIL_TOL};
use crate::{conv, hankel, C64};

/// Vector field selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Field {
    /// `X_𝓗`, the quadratic Szegő flow.
    Hamiltonian,
    /// `X_ℱ(x)`.
    Generating { x: f64 },
}

const I: C64 = C64::new(0.0, 1.0);

fn field_h(c: &[C64]) -> Vec<C64> {
    let n = c.len();
    let u2 = conv::convolve(c, c, n);
    let w = conservation::w_of(c);
    let j = dot(&u2, c);
    w.iter().zip(&u2).map(|(a, b)| -2.0 * I * j * a - I * j.conj() * b).collect()
}

fn field_f(c: &[C64], x: f64) -> Result<Vec<C64>> {
    let n = c.len();
    if c.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(vec![C64::new(0.0, 0.0); n]);
    }
    let svd = linalg::hankel_svd(c, RANK_FLOOR);
    let r = Resolvent::new(&svd, x, RESONANCE_MARGIN)?;
    let mut one = vec![C64::new(0.0, 0.0); n];
    one[0] = C64::new(1.0, 0.0);
    let w0 = r.apply(&one);
    let w1 = r.apply(c);
    let w = conservation::w_of(c);
    let q: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let jj0 = w0[0].re;
    let jj2 = dot(&w1, c).re;
    let jj3 = dot(&w1, &w);
    let f = (2.0 * q + x * jj2 * jj2 - x * x * jj3.norm_sqr()) / jj0;
    let hw0 = conv::correlate(c, &w0);
    let hw1 = conv::correlate(c, &w1);
    let p01 = conv::convolve(&w0, &hw0, n);
    let sq0 = conv::convolve(&hw0, &hw0, n);
    let sq1 = conv::convolve(&hw1, &hw1, n);
    let a = x * (4.0 * jj2 - 2.0 * f);
    let pre = -I / jj0;
    Ok((0..n)
        .map(|k| {
            pre * (4.0 * c[k] + a * p01[k]
                - 2.0 * x * x * jj3.conj() * sq0[k]
                - 2.0 * x * x * x * jj3 * sq1[k]
                - 4.0 * x * x * jj3 * hw1[k])
        })
        .collect())
}

/// `X_𝓗(u) = −2iJ Π(|u|²) − iJ̄ u²`.
pub fn vector_field_h(u: &FourierSymbol) -> FourierSymbol {
    FourierSymbol::from_vec_unchecked(field_h(u.coeffs()))
}

/// `X_ℱ(x)(u)`, from two resolvent solves.
pub fn vector_field_f(u: &FourierSymbol, x: f64) -> Result<FourierSymbol> {
    Ok(FourierSymbol::from_vec_unchecked(field_f(u.coeffs(), x)?))
}

fn eval_field(field: Field, c: &[C64]) -> Result<Vec<C64>> {
    match field {
        Field::Hamiltonian => Ok(field_h(c)),
        Field::Generating { x } => field_f(c, x),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub sample_dt: f64,
    pub s_list: Vec<f64>,
    /// Class `d` used to fit poles at each sample (no pole tracking if `None`).
    pub pole_class: Option<usize>,
    /// Compute spectra and conservation reports at each sample.
    pub analyze: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-13, sample_dt: 0.01, s_list: vec![1.0, 2.0], pole_class: None, analyze: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub max_local_error: f64,
    pub final_n: usize,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FourierSymbol>,
    pub reports: Vec<ConservationReport>,
    /// `(s, ‖u(t)‖²_{H^s})` per requested exponent.
    pub sobolev: Vec<(f64, Vec<f64>)>,
    /// Poles (roots of `B`) per sample.
    pub poles: Vec<Vec<C64>>,
    pub step_stats: StepStats,
    pub field: Field,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Single-owner adaptive stepper.
struct Stepper {
    field: Field,
    rtol: f64,
    atol: f64,
    y: Vec<C64>,
    t: f64,
    h: f64,
    k1: Option<Vec<C64>>,
    err_prev: f64,
    stats: StepStats,
}

impl Stepper {
    fn rhs(&mut self, y: &[C64]) -> Result<Vec<C64>> {
        self.stats.rhs_evals += 1;
        eval_field(self.field, y)
    }

    fn grow_if_needed(&mut self) -> Result<()> {
        while tail_ratio(&self.y) > TAIL_TOL {
            let n = self.y.len();
            if n >= MAX_N {
                return Err(Error::TailNotResolved { n, tail: tail_ratio(&self.y) });
            }
            self.y.resize(2 * n, C64::new(0.0, 0.0));
            self.k1 = None;
        }
        Ok(())
    }

    /// Advances by at most `h_max` (signed), returning the step taken.
    fn step(&mut self, h_max: f64) -> Result<f64> {
        let dir = h_max.signum();
        loop {
            let h = if self.h.abs() > h_max.abs() { h_max } else { self.h * dir };
            if h.abs() < 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t, h });
            }
            let k1 = match self.k1.take() {
                Some(k) => k,
                None => {
                    let y = self.y.clone();
                    self.rhs(&y)?
                }
            };
            let n = self.y.len();
            let mut ks: Vec<Vec<C64>> = vec![k1];
            for s in 1..7 {
                let mut yt = self.y.clone();
                for (j, kj) in ks.iter().enumerate() {
                    let a = A[s][j];
                    if a != 0.0 {
                        for (y, k) in yt.iter_mut().zip(kj) {
                            *y += k * (h * a);
                        }
                    }
                }
                let _ = C[s];
                ks.push(self.rhs(&yt)?);
            }
            let mut y_new = self.y.clone();
            for (j, kj) in ks.iter().enumerate().take(6) {
                let a = A[6][j];
                if a != 0.0 {
                    for (y, k) in y_new.iter_mut().zip(kj) {
                        *y += k * (h * a);
                    }
                }
            }
            let mut err = vec![C64::new(0.0, 0.0); n];
            for (j, kj) in ks.iter().enumerate() {
                if E[j] != 0.0 {
                    for (e, k) in err.iter_mut().zip(kj) {
                        *e += k * (h * E[j]);
                    }
                }
            }
            let scale = self.atol + self.rtol * l2(&self.y).max(l2(&y_new));
            let e = l2(&err) / scale;
            if e.is_finite() && e <= 1.0 {
                self.stats.accepted += 1;
                self.stats.max_local_error = self.stats.max_local_error.max(e * scale);
                let fac = 0.9 * e.max(1e-10).powf(-0.17) * self.err_prev.powf(0.04);
                let fresh = (h.abs() * fac.clamp(0.2, 5.0)).max(self.h.abs().min(h.abs()));
                // Keep the unclipped step when a sample time forced a short one.
                self.h = if h.abs() < self.h.abs() { self.h.abs().max(fresh) } else { fresh };
                self.err_prev = e.max(1e-4);
                self.y = y_new;
                self.t += h;
                self.k1 = Some(ks.swap_remove(6));
                self.grow_if_needed()?;
                return Ok(h);
            }
            self.stats.rejected += 1;
            let fac = if e.is_finite() { (0.9 * e.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            self.h = h.abs() * fac;
        }
    }
}

type SampleAnalysis = (ConservationReport, Vec<f64>, Vec<C64>);

fn analyze_sample(u: &FourierSymbol, opts: &IntegrateOptions, s_idx: &[SobolevIndex]) -> Result<SampleAnalysis> {
    let rep = if opts.analyze { conservation::report(u)? } else { ConservationReport::zero() };
    let sob = s_idx.iter().map(|s| sobolev_norm_sq(u, *s)).collect();
    let poles = match opts.pole_class {
        Some(d) if !u.is_zero() => fit_rational(u, d)?.poles(),
        _ => Vec::new(),
    };
    Ok((rep, sob, poles))
}

/// Per-sample analysis, split over `SZEGO_LAB_THREADS` worker threads; results keep sample order.
fn analyze_all(states: &[FourierSymbol], opts: &IntegrateOptions) -> Result<Vec<SampleAnalysis>> {
    let s_idx = opts.s_list.iter().map(|s| SobolevIndex::new(*s)).collect::<Result<Vec<_>>>()?;
    let threads = crate::worker_threads().min(states.len()).max(1);
    if threads == 1 {
        return states.iter().map(|u| analyze_sample(u, opts, &s_idx)).collect();
    }
    let chunk = states.len().div_ceil(threads);
    let parts: Vec<Result<Vec<SampleAnalysis>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = states
            .chunks(chunk)
            .map(|part| {
                let s_idx = &s_idx;
                scope.spawn(move || part.iter().map(|u| analyze_sample(u, opts, s_idx)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("analysis thread panicked")).collect()
    });
    let mut out = Vec::with_capacity(states.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Integrates `u̇ = X(u)` from 0 to `t_end` (either sign), sampling every `sample_dt`.
pub fn integrate(u0: &FourierSymbol, field: Field, t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.sample_dt > 0.0) || !t_end.is_finite() {
        return Err(Error::Config("tolerances and sample_dt must be positive".into()));
    }
    let f0 = eval_field(field, u0.coeffs())?;
    let scale = l2(u0.coeffs()).max(1e-300);
    let h0 = (0.01 * scale / l2(&f0).max(1e-300)).min(opts.sample_dt).min(t_end.abs().max(1e-300));
    let mut st = Stepper {
        field,
        rtol: opts.rtol,
        atol: opts.atol,
        y: u0.coeffs().to_vec(),
        t: 0.0,
        h: h0,
        k1: Some(f0),
        err_prev: 1e-4,
        stats: StepStats { rhs_evals: 1, ..Default::default() },
    };
    st.grow_if_needed()?;
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let n_samples = (t_end.abs() / opts.sample_dt + 1e-9).floor() as usize;
    let mut targets: Vec<f64> = (1..=n_samples).map(|k| dir * k as f64 * opts.sample_dt).collect();
    if targets.last().map(|t| (t - t_end).abs() > 1e-12 * t_end.abs().max(1.0)).unwrap_or(t_end != 0.0) {
        targets.push(t_end);
    }
    let mut times = vec![0.0];
    let mut states = vec![FourierSymbol::from_vec_unchecked(st.y.clone())];
    for target in targets {
        while (target - st.t) * dir > 1e-13 * target.abs().max(1.0) {
            st.step(target - st.t)?;
        }
        st.t = target;
        times.push(target);
        states.push(FourierSymbol::from_vec_unchecked(st.y.clone()));
    }
    st.stats.final_n = st.y.len();
    let analysis = analyze_all(&states, opts)?;
    let mut reports = Vec::with_capacity(analysis.len());
    let mut sob: Vec<Vec<f64>> = vec![Vec::with_capacity(analysis.len()); opts.s_list.len()];
    let mut poles = Vec::with_capacity(analysis.len());
    for (rep, s, p) in analysis {
        reports.push(rep);
        for (dst, v) in sob.iter_mut().zip(s) {
            dst.push(v);
        }
        poles.push(p);
    }
    Ok(Trajectory {
        times,
        states,
        reports,
        sobolev: opts.s_list.iter().copied().zip(sob).collect(),
        poles,
        step_stats: st.stats,
        field,
    })
}

/// Final state only, without per-sample analysis.
pub fn evolve(u0: &FourierSymbol, field: Field, t_end: f64, rtol: f64, atol: f64) -> Result<FourierSymbol> {
    let opts = IntegrateOptions {
        rtol,
        atol,
        sample_dt: t_end.abs().max(1e-300),
        s_list: vec![],
        pole_class: None,
        analyze: false,
    };
    let traj = integrate(u0, field, t_end, &opts)?;
    Ok(traj.states.last().cloned().expect("nonempty trajectory"))
}

/// Maximal relative drift of each conserved quantity along a trajectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub entries: Vec<(String, f64)>,
}

impl DriftReport {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.1).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.0 == name).map(|e| e.1)
    }
}

/// Drifts of `Q, M, |J|, σ_k², ℓ_k, ℓ_∞`; `σ_k²` relative to themselves, `ℓ` relative to `Q²`.
pub fn drift(traj: &Trajectory) -> DriftReport {
    let r0 = &traj.reports[0];
    let q2 = (r0.q * r0.q).max(f64::MIN_POSITIVE);
    let mut entries: Vec<(String, f64)> = Vec::new();
    let mut track = |name: String, f: &dyn Fn(&ConservationReport) -> Option<f64>, scale: f64| {
        let Some(v0) = f(r0) else { return };
        let d = traj.reports.iter().filter_map(f).map(|v| (v - v0).abs()).fold(0.0, f64::max);
        entries.push((name, d / scale.max(f64::MIN_POSITIVE)));
    };
    track("Q".into(), &|r| Some(r.q), r0.q);
    track("M".into(), &|r| Some(r.m), r0.m.max(r0.q));
    track("absJ".into(), &|r| Some(r.j.norm()), r0.j.norm().max(r0.q.powf(1.5)));
    for k in 0..r0.ells.len() {
        track(format!("sigma2_{}", k + 1), &move |r| r.ells.get(k).map(|e| e.0), r0.ells[k].0);
        track(format!("ell_{}", k + 1), &move |r| r.ells.get(k).map(|e| e.1), q2);
    }
    track("ell_inf".into(), &|r| Some(r.ell_inf), q2);
    DriftReport { entries }
}

fn padded(u: &FourierSymbol, n: usize) -> Vec<C64> {
    u.resized(n).into_coeffs()
}

/// `max ‖(K²(t+) − K²(t−))/Δt − [B_u, K²]‖ / ‖K²‖` over interior samples (operator norms by
/// power iteration on the Hermitian defect, all products matrix-free).
pub fn lax_residual(traj: &Trajectory) -> f64 {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 1..traj.states.len().saturating_sub(1) {
        let n = traj.states[i - 1].len().max(traj.states[i].len()).max(traj.states[i + 1].len());
        let um = padded(&traj.states[i - 1], n);
        let u = padded(&traj.states[i], n);
        let up = padded(&traj.states[i + 1], n);
        let dt = traj.times[i + 1] - traj.times[i - 1];
        let (km, k0, kp) = (hankel::shifted_coeffs(&um), hankel::shifted_coeffs(&u), hankel::shifted_coeffs(&up));
        let k2 = |kc: &[C64], v: &[C64]| conv::correlate(kc, &conv::correlate(kc, v));
        let j = dot(&conv::convolve(&u, &u, n), &u);
        let b = |v: &[C64]| -> Vec<C64> {
            let t1 = conv::convolve(&u, v, n);
            let t2 = conv::correlate(v, &u);
            t1.iter().zip(&t2).map(|(a, c)| -I * (j.conj() * a + j * c)).collect()
        };
        let defect = |v: &[C64]| -> Vec<C64> {
            let a = k2(&kp, v);
            let c = k2(&km, v);
            let bk = b(&k2(&k0, v));
            let kb = k2(&k0, &b(v));
            (0..n).map(|m| (a[m] - c[m]) / dt - (bk[m] - kb[m])).collect()
        };
        let mut v: Vec<C64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re, im)
            })
            .collect();
        let mut est = 0.0;
        for _ in 0..40 {
            let nv = l2(&v);
            if nv == 0.0 {
                break;
            }
            v.iter_mut().for_each(|z| *z /= nv);
            v = defect(&v);
            est = l2(&v);
        }
        let k2norm = traj.reports[i].ells.first().map(|e| e.0).unwrap_or_else(|| {
            let svd = linalg::hankel_svd(&k0, RANK_FLOOR);
            svd.values.first().map(|s| s * s).unwrap_or(0.0)
        });
        if k2norm > 0.0 {
            worst = worst.max(est / k2norm);
        }
    }
    worst
}

fn check_projection(traj: &Trajectory, k: usize) -> Result<()> {
    if traj.reports.iter().any(|r| r.ells.len() <= k) {
        return Err(Error::InconsistentInputs(format!("σ_{} is not present along the trajectory", k + 1)));
    }
    Ok(())
}

fn usable(traj: &Trajectory, k: usize, i: usize) -> Result<bool> {
    let r = &traj.reports[i];
    let un = r.u_norms2[k].sqrt();
    let scale = r.q.sqrt();
    if un < 1e-12 * scale && r.ells[k].1 >= 0.0 {
        return Err(Error::CrossingDetected(traj.times[i]));
    }
    Ok(un >= hankel::PROJ_FLOOR * scale)
}

/// Central-difference `d/dt ‖u_k^K‖²` against `2 Im(J (w_k^K|u_k^K))`; max residual relative
/// to the largest right-hand side.
pub fn projection_evolution_residual(traj: &Trajectory, k: usize) -> Result<f64> {
    check_projection(traj, k)?;
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..traj.times.len().saturating_sub(1) {
        if !(usable(traj, k, i - 1)? && usable(traj, k, i)? && usable(traj, k, i + 1)?) {
            continue;
        }
        let r = &traj.reports;
        let fd = (r[i + 1].u_norms2[k] - r[i - 1].u_norms2[k]) / (traj.times[i + 1] - traj.times[i - 1]);
        let rhs = 2.0 * (r[i].j * r[i].wu[k]).im;
        worst = worst.max((fd - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    Ok(if worst == 0.0 { 0.0 } else { worst / scale.max(f64::MIN_POSITIVE) })
}

/// Unwrapped `ψ_k(t)` (`None` at flagged samples) and the residual of `ψ̇_k = 2 Re(J ξ_k)`.
pub fn blaschke_angle_trace(traj: &Trajectory, k: usize) -> Result<(Vec<Option<f64>>, f64)> {
    check_projection(traj, k)?;
    let mut psi = Vec::with_capacity(traj.times.len());
    let mut prev: Option<f64> = None;
    for (i, r) in traj.reports.iter().enumerate() {
        let v = match (usable(traj, k, i)?, r.psis[k]) {
            (true, Some(a)) => Some(match prev {
                Some(p) => p + (a - p + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI,
                None => a,
            }),
            _ => None,
        };
        psi.push(v);
        prev = v;
    }
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 1..psi.len().saturating_sub(1) {
        let (Some(a), Some(_), Some(b), Some(xi)) = (psi[i - 1], psi[i], psi[i + 1], traj.reports[i].xis[k]) else {
            continue;
        };
        let fd = (b - a) / (traj.times[i + 1] - traj.times[i - 1]);
        let rhs = 2.0 * (traj.reports[i].j * xi).re;
        worst = worst.max((fd - rhs).abs());
        scale = scale.max(rhs.abs());
    }
    let res = if worst == 0.0 { 0.0 } else { worst / scale.max(f64::MIN_POSITIVE) };
    Ok((psi, res))
}

/// Least-squares line through `(t, y)`: slope and coefficient of determination.
pub fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - ym).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

/// Below this magnitude a fitted log-slope counts as "no growth", and its R² is not judged.
pub const BOUNDED_SLOPE: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// `(s, slope of log ‖u‖²_{H^s}, R²)` on the trailing half.
    pub sobolev: Vec<(f64, f64, f64)>,
    /// Per tracked pole: slope of `log(1 − |p|²)` (with `p` the inverse pole) and R².
    pub poles: Vec<(f64, f64)>,
    pub escaping: Option<usize>,
    /// `max_t |p(t)|` of the slowest-moving pole when there are several.
    pub bounded_max_abs: Option<f64>,
}

fn trailing<T: Copy>(v: &[T]) -> Vec<T> {
    v[v.len() / 2..].to_vec()
}

pub fn growth_and_poles(traj: &Trajectory, s_list: &[f64]) -> Result<GrowthReport> {
    let t = trailing(&traj.times);
    let mut sob = Vec::new();
    for s in s_list {
        let (_, norms) = traj
            .sobolev
            .iter()
            .find(|(x, _)| (x - s).abs() < 1e-12)
            .ok_or_else(|| Error::InconsistentInputs(format!("no H^{s} norms recorded")))?;
        let y: Vec<f64> = trailing(norms).iter().map(|v| v.ln()).collect();
        let (slope, r2) = linear_fit(&t, &y);
        if slope.abs() > BOUNDED_SLOPE && r2 < 0.99 {
            return Err(Error::FitUnreliable(r2));
        }
        sob.push((*s, slope, r2));
    }
    // Inverse poles p = 1/root, labelled by continuity between samples.
    let mut tracks: Vec<Vec<C64>> = Vec::new();
    for (i, roots) in traj.poles.iter().enumerate() {
        let ps: Vec<C64> = roots.iter().map(|r| r.inv()).collect();
        if i == 0 {
            tracks = ps.iter().map(|p| vec![*p]).collect();
            continue;
        }
        if ps.len() != tracks.len() {
            return Err(Error::RankMismatch { expected: tracks.len(), found: ps.len() });
        }
        let mut free: Vec<bool> = vec![true; ps.len()];
        for tr in tracks.iter_mut() {
            let last = *tr.last().unwrap();
            let (best, _) = ps
                .iter()
                .enumerate()
                .filter(|(j, _)| free[*j])
                .map(|(j, p)| (j, (p - last).norm()))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .expect("as many poles as tracks");
            free[best] = false;
            tr.push(ps[best]);
        }
    }
    let mut poles = Vec::new();
    for tr in &tracks {
        let y: Vec<f64> = trailing(tr).iter().map(|p| (1.0 - p.norm_sqr()).ln()).collect();
        poles.push(linear_fit(&t, &y));
    }
    let escaping = poles
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .filter(|(_, p)| p.0 < -BOUNDED_SLOPE)
        .map(|(i, _)| i);
    let bounded_max_abs = if tracks.len() > 1 {
        let slow = poles
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        Some(tracks[slow].iter().map(|p| p.norm()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(GrowthReport { sobolev: sob, poles, escaping, bounded_max_abs })
}

/// Explicit turbulent profile on the resonant leaf `ℓ₁ = 0` of 𝒱(4).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct V4ClosedForm {
    pub q: f64,
    pub sigma1_2: f64,
    pub sigma2_2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub a: f64,
    pub b: f64,
    pub amp: f64,
    pub tau: f64,
    pub t0: f64,
}

impl V4ClosedForm {
    /// `y(t) = 2ab / ((a − b) + (a + b) cosh(τ(t − t0)))`.
    pub fn y(&self, t: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        2.0 * a * b / ((a - b) + (a + b) * (self.tau * (t - self.t0)).cosh())
    }

    /// `‖u₁^K(t)‖² = Q y(t) / (σ₁² − σ₂²)`.
    pub fn u1_norm2(&self, t: f64) -> f64 {
        self.q * self.y(t) / (self.sigma1_2 - self.sigma2_2)
    }

    /// `P(X)` whose positive part governs `(ẏ/(Qy))²`.
    pub fn p(&self, x: f64) -> f64 {
        let p0 = self.tau * self.tau / (self.q * self.q);
        p0 - 2.0 * (3.0 * self.q + 2.0 * self.sigma2_2) * x - x * x
    }
}

pub fn v4_closed_form(u0: &FourierSymbol) -> Result<V4ClosedForm> {
    let rep = conservation::report(u0)?;
    if rep.ells.len() != 2 {
        return Err(Error::RankMismatch { expected: 2, found: rep.ells.len() });
    }
    let q = rep.q;
    let (s1, s2) = (rep.ells[0].0, rep.ells[1].0);
    let l1 = rep.ells[0].1;
    if l1.abs() > 1e-8 * q * q {
        return Err(Error::NotOnResonantLeaf(l1 / (q * q)));
    }
    let p0 = 4.0 * (q + s2) * (s1 - s2) - q * q;
    if p0 <= 0.0 {
        return Err(Error::InconsistentInputs(format!("P(0) = {p0} is not positive")));
    }
    let beta = 3.0 * q + 2.0 * s2;
    let disc = (beta * beta + p0).sqrt();
    let (lambda1, lambda2) = (-beta - disc, -beta + disc);
    let (a, b) = (-lambda1, lambda2);
    let tau = q * p0.sqrt();
    let y0 = rep.u_norms2[0] * (s1 - s2) / q;
    let ch = ((2.0 * a * b / y0 - (a - b)) / (a + b)).max(1.0);
    let rising = 2.0 * (rep.j * rep.wu[0]).im;
    let t0 = rising.signum() * ch.acosh() / tau;
    Ok(V4ClosedForm { q, sigma1_2: s1, sigma2_2: s2, lambda1, lambda2, a, b, amp: q, tau, t0 })
}

/// `λz/(1 − pz)²` with `|p|² = 3√2 − 4` (so `ℓ₁ = 0`), scaled so the closed-form rate is `tau`.
pub fn resonant_v4_example(tau: f64) -> Result<FourierSymbol> {
    let p = C64::new((3.0 * 2f64.sqrt() - 4.0).sqrt(), 0.0);
    let u = rational_to_fourier_auto(&RationalSymbol::double_pole(p))?;
    let tau0 = v4_closed_form(&u)?.tau;
    Ok(u.scaled(C64::new((tau / tau0).powf(0.25), 0.0)))
}

/// Smallest real `b > 0` with `|J|² = Q³` for `b + cz/(1 − pz)`: grid search then bisection.
pub fn resonant_v3_b(c: C64, p: C64) -> Result<f64> {
    let defect = |b: f64| -> Result<f64> {
        let u = rational_to_fourier_auto(&RationalSymbol::v3(C64::new(b, 0.0), c, p)?)?;
        let rep = conservation::report(&u)?;
        Ok(rep.j.norm_sqr() - rep.q.powi(3))
    };
    let hi_max = 4.0 * c.norm();
    let mut lo = 1e-3 * hi_max;
    let mut flo = defect(lo)?;
    let mut bracket = None;
    for i in 1..=64 {
        let b = hi_max * i as f64 / 64.0;
        let fb = defect(b)?;
        if (fb > 0.0) != (flo > 0.0) {
            bracket = Some(b);
            break;
        }
        lo = b;
        flo = fb;
    }
    let mut hi = bracket.ok_or_else(|| Error::InconsistentInputs("no V(3) resonance for these c, p".into()))?;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        let fm = defect(mid)?;
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn trivial_fields() {
        assert!(vector_field_h(&FourierSymbol::zeros(8)).is_zero());
        let z = FourierSymbol::from_slice(&[c(0.0, 0.0), c(0.4, 0.3)], 8);
        assert!(vector_field_h(&z).coeffs().iter().all(|x| x.norm() < 1e-15));
        let k = c(0.6, -0.2);
        let x = vector_field_h(&FourierSymbol::constant(k, 8));
        assert!((x.coeffs()[0] - (-3.0 * I * k.norm_sqr().powi(2) * k)).norm() < 1e-15);
        assert!(vector_field_f(&FourierSymbol::zeros(8), -0.5).unwrap().is_zero());
    }

    #[test]
    fn steady_state_trajectory() {
        let z = FourierSymbol::from_slice(&[c(0.0, 0.0), c(0.4, 0.3)], 16);
        let opts = IntegrateOptions { sample_dt: 0.5, ..Default::default() };
        let traj = integrate(&z, Field::Hamiltonian, 10.0, &opts).unwrap();
        assert_eq!(traj.times.len(), 21);
        assert!(drift(&traj).max() < 1e-13);
        assert!(lax_residual(&traj) < 1e-10);
        assert_eq!(projection_evolution_residual(&traj, 0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_constants() {
        let r = 3.0 * 2f64.sqrt() - 4.0;
        let u = rational_to_fourier_auto(&RationalSymbol::double_pole(c(r.sqrt(), 0.0))).unwrap();
        let cf = v4_closed_form(&u).unwrap();
        assert!((cf.lambda1 + cf.lambda2 + 2.0 * (3.0 * cf.q + 2.0 * cf.sigma2_2)).abs() < 1e-10);
        let expect = cf.q * (4.0 * (cf.q + cf.sigma2_2) * (cf.sigma1_2 - cf.sigma2_2) - cf.q * cf.q).sqrt();
        assert!((cf.tau - expect).abs() < 1e-12 * expect);
        assert!(cf.p(0.0) > 0.0);
        assert!(cf.t0.abs() < 1e-6);
        let off = rational_to_fourier_auto(&RationalSymbol::double_pole(c(0.5, 0.0))).unwrap();
        assert!(matches!(v4_closed_form(&off), Err(Error::NotOnResonantLeaf(_))));
    }

    #[test]
    fn fits() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        let (s, r2) = linear_fit(&t, &y);
        assert!((s - 2.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
        let flat = vec![3.0; 10];
        assert_eq!(linear_fit(&t, &flat), (0.0, 1.0));
    }
}
