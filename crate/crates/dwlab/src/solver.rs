//! Time evolution: exact Fourier-side linear propagation, a Duhamel
//! exponential-midpoint integrator for the semilinear problem, and the global
//! Picard recurrence with its contraction report.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{DwError, Result};
use crate::grid::{
    forward_raw, inverse_raw, pad_coeffs, to_physical, to_spectral, truncate_coeffs, Field,
    Grid, SpectralField,
};
use crate::kernel::kernel_values;
use crate::spaces::{lp_norm, sobolev_norm, NormSample, SpaceWeights};

/// Largest step the midpoint Duhamel quadrature is trusted with.
pub const DT_MAX: f64 = 0.5;

/// Amplitude cutoff used when measuring the numerical support radius.
const SUPPORT_CUTOFF: f64 = 1e-12;

/// Default production grids: wrap-around safe at desk-scale memory.
pub fn default_grid_size(dim: usize) -> (usize, f64) {
    match dim {
        1 => (1 << 15, 600.0),
        _ => (512, 160.0),
    }
}

/// Pair (u, u_t) at a time instant.
#[derive(Debug, Clone)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
}

impl State {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    /// Numerical support radius in the max-norm: largest |x|_inf where
    /// |u| + |v| exceeds 1e-12 of the peak.
    pub fn support_radius(&self) -> f64 {
        let grid = self.grid();
        let peak = self.u.max_abs().max(self.v.max_abs());
        if peak == 0.0 {
            return 0.0;
        }
        let cut = SUPPORT_CUTOFF * peak;
        let mut radius = 0.0_f64;
        for i in 0..grid.node_count() {
            if self.u.values()[i].abs() + self.v.values()[i].abs() > cut {
                let c = grid.coord(i);
                let r = match grid.dim() {
                    1 => c[0].abs(),
                    _ => c[0].abs().max(c[1].abs()),
                };
                radius = radius.max(r);
            }
        }
        radius
    }
}

/// Initial data shapes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialKind {
    /// u0 = exp(-|x|^2 / (2 w^2)), u1 the same shape.
    Gaussian { width: f64 },
    /// Compactly supported C-infinity bump of the given radius, u1 = 0.
    Bump { radius: f64 },
    /// u0 = cos(k x_1), u1 = 0; exact-solution tests only.
    SingleMode { mode: i64 },
}

/// Build (eps u0, eps u1) on the grid.
pub fn make_initial(kind: InitialKind, eps: f64, grid: Arc<Grid>) -> Result<State> {
    if eps < 0.0 {
        return Err(DwError::InvalidArgument(format!(
            "amplitude eps must be nonnegative, got {eps}"
        )));
    }
    let half_length = grid.half_length();
    let (u0, u1): (Field, Field) = match kind {
        InitialKind::Gaussian { width } => {
            if !(width > 0.0) {
                return Err(DwError::InvalidArgument("gaussian width must be positive".into()));
            }
            // amplitude falls to 1e-12 at radius w sqrt(2 ln 1e12)
            let radius = width * (2.0 * 12.0 * std::f64::consts::LN_10).sqrt();
            if radius >= half_length {
                return Err(DwError::SupportViolation {
                    radius,
                    half_length,
                    t_end: 0.0,
                });
            }
            let g = Field::from_fn(grid.clone(), move |x| {
                let r2: f64 = x.iter().map(|xi| xi * xi).sum();
                (-0.5 * r2 / (width * width)).exp()
            });
            (g.clone(), g)
        }
        InitialKind::Bump { radius } => {
            if !(radius > 0.0) {
                return Err(DwError::InvalidArgument("bump radius must be positive".into()));
            }
            if radius >= half_length {
                return Err(DwError::SupportViolation {
                    radius,
                    half_length,
                    t_end: 0.0,
                });
            }
            let b = Field::from_fn(grid.clone(), move |x| {
                let r2: f64 = x.iter().map(|xi| xi * xi).sum::<f64>() / (radius * radius);
                if r2 >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                }
            });
            (b, Field::zeros(grid.clone()))
        }
        InitialKind::SingleMode { mode } => {
            let base = std::f64::consts::PI / half_length;
            let u0 = Field::from_fn(grid.clone(), move |x| (base * mode as f64 * x[0]).cos());
            (u0, Field::zeros(grid.clone()))
        }
    };
    Ok(State {
        u: u0.scaled(eps),
        v: u1.scaled(eps),
        t: 0.0,
    })
}

/// Precomputed kernel symbols for one step size.
struct Propagator {
    dt: f64,
    /// (K, K_t) per lattice node.
    k: Vec<f64>,
    k_dt: Vec<f64>,
}

impl Propagator {
    fn new(grid: &Grid, dt: f64) -> Propagator {
        let mut k = Vec::with_capacity(grid.node_count());
        let mut k_dt = Vec::with_capacity(grid.node_count());
        for &xs in grid.freq_sq() {
            let kv = kernel_values(dt, xs);
            k.push(kv.k);
            k_dt.push(kv.k_dt);
        }
        Propagator { dt, k, k_dt }
    }

    /// Exact linear update: u' = (K + K_t) u + K v, v' = -|xi|^2 K u + K_t v.
    fn apply(&self, grid: &Grid, u: &mut [Complex64], v: &mut [Complex64]) {
        for i in 0..u.len() {
            let xs = grid.freq_sq()[i];
            let (k, kt) = (self.k[i], self.k_dt[i]);
            let un = (k + kt) * u[i] + k * v[i];
            let vn = -xs * k * u[i] + kt * v[i];
            u[i] = un;
            v[i] = vn;
        }
    }

    /// Add the Duhamel forcing `wk * K * f` to u and `wk * K_t * f` to v.
    fn add_forcing(&self, weight: f64, f: &[Complex64], u: &mut [Complex64], v: &mut [Complex64]) {
        for i in 0..f.len() {
            u[i] += weight * self.k[i] * f[i];
            v[i] += weight * self.k_dt[i] * f[i];
        }
    }
}

fn spectral_pair(state: &State) -> (Vec<Complex64>, Vec<Complex64>) {
    (
        to_spectral(&state.u).coeffs().to_vec(),
        to_spectral(&state.v).coeffs().to_vec(),
    )
}

fn materialize(grid: &Arc<Grid>, u: &[Complex64], v: &[Complex64], t: f64) -> Result<State> {
    let mut su = SpectralField::from_coeffs(grid.clone(), u.to_vec())?;
    let mut sv = SpectralField::from_coeffs(grid.clone(), v.to_vec())?;
    su.hermitian_project();
    sv.hermitian_project();
    Ok(State {
        u: to_physical(&su)?,
        v: to_physical(&sv)?,
        t,
    })
}

/// Exact Fourier-side linear propagation over `dt`.
pub fn propagate_linear(state: &State, dt: f64) -> Result<State> {
    if dt < 0.0 {
        return Err(DwError::InvalidArgument(format!(
            "propagation step must be nonnegative, got {dt}"
        )));
    }
    let grid = state.grid().clone();
    let (mut u, mut v) = spectral_pair(state);
    let prop = Propagator::new(&grid, dt);
    prop.apply(&grid, &mut u, &mut v);
    materialize(&grid, &u, &v, state.t + dt)
}

/// |v|^p of a spectral field, dealiased on a 3/2 oversampled grid.
fn dealiased_power(grid: &Grid, v_hat: &[Complex64], p: f64) -> Vec<Complex64> {
    let n = grid.points_per_axis();
    let m = 3 * n / 2;
    let dim = grid.dim();
    let padded = pad_coeffs(v_hat, n, dim, m);
    let phys = inverse_raw(&padded, m, dim);
    let powed: Vec<f64> = phys.iter().map(|c| c.re.abs().powf(p)).collect();
    let back = forward_raw(&powed, m, dim);
    truncate_coeffs(&back, m, dim, n)
}

/// Pointwise |v|^p, evaluated on the oversampled grid and spectrally
/// truncated back.
pub fn nonlinearity(v: &Field, p: f64) -> Result<Field> {
    if !(p > 1.0) {
        return Err(DwError::InvalidArgument(format!(
            "nonlinearity exponent must exceed 1, got {p}"
        )));
    }
    let grid = v.grid().clone();
    let coeffs = dealiased_power(&grid, to_spectral(v).coeffs(), p);
    let mut sf = SpectralField::from_coeffs(grid, coeffs)?;
    sf.hermitian_project();
    to_physical(&sf)
}

/// One exponential-midpoint step: exact linear propagation plus the Duhamel
/// contribution of the nonlinearity evaluated at the linear midpoint.
pub fn step(state: &State, dt: f64, p: f64) -> Result<State> {
    if !(dt > 0.0 && dt <= DT_MAX) {
        return Err(DwError::InvalidArgument(format!(
            "step size must lie in (0, {DT_MAX}], got {dt}"
        )));
    }
    let grid = state.grid().clone();
    let (u, v) = spectral_pair(state);
    let half = Propagator::new(&grid, 0.5 * dt);
    let full = Propagator::new(&grid, dt);
    let out = step_spectral(&grid, &u, &v, p, &half, &full);
    let st = materialize(&grid, &out.0, &out.1, state.t + dt)?;
    if !st.u.is_finite() || !st.v.is_finite() {
        return Err(DwError::Instability { t: state.t + dt });
    }
    Ok(st)
}

fn step_spectral(
    grid: &Grid,
    u: &[Complex64],
    v: &[Complex64],
    p: f64,
    half: &Propagator,
    full: &Propagator,
) -> (Vec<Complex64>, Vec<Complex64>) {
    debug_assert!((2.0 * half.dt - full.dt).abs() < 1e-12 * full.dt);
    // midpoint predictor: linear half step plus an exponential-Euler estimate
    // of the half-interval Duhamel term (without it the scheme drops to
    // first order)
    let forcing0 = dealiased_power(grid, v, p);
    let mut u_mid = u.to_vec();
    let mut v_mid = v.to_vec();
    half.apply(grid, &mut u_mid, &mut v_mid);
    half.add_forcing(half.dt, &forcing0, &mut u_mid, &mut v_mid);
    let forcing = dealiased_power(grid, &v_mid, p);
    // full linear step, then dt * K(dt/2)-weighted forcing on u and
    // dt * K_t(dt/2)-weighted forcing on v
    let mut u_new = u.to_vec();
    let mut v_new = v.to_vec();
    full.apply(grid, &mut u_new, &mut v_new);
    half.add_forcing(full.dt, &forcing, &mut u_new, &mut v_new);
    (u_new, v_new)
}

/// Sampled trajectory of norm records plus the final state.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<NormSample>,
    pub weights: SpaceWeights,
    pub final_state: State,
}

impl Trajectory {
    pub fn x_norm(&self) -> Result<f64> {
        crate::spaces::x_norm(&self.samples, &self.weights)
    }

    pub fn y_norm(&self) -> Result<f64> {
        let series: Vec<(f64, f64)> = self.samples.iter().map(|s| (s.t, s.l2_v)).collect();
        crate::spaces::y_norm(&series)
    }
}

pub fn measure(state: &State, w: &SpaceWeights) -> Result<NormSample> {
    Ok(NormSample {
        t: state.t,
        l_alpha: lp_norm(&state.v, w.alpha),
        l2_v: lp_norm(&state.v, 2.0),
        hs_dot_v: sobolev_norm(&state.v, w.s, 2.0, true)?,
        l2_u: lp_norm(&state.u, 2.0),
        linf_v: lp_norm(&state.v, f64::INFINITY),
    })
}

/// Sample times uniform in log(1+t): 0 and `per_decade` points per decade of
/// (1+t) up to T.
pub fn log_schedule(t_end: f64, per_decade: usize) -> Vec<f64> {
    assert!(t_end >= 0.0);
    if t_end == 0.0 {
        return vec![0.0];
    }
    let decades = (1.0 + t_end).log10();
    let count = ((per_decade as f64 * decades).ceil() as usize).max(2);
    let mut times = Vec::with_capacity(count + 1);
    for i in 0..=count {
        let t = (1.0 + t_end).powf(i as f64 / count as f64) - 1.0;
        times.push(t);
    }
    times[0] = 0.0;
    let last = times.len() - 1;
    times[last] = t_end;
    times
}

fn check_wraparound(state: &State, t_end: f64) -> Result<()> {
    let radius = state.support_radius();
    let half_length = state.grid().half_length();
    if radius + t_end >= half_length {
        return Err(DwError::SupportViolation {
            radius,
            half_length,
            t_end,
        });
    }
    Ok(())
}

/// Evolve with `step` and record norm samples at the scheduled times.
///
/// The schedule must start at the initial time; intermediate stepping uses
/// `dt` with a shortened final step to land each sample exactly.
pub fn solve(
    state0: &State,
    t_end: f64,
    dt: f64,
    p: f64,
    sample_times: &[f64],
    w: &SpaceWeights,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt <= DT_MAX) {
        return Err(DwError::InvalidArgument(format!(
            "step size must lie in (0, {DT_MAX}], got {dt}"
        )));
    }
    check_wraparound(state0, t_end)?;
    let grid = state0.grid().clone();
    let (mut u, mut v) = spectral_pair(state0);
    let half = Propagator::new(&grid, 0.5 * dt);
    let full = Propagator::new(&grid, dt);

    let mut samples = Vec::with_capacity(sample_times.len());
    samples.push(measure(state0, w)?);
    let mut t = state0.t;
    let mut final_state = state0.clone();
    for &ts in sample_times.iter().skip(1) {
        if ts > t_end + 1e-12 {
            break;
        }
        while ts - t > 1e-9 {
            let this_dt = dt.min(ts - t);
            if (this_dt - dt).abs() < 1e-12 {
                let out = step_spectral(&grid, &u, &v, p, &half, &full);
                u = out.0;
                v = out.1;
            } else {
                let h2 = Propagator::new(&grid, 0.5 * this_dt);
                let f2 = Propagator::new(&grid, this_dt);
                let out = step_spectral(&grid, &u, &v, p, &h2, &f2);
                u = out.0;
                v = out.1;
            }
            t += this_dt;
            if u.iter().chain(v.iter()).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(DwError::Instability { t });
            }
        }
        t = ts;
        let st = materialize(&grid, &u, &v, t)?;
        samples.push(measure(&st, w)?);
        final_state = st;
    }
    Ok(Trajectory {
        samples,
        weights: *w,
        final_state,
    })
}

/// Exact linear trajectory (zero nonlinearity) at the given sample times.
pub fn linear_trajectory(state0: &State, sample_times: &[f64], w: &SpaceWeights) -> Result<Trajectory> {
    let grid = state0.grid().clone();
    let (mut u, mut v) = spectral_pair(state0);
    let mut samples = Vec::with_capacity(sample_times.len());
    samples.push(measure(state0, w)?);
    let mut t = state0.t;
    let mut final_state = state0.clone();
    for &ts in sample_times.iter().skip(1) {
        let prop = Propagator::new(&grid, ts - t);
        prop.apply(&grid, &mut u, &mut v);
        t = ts;
        let st = materialize(&grid, &u, &v, t)?;
        samples.push(measure(&st, w)?);
        final_state = st;
    }
    Ok(Trajectory {
        samples,
        weights: *w,
        final_state,
    })
}

/// Convergence record of the Picard recurrence.
#[derive(Debug, Clone)]
pub struct PicardReport {
    pub iterates: usize,
    /// ||v_{j+1} - v_j||_{Y(T)} per iterate.
    pub y_diffs: Vec<f64>,
    /// Successive quotients of `y_diffs`.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
}

struct PicardWorkspace {
    grid: Arc<Grid>,
    delta: f64,
    times: Vec<f64>,
    u_lin: Vec<Vec<Complex64>>,
    v_lin: Vec<Vec<Complex64>>,
    prop: Propagator,
}

impl PicardWorkspace {
    fn new(grid: Arc<Grid>, state0: &State, t_end: f64, nodes: usize) -> PicardWorkspace {
        let delta = t_end / (nodes - 1) as f64;
        let times: Vec<f64> = (0..nodes).map(|k| k as f64 * delta).collect();
        let prop = Propagator::new(&grid, delta);
        let (mut u, mut v) = spectral_pair(state0);
        let mut u_lin = Vec::with_capacity(nodes);
        let mut v_lin = Vec::with_capacity(nodes);
        u_lin.push(u.clone());
        v_lin.push(v.clone());
        for _ in 1..nodes {
            prop.apply(&grid, &mut u, &mut v);
            u_lin.push(u.clone());
            v_lin.push(v.clone());
        }
        PicardWorkspace {
            grid,
            delta,
            times,
            u_lin,
            v_lin,
            prop,
        }
    }

    /// One Picard sweep: v_next(t_k) = v_lin(t_k) + trapezoid Duhamel of the
    /// previous iterate's nonlinearity. The running integral pair is advanced
    /// with the exact propagator, which reproduces the composite trapezoid
    /// rule over the whole stored grid.
    fn sweep(&self, p: f64, v_prev: &[Vec<Complex64>]) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let nodes = self.times.len();
        let count = self.grid.node_count();
        let mut p_int = vec![Complex64::new(0.0, 0.0); count];
        let mut q_int = vec![Complex64::new(0.0, 0.0); count];
        let mut u_next = Vec::with_capacity(nodes);
        let mut v_next = Vec::with_capacity(nodes);
        u_next.push(self.u_lin[0].clone());
        v_next.push(self.v_lin[0].clone());
        let mut f_prev = dealiased_power(&self.grid, &v_prev[0], p);
        for k in 1..nodes {
            let f_cur = dealiased_power(&self.grid, &v_prev[k], p);
            self.prop.apply(&self.grid, &mut p_int, &mut q_int);
            // trapezoid contribution of [t_{k-1}, t_k]; the K(0) = 0 endpoint
            // only feeds the derivative integral
            let w = 0.5 * self.delta;
            self.prop.add_forcing(w, &f_prev, &mut p_int, &mut q_int);
            for i in 0..count {
                q_int[i] += w * f_cur[i];
            }
            let u_k: Vec<Complex64> = self.u_lin[k]
                .iter()
                .zip(p_int.iter())
                .map(|(a, b)| a + b)
                .collect();
            let v_k: Vec<Complex64> = self.v_lin[k]
                .iter()
                .zip(q_int.iter())
                .map(|(a, b)| a + b)
                .collect();
            u_next.push(u_k);
            v_next.push(v_k);
            f_prev = f_cur;
        }
        (u_next, v_next)
    }

    fn y_distance(&self, a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
        let vol = self.grid.volume();
        self.times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let s: f64 = a[k]
                    .iter()
                    .zip(b[k].iter())
                    .map(|(x, y)| (x - y).norm_sqr())
                    .sum();
                (1.0 + t) * (vol * s).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Global Picard recurrence u_j = N[u_{j-1}] on a uniform time grid, with
/// Y-norm difference monitoring.
pub fn picard_solve(
    state0: &State,
    t_end: f64,
    nodes: usize,
    p: f64,
    max_iter: usize,
    tol: f64,
    w: &SpaceWeights,
) -> Result<(Trajectory, PicardReport)> {
    if nodes < 3 {
        return Err(DwError::InvalidArgument(
            "picard time grid needs at least 3 nodes".into(),
        ));
    }
    if !(t_end > 0.0) {
        return Err(DwError::InvalidArgument("picard needs T > 0".into()));
    }
    check_wraparound(state0, t_end)?;
    let grid = state0.grid().clone();
    let ws = PicardWorkspace::new(grid.clone(), state0, t_end, nodes);

    // grid-doubling quadrature check on the first nontrivial Duhamel integral
    {
        let fine = PicardWorkspace::new(grid.clone(), state0, t_end, 2 * nodes - 1);
        let coarse_it = ws.sweep(p, &ws.v_lin);
        let fine_it = fine.sweep(p, &fine.v_lin);
        // compare at the shared final node
        let vol = grid.volume();
        let s: f64 = coarse_it.1[nodes - 1]
            .iter()
            .zip(fine_it.1[2 * nodes - 2].iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let err = (1.0 + t_end) * (vol * s).sqrt();
        // the iteration converges on the fixed quadrature grid either way, so
        // this guards against gross coarseness rather than matching the
        // contraction tolerance
        let limit = 100.0 * tol;
        if err > limit {
            return Err(DwError::Config(format!(
                "picard time grid too coarse: trapezoid grid-doubling error {err:.3e} \
                 exceeds {limit:.3e}"
            )));
        }
    }

    let zero = vec![vec![Complex64::new(0.0, 0.0); grid.node_count()]; nodes];
    let mut v_prev = zero;
    let mut u_cur: Vec<Vec<Complex64>> = Vec::new();
    let mut v_cur: Vec<Vec<Complex64>> = Vec::new();
    let mut y_diffs = Vec::new();
    let mut converged = false;
    let mut iterates = 0;
    for _ in 0..max_iter {
        let (u_next, v_next) = ws.sweep(p, &v_prev);
        let diff = ws.y_distance(&v_next, &v_prev);
        y_diffs.push(diff);
        v_prev = v_next.clone();
        u_cur = u_next;
        v_cur = v_next;
        iterates += 1;
        if diff < tol {
            converged = true;
            break;
        }
    }
    let ratios: Vec<f64> = y_diffs.windows(2).map(|w| w[1] / w[0]).collect();
    let report = PicardReport {
        iterates,
        y_diffs,
        ratios,
        converged,
        tol,
    };
    if !converged {
        return Err(DwError::NonConvergence {
            max_iter,
            last_diff: *report.y_diffs.last().unwrap_or(&f64::NAN),
        });
    }

    let mut samples = Vec::with_capacity(nodes);
    let mut final_state = state0.clone();
    for k in 0..nodes {
        let st = materialize(&grid, &u_cur[k], &v_cur[k], ws.times[k])?;
        samples.push(measure(&st, w)?);
        if k == nodes - 1 {
            final_state = st;
        }
    }
    Ok((
        Trajectory {
            samples,
            weights: *w,
            final_state,
        },
        report,
    ))
}

/// v-trajectory of the first Picard iterate (the linear solution), for
/// cross-checks against `propagate_linear`.
pub fn picard_first_iterate(state0: &State, t_end: f64, nodes: usize) -> Result<Vec<State>> {
    let grid = state0.grid().clone();
    let ws = PicardWorkspace::new(grid.clone(), state0, t_end, nodes);
    (0..nodes)
        .map(|k| materialize(&grid, &ws.u_lin[k], &ws.v_lin[k], ws.times[k]))
        .collect()
}
