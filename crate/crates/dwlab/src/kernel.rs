//! Closed-form evaluation of the linear kernel symbol and its time
//! derivatives, plus the low/high frequency cutoff pair.
//!
//! For each frequency the symbol solves `y'' + y' + |xi|^2 y = 0` with
//! `y(0) = 0`, `y'(0) = 1`. Writing `z = 1/4 - |xi|^2`, the solution is
//! `exp(-t/2) * S(t, z)` with `S = sinh(t sqrt(z))/sqrt(z)` on the low branch
//! and `sin(t sqrt(-z))/sqrt(-z)` on the oscillatory branch. The damped
//! exponential is always folded into the hyperbolic functions so neither
//! factor can overflow: both combined exponents `t(sqrt(z) -+ 1/2)` are
//! nonpositive since `sqrt(z) <= 1/2`.

/// Below this value of `t^2 |z|` the branch formulas lose digits to
/// cancellation; a short Taylor series in `t^2 z` takes over.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Kernel symbol and derivatives at one `(t, |xi|^2)` point.
#[derive(Debug, Clone, Copy)]
pub struct KernelValues {
    /// K(t, xi)
    pub k: f64,
    /// d/dt K
    pub k_dt: f64,
    /// d2/dt2 K, from the closed form (z + 1/4) S - C (not the ODE identity).
    pub k_dtt: f64,
}

/// Evaluate `e^{-t/2} S` and `e^{-t/2} C` where `S = sinh(t sqrt(z))/sqrt(z)`
/// and `C = cosh(t sqrt(z))` (trigonometric for z < 0).
fn damped_sc(t: f64, z: f64) -> (f64, f64) {
    if t * t * z.abs() < SERIES_THRESHOLD {
        // S = t (1 + y/6 + y^2/120 + y^3/5040), C = 1 + y/2 + y^2/24 + y^3/720
        // with y = t^2 z; valid for either sign of z.
        let y = t * t * z;
        let s = t * (1.0 + y / 6.0 + y * y / 120.0 + y * y * y / 5040.0);
        let c = 1.0 + y / 2.0 + y * y / 24.0 + y * y * y / 720.0;
        let e = (-0.5 * t).exp();
        (e * s, e * c)
    } else if z > 0.0 {
        let sq = z.sqrt();
        let ep = (t * (sq - 0.5)).exp();
        let em = (-t * (sq + 0.5)).exp();
        (0.5 * (ep - em) / sq, 0.5 * (ep + em))
    } else {
        let w = (-z).sqrt();
        let e = (-0.5 * t).exp();
        (e * (t * w).sin() / w, e * (t * w).cos())
    }
}

/// Kernel symbol and both time derivatives, closed form.
///
/// Panics on `t < 0` or `xi_sq < 0`.
pub fn kernel_values(t: f64, xi_sq: f64) -> KernelValues {
    assert!(t >= 0.0, "kernel time must be nonnegative, got {t}");
    assert!(xi_sq >= 0.0, "|xi|^2 must be nonnegative, got {xi_sq}");
    let z = 0.25 - xi_sq;
    let (es, ec) = damped_sc(t, z);
    KernelValues {
        k: es,
        k_dt: ec - 0.5 * es,
        k_dtt: (z + 0.25) * es - ec,
    }
}

/// K(t, xi).
pub fn k_hat(t: f64, xi_sq: f64) -> f64 {
    kernel_values(t, xi_sq).k
}

/// d/dt K(t, xi).
pub fn k_hat_dt(t: f64, xi_sq: f64) -> f64 {
    kernel_values(t, xi_sq).k_dt
}

/// d2/dt2 K(t, xi) via the governing identity `K'' = -K' - |xi|^2 K`.
pub fn k_hat_dtt(t: f64, xi_sq: f64) -> f64 {
    let v = kernel_values(t, xi_sq);
    -v.k_dt - xi_sq * v.k
}

/// Smooth low/high frequency cutoff pair.
///
/// `chi_low` is 1 on `[0, eps_star/2]`, 0 on `[eps_star, inf)`, with a quintic
/// smoothstep transition; `chi_high = 1 - chi_low` exactly.
#[derive(Debug, Clone, Copy)]
pub struct CutoffSpec {
    pub eps_star: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        // Keeps the low band strictly inside |xi| < 1/2.
        CutoffSpec { eps_star: 0.25 }
    }
}

impl CutoffSpec {
    pub fn new(eps_star: f64) -> Self {
        assert!(eps_star > 0.0, "eps_star must be positive");
        CutoffSpec { eps_star }
    }

    pub fn chi_low(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let lo = 0.5 * self.eps_star;
        if r <= lo {
            1.0
        } else if r >= self.eps_star {
            0.0
        } else {
            let theta = (r - lo) / lo;
            let s = theta * theta * theta * (10.0 + theta * (-15.0 + 6.0 * theta));
            1.0 - s
        }
    }

    pub fn chi_high(&self, r: f64) -> f64 {
        1.0 - self.chi_low(r)
    }
}
