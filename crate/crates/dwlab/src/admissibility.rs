//! Executable bookkeeping for every exponent and auxiliary parameter the
//! global existence argument needs, with validation of the full constraint
//! list.

use std::fmt;

use crate::error::{DwError, Result};

/// Full exponent record for a dimension/exponent pair (n, p).
#[derive(Debug, Clone)]
pub struct AdmissibleParams {
    pub n: u32,
    pub p: f64,
    pub alpha: f64,
    pub beta_alpha: f64,
    pub delta_alpha: f64,
    pub s: f64,
    pub kappa: f64,
    pub r1: f64,
    pub r2: f64,
    pub gamma: f64,
    pub m: f64,
    pub d: f64,
    /// Empirical smallness bound, filled by the Picard experiment.
    pub eps0: Option<f64>,
}

/// Optional overrides for the artifact's default parameter choices.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub s: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_inv: Option<f64>,
}

/// One checked constraint with its computed slack (pass iff slack >= 0,
/// strict constraints demand slack > 0).
#[derive(Debug, Clone)]
pub struct ConstraintCheck {
    pub name: String,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<ConstraintCheck>,
    pub pass: bool,
}

impl ValidationReport {
    pub fn first_failure(&self) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| !c.pass)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<58} {:>14} {:>6}", "constraint", "slack", "pass")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<58} {:>14.6e} {:>6}",
                c.name,
                c.slack,
                if c.pass { "ok" } else { "FAIL" }
            )?;
        }
        writeln!(f, "overall: {}", if self.pass { "pass" } else { "FAIL" })
    }
}

fn omega0(p: &AdmissibleParams, sigma: f64) -> f64 {
    let denom = 1.0 / p.alpha - 0.5 + p.s / p.n as f64;
    (1.0 / p.alpha - 1.0 / (p.p * sigma)) / denom
}

impl AdmissibleParams {
    /// Interpolation exponent omega_0(sigma) from the nonlinearity estimate.
    pub fn omega0(&self, sigma: f64) -> f64 {
        omega0(self, sigma)
    }

    pub fn omega1(&self) -> f64 {
        let denom = 1.0 / self.alpha - 0.5 + self.s / self.n as f64;
        (1.0 / self.alpha - 1.0 / self.r1) / denom
    }

    pub fn omega2(&self) -> f64 {
        let denom = 1.0 / self.alpha - 0.5 + self.s / self.n as f64;
        (1.0 / self.alpha - 1.0 / self.r2 + self.beta_alpha / self.n as f64) / denom
    }

    /// Theoretical decay exponent of ||u_t||_{L^alpha}: -(n/2)(1 - 1/alpha) - 1.
    pub fn l_alpha_decay_exponent(&self) -> f64 {
        -0.5 * self.n as f64 * (1.0 - 1.0 / self.alpha) - 1.0
    }

    /// Theoretical decay exponent of ||u_t||_{dot H^s}: -n/4 - 1 - s/2.
    pub fn hs_decay_exponent(&self) -> f64 {
        -0.25 * self.n as f64 - 1.0 - 0.5 * self.s
    }

    pub fn space_weights(&self) -> crate::spaces::SpaceWeights {
        crate::spaces::SpaceWeights {
            n: self.n,
            alpha: self.alpha,
            s: self.s,
        }
    }
}

impl fmt::Display for AdmissibleParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:>14}", "param", "value")?;
        let rows: &[(&str, f64)] = &[
            ("n", self.n as f64),
            ("p", self.p),
            ("alpha", self.alpha),
            ("beta_alpha", self.beta_alpha),
            ("delta_alpha", self.delta_alpha),
            ("s", self.s),
            ("kappa", self.kappa),
            ("r1", self.r1),
            ("r2", self.r2),
            ("gamma", self.gamma),
            ("m", self.m),
            ("d", self.d),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<12} {v:>14.8}")?;
        }
        if let Some(e) = self.eps0 {
            writeln!(f, "{:<12} {:>14.8}", "eps0", e)?;
        }
        Ok(())
    }
}

/// Fill the full exponent record from (n, p) and optional overrides, then
/// validate it. Only validated records are returned.
pub fn derive_params(n: u32, p: f64, overrides: Overrides) -> Result<AdmissibleParams> {
    if !(n == 1 || n == 2) {
        return Err(DwError::Admissibility(format!(
            "n = {n} is out of scope: the global existence range p > n/2 is only \
             resolved for n = 1, 2 here (higher dimensions remain open)"
        )));
    }
    let nf = n as f64;
    let p_floor = 1.0_f64.max(0.5 * nf);
    if !(p > p_floor) {
        return Err(DwError::Admissibility(format!(
            "hypothesis p > max{{1, n/2}} fails: need p > {p_floor}, got p = {p}"
        )));
    }
    let alpha = 2.0_f64.min(p);
    let beta_alpha = (nf - 1.0) * (1.0 / alpha - 0.5);
    let delta_alpha = nf * (1.0 / alpha - 0.5);
    let s = overrides.s.unwrap_or_else(|| (0.5 * (0.5 * nf + p)).min(0.5 * nf + 1.0));

    // kappa must sit below every one-sided bound it enters.
    let denom = 1.0 / alpha - 0.5 + s / nf;
    let kappa_bounds = [
        1.0 / alpha,                        // r2 > 0
        p - 1.0,                            // r1 > 1
        (p - 1.0) / alpha,                  // omega1 >= 0
        nf * (p - 1.0) / 4.0,               // d > 0
        p + 0.5 * nf * (p - 1.0) - 1.0,     // integrability with the +kappa term
        denom - beta_alpha / nf,            // omega2 <= 1
    ];
    let kappa_cap = kappa_bounds.iter().cloned().fold(f64::INFINITY, f64::min);
    let kappa = overrides.kappa.unwrap_or_else(|| 0.01_f64.min(0.5 * kappa_cap));

    let gamma_inv = overrides
        .gamma_inv
        .unwrap_or_else(|| 0.5 * 0.5_f64.min((p - 1.0) / alpha));
    let gamma = 1.0 / gamma_inv;
    let m = 1.0 / (0.5 + gamma_inv);
    let r1 = (p - 1.0) / kappa;
    let r2 = 1.0 / (1.0 / alpha - kappa);
    let d = 0.5 * nf - 2.0 * kappa / (p - 1.0);

    let params = AdmissibleParams {
        n,
        p,
        alpha,
        beta_alpha,
        delta_alpha,
        s,
        kappa,
        r1,
        r2,
        gamma,
        m,
        d,
        eps0: None,
    };
    let report = validate(&params);
    if let Some(fail) = report.first_failure() {
        return Err(DwError::Admissibility(format!(
            "constraint failed: {} (slack {:.3e})",
            fail.name, fail.slack
        )));
    }
    Ok(params)
}

/// Check every constraint of the exponent bookkeeping, reporting slack per
/// inequality. Failures become report entries, never errors.
pub fn validate(p: &AdmissibleParams) -> ValidationReport {
    let nf = p.n as f64;
    let mut checks = Vec::new();
    let mut strict = |name: &str, slack: f64| {
        checks.push(ConstraintCheck {
            name: name.to_string(),
            slack,
            pass: slack > 0.0,
        });
    };

    let p_floor = 1.0_f64.max(0.5 * nf);
    strict("p > max{1, n/2}", p.p - p_floor);
    strict(
        "alpha = min{2, p}",
        1e-12 - (p.alpha - 2.0_f64.min(p.p)).abs(),
    );
    strict(
        "beta_alpha = (n-1)(1/alpha - 1/2)",
        1e-12 - (p.beta_alpha - (nf - 1.0) * (1.0 / p.alpha - 0.5)).abs(),
    );
    strict(
        "delta_alpha = n(1/alpha - 1/2)",
        1e-12 - (p.delta_alpha - nf * (1.0 / p.alpha - 0.5)).abs(),
    );
    strict("s > n/2", p.s - 0.5 * nf);
    strict("s < p", p.p - p.s);
    strict("kappa > 0", p.kappa);
    strict(
        "1/r1 = kappa/(p-1)",
        1e-12 - (1.0 / p.r1 - p.kappa / (p.p - 1.0)).abs(),
    );
    strict(
        "1/r2 = 1/alpha - kappa (r2 > 1 finite)",
        1e-12 - (1.0 / p.r2 - (1.0 / p.alpha - p.kappa)).abs(),
    );
    strict("r1 > 1", p.r1 - 1.0);
    strict("r2 > 1", p.r2 - 1.0);
    strict("r2 > 0", p.r2);
    strict(
        "1/gamma in (0, min{1/2, (p-1)/alpha})",
        (0.5_f64.min((p.p - 1.0) / p.alpha) - 1.0 / p.gamma).min(1.0 / p.gamma),
    );
    strict(
        "1/m = 1/2 + 1/gamma",
        1e-12 - (1.0 / p.m - 0.5 - 1.0 / p.gamma).abs(),
    );
    strict("m in (1, 2)", (p.m - 1.0).min(2.0 - p.m));
    strict("d = n/2 - 2 kappa/(p-1) > 0", p.d);
    strict("d < n/2", 0.5 * nf - p.d);
    for sigma in [1.0, p.alpha, 2.0] {
        let w = p.omega0(sigma);
        strict(
            &format!("omega0(sigma={sigma}) in [0, 1]"),
            w.min(1.0 - w) + 1e-12,
        );
    }
    let w1 = p.omega1();
    strict("omega1 in [0, 1]", w1.min(1.0 - w1) + 1e-12);
    let w2 = p.omega2();
    strict("omega2 in [0, 1]", w2.min(1.0 - w2) + 1e-12);
    strict(
        "-p - (n/2)(p-1) < -1",
        -1.0 - (-p.p - 0.5 * nf * (p.p - 1.0)),
    );
    strict(
        "-p - (n/2)(p - 1/m - 1/2) < -1",
        -1.0 - (-p.p - 0.5 * nf * (p.p - 1.0 / p.m - 0.5)),
    );
    strict(
        "-p - (n/2)(p-1) + kappa < -1",
        -1.0 - (-p.p - 0.5 * nf * (p.p - 1.0) + p.kappa),
    );

    let pass = checks.iter().all(|c| c.pass);
    ValidationReport { checks, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_n1_p2() {
        let p = derive_params(1, 2.0, Overrides::default()).unwrap();
        assert_eq!(p.alpha, 2.0);
        assert_eq!(p.beta_alpha, 0.0);
        assert_eq!(p.delta_alpha, 0.0);
        assert!((p.s - 1.25).abs() < 1e-14);
        let report = validate(&p);
        assert!(report.pass);
        // slack of -p - (n/2)(p-1) + 1: direct arithmetic -2 - 0.5 + 1 = -1.5,
        // i.e. the constraint passes with slack 1.5
        let c = report
            .checks
            .iter()
            .find(|c| c.name == "-p - (n/2)(p-1) < -1")
            .unwrap();
        assert!((c.slack - 1.5).abs() < 1e-12);
    }

    #[test]
    fn derive_n2_p15() {
        let p = derive_params(2, 1.5, Overrides::default()).unwrap();
        assert!((p.alpha - 1.5).abs() < 1e-14);
        assert!((p.beta_alpha - 1.0 / 6.0).abs() < 1e-14);
        assert!((p.delta_alpha - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn reject_small_p() {
        let err = derive_params(2, 0.9, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("p > max{1, n/2}"));
    }

    #[test]
    fn reject_high_dimension() {
        assert!(derive_params(3, 1.2, Overrides::default()).is_err());
    }

    #[test]
    fn tampered_kappa_fails() {
        // kappa = 0.5 with p = 1.1, alpha = 1.1 pushes 1/r2 = 1/alpha - kappa
        // into r2 <= 1 / omega territory; brute-force scan of the invariant
        // list must flag it.
        let mut p = derive_params(1, 1.1, Overrides::default()).unwrap();
        p.kappa = 0.5;
        p.r1 = (p.p - 1.0) / p.kappa; // 0.2 < 1
        p.r2 = 1.0 / (1.0 / p.alpha - p.kappa);
        p.d = 0.5 - 2.0 * p.kappa / (p.p - 1.0);
        let report = validate(&p);
        assert!(!report.pass);
        assert!(report.checks.iter().any(|c| !c.pass
            && (c.name.contains("r1 > 1") || c.name.contains("r2") || c.name.contains("d"))));
    }

    #[test]
    fn s_at_boundary_fails() {
        let mut p = derive_params(1, 2.0, Overrides::default()).unwrap();
        p.s = 0.5; // = n/2
        let report = validate(&p);
        assert!(!report.pass);
        assert!(report
            .checks
            .iter()
            .any(|c| !c.pass && c.name == "s > n/2"));
    }

    #[test]
    fn lattice_sweep_passes() {
        // executable form of: global solution for all p > 1 when n = 1, 2
        for n in [1u32, 2] {
            let mut p = 1.05;
            while p <= 4.0 + 1e-9 {
                let params = derive_params(n, p, Overrides::default())
                    .unwrap_or_else(|e| panic!("n={n} p={p}: {e}"));
                assert!(validate(&params).pass, "n={n} p={p}");
                p += 0.05;
            }
        }
    }

    #[test]
    fn omega0_at_alpha_numerator() {
        // omega0(sigma = alpha) has numerator (1/alpha)(1 - 1/p)
        for (n, p) in [(1u32, 1.3), (1, 2.5), (2, 1.7), (2, 3.0)] {
            let params = derive_params(n, p, Overrides::default()).unwrap();
            let denom = 1.0 / params.alpha - 0.5 + params.s / n as f64;
            let expect = (1.0 / params.alpha) * (1.0 - 1.0 / p) / denom;
            assert!((params.omega0(params.alpha) - expect).abs() < 1e-12);
            assert!((0.0..=1.0).contains(&params.omega0(params.alpha)));
        }
    }

    #[test]
    fn kappa_monotone_one_sided() {
        // shrinking kappa toward 0 never turns a passing record failing
        for (n, p) in [(1u32, 1.2), (1, 3.0), (2, 1.1), (2, 2.0)] {
            let base = derive_params(n, p, Overrides::default()).unwrap();
            assert!(validate(&base).pass);
            let mut kappa = base.kappa;
            for _ in 0..6 {
                kappa *= 0.5;
                let smaller = derive_params(
                    n,
                    p,
                    Overrides {
                        kappa: Some(kappa),
                        ..Overrides::default()
                    },
                )
                .unwrap();
                assert!(validate(&smaller).pass, "n={n} p={p} kappa={kappa}");
            }
        }
    }
}
