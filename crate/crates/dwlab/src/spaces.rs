//! Numerical evaluation of the norms the analysis is phrased in: Lebesgue,
//! homogeneous/inhomogeneous Sobolev, and the time-weighted trajectory norms
//! X(T) and Y(T).
//!
//! Fractional Sobolev norms with Lebesgue index r != 2 are computed as the
//! multiplier-then-quadrature surrogate (apply the Fourier symbol, transform
//! back, take the L^r quadrature norm); for r = 2 the value is exact discrete
//! Plancherel.

use crate::error::{DwError, Result};
use crate::grid::{abs_symbol, apply_symbol, bracket_symbol, to_physical, to_spectral, Field};

/// Rectangle-rule L^q norm; grid max for q = infinity.
pub fn lp_norm(f: &Field, q: f64) -> f64 {
    assert!(q >= 1.0, "L^q norm needs q >= 1, got {q}");
    if q.is_infinite() {
        return f.max_abs();
    }
    let w = f.grid().node_weight();
    let sum: f64 = f.values().iter().map(|v| v.abs().powf(q)).sum();
    (w * sum).powf(1.0 / q)
}

/// Sobolev norm via the Fourier multiplier |xi|^s (homogeneous) or <xi>^s
/// (inhomogeneous), then the L^r quadrature norm.
///
/// `s >= 0` is required for the homogeneous symbol; the inhomogeneous bracket
/// symbol accepts any real s.
pub fn sobolev_norm(f: &Field, s: f64, r: f64, homogeneous: bool) -> Result<f64> {
    if homogeneous && s < 0.0 {
        return Err(DwError::InvalidArgument(format!(
            "homogeneous Sobolev norm needs s >= 0, got {s}"
        )));
    }
    if !(r > 1.0) {
        return Err(DwError::InvalidArgument(format!(
            "Sobolev norm needs r in (1, inf), got {r}"
        )));
    }
    let sf = to_spectral(f);
    let filtered = if homogeneous {
        apply_symbol(&sf, abs_symbol(s))?
    } else {
        apply_symbol(&sf, bracket_symbol(s))?
    };
    if r == 2.0 {
        // exact discrete Plancherel
        return Ok(filtered.l2_norm());
    }
    Ok(lp_norm(&to_physical(&filtered)?, r))
}

/// Exponents entering the X(T) weights.
#[derive(Debug, Clone, Copy)]
pub struct SpaceWeights {
    pub n: u32,
    pub alpha: f64,
    pub s: f64,
}

impl SpaceWeights {
    /// (1+t)^{(n/2)(1 - 1/alpha) + 1}
    pub fn weight_l_alpha(&self, t: f64) -> f64 {
        (1.0 + t).powf(0.5 * self.n as f64 * (1.0 - 1.0 / self.alpha) + 1.0)
    }

    /// (1+t)^{n/4 + 1 + s/2}
    pub fn weight_hs(&self, t: f64) -> f64 {
        (1.0 + t).powf(0.25 * self.n as f64 + 1.0 + 0.5 * self.s)
    }
}

/// Per-sample norm record of the time-derivative field, as stored in
/// trajectories.
#[derive(Debug, Clone, Copy)]
pub struct NormSample {
    pub t: f64,
    /// ||v||_{L^alpha}
    pub l_alpha: f64,
    /// ||v||_{L^2}
    pub l2_v: f64,
    /// ||v||_{dot H^s} (r = 2)
    pub hs_dot_v: f64,
    /// ||u||_{L^2}
    pub l2_u: f64,
    /// ||v||_{L^inf}
    pub linf_v: f64,
}

/// X(T) norm over a sampled trajectory of v-norms.
pub fn x_norm(samples: &[NormSample], w: &SpaceWeights) -> Result<f64> {
    if samples.is_empty() {
        return Err(DwError::InvalidArgument("empty trajectory".into()));
    }
    Ok(samples
        .iter()
        .map(|s| w.weight_l_alpha(s.t) * s.l_alpha + w.weight_hs(s.t) * s.hs_dot_v)
        .fold(0.0_f64, f64::max))
}

/// Y(T) norm: sup over samples of (1+t) ||v||_{L^2}.
pub fn y_norm(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(DwError::InvalidArgument("empty trajectory".into()));
    }
    Ok(samples
        .iter()
        .map(|&(t, l2)| (1.0 + t) * l2)
        .fold(0.0_f64, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const PI: f64 = std::f64::consts::PI;

    fn random_field(g: &std::sync::Arc<Grid>, rng: &mut StdRng) -> Field {
        let vals: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::new(g.clone(), vals).unwrap()
    }

    #[test]
    fn constant_l2_norm() {
        let g = Grid::new(1, 64, PI).unwrap();
        let f = Field::from_fn(g, |_| 1.0);
        assert!((lp_norm(&f, 2.0) - (2.0 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn l2_matches_parseval() {
        let mut rng = StdRng::seed_from_u64(1);
        let g = Grid::new(1, 64, 2.0).unwrap();
        let f = random_field(&g, &mut rng);
        let spec = crate::grid::to_spectral(&f).l2_norm();
        assert!((lp_norm(&f, 2.0) - spec).abs() < 1e-10 * spec);
    }

    #[test]
    fn linf_of_cosine() {
        let g = Grid::new(1, 64, PI).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos());
        assert_eq!(lp_norm(&f, f64::INFINITY), 1.0);
    }

    #[test]
    fn sobolev_single_eigenmode() {
        // |nabla| cos(2x) has eigenvalue 2; ||cos 2x||_{L^2} = sqrt(pi)
        let g = Grid::new(1, 64, PI).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * x[0]).cos());
        let hs = sobolev_norm(&f, 1.0, 2.0, true).unwrap();
        assert!((hs - 2.0 * PI.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn sobolev_zero_order_is_lp() {
        let mut rng = StdRng::seed_from_u64(2);
        let g = Grid::new(1, 64, 3.0).unwrap();
        let f = random_field(&g, &mut rng);
        for r in [1.5, 2.0, 4.0] {
            let a = sobolev_norm(&f, 0.0, r, true).unwrap();
            let b = lp_norm(&f, r);
            assert!((a - b).abs() < 1e-10 * b);
        }
    }

    #[test]
    fn gaussian_h1_against_continuum_quadrature() {
        // g(x) = exp(-x^2/2), ghat(xi) = exp(-xi^2/2) under the unitary
        // transform; oracle = sqrt( (1/2pi) * int xi^2 |ghat_c|^2 dxi ) with
        // ghat_c = sqrt(2 pi) exp(-xi^2 / 2) the amplitude-convention
        // transform. In closed form ||g'||_{L^2}^2 = sqrt(pi)/2.
        // Independent quadrature oracle of the continuum integral:
        let mut oracle_sq = 0.0;
        let dxi = 1e-4;
        let mut xi = -30.0f64;
        while xi < 30.0 {
            let ghat = (2.0 * PI).sqrt() * (-0.5 * xi * xi).exp();
            oracle_sq += xi * xi * ghat * ghat * dxi;
            xi += dxi;
        }
        oracle_sq /= 2.0 * PI;
        let oracle = oracle_sq.sqrt();
        let g = Grid::new(1, 256, 16.0).unwrap();
        let f = Field::from_fn(g, |x| (-0.5 * x[0] * x[0]).exp());
        let hs = sobolev_norm(&f, 1.0, 2.0, true).unwrap();
        assert!(
            (hs - oracle).abs() < 1e-4 * oracle,
            "grid {hs} vs continuum {oracle}"
        );
    }

    #[test]
    fn x_norm_single_sample_and_sup() {
        let w = SpaceWeights {
            n: 1,
            alpha: 2.0,
            s: 1.0,
        };
        let s0 = NormSample {
            t: 0.0,
            l_alpha: 0.7,
            l2_v: 0.7,
            hs_dot_v: 0.3,
            l2_u: 0.0,
            linf_v: 0.0,
        };
        // weights are 1 at t = 0
        assert!((x_norm(&[s0], &w).unwrap() - 1.0).abs() < 1e-15);
        // a later zero sample cannot raise the sup
        let s1 = NormSample {
            t: 5.0,
            l_alpha: 0.0,
            l2_v: 0.0,
            hs_dot_v: 0.0,
            l2_u: 0.0,
            linf_v: 0.0,
        };
        assert!((x_norm(&[s0, s1], &w).unwrap() - 1.0).abs() < 1e-15);
        // positive homogeneity
        let scaled = NormSample {
            l_alpha: 3.0 * s0.l_alpha,
            hs_dot_v: 3.0 * s0.hs_dot_v,
            ..s0
        };
        assert!((x_norm(&[scaled], &w).unwrap() - 3.0).abs() < 1e-14);
        assert!(x_norm(&[], &w).is_err());
    }

    #[test]
    fn y_norm_weights() {
        assert!((y_norm(&[(0.0, 0.5)]).unwrap() - 0.5).abs() < 1e-15);
        assert!((y_norm(&[(1.0, 0.5)]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(y_norm(&[(0.0, 0.0), (2.0, 0.0)]).unwrap(), 0.0);
        assert!(y_norm(&[]).is_err());
    }

    #[test]
    fn triangle_inequality_and_homogeneity() {
        let mut rng = StdRng::seed_from_u64(3);
        let g = Grid::new(1, 64, 2.0).unwrap();
        for _ in 0..20 {
            let a = random_field(&g, &mut rng);
            let b = random_field(&g, &mut rng);
            let sum = Field::new(
                g.clone(),
                a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect(),
            )
            .unwrap();
            for q in [1.0, 1.5, 2.0, 3.0] {
                assert!(lp_norm(&sum, q) <= lp_norm(&a, q) + lp_norm(&b, q) + 1e-10);
            }
            let c = rng.gen_range(-3.0..3.0);
            assert!((lp_norm(&a.scaled(c), 2.0) - c.abs() * lp_norm(&a, 2.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn lp_monotone_in_q_volume_normalized() {
        let mut rng = StdRng::seed_from_u64(4);
        let g = Grid::new(1, 64, 2.0).unwrap();
        let vol = g.volume();
        for _ in 0..20 {
            let f = random_field(&g, &mut rng);
            let mut prev = 0.0;
            for q in [1.0, 1.5, 2.0, 3.0, 6.0] {
                let v = lp_norm(&f, q) * vol.powf(-1.0 / q);
                assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }

    #[test]
    fn homogeneous_plus_l2_vs_inhomogeneous() {
        // pointwise in xi, (1 + a^s)/(1 + a)^s with a = xi^2 ranges over
        // [min(1, 2^{1-s}), max(1, 2^{1-s})], with the extreme at a = 1
        let mut rng = StdRng::seed_from_u64(5);
        let g = Grid::new(1, 64, 2.0).unwrap();
        for s in [0.5, 1.0, 1.5] {
            let b = 2.0_f64.powf(1.0 - s);
            let (lo, hi) = (b.min(1.0), b.max(1.0));
            for _ in 0..10 {
                let f = random_field(&g, &mut rng);
                let num = sobolev_norm(&f, s, 2.0, true).unwrap().powi(2)
                    + lp_norm(&f, 2.0).powi(2);
                let den = sobolev_norm(&f, s, 2.0, false).unwrap().powi(2);
                let ratio = num / den;
                assert!(ratio >= lo - 1e-10 && ratio <= hi + 1e-10, "s={s} ratio={ratio}");
            }
        }
    }
}
