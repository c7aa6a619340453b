//! Convergence experiments and spectral diagnostics.

use serde::{Deserialize, Serialize};

use crate::algebra::{eig2, exp_herm, EigHint, Mat2};
use crate::coinwalk::{walk_k, JetMode, KGrid, WalkConfig};
use crate::error::{Error, Result};
use crate::limits::{check_time_limit, time_hamiltonian, TimeHamiltonian};
use crate::plastic::{check_plastic, generator_symbol, spacetime_hamiltonian};
use crate::RationalExp;

/// Unitarity tolerance for every compared propagator.
pub const UNITARY_TOL: f64 = 1e-11;

/// Least-squares line through `(ln ε, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_order(samples: &[(f64, f64)]) -> Result<Fit> {
    if samples.len() < 3 {
        return Err(Error::EmptyInput("a fit needs at least three samples"));
    }
    if samples.iter().any(|&(_, e)| e <= 0.0 || e.is_nan()) {
        return Err(Error::BelowFloatingFloor);
    }
    let n = samples.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().map(|&(e, r)| (e.ln(), r.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::EmptyInput("a fit needs distinct eps values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceResult {
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl ConvergenceResult {
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        let fit = fit_order(&samples)?;
        Ok(Self {
            samples,
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
        })
    }

    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].1 < w[0].1)
    }
}

/// `2⁻⁶, 2⁻⁷, ..., 2⁻¹²`.
pub fn default_eps_list() -> Vec<f64> {
    (6..=12).map(|j| 2f64.powi(-j)).collect()
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::EmptyInput("eps list is empty"));
    }
    if eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::InvalidConfig("eps values must be positive".into()));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidConfig("eps values must be strictly decreasing".into()));
    }
    Ok(())
}

fn unitary(m: Mat2) -> Result<Mat2> {
    let residual = m.unitarity_residual();
    if residual > UNITARY_TOL {
        return Err(Error::NonUnitary { residual });
    }
    Ok(m)
}

/// `(ε, max_k ‖Ŵ^{τn} - e^{-iĤτnε}‖)` with `n = round(T/(τε))`, for any Hamiltonian.
pub fn time_errors(
    cfg: &WalkConfig,
    hamiltonian: &TimeHamiltonian,
    t_final: f64,
    grid: &KGrid,
    eps_list: &[f64],
) -> Result<Vec<(f64, f64)>> {
    check_eps_list(eps_list)?;
    let points = grid.points();
    let tau = cfg.tau as u64;
    eps_list
        .iter()
        .map(|&eps| {
            let n = (t_final / (tau as f64 * eps)).round() as u64;
            let t = (tau * n) as f64 * eps;
            let per_k = grid.exec.map(&points, |&(kx, ky)| -> Result<f64> {
                let w = unitary(walk_k(cfg, kx, ky, eps).powu(tau * n))?;
                let u = unitary(exp_herm(&hamiltonian.symbol(kx, ky), t)?)?;
                Ok((w - u).op_norm())
            });
            let worst = per_k.into_iter().try_fold(0.0, |acc: f64, e| e.map(|e| acc.max(e)))?;
            Ok((eps, worst))
        })
        .collect()
}

/// Convergence of the stroboscopic walk to the continuous-time Hamiltonian evolution.
pub fn time_convergence(cfg: &WalkConfig, t_final: f64, grid: &KGrid, eps_list: &[f64]) -> Result<ConvergenceResult> {
    cfg.require_mode(JetMode::Time)?;
    check_eps_list(eps_list)?;
    let report = check_time_limit(cfg).into_result()?;
    let nu = report.witness("nu").expect("passed report carries nu") as u8;
    let h = time_hamiltonian(cfg, nu)?;
    ConvergenceResult::from_samples(time_errors(cfg, &h, t_final, grid, eps_list)?)
}

/// `(ε, max_κ ‖Ŵ(κε^a, ε)^{2n} - exp(G(κ)·2nε)‖)` with `n = round(T/(2ε))`.
///
/// `generator` is evaluated at physical momenta. No constraint checks: this is
/// also the negative-control path for divergent configurations.
pub fn spacetime_errors<F>(
    cfg: &WalkConfig,
    generator: F,
    t_final: f64,
    momenta: &[(f64, f64)],
    eps_list: &[f64],
    exec: crate::Execution,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64, f64) -> Mat2 + Sync + Send,
{
    check_eps_list(eps_list)?;
    if momenta.is_empty() {
        return Err(Error::EmptyInput("momentum list is empty"));
    }
    eps_list
        .iter()
        .map(|&eps| {
            let n = (t_final / (2.0 * eps)).round() as u64;
            let t = 2.0 * n as f64 * eps;
            let per_k = exec.map(momenta, |&(kx, ky)| -> Result<f64> {
                let w = unitary(walk_k(cfg, kx, ky, eps).powu(2 * n))?;
                let u = unitary((generator(kx, ky) * t).exp())?;
                Ok((w - u).op_norm())
            });
            let worst = per_k.into_iter().try_fold(0.0, |acc: f64, e| e.map(|e| acc.max(e)))?;
            Ok((eps, worst))
        })
        .collect()
}

/// Convergence of the plastic walk to the assembled spacetime generator.
pub fn spacetime_convergence(
    cfg: &WalkConfig,
    a: RationalExp,
    b: RationalExp,
    t_final: f64,
    momenta: &[(f64, f64)],
    eps_list: &[f64],
) -> Result<ConvergenceResult> {
    cfg.require_mode(JetMode::Plastic)?;
    if cfg.a_exp != a || cfg.coin_x.b_exp != b || cfg.coin_y.b_exp != b {
        return Err(Error::InvalidConfig(format!(
            "exponents (a, b) = ({a}, {b}) differ from the walk's ({}, {})",
            cfg.a_exp, cfg.coin_x.b_exp
        )));
    }
    check_plastic(cfg, a, b).into_result()?;
    let terms = spacetime_hamiltonian(cfg, a, b)?;
    let samples = spacetime_errors(
        cfg,
        |kx, ky| generator_symbol(&terms, kx, ky),
        t_final,
        momenta,
        eps_list,
        crate::Execution::default(),
    )?;
    ConvergenceResult::from_samples(samples)
}

/// Eigenphases of `Ŵ(k)` at one point of the Brillouin zone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionPoint {
    pub kx: f64,
    pub ky: f64,
    pub phase1: f64,
    pub phase2: f64,
}

/// Eigenphases in `(-π, π]`, sorted ascending per momentum.
pub fn dispersion(cfg: &WalkConfig, eps: f64, grid: &KGrid) -> Result<Vec<DispersionPoint>> {
    let pts = grid.exec.map(&grid.points(), |&(kx, ky)| -> Result<DispersionPoint> {
        let e = eig2(&walk_k(cfg, kx, ky, eps), EigHint::Unitary)?;
        let mut ph = [e.values[0].arg(), e.values[1].arg()];
        ph.sort_by(f64::total_cmp);
        Ok(DispersionPoint {
            kx,
            ky,
            phase1: ph[0],
            phase2: ph[1],
        })
    });
    pts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coinwalk::CoinJet;
    use crate::limits::tests::compliant_cfg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn fit_synthetic_powers() {
        let eps = default_eps_list();
        let lin: Vec<_> = eps.iter().map(|&e| (e, e)).collect();
        let f = fit_order(&lin).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);

        let quad: Vec<_> = eps.iter().map(|&e| (e, 3.0 * e * e)).collect();
        let f = fit_order(&quad).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn fit_noisy_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..20 {
            let s: Vec<_> = (0..12)
                .map(|j| {
                    let e = 2f64.powi(-j - 4);
                    (e, e.powf(1.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
                })
                .collect();
            assert!((fit_order(&s).unwrap().slope - 1.5).abs() < 0.05);
        }
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit_order(&[(0.1, 1.0), (0.05, 0.5)]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            fit_order(&[(0.1, 1.0), (0.05, 0.0), (0.02, 0.1)]),
            Err(Error::BelowFloatingFloor)
        ));
    }

    #[test]
    fn eps_list_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let g = KGrid::square(4);
        assert!(matches!(
            time_convergence(&cfg, 1.0, &g, &[]),
            Err(Error::EmptyInput(_))
        ));
        assert!(time_convergence(&cfg, 1.0, &g, &[0.01, 0.02, 0.005]).is_err());
    }

    #[test]
    fn time_convergence_first_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for nu in [0, 1] {
            let cfg = compliant_cfg(&mut rng, nu, 2);
            let r = time_convergence(&cfg, 1.0, &KGrid::square(8), &default_eps_list()).unwrap();
            assert!((r.slope - 1.0).abs() < 0.15, "slope {}", r.slope);
            assert_eq!(r.samples.len(), 7);
        }
    }

    #[test]
    fn time_convergence_zero_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut cfg = compliant_cfg(&mut rng, 0, 2);
        cfg.coin_x.theta1 = 0.0;
        cfg.coin_y.theta1 = 0.0;
        // Ŵ^τ = I exactly when θ1 = 0, so only rounding remains
        let h = time_hamiltonian(&cfg, 0).unwrap();
        assert!(h.symbol(0.3, -0.2).max_abs() == 0.0);
        let errs = time_errors(&cfg, &h, 1.0, &KGrid::square(8), &default_eps_list()).unwrap();
        assert!(errs.iter().all(|e| e.1 < 1e-10), "{errs:?}");
    }

    #[test]
    fn tau_two_and_four_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let cfg2 = compliant_cfg(&mut rng, 1, 2);
        let cfg4 = WalkConfig { tau: 4, ..cfg2 };
        let h = time_hamiltonian(&cfg2, 1).unwrap();
        assert_eq!(h, time_hamiltonian(&cfg4, 1).unwrap());
        let grid = KGrid::square(8);
        let diffs: Vec<(f64, f64)> = [1e-2f64, 5e-3, 2.5e-3]
            .iter()
            .map(|&eps| {
                let n4 = (1.0 / (4.0 * eps)).round() as u64;
                let d = grid.max_over(|kx, ky| {
                    let w2 = walk_k(&cfg2, kx, ky, eps).powu(4 * n4);
                    let w4 = walk_k(&cfg4, kx, ky, eps).powu(4 * n4);
                    (w2 - w4).op_norm()
                });
                (eps, d)
            })
            .collect();
        // identical walks, so the difference is pure rounding
        assert!(diffs.iter().all(|d| d.1 < 1e-10));
        let e2 = time_convergence(&cfg2, 1.0, &grid, &default_eps_list()).unwrap();
        let e4 = time_convergence(&cfg4, 1.0, &grid, &default_eps_list()).unwrap();
        assert!((e4.slope - 1.0).abs() < 0.15);
        for (a, b) in e2.errors().zip(e4.errors()) {
            assert!((a - b).abs() < 4.0 * a.max(b));
        }
    }

    #[test]
    fn grid_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let eps = default_eps_list();
        let coarse = time_convergence(&cfg, 1.0, &KGrid::square(32), &eps).unwrap();
        let fine = time_convergence(&cfg, 1.0, &KGrid::square(64), &eps).unwrap();
        for (c, f) in coarse.errors().zip(fine.errors()) {
            assert!((f - c).abs() <= 0.1 * f, "{c} vs {f}");
        }
    }

    #[test]
    fn odd_tau_does_not_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let h = time_hamiltonian(&cfg, 0).unwrap();
        let odd = WalkConfig { tau: 3, ..cfg };
        assert!(time_convergence(&odd, 1.0, &KGrid::square(8), &default_eps_list()).is_err());
        let grid = KGrid::square(8);
        let gap = crate::limits::odd_tau_gap(&cfg, 3, &grid).unwrap();
        let errs = time_errors(&odd, &h, 1.0, &grid, &default_eps_list()).unwrap();
        for (eps, e) in errs {
            assert!(e >= gap - 50.0 * eps, "{e} at {eps}");
        }
    }

    #[test]
    fn dispersion_identity_coins() {
        let id = CoinJet::identity(JetMode::Time);
        let cfg = WalkConfig::time(id, id, 2).unwrap();
        for p in dispersion(&cfg, 0.1, &KGrid::square(16)).unwrap() {
            let w = |x: f64| {
                let r = x.rem_euclid(2.0 * PI);
                if r > PI {
                    r - 2.0 * PI
                } else {
                    r
                }
            };
            let mut want = [w(p.kx + p.ky), w(-(p.kx + p.ky))];
            want.sort_by(f64::total_cmp);
            let close = |a: f64, b: f64| (a - b).abs() < 1e-12 || ((a - b).abs() - 2.0 * PI).abs() < 1e-12;
            assert!(close(p.phase1, want[0]) && close(p.phase2, want[1]), "{p:?}");
        }
    }

    #[test]
    fn dispersion_gap_scales_with_eps() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let h = time_hamiltonian(&cfg, 0).unwrap().symbol(0.0, 0.0);
        // W² ≈ I - iτεĤ, so the square's eigenphases split by 2ε·(λ+ - λ-)
        let split = |eps: f64| {
            let e = eig2(&walk_k(&cfg, 0.0, 0.0, eps).powu(2), EigHint::Unitary).unwrap();
            (e.values[0].arg() - e.values[1].arg()).abs()
        };
        let he = eig2(&h, EigHint::Hermitian).unwrap();
        let hgap = (he.values[0].re - he.values[1].re).abs();
        let eps = 1e-4;
        assert!((split(eps) - 2.0 * eps * hgap).abs() < 1e-6);
    }

    #[test]
    fn dispersion_symmetric_for_traceless_symbol() {
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let mut cfg = compliant_cfg(&mut rng, 1, 2);
        cfg.coin_x.delta = 0.0;
        cfg.coin_y.delta = 0.0;
        // δ = 0 puts Ŵ in SU(2): phases come in ± pairs
        for p in dispersion(&cfg, 0.05, &KGrid::square(8)).unwrap() {
            let s = (p.phase1 + p.phase2).rem_euclid(2.0 * PI);
            assert!(s < 1e-10 || (2.0 * PI - s) < 1e-10);
        }
    }
}
