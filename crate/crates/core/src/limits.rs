//! Continuous-time limit: constraint checking, the eigen-phase constraint
//! function, root-of-unity diagnostics and the limiting lattice Hamiltonian.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{eig2, pauli, rz, Axis, EigHint, Mat2, C64};
use crate::coinwalk::{coin_at, step_blocks, walk_from_coins, walk_k, JetMode, KGrid, WalkConfig};
use crate::error::{Error, Result};

/// Tolerance for angle and phase comparisons.
pub const ANGLE_TOL: f64 = 1e-10;

/// One named condition of a constraint check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub name: String,
    pub satisfied: bool,
    pub residual: f64,
    /// Integer witnesses (`m`, `t`, `q`, `r`, `p`, `nu`, `l`, ...) when the condition holds.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub witness: BTreeMap<String, i64>,
}

impl ConditionRecord {
    pub fn new(name: &str, satisfied: bool, residual: f64) -> Self {
        Self {
            name: name.to_string(),
            satisfied,
            residual,
            witness: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: i64) -> Self {
        self.witness.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub passed: bool,
    pub conditions: Vec<ConditionRecord>,
}

impl ConstraintReport {
    pub fn from_conditions(conditions: Vec<ConditionRecord>) -> Self {
        Self {
            passed: conditions.iter().all(|c| c.satisfied),
            conditions,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionRecord> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn witness(&self, key: &str) -> Option<i64> {
        self.conditions.iter().find_map(|c| c.witness.get(key).copied())
    }

    /// First failing condition as an error.
    pub fn into_result(self) -> Result<Self> {
        match self.conditions.iter().find(|c| !c.satisfied) {
            Some(c) => Err(Error::NonCompliant {
                constraint: c.name.clone(),
                residual: c.residual,
            }),
            None => Ok(self),
        }
    }
}

/// Nearest integer to `x` and the distance to it.
pub(crate) fn nearest_int(x: f64) -> (i64, f64) {
    let r = x.round();
    (r as i64, (x - r).abs())
}

/// Residual (radians) of `θ0x = 2πm + νπ`, `θ0y = 2πt + (1-ν)π` and the nearest `m`, `t`.
pub(crate) fn branch_residual(theta0x: f64, theta0y: f64, nu: i64) -> (f64, i64, i64) {
    let (m, rm) = nearest_int((theta0x - nu as f64 * PI) / (2.0 * PI));
    let (t, rt) = nearest_int((theta0y - (1 - nu) as f64 * PI) / (2.0 * PI));
    (2.0 * PI * rm.max(rt), m, t)
}

/// Best branch `ν`, its residual, `m`, `t`.
pub(crate) fn theta_branch(theta0x: f64, theta0y: f64) -> (i64, f64, i64, i64) {
    (0..=1)
        .map(|nu| {
            let (r, m, t) = branch_residual(theta0x, theta0y, nu);
            (nu, r, m, t)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two branches")
}

/// Check of the continuous-time limit with root-of-unity index `l = 0`.
pub fn check_time_limit(cfg: &WalkConfig) -> ConstraintReport {
    check_time_limit_l(cfg, 0)
}

pub fn check_time_limit_l(cfg: &WalkConfig, l: i64) -> ConstraintReport {
    let (nu, residual, m, t) = theta_branch(cfg.coin_x.theta0, cfg.coin_y.theta0);
    let mut branch = ConditionRecord::new("theta_branch", residual < ANGLE_TOL, residual);
    if branch.satisfied {
        // q counts the odd multiple of π, r the even one
        let (q, r) = if nu == 1 { (m, t) } else { (t, m) };
        branch = branch
            .with("nu", nu)
            .with("m", m)
            .with("t", t)
            .with("q", q)
            .with("r", r);
    }

    let arg = 2.0 * PI * l as f64 / cfg.tau as f64 - cfg.delta();
    let c = arg.cos().abs();
    let mut phase = ConditionRecord::new("delta_phase", c <= ANGLE_TOL, c);
    if phase.satisfied {
        let (p, _) = nearest_int(2.0 * arg / PI);
        phase = phase.with("p", p).with("l", l);
    }

    let even = cfg.tau.is_multiple_of(2);
    let tau = ConditionRecord::new("tau_even", even, if even { 0.0 } else { 1.0 }).with("tau", cfg.tau as i64);

    ConstraintReport::from_conditions(vec![branch, phase, tau])
}

/// `e^{iδ} A(k)`, the ε → 0 walk symbol.
pub fn zeroth_walk(cfg: &WalkConfig, kx: f64, ky: f64) -> Mat2 {
    let d = cfg.delta_spatial;
    walk_from_coins(&coin_at(&cfg.coin_x, 0.0), &coin_at(&cfg.coin_y, 0.0), kx * d, ky * d)
}

fn fgh(cfg: &WalkConfig, kx: f64, ky: f64, l: i64) -> (f64, f64, f64, f64, f64) {
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let d = cfg.delta_spatial;
    let w1 = (x.theta0 / 2.0).cos() * (y.theta0 / 2.0).cos();
    let w2 = (x.theta0 / 2.0).sin() * (y.theta0 / 2.0).sin();
    let zx = x.zeta0 - 2.0 * kx * d;
    let zy = y.zeta0 - 2.0 * ky * d;
    let g = (x.phi0 + y.phi0 + zx + zy) / 2.0;
    let h = (y.phi0 - x.phi0 + zx - zy) / 2.0;
    let c = (2.0 * PI * l as f64 / cfg.tau as f64 - cfg.delta()).cos();
    (w1, w2, g, h, c)
}

/// `f = W1 cos g - W2 cos h - c`, zero for all `k` exactly on the compliant set.
pub fn constraint_f(cfg: &WalkConfig, kx: f64, ky: f64, l: i64) -> f64 {
    let (w1, w2, g, h, c) = fgh(cfg, kx, ky, l);
    w1 * g.cos() - w2 * h.cos() - c
}

/// `(∂f/∂kx, ∂f/∂ky) = (W1 sin g - W2 sin h, W1 sin g + W2 sin h)` for unit spacing.
pub fn constraint_f_grad(cfg: &WalkConfig, kx: f64, ky: f64, l: i64) -> (f64, f64) {
    let (w1, w2, g, h, _) = fgh(cfg, kx, ky, l);
    let d = cfg.delta_spatial;
    (d * (w1 * g.sin() - w2 * h.sin()), d * (w1 * g.sin() + w2 * h.sin()))
}

/// `max_k max_λ |λ^τ - 1|` over eigenvalues of `e^{iδ}A(k)`.
pub fn roots_of_unity_residual(cfg: &WalkConfig, grid: &KGrid) -> Result<f64> {
    cfg.require_mode(JetMode::Time)?;
    let tau = cfg.tau as i32;
    let per_k = grid.exec.map(&grid.points(), |&(kx, ky)| {
        let e = eig2(&zeroth_walk(cfg, kx, ky), EigHint::Unitary)?;
        Ok(e.values.iter().map(|v| (v.powi(tau) - 1.0).norm()).fold(0.0, f64::max))
    });
    per_k
        .into_iter()
        .try_fold(0.0, |acc: f64, r: Result<f64>| Ok(acc.max(r?)))
}

/// `max_k ‖(e^{iδ}A(k))^τ - I‖` for odd `τ`: the obstruction to an odd-τ limit.
pub fn odd_tau_gap(cfg: &WalkConfig, tau_odd: u32, grid: &KGrid) -> Result<f64> {
    cfg.require_mode(JetMode::Time)?;
    if tau_odd.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("tau = {tau_odd} is not odd")));
    }
    Ok(grid.max_over(|kx, ky| (zeroth_walk(cfg, kx, ky).powu(tau_odd as u64) - Mat2::IDENTITY).op_norm()))
}

fn require_branch(cfg: &WalkConfig, nu: u8) -> Result<()> {
    if nu > 1 {
        return Err(Error::InvalidConfig(format!("branch nu = {nu} must be 0 or 1")));
    }
    let (residual, _, _) = branch_residual(cfg.coin_x.theta0, cfg.coin_y.theta0, nu as i64);
    if residual >= ANGLE_TOL {
        return Err(Error::NonCompliant {
            constraint: format!("theta_branch(nu={nu})"),
            residual,
        });
    }
    Ok(())
}

/// Closed form of `{A, B}` on branch `ν`.
pub fn anticommutator_ab(cfg: &WalkConfig, kx: f64, ky: f64, nu: u8) -> Result<Mat2> {
    cfg.require_mode(JetMode::Time)?;
    require_branch(cfg, nu)?;
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let d = cfg.delta_spatial;
    let s = if nu == 0 { 1.0 } else { -1.0 };
    let zx = x.zeta0 - 2.0 * kx * d;
    let zy = y.zeta0 - 2.0 * ky * d;
    let sy = pauli(Axis::Y);
    let ty = (rz(-2.0 * y.phi0) + rz(2.0 * zx + 2.0 * s * x.phi0 + 2.0 * s * zy)) * y.theta1;
    let tx = (rz(2.0 * zx) + rz(2.0 * s * zy - 2.0 * y.phi0 + 2.0 * s * x.phi0)) * x.theta1;
    Ok(-((ty + tx) * sy))
}

/// Summand of the limiting Hamiltonian: `S_x^{px} S_y^{py} · coeff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub px: i64,
    pub py: i64,
    #[serde(rename = "matrix")]
    pub coeff: Mat2,
}

impl HamiltonianTerm {
    /// Fourier symbol `e^{i(px kx + py ky)σ_z} · coeff` at lattice momenta.
    pub fn symbol(&self, kx: f64, ky: f64) -> Mat2 {
        rz(-2.0 * (self.px as f64 * kx + self.py as f64 * ky)) * self.coeff
    }
}

/// The continuous-time lattice Hamiltonian on one branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeHamiltonian {
    pub nu: u8,
    pub delta_spatial: f64,
    pub terms: Vec<HamiltonianTerm>,
}

impl TimeHamiltonian {
    /// `Ĥ(k)` at physical momentum `k` (lattice momentum `kΔ`).
    pub fn symbol(&self, kx: f64, ky: f64) -> Mat2 {
        let d = self.delta_spatial;
        self.terms.iter().map(|t| t.symbol(kx * d, ky * d)).sum()
    }

    /// Same symbol at lattice momenta, as seen by the DFT of a unit-indexed field.
    pub fn lattice_symbol(&self, kx: f64, ky: f64) -> Mat2 {
        self.terms.iter().map(|t| t.symbol(kx, ky)).sum()
    }

    pub fn stencil(&self) -> impl Iterator<Item = (i64, i64, &Mat2)> {
        self.terms.iter().map(|t| (t.px, t.py, &t.coeff))
    }
}

/// The four-term Hamiltonian of the continuous-time limit on branch `ν`.
pub fn time_hamiltonian(cfg: &WalkConfig, nu: u8) -> Result<TimeHamiltonian> {
    cfg.require_mode(JetMode::Time)?;
    require_branch(cfg, nu)?;
    check_time_limit(cfg).into_result()?;
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let s = if nu == 0 { 1.0 } else { -1.0 };
    let py = if nu == 0 { 2 } else { -2 };
    let quarter_sy = pauli(Axis::Y) * 0.25;
    let term = |px, py, theta1: f64, angle: f64| HamiltonianTerm {
        px,
        py,
        coeff: rz(angle) * quarter_sy * theta1,
    };
    Ok(TimeHamiltonian {
        nu,
        delta_spatial: cfg.delta_spatial,
        terms: vec![
            term(2, 0, x.theta1, 2.0 * x.zeta0),
            term(0, py, x.theta1, 2.0 * s * y.zeta0 + 2.0 * s * x.phi0 - 2.0 * y.phi0),
            term(0, 0, y.theta1, -2.0 * y.phi0),
            term(2, py, y.theta1, 2.0 * x.zeta0 + 2.0 * s * x.phi0 + 2.0 * s * y.zeta0),
        ],
    })
}

/// Finite-ε quotient `i(Ŵ^τ(ε) - I)/(τε)` whose ε → 0 limit defines `Ĥ(k)`.
pub fn definitional_quotient(cfg: &WalkConfig, kx: f64, ky: f64, eps: f64) -> Mat2 {
    let w = walk_k(cfg, kx, ky, eps).powu(cfg.tau as u64);
    (w - Mat2::IDENTITY) * (C64::new(0.0, 1.0) / (cfg.tau as f64 * eps))
}

/// `-¼{A,B}` assembled from the raw blocks, the brute-force form of `Ĥ(k)`.
pub fn hamiltonian_from_blocks(cfg: &WalkConfig, kx: f64, ky: f64) -> Result<Mat2> {
    let (a, b) = step_blocks(cfg, kx, ky)?;
    Ok(a.anticommutator(&b) * Complex64::new(-0.25, 0.0))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::coinwalk::CoinJet;
    use crate::verify::fit_order;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random compliant continuous-time config on branch `nu`.
    pub(crate) fn compliant_cfg(rng: &mut impl Rng, nu: u8, tau: u32) -> WalkConfig {
        let mut u = || rng.gen_range(-3.0..3.0);
        let (zx, zx1, tx1, px, px1, zy, zy1, ty1, py, py1, dx) =
            (u(), u(), u(), u(), u(), u(), u(), u(), u(), u(), u());
        let m = rng.gen_range(-2..=2) as f64;
        let t = rng.gen_range(-2..=2) as f64;
        let p = [-3.0, -1.0, 1.0, 3.0][rng.gen_range(0..4)];
        let nu = nu as f64;
        let cx = CoinJet::time(dx, [zx, zx1], [2.0 * PI * m + nu * PI, tx1], [px, px1]).unwrap();
        let cy = CoinJet::time(
            -p * PI / 2.0 - dx,
            [zy, zy1],
            [2.0 * PI * t + (1.0 - nu) * PI, ty1],
            [py, py1],
        )
        .unwrap();
        WalkConfig::time(cx, cy, tau).unwrap()
    }

    fn simple_cfg(theta0x: f64, theta0y: f64, delta: f64, tau: u32) -> WalkConfig {
        let cx = CoinJet::time(delta, [0.1, 0.2], [theta0x, 0.3], [0.4, 0.5]).unwrap();
        let cy = CoinJet::time(0.0, [0.6, 0.7], [theta0y, 0.8], [0.9, 1.0]).unwrap();
        WalkConfig::time(cx, cy, tau).unwrap()
    }

    #[test]
    fn check_examples() {
        let r = check_time_limit(&simple_cfg(PI, 0.0, -PI / 2.0, 2));
        assert!(r.passed);
        assert_eq!(r.witness("nu"), Some(1));
        assert_eq!(r.witness("p"), Some(1));

        let r = check_time_limit(&simple_cfg(PI, 0.0, -PI / 2.0, 1));
        assert!(!r.passed);
        assert!(!r.condition("tau_even").unwrap().satisfied);

        let r = check_time_limit(&simple_cfg(0.0, 0.0, -PI / 2.0, 2));
        assert!(!r.condition("theta_branch").unwrap().satisfied);
        assert!(r.condition("theta_branch").unwrap().residual > 1.0);
    }

    #[test]
    fn witnesses_shift_with_gauge() {
        let base = check_time_limit(&simple_cfg(PI, 2.0 * PI, -PI / 2.0, 2));
        let moved = check_time_limit(&simple_cfg(PI + 4.0 * PI, 2.0 * PI, -PI / 2.0, 2));
        assert_eq!(base.witness("m").unwrap() + 2, moved.witness("m").unwrap());
        for key in ["nu", "t", "p", "l"] {
            assert_eq!(base.witness(key), moved.witness(key));
        }
        assert_eq!(base.passed, moved.passed);
    }

    #[test]
    fn report_serializes() {
        let r = check_time_limit(&simple_cfg(PI, 0.0, -PI / 2.0, 2));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["passed"], true);
        assert_eq!(json["conditions"][0]["name"], "theta_branch");
        assert_eq!(json["conditions"][0]["witness"]["nu"], 1);
    }

    #[test]
    fn constraint_f_vanishes_on_compliant_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for nu in [0, 1] {
            let cfg = compliant_cfg(&mut rng, nu, 2);
            for _ in 0..20 {
                let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
                assert!(constraint_f(&cfg, kx, ky, 0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constraint_f_example_and_gradient() {
        let cx = CoinJet::time(PI / 2.0, [0.3, 0.0], [PI / 2.0, 0.0], [0.2, 0.0]).unwrap();
        let cy = CoinJet::time(0.0, [-0.4, 0.0], [PI / 2.0, 0.0], [0.7, 0.0]).unwrap();
        let cfg = WalkConfig::time(cx, cy, 2).unwrap();
        let (kx, ky) = (0.37, -1.21);
        let (_, _, g, h, _) = fgh(&cfg, kx, ky, 0);
        let f = constraint_f(&cfg, kx, ky, 0);
        assert!((f - 0.5 * (g.cos() - h.cos())).abs() < 1e-15);
        assert!(f.abs() > 1e-3);

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let mut cfg = crate::coinwalk::tests::random_time_cfg(&mut rng, 2);
            cfg.tau = 4;
            let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let hstep = 1e-5;
            let fdx = (constraint_f(&cfg, kx + hstep, ky, 1) - constraint_f(&cfg, kx - hstep, ky, 1)) / (2.0 * hstep);
            let fdy = (constraint_f(&cfg, kx, ky + hstep, 1) - constraint_f(&cfg, kx, ky - hstep, 1)) / (2.0 * hstep);
            let (gx, gy) = constraint_f_grad(&cfg, kx, ky, 1);
            assert!((fdx - gx).abs() < 1e-8 && (fdy - gy).abs() < 1e-8);
        }
    }

    #[test]
    fn constraint_f_tracks_trace() {
        // f + c is half the (real) trace of A
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let cfg = crate::coinwalk::tests::random_time_cfg(&mut rng, 2);
            let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let (a, _) = step_blocks(&cfg, kx, ky).unwrap();
            let (_, _, _, _, c) = fgh(&cfg, kx, ky, 0);
            let half_trace = a.trace() * 0.5;
            assert!(half_trace.im.abs() < 1e-12);
            assert!((constraint_f(&cfg, kx, ky, 0) + c - half_trace.re).abs() < 1e-12);
        }
    }

    #[test]
    fn roots_of_unity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let grid = KGrid::square(16);
        for (nu, tau) in [(0, 2), (1, 4)] {
            let cfg = compliant_cfg(&mut rng, nu, tau);
            assert!(roots_of_unity_residual(&cfg, &grid).unwrap() <= 1e-12);
        }
        let cfg = simple_cfg(0.0, 0.0, -PI / 2.0, 2);
        assert!(roots_of_unity_residual(&cfg, &grid).unwrap() >= 0.1);
    }

    #[test]
    fn odd_tau_obstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let grid = KGrid::square(8);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let g1 = odd_tau_gap(&cfg, 1, &grid).unwrap();
        let g3 = odd_tau_gap(&cfg, 3, &grid).unwrap();
        assert!(g3 >= 1.5);
        assert!((g1 - g3).abs() < 1e-12);
        assert!(odd_tau_gap(&cfg, 2, &grid).is_err());
        let even = grid.max_over(|kx, ky| (zeroth_walk(&cfg, kx, ky).powu(2) - Mat2::IDENTITY).op_norm());
        assert!(even <= 1e-12);
    }

    #[test]
    fn anticommutator_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for nu in [0, 1] {
            for _ in 0..20 {
                let cfg = compliant_cfg(&mut rng, nu, 2);
                let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
                let (a, b) = step_blocks(&cfg, kx, ky).unwrap();
                let closed = anticommutator_ab(&cfg, kx, ky, nu).unwrap();
                assert!((closed - a.anticommutator(&b)).op_norm() <= 1e-12);
                assert!(closed.hermiticity_residual() <= 1e-12);
            }
        }
        let cfg = compliant_cfg(&mut rng, 0, 2);
        assert!(anticommutator_ab(&cfg, 0.1, 0.2, 1).is_err());
        let mut zero = cfg;
        zero.coin_x.theta1 = 0.0;
        zero.coin_y.theta1 = 0.0;
        assert_eq!(anticommutator_ab(&zero, 0.3, 0.1, 0).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn hamiltonian_zero_angle_example() {
        let (t1x, t1y) = (0.7, -1.3);
        let cx = CoinJet::time(-PI / 2.0, [0.0; 2], [0.0, t1x], [0.0; 2]).unwrap();
        let cy = CoinJet::time(0.0, [0.0; 2], [PI, t1y], [0.0; 2]).unwrap();
        let cfg = WalkConfig::time(cx, cy, 2).unwrap();
        let h = time_hamiltonian(&cfg, 0).unwrap();
        let (kx, ky) = (0.4, -0.9);
        let s = |n: f64, k: f64| rz(-2.0 * n * k);
        let want = ((s(2.0, kx) + s(2.0, ky)) * t1x + (Mat2::IDENTITY + s(2.0, kx) * s(2.0, ky)) * t1y)
            * pauli(Axis::Y)
            * 0.25;
        assert!((h.symbol(kx, ky) - want).op_norm() < 1e-14);
        let shifts: Vec<(i64, i64)> = h.terms.iter().map(|t| (t.px, t.py)).collect();
        assert_eq!(shifts, vec![(2, 0), (0, 2), (0, 0), (2, 2)]);
    }

    #[test]
    fn hamiltonian_matches_block_assembly_and_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for nu in [0, 1] {
            for _ in 0..10 {
                let cfg = compliant_cfg(&mut rng, nu, 2);
                let h = time_hamiltonian(&cfg, nu).unwrap();
                let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
                let sym = h.symbol(kx, ky);
                assert!(sym.hermiticity_residual() <= 1e-12);
                assert!((sym - hamiltonian_from_blocks(&cfg, kx, ky).unwrap()).op_norm() <= 1e-12);
                let closed = anticommutator_ab(&cfg, kx, ky, nu).unwrap() * -0.25;
                assert!((sym - closed).op_norm() <= 1e-12);

                let eps: Vec<f64> = (0..5).map(|j| 1e-3 / 2f64.powi(j)).collect();
                let samples: Vec<(f64, f64)> = eps
                    .iter()
                    .map(|&e| (e, (definitional_quotient(&cfg, kx, ky, e) - sym).op_norm()))
                    .collect();
                let fit = fit_order(&samples).unwrap();
                assert!((fit.slope - 1.0).abs() < 0.15, "slope {}", fit.slope);
            }
        }
    }

    #[test]
    fn branch_substitution() {
        // the ν = 1 Hamiltonian equals the ν = 0 formula with S_y² → S_y⁻² and ζ0y, φ0x sign-flipped
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let cfg = compliant_cfg(&mut rng, 1, 2);
        let h1 = time_hamiltonian(&cfg, 1).unwrap();
        let (x, y) = (&cfg.coin_x, &cfg.coin_y);
        let nu0 = |zy: f64, px: f64, syexp: f64, kx: f64, ky: f64| {
            let s = |n: f64, k: f64| rz(-2.0 * n * k);
            ((s(2.0, kx) * rz(2.0 * x.zeta0) + s(syexp, ky) * rz(2.0 * zy + 2.0 * px - 2.0 * y.phi0)) * x.theta1
                + (rz(-2.0 * y.phi0) + s(2.0, kx) * s(syexp, ky) * rz(2.0 * x.zeta0 + 2.0 * px + 2.0 * zy)) * y.theta1)
                * pauli(Axis::Y)
                * 0.25
        };
        for _ in 0..10 {
            let (kx, ky) = (rng.gen_range(-PI..PI), rng.gen_range(-PI..PI));
            let want = nu0(-y.zeta0, -x.phi0, -2.0, kx, ky);
            assert!((h1.symbol(kx, ky) - want).op_norm() < 1e-13);
        }
    }

    #[test]
    fn hamiltonian_ignores_quadratic_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let cfg = compliant_cfg(&mut rng, 0, 2);
        let h = time_hamiltonian(&cfg, 0).unwrap();
        let (kx, ky) = (0.3, 1.1);
        let c = [0.7, -0.4, 1.2];
        let bent = |jet: &CoinJet, e: f64| {
            let (z, t, p) = jet.angles_at(e);
            crate::coinwalk::coin(jet.delta, z + c[0] * e * e, t + c[1] * e * e, p + c[2] * e * e)
        };
        let err = |e: f64| {
            let w = walk_from_coins(&bent(&cfg.coin_x, e), &bent(&cfg.coin_y, e), kx, ky).powu(2);
            let q = (w - Mat2::IDENTITY) * (C64::new(0.0, 1.0) / (2.0 * e));
            (q - h.symbol(kx, ky)).op_norm()
        };
        assert!(err(1e-4) < 1e-2);
        assert!((1.8..2.2).contains(&(err(2e-4) / err(1e-4))));
    }

    #[test]
    fn rejects_noncompliant() {
        let cfg = simple_cfg(0.0, 0.0, -PI / 2.0, 2);
        assert!(matches!(time_hamiltonian(&cfg, 0), Err(Error::NonCompliant { .. })));
        let cfg = simple_cfg(PI, 0.0, 0.0, 2);
        match time_hamiltonian(&cfg, 1) {
            Err(Error::NonCompliant { constraint, .. }) => assert_eq!(constraint, "delta_phase"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn terms_serialize_as_eight_reals() {
        let t = HamiltonianTerm {
            px: 2,
            py: -2,
            coeff: Mat2::IDENTITY,
        };
        let v = serde_json::to_value(t).unwrap();
        assert_eq!(v["px"], 2);
        assert_eq!(v["matrix"].as_array().unwrap().len(), 8);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn hermitian_on_grid(seed in any::<u64>(), nu in 0u8..2) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cfg = compliant_cfg(&mut rng, nu, 2);
            let h = time_hamiltonian(&cfg, nu).unwrap();
            let worst = KGrid::square(16).max_over(|kx, ky| h.symbol(kx, ky).hermiticity_residual());
            prop_assert!(worst <= 1e-12);
        }
    }
}
