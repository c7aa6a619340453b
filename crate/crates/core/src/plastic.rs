//! Continuous-spacetime ("plastic") limit.
//!
//! With `Δ = ε^a` and `θ = θ0 + θ1 ε^b`, the squared walk symbol expands as
//! `e^{2iδ} Σ ν ν Γ̂ Γ̂ ε^{aΣl + bΣn}`. Terms with `aΣl + bΣn = 1` build the
//! generator; terms with a smaller exponent must cancel or the limit diverges.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli, rot_complex, ry, rz, Axis, Mat2, C64, I};
use crate::coinwalk::{JetMode, WalkConfig};
use crate::error::{Error, Result};
use crate::limits::{nearest_int, ConditionRecord, ConstraintReport, ANGLE_TOL};
pub use crate::RationalExp;

/// Cancellation threshold for coefficient groups.
pub const GROUP_TOL: f64 = 1e-12;
/// Divergence residual accepted by the constraint check.
pub const DIVERGENCE_TOL: f64 = 1e-10;
/// Order-one groups with a smaller unfolded norm are dropped from the PDE.
pub const ASSEMBLY_TOL: f64 = 1e-10;

/// Summation indices of one term of the squared walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermIndex {
    pub l1x: u32,
    pub l1y: u32,
    pub l2x: u32,
    pub l2y: u32,
    pub n1x: u32,
    pub n1y: u32,
    pub n2x: u32,
    pub n2y: u32,
}

/// Shape classes of the `a = b = 1/2` listing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermGroup {
    /// Exactly one index equal to 1.
    Single,
    /// Two distinct `l` indices equal to 1.
    TwoL,
    /// One `l` and one `n` index equal to 1.
    LAndN,
    /// Two distinct `n` indices equal to 1.
    TwoN,
    /// A single index equal to 2.
    SingleTwo,
    Other,
}

impl TermGroup {
    pub fn label(self) -> &'static str {
        match self {
            TermGroup::Single => "single",
            TermGroup::TwoL => "two_l",
            TermGroup::LAndN => "l_and_n",
            TermGroup::TwoN => "two_n",
            TermGroup::SingleTwo => "single_two",
            TermGroup::Other => "other",
        }
    }
}

impl TermIndex {
    pub fn from_parts(l: [u32; 4], n: [u32; 4]) -> Self {
        Self {
            l1x: l[0],
            l1y: l[1],
            l2x: l[2],
            l2y: l[3],
            n1x: n[0],
            n1y: n[1],
            n2x: n[2],
            n2y: n[3],
        }
    }

    pub fn to_array(self) -> [u32; 8] {
        [
            self.l1x, self.l1y, self.l2x, self.l2y, self.n1x, self.n1y, self.n2x, self.n2y,
        ]
    }

    pub fn l_sum(&self) -> u32 {
        self.l1x + self.l1y + self.l2x + self.l2y
    }

    pub fn n_sum(&self) -> u32 {
        self.n1x + self.n1y + self.n2x + self.n2y
    }

    pub fn dx_power(&self) -> u32 {
        self.l1x + self.l2x
    }

    pub fn dy_power(&self) -> u32 {
        self.l1y + self.l2y
    }

    pub fn thx_power(&self) -> u32 {
        self.n1x + self.n2x
    }

    pub fn thy_power(&self) -> u32 {
        self.n1y + self.n2y
    }

    pub fn group(&self) -> TermGroup {
        let a = self.to_array();
        let ones = a.iter().filter(|&&v| v == 1).count();
        let twos = a.iter().filter(|&&v| v == 2).count();
        let nonzero = a.iter().filter(|&&v| v != 0).count();
        let (l, n) = (self.l_sum(), self.n_sum());
        match (nonzero, ones, twos) {
            (1, 1, 0) => TermGroup::Single,
            (1, 0, 1) => TermGroup::SingleTwo,
            (2, 2, 0) if l == 2 => TermGroup::TwoL,
            (2, 2, 0) if n == 2 => TermGroup::TwoN,
            (2, 2, 0) => TermGroup::LAndN,
            _ => TermGroup::Other,
        }
    }

    /// `ν(l1, n1) ν(l2, n2)` with the derivative symbols `ik` unfolded to `i`.
    fn monomial_weight(&self) -> C64 {
        I.powu(self.l_sum()) * self.pde_weight()
    }

    /// `(−i/2)^{Σn} / Π(index!)`: the weight multiplying `∂^l θ1^n` in the PDE.
    fn pde_weight(&self) -> C64 {
        let denom: f64 = self.to_array().iter().map(|&v| factorial(v)).product();
        C64::new(0.0, -0.5).powu(self.n_sum()) / denom
    }

    /// `ν(l1, n1) ν(l2, n2)` at physical momenta and the given `θ1`.
    fn numeric_weight(&self, kx: f64, ky: f64, theta1x: f64, theta1y: f64) -> C64 {
        self.monomial_weight()
            * kx.powi(self.dx_power() as i32)
            * ky.powi(self.dy_power() as i32)
            * theta1x.powi(self.thx_power() as i32)
            * theta1y.powi(self.thy_power() as i32)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `R_z(ζx) σz^{lx} σy^{nx} R_y(θ0x) R_z(φx) R_z(ζy) σz^{ly} σy^{ny} R_y(θ0y) R_z(φy)`.
///
/// Only index parities matter; zeroth-order angles are used throughout.
pub fn gamma_hat(cfg: &WalkConfig, lx: u32, ly: u32, nx: u32, ny: u32) -> Mat2 {
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let sz = |p: u32| if p % 2 == 1 { pauli(Axis::Z) } else { Mat2::IDENTITY };
    let sy = |p: u32| if p % 2 == 1 { pauli(Axis::Y) } else { Mat2::IDENTITY };
    rz(x.zeta0)
        * sz(lx)
        * sy(nx)
        * ry(x.theta0)
        * rz(x.phi0)
        * rz(y.zeta0)
        * sz(ly)
        * sy(ny)
        * ry(y.theta0)
        * rz(y.phi0)
}

/// Weak compositions of `total` into four parts, lexicographic.
fn compositions4(total: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in 0..=total {
        for b in 0..=total - a {
            for c in 0..=total - a - b {
                out.push([a, b, c, total - a - b - c]);
            }
        }
    }
    out
}

/// Exact order `aL + bN` as `(numerator, denominator)` over the common denominator `qa·qb`.
fn order_of(a: RationalExp, b: RationalExp, l: u32, n: u32) -> (i64, i64) {
    let den = a.denom() * b.denom();
    let num = a.numer() * b.denom() * l as i64 + b.numer() * a.denom() * n as i64;
    (num, den)
}

/// All `(Σl, Σn) ≠ (0, 0)` whose order satisfies `keep(num, den)`, with order ≤ 1.
fn enumerate_where(a: RationalExp, b: RationalExp, keep: impl Fn(i64, i64) -> bool) -> Vec<TermIndex> {
    if a.numer() <= 0 || b.numer() <= 0 {
        return Vec::new();
    }
    let den = a.denom() * b.denom();
    let l_max = (den / (a.numer() * b.denom())) as u32;
    let n_max = (den / (b.numer() * a.denom())) as u32;
    let mut out = Vec::new();
    for l in 0..=l_max {
        for n in 0..=n_max {
            if l + n == 0 {
                continue;
            }
            let (num, den) = order_of(a, b, l, n);
            if num > den || !keep(num, den) {
                continue;
            }
            for ls in compositions4(l) {
                for ns in compositions4(n) {
                    out.push(TermIndex::from_parts(ls, ns));
                }
            }
        }
    }
    out
}

/// Index tuples with `a Σl + b Σn = 1`, by exact integer arithmetic.
///
/// Empty when `a = 0` (the continuous-time scaling) or `b ≤ 0`.
pub fn enumerate_terms(a: RationalExp, b: RationalExp) -> Vec<TermIndex> {
    enumerate_where(a, b, |num, den| num == den)
}

/// Index tuples with `0 < a Σl + b Σn < 1`.
pub fn fractional_terms(a: RationalExp, b: RationalExp) -> Vec<TermIndex> {
    enumerate_where(a, b, |num, den| num < den)
}

fn phase2(cfg: &WalkConfig) -> C64 {
    C64::from_polar(1.0, 2.0 * cfg.delta())
}

fn word_pair(cfg: &WalkConfig, t: &TermIndex) -> Mat2 {
    gamma_hat(cfg, t.l1x, t.l1y, t.n1x, t.n1y) * gamma_hat(cfg, t.l2x, t.l2y, t.n2x, t.n2y)
}

/// One group of the fractional-order expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceGroup {
    /// Order `f` of `ε^f`.
    pub order: RationalExp,
    pub dx_power: u32,
    pub dy_power: u32,
    pub thx_power: u32,
    pub thy_power: u32,
    /// Operator norm of the monomial coefficient.
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub residual: f64,
    pub groups: Vec<DivergenceGroup>,
}

fn check_exponents(a: RationalExp, b: RationalExp) -> Result<()> {
    if a.is_zero() {
        return Err(Error::TimeScaling);
    }
    a.check_a()?;
    b.check_b()?;
    Ok(())
}

fn divergence_unchecked(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> DivergenceReport {
    let phase = phase2(cfg);
    let mut groups: BTreeMap<(i64, u32, u32, u32, u32), Mat2> = BTreeMap::new();
    for t in fractional_terms(a, b) {
        let (num, _) = order_of(a, b, t.l_sum(), t.n_sum());
        let key = (num, t.dx_power(), t.dy_power(), t.thx_power(), t.thy_power());
        *groups.entry(key).or_insert(Mat2::ZERO) += word_pair(cfg, &t) * (phase * t.monomial_weight());
    }
    let den = a.denom() * b.denom();
    let groups: Vec<DivergenceGroup> = groups
        .into_iter()
        .map(|((num, dx, dy, thx, thy), m)| DivergenceGroup {
            order: RationalExp::new(num, den).expect("positive denominator"),
            dx_power: dx,
            dy_power: dy,
            thx_power: thx,
            thy_power: thy,
            norm: m.op_norm(),
        })
        .collect();
    DivergenceReport {
        residual: groups.iter().map(|g| g.norm).fold(0.0, f64::max),
        groups,
    }
}

/// Largest norm among the `ε^f`, `0 < f < 1`, coefficient groups; zero means no divergence.
///
/// Groups are keyed by `(f, ∂x power, ∂y power, θ1x power, θ1y power)`.
pub fn divergence_residual(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> Result<DivergenceReport> {
    cfg.require_mode(JetMode::Plastic)?;
    check_exponents(a, b)?;
    Ok(divergence_unchecked(cfg, a, b))
}

/// Term `coeff ∂x^dx ∂y^dy` of `∂t Ψ = Σ coeff ∂x^dx ∂y^dy Ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeTerm {
    pub dx_power: u32,
    pub dy_power: u32,
    pub thx_power: u32,
    pub thy_power: u32,
    /// Numeric coefficient with `θ1x^thx θ1y^thy` folded in.
    #[serde(rename = "matrix")]
    pub coeff: Mat2,
}

/// Order-one coefficient group before θ1 folding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeGroup {
    pub dx_power: u32,
    pub dy_power: u32,
    pub thx_power: u32,
    pub thy_power: u32,
    /// `½ e^{2iδ} Σ (−i/2)^{Σn}/Π(index!) Γ̂Γ̂` over the group.
    pub unfolded: Mat2,
}

/// Every order-one group of the generator, including cancelled ones.
pub fn order_one_groups(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> Result<Vec<PdeGroup>> {
    check_exponents(a, b)?;
    let scale = phase2(cfg) * 0.5;
    let mut groups: BTreeMap<(u32, u32, u32, u32), Mat2> = BTreeMap::new();
    for t in enumerate_terms(a, b) {
        let key = (t.dx_power(), t.dy_power(), t.thx_power(), t.thy_power());
        *groups.entry(key).or_insert(Mat2::ZERO) += word_pair(cfg, &t) * (scale * t.pde_weight());
    }
    Ok(groups
        .into_iter()
        .map(|((dx, dy, thx, thy), m)| PdeGroup {
            dx_power: dx,
            dy_power: dy,
            thx_power: thx,
            thy_power: thy,
            unfolded: m,
        })
        .collect())
}

/// Surviving order-one groups as PDE terms, without constraint checks.
pub fn assemble_order_one(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> Result<Vec<PdeTerm>> {
    let (t1x, t1y) = (cfg.coin_x.theta1, cfg.coin_y.theta1);
    Ok(order_one_groups(cfg, a, b)?
        .into_iter()
        .filter(|g| g.unfolded.op_norm() > ASSEMBLY_TOL)
        .map(|g| PdeTerm {
            dx_power: g.dx_power,
            dy_power: g.dy_power,
            thx_power: g.thx_power,
            thy_power: g.thy_power,
            coeff: g.unfolded * (t1x.powi(g.thx_power as i32) * t1y.powi(g.thy_power as i32)),
        })
        .collect())
}

/// Generator `∂t Ψ = Σ coeff ∂^d Ψ` of the continuous-spacetime limit.
pub fn spacetime_hamiltonian(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> Result<Vec<PdeTerm>> {
    check_plastic(cfg, a, b).into_result()?;
    assemble_order_one(cfg, a, b)
}

/// Fourier symbol `G(κ) = Σ coeff (iκx)^dx (iκy)^dy` at physical momenta.
pub fn generator_symbol(terms: &[PdeTerm], kx: f64, ky: f64) -> Mat2 {
    terms
        .iter()
        .map(|t| t.coeff * (C64::new(0.0, kx).powu(t.dx_power) * C64::new(0.0, ky).powu(t.dy_power)))
        .sum()
}

/// `½ Σ ν ν Γ̂ Γ̂` over the order-one tuples: the generator without `e^{2iδ}`.
pub fn raw_order_one(cfg: &WalkConfig, a: RationalExp, b: RationalExp, kx: f64, ky: f64) -> Mat2 {
    let (t1x, t1y) = (cfg.coin_x.theta1, cfg.coin_y.theta1);
    enumerate_terms(a, b)
        .iter()
        .map(|t| word_pair(cfg, t) * (t.numeric_weight(kx, ky, t1x, t1y) * 0.5))
        .sum()
}

/// Powers `(Q, Q·a, Q·b)` with `ε = s^Q` making every exponent integral.
fn s_powers(a: RationalExp, b: RationalExp) -> (u32, u32, u32) {
    let q = a.denom().lcm(&b.denom());
    let pa = a.numer() * (q / a.denom());
    let pb = b.numer() * (q / b.denom());
    (q as u32, pa as u32, pb as u32)
}

/// `Ŵ²` at complex `s` with `Δ = s^{Q·a}` and `θ = θ0 + θ1 s^{Q·b}`.
pub fn walk_squared_complex(cfg: &WalkConfig, a: RationalExp, b: RationalExp, kx: f64, ky: f64, s: C64) -> Mat2 {
    let (_, pa, pb) = s_powers(a, b);
    let d = s.powu(pa);
    let sb = s.powu(pb);
    let coin = |j: &crate::coinwalk::CoinJet| {
        (rz(j.zeta0) * rot_complex(Axis::Y, j.theta0 + sb * j.theta1) * rz(j.phi0)) * C64::from_polar(1.0, j.delta)
    };
    let shift = |k: f64| rot_complex(Axis::Z, d * (-2.0 * k));
    let w = shift(kx) * coin(&cfg.coin_x) * shift(ky) * coin(&cfg.coin_y);
    w * w
}

const CAUCHY_RADIUS: f64 = 0.5;
const CAUCHY_POINTS: usize = 64;

/// `lim (Ŵ²(ε) − I)/(2ε)` at physical momenta.
///
/// `Ŵ²` is analytic in `s = ε^{1/Q}`; the `s^Q` Taylor coefficient is taken
/// from a discrete Cauchy integral, which is exact up to aliasing of order
/// `r^N` and avoids any finite-ε extrapolation. Meaningful only when the
/// lower-order coefficients vanish.
pub fn definitional_limit(cfg: &WalkConfig, a: RationalExp, b: RationalExp, kx: f64, ky: f64) -> Result<Mat2> {
    check_exponents(a, b)?;
    let (q, _, _) = s_powers(a, b);
    let n = CAUCHY_POINTS;
    let coeff: Mat2 = (0..n)
        .map(|j| {
            let s = C64::from_polar(CAUCHY_RADIUS, 2.0 * PI * j as f64 / n as f64);
            walk_squared_complex(cfg, a, b, kx, ky, s) * s.powi(-(q as i32))
        })
        .sum();
    Ok(coeff * (0.5 / n as f64))
}

/// Least-squares constant `c` with `i·G_def(k) ≈ c · raw(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub constant: C64,
    /// Largest deviation of a per-momentum fit from `constant`.
    pub spread: f64,
    /// `max_k ‖i G_def(k) − c raw(k)‖`.
    pub residual: f64,
}

fn inner(a: &Mat2, b: &Mat2) -> C64 {
    a.entries().iter().zip(b.entries()).map(|(x, y)| x.conj() * y).sum()
}

/// Fits a scalar between a model symbol and `i` times the definitional limit.
pub fn calibrate_against<F>(
    cfg: &WalkConfig,
    a: RationalExp,
    b: RationalExp,
    momenta: &[(f64, f64)],
    model: F,
) -> Result<Calibration>
where
    F: Fn(f64, f64) -> Mat2,
{
    if momenta.is_empty() {
        return Err(Error::EmptyInput("momentum list is empty"));
    }
    let pairs = momenta
        .iter()
        .map(|&(kx, ky)| Ok((model(kx, ky), definitional_limit(cfg, a, b, kx, ky)? * I)))
        .collect::<Result<Vec<_>>>()?;
    let (num, den) = pairs.iter().fold((C64::new(0.0, 0.0), 0.0), |(n, d), (m, h)| {
        (n + inner(m, h), d + inner(m, m).re)
    });
    if den == 0.0 {
        return Err(Error::EmptyInput("model symbol vanishes on every momentum"));
    }
    let constant = num / den;
    let mut spread: f64 = 0.0;
    let mut residual: f64 = 0.0;
    for (m, h) in &pairs {
        residual = residual.max((*h - *m * constant).op_norm());
        let d = inner(m, m).re;
        if d > 1e-16 {
            spread = spread.max((inner(m, h) / d - constant).norm());
        }
    }
    Ok(Calibration {
        constant,
        spread,
        residual,
    })
}

/// Hamiltonian-convention prefactor relating `½ Σ νν Γ̂Γ̂` to the definitional limit.
pub fn calibrate_prefactor(
    cfg: &WalkConfig,
    a: RationalExp,
    b: RationalExp,
    momenta: &[(f64, f64)],
) -> Result<Calibration> {
    calibrate_against(cfg, a, b, momenta, |kx, ky| raw_order_one(cfg, a, b, kx, ky))
}

/// `a1 = φx + ζy`, `a2 = φy + ζx`.
pub fn phase_sums(cfg: &WalkConfig) -> (f64, f64) {
    (cfg.coin_x.phi0 + cfg.coin_y.zeta0, cfg.coin_y.phi0 + cfg.coin_x.zeta0)
}

/// `θ0x = 2πm`, `θ0y = 2πt + π`: residual, `m`, `t`.
fn plastic_branch(cfg: &WalkConfig) -> (f64, i64, i64) {
    let (m, rm) = nearest_int(cfg.coin_x.theta0 / (2.0 * PI));
    let (t, rt) = nearest_int((cfg.coin_y.theta0 - PI) / (2.0 * PI));
    (2.0 * PI * rm.max(rt), m, t)
}

/// `‖e^{2iδ} Γ̂₀² − I‖`.
pub fn zeroth_order_gate(cfg: &WalkConfig) -> f64 {
    let g = gamma_hat(cfg, 0, 0, 0, 0);
    ((g * g) * phase2(cfg) - Mat2::IDENTITY).op_norm()
}

/// `W1 cos g − W2 cos h` at lattice momenta with `c = 0`.
pub fn constraint_f_plastic(cfg: &WalkConfig, kx: f64, ky: f64) -> f64 {
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let w1 = (x.theta0 / 2.0).cos() * (y.theta0 / 2.0).cos();
    let w2 = (x.theta0 / 2.0).sin() * (y.theta0 / 2.0).sin();
    let zx = x.zeta0 - 2.0 * kx;
    let zy = y.zeta0 - 2.0 * ky;
    let g = (x.phi0 + y.phi0 + zx + zy) / 2.0;
    let h = (y.phi0 - x.phi0 + zx - zy) / 2.0;
    w1 * g.cos() - w2 * h.cos()
}

/// Constraint check for the continuous-spacetime limit.
pub fn check_plastic(cfg: &WalkConfig, a: RationalExp, b: RationalExp) -> ConstraintReport {
    let (residual, m, t) = plastic_branch(cfg);
    let mut angles = ConditionRecord::new("theta_branch", residual < ANGLE_TOL, residual);
    if angles.satisfied {
        angles = angles.with("m", m).with("t", t);
    }

    let gate = zeroth_order_gate(cfg);
    let gate = ConditionRecord::new("zeroth_order_gate", gate <= DIVERGENCE_TOL, gate);

    let exps_ok = check_exponents(a, b).is_ok();
    let exps = ConditionRecord::new("rational_exponents", exps_ok, if exps_ok { 0.0 } else { 1.0 });

    let n_terms = if exps_ok { enumerate_terms(a, b).len() } else { 0 };
    let matched = ConditionRecord::new("exponent_match", n_terms > 0, if n_terms > 0 { 0.0 } else { 1.0 })
        .with("terms", n_terms as i64);

    let plastic = cfg.mode() == JetMode::Plastic;
    let div = if exps_ok && plastic {
        let r = divergence_unchecked(cfg, a, b).residual;
        ConditionRecord::new("no_divergence", r <= DIVERGENCE_TOL, r)
    } else {
        ConditionRecord::new("no_divergence", false, 1.0)
    };

    ConstraintReport::from_conditions(vec![angles, matched, exps, div, gate])
}

/// `a1, a2 ∈ πℤ` with opposite parity: residual and `(a1/π, a2/π)`.
pub fn half_half_family(cfg: &WalkConfig) -> (f64, i64, i64) {
    let (a1, a2) = phase_sums(cfg);
    let (n1, r1) = nearest_int(a1 / PI);
    let (n2, r2) = nearest_int(a2 / PI);
    let residual = PI * r1.max(r2);
    if (n1 + n2).is_even() {
        (residual.max(PI), n1, n2)
    } else {
        (residual, n1, n2)
    }
}

fn require(name: &str, residual: f64, tol: f64) -> Result<()> {
    if residual > tol {
        Err(Error::NonCompliant {
            constraint: name.to_string(),
            residual,
        })
    } else {
        Ok(())
    }
}

/// Transport matrices `(Px, Py)` of `∂t Ψ = (Px ∂x + Py ∂y) Ψ` for `a = b = 1/2`.
///
/// On the non-divergent family `Px = −½(θ1x + sθ1y) σx R_z(−2ζx)` and
/// `Py = ½(θ1x − sθ1y) σx R_z(−2ζx)` with `s = (−1)^{a1/π}`.
pub fn half_half_pde(cfg: &WalkConfig) -> Result<(Mat2, Mat2)> {
    cfg.require_mode(JetMode::Plastic)?;
    require("theta_branch", plastic_branch(cfg).0, ANGLE_TOL)?;
    require("zeroth_order_gate", zeroth_order_gate(cfg), DIVERGENCE_TOL)?;
    let (residual, n1, _) = half_half_family(cfg);
    require("no_divergence", residual, ANGLE_TOL)?;
    let s = if n1.is_even() { 1.0 } else { -1.0 };
    let (t1x, t1y) = (cfg.coin_x.theta1, cfg.coin_y.theta1);
    let m = pauli(Axis::X) * rz(-2.0 * cfg.coin_x.zeta0);
    Ok((m * (-0.5 * (t1x + s * t1y)), m * (0.5 * (t1x - s * t1y))))
}

/// `(P̂x, P̂y)` in the alternative closed form
/// `P̂x = iθ1x σz R_z(2(φy+ζx)) + iθ1y σz σy R_z(−2(ζx+ζy+φx))`,
/// `P̂y = iθ1y σz σy R_z(2φy) + iθ1x σz σy R_z(−2(ζx+ζy+φx))`.
///
/// Kept for comparison; it does not reproduce the order-one assembly.
pub fn half_half_pde_printed(cfg: &WalkConfig) -> Result<(Mat2, Mat2)> {
    cfg.require_mode(JetMode::Plastic)?;
    require("theta_branch", plastic_branch(cfg).0, ANGLE_TOL)?;
    let (x, y) = (&cfg.coin_x, &cfg.coin_y);
    let (sz, szsy) = (pauli(Axis::Z), pauli(Axis::Z) * pauli(Axis::Y));
    let mixed = rz(-2.0 * (x.zeta0 + y.zeta0 + x.phi0));
    let px = (sz * rz(2.0 * (y.phi0 + x.zeta0))) * (I * x.theta1) + (szsy * mixed) * (I * y.theta1);
    let py = (szsy * rz(2.0 * y.phi0)) * (I * y.theta1) + (szsy * mixed) * (I * x.theta1);
    Ok((px, py))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossTermReport {
    pub cancels: bool,
    /// `‖Ĵ1100 + Ĵ1001 + Ĵ0110 + Ĵ0011‖` from the reduced rotation words.
    pub residual: f64,
    /// Same sum taken directly from the enumerated `∂x∂y` tuples.
    pub enumerated_residual: f64,
}

/// Mixed-derivative `∂x∂y` cancellation diagnostic.
pub fn cross_term_report(cfg: &WalkConfig) -> CrossTermReport {
    let (tx, ty) = (cfg.coin_x.theta0, cfg.coin_y.theta0);
    let (a1, a2) = phase_sums(cfg);
    let w = |s1: f64, s2: f64, s3: f64| ry(s1 * tx) * rz(a1) * ry(s2 * ty) * rz(a2) * ry(s3 * tx);
    let j = w(-1.0, 1.0, 1.0) + w(-1.0, -1.0, -1.0) + w(1.0, -1.0, 1.0) + w(1.0, 1.0, -1.0);
    let enumerated: Mat2 = [[1, 1, 0, 0], [1, 0, 0, 1], [0, 1, 1, 0], [0, 0, 1, 1]]
        .iter()
        .map(|l| word_pair(cfg, &TermIndex::from_parts(*l, [0; 4])))
        .sum();
    let residual = j.op_norm();
    let enumerated_residual = enumerated.op_norm();
    CrossTermReport {
        cancels: residual.max(enumerated_residual) <= GROUP_TOL,
        residual,
        enumerated_residual,
    }
}

/// Weight `i^{lx+ly} (−i/2)^{nx+ny} / (lx! ly! nx! ny!)` of `Γ̂` in the one-step
/// expansion of `e^{−iδ} Ŝx Cx Ŝy Cy` in `(kxΔ, kyΔ, θ1x ε^b, θ1y ε^b)`.
pub fn nu_prime(lx: u32, ly: u32, nx: u32, ny: u32) -> C64 {
    let denom = factorial(lx) * factorial(ly) * factorial(nx) * factorial(ny);
    I.powu(lx + ly) * C64::new(0.0, -0.5).powu(nx + ny) / denom
}
