//! Coin jets, the Fourier-space walk operator and its first-order blocks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{pauli, ry, rz, Axis, Mat2, C64};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rational::RationalExp;

/// Which ε-expansion a jet describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetMode {
    /// Every angle expands linearly in the time step.
    Time,
    /// Only θ expands, as `θ0 + θ1 ε^b`.
    Plastic,
}

/// First-order angle jet of one coin, `C = e^{iδ} R_z(ζ) R_y(θ) R_z(φ)`.
///
/// Angles are kept unreduced so integer multiples of π stay recoverable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoinJet {
    pub delta: f64,
    pub zeta0: f64,
    pub zeta1: f64,
    pub theta0: f64,
    pub theta1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub b_exp: RationalExp,
    pub mode: JetMode,
}

impl CoinJet {
    pub fn time(delta: f64, zeta: [f64; 2], theta: [f64; 2], phi: [f64; 2]) -> Result<Self> {
        Self {
            delta,
            zeta0: zeta[0],
            zeta1: zeta[1],
            theta0: theta[0],
            theta1: theta[1],
            phi0: phi[0],
            phi1: phi[1],
            b_exp: RationalExp::ONE,
            mode: JetMode::Time,
        }
        .validated()
    }

    pub fn plastic(delta: f64, zeta: f64, theta: [f64; 2], phi: f64, b: RationalExp) -> Result<Self> {
        Self {
            delta,
            zeta0: zeta,
            zeta1: 0.0,
            theta0: theta[0],
            theta1: theta[1],
            phi0: phi,
            phi1: 0.0,
            b_exp: b,
            mode: JetMode::Plastic,
        }
        .validated()
    }

    /// Every angle zero: the identity coin in either mode.
    pub fn identity(mode: JetMode) -> Self {
        Self {
            delta: 0.0,
            zeta0: 0.0,
            zeta1: 0.0,
            theta0: 0.0,
            theta1: 0.0,
            phi0: 0.0,
            phi1: 0.0,
            b_exp: RationalExp::ONE,
            mode,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let angles = [
            self.delta,
            self.zeta0,
            self.zeta1,
            self.theta0,
            self.theta1,
            self.phi0,
            self.phi1,
        ];
        if !angles.iter().all(|a| a.is_finite()) {
            return Err(Error::InvalidJet("angles must be finite".into()));
        }
        self.b_exp.check_b()?;
        match self.mode {
            JetMode::Time if self.b_exp != RationalExp::ONE => {
                Err(Error::InvalidJet("continuous-time jets expand linearly (b = 1)".into()))
            }
            JetMode::Plastic if self.zeta1 != 0.0 || self.phi1 != 0.0 => Err(Error::InvalidJet(
                "plastic jets expand only theta (zeta1 = phi1 = 0)".into(),
            )),
            _ => Ok(self),
        }
    }

    /// `(ζ, θ, φ)` at `eps`.
    pub fn angles_at(&self, eps: f64) -> (f64, f64, f64) {
        match self.mode {
            JetMode::Time => (
                self.zeta0 + self.zeta1 * eps,
                self.theta0 + self.theta1 * eps,
                self.phi0 + self.phi1 * eps,
            ),
            JetMode::Plastic => (
                self.zeta0,
                self.theta0 + self.theta1 * eps.powf(self.b_exp.value()),
                self.phi0,
            ),
        }
    }
}

/// `e^{iδ} R_z(ζ) R_y(θ) R_z(φ)`.
pub fn coin(delta: f64, zeta: f64, theta: f64, phi: f64) -> Mat2 {
    (rz(zeta) * ry(theta) * rz(phi)).scale(Complex64::from_polar(1.0, delta))
}

pub fn coin_at(jet: &CoinJet, eps: f64) -> Mat2 {
    let (zeta, theta, phi) = jet.angles_at(eps);
    coin(jet.delta, zeta, theta, phi)
}

/// `e^{ikΔσ_z} = R_z(-2kΔ)`.
pub fn shift_symbol(k: f64, delta_spatial: f64) -> Mat2 {
    rz(-2.0 * k * delta_spatial)
}

/// Two coins, a stroboscopic step and a spatial scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub coin_x: CoinJet,
    pub coin_y: CoinJet,
    pub tau: u32,
    /// Space exponent: `Δ = ε^a` when `a > 0`.
    pub a_exp: RationalExp,
    /// Lattice spacing when `a = 0`.
    pub delta_spatial: f64,
}

impl WalkConfig {
    /// Continuous-time walk with unit lattice spacing.
    pub fn time(coin_x: CoinJet, coin_y: CoinJet, tau: u32) -> Result<Self> {
        Self {
            coin_x,
            coin_y,
            tau,
            a_exp: RationalExp::ZERO,
            delta_spatial: 1.0,
        }
        .validated()
    }

    /// Plastic walk with `τ = 2` and `Δ = ε^a`.
    pub fn plastic(coin_x: CoinJet, coin_y: CoinJet, a: RationalExp) -> Result<Self> {
        Self {
            coin_x,
            coin_y,
            tau: 2,
            a_exp: a,
            delta_spatial: 1.0,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.coin_x.validated()?;
        self.coin_y.validated()?;
        if self.coin_x.mode != self.coin_y.mode {
            return Err(Error::InvalidConfig("both coins must share a jet mode".into()));
        }
        if self.tau == 0 {
            return Err(Error::InvalidConfig("tau must be at least 1".into()));
        }
        self.a_exp.check_a()?;
        if !(self.delta_spatial.is_finite() && self.delta_spatial > 0.0) {
            return Err(Error::InvalidConfig("delta_spatial must be positive".into()));
        }
        Ok(self)
    }

    pub fn mode(&self) -> JetMode {
        self.coin_x.mode
    }

    pub fn delta(&self) -> f64 {
        self.coin_x.delta + self.coin_y.delta
    }

    /// Lattice spacing at `eps`.
    pub fn spacing(&self, eps: f64) -> f64 {
        if self.a_exp.is_zero() {
            self.delta_spatial
        } else {
            eps.powf(self.a_exp.value())
        }
    }

    pub fn require_mode(&self, mode: JetMode) -> Result<()> {
        if self.mode() == mode {
            Ok(())
        } else {
            Err(Error::ModeMismatch {
                expected: match mode {
                    JetMode::Time => "continuous-time",
                    JetMode::Plastic => "plastic",
                },
            })
        }
    }
}

/// `Ŵ(k) = Ŝ_x(k_x) C_x(ε) Ŝ_y(k_y) C_y(ε)` with spacing `Δ(ε)`.
pub fn walk_k(cfg: &WalkConfig, kx: f64, ky: f64, eps: f64) -> Mat2 {
    let d = cfg.spacing(eps);
    walk_from_coins(&coin_at(&cfg.coin_x, eps), &coin_at(&cfg.coin_y, eps), kx * d, ky * d)
}

/// `Ŝ(kx) C_x Ŝ(ky) C_y` for already-evaluated coins and lattice momenta.
pub fn walk_from_coins(cx: &Mat2, cy: &Mat2, kx: f64, ky: f64) -> Mat2 {
    shift_symbol(kx, 1.0) * *cx * shift_symbol(ky, 1.0) * *cy
}

/// `(A_j, B_j)` with `Ŝ_j(k) C_j(ε) = e^{iδ_j}(A_j - (iε/2) B_j) + O(ε²)`; `k` is the lattice momentum.
pub fn first_order_blocks(jet: &CoinJet, k: f64) -> Result<(Mat2, Mat2)> {
    if jet.mode != JetMode::Time {
        return Err(Error::ModeMismatch {
            expected: "continuous-time",
        });
    }
    let zeta_p = jet.zeta0 - 2.0 * k;
    let a = rz(zeta_p) * ry(jet.theta0) * rz(jet.phi0);
    let sz = pauli(Axis::Z);
    let b = (sz * a) * jet.zeta1 + (pauli(Axis::Y) * rz(-2.0 * zeta_p) * a) * jet.theta1 + (a * sz) * jet.phi1;
    Ok((a, b))
}

/// `(A, B)` for the whole step: `A = A_x A_y`, `B = A_x B_y + B_x A_y`.
pub fn step_blocks(cfg: &WalkConfig, kx: f64, ky: f64) -> Result<(Mat2, Mat2)> {
    let d = cfg.delta_spatial;
    let (ax, bx) = first_order_blocks(&cfg.coin_x, kx * d)?;
    let (ay, by) = first_order_blocks(&cfg.coin_y, ky * d)?;
    Ok((ax * ay, ax * by + bx * ay))
}

/// Zeroth and first ε-coefficients of `Ŵ^τ`:
/// `(e^{iδ}A)^τ` and `-(i/2)(e^{iδ}A)^τ A⁻¹ Σ_j A⁻ʲ B Aʲ`.
pub fn walk_power_expansion(cfg: &WalkConfig, kx: f64, ky: f64) -> Result<(Mat2, Mat2)> {
    cfg.require_mode(JetMode::Time)?;
    let (a, b) = step_blocks(cfg, kx, ky)?;
    let phase = Complex64::from_polar(1.0, cfg.delta());
    let zeroth = a.scale(phase).powu(cfg.tau as u64);
    // A is unitary, so A⁻¹ = A†.
    let a_inv = a.adjoint();
    let mut sum = Mat2::ZERO;
    let (mut left, mut right) = (Mat2::IDENTITY, Mat2::IDENTITY);
    for _ in 0..cfg.tau {
        sum += left * b * right;
        left = left * a_inv;
        right = right * a;
    }
    let first = (zeroth * a_inv * sum).scale(C64::new(0.0, -0.5));
    Ok((zeroth, first))
}

/// Uniform momentum grid `k_j = 2πj/N` folded into `(-π, π]`, matching the DFT momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KGrid {
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub exec: Execution,
}

impl KGrid {
    pub fn new(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            exec: Execution::default(),
        }
    }

    pub fn square(n: usize) -> Self {
        Self::new(n, n)
    }

    pub fn with_exec(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major `(kx, ky)` list.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::with_capacity(self.len());
        for i in 0..self.nx {
            for j in 0..self.ny {
                pts.push((momentum(i, self.nx), momentum(j, self.ny)));
            }
        }
        pts
    }

    /// `max f(kx, ky)` over the grid.
    pub fn max_over<F>(&self, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        self.exec.max(&self.points(), |&(kx, ky)| f(kx, ky))
    }
}

/// Momentum of DFT index `j` on an `n`-site ring, in `(-π, π]`.
pub fn momentum(j: usize, n: usize) -> f64 {
    let k = 2.0 * PI * j as f64 / n as f64;
    if k > PI {
        k - 2.0 * PI
    } else {
        k
    }
}
