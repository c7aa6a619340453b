//! Seeded parameter draws shared by the acceptance suite.

use std::f64::consts::PI;

use plasticwalk::{CoinJet, RationalExp, WalkConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uni(r: &mut impl Rng) -> f64 {
    r.gen_range(-3.0..3.0)
}

pub fn half() -> RationalExp {
    RationalExp::HALF
}

/// Compliant continuous-time walk on branch `nu`.
pub fn time_compliant(r: &mut impl Rng, nu: u8, tau: u32) -> WalkConfig {
    let m = r.gen_range(-2..=2) as f64;
    let t = r.gen_range(-2..=2) as f64;
    let p = [-3.0, -1.0, 1.0, 3.0][r.gen_range(0..4)];
    let dx = uni(r);
    let nu = nu as f64;
    let cx = CoinJet::time(dx, [uni(r), uni(r)], [2.0 * PI * m + nu * PI, uni(r)], [uni(r), uni(r)]).unwrap();
    let cy = CoinJet::time(
        -p * PI / 2.0 - dx,
        [uni(r), uni(r)],
        [2.0 * PI * t + (1.0 - nu) * PI, uni(r)],
        [uni(r), uni(r)],
    )
    .unwrap();
    WalkConfig::time(cx, cy, tau).unwrap()
}

pub fn time_generic(r: &mut impl Rng, tau: u32) -> WalkConfig {
    let mut jet = || CoinJet::time(uni(r), [uni(r), uni(r)], [uni(r), uni(r)], [uni(r), uni(r)]).unwrap();
    let (cx, cy) = (jet(), jet());
    WalkConfig::time(cx, cy, tau).unwrap()
}

/// Plastic walk with `θ0x = 2πm`, `θ0y = 2πt + π`, `e^{2iδ} = −1` and prescribed `a1 = φx + ζy`, `a2 = φy + ζx`.
pub fn plastic_branch(r: &mut impl Rng, a1: f64, a2: f64, a: RationalExp, b: RationalExp) -> WalkConfig {
    let (zx, zy, dx) = (uni(r), uni(r), uni(r));
    let m = r.gen_range(-2..=2) as f64;
    let t = r.gen_range(-2..=2) as f64;
    let p = [-3.0, -1.0, 1.0, 3.0][r.gen_range(0..4)];
    let cx = CoinJet::plastic(dx, zx, [2.0 * PI * m, uni(r)], a1 - zy, b).unwrap();
    let cy = CoinJet::plastic(-p * PI / 2.0 - dx, zy, [2.0 * PI * t + PI, uni(r)], a2 - zx, b).unwrap();
    WalkConfig::plastic(cx, cy, a).unwrap()
}

/// `a1 ∈ π/2·odd`, `a2 ∈ π/2·ℤ`.
pub fn plastic_stated_family(r: &mut impl Rng) -> WalkConfig {
    let a1 = PI / 2.0 * (2 * r.gen_range(-3..3) + 1) as f64;
    let a2 = PI / 2.0 * r.gen_range(-3..3) as f64;
    plastic_branch(r, a1, a2, half(), half())
}

/// `a1, a2 ∈ πℤ` with opposite parity.
pub fn plastic_corrected_family(r: &mut impl Rng) -> WalkConfig {
    let u = r.gen_range(-3..3) as f64;
    let v = r.gen_range(-3..3) as f64;
    plastic_branch(r, PI * (u + v + 1.0), PI * (u - v), half(), half())
}

pub fn plastic_generic(r: &mut impl Rng) -> WalkConfig {
    let mut jet = || CoinJet::plastic(uni(r), uni(r), [uni(r), uni(r)], uni(r), half()).unwrap();
    let (cx, cy) = (jet(), jet());
    WalkConfig::plastic(cx, cy, half()).unwrap()
}

pub fn random_k(r: &mut impl Rng) -> (f64, f64) {
    (r.gen_range(-PI..PI), r.gen_range(-PI..PI))
}
