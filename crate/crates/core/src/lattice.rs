//! Spinor fields on a periodic `Nx × Ny` lattice, spin-dependent shifts,
//! real-space stepping and the discrete Fourier bridge.
//!
//! Site `(l, m)` lives at index `l * ny + m`. Shifts move `ψ^L` towards lower
//! indices and `ψ^R` towards higher ones, so a plane wave `e^{ikl}` picks up the
//! symbol `e^{ikσ_z}`.

use std::io::{BufRead, Read, Write};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::algebra::{exp_herm, Mat2, Spinor, C64, DECOMP_TOL, ZERO};
use crate::coinwalk::{coin_at, momentum, WalkConfig};
use crate::error::{Error, Result};
use crate::par::Execution;

/// Magic bytes opening a binary field snapshot.
pub const BINARY_MAGIC: [u8; 4] = *b"PQWF";

/// CSV header of a field snapshot.
pub const CSV_HEADER: &str = "l,m,re_psi_l,im_psi_l,re_psi_r,im_psi_r";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dir {
    X,
    Y,
}

/// Real-space two-component field with periodic boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    nx: usize,
    ny: usize,
    data: Vec<Spinor>,
}

/// Momentum-space field: entry `(i, j)` holds the transform at `(momentum(i, nx), momentum(j, ny))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KField {
    nx: usize,
    ny: usize,
    data: Vec<Spinor>,
}

fn check_shape(nx: usize, ny: usize) -> Result<()> {
    if nx < 2 || ny < 2 {
        return Err(Error::Shape {
            nx,
            ny,
            reason: "both dimensions must be at least 2",
        });
    }
    Ok(())
}

impl SpinorField {
    pub fn zeros(nx: usize, ny: usize) -> Result<Self> {
        check_shape(nx, ny)?;
        Ok(Self {
            nx,
            ny,
            data: vec![[ZERO; 2]; nx * ny],
        })
    }

    pub fn from_fn(nx: usize, ny: usize, f: impl Fn(usize, usize) -> Spinor) -> Result<Self> {
        check_shape(nx, ny)?;
        let mut data = Vec::with_capacity(nx * ny);
        for l in 0..nx {
            for m in 0..ny {
                data.push(f(l, m));
            }
        }
        Ok(Self { nx, ny, data })
    }

    pub fn from_vec(nx: usize, ny: usize, data: Vec<Spinor>) -> Result<Self> {
        check_shape(nx, ny)?;
        if data.len() != nx * ny {
            return Err(Error::Shape {
                nx,
                ny,
                reason: "payload length does not match dimensions",
            });
        }
        Ok(Self { nx, ny, data })
    }

    /// `e^{i(k_x l + k_y m)} · spinor` at the grid momenta with indices `(jx, jy)`.
    pub fn plane_wave(nx: usize, ny: usize, jx: usize, jy: usize, spinor: Spinor) -> Result<Self> {
        let (kx, ky) = (momentum(jx, nx), momentum(jy, ny));
        Self::from_fn(nx, ny, |l, m| {
            let phase = C64::from_polar(1.0, kx * l as f64 + ky * m as f64);
            [spinor[0] * phase, spinor[1] * phase]
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn data(&self) -> &[Spinor] {
        &self.data
    }

    pub fn get(&self, l: usize, m: usize) -> Spinor {
        self.data[l * self.ny + m]
    }

    pub fn set(&mut self, l: usize, m: usize, v: Spinor) {
        self.data[l * self.ny + m] = v;
    }

    /// `Σ |ψ^L|² + |ψ^R|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|s| s[0].norm_sqr() + s[1].norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.data.iter_mut().for_each(|s| {
                s[0] /= n;
                s[1] /= n;
            });
        }
        self
    }

    /// Largest per-site component difference.
    pub fn max_diff(&self, other: &SpinorField) -> f64 {
        assert_eq!(self.dims(), other.dims(), "field dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
            .fold(0.0, f64::max)
    }

    /// One spin-dependent shift: L reads the next site, R the previous one.
    pub fn shift(&self, dir: Dir) -> SpinorField {
        self.shift_by(dir, 1)
    }

    /// `n`-fold shift; output L at `l` reads input L at `l + n`, R reads `l - n`.
    pub fn shift_by(&self, dir: Dir, n: i64) -> SpinorField {
        let (nx, ny) = (self.nx, self.ny);
        let wrap = |i: usize, d: i64, len: usize| (i as i64 + d).rem_euclid(len as i64) as usize;
        let mut data = Vec::with_capacity(self.data.len());
        for l in 0..nx {
            for m in 0..ny {
                let (lp, mp, lm, mm) = match dir {
                    Dir::X => (wrap(l, n, nx), m, wrap(l, -n, nx), m),
                    Dir::Y => (l, wrap(m, n, ny), l, wrap(m, -n, ny)),
                };
                data.push([self.data[lp * ny + mp][0], self.data[lm * ny + mm][1]]);
            }
        }
        SpinorField { nx, ny, data }
    }

    /// Per-site `ψ ← Cψ`. Rejects non-unitary coins.
    pub fn apply_coin(&self, c: &Mat2) -> Result<SpinorField> {
        self.apply_coin_with(c, Execution::default())
    }

    pub fn apply_coin_with(&self, c: &Mat2, exec: Execution) -> Result<SpinorField> {
        let residual = c.unitarity_residual();
        if residual > DECOMP_TOL {
            return Err(Error::NonUnitary { residual });
        }
        Ok(self.apply_matrix(c, exec))
    }

    /// Per-site multiplication without the unitarity check.
    pub fn apply_matrix(&self, c: &Mat2, exec: Execution) -> SpinorField {
        let mut out = self.clone();
        exec.for_each_chunk(&mut out.data, self.ny, |_, row| {
            row.iter_mut().for_each(|s| *s = c.apply(*s));
        });
        out
    }

    /// One time step `W = V_x V_y`: `V_y` acts first.
    pub fn step(&self, cfg: &WalkConfig, eps: f64) -> Result<SpinorField> {
        self.step_with(cfg, eps, Execution::default())
    }

    pub fn step_with(&self, cfg: &WalkConfig, eps: f64, exec: Execution) -> Result<SpinorField> {
        let cx = coin_at(&cfg.coin_x, eps);
        let cy = coin_at(&cfg.coin_y, eps);
        let after_y = self.apply_coin_with(&cy, exec)?.shift(Dir::Y);
        Ok(after_y.apply_coin_with(&cx, exec)?.shift(Dir::X))
    }

    /// `Σ_terms S_x^{px} S_y^{py} (M ψ)`.
    pub fn apply_stencil<'a>(&self, terms: impl IntoIterator<Item = (i64, i64, &'a Mat2)>) -> SpinorField {
        let mut acc = SpinorField {
            nx: self.nx,
            ny: self.ny,
            data: vec![[ZERO; 2]; self.data.len()],
        };
        for (px, py, m) in terms {
            let moved = self
                .apply_matrix(m, Execution::Sequential)
                .shift_by(Dir::X, px)
                .shift_by(Dir::Y, py);
            acc.data.iter_mut().zip(&moved.data).for_each(|(a, b)| {
                a[0] += b[0];
                a[1] += b[1];
            });
        }
        acc
    }

    pub fn dft(&self) -> KField {
        self.dft_with(Execution::default())
    }

    /// Unnormalized forward transform with kernel `e^{-i(k_x l + k_y m)}`.
    pub fn dft_with(&self, exec: Execution) -> KField {
        KField {
            nx: self.nx,
            ny: self.ny,
            data: fft2(&self.data, self.nx, self.ny, false, exec),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for l in 0..self.nx {
            for m in 0..self.ny {
                let [a, b] = self.get(l, m);
                writeln!(w, "{l},{m},{:.16e},{:.16e},{:.16e},{:.16e}", a.re, a.im, b.re, b.im)?;
            }
        }
        Ok(())
    }

    /// Reads a CSV snapshot; dimensions are inferred from the largest indices.
    pub fn read_csv<R: BufRead>(r: R) -> Result<SpinorField> {
        let mut rows = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 {
                if line.trim() != CSV_HEADER {
                    return Err(Error::Format(format!("unexpected header `{line}`")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 6 {
                return Err(Error::Format(format!("line {}: expected 6 columns", i + 1)));
            }
            let bad = |c: &str| Error::Format(format!("line {}: bad value `{c}`", i + 1));
            let l: usize = cols[0].parse().map_err(|_| bad(cols[0]))?;
            let m: usize = cols[1].parse().map_err(|_| bad(cols[1]))?;
            let mut v = [0.0; 4];
            for (slot, c) in v.iter_mut().zip(&cols[2..]) {
                *slot = c.parse().map_err(|_| bad(c))?;
            }
            rows.push((l, m, [C64::new(v[0], v[1]), C64::new(v[2], v[3])]));
        }
        let nx = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let ny = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut field = SpinorField::zeros(nx, ny)?;
        if rows.len() != nx * ny {
            return Err(Error::Format(format!("{} rows for a {nx}x{ny} lattice", rows.len())));
        }
        for (l, m, s) in rows {
            field.set(l, m, s);
        }
        Ok(field)
    }

    /// Little-endian binary: magic `PQWF`, `u64` Nx, `u64` Ny, then row-major
    /// `(Re ψ^L, Im ψ^L, Re ψ^R, Im ψ^R)` as `f64`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&BINARY_MAGIC)?;
        w.write_all(&(self.nx as u64).to_le_bytes())?;
        w.write_all(&(self.ny as u64).to_le_bytes())?;
        for s in &self.data {
            for x in [s[0].re, s[0].im, s[1].re, s[1].im] {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<SpinorField> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != BINARY_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word)?;
        let nx = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word)?;
        let ny = u64::from_le_bytes(word) as usize;
        check_shape(nx, ny)?;
        let mut data = Vec::with_capacity(nx * ny);
        let mut buf = [0u8; 32];
        for _ in 0..nx * ny {
            r.read_exact(&mut buf)?;
            let f = |i: usize| f64::from_le_bytes(buf[8 * i..8 * i + 8].try_into().unwrap());
            data.push([C64::new(f(0), f(1)), C64::new(f(2), f(3))]);
        }
        if r.read(&mut buf)? != 0 {
            return Err(Error::Format("trailing bytes after payload".into()));
        }
        SpinorField::from_vec(nx, ny, data)
    }
}

impl KField {
    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn data(&self) -> &[Spinor] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Spinor {
        self.data[i * self.ny + j]
    }

    pub fn momenta(&self, i: usize, j: usize) -> (f64, f64) {
        (momentum(i, self.nx), momentum(j, self.ny))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|s| s[0].norm_sqr() + s[1].norm_sqr()).sum()
    }

    pub fn idft(&self) -> SpinorField {
        self.idft_with(Execution::default())
    }

    /// Inverse transform, normalized by `1/(NxNy)`.
    pub fn idft_with(&self, exec: Execution) -> SpinorField {
        SpinorField {
            nx: self.nx,
            ny: self.ny,
            data: fft2(&self.data, self.nx, self.ny, true, exec),
        }
    }

    /// `ψ̂(k) ← M(k) ψ̂(k)` at every grid momentum.
    pub fn map_symbol<F>(&self, exec: Execution, symbol: F) -> Result<KField>
    where
        F: Fn(f64, f64) -> Result<Mat2> + Sync + Send,
    {
        let ny = self.ny;
        let mats = exec.map_range(self.data.len(), |idx| {
            let (kx, ky) = self.momenta(idx / ny, idx % ny);
            symbol(kx, ky)
        });
        let mut data = Vec::with_capacity(self.data.len());
        for (m, s) in mats.into_iter().zip(&self.data) {
            data.push(m?.apply(*s));
        }
        Ok(KField {
            nx: self.nx,
            ny: self.ny,
            data,
        })
    }
}

/// How [`evolve_by_symbol`] turns the symbol into a propagator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolMode {
    /// `e^{-iH(k)t}` for Hermitian `H(k)`.
    Hamiltonian,
    /// `e^{G(k)t}` for a generator `∂_t ψ̂ = G(k) ψ̂`.
    Generator,
}

/// Evolves a field for time `t` mode by mode.
pub fn evolve_by_symbol<F>(field: &SpinorField, symbol: F, t: f64, mode: SymbolMode) -> Result<SpinorField>
where
    F: Fn(f64, f64) -> Mat2 + Sync + Send,
{
    evolve_by_symbol_with(field, symbol, t, mode, Execution::default())
}

pub fn evolve_by_symbol_with<F>(
    field: &SpinorField,
    symbol: F,
    t: f64,
    mode: SymbolMode,
    exec: Execution,
) -> Result<SpinorField>
where
    F: Fn(f64, f64) -> Mat2 + Sync + Send,
{
    let k = field.dft_with(exec).map_symbol(exec, |kx, ky| {
        let s = symbol(kx, ky);
        match mode {
            SymbolMode::Hamiltonian => exp_herm(&s, t),
            SymbolMode::Generator => Ok((s * t).exp()),
        }
    })?;
    Ok(k.idft_with(exec))
}

/// Multiplies every Fourier mode by `symbol(k)` and transforms back.
pub fn apply_symbol<F>(field: &SpinorField, symbol: F) -> SpinorField
where
    F: Fn(f64, f64) -> Mat2 + Sync + Send,
{
    let exec = Execution::default();
    field
        .dft_with(exec)
        .map_symbol(exec, |kx, ky| Ok(symbol(kx, ky)))
        .expect("infallible symbol")
        .idft_with(exec)
}

/// Componentwise 2-D FFT of a row-major spinor array.
fn fft2(input: &[Spinor], nx: usize, ny: usize, inverse: bool, exec: Execution) -> Vec<Spinor> {
    let mut planner = FftPlanner::<f64>::new();
    let (row_fft, col_fft): (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) = if inverse {
        (planner.plan_fft_inverse(ny), planner.plan_fft_inverse(nx))
    } else {
        (planner.plan_fft_forward(ny), planner.plan_fft_forward(nx))
    };
    let scale = if inverse { 1.0 / (nx * ny) as f64 } else { 1.0 };
    let mut out = input.to_vec();
    for comp in 0..2 {
        let mut plane: Vec<C64> = input.iter().map(|s| s[comp]).collect();
        exec.for_each_chunk(&mut plane, ny, |_, row| row_fft.process(row));
        // columns: transpose, transform rows of length nx, transpose back
        let mut t = vec![ZERO; nx * ny];
        for l in 0..nx {
            for m in 0..ny {
                t[m * nx + l] = plane[l * ny + m];
            }
        }
        exec.for_each_chunk(&mut t, nx, |_, col| col_fft.process(col));
        for l in 0..nx {
            for m in 0..ny {
                out[l * ny + m][comp] = t[m * nx + l] * scale;
            }
        }
    }
    out
}
