//! Exact growing solutions of the 3×3 model with a = 1, superposed over a
//! band of y-frequencies.

use serde::Serialize;

use super::evolve::{reduced_coefficients, widened};
use super::oscillator::growing_root;
use crate::error::{Error, Result};
use crate::matrix::{c, CMatrix, C64};
use crate::symbol::{ASlot, SymbolFamily};
use crate::wavepacket::{fft_inverse, frequencies, GridFunction};

/// Smooth bump supported in [1, 2], equal to 1 at 3/2.
pub fn band_bump(s: f64) -> f64 {
    let t = 2.0 * s - 3.0;
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PacketFrame {
    pub t: f64,
    pub norm: f64,
    pub amplification: f64,
    /// exp(0.9·|Im β|·√λ·t)
    pub single_mode_bound: f64,
    pub residual: f64,
    #[serde(skip)]
    pub u: GridFunction,
}

#[derive(Clone, Debug, Serialize)]
pub struct IllposedPacket {
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub beta: [f64; 2],
    pub frequencies: usize,
    pub eta_spacing: f64,
    pub frames: Vec<PacketFrame>,
    pub max_residual: f64,
}

/// U(t,x,y) = Σ_η Δη φ(η/λ) e^{iβ√η t + iyη} e^{−ηx²/2}(U0 + √η x U1) on
/// the lattice η = πk/l, with U0 = (1,0,0), U1 = (0, (1−i)/β, −2/β).
/// The residual is ‖LU‖/‖U‖ with ∂t exact and ∂x, ∂y spectral.
pub fn illposed_packet<F>(alpha: f64, lambda: f64, phi: F, times: &[f64], n: usize) -> Result<IllposedPacket>
where
    F: Fn(f64) -> f64,
{
    if alpha != 0.0 {
        return Err(Error::Invalid("exact packets exist for alpha = 0 only".into()));
    }
    if !(lambda >= 1.0) {
        return Err(Error::Invalid("lambda must be at least 1".into()));
    }
    // the band [λ, 2λ] must sit below the Nyquist frequency
    let l = (0.9 * std::f64::consts::PI * n as f64 / (4.0 * lambda)).min(8.0);
    if lambda * l * l < 60.0 {
        return Err(Error::Invalid(format!("grid too coarse: n = {n} cannot hold the packet at lambda = {lambda}")));
    }
    let beta = growing_root(c(1.0, 1.0));
    let i = c(0.0, 1.0);
    let u1 = [c(0.0, 0.0), (c(1.0, 0.0) - i) / beta, c(-2.0, 0.0) / beta];
    let fam = widened(&SymbolFamily::example1(ASlot::Const(1.0)), l)?;
    let grid = GridFunction::zeros(2, n, l, 3)?;
    let xs = grid.axis();
    let etas = frequencies(n, l);
    let d_eta = std::f64::consts::PI / l;
    let modes: Vec<(usize, f64, f64)> = etas
        .iter()
        .enumerate()
        .filter_map(|(j, &eta)| {
            let w = phi(eta / lambda);
            (eta > 0.0 && w != 0.0).then_some((j, eta, w))
        })
        .collect();
    if modes.is_empty() {
        return Err(Error::Invalid("no lattice frequency inside the band".into()));
    }
    let coeffs: Vec<Vec<CMatrix>> = xs.iter().map(|&x| reduced_coefficients(&fam, x)).collect::<Result<_>>()?;
    let np = n * n;
    let synth = |t: f64, dt_factor: bool| -> GridFunction {
        let mut g = grid.like();
        for &(j, eta, w) in &modes {
            let sq = eta.sqrt();
            let mut amp = (i * beta * sq * t).exp() * c(w * d_eta * n as f64, 0.0) * (-i * eta * l).exp();
            if dt_factor {
                amp *= i * beta * sq;
            }
            for (ix, &x) in xs.iter().enumerate() {
                let e = (-0.5 * eta * x * x).exp();
                if e < 1e-300 {
                    continue;
                }
                let base = amp * e;
                g.values[ix * n + j] += base;
                for q in 1..3 {
                    g.values[q * np + ix * n + j] += base * u1[q] * (sq * x);
                }
            }
        }
        for q in 0..3 {
            fft_inverse(&mut g.values[q * np..(q + 1) * np], n, 1);
        }
        g
    };
    let mut frames = Vec::new();
    let mut n0 = 0.0;
    for (k, &t) in times.iter().enumerate() {
        let u = synth(t, false);
        let ut = synth(t, true);
        let ux = u.derivative(0);
        let uy = u.derivative(1);
        let mut r = ut.clone();
        for (ix, ms) in coeffs.iter().enumerate() {
            for iy in 0..n {
                let p = ix * n + iy;
                for row in 0..3 {
                    let mut acc = C64::new(0.0, 0.0);
                    for col in 0..3 {
                        acc += ms[0][(row, col)] * ux.values[col * np + p] + ms[1][(row, col)] * uy.values[col * np + p];
                    }
                    r.values[row * np + p] += acc;
                }
            }
        }
        let norm = u.norm();
        if k == 0 {
            n0 = norm;
        }
        let residual = r.norm() / norm;
        frames.push(PacketFrame {
            t,
            norm,
            amplification: norm / n0,
            single_mode_bound: (0.9 * beta.im.abs() * lambda.sqrt() * t).exp(),
            residual,
            u,
        });
    }
    let max_residual = frames.iter().map(|f| f.residual).fold(0.0, f64::max);
    if max_residual > 1e-4 {
        return Err(Error::Convergence(format!(
            "packet residual {max_residual:.3e} exceeds 1e-4 ({} lattice frequencies, spacing {d_eta:.4})",
            modes.len()
        )));
    }
    Ok(IllposedPacket {
        lambda,
        n,
        l,
        beta: [beta.re, beta.im],
        frequencies: modes.len(),
        eta_spacing: d_eta,
        frames,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_support() {
        assert_eq!(band_bump(1.0), 0.0);
        assert_eq!(band_bump(2.0), 0.0);
        assert!((band_bump(1.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn packet_solves_equation_and_grows() {
        let p = illposed_packet(0.0, 64.0, band_bump, &[0.0, 0.25, 0.5], 128).unwrap();
        assert!(p.max_residual < 1e-6, "{}", p.max_residual);
        for f in &p.frames {
            assert!(f.amplification >= f.single_mode_bound, "{f:?}");
        }
        // concentrated near x = 0 at t = 0
        let u = &p.frames[0].u;
        let near: f64 = (0..u.npts()).filter(|&i| u.coords(i)[0].abs() < 0.5).map(|i| u.at(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        let all: f64 = (0..u.npts()).map(|i| u.at(i).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
        assert!(near / all > 0.999);
    }

    #[test]
    fn nonzero_alpha_is_rejected() {
        assert!(illposed_packet(0.5, 64.0, band_bump, &[0.0], 64).is_err());
    }
}
