use rayon::prelude::*;

use super::grid::{fft_inverse, frequencies, GridFunction};
use crate::error::{Error, Result};
use crate::matrix::{c, C64};

/// Scalar kernel B(x, y) for the direct transform.
pub type Kernel<'a> = &'a (dyn Fn(&[f64], &[f64]) -> C64 + Sync);

/// W_λ u sampled on the x-grid of `u` times a ξ-lattice.
#[derive(Clone, Debug)]
pub struct WavePacketGrid {
    pub lambda: f64,
    pub dims: usize,
    pub n: usize,
    pub l: f64,
    pub components: usize,
    /// ξ points (product lattice in 2-d)
    pub xi: Vec<Vec<f64>>,
    pub xi_spacing: f64,
    /// per ξ point: components × grid points, like `GridFunction::values`
    pub values: Vec<Vec<C64>>,
}

impl WavePacketGrid {
    fn weight(&self) -> f64 {
        (2.0 * self.l / self.n as f64 * self.xi_spacing).powi(self.dims as i32)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sum::<f64>() * self.weight()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn npts(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    /// Σ over (x, ξ) of w(x, ξ)·⟨M(x, ξ) W, V⟩ for another transform V on the
    /// same lattice; `m` returns the matrix as a flat row-major slice.
    pub fn weighted_pairing<F>(&self, other: &WavePacketGrid, weight: F) -> C64
    where
        F: Fn(usize, &[f64], &[C64]) -> Vec<C64> + Sync,
    {
        let np = self.npts();
        let total: C64 = self
            .values
            .par_iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (w, v))| {
                let mut acc = c(0.0, 0.0);
                let mut wv = vec![c(0.0, 0.0); self.components];
                let mut vv = vec![c(0.0, 0.0); self.components];
                for i in 0..np {
                    for q in 0..self.components {
                        wv[q] = w[q * np + i];
                        vv[q] = v[q * np + i];
                    }
                    let mw = weight(i, &self.xi[k], &wv);
                    for q in 0..self.components {
                        acc += vv[q].conj() * mw[q];
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum();
        total * self.weight()
    }
}

/// Fails when the Gaussian window's mass outside the fundamental domain
/// exceeds 1e−12, i.e. when λL² < ln(1e12).
pub fn check_wraparound(lambda: f64, l: f64) -> Result<()> {
    if !(lambda >= 1.0) {
        return Err(Error::Invalid(format!("wave packet scale must be >= 1, got {lambda}")));
    }
    if lambda * l * l < 1e12f64.ln() {
        return Err(Error::WrapAround(lambda));
    }
    Ok(())
}

/// Multiples of √λ/2 inside [lo, hi].
pub fn xi_lattice(lambda: f64, lo: f64, hi: f64) -> Vec<f64> {
    let d = 0.5 * lambda.sqrt();
    let k0 = (lo / d).ceil() as i64;
    let k1 = (hi / d).floor() as i64;
    (k0..=k1).map(|k| k as f64 * d).collect()
}

fn product(axis: &[f64], dims: usize) -> Vec<Vec<f64>> {
    if dims == 1 {
        axis.iter().map(|&x| vec![x]).collect()
    } else {
        axis.iter().flat_map(|&a| axis.iter().map(move |&b| vec![a, b])).collect()
    }
}

/// Largest |η| carrying spectral amplitude above 1e−14 of the maximum.
fn spectral_extent(u: &GridFunction, spec: &[C64]) -> f64 {
    let np = u.npts();
    let max = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let mut ext = 0.0f64;
    for (idx, z) in spec.iter().enumerate() {
        if z.norm() > 1e-14 * max {
            let w = u.wavevector(idx % np);
            ext = ext.max(w.iter().fold(0.0f64, |a, x| a.max(x.abs())));
        }
    }
    ext
}

/// FFT path with the default lattice: ξ-spacing √λ/2 over the spectral
/// extent of u plus 6√λ per axis.  A kernel forces the direct quadrature.
pub fn wavepacket_transform(u: &GridFunction, lambda: f64, b: Option<Kernel>) -> Result<WavePacketGrid> {
    check_wraparound(lambda, u.l)?;
    let spec = u.spectrum();
    let r = spectral_extent(u, &spec) + 6.0 * lambda.sqrt();
    let axis = xi_lattice(lambda, -r, r);
    match b {
        None => transform_from_spectrum(u, &spec, lambda, &axis),
        Some(b) => wavepacket_direct(u, lambda, &axis, Some(b)),
    }
}

/// FFT path on a given ξ axis (product lattice in 2-d).
pub fn wavepacket_transform_on(u: &GridFunction, lambda: f64, xi_axis: &[f64]) -> Result<WavePacketGrid> {
    check_wraparound(lambda, u.l)?;
    transform_from_spectrum(u, &u.spectrum(), lambda, xi_axis)
}

pub(crate) fn transform_points(u: &GridFunction, spec: &[C64], lambda: f64, xi: Vec<Vec<f64>>, spacing: f64) -> WavePacketGrid {
    let np = u.npts();
    let freqs = frequencies(u.n, u.l);
    let pref = (std::f64::consts::PI * lambda).powf(-(u.dims as f64) / 4.0);
    let values: Vec<Vec<C64>> = xi
        .par_iter()
        .map(|x| {
            // g(ξ − η) = exp(−|ξ − η|²/(2λ)) is separable
            let g: Vec<Vec<f64>> =
                x.iter().map(|&xk| freqs.iter().map(|&e| (-(xk - e) * (xk - e) / (2.0 * lambda)).exp()).collect()).collect();
            let mut out = vec![c(0.0, 0.0); spec.len()];
            for q in 0..u.components {
                let block = &mut out[q * np..(q + 1) * np];
                for (i, z) in block.iter_mut().enumerate() {
                    let w = if u.dims == 1 { g[0][i] } else { g[0][i / u.n] * g[1][i % u.n] };
                    *z = spec[q * np + i] * (w * pref);
                }
                fft_inverse(block, u.n, u.dims);
            }
            out
        })
        .collect();
    WavePacketGrid { lambda, dims: u.dims, n: u.n, l: u.l, components: u.components, xi, xi_spacing: spacing, values }
}

fn transform_from_spectrum(u: &GridFunction, spec: &[C64], lambda: f64, axis: &[f64]) -> Result<WavePacketGrid> {
    Ok(transform_points(u, spec, lambda, product(axis, u.dims), 0.5 * lambda.sqrt()))
}

fn wrap(d: f64, l: f64) -> f64 {
    let p = 2.0 * l;
    d - p * ((d + l) / p).floor()
}

/// Direct quadrature of (2π)^{−d/2}(λ/π)^{d/4} ∫ e^{i(x−y)ξ − λ|x−y|²/2} B(x,y) u(y) dy
/// with x − y taken as the minimal periodic image.
pub fn wavepacket_direct(u: &GridFunction, lambda: f64, xi_axis: &[f64], b: Option<Kernel>) -> Result<WavePacketGrid> {
    check_wraparound(lambda, u.l)?;
    let d = u.dims as f64;
    let pref = (2.0 * std::f64::consts::PI).powf(-d / 2.0) * (lambda / std::f64::consts::PI).powf(d / 4.0) * u.cell();
    let np = u.npts();
    let coords: Vec<Vec<f64>> = (0..np).map(|i| u.coords(i)).collect();
    let xi = product(xi_axis, u.dims);
    let values: Vec<Vec<C64>> = xi
        .par_iter()
        .map(|xv| {
            let mut out = vec![c(0.0, 0.0); u.values.len()];
            for (ix, x) in coords.iter().enumerate() {
                let mut acc = vec![c(0.0, 0.0); u.components];
                for (iy, y) in coords.iter().enumerate() {
                    let mut phase = 0.0;
                    let mut r2 = 0.0;
                    for k in 0..u.dims {
                        let dk = wrap(x[k] - y[k], u.l);
                        phase += dk * xv[k];
                        r2 += dk * dk;
                    }
                    let mut kern = c(0.0, phase).exp() * (-0.5 * lambda * r2).exp();
                    if let Some(b) = b {
                        kern *= b(x, y);
                    }
                    for q in 0..u.components {
                        acc[q] += kern * u.values[q * np + iy];
                    }
                }
                for q in 0..u.components {
                    out[q * np + ix] = acc[q] * pref;
                }
            }
            out
        })
        .collect();
    Ok(WavePacketGrid {
        lambda,
        dims: u.dims,
        n: u.n,
        l: u.l,
        components: u.components,
        xi,
        xi_spacing: 0.5 * lambda.sqrt(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// Smooth random function with modes |k| ≤ kmax (a quarter of Nyquist).
    fn band_limited(n: usize, l: f64, kmax: usize, seed: u64) -> GridFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs: Vec<(f64, C64)> = (0..=2 * kmax)
            .map(|k| ((k as f64 - kmax as f64) * PI / l, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
            .collect();
        GridFunction::from_fn(1, n, l, 1, |x| vec![coeffs.iter().map(|(k, a)| a * c(0.0, k * x[0]).exp()).sum()]).unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let u = GridFunction::zeros(1, 64, PI, 1).unwrap();
        assert_eq!(wavepacket_transform(&u, 8.0, None).unwrap().norm(), 0.0);
    }

    #[test]
    fn isometry_on_band_limited() {
        let u = band_limited(256, PI, 30, 1);
        for lambda in [8.0, 32.0, 128.0] {
            let w = wavepacket_transform(&u, lambda, None).unwrap();
            assert!((w.norm() / u.norm() - 1.0).abs() < 1e-6, "{lambda}");
        }
    }

    #[test]
    fn direct_agrees_with_fft() {
        let u = band_limited(64, PI, 8, 2);
        let axis = xi_lattice(16.0, -20.0, 20.0);
        let fast = wavepacket_transform_on(&u, 16.0, &axis).unwrap();
        let slow = wavepacket_direct(&u, 16.0, &axis, None).unwrap();
        let mut err = 0.0f64;
        for (a, b) in fast.values.iter().zip(&slow.values) {
            for (x, y) in a.iter().zip(b) {
                err = err.max((x - y).norm());
            }
        }
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn bounded_kernel_contracts() {
        let u = band_limited(64, PI, 6, 3);
        let b = |x: &[f64], y: &[f64]| c((x[0] * 3.0).cos(), 0.5 * (y[0] * 2.0).sin()) * 0.8;
        // |B| ≤ 0.8·√(1 + 0.25)
        let w = wavepacket_transform(&u, 16.0, Some(&b)).unwrap();
        assert!(w.norm() <= 0.8 * 1.25f64.sqrt() * u.norm());
    }

    #[test]
    fn wraparound_rejected() {
        let u = band_limited(64, 1.0, 4, 4);
        let e = wavepacket_transform(&u, 8.0, None).unwrap_err();
        assert!(e.to_string().contains("Gaussian wrap-around"));
    }

    #[test]
    fn isometry_2d() {
        let u = GridFunction::from_fn(2, 32, PI, 1, |x| vec![c((x[0]).cos() * (2.0 * x[1]).sin(), (x[0] + x[1]).sin())]).unwrap();
        let w = wavepacket_transform(&u, 8.0, None).unwrap();
        assert!((w.norm() / u.norm() - 1.0).abs() < 1e-6);
    }
}
