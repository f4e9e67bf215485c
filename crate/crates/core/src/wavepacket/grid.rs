use std::cell::RefCell;
use std::io::{Read, Write};
use std::path::Path;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c, C64};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_axes(data: &mut [C64], n: usize, dims: usize, inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse { p.plan_fft_inverse(n) } else { p.plan_fft_forward(n) };
        // last axis is contiguous
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        if dims == 2 {
            let mut col = vec![c(0.0, 0.0); n];
            for j in 0..n {
                for i in 0..n {
                    col[i] = data[i * n + j];
                }
                plan.process(&mut col);
                for i in 0..n {
                    data[i * n + j] = col[i];
                }
            }
        }
    });
}

/// Unnormalised forward DFT over all axes of one component.
pub fn fft_forward(data: &mut [C64], n: usize, dims: usize) {
    fft_axes(data, n, dims, false);
}

/// Inverse DFT including the 1/n^d normalisation.
pub fn fft_inverse(data: &mut [C64], n: usize, dims: usize) {
    fft_axes(data, n, dims, true);
    let s = 1.0 / (n as f64).powi(dims as i32);
    for v in data.iter_mut() {
        *v *= s;
    }
}

/// Angular frequencies πk/L of the DFT bins, in FFT order.
pub fn frequencies(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            std::f64::consts::PI * kk / l
        })
        .collect()
}

/// Samples on the periodic box [−L, L)^d, n points per axis, several
/// components stored one after another.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub dims: usize,
    pub n: usize,
    pub l: f64,
    pub components: usize,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridHeader {
    pub schema_version: u32,
    pub dims: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub components: usize,
    pub encoding: String,
}

const MAGIC: &[u8; 8] = b"SYMLABGF";

impl GridFunction {
    pub fn zeros(dims: usize, n: usize, l: f64, components: usize) -> Result<Self> {
        if dims != 1 && dims != 2 {
            return Err(Error::Dimension(format!("grid functions are 1- or 2-dimensional, got {dims}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::Invalid(format!("grid size {n} is not a power of two")));
        }
        if !(l > 0.0) || components == 0 {
            return Err(Error::Invalid("grid needs L > 0 and at least one component".into()));
        }
        Ok(GridFunction { dims, n, l, components, values: vec![c(0.0, 0.0); components * n.pow(dims as u32)] })
    }

    pub fn from_fn<F>(dims: usize, n: usize, l: f64, components: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<C64>,
    {
        let mut g = Self::zeros(dims, n, l, components)?;
        let np = g.npts();
        for i in 0..np {
            let v = f(&g.coords(i));
            if v.len() != components {
                return Err(Error::Dimension("component count mismatch".into()));
            }
            for (k, z) in v.into_iter().enumerate() {
                g.values[k * np + i] = z;
            }
        }
        g.check_finite()?;
        Ok(g)
    }

    pub fn like(&self) -> Self {
        GridFunction { values: vec![c(0.0, 0.0); self.values.len()], ..self.clone() }
    }

    pub fn npts(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.n).map(|i| -self.l + i as f64 * self.h()).collect()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let h = self.h();
        if self.dims == 1 {
            vec![-self.l + idx as f64 * h]
        } else {
            vec![-self.l + (idx / self.n) as f64 * h, -self.l + (idx % self.n) as f64 * h]
        }
    }

    pub fn component(&self, k: usize) -> &[C64] {
        let np = self.npts();
        &self.values[k * np..(k + 1) * np]
    }

    pub fn component_mut(&mut self, k: usize) -> &mut [C64] {
        let np = self.npts();
        &mut self.values[k * np..(k + 1) * np]
    }

    /// Sample vector (all components) at grid index `idx`.
    pub fn at(&self, idx: usize) -> Vec<C64> {
        let np = self.npts();
        (0..self.components).map(|k| self.values[k * np + idx]).collect()
    }

    pub fn cell(&self) -> f64 {
        self.h().powi(self.dims as i32)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn inner(&self, other: &GridFunction) -> C64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum::<C64>() * self.cell()
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.dims == other.dims && self.n == other.n && self.l == other.l && self.components == other.components
    }

    /// DFT of each component (unnormalised, FFT order).
    pub fn spectrum(&self) -> Vec<C64> {
        let mut out = self.values.clone();
        let np = self.npts();
        for k in 0..self.components {
            fft_forward(&mut out[k * np..(k + 1) * np], self.n, self.dims);
        }
        out
    }

    pub fn from_spectrum(&self, spec: Vec<C64>) -> Self {
        let mut g = GridFunction { values: spec, ..self.clone() };
        let np = self.npts();
        for k in 0..self.components {
            fft_inverse(&mut g.values[k * np..(k + 1) * np], self.n, self.dims);
        }
        g
    }

    /// Wavevector of DFT bin `idx` (FFT order per axis).
    pub fn wavevector(&self, idx: usize) -> Vec<f64> {
        let f = frequencies(self.n, self.l);
        if self.dims == 1 {
            vec![f[idx]]
        } else {
            vec![f[idx / self.n], f[idx % self.n]]
        }
    }

    /// Applies the Fourier multiplier m(η) to every component.
    pub fn multiplier<F: Fn(&[f64]) -> C64>(&self, m: F) -> Self {
        let mut spec = self.spectrum();
        let np = self.npts();
        let weights: Vec<C64> = (0..np).map(|i| m(&self.wavevector(i))).collect();
        for k in 0..self.components {
            for i in 0..np {
                spec[k * np + i] *= weights[i];
            }
        }
        self.from_spectrum(spec)
    }

    /// Spectral partial derivative ∂/∂x_axis.
    pub fn derivative(&self, axis: usize) -> Self {
        self.multiplier(|eta| c(0.0, eta[axis]))
    }

    pub fn header(&self) -> GridHeader {
        GridHeader {
            schema_version: 1,
            dims: self.dims,
            n: self.n,
            l: self.l,
            components: self.components,
            encoding: "f64-le-complex-interleaved".into(),
        }
    }

    /// Binary layout: magic, u32 dims, u32 n, u32 components, f64 L, then
    /// (re, im) pairs, all little endian.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        for v in [self.dims as u32, self.n as u32, self.components as u32] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.l.to_le_bytes())?;
        for z in &self.values {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse { pos: 0, msg: "not a grid function file".into() });
        }
        let mut u = [0u8; 4];
        let mut next_u32 = |r: &mut R| -> Result<usize> {
            r.read_exact(&mut u)?;
            Ok(u32::from_le_bytes(u) as usize)
        };
        let dims = next_u32(&mut r)?;
        let n = next_u32(&mut r)?;
        let components = next_u32(&mut r)?;
        let mut f = [0u8; 8];
        r.read_exact(&mut f)?;
        let l = f64::from_le_bytes(f);
        let mut g = Self::zeros(dims, n, l, components)?;
        for z in g.values.iter_mut() {
            r.read_exact(&mut f)?;
            let re = f64::from_le_bytes(f);
            r.read_exact(&mut f)?;
            *z = c(re, f64::from_le_bytes(f));
        }
        g.check_finite()?;
        Ok(g)
    }

    /// Writes `<stem>.bin` and the JSON sidecar `<stem>.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let bin = std::fs::File::create(dir.join(format!("{stem}.bin")))?;
        self.write_binary(std::io::BufWriter::new(bin))?;
        let json = serde_json::to_string_pretty(&self.header()).map_err(|e| Error::Invalid(e.to_string()))?;
        std::fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = GridFunction::from_fn(2, 8, 1.5, 2, |x| vec![c(x[0], x[1]), c(1.0, -x[0] * x[1])]).unwrap();
        let mut buf = Vec::new();
        g.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 12 + 8 + 16 * 128);
        assert_eq!(GridFunction::read_binary(&buf[..]).unwrap(), g);
        assert!(GridFunction::read_binary(&b"garbage!"[..]).is_err());
    }

    #[test]
    fn spectral_derivative_of_mode() {
        let g = GridFunction::from_fn(1, 64, std::f64::consts::PI, 1, |x| vec![c(0.0, 3.0 * x[0]).exp()]).unwrap();
        let d = g.derivative(0);
        for i in 0..64 {
            assert!((d.values[i] - g.values[i] * c(0.0, 3.0)).norm() < 1e-11);
        }
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(GridFunction::zeros(1, 48, 1.0, 1).is_err());
        assert!(GridFunction::zeros(3, 8, 1.0, 1).is_err());
    }
}
