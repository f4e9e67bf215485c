//! Energy 𝓔_t along a trajectory and its rate against ‖f‖‖u‖ + ‖u‖².

use serde::Serialize;

use super::evolve::{Forcing, Trajectory};
use crate::error::{Error, Result};
use crate::wavepacket::{energy, DyadicFrame, SField};

#[derive(Clone, Debug, Serialize)]
pub struct EnergyMonitor {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    /// centred differences, one-sided at the ends
    pub rates: Vec<f64>,
    pub norms: Vec<f64>,
    pub forcing_norms: Vec<f64>,
    /// |d𝓔/dt| / (‖f‖‖u‖ + ‖u‖²)
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn energy_monitor(traj: &Trajectory, s: SField, forcing: Option<&Forcing>) -> Result<EnergyMonitor> {
    let snaps = &traj.snapshots;
    if snaps.len() < 2 {
        return Err(Error::Invalid("energy monitor needs at least two snapshots".into()));
    }
    let frame = DyadicFrame::for_grid(&snaps[0].u);
    let mut energies = Vec::with_capacity(snaps.len());
    for sn in snaps {
        energies.push(energy(&sn.u, s, &frame)?.energy);
    }
    let times: Vec<f64> = snaps.iter().map(|s| s.t).collect();
    let norms: Vec<f64> = snaps.iter().map(|s| s.norm).collect();
    let forcing_norms: Vec<f64> = snaps
        .iter()
        .map(|sn| match forcing {
            None => 0.0,
            Some(f) => {
                let u = &sn.u;
                let sq: f64 = (0..u.npts()).map(|i| f(sn.t, &u.coords(i)).iter().map(|z| z.norm_sqr()).sum::<f64>()).sum();
                (sq * u.cell()).sqrt()
            }
        })
        .collect();
    let k = snaps.len();
    let rates: Vec<f64> = (0..k)
        .map(|i| {
            let (a, b) = if i == 0 { (0, 1) } else if i == k - 1 { (k - 2, k - 1) } else { (i - 1, i + 1) };
            (energies[b] - energies[a]) / (times[b] - times[a])
        })
        .collect();
    let ratios: Vec<f64> = (0..k)
        .map(|i| {
            let d = forcing_norms[i] * norms[i] + norms[i] * norms[i];
            if d > 0.0 {
                rates[i].abs() / d
            } else {
                0.0
            }
        })
        .collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(EnergyMonitor { times, energies, rates, norms, forcing_norms, ratios, max_ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::{evolve, EvolutionProblem};
    use crate::matrix::{c, linalg, CMatrix};
    use crate::wavepacket::{Coefficients, GridFunction};

    fn run(freq: f64) -> Trajectory {
        let a = linalg::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]);
        let u0 = GridFunction::from_fn(1, 256, 8.0, 2, |x| {
            let g = (-2.0 * x[0] * x[0]).exp();
            vec![c(g * (freq * x[0]).cos(), 0.0), c(0.5 * g, 0.0)]
        })
        .unwrap();
        evolve(&EvolutionProblem::new(Coefficients::constant(vec![a]), u0, 0.2).with_stride(4)).unwrap()
    }

    #[test]
    fn identity_energy_is_constant() {
        let tr = run(4.0);
        let id = |_: &[f64], _: &[f64]| -> crate::Result<CMatrix> { Ok(linalg::identity(2)) };
        let m = energy_monitor(&tr, &id, None).unwrap();
        assert!(m.max_ratio < 1e-5, "{}", m.max_ratio);
    }

    #[test]
    fn broken_symmetrizer_ratio_grows_with_frequency() {
        let broken = |_: &[f64], _: &[f64]| -> crate::Result<CMatrix> { Ok(linalg::from_real_rows(2, &[1.0, 0.0, 0.0, 3.0])) };
        let lo = energy_monitor(&run(2.0), &broken, None).unwrap().max_ratio;
        let hi = energy_monitor(&run(16.0), &broken, None).unwrap().max_ratio;
        assert!(hi > 3.0 * lo, "{lo} {hi}");
    }
}
