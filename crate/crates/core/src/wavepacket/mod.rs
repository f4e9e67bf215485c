//! Periodic grid functions, the Gaussian wave-packet transform, dyadic
//! frequency decompositions and the scale-adapted energy.

mod dyadic;
mod energy;
mod grid;
mod transform;

pub use dyadic::{dyadic_decompose, phi0, phi_j, theta_j, DyadicFrame};
pub use energy::{
    commutator_energy_probe, discrete_commutator, energy, localization_probe, Coefficients, CommutatorProbe,
    EnergyReport, Localization, SField,
};
pub use grid::{fft_forward, fft_inverse, frequencies, GridFunction, GridHeader};
pub use transform::{
    check_wraparound, wavepacket_direct, wavepacket_transform, wavepacket_transform_on, xi_lattice, WavePacketGrid,
};
