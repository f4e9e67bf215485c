//! Cauchy problems for the model systems: evolutions, energy monitoring,
//! the oscillator behind the growing modes, and growth-rate sweeps.

mod evolve;
mod growth;
mod monitor;
mod oscillator;
mod packet;

pub use evolve::{evolve, CflReport, EvolutionProblem, Forcing, Snapshot, Taper, Trajectory, RK4_MARGIN};
pub use growth::{
    example1_growth, middle_third_rate, mode_growth, physical_growth, power_fit, symmetric_control, GrowthData,
    GrowthOptions, GrowthPoint, GrowthReport, PhysicalGrowth, PowerFit,
};
pub use monitor::{energy_monitor, EnergyMonitor};
pub use oscillator::{
    first_order_shift, growing_root, oscillator_eigen, oscillator_eigen_with, GaussianSubstitution, Oscillator,
    OscillatorOptions, OscillatorStep,
};
pub use packet::{band_bump, illposed_packet, IllposedPacket, PacketFrame};
