//! Dense complex matrix algebra for small N.

pub mod linalg;
pub mod probes;
pub mod random;
pub mod spectral;
pub mod sumbound;

pub use linalg::{c, CMatrix, C64};
pub use probes::{
    certificate_with, exponential_probe, invertibility_margin, resolvent_probe, strong_hyperbolicity_certificate,
    CertificateOptions, ExponentialProbe, HypMatrixCertificate, InvertibilityMargin, ProbeGrid, ResolventProbe,
};
pub use spectral::{
    canonical_symmetrizer, eigendecompose, functional_calculus, functional_calculus_scalar, spectral_projector,
    Cluster, ContourProjector, SpectralData,
};
pub use sumbound::{sum_bound_check, SumBoundReport};
