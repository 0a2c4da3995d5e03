//! Linear response and noise of a particle coupled to a quantum field.
//!
//! Units are reduced, `ħ = k_B = c = 1`, and Fourier transforms follow
//! `f(t) = ∫dω/2π f[ω] e^{−iωt}`. Every numerical routine is generic over
//! [`Real`] (`f32` or `f64`); the aliases below fix `f64`.
//!
//! * [`linear_coupling`]: point charge with a form factor, generic linear couplings.
//! * [`smatrix`] and [`radiation_pressure`]: scatterer in a thermal field.
//! * [`dispersion`]: subtracted dispersion relations, FDT checks, induced masses.
//! * [`stability`]: impedance, passivity, admittance poles.
//! * [`dynamics`]: noise synthesis and trajectory ensembles.

pub mod contour;
pub mod dispersion;
pub mod dynamics;
pub mod error;
pub mod linear_coupling;
pub mod quadrature;
pub mod radiation_pressure;
pub mod real;
pub mod smatrix;
pub mod spectrum;
pub mod stability;
pub mod system;

pub use dispersion::{DetailedBalance, MassIntegral, TailModel, ThermalMass};
pub use dynamics::{EnsembleConfig, StatEstimate};
pub use error::{Error, Result};
pub use radiation_pressure::QuasistaticCoefficients;
pub use real::Real;
pub use stability::{MotionClass, MotionReport};
pub use system::Binding;

pub type Complex64 = num_complex::Complex<f64>;
pub type FrequencyGrid = spectrum::FrequencyGrid<f64>;
pub type ComplexSpectrum = spectrum::ComplexSpectrum<f64>;
pub type ThermalState = system::ThermalState<f64>;
pub type MechanicalSystem = system::MechanicalSystem<f64>;
pub type Coupling = system::Coupling<f64>;
pub type SMatrixModel = smatrix::SMatrixModel<f64>;
pub type LinearCoupling = linear_coupling::LinearCoupling<f64>;
pub type Regulator = linear_coupling::Regulator<f64>;
pub type CouplingTable = linear_coupling::CouplingTable<f64>;
pub type ImpedanceModel = stability::ImpedanceModel<f64>;
pub type SpectralMeasure = stability::SpectralMeasure<f64>;
pub type NoiseRealization = dynamics::NoiseRealization<f64>;
pub type Trajectory = dynamics::Trajectory<f64>;
pub type TrajectoryEnsemble = dynamics::TrajectoryEnsemble<f64>;
pub type Rect = contour::Rect<f64>;
