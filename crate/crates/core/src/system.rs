//! Thermal input states and mechanical systems.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linear_coupling::LinearCoupling;
use crate::real::Real;
use crate::smatrix::SMatrixModel;

/// Temperature of the input field (`T = 0` is the vacuum).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ThermalState<T> {
    temperature: T,
}

impl<T: Real> ThermalState<T> {
    pub fn new(temperature: T) -> Result<Self> {
        if !(temperature >= T::zero() && temperature.is_finite()) {
            return Err(invalid("temperature must be finite and non-negative"));
        }
        Ok(Self { temperature })
    }

    pub fn vacuum() -> Self {
        Self {
            temperature: T::zero(),
        }
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn is_vacuum(&self) -> bool {
        self.temperature == T::zero()
    }

    /// Bose occupation `1/(e^{ω/T} − 1)` for `ω > 0`; zero in vacuum.
    pub fn occupation(&self, omega: T) -> T {
        if self.is_vacuum() || omega <= T::zero() {
            return T::zero();
        }
        T::one() / (omega / self.temperature).exp_m1()
    }
}

/// How the particle couples to the field.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling<T> {
    /// Linear coupling of a point charge with a regulated form factor.
    LinearCharge(LinearCoupling<T>),
    /// Renormalised point charge: only the radiation reaction force
    /// `(2/3)e² q⃛` remains and the bare mass is formally `−∞`.
    RadiationReaction { charge_squared: T },
    /// Radiation pressure on a point scatterer in a thermal field.
    Scatterer {
        model: SMatrixModel<T>,
        state: ThermalState<T>,
    },
    /// White-noise force of strength `2D` with friction `D/T`.
    BrownianKernel { diffusion: T, state: ThermalState<T> },
}

/// Sign of the restoring force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Bound,
    Free,
    Unbound,
}

/// A particle of quasistatic mass `M` on a spring `K`, coupled to a field.
///
/// For the scatterer `M` is the vacuum quasistatic mass `M_0`; the
/// high-frequency mass is `M_0 − μ_0` at every temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalSystem<T> {
    quasistatic_mass: T,
    spring: T,
    coupling: Coupling<T>,
}

impl<T: Real> MechanicalSystem<T> {
    pub fn new(quasistatic_mass: T, spring: T, coupling: Coupling<T>) -> Result<Self> {
        if !quasistatic_mass.is_finite() {
            return Err(invalid("mass must be finite"));
        }
        if !(spring >= T::zero() && spring.is_finite()) {
            return Err(invalid("spring constant must be finite and non-negative"));
        }
        match &coupling {
            Coupling::RadiationReaction { charge_squared } if !(*charge_squared > T::zero()) => {
                return Err(invalid("charge squared must be positive"));
            }
            Coupling::BrownianKernel { diffusion, state } => {
                if !(*diffusion >= T::zero()) {
                    return Err(invalid("diffusion coefficient must be non-negative"));
                }
                if *diffusion > T::zero() && state.is_vacuum() {
                    return Err(invalid("a Brownian kernel with D > 0 needs T > 0"));
                }
            }
            _ => {}
        }
        Ok(Self {
            quasistatic_mass,
            spring,
            coupling,
        })
    }

    /// Like [`MechanicalSystem::new`] but accepts a negative spring constant.
    pub(crate) fn with_any_spring(quasistatic_mass: T, spring: T, coupling: Coupling<T>) -> Result<Self> {
        if !spring.is_finite() {
            return Err(invalid("spring constant must be finite"));
        }
        let mut sys = Self::new(quasistatic_mass, spring.abs(), coupling)?;
        sys.spring = spring;
        Ok(sys)
    }

    pub fn brownian(mass: T, spring: T, diffusion: T, temperature: T) -> Result<Self> {
        Self::new(
            mass,
            spring,
            Coupling::BrownianKernel {
                diffusion,
                state: ThermalState::new(temperature)?,
            },
        )
    }

    pub fn scatterer(vacuum_mass: T, spring: T, model: SMatrixModel<T>, state: ThermalState<T>) -> Result<Self> {
        Self::new(vacuum_mass, spring, Coupling::Scatterer { model, state })
    }

    pub fn quasistatic_mass(&self) -> T {
        self.quasistatic_mass
    }

    pub fn spring(&self) -> T {
        self.spring
    }

    pub fn coupling(&self) -> &Coupling<T> {
        &self.coupling
    }

    pub fn binding(&self) -> Binding {
        if self.spring > T::zero() {
            Binding::Bound
        } else if self.spring == T::zero() {
            Binding::Free
        } else {
            Binding::Unbound
        }
    }

    /// Temperature of the bath, if the coupling has one.
    pub fn temperature(&self) -> Option<T> {
        match &self.coupling {
            Coupling::Scatterer { state, .. } | Coupling::BrownianKernel { state, .. } => Some(state.temperature()),
            _ => None,
        }
    }
}
