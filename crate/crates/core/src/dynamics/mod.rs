pub mod continuum;
pub mod dispersive;
pub mod propagator;
pub mod strichartz;

pub use continuum::{continuum_dispersive, gaussian_factor_sup, ContinuumConfig, ContinuumPoint};
pub use dispersive::{dispersive_fit, DispersiveConfig, DispersiveFit, DispersiveMethod, INCONCLUSIVE_RESIDUAL};
pub use propagator::{duhamel, evolve, propagate, required_radius, revival_horizon, EvolutionRun, SpectralData};
pub use strichartz::{delta_magnitudes, strichartz_delta, strichartz_exponent, strichartz_norm, StrichartzMethod, StrichartzReport};
