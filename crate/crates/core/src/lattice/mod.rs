pub mod energy;
pub mod grid;
pub mod lattice_box;
pub mod lorentz;
pub mod potential;
pub mod symbol;

pub use energy::{ComplexEnergy, Orientation};
pub use grid::TorusGrid;
pub use lattice_box::{apply_h0, BoundaryCondition, LatticeBox, LatticeFn};
pub use lorentz::{lorentz_norm, lorentz_norm_counted, lorentz_norm_potential};
pub use potential::{japanese, Potential};
pub use symbol::{critical_points, symbol_eval, threshold_energies, ThresholdKind, ThresholdPoint};
