pub mod exact;
pub mod holder;
pub mod kernel;
pub mod surface;
pub mod weighted;

pub use holder::{boundary_value_continuity, HolderClass, HolderConfig, HolderReport};
pub use kernel::{
    free_kernel, kernel_table, kernel_table_1d_exact, kernel_table_refined, KernelTable, Quadrature, ResolutionRule,
    ResolventKernel,
};
pub use surface::{delta_surface, Cutoff, SurfaceQuadrature, SurfaceSlice};
pub use weighted::{weighted_resolvent_norm, WeightedNorm, WeightedNormConfig, TRUNCATION_TOL};
