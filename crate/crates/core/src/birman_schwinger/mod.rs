pub mod matrix;
pub mod root;
pub mod sweep;

pub use matrix::{bs_matrix, bs_norm, BSMatrix, BsOperator};
pub use root::bound_state_energy;
pub use sweep::{
    bs_sup_sweep, bs_sup_sweep_many, default_eps_ladder, default_mu_grid, weak_coupling_margin,
    SweepConfig, SweepPoint, SweepReport, Verdict, VerdictThresholds,
};
