pub mod continuum;
pub mod decay;
pub mod flatband;
pub mod knapp;
pub mod threshold;

pub use continuum::{sobolev_blowup_probe, ultra_surface_form, ultra_surface_value, SobolevConfig, SobolevTable, UltraProfile, UltraSeries};
pub use decay::{decay_blowup, DecayBlowup};
pub use flatband::{flat_i, flat_j, flatband_kernel, flatband_weighted_blowup, BlowupConfig, BlowupReport, FlatCutoff, FlatbandTable};
pub use knapp::{knapp_family, KnappConfig, KnappDatum, KnappReport};
pub use threshold::{threshold_divergence, Growth, ThresholdSeries};
