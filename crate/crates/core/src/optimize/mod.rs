//! Procrustean waist matching across OAM orders and derivative-free shaping
//! of radial-mode superpositions.

mod modes;
mod simplex;
mod waists;

pub use modes::{
    cost_brightness, cost_spectral_match, cost_target_spectrum, minimize, optimize_superpositions, MinimizeOptions,
    MinimizeResult, ModeBasisSpectra, SuperpositionModes, SuperpositionStudy,
};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
pub use waists::{
    match_collection_waists, probability_at_waist, waist_sweep, Branch, WaistMatch, WaistRange, WaistSweepResult,
};
