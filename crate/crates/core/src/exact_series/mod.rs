//! Exact exponomial solutions, mode by mode.
//!
//! [`burgers`] covers data `a e^{ix}` with α = 0; [`kdvb`] handles arbitrary
//! one-sided data and dispersion. Both recursions are triangular in k, so
//! rows are built bottom-up and cached.

pub mod burgers;
pub mod eval;
pub mod export;
pub mod kdvb;
pub mod structure;
pub mod symbolic;

pub use burgers::{burgers_table, BurgersSeries, CoeffTable};
pub use eval::{evaluate_field, evaluate_mode, CompiledMode, FieldValue, ModeSeries, ModeValue};
pub use kdvb::{kdvb_table, ExpSeries, KdvbSeries, Series};
pub use structure::{structural_check, structural_check_series, StructuralReport};
pub use symbolic::{kdvb_symbolic_table, substitute, MonomialKey, K_SYM_MAX};
