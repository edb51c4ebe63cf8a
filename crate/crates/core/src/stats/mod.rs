//! Paired significance testing and model ranking over per-image metrics.

mod ranking;
mod wilcoxon;

pub use ranking::{rank_models, RankedModel, Ranking};
pub use wilcoxon::{
    wilcoxon_one_sided, wilcoxon_with_mode, Alternative, PairedSeries, TestMode, WilcoxonResult,
    EXACT_MAX_N,
};
