//! Training loss and evaluation metrics.

mod loss;
mod loudness;
mod metrics;

pub use loss::{
    mae_time, mrstft, overall_loss, LossBreakdown, MrStftTarget, MRSTFT_LOG_FLOOR,
    MRSTFT_WINDOWS, TIME_WEIGHT,
};
pub use loudness::{k_weighting, lufs_integrated, loudness_crest, metric_lufs, momentary_loudness, ABSOLUTE_GATE_LUFS};
pub use metrics::{
    mel_filterbank, metric_msd, metric_report, metric_rms, metric_sce, spectral_centroid,
    non_intrusive_report, MetricReport, NonIntrusiveReport,
};
