//! Subject records, ABP-derived targets, chronological splits, training
//! windows and a synthetic subject generator.

mod record;
mod split;
mod synth;
mod targets;
mod windows;

pub use record::{SubjectRecord, RECORD_RATE_HZ};
pub use split::{split_record, Segment, SplitSpec};
pub use synth::{synth_subject, synth_subject_with, SynthBeat, SynthOptions, SyntheticSubject, MIN_SYNTH_DURATION_S};
pub use targets::{
    detect_beats, extract_bp_targets, targets_from_beats, Beat, TargetSeries, MIN_PEAK_DISTANCE_S,
    MIN_PROMINENCE_MMHG, MIN_RECORD_S, SANITY_BAND_MMHG,
};
pub use windows::{make_windows, TargetScaling, WindowedExample};
