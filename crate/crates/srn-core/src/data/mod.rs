//! Click-log ingestion, impression building, splits, binning, and the
//! synthetic planted-signal generator.

pub mod binning;
pub mod events;
pub mod formats;
pub mod impressions;
pub mod synthetic;
pub mod vocab;

pub use binning::binning;
pub use events::{Behavior, ClickEvent, RawEvent, SeqType, ALL_SEQ_TYPES};
pub use formats::{
    read_events_csv, read_impressions, write_events_csv, write_impressions, IngestOutcome,
};
pub use impressions::{
    build_impressions, time_split, BehaviorSequence, ImpressionRecord, LabelMode,
};
pub use synthetic::{gen_synthetic, SyntheticData, SyntheticSpec};
pub use vocab::{Vocab, VocabSet};
