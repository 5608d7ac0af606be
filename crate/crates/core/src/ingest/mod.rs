//! Raw file parsing, RR cleaning and window segmentation.

pub mod clean;
pub mod parse;
pub mod segment;

pub use clean::{clean_rr, drop_duplicates, CleaningParams};
pub use parse::{
    parse_subject_dir, read_manifest, write_subject_dir, FileReport, Manifest, SubjectData,
};
pub use segment::{segment_windows, HrvSegment, MotionSegment, Segments, Streams, WindowParams};
