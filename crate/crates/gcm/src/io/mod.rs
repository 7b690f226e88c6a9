//! File formats: model state JSON, trial/recording CSV, scenario configs.

pub mod dataset;
pub mod hexfloat;
pub mod scenario;
pub mod state;

pub use dataset::{
    parse_recording_csv, parse_recording_meta, parse_trial_csv, read_recording_files,
    read_trial_csv_file, recording_from_parts, trial_csv_to_string, write_recording_csv,
    write_trial_csv, RecordingMeta,
};
pub use hexfloat::{encode_hex_f64, parse_hex_f64};
pub use scenario::{scenario_from_json, scenario_to_json};
pub use state::{checkpoint_from_json, checkpoint_to_json, state_from_json, state_to_json};
