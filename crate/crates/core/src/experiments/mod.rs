//! Pulse traces, DC scans, interference maps, Landau-Zener sweeps and the
//! tunnel-splitting extraction, all running on a deterministic parallel
//! sweep engine.

mod extract;
mod io;
mod lz;
mod map;
mod scan;
mod sweep;
mod trace;

pub use extract::{assign_harmonics, extract_delta, DeltaExtraction};
pub use io::{parse_key_values, read_csv_columns, read_key_values};
pub use lz::{
    lz_csv_string, lz_series, lz_sweep, lz_window, read_lz_csv, sweep_rate_for_adiabaticity,
    LZ_CSV, LZ_DEFAULT_HALF_SPAN_IN_DELTA, LZ_MIN_SPAN_IN_DELTA,
};
pub use map::{diverging_color, map2d, HeatMap};
pub use scan::{
    dc_scan, find_peaks, linspace, Peak, PeakOptions, ScanResult, SCAN_CSV, SCAN_META,
    SCAN_REFERENCE_CSV,
};
pub use sweep::SweepEngine;
pub use trace::{pulse_trace, reversal_time};
