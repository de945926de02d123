//! Readers and writers for the on-disk formats: the system directory of
//! delimited tables, scenario documents, and result-table export.

pub mod scenario_file;
pub mod system_dir;
pub mod tables;
