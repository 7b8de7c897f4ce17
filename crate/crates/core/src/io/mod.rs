//! Matrix input, report output and plotting data.

pub mod gallery;
pub mod matrix_market;
pub mod pseudospectrum;
pub mod report;
pub mod source;

pub use matrix_market::{read_matrix_market, write_matrix_market, MmLayout, MmMatrix};
pub use pseudospectrum::{pseudospectrum_csv, GridSpec};
pub use report::{iterate_table_csv, iterate_table_text, read_report, write_report, ReportRecord};
pub use source::{LoadedMatrix, MatrixSource};
