//! IO companion for the core crate: distribution-spec JSON, run manifests,
//! CSV/JSON result tables, thread fan-out, and the `randhull` CLI.

pub mod app;
pub mod manifest;
pub mod output;
pub mod parallel;
pub mod spec_json;
pub mod suites;
