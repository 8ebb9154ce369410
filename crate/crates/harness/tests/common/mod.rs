//! Test-side oracles shared by the integration tests.

#![allow(dead_code)]

pub mod agreement;
pub mod oracle;
pub mod space;
