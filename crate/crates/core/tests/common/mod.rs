#![allow(dead_code)]

pub mod brute;
pub mod fixture;
pub mod gn_oracle;
pub mod integrity;
