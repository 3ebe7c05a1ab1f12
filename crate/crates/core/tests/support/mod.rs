//! Generators and reference implementations shared by the integration
//! tests (and by the workspace acceptance suite).
#![allow(dead_code)]

pub mod closure;
pub mod gen;
pub mod prep;
pub mod shapes;
pub mod sparql;
