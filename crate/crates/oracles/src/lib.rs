//! Deliberately naive reference implementations. They share only the data
//! types with `rulelist` and are meant for small inputs in tests.

pub mod agreement;
pub mod brl;
pub mod ca;
pub mod metrics;
pub mod mining;
