//! Matrix Market I/O, test-matrix generators and the benchmark command for
//! the `mplobpcg` eigensolvers.

pub mod cli;
pub mod gen;
pub mod mm;
