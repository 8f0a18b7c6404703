#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod circle;
pub mod factorize;
pub mod fkdet;
pub mod harness;
pub mod matfun;
pub mod matrix;
pub mod szego;
