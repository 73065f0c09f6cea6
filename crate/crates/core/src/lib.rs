//! Logic-locking workbench: netlists, simulation, ATPG, SAT, locking
//! techniques and structural key-recovery attacks.

pub mod netlist;
pub mod sim;
pub mod resynth;
pub mod sat;
pub mod atpg;
pub mod gen;
pub mod fixtures;
pub mod lock;
pub mod attack;
pub mod report;
