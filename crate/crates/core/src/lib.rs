//! Simulation laboratory for lossy source coding over networks of discrete
//! memoryless channels and bit-pipes.

pub mod probkit;
pub mod infosolvers;
pub mod netmodel;
pub mod stacking;
pub mod linkcodes;
pub mod expcli;
