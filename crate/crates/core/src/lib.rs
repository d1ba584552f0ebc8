//! Exact computations for the Witt algebra `W = W(1)` over finite fields of
//! characteristic `p > 3`: the automorphism group action on `W` and on the
//! dual space, orbit canonical forms with witnesses, orbit-closure
//! hypersurfaces, and the verification suites that exercise them.

pub mod ffield;
pub mod ring;
pub mod sympoly;
pub mod trunc;
pub mod witt;
pub mod worbit;
pub mod dorbit;
pub mod harness;
