//! A simulation engine for the process-matrix formalism in which the
//! vacuum is a first-class state and interactions with it are countable
//! operations, together with a truncated second-quantisation layer for
//! protocols with identical particles.
//!
//! The crate is organised around five pieces:
//!
//! - [`tensor`] — labeled spaces, complex labeled vectors/operators, and
//!   the partial-inner-product contraction kernel everything else uses.
//! - [`choi`] — transport vectors, Choi–Jamiołkowski representations of
//!   instruments, process vectors built from wirings, probability rules,
//!   and the process-matrix axiom checks.
//! - [`protocols`] — concrete builders for the single-photon two-way
//!   communication protocol and the optical quantum switch, plus
//!   operation counting under both conventions.
//! - [`fock`] — occupation bases, bosonic/fermionic ladder operators,
//!   k-transport vectors, single-particle unitary lifts, and the
//!   Fock-space CJ map.
//! - [`circuit`] — the line-oriented circuit file format, its parser, and
//!   a generic runner.
//!
//! The accompanying guide under `book/` walks through each concept with
//! runnable snippets; those snippets double as doc-tests here so they
//! cannot drift out of sync with the code.

pub mod choi;
pub mod circuit;
pub mod fock;
pub mod linalg;
pub mod protocols;
pub mod report;
pub mod selftest;
pub mod tensor;

pub use num_complex::Complex64;

#[cfg(any())]
mod book {
    //! Compile and run every code snippet in the guide.

    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(LabeledTensors, "../../../book/src/labeled-tensors.md");
    chapter!(Processes, "../../../book/src/processes.md");
    chapter!(DsdProtocol, "../../../book/src/dsd-protocol.md");
    chapter!(VacuumCounting, "../../../book/src/vacuum-and-counting.md");
    chapter!(QuantumSwitch, "../../../book/src/quantum-switch.md");
    chapter!(FockSpaces, "../../../book/src/fock-spaces.md");
    chapter!(CircuitFiles, "../../../book/src/circuit-files.md");
}
