//! Intra-exchange currency arbitrage as a variational quantum optimization
//! problem.
//!
//! The pipeline runs exchange rates ([`market`]) through a constrained binary
//! model ([`model`]), a penalty QUBO ([`qubo`]) and a diagonal Ising
//! Hamiltonian ([`ising`]). The Hamiltonian is minimized over a real-amplitude
//! ansatz ([`sim`]) with differential evolution or a local simplex search
//! ([`optim`]), orchestrated by [`vqe`].

pub mod bits;
pub mod ising;
pub mod market;
pub mod model;
pub mod optim;
mod pairs;
pub mod qubo;
pub mod sim;
pub mod vqe;

pub use ising::IsingHamiltonian;
pub use market::{NormalizationVector, TransitMatrix};
pub use model::{brute_force_best, build_qp, CycleSolution, Formulation, QuadraticProgram};
pub use qubo::{to_qubo, PenaltyConfig, Qubo};
pub use sim::{CircuitSpec, Entanglement, Statevector};
