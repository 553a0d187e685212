//! Contract networks on hypergraphs of agents with path-independent choice
//! functions.
//!
//! An [`Instance`] is a hypergraph whose vertices are agents and whose
//! hyperedges are contracts; each agent carries a [`ChoiceFunction`] over the
//! contracts it takes part in. On top of that the crate provides
//!
//! * stability checks and exhaustive enumeration ([`stability`]),
//! * the agent-splitting reduction of arbitrary path-independent equipment to
//!   weak orders ([`reduction`]),
//! * domination, meta-stability and a constructive existence pipeline via
//!   compromise vectors ([`metastable`]),
//! * independent brute-force oracles and a seeded instance generator
//!   ([`bruteforce`]).

pub mod bits;
pub mod bruteforce;
pub mod choice;
mod error;
pub mod fixtures;
mod ids;
pub mod instance;
pub mod metastable;
pub mod reduction;
pub mod stability;

pub use bits::Mask;
pub use choice::{ChoiceFunction, ChoiceSpec};
pub use error::{Error, Result};
pub use ids::{AgentId, ContractId};
pub use instance::{Contract, ContractSystem, Instance, InstanceFile, Violation};
