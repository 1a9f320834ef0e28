//! Recursive Petri nets: semantics, state orders, reductions and decision procedures.
//!
//! The crate is organised bottom up:
//!
//! * [`marking`] and [`model`]: markings, net definitions, tree states and the firing rule;
//! * [`order`]: the embedding quasi-orders on states;
//! * [`petri`]: plain Petri net engines (backward coverability, Karp–Miller, termination);
//! * [`reduce`]: the rooted net, returning transitions and the shortcut nets;
//! * [`absgraph`]: the abstract graph of a rooted net;
//! * [`decide`]: cut, cover, termination, boundedness and finiteness, plus the language
//!   constructions;
//! * [`explore`]: a bounded brute-force explorer used as an oracle;
//! * [`io`]: the `.rpn` text format.

pub mod absgraph;
pub mod decide;
pub mod explore;
pub mod fixtures;
pub mod generate;
pub mod io;
pub mod marking;
pub mod model;
pub mod order;
pub mod petri;
pub mod reduce;

pub use absgraph::AbstractGraph;
pub use decide::{CoverTarget, Verdict};
pub use marking::{Marking, Place};
pub use model::{
    abstraction, enabled, enabled_events, fire, fire_sequence, AbstractNode, AbstractState, FireError, FiringEvent,
    RpnDef, Transition, TransitionId, TransitionKind, TreeState, VertexId, Violation,
};
pub use order::{equivalent, leq, leq_rooted, Embedding};
pub use petri::{OmegaMarking, PetriNet, UpwardClosedSet};
pub use reduce::{HatNet, RootedResult};
