//! Global-type algebra: path automata, extraction of the type followed by a
//! merged choreography, and bounded mesh membership.

mod extract;
mod mesh;
mod paths;
mod shuffle;

pub use extract::{extract_type, ExtractError};
pub use mesh::{mesh_member, MeshBounds, MeshReport, PathWitness};
pub use paths::{
    enumerate_paths, paths_automaton, show_word, PathAutomaton, PathEvent, PathSet, Word,
};
pub use shuffle::{shuffle_decompose, BaseWords, Component, Witness};
