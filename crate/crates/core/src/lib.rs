//! Knowledge graph workbench core: RDF model, triple store, query engine,
//! reasoning, validation, tabular data preparation and mapping.

pub mod backlog;
pub mod inference;
pub mod mapping;
pub mod ontology;
pub mod prep;
pub mod quality;
pub mod query;
pub mod rdf;
pub mod shapes;
pub mod store;
