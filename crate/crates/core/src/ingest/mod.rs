//! File formats and list flattening.

pub mod flatten;
pub mod parse;

pub use flatten::{base_facts, flatten, FlattenOptions};
pub use parse::{
    parse_clause, parse_database, parse_declaration, parse_fact, parse_facts, parse_instances, parse_literal,
    parse_mode, parse_program, parse_term_examples, serialize_declaration, serialize_facts, serialize_instance,
    serialize_instances, serialize_program, TermExample, TermValue,
};
