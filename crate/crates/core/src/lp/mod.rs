//! Logic-programming core: syntax, modes, databases, proof search and
//! program transformations.

pub mod db;
pub mod mode;
pub mod prove;
pub mod syntax;
pub mod transform;

pub use db::{Database, ExtendedInstance};
pub use mode::{
    clause_modes, equality_mode, first_occurrences, input_vars, is_determinate_mode, literal_mode, output_vars,
    satisfies_declaration, support_closure, variable_depths, Declaration, Io, Mode,
};
pub use prove::{
    auto_depth, covers, instance_budget, lookup_mgs, prove, prove_instance, FailureNote, MemoPolicy, ProofBudget,
    ProofReport, Verdict, DEFAULT_CEILING,
};
pub use syntax::{Clause, Fact, Literal, Substitution, Symbol, Term, Var, EQUAL};
pub use transform::{
    augment_equality, augment_instance_equality, equality_facts, split_modes, unsplit_clause, RenameTable,
};

/// True iff the heads are identical and `c1`'s body is an order-preserving
/// subsequence of `c2`'s body.
pub fn is_subclause(c1: &Clause, c2: &Clause) -> bool {
    if c1.head != c2.head {
        return false;
    }
    let mut it = c2.body.iter();
    c1.body.iter().all(|l| it.any(|m| m == l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::parse_clause;

    #[test]
    fn subclause_respects_order() {
        let c = parse_clause("p(X) :- q(X), r(X), s(X).").unwrap();
        assert!(is_subclause(&c, &c));
        assert!(is_subclause(&parse_clause("p(X) :- q(X), s(X).").unwrap(), &c));
        assert!(!is_subclause(&parse_clause("p(X) :- s(X), q(X).").unwrap(), &c));
        assert!(!is_subclause(&parse_clause("p(Y) :- q(Y).").unwrap(), &c));
    }
}
