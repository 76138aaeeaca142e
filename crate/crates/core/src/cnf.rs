//! CNF formulas and their variable/clause factor graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId, VertexRole};

/// A literal over a 0-based variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal { var, negated: true }
    }

    /// DIMACS form: 1-based, negative for negated literals.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        Some(Literal {
            var: (x.unsigned_abs() - 1) as usize,
            negated: x < 0,
        })
    }

    pub fn satisfied_by(self, value: bool) -> bool {
        value != self.negated
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    /// Clauses are stored sorted by variable; repeated literals are merged.
    /// A clause holding a variable and its negation is rejected.
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for (i, mut clause) in clauses.into_iter().enumerate() {
            clause.sort();
            clause.dedup();
            if let Some(l) = clause.iter().find(|l| l.var >= num_vars) {
                return Err(Error::InvalidFormula(format!(
                    "clause {i} references undeclared variable {}",
                    l.var + 1
                )));
            }
            if clause.windows(2).any(|w| w[0].var == w[1].var) {
                return Err(Error::InvalidFormula(format!(
                    "clause {i} contains a variable and its negation"
                )));
            }
            out.push(clause);
        }
        Ok(CnfFormula {
            num_vars,
            clauses: out,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn clause(&self, i: usize) -> &[Literal] {
        &self.clauses[i]
    }

    pub fn max_arity(&self) -> usize {
        self.clauses.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn clause_satisfied(&self, i: usize, assignment: &[bool]) -> bool {
        self.clauses[i]
            .iter()
            .any(|l| l.satisfied_by(assignment[l.var]))
    }

    pub fn satisfied_count(&self, assignment: &[bool]) -> usize {
        (0..self.clauses.len())
            .filter(|&i| self.clause_satisfied(i, assignment))
            .count()
    }

    /// Formula keeping only the clauses for which `keep` is true, in order.
    pub fn retain_clauses(&self, mut keep: impl FnMut(usize) -> bool) -> CnfFormula {
        CnfFormula {
            num_vars: self.num_vars,
            clauses: self
                .clauses
                .iter()
                .enumerate()
                .filter(|(i, _)| keep(*i))
                .map(|(_, c)| c.clone())
                .collect(),
        }
    }

    pub fn with_appended(&self, extra: Vec<Vec<Literal>>) -> Result<CnfFormula> {
        let mut clauses = self.clauses.clone();
        clauses.extend(extra);
        CnfFormula::new(self.num_vars, clauses)
    }
}

/// Vertex id of variable `var` in the factor graph.
pub fn variable_vertex(var: usize) -> VertexId {
    var
}

/// Vertex id of clause `i` in the factor graph of `phi`.
pub fn clause_vertex(phi: &CnfFormula, i: usize) -> VertexId {
    phi.num_vars + i
}

/// Bipartite incidence graph: vertices `0..n` are variables, `n..n+m` clauses,
/// and a clause is joined to every variable it mentions.
pub fn build_factor_graph(phi: &CnfFormula) -> Graph {
    let n = phi.num_vars;
    let edges = phi
        .clauses
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |l| (l.var, n + i)));
    let mut roles = vec![VertexRole::Variable; n];
    roles.extend(std::iter::repeat_n(VertexRole::Clause, phi.clauses.len()));
    Graph::new(n + phi.clauses.len(), edges)
        .and_then(|g| g.with_roles(roles))
        .expect("clauses hold distinct in-range variables")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_binary_clause_is_a_path() {
        let phi = CnfFormula::new(2, vec![vec![Literal::pos(0), Literal::pos(1)]]).unwrap();
        let g = build_factor_graph(&phi);
        assert_eq!(g.vertex_count(), 3);
        assert!(g.has_edge(0, 2) && g.has_edge(1, 2) && !g.has_edge(0, 1));
        assert_eq!(g.roles().unwrap()[2], VertexRole::Clause);
    }

    #[test]
    fn clause_vertices_have_degree_equal_to_arity() {
        let phi = CnfFormula::new(
            4,
            vec![
                vec![Literal::pos(0), Literal::neg(1), Literal::pos(2)],
                vec![Literal::neg(0), Literal::pos(2), Literal::neg(3)],
            ],
        )
        .unwrap();
        let g = build_factor_graph(&phi);
        assert_eq!(g.degree(clause_vertex(&phi, 0)), 3);
        assert_eq!(g.degree(clause_vertex(&phi, 1)), 3);
        assert!(g.edge_count() <= 3 * phi.num_clauses());
        assert_eq!(g.vertex_count(), phi.num_vars() + phi.num_clauses());
    }

    #[test]
    fn rejects_undeclared_and_contradictory() {
        assert!(CnfFormula::new(1, vec![vec![Literal::pos(1)]]).is_err());
        assert!(CnfFormula::new(1, vec![vec![Literal::pos(0), Literal::neg(0)]]).is_err());
    }

    #[test]
    fn counts_satisfied_clauses() {
        let phi = CnfFormula::new(1, vec![vec![Literal::pos(0)], vec![Literal::neg(0)]]).unwrap();
        assert_eq!(phi.satisfied_count(&[true]), 1);
        assert_eq!(phi.satisfied_count(&[false]), 1);
    }
}
