//! Independence system over redundant edges: every robot serves at most
//! one goal across `A` and `O`, and `|A| <= N_d - M`.

use thiserror::Error;

use crate::instance::{Assignment, Edge};

#[derive(Debug, Error, PartialEq)]
pub enum MatroidError {
    #[error("edge {0} belongs to the initial assignment")]
    EdgeInInitial(Edge),
    #[error("edge {edge} is out of range for {robots} robots and {goals} goals")]
    OutOfRange { edge: Edge, robots: usize, goals: usize },
    #[error("deployment cap {cap} is outside [{goals}, {robots}]")]
    InvalidCap { cap: usize, goals: usize, robots: usize },
    #[error("edge {0} is not eligible")]
    NotEligible(Edge),
}

#[derive(Debug, Clone)]
pub struct IndependenceContext {
    initial: Assignment,
    n_robots: usize,
    n_goals: usize,
    cap: usize,
    // robots used by O plus the committed part of A
    assigned: Vec<bool>,
    selected: Vec<Edge>,
}

impl IndependenceContext {
    pub fn new(initial: &Assignment, n_robots: usize, n_goals: usize, cap: usize) -> Result<Self, MatroidError> {
        if !(n_goals <= cap && cap <= n_robots) {
            return Err(MatroidError::InvalidCap { cap, goals: n_goals, robots: n_robots });
        }
        let mut assigned = vec![false; n_robots];
        for e in initial.edges() {
            if e.robot >= n_robots || e.goal >= n_goals {
                return Err(MatroidError::OutOfRange { edge: e, robots: n_robots, goals: n_goals });
            }
            assigned[e.robot] = true;
        }
        Ok(Self { initial: initial.clone(), n_robots, n_goals, cap, assigned, selected: Vec::new() })
    }

    /// Common size `N_d - M` of every maximal independent set.
    pub fn rank(&self) -> usize {
        self.cap - self.n_goals
    }

    pub fn initial(&self) -> &Assignment {
        &self.initial
    }

    fn check(&self, e: &Edge) -> Result<(), MatroidError> {
        if e.robot >= self.n_robots || e.goal >= self.n_goals {
            return Err(MatroidError::OutOfRange { edge: *e, robots: self.n_robots, goals: self.n_goals });
        }
        if self.initial.contains(e) {
            return Err(MatroidError::EdgeInInitial(*e));
        }
        Ok(())
    }

    /// Membership test for `a` (relative to `O` only, ignoring committed
    /// edges). Repeated edges count once.
    pub fn is_independent(&self, a: &[Edge]) -> Result<bool, MatroidError> {
        let mut edges = a.to_vec();
        edges.sort_unstable();
        edges.dedup();
        for e in &edges {
            self.check(e)?;
        }
        if edges.len() > self.rank() {
            return Ok(false);
        }
        let mut used: Vec<bool> = (0..self.n_robots).map(|r| self.initial.goal_of(r).is_some()).collect();
        for e in &edges {
            if used[e.robot] {
                return Ok(false);
            }
            used[e.robot] = true;
        }
        Ok(true)
    }

    /// Every `x` such that `a + x` is independent. `a` must be independent.
    pub fn eligible_edges(&self, a: &[Edge]) -> Vec<Edge> {
        if a.len() >= self.rank() {
            return Vec::new();
        }
        let mut used: Vec<bool> = (0..self.n_robots).map(|r| self.initial.goal_of(r).is_some()).collect();
        for e in a {
            used[e.robot] = true;
        }
        free_edges(&used, self.n_goals).collect()
    }

    /// Redundant edges committed through [`push`](Self::push).
    pub fn selected(&self) -> &[Edge] {
        &self.selected
    }

    pub fn is_full(&self) -> bool {
        self.selected.len() >= self.rank()
    }

    pub fn is_robot_free(&self, robot: usize) -> bool {
        !self.assigned[robot]
    }

    /// Robots not used by `O` or the committed edges, ascending.
    pub fn free_robots(&self) -> impl Iterator<Item = usize> + '_ {
        self.assigned.iter().enumerate().filter(|(_, &a)| !a).map(|(r, _)| r)
    }

    /// Eligible edges given the committed state, ordered by (robot, goal).
    pub fn eligible(&self) -> impl Iterator<Item = Edge> + '_ {
        let open = !self.is_full();
        free_edges(&self.assigned, self.n_goals).filter(move |_| open)
    }

    pub fn push(&mut self, e: Edge) -> Result<(), MatroidError> {
        self.check(&e)?;
        if self.is_full() || self.assigned[e.robot] {
            return Err(MatroidError::NotEligible(e));
        }
        self.assigned[e.robot] = true;
        self.selected.push(e);
        Ok(())
    }
}

fn free_edges(used: &[bool], n_goals: usize) -> impl Iterator<Item = Edge> + '_ {
    used.iter()
        .enumerate()
        .filter(|(_, &u)| !u)
        .flat_map(move |(robot, _)| (0..n_goals).map(move |goal| Edge { robot, goal }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(n: usize, m: usize, cap: usize) -> IndependenceContext {
        let o = Assignment::from_edges((0..m).map(|j| Edge::new(j, j))).unwrap();
        IndependenceContext::new(&o, n, m, cap).unwrap()
    }

    #[test]
    fn empty_set_is_independent() {
        assert!(ctx(3, 1, 2).is_independent(&[]).unwrap());
        assert!(ctx(3, 1, 1).is_independent(&[]).unwrap());
    }

    #[test]
    fn shared_robot_is_dependent() {
        let c = ctx(5, 2, 5);
        assert!(!c.is_independent(&[Edge::new(3, 0), Edge::new(3, 1)]).unwrap());
        // robot 0 already serves goal 0 in O
        assert!(!c.is_independent(&[Edge::new(0, 1)]).unwrap());
    }

    #[test]
    fn cardinality_bound() {
        let c = ctx(6, 2, 4);
        assert!(c.is_independent(&[Edge::new(2, 0), Edge::new(3, 1)]).unwrap());
        assert!(!c.is_independent(&[Edge::new(2, 0), Edge::new(3, 1), Edge::new(4, 0)]).unwrap());
    }

    #[test]
    fn initial_edges_rejected() {
        let c = ctx(3, 1, 2);
        assert_eq!(c.is_independent(&[Edge::new(0, 0)]), Err(MatroidError::EdgeInInitial(Edge::new(0, 0))));
    }

    #[test]
    fn eligible_examples() {
        let c = ctx(3, 1, 2);
        assert_eq!(c.eligible_edges(&[]), vec![Edge::new(1, 0), Edge::new(2, 0)]);
        assert!(c.eligible_edges(&[Edge::new(1, 0)]).is_empty());

        let c = ctx(4, 2, 4);
        assert_eq!(c.eligible_edges(&[Edge::new(2, 0)]), vec![Edge::new(3, 0), Edge::new(3, 1)]);
    }

    #[test]
    fn incremental_matches_stateless() {
        let mut c = ctx(5, 2, 4);
        assert_eq!(c.eligible().collect::<Vec<_>>(), c.eligible_edges(&[]));
        c.push(Edge::new(3, 1)).unwrap();
        assert_eq!(c.eligible().collect::<Vec<_>>(), c.eligible_edges(&[Edge::new(3, 1)]));
        assert_eq!(c.push(Edge::new(3, 0)), Err(MatroidError::NotEligible(Edge::new(3, 0))));
        c.push(Edge::new(2, 0)).unwrap();
        assert!(c.is_full());
        assert_eq!(c.eligible().count(), 0);
        assert!(c.push(Edge::new(4, 0)).is_err());
    }
}
