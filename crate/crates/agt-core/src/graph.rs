//! Finite undirected graphs and exact brute-force vertex expansion.

use num::rational::BigRational;
use num::BigInt;
use serde::Serialize;

/// An undirected multigraph on vertices `0..n`. Self-loops are not
/// allowed; parallel edges are.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("brute force supports at most {limit} vertices, graph has {got}")]
    SizeLimit { limit: usize, got: usize },
}

/// Exact minimizer of the vertex-expansion quotient.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub value: BigRational,
    pub witness: Vec<usize>,
    pub boundary_size: usize,
}

impl FiniteGraph {
    pub fn new(n: usize) -> Self {
        FiniteGraph { n, adj: vec![Vec::new(); n] }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.n && v < self.n && u != v);
        self.adj[u].push(v);
        self.adj[v].push(u);
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn is_regular(&self) -> Option<usize> {
        let d = self.degree(0);
        self.adj.iter().all(|a| a.len() == d).then_some(d)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// The cycle graph `C_m`.
    pub fn cycle(m: usize) -> Self {
        assert!(m >= 3);
        let mut g = FiniteGraph::new(m);
        for i in 0..m {
            g.add_edge(i, (i + 1) % m);
        }
        g
    }

    /// The complete graph `K_m`.
    pub fn complete(m: usize) -> Self {
        let mut g = FiniteGraph::new(m);
        for i in 0..m {
            for j in i + 1..m {
                g.add_edge(i, j);
            }
        }
        g
    }

    /// Vertex boundary of a subset: neighbors of `subset` outside it.
    pub fn vertex_boundary(&self, subset: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.n];
        for &u in subset {
            inside[u] = true;
        }
        let mut out = vec![false; self.n];
        for &u in subset {
            for &v in &self.adj[u] {
                if !inside[v] {
                    out[v] = true;
                }
            }
        }
        (0..self.n).filter(|&v| out[v]).collect()
    }

    /// Exact minimum of `|boundary(A)| / |A|` over nonempty subsets with
    /// `|A| <= n/2`, by exhausting all subsets. Limited to 24 vertices.
    pub fn vertex_expansion_bruteforce(&self) -> Result<ExpansionReport, GraphError> {
        const LIMIT: usize = 24;
        if self.n > LIMIT {
            return Err(GraphError::SizeLimit { limit: LIMIT, got: self.n });
        }
        assert!(self.n >= 2, "expansion needs at least two vertices");
        let masks: Vec<u32> = (0..self.n)
            .map(|u| self.adj[u].iter().fold(0u32, |m, &v| m | 1 << v))
            .collect();
        let half = self.n / 2;
        let mut best: Option<(usize, usize, u32)> = None; // (boundary, size, mask)
        for s in 1u32..(1 << self.n) {
            let size = s.count_ones() as usize;
            if size > half {
                continue;
            }
            let mut nb = 0u32;
            let mut rest = s;
            while rest != 0 {
                let u = rest.trailing_zeros() as usize;
                nb |= masks[u];
                rest &= rest - 1;
            }
            let bd = (nb & !s).count_ones() as usize;
            // compare bd/size < best.0/best.1 by cross-multiplication
            let better = match best {
                None => true,
                Some((b0, s0, _)) => bd * s0 < b0 * size,
            };
            if better {
                best = Some((bd, size, s));
            }
        }
        let (bd, size, mask) = best.expect("n >= 2 gives at least one subset");
        let witness: Vec<usize> = (0..self.n).filter(|&v| mask >> v & 1 == 1).collect();
        Ok(ExpansionReport {
            value: BigRational::new(BigInt::from(bd), BigInt::from(size)),
            witness,
            boundary_size: bd,
        })
    }

    /// Graphviz rendering with optional vertex labels.
    pub fn to_dot(&self, labels: Option<&[String]>) -> String {
        let mut out = String::from("graph {\n");
        if let Some(ls) = labels {
            for (i, l) in ls.iter().enumerate() {
                out.push_str(&format!("  {} [label=\"{}\"];\n", i, l));
            }
        }
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if u < v {
                    out.push_str(&format!("  {} -- {};\n", u, v));
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn basic_counts() {
        let g = FiniteGraph::cycle(8);
        assert_eq!(g.num_vertices(), 8);
        assert_eq!(g.num_edges(), 8);
        assert_eq!(g.is_regular(), Some(2));
        assert!(g.is_connected());

        let k = FiniteGraph::complete(4);
        assert_eq!(k.num_edges(), 6);
        assert_eq!(k.is_regular(), Some(3));
    }

    #[test]
    fn boundary_examples() {
        let g = FiniteGraph::cycle(8);
        assert_eq!(g.vertex_boundary(&[0, 1, 2]), vec![3, 7]);
        assert_eq!(g.vertex_boundary(&(0..8).collect::<Vec<_>>()), Vec::<usize>::new());
    }

    #[test]
    fn expansion_cycle8() {
        let r = FiniteGraph::cycle(8).vertex_expansion_bruteforce().unwrap();
        assert_eq!(r.value, ratio(1, 2));
        assert_eq!(r.witness.len(), 4);
    }

    #[test]
    fn expansion_k4() {
        let r = FiniteGraph::complete(4).vertex_expansion_bruteforce().unwrap();
        assert_eq!(r.value, ratio(1, 1));
    }

    #[test]
    fn expansion_k2() {
        let mut g = FiniteGraph::new(2);
        g.add_edge(0, 1);
        let r = g.vertex_expansion_bruteforce().unwrap();
        assert_eq!(r.value, ratio(1, 1));
    }

    #[test]
    fn size_limit() {
        let g = FiniteGraph::cycle(25);
        assert!(matches!(
            g.vertex_expansion_bruteforce(),
            Err(GraphError::SizeLimit { .. })
        ));
    }

    #[test]
    fn disconnected_graph_zero_expansion() {
        let mut g = FiniteGraph::new(4);
        g.add_edge(0, 1);
        g.add_edge(2, 3);
        assert!(!g.is_connected());
        let r = g.vertex_expansion_bruteforce().unwrap();
        assert_eq!(r.value, ratio(0, 1));
    }

    #[test]
    fn dot_output() {
        let mut g = FiniteGraph::new(2);
        g.add_edge(0, 1);
        let dot = g.to_dot(None);
        assert!(dot.contains("0 -- 1"));
    }
}
