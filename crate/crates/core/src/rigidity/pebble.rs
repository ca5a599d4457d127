//! The (2,3) pebble game: a combinatorial count of generic planar rigidity.

use serde::{Deserialize, Serialize};

use crate::geometry::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PebbleResult {
    /// `2|V| − 3 − |independent edges|`.
    pub generic_dof: usize,
    /// Indices (edge-list order) of a maximal (2,3)-sparse edge subset.
    pub independent_edges: Vec<usize>,
}

struct Game {
    pebbles: Vec<u8>,
    /// Directed pebble-cover edges, `out[v]` = heads of edges leaving v.
    out: Vec<Vec<usize>>,
}

impl Game {
    /// Move a free pebble onto `root` along a directed path, avoiding
    /// `blocked`. Returns false if no reachable pebble exists.
    fn fetch(&mut self, root: usize, blocked: usize) -> bool {
        let n = self.pebbles.len();
        let mut parent = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        seen[blocked] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &self.out[v] {
                if seen[w] {
                    continue;
                }
                seen[w] = true;
                parent[w] = v;
                if self.pebbles[w] > 0 {
                    self.pebbles[w] -= 1;
                    self.pebbles[root] += 1;
                    // Reverse the path root → ... → w.
                    let mut cur = w;
                    while cur != root {
                        let p = parent[cur];
                        let pos = self.out[p].iter().position(|&x| x == cur).expect("path edge");
                        self.out[p].swap_remove(pos);
                        self.out[cur].push(p);
                        cur = p;
                    }
                    return true;
                }
                stack.push(w);
            }
        }
        false
    }
}

/// Greedily select a maximal (2,3)-sparse edge subset.
pub fn pebble_game_2_3(g: &Graph) -> PebbleResult {
    let n = g.n_vertices();
    let mut game = Game {
        pebbles: vec![2; n],
        out: vec![Vec::new(); n],
    };
    let mut independent_edges = Vec::new();
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        while game.pebbles[u] < 2 && game.fetch(u, v) {}
        while game.pebbles[v] < 2 && game.fetch(v, u) {}
        if game.pebbles[u] + game.pebbles[v] == 4 {
            game.pebbles[u] -= 1;
            game.out[u].push(v);
            independent_edges.push(k);
        }
    }
    PebbleResult {
        generic_dof: (2 * n).saturating_sub(3 + independent_edges.len()),
        independent_edges,
    }
}
