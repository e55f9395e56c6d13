use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use super::{Source, TriMesh};

/// Shortest paths along mesh edges; an upper bound on geodesic distance.
pub fn dijkstra_bound(mesh: &TriMesh, sources: &[Source]) -> Vec<f64> {
    let n = mesh.vertex_count();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in mesh.edges() {
        nbrs[a].push(b);
        nbrs[b].push(a);
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    // f64 keys as ordered bits: valid for non-negative values
    let mut heap = BinaryHeap::new();
    for s in sources {
        if s.distance < dist[s.vertex] {
            dist[s.vertex] = s.distance;
            heap.push(Reverse((s.distance.to_bits(), s.vertex)));
        }
    }
    while let Some(Reverse((bits, v))) = heap.pop() {
        if done[v] || f64::from_bits(bits) > dist[v] {
            continue;
        }
        done[v] = true;
        for &w in &nbrs[v] {
            let d = dist[v] + mesh.edge_length(v, w);
            if d < dist[w] {
                dist[w] = d;
                heap.push(Reverse((d.to_bits(), w)));
            }
        }
    }
    dist
}
