//! Strongly connected components, iteratively (deep τ-chains from long
//! recursions would overflow a call stack).

/// Tarjan's algorithm over an adjacency list. Components come back in
/// reverse topological order; both the order and the membership order are
/// deterministic functions of the input.
pub fn tarjan_scc(adj: &[Vec<u32>]) -> Vec<Vec<u32>> {
    const UNDEF: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNDEF; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut comps: Vec<Vec<u32>> = Vec::new();
    let mut counter = 0u32;

    for start in 0..n as u32 {
        if index[start as usize] != UNDEF {
            continue;
        }
        let mut call: Vec<(u32, usize)> = vec![(start, 0)];
        while let Some(frame) = call.last_mut() {
            let (v, ci) = (frame.0, frame.1);
            if ci == 0 {
                index[v as usize] = counter;
                low[v as usize] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v as usize] = true;
            }
            if ci < adj[v as usize].len() {
                frame.1 += 1;
                let w = adj[v as usize][ci];
                if index[w as usize] == UNDEF {
                    call.push((w, 0));
                } else if on_stack[w as usize] {
                    low[v as usize] = low[v as usize].min(index[w as usize]);
                }
            } else {
                call.pop();
                if let Some(parent) = call.last() {
                    low[parent.0 as usize] = low[parent.0 as usize].min(low[v as usize]);
                }
                if low[v as usize] == index[v as usize] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.reverse();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_reach(adj: &[Vec<u32>]) -> Vec<Vec<bool>> {
        let n = adj.len();
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for (u, es) in adj.iter().enumerate() {
            for &v in es {
                r[u][v as usize] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[i][j] = r[i][j] || (r[i][k] && r[k][j]);
                }
            }
        }
        r
    }

    #[test]
    fn matches_reachability_definition_on_small_graphs() {
        // Every directed graph on four nodes with edges drawn from a mask.
        let all_edges: Vec<(u32, u32)> = (0..4)
            .flat_map(|u| (0..4).map(move |v| (u, v)))
            .collect();
        for mask in 0u32..(1 << 12) {
            let mut adj = vec![Vec::new(); 4];
            for (i, &(u, v)) in all_edges.iter().take(12).enumerate() {
                if mask & (1 << i) != 0 {
                    adj[u as usize].push(v);
                }
            }
            let comps = tarjan_scc(&adj);
            let reach = naive_reach(&adj);
            // Same component iff mutually reachable.
            let mut comp_of = vec![usize::MAX; 4];
            for (c, comp) in comps.iter().enumerate() {
                for &v in comp {
                    comp_of[v as usize] = c;
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    let together = comp_of[i] == comp_of[j];
                    let mutual = reach[i][j] && reach[j][i];
                    assert_eq!(together, mutual, "mask {mask} nodes {i},{j}");
                }
            }
        }
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let mut adj: Vec<Vec<u32>> = (0..n).map(|i| vec![(i as u32 + 1) % n as u32]).collect();
        adj[n - 1] = vec![0];
        let comps = tarjan_scc(&adj);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), n);
    }
}
