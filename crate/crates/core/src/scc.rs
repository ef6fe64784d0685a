//! Iterative Tarjan SCC and the weighted condensation used by the traversal
//! diameter and the variable dependency decomposition.

/// Strongly connected components of a digraph.
///
/// Components are numbered in the order Tarjan's algorithm completes them,
/// which is a reverse topological order of the condensation: every edge
/// leaving component `c` enters a component with a smaller id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    pub comp: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Condensation {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Deduplicated successor components of each component.
    pub fn dag<'a, F>(&self, succ: F) -> Vec<Vec<usize>>
    where
        F: Fn(usize) -> &'a [u32],
    {
        self.members
            .iter()
            .enumerate()
            .map(|(c, ms)| {
                let mut out: Vec<usize> = ms
                    .iter()
                    .flat_map(|&u| succ(u).iter().map(|&v| self.comp[v as usize]))
                    .filter(|&d| d != c)
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect()
    }
}

const UNVISITED: usize = usize::MAX;

pub fn strongly_connected_components<'a, F>(n: usize, succ: F) -> Condensation
where
    F: Fn(usize) -> &'a [u32],
{
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, next)) = call.last() {
            let out = succ(v);
            if next < out.len() {
                let w = out[next] as usize;
                call.last_mut().unwrap().1 += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = members.len();
                let mut ms = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp[w] = id;
                    ms.push(w);
                    if w == v {
                        break;
                    }
                }
                ms.sort_unstable();
                members.push(ms);
            }
        }
    }
    Condensation { comp, members }
}
