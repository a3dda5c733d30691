//! Small graph helpers shared across modules.

/// Tarjan strongly connected components over an adjacency list.
/// Components are returned with vertex lists sorted ascending.
pub(crate) fn strongly_connected_components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<Option<usize>>,
        lowlink: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        next_index: usize,
        components: Vec<Vec<usize>>,
    }

    // Iterative DFS; recursion depth could hit the stack on long word graphs.
    fn visit(st: &mut State, root: usize) {
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        st.index[root] = Some(st.next_index);
        st.lowlink[root] = st.next_index;
        st.next_index += 1;
        st.stack.push(root);
        st.on_stack[root] = true;

        while let Some(&mut (v, ref mut edge_pos)) = call_stack.last_mut() {
            if *edge_pos < st.adj[v].len() {
                let w = st.adj[v][*edge_pos];
                *edge_pos += 1;
                if st.index[w].is_none() {
                    st.index[w] = Some(st.next_index);
                    st.lowlink[w] = st.next_index;
                    st.next_index += 1;
                    st.stack.push(w);
                    st.on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if st.on_stack[w] {
                    st.lowlink[v] = st.lowlink[v].min(st.index[w].unwrap());
                }
            } else {
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    st.lowlink[parent] = st.lowlink[parent].min(st.lowlink[v]);
                }
                if st.lowlink[v] == st.index[v].unwrap() {
                    let mut comp = Vec::new();
                    loop {
                        let w = st.stack.pop().unwrap();
                        st.on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    st.components.push(comp);
                }
            }
        }
    }

    let mut st = State {
        adj,
        index: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next_index: 0,
        components: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            visit(&mut st, v);
        }
    }
    st.components
}

/// True when the component contains an internal edge, i.e. its vertices lie
/// on a directed cycle.
pub(crate) fn component_is_cyclic(comp: &[usize], adj: &[Vec<usize>]) -> bool {
    comp.len() > 1 || adj[comp[0]].contains(&comp[0])
}
