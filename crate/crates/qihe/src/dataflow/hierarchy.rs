//! Module hierarchy: the instantiation graph between module definitions and
//! the elaborated instance tree rooted at the top modules.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ir::Design;

/// One instantiation edge: module `parent` declares instance `inst` of
/// module `child`. Indices address `design.modules`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierEdge {
    pub parent: usize,
    pub inst: String,
    pub child: usize,
}

/// One node of the elaborated instance tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Index into `design.modules`.
    pub module: usize,
    /// Index of the parent instance, `None` for a top instance.
    pub parent: Option<usize>,
    /// Dotted path from the top module, e.g. `accSqrDouble.i`. A top
    /// instance's path is its module name.
    pub path: String,
}

/// The module hierarchy of a design: instantiation edges between module
/// definitions, the top modules, and the elaborated instance tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hierarchy {
    /// Instantiation edges in (parent module, instance declaration) order.
    pub edges: Vec<HierEdge>,
    /// Indices of modules never instantiated, in declaration order.
    pub tops: Vec<usize>,
    /// Elaborated instances in pre-order: each top module, then its
    /// children depth-first in instance declaration order.
    pub instances: Vec<Instance>,
}

/// Elaboration refuses designs whose expansion exceeds this many instances;
/// a deep-but-acyclic parameterized hierarchy can explode combinatorially.
const MAX_INSTANCES: usize = 100_000;

impl Hierarchy {
    /// Children of module `parent` in the instantiation graph.
    pub fn children_of(&self, parent: usize) -> impl Iterator<Item = &HierEdge> {
        self.edges.iter().filter(move |e| e.parent == parent)
    }

    /// Instance indices whose module is `module`.
    pub fn instances_of(&self, module: usize) -> Vec<usize> {
        (0..self.instances.len())
            .filter(|&i| self.instances[i].module == module)
            .collect()
    }

    /// The child instance reached from instance `inst` through the
    /// instantiation named `name`.
    pub fn child_instance(&self, inst: usize, name: &str) -> Option<usize> {
        let want = format!("{}.{}", self.instances[inst].path, name);
        (0..self.instances.len())
            .find(|&i| self.instances[i].parent == Some(inst) && self.instances[i].path == want)
    }

    /// Fully qualified signal name within instance `inst`.
    pub fn qualified(&self, inst: usize, signal: &str) -> String {
        format!("{}.{}", self.instances[inst].path, signal)
    }
}

/// Builds the hierarchy. Fails if instantiation is cyclic (the error names
/// the cycle) or if elaboration exceeds the instance cap.
pub fn analyze_hierarchy(design: &Design) -> Result<Hierarchy, String> {
    let index: BTreeMap<&str, usize> = design
        .modules
        .iter()
        .enumerate()
        .map(|(i, m)| (m.name.as_str(), i))
        .collect();

    let mut edges = Vec::new();
    for (pi, m) in design.modules.iter().enumerate() {
        for inst in &m.insts {
            // The validator guarantees instantiated modules exist.
            let ci = index[inst.module.as_str()];
            edges.push(HierEdge { parent: pi, inst: inst.id.clone(), child: ci });
        }
    }

    if let Some(cycle) = find_cycle(design, &edges) {
        return Err(format!("instantiation cycle: {}", cycle.join(" -> ")));
    }

    let instantiated: Vec<bool> = {
        let mut v = vec![false; design.modules.len()];
        for e in &edges {
            v[e.child] = true;
        }
        v
    };
    let tops: Vec<usize> = (0..design.modules.len()).filter(|&i| !instantiated[i]).collect();

    let mut instances = Vec::new();
    let mut stack: Vec<(usize, Option<usize>, String)> = Vec::new();
    for &t in tops.iter().rev() {
        stack.push((t, None, design.modules[t].name.clone()));
    }
    while let Some((module, parent, path)) = stack.pop() {
        if instances.len() >= MAX_INSTANCES {
            return Err(format!("design elaborates to more than {MAX_INSTANCES} instances"));
        }
        let me = instances.len();
        instances.push(Instance { module, parent, path: path.clone() });
        for inst in design.modules[module].insts.iter().rev() {
            let ci = index[inst.module.as_str()];
            stack.push((ci, Some(me), format!("{}.{}", path, inst.id)));
        }
    }

    Ok(Hierarchy { edges, tops, instances })
}

/// Finds an instantiation cycle, if any, as a module-name path starting and
/// ending at the same module.
fn find_cycle(design: &Design, edges: &[HierEdge]) -> Option<Vec<String>> {
    // Iterative three-color DFS over module indices.
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let n = design.modules.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in edges {
        succ[e.parent].push(e.child);
    }
    let mut color = vec![WHITE; n];
    for root in 0..n {
        if color[root] != WHITE {
            continue;
        }
        // Stack of (node, next child slot); the gray path is the stack.
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = GRAY;
        while let Some(&(node, slot)) = stack.last() {
            if slot < succ[node].len() {
                stack.last_mut().unwrap().1 += 1;
                let child = succ[node][slot];
                match color[child] {
                    WHITE => {
                        color[child] = GRAY;
                        stack.push((child, 0));
                    }
                    GRAY => {
                        let start = stack.iter().position(|&(m, _)| m == child).unwrap();
                        let mut names: Vec<String> = stack[start..]
                            .iter()
                            .map(|&(m, _)| design.modules[m].name.clone())
                            .collect();
                        names.push(design.modules[child].name.clone());
                        return Some(names);
                    }
                    _ => {}
                }
            } else {
                color[node] = BLACK;
                stack.pop();
            }
        }
    }
    None
}

/// Deterministic text rendering: tops, edges, then elaborated instances.
pub fn dump(design: &Design, h: &Hierarchy) -> String {
    let mut out = String::new();
    for &t in &h.tops {
        writeln!(out, "top {}", design.modules[t].name).unwrap();
    }
    for e in &h.edges {
        writeln!(
            out,
            "edge {} .{} {}",
            design.modules[e.parent].name, e.inst, design.modules[e.child].name
        )
        .unwrap();
    }
    for inst in &h.instances {
        writeln!(out, "instance {} : {}", inst.path, design.modules[inst.module].name).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{Inst, Module};

    fn module_with_insts(name: &str, insts: &[(&str, &str)]) -> Module {
        let mut m = Module::new(name);
        for (id, target) in insts {
            m.insts.push(Inst {
                id: (*id).to_string(),
                module: (*target).to_string(),
                attrs: Default::default(),
            });
        }
        m
    }

    fn design_of(modules: Vec<Module>) -> Design {
        let mut d = Design::new("t");
        d.modules = modules;
        d
    }

    #[test]
    fn parent_child_pair_yields_one_edge_and_parent_top() {
        let d = design_of(vec![
            module_with_insts("accSqrDouble", &[("i", "doubler")]),
            module_with_insts("doubler", &[]),
        ]);
        let h = analyze_hierarchy(&d).unwrap();
        assert_eq!(h.edges, vec![HierEdge { parent: 0, inst: "i".into(), child: 1 }]);
        assert_eq!(h.tops, vec![0]);
        let paths: Vec<&str> = h.instances.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["accSqrDouble", "accSqrDouble.i"]);
        assert_eq!(h.instances[1].parent, Some(0));
        assert_eq!(h.qualified(1, "$t1"), "accSqrDouble.i.$t1");
        assert_eq!(h.child_instance(0, "i"), Some(1));
    }

    #[test]
    fn single_module_is_one_node_without_edges() {
        let d = design_of(vec![module_with_insts("solo", &[])]);
        let h = analyze_hierarchy(&d).unwrap();
        assert!(h.edges.is_empty());
        assert_eq!(h.tops, vec![0]);
        assert_eq!(h.instances.len(), 1);
        assert_eq!(h.instances[0].path, "solo");
    }

    #[test]
    fn self_instantiation_is_a_cycle_error() {
        let d = design_of(vec![module_with_insts("m", &[("i", "m")])]);
        let err = analyze_hierarchy(&d).unwrap_err();
        assert_eq!(err, "instantiation cycle: m -> m");
    }

    #[test]
    fn two_module_cycle_names_both_modules() {
        let d = design_of(vec![
            module_with_insts("a", &[("x", "b")]),
            module_with_insts("b", &[("y", "a")]),
        ]);
        let err = analyze_hierarchy(&d).unwrap_err();
        assert_eq!(err, "instantiation cycle: a -> b -> a");
    }

    #[test]
    fn diamond_sharing_elaborates_each_use_site() {
        // top instantiates mid twice; mid instantiates leaf once: 5 instances.
        let d = design_of(vec![
            module_with_insts("top", &[("m0", "mid"), ("m1", "mid")]),
            module_with_insts("mid", &[("l", "leaf")]),
            module_with_insts("leaf", &[]),
        ]);
        let h = analyze_hierarchy(&d).unwrap();
        let paths: Vec<&str> = h.instances.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["top", "top.m0", "top.m0.l", "top.m1", "top.m1.l"]);
        assert_eq!(h.instances_of(2), vec![2, 4]);
    }

    #[test]
    fn multiple_tops_each_get_a_tree() {
        let d = design_of(vec![
            module_with_insts("t1", &[("i", "shared")]),
            module_with_insts("t2", &[("j", "shared")]),
            module_with_insts("shared", &[]),
        ]);
        let h = analyze_hierarchy(&d).unwrap();
        assert_eq!(h.tops, vec![0, 1]);
        let paths: Vec<&str> = h.instances.iter().map(|i| i.path.as_str()).collect();
        assert_eq!(paths, ["t1", "t1.i", "t2", "t2.j"]);
    }

    #[test]
    fn dump_is_one_record_per_line() {
        let d = design_of(vec![
            module_with_insts("accSqrDouble", &[("i", "doubler")]),
            module_with_insts("doubler", &[]),
        ]);
        let h = analyze_hierarchy(&d).unwrap();
        let text = dump(&d, &h);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines,
            [
                "top accSqrDouble",
                "edge accSqrDouble .i doubler",
                "instance accSqrDouble : accSqrDouble",
                "instance accSqrDouble.i : doubler",
            ]
        );
    }
}
