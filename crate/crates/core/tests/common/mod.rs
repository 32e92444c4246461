// SPDX-License-Identifier: Apache-2.0

//! Reference implementations and invariant checkers shared by the
//! integration tests and the acceptance runner. Nothing here calls the
//! library's own traversal, loop or reducibility code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sfrviz_core::fixtures::{self, FixtureKind};
use sfrviz_core::{
    dfs_number, layout_tree, loop_forest, render_view, route_edges, sfr_number, EdgeShape, GroupKind, GroupSpec,
    LayoutExport, LayoutResult, NodeId, OrderedDigraph, SfrResult, ViewState,
};

pub type Numbers = BTreeMap<NodeId, u32>;
pub type Parents = BTreeMap<NodeId, NodeId>;

/// Successor lists by id, read through the public accessors.
pub fn adjacency(g: &OrderedDigraph) -> BTreeMap<NodeId, Vec<NodeId>> {
    g.nodes().iter().map(|n| (n.id, g.out_edges(n.id))).collect()
}

pub fn reachable_ids(g: &OrderedDigraph) -> BTreeSet<NodeId> {
    let adj = adjacency(g);
    let mut seen = BTreeSet::from([g.root()]);
    let mut queue = VecDeque::from([g.root()]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen
}

/// Direct recursive transcription of the sibling-first procedure: number
/// every unnumbered successor, then recurse into the newly numbered ones in
/// order.
pub fn oracle_sfr(g: &OrderedDigraph) -> (Numbers, Parents) {
    fn visit(v: NodeId, adj: &BTreeMap<NodeId, Vec<NodeId>>, next: &mut u32, num: &mut Numbers, par: &mut Parents) {
        let mut kids = Vec::new();
        for &w in &adj[&v] {
            if let std::collections::btree_map::Entry::Vacant(e) = num.entry(w) {
                e.insert(*next);
                *next += 1;
                par.insert(w, v);
                kids.push(w);
            }
        }
        for w in kids {
            visit(w, adj, next, num, par);
        }
    }
    let adj = adjacency(g);
    let mut num = Numbers::from([(g.root(), 1)]);
    let mut par = Parents::new();
    let mut next = 2;
    visit(g.root(), &adj, &mut next, &mut num, &mut par);
    (num, par)
}

/// Recursive pre-order depth-first numbering.
pub fn oracle_dfs(g: &OrderedDigraph) -> (Numbers, Parents) {
    fn visit(v: NodeId, adj: &BTreeMap<NodeId, Vec<NodeId>>, next: &mut u32, num: &mut Numbers, par: &mut Parents) {
        num.insert(v, *next);
        *next += 1;
        for &w in &adj[&v] {
            if !num.contains_key(&w) {
                par.insert(w, v);
                visit(w, adj, next, num, par);
            }
        }
    }
    let adj = adjacency(g);
    let mut num = Numbers::new();
    let mut par = Parents::new();
    let mut next = 1;
    visit(g.root(), &adj, &mut next, &mut num, &mut par);
    (num, par)
}

pub fn numbers_of(g: &OrderedDigraph, t: &SfrResult) -> Numbers {
    g.nodes().iter().filter_map(|n| t.number(n.id).map(|k| (n.id, k))).collect()
}

pub fn parents_of(g: &OrderedDigraph, t: &SfrResult) -> Parents {
    g.nodes().iter().filter_map(|n| t.parent(n.id).map(|p| (n.id, p))).collect()
}

/// Bijective numbering of the reachable nodes, consecutive children and a
/// valid spanning tree.
pub fn check_sfr_invariants(g: &OrderedDigraph, t: &SfrResult) -> Result<(), String> {
    let reach = reachable_ids(g);
    let num = numbers_of(g, t);
    let numbered: BTreeSet<NodeId> = num.keys().copied().collect();
    if numbered != reach {
        return Err(format!("numbered set {numbered:?} differs from reachable set {reach:?}"));
    }
    let mut values: Vec<u32> = num.values().copied().collect();
    values.sort_unstable();
    if values != (1..=reach.len() as u32).collect::<Vec<_>>() {
        return Err(format!("numbers {values:?} are not 1..={}", reach.len()));
    }
    if num.get(&g.root()) != Some(&1) {
        return Err("root is not numbered 1".into());
    }
    let adj = adjacency(g);
    for &v in &reach {
        let kids = t.children(v);
        for pair in kids.windows(2) {
            if num[&pair[1]] != num[&pair[0]] + 1 {
                return Err(format!("children of {v} are not consecutively numbered: {kids:?}"));
            }
        }
        let mut order = 0;
        for &c in &kids {
            if t.parent(c) != Some(v) {
                return Err(format!("child {c} of {v} has parent {:?}", t.parent(c)));
            }
            let Some(pos) = adj[&v].iter().position(|&w| w == c) else {
                return Err(format!("tree edge {v} -> {c} is not a graph edge"));
            };
            if pos < order {
                return Err(format!("children of {v} are out of edge order"));
            }
            order = pos;
        }
        if v == g.root() {
            if t.parent(v).is_some() {
                return Err("root has a parent".into());
            }
            continue;
        }
        let Some(p) = t.parent(v) else {
            return Err(format!("reachable node {v} has no parent"));
        };
        if !adj[&p].contains(&v) || num[&p] >= num[&v] || !t.children(p).contains(&v) {
            return Err(format!("bad tree edge {p} -> {v}"));
        }
        let mut cur = v;
        let mut steps = 0;
        while let Some(up) = t.parent(cur) {
            cur = up;
            steps += 1;
            if steps > reach.len() {
                return Err(format!("parent chain from {v} cycles"));
            }
        }
        if cur != g.root() {
            return Err(format!("parent chain from {v} ends at {cur}"));
        }
    }
    Ok(())
}

/// The library numbering equals the recursive reference exactly.
pub fn check_sfr_against_oracle(g: &OrderedDigraph) -> Result<(), String> {
    let t = sfr_number(g);
    let (num, par) = oracle_sfr(g);
    if numbers_of(g, &t) != num || parents_of(g, &t) != par {
        return Err(format!("SFR mismatch: got {:?}, expected {num:?}", numbers_of(g, &t)));
    }
    let d = dfs_number(g);
    let (num, par) = oracle_dfs(g);
    if numbers_of(g, &d) != num || parents_of(g, &d) != par {
        return Err(format!("DFS mismatch: got {:?}, expected {num:?}", numbers_of(g, &d)));
    }
    Ok(())
}

fn is_ancestor(t: &SfrResult, a: NodeId, b: NodeId) -> bool {
    let mut cur = Some(b);
    while let Some(v) = cur {
        if v == a {
            return true;
        }
        cur = t.parent(v);
    }
    false
}

/// Sibling intervals are disjoint and nested in the parent's, nodes sharing
/// a lane are related by ancestry, and children sit one row below.
pub fn check_layout_invariants(t: &SfrResult, l: &LayoutResult) -> Result<(), String> {
    let order = t.order();
    for &v in &order {
        let c = l.cell(v).ok_or_else(|| format!("numbered node {v} is not placed"))?;
        let kids = t.children(v);
        if kids.is_empty() {
            if c.width != 1 {
                return Err(format!("leaf {v} has width {}", c.width));
            }
            continue;
        }
        let mut cursor = c.lane;
        for &k in &kids {
            let kc = l.cell(k).unwrap();
            if kc.depth != c.depth + 1 {
                return Err(format!("child {k} of {v} is at depth {} below {}", kc.depth, c.depth));
            }
            if kc.lane < cursor {
                return Err(format!("child {k} of {v} overlaps its previous sibling"));
            }
            cursor = kc.lane + kc.width;
        }
        if cursor > c.lane + c.width || l.cell(kids[0]).unwrap().lane != c.lane {
            return Err(format!("children of {v} do not fit its interval"));
        }
    }
    let mut by_lane: BTreeMap<u32, Vec<NodeId>> = BTreeMap::new();
    for &v in &order {
        by_lane.entry(l.cell(v).unwrap().lane).or_default().push(v);
    }
    for nodes in by_lane.values() {
        for (i, &a) in nodes.iter().enumerate() {
            for &b in &nodes[i + 1..] {
                if !is_ancestor(t, a, b) && !is_ancestor(t, b, a) {
                    return Err(format!("{a} and {b} share a lane but are unrelated"));
                }
            }
        }
    }
    Ok(())
}

pub type CanonicalForest = BTreeSet<(NodeId, Vec<NodeId>, Option<NodeId>)>;

/// Reference loop decomposition. Components come from mutual reachability
/// computed by breadth-first search inside the current region.
pub fn oracle_loops(g: &OrderedDigraph, num: &Numbers) -> (CanonicalForest, BTreeMap<NodeId, u32>) {
    let adj = adjacency(g);
    let reach_within = |start: NodeId, region: &BTreeSet<NodeId>| -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &adj[&v] {
                if region.contains(&w) && seen.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        seen
    };
    let mut forest = CanonicalForest::new();
    let mut depth: BTreeMap<NodeId, u32> = g.nodes().iter().map(|n| (n.id, 0)).collect();
    let reachable: BTreeSet<NodeId> = num.keys().copied().collect();
    let mut work: Vec<(BTreeSet<NodeId>, Option<NodeId>)> = vec![(reachable, None)];
    while let Some((region, parent)) = work.pop() {
        let reach: BTreeMap<NodeId, BTreeSet<NodeId>> = region.iter().map(|&v| (v, reach_within(v, &region))).collect();
        let mut assigned = BTreeSet::new();
        for &v in &region {
            if assigned.contains(&v) {
                continue;
            }
            let comp: BTreeSet<NodeId> = region.iter().copied().filter(|w| reach[&v].contains(w) && reach[w].contains(&v)).collect();
            assigned.extend(comp.iter().copied());
            let is_loop = comp.len() > 1 || adj[&v].contains(&v);
            if !is_loop {
                continue;
            }
            let header = *comp.iter().min_by_key(|w| num[w]).unwrap();
            for w in &comp {
                *depth.get_mut(w).unwrap() += 1;
            }
            forest.insert((header, comp.iter().copied().collect(), parent));
            let rest: BTreeSet<NodeId> = comp.iter().copied().filter(|&w| w != header).collect();
            if !rest.is_empty() {
                work.push((rest, Some(header)));
            }
        }
    }
    (forest, depth)
}

/// Reducibility by exhaustive T1/T2 contraction of the reachable subgraph.
pub fn oracle_reducible(g: &OrderedDigraph) -> bool {
    let reach = reachable_ids(g);
    let mut succ: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut pred: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &v in &reach {
        succ.entry(v).or_default();
        pred.entry(v).or_default();
    }
    for &v in &reach {
        for w in g.out_edges(v) {
            succ.get_mut(&v).unwrap().insert(w);
            pred.get_mut(&w).unwrap().insert(v);
        }
    }
    let root = g.root();
    loop {
        let mut changed = false;
        // T1: drop self-loops.
        for (&v, s) in succ.iter_mut() {
            if s.remove(&v) {
                pred.get_mut(&v).unwrap().remove(&v);
                changed = true;
            }
        }
        // T2: merge a node with a unique predecessor into it.
        let candidate = succ.keys().copied().find(|v| *v != root && pred[v].len() == 1);
        if let Some(v) = candidate {
            let u = *pred[&v].iter().next().unwrap();
            let outs = succ.remove(&v).unwrap();
            pred.remove(&v);
            succ.get_mut(&u).unwrap().remove(&v);
            for w in outs {
                let w = if w == v { u } else { w };
                succ.get_mut(&u).unwrap().insert(w);
                let p = pred.get_mut(&w).unwrap();
                p.remove(&v);
                p.insert(u);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    succ.len() == 1
}

/// Compares the library loop forest and depths with the reference under
/// the SFR numbering.
pub fn check_loops_against_oracle(g: &OrderedDigraph) -> Result<(), String> {
    let t = sfr_number(g);
    let f = loop_forest(g, &t);
    let (expected, depths) = oracle_loops(g, &numbers_of(g, &t));
    if f.canonical() != expected {
        return Err(format!("forest {:?} differs from reference {expected:?}", f.canonical()));
    }
    for (&id, &d) in &depths {
        if f.depth(id) != Some(d) {
            return Err(format!("depth of {id} is {:?}, reference {d}", f.depth(id)));
        }
    }
    Ok(())
}

/// SFR-headed and DFS-headed forests agree on a graph.
pub fn check_header_independence(g: &OrderedDigraph) -> Result<(), String> {
    let a = loop_forest(g, &sfr_number(g));
    let b = loop_forest(g, &dfs_number(g));
    if a.canonical() != b.canonical() {
        return Err(format!("forests differ: {:?} vs {:?}", a.canonical(), b.canonical()));
    }
    for n in g.nodes() {
        if a.depth(n.id) != b.depth(n.id) {
            return Err(format!("depth of {} differs", n.id));
        }
    }
    Ok(())
}

/// Random reducible graphs: structured programs, plus random connected
/// digraphs the T1/T2 reference accepts.
pub fn reducible_graph(seed: u64) -> OrderedDigraph {
    if seed.is_multiple_of(2) {
        return fixtures::random::structured(seed, 8 + (seed as usize % 40));
    }
    let mut s = seed;
    loop {
        let g = fixtures::random::connected_digraph(s, 20, 1);
        if oracle_reducible(&g) {
            return g;
        }
        s = s.wrapping_add(1_000_003);
    }
}

/// Entry node names of a fragment's copies in a duplicated fixture.
fn copy_entry(fragment: &FixtureKind, copy: usize) -> String {
    let base = match fragment {
        FixtureKind::IfElse => "cond",
        FixtureKind::WhileLoop => "C",
        FixtureKind::DoWhile => "start",
        FixtureKind::NestedLoops { .. } => "entry",
        FixtureKind::Switch { .. } => "S",
        FixtureKind::Duplicated { .. } => unreachable!("fragments are not nested"),
    };
    format!("{base}{copy}")
}

const TRANSLATION_TOLERANCE: f64 = 1e-9;

fn close(a: EdgeShape, b: EdgeShape) -> bool {
    let eq = |p: sfrviz_core::Point, q: sfrviz_core::Point| {
        (p.x - q.x).abs() <= TRANSLATION_TOLERANCE && (p.y - q.y).abs() <= TRANSLATION_TOLERANCE
    };
    match (a, b) {
        (EdgeShape::Straight { from: f1, to: t1 }, EdgeShape::Straight { from: f2, to: t2 }) => eq(f1, f2) && eq(t1, t2),
        (EdgeShape::Curve { from: f1, control: c1, to: t1 }, EdgeShape::Curve { from: f2, control: c2, to: t2 }) => {
            eq(f1, f2) && eq(c1, c2) && eq(t1, t2)
        }
        _ => false,
    }
}

/// Every copy of the fragment gets the same sublayout (up to a lane and row
/// shift) and the same edge shapes (up to the matching translation).
/// Returns how many copies sit at a different row than the first.
pub fn check_congruence(fragment: FixtureKind, copies: usize, seed: u64) -> Result<usize, String> {
    let spec = fixtures::FixtureSpec {
        kind: FixtureKind::Duplicated { fragment: Box::new(fragment.clone()), copies },
        seed,
    };
    let g = fixtures::generate(&spec).map_err(|e| e.to_string())?;
    let t = sfr_number(&g);
    let l = layout_tree(&t);
    let routes = route_edges(&g, &t, &l);

    let entry_of = |copy: usize| -> Result<NodeId, String> {
        let name = copy_entry(&fragment, copy);
        g.nodes().iter().find(|n| n.instruction_text == name).map(|n| n.id).ok_or(format!("no node {name}"))
    };
    let subtree = |v: NodeId| -> Vec<NodeId> { t.subtree_ix(g.ix(v).unwrap()).iter().map(|&i| g.id_of(i)).collect() };

    let first = entry_of(1)?;
    let reference = subtree(first);
    let ref_cell = l.cell(first).unwrap();
    let shape_of = |nodes: &[NodeId]| -> Vec<(usize, usize, sfrviz_core::EdgeKind, EdgeShape)> {
        let pos: HashMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut out: Vec<_> = routes
            .iter()
            .filter_map(|r| Some((*pos.get(&r.src)?, *pos.get(&r.dst)?, r.kind, r.shape)))
            .collect();
        out.sort_by_key(|x| (x.0, x.1));
        out
    };
    let ref_routes = shape_of(&reference);
    if ref_routes.is_empty() {
        return Err("fragment has no internal edges".into());
    }

    let mut shifted_rows = 0;
    for copy in 2..=copies {
        let entry = entry_of(copy)?;
        let nodes = subtree(entry);
        if nodes.len() != reference.len() {
            return Err(format!("copy {copy} subtree has {} nodes, copy 1 has {}", nodes.len(), reference.len()));
        }
        let cell = l.cell(entry).unwrap();
        let dl = cell.lane as i64 - ref_cell.lane as i64;
        let dd = cell.depth as i64 - ref_cell.depth as i64;
        shifted_rows += usize::from(dd != 0);
        for (&a, &b) in reference.iter().zip(&nodes) {
            if t.children(a).len() != t.children(b).len() {
                return Err(format!("subtree shape differs at {a} / {b}"));
            }
            let (ca, cb) = (l.cell(a).unwrap(), l.cell(b).unwrap());
            if ca.lane as i64 + dl != cb.lane as i64 || ca.depth as i64 + dd != cb.depth as i64 || ca.width != cb.width {
                return Err(format!("cell of {b} is {cb:?}, expected {ca:?} shifted by ({dl}, {dd})"));
            }
        }
        let (rx, ry) = ref_cell.position();
        let (cx, cy) = cell.position();
        let routes_b = shape_of(&nodes);
        if routes_b.len() != ref_routes.len() {
            return Err(format!("copy {copy} has {} internal routes, copy 1 has {}", routes_b.len(), ref_routes.len()));
        }
        for (ra, rb) in ref_routes.iter().zip(&routes_b) {
            if (ra.0, ra.1, ra.2) != (rb.0, rb.1, rb.2) || !close(ra.3.translate(cx - rx, cy - ry), rb.3) {
                return Err(format!("route {ra:?} of copy 1 does not translate onto {rb:?} of copy {copy}"));
            }
        }
    }
    Ok(shifted_rows)
}

/// Disjoint weakly connected groups grown from random seeds.
fn random_groups(g: &OrderedDigraph, rng: &mut ChaCha8Rng, count: usize) -> Vec<BTreeSet<NodeId>> {
    let mut neighbours: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for n in g.nodes() {
        neighbours.entry(n.id).or_default();
        for w in g.out_edges(n.id) {
            if w != n.id {
                neighbours.entry(n.id).or_default().insert(w);
                neighbours.entry(w).or_default().insert(n.id);
            }
        }
    }
    let ids: Vec<NodeId> = g.nodes().iter().map(|n| n.id).collect();
    let mut used = BTreeSet::new();
    let mut groups = Vec::new();
    for _ in 0..count * 4 {
        if groups.len() == count {
            break;
        }
        let start = *ids.choose(rng).unwrap();
        if used.contains(&start) {
            continue;
        }
        let size = rng.gen_range(2..=5);
        let mut group = BTreeSet::from([start]);
        let mut frontier: Vec<NodeId> = neighbours[&start].iter().copied().filter(|w| !used.contains(w)).collect();
        while group.len() < size && !frontier.is_empty() {
            let w = frontier.swap_remove(rng.gen_range(0..frontier.len()));
            if used.contains(&w) || !group.insert(w) {
                continue;
            }
            frontier.extend(neighbours[&w].iter().copied().filter(|x| !used.contains(x) && !group.contains(x)));
        }
        if group.len() >= 2 {
            used.extend(group.iter().copied());
            groups.push(group);
        }
    }
    groups
}

#[derive(Clone, Debug)]
enum Action {
    Collapse(usize),
    Expand(usize),
}

/// One random action sequence whose final collapsed set is exactly the
/// `targets`: collapses in a random order where inner groups precede their
/// enclosing group, with expand/re-collapse detours and decoy groups that
/// end up open.
fn random_actions(
    rng: &mut ChaCha8Rng,
    targets: &[usize],
    decoys: &[usize],
    inner_of: &BTreeMap<usize, Vec<usize>>,
) -> Vec<Action> {
    let mut pending: Vec<usize> = targets.to_vec();
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let mut actions = Vec::new();
    let mut decoys_left: Vec<usize> = decoys.to_vec();
    while !pending.is_empty() {
        let ready: Vec<usize> = pending
            .iter()
            .copied()
            .filter(|p| inner_of.get(p).is_none_or(|inner| inner.iter().all(|i| done.contains(i))))
            .collect();
        let pick = *ready.choose(rng).unwrap();
        pending.retain(|&p| p != pick);
        actions.push(Action::Collapse(pick));
        done.insert(pick);
        if rng.gen_bool(0.3) {
            actions.push(Action::Expand(pick));
            actions.push(Action::Collapse(pick));
        }
        if !decoys_left.is_empty() && rng.gen_bool(0.3) {
            let d = decoys_left.pop().unwrap();
            actions.push(Action::Collapse(d));
            actions.push(Action::Expand(d));
        }
    }
    for d in decoys_left {
        actions.push(Action::Collapse(d));
        actions.push(Action::Expand(d));
    }
    actions
}

fn apply(g: &OrderedDigraph, groups: &[GroupSpec], actions: &[Action]) -> Result<ViewState, String> {
    let mut view = ViewState::new();
    for a in actions {
        view = match a {
            Action::Collapse(i) => view.collapse(g, groups[*i].clone()),
            Action::Expand(i) => view.expand(g, &groups[*i]),
        }
        .map_err(|e| format!("{a:?} failed: {e}"))?;
    }
    Ok(view)
}

pub fn export_bytes(g: &OrderedDigraph, view: &ViewState) -> Result<String, String> {
    let r = render_view(g, view).map_err(|e| e.to_string())?;
    Ok(LayoutExport::build(&r, 0, &[]).to_json())
}

/// Builds a random graph and group set, replays `orders` random action
/// sequences and requires byte-identical exports, equal to the export of a
/// view built directly from the collapsed set. Returns the number of
/// collapsed groups in the final view.
pub fn check_view_determinism(seed: u64, orders: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = fixtures::random::connected_digraph(seed, 30, 2);
    let mut sets = random_groups(&g, &mut rng, 5);
    if sets.len() < 2 {
        // Tiny graphs: fall back to the whole reachable graph as one group.
        let all: BTreeSet<NodeId> = g.nodes().iter().map(|n| n.id).collect();
        if all.len() < 2 {
            return Ok(0);
        }
        sets = vec![all];
    }
    let decoy_count = usize::from(sets.len() > 2);
    let mut specs: Vec<GroupSpec> = sets
        .iter()
        .enumerate()
        .map(|(i, m)| GroupSpec { kind: GroupKind::Method, members: m.clone(), label: format!("g{i}"), comment: None })
        .collect();
    let mut inner_of: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    // An enclosing group over the first two groups when they touch.
    if sets.len() >= 2 {
        let union: BTreeSet<NodeId> = sets[0].union(&sets[1]).copied().collect();
        if g.is_weakly_connected(&union) {
            inner_of.insert(specs.len(), vec![0, 1]);
            specs.push(GroupSpec { kind: GroupKind::Method, members: union, label: "outer".into(), comment: None });
        }
    }
    let decoys: Vec<usize> = (sets.len() - decoy_count..sets.len()).collect();
    let targets: Vec<usize> = (0..specs.len()).filter(|i| !decoys.contains(i)).collect();

    let mut direct = ViewState::new();
    for &i in &targets {
        direct = direct.with_group(specs[i].clone(), true);
    }
    let expected = export_bytes(&g, &direct)?;
    for k in 0..orders {
        let actions = random_actions(&mut rng, &targets, &decoys, &inner_of);
        let view = apply(&g, &specs, &actions)?;
        let got = export_bytes(&g, &view)?;
        if got != expected {
            return Err(format!("order {k} ({actions:?}) exported different bytes"));
        }
    }
    Ok(targets.len())
}

/// Collapses a random tree-connected group (a node and part of its SFR
/// subtree, so it has one tree entry) and checks that each surviving outside
/// node keeps its children's relative order. Returns false if the graph
/// offered no legal group.
pub fn check_sibling_stability(seed: u64) -> Result<bool, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = fixtures::random::connected_digraph(seed, 40, 2);
    let t = sfr_number(&g);
    let candidates: Vec<NodeId> = t.order().into_iter().filter(|&v| !t.children(v).is_empty()).collect();
    let Some(&top) = candidates.choose(&mut rng) else {
        return Ok(false);
    };
    let target = rng.gen_range(2..=6);
    let mut members = BTreeSet::from([top]);
    let mut frontier = t.children(top);
    while members.len() < target && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        members.insert(v);
        frontier.extend(t.children(v));
    }
    let spec = GroupSpec::user(members.iter().copied(), "sel");
    let view = ViewState::new().collapse(&g, spec).map_err(|e| format!("legal group {members:?} rejected: {e}"))?;
    let visible = view.visible(&g).map_err(|e| e.to_string())?;
    let t2 = sfr_number(&visible.graph);
    for v in t.order() {
        if members.contains(&v) {
            continue;
        }
        let mut before: Vec<NodeId> = Vec::new();
        for c in t.children(v) {
            let image = visible.image(&g, c).unwrap();
            if !before.contains(&image) {
                before.push(image);
            }
        }
        let after = t2.children(v);
        let kept: Vec<NodeId> = before.iter().copied().filter(|c| after.contains(c)).collect();
        let kept_after: Vec<NodeId> = after.iter().copied().filter(|c| kept.contains(c)).collect();
        if kept != kept_after {
            return Err(format!("children of {v} reordered: {before:?} became {after:?} after collapsing {members:?}"));
        }
    }
    Ok(true)
}

pub struct ConstructCase {
    pub name: &'static str,
    pub kind: FixtureKind,
    /// Node texts in SFR order and in DFS order.
    pub sfr: &'static [&'static str],
    pub dfs: &'static [&'static str],
    /// (parent text, children texts) in the SFR tree.
    pub tree: &'static [(&'static str, &'static [&'static str])],
    /// Edges that must stay out of the SFR tree.
    pub non_tree: &'static [(&'static str, &'static str)],
}

/// Hand-executed expectations for the four basic constructs.
pub fn construct_cases() -> Vec<ConstructCase> {
    vec![
        ConstructCase {
            name: "diamond",
            kind: FixtureKind::IfElse,
            sfr: &["cond", "t", "f", "j"],
            dfs: &["cond", "t", "j", "f"],
            tree: &[("cond", &["t", "f"]), ("t", &["j"]), ("f", &[])],
            non_tree: &[("f", "j")],
        },
        ConstructCase {
            name: "switch+fallthrough",
            kind: FixtureKind::Switch { branches: 3, fallthrough: vec![true, false] },
            sfr: &["S", "b1", "b2", "b3"],
            dfs: &["S", "b1", "b2", "b3"],
            tree: &[("S", &["b1", "b2", "b3"]), ("b1", &[])],
            non_tree: &[("b1", "b2")],
        },
        ConstructCase {
            name: "while",
            kind: FixtureKind::WhileLoop,
            sfr: &["C", "E", "B"],
            dfs: &["C", "E", "B"],
            tree: &[("C", &["E", "B"]), ("B", &[])],
            non_tree: &[("B", "C")],
        },
        ConstructCase {
            name: "do-while",
            kind: FixtureKind::DoWhile,
            sfr: &["start", "body", "cond"],
            dfs: &["start", "body", "cond"],
            tree: &[("start", &["body"]), ("body", &["cond"]), ("cond", &[])],
            non_tree: &[("cond", "start")],
        },
    ]
}

pub fn check_construct(case: &ConstructCase) -> Result<(), String> {
    let g = fixtures::generate_kind(&case.kind).map_err(|e| e.to_string())?;
    let by_text: HashMap<&str, NodeId> = g.nodes().iter().map(|n| (n.instruction_text.as_str(), n.id)).collect();
    let texts = |t: &SfrResult| -> Vec<String> { t.order().iter().map(|&v| g.node(v).unwrap().instruction_text.clone()).collect() };
    let t = sfr_number(&g);
    let d = dfs_number(&g);
    if texts(&t) != case.sfr {
        return Err(format!("SFR order {:?}, expected {:?}", texts(&t), case.sfr));
    }
    if texts(&d) != case.dfs {
        return Err(format!("DFS order {:?}, expected {:?}", texts(&d), case.dfs));
    }
    for (p, kids) in case.tree {
        let got: Vec<NodeId> = t.children(by_text[p]);
        let want: Vec<NodeId> = kids.iter().map(|k| by_text[k]).collect();
        if got != want {
            return Err(format!("SFR children of {p}: {got:?}, expected {want:?}"));
        }
    }
    for (a, b) in case.non_tree {
        if t.parent(by_text[b]) == Some(by_text[a]) {
            return Err(format!("{a} -> {b} became a tree edge"));
        }
    }
    check_sfr_against_oracle(&g)?;
    check_sfr_invariants(&g, &t)
}

/// Fixtures with checked-in SVG drawings.
pub fn golden_cases() -> Vec<(&'static str, FixtureKind)> {
    vec![
        ("if_else", FixtureKind::IfElse),
        ("switch", FixtureKind::Switch { branches: 3, fallthrough: vec![true, false] }),
        ("while_loop", FixtureKind::WhileLoop),
        ("do_while", FixtureKind::DoWhile),
        ("nested_loops_2", FixtureKind::NestedLoops { depth: 2 }),
    ]
}

pub fn golden_svg(kind: &FixtureKind) -> String {
    let g = fixtures::generate_kind(kind).expect("golden fixtures are valid");
    let r = render_view(&g, &ViewState::new()).expect("raw views render");
    sfrviz_core::svg::render_svg(&LayoutExport::build(&r, 0, &[]))
}

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(format!("{name}.svg"))
}
