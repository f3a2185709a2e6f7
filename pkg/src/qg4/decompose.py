"""Decomposition trees: splitting, merging, reduction and bunch statistics.

A repetition-free composition is stored as a rooted tree whose internal nodes
carry quasigroup labels (arity = child count) and whose leaves carry the
variable indices 1..n.  The root's value slot plays the role of the extra
leaf x_0 in the unrooted view used by the counting machinery, so every node
of arity k has degree k+1 there.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from .core import (
    ORDER,
    ArityError,
    FormatError,
    IDENTITY,
    Isotopy,
    Perm,
    Quasigroup,
)
from .autotopy import is_autotopy
from .semilinear import (
    PairPartition,
    native_elements,
    semilinear_profile,
)


@dataclass(frozen=True)
class Leaf:
    """A variable leaf; `var` is the 1-based argument index."""

    var: int


@dataclass(frozen=True)
class Node:
    """An internal node: a quasigroup label applied to ordered children."""

    label: Quasigroup
    children: tuple["Tree", ...]


Tree = Union[Node, Leaf]

EdgeKey = tuple[str, int]  # ('leaf', var) or ('node', child_node_id)


# ---------------------------------------------------------------------------
# Tree plumbing
# ---------------------------------------------------------------------------

def leaf_vars(t: Tree) -> list[int]:
    """Leaf variable indices in traversal (depth-first, left-to-right) order."""
    if isinstance(t, Leaf):
        return [t.var]
    out: list[int] = []
    for child in t.children:
        out.extend(leaf_vars(child))
    return out


def tree_arity(t: Tree) -> int:
    return len(leaf_vars(t))


def validate_tree(t: Tree) -> int:
    """Check leaf indices form a permutation of 1..n and arities match; return n."""
    if isinstance(t, Leaf):
        raise FormatError("a decomposition tree must have at least one node")
    vars_seen = leaf_vars(t)
    n = len(vars_seen)
    if sorted(vars_seen) != list(range(1, n + 1)):
        raise FormatError(f"leaf indices {sorted(vars_seen)} are not 1..{n}")
    for node, _path in iter_nodes(t):
        if node.label.arity != len(node.children):
            raise FormatError("node label arity does not match its child count")
        if node.label.arity < 2:
            raise FormatError("internal nodes must have arity at least 2")
    return n


def iter_nodes(t: Tree, path: tuple[int, ...] = ()) -> Iterator[tuple[Node, tuple[int, ...]]]:
    """All internal nodes with their root paths, in preorder."""
    if isinstance(t, Node):
        yield t, path
        for k, child in enumerate(t.children):
            yield from iter_nodes(child, path + (k,))


def node_at(t: Tree, path: tuple[int, ...]) -> Node:
    cur = t
    for k in path:
        if not isinstance(cur, Node):
            raise ValueError(f"path {path} leaves the tree")
        cur = cur.children[k]
    if not isinstance(cur, Node):
        raise ValueError(f"path {path} points at a leaf")
    return cur


def _replace_at(t: Tree, path: tuple[int, ...], sub: Tree) -> Tree:
    if not path:
        return sub
    assert isinstance(t, Node)
    k = path[0]
    children = list(t.children)
    children[k] = _replace_at(children[k], path[1:], sub)
    return Node(t.label, tuple(children))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _permute_args(q: Quasigroup, var_order: list[int]) -> Quasigroup:
    """Reorder arguments so axis v-1 receives variable v.

    `var_order[k]` is the variable currently read by q's (k+1)-th argument.
    """
    if var_order == sorted(var_order):
        return q
    axes = [var_order.index(v) for v in range(1, q.arity + 1)]
    return Quasigroup(np.transpose(q.table, axes), _trusted=True)


def _eval_node(node: Node) -> tuple[Quasigroup, list[int]]:
    q = node.label
    vars_seen: list[int] = []
    pos = 1
    for child in node.children:
        if isinstance(child, Leaf):
            vars_seen.append(child.var)
            pos += 1
        else:
            cq, cvars = _eval_node(child)
            q = q.compose_at(cq, pos)
            vars_seen.extend(cvars)
            pos += cq.arity
    return q, vars_seen


def tree_eval(t: Tree) -> Quasigroup:
    """The quasigroup a decomposition tree represents."""
    validate_tree(t)
    q, vars_seen = _eval_node(t)
    return _permute_args(q, vars_seen)


# ---------------------------------------------------------------------------
# Splitting into repetition-free factors
# ---------------------------------------------------------------------------

def _try_split(q: Quasigroup, subset: tuple[int, ...]):
    """Factor q as outer(inner(x_subset), x_rest), or None.

    The congruence test: anchoring x_rest at zero defines the candidate inner
    value; the subset splits iff arguments with equal inner values give equal
    q values over every completion of the rest.
    """
    n = q.arity
    axes_a = [a - 1 for a in subset]
    axes_rest = [k for k in range(n) if k + 1 not in subset]
    m = len(subset)
    flat = np.transpose(q.table, axes_a + axes_rest).reshape(ORDER**m, -1)
    inner_vals = flat[:, 0]
    reps = []
    for v in range(ORDER):
        members = flat[inner_vals == v]
        if not (members == members[0]).all():
            return None
        reps.append(int(np.argmax(inner_vals == v)))
    inner = Quasigroup(inner_vals.reshape((ORDER,) * m))
    outer = Quasigroup(flat[reps].reshape((ORDER,) * (n - m + 1)))
    return inner, outer


def find_split(q: Quasigroup):
    """Smallest-then-lexicographic argument subset splitting q, or None.

    Returns (subset, inner, outer) with q = outer(inner(x_subset), x_rest),
    both parts reading their arguments in increasing index order and the
    inner value feeding outer's first argument.
    """
    n = q.arity
    if n < 3:
        return None
    for size in range(2, n):
        for subset in itertools.combinations(range(1, n + 1), size):
            got = _try_split(q, subset)
            if got is not None:
                return subset, got[0], got[1]
    return None


def _substitute_leaves(t: Tree, mapping: dict[int, Tree]) -> Tree:
    if isinstance(t, Leaf):
        return mapping[t.var]
    return Node(t.label, tuple(_substitute_leaves(c, mapping) for c in t.children))


def _decompose(q: Quasigroup) -> Tree:
    split = find_split(q)
    if split is None:
        return Node(q, tuple(Leaf(i) for i in range(1, q.arity + 1)))
    subset, inner, outer = split
    rest = [i for i in range(1, q.arity + 1) if i not in subset]
    inner_tree = _substitute_leaves(
        _decompose(inner), {k + 1: Leaf(subset[k]) for k in range(len(subset))})
    mapping: dict[int, Tree] = {1: inner_tree}
    for j, var in enumerate(rest, start=2):
        mapping[j] = Leaf(var)
    return _substitute_leaves(_decompose(outer), mapping)


def full_decomposition(q: Quasigroup) -> Tree:
    """Split recursively until every label is irreducible."""
    if q.arity < 2:
        raise ArityError("decomposition needs arity at least 2")
    return _decompose(q)


# ---------------------------------------------------------------------------
# Coherence, merging, proper and reduced decompositions
# ---------------------------------------------------------------------------

def _adjacent_node_pair(t: Tree, parent_path: tuple[int, ...], child_index: int):
    parent = node_at(t, parent_path)
    if not 0 <= child_index < len(parent.children):
        raise ValueError(f"child index {child_index} out of range")
    child = parent.children[child_index]
    if not isinstance(child, Node):
        raise ValueError("the selected child is a leaf, not a node")
    return parent, child


def are_coherent(t: Tree, parent_path: tuple[int, ...], child_index: int) -> bool:
    """True iff the labels share a pair partition across the connecting edge."""
    parent, child = _adjacent_node_pair(t, parent_path, child_index)
    at_parent = semilinear_profile(parent.label).partitions_at(child_index + 1)
    at_child = semilinear_profile(child.label).partitions_at(0)
    return bool(at_parent & at_child)


def merge_nodes(t: Tree, parent_path: tuple[int, ...], child_index: int) -> Tree:
    """Replace an adjacent node pair by one node with the composed label."""
    parent, child = _adjacent_node_pair(t, parent_path, child_index)
    label = parent.label.compose_at(child.label, child_index + 1)
    children = (parent.children[:child_index] + child.children
                + parent.children[child_index + 1:])
    return _replace_at(t, parent_path, Node(label, children))


def _bfs_paths(t: Tree) -> list[tuple[int, ...]]:
    paths = [p for _node, p in iter_nodes(t)]
    paths.sort(key=lambda p: (len(p), p))
    return paths


def _first_coherent_pair(t: Tree):
    for path in _bfs_paths(t):
        node = node_at(t, path)
        for k, child in enumerate(node.children):
            if isinstance(child, Node) and are_coherent(t, path, k):
                return path, k
    return None


def proper_decomposition(q: Quasigroup) -> Tree:
    """Merge coherent pairs of the full decomposition until none remain."""
    t = full_decomposition(q)
    while True:
        pair = _first_coherent_pair(t)
        if pair is None:
            return t
        t = merge_nodes(t, pair[0], pair[1])


def is_proper(t: Tree) -> bool:
    """Semilinear labels and no coherent adjacent pair."""
    for node, _ in iter_nodes(t):
        if not semilinear_profile(node.label).is_semilinear:
            return False
    return _first_coherent_pair(t) is None


def is_reduced(t: Tree) -> bool:
    """Proper, and every label respects the 01|23 or 02|13 partition uniformly."""
    if not is_proper(t):
        return False
    for node, _ in iter_nodes(t):
        constant = semilinear_profile(node.label).constant_partitions()
        if not any(p.partner in (1, 2) for p in constant):
            return False
    return True


def _xor_table(n: int) -> Quasigroup:
    grids = np.indices((ORDER,) * n, dtype=np.uint8)
    acc = grids[0]
    for g in grids[1:]:
        acc = acc ^ g
    return Quasigroup(acc, _trusted=True)


def _slot_partner(label: Quasigroup, slot: int, target: PairPartition) -> int:
    """Partner of 0 at a slot, preferring the color target when it is valid."""
    options = semilinear_profile(label).partitions_at(slot)
    if not options:
        raise ValueError("label is not semilinear; reduce needs a proper tree")
    if target in options:
        return target.partner
    if len(options) > 1:
        raise ValueError("ambiguous partition at a nonlinear label slot")
    return next(iter(options)).partner


def reduce_decomposition(t: Tree) -> tuple[Tree, Isotopy]:
    """Make every label 01|23- or 02|13-semilinear according to depth parity.

    Even-depth nodes end up respecting 01|23 and odd-depth nodes 02|13.  The
    returned isotopy theta satisfies tree_eval(t).isotope(theta) == the new
    tree's value, per the edge-isotopy action on decompositions.
    """
    n = validate_tree(t)
    if not is_proper(t):
        raise ValueError("reduce_decomposition needs a proper tree")
    struct = _structure(t)

    targets = {
        info.node_id: PairPartition(1 if info.depth % 2 == 0 else 2)
        for info in struct.infos
    }

    single = struct.infos[0]
    if len(struct.infos) == 1 and semilinear_profile(single.label).is_linear:
        # A lone linear label is normalized straight to the plain xor table;
        # the slot permutations spread onto the leaf edges by variable.
        from .autotopy import are_isotopic

        theta = are_isotopic(single.label, _xor_table(n))
        assert theta is not None
        edge_perms = {struct.edge_key(0, s): theta[s] for s in range(n + 1)}
        new_tree = _apply_edge_isotopy(t, struct, edge_perms)
        flat = Isotopy(edge_perms[("leaf", j)] for j in range(n + 1))
        return new_tree, flat

    edge_perms: dict[EdgeKey, Perm] = {}
    for info in struct.infos:
        target = targets[info.node_id]
        for slot, (kind, ref) in enumerate(info.slots):
            key = struct.edge_key(info.node_id, slot)
            if key in edge_perms:
                continue
            a = _slot_partner(info.label, slot, target)
            if kind == "leaf":
                edge_perms[key] = (
                    IDENTITY if a == target.partner
                    else Perm.from_cycles((target.partner, a)))
            else:
                other_id = ref if slot != 0 else info.parent
                assert other_id is not None
                other = struct.infos[other_id]
                other_slot = struct.slot_of_edge(other_id, key)
                b = _slot_partner(other.label, other_slot, targets[other_id])
                if targets[info.node_id].partner == 1:
                    a1, a2 = a, b
                else:
                    a1, a2 = b, a
                images = [0, a1, a2, 6 - a1 - a2]
                edge_perms[key] = Perm(images)

    new_tree = _apply_edge_isotopy(t, struct, edge_perms)
    flat = Isotopy(edge_perms[("leaf", j)] for j in range(n + 1))
    return new_tree, flat


def _apply_edge_isotopy(t: Tree, struct: "_Structure", perms: dict[EdgeKey, Perm]) -> Tree:
    def rebuild(sub: Tree, node_id_counter: list[int]) -> Tree:
        if isinstance(sub, Leaf):
            return sub
        node_id = node_id_counter[0]
        node_id_counter[0] += 1
        info = struct.infos[node_id]
        slot_perms = [perms.get(struct.edge_key(node_id, s), IDENTITY)
                      for s in range(len(info.slots))]
        new_label = sub.label.isotope(Isotopy(slot_perms))
        new_children = tuple(rebuild(c, node_id_counter) for c in sub.children)
        return Node(new_label, new_children)

    return rebuild(t, [0])


# ---------------------------------------------------------------------------
# Unrooted structure and bunch statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _NodeInfo:
    node_id: int
    path: tuple[int, ...]
    label: Quasigroup
    depth: int
    parent: int | None
    slots: tuple[tuple[str, int], ...]  # slot 0 faces the parent (or x_0)


class _Structure:
    """Unrooted view of a tree: nodes, slots, leaf attachments, edge keys."""

    def __init__(self, infos: list[_NodeInfo], arity: int):
        self.infos = infos
        self.arity = arity
        self.leaf_at: dict[int, tuple[int, int]] = {}
        for info in infos:
            for slot, (kind, ref) in enumerate(info.slots):
                if kind == "leaf":
                    self.leaf_at[ref] = (info.node_id, slot)

    def edge_key(self, node_id: int, slot: int) -> EdgeKey:
        kind, ref = self.infos[node_id].slots[slot]
        if kind == "leaf":
            return ("leaf", ref)
        if slot == 0:
            return ("node", node_id)
        return ("node", ref)

    def slot_of_edge(self, node_id: int, key: EdgeKey) -> int:
        for slot in range(len(self.infos[node_id].slots)):
            if self.edge_key(node_id, slot) == key:
                return slot
        raise KeyError(f"edge {key} is not incident to node {node_id}")

    def all_edges(self) -> list[EdgeKey]:
        out: list[EdgeKey] = [("leaf", v) for v in range(self.arity + 1)]
        out.extend(("node", info.node_id) for info in self.infos if info.parent is not None)
        return out

    def degree(self, node_id: int) -> int:
        return len(self.infos[node_id].slots)

    def leaf_count(self, node_id: int) -> int:
        return sum(1 for kind, _ in self.infos[node_id].slots if kind == "leaf")

    def node_neighbors(self, node_id: int) -> list[int]:
        out = []
        for slot, (kind, ref) in enumerate(self.infos[node_id].slots):
            if kind == "node":
                out.append(self.infos[node_id].parent if slot == 0 else ref)
        return out

    def node_path(self, a: int, b: int) -> list[int]:
        """Nodes on the unique tree path from node a to node b, inclusive."""
        up_a, up_b = [a], [b]
        x, y = a, b
        while self.infos[x].depth > self.infos[y].depth:
            x = self.infos[x].parent
            up_a.append(x)
        while self.infos[y].depth > self.infos[x].depth:
            y = self.infos[y].parent
            up_b.append(y)
        while x != y:
            x = self.infos[x].parent
            y = self.infos[y].parent
            up_a.append(x)
            up_b.append(y)
        return up_a + up_b[-2::-1]


def _structure(t: Tree) -> _Structure:
    arity = validate_tree(t)
    infos: list[_NodeInfo] = []

    def walk(sub: Node, path: tuple[int, ...], depth: int, parent: int | None) -> int:
        node_id = len(infos)
        infos.append(None)  # reserve the slot; children get later ids
        slots: list[tuple[str, int]] = [("leaf", 0) if parent is None else ("node", parent)]
        child_ids: list[tuple[str, int]] = []
        for k, child in enumerate(sub.children):
            if isinstance(child, Leaf):
                child_ids.append(("leaf", child.var))
            else:
                child_ids.append(("node", walk(child, path + (k,), depth + 1, node_id)))
        slots.extend(child_ids)
        infos[node_id] = _NodeInfo(
            node_id=node_id, path=path, label=sub.label, depth=depth,
            parent=parent, slots=tuple(slots))
        return node_id

    assert isinstance(t, Node)
    walk(t, (), 0, None)
    return _Structure(infos, arity)


@dataclass(frozen=True)
class TreeStats:
    """Counts of the unrooted tree driving the structural lower bound."""

    n_leaves: int
    n_nodes: int
    n_bald: int
    n_bridges: int
    n_forks: int
    n_bunches: int
    n_bald_bunches: int
    bunch_members: tuple[frozenset[int], ...]
    bunch_graph_edges: tuple[tuple[int, int], ...]

    @property
    def structural_exponent(self) -> int:
        return (self.n_leaves - self.n_nodes + self.n_bridges
                + self.n_bald_bunches + self.n_forks)


def _bunches(struct: _Structure) -> tuple[list[frozenset[int]], list[tuple[int, int]]]:
    """Components of the graph joining the two node-neighbors of each bridge."""
    parent = list(range(len(struct.infos)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for info in struct.infos:
        if struct.degree(info.node_id) == 3 and struct.leaf_count(info.node_id) == 1:
            u, v = struct.node_neighbors(info.node_id)
            edges.append((min(u, v), max(u, v)))
            parent[find(u)] = find(v)
    groups: dict[int, set[int]] = {}
    for info in struct.infos:
        groups.setdefault(find(info.node_id), set()).add(info.node_id)
    members = [frozenset(g) for g in groups.values()]
    members.sort(key=min)
    return members, sorted(set(edges))


def tree_stats(t: Tree) -> TreeStats:
    """Leaf/node/bald/bridge/fork/bunch counts on the unrooted view."""
    struct = _structure(t)
    n_nodes = len(struct.infos)
    n_bald = sum(1 for i in struct.infos if struct.leaf_count(i.node_id) == 0)
    n_bridges = 0
    n_forks = 0
    for info in struct.infos:
        if struct.degree(info.node_id) == 3:
            leaves_here = struct.leaf_count(info.node_id)
            if leaves_here == 1:
                n_bridges += 1
            elif leaves_here == 2:
                n_forks += 1
    members, edges = _bunches(struct)
    bald_bunches = 0
    for group in members:
        if all(struct.leaf_count(u) == 0 for u in group):
            bald_bunches += 1
    return TreeStats(
        n_leaves=struct.arity + 1,
        n_nodes=n_nodes,
        n_bald=n_bald,
        n_bridges=n_bridges,
        n_forks=n_forks,
        n_bunches=len(members),
        n_bald_bunches=bald_bunches,
        bunch_members=tuple(members),
        bunch_graph_edges=tuple(edges),
    )


def lower_bound_predict(stats: TreeStats) -> int:
    """Order of the structural subgroup guaranteed by the bunch machinery."""
    return 2**stats.structural_exponent


def floor_lower_bound(n: int) -> int:
    """The closed-form bound holding for every quasigroup of arity n."""
    return 2 ** (n // 2 + 2)


# ---------------------------------------------------------------------------
# Structural autotopies of a reduced decomposition
# ---------------------------------------------------------------------------

@dataclass
class EdgeIsotopy:
    """A permutation per tree edge; identity on edges left unlisted.

    `origin` tags structural generators with the bunch that induced them:
    ("bunch-path", bunch, x, y) for leaf-pair involutions and
    ("fork-cycles", bunch, node_id) for fork cycle pairs.
    """

    arity: int
    perms: dict[EdgeKey, Perm]
    origin: tuple | None = None

    def perm_at(self, key: EdgeKey) -> Perm:
        return self.perms.get(key, IDENTITY)

    def flatten(self) -> Isotopy:
        """Restriction to the leaf edges: an isotopy of the represented quasigroup."""
        return Isotopy(self.perm_at(("leaf", j)) for j in range(self.arity + 1))

    def support(self) -> frozenset[EdgeKey]:
        return frozenset(k for k, p in self.perms.items() if not p.is_identity)

    def __mul__(self, other: "EdgeIsotopy") -> "EdgeIsotopy":
        keys = set(self.perms) | set(other.perms)
        return EdgeIsotopy(
            self.arity, {k: self.perm_at(k) * other.perm_at(k) for k in keys},
            origin=None)


def _node_isotopy(struct: _Structure, node_id: int, perms: dict[EdgeKey, Perm]) -> Isotopy:
    info = struct.infos[node_id]
    return Isotopy(
        perms.get(struct.edge_key(node_id, s), IDENTITY) for s in range(len(info.slots)))


def is_decomposition_autotopy(t: Tree, edge_iso: EdgeIsotopy) -> bool:
    """True iff the edge permutations fix every node label in place."""
    struct = _structure(t)
    return all(
        is_autotopy(info.label, _node_isotopy(struct, info.node_id, edge_iso.perms))
        for info in struct.infos)


def _bunch_partition(struct: _Structure, members: frozenset[int]) -> PairPartition:
    """The common pair partition of a bunch's labels in a reduced tree."""
    rep = struct.infos[min(members)]
    constant = semilinear_profile(rep.label).constant_partitions()
    preferred = PairPartition(1 if rep.depth % 2 == 0 else 2)
    if preferred in constant:
        return preferred
    low = [p for p in constant if p.partner in (1, 2)]
    if not low:
        raise ValueError("tree is not reduced: a label lacks a 01|23 or 02|13 partition")
    return low[0]


def _bridge_leaf_transposition(
    struct: _Structure, node_id: int, path_keys: set[EdgeKey], xi: Perm
) -> tuple[EdgeKey, Perm]:
    """The native transposition completing (xi, xi) to an autotopy of a bridge."""
    info = struct.infos[node_id]
    leaf_slots = [s for s, (kind, _r) in enumerate(info.slots) if kind == "leaf"]
    assert len(leaf_slots) == 1, "a path node outside the bunch must be a bridge"
    leaf_key = struct.edge_key(node_id, leaf_slots[0])
    partition = semilinear_profile(info.label).uniform_partition()
    assert partition is not None
    hits = []
    for tau in native_elements(partition).transpositions:
        trial = {k: xi for k in path_keys}
        trial[leaf_key] = tau
        if is_autotopy(info.label, _node_isotopy(struct, node_id, trial)):
            hits.append(tau)
    if len(hits) != 1:
        raise AssertionError("exactly one native transposition must complete a bridge")
    return leaf_key, hits[0]


def _leaf_path_edges(struct: _Structure, x: int, y: int):
    """Edge keys and interior nodes of the leaf-to-leaf path."""
    ux, _ = struct.leaf_at[x]
    uy, _ = struct.leaf_at[y]
    nodes = struct.node_path(ux, uy)
    keys = [("leaf", x)]
    for a, b in zip(nodes, nodes[1:]):
        child = a if struct.infos[a].parent == b else b
        keys.append(("node", child))
    keys.append(("leaf", y))
    return keys, nodes


def structural_autotopies(t: Tree) -> list[EdgeIsotopy]:
    """Bunch path involutions and fork cycles of a reduced decomposition.

    For every non-bald bunch with leaves x < y_1 < ... the generators pair x
    with each y_i: the path between them carries the bunch's native
    involution and each crossed bridge contributes one native transposition
    on its leaf edge.  Every fork contributes its two native-cycle
    autotopies.  All outputs are verified node by node.
    """
    if not is_reduced(t):
        raise ValueError("structural autotopies need a reduced tree")
    struct = _structure(t)
    stats = tree_stats(t)
    member_bunch: dict[int, int] = {}
    for b, group in enumerate(stats.bunch_members):
        for u in group:
            member_bunch[u] = b

    out: list[EdgeIsotopy] = []
    for b, group in enumerate(stats.bunch_members):
        leaves = sorted(
            v for v, (u, _s) in struct.leaf_at.items() if u in group)
        if len(leaves) < 2:
            continue
        xi = native_elements(_bunch_partition(struct, group)).involution
        x = leaves[0]
        for y in leaves[1:]:
            keys, nodes = _leaf_path_edges(struct, x, y)
            perms: dict[EdgeKey, Perm] = {k: xi for k in keys}
            key_set = set(keys)
            for u in nodes:
                if member_bunch[u] != b:
                    incident = {
                        struct.edge_key(u, s) for s in range(struct.degree(u))}
                    leaf_key, tau = _bridge_leaf_transposition(
                        struct, u, incident & key_set, xi)
                    perms[leaf_key] = tau
            out.append(EdgeIsotopy(struct.arity, perms,
                                   origin=("bunch-path", b, x, y)))

    for info in struct.infos:
        if struct.degree(info.node_id) == 3 and struct.leaf_count(info.node_id) == 2:
            partition = semilinear_profile(info.label).uniform_partition()
            assert partition is not None
            cycles = native_elements(partition).cycles
            leaf_keys = [
                struct.edge_key(info.node_id, s)
                for s, (kind, _r) in enumerate(info.slots) if kind == "leaf"]
            found = []
            origin = ("fork-cycles", member_bunch[info.node_id], info.node_id)
            for c1, c2 in itertools.product(cycles, repeat=2):
                trial = {leaf_keys[0]: c1, leaf_keys[1]: c2}
                if is_autotopy(info.label,
                               _node_isotopy(struct, info.node_id, trial)):
                    found.append(EdgeIsotopy(struct.arity, trial, origin=origin))
            if len(found) != 2:
                raise AssertionError("a fork must admit exactly two cycle autotopies")
            out.extend(found)

    for edge_iso in out:
        if not is_decomposition_autotopy(t, edge_iso):
            raise AssertionError("structural candidate failed node verification")
    return out


# ---------------------------------------------------------------------------
# Minimality conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimalityReport:
    """The structural conditions a minimal-group reduced tree must satisfy."""

    no_high_degree: bool
    no_forks: bool
    no_bald_bunches: bool
    single_nonbald_per_bunch: bool
    no_bald_high_degree: bool
    degree4_labels_ok: bool

    @property
    def satisfied(self) -> bool:
        return (self.no_high_degree and self.no_forks and self.no_bald_bunches
                and self.single_nonbald_per_bunch and self.no_bald_high_degree
                and self.degree4_labels_ok)


def minimality_conditions(t: Tree) -> MinimalityReport:
    """Check the degree/fork/bunch conditions plus the degree-4 label class."""
    from .autotopy import are_isotopic
    from .construct import shifted_linear

    struct = _structure(t)
    stats = tree_stats(t)
    degrees = [struct.degree(i.node_id) for i in struct.infos]
    balds = [i.node_id for i in struct.infos if struct.leaf_count(i.node_id) == 0]
    single_nonbald = all(
        sum(1 for u in group if struct.leaf_count(u) > 0) <= 1
        for group in stats.bunch_members)
    reference = shifted_linear(3)
    degree4_ok = all(
        are_isotopic(struct.infos[i].label, reference) is not None
        for i in range(len(struct.infos)) if degrees[i] == 4)
    return MinimalityReport(
        no_high_degree=all(d <= 4 for d in degrees),
        no_forks=stats.n_forks == 0,
        no_bald_bunches=stats.n_bald_bunches == 0,
        single_nonbald_per_bunch=single_nonbald,
        no_bald_high_degree=all(struct.degree(u) == 3 for u in balds),
        degree4_labels_ok=degree4_ok,
    )


# ---------------------------------------------------------------------------
# Re-rooting (decomposition of an inverse)
# ---------------------------------------------------------------------------

def _leaf_path(t: Node, var: int) -> list[tuple[Node, int]]:
    """(node, child index) steps from the root down to the leaf `var`."""
    if isinstance(t, Leaf):
        raise ValueError("reached a leaf unexpectedly")
    for k, child in enumerate(t.children):
        if isinstance(child, Leaf):
            if child.var == var:
                return [(t, k)]
        elif var in leaf_vars(child):
            return [(t, k)] + _leaf_path(child, var)
    raise ValueError(f"variable {var} not in tree")


def reroot_to_leaf(t: Tree, var: int) -> Tree:
    """The decomposition tree of the represented quasigroup's inverse at `var`.

    Labels along the path from the value slot to the chosen leaf are replaced
    by their inverses in the path argument; the old value slot becomes the
    leaf carrying `var`.
    """
    n = validate_tree(t)
    if not 1 <= var <= n:
        raise ArityError(f"variable {var} out of range 1..{n}")
    path = _leaf_path(t, var)

    def lifted(k: int) -> Tree:
        if k == 0:
            return Leaf(var)
        node, child_idx = path[k - 1]
        new_label = node.label.inverse(child_idx + 1)
        children = list(node.children)
        children[child_idx] = lifted(k - 1)
        return Node(new_label, tuple(children))

    deepest, child_idx = path[-1]
    new_label = deepest.label.inverse(child_idx + 1)
    children = list(deepest.children)
    children[child_idx] = lifted(len(path) - 1)
    return Node(new_label, tuple(children))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def tree_to_doc(t: Tree) -> dict:
    if isinstance(t, Leaf):
        return {"var": t.var}
    return {"table": t.label.digits(),
            "children": [tree_to_doc(c) for c in t.children]}


def doc_to_tree(doc) -> Tree:
    if not isinstance(doc, dict):
        raise FormatError("tree document entries must be objects")
    if "var" in doc:
        if set(doc) != {"var"} or not isinstance(doc["var"], int):
            raise FormatError("a leaf is exactly {\"var\": <int>}")
        return Leaf(doc["var"])
    if set(doc) != {"table", "children"}:
        raise FormatError("a node is exactly {\"table\": ..., \"children\": [...]}")
    children = tuple(doc_to_tree(c) for c in doc["children"])
    k = len(children)
    if k < 2:
        raise FormatError("a node needs at least two children")
    label = Quasigroup.from_digits(k, doc["table"])
    return Node(label, children)


def dumps_tree(t: Tree) -> str:
    validate_tree(t)
    return json.dumps(tree_to_doc(t), separators=(",", ":"), sort_keys=True)


def loads_tree(text: str) -> Tree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid tree document: {exc}") from exc
    t = doc_to_tree(doc)
    validate_tree(t)
    return t
