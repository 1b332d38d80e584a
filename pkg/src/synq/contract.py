"""Exact tensor-network contraction and environment gradients.

Contraction proceeds pairwise over connected nodes, always picking the pair
whose merged tensor is smallest (greedy), which keeps desk-scale networks
cheap; the value is order-independent. The gradient of a contraction with
respect to one parameter tensor is the contraction of the network with that
node removed (its environment), combined with the upstream cotangent;
instances sharing a symbol sum their gradients.
"""
from __future__ import annotations

import numpy as np

from .ansatz import Node, Symbol, TensorNetwork
from .params import ParameterStore


class ShapeMismatch(Exception):
    """Stored value shape disagrees with the network's node shape."""


def _copy_tensor(shape: tuple[int, ...]) -> np.ndarray:
    """Generalized Kronecker delta: 1 iff all indices equal."""
    if not shape:
        return np.asarray(1.0)
    d = shape[0]
    arr = np.zeros(shape)
    idx = tuple(np.arange(d) for _ in shape)
    arr[idx] = 1.0
    return arr


def _node_tensor(node: Node, ps: ParameterStore) -> np.ndarray:
    if node.kind == "param":
        value = np.asarray(ps[node.symbol.name], dtype=float)
        if value.shape != node.shape:
            raise ShapeMismatch(
                f"{node.symbol.name}: stored {value.shape}, "
                f"network wants {node.shape}")
        return value
    if node.kind == "delta":
        return np.eye(node.shape[0])
    return _copy_tensor(node.shape)


class _Block:
    """A partially contracted tensor labelled by the legs it still carries."""

    __slots__ = ("tensor", "legs")

    def __init__(self, tensor: np.ndarray, legs: list):
        self.tensor = tensor
        self.legs = legs


def _contract_blocks(blocks: list[_Block],
                     edges: list[tuple]) -> _Block:
    """Contract all edges; disconnected pieces combine by outer product."""
    # resolve self-edges first: trace out both legs of one block
    def leg_owner(leg):
        for bi, blk in enumerate(blocks):
            if leg in blk.legs:
                return bi
        raise ShapeMismatch(f"edge endpoint {leg} not found")

    pending = list(edges)
    while pending:
        # group edges by the (unordered) block pair they connect
        by_pair: dict[tuple[int, int], list] = {}
        for edge in pending:
            a, b = leg_owner(edge[0]), leg_owner(edge[1])
            key = (min(a, b), max(a, b))
            by_pair.setdefault(key, []).append(edge)

        self_pairs = [p for p in by_pair if p[0] == p[1]]
        if self_pairs:
            bi = self_pairs[0][0]
            edge = by_pair[self_pairs[0]][0]
            blk = blocks[bi]
            i, j = blk.legs.index(edge[0]), blk.legs.index(edge[1])
            blk.tensor = np.trace(blk.tensor, axis1=i, axis2=j)
            blk.legs = [l for k, l in enumerate(blk.legs) if k not in (i, j)]
            pending.remove(edge)
            continue

        # greedy: smallest resulting tensor first
        def merged_size(pair):
            a, b = pair
            return blocks[a].tensor.size * blocks[b].tensor.size

        pair = min(by_pair, key=merged_size)
        a, b = pair
        joins = by_pair[pair]
        ax_a = [blocks[a].legs.index(e[0] if e[0] in blocks[a].legs else e[1])
                for e in joins]
        ax_b = [blocks[b].legs.index(e[1] if e[1] in blocks[b].legs else e[0])
                for e in joins]
        merged = np.tensordot(blocks[a].tensor, blocks[b].tensor,
                              axes=(ax_a, ax_b))
        legs = ([l for i, l in enumerate(blocks[a].legs) if i not in ax_a]
                + [l for i, l in enumerate(blocks[b].legs) if i not in ax_b])
        keep = [blk for i, blk in enumerate(blocks) if i not in (a, b)]
        blocks = keep + [_Block(merged, legs)]
        pending = [e for e in pending if e not in joins]

    # outer-product the disconnected remainder
    result = blocks[0]
    for blk in blocks[1:]:
        result = _Block(np.tensordot(result.tensor, blk.tensor, axes=0),
                        result.legs + blk.legs)
    return result


def _evaluate(tn: TensorNetwork, ps: ParameterStore,
              skip: str | None = None) -> _Block:
    blocks = []
    extra_open: list = []
    for node in tn.nodes:
        if node.node_id == skip:
            extra_open = [(node.node_id, i) for i in range(len(node.shape))]
            continue
        tensor = _node_tensor(node, ps)
        legs = [(node.node_id, i) for i in range(len(node.shape))]
        blocks.append(_Block(tensor, legs))
    if not blocks:
        return _Block(np.asarray(1.0), [])
    edges = [e for e in tn.edges
             if skip is None or (e[0][0] != skip and e[1][0] != skip)]
    # edges touching the skipped node leave their far endpoint open
    return _contract_blocks(blocks, edges)


def _arrange(block: _Block, wanted: list) -> np.ndarray:
    if not wanted:
        return block.tensor
    perm = [block.legs.index(leg) for leg in wanted]
    return np.transpose(block.tensor, perm)


def contract(tn: TensorNetwork, ps: ParameterStore) -> np.ndarray:
    """Exact value of the network over its open legs (scalar if none)."""
    block = _evaluate(tn, ps)
    return _arrange(block, list(tn.open_legs))


def _expand_self_edges(tn: TensorNetwork) -> TensorNetwork:
    """Reroute edges joining two legs of one node through identity nodes."""
    selfs = [e for e in tn.edges if e[0][0] == e[1][0]]
    if not selfs:
        return tn
    nodes = list(tn.nodes)
    edges = [e for e in tn.edges if e[0][0] != e[1][0]]
    for k, (a, b) in enumerate(selfs):
        dim = tn.leg_dim(a)
        nid = f"selfloop{k}"
        nodes.append(Node(nid, "delta", (dim, dim)))
        edges.append((a, (nid, 0)))
        edges.append((b, (nid, 1)))
    return TensorNetwork(tuple(nodes), tuple(edges), tn.open_legs)


def contract_grad(tn: TensorNetwork, ps: ParameterStore,
                  upstream: np.ndarray) -> np.ndarray:
    """Gradient of sum(contract(tn) * upstream) in ps's flat layout."""
    tn = _expand_self_edges(tn)
    upstream = np.asarray(upstream, dtype=float)
    open_dims = tuple(tn.leg_dim(leg) for leg in tn.open_legs)
    if upstream.shape != open_dims:
        raise ShapeMismatch(
            f"upstream cotangent {upstream.shape} vs open legs {open_dims}")

    grads = {name: np.zeros_like(np.asarray(ps[name], dtype=float))
             for name in _param_names(tn)}
    for node in tn.nodes:
        if node.kind != "param":
            continue
        env_block = _evaluate(tn, ps, skip=node.node_id)
        node_legs = [(node.node_id, i) for i in range(len(node.shape))]
        # environment legs: the removed node's slots, then the open legs;
        # an edge from the removed node to leg L leaves L open in the block
        partner = {}
        for a, b in tn.edges:
            if a[0] == node.node_id:
                partner[a] = b
            elif b[0] == node.node_id:
                partner[b] = a
        wanted = []
        for leg in node_legs:
            if leg in partner:
                wanted.append(partner[leg])
            elif leg in tn.open_legs:
                wanted.append(None)  # handled below
            else:
                raise ShapeMismatch(f"dangling leg {leg}")
        open_positions = [i for i, w in enumerate(wanted) if w is None]
        env_wanted = [w for w in wanted if w is not None] + [
            leg for leg in tn.open_legs if leg[0] != node.node_id]
        env = _arrange(env_block, env_wanted)

        # contract the environment with the upstream over the open legs
        up_axes = []
        kept_open = [leg for leg in tn.open_legs if leg[0] != node.node_id]
        n_before = len(wanted) - len(open_positions)
        up_perm = []
        for leg in kept_open:
            up_perm.append(tn.open_legs.index(leg))
        own_open_perm = [tn.open_legs.index((node.node_id, i))
                         for i in open_positions]
        up = np.transpose(upstream, up_perm + own_open_perm) \
            if upstream.ndim else upstream
        if kept_open:
            g = np.tensordot(
                env, up, axes=(list(range(n_before, n_before + len(kept_open))),
                               list(range(len(kept_open)))))
        else:
            g = env * up if up.ndim == 0 else np.tensordot(env, up, axes=0)
        # g axes: the partnered slots in wanted-order, then the node's own
        # open slots (from upstream); restore the node's slot order
        slot_order = [i for i, w in enumerate(wanted) if w is not None] + \
            open_positions
        restore = [slot_order.index(i) for i in range(len(wanted))]
        g = np.transpose(g, restore) if len(wanted) else g
        grads[node.symbol.name] = grads[node.symbol.name] + g

    flat = []
    for name, shape, _ in ps.layout:
        if name in grads:
            flat.append(grads[name].ravel())
        else:
            n = int(np.prod(shape)) if shape else 1
            flat.append(np.zeros(n))
    return np.concatenate(flat) if flat else np.zeros(0)


def _param_names(tn: TensorNetwork) -> list[str]:
    out = []
    for node in tn.nodes:
        if node.kind == "param" and node.symbol.name not in out:
            out.append(node.symbol.name)
    return out
