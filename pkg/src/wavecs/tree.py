"""Closed wavelet trees and their complexity quantities.

Trees live on the wavelet coefficients of a full-depth decomposition. The
scaling coefficient plays the role of the root marker: it is the parent of
every coarsest-level wavelet and is implicitly present in every closed tree.
When a tree is *counted* for ``K(T)`` or ``K_T(s)`` the root is included with
weight ``2**0 = 1`` so that a tree of ``s`` nodes holds ``s - 1`` wavelets.
The squared uniform norm of a level-``j`` atom is ``2**(j*d)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
import io
from typing import Iterable, Iterator

import numpy as np

from .dwt import MultiIndex
from .errors import DomainError, ParameterError, ResourceError

# exhaustive enumeration limits (d = 1)
EXHAUSTIVE_MAX_J = 7
EXHAUSTIVE_MAX_S = 12


def root_index(d: int = 1) -> MultiIndex:
    """The scaling coefficient that roots every wavelet tree."""
    return MultiIndex("scaling", 0, (0,) * d, 0)


def parent(nu: MultiIndex, coarsest_level: int = 0) -> MultiIndex:
    """Parent of a wavelet index; coarsest-level wavelets map to the root marker."""
    if nu.is_scaling:
        raise DomainError("parents are defined on wavelet indices only")
    if nu.level <= coarsest_level:
        return MultiIndex("scaling", coarsest_level, nu.shift, 0)
    return MultiIndex("wavelet", nu.level - 1, tuple(k // 2 for k in nu.shift), nu.band)


def children(nu: MultiIndex, J: int) -> list[MultiIndex]:
    """Children of ``nu`` inside a tree of depth ``J`` (empty on the finest level)."""
    d = nu.d
    if nu.is_scaling:
        if nu.level != 0:
            raise DomainError("only the level-0 scaling root has tree children")
        if d == 1:
            return [MultiIndex("wavelet", 0, (0,), 1)]
        return [MultiIndex("wavelet", 0, (0,) * d, b) for b in range(1, 2**d)]
    if nu.level + 1 >= J:
        return []
    j = nu.level + 1
    if d == 1:
        k = nu.shift[0]
        return [MultiIndex("wavelet", j, (2 * k,), 1), MultiIndex("wavelet", j, (2 * k + 1,), 1)]
    k1, k2 = nu.shift
    return [
        MultiIndex("wavelet", j, (2 * k1 + a, 2 * k2 + b), nu.band) for a in (0, 1) for b in (0, 1)
    ]


def is_closed_tree(nodes: Iterable[MultiIndex]) -> bool:
    """True iff every node's parent chain lies in ``nodes`` (the root is implicit)."""
    node_set = set(nodes)
    for nu in node_set:
        if nu.is_scaling:
            if nu.level != 0 or any(nu.shift):
                return False
            continue
        p = parent(nu)
        if not p.is_scaling and p not in node_set:
            return False
    return True


def k_of_set(nodes: Iterable[MultiIndex], d: int | None = None) -> float:
    """``K(T)``: sum of squared uniform norms ``2**(j*d)`` over ``nodes``."""
    total = 0
    for nu in nodes:
        dd = nu.d if d is None else d
        total += 2 ** (nu.level * dd)
    return float(total)


@dataclass(frozen=True)
class ClosedTree:
    """Closed set of wavelet indices in a depth-``J`` tree of arity ``2**d``."""

    nodes: frozenset
    J: int
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        if any(nu.is_scaling for nu in self.nodes):
            raise ParameterError("ClosedTree holds wavelet indices; the scaling root is implicit")
        if any(nu.level >= self.J or nu.d != self.d for nu in self.nodes):
            raise ParameterError("node outside the depth-J tree")
        if not is_closed_tree(self.nodes):
            raise ParameterError("node set is not closed under the parent map")

    @property
    def arity(self) -> int:
        return 2**self.d

    @property
    def size(self) -> int:
        return len(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, nu) -> bool:
        return nu in self.nodes

    def sorted_nodes(self) -> list[MultiIndex]:
        return sorted(self.nodes, key=lambda nu: (nu.level, nu.band, nu.shift))


def _coarsest_nodes(d: int) -> list[MultiIndex]:
    return children(root_index(d), J=1)


def random_closed_tree(s: int, J: int, d: int = 1, rng_seed=None) -> ClosedTree:
    """Grow a closed tree of ``s`` wavelet nodes by uniform frontier sampling."""
    capacity = 2 ** (d * J) - 1
    if not 1 <= s <= capacity:
        raise ParameterError(f"s = {s} outside [1, {capacity}] for J = {J}, d = {d}")
    rng = np.random.default_rng(rng_seed)
    frontier = _coarsest_nodes(d)
    nodes = []
    while len(nodes) < s:
        nu = frontier.pop(int(rng.integers(len(frontier))))
        nodes.append(nu)
        frontier.extend(children(nu, J))
    return ClosedTree(frozenset(nodes), J, d)


def full_tree(J: int, d: int = 1) -> ClosedTree:
    nodes = []
    frontier = _coarsest_nodes(d)
    while frontier:
        nu = frontier.pop()
        nodes.append(nu)
        frontier.extend(children(nu, J))
    return ClosedTree(frozenset(nodes), J, d)


def theta_squared(J: int, d: int = 1) -> int:
    """Largest squared uniform norm over a depth-``J`` system, ``2**(d*(J-1))``."""
    return 2 ** (d * (J - 1))


def ratio_bound(J: int, d: int = 1) -> float:
    """Upper bound on ``K_T(s) / (Theta**2 s)``."""
    q = 2 ** (2 * d * (J - 1))
    return float(Fraction(2**d * q + 1, (2**d + 1) * q))


# ---------------------------------------------------------------------------
# K_T(s)


def enumerate_closed_trees(max_nodes: int, J: int, d: int = 1) -> Iterator[tuple]:
    """Yield every closed wavelet tree with at most ``max_nodes`` nodes (empty included).

    Each tree is produced exactly once: a node is either taken from the
    frontier, or skipped and never offered again on that branch.
    """

    def rec(frontier, chosen):
        yield tuple(chosen)
        if len(chosen) == max_nodes:
            return
        for i, nu in enumerate(frontier):
            chosen.append(nu)
            yield from rec(frontier[i + 1 :] + children(nu, J), chosen)
            chosen.pop()

    yield from rec(_coarsest_nodes(d), [])


def _check_exhaustive(s: int, J: int, d: int):
    if d != 1 or J > EXHAUSTIVE_MAX_J or s > EXHAUSTIVE_MAX_S:
        raise ResourceError(
            f"exhaustive enumeration is limited to d = 1, J <= {EXHAUSTIVE_MAX_J}, "
            f"s <= {EXHAUSTIVE_MAX_S} (got d = {d}, J = {J}, s = {s})"
        )


def _exhaustive_table(s_max: int, J: int, d: int) -> list[int]:
    best = [0] * (s_max + 1)
    for tree in enumerate_closed_trees(s_max - 1, J, d):
        n = len(tree) + 1
        k = 1 + sum(2 ** (nu.level * d) for nu in tree)
        if k > best[n]:
            best[n] = k
    for n in range(2, s_max + 1):
        best[n] = max(best[n], best[n - 1])
    return best


def _exact_table(s_max: int, J: int, d: int) -> list[int]:
    # all nodes on a level are interchangeable, so a level-wise max-plus knapsack is exact
    neg = -1
    arity = 2**d
    below = None  # best[k] for a subtree rooted one level deeper, k = 0..s_max
    for j in range(J - 1, -1, -1):
        cur = [neg] * (s_max + 1)
        cur[0] = 0
        if below is None:
            if s_max >= 1:
                cur[1] = 2 ** (j * d)
        else:
            pool = [0] + [neg] * s_max
            for _ in range(arity):
                pool = _maxplus(pool, below, s_max)
            for k in range(1, s_max + 1):
                if pool[k - 1] >= 0:
                    cur[k] = 2 ** (j * d) + pool[k - 1]
        below = cur
    roots = [0] + [neg] * s_max
    for _ in range(arity - 1):
        roots = _maxplus(roots, below, s_max)
    table = [0] * (s_max + 1)
    for n in range(1, s_max + 1):
        table[n] = 1 + max(v for v in roots[:n] if v >= 0)
    return table


def _maxplus(a, b, cap):
    out = [-1] * (cap + 1)
    for i, ai in enumerate(a):
        if ai < 0:
            continue
        for k, bk in enumerate(b[: cap + 1 - i]):
            if bk >= 0 and ai + bk > out[i + k]:
                out[i + k] = ai + bk
    return out


def _greedy_table(s_max: int, J: int, d: int) -> list[int]:
    table = [0] * (s_max + 1)
    frontier = _coarsest_nodes(d)
    total = 1
    if s_max >= 1:
        table[1] = 1
    for n in range(2, s_max + 1):
        if frontier:
            i = max(range(len(frontier)), key=lambda t: (frontier[t].level, -t))
            nu = frontier.pop(i)
            total += 2 ** (nu.level * d)
            frontier.extend(children(nu, J))
        table[n] = total
    return table


def k_tree_table(s_max: int, J: int, d: int = 1, mode: str = "exhaustive") -> list[int]:
    """``[K_T(0), K_T(1), ..., K_T(s_max)]`` with the root counted as a node.

    ``mode`` is ``exhaustive`` (enumerates every closed tree), ``exact``
    (level-wise dynamic programme, any size) or ``greedy`` (always takes the
    deepest frontier node; a lower bound only).
    """
    if s_max < 1:
        raise ParameterError("s must be at least 1")
    capacity = 2 ** (d * J)
    if s_max > capacity:
        raise ParameterError(f"s = {s_max} exceeds the {capacity} nodes of the tree")
    if mode == "exhaustive":
        _check_exhaustive(s_max, J, d)
        return _exhaustive_table(s_max, J, d)
    if mode == "exact":
        return _exact_table(s_max, J, d)
    if mode == "greedy":
        return _greedy_table(s_max, J, d)
    raise ParameterError(f"unknown mode {mode!r}")


def k_tree_sup(s: int, J: int, d: int = 1, mode: str = "exhaustive") -> float:
    """``K_T(s)``, the largest ``K(T)`` over closed trees of at most ``s`` nodes."""
    return float(k_tree_table(s, J, d, mode)[s])


@dataclass(frozen=True)
class TreeComplexity:
    k_of_t: float
    k_tree_s: float
    theta_sq_s: float
    lower_bound_only: bool = False

    @property
    def ratio(self) -> float:
        return self.k_tree_s / self.theta_sq_s


def tree_complexity(tree: ClosedTree, mode: str = "exact") -> TreeComplexity:
    """Complexity figures for ``tree`` with the root counted (``s = |T| + 1``)."""
    s = tree.size + 1
    k_t = 1.0 + k_of_set(tree.nodes, tree.d)
    k_s = k_tree_sup(s, tree.J, tree.d, mode)
    return TreeComplexity(k_t, k_s, float(theta_squared(tree.J, tree.d) * s), mode == "greedy")


# ---------------------------------------------------------------------------
# inequality report


@dataclass
class InequalityRow:
    s: int
    k_tree: int
    theta_sq_s: int
    ratio: float
    bound: float
    k_tree_3s: int | None
    pass_theta: bool
    pass_triple: bool | None
    pass_ratio: bool


@dataclass
class InequalityReport:
    J: int
    d: int
    s_max: int
    mode: str
    rows: list = field(default_factory=list)
    k_tree_jp1: int | None = None

    @property
    def chain_identity(self) -> bool | None:
        """``K_T(J + 1) == 2**J`` (only checked when ``J + 1`` is in range)."""
        if self.k_tree_jp1 is None:
            return None
        return self.k_tree_jp1 == 2 ** (self.d * self.J) if self.d == 1 else None

    @property
    def all_pass(self) -> bool:
        ok = all(r.pass_theta and r.pass_ratio and r.pass_triple is not False for r in self.rows)
        return ok and self.chain_identity is not False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "K_T(s)", "theta2_s", "ratio", "bound", "K_T(3s)",
                    "pass_theta", "pass_triple", "pass_ratio"])
        flag = lambda b: "" if b is None else ("true" if b else "false")
        for r in self.rows:
            w.writerow([r.s, r.k_tree, r.theta_sq_s, repr(r.ratio), repr(r.bound),
                        "" if r.k_tree_3s is None else r.k_tree_3s,
                        flag(r.pass_theta), flag(r.pass_triple), flag(r.pass_ratio)])
        return buf.getvalue()


def verify_inequalities(J: int, d: int = 1, s_max: int = 12, mode: str = "exhaustive") -> InequalityReport:
    """Check ``K_T(s) <= Theta^2 s``, ``K_T(3s) >= 3 K_T(s)`` and the ratio bound.

    The tripling inequality is evaluated for every ``s`` with ``3s <= s_max``;
    the other two for ``s = 2..s_max``. ``s_max`` is clipped to the number
    of nodes in the tree.
    """
    s_max = min(s_max, 2 ** (d * J))
    if s_max < 2:
        raise ParameterError("s_max must be at least 2")
    table = k_tree_table(s_max, J, d, mode)
    th2 = theta_squared(J, d)
    bound = ratio_bound(J, d)
    report = InequalityReport(J, d, s_max, mode)
    for s in range(2, s_max + 1):
        k = table[s]
        ratio = k / (th2 * s)
        k3 = table[3 * s] if 3 * s <= s_max else None
        report.rows.append(
            InequalityRow(
                s=s,
                k_tree=k,
                theta_sq_s=th2 * s,
                ratio=ratio,
                bound=bound,
                k_tree_3s=k3,
                pass_theta=k <= th2 * s,
                pass_triple=None if k3 is None else k3 >= 3 * k,
                pass_ratio=Fraction(k, th2 * s) <= Fraction(2**d * th2**2 + 1, (2**d + 1) * th2**2),
            )
        )
    if J + 1 <= s_max:
        report.k_tree_jp1 = table[J + 1]
    return report
