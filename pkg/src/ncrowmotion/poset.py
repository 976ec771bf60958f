"""Finite posets given by their cover relations, and the families we study.

Elements are dense integer ids ``0..n-1`` with display names.  The strict
order is kept as one bitset per element (``above[x]`` has bit ``y`` set iff
``x < y``), which makes comparability queries O(1).
"""
from __future__ import annotations

import heapq
import itertools
import json
import re
from functools import cached_property
from typing import Iterable, Optional, Sequence

from .algebra import StructureError
from .rng import SplitMix64

MAX_ELEMENTS = 10_000

__all__ = [
    "Poset",
    "ExtendedPoset",
    "MAX_ELEMENTS",
    "rectangle",
    "triangle_delta",
    "triangle_nabla",
    "triangle_right",
    "trapezoid",
    "claw",
    "chain",
    "antichain",
    "from_covers",
    "random_poset",
    "enumerate_posets",
    "antipode",
    "parse_poset_spec",
]


class Poset:
    """An immutable finite poset.

    ``up_covers[x]`` lists the ids covering ``x``; ``down_covers[x]`` those
    covered by ``x``.  Both are sorted.  Family constructors set ``coords``
    (one ``(i, j)`` pair per element), ``family`` and ``params``.
    """

    def __init__(
        self,
        names: Sequence[str],
        up_covers: Sequence[Sequence[int]],
        *,
        coords: Optional[Sequence[tuple]] = None,
        family: Optional[str] = None,
        params: tuple = (),
    ):
        n = len(names)
        if n > MAX_ELEMENTS:
            raise StructureError(f"poset too large ({n} > {MAX_ELEMENTS} elements)")
        if len(set(names)) != n:
            raise StructureError("duplicate element names")
        if any(name in ("BOT", "TOP") for name in names):
            raise StructureError("BOT and TOP are reserved names")
        self.names = tuple(names)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.up_covers = tuple(tuple(sorted(set(ups))) for ups in up_covers)
        down = [[] for _ in range(n)]
        for x, ups in enumerate(self.up_covers):
            for y in ups:
                down[y].append(x)
        self.down_covers = tuple(tuple(sorted(d)) for d in down)
        self.coords = tuple(coords) if coords is not None else None
        self.coord_index = (
            {c: i for i, c in enumerate(self.coords)} if self.coords is not None else None
        )
        self.family = family
        self.params = tuple(params)
        self._order = _topological_order(n, self.up_covers)
        if self._order is None:
            raise StructureError("cover relation has a cycle")
        self.above = _strict_upsets(n, self.up_covers, self._order)

    def __len__(self):
        return len(self.names)

    def __repr__(self):
        tag = f"{self.family}{self.params}" if self.family else f"{len(self)} elements"
        return f"Poset({tag})"

    @property
    def n(self) -> int:
        return len(self.names)

    @property
    def spec(self) -> Optional[str]:
        """The CLI spec string that rebuilds this poset, if it is a family member."""
        if self.family == "rect":
            return f"rect:{self.params[0]}x{self.params[1]}"
        if self.family in ("delta", "nabla", "tria"):
            return f"{self.family}:{self.params[0]}"
        if self.family == "trap":
            return f"trap:{self.params[0]},{self.params[1]}"
        if self.family == "claw":
            return "claw"
        if self.family in ("chain", "antichain"):
            return f"{self.family}:{self.params[0]}"
        if self.family == "random" and len(self.params) == 2:
            return f"random:{self.params[0]},{self.params[1]}"
        return None

    def less(self, x: int, y: int) -> bool:
        return bool((self.above[x] >> y) & 1)

    def leq(self, x: int, y: int) -> bool:
        return x == y or self.less(x, y)

    def comparable(self, x: int, y: int) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    def covers(self) -> list:
        """All pairs ``(x, y)`` with ``x`` covered by ``y``."""
        return [(x, y) for x in range(self.n) for y in self.up_covers[x]]

    def minimal_elements(self) -> list:
        return [x for x in range(self.n) if not self.down_covers[x]]

    def maximal_elements(self) -> list:
        return [x for x in range(self.n) if not self.up_covers[x]]

    def element(self, key) -> int:
        """Resolve a name, an ``(i, j)`` coordinate, or an id to an id."""
        if isinstance(key, int):
            if not 0 <= key < self.n:
                raise StructureError(f"no element with id {key}")
            return key
        if isinstance(key, tuple) and self.coord_index is not None:
            if key not in self.coord_index:
                raise StructureError(f"no element at {key}")
            return self.coord_index[key]
        if isinstance(key, str) and key in self.index:
            return self.index[key]
        raise StructureError(f"unknown element {key!r}")

    # -- linear extensions ------------------------------------------------

    def is_linear_extension(self, seq: Sequence[int]) -> bool:
        if sorted(seq) != list(range(self.n)):
            return False
        pos = {v: i for i, v in enumerate(seq)}
        return all(pos[x] < pos[y] for x, y in self.covers())

    def linear_extension(self) -> tuple:
        """Kahn's algorithm, breaking ties by smallest name."""
        indeg = [len(d) for d in self.down_covers]
        heap = [(self.names[x], x) for x in range(self.n) if indeg[x] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            _, x = heapq.heappop(heap)
            out.append(x)
            for y in self.up_covers[x]:
                indeg[y] -= 1
                if indeg[y] == 0:
                    heapq.heappush(heap, (self.names[y], y))
        return tuple(out)

    @cached_property
    def canonical_extension(self) -> tuple:
        return self.linear_extension()

    def all_linear_extensions(self, cap: int = 100_000) -> tuple:
        """Every linear extension, up to ``cap`` of them.

        Returns ``(extensions, truncated)``.
        """
        n = self.n
        indeg = [len(d) for d in self.down_covers]
        out: list = []
        prefix: list = []
        truncated = False

        def rec():
            nonlocal truncated
            if truncated:
                return
            if len(prefix) == n:
                if len(out) >= cap:
                    truncated = True
                    return
                out.append(tuple(prefix))
                return
            for x in range(n):
                if indeg[x] == 0:
                    indeg[x] = -1
                    prefix.append(x)
                    for y in self.up_covers[x]:
                        indeg[y] -= 1
                    rec()
                    for y in self.up_covers[x]:
                        indeg[y] += 1
                    prefix.pop()
                    indeg[x] = 0

        rec()
        return out, truncated

    # -- extension and serialization -------------------------------------

    @cached_property
    def extended(self) -> "ExtendedPoset":
        return ExtendedPoset(self)

    def to_json(self) -> dict:
        return {
            "elements": list(self.names),
            "covers": [[self.names[x], self.names[y]] for x, y in self.covers()],
        }

    @classmethod
    def from_json(cls, obj) -> "Poset":
        if not isinstance(obj, dict) or "elements" not in obj or "covers" not in obj:
            raise StructureError("poset JSON needs 'elements' and 'covers'")
        for pair in obj["covers"]:
            if not (isinstance(pair, list) and len(pair) == 2):
                raise StructureError(f"bad cover pair {pair!r}")
        return from_covers(obj["elements"], [tuple(p) for p in obj["covers"]])


class ExtendedPoset:
    """``P`` with an adjoined bottom ``bot = n`` and top ``top = n + 1``.

    ``lower[v]`` / ``upper[v]`` are the cover neighbours of ``v`` inside the
    extended poset, so sums over them are exactly the sums used by toggles.
    """

    def __init__(self, base: Poset):
        n = base.n
        self.base = base
        self.bot = n
        self.top = n + 1
        self.size = n + 2
        mins = base.minimal_elements()
        maxs = base.maximal_elements()
        lower = [list(d) if d else [self.bot] for d in base.down_covers]
        upper = [list(u) if u else [self.top] for u in base.up_covers]
        lower.append([])
        upper.append(list(mins) if n else [self.top])
        lower.append(list(maxs) if n else [self.bot])
        upper.append([])
        self.lower = tuple(tuple(x) for x in lower)
        self.upper = tuple(tuple(x) for x in upper)

    def __len__(self):
        return self.size

    def is_sentinel(self, v: int) -> bool:
        return v >= self.bot

    def name(self, v: int) -> str:
        if v == self.bot:
            return "BOT"
        if v == self.top:
            return "TOP"
        return self.base.names[v]

    def element(self, key) -> int:
        if key in ("BOT", "TOP"):
            return self.bot if key == "BOT" else self.top
        return self.base.element(key)

    def leq(self, x: int, y: int) -> bool:
        if x == y or x == self.bot or y == self.top:
            return True
        if x == self.top or y == self.bot:
            return False
        return self.base.less(x, y)

    def elements(self) -> range:
        return range(self.size)


# ---------------------------------------------------------------------------
# helpers


def _topological_order(n: int, up: Sequence[Sequence[int]]) -> Optional[list]:
    indeg = [0] * n
    for ups in up:
        for y in ups:
            indeg[y] += 1
    stack = [x for x in range(n) if indeg[x] == 0]
    order = []
    while stack:
        x = stack.pop()
        order.append(x)
        for y in up[x]:
            indeg[y] -= 1
            if indeg[y] == 0:
                stack.append(y)
    return order if len(order) == n else None


def _strict_upsets(n: int, up: Sequence[Sequence[int]], order: list) -> tuple:
    above = [0] * n
    for x in reversed(order):
        acc = 0
        for y in up[x]:
            acc |= (1 << y) | above[y]
        above[x] = acc
    return tuple(above)


def _reduce(n: int, edges: Iterable[tuple]) -> list:
    """Transitive reduction of a DAG on ``0..n-1``; raises on cycles."""
    up = [set() for _ in range(n)]
    for x, y in edges:
        if x == y:
            raise StructureError("cover relation has a cycle")
        up[x].add(y)
    order = _topological_order(n, up)
    if order is None:
        raise StructureError("cover relation has a cycle")
    above = _strict_upsets(n, up, order)
    reduced = []
    for x in range(n):
        # y is redundant if it lies strictly above another successor of x
        via = 0
        for z in up[x]:
            via |= above[z]
        reduced.append(sorted(y for y in up[x] if not (via >> y) & 1))
    return reduced


def _grid_subposet(cells: list, family: str, params: tuple) -> Poset:
    """Induced subposet of the product order on a set of (i, j) cells."""
    cells = sorted(cells)
    idx = {c: k for k, c in enumerate(cells)}
    edges = []
    for (i, j), k in idx.items():
        for (i2, j2), k2 in idx.items():
            if (i, j) != (i2, j2) and i <= i2 and j <= j2:
                edges.append((k, k2))
    up = _reduce(len(cells), edges)
    names = [f"({i},{j})" for i, j in cells]
    return Poset(names, up, coords=cells, family=family, params=params)


def _require_positive(**kw):
    for k, v in kw.items():
        if not isinstance(v, int) or v < 1:
            raise StructureError(f"{k} must be a positive integer, got {v!r}")


# ---------------------------------------------------------------------------
# constructors


def rectangle(p: int, q: int) -> Poset:
    """The product of chains ``[p] x [q]`` with names ``"(i,j)"``."""
    _require_positive(p=p, q=q)
    if p * q > MAX_ELEMENTS:
        raise StructureError(f"poset too large ({p * q} > {MAX_ELEMENTS} elements)")
    cells = [(i, j) for i in range(1, p + 1) for j in range(1, q + 1)]
    idx = {c: k for k, c in enumerate(cells)}
    up = []
    for i, j in cells:
        up.append([idx[c] for c in ((i + 1, j), (i, j + 1)) if c in idx])
    names = [f"({i},{j})" for i, j in cells]
    return Poset(names, up, coords=cells, family="rect", params=(p, q))


def triangle_delta(p: int) -> Poset:
    _require_positive(p=p)
    cells = [(i, k) for i in range(1, p + 1) for k in range(1, p + 1) if i + k > p + 1]
    return _grid_subposet(cells, "delta", (p,))


def triangle_nabla(p: int) -> Poset:
    _require_positive(p=p)
    cells = [(i, k) for i in range(1, p + 1) for k in range(1, p + 1) if i + k < p + 1]
    return _grid_subposet(cells, "nabla", (p,))


def triangle_right(p: int) -> Poset:
    _require_positive(p=p)
    cells = [(i, k) for i in range(1, p + 1) for k in range(1, p + 1) if i <= k]
    return _grid_subposet(cells, "tria", (p,))


def trapezoid(p: int, s: int) -> Poset:
    if not isinstance(p, int) or p <= 1:
        raise StructureError(f"trapezoid needs p > 1, got {p!r}")
    if not isinstance(s, int) or s < 0:
        raise StructureError(f"trapezoid needs s >= 0, got {s!r}")
    cells = [
        (i, k)
        for i in range(1, p + 1)
        for k in range(1, p + 1)
        if i + k > p + 1 and i <= k and k >= s
    ]
    return _grid_subposet(cells, "trap", (p, s))


def claw() -> Poset:
    """One minimum ``p`` below three incomparable maxima ``q1, q2, q3``."""
    return Poset(["p", "q1", "q2", "q3"], [[1, 2, 3], [], [], []], family="claw")


def chain(n: int) -> Poset:
    names = [f"c{k}" for k in range(n)]
    return Poset(names, [[k + 1] if k + 1 < n else [] for k in range(n)], family="chain", params=(n,))


def antichain(n: int) -> Poset:
    return Poset([f"a{k}" for k in range(n)], [[] for _ in range(n)], family="antichain", params=(n,))


def from_covers(names: Sequence[str], cover_pairs: Iterable[tuple]) -> Poset:
    """Build a poset from (possibly redundant) pairs ``x < y``.

    The relation is transitively reduced; cycles and duplicate names are
    rejected.
    """
    names = list(names)
    if len(set(names)) != len(names):
        raise StructureError("duplicate element names")
    idx = {name: k for k, name in enumerate(names)}
    edges = []
    for x, y in cover_pairs:
        if x not in idx or y not in idx:
            raise StructureError(f"unknown element in pair ({x!r}, {y!r})")
        edges.append((idx[x], idx[y]))
    return Poset(names, _reduce(len(names), edges))


def random_poset(n: int, seed: int, density: float = 0.35) -> Poset:
    """A random naturally labelled poset: ``i < j`` is drawn for ``i < j``."""
    rng = SplitMix64(seed)
    names = [f"x{k}" for k in range(n)]
    pairs = [
        (names[i], names[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < density
    ]
    shape = from_covers(names, pairs)
    params = (n, seed) if density == 0.35 else (n, seed, density)
    return Poset(shape.names, shape.up_covers, family="random", params=params)


def _canonical_key(n: int, below: list) -> tuple:
    """An isomorphism invariant that is also complete: the smallest encoding
    of the strict order over relabelings that sort by (down-set, up-set) size."""
    above = [0] * n
    for y in range(n):
        for x in range(n):
            if below[y] >> x & 1:
                above[x] |= 1 << y
    inv = [(bin(below[v]).count("1"), bin(above[v]).count("1")) for v in range(n)]
    groups: dict = {}
    for v in sorted(range(n), key=lambda v: inv[v]):
        groups.setdefault(inv[v], []).append(v)
    classes = [groups[k] for k in sorted(groups)]
    best = None
    for choice in itertools.product(*(itertools.permutations(c) for c in classes)):
        order = [v for part in choice for v in part]
        pos = {v: i for i, v in enumerate(order)}
        key = tuple(sorted((pos[x], pos[y]) for y in range(n) for x in range(n) if below[y] >> x & 1))
        if best is None or key < best:
            best = key
    return (tuple(sorted(inv)), best)


def enumerate_posets(n: int) -> list:
    """One representative of every isomorphism class of n-element posets.

    Classes on n elements arise from classes on n-1 elements by adding a new
    maximal element whose strict down-set is any order ideal.
    """
    if n < 0:
        raise StructureError("n must be nonnegative")
    level = {(): []}  # key -> strict down-set bitmasks
    for m in range(n):
        nxt: dict = {}
        for below in level.values():
            ideals = [
                mask for mask in range(1 << m)
                if all(below[x] & ~mask == 0 for x in range(m) if mask >> x & 1)
            ]
            for ideal in ideals:
                cand = below + [ideal]
                key = _canonical_key(m + 1, cand)
                if key not in nxt:
                    nxt[key] = cand
        level = nxt
    out = []
    for k, below in enumerate(sorted(level.values())):
        names = [f"e{i}" for i in range(n)]
        pairs = [(names[x], names[y]) for y in range(n) for x in range(n) if below[y] >> x & 1]
        out.append(from_covers(names, pairs))
    return out


def antipode(p: int, q: int, x: tuple) -> tuple:
    i, j = x
    if not (1 <= i <= p and 1 <= j <= q):
        raise StructureError(f"{x} is not in [{p}]x[{q}]")
    return (p + 1 - i, q + 1 - j)


_SPEC_PATTERNS = [
    (re.compile(r"rect:(\d+)x(\d+)"), lambda m: rectangle(int(m[1]), int(m[2]))),
    (re.compile(r"delta:(\d+)"), lambda m: triangle_delta(int(m[1]))),
    (re.compile(r"nabla:(\d+)"), lambda m: triangle_nabla(int(m[1]))),
    (re.compile(r"tria:(\d+)"), lambda m: triangle_right(int(m[1]))),
    (re.compile(r"trap:(\d+),(\d+)"), lambda m: trapezoid(int(m[1]), int(m[2]))),
    (re.compile(r"claw"), lambda m: claw()),
    (re.compile(r"chain:(\d+)"), lambda m: chain(int(m[1]))),
    (re.compile(r"antichain:(\d+)"), lambda m: antichain(int(m[1]))),
    (re.compile(r"random:(\d+),(\d+)"), lambda m: random_poset(int(m[1]), int(m[2]))),
]


def parse_poset_spec(spec: str) -> Poset:
    """Parse ``rect:PxQ | delta:P | nabla:P | tria:P | trap:P,S | claw | chain:N |
    antichain:N | random:N,SEED | file:PATH``."""
    spec = spec.strip()
    if spec.startswith("file:"):
        path = spec[5:]
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise StructureError(f"cannot read poset file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise StructureError(f"poset file {path} is not JSON: {exc}") from exc
        return Poset.from_json(obj)
    for pattern, build in _SPEC_PATTERNS:
        m = pattern.fullmatch(spec)
        if m:
            return build(m)
    raise StructureError(
        f"bad poset spec {spec!r} "
        "(expected rect:PxQ, delta:P, nabla:P, tria:P, trap:P,S, claw, chain:N, "
        "antichain:N, random:N,SEED or file:PATH)"
    )
