"""Down/up slacks, path sums and the identities relating them.

Labels are read from an :class:`~ncrowmotion.rowmotion.Orbit`; ``x_l`` below
means the label of ``x`` in ``R^l f``.  Path sums run over descending cover
paths of the extended poset.  They are computed by first-step recursion
(memoized); :func:`enumerate_paths` gives an independent brute-force route.
"""
from __future__ import annotations

from typing import Optional

from .algebra import UNDEFINED, StructureError
from .poset import Poset
from .rowmotion import Orbit
from .verdict import Verdict, combine

__all__ = [
    "SlackTable",
    "enumerate_paths",
    "count_paths",
    "path_sum_by_enumeration",
    "jumps",
    "enumerate_pathjump_paths",
    "pathjump_sum",
    "check_slack_recursions",
    "check_path_sum_agreement",
    "check_transition",
    "check_path_formulas",
    "check_four_neighbors",
    "check_conversion",
    "check_pathjump_claims",
    "check_matrix_conversion",
    "slack_matrices",
    "check_slack_invertibility",
    "MAX_PATHS",
    "MAX_ENUMERATION_SPAN",
]

MAX_PATHS = 10**6
# rectangles with p + q above this are refused by the enumeration routines
MAX_ENUMERATION_SPAN = 10


def _js(ring, x):
    return "undefined" if x is UNDEFINED else ring.to_json(x)


class SlackTable:
    """Memoized slacks and path sums for one orbit.

    Nothing is cached that is not a pure function of the orbit, so cached
    and fresh evaluations always agree.
    """

    def __init__(self, orbit: Orbit, cache: bool = True):
        self.orbit = orbit
        self.poset: Poset = orbit.poset
        self.ext = orbit.poset.extended
        self.ring = orbit.ring
        self.cache = cache
        self._memo: dict = {}

    def _cached(self, key, compute):
        if not self.cache:
            return compute()
        try:
            return self._memo[key]
        except KeyError:
            val = self._memo[key] = compute()
            return val

    def label(self, v: int, l: int):
        return self.orbit.label(v, l)

    def down(self, v: int, l: int):
        """``v_l * inv(sum of lower-cover labels at time l)``; 1 at sentinels."""
        return self._cached(("down", v, l), lambda: self._down(v, l))

    def _down(self, v, l):
        ring = self.ring
        if self.ext.is_sentinel(v):
            return ring.one
        if not self.orbit.defined(l):
            return UNDEFINED
        lower = ring.sum(self.label(u, l) for u in self.ext.lower[v])
        return ring.mul(self.label(v, l), ring.try_invert(lower))

    def up(self, v: int, l: int):
        """``inv(sum of inverted upper-cover labels) * inv(v_l)``; 1 at sentinels."""
        return self._cached(("up", v, l), lambda: self._up(v, l))

    def _up(self, v, l):
        ring = self.ring
        if self.ext.is_sentinel(v):
            return ring.one
        if not self.orbit.defined(l):
            return UNDEFINED
        upper = ring.sum(ring.try_invert(self.label(u, l)) for u in self.ext.upper[v])
        return ring.mul(ring.try_invert(upper), ring.try_invert(self.label(v, l)))

    def slack(self, kind: str, v: int, l: int):
        if kind == "down":
            return self.down(v, l)
        if kind == "up":
            return self.up(v, l)
        raise StructureError(f"unknown slack kind {kind!r}")

    def path_sum(self, kind: str, u: int, v: int, l: int):
        """Sum over descending cover paths u -> v of ordered slack products."""
        return self._cached((kind + "_path", u, v, l), lambda: self._path_sum(kind, u, v, l))

    def _path_sum(self, kind, u, v, l):
        ring, ext = self.ring, self.ext
        if not ext.leq(v, u):
            return ring.zero
        s = self.slack(kind, u, l)
        if u == v:
            return s
        rest = ring.sum(self.path_sum(kind, w, v, l) for w in ext.lower[u] if ext.leq(v, w))
        return ring.mul(s, rest)

    def down_path_sum(self, u: int, v: int, l: int):
        return self.path_sum("down", u, v, l)

    def up_path_sum(self, u: int, v: int, l: int):
        return self.path_sum("up", u, v, l)


# ---------------------------------------------------------------------------
# path enumeration


def _check_enumeration_size(poset: Poset) -> None:
    if poset.family == "rect" and sum(poset.params) > MAX_ENUMERATION_SPAN:
        p, q = poset.params
        raise StructureError(
            f"path enumeration is limited to rectangles with p+q <= {MAX_ENUMERATION_SPAN}; got {p}x{q}"
        )


def count_paths(poset: Poset, u: int, v: int) -> int:
    ext = poset.extended
    memo: dict = {}

    def rec(x):
        if x == v:
            return 1
        if x not in memo:
            memo[x] = sum(rec(w) for w in ext.lower[x] if ext.leq(v, w))
        return memo[x]

    return rec(u) if ext.leq(v, u) else 0


def enumerate_paths(poset: Poset, u: int, v: int) -> list:
    """All descending cover paths from u to v in the extended poset (DFS)."""
    _check_enumeration_size(poset)
    n = count_paths(poset, u, v)
    if n > MAX_PATHS:
        raise StructureError(f"{n} paths exceed the enumeration cap of {MAX_PATHS}")
    ext = poset.extended
    out: list = []

    def dfs(path):
        x = path[-1]
        if x == v:
            out.append(tuple(path))
            return
        for w in ext.lower[x]:
            if ext.leq(v, w):
                path.append(w)
                dfs(path)
                path.pop()

    if ext.leq(v, u):
        dfs([u])
    return out


def path_sum_by_enumeration(table: SlackTable, kind: str, u: int, v: int, l: int):
    ring = table.ring
    return ring.sum(
        ring.prod(table.slack(kind, x, l) for x in path)
        for path in enumerate_paths(table.poset, u, v)
    )


# ---------------------------------------------------------------------------
# path-jump-paths (rectangles only)


def _rect(poset: Poset) -> tuple:
    if poset.family != "rect":
        raise StructureError("this operation needs a rectangle poset")
    return poset.params


def _rank(c) -> int:
    return c[0] + c[1] - 1


def jumps(x: tuple, y: tuple) -> bool:
    """``rank(x) == rank(y) + 1`` and the first coordinate strictly drops."""
    return _rank(x) == _rank(y) + 1 and x[0] > y[0]


def enumerate_pathjump_paths(poset: Poset, u: int, d: int, j: int) -> list:
    """Descending sequences from u to d in P with exactly one jump, at step j.

    Every other step is a cover.  The vertex count is always
    ``rank(u) - rank(d) + 1``.
    """
    _rect(poset)
    _check_enumeration_size(poset)
    coords = poset.coords
    r = _rank(coords[u]) - _rank(coords[d])
    if not 0 <= j < r:
        return []
    down = poset.down_covers
    out: list = []

    def dfs(path):
        x = path[-1]
        step = len(path) - 1
        if step == r:
            if x == d:
                out.append(tuple(path))
            return
        if step == j:
            nxt = [y for y in range(poset.n) if jumps(coords[x], coords[y])]
        else:
            nxt = down[x]
        for y in nxt:
            if poset.leq(d, y):
                path.append(y)
                dfs(path)
                path.pop()

    dfs([u])
    return out


def pathjump_sum(table: SlackTable, u: int, d: int, l: int, j: int):
    """Sum of ``down(v_0)...down(v_{j-1}) * v_j inv(v_{j+1}) * up(v_{j+2})...up(v_r)``."""
    ring = table.ring
    total = ring.zero
    for path in enumerate_pathjump_paths(table.poset, u, d, j):
        factors = [table.down(x, l) for x in path[:j]]
        factors.append(table.label(path[j], l))
        factors.append(ring.try_invert(table.label(path[j + 1], l)))
        factors.extend(table.up(x, l) for x in path[j + 2:])
        total = ring.add(total, ring.prod(factors))
    return total


# ---------------------------------------------------------------------------
# checkers


def _compare(name: str, ring, pairs) -> Verdict:
    """pairs: iterable of (location, lhs, rhs); any UNDEFINED side makes it inconclusive."""
    failures = []
    undefined = 0
    checked = 0
    for loc, lhs, rhs in pairs:
        if lhs is UNDEFINED or rhs is UNDEFINED:
            undefined += 1
            continue
        checked += 1
        if lhs != rhs:
            failures.append({"location": loc, "lhs": _js(ring, lhs), "rhs": _js(ring, rhs)})
    if failures:
        return Verdict.from_failures(name, failures, checked=checked)
    if not checked:
        return Verdict.not_applicable(name, "every term is undefined")
    return Verdict(name, "pass", detail={"checked": checked, "undefined": undefined})


def _needs(orbit: Orbit, name: str, l_defined: int, l_min: int = 0, l: int = 0) -> Optional[Verdict]:
    if l < l_min:
        return Verdict.not_applicable(name, f"needs l >= {l_min}")
    if not orbit.defined(l_defined):
        return Verdict.not_applicable(name, f"R^{l_defined} f is undefined")
    if not orbit.ring.is_invertible(orbit.start.bottom):
        return Verdict.not_applicable(name, "f(0) is not invertible")
    return None


def _loc(ext, **kw):
    return {k: (ext.name(v) if k in ("u", "v", "s", "t", "d", "w", "element") else v) for k, v in kw.items()}


def check_slack_recursions(table: SlackTable, s: int, t: int, l: int) -> Verdict:
    """First-step and last-step recursions for both down and up path sums (s != t)."""
    name = "slack_recursions"
    if s == t:
        return Verdict.not_applicable(name, "s == t")
    ring, ext = table.ring, table.ext

    def pairs():
        for kind in ("down", "up"):
            total = table.path_sum(kind, s, t, l)
            first = ring.mul(
                table.slack(kind, s, l),
                ring.sum(table.path_sum(kind, w, t, l) for w in ext.lower[s]),
            )
            last = ring.mul(
                ring.sum(table.path_sum(kind, s, w, l) for w in ext.upper[t]),
                table.slack(kind, t, l),
            )
            yield {"kind": kind, "form": "first", **_loc(ext, s=s, t=t), "l": l}, total, first
            yield {"kind": kind, "form": "last", **_loc(ext, s=s, t=t), "l": l}, total, last

    return _compare(name, ring, pairs())


def check_path_sum_agreement(table: SlackTable, l: int, pairs=None) -> Verdict:
    """Recursion-computed path sums equal enumeration-computed ones."""
    ext = table.ext
    if pairs is None:
        pairs = [(u, v) for u in ext.elements() for v in ext.elements() if ext.leq(v, u)]

    def gen():
        for u, v in pairs:
            for kind in ("down", "up"):
                yield (
                    {"kind": kind, **_loc(ext, u=u, v=v), "l": l},
                    table.path_sum(kind, u, v, l),
                    path_sum_by_enumeration(table, kind, u, v, l),
                )

    return _compare("path_sum_agreement", table.ring, gen())


def check_transition(table: SlackTable, l: int, pairs=None) -> Verdict:
    """up-slack at time l equals down-slack at time l-1, pointwise and for path sums."""
    name = "transition"
    pre = _needs(table.orbit, name, l, 1, l)
    if pre:
        return pre
    ext = table.ext
    if pairs is None:
        pairs = [(u, v) for u in ext.elements() for v in ext.elements() if ext.leq(v, u)]

    def gen():
        for v in ext.elements():
            yield {**_loc(ext, v=v), "l": l}, table.up(v, l), table.down(v, l - 1)
        for u, v in pairs:
            yield {**_loc(ext, u=u, v=v), "l": l}, table.up_path_sum(u, v, l), table.down_path_sum(u, v, l - 1)

    return _compare(name, table.ring, gen())


def check_path_formulas(table: SlackTable, l: int) -> Verdict:
    """Label recovery from path sums.

    (a) ``u_l = inv(up path sum TOP -> u) * b`` (l >= 1);
    (b) ``u_l = down path sum u -> BOT * a`` (R^{l+1} f defined);
    on rectangles also (c), (d) with the paths ending at (p,q) and (1,1).
    """
    name = "path_formulas"
    orbit, ring, ext, P = table.orbit, table.ring, table.ext, table.poset
    if not ring.is_invertible(orbit.start.bottom):
        return Verdict.not_applicable(name, "f(0) is not invertible")
    a, b = orbit.start.bottom, orbit.start.top
    rect = P.family == "rect"
    if rect:
        p, q = P.params
        corner_top = P.element((p, q))
        corner_bot = P.element((1, 1))
    verdicts = []
    if l >= 1 and orbit.defined(l):
        def gen_ac():
            for u in range(P.n):
                x = table.label(u, l)
                yield {"part": "a", **_loc(ext, u=u), "l": l}, x, ring.mul(
                    ring.try_invert(table.up_path_sum(ext.top, u, l)), b)
                if rect:
                    yield {"part": "c", **_loc(ext, u=u), "l": l}, x, ring.mul(
                        ring.try_invert(table.up_path_sum(corner_top, u, l)), b)
        verdicts.append(_compare(name, ring, gen_ac()))
    if orbit.defined(l + 1):
        def gen_bd():
            for u in range(P.n):
                x = table.label(u, l)
                yield {"part": "b", **_loc(ext, u=u), "l": l}, x, ring.mul(
                    table.down_path_sum(u, ext.bot, l), a)
                if rect:
                    yield {"part": "d", **_loc(ext, u=u), "l": l}, x, ring.mul(
                        table.down_path_sum(u, corner_bot, l), a)
        verdicts.append(_compare(name, ring, gen_bd()))
    if not verdicts:
        return Verdict.not_applicable(name, "no part has its hypotheses met")
    return combine(name, verdicts)


def check_four_neighbors(table: SlackTable, i: int, j: int, l: int) -> Verdict:
    """With d=(i,j), v=(i+1,j), w=(i,j+1), u=(i+1,j+1):
    inv(v) up(d) d == inv(u) down(u) w  and  inv(w) up(d) d == inv(u) down(u) v.
    """
    name = "four_neighbors"
    P = table.poset
    p, q = _rect(P)
    if not (1 <= i <= p - 1 and 1 <= j <= q - 1):
        return Verdict.not_applicable(name, "square out of range")
    pre = _needs(table.orbit, name, l + 1, 1, l)
    if pre:
        return pre
    ring = table.ring
    d, v, w, u = (P.element(c) for c in ((i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)))
    lab = {x: table.label(x, l) for x in (d, v, w, u)}
    inv = ring.try_invert
    left_core = ring.mul(table.up(d, l), lab[d])
    right_core = ring.mul(inv(lab[u]), table.down(u, l))
    pairs = [
        ({"part": "a", "square": [i, j], "l": l}, ring.mul(inv(lab[v]), left_core), ring.mul(right_core, lab[w])),
        ({"part": "b", "square": [i, j], "l": l}, ring.mul(inv(lab[w]), left_core), ring.mul(right_core, lab[v])),
    ]
    return _compare(name, ring, pairs)


def check_conversion(table: SlackTable, k: int, i: int, l: int) -> Verdict:
    """down path sum (k,q) -> (i,1) equals up path sum (k-1,q) -> (i-1,1)."""
    name = "conversion"
    P = table.poset
    p, q = _rect(P)
    if not (2 <= k <= p and 2 <= i <= p):
        return Verdict.not_applicable(name, "k, i must lie in 2..p")
    pre = _needs(table.orbit, name, l + 1, 1, l)
    if pre:
        return pre
    lhs = table.down_path_sum(P.element((k, q)), P.element((i, 1)), l)
    rhs = table.up_path_sum(P.element((k - 1, q)), P.element((i - 1, 1)), l)
    return _compare(name, table.ring, [({"k": k, "i": i, "l": l}, lhs, rhs)])


def check_pathjump_claims(table: SlackTable, k: int, i: int, l: int) -> Verdict:
    """For u=(k,q), d'=(i-1,1): the jump sum is the same for every jump index,
    equals the down path sum u -> (i,1) at the last index and the up path sum
    (k-1,q) -> d' at index 0.
    """
    name = "pathjump_claims"
    P = table.poset
    p, q = _rect(P)
    if not (2 <= k <= p and 2 <= i <= p):
        return Verdict.not_applicable(name, "k, i must lie in 2..p")
    pre = _needs(table.orbit, name, l + 1, 1, l)
    if pre:
        return pre
    u, d = P.element((k, q)), P.element((i - 1, 1))
    r = _rank((k, q)) - _rank((i - 1, 1))
    if r < 1:
        return Verdict.not_applicable(name, "u is not above d'")
    sums = [pathjump_sum(table, u, d, l, j) for j in range(r)]
    loc = {"k": k, "i": i, "l": l}
    pairs = [({**loc, "claim": 3, "j": j}, sums[j], sums[j + 1]) for j in range(r - 1)]
    pairs.append(({**loc, "claim": 1}, sums[r - 1], table.down_path_sum(u, P.element((i, 1)), l)))
    pairs.append(({**loc, "claim": 2}, sums[0], table.up_path_sum(P.element((k - 1, q)), d, l)))
    return _compare(name, table.ring, pairs)


# sparse matrices over the ring: {row: {col: value}}


def _matmul(ring, A: dict, B: dict) -> dict:
    out: dict = {}
    for x, row in A.items():
        acc: dict = {}
        for y, axy in row.items():
            for z, byz in B.get(y, {}).items():
                term = ring.mul(axy, byz)
                acc[z] = ring.add(acc[z], term) if z in acc else term
        if acc:
            out[x] = acc
    return out


def slack_matrices(table: SlackTable, l: int) -> tuple:
    """The down-slack, up-slack and jump matrices indexed by P x P."""
    P, ring = table.poset, table.ring
    coords = P.coords
    down_m: dict = {}
    up_m: dict = {}
    jump_m: dict = {}
    for x in range(P.n):
        for y in P.down_covers[x]:
            down_m.setdefault(x, {})[y] = table.down(x, l)
            up_m.setdefault(x, {})[y] = table.up(y, l)
        for y in range(P.n):
            if jumps(coords[x], coords[y]):
                jump_m.setdefault(x, {})[y] = ring.mul(table.label(x, l), ring.try_invert(table.label(y, l)))
    return down_m, up_m, jump_m


def check_matrix_conversion(table: SlackTable, l: int, k: int) -> Verdict:
    """``D^k U == U A^k`` entrywise, D/A/U the down, up and jump matrices."""
    name = "matrix_conversion"
    _rect(table.poset)
    pre = _needs(table.orbit, name, l + 1, 1, l)
    if pre:
        return pre
    if k < 0:
        raise StructureError("k must be nonnegative")
    ring = table.ring
    down_m, up_m, jump_m = slack_matrices(table, l)
    left, right = jump_m, jump_m
    for _ in range(k):
        left = _matmul(ring, down_m, left)
        right = _matmul(ring, right, up_m)
    names = table.poset.names

    def gen():
        n = table.poset.n
        for x in range(n):
            for y in range(n):
                lhs = left.get(x, {}).get(y, ring.zero)
                rhs = right.get(x, {}).get(y, ring.zero)
                yield {"row": names[x], "col": names[y], "k": k, "l": l}, lhs, rhs

    return _compare(name, ring, gen())


def check_slack_invertibility(table: SlackTable, l: int) -> Verdict:
    """With l >= 1, R^l f defined and f(0) invertible, the labels at times l and
    l-1, down(v, l-1) and up(v, l) are all defined and invertible."""
    name = "slack_invertibility"
    pre = _needs(table.orbit, name, l, 1, l)
    if pre:
        return pre
    ring, ext = table.ring, table.ext
    failures = []
    for v in ext.elements():
        for what, x in (
            ("label at l", table.label(v, l)),
            ("label at l-1", table.label(v, l - 1)),
            ("down at l-1", table.down(v, l - 1)),
            ("up at l", table.up(v, l)),
        ):
            if x is UNDEFINED or not ring.is_invertible(x):
                failures.append({
                    "location": {"element": ext.name(v), "l": l, "value": what},
                    "lhs": _js(ring, x),
                    "rhs": "invertible",
                })
    return Verdict.from_failures(name, failures)
