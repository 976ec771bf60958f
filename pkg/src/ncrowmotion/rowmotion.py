"""Labelings, toggles and birational rowmotion as partial maps.

A failed inversion anywhere in a toggle poisons the whole labeling: the
result is :data:`~ncrowmotion.algebra.UNDEFINED`, and every later toggle or
rowmotion step maps it to itself.
"""
from __future__ import annotations

from typing import Mapping, Sequence

from .algebra import UNDEFINED, Ring, RingDescriptor, StructureError, make_ring
from .poset import Poset
from .rng import SplitMix64
from .verdict import Verdict

__all__ = [
    "Labeling",
    "Orbit",
    "toggle",
    "toggle_commutes",
    "rowmotion",
    "rowmotion_via_extension",
    "check_extension_independence",
    "iterate",
    "check_implicit_recurrence",
    "normalize_bottom",
    "check_normalize_bottom",
    "check_well_definedness",
    "random_labeling",
]


class Labeling:
    """A total map from the extended poset to one ring.

    ``values[v]`` is the label of element ``v``; ``values[bot]`` and
    ``values[top]`` hold ``f(0)`` and ``f(1)``.
    """

    __slots__ = ("poset", "ring", "values")

    def __init__(self, poset: Poset, ring: Ring, values: Sequence):
        values = tuple(values)
        if len(values) != poset.n + 2:
            raise StructureError(f"labeling needs {poset.n + 2} values, got {len(values)}")
        for x in values:
            ring.check(x)
        self.poset = poset
        self.ring = ring
        self.values = values

    @classmethod
    def from_mapping(cls, poset: Poset, ring: Ring, labels: Mapping) -> "Labeling":
        """Build from ``{name_or_coord: value}`` including ``"BOT"`` and ``"TOP"``."""
        ext = poset.extended
        values = [None] * ext.size
        for key, x in labels.items():
            values[ext.element(key)] = x
        missing = [ext.name(v) for v in ext.elements() if values[v] is None]
        if missing:
            raise StructureError(f"missing label for {', '.join(missing)}")
        return cls(poset, ring, values)

    @property
    def ext(self):
        return self.poset.extended

    @property
    def bottom(self):
        return self.values[self.poset.n]

    @property
    def top(self):
        return self.values[self.poset.n + 1]

    def __getitem__(self, key):
        if isinstance(key, int):
            return self.values[key]
        return self.values[self.ext.element(key)]

    def __eq__(self, other):
        if not isinstance(other, Labeling):
            return NotImplemented
        return self.poset is other.poset and self.ring == other.ring and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self):
        ext = self.ext
        body = ", ".join(f"{ext.name(v)}: {self.ring.format(x)}" for v, x in enumerate(self.values))
        return f"Labeling({{{body}}})"

    def replace(self, v: int, x) -> "Labeling":
        values = list(self.values)
        values[v] = x
        return Labeling(self.poset, self.ring, values)

    def max_bits(self) -> int:
        return max(self.ring.bits(x) for x in self.values)

    def to_json(self) -> dict:
        ext = self.ext
        return {
            "ring": self.ring.descriptor.to_json(),
            "labels": {ext.name(v): self.ring.to_json(x) for v, x in enumerate(self.values)},
        }

    @classmethod
    def from_json(cls, poset: Poset, obj) -> "Labeling":
        if not isinstance(obj, dict):
            raise StructureError("labeling JSON must be an object")
        for key in ("ring", "labels"):
            if key not in obj:
                raise StructureError(f"labeling JSON is missing key {key!r}")
        ring = make_ring(RingDescriptor.from_json(obj["ring"]))
        labels = obj["labels"]
        if not isinstance(labels, dict):
            raise StructureError("'labels' must be an object")
        ext = poset.extended
        values = []
        for v in ext.elements():
            name = ext.name(v)
            if name not in labels:
                raise StructureError(f"labels: missing label for element {name}")
            try:
                values.append(ring.from_json(labels[name]))
            except StructureError as exc:
                raise StructureError(f"labels[{name!r}]: {exc}") from None
        extra = set(labels) - {ext.name(v) for v in ext.elements()}
        if extra:
            raise StructureError(f"labels: unknown element(s) {sorted(extra)}")
        return cls(poset, ring, values)


def random_labeling(
    poset: Poset,
    ring: Ring,
    seed: int,
    bound: int = 9,
    unit_boundary: bool = False,
) -> Labeling:
    """Invertible labels drawn in id order (BOT, TOP last) from one stream."""
    rng = SplitMix64(seed)
    values = [ring.draw_invertible(rng, bound) for _ in range(poset.n + 2)]
    if unit_boundary:
        values[poset.n] = ring.one
        values[poset.n + 1] = ring.one
    return Labeling(poset, ring, values)


# ---------------------------------------------------------------------------
# toggles


def _toggled_label(f: Labeling, v: int):
    ring, ext, vals = f.ring, f.ext, f.values
    inv_v = ring.try_invert(vals[v])
    if inv_v is UNDEFINED:
        return UNDEFINED
    upper = ring.sum(ring.try_invert(vals[u]) for u in ext.upper[v])
    inv_upper = ring.try_invert(upper)
    if inv_upper is UNDEFINED:
        return UNDEFINED
    lower = ring.sum(vals[u] for u in ext.lower[v])
    return ring.mul(ring.mul(lower, inv_v), inv_upper)


def toggle(f, v: int):
    """The v-toggle; returns a new labeling or ``UNDEFINED``."""
    if f is UNDEFINED:
        return UNDEFINED
    if not 0 <= v < f.poset.n:
        raise StructureError(f"cannot toggle at {v!r}: only elements of P can be toggled")
    x = _toggled_label(f, v)
    if x is UNDEFINED:
        return UNDEFINED
    return f.replace(v, x)


def toggle_commutes(f: Labeling, v: int, w: int) -> Verdict:
    """T_v T_w f == T_w T_v f for non-adjacent v, w (equality includes UNDEFINED)."""
    name = "toggle_commutes"
    P = f.poset
    if v != w and (w in P.up_covers[v] or v in P.up_covers[w]):
        return Verdict.not_applicable(name, "v and w are in a cover relation")
    left = toggle(toggle(f, w), v)
    right = toggle(toggle(f, v), w)
    if left == right or (left is UNDEFINED and right is UNDEFINED):
        return Verdict(name, "pass")
    return Verdict.from_failures(
        name,
        [{
            "location": {"v": P.names[v], "w": P.names[w]},
            "lhs": "undefined" if left is UNDEFINED else left.to_json(),
            "rhs": "undefined" if right is UNDEFINED else right.to_json(),
        }],
    )


def _apply_extension(f, ext_order: Sequence[int]):
    # R = T_{v1} o ... o T_{vm}: T_{vm} acts first
    for v in reversed(ext_order):
        f = toggle(f, v)
        if f is UNDEFINED:
            return UNDEFINED
    return f


def rowmotion(f):
    """Birational rowmotion along the canonical linear extension."""
    if f is UNDEFINED:
        return UNDEFINED
    return _apply_extension(f, f.poset.canonical_extension)


def rowmotion_via_extension(f, ext_order: Sequence[int]):
    if f is UNDEFINED:
        return UNDEFINED
    if not f.poset.is_linear_extension(list(ext_order)):
        raise StructureError(f"{list(ext_order)} is not a linear extension")
    return _apply_extension(f, ext_order)


def check_extension_independence(f: Labeling) -> Verdict:
    """Rowmotion does not depend on the linear extension, checked on all of
    them at once.

    Toggling the elements of an up-set U in any order compatible with the
    poset must give one labeling (or UNDEFINED) per U; every linear
    extension is a maximal chain of up-sets, so agreement at each up-set
    covers every extension with at most 2^n toggles.
    """
    name = "extension_independence"
    P = f.poset
    n = P.n
    up_mask = [sum(1 << w for w in P.up_covers[v]) for v in range(n)]
    layer = {0: f}
    failures = []
    for _ in range(n):
        nxt: dict = {}
        for done, g in layer.items():
            for v in range(n):
                if done >> v & 1 or up_mask[v] & ~done:
                    continue
                h = toggle(g, v)
                key = done | 1 << v
                if key not in nxt:
                    nxt[key] = h
                elif nxt[key] != h and not (nxt[key] is UNDEFINED and h is UNDEFINED):
                    failures.append({
                        "location": {"up_set": [P.names[w] for w in range(n) if key >> w & 1], "last": P.names[v]},
                        "lhs": "undefined" if h is UNDEFINED else h.to_json(),
                        "rhs": "undefined" if nxt[key] is UNDEFINED else nxt[key].to_json(),
                    })
        layer = nxt
    final = layer[(1 << n) - 1]
    ref = rowmotion(f)
    if final != ref and not (final is UNDEFINED and ref is UNDEFINED):
        failures.append({"location": "full up-set vs canonical extension",
                         "lhs": "undefined" if final is UNDEFINED else final.to_json(),
                         "rhs": "undefined" if ref is UNDEFINED else ref.to_json()})
    return Verdict.from_failures(name, failures)


class Orbit:
    """Lazily extended sequence ``f, Rf, R^2 f, ...``.

    Indexing past the current end computes the missing iterates; once an
    iterate is ``UNDEFINED`` all later ones are too.
    """

    def __init__(self, f: Labeling):
        self.start = f
        self.poset = f.poset
        self.ring = f.ring
        self.states: list = [f]

    def __getitem__(self, l: int):
        if l < 0:
            raise IndexError(l)
        while len(self.states) <= l:
            self.states.append(rowmotion(self.states[-1]))
        return self.states[l]

    def __len__(self):
        return len(self.states)

    def defined(self, l: int) -> bool:
        return self[l] is not UNDEFINED

    def label(self, v: int, l: int):
        state = self[l]
        return UNDEFINED if state is UNDEFINED else state.values[v]

    def prefix(self, k: int) -> list:
        self[k]
        return self.states[: k + 1]

    def last_defined(self, limit: int) -> int:
        """Largest ``l <= limit`` with ``R^l f`` defined."""
        for l in range(limit + 1):
            if self[l] is UNDEFINED:
                return l - 1
        return limit


def iterate(f: Labeling, k: int) -> list:
    """``[f, Rf, ..., R^k f]`` with ``UNDEFINED`` absorbing."""
    if k < 0:
        raise StructureError("k must be nonnegative")
    return Orbit(f).prefix(k)


def check_implicit_recurrence(orbit: Orbit, l: int, v: int) -> Verdict:
    """v_{l+1} == (sum_{u<.v} u_l) inv(v_l) inv(sum_{u.>v} inv(u_{l+1}))."""
    name = "implicit_recurrence"
    if not orbit.defined(l + 1):
        return Verdict.not_applicable(name, f"R^{l + 1} f is undefined")
    ring, ext = orbit.ring, orbit.poset.extended
    cur, nxt = orbit[l].values, orbit[l + 1].values
    lower = ring.sum(cur[u] for u in ext.lower[v])
    upper = ring.sum(ring.try_invert(nxt[u]) for u in ext.upper[v])
    rhs = ring.mul(ring.mul(lower, ring.try_invert(cur[v])), ring.try_invert(upper))
    if rhs == nxt[v]:
        return Verdict(name, "pass")
    return Verdict.from_failures(name, [{
        "location": {"element": ext.name(v), "l": l + 1},
        "lhs": ring.to_json(nxt[v]),
        "rhs": "undefined" if rhs is UNDEFINED else ring.to_json(rhs),
    }])


# ---------------------------------------------------------------------------
# bottom normalization and well-definedness


def normalize_bottom(f: Labeling) -> Labeling:
    """The labeling agreeing with ``f`` except that the bottom label is 1."""
    return f.replace(f.poset.n, f.ring.one)


def check_normalize_bottom(f: Labeling) -> Verdict:
    """With g = normalize_bottom(f) and a = f(0), whenever Rf is defined:
    Rg is defined, (Rf)(v) == (Rg)(v) for non-minimal v, and
    (Rf)(v) == a (Rg)(v) for minimal v.
    """
    name = "normalize_bottom"
    rf = rowmotion(f)
    if rf is UNDEFINED:
        return Verdict.not_applicable(name, "Rf is undefined")
    g = normalize_bottom(f)
    rg = rowmotion(g)
    if rg is UNDEFINED:
        return Verdict.from_failures(name, [{"location": "Rg", "lhs": "undefined", "rhs": "defined"}])
    ring, P, a = f.ring, f.poset, f.bottom
    failures = []
    minimal = set(P.minimal_elements())
    for v in range(P.n):
        expected = ring.mul(a, rg.values[v]) if v in minimal else rg.values[v]
        if rf.values[v] != expected:
            failures.append({
                "location": {"element": P.names[v]},
                "lhs": ring.to_json(rf.values[v]),
                "rhs": ring.to_json(expected),
            })
    return Verdict.from_failures(name, failures)


def check_well_definedness(f: Labeling) -> Verdict:
    """The invertibility consequences of a defined Rf / R^2 f.

    * Rf defined => f(v) invertible for every v in P;
    * Rf defined and P nonempty => f(1) invertible;
    * R^2 f defined and P nonempty => f(0), f(1) invertible;
    * Rf defined => (Rf)(v) invertible for non-minimal v;
    * Rf defined, P nonempty and f(0) invertible => every (Rf)(v) invertible.
    """
    name = "well_definedness"
    ring, P = f.ring, f.poset
    ext = P.extended
    rf = rowmotion(f)
    if rf is UNDEFINED:
        return Verdict.not_applicable(name, "Rf is undefined")
    failures = []

    def need(cond, where):
        if not cond:
            failures.append({"location": where, "lhs": "not invertible", "rhs": "invertible"})

    for v in range(P.n):
        need(ring.is_invertible(f.values[v]), f"f({P.names[v]})")
    if P.n:
        need(ring.is_invertible(f.top), "f(1)")
        if rowmotion(rf) is not UNDEFINED:
            need(ring.is_invertible(f.bottom), "f(0) given R^2 f defined")
            need(ring.is_invertible(f.top), "f(1) given R^2 f defined")
    minimal = set(P.minimal_elements())
    for v in range(P.n):
        if v not in minimal:
            need(ring.is_invertible(rf.values[v]), f"(Rf)({P.names[v]}), non-minimal")
    if P.n and ring.is_invertible(f.bottom):
        for v in ext.elements():
            need(ring.is_invertible(rf.values[v]), f"(Rf)({ext.name(v)}) given f(0) invertible")
    return Verdict.from_failures(name, failures)
