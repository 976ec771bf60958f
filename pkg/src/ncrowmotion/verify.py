"""Seeded checkers for the rowmotion theorems, lemmas and conjectures.

Every checker takes a :class:`TrialConfig`, runs one trial per seed
(``seed, seed+1, ..., seed+trials-1``) and folds the per-trial verdicts
with :func:`~ncrowmotion.verdict.combine`.  Failures carry enough context
(poset spec, ring, seed, bound, full labeling) to be replayed from the CLI.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Union

from .algebra import (
    UNDEFINED,
    Matrix,
    MatrixRing,
    Ring,
    RingDescriptor,
    StructureError,
    check_sum_inverse_identity,
    format_fraction,
    make_ring,
    parse_ring,
)
from .poset import Poset, antipode, claw, parse_poset_spec
from .rng import SplitMix64
from .rowmotion import (
    Labeling,
    Orbit,
    check_extension_independence,
    check_implicit_recurrence,
    check_normalize_bottom,
    check_well_definedness,
    random_labeling,
    rowmotion,
    rowmotion_via_extension,
    toggle_commutes,
)
from .slacks import (
    SlackTable,
    check_conversion,
    check_four_neighbors,
    check_matrix_conversion,
    check_path_formulas,
    check_path_sum_agreement,
    check_pathjump_claims,
    check_slack_invertibility,
    check_slack_recursions,
    check_transition,
)
from .verdict import BLOWUP, FAIL, PASS, Verdict, combine

__all__ = [
    "TrialConfig",
    "BLOWUP_BITS",
    "CONJECTURE_FAMILIES",
    "verify_periodicity",
    "verify_reciprocity",
    "verify_reciprocity_implies_periodicity",
    "verify_bottom_top",
    "verify_invariant_sum",
    "probe_conjecture",
    "claw_counterexample",
    "claw_labeling",
    "claw_phi",
    "tropical_periodicity",
    "verify_extension_independence",
    "verify_toggle_commutation",
    "verify_well_definedness",
    "verify_normalize_bottom",
    "verify_implicit_recurrence",
    "verify_sum_inverse",
    "verify_slacks",
    "verify_conversion",
]

BLOWUP_BITS = 10**5


@dataclass
class TrialConfig:
    """One batch of seeded trials.

    ``ring`` accepts a :class:`RingDescriptor`, a :class:`Ring` or a CLI
    spec string.  A fixed ``labeling`` replaces random generation and forces
    a single trial.
    """

    poset_spec: Union[str, Poset]
    ring: Union[str, Ring, RingDescriptor] = "mat:2"
    seed: int = 0
    entry_bound: int = 9
    max_iterations: Optional[int] = None
    trials: int = 1
    unit_boundary: bool = False
    labeling: Optional[Labeling] = None
    _poset: Optional[Poset] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.ring, RingDescriptor):
            self.ring = make_ring(self.ring)
        elif isinstance(self.ring, str):
            self.ring = parse_ring(self.ring)
        if isinstance(self.poset_spec, Poset):
            self._poset = self.poset_spec
            self.poset_spec = self._poset.spec or "custom"
        else:
            self._poset = parse_poset_spec(self.poset_spec)
        if self.trials < 1:
            raise StructureError("trials must be >= 1")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise StructureError("max_iterations must be >= 1")
        if self.entry_bound < 1:
            raise StructureError("entry_bound must be >= 1")
        if self.labeling is not None:
            if self.labeling.poset.names != self._poset.names:
                raise StructureError("labeling does not match the poset")
            self.ring = self.labeling.ring
            self.trials = 1

    @property
    def poset(self) -> Poset:
        return self._poset

    def iterations(self, default: int) -> int:
        return default if self.max_iterations is None else self.max_iterations

    def labelings(self) -> Iterator[tuple]:
        if self.labeling is not None:
            yield self.seed, self.labeling
            return
        for s in range(self.seed, self.seed + self.trials):
            yield s, random_labeling(self.poset, self.ring, s, self.entry_bound, self.unit_boundary)

    def context(self, seed: int, f: Labeling) -> dict:
        ctx = {
            "poset": self.poset_spec,
            "ring": self.ring.descriptor.spec,
            "seed": seed,
            "bound": self.entry_bound,
            "labeling": f.to_json(),
        }
        if self.poset.spec is None:
            ctx["poset_json"] = self.poset.to_json()
        return ctx


def _run(name: str, cfg: TrialConfig, trial: Callable, summary: Optional[Callable] = None) -> Verdict:
    verdicts = []
    for seed, f in cfg.labelings():
        v = trial(f)
        v.check = name
        if v.trials != 1:
            # one trial per seed; the inner tally moves to the detail
            v.detail["checks"] = v.counts
            v.trials, v.counts = 1, {v.status: 1}
        for w in v.failures:
            w.update({k: x for k, x in cfg.context(seed, f).items() if k not in w})
        verdicts.append(v)
    out = combine(name, verdicts)
    if summary is not None:
        out.detail["summary"] = summary(out)
    return out


def _js(ring: Ring, x):
    return "undefined" if x is UNDEFINED else ring.to_json(x)


def _walk(orbit: Orbit, k: int) -> Optional[Verdict]:
    """Compute the orbit through R^k f; an inconclusive verdict if it stops early."""
    for l in range(1, k + 1):
        state = orbit[l]
        if state is UNDEFINED:
            return Verdict.undefined_orbit("", f"R^{l} f is undefined")
        if state.max_bits() > BLOWUP_BITS:
            return Verdict("", BLOWUP, detail={"reason": f"entries of R^{l} f exceed {BLOWUP_BITS} bits"})
    return None


def _twist(ring: Ring, a, b, x):
    """``a inv(b) x inv(a) b``."""
    inv = ring.try_invert
    return ring.prod([a, inv(b), x, inv(a), b])


def _compare(ring: Ring, pairs) -> Verdict:
    failures = [
        {"location": loc, "lhs": _js(ring, lhs), "rhs": _js(ring, rhs)}
        for loc, lhs, rhs in pairs
        if lhs is UNDEFINED or rhs is UNDEFINED or lhs != rhs
    ]
    return Verdict.from_failures("", failures)


def _require_rect(cfg: TrialConfig, name: str) -> tuple:
    if cfg.poset.family != "rect":
        raise StructureError(f"{name} needs a rectangle poset (rect:PxQ), got {cfg.poset_spec}")
    return cfg.poset.params


# ---------------------------------------------------------------------------
# rectangle theorems


def verify_periodicity(cfg: TrialConfig) -> Verdict:
    """``(R^{p+q} f)(x) == a inv(b) f(x) inv(a) b`` at every x, with a, b invertible."""
    p, q = _require_rect(cfg, "periodicity")
    period = p + q
    if cfg.iterations(period) < period:
        return Verdict.not_applicable("periodicity", f"needs {period} iterations")

    def trial(f: Labeling) -> Verdict:
        ring = f.ring
        orbit = Orbit(f)
        stop = _walk(orbit, period)
        if stop:
            return stop
        a, b = f.bottom, f.top
        failures = [
            {"location": name, "lhs": "not invertible", "rhs": "invertible"}
            for name, x in (("a", a), ("b", b))
            if not ring.is_invertible(x)
        ]
        if failures:
            return Verdict.from_failures("", failures)
        ext = f.ext
        last = orbit[period]
        return _compare(ring, (
            ({"element": ext.name(v), "l": period}, last.values[v], _twist(ring, a, b, f.values[v]))
            for v in ext.elements()
        ))

    return _run("periodicity", cfg, trial)


def verify_reciprocity(cfg: TrialConfig) -> Verdict:
    """``(R^l f)(i,j) == a inv((R^{l-i-j+1} f)(p+1-i, q+1-j)) b`` whenever l-i-j+1 >= 0."""
    p, q = _require_rect(cfg, "reciprocity")
    top_l = cfg.iterations(p + q)

    def trial(f: Labeling) -> Verdict:
        ring, P = f.ring, f.poset
        orbit = Orbit(f)
        stop = _walk(orbit, top_l)
        if stop:
            return stop
        a, b = f.bottom, f.top
        pairs = []
        for l in range(top_l + 1):
            for v, (i, j) in enumerate(P.coords):
                k = l - i - j + 1
                if k < 0:
                    continue
                rhs = ring.prod([a, ring.try_invert(orbit.label(P.element(antipode(p, q, (i, j))), k)), b])
                pairs.append(({"element": P.names[v], "l": l}, orbit.label(v, l), rhs))
        return _compare(ring, pairs)

    return _run("reciprocity", cfg, trial)


def verify_reciprocity_implies_periodicity(cfg: TrialConfig) -> Verdict:
    """Derive twisted periodicity from two reciprocity steps and compare routes.

    For x with antipode x', reciprocity first gives
    ``(R^{rank x'} f)(x') = a inv(f(x)) b`` and then
    ``(R^{p+q} f)(x) = a inv((R^{rank x'} f)(x')) b``; the composite must
    agree with the twisted closed form and with the computed orbit.
    """
    p, q = _require_rect(cfg, "reciprocity_implies_periodicity")

    def trial(f: Labeling) -> Verdict:
        ring, P = f.ring, f.poset
        inv = ring.try_invert
        orbit = Orbit(f)
        stop = _walk(orbit, p + q)
        if stop:
            return stop
        a, b = f.bottom, f.top
        pairs = []
        for v, x in enumerate(P.coords):
            xa = antipode(p, q, x)
            ell = xa[0] + xa[1] - 1
            step1 = orbit.label(P.element(xa), ell)
            composite = ring.prod([a, inv(step1), b])
            direct = _twist(ring, a, b, f.values[v])
            loc = {"element": P.names[v]}
            pairs.append(({**loc, "route": "first step"}, step1, ring.prod([a, inv(f.values[v]), b])))
            pairs.append(({**loc, "route": "composite vs closed form"}, composite, direct))
            pairs.append(({**loc, "route": "orbit vs composite"}, orbit.label(v, p + q), composite))
        return _compare(ring, pairs)

    return _run("reciprocity_implies_periodicity", cfg, trial)


# ---------------------------------------------------------------------------
# general posets


def verify_bottom_top(cfg: TrialConfig) -> Verdict:
    """``b * sum_{u covers BOT} inv((Rf)(u)) * a == sum_{u covered by TOP} f(u)``."""

    def trial(f: Labeling) -> Verdict:
        ring, ext = f.ring, f.ext
        rf = rowmotion(f)
        if rf is UNDEFINED:
            return Verdict.undefined_orbit("", "Rf is undefined")
        inner = ring.sum(ring.try_invert(rf.values[u]) for u in ext.upper[ext.bot])
        if inner is UNDEFINED:
            return Verdict.not_applicable("", "an inverse on the left side fails")
        lhs = ring.prod([f.top, inner, f.bottom])
        rhs = ring.sum(f.values[u] for u in ext.lower[ext.top])
        return _compare(ring, [({"identity": "bottom-top"}, lhs, rhs)])

    return _run("bottom_top", cfg, trial)


def cover_ratio_sum(f: Labeling):
    """``sum over covers u < v of the extended poset of f(u) inv(f(v))``."""
    ring, ext = f.ring, f.ext
    return ring.sum(
        ring.mul(f.values[u], ring.try_invert(f.values[v]))
        for v in ext.elements()
        for u in ext.lower[v]
    )


def verify_invariant_sum(cfg: TrialConfig) -> Verdict:
    """With f(0) = f(1) = 1 the cover-ratio sum is constant along the orbit."""
    steps = cfg.iterations(4)

    def trial(f: Labeling) -> Verdict:
        ring = f.ring
        if f.bottom != ring.one or f.top != ring.one:
            return Verdict.not_applicable("", "needs f(0) = f(1) = 1")
        start = cover_ratio_sum(f)
        if start is UNDEFINED:
            return Verdict.not_applicable("", "the sum for f is undefined")
        orbit = Orbit(f)
        pairs = []
        for l in range(1, steps + 1):
            state = orbit[l]
            if state is UNDEFINED:
                break
            pairs.append(({"l": l}, cover_ratio_sum(state), start))
        if not pairs:
            return Verdict.undefined_orbit("", "Rf is undefined")
        v = _compare(ring, pairs)
        v.detail = {"iterates": len(pairs)}
        return v

    return _run("invariant_sum", cfg, trial)


# ---------------------------------------------------------------------------
# conjecture probes

CONJECTURE_FAMILIES = {
    "delta": "delta",
    "nabla": "nabla",
    "tria": "tria",
    "trapezoid": "trap",
    "trap": "trap",
}


def _conjectured_period(P: Poset) -> tuple:
    """(period, whether the label is read at the transposed coordinate)."""
    fam = P.family
    if fam in ("delta", "nabla"):
        return P.params[0], True
    if fam == "tria":
        return 2 * P.params[0], False
    if fam == "trap":
        return P.params[0], False
    raise StructureError(f"no periodicity conjecture for poset family {fam!r}")


def probe_conjecture(family: str, cfg: TrialConfig) -> Verdict:
    """Empirical check of the triangle and trapezoid periodicity conjectures.

    delta/nabla: ``(R^p f)(i,j) == a inv(b) f(j,i) inv(a) b``;
    tria: ``R^{2p}`` with no transpose; trapezoid: ``R^p``.
    """
    name = f"conjecture_{CONJECTURE_FAMILIES.get(family, family)}"
    if CONJECTURE_FAMILIES.get(family) != cfg.poset.family:
        raise StructureError(f"family {family!r} does not match poset {cfg.poset_spec}")
    period, transpose = _conjectured_period(cfg.poset)
    P = cfg.poset

    def trial(f: Labeling) -> Verdict:
        ring = f.ring
        orbit = Orbit(f)
        stop = _walk(orbit, period)
        if stop:
            return stop
        a, b = f.bottom, f.top
        last = orbit[period]
        ext = f.ext
        pairs = []
        for v in ext.elements():
            src = v
            if transpose and v < P.n:
                i, j = P.coords[v]
                src = P.element((j, i))
            pairs.append(({"element": ext.name(v), "l": period}, last.values[v], _twist(ring, a, b, f.values[src])))
        return _compare(ring, pairs)

    def summary(v: Verdict) -> str:
        if v.status == FAIL:
            return f"counterexample found ({len(v.failures)} mismatches)"
        if v.status == PASS:
            return f"consistent with conjecture ({v.counts.get(PASS, 0)} trials)"
        return f"inconclusive ({v.status})"

    out = _run(name, cfg, trial, summary)
    out.detail["period"] = period
    return out


# ---------------------------------------------------------------------------
# the claw


def claw_labeling(y: Fraction, z: Fraction) -> Labeling:
    """The two-parameter family of 2x2 labelings on the claw.

    Bottom, top and the minimum carry the identity, q2 carries diag(1,-1),
    and q1, q3 carry the unipotent matrices with corner entries y and z.
    """
    P = claw()
    ring = MatrixRing(2)
    one = Matrix.identity(2)
    labels = {
        "BOT": one,
        "TOP": one,
        "p": one,
        "q1": Matrix.from_rows([[1, y], [0, 1]]),
        "q2": Matrix.from_rows([[1, 0], [0, -1]]),
        "q3": Matrix.from_rows([[1, z], [0, 1]]),
    }
    return Labeling.from_mapping(P, ring, labels)


def claw_phi(y: Fraction, z: Fraction) -> tuple:
    return (5 * y + 4 * z) / 9, (4 * y + 5 * z) / 9


def _claw_parameters(g: Labeling) -> Optional[tuple]:
    """(y, z) if g lies in the claw family, else None."""
    one = Matrix.identity(2)
    if any(g[k] != one for k in ("BOT", "TOP", "p")) or g["q2"] != Matrix.from_rows([[1, 0], [0, -1]]):
        return None
    out = []
    for k in ("q1", "q3"):
        m = g[k]
        if (m[0, 0], m[1, 0], m[1, 1]) != (1, 0, 1):
            return None
        out.append(m[0, 1])
    return tuple(out)


def claw_counterexample(max_m: int = 60, periods: int = 10) -> Verdict:
    """Rowmotion on the claw has no finite order over 2x2 matrices.

    Checks that ``R^m f`` is defined and differs from ``f`` for m = 1..max_m,
    and that ``R^{6i} f`` is the family member at ``phi^i(0, 1)``.
    """
    name = "claw_counterexample"
    f = claw_labeling(Fraction(0), Fraction(1))
    orbit = Orbit(f)
    failures = []
    for m in range(1, max_m + 1):
        state = orbit[m]
        if state is UNDEFINED:
            failures.append({"location": {"m": m}, "lhs": "undefined", "rhs": "defined"})
            break
        if state == f:
            failures.append({"location": {"m": m}, "lhs": state.to_json(), "rhs": "differs from f"})
    yz = (Fraction(0), Fraction(1))
    iterates = []
    for i in range(1, periods + 1):
        yz = claw_phi(*yz)
        state = orbit[6 * i]
        got = None if state is UNDEFINED else _claw_parameters(state)
        iterates.append({"i": i, "y": format_fraction(yz[0]), "z": format_fraction(yz[1])})
        if got != yz:
            failures.append({
                "location": {"m": 6 * i},
                "lhs": "undefined" if state is UNDEFINED else state.to_json(),
                "rhs": claw_labeling(*yz).to_json(),
            })
    if failures:
        for w in failures:
            w.setdefault("poset", "claw")
            w.setdefault("ring", "mat:2")
            w.setdefault("labeling", f.to_json())
    return Verdict.from_failures(name, failures, R6=iterates[0] if iterates else None, iterates=iterates)


# ---------------------------------------------------------------------------
# tropical


def tropical_periodicity(cfg: TrialConfig) -> Verdict:
    """``R^{p+q} f == f`` over the max-plus semiring."""
    p, q = _require_rect(cfg, "tropical periodicity")
    if cfg.ring.descriptor.kind != "tropical_max_plus":
        raise StructureError("tropical_periodicity needs the trop ring")
    period = p + q

    def trial(f: Labeling) -> Verdict:
        orbit = Orbit(f)
        stop = _walk(orbit, period)
        if stop:
            return stop
        last = orbit[period]
        ext = f.ext
        return _compare(f.ring, (
            ({"element": ext.name(v), "l": period}, last.values[v], f.values[v]) for v in ext.elements()
        ))

    return _run("tropical_periodicity", cfg, trial)


# ---------------------------------------------------------------------------
# structural properties


def verify_extension_independence(cfg: TrialConfig, explicit: bool = False, cap: int = 100_000) -> Verdict:
    """Rowmotion along every linear extension agrees with the canonical one.

    By default every extension is covered through the up-set lattice; with
    ``explicit`` each extension (up to ``cap``) is run separately.
    """
    if not explicit:
        out = _run("extension_independence", cfg, check_extension_independence)
        out.detail["method"] = "up-set lattice"
        return out
    exts, truncated = cfg.poset.all_linear_extensions(cap)

    def trial(f: Labeling) -> Verdict:
        ref = rowmotion(f)
        failures = []
        for ext_order in exts:
            other = rowmotion_via_extension(f, ext_order)
            if other != ref and not (other is UNDEFINED and ref is UNDEFINED):
                failures.append({
                    "location": {"extension": [f.poset.names[v] for v in ext_order]},
                    "lhs": "undefined" if other is UNDEFINED else other.to_json(),
                    "rhs": "undefined" if ref is UNDEFINED else ref.to_json(),
                })
        return Verdict.from_failures("", failures)

    out = _run("extension_independence", cfg, trial)
    out.detail.update({"method": "explicit", "extensions": len(exts), "truncated": truncated})
    return out


def verify_toggle_commutation(cfg: TrialConfig, pairs: int = 200) -> Verdict:
    """Toggles at incomparable elements commute; pairs are drawn per trial."""
    P = cfg.poset
    candidates = [(v, w) for v in range(P.n) for w in range(v + 1, P.n) if not P.comparable(v, w)]
    if not candidates:
        return Verdict.not_applicable("toggle_commutation", "no incomparable pairs")

    rng = SplitMix64(cfg.seed)

    def trial(f: Labeling) -> Verdict:
        vs = [toggle_commutes(f, *candidates[rng.randint(0, len(candidates) - 1)]) for _ in range(pairs)]
        return combine("", vs)

    return _run("toggle_commutation", cfg, trial)


def verify_well_definedness(cfg: TrialConfig) -> Verdict:
    return _run("well_definedness", cfg, check_well_definedness)


def verify_normalize_bottom(cfg: TrialConfig) -> Verdict:
    return _run("normalize_bottom", cfg, check_normalize_bottom)


def verify_implicit_recurrence(cfg: TrialConfig) -> Verdict:
    steps = cfg.iterations(3)

    def trial(f: Labeling) -> Verdict:
        orbit = Orbit(f)
        return combine("", [
            check_implicit_recurrence(orbit, l, v)
            for l in range(steps)
            for v in f.ext.elements()
            if v < f.poset.n
        ])

    return _run("implicit_recurrence", cfg, trial)


def verify_sum_inverse(ring: Union[str, Ring], seed: int = 0, count: int = 1000, bound: int = 9) -> Verdict:
    """The sum-inverse identities on ``count`` seeded pairs."""
    if isinstance(ring, str):
        ring = parse_ring(ring)
    rng = SplitMix64(seed)
    verdicts = []
    for k in range(count):
        x, y = ring.draw(rng, bound), ring.draw(rng, bound)
        v = check_sum_inverse_identity(x, y)
        for w in v.failures:
            w.update({"ring": ring.descriptor.spec, "seed": seed, "pair": k})
        verdicts.append(v)
    return combine("sum_inverse", verdicts)


# ---------------------------------------------------------------------------
# slack sweeps


def verify_slacks(cfg: TrialConfig) -> Verdict:
    """Path-sum agreement, recursions, transition, label recovery and
    slack invertibility for every iterate up to the horizon."""
    P = cfg.poset
    horizon = cfg.iterations(sum(P.params) if P.family == "rect" else 4)

    def trial(f: Labeling) -> Verdict:
        orbit = Orbit(f)
        stop = _walk(orbit, horizon + 1)
        if stop:
            return stop
        table = SlackTable(orbit)
        ext = table.ext
        comparable = [(u, v) for u in ext.elements() for v in ext.elements() if ext.leq(v, u)]
        vs = []
        for l in range(horizon + 1):
            vs.append(check_path_sum_agreement(table, l, comparable))
            vs.extend(check_slack_recursions(table, s, t, l) for s, t in comparable if s != t)
            vs.append(check_path_formulas(table, l))
            if l >= 1:
                vs.append(check_transition(table, l, comparable))
                vs.append(check_slack_invertibility(table, l))
            if P.family == "rect" and l >= 1:
                p, q = P.params
                vs.extend(check_four_neighbors(table, i, j, l) for i in range(1, p) for j in range(1, q))
        return combine("", vs)

    return _run("slacks", cfg, trial)


def verify_conversion(cfg: TrialConfig) -> Verdict:
    """Conversion lemma, jump-path claims and the matrix form for all valid
    (k, i, l) and all matrix powers up to the rank span."""
    p, q = _require_rect(cfg, "conversion")
    horizon = cfg.iterations(p + q)

    def trial(f: Labeling) -> Verdict:
        orbit = Orbit(f)
        stop = _walk(orbit, horizon + 1)
        if stop:
            return stop
        table = SlackTable(orbit)
        vs = []
        for l in range(1, horizon + 1):
            for k in range(2, p + 1):
                for i in range(2, p + 1):
                    vs.append(check_conversion(table, k, i, l))
                    vs.append(check_pathjump_claims(table, k, i, l))
            vs.extend(check_matrix_conversion(table, l, k) for k in range(p + q))
        return combine("", vs)

    return _run("conversion", cfg, trial)
