"""Compression factors, the retraction theta, and interleaving certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from umapstab._numeric import dedup_sorted, leq, lt, serialize
from umapstab.epmetric import EpMetric, global_components, restrict
from umapstab.errors import DomainError, ParameterError, PreconditionError, StructuralError
from umapstab.neighborhood import NeighborhoodSystem, inclusion_compatible, umap_metric
from umapstab.rips import components_at, critical_values, wedge_components_at, wedge_edges

__all__ = [
    "InclusionData",
    "ScaleRecord",
    "InterleavingCertificate",
    "compression_factor",
    "covering_radius",
    "theta_map",
    "verify_poset_interleaving",
    "umap_stability_certificate",
    "umap_stability_certificates",
]

RADIUS_NOTE = (
    "covering hypothesis stated with strict '<' (and '<=' elsewhere); "
    "verified with '<=' at r = max_y min_x d(y, i(x))"
)


@dataclass(frozen=True, eq=False)
class InclusionData:
    """An injection of identifiers between two finite metric spaces.

    If either side is exact both sides are converted to exact arithmetic.
    """

    source: EpMetric
    target: EpMetric
    mapping: Mapping

    def __post_init__(self):
        src, tgt = self.source, self.target
        if src.exact != tgt.exact:
            src, tgt = src.to_exact(), tgt.to_exact()
        mapping = {str(a): str(b) for a, b in self.mapping.items()}
        missing = [p for p in src.points if p not in mapping]
        if missing:
            raise StructuralError(f"inclusion is undefined on {missing}")
        extra = set(mapping) - set(src.points)
        if extra:
            raise StructuralError(f"inclusion names unknown source points {sorted(extra)}")
        if len(set(mapping.values())) != len(mapping):
            raise StructuralError("inclusion is not injective")
        for b in mapping.values():
            tgt.index(b)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "target", tgt)
        object.__setattr__(self, "mapping", mapping)

    @property
    def exact(self):
        return self.source.exact

    def image_index(self, x) -> int:
        return self.target.index(self.mapping[x])

    def morphism_violations(self) -> list:
        """Pairs ``(x, y)`` with ``d_Y(i x, i y) > d_X(x, y)``."""
        pts = self.source.points
        dx, dy = self.source.dist, self.target.dist
        img = [self.image_index(p) for p in pts]
        out = []
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                if not leq(dy[img[a], img[b]], dx[a, b], self.exact):
                    out.append((pts[a], pts[b]))
        return out


def _one(exact):
    return Fraction(1) if exact else 1.0


def compression_factor(inc: InclusionData):
    """Largest ratio ``d_X(x, y) / d_Y(i x, i y)`` over distinct pairs; 1 for fewer than two points."""
    bad = inc.morphism_violations()
    if bad:
        raise DomainError(f"inclusion is not distance non-increasing on {bad}")
    pts = inc.source.points
    img = [inc.image_index(p) for p in pts]
    dx, dy = inc.source.dist, inc.target.dist
    best = _one(inc.exact)
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            num, den = dx[a, b], dy[img[a], img[b]]
            if math.isinf(num) or math.isinf(den) or den == 0:
                raise DomainError(
                    f"pair ({pts[a]}, {pts[b]}) has distances {num} -> {den}; both sides must be metric spaces"
                )
            ratio = num / den
            if ratio > best:
                best = ratio
    return best


def covering_radius(inc: InclusionData):
    """``max_y min_x d_Y(y, i x)`` over the target."""
    img = [inc.image_index(p) for p in inc.source.points]
    dy = inc.target.dist
    r = None
    for y in range(len(inc.target)):
        near = min(dy[y, j] for j in img)
        if r is None or near > r:
            r = near
    if math.isinf(r):
        raise DomainError("some target point is at infinite distance from the image")
    return r


def _nearest_theta(inc: InclusionData) -> dict:
    src, tgt = inc.source, inc.target
    img = [inc.image_index(p) for p in src.points]
    back = {j: a for a, j in enumerate(img)}
    dy = tgt.dist
    theta = {}
    for y in range(len(tgt)):
        if y in back:
            theta[tgt.points[y]] = src.points[back[y]]
            continue
        best = 0
        for a in range(1, len(img)):
            if lt(dy[y, img[a]], dy[y, img[best]], inc.exact):
                best = a
        theta[tgt.points[y]] = src.points[best]
    return theta


def theta_map(inc: InclusionData, r=None) -> dict:
    """Retraction ``theta: Y -> X`` with ``theta(i x) = x`` and ``theta(y)`` a nearest preimage.

    Ties go to the earliest source point.  ``r`` below the covering radius is
    rejected.
    """
    if r is not None:
        rstar = covering_radius(inc)
        if lt(r, rstar, inc.exact):
            raise ParameterError(f"r={r} is below the covering radius {rstar}")
    return _nearest_theta(inc)


@dataclass
class ScaleRecord:
    s: object
    shifted: object
    upper_ok: bool
    lower_ok: bool
    transport_ok: bool
    excision_ok: bool | None = None
    colimit_upper_ok: bool | None = None
    colimit_lower_ok: bool | None = None

    @property
    def ok(self):
        flags = [self.upper_ok, self.lower_ok, self.transport_ok]
        flags += [f for f in (self.excision_ok, self.colimit_upper_ok, self.colimit_lower_ok) if f is not None]
        if self.colimit_upper_ok is not None:
            flags.append(self.colimit_upper_ok == self.upper_ok and self.colimit_lower_ok == self.lower_ok)
        return all(flags)


@dataclass
class InterleavingCertificate:
    """Evidence that the shifted maps ``i`` and ``theta`` interleave two hierarchies."""

    m: object
    r: object
    r_star: object
    theta: dict
    scales: list
    section_ok: bool
    radius_ok: bool
    bound_ok: bool
    exact: bool = False
    source_points: tuple = ()
    target_points: tuple = ()
    failures: list = field(default_factory=list)
    notes: tuple = (RADIUS_NOTE,)

    @property
    def verdict(self) -> bool:
        return self.section_ok and self.radius_ok and self.bound_ok and all(rec.ok for rec in self.scales)

    def __bool__(self):
        return self.verdict

    def to_dict(self) -> dict:
        ser = lambda v: serialize(v, self.exact)  # noqa: E731
        scales = []
        for rec in self.scales:
            row = {
                "s": ser(rec.s),
                "shifted": ser(rec.shifted),
                "upper_ok": rec.upper_ok,
                "lower_ok": rec.lower_ok,
                "transport_ok": rec.transport_ok,
                "excision_ok": rec.excision_ok,
            }
            if rec.colimit_upper_ok is not None:
                row["colimit_upper_ok"] = rec.colimit_upper_ok
                row["colimit_lower_ok"] = rec.colimit_lower_ok
            scales.append(row)
        return {
            "m": ser(self.m),
            "r": ser(self.r),
            "r_star": ser(self.r_star),
            "theta": dict(sorted(self.theta.items())),
            "source_points": list(self.source_points),
            "target_points": list(self.target_points),
            "section_ok": self.section_ok,
            "radius_ok": self.radius_ok,
            "bound_ok": self.bound_ok,
            "scales": scales,
            "failures": list(self.failures),
            "notes": list(self.notes),
            "verdict": self.verdict,
        }


def _lookup(partition) -> dict:
    return {p: k for k, block in enumerate(partition) for p in block}


def _pi0_triangles(inc, theta, part_src, part_tgt, s, t):
    """pi_0 diagram at scales ``s -> t``; returns ``(upper_ok, lower_ok, failures)``.

    ``part_src(u)`` / ``part_tgt(u)`` give partitions of the source / target at
    scale ``u``.
    """
    fails = []
    src_s, src_t = _lookup(part_src(s)), _lookup(part_src(t))
    tgt_s, tgt_t = _lookup(part_tgt(s)), _lookup(part_tgt(t))
    i = inc.mapping
    # i_* is well defined on blocks
    seen = {}
    for x in inc.source.points:
        b = seen.setdefault(src_s[x], tgt_s[i[x]])
        if b != tgt_s[i[x]]:
            fails.append(f"i does not respect blocks at s={s} ({x})")
    # theta_* is well defined from scale s to scale t
    seen = {}
    for y in inc.target.points:
        b = seen.setdefault(tgt_s[y], src_t[theta[y]])
        if b != src_t[theta[y]]:
            fails.append(f"theta does not respect blocks at s={s} ({y})")
    theta_ok = not fails
    upper = theta_ok and all(src_t[theta[i[x]]] == src_t[x] for x in inc.source.points)
    lower = theta_ok and all(tgt_t[i[theta[y]]] == tgt_t[y] for y in inc.target.points)
    if not upper:
        fails.append(f"upper triangle fails at s={s}")
    if not lower:
        fails.append(f"lower triangle fails at s={s}")
    return upper, lower, fails


def _poset_scale(inc, theta, s, t):
    """Poset-level checks at one scale: transport of simplices, inclusion, contiguity."""
    exact = inc.exact
    src, tgt = inc.source, inc.target
    dx, dy = src.dist, tgt.dist
    n = len(tgt)
    th = [src.index(theta[y]) for y in tgt.points]
    ith = [inc.image_index(theta[y]) for y in tgt.points]
    transport = True
    contiguous = True
    for a in range(n):
        for b in range(a, n):
            if not leq(dy[a, b], s, exact):
                continue
            if not leq(dx[th[a], th[b]], t, exact):
                transport = False
            # sigma ∪ i theta(sigma) must itself be a simplex at scale t
            group = (a, b, ith[a], ith[b])
            if any(not leq(dy[u, v], t, exact) for u in group for v in group):
                contiguous = False
    img = [inc.image_index(p) for p in src.points]
    includes = all(
        leq(dy[img[a], img[b]], s, exact)
        for a in range(len(src))
        for b in range(a + 1, len(src))
        if leq(dx[a, b], s, exact)
    )
    return transport, includes, contiguous


def _default_scales(crit_lists, m, r, exact):
    base = set()
    for c in crit_lists:
        base.update(c)
    base.add(Fraction(0) if exact else 0.0)
    shifted = {m * (s + 2 * r) for s in base}
    vals = sorted(base | shifted)
    return vals if exact else dedup_sorted(vals, exact=False)


def _certificate_core(inc, s_values, r, theta):
    exact = inc.exact
    m = compression_factor(inc)
    r_star = covering_radius(inc)
    if r is None:
        r = r_star
    elif exact:
        r = Fraction(r) if not isinstance(r, Fraction) else r
    theta = dict(theta) if theta is not None else _nearest_theta(inc)
    for y in inc.target.points:
        if y not in theta:
            raise StructuralError(f"theta is undefined on {y}")
        inc.source.index(theta[y])
    failures = []
    section_ok = all(theta[inc.mapping[x]] == x for x in inc.source.points)
    if not section_ok:
        failures.append("theta is not a retraction of i")
    dy, dx = inc.target.dist, inc.source.dist
    tgt = inc.target.points
    radius_ok = all(leq(dy[inc.target.index(y), inc.image_index(theta[y])], r, exact) for y in tgt)
    if not radius_ok:
        failures.append(f"some d(y, i theta y) exceeds r={r}")
    th = [inc.source.index(theta[y]) for y in tgt]
    bound_ok = all(
        leq(dx[th[a], th[b]], m * (dy[a, b] + 2 * r), exact) for a in range(len(tgt)) for b in range(a + 1, len(tgt))
    )
    if not bound_ok:
        failures.append("pairwise bound d(theta y1, theta y2) <= m (d(y1, y2) + 2r) fails")
    if s_values is None:
        s_values = _default_scales([critical_values(inc.source), critical_values(inc.target)], m, r, exact)
    return m, r, r_star, theta, section_ok, radius_ok, bound_ok, list(s_values), failures


def verify_poset_interleaving(inc: InclusionData, s_values=None, *, r=None, theta=None) -> InterleavingCertificate:
    """Check the interleaving of ``P_s(X)`` and ``P_s(Y)`` through ``i`` and ``theta``.

    At each scale ``s`` with ``t = m (s + 2r)``: simplices of ``Y`` at ``s`` go
    to simplices of ``X`` at ``t`` under ``theta``; ``i`` preserves simplices;
    ``sigma ∪ i theta(sigma)`` is a simplex at ``t`` for every edge ``sigma``;
    and the pi_0 triangles commute.  ``r`` and ``theta`` may be overridden,
    which is how faulty inputs are exercised.
    """
    m, r, r_star, theta, section_ok, radius_ok, bound_ok, s_values, failures = _certificate_core(inc, s_values, r, theta)
    records = []
    for s in s_values:
        t = m * (s + 2 * r)
        transport, includes, contiguous = _poset_scale(inc, theta, s, t)
        upper, lower, fails = _pi0_triangles(
            inc, theta, lambda u: components_at(inc.source, u), lambda u: components_at(inc.target, u), s, t
        )
        failures.extend(fails)
        if not transport:
            failures.append(f"theta does not transport simplices at s={s}")
        if not includes:
            failures.append(f"i does not preserve simplices at s={s}")
        if not contiguous:
            failures.append(f"sigma ∪ i theta(sigma) exceeds scale {t} at s={s}")
        records.append(ScaleRecord(s, t, upper and includes and section_ok, lower and contiguous, transport))
    return InterleavingCertificate(
        m, r, r_star, theta, records, section_ok, radius_ok, bound_ok, inc.exact,
        inc.source.points, inc.target.points, failures,
    )


def _restricted(partition, block):
    members = set(block)
    out = []
    for b in partition:
        kept = tuple(p for p in b if p in members)
        if kept:
            out.append(kept)
    return tuple(out)


def umap_stability_certificate(
    nsX: NeighborhoodSystem,
    nsY: NeighborhoodSystem,
    mapping: Mapping,
    component,
    *,
    r=None,
    theta=None,
) -> InterleavingCertificate:
    """Interleaving of the clusters of ``V(X, N)`` on the global component of ``component``.

    ``component`` is any point of ``X``; ``E`` is its global component in the
    colimit metric of ``nsX`` and ``F`` the global component of ``nsY`` that
    receives ``i(E)``.  The pi_0 triangles are checked on the glued star
    systems restricted to ``E`` and ``F`` and, separately, on the Rips systems
    of the colimit metrics; the two must agree and their partitions must
    coincide at every tested scale.
    """
    if nsX.exact != nsY.exact:
        nsX, nsY = nsX.to_exact(), nsY.to_exact()
    compat = inclusion_compatible(nsX, nsY, mapping)
    if not compat:
        raise PreconditionError("inclusion is incompatible with the neighbourhood systems", compat.violations)
    mapping = {str(a): str(b) for a, b in mapping.items()}
    D, D2 = umap_metric(nsX), umap_metric(nsY)
    E = global_components(D).block_of(str(component))
    F = global_components(D2).block_of(mapping[E[0]])
    outside = [x for x in E if mapping[x] not in F]
    if outside:
        raise PreconditionError("i(E) is not contained in one global component", outside)
    Em, Fm = restrict(D, E), restrict(D2, F)
    inc = InclusionData(Em, Fm, {x: mapping[x] for x in E})
    bad = inc.morphism_violations()
    if bad:
        raise PreconditionError("induced map of colimit metrics is not distance non-increasing", bad)
    exact = inc.exact
    m = compression_factor(inc)
    r_eff = covering_radius(inc) if r is None else r
    E_set, F_set = set(E), set(F)
    star_vals = [w for w, u, v, _ in wedge_edges(nsX) if nsX.points[u] in E_set]
    star_vals += [w for w, u, v, _ in wedge_edges(nsY) if nsY.points[u] in F_set]
    s_values = _default_scales([critical_values(Em), critical_values(Fm), star_vals], m, r_eff, exact)
    m, r, r_star, theta, section_ok, radius_ok, bound_ok, s_values, failures = _certificate_core(
        inc, s_values, r, theta
    )

    cache = {}

    def parts(kind, u):
        key = (kind, u)
        if key not in cache:
            if kind == "wX":
                cache[key] = _restricted(wedge_components_at(nsX, u), E)
            elif kind == "wY":
                cache[key] = _restricted(wedge_components_at(nsY, u), F)
            elif kind == "cX":
                cache[key] = components_at(Em, u)
            else:
                cache[key] = components_at(Fm, u)
        return cache[key]

    records = []
    for s in s_values:
        t = m * (s + 2 * r)
        transport, includes, contiguous = _poset_scale(inc, theta, s, t)
        w_up, w_low, w_fails = _pi0_triangles(inc, theta, lambda u: parts("wX", u), lambda u: parts("wY", u), s, t)
        c_up, c_low, c_fails = _pi0_triangles(inc, theta, lambda u: parts("cX", u), lambda u: parts("cY", u), s, t)
        excision = all(parts("w" + side, u) == parts("c" + side, u) for side in "XY" for u in (s, t))
        failures.extend(w_fails)
        failures.extend(f"colimit side: {f}" for f in c_fails)
        if not excision:
            failures.append(f"wedge and colimit partitions differ at s={s}")
        if not transport:
            failures.append(f"theta does not transport simplices at s={s}")
        records.append(
            ScaleRecord(
                s,
                t,
                upper_ok=w_up and includes and section_ok,
                lower_ok=w_low and contiguous,
                transport_ok=transport,
                excision_ok=excision,
                colimit_upper_ok=c_up and includes and section_ok,
                colimit_lower_ok=c_low and contiguous,
            )
        )
    return InterleavingCertificate(
        m, r, r_star, theta, records, section_ok, radius_ok, bound_ok, exact, tuple(E), tuple(F), failures
    )


def umap_stability_certificates(nsX, nsY, mapping, **kwargs) -> dict:
    """One certificate per global component of ``X``, keyed by its least point."""
    if nsX.exact != nsY.exact:
        nsX, nsY = nsX.to_exact(), nsY.to_exact()
    compat = inclusion_compatible(nsX, nsY, mapping)
    if not compat:
        raise PreconditionError("inclusion is incompatible with the neighbourhood systems", compat.violations)
    reps = global_components(umap_metric(nsX)).representatives
    return {rep: umap_stability_certificate(nsX, nsY, mapping, rep, **kwargs) for rep in reps}
