"""Growth functions and weight tables.

A growth function phi is continuous, increasing, positive, and dominates every
polynomial.  Built-in families carry closed-form certificates: given (d, C)
they produce a radius R with a *proof obligation that can be re-checked*,
namely  phi(r) >= C * r^d  for all r >= R.  Weight tables are built
inductively along a monotone enumeration so that the order condition
(every covering pair K' <= K has weight(K') <= weight(K)) holds and each
index k carries a radius splitting the plane into the near-ball branch
(monomial sup against weight * phi(0)) and the tail branch (2^-k * phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .multiindex import MultiIndex, deglex_rank, deglex_unrank, prime_rank, prime_unrank
from .rational import (
    QC,
    CertificateError,
    abs_upper,
    exp_lower,
    format_fraction,
    ln_bounds,
    parse_fraction,
    pow_frac_lower,
    sqrt_upper,
)


# ---------------------------------------------------------------------------
# growth functions
# ---------------------------------------------------------------------------


class GrowthFunction:
    """Interface: certified lower evaluation + polynomial-domination radii."""

    tag: str = "abstract"
    phi0: Fraction = Fraction(1)

    def lower_bound(self, r: Fraction) -> Fraction:
        raise NotImplementedError

    def value_float(self, r: float) -> float:
        raise NotImplementedError

    def certify_domination(self, d: int, const: Fraction, radius: Fraction) -> bool:
        """True only if phi(r) >= const * r^d is proven for all r >= radius."""
        raise NotImplementedError

    def dominating_radius(self, d: int, const: Fraction) -> Fraction:
        """Smallest certified radius found by doubling + bisection."""
        const = Fraction(const)
        hi = Fraction(1)
        for _ in range(600):
            if self.certify_domination(d, const, hi):
                break
            hi *= 2
        else:
            raise CertificateError(
                f"{self.tag}: no domination radius for degree {d}, "
                f"constant {format_fraction(const)}")
        lo = hi / 2 if hi > 1 else Fraction(0)
        # bisect to ~1% relative width; hi stays certified throughout
        while hi - lo > hi / 128:
            mid = (lo + hi) / 2
            if self.certify_domination(d, const, mid):
                hi = mid
            else:
                lo = mid
        return hi


class ExpPowerGrowth(GrowthFunction):
    """phi(r) = exp(c * r^beta), rational c > 0, beta = p/q in (0, 1]."""

    def __init__(self, c: Fraction, beta: Fraction):
        c, beta = Fraction(c), Fraction(beta)
        if c <= 0 or not (0 < beta <= 1):
            raise ValueError("need c > 0 and 0 < beta <= 1")
        self.c = c
        self.beta = beta
        self.tag = f"exp:{format_fraction(c)},{format_fraction(beta)}"
        self.phi0 = Fraction(1)

    def _rpow_lower(self, r: Fraction) -> Fraction:
        return pow_frac_lower(r, self.beta.numerator, self.beta.denominator)

    def lower_bound(self, r: Fraction) -> Fraction:
        r = Fraction(r)
        if r < 0:
            raise ValueError("radius must be >= 0")
        return exp_lower(self.c * self._rpow_lower(r))

    def value_float(self, r: float) -> float:
        return math.exp(float(self.c) * r ** float(self.beta))

    def certify_domination(self, d: int, const: Fraction, radius: Fraction) -> bool:
        const, radius = Fraction(const), Fraction(radius)
        if radius <= 0:
            return False
        # monotone region: c*beta*r^beta >= d for r >= radius
        p, q = self.beta.numerator, self.beta.denominator
        if radius**p < (Fraction(d) / (self.c * self.beta)) ** q:
            return False
        return self.lower_bound(radius) >= const * radius**d


class ExpLogSquaredGrowth(GrowthFunction):
    """phi(r) = exp(c * ln(1+r)^2), rational c > 0."""

    def __init__(self, c: Fraction):
        c = Fraction(c)
        if c <= 0:
            raise ValueError("need c > 0")
        self.c = c
        self.tag = f"explog2:{format_fraction(c)}"
        self.phi0 = Fraction(1)

    def lower_bound(self, r: Fraction) -> Fraction:
        r = Fraction(r)
        if r < 0:
            raise ValueError("radius must be >= 0")
        llo = ln_bounds(1 + r)[0]
        return exp_lower(self.c * llo * llo)

    def value_float(self, r: float) -> float:
        return math.exp(float(self.c) * math.log1p(r) ** 2)

    def certify_domination(self, d: int, const: Fraction, radius: Fraction) -> bool:
        const, radius = Fraction(const), Fraction(radius)
        if radius < 1:
            return False
        llo = ln_bounds(1 + radius)[0]
        # need h(L) = c L^2 - d L - ln(const) >= 0 on L >= llo,
        # increasing there; ln r <= ln(1+r) = L covers the r^d factor.
        if llo < Fraction(d) / (2 * self.c):
            return False
        lnc_plus = ln_bounds(const)[1] if const > 1 else Fraction(0)
        return self.c * llo * llo - d * llo - lnc_plus >= 0


class UserTableGrowth(GrowthFunction):
    """Sampled phi with explicit, caller-supplied domination certificates.

    Refuses any (d, C) request not covered by a certificate; never guesses.
    """

    def __init__(self, samples: List[Tuple[Fraction, Fraction]],
                 certificates: List[Tuple[int, Fraction, Fraction]],
                 name: str = "user"):
        samples = sorted((Fraction(r), Fraction(v)) for r, v in samples)
        if not samples or samples[0][0] != 0:
            raise ValueError("user table must include a sample at r = 0")
        for (r1, v1), (r2, v2) in zip(samples, samples[1:]):
            if v2 < v1:
                raise ValueError(f"user table not increasing at r = {r2}")
        self.samples = samples
        self.certificates = [(int(d), Fraction(c), Fraction(r))
                             for d, c, r in certificates]
        for d, c, r0 in self.certificates:
            for rs, vs in samples:
                if rs >= r0 and vs < c * rs**d:
                    raise ValueError(
                        f"table sample at r={format_fraction(rs)} contradicts "
                        f"certificate (d={d}, C={format_fraction(c)})")
        self.tag = f"table:{name}"
        self.phi0 = samples[0][1]

    def lower_bound(self, r: Fraction) -> Fraction:
        r = Fraction(r)
        best = None
        for rs, vs in self.samples:
            if rs <= r:
                best = vs
        if best is None:
            raise ValueError("radius below table range")
        return best

    def value_float(self, r: float) -> float:
        return float(self.lower_bound(Fraction(r).limit_denominator(10**9)))

    def certify_domination(self, d: int, const: Fraction, radius: Fraction) -> bool:
        const, radius = Fraction(const), Fraction(radius)
        return any(dc >= d and cc >= const and radius >= max(rc, 1)
                   for dc, cc, rc in self.certificates)

    def dominating_radius(self, d: int, const: Fraction) -> Fraction:
        const = Fraction(const)
        usable = [max(rc, Fraction(1)) for dc, cc, rc in self.certificates
                  if dc >= d and cc >= const]
        if not usable:
            raise CertificateError(
                f"user table lacks a domination certificate for degree {d}, "
                f"constant {format_fraction(const)}")
        return min(usable)


def parse_growth(spec: str) -> GrowthFunction:
    """Parse CLI growth specs: 'exp:c,beta' or 'explog2:c'."""
    kind, _, rest = spec.partition(":")
    if kind == "exp":
        c_s, _, b_s = rest.partition(",")
        return ExpPowerGrowth(parse_fraction(c_s), parse_fraction(b_s or "1"))
    if kind == "explog2":
        return ExpLogSquaredGrowth(parse_fraction(rest))
    raise ValueError(f"unknown growth spec {spec!r} (use exp:c,beta or explog2:c)")


# ---------------------------------------------------------------------------
# monomial bounds on Euclidean balls
# ---------------------------------------------------------------------------


def monomial_sphere_coefficient(k: MultiIndex) -> Fraction:
    """Upper bound a with |z^K|/K! <= a * ||z||^|K| for all z."""
    d = k.degree()
    if d == 0:
        return Fraction(1)
    prod = Fraction(1)
    for _, e in k.entries:
        prod *= Fraction(e, d) ** e
    return sqrt_upper(prod) / k.factorial_product()


def monomial_sup_on_ball(k: MultiIndex, radius: Fraction) -> Fraction:
    """Certified upper bound for sup_{||z|| <= R} |z^K| / K!.

    The maximizer puts |z_i|^2 = (k_i/|K|) R^2, so the exact value is
    R^|K| * prod (k_i/|K|)^(k_i/2) / K!; rounding of the square root is upward.
    """
    radius = Fraction(radius)
    if radius <= 0:
        raise ValueError("radius must be > 0")
    d = k.degree()
    if d == 0:
        return Fraction(1)
    return monomial_sphere_coefficient(k) * radius**d


# ---------------------------------------------------------------------------
# weight tables
# ---------------------------------------------------------------------------


@dataclass
class WeightEntry:
    index: MultiIndex
    weight: Fraction
    radius: Optional[Fraction] = None


class WeightTable:
    """Ordered (index, weight, radius) rows along a monotone enumeration."""

    def __init__(self, entries: List[WeightEntry], enum: str = "deglex",
                 n: Optional[int] = None, phi_tag: Optional[str] = None):
        if enum not in ("deglex", "prime"):
            raise ValueError("enum must be 'deglex' or 'prime'")
        self.entries = entries
        self.enum = enum
        self.n = n
        self.phi_tag = phi_tag
        self._pos: Dict[MultiIndex, int] = {e.index: i for i, e in enumerate(entries)}

    def __len__(self):
        return len(self.entries)

    @property
    def horizon(self) -> int:
        return len(self.entries)

    def __contains__(self, k: MultiIndex) -> bool:
        return k in self._pos

    def rank(self, k: MultiIndex) -> int:
        """1-based rank of an index in the table."""
        return self._pos[k] + 1

    def weight(self, k: MultiIndex) -> Fraction:
        try:
            return self.entries[self._pos[k]].weight
        except KeyError:
            raise KeyError(f"index {k!r} outside weight-table horizon") from None

    def radius(self, k: MultiIndex) -> Optional[Fraction]:
        return self.entries[self._pos[k]].radius

    def unrank(self, m: int) -> MultiIndex:
        return self.entries[m - 1].index

    def to_json(self) -> dict:
        rows = []
        for e in self.entries:
            row = {"idx": e.index.to_json()["idx"], "v": format_fraction(e.weight)}
            if e.radius is not None:
                row["R"] = format_fraction(e.radius)
            rows.append(row)
        out = {"version": 1, "enum": self.enum, "entries": rows}
        if self.n is not None:
            out["n"] = self.n
        if self.phi_tag is not None:
            out["phi"] = self.phi_tag
        return out

    @staticmethod
    def from_json(obj: dict) -> "WeightTable":
        entries = [WeightEntry(MultiIndex(tuple((p, e) for p, e in row["idx"])),
                               parse_fraction(row["v"]),
                               parse_fraction(row["R"]) if "R" in row else None)
                   for row in obj["entries"]]
        return WeightTable(entries, obj["enum"], obj.get("n"), obj.get("phi"))


def enumeration_fns(enum: str, n: Optional[int]):
    if enum == "deglex":
        if n is None:
            raise ValueError("deglex enumeration needs a dimension")
        return (lambda m: deglex_unrank(m, n)), (lambda k: deglex_rank(k, n))
    return prime_unrank, prime_rank


def build_slow_growth_weight(phi: GrowthFunction, enum: str, horizon: int,
                             n: Optional[int] = None) -> WeightTable:
    """Inductive weight/radius construction along a monotone enumeration.

    For rank k with index K (degree d): R_k certifies
    phi(r) >= 2^k * sup-coefficient(K) * r^d for r >= R_k, and
    v_k = max( sup_{||z||<=R_k} |Z^K/K!| / phi(0), 2^-k, v_{k-1} ).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    unrank, _ = enumeration_fns(enum, n)
    entries: List[WeightEntry] = []
    prev = Fraction(0)
    for k in range(1, horizon + 1):
        idx = unrank(k)
        coef = monomial_sphere_coefficient(idx)
        radius = phi.dominating_radius(idx.degree(), Fraction(2) ** k * coef)
        ball = monomial_sup_on_ball(idx, radius)
        v = max(ball / phi.phi0, Fraction(1, 2**k), prev)
        entries.append(WeightEntry(idx, v, radius))
        prev = v
    return WeightTable(entries, enum, n, phi.tag)


def check_order_condition(table: WeightTable):
    """Covering-pair scan: weight(K - e_s) <= weight(K) for stored pairs.

    Returns (True, None) or (False, (K_pred, K)) at the first violation.
    """
    for e in table.entries:
        for pos, _ in e.index.entries:
            pred = e.index.step(pos, -1)
            if pred is not None and pred in table:
                if table.weight(pred) > e.weight:
                    return False, (pred, e.index)
    return True, None


def build_quasiconjugate_weight(
        v_table: WeightTable,
        column_fn: Callable[[MultiIndex], Dict[MultiIndex, QC]]) -> WeightTable:
    """Weight w making a sparse map F: l1(w) -> l1(v) a contraction.

    w_K = (certified upper bound of sum_J |a_K^J| v_J) + 1, then raised along
    first-index chains so w is nondecreasing in the first slot.
    """
    entries: List[WeightEntry] = []
    w_of: Dict[MultiIndex, Fraction] = {}
    for e in v_table.entries:
        col = column_fn(e.index)
        total = Fraction(0)
        for j, a in col.items():
            if j not in v_table:
                raise ValueError(
                    f"column of {e.index!r} leaves the weight-table horizon at {j!r}")
            total += abs_upper(a) * v_table.weight(j)
        w = total + 1
        pred = e.index.step(1, -1)
        if pred is not None and pred in w_of:
            w = max(w, w_of[pred])
        w_of[e.index] = w
        entries.append(WeightEntry(e.index, w, None))
    return WeightTable(entries, v_table.enum, v_table.n, None)
