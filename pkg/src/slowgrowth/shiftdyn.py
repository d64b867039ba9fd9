"""Exact dynamics on finitely supported coefficient vectors.

Coefficient vectors index monomials Z^K/K! by sparse multi-indices; backward
shifts lower one slot, so any finite direction combination sum_s a_s B_s is
nilpotent on finite support and its exponential is an exact finite sum in
rational arithmetic.  That turns the translation/derivative identities into
decidable equalities, and topological-transitivity witnesses into small exact
linear solves that are re-verified by evaluation, never trusted from the
search path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

from .multiindex import MultiIndex, ZERO_INDEX
from .rational import QC, QC_ONE, abs_upper, sqrt_upper
from .weights import WeightTable

Direction = Dict[int, QC]  # position (1-based) -> complex rational, finite support


class CoeffVector:
    """Sparse map MultiIndex -> complex rational; zero values are dropped."""

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Dict[MultiIndex, QC]] = None):
        self.terms: Dict[MultiIndex, QC] = {}
        if terms:
            for k, val in terms.items():
                if not val.is_zero():
                    self.terms[k] = val

    @staticmethod
    def unit(k: MultiIndex, value: QC = QC_ONE) -> "CoeffVector":
        return CoeffVector({k: value})

    def is_zero(self) -> bool:
        return not self.terms

    def copy(self) -> "CoeffVector":
        return CoeffVector(dict(self.terms))

    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        out = dict(self.terms)
        for k, val in other.terms.items():
            s = out.get(k, QC()) + val
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return CoeffVector(out)

    def __sub__(self, other: "CoeffVector") -> "CoeffVector":
        return self + other.scale(QC(Fraction(-1)))

    def scale(self, factor: QC) -> "CoeffVector":
        if factor.is_zero():
            return CoeffVector()
        return CoeffVector({k: val * factor for k, val in self.terms.items()})

    def max_degree(self) -> int:
        return max((k.degree() for k in self.terms), default=0)

    def support(self) -> List[MultiIndex]:
        return list(self.terms)

    def get(self, k: MultiIndex) -> QC:
        return self.terms.get(k, QC())

    def to_json(self) -> dict:
        from .rational import format_fraction
        rows = []
        for k in sorted(self.terms, key=lambda x: (x.degree(), x.entries)):
            val = self.terms[k]
            rows.append({"idx": k.to_json()["idx"],
                         "re": format_fraction(val.re), "im": format_fraction(val.im)})
        return {"terms": rows}

    @staticmethod
    def from_json(obj: dict) -> "CoeffVector":
        from .rational import parse_fraction
        terms = {}
        for row in obj["terms"]:
            k = MultiIndex(tuple((p, e) for p, e in row["idx"]))
            terms[k] = QC(parse_fraction(row["re"]), parse_fraction(row.get("im", "0")))
        return CoeffVector(terms)

    def __eq__(self, other):
        return isinstance(other, CoeffVector) and self.terms == other.terms

    def __repr__(self):
        return f"CoeffVector({len(self.terms)} terms, deg<={self.max_degree()})"


@dataclass
class BlockVector:
    """m >= 1 coefficient vectors, one per target coordinate."""

    components: List[CoeffVector]

    def __post_init__(self):
        if not self.components:
            raise ValueError("block vector needs at least one component")

    @staticmethod
    def zero(m: int) -> "BlockVector":
        return BlockVector([CoeffVector() for _ in range(m)])

    def __add__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "BlockVector") -> "BlockVector":
        return BlockVector([a - b for a, b in zip(self.components, other.components)])

    def map(self, fn) -> "BlockVector":
        return BlockVector([fn(c) for c in self.components])

    def __len__(self):
        return len(self.components)


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def l1v_norm(vec: CoeffVector, table: WeightTable) -> Fraction:
    """Certified upper bound of sum_K v_K |alpha_K| (modulus rounded upward)."""
    total = Fraction(0)
    for k, val in vec.terms.items():
        if k not in table:
            raise ValueError(f"support index {k!r} outside weight-table horizon")
        total += table.weight(k) * abs_upper(val)
    return total


def block_l2_norm(block: BlockVector, table: WeightTable) -> Fraction:
    return sqrt_upper(sum(l1v_norm(c, table) ** 2 for c in block.components))


# ---------------------------------------------------------------------------
# shifts and exponentials
# ---------------------------------------------------------------------------


def shift_backward(vec: CoeffVector, s: int) -> CoeffVector:
    """B_s: result_K = alpha_{K with slot s incremented}."""
    out = {}
    for k, val in vec.terms.items():
        down = k.step(s, -1)
        if down is not None:
            out[down] = val
    return CoeffVector(out)


def apply_direction(a: Direction, vec: CoeffVector) -> CoeffVector:
    """(sum_s a_s B_s) applied once; lowers total degree by exactly one."""
    out: Dict[MultiIndex, QC] = {}
    for k, val in vec.terms.items():
        for s, coef in a.items():
            if coef.is_zero():
                continue
            down = k.step(s, -1)
            if down is None:
                continue
            cur = out.get(down, QC()) + val * coef
            if cur.is_zero():
                out.pop(down, None)
            else:
                out[down] = cur
    return CoeffVector(out)


def exp_shift(a: Direction, vec: CoeffVector) -> CoeffVector:
    """Exact e^{sum_s a_s B_s} vec; the series ends at the max total degree."""
    out = vec.copy()
    term = vec
    k = 0
    while not term.is_zero():
        k += 1
        term = apply_direction(a, term).scale(QC(Fraction(1, k)))
        out = out + term
    return out


def scale_direction(a: Direction, factor) -> Direction:
    f = factor if isinstance(factor, QC) else QC(Fraction(factor))
    return {s: val * f for s, val in a.items()}


def direction_from_list(values: Iterable[QC]) -> Direction:
    return {i + 1: v for i, v in enumerate(values) if not v.is_zero()}


# ---------------------------------------------------------------------------
# change of coordinates
# ---------------------------------------------------------------------------


def _poly_mul(p: Dict[MultiIndex, QC], q: Dict[MultiIndex, QC]) -> Dict[MultiIndex, QC]:
    out: Dict[MultiIndex, QC] = {}
    for k1, c1 in p.items():
        for k2, c2 in q.items():
            merged = dict(k1.entries)
            for pos, e in k2.entries:
                merged[pos] = merged.get(pos, 0) + e
            key = MultiIndex(merged.items())
            cur = out.get(key, QC()) + c1 * c2
            if cur.is_zero():
                out.pop(key, None)
            else:
                out[key] = cur
    return out


def _poly_pow(p: Dict[MultiIndex, QC], e: int) -> Dict[MultiIndex, QC]:
    out = {ZERO_INDEX: QC_ONE}
    for _ in range(e):
        out = _poly_mul(out, p)
    return out


class SparseLinearMap:
    """Column-sparse linear map on coefficient space, built lazily."""

    def __init__(self, column_fn, label: str = ""):
        self._column_fn = column_fn
        self._cache: Dict[MultiIndex, Dict[MultiIndex, QC]] = {}
        self.label = label

    def column(self, k: MultiIndex) -> Dict[MultiIndex, QC]:
        col = self._cache.get(k)
        if col is None:
            col = self._column_fn(k)
            self._cache[k] = col
        return col

    def apply(self, vec: CoeffVector) -> CoeffVector:
        out: Dict[MultiIndex, QC] = {}
        for k, val in vec.terms.items():
            for j, a in self.column(k).items():
                cur = out.get(j, QC()) + val * a
                if cur.is_zero():
                    out.pop(j, None)
                else:
                    out[j] = cur
        return CoeffVector(out)


def _substitution_column(sub: Dict[int, Dict[MultiIndex, QC]], k: MultiIndex
                         ) -> Dict[MultiIndex, QC]:
    """Coefficients of subs(U^K/K!) in the normalized monomial basis."""
    poly = {ZERO_INDEX: QC(Fraction(1, k.factorial_product()))}
    for pos, e in k.entries:
        expr = sub.get(pos, {MultiIndex([(pos, 1)]): QC_ONE})
        poly = _poly_mul(poly, _poly_pow(expr, e))
    return {j: c * j.factorial_product() for j, c in poly.items()}


def change_of_coordinates_map(a: Direction) -> Tuple[SparseLinearMap, SparseLinearMap]:
    """(F, F_inverse) for the linear substitution z_1 = a_1 u_1, z_i = a_i u_1 + u_i.

    F intertwines exactly: F o B_1 = (sum_s a_s B_s) o F on finite vectors.
    Requires a_1 != 0 (pre-permute coordinates otherwise).
    """
    a1 = a.get(1, QC())
    if a1.is_zero():
        raise ValueError("change of coordinates requires a nonzero first entry")
    # forward: U^K |-> expression in z, via u_1 = z_1/a_1, u_i = z_i - (a_i/a_1) z_1
    fwd_sub: Dict[int, Dict[MultiIndex, QC]] = {
        1: {MultiIndex([(1, 1)]): QC_ONE / a1}}
    for pos, coef in a.items():
        if pos != 1 and not coef.is_zero():
            fwd_sub[pos] = {MultiIndex([(pos, 1)]): QC_ONE,
                            MultiIndex([(1, 1)]): -(coef / a1)}
    # inverse: Z^K |-> expression in u, via z_1 = a_1 u_1, z_i = a_i u_1 + u_i
    inv_sub: Dict[int, Dict[MultiIndex, QC]] = {
        1: {MultiIndex([(1, 1)]): a1}}
    for pos, coef in a.items():
        if pos != 1 and not coef.is_zero():
            inv_sub[pos] = {MultiIndex([(pos, 1)]): QC_ONE,
                            MultiIndex([(1, 1)]): coef}
    fwd = SparseLinearMap(lambda k: _substitution_column(fwd_sub, k), "coord-change")
    inv = SparseLinearMap(lambda k: _substitution_column(inv_sub, k), "coord-change-inv")
    return fwd, inv


# ---------------------------------------------------------------------------
# transitivity witnesses
# ---------------------------------------------------------------------------


@dataclass
class WitnessResult:
    found: bool
    n: Optional[int] = None
    vector: Optional[BlockVector] = None
    residual_in: Optional[Fraction] = None
    residual_out: Optional[Fraction] = None
    attempts: int = 0
    best_residual: Optional[Fraction] = None


def _qc_solve(matrix: List[List[QC]], rhs: List[QC]) -> Optional[List[QC]]:
    """Exact Gaussian elimination over complex rationals; None if singular."""
    n = len(matrix)
    m = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not m[r][col].is_zero()), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = QC_ONE / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and not m[r][col].is_zero():
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def _group_by_tail(vec: CoeffVector) -> Dict[MultiIndex, Dict[int, QC]]:
    """Split a coefficient vector into first-index profiles per tail."""
    groups: Dict[MultiIndex, Dict[int, QC]] = {}
    for k, val in vec.terms.items():
        first = k.get(1)
        tail = MultiIndex([(p, e) for p, e in k.entries if p != 1])
        groups.setdefault(tail, {})[first] = val
    return groups


def _exp_first_shift_profile(profile: Dict[int, QC], n: int, row: int) -> QC:
    """Row entry of e^{n B_1} applied to a first-index profile."""
    out = QC()
    npow = QC_ONE
    fact = 1
    k = 0
    top = max(profile, default=-1)
    while row + k <= top:
        if k > 0:
            npow = npow * QC(Fraction(n))
            fact *= k
        val = profile.get(row + k)
        if val is not None:
            out = out + val * npow * QC(Fraction(1, fact))
        k += 1
    return out


def _assemble(tail: MultiIndex, first: int, val: QC) -> Tuple[MultiIndex, QC]:
    entries = list(tail.entries)
    if first:
        entries.append((1, first))
    return MultiIndex(entries), val


def _first_shift_correction(u_prof: Dict[int, QC], t_prof: Dict[int, QC],
                            n: int, width: int) -> Optional[Dict[int, QC]]:
    """Correction on slots width+1 .. 2*width+1 so that e^{nB1}(u+c) matches t
    exactly on slots 0..width.  Scaled exact solve; None if singular."""
    m0 = width + 1
    size = width + 1
    # scaled system: unknown ch_j = c_j * n^(m0+j); rows i: sum_j ch_j/(m0+j-i)! = rhs_i * n^i
    matrix = [[QC(Fraction(1, _fact(m0 + j - i))) for j in range(size)]
              for i in range(size)]
    rhs = []
    npow = Fraction(1)
    for i in range(size):
        want = t_prof.get(i, QC()) - _exp_first_shift_profile(u_prof, n, i)
        rhs.append(want * QC(npow))
        npow *= n
    sol = _qc_solve(matrix, rhs)
    if sol is None:
        return None
    out = {}
    for j, ch in enumerate(sol):
        if not ch.is_zero():
            out[m0 + j] = ch * QC(Fraction(1, Fraction(n) ** (m0 + j)))
    return out


_FACT_CACHE = [1]


def _fact(k: int) -> int:
    while len(_FACT_CACHE) <= k:
        _FACT_CACHE.append(_FACT_CACHE[-1] * len(_FACT_CACHE))
    return _FACT_CACHE[k]


def transitivity_witness(u: BlockVector, vtarget: BlockVector, a: Direction,
                         table: WeightTable, eps: Fraction,
                         n_max: int = 10**6, offset_max: int = 60) -> WitnessResult:
    """Search (n, w) with ||w - u|| < eps and ||T^n w - vtarget|| < eps,
    T = (+) e^{sum a_s B_s}; both inequalities re-verified exactly.

    Strategy: conjugate to the first-index shift, append a small correction
    block above each tail-group's support, solve the scaled triangular-like
    system exactly, and escalate n geometrically / the support offset linearly.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    fwd, inv = change_of_coordinates_map(a)
    u_prime = u.map(inv.apply)
    t_prime = vtarget.map(inv.apply)

    max_table_deg = max((e.index.degree() for e in table.entries), default=0)

    best = None
    attempts = 0
    n = 1
    while n <= n_max:
        width_floor = 0
        for comp_u, comp_t in zip(u_prime.components, t_prime.components):
            for vec in (comp_u, comp_t):
                for k in vec.terms:
                    width_floor = max(width_floor, k.get(1))
        for extra in range(0, offset_max + 1):
            width = width_floor + extra
            if 2 * width + 1 > offset_max:
                break
            attempts += 1
            ok, w_vec = _attempt(u, u_prime, t_prime, fwd, a, table, n, width,
                                 max_table_deg)
            if not ok:
                continue
            shifted = w_vec.map(lambda c: exp_shift(scale_direction(a, n), c))
            try:
                res_in = block_l2_norm(w_vec - u, table)
                res_out = block_l2_norm(shifted - vtarget, table)
            except ValueError:
                continue  # support escaped the horizon; escalate
            score = max(res_in, res_out)
            if best is None or score < best:
                best = score
            if res_in < eps and res_out < eps:
                return WitnessResult(True, n, w_vec, res_in, res_out, attempts, best)
        n = 10 if n == 1 else n * 10
    return WitnessResult(False, attempts=attempts, best_residual=best)


def _attempt(u: BlockVector, u_prime: BlockVector, t_prime: BlockVector,
             fwd: SparseLinearMap, a: Direction, table: WeightTable,
             n: int, width: int, max_table_deg: int):
    """One (n, width) witness attempt; returns (ok, w) in the original frame."""
    comps = []
    for comp_u, comp_t in zip(u_prime.components, t_prime.components):
        groups_u = _group_by_tail(comp_u)
        groups_t = _group_by_tail(comp_t)
        corr_terms: Dict[MultiIndex, QC] = {}
        for tail in set(groups_u) | set(groups_t):
            if tail.degree() + 2 * width + 1 > max_table_deg:
                return False, None
            corr = _first_shift_correction(groups_u.get(tail, {}),
                                           groups_t.get(tail, {}), n, width)
            if corr is None:
                return False, None
            for first, val in corr.items():
                key, v = _assemble(tail, first, val)
                corr_terms[key] = v
        comps.append(CoeffVector(corr_terms))
    correction = BlockVector(comps)
    w_prime_corr = correction.map(fwd.apply)
    return True, u + w_prime_corr
