"""Finite groups, their algebras under the left regular representation, and
the closed-form angle between intermediate group-algebra subalgebras.

Groups are Cayley tables over element indices.  Constructors cover cyclic
groups, direct products of cyclic groups, and symmetric groups up to S_5;
subgroups are index sets validated for closure.  For nested subgroups
H <= K, L <= G the interior angle between C[K] and C[L] inside
C[H] <= C[G] has the exact value

    cos a(C[K], C[L]) = ([K n L : H] - 1) / (sqrt([K:H] - 1) sqrt([L:H] - 1)),

computed here in rational arithmetic (the square of the cosine is an exact
fraction) with conversion to floating point only for the arccos.  The
numeric cross-check route materializes C[H] <= C[G] on the left regular
representation, where the group algebra is its own tower module: the
coordinates of an algebra element are its group coefficients, and left
multiplication acts by the same matrix as the element itself.

The CLI mini-language for groups and subgroup generators is parsed at the
bottom of this module; grammar in README.md.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import matrices as mx
from .algebra import ConditionalExpectation, MatrixStarAlgebra
from .angles import AngleDiagnostics, AngleResult, Route
from .errors import (
    DegenerateIntermediate,
    InvalidGroup,
    NotIntermediate,
    NotSubgroup,
    TooLarge,
)
from .tower import TowerLevel, build_tower_level

__all__ = [
    "FiniteGroup",
    "Subgroup",
    "make_group",
    "trivial_subgroup",
    "full_subgroup",
    "generated_subgroup",
    "intersection",
    "subgroup_index",
    "left_coset_reps",
    "conjugate_subgroup",
    "normalizer",
    "is_normal",
    "all_subgroups",
    "intermediate_subgroups",
    "group_angle",
    "GroupInclusion",
    "group_algebra_inclusion",
    "normalizer_angle_profile",
    "RegularModule",
    "parse_group_spec",
    "parse_subgroup",
]

MAX_GROUP_ORDER = 1024
MAX_ALGEBRA_ORDER = 256
_FULL_ASSOC_LIMIT = 32


class FiniteGroup:
    """A finite group as a Cayley table on element indices 0..order-1."""

    def __init__(self, cayley, elements=None, labels=None, name="G", kind="table",
                 radices=None):
        table = np.asarray(cayley, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise InvalidGroup("Cayley table must be square")
        order = table.shape[0]
        if order == 0 or table.min() < 0 or table.max() >= order:
            raise InvalidGroup("Cayley entries must be element indices")
        self.cayley = table
        self.order = order
        self.name = name
        self.kind = kind
        self.radices = None if radices is None else tuple(radices)
        self.elements = tuple(elements) if elements is not None else tuple(range(order))
        self.labels = (
            tuple(labels) if labels is not None else tuple(str(e) for e in self.elements)
        )
        self._index_of = {e: i for i, e in enumerate(self.elements)}

        self._validate()
        self.identity = self._find_identity()
        self.inverse = self._find_inverses()

    def _validate(self):
        n, t = self.order, self.cayley
        expect = np.arange(n)
        if not (np.all(np.sort(t, axis=1) == expect) and np.all(np.sort(t, axis=0) == expect[:, None])):
            raise InvalidGroup("Cayley table is not a Latin square")
        if n <= _FULL_ASSOC_LIMIT:
            a = np.arange(n)
            left = t[t[a[:, None, None], a[None, :, None]], a[None, None, :]]
            right = t[a[:, None, None], t[a[None, :, None], a[None, None, :]]]
            if not np.array_equal(left, right):
                raise InvalidGroup("multiplication is not associative")
        else:
            rng = mx.default_rng()
            a = rng.integers(0, n, size=4096)
            b = rng.integers(0, n, size=4096)
            c = rng.integers(0, n, size=4096)
            if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
                raise InvalidGroup("multiplication is not associative (sampled)")

    def _find_identity(self) -> int:
        expect = np.arange(self.order)
        for e in range(self.order):
            if np.array_equal(self.cayley[e], expect) and np.array_equal(
                self.cayley[:, e], expect
            ):
                return e
        raise InvalidGroup("no identity element")

    def _find_inverses(self) -> np.ndarray:
        inv = np.empty(self.order, dtype=np.int64)
        for g in range(self.order):
            hits = np.nonzero(self.cayley[g] == self.identity)[0]
            h = int(hits[0])
            if self.cayley[h, g] != self.identity:
                raise InvalidGroup("one-sided inverse found")
            inv[g] = h
        return inv

    def mult(self, a: int, b: int) -> int:
        return int(self.cayley[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def index_of(self, element) -> int:
        return self._index_of[element]

    def label(self, g: int) -> str:
        return self.labels[g]

    def regular_matrix(self, g: int) -> np.ndarray:
        """Left-regular permutation matrix of g: column b has a 1 at row g*b."""
        mat = np.zeros((self.order, self.order), dtype=np.complex128)
        mat[self.cayley[g], np.arange(self.order)] = 1.0
        return mat

    # -- constructors ------------------------------------------------------

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls.direct_product([n], name=f"Z{n}")

    @classmethod
    def direct_product(cls, orders, name=None) -> "FiniteGroup":
        orders = [int(r) for r in orders]
        if any(r < 1 for r in orders) or not orders:
            raise InvalidGroup("cyclic orders must be positive")
        total = math.prod(orders)
        if total > MAX_GROUP_ORDER:
            raise TooLarge(f"group order {total} exceeds {MAX_GROUP_ORDER}")
        elements = list(itertools.product(*[range(r) for r in orders]))
        digits = np.array(elements, dtype=np.int64)  # (total, k)
        sums = (digits[:, None, :] + digits[None, :, :]) % np.array(orders)
        weights = np.ones(len(orders), dtype=np.int64)
        for k in range(len(orders) - 2, -1, -1):
            weights[k] = weights[k + 1] * orders[k + 1]
        cayley = np.tensordot(sums, weights, axes=(2, 0))
        labels = ["(" + ",".join(map(str, e)) + ")" for e in elements]
        return cls(
            cayley,
            elements=elements,
            labels=labels,
            name=name or "x".join(f"Z{r}" for r in orders),
            kind="cyclic_product",
            radices=orders,
        )

    @classmethod
    def symmetric(cls, n: int) -> "FiniteGroup":
        if n < 1 or n > 5:
            raise TooLarge("symmetric groups supported up to S5")
        elements = list(itertools.permutations(range(n)))
        index = {p: i for i, p in enumerate(elements)}
        order = len(elements)
        cayley = np.empty((order, order), dtype=np.int64)
        for i, p in enumerate(elements):
            for j, q in enumerate(elements):
                cayley[i, j] = index[tuple(p[q[k]] for k in range(n))]
        labels = [_cycle_label(p) for p in elements]
        return cls(
            cayley, elements=elements, labels=labels, name=f"S{n}", kind="symmetric"
        )

    def __repr__(self):
        return f"FiniteGroup({self.name}, order={self.order})"


def _cycle_label(perm: tuple) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            seen.add(start)
            continue
        cycle, k = [], start
        while k not in seen:
            seen.add(k)
            cycle.append(k + 1)  # 1-based in labels
            k = perm[k]
        cycles.append("(" + "".join(map(str, cycle)) + ")")
    return "".join(cycles) if cycles else "e"


def make_group(spec) -> FiniteGroup:
    """Constructor dispatch: cyclic(n), direct_product(list), symmetric(n)."""
    if isinstance(spec, str):
        return parse_group_spec(spec)
    if isinstance(spec, int):
        return FiniteGroup.cyclic(spec)
    return FiniteGroup.direct_product(list(spec))


@dataclass(frozen=True)
class Subgroup:
    """A validated subgroup, stored as a sorted tuple of element indices."""

    parent: FiniteGroup
    elements: tuple

    def __post_init__(self):
        elems = tuple(sorted(set(int(e) for e in self.elements)))
        object.__setattr__(self, "elements", elems)
        G = self.parent
        members = set(elems)
        if G.identity not in members:
            raise NotSubgroup("subgroup must contain the identity")
        for a in elems:
            if G.inv(a) not in members:
                raise NotSubgroup("subgroup not closed under inverses")
            for b in elems:
                if G.mult(a, b) not in members:
                    raise NotSubgroup("subgroup not closed under products")

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, g: int) -> bool:
        return int(g) in set(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.parent.order, dtype=bool)
        m[list(self.elements)] = True
        return m

    def issubset(self, other: "Subgroup") -> bool:
        return set(self.elements) <= set(other.elements)

    def labels(self) -> list[str]:
        return [self.parent.label(g) for g in self.elements]

    def __repr__(self):
        return f"Subgroup(order={self.order} of {self.parent.name})"


def trivial_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, (G.identity,))


def full_subgroup(G: FiniteGroup) -> Subgroup:
    return Subgroup(G, tuple(range(G.order)))


def generated_subgroup(G: FiniteGroup, generators) -> Subgroup:
    """Closure of a generator set under the group operation."""
    els = {G.identity}
    boundary = [G.identity]
    gens = [int(g) for g in generators]
    for g in gens:
        if g not in els:
            els.add(g)
            boundary.append(g)
    while boundary:
        fresh = []
        for a in gens:
            for b in boundary:
                c = G.mult(a, b)
                if c not in els:
                    els.add(c)
                    fresh.append(c)
        boundary = fresh
    return Subgroup(G, tuple(els))


def intersection(K: Subgroup, L: Subgroup) -> Subgroup:
    if K.parent is not L.parent:
        raise NotSubgroup("subgroups of different parents")
    return Subgroup(K.parent, tuple(set(K.elements) & set(L.elements)))


def subgroup_index(K, H: Subgroup) -> int:
    """[K : H] for nested subgroups (K may be the whole group)."""
    k_set = set(range(K.order)) if isinstance(K, FiniteGroup) else set(K.elements)
    if not set(H.elements) <= k_set:
        raise NotIntermediate("H is not contained in K")
    if len(k_set) % H.order:
        raise NotSubgroup("order does not divide (Lagrange violated)")
    return len(k_set) // H.order


def left_coset_reps(G: FiniteGroup, H: Subgroup, within=None) -> list[int]:
    """Deterministic left-coset representatives: smallest index per coset."""
    members = sorted(within.elements) if within is not None else range(G.order)
    covered = np.zeros(G.order, dtype=bool)
    reps = []
    for g in members:
        if covered[g]:
            continue
        reps.append(int(g))
        for h in H.elements:
            covered[G.mult(g, h)] = True
    return reps


def conjugate_subgroup(K: Subgroup, g: int) -> Subgroup:
    G = K.parent
    gi = G.inv(g)
    return Subgroup(G, tuple(G.mult(G.mult(gi, k), g) for k in K.elements))


def normalizer(G: FiniteGroup, K: Subgroup) -> Subgroup:
    k_set = set(K.elements)
    members = [
        g
        for g in range(G.order)
        if {G.mult(G.mult(G.inv(g), k), g) for k in K.elements} == k_set
    ]
    return Subgroup(G, tuple(members))


def is_normal(G: FiniteGroup, K: Subgroup) -> bool:
    return normalizer(G, K).order == G.order


def all_subgroups(G: FiniteGroup) -> list[Subgroup]:
    """The full subgroup lattice, by closure of incremental generator sets."""
    seed = frozenset({G.identity})
    found = {seed}
    frontier = [seed]
    while frontier:
        fresh = []
        for S in frontier:
            for g in range(G.order):
                if g in S:
                    continue
                T = frozenset(generated_subgroup(G, tuple(S) + (g,)).elements)
                if T not in found:
                    found.add(T)
                    fresh.append(T)
        frontier = fresh
    return sorted(
        (Subgroup(G, tuple(s)) for s in found), key=lambda s: (s.order, s.elements)
    )


def intermediate_subgroups(
    G: FiniteGroup, H: Subgroup, strict: bool = True
) -> list[Subgroup]:
    """Subgroups K with H <= K <= G; ``strict`` drops K = H and K = G."""
    out = []
    for K in all_subgroups(G):
        if not H.issubset(K):
            continue
        if strict and (K.order == H.order or K.order == G.order):
            continue
        out.append(K)
    return out


# ---------------------------------------------------------------------------
# the exact angle formula


def group_angle(
    G: FiniteGroup, H: Subgroup, K: Subgroup, L: Subgroup
) -> AngleResult:
    """cos a(C[K], C[L]) = ([KnL:H] - 1) / (sqrt([K:H]-1) sqrt([L:H]-1)).

    Exact rational arithmetic for the squared cosine; floating point enters
    only in the final square root and arccos.
    """
    for S, name in ((K, "K"), (L, "L")):
        if not H.issubset(S):
            raise NotIntermediate(f"H is not contained in {name}")
    if K.order == H.order or L.order == H.order:
        raise DegenerateIntermediate("K = H or L = H: angle undefined")

    a = subgroup_index(intersection(K, L), H)
    b = subgroup_index(K, H)
    c = subgroup_index(L, H)
    cos_sq = Fraction((a - 1) ** 2, (b - 1) * (c - 1))
    cos = min(1.0, math.sqrt(float(cos_sq)))
    diagnostics = AngleDiagnostics(
        numerator=float(a - 1),
        denominator_first=math.sqrt(b - 1),
        denominator_second=math.sqrt(c - 1),
        raw_cos=cos,
        extra={
            "cos_squared_numerator": cos_sq.numerator,
            "cos_squared_denominator": cos_sq.denominator,
            "index_intersection": a,
            "index_K": b,
            "index_L": c,
        },
    )
    return AngleResult(
        cos_value=cos, angle_rad=math.acos(cos), route=Route.FORMULA,
        diagnostics=diagnostics,
    )


def normalizer_angle_profile(
    G: FiniteGroup, H: Subgroup, K: Subgroup
) -> list[tuple[int, AngleResult]]:
    """Angles a(C[K], C[g^{-1} K g]) for g normalizing H.

    The hypothesis g in N_G(H) keeps C[H] inside the conjugated algebra; the
    zero-angle set is exactly N_G(K) intersected with N_G(H).
    """
    if not H.issubset(K):
        raise NotIntermediate("H must be contained in K")
    if K.order == H.order:
        raise DegenerateIntermediate("K = H")
    out = []
    for g in normalizer(G, H).elements:
        L = conjugate_subgroup(K, g)
        out.append((g, group_angle(G, H, K, L)))
    return out


# ---------------------------------------------------------------------------
# the numeric route: group algebras on the regular representation


class RegularModule:
    """Tower module of C[H] <= C[G]: the algebra is its own coordinatization.

    With orthonormal basis {lambda_g / sqrt(|G|)} the coordinates of an
    element are (scaled) group coefficients, extracted by gathering along
    the Cayley table, and L_x is the ambient matrix of x itself.
    """

    def __init__(self, group: FiniteGroup):
        self.group = group
        self.dim = group.order
        self._sqrt = math.sqrt(group.order)
        self._cols = np.arange(group.order)

    def coords(self, y) -> np.ndarray:
        y = np.asarray(y)
        picked = y[self.group.cayley, self._cols[None, :]]
        return picked.sum(axis=1) / self._sqrt

    def from_coords(self, v) -> np.ndarray:
        n = self.dim
        x = np.zeros((n, n), dtype=np.complex128)
        # permutation supports of distinct group elements are disjoint
        x[self.group.cayley, np.broadcast_to(self._cols, (n, n))] = (
            np.asarray(v, dtype=np.complex128)[:, None] / self._sqrt
        )
        return x

    def left_mult(self, x) -> np.ndarray:
        return np.array(x, dtype=np.complex128)

    def operator_matrix(self, fn) -> np.ndarray:
        cols = []
        for g in range(self.dim):
            basis_vec = np.zeros(self.dim)
            basis_vec[g] = 1.0
            cols.append(self.coords(fn(self.from_coords(basis_vec))))
        return np.stack(cols, axis=1)


@dataclass
class GroupInclusion:
    """C[H] <= C[G] on the left regular representation, with E and quasi-basis."""

    group: FiniteGroup
    subgroup: Subgroup
    A: MatrixStarAlgebra
    B: MatrixStarAlgebra
    E: ConditionalExpectation
    module: RegularModule
    coset_reps: list[int]

    def intermediate_algebra(self, K: Subgroup) -> MatrixStarAlgebra:
        scale = math.sqrt(self.group.order)
        basis = [self.group.regular_matrix(k) / scale for k in K.elements]
        return MatrixStarAlgebra(
            [self.group.regular_matrix(k) for k in K.elements], basis
        )

    def expectation_onto(self, K: Subgroup, reps=None) -> ConditionalExpectation:
        """The coefficient-masking expectation onto C[K], coset-rep quasi-basis."""
        if not self.subgroup.issubset(K):
            raise NotIntermediate("K must contain H")
        module, G = self.module, self.group
        mask = K.mask()

        def apply_fn(x: np.ndarray) -> np.ndarray:
            coords = module.coords(x)
            return module.from_coords(np.where(mask, coords, 0.0))

        reps = left_coset_reps(G, K) if reps is None else list(reps)
        quasi = [G.regular_matrix(g) for g in reps]
        target = self.intermediate_algebra(K)
        return ConditionalExpectation(
            self.A, target, apply_fn, quasi_basis=quasi, name="F"
        )

    def tower(self, *, materialize: bool = False, check: bool = True) -> TowerLevel:
        return build_tower_level(
            self.A, self.B, self.E, module=self.module,
            materialize=materialize, check=check,
        )


def group_algebra_inclusion(
    G: FiniteGroup, H: Subgroup, reps=None
) -> GroupInclusion:
    """Build C[H] <= C[G] with E killing coefficients off H.

    The quasi-basis is a set of left-coset representatives (the
    deterministic smallest-index transversal unless ``reps`` overrides it;
    any transversal gives the same index [G:H] times the identity).
    """
    if G.order > MAX_ALGEBRA_ORDER:
        raise TooLarge(
            f"group algebra route supports order <= {MAX_ALGEBRA_ORDER}"
        )
    if H.parent is not G:
        raise NotSubgroup("H must be a subgroup of G")
    module = RegularModule(G)
    scale = math.sqrt(G.order)
    lam = [G.regular_matrix(g) for g in range(G.order)]
    A = MatrixStarAlgebra(lam, [m / scale for m in lam])
    B = MatrixStarAlgebra(
        [lam[h] for h in H.elements], [lam[h] / scale for h in H.elements]
    )
    mask = H.mask()

    def apply_fn(x: np.ndarray) -> np.ndarray:
        coords = module.coords(x)
        return module.from_coords(np.where(mask, coords, 0.0))

    reps = left_coset_reps(G, H) if reps is None else list(reps)
    E = ConditionalExpectation(
        A, B, apply_fn, quasi_basis=[lam[g] for g in reps], name="E"
    )
    return GroupInclusion(G, H, A, B, E, module, reps)


# ---------------------------------------------------------------------------
# CLI mini-language


_TERM_RE = re.compile(r"^(Z|S)(\d+)$")


def parse_group_spec(spec: str) -> FiniteGroup:
    """Parse specs like "Z12", "S4", "Z3xZ3xZ5xZ5" (x-separated terms)."""
    text = spec.strip()
    if not text:
        raise InvalidGroup("empty group spec")
    terms = text.split("x")
    parsed = []
    for term in terms:
        m = _TERM_RE.match(term.strip())
        if not m:
            raise InvalidGroup(f"cannot parse group term {term!r}")
        parsed.append((m.group(1), int(m.group(2))))
    if all(kind == "Z" for kind, _ in parsed):
        orders = [n for _, n in parsed]
        return FiniteGroup.direct_product(orders, name=text)
    if len(parsed) == 1 and parsed[0][0] == "S":
        return FiniteGroup.symmetric(parsed[0][1])
    raise InvalidGroup("symmetric groups cannot be combined in products")


def _split_top_level(text: str) -> list[str]:
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise InvalidGroup("unbalanced parentheses in generator list")
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if depth != 0:
        raise InvalidGroup("unbalanced parentheses in generator list")
    if current:
        parts.append("".join(current))
    return [p.strip() for p in parts if p.strip()]


def _parse_cycles(G: FiniteGroup, token: str) -> int:
    """One generator in cycle notation, e.g. "(12)" or "(12)(34)"; 1-based."""
    n = len(G.elements[0])
    cycles = re.findall(r"\(([0-9]+)\)", token)
    if not cycles or "".join(f"({c})" for c in cycles) != token.replace(" ", ""):
        raise InvalidGroup(f"cannot parse permutation {token!r}")
    perm = list(range(n))
    for cyc in reversed(cycles):  # rightmost cycle acts first
        points = [int(d) - 1 for d in cyc]
        if any(p < 0 or p >= n for p in points) or len(set(points)) != len(points):
            raise InvalidGroup(f"bad cycle {cyc!r} for S{n}")
        c = list(range(n))
        for i, p in enumerate(points):
            c[p] = points[(i + 1) % len(points)]
        perm = [c[perm[i]] for i in range(n)]
    return G.index_of(tuple(perm))


def _parse_tuple(G: FiniteGroup, token: str) -> int:
    body = token.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    try:
        values = tuple(int(v) for v in body.split(",") if v.strip() != "")
    except ValueError as exc:
        raise InvalidGroup(f"cannot parse element tuple {token!r}") from exc
    if G.radices is None or len(values) != len(G.radices):
        raise InvalidGroup(f"tuple {token!r} does not fit {G.name}")
    reduced = tuple(v % r for v, r in zip(values, G.radices))
    return G.index_of(reduced)


def parse_subgroup(G: FiniteGroup, text: str) -> Subgroup:
    """Parse a generator list: tuples for cyclic products, cycles for S_n.

    An empty string denotes the trivial subgroup.
    """
    tokens = _split_top_level(text or "")
    if not tokens:
        return trivial_subgroup(G)
    if G.kind == "symmetric":
        gens = [_parse_cycles(G, tok) for tok in tokens]
    else:
        gens = [_parse_tuple(G, tok) for tok in tokens]
    return generated_subgroup(G, gens)
