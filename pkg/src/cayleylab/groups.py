"""Finite groups as multiplication tables over element indices 0..n-1.

Elements are enumerated breadth-first from the identity over the (symmetrically
closed) generators, so index 0 is always the identity and every downstream
matrix uses the same row order.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Hashable, Sequence

import numpy as np

DEFAULT_ORDER_CAP = 4096

KINDS = (
    "cyclic",
    "product_of_cyclics",
    "dihedral",
    "symmetric_group",
    "heisenberg_mod_p",
    "explicit_table",
)


class GroupSpecError(ValueError):
    """Raised for invalid group specifications or non-group input."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its full multiplication table.

    ``table[a, b]`` is the index of the product ``a * b``; index 0 is the
    identity.
    """

    table: np.ndarray
    inverse: np.ndarray
    labels: tuple[str, ...] | None = None
    name: str = ""

    @property
    def order(self) -> int:
        return int(self.table.shape[0])

    @property
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def label(self, a: int) -> str:
        return self.labels[a] if self.labels is not None else str(a)

    def index_of(self, label: str) -> int:
        if self.labels is None:
            return int(label)
        return self.labels.index(label)

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != 0:
            x = int(self.table[x, g])
            k += 1
        return k

    def left_translation(self, g: int) -> np.ndarray:
        """Permutation ``x -> g * x`` as an index array."""
        return self.table[g, :]


@dataclass(frozen=True)
class GeneratingSet:
    """Symmetric multiset of generators (element indices, in generator order)."""

    elements: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)


@dataclass
class GroupSpec:
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    generators: list[Any] = field(default_factory=list)
    name: str = ""
    base_dir: Path | None = None

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "GroupSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise GroupSpecError("group spec must be an object with a 'kind' field")
        kind = data["kind"]
        if kind not in KINDS:
            raise GroupSpecError(f"unknown group kind {kind!r}; expected one of {KINDS}")
        params = data.get("params", {})
        gens = data.get("generators", [])
        if not isinstance(params, dict) or not isinstance(gens, list):
            raise GroupSpecError("'params' must be an object and 'generators' a list")
        if not gens:
            raise GroupSpecError("at least one generator is required")
        return cls(kind, params, gens, data.get("name", ""), base_dir)

    @classmethod
    def load(cls, path: str | Path) -> "GroupSpec":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise GroupSpecError(f"cannot read group spec {path}: {exc}") from exc
        spec = cls.from_dict(data, base_dir=path.parent)
        if not spec.name:
            spec.name = path.stem
        return spec

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "params": self.params, "generators": self.generators}
        if self.name:
            out = {"name": self.name, **out}
        return out


# ---------------------------------------------------------------------------
# concrete element models, one per kind


@dataclass
class _Model:
    identity: Hashable
    mul: Callable[[Hashable, Hashable], Hashable]
    inv: Callable[[Hashable], Hashable]
    gens: list[Hashable]
    label: Callable[[Hashable], str]


def _positive_int(params: dict, key: str, minimum: int = 1) -> int:
    value = params.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise GroupSpecError(f"parameter {key!r} must be an integer >= {minimum}")
    return value


def _cyclic_model(spec: GroupSpec) -> _Model:
    n = _positive_int(spec.params, "n")
    gens = []
    for g in spec.generators:
        if not isinstance(g, int):
            raise GroupSpecError(f"cyclic generator must be an integer, got {g!r}")
        gens.append(g % n)
    return _Model(0, lambda a, b: (a + b) % n, lambda a: (-a) % n, gens, str)


def _product_model(spec: GroupSpec) -> _Model:
    moduli = spec.params.get("moduli")
    if not isinstance(moduli, list) or not moduli or not all(
        isinstance(m, int) and m >= 1 for m in moduli
    ):
        raise GroupSpecError("'moduli' must be a nonempty list of positive integers")
    mods = tuple(moduli)

    def coerce(g):
        if not isinstance(g, (list, tuple)) or len(g) != len(mods):
            raise GroupSpecError(f"generator {g!r} must have {len(mods)} coordinates")
        return tuple(int(x) % m for x, m in zip(g, mods))

    return _Model(
        tuple(0 for _ in mods),
        lambda a, b: tuple((x + y) % m for x, y, m in zip(a, b, mods)),
        lambda a: tuple((-x) % m for x, m in zip(a, mods)),
        [coerce(g) for g in spec.generators],
        lambda a: "(" + ",".join(map(str, a)) + ")",
    )


def _dihedral_model(spec: GroupSpec) -> _Model:
    # (r, f) acts as x -> (-1)^f x + r on Z_n; order 2n
    n = _positive_int(spec.params, "n", 2)

    def mul(a, b):
        r, f = a
        s, g = b
        return ((r + (-1) ** f * s) % n, f ^ g)

    def inv(a):
        r, f = a
        return (r, 1) if f else ((-r) % n, 0)

    def coerce(g):
        if not isinstance(g, (list, tuple)) or len(g) != 2 or g[1] not in (0, 1):
            raise GroupSpecError(f"dihedral generator {g!r} must be [rotation, flip]")
        return (int(g[0]) % n, int(g[1]))

    def label(a):
        return f"r{a[0]}" + ("s" if a[1] else "")

    return _Model((0, 0), mul, inv, [coerce(g) for g in spec.generators], label)


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def _parse_permutation(g: Any, n: int) -> tuple[int, ...]:
    """Parse a 1-based cycle string ``"(1 2)(3 4)"``, a list of cycles, or an
    image list (0-based ``[1, 0, 2, 3]``) into a 0-based image tuple."""
    if isinstance(g, str):
        cycles = [
            [int(tok) for tok in re.split(r"[\s,]+", body.strip()) if tok]
            for body in _CYCLE_RE.findall(g)
        ]
        if not cycles and g.strip() not in ("", "()"):
            raise GroupSpecError(f"cannot parse permutation {g!r}")
    elif isinstance(g, list) and g and all(isinstance(c, list) for c in g):
        cycles = g
    elif isinstance(g, list) and sorted(g) == list(range(n)):
        return tuple(int(x) for x in g)
    else:
        raise GroupSpecError(f"cannot parse permutation {g!r}")
    images = list(range(n))
    seen: set[int] = set()
    for cyc in cycles:
        if any(not isinstance(x, int) or not 1 <= x <= n for x in cyc):
            raise GroupSpecError(f"cycle {cyc!r} has points outside 1..{n}")
        if seen & set(cyc) or len(set(cyc)) != len(cyc):
            raise GroupSpecError(f"cycles in {g!r} are not disjoint")
        seen |= set(cyc)
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            images[a - 1] = b - 1
    return tuple(images)


def _cycle_label(p: tuple[int, ...]) -> str:
    seen, parts = set(), []
    for start in range(len(p)):
        if start in seen or p[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(x + 1)
            x = p[x]
        parts.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(parts) or "()"


def _symmetric_model(spec: GroupSpec) -> _Model:
    # product p*q applies q first, then p
    n = _positive_int(spec.params, "n")

    def mul(p, q):
        return tuple(p[i] for i in q)

    def inv(p):
        out = [0] * len(p)
        for i, pi in enumerate(p):
            out[pi] = i
        return tuple(out)

    gens = [_parse_permutation(g, n) for g in spec.generators]
    return _Model(tuple(range(n)), mul, inv, gens, _cycle_label)


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def _heisenberg_model(spec: GroupSpec) -> _Model:
    # upper unitriangular 3x3 matrices [[1,a,c],[0,1,b],[0,0,1]] mod p
    p = _positive_int(spec.params, "p", 2)
    if not _is_prime(p):
        raise GroupSpecError(f"heisenberg_mod_p needs p prime, got {p}")

    def mul(x, y):
        return ((x[0] + y[0]) % p, (x[1] + y[1]) % p, (x[2] + y[2] + x[0] * y[1]) % p)

    def inv(x):
        a, b, c = x
        return ((-a) % p, (-b) % p, (a * b - c) % p)

    def coerce(g):
        if not isinstance(g, (list, tuple)) or len(g) != 3:
            raise GroupSpecError(f"heisenberg generator {g!r} must be [a, b, c]")
        return tuple(int(v) % p for v in g)

    return _Model((0, 0, 0), mul, inv, [coerce(g) for g in spec.generators],
                  lambda x: "[{},{},{}]".format(*x))


def parse_table_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Parse a multiplication table CSV: header row of labels, then one row per
    element (leading label cell optional) whose cells are product labels."""
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise GroupSpecError("empty multiplication table")
    header = [c.strip() for c in rows[0]]
    if header and header[0] in ("", "*"):
        header = header[1:]
    n = len(header)
    if len(set(header)) != n:
        raise GroupSpecError("duplicate labels in table header")
    index = {lab: i for i, lab in enumerate(header)}
    body = rows[1:]
    if len(body) != n:
        raise GroupSpecError(f"table has {len(body)} rows, expected {n}")
    table = np.empty((n, n), dtype=np.int64)
    for i, row in enumerate(body):
        cells = [c.strip() for c in row]
        if len(cells) == n + 1:
            if cells[0] != header[i]:
                raise GroupSpecError(f"row {i} label {cells[0]!r} != {header[i]!r}")
            cells = cells[1:]
        if len(cells) != n:
            raise GroupSpecError(f"row {i} has {len(cells)} entries, expected {n}")
        try:
            table[i] = [index[c] for c in cells]
        except KeyError as exc:
            raise GroupSpecError(f"unknown label {exc.args[0]!r} in row {i}") from None
    return header, table


def _table_model(spec: GroupSpec) -> _Model:
    if "csv" in spec.params:
        text = spec.params["csv"]
    elif "csv_path" in spec.params:
        path = Path(spec.params["csv_path"])
        if not path.is_absolute() and spec.base_dir is not None:
            path = spec.base_dir / path
        try:
            text = path.read_text()
        except OSError as exc:
            raise GroupSpecError(f"cannot read table {path}: {exc}") from exc
    else:
        raise GroupSpecError("explicit_table needs 'csv' or 'csv_path'")
    labels, table = parse_table_csv(text)
    n = len(labels)
    ids = [e for e in range(n)
           if np.array_equal(table[e], np.arange(n)) and np.array_equal(table[:, e], np.arange(n))]
    if len(ids) != 1:
        raise GroupSpecError("multiplication table has no two-sided identity")
    e = ids[0]
    for i in range(n):
        if sorted(table[i]) != list(range(n)):
            raise GroupSpecError("multiplication table rows are not permutations")
    # exhaustive associativity on the raw table: untrusted input
    for a in range(n):
        if not np.array_equal(table[table[a]], table[a][table]):
            raise GroupSpecError("multiplication table is not associative")
    inv = {labels[a]: labels[int(np.flatnonzero(table[a] == e)[0])] for a in range(n)}
    for g in spec.generators:
        if g not in inv:
            raise GroupSpecError(f"unknown generator label {g!r}")
    return _Model(
        labels[e],
        lambda a, b: labels[table[labels.index(a), labels.index(b)]],
        inv.__getitem__,
        list(spec.generators),
        str,
    )


_MODELS = {
    "cyclic": _cyclic_model,
    "product_of_cyclics": _product_model,
    "dihedral": _dihedral_model,
    "symmetric_group": _symmetric_model,
    "heisenberg_mod_p": _heisenberg_model,
    "explicit_table": _table_model,
}


def symmetric_closure(gens: Sequence[Hashable], inv: Callable) -> list:
    """Append missing inverses right after each generator.

    Works on multisets: afterwards the multiplicity of ``s`` equals that of
    ``inv(s)``. Involutions are never duplicated.
    """
    counts = Counter(gens)
    deficit = {s: counts[s] - counts[inv(s)] for s in counts if inv(s) != s}
    out = []
    for s in gens:
        out.append(s)
        if deficit.get(s, 0) > 0:
            out.append(inv(s))
            deficit[s] -= 1
    return out


def build_group(spec: GroupSpec, order_cap: int = DEFAULT_ORDER_CAP) -> tuple[FiniteGroup, GeneratingSet]:
    model = _MODELS[spec.kind](spec)
    gens = symmetric_closure(model.gens, model.inv)
    if model.identity in gens:
        raise GroupSpecError("generator list contains the identity")

    index = {model.identity: 0}
    elements = [model.identity]
    queue = deque([model.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = model.mul(x, s)
            if y not in index:
                if len(elements) >= order_cap:
                    raise GroupSpecError(f"group order exceeds cap {order_cap}")
                index[y] = len(elements)
                elements.append(y)
                queue.append(y)

    order = spec.params.get("expected_order")
    if order is not None and order != len(elements):
        raise GroupSpecError(f"generators reach {len(elements)} elements, expected {order}")
    _check_generation(spec, model, len(elements))

    gen_idx = [index[s] for s in gens]
    right = np.array([[index[model.mul(x, s)] for s in gens] for x in elements], dtype=np.int64)
    table = _table_from_words(right, gen_idx)
    inverse = np.argmax(table == 0, axis=1)
    labels = tuple(model.label(x) for x in elements)
    return (
        FiniteGroup(table, inverse, labels, spec.name or spec.kind),
        GeneratingSet(tuple(gen_idx)),
    )


def _check_generation(spec: GroupSpec, model: _Model, reached: int) -> None:
    """Compare the BFS reach with the ambient order when the kind knows it."""
    p = spec.params
    expected = {
        "cyclic": lambda: p["n"],
        "product_of_cyclics": lambda: math.prod(p["moduli"]),
        "dihedral": lambda: 2 * p["n"],
        "symmetric_group": lambda: math.factorial(p["n"]),
        "heisenberg_mod_p": lambda: p["p"] ** 3,
        "explicit_table": lambda: None,
    }[spec.kind]()
    if spec.kind == "explicit_table":
        expected = len(parse_table_csv(_table_text(spec))[0])
    if expected is not None and reached != expected:
        raise GroupSpecError(
            f"generators do not generate the group: reached {reached} of {expected} elements"
        )


def _table_text(spec: GroupSpec) -> str:
    if "csv" in spec.params:
        return spec.params["csv"]
    path = Path(spec.params["csv_path"])
    if not path.is_absolute() and spec.base_dir is not None:
        path = spec.base_dir / path
    return path.read_text()


def _table_from_words(right: np.ndarray, gen_idx: list[int]) -> np.ndarray:
    """Full table from right multiplication by generators.

    Every element b is reached by BFS as parent(b) * s, so column b of the
    table is column parent(b) pushed through right multiplication by s.
    """
    n = right.shape[0]
    table = np.empty((n, n), dtype=np.int64)
    table[:, 0] = np.arange(n)
    done = np.zeros(n, dtype=bool)
    done[0] = True
    queue = deque([0])
    while queue:
        b = queue.popleft()
        for j in range(len(gen_idx)):
            c = right[b, j]
            if not done[c]:
                table[:, c] = right[table[:, b], j]
                done[c] = True
                queue.append(c)
    return table


def group_from_table(table: np.ndarray, labels: Sequence[str] | None = None, name: str = "") -> FiniteGroup:
    """Wrap an index table whose identity is already index 0."""
    table = np.asarray(table, dtype=np.int64)
    if not np.array_equal(table[0], np.arange(len(table))):
        raise GroupSpecError("index 0 must be the identity")
    inverse = np.argmax(table == 0, axis=1)
    return FiniteGroup(table, inverse, tuple(labels) if labels is not None else None, name)


def check_axioms(G: FiniteGroup, rng: np.random.Generator | None = None, samples: int = 100_000) -> None:
    """Identity and inverse axioms exhaustively; associativity exhaustively up
    to order 512, on random triples above."""
    n = G.order
    t = G.table
    ar = np.arange(n)
    if not (np.array_equal(t[0], ar) and np.array_equal(t[:, 0], ar)):
        raise AssertionError("identity axiom fails")
    if not np.all(t[ar, G.inverse] == 0):
        raise AssertionError("inverse axiom fails")
    if n <= 512:
        for a in range(n):
            if not np.array_equal(t[t[a]], t[a][t]):
                raise AssertionError(f"associativity fails for a={a}")
    else:
        rng = rng or np.random.default_rng(0)
        a, b, c = rng.integers(0, n, size=(3, samples))
        if not np.array_equal(t[t[a, b], c], t[a, t[b, c]]):
            raise AssertionError("associativity fails on sampled triples")


def check_generating_set(G: FiniteGroup, S: GeneratingSet) -> None:
    counts = Counter(S.elements)
    if 0 in counts:
        raise AssertionError("generating set contains the identity")
    for s, m in counts.items():
        if counts[G.inv(s)] != m:
            raise AssertionError(f"generator {G.label(s)} is not balanced by its inverse")
    if len(subgroup_generated(G, set(S.elements))) != G.order:
        raise AssertionError("generating set does not generate the group")


# ---------------------------------------------------------------------------
# subgroups and quotients


def subgroup_generated(G: FiniteGroup, seeds) -> frozenset[int]:
    gens = sorted({int(s) for s in seeds})
    members = {0}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for s in gens:
            for y in (G.mul(x, s), G.mul(x, G.inv(s))):
                if y not in members:
                    members.add(y)
                    queue.append(y)
    assert G.order % len(members) == 0, "Lagrange violated"
    return frozenset(members)


def is_subgroup(G: FiniteGroup, H) -> bool:
    H = set(H)
    return 0 in H and subgroup_generated(G, H) == H


def is_normal(G: FiniteGroup, H) -> bool:
    H = frozenset(int(h) for h in H)
    if not is_subgroup(G, H):
        raise GroupSpecError("H is not a subgroup")
    hs = np.fromiter(sorted(H), dtype=np.int64)
    member = np.zeros(G.order, dtype=bool)
    member[hs] = True
    for g in range(G.order):
        conj = G.table[G.table[g, hs], G.inverse[g]]
        if not member[conj].all():
            return False
    return True


def cosets(G: FiniteGroup, N) -> list[list[int]]:
    """Right cosets Ng, ordered by their minimal member index."""
    ns = np.fromiter(sorted(set(N)), dtype=np.int64)
    seen = np.zeros(G.order, dtype=bool)
    out = []
    for g in range(G.order):
        if not seen[g]:
            coset = sorted(int(x) for x in G.table[ns, g])
            seen[coset] = True
            out.append(coset)
    return out


def quotient_group(G: FiniteGroup, N) -> tuple[FiniteGroup, np.ndarray]:
    """Quotient G/N with canonical coset indexing and the projection array."""
    if not is_normal(G, N):
        raise GroupSpecError("N is not a normal subgroup")
    cs = cosets(G, N)
    proj = np.empty(G.order, dtype=np.int64)
    for i, c in enumerate(cs):
        proj[c] = i
    reps = np.array([c[0] for c in cs])
    qtable = proj[G.table[np.ix_(reps, reps)]]
    if G.order <= 512:
        if not np.array_equal(proj[G.table], qtable[np.ix_(proj, proj)]):
            raise AssertionError("projection is not a homomorphism")
    labels = None
    if G.labels is not None:
        labels = [G.labels[r] + "N" if len(cs) < G.order else G.labels[r] for r in reps]
    return group_from_table(qtable, labels, f"{G.name}/N"), proj


def subgroup_as_group(G: FiniteGroup, H) -> tuple[FiniteGroup, np.ndarray]:
    """Re-index a subgroup as a standalone group; returns it and the embedding."""
    members = np.array(sorted(set(H)), dtype=np.int64)
    pos = {int(h): i for i, h in enumerate(members)}
    sub = np.array([[pos[G.mul(a, b)] for b in members] for a in members], dtype=np.int64)
    labels = [G.label(int(h)) for h in members]
    return group_from_table(sub, labels, f"sub({G.name})"), members


def abelian_invariant_factors(A: FiniteGroup) -> list[int]:
    """Invariant factors d1 | d2 | ... | dr of a finite abelian group.

    An element of maximal order generates a direct summand, so the factors are
    peeled off from the top by repeatedly quotienting by such an element.
    """
    if not A.is_abelian():
        raise GroupSpecError("invariant factors need an abelian group")
    factors = []
    Q = A
    while Q.order > 1:
        orders = [Q.element_order(g) for g in range(Q.order)]
        g = int(np.argmax(orders))
        factors.append(orders[g])
        Q, _ = quotient_group(Q, subgroup_generated(Q, {g}))
    factors.reverse()
    assert math.prod(factors) == A.order
    assert all(b % a == 0 for a, b in zip(factors, factors[1:]))
    return factors
