"""One-sided subshifts of finite type: models, graph structure, words, recodings.

Symbols are stored as indices ``0..l-1``; the ``symbols`` tuple holds the
external labels (``"1", "2", ...`` for the three-symbol example).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidModelError, PreconditionError

Word = tuple[int, ...]


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class SftModel:
    """Alphabet plus 0/1 transition matrix."""

    __slots__ = ("symbols", "matrix", "_index")

    def __init__(self, symbols: Sequence, matrix):
        symbols = tuple(str(s) for s in symbols)
        if not symbols:
            raise InvalidModelError("empty alphabet")
        if len(set(symbols)) != len(symbols):
            raise InvalidModelError(f"duplicate symbol labels in {symbols}")
        try:
            raw = np.asarray(matrix, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidModelError(f"transition matrix is not numeric: {exc}") from None
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise InvalidModelError(f"transition matrix must be square, got shape {raw.shape}")
        if raw.shape[0] != len(symbols):
            raise InvalidModelError(
                f"matrix size {raw.shape[0]} does not match alphabet size {len(symbols)}"
            )
        if not np.all((raw == 0) | (raw == 1)):
            raise InvalidModelError("transition matrix entries must be 0 or 1")
        self.symbols = symbols
        self.matrix = _frozen(raw.astype(np.int8))
        self._index = {s: i for i, s in enumerate(symbols)}

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, label) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise InvalidModelError(f"unknown symbol {label!r}") from None

    def encode(self, labels: Iterable) -> Word:
        return tuple(self.index(s) for s in labels)

    def decode(self, word: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.symbols[i] for i in word)

    def is_admissible(self, word: Sequence[int]) -> bool:
        return all(self.matrix[a, b] for a, b in zip(word, word[1:]))

    def __eq__(self, other):
        if not isinstance(other, SftModel):
            return NotImplemented
        return self.symbols == other.symbols and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.symbols, self.matrix.tobytes()))

    def __repr__(self):
        return f"SftModel(symbols={list(self.symbols)}, matrix={self.matrix.tolist()})"


@dataclass(frozen=True)
class CyclicDecomposition:
    """Period ``m`` and the cyclic classes of an irreducible graph.

    ``class_of[i]`` is the class of symbol ``i``; every edge ``i -> j``
    satisfies ``class_of[j] == class_of[i] + 1 (mod m)``.
    """

    period: int
    class_of: tuple[int, ...]
    classes: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ModelDiagnostics:
    irreducible: bool
    aperiodic: bool
    period: int | None
    components: int
    dead_rows: tuple[int, ...]
    dead_columns: tuple[int, ...]

    @property
    def ok(self) -> bool:
        return self.irreducible and self.aperiodic and not self.dead_rows and not self.dead_columns


# -- graph primitives on boolean adjacency arrays -----------------------------

def bfs_distances(adj: np.ndarray, root: int) -> np.ndarray:
    n = adj.shape[0]
    dist = np.full(n, -1, dtype=np.int64)
    dist[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def is_irreducible(adj: np.ndarray) -> bool:
    adj = np.asarray(adj) != 0
    n = adj.shape[0]
    if n == 0:
        return False
    if n == 1:
        return bool(adj[0, 0])
    return bool(np.all(bfs_distances(adj, 0) >= 0) and np.all(bfs_distances(adj.T, 0) >= 0))


def cyclic_classes(adj: np.ndarray, root: int = 0) -> CyclicDecomposition:
    """Period and cyclic classes of an irreducible graph.

    BFS from ``root``; the period is the gcd over edges ``u -> v`` of
    ``dist(u) + 1 - dist(v)`` and classes are BFS distances mod the period.
    """
    adj = np.asarray(adj) != 0
    if not is_irreducible(adj):
        raise PreconditionError("graph is not irreducible (not strongly connected)")
    dist = bfs_distances(adj, root)
    g = 0
    for u, v in zip(*np.nonzero(adj)):
        g = math.gcd(g, int(abs(dist[u] + 1 - dist[v])))
    class_of = tuple(int(d % g) for d in dist)
    classes = tuple(tuple(i for i, c in enumerate(class_of) if c == s) for s in range(g))
    return CyclicDecomposition(period=g, class_of=class_of, classes=classes)


def strong_components(adj: np.ndarray) -> list[list[int]]:
    adj = np.asarray(adj) != 0
    n = adj.shape[0]
    reach = adj | np.eye(n, dtype=bool)
    for k in range(n):
        reach |= reach[:, [k]] & reach[[k], :]
    mutual = reach & reach.T
    seen: set[int] = set()
    comps = []
    for i in range(n):
        if i not in seen:
            comp = [int(j) for j in np.flatnonzero(mutual[i])]
            seen.update(comp)
            comps.append(comp)
    return comps


# -- model level operations ---------------------------------------------------

def validate(model: SftModel) -> ModelDiagnostics:
    adj = model.matrix != 0
    irreducible = is_irreducible(adj)
    period_ = cyclic_classes(adj).period if irreducible else None
    return ModelDiagnostics(
        irreducible=irreducible,
        aperiodic=period_ == 1,
        period=period_,
        components=len(strong_components(adj)),
        dead_rows=tuple(int(i) for i in np.flatnonzero(~adj.any(axis=1))),
        dead_columns=tuple(int(i) for i in np.flatnonzero(~adj.any(axis=0))),
    )


def require_primitive(model: SftModel) -> None:
    diag = validate(model)
    if not diag.irreducible:
        raise PreconditionError(f"transition matrix is reducible ({diag.components} strong components)")
    if not diag.aperiodic:
        raise PreconditionError(f"transition matrix is periodic with period {diag.period}")


def period(model: SftModel, root: int | None = None) -> CyclicDecomposition:
    """Cyclic decomposition of an irreducible model; class 0 holds ``root``.

    ``root`` defaults to the lowest-index symbol.
    """
    return cyclic_classes(model.matrix, 0 if root is None else root)


def admissible_words(model: SftModel, n: int) -> Iterator[Word]:
    """All admissible words of length ``n`` in lexicographic order.

    For ``n == 0`` the single empty word is produced.
    """
    if n < 0:
        raise ValueError("word length must be non-negative")
    if n == 0:
        yield ()
        return
    successors = [tuple(int(j) for j in np.flatnonzero(row)) for row in model.matrix]
    stack: list[Word] = [(i,) for i in reversed(range(model.size))]
    while stack:
        word = stack.pop()
        if len(word) == n:
            yield word
            continue
        for j in reversed(successors[word[-1]]):
            stack.append(word + (j,))


def count_words(model: SftModel, n: int) -> int:
    if n == 0:
        return 1
    a = model.matrix.astype(object)
    total = np.ones(model.size, dtype=object)
    for _ in range(n - 1):
        total = a @ total
    return int(sum(total))


def submodel(model: SftModel, indices: Sequence[int]) -> SftModel:
    idx = sorted(set(int(i) for i in indices))
    return SftModel([model.symbols[i] for i in idx], model.matrix[np.ix_(idx, idx)])


def restrict(model: SftModel, delta: Iterable) -> SftModel:
    """Restriction ``A_Delta`` of the model to a proper, non-empty sub-alphabet.

    ``delta`` holds symbol labels. Irreducibility of the result is not checked.
    """
    idx = {model.index(s) for s in delta}
    if not idx:
        raise PreconditionError("Delta must be non-empty")
    if len(idx) == model.size:
        raise PreconditionError("Delta must be a proper subset of the alphabet (Delta != V)")
    return submodel(model, sorted(idx))


@dataclass(frozen=True, eq=False)
class BlockModel:
    """m-block recoding: admissible m-words as symbols, ``(a) -> (b)`` iff ``a[-1] -> b[0]``."""

    base: SftModel
    block_length: int
    block_symbols: tuple[Word, ...]
    block_matrix: np.ndarray
    model: SftModel

    def flatten(self, blocks: Sequence[int]) -> Word:
        return tuple(s for b in blocks for s in self.block_symbols[b])


def block_label(model: SftModel, word: Sequence[int]) -> str:
    labels = model.decode(word)
    if len(labels) == 1:
        return labels[0]
    sep = "" if all(len(s) == 1 for s in model.symbols) else "."
    return sep.join(labels)


def block_recode(model: SftModel, m: int) -> BlockModel:
    if m < 1:
        raise ValueError("block length must be at least 1")
    blocks = tuple(admissible_words(model, m))
    if not blocks:
        raise PreconditionError(f"no admissible words of length {m}")
    last = np.array([b[-1] for b in blocks], dtype=np.intp)
    first = np.array([b[0] for b in blocks], dtype=np.intp)
    matrix = model.matrix[np.ix_(last, first)].copy()
    labels = [block_label(model, b) for b in blocks]
    return BlockModel(
        base=model,
        block_length=m,
        block_symbols=blocks,
        block_matrix=_frozen(matrix),
        model=SftModel(labels, matrix),
    )
