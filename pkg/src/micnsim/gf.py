"""Arithmetic over GF(2^e) and incremental reduced-row-echelon bases.

Field elements are plain ints in ``0 .. 2^e - 1`` whose bits are the
polynomial coefficients over GF(2).  Vectors are numpy ``uint8`` arrays,
which covers every supported field (e up to 8).  Addition is XOR;
multiplication goes through a full q-by-q table so that whole vectors can
be scaled with one fancy-indexing operation.
"""

from __future__ import annotations

import numpy as np

# One irreducible polynomial per extension degree.  For e=8 this is
# x^8 + x^4 + x^3 + x + 1 (0x11B); any irreducible choice behaves the same,
# this one is simply the most widely used.
IRREDUCIBLE_POLY = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0x11B,
}


def _mul_slow(x: int, y: int, poly: int, e: int) -> int:
    """Carry-less multiply with polynomial reduction (no tables)."""
    r = 0
    while y:
        if y & 1:
            r ^= x
        y >>= 1
        x <<= 1
        if x & (1 << e):
            x ^= poly
    return r


class Field:
    """GF(2^e) with log/antilog tables and vectorized helpers.

    Parameters
    ----------
    exponent : int
        Extension degree e; the field has q = 2^e elements.  1 <= e <= 8.
    polynomial : int, optional
        Reduction polynomial as a bitmask of degree e.  Defaults to the
        entry in ``IRREDUCIBLE_POLY``.
    """

    def __init__(self, exponent: int, polynomial: int | None = None):
        if exponent not in IRREDUCIBLE_POLY:
            raise ValueError(f"unsupported field exponent {exponent}; need 1..8")
        self.exponent = exponent
        self.polynomial = IRREDUCIBLE_POLY[exponent] if polynomial is None else polynomial
        self.order = 1 << exponent  # q

        q = self.order
        if self.polynomial >> exponent != 1:
            raise ValueError("reduction polynomial must have degree equal to the exponent")

        generator = self._find_generator()
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = _mul_slow(x, generator, self.polynomial, exponent)
        if x != 1:
            raise ValueError(f"0x{self.polynomial:X} is not irreducible over GF(2)")
        self.generator = generator
        self._exp = exp
        self._log = log

        # Dense multiplication table: mul_table[a, b] = a*b.
        table = np.zeros((q, q), dtype=np.uint8)
        if q > 2:
            idx = (np.add.outer(log[1:], log[1:])) % (q - 1)
            table[1:, 1:] = exp[idx].astype(np.uint8)
        else:
            table[1, 1] = 1
        self.mul_table = table

        inv = np.zeros(q, dtype=np.uint8)
        inv[1] = 1
        for a in range(2, q):
            inv[a] = exp[(q - 1 - log[a]) % (q - 1)]
        self.inv_table = inv

    def _find_generator(self) -> int:
        q = self.order
        if q == 2:
            return 1
        for g in range(2, q):
            x, steps = 1, 0
            while True:
                x = _mul_slow(x, g, self.polynomial, self.exponent)
                steps += 1
                if x == 1:
                    break
                if steps > q:
                    raise ValueError(f"0x{self.polynomial:X} is not irreducible over GF(2)")
            if steps == q - 1:
                return g
        raise ValueError(f"no generator found for polynomial 0x{self.polynomial:X}")

    def __repr__(self) -> str:
        return f"Field(2^{self.exponent}, poly=0x{self.polynomial:X})"

    # -- scalar ops ------------------------------------------------------

    def mul(self, x: int, y: int) -> int:
        return int(self.mul_table[x, y])

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse in a field")
        return int(self.inv_table[x])

    # -- vector ops (uint8 arrays) ----------------------------------------
    #
    # Scaling by 1 is the identity in every GF(2^e) and never touches the
    # table; besides being faster, this makes GF(2) coding work on byte
    # payloads, whose bytes are then 8 packed field elements each.

    def scale(self, vec: np.ndarray, alpha: int) -> np.ndarray:
        """alpha * vec, elementwise."""
        if alpha == 1:
            return vec.copy()
        return self.mul_table[alpha, vec]

    def addmul_into(self, dst: np.ndarray, src: np.ndarray, alpha: int) -> None:
        """dst += alpha * src in place (addition is XOR)."""
        if alpha == 1:
            dst ^= src
        elif alpha:
            dst ^= self.mul_table[alpha, src]

    def random_nonzero(self, rng) -> int:
        return int(rng.integers(1, self.order))


def field_mul(x: int, y: int, field: Field) -> int:
    """Product of two field elements (total function; 0 annihilates)."""
    return field.mul(x, y)


def field_inv(x: int, field: Field) -> int:
    """Multiplicative inverse; raises ZeroDivisionError on 0."""
    return field.inv(x)


def leading_index(vec: np.ndarray) -> int | None:
    """1-based position of the first nonzero coordinate, None if all zero."""
    nz = np.nonzero(vec)[0]
    if nz.size == 0:
        return None
    return int(nz[0]) + 1


class NotDecodable:
    """Returned by RrefBasis.decode when the rank is still short of n."""

    __slots__ = ("rank",)

    def __init__(self, rank: int):
        self.rank = rank

    def __repr__(self) -> str:
        return f"NotDecodable(rank={self.rank})"


class RrefBasis:
    """Row space held in reduced row-echelon form, with payload rows.

    Rows are inserted one at a time; each insertion either grows the rank
    by one (the vector was independent of the stored span) or leaves the
    basis untouched.  Payload byte rows ride along through exactly the same
    eliminations, so at full rank the payload rows *are* the decoded
    original segments (the coefficient part has become the identity).

    The basis is canonical: the same set of inserted vectors produces the
    same matrix regardless of insertion order.
    """

    def __init__(self, field: Field, n: int, payload_size: int = 0):
        if n < 1:
            raise ValueError("dimension must be at least 1")
        self.field = field
        self.n = n
        self.payload_size = payload_size
        self._rows: list[np.ndarray] = []       # sorted by pivot column
        self._payloads: list[np.ndarray] = []
        self._pivot_cols: list[int] = []        # 0-based, strictly increasing

    @property
    def rank(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> frozenset[int]:
        """1-based pivot columns; equals the set of leading indices the span produces."""
        return frozenset(c + 1 for c in self._pivot_cols)

    def rows(self):
        """Read-only view of (pivot, coefficients, payload) triples."""
        for col, row, pay in zip(self._pivot_cols, self._rows, self._payloads):
            yield col + 1, row, pay

    def insert(self, vec: np.ndarray, payload: bytes | np.ndarray | None = None) -> bool:
        """Insert a vector (and its payload); returns True iff it was innovative."""
        v = np.asarray(vec, dtype=np.uint8)
        if v.shape != (self.n,):
            raise ValueError(f"vector has length {v.shape}, basis dimension is {self.n}")
        v = v.copy()
        if payload is None:
            p = np.zeros(self.payload_size, dtype=np.uint8)
        else:
            p = np.frombuffer(bytes(payload), dtype=np.uint8).copy() if not isinstance(payload, np.ndarray) else payload.astype(np.uint8).copy()
            if p.shape != (self.payload_size,):
                raise ValueError(f"payload has length {p.size}, expected {self.payload_size}")

        field = self.field
        # Reduce the incoming row against the stored basis.
        for col, row, pay in zip(self._pivot_cols, self._rows, self._payloads):
            coef = int(v[col])
            if coef:
                field.addmul_into(v, row, coef)
                field.addmul_into(p, pay, coef)
        nz = np.nonzero(v)[0]
        if nz.size == 0:
            return False
        col = int(nz[0])
        lead = int(v[col])
        if lead != 1:
            inv = field.inv(lead)
            v = field.scale(v, inv)
            p = field.scale(p, inv)
        # Clear the new pivot column from the existing rows to restore RREF.
        for other, opay in zip(self._rows, self._payloads):
            coef = int(other[col])
            if coef:
                field.addmul_into(other, v, coef)
                field.addmul_into(opay, p, coef)
        at = int(np.searchsorted(np.asarray(self._pivot_cols, dtype=np.int64), col))
        self._pivot_cols.insert(at, col)
        self._rows.insert(at, v)
        self._payloads.insert(at, p)
        return True

    def contains_index(self, i: int) -> bool:
        """True iff the span holds a vector whose leading index is i (1-based)."""
        return (i - 1) in set(self._pivot_cols)

    def decode(self):
        """The n original payload segments at full rank, else NotDecodable."""
        if self.rank < self.n:
            return NotDecodable(self.rank)
        return [bytes(p) for p in self._payloads]

    def reencode(self, i: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """Fresh combination with leading index exactly i (1-based).

        Takes the pivot-i row plus uniformly weighted multiples of every row
        with a higher pivot, then scales the whole thing by a uniform nonzero
        element.  With a full plaintext basis this samples the leading-index
        subset uniformly, which is exactly what a source does.
        """
        col = i - 1
        try:
            at = self._pivot_cols.index(col)
        except ValueError:
            raise AssertionError(f"reencode precondition violated: no pivot at index {i}")
        field = self.field
        vec = self._rows[at].copy()
        pay = self._payloads[at].copy()
        higher = len(self._rows) - at - 1
        if higher:
            weights = rng.integers(0, field.order, size=higher)
            for off, w in enumerate(weights):
                w = int(w)
                if w:
                    field.addmul_into(vec, self._rows[at + 1 + off], w)
                    field.addmul_into(pay, self._payloads[at + 1 + off], w)
        alpha = field.random_nonzero(rng)
        if alpha != 1:
            vec = field.scale(vec, alpha)
            pay = field.scale(pay, alpha)
        return vec, pay

    def matrix(self) -> np.ndarray:
        """Stacked coefficient rows (rank x n), RREF by construction."""
        if not self._rows:
            return np.zeros((0, self.n), dtype=np.uint8)
        return np.stack(self._rows)


def span_leading_indices(basis: RrefBasis) -> frozenset[int]:
    """Leading indices reachable in the span; identical to the pivot set."""
    return basis.pivots


def matrix_rank(field: Field, rows) -> int:
    """Rank of an iterable of vectors via incremental insertion."""
    if not rows:
        return 0
    basis = RrefBasis(field, len(rows[0]))
    for r in rows:
        basis.insert(r)
    return basis.rank


def gf2_rank_ints(rows: list[int]) -> int:
    """Rank over GF(2) of rows packed as ints (bit k = one coordinate)."""
    pivots: dict[int, int] = {}
    rank = 0
    for r in rows:
        while r:
            h = r.bit_length()
            p = pivots.get(h)
            if p is None:
                pivots[h] = r
                rank += 1
                break
            r ^= p
    return rank
