"""GF(2) code machinery: parity-check parsing, index sets, edge numbering, encoding."""

from dataclasses import dataclass

import numpy as np


class AlistParseError(ValueError):
    """Malformed alist input; `line` is the 1-based offending line number."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"alist line {line}: {message}")


class ParityCheckMatrix:
    """
    Sparse binary m x n parity-check matrix with Tanner-graph adjacency.

    ``rows[i]`` holds the sorted column indices of the ones in row i (the
    check neighborhood A(i)); ``cols[j]`` the row indices per column (B(j)).
    Edges are numbered row-major: rows in increasing order, columns
    ascending within a row, so edge k is ``edges[k] = (p_k, q_k)``.
    Indices are 0-based internally; the alist format on disk is 1-based.

    Instances are immutable after construction and safe to share across
    workers. Construction also precomputes padded adjacency index arrays
    used by the vectorized decoders; padding slots point at sentinel
    positions so gathers stay branch-free.
    """

    def __init__(self, m, n, rows):
        if m < 1 or n < 1:
            raise ValueError("m and n must be positive")
        if len(rows) != m:
            raise ValueError(f"expected {m} rows, got {len(rows)}")
        self.m = m
        self.n = n
        self.rows = []
        for i, r in enumerate(rows):
            r = np.unique(np.asarray(r, dtype=np.int64))
            if r.size == 0:
                raise ValueError(f"row {i} is empty")
            if r[0] < 0 or r[-1] >= n:
                raise ValueError(f"row {i} has column index out of range [0,{n})")
            self.rows.append(r)
        cols = [[] for _ in range(n)]
        for i, r in enumerate(self.rows):
            for j in r:
                cols[j].append(i)
        self.cols = [np.asarray(c, dtype=np.int64) for c in cols]
        self.edges = np.array(
            [(i, j) for i in range(m) for j in self.rows[i]], dtype=np.int64
        )
        self.e = len(self.edges)
        self.edge_check = self.edges[:, 0].copy()
        self.edge_var = self.edges[:, 1].copy()
        self._build_adjacency()

    def _build_adjacency(self):
        m, n, e = self.m, self.n, self.e
        row_deg = np.array([len(r) for r in self.rows])
        col_deg = np.array([len(c) for c in self.cols])
        self.row_deg = row_deg
        self.col_deg = col_deg
        dr, dc = int(row_deg.max()), int(col_deg.max())
        self.dr_max, self.dc_max = dr, dc

        # (m, dr) variable indices per check; pad slots point past the end
        # of the state vector so gathers against an appended sentinel work.
        self.row_pad = np.full((m, dr), n, dtype=np.int64)
        for i, r in enumerate(self.rows):
            self.row_pad[i, : len(r)] = r
        self.row_mask = self.row_pad < n

        # edge id of check-slot (i, t): row-major numbering means edges of
        # row i are contiguous starting at the degree prefix sum.
        row_start = np.concatenate([[0], np.cumsum(row_deg)])
        self.check_edges = np.full((m, dr), e, dtype=np.int64)
        for i in range(m):
            self.check_edges[i, : row_deg[i]] = np.arange(
                row_start[i], row_start[i + 1]
            )

        # per-variable flat (check,slot) positions and edge ids
        self.var_slot = np.full((n, dc), m * dr, dtype=np.int64)
        self.var_edges = np.full((n, dc), e, dtype=np.int64)
        fill = np.zeros(n, dtype=np.int64)
        for i in range(m):
            for t, j in enumerate(self.rows[i]):
                self.var_slot[j, fill[j]] = i * dr + t
                self.var_edges[j, fill[j]] = row_start[i] + t
                fill[j] += 1

    @classmethod
    def from_dense(cls, H):
        H = np.asarray(H)
        rows = [np.flatnonzero(H[i]) for i in range(H.shape[0])]
        return cls(H.shape[0], H.shape[1], rows)

    def to_dense(self, dtype=np.uint8):
        H = np.zeros((self.m, self.n), dtype=dtype)
        for i, r in enumerate(self.rows):
            H[i, r] = 1
        return H

    def gather_rows(self, x, pad_value=1.0):
        """Gather x into shape (m, dr_max[, D]) with `pad_value` in pad slots."""
        x = np.asarray(x, dtype=np.float64)
        pad_shape = (1,) + x.shape[1:]
        xp = np.concatenate([x, np.full(pad_shape, pad_value)], axis=0)
        return xp[self.row_pad]

    def scatter_to_vars(self, contrib):
        """Sum per-check-slot contributions (m, dr_max[, D]) onto variables.

        Accumulates in fixed slot order so batched and single-vector calls
        produce bit-identical sums.
        """
        flat = contrib.reshape((self.m * self.dr_max,) + contrib.shape[2:])
        pad_shape = (1,) + flat.shape[1:]
        flat = np.concatenate([flat, np.zeros(pad_shape)], axis=0)
        gathered = flat[self.var_slot]
        acc = gathered[:, 0]
        for t in range(1, self.dc_max):
            acc = acc + gathered[:, t]
        return acc

    def __repr__(self):
        return f"ParityCheckMatrix(m={self.m}, n={self.n}, e={self.e})"


def parse_alist(text):
    """
    Parse alist text into a ParityCheckMatrix.

    Format: line 1 "n m"; line 2 "max_col_deg max_row_deg"; line 3 the n
    column degrees; line 4 the m row degrees; then n lines of 1-based row
    indices per column and m lines of 1-based column indices per row.
    Zero entries (padding used by some published files) are ignored.
    The row-index section defines the matrix; the column section and the
    degree lists are cross-checked and mismatches are reported with the
    line number.
    """
    lines = text.splitlines()

    def toks(idx, what):
        if idx >= len(lines):
            raise AlistParseError(idx + 1, f"unexpected end of file ({what})")
        parts = lines[idx].split()
        try:
            return [int(p) for p in parts]
        except ValueError:
            raise AlistParseError(idx + 1, f"non-integer token in {what}") from None

    header = toks(0, "header")
    if len(header) != 2:
        raise AlistParseError(1, "header must be 'n m'")
    n, m = header
    if n < 1 or m < 1:
        raise AlistParseError(1, "n and m must be positive")
    maxdeg = toks(1, "max degrees")
    if len(maxdeg) != 2:
        raise AlistParseError(2, "expected 'max_col_deg max_row_deg'")
    col_deg = toks(2, "column degree list")
    if len(col_deg) != n:
        raise AlistParseError(3, f"expected {n} column degrees, got {len(col_deg)}")
    row_deg = toks(3, "row degree list")
    if len(row_deg) != m:
        raise AlistParseError(4, f"expected {m} row degrees, got {len(row_deg)}")

    col_lists = []
    for j in range(n):
        line_no = 4 + j
        entries = [v for v in toks(line_no, f"column {j + 1} indices") if v != 0]
        for v in entries:
            if v < 1 or v > m:
                raise AlistParseError(line_no + 1, f"row index {v} out of range [1,{m}]")
        if len(set(entries)) != len(entries):
            raise AlistParseError(line_no + 1, "duplicate index")
        if len(entries) != col_deg[j]:
            raise AlistParseError(
                line_no + 1,
                f"column {j + 1} lists {len(entries)} entries, degree says {col_deg[j]}",
            )
        col_lists.append(sorted(v - 1 for v in entries))

    row_lists = []
    for i in range(m):
        line_no = 4 + n + i
        entries = [v for v in toks(line_no, f"row {i + 1} indices") if v != 0]
        for v in entries:
            if v < 1 or v > n:
                raise AlistParseError(
                    line_no + 1, f"column index {v} out of range [1,{n}]"
                )
        if len(set(entries)) != len(entries):
            raise AlistParseError(line_no + 1, "duplicate index")
        if len(entries) != row_deg[i]:
            raise AlistParseError(
                line_no + 1,
                f"row {i + 1} lists {len(entries)} entries, degree says {row_deg[i]}",
            )
        row_lists.append(sorted(v - 1 for v in entries))

    # cross-check the two sections against each other
    rows_from_cols = [[] for _ in range(m)]
    for j, rows in enumerate(col_lists):
        for i in rows:
            rows_from_cols[i].append(j)
    for i in range(m):
        if sorted(rows_from_cols[i]) != row_lists[i]:
            raise AlistParseError(
                4 + n + i + 1, f"row {i + 1} disagrees with the column section"
            )

    return ParityCheckMatrix(m, n, row_lists)


def write_alist(H):
    """Serialize a ParityCheckMatrix to alist text (unpadded variant)."""
    out = [f"{H.n} {H.m}", f"{int(H.col_deg.max())} {int(H.row_deg.max())}"]
    out.append(" ".join(str(int(d)) for d in H.col_deg))
    out.append(" ".join(str(int(d)) for d in H.row_deg))
    for j in range(H.n):
        out.append(" ".join(str(int(i) + 1) for i in H.cols[j]))
    for i in range(H.m):
        out.append(" ".join(str(int(j) + 1) for j in H.rows[i]))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GeneratorBasis:
    """Basis of the GF(2) nullspace of H; rows of `basis` are codewords."""

    basis: np.ndarray  # (k, n) uint8
    n: int

    @property
    def k(self):
        return self.basis.shape[0]


def gf2_row_reduce(A):
    """In-place-style GF(2) row reduction; returns (rref copy, pivot columns)."""
    A = (np.asarray(A) & 1).astype(np.uint8)
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        hits = np.flatnonzero(A[r:, c])
        if hits.size == 0:
            continue
        p = r + int(hits[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        others = np.flatnonzero(A[:, c])
        others = others[others != r]
        if others.size:
            A[others] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def gf2_rank(H):
    dense = H.to_dense() if isinstance(H, ParityCheckMatrix) else H
    return len(gf2_row_reduce(dense)[1])


def gf2_nullspace(H):
    """
    Nullspace basis of H over GF(2) via Gaussian elimination.

    k = n - rank(H); one basis vector per free column, with pivot entries
    back-filled from the reduced rows. Exact arithmetic, no tolerances.
    """
    dense = H.to_dense() if isinstance(H, ParityCheckMatrix) else np.asarray(H)
    n = dense.shape[1]
    R, pivots = gf2_row_reduce(dense)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for r, p in enumerate(pivots):
            basis[t, p] = R[r, f]
    return GeneratorBasis(basis=basis, n=n)


def bits_to_bipolar(bits):
    """Map GF(2) bits to the bipolar alphabet: 0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def bipolar_to_bits(x):
    return (np.asarray(x) < 0).astype(np.uint8)


def random_codeword(basis, rng):
    """Uniformly random bipolar codeword: random GF(2) combination of the basis."""
    if basis.k == 0:
        return np.ones(basis.n)
    coeffs = rng.integers(0, 2, size=basis.k, dtype=np.uint8)
    bits = (coeffs @ basis.basis) & 1
    return bits_to_bipolar(bits)


def check_parity(x, H):
    """True iff every check product prod_{j in A(i)} x_j equals +1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != H.n:
        raise ValueError(f"word length {x.shape[0]} != n={H.n}")
    Q = H.gather_rows(x, pad_value=1.0).prod(axis=1)
    return bool(np.all(Q == 1.0))


def sign_decision(s):
    """Component-wise bipolar decision; ties at 0 resolve to +1."""
    s = np.asarray(s, dtype=np.float64)
    return np.where(s >= 0.0, 1.0, -1.0)


def hamming_distance(x, ref):
    return int(np.sum(np.asarray(x) != np.asarray(ref)))
