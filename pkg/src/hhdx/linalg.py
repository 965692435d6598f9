"""Exact linear algebra over F_p.

Matrices are dense numpy int64 arrays with entries reduced to [0, p).
Elimination uses the first nonzero pivot in row-major order, so every
echelon form, kernel basis and cohomology representative is deterministic.
On top of the matrix layer sit bounded cochain complexes, first-quadrant
double complexes (sign convention: d = d_h + (-1)^i d_v on column i), and
the spectral sequence of the column filtration computed through explicit
subquotient bases.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError

# Guard for accidental huge dense allocations (entries, not bytes).
MAX_MATRIX_ENTRIES = 40_000_000


def _as_array(p, data, rows=None, cols=None):
    a = np.asarray(data, dtype=np.int64)
    if a.ndim == 1:
        a = a.reshape(1, -1) if rows in (None, 1) else a.reshape(-1, 1)
    if a.ndim != 2:
        raise ValueError("matrix data must be 2-dimensional")
    if a.size > MAX_MATRIX_ENTRIES:
        raise CapacityError(f"dense matrix with {a.size} entries exceeds capacity")
    return np.mod(a, p)


def _rref(a, p):
    """Reduced row echelon form mod p.  Returns (rref rows, pivot columns)."""
    a = np.mod(np.asarray(a, dtype=np.int64), p).copy()
    nrows, ncols = a.shape
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])  # first nonzero pivot, row-major
        if i != r:
            a[[r, i]] = a[[i, r]]
        inv = pow(int(a[r, c]), p - 2, p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        rows_nz = np.nonzero(col)[0]
        if rows_nz.size:
            a[rows_nz] = (a[rows_nz] - np.outer(col[rows_nz], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], tuple(pivots)


class FpMatrix:
    """Dense exact matrix over F_p."""

    __slots__ = ("p", "a")

    def __init__(self, p, data):
        if p < 2:
            raise ValueError("p must be at least 2")
        self.p = p
        self.a = _as_array(p, data)

    @classmethod
    def zeros(cls, p, rows, cols):
        if rows * cols > MAX_MATRIX_ENTRIES:
            raise CapacityError(f"dense matrix with {rows * cols} entries exceeds capacity")
        return cls(p, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p, n):
        return cls(p, np.eye(n, dtype=np.int64))

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    @property
    def shape(self):
        return self.a.shape

    def __matmul__(self, other):
        if isinstance(other, FpMatrix):
            if self.p != other.p:
                raise ValueError("modulus mismatch")
            if self.cols != other.rows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            return FpMatrix(self.p, (self.a @ other.a) % self.p)
        v = np.mod(np.asarray(other, dtype=np.int64), self.p)
        return (self.a @ v) % self.p

    def __add__(self, other):
        return FpMatrix(self.p, self.a + other.a)

    def __sub__(self, other):
        return FpMatrix(self.p, self.a - other.a)

    def __neg__(self):
        return FpMatrix(self.p, -self.a)

    def scale(self, c):
        return FpMatrix(self.p, self.a * (c % self.p))

    def transpose(self):
        return FpMatrix(self.p, self.a.T)

    def __eq__(self, other):
        return (
            isinstance(other, FpMatrix)
            and self.p == other.p
            and self.shape == other.shape
            and np.array_equal(self.a, other.a)
        )

    def __repr__(self):
        return f"FpMatrix(p={self.p}, shape={self.shape})"

    def is_zero(self):
        return not self.a.any()

    def rref(self):
        rows, pivots = _rref(self.a, self.p)
        return FpMatrix(self.p, rows) if rows.size else FpMatrix.zeros(self.p, 0, self.cols), pivots

    def rank(self):
        return len(_rref(self.a, self.p)[1])

    def kernel_basis(self):
        """Rows spanning the right kernel {v : M v = 0}, in RREF."""
        red, pivots = _rref(self.a, self.p)
        free = [c for c in range(self.cols) if c not in pivots]
        if not free:
            return np.zeros((0, self.cols), dtype=np.int64)
        basis = np.zeros((len(free), self.cols), dtype=np.int64)
        for k, c in enumerate(free):
            basis[k, c] = 1
            for r, pc in enumerate(pivots):
                basis[k, pc] = (-int(red[r, c])) % self.p
        return _rref(basis, self.p)[0]

    def image_basis(self):
        """Rows spanning the column space, in RREF."""
        return _rref(self.a.T, self.p)[0]

    def tolist(self):
        return [[int(x) for x in row] for row in self.a]


def rank_kernel_image(m):
    """Rank, kernel basis rows and image basis rows of an FpMatrix."""
    return m.rank(), m.kernel_basis(), m.image_basis()


class Subspace:
    """Subspace of F_p^n stored as an RREF row basis (canonical)."""

    __slots__ = ("p", "n", "rows", "pivots")

    def __init__(self, p, n, rows=None):
        self.p = p
        self.n = n
        if rows is None or len(rows) == 0:
            self.rows = np.zeros((0, n), dtype=np.int64)
            self.pivots = ()
        else:
            self.rows, self.pivots = _rref(np.asarray(rows, dtype=np.int64).reshape(-1, n), p)

    @classmethod
    def full(cls, p, n):
        return cls(p, n, np.eye(n, dtype=np.int64))

    @property
    def dim(self):
        return self.rows.shape[0]

    def reduce(self, v):
        """Canonical representative of v modulo this subspace."""
        v = np.mod(np.asarray(v, dtype=np.int64), self.p).copy()
        for r, c in enumerate(self.pivots):
            if v[c]:
                v = (v - v[c] * self.rows[r]) % self.p
        return v

    def reduce_rows(self, mat):
        out = np.mod(np.asarray(mat, dtype=np.int64), self.p).copy()
        for r, c in enumerate(self.pivots):
            col = out[:, c].copy()
            nz = np.nonzero(col)[0]
            if nz.size:
                out[nz] = (out[nz] - np.outer(col[nz], self.rows[r])) % self.p
        return out

    def contains(self, v):
        return not self.reduce(v).any()

    def contains_space(self, other):
        return all(self.contains(row) for row in other.rows)

    def express(self, v):
        """Coordinates of v in the RREF basis rows; None if not contained."""
        v = np.mod(np.asarray(v, dtype=np.int64), self.p)
        coords = np.array([v[c] for c in self.pivots], dtype=np.int64)
        if self.dim:
            resid = (v - coords @ self.rows) % self.p
        else:
            resid = v
        if resid.any():
            return None
        return coords

    def sum(self, other):
        if self.n != other.n:
            raise ValueError("ambient dimension mismatch")
        return Subspace(self.p, self.n, np.vstack([self.rows, other.rows]))

    def intersect(self, other):
        """Zassenhaus-free intersection via left kernel of the stacked basis."""
        if self.dim == 0 or other.dim == 0:
            return Subspace(self.p, self.n)
        stacked = np.vstack([self.rows, -other.rows]) % self.p
        left_kernel = FpMatrix(self.p, stacked.T).kernel_basis()
        vecs = (left_kernel[:, : self.dim] @ self.rows) % self.p
        return Subspace(self.p, self.n, vecs)

    def quotient_reps(self, sub):
        """Canonical transversal rows for self/sub (sub must be contained)."""
        reduced = sub.reduce_rows(self.rows)
        return Subspace(self.p, self.n, reduced)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.n == other.n
            and self.p == other.p
            and self.rows.shape == other.rows.shape
            and np.array_equal(self.rows, other.rows)
        )

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.n}, p={self.p})"


def cohomology_at(d_in, d_out, p, dim):
    """(dimension, representative rows) of ker(d_out)/im(d_in).

    d_in maps into the space (may be None), d_out maps out of it (may be None).
    Representatives are kernel vectors reduced modulo the image, re-echelonized.
    """
    if d_out is None:
        kernel = Subspace.full(p, dim)
    else:
        kernel = Subspace(p, dim, d_out.kernel_basis())
    if d_in is None:
        image = Subspace(p, dim)
    else:
        image = Subspace(p, dim, d_in.image_basis())
    reps = kernel.quotient_reps(image)
    return reps.dim, reps.rows


class CochainComplex:
    """Bounded cochain complex over F_p with differentials raising degree."""

    def __init__(self, p, dims, diffs, check=True):
        self.p = p
        if not dims:
            raise ValueError("empty complex")
        self.lo = min(dims)
        self.hi = max(dims)
        self.dims = {m: int(dims.get(m, 0)) for m in range(self.lo, self.hi + 1)}
        self.diffs = {}
        for m in range(self.lo, self.hi):
            d = diffs.get(m)
            if d is None:
                d = FpMatrix.zeros(p, self.dims[m + 1], self.dims[m])
            if d.shape != (self.dims[m + 1], self.dims[m]):
                raise ValueError(f"differential at degree {m} has shape {d.shape}, "
                                 f"expected {(self.dims[m + 1], self.dims[m])}")
            self.diffs[m] = d
        if check:
            for m in range(self.lo, self.hi - 1):
                if not (self.diffs[m + 1] @ self.diffs[m]).is_zero():
                    raise ValueError(f"d∘d != 0 at degree {m}")

    def differential(self, m):
        if m in self.diffs:
            return self.diffs[m]
        rows = self.dims.get(m + 1, 0)
        cols = self.dims.get(m, 0)
        return FpMatrix.zeros(self.p, rows, cols)

    def cohomology(self, m):
        """(dimension, representative basis rows) at degree m."""
        if m < self.lo or m > self.hi:
            raise ValueError(f"degree {m} outside complex range [{self.lo}, {self.hi}]")
        d_out = self.diffs.get(m)
        d_in = self.diffs.get(m - 1)
        return cohomology_at(d_in, d_out, self.p, self.dims[m])

    def betti(self):
        return {m: self.cohomology(m)[0] for m in range(self.lo, self.hi + 1)}

    def euler_characteristic(self):
        return sum((-1) ** m * d for m, d in self.dims.items())


class DoubleComplex:
    """First-quadrant double complex with anticommuting differentials.

    dims maps (i, j) to a dimension.  d_h[(i, j)] : C^{i,j} -> C^{i+1,j} and
    d_v[(i, j)] : C^{i,j} -> C^{i,j+1} must satisfy d_h^2 = 0, d_v^2 = 0 and
    d_h d_v + d_v d_h = 0.  Build from commuting differentials with
    `from_commuting`, which flips d_v by (-1)^i on column i.
    """

    def __init__(self, p, dims, d_h, d_v, check=True):
        self.p = p
        self.dims = {}
        for (i, j), dim in dims.items():
            if i < 0 or j < 0:
                raise ValueError("double complex must live in the first quadrant")
            if dim:
                self.dims[(i, j)] = int(dim)
        if not self.dims:
            self.max_i = self.max_j = 0
        else:
            self.max_i = max(i for i, _ in self.dims)
            self.max_j = max(j for _, j in self.dims)
        if self.max_i > 64 or self.max_j > 64:
            raise CapacityError("double complex extent exceeds capacity")
        self.d_h = {k: m for k, m in d_h.items() if not m.is_zero()}
        self.d_v = {k: m for k, m in d_v.items() if not m.is_zero()}
        self._tot_cache = {}
        if check:
            self._check()

    def dim(self, i, j):
        return self.dims.get((i, j), 0)

    def horizontal(self, i, j):
        m = self.d_h.get((i, j))
        if m is None:
            m = FpMatrix.zeros(self.p, self.dim(i + 1, j), self.dim(i, j))
        return m

    def vertical(self, i, j):
        m = self.d_v.get((i, j))
        if m is None:
            m = FpMatrix.zeros(self.p, self.dim(i, j + 1), self.dim(i, j))
        return m

    def _check(self):
        for (i, j) in self.dims:
            hh = self.horizontal(i + 1, j) @ self.horizontal(i, j)
            if not hh.is_zero():
                raise ValueError(f"d_h^2 != 0 at {(i, j)}")
            vv = self.vertical(i, j + 1) @ self.vertical(i, j)
            if not vv.is_zero():
                raise ValueError(f"d_v^2 != 0 at {(i, j)}")
            anti = (self.vertical(i + 1, j) @ self.horizontal(i, j)) + \
                   (self.horizontal(i, j + 1) @ self.vertical(i, j))
            if not anti.is_zero():
                raise ValueError(f"d_h d_v + d_v d_h != 0 at {(i, j)}")

    @classmethod
    def from_commuting(cls, p, dims, d_h, d_v, check=True):
        """Build from commuting d_h, d_v by flipping d_v to (-1)^i d_v."""
        flipped = {}
        for (i, j), m in d_v.items():
            flipped[(i, j)] = m.scale(-1) if i % 2 else m
        return cls(p, dims, d_h, flipped, check=check)

    # -- totalization ------------------------------------------------------

    def total_blocks(self, n):
        """Ordered (i, j, offset, dim) blocks of T^n, ascending in i."""
        out = []
        off = 0
        for i in range(0, n + 1):
            j = n - i
            d = self.dim(i, j)
            if d:
                out.append((i, j, off, d))
                off += d
        return out

    def total_dim(self, n):
        return sum(b[3] for b in self.total_blocks(n))

    def total_differential(self, n):
        if n in self._tot_cache:
            return self._tot_cache[n]
        src = self.total_blocks(n)
        tgt = self.total_blocks(n + 1)
        mat = np.zeros((sum(b[3] for b in tgt), sum(b[3] for b in src)), dtype=np.int64)
        tgt_off = {(i, j): off for i, j, off, _ in tgt}
        for i, j, off, d in src:
            h = self.d_h.get((i, j))
            if h is not None and (i + 1, j) in tgt_off:
                o = tgt_off[(i + 1, j)]
                mat[o:o + h.rows, off:off + d] = h.a
            v = self.d_v.get((i, j))
            if v is not None and (i, j + 1) in tgt_off:
                o = tgt_off[(i, j + 1)]
                mat[o:o + v.rows, off:off + d] = v.a
        out = FpMatrix(self.p, mat)
        self._tot_cache[n] = out
        return out

    def totalize(self):
        top = self.max_i + self.max_j
        dims = {n: self.total_dim(n) for n in range(0, top + 1)}
        diffs = {n: self.total_differential(n) for n in range(0, top)}
        return CochainComplex(self.p, dims, diffs)

    # -- spectral sequence of the column filtration ------------------------

    def _approx_cycles(self, n, f, r):
        """A_r = {x in F^f T^n : dx in F^{f+r} T^{n+1}} as a Subspace of T^n."""
        blocks = self.total_blocks(n)
        total = sum(b[3] for b in blocks)
        sel = [np.arange(off, off + d) for i, j, off, d in blocks if i >= f]
        if not sel:
            return Subspace(self.p, total)
        cols = np.concatenate(sel)
        tgt_blocks = self.total_blocks(n + 1)
        tgt_total = sum(b[3] for b in tgt_blocks)
        low = [np.arange(off, off + d) for i, j, off, d in tgt_blocks if i < f + r]
        d_mat = self.total_differential(n).a
        sub = d_mat[:, cols]
        if low:
            rows_low = np.concatenate(low)
            restricted = FpMatrix(self.p, sub[rows_low, :]) if tgt_total else None
            ker = restricted.kernel_basis() if restricted is not None else np.eye(len(cols), dtype=np.int64)
        else:
            ker = np.eye(len(cols), dtype=np.int64)
        lift = np.zeros((ker.shape[0], total), dtype=np.int64)
        lift[:, cols] = ker
        return Subspace(self.p, total, lift)

    def spectral_sequence(self, max_page=None):
        """Pages E_1 .. E_maxpage of the column filtration spectral sequence.

        Each page carries dims, differentials between canonical representative
        bases, and the machinery asserts E_{r+1} = H(E_r, d_r) internally.
        """
        stab = self.max_i + self.max_j + 2
        if max_page is None:
            max_page = stab
        pages = []
        positions = [(i, j) for i in range(self.max_i + 1) for j in range(self.max_j + 1)]
        for r in range(1, max_page + 1):
            reps = {}
            denoms = {}
            dims = {}
            for (i, j) in positions:
                n = i + j
                total = self.total_dim(n)
                num = self._approx_cycles(n, i, r)
                upper = self._approx_cycles(n, i + 1, max(r - 1, 0))
                prev = self._approx_cycles(n - 1, i - r + 1, r - 1) if n >= 1 else None
                if prev is not None and prev.dim and total:
                    d_prev = self.total_differential(n - 1).a
                    bound = (prev.rows @ d_prev.T) % self.p
                    den = upper.sum(Subspace(self.p, total, bound))
                else:
                    den = upper
                denoms[(i, j)] = den
                rep = num.quotient_reps(den)
                reps[(i, j)] = rep
                if rep.dim:
                    dims[(i, j)] = rep.dim
            diffs = {}
            for (i, j) in positions:
                src = reps[(i, j)]
                if src.dim == 0:
                    continue
                ti, tj = i + r, j - r + 1
                if (ti, tj) not in reps or reps[(ti, tj)].dim == 0:
                    continue
                tgt_rep = reps[(ti, tj)]
                tgt_den = denoms[(ti, tj)]
                n = i + j
                d_mat = self.total_differential(n).a
                cols = []
                for v in src.rows:
                    w = (d_mat @ v) % self.p
                    w = tgt_den.reduce(w)
                    coord = tgt_rep.express(w)
                    if coord is None:
                        raise AssertionError("spectral differential left the page")
                    cols.append(coord)
                mat = FpMatrix(self.p, np.array(cols, dtype=np.int64).T)
                if not mat.is_zero():
                    diffs[(i, j)] = mat
            pages.append(SpectralSequencePage(r, dims, diffs, reps))
            if len(pages) >= 2:
                prev_page = pages[-2]
                for (i, j) in positions:
                    expect = prev_page.homology_dim(i, j)
                    got = dims.get((i, j), 0)
                    if expect != got:
                        raise AssertionError(
                            f"page {r} at {(i, j)}: dim {got} != H(previous page) {expect}")
        return pages

    def infinity_page(self):
        pages = self.spectral_sequence(self.max_i + self.max_j + 2)
        return pages[-1]

    def convergence_check(self):
        """Sum over i+j=m of dim E_inf equals dim H^m(Tot) for every m."""
        einf = self.infinity_page()
        tot = self.totalize()
        table = {}
        for m in range(0, self.max_i + self.max_j + 1):
            lhs = sum(einf.dims.get((i, m - i), 0) for i in range(0, m + 1))
            rhs = tot.cohomology(m)[0]
            table[m] = (lhs, rhs)
        return all(a == b for a, b in table.values()), table


class SpectralSequencePage:
    """One page of a spectral sequence: dims, d_r matrices, representatives."""

    def __init__(self, r, dims, diffs, reps):
        self.r = r
        self.dims = dims
        self.diffs = diffs
        self._reps = reps

    def dim(self, i, j):
        return self.dims.get((i, j), 0)

    def representatives(self, i, j):
        return self._reps[(i, j)].rows

    def homology_dim(self, i, j):
        """dim of H(E_r, d_r) at (i, j) computed from this page's matrices."""
        here = self.dim(i, j)
        if here == 0:
            return 0
        out = self.diffs.get((i, j))
        rank_out = out.rank() if out is not None else 0
        inc = self.diffs.get((i - self.r, j + self.r - 1))
        rank_in = inc.rank() if inc is not None else 0
        return here - rank_out - rank_in

    def __repr__(self):
        cells = {k: v for k, v in sorted(self.dims.items())}
        return f"E_{self.r}{cells}"


def spectral_sequence(double_complex, max_page):
    """Pages E_1 .. E_maxpage of a DoubleComplex (column filtration)."""
    return double_complex.spectral_sequence(max_page)
