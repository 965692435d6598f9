"""Shared builders for tests: known complexes and random double complexes."""

import numpy as np

from hhdx.linalg import CochainComplex, DoubleComplex, FpMatrix


def staircase(p, length):
    """Length-L staircase double complex.

    Cells a_k at (k, L-1-k) for k = 0..L-1 and b_k at (k, L-k) for
    k = 1..L, each one-dimensional.  d_h sends a_k to b_{k+1}, d_v sends
    a_k to b_k (k >= 1).  The total complex is acyclic, while the column
    filtration keeps a one-dimensional E_r^{0, L-1} alive until the page-L
    differential kills it against E_L^{L, 0}.
    """
    if length < 1:
        raise ValueError("length must be positive")
    L = length
    dims = {}
    for k in range(L):
        dims[(k, L - 1 - k)] = 1
    for k in range(1, L + 1):
        dims[(k, L - k)] = 1
    one = FpMatrix(p, [[1]])
    d_h = {(k, L - 1 - k): one for k in range(L)}
    d_v = {(k, L - 1 - k): one for k in range(1, L)}
    return DoubleComplex.from_commuting(p, dims, d_h, d_v)


def random_complex(p, rng, max_len=3, max_dim=3):
    """Random bounded cochain complex built from an exact pair trick.

    Choose random matrices and keep only d with d o d = 0 by construction:
    d_i = B_i A_i where consecutive products vanish because A_{i+1} B_i = 0
    is arranged via kernels.
    """
    n = int(rng.integers(1, max_len + 1))
    dims = {i: int(rng.integers(1, max_dim + 1)) for i in range(n + 1)}
    diffs = {}
    prev = None
    for i in range(n):
        a = rng.integers(0, p, size=(dims[i + 1], dims[i]))
        m = FpMatrix(p, a)
        if prev is not None:
            # project onto maps vanishing on the image of the previous d
            img = prev.image_basis()
            if img.shape[0]:
                # replace m by m composed with projection killing img
                from hhdx.linalg import Subspace
                sub = Subspace(p, dims[i], img)
                cols = []
                for c in range(dims[i]):
                    e = np.zeros(dims[i], dtype=np.int64)
                    e[c] = 1
                    cols.append(sub.reduce(e))
                proj = FpMatrix(p, np.array(cols).T)
                m = m @ proj
        diffs[i] = m
        prev = m
    return CochainComplex(p, dims, diffs)


def tensor_double(p, cx, cy):
    """Double complex C ⊗ D from two cochain complexes (commuting, then
    column-flipped)."""
    dims = {}
    d_h = {}
    d_v = {}
    for i in range(cx.lo, cx.hi + 1):
        for j in range(cy.lo, cy.hi + 1):
            dims[(i, j)] = cx.dims[i] * cy.dims[j]
    for i in range(cx.lo, cx.hi + 1):
        for j in range(cy.lo, cy.hi + 1):
            if i < cx.hi:
                d_h[(i, j)] = FpMatrix(p, np.kron(cx.differential(i).a,
                                                  np.eye(cy.dims[j], dtype=np.int64)))
            if j < cy.hi:
                d_v[(i, j)] = FpMatrix(p, np.kron(np.eye(cx.dims[i], dtype=np.int64),
                                                  cy.differential(j).a))
    return DoubleComplex.from_commuting(p, dims, d_h, d_v)


def direct_sum_double(p, first, second):
    """Blockwise direct sum of two double complexes."""
    dims = {}
    keys = set(first.dims) | set(second.dims)
    for k in keys:
        dims[k] = first.dims.get(k, 0) + second.dims.get(k, 0)

    def block(m1, m2, rows, cols):
        out = np.zeros((rows, cols), dtype=np.int64)
        r1, c1 = m1.shape
        out[:r1, :c1] = m1.a
        out[r1:r1 + m2.shape[0], c1:c1 + m2.shape[1]] = m2.a
        return FpMatrix(p, out)

    d_h = {}
    d_v = {}
    for (i, j) in keys:
        h = block(first.horizontal(i, j), second.horizontal(i, j),
                  dims.get((i + 1, j), 0), dims[(i, j)])
        if not h.is_zero():
            d_h[(i, j)] = h
        v = block(first.vertical(i, j), second.vertical(i, j),
                  dims.get((i, j + 1), 0), dims[(i, j)])
        if not v.is_zero():
            d_v[(i, j)] = v
    return DoubleComplex(p, dims, d_h, d_v)


def random_double_complex(p, rng):
    """Random double complex: staircases summed with a tensor square."""
    pieces = []
    for _ in range(int(rng.integers(1, 3))):
        pieces.append(staircase(p, int(rng.integers(1, 5))))
    if rng.integers(0, 2):
        cx = random_complex(p, rng)
        cy = random_complex(p, rng)
        pieces.append(tensor_double(p, cx, cy))
    out = pieces[0]
    for piece in pieces[1:]:
        out = direct_sum_double(p, out, piece)
    return out
