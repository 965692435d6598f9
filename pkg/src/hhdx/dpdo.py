"""Divided-power differential operators over F_p.

An operator is a finite sum of normal-ordered terms  c * x^a D^(b)  where
x^a is a (possibly Laurent) monomial and D^(b) = prod_i D_i^(b_i) is a
product of divided powers of the partial derivatives, acting on monomials
by  x^a D^(b) (x^m) = prod_i C(m_i, b_i) * x^(m - b + a).

Products are normal-ordered through the commutation rule

    D^(b) x^c = sum_j prod_i C(c_i, j_i) x^(c - j) D^(b - j),

with generalized binomials handling negative Laurent exponents, so the
algebra is exact for every prime.  The module also provides order and
centrality certificates via iterated commutators, realization of an
operator as a matrix over the Frobenius-twist subring, compression of a
twist-aligned operator to the corner copy acting on the subring, the
coordinate inversion x -> 1/x for Laurent operators, finite-dimensional
windowed operator modules with exact commutator matrices, and a parser /
renderer for a stable operator syntax such as  "2*t^3*Dt^(2) + t + 1".
"""

from __future__ import annotations

import itertools
import re

import numpy as np

from . import linalg
from .errors import CapacityError, DepthError, WindowError
from .gfp import binomial_mod, require_prime
from .poly import MAX_EXPONENT, MultiPoly, PolyRing

MAX_PRODUCT_WORK = 2_000_000


class OperatorAlgebra:
    """Algebra of divided-power differential operators on F_p[x_1..x_n]
    (or its Laurent ring).  Divided-power exponents are capped at p^4."""

    __slots__ = ("ring", "dp_cap")

    def __init__(self, p, n=1, names=None, laurent=False):
        require_prime(p)
        self.ring = PolyRing(p, n, names=names, laurent=laurent)
        self.dp_cap = p ** 4

    @property
    def p(self):
        return self.ring.p

    @property
    def n(self):
        return self.ring.n

    @property
    def laurent(self):
        return self.ring.laurent

    def zero(self):
        return DPDOperator(self, {})

    def one(self):
        z = (0,) * self.n
        return DPDOperator(self, {(z, z): 1})

    def monomial(self, a, b, coeff=1):
        return DPDOperator(self, {(tuple(a), tuple(b)): coeff % self.p})

    def variable(self, i=0, power=1):
        a = [0] * self.n
        a[i] = power
        return self.monomial(a, (0,) * self.n)

    def divided_power(self, i=0, level=1):
        b = [0] * self.n
        b[i] = level
        return self.monomial((0,) * self.n, b)

    def multiplication(self, f):
        """Left multiplication by a polynomial of this algebra's ring."""
        if f.ring != self.ring:
            raise ValueError("polynomial from a different ring")
        z = (0,) * self.n
        return DPDOperator(self, {(e, z): c for e, c in f.terms.items()})

    def from_terms(self, terms):
        return DPDOperator(self, dict(terms))

    def __eq__(self, other):
        return isinstance(other, OperatorAlgebra) and other.ring == self.ring

    def __hash__(self):
        return hash(("OperatorAlgebra", self.ring))

    def __repr__(self):
        kind = "Laurent" if self.laurent else "polynomial"
        return f"OperatorAlgebra(p={self.p}, vars={', '.join(self.ring.names)}, {kind})"

    # -- parsing -------------------------------------------------------------

    _dp_factor = re.compile(r"^D(\w+)\^\((-?\d+)\)$")
    _dp_plain = re.compile(r"^D(\w+)$")
    _var_factor = re.compile(r"^(\w+?)(?:\^(-?\d+))?$")

    def parse(self, text):
        """Parse the renderer's syntax: terms joined by +/-, factors by *.

        Examples: "Dt^(2)", "2*t^3*Dt^(2) + t + 1", "u^-1*Du^(1) - 3".
        """
        name_index = {name: i for i, name in enumerate(self.ring.names)}
        total = self.zero()
        stripped = text.strip()
        if not stripped:
            raise ValueError("empty operator expression")
        # split into signed terms at top level (parens only in D-exponents)
        terms = []
        sign = 1
        buf = ""
        depth = 0
        for ch in stripped:
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            if ch in "+-" and depth == 0 and (not buf.strip() or buf.rstrip()[-1] not in "*^("):
                if buf.strip():
                    terms.append((sign, buf.strip()))
                sign = 1 if ch == "+" else -1
                buf = ""
            else:
                buf += ch
        if buf.strip():
            terms.append((sign, buf.strip()))
        if not terms:
            raise ValueError(f"cannot parse operator: {text!r}")
        for sgn, chunk in terms:
            coeff = sgn
            a = [0] * self.n
            b = [0] * self.n
            for factor in (f.strip() for f in chunk.split("*")):
                if not factor:
                    raise ValueError(f"empty factor in {chunk!r}")
                if factor.isdigit():
                    coeff *= int(factor)
                    continue
                m = self._dp_factor.match(factor) or self._dp_plain.match(factor)
                if m:
                    name = m.group(1)
                    level = int(m.group(2)) if m.lastindex and m.lastindex >= 2 else 1
                    if name not in name_index:
                        raise ValueError(f"unknown variable {name!r} in {factor!r}")
                    if level < 0:
                        raise ValueError("divided-power level must be nonnegative")
                    b[name_index[name]] += level
                    continue
                m = self._var_factor.match(factor)
                if m and m.group(1) in name_index:
                    e = int(m.group(2)) if m.group(2) is not None else 1
                    a[name_index[m.group(1)]] += e
                    continue
                raise ValueError(f"cannot parse factor {factor!r}")
            total = total + self.monomial(a, b, coeff)
        return total


class DPDOperator:
    """Finite sum of normal-ordered terms c * x^a D^(b)."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra, terms):
        self.algebra = algebra
        p = algebra.p
        n = algebra.n
        clean = {}
        for (a, b), c in terms.items():
            a = tuple(int(e) for e in a)
            b = tuple(int(e) for e in b)
            if len(a) != n or len(b) != n:
                raise ValueError(f"exponent tuples of length {n} expected")
            c = int(c) % p
            if not c:
                continue
            for e in a:
                if abs(e) >= MAX_EXPONENT:
                    raise CapacityError(f"monomial exponent {e} exceeds capacity")
                if e < 0 and not algebra.laurent:
                    raise ValueError("negative exponents need a Laurent algebra")
            for e in b:
                if e < 0:
                    raise ValueError("divided-power exponents must be nonnegative")
                if e > algebra.dp_cap:
                    raise CapacityError(
                        f"divided-power exponent {e} exceeds cap {algebra.dp_cap}")
            clean[(a, b)] = c
        self.terms = clean

    # -- linear structure ------------------------------------------------------

    def _require_same(self, other):
        if not isinstance(other, DPDOperator) or other.algebra != self.algebra:
            raise ValueError("operators from different algebras")

    def __add__(self, other):
        self._require_same(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = (out.get(k, 0) + c) % self.algebra.p
        return DPDOperator(self.algebra, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return DPDOperator(self.algebra, {k: -c for k, c in self.terms.items()})

    def scale(self, c):
        return DPDOperator(self.algebra, {k: cc * c for k, cc in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, DPDOperator)
            and self.algebra == other.algebra
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.algebra, tuple(sorted(self.terms.items()))))

    # -- multiplication ----------------------------------------------------------

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._require_same(other)
        p = self.algebra.p
        n = self.algebra.n
        out = {}
        for (a, b), c1 in self.terms.items():
            for (c, d), c2 in other.terms.items():
                ranges = []
                work = 1
                for i in range(n):
                    hi = b[i] if c[i] < 0 else min(b[i], c[i])
                    ranges.append(range(hi + 1))
                    work *= hi + 1
                if work > MAX_PRODUCT_WORK:
                    raise CapacityError("normal-ordering workload exceeds capacity")
                for j in itertools.product(*ranges):
                    coeff = c1 * c2
                    for i in range(n):
                        if not coeff:
                            break
                        coeff = (coeff
                                 * binomial_mod(c[i], j[i], p)
                                 * binomial_mod(b[i] + d[i] - j[i], b[i] - j[i], p)) % p
                    if not coeff:
                        continue
                    key = (tuple(a[i] + c[i] - j[i] for i in range(n)),
                           tuple(b[i] + d[i] - j[i] for i in range(n)))
                    out[key] = (out.get(key, 0) + coeff) % p
        return DPDOperator(self.algebra, out)

    __rmul__ = __mul__

    def commutator(self, other):
        return self * other - other * self

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative operator powers are not defined")
        out = self.algebra.one()
        for _ in range(k):
            out = out * self
        return out

    # -- action on polynomials -----------------------------------------------------

    def act(self, f):
        """Apply the operator to a polynomial of the underlying ring.

        A polynomial-coefficient operator may also act on a Laurent
        polynomial in the same variables.
        """
        ring = f.ring
        ok = ring == self.algebra.ring or (
            not self.algebra.laurent
            and ring.laurent
            and (ring.p, ring.n, ring.names) == (self.algebra.ring.p,
                                                 self.algebra.ring.n,
                                                 self.algebra.ring.names)
        )
        if not ok:
            raise ValueError("polynomial ring does not match the operator algebra")
        p = ring.p
        n = ring.n
        out = {}
        for (a, b), c1 in self.terms.items():
            for m, c2 in f.terms.items():
                coeff = c1 * c2
                for i in range(n):
                    if not coeff:
                        break
                    coeff = (coeff * binomial_mod(m[i], b[i], p)) % p
                if not coeff:
                    continue
                exps = tuple(m[i] - b[i] + a[i] for i in range(n))
                out[exps] = (out.get(exps, 0) + coeff) % p
        return MultiPoly(ring, out)

    # -- structural invariants ---------------------------------------------------------

    def order(self):
        """Max total divided-power degree across terms; None when zero."""
        if not self.terms:
            return None
        return max(sum(b) for _, b in self.terms)

    def is_order_le(self, k):
        """Certify order <= k through (k+1)-fold commutators with coordinates.

        [x_i, -] lowers the divided-power multidegree by e_i and never
        cancels across distinct terms, so vanishing of all (k+1)-fold
        iterated commutators with coordinate functions is equivalent to
        every term having total divided-power degree <= k.
        """
        if k < 0:
            return self.is_zero()
        n = self.algebra.n
        xs = [self.algebra.variable(i) for i in range(n)]
        for combo in itertools.combinations_with_replacement(range(n), k + 1):
            op = self
            for i in combo:
                op = xs[i].commutator(op)
                if op.is_zero():
                    break
            if not op.is_zero():
                return False
        return True

    def centrality_depth(self):
        """Smallest r such that the operator commutes with every p^r-th
        power of a coordinate (equivalently with the whole depth-r twist
        subring).  Closed form: p^r must exceed every divided-power
        exponent; commutators with x_i^(p^r) shift terms injectively, so
        there is no cancellation and the bound is exact."""
        if not self.terms:
            return 0
        p = self.algebra.p
        top = max(max(b) for _, b in self.terms)
        r = 0
        while p ** r <= top:
            r += 1
        return r

    def commutes_with(self, f):
        """Direct check: [multiplication by f, self] = 0."""
        return self.algebra.multiplication(f).commutator(self).is_zero()

    # -- quotient model -------------------------------------------------------------------

    def quotient_reduce(self, s):
        """Image in End(F_p[x]/(x^(p^s))) for the one-variable quotient.

        Terms with any monomial exponent >= p^s land in the ideal and terms
        with any divided-power exponent >= p^s annihilate every residue
        degree, so both are honestly zero in the quotient endomorphism ring.
        """
        if self.algebra.laurent:
            raise ValueError("quotient model needs a polynomial algebra")
        q = self.algebra.p ** s
        kept = {(a, b): c for (a, b), c in self.terms.items()
                if all(e < q for e in a) and all(e < q for e in b)}
        return DPDOperator(self.algebra, kept)

    # -- rendering ---------------------------------------------------------------------------

    def support(self):
        return sorted(self.terms,
                      key=lambda ab: (sum(ab[1]), ab[1], sum(ab[0]), ab[0]),
                      reverse=True)

    def render(self):
        if not self.terms:
            return "0"
        names = self.algebra.ring.names
        parts = []
        for (a, b) in self.support():
            c = self.terms[(a, b)]
            factors = []
            for name, e in zip(names, a):
                if e == 0:
                    continue
                factors.append(name if e == 1 else f"{name}^{e}")
            for name, e in zip(names, b):
                if e == 0:
                    continue
                factors.append(f"D{name}^({e})")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return self.render()


# -- matrix realization over the twist subring ------------------------------------------------


class MatrixRealization:
    """An operator written as a matrix over the depth-r twist subring.

    rows/columns are indexed by the monomial basis {x^a : 0 <= a_i < p^r}
    of the polynomial ring over its twist subring, in lexicographic order;
    entries are polynomials with every exponent divisible by p^r.
    """

    __slots__ = ("algebra", "r", "basis", "entries", "truncated")

    def __init__(self, algebra, r, basis, entries, truncated):
        self.algebra = algebra
        self.r = r
        self.basis = basis
        self.entries = entries
        self.truncated = truncated

    @property
    def size(self):
        return len(self.basis)

    def entry(self, row, col):
        return self.entries[row][col]

    def entries_in_twist_variables(self, names=None):
        """Entries rewritten in fresh variables u_i = x_i^(p^r)."""
        ring = self.algebra.ring
        if names is None:
            names = tuple(f"u{i}" for i in range(ring.n)) if ring.n > 1 else ("u",)
        target = PolyRing(ring.p, ring.n, names=names, laurent=ring.laurent)
        out = []
        for row in self.entries:
            out.append([MultiPoly(target, f.twist_root(self.r).terms) for f in row])
        return out

    def render(self):
        return [[f.render() for f in row] for row in self.entries]


def matrix_realize(op, r, degree_bound=None):
    """Realize an operator of centrality depth <= r as a matrix over the
    twist subring.  Entries are exact unless degree_bound is given, in
    which case they are truncated to the window and flagged."""
    if op.algebra.laurent:
        raise ValueError("matrix realization needs a polynomial algebra")
    if r < 0:
        raise ValueError("r must be nonnegative")
    depth = op.centrality_depth()
    if depth > r:
        raise DepthError(
            f"operator has centrality depth {depth}, not a twist-subring-linear "
            f"map at depth {r}")
    ring = op.algebra.ring
    p, n = ring.p, ring.n
    q = p ** r
    if q ** n > 4096:
        raise CapacityError("twist-basis rank exceeds capacity")
    basis = sorted(itertools.product(range(q), repeat=n))
    index = {a: i for i, a in enumerate(basis)}
    zero = ring.zero()
    entries = [[zero for _ in basis] for _ in basis]
    truncated = False
    for col, c_exps in enumerate(basis):
        image = op.act(ring.monomial(c_exps))
        cells = {}
        for m, coeff in image.terms.items():
            quot = tuple((e // q) * q for e in m)
            res = tuple(e % q for e in m)
            row = index[res]
            cell = cells.setdefault(row, {})
            cell[quot] = (cell.get(quot, 0) + coeff) % p
        for row, terms in cells.items():
            f = MultiPoly(ring, terms)
            if degree_bound is not None:
                f, dropped = f.truncate(degree_bound)
                truncated = truncated or dropped
            entries[row][col] = f
    return MatrixRealization(op.algebra, r, basis, entries, truncated)


# -- Morita compression to the twist corner ------------------------------------------------------


def morita_compress(op, r, degree_bound):
    """Corner copy of a twist-aligned operator acting on the subring
    F_p[x^(p^r)], written in the compressed variable u = x^(p^r).

    Terms x^a D^(b) survive exactly when p^r | a and p^r | b; they map to
    u^(a/p^r) Du^(b/p^r) because C(p^r m, p^r k) = C(m, k) mod p digitwise.
    Misaligned divided powers annihilate the subring and misaligned
    monomials leave it, so nothing is silently lost.  The closed form is
    re-certified by comparing actions on every subring monomial inside the
    degree window, which must be large enough to exercise the top divided
    power (p^r * (max b/p^r + 1) <= degree_bound).
    """
    if op.algebra.n != 1:
        raise ValueError("compression is defined for one-variable operators")
    if r < 0:
        raise ValueError("r must be nonnegative")
    p = op.algebra.p
    q = p ** r
    compressed = {}
    beta_max = 0
    for (a, b), c in op.terms.items():
        if a[0] % q == 0 and b[0] % q == 0:
            compressed[((a[0] // q,), (b[0] // q,))] = c
            beta_max = max(beta_max, b[0] // q)
    target = OperatorAlgebra(p, 1, names=("u",), laurent=op.algebra.laurent)
    result = DPDOperator(target, compressed)

    if degree_bound < q * (beta_max + 1):
        raise WindowError(
            f"degree window {degree_bound} cannot certify compression; "
            f"need at least {q * (beta_max + 1)}")
    # certify: actions agree on subring monomials through the window
    lo = -(degree_bound // q) if op.algebra.laurent else 0
    hi = degree_bound // q
    for k in range(lo, hi + 1):
        big = op.act(op.algebra.ring.monomial((q * k,)))
        small = result.act(target.ring.monomial((k,)))
        projected = {}
        for (e,), c in big.terms.items():
            if e % q == 0:
                projected[(e // q,)] = c
        if projected != small.terms:
            raise AssertionError("compression failed its action certificate")
    return result


# -- coordinate inversion x -> 1/x ------------------------------------------------------------------


def invert_variable(op, target):
    """Rewrite a one-variable Laurent operator in the coordinate u = 1/x.

    x^c D^(d) acts on x^m = u^(-m) by C(m, d) x^(m-d+c); matching that
    action in the u-picture gives sum_{b<=d} t_b u^(b+d-c) Du^(b) with
    t_b the b-th forward difference at 0 of k |-> C(-k, d).
    """
    if not (op.algebra.laurent and op.algebra.n == 1):
        raise ValueError("coordinate inversion needs a one-variable Laurent algebra")
    if not (target.laurent and target.n == 1 and target.p == op.algebra.p):
        raise ValueError("target must be a one-variable Laurent algebra over the same prime")
    p = op.algebra.p
    out = target.zero()
    for ((c,), (d,)), coeff in op.terms.items():
        values = [binomial_mod(-k, d, p) for k in range(d + 1)]
        # forward differences evaluated at 0
        diffs = list(values)
        table = []
        for _ in range(d + 1):
            table.append(diffs[0])
            diffs = [(diffs[i + 1] - diffs[i]) % p for i in range(len(diffs) - 1)]
        for b in range(d + 1):
            t_b = (table[b] * coeff) % p
            if t_b:
                out = out + target.monomial((b + d - c,), (b,), t_b)
    return out


# -- windowed operator modules ------------------------------------------------------------------------


class TruncatedOperatorModule:
    """Finite-dimensional window of an operator algebra.

    Basis: x^a D^(b) with each monomial exponent in [lo, hi] (lo = -hi for
    Laurent algebras, 0 otherwise) and each divided-power exponent in
    [0, dp_bound], ordered lexicographically.  Used as the underlying
    space of commutator (Koszul-type) complexes; commutator matrices with
    window-exact elements are certified, anything leaving the window
    raises WindowError instead of truncating silently.
    """

    __slots__ = ("algebra", "lo", "hi", "dp_bound", "basis", "index")

    def __init__(self, algebra, degree_bound, dp_bound, lo=None):
        if degree_bound < 0 or dp_bound < 0:
            raise ValueError("window bounds must be nonnegative")
        self.algebra = algebra
        self.hi = degree_bound
        self.lo = (-degree_bound if algebra.laurent else 0) if lo is None else lo
        self.dp_bound = dp_bound
        n = algebra.n
        width = self.hi - self.lo + 1
        count = (width ** n) * ((dp_bound + 1) ** n)
        if count > 200_000:
            raise CapacityError(f"operator window of rank {count} exceeds capacity")
        self.basis = [
            (a, b)
            for a in itertools.product(range(self.lo, self.hi + 1), repeat=n)
            for b in itertools.product(range(0, dp_bound + 1), repeat=n)
        ]
        self.index = {ab: i for i, ab in enumerate(self.basis)}

    @property
    def dim(self):
        return len(self.basis)

    def contains(self, op):
        return all(key in self.index for key in op.terms)

    def vectorize(self, op):
        if op.algebra != self.algebra:
            raise ValueError("operator from a different algebra")
        vec = [0] * self.dim
        for key, c in op.terms.items():
            i = self.index.get(key)
            if i is None:
                raise WindowError(f"term {key} falls outside the module window")
            vec[i] = c
        return vec

    def from_vector(self, vec):
        return DPDOperator(self.algebra,
                           {self.basis[i]: c for i, c in enumerate(vec) if c % self.algebra.p})

    def operator_matrix(self, func, target=None):
        """Matrix (over the target window) of a linear map given on basis
        operators.  Raises WindowError if any image leaves the target."""
        target = target or self
        mat = np.zeros((target.dim, self.dim), dtype=np.int64)
        for col, ab in enumerate(self.basis):
            img = func(DPDOperator(self.algebra, {ab: 1}))
            mat[:, col] = target.vectorize(img)
        return linalg.FpMatrix(self.algebra.p, mat)

    def commutator_matrix(self, g, target=None):
        """Matrix of [g, -] into the target window (exact or WindowError)."""
        return self.operator_matrix(lambda m: g.commutator(m), target=target)
