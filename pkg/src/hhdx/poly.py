"""Sparse multivariate polynomials over F_p with optional Laurent exponents.

Polynomials are immutable maps from exponent tuples to nonzero coefficients
in [1, p).  Arithmetic is exact; truncation to a degree window is a separate
explicit step that reports whether anything was discarded, so downstream
homological computations can tell certified results from windowed ones.

Degree windows: an ordinary polynomial is inside the window for bound D
when every monomial has total degree <= D; a Laurent polynomial is inside
when every single exponent satisfies |e_i| <= D.
"""

from __future__ import annotations

from .errors import CapacityError
from .gfp import require_prime

MAX_VARS = 8
MAX_EXPONENT = 2 ** 16


class PolyRing:
    """F_p[x_0..x_{n-1}], or the Laurent ring F_p[x_i^{+-1}] when laurent."""

    __slots__ = ("p", "n", "names", "laurent")

    def __init__(self, p, n, names=None, laurent=False):
        self.p = require_prime(p)
        if not 1 <= n <= MAX_VARS:
            raise ValueError(f"number of variables must be in [1, {MAX_VARS}]")
        self.n = n
        if names is None:
            names = tuple(f"x{i}" for i in range(n)) if n > 1 else ("x",)
        if len(names) != n:
            raise ValueError("one name per variable required")
        self.names = tuple(names)
        self.laurent = bool(laurent)

    def zero(self):
        return MultiPoly(self, {})

    def one(self):
        return MultiPoly(self, {(0,) * self.n: 1})

    def constant(self, c):
        c %= self.p
        return MultiPoly(self, {(0,) * self.n: c} if c else {})

    def variable(self, i=0):
        exps = [0] * self.n
        exps[i] = 1
        return self.monomial(tuple(exps))

    def monomial(self, exps, coeff=1):
        return MultiPoly(self, {tuple(exps): coeff % self.p})

    def from_terms(self, terms):
        return MultiPoly(self, dict(terms))

    def __eq__(self, other):
        return (
            isinstance(other, PolyRing)
            and (self.p, self.n, self.names, self.laurent)
            == (other.p, other.n, other.names, other.laurent)
        )

    def __hash__(self):
        return hash((self.p, self.n, self.names, self.laurent))

    def __repr__(self):
        kind = "LaurentRing" if self.laurent else "PolyRing"
        return f"{kind}(p={self.p}, vars={', '.join(self.names)})"


class MultiPoly:
    """Immutable sparse polynomial; terms maps exponent tuples to coeffs."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        clean = {}
        for exps, c in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != ring.n:
                raise ValueError(f"exponent tuple of length {ring.n} expected")
            for e in exps:
                if abs(e) >= MAX_EXPONENT:
                    raise CapacityError(f"exponent {e} exceeds capacity {MAX_EXPONENT}")
                if e < 0 and not ring.laurent:
                    raise ValueError("negative exponents need a Laurent ring")
            c = int(c) % ring.p
            if c:
                clean[exps] = c
        self.terms = clean

    # -- basic queries -----------------------------------------------------

    def is_zero(self):
        return not self.terms

    def coefficient(self, exps):
        return self.terms.get(tuple(exps), 0)

    def support(self):
        """Exponent tuples in descending graded-lexicographic order."""
        return sorted(self.terms, key=lambda e: (sum(e), e), reverse=True)

    def total_degree(self):
        """Max total degree over terms; None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def exponent_radius(self):
        """Max |e_i| over all terms and variables; None for zero."""
        if not self.terms:
            return None
        return max(abs(e) for exps in self.terms for e in exps)

    # -- arithmetic (exact) --------------------------------------------------

    def _require_same_ring(self, other):
        if not isinstance(other, MultiPoly) or other.ring != self.ring:
            raise ValueError("polynomials from different rings")

    def __add__(self, other):
        self._require_same_ring(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = (out.get(e, 0) + c) % self.ring.p
        return MultiPoly(self.ring, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return MultiPoly(self.ring, {e: -c for e, c in self.terms.items()})

    def scale(self, c):
        c %= self.ring.p
        return MultiPoly(self.ring, {e: cc * c for e, cc in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        self._require_same_ring(other)
        if len(self.terms) * len(other.terms) > 4_000_000:
            raise CapacityError("product support exceeds capacity")
        out = {}
        n = self.ring.n
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(e1[k] + e2[k] for k in range(n))
                out[e] = (out.get(e, 0) + c1 * c2) % self.ring.p
        return MultiPoly(self.ring, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not defined termwise")
        out = self.ring.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base_needed = k >> 1
            if base_needed:
                base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        return (
            isinstance(other, MultiPoly)
            and self.ring == other.ring
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, tuple(sorted(self.terms.items()))))

    # -- degree windows ------------------------------------------------------

    def _inside(self, exps, bound):
        if self.ring.laurent:
            return all(abs(e) <= bound for e in exps)
        return sum(exps) <= bound

    def truncate(self, bound):
        """(polynomial inside the window, whether anything was discarded)."""
        kept = {}
        dropped = False
        for e, c in self.terms.items():
            if self._inside(e, bound):
                kept[e] = c
            else:
                dropped = True
        return MultiPoly(self.ring, kept), dropped

    def mul_truncated(self, other, bound):
        """Exact product, then one truncation; returns (poly, dropped?)."""
        return (self * other).truncate(bound)

    # -- Frobenius -------------------------------------------------------------

    def frobenius(self, k=1):
        """f(x) -> f(x^(p^k)): exponents scale by p^k, coefficients are fixed
        by Fermat (applied honestly through modular exponentiation)."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        scale = self.ring.p ** k
        out = {}
        for e, c in self.terms.items():
            exps = tuple(ei * scale for ei in e)
            out[exps] = pow(c, scale, self.ring.p)
        return MultiPoly(self.ring, out)

    def in_twist_subring(self, r):
        """True when every exponent is divisible by p^r."""
        if r < 0:
            raise ValueError("r must be nonnegative")
        q = self.ring.p ** r
        return all(e % q == 0 for exps in self.terms for e in exps)

    def twist_root(self, r):
        """Preimage under r-fold Frobenius; requires twist membership."""
        q = self.ring.p ** r
        if not self.in_twist_subring(r):
            raise ValueError(f"polynomial is not in the depth-{r} twist subring")
        return MultiPoly(self.ring, {tuple(e // q for e in exps): c
                                     for exps, c in self.terms.items()})

    # -- evaluation and rendering ----------------------------------------------

    def evaluate(self, point):
        """Value at a point of F_p^n (coordinates as ints).

        Laurent monomials require the corresponding coordinates to be
        nonzero; modular inverses handle negative exponents exactly.
        """
        p = self.ring.p
        point = [int(v) % p for v in point]
        if len(point) != self.ring.n:
            raise ValueError("one coordinate per variable required")
        total = 0
        for exps, c in self.terms.items():
            v = c
            for x, e in zip(point, exps):
                if e == 0:
                    continue
                if x == 0 and e < 0:
                    raise ZeroDivisionError("negative exponent at a zero coordinate")
                v = (v * pow(x, e, p)) % p
            total = (total + v) % p
        return total

    def render(self):
        """Deterministic human-readable form, graded-lex descending."""
        if not self.terms:
            return "0"
        parts = []
        for exps in self.support():
            c = self.terms[exps]
            factors = []
            for name, e in zip(self.ring.names, exps):
                if e == 0:
                    continue
                factors.append(name if e == 1 else f"{name}^{e}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(c)] + factors))
        return " + ".join(parts)

    def __repr__(self):
        return self.render()
