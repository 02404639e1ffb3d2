"""Prime field arithmetic and the digit-wise helpers used throughout."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import DivisionByZero, NotPrimeError


class Prime(int):
    """An int that is known to be prime. Validated once, by trial division."""

    def __new__(cls, value: int) -> "Prime":
        if isinstance(value, Prime):
            return value
        v = int(value)
        if not _is_prime(v):
            raise NotPrimeError(f"{value} is not prime")
        return super().__new__(cls, v)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Fp:
    value: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % int(self.p))

    def _coerce(self, other) -> int:
        if isinstance(other, Fp):
            if other.p != self.p:
                raise ValueError("mixed characteristics")
            return other.value
        return int(other) % self.p

    def __add__(self, other):
        return Fp(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return Fp(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return Fp(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return Fp(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return Fp(-self.value, self.p)

    def __truediv__(self, other):
        return self * inv(Fp(self._coerce(other), self.p))

    def __pow__(self, e: int):
        if e < 0:
            return inv(self) ** (-e)
        return Fp(pow(self.value, e, self.p), self.p)

    def __eq__(self, other):
        if isinstance(other, Fp):
            return self.p == other.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.p))

    def __int__(self):
        return self.value

    __index__ = __int__

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"Fp({self.value} mod {self.p})"


def inv(x, p: int | None = None) -> Fp:
    """Multiplicative inverse. Accepts an Fp, or an int together with p."""
    if not isinstance(x, Fp):
        if p is None:
            raise TypeError("p required for int input")
        x = Fp(x, p)
    if x.value == 0:
        raise DivisionByZero("inverse of zero")
    return Fp(pow(x.value, -1, x.p), x.p)


def inv_int(x: int, p: int) -> int:
    x %= p
    if x == 0:
        raise DivisionByZero("inverse of zero")
    return pow(x, -1, p)


def digits(i: int, p: int) -> list[int]:
    out = []
    while i:
        i, d = divmod(i, p)
        out.append(d)
    return out


def sigma_p(i: int, p: int) -> int:
    """Sum of the base-p digits of i."""
    if i < 0:
        raise ValueError("i must be nonnegative")
    return sum(digits(i, p))


@lru_cache(maxsize=None)
def _small_binom_table(p: int) -> tuple:
    # Pascal triangle mod p for 0 <= a, b < p
    t = [[0] * p for _ in range(p)]
    for a in range(p):
        t[a][0] = 1
        for b in range(1, a + 1):
            t[a][b] = (t[a - 1][b - 1] + (t[a - 1][b] if b <= a - 1 else 0)) % p
    return tuple(tuple(r) for r in t)


def lucas(i: int, j: int, p: int) -> int:
    """C(i, j) mod p as a plain int, via base-p digits."""
    if i < 0 or j < 0:
        raise ValueError("negative argument")
    if j > i:
        return 0
    table = _small_binom_table(p)
    out = 1
    while i or j:
        i, a = divmod(i, p)
        j, b = divmod(j, p)
        if b > a:
            return 0
        out = out * table[a][b] % p
    return out


def binom_mod_p(i: int, j: int, p: int) -> Fp:
    return Fp(lucas(i, j, p), p)


@lru_cache(maxsize=None)
def inv_factorials(p: int) -> tuple:
    """1/k! mod p for k = 0 .. p-1."""
    out = [1]
    f = 1
    for k in range(1, p):
        f = f * k % p
        out.append(pow(f, -1, p))
    return tuple(out)
