"""Exact integer arithmetic for aliquot iteration.

Primality testing, budget-bounded factorization, the sum-of-divisors
function sigma, the sum-of-proper-divisors step s(n) = sigma(n) - n,
driver recognition, and an independent brute-force oracle for testing.

Everything here is a pure function of its arguments; the prime sieve and
sigma tables are built once per process and never mutated afterwards, so
all operations are safe for unrestricted concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

try:
    import gmpy2
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    gmpy2 = None

try:
    from numba import njit as _njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None

__all__ = [
    "Factorization",
    "FactorBudget",
    "DEFAULT_BUDGET",
    "FactorFailure",
    "OversizeInput",
    "InvalidInput",
    "is_prime",
    "prime_sieve",
    "factorize",
    "sigma",
    "sigma_of",
    "aliquot_step",
    "aliquot_brute",
    "brute_sigma_table",
    "sigma_table",
    "find_driver",
    "driver_multipliers",
    "enumerate_drivers",
    "format_factorization",
]


class InvalidInput(ValueError):
    """Argument outside an operation's documented domain."""


class OversizeInput(InvalidInput):
    """Input exceeds the budget's max_digits bound."""


class FactorFailure(Exception):
    """Budget exhausted with a composite cofactor left unfactored."""

    def __init__(self, value: int, remaining_composite: int):
        self.value = value
        self.remaining_composite = remaining_composite
        super().__init__(
            f"budget exhausted factoring {value}: "
            f"composite cofactor {remaining_composite} remains"
        )


@dataclass(frozen=True)
class FactorBudget:
    """Effort bounds for factorize.

    trial_division_bound is the prime-sieve limit for trial division,
    rho_iteration_cap bounds Brent-rho work per top-level composite, and
    max_digits rejects inputs that are too large to attempt at all.
    """

    trial_division_bound: int = 10**6
    rho_iteration_cap: int = 10**7
    max_digits: int = 120

    def __post_init__(self):
        if self.trial_division_bound < 2:
            raise InvalidInput("trial_division_bound must be >= 2")
        if self.rho_iteration_cap < 1 or self.max_digits < 1:
            raise InvalidInput("budget fields must be positive")


DEFAULT_BUDGET = FactorBudget()


@dataclass(frozen=True)
class Factorization:
    """A value with its prime-power decomposition, primes strictly increasing.

    The factor list is empty exactly for value 1 (the empty product).
    """

    value: int
    factors: tuple[tuple[int, int], ...]

    def reconstruct(self) -> int:
        n = 1
        for p, e in self.factors:
            n *= p**e
        return n


def format_factorization(f: Factorization) -> str:
    """Render as "p^e·p^e·…" with a middle-dot separator ("1" for the empty product)."""
    if not f.factors:
        return "1"
    return "·".join(f"{p}^{e}" if e > 1 else f"{p}" for p, e in f.factors)


# ---------------------------------------------------------------------------
# primality

# Witnesses proven deterministic for n < 3.3 * 10^24 (covers all of 2^64).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_TWO64 = 1 << 64


def _miller_rabin(n: int, bases) -> bool:
    d = n - 1
    r = (d & -d).bit_length() - 1
    d >>= r
    for a in bases:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime(n: int) -> bool:
    """Primality test: deterministic Miller-Rabin below 2^64, Baillie-PSW above.

    No Baillie-PSW counterexample is known, but for n >= 2^64 the result is
    (extremely well tested) probable primality, not a certificate.
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < _TWO64:
        return _miller_rabin(n, _MR_BASES)
    if gmpy2 is not None:
        return bool(gmpy2.is_strong_bpsw_prp(n))
    # strong base-2 test plus strong Lucas-Selfridge
    return _miller_rabin(n, (2,)) and _strong_lucas_selfridge(n)


def _strong_lucas_selfridge(n: int) -> bool:
    # Selfridge's method A: first D in 5, -7, 9, ... with Jacobi(D/n) = -1
    if isqrt(n) ** 2 == n:
        return False
    D = 5
    while True:
        j = _jacobi(D % n if D > 0 else D, n)
        if j == -1:
            break
        if j == 0:
            return n == abs(D)
        D = -(D + 2) if D > 0 else -(D - 2)
    P, Q = 1, (1 - D) // 4
    d = n + 1
    s = (d & -d).bit_length() - 1
    d >>= s
    U, V, Qk = 0, 2, 1
    for bit in bin(d)[2:]:
        U, V = U * V % n, (V * V - 2 * Qk) % n
        Qk = Qk * Qk % n
        if bit == "1":
            U, V = (P * U + V) * ((n + 1) // 2) % n, (D * U + P * V) * ((n + 1) // 2) % n
            Qk = Qk * Q % n
    if U == 0 or V == 0:
        return True
    for _ in range(s - 1):
        V = (V * V - 2 * Qk) % n
        if V == 0:
            return True
        Qk = Qk * Qk % n
    return False


def _jacobi(a: int, n: int) -> int:
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    if n == 1:
        return result
    return 0


@lru_cache(maxsize=8)
def prime_sieve(limit: int) -> tuple[int, ...]:
    """All primes up to and including limit, as plain ints."""
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, isqrt(limit) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(mask)[0])


# ---------------------------------------------------------------------------
# factorization

# Trial division hands over to rho once primes exceed this; rho finds the
# mid-size factors far faster, and the full-bound trial pass remains as a
# fallback when rho runs out of budget.
_TRIAL_CUT = 4096


def _brent_rho(n: int, budget_left: int) -> tuple[int, int]:
    """One deterministic Brent-rho split attempt chain on odd composite n.

    Returns (factor, budget_left); factor == n signals exhaustion.
    """
    attempt = 0
    while budget_left > 0:
        c = 1 + (n + attempt * 2718281829) % (n - 3)
        x = y = 2
        d = q = 1
        r = 1
        m = 128
        ys = x
        while d == 1 and budget_left > 0:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and d == 1:
                ys = y
                steps = min(m, r - k)
                for _ in range(steps):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                d = gcd(q, n)
                k += m
            budget_left -= r
            r <<= 1
        if d == n:
            # backtrack one gcd at a time from the last batch
            y = ys
            while True:
                y = (y * y + c) % n
                d = gcd(abs(x - y), n)
                if d > 1:
                    break
        if 1 < d < n:
            return d, budget_left
        attempt += 1
    return n, 0


def _factor_pairs(n: int, budget: FactorBudget) -> list[tuple[int, int]]:
    """Internal factorization core; returns sorted (prime, exponent) pairs."""
    if n == 1:
        return []
    out: dict[int, int] = {}
    rem = n
    bound = budget.trial_division_bound
    primes = prime_sieve(min(bound, _TRIAL_CUT))
    for p in primes:
        if p * p > rem:
            break
        if rem % p == 0:
            e = 0
            while rem % p == 0:
                rem //= p
                e += 1
            out[p] = e
    if rem > 1:
        last = primes[-1]
        if rem <= last * last or is_prime(rem):
            out[rem] = out.get(rem, 0) + 1
        else:
            _split_composite(n, rem, budget, out)
    return sorted(out.items())


def _split_composite(original: int, rem: int, budget: FactorBudget, out: dict[int, int]) -> None:
    budget_left = budget.rho_iteration_cap
    stack = [rem]
    while stack:
        m = stack.pop()
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        root = isqrt(m)
        if root * root == m:
            stack.append(root)
            stack.append(root)
            continue
        d, budget_left = _brent_rho(m, budget_left)
        if d == m:
            # rho exhausted: honour the full trial-division bound before failing
            m2 = _trial_to_bound(m, budget.trial_division_bound, out)
            if m2 is not None:
                stack.extend(m2)
                continue
            remaining = m
            for x in stack:
                remaining *= x
            raise FactorFailure(original, remaining)
        stack.append(d)
        stack.append(m // d)


def _trial_to_bound(m: int, bound: int, out: dict[int, int]):
    """Resume trial division beyond the rho cut; None if no factor found."""
    if bound <= _TRIAL_CUT:
        return None
    found = []
    rem = m
    for p in prime_sieve(bound):
        if p <= _TRIAL_CUT:
            continue
        if p * p > rem:
            break
        while rem % p == 0:
            out[p] = out.get(p, 0) + 1
            rem //= p
    if rem != m or rem == 1:
        if rem > 1:
            found.append(rem)
        return found
    return None


def _digit_count(n: int) -> int:
    return len(str(n))


def factorize(n: int, budget: FactorBudget = DEFAULT_BUDGET) -> Factorization:
    """Full prime factorization of n >= 1, deterministic given (n, budget).

    Raises OversizeInput when n has more than budget.max_digits digits and
    FactorFailure when the budget runs out on a composite cofactor.
    """
    if n < 1:
        raise InvalidInput(f"factorize requires n >= 1, got {n}")
    if _digit_count(n) > budget.max_digits:
        raise OversizeInput(f"{n} exceeds max_digits={budget.max_digits}")
    return Factorization(value=n, factors=tuple(_factor_pairs(n, budget)))


def sigma(f: Factorization) -> int:
    """Sum of all divisors, as the product of geometric sums over prime powers."""
    total = 1
    for p, e in f.factors:
        total *= (p ** (e + 1) - 1) // (p - 1)
    return total


def sigma_of(n: int, budget: FactorBudget = DEFAULT_BUDGET) -> int:
    """sigma(n) for a bare integer; factorizes first."""
    return sigma(factorize(n, budget))


def aliquot_step(n: int, budget: FactorBudget = DEFAULT_BUDGET) -> int:
    """The sum of proper divisors s(n) = sigma(n) - n, for n >= 2."""
    if n < 2:
        raise InvalidInput(f"aliquot_step requires n >= 2, got {n}")
    return sigma(factorize(n, budget)) - n


# ---------------------------------------------------------------------------
# brute-force oracle (independent of factorization)

_BRUTE_CAP = 10**7


def _brute_s_python(n):
    total = 1
    for d in range(2, isqrt(n) + 1):
        if n % d == 0:
            total += d
            q = n // d
            if q != d:
                total += q
    return total


if _njit is not None:

    @_njit(cache=True)
    def _brute_s(n):
        total = 1
        d = 2
        while d * d <= n:
            if n % d == 0:
                total += d
                q = n // d
                if q != d:
                    total += q
            d += 1
        return total

else:  # pragma: no cover
    _brute_s = _brute_s_python


def aliquot_brute(n: int) -> int:
    """s(n) by direct divisor enumeration up to sqrt(n). Test oracle only.

    Enforced range 2 <= n <= 10^7; no factorization involved.
    """
    if not 2 <= n <= _BRUTE_CAP:
        raise InvalidInput(f"aliquot_brute accepts 2 <= n <= {_BRUTE_CAP}, got {n}")
    return int(_brute_s(n))


def brute_sigma_table(limit: int) -> np.ndarray:
    """sigma(n) for all n <= limit via divisor-sum accumulation (enumeration route).

    Independent of both factorize and the multiplicative sieve; used as the
    sweep oracle in tests. Index 0 is unused.
    """
    sig = np.zeros(limit + 1, dtype=np.int64)
    for d in range(1, limit + 1):
        sig[d::d] += d
    return sig


# ---------------------------------------------------------------------------
# multiplicative sigma sieve (factorization route, vectorized)

if _njit is not None:

    @_njit(cache=True)
    def _sigma_sieve_kernel(limit):
        # linear sieve tracking sigma of the smallest-prime-power part
        sig = np.ones(limit + 1, dtype=np.int64)
        spp = np.ones(limit + 1, dtype=np.int64)
        primes = np.zeros(limit // 2 + 1, dtype=np.int64)
        is_comp = np.zeros(limit + 1, dtype=np.uint8)
        count = 0
        for i in range(2, limit + 1):
            if not is_comp[i]:
                primes[count] = i
                count += 1
                sig[i] = i + 1
                spp[i] = i + 1
            j = 0
            while j < count:
                p = primes[j]
                ip = i * p
                if ip > limit:
                    break
                is_comp[ip] = 1
                if i % p == 0:
                    spp[ip] = spp[i] * p + 1
                    sig[ip] = (sig[i] // spp[i]) * spp[ip]
                    break
                spp[ip] = p + 1
                sig[ip] = sig[i] * (p + 1)
                j += 1
        return sig

else:  # pragma: no cover
    _sigma_sieve_kernel = None


def _sigma_sieve_python(limit: int) -> np.ndarray:
    sig = np.ones(limit + 1, dtype=np.int64)
    spp = np.ones(limit + 1, dtype=np.int64)
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in prime_sieve(limit):
        sel = spf[p::p]
        sel[sel == 0] = p
    for i in range(2, limit + 1):
        p = int(spf[i])
        m = i // p
        if m % p == 0:
            spp[i] = spp[m] * p + 1
            sig[i] = (sig[m] // spp[m]) * spp[i]
        else:
            spp[i] = p + 1
            sig[i] = sig[m] * (p + 1)
    return sig


@lru_cache(maxsize=2)
def sigma_table(limit: int) -> np.ndarray:
    """sigma(n) for all n <= limit via a linear multiplicative sieve.

    This is the engine's fast path for small values; it follows the prime
    factorization route (sigma as a product over prime powers), so the
    enumeration-based oracles remain independent checks of it.
    """
    if _sigma_sieve_kernel is not None:
        return _sigma_sieve_kernel(limit)
    return _sigma_sieve_python(limit)


# ---------------------------------------------------------------------------
# drivers

def _qualifies(k: int, m: int, sigma_2k: int) -> bool:
    # m odd, m | sigma(2^k), 2^(k-1) | sigma(m)
    if sigma_2k % m:
        return False
    return sigma_of(m) % (1 << (k - 1)) == 0


def driver_multipliers(n: int, budget: FactorBudget = DEFAULT_BUDGET) -> list[int]:
    """All odd m qualifying as driver multiplier for even n (ascending).

    Qualification: with 2^k exactly dividing n, m is an odd divisor of both
    n and sigma(2^k) = 2^(k+1) - 1, and 2^(k-1) divides sigma(m).
    """
    if n < 2 or n % 2:
        raise InvalidInput("drivers are defined for even n >= 2")
    k = (n & -n).bit_length() - 1
    sigma_2k = (1 << (k + 1)) - 1
    found = []
    for m in _divisors(sigma_2k, budget):
        if n % m == 0 and _qualifies(k, m, sigma_2k):
            found.append(m)
    return found


def find_driver(n: int, budget: FactorBudget = DEFAULT_BUDGET):
    """The driver 2^k * m of even n with maximal qualifying m, or None.

    Returns (driver, k, m). For n = 2 mod 4 the multiplier m = 1 always
    qualifies, so such n always has at least driver 2.
    """
    ms = driver_multipliers(n, budget)
    if not ms:
        return None
    k = (n & -n).bit_length() - 1
    m = ms[-1]
    return ((1 << k) * m, k, m)


def _divisors(n: int, budget: FactorBudget) -> list[int]:
    divs = [1]
    for p, e in factorize(n, budget).factors:
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def enumerate_drivers(max_power_of_two: int = 30, budget: FactorBudget = DEFAULT_BUDGET) -> list[int]:
    """All drivers 2^k * m with k <= max_power_of_two, ascending.

    A driver is even d = 2^k * m, 2^k exactly dividing d, with m an odd
    divisor of sigma(2^k) and 2^(k-1) dividing sigma(m). Even perfect
    numbers qualify; apart from them the list is {2, 24, 120, 672, 523776}.
    """
    found = set()
    for k in range(1, max_power_of_two + 1):
        sigma_2k = (1 << (k + 1)) - 1
        for m in _divisors(sigma_2k, budget):
            if _qualifies(k, m, sigma_2k):
                found.add((1 << k) * m)
    return sorted(found)
