"""Closed-form scaling laws of the addressing schemes, with enumeration oracles.

Routing-field width and addressing capability (number of distinct
nonempty covers a scheme can express) both have closed forms:

============  =============  ======================
scheme        routing bits   capability
============  =============  ======================
fbs           N              2**N - 1
symbol        2*log2(N)      3**log2(N)
hbs           k*log_k(N)     (2**k - 1)**log_k(N)
unicast       N*log2(N)      2**N - 1
============  =============  ======================

The unicast row is the worst-case total across the per-target packet
iteration (its per-packet field is just log2(N) bits, see
:func:`treecast.addressing.routing_bit_width`).

``enumerate_capability`` recounts capability by brute force: it walks
every well-formed address of a scheme, materializes its cover, and
counts distinct covers.  All capability arithmetic is exact integers.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .addressing import (
    Scheme,
    Sym,
    TreeConfig,
    _hbs_cover_mask,
    _symbol_cover_mask,
)


class EnumerationBudgetError(RuntimeError):
    """Raised when brute-force enumeration would exceed the address budget."""


def _log2_exact(n: int) -> int:
    if n < 1:
        raise ValueError(f"node count must be >= 1, got {n}")
    b = n.bit_length() - 1
    if (1 << b) != n:
        raise ValueError(f"node count {n} is not a power of two")
    return b


def _log_exact(n: int, k: int) -> int:
    """levels L with k**L == n, or ValueError."""
    if k < 2:
        raise ValueError(f"nodes per level must be >= 2, got {k}")
    levels = 0
    m = 1
    while m < n:
        m *= k
        levels += 1
    if m != n or levels == 0:
        raise ValueError(f"node count {n} is not a positive power of k={k}")
    return levels


def routing_bits_formula(scheme: Scheme, n: int, k: int | None = None) -> int:
    """Routing bits of ``scheme`` at node count ``n`` (``k`` only for hbs)."""
    scheme = Scheme(scheme)
    if scheme is Scheme.FBS:
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        return n
    if scheme is Scheme.SYMBOL:
        return 2 * _log2_exact(n)
    if scheme is Scheme.HBS:
        if k is None:
            raise ValueError("hbs routing bits require k")
        return k * _log_exact(n, k)
    return n * _log2_exact(n)


def capability_formula(scheme: Scheme, n: int, k: int | None = None) -> int:
    """Distinct nonempty covers expressible by ``scheme`` at node count ``n``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.FBS or scheme is Scheme.UNICAST:
        if n < 1:
            raise ValueError(f"node count must be >= 1, got {n}")
        return 2**n - 1
    if scheme is Scheme.SYMBOL:
        return 3 ** _log2_exact(n)
    if k is None:
        raise ValueError("hbs capability requires k")
    return (2**k - 1) ** _log_exact(n, k)


def routing_scaling_factor(k: int) -> float:
    """Growth factor k/log2(k) of the hierarchical routing-bit count.

    Minimized over the integers at k=3; k=2 and k=4 both give exactly 2,
    which matches the symbol scheme's two bits per index bit.  (Over the
    reals the minimum sits at e.)
    """
    if k < 2:
        raise ValueError(f"nodes per level must be >= 2, got {k}")
    return k / math.log2(k)


def capability_scaling_factor(k: int) -> float:
    """Growth factor (2**k - 1)**(1/log2(k)) of hierarchical capability.

    Strictly increasing in k; at k=2 it equals 3, the symbol scheme's
    three values per symbol.
    """
    if k < 2:
        raise ValueError(f"nodes per level must be >= 2, got {k}")
    return (2**k - 1) ** (1.0 / math.log2(k))


# ---------------------------------------------------------------------------
# brute-force oracle

#: Default ceiling on the number of addresses a single enumeration may walk.
DEFAULT_ENUMERATION_BUDGET = 2_000_000


def enumerate_capability(
    scheme: Scheme,
    cfg: TreeConfig,
    max_addresses: int = DEFAULT_ENUMERATION_BUDGET,
) -> int:
    """Count distinct nonempty covers by walking every well-formed address.

    Serves as the independent check of :func:`capability_formula`.
    Raises :class:`EnumerationBudgetError` when the scheme has more than
    ``max_addresses`` well-formed addresses on ``cfg`` (e.g. hbs with
    fan_out 8 and 3+ levels runs into billions of addresses).
    """
    scheme = Scheme(scheme)
    n = cfg.core_count
    covers: set[int] = set()

    if scheme is Scheme.FBS or scheme is Scheme.UNICAST:
        total = 2**n - 1
        if total > max_addresses:
            raise EnumerationBudgetError(
                f"{scheme.value}: {total} addresses exceed budget {max_addresses}"
            )
        for mask in range(1, 1 << n):
            covers.add(mask)
        return len(covers)

    if scheme is Scheme.SYMBOL:
        bits = cfg.index_bits
        total = 3**bits
        if total > max_addresses:
            raise EnumerationBudgetError(
                f"symbol: {total} addresses exceed budget {max_addresses}"
            )
        for symbols in itertools.product((Sym.ZERO, Sym.ONE, Sym.STAR), repeat=bits):
            covers.add(_symbol_cover_mask(symbols, bits))
        return len(covers)

    k, levels = cfg.fan_out, cfg.levels
    total = (2**k - 1) ** levels
    if total > max_addresses:
        raise EnumerationBudgetError(
            f"hbs: {total} addresses exceed budget {max_addresses}"
        )
    nonzero = range(1, 1 << k)
    for masks in itertools.product(nonzero, repeat=levels):
        covers.add(_hbs_cover_mask(masks, k, levels))
    return len(covers)


# ---------------------------------------------------------------------------
# tabular report

_SCHEME_ORDER = (Scheme.FBS, Scheme.SYMBOL, Scheme.HBS, Scheme.UNICAST)

CSV_HEADER = ("scheme", "N", "k", "routing_bits", "capability", "lut_bits_per_source")


@dataclass(frozen=True)
class ScalingRow:
    """One (scheme, N, k) evaluation of the closed forms."""

    scheme: str
    n: int
    k: int
    routing_bits: int
    capability: int
    lut_bits_per_source: int


def lut_bits_per_source(scheme: Scheme, n: int, k: int | None = None) -> int:
    """Per-source-neuron LUT storage.

    The parallel multicast schemes store one address per source, so this
    equals their routing width; unicast stores up to N target entries of
    log2(N) bits each.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.UNICAST:
        return n * _log2_exact(n)
    return routing_bits_formula(scheme, n, k)


def emit_scaling_table(n_values: Iterable[int], k_values: Iterable[int]) -> list[ScalingRow]:
    """One row per (scheme, N, k), N-major then scheme then k.

    Every (N, k) pair must be valid for every scheme (N a power of two
    and of k), so pass matching ranges, e.g. powers of 4 with k in {2,4}.
    """
    rows = []
    for n in n_values:
        for scheme in _SCHEME_ORDER:
            for k in k_values:
                rows.append(
                    ScalingRow(
                        scheme=scheme.value,
                        n=n,
                        k=k,
                        routing_bits=routing_bits_formula(scheme, n, k),
                        capability=capability_formula(scheme, n, k),
                        lut_bits_per_source=lut_bits_per_source(scheme, n, k),
                    )
                )
    return rows


def write_scaling_csv(rows: Sequence[ScalingRow], out: IO[str]) -> None:
    """Write rows as CSV; capabilities are printed in full decimal."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.scheme, r.n, r.k, r.routing_bits, r.capability, r.lut_bits_per_source])
