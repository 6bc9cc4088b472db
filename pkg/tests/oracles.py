"""Brute-force reference implementations, independent of the library code.

Each function recomputes covers straight from the scheme definitions so
the tests never check the library against itself.
"""

import itertools


def index_from_digits(digits, k):
    idx = 0
    for d in digits:
        idx = idx * k + d
    return idx


def digits_of(index, k, levels):
    out = []
    for _ in range(levels):
        out.append(index % k)
        index //= k
    return tuple(reversed(out))


def symbol_cover(pattern, n):
    """Cores whose binary index (MSB first) matches the pattern."""
    bits = n.bit_length() - 1
    assert 1 << bits == n
    assert len(pattern) == bits
    out = set()
    for i in range(n):
        if all(
            c == "*" or int(c) == ((i >> (bits - 1 - pos)) & 1)
            for pos, c in enumerate(pattern)
        ):
            out.add(i)
    return frozenset(out)


def all_symbol_patterns(n):
    bits = n.bit_length() - 1
    for chars in itertools.product("01*", repeat=bits):
        yield "".join(chars)


def hbs_cover(masks, k):
    """Cartesian product of the per-level digit sets, as core indices."""
    digit_sets = [[d for d in range(k) if (m >> d) & 1] for m in masks]
    return frozenset(
        index_from_digits(digits, k) for digits in itertools.product(*digit_sets)
    )


def all_hbs_masks(k, levels):
    yield from itertools.product(range(1, 1 << k), repeat=levels)


def minimal_covers(dests, covers):
    """(size, list) of the smallest covers among ``covers`` containing ``dests``."""
    best = None
    hits = []
    for c in covers:
        if dests <= c:
            if best is None or len(c) < best:
                best = len(c)
                hits = [c]
            elif len(c) == best:
                hits.append(c)
    return best, hits


def root_to_leaf_edges(core, k, levels):
    """Edges (level, child_index) on the unique root-to-core path."""
    edges = []
    child = core
    for level in range(1, levels + 1):
        edges.append((level, child))
        child //= k
    return list(reversed(edges))
