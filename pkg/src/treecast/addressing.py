"""Destination-set address codecs for cores at the leaves of a k-ary tree.

Cores sit at the leaves of a balanced tree with ``fan_out`` children per
switch and ``levels`` levels, so there are ``fan_out ** levels`` cores.
A multicast address names a set of destination cores in one of four
interchangeable encodings:

* flat bitmask (``fbs``)     -- one bit per core; exact, header width N
* symbol string (``symbol``) -- one {0,1,*} symbol per index bit; width
  2*log2(N), may cover extra cores
* hierarchical masks (``hbs``) -- one k-bit child mask per tree level;
  width k*levels, may cover extra cores but never more than the symbol
  encoding of the same destinations (for power-of-two fan-out)
* unicast list (``unicast``) -- plain target indices, one packet each

The region-based encodings (symbol, hbs) trade header width for
overcoverage: cores outside the requested set that still receive the
packet and must filter it.  ``covered_set`` and ``overcoverage``
quantify that trade.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union


class Scheme(str, Enum):
    """Identifier for the four addressing encodings."""

    FBS = "fbs"
    SYMBOL = "symbol"
    HBS = "hbs"
    UNICAST = "unicast"


class Sym(str, Enum):
    """One position of a symbol address: fixed bit value or wildcard."""

    ZERO = "0"
    ONE = "1"
    STAR = "*"


@dataclass(frozen=True)
class TreeConfig:
    """Shape of the core tree: ``fan_out`` children per switch, ``levels`` deep."""

    fan_out: int
    levels: int

    def __post_init__(self) -> None:
        if not isinstance(self.fan_out, int) or self.fan_out < 2:
            raise ValueError(f"fan_out must be an integer >= 2, got {self.fan_out!r}")
        if not isinstance(self.levels, int) or self.levels < 1:
            raise ValueError(f"levels must be an integer >= 1, got {self.levels!r}")

    @property
    def core_count(self) -> int:
        return self.fan_out ** self.levels

    @property
    def index_bits(self) -> int:
        """log2 of the core count.  Raises when it is not a power of two."""
        n = self.core_count
        b = n.bit_length() - 1
        if (1 << b) != n:
            raise ValueError(
                f"core count {n} (fan_out={self.fan_out}, levels={self.levels}) "
                "is not a power of two; the symbol scheme does not apply"
            )
        return b


@dataclass(frozen=True)
class FbsAddress:
    """Flat bitmask: bit i set means core i is a destination."""

    mask: int

    scheme = Scheme.FBS

    def __post_init__(self) -> None:
        if self.mask <= 0:
            raise ValueError("flat bitmask must be a nonzero positive integer")


@dataclass(frozen=True)
class SymbolAddress:
    """Per-index-bit symbols, root-level bit first."""

    symbols: tuple[Sym, ...]

    scheme = Scheme.SYMBOL

    def __post_init__(self) -> None:
        if not self.symbols:
            raise ValueError("symbol address must have at least one symbol")
        if not all(isinstance(s, Sym) for s in self.symbols):
            raise ValueError("symbol address entries must be Sym values")


@dataclass(frozen=True)
class HbsAddress:
    """One k-bit child mask per tree level, root level first.

    Bit d of a level mask selects child digit d at that level.  A zero
    mask would select no child and is rejected.
    """

    masks: tuple[int, ...]

    scheme = Scheme.HBS

    def __post_init__(self) -> None:
        if not self.masks:
            raise ValueError("hierarchical address must have at least one level mask")
        if any(m <= 0 for m in self.masks):
            raise ValueError("every level mask must be nonzero (a zero mask covers no core)")


@dataclass(frozen=True)
class UnicastAddress:
    """Explicit target list; the simulator emits one packet per entry."""

    targets: tuple[int, ...]

    scheme = Scheme.UNICAST

    def __post_init__(self) -> None:
        if not self.targets:
            raise ValueError("unicast target list must be nonempty")
        if any(t < 0 for t in self.targets):
            raise ValueError("unicast targets must be nonnegative core indices")


MulticastAddress = Union[FbsAddress, SymbolAddress, HbsAddress, UnicastAddress]


# ---------------------------------------------------------------------------
# core index <-> tree path

def path_of(index: int, cfg: TreeConfig) -> tuple[int, ...]:
    """Base-k digits of a core index, root-level digit first."""
    n = cfg.core_count
    if not 0 <= index < n:
        raise ValueError(f"core index {index} out of range [0, {n})")
    k = cfg.fan_out
    digits = [0] * cfg.levels
    for i in range(cfg.levels - 1, -1, -1):
        digits[i] = index % k
        index //= k
    return tuple(digits)


def index_of(digits: Sequence[int], cfg: TreeConfig) -> int:
    """Inverse of :func:`path_of`."""
    if len(digits) != cfg.levels:
        raise ValueError(f"expected {cfg.levels} digits, got {len(digits)}")
    k = cfg.fan_out
    index = 0
    for d in digits:
        if not 0 <= d < k:
            raise ValueError(f"digit {d} out of range [0, {k})")
        index = index * k + d
    return index


def _check_dests(dests: Iterable[int], cfg: TreeConfig) -> frozenset[int]:
    members = frozenset(dests)
    if not members:
        raise ValueError("destination set must be nonempty")
    n = cfg.core_count
    for d in members:
        if not 0 <= d < n:
            raise ValueError(f"destination {d} out of range [0, {n})")
    return members


# ---------------------------------------------------------------------------
# encoders

def encode_fbs(dests: Iterable[int], cfg: TreeConfig) -> FbsAddress:
    """Exact flat bitmask of the destination set."""
    members = _check_dests(dests, cfg)
    mask = 0
    for d in members:
        mask |= 1 << d
    return FbsAddress(mask)


def encode_symbol(dests: Iterable[int], cfg: TreeConfig) -> SymbolAddress:
    """Minimal covering symbol string.

    Each index-bit position gets a fixed symbol when all destinations
    agree there, and the wildcard otherwise.  The resulting cover is the
    smallest symbol-expressible superset of the destinations.
    """
    members = _check_dests(dests, cfg)
    bits = cfg.index_bits
    symbols = []
    for pos in range(bits):
        shift = bits - 1 - pos  # pos 0 is the root-level (most significant) bit
        seen = {(d >> shift) & 1 for d in members}
        if seen == {0}:
            symbols.append(Sym.ZERO)
        elif seen == {1}:
            symbols.append(Sym.ONE)
        else:
            symbols.append(Sym.STAR)
    return SymbolAddress(tuple(symbols))


def encode_hbs(dests: Iterable[int], cfg: TreeConfig) -> HbsAddress:
    """Minimal covering hierarchical masks.

    The level-l mask is the union of level-l path digits over all
    destinations; the cover is the Cartesian product of the per-level
    digit sets, the smallest such product containing the destinations.
    """
    members = _check_dests(dests, cfg)
    masks = [0] * cfg.levels
    for d in members:
        for lvl, digit in enumerate(path_of(d, cfg)):
            masks[lvl] |= 1 << digit
    return HbsAddress(tuple(masks))


def encode_unicast(dests: Iterable[int], cfg: TreeConfig) -> UnicastAddress:
    """Target list in ascending core-index order."""
    members = _check_dests(dests, cfg)
    return UnicastAddress(tuple(sorted(members)))


def encode(scheme: Scheme, dests: Iterable[int], cfg: TreeConfig) -> MulticastAddress:
    """Dispatch to the encoder for ``scheme``."""
    scheme = Scheme(scheme)
    if scheme is Scheme.FBS:
        return encode_fbs(dests, cfg)
    if scheme is Scheme.SYMBOL:
        return encode_symbol(dests, cfg)
    if scheme is Scheme.HBS:
        return encode_hbs(dests, cfg)
    return encode_unicast(dests, cfg)


# ---------------------------------------------------------------------------
# decode

def _symbol_cover_mask(symbols: Sequence[Sym], bits: int) -> int:
    # Build the cover bitmask from the least significant index bit up:
    # each fixed symbol shifts the partial cover into one half, the
    # wildcard keeps both halves.
    cover = 1
    span = 1
    for pos in range(bits - 1, -1, -1):
        sym = symbols[pos]
        if sym is Sym.ZERO:
            pass
        elif sym is Sym.ONE:
            cover = cover << span
        else:
            cover = cover | (cover << span)
        span <<= 1
    return cover


def _hbs_cover_mask(masks: Sequence[int], fan_out: int, levels: int) -> int:
    # Same construction per level: replicate the partial cover into the
    # block of every selected child digit, leaf level first.
    cover = 1
    span = 1
    for lvl in range(levels - 1, -1, -1):
        m = masks[lvl]
        acc = 0
        for d in range(fan_out):
            if m & (1 << d):
                acc |= cover << (d * span)
        cover = acc
        span *= fan_out
    return cover


def cover_mask(addr: MulticastAddress, cfg: TreeConfig) -> int:
    """Covered set as a core bitmask (bit i set means core i receives)."""
    n = cfg.core_count
    if isinstance(addr, FbsAddress):
        if addr.mask >= (1 << n):
            raise ValueError(f"flat bitmask wider than {n} cores")
        return addr.mask
    if isinstance(addr, SymbolAddress):
        bits = cfg.index_bits
        if len(addr.symbols) != bits:
            raise ValueError(f"expected {bits} symbols for {n} cores, got {len(addr.symbols)}")
        return _symbol_cover_mask(addr.symbols, bits)
    if isinstance(addr, HbsAddress):
        if len(addr.masks) != cfg.levels:
            raise ValueError(f"expected {cfg.levels} level masks, got {len(addr.masks)}")
        if any(m >= (1 << cfg.fan_out) for m in addr.masks):
            raise ValueError(f"level mask wider than fan_out={cfg.fan_out} bits")
        return _hbs_cover_mask(addr.masks, cfg.fan_out, cfg.levels)
    if isinstance(addr, UnicastAddress):
        mask = 0
        for t in addr.targets:
            if t >= n:
                raise ValueError(f"unicast target {t} out of range [0, {n})")
            mask |= 1 << t
        return mask
    raise TypeError(f"not a multicast address: {addr!r}")


def covered_set(addr: MulticastAddress, cfg: TreeConfig) -> frozenset[int]:
    """The set of cores that will receive a packet carrying ``addr``."""
    mask = cover_mask(addr, cfg)
    out = []
    idx = 0
    while mask:
        if mask & 1:
            out.append(idx)
        mask >>= 1
        idx += 1
    return frozenset(out)


def overcoverage(addr: MulticastAddress, dests: Iterable[int], cfg: TreeConfig) -> int:
    """How many covered cores are not actual destinations."""
    members = _check_dests(dests, cfg)
    cm = cover_mask(addr, cfg)
    dm = 0
    for d in members:
        dm |= 1 << d
    if dm & ~cm:
        raise ValueError("address does not cover every destination (encoder bug?)")
    return cm.bit_count() - dm.bit_count()


def rotate_hbs(addr: HbsAddress) -> HbsAddress:
    """Cyclic left rotation of the level masks by one level.

    This is the per-hop header transformation of the tree switches:
    every switch reads the head mask, and rotation realigns the field
    so the next level's mask is at the head for the switches below.
    """
    masks = addr.masks
    return HbsAddress(masks[1:] + masks[:1])


def routing_bit_width(scheme: Scheme, cfg: TreeConfig) -> int:
    """Per-packet routing field width of ``scheme`` on ``cfg``.

    Unicast is the per-packet target index width; for core counts that
    are not powers of two it rounds up to the next whole bit.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.FBS:
        return cfg.core_count
    if scheme is Scheme.SYMBOL:
        return 2 * cfg.index_bits
    if scheme is Scheme.HBS:
        return cfg.fan_out * cfg.levels
    n = cfg.core_count
    return max(1, (n - 1).bit_length())


# ---------------------------------------------------------------------------
# canonical text form

def format_address(addr: MulticastAddress, cfg: TreeConfig) -> str:
    """Canonical text form, as consumed and produced by the CLI.

    fbs: N-char binary string, bit N-1 leftmost.  symbol: {0,1,*} string,
    root-level bit first.  hbs: slash-separated k-bit binary masks, root
    level first.  unicast: comma-separated decimal indices.
    """
    if isinstance(addr, FbsAddress):
        return format(addr.mask, f"0{cfg.core_count}b")
    if isinstance(addr, SymbolAddress):
        return "".join(s.value for s in addr.symbols)
    if isinstance(addr, HbsAddress):
        return "/".join(format(m, f"0{cfg.fan_out}b") for m in addr.masks)
    if isinstance(addr, UnicastAddress):
        return ",".join(str(t) for t in addr.targets)
    raise TypeError(f"not a multicast address: {addr!r}")


def parse_address(scheme: Scheme, text: str, cfg: TreeConfig) -> MulticastAddress:
    """Inverse of :func:`format_address`."""
    scheme = Scheme(scheme)
    text = text.strip()
    if scheme is Scheme.FBS:
        n = cfg.core_count
        if len(text) != n or any(c not in "01" for c in text):
            raise ValueError(f"fbs address must be a {n}-char binary string")
        return FbsAddress(int(text, 2))
    if scheme is Scheme.SYMBOL:
        bits = cfg.index_bits
        if len(text) != bits or any(c not in "01*" for c in text):
            raise ValueError(f"symbol address must be {bits} chars over 0/1/*")
        return SymbolAddress(tuple(Sym(c) for c in text))
    if scheme is Scheme.HBS:
        parts = text.split("/")
        if len(parts) != cfg.levels:
            raise ValueError(f"hbs address must have {cfg.levels} slash-separated masks")
        k = cfg.fan_out
        masks = []
        for p in parts:
            if len(p) != k or any(c not in "01" for c in p):
                raise ValueError(f"each hbs level mask must be a {k}-char binary string")
            masks.append(int(p, 2))
        return HbsAddress(tuple(masks))
    try:
        targets = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise ValueError("unicast address must be comma-separated decimal indices") from None
    addr = UnicastAddress(targets)
    cover_mask(addr, cfg)  # range check
    return addr
