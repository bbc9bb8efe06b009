"""splitmix64 pseudo-random stream shared by every seeded generator."""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_FLOAT_SCALE = 1.0 / (1 << 53)


class SplitMix64:
    """64-bit splitmix generator.

    Identical seeds produce identical streams; floats take the top 53 bits of
    each output so they reproduce bit-exactly on any IEEE-754 platform.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform float in [0, 1)."""
        return (self.next_u64() >> 11) * _FLOAT_SCALE

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection on the top bits."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (MASK64 + 1) - ((MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()


def derive_seed(base_seed: int, index: int) -> int:
    """Seed of the index-th independent run derived from base_seed.

    It is the index-th output of the splitmix64 stream seeded with base_seed
    (index 0 is the first output).
    """
    rng = SplitMix64(base_seed)
    value = 0
    for _ in range(index + 1):
        value = rng.next_u64()
    return value
