"""Counter-based random streams.

A stream is addressed by ``(seed, stream, tag)``; uniform number ``k`` of a
stream is word ``k % 4`` of Philox4x64-10 evaluated at counter
``(k // 4, stream, tag, 0)`` with key ``seed``.  Nothing is carried between
draws except the position ``k``, which is what makes per-particle streams
independent of how particles are split across workers.
"""

from . import kernels

TAG_USER = 0
TAG_ENSEMBLE = 1
TAG_CONDITIONAL = 2
TAG_PHASE_CHECK = 3

_MASK64 = (1 << 64) - 1


def seed_key(seed):
    seed = int(seed)
    if seed < 0 or seed >> 128:
        raise ValueError(f"seed must be a non-negative integer below 2**128, got {seed}")
    return seed & _MASK64, (seed >> 64) & _MASK64


class RandomStream:
    """Sequential view of one counter-based stream.

    Not thread-safe: two threads must not draw from the same instance.
    """

    def __init__(self, seed, stream=0, tag=TAG_USER, position=0):
        self.seed = int(seed)
        self.key = seed_key(seed)
        self.stream = int(stream)
        self.tag = int(tag)
        self.position = int(position)

    def __repr__(self):
        return (f"RandomStream(seed={self.seed}, stream={self.stream}, "
                f"tag={self.tag}, position={self.position})")

    def uniforms(self, n):
        """Next ``n`` uniforms on the open interval (0, 1)."""
        out = kernels.uniforms(self.key[0], self.key[1], self.stream, self.tag,
                               self.position, n, backend="numpy")
        self.position += int(n)
        return out

    def spawn(self, stream, tag=None):
        """Fresh stream sharing this seed."""
        return RandomStream(self.seed, stream, self.tag if tag is None else tag)
